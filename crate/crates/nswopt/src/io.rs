//! JSON instance files.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nswopt_core::rational::Rational;
use nswopt_core::{OneSidedInstance, TwoSidedInstance, Valuation, ValuationKind, WeightedInstance};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed instance: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad number {0:?}: expected an integer or a \"p/q\" string")]
    Number(String),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Model(#[from] nswopt_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, FormatError>;

/// A number as written in a file: a JSON integer or a `"p/q"` string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Int(i64),
    Text(String),
}

impl Number {
    fn parse(&self) -> Result<Rational> {
        match self {
            Number::Int(v) => Ok(Rational::from_integer(BigInt::from(*v))),
            Number::Text(s) => {
                let bad = || FormatError::Number(s.clone());
                let (p, q) = match s.split_once('/') {
                    Some((p, q)) => (p.trim(), q.trim()),
                    None => (s.trim(), "1"),
                };
                let p: BigInt = p.parse().map_err(|_| bad())?;
                let q: BigInt = q.parse().map_err(|_| bad())?;
                if !q.is_positive() {
                    return Err(bad());
                }
                Ok(Rational::new(p, q))
            }
        }
    }

    fn from_rational(r: &Rational) -> Self {
        match r.is_integer().then(|| r.numer().to_i64()).flatten() {
            Some(v) => Number::Int(v),
            None => Number::Text(r.to_string()),
        }
    }
}

fn parse_all(values: &[Number]) -> Result<Vec<Rational>> {
    values.iter().map(Number::parse).collect()
}

fn write_all(values: &[Rational]) -> Vec<Number> {
    values.iter().map(Number::from_rational).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ValuationJson {
    Additive {
        values: Vec<Number>,
    },
    Capped {
        values: Vec<Number>,
        cap: usize,
    },
    Coverage {
        universe: usize,
        weights: Vec<Number>,
        sets: Vec<Vec<usize>>,
    },
    Table {
        values: Vec<Number>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsJson {
    pub firms: Vec<Number>,
    pub workers: Vec<Number>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelName {
    #[serde(rename = "one-sided")]
    OneSided,
    #[serde(rename = "two-sided")]
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub model: ModelName,
    pub n: usize,
    pub m: usize,
    pub capacities: Vec<usize>,
    pub valuations: Vec<ValuationJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worker_values: Option<Vec<Vec<Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsJson>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    OneSided(OneSidedInstance),
    TwoSided(TwoSidedInstance),
    Weighted(WeightedInstance),
}

impl Instance {
    pub fn model_name(&self) -> &'static str {
        match self {
            Instance::OneSided(_) => "one-sided",
            Instance::TwoSided(_) => "two-sided",
            Instance::Weighted(_) => "weighted two-sided",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::OneSided(i) => i.n(),
            Instance::TwoSided(i) => i.n(),
            Instance::Weighted(i) => i.market().n(),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Instance::OneSided(i) => i.m(),
            Instance::TwoSided(i) => i.m(),
            Instance::Weighted(i) => i.market().m(),
        }
    }
}

fn valuation_from_json(v: &ValuationJson, m: usize) -> Result<Valuation> {
    let check_len = |len: usize, what: &str| {
        if len == m {
            Ok(())
        } else {
            Err(FormatError::Schema(format!("{what} has {len} entries, expected m = {m}")))
        }
    };
    let valuation = match v {
        ValuationJson::Additive { values } => {
            check_len(values.len(), "additive values")?;
            Valuation::additive(parse_all(values)?)?
        }
        ValuationJson::Capped { values, cap } => {
            check_len(values.len(), "capped values")?;
            Valuation::capped(parse_all(values)?, *cap)?
        }
        ValuationJson::Coverage {
            universe,
            weights,
            sets,
        } => {
            check_len(sets.len(), "coverage sets")?;
            if weights.len() != *universe {
                return Err(FormatError::Schema(format!(
                    "coverage universe is {universe} but {} weights are given",
                    weights.len()
                )));
            }
            Valuation::coverage(parse_all(weights)?, sets.clone())?
        }
        ValuationJson::Table { values } => Valuation::table(m, parse_all(values)?)?,
    };
    Ok(valuation)
}

fn valuation_to_json(v: &Valuation) -> ValuationJson {
    match v.kind() {
        ValuationKind::Additive { values } => ValuationJson::Additive {
            values: write_all(values),
        },
        ValuationKind::Capped { values, cap } => ValuationJson::Capped {
            values: write_all(values),
            cap: *cap,
        },
        ValuationKind::Coverage { weights, sets } => ValuationJson::Coverage {
            universe: weights.len(),
            weights: write_all(weights),
            sets: sets.clone(),
        },
        ValuationKind::Table { values, .. } => ValuationJson::Table {
            values: write_all(values),
        },
    }
}

impl InstanceJson {
    pub fn into_instance(self) -> Result<Instance> {
        if self.capacities.len() != self.n || self.valuations.len() != self.n {
            return Err(FormatError::Schema(format!(
                "n = {} but {} capacities and {} valuations are given",
                self.n,
                self.capacities.len(),
                self.valuations.len()
            )));
        }
        let valuations = self
            .valuations
            .iter()
            .map(|v| valuation_from_json(v, self.m))
            .collect::<Result<Vec<_>>>()?;
        match self.model {
            ModelName::OneSided => {
                if self.worker_values.is_some() || self.weights.is_some() {
                    return Err(FormatError::Schema(
                        "one-sided instances take no worker values or weights".into(),
                    ));
                }
                Ok(Instance::OneSided(OneSidedInstance::new(valuations, self.capacities)?))
            }
            ModelName::TwoSided => {
                let rows = self
                    .worker_values
                    .ok_or_else(|| FormatError::Schema("two-sided instances need worker_values".into()))?;
                if rows.len() != self.m || rows.iter().any(|r| r.len() != self.n) {
                    return Err(FormatError::Schema(format!(
                        "worker_values must be {} rows of {} entries",
                        self.m, self.n
                    )));
                }
                let worker_values = rows.iter().map(|r| parse_all(r)).collect::<Result<Vec<_>>>()?;
                if worker_values.iter().flatten().any(Signed::is_negative) {
                    return Err(FormatError::Schema("worker values must be nonnegative".into()));
                }
                let market = TwoSidedInstance::new(valuations, worker_values, self.capacities)?;
                match self.weights {
                    None => Ok(Instance::TwoSided(market)),
                    Some(w) => Ok(Instance::Weighted(WeightedInstance::with_any_valuations(
                        market,
                        parse_all(&w.firms)?,
                        parse_all(&w.workers)?,
                    )?)),
                }
            }
        }
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let one = |inst: &OneSidedInstance| InstanceJson {
            model: ModelName::OneSided,
            n: inst.n(),
            m: inst.m(),
            capacities: inst.capacities().to_vec(),
            valuations: inst.valuations().iter().map(valuation_to_json).collect(),
            worker_values: None,
            weights: None,
        };
        let two = |inst: &TwoSidedInstance| InstanceJson {
            model: ModelName::TwoSided,
            n: inst.n(),
            m: inst.m(),
            capacities: inst.capacities().to_vec(),
            valuations: inst.firm_valuations().iter().map(valuation_to_json).collect(),
            worker_values: Some(inst.worker_values().iter().map(|r| write_all(r)).collect()),
            weights: None,
        };
        match inst {
            Instance::OneSided(i) => one(i),
            Instance::TwoSided(i) => two(i),
            Instance::Weighted(i) => InstanceJson {
                weights: Some(WeightsJson {
                    firms: write_all(i.firm_weights()),
                    workers: write_all(i.worker_weights()),
                }),
                ..two(i.market())
            },
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    serde_json::from_str::<InstanceJson>(text)?.into_instance()
}

pub fn read_instance(mut reader: impl Read) -> Result<Instance> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_instance(&text)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn instance_to_string(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceJson::from_instance(inst)).expect("serializable");
    s.push('\n');
    s
}

pub fn write_instance(inst: &Instance, mut writer: impl Write) -> Result<()> {
    writer.write_all(instance_to_string(inst).as_bytes())?;
    Ok(())
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    fs::write(path, instance_to_string(inst))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(Number::Int(3).parse().unwrap(), Rational::from_integer(3.into()));
        assert_eq!(
            Number::Text("6/4".into()).parse().unwrap(),
            Rational::new(3.into(), 2.into())
        );
        assert!(Number::Text("1/0".into()).parse().is_err());
        assert!(Number::Text("x".into()).parse().is_err());
    }

    #[test]
    fn plain_integers_accepted() {
        let text = r#"{"model":"one-sided","n":1,"m":2,"capacities":[1],
            "valuations":[{"kind":"additive","values":[3,"1/2"]}]}"#;
        let Instance::OneSided(inst) = parse_instance(text).unwrap() else {
            panic!("expected one-sided");
        };
        assert_eq!(inst.valuation(0).value(&[0, 1]).unwrap(), Rational::new(7.into(), 2.into()));
    }

    #[test]
    fn zero_capacity_rejected() {
        let text = r#"{"model":"one-sided","n":1,"m":1,"capacities":[0],
            "valuations":[{"kind":"additive","values":[1]}]}"#;
        assert!(matches!(parse_instance(text), Err(FormatError::Model(_))));
    }

    #[test]
    fn short_capacity_rejected() {
        // 2 firms with capacity 2 cannot take 5 workers
        let text = r#"{"model":"two-sided","n":2,"m":5,"capacities":[2,2],
            "valuations":[{"kind":"additive","values":[1,1,1,1,1]},{"kind":"additive","values":[1,1,1,1,1]}],
            "worker_values":[[1,1],[1,1],[1,1],[1,1],[1,1]]}"#;
        assert!(matches!(parse_instance(text), Err(FormatError::Model(_))));
    }

    #[test]
    fn negative_value_rejected() {
        let text = r#"{"model":"one-sided","n":1,"m":1,"capacities":[1],
            "valuations":[{"kind":"additive","values":["-1/2"]}]}"#;
        assert!(parse_instance(text).is_err());
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"model":"one-sided","n":1,"m":1,"capacities":[1],"extra":1,
            "valuations":[{"kind":"additive","values":[1]}]}"#;
        assert!(matches!(parse_instance(text), Err(FormatError::Json(_))));
    }
}
