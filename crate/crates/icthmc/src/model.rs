//! JSON interchange format for models and queries.
//!
//! A model file describes the state space, the rate-matrix set, the initial
//! credal set, and the output model; a query file carries an observation
//! sequence, a target time, the query function, and a tolerance. Parsing is
//! plain serde; `validate` re-checks every structural invariant and reports
//! one line per violation, while `to_*` conversions build the library types
//! (which re-validate numerically).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outputs::{
    GaussianParams, Observation, ObservationPayload, ObservationSequence, OutputModel,
};
use crate::propagation::CredalSet;
use crate::ratesets::{RateMatrixSet, StateFunction, StateSpace};
use crate::{Icthmc, Query};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub states: Vec<String>,
    pub rate_set: RateSetSpec,
    pub initial_credal: CredalSpec,
    pub output_model: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RateSetSpec {
    /// Per-state candidate rows, full rows including the diagonal.
    Generators {
        rows: BTreeMap<String, Vec<Vec<f64>>>,
    },
    /// Elementwise off-diagonal bounds; diagonals must be `null`.
    Intervals {
        lower: Vec<Vec<Option<f64>>>,
        upper: Vec<Vec<Option<f64>>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum CredalSpec {
    Vertices { pmfs: Vec<Vec<f64>> },
    Vacuous,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum OutputSpec {
    Categorical {
        alphabet: Vec<String>,
        pmfs: BTreeMap<String, Vec<f64>>,
    },
    Gaussian {
        params: BTreeMap<String, GaussianSpec>,
    },
    Tabulated {
        grid: Vec<f64>,
        densities: BTreeMap<String, Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryFile {
    pub observations: Vec<ObservationSpec>,
    pub target_time: f64,
    pub f: BTreeMap<String, f64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationSpec {
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EventSpec {
    Symbols(Vec<String>),
    Interval { interval: [f64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Value(f64),
    Symbol(String),
}

/// Check that every key of a per-state map is a declared state and that no
/// state is missing an entry.
fn check_state_map_keys<T>(
    what: &str,
    map: &BTreeMap<String, T>,
    states: &[String],
    out: &mut Vec<String>,
) {
    for key in map.keys() {
        if !states.contains(key) {
            out.push(format!(
                "referential integrity: {what} key {key:?} is not a declared state"
            ));
        }
    }
    for state in states {
        if !map.contains_key(state) {
            out.push(format!(
                "referential integrity: state {state:?} has no {what} entry"
            ));
        }
    }
}

fn per_state<T: Clone>(what: &str, map: &BTreeMap<String, T>, states: &[String]) -> Result<Vec<T>> {
    states
        .iter()
        .map(|s| {
            map.get(s)
                .cloned()
                .ok_or_else(|| Error::InvalidModel(format!("state {s:?} has no {what} entry")))
        })
        .collect()
}

/// Strip the `null` diagonal of an interval bound matrix, checking shape.
fn interval_matrix(which: &str, m: &[Vec<Option<f64>>], n: usize) -> Result<Vec<Vec<f64>>> {
    if m.len() != n {
        return Err(Error::InvalidModel(format!(
            "{which} interval matrix has {} rows, expected {n}",
            m.len()
        )));
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidModel(format!(
                "{which} interval matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let mut r = Vec::with_capacity(n);
        for (j, entry) in row.iter().enumerate() {
            match (i == j, entry) {
                (true, None) => r.push(0.0),
                (true, Some(v)) => {
                    return Err(Error::InvalidModel(format!(
                        "{which} interval matrix diagonal ({i},{i}) must be null, got {v}"
                    )))
                }
                (false, Some(v)) => r.push(*v),
                (false, None) => {
                    return Err(Error::InvalidModel(format!(
                        "{which} interval matrix entry ({i},{j}) must not be null"
                    )))
                }
            }
        }
        out.push(r);
    }
    Ok(out)
}

impl ModelFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files serialize")
    }

    /// One line per violated invariant; empty when the file is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        let states = &self.states;
        if let Err(e) = StateSpace::new(states.clone()) {
            out.push(format!("state space: {e}"));
        }
        match &self.rate_set {
            RateSetSpec::Generators { rows } => {
                check_state_map_keys("rate row", rows, states, &mut out);
                if out.is_empty() {
                    for state in states {
                        for (k, row) in rows[state].iter().enumerate() {
                            let sum: f64 = row.iter().sum();
                            if sum.abs() > 1e-9 * row.iter().map(|v| v.abs()).sum::<f64>().max(1.0)
                            {
                                out.push(format!(
                                    "rate row {k} for state {state:?} does not sum to zero \
                                     (sum {sum:.3e})"
                                ));
                            }
                            if row.iter().enumerate().any(|(j, &v)| {
                                j != states.iter().position(|s| s == state).unwrap() && v < 0.0
                            }) {
                                out.push(format!(
                                    "rate row {k} for state {state:?} has a negative \
                                     off-diagonal entry"
                                ));
                            }
                        }
                    }
                }
            }
            RateSetSpec::Intervals { .. } => {}
        }
        if out.is_empty() {
            if let Err(e) = self.to_rate_set() {
                out.push(format!("rate set: {e}"));
            }
        }
        match self.to_credal_set() {
            Ok(c) if c.dim() != states.len() => out.push(format!(
                "initial credal set dimension {} does not match {} states",
                c.dim(),
                states.len()
            )),
            Ok(_) => {}
            Err(e) => out.push(format!("initial credal set: {e}")),
        }
        match &self.output_model {
            OutputSpec::Categorical { pmfs, .. } => {
                check_state_map_keys("output pmf", pmfs, states, &mut out)
            }
            OutputSpec::Gaussian { params } => {
                check_state_map_keys("output parameter", params, states, &mut out)
            }
            OutputSpec::Tabulated { densities, .. } => {
                check_state_map_keys("output density", densities, states, &mut out)
            }
        }
        if let Err(e) = self.to_output_model() {
            out.push(format!("output model: {e}"));
        }
        out
    }

    fn to_rate_set(&self) -> Result<RateMatrixSet> {
        match &self.rate_set {
            RateSetSpec::Generators { rows } => {
                let per = per_state("rate row", rows, &self.states)?;
                RateMatrixSet::generator_rows(per)
            }
            RateSetSpec::Intervals { lower, upper } => {
                let n = self.states.len();
                RateMatrixSet::interval_rows(
                    interval_matrix("lower", lower, n)?,
                    interval_matrix("upper", upper, n)?,
                )
            }
        }
    }

    fn to_credal_set(&self) -> Result<CredalSet> {
        match &self.initial_credal {
            CredalSpec::Vertices { pmfs } => CredalSet::new(pmfs.clone()),
            CredalSpec::Vacuous => Ok(CredalSet::vacuous(self.states.len())),
        }
    }

    fn to_output_model(&self) -> Result<OutputModel> {
        match &self.output_model {
            OutputSpec::Categorical { alphabet, pmfs } => OutputModel::categorical(
                alphabet.clone(),
                per_state("output pmf", pmfs, &self.states)?,
            ),
            OutputSpec::Gaussian { params } => OutputModel::gaussian(
                per_state("output parameter", params, &self.states)?
                    .into_iter()
                    .map(|p| GaussianParams {
                        mean: p.mean,
                        std: p.std,
                    })
                    .collect(),
            ),
            OutputSpec::Tabulated { grid, densities } => OutputModel::tabulated(
                grid.clone(),
                per_state("output density", densities, &self.states)?,
            ),
        }
    }

    pub fn to_model(&self) -> Result<Icthmc> {
        Icthmc::new(
            StateSpace::new(self.states.clone())?,
            self.to_rate_set()?,
            self.to_credal_set()?,
            self.to_output_model()?,
        )
    }
}

impl ObservationSpec {
    fn payload(&self) -> Result<ObservationPayload> {
        match (&self.event, &self.point) {
            (Some(e), None) => Ok(match e {
                EventSpec::Symbols(s) => ObservationPayload::EventSymbols(s.clone()),
                EventSpec::Interval { interval: [a, b] } => {
                    ObservationPayload::EventInterval { a: *a, b: *b }
                }
            }),
            (None, Some(p)) => Ok(match p {
                PointSpec::Value(y) => ObservationPayload::PointValue(*y),
                PointSpec::Symbol(s) => ObservationPayload::PointSymbol(s.clone()),
            }),
            _ => Err(Error::InvalidInput(format!(
                "observation at time {} must have exactly one of \"event\" or \"point\"",
                self.time
            ))),
        }
    }
}

impl QueryFile {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("query files serialize")
    }

    /// One line per violated invariant, given the model's state list.
    pub fn validate(&self, states: &[String]) -> Vec<String> {
        let mut out = Vec::new();
        match self.to_observations() {
            Ok(_) => {}
            Err(e) => out.push(format!("observations: {e}")),
        }
        for key in self.f.keys() {
            if !states.iter().any(|s| s == key) {
                out.push(format!(
                    "referential integrity: f key {key:?} is not a declared state"
                ));
            }
        }
        for state in states {
            if !self.f.contains_key(state) {
                out.push(format!("query function: state {state:?} has no f entry"));
            }
        }
        if !(self.target_time >= 0.0) || !self.target_time.is_finite() {
            out.push(format!("target time: invalid value {}", self.target_time));
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                out.push(format!("tolerance: must be positive, got {tol}"));
            }
        }
        out
    }

    pub fn to_observations(&self) -> Result<ObservationSequence> {
        let obs = self
            .observations
            .iter()
            .map(|o| Observation::new(o.time, o.payload()?))
            .collect::<Result<Vec<_>>>()?;
        ObservationSequence::new(obs)
    }

    pub fn to_query(&self, states: &StateSpace) -> Result<Query> {
        let values = states
            .labels()
            .iter()
            .map(|s| {
                self.f
                    .get(s)
                    .copied()
                    .ok_or_else(|| Error::InvalidInput(format!("state {s:?} has no f entry")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Query::new(
            self.target_time,
            StateFunction::new(values)?,
            self.tolerance.unwrap_or(DEFAULT_TOLERANCE),
        )
    }
}
