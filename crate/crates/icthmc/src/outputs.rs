//! Output models and conversion of observations into likelihood vectors.
//!
//! Each observation at a time point turns into a non-negative vector over the
//! state space: the probability (for events) or density value (for points) of
//! the observation under each state's output distribution. Joint likelihoods
//! over several time points exist only as products of these per-time vectors.

use crate::error::{Error, Result};
use crate::ratesets::StateFunction;
use statrs::function::erf::erf;

/// Standard normal CDF via the error function.
fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    pub mean: f64,
    pub std: f64,
}

/// Per-state observation distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum OutputModel {
    /// Finite outcome alphabet with a pmf per state.
    Categorical {
        alphabet: Vec<String>,
        /// Indexed by state, then by alphabet position.
        pmfs: Vec<Vec<f64>>,
    },
    /// Gaussian density per state on the real line.
    Gaussian { params: Vec<GaussianParams> },
    /// Piecewise-constant density per state on a shared grid.
    Tabulated {
        /// Strictly increasing cell boundaries; `grid.len() - 1` cells.
        grid: Vec<f64>,
        /// Indexed by state, then by cell.
        densities: Vec<Vec<f64>>,
    },
}

impl OutputModel {
    pub fn categorical(alphabet: Vec<String>, pmfs: Vec<Vec<f64>>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidModel("empty outcome alphabet".into()));
        }
        for (i, s) in alphabet.iter().enumerate() {
            if alphabet[..i].contains(s) {
                return Err(Error::InvalidModel(format!("duplicate outcome {s:?}")));
            }
        }
        if pmfs.is_empty() {
            return Err(Error::InvalidModel("no per-state output pmfs".into()));
        }
        for (x, pmf) in pmfs.iter().enumerate() {
            if pmf.len() != alphabet.len() {
                return Err(Error::DimensionMismatch {
                    expected: alphabet.len(),
                    got: pmf.len(),
                });
            }
            if pmf.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "state {x}: output pmf has a negative or non-finite mass"
                )));
            }
            let total: f64 = pmf.iter().sum();
            if (total - 1.0).abs() > 1e-12 * alphabet.len() as f64 {
                return Err(Error::InvalidModel(format!(
                    "state {x}: output pmf sums to {total}, not 1"
                )));
            }
        }
        Ok(Self::Categorical { alphabet, pmfs })
    }

    pub fn gaussian(params: Vec<GaussianParams>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidModel("no per-state output densities".into()));
        }
        for (x, p) in params.iter().enumerate() {
            if !p.mean.is_finite() || !p.std.is_finite() || p.std <= 0.0 {
                return Err(Error::InvalidModel(format!(
                    "state {x}: invalid Gaussian parameters (mean {}, std {})",
                    p.mean, p.std
                )));
            }
        }
        Ok(Self::Gaussian { params })
    }

    pub fn tabulated(grid: Vec<f64>, densities: Vec<Vec<f64>>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidModel(
                "tabulated grid needs at least one cell".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidModel(
                "tabulated grid must be strictly increasing".into(),
            ));
        }
        if densities.is_empty() {
            return Err(Error::InvalidModel("no per-state output densities".into()));
        }
        let cells = grid.len() - 1;
        for (x, d) in densities.iter().enumerate() {
            if d.len() != cells {
                return Err(Error::DimensionMismatch {
                    expected: cells,
                    got: d.len(),
                });
            }
            if d.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return Err(Error::InvalidModel(format!(
                    "state {x}: tabulated density has a negative or non-finite value"
                )));
            }
            let integral: f64 = d
                .iter()
                .enumerate()
                .map(|(c, &v)| v * (grid[c + 1] - grid[c]))
                .sum();
            if (integral - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel(format!(
                    "state {x}: tabulated density integrates to {integral}, not 1"
                )));
            }
        }
        Ok(Self::Tabulated { grid, densities })
    }

    /// Number of states the model is defined for.
    pub fn dim(&self) -> usize {
        match self {
            Self::Categorical { pmfs, .. } => pmfs.len(),
            Self::Gaussian { params } => params.len(),
            Self::Tabulated { densities, .. } => densities.len(),
        }
    }

    pub fn is_density(&self) -> bool {
        !matches!(self, Self::Categorical { .. })
    }
}

/// What was observed at one time point.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservationPayload {
    /// Subset of the categorical alphabet.
    EventSymbols(Vec<String>),
    /// Closed interval of the real outcome line.
    EventInterval { a: f64, b: f64 },
    /// Single categorical symbol, treated as the singleton event.
    PointSymbol(String),
    /// Point observation on the real line.
    PointValue(f64),
}

impl ObservationPayload {
    pub fn kind(&self) -> ObservationKind {
        match self {
            Self::EventSymbols(_) | Self::EventInterval { .. } => ObservationKind::Event,
            Self::PointSymbol(_) | Self::PointValue(_) => ObservationKind::Point,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationKind {
    Event,
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub time: f64,
    pub payload: ObservationPayload,
}

impl Observation {
    pub fn new(time: f64, payload: ObservationPayload) -> Result<Self> {
        if !time.is_finite() || time < 0.0 {
            return Err(Error::InvalidInput(format!(
                "invalid observation time {time}"
            )));
        }
        match &payload {
            ObservationPayload::EventSymbols(symbols) if symbols.is_empty() => {
                return Err(Error::InvalidInput("empty event subset".into()));
            }
            ObservationPayload::EventInterval { a, b } if !(a <= b) => {
                return Err(Error::InvalidInput(format!(
                    "invalid event interval [{a},{b}]"
                )));
            }
            ObservationPayload::PointValue(y) if !y.is_finite() => {
                return Err(Error::InvalidInput(format!(
                    "non-finite point observation {y}"
                )));
            }
            _ => {}
        }
        Ok(Self { time, payload })
    }
}

/// Ordered observations with strictly increasing times and a homogeneous kind
/// (all events or all points).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence {
    observations: Vec<Observation>,
    kind: ObservationKind,
}

impl ObservationSequence {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let first = observations
            .first()
            .ok_or_else(|| Error::InvalidInput("empty observation sequence".into()))?;
        let kind = first.payload.kind();
        for pair in observations.windows(2) {
            if !(pair[0].time < pair[1].time) {
                return Err(Error::InvalidInput(format!(
                    "observation times must be strictly increasing ({} then {})",
                    pair[0].time, pair[1].time
                )));
            }
        }
        if observations.iter().any(|o| o.payload.kind() != kind) {
            return Err(Error::InvalidInput(
                "mixed event and point observations are not supported".into(),
            ));
        }
        Ok(Self { observations, kind })
    }

    pub fn kind(&self) -> ObservationKind {
        self.kind
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn times(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.time).collect()
    }
}

/// Index of the cell containing `y`: left-closed cells, boundaries resolve to
/// the right cell, so the final boundary falls outside the support.
fn tabulated_cell(grid: &[f64], y: f64) -> Option<usize> {
    if y < grid[0] || y >= grid[grid.len() - 1] {
        return None;
    }
    // partition_point gives the first boundary strictly greater than y.
    Some(grid.partition_point(|&b| b <= y) - 1)
}

/// Integral of the step density over `[a, b]`, clipped to the support.
fn tabulated_integral(grid: &[f64], density: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for (c, &v) in density.iter().enumerate() {
        let lo = grid[c].max(a);
        let hi = grid[c + 1].min(b);
        if hi > lo {
            total += v * (hi - lo);
        }
    }
    total
}

/// The likelihood vector of one observation: per state, the probability of
/// the event or the density value at the point.
pub fn likelihood_vector(model: &OutputModel, obs: &Observation) -> Result<StateFunction> {
    let values: Vec<f64> = match (model, &obs.payload) {
        (OutputModel::Categorical { alphabet, pmfs }, ObservationPayload::EventSymbols(set)) => {
            let indices = set
                .iter()
                .map(|s| {
                    alphabet
                        .iter()
                        .position(|a| a == s)
                        .ok_or_else(|| Error::InvalidInput(format!("unknown outcome {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut unique = indices.clone();
            unique.sort_unstable();
            unique.dedup();
            pmfs.iter()
                .map(|pmf| unique.iter().map(|&i| pmf[i]).sum())
                .collect()
        }
        (OutputModel::Categorical { alphabet, pmfs }, ObservationPayload::PointSymbol(s)) => {
            let i = alphabet
                .iter()
                .position(|a| a == s)
                .ok_or_else(|| Error::InvalidInput(format!("unknown outcome {s:?}")))?;
            pmfs.iter().map(|pmf| pmf[i]).collect()
        }
        (OutputModel::Gaussian { params }, ObservationPayload::EventInterval { a, b }) => params
            .iter()
            .map(|p| normal_cdf((b - p.mean) / p.std) - normal_cdf((a - p.mean) / p.std))
            .collect(),
        (OutputModel::Gaussian { params }, ObservationPayload::PointValue(y)) => params
            .iter()
            .map(|p| {
                let z = (y - p.mean) / p.std;
                (-0.5 * z * z).exp() / (p.std * (2.0 * std::f64::consts::PI).sqrt())
            })
            .collect(),
        (
            OutputModel::Tabulated { grid, densities },
            ObservationPayload::EventInterval { a, b },
        ) => densities
            .iter()
            .map(|d| tabulated_integral(grid, d, *a, *b))
            .collect(),
        (OutputModel::Tabulated { grid, densities }, ObservationPayload::PointValue(y)) => {
            match tabulated_cell(grid, *y) {
                Some(c) => densities.iter().map(|d| d[c]).collect(),
                None => vec![0.0; densities.len()],
            }
        }
        (model, payload) => {
            return Err(Error::PayloadMismatch(format!(
                "{payload:?} against {} output model",
                match model {
                    OutputModel::Categorical { .. } => "categorical",
                    OutputModel::Gaussian { .. } => "gaussian",
                    OutputModel::Tabulated { .. } => "tabulated",
                }
            )));
        }
    };
    StateFunction::new(values)
}

/// The `i`-th member of the shrinking event sequence around a point
/// observation: the interval of half-width `2^-i` centred on it.
pub fn event_shrink_sequence(
    model: &OutputModel,
    point_obs: &Observation,
    i: u32,
) -> Result<Observation> {
    if !model.is_density() {
        return Err(Error::PayloadMismatch(
            "shrinking event sequences require a density output model".into(),
        ));
    }
    let y = match &point_obs.payload {
        ObservationPayload::PointValue(y) => *y,
        other => {
            return Err(Error::PayloadMismatch(format!(
                "shrinking event sequences require a point observation, got {other:?}"
            )));
        }
    };
    let half_width = 2.0f64.powi(-(i as i32));
    Observation::new(
        point_obs.time,
        ObservationPayload::EventInterval {
            a: y - half_width,
            b: y + half_width,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gaussian_unit() -> OutputModel {
        OutputModel::gaussian(vec![GaussianParams {
            mean: 0.0,
            std: 1.0,
        }])
        .unwrap()
    }

    #[test]
    fn categorical_full_alphabet_is_one() {
        let model = OutputModel::categorical(
            vec!["a".into(), "b".into()],
            vec![vec![0.7, 0.3], vec![0.1, 0.9]],
        )
        .unwrap();
        let obs = Observation::new(
            0.0,
            ObservationPayload::EventSymbols(vec!["a".into(), "b".into()]),
        )
        .unwrap();
        let g = likelihood_vector(&model, &obs).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[1] - 1.0).abs() < 1e-15);

        let point = Observation::new(0.0, ObservationPayload::PointSymbol("a".into())).unwrap();
        let g = likelihood_vector(&model, &point).unwrap();
        assert_eq!(g.values(), &[0.7, 0.1]);
    }

    #[test]
    fn gaussian_point_and_event() {
        let model = gaussian_unit();
        let point = Observation::new(0.0, ObservationPayload::PointValue(0.0)).unwrap();
        let g = likelihood_vector(&model, &point).unwrap();
        assert!((g[0] - 0.3989422804014327).abs() < 1e-12);

        let event =
            Observation::new(0.0, ObservationPayload::EventInterval { a: -1.0, b: 1.0 }).unwrap();
        let g = likelihood_vector(&model, &event).unwrap();
        // Numerical quadrature oracle for the standard normal over [-1, 1]:
        // Simpson's rule on a fine grid.
        let m = 4000usize;
        let h = 2.0 / m as f64;
        let density = |y: f64| (-0.5 * y * y).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut integral = density(-1.0) + density(1.0);
        for k in 1..m {
            let y = -1.0 + k as f64 * h;
            integral += density(y) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        integral *= h / 3.0;
        assert!((g[0] - integral).abs() < 1e-10);
        assert!((g[0] - 0.68269).abs() < 1e-5);
    }

    #[test]
    fn tabulated_lookup_and_integral() {
        let model =
            OutputModel::tabulated(vec![-1.0, 0.0, 1.0], vec![vec![0.25, 0.75], vec![1.0, 0.0]])
                .unwrap();
        // Boundary resolves to the right cell.
        let p0 = Observation::new(0.0, ObservationPayload::PointValue(0.0)).unwrap();
        assert_eq!(
            likelihood_vector(&model, &p0).unwrap().values(),
            &[0.75, 0.0]
        );
        // Outside the support.
        let p1 = Observation::new(0.0, ObservationPayload::PointValue(1.5)).unwrap();
        assert_eq!(
            likelihood_vector(&model, &p1).unwrap().values(),
            &[0.0, 0.0]
        );
        // Rightmost boundary is outside.
        let p2 = Observation::new(0.0, ObservationPayload::PointValue(1.0)).unwrap();
        assert_eq!(
            likelihood_vector(&model, &p2).unwrap().values(),
            &[0.0, 0.0]
        );
        let ev =
            Observation::new(0.0, ObservationPayload::EventInterval { a: -0.5, b: 0.5 }).unwrap();
        let g = likelihood_vector(&model, &ev).unwrap();
        assert!((g[0] - (0.25 * 0.5 + 0.75 * 0.5)).abs() < 1e-15);
        assert!((g[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn payload_mismatch_rejected() {
        let model = gaussian_unit();
        let obs =
            Observation::new(0.0, ObservationPayload::EventSymbols(vec!["a".into()])).unwrap();
        assert!(matches!(
            likelihood_vector(&model, &obs),
            Err(Error::PayloadMismatch(_))
        ));
    }

    #[test]
    fn sequence_invariants() {
        let e = |t: f64| {
            Observation::new(t, ObservationPayload::EventInterval { a: 0.0, b: 1.0 }).unwrap()
        };
        assert!(ObservationSequence::new(vec![e(0.0), e(1.0)]).is_ok());
        assert!(ObservationSequence::new(vec![e(1.0), e(1.0)]).is_err());
        assert!(ObservationSequence::new(vec![]).is_err());
        let p = Observation::new(2.0, ObservationPayload::PointValue(0.5)).unwrap();
        assert!(ObservationSequence::new(vec![e(0.0), p]).is_err());
    }

    #[test]
    fn shrink_sequence_ratio_approaches_density() {
        let model = gaussian_unit();
        let point = Observation::new(0.0, ObservationPayload::PointValue(0.0)).unwrap();
        let ev = event_shrink_sequence(&model, &point, 1).unwrap();
        assert_eq!(
            ev.payload,
            ObservationPayload::EventInterval { a: -0.5, b: 0.5 }
        );

        let i = 20;
        let ev = event_shrink_sequence(&model, &point, i).unwrap();
        let width = 2.0f64.powi(1 - i as i32);
        let ratio = likelihood_vector(&model, &ev).unwrap()[0] / width;
        let density = likelihood_vector(&model, &point).unwrap()[0];
        assert!((ratio - density).abs() < 1e-4);
        assert!((ratio - 0.39894).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn event_monotonicity(mu in -1.0..1.0f64, sigma in 0.2..2.0f64,
                              a in -2.0..0.0f64, w1 in 0.0..1.0f64, w2 in 0.0..1.0f64) {
            let model = OutputModel::gaussian(vec![GaussianParams { mean: mu, std: sigma }]).unwrap();
            let small = Observation::new(0.0, ObservationPayload::EventInterval { a, b: a + w1 }).unwrap();
            let large = Observation::new(0.0, ObservationPayload::EventInterval { a, b: a + w1 + w2 }).unwrap();
            let gs = likelihood_vector(&model, &small).unwrap();
            let gl = likelihood_vector(&model, &large).unwrap();
            prop_assert!(gs[0] >= 0.0);
            prop_assert!(gl[0] >= gs[0] - 1e-15);
        }
    }
}
