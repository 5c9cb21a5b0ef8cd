//! Point and interval observations through a Gaussian output model.

use icthmc::outputs::GaussianParams;
use icthmc::{
    likelihood_vector, updated_lower_expectation, CredalSet, Icthmc, Observation,
    ObservationPayload, ObservationSequence, OutputModel, PropagationConfig, Query, RateMatrixSet,
    StateFunction, StateSpace,
};

fn main() {
    let model = Icthmc::new(
        StateSpace::new(vec!["low".into(), "high".into()]).unwrap(),
        RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.2], vec![0.2, 0.0]],
            vec![vec![0.0, 0.6], vec![0.6, 0.0]],
        )
        .unwrap(),
        CredalSet::vacuous(2),
        OutputModel::gaussian(vec![
            GaussianParams {
                mean: 0.0,
                std: 1.0,
            },
            GaussianParams {
                mean: 2.0,
                std: 1.0,
            },
        ])
        .unwrap(),
    )
    .unwrap();

    // A sensor reading of 1.4 at t = 0.5: the likelihood vector holds the
    // density of the reading in each state.
    let point = Observation::new(0.5, ObservationPayload::PointValue(1.4)).unwrap();
    println!(
        "densities at y=1.4: {:?}",
        likelihood_vector(&model.output, &point).unwrap().values()
    );

    let f = StateFunction::new(vec![0.0, 1.0]).unwrap();
    let cfg = PropagationConfig::default();
    let query = Query::new(0.5, f.clone(), 1e-6).unwrap();

    let obs = ObservationSequence::new(vec![point]).unwrap();
    let out = updated_lower_expectation(&model, &obs, &query, &cfg).unwrap();
    println!(
        "point reading : P(high) in [{:.4}, {:.4}]",
        out.lower, out.upper
    );

    // The same reading as a coarse interval event.
    let event =
        Observation::new(0.5, ObservationPayload::EventInterval { a: 0.9, b: 1.9 }).unwrap();
    let obs = ObservationSequence::new(vec![event]).unwrap();
    let out = updated_lower_expectation(&model, &obs, &query, &cfg).unwrap();
    println!(
        "interval event: P(high) in [{:.4}, {:.4}]",
        out.lower, out.upper
    );
}
