//! Updating a two-state health model on a stream of categorical symptoms.

use icthmc::{
    updated_lower_expectation, CredalSet, Icthmc, Observation, ObservationPayload,
    ObservationSequence, OutputModel, PropagationConfig, Query, RateMatrixSet, StateFunction,
    StateSpace,
};

fn main() {
    let model = Icthmc::new(
        StateSpace::new(vec!["healthy".into(), "sick".into()]).unwrap(),
        RateMatrixSet::interval_rows(
            vec![vec![0.0, 0.1], vec![0.4, 0.0]],
            vec![vec![0.0, 0.3], vec![0.8, 0.0]],
        )
        .unwrap(),
        CredalSet::new(vec![vec![0.95, 0.05], vec![0.8, 0.2]]).unwrap(),
        OutputModel::categorical(
            vec!["ok".into(), "fever".into()],
            vec![vec![0.9, 0.1], vec![0.3, 0.7]],
        )
        .unwrap(),
    )
    .unwrap();

    // Probability of being sick at t = 1.5 after two fever readings.
    let f = StateFunction::new(vec![0.0, 1.0]).unwrap();
    let cfg = PropagationConfig::default();
    for symptoms in [["ok", "ok"], ["ok", "fever"], ["fever", "fever"]] {
        let obs = ObservationSequence::new(vec![
            Observation::new(0.5, ObservationPayload::PointSymbol(symptoms[0].into())).unwrap(),
            Observation::new(1.0, ObservationPayload::PointSymbol(symptoms[1].into())).unwrap(),
        ])
        .unwrap();
        let query = Query::new(1.5, f.clone(), 1e-6).unwrap();
        let out = updated_lower_expectation(&model, &obs, &query, &cfg).unwrap();
        println!(
            "{symptoms:?}: P(sick at 1.5) in [{:.4}, {:.4}]  ({})",
            out.lower, out.upper, out.regime
        );
    }
}
