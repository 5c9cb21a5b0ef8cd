//! Why point observations are not the limit of shrinking events.
//!
//! The shipped `data/zero_density_*.json` files describe a two-state model
//! whose output density is zero at the origin in one state. Conditioning
//! directly on the point observation y = 0 discards that state entirely and
//! yields expectation 1; conditioning on small intervals around 0 keeps it
//! and drives the lower expectation to -1. Both answers are coherent — they
//! condition on different information.

use std::path::Path;

use icthmc::model::{ModelFile, QueryFile};
use icthmc::outputs::event_shrink_sequence;
use icthmc::propagation::PropagationConfig;
use icthmc::{updated_lower_expectation, ObservationSequence};

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let mf = ModelFile::from_json(
        &std::fs::read_to_string(dir.join("zero_density_model.json")).unwrap(),
    )
    .unwrap();
    let qf = QueryFile::from_json(
        &std::fs::read_to_string(dir.join("zero_density_query.json")).unwrap(),
    )
    .unwrap();
    let model = mf.to_model().unwrap();
    let obs = qf.to_observations().unwrap();
    let query = qf.to_query(&model.states).unwrap();
    let cfg = PropagationConfig::default();

    let direct = updated_lower_expectation(&model, &obs, &query, &cfg).unwrap();
    println!(
        "point observation y=0: [{:.6}, {:.6}] ({})",
        direct.lower, direct.upper, direct.regime
    );

    let point = &obs.observations()[0];
    println!("\nshrinking intervals around 0:");
    for i in [2, 4, 8, 14] {
        let event = event_shrink_sequence(&model.output, point, i).unwrap();
        let seq = ObservationSequence::new(vec![event]).unwrap();
        let out = updated_lower_expectation(&model, &seq, &query, &cfg).unwrap();
        println!(
            "  half-width 2^-{i:<2}: [{:+.6}, {:+.6}] ({})",
            out.lower, out.upper, out.regime
        );
    }
}
