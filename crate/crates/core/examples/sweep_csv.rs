//! Minimal library usage: build a random CQ state, sweep the bound over
//! the default α grid under an affine family, and print the CSV report.
//!
//! The output is byte-identical whether or not the `parallel` feature is
//! enabled, which `diff` can confirm across builds.

use padec_core::hashfam::{CqState, HashFamily};
use padec_core::qops::SeededRng;
use padec_core::verify::{verify_sweep_cq, SweepSettings};

fn main() {
    let seed = 42;
    let mut rng = SeededRng::new(seed);
    let state = CqState::random(8, 2, &mut rng);
    let fam = HashFamily::affine(3, 1).expect("valid family parameters");
    let alphas: Vec<f64> = (1..=10).map(|k| 1.0 + 0.1 * k as f64).collect();
    let settings = SweepSettings::marginal(seed, "cq-random(8,2)");
    let report = verify_sweep_cq(&state, &fam, &alphas, &settings).expect("sweep succeeds");
    print!("{}", report.to_csv());
}
