//! The Monte Carlo engine converging on the closed-form oracle. For each
//! strategy, the exact per-cell probabilities (averaged over preparations
//! and bits) are compared against a 100000-round sample, with the gap in
//! standard errors.

use qsdc::adversary::{AncillaAttackConfig, MeasurementBasis, Strategy};
use qsdc::analysis::{
    exact_round_distribution, run_experiment, BitSource, ExperimentConfig,
};
use qsdc::quantum::BellLabel;

const ROUNDS: u64 = 100_000;

/// Cell probabilities averaged over the four (preparation, bit) cases,
/// which is what an experiment with random preparations and bits samples.
fn exact_cells(strategy: &Strategy) -> [f64; 4] {
    let mut cells = [0.0; 4];
    for prepared in [BellLabel::PsiPlus, BellLabel::PhiPlus] {
        for bit in [0u8, 1u8] {
            let dist = exact_round_distribution(prepared, bit, strategy).unwrap();
            for (acc, p) in cells.iter_mut().zip(dist.bell_marginal()) {
                *acc += p / 4.0;
            }
        }
    }
    cells
}

fn main() {
    let strategies = [
        ("none".to_owned(), Strategy::None),
        (
            "ancilla d=0.25".to_owned(),
            Strategy::Ancilla(AncillaAttackConfig::orthonormal(0.25).unwrap()),
        ),
        (
            "ancilla d=0.5".to_owned(),
            Strategy::Ancilla(AncillaAttackConfig::orthonormal(0.5).unwrap()),
        ),
        (
            "intercept computational".to_owned(),
            Strategy::InterceptResend(MeasurementBasis::Computational),
        ),
        (
            "intercept diagonal".to_owned(),
            Strategy::InterceptResend(MeasurementBasis::Diagonal),
        ),
    ];

    println!(
        "{} rounds per strategy; \"z\" is (sampled - exact) / std err.\n",
        ROUNDS
    );
    for (index, (name, strategy)) in strategies.into_iter().enumerate() {
        let cells = exact_cells(&strategy);
        let stats = run_experiment(&ExperimentConfig {
            n_rounds: ROUNDS,
            strategy: strategy.clone(),
            bit_source: BitSource::Random,
            stop_on_intrusion: false,
            master_seed: 23 + index as u64,
            trials: 1,
        })
        .unwrap();
        println!("{name}:");
        println!(
            "  {:<8}  {:>8}  {:>8}  {:>6}",
            "cell", "exact", "sampled", "z"
        );
        for label in BellLabel::all() {
            let exact = cells[label.index()];
            let sampled = stats.bell_histogram.count(label) as f64 / ROUNDS as f64;
            let z = if exact == 0.0 || exact == 1.0 {
                // Degenerate cells admit no fluctuation at all.
                assert_eq!(sampled, exact, "impossible cell was sampled");
                0.0
            } else {
                (sampled - exact) / (exact * (1.0 - exact) / ROUNDS as f64).sqrt()
            };
            println!(
                "  {:<8}  {:>8.5}  {:>8.5}  {:>+6.2}",
                label.as_str(),
                exact,
                sampled,
                z
            );
        }
        println!(
            "  eavesdropper accuracy: sampled {:.5}\n",
            stats.eve_accuracy
        );
    }
    println!(
        "Every gap sits within a few standard errors of zero, and cells the\n\
         oracle calls impossible never fire at all."
    );
}
