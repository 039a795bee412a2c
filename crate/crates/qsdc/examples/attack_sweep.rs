//! Parameter study over the ancilla attack family. The detection
//! parameter d tunes how much the eavesdropper learns, but any d > 0
//! with measurement costs her the same detection probability of 1/2;
//! skipping the measurement (fully overlapping ancilla states) trades
//! all her information for a detection rate of exactly d.

use qsdc::adversary::{AncillaAttackConfig, Strategy};
use qsdc::analysis::{detection_probability, exact_round_distribution, success_curve};
use qsdc::quantum::BellLabel;

fn eve_accuracy(strategy: &Strategy) -> f64 {
    let mut total = 0.0;
    for prepared in [BellLabel::PsiPlus, BellLabel::PhiPlus] {
        for bit in [0u8, 1u8] {
            total += exact_round_distribution(prepared, bit, strategy)
                .unwrap()
                .eve_match_probability();
        }
    }
    total / 4.0
}

fn main() {
    println!("Measured ancilla attack (orthonormal ancilla states):\n");
    println!("  {:>5}  {:>10}  {:>9}", "d", "detection", "accuracy");
    for step in 0..=5 {
        let d = step as f64 * 0.1;
        let strategy = Strategy::Ancilla(AncillaAttackConfig::orthonormal(d).unwrap());
        println!(
            "  {:>5.2}  {:>10.4}  {:>9.4}",
            d,
            detection_probability(&strategy).unwrap(),
            eve_accuracy(&strategy),
        );
    }
    println!(
        "\nAccuracy climbs from a coin flip at d = 0 to certainty at d = 1/2,\n\
         but detection jumps straight to 1/2 the moment she measures: the\n\
         post-measurement pair is fully mixed no matter how gently she\n\
         entangled on the forward leg.\n"
    );

    println!("Unmeasured variant (identical ancilla states, nothing learned):\n");
    println!("  {:>5}  {:>10}  {:>9}", "d", "detection", "accuracy");
    for step in 0..=5 {
        let d = step as f64 * 0.1;
        let strategy = Strategy::Ancilla(AncillaAttackConfig::with_chi_overlap(d, 1.0).unwrap());
        println!(
            "  {:>5.2}  {:>10.4}  {:>9.4}",
            d,
            detection_probability(&strategy).unwrap(),
            eve_accuracy(&strategy),
        );
    }

    println!("\nSurvival table for the measured attack (CSV, as `qsdc sweep` emits):\n");
    println!("d,n,p_detect,log10_survival");
    let rows = success_curve(&[0.0, 0.1, 0.25, 0.5], &[10, 100, 1000]).unwrap();
    for row in rows {
        println!(
            "{},{},{:.6},{:.6}",
            row.d, row.n, row.p_detect, row.log10_survival
        );
    }
}
