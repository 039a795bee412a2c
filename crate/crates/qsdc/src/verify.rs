//! Embedded self-checks: the simulator's headline physical claims, each
//! recomputed exactly and reported as a pass/fail row. Everything here is
//! deterministic; the sampling cross-checks live in the test suite.

use num_complex::Complex64;

use crate::adversary::{AncillaAttackConfig, MeasurementBasis, Strategy};
use crate::analysis::{
    detection_probability, exact_round_distribution, render_survival, survival_probability,
    SurvivalQuery,
};
use crate::protocol::{alice_encode, bob_decode, home_id, travel_id, DecodeOutcome, HOME, TRAVEL};
use crate::quantum::{
    apply_unitary, bell_basis_on, density_of, global_phase_equiv, make_bell_on, partial_trace,
    tensor, BellLabel,
};

/// Outcome of one check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// What was established, or how the check failed.
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

/// Runs every check. Never panics; a failing claim comes back as a row
/// with `passed` false.
pub fn run_all() -> Vec<CheckResult> {
    let checks: [(&'static str, Check); 12] = [
        ("bell orthonormality", bell_orthonormality),
        ("bell partial traces", bell_partial_traces),
        ("phase flip mapping", phase_flip_mapping),
        ("no-eve unit cells", no_eve_unit_cells),
        ("dilation conditional state", dilation_conditional_state),
        ("full information uniformity", full_information_uniformity),
        ("zero detection degeneration", zero_detection_degeneration),
        ("computational intercept confinement", computational_intercept_confinement),
        ("diagonal intercept detection", diagonal_intercept_detection),
        ("detection endpoints", detection_endpoints),
        ("survival reference number", survival_reference_number),
        ("overlapping ancilla flip rate", overlapping_ancilla_flip_rate),
    ];
    checks
        .into_iter()
        .map(|(name, body)| match body() {
            Ok(detail) => CheckResult {
                name,
                passed: true,
                detail,
            },
            Err(detail) => CheckResult {
                name,
                passed: false,
                detail,
            },
        })
        .collect()
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

const CELLS: [(BellLabel, u8); 4] = [
    (BellLabel::PsiPlus, 0),
    (BellLabel::PsiPlus, 1),
    (BellLabel::PhiPlus, 0),
    (BellLabel::PhiPlus, 1),
];

fn lose<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn near(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want} within {tol}"))
    }
}

fn bell_orthonormality() -> Result<String, String> {
    let states = bell_basis_on(TRAVEL, HOME).map_err(lose)?;
    for (i, a) in states.iter().enumerate() {
        near(&format!("norm of {}", BellLabel::all()[i]), a.norm_sq(), 1.0, 1e-12)?;
        for (j, b) in states.iter().enumerate().skip(i + 1) {
            let overlap = a.inner(b).map_err(lose)?.norm();
            near(
                &format!("overlap of {} with {}", BellLabel::all()[i], BellLabel::all()[j]),
                overlap,
                0.0,
                1e-12,
            )?;
        }
    }
    Ok("4 unit norms, 6 vanishing overlaps".to_owned())
}

fn bell_partial_traces() -> Result<String, String> {
    for label in BellLabel::all() {
        let state = make_bell_on(label, TRAVEL, HOME).map_err(lose)?;
        let rho = density_of(&state).map_err(lose)?;
        for kept in [travel_id(), home_id()] {
            let reduced = partial_trace(&rho, std::slice::from_ref(&kept)).map_err(lose)?;
            for row in 0..2 {
                for col in 0..2 {
                    let want = if row == col { 0.5 } else { 0.0 };
                    let deviation = (reduced.entry(row, col) - Complex64::new(want, 0.0)).norm();
                    near(
                        &format!("{label} reduced to {kept}, entry ({row}, {col})"),
                        deviation,
                        0.0,
                        1e-12,
                    )?;
                }
            }
        }
    }
    Ok("8 reduced matrices equal to I/2".to_owned())
}

fn phase_flip_mapping() -> Result<String, String> {
    let pairs = [
        (BellLabel::PsiPlus, BellLabel::PsiMinus),
        (BellLabel::PsiMinus, BellLabel::PsiPlus),
        (BellLabel::PhiPlus, BellLabel::PhiMinus),
        (BellLabel::PhiMinus, BellLabel::PhiPlus),
    ];
    for (from, to) in pairs {
        let state = make_bell_on(from, TRAVEL, HOME).map_err(lose)?;
        let flipped = alice_encode(1, &state).map_err(lose)?;
        let expected = make_bell_on(to, TRAVEL, HOME).map_err(lose)?;
        if !global_phase_equiv(&flipped, &expected).map_err(lose)? {
            return Err(format!("{from} does not flip to {to}"));
        }
        let twice = alice_encode(1, &flipped).map_err(lose)?;
        if !global_phase_equiv(&twice, &state).map_err(lose)? {
            return Err(format!("{from} is not restored by a second flip"));
        }
    }
    Ok("sign swaps within each family, involution holds".to_owned())
}

fn no_eve_unit_cells() -> Result<String, String> {
    for (prepared, bit) in CELLS {
        let dist = exact_round_distribution(prepared, bit, &Strategy::None).map_err(lose)?;
        let marginal = dist.bell_marginal();
        for label in BellLabel::all() {
            let want = match bob_decode(prepared, label).map_err(lose)? {
                DecodeOutcome::Bit(b) if b == bit => 1.0,
                _ => 0.0,
            };
            near(
                &format!("{prepared}, bit {bit}, cell {label}"),
                marginal[label.index()],
                want,
                1e-12,
            )?;
        }
    }
    Ok("every untapped round decodes its bit with probability 1".to_owned())
}

fn dilation_conditional_state() -> Result<String, String> {
    let cfg = AncillaAttackConfig::orthonormal(0.5).map_err(lose)?;
    let pair = make_bell_on(BellLabel::PsiPlus, TRAVEL, HOME).map_err(lose)?;
    let state = tensor(&pair, &cfg.initial_ancilla_state()).map_err(lose)?;
    let state = apply_unitary(&state, cfg.attack_unitary(), &cfg.attack_targets()).map_err(lose)?;
    // (travel, home, ancilla) indices of the four surviving branches,
    // each of amplitude 1/2 at d = 1/2
    let expected = [(2usize, 0.5), (4, 0.5), (11, 0.5), (13, 0.5)];
    for (index, amp) in state.amplitudes().iter().enumerate() {
        let want = expected
            .iter()
            .find(|(i, _)| *i == index)
            .map_or(0.0, |&(_, a)| a);
        near(
            &format!("amplitude {index}"),
            (amp - Complex64::new(want, 0.0)).norm(),
            0.0,
            1e-12,
        )?;
    }
    Ok("four equal real branches of weight 1/4".to_owned())
}

fn full_information_uniformity() -> Result<String, String> {
    let strategy = Strategy::Ancilla(AncillaAttackConfig::orthonormal(0.5).map_err(lose)?);
    for (prepared, bit) in CELLS {
        let dist = exact_round_distribution(prepared, bit, &strategy).map_err(lose)?;
        for branch in dist.branches() {
            for (cell, p) in branch.bell.iter().enumerate() {
                near(
                    &format!("{prepared}, bit {bit}, branch cell {cell}"),
                    *p,
                    0.25,
                    1e-12,
                )?;
            }
        }
        near(
            &format!("{prepared}, bit {bit}, inference"),
            dist.eve_match_probability(),
            1.0,
            1e-12,
        )?;
    }
    near(
        "detection probability",
        detection_probability(&strategy).map_err(lose)?,
        0.5,
        1e-12,
    )?;
    Ok("all cells 1/4, inference certain, detection 1/2".to_owned())
}

fn zero_detection_degeneration() -> Result<String, String> {
    let passive = Strategy::Ancilla(AncillaAttackConfig::orthonormal(0.0).map_err(lose)?);
    for (prepared, bit) in CELLS {
        let quiet = exact_round_distribution(prepared, bit, &Strategy::None).map_err(lose)?;
        let attacked = exact_round_distribution(prepared, bit, &passive).map_err(lose)?;
        let reference = quiet.bell_marginal();
        let candidate = attacked.bell_marginal();
        for label in BellLabel::all() {
            near(
                &format!("{prepared}, bit {bit}, cell {label}"),
                candidate[label.index()],
                reference[label.index()],
                1e-12,
            )?;
        }
    }
    Ok("every cell coincides with the untapped channel".to_owned())
}

fn computational_intercept_confinement() -> Result<String, String> {
    let strategy = Strategy::InterceptResend(MeasurementBasis::Computational);
    for (prepared, bit) in CELLS {
        let dist = exact_round_distribution(prepared, bit, &strategy).map_err(lose)?;
        near(
            &format!("{prepared}, bit {bit}, intrusion"),
            dist.intrusion_probability(),
            0.0,
            1e-12,
        )?;
        near(
            &format!("{prepared}, bit {bit}, bit error"),
            dist.bit_error_probability(),
            0.5,
            1e-12,
        )?;
        near(
            &format!("{prepared}, bit {bit}, inference"),
            dist.eve_match_probability(),
            0.0,
            1e-12,
        )?;
    }
    Ok("never the wrong family, never an inference, bits turn into coins".to_owned())
}

fn diagonal_intercept_detection() -> Result<String, String> {
    let strategy = Strategy::InterceptResend(MeasurementBasis::Diagonal);
    for (prepared, bit) in CELLS {
        let dist = exact_round_distribution(prepared, bit, &strategy).map_err(lose)?;
        near(
            &format!("{prepared}, bit {bit}, intrusion"),
            dist.intrusion_probability(),
            0.5,
            1e-12,
        )?;
        near(
            &format!("{prepared}, bit {bit}, inference"),
            dist.eve_match_probability(),
            1.0,
            1e-12,
        )?;
        near(
            &format!("{prepared}, bit {bit}, bit error"),
            dist.bit_error_probability(),
            0.0,
            1e-12,
        )?;
    }
    Ok("detection 1/2 with perfect inference".to_owned())
}

fn detection_endpoints() -> Result<String, String> {
    near(
        "no attack",
        detection_probability(&Strategy::None).map_err(lose)?,
        0.0,
        1e-12,
    )?;
    let passive = Strategy::Ancilla(AncillaAttackConfig::orthonormal(0.0).map_err(lose)?);
    near("d = 0", detection_probability(&passive).map_err(lose)?, 0.0, 1e-12)?;
    let full = Strategy::Ancilla(AncillaAttackConfig::orthonormal(0.5).map_err(lose)?);
    near("d = 1/2", detection_probability(&full).map_err(lose)?, 0.5, 1e-12)?;
    Ok("p(0) = 0 and p(1/2) = 1/2".to_owned())
}

fn survival_reference_number() -> Result<String, String> {
    let log10 = survival_probability(SurvivalQuery { n: 1000, p: 0.5 }).map_err(lose)?;
    near("log10 over 1000 rounds", log10, -301.0300, 1e-4)?;
    let rendered = render_survival(log10);
    if rendered != "9.33e-302" {
        return Err(format!("1000-round survival renders as {rendered}"));
    }
    let zero_rounds = survival_probability(SurvivalQuery { n: 0, p: 0.5 }).map_err(lose)?;
    if render_survival(zero_rounds) != "1" {
        return Err("0-round survival does not render as 1".to_owned());
    }
    let ten_rounds = survival_probability(SurvivalQuery { n: 10, p: 0.5 }).map_err(lose)?;
    if render_survival(ten_rounds) != "9.77e-4" {
        return Err(format!(
            "10-round survival renders as {}",
            render_survival(ten_rounds)
        ));
    }
    Ok(format!("1000 rounds at p = 1/2 survive with {rendered}"))
}

fn overlapping_ancilla_flip_rate() -> Result<String, String> {
    // chi = overlap:1 makes Eve's records pairwise identical: no
    // measurement, no information, and the wrong-family mass is exactly
    // the flip weight d.
    let d = 0.3;
    let strategy =
        Strategy::Ancilla(AncillaAttackConfig::with_chi_overlap(d, 1.0).map_err(lose)?);
    for bit in [0u8, 1] {
        let dist = exact_round_distribution(BellLabel::PsiPlus, bit, &strategy).map_err(lose)?;
        near(&format!("bit {bit} intrusion"), dist.intrusion_probability(), d, 1e-12)?;
        let expected = [0.35, 0.35, 0.15, 0.15];
        let marginal = dist.bell_marginal();
        for label in BellLabel::all() {
            near(
                &format!("bit {bit} cell {label}"),
                marginal[label.index()],
                expected[label.index()],
                1e-12,
            )?;
        }
    }
    Ok("uninformative attack is detected at exactly its flip weight".to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_check_passes() {
        let results = run_all();
        assert_eq!(results.len(), 12);
        for result in &results {
            assert!(result.passed, "{}: {}", result.name, result.detail);
            assert!(!result.detail.is_empty());
        }
        assert!(all_passed(&results));
    }

    #[test]
    fn check_names_are_unique() {
        let results = run_all();
        let mut names: Vec<_> = results.iter().map(|r| r.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), results.len());
    }
}
