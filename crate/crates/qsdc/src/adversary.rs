//! Eavesdropping strategies, each plugged into the channel as a
//! [`ChannelTap`].
//!
//! The central one is the ancilla attack: on the forward leg Eve entangles
//! an ancilla with the travel qubit through a unitary dilation parameterized
//! by the detection parameter `d`, and on the return leg she measures the
//! (travel, ancilla) pair in a four-element basis built to discriminate the
//! two encodings. With the default orthonormal ancilla states and d = 1/2
//! she reads Alice's bit with certainty; the price is that her measurement
//! collapses the pair so completely that Bob's Bell outcome turns uniform,
//! so every measuring variant of the attack is detected with probability
//! 1/2 per control round.
//!
//! Also provided: classical intercept-resend in the computational or
//! diagonal basis, and the trivial non-attack.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::RngCore;
use thiserror::Error;

use crate::protocol::{
    ancilla_id, travel_id, ChannelTap, ChannelView, EncodingOp, EveRecord, ProtocolError, ANCILLA,
    TRAVEL,
};
use crate::quantum::{
    orthonormal_completion, QuantumError, StateVector, SubsystemId, SubsystemLayout, UnitaryOp,
    ALGEBRAIC_TOL,
};

/// `pre_encoding_action` tag of the ancilla attack.
pub const TAG_ANCILLA: &str = "ancilla_dilation";
/// `pre_encoding_action` tags of intercept-resend.
pub const TAG_MEASURE_COMPUTATIONAL: &str = "measure_computational";
pub const TAG_MEASURE_DIAGONAL: &str = "measure_diagonal";

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("detection parameter d must lie in [0, 1], got {0}")]
    DetectionOutOfRange(f64),
    #[error("ancilla state overlap must lie in [0, 1], got {0}")]
    OverlapOutOfRange(f64),
    #[error("ancilla dimension must lie in 1..=4, got {0}")]
    AncillaDimOutOfRange(usize),
    #[error("ancilla state {index} is not normalized (norm^2 = {norm_sq})")]
    ChiNotNormalized { index: usize, norm_sq: f64 },
    #[error("cannot parse strategy \"{spec}\": {reason}")]
    InvalidStrategy { spec: String, reason: String },
}

/// How the four ancilla states were chosen; remembered for display.
#[derive(Clone, Copy, Debug, PartialEq)]
enum ChiChoice {
    Orthonormal,
    Overlap(f64),
    Custom,
}

/// Configuration of the ancilla attack.
///
/// The attack unitary maps `|0, e0> -> alpha |0, chi00> + beta |1, chi01>`
/// and `|1, e0> -> alpha |1, chi11> + beta |0, chi10>` with
/// `alpha = sqrt(1 - d)`, `beta = sqrt(d)`; the remaining columns are a
/// deterministic orthonormal completion. Construction validates everything
/// eagerly, so a config in hand is always runnable.
#[derive(Clone, Debug)]
pub struct AncillaAttackConfig {
    d: f64,
    ancilla_dim: usize,
    chi: [Vec<Complex64>; 4],
    chi_choice: ChiChoice,
    attack: UnitaryOp,
    /// Complete measurement basis extending the four discrimination
    /// elements; `None` when those four are not pairwise orthonormal, in
    /// which case the return leg performs no measurement.
    discrimination: Option<Vec<StateVector>>,
}

impl AncillaAttackConfig {
    /// The default attack: a four-dimensional ancilla with the four states
    /// chosen as distinct canonical basis vectors.
    pub fn orthonormal(d: f64) -> Result<Self, AdversaryError> {
        Self::build(d, 4, canonical_chi(), ChiChoice::Orthonormal)
    }

    /// A family interpolating away from orthonormal ancilla states:
    /// `chi10` leans onto `chi00` (and `chi11` onto `-chi01`) with overlap
    /// `c`. The two attack image columns stay orthonormal for every
    /// `c` in [0, 1] because the cross terms cancel, but for c > 0 the
    /// discrimination elements lose orthonormality, so Eve cannot measure
    /// them projectively and the return leg leaves the state alone.
    pub fn with_chi_overlap(d: f64, c: f64) -> Result<Self, AdversaryError> {
        if !(0.0..=1.0).contains(&c) {
            return Err(AdversaryError::OverlapOutOfRange(c));
        }
        let e = |k: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); 4];
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        let w = (1.0 - c * c).sqrt();
        let mut chi10 = e(0);
        chi10.iter_mut().for_each(|a| *a *= c);
        chi10[2] = Complex64::new(w, 0.0);
        let mut chi11 = e(1);
        chi11.iter_mut().for_each(|a| *a *= -c);
        chi11[3] = Complex64::new(w, 0.0);
        Self::build(d, 4, [e(0), e(1), chi10, chi11], ChiChoice::Overlap(c))
    }

    /// Fully custom ancilla states `[chi00, chi01, chi10, chi11]`, each a
    /// unit vector of length `ancilla_dim`.
    pub fn new(
        d: f64,
        ancilla_dim: usize,
        chi: [Vec<Complex64>; 4],
    ) -> Result<Self, AdversaryError> {
        Self::build(d, ancilla_dim, chi, ChiChoice::Custom)
    }

    fn build(
        d: f64,
        ancilla_dim: usize,
        chi: [Vec<Complex64>; 4],
        chi_choice: ChiChoice,
    ) -> Result<Self, AdversaryError> {
        if !(0.0..=1.0).contains(&d) {
            return Err(AdversaryError::DetectionOutOfRange(d));
        }
        if !(1..=4).contains(&ancilla_dim) {
            return Err(AdversaryError::AncillaDimOutOfRange(ancilla_dim));
        }
        for (index, v) in chi.iter().enumerate() {
            if v.len() != ancilla_dim {
                return Err(QuantumError::WrongAmplitudeCount {
                    expected: ancilla_dim,
                    got: v.len(),
                }
                .into());
            }
            let norm_sq: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            if (norm_sq - 1.0).abs() > ALGEBRAIC_TOL {
                return Err(AdversaryError::ChiNotNormalized { index, norm_sq });
            }
        }
        let attack = build_attack_unitary(d, ancilla_dim, &chi)?;
        let discrimination = discrimination_basis(ancilla_dim, &chi)?;
        Ok(AncillaAttackConfig {
            d,
            ancilla_dim,
            chi,
            chi_choice,
            attack,
            discrimination,
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        (1.0 - self.d).sqrt()
    }

    pub fn beta(&self) -> f64 {
        self.d.sqrt()
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn chi_states(&self) -> &[Vec<Complex64>; 4] {
        &self.chi
    }

    /// The dilation unitary on (travel, ancilla), or on travel alone when
    /// the ancilla is one-dimensional (a trivial ancilla carries no
    /// dilation freedom, so only d = 0 and d = 1 admit one).
    pub fn attack_unitary(&self) -> &UnitaryOp {
        &self.attack
    }

    /// Eve's return-leg measurement basis (the four discrimination elements
    /// completed to the full joint dimension), or `None` when the
    /// discrimination elements are not orthonormal and no projective
    /// measurement exists.
    pub fn discrimination_basis(&self) -> Option<&[StateVector]> {
        self.discrimination.as_deref()
    }

    /// Ancilla start state: the first canonical basis vector.
    pub fn initial_ancilla_state(&self) -> StateVector {
        let layout =
            SubsystemLayout::single(ANCILLA, self.ancilla_dim).expect("ancilla_dim checked >= 2");
        StateVector::basis_state(layout, 0).expect("index 0 in range")
    }

    pub(crate) fn attack_targets(&self) -> Vec<SubsystemId> {
        if self.ancilla_dim >= 2 {
            vec![travel_id(), ancilla_id()]
        } else {
            vec![travel_id()]
        }
    }

    /// What a discrimination outcome says about Alice's operation.
    ///
    /// Outcomes 0 and 2 project onto the plus combinations and mean
    /// identity; 1 and 3 mean phase flip. Completion outcomes beyond the
    /// four discrimination elements carry zero probability and say nothing.
    pub fn infer_encoding(outcome: usize) -> Option<EncodingOp> {
        match outcome {
            0 | 2 => Some(EncodingOp::Identity),
            1 | 3 => Some(EncodingOp::PhaseFlip),
            _ => None,
        }
    }
}

fn canonical_chi() -> [Vec<Complex64>; 4] {
    let e = |k: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        v[k] = Complex64::new(1.0, 0.0);
        v
    };
    [e(0), e(1), e(2), e(3)]
}

/// Layout the attack acts on: (travel, ancilla), or travel alone for a
/// trivial ancilla.
fn attack_layout(ancilla_dim: usize) -> SubsystemLayout {
    let parts = if ancilla_dim >= 2 {
        vec![(travel_id(), 2), (ancilla_id(), ancilla_dim)]
    } else {
        vec![(travel_id(), 2)]
    };
    SubsystemLayout::new(parts).expect("valid attack layout")
}

/// Builds the dilation unitary from its two defining columns (inputs
/// `|0, e0>` and `|1, e0>`); every other column is a deterministic
/// orthonormal completion. Fails when the two image vectors are not
/// orthonormal, since no unitary extension exists then.
pub fn build_attack_unitary(
    d: f64,
    ancilla_dim: usize,
    chi: &[Vec<Complex64>; 4],
) -> Result<UnitaryOp, AdversaryError> {
    let layout = attack_layout(ancilla_dim);
    let dim = layout.total_dim();
    let alpha = Complex64::new((1.0 - d).sqrt(), 0.0);
    let beta = Complex64::new(d.sqrt(), 0.0);

    // image of |0, e0>: alpha |0, chi00> + beta |1, chi01>
    let mut col0 = vec![Complex64::new(0.0, 0.0); dim];
    // image of |1, e0>: alpha |1, chi11> + beta |0, chi10>
    let mut col1 = vec![Complex64::new(0.0, 0.0); dim];
    for j in 0..ancilla_dim {
        col0[j] += alpha * chi[0][j];
        col0[ancilla_dim + j] += beta * chi[1][j];
        col1[j] += beta * chi[2][j];
        col1[ancilla_dim + j] += alpha * chi[3][j];
    }
    Ok(UnitaryOp::from_partial_columns(
        layout,
        &[(0, col0), (ancilla_dim, col1)],
    )?)
}

/// The four discrimination elements
/// `(|0, chi00> +- |1, chi01>) / sqrt(2)` and
/// `(|1, chi11> +- |0, chi10>) / sqrt(2)`, in the outcome order
/// (0: first "+", 1: first "-", 2: second "+", 3: second "-"), completed to
/// a full basis of the joint space. "+" outcomes mean Alice did nothing,
/// "-" outcomes mean she flipped the phase. Returns `None` when the four
/// elements are not pairwise orthonormal (then no projective measurement
/// realizes the discrimination).
fn discrimination_basis(
    ancilla_dim: usize,
    chi: &[Vec<Complex64>; 4],
) -> Result<Option<Vec<StateVector>>, AdversaryError> {
    let layout = attack_layout(ancilla_dim);
    let dim = layout.total_dim();
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut elements: Vec<Vec<Complex64>> = Vec::with_capacity(4);
    for (first_pair, sign) in [(true, 1.0), (true, -1.0), (false, 1.0), (false, -1.0)] {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        let s = Complex64::new(sign, 0.0);
        if first_pair {
            for j in 0..ancilla_dim {
                v[j] += h * chi[0][j];
                v[ancilla_dim + j] += h * s * chi[1][j];
            }
        } else {
            for j in 0..ancilla_dim {
                v[ancilla_dim + j] += h * chi[3][j];
                v[j] += h * s * chi[2][j];
            }
        }
        elements.push(v);
    }
    for i in 0..4 {
        for j in i..4 {
            let overlap: Complex64 = elements[i]
                .iter()
                .zip(&elements[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let expect = if i == j { 1.0 } else { 0.0 };
            if (overlap.norm() - expect).abs() > ALGEBRAIC_TOL {
                return Ok(None);
            }
        }
    }
    let completion = orthonormal_completion(dim, &elements)?;
    elements.extend(completion);
    let basis = elements
        .into_iter()
        .map(|amps| StateVector::new(layout.clone(), amps))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(basis))
}

/// Measurement basis choices for intercept-resend.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementBasis {
    Computational,
    Diagonal,
}

impl MeasurementBasis {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementBasis::Computational => "computational",
            MeasurementBasis::Diagonal => "diagonal",
        }
    }

    pub(crate) fn action_tag(self) -> &'static str {
        match self {
            MeasurementBasis::Computational => TAG_MEASURE_COMPUTATIONAL,
            MeasurementBasis::Diagonal => TAG_MEASURE_DIAGONAL,
        }
    }

    /// What comparing the return outcome with the forward one says about
    /// Alice's operation.
    ///
    /// The phase flip is diagonal in the computational basis, so there the
    /// outcomes always agree and the comparison carries no information. In
    /// the diagonal basis the flip swaps the two elements, so agreement
    /// reads the operation exactly.
    pub fn infer_encoding(self, forward: u8, outcome: usize) -> Option<EncodingOp> {
        match self {
            MeasurementBasis::Computational => None,
            MeasurementBasis::Diagonal => Some(if outcome as u8 == forward {
                EncodingOp::Identity
            } else {
                EncodingOp::PhaseFlip
            }),
        }
    }

    /// The two travel-qubit basis states, in outcome order.
    pub fn states(self) -> [StateVector; 2] {
        let layout = SubsystemLayout::single(TRAVEL, 2).expect("single qubit");
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps: [[Complex64; 2]; 2] = match self {
            MeasurementBasis::Computational => [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            MeasurementBasis::Diagonal => [
                [Complex64::new(h, 0.0), Complex64::new(h, 0.0)],
                [Complex64::new(h, 0.0), Complex64::new(-h, 0.0)],
            ],
        };
        amps.map(|a| StateVector::new(layout.clone(), a.to_vec()).expect("unit amplitudes"))
    }
}

/// An eavesdropping strategy, usable directly as a [`ChannelTap`].
#[derive(Clone, Debug)]
pub enum Strategy {
    /// No attack; the identity tap.
    None,
    /// Unitary dilation with an ancilla, then (when the basis exists) the
    /// discrimination measurement on the return leg.
    Ancilla(AncillaAttackConfig),
    /// Measure the travel qubit in a fixed basis on both legs, resending
    /// the collapsed state.
    InterceptResend(MeasurementBasis),
}

impl Strategy {
    /// True when the strategy never touches the state (also covers the
    /// d = 0 attack, which the security analysis equates with no attack).
    pub fn is_passive(&self) -> bool {
        match self {
            Strategy::None => true,
            Strategy::Ancilla(cfg) => cfg.d() == 0.0,
            Strategy::InterceptResend(_) => false,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::None => f.write_str("none"),
            Strategy::Ancilla(cfg) => {
                write!(f, "ancilla:d={}", cfg.d)?;
                match cfg.chi_choice {
                    ChiChoice::Orthonormal => Ok(()),
                    ChiChoice::Overlap(c) => write!(f, ",chi=overlap:{c}"),
                    ChiChoice::Custom => write!(f, ",chi=custom"),
                }
            }
            Strategy::InterceptResend(basis) => {
                write!(f, "intercept_resend:basis={}", basis.as_str())
            }
        }
    }
}

impl FromStr for Strategy {
    type Err = AdversaryError;

    /// Grammar: `none`, `ancilla:d=<real>[,chi=orthonormal|overlap:<real>]`,
    /// `intercept_resend[:basis=<computational|diagonal>]` (the `basis=`
    /// prefix is optional; the basis defaults to computational).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let spec = s.trim();
        let fail = |reason: &str| AdversaryError::InvalidStrategy {
            spec: spec.to_owned(),
            reason: reason.to_owned(),
        };
        if spec == "none" {
            return Ok(Strategy::None);
        }
        if let Some(rest) = spec.strip_prefix("ancilla") {
            let rest = rest
                .strip_prefix(':')
                .ok_or_else(|| fail("expected ancilla:d=<real>"))?;
            let mut d: Option<f64> = None;
            let mut overlap: Option<f64> = None;
            for part in rest.split(',') {
                let (key, value) = part
                    .split_once('=')
                    .ok_or_else(|| fail("expected key=value parts"))?;
                match key.trim() {
                    "d" => {
                        let parsed = value
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| fail("d is not a number"))?;
                        d = Some(parsed);
                    }
                    "chi" => match value.trim() {
                        "orthonormal" => overlap = None,
                        other => {
                            let c = other
                                .strip_prefix("overlap:")
                                .ok_or_else(|| fail("chi must be orthonormal or overlap:<real>"))?
                                .parse::<f64>()
                                .map_err(|_| fail("overlap is not a number"))?;
                            overlap = Some(c);
                        }
                    },
                    other => return Err(fail(&format!("unknown key \"{other}\""))),
                }
            }
            let d = d.ok_or_else(|| fail("missing d=<real>"))?;
            let cfg = match overlap {
                None => AncillaAttackConfig::orthonormal(d)?,
                Some(c) => AncillaAttackConfig::with_chi_overlap(d, c)?,
            };
            return Ok(Strategy::Ancilla(cfg));
        }
        if let Some(rest) = spec.strip_prefix("intercept_resend") {
            let basis = match rest.strip_prefix(':') {
                None if rest.is_empty() => MeasurementBasis::Computational,
                None => return Err(fail("expected intercept_resend[:basis=<name>]")),
                Some(arg) => {
                    let name = arg.strip_prefix("basis=").unwrap_or(arg).trim();
                    match name {
                        "computational" => MeasurementBasis::Computational,
                        "diagonal" => MeasurementBasis::Diagonal,
                        _ => return Err(fail("basis must be computational or diagonal")),
                    }
                }
            };
            return Ok(Strategy::InterceptResend(basis));
        }
        Err(fail(
            "expected none, ancilla:d=<real>[,chi=...], or intercept_resend[:basis=<name>]",
        ))
    }
}

impl ChannelTap for Strategy {
    fn on_forward(
        &self,
        view: &mut ChannelView,
        rng: &mut dyn RngCore,
    ) -> Result<EveRecord, ProtocolError> {
        match self {
            Strategy::None => Ok(EveRecord::none()),
            Strategy::Ancilla(cfg) => {
                if cfg.d() == 0.0 {
                    // no flipping branch, no information, no trace: treated
                    // as absent, matching the analysis of the attack
                    return Ok(EveRecord::none());
                }
                if view.has_subsystem(&ancilla_id()) {
                    return Err(ProtocolError::TapContract(
                        "ancilla already attached".to_owned(),
                    ));
                }
                if cfg.ancilla_dim() >= 2 {
                    view.attach(&cfg.initial_ancilla_state())?;
                }
                view.apply(cfg.attack_unitary(), &cfg.attack_targets())?;
                let mut record = EveRecord::none();
                record.pre_encoding_action = TAG_ANCILLA.to_owned();
                Ok(record)
            }
            Strategy::InterceptResend(basis) => {
                let outcome = view.measure(&[travel_id()], &basis.states(), rng)?;
                let mut record = EveRecord::none();
                record.pre_encoding_action = basis.action_tag().to_owned();
                record.forward_outcome = Some(outcome as u8);
                Ok(record)
            }
        }
    }

    fn on_return(
        &self,
        view: &mut ChannelView,
        mut record: EveRecord,
        rng: &mut dyn RngCore,
    ) -> Result<EveRecord, ProtocolError> {
        match self {
            Strategy::None => Ok(record),
            Strategy::Ancilla(cfg) => {
                if cfg.d() == 0.0 {
                    return Ok(record);
                }
                if cfg.ancilla_dim() >= 2 && !view.has_subsystem(&ancilla_id()) {
                    return Err(ProtocolError::TapContract(
                        "no ancilla attached: the forward tap has not run".to_owned(),
                    ));
                }
                if let Some(basis) = cfg.discrimination_basis() {
                    let outcome = view.measure(&cfg.attack_targets(), basis, rng)?;
                    record.measurement_outcome = Some(outcome);
                    record.inferred_operation = AncillaAttackConfig::infer_encoding(outcome);
                }
                Ok(record)
            }
            Strategy::InterceptResend(basis) => {
                let forward = record.forward_outcome.ok_or_else(|| {
                    ProtocolError::TapContract(
                        "return leg reached without a forward outcome".to_owned(),
                    )
                })?;
                let outcome = view.measure(&[travel_id()], &basis.states(), rng)?;
                record.measurement_outcome = Some(outcome);
                record.inferred_operation = basis.infer_encoding(forward, outcome);
                Ok(record)
            }
        }
    }
}
