//! Monte Carlo experiment harness, the exact Born-rule oracle it is
//! validated against, and the analytic detection and survival numbers.
//!
//! The two computation paths are deliberately independent: [`run_experiment`]
//! samples collapses round by round through [`crate::protocol::run_round`],
//! while [`exact_round_distribution`] enumerates every eavesdropper outcome
//! branch and computes Bob's cell probabilities from reduced density
//! matrices, consuming no randomness at all. Agreement between the two is
//! itself a tested property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{
    AdversaryError, AncillaAttackConfig, MeasurementBasis, Strategy, TAG_ANCILLA,
};
use crate::protocol::{
    alice_encode, ancilla_id, bob_decode, home_id, run_round, travel_id, DecodeOutcome,
    EncodingOp, EveRecord, ProtocolError, RoundRecord, HOME, TRAVEL,
};
use crate::quantum::{
    apply_unitary, bell_basis_on, born_probabilities, branch_decomposition, density_of,
    make_bell_on, partial_trace, tensor, BellLabel, QuantumError, StateVector, ALGEBRAIC_TOL,
};

/// Ceiling on `n_rounds * trials` for one experiment.
pub const DEFAULT_ROUND_BUDGET: u64 = 100_000_000;

/// Enumerated branches below this probability are dropped. Only
/// floating-point dust lands here: completion outcomes and
/// forbidden-transition branches are exactly zero analytically, and every
/// genuine branch of the provided strategies is many orders larger.
pub const BRANCH_PRUNE_TOL: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("{rounds} rounds x {trials} trials exceeds the budget of {budget}")]
    BudgetExceeded { rounds: u64, trials: u64, budget: u64 },
    #[error("n_rounds must be positive")]
    ZeroRounds,
    #[error("trials must be positive")]
    ZeroTrials,
    #[error("a fixed bit pattern must not be empty")]
    EmptyPattern,
    #[error("bit patterns hold 0s and 1s, got {bit}")]
    PatternBit { bit: u8 },
    #[error("transcripts require trials = 1, got {trials}")]
    TranscriptTrials { trials: u64 },
    #[error("probability {p} is outside [0, 1]")]
    ProbabilityOutOfRange { p: f64 },
    #[error("survival grids must not be empty")]
    EmptyGrid,
    #[error("enumerated branch mass is {mass}, not 1")]
    BranchMass { mass: f64 },
}

/// Where Alice's message bits come from.
#[derive(Clone, Debug)]
pub enum BitSource {
    /// One fair-coin draw per round, from the trial's generator.
    Random,
    /// A fixed pattern, cycled when the round count exceeds its length.
    Fixed(Vec<u8>),
}

impl BitSource {
    fn validate(&self) -> Result<(), AnalysisError> {
        match self {
            BitSource::Random => Ok(()),
            BitSource::Fixed(bits) => {
                if bits.is_empty() {
                    return Err(AnalysisError::EmptyPattern);
                }
                match bits.iter().find(|&&b| b > 1) {
                    Some(&bit) => Err(AnalysisError::PatternBit { bit }),
                    None => Ok(()),
                }
            }
        }
    }

    /// Bit for the 1-based `round`. `Random` consumes one uniform draw.
    fn bit(&self, round: u64, rng: &mut ChaCha8Rng) -> u8 {
        match self {
            BitSource::Random => u8::from(rng.random::<f64>() >= 0.5),
            BitSource::Fixed(bits) => bits[((round - 1) % bits.len() as u64) as usize],
        }
    }
}

/// One Monte Carlo experiment: `trials` independent repetitions of
/// `n_rounds` protocol rounds against one eavesdropping strategy.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n_rounds: u64,
    pub strategy: Strategy,
    pub bit_source: BitSource,
    /// Abandon a trial at its first wrong-family outcome.
    pub stop_on_intrusion: bool,
    pub master_seed: u64,
    pub trials: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.n_rounds == 0 {
            return Err(AnalysisError::ZeroRounds);
        }
        if self.trials == 0 {
            return Err(AnalysisError::ZeroTrials);
        }
        let total = self.n_rounds.saturating_mul(self.trials);
        if total > DEFAULT_ROUND_BUDGET {
            return Err(AnalysisError::BudgetExceeded {
                rounds: self.n_rounds,
                trials: self.trials,
                budget: DEFAULT_ROUND_BUDGET,
            });
        }
        self.bit_source.validate()
    }

    /// Generator for one trial: the master seed keys the cipher, the trial
    /// index selects its stream, so trials are independent and
    /// schedule-free.
    fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }
}

/// Bell outcome counts, in the fixed outcome order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BellHistogram {
    pub psi_plus: u64,
    pub psi_minus: u64,
    pub phi_plus: u64,
    pub phi_minus: u64,
}

impl BellHistogram {
    pub fn count(&self, label: BellLabel) -> u64 {
        match label {
            BellLabel::PsiPlus => self.psi_plus,
            BellLabel::PsiMinus => self.psi_minus,
            BellLabel::PhiPlus => self.phi_plus,
            BellLabel::PhiMinus => self.phi_minus,
        }
    }

    pub fn total(&self) -> u64 {
        self.psi_plus + self.psi_minus + self.phi_plus + self.phi_minus
    }

    fn bump(&mut self, label: BellLabel) {
        match label {
            BellLabel::PsiPlus => self.psi_plus += 1,
            BellLabel::PsiMinus => self.psi_minus += 1,
            BellLabel::PhiPlus => self.phi_plus += 1,
            BellLabel::PhiMinus => self.phi_minus += 1,
        }
    }

    fn merge(self, other: Self) -> Self {
        BellHistogram {
            psi_plus: self.psi_plus + other.psi_plus,
            psi_minus: self.psi_minus + other.psi_minus,
            phi_plus: self.phi_plus + other.phi_plus,
            phi_minus: self.phi_minus + other.phi_minus,
        }
    }
}

/// Aggregated results of one experiment.
///
/// `bit_error_count` is taken over `bit_denominator`, the rounds that
/// decoded to a bit at all; intrusion rounds decode to nothing and are
/// excluded. `eve_accuracy` is the fraction of all evaluated rounds where
/// the eavesdropper's inferred operation matched Alice's; rounds without an
/// inference never match.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub trials: u64,
    pub rounds_evaluated: u64,
    pub bell_histogram: BellHistogram,
    pub intrusion_count: u64,
    pub bit_error_count: u64,
    pub bit_denominator: u64,
    /// Per-round intrusion rate estimate.
    pub detection_rate: f64,
    /// Normal-approximation standard error of `detection_rate`.
    pub detection_std_err: f64,
    pub eve_match_count: u64,
    pub eve_accuracy: f64,
    /// Trials that hit an intrusion in stop mode.
    pub halted_trials: u64,
    /// Mean 1-based halt round over the halted trials.
    pub mean_halt_round: Option<f64>,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    rounds: u64,
    bell: BellHistogram,
    intrusions: u64,
    bit_errors: u64,
    bit_denominator: u64,
    eve_matches: u64,
    halted: u64,
    halt_round_sum: u64,
}

impl Tally {
    /// Folds one round in; returns whether it decoded to an intrusion.
    fn absorb(&mut self, record: &RoundRecord) -> bool {
        self.rounds += 1;
        self.bell.bump(record.measured);
        if record
            .eve
            .inferred_operation
            .is_some_and(|op| op.bit() == record.alice_bit)
        {
            self.eve_matches += 1;
        }
        match record.decoded {
            DecodeOutcome::Bit(bit) => {
                self.bit_denominator += 1;
                if bit != record.alice_bit {
                    self.bit_errors += 1;
                }
                false
            }
            DecodeOutcome::Intrusion => {
                self.intrusions += 1;
                true
            }
        }
    }

    fn merge(self, other: Self) -> Self {
        Tally {
            rounds: self.rounds + other.rounds,
            bell: self.bell.merge(other.bell),
            intrusions: self.intrusions + other.intrusions,
            bit_errors: self.bit_errors + other.bit_errors,
            bit_denominator: self.bit_denominator + other.bit_denominator,
            eve_matches: self.eve_matches + other.eve_matches,
            halted: self.halted + other.halted,
            halt_round_sum: self.halt_round_sum + other.halt_round_sum,
        }
    }

    fn finish(self, trials: u64) -> ExperimentStats {
        let rounds = self.rounds as f64;
        let rate = if self.rounds == 0 {
            0.0
        } else {
            self.intrusions as f64 / rounds
        };
        let std_err = if self.rounds == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / rounds).sqrt()
        };
        let accuracy = if self.rounds == 0 {
            0.0
        } else {
            self.eve_matches as f64 / rounds
        };
        let mean_halt = (self.halted > 0).then(|| self.halt_round_sum as f64 / self.halted as f64);
        ExperimentStats {
            trials,
            rounds_evaluated: self.rounds,
            bell_histogram: self.bell,
            intrusion_count: self.intrusions,
            bit_error_count: self.bit_errors,
            bit_denominator: self.bit_denominator,
            detection_rate: rate,
            detection_std_err: std_err,
            eve_match_count: self.eve_matches,
            eve_accuracy: accuracy,
            halted_trials: self.halted,
            mean_halt_round: mean_halt,
        }
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<Tally, AnalysisError> {
    let mut rng = cfg.trial_rng(trial);
    let mut tally = Tally::default();
    for round in 1..=cfg.n_rounds {
        let bit = cfg.bit_source.bit(round, &mut rng);
        let record = run_round(round, bit, &cfg.strategy, &mut rng)?;
        let intrusion = tally.absorb(&record);
        if intrusion && cfg.stop_on_intrusion {
            tally.halted += 1;
            tally.halt_round_sum += round;
            break;
        }
    }
    Ok(tally)
}

/// Runs the experiment, trials in parallel.
///
/// Deterministic for a fixed config: each trial's generator depends only on
/// (master_seed, trial index), and aggregation is a commutative fold, so
/// the schedule cannot leak into the result.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentStats, AnalysisError> {
    cfg.validate()?;
    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    Ok(tally.finish(cfg.trials))
}

/// Runs a single-trial experiment and keeps every round record.
///
/// Uses the same generator as trial 0 of [`run_experiment`], so the
/// transcript is exactly the stream the statistics were computed from.
pub fn run_transcript(cfg: &ExperimentConfig) -> Result<Vec<RoundRecord>, AnalysisError> {
    cfg.validate()?;
    if cfg.trials != 1 {
        return Err(AnalysisError::TranscriptTrials { trials: cfg.trials });
    }
    let mut rng = cfg.trial_rng(0);
    let mut records = Vec::with_capacity(cfg.n_rounds.min(4096) as usize);
    for round in 1..=cfg.n_rounds {
        let bit = cfg.bit_source.bit(round, &mut rng);
        let record = run_round(round, bit, &cfg.strategy, &mut rng)?;
        let intrusion = record.decoded == DecodeOutcome::Intrusion;
        records.push(record);
        if intrusion && cfg.stop_on_intrusion {
            break;
        }
    }
    Ok(records)
}

/// One eavesdropper outcome branch: its probability, the record the tap
/// would have produced, and Bob's four Bell-cell probabilities conditional
/// on the branch.
#[derive(Clone, Debug)]
pub struct DistributionBranch {
    pub probability: f64,
    pub eve: EveRecord,
    pub bell: [f64; 4],
}

/// Exact per-round outcome distribution for one (preparation, bit,
/// strategy) cell.
#[derive(Clone, Debug)]
pub struct RoundDistribution {
    prepared: BellLabel,
    alice_bit: u8,
    branches: Vec<DistributionBranch>,
}

impl RoundDistribution {
    pub fn prepared(&self) -> BellLabel {
        self.prepared
    }

    pub fn alice_bit(&self) -> u8 {
        self.alice_bit
    }

    pub fn branches(&self) -> &[DistributionBranch] {
        &self.branches
    }

    /// Bob's Bell-cell probabilities with the eavesdropper outcome summed
    /// out.
    pub fn bell_marginal(&self) -> [f64; 4] {
        let mut cells = [0.0; 4];
        for branch in &self.branches {
            for (cell, p) in cells.iter_mut().zip(branch.bell) {
                *cell += branch.probability * p;
            }
        }
        cells
    }

    pub fn cell_probability(&self, label: BellLabel) -> f64 {
        self.bell_marginal()[label.index()]
    }

    /// Probability that Bob's outcome lands in the wrong Bell family.
    pub fn intrusion_probability(&self) -> f64 {
        self.decode_masses().1
    }

    /// Probability that a round decoding to a bit decodes to the wrong one,
    /// conditional on decoding to some bit. Zero when intrusion is certain
    /// and the condition is empty.
    pub fn bit_error_probability(&self) -> f64 {
        let (bit_mass, _) = self.decode_masses();
        if bit_mass <= BRANCH_PRUNE_TOL {
            0.0
        } else {
            self.error_mass() / bit_mass
        }
    }

    /// Probability that the eavesdropper's inferred operation matches
    /// Alice's actual one. Branches without an inference never match.
    pub fn eve_match_probability(&self) -> f64 {
        self.branches
            .iter()
            .filter(|branch| {
                branch
                    .eve
                    .inferred_operation
                    .is_some_and(|op| op.bit() == self.alice_bit)
            })
            .map(|branch| branch.probability)
            // Empty f64 sums start from -0.0; fold from +0.0 so a
            // never-matching strategy reports a clean zero.
            .fold(0.0, |acc, p| acc + p)
    }

    /// (mass decoding to a bit, mass decoding to an intrusion).
    fn decode_masses(&self) -> (f64, f64) {
        let marginal = self.bell_marginal();
        let mut bits = 0.0;
        let mut intrusions = 0.0;
        for label in BellLabel::all() {
            let mass = marginal[label.index()];
            match bob_decode(self.prepared, label).expect("prepared label validated") {
                DecodeOutcome::Bit(_) => bits += mass,
                DecodeOutcome::Intrusion => intrusions += mass,
            }
        }
        (bits, intrusions)
    }

    fn error_mass(&self) -> f64 {
        let marginal = self.bell_marginal();
        BellLabel::all()
            .iter()
            .filter_map(|&label| {
                match bob_decode(self.prepared, label).expect("prepared label validated") {
                    DecodeOutcome::Bit(bit) if bit != self.alice_bit => {
                        Some(marginal[label.index()])
                    }
                    _ => None,
                }
            })
            .fold(0.0, |acc, p| acc + p)
    }
}

fn bell_cells_of_pair_state(state: &StateVector) -> Result<[f64; 4], AnalysisError> {
    let rho = density_of(state)?;
    let reduced = if state.layout().contains(&ancilla_id()) {
        partial_trace(&rho, &[travel_id(), home_id()])?
    } else {
        rho
    };
    let bell = bell_basis_on(TRAVEL, HOME)?;
    let probs = born_probabilities(&reduced, &bell)?;
    Ok([probs[0], probs[1], probs[2], probs[3]])
}

fn assert_unit_mass(branches: &[DistributionBranch]) -> Result<(), AnalysisError> {
    let mass: f64 = branches.iter().map(|b| b.probability).sum();
    if (mass - 1.0).abs() > ALGEBRAIC_TOL {
        return Err(AnalysisError::BranchMass { mass });
    }
    Ok(())
}

/// Exact Born-rule branch enumeration of one round; no sampling anywhere.
///
/// Every eavesdropper measurement outcome becomes one branch with its exact
/// probability and the record the live tap would have produced; Bob's cells
/// per branch come from the reduced density matrix of (travel, home).
/// Branches below [`BRANCH_PRUNE_TOL`] are dropped and the surviving mass
/// is checked against 1. This is the oracle that validates the sampler.
pub fn exact_round_distribution(
    prepared: BellLabel,
    alice_bit: u8,
    strategy: &Strategy,
) -> Result<RoundDistribution, AnalysisError> {
    EncodingOp::for_bit(alice_bit)?;
    if !matches!(prepared, BellLabel::PsiPlus | BellLabel::PhiPlus) {
        return Err(ProtocolError::InvalidPreparation { label: prepared }.into());
    }
    let branches = match strategy {
        Strategy::None => passive_branches(prepared, alice_bit)?,
        Strategy::Ancilla(cfg) if cfg.d() == 0.0 => passive_branches(prepared, alice_bit)?,
        Strategy::Ancilla(cfg) => ancilla_branches(prepared, alice_bit, cfg)?,
        Strategy::InterceptResend(basis) => intercept_branches(prepared, alice_bit, *basis)?,
    };
    assert_unit_mass(&branches)?;
    Ok(RoundDistribution {
        prepared,
        alice_bit,
        branches,
    })
}

fn passive_branches(
    prepared: BellLabel,
    alice_bit: u8,
) -> Result<Vec<DistributionBranch>, AnalysisError> {
    let state = make_bell_on(prepared, TRAVEL, HOME)?;
    let encoded = alice_encode(alice_bit, &state)?;
    Ok(vec![DistributionBranch {
        probability: 1.0,
        eve: EveRecord::none(),
        bell: bell_cells_of_pair_state(&encoded)?,
    }])
}

fn ancilla_branches(
    prepared: BellLabel,
    alice_bit: u8,
    cfg: &AncillaAttackConfig,
) -> Result<Vec<DistributionBranch>, AnalysisError> {
    let mut state = make_bell_on(prepared, TRAVEL, HOME)?;
    if cfg.ancilla_dim() >= 2 {
        state = tensor(&state, &cfg.initial_ancilla_state())?;
    }
    let state = apply_unitary(&state, cfg.attack_unitary(), &cfg.attack_targets())?;
    let state = alice_encode(alice_bit, &state)?;

    let mut tagged = EveRecord::none();
    tagged.pre_encoding_action = TAG_ANCILLA.to_owned();

    let Some(basis) = cfg.discrimination_basis() else {
        // No projective discrimination exists; the round carries the
        // dilation but no return-leg measurement.
        return Ok(vec![DistributionBranch {
            probability: 1.0,
            eve: tagged,
            bell: bell_cells_of_pair_state(&state)?,
        }]);
    };

    let mut branches = Vec::new();
    for (outcome, (probability, projected)) in
        branch_decomposition(&state, &cfg.attack_targets(), basis)?
            .into_iter()
            .enumerate()
    {
        if probability < BRANCH_PRUNE_TOL {
            continue;
        }
        let collapsed = projected.normalized()?;
        let mut eve = tagged.clone();
        eve.measurement_outcome = Some(outcome);
        eve.inferred_operation = AncillaAttackConfig::infer_encoding(outcome);
        branches.push(DistributionBranch {
            probability,
            eve,
            bell: bell_cells_of_pair_state(&collapsed)?,
        });
    }
    Ok(branches)
}

fn intercept_branches(
    prepared: BellLabel,
    alice_bit: u8,
    basis: MeasurementBasis,
) -> Result<Vec<DistributionBranch>, AnalysisError> {
    let state = make_bell_on(prepared, TRAVEL, HOME)?;
    let travel = [travel_id()];
    let elements = basis.states();
    let mut branches = Vec::new();
    for (forward, (forward_p, forward_projected)) in
        branch_decomposition(&state, &travel, &elements)?
            .into_iter()
            .enumerate()
    {
        if forward_p < BRANCH_PRUNE_TOL {
            continue;
        }
        let encoded = alice_encode(alice_bit, &forward_projected.normalized()?)?;
        for (outcome, (return_p, return_projected)) in
            branch_decomposition(&encoded, &travel, &elements)?
                .into_iter()
                .enumerate()
        {
            let probability = forward_p * return_p;
            if probability < BRANCH_PRUNE_TOL {
                continue;
            }
            let mut eve = EveRecord::none();
            eve.pre_encoding_action = basis.action_tag().to_owned();
            eve.forward_outcome = Some(forward as u8);
            eve.measurement_outcome = Some(outcome);
            eve.inferred_operation = basis.infer_encoding(forward as u8, outcome);
            branches.push(DistributionBranch {
                probability,
                eve,
                bell: bell_cells_of_pair_state(&return_projected.normalized()?)?,
            });
        }
    }
    Ok(branches)
}

/// Per-round detection probability of a strategy: the wrong-family mass,
/// averaged uniformly over Bob's two preparations and Alice's two bits.
pub fn detection_probability(strategy: &Strategy) -> Result<f64, AnalysisError> {
    let mut total = 0.0;
    for prepared in [BellLabel::PsiPlus, BellLabel::PhiPlus] {
        for bit in [0u8, 1] {
            total += exact_round_distribution(prepared, bit, strategy)?.intrusion_probability();
        }
    }
    Ok(total / 4.0)
}

/// Probability of surviving `n` control rounds undetected, carried in the
/// log10 domain so magnitudes like 10^-302 stay representable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalQuery {
    pub n: u64,
    /// Per-round detection probability.
    pub p: f64,
}

/// log10 of (1 - p)^n. Zero rounds survive with certainty; certain
/// detection with at least one round returns negative infinity, the
/// documented sentinel for an exact zero.
pub fn survival_probability(query: SurvivalQuery) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&query.p) {
        return Err(AnalysisError::ProbabilityOutOfRange { p: query.p });
    }
    if query.n == 0 {
        return Ok(0.0);
    }
    if query.p == 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(query.n as f64 * (1.0 - query.p).log10())
}

/// Renders a log10-domain probability as a short scientific-notation
/// string: "9.33e-302", with "1" for certainty and "0" for the negative
/// infinity sentinel. The mantissa is rounded to three significant digits,
/// rolling into the next decade when it rounds up to 10.
pub fn render_survival(log10_probability: f64) -> String {
    if log10_probability == f64::NEG_INFINITY {
        return "0".to_owned();
    }
    if log10_probability == 0.0 {
        return "1".to_owned();
    }
    let mut exponent = log10_probability.floor();
    let mut mantissa = 10f64.powf(log10_probability - exponent);
    if mantissa >= 9.995 {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    format!("{mantissa:.2}e{}", exponent as i64)
}

/// One row of the eavesdropping success table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub d: f64,
    pub n: u64,
    pub p_detect: f64,
    pub log10_survival: f64,
}

/// Detection and survival over a (d, n) grid, d-major: for each detection
/// parameter, the exact per-round detection probability of the orthonormal
/// ancilla attack and the survival numbers for every round count.
pub fn success_curve(d_grid: &[f64], n_grid: &[u64]) -> Result<Vec<SurvivalPoint>, AnalysisError> {
    if d_grid.is_empty() || n_grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let mut rows = Vec::with_capacity(d_grid.len() * n_grid.len());
    for &d in d_grid {
        let strategy = Strategy::Ancilla(AncillaAttackConfig::orthonormal(d)?);
        let p_detect = detection_probability(&strategy)?;
        for &n in n_grid {
            rows.push(SurvivalPoint {
                d,
                n,
                p_detect,
                log10_survival: survival_probability(SurvivalQuery { n, p: p_detect })?,
            });
        }
    }
    Ok(rows)
}
