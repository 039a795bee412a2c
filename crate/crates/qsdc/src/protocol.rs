//! The ping-pong round: Bob prepares an entangled pair and keeps one qubit
//! at home, the other travels to Alice, who encodes a bit by either doing
//! nothing or applying a phase flip, and Bob finally Bell-measures the pair.
//! A round decodes to the sent bit on the noiseless channel; any outcome in
//! the wrong Bell family is flagged as an intrusion.
//!
//! Eavesdroppers plug into the two channel legs through [`ChannelTap`]. A
//! tap acts on the joint state only through a [`ChannelView`], which refuses
//! every operation that names Bob's home qubit: the home qubit never leaves
//! Bob, so no channel attack can touch it.

use rand::{Rng, RngCore};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{
    apply_unitary, bell_basis_on, make_bell_on, measure_in_basis, tensor, BellLabel,
    QuantumError, StateVector, SubsystemId, UnitaryOp,
};

/// Subsystem id of the qubit that travels Bob -> Alice -> Bob.
pub const TRAVEL: &str = "travel";
/// Subsystem id of the qubit Bob keeps.
pub const HOME: &str = "home";
/// Subsystem id an eavesdropper's ancilla attaches under.
pub const ANCILLA: &str = "ancilla";

pub fn travel_id() -> SubsystemId {
    TRAVEL.into()
}

pub fn home_id() -> SubsystemId {
    HOME.into()
}

pub fn ancilla_id() -> SubsystemId {
    ANCILLA.into()
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("message bit must be 0 or 1, got {bit}")]
    InvalidBit { bit: u8 },
    #[error("the protocol only prepares PsiPlus or PhiPlus, got {label}")]
    InvalidPreparation { label: BellLabel },
    #[error("channel taps may not touch the home qubit")]
    HomeQubitAccess,
    #[error("channel tap contract violated: {0}")]
    TapContract(String),
}

/// Alice's two encoding operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingOp {
    Identity,
    PhaseFlip,
}

impl EncodingOp {
    pub fn for_bit(bit: u8) -> Result<Self, ProtocolError> {
        match bit {
            0 => Ok(EncodingOp::Identity),
            1 => Ok(EncodingOp::PhaseFlip),
            _ => Err(ProtocolError::InvalidBit { bit }),
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            EncodingOp::Identity => 0,
            EncodingOp::PhaseFlip => 1,
        }
    }
}

/// What Bob's Bell measurement means: a decoded bit, or an outcome in the
/// wrong Bell family, which only an attack can produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeOutcome {
    Bit(u8),
    Intrusion,
}

impl Serialize for DecodeOutcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            DecodeOutcome::Bit(b) => serializer.serialize_u8(*b),
            DecodeOutcome::Intrusion => serializer.serialize_str("Intrusion"),
        }
    }
}

/// Everything the eavesdropper knows about one round. Every strategy fills
/// `pre_encoding_action` with its tag; the rest stays `None` unless the
/// strategy measured something.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EveRecord {
    /// Tag of the forward-leg action ("none" when untapped).
    pub pre_encoding_action: String,
    /// Forward-leg measurement outcome, for strategies that measure there.
    pub forward_outcome: Option<u8>,
    /// Return-leg measurement outcome index, in the strategy's basis order.
    pub measurement_outcome: Option<usize>,
    /// Eve's conclusion about Alice's operation, when her measurements
    /// determine it.
    pub inferred_operation: Option<EncodingOp>,
}

impl EveRecord {
    pub fn none() -> Self {
        EveRecord {
            pre_encoding_action: "none".to_owned(),
            forward_outcome: None,
            measurement_outcome: None,
            inferred_operation: None,
        }
    }
}

/// Transcript of one round, in serialization order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    pub prepared: BellLabel,
    pub alice_bit: u8,
    pub eve: EveRecord,
    pub measured: BellLabel,
    pub decoded: DecodeOutcome,
}

/// A tap's handle on the in-flight joint state. Every mutation goes through
/// methods that reject the home qubit as a target, which is how the channel
/// enforces that attacks are local to the travel qubit (and whatever the
/// attacker attaches).
pub struct ChannelView<'a> {
    state: &'a mut StateVector,
    home: SubsystemId,
}

impl<'a> ChannelView<'a> {
    pub(crate) fn new(state: &'a mut StateVector) -> Self {
        ChannelView {
            state,
            home: home_id(),
        }
    }

    pub fn state(&self) -> &StateVector {
        self.state
    }

    pub fn has_subsystem(&self, id: &SubsystemId) -> bool {
        self.state.layout().contains(id)
    }

    fn guard(&self, targets: &[SubsystemId]) -> Result<(), ProtocolError> {
        if targets.contains(&self.home) {
            return Err(ProtocolError::HomeQubitAccess);
        }
        Ok(())
    }

    /// Applies a unitary to non-home subsystems.
    pub fn apply(&mut self, u: &UnitaryOp, targets: &[SubsystemId]) -> Result<(), ProtocolError> {
        self.guard(targets)?;
        *self.state = apply_unitary(self.state, u, targets)?;
        Ok(())
    }

    /// Tensors an attacker-owned subsystem (an ancilla) onto the state.
    pub fn attach(&mut self, extra: &StateVector) -> Result<(), ProtocolError> {
        if extra.layout().contains(&self.home) {
            return Err(ProtocolError::HomeQubitAccess);
        }
        let joined = tensor(self.state, extra)?;
        *self.state = joined;
        Ok(())
    }

    /// Projectively measures non-home subsystems; the state collapses and
    /// the outcome index (in basis order) is returned.
    pub fn measure(
        &mut self,
        targets: &[SubsystemId],
        basis: &[StateVector],
        rng: &mut dyn RngCore,
    ) -> Result<usize, ProtocolError> {
        self.guard(targets)?;
        let (outcome, post) = measure_in_basis(self.state, targets, basis, rng)?;
        *self.state = post;
        Ok(outcome)
    }
}

/// An eavesdropping strategy: hooks for the two channel legs. Both default
/// to doing nothing. The forward hook may start an [`EveRecord`]; the return
/// hook receives it back and completes it.
pub trait ChannelTap {
    fn on_forward(
        &self,
        view: &mut ChannelView,
        rng: &mut dyn RngCore,
    ) -> Result<EveRecord, ProtocolError> {
        let _ = (view, rng);
        Ok(EveRecord::none())
    }

    fn on_return(
        &self,
        view: &mut ChannelView,
        record: EveRecord,
        rng: &mut dyn RngCore,
    ) -> Result<EveRecord, ProtocolError> {
        let _ = (view, rng);
        Ok(record)
    }
}

/// The untapped channel.
pub struct NoTap;

impl ChannelTap for NoTap {}

/// Bob's preparation: PsiPlus or PhiPlus with equal probability (one uniform
/// draw), over subsystems (travel, home).
pub fn bob_prepare(rng: &mut dyn RngCore) -> (BellLabel, StateVector) {
    let label = if rng.random::<f64>() < 0.5 {
        BellLabel::PsiPlus
    } else {
        BellLabel::PhiPlus
    };
    let state = make_bell_on(label, TRAVEL, HOME).expect("travel and home are distinct");
    (label, state)
}

/// Alice's encoding: bit 1 applies the phase flip to the travel qubit, bit 0
/// leaves the state alone. Works identically with or without an attached
/// ancilla.
pub fn alice_encode(bit: u8, joint: &StateVector) -> Result<StateVector, ProtocolError> {
    match EncodingOp::for_bit(bit)? {
        EncodingOp::Identity => Ok(joint.clone()),
        EncodingOp::PhaseFlip => {
            let z = UnitaryOp::sigma_z(travel_id());
            Ok(apply_unitary(joint, &z, &[travel_id()])?)
        }
    }
}

/// Bob's decode table. Same family: the plus state means bit 0, the minus
/// state bit 1. Opposite family: intrusion.
pub fn bob_decode(prepared: BellLabel, measured: BellLabel) -> Result<DecodeOutcome, ProtocolError> {
    if !matches!(prepared, BellLabel::PsiPlus | BellLabel::PhiPlus) {
        return Err(ProtocolError::InvalidPreparation { label: prepared });
    }
    if !prepared.same_family(measured) {
        return Ok(DecodeOutcome::Intrusion);
    }
    if measured == prepared {
        Ok(DecodeOutcome::Bit(0))
    } else {
        Ok(DecodeOutcome::Bit(1))
    }
}

/// One full round: prepare, forward leg (tap), encode, return leg (tap),
/// Bell measurement on (travel, home), decode.
///
/// Uniform draws are consumed in that order: one for the preparation,
/// whatever the tap's hooks draw, one for Bob's measurement.
pub fn run_round(
    round: u64,
    alice_bit: u8,
    tap: &dyn ChannelTap,
    rng: &mut dyn RngCore,
) -> Result<RoundRecord, ProtocolError> {
    EncodingOp::for_bit(alice_bit)?;
    let (prepared, mut state) = bob_prepare(rng);
    let record = {
        let mut view = ChannelView::new(&mut state);
        tap.on_forward(&mut view, rng)?
    };
    let mut state = alice_encode(alice_bit, &state)?;
    let record = {
        let mut view = ChannelView::new(&mut state);
        tap.on_return(&mut view, record, rng)?
    };
    let bell = bell_basis_on(TRAVEL, HOME)?;
    let (outcome, _) = measure_in_basis(&state, &[travel_id(), home_id()], &bell, rng)?;
    let measured = BellLabel::all()[outcome];
    let decoded = bob_decode(prepared, measured)?;
    Ok(RoundRecord {
        round,
        prepared,
        alice_bit,
        eve: record,
        measured,
        decoded,
    })
}

/// Runs one round per bit, sequentially, with 1-based round indices. With
/// `stop_on_intrusion`, the first intrusion round is recorded and the rest
/// of the message is abandoned.
pub fn run_message(
    bits: &[u8],
    tap: &dyn ChannelTap,
    stop_on_intrusion: bool,
    rng: &mut dyn RngCore,
) -> Result<Vec<RoundRecord>, ProtocolError> {
    let mut records = Vec::with_capacity(bits.len());
    for (i, bit) in bits.iter().enumerate() {
        let record = run_round(i as u64 + 1, *bit, tap, rng)?;
        let intrusion = record.decoded == DecodeOutcome::Intrusion;
        records.push(record);
        if stop_on_intrusion && intrusion {
            break;
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{global_phase_equiv, make_bell, SubsystemLayout};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn encoding_op_maps_bits() {
        assert_eq!(EncodingOp::for_bit(0).unwrap(), EncodingOp::Identity);
        assert_eq!(EncodingOp::for_bit(1).unwrap(), EncodingOp::PhaseFlip);
        assert_eq!(EncodingOp::Identity.bit(), 0);
        assert_eq!(EncodingOp::PhaseFlip.bit(), 1);
        assert!(matches!(
            EncodingOp::for_bit(2),
            Err(ProtocolError::InvalidBit { bit: 2 })
        ));
    }

    #[test]
    fn preparation_is_a_fair_coin_over_the_plus_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100_000;
        let mut psi = 0u32;
        for _ in 0..n {
            let (label, state) = bob_prepare(&mut rng);
            match label {
                BellLabel::PsiPlus => psi += 1,
                BellLabel::PhiPlus => {}
                other => panic!("prepared {other}"),
            }
            if psi == 1 {
                let expect = make_bell_on(label, TRAVEL, HOME).unwrap();
                assert_eq!(state.amplitudes(), expect.amplitudes());
            }
        }
        let sigma = (0.25 * n as f64).sqrt();
        let dev = (psi as f64 - 0.5 * n as f64).abs();
        assert!(dev <= 3.0 * sigma, "PsiPlus count off by {dev}");
    }

    #[test]
    fn encoding_flips_within_the_family() {
        let psi = make_bell_on(BellLabel::PsiPlus, TRAVEL, HOME).unwrap();
        let encoded = alice_encode(1, &psi).unwrap();
        let minus = make_bell_on(BellLabel::PsiMinus, TRAVEL, HOME).unwrap();
        assert!(global_phase_equiv(&encoded, &minus).unwrap());

        let untouched = alice_encode(0, &psi).unwrap();
        assert_eq!(untouched.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn encoding_reaches_through_an_attached_ancilla() {
        // |1>_travel (x) |0>_home (x) |1>_ancilla picks up a sign under the
        // phase flip; the |0>_travel component would not.
        let layout = SubsystemLayout::new(vec![
            (travel_id(), 2),
            (home_id(), 2),
            (ancilla_id(), 2),
        ])
        .unwrap();
        let s = StateVector::basis_state(layout, 0b101).unwrap();
        let encoded = alice_encode(1, &s).unwrap();
        assert_eq!(encoded.amplitudes()[0b101], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn encoding_requires_a_travel_subsystem() {
        let s = make_bell(BellLabel::PsiPlus); // ids A, B
        assert!(alice_encode(1, &s).is_err());
        assert!(matches!(
            alice_encode(7, &s),
            Err(ProtocolError::InvalidBit { bit: 7 })
        ));
    }

    #[test]
    fn decode_table_is_total_over_valid_preparations() {
        use BellLabel::*;
        let table = [
            (PsiPlus, PsiPlus, DecodeOutcome::Bit(0)),
            (PsiPlus, PsiMinus, DecodeOutcome::Bit(1)),
            (PsiPlus, PhiPlus, DecodeOutcome::Intrusion),
            (PsiPlus, PhiMinus, DecodeOutcome::Intrusion),
            (PhiPlus, PhiPlus, DecodeOutcome::Bit(0)),
            (PhiPlus, PhiMinus, DecodeOutcome::Bit(1)),
            (PhiPlus, PsiPlus, DecodeOutcome::Intrusion),
            (PhiPlus, PsiMinus, DecodeOutcome::Intrusion),
        ];
        for (prepared, measured, expect) in table {
            assert_eq!(bob_decode(prepared, measured).unwrap(), expect);
        }
        for bad in [PsiMinus, PhiMinus] {
            assert!(matches!(
                bob_decode(bad, PsiPlus),
                Err(ProtocolError::InvalidPreparation { .. })
            ));
        }
    }

    #[test]
    fn untapped_rounds_decode_the_sent_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for bit in [0u8, 1] {
            for round in 0..100 {
                let r = run_round(round, bit, &NoTap, &mut rng).unwrap();
                assert_eq!(r.decoded, DecodeOutcome::Bit(bit));
                assert_eq!(r.alice_bit, bit);
                assert!(r.prepared.same_family(r.measured));
                let flipped = r.measured != r.prepared;
                assert_eq!(flipped, bit == 1);
                assert_eq!(r.eve, EveRecord::none());
            }
        }
    }

    #[test]
    fn untapped_round_consumes_exactly_two_draws() {
        let mut rng_a = ChaCha8Rng::seed_from_u64(23);
        let mut rng_b = ChaCha8Rng::seed_from_u64(23);
        run_round(1, 1, &NoTap, &mut rng_a).unwrap();
        let _: f64 = rng_b.random();
        let _: f64 = rng_b.random();
        assert_eq!(rng_a.random::<u64>(), rng_b.random::<u64>());
    }

    #[test]
    fn message_round_trip_without_eavesdropper() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let bits: Vec<u8> = (0..1000).map(|_| rng.random::<bool>() as u8).collect();
        let records = run_message(&bits, &NoTap, false, &mut rng).unwrap();
        assert_eq!(records.len(), bits.len());
        for (record, bit) in records.iter().zip(&bits) {
            assert_eq!(record.decoded, DecodeOutcome::Bit(*bit));
        }
        assert_eq!(records.last().unwrap().round, 1000);

        assert!(run_message(&[], &NoTap, true, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn transcripts_are_seed_deterministic() {
        let serialize = |records: &[RoundRecord]| {
            records
                .iter()
                .map(|r| serde_json::to_string(r).unwrap())
                .collect::<Vec<_>>()
                .join("\n")
        };
        let bits = [1u8, 0, 1, 1, 0, 0, 1, 0];
        let mut rng_a = ChaCha8Rng::seed_from_u64(4242);
        let mut rng_b = ChaCha8Rng::seed_from_u64(4242);
        let a = serialize(&run_message(&bits, &NoTap, false, &mut rng_a).unwrap());
        let b = serialize(&run_message(&bits, &NoTap, false, &mut rng_b).unwrap());
        assert_eq!(a, b);
    }

    /// Flips the travel qubit on the forward leg: a blatant attack that
    /// moves every prepared state into the wrong family.
    struct BitFlipTap;

    impl ChannelTap for BitFlipTap {
        fn on_forward(
            &self,
            view: &mut ChannelView,
            _rng: &mut dyn RngCore,
        ) -> Result<EveRecord, ProtocolError> {
            let x = UnitaryOp::new(
                SubsystemLayout::single(TRAVEL, 2).unwrap(),
                vec![
                    Complex64::new(0.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ],
            )
            .unwrap();
            view.apply(&x, &[travel_id()])?;
            let mut record = EveRecord::none();
            record.pre_encoding_action = "bit_flip".to_owned();
            Ok(record)
        }
    }

    #[test]
    fn stop_on_intrusion_halts_at_the_first_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bits = [0u8; 50];
        let records = run_message(&bits, &BitFlipTap, true, &mut rng).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].decoded, DecodeOutcome::Intrusion);

        let records = run_message(&bits, &BitFlipTap, false, &mut rng).unwrap();
        assert_eq!(records.len(), 50);
        assert!(records
            .iter()
            .all(|r| r.decoded == DecodeOutcome::Intrusion));
    }

    struct HomeGrabTap;

    impl ChannelTap for HomeGrabTap {
        fn on_forward(
            &self,
            view: &mut ChannelView,
            _rng: &mut dyn RngCore,
        ) -> Result<EveRecord, ProtocolError> {
            let z = UnitaryOp::sigma_z(home_id());
            view.apply(&z, &[home_id()])?;
            Ok(EveRecord::none())
        }
    }

    struct HomeMeasureTap;

    impl ChannelTap for HomeMeasureTap {
        fn on_return(
            &self,
            view: &mut ChannelView,
            _record: EveRecord,
            rng: &mut dyn RngCore,
        ) -> Result<EveRecord, ProtocolError> {
            let pair = SubsystemLayout::new(vec![(travel_id(), 2), (home_id(), 2)]).unwrap();
            let basis: Vec<StateVector> = (0..4)
                .map(|k| StateVector::basis_state(pair.clone(), k).unwrap())
                .collect();
            let outcome = view.measure(&[travel_id(), home_id()], &basis, rng)?;
            let mut record = EveRecord::none();
            record.measurement_outcome = Some(outcome);
            Ok(record)
        }
    }

    #[test]
    fn the_channel_rejects_home_qubit_access() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(matches!(
            run_round(1, 0, &HomeGrabTap, &mut rng),
            Err(ProtocolError::HomeQubitAccess)
        ));
        assert!(matches!(
            run_round(1, 0, &HomeMeasureTap, &mut rng),
            Err(ProtocolError::HomeQubitAccess)
        ));

        let mut state = make_bell_on(BellLabel::PsiPlus, TRAVEL, HOME).unwrap();
        let mut view = ChannelView::new(&mut state);
        let home_clone = StateVector::basis_state(
            SubsystemLayout::single(HOME, 2).unwrap(),
            0,
        )
        .unwrap();
        assert!(matches!(
            view.attach(&home_clone),
            Err(ProtocolError::HomeQubitAccess)
        ));
    }

    #[test]
    fn taps_can_attach_and_act_on_their_own_ancilla() {
        let mut state = make_bell_on(BellLabel::PsiPlus, TRAVEL, HOME).unwrap();
        let mut view = ChannelView::new(&mut state);
        let ancilla = StateVector::basis_state(
            SubsystemLayout::single(ANCILLA, 4).unwrap(),
            0,
        )
        .unwrap();
        view.attach(&ancilla).unwrap();
        assert!(view.has_subsystem(&ancilla_id()));
        assert_eq!(view.state().dim(), 16);
        // double attach collides on the id
        assert!(view.attach(&ancilla).is_err());
    }

    #[test]
    fn round_records_serialize_with_the_documented_schema() {
        let record = RoundRecord {
            round: 3,
            prepared: BellLabel::PhiPlus,
            alice_bit: 1,
            eve: EveRecord::none(),
            measured: BellLabel::PhiMinus,
            decoded: DecodeOutcome::Bit(1),
        };
        let line = serde_json::to_string(&record).unwrap();
        let keys = [
            "\"round\":",
            "\"prepared\":",
            "\"alice_bit\":",
            "\"eve\":",
            "\"measured\":",
            "\"decoded\":",
        ];
        let mut last = 0;
        for key in keys {
            let at = line.find(key).unwrap_or_else(|| panic!("missing {key}"));
            assert!(at >= last, "{key} out of order in {line}");
            last = at;
        }
        assert!(line.contains("\"prepared\":\"PhiPlus\""));
        assert!(line.contains("\"measured\":\"PhiMinus\""));
        assert!(line.contains("\"decoded\":1"));

        let intrusion = RoundRecord {
            decoded: DecodeOutcome::Intrusion,
            ..record
        };
        assert!(serde_json::to_string(&intrusion)
            .unwrap()
            .contains("\"decoded\":\"Intrusion\""));
    }
}
