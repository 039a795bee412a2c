//! Text over the protocol: encode a string as bits (most significant bit
//! of each byte first), run one round per bit, and read the message back
//! from Bob's decoded outcomes. Then the same channel under attack in
//! stop mode, which abandons the message at the first intrusion.

use qsdc::adversary::Strategy;
use qsdc::cli::{bits_to_message, message_to_bits};
use qsdc::protocol::{run_message, DecodeOutcome, NoTap};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let text = "ping-pong";
    let bits = message_to_bits(text);
    println!("Sending {:?} as {} bits over an untapped channel.\n", text, bits.len());

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let records = run_message(&bits, &NoTap, false, &mut rng).unwrap();
    for record in records.iter().take(4) {
        println!(
            "  round {:>2}  prepared {:<8} encoded {}  measured {:<8} decoded {:?}",
            record.round,
            record.prepared.as_str(),
            record.alice_bit,
            record.measured.as_str(),
            record.decoded,
        );
    }
    println!("  ... {} more rounds\n", records.len() - 4);

    let decoded: Vec<u8> = records
        .iter()
        .map(|r| match r.decoded {
            DecodeOutcome::Bit(bit) => bit,
            DecodeOutcome::Intrusion => unreachable!("untapped channel never intrudes"),
        })
        .collect();
    println!("Bob reads back: {:?}\n", bits_to_message(&decoded).unwrap());

    // Now with an eavesdropper measuring every round. Each round she is
    // caught with probability 1/2, so the message dies fast.
    let tap = Strategy::Ancilla(
        qsdc::adversary::AncillaAttackConfig::orthonormal(0.5).unwrap(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let records = run_message(&bits, &tap, true, &mut rng).unwrap();
    let last = records.last().unwrap();
    println!(
        "Under a full-information attack in stop mode, the run ends at\n\
         round {} of {}: prepared {}, measured {} ({:?}).",
        last.round,
        bits.len(),
        last.prepared.as_str(),
        last.measured.as_str(),
        last.decoded,
    );
    println!("The {} bits before the stop are a partial message at best.", records.len() - 1);
}
