//! One honest round, step by step: Bob prepares a plus-family pair,
//! Alice applies identity or a phase flip to the travel qubit, and Bob's
//! Bell measurement reads the bit back out with certainty.

use qsdc::protocol::{alice_encode, bob_decode, EncodingOp, HOME, TRAVEL};
use qsdc::quantum::{bell_basis_on, make_bell_on, BellLabel};

fn main() {
    println!("Encoding table. Bob prepares, Alice encodes, the pair becomes:\n");
    let basis = bell_basis_on(TRAVEL, HOME).unwrap();
    for prepared in [BellLabel::PsiPlus, BellLabel::PhiPlus] {
        for bit in [0u8, 1u8] {
            let start = make_bell_on(prepared, TRAVEL, HOME).unwrap();
            let encoded = alice_encode(bit, &start).unwrap();
            // The encoded state is exactly one Bell state; find it.
            let landed = BellLabel::all()
                .into_iter()
                .find(|label| {
                    encoded.inner(&basis[label.index()]).unwrap().norm() > 0.5
                })
                .unwrap();
            println!(
                "  prepared {:<8} bit {}  ({:<9})  ->  measured {:<8}  decoded {:?}",
                prepared.as_str(),
                bit,
                format!("{:?}", EncodingOp::for_bit(bit).unwrap()),
                landed.as_str(),
                bob_decode(prepared, landed).unwrap(),
            );
        }
    }

    println!(
        "\nThe phase flip never moves a pair between the psi and phi families,\n\
         so any wrong-family outcome is an intrusion, not a bit:\n"
    );
    for prepared in [BellLabel::PsiPlus, BellLabel::PhiPlus] {
        for measured in BellLabel::all() {
            if !prepared.same_family(measured) {
                println!(
                    "  prepared {:<8} measured {:<8}  ->  {:?}",
                    prepared.as_str(),
                    measured.as_str(),
                    bob_decode(prepared, measured).unwrap(),
                );
            }
        }
    }
}
