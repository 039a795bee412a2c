//! The four shared states and the algebra the protocol leans on:
//! orthonormality (so Bob's measurement distinguishes them perfectly)
//! and maximally mixed halves (so neither qubit alone carries anything).

use qsdc::quantum::{density_of, make_bell, partial_trace, BellLabel, SubsystemId};

fn main() {
    println!("The four Bell pairs over qubits (A, B), A most significant:\n");
    for label in BellLabel::all() {
        let state = make_bell(label);
        let amps: Vec<String> = state
            .amplitudes()
            .iter()
            .map(|a| format!("{:+.4}", a.re))
            .collect();
        println!("  {:<8}  [{}]", label.as_str(), amps.join(", "));
    }

    println!("\nPairwise inner products (rows and columns in the fixed order):\n");
    let states: Vec<_> = BellLabel::all().into_iter().map(make_bell).collect();
    for row in &states {
        let cells: Vec<String> = states
            .iter()
            .map(|col| format!("{:+.1}", row.inner(col).unwrap().re))
            .collect();
        println!("  {}", cells.join("  "));
    }

    println!("\nEach half alone is the maximally mixed qubit. Tracing out B:\n");
    let psi_plus = density_of(&make_bell(BellLabel::PsiPlus)).unwrap();
    let reduced = partial_trace(&psi_plus, &[SubsystemId::new("A")]).unwrap();
    for row in 0..2 {
        let cells: Vec<String> = (0..2)
            .map(|col| format!("{:+.4}", reduced.entry(row, col).re))
            .collect();
        println!("  [{}]", cells.join(", "));
    }
    println!(
        "\nSo an eavesdropper holding only the travel qubit sees identical\n\
         statistics no matter which pair was prepared, before any encoding."
    );
}
