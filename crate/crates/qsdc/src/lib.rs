//! Exact simulator of a two-qubit ping-pong protocol for deterministic
//! secure communication.
//!
//! Alice and Bob share Bell pairs: Bob keeps the home qubit and bounces
//! the travel qubit to Alice, who encodes a bit by either leaving it
//! alone or applying a phase flip, and Bob reads the bit back out with a
//! Bell measurement. An eavesdropper on the travel channel can be given
//! an ancilla attack of tunable strength or a plain intercept-resend
//! attack, and the crate answers, both exactly and by sampled
//! experiment, what she learns and how often she is caught.
//!
//! State vectors are evolved exactly (no density-matrix approximations,
//! no truncation beyond pruning zero-probability branches), so sampled
//! statistics can always be checked against closed-form per-round
//! distributions from [`analysis::exact_round_distribution`].
//!
//! Runnable walkthroughs, one per capability, live under `examples/`:
//!
//! ```text
//! cargo run --example bell_pairs               # the shared states and their algebra
//! cargo run --example encode_and_decode        # one honest round, step by step
//! cargo run --example send_a_message           # text over the protocol, with transcript
//! cargo run --example full_information_attack  # the d = 1/2 ancilla attack, exact and sampled
//! cargo run --example intercept_resend         # measure-and-replace in both bases
//! cargo run --example detection_survival       # how fast undetected eavesdropping dies off
//! cargo run --example exact_vs_sampled         # Monte Carlo converging on the oracle
//! cargo run --example attack_sweep             # detection/survival table over a parameter grid
//! ```
//!
//! The same machinery is scriptable through the `qsdc` binary
//! (subcommands `run`, `sweep`, `analytic`, `verify`); see [`cli`].

pub mod adversary;
pub mod analysis;
pub mod cli;
pub mod protocol;
pub mod quantum;
pub mod verify;
