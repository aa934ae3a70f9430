//! One module per subcommand. Each `run` resolves its effective
//! settings (flags over config over defaults), writes the manifest,
//! then computes and writes its CSV/SVG/JSON artifacts.

pub mod krylov;
pub mod levels;
pub mod phase;
pub mod qfi_evolve;
pub mod random_qfi;
pub mod scaling;
pub mod wigner;
