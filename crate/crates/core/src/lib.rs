//! Synthesis and exact simulation of interferometric Fourier-transform
//! circuits acting on orbital-angular-momentum modes.

pub mod analysis;
pub mod blocks;
pub mod cli;
pub mod elements;
pub mod error;
pub mod modespace;
pub mod netlist;
pub mod synthesis;

pub use analysis::{
    dft_matrix, dft_oracle, loss_sweep, normalized_fidelity, operator_of, phase_aligned_distance,
    verify_scheme, FidelityCurve, VerificationReport,
};
pub use elements::{Direction, Element, Kind, LossModel};
pub use error::{Error, Result};
pub use modespace::{apply, Mode, ModeBasis, ModeOperator, Pol, PureState};
pub use netlist::{Netlist, NetlistDocument};
pub use synthesis::{build_scheme, choose_factorization, Scheme, SchemeConfig, Variant};
