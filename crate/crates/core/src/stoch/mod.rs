//! Subordinators, Poisson trap fields, the `Psi_eps` transform and a lattice
//! surrogate for reflected Brownian motion.

mod lattice;
mod measure;
mod ppp;
mod psi;
mod subordinator;

pub(crate) use lattice::ReflectedWalker;
pub use lattice::{reflected_lattice_bm, LatticeReflectedPath};
pub use measure::{AtomicMeasure, SubordinatorPath};
pub use ppp::{
    sample_stable_ppp, stable_subordinator_marginal_check, stable_tail_rate, LaplaceCheck, TruncatedMeasure,
    IIC_INTENSITY,
};
pub use psi::{empirical_laplace, psi_epsilon};
pub use subordinator::{
    inverse_gaussian_laplace, mu_ipc, mu_ipc_interval_laplace, sample_inverse_gaussian, sample_inverse_gaussian_path,
    InverseGaussianPath, IPC_DELTA,
};
