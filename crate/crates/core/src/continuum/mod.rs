//! Continuum trees and spatially subordinated Brownian motion: excursions,
//! reduced and line-breaking trees, branch masses, trap clocks and the SSBM
//! assemblers on the half-line and on metric skeletons.

mod clock;
mod excursion;
mod mass;
mod skeleton;
mod ssbm;

pub use clock::{
    crt_inverse_local_time_sampler, ClockSubordinator, CrtFactory, CrtInverseLocalTime, IdentityClock, IdentityFactory,
    SubordinatorFactory, TrapSize, TreeFamily,
};
pub use excursion::{crt_pseudometric, sample_excursion, ExcursionGrid};
pub use mass::{sample_branch_mass_measure, MassAtom, TreeMassMeasure};
pub use skeleton::{
    line_breaking, line_breaking_cuts, reduced_tree_at, reduced_tree_from_excursion, skeleton_from_reduced,
    MetricTreeSkeleton, SkeletonPoint,
};
pub use ssbm::{k_ssbm_simulate, ssbm_simulate, SSBMPath, SsbmSettings};
