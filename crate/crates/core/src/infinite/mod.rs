//! Truncated and lazily grown versions of the incipient infinite cluster
//! and the invasion percolation cluster, plus the Poisson lower envelope.

pub mod envelope;
pub mod iic;
pub mod ipc;

pub use envelope::{sample_envelope, EnvelopeProcess};
pub use iic::{build_iic, Branch, IICInstance, LazyIic};
pub use ipc::{
    backbone_projection, envelope_statistics_until_depth, estimate_backbone, invade, invade_until_depth,
    structural_dual, structural_ipc_branch_sizes, structural_ipc_branches, structural_parameter, BackboneEstimate,
    IPCInstance,
};
