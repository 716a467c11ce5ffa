//! Executable protocols built on the decomposition: the general remote
//! POVM, the two-outcome filtering scenario, and the capability
//! experiments that pin the entanglement cost.

mod capability;
mod fig1;
mod remote;
mod report;

pub use capability::{capability_epr_experiment, capability_search};
pub use fig1::{
    fig1_protocol, fig1_sample_stats, fig1_sampled, Fig1Result, Fig1SampleStats, Fig1Shot,
    InputSign,
};
pub use remote::{
    compare_remote_vs_local, compile_remote_povm, run_remote_povm, RemoteBranch,
    RemotePovmProgram, RemoteRunResult, RemoteSampleStats,
};
pub use report::{povm_digest, BitCounts, CapabilityFigures, ProtocolReport};
