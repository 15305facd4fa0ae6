//! Simulation laboratory for collision-sampling oracles.

pub mod adversary;
pub mod attacks;
pub mod circuit;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod pir;
pub mod protocol;
pub mod prp;
pub mod reconstruction;
pub mod sam;
pub mod seed;
pub mod stats;

pub use adversary::{eval_via, run_live, Adversary, Interrupt, LiveEnv, MonitorEnv, SamAccess};
pub use circuit::{is_extension, Circuit, CircuitBuilder, EvalTrace, Gate, OracleCall, Program, ProgramId, Wire};
pub use error::{Error, Result};
pub use oracle::{
    AdversaryHandle, DomainParam, NoOracle, OracleAccess, OracleError, OracleName, PermutationOracle, TdpOracle, World,
};
pub use protocol::{CommitmentScheme, Decommitment, PartySpec, Protocol, Side};
pub use prp::{HashFamily, Prp};
pub use seed::Seed;
pub use sam::{sam_answer, SamOracle, SamQuery, TraceEntry, TraceRecord, TraceStats};
pub use pir::{ComParams, PirCom, PirSpec, Toeplitz};
pub use reconstruction::{Aux, PartialPermView};
