//! Workbench around the `dapsp` structures: trace files, generators,
//! online adversaries, replay with oracle verification, and a metrics
//! report format. The `dapsp` binary is a thin argument layer over
//! these modules.

pub mod adversary;
pub mod gen;
pub mod metrics;
pub mod run;
pub mod trace;

use dapsp::Dist;

/// Failure surfaced to the process exit code. Usage problems exit 2,
/// a verification mismatch exits 1.
#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error(transparent)]
    Trace(#[from] trace::TraceError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] dapsp::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed at clock {clock} for pair ({u}, {v}): got {}, want {}",
            fmt_dist(*.got), fmt_dist(*.want))]
    Verification {
        clock: u64,
        u: u32,
        v: u32,
        got: Dist,
        want: Dist,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification { .. } => 1,
            _ => 2,
        }
    }
}

/// Render a distance with [`dapsp::INF`] spelled out.
pub fn fmt_dist(d: Dist) -> String {
    if d == dapsp::INF {
        "inf".to_string()
    } else {
        d.to_string()
    }
}
