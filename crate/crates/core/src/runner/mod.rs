//! Declarative experiments: a TOML file with explicit units is turned into
//! exact and random-phase ensemble runs on a worker pool, checkpointed after
//! every member and resumable from the manifest.
//!
//! Output directory layout:
//!
//! | file | content |
//! |---|---|
//! | `config.toml` | the canonical configuration; its SHA-256 is in the manifest |
//! | `manifest.json` | status, seeds, timestamps, per-member status, file list |
//! | `summary.json` | ensemble totals per back-end |
//! | `members-<backend>.csv` | `k,seed,weight,P,Ek,status` per member |
//! | `distribution-<backend>.{txt,bin}` | `𝒟(P, θ)` with bin edges |
//! | `convergence.csv` | RPW errors against the exact result along the K ladder |
//! | `checkpoints/` | per-member records and running sums |

mod config;
mod execute;
mod output;

pub use config::{
    load_config, AutoKeyword, BackendSelection, CurveConfig, DipoleConfig, EnsembleConfig, Experiment,
    ExperimentConfig, GridConfig, JMaxSetting, MatrixFormat, OutputConfig, PropagationConfig, PulseConfig,
    RotationConfig, RpwMode, SystemConfig, TableSource, ThermalConfig,
};
pub use execute::{
    resume, run, MemberState, MemberStatus, PhaseStatus, RunManifest, RunOptions, RunOutcome, RunStatus,
    CONFIG_FILE, CONVERGENCE_FILE, MANIFEST_FILE, SUMMARY_FILE,
};
pub use output::{
    convergence_csv, distribution_bytes, members_csv, read_distribution, MemberRow, CONVERGENCE_HEADER,
    MEMBERS_HEADER,
};
