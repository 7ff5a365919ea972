use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{ConvergenceRecord, ExactReference, FragmentState, RealizationSummary};
use crate::thermal::{evaluate_member, jobs, Aggregate, Backend, MemberFailure, MemberJob, MemberObservables, Replay};

use super::config::{hash_text, BackendSelection, Experiment, ExperimentConfig, MatrixFormat, RpwMode};
use super::output::{
    aggregate_bytes, convergence_csv, distribution_bytes, fragment_bytes, members_csv, read_aggregate,
    read_fragments, write_atomic, MemberRow,
};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
const CHECKPOINT_DIR: &str = "checkpoints";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `ensemble.workers`.
    pub workers: Option<usize>,
    /// Stop after this many newly completed members, as if killed.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
    /// Finished, but some members failed.
    Partial,
    /// Stopped before every member ran; resumable.
    Interrupted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberState {
    Pending,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberStatus {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub state: MemberState,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(default)]
    pub instability: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStatus {
    pub backend: String,
    pub members: Vec<MemberStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub started: String,
    pub updated: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub finished: Option<String>,
    pub status: RunStatus,
    pub master_seed: u64,
    pub workers: usize,
    pub phases: Vec<PhaseStatus>,
    /// Every file written by the run other than the manifest, relative to
    /// the output directory.
    pub files: BTreeSet<String>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn any_instability(&self) -> bool {
        self.phases.iter().flat_map(|p| &p.members).any(|m| m.instability)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub directory: PathBuf,
    pub manifest: RunManifest,
}

impl RunOutcome {
    /// 0 complete, 3 a member diverged, 4 other failures or interruption.
    pub fn exit_code(&self) -> i32 {
        match self.manifest.status {
            RunStatus::Complete => 0,
            _ if self.manifest.any_instability() => 3,
            _ => 4,
        }
    }
}

/// Per-member checkpoint. Exact members carry no slices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MemberCheckpoint {
    index: usize,
    seed: Option<u64>,
    weight: f64,
    #[serde(default)]
    error: Option<String>,
    #[serde(default)]
    instability: bool,
    probability: Option<f64>,
    energy_weight: Option<f64>,
    kinetic_energy: Option<f64>,
    #[serde(default)]
    theta0: Vec<f64>,
    #[serde(default)]
    angular: Vec<f64>,
}

struct Phase {
    backend: Backend,
    jobs: Vec<MemberJob>,
    aggregate: Aggregate,
    records: Vec<MemberCheckpoint>,
    /// Final states of exact members, kept for replay or dumps.
    fragments: Vec<Option<FragmentState>>,
}

impl Phase {
    fn done(&self) -> usize {
        self.records.len()
    }

    fn complete(&self) -> bool {
        self.records.len() == self.jobs.len()
    }
}

type MemberResult = std::result::Result<(FragmentState, MemberObservables), MemberFailure>;

/// Starts a fresh run in the configured output directory.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome> {
    let dir = config.output.directory.clone();
    if dir.join(MANIFEST_FILE).exists() {
        return Err(Error::Config(format!(
            "{} already holds a run; resume it or choose another directory",
            dir.display()
        )));
    }
    fs::create_dir_all(dir.join(CHECKPOINT_DIR)).map_err(|e| Error::io(&dir, e))?;
    let experiment = Experiment::build(config)?;
    let text = config.to_toml();
    write_atomic(&dir.join(CONFIG_FILE), text.as_bytes())?;
    let now = timestamp();
    let mut manifest = RunManifest {
        config_hash: hash_text(&text),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started: now.clone(),
        updated: now,
        finished: None,
        status: RunStatus::Running,
        master_seed: config.ensemble.seed,
        workers: options.workers.unwrap_or(config.ensemble.workers),
        phases: Vec::new(),
        files: BTreeSet::from([CONFIG_FILE.to_string()]),
    };
    let phases = new_phases(&experiment, &mut manifest);
    execute(&experiment, &dir, manifest, phases, options)
}

/// Continues the run described by `manifest_path` from its checkpoints.
pub fn resume(manifest_path: impl AsRef<Path>, options: &RunOptions) -> Result<RunOutcome> {
    let manifest_path = manifest_path.as_ref();
    let mut manifest = RunManifest::load(manifest_path)?;
    let dir = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let config_path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&config_path).map_err(|e| Error::io(&config_path, e))?;
    if hash_text(&text) != manifest.config_hash {
        return Err(Error::Config(format!(
            "{} does not match the manifest's config hash",
            config_path.display()
        )));
    }
    let mut config = ExperimentConfig::parse(&text)?;
    config.output.directory = dir.clone();
    let experiment = Experiment::build(&config)?;
    if let Some(w) = options.workers {
        manifest.workers = w;
    }
    manifest.status = RunStatus::Running;
    manifest.finished = None;
    let fresh = new_phases(&experiment, &mut RunManifest { phases: Vec::new(), ..manifest.clone() });
    let mut phases = Vec::with_capacity(fresh.len());
    for mut phase in fresh {
        let tag = phase.backend.tag();
        let agg_path = dir.join(aggregate_file(tag));
        if agg_path.exists() {
            let (done, aggregate) = read_aggregate(&agg_path)?;
            if done > phase.jobs.len() {
                return Err(Error::Config(format!("{} covers more members than the run has", agg_path.display())));
            }
            phase.aggregate = aggregate;
            for i in 0..done {
                let path = dir.join(member_file(tag, i));
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let record: MemberCheckpoint = serde_json::from_str(&text).map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                phase.records.push(record);
                let frag = dir.join(fragment_file(tag, i));
                phase.fragments.push(if frag.exists() { Some(read_fragments(&frag)?) } else { None });
            }
        }
        phases.push(phase);
    }
    info!(
        "resuming {}: {}",
        dir.display(),
        phases
            .iter()
            .map(|p| format!("{} {}/{}", p.backend.tag(), p.done(), p.jobs.len()))
            .collect::<Vec<_>>()
            .join(", ")
    );
    execute(&experiment, &dir, manifest, phases, options)
}

fn new_phases(exp: &Experiment, manifest: &mut RunManifest) -> Vec<Phase> {
    let cfg = &exp.config.ensemble;
    let phases: Vec<Phase> = cfg
        .backend
        .backends()
        .into_iter()
        .map(|backend| Phase {
            backend,
            jobs: jobs(backend, &exp.ensemble, cfg.realizations, cfg.seed),
            aggregate: Aggregate::new(exp.bins.clone(), exp.system.channels().j_max()),
            records: Vec::new(),
            fragments: Vec::new(),
        })
        .collect();
    manifest.phases = phases
        .iter()
        .map(|p| PhaseStatus {
            backend: p.backend.tag().to_string(),
            members: p
                .jobs
                .iter()
                .map(|j| MemberStatus {
                    index: j.index,
                    seed: j.seed(),
                    state: MemberState::Pending,
                    error: None,
                    instability: false,
                })
                .collect(),
        })
        .collect();
    phases
}

fn aggregate_file(tag: &str) -> String {
    format!("{CHECKPOINT_DIR}/aggregate-{tag}.bin")
}

fn member_file(tag: &str, i: usize) -> String {
    format!("{CHECKPOINT_DIR}/{tag}-{i:06}.json")
}

fn fragment_file(tag: &str, i: usize) -> String {
    format!("{CHECKPOINT_DIR}/{tag}-{i:06}.frag")
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

struct Context<'a> {
    exp: &'a Experiment,
    dir: &'a Path,
    workers: usize,
}

impl Context<'_> {
    fn write(&self, manifest: &mut RunManifest, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.dir.join(rel), bytes)?;
        manifest.files.insert(rel.to_string());
        Ok(())
    }

    fn save_manifest(&self, manifest: &mut RunManifest) -> Result<()> {
        manifest.updated = timestamp();
        let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
        write_atomic(&self.dir.join(MANIFEST_FILE), text.as_bytes())
    }
}

fn execute(
    exp: &Experiment,
    dir: &Path,
    mut manifest: RunManifest,
    mut phases: Vec<Phase>,
    options: &RunOptions,
) -> Result<RunOutcome> {
    let ctx = Context {
        exp,
        dir,
        workers: manifest.workers.max(1),
    };
    for (p, phase) in phases.iter().enumerate() {
        for r in &phase.records {
            manifest.phases[p].members[r.index] = member_status(r);
        }
    }
    ctx.save_manifest(&mut manifest)?;

    let mut budget = options.stop_after;
    let replay = exp.config.ensemble.rpw_mode == RpwMode::Replay;
    let mut reference: Option<ExactReference> = None;
    let mut interrupted = false;
    for p in 0..phases.len() {
        let backend = phases[p].backend;
        if backend == Backend::Rpw && exp.config.ensemble.backend == BackendSelection::Both {
            reference = exact_reference(exp, &phases[0]);
        }
        let keep = exp.config.output.save_states || (replay && backend == Backend::Exact);
        let replay_states: Option<Vec<FragmentState>> = if backend == Backend::Rpw && replay {
            phases[0].fragments.iter().cloned().collect()
        } else {
            None
        };
        let evaluate = |job: &MemberJob| -> MemberResult {
            if backend == Backend::Rpw && replay {
                let states = replay_states.as_ref().ok_or_else(|| MemberFailure {
                    message: "replay needs every exact member's final state".into(),
                    instability: false,
                })?;
                Ok(Replay::new(&exp.ensemble, states)?.evaluate(job, &exp.bins)?)
            } else {
                Ok(evaluate_member(&exp.system, &exp.propagation, &exp.ensemble, job, &exp.bins)?)
            }
        };
        let phase = &mut phases[p];
        if !phase.complete() {
            info!("{}: members {}..{}", backend.tag(), phase.done(), phase.jobs.len());
            interrupted = run_phase(&ctx, p, phase, &evaluate, keep, reference.as_ref(), &mut manifest, &mut budget)?;
        }
        if interrupted {
            break;
        }
    }

    if interrupted {
        manifest.status = RunStatus::Interrupted;
        ctx.save_manifest(&mut manifest)?;
        return Ok(RunOutcome {
            directory: dir.to_path_buf(),
            manifest,
        });
    }

    emit_outputs(&ctx, &phases, reference.as_ref(), &mut manifest)?;
    let failed = phases.iter().flat_map(|p| &p.records).any(|r| r.error.is_some());
    manifest.status = if failed { RunStatus::Partial } else { RunStatus::Complete };
    manifest.finished = Some(timestamp());
    ctx.save_manifest(&mut manifest)?;
    Ok(RunOutcome {
        directory: dir.to_path_buf(),
        manifest,
    })
}

/// Runs the remaining members of one phase. Workers pull members in index
/// order; the coordinator folds results strictly in index order so the
/// sums do not depend on scheduling. Returns true when stopped early.
#[allow(clippy::too_many_arguments)]
fn run_phase(
    ctx: &Context,
    p: usize,
    phase: &mut Phase,
    evaluate: &(dyn Fn(&MemberJob) -> MemberResult + Sync),
    keep_states: bool,
    reference: Option<&ExactReference>,
    manifest: &mut RunManifest,
    budget: &mut Option<usize>,
) -> Result<bool> {
    let jobs = phase.jobs.clone();
    let next = AtomicUsize::new(phase.done());
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<(usize, MemberResult)>();
    let mut interrupted = false;
    let mut failure: Option<Error> = None;

    std::thread::scope(|scope| {
        for _ in 0..ctx.workers {
            let tx = tx.clone();
            let (next, stop, jobs) = (&next, &stop, &jobs);
            scope.spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(job) = jobs.get(i) else { break };
                    if tx.send((i, evaluate(job))).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, MemberResult> = BTreeMap::new();
        'receive: for (i, result) in rx.iter() {
            pending.insert(i, result);
            while let Some(result) = pending.remove(&phase.done()) {
                if let Err(e) = fold(ctx, p, phase, result, keep_states, reference, manifest) {
                    failure = Some(e);
                    stop.store(true, Ordering::Relaxed);
                    break 'receive;
                }
                if let Some(left) = budget.as_mut() {
                    *left = left.saturating_sub(1);
                    if *left == 0 && !phase.complete() {
                        interrupted = true;
                        stop.store(true, Ordering::Relaxed);
                        break 'receive;
                    }
                }
            }
        }
        // dropping the receiver makes busy workers exit after their member
        drop(rx);
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(interrupted),
    }
}

fn fold(
    ctx: &Context,
    p: usize,
    phase: &mut Phase,
    result: MemberResult,
    keep_states: bool,
    reference: Option<&ExactReference>,
    manifest: &mut RunManifest,
) -> Result<()> {
    let i = phase.done();
    let job = phase.jobs[i];
    let tag = phase.backend.tag();
    let mut record = MemberCheckpoint {
        index: i,
        seed: job.seed(),
        weight: job.weight,
        error: None,
        instability: false,
        probability: None,
        energy_weight: None,
        kinetic_energy: None,
        theta0: Vec::new(),
        angular: Vec::new(),
    };
    let mut state = None;
    match result {
        Ok((fragments, obs)) => {
            phase.aggregate.add(job.weight, &obs)?;
            record.probability = Some(obs.probability);
            record.energy_weight = Some(obs.energy_weight);
            record.kinetic_energy = obs.kinetic_energy;
            if phase.backend != Backend::Exact {
                record.theta0 = obs.density.theta0_slice();
                if let Some(r) = reference {
                    record.angular = obs.density.angular_slice(r.p_mp_index, &ctx.exp.polar);
                }
            }
            if keep_states {
                ctx.write(manifest, &fragment_file(tag, i), &fragment_bytes(&fragments))?;
            }
            state = Some(fragments);
        }
        Err(f) => {
            warn!("{tag} member {i} failed: {}", f.message);
            record.error = Some(f.message);
            record.instability = f.instability;
        }
    }
    let json = serde_json::to_string(&record).expect("record serializes");
    ctx.write(manifest, &member_file(tag, i), json.as_bytes())?;
    manifest.phases[p].members[i] = member_status(&record);
    phase.records.push(record);
    phase.fragments.push(if phase.backend == Backend::Exact { state } else { None });
    ctx.write(manifest, &aggregate_file(tag), &aggregate_bytes(phase.done(), &phase.aggregate))?;
    ctx.save_manifest(manifest)?;
    info!("{tag} member {}/{} folded", phase.done(), phase.jobs.len());
    Ok(())
}

fn member_status(r: &MemberCheckpoint) -> MemberStatus {
    MemberStatus {
        index: r.index,
        seed: r.seed,
        state: if r.error.is_some() {
            MemberState::Failed
        } else {
            MemberState::Done
        },
        error: r.error.clone(),
        instability: r.instability,
    }
}

fn exact_reference(exp: &Experiment, exact: &Phase) -> Option<ExactReference> {
    let agg = &exact.aggregate;
    let ek = agg.kinetic_energy()?;
    match ExactReference::new(agg.probability, ek, &agg.density, &exp.polar) {
        Ok(r) => Some(r),
        Err(e) => {
            warn!("no exact reference: {e}");
            None
        }
    }
}

#[derive(Debug, Serialize)]
struct BackendSummary {
    backend: &'static str,
    members: usize,
    failed: usize,
    probability: f64,
    kinetic_energy_hartree: Option<f64>,
    kinetic_energy_ev: Option<f64>,
    most_probable_momentum: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Summary {
    temperature_k: f64,
    initial_j_max: u32,
    initial_states: usize,
    partition_function: f64,
    pruned_mass: f64,
    backends: Vec<BackendSummary>,
}

/// Writes the per-member tables, distributions, convergence record and
/// summary from the folded phases.
fn emit_outputs(
    ctx: &Context,
    phases: &[Phase],
    reference: Option<&ExactReference>,
    manifest: &mut RunManifest,
) -> Result<()> {
    let exp = ctx.exp;
    let out = &exp.config.output;
    let mut backends = Vec::new();
    for phase in phases {
        let tag = phase.backend.tag();
        let rows: Vec<MemberRow> = phase
            .records
            .iter()
            .map(|r| MemberRow {
                k: r.index,
                seed: r.seed,
                weight: r.weight,
                probability: r.probability,
                kinetic_energy: r.kinetic_energy,
                status: r.error.clone().map(|e| format!("failed: {e}")).unwrap_or_else(|| "ok".into()),
            })
            .collect();
        ctx.write(manifest, &format!("members-{tag}.csv"), members_csv(&rows).as_bytes())?;
        let distribution = phase.aggregate.density.distribution(&exp.polar);
        if out.distribution {
            let ext = match out.distribution_format {
                MatrixFormat::Text => "txt",
                MatrixFormat::Binary => "bin",
            };
            ctx.write(
                manifest,
                &format!("distribution-{tag}.{ext}"),
                &distribution_bytes(&distribution, out.distribution_format),
            )?;
        }
        let ek = phase.aggregate.kinetic_energy();
        backends.push(BackendSummary {
            backend: tag,
            members: phase.records.len(),
            failed: phase.records.iter().filter(|r| r.error.is_some()).count(),
            probability: phase.aggregate.probability,
            kinetic_energy_hartree: ek,
            kinetic_energy_ev: ek.map(|e| e * crate::units::HARTREE_IN_EV),
            most_probable_momentum: distribution
                .most_probable_index()
                .ok()
                .map(|k| distribution.p_centers[k]),
        });
    }

    if let (Some(exact), Some(rpw)) = (reference, phases.iter().find(|p| p.backend == Backend::Rpw)) {
        let summaries: Vec<RealizationSummary> = rpw
            .records
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| RealizationSummary {
                probability: r.probability.unwrap_or(0.0),
                energy_weight: r.energy_weight.unwrap_or(0.0),
                theta0: r.theta0.clone(),
                angular: r.angular.clone(),
            })
            .collect();
        let ladder: Vec<usize> = exp
            .config
            .k_ladder()
            .into_iter()
            .filter(|&k| k <= summaries.len())
            .collect();
        let record = ConvergenceRecord::build(&summaries, exact, &ladder)?;
        ctx.write(manifest, CONVERGENCE_FILE, convergence_csv(&record).as_bytes())?;
    }

    let spec = exp.ensemble.spec();
    let summary = Summary {
        temperature_k: spec.temperature_k,
        initial_j_max: spec.j_max_initial,
        initial_states: exp.ensemble.len(),
        partition_function: spec.partition,
        pruned_mass: exp.ensemble.pruned_mass(),
        backends,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    ctx.write(manifest, SUMMARY_FILE, json.as_bytes())
}
