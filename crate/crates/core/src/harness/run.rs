use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{
    behavior_cloning, dagger_classification, run_aggrevate, run_nrpi, theorem1_check, theorem2_diagnostics,
    theorem3_check, Algorithm, IterationRecord, RunOutcome, RunSummary, RUN_SCHEMA,
};
use crate::envs::{Environment, ENV_VERSION};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, ExplorationKind};
use crate::learners::class::argmin_by;
use crate::mdp::{exact_state_distributions, policy_value, Policy, StateDistSchedule};
use crate::sampling::Exploration;

pub const SUMMARY_FILE: &str = "summary.json";
pub const ITERATIONS_FILE: &str = "iterations.jsonl";
pub const EXAMPLES_FILE: &str = "examples.jsonl";
pub const POLICIES_FILE: &str = "policies.json";
pub const TIMING_FILE: &str = "timing.json";

/// Class member that policy iteration is measured against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparatorInfo {
    pub index: usize,
    pub name: String,
    pub exact_j: f64,
}

/// Self-describing run summary: schema, environment version, full config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryDocument {
    pub schema: String,
    pub env_version: String,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub algorithm: Algorithm,
    pub learner: String,
    pub comparator: Option<ComparatorInfo>,
    pub summary: RunSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyDocument {
    /// Policies whose data was collected, in round order.
    pub played: Vec<Policy>,
    pub final_policy: Policy,
    /// Index into `played` followed by `final_policy`.
    pub best_index: usize,
    pub best: Policy,
}

/// One collected example tagged with its 1-based round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleLine<E> {
    pub round: usize,
    #[serde(flatten)]
    pub example: E,
}

/// Everything a run writes, before it touches the filesystem.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub summary: SummaryDocument,
    pub iterations: Vec<IterationRecord>,
    pub policies: PolicyDocument,
    /// Serialized `examples.jsonl` body.
    pub examples: String,
}

/// Exploration setup for policy iteration.
#[derive(Clone, Debug)]
pub struct NrpiSetup {
    pub exploration: Exploration,
    /// Exact per-step distribution the exploration draws states from.
    pub nu: StateDistSchedule,
    pub comparator: ComparatorInfo,
}

/// Hex SHA-256 of the canonical JSON form of a config (output paths dropped).
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(&cfg.canonical())?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn nrpi_setup(cfg: &ExperimentConfig, env: &Environment) -> Result<NrpiSetup> {
    let spec = &env.spec;
    let index = match &cfg.comparator {
        Some(name) => env
            .class
            .index_of(name)
            .ok_or_else(|| Error::Config(format!("field `comparator`: no class member named `{name}`")))?,
        None => {
            let js = env
                .class
                .members
                .iter()
                .map(|m| policy_value(spec, m))
                .collect::<Result<Vec<_>>>()?;
            argmin_by(js.len(), |i| js[i])
        }
    };
    let member = env.class.member(index);
    let comparator = ComparatorInfo {
        index,
        name: env.class.names[index].clone(),
        exact_j: policy_value(spec, member)?,
    };
    let (exploration, nu) = match cfg.exploration {
        ExplorationKind::ComparatorDistribution => {
            let nu = exact_state_distributions(spec, member)?;
            (Exploration::Schedule(nu.clone()), nu)
        }
        ExplorationKind::ComparatorRollout => (
            Exploration::Policy(member.clone()),
            exact_state_distributions(spec, member)?,
        ),
        ExplorationKind::ExpertDistribution => {
            let nu = exact_state_distributions(spec, &env.expert)?;
            (Exploration::Schedule(nu.clone()), nu)
        }
        ExplorationKind::UniformStates => {
            let nu = StateDistSchedule::constant(vec![1.0 / spec.num_states as f64; spec.num_states], spec.horizon)?;
            (Exploration::Schedule(nu.clone()), nu)
        }
    };
    Ok(NrpiSetup {
        exploration,
        nu,
        comparator,
    })
}

fn examples_body<E: Serialize + Clone>(outcome: &RunOutcome<E>) -> Result<String> {
    let mut out = String::new();
    for (i, batch) in outcome.dataset.rounds().iter().enumerate() {
        for e in batch {
            let line = ExampleLine {
                round: i + 1,
                example: e.clone(),
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
    }
    Ok(out)
}

fn package<E: Serialize + Clone>(
    cfg: &ExperimentConfig,
    outcome: RunOutcome<E>,
    comparator: Option<ComparatorInfo>,
) -> Result<RunArtifacts> {
    let examples = examples_body(&outcome)?;
    let RunOutcome {
        report,
        played,
        final_policy,
        best,
        ..
    } = outcome;
    Ok(RunArtifacts {
        summary: SummaryDocument {
            schema: RUN_SCHEMA.into(),
            env_version: ENV_VERSION.into(),
            config_hash: config_hash(cfg)?,
            config: cfg.canonical(),
            algorithm: report.algorithm,
            learner: report.learner,
            comparator,
            summary: report.summary.clone(),
        },
        iterations: report.iterations,
        policies: PolicyDocument {
            played,
            best_index: report.summary.best_index,
            final_policy,
            best,
        },
        examples,
    })
}

/// Runs the configured algorithm and, with the oracle on, the applicable
/// bound checks. Does no I/O.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunArtifacts> {
    cfg.check()?;
    let env = cfg.environment()?;
    let spec = &env.spec;
    let lc = cfg.learner_config();
    let params = cfg.run_params();
    let schedule = cfg.schedule()?;
    let class = lc.uses_class().then_some(&env.class);
    match cfg.algorithm {
        Algorithm::Aggrevate => {
            let mut out = run_aggrevate(spec, &env.expert, class, &lc, schedule, &params)?;
            if cfg.oracle_mode {
                let check = match class {
                    Some(c) => theorem1_check(spec, &env.expert, c, &out.played, schedule)?,
                    None => theorem2_diagnostics(spec, &env.expert, &out.played, &out.dataset, schedule, cfg.delta)?,
                };
                out.report.summary.bounds.push(check);
            }
            package(cfg, out, None)
        }
        Algorithm::Nrpi => {
            let setup = nrpi_setup(cfg, &env)?;
            let mut out = run_nrpi(spec, &setup.exploration, class, &lc, None, &params)?;
            if cfg.oracle_mode {
                if let Some(c) = class {
                    let comparator = c.member(setup.comparator.index);
                    let check = theorem3_check(spec, comparator, c, &setup.nu, &out.played)?;
                    out.report.summary.bounds.push(check);
                }
            }
            package(cfg, out, Some(setup.comparator))
        }
        Algorithm::DaggerClassification => {
            let out = dagger_classification(spec, &env.expert, class, &lc, schedule, &params)?;
            package(cfg, out, None)
        }
        Algorithm::BehaviorCloning => {
            let out = behavior_cloning(spec, &env.expert, class, &lc, &params)?;
            package(cfg, out, None)
        }
    }
}

/// Writes through a temporary file so a crash never leaves a torn artifact.
pub(crate) fn write_atomic(path: &Path, body: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

impl RunArtifacts {
    /// Writes every artifact; `summary.json` goes last and marks completion.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let mut iterations = String::new();
        for r in &self.iterations {
            iterations.push_str(&serde_json::to_string(r)?);
            iterations.push('\n');
        }
        write_atomic(&dir.join(ITERATIONS_FILE), iterations.as_bytes())?;
        write_atomic(&dir.join(EXAMPLES_FILE), self.examples.as_bytes())?;
        write_atomic(&dir.join(POLICIES_FILE), serde_json::to_string_pretty(&self.policies)?.as_bytes())?;
        write_atomic(&dir.join(SUMMARY_FILE), serde_json::to_string_pretty(&self.summary)?.as_bytes())?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct Timing {
    wall_clock_seconds: f64,
}

/// Runs one experiment and writes its artifacts under `dir`. Wall-clock time
/// goes to its own file so every other artifact is a pure function of the config.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<RunArtifacts> {
    let start = Instant::now();
    let artifacts = execute(cfg)?;
    artifacts.write(dir)?;
    let timing = Timing {
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_atomic(&dir.join(TIMING_FILE), serde_json::to_string_pretty(&timing)?.as_bytes())?;
    Ok(artifacts)
}

pub fn read_summary(dir: &Path) -> Result<SummaryDocument> {
    let path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub(crate) fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

pub fn read_policies(dir: &Path) -> Result<PolicyDocument> {
    let path = dir.join(POLICIES_FILE);
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::MissingData(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}
