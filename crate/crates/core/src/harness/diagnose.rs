use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    theorem1_check, theorem2_diagnostics, theorem3_check, Algorithm, BoundCheck, IterationRecord,
};
use crate::error::{Error, Result};
use crate::harness::run::{
    nrpi_setup, read_jsonl, read_policies, read_summary, write_atomic, ExampleLine, EXAMPLES_FILE,
    ITERATIONS_FILE,
};
use crate::learners::AggregatedDataset;
use crate::mdp::{
    exact_q, exact_state_distributions, expectation_gap_bound_check, mixing_l1_bound_check, performance_difference,
    policy_value, Policy,
};
use crate::sampling::CostToGoExample;
use crate::tolerance;

pub const DIAGNOSTICS_SCHEMA: &str = "ctglab.diagnostics/1";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

/// Bound and consistency checks recomputed from a run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsDocument {
    pub schema: String,
    pub config_hash: String,
    pub algorithm: Algorithm,
    pub learner: String,
    pub checks: Vec<BoundCheck>,
    pub all_hold: bool,
}

impl DiagnosticsDocument {
    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn tolerance_check(name: &str, error: f64, tol: f64, components: BTreeMap<String, f64>) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        lhs: error,
        rhs: tol,
        holds: error <= tol,
        components,
    }
}

fn recorded(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingData(format!("report has no exact value for {what}")))
}

/// Recorded values must match a fresh exact evaluation of the stored policies,
/// and the mixture value must equal the mean of the per-round values.
fn consistency_check(
    spec: &crate::mdp::MdpSpec,
    records: &[IterationRecord],
    played: &[Policy],
    summary: &crate::algorithms::RunSummary,
    final_policy: &Policy,
    best: &Policy,
    expert: Option<&Policy>,
) -> Result<BoundCheck> {
    if records.len() != played.len() {
        return Err(Error::MissingData(format!(
            "{} iteration records but {} stored policies",
            records.len(),
            played.len()
        )));
    }
    let mut worst_round: f64 = 0.0;
    let mut sum = 0.0;
    for (r, p) in records.iter().zip(played) {
        let j = recorded(r.exact_j, &format!("round {}", r.iteration))?;
        worst_round = worst_round.max((j - policy_value(spec, p)?).abs());
        sum += j;
    }
    let j_mix = recorded(summary.j_mixture, "the mixture")?;
    let mixture_err = (j_mix - policy_value(spec, &Policy::trajectory_mixture(played.to_vec()))?).abs();
    let linearity_err = (j_mix - sum / records.len() as f64).abs();
    let final_err = (recorded(summary.j_final, "the final policy")? - policy_value(spec, final_policy)?).abs();
    let best_err = (recorded(summary.j_best, "the best policy")? - policy_value(spec, best)?).abs();
    let expert_err = match expert {
        Some(e) => (recorded(summary.j_expert, "the expert")? - policy_value(spec, e)?).abs(),
        None => 0.0,
    };
    let components = BTreeMap::from([
        ("max_round_error".to_string(), worst_round),
        ("mixture_error".to_string(), mixture_err),
        ("mixture_linearity_error".to_string(), linearity_err),
        ("final_error".to_string(), final_err),
        ("best_error".to_string(), best_err),
        ("expert_error".to_string(), expert_err),
    ]);
    let worst = components.values().copied().fold(0.0, f64::max);
    Ok(tolerance_check("recorded_values", worst, tolerance::VALIDATION, components))
}

/// Performance difference, mixing and expectation-gap checks on the last
/// played policy against the run's reference policy, mixed in with
/// probability `beta`.
fn lemma_checks(
    spec: &crate::mdp::MdpSpec,
    learner: &Policy,
    reference: &Policy,
    beta: f64,
) -> Result<Vec<BoundCheck>> {
    let pd = performance_difference(spec, learner, reference)?;
    let err1 = (pd.lhs - pd.rhs_form1).abs();
    let err2 = (pd.lhs - pd.rhs_form2).abs();
    let pd_check = tolerance_check(
        "performance_difference",
        err1.max(err2),
        tolerance::VALIDATION,
        BTreeMap::from([
            ("value_gap".to_string(), pd.lhs),
            ("form1".to_string(), pd.rhs_form1),
            ("form2".to_string(), pd.rhs_form2),
        ]),
    );

    let mixing = mixing_l1_bound_check(spec, reference, learner, beta)?;
    let mixing_check = BoundCheck {
        name: "mixing_l1".into(),
        lhs: mixing.lhs,
        rhs: mixing.bound,
        holds: mixing.holds,
        components: BTreeMap::from([("beta".to_string(), beta)]),
    };

    // f(s) = reference's cost-to-go from s over the full horizon, valued in [0, T].
    let q = exact_q(spec, reference)?;
    let f: Vec<f64> = (0..spec.num_states).map(|s| q.v(spec.horizon, s)).collect();
    let mix = Policy::per_step_mixture(learner.clone(), reference.clone(), beta);
    let p = exact_state_distributions(spec, &mix)?.averaged;
    let d = exact_state_distributions(spec, learner)?.averaged;
    let gap = expectation_gap_bound_check(&p, &d, &f, 0.0, spec.cost_to_go_cap())?;
    let gap_check = BoundCheck {
        name: "expectation_gap".into(),
        lhs: gap.gap,
        rhs: gap.bound,
        holds: gap.holds,
        components: BTreeMap::from([("beta".to_string(), beta)]),
    };
    Ok(vec![pd_check, mixing_check, gap_check])
}

/// Recomputes every applicable check for the run stored in `dir`.
///
/// Fails with [`Error::MissingData`] when the run was made without the oracle.
pub fn diagnose(dir: &Path) -> Result<DiagnosticsDocument> {
    let doc = read_summary(dir)?;
    let cfg = &doc.config;
    if !cfg.oracle_mode {
        return Err(Error::MissingData("run was made with the oracle off; no exact values to check".into()));
    }
    let records: Vec<IterationRecord> = read_jsonl(&dir.join(ITERATIONS_FILE))?;
    let policies = read_policies(dir)?;
    let env = cfg.environment()?;
    let spec = &env.spec;
    let lc = cfg.learner_config();
    let schedule = cfg.schedule()?;
    let played = &policies.played;
    if played.is_empty() {
        return Err(Error::MissingData("no played policies stored".into()));
    }

    let setup = if cfg.algorithm == Algorithm::Nrpi {
        Some(nrpi_setup(cfg, &env)?)
    } else {
        None
    };
    let (reference, expert) = match &setup {
        Some(s) => (env.class.member(s.comparator.index), None),
        None => (&env.expert, Some(&env.expert)),
    };

    let mut checks = vec![consistency_check(
        spec,
        &records,
        played,
        &doc.summary,
        &policies.final_policy,
        &policies.best,
        expert,
    )?];

    match (cfg.algorithm, lc.uses_class()) {
        (Algorithm::Aggrevate, true) => checks.push(theorem1_check(spec, &env.expert, &env.class, played, schedule)?),
        (Algorithm::Aggrevate, false) => {
            let lines: Vec<ExampleLine<CostToGoExample>> = read_jsonl(&dir.join(EXAMPLES_FILE))?;
            let mut data = AggregatedDataset::new();
            for round in 1..=records.len() {
                data.push_round(lines.iter().filter(|l| l.round == round).map(|l| l.example).collect());
            }
            checks.push(theorem2_diagnostics(spec, &env.expert, played, &data, schedule, cfg.delta)?);
        }
        (Algorithm::Nrpi, true) => {
            let s = setup.as_ref().expect("nrpi setup");
            checks.push(theorem3_check(spec, reference, &env.class, &s.nu, played)?);
        }
        _ => {}
    }

    let last = played.last().expect("nonempty");
    // Probe below 1/T, where the mixing bound is not capped at 2.
    let beta = 0.5 / spec.horizon as f64;
    checks.extend(lemma_checks(spec, last, reference, beta)?);

    Ok(DiagnosticsDocument {
        schema: DIAGNOSTICS_SCHEMA.into(),
        config_hash: doc.config_hash.clone(),
        algorithm: doc.algorithm,
        learner: doc.learner.clone(),
        all_hold: checks.iter().all(|c| c.holds),
        checks,
    })
}

/// [`diagnose`] plus writing `diagnostics.json` next to the run.
pub fn diagnose_to_dir(dir: &Path) -> Result<DiagnosticsDocument> {
    let doc = diagnose(dir)?;
    write_atomic(&dir.join(DIAGNOSTICS_FILE), serde_json::to_string_pretty(&doc)?.as_bytes())?;
    Ok(doc)
}
