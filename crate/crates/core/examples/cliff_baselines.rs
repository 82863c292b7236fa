//! Compares expert cost-to-go imitation with classification baselines on the
//! cliff corridor, using exact policy values.
//!
//! cargo run --release -p ctglab --example cliff_baselines -- [reps] [N] [m]

use ctglab::algorithms::{behavior_cloning, dagger_classification, run_aggrevate, BetaSchedule, LearnerConfig, RunParams};
use ctglab::envs::{make_cliff_corridor, CliffParams};
use ctglab::mdp::policy_value;

fn main() -> ctglab::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let reps = args.first().copied().unwrap_or(20);
    let n = args.get(1).copied().unwrap_or(10);
    let m = args.get(2).copied().unwrap_or(100);

    let env = make_cliff_corridor(&CliffParams::default())?;
    let class = env.class.without(0)?;
    for (k, name) in class.names.iter().enumerate() {
        println!("{name:>14}: J = {:.4}", policy_value(&env.spec, class.member(k))?);
    }
    println!("{:>14}: J = {:.4}", "expert", policy_value(&env.spec, &env.expert)?);

    let schedule = BetaSchedule::new(1.0)?;
    let (mut wins_bc, mut wins_dagger) = (0, 0);
    for seed in 0..reps as u64 {
        let params = RunParams::new(n, m, seed);
        let agg = run_aggrevate(&env.spec, &env.expert, Some(&class), &LearnerConfig::Ftl, schedule, &params)?;
        let dag = dagger_classification(&env.spec, &env.expert, Some(&class), &LearnerConfig::Ftl, schedule, &params)?;
        let bc = behavior_cloning(&env.spec, &env.expert, Some(&class), &LearnerConfig::Ftl, &params)?;
        let (ja, jd, jb) = (
            agg.report.summary.j_best.unwrap(),
            dag.report.summary.j_best.unwrap(),
            bc.report.summary.j_best.unwrap(),
        );
        wins_bc += usize::from(ja <= jb);
        wins_dagger += usize::from(ja <= jd);
        let picks = |o: &[ctglab::algorithms::IterationRecord]| -> String {
            o.iter().map(|r| r.chosen_member.map_or('-', |k| char::from(b'0' + k as u8))).collect()
        };
        println!(
            "seed {seed:>2}: aggrevate {ja:.4} [{}]  dagger {jd:.4} [{}]  cloning {jb:.4}",
            picks(&agg.report.iterations),
            picks(&dag.report.iterations)
        );
    }
    println!("aggrevate <= cloning: {wins_bc}/{reps}, aggrevate <= dagger: {wins_dagger}/{reps}");
    Ok(())
}
