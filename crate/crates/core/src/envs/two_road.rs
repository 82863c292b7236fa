use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::learners::FinitePolicyClass;
use crate::mdp::{MdpSpec, Policy, TabularPolicy};

/// State indices of the two-road world.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwoRoad;

impl TwoRoad {
    pub const START: usize = 0;
    pub const NARROW_1: usize = 1;
    pub const NARROW_2: usize = 2;
    pub const LONG_1: usize = 3;
    pub const LONG_LAST: usize = 6;
    pub const GOAL: usize = 7;
    pub const FALLEN: usize = 8;
    pub const NUM_STATES: usize = 9;

    /// Action at the start that leads onto the narrow road.
    pub const TAKE_SHORT: usize = 0;
    pub const TAKE_LONG: usize = 1;
    /// The only safe actions on the two narrow-road cells.
    pub const NARROW_SAFE: [usize; 2] = [1, 0];

    pub const START_COST: f64 = 0.1;
    pub const NARROW_COST: f64 = 0.1;
    pub const LONG_COST: f64 = 0.25;
}

/// Short risky road versus long safe road.
///
/// The expert drives the narrow road, which needs the action sequence
/// `(1, 0)` on its two cells; any other action falls off. No member of the
/// returned class reproduces that sequence:
/// `[short_fail_last, short_fail_first, long_road]`.
pub fn make_two_road(horizon: usize) -> Result<Environment> {
    if horizon < 6 {
        return Err(Error::InvalidArgument(format!(
            "two-road world needs horizon >= 6 to finish the long road, got {horizon}"
        )));
    }
    let ns = TwoRoad::NUM_STATES;
    let mut transitions = vec![vec![vec![0.0; ns]; 2]; ns];
    let mut costs = vec![vec![0.0; 2]; ns];
    let mut go = |s: usize, a: usize, to: usize, c: f64| {
        transitions[s][a][to] = 1.0;
        costs[s][a] = c;
    };
    go(TwoRoad::START, TwoRoad::TAKE_SHORT, TwoRoad::NARROW_1, TwoRoad::START_COST);
    go(TwoRoad::START, TwoRoad::TAKE_LONG, TwoRoad::LONG_1, TwoRoad::START_COST);
    for (cell, next) in [(TwoRoad::NARROW_1, TwoRoad::NARROW_2), (TwoRoad::NARROW_2, TwoRoad::GOAL)] {
        let safe = TwoRoad::NARROW_SAFE[cell - TwoRoad::NARROW_1];
        go(cell, safe, next, TwoRoad::NARROW_COST);
        go(cell, 1 - safe, TwoRoad::FALLEN, 1.0);
    }
    for s in TwoRoad::LONG_1..=TwoRoad::LONG_LAST {
        let next = if s == TwoRoad::LONG_LAST { TwoRoad::GOAL } else { s + 1 };
        go(s, 0, next, TwoRoad::LONG_COST);
        go(s, 1, next, TwoRoad::LONG_COST);
    }
    for a in 0..2 {
        go(TwoRoad::GOAL, a, TwoRoad::GOAL, 0.0);
        go(TwoRoad::FALLEN, a, TwoRoad::FALLEN, 1.0);
    }
    let mut initial = vec![0.0; ns];
    initial[TwoRoad::START] = 1.0;
    let spec = MdpSpec::new(ns, 2, horizon, transitions, costs, initial)?;

    let table = |start: usize, n1: usize, n2: usize| -> Policy {
        TabularPolicy::from_fn(ns, 2, horizon, |s, _| match s {
            TwoRoad::START => start,
            TwoRoad::NARROW_1 => n1,
            TwoRoad::NARROW_2 => n2,
            _ => 0,
        })
        .into()
    };
    let [safe1, safe2] = TwoRoad::NARROW_SAFE;
    let expert = table(TwoRoad::TAKE_SHORT, safe1, safe2);
    let class = FinitePolicyClass::new(
        vec![
            table(TwoRoad::TAKE_SHORT, safe1, 1 - safe2),
            table(TwoRoad::TAKE_SHORT, 1 - safe1, safe2),
            table(TwoRoad::TAKE_LONG, safe1, 1 - safe2),
        ],
        ["short_fail_last", "short_fail_first", "long_road"].map(String::from).to_vec(),
    )?;
    Ok(Environment {
        name: "two_road".into(),
        spec,
        expert,
        class,
    })
}
