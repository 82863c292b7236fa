use serde::{Deserialize, Serialize};

use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::learners::FinitePolicyClass;
use crate::mdp::{finite_horizon_optimal_policy, MdpSpec, Policy, TabularPolicy};

pub const RIGHT: usize = 0;
pub const UP: usize = 1;
pub const DOWN: usize = 2;

/// Grid with a cliff below row 0 and a goal column on the right.
///
/// Row 0 is a cheap road along the edge; higher rows are rough ground.
/// Every move slips upward (away from the edge) with probability `slip`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CliffParams {
    pub width: usize,
    pub height: usize,
    pub slip: f64,
    pub horizon: usize,
    /// Per-step cost on row 0.
    pub edge_cost: f64,
    /// Per-step cost on row 1.
    pub rough_cost: f64,
    /// Per-step cost on rows 2 and above.
    pub far_cost: f64,
}

impl Default for CliffParams {
    fn default() -> Self {
        Self {
            width: 6,
            height: 3,
            slip: 0.1,
            horizon: 10,
            edge_cost: 0.1,
            rough_cost: 0.3,
            far_cost: 1.0,
        }
    }
}

/// State layout of a cliff corridor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CliffCorridor {
    pub width: usize,
    pub height: usize,
}

impl CliffCorridor {
    /// Grid columns `0..width - 1`; the last column is the goal.
    pub fn grid_cols(&self) -> usize {
        self.width - 1
    }

    pub fn cell(&self, col: usize, row: usize) -> usize {
        col * self.height + row
    }

    pub fn goal(&self) -> usize {
        self.grid_cols() * self.height
    }

    pub fn fallen(&self) -> usize {
        self.goal() + 1
    }

    pub fn num_states(&self) -> usize {
        self.goal() + 2
    }

    /// `(col, row)` of a grid state, `None` for goal and fallen.
    pub fn coords(&self, s: usize) -> Option<(usize, usize)> {
        (s < self.goal()).then(|| (s / self.height, s % self.height))
    }

    /// Where a move lands without slipping.
    fn target(&self, col: usize, row: usize, a: usize) -> usize {
        match a {
            RIGHT if col + 1 == self.grid_cols() => self.goal(),
            RIGHT => self.cell(col + 1, row),
            UP => self.cell(col, (row + 1).min(self.height - 1)),
            _ if row == 0 => self.fallen(),
            _ => self.cell(col, row - 1),
        }
    }
}

fn build_spec(p: &CliffParams) -> Result<(MdpSpec, CliffCorridor)> {
    if p.width < 3 || p.height < 2 {
        return Err(Error::InvalidArgument(format!(
            "cliff corridor needs width >= 3 and height >= 2, got {}x{}",
            p.width, p.height
        )));
    }
    if !(0.0..=0.3).contains(&p.slip) {
        return Err(Error::InvalidArgument(format!("slip must lie in [0, 0.3], got {}", p.slip)));
    }
    if p.horizon == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let g = CliffCorridor {
        width: p.width,
        height: p.height,
    };
    let ns = g.num_states();
    let mut transitions = vec![vec![vec![0.0; ns]; 3]; ns];
    let mut costs = vec![vec![0.0; 3]; ns];
    for s in 0..ns {
        for a in 0..3 {
            let row = &mut transitions[s][a];
            match g.coords(s) {
                Some((col, r)) => {
                    row[g.target(col, r, a)] += 1.0 - p.slip;
                    row[g.target(col, r, UP)] += p.slip;
                    costs[s][a] = match r {
                        0 => p.edge_cost,
                        1 => p.rough_cost,
                        _ => p.far_cost,
                    };
                }
                None => {
                    row[s] = 1.0;
                    costs[s][a] = if s == g.fallen() { 1.0 } else { 0.0 };
                }
            }
        }
    }
    let mut initial = vec![0.0; ns];
    initial[g.cell(0, 0)] = 1.0;
    let spec = MdpSpec::new(ns, 3, p.horizon, transitions, costs, initial)?;
    Ok((spec, g))
}

/// Cliff corridor with its optimal expert and the class
/// `[expert, cliff_seeker, edge_runner, safe_detour]`.
///
/// - `cliff_seeker` steps down everywhere, so it falls at once.
/// - `edge_runner` copies the expert on the edge but climbs away whenever it
///   slips off it, ending up stuck on the far rows.
/// - `safe_detour` leaves the edge immediately and drives along row 1.
pub fn make_cliff_corridor(p: &CliffParams) -> Result<Environment> {
    let (spec, g) = build_spec(p)?;
    let (ns, horizon) = (spec.num_states, spec.horizon);
    let (expert, _) = finite_horizon_optimal_policy(&spec);
    let by_row = |f: fn(Option<usize>) -> usize| -> Policy {
        TabularPolicy::from_fn(ns, 3, horizon, |s, _| f(g.coords(s).map(|(_, r)| r))).into()
    };
    let cliff_seeker = by_row(|r| match r {
        Some(_) => DOWN,
        None => RIGHT,
    });
    let edge_runner = by_row(|r| match r {
        Some(0) | None => RIGHT,
        Some(_) => UP,
    });
    let safe_detour = by_row(|r| match r {
        Some(0) => UP,
        Some(1) | None => RIGHT,
        Some(_) => DOWN,
    });
    let class = FinitePolicyClass::new(
        vec![expert.clone(), cliff_seeker, edge_runner, safe_detour],
        ["expert", "cliff_seeker", "edge_runner", "safe_detour"]
            .map(String::from)
            .to_vec(),
    )?;
    Ok(Environment {
        name: "cliff_corridor".into(),
        spec,
        expert,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::policy_value;

    #[test]
    fn layout_and_absorbing_states() {
        let env = make_cliff_corridor(&CliffParams::default()).unwrap();
        let g = CliffCorridor { width: 6, height: 3 };
        assert_eq!(env.spec.num_states, 17);
        assert_eq!(g.goal(), 15);
        for a in 0..3 {
            assert_eq!(env.spec.next_dist(g.fallen(), a)[g.fallen()], 1.0);
            assert_eq!(env.spec.cost(g.fallen(), a), 1.0);
            assert_eq!(env.spec.next_dist(g.goal(), a)[g.goal()], 1.0);
            assert_eq!(env.spec.cost(g.goal(), a), 0.0);
        }
        // Down from the edge falls unless the slip pushes the agent up.
        let s = g.cell(2, 0);
        assert!((env.spec.next_dist(s, DOWN)[g.fallen()] - 0.9).abs() < 1e-15);
        assert!((env.spec.next_dist(s, DOWN)[g.cell(2, 1)] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_geometry() {
        let bad = |w, h, slip| CliffParams { width: w, height: h, slip, ..Default::default() };
        assert!(make_cliff_corridor(&bad(2, 3, 0.1)).is_err());
        assert!(make_cliff_corridor(&bad(4, 1, 0.1)).is_err());
        assert!(make_cliff_corridor(&bad(4, 2, 0.5)).is_err());
    }

    #[test]
    fn cliff_seeker_is_at_least_one_worse_than_expert() {
        let env = make_cliff_corridor(&CliffParams::default()).unwrap();
        let je = policy_value(&env.spec, &env.expert).unwrap();
        let jc = policy_value(&env.spec, env.class.member(1)).unwrap();
        assert!(jc >= je + 1.0, "cliff seeker {jc} vs expert {je}");
    }

    #[test]
    fn expert_hugs_the_edge() {
        let env = make_cliff_corridor(&CliffParams::default()).unwrap();
        let g = CliffCorridor { width: 6, height: 3 };
        for col in 0..g.grid_cols() {
            assert_eq!(env.expert.deterministic_action(g.cell(col, 0), 1 + col), Some(RIGHT));
        }
    }
}
