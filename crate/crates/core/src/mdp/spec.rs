use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// A finite-horizon MDP with costs in `[0, 1]`.
///
/// `transitions[s][a][s']` is the probability of moving to `s'` after taking
/// `a` in `s`; `costs[s][a]` is the immediate cost of that choice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdpSpec {
    pub num_states: usize,
    pub num_actions: usize,
    pub horizon: usize,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub costs: Vec<Vec<f64>>,
    pub initial_dist: Vec<f64>,
}

/// One broken invariant, addressed by its index path inside the spec.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl MdpSpec {
    /// Builds a spec and rejects it unless every invariant holds.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        horizon: usize,
        transitions: Vec<Vec<Vec<f64>>>,
        costs: Vec<Vec<f64>>,
        initial_dist: Vec<f64>,
    ) -> Result<Self> {
        let spec = Self {
            num_states,
            num_actions,
            horizon,
            transitions,
            costs,
            initial_dist,
        };
        spec.ensure_valid()?;
        Ok(spec)
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate_mdp(self);
        if report.is_ok() {
            Ok(())
        } else {
            let joined: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidSpec(joined.join("; ")))
        }
    }

    #[inline]
    pub fn cost(&self, s: usize, a: usize) -> f64 {
        self.costs[s][a]
    }

    #[inline]
    pub fn next_dist(&self, s: usize, a: usize) -> &[f64] {
        &self.transitions[s][a]
    }

    /// Worst-case cost-to-go over the whole horizon (`T * C_max` with `C_max = 1`).
    pub fn cost_to_go_cap(&self) -> f64 {
        self.horizon as f64
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_prob_vector(path: String, p: &[f64], out: &mut Vec<Violation>) {
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        out.push(Violation {
            path: format!("{path}[{i}]"),
            message: format!("non-finite probability {v}"),
        });
        return;
    }
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| **v < 0.0) {
        out.push(Violation {
            path: format!("{path}[{i}]"),
            message: format!("negative probability {v}"),
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tolerance::VALIDATION {
        out.push(Violation {
            path,
            message: format!("probabilities sum to {sum}, expected 1"),
        });
    }
}

/// Lists every invariant violation; an empty report means the spec is usable.
pub fn validate_mdp(spec: &MdpSpec) -> ValidationReport {
    let mut out = Vec::new();
    let (ns, na) = (spec.num_states, spec.num_actions);
    if ns == 0 {
        out.push(Violation {
            path: "num_states".into(),
            message: "must be positive".into(),
        });
    }
    if na == 0 {
        out.push(Violation {
            path: "num_actions".into(),
            message: "must be positive".into(),
        });
    }
    if spec.horizon == 0 {
        out.push(Violation {
            path: "horizon".into(),
            message: "must be positive".into(),
        });
    }

    if spec.transitions.len() != ns {
        out.push(Violation {
            path: "transitions".into(),
            message: format!("has {} rows, expected {ns}", spec.transitions.len()),
        });
    }
    for (s, per_action) in spec.transitions.iter().enumerate() {
        if per_action.len() != na {
            out.push(Violation {
                path: format!("transitions[{s}]"),
                message: format!("has {} actions, expected {na}", per_action.len()),
            });
            continue;
        }
        for (a, row) in per_action.iter().enumerate() {
            let path = format!("transitions[{s}][{a}]");
            if row.len() != ns {
                out.push(Violation {
                    path,
                    message: format!("has {} next states, expected {ns}", row.len()),
                });
                continue;
            }
            check_prob_vector(path, row, &mut out);
        }
    }

    if spec.costs.len() != ns {
        out.push(Violation {
            path: "costs".into(),
            message: format!("has {} rows, expected {ns}", spec.costs.len()),
        });
    }
    for (s, row) in spec.costs.iter().enumerate() {
        if row.len() != na {
            out.push(Violation {
                path: format!("costs[{s}]"),
                message: format!("has {} actions, expected {na}", row.len()),
            });
            continue;
        }
        for (a, &c) in row.iter().enumerate() {
            if !(0.0..=1.0).contains(&c) {
                out.push(Violation {
                    path: format!("costs[{s}][{a}]"),
                    message: format!("cost out of [0,1]: {c}"),
                });
            }
        }
    }

    if spec.initial_dist.len() != ns {
        out.push(Violation {
            path: "initial_dist".into(),
            message: format!("has {} entries, expected {ns}", spec.initial_dist.len()),
        });
    } else {
        check_prob_vector("initial_dist".into(), &spec.initial_dist, &mut out);
    }

    ValidationReport { violations: out }
}
