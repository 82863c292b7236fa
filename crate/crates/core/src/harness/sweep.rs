use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::run::{config_hash, read_summary, run_to_dir, write_atomic, SummaryDocument};

pub const SWEEP_FILE: &str = "sweep.csv";
pub const CELLS_DIR: &str = "cells";

/// Values to sweep; absent axes keep the base config's value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Grid {
    pub iterations: Option<Vec<usize>>,
    pub samples_per_iteration: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
    pub seed: Option<Vec<u64>>,
}

/// A base config plus a `[grid]` table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    pub grid: Grid,
}

fn grid_axis<T: serde::de::DeserializeOwned>(table: &mut toml::Table, key: &str) -> Result<Option<Vec<T>>> {
    let Some(value) = table.remove(key) else {
        return Ok(None);
    };
    let values: Vec<T> = value
        .try_into()
        .map_err(|e| Error::Config(format!("grid.{key}: {e}")))?;
    if values.is_empty() {
        return Err(Error::Config(format!("grid.{key}: needs at least one value")));
    }
    Ok(Some(values))
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let grid = match doc.remove("grid") {
            Some(toml::Value::Table(mut t)) => {
                let grid = Grid {
                    iterations: grid_axis(&mut t, "iterations")?,
                    samples_per_iteration: grid_axis(&mut t, "samples_per_iteration")?,
                    alpha: grid_axis(&mut t, "alpha")?,
                    seed: grid_axis(&mut t, "seed")?,
                };
                if let Some(k) = t.keys().next() {
                    return Err(Error::Config(format!(
                        "grid.{k}: not a sweepable field (iterations, samples_per_iteration, alpha, seed)"
                    )));
                }
                grid
            }
            Some(_) => return Err(Error::Config("`grid` must be a table".into())),
            None => return Err(Error::Config("sweep config needs a [grid] table".into())),
        };
        let base: ExperimentConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        base.check_compatibility()?;
        Ok(Self { base, grid })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Cartesian product in the order iterations, samples, alpha, seed
    /// (last axis varies fastest). Every cell is validated.
    pub fn cells(&self) -> Result<Vec<ExperimentConfig>> {
        let b = &self.base;
        let ns = self.grid.iterations.clone().unwrap_or_else(|| vec![b.iterations]);
        let ms = self.grid.samples_per_iteration.clone().unwrap_or_else(|| vec![b.samples_per_iteration]);
        let alphas = self.grid.alpha.clone().unwrap_or_else(|| vec![b.alpha]);
        let seeds = self.grid.seed.clone().unwrap_or_else(|| vec![b.seed]);
        let mut out = Vec::with_capacity(ns.len() * ms.len() * alphas.len() * seeds.len());
        for &n in &ns {
            for &m in &ms {
                for &alpha in &alphas {
                    for &seed in &seeds {
                        let cell = ExperimentConfig {
                            iterations: n,
                            samples_per_iteration: m,
                            alpha,
                            seed,
                            out_dir: None,
                            ..b.clone()
                        };
                        cell.check()?;
                        out.push(cell);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One CSV row. Column order is fixed by field order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub algorithm: String,
    pub learner: String,
    pub iterations: usize,
    pub samples_per_iteration: usize,
    pub alpha: f64,
    pub seed: u64,
    pub j_mixture: Option<f64>,
    pub j_best: Option<f64>,
    pub j_final: Option<f64>,
    pub j_expert: Option<f64>,
    pub empirical_eps_regret: Option<f64>,
    pub bound: Option<String>,
    pub eps_class: Option<f64>,
    pub eps_regret: Option<f64>,
    pub bound_lhs: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub bound_margin: Option<f64>,
    pub bound_holds: Option<bool>,
}

impl SweepRow {
    fn from_summary(doc: &SummaryDocument) -> Self {
        let s = &doc.summary;
        let bound = s.bounds.first();
        let component = |names: &[&str]| {
            bound.and_then(|b| names.iter().find_map(|n| b.components.get(*n).copied()))
        };
        Self {
            config_hash: doc.config_hash.clone(),
            algorithm: doc.algorithm.name().into(),
            learner: doc.learner.clone(),
            iterations: doc.config.iterations,
            samples_per_iteration: doc.config.samples_per_iteration,
            alpha: doc.config.alpha,
            seed: doc.config.seed,
            j_mixture: s.j_mixture,
            j_best: s.j_best,
            j_final: s.j_final,
            j_expert: s.j_expert,
            empirical_eps_regret: s.empirical_eps_regret,
            bound: bound.map(|b| b.name.clone()),
            eps_class: component(&["eps_class", "eps_hat_class"]),
            eps_regret: component(&["eps_regret", "eps_hat_regret"]),
            bound_lhs: bound.map(|b| b.lhs),
            bound_rhs: bound.map(|b| b.rhs),
            bound_margin: bound.map(|b| b.margin()),
            bound_holds: bound.map(|b| b.holds),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Cells actually run this time; the rest were reused from disk.
    pub computed: Vec<String>,
    pub csv_path: PathBuf,
}

/// A finished cell is one whose summary parses and matches its hash.
fn finished(dir: &Path, hash: &str) -> Option<SummaryDocument> {
    read_summary(dir).ok().filter(|d| d.config_hash == hash)
}

/// Runs every cell not already finished under `out_dir/cells/<hash>`, in
/// parallel, and writes one CSV row per cell in grid order.
pub fn sweep(cfg: &SweepConfig, out_dir: &Path) -> Result<SweepOutcome> {
    let cells = cfg.cells()?;
    let cells_dir = out_dir.join(CELLS_DIR);
    fs::create_dir_all(&cells_dir)?;
    let results = cells
        .par_iter()
        .map(|cell| -> Result<(SummaryDocument, bool)> {
            let hash = config_hash(cell)?;
            let dir = cells_dir.join(&hash);
            if let Some(doc) = finished(&dir, &hash) {
                return Ok((doc, false));
            }
            run_to_dir(cell, &dir)?;
            Ok((read_summary(&dir)?, true))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut rows = Vec::with_capacity(results.len());
    let mut computed = Vec::new();
    for (doc, fresh) in &results {
        let row = SweepRow::from_summary(doc);
        writer.serialize(&row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        if *fresh {
            computed.push(row.config_hash.clone());
        }
        rows.push(row);
    }
    let body = writer.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let csv_path = out_dir.join(SWEEP_FILE);
    write_atomic(&csv_path, &body)?;
    Ok(SweepOutcome {
        rows,
        computed,
        csv_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
algorithm = "aggrevate"
learner = "ftl"
iterations = 3
samples_per_iteration = 20
seed = 1

[env]
kind = "two_road"
horizon = 6
"#;

    #[test]
    fn two_by_two_grid_has_four_cells() {
        let cfg = SweepConfig::from_toml(&format!("{BASE}\n[grid]\niterations = [2, 4]\nseed = [1, 2]\n")).unwrap();
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 4);
        assert_eq!((cells[1].iterations, cells[1].seed), (2, 2));
        assert_eq!((cells[2].iterations, cells[2].seed), (4, 1));
    }

    #[test]
    fn malformed_grids_are_config_errors() {
        for bad in [
            "[grid]\niterations = []\n",
            "[grid]\nlearner = [\"ftl\"]\n",
            "[grid]\niterations = \"five\"\n",
            "grid = 3\n",
            "",
        ] {
            let text = if bad.starts_with("grid") {
                format!("{bad}{BASE}")
            } else {
                format!("{BASE}\n{bad}")
            };
            let err = SweepConfig::from_toml(&text).and_then(|c| c.cells()).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{bad:?}: {err}");
        }
    }

    #[test]
    fn bad_cell_value_is_rejected() {
        let cfg = SweepConfig::from_toml(&format!("{BASE}\n[grid]\nalpha = [0.5, 1.5]\n")).unwrap();
        assert!(matches!(cfg.cells(), Err(Error::Config(_))));
    }
}
