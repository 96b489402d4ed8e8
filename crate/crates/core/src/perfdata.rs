//! Performance tables: repetition aggregation, capped log-precision,
//! best-solver labels and the complementarity filter.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::problems::ProblemSpec;
use crate::sampling::RngStream;
use crate::solvers::{RunTrajectory, SolverName};

/// Precision floor applied before the log transform.
pub const PRECISION_CAP: f64 = 1e-8;

/// Default complementarity threshold (share of instances a solver must win).
pub const PORTFOLIO_THRESHOLD: f64 = 0.05;

pub fn cap_and_log_with(p: f64, cap: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(Error::InvalidPerformance(format!("precision {p} is negative or NaN")));
    }
    Ok(p.max(cap).log10())
}

/// `log10(max(p, 1e-8))`.
pub fn cap_and_log(p: f64) -> Result<f64> {
    cap_and_log_with(p, PRECISION_CAP)
}

/// Lower median of the repetition precisions.
pub fn aggregate_runs(precisions: &[f64]) -> Result<f64> {
    if precisions.is_empty() {
        return Err(Error::InvalidPerformance("no repetitions to aggregate".into()));
    }
    let mut s = precisions.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s[(s.len() - 1) / 2])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfCell {
    pub aggregated_precision: f64,
    pub log_precision: f64,
}

/// Row key of a performance cell.
pub type PerfKey = (ProblemSpec, SolverName, u64);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PerformanceTable {
    cells: BTreeMap<PerfKey, PerfCell>,
}

impl PerformanceTable {
    pub fn insert(&mut self, spec: ProblemSpec, solver: SolverName, budget: u64, aggregated_precision: f64, cap: f64) -> Result<()> {
        let log_precision = cap_and_log_with(aggregated_precision, cap)?;
        self.cells.insert((spec, solver, budget), PerfCell { aggregated_precision, log_precision });
        Ok(())
    }

    /// Aggregates trajectories and checks that every configured
    /// (instance, solver, budget) cell is present.
    pub fn from_trajectories(
        runs: &[RunTrajectory],
        specs: &[ProblemSpec],
        solvers: &[SolverName],
        budgets: &[u64],
        cap: f64,
    ) -> Result<Self> {
        let mut grouped: BTreeMap<PerfKey, Vec<f64>> = BTreeMap::new();
        for run in runs {
            for (budget, p) in &run.checkpoints {
                grouped.entry((run.problem, run.solver, *budget)).or_default().push(*p);
            }
        }
        let mut table = PerformanceTable::default();
        for spec in specs {
            for solver in solvers {
                for budget in budgets {
                    let values = grouped.get(&(*spec, *solver, *budget)).ok_or_else(|| {
                        Error::InvalidPerformance(format!("no runs for {spec} / {solver} / budget {budget}"))
                    })?;
                    table.insert(*spec, *solver, *budget, aggregate_runs(values)?, cap)?;
                }
            }
        }
        Ok(table)
    }

    pub fn get(&self, spec: &ProblemSpec, solver: SolverName, budget: u64) -> Option<&PerfCell> {
        self.cells.get(&(*spec, solver, budget))
    }

    pub fn log_precision(&self, spec: &ProblemSpec, solver: SolverName, budget: u64) -> Result<f64> {
        self.get(spec, solver, budget)
            .map(|c| c.log_precision)
            .ok_or_else(|| Error::Evaluation(format!("missing cell {spec} / {solver} / budget {budget}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PerfKey, &PerfCell)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn specs(&self) -> BTreeSet<ProblemSpec> {
        self.cells.keys().map(|k| k.0).collect()
    }

    pub fn specs_in_dimension(&self, dimension: usize) -> Vec<ProblemSpec> {
        self.specs().into_iter().filter(|s| s.dimension == dimension).collect()
    }

    pub fn budgets(&self) -> BTreeSet<u64> {
        self.cells.keys().map(|k| k.2).collect()
    }

    pub fn solvers(&self) -> BTreeSet<SolverName> {
        self.cells.keys().map(|k| k.1).collect()
    }

    /// `(solver, log_precision)` for one row group, in `solvers` order.
    pub fn row_group(&self, spec: &ProblemSpec, budget: u64, solvers: &[SolverName]) -> Result<Vec<(SolverName, f64)>> {
        solvers
            .iter()
            .map(|s| self.log_precision(spec, *s, budget).map(|v| (*s, v)))
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<_> = self.cells.iter().collect();
        rows.sort_by(|a, b| (a.0 .0, a.0 .1.as_str(), a.0 .2).cmp(&(b.0 .0, b.0 .1.as_str(), b.0 .2)));
        let mut out = Vec::new();
        writeln!(out, "function_id,instance_id,dimension,solver,budget,aggregated_precision,log_precision").unwrap();
        for ((spec, solver, budget), cell) in rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                spec.function_id,
                spec.instance_id,
                spec.dimension,
                solver,
                budget,
                sci(cell.aggregated_precision),
                sci(cell.log_precision)
            )
            .unwrap();
        }
        crate::fmt::write_file(path, &out)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let bad = |detail: String| Error::SchemaMismatch { path: path.to_owned(), detail };
        let mut cells = BTreeMap::new();
        for record in reader.records() {
            let r = record.map_err(|e| Error::csv(path, e))?;
            if r.len() != 7 {
                return Err(bad(format!("expected 7 columns, found {}", r.len())));
            }
            let num = |i: usize| r[i].parse::<f64>().map_err(|e| bad(format!("column {i}: {e}")));
            let int = |i: usize| r[i].parse::<u64>().map_err(|e| bad(format!("column {i}: {e}")));
            let spec = ProblemSpec::new(int(0)? as u32, int(1)? as u32, int(2)? as usize);
            let solver: SolverName = r[3].parse()?;
            cells.insert(
                (spec, solver, int(4)?),
                PerfCell { aggregated_precision: num(5)?, log_precision: num(6)? },
            );
        }
        Ok(PerformanceTable { cells })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestLabel {
    pub best_solver: SolverName,
    pub was_tie: bool,
}

/// Argmin of the row group; ties broken by a uniform draw from `stream`
/// among the tied solvers (in group order).
pub fn label_best(group: &[(SolverName, f64)], stream: &RngStream) -> Result<BestLabel> {
    let min = group
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let tied: Vec<SolverName> = group.iter().filter(|(_, v)| *v == min).map(|(s, _)| *s).collect();
    match tied.len() {
        0 => Err(Error::InvalidPerformance("empty row group".into())),
        1 => Ok(BestLabel { best_solver: tied[0], was_tie: false }),
        k => {
            let pick = stream.rng().random_range(0..k);
            Ok(BestLabel { best_solver: tied[pick], was_tie: true })
        }
    }
}

/// Stream for the tie-break of one row.
pub fn label_stream(root: &RngStream, spec: &ProblemSpec, budget: u64) -> RngStream {
    root.derive(spec.to_string()).derive(format!("b{budget}"))
}

pub type LabelKey = (ProblemSpec, u64);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BestLabelTable {
    labels: BTreeMap<LabelKey, BestLabel>,
}

impl BestLabelTable {
    pub fn from_performance(table: &PerformanceTable, solvers: &[SolverName], root: &RngStream) -> Result<Self> {
        let mut labels = BTreeMap::new();
        for spec in table.specs() {
            for budget in table.budgets() {
                let group = table.row_group(&spec, budget, solvers)?;
                labels.insert((spec, budget), label_best(&group, &label_stream(root, &spec, budget))?);
            }
        }
        Ok(BestLabelTable { labels })
    }

    pub fn insert(&mut self, spec: ProblemSpec, budget: u64, label: BestLabel) {
        self.labels.insert((spec, budget), label);
    }

    pub fn get(&self, spec: &ProblemSpec, budget: u64) -> Option<&BestLabel> {
        self.labels.get(&(*spec, budget))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&LabelKey, &BestLabel)> {
        self.labels.iter()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "function_id,instance_id,dimension,budget,best_solver,was_tie").unwrap();
        for ((spec, budget), label) in &self.labels {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                spec.function_id, spec.instance_id, spec.dimension, budget, label.best_solver, label.was_tie
            )
            .unwrap();
        }
        crate::fmt::write_file(path, &out)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let bad = |detail: String| Error::SchemaMismatch { path: path.to_owned(), detail };
        let mut labels = BTreeMap::new();
        for record in reader.records() {
            let r = record.map_err(|e| Error::csv(path, e))?;
            if r.len() != 6 {
                return Err(bad(format!("expected 6 columns, found {}", r.len())));
            }
            let int = |i: usize| r[i].parse::<u64>().map_err(|e| bad(format!("column {i}: {e}")));
            let spec = ProblemSpec::new(int(0)? as u32, int(1)? as u32, int(2)? as usize);
            let was_tie = r[5].parse::<bool>().map_err(|e| bad(format!("column 5: {e}")))?;
            labels.insert((spec, int(3)?), BestLabel { best_solver: r[4].parse()?, was_tie });
        }
        Ok(BestLabelTable { labels })
    }
}

/// Result of the complementarity filter for one (dimension, budget) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortfolioEntry {
    pub dimension: usize,
    pub budget: u64,
    pub solvers: Vec<SolverName>,
    /// Set when no solver cleared the threshold and the top winner was kept.
    pub fallback: bool,
}

/// Keeps solvers whose share of wins is strictly above `threshold`, in
/// `configured` order. Ties use the post-tie-break label.
pub fn filter_portfolio(
    labels: &BestLabelTable,
    dimension: usize,
    budget: u64,
    threshold: f64,
    configured: &[SolverName],
) -> Result<PortfolioEntry> {
    let mut wins: BTreeMap<SolverName, usize> = BTreeMap::new();
    let mut total = 0usize;
    for ((spec, b), label) in labels.iter() {
        if spec.dimension == dimension && *b == budget {
            *wins.entry(label.best_solver).or_default() += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::InvalidPerformance(format!("no labels for d={dimension}, budget {budget}")));
    }
    let count = |s: &SolverName| wins.get(s).copied().unwrap_or(0);
    let kept: Vec<SolverName> = configured
        .iter()
        .copied()
        .filter(|s| count(s) as f64 / total as f64 > threshold)
        .collect();
    if !kept.is_empty() {
        return Ok(PortfolioEntry { dimension, budget, solvers: kept, fallback: false });
    }
    let top = configured
        .iter()
        .copied()
        .max_by(|a, b| count(a).cmp(&count(b)).then(b.cmp(a)))
        .ok_or_else(|| Error::InvalidPerformance("no configured solvers".into()))?;
    warn!("no solver wins more than {threshold} of instances at d={dimension}, budget {budget}; keeping {top}");
    Ok(PortfolioEntry { dimension, budget, solvers: vec![top], fallback: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use SolverName::*;

    #[test]
    fn capping() {
        assert_eq!(cap_and_log(1e-12).unwrap(), -8.0);
        assert_eq!(cap_and_log(0.0).unwrap(), -8.0);
        assert_eq!(cap_and_log(1.0).unwrap(), 0.0);
        assert!(cap_and_log(-1e-3).is_err());
        assert!(cap_and_log(f64::NAN).is_err());
    }

    #[test]
    fn lower_median() {
        assert_eq!(aggregate_runs(&[1e-3]).unwrap(), 1e-3);
        assert_eq!(aggregate_runs(&[0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(aggregate_runs(&[1.0, 1e-2, 1e-8, 1e-4]).unwrap(), 1e-4);
        assert!(aggregate_runs(&[]).is_err());
    }

    #[test]
    fn labels() {
        let s = RngStream::new(1);
        assert_eq!(
            label_best(&[(De, -8.0), (Pso, -2.0)], &s).unwrap(),
            BestLabel { best_solver: De, was_tie: false }
        );
        assert_eq!(label_best(&[(Pso, 3.0)], &s).unwrap().best_solver, Pso);
        let tie = label_best(&[(De, -8.0), (Pso, -8.0)], &s).unwrap();
        assert!(tie.was_tie);
        assert_eq!(label_best(&[(De, -8.0), (Pso, -8.0)], &s).unwrap(), tie);
    }

    fn synthetic_labels(winner_counts: &[(SolverName, usize)]) -> BestLabelTable {
        let mut table = BestLabelTable::default();
        let mut k = 0u32;
        for (solver, n) in winner_counts {
            for _ in 0..*n {
                let spec = ProblemSpec::new(k / 10 + 1, k % 10 + 1, 5);
                table.insert(spec, 100, BestLabel { best_solver: *solver, was_tie: false });
                k += 1;
            }
        }
        table
    }

    #[test]
    fn strict_threshold() {
        let labels = synthetic_labels(&[(De, 12), (Pso, 13), (SimpleCma, 215)]);
        let entry = filter_portfolio(&labels, 5, 100, 0.05, &SolverName::ALL).unwrap();
        assert_eq!(entry.solvers, vec![Pso, SimpleCma]);
        assert!(!entry.fallback);
    }

    #[test]
    fn single_dominant_solver() {
        let labels = synthetic_labels(&[(De, 240)]);
        let entry = filter_portfolio(&labels, 5, 100, 0.05, &SolverName::ALL).unwrap();
        assert_eq!(entry.solvers, vec![De]);
        // nobody clears a threshold of 1: fall back to the most frequent winner
        let entry = filter_portfolio(&labels, 5, 100, 1.0, &SolverName::ALL).unwrap();
        assert_eq!(entry.solvers, vec![De]);
        assert!(entry.fallback);
    }
}
