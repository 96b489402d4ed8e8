//! VBS/SBS baselines, per-instance losses and report emission.
//!
//! Loss is `log_precision(selected) - log_precision(vbs)` on capped logs, so
//! a selected precision of 1e-10 against a VBS at 0 is a loss of 0. A hit
//! is any loss-0 selection, which counts tie-equivalent solvers as hits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ela::stats::quantile_sorted;
use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::learners::LearnerKind;
use crate::perfdata::PerformanceTable;
use crate::problems::ProblemSpec;
use crate::selection::Approach;
use crate::solvers::SolverName;

/// Whisker reach in interquartile ranges.
pub const WHISKER_IQR: f64 = 1.5;

/// Best solvers of one instance within `portfolio`, and their log-precision.
pub fn vbs(table: &PerformanceTable, spec: &ProblemSpec, budget: u64, portfolio: &[SolverName]) -> Result<(Vec<SolverName>, f64)> {
    if portfolio.is_empty() {
        return Err(Error::Evaluation("empty portfolio".into()));
    }
    let group = table.row_group(spec, budget, portfolio)?;
    let best = group.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    Ok((group.iter().filter(|(_, v)| *v == best).map(|(s, _)| *s).collect(), best))
}

/// Solver with the lowest mean log-precision over the dimension's
/// instances; earliest in portfolio order on ties.
pub fn sbs(table: &PerformanceTable, budget: u64, dimension: usize, portfolio: &[SolverName]) -> Result<SolverName> {
    let specs = table.specs_in_dimension(dimension);
    if specs.is_empty() || portfolio.is_empty() {
        return Err(Error::Evaluation(format!("nothing to rank at d={dimension}, budget {budget}")));
    }
    let mut best: Option<(SolverName, f64)> = None;
    for &s in portfolio {
        let mut total = 0.0;
        for spec in &specs {
            total += table.log_precision(spec, s, budget)?;
        }
        let mean = total / specs.len() as f64;
        if best.is_none_or(|(_, b)| mean < b) {
            best = Some((s, mean));
        }
    }
    Ok(best.expect("non-empty portfolio").0)
}

/// Loss of `selected` against the portfolio VBS, clamped at 0.
pub fn loss(selected: SolverName, spec: &ProblemSpec, budget: u64, table: &PerformanceTable, portfolio: &[SolverName]) -> Result<f64> {
    if !portfolio.contains(&selected) {
        return Err(Error::Evaluation(format!("{selected} is not in the portfolio")));
    }
    let (_, best) = vbs(table, spec, budget, portfolio)?;
    let l = table.log_precision(spec, selected, budget)? - best;
    Ok(l.max(0.0))
}

/// Type-7 quartiles plus Tukey whiskers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Smallest value within `q1 - 1.5 IQR`.
    pub whisker_low: f64,
    /// Largest value within `q3 + 1.5 IQR`.
    pub whisker_high: f64,
    pub mean: f64,
    pub outliers: Vec<f64>,
}

impl LossSummary {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Evaluation("no losses to summarize".into()));
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        let (q1, median, q3) = (quantile_sorted(&s, 0.25), quantile_sorted(&s, 0.5), quantile_sorted(&s, 0.75));
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr);
        let inside: Vec<f64> = s.iter().copied().filter(|v| *v >= lo && *v <= hi).collect();
        Ok(LossSummary {
            n: s.len(),
            q1,
            median,
            q3,
            whisker_low: inside.first().copied().unwrap_or(q1),
            whisker_high: inside.last().copied().unwrap_or(q3),
            mean: s.iter().sum::<f64>() / s.len() as f64,
            outliers: s.iter().copied().filter(|v| *v < lo || *v > hi).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceLoss {
    pub spec: ProblemSpec,
    pub selected: SolverName,
    pub loss: f64,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub approach: Approach,
    pub learner: LearnerKind,
    pub dimension: usize,
    pub budget: u64,
    pub portfolio: Vec<SolverName>,
    pub instances: Vec<InstanceLoss>,
    pub summary: LossSummary,
    pub vbs_hit_rate: f64,
    pub sbs: SolverName,
    pub sbs_mean_loss: f64,
    /// Loss distribution of each portfolio solver used alone.
    pub solver_losses: Vec<(SolverName, LossSummary)>,
}

/// Scores out-of-fold selections, which must cover every instance of the
/// dimension exactly once.
pub fn evaluate_selector(
    approach: Approach,
    learner: LearnerKind,
    dimension: usize,
    budget: u64,
    portfolio: &[SolverName],
    selections: &[(ProblemSpec, SolverName)],
    table: &PerformanceTable,
) -> Result<EvaluationReport> {
    let specs = table.specs_in_dimension(dimension);
    let chosen: BTreeMap<ProblemSpec, SolverName> = selections.iter().copied().collect();
    if chosen.len() != selections.len() || chosen.keys().copied().collect::<Vec<_>>() != specs {
        return Err(Error::Evaluation(format!(
            "selections cover {} of {} instances at d={dimension}, budget {budget}",
            chosen.keys().filter(|s| specs.contains(s)).count(),
            specs.len()
        )));
    }
    let mut instances = Vec::with_capacity(specs.len());
    for spec in &specs {
        let selected = chosen[spec];
        let l = loss(selected, spec, budget, table, portfolio)?;
        instances.push(InstanceLoss { spec: *spec, selected, loss: l, hit: l == 0.0 });
    }
    let losses: Vec<f64> = instances.iter().map(|i| i.loss).collect();
    let solver_losses = portfolio
        .iter()
        .map(|&s| {
            let l = specs.iter().map(|spec| loss(s, spec, budget, table, portfolio)).collect::<Result<Vec<_>>>()?;
            Ok((s, LossSummary::new(&l)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let sbs_name = sbs(table, budget, dimension, portfolio)?;
    let sbs_mean_loss = solver_losses.iter().find(|(s, _)| *s == sbs_name).expect("sbs in portfolio").1.mean;
    Ok(EvaluationReport {
        approach,
        learner,
        dimension,
        budget,
        portfolio: portfolio.to_vec(),
        vbs_hit_rate: instances.iter().filter(|i| i.hit).count() as f64 / instances.len() as f64,
        summary: LossSummary::new(&losses)?,
        instances,
        sbs: sbs_name,
        sbs_mean_loss,
        solver_losses,
    })
}

const REPORT_README: &str = "\
# Evaluation report

Losses are log10 target precision of the selected solver minus that of the
per-instance best solver in the filtered portfolio (the VBS), computed on
precisions capped at 1e-8. Every selector loss comes from outer-fold
predictions of nested leave-one-group-out cross-validation. A VBS hit is any
selection with loss 0, so tie-equivalent solvers count as hits.

## boxplot_<dim>_<budget>.csv

One row per series. Series `<learner>/<approach>` are the trained
selectors; `solver/<name>` is a portfolio solver used on every instance.

| column | meaning |
|---|---|
| series | selector or standalone solver |
| n | number of instances |
| whisker_low, whisker_high | most extreme losses within 1.5 IQR of the quartiles |
| q1, median, q3 | quartiles, linear interpolation between order statistics |
| mean | mean loss |
| outliers | losses beyond the whiskers, ascending, `;`-separated |

## heatmap.csv

Rows are (dimension, budget) cells with the filtered portfolio size `k` and
the single best solver `sbs`. Each remaining column `<learner>_<approach>`
holds the percentage of instances where the selector picked a VBS solver.
Empty cells were not evaluated.

## summary.txt

Human-readable table of mean loss, median loss and VBS-hit percentage per
cell and selector, next to the single best solver's mean loss (the gap
between the VBS, whose loss is 0, and the SBS).
";

fn boxplot_row(out: &mut Vec<u8>, series: &str, s: &LossSummary) {
    let outliers: Vec<String> = s.outliers.iter().map(|v| sci(*v)).collect();
    writeln!(
        out,
        "{series},{},{},{},{},{},{},{},{}",
        s.n,
        sci(s.whisker_low),
        sci(s.q1),
        sci(s.median),
        sci(s.q3),
        sci(s.whisker_high),
        sci(s.mean),
        outliers.join(";")
    )
    .unwrap();
}

/// Writes `boxplot_<dim>_<budget>.csv`, `heatmap.csv`, `summary.txt` and a
/// README into `dir`. Column order follows `learners` then `approaches`.
pub fn emit_reports(dir: &Path, reports: &[EvaluationReport], learners: &[LearnerKind], approaches: &[Approach]) -> Result<Vec<PathBuf>> {
    let mut cells: BTreeMap<(usize, u64), Vec<&EvaluationReport>> = BTreeMap::new();
    for r in reports {
        cells.entry((r.dimension, r.budget)).or_default().push(r);
    }
    let find = |list: &[&'_ EvaluationReport], l: LearnerKind, a: Approach| -> Option<usize> {
        list.iter().position(|r| r.learner == l && r.approach == a)
    };
    let mut written = Vec::new();

    for ((dim, budget), list) in &cells {
        let mut out = Vec::new();
        writeln!(out, "series,n,whisker_low,q1,median,q3,whisker_high,mean,outliers").unwrap();
        for &l in learners {
            for &a in approaches {
                if let Some(i) = find(list, l, a) {
                    boxplot_row(&mut out, &format!("{l}/{a}"), &list[i].summary);
                }
            }
        }
        let mut solvers: BTreeSet<SolverName> = BTreeSet::new();
        for (s, summary) in &list[0].solver_losses {
            if solvers.insert(*s) {
                boxplot_row(&mut out, &format!("solver/{s}"), summary);
            }
        }
        let path = dir.join(format!("boxplot_{dim}_{budget}.csv"));
        crate::fmt::write_file(&path, &out)?;
        written.push(path);
    }

    let mut out = Vec::new();
    write!(out, "dimension,budget,k,sbs").unwrap();
    for &l in learners {
        for &a in approaches {
            write!(out, ",{l}_{a}").unwrap();
        }
    }
    writeln!(out).unwrap();
    for ((dim, budget), list) in &cells {
        write!(out, "{dim},{budget},{},{}", list[0].portfolio.len(), list[0].sbs).unwrap();
        for &l in learners {
            for &a in approaches {
                match find(list, l, a) {
                    Some(i) => write!(out, ",{:.1}", 100.0 * list[i].vbs_hit_rate).unwrap(),
                    None => write!(out, ",").unwrap(),
                }
            }
        }
        writeln!(out).unwrap();
    }
    let path = dir.join("heatmap.csv");
    crate::fmt::write_file(&path, &out)?;
    written.push(path);

    let mut text = String::new();
    for ((dim, budget), list) in &cells {
        let first = list[0];
        writeln!(
            text,
            "d={dim} budget={budget} k={} portfolio=[{}] sbs={} sbs_mean_loss={:.4}",
            first.portfolio.len(),
            first.portfolio.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
            first.sbs,
            first.sbs_mean_loss
        )
        .unwrap();
        writeln!(text, "  {:<24} {:>10} {:>12} {:>8}", "selector", "mean_loss", "median_loss", "vbs_hit%").unwrap();
        for &l in learners {
            for &a in approaches {
                if let Some(i) = find(list, l, a) {
                    let r = list[i];
                    writeln!(
                        text,
                        "  {:<24} {:>10.4} {:>12.4} {:>8.1}",
                        format!("{l}/{a}"),
                        r.summary.mean,
                        r.summary.median,
                        100.0 * r.vbs_hit_rate
                    )
                    .unwrap();
                }
            }
        }
        writeln!(text).unwrap();
    }
    let path = dir.join("summary.txt");
    crate::fmt::write_file(&path, text.as_bytes())?;
    written.push(path);

    let path = dir.join("README.md");
    crate::fmt::write_file(&path, REPORT_README.as_bytes())?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SolverName::*;

    fn table(rows: &[(u32, f64, f64)]) -> PerformanceTable {
        let mut t = PerformanceTable::default();
        for &(f, a, b) in rows {
            let spec = ProblemSpec::new(f, 1, 2);
            t.insert(spec, De, 100, 10f64.powf(a), 1e-8).unwrap();
            t.insert(spec, Pso, 100, 10f64.powf(b), 1e-8).unwrap();
        }
        t
    }

    #[test]
    fn baselines() {
        let t = table(&[(1, -8.0, 0.0), (2, -5.0, -5.0)]);
        let spec = ProblemSpec::new(1, 1, 2);
        assert_eq!(vbs(&t, &spec, 100, &[De, Pso]).unwrap(), (vec![De], -8.0));
        assert_eq!(vbs(&t, &ProblemSpec::new(2, 1, 2), 100, &[De, Pso]).unwrap().0, vec![De, Pso]);
        assert_eq!(vbs(&t, &spec, 100, &[Pso]).unwrap().0, vec![Pso]);
        // means: De (-8 - 5)/2, Pso (0 - 5)/2
        assert_eq!(sbs(&t, 100, 2, &[De, Pso]).unwrap(), De);
        let t2 = table(&[(1, -8.0, -5.0), (2, 0.0, -5.0)]);
        assert_eq!(sbs(&t2, 100, 2, &[De, Pso]).unwrap(), Pso);
        let same = table(&[(1, -3.0, -3.0)]);
        assert_eq!(sbs(&same, 100, 2, &[Pso, De]).unwrap(), Pso);
        assert!((loss(Pso, &spec, 100, &t, &[De, Pso]).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_box() {
        let s = LossSummary::new(&[0.0; 7]).unwrap();
        assert_eq!((s.whisker_low, s.q1, s.median, s.q3, s.whisker_high, s.mean), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        assert!(s.outliers.is_empty());
        let s = LossSummary::new(&[0.0, 0.0, 0.0, 0.0, 9.0]).unwrap();
        assert_eq!(s.outliers, vec![9.0]);
        assert_eq!(s.whisker_high, 0.0);
    }

    #[test]
    fn coverage_is_checked() {
        let t = table(&[(1, -8.0, 0.0), (2, -5.0, -5.0)]);
        let partial = [(ProblemSpec::new(1, 1, 2), De)];
        assert!(evaluate_selector(Approach::Regression, LearnerKind::Forest, 2, 100, &[De, Pso], &partial, &t).is_err());
        let full = [(ProblemSpec::new(1, 1, 2), De), (ProblemSpec::new(2, 1, 2), Pso)];
        let r = evaluate_selector(Approach::Regression, LearnerKind::Forest, 2, 100, &[De, Pso], &full, &t).unwrap();
        assert_eq!(r.vbs_hit_rate, 1.0);
        assert_eq!(r.summary.mean, 0.0);
        assert_eq!(r.sbs, De);
    }
}
