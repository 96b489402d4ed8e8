//! Instrumented black-box minimizers.
//!
//! | solver | update rule | hyperparameters (defaults) |
//! |--------|-------------|----------------------------|
//! | `random_search` | uniform draws in the domain | none |
//! | `one_plus_one_es` | Gaussian mutation, 1/5th success rule every `period · d` evaluations | `sigma0` 2, `adapt_period_per_dim` 10, `success_target` 0.2, `step_exponent` 1/3 |
//! | `de` | rand/1/bin, generational | `population_per_dim` 10, `f` 0.5, `cr` 0.9 |
//! | `pso` | global best, inertia weight, velocity clamp | `swarm_size` 40, `inertia` 0.72, `cognitive` 1.49, `social` 1.49, `velocity_clamp_fraction` 0.5 |
//! | `nelder_mead_restart` | reflection/expansion/contraction/shrink, restart below a simplex diameter | `reflection` 1, `expansion` 2, `contraction` 0.5, `shrink` 0.5, `initial_step` 1, `restart_diameter` 1e-12 |
//! | `simple_cma` | (μ/μ_w, λ)-CMA-ES, rank-one + rank-μ, CSA, restarts | `sigma0` 2, `lambda` 0 (= 4 + ⌊3 ln d⌋) |
//!
//! All solvers clamp candidates to the domain and stop as soon as a zero
//! precision is reached.

mod cma;
mod nelder_mead;
mod population;
mod simple;
pub mod tracker;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::problems::{ProblemInstance, ProblemSpec};
use crate::sampling::RngStream;
use tracker::Tracker;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    RandomSearch,
    OnePlusOneEs,
    De,
    Pso,
    NelderMeadRestart,
    SimpleCma,
}

impl SolverName {
    pub const ALL: [SolverName; 6] = [
        SolverName::RandomSearch,
        SolverName::OnePlusOneEs,
        SolverName::De,
        SolverName::Pso,
        SolverName::NelderMeadRestart,
        SolverName::SimpleCma,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverName::RandomSearch => "random_search",
            SolverName::OnePlusOneEs => "one_plus_one_es",
            SolverName::De => "de",
            SolverName::Pso => "pso",
            SolverName::NelderMeadRestart => "nelder_mead_restart",
            SolverName::SimpleCma => "simple_cma",
        }
    }

    pub fn defaults(&self) -> &'static [(&'static str, f64)] {
        match self {
            SolverName::RandomSearch => &[],
            SolverName::OnePlusOneEs => &[
                ("sigma0", 2.0),
                ("adapt_period_per_dim", 10.0),
                ("success_target", 0.2),
                ("step_exponent", 1.0 / 3.0),
            ],
            SolverName::De => &[("population_per_dim", 10.0), ("f", 0.5), ("cr", 0.9)],
            SolverName::Pso => &[
                ("swarm_size", 40.0),
                ("inertia", 0.72),
                ("cognitive", 1.49),
                ("social", 1.49),
                ("velocity_clamp_fraction", 0.5),
            ],
            SolverName::NelderMeadRestart => &[
                ("reflection", 1.0),
                ("expansion", 2.0),
                ("contraction", 0.5),
                ("shrink", 0.5),
                ("initial_step", 1.0),
                ("restart_diameter", 1e-12),
            ],
            SolverName::SimpleCma => &[("sigma0", 2.0), ("lambda", 0.0)],
        }
    }
}

impl fmt::Display for SolverName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::SolverConfig(format!("unknown solver `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub name: String,
    #[serde(default)]
    pub hyperparameters: BTreeMap<String, f64>,
}

impl SolverConfig {
    pub fn new(name: SolverName) -> Self {
        SolverConfig { name: name.as_str().to_owned(), hyperparameters: BTreeMap::new() }
    }

    pub fn solver(&self) -> Result<SolverName> {
        self.name.parse()
    }

    /// Defaults overlaid with the configured values; unknown keys are errors.
    pub fn resolve(&self) -> Result<Params> {
        let name = self.solver()?;
        let mut values: BTreeMap<&'static str, f64> = name.defaults().iter().copied().collect();
        for (k, v) in &self.hyperparameters {
            let Some(slot) = values.iter_mut().find(|(key, _)| **key == k.as_str()) else {
                return Err(Error::SolverConfig(format!("`{k}` is not a hyperparameter of {name}")));
            };
            if !v.is_finite() {
                return Err(Error::SolverConfig(format!("{name}.{k} must be finite")));
            }
            *slot.1 = *v;
        }
        Ok(Params { name, values })
    }
}

/// Fully resolved hyperparameters of one solver.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub name: SolverName,
    values: BTreeMap<&'static str, f64>,
}

impl Params {
    fn get(&self, key: &str) -> f64 {
        self.values[key]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrajectory {
    pub solver: SolverName,
    pub problem: ProblemSpec,
    pub repetition: u32,
    pub seed_path: String,
    /// `(budget, best-so-far precision)` in increasing budget order.
    pub checkpoints: Vec<(u64, f64)>,
    pub evaluations: u64,
}

impl RunTrajectory {
    pub fn precision_at(&self, budget: u64) -> Option<f64> {
        self.checkpoints.iter().find(|(b, _)| *b == budget).map(|(_, p)| *p)
    }
}

fn validate_checkpoints(checkpoints: &[u64], max_budget: u64) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidCheckpoints("empty checkpoint set".into()));
    }
    if checkpoints[0] == 0 {
        return Err(Error::InvalidCheckpoints("checkpoint 0".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidCheckpoints("checkpoints must be strictly increasing".into()));
    }
    if *checkpoints.last().unwrap() > max_budget {
        return Err(Error::InvalidCheckpoints(format!(
            "checkpoint {} exceeds max budget {max_budget}",
            checkpoints.last().unwrap()
        )));
    }
    Ok(())
}

/// Runs one solver for `max(checkpoints)` evaluations (fewer on reaching a
/// zero precision).
pub fn run_solver(
    config: &SolverConfig,
    instance: &ProblemInstance,
    max_budget: u64,
    checkpoints: &[u64],
    stream: &RngStream,
) -> Result<RunTrajectory> {
    run_solver_from(config, instance, max_budget, checkpoints, stream, None, 0)
}

/// As [`run_solver`], optionally evaluating `start` before the solver's own
/// first point, and tagging the trajectory with `repetition`.
pub fn run_solver_from(
    config: &SolverConfig,
    instance: &ProblemInstance,
    max_budget: u64,
    checkpoints: &[u64],
    stream: &RngStream,
    start: Option<&[f64]>,
    repetition: u32,
) -> Result<RunTrajectory> {
    let params = config.resolve()?;
    validate_checkpoints(checkpoints, max_budget)?;
    let mut rng = stream.rng();
    let mut t = Tracker::new(instance, checkpoints);
    if let Some(x) = start {
        t.eval(x)?;
    }
    match params.name {
        SolverName::RandomSearch => simple::random_search(&mut t, &params, &mut rng)?,
        SolverName::OnePlusOneEs => simple::one_plus_one_es(&mut t, &params, &mut rng)?,
        SolverName::De => population::de(&mut t, &params, &mut rng)?,
        SolverName::Pso => population::pso(&mut t, &params, &mut rng)?,
        SolverName::NelderMeadRestart => nelder_mead::nelder_mead_restart(&mut t, &params, &mut rng)?,
        SolverName::SimpleCma => cma::simple_cma(&mut t, &params, &mut rng)?,
    }
    let (values, evaluations) = t.finish();
    Ok(RunTrajectory {
        solver: params.name,
        problem: instance.spec,
        repetition,
        seed_path: stream.path_string(),
        checkpoints: checkpoints.iter().copied().zip(values).collect(),
        evaluations,
    })
}

/// Stream of one run: `root / solver / f{f}_i{i}_d{d} / rep{r}`.
pub fn run_stream(root: &RngStream, solver: SolverName, spec: &ProblemSpec, repetition: u32) -> RngStream {
    root.derive(solver.as_str()).derive(spec.to_string()).derive(format!("rep{repetition}"))
}

/// Every (solver, instance, repetition) run, in that key order. The result is
/// independent of the rayon pool size.
pub fn run_grid(
    configs: &[SolverConfig],
    instances: &[ProblemInstance],
    repetitions: u32,
    checkpoints: &[u64],
    root: &RngStream,
) -> Result<Vec<RunTrajectory>> {
    let max_budget = *checkpoints.last().ok_or_else(|| Error::InvalidCheckpoints("empty".into()))?;
    let mut units = Vec::new();
    for config in configs {
        let name = config.solver()?;
        for inst in instances {
            for rep in 0..repetitions {
                units.push((config, name, inst, rep));
            }
        }
    }
    let mut runs = units
        .into_par_iter()
        .map(|(config, name, inst, rep)| {
            let stream = run_stream(root, name, &inst.spec, rep);
            run_solver_from(config, inst, max_budget, checkpoints, &stream, None, rep)
        })
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| (a.solver, a.problem, a.repetition).cmp(&(b.solver, b.problem, b.repetition)));
    Ok(runs)
}

/// One row per checkpoint; `evaluations` repeats the run's total count.
pub fn write_trajectories(path: &Path, runs: &[RunTrajectory]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "solver,function_id,instance_id,dimension,repetition,budget,precision,evaluations,seed_path").unwrap();
    for run in runs {
        for (budget, p) in &run.checkpoints {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                run.solver,
                run.problem.function_id,
                run.problem.instance_id,
                run.problem.dimension,
                run.repetition,
                budget,
                sci(*p),
                run.evaluations,
                run.seed_path
            )
            .unwrap();
        }
    }
    crate::fmt::write_file(path, &out)
}

pub fn read_trajectories(path: &Path) -> Result<Vec<RunTrajectory>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let bad = |detail: String| Error::SchemaMismatch { path: path.to_owned(), detail };
    let mut runs: Vec<RunTrajectory> = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| Error::csv(path, e))?;
        if r.len() != 9 {
            return Err(bad(format!("expected 9 columns, found {}", r.len())));
        }
        let int = |i: usize| r[i].parse::<u64>().map_err(|e| bad(format!("column {i}: {e}")));
        let solver: SolverName = r[0].parse()?;
        let problem = ProblemSpec::new(int(1)? as u32, int(2)? as u32, int(3)? as usize);
        let repetition = int(4)? as u32;
        let point = (int(5)?, r[6].parse::<f64>().map_err(|e| bad(format!("column 6: {e}")))?);
        match runs.last_mut() {
            Some(run) if run.solver == solver && run.problem == problem && run.repetition == repetition => {
                run.checkpoints.push(point)
            }
            _ => runs.push(RunTrajectory {
                solver,
                problem,
                repetition,
                seed_path: r[8].to_owned(),
                checkpoints: vec![point],
                evaluations: int(7)?,
            }),
        }
    }
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::instantiate;

    fn sphere(d: usize, i: u32) -> ProblemInstance {
        instantiate(ProblemSpec::new(1, i, d)).unwrap()
    }

    #[test]
    fn unknown_solver_and_key_rejected() {
        let bad = SolverConfig { name: "hill_climber".into(), hyperparameters: BTreeMap::new() };
        assert!(matches!(bad.resolve(), Err(Error::SolverConfig(_))));
        let mut cfg = SolverConfig::new(SolverName::De);
        cfg.hyperparameters.insert("inertia".into(), 0.5);
        assert!(matches!(cfg.resolve(), Err(Error::SolverConfig(_))));
        cfg.hyperparameters.clear();
        cfg.hyperparameters.insert("f".into(), 0.7);
        assert_eq!(cfg.resolve().unwrap().get("f"), 0.7);
    }

    #[test]
    fn checkpoint_validation() {
        let inst = sphere(2, 1);
        let cfg = SolverConfig::new(SolverName::RandomSearch);
        let s = RngStream::new(1);
        assert!(matches!(run_solver(&cfg, &inst, 10, &[0, 5], &s), Err(Error::InvalidCheckpoints(_))));
        assert!(matches!(run_solver(&cfg, &inst, 10, &[], &s), Err(Error::InvalidCheckpoints(_))));
        assert!(matches!(run_solver(&cfg, &inst, 10, &[5, 20], &s), Err(Error::InvalidCheckpoints(_))));
    }

    #[test]
    fn random_search_is_monotone() {
        let inst = sphere(2, 0);
        let cfg = SolverConfig::new(SolverName::RandomSearch);
        let run = run_solver(&cfg, &inst, 100, &[10, 100], &RngStream::new(4)).unwrap();
        assert!(run.checkpoints[1].1 <= run.checkpoints[0].1);
        assert_eq!(run.evaluations, 100);
    }

    #[test]
    fn injected_optimum_stops_immediately() {
        for name in SolverName::ALL {
            let inst = instantiate(ProblemSpec::new(10, 2, 3)).unwrap();
            let cfg = SolverConfig::new(name);
            let run = run_solver_from(&cfg, &inst, 500, &[50, 500], &RngStream::new(9), Some(&inst.x_opt), 0).unwrap();
            assert_eq!(run.checkpoints, vec![(50, 0.0), (500, 0.0)], "{name}");
            assert_eq!(run.evaluations, 1);
        }
    }

    #[test]
    fn identical_inputs_identical_runs() {
        let inst = instantiate(ProblemSpec::new(15, 3, 2)).unwrap();
        for name in SolverName::ALL {
            let cfg = SolverConfig::new(name);
            let s = RngStream::new(21).derive(name.as_str());
            let a = run_solver(&cfg, &inst, 300, &[100, 300], &s).unwrap();
            let b = run_solver(&cfg, &inst, 300, &[100, 300], &s).unwrap();
            assert_eq!(a, b);
        }
    }
}
