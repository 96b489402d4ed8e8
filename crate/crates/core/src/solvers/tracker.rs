use crate::error::Result;
use crate::problems::{EvaluationBudgetCounter, ProblemInstance};
use crate::sampling::Bounds;

/// Numerical slack below zero that is clamped to a zero precision.
pub const PRECISION_SLACK: f64 = 1e-12;

/// Counted objective that records best-so-far precision at checkpoints and
/// signals solvers to stop once the budget is spent or the optimum is hit.
pub struct Tracker<'a> {
    instance: &'a ProblemInstance,
    counter: EvaluationBudgetCounter,
    checkpoints: &'a [u64],
    next: usize,
    best: f64,
    best_x: Vec<f64>,
    recorded: Vec<f64>,
}

impl<'a> Tracker<'a> {
    pub fn new(instance: &'a ProblemInstance, checkpoints: &'a [u64]) -> Self {
        let limit = *checkpoints.last().expect("checkpoints validated non-empty");
        Tracker {
            instance,
            counter: EvaluationBudgetCounter::new(limit),
            checkpoints,
            next: 0,
            best: f64::INFINITY,
            best_x: Vec::new(),
            recorded: Vec::with_capacity(checkpoints.len()),
        }
    }

    pub fn dimension(&self) -> usize {
        self.instance.dimension()
    }

    pub fn domain(&self) -> &Bounds {
        &self.instance.domain
    }

    pub fn done(&self) -> bool {
        self.next == self.checkpoints.len()
    }

    pub fn used(&self) -> u64 {
        self.counter.used()
    }

    pub fn best_precision(&self) -> f64 {
        self.best
    }

    pub fn best_x(&self) -> &[f64] {
        &self.best_x
    }

    /// Objective value at `x`, or `None` when the solver must stop.
    pub fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.done() {
            return Ok(None);
        }
        let f = self.instance.evaluate(x, &mut self.counter)?;
        let mut p = self.instance.precision(f);
        if p < 0.0 {
            debug_assert!(p >= -PRECISION_SLACK, "precision {p} below slack");
            p = 0.0;
        }
        if p < self.best {
            self.best = p;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
        let used = self.counter.used();
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] == used {
            self.recorded.push(self.best);
            self.next += 1;
        }
        if self.best == 0.0 {
            // nothing left to improve: forward-fill the remaining checkpoints
            while self.next < self.checkpoints.len() {
                self.recorded.push(0.0);
                self.next += 1;
            }
        }
        Ok(Some(f))
    }

    pub fn finish(self) -> (Vec<f64>, u64) {
        debug_assert!(self.done());
        (self.recorded, self.counter.used())
    }
}
