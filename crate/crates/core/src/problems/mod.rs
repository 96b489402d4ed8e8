//! Benchmark suite: specs, seeded instancing, counted evaluation.

pub mod functions;

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sci;
use crate::sampling::{Bounds, RngStream};

pub use functions::{group_of, name_of, FunctionGroup, FUNCTION_COUNT};

/// Seed of the stream every instance is derived from. Independent of the
/// experiment seed: the suite is fixed.
pub const SUITE_SEED: u64 = 0x5eed_bb0b;

pub const DOMAIN_LOWER: f64 = -5.0;
pub const DOMAIN_UPPER: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub function_id: u32,
    pub instance_id: u32,
    pub dimension: usize,
}

impl ProblemSpec {
    pub fn new(function_id: u32, instance_id: u32, dimension: usize) -> Self {
        ProblemSpec { function_id, instance_id, dimension }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=FUNCTION_COUNT).contains(&self.function_id) {
            return Err(Error::InvalidSpec(format!("function_id {} outside 1..=24", self.function_id)));
        }
        if self.dimension < 2 {
            return Err(Error::InvalidSpec(format!("dimension {} < 2", self.dimension)));
        }
        Ok(())
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(SUITE_SEED).derive(format!(
            "f{}/i{}/d{}",
            self.function_id, self.instance_id, self.dimension
        ))
    }
}

impl std::fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "f{}_i{}_d{}", self.function_id, self.instance_id, self.dimension)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub spec: ProblemSpec,
    pub x_opt: Vec<f64>,
    pub f_opt: f64,
    /// Row-major `d × d` orthogonal matrix.
    pub rotation: Vec<f64>,
    pub domain: Bounds,
    pub aux: functions::BaseAux,
}

/// Counts evaluations against a hard limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationBudgetCounter {
    used: u64,
    limit: u64,
}

impl EvaluationBudgetCounter {
    pub fn new(limit: u64) -> Self {
        assert!(limit > 0, "budget limit must be positive");
        EvaluationBudgetCounter { used: 0, limit }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn remaining(&self) -> u64 {
        self.limit - self.used
    }

    pub fn consume(&mut self) -> Result<()> {
        if self.used >= self.limit {
            return Err(Error::BudgetExhausted { limit: self.limit });
        }
        self.used += 1;
        Ok(())
    }
}

/// Orthonormalizes the rows of a square matrix with two passes of modified
/// Gram-Schmidt.
fn orthonormalize(m: &mut [f64], d: usize) {
    for _pass in 0..2 {
        for i in 0..d {
            for k in 0..i {
                let dot: f64 = (0..d).map(|c| m[i * d + c] * m[k * d + c]).sum();
                for c in 0..d {
                    m[i * d + c] -= dot * m[k * d + c];
                }
            }
            let norm = (0..d).map(|c| m[i * d + c].powi(2)).sum::<f64>().sqrt();
            for c in 0..d {
                m[i * d + c] /= norm;
            }
        }
    }
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

/// Builds the instance for `spec`. Pure in `spec`.
///
/// Instance 0 is the untransformed base function. Other instances draw, from
/// the spec's stream and in this order: `x_opt` uniform in `[-4, 4]^d`,
/// `f_opt` uniform in `[-100, 100]`, a `d × d` standard normal matrix that is
/// orthonormalized into the rotation (drawn even for unrotated functions, then
/// replaced by the identity), and finally function-specific data.
pub fn instantiate(spec: ProblemSpec) -> Result<ProblemInstance> {
    spec.validate()?;
    let d = spec.dimension;
    let domain = Bounds::cube(d, DOMAIN_LOWER, DOMAIN_UPPER)?;
    let mut rng = spec.stream().rng();
    if spec.instance_id == 0 {
        let aux = functions::BaseAux::generate(spec.function_id, d, &mut rng);
        return Ok(ProblemInstance {
            spec,
            x_opt: vec![0.0; d],
            f_opt: 0.0,
            rotation: identity(d),
            domain,
            aux,
        });
    }
    let x_opt: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..=4.0)).collect();
    let f_opt = rng.random_range(-100.0..=100.0);
    let mut rotation: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    orthonormalize(&mut rotation, d);
    if !functions::is_rotated(spec.function_id) {
        rotation = identity(d);
    }
    let aux = functions::BaseAux::generate(spec.function_id, d, &mut rng);
    Ok(ProblemInstance { spec, x_opt, f_opt, rotation, domain, aux })
}

impl ProblemInstance {
    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    /// `f_opt + base(R (x - x_opt))` without touching any counter.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let d = self.dimension();
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: x.len() });
        }
        let shifted: Vec<f64> = x.iter().zip(&self.x_opt).map(|(a, b)| a - b).collect();
        let z: Vec<f64> = (0..d)
            .map(|i| {
                let row = &self.rotation[i * d..(i + 1) * d];
                row.iter().zip(&shifted).map(|(r, s)| r * s).sum()
            })
            .collect();
        Ok(self.f_opt + functions::base_value(self.spec.function_id, &z, &self.aux))
    }

    /// Counted evaluation. Points outside the domain are evaluated as-is.
    pub fn evaluate(&self, x: &[f64], counter: &mut EvaluationBudgetCounter) -> Result<f64> {
        if x.len() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), got: x.len() });
        }
        counter.consume()?;
        self.value(x)
    }

    pub fn precision(&self, f_value: f64) -> f64 {
        f_value - self.f_opt
    }

    /// Largest absolute entry of `R Rᵀ - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dimension();
        let r = &self.rotation;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let dot: f64 = (0..d).map(|c| r[i * d + c] * r[j * d + c]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Writes the suite manifest CSV (`function_id, instance_id, dimension, f_opt, x_opt`).
pub fn write_manifest(path: &Path, instances: &[ProblemInstance]) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "function_id,instance_id,dimension,f_opt,x_opt").unwrap();
    for inst in instances {
        let x_opt: Vec<String> = inst.x_opt.iter().map(|v| sci(*v)).collect();
        writeln!(
            out,
            "{},{},{},{},{}",
            inst.spec.function_id,
            inst.spec.instance_id,
            inst.spec.dimension,
            sci(inst.f_opt),
            x_opt.join(";")
        )
        .unwrap();
    }
    crate::fmt::write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_specs_rejected() {
        assert!(matches!(instantiate(ProblemSpec::new(0, 1, 5)), Err(Error::InvalidSpec(_))));
        assert!(matches!(instantiate(ProblemSpec::new(25, 1, 5)), Err(Error::InvalidSpec(_))));
        assert!(matches!(instantiate(ProblemSpec::new(3, 1, 1)), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn untransformed_sphere() {
        let inst = instantiate(ProblemSpec::new(1, 0, 5)).unwrap();
        let mut c = EvaluationBudgetCounter::new(10);
        assert_eq!(inst.evaluate(&[0.0; 5], &mut c).unwrap(), 0.0);
        assert_eq!(inst.evaluate(&[1.0; 5], &mut c).unwrap(), 5.0);
        assert_eq!(inst.precision(5.0), 5.0);
        assert_eq!(c.used(), 2);
    }

    #[test]
    fn precision_examples() {
        let inst = instantiate(ProblemSpec::new(7, 2, 3)).unwrap();
        assert_eq!(inst.precision(inst.f_opt), 0.0);
        let p = inst.precision(inst.f_opt + 1e-12);
        assert!((p - 1e-12).abs() < 1e-13);
    }

    #[test]
    fn precision_zero_at_optimum_for_all_specs() {
        for d in [2, 5] {
            for f in 1..=FUNCTION_COUNT {
                for i in 1..=10 {
                    let inst = instantiate(ProblemSpec::new(f, i, d)).unwrap();
                    let v = inst.value(&inst.x_opt).unwrap();
                    assert!((v - inst.f_opt).abs() <= 1e-9, "f{f} i{i} d{d}");
                    assert_eq!(inst.precision(v), 0.0);
                    assert!(inst.x_opt.iter().all(|c| (-4.0..=4.0).contains(c)));
                    assert!((-100.0..=100.0).contains(&inst.f_opt));
                }
            }
        }
    }

    #[test]
    fn rotation_is_orthogonal() {
        let inst = instantiate(ProblemSpec::new(1, 3, 5)).unwrap();
        assert!(inst.orthogonality_defect() < 1e-10);
        for f in [6, 10, 15, 21, 24] {
            let inst = instantiate(ProblemSpec::new(f, 3, 5)).unwrap();
            assert!(inst.orthogonality_defect() < 1e-10);
            assert_ne!(inst.rotation, identity(5), "f{f} should be rotated");
        }
    }

    #[test]
    fn instantiation_is_deterministic() {
        let a = instantiate(ProblemSpec::new(21, 4, 5)).unwrap();
        let b = instantiate(ProblemSpec::new(21, 4, 5)).unwrap();
        assert_eq!(a, b);
        let c = instantiate(ProblemSpec::new(21, 5, 5)).unwrap();
        assert_ne!(a.x_opt, c.x_opt);
    }

    #[test]
    fn budget_and_dimension_errors() {
        let inst = instantiate(ProblemSpec::new(1, 1, 2)).unwrap();
        let mut c = EvaluationBudgetCounter::new(2);
        inst.evaluate(&[0.0, 0.0], &mut c).unwrap();
        inst.evaluate(&[0.0, 0.0], &mut c).unwrap();
        assert!(matches!(inst.evaluate(&[0.0, 0.0], &mut c), Err(Error::BudgetExhausted { limit: 2 })));
        assert_eq!(c.used(), 2);
        let mut c = EvaluationBudgetCounter::new(2);
        assert!(matches!(
            inst.evaluate(&[0.0; 3], &mut c),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert_eq!(c.used(), 0);
    }

    #[test]
    fn out_of_domain_points_are_evaluated() {
        let inst = instantiate(ProblemSpec::new(1, 0, 2)).unwrap();
        assert_eq!(inst.value(&[10.0, 0.0]).unwrap(), 100.0);
    }

    #[test]
    fn manifest_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("suite.csv");
        let insts: Vec<_> = (1..=2).map(|i| instantiate(ProblemSpec::new(1, i, 2)).unwrap()).collect();
        write_manifest(&path, &insts).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "function_id,instance_id,dimension,f_opt,x_opt");
        assert_eq!(lines.len(), 3);
        let cols: Vec<&str> = lines[1].split(',').collect();
        let xs: Vec<f64> = cols[4].split(';').map(|s| s.parse().unwrap()).collect();
        assert_eq!(xs, insts[0].x_opt);
        assert_eq!(cols[3].parse::<f64>().unwrap(), insts[0].f_opt);
    }
}
