//! Base definitions of the 24 benchmark functions.
//!
//! Every base is written in the centered, rotated frame `z = R (x - x_opt)` and
//! attains its global minimum 0 at `z = 0`. The non-smooth oscillation and
//! asymmetry transformations of the reference suite are omitted; conditioning
//! matrices (`Λ^α`, diagonal with entries `α^(i / (2(D-1)))`) are kept.
//!
//! | id | name | formula (in `z`) | group |
//! |----|------|------------------|-------|
//! | 1 | sphere | `Σ z_i²` | separable |
//! | 2 | separable ellipsoid | `Σ 10^(6i/(D-1)) z_i²` | separable |
//! | 3 | separable Rastrigin | `Σ u_i² + 10(1 - cos 2πu_i)`, `u = Λ^10 z` | separable |
//! | 4 | Büche-Rastrigin | Rastrigin of `s ⊙ z`, `s_i = 10^(i/(2(D-1)))`, ×10 on even `i` with `z_i > 0` | separable |
//! | 5 | absolute slope | `Σ 10^(i/(D-1)) |z_i|` | separable |
//! | 6 | attractive sector | `(Σ (s_i u_i)²)^0.9`, `u = Λ^10 z`, `s_i = 100` if `u_i > 0` else 1 | low/moderate conditioning |
//! | 7 | step ellipsoid | `0.1 max(|û_0|/1e4, Σ 10^(2i/(D-1)) ũ_i²)`, `û = Λ^10 z`, `ũ` rounded | low/moderate conditioning |
//! | 8 | Rosenbrock | `Σ 100(w_i² - w_{i+1})² + (w_i - 1)²`, `w = max(1, √D/8) z + 1` | low/moderate conditioning |
//! | 9 | rotated Rosenbrock | as 8 | low/moderate conditioning |
//! | 10 | ellipsoid | as 2 | high conditioning |
//! | 11 | discus | `10^6 z_0² + Σ_{i>0} z_i²` | high conditioning |
//! | 12 | bent cigar | `z_0² + 10^6 Σ_{i>0} z_i²` | high conditioning |
//! | 13 | sharp ridge | `u_0² + 100 √(Σ_{i>0} u_i²)`, `u = Λ^10 z` | high conditioning |
//! | 14 | different powers | `√(Σ |z_i|^(2 + 4i/(D-1)))` | high conditioning |
//! | 15 | Rastrigin | as 3 | multimodal, adequate structure |
//! | 16 | Weierstrass | `10((1/D) Σ_i Σ_k 0.5^k cos(2π3^k(u_i + ½)) - f0)³`, `u = Λ^0.01 z`, k = 0..11 | multimodal, adequate structure |
//! | 17 | Schaffer F7 | `((1/(D-1)) Σ √s_i + √s_i sin²(50 s_i^0.2))²`, `s_i = √(u_i² + u_{i+1}²)`, `u = Λ^10 z` | multimodal, adequate structure |
//! | 18 | Schaffer F7, ill-conditioned | as 17 with `Λ^1000` | multimodal, adequate structure |
//! | 19 | Griewank-Rosenbrock | `(10/(D-1)) Σ (s_i/4000 - cos s_i + 1)`, `s_i` Rosenbrock term of `w = max(1, √D/8) z + 1` | multimodal, adequate structure |
//! | 20 | Schwefel | `Σ g(u_i) - g(c) + max(0, |u_i| - 500)²`, `g(u) = -u sin √|u|`, `u = 100 z + c`, `c ≈ 420.97` | multimodal, weak structure |
//! | 21 | Gallagher 101 peaks | `(10 - max_i w_i exp(-(1/2D) Σ_j c_ij (z_j - y_ij)²))²` | multimodal, weak structure |
//! | 22 | Gallagher 21 peaks | as 21 with 21 peaks | multimodal, weak structure |
//! | 23 | Katsuura | `(10/D²) Π_i (1 + (i+1) Σ_{j=1}^{32} |2^j u_i - [2^j u_i]| / 2^j)^(10/D^1.2) - 10/D²`, `u = Λ^100 z` | multimodal, weak structure |
//! | 24 | Lunacek bi-Rastrigin | `min(Σ z_i², D + s Σ (z_i + μ0 - μ1)²) + 10 Σ (1 - cos 2πu_i)`, `u = Λ^100 z` | multimodal, weak structure |
//!
//! Rotation of the argument preserves the minimum at `z = 0` for every entry,
//! because each base is minimized at the origin of its own frame. Functions
//! 1-5 and 8 are instantiated without rotation to keep their separable
//! structure.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// The five function groups of the noiseless suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionGroup {
    Separable,
    LowModerateConditioning,
    HighConditioningUnimodal,
    MultimodalAdequateStructure,
    MultimodalWeakStructure,
}

pub const FUNCTION_COUNT: u32 = 24;

/// Minimizer of `-u sin(√|u|)` on `[-500, 500]`.
pub const SCHWEFEL_OPT: f64 = 420.968_746_359_982_0;

pub fn group_of(function_id: u32) -> Option<FunctionGroup> {
    use FunctionGroup::*;
    Some(match function_id {
        1..=5 => Separable,
        6..=9 => LowModerateConditioning,
        10..=14 => HighConditioningUnimodal,
        15..=19 => MultimodalAdequateStructure,
        20..=24 => MultimodalWeakStructure,
        _ => return None,
    })
}

pub fn name_of(function_id: u32) -> Option<&'static str> {
    const NAMES: [&str; 24] = [
        "sphere",
        "separable_ellipsoid",
        "separable_rastrigin",
        "buche_rastrigin",
        "absolute_slope",
        "attractive_sector",
        "step_ellipsoid",
        "rosenbrock",
        "rotated_rosenbrock",
        "ellipsoid",
        "discus",
        "bent_cigar",
        "sharp_ridge",
        "different_powers",
        "rastrigin",
        "weierstrass",
        "schaffer_f7",
        "schaffer_f7_ill_conditioned",
        "griewank_rosenbrock",
        "schwefel",
        "gallagher_101",
        "gallagher_21",
        "katsuura",
        "lunacek_bi_rastrigin",
    ];
    NAMES.get(function_id.checked_sub(1)? as usize).copied()
}

/// Whether instances of this function get a random rotation.
pub fn is_rotated(function_id: u32) -> bool {
    !matches!(function_id, 1..=5 | 8)
}

/// One Gaussian peak of the Gallagher functions, in the `z` frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center: Vec<f64>,
    pub weight: f64,
    pub scales: Vec<f64>,
}

/// Per-instance data some bases need beyond the affine transform.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BaseAux {
    pub peaks: Vec<Peak>,
}

impl BaseAux {
    pub fn generate<R: Rng + ?Sized>(function_id: u32, dimension: usize, rng: &mut R) -> BaseAux {
        match function_id {
            21 => BaseAux { peaks: gallagher_peaks(101, 1000.0, dimension, rng) },
            22 => BaseAux { peaks: gallagher_peaks(21, 1000.0 * 1000.0, dimension, rng) },
            _ => BaseAux::default(),
        }
    }
}

fn gallagher_peaks<R: Rng + ?Sized>(count: usize, first_alpha: f64, d: usize, rng: &mut R) -> Vec<Peak> {
    let mut alphas: Vec<f64> = (0..count - 1)
        .map(|j| 1000f64.powf(2.0 * j as f64 / (count - 2) as f64))
        .collect();
    alphas.shuffle(rng);
    alphas.insert(0, first_alpha);
    let mut peaks = Vec::with_capacity(count);
    for (i, alpha) in alphas.into_iter().enumerate() {
        let (center, weight) = if i == 0 {
            (vec![0.0; d], 10.0)
        } else {
            let c = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
            (c, 1.1 + 8.0 * (i - 1) as f64 / (count - 2) as f64)
        };
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(rng);
        let scales = order
            .into_iter()
            .map(|k| alpha.powf(k as f64 / (d - 1) as f64) / alpha.powf(0.25))
            .collect();
        peaks.push(Peak { center, weight, scales });
    }
    peaks
}

fn cond(alpha: f64, i: usize, d: usize) -> f64 {
    alpha.powf(0.5 * i as f64 / (d - 1) as f64)
}

fn conditioned(alpha: f64, z: &[f64]) -> Vec<f64> {
    let d = z.len();
    z.iter().enumerate().map(|(i, v)| cond(alpha, i, d) * v).collect()
}

fn rastrigin(u: &[f64]) -> f64 {
    u.iter().map(|v| v * v + 10.0 * (1.0 - (2.0 * PI * v).cos())).sum()
}

fn ellipsoid(z: &[f64]) -> f64 {
    let d = z.len();
    z.iter()
        .enumerate()
        .map(|(i, v)| 10f64.powf(6.0 * i as f64 / (d - 1) as f64) * v * v)
        .sum()
}

fn rosenbrock_terms(z: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let d = z.len();
    let scale = 1f64.max((d as f64).sqrt() / 8.0);
    z.windows(2).map(move |pair| {
        let a = scale * pair[0] + 1.0;
        let b = scale * pair[1] + 1.0;
        100.0 * (a * a - b).powi(2) + (a - 1.0).powi(2)
    })
}

fn schaffer(u: &[f64]) -> f64 {
    let d = u.len();
    let sum: f64 = u
        .windows(2)
        .map(|p| {
            let s = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let r = s.sqrt();
            r + r * (50.0 * s.powf(0.2)).sin().powi(2)
        })
        .sum();
    (sum / (d - 1) as f64).powi(2)
}

fn schwefel_term(u: f64) -> f64 {
    -u * u.abs().sqrt().sin()
}

fn weierstrass(z: &[f64]) -> f64 {
    let d = z.len();
    let u = conditioned(0.01, z);
    let term = |v: f64| -> f64 {
        (0..12)
            .map(|k| {
                let a = 0.5f64.powi(k);
                let b = 2.0 * PI * 3f64.powi(k);
                a * (b * (v + 0.5)).cos()
            })
            .sum()
    };
    let f0 = term(0.0);
    let inner: f64 = u.iter().map(|&v| term(v) - f0).sum::<f64>() / d as f64;
    10.0 * inner.powi(3)
}

fn katsuura(z: &[f64]) -> f64 {
    let d = z.len();
    let u = conditioned(100.0, z);
    let exponent = 10.0 / (d as f64).powf(1.2);
    let scale = 10.0 / (d * d) as f64;
    let mut product = 1.0;
    for (i, &v) in u.iter().enumerate() {
        let mut s = 0.0;
        for j in 1..=32 {
            let p = 2f64.powi(j);
            s += (p * v - (p * v).round()).abs() / p;
        }
        product *= (1.0 + (i + 1) as f64 * s).powf(exponent);
    }
    scale * (product - 1.0)
}

fn lunacek(z: &[f64]) -> f64 {
    let d = z.len() as f64;
    let mu0 = 2.5;
    let s = 1.0 - 1.0 / (2.0 * (d + 20.0).sqrt() - 8.2);
    let mu1 = -((mu0 * mu0 - 1.0) / s).sqrt();
    let first: f64 = z.iter().map(|v| v * v).sum();
    let second: f64 = d + s * z.iter().map(|v| (v + mu0 - mu1).powi(2)).sum::<f64>();
    let u = conditioned(100.0, z);
    let osc: f64 = u.iter().map(|v| 10.0 * (1.0 - (2.0 * PI * v).cos())).sum();
    first.min(second) + osc
}

fn gallagher(z: &[f64], peaks: &[Peak]) -> f64 {
    let d = z.len() as f64;
    let best = peaks
        .iter()
        .map(|p| {
            let q: f64 = z
                .iter()
                .zip(&p.center)
                .zip(&p.scales)
                .map(|((zi, ci), si)| si * (zi - ci).powi(2))
                .sum();
            p.weight * (-q / (2.0 * d)).exp()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (10.0 - best).powi(2)
}

/// Raw base value in the `z` frame. `function_id` must be in 1..=24.
pub fn base_value(function_id: u32, z: &[f64], aux: &BaseAux) -> f64 {
    let d = z.len();
    match function_id {
        1 => z.iter().map(|v| v * v).sum(),
        2 | 10 => ellipsoid(z),
        3 | 15 => rastrigin(&conditioned(10.0, z)),
        4 => {
            let u: Vec<f64> = z
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let mut s = cond(10.0, i, d);
                    if i % 2 == 0 && v > 0.0 {
                        s *= 10.0;
                    }
                    s * v
                })
                .collect();
            rastrigin(&u)
        }
        5 => z
            .iter()
            .enumerate()
            .map(|(i, v)| 10f64.powf(i as f64 / (d - 1) as f64) * v.abs())
            .sum(),
        6 => {
            let u = conditioned(10.0, z);
            let s: f64 = u
                .iter()
                .map(|&v| if v > 0.0 { (100.0 * v).powi(2) } else { v * v })
                .sum();
            s.powf(0.9)
        }
        7 => {
            let u = conditioned(10.0, z);
            let rounded = |v: f64| if v.abs() > 0.5 { v.round() } else { (10.0 * v).round() / 10.0 };
            let s: f64 = u
                .iter()
                .enumerate()
                .map(|(i, &v)| 10f64.powf(2.0 * i as f64 / (d - 1) as f64) * rounded(v).powi(2))
                .sum();
            0.1 * (u[0].abs() / 1e4).max(s)
        }
        8 | 9 => rosenbrock_terms(z).sum(),
        11 => 1e6 * z[0] * z[0] + z[1..].iter().map(|v| v * v).sum::<f64>(),
        12 => z[0] * z[0] + 1e6 * z[1..].iter().map(|v| v * v).sum::<f64>(),
        13 => {
            let u = conditioned(10.0, z);
            u[0] * u[0] + 100.0 * u[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
        }
        14 => z
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs().powf(2.0 + 4.0 * i as f64 / (d - 1) as f64))
            .sum::<f64>()
            .sqrt(),
        16 => weierstrass(z),
        17 => schaffer(&conditioned(10.0, z)),
        18 => schaffer(&conditioned(1000.0, z)),
        19 => {
            let s: f64 = rosenbrock_terms(z).map(|s| s / 4000.0 - s.cos() + 1.0).sum();
            10.0 * s / (d - 1) as f64
        }
        20 => {
            let g_opt = schwefel_term(SCHWEFEL_OPT);
            z.iter()
                .map(|&v| {
                    let u = 100.0 * v + SCHWEFEL_OPT;
                    let penalty = (u.abs() - 500.0).max(0.0).powi(2);
                    schwefel_term(u) - g_opt + penalty
                })
                .sum()
        }
        21 | 22 => gallagher(z, &aux.peaks),
        23 => katsuura(z),
        24 => lunacek(z),
        _ => f64::NAN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_table() {
        use FunctionGroup::*;
        let expected = [
            (1, Separable),
            (5, Separable),
            (6, LowModerateConditioning),
            (9, LowModerateConditioning),
            (10, HighConditioningUnimodal),
            (14, HighConditioningUnimodal),
            (15, MultimodalAdequateStructure),
            (19, MultimodalAdequateStructure),
            (20, MultimodalWeakStructure),
            (24, MultimodalWeakStructure),
        ];
        for (id, g) in expected {
            assert_eq!(group_of(id), Some(g), "f{id}");
        }
        assert_eq!(group_of(0), None);
        assert_eq!(group_of(25), None);
        let mut counts = std::collections::HashMap::new();
        for id in 1..=FUNCTION_COUNT {
            *counts.entry(group_of(id).unwrap()).or_insert(0) += 1;
            assert!(name_of(id).is_some());
        }
        assert_eq!(counts.len(), 5);
        assert_eq!(counts[&Separable], 5);
        assert_eq!(counts[&LowModerateConditioning], 4);
    }

    #[test]
    fn schwefel_constant_is_a_stationary_point() {
        let h = 1e-4;
        let g = |u: f64| schwefel_term(u);
        let slope = (g(SCHWEFEL_OPT + h) - g(SCHWEFEL_OPT - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-6, "slope {slope}");
    }

    #[test]
    fn known_values() {
        let aux = BaseAux::default();
        assert_eq!(base_value(1, &[1.0; 5], &aux), 5.0);
        assert_eq!(base_value(15, &[0.0; 5], &aux), 0.0);
        assert_eq!(base_value(3, &[0.0; 5], &aux), 0.0);
        // w = z + 1 for d <= 64, so z = 0 is the all-ones Rosenbrock optimum
        assert_eq!(base_value(8, &[0.0; 5], &aux), 0.0);
    }

    #[test]
    fn every_base_is_zero_at_origin_and_nonnegative_nearby() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2usize, 3, 5, 10] {
            for id in 1..=FUNCTION_COUNT {
                let aux = BaseAux::generate(id, d, &mut rng);
                assert_eq!(base_value(id, &vec![0.0; d], &aux), 0.0, "f{id} d{d}");
                for _ in 0..200 {
                    let z: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
                    let v = base_value(id, &z, &aux);
                    assert!(v >= -1e-12, "f{id} d{d} z={z:?} -> {v}");
                }
            }
        }
    }
}
