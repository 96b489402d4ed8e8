//! (μ/μ_w, λ)-CMA-ES with rank-one and rank-μ covariance updates and
//! cumulative step-size adaptation. Samples are clamped to the domain and the
//! clamped step enters the update. The strategy restarts from a fresh uniform
//! mean when the step size collapses or the covariance becomes ill-conditioned.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::tracker::Tracker;
use super::Params;
use crate::error::Result;
use crate::sampling::uniform_point;

const MIN_STEP: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e14;

pub(super) fn simple_cma(t: &mut Tracker, p: &Params, rng: &mut ChaCha8Rng) -> Result<()> {
    let d = t.dimension();
    let n = d as f64;
    let lambda = match p.get("lambda") as usize {
        0 => 4 + (3.0 * n.ln()).floor() as usize,
        l => l.max(2),
    };
    let mu = lambda / 2;
    let raw: Vec<f64> = (1..=mu).map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n);
    let c_1 = 2.0 / ((n + 1.3).powi(2) + mu_eff);
    let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0).powi(2) + mu_eff));
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    let sigma0 = p.get("sigma0");

    while !t.done() {
        let mut mean = DVector::from_vec(uniform_point(t.domain(), rng));
        let mut sigma = sigma0;
        let mut cov = DMatrix::<f64>::identity(d, d);
        let mut p_sigma = DVector::<f64>::zeros(d);
        let mut p_c = DVector::<f64>::zeros(d);
        let mut generation = 0i32;
        loop {
            let eig = SymmetricEigen::new(cov.clone());
            let basis = eig.eigenvectors;
            let scales: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(1e-300).sqrt()).collect();
            let max_scale = scales.iter().copied().fold(0.0, f64::max);
            let min_scale = scales.iter().copied().fold(f64::INFINITY, f64::min);
            if sigma * max_scale < MIN_STEP || (max_scale / min_scale).powi(2) > MAX_CONDITION || !sigma.is_finite() {
                break;
            }
            let mut offspring: Vec<(f64, DVector<f64>)> = Vec::with_capacity(lambda);
            for _ in 0..lambda {
                let z = DVector::from_fn(d, |i, _| scales[i] * rng.sample::<f64, _>(StandardNormal));
                let mut x: Vec<f64> = (&mean + (&basis * z) * sigma).iter().copied().collect();
                t.domain().clamp(&mut x);
                let Some(f) = t.eval(&x)? else { return Ok(()) };
                let step = (DVector::from_vec(x) - &mean) / sigma;
                offspring.push((f, step));
            }
            offspring.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut y_w = DVector::<f64>::zeros(d);
            for (w, (_, y)) in weights.iter().zip(&offspring) {
                y_w += y * *w;
            }
            mean += &y_w * sigma;

            let inv_sqrt = DMatrix::from_fn(d, d, |a, b| {
                (0..d).map(|k| basis[(a, k)] * basis[(b, k)] / scales[k]).sum::<f64>()
            });
            p_sigma = &p_sigma * (1.0 - c_sigma) + (&inv_sqrt * &y_w) * (c_sigma * (2.0 - c_sigma) * mu_eff).sqrt();
            generation += 1;
            let norm_ps = p_sigma.norm();
            let h_sigma = norm_ps / (1.0 - (1.0 - c_sigma).powi(2 * generation)).sqrt() < (1.4 + 2.0 / (n + 1.0)) * chi_n;
            let h = if h_sigma { 1.0 } else { 0.0 };
            p_c = &p_c * (1.0 - c_c) + &y_w * (h * (c_c * (2.0 - c_c) * mu_eff).sqrt());

            let mut rank_mu = DMatrix::<f64>::zeros(d, d);
            for (w, (_, y)) in weights.iter().zip(&offspring) {
                rank_mu += (y * y.transpose()) * *w;
            }
            let rank_one = &p_c * p_c.transpose() + &cov * ((1.0 - h) * c_c * (2.0 - c_c));
            cov = &cov * (1.0 - c_1 - c_mu) + rank_one * c_1 + rank_mu * c_mu;
            cov = (&cov + cov.transpose()) * 0.5;
            sigma *= ((c_sigma / d_sigma) * (norm_ps / chi_n - 1.0)).exp();
        }
    }
    Ok(())
}
