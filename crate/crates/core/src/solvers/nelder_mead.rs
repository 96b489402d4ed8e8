//! Nelder-Mead simplex search with restarts.

use rand_chacha::ChaCha8Rng;

use super::tracker::Tracker;
use super::Params;
use crate::error::Result;
use crate::sampling::uniform_point;

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, u) in simplex.iter().enumerate() {
        for v in &simplex[a + 1..] {
            let d2: f64 = u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum();
            worst = worst.max(d2.sqrt());
        }
    }
    worst
}

/// Runs until the budget is spent. A fresh simplex around a uniform point is
/// started whenever the current one collapses below `restart_diameter`.
pub(super) fn nelder_mead_restart(t: &mut Tracker, p: &Params, rng: &mut ChaCha8Rng) -> Result<()> {
    let d = t.dimension();
    let (alpha, gamma, rho, sigma) = (p.get("reflection"), p.get("expansion"), p.get("contraction"), p.get("shrink"));
    let step = p.get("initial_step");
    let min_diameter = p.get("restart_diameter");
    let domain = t.domain().clone();
    'restart: while !t.done() {
        let start = uniform_point(t.domain(), rng);
        let mut simplex = vec![start.clone()];
        for j in 0..d {
            let mut v = start.clone();
            // step towards the interior so the vertex stays distinct after clamping
            v[j] += if v[j] + step <= t.domain().upper[j] { step } else { -step };
            simplex.push(v);
        }
        let mut values = Vec::with_capacity(d + 1);
        for v in &simplex {
            let Some(f) = t.eval(v)? else { return Ok(()) };
            values.push(f);
        }
        loop {
            let mut order: Vec<usize> = (0..=d).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if diameter(&simplex) < min_diameter {
                continue 'restart;
            }
            let centroid: Vec<f64> = (0..d)
                .map(|j| simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64)
                .collect();
            let worst = simplex[d].clone();
            let toward = |coef: f64| -> Vec<f64> {
                let mut x: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + coef * (c - w)).collect();
                domain.clamp(&mut x);
                x
            };
            let reflected = toward(alpha);
            let Some(fr) = t.eval(&reflected)? else { return Ok(()) };
            if fr < values[0] {
                let expanded = toward(alpha * gamma);
                let Some(fe) = t.eval(&expanded)? else { return Ok(()) };
                if fe < fr {
                    simplex[d] = expanded;
                    values[d] = fe;
                } else {
                    simplex[d] = reflected;
                    values[d] = fr;
                }
                continue;
            }
            if fr < values[d - 1] {
                simplex[d] = reflected;
                values[d] = fr;
                continue;
            }
            let (contracted, outside) = if fr < values[d] { (toward(alpha * rho), true) } else { (toward(-rho), false) };
            let Some(fc) = t.eval(&contracted)? else { return Ok(()) };
            let accept = if outside { fc <= fr } else { fc < values[d] };
            if accept {
                simplex[d] = contracted;
                values[d] = fc;
                continue;
            }
            for i in 1..=d {
                let shrunk: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + sigma * (x - b)).collect();
                let Some(f) = t.eval(&shrunk)? else { return Ok(()) };
                simplex[i] = shrunk;
                values[i] = f;
            }
        }
    }
    Ok(())
}
