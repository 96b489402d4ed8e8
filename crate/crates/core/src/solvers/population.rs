//! Differential evolution and particle swarm optimization.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::tracker::Tracker;
use super::Params;
use crate::error::Result;
use crate::sampling::uniform_point;

/// DE/rand/1/bin with generational replacement.
pub(super) fn de(t: &mut Tracker, p: &Params, rng: &mut ChaCha8Rng) -> Result<()> {
    let d = t.dimension();
    let np = ((p.get("population_per_dim") * d as f64) as usize).max(4);
    let (f_w, cr) = (p.get("f"), p.get("cr"));
    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(np);
    let mut fit: Vec<f64> = Vec::with_capacity(np);
    for _ in 0..np {
        let x = uniform_point(t.domain(), rng);
        let Some(f) = t.eval(&x)? else { return Ok(()) };
        pop.push(x);
        fit.push(f);
    }
    while !t.done() {
        let mut next_pop = pop.clone();
        let mut next_fit = fit.clone();
        for i in 0..np {
            let picks: Vec<usize> = sample(rng, np - 1, 3).into_iter().map(|k| if k >= i { k + 1 } else { k }).collect();
            let (a, b, c) = (&pop[picks[0]], &pop[picks[1]], &pop[picks[2]]);
            let forced = rng.random_range(0..d);
            let mut trial = pop[i].clone();
            for j in 0..d {
                if j == forced || rng.random::<f64>() < cr {
                    trial[j] = a[j] + f_w * (b[j] - c[j]);
                }
            }
            t.domain().clamp(&mut trial);
            let Some(f) = t.eval(&trial)? else { return Ok(()) };
            if f <= fit[i] {
                next_pop[i] = trial;
                next_fit[i] = f;
            }
        }
        pop = next_pop;
        fit = next_fit;
    }
    Ok(())
}

/// Global-best PSO with inertia weight and per-coordinate velocity clamping.
pub(super) fn pso(t: &mut Tracker, p: &Params, rng: &mut ChaCha8Rng) -> Result<()> {
    let d = t.dimension();
    let n = (p.get("swarm_size") as usize).max(2);
    let (w, c1, c2) = (p.get("inertia"), p.get("cognitive"), p.get("social"));
    let vmax: Vec<f64> = (0..d).map(|j| p.get("velocity_clamp_fraction") * t.domain().width(j)).collect();
    let mut pos: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut vel: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut best_pos: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut best_fit: Vec<f64> = Vec::with_capacity(n);
    let mut g_pos = Vec::new();
    let mut g_fit = f64::INFINITY;
    for _ in 0..n {
        let x = uniform_point(t.domain(), rng);
        let v: Vec<f64> = vmax.iter().map(|m| rng.random_range(-m..=*m)).collect();
        let Some(f) = t.eval(&x)? else { return Ok(()) };
        if f < g_fit {
            g_fit = f;
            g_pos = x.clone();
        }
        best_pos.push(x.clone());
        best_fit.push(f);
        pos.push(x);
        vel.push(v);
    }
    while !t.done() {
        for i in 0..n {
            for j in 0..d {
                let r1: f64 = rng.random();
                let r2: f64 = rng.random();
                let v = w * vel[i][j] + c1 * r1 * (best_pos[i][j] - pos[i][j]) + c2 * r2 * (g_pos[j] - pos[i][j]);
                vel[i][j] = v.clamp(-vmax[j], vmax[j]);
                pos[i][j] += vel[i][j];
            }
            t.domain().clamp(&mut pos[i]);
            let Some(f) = t.eval(&pos[i])? else { return Ok(()) };
            if f < best_fit[i] {
                best_fit[i] = f;
                best_pos[i].copy_from_slice(&pos[i]);
                if f < g_fit {
                    g_fit = f;
                    g_pos.copy_from_slice(&pos[i]);
                }
            }
        }
    }
    Ok(())
}
