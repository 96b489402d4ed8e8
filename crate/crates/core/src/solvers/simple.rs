//! Random search and the (1+1)-ES.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::tracker::Tracker;
use super::Params;
use crate::error::Result;
use crate::sampling::uniform_point;

pub(super) fn random_search(t: &mut Tracker, _p: &Params, rng: &mut ChaCha8Rng) -> Result<()> {
    while !t.done() {
        let x = uniform_point(t.domain(), rng);
        t.eval(&x)?;
    }
    Ok(())
}

/// Gaussian mutation with the 1/5th success rule: every `period · d`
/// evaluations σ is multiplied by `exp(step)` when more than a fifth of the
/// mutations succeeded and by `exp(-step)` when fewer did.
pub(super) fn one_plus_one_es(t: &mut Tracker, p: &Params, rng: &mut ChaCha8Rng) -> Result<()> {
    let d = t.dimension();
    let period = (p.get("adapt_period_per_dim") * d as f64).max(1.0) as usize;
    let target = p.get("success_target");
    let step = p.get("step_exponent");
    let mut sigma = p.get("sigma0");
    let mut parent = uniform_point(t.domain(), rng);
    let Some(mut f_parent) = t.eval(&parent)? else { return Ok(()) };
    let mut successes = 0usize;
    let mut trials = 0usize;
    let mut child = vec![0.0; d];
    while !t.done() {
        for (c, x) in child.iter_mut().zip(&parent) {
            *c = x + sigma * rng.sample::<f64, _>(StandardNormal);
        }
        t.domain().clamp(&mut child);
        let Some(f) = t.eval(&child)? else { break };
        trials += 1;
        if f <= f_parent {
            if f < f_parent {
                successes += 1;
            }
            f_parent = f;
            parent.copy_from_slice(&child);
        }
        if trials == period {
            let rate = successes as f64 / trials as f64;
            if rate > target {
                sigma *= step.exp();
            } else if rate < target {
                sigma *= (-step).exp();
            }
            successes = 0;
            trials = 0;
        }
    }
    Ok(())
}
