//! Seeded random streams and Latin hypercube designs.
//!
//! Every random draw in the workbench comes from an [`RngStream`]: a master
//! seed plus an ordered path of labels. The stream's internal seed is
//!
//! ```text
//! SHA-256( "pias-stream-v1" || master_seed (u64 LE) || for each label: len (u64 LE) || utf8 bytes )
//! ```
//!
//! and the 32-byte digest seeds a ChaCha8 generator (`rand_chacha` 0.9).
//! Length-prefixing makes the path encoding injective, so distinct paths only
//! share a seed on a SHA-256 collision (probability ~2^-128 for any pair).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Generator identifier written into frozen configs.
pub const GENERATOR: &str = "chacha8/rand_chacha-0.9/sha256-path-v1";

const DOMAIN_TAG: &[u8] = b"pias-stream-v1";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<String>,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream { master_seed, path: Vec::new() }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Child stream; pure in `(self, label)`.
    pub fn derive(&self, label: impl AsRef<str>) -> RngStream {
        let mut path = self.path.clone();
        path.push(label.as_ref().to_owned());
        RngStream { master_seed: self.master_seed, path }
    }

    /// Slash-joined path, for provenance columns and logs.
    pub fn path_string(&self) -> String {
        self.path.join("/")
    }

    pub fn seed(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(DOMAIN_TAG);
        hasher.update(self.master_seed.to_le_bytes());
        for label in &self.path {
            hasher.update((label.len() as u64).to_le_bytes());
            hasher.update(label.as_bytes());
        }
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        seed
    }

    /// Fresh cursor positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::from_seed(self.seed())
    }
}

/// Axis-aligned box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBounds(format!("dimension {j}: [{lo}, {hi}]")));
            }
        }
        Ok(Bounds { lower, upper })
    }

    pub fn cube(dimension: usize, lo: f64, hi: f64) -> Result<Self> {
        Bounds::new(vec![lo; dimension], vec![hi; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }
}

/// Lower edge of stratum `k` out of `n` on `[lo, hi)`.
pub fn stratum_edge(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    lo + k as f64 * (hi - lo) / n as f64
}

/// Plain (unoptimized) Latin hypercube design with `n` rows inside `bounds`.
///
/// Each column is an independent uniform permutation of strata with a uniform
/// offset inside the stratum.
pub fn lhs_sample(n: usize, bounds: &Bounds, stream: &RngStream) -> Result<Vec<Vec<f64>>> {
    let d = bounds.dimension();
    if n == 0 || d == 0 {
        return Err(Error::InvalidBounds(format!("lhs needs n >= 1 and d >= 1, got n={n}, d={d}")));
    }
    let mut rng = stream.rng();
    let mut points = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    for j in 0..d {
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        strata.sort_unstable();
        strata.shuffle(&mut rng);
        for (row, &k) in points.iter_mut().zip(&strata) {
            let a = stratum_edge(lo, hi, k, n);
            let b = stratum_edge(lo, hi, k + 1, n);
            let u: f64 = rng.random();
            let mut x = a + u * (b - a);
            if x >= b {
                x = b.next_down();
            }
            row[j] = x.max(a);
        }
    }
    Ok(points)
}

/// Uniform point in the box.
pub fn uniform_point<R: Rng + ?Sized>(bounds: &Bounds, rng: &mut R) -> Vec<f64> {
    bounds
        .lower
        .iter()
        .zip(&bounds.upper)
        .map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stratum_counts(points: &[Vec<f64>], bounds: &Bounds, j: usize) -> Vec<usize> {
        let n = points.len();
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let mut counts = vec![0; n];
        for p in points {
            let k = (0..n)
                .find(|&k| p[j] >= stratum_edge(lo, hi, k, n) && p[j] < stratum_edge(lo, hi, k + 1, n))
                .expect("point outside every stratum");
            counts[k] += 1;
        }
        counts
    }

    #[test]
    fn derive_is_pure_and_label_sensitive() {
        let s = RngStream::new(7);
        assert_eq!(s.derive("a").seed(), s.derive("a").seed());
        assert_ne!(s.derive("a").seed(), s.derive("b").seed());
        assert_ne!(s.derive("a").derive("b").seed(), s.derive("b").derive("a").seed());
        // length prefix keeps "ab" + "c" apart from "a" + "bc"
        assert_ne!(s.derive("ab").derive("c").seed(), s.derive("a").derive("bc").seed());
        assert_ne!(RngStream::new(8).derive("a").seed(), s.derive("a").seed());
    }

    #[test]
    fn four_points_one_per_quarter() {
        let b = Bounds::cube(1, 0.0, 1.0).unwrap();
        let pts = lhs_sample(4, &b, &RngStream::new(1)).unwrap();
        let mut quarters: Vec<usize> = pts.iter().map(|p| (p[0] * 4.0).floor() as usize).collect();
        quarters.sort();
        assert_eq!(quarters, vec![0, 1, 2, 3]);
    }

    #[test]
    fn single_point_inside_box() {
        let b = Bounds::cube(3, -5.0, 5.0).unwrap();
        let pts = lhs_sample(1, &b, &RngStream::new(3)).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(pts[0].iter().all(|v| (-5.0..5.0).contains(v)));
    }

    #[test]
    fn thousand_points_stratified_in_five_dims() {
        let b = Bounds::cube(5, -5.0, 5.0).unwrap();
        let pts = lhs_sample(1000, &b, &RngStream::new(11).derive("lhs")).unwrap();
        for j in 0..5 {
            assert!(stratum_counts(&pts, &b, j).iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn degenerate_bounds_rejected() {
        assert!(matches!(Bounds::cube(2, 1.0, 1.0), Err(Error::InvalidBounds(_))));
        assert!(Bounds::new(vec![0.0, 3.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn same_stream_same_design() {
        let b = Bounds::cube(2, -1.0, 1.0).unwrap();
        let s = RngStream::new(5).derive("x");
        assert_eq!(lhs_sample(50, &b, &s).unwrap(), lhs_sample(50, &b, &s).unwrap());
    }
}
