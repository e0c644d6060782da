//! Seeded low-discrepancy sample points.
//!
//! Halton sequences in bases 2, 3, 5, 7 with a Cranley–Patterson shift drawn
//! from a ChaCha stream, so the points are deterministic for a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BASES: [u64; 6] = [2, 3, 5, 7, 11, 13];

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

#[derive(Clone, Debug)]
pub struct Sampler {
    shift: Vec<f64>,
}

impl Sampler {
    /// Up to six dimensions.
    pub fn new(dims: usize, seed: u64) -> Self {
        assert!(dims <= BASES.len(), "at most {} dimensions", BASES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { shift: (0..dims).map(|_| rng.gen::<f64>()).collect() }
    }

    /// Point `k` in the unit cube.
    pub fn unit(&self, k: usize) -> Vec<f64> {
        self.shift
            .iter()
            .zip(BASES)
            .map(|(s, b)| (halton(k as u64 + 1, b) + s).fract())
            .collect()
    }

    /// `n` points scaled into the given ranges.
    pub fn points(&self, n: usize, ranges: &[[f64; 2]]) -> Vec<Vec<f64>> {
        assert_eq!(ranges.len(), self.shift.len());
        (0..n)
            .map(|k| {
                self.unit(k)
                    .iter()
                    .zip(ranges)
                    .map(|(t, r)| r[0] + t * (r[1] - r[0]))
                    .collect()
            })
            .collect()
    }
}

/// Points in a rectangle of the `z`-plane.
pub fn plane_points(n: usize, seed: u64, x: [f64; 2], y: [f64; 2]) -> Vec<[f64; 2]> {
    Sampler::new(2, seed).points(n, &[x, y]).into_iter().map(|p| [p[0], p[1]]).collect()
}

/// Points `(x, y, u, r)`.
pub fn spacetime_points(n: usize, seed: u64, ranges: [[f64; 2]; 4]) -> Vec<[f64; 4]> {
    Sampler::new(4, seed)
        .points(n, &ranges)
        .into_iter()
        .map(|p| [p[0], p[1], p[2], p[3]])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn radical_inverse() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
        assert!((halton(1, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((halton(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn seeded_and_deterministic() {
        let r = [[0.0, 1.0], [-1.0, 1.0], [-1.0, 1.0], [-2.5, 2.5]];
        assert_eq!(spacetime_points(30, 4, r), spacetime_points(30, 4, r));
        assert_ne!(spacetime_points(30, 4, r), spacetime_points(30, 5, r));
    }

    #[test]
    fn fills_the_square_evenly() {
        let pts = plane_points(1000, 1, [0.0, 1.0], [0.0, 1.0]);
        for q in 0..4 {
            let (xa, ya) = ((q % 2) as f64 * 0.5, (q / 2) as f64 * 0.5);
            let n = pts.iter().filter(|p| p[0] >= xa && p[0] < xa + 0.5 && p[1] >= ya && p[1] < ya + 0.5).count();
            assert!((n as i64 - 250).abs() < 15, "{n}");
        }
    }

    proptest! {
        #[test]
        fn points_stay_in_range(seed in any::<u64>(), lo in -10.0f64..0.0, w in 0.1f64..5.0) {
            for p in plane_points(50, seed, [lo, lo + w], [-w, w]) {
                prop_assert!(p[0] >= lo && p[0] <= lo + w);
                prop_assert!(p[1] >= -w && p[1] <= w);
            }
        }
    }
}
