//! Seeded random tangent points.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::lagrangian::TangentPoint;

/// Coordinate box `[lo, hi]` applied to every component of `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl SampleBox {
    pub const DEFAULT: SampleBox = SampleBox { lo: 0.3, hi: 2.8 };

    pub fn new(lo: f64, hi: f64) -> Option<SampleBox> {
        (lo.is_finite() && hi.is_finite() && lo < hi).then_some(SampleBox { lo, hi })
    }
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::DEFAULT
    }
}

/// `count` points with `x` uniform in the box and `y` uniform on the unit
/// sphere, rescaled by a uniform factor in `[0.5, 2]`.
pub fn sample_points(dim: usize, count: usize, seed: u64, bx: SampleBox) -> Vec<TangentPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(bx.lo..=bx.hi)).collect();
            let y = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 1e-3 {
                    let r = rng.gen_range(0.5..=2.0);
                    break v.into_iter().map(|c| c * r / norm).collect();
                }
            };
            TangentPoint::new(x, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let a = sample_points(3, 40, 9, SampleBox::DEFAULT);
        assert_eq!(a, sample_points(3, 40, 9, SampleBox::DEFAULT));
        assert_ne!(a, sample_points(3, 40, 10, SampleBox::DEFAULT));
        for p in &a {
            assert!(p.x.iter().all(|v| (0.3..=2.8).contains(v)));
            let r = p.y_norm();
            assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&r));
        }
    }
}
