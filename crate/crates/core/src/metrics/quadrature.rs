//! Composite trapezoid quadrature on uniform grids.

use crate::data::linspace;
use crate::mixture::Mixture;
use crate::scalar::Scalar;

/// Default point count for density integrals.
pub const DEFAULT_POINTS: usize = 20_001;
/// Default half-width, in multiples of the largest scale, beyond the
/// extreme component means.
pub const DEFAULT_WIDTH: f64 = 12.0;
/// Upper limit on the refined point count of [`Grid::covering`].
pub const MAX_POINTS: usize = 4_000_001;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Self {
        debug_assert!(lo < hi && points >= 2);
        Self { lo, hi, points }
    }

    /// Smallest interval covering every mixture's `mean ± 12·max σ` range,
    /// with at least [`DEFAULT_POINTS`] nodes and a spacing no wider than
    /// half the narrowest component scale.
    pub fn covering<T: Scalar>(mixtures: &[&Mixture<T>]) -> Self {
        let (lo, hi) = mixtures.iter().map(|m| m.support(DEFAULT_WIDTH)).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), (a, b)| (lo.min(a), hi.max(b)),
        );
        let min_sd = mixtures.iter().flat_map(|m| m.stds()).map(|s| s.as_f64()).fold(f64::INFINITY, f64::min);
        let needed = ((hi - lo) / (0.5 * min_sd)).ceil() as usize + 1;
        Self::new(lo, hi, needed.clamp(DEFAULT_POINTS, MAX_POINTS))
    }

    pub fn nodes(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.points)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        trapezoid(&self.nodes(), f)
    }
}

pub fn trapezoid(nodes: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let values: Vec<f64> = nodes.iter().map(|&y| f(y)).collect();
    nodes
        .windows(2)
        .zip(values.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// `∫ p(y) dy` over `grid`.
pub fn total_mass<T: Scalar>(p: &Mixture<T>, grid: &Grid) -> f64 {
    grid.integrate(|y| p.density(T::lit(y)).as_f64())
}

/// `∫ p (ln p − ln q) dy`, integrand evaluated in log space.
pub fn kl<T: Scalar>(p: &Mixture<T>, q: &Mixture<T>, grid: &Grid) -> f64 {
    grid.integrate(|y| {
        let lp = p.log_density(T::lit(y)).as_f64();
        let lq = q.log_density(T::lit(y)).as_f64();
        if lp == f64::NEG_INFINITY {
            0.0
        } else {
            lp.exp() * (lp - lq)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly_enough() {
        let g = Grid::new(0.0, 1.0, 1001);
        assert!((g.integrate(|x| 3.0 * x * x) - 1.0).abs() < 1e-6);
        assert!((g.integrate(|x| 2.0 * x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn narrow_components_refine_the_grid() {
        let m = Mixture::new(vec![0.5f64, 0.5], vec![-9.0, 9.0], vec![1e-3, 3.0]).unwrap();
        let g = Grid::covering(&[&m]);
        assert!(g.points > DEFAULT_POINTS);
        assert!((total_mass(&m, &g) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gaussian_has_unit_mass() {
        let m = Mixture::gaussian(0.3f64, 0.2).unwrap();
        assert!((total_mass(&m, &Grid::covering(&[&m])) - 1.0).abs() < 1e-10);
    }
}
