//! Central finite-difference comparison against analytic gradients.

use crate::error::Result;
use crate::scalar::Scalar;

use super::tensor::Tensor;

/// Outcome of one finite-difference sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_err: f64,
    pub worst_index: (usize, usize),
    pub coordinates: usize,
}

/// Relative error with the denominator floored at `1e-3`, so coordinates
/// whose true gradient is ~0 are judged on absolute error instead.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

/// Compares `analytic` against central differences of `loss` with step `h`
/// for every coordinate of every tensor in `params`.
pub fn check<T: Scalar>(
    params: &[Tensor<T>],
    analytic: &[Tensor<T>],
    h: f64,
    mut loss: impl FnMut(&[Tensor<T>]) -> Result<T>,
) -> Result<GradCheck> {
    let mut worst = GradCheck { max_rel_err: 0.0, worst_index: (0, 0), coordinates: 0 };
    let mut probe = params.to_vec();
    for ti in 0..params.len() {
        for ci in 0..params[ti].len() {
            let original = params[ti].data()[ci];
            probe[ti].data_mut()[ci] = original + T::lit(h);
            let plus = loss(&probe)?.as_f64();
            probe[ti].data_mut()[ci] = original - T::lit(h);
            let minus = loss(&probe)?.as_f64();
            probe[ti].data_mut()[ci] = original;

            let numeric = (plus - minus) / (2.0 * h);
            let err = relative_error(analytic[ti].data()[ci].as_f64(), numeric);
            worst.coordinates += 1;
            if err > worst.max_rel_err || err.is_nan() {
                worst.max_rel_err = if err.is_nan() { f64::INFINITY } else { err };
                worst.worst_index = (ti, ci);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_correct_and_wrong_gradients() {
        let params = vec![Tensor::from_vec(1, 2, vec![0.3f64, -1.1]).unwrap()];
        let loss = |p: &[Tensor<f64>]| Ok(p[0].data().iter().map(|v| v.sin()).sum::<f64>());
        let good = vec![params[0].map(f64::cos)];
        let res = check(&params, &good, 1e-6, loss).unwrap();
        assert!(res.max_rel_err < 1e-8);
        assert_eq!(res.coordinates, 2);
        let bad = vec![params[0].map(|v| v.cos() * 1.01)];
        assert!(check(&params, &bad, 1e-6, loss).unwrap().max_rel_err > 1e-3);
    }
}
