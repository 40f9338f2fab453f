use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major 2-D array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar", try_from = "RawTensor<T>")]
pub struct Tensor<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Scalar")]
struct RawTensor<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> TryFrom<RawTensor<T>> for Tensor<T> {
    type Error = Error;

    fn try_from(raw: RawTensor<T>) -> Result<Self> {
        Tensor::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl<T: Scalar> Tensor<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(
                "Tensor::from_vec",
                format!("{} values for shape {rows}x{cols}", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::full(rows, cols, T::zero())
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::full(rows, cols, T::one())
    }

    pub fn full(rows: usize, cols: usize, value: T) -> Self {
        Self { rows, cols, data: vec![value; rows * cols] }
    }

    pub fn scalar(value: T) -> Self {
        Self::full(1, 1, value)
    }

    /// Single column built from a slice.
    pub fn column(values: &[T]) -> Self {
        Self { rows: values.len(), cols: 1, data: values.to_vec() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Value of a 1x1 tensor.
    pub fn item(&self) -> Result<T> {
        if self.shape() != (1, 1) {
            return Err(Error::dim("Tensor::item", format!("shape {:?} is not 1x1", self.shape())));
        }
        Ok(self.data[0])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Elementwise combination of two equally shaped tensors.
    pub fn zip_map(&self, other: &Self, op: &'static str, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.expect_same_shape(other, op)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub(crate) fn expect_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::dim(
                op,
                format!("{:?} vs {:?}", self.shape(), other.shape()),
            ));
        }
        Ok(())
    }

    /// `self += other`, elementwise.
    pub fn add_assign(&mut self, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
    }

    pub fn sum(&self) -> T {
        self.data.iter().copied().sum()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dim(
                "matmul",
                format!("{:?} x {:?}", self.shape(), other.shape()),
            ));
        }
        let (n, m) = (self.rows, other.cols);
        let mut out = vec![T::zero(); n * m];
        for i in 0..n {
            let out_row = &mut out[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == T::zero() {
                    continue;
                }
                let b_row = &other.data[k * m..(k + 1) * m];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(Self { rows: n, cols: m, data: out })
    }

    /// `x·w + b` with `b` (1xO) added to every row.
    pub fn affine(x: &Self, w: &Self, b: &Self) -> Result<Self> {
        if b.rows != 1 || b.cols != w.cols {
            return Err(Error::dim(
                "affine",
                format!("bias {:?} does not match weight {:?}", b.shape(), w.shape()),
            ));
        }
        let mut out = x.matmul(w)?;
        for r in 0..out.rows {
            for c in 0..out.cols {
                let i = r * out.cols + c;
                out.data[i] = out.data[i] + b.data[c];
            }
        }
        Ok(out)
    }

    /// Column sums as a 1xC row.
    pub fn sum_rows(&self) -> Self {
        let mut out = vec![T::zero(); self.cols];
        for r in 0..self.rows {
            for (o, &v) in out.iter_mut().zip(self.row(r)) {
                *o = *o + v;
            }
        }
        Self { rows: 1, cols: self.cols, data: out }
    }

    /// Copies of a single column laid side by side: (Bx1) -> (BxK).
    pub fn tile_cols(&self, k: usize) -> Result<Self> {
        if self.cols != 1 {
            return Err(Error::dim("tile_cols", format!("expected a column, got {:?}", self.shape())));
        }
        Ok(Self::from_fn(self.rows, k, |r, _| self.data[r]))
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::lit(v.as_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_checks_length() {
        assert!(Tensor::<f64>::from_vec(2, 2, vec![1.0; 3]).is_err());
        let t = Tensor::from_vec(2, 3, (0..6).map(f64::from).collect()).unwrap();
        assert_eq!(t.get(1, 2), 5.0);
        assert_eq!(t.transpose().get(2, 1), 5.0);
    }

    #[test]
    fn affine_identity_weights() {
        let x = Tensor::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let w = Tensor::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let b = Tensor::zeros(1, 2);
        assert_eq!(Tensor::affine(&x, &w, &b).unwrap().data(), &[1.0, 2.0]);
    }

    #[test]
    fn matmul_shape_mismatch_is_error() {
        let a = Tensor::<f64>::zeros(2, 3);
        let b = Tensor::<f64>::zeros(2, 3);
        assert!(matches!(a.matmul(&b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn deserialize_validates_length() {
        assert!(serde_json::from_str::<Tensor<f64>>(r#"{"rows":2,"cols":2,"data":[1.0]}"#).is_err());
        let t: Tensor<f64> = serde_json::from_str(r#"{"rows":1,"cols":2,"data":[1.0,0.1]}"#).unwrap();
        assert_eq!(t.get(0, 1), 0.1);
    }

    #[test]
    fn sum_rows_and_tile() {
        let t = Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.sum_rows().data(), &[4.0, 6.0]);
        let c = Tensor::column(&[1.0, 2.0]).tile_cols(3).unwrap();
        assert_eq!(c.row(1), &[2.0, 2.0, 2.0]);
    }
}
