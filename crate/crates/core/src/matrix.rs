//! Dense column-major storage and column standardization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real matrix stored column by column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    /// Builds a matrix from column-major values.
    pub fn from_col_major(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != p) {
            return Err(Error::InvalidInput("rows have unequal lengths".into()));
        }
        let mut values = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.as_ref().iter().enumerate() {
                values[j * n + i] = v;
            }
        }
        Ok(Self { rows: n, cols: p, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.cols).map(move |j| self.column(j))
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    /// Row-major copy of the values.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        for j in 0..self.cols {
            for (i, &v) in self.column(j).iter().enumerate() {
                out[i * self.cols + j] = v;
            }
        }
        out
    }

    pub fn as_col_major(&self) -> &[f64] {
        &self.values
    }

    pub fn into_col_major(self) -> Vec<f64> {
        self.values
    }

    pub fn transpose(&self) -> Matrix {
        Matrix { rows: self.cols, cols: self.rows, values: self.to_row_major() }
    }

    /// Sub-matrix formed by the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Matrix {
        let mut values = Vec::with_capacity(idx.len() * self.rows);
        for &j in idx {
            values.extend_from_slice(self.column(j));
        }
        Matrix { rows: self.rows, cols: idx.len(), values }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Raw samples-by-features data: `n >= 2` rows, `p >= 1` columns, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(Matrix);

impl DataMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 samples, got {}", m.rows())));
        }
        if m.cols() < 1 {
            return Err(Error::InvalidInput("need at least one feature".into()));
        }
        if let Some(pos) = m.as_col_major().iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite entry at row {}, column {}",
                pos % m.rows(),
                pos / m.rows()
            )));
        }
        Ok(Self(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn p(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

/// What to do with a column whose sample SD is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantColumns {
    #[default]
    Error,
    Drop,
}

/// Column-standardized matrix `W(i,j) = (X(i,j) - mean_j) / sd_j` with the
/// `n - 1` denominator, plus the per-column constants that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    w: Matrix,
    means: Vec<f64>,
    sds: Vec<f64>,
    /// Original column index of every retained column.
    kept: Vec<usize>,
}

impl StandardizedMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.w.rows()
    }

    pub fn p(&self) -> usize {
        self.w.cols()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
    }

    /// Maps column positions of `W` back to columns of the raw input.
    pub fn original_index(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped_any(&self) -> bool {
        self.kept.iter().enumerate().any(|(a, &b)| a != b)
    }

    /// Re-wraps as a raw matrix, e.g. to check idempotence.
    pub fn to_data(&self) -> DataMatrix {
        DataMatrix(self.w.clone())
    }
}

/// Mean and sample SD (`n - 1` denominator).
pub fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn standardize_columns(x: &DataMatrix, constant: ConstantColumns) -> Result<StandardizedMatrix> {
    let m = x.matrix();
    let n = m.rows();
    let stats: Vec<(f64, f64)> = (0..m.cols()).into_par_iter().map(|j| mean_sd(m.column(j))).collect();

    let mut kept = Vec::with_capacity(stats.len());
    for (j, &(_, sd)) in stats.iter().enumerate() {
        if sd > 0.0 {
            kept.push(j);
        } else if constant == ConstantColumns::Error {
            return Err(Error::ZeroVarianceColumn(j));
        }
    }
    if kept.is_empty() {
        return Err(Error::InvalidInput("every column is constant".into()));
    }

    let mut values = vec![0.0; n * kept.len()];
    values.par_chunks_mut(n).zip(kept.par_iter()).for_each(|(out, &j)| {
        let (mean, sd) = stats[j];
        for (o, &v) in out.iter_mut().zip(m.column(j)) {
            *o = (v - mean) / sd;
        }
    });
    let means = kept.iter().map(|&j| stats[j].0).collect();
    let sds = kept.iter().map(|&j| stats[j].1).collect();
    Ok(StandardizedMatrix { w: Matrix { rows: n, cols: kept.len(), values }, means, sds, kept })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> DataMatrix {
        DataMatrix::new(Matrix::from_col_major(v.len(), 1, v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn three_point_column() {
        let w = standardize_columns(&col(&[1.0, 2.0, 3.0]), ConstantColumns::Error).unwrap();
        assert_eq!(w.matrix().column(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(w.means(), &[2.0]);
        assert_eq!(w.sds(), &[1.0]);
    }

    #[test]
    fn two_point_column() {
        let w = standardize_columns(&col(&[0.0, 2.0]), ConstantColumns::Error).unwrap();
        assert_eq!(w.means(), &[1.0]);
        assert!((w.sds()[0] - 2f64.sqrt()).abs() < 1e-15);
        let c = w.matrix().column(0);
        assert!((c[0] + 0.70711).abs() < 1e-5 && (c[1] - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn constant_column_is_an_error() {
        let err = standardize_columns(&col(&[5.0, 5.0, 5.0]), ConstantColumns::Error).unwrap_err();
        assert!(matches!(err, Error::ZeroVarianceColumn(0)));
    }

    #[test]
    fn constant_column_can_be_dropped() {
        let x = DataMatrix::from_rows(&[[1.0, 7.0, 0.0], [2.0, 7.0, 1.0], [4.0, 7.0, 5.0]]).unwrap();
        let w = standardize_columns(&x, ConstantColumns::Drop).unwrap();
        assert_eq!(w.p(), 2);
        assert_eq!(w.original_index(), &[0, 2]);
    }

    #[test]
    fn rejects_degenerate_shapes() {
        assert!(DataMatrix::from_rows(&[[1.0, 2.0]]).is_err());
        assert!(DataMatrix::from_rows(&[[1.0], [f64::NAN]]).is_err());
    }

    #[test]
    fn transpose_and_rows() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]).unwrap();
        assert_eq!(m.row(1), vec![4.0, 5.0, 6.0]);
        let t = m.transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.column(1), &[4.0, 5.0, 6.0]);
        assert_eq!(m.select_columns(&[2, 0]).column(0), &[3.0, 6.0]);
    }
}
