use std::sync::atomic::{AtomicU64, Ordering};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn add_scaled_row(&mut self, i: usize, scale: f64, v: &[f64]) {
        for (x, y) in self.row_mut(i).iter_mut().zip(v) {
            *x += scale * y;
        }
    }
}

/// Read access to parameter rows, shared by the plain and the concurrently
/// updated matrix.
pub trait RowRead {
    fn dim(&self) -> usize;
    fn num_rows(&self) -> usize;
    fn dot_row(&self, row: usize, v: &[f64]) -> f64;
    /// `out += scale * row`
    fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]);
}

impl RowRead for Matrix {
    fn dim(&self) -> usize {
        self.cols
    }

    fn num_rows(&self) -> usize {
        self.rows
    }

    #[inline]
    fn dot_row(&self, row: usize, v: &[f64]) -> f64 {
        super::math::dot(self.row(row), v)
    }

    #[inline]
    fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(self.row(row)) {
            *o += scale * x;
        }
    }
}

/// Matrix of `f64` stored as atomic bit patterns. Workers read and write it
/// without locks; concurrent updates to one entry may be lost, which the
/// training procedure tolerates.
pub struct AtomicMatrix {
    rows: usize,
    cols: usize,
    data: Vec<AtomicU64>,
}

impl AtomicMatrix {
    pub fn from_matrix(m: &Matrix) -> Self {
        AtomicMatrix {
            rows: m.rows,
            cols: m.cols,
            data: m.data.iter().map(|x| AtomicU64::new(x.to_bits())).collect(),
        }
    }

    pub fn into_matrix(self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .into_iter()
                .map(|x| f64::from_bits(x.into_inner()))
                .collect(),
        }
    }

    #[inline]
    fn cell(&self, row: usize) -> &[AtomicU64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub fn read_row(&self, row: usize, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(self.cell(row)) {
            *o = f64::from_bits(x.load(Ordering::Relaxed));
        }
    }

    /// `row += scale * v`, element by element.
    #[inline]
    pub fn add_scaled_row(&self, row: usize, scale: f64, v: &[f64]) {
        for (x, y) in self.cell(row).iter().zip(v) {
            let old = f64::from_bits(x.load(Ordering::Relaxed));
            x.store((old + scale * y).to_bits(), Ordering::Relaxed);
        }
    }
}

impl RowRead for AtomicMatrix {
    fn dim(&self) -> usize {
        self.cols
    }

    fn num_rows(&self) -> usize {
        self.rows
    }

    #[inline]
    fn dot_row(&self, row: usize, v: &[f64]) -> f64 {
        self.cell(row)
            .iter()
            .zip(v)
            .map(|(x, y)| f64::from_bits(x.load(Ordering::Relaxed)) * y)
            .sum()
    }

    #[inline]
    fn accumulate_row(&self, row: usize, scale: f64, out: &mut [f64]) {
        for (o, x) in out.iter_mut().zip(self.cell(row)) {
            *o += scale * f64::from_bits(x.load(Ordering::Relaxed));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_round_trip() {
        let m = Matrix::from_vec(2, 2, vec![1.0, -2.0, 0.5, 3.25]);
        let a = AtomicMatrix::from_matrix(&m);
        a.add_scaled_row(1, 2.0, &[1.0, 1.0]);
        assert_eq!(a.dot_row(0, &[1.0, 1.0]), -1.0);
        let back = a.into_matrix();
        assert_eq!(back.row(1), &[2.5, 5.25]);
        assert_eq!(back.row(0), m.row(0));
    }
}
