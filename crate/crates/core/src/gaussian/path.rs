use crate::error::{Error, Result};

/// A `d`-dimensional path sampled at `len` grid points.
///
/// Values are stored point-major: the coordinates of grid point `i`
/// occupy `data[i*d .. (i+1)*d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    dim: usize,
    data: Vec<f64>,
}

impl Path {
    pub fn zeros(dim: usize, len: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * len],
        }
    }

    /// Builds a path from one series per coordinate.
    pub fn from_coordinates(coords: &[Vec<f64>]) -> Result<Self> {
        let dim = coords.len();
        if dim == 0 {
            return Err(Error::Empty("path coordinates"));
        }
        let len = coords[0].len();
        if let Some(bad) = coords.iter().find(|c| c.len() != len) {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        let mut p = Self::zeros(dim, len);
        for (k, c) in coords.iter().enumerate() {
            p.set_coordinate(k, c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn get(&self, coord: usize, i: usize) -> f64 {
        self.data[i * self.dim + coord]
    }

    pub fn coordinate(&self, coord: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.get(coord, i)).collect()
    }

    pub(crate) fn set_coordinate(&mut self, coord: usize, values: &[f64]) {
        for (i, v) in values.iter().enumerate() {
            self.data[i * self.dim + coord] = *v;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }
}
