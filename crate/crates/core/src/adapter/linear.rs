use crate::error::{Error, Result};
use crate::types::EmbeddingTable;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch { expected: cols, got: bad.len() });
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Rows `idx` of an embedding table, widened to `f64`.
    pub fn gather(table: &EmbeddingTable, idx: &[usize]) -> Self {
        let cols = table.dim();
        let mut data = Vec::with_capacity(idx.len() * cols);
        for &i in idx {
            data.extend(table.row(i).iter().map(|&v| v as f64));
        }
        Self { rows: idx.len(), cols, data }
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

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// One linear layer `x -> W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAdapter {
    dim_in: usize,
    dim_out: usize,
    /// Row-major `dim_out x dim_in`.
    weight: Vec<f64>,
    bias: Vec<f64>,
}

impl LinearAdapter {
    pub fn identity(dim: usize) -> Self {
        let mut weight = vec![0.0; dim * dim];
        for i in 0..dim {
            weight[i * dim + i] = 1.0;
        }
        Self { dim_in: dim, dim_out: dim, weight, bias: vec![0.0; dim] }
    }

    pub fn new(dim_out: usize, dim_in: usize, weight: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weight.len() != dim_out * dim_in {
            return Err(Error::DimensionMismatch { expected: dim_out * dim_in, got: weight.len() });
        }
        if bias.len() != dim_out {
            return Err(Error::DimensionMismatch { expected: dim_out, got: bias.len() });
        }
        if weight.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("adapter parameters"));
        }
        Ok(Self { dim_in, dim_out, weight, bias })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// Parameters flattened as `[W row-major.., b..]`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.weight.clone();
        p.extend_from_slice(&self.bias);
        p
    }

    pub fn set_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::DimensionMismatch { expected: self.param_count(), got: flat.len() });
        }
        let (w, b) = flat.split_at(self.weight.len());
        self.weight.copy_from_slice(w);
        self.bias.copy_from_slice(b);
        Ok(())
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, (w_row, b)) in out.iter_mut().zip(self.weight.chunks_exact(self.dim_in).zip(&self.bias)) {
            let mut acc = 0.0;
            for (w, v) in w_row.iter().zip(x) {
                acc += w * v;
            }
            *o = acc + b;
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: x.len() });
        }
        let mut out = vec![0.0; self.dim_out];
        self.apply(x, &mut out);
        Ok(out)
    }

    /// Row-wise forward pass over a batch.
    pub fn forward_batch(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: x.cols() });
        }
        let mut out = Matrix::zeros(x.rows(), self.dim_out);
        for i in 0..x.rows() {
            self.apply(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }

    /// Map every row of an embedding table; the input table is not touched.
    pub fn transform_table(&self, table: &EmbeddingTable) -> Result<EmbeddingTable> {
        if table.dim() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, got: table.dim() });
        }
        let mut x = vec![0.0; self.dim_in];
        let mut y = vec![0.0; self.dim_out];
        let mut data = Vec::with_capacity(table.len() * self.dim_out);
        for row in table.rows() {
            for (dst, &v) in x.iter_mut().zip(row) {
                *dst = v as f64;
            }
            self.apply(&x, &mut y);
            data.extend(y.iter().map(|&v| v as f32));
        }
        EmbeddingTable::new(table.kind, self.dim_out, data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::EmbeddingKind;

    #[test]
    fn identity_forward() {
        let a = LinearAdapter::identity(3);
        assert_eq!(a.forward(&[1.5, -2.0, 0.25]).unwrap(), vec![1.5, -2.0, 0.25]);
    }

    #[test]
    fn scaled_and_constant() {
        let a = LinearAdapter::new(2, 2, vec![2.0, 0.0, 0.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(a.forward(&[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
        let c = LinearAdapter::new(2, 2, vec![0.0; 4], vec![0.3, -7.0]).unwrap();
        assert_eq!(c.forward(&[123.0, -4.0]).unwrap(), vec![0.3, -7.0]);
    }

    #[test]
    fn dimension_mismatch() {
        let a = LinearAdapter::identity(3);
        assert!(a.forward(&[1.0]).is_err());
        assert!(LinearAdapter::new(2, 2, vec![0.0; 3], vec![0.0; 2]).is_err());
    }

    #[test]
    fn identity_transform_is_bytewise() {
        let data = vec![0.1f32, -3.5, 7.25, 1e-7, 2.0, -0.0];
        let t = EmbeddingTable::new(EmbeddingKind::Image, 3, data).unwrap();
        let out = LinearAdapter::identity(3).transform_table(&t).unwrap();
        for (a, b) in t.as_slice().iter().zip(out.as_slice()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn params_round_trip() {
        let mut a = LinearAdapter::identity(2);
        let p = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        a.set_params(&p).unwrap();
        assert_eq!(a.params(), p);
        assert_eq!(a.forward(&[1.0, 1.0]).unwrap(), vec![8.0, 13.0]);
    }
}
