//! Symmetric InfoNCE over a batch of paired embeddings.
//!
//! Rows are ℓ2-normalized, logits are `S = I Tᵀ / τ`, and the loss averages
//! the image→text (row-wise) and text→image (column-wise) cross-entropies
//! with the diagonal as target.

use super::linear::{LinearAdapter, Matrix};
use crate::error::{Error, Result};

fn normalize_rows(z: &Matrix) -> Result<(Matrix, Vec<f64>)> {
    let mut u = z.clone();
    let mut norms = Vec::with_capacity(z.rows());
    for i in 0..z.rows() {
        let norm = z.row(i).iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm(i));
        }
        u.row_mut(i).iter_mut().for_each(|v| *v /= norm);
        norms.push(norm);
    }
    Ok((u, norms))
}

fn check_pair(img: &Matrix, txt: &Matrix, tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::out_of_range("temperature", format!("{tau} must be > 0")));
    }
    if img.rows() == 0 {
        return Err(Error::out_of_range("batch size", "need at least one pair"));
    }
    if img.rows() != txt.rows() {
        return Err(Error::LengthMismatch(format!("{} images vs {} texts", img.rows(), txt.rows())));
    }
    if img.cols() != txt.cols() {
        return Err(Error::DimensionMismatch { expected: img.cols(), got: txt.cols() });
    }
    Ok(())
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Loss and, optionally, its gradient with respect to the unnormalized rows.
fn loss_and_grad(img: &Matrix, txt: &Matrix, tau: f64, want_grad: bool) -> Result<(f64, Option<(Matrix, Matrix)>)> {
    check_pair(img, txt, tau)?;
    let b = img.rows();
    let d = img.cols();
    let (ui, ni) = normalize_rows(img)?;
    let (ut, nt) = normalize_rows(txt)?;

    let mut s = Matrix::zeros(b, b);
    for i in 0..b {
        for j in 0..b {
            let dot: f64 = ui.row(i).iter().zip(ut.row(j)).map(|(x, y)| x * y).sum();
            s.as_mut_slice()[i * b + j] = dot / tau;
        }
    }
    let row_lse: Vec<f64> = (0..b).map(|i| log_sum_exp((0..b).map(|j| s.get(i, j)))).collect();
    let col_lse: Vec<f64> = (0..b).map(|j| log_sum_exp((0..b).map(|i| s.get(i, j)))).collect();
    let mut row_loss = 0.0;
    let mut col_loss = 0.0;
    for i in 0..b {
        row_loss += row_lse[i] - s.get(i, i);
        col_loss += col_lse[i] - s.get(i, i);
    }
    let loss = 0.5 * (row_loss / b as f64 + col_loss / b as f64);
    if !want_grad {
        return Ok((loss, None));
    }

    // dL/dS = ((softmax_rows(S) - I) + (softmax_cols(S) - I)) / (2B)
    let scale = 0.5 / b as f64;
    let mut g = Matrix::zeros(b, b);
    for i in 0..b {
        for j in 0..b {
            let sij = s.get(i, j);
            let mut v = (sij - row_lse[i]).exp() + (sij - col_lse[j]).exp();
            if i == j {
                v -= 2.0;
            }
            g.as_mut_slice()[i * b + j] = v * scale;
        }
    }
    // dL/dÛ_I = G Û_T / τ, dL/dÛ_T = Gᵀ Û_I / τ
    let mut dui = Matrix::zeros(b, d);
    let mut dut = Matrix::zeros(b, d);
    for i in 0..b {
        for j in 0..b {
            let gij = g.get(i, j) / tau;
            if gij == 0.0 {
                continue;
            }
            for k in 0..d {
                dui.as_mut_slice()[i * d + k] += gij * ut.get(j, k);
                dut.as_mut_slice()[j * d + k] += gij * ui.get(i, k);
            }
        }
    }
    // Through u = z / |z|: dz = (du - u (u·du)) / |z|
    let back = |u: &Matrix, du: &Matrix, norms: &[f64]| {
        let mut dz = Matrix::zeros(b, d);
        for i in 0..b {
            let proj: f64 = u.row(i).iter().zip(du.row(i)).map(|(x, y)| x * y).sum();
            for k in 0..d {
                dz.as_mut_slice()[i * d + k] = (du.get(i, k) - u.get(i, k) * proj) / norms[i];
            }
        }
        dz
    };
    Ok((loss, Some((back(&ui, &dui, &ni), back(&ut, &dut, &nt)))))
}

pub fn infonce_loss(img: &Matrix, txt: &Matrix, tau: f64) -> Result<f64> {
    loss_and_grad(img, txt, tau, false).map(|(l, _)| l)
}

/// Gradient of one adapter, in the [`LinearAdapter::params`] layout.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGrad {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearGrad {
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.weight.clone();
        v.extend_from_slice(&self.bias);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdapterGrads {
    pub loss: f64,
    pub image: LinearGrad,
    pub text: LinearGrad,
}

fn linear_grad(adapter: &LinearAdapter, x: &Matrix, dz: &Matrix) -> LinearGrad {
    let (din, dout) = (adapter.dim_in(), adapter.dim_out());
    let mut weight = vec![0.0; dout * din];
    let mut bias = vec![0.0; dout];
    for r in 0..x.rows() {
        let xr = x.row(r);
        for (o, &g) in dz.row(r).iter().enumerate() {
            bias[o] += g;
            for (w, &xv) in weight[o * din..(o + 1) * din].iter_mut().zip(xr) {
                *w += g * xv;
            }
        }
    }
    LinearGrad { weight, bias }
}

/// Loss of the adapted batch and its exact gradient with respect to both
/// adapters' weights and biases.
pub fn infonce_gradients(
    img: &Matrix,
    txt: &Matrix,
    image_adapter: &LinearAdapter,
    text_adapter: &LinearAdapter,
    tau: f64,
) -> Result<AdapterGrads> {
    let zi = image_adapter.forward_batch(img)?;
    let zt = text_adapter.forward_batch(txt)?;
    let (loss, grads) = loss_and_grad(&zi, &zt, tau, true)?;
    let (dzi, dzt) = grads.expect("gradient requested");
    Ok(AdapterGrads {
        loss,
        image: linear_grad(image_adapter, img, &dzi),
        text: linear_grad(text_adapter, txt, &dzt),
    })
}
