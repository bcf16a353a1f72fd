use crate::error::{Error, Result};

/// Adam moments plus a step-decayed learning rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub base_lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub decay_factor: f64,
    /// Epoch indices at which the learning rate is multiplied by `decay_factor`.
    pub decay_milestones: Vec<usize>,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            lr,
            base_lr: lr,
            beta1,
            beta2,
            eps,
            decay_factor: 1.0,
            decay_milestones: Vec::new(),
        }
    }

    pub fn with_decay(mut self, factor: f64, milestones: Vec<usize>) -> Self {
        self.decay_factor = factor;
        self.decay_milestones = milestones;
        self
    }

    /// Set the learning rate for `epoch`: one decay per milestone reached.
    pub fn begin_epoch(&mut self, epoch: usize) {
        let passed = self.decay_milestones.iter().filter(|&&m| epoch >= m).count();
        self.lr = self.base_lr * self.decay_factor.powi(passed as i32);
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::DimensionMismatch { expected: params.len(), got: grads.len().max(state.m.len()) });
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    for ((p, &g), (m, v)) in params.iter_mut().zip(grads).zip(state.m.iter_mut().zip(state.v.iter_mut())) {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / c1;
        let v_hat = *v / c2;
        *p -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh(n: usize, lr: f64) -> AdamState {
        AdamState::new(n, lr, 0.9, 0.999, 1e-8)
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = vec![0.5, -1.0];
        let mut s = fresh(2, 0.1);
        adam_step(&mut p, &[0.0, 0.0], &mut s).unwrap();
        assert_eq!(p, vec![0.5, -1.0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_closed_form() {
        // m_hat = v_hat = g^2 = 1 after bias correction, so the step is lr / (1 + eps).
        let mut p = vec![0.0];
        let mut s = fresh(1, 0.1);
        adam_step(&mut p, &[1.0], &mut s).unwrap();
        assert!((p[0] + 0.1).abs() <= 1e-7, "{}", p[0]);
    }

    #[test]
    fn zero_lr_is_inert() {
        let mut p = vec![1.0, 2.0, 3.0];
        let mut s = fresh(3, 0.0);
        for _ in 0..5 {
            adam_step(&mut p, &[10.0, -3.0, 0.5], &mut s).unwrap();
        }
        assert_eq!(p, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn errors() {
        let mut s = fresh(2, 0.1);
        assert!(adam_step(&mut [0.0, 0.0], &[1.0], &mut s).is_err());
        assert!(matches!(adam_step(&mut [0.0, 0.0], &[1.0, f64::NAN], &mut s), Err(Error::NonFinite(_))));
    }

    #[test]
    fn milestone_decay() {
        let mut s = fresh(1, 1e-4).with_decay(0.1, vec![7, 11]);
        let lr_at = |s: &mut AdamState, e| {
            s.begin_epoch(e);
            s.lr
        };
        assert_eq!(lr_at(&mut s, 0), 1e-4);
        assert_eq!(lr_at(&mut s, 6), 1e-4);
        assert!((lr_at(&mut s, 7) - 1e-5).abs() < 1e-20);
        assert!((lr_at(&mut s, 11) - 1e-6).abs() < 1e-20);
        assert!((lr_at(&mut s, 14) - 1e-6).abs() < 1e-20);
    }

    #[test]
    fn minimizes_quadratic() {
        let mut p = vec![3.0, -2.0];
        let mut s = fresh(2, 0.05);
        for _ in 0..2000 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
            adam_step(&mut p, &g, &mut s).unwrap();
        }
        assert!(p.iter().all(|x| x.abs() < 1e-2), "{p:?}");
    }
}
