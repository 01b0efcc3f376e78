//! Bias-corrected Adam with row-sparse updates.
//!
//! Embedding training touches only a handful of table rows per step. The
//! optimizer therefore exposes a row-wise update: rows without gradient in a
//! step keep both their parameters and their moment estimates untouched.
//! Bias correction uses the shared step counter.

use thiserror::Error;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPS: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum AdamError {
    #[error("gradient shape {got} does not match parameter shape {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("unknown parameter slot {0}")]
    UnknownSlot(usize),
}

struct Moments {
    m: Vec<f64>,
    v: Vec<f64>,
}

/// Moment buffers for a fixed set of parameter tensors, addressed by slot
/// index in registration order.
pub struct AdamState {
    slots: Vec<Moments>,
    step: u64,
}

impl AdamState {
    pub fn new(shapes: &[usize]) -> Self {
        AdamState {
            slots: shapes
                .iter()
                .map(|&len| Moments {
                    m: vec![0.0; len],
                    v: vec![0.0; len],
                })
                .collect(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Advance the shared step counter; call once per optimizer step before
    /// the per-tensor updates.
    pub fn begin_step(&mut self) {
        self.step += 1;
    }

    fn correction(&self) -> (f64, f64) {
        let t = self.step as i32;
        (1.0 - BETA1.powi(t), 1.0 - BETA2.powi(t))
    }

    /// Dense update of a whole tensor.
    pub fn update_dense(
        &mut self,
        slot: usize,
        params: &mut [f64],
        grad: &[f64],
        lr: f64,
    ) -> Result<(), AdamError> {
        if grad.len() != params.len() {
            return Err(AdamError::ShapeMismatch {
                expected: params.len(),
                got: grad.len(),
            });
        }
        let (c1, c2) = self.correction();
        let slot = self.slots.get_mut(slot).ok_or(AdamError::UnknownSlot(slot))?;
        if slot.m.len() != params.len() {
            return Err(AdamError::ShapeMismatch {
                expected: slot.m.len(),
                got: params.len(),
            });
        }
        for i in 0..params.len() {
            let g = grad[i];
            slot.m[i] = BETA1 * slot.m[i] + (1.0 - BETA1) * g;
            slot.v[i] = BETA2 * slot.v[i] + (1.0 - BETA2) * g * g;
            let m_hat = slot.m[i] / c1;
            let v_hat = slot.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + EPS);
        }
        Ok(())
    }

    /// Update one row of a row-major `(rows x dim)` tensor.
    pub fn update_row(
        &mut self,
        slot: usize,
        params: &mut [f64],
        dim: usize,
        row: usize,
        grad: &[f64],
        lr: f64,
    ) -> Result<(), AdamError> {
        if grad.len() != dim {
            return Err(AdamError::ShapeMismatch {
                expected: dim,
                got: grad.len(),
            });
        }
        let (c1, c2) = self.correction();
        let slot = self.slots.get_mut(slot).ok_or(AdamError::UnknownSlot(slot))?;
        let start = row * dim;
        let p = &mut params[start..start + dim];
        let m = &mut slot.m[start..start + dim];
        let v = &mut slot.v[start..start + dim];
        for i in 0..dim {
            let g = grad[i];
            m[i] = BETA1 * m[i] + (1.0 - BETA1) * g;
            v[i] = BETA2 * v[i] + (1.0 - BETA2) * g * g;
            p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + EPS);
        }
        Ok(())
    }
}
