//! Contrastive losses over pair scores, with analytic score gradients.

use serde::{Deserialize, Serialize};

use crate::linalg::{log_sigmoid, sigmoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Nce,
    Hinge,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::Nce => write!(f, "nce"),
            LossKind::Hinge => write!(f, "hinge"),
        }
    }
}

/// Binary cross-entropy over one positive score and its negative scores:
/// `-log sigma(s_pos) - sum log(1 - sigma(s_neg))`.
///
/// Returns the loss, the gradient w.r.t. the positive score
/// (`sigma(s_pos) - 1`), and the gradient per negative score
/// (`sigma(s_neg)`). Stable for |s| up to hundreds.
pub fn nce_loss(s_pos: f64, s_negs: &[f64]) -> (f64, f64, Vec<f64>) {
    let mut loss = -log_sigmoid(s_pos);
    let mut neg_grads = Vec::with_capacity(s_negs.len());
    for &s in s_negs {
        // log(1 - sigma(s)) == log sigma(-s)
        loss -= log_sigmoid(-s);
        neg_grads.push(sigmoid(s));
    }
    (loss, sigmoid(s_pos) - 1.0, neg_grads)
}

/// Margin loss `max(0, s_neg - s_pos + margin)` with subgradients
/// `(-1, +1)` on `(s_pos, s_neg)` when the margin is violated and `(0, 0)`
/// otherwise; the kink itself counts as inactive.
pub fn hinge_loss(s_pos: f64, s_neg: f64, margin: f64) -> (f64, f64, f64) {
    let a = s_neg - s_pos + margin;
    if a > 0.0 {
        (a, -1.0, 1.0)
    } else {
        (0.0, 0.0, 0.0)
    }
}
