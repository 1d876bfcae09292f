//! Skip-gram negative-sampling loss and its SGD step.
//!
//! For a center representation `h`, positive output vector `u_c` and negative
//! output vectors `u_n`:
//!
//! ```text
//! L = -log σ(u_c·h) - Σ_n log σ(-u_n·h)
//! ∂L/∂h   = (σ(u_c·h) - 1)·u_c + Σ_n σ(u_n·h)·u_n
//! ∂L/∂u_c = (σ(u_c·h) - 1)·h
//! ∂L/∂u_n = σ(u_n·h)·h
//! ```

use num_traits::Float;

use super::matrix::Matrix;
use super::model::{EmbeddingModel, InputRows};

/// Numerically stable `log σ(x)`.
pub fn log_sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

fn sigmoid<F: Float>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).fold(F::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Loss and gradients of the negative-sampling objective.
///
/// `outputs[0]` is the positive (context) vector and the rest are negatives.
/// On return `grad_h` holds `∂L/∂h` and `coefs[i]` is the scalar such that
/// `∂L/∂outputs[i] = coefs[i]·h`. Returns the loss.
pub fn negative_sampling_gradient<F: Float>(
    h: &[F],
    outputs: &[&[F]],
    grad_h: &mut [F],
    coefs: &mut [F],
) -> F {
    debug_assert_eq!(grad_h.len(), h.len());
    debug_assert_eq!(coefs.len(), outputs.len());
    grad_h.iter_mut().for_each(|g| *g = F::zero());
    let mut loss = F::zero();
    for (i, (&u, coef)) in outputs.iter().zip(coefs.iter_mut()).enumerate() {
        let score = dot(u, h);
        let (label_loss, g) = if i == 0 {
            (-log_sigmoid(score), sigmoid(score) - F::one())
        } else {
            (-log_sigmoid(-score), sigmoid(score))
        };
        loss = loss + label_loss;
        *coef = g;
        for (gh, &x) in grad_h.iter_mut().zip(u) {
            *gh = *gh + g * x;
        }
    }
    loss
}

/// One SGD step on the output side.
///
/// Updates the context row and every negative row of `output` in place and
/// writes `∂L/∂h` (computed with the pre-update output vectors) into
/// `grad_h`, leaving the input-side update to the caller. Returns the loss.
pub fn skipgram_step(
    h: &[f32],
    context: usize,
    negatives: &[usize],
    output: &mut Matrix,
    lr: f32,
    grad_h: &mut [f32],
) -> f32 {
    let indices: Vec<usize> = std::iter::once(context).chain(negatives.iter().copied()).collect();
    let mut coefs = vec![0.0f32; indices.len()];
    let loss = {
        let rows: Vec<&[f32]> = indices.iter().map(|&i| output.row(i)).collect();
        negative_sampling_gradient(h, &rows, grad_h, &mut coefs)
    };
    for (&idx, &coef) in indices.iter().zip(&coefs) {
        let step = lr * coef;
        for (u, &x) in output.row_mut(idx).iter_mut().zip(h) {
            *u -= step * x;
        }
    }
    loss
}

impl EmbeddingModel {
    /// Full SGD step for one (center, context) pair.
    ///
    /// The center representation is the mean of the rows in `center`; its
    /// gradient is split equally across those rows.
    pub fn sgd_step(
        &mut self,
        center: &InputRows,
        context: usize,
        negatives: &[usize],
        lr: f32,
    ) -> f32 {
        let dim = self.dim();
        let mut h = vec![0.0f32; dim];
        let mut grad_h = vec![0.0f32; dim];
        self.sgd_step_with(center, context, negatives, lr, &mut h, &mut grad_h)
    }

    pub(crate) fn sgd_step_with(
        &mut self,
        center: &InputRows,
        context: usize,
        negatives: &[usize],
        lr: f32,
        h: &mut [f32],
        grad_h: &mut [f32],
    ) -> f32 {
        let n = center.len();
        h.iter_mut().for_each(|x| *x = 0.0);
        if let Some(w) = center.word {
            add_assign(h, self.input_words.row(w), 1.0);
        }
        for &b in &center.buckets {
            add_assign(h, self.input_buckets.row(b), 1.0);
        }
        if n > 0 {
            let inv = 1.0 / n as f32;
            h.iter_mut().for_each(|x| *x *= inv);
        }

        let loss = skipgram_step(h, context, negatives, &mut self.output, lr, grad_h);

        if n > 0 {
            let scale = -lr / n as f32;
            if let Some(w) = center.word {
                add_assign(self.input_words.row_mut(w), grad_h, scale);
            }
            for &b in &center.buckets {
                add_assign(self.input_buckets.row_mut(b), grad_h, scale);
            }
        }
        loss
    }
}

fn add_assign(dst: &mut [f32], src: &[f32], scale: f32) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}
