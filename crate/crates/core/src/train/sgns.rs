//! Skip-gram negative-sampling loss, its gradients, and the in-place SGD step.
//!
//! For a center vector `u`, positive context `v⁺` and negatives `v⁻ₙ`:
//!
//! ```text
//! L = −log σ(u·v⁺) − Σₙ log σ(−u·v⁻ₙ)
//! ∂L/∂u   = (σ(u·v⁺) − 1)·v⁺ + Σₙ σ(u·v⁻ₙ)·v⁻ₙ
//! ∂L/∂v⁺  = (σ(u·v⁺) − 1)·u
//! ∂L/∂v⁻ₙ = σ(u·v⁻ₙ)·u
//! ```

use std::sync::atomic::{AtomicU64, Ordering};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)`, stable for large |x|.
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss of one `(center, positive)` event.
pub fn sgns_pair_loss(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> f64 {
    let mut loss = -log_sigmoid(dot(center, positive));
    for n in negatives {
        loss -= log_sigmoid(-dot(center, n));
    }
    loss
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnsGradient {
    pub center: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Loss and its gradient with respect to every vector involved.
pub fn sgns_pair_grad(center: &[f64], positive: &[f64], negatives: &[&[f64]]) -> (f64, SgnsGradient) {
    let d = center.len();
    let loss = sgns_pair_loss(center, positive, negatives);
    let gp = sigmoid(dot(center, positive)) - 1.0;
    let mut gc: Vec<f64> = positive.iter().map(|v| gp * v).collect();
    let mut gn = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = sigmoid(dot(center, n));
        for i in 0..d {
            gc[i] += g * n[i];
        }
        gn.push(center.iter().map(|u| g * u).collect());
    }
    let grad = SgnsGradient {
        center: gc,
        positive: center.iter().map(|u| gp * u).collect(),
        negatives: gn,
    };
    (loss, grad)
}

/// Row-addressable parameter storage that SGD steps read from and add into.
pub trait Rows {
    fn dim(&self) -> usize;
    fn read(&self, row: u32, out: &mut [f64]);
    /// `row += coeff * v`
    fn add_scaled(&mut self, row: u32, coeff: f64, v: &[f64]);
}

/// Exclusive view of a row-major matrix.
pub struct DenseRows<'a> {
    data: &'a mut [f64],
    dim: usize,
}

impl<'a> DenseRows<'a> {
    pub fn new(data: &'a mut [f64], dim: usize) -> Self {
        DenseRows { data, dim }
    }
}

impl Rows for DenseRows<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn read(&self, row: u32, out: &mut [f64]) {
        let s = row as usize * self.dim;
        out.copy_from_slice(&self.data[s..s + self.dim]);
    }

    fn add_scaled(&mut self, row: u32, coeff: f64, v: &[f64]) {
        let s = row as usize * self.dim;
        for (x, y) in self.data[s..s + self.dim].iter_mut().zip(v) {
            *x += coeff * y;
        }
    }
}

/// Shared lock-free view for asynchronous multi-threaded SGD. Reads and
/// writes are relaxed per element; concurrent updates to a row may be lost.
#[derive(Clone, Copy)]
pub struct SharedRows<'a> {
    data: &'a [AtomicU64],
    dim: usize,
}

impl<'a> SharedRows<'a> {
    pub fn new(data: &'a [AtomicU64], dim: usize) -> Self {
        SharedRows { data, dim }
    }

    pub fn share(values: &[f64]) -> Vec<AtomicU64> {
        values.iter().map(|v| AtomicU64::new(v.to_bits())).collect()
    }

    pub fn unshare(cells: &[AtomicU64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }
}

impl Rows for SharedRows<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn read(&self, row: u32, out: &mut [f64]) {
        let s = row as usize * self.dim;
        for (o, c) in out.iter_mut().zip(&self.data[s..s + self.dim]) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_scaled(&mut self, row: u32, coeff: f64, v: &[f64]) {
        let s = row as usize * self.dim;
        for (c, y) in self.data[s..s + self.dim].iter().zip(v) {
            let x = f64::from_bits(c.load(Ordering::Relaxed));
            c.store((x + coeff * y).to_bits(), Ordering::Relaxed);
        }
    }
}

/// Reusable buffers for [`sgns_step`].
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    center: Vec<f64>,
    center_grad: Vec<f64>,
    targets: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Scratch {
    pub fn new(dim: usize) -> Self {
        Scratch {
            center: vec![0.0; dim],
            center_grad: vec![0.0; dim],
            targets: Vec::new(),
            coeffs: Vec::new(),
        }
    }
}

/// One SGD step on the negative-sampling loss. Every score is computed from
/// the pre-update parameters, then the output rows and finally the center
/// row are moved by `-lr * gradient`. Returns the pre-update loss.
pub fn sgns_step<I: Rows, O: Rows>(
    input: &mut I,
    output: &mut O,
    center: u32,
    positive: u32,
    negatives: &[u32],
    lr: f64,
    scratch: &mut Scratch,
) -> f64 {
    let d = input.dim();
    debug_assert_eq!(d, output.dim());
    let n = negatives.len() + 1;
    scratch.center.resize(d, 0.0);
    scratch.center_grad.clear();
    scratch.center_grad.resize(d, 0.0);
    scratch.targets.resize(n * d, 0.0);
    scratch.coeffs.clear();

    input.read(center, &mut scratch.center);
    let mut loss = 0.0;
    for (slot, &id) in std::iter::once(&positive).chain(negatives).enumerate() {
        let row = &mut scratch.targets[slot * d..(slot + 1) * d];
        output.read(id, row);
        let score = dot(&scratch.center, row);
        // dL/dscore
        let g = if slot == 0 {
            loss -= log_sigmoid(score);
            sigmoid(score) - 1.0
        } else {
            loss -= log_sigmoid(-score);
            sigmoid(score)
        };
        scratch.coeffs.push(g);
    }
    if lr == 0.0 {
        return loss;
    }
    for (slot, &id) in std::iter::once(&positive).chain(negatives).enumerate() {
        let g = scratch.coeffs[slot];
        let row = &scratch.targets[slot * d..(slot + 1) * d];
        for (acc, v) in scratch.center_grad.iter_mut().zip(row) {
            *acc += g * v;
        }
        output.add_scaled(id, -lr * g, &scratch.center);
    }
    input.add_scaled(center, -lr, &scratch.center_grad);
    loss
}
