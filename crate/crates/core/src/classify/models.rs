//! The three pair architectures. Each keeps its parameters in one flat
//! vector so training, checkpointing and gradient checks can treat them
//! uniformly; the shared variants hold a single projection used for both
//! words of a pair.

use rand::Rng as _;

use super::{leaky_rectifier, PairClassifier};
use crate::seed;
use crate::train::{dot, log_sigmoid, sigmoid};
use crate::{Error, Result};

/// Named row-major block of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
}

impl Block {
    const fn new(name: &'static str, rows: usize, cols: usize) -> Self {
        Block { name, rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn total(blocks: &[Block]) -> usize {
    blocks.iter().map(Block::len).sum()
}

/// Fills weight blocks with `U(-1/√fan_in, 1/√fan_in)`; biases stay zero.
fn init(blocks: &[Block], seed_value: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed_value);
    let mut theta = Vec::with_capacity(total(blocks));
    for b in blocks {
        if b.name.starts_with('b') {
            theta.extend(std::iter::repeat_n(0.0, b.len()));
        } else {
            let bound = 1.0 / (b.cols as f64).sqrt();
            theta.extend((0..b.len()).map(|_| (rng.random::<f64>() * 2.0 - 1.0) * bound));
        }
    }
    theta
}

/// `out = W x + b` with `W` of shape `out.len() × x.len()`.
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = b[i] + dot(&w[i * x.len()..(i + 1) * x.len()], x);
    }
}

/// `dW += g xᵀ`, `db += g`.
fn affine_backward(g: &[f64], x: &[f64], dw: &mut [f64], db: &mut [f64]) {
    let n = x.len();
    for (i, &gi) in g.iter().enumerate() {
        if gi == 0.0 {
            continue;
        }
        db[i] += gi;
        for (d, &xj) in dw[i * n..(i + 1) * n].iter_mut().zip(x) {
            *d += gi * xj;
        }
    }
}

fn leaky_slope(z: f64, slope: f64) -> f64 {
    if z >= 0.0 {
        1.0
    } else {
        slope
    }
}

/// Binary cross-entropy on a logit, written via `log σ` to stay finite.
fn logistic_loss(logit: f64, target: bool) -> f64 {
    -log_sigmoid(if target { logit } else { -logit })
}

fn check_dims(dim: usize, va: &[f64], vb: &[f64]) {
    assert!(
        va.len() == dim && vb.len() == dim,
        "dimension mismatch: model {dim}, inputs {} and {}",
        va.len(),
        vb.len()
    );
}

fn check_slope(slope: f64) -> Result<()> {
    if !(slope > 0.0 && slope < 1.0) {
        return Err(Error::Config(format!("leak slope must be in (0, 1), got {slope}")));
    }
    Ok(())
}

fn check_len(expected: usize, theta: &[f64]) -> Result<()> {
    if theta.len() != expected {
        return Err(Error::Dimension {
            expected,
            actual: theta.len(),
        });
    }
    Ok(())
}

/// Concatenated input `[va; vb]` through one leaky-rectifier hidden layer
/// into a logistic output.
#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel {
    dim: usize,
    hidden: usize,
    slope: f64,
    theta: Vec<f64>,
}

impl MlpModel {
    pub fn blocks(dim: usize, hidden: usize) -> [Block; 4] {
        [
            Block::new("w1", hidden, 2 * dim),
            Block::new("b1", 1, hidden),
            Block::new("w2", 1, hidden),
            Block::new("b2", 1, 1),
        ]
    }

    pub fn new(dim: usize, hidden: usize, slope: f64, seed_value: u64) -> Result<Self> {
        check_slope(slope)?;
        Ok(MlpModel {
            dim,
            hidden,
            slope,
            theta: init(&Self::blocks(dim, hidden), seed_value),
        })
    }

    pub fn from_params(dim: usize, hidden: usize, slope: f64, theta: Vec<f64>) -> Result<Self> {
        check_slope(slope)?;
        check_len(total(&Self::blocks(dim, hidden)), &theta)?;
        Ok(MlpModel {
            dim,
            hidden,
            slope,
            theta,
        })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    fn split(theta: &[f64], dim: usize, h: usize) -> (&[f64], &[f64], &[f64], f64) {
        let (w1, rest) = theta.split_at(h * 2 * dim);
        let (b1, rest) = rest.split_at(h);
        let (w2, rest) = rest.split_at(h);
        (w1, b1, w2, rest[0])
    }

    fn hidden_pre(&self, va: &[f64], vb: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (w1, b1, _, _) = Self::split(&self.theta, self.dim, self.hidden);
        let x = [va, vb].concat();
        let mut z = vec![0.0; self.hidden];
        affine(w1, b1, &x, &mut z);
        (x, z)
    }
}

impl PairClassifier for MlpModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn score(&self, va: &[f64], vb: &[f64]) -> Result<f64> {
        check_dims(self.dim, va, vb);
        let (_, _, w2, b2) = Self::split(&self.theta, self.dim, self.hidden);
        let (_, z) = self.hidden_pre(va, vb);
        let logit = b2
            + z.iter()
                .zip(w2)
                .map(|(&z, w)| w * leaky_rectifier(z, self.slope))
                .sum::<f64>();
        Ok(sigmoid(logit))
    }

    fn loss_grad(&self, va: &[f64], vb: &[f64], target: bool, grad: &mut [f64]) -> Result<f64> {
        check_dims(self.dim, va, vb);
        let (d, h) = (self.dim, self.hidden);
        let (_, _, w2, b2) = Self::split(&self.theta, d, h);
        let (x, z) = self.hidden_pre(va, vb);
        let a: Vec<f64> = z.iter().map(|&z| leaky_rectifier(z, self.slope)).collect();
        let logit = b2 + dot(w2, &a);
        let ds = sigmoid(logit) - if target { 1.0 } else { 0.0 };

        let (gw1, rest) = grad.split_at_mut(h * 2 * d);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(h);
        gb2[0] += ds;
        let dz: Vec<f64> = (0..h)
            .map(|i| {
                gw2[i] += ds * a[i];
                ds * w2[i] * leaky_slope(z[i], self.slope)
            })
            .collect();
        affine_backward(&dz, &x, gw1, gb1);
        Ok(logistic_loss(logit, target))
    }
}

/// One leaky-rectifier projection applied to both words; the logistic
/// layer sees `[ha; hb; |ha - hb|]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedMlpModel {
    dim: usize,
    hidden: usize,
    slope: f64,
    theta: Vec<f64>,
}

impl SharedMlpModel {
    pub fn blocks(dim: usize, hidden: usize) -> [Block; 4] {
        [
            Block::new("ws", hidden, dim),
            Block::new("bs", 1, hidden),
            Block::new("w2", 1, 3 * hidden),
            Block::new("b2", 1, 1),
        ]
    }

    pub fn new(dim: usize, hidden: usize, slope: f64, seed_value: u64) -> Result<Self> {
        check_slope(slope)?;
        Ok(SharedMlpModel {
            dim,
            hidden,
            slope,
            theta: init(&Self::blocks(dim, hidden), seed_value),
        })
    }

    pub fn from_params(dim: usize, hidden: usize, slope: f64, theta: Vec<f64>) -> Result<Self> {
        check_slope(slope)?;
        check_len(total(&Self::blocks(dim, hidden)), &theta)?;
        Ok(SharedMlpModel {
            dim,
            hidden,
            slope,
            theta,
        })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    fn split(theta: &[f64], dim: usize, h: usize) -> (&[f64], &[f64], &[f64], f64) {
        let (ws, rest) = theta.split_at(h * dim);
        let (bs, rest) = rest.split_at(h);
        let (w2, rest) = rest.split_at(3 * h);
        (ws, bs, w2, rest[0])
    }

    /// Pre-activations of the shared projection for one word.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let (ws, bs, _, _) = Self::split(&self.theta, self.dim, self.hidden);
        let mut z = vec![0.0; self.hidden];
        affine(ws, bs, v, &mut z);
        z
    }

    /// The logistic layer's input `[ha; hb; |ha - hb|]`.
    pub fn features(&self, va: &[f64], vb: &[f64]) -> Vec<f64> {
        check_dims(self.dim, va, vb);
        let ha: Vec<f64> = self
            .project(va)
            .into_iter()
            .map(|z| leaky_rectifier(z, self.slope))
            .collect();
        let hb: Vec<f64> = self
            .project(vb)
            .into_iter()
            .map(|z| leaky_rectifier(z, self.slope))
            .collect();
        let diff: Vec<f64> = ha.iter().zip(&hb).map(|(a, b)| (a - b).abs()).collect();
        [ha, hb, diff].concat()
    }
}

impl PairClassifier for SharedMlpModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn score(&self, va: &[f64], vb: &[f64]) -> Result<f64> {
        let (_, _, w2, b2) = Self::split(&self.theta, self.dim, self.hidden);
        Ok(sigmoid(b2 + dot(w2, &self.features(va, vb))))
    }

    fn loss_grad(&self, va: &[f64], vb: &[f64], target: bool, grad: &mut [f64]) -> Result<f64> {
        check_dims(self.dim, va, vb);
        let (d, h) = (self.dim, self.hidden);
        let (_, _, w2, b2) = Self::split(&self.theta, d, h);
        let za = self.project(va);
        let zb = self.project(vb);
        let ha: Vec<f64> = za.iter().map(|&z| leaky_rectifier(z, self.slope)).collect();
        let hb: Vec<f64> = zb.iter().map(|&z| leaky_rectifier(z, self.slope)).collect();
        let input: Vec<f64> = ha
            .iter()
            .chain(&hb)
            .copied()
            .chain(ha.iter().zip(&hb).map(|(a, b)| (a - b).abs()))
            .collect();
        let logit = b2 + dot(w2, &input);
        let ds = sigmoid(logit) - if target { 1.0 } else { 0.0 };

        let (gws, rest) = grad.split_at_mut(h * d);
        let (gbs, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(3 * h);
        gb2[0] += ds;
        for (g, x) in gw2.iter_mut().zip(&input) {
            *g += ds * x;
        }
        let mut dza = vec![0.0; h];
        let mut dzb = vec![0.0; h];
        for i in 0..h {
            let sign = match ha[i].partial_cmp(&hb[i]) {
                Some(std::cmp::Ordering::Greater) => 1.0,
                Some(std::cmp::Ordering::Less) => -1.0,
                _ => 0.0,
            };
            let through_diff = ds * w2[2 * h + i] * sign;
            dza[i] = (ds * w2[i] + through_diff) * leaky_slope(za[i], self.slope);
            dzb[i] = (ds * w2[h + i] - through_diff) * leaky_slope(zb[i], self.slope);
        }
        // Both branches accumulate into the one shared projection.
        affine_backward(&dza, va, gws, gbs);
        affine_backward(&dzb, vb, gws, gbs);
        Ok(logistic_loss(logit, target))
    }
}

/// One tanh projection applied to both words, compared by cosine. Matches
/// are pairs whose projected cosine is strictly above the threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedCosineModel {
    dim: usize,
    hidden: usize,
    theta: Vec<f64>,
}

impl SharedCosineModel {
    pub const THRESHOLD: f64 = 0.5;

    pub fn blocks(dim: usize, hidden: usize) -> [Block; 2] {
        [Block::new("ws", hidden, dim), Block::new("bs", 1, hidden)]
    }

    pub fn new(dim: usize, hidden: usize, seed_value: u64) -> Self {
        SharedCosineModel {
            dim,
            hidden,
            theta: init(&Self::blocks(dim, hidden), seed_value),
        }
    }

    pub fn from_params(dim: usize, hidden: usize, theta: Vec<f64>) -> Result<Self> {
        check_len(total(&Self::blocks(dim, hidden)), &theta)?;
        Ok(SharedCosineModel { dim, hidden, theta })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn threshold(&self) -> f64 {
        Self::THRESHOLD
    }

    /// `tanh(Ws v + b)`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let (ws, bs) = self.theta.split_at(self.hidden * self.dim);
        let mut z = vec![0.0; self.hidden];
        affine(ws, bs, v, &mut z);
        z.iter_mut().for_each(|x| *x = x.tanh());
        z
    }

    /// Cosine of the two projections.
    pub fn similarity(&self, va: &[f64], vb: &[f64]) -> Result<f64> {
        check_dims(self.dim, va, vb);
        cosine(&self.project(va), &self.project(vb)).map(|(c, _, _)| c)
    }
}

/// Cosine with the two norms; errors when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64)> {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector("hidden projection".into()));
    }
    Ok(((dot(a, b) / (na * nb)).clamp(-1.0, 1.0), na, nb))
}

impl PairClassifier for SharedCosineModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn params(&self) -> &[f64] {
        &self.theta
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    fn score(&self, va: &[f64], vb: &[f64]) -> Result<f64> {
        self.similarity(va, vb)
    }

    /// Squared error between the projected cosine and 1 (match) or 0.
    fn loss_grad(&self, va: &[f64], vb: &[f64], target: bool, grad: &mut [f64]) -> Result<f64> {
        check_dims(self.dim, va, vb);
        let ha = self.project(va);
        let hb = self.project(vb);
        let ab = dot(&ha, &hb);
        let (_, na, nb) = cosine(&ha, &hb)?;
        // Unclamped so the loss and its gradient agree exactly.
        let c = ab / (na * nb);
        let y = if target { 1.0 } else { 0.0 };
        let dc = 2.0 * (c - y);

        let h = self.hidden;
        let (gws, gbs) = grad.split_at_mut(h * self.dim);
        let mut dza = vec![0.0; h];
        let mut dzb = vec![0.0; h];
        for i in 0..h {
            let dha = hb[i] / (na * nb) - c * ha[i] / (na * na);
            let dhb = ha[i] / (na * nb) - c * hb[i] / (nb * nb);
            dza[i] = dc * dha * (1.0 - ha[i] * ha[i]);
            dzb[i] = dc * dhb * (1.0 - hb[i] * hb[i]);
        }
        affine_backward(&dza, va, gws, gbs);
        affine_backward(&dzb, vb, gws, gbs);
        Ok((c - y) * (c - y))
    }

    fn decide(&self, score: f64) -> bool {
        score > Self::THRESHOLD
    }
}
