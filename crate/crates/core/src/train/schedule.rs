//! Learning-rate decay and the joint text/feature interleaving rule.

/// Linear decay from `start` to `min` over `total` update events.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearningRate {
    pub start: f64,
    pub min: f64,
    pub total: u64,
}

impl LearningRate {
    pub fn at(&self, done: u64) -> f64 {
        if self.total == 0 {
            return self.start;
        }
        let progress = done as f64 / self.total as f64;
        (self.start - (self.start - self.min) * progress).max(self.min)
    }
}

/// Number of `(center, context)` events a sentence of `len` in-vocabulary
/// tokens contributes with a fixed window of `window` on each side.
pub fn window_events(len: usize, window: usize) -> u64 {
    (0..len)
        .map(|t| (t.min(window) + (len - 1 - t).min(window)) as u64)
        .sum()
}

/// Feature updates owed once `windows_done` of the epoch's `windows_total`
/// text events have been processed.
///
/// Text updates are normalised per token and feature updates per pair with
/// weight `alpha`, so an epoch owes `alpha * n_pairs` feature updates spread
/// in proportion to text progress: `floor(alpha * n_pairs * done / total)`.
pub fn feature_updates_due(alpha: f64, n_pairs: usize, windows_done: u64, windows_total: u64) -> u64 {
    if windows_total == 0 || alpha == 0.0 || n_pairs == 0 {
        return 0;
    }
    (alpha * n_pairs as f64 * windows_done as f64 / windows_total as f64).floor() as u64
}
