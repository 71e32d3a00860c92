use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaEntry {
    pub lambda: f64,
    pub score: f64,
}

/// Current mixing ratio and the fixed-size FIFO of `(lambda, score)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaState {
    lambda: f64,
    entries: VecDeque<LambdaEntry>,
    sigma: f64,
}

impl LambdaState {
    /// `lambda = 0` and a buffer full of `(0, -inf)`.
    pub fn new(buffer_size: usize, sigma: f64) -> Self {
        assert!(buffer_size > 0, "lambda buffer needs at least one slot");
        let entries = std::iter::repeat_n(LambdaEntry { lambda: 0.0, score: f64::NEG_INFINITY }, buffer_size).collect();
        Self { lambda: 0.0, entries, sigma }
    }

    /// Build from explicit entries (oldest first).
    pub fn from_entries(lambda: f64, entries: Vec<LambdaEntry>, sigma: f64) -> Self {
        assert!(!entries.is_empty(), "lambda buffer needs at least one slot");
        Self { lambda, entries: entries.into(), sigma }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn set_lambda(&mut self, lambda: f64) {
        self.lambda = lambda.clamp(0.0, 1.0);
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Oldest first.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = &LambdaEntry> {
        self.entries.iter()
    }

    /// Replace the oldest pair with `(current lambda, score)`.
    pub fn record(&mut self, score: f64) {
        self.entries.pop_front();
        self.entries.push_back(LambdaEntry { lambda: self.lambda, score });
    }

    /// Buffer positions of the `ceil(n / 2)` highest-scoring entries, best
    /// first; equal scores favor newer entries.
    fn top_half_indices(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by(|&a, &b| self.entries[b].score.total_cmp(&self.entries[a].score).then(b.cmp(&a)));
        order.truncate(self.entries.len().div_ceil(2));
        order
    }

    /// The `ceil(n / 2)` highest-scoring entries, best first.
    pub fn top_half(&self) -> Vec<LambdaEntry> {
        self.top_half_indices().into_iter().map(|i| self.entries[i]).collect()
    }

    /// Mean lambda of the top half, plus `N(0, sigma^2)`, clipped to `[0, 1]`.
    /// The mean sums in buffer order, oldest first.
    pub fn adapt<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let mut top = self.top_half_indices();
        top.sort_unstable();
        let mean = top.iter().map(|&i| self.entries[i].lambda).sum::<f64>() / top.len() as f64;
        let eps: f64 = rng.sample(StandardNormal);
        self.lambda = (mean + self.sigma * eps).clamp(0.0, 1.0);
        self.lambda
    }
}
