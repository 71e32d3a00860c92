//! Fixed-capacity ring buffer with uniform sampling (with replacement).

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Environment termination only; truncated episodes still bootstrap.
    pub terminal: bool,
}

/// A minibatch laid out row-wise, in draw order.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub states: Array2<f64>,
    pub actions: Array2<f64>,
    pub rewards: Array1<f64>,
    pub next_states: Array2<f64>,
    /// `1 - terminal` per row.
    pub not_done: Array1<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn from_transitions<'a, I>(rows: I, state_dim: usize, action_dim: usize) -> Self
    where
        I: IntoIterator<Item = &'a Transition>,
        I::IntoIter: ExactSizeIterator,
    {
        let rows = rows.into_iter();
        let n = rows.len();
        let mut b = Batch {
            states: Array2::zeros((n, state_dim)),
            actions: Array2::zeros((n, action_dim)),
            rewards: Array1::zeros(n),
            next_states: Array2::zeros((n, state_dim)),
            not_done: Array1::zeros(n),
        };
        for (i, t) in rows.enumerate() {
            b.states.row_mut(i).iter_mut().zip(&t.state).for_each(|(d, s)| *d = *s);
            b.actions.row_mut(i).iter_mut().zip(&t.action).for_each(|(d, s)| *d = *s);
            b.next_states.row_mut(i).iter_mut().zip(&t.next_state).for_each(|(d, s)| *d = *s);
            b.rewards[i] = t.reward;
            b.not_done[i] = if t.terminal { 0.0 } else { 1.0 };
        }
        b
    }
}

#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    state_dim: usize,
    action_dim: usize,
    storage: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub const DEFAULT_CAPACITY: usize = 1_000_000;

    pub fn new(capacity: usize, state_dim: usize, action_dim: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(Self { capacity, state_dim, action_dim, storage: Vec::new(), cursor: 0 })
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.state_dim, self.action_dim)
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        for (context, expected, got) in [
            ("transition state", self.state_dim, t.state.len()),
            ("transition next_state", self.state_dim, t.next_state.len()),
            ("transition action", self.action_dim, t.action.len()),
        ] {
            if expected != got {
                return Err(Error::DimensionMismatch { context, expected, got });
            }
        }
        if !t.reward.is_finite() {
            return Err(Error::Contract(format!("non-finite reward {}", t.reward)));
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
        Ok(())
    }

    /// Contents from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.storage.len() < self.capacity { 0 } else { self.cursor };
        self.storage[split..].iter().chain(&self.storage[..split])
    }

    /// `n` uniform indices with replacement, in draw order.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<usize>> {
        if self.storage.is_empty() {
            return Err(Error::EmptyBuffer);
        }
        let len = self.storage.len();
        Ok((0..n).map(|_| rng.random_range(0..len)).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<Transition>> {
        Ok(self.sample_indices(n, rng)?.into_iter().map(|i| self.storage[i].clone()).collect())
    }

    /// Same draws as [`sample`](Self::sample), assembled into matrices.
    pub fn sample_batch<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Batch> {
        let idx = self.sample_indices(n, rng)?;
        Ok(Batch::from_transitions(idx.iter().map(|&i| &self.storage[i]), self.state_dim, self.action_dim))
    }
}
