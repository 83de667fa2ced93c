//! Experience replay: a fixed-capacity ring buffer with uniform minibatch
//! sampling without replacement.

use rand::Rng;
use rsic_core::channel::ChannelRealization;
use rsic_core::rates::DecodingOrderPair;

/// One stored experience tuple. The true channel draw rides along so any
/// stored reward can be recomputed from the transition alone.
#[derive(Debug, Clone)]
pub struct Transition {
    /// Full state `s = (O_1, O_2)` as the agents observed it.
    pub state: Vec<f64>,
    pub action1: Vec<f64>,
    pub action2: Vec<f64>,
    /// Relaxed decoding-order values when the order head is active.
    pub order_relax: Option<[f64; 2]>,
    /// The order pair actually executed.
    pub order_executed: DecodingOrderPair,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub true_channel: ChannelRealization,
}

#[derive(Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        ReplayBuffer {
            capacity,
            entries: Vec::with_capacity(capacity.min(1 << 20)),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Insert, overwriting the oldest entry once full.
    pub fn push(&mut self, t: Transition) {
        if self.entries.len() < self.capacity {
            self.entries.push(t);
        } else {
            self.entries[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn get(&self, idx: usize) -> &Transition {
        &self.entries[idx]
    }

    /// `batch` distinct indices, uniform over the current contents.
    pub fn sample_indices<R: Rng>(&self, batch: usize, rng: &mut R) -> Vec<usize> {
        assert!(batch <= self.entries.len(), "buffer smaller than minibatch");
        rand::seq::index::sample(rng, self.entries.len(), batch).into_vec()
    }
}
