//! FIFO ring buffer with uniform sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    items: Vec<T>,
    capacity: usize,
    next: usize,
}

impl<T> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            items: Vec::with_capacity(capacity.min(4096)),
            capacity,
            next: 0,
        }
    }

    pub fn push(&mut self, item: T) {
        if self.items.len() < self.capacity {
            self.items.push(item);
        } else {
            self.items[self.next] = item;
            self.next = (self.next + 1) % self.capacity;
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, idx: usize) -> &T {
        &self.items[idx]
    }

    pub fn get_mut(&mut self, idx: usize) -> &mut T {
        &mut self.items[idx]
    }

    /// Uniform sample of `batch` indices (with replacement). Returns None
    /// until the buffer holds at least `batch` items.
    pub fn sample_indices(&self, batch: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
        if self.items.len() < batch {
            return None;
        }
        Some(
            (0..batch)
                .map(|_| rng.random_range(0..self.items.len()))
                .collect(),
        )
    }
}
