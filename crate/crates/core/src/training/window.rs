//! Trailing success-rate window.

use std::collections::VecDeque;

/// Success rate over the most recent `cap` boolean samples.
#[derive(Debug, Clone)]
pub struct TrailingWindow {
    items: VecDeque<bool>,
    cap: usize,
}

impl TrailingWindow {
    pub fn new(cap: usize) -> Self {
        Self {
            items: VecDeque::with_capacity(cap),
            cap,
        }
    }

    pub fn push(&mut self, hit: bool) {
        if self.items.len() == self.cap {
            self.items.pop_front();
        }
        self.items.push_back(hit);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Rate over the window; 0 while empty.
    pub fn rate(&self) -> f64 {
        if self.items.is_empty() {
            return 0.0;
        }
        self.items.iter().filter(|&&b| b).count() as f64 / self.items.len() as f64
    }

    /// True once the window is full.
    pub fn full(&self) -> bool {
        self.items.len() == self.cap
    }
}
