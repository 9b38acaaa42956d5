use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::economy::MacroState;

/// One period of experience.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub s: MacroState,
    pub a: f64,
    pub r: f64,
    pub s_next: MacroState,
}

/// Fixed-capacity FIFO memory with uniform sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Storage slot `k`. Slot order is not insertion order once full.
    pub fn get(&self, k: usize) -> Option<&Transition> {
        self.items.get(k)
    }

    /// Oldest-first view of the contents.
    pub fn iter_chronological(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.items.len() < self.capacity {
            0
        } else {
            self.cursor
        };
        self.items[split..].iter().chain(self.items[..split].iter())
    }

    /// `n` slot indices drawn uniformly with replacement.
    pub fn sample_indices<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        let len = self.items.len();
        if len == 0 {
            return Vec::new();
        }
        (0..n).map(|_| rng.gen_range(0..len)).collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Transition> {
        self.sample_indices(rng, n)
            .into_iter()
            .map(|k| self.items[k])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tr(tag: f64) -> Transition {
        let s = MacroState::new(1.0, 1.0, 5.0);
        Transition {
            s,
            a: tag,
            r: -0.01,
            s_next: s,
        }
    }

    #[test]
    fn grows_then_evicts_oldest() {
        let mut b = ReplayBuffer::new(2);
        assert!(b.is_empty());
        b.push(tr(1.0));
        assert_eq!(b.len(), 1);
        b.push(tr(2.0));
        b.push(tr(3.0));
        assert_eq!(b.len(), 2);
        let kept: Vec<f64> = b.iter_chronological().map(|t| t.a).collect();
        assert_eq!(kept, vec![2.0, 3.0]);
    }

    #[test]
    fn uniform_sampling_within_five_sigma() {
        // 10^4 observations into a 10^4 buffer, then 10^3 draws repeated so
        // each slot's count is binomial; check every slot against 5 sigma.
        let n_items = 10_000;
        let mut b = ReplayBuffer::new(n_items);
        for k in 0..n_items {
            b.push(tr(k as f64));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 1_000 * 1_000;
        let mut counts = vec![0u32; n_items];
        for _ in 0..1_000 {
            for k in b.sample_indices(&mut rng, 1_000) {
                counts[k] += 1;
            }
        }
        let p = 1.0 / n_items as f64;
        let mean = draws as f64 * p;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for (k, &c) in counts.iter().enumerate() {
            assert!(
                (c as f64 - mean).abs() <= 5.0 * sd,
                "slot {k}: {c} vs {mean} ± {sd}"
            );
        }
    }

    proptest! {
        #[test]
        fn indices_never_exceed_size(cap in 1usize..64, pushes in 0usize..200, seed in any::<u64>()) {
            let mut b = ReplayBuffer::new(cap);
            for k in 0..pushes {
                b.push(tr(k as f64));
            }
            prop_assert_eq!(b.len(), pushes.min(cap));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for k in b.sample_indices(&mut rng, 50) {
                prop_assert!(k < b.len());
            }
        }
    }
}
