use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rerank epoch of a resource; its meaning depends on the schedule.
pub type Epoch = u64;

const TRIAL_STREAM: u64 = 0x7472_6961_6c00_0001;
const DURATION_STREAM: u64 = 0x6475_7261_7400_0002;

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// The `index`-th 64-bit word of stream `stream` under key `root`.
///
/// Counter based: any word can be computed directly without generating the
/// ones before it.
pub fn counter_word(root: u64, stream: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(stream);
    rng.set_word_pos(u128::from(index) * 2);
    rng.next_u64()
}

/// Root seed of trial `trial` of an experiment keyed by `root`.
pub fn trial_root(root: u64, trial: u64) -> u64 {
    counter_word(root, TRIAL_STREAM, trial)
}

/// Generator for usage durations of trial `trial`.
pub fn duration_rng(root: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(counter_word(root, DURATION_STREAM, trial))
}

/// Lazily derived uniform seeds, one per `(resource, epoch)`.
///
/// Seeds come from a ChaCha8 keystream: the key is derived from the root,
/// the stream id is the resource and the word position is the epoch, so
/// every pair is an independent uniform on `[0, 1)`. Individual pairs can be
/// pinned to explicit values while all others keep their derived values.
#[derive(Clone, Debug)]
pub struct SeedVector {
    root: u64,
    base: ChaCha8Rng,
    pins: Vec<(usize, Epoch, f64)>,
}

impl SeedVector {
    pub fn new(root: u64) -> Self {
        SeedVector {
            root,
            base: ChaCha8Rng::seed_from_u64(root),
            pins: Vec::new(),
        }
    }

    pub fn for_trial(root: u64, trial: u64) -> Self {
        SeedVector::new(trial_root(root, trial))
    }

    pub fn root(&self) -> u64 {
        self.root
    }

    /// Overrides the seed of `(resource, epoch)`.
    pub fn pin(&mut self, resource: usize, epoch: Epoch, value: f64) {
        if let Some(p) = self
            .pins
            .iter_mut()
            .find(|p| p.0 == resource && p.1 == epoch)
        {
            p.2 = value;
        } else {
            self.pins.push((resource, epoch, value));
        }
    }

    pub fn with_pin(mut self, resource: usize, epoch: Epoch, value: f64) -> Self {
        self.pin(resource, epoch, value);
        self
    }

    pub fn pins(&self) -> &[(usize, Epoch, f64)] {
        &self.pins
    }

    pub fn seed(&self, resource: usize, epoch: Epoch) -> f64 {
        if let Some(p) = self
            .pins
            .iter()
            .find(|p| p.0 == resource && p.1 == epoch)
        {
            return p.2;
        }
        self.derived(resource, epoch)
    }

    /// The derived value, ignoring pins.
    pub fn derived(&self, resource: usize, epoch: Epoch) -> f64 {
        let mut rng = self.base.clone();
        rng.set_stream(resource as u64);
        rng.set_word_pos(u128::from(epoch) * 2);
        unit_from_bits(rng.next_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_root_same_seeds() {
        let a = SeedVector::new(9);
        let b = SeedVector::new(9);
        for i in 0..5 {
            for e in [0, 1, 7, 1 << 40] {
                assert_eq!(a.seed(i, e), b.seed(i, e));
                assert!((0.0..1.0).contains(&a.seed(i, e)));
            }
        }
        assert_ne!(SeedVector::new(10).seed(0, 0), a.seed(0, 0));
    }

    #[test]
    fn pins_override_only_their_pair() {
        let plain = SeedVector::new(3);
        let pinned = plain.clone().with_pin(1, 4, 1.0).with_pin(1, 3, 0.25);
        assert_eq!(pinned.seed(1, 4), 1.0);
        assert_eq!(pinned.seed(1, 3), 0.25);
        assert_eq!(pinned.seed(1, 5), plain.seed(1, 5));
        assert_eq!(pinned.seed(0, 4), plain.seed(0, 4));
        assert_eq!(pinned.derived(1, 4), plain.seed(1, 4));
        let repinned = pinned.with_pin(1, 4, 0.5);
        assert_eq!(repinned.pins().len(), 2);
        assert_eq!(repinned.seed(1, 4), 0.5);
    }

    #[test]
    fn seeds_look_uniform() {
        let s = SeedVector::new(1234);
        let n = 20_000;
        let mut buckets = [0usize; 10];
        let mut mean = 0.0;
        for k in 0..n {
            let y = s.seed(k % 7, (k / 7) as Epoch);
            buckets[(y * 10.0) as usize] += 1;
            mean += y;
        }
        mean /= n as f64;
        assert!((mean - 0.5).abs() < 0.01, "{mean}");
        for b in buckets {
            assert!((b as f64 - 2000.0).abs() < 5.0 * 2000f64.sqrt(), "{buckets:?}");
        }
    }

    #[test]
    fn trial_roots_are_distinct() {
        let roots: std::collections::HashSet<_> = (0..1000).map(|t| trial_root(5, t)).collect();
        assert_eq!(roots.len(), 1000);
    }
}
