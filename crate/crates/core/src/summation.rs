//! Deterministic pairwise summation.
//!
//! Terms are merged like a binary counter: two partial sums of equal block
//! size are combined as soon as both exist. The combination tree depends only
//! on the number of terms and their order, so a level sum computed in
//! lexicographic vertex order is bit-reproducible.

#[derive(Clone, Debug, Default)]
pub struct PairwiseSum {
    // (partial sum, log2 of block size); block sizes strictly decrease towards the top.
    stack: Vec<(f64, u32)>,
}

impl PairwiseSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let mut sum = value;
        let mut rank = 0;
        while let Some(&(top, top_rank)) = self.stack.last() {
            if top_rank != rank {
                break;
            }
            self.stack.pop();
            sum += top;
            rank += 1;
        }
        self.stack.push((sum, rank));
    }

    /// Folds the remaining blocks from the smallest upwards.
    pub fn total(&self) -> f64 {
        let mut blocks = self.stack.iter().rev();
        let Some(&(first, _)) = blocks.next() else {
            return 0.0;
        };
        blocks.fold(first, |acc, &(block, _)| block + acc)
    }
}

impl Extend<f64> for PairwiseSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for value in iter {
            self.add(value);
        }
    }
}

pub fn pairwise_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = PairwiseSum::new();
    acc.extend(values);
    acc.total()
}
