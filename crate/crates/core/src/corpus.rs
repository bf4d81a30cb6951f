//! Fixed graph collections used by the verifier and the test suites.

use crate::error::GraphError;
use crate::graph::{generate, Graph, GraphFamily};
use crate::rng::{mix64, GraphRng};

/// One graph of a corpus, regenerated on demand from its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub family: GraphFamily,
    pub n: usize,
    pub seed: u64,
}

impl CorpusEntry {
    pub fn new(family: GraphFamily, n: usize, seed: u64) -> Self {
        CorpusEntry { family, n, seed }
    }

    pub fn graph(&self) -> Result<Graph, GraphError> {
        generate(&self.family, self.n, self.seed)
    }

    pub fn label(&self) -> String {
        if self.family.is_random() {
            format!(
                "{}(n={}, seed={})",
                self.family.short_name(),
                self.n,
                self.seed
            )
        } else {
            format!("{}(n={})", self.family.short_name(), self.n)
        }
    }
}

const RANDOM_FAMILIES: [GraphFamily; 4] = [
    GraphFamily::BA,
    GraphFamily::ER,
    GraphFamily::WS,
    GraphFamily::RGG,
];

fn special_graphs() -> Vec<CorpusEntry> {
    let mut out = vec![CorpusEntry::new(GraphFamily::Complete, 1, 0)];
    for n in [2, 3, 4, 5, 10, 31, 64, 200] {
        out.push(CorpusEntry::new(GraphFamily::Path, n, 0));
    }
    for n in [3, 4, 5, 8, 33, 200] {
        out.push(CorpusEntry::new(GraphFamily::Ring, n, 0));
    }
    for n in [2, 3, 5, 17, 100, 200] {
        out.push(CorpusEntry::new(GraphFamily::Star, n, 0));
    }
    for n in [2, 3, 4, 6, 25, 60] {
        out.push(CorpusEntry::new(GraphFamily::Complete, n, 0));
    }
    out
}

/// The verifier's corpus: special graphs plus ten seeded graphs per random
/// family with `n` up to 200. `n_cap` drops every entry above it.
pub fn verification_corpus(n_cap: Option<usize>) -> Vec<CorpusEntry> {
    let mut out = special_graphs();
    let sizes = [20, 25, 32, 45, 60, 80, 100, 128, 160, 200];
    for (f, family) in RANDOM_FAMILIES.iter().enumerate() {
        for (k, &n) in sizes.iter().enumerate() {
            let n = n.max(family.min_nodes());
            out.push(CorpusEntry::new(
                family.clone(),
                n,
                1000 * f as u64 + k as u64,
            ));
        }
    }
    if let Some(cap) = n_cap {
        out.retain(|e| e.n <= cap);
    }
    out
}

/// `count` graphs drawn deterministically from `base_seed`: all special
/// graphs first, then random and special families in rotation, with `n`
/// uniform over each family's legal range within `[1, 200]`.
pub fn mixed_corpus(count: usize, base_seed: u64) -> Vec<CorpusEntry> {
    let rotation = [
        GraphFamily::BA,
        GraphFamily::ER,
        GraphFamily::WS,
        GraphFamily::RGG,
        GraphFamily::Star,
        GraphFamily::BA,
        GraphFamily::ER,
        GraphFamily::WS,
        GraphFamily::RGG,
        GraphFamily::Ring,
        GraphFamily::Path,
        GraphFamily::Complete,
    ];
    let mut out = special_graphs();
    out.truncate(count);
    let mut rng = GraphRng::new(base_seed);
    let mut k = 0;
    while out.len() < count {
        let family = rotation[k % rotation.len()].clone();
        let lo = family.min_nodes();
        let hi = if family == GraphFamily::Complete {
            80
        } else {
            200
        };
        let n = lo + rng.below((hi - lo + 1) as u64) as usize;
        out.push(CorpusEntry::new(family, n, mix64(base_seed ^ k as u64)));
        k += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_corpus_shape() {
        let c = mixed_corpus(500, 7);
        assert_eq!(c.len(), 500);
        assert!(c.iter().all(|e| (1..=200).contains(&e.n)));
        assert!(c.iter().any(|e| e.n == 1));
        for f in RANDOM_FAMILIES {
            assert!(c.iter().filter(|e| e.family == f).count() > 50);
        }
        assert_eq!(c, mixed_corpus(500, 7));
    }

    #[test]
    fn verification_corpus_cap() {
        let all = verification_corpus(None);
        let small = verification_corpus(Some(50));
        assert!(small.len() < all.len());
        assert!(small.iter().all(|e| e.n <= 50));
        assert!(all.iter().all(|e| e.graph().is_ok()));
    }
}
