//! QBF corpora: the exhaustive one-variable family and seeded random
//! three-quantifier instances.

use cl4_core::qbf::{Clause, Literal};
use cl4_core::{Qbf, Quantifier};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x05ee_dc14;

const VARS: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

fn literal(var: &str, positive: bool) -> Literal {
    Literal {
        var: var.into(),
        positive,
    }
}

/// Every QBF `∃x M` with M a multiset of at most `max_clauses` clauses over
/// the literals x and ¬x. Clauses are themselves multisets, so there are
/// four of them; with `max_clauses = 3` the corpus has 35 instances.
pub fn exhaustive_exists_x(max_clauses: usize) -> Vec<Qbf> {
    let clause = |negatives: usize| Clause(std::array::from_fn(|i| literal("x", i + negatives < 3)));
    let mut out = Vec::new();
    for size in 0..=max_clauses {
        let mut picks = vec![0usize; size];
        loop {
            let matrix = picks.iter().map(|&k| clause(k)).collect();
            out.push(Qbf::new(vec![(Quantifier::Exists, "x".into())], matrix).expect("valid instance"));
            let Some(i) = (0..size).rev().find(|&i| picks[i] < 3) else {
                break;
            };
            let v = picks[i] + 1;
            picks[i..].iter_mut().for_each(|p| *p = v);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RandomSpec {
    /// Prefix length: odd, at most 6 variables are named.
    pub quantifiers: usize,
    pub min_clauses: usize,
    pub max_clauses: usize,
    pub count: usize,
    pub seed: u64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            quantifiers: 3,
            min_clauses: 2,
            max_clauses: 4,
            count: 200,
            seed: DEFAULT_SEED,
        }
    }
}

/// Random QBFs with prefix ∃x ∀y ∃z ... and uniformly drawn 3-literal
/// clauses over the prefix variables.
pub fn random_corpus(spec: &RandomSpec) -> Vec<Qbf> {
    assert!(spec.quantifiers % 2 == 1 && spec.quantifiers <= VARS.len());
    assert!(spec.min_clauses <= spec.max_clauses);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let prefix: Vec<(Quantifier, String)> = VARS[..spec.quantifiers]
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let kind = if i % 2 == 0 { Quantifier::Exists } else { Quantifier::Forall };
            (kind, v.to_string())
        })
        .collect();
    (0..spec.count)
        .map(|_| {
            let clauses = rng.random_range(spec.min_clauses..=spec.max_clauses);
            let matrix = (0..clauses)
                .map(|_| {
                    Clause(std::array::from_fn(|_| {
                        literal(VARS[rng.random_range(0..spec.quantifiers)], rng.random())
                    }))
                })
                .collect();
            Qbf::new(prefix.clone(), matrix).expect("valid instance")
        })
        .collect()
}
