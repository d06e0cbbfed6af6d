//! Runs the three deciders over a corpus and records agreement, the
//! measure of each image and the deepest recursion the prover reached.

use std::time::Instant;

use cl4_core::qbf::eval_qbf;
use cl4_core::reduction::{reduce_to_cl3, reduce_to_cl4};
use cl4_core::{Formula, Prover, ProverConfig, Qbf};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub provable: bool,
    pub mu: usize,
    pub max_depth: usize,
}

impl Decision {
    pub fn within_bound(&self) -> bool {
        self.max_depth <= self.mu + 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRecord {
    pub index: usize,
    pub qbf: String,
    pub eval: bool,
    pub cl4: Decision,
    pub cl3: Decision,
    pub micros: u128,
}

impl BenchRecord {
    pub fn agree(&self) -> bool {
        self.eval == self.cl4.provable && self.eval == self.cl3.provable
    }

    pub fn within_bound(&self) -> bool {
        self.cl4.within_bound() && self.cl3.within_bound()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub instances: usize,
    pub agreeing: usize,
    pub within_bound: usize,
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.agreeing == self.instances && self.within_bound == self.instances
    }

    /// One line per instance, then a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "{} {} eval={} cl4={} cl3={} mu={} depth={} mu3={} depth3={} bound={} us={} | {}\n",
                r.index,
                if r.agree() { "AGREE" } else { "DISAGREE" },
                verdict(r.eval, "TRUE", "FALSE"),
                verdict(r.cl4.provable, "PROVABLE", "UNPROVABLE"),
                verdict(r.cl3.provable, "PROVABLE", "UNPROVABLE"),
                r.cl4.mu,
                r.cl4.max_depth,
                r.cl3.mu,
                r.cl3.max_depth,
                if r.within_bound() { "ok" } else { "EXCEEDED" },
                r.micros,
                r.qbf,
            ));
        }
        out.push_str(&format!(
            "instances={} agree={} depth_within_mu_plus_1={}\n",
            self.instances, self.agreeing, self.within_bound
        ));
        out
    }
}

pub fn verdict(b: bool, yes: &'static str, no: &'static str) -> &'static str {
    if b {
        yes
    } else {
        no
    }
}

pub fn decide(f: &Formula, cfg: ProverConfig) -> Decision {
    let mut prover = Prover::new(cfg);
    let provable = prover.is_provable(f).expect("reduction images are well-formed");
    Decision {
        provable,
        mu: f.measure(),
        max_depth: prover.stats().max_depth,
    }
}

pub fn bench_one(index: usize, q: &Qbf, cfg: &ProverConfig) -> BenchRecord {
    let start = Instant::now();
    let eval = eval_qbf(q);
    let cl4 = decide(&reduce_to_cl4(q), *cfg);
    let cl3 = decide(
        &reduce_to_cl3(q),
        ProverConfig {
            logic: cl4_core::Logic::Cl3,
            ..*cfg
        },
    );
    BenchRecord {
        index,
        qbf: q.to_string(),
        eval,
        cl4,
        cl3,
        micros: start.elapsed().as_micros(),
    }
}

/// Benchmarks every instance; with `parallel` the instances run on the
/// rayon pool but the report stays in corpus order.
pub fn bench_run(corpus: &[Qbf], cfg: &ProverConfig, parallel: bool) -> BenchReport {
    let records: Vec<BenchRecord> = if parallel {
        corpus
            .par_iter()
            .enumerate()
            .map(|(i, q)| bench_one(i, q, cfg))
            .collect()
    } else {
        corpus
            .iter()
            .enumerate()
            .map(|(i, q)| bench_one(i, q, cfg))
            .collect()
    };
    BenchReport {
        instances: records.len(),
        agreeing: records.iter().filter(|r| r.agree()).count(),
        within_bound: records.iter().filter(|r| r.within_bound()).count(),
        records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::exhaustive_exists_x;

    #[test]
    fn empty_corpus_gives_an_empty_report() {
        let r = bench_run(&[], &ProverConfig::default(), false);
        assert_eq!(r.instances, 0);
        assert!(r.all_ok());
        assert_eq!(r.to_text(), "instances=0 agree=0 depth_within_mu_plus_1=0\n");
    }

    #[test]
    fn parallel_report_keeps_corpus_order() {
        let corpus = exhaustive_exists_x(2);
        let a = bench_run(&corpus, &ProverConfig::default(), true);
        let b = bench_run(&corpus, &ProverConfig::default(), false);
        let key = |r: &BenchReport| r.records.iter().map(|x| (x.index, x.qbf.clone(), x.cl4.clone())).collect::<Vec<_>>();
        assert_eq!(key(&a), key(&b));
        assert!(a.all_ok());
    }
}
