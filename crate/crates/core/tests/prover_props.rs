mod common;

use cl4_core::{check_proof, parse_formula, Formula, Prover, ProverConfig, TermPool};
use proptest::prelude::*;

fn small(f: &Formula) -> bool {
    f.measure() <= 7
}

fn run(f: &Formula, cfg: ProverConfig) -> (Option<cl4_core::ProofNode>, usize) {
    let mut prover = Prover::new(cfg);
    let proof = prover.prove(f).unwrap();
    (proof, prover.stats().max_depth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn proofs_check_and_respect_the_space_bound(f in common::formula(true, 3).prop_filter("small", small)) {
        let mu = f.measure();
        let (proof, depth) = run(&f, ProverConfig::default());
        prop_assert!(depth <= mu + 1);
        if let Some(p) = proof {
            prop_assert_eq!(&p.conclusion, &f);
            prop_assert!(p.height() <= mu + 1);
            let report = check_proof(&p, &ProverConfig::default());
            prop_assert!(report.is_valid(), "{:?}", report.diagnostics);
        }
    }

    #[test]
    fn pruning_and_memo_do_not_change_the_proof(f in common::formula(true, 3).prop_filter("small", small)) {
        let base = run(&f, ProverConfig { prune: false, memoize: false, ..ProverConfig::default() }).0;
        for (prune, memoize) in [(true, true), (true, false), (false, true)] {
            let cfg = ProverConfig { prune, memoize, ..ProverConfig::default() };
            prop_assert_eq!(&run(&f, cfg).0, &base);
        }
    }

    #[test]
    fn elementary_base_proofs_check(f in common::formula(false, 3).prop_filter("small", small)) {
        let cfg = ProverConfig::cl3();
        let (proof, depth) = run(&f, cfg);
        prop_assert!(depth <= f.measure() + 1);
        if let Some(p) = proof {
            prop_assert!(check_proof(&p, &cfg).is_valid());
        }
        // Without general letters the two logics coincide.
        prop_assert_eq!(
            run(&f, ProverConfig::default()).0.is_some(),
            run(&f, cfg).0.is_some()
        );
    }

    #[test]
    fn an_extra_fresh_constant_changes_no_verdict(f in common::formula(true, 3).prop_filter("small", small)) {
        let one = run(&f, ProverConfig::default()).0.is_some();
        let cfg = ProverConfig { term_pool: TermPool::OccurringPlusFresh(2), ..ProverConfig::default() };
        prop_assert_eq!(run(&f, cfg).0.is_some(), one);
    }
}

#[test]
fn known_verdicts() {
    for (text, provable) in [
        ("P \\/ ~P", true),
        ("p \\/ ~p", true),
        ("P(0) \\/ ~P(0)", true),
        ("P(0) \\/ ~P(1)", false),
        ("p cor ~p", false),
        ("call x: (p(x) cor ~p(x))", false),
        ("call x: cex y: (P(x) \\/ ~P(y))", true),
        ("cex y: call x: (P(x) \\/ ~P(y))", false),
        ("(P cand Q) \\/ (~P cor ~Q)", true),
        ("P \\/ (~P /\\ ~P)", false),
    ] {
        let f = parse_formula(text).unwrap();
        let (proof, _) = run(&f, ProverConfig::default());
        assert_eq!(proof.is_some(), provable, "{text}");
    }
}
