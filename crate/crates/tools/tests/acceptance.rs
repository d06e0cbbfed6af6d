//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cl4_core::bridge::{canonicalize_proof, proof_to_strategy, strategy_to_proof};
use cl4_core::elementary::atom_keys;
use cl4_core::qbf::{check_strategy_tree, eval_qbf, winning_strategy_tree};
use cl4_core::reduction::{reduce_to_cl3, reduce_to_cl4};
use cl4_core::{
    check_proof, elementarize, is_valid_classical, parse_formula, Formula, Letter, Move,
    ProofNode, Prover, ProverConfig, Qbf, Rule, Term, TermPool,
};
use cl4_tools::bench::bench_run;
use cl4_tools::corpus::{exhaustive_exists_x, random_corpus, RandomSpec};
use cl4_tools::formats::{parse_qbf, QbfFormat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned thresholds.
const EXHAUSTIVE_INSTANCES: usize = 35;
const EXHAUSTIVE_BUDGET: Duration = Duration::from_secs(30);
const RANDOM_INSTANCES: usize = 200;
const RANDOM_BUDGET: Duration = Duration::from_secs(600);
const STABILITY_SAMPLES: usize = 1000;
const ROUND_TRIP_MIN: usize = 50;
const MUTATION_PROOFS: usize = 100;
const MAX_TRUTH_TABLE_KEYS: usize = 16;
const SEED: u64 = 20_240_917;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn exhaustive() -> Vec<Qbf> {
    exhaustive_exists_x(3)
}

fn randomized() -> Vec<Qbf> {
    random_corpus(&RandomSpec {
        count: RANDOM_INSTANCES,
        seed: SEED,
        ..RandomSpec::default()
    })
}

fn phi() -> Qbf {
    parse_qbf(
        "exists x forall y exists z : (-x | y | x) & (z | x | -z)",
        QbfFormat::Textual,
    )
    .unwrap()
}

fn provable(f: &Formula, cfg: ProverConfig) -> bool {
    Prover::new(cfg).is_provable(f).unwrap()
}

fn triple_agreement(corpus: &[Qbf]) -> Result<usize, String> {
    for q in corpus {
        let truth = eval_qbf(q);
        let cl4 = provable(&reduce_to_cl4(q), ProverConfig::default());
        let cl3 = provable(&reduce_to_cl3(q), ProverConfig::cl3());
        if truth != cl4 || truth != cl3 {
            return Err(format!("{q}: eval={truth} cl4={cl4} cl3={cl3}"));
        }
    }
    Ok(corpus.iter().filter(|q| eval_qbf(q)).count())
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let corpus = exhaustive();
    if corpus.len() != EXHAUSTIVE_INSTANCES {
        return Err(format!("corpus has {} instances", corpus.len()));
    }
    let true_count = triple_agreement(&corpus)?;
    let took = start.elapsed();
    if took > EXHAUSTIVE_BUDGET {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} instances ({true_count} true), {took:.2?}", corpus.len()))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let corpus = randomized();
    let true_count = triple_agreement(&corpus)?;
    let took = start.elapsed();
    if took > RANDOM_BUDGET {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} instances ({true_count} true), seed {SEED}, {took:.2?}", corpus.len()))
}

/// Renames letters of `b` so that letters appear in the same
/// first-occurrence order as in `a`, then compares.
fn equal_up_to_letter_renaming(a: &Formula, b: &Formula) -> bool {
    fn order(f: &Formula) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::new();
        f.visit_atoms(&mut |l, _, _| {
            if !out.contains(l) {
                out.push(l.clone());
            }
        });
        out
    }
    let (la, lb) = (order(a), order(b));
    if la.len() != lb.len() || la.iter().zip(&lb).any(|(x, y)| x.sort != y.sort || x.arity != y.arity) {
        return false;
    }
    let map: BTreeMap<&Letter, &Letter> = lb.iter().zip(&la).collect();
    let renamed = b.map_atoms(&mut |l, args, negated| Formula::Atom {
        letter: map[l].clone(),
        args: args.to_vec(),
        negated,
    });
    renamed == *a
}

fn criterion_3() -> Verdict {
    let q = phi();
    // The printed image with its unmatched parenthesis closed and the
    // stray negation before the last literal block removed.
    let printed = parse_formula(
        "cex x: (P(0) cand P(1)) \\/ cex y: (~P(y) /\\ cex z: (((Q(x) \\/ ~Q(0)) \\/ (R(y) \\/ ~R(1)) \\/ (S(x) \\/ ~S(1))) /\\ ((T(z) \\/ ~T(1)) \\/ (U(x) \\/ ~U(1)) \\/ (V(z) \\/ ~V(0)))))",
    )
    .map_err(|e| e.to_string())?;
    let image = reduce_to_cl4(&q);
    if !equal_up_to_letter_renaming(&printed, &image) {
        return Err(format!("image {image} differs from the printed formula"));
    }
    let proof = Prover::new(ProverConfig::default())
        .prove(&image)
        .unwrap()
        .ok_or("image not proved")?;
    if !check_proof(&proof, &ProverConfig::default()).is_valid() {
        return Err("prover output does not check".into());
    }
    let canonical = canonicalize_proof(&proof).map_err(|e| e.to_string())?;
    let t = proof_to_strategy(&q, &canonical).map_err(|e| e.to_string())?;
    if !check_strategy_tree(&q, &t).is_valid() {
        return Err("extracted tree does not check".into());
    }
    if !eval_qbf(&q) {
        return Err("eval_qbf(phi) is false".into());
    }
    Ok(format!("image matches, proof of size {} checks, tree checks, phi true", proof.size()))
}

fn random_stable_context(rng: &mut ChaCha8Rng, depth: u32) -> Formula {
    let letters = [("p", 0), ("r", 1), ("s", 2), ("P", 0), ("R", 1)];
    let term = |rng: &mut ChaCha8Rng| match rng.random_range(0..4) {
        0 => Term::var("x"),
        k => Term::Const(k - 1),
    };
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..10) {
            0 => Formula::Top,
            1 => Formula::Bot,
            _ => {
                let (name, arity) = letters[rng.random_range(0..letters.len())];
                Formula::Atom {
                    letter: Letter::new(name, arity),
                    args: (0..arity).map(|_| term(rng)).collect(),
                    negated: rng.random(),
                }
            }
        };
    }
    let kids = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(2..4);
        (0..n).map(|_| random_stable_context(rng, depth - 1)).collect::<Vec<_>>()
    };
    match rng.random_range(0..6) {
        0 | 1 => Formula::ParAnd(kids(rng)),
        2 | 3 => Formula::ParOr(kids(rng)),
        4 => Formula::ChoAnd(kids(rng)),
        _ => Formula::ChoOr(kids(rng)),
    }
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let q = Letter::new("k", 1);
    let mut checked = 0;
    let mut draws = 0;
    while checked < STABILITY_SAMPLES {
        draws += 1;
        if draws > 200 * STABILITY_SAMPLES {
            return Err(format!("only {checked} stable samples found"));
        }
        // Force stability often enough by disjoining a tautology half the time.
        let mut pi = random_stable_context(&mut rng, 3);
        if rng.random_bool(0.5) {
            pi = Formula::ParOr(vec![pi, Formula::atom("p", vec![]), Formula::neg_atom("p", vec![])]);
        }
        if pi.validate().is_err() || pi.mentions_letter_name("k") || !cl4_core::is_stable(&pi) {
            continue;
        }
        let c = rng.random_range(0..2);
        let atom = |negated| Formula::Atom {
            letter: q.clone(),
            args: vec![Term::Const(c)],
            negated,
        };
        let wrapped = Formula::ParOr(vec![atom(false), Formula::ParAnd(vec![atom(true), pi.clone()])]);
        if !cl4_core::is_stable(&wrapped) {
            return Err(format!("{wrapped} is not stable"));
        }
        checked += 1;
    }
    Ok(format!("{checked} stable contexts, all wrapped forms stable"))
}

fn criterion_5() -> Verdict {
    let mut trees = 0;
    let corpus: Vec<Qbf> = exhaustive().into_iter().chain(randomized()).collect();
    for q in &corpus {
        match (eval_qbf(q), winning_strategy_tree(q)) {
            (true, Some(t)) => {
                let report = check_strategy_tree(q, &t);
                if !report.is_valid() {
                    return Err(format!("{q}: {:?}", report.diagnostics));
                }
                trees += 1;
            }
            (false, None) => {}
            (truth, t) => return Err(format!("{q}: eval={truth} tree={}", t.is_some())),
        }
    }
    Ok(format!("{} instances, {trees} trees checked", corpus.len()))
}

fn criterion_6() -> Verdict {
    let mut done = 0;
    for q in exhaustive().into_iter().chain(randomized()) {
        let Some(t) = winning_strategy_tree(&q) else { continue };
        let proof = strategy_to_proof(&q, &t).map_err(|e| format!("{q}: {e}"))?;
        let report = check_proof(&proof, &ProverConfig::default());
        if !report.is_valid() {
            return Err(format!("{q}: {}", report.diagnostics[0]));
        }
        let canonical = canonicalize_proof(&proof).map_err(|e| format!("{q}: {e}"))?;
        let back = proof_to_strategy(&q, &canonical).map_err(|e| format!("{q}: {e}"))?;
        if back.odd_level_labels() != t.odd_level_labels() {
            return Err(format!("{q}: labels differ"));
        }
        done += 1;
    }
    if done < ROUND_TRIP_MIN {
        return Err(format!("only {done} true instances"));
    }
    Ok(format!("{done} true instances round-trip"))
}

fn mutation_proofs() -> Vec<(ProofNode, ProverConfig)> {
    let mut out = Vec::new();
    let corpus: Vec<Qbf> = exhaustive().into_iter().chain(randomized()).collect();
    for q in corpus.iter().filter(|q| eval_qbf(q)) {
        for (f, cfg) in [
            (reduce_to_cl4(q), ProverConfig::default()),
            (reduce_to_cl3(q), ProverConfig::cl3()),
        ] {
            if out.len() == MUTATION_PROOFS {
                return out;
            }
            let proof = Prover::new(cfg).prove(&f).unwrap().unwrap();
            out.push((proof, cfg));
        }
    }
    out
}

fn rule_with_tag(tag: usize, old: &Rule) -> Rule {
    let path = match old {
        Rule::Move(Move::ChooseDisjunct { path, .. }) | Rule::Move(Move::ChooseTerm { path, .. }) => path.clone(),
        Rule::Move(Move::MatchPair { pos_path, .. }) => pos_path.clone(),
        Rule::Wait => cl4_core::Path::root(),
    };
    match tag {
        0 => Rule::Wait,
        1 => Rule::Move(Move::ChooseDisjunct { path, index: 0 }),
        2 => Rule::Move(Move::ChooseTerm { path, term: Term::Const(0) }),
        _ => Rule::Move(Move::MatchPair {
            pos_path: path.clone(),
            neg_path: path,
            fresh: Letter::new("flip_0", 0),
        }),
    }
}

fn tag(rule: &Rule) -> usize {
    match rule {
        Rule::Wait => 0,
        Rule::Move(Move::ChooseDisjunct { .. }) => 1,
        Rule::Move(Move::ChooseTerm { .. }) => 2,
        Rule::Move(Move::MatchPair { .. }) => 3,
    }
}

fn perturbed_paths(p: &cl4_core::Path) -> Vec<cl4_core::Path> {
    let mut out = Vec::new();
    for i in 0..p.0.len() {
        for delta in [1i64, -1] {
            let v = p.0[i] as i64 + delta;
            if v >= 0 {
                let mut q = p.clone();
                q.0[i] = v as usize;
                out.push(q);
            }
        }
    }
    out
}

/// Every single-point mutant of `proof` in the mutation set, with a label.
fn mutants(proof: &ProofNode) -> Vec<(&'static str, ProofNode)> {
    let mut addresses = Vec::new();
    proof.walk(&mut |at, _| addresses.push(at.to_vec()));
    let mut out = Vec::new();
    for at in addresses {
        let node = proof.node_at(&at).unwrap().clone();
        let mut push = |kind: &'static str, rule: Rule, premises: Vec<ProofNode>| {
            let mut m = proof.clone();
            let n = m.node_at_mut(&at).unwrap();
            n.rule = rule;
            n.premises = premises;
            out.push((kind, m));
        };
        for t in (0..4).filter(|&t| t != tag(&node.rule)) {
            push("rule tag", rule_with_tag(t, &node.rule), node.premises.clone());
        }
        match &node.rule {
            Rule::Wait => {
                for i in 0..node.premises.len() {
                    let mut ps = node.premises.clone();
                    ps.remove(i);
                    push("wait premise", Rule::Wait, ps);
                }
            }
            Rule::Move(Move::ChooseDisjunct { path, index }) => {
                for p in perturbed_paths(path) {
                    push("path index", Rule::Move(Move::ChooseDisjunct { path: p, index: *index }), node.premises.clone());
                }
            }
            Rule::Move(Move::ChooseTerm { path, term }) => {
                for p in perturbed_paths(path) {
                    push("path index", Rule::Move(Move::ChooseTerm { path: p, term: term.clone() }), node.premises.clone());
                }
                for v in node.conclusion.bound_vars() {
                    push(
                        "bound term",
                        Rule::Move(Move::ChooseTerm { path: path.clone(), term: Term::var(v) }),
                        node.premises.clone(),
                    );
                }
            }
            Rule::Move(Move::MatchPair { pos_path, neg_path, fresh }) => {
                for p in perturbed_paths(pos_path) {
                    push("path index", Rule::Move(Move::MatchPair { pos_path: p, neg_path: neg_path.clone(), fresh: fresh.clone() }), node.premises.clone());
                }
                for p in perturbed_paths(neg_path) {
                    push("path index", Rule::Move(Move::MatchPair { pos_path: pos_path.clone(), neg_path: p, fresh: fresh.clone() }), node.premises.clone());
                }
                push(
                    "polarity",
                    Rule::Move(Move::MatchPair { pos_path: neg_path.clone(), neg_path: pos_path.clone(), fresh: fresh.clone() }),
                    node.premises.clone(),
                );
            }
        }
    }
    out
}

fn criterion_7() -> Verdict {
    let proofs = mutation_proofs();
    if proofs.len() < MUTATION_PROOFS {
        return Err(format!("only {} proofs available", proofs.len()));
    }
    let mut per_kind: BTreeMap<&str, usize> = BTreeMap::new();
    for (proof, cfg) in &proofs {
        if !check_proof(proof, cfg).is_valid() {
            return Err("an unmutated proof is rejected".into());
        }
        for (kind, m) in mutants(proof) {
            if check_proof(&m, cfg).is_valid() {
                return Err(format!("accepted {kind} mutant of a proof of {}", proof.conclusion));
            }
            *per_kind.entry(kind).or_default() += 1;
        }
    }
    for kind in ["rule tag", "path index", "polarity", "wait premise", "bound term"] {
        if !per_kind.contains_key(kind) {
            return Err(format!("no {kind} mutants were generated"));
        }
    }
    let total: usize = per_kind.values().sum();
    Ok(format!("{} proofs, {total} mutants all rejected {per_kind:?}", proofs.len()))
}

fn criterion_8() -> Verdict {
    let corpus: Vec<Qbf> = exhaustive().into_iter().chain(randomized()).collect();
    let report = bench_run(&corpus, &ProverConfig::default(), true);
    if let Some(r) = report.records.iter().find(|r| !r.within_bound()) {
        return Err(format!("{}: cl4 depth {} mu {}, cl3 depth {} mu {}", r.qbf, r.cl4.max_depth, r.cl4.mu, r.cl3.max_depth, r.cl3.mu));
    }
    let slack = report
        .records
        .iter()
        .map(|r| r.cl4.mu + 1 - r.cl4.max_depth)
        .min()
        .unwrap_or(0);
    Ok(format!("{} instances within mu+1 (minimum slack {slack})", report.instances))
}

fn eval_row(f: &Formula, keys: &[(&str, &[Term])], row: u32) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Atom { letter, args, negated } => {
            let i = keys.iter().position(|&(n, a)| n == letter.name && a == args.as_slice()).unwrap();
            (row >> i & 1 == 1) != *negated
        }
        Formula::ParAnd(v) => v.iter().all(|c| eval_row(c, keys, row)),
        Formula::ParOr(v) => v.iter().any(|c| eval_row(c, keys, row)),
        _ => unreachable!("elementarizations are elementary"),
    }
}

fn criterion_9() -> Verdict {
    let mut images: Vec<(Formula, ProverConfig)> = Vec::new();
    for q in exhaustive().into_iter().chain(randomized()).chain([phi()]) {
        images.push((reduce_to_cl4(&q), ProverConfig::default()));
        images.push((reduce_to_cl3(&q), ProverConfig::cl3()));
    }
    let mut checked: BTreeSet<Formula> = BTreeSet::new();
    let mut skipped = 0;
    for (root, cfg) in images {
        // The same searches criteria 1 and 2 run, with proof construction.
        let mut prover = Prover::new(cfg);
        prover.record_stability_tests();
        prover.prove(&root).unwrap();
        let goals = prover.take_stability_trace();
        for goal in goals {
            let e = elementarize(&goal);
            if checked.contains(&e) {
                continue;
            }
            let keys = atom_keys(&e);
            if keys.len() > MAX_TRUTH_TABLE_KEYS {
                skipped += 1;
                continue;
            }
            let table = (0..1u32 << keys.len()).all(|row| eval_row(&e, &keys, row));
            if is_valid_classical(&e).unwrap() != table {
                return Err(format!("disagreement on {e}"));
            }
            checked.insert(e);
        }
    }
    Ok(format!(
        "{} distinct elementarizations agree ({skipped} tests over {MAX_TRUTH_TABLE_KEYS} keys skipped)",
        checked.len()
    ))
}

fn criterion_10() -> Verdict {
    let corpus = exhaustive();
    for q in &corpus {
        for (f, base) in [
            (reduce_to_cl4(q), ProverConfig::default()),
            (reduce_to_cl3(q), ProverConfig::cl3()),
        ] {
            let wider = ProverConfig {
                term_pool: TermPool::OccurringPlusFresh(2),
                ..base
            };
            if provable(&f, base) != provable(&f, wider) {
                return Err(format!("{q}: verdict changes"));
            }
        }
    }
    Ok(format!("{} instances, both logics unchanged", corpus.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("triple agreement, exhaustive", criterion_1),
        ("triple agreement, randomized", criterion_2),
        ("worked example", criterion_3),
        ("wrapped stable contexts stay stable", criterion_4),
        ("strategy trees exist iff true", criterion_5),
        ("bridge round trip", criterion_6),
        ("proof-checker mutations", criterion_7),
        ("space bound", criterion_8),
        ("classical-validity oracle", criterion_9),
        ("term-pool robustness", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let took = start.elapsed();
        match verdict {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} [{took:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{took:.1?}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
