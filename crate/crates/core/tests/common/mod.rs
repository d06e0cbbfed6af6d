#![allow(dead_code)]

use cl4_core::qbf::{Clause, Literal};
use cl4_core::{Formula, Letter, Qbf, Quantifier, Term};
use proptest::prelude::*;

pub fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0u64..3).prop_map(Term::Const),
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
    ]
}

fn atom(general: bool) -> impl Strategy<Value = Formula> {
    let names: Vec<(&str, usize)> = if general {
        vec![("p", 0), ("q", 1), ("r", 2), ("P", 0), ("Q", 1)]
    } else {
        vec![("p", 0), ("q", 1), ("r", 2), ("s", 0)]
    };
    (prop::sample::select(names), prop::collection::vec(term(), 2), any::<bool>()).prop_map(
        |((name, arity), args, negated)| Formula::Atom {
            letter: Letter::new(name, arity),
            args: args[..arity].to_vec(),
            negated,
        },
    )
}

/// Raw random formulas; most callers filter through `validate`.
pub fn raw_formula(general: bool, depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
        6 => atom(general),
    ];
    leaf.prop_recursive(depth, 24, 3, |inner| {
        let var = prop::sample::select(vec!["x", "y", "z"]);
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::ParAnd),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::ParOr),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Formula::ChoAnd),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Formula::ChoOr),
            (var.clone(), inner.clone()).prop_map(|(x, b)| Formula::ChoAll(x.into(), Box::new(b))),
            (var, inner).prop_map(|(x, b)| Formula::ChoEx(x.into(), Box::new(b))),
        ]
    })
}

pub fn formula(general: bool, depth: u32) -> impl Strategy<Value = Formula> {
    raw_formula(general, depth).prop_filter("well-formed", |f| f.validate().is_ok())
}

/// Choiceless formulas without general letters.
pub fn elementary_formula(depth: u32) -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        1 => Just(Formula::Top),
        1 => Just(Formula::Bot),
        6 => atom(false),
    ];
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Formula::ParAnd),
            prop::collection::vec(inner, 2..4).prop_map(Formula::ParOr),
        ]
    })
}

fn lit(var: &str, positive: bool) -> Literal {
    if positive {
        Literal::pos(var)
    } else {
        Literal::neg(var)
    }
}

/// Every QBF `∃x M` where M is a multiset of at most three clauses over
/// the literals x and ¬x.
pub fn exists_x_corpus() -> Vec<Qbf> {
    let clause = |negatives: usize| Clause(std::array::from_fn(|i| lit("x", i < 3 - negatives)));
    let mut out = Vec::new();
    for size in 0..=3usize {
        let mut picks = vec![0usize; size];
        loop {
            let matrix = picks.iter().map(|&k| clause(k)).collect();
            out.push(Qbf::new(vec![(Quantifier::Exists, "x".into())], matrix).unwrap());
            // next non-decreasing sequence over 0..4
            let Some(i) = (0..size).rev().find(|&i| picks[i] < 3) else { break };
            picks[i] += 1;
            let v = picks[i];
            picks[i..].iter_mut().for_each(|p| *p = v);
        }
    }
    out
}

/// Random `∃x ∀y ∃z` QBFs with 2 to 4 clauses over {x, y, z}.
pub fn exists_forall_exists() -> impl Strategy<Value = Qbf> {
    let literal = (prop::sample::select(vec!["x", "y", "z"]), any::<bool>())
        .prop_map(|(v, p)| lit(v, p));
    let clause = [literal.clone(), literal.clone(), literal].prop_map(Clause);
    prop::collection::vec(clause, 2..=4).prop_map(|matrix| {
        Qbf::new(
            vec![
                (Quantifier::Exists, "x".into()),
                (Quantifier::Forall, "y".into()),
                (Quantifier::Exists, "z".into()),
            ],
            matrix,
        )
        .unwrap()
    })
}
