//! Elementarization, classical validity of elementary formulas, and
//! stability.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::formula::{Formula, Term};
use crate::sat::Cnf;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("formula is not elementary (it contains choice operators or general letters)")]
pub struct NotElementary;

/// Replaces surface choice subformulas and surface general atoms by
/// logical constants.
///
/// Surface `⊓`/`⊓x` become `T`, surface `⊔`/`⊔x` become `F`. A positive
/// general atom becomes `F`. In a negative general atom the atom becomes
/// `T`, so the negated occurrence as a whole is `F`; since the AST keeps
/// negation on non-logical atoms only, that occurrence is emitted as `F`.
pub fn elementarize(f: &Formula) -> Formula {
    match f {
        Formula::ChoAnd(_) | Formula::ChoAll(..) => Formula::Top,
        Formula::ChoOr(_) | Formula::ChoEx(..) => Formula::Bot,
        Formula::Atom { letter, .. } if letter.is_general() => Formula::Bot,
        Formula::ParAnd(v) => Formula::ParAnd(v.iter().map(elementarize).collect()),
        Formula::ParOr(v) => Formula::ParOr(v.iter().map(elementarize).collect()),
        other => other.clone(),
    }
}

/// Identity of a propositional atom: letter name plus exact argument tuple.
pub type AtomKey<'a> = (&'a str, &'a [Term]);

/// Collects the distinct atom keys of `f` in first-occurrence order.
pub fn atom_keys(f: &Formula) -> Vec<AtomKey<'_>> {
    let mut keys: Vec<AtomKey<'_>> = Vec::new();
    f.visit_atoms(&mut |l, args, _| {
        let key = (l.name.as_str(), args);
        if !keys.contains(&key) {
            keys.push(key);
        }
    });
    keys
}

/// Classical validity of an elementary formula, treating each distinct
/// atom key as an independent propositional variable.
///
/// Decided by refuting the negation: the formula is Tseitin-encoded, the
/// root is asserted false, and a DPLL search with unit propagation looks
/// for a countermodel.
pub fn is_valid_classical(f: &Formula) -> Result<bool, NotElementary> {
    if !f.is_elementary() {
        return Err(NotElementary);
    }
    Ok(valid_unchecked(f))
}

fn valid_unchecked(f: &Formula) -> bool {
    let mut cnf = Cnf::default();
    let mut vars: BTreeMap<AtomKey<'_>, i32> = BTreeMap::new();
    let root = encode(f, &mut cnf, &mut vars);
    cnf.add(alloc::vec![-root]);
    !cnf.satisfiable()
}

fn encode<'a>(f: &'a Formula, cnf: &mut Cnf, vars: &mut BTreeMap<AtomKey<'a>, i32>) -> i32 {
    match f {
        Formula::Top | Formula::Bot => {
            let v = cnf.fresh();
            cnf.add(alloc::vec![v]);
            if matches!(f, Formula::Top) {
                v
            } else {
                -v
            }
        }
        Formula::Atom {
            letter,
            args,
            negated,
        } => {
            let v = *vars
                .entry((letter.name.as_str(), args.as_slice()))
                .or_insert_with(|| cnf.fresh());
            if *negated {
                -v
            } else {
                v
            }
        }
        Formula::ParAnd(ops) | Formula::ParOr(ops) => {
            let lits: Vec<i32> = ops.iter().map(|o| encode(o, cnf, vars)).collect();
            let g = cnf.fresh();
            // For a disjunction the gate is defined through its negation.
            let sign = if matches!(f, Formula::ParAnd(_)) { 1 } else { -1 };
            let g = sign * g;
            let mut back = alloc::vec![g];
            for &l in &lits {
                let l = sign * l;
                cnf.add(alloc::vec![-g, l]);
                back.push(-l);
            }
            cnf.add(back);
            sign * g
        }
        _ => unreachable!("choice operators are rejected before encoding"),
    }
}

/// A formula is stable when its elementarization is classically valid.
pub fn is_stable(f: &Formula) -> bool {
    valid_unchecked(&elementarize(f))
}
