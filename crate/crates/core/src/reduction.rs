//! The polynomial-time mapping from QBFs to formulas whose provability
//! coincides with the truth of the QBF.
//!
//! A leading or inner `∃x` becomes `⊔x`. Each `∀x Ω` becomes
//! `(G(0) ⊓ G(1)) ∨ ⊔x(¬G(x) ∧ Ω)` with a new unary letter `G`. In the
//! matrix a positive literal `x` becomes `G(x) ∨ ¬G(1)` and a negative
//! literal `¬x` becomes `G(x) ∨ ¬G(0)`, with a new letter per occurrence.
//!
//! Letters are named `P1, P2, ...` for universal steps in prefix order and
//! `L1, L2, ...` for literal occurrences in reading order; the elementary
//! variant uses `p1, ...` and `l1, ...`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use thiserror::Error;

use crate::formula::{Formula, Letter, Term};
use crate::qbf::{Literal, Qbf, Quantifier};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("formula has no choice quantifier")]
pub struct NoQuantifier;

/// Removes the leftmost (pre-order) choice quantifier and replaces its
/// variable by `c` throughout the quantifier's body.
pub fn qm(f: &Formula, c: u64) -> Result<Formula, NoQuantifier> {
    fn go(f: &Formula, c: u64) -> Option<Formula> {
        match f {
            Formula::ChoAll(x, body) | Formula::ChoEx(x, body) => {
                Some(body.replace_var_unchecked(x, &Term::Const(c)))
            }
            _ => {
                let children = f.children();
                let (i, replaced) = children
                    .iter()
                    .enumerate()
                    .find_map(|(i, child)| go(child, c).map(|r| (i, r)))?;
                f.replace_at(&alloc::vec![i].into(), replaced)
            }
        }
    }
    go(f, c).ok_or(NoQuantifier)
}

struct Namer {
    general: bool,
    universals: usize,
    literals: usize,
}

impl Namer {
    fn letter(&self, stem: char, k: usize) -> Letter {
        let stem = if self.general {
            stem
        } else {
            stem.to_ascii_lowercase()
        };
        Letter::new(format!("{stem}{k}"), 1)
    }

    fn next_universal(&mut self) -> Letter {
        self.universals += 1;
        self.letter('P', self.universals)
    }

    fn next_literal(&mut self) -> Letter {
        self.literals += 1;
        self.letter('L', self.literals)
    }
}

fn atom(letter: &Letter, arg: Term, negated: bool) -> Formula {
    Formula::Atom {
        letter: letter.clone(),
        args: alloc::vec![arg],
        negated,
    }
}

fn literal_block(namer: &mut Namer, lit: &Literal) -> Formula {
    let g = namer.next_literal();
    let witness = if lit.positive { 1 } else { 0 };
    Formula::ParOr(alloc::vec![
        atom(&g, Term::Var(lit.var.clone()), false),
        atom(&g, Term::Const(witness), true),
    ])
}

fn matrix(namer: &mut Namer, q: &Qbf) -> Formula {
    let mut clauses: Vec<Formula> = q
        .matrix()
        .iter()
        .map(|c| Formula::ParOr(c.0.iter().map(|l| literal_block(namer, l)).collect()))
        .collect();
    match clauses.len() {
        0 => Formula::Top,
        1 => clauses.pop().expect("one clause"),
        _ => Formula::ParAnd(clauses),
    }
}

fn reduce(q: &Qbf, general: bool) -> Formula {
    fn steps(q: &Qbf, i: usize, namer: &mut Namer) -> Formula {
        let Some((quant, x)) = q.prefix().get(i) else {
            return matrix(namer, q);
        };
        match quant {
            Quantifier::Exists => Formula::ChoEx(x.clone(), Box::new(steps(q, i + 1, namer))),
            Quantifier::Forall => {
                let g = namer.next_universal();
                let choice = Formula::ChoAnd(alloc::vec![
                    atom(&g, Term::Const(0), false),
                    atom(&g, Term::Const(1), false),
                ]);
                let guarded = Formula::ParAnd(alloc::vec![
                    atom(&g, Term::Var(x.clone()), true),
                    steps(q, i + 1, namer),
                ]);
                Formula::ParOr(alloc::vec![choice, Formula::ChoEx(x.clone(), Box::new(guarded))])
            }
        }
    }
    let mut namer = Namer {
        general,
        universals: 0,
        literals: 0,
    };
    steps(q, 0, &mut namer)
}

/// The general-base image of `q`: its provability equals the truth of `q`.
pub fn reduce_to_cl4(q: &Qbf) -> Formula {
    reduce(q, true)
}

/// Same construction with elementary letters in place of general ones,
/// for the elementary-base logic.
pub fn reduce_to_cl3(q: &Qbf) -> Formula {
    reduce(q, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_formula;
    use crate::qbf::Clause;
    use alloc::string::String;
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn qm_examples() {
        assert_eq!(
            qm(&f("cex x: ((p(x) \\/ q) /\\ r)"), 0).unwrap(),
            f("(p(0) \\/ q) /\\ r")
        );
        assert_eq!(qm(&f("call y: p(y)"), 1).unwrap(), f("p(1)"));
        assert_eq!(
            qm(&f("G(0) \\/ cex x: (~G(x) /\\ p)"), 0).unwrap(),
            f("G(0) \\/ (~G(0) /\\ p)")
        );
        assert_eq!(qm(&f("p \\/ q"), 0), Err(NoQuantifier));
    }

    #[test]
    fn single_existential() {
        let x = || Literal::pos("x");
        let q = Qbf::new(
            vec![(Quantifier::Exists, String::from("x"))],
            vec![Clause([x(), x(), x()])],
        )
        .unwrap();
        assert_eq!(
            reduce_to_cl4(&q),
            f("cex x: (L1(x) \\/ ~L1(1)) \\/ (L2(x) \\/ ~L2(1)) \\/ (L3(x) \\/ ~L3(1))")
        );
        assert_eq!(
            reduce_to_cl3(&q),
            f("cex x: (l1(x) \\/ ~l1(1)) \\/ (l2(x) \\/ ~l2(1)) \\/ (l3(x) \\/ ~l3(1))")
        );
    }

    #[test]
    fn empty_matrix_is_top() {
        let q = Qbf::new(vec![(Quantifier::Exists, String::from("x"))], vec![]).unwrap();
        assert_eq!(reduce_to_cl4(&q), f("cex x: T"));
    }
}
