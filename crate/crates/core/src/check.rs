//! Independent proof checker.
//!
//! Every rule's side conditions are re-derived here from the formula
//! primitives; nothing is delegated to the search code in
//! [`crate::prover`].

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::elementary::is_stable;
use crate::formula::{Formula, Path, Sort, Term};
use crate::prover::{Logic, Move, ProofNode, ProverConfig, Rule};

/// A rule violation at the node reached by following `node` premise
/// indices from the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub node: Vec<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: {}", Path(self.node.clone()), self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.diagnostics.iter().any(|d| d.message.contains(needle))
    }
}

/// Checks every node of `root` against its rule. Only `cfg.logic` matters:
/// in `Cl3` mode general letters and Match nodes are rejected.
pub fn check_proof(root: &ProofNode, cfg: &ProverConfig) -> CheckReport {
    let mut report = CheckReport::default();
    root.walk(&mut |at, node| {
        for message in check_node(node, cfg.logic) {
            report.diagnostics.push(Diagnostic {
                node: at.to_vec(),
                message,
            });
        }
    });
    report
}

fn check_node(node: &ProofNode, logic: Logic) -> Vec<String> {
    let f = &node.conclusion;
    if let Err(e) = f.validate() {
        return alloc::vec![format!("malformed conclusion: {e}")];
    }
    let mut errs = Vec::new();
    if logic == Logic::Cl3 && f.has_general_letters() {
        errs.push("general letter in an elementary-base proof".into());
    }
    match &node.rule {
        Rule::Wait => check_wait(node, &mut errs),
        Rule::Move(m) => {
            if node.premises.len() != 1 {
                errs.push(format!(
                    "rule takes exactly one premise, found {}",
                    node.premises.len()
                ));
                return errs;
            }
            let premise = &node.premises[0].conclusion;
            match expected_premise(f, m, logic) {
                Ok(expected) if &expected == premise => {}
                Ok(_) => errs.push("premise does not match the rule application".into()),
                Err(e) => errs.push(e),
            }
        }
    }
    errs
}

fn surface_node<'a>(f: &'a Formula, path: &Path) -> Result<&'a Formula, String> {
    let node = f
        .at(path)
        .ok_or_else(|| format!("path {path} does not resolve"))?;
    if !f.is_surface_path(path) {
        return Err(format!("occurrence at {path} is not a surface occurrence"));
    }
    Ok(node)
}

fn expected_premise(f: &Formula, m: &Move, logic: Logic) -> Result<Formula, String> {
    match m {
        Move::ChooseDisjunct { path, index } => match surface_node(f, path)? {
            Formula::ChoOr(ds) => {
                let d = ds
                    .get(*index)
                    .ok_or_else(|| format!("disjunct index {index} out of range"))?;
                Ok(f.replace_at(path, d.clone()).expect("resolved above"))
            }
            _ => Err(format!("no choice disjunction at {path}")),
        },
        Move::ChooseTerm { path, term } => match surface_node(f, path)? {
            Formula::ChoEx(x, body) => {
                if let Term::Var(v) = term {
                    if f.bound_vars().contains(v.as_str()) {
                        return Err(format!(
                            "term {v} has bound occurrences in the conclusion"
                        ));
                    }
                }
                Ok(f.replace_at(path, substitute(body, x, term))
                    .expect("resolved above"))
            }
            _ => Err(format!("no choice existential at {path}")),
        },
        Move::MatchPair {
            pos_path,
            neg_path,
            fresh,
        } => {
            if logic == Logic::Cl3 {
                return Err("match is not a rule of the elementary-base logic".into());
            }
            let (Formula::Atom { letter: lp, args: ap, negated: np }, Formula::Atom { letter: ln, args: an, negated: nn }) =
                (surface_node(f, pos_path)?, surface_node(f, neg_path)?)
            else {
                return Err("match paths must address atoms".into());
            };
            if *np || !*nn || pos_path == neg_path {
                return Err("polarity pair violated".into());
            }
            if !lp.is_general() || lp != ln {
                return Err("matched occurrences are not one general letter".into());
            }
            if fresh.sort != Sort::Elementary
                || Sort::of_name(&fresh.name) != Sort::Elementary
                || fresh.arity != lp.arity
            {
                return Err("fresh letter must be elementary with the same arity".into());
            }
            if f.mentions_letter_name(&fresh.name) {
                return Err(format!("fresh letter {} occurs in the conclusion", fresh.name));
            }
            let with_pos = f
                .replace_at(
                    pos_path,
                    Formula::Atom {
                        letter: fresh.clone(),
                        args: ap.clone(),
                        negated: false,
                    },
                )
                .expect("resolved above");
            Ok(with_pos
                .replace_at(
                    neg_path,
                    Formula::Atom {
                        letter: fresh.clone(),
                        args: an.clone(),
                        negated: true,
                    },
                )
                .expect("resolved above"))
        }
    }
}

fn substitute(f: &Formula, x: &str, t: &Term) -> Formula {
    f.map_atoms(&mut |letter, args, negated| Formula::Atom {
        letter: letter.clone(),
        args: args
            .iter()
            .map(|a| match a {
                Term::Var(v) if v == x => t.clone(),
                other => other.clone(),
            })
            .collect(),
        negated,
    })
}

enum Expectation<'a> {
    Exact(Formula),
    /// Replace the ⊓x occurrence at `path` by its body with `var` renamed to
    /// some variable absent from the conclusion.
    Renamed {
        path: Path,
        var: &'a str,
        body: &'a Formula,
    },
}

impl Expectation<'_> {
    fn admits(&self, conclusion: &Formula, premise: &Formula) -> bool {
        match self {
            Expectation::Exact(e) => e == premise,
            Expectation::Renamed { path, var, body } => {
                let Some(candidate) = premise.at(path) else {
                    return false;
                };
                let mut renamed_to: Option<&Term> = None;
                if !same_up_to_renaming(body, candidate, var, &mut renamed_to) {
                    return false;
                }
                let fresh_ok = match renamed_to {
                    None => true,
                    Some(Term::Var(y)) => !conclusion.all_vars().contains(y.as_str()),
                    Some(Term::Const(_)) => false,
                };
                fresh_ok
                    && conclusion.replace_at(path, candidate.clone()).as_ref() == Some(premise)
            }
        }
    }
}

fn same_up_to_renaming<'b>(
    body: &Formula,
    candidate: &'b Formula,
    var: &str,
    renamed_to: &mut Option<&'b Term>,
) -> bool {
    match (body, candidate) {
        (
            Formula::Atom { letter, args, negated },
            Formula::Atom { letter: l2, args: a2, negated: n2 },
        ) => {
            letter == l2
                && negated == n2
                && args.len() == a2.len()
                && args.iter().zip(a2).all(|(a, b)| match a {
                    Term::Var(v) if v == var => match renamed_to {
                        Some(prev) => *prev == b,
                        None => {
                            *renamed_to = Some(b);
                            true
                        }
                    },
                    _ => a == b,
                })
        }
        (Formula::ChoAll(x, b1), Formula::ChoAll(y, b2))
        | (Formula::ChoEx(x, b1), Formula::ChoEx(y, b2)) => {
            x == y && same_up_to_renaming(b1, b2, var, renamed_to)
        }
        _ => {
            core::mem::discriminant(body) == core::mem::discriminant(candidate)
                && body.children().len() == candidate.children().len()
                && body
                    .children()
                    .iter()
                    .zip(candidate.children())
                    .all(|(a, b)| same_up_to_renaming(a, b, var, renamed_to))
        }
    }
}

fn check_wait(node: &ProofNode, errs: &mut Vec<String>) {
    let f = &node.conclusion;
    if !is_stable(f) {
        errs.push("conclusion not stable".into());
    }
    let mut expectations = Vec::new();
    collect_expectations(f, &mut Vec::new(), f, &mut expectations);
    let premises: Vec<&Formula> = node.premises.iter().map(|p| &p.conclusion).collect();
    if let Some(i) = premises
        .iter()
        .position(|p| !expectations.iter().any(|e| e.admits(f, p)))
    {
        errs.push(format!("wait premise {i} is not in the premise set"));
    }
    if let Some(missing) = expectations
        .iter()
        .position(|e| !premises.iter().any(|p| e.admits(f, p)))
    {
        errs.push(format!(
            "wait premise set incomplete ({} expected, entry {missing} missing)",
            expectations.len()
        ));
    }
}

fn collect_expectations<'a>(
    root: &Formula,
    at: &mut Vec<usize>,
    node: &'a Formula,
    out: &mut Vec<Expectation<'a>>,
) {
    match node {
        Formula::ChoAnd(cs) => {
            let path = Path(at.clone());
            for c in cs {
                out.push(Expectation::Exact(
                    root.replace_at(&path, c.clone()).expect("walked path"),
                ));
            }
        }
        Formula::ChoAll(x, body) => out.push(Expectation::Renamed {
            path: Path(at.clone()),
            var: x,
            body,
        }),
        Formula::ChoOr(_) | Formula::ChoEx(..) => {}
        _ => {
            for (i, c) in node.children().iter().enumerate() {
                at.push(i);
                collect_expectations(root, at, c, out);
                at.pop();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Letter;
    use crate::parse::parse_formula;
    use crate::prover::prove;
    use alloc::vec;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn prover_output_checks() {
        let cfg = ProverConfig::default();
        let proof = prove(&f("P \\/ ~P"), cfg).unwrap().unwrap();
        assert!(check_proof(&proof, &cfg).is_valid());
    }

    #[test]
    fn wait_on_unstable_formula() {
        let report = check_proof(&ProofNode::leaf(f("P \\/ ~P")), &ProverConfig::default());
        assert!(!report.is_valid());
        assert!(report.mentions("conclusion not stable"));
    }

    #[test]
    fn match_on_two_positive_occurrences() {
        let node = ProofNode {
            conclusion: f("P \\/ P \\/ ~P"),
            rule: Rule::Move(Move::MatchPair {
                pos_path: Path(vec![0]),
                neg_path: Path(vec![1]),
                fresh: Letter::new("p_0", 0),
            }),
            premises: vec![ProofNode::leaf(f("p_0 \\/ ~p_0 \\/ ~P"))],
        };
        let report = check_proof(&node, &ProverConfig::default());
        assert!(report.mentions("polarity pair violated"));
    }

    #[test]
    fn wait_accepts_any_fresh_variable() {
        let node = ProofNode {
            conclusion: f("call x: (p(x) \\/ ~p(x))"),
            rule: Rule::Wait,
            premises: vec![ProofNode::leaf(f("p(z7) \\/ ~p(z7)"))],
        };
        assert!(check_proof(&node, &ProverConfig::default()).is_valid());
        let clash = ProofNode {
            conclusion: f("call x: (p(x) \\/ ~p(y))"),
            rule: Rule::Wait,
            premises: vec![ProofNode::leaf(f("p(y) \\/ ~p(y)"))],
        };
        assert!(!check_proof(&clash, &ProverConfig::default()).is_valid());
    }

    #[test]
    fn missing_wait_premise() {
        let node = ProofNode {
            conclusion: f("(p cand ~p) \\/ T"),
            rule: Rule::Wait,
            premises: vec![ProofNode::leaf(f("p \\/ T"))],
        };
        let report = check_proof(&node, &ProverConfig::default());
        assert!(report.mentions("incomplete"));
    }

    #[test]
    fn bound_term_rejected() {
        let node = ProofNode {
            conclusion: f("cex x: (p(x) \\/ ~p(x))"),
            rule: Rule::Move(Move::ChooseTerm {
                path: Path::root(),
                term: Term::var("x"),
            }),
            premises: vec![ProofNode::leaf(f("p(x) \\/ ~p(x)"))],
        };
        let report = check_proof(&node, &ProverConfig::default());
        assert!(report.mentions("bound occurrences"));
    }

    #[test]
    fn cl3_rejects_match_nodes() {
        let cfg = ProverConfig::default();
        let proof = prove(&f("P \\/ ~P"), cfg).unwrap().unwrap();
        let report = check_proof(&proof, &ProverConfig::cl3());
        assert!(report.mentions("elementary-base"));
    }
}
