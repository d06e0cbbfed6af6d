//! Proofs of reduction images from winning strategy trees, and winning
//! strategy trees from such proofs.
//!
//! Every formula with choice operators in a canonical proof of a reduction
//! image is a stack of elementary wrappers `q(c) ∨ (¬q(c) ∧ ·)` around one
//! of four cores:
//!
//! - A: `⊔x Θ`
//! - B: `(G(0) ⊓ G(1)) ∨ ⊔x(¬G(x) ∧ Θ)`
//! - G: `G(c) ∨ ⊔x(¬G(x) ∧ Θ)`
//! - H: `G(c) ∨ (¬G(c) ∧ Θ)`
//!
//! A canonical proof handles A by ⊔x-Choose; B by Wait into the `G(0)` and
//! `G(1)` branches, each followed by ⊔x-Choose (G to H) and a Match on the
//! `G` pair (H to the next A under one more wrapper). Once the formula is
//! choiceless the remaining general pairs are matched in left-to-right
//! letter order and Wait closes the branch.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::check::check_proof;
use crate::elementary::is_stable;
use crate::formula::{Formula, Letter, OccurrenceKind, Path, Term};
use crate::prover::{fresh_match_letter, wait_premises, Move, ProofNode, ProverConfig, Rule};
use crate::qbf::{check_strategy_tree, Qbf, StrategyNode, StrategyTree};
use crate::reduction::reduce_to_cl4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeClass {
    /// Wrapped `⊔x Θ`.
    FormA,
    /// Wrapped `(G(0) ⊓ G(1)) ∨ ⊔x(¬G(x) ∧ Θ)`.
    FormB,
    /// Wrapped `G(c) ∨ ⊔x(¬G(x) ∧ Θ)`.
    FormG,
    /// Wrapped `G(c) ∨ (¬G(c) ∧ Θ)`.
    FormH,
    /// Wrapped elementary formula.
    LeafElementaryContext,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelSub {
    Top,
    Middle,
    Bottom,
}

/// Name of a proof level: odd numbers stand alone, each even number is
/// split into top, middle and bottom levels (`2t`, `2m`, `2b`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelLabel {
    pub number: usize,
    pub sub: Option<LevelSub>,
}

impl fmt::Display for LevelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number)?;
        match self.sub {
            Some(LevelSub::Top) => f.write_str("t"),
            Some(LevelSub::Middle) => f.write_str("m"),
            Some(LevelSub::Bottom) => f.write_str("b"),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BridgeError {
    #[error("strategy tree is not winning: {}", .0.join("; "))]
    LosingStrategy(Vec<String>),
    #[error("proof root is not the reduction image of the QBF")]
    RootMismatch,
    #[error("proof node {node:?} is off the canonical pattern: {reason}")]
    NonCanonical { node: Vec<usize>, reason: String },
    #[error("not a reduction image: {0}")]
    NotReductionImage(String),
    #[error("rebuilt proof does not check: {0}")]
    Unchecked(String),
}

fn unary_general(f: &Formula, negated: bool) -> Option<(&Letter, &Term)> {
    match f {
        Formula::Atom {
            letter,
            args,
            negated: n,
        } if letter.is_general() && *n == negated && args.len() == 1 => Some((letter, &args[0])),
        _ => None,
    }
}

fn wrapper_inner(f: &Formula) -> Option<&Formula> {
    let Formula::ParOr(outer) = f else { return None };
    let [Formula::Atom { letter, args, negated: false }, Formula::ParAnd(inner)] = outer.as_slice()
    else {
        return None;
    };
    let [Formula::Atom { letter: l2, args: a2, negated: true }, rest] = inner.as_slice() else {
        return None;
    };
    let binary_constant = matches!(args.as_slice(), [Term::Const(0 | 1)]);
    (!letter.is_general() && letter == l2 && args == a2 && binary_constant).then_some(rest)
}

/// Strips wrappers `q(c) ∨ (¬q(c) ∧ ·)` (elementary unary `q`, `c` ∈
/// {0,1}) from the outside in. Returns the wrapper count, the path to the
/// core, and the core.
pub fn peel_wrappers(f: &Formula) -> (usize, Path, &Formula) {
    let mut path = Vec::new();
    let mut cur = f;
    while let Some(inner) = wrapper_inner(cur) {
        path.extend([1, 1]);
        cur = inner;
    }
    (path.len() / 2, Path(path), cur)
}

/// `(G(0) ⊓ G(1))` for some unary general `G`.
fn choice_pair(f: &Formula) -> Option<&Letter> {
    let Formula::ChoAnd(cs) = f else { return None };
    let [a, b] = cs.as_slice() else { return None };
    let (ga, ta) = unary_general(a, false)?;
    let (gb, tb) = unary_general(b, false)?;
    (ga == gb && *ta == Term::Const(0) && *tb == Term::Const(1)).then_some(ga)
}

/// `⊔x(¬G(x) ∧ Θ)` with the given `G`.
fn guarded_exists(f: &Formula, g: &Letter) -> bool {
    let Formula::ChoEx(x, body) = f else { return false };
    let Formula::ParAnd(parts) = &**body else { return false };
    match parts.as_slice() {
        [guard, _] => {
            matches!(unary_general(guard, true), Some((l, Term::Var(v))) if l == g && v == x)
        }
        _ => false,
    }
}

fn classify_core(core: &Formula) -> ShapeClass {
    if matches!(core, Formula::ChoEx(..)) {
        return ShapeClass::FormA;
    }
    if core.is_elementary() {
        return ShapeClass::LeafElementaryContext;
    }
    let Formula::ParOr(parts) = core else {
        return ShapeClass::Other;
    };
    let [left, right] = parts.as_slice() else {
        return ShapeClass::Other;
    };
    if let Some(g) = choice_pair(left) {
        if guarded_exists(right, g) {
            return ShapeClass::FormB;
        }
    }
    if let Some((g, Term::Const(c))) = unary_general(left, false) {
        if guarded_exists(right, g) {
            return ShapeClass::FormG;
        }
        if let Formula::ParAnd(rest) = right {
            if let [guard, _] = rest.as_slice() {
                if unary_general(guard, true) == Some((g, &Term::Const(*c))) {
                    return ShapeClass::FormH;
                }
            }
        }
    }
    ShapeClass::Other
}

/// Classifies `f` by structural pattern after peeling wrappers.
pub fn classify_shape(f: &Formula) -> ShapeClass {
    classify_core(peel_wrappers(f).2)
}

/// The choices a canonical proof makes along one branch: the term for an
/// existential step, then (unless it is the last quantifier) the two
/// universal replies, `G(0)` branch first, each with its own continuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChoicePlan {
    pub term: Term,
    pub replies: Vec<(Term, ChoicePlan)>,
}

fn plan_from_strategy(node: &StrategyNode) -> ChoicePlan {
    ChoicePlan {
        term: Term::Const(u64::from(node.label)),
        replies: node
            .children
            .iter()
            .map(|reply| {
                (
                    Term::Const(u64::from(reply.label)),
                    plan_from_strategy(&reply.children[0]),
                )
            })
            .collect(),
    }
}

fn not_image(what: &str, f: &Formula) -> BridgeError {
    BridgeError::NotReductionImage(format!("expected {what}, found {f}"))
}

fn step(conclusion: Formula, m: Move, premise: ProofNode) -> ProofNode {
    ProofNode {
        conclusion,
        rule: Rule::Move(m),
        premises: alloc::vec![premise],
    }
}

fn exists_region(f: &Formula, plan: &ChoicePlan) -> Result<ProofNode, BridgeError> {
    let (_, path, core) = peel_wrappers(f);
    let Formula::ChoEx(x, body) = core else {
        return Err(not_image("an existential step", f));
    };
    let next = f
        .replace_at(&path, body.replace_var_unchecked(x, &plan.term))
        .expect("peeled path resolves");
    let child = if plan.replies.is_empty() {
        leaf_region(&next)?
    } else {
        universal_region(&next, &plan.replies)?
    };
    Ok(step(
        f.clone(),
        Move::ChooseTerm {
            path,
            term: plan.term.clone(),
        },
        child,
    ))
}

fn universal_region(f: &Formula, replies: &[(Term, ChoicePlan)]) -> Result<ProofNode, BridgeError> {
    if classify_shape(f) != ShapeClass::FormB {
        return Err(not_image("a universal step", f));
    }
    let (_, core_path, _) = peel_wrappers(f);
    let branches = wait_premises(f);
    if branches.len() != 2 || replies.len() != 2 {
        return Err(not_image("a two-way universal step", f));
    }
    let mut premises = Vec::with_capacity(2);
    for (g_form, (term, next)) in branches.into_iter().zip(replies) {
        let exists_path = core_path.child(1);
        let Some(Formula::ChoEx(x, body)) = g_form.at(&exists_path) else {
            return Err(not_image("a universal reply", &g_form));
        };
        let h_form = g_form
            .replace_at(&exists_path, body.replace_var_unchecked(x, term))
            .expect("path resolves");
        let (pos_path, neg_path) = (core_path.child(0), core_path.child(1).child(0));
        let Some((g, _)) = h_form.at(&pos_path).and_then(|a| unary_general(a, false)) else {
            return Err(not_image("a general atom to match", &h_form));
        };
        let fresh = fresh_match_letter(&h_form, g);
        let m = Move::MatchPair {
            pos_path,
            neg_path,
            fresh,
        };
        let a_form = crate::prover::apply_move(&h_form, &m)
            .ok_or_else(|| not_image("a matchable pair", &h_form))?;
        let continuation = exists_region(&a_form, next)?;
        let matched = step(h_form.clone(), m, continuation);
        premises.push(step(
            g_form.clone(),
            Move::ChooseTerm {
                path: exists_path,
                term: term.clone(),
            },
            matched,
        ));
    }
    Ok(ProofNode {
        conclusion: f.clone(),
        rule: Rule::Wait,
        premises,
    })
}

/// Matches the remaining general pairs in left-to-right letter order, then
/// closes with Wait.
fn leaf_region(f: &Formula) -> Result<ProofNode, BridgeError> {
    if !f.is_choiceless() {
        return Err(not_image("a choiceless leaf", f));
    }
    let pos = f.surface_occurrences(OccurrenceKind::GeneralPositive);
    let neg = f.surface_occurrences(OccurrenceKind::GeneralNegative);
    let pair = pos.iter().find_map(|(pp, atom)| {
        let (g, _) = unary_general(atom, false)?;
        neg.iter()
            .find(|(_, n)| matches!(unary_general(n, true), Some((l, _)) if l == g))
            .map(|(np, _)| (pp.clone(), np.clone(), g))
    });
    match pair {
        Some((pos_path, neg_path, g)) => {
            let m = Move::MatchPair {
                pos_path,
                neg_path,
                fresh: fresh_match_letter(f, g),
            };
            let next = crate::prover::apply_move(f, &m).expect("pair resolves");
            Ok(step(f.clone(), m, leaf_region(&next)?))
        }
        None if is_stable(f) => Ok(ProofNode::leaf(f.clone())),
        None => Err(BridgeError::Unchecked(format!("leaf {f} is not stable"))),
    }
}

/// Builds the canonical proof of `reduce_to_cl4(q)` that follows the
/// winning strategy `t`.
pub fn strategy_to_proof(q: &Qbf, t: &StrategyTree) -> Result<ProofNode, BridgeError> {
    let report = check_strategy_tree(q, t);
    if !report.is_valid() {
        return Err(BridgeError::LosingStrategy(report.diagnostics));
    }
    exists_region(&reduce_to_cl4(q), &plan_from_strategy(&t.root))
}

/// Binders of the root's choice existentials in pre-order. In a reduction
/// image these are the QBF's variables in prefix order.
fn existential_binders(f: &Formula) -> Vec<&str> {
    fn go<'a>(f: &'a Formula, out: &mut Vec<&'a str>) {
        if let Formula::ChoEx(x, _) = f {
            out.push(x);
        }
        f.children().iter().for_each(|c| go(c, out));
    }
    let mut out = Vec::new();
    go(f, &mut out);
    out
}

struct Extractor<'a> {
    vars: Vec<&'a str>,
}

impl<'a> Extractor<'a> {
    fn off(at: &[usize], reason: impl Into<String>) -> BridgeError {
        BridgeError::NonCanonical {
            node: at.to_vec(),
            reason: reason.into(),
        }
    }

    /// Follows single-premise nodes from `node`, skipping Match steps,
    /// until the ⊔x-Choose on `var`.
    fn find_choice<'p>(
        &self,
        mut node: &'p ProofNode,
        at: &mut Vec<usize>,
        var: &str,
    ) -> Result<(Term, &'p ProofNode), BridgeError> {
        loop {
            match &node.rule {
                Rule::Move(Move::ChooseTerm { path, term }) => match node.conclusion.at(path) {
                    Some(Formula::ChoEx(x, _)) if x == var => {
                        at.push(0);
                        return Ok((term.clone(), &node.premises[0]));
                    }
                    _ => return Err(Self::off(at, format!("choice made before the one on {var}"))),
                },
                Rule::Move(Move::MatchPair { .. }) if node.premises.len() == 1 => {
                    at.push(0);
                    node = &node.premises[0];
                }
                _ => return Err(Self::off(at, format!("expected the choice on {var}"))),
            }
        }
    }

    fn plan(&self, node: &ProofNode, at: &mut Vec<usize>, i: usize) -> Result<ChoicePlan, BridgeError> {
        let (term, mut node) = self.find_choice(node, at, self.vars[i])?;
        if i + 1 == self.vars.len() {
            return Ok(ChoicePlan {
                term,
                replies: Vec::new(),
            });
        }
        while let Rule::Move(Move::MatchPair { .. }) = node.rule {
            at.push(0);
            node = &node.premises[0];
        }
        if node.rule != Rule::Wait || node.premises.len() != 2 {
            return Err(Self::off(at, "expected the two-way wait of a universal step"));
        }
        let expected = wait_premises(&node.conclusion);
        let mut replies = Vec::with_capacity(2);
        for want in &expected {
            let k = node
                .premises
                .iter()
                .position(|p| &p.conclusion == want)
                .ok_or_else(|| Self::off(at, "wait premise set mismatch"))?;
            let mut branch_at = at.clone();
            branch_at.push(k);
            let (reply, after) = self.find_choice(&node.premises[k], &mut branch_at, self.vars[i + 1])?;
            let next = self.plan(after, &mut branch_at, i + 2)?;
            replies.push((reply, next));
        }
        Ok(ChoicePlan { term, replies })
    }
}

/// Extracts the per-branch choices a proof of a reduction image makes.
pub fn choice_plan(proof: &ProofNode) -> Result<ChoicePlan, BridgeError> {
    let root = &proof.conclusion;
    if classify_shape(root) != ShapeClass::FormA {
        return Err(not_image("a leading choice existential", root));
    }
    let vars = existential_binders(root);
    if vars.len().is_multiple_of(2) {
        return Err(not_image("an odd number of quantifier steps", root));
    }
    Extractor { vars }.plan(proof, &mut Vec::new(), 0)
}

/// Reorders commuting rule applications of a valid proof of a reduction
/// image into canonical form; the conclusion is unchanged.
pub fn canonicalize_proof(proof: &ProofNode) -> Result<ProofNode, BridgeError> {
    let plan = choice_plan(proof)?;
    let canonical = exists_region(&proof.conclusion, &plan)?;
    let report = check_proof(&canonical, &ProverConfig::default());
    if !report.is_valid() {
        let first = &report.diagnostics[0];
        return Err(BridgeError::Unchecked(format!("{first}")));
    }
    Ok(canonical)
}

/// Level labels for each depth of a proof (index 0 is the root).
pub fn level_labels(proof: &ProofNode) -> Vec<LevelLabel> {
    let mut labels = Vec::new();
    let mut choice_phase = true;
    let mut number = 1;
    let mut sub = None;
    for level in proof_levels(proof) {
        if choice_phase && level.iter().all(|n| n.conclusion.is_choiceless()) {
            choice_phase = false;
            if sub.is_some() {
                number += 1;
                sub = None;
            }
        }
        if !choice_phase || number % 2 == 1 {
            labels.push(LevelLabel { number, sub: None });
            number += 1;
            continue;
        }
        let next = match sub {
            None => LevelSub::Top,
            Some(LevelSub::Top) => LevelSub::Middle,
            Some(LevelSub::Middle) => LevelSub::Bottom,
            Some(LevelSub::Bottom) => unreachable!("bottom level advances the number"),
        };
        labels.push(LevelLabel {
            number,
            sub: Some(next),
        });
        if next == LevelSub::Bottom {
            number += 1;
            sub = None;
        } else {
            sub = Some(next);
        }
    }
    labels
}

/// Nodes of a proof grouped by depth, left to right.
pub fn proof_levels(proof: &ProofNode) -> Vec<Vec<&ProofNode>> {
    let mut levels = Vec::new();
    let mut current = alloc::vec![proof];
    while !current.is_empty() {
        let next = current.iter().flat_map(|n| n.premises.iter()).collect();
        levels.push(current);
        current = next;
    }
    levels
}

fn first_difference(a: &ProofNode, b: &ProofNode, at: &mut Vec<usize>) -> Option<Vec<usize>> {
    if a.conclusion != b.conclusion || a.rule != b.rule || a.premises.len() != b.premises.len() {
        return Some(at.clone());
    }
    for (i, (pa, pb)) in a.premises.iter().zip(&b.premises).enumerate() {
        at.push(i);
        let d = first_difference(pa, pb, at);
        at.pop();
        if d.is_some() {
            return d;
        }
    }
    None
}

/// Reads a winning strategy tree off a canonical proof of
/// `reduce_to_cl4(q)`: the node in position m on odd level l gets label 1
/// iff the proof node in position m on level l chooses the constant 1.
pub fn proof_to_strategy(q: &Qbf, proof: &ProofNode) -> Result<StrategyTree, BridgeError> {
    if proof.conclusion != reduce_to_cl4(q) {
        return Err(BridgeError::RootMismatch);
    }
    let canonical = canonicalize_proof(proof)?;
    if let Some(node) = first_difference(proof, &canonical, &mut Vec::new()) {
        return Err(BridgeError::NonCanonical {
            node,
            reason: "proof is not in canonical order".into(),
        });
    }
    let n = q.depth();
    let labels = level_labels(proof);
    let levels = proof_levels(proof);
    let mut odd_labels: Vec<Vec<u8>> = Vec::new();
    for (depth, label) in labels.iter().enumerate() {
        if label.sub.is_some() || label.number % 2 == 0 || label.number > n {
            continue;
        }
        let expected = 1usize << (label.number / 2);
        let nodes = &levels[depth];
        if nodes.len() != expected {
            return Err(BridgeError::NonCanonical {
                node: Vec::new(),
                reason: format!("level {label} has {} nodes, expected {expected}", nodes.len()),
            });
        }
        let row = nodes
            .iter()
            .map(|node| match &node.rule {
                Rule::Move(Move::ChooseTerm { term, .. }) => Ok(u8::from(*term == Term::Const(1))),
                _ => Err(BridgeError::NonCanonical {
                    node: Vec::new(),
                    reason: format!("level {label} node is not an existential choice"),
                }),
            })
            .collect::<Result<Vec<u8>, _>>()?;
        odd_labels.push(row);
    }
    if odd_labels.len() != n.div_ceil(2) {
        return Err(BridgeError::NonCanonical {
            node: Vec::new(),
            reason: "proof levels do not cover every quantifier".into(),
        });
    }
    fn build(level: usize, pos: usize, n: usize, odd: &[Vec<u8>]) -> StrategyNode {
        if level % 2 == 1 {
            let children = if level < n {
                alloc::vec![build(level + 1, 2 * pos, n, odd), build(level + 1, 2 * pos + 1, n, odd)]
            } else {
                Vec::new()
            };
            StrategyNode {
                label: odd[level / 2][pos],
                children,
            }
        } else {
            StrategyNode {
                label: (pos % 2) as u8,
                children: alloc::vec![build(level + 1, pos, n, odd)],
            }
        }
    }
    Ok(StrategyTree {
        root: build(1, 0, n, &odd_labels),
    })
}
