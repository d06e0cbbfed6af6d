//! Prenex, strictly alternating, 3-CNF quantified Boolean formulas; the
//! formula game on them; and strategy trees for Player E.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::formula::is_var_name;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: String,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: impl Into<String>) -> Self {
        Literal {
            var: var.into(),
            positive: true,
        }
    }

    pub fn neg(var: impl Into<String>) -> Self {
        Literal {
            var: var.into(),
            positive: false,
        }
    }

    fn holds(&self, assignment: &BTreeMap<&str, bool>) -> bool {
        assignment[self.var.as_str()] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("-")?;
        }
        f.write_str(&self.var)
    }
}

/// A clause of exactly three literals; repetition is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause(pub [Literal; 3]);

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QbfError {
    #[error("empty quantifier prefix")]
    EmptyPrefix,
    #[error("quantifiers do not alternate at position {0}")]
    NotAlternating(usize),
    #[error("the first and last quantifiers must be existential")]
    Endpoints,
    #[error("variable {0} is quantified more than once")]
    DuplicateVariable(String),
    #[error("variable {0} occurs in the matrix but is not quantified")]
    UnboundVariable(String),
    #[error("`{0}` is not a valid variable name")]
    BadVariable(String),
    #[error("clause width: clause {index} has {width} literals")]
    ClauseWidth { index: usize, width: usize },
    #[error("play has {found} moves but the prefix has {expected} quantifiers")]
    PathLength { expected: usize, found: usize },
}

/// A QBF meeting the reduction's conventions: strictly alternating prefix
/// that starts and ends with ∃, distinct variables, 3-CNF matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Qbf {
    prefix: Vec<(Quantifier, String)>,
    matrix: Vec<Clause>,
}

impl Qbf {
    pub fn new(prefix: Vec<(Quantifier, String)>, matrix: Vec<Clause>) -> Result<Self, QbfError> {
        check_prefix_vars(&prefix)?;
        if prefix.is_empty() {
            return Err(QbfError::EmptyPrefix);
        }
        if let Some(i) = (1..prefix.len()).find(|&i| prefix[i].0 == prefix[i - 1].0) {
            return Err(QbfError::NotAlternating(i));
        }
        if prefix[0].0 != Quantifier::Exists || prefix[prefix.len() - 1].0 != Quantifier::Exists {
            return Err(QbfError::Endpoints);
        }
        check_matrix_vars(&prefix, matrix.iter().flat_map(|c| c.0.iter()))?;
        Ok(Qbf { prefix, matrix })
    }

    pub fn prefix(&self) -> &[(Quantifier, String)] {
        &self.prefix
    }

    pub fn matrix(&self) -> &[Clause] {
        &self.matrix
    }

    /// Number of quantifier occurrences.
    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    /// Truth of the matrix under a total assignment of the prefix variables.
    pub fn matrix_holds(&self, assignment: &BTreeMap<&str, bool>) -> bool {
        self.matrix
            .iter()
            .all(|c| c.0.iter().any(|l| l.holds(assignment)))
    }
}

fn check_prefix_vars(prefix: &[(Quantifier, String)]) -> Result<(), QbfError> {
    let mut seen = BTreeSet::new();
    for (_, v) in prefix {
        if !is_var_name(v) {
            return Err(QbfError::BadVariable(v.clone()));
        }
        if !seen.insert(v.as_str()) {
            return Err(QbfError::DuplicateVariable(v.clone()));
        }
    }
    Ok(())
}

fn check_matrix_vars<'a>(
    prefix: &[(Quantifier, String)],
    mut literals: impl Iterator<Item = &'a Literal>,
) -> Result<(), QbfError> {
    match literals.find(|l| !prefix.iter().any(|(_, v)| *v == l.var)) {
        Some(l) => Err(QbfError::UnboundVariable(l.var.clone())),
        None => Ok(()),
    }
}

/// Textual form: `exists x forall y exists z : (-x | y | x) & (z | x | -z)`.
impl fmt::Display for Qbf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (q, v)) in self.prefix.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            let kw = match q {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            write!(f, "{kw} {v}")?;
        }
        f.write_str(" :")?;
        for (i, c) in self.matrix.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { " & " })?;
            write!(f, "({} | {} | {})", c.0[0], c.0[1], c.0[2])?;
        }
        Ok(())
    }
}

fn fresh_dummy(used: &mut BTreeSet<String>) -> String {
    let name = (0..)
        .map(|k| format!("u{k}"))
        .find(|n| !used.contains(n))
        .expect("unbounded supply");
    used.insert(name.clone());
    name
}

/// Brings a prenex CNF formula with clauses of width at most 3 into the
/// reduction's conventions without changing its truth value.
///
/// Dummy quantifiers over fresh, unused variables restore strict
/// alternation and the ∃ endpoints; short clauses are padded by repeating
/// their last literal.
pub fn normalize_qbf(
    prefix: Vec<(Quantifier, String)>,
    clauses: Vec<Vec<Literal>>,
) -> Result<Qbf, QbfError> {
    check_prefix_vars(&prefix)?;
    check_matrix_vars(&prefix, clauses.iter().flatten())?;
    let mut matrix = Vec::with_capacity(clauses.len());
    for (index, c) in clauses.into_iter().enumerate() {
        let width = c.len();
        let padded = match c.as_slice() {
            [a] => [a.clone(), a.clone(), a.clone()],
            [a, b] => [a.clone(), b.clone(), b.clone()],
            [a, b, d] => [a.clone(), b.clone(), d.clone()],
            _ => return Err(QbfError::ClauseWidth { index, width }),
        };
        matrix.push(Clause(padded));
    }
    let mut used: BTreeSet<String> = prefix.iter().map(|(_, v)| v.clone()).collect();
    let mut out: Vec<(Quantifier, String)> = Vec::with_capacity(prefix.len() + 2);
    for (q, v) in prefix {
        let expected = match out.last() {
            None => Quantifier::Exists,
            Some((Quantifier::Exists, _)) => Quantifier::Forall,
            Some((Quantifier::Forall, _)) => Quantifier::Exists,
        };
        if q != expected {
            out.push((expected, fresh_dummy(&mut used)));
        }
        out.push((q, v));
    }
    if out.last().map(|(q, _)| *q) != Some(Quantifier::Exists) {
        out.push((Quantifier::Exists, fresh_dummy(&mut used)));
    }
    Qbf::new(out, matrix)
}

/// Truth of `q`: whether Player E has a winning strategy in its formula
/// game.
pub fn eval_qbf(q: &Qbf) -> bool {
    fn go<'a>(q: &'a Qbf, i: usize, assignment: &mut BTreeMap<&'a str, bool>) -> bool {
        let Some((quant, var)) = q.prefix.get(i) else {
            return q.matrix_holds(assignment);
        };
        let mut branch = |b: bool| {
            assignment.insert(var.as_str(), b);
            go(q, i + 1, assignment)
        };
        match quant {
            Quantifier::Exists => branch(false) || branch(true),
            Quantifier::Forall => branch(false) && branch(true),
        }
    }
    go(q, 0, &mut BTreeMap::new())
}

/// Plays the formula game with `labels` as the successive moves (label i
/// instantiates the i-th quantified variable). Returns whether E wins.
pub fn play_path(q: &Qbf, labels: &[u8]) -> Result<bool, QbfError> {
    if labels.len() != q.prefix.len() {
        return Err(QbfError::PathLength {
            expected: q.prefix.len(),
            found: labels.len(),
        });
    }
    let assignment = q
        .prefix
        .iter()
        .zip(labels)
        .map(|((_, v), &b)| (v.as_str(), b != 0))
        .collect();
    Ok(q.matrix_holds(&assignment))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyNode {
    pub label: u8,
    pub children: Vec<StrategyNode>,
}

impl StrategyNode {
    pub fn leaf(label: u8) -> Self {
        StrategyNode {
            label,
            children: Vec::new(),
        }
    }
}

/// A labeled tree encoding Player E's responses: odd levels carry E's
/// moves, even levels A's two options labeled 0 then 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StrategyTree {
    pub root: StrategyNode,
}

impl StrategyTree {
    /// Nodes grouped by level, each level left to right. Level 1 is
    /// index 0.
    pub fn levels(&self) -> Vec<Vec<&StrategyNode>> {
        let mut levels = Vec::new();
        let mut current = alloc::vec![&self.root];
        while !current.is_empty() {
            let next = current.iter().flat_map(|n| n.children.iter()).collect();
            levels.push(current);
            current = next;
        }
        levels
    }

    /// Every root-to-leaf label sequence, left to right.
    pub fn paths(&self) -> Vec<Vec<u8>> {
        fn go(n: &StrategyNode, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            prefix.push(n.label);
            if n.children.is_empty() {
                out.push(prefix.clone());
            }
            for c in &n.children {
                go(c, prefix, out);
            }
            prefix.pop();
        }
        let mut out = Vec::new();
        go(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Labels of the odd (Player E) levels, level by level.
    pub fn odd_level_labels(&self) -> Vec<Vec<u8>> {
        self.levels()
            .into_iter()
            .step_by(2)
            .map(|lvl| lvl.into_iter().map(|n| n.label).collect())
            .collect()
    }
}

/// A winning strategy tree for `q`, or `None` when `q` is false. At every
/// E level the smallest winning bit is chosen.
pub fn winning_strategy_tree(q: &Qbf) -> Option<StrategyTree> {
    fn exists_level<'a>(
        q: &'a Qbf,
        i: usize,
        assignment: &mut BTreeMap<&'a str, bool>,
    ) -> Option<StrategyNode> {
        let var = q.prefix[i].1.as_str();
        for bit in [0u8, 1] {
            assignment.insert(var, bit == 1);
            if i + 1 == q.prefix.len() {
                if q.matrix_holds(assignment) {
                    return Some(StrategyNode::leaf(bit));
                }
                continue;
            }
            let forall_var = q.prefix[i + 1].1.as_str();
            let mut replies = Vec::with_capacity(2);
            for reply in [0u8, 1] {
                assignment.insert(forall_var, reply == 1);
                match exists_level(q, i + 2, assignment) {
                    Some(next) => replies.push(StrategyNode {
                        label: reply,
                        children: alloc::vec![next],
                    }),
                    None => break,
                }
            }
            if replies.len() == 2 {
                return Some(StrategyNode {
                    label: bit,
                    children: replies,
                });
            }
        }
        None
    }
    exists_level(q, 0, &mut BTreeMap::new()).map(|root| StrategyTree { root })
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyReport {
    pub diagnostics: Vec<String>,
}

impl StrategyReport {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.diagnostics.iter().any(|d| d.contains(needle))
    }
}

/// Checks the tree's shape and labels, then replays every root-to-leaf
/// path and requires E to win each.
pub fn check_strategy_tree(q: &Qbf, t: &StrategyTree) -> StrategyReport {
    let n = q.depth();
    let mut diagnostics = Vec::new();
    let levels = t.levels();
    if levels.len() != n {
        diagnostics.push(format!("tree has {} levels, expected {n}", levels.len()));
    }
    for (i, level) in levels.iter().enumerate() {
        let number = i + 1;
        let expected_children = match number {
            k if k >= n => 0,
            k if k % 2 == 1 => 2,
            _ => 1,
        };
        for (pos, node) in level.iter().enumerate() {
            if node.label > 1 {
                diagnostics.push(format!(
                    "label {} at level {number} position {pos} is not 0 or 1",
                    node.label
                ));
            }
            if number % 2 == 0 && usize::from(node.label) != pos % 2 {
                diagnostics.push(format!(
                    "alternation violated at level {number} position {pos}"
                ));
            }
            if node.children.len() != expected_children {
                diagnostics.push(format!(
                    "node at level {number} position {pos} has {} children, expected {expected_children}",
                    node.children.len()
                ));
            }
        }
    }
    if diagnostics.is_empty() {
        for path in t.paths() {
            match play_path(q, &path) {
                Ok(true) => {}
                Ok(false) => diagnostics.push(format!("losing path {path:?}")),
                Err(e) => diagnostics.push(e.to_string()),
            }
        }
    }
    StrategyReport { diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn paper_phi() -> Qbf {
        Qbf::new(
            vec![
                (Quantifier::Exists, "x".into()),
                (Quantifier::Forall, "y".into()),
                (Quantifier::Exists, "z".into()),
            ],
            vec![
                Clause([Literal::neg("x"), Literal::pos("y"), Literal::pos("x")]),
                Clause([Literal::pos("z"), Literal::pos("x"), Literal::neg("z")]),
            ],
        )
        .unwrap()
    }

    fn single(clauses: Vec<Clause>) -> Qbf {
        Qbf::new(vec![(Quantifier::Exists, "x".into())], clauses).unwrap()
    }

    fn all(l: Literal) -> Clause {
        Clause([l.clone(), l.clone(), l])
    }

    #[test]
    fn evaluation_examples() {
        assert!(eval_qbf(&single(vec![all(Literal::pos("x"))])));
        assert!(!eval_qbf(&single(vec![
            all(Literal::pos("x")),
            all(Literal::neg("x"))
        ])));
        let q = Qbf::new(
            vec![
                (Quantifier::Exists, "x".into()),
                (Quantifier::Forall, "y".into()),
                (Quantifier::Exists, "z".into()),
            ],
            vec![
                Clause([Literal::pos("x"), Literal::pos("y"), Literal::pos("z")]),
                Clause([Literal::neg("x"), Literal::neg("y"), Literal::neg("z")]),
            ],
        )
        .unwrap();
        assert!(eval_qbf(&q));
    }

    #[test]
    fn play_examples() {
        assert_eq!(play_path(&paper_phi(), &[1, 0, 1]), Ok(true));
        let q = single(vec![all(Literal::pos("x"))]);
        assert_eq!(play_path(&q, &[0]), Ok(false));
        assert_eq!(play_path(&q, &[1]), Ok(true));
        assert_eq!(
            play_path(&q, &[1, 1]),
            Err(QbfError::PathLength {
                expected: 1,
                found: 2
            })
        );
    }

    #[test]
    fn strategy_examples() {
        let t = winning_strategy_tree(&paper_phi()).unwrap();
        assert_eq!(t.levels().len(), 3);
        assert!(check_strategy_tree(&paper_phi(), &t).is_valid());

        let q = single(vec![all(Literal::pos("x"))]);
        assert_eq!(
            winning_strategy_tree(&q),
            Some(StrategyTree {
                root: StrategyNode::leaf(1)
            })
        );
        assert_eq!(
            winning_strategy_tree(&single(vec![all(Literal::pos("x")), all(Literal::neg("x"))])),
            None
        );
    }

    #[test]
    fn alternation_violation_is_reported() {
        let mut t = winning_strategy_tree(&paper_phi()).unwrap();
        t.root.children[1].label = 0;
        let report = check_strategy_tree(&paper_phi(), &t);
        assert!(report.mentions("alternation violated"));
    }

    #[test]
    fn losing_path_is_reported() {
        let q = single(vec![all(Literal::pos("x")), all(Literal::neg("x"))]);
        let t = StrategyTree {
            root: StrategyNode::leaf(1),
        };
        let report = check_strategy_tree(&q, &t);
        assert_eq!(report.diagnostics, vec![String::from("losing path [1]")]);
    }

    #[test]
    fn invariants_are_enforced() {
        let e = |v: &str| (Quantifier::Exists, String::from(v));
        let a = |v: &str| (Quantifier::Forall, String::from(v));
        assert_eq!(
            Qbf::new(vec![e("x"), e("y")], vec![]),
            Err(QbfError::NotAlternating(1))
        );
        assert_eq!(Qbf::new(vec![e("x"), a("y")], vec![]), Err(QbfError::Endpoints));
        assert_eq!(
            Qbf::new(vec![e("x"), a("x"), e("z")], vec![]),
            Err(QbfError::DuplicateVariable("x".into()))
        );
        assert_eq!(
            Qbf::new(vec![e("x")], vec![all(Literal::pos("y"))]),
            Err(QbfError::UnboundVariable("y".into()))
        );
        assert_eq!(
            Qbf::new(vec![e("p")], vec![]),
            Err(QbfError::BadVariable("p".into()))
        );
    }

    #[test]
    fn normalization_examples() {
        let e = |v: &str| (Quantifier::Exists, String::from(v));
        let a = |v: &str| (Quantifier::Forall, String::from(v));
        let q = normalize_qbf(vec![e("x"), e("y")], vec![vec![Literal::pos("x"), Literal::neg("y")]])
            .unwrap();
        assert_eq!(q.prefix(), &[e("x"), a("u0"), e("y")]);
        assert_eq!(
            q.matrix(),
            &[Clause([Literal::pos("x"), Literal::neg("y"), Literal::neg("y")])]
        );

        let q = normalize_qbf(vec![a("y")], vec![vec![Literal::pos("y")]]).unwrap();
        assert_eq!(q.prefix(), &[e("u0"), a("y"), e("u1")]);
        assert!(!eval_qbf(&q));

        assert_eq!(
            normalize_qbf(vec![e("x")], vec![vec![Literal::pos("x"); 4]]),
            Err(QbfError::ClauseWidth { index: 0, width: 4 })
        );
        assert_eq!(
            normalize_qbf(vec![e("x")], vec![vec![]]),
            Err(QbfError::ClauseWidth { index: 0, width: 0 })
        );
    }

    #[test]
    fn display_is_textual_format() {
        assert_eq!(
            paper_phi().to_string(),
            "exists x forall y exists z : (-x | y | x) & (z | x | -z)"
        );
    }
}
