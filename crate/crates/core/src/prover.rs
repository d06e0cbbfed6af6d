//! Backward proof search for the Wait / ⊔-Choose / ⊔x-Choose / Match
//! system, in both the general (`Cl4`) and the elementary-base (`Cl3`)
//! variants.
//!
//! Search is a depth-first AND-OR exploration. At every goal the rules are
//! tried in a fixed order (Wait when stable, then choose-disjunct,
//! choose-term, match; each left to right), so the first proof found is
//! fully determined by the goal and the configuration.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::elementary::is_stable;
use crate::formula::{Formula, FormulaError, Letter, OccurrenceKind, Path, Sort, Term};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Logic {
    #[default]
    Cl4,
    /// Elementary-base variant: no general letters, no Match rule.
    Cl3,
}

/// Which terms ⊔x-Choose may substitute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermPool {
    /// Constants and free variables of the goal.
    Occurring,
    /// Constants and free variables of the goal, plus this many of the
    /// smallest constants that do not occur in it.
    OccurringPlusFresh(usize),
}

impl Default for TermPool {
    fn default() -> Self {
        TermPool::OccurringPlusFresh(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProverConfig {
    pub logic: Logic,
    pub term_pool: TermPool,
    pub memoize: bool,
    /// Abort when the recursion gets deeper than this many goals.
    pub depth_limit: Option<usize>,
    /// Decide provability with a pruned search before building the proof.
    /// Pruning collapses every Match on a letter whose only two occurrences
    /// are one positive and one negative surface atom. The proof returned
    /// is the same one the unpruned search finds.
    pub prune: bool,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            logic: Logic::Cl4,
            term_pool: TermPool::default(),
            memoize: true,
            depth_limit: None,
            prune: true,
        }
    }
}

impl ProverConfig {
    pub fn cl3() -> Self {
        ProverConfig {
            logic: Logic::Cl3,
            ..Self::default()
        }
    }
}

/// One backward application of a non-Wait rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    /// Replace the ⊔-disjunction at `path` by its `index`-th disjunct.
    ChooseDisjunct { path: Path, index: usize },
    /// Replace `⊔x G(x)` at `path` by `G(term)`.
    ChooseTerm { path: Path, term: Term },
    /// Replace a positive and a negative surface occurrence of one general
    /// letter by the elementary letter `fresh`.
    MatchPair {
        pos_path: Path,
        neg_path: Path,
        fresh: Letter,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Wait,
    Move(Move),
}

/// A derivation: `conclusion` follows from the premises' conclusions by
/// `rule`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofNode {
    pub conclusion: Formula,
    pub rule: Rule,
    pub premises: Vec<ProofNode>,
}

impl ProofNode {
    pub fn leaf(conclusion: Formula) -> Self {
        ProofNode {
            conclusion,
            rule: Rule::Wait,
            premises: Vec::new(),
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(ProofNode::height).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofNode::size).sum::<usize>()
    }

    /// Pre-order traversal with the premise-index address of each node.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&[usize], &'a ProofNode)) {
        fn go<'a>(n: &'a ProofNode, at: &mut Vec<usize>, visit: &mut impl FnMut(&[usize], &'a ProofNode)) {
            visit(at, n);
            for (i, p) in n.premises.iter().enumerate() {
                at.push(i);
                go(p, at, visit);
                at.pop();
            }
        }
        go(self, &mut Vec::new(), visit);
    }

    pub fn node_at(&self, address: &[usize]) -> Option<&ProofNode> {
        address
            .iter()
            .try_fold(self, |n, &i| n.premises.get(i))
    }

    pub fn node_at_mut(&mut self, address: &[usize]) -> Option<&mut ProofNode> {
        let mut n = self;
        for &i in address {
            n = n.premises.get_mut(i)?;
        }
        Some(n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProveError {
    #[error("recursion depth limit {0} exceeded")]
    DepthLimit(usize),
    #[error("general letter {0} in an elementary-base goal")]
    GeneralLetterInCl3(String),
    #[error(transparent)]
    Malformed(#[from] FormulaError),
}

/// Smallest reserved variable `w0, w1, ...` not occurring in `f`.
pub fn fresh_variable(f: &Formula) -> String {
    let used = f.all_vars();
    (0..)
        .map(|k| format!("w{k}"))
        .find(|v| !used.contains(v.as_str()))
        .expect("unbounded supply")
}

/// The elementary letter Match introduces for `general`: its lowercased
/// name with the smallest `_k` suffix whose letter does not occur in `f`.
pub fn fresh_match_letter(f: &Formula, general: &Letter) -> Letter {
    let base = general.name.to_ascii_lowercase();
    let name = (0..)
        .map(|k| format!("{base}_{k}"))
        .find(|n| !f.mentions_letter_name(n))
        .expect("unbounded supply");
    Letter {
        sort: Sort::Elementary,
        name,
        arity: general.arity,
    }
}

/// The premises Wait requires: one per conjunct of every surface
/// ⊓-conjunction, and one per surface ⊓x (body with a fresh variable).
pub fn wait_premises(f: &Formula) -> Vec<Formula> {
    let mut occurrences = f.surface_occurrences(OccurrenceKind::ChoiceConjunction);
    occurrences.extend(f.surface_occurrences(OccurrenceKind::ChoiceUniversal));
    occurrences.sort_by(|a, b| a.0.cmp(&b.0));
    let mut fresh = None;
    let mut out = Vec::new();
    for (path, node) in occurrences {
        match node {
            Formula::ChoAnd(conjuncts) => {
                for c in conjuncts {
                    out.push(f.replace_at(&path, c.clone()).expect("occurrence path resolves"));
                }
            }
            Formula::ChoAll(x, body) => {
                let y = fresh.get_or_insert_with(|| fresh_variable(f));
                let renamed = body.replace_var_unchecked(x, &Term::Var(y.clone()));
                out.push(f.replace_at(&path, renamed).expect("occurrence path resolves"));
            }
            _ => unreachable!(),
        }
    }
    out
}

/// Terms ⊔x-Choose may use on `f` under `pool`, in search order: occurring
/// constants ascending, free variables by name, then fresh constants.
pub fn term_pool(f: &Formula, pool: TermPool) -> Vec<Term> {
    let constants = f.constants();
    let mut out: Vec<Term> = constants.iter().map(|&c| Term::Const(c)).collect();
    // Free variables never have bound occurrences in a well-formed formula.
    out.extend(f.free_vars().into_iter().map(|v| Term::Var(v.to_string())));
    if let TermPool::OccurringPlusFresh(n) = pool {
        out.extend(
            (0..)
                .filter(|c| !constants.contains(c))
                .take(n)
                .map(Term::Const),
        );
    }
    out
}

fn general_pairs(f: &Formula) -> Vec<(Path, Path, &Letter)> {
    let pos = f.surface_occurrences(OccurrenceKind::GeneralPositive);
    let neg = f.surface_occurrences(OccurrenceKind::GeneralNegative);
    let mut letters: Vec<&Letter> = Vec::new();
    let mut all = pos.clone();
    all.extend(neg.iter().cloned());
    all.sort_by(|a, b| a.0.cmp(&b.0));
    for (_, atom) in &all {
        if let Formula::Atom { letter, .. } = atom {
            if !letters.contains(&letter) {
                letters.push(letter);
            }
        }
    }
    let letter_of = |a: &Formula| match a {
        Formula::Atom { letter, .. } => letter.clone(),
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    for letter in letters {
        for (pp, _) in pos.iter().filter(|(_, a)| letter_of(a) == *letter) {
            for (np, _) in neg.iter().filter(|(_, a)| letter_of(a) == *letter) {
                out.push((pp.clone(), np.clone(), letter));
            }
        }
    }
    out
}

/// All non-Wait rule applications available on `f`, in search order.
pub fn enumerate_moves(f: &Formula, cfg: &ProverConfig) -> Vec<Move> {
    let mut moves = Vec::new();
    for (path, node) in f.surface_occurrences(OccurrenceKind::ChoiceDisjunction) {
        for index in 0..node.children().len() {
            moves.push(Move::ChooseDisjunct {
                path: path.clone(),
                index,
            });
        }
    }
    let existentials = f.surface_occurrences(OccurrenceKind::ChoiceExistential);
    if !existentials.is_empty() {
        let terms = term_pool(f, cfg.term_pool);
        for (path, _) in existentials {
            for term in &terms {
                moves.push(Move::ChooseTerm {
                    path: path.clone(),
                    term: term.clone(),
                });
            }
        }
    }
    if cfg.logic == Logic::Cl4 {
        for (pos_path, neg_path, letter) in general_pairs(f) {
            moves.push(Move::MatchPair {
                pos_path,
                neg_path,
                fresh: fresh_match_letter(f, letter),
            });
        }
    }
    moves
}

/// Applies a move produced by [`enumerate_moves`] (or otherwise known to
/// be applicable) to `f`.
pub fn apply_move(f: &Formula, m: &Move) -> Option<Formula> {
    match m {
        Move::ChooseDisjunct { path, index } => match f.at(path)? {
            Formula::ChoOr(ds) => f.replace_at(path, ds.get(*index)?.clone()),
            _ => None,
        },
        Move::ChooseTerm { path, term } => match f.at(path)? {
            Formula::ChoEx(x, body) => f.replace_at(path, body.replace_var_unchecked(x, term)),
            _ => None,
        },
        Move::MatchPair {
            pos_path,
            neg_path,
            fresh,
        } => {
            let swap = |g: &Formula, path: &Path| -> Option<Formula> {
                match g.at(path)? {
                    Formula::Atom { args, negated, .. } => g.replace_at(
                        path,
                        Formula::Atom {
                            letter: fresh.clone(),
                            args: args.clone(),
                            negated: *negated,
                        },
                    ),
                    _ => None,
                }
            };
            swap(&swap(f, pos_path)?, neg_path)
        }
    }
}

/// A general letter whose only occurrences in `f` are one positive and one
/// negative surface atom. Matching such a pair never loses provability.
fn isolated_pair(f: &Formula) -> Option<Move> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    f.visit_atoms(&mut |l, _, _| {
        if l.is_general() {
            *counts.entry(l.name.as_str()).or_default() += 1;
        }
    });
    general_pairs(f)
        .into_iter()
        .find(|(_, _, l)| counts.get(l.name.as_str()) == Some(&2))
        .map(|(pos_path, neg_path, letter)| Move::MatchPair {
            pos_path,
            neg_path,
            fresh: fresh_match_letter(f, letter),
        })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Deepest goal visited; the root goal is at depth 1.
    pub max_depth: usize,
    pub goals_visited: usize,
    pub memo_hits: usize,
}

/// Proof search with its memo table and counters. A `Prover` may be reused
/// across goals; the memo only ever caches facts about individual goals.
pub struct Prover {
    cfg: ProverConfig,
    failed: BTreeMap<String, ()>,
    decided: BTreeMap<String, bool>,
    stats: SearchStats,
    stability_trace: Option<BTreeSet<Formula>>,
}

impl Prover {
    pub fn new(cfg: ProverConfig) -> Self {
        Prover {
            cfg,
            failed: BTreeMap::new(),
            decided: BTreeMap::new(),
            stats: SearchStats::default(),
            stability_trace: None,
        }
    }

    /// From now on, remember every goal whose stability the search tests.
    pub fn record_stability_tests(&mut self) {
        self.stability_trace.get_or_insert_with(BTreeSet::new);
    }

    /// Distinct goals recorded since the last call.
    pub fn take_stability_trace(&mut self) -> BTreeSet<Formula> {
        self.stability_trace.as_mut().map(core::mem::take).unwrap_or_default()
    }

    fn stable(&mut self, f: &Formula) -> bool {
        if let Some(trace) = &mut self.stability_trace {
            if !trace.contains(f) {
                trace.insert(f.clone());
            }
        }
        is_stable(f)
    }

    pub fn config(&self) -> &ProverConfig {
        &self.cfg
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = SearchStats::default();
    }

    fn admit(&self, f: &Formula) -> Result<(), ProveError> {
        f.validate()?;
        if self.cfg.logic == Logic::Cl3 {
            if let Some(l) = f.letters().into_iter().find(|l| l.is_general()) {
                return Err(ProveError::GeneralLetterInCl3(l.name.clone()));
            }
        }
        Ok(())
    }

    /// Searches for a proof of `f`. `Ok(None)` means `f` is not derivable.
    pub fn prove(&mut self, f: &Formula) -> Result<Option<ProofNode>, ProveError> {
        self.admit(f)?;
        if self.cfg.prune {
            if self.provable(f, 1)? {
                self.build(f, 1).map(Some)
            } else {
                Ok(None)
            }
        } else {
            self.search(f, 1)
        }
    }

    /// Decides derivability of `f` without building a proof.
    pub fn is_provable(&mut self, f: &Formula) -> Result<bool, ProveError> {
        self.admit(f)?;
        if self.cfg.prune {
            self.provable(f, 1)
        } else {
            Ok(self.search(f, 1)?.is_some())
        }
    }

    fn enter(&mut self, depth: usize) -> Result<(), ProveError> {
        if let Some(limit) = self.cfg.depth_limit {
            if depth > limit {
                return Err(ProveError::DepthLimit(limit));
            }
        }
        self.stats.max_depth = self.stats.max_depth.max(depth);
        self.stats.goals_visited += 1;
        Ok(())
    }

    fn search(&mut self, f: &Formula, depth: usize) -> Result<Option<ProofNode>, ProveError> {
        self.enter(depth)?;
        let key = self.cfg.memoize.then(|| f.to_string());
        if let Some(k) = &key {
            if self.failed.contains_key(k) {
                self.stats.memo_hits += 1;
                return Ok(None);
            }
        }
        if self.stable(f) {
            let mut premises = Vec::new();
            for p in wait_premises(f) {
                match self.search(&p, depth + 1)? {
                    Some(node) => premises.push(node),
                    None => break,
                }
            }
            if premises.len() == wait_premises(f).len() {
                return Ok(Some(ProofNode {
                    conclusion: f.clone(),
                    rule: Rule::Wait,
                    premises,
                }));
            }
        }
        for m in enumerate_moves(f, &self.cfg) {
            let g = apply_move(f, &m).expect("enumerated moves apply");
            if let Some(node) = self.search(&g, depth + 1)? {
                return Ok(Some(ProofNode {
                    conclusion: f.clone(),
                    rule: Rule::Move(m),
                    premises: alloc::vec![node],
                }));
            }
        }
        if let Some(k) = key {
            self.failed.insert(k, ());
        }
        Ok(None)
    }

    /// Pruned decision procedure. Agrees with [`Self::search`] on every goal.
    fn provable(&mut self, f: &Formula, depth: usize) -> Result<bool, ProveError> {
        self.enter(depth)?;
        let key = self.cfg.memoize.then(|| f.to_string());
        if let Some(k) = &key {
            if let Some(&known) = self.decided.get(k) {
                self.stats.memo_hits += 1;
                return Ok(known);
            }
        }
        let verdict = match (self.cfg.logic, isolated_pair(f)) {
            (Logic::Cl4, Some(m)) => {
                let g = apply_move(f, &m).expect("isolated pair applies");
                self.provable(&g, depth + 1)?
            }
            _ => self.provable_by_rules(f, depth)?,
        };
        if let Some(k) = key {
            self.decided.insert(k, verdict);
        }
        Ok(verdict)
    }

    fn provable_by_rules(&mut self, f: &Formula, depth: usize) -> Result<bool, ProveError> {
        if self.stable(f) {
            let mut all = true;
            for p in wait_premises(f) {
                if !self.provable(&p, depth + 1)? {
                    all = false;
                    break;
                }
            }
            if all {
                return Ok(true);
            }
        }
        for m in enumerate_moves(f, &self.cfg) {
            let g = apply_move(f, &m).expect("enumerated moves apply");
            if self.provable(&g, depth + 1)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Builds the proof the unpruned search would return, using the pruned
    /// decision procedure to skip failing branches. `f` must be provable.
    fn build(&mut self, f: &Formula, depth: usize) -> Result<ProofNode, ProveError> {
        self.enter(depth)?;
        if self.stable(f) {
            let premises = wait_premises(f);
            let mut all = true;
            for p in &premises {
                if !self.provable(p, depth + 1)? {
                    all = false;
                    break;
                }
            }
            if all {
                let premises = premises
                    .iter()
                    .map(|p| self.build(p, depth + 1))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(ProofNode {
                    conclusion: f.clone(),
                    rule: Rule::Wait,
                    premises,
                });
            }
        }
        for m in enumerate_moves(f, &self.cfg) {
            let g = apply_move(f, &m).expect("enumerated moves apply");
            if self.provable(&g, depth + 1)? {
                let child = self.build(&g, depth + 1)?;
                return Ok(ProofNode {
                    conclusion: f.clone(),
                    rule: Rule::Move(m),
                    premises: alloc::vec![child],
                });
            }
        }
        unreachable!("build called on an underivable goal")
    }
}

/// One-shot proof search with a fresh [`Prover`].
pub fn prove(f: &Formula, cfg: ProverConfig) -> Result<Option<ProofNode>, ProveError> {
    Prover::new(cfg).prove(f)
}
