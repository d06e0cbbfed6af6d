//! The formula language: terms, letters, the AST, path addressing,
//! substitution and surface-occurrence enumeration.
//!
//! Parsing lives in [`crate::parse`]; the canonical rendering is the
//! [`core::fmt::Display`] implementation of [`Formula`].

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// A term: a variable or a natural-number constant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(u64),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) => write!(f, "{c}"),
        }
    }
}

/// Variables come from a reserved pool: one of `x y z u v w`, optionally
/// followed by decimal digits.
pub fn is_var_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some('x' | 'y' | 'z' | 'u' | 'v' | 'w') => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

pub(crate) const KEYWORDS: [&str; 4] = ["call", "cex", "cand", "cor"];

/// Letter names start with an ASCII letter and continue with ASCII
/// alphanumerics or `_`. Variable names and keywords are excluded.
pub fn is_letter_name(s: &str) -> bool {
    let mut chars = s.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic());
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_var_name(s)
        && !KEYWORDS.contains(&s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    /// Moveless games; lowercase initial.
    Elementary,
    /// Arbitrary games; uppercase initial.
    General,
}

impl Sort {
    pub fn of_name(name: &str) -> Self {
        if name.starts_with(|c: char| c.is_ascii_uppercase()) {
            Sort::General
        } else {
            Sort::Elementary
        }
    }
}

/// A non-logical letter. The sort is determined by the case of the name.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub sort: Sort,
    pub name: String,
    pub arity: usize,
}

impl Letter {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        let name = name.into();
        Letter {
            sort: Sort::of_name(&name),
            name,
            arity,
        }
    }

    pub fn is_general(&self) -> bool {
        self.sort == Sort::General
    }
}

/// A formula of the choice fragment. Negation is carried by atoms only.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Bot,
    Atom {
        letter: Letter,
        args: Vec<Term>,
        negated: bool,
    },
    /// Parallel conjunction.
    ParAnd(Vec<Formula>),
    /// Parallel disjunction.
    ParOr(Vec<Formula>),
    /// Choice conjunction.
    ChoAnd(Vec<Formula>),
    /// Choice disjunction.
    ChoOr(Vec<Formula>),
    /// Choice universal quantifier.
    ChoAll(String, Box<Formula>),
    /// Choice existential quantifier.
    ChoEx(String, Box<Formula>),
}

/// Child-index address of a subformula occurrence. A quantifier's body is
/// child 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<usize>);

impl Path {
    pub fn root() -> Self {
        Path(Vec::new())
    }

    pub fn child(&self, i: usize) -> Path {
        let mut v = self.0.clone();
        v.push(i);
        Path(v)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for Path {
    fn from(v: Vec<usize>) -> Self {
        Path(v)
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, ix) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{ix}")?;
        }
        f.write_str("]")
    }
}

/// Selects which surface occurrences [`Formula::surface_occurrences`] reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OccurrenceKind {
    ChoiceConjunction,
    ChoiceDisjunction,
    ChoiceUniversal,
    ChoiceExistential,
    GeneralPositive,
    GeneralNegative,
}

impl OccurrenceKind {
    fn matches(self, f: &Formula) -> bool {
        match (self, f) {
            (OccurrenceKind::ChoiceConjunction, Formula::ChoAnd(_)) => true,
            (OccurrenceKind::ChoiceDisjunction, Formula::ChoOr(_)) => true,
            (OccurrenceKind::ChoiceUniversal, Formula::ChoAll(..)) => true,
            (OccurrenceKind::ChoiceExistential, Formula::ChoEx(..)) => true,
            (OccurrenceKind::GeneralPositive, Formula::Atom { letter, negated, .. }) => {
                letter.is_general() && !negated
            }
            (OccurrenceKind::GeneralNegative, Formula::Atom { letter, negated, .. }) => {
                letter.is_general() && *negated
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("letter {name} used with arities {first} and {second}")]
    ArityMismatch {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("atom {name} has {found} arguments but the letter has arity {arity}")]
    ArgumentCount {
        name: String,
        arity: usize,
        found: usize,
    },
    #[error("variable {0} has both free and bound occurrences")]
    FreeAndBound(String),
    #[error("variable {0} is bound by more than one quantifier")]
    Rebound(String),
    #[error("`{0}` is not a valid variable name")]
    BadVariable(String),
    #[error("`{0}` is not a valid letter name")]
    BadLetter(String),
    #[error("connective with {0} operands; at least 2 are required")]
    ShortConnective(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("variable {0} has bound occurrences in the formula")]
    VariableBound(String),
    #[error("replacement variable {0} would be captured")]
    Capture(String),
}

impl Formula {
    pub fn atom(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom {
            letter: Letter::new(name, args.len()),
            args,
            negated: false,
        }
    }

    pub fn neg_atom(name: &str, args: Vec<Term>) -> Formula {
        Formula::Atom {
            letter: Letter::new(name, args.len()),
            args,
            negated: true,
        }
    }

    pub fn children(&self) -> &[Formula] {
        match self {
            Formula::ParAnd(v) | Formula::ParOr(v) | Formula::ChoAnd(v) | Formula::ChoOr(v) => v,
            Formula::ChoAll(_, b) | Formula::ChoEx(_, b) => core::slice::from_ref(&**b),
            _ => &[],
        }
    }

    fn children_mut(&mut self) -> &mut [Formula] {
        match self {
            Formula::ParAnd(v) | Formula::ParOr(v) | Formula::ChoAnd(v) | Formula::ChoOr(v) => v,
            Formula::ChoAll(_, b) | Formula::ChoEx(_, b) => core::slice::from_mut(&mut **b),
            _ => &mut [],
        }
    }

    /// True for the four choice operators.
    pub fn is_choice(&self) -> bool {
        matches!(
            self,
            Formula::ChoAnd(_) | Formula::ChoOr(_) | Formula::ChoAll(..) | Formula::ChoEx(..)
        )
    }

    pub fn is_choiceless(&self) -> bool {
        !self.is_choice() && self.children().iter().all(Formula::is_choiceless)
    }

    pub fn has_general_letters(&self) -> bool {
        match self {
            Formula::Atom { letter, .. } => letter.is_general(),
            _ => self.children().iter().any(Formula::has_general_letters),
        }
    }

    pub fn has_elementary_letters(&self) -> bool {
        match self {
            Formula::Atom { letter, .. } => !letter.is_general(),
            _ => self.children().iter().any(Formula::has_elementary_letters),
        }
    }

    /// Choiceless and free of general letters.
    pub fn is_elementary(&self) -> bool {
        self.is_choiceless() && !self.has_general_letters()
    }

    pub fn at(&self, path: &Path) -> Option<&Formula> {
        path.0
            .iter()
            .try_fold(self, |node, &i| node.children().get(i))
    }

    /// Returns a copy with the occurrence at `path` replaced by `new`.
    pub fn replace_at(&self, path: &Path, new: Formula) -> Option<Formula> {
        let mut out = self.clone();
        let mut slot = &mut out;
        for &i in &path.0 {
            slot = slot.children_mut().get_mut(i)?;
        }
        *slot = new;
        Some(out)
    }

    /// True when no node strictly above `path` is a choice operator.
    pub fn is_surface_path(&self, path: &Path) -> bool {
        let mut node = self;
        for &i in &path.0 {
            if node.is_choice() {
                return false;
            }
            match node.children().get(i) {
                Some(c) => node = c,
                None => return false,
            }
        }
        true
    }

    /// Every surface occurrence of the given kind, in left-to-right order.
    pub fn surface_occurrences(&self, kind: OccurrenceKind) -> Vec<(Path, &Formula)> {
        fn walk<'a>(
            f: &'a Formula,
            path: &mut Vec<usize>,
            kind: OccurrenceKind,
            out: &mut Vec<(Path, &'a Formula)>,
        ) {
            if kind.matches(f) {
                out.push((Path(path.clone()), f));
            }
            if f.is_choice() {
                return;
            }
            for (i, c) in f.children().iter().enumerate() {
                path.push(i);
                walk(c, path, kind, out);
                path.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), kind, &mut out);
        out
    }

    /// The complexity measure: choice operator occurrences plus general
    /// atom occurrences. Every inference strictly decreases it.
    pub fn measure(&self) -> usize {
        let own = match self {
            Formula::Atom { letter, .. } => usize::from(letter.is_general()),
            f if f.is_choice() => 1,
            _ => 0,
        };
        own + self.children().iter().map(Formula::measure).sum::<usize>()
    }

    pub fn visit_atoms<'a>(&'a self, visit: &mut impl FnMut(&'a Letter, &'a [Term], bool)) {
        match self {
            Formula::Atom {
                letter,
                args,
                negated,
            } => visit(letter, args, *negated),
            _ => self.children().iter().for_each(|c| c.visit_atoms(visit)),
        }
    }

    pub fn letters(&self) -> BTreeSet<&Letter> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |l, _, _| {
            out.insert(l);
        });
        out
    }

    pub fn mentions_letter_name(&self, name: &str) -> bool {
        let mut found = false;
        self.visit_atoms(&mut |l, _, _| found |= l.name == name);
        found
    }

    pub fn constants(&self) -> BTreeSet<u64> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |_, args, _| {
            out.extend(args.iter().filter_map(|t| match t {
                Term::Const(c) => Some(*c),
                Term::Var(_) => None,
            }));
        });
        out
    }

    /// Variables bound by some quantifier occurrence.
    pub fn bound_vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.for_each_binder(&mut |v| {
            out.insert(v);
        });
        out
    }

    fn for_each_binder<'a>(&'a self, visit: &mut impl FnMut(&'a str)) {
        if let Formula::ChoAll(v, _) | Formula::ChoEx(v, _) = self {
            visit(v);
        }
        self.children().iter().for_each(|c| c.for_each_binder(visit));
    }

    pub fn free_vars(&self) -> BTreeSet<&str> {
        fn walk<'a>(f: &'a Formula, bound: &mut Vec<&'a str>, out: &mut BTreeSet<&'a str>) {
            match f {
                Formula::Atom { args, .. } => {
                    for t in args {
                        if let Term::Var(v) = t {
                            if !bound.contains(&v.as_str()) {
                                out.insert(v.as_str());
                            }
                        }
                    }
                }
                Formula::ChoAll(v, body) | Formula::ChoEx(v, body) => {
                    bound.push(v);
                    walk(body, bound, out);
                    bound.pop();
                }
                _ => f.children().iter().for_each(|c| walk(c, bound, out)),
            }
        }
        let mut out = BTreeSet::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Every variable name occurring anywhere, bound or free, including
    /// quantifier binders.
    pub fn all_vars(&self) -> BTreeSet<&str> {
        let mut out = self.bound_vars();
        self.visit_atoms(&mut |_, args, _| {
            out.extend(args.iter().filter_map(Term::as_var));
        });
        out
    }

    /// Checks every well-formedness invariant of the AST.
    pub fn validate(&self) -> Result<(), FormulaError> {
        let mut arities: BTreeMap<(Sort, &str), usize> = BTreeMap::new();
        let mut err = None;
        self.visit_atoms(&mut |letter, args, _| {
            if err.is_some() {
                return;
            }
            if !is_letter_name(&letter.name) || letter.sort != Sort::of_name(&letter.name) {
                err = Some(FormulaError::BadLetter(letter.name.clone()));
                return;
            }
            if letter.arity != args.len() {
                err = Some(FormulaError::ArgumentCount {
                    name: letter.name.clone(),
                    arity: letter.arity,
                    found: args.len(),
                });
                return;
            }
            if let Some(bad) = args.iter().filter_map(Term::as_var).find(|v| !is_var_name(v)) {
                err = Some(FormulaError::BadVariable(bad.to_string()));
                return;
            }
            let prev = *arities
                .entry((letter.sort, letter.name.as_str()))
                .or_insert(letter.arity);
            if prev != letter.arity {
                err = Some(FormulaError::ArityMismatch {
                    name: letter.name.clone(),
                    first: prev,
                    second: letter.arity,
                });
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        self.check_shape()?;
        let mut binders = BTreeSet::new();
        let mut rebound = None;
        self.for_each_binder(&mut |v| {
            if !binders.insert(v) && rebound.is_none() {
                rebound = Some(v);
            }
        });
        if let Some(v) = rebound {
            return Err(FormulaError::Rebound(v.to_string()));
        }
        if let Some(v) = binders.iter().find(|v| !is_var_name(v)) {
            return Err(FormulaError::BadVariable(v.to_string()));
        }
        if let Some(v) = self.free_vars().intersection(&binders).next() {
            return Err(FormulaError::FreeAndBound(v.to_string()));
        }
        Ok(())
    }

    fn check_shape(&self) -> Result<(), FormulaError> {
        match self {
            Formula::ParAnd(v) | Formula::ParOr(v) | Formula::ChoAnd(v) | Formula::ChoOr(v)
                if v.len() < 2 =>
            {
                Err(FormulaError::ShortConnective(v.len()))
            }
            _ => self.children().iter().try_for_each(Formula::check_shape),
        }
    }

    /// Replaces every occurrence of `var` in atom arguments by `term`,
    /// without checking binding structure. Callers guarantee `var` is not
    /// re-bound below.
    pub(crate) fn replace_var_unchecked(&self, var: &str, term: &Term) -> Formula {
        match self {
            Formula::Atom {
                letter,
                args,
                negated,
            } => Formula::Atom {
                letter: letter.clone(),
                args: args
                    .iter()
                    .map(|a| match a {
                        Term::Var(v) if v == var => term.clone(),
                        other => other.clone(),
                    })
                    .collect(),
                negated: *negated,
            },
            Formula::ParAnd(v) => Formula::ParAnd(v.iter().map(|c| c.replace_var_unchecked(var, term)).collect()),
            Formula::ParOr(v) => Formula::ParOr(v.iter().map(|c| c.replace_var_unchecked(var, term)).collect()),
            Formula::ChoAnd(v) => Formula::ChoAnd(v.iter().map(|c| c.replace_var_unchecked(var, term)).collect()),
            Formula::ChoOr(v) => Formula::ChoOr(v.iter().map(|c| c.replace_var_unchecked(var, term)).collect()),
            Formula::ChoAll(x, b) => Formula::ChoAll(x.clone(), Box::new(b.replace_var_unchecked(var, term))),
            Formula::ChoEx(x, b) => Formula::ChoEx(x.clone(), Box::new(b.replace_var_unchecked(var, term))),
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
        }
    }

    /// Replaces every free occurrence of `var` by `term`.
    ///
    /// `var` must have no bound occurrences, and a variable `term` must not
    /// be bound anywhere in the formula; with these conditions no capture
    /// can happen.
    pub fn substitute_var(&self, var: &str, term: &Term) -> Result<Formula, SubstError> {
        let bound = self.bound_vars();
        if bound.contains(var) {
            return Err(SubstError::VariableBound(var.to_string()));
        }
        if let Term::Var(t) = term {
            if bound.contains(t.as_str()) {
                return Err(SubstError::Capture(t.clone()));
            }
        }
        Ok(self.replace_var_unchecked(var, term))
    }

    /// Maps every atom through `f`, keeping the connective skeleton.
    pub fn map_atoms(&self, f: &mut impl FnMut(&Letter, &[Term], bool) -> Formula) -> Formula {
        match self {
            Formula::Atom {
                letter,
                args,
                negated,
            } => f(letter, args, *negated),
            Formula::ParAnd(v) => Formula::ParAnd(v.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::ParOr(v) => Formula::ParOr(v.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::ChoAnd(v) => Formula::ChoAnd(v.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::ChoOr(v) => Formula::ChoOr(v.iter().map(|c| c.map_atoms(f)).collect()),
            Formula::ChoAll(x, b) => Formula::ChoAll(x.clone(), Box::new(b.map_atoms(f))),
            Formula::ChoEx(x, b) => Formula::ChoEx(x.clone(), Box::new(b.map_atoms(f))),
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
        }
    }

    /// Same node kinds in the same positions, ignoring atom contents and
    /// binder names.
    pub fn same_skeleton(&self, other: &Formula) -> bool {
        use Formula::*;
        let kinds_match = matches!(
            (self, other),
            (Top, Top)
                | (Bot, Bot)
                | (Atom { .. }, Atom { .. })
                | (ParAnd(_), ParAnd(_))
                | (ParOr(_), ParOr(_))
                | (ChoAnd(_), ChoAnd(_))
                | (ChoOr(_), ChoOr(_))
                | (ChoAll(..), ChoAll(..))
                | (ChoEx(..), ChoEx(..))
        );
        kinds_match
            && self.children().len() == other.children().len()
            && self
                .children()
                .iter()
                .zip(other.children())
                .all(|(a, b)| a.same_skeleton(b))
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, op: &Formula) -> fmt::Result {
    match op {
        Formula::Top | Formula::Bot | Formula::Atom { .. } => write!(f, "{op}"),
        _ => write!(f, "({op})"),
    }
}

fn write_nary(f: &mut fmt::Formatter<'_>, ops: &[Formula], sep: &str) -> fmt::Result {
    for (i, op) in ops.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write_operand(f, op)?;
    }
    Ok(())
}

/// Canonical ASCII rendering. Compound operands are always parenthesized,
/// so the output re-parses to the identical tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("T"),
            Formula::Bot => f.write_str("F"),
            Formula::Atom {
                letter,
                args,
                negated,
            } => {
                if *negated {
                    f.write_str("~")?;
                }
                f.write_str(&letter.name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, t) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{t}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::ParAnd(v) => write_nary(f, v, " /\\ "),
            Formula::ParOr(v) => write_nary(f, v, " \\/ "),
            Formula::ChoAnd(v) => write_nary(f, v, " cand "),
            Formula::ChoOr(v) => write_nary(f, v, " cor "),
            Formula::ChoAll(x, b) => write!(f, "call {x}: {b}"),
            Formula::ChoEx(x, b) => write!(f, "cex {x}: {b}"),
        }
    }
}
