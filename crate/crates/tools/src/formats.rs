//! Text and JSON formats: QDIMACS, the textual QBF syntax, proof and
//! strategy documents.

use std::collections::BTreeMap;

use cl4_core::qbf::{normalize_qbf, Literal, QbfError};
use cl4_core::{
    parse_formula, Formula, Letter, Move, ParseError, Path, ProofNode, Qbf, Quantifier, Rule,
    StrategyNode, StrategyTree, Term,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Qdimacs { line: usize, message: String },
    #[error("position {position}: {message}")]
    Textual { position: usize, message: String },
    #[error(transparent)]
    Qbf(#[from] QbfError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("proof node {node}: {message}")]
    Proof { node: Path, message: String },
    #[error("proof node {node}: {source}")]
    ProofFormula { node: Path, source: ParseError },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum QbfFormat {
    Qdimacs,
    Textual,
}

/// Prefix and clauses as written, before any normalization.
pub type RawQbf = (Vec<(Quantifier, String)>, Vec<Vec<Literal>>);

/// Picks the format from the file extension: `.qdimacs`/`.cnf` are
/// QDIMACS, anything else is textual.
pub fn guess_format(name: &str) -> QbfFormat {
    if name.ends_with(".qdimacs") || name.ends_with(".cnf") {
        QbfFormat::Qdimacs
    } else {
        QbfFormat::Textual
    }
}

/// Reads a QBF. QDIMACS input goes through `normalize_qbf`; textual input
/// must already meet the conventions.
pub fn parse_qbf(text: &str, format: QbfFormat) -> Result<Qbf, FormatError> {
    match format {
        QbfFormat::Qdimacs => {
            let (prefix, clauses) = parse_qdimacs(text)?;
            Ok(normalize_qbf(prefix, clauses)?)
        }
        QbfFormat::Textual => {
            let (prefix, clauses) = parse_textual(text)?;
            let mut matrix = Vec::with_capacity(clauses.len());
            for (index, c) in clauses.into_iter().enumerate() {
                let width = c.len();
                let lits: [Literal; 3] = c
                    .try_into()
                    .map_err(|_| QbfError::ClauseWidth { index, width })?;
                matrix.push(cl4_core::qbf::Clause(lits));
            }
            Ok(Qbf::new(prefix, matrix)?)
        }
    }
}

pub fn parse_raw(text: &str, format: QbfFormat) -> Result<RawQbf, FormatError> {
    match format {
        QbfFormat::Qdimacs => parse_qdimacs(text),
        QbfFormat::Textual => parse_textual(text),
    }
}

/// QDIMACS subset: comments, `p cnf V C`, `e`/`a` lines, clause lines, all
/// zero-terminated. Variable `n` is named `xn`. Matrix variables missing
/// from the prefix are existential in an outermost block, as in QDIMACS.
pub fn parse_qdimacs(text: &str) -> Result<RawQbf, FormatError> {
    let err = |line: usize, message: String| FormatError::Qdimacs { line, message };
    let mut header: Option<(usize, usize)> = None;
    let mut prefix: Vec<(Quantifier, String)> = Vec::new();
    let mut clauses: Vec<Vec<Literal>> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let mut words = raw.split_whitespace();
        let Some(first) = words.next() else { continue };
        if first == "c" {
            continue;
        }
        if first == "p" {
            if header.is_some() {
                return Err(err(line, "second problem line".into()));
            }
            let fields: Vec<&str> = words.collect();
            let [ "cnf", v, c ] = fields.as_slice() else {
                return Err(err(line, "expected `p cnf <vars> <clauses>`".into()));
            };
            let parse = |s: &str| s.parse::<usize>().map_err(|_| err(line, format!("bad count `{s}`")));
            header = Some((parse(v)?, parse(c)?));
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err(line, "data before the problem line".into()));
        };
        let numbers = |words: &mut dyn Iterator<Item = &str>| -> Result<Vec<i64>, FormatError> {
            let mut out = Vec::new();
            for w in words {
                let n: i64 = w.parse().map_err(|_| err(line, format!("bad literal `{w}`")))?;
                if n == 0 {
                    return Ok(out);
                }
                if n.unsigned_abs() as usize > vars {
                    return Err(err(line, format!("variable {} exceeds the declared {vars}", n.abs())));
                }
                out.push(n);
            }
            Err(err(line, "missing terminating 0".into()))
        };
        match first {
            "e" | "a" => {
                if !clauses.is_empty() {
                    return Err(err(line, "quantifier line after clauses".into()));
                }
                let kind = if first == "e" { Quantifier::Exists } else { Quantifier::Forall };
                for n in numbers(&mut words)? {
                    if n < 0 {
                        return Err(err(line, format!("negative variable {n} in prefix")));
                    }
                    prefix.push((kind, format!("x{n}")));
                }
            }
            _ => {
                let mut all = std::iter::once(first).chain(words);
                let lits = numbers(&mut all)?;
                clauses.push(
                    lits.into_iter()
                        .map(|n| Literal {
                            var: format!("x{}", n.abs()),
                            positive: n > 0,
                        })
                        .collect(),
                );
            }
        }
    }
    let Some((_, count)) = header else {
        return Err(err(0, "missing problem line".into()));
    };
    if clauses.len() != count {
        return Err(err(0, format!("header declares {count} clauses, found {}", clauses.len())));
    }
    let mut free: Vec<(Quantifier, String)> = Vec::new();
    for l in clauses.iter().flatten() {
        let bound = prefix.iter().chain(&free).any(|(_, v)| *v == l.var);
        if !bound {
            free.push((Quantifier::Exists, l.var.clone()));
        }
    }
    free.extend(prefix);
    Ok((free, clauses))
}

/// Writes `q` as QDIMACS, numbering variables in prefix order.
pub fn write_qdimacs(q: &Qbf) -> String {
    let index: BTreeMap<&str, usize> = q
        .prefix()
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (v.as_str(), i + 1))
        .collect();
    let mut out = format!("p cnf {} {}\n", q.prefix().len(), q.matrix().len());
    for (kind, v) in q.prefix() {
        let tag = match kind {
            Quantifier::Exists => 'e',
            Quantifier::Forall => 'a',
        };
        out.push_str(&format!("{tag} {} 0\n", index[v.as_str()]));
    }
    for c in q.matrix() {
        for l in &c.0 {
            let n = index[l.var.as_str()] as i64;
            out.push_str(&format!("{} ", if l.positive { n } else { -n }));
        }
        out.push_str("0\n");
    }
    out
}

/// `exists x forall y exists z : (-x | y | x) & (z | x | -z)`; an empty
/// matrix is written as nothing after the colon.
pub fn parse_textual(text: &str) -> Result<RawQbf, FormatError> {
    let err = |position: usize, message: &str| FormatError::Textual {
        position,
        message: message.into(),
    };
    let mut tokens: Vec<(usize, &str)> = Vec::new();
    let mut rest = text.char_indices().peekable();
    while let Some(&(i, c)) = rest.peek() {
        if c.is_whitespace() {
            rest.next();
        } else if "():|&-".contains(c) {
            tokens.push((i, &text[i..i + 1]));
            rest.next();
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = rest.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    rest.next();
                } else {
                    break;
                }
            }
            tokens.push((i, &text[i..end]));
        } else {
            return Err(err(i, "unexpected character"));
        }
    }
    let end = text.len();
    let mut pos = 0;
    let mut prefix = Vec::new();
    loop {
        match tokens.get(pos) {
            Some(&(_, "exists")) | Some(&(_, "forall")) => {
                let kind = if tokens[pos].1 == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                let Some(&(at, var)) = tokens.get(pos + 1) else {
                    return Err(err(end, "expected a variable"));
                };
                if "():|&-".contains(var) {
                    return Err(err(at, "expected a variable"));
                }
                prefix.push((kind, var.to_string()));
                pos += 2;
            }
            Some(&(_, ":")) => {
                pos += 1;
                break;
            }
            Some(&(at, _)) => return Err(err(at, "expected `exists`, `forall` or `:`")),
            None => return Err(err(end, "expected `:`")),
        }
    }
    let mut clauses = Vec::new();
    while pos < tokens.len() {
        if !clauses.is_empty() {
            match tokens[pos] {
                (_, "&") => pos += 1,
                (at, _) => return Err(err(at, "expected `&`")),
            }
        }
        match tokens.get(pos) {
            Some(&(_, "(")) => pos += 1,
            Some(&(at, _)) => return Err(err(at, "expected `(`")),
            None => return Err(err(end, "expected `(`")),
        }
        let mut clause = Vec::new();
        loop {
            let positive = !matches!(tokens.get(pos), Some(&(_, "-")));
            if !positive {
                pos += 1;
            }
            match tokens.get(pos) {
                Some(&(at, v)) if "():|&-".contains(v) => return Err(err(at, "expected a variable")),
                Some(&(_, v)) => clause.push(Literal {
                    var: v.to_string(),
                    positive,
                }),
                None => return Err(err(end, "expected a variable")),
            }
            pos += 1;
            match tokens.get(pos) {
                Some(&(_, "|")) => pos += 1,
                Some(&(_, ")")) => {
                    pos += 1;
                    break;
                }
                Some(&(at, _)) => return Err(err(at, "expected `|` or `)`")),
                None => return Err(err(end, "expected `)`")),
            }
        }
        clauses.push(clause);
    }
    Ok((prefix, clauses))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
enum TermDoc {
    Const(u64),
    Var(String),
}

impl From<&Term> for TermDoc {
    fn from(t: &Term) -> Self {
        match t {
            Term::Const(c) => TermDoc::Const(*c),
            Term::Var(v) => TermDoc::Var(v.clone()),
        }
    }
}

/// One node of a proof document. Field order is the serialized key order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ProofDoc {
    formula: String,
    rule: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    term: Option<TermDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos_path: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neg_path: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fresh: Option<String>,
    premises: Vec<ProofDoc>,
}

fn proof_doc(node: &ProofNode) -> ProofDoc {
    let mut doc = ProofDoc {
        formula: node.conclusion.to_string(),
        rule: String::new(),
        path: None,
        index: None,
        term: None,
        pos_path: None,
        neg_path: None,
        fresh: None,
        premises: node.premises.iter().map(proof_doc).collect(),
    };
    match &node.rule {
        Rule::Wait => doc.rule = "wait".into(),
        Rule::Move(Move::ChooseDisjunct { path, index }) => {
            doc.rule = "choose-disjunct".into();
            doc.path = Some(path.0.clone());
            doc.index = Some(*index);
        }
        Rule::Move(Move::ChooseTerm { path, term }) => {
            doc.rule = "choose-term".into();
            doc.path = Some(path.0.clone());
            doc.term = Some(term.into());
        }
        Rule::Move(Move::MatchPair {
            pos_path,
            neg_path,
            fresh,
        }) => {
            doc.rule = "match".into();
            doc.pos_path = Some(pos_path.0.clone());
            doc.neg_path = Some(neg_path.0.clone());
            doc.fresh = Some(fresh.name.clone());
        }
    }
    doc
}

/// Pretty-printed proof document.
pub fn write_proof(root: &ProofNode) -> String {
    serde_json::to_string_pretty(&proof_doc(root)).expect("proof documents serialize")
}

fn proof_node(doc: ProofDoc, at: &mut Vec<usize>) -> Result<ProofNode, FormatError> {
    let here = Path(at.clone());
    let bad = |message: String| FormatError::Proof {
        node: here.clone(),
        message,
    };
    let conclusion = parse_formula(&doc.formula).map_err(|source| FormatError::ProofFormula {
        node: here.clone(),
        source,
    })?;
    let fields = [
        ("path", doc.path.is_some()),
        ("index", doc.index.is_some()),
        ("term", doc.term.is_some()),
        ("posPath", doc.pos_path.is_some()),
        ("negPath", doc.neg_path.is_some()),
        ("fresh", doc.fresh.is_some()),
    ];
    let expected: &[&str] = match doc.rule.as_str() {
        "wait" => &[],
        "choose-disjunct" => &["path", "index"],
        "choose-term" => &["path", "term"],
        "match" => &["posPath", "negPath", "fresh"],
        other => return Err(bad(format!("unknown rule `{other}`"))),
    };
    for (name, present) in fields {
        if present != expected.contains(&name) {
            let verb = if present { "unexpected" } else { "missing" };
            return Err(bad(format!("{verb} field `{name}` for rule `{}`", doc.rule)));
        }
    }
    let rule = match doc.rule.as_str() {
        "wait" => Rule::Wait,
        "choose-disjunct" => Rule::Move(Move::ChooseDisjunct {
            path: Path(doc.path.unwrap()),
            index: doc.index.unwrap(),
        }),
        "choose-term" => Rule::Move(Move::ChooseTerm {
            path: Path(doc.path.unwrap()),
            term: match doc.term.unwrap() {
                TermDoc::Const(c) => Term::Const(c),
                TermDoc::Var(v) if cl4_core::formula::is_var_name(&v) => Term::Var(v),
                TermDoc::Var(v) => return Err(bad(format!("`{v}` is not a term"))),
            },
        }),
        _ => {
            let pos_path = Path(doc.pos_path.unwrap());
            let name = doc.fresh.unwrap();
            if !cl4_core::formula::is_letter_name(&name) {
                return Err(bad(format!("`{name}` is not a letter name")));
            }
            // The fresh letter inherits the arity of the matched atom.
            let arity = match conclusion.at(&pos_path) {
                Some(Formula::Atom { args, .. }) => args.len(),
                _ => 0,
            };
            Rule::Move(Move::MatchPair {
                pos_path,
                neg_path: Path(doc.neg_path.unwrap()),
                fresh: Letter::new(name, arity),
            })
        }
    };
    let mut premises = Vec::with_capacity(doc.premises.len());
    for (i, p) in doc.premises.into_iter().enumerate() {
        at.push(i);
        premises.push(proof_node(p, at)?);
        at.pop();
    }
    Ok(ProofNode {
        conclusion,
        rule,
        premises,
    })
}

pub fn read_proof(text: &str) -> Result<ProofNode, FormatError> {
    proof_node(serde_json::from_str(text)?, &mut Vec::new())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyDoc {
    label: u8,
    children: Vec<StrategyDoc>,
}

fn strategy_doc(node: &StrategyNode) -> StrategyDoc {
    StrategyDoc {
        label: node.label,
        children: node.children.iter().map(strategy_doc).collect(),
    }
}

fn strategy_node(doc: StrategyDoc) -> StrategyNode {
    StrategyNode {
        label: doc.label,
        children: doc.children.into_iter().map(strategy_node).collect(),
    }
}

pub fn write_strategy(t: &StrategyTree) -> String {
    serde_json::to_string_pretty(&strategy_doc(&t.root)).expect("strategy documents serialize")
}

pub fn read_strategy(text: &str) -> Result<StrategyTree, FormatError> {
    Ok(StrategyTree {
        root: strategy_node(serde_json::from_str(text)?),
    })
}
