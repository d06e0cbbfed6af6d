//! The `cl4` command line. Exit status 0 is an affirmative answer
//! (provable, true, valid, agree), 1 a negative one, 2 or more an error.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cl4_core::bridge::{canonicalize_proof, proof_to_strategy, strategy_to_proof};
use cl4_core::qbf::{check_strategy_tree, eval_qbf, play_path, winning_strategy_tree};
use cl4_core::reduction::{reduce_to_cl3, reduce_to_cl4};
use cl4_core::{
    check_proof, parse_formula, Formula, Prover, ProverConfig, Qbf, Quantifier, TermPool,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::{bench_run, verdict};
use crate::corpus::{exhaustive_exists_x, random_corpus, RandomSpec, DEFAULT_SEED};
use crate::formats::{
    guess_format, parse_qbf, parse_raw, read_proof, read_strategy, write_proof, write_qdimacs,
    write_strategy, QbfFormat,
};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cl4", version, about = "Provers and reductions for the choice fragment of CL4")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a formula and optionally write its proof.
    Prove(ProveArgs),
    /// Validate a proof document.
    Check {
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, value_enum, default_value = "cl4")]
        logic: LogicArg,
    },
    /// Print the formula image of a QBF.
    Reduce {
        #[command(flatten)]
        input: QbfInput,
        #[arg(long, value_enum, default_value = "cl4")]
        target: LogicArg,
    },
    /// Evaluate or normalize a QBF
    #[command(subcommand)]
    Qbf(QbfCommand),
    /// Extract, check or convert winning strategy trees
    #[command(subcommand)]
    Strategy(StrategyCommand),
    /// Compare truth, CL4 provability and CL3 provability of one QBF.
    Roundtrip {
        #[command(flatten)]
        input: QbfInput,
        #[arg(long, value_enum, default_value = "agree")]
        expect: Expect,
    },
    /// Run the three deciders over a corpus.
    Bench(BenchArgs),
    /// Play the formula game as the universal player against the engine.
    Play {
        #[command(flatten)]
        input: QbfInput,
        /// Universal moves, comma separated; read from standard input if absent.
        #[arg(long, value_delimiter = ',')]
        moves: Option<Vec<u8>>,
        /// Draw the universal moves at random.
        #[arg(long, conflicts_with = "moves")]
        random: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct ProveArgs {
    #[arg(long, value_enum, default_value = "cl4")]
    logic: LogicArg,
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    formula: Option<String>,
    /// File holding the formula text.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    proof_out: Option<PathBuf>,
    /// Fresh constants added to the ⊔x-Choose term pool.
    #[arg(long, default_value_t = 1)]
    fresh_terms: usize,
    /// Search without the isolated-pair pruning.
    #[arg(long)]
    no_prune: bool,
}

#[derive(Debug, Args)]
struct QbfInput {
    #[arg(long = "in")]
    input: PathBuf,
    /// Input format; guessed from the extension when absent.
    #[arg(long, value_enum)]
    format: Option<QbfFormat>,
}

#[derive(Debug, Subcommand)]
enum QbfCommand {
    /// Print TRUE or FALSE.
    Eval {
        #[command(flatten)]
        input: QbfInput,
    },
    /// Print the normalized QBF.
    Normalize {
        #[command(flatten)]
        input: QbfInput,
        #[arg(long, value_enum, default_value = "textual")]
        to: QbfFormat,
    },
}

#[derive(Debug, Subcommand)]
enum StrategyCommand {
    /// Winning strategy tree, from a proof if one is given.
    Extract {
        #[command(flatten)]
        input: QbfInput,
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Proof of the image from a winning strategy tree.
    ToProof {
        #[command(flatten)]
        input: QbfInput,
        #[arg(long)]
        strategy: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a strategy tree against a QBF.
    Check {
        #[command(flatten)]
        input: QbfInput,
        #[arg(long)]
        strategy: PathBuf,
    },
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "exhaustive")]
    corpus: CorpusKind,
    /// Clause bound for the exhaustive corpus.
    #[arg(long, default_value_t = 3)]
    max_clauses: usize,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 3)]
    quantifiers: usize,
    #[arg(long, default_value_t = 2)]
    min_random_clauses: usize,
    #[arg(long, default_value_t = 4)]
    max_random_clauses: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    json: bool,
    /// Evaluate instances concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LogicArg {
    Cl4,
    Cl3,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Expect {
    /// All three verdicts equal, either way.
    Agree,
    True,
    False,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CorpusKind {
    Exhaustive,
    Random,
}

type Outcome = Result<i32, String>;

fn read(path: &FsPath) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &FsPath, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_qbf(input: &QbfInput) -> Result<Qbf, String> {
    let text = read(&input.input)?;
    let format = input
        .format
        .unwrap_or_else(|| guess_format(&input.input.to_string_lossy()));
    parse_qbf(&text, format).map_err(|e| format!("{}: {e}", input.input.display()))
}

fn config(logic: LogicArg) -> ProverConfig {
    match logic {
        LogicArg::Cl4 => ProverConfig::default(),
        LogicArg::Cl3 => ProverConfig::cl3(),
    }
}

fn yes_no(b: bool) -> i32 {
    if b {
        EXIT_YES
    } else {
        EXIT_NO
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), String> {
    writeln!(out, "{text}").map_err(|e| e.to_string())
}

fn prove_cmd(a: &ProveArgs, out: &mut dyn Write) -> Outcome {
    let text = match (&a.formula, &a.input) {
        (Some(t), _) => t.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    let f = parse_formula(text.trim()).map_err(|e| e.to_string())?;
    let cfg = ProverConfig {
        term_pool: TermPool::OccurringPlusFresh(a.fresh_terms),
        prune: !a.no_prune,
        ..config(a.logic)
    };
    let mut prover = Prover::new(cfg);
    let proof = prover.prove(&f).map_err(|e| e.to_string())?;
    let stats = prover.stats();
    emit(
        out,
        &format!(
            "{} mu={} depth={}",
            verdict(proof.is_some(), "PROVABLE", "UNPROVABLE"),
            f.measure(),
            stats.max_depth
        ),
    )?;
    if let (Some(p), Some(path)) = (&proof, &a.proof_out) {
        write_file(path, &write_proof(p))?;
    }
    Ok(yes_no(proof.is_some()))
}

fn check_cmd(path: &FsPath, logic: LogicArg, out: &mut dyn Write) -> Outcome {
    let proof = read_proof(&read(path)?).map_err(|e| e.to_string())?;
    let report = check_proof(&proof, &config(logic));
    if report.is_valid() {
        emit(out, "VALID")?;
    } else {
        emit(out, "INVALID")?;
        for d in &report.diagnostics {
            emit(out, &d.to_string())?;
        }
    }
    Ok(yes_no(report.is_valid()))
}

fn decide(f: &Formula, cfg: ProverConfig) -> Result<bool, String> {
    Prover::new(cfg).is_provable(f).map_err(|e| e.to_string())
}

fn roundtrip_cmd(input: &QbfInput, expect: Expect, out: &mut dyn Write) -> Outcome {
    let q = load_qbf(input)?;
    let eval = eval_qbf(&q);
    let cl4 = decide(&reduce_to_cl4(&q), ProverConfig::default())?;
    let cl3 = decide(&reduce_to_cl3(&q), ProverConfig::cl3())?;
    let agree = eval == cl4 && eval == cl3;
    emit(
        out,
        &format!(
            "{} eval={} cl4={} cl3={}",
            verdict(agree, "AGREE", "DISAGREE"),
            verdict(eval, "TRUE", "FALSE"),
            verdict(cl4, "PROVABLE", "UNPROVABLE"),
            verdict(cl3, "PROVABLE", "UNPROVABLE"),
        ),
    )?;
    let ok = match expect {
        Expect::Agree => agree,
        Expect::True => agree && eval,
        Expect::False => agree && !eval,
    };
    Ok(yes_no(ok))
}

fn strategy_cmd(cmd: &StrategyCommand, out: &mut dyn Write) -> Outcome {
    match cmd {
        StrategyCommand::Extract {
            input,
            proof,
            out: target,
        } => {
            let q = load_qbf(input)?;
            let tree = match proof {
                Some(p) => {
                    let proof = read_proof(&read(p)?).map_err(|e| e.to_string())?;
                    let report = check_proof(&proof, &ProverConfig::default());
                    if let Some(d) = report.diagnostics.first() {
                        return Err(format!("proof does not check: {d}"));
                    }
                    let canonical = canonicalize_proof(&proof).map_err(|e| e.to_string())?;
                    Some(proof_to_strategy(&q, &canonical).map_err(|e| e.to_string())?)
                }
                None => winning_strategy_tree(&q),
            };
            let Some(tree) = tree else {
                emit(out, "NONE")?;
                return Ok(EXIT_NO);
            };
            let text = write_strategy(&tree);
            match target {
                Some(path) => write_file(path, &text)?,
                None => emit(out, &text)?,
            }
            Ok(EXIT_YES)
        }
        StrategyCommand::ToProof {
            input,
            strategy,
            out: target,
        } => {
            let q = load_qbf(input)?;
            let tree = read_strategy(&read(strategy)?).map_err(|e| e.to_string())?;
            let proof = strategy_to_proof(&q, &tree).map_err(|e| e.to_string())?;
            let text = write_proof(&proof);
            match target {
                Some(path) => write_file(path, &text)?,
                None => emit(out, &text)?,
            }
            Ok(EXIT_YES)
        }
        StrategyCommand::Check { input, strategy } => {
            let q = load_qbf(input)?;
            let tree = read_strategy(&read(strategy)?).map_err(|e| e.to_string())?;
            let report = check_strategy_tree(&q, &tree);
            emit(out, verdict(report.is_valid(), "VALID", "INVALID"))?;
            for d in &report.diagnostics {
                emit(out, d)?;
            }
            Ok(yes_no(report.is_valid()))
        }
    }
}

fn bench_cmd(a: &BenchArgs, out: &mut dyn Write) -> Outcome {
    let corpus = match a.corpus {
        CorpusKind::Exhaustive => exhaustive_exists_x(a.max_clauses),
        CorpusKind::Random => {
            if a.quantifiers.is_multiple_of(2) || a.quantifiers > 5 {
                return Err("--quantifiers must be 1, 3 or 5".into());
            }
            if a.min_random_clauses > a.max_random_clauses {
                return Err("--min-random-clauses exceeds --max-random-clauses".into());
            }
            random_corpus(&RandomSpec {
                quantifiers: a.quantifiers,
                min_clauses: a.min_random_clauses,
                max_clauses: a.max_random_clauses,
                count: a.count,
                seed: a.seed,
            })
        }
    };
    let report = bench_run(&corpus, &ProverConfig::default(), a.parallel);
    if a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
        emit(out, &text)?;
    } else {
        write!(out, "{}", report.to_text()).map_err(|e| e.to_string())?;
    }
    Ok(yes_no(report.all_ok()))
}

fn play_cmd(
    input: &QbfInput,
    moves: Option<&[u8]>,
    random: bool,
    seed: u64,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Outcome {
    let q = load_qbf(input)?;
    emit(out, &format!("game: {q}"))?;
    let Some(tree) = winning_strategy_tree(&q) else {
        emit(out, "E has no winning strategy; nothing to play")?;
        return Ok(EXIT_NO);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scripted = moves.map(|m| m.iter().copied());
    let mut node = &tree.root;
    let mut labels = Vec::new();
    for (kind, var) in q.prefix() {
        match kind {
            Quantifier::Exists => {
                labels.push(node.label);
                emit(out, &format!("E plays {var} = {}", node.label))?;
            }
            Quantifier::Forall => {
                let bit = if let Some(it) = scripted.as_mut() {
                    it.next().ok_or("not enough universal moves")?
                } else if random {
                    rng.random_range(0..2u8)
                } else {
                    emit(out, &format!("your move: {var} = ? (0 or 1)"))?;
                    out.flush().map_err(|e| e.to_string())?;
                    let mut line = String::new();
                    stdin.read_line(&mut line).map_err(|e| e.to_string())?;
                    match line.trim() {
                        "0" => 0,
                        "1" => 1,
                        "" => return Err("input ended".into()),
                        other => return Err(format!("expected 0 or 1, got `{other}`")),
                    }
                };
                if bit > 1 {
                    return Err(format!("move {bit} is not 0 or 1"));
                }
                labels.push(bit);
                emit(out, &format!("A plays {var} = {bit}"))?;
                // Even-level children are ordered 0 then 1.
                node = &node.children[usize::from(bit)].children[0];
            }
        }
    }
    let won = play_path(&q, &labels).map_err(|e| e.to_string())?;
    emit(out, verdict(won, "E wins", "A wins"))?;
    Ok(yes_no(won))
}

fn dispatch(cli: &Cli, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Prove(a) => prove_cmd(a, out),
        Command::Check { proof, logic } => check_cmd(proof, *logic, out),
        Command::Reduce { input, target } => {
            let q = load_qbf(input)?;
            let f = match target {
                LogicArg::Cl4 => reduce_to_cl4(&q),
                LogicArg::Cl3 => reduce_to_cl3(&q),
            };
            emit(out, &f.to_string())?;
            Ok(EXIT_YES)
        }
        Command::Qbf(QbfCommand::Eval { input }) => {
            let truth = eval_qbf(&load_qbf(input)?);
            emit(out, verdict(truth, "TRUE", "FALSE"))?;
            Ok(yes_no(truth))
        }
        Command::Qbf(QbfCommand::Normalize { input, to }) => {
            let text = read(&input.input)?;
            let format = input
                .format
                .unwrap_or_else(|| guess_format(&input.input.to_string_lossy()));
            let (prefix, clauses) = parse_raw(&text, format).map_err(|e| e.to_string())?;
            let q = cl4_core::qbf::normalize_qbf(prefix, clauses).map_err(|e| e.to_string())?;
            match to {
                QbfFormat::Textual => emit(out, &q.to_string())?,
                QbfFormat::Qdimacs => write!(out, "{}", write_qdimacs(&q)).map_err(|e| e.to_string())?,
            }
            Ok(EXIT_YES)
        }
        Command::Strategy(cmd) => strategy_cmd(cmd, out),
        Command::Roundtrip { input, expect } => roundtrip_cmd(input, *expect, out),
        Command::Bench(a) => bench_cmd(a, out),
        Command::Play {
            input,
            moves,
            random,
            seed,
        } => play_cmd(input, moves.as_deref(), *random, *seed, stdin, out),
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status. Errors go to `err`.
pub fn run(
    argv: &[String],
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_YES };
        }
    };
    match dispatch(&cli, stdin, out) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_ERROR
        }
    }
}
