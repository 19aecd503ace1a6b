//! Front ends for the `moore` and `subst` commands.
//!
//! Exit codes: 0 success (or equivalent/isomorphic), 1 not equivalent or not
//! isomorphic, 2 usage, I/O or parse error, 3 precondition violated.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use moore_core::dot::to_dot;
use moore_core::duality::dual;
use moore_core::substitution::{psi_by_enumeration, SubstFile, DEFAULT_SEARCH_BOUND};
use moore_core::{
    emit_machine, emit_subst, equivalent, isomorphic, letter_at, letter_at_constant, minimize,
    minimize_substitution, normal_form, parse_machine, parse_subst, phi, product, psi,
    to_padded_machine, Equivalence, Error, MooreMachine, OutputCombiner, Word,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIFFERENT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(e) if e.is_parse() => EXIT_USAGE,
            Failure::Core(_) => EXIT_DOMAIN,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => m.clone(),
            Failure::Core(e) if e.is_parse() => format!("parse error: {e}"),
            Failure::Core(e) => format!("error: {e}"),
        }
    }
}

/// Text for stdout plus the exit code to report.
struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, code: EXIT_OK }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Side {
    Right,
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Combine {
    Pair,
    First,
    Second,
}

#[derive(Debug, Parser)]
#[command(name = "moore", version, about = "Moore machine minimization by duality")]
struct MooreCli {
    /// Write the result to this file instead of standard output.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: MooreCommand,
}

#[derive(Debug, Subcommand)]
enum MooreCommand {
    /// Check a machine file.
    Validate { file: PathBuf },
    /// Output of the machine after reading a word.
    Run {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, value_enum, default_value = "right")]
        side: Side,
    },
    /// Canonical minimal machine (normal form of the bidual).
    Minimize { file: PathBuf },
    /// Dual machine, with each state's output vector as a comment.
    Dual { file: PathBuf },
    /// Trimmed machine with states renamed in breadth-first order.
    Normal { file: PathBuf },
    /// Decide equivalence; prints a shortest counterexample otherwise.
    Equiv { left: PathBuf, right: PathBuf },
    /// Find an isomorphism between two trimmed machines.
    Iso { left: PathBuf, right: PathBuf },
    /// Reachable product machine.
    Product {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, value_enum, default_value = "pair")]
        combine: Combine,
    },
    /// Graphviz rendering.
    Dot { file: PathBuf },
}

#[derive(Debug, Parser)]
#[command(name = "subst", version, about = "Substitution fixed points and their digit machines")]
struct SubstCli {
    /// Write the result to this file instead of standard output.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: SubstCommand,
}

#[derive(Debug, Subcommand)]
enum SubstCommand {
    /// Check a substitution file.
    Validate { file: PathBuf },
    /// First letters of the fixed point of the initial letter.
    Expand {
        file: PathBuf,
        #[arg(short = 'n')]
        n: usize,
        /// Print the projection instead of the letters.
        #[arg(long)]
        project: bool,
    },
    /// Letter `n` of `σ^k(i)`, computed from its digit word.
    Letter {
        file: PathBuf,
        #[arg(short = 'k')]
        k: usize,
        #[arg(short = 'n')]
        n: u128,
        /// Start letter (constant-length substitutions only; default: initial).
        #[arg(long)]
        from: Option<String>,
    },
    /// Numeric value of a digit word (least significant digit first).
    Phi {
        /// Take the base from this substitution.
        file: Option<PathBuf>,
        #[arg(long)]
        word: String,
        #[arg(short = 'q', long = "base")]
        base: Option<usize>,
    },
    /// The digit word of rank `n`.
    Psi {
        file: PathBuf,
        #[arg(short = 'n')]
        n: u128,
        /// Rank by scanning candidates instead of counting.
        #[arg(long)]
        scan: bool,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        bound: u128,
    },
    /// Merge letters that no digit word tells apart.
    Minimize { file: PathBuf },
    /// The padded digit machine as a `.moore` file.
    ToMachine { file: PathBuf },
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<MooreMachine, Failure> {
    let text = read(path)?;
    parse_machine(&text).map_err(|e| Failure::Usage(format!("{}: parse error: {e}", path.display())))
}

fn load_subst(path: &Path) -> Result<SubstFile, Failure> {
    let text = read(path)?;
    parse_subst(&text).map_err(|e| {
        if e.is_parse() {
            Failure::Usage(format!("{}: parse error: {e}", path.display()))
        } else {
            Failure::Usage(format!("{}: invalid substitution: {e}", path.display()))
        }
    })
}

fn parse_word(text: &str) -> Result<Word, Failure> {
    Word::parse(text).map_err(|e| Failure::Usage(format!("bad word `{text}`: {e}")))
}

fn moore_command(cmd: MooreCommand) -> Result<Outcome, Failure> {
    Ok(match cmd {
        MooreCommand::Validate { file } => {
            let m = load_machine(&file)?;
            Outcome::ok(format!(
                "ok: {} states, {} inputs, {} outputs, {} reachable\n",
                m.state_count(),
                m.input_count(),
                m.outputs().len(),
                m.bfs_order().len()
            ))
        }
        MooreCommand::Run { file, word, side } => {
            let m = load_machine(&file)?;
            let w = parse_word(&word)?;
            let out = match side {
                Side::Right => m.run_right(&w)?,
                Side::Left => m.run_left(&w)?,
            };
            Outcome::ok(format!("{out}\n"))
        }
        MooreCommand::Minimize { file } => Outcome::ok(emit_machine(&minimize(&load_machine(&file)?))),
        MooreCommand::Dual { file } => Outcome::ok(dual(&load_machine(&file)?).emit()),
        MooreCommand::Normal { file } => Outcome::ok(emit_machine(&normal_form(&load_machine(&file)?))),
        MooreCommand::Equiv { left, right } => {
            let (a, b) = (load_machine(&left)?, load_machine(&right)?);
            match equivalent(&a, &b)? {
                Equivalence::Equivalent => Outcome::ok("equivalent\n".into()),
                Equivalence::Distinguished(c) => Outcome {
                    text: format!(
                        "not equivalent\nword: {}\nleft: {}\nright: {}\n",
                        c.word.render(a.input_count()),
                        c.left_output,
                        c.right_output
                    ),
                    code: EXIT_DIFFERENT,
                },
            }
        }
        MooreCommand::Iso { left, right } => {
            let (a, b) = (load_machine(&left)?, load_machine(&right)?);
            match isomorphic(&a, &b) {
                Some(iso) => {
                    let mut text = String::from("isomorphic\n");
                    for (x, y) in iso.named(&a, &b) {
                        let _ = writeln!(text, "{x} -> {y}");
                    }
                    Outcome::ok(text)
                }
                None => Outcome {
                    text: "not isomorphic\n".into(),
                    code: EXIT_DIFFERENT,
                },
            }
        }
        MooreCommand::Product { left, right, combine } => {
            let gamma = match combine {
                Combine::Pair => OutputCombiner::Pair,
                Combine::First => OutputCombiner::First,
                Combine::Second => OutputCombiner::Second,
            };
            let p = product(&load_machine(&left)?, &load_machine(&right)?, &gamma)?;
            Outcome::ok(emit_machine(&p))
        }
        MooreCommand::Dot { file } => Outcome::ok(to_dot(&load_machine(&file)?)),
    })
}

fn subst_command(cmd: SubstCommand) -> Result<Outcome, Failure> {
    Ok(match cmd {
        SubstCommand::Validate { file } => {
            let f = load_subst(&file)?;
            let s = &f.substitution;
            Outcome::ok(format!(
                "ok: {} letters, {} outputs, q={}, {}\n",
                s.letters().len(),
                s.outputs().len(),
                s.q(),
                if s.is_constant_length() { "constant-length" } else { "non-constant-length" }
            ))
        }
        SubstCommand::Expand { file, n, project } => {
            let s = load_subst(&file)?.substitution;
            let prefix = s.expand_fixed_point(n)?;
            let text = if project { s.render_projection(&prefix) } else { s.render_letters(&prefix) };
            Outcome::ok(format!("{text}\n"))
        }
        SubstCommand::Letter { file, k, n, from } => {
            let f = load_subst(&file)?;
            let s = &f.substitution;
            let letter = match from {
                Some(name) => {
                    let a = s.letter_index(&name).ok_or(Error::UnknownLetter(name))?;
                    letter_at_constant(s, k, a, n)?
                }
                None if s.is_constant_length() => letter_at_constant(s, k, s.initial(), n)?,
                None => letter_at(s, &f.padding, k, n)?,
            };
            Outcome::ok(format!("{}\n", s.letter_name(letter)))
        }
        SubstCommand::Phi { file, word, base } => {
            let q = match (base, file) {
                (Some(q), _) => q,
                (None, Some(file)) => load_subst(&file)?.substitution.q(),
                (None, None) => return Err(Failure::Usage("phi needs a file or --base".into())),
            };
            Outcome::ok(format!("{}\n", phi(&parse_word(&word)?, q)?))
        }
        SubstCommand::Psi { file, n, scan, bound } => {
            let f = load_subst(&file)?;
            let pm = to_padded_machine(&f.substitution, &f.padding)?;
            let w = if scan { psi_by_enumeration(&pm, n, bound)? } else { psi(&pm, n)? };
            Outcome::ok(format!("{}\n", w.render(pm.machine.input_count())))
        }
        SubstCommand::Minimize { file } => {
            let f = load_subst(&file)?;
            let min = minimize_substitution(&f.substitution, &f.padding)?;
            Outcome::ok(format!(
                "# {}\n{}",
                min.note,
                emit_subst(&min.substitution, &min.padding)
            ))
        }
        SubstCommand::ToMachine { file } => {
            let f = load_subst(&file)?;
            Outcome::ok(emit_machine(&to_padded_machine(&f.substitution, &f.padding)?.machine))
        }
    })
}

fn finish(
    result: Result<Outcome, Failure>,
    output: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    match result {
        Ok(outcome) => {
            let written = match &output {
                Some(path) => fs::write(path, &outcome.text),
                None => out.write_all(outcome.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "cannot write output: {e}");
                return EXIT_USAGE;
            }
            outcome.code
        }
        Err(f) => {
            let _ = writeln!(err, "{}", f.message());
            f.code()
        }
    }
}

fn parse_args<P: Parser>(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> Result<P, i32> {
    P::try_parse_from(args).map_err(|e| {
        let text = e.render().to_string();
        if e.use_stderr() {
            let _ = write!(err, "{text}");
            EXIT_USAGE
        } else {
            let _ = write!(out, "{text}");
            EXIT_OK
        }
    })
}

/// Runs `moore` with `args` (program name first) and returns the exit code.
pub fn run_moore<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = args.into_iter().map(Into::into).collect();
    match parse_args::<MooreCli>(args, out, err) {
        Ok(cli) => finish(moore_command(cli.command), cli.output, out, err),
        Err(code) => code,
    }
}

/// Runs `subst` with `args` (program name first) and returns the exit code.
pub fn run_subst<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args = args.into_iter().map(Into::into).collect();
    match parse_args::<SubstCli>(args, out, err) {
        Ok(cli) => finish(subst_command(cli.command), cli.output, out, err),
        Err(code) => code,
    }
}
