//! Text formats and the `dmb` command-line front end.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 structurally
//! invalid input, 3 a requested mathematical check failed. Reports are still
//! printed when the exit code is 3.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::bott::{check_morse_bott_with, classify, collections, MorseBottCondition};
use crate::complex::{CellId, CellSpec, Complex, ComplexError, CoverSpec};
use crate::function::{CellFunction, FunctionError, Value};
use crate::gen::{random_morse, random_morse_bott, random_simplicial, GenConfig, GenError};
use crate::gradient::{grad_morse, grad_strict, synthesize_morse, GradientError, VectorField};
use crate::homology::{chain_complex_full, rank_profile};
use crate::inequalities::{
    morse_bott_identity, morse_identity, reduction_check, IdentityReport, InequalityError,
};
use crate::morse::{check_morse, m_counts, MorseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Function(#[from] FunctionError),
    #[error(transparent)]
    Gradient(#[from] GradientError),
    #[error(transparent)]
    Inequality(#[from] InequalityError),
    #[error(transparent)]
    Gen(#[from] GenError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Usage(_) => 1,
            CliError::Complex(_) | CliError::Function(_) => 2,
            CliError::Gradient(e) => match e {
                GradientError::Domain(_)
                | GradientError::UnknownCell(_)
                | GradientError::DuplicateTail(_)
                | GradientError::InvalidField(_) => 2,
                _ => 3,
            },
            CliError::Inequality(e) => match e {
                InequalityError::Domain(_) | InequalityError::NotASubcomplex(_) => 2,
                _ => 3,
            },
            CliError::Gen(GenError::InvalidConfig(_)) => 1,
            CliError::Gen(GenError::GenerationExhausted { .. }) => 3,
        }
    }
}

struct Record<'a> {
    line: usize,
    keyword: &'a str,
    args: Vec<&'a str>,
}

fn records<'a>(path: &str, text: &'a str, allowed: &[&str]) -> Result<Vec<Record<'a>>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut words = content.split_whitespace();
        let Some(keyword) = words.next() else {
            continue;
        };
        if !allowed.contains(&keyword) {
            return Err(CliError::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("unknown keyword `{keyword}`"),
            });
        }
        out.push(Record {
            line: i + 1,
            keyword,
            args: words.collect(),
        });
    }
    if out.is_empty() {
        return Err(CliError::Parse {
            path: path.into(),
            line: 0,
            msg: "no records".into(),
        });
    }
    Ok(out)
}

fn arity(path: &str, r: &Record, n: usize) -> Result<(), CliError> {
    if r.args.len() == n {
        Ok(())
    } else {
        Err(CliError::Parse {
            path: path.into(),
            line: r.line,
            msg: format!("`{}` takes {n} fields, found {}", r.keyword, r.args.len()),
        })
    }
}

fn field<T: std::str::FromStr>(
    path: &str,
    r: &Record,
    i: usize,
    what: &str,
) -> Result<T, CliError> {
    r.args[i].parse().map_err(|_| CliError::Parse {
        path: path.into(),
        line: r.line,
        msg: format!("invalid {what} `{}`", r.args[i]),
    })
}

/// Parses `cell`/`cover`/`irr` records, or `simplex` records, into a complex.
pub fn parse_complex(path: &str, text: &str) -> Result<Complex, CliError> {
    let recs = records(path, text, &["cell", "cover", "irr", "simplex"])?;
    let simplicial = recs.iter().any(|r| r.keyword == "simplex");
    if let Some(r) = recs.iter().find(|r| (r.keyword == "simplex") != simplicial) {
        return Err(CliError::Parse {
            path: path.into(),
            line: r.line,
            msg: "`simplex` records cannot be mixed with `cell`, `cover` or `irr`".into(),
        });
    }
    if simplicial {
        let mut facets = Vec::new();
        for r in &recs {
            if r.args.is_empty() {
                return Err(CliError::Parse {
                    path: path.into(),
                    line: r.line,
                    msg: "`simplex` needs vertices".into(),
                });
            }
            facets.push(r.args.clone());
        }
        return Ok(Complex::from_simplicial(&facets)?);
    }
    let (mut cells, mut covers, mut deep) = (Vec::new(), Vec::new(), Vec::new());
    for r in &recs {
        match r.keyword {
            "cell" => {
                arity(path, r, 2)?;
                cells.push(CellSpec::new(r.args[0], field(path, r, 1, "dimension")?));
            }
            "cover" => {
                arity(path, r, 4)?;
                let regular = match r.args[3] {
                    "reg" => true,
                    "irr" => false,
                    other => {
                        return Err(CliError::Parse {
                            path: path.into(),
                            line: r.line,
                            msg: format!("expected `reg` or `irr`, found `{other}`"),
                        })
                    }
                };
                covers.push(CoverSpec::new(
                    r.args[0],
                    r.args[1],
                    field(path, r, 2, "incidence")?,
                    regular,
                ));
            }
            _ => {
                arity(path, r, 2)?;
                deep.push((r.args[0].to_string(), r.args[1].to_string()));
            }
        }
    }
    Ok(Complex::build(&cells, &covers, &deep)?)
}

/// Parses `value <cell> <rational>` records.
pub fn parse_function(path: &str, text: &str, k: &Complex) -> Result<CellFunction, CliError> {
    let mut pairs: Vec<(&str, Value)> = Vec::new();
    for r in records(path, text, &["value"])? {
        arity(path, &r, 2)?;
        pairs.push((r.args[0], field(path, &r, 1, "rational")?));
    }
    Ok(CellFunction::from_named(k, &pairs)?)
}

/// Parses `arrow <σ> <τ>` records. An empty file is the empty field.
pub fn parse_field(path: &str, text: &str, k: &Complex) -> Result<VectorField, CliError> {
    if text
        .lines()
        .all(|l| l.split('#').next().unwrap_or("").trim().is_empty())
    {
        return Ok(VectorField::new());
    }
    let mut pairs = Vec::new();
    for r in records(path, text, &["arrow"])? {
        arity(path, &r, 2)?;
        pairs.push((r.args[0], r.args[1]));
    }
    Ok(VectorField::from_named(k, &pairs)?)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_complex(path: &Path) -> Result<Complex, CliError> {
    parse_complex(&path.display().to_string(), &read(path)?)
}

fn load_function(path: &Path, k: &Complex) -> Result<CellFunction, CliError> {
    parse_function(&path.display().to_string(), &read(path)?, k)
}

fn names(k: &Complex, ids: &[CellId]) -> Vec<String> {
    ids.iter().map(|&c| k.name(c).to_string()).collect()
}

fn braces(v: &[String]) -> String {
    format!("{{{}}}", v.join(", "))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationRow {
    pub cell: String,
    pub condition: String,
    pub witnesses: Vec<String>,
}

impl ViolationRow {
    fn render(&self) -> String {
        let count = match self.condition.as_str() {
            "M2" => "U",
            "M4" => "D",
            "MB2" => "U^C",
            "MB4" => "D^C",
            _ => "irregular",
        };
        format!(
            "{} at {}: {} = {} {}",
            self.condition,
            self.cell,
            count,
            self.witnesses.len(),
            braces(&self.witnesses)
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectionRow {
    pub value: String,
    pub cells: Vec<String>,
    pub reduced: Vec<String>,
    pub upward: Vec<String>,
    pub downward: Vec<String>,
    /// `P_t(C^red)`, present only for Morse–Bott functions.
    pub poincare: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityRow {
    pub lhs: String,
    pub p_k: String,
    pub residual: String,
    pub holds: bool,
    pub nonnegative: bool,
    pub euler_holds: bool,
    pub weak_holds: bool,
}

impl From<&IdentityReport> for IdentityRow {
    fn from(r: &IdentityReport) -> Self {
        Self {
            lhs: r.lhs.to_string(),
            p_k: r.p_k.to_string(),
            residual: r.residual.to_string(),
            holds: r.holds,
            nonnegative: r.nonnegative,
            euler_holds: r.euler_holds,
            weak_holds: r.weak_holds,
        }
    }
}

impl IdentityRow {
    fn ok(&self) -> bool {
        self.holds && self.nonnegative && self.euler_holds && self.weak_holds
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionRow {
    pub reduced_sum: String,
    pub critical: String,
    pub poincare_matches: bool,
    pub counts_match: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseSection {
    pub is_morse: bool,
    pub violations: Vec<ViolationRow>,
    pub critical: Vec<usize>,
    pub identity: Option<IdentityRow>,
    pub reduction: Option<ReductionRow>,
    pub gradient: Vec<(String, String)>,
    /// Morse agrees with Morse–Bott plus small collections.
    pub equivalence_holds: bool,
}

/// Everything `analyze` computes, in a stable order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub cells: Vec<usize>,
    pub is_morse_bott: bool,
    pub violations: Vec<ViolationRow>,
    pub collections: Vec<CollectionRow>,
    pub poincare: String,
    pub identity: Option<IdentityRow>,
    pub gradient: Vec<(String, String)>,
    pub morse: Option<MorseSection>,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    /// Every requested check passed.
    pub fn ok(&self) -> bool {
        self.is_morse_bott
            && self.identity.as_ref().is_some_and(IdentityRow::ok)
            && self.morse.as_ref().is_none_or(|m| {
                m.is_morse
                    && m.equivalence_holds
                    && m.identity.as_ref().is_some_and(IdentityRow::ok)
                    && m.reduction
                        .as_ref()
                        .is_some_and(|r| r.poincare_matches && r.counts_match)
            })
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cells: c = {:?}", self.cells);
        let _ = writeln!(s, "morse-bott: {}", yes(self.is_morse_bott));
        for v in &self.violations {
            let _ = writeln!(s, "  {}", v.render());
        }
        let _ = writeln!(s, "collections: {}", self.collections.len());
        for (i, c) in self.collections.iter().enumerate() {
            let _ = write!(
                s,
                "  [{i}] value {}: {} reduced {} up {} down {}",
                c.value,
                braces(&c.cells),
                braces(&c.reduced),
                braces(&c.upward),
                braces(&c.downward)
            );
            if let Some(p) = &c.poincare {
                let _ = write!(s, " P_t = {p}");
            }
            s.push('\n');
        }
        let _ = writeln!(s, "P_t(K) = {}", self.poincare);
        if let Some(id) = &self.identity {
            render_identity(&mut s, "morse-bott identity", "sum P_t(C^red)", "R(t)", id);
        }
        render_arrows(&mut s, "gradient (strict)", &self.gradient);
        if let Some(m) = &self.morse {
            let _ = writeln!(s, "morse: {}", yes(m.is_morse));
            for v in &m.violations {
                let _ = writeln!(s, "  {}", v.render());
            }
            let _ = writeln!(s, "critical: m = {:?}", m.critical);
            let _ = writeln!(
                s,
                "morse iff morse-bott with small collections: {}",
                yes(m.equivalence_holds)
            );
            if let Some(id) = &m.identity {
                render_identity(&mut s, "morse identity", "sum m_k t^k", "r(t)", id);
            }
            if let Some(r) = &m.reduction {
                let _ = writeln!(
                    s,
                    "reduction: sum P_t(C^red) = {}, sum m_k t^k = {}, equal: {}, d_k split: {}",
                    r.reduced_sum,
                    r.critical,
                    yes(r.poincare_matches),
                    yes(r.counts_match)
                );
            }
            render_arrows(&mut s, "gradient", &m.gradient);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }
}

fn render_identity(s: &mut String, title: &str, lhs: &str, residual: &str, id: &IdentityRow) {
    let _ = writeln!(s, "{title}: {}", if id.ok() { "HOLDS" } else { "FAILS" });
    let _ = writeln!(s, "  {lhs} = {}", id.lhs);
    let _ = writeln!(s, "  P_t(K) = {}", id.p_k);
    let _ = writeln!(s, "  {residual} = {}", id.residual);
    let _ = writeln!(
        s,
        "  exact: {}, nonnegative: {}, euler: {}, weak: {}",
        yes(id.holds),
        yes(id.nonnegative),
        yes(id.euler_holds),
        yes(id.weak_holds)
    );
}

fn render_arrows(s: &mut String, title: &str, arrows: &[(String, String)]) {
    let list: Vec<String> = arrows.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
    let _ = writeln!(
        s,
        "{title}: {}",
        if list.is_empty() {
            "none".to_string()
        } else {
            list.join(", ")
        }
    );
}

fn morse_rows(k: &Complex, f: &CellFunction) -> Result<Vec<ViolationRow>, CliError> {
    let verdict = check_morse(k, f).map_err(|e| match e {
        MorseError::Domain(d) => CliError::Function(d),
        MorseError::NotMorse => unreachable!("check_morse reports violations instead"),
    })?;
    Ok(verdict
        .violations
        .iter()
        .map(|v| ViolationRow {
            cell: k.name(v.cell).into(),
            condition: format!("{:?}", v.condition),
            witnesses: names(k, &v.witnesses),
        })
        .collect())
}

fn bott_rows(k: &Complex, f: &CellFunction) -> Result<Vec<ViolationRow>, CliError> {
    f.check_domain(k)?;
    let verdict = check_morse_bott_with(k, f, &collections(k, f));
    Ok(verdict
        .violations
        .iter()
        .map(|v| ViolationRow {
            cell: k.name(v.cell).into(),
            condition: match v.condition {
                MorseBottCondition::MB1 => "MB1",
                MorseBottCondition::MB2 => "MB2",
                MorseBottCondition::MB3 => "MB3",
                MorseBottCondition::MB4 => "MB4",
            }
            .into(),
            witnesses: names(k, &v.witnesses),
        })
        .collect())
}

fn arrows(k: &Complex, v: &VectorField) -> Vec<(String, String)> {
    v.named(k)
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Runs the Morse–Bott pipeline, and the Morse pipeline too when `morse` is set.
pub fn analyze(k: &Complex, f: &CellFunction, morse: bool) -> Result<AnalysisReport, CliError> {
    f.check_domain(k)?;
    let violations = bott_rows(k, f)?;
    let is_morse_bott = violations.is_empty();
    let mut warnings = Vec::new();
    let colls = collections(k, f);
    let (identity, poincares, gradient) = if is_morse_bott {
        let mb = morse_bott_identity(k, f)?;
        let ps: Vec<Option<String>> = mb
            .collections
            .iter()
            .map(|c| Some(c.poincare.to_string()))
            .collect();
        (
            Some(IdentityRow::from(&mb.identity)),
            ps,
            arrows(k, &grad_strict(k, f)?),
        )
    } else {
        warnings.push(
            "function is not discrete Morse-Bott; collection homology and the identity are skipped"
                .into(),
        );
        (None, vec![None; colls.len()], Vec::new())
    };
    let collections = colls
        .iter()
        .zip(poincares)
        .map(|(c, poincare)| {
            let rc = classify(k, f, c);
            CollectionRow {
                value: c.value.to_string(),
                cells: names(k, &c.cells),
                reduced: names(k, &rc.reduced),
                upward: names(k, &rc.removed_up),
                downward: names(k, &rc.removed_down),
                poincare,
            }
        })
        .collect();
    let morse = if morse {
        let violations = morse_rows(k, f)?;
        let is_morse = violations.is_empty();
        let small = colls
            .iter()
            .all(|c| c.len() == 1 || (c.len() == 2 && classify(k, f, c).is_unreduced()));
        let equivalence_holds = is_morse == (is_morse_bott && small);
        let (identity, reduction, gradient) = if is_morse {
            let r = reduction_check(k, f)?;
            (
                Some(IdentityRow::from(&morse_identity(k, f)?)),
                Some(ReductionRow {
                    reduced_sum: r.reduced_sum.to_string(),
                    critical: r.critical.to_string(),
                    poincare_matches: r.poincare_matches,
                    counts_match: r.counts_match,
                }),
                arrows(k, &grad_morse(k, f)?),
            )
        } else {
            warnings.push("function is not discrete Morse; the Morse identity is skipped".into());
            (None, None, Vec::new())
        };
        Some(MorseSection {
            is_morse,
            violations,
            critical: m_counts(k, f),
            identity,
            reduction,
            gradient,
            equivalence_holds,
        })
    } else {
        None
    };
    Ok(AnalysisReport {
        cells: k.cell_counts(),
        is_morse_bott,
        violations,
        collections,
        poincare: rank_profile(&chain_complex_full(k)).poincare().to_string(),
        identity,
        gradient,
        morse,
        warnings,
    })
}

#[derive(Parser, Debug)]
#[command(
    name = "dmb",
    version,
    about = "Discrete Morse and Morse-Bott analysis of finite CW complexes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a complex (and optionally a function on it) is well formed.
    Validate {
        complex: PathBuf,
        function: Option<PathBuf>,
    },
    /// Collections, reductions, homology and the Morse-Bott identity.
    Analyze {
        complex: PathBuf,
        function: PathBuf,
        /// Also run the Morse checks and the Morse identity.
        #[arg(long)]
        morse: bool,
        #[arg(long)]
        json: bool,
    },
    /// Check conditions M1-M4.
    MorseCheck {
        complex: PathBuf,
        function: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Check conditions MB1-MB4.
    MbCheck {
        complex: PathBuf,
        function: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// List collections with their upward, downward and reduced parts.
    Collections {
        complex: PathBuf,
        function: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Ranks, Betti numbers and torsion of the complex.
    Betti {
        complex: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Poincare polynomial of the complex.
    Poincare { complex: PathBuf },
    /// Print the gradient matching as `arrow` lines.
    Gradient {
        complex: PathBuf,
        function: PathBuf,
        /// Use the strict gradient of a Morse-Bott function.
        #[arg(long)]
        strict: bool,
    },
    /// Build a Morse function from an acyclic field of `arrow` lines.
    Synthesize { complex: PathBuf, arrows: PathBuf },
    /// Table of the polynomial identities.
    Inequality {
        complex: PathBuf,
        function: PathBuf,
        #[arg(long)]
        morse: bool,
        #[arg(long)]
        json: bool,
    },
    /// Write a seeded random complex and function.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum number of cells.
        #[arg(long, default_value_t = 30)]
        cells: usize,
        /// Maximum dimension.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        vertices: usize,
        /// Emit a Morse-Bott function instead of a Morse function.
        #[arg(long)]
        morse_bott: bool,
        /// With --morse-bott, insist on a function that is not Morse.
        #[arg(long, requires = "morse_bott")]
        non_morse: bool,
        /// Output path for the complex.
        #[arg(long = "complex")]
        complex_out: PathBuf,
        /// Output path for the function.
        #[arg(long = "function")]
        function_out: PathBuf,
    },
}

/// Output text and whether the requested check passed.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn pass(text: String) -> Self {
        Self { text, ok: true }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize") + "\n"
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn execute(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Validate { complex, function } => {
            let k = load_complex(&complex)?;
            let mut text = format!(
                "complex: valid, {} cells, c = {:?}\n",
                k.len(),
                k.cell_counts()
            );
            if let Some(p) = function {
                load_function(&p, &k)?;
                text.push_str("function: total\n");
            }
            Ok(Outcome::pass(text))
        }
        Command::Analyze {
            complex,
            function,
            morse,
            json: as_json,
        } => {
            let k = load_complex(&complex)?;
            let f = load_function(&function, &k)?;
            let r = analyze(&k, &f, morse)?;
            Ok(Outcome {
                text: if as_json { json(&r) } else { r.render() },
                ok: r.ok(),
            })
        }
        Command::MorseCheck {
            complex,
            function,
            json: as_json,
        } => {
            let k = load_complex(&complex)?;
            let f = load_function(&function, &k)?;
            let rows = morse_rows(&k, &f)?;
            let ok = rows.is_empty();
            let text = if as_json {
                json(
                    &serde_json::json!({ "is_morse": ok, "violations": rows, "critical": m_counts(&k, &f) }),
                )
            } else {
                let mut s = format!("morse: {}\n", yes(ok));
                for v in &rows {
                    let _ = writeln!(s, "  {}", v.render());
                }
                if ok {
                    let _ = writeln!(s, "critical: m = {:?}", m_counts(&k, &f));
                }
                s
            };
            Ok(Outcome { text, ok })
        }
        Command::MbCheck {
            complex,
            function,
            json: as_json,
        } => {
            let k = load_complex(&complex)?;
            let f = load_function(&function, &k)?;
            let rows = bott_rows(&k, &f)?;
            let ok = rows.is_empty();
            let text = if as_json {
                json(&serde_json::json!({ "is_morse_bott": ok, "violations": rows }))
            } else {
                let mut s = format!("morse-bott: {}\n", yes(ok));
                for v in &rows {
                    let _ = writeln!(s, "  {}", v.render());
                }
                s
            };
            Ok(Outcome { text, ok })
        }
        Command::Collections {
            complex,
            function,
            json: as_json,
        } => {
            let k = load_complex(&complex)?;
            let f = load_function(&function, &k)?;
            let r = analyze(&k, &f, false)?;
            let text = if as_json {
                json(&r.collections)
            } else {
                let mut s = String::new();
                for c in &r.collections {
                    let _ = write!(
                        s,
                        "value {}: {} reduced {} up {} down {}",
                        c.value,
                        braces(&c.cells),
                        braces(&c.reduced),
                        braces(&c.upward),
                        braces(&c.downward)
                    );
                    if let Some(p) = &c.poincare {
                        let _ = write!(s, " P_t = {p}");
                    }
                    s.push('\n');
                }
                s
            };
            Ok(Outcome::pass(text))
        }
        Command::Betti {
            complex,
            json: as_json,
        } => {
            let k = load_complex(&complex)?;
            let r = rank_profile(&chain_complex_full(&k));
            let text = if as_json {
                json(&serde_json::json!({ "ranks": r, "poincare": r.poincare().to_string() }))
            } else {
                let mut s = format!("c = {:?}\nb = {:?}\n", r.chains, r.betti);
                for (d, t) in r.torsion.iter().enumerate().filter(|(_, t)| !t.is_empty()) {
                    let _ = writeln!(s, "torsion H_{d}: {}", t.join(", "));
                }
                let _ = writeln!(s, "P_t = {}", r.poincare());
                s
            };
            Ok(Outcome::pass(text))
        }
        Command::Poincare { complex } => {
            let k = load_complex(&complex)?;
            Ok(Outcome::pass(format!(
                "P_t = {}\n",
                rank_profile(&chain_complex_full(&k)).poincare()
            )))
        }
        Command::Gradient {
            complex,
            function,
            strict,
        } => {
            let k = load_complex(&complex)?;
            let f = load_function(&function, &k)?;
            let v = if strict {
                grad_strict(&k, &f)?
            } else {
                grad_morse(&k, &f)?
            };
            Ok(Outcome::pass(v.to_text(&k)))
        }
        Command::Synthesize { complex, arrows } => {
            let k = load_complex(&complex)?;
            let v = parse_field(&arrows.display().to_string(), &read(&arrows)?, &k)?;
            Ok(Outcome::pass(synthesize_morse(&k, &v)?.to_text(&k)))
        }
        Command::Inequality {
            complex,
            function,
            morse,
            json: as_json,
        } => {
            let k = load_complex(&complex)?;
            let f = load_function(&function, &k)?;
            let r = analyze(&k, &f, morse)?;
            let mut rows: Vec<(&str, &IdentityRow)> = Vec::new();
            if let Some(id) = &r.identity {
                rows.push(("morse-bott", id));
            }
            if let Some(id) = r.morse.as_ref().and_then(|m| m.identity.as_ref()) {
                rows.push(("morse", id));
            }
            let text = if as_json {
                json(
                    &rows
                        .iter()
                        .map(|(n, id)| serde_json::json!({ "identity": n, "report": id }))
                        .collect::<Vec<_>>(),
                )
            } else {
                let mut s = format!(
                    "{:<12} {:<20} {:<20} {:<20} {:<6} {:<6} {:<6} {:<6}\n",
                    "identity", "lhs", "P_t(K)", "residual", "exact", "nonneg", "euler", "weak"
                );
                for (n, id) in &rows {
                    let _ = writeln!(
                        s,
                        "{:<12} {:<20} {:<20} {:<20} {:<6} {:<6} {:<6} {:<6}",
                        n,
                        id.lhs,
                        id.p_k,
                        id.residual,
                        yes(id.holds),
                        yes(id.nonnegative),
                        yes(id.euler_holds),
                        yes(id.weak_holds)
                    );
                }
                for w in &r.warnings {
                    let _ = writeln!(s, "warning: {w}");
                }
                s
            };
            Ok(Outcome { text, ok: r.ok() })
        }
        Command::Gen {
            seed,
            cells,
            dim,
            vertices,
            morse_bott,
            non_morse,
            complex_out,
            function_out,
        } => {
            let cfg = GenConfig {
                seed,
                max_cells: cells,
                max_dim: dim,
                max_vertices: vertices,
                require_non_morse: non_morse,
                ..GenConfig::default()
            };
            let k = random_simplicial(&cfg)?;
            let f = if morse_bott {
                random_morse_bott(&k, &cfg)?
            } else {
                random_morse(&k, &cfg)
            };
            write_file(&complex_out, &k.to_text())?;
            write_file(&function_out, &f.to_text(&k))?;
            Ok(Outcome::pass(format!(
                "wrote {} cells, c = {:?}\n",
                k.len(),
                k.cell_counts()
            )))
        }
    }
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(o) => {
            let _ = out.write_all(o.text.as_bytes());
            if o.ok {
                0
            } else {
                3
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
