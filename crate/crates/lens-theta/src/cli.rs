//! Command-line front end.

use clap::{Parser, Subcommand, ValueEnum};
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;

use crate::algebra::{
    build_split_constants, classify_splitting, coeff_e, coeff_e_prime, example_double_constants, validate_algebra, AlgebraFile,
    SplitConstants, SplittingClass, Validation,
};
use crate::gluing::{
    evaluate_catalogue, pipeline_trace, two_loop_weight_mt, two_loop_weight_nmt, GluingError, LensSpace, Variant,
};
use crate::numtheory::{dedekind_sum_direct, fmt_q};
use crate::oracle::verify_suite;
use crate::Q;

pub const EXIT_LENS: i32 = 2;
pub const EXIT_FILE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "lens-theta", version, about = "Two-loop Chern-Simons weights on lens spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Theorem,
    Seff,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Theorem => Variant::Theorem,
            VariantArg::Seff => Variant::SeffEq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Plain,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Two-loop weight of one lens space.
    Weight {
        #[arg(long)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "theorem")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "plain")]
        format: Format,
        /// Report the weight with e (and e′) factored out.
        #[arg(long)]
        unit_e: bool,
    },
    /// Weights for every coprime `0 ≤ q < p ≤ pmax`.
    Table {
        #[arg(long)]
        pmax: i64,
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "theorem")]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        unit_e: bool,
    },
    /// Validate an algebra file and report its splitting class.
    AlgebraCheck { file: PathBuf },
    /// Run the oracle cross-checks.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
    },
    /// Trace the end-to-end diagram pipeline.
    Pipeline {
        #[arg(long)]
        p: i64,
        #[arg(long, allow_hyphen_values = true)]
        q: i64,
        #[arg(long, allow_hyphen_values = true)]
        m: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        dump_kernels: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Lens(String),
    File(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Lens(_) => EXIT_LENS,
            Failure::File(_) => EXIT_FILE,
            Failure::Verify(_) => EXIT_VERIFY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Lens(s) | Failure::File(s) | Failure::Verify(s) => s,
        }
    }
}

fn lens_err(e: GluingError) -> Failure {
    match e {
        GluingError::NotCoprime { .. } | GluingError::Determinant(_) | GluingError::NegativeP(_) => Failure::Lens(e.to_string()),
        e => Failure::File(e.to_string()),
    }
}

fn make_lens(p: i64, q: i64, m: Option<i64>, n: Option<i64>) -> Result<LensSpace, Failure> {
    match (m, n) {
        (None, None) => LensSpace::new(p, q),
        (Some(m), Some(n)) => LensSpace::with_mn(p, q, m, n),
        _ => return Err(Failure::Lens("--m and --n must be given together".into())),
    }
    .map_err(lens_err)
}

fn load_constants(path: Option<&PathBuf>) -> Result<SplitConstants, Failure> {
    let Some(path) = path else { return Ok(example_double_constants()) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure::File(format!("{}: {e}", path.display())))?;
    let file = AlgebraFile::from_json(&text).map_err(|e| Failure::File(e.to_string()))?;
    let alg = file.to_algebra().map_err(|e| Failure::File(e.to_string()))?;
    match validate_algebra(&alg).map_err(|e| Failure::File(e.to_string()))? {
        Validation::Pass => {}
        Validation::Fail(v) => return Err(Failure::File(format!("invalid algebra: {v}"))),
    }
    let split = file
        .to_split(&alg)
        .map_err(|e| Failure::File(e.to_string()))?
        .ok_or_else(|| Failure::File("algebra file has no splitV/splitW".into()))?;
    build_split_constants(&alg, &split).map_err(|e| Failure::File(e.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub p: i64,
    pub q: i64,
    pub m: i64,
    pub n: i64,
    pub class: String,
    #[serde(skip)]
    pub s: Q,
    pub w2_exact: String,
    pub w2_real: f64,
    pub variant: &'static str,
}

/// The two-loop weight of `lens` for the given constants.
pub fn weight_record(lens: &LensSpace, sc: &SplitConstants, variant: Variant, unit_e: bool) -> Result<Record, GluingError> {
    let class = classify_splitting(sc);
    let manin = class == SplittingClass::ManinTriple;
    let (e, ep) = if unit_e {
        (Q::one(), if manin { Q::zero() } else { Q::one() })
    } else {
        (coeff_e(sc), coeff_e_prime(sc))
    };
    let g = lens.matrix;
    let (exact, real) = if manin {
        (two_loop_weight_mt(lens, &e)?, 0.0)
    } else {
        let (x, r) = two_loop_weight_nmt(lens, &e, &ep, variant)?;
        (x, r.value)
    };
    Ok(Record {
        p: g.p,
        q: g.q,
        m: g.m,
        n: g.n,
        class: class.to_string(),
        s: dedekind_sum_direct(g.q, g.p)?,
        w2_exact: fmt_q(&exact),
        w2_real: real,
        variant: match variant {
            Variant::Theorem => "theorem",
            Variant::SeffEq => "seff",
        },
    })
}

fn csv_row(r: &Record) -> String {
    format!("{},{},{},{},{},{},{}", r.p, r.q, r.m, r.n, fmt_q(&r.s), r.w2_exact, r.w2_real)
}

const CSV_HEADER: &str = "p,q,m,n,s(q,p),w2_exact,w2_real";

fn io(e: std::io::Error) -> Failure {
    Failure::File(e.to_string())
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Weight { p, q, m, n, algebra, variant, format, unit_e } => {
            let lens = make_lens(p, q, m, n)?;
            let sc = load_constants(algebra.as_ref())?;
            if lens.is_s1_s2() {
                let e = if unit_e { Q::one() } else { coeff_e(&sc) };
                let c = crate::gluing::s1s2_theta_coefficient(q);
                writeln!(out, "S1xS2 branch: theta pairing coefficient {}", fmt_q(&(e * c))).map_err(io)?;
                return Ok(());
            }
            let r = weight_record(&lens, &sc, variant.into(), unit_e).map_err(lens_err)?;
            match format {
                Format::Plain => {
                    writeln!(out, "{}", r.w2_exact).map_err(io)?;
                    if r.class != SplittingClass::ManinTriple.to_string() {
                        writeln!(out, "real {:.15}", r.w2_real).map_err(io)?;
                    }
                }
                Format::Csv => writeln!(out, "{CSV_HEADER}\n{}", csv_row(&r)).map_err(io)?,
                Format::Json => writeln!(out, "{}", serde_json::to_string(&r).expect("record serializes")).map_err(io)?,
            }
        }
        Command::Table { pmax, algebra, variant, format, unit_e } => {
            let sc = load_constants(algebra.as_ref())?;
            let pairs: Vec<(i64, i64)> = (1..=pmax).flat_map(|p| (0..p).filter(move |q| q.gcd(&p) == 1).map(move |q| (p, q))).collect();
            let mut rows: Vec<Record> = pairs
                .par_iter()
                .map(|&(p, q)| weight_record(&LensSpace::new(p, q)?, &sc, variant.into(), unit_e))
                .collect::<Result<_, _>>()
                .map_err(lens_err)?;
            rows.sort_by_key(|r| (r.p, r.q));
            match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("records serialize")).map_err(io)?,
                _ => {
                    writeln!(out, "{CSV_HEADER}").map_err(io)?;
                    for r in &rows {
                        writeln!(out, "{}", csv_row(r)).map_err(io)?;
                    }
                }
            }
        }
        Command::AlgebraCheck { file } => {
            let sc = load_constants(Some(&file))?;
            writeln!(out, "valid").map_err(io)?;
            writeln!(out, "class {}", classify_splitting(&sc)).map_err(io)?;
            writeln!(out, "e {}", fmt_q(&coeff_e(&sc))).map_err(io)?;
            writeln!(out, "e' {}", fmt_q(&coeff_e_prime(&sc))).map_err(io)?;
        }
        Command::Verify { level } => {
            let lines = verify_suite(level == Level::Full);
            let mut failed = 0;
            for l in &lines {
                writeln!(out, "{} {} max_err={:.3e}", if l.pass { "PASS" } else { "FAIL" }, l.name, l.max_err).map_err(io)?;
                failed += usize::from(!l.pass);
            }
            if failed > 0 {
                return Err(Failure::Verify(format!("{failed} check(s) failed")));
            }
        }
        Command::Pipeline { p, q, m, n, algebra, dump_kernels } => {
            let lens = make_lens(p, q, m, n)?;
            let sc = load_constants(algebra.as_ref())?;
            let class = classify_splitting(&sc);
            if class != SplittingClass::ManinTriple {
                return Err(Failure::File(GluingError::NotManin(class).to_string()));
            }
            let ev = evaluate_catalogue(&sc).map_err(lens_err)?;
            let (lines, total) = pipeline_trace(&lens, &sc, &ev).map_err(lens_err)?;
            for l in &lines {
                writeln!(out, "{:<24} {}", l.label, fmt_q(&l.constant)).map_err(io)?;
                if dump_kernels {
                    for t in &l.raw {
                        writeln!(out, "    {t}").map_err(io)?;
                    }
                }
            }
            writeln!(out, "S_eff^(2) {}", fmt_q(&total)).map_err(io)?;
        }
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_LENS } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}
