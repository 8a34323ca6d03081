//! Command-line front end for `klein-derham`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use klein_derham::exprparse::{CheckMode, Emit, JobError, JobSpec, Mode, RawBranch, RawJob};
use klein_derham::globaldecomp::{h1dr_abstract, h1dr_global, DecompReport, GlobalError, GlobalOptions};
use klein_derham::hkgbasis::{hkg_report, HkgError, HkgReport};
use klein_derham::kleinrep::{
    determinant, gram_matrix, multiplicities, rank_profile, Decomp, IndecType, RankProfile, RepError,
};
use klein_derham::ramdata::{BranchPoint, BranchTable, Location, RamError, Subgroup};
use klein_derham::{asform::AsError, gf2k::FieldCtx, polyrat::PolyError};
use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MATH: i32 = 2;
pub const EXIT_OUTSIDE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "klein-derham", version, about = "De Rham cohomology of Klein four covers in characteristic 2")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose H1_dR of the cover y0^2 + y0 = h0, y1^2 + y1 = h1
    Analyze(JobArgs),
    /// Local cover ramified only above infinity (polynomial h0, h1)
    Hkg(JobArgs),
    /// Decompose from abstract branch data
    Abstract(JobArgs),
    /// Decompose a module given by two matrices
    Module(JobArgs),
    /// Run the built-in golden checks
    Selftest,
}

#[derive(Args, Debug, Default, Clone)]
pub struct JobArgs {
    /// TOML job file; flags override its values
    #[arg(long)]
    pub job: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<i64>,
    /// Bit string or polynomial in g
    #[arg(long)]
    pub modulus: Option<String>,
    #[arg(long)]
    pub h0: Option<String>,
    #[arg(long)]
    pub h1: Option<String>,
    /// Genus of the base curve (abstract mode)
    #[arg(long)]
    pub gy: Option<i64>,
    /// Branch entry `CLASS:M` or `V4:BPRIME:m:M` (repeatable)
    #[arg(long)]
    pub branch: Vec<String>,
    /// Condition (B) holds for the abstract data
    #[arg(long)]
    pub condition_b: Option<bool>,
    /// Matrix file: `n k`, then the rows of S, then the rows of T
    #[arg(long)]
    pub matrices: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<i64>,
    #[arg(long)]
    pub max_field_degree: Option<i64>,
    /// json or text
    #[arg(long)]
    pub emit: Option<String>,
    /// formula, oracle or both
    #[arg(long)]
    pub check: Option<String>,
}

/// What a run produced: exit code, standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Outcome {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn fail(code: i32, op: &str, msg: impl std::fmt::Display) -> Outcome {
        Outcome { code, stdout: String::new(), stderr: format!("error in {op}: {msg}\n") }
    }
}

fn parse_branch(s: &str) -> Result<RawBranch, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let int = |x: &str| x.parse::<i64>().map_err(|_| format!("`{x}` in --branch {s} is not an integer"));
    match parts.as_slice() {
        [class, big_m] => Ok(RawBranch { class: class.to_string(), bprime: None, m: None, big_m: Some(int(big_m)?) }),
        [class, m, big_m] => {
            Ok(RawBranch { class: class.to_string(), bprime: None, m: Some(int(m)?), big_m: Some(int(big_m)?) })
        }
        [class, bprime, m, big_m] => Ok(RawBranch {
            class: class.to_string(),
            bprime: Some(bprime.to_string()),
            m: Some(int(m)?),
            big_m: Some(int(big_m)?),
        }),
        _ => Err(format!("--branch {s}: expected CLASS:M or V4:BPRIME:m:M")),
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Global => "global",
        Mode::Hkg => "hkg",
        Mode::Abstract => "abstract",
        Mode::Module => "module",
    }
}

/// Merges a job file (if any) with the flags; flags win.
pub fn build_raw(mode: Mode, a: &JobArgs) -> Result<RawJob, String> {
    let mut raw = match &a.job {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read job file {}: {e}", p.display()))?;
            RawJob::from_toml(&text, p.parent()).map_err(|e| format!("job file {}: {e}", p.display()))?
        }
        None => RawJob::default(),
    };
    if let Some(m) = &raw.mode {
        if Mode::parse(m) != Some(mode) {
            return Err(format!("job file sets mode `{m}` but the subcommand runs `{}`", mode_name(mode)));
        }
    }
    raw.mode = Some(mode_name(mode).to_string());
    macro_rules! take {
        ($($field:ident <- $flag:expr),*) => { $( if let Some(v) = $flag.clone() { raw.$field = Some(v); } )* };
    }
    take!(k <- a.k, modulus <- a.modulus, h0 <- a.h0, h1 <- a.h1, g_y <- a.gy, condition_b <- a.condition_b,
          seed <- a.seed, max_field_degree <- a.max_field_degree, emit <- a.emit, check <- a.check);
    if a.gy.is_some() || !a.branch.is_empty() {
        raw.has_abstract = true;
    }
    if !a.branch.is_empty() {
        raw.branches = a.branch.iter().map(|s| parse_branch(s)).collect::<Result<_, _>>()?;
    }
    if let Some(p) = &a.matrices {
        raw.module_path = Some(p.clone());
        raw.module_text = None;
    }
    Ok(raw)
}

fn job_error_code(e: &JobError) -> i32 {
    match e {
        JobError::Branch { .. } => EXIT_MATH,
        _ => EXIT_USAGE,
    }
}

fn global_error_code(e: &GlobalError) -> i32 {
    match e {
        GlobalError::Poly(PolyError::FieldDegreeCap { .. })
        | GlobalError::As(AsError::Poly(PolyError::FieldDegreeCap { .. }))
        | GlobalError::ConditionBNotAsserted => EXIT_USAGE,
        _ => EXIT_MATH,
    }
}

fn hkg_error_code(e: &HkgError) -> i32 {
    match e {
        HkgError::NotPolynomial(_) | HkgError::NotStandardForm(_) => EXIT_USAGE,
        _ => EXIT_MATH,
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports always serialize");
    s.push('\n');
    s
}

fn emit_report(spec: &JobSpec, r: &DecompReport) -> Outcome {
    let text = match spec.options.emit {
        Emit::Json => to_json(r),
        Emit::Text => r.to_text(),
    };
    Outcome::ok(if r.all_passed() { EXIT_OK } else { EXIT_MATH }, text)
}

fn run_analyze(spec: &JobSpec) -> Outcome {
    let cover = spec.cover.as_ref().expect("resolved global job has a cover");
    let opts = GlobalOptions {
        max_field_degree: spec.options.max_field_degree,
        cross_check: spec.options.check.unwrap_or(CheckMode::Formula).oracle(),
    };
    match h1dr_global(&cover.h0, &cover.h1, &opts) {
        Ok(r) => emit_report(spec, &r),
        Err(e) => Outcome::fail(global_error_code(&e), &format!("analyze (h0 = {}, h1 = {})", cover.h0_text, cover.h1_text), e),
    }
}

fn hkg_text(r: &HkgReport) -> String {
    let mut out = format!(
        "field: {}\nh0 = {}\nh1 = {}\nstabilizer: {}\nm = {}, M = {}, bprime {}\ngenus: {}\n",
        r.field, r.h0, r.h1, r.stabilizer, r.m, r.big_m, r.bprime, r.genus
    );
    if let Some(a) = &r.alpha {
        out.push_str(&format!("alpha = {a}, valuation {}\n", r.valuation.unwrap_or_default()));
    }
    out.push_str(&format!("formula: {}\n", r.formula));
    if let Some(o) = &r.oracle {
        out.push_str(&format!("matrices: {o}\nagree: {}\n", r.agree == Some(true)));
    }
    if let Some(h) = &r.h0_module {
        let d = h.decomp.map_or_else(|| "-".to_string(), |d| d.to_string());
        out.push_str(&format!("H0(Omega): {} (dim {}) {d}\n", h.status, h.dim));
    }
    for n in &r.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    out
}

fn run_hkg(spec: &JobSpec) -> Outcome {
    let cover = spec.cover.as_ref().expect("resolved hkg job has a cover");
    let oracle = spec.options.check.unwrap_or(CheckMode::Both).oracle();
    match hkg_report(&cover.h0, &cover.h1, oracle) {
        Ok(r) => {
            let code = if r.agree == Some(false) { EXIT_MATH } else { EXIT_OK };
            let text = match spec.options.emit {
                Emit::Json => to_json(&r),
                Emit::Text => hkg_text(&r),
            };
            Outcome::ok(code, text)
        }
        Err(e) => Outcome::fail(hkg_error_code(&e), &format!("hkg (h0 = {}, h1 = {})", cover.h0_text, cover.h1_text), e),
    }
}

fn run_abstract(spec: &JobSpec) -> Outcome {
    let a = spec.abstract_data.as_ref().expect("resolved abstract job has branch data");
    let table = BranchTable { g_y: a.g_y, entries: a.branches.clone() };
    match h1dr_abstract(&table, a.condition_b, spec.field) {
        Ok(r) => emit_report(spec, &r),
        Err(e) => Outcome::fail(global_error_code(&e), "abstract (branch table)", e),
    }
}

#[derive(Serialize)]
struct ModuleReport {
    field: String,
    dim: usize,
    rank_profile: RankProfile,
    status: &'static str,
    decomp: Option<Decomp>,
    detail: Option<String>,
}

fn run_module(spec: &JobSpec) -> Outcome {
    let v = spec.module.as_ref().expect("resolved module job has matrices");
    let profile = rank_profile(v);
    let (status, decomp, detail, code) = match multiplicities(v) {
        Ok(d) => ("decomposed", Some(d), None, EXIT_OK),
        Err(RepError::OutsideClassification(msg)) => ("outside", None, Some(msg), EXIT_OUTSIDE),
        Err(e) => return Outcome::fail(EXIT_MATH, "module (multiplicities)", e),
    };
    let r = ModuleReport { field: v.ctx().to_string(), dim: v.dim(), rank_profile: profile, status, decomp, detail };
    let text = match spec.options.emit {
        Emit::Json => to_json(&r),
        Emit::Text => {
            let d = r.decomp.map_or_else(|| "-".to_string(), |d| d.to_string());
            format!("field: {}\ndim: {}\nrank profile: {:?}\n{}: {d}\n", r.field, r.dim, profile.as_tuple(), r.status)
        }
    };
    Outcome::ok(code, text)
}

/// Golden checks bundled with the binary. Each returns `Err` with a reason on failure.
pub fn selftest_cases() -> Vec<(&'static str, Result<(), String>)> {
    let gf2 = FieldCtx::gf2();
    let parse = |s: &str| klein_derham::exprparse::parse_expr(s, gf2).map_err(|e| e.to_string());
    let expect = |got: Decomp, want: Decomp| {
        if got == want {
            Ok(())
        } else {
            Err(format!("got {got}, expected {want}"))
        }
    };
    let mut out = Vec::new();

    let ex64 = (|| {
        let r = h1dr_global(&parse("x^3 + x + 1/(x-1)^7")?, &parse("x^3 + x + 1/x^5")?, &GlobalOptions::default())
            .map_err(|e| e.to_string())?;
        expect(
            r.h1dr,
            Decomp::of(&[
                (IndecType::M31, 1),
                (IndecType::M32, 1),
                (IndecType::N0, 4),
                (IndecType::N1, 6),
                (IndecType::Ninf, 2),
            ]),
        )
    })();
    out.push(("three cyclic branch points", ex64));

    let ex62 = (|| {
        let named = |s: &str| Location::Named(s.to_string());
        let entries = vec![
            BranchPoint::new(named("P1"), Subgroup::Hinf, Subgroup::Hinf, 1, 21).map_err(|e: RamError| e.to_string())?,
            BranchPoint::new(named("P2"), Subgroup::V4, Subgroup::H0, 9, 15).map_err(|e| e.to_string())?,
        ];
        let r = h1dr_abstract(&BranchTable { g_y: 1, entries }, true, gf2).map_err(|e| e.to_string())?;
        if r.genus != 44 {
            return Err(format!("genus {} instead of 44", r.genus));
        }
        expect(
            r.h1dr,
            Decomp::of(&[
                (IndecType::Reg, 2),
                (IndecType::Ninf, 22),
                (IndecType::N0, 6),
                (IndecType::M31, 4),
                (IndecType::M32, 4),
            ]),
        )
    })();
    out.push(("genus one base with a V4 point", ex62));

    let hkg = (|| {
        let r = hkg_report(&parse("x^9")?, &parse("x^15")?, true).map_err(|e| e.to_string())?;
        if r.agree != Some(true) || r.valuation != Some(-21) {
            return Err("formula and matrices disagree or alpha certificate is off".into());
        }
        expect(r.formula, Decomp::of(&[(IndecType::N0, 6), (IndecType::M31, 4), (IndecType::M32, 4)]))
    })();
    out.push(("local cover (x^9, x^15)", hkg));

    let cyclic = (|| {
        let r = hkg_report(&parse("x^21")?, &parse("x^21")?, true).map_err(|e| e.to_string())?;
        if r.agree != Some(true) {
            return Err("formula and matrices disagree".into());
        }
        expect(r.formula, Decomp::of(&[(IndecType::Ninf, 20)]))
    })();
    out.push(("cyclic stabilizer x^21", cyclic));

    let det = determinant(gram_matrix());
    out.push(("Hom Gram matrix is nonsingular", if det != 0 { Ok(()) } else { Err("determinant is 0".into()) }));
    out
}

fn run_selftest() -> Outcome {
    let cases = selftest_cases();
    let mut text = String::new();
    let mut ok = true;
    for (name, r) in &cases {
        match r {
            Ok(()) => text.push_str(&format!("PASS {name}\n")),
            Err(e) => {
                ok = false;
                text.push_str(&format!("FAIL {name}: {e}\n"));
            }
        }
    }
    Outcome::ok(if ok { EXIT_OK } else { EXIT_MATH }, text)
}

pub fn run(cli: Cli) -> Outcome {
    let (mode, args) = match &cli.command {
        Command::Analyze(a) => (Mode::Global, a),
        Command::Hkg(a) => (Mode::Hkg, a),
        Command::Abstract(a) => (Mode::Abstract, a),
        Command::Module(a) => (Mode::Module, a),
        Command::Selftest => return run_selftest(),
    };
    let op = match mode {
        Mode::Global => "analyze",
        m => mode_name(m),
    };
    let raw = match build_raw(mode, args) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(EXIT_USAGE, op, e),
    };
    let spec = match raw.resolve() {
        Ok(s) => s,
        Err(e) => return Outcome::fail(job_error_code(&e), op, e),
    };
    match mode {
        Mode::Global => run_analyze(&spec),
        Mode::Hkg => run_hkg(&spec),
        Mode::Abstract => run_abstract(&spec),
        Mode::Module => run_module(&spec),
    }
}

/// Parses arguments (program name first) and runs; usage errors exit with 1.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                Outcome::ok(code, text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_flags() {
        assert_eq!(parse_branch("Hinf:21").unwrap().big_m, Some(21));
        let b = parse_branch("V4:H0:9:15").unwrap();
        assert_eq!((b.bprime.as_deref(), b.m, b.big_m), (Some("H0"), Some(9), Some(15)));
        assert!(parse_branch("V4").is_err());
    }

    #[test]
    fn mode_conflict_is_rejected() {
        let dir = std::env::temp_dir().join("klein-derham-cli-unit");
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("job.toml");
        std::fs::write(&p, "mode = \"abstract\"\n[abstract]\ng_y = 0\n").unwrap();
        let args = JobArgs { job: Some(p), ..JobArgs::default() };
        assert!(build_raw(Mode::Global, &args).unwrap_err().contains("mode"));
    }
}
