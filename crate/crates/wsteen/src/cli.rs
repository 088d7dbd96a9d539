//! Argument parsing and command dispatch.
//!
//! Exit codes: 0 when every check passed or output was produced, 1 when a
//! check failed, 2 on usage errors (bad flags, files, expressions or presets).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use wsteen_core::homology_engine::Window;
use wsteen_core::milnor_dual::GEN_CAP;
use wsteen_core::shadow_modules::{format_pure_bar, IndexSet, ShadowModules};
use wsteen_core::witt_models::{Factor, HWHWPair, RuleSet, WittModels};
use wsteen_core::{AElement, Bidegree, DualSteenrod, FieldPreset, Side, SteenrodOp};

use crate::cache::Cache;
use crate::error::CliError;
use crate::expr::parse_expr;
use crate::preset_file::resolve_field;
use crate::report::{BasisReport, VerificationReport, BASIS_SCHEMA};
use crate::suites::{run_suite, Suite, SuiteParams};

#[derive(Debug, Parser)]
#[command(name = "wsteen", version, about = "Motivic dual Steenrod algebra and its Witt-theoretic quotients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Cache directory (default: $WSTEEN_CACHE, then .wsteen-cache/).
    #[arg(long, global = true, value_name = "PATH")]
    pub cache: Option<PathBuf>,
    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Basis of a graded piece in one bidegree.
    Basis(BasisArgs),
    /// A dual Steenrod operation applied to an element.
    Act(ActArgs),
    /// Evaluate a sum of products of generators in the pair model.
    Pair(PairArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Re-render a saved JSON report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct FieldArg {
    /// qcl, fq1, fq3 or custom:<file>.
    #[arg(long, default_value = "qcl")]
    pub field: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Object {
    /// The dual Steenrod algebra itself.
    DualSteenrod,
    /// The subalgebra `H_W` of the dual Steenrod algebra.
    HHw,
    /// The mod-`τ` quotient `H_W / τ` over `k^M`.
    KmHw,
    /// The right-unit quotient on which `d_right` acts.
    HKm,
    /// The presentation basis of the `K^W` kernel.
    HKw,
    /// Irreducible generator monomials of the pair model.
    HwHw,
}

impl Object {
    pub fn name(self) -> &'static str {
        match self {
            Object::DualSteenrod => "dual-steenrod",
            Object::HHw => "h-hw",
            Object::KmHw => "km-hw",
            Object::HKm => "h-km",
            Object::HKw => "h-kw",
            Object::HwHw => "hw-hw",
        }
    }
}

#[derive(Debug, Args)]
pub struct BasisArgs {
    #[arg(long, value_enum)]
    pub object: Object,
    #[command(flatten)]
    pub field: FieldArg,
    #[arg(long, allow_negative_numbers = true)]
    pub p: i32,
    #[arg(long, allow_negative_numbers = true)]
    pub q: i32,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OpArg {
    Sq1,
    Sq2,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

#[derive(Debug, Args)]
pub struct ActArgs {
    #[arg(long, value_enum)]
    pub op: OpArg,
    #[arg(long, value_enum, default_value = "right")]
    pub side: SideArg,
    #[command(flatten)]
    pub field: FieldArg,
    /// Element expression, e.g. `xb1 + t0*x1`.
    #[arg(long = "expr")]
    pub expr: String,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    #[command(flatten)]
    pub field: FieldArg,
    /// Generators `tau rho t0 s t<j> c{I} c1{I} t{I} t1{I}` combined with `*` and `+`.
    #[arg(long = "expr")]
    pub expr: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[command(flatten)]
    pub field: FieldArg,
    /// Sets the window to `-P ≤ p ≤ P`.
    #[arg(long)]
    pub max_p: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub min_q: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub max_q: Option<i32>,
    /// Largest index in the sets `I, J` of the relation suites.
    #[arg(long, default_value_t = 4)]
    pub max_index: usize,
    #[arg(long, default_value_t = 4)]
    pub jmax: usize,
    /// Random pairs for the action and localization suites.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Weight bound of the Hopf suite.
    #[arg(long, default_value_t = 12)]
    pub max_weight: i32,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A verification or basis report written with `--json`.
    pub input: PathBuf,
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(&cli, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// Runs a parsed command; `Ok(false)` means a check failed.
pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    let cache = (!cli.no_cache).then(|| Cache::resolve(cli.cache.as_deref()));
    match &cli.command {
        Command::Basis(a) => {
            let preset = resolve_field(&a.field.field)?;
            let v = cached_basis(cache.as_ref(), &preset, a.object, Bidegree::new(a.p, a.q))?;
            emit(out, cli.json, &v.report, BasisReport::to_table)?;
            Ok(true)
        }
        Command::Act(a) => {
            let preset = resolve_field(&a.field.field)?;
            let alg = DualSteenrod::new(preset);
            let x = parse_expr(&alg, &a.expr)?;
            let op = match a.op {
                OpArg::Sq1 => SteenrodOp::Sq1,
                OpArg::Sq2 => SteenrodOp::Sq2,
            };
            let side = match a.side {
                SideArg::Left => Side::Left,
                SideArg::Right => Side::Right,
            };
            let y = alg.act(op, side, &x);
            let v = json!({
                "field": alg.preset().name(),
                "op": format!("{op:?}").to_lowercase(),
                "side": format!("{side:?}").to_lowercase(),
                "input": alg.format(&x),
                "output": alg.format(&y),
            });
            emit(out, cli.json, &v, |v| format!("{}\n", v["output"].as_str().unwrap_or_default()))?;
            Ok(true)
        }
        Command::Pair(a) => {
            let preset = resolve_field(&a.field.field)?;
            let m = WittModels::new(preset)?;
            let x = eval_pair_expr(&m, &a.expr)?;
            let v = json!({
                "field": m.alg().preset().name(),
                "input": a.expr,
                "bidegree": x.deg,
                "a": m.alg().format(&x.a),
                "b": m.format_kw(&x.b),
            });
            emit(out, cli.json, &v, |_| format!("{}\n", m.format_pair(&x)))?;
            Ok(true)
        }
        Command::Verify(a) => {
            let preset = resolve_field(&a.field.field)?;
            let params = suite_params(a)?;
            let r = run_suite(a.suite, &preset, &params)?;
            emit(out, cli.json, &r, VerificationReport::to_table)?;
            Ok(r.all_passed)
        }
        Command::Report(a) => {
            let text = std::fs::read_to_string(&a.input)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.input.display())))?;
            if let Ok(r) = serde_json::from_str::<VerificationReport>(&text) {
                emit(out, cli.json, &r, VerificationReport::to_table)?;
                return Ok(r.all_passed);
            }
            if let Ok(r) = serde_json::from_str::<BasisReport>(&text) {
                emit(out, cli.json, &r, BasisReport::to_table)?;
                return Ok(true);
            }
            Err(CliError::Usage(format!("{} is not a wsteen report", a.input.display())))
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, as_json: bool, v: &T, table: impl Fn(&T) -> String) -> Result<(), CliError> {
    if as_json {
        serde_json::to_writer_pretty(&mut *out, v)?;
        writeln!(out)?;
    } else {
        write!(out, "{}", table(v))?;
    }
    Ok(())
}

fn suite_params(a: &VerifyArgs) -> Result<SuiteParams, CliError> {
    let mut params = SuiteParams {
        max_index: a.max_index,
        jmax: a.jmax,
        pairs: a.pairs,
        seed: a.seed,
        max_weight: a.max_weight,
        ..SuiteParams::default()
    };
    if a.max_p.is_some() || a.min_q.is_some() || a.max_q.is_some() {
        let base = match a.suite {
            Suite::MainTheorem => Window::EXTENDED,
            _ => Window::DEFAULT,
        };
        let mut w = base;
        if let Some(p) = a.max_p {
            if p < 0 {
                return Err(CliError::Usage("--max-p must be non-negative".into()));
            }
            w.p_min = -p;
            w.p_max = p;
        }
        w.q_min = a.min_q.unwrap_or(w.q_min);
        w.q_max = a.max_q.unwrap_or(w.q_max);
        if w.q_min > w.q_max {
            return Err(CliError::Usage("--min-q exceeds --max-q".into()));
        }
        params.window = Some(w);
    }
    if a.max_weight < 0 {
        return Err(CliError::Usage("--max-weight must be non-negative".into()));
    }
    if !(2..=GEN_CAP).contains(&a.jmax) {
        return Err(CliError::Usage(format!("--jmax must lie in 2..={GEN_CAP}")));
    }
    Ok(params)
}

// ---- bases ------------------------------------------------------------------

/// A basis together with each vector's image in the dual Steenrod algebra.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisValue {
    pub report: BasisReport,
    pub elements: Vec<AElement>,
}

pub fn compute_basis(preset: &FieldPreset, object: Object, b: Bidegree) -> Result<BasisValue, CliError> {
    let alg = DualSteenrod::new(preset.clone());
    let mut named: Vec<(String, AElement)> = Vec::new();
    match object {
        Object::DualSteenrod => {
            for m in alg.basis(b) {
                named.push((alg.format_mono(&m), AElement::from_mono(m)));
            }
        }
        Object::HHw => {
            let s = ShadowModules::new(alg);
            for c in s.hw_space(b).certs.iter() {
                named.push((s.format_cert(c), s.cert_image(c)));
            }
        }
        Object::KmHw => {
            let s = ShadowModules::new(alg);
            for m in s.kmhw_monomials(b) {
                named.push((s.format_kmhw_mono(&m), s.kmhw_lift(&m)));
            }
        }
        Object::HKm => {
            let s = ShadowModules::new(alg);
            for m in s.hkm_basis(b) {
                named.push((s.alg().format_mono(&m), AElement::from_mono(m)));
            }
        }
        Object::HKw => {
            let s = ShadowModules::new(alg);
            for (c, p) in s.hkw_presentation_basis(b) {
                let mut name = if c.is_one() { String::new() } else { format!("{}*", preset.format_km(&c)) };
                name.push_str(&format_pure_bar(&p));
                named.push((name, s.k_monomial(c, p)));
            }
        }
        Object::HwHw => {
            let m = WittModels::new(preset.clone())?;
            named = m.basis_monomials(b, RuleSet::Completed)?;
        }
    }
    let (basis, elements): (Vec<String>, Vec<AElement>) = named.into_iter().unzip();
    Ok(BasisValue {
        report: BasisReport {
            schema: BASIS_SCHEMA.into(),
            object: object.name().into(),
            field: preset.name().into(),
            p: b.p,
            q: b.q,
            dim: basis.len(),
            basis,
        },
        elements,
    })
}

pub fn cached_basis(cache: Option<&Cache>, preset: &FieldPreset, object: Object, b: Bidegree) -> Result<BasisValue, CliError> {
    let Some(cache) = cache else {
        return compute_basis(preset, object, b);
    };
    let key = Cache::key(preset, object.name(), b);
    if let Some(v) = cache.get::<BasisValue>(&key) {
        return Ok(v);
    }
    let v = compute_basis(preset, object, b)?;
    // A busy or read-only cache only costs the write.
    let _ = cache.put(&key, object.name(), &v);
    Ok(v)
}

// ---- pair expressions ---------------------------------------------------------

fn index_set(body: &str, pos: usize, whole: &str) -> Result<IndexSet, CliError> {
    let bad = || CliError::Usage(format!("malformed index set in '{whole}' at position {pos}"));
    let inner = body.strip_prefix('{').and_then(|r| r.strip_suffix('}')).ok_or_else(bad)?;
    let mut v = Vec::new();
    for part in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        v.push(part.parse::<usize>().map_err(|_| bad())?);
    }
    Ok(IndexSet::new(v)?)
}

/// One generator symbol as in the catalog of relations.
pub fn parse_factor(tok: &str, pos: usize) -> Result<Factor, CliError> {
    let unknown = || CliError::Usage(format!("unknown generator '{tok}' at position {pos}"));
    Ok(match tok {
        "tau" => Factor::Tau,
        "rho" => Factor::Rho,
        "t0" => Factor::Tau0,
        "s" => Factor::S,
        _ if tok.starts_with("c1{") => Factor::C1(index_set(&tok[2..], pos, tok)?),
        _ if tok.starts_with("c{") => Factor::C(index_set(&tok[1..], pos, tok)?),
        _ if tok.starts_with("t1{") => Factor::T1(index_set(&tok[2..], pos, tok)?),
        _ if tok.starts_with("t{") => Factor::T(index_set(&tok[1..], pos, tok)?),
        _ if tok.starts_with('t') => {
            let j: usize = tok[1..].parse().map_err(|_| unknown())?;
            if !(1..=GEN_CAP).contains(&j) {
                return Err(CliError::Usage(format!("generator index outside 1..={GEN_CAP} in '{tok}' at position {pos}")));
            }
            Factor::Tj(j as u8)
        }
        _ => return Err(unknown()),
    })
}

/// Sums of products of generator symbols, evaluated with `c(∅) = 1` and `τ`
/// acting on the left.
pub fn eval_pair_expr(m: &WittModels, text: &str) -> Result<HWHWPair, CliError> {
    let mut total: Option<HWHWPair> = None;
    let mut offset = 0;
    for term in text.split('+') {
        let mut prod = m.pair_unit();
        let mut inner = offset;
        let mut empty = true;
        for f in term.split('*') {
            let tok = f.trim();
            let pos = inner + f.len() - f.trim_start().len();
            inner += f.len() + 1;
            if tok.is_empty() {
                return Err(CliError::Usage(format!("missing generator at position {pos}")));
            }
            empty = false;
            if tok == "1" {
                continue;
            }
            prod = match parse_factor(tok, pos)? {
                Factor::Tau => m.pair_tau(&prod, Side::Left)?,
                f => m.pair_mul(&prod, &m.theorem_generator(f)?)?,
            };
        }
        if empty {
            return Err(CliError::Usage(format!("empty term at position {offset}")));
        }
        offset += term.len() + 1;
        total = Some(match total {
            None => prod,
            Some(t) if t.deg != prod.deg => {
                return Err(CliError::Usage(format!("terms of bidegrees {} and {} do not add", t.deg, prod.deg)))
            }
            Some(t) => m.pair_add(&t, &prod)?,
        });
    }
    total.ok_or_else(|| CliError::Usage("empty expression".into()))
}
