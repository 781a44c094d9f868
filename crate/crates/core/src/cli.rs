//! Command-line front end. [`run`] returns the exit code and the text to
//! print, so that the binary and the tests share one control path.

use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::applications::{coth_mean_bounds, coth_mean_corrected};
use crate::bounds::{best_bound, Enclosure, SmoothnessClass, Theorem};
use crate::composite::{adaptive_integrate, composite_integrate, DEFAULT_PANEL_CAP};
use crate::error::Error;
use crate::expr::{parse, Expr};
use crate::extremal::{constant_search, d_ratio_closed_form, sharpness_ratio, Witness};
use crate::ranges::{Confidence, DerivativeRange, RangeConfig, RangeProvider, SuppliedRanges, DEFAULT_INFLATION, DEFAULT_SAMPLES};
use crate::simpson::{oracle_integral, Interval, Rule};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_EVAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_TOL: i32 = 3;

/// Per-panel grid size for composite runs.
pub const PANEL_SAMPLES: usize = 65;

#[derive(Parser, Debug)]
#[command(name = "simpref", version, about = "Simpson-rule defect bounds and certified quadrature")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    C1,
    C2,
    C3,
    C4,
    #[value(name = "c4-convex2")]
    C4Convex2,
}

impl From<ClassArg> for SmoothnessClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::C1 => SmoothnessClass::C1,
            ClassArg::C2 => SmoothnessClass::C2,
            ClassArg::C3 => SmoothnessClass::C3,
            ClassArg::C4 => SmoothnessClass::C4,
            ClassArg::C4Convex2 => SmoothnessClass::C4Convex2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Classical,
    Corrected,
    Oracle,
}

impl From<RuleArg> for Rule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Classical => Rule::Classical,
            RuleArg::Corrected => Rule::Corrected,
            RuleArg::Oracle => Rule::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WitnessArg {
    #[value(alias = "d-function")]
    D,
    #[value(alias = "abs")]
    AbsCubic,
    X4,
    X5,
}

impl From<WitnessArg> for Witness {
    fn from(w: WitnessArg) -> Self {
        match w {
            WitnessArg::D => Witness::DFunction,
            WitnessArg::AbsCubic => Witness::AbsCubic,
            WitnessArg::X4 => Witness::X4,
            WitnessArg::X5 => Witness::X5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Representations,
    Bounds,
    Sharpness,
    Coth,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Representations => Suite::Representations,
            SuiteArg::Bounds => Suite::Bounds,
            SuiteArg::Sharpness => Suite::Sharpness,
            SuiteArg::Coth => Suite::Coth,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CothMethod {
    Thm5,
    Thm6,
    Both,
}

/// `order:min:max`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeSpec {
    pub order: usize,
    pub min: f64,
    pub max: f64,
}

fn parse_range_spec(s: &str) -> Result<RangeSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [k, m, big_m] = parts[..] else {
        return Err(format!("expected order:min:max, got `{s}`"));
    };
    let order: usize = k.trim().parse().map_err(|_| format!("bad derivative order `{k}`"))?;
    if !(1..=4).contains(&order) {
        return Err(format!("derivative order must be 1 to 4, got {order}"));
    }
    let min: f64 = m.trim().parse().map_err(|_| format!("bad minimum `{m}`"))?;
    let max: f64 = big_m.trim().parse().map_err(|_| format!("bad maximum `{big_m}`"))?;
    if !(min <= max) || !min.is_finite() || !max.is_finite() {
        return Err(format!("need finite min <= max, got {min} and {max}"));
    }
    Ok(RangeSpec { order, min, max })
}

#[derive(Args, Debug, Clone)]
pub struct TargetArgs {
    /// Integrand in the variable `t`.
    #[arg(long)]
    pub expr: String,
    #[arg(long, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, value_enum, default_value_t = ClassArg::C2)]
    pub class: ClassArg,
}

#[derive(Args, Debug, Clone)]
pub struct RangeArgs {
    /// Grid size for sampled derivative ranges.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_INFLATION)]
    pub inflation: f64,
    /// Supplied range of one derivative over the whole interval, `order:min:max`.
    #[arg(long = "range", value_parser = parse_range_spec, allow_hyphen_values = true)]
    pub ranges: Vec<RangeSpec>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Integrate with a certified enclosure.
    Integrate {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        ranges: RangeArgs,
        #[arg(long, value_enum, default_value_t = RuleArg::Classical)]
        rule: RuleArg,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Fixed number of uniform panels instead of adaptive refinement.
        #[arg(long)]
        panels: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_PANEL_CAP)]
        panel_cap: usize,
        /// Sample ranges once over the whole interval and reuse them per panel.
        #[arg(long)]
        global_ranges: bool,
    },
    /// Every applicable defect enclosure and the narrowest one.
    Bound {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        ranges: RangeArgs,
    },
    /// Run a property suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sharpness ratio of a witness on [-a, a].
    Sharpness {
        #[arg(long, value_enum)]
        witness: WitnessArg,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        param: f64,
    },
    /// Bounds for the mean of coth(t)/t over [y, x].
    Coth {
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, value_enum, default_value_t = CothMethod::Thm5)]
        method: CothMethod,
    },
    /// Randomized search for the best c1 or c2 constant.
    Search {
        #[arg(long, value_enum, default_value_t = ClassArg::C2)]
        class: ClassArg,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        trials: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Integrate { .. } => "integrate",
            Command::Bound { .. } => "bound",
            Command::Verify { .. } => "verify",
            Command::Sharpness { .. } => "sharpness",
            Command::Coth { .. } => "coth",
            Command::Search { .. } => "search",
        }
    }
}

/// A finished command: the JSON report plus rows for CSV output.
struct Report {
    exit: i32,
    fields: Map<String, Value>,
    rows: Vec<Map<String, Value>>,
}

impl Report {
    fn new(exit: i32) -> Self {
        Report { exit, fields: Map::new(), rows: Vec::new() }
    }

    fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.fields.insert(key.to_string(), v.into());
    }
}

enum Failure {
    Usage(String),
    Eval(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Eval(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn enclosure_json(e: &Enclosure) -> Value {
    json!({
        "lower": e.lower,
        "upper": e.upper,
        "theorem": e.theorem.tag(),
        "constant": e.constant,
        "confidence": e.confidence.name(),
    })
}

fn value_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn target(t: &TargetArgs) -> Result<(Expr, Interval), Failure> {
    if !(t.a < t.b) || !t.a.is_finite() || !t.b.is_finite() {
        return usage(format!("need finite --a < --b, got [{}, {}]", t.a, t.b));
    }
    let e = parse(&t.expr)?;
    Ok((e, Interval::new(t.a, t.b)?))
}

fn range_config(r: &RangeArgs, default_samples: usize) -> Result<RangeConfig, Failure> {
    let samples = r.samples.unwrap_or(default_samples);
    if samples < 3 {
        return usage(format!("--samples must be at least 3, got {samples}"));
    }
    if !(r.inflation >= 1.0) || !r.inflation.is_finite() {
        return usage(format!("--inflation must be >= 1, got {}", r.inflation));
    }
    Ok(RangeConfig { samples, inflation: r.inflation })
}

fn supplied(
    base: SuppliedRanges,
    i: Interval,
    specs: &[RangeSpec],
) -> Result<SuppliedRanges, Failure> {
    let mut s = base;
    for spec in specs {
        s = s.with(DerivativeRange::exact(spec.order, i, spec.min, spec.max)?);
    }
    Ok(s)
}

fn cmd_integrate(
    t: &TargetArgs,
    r: &RangeArgs,
    rule: Rule,
    tol: f64,
    panels: Option<usize>,
    panel_cap: usize,
    global: bool,
) -> Result<Report, Failure> {
    if !(tol > 0.0) || !tol.is_finite() {
        return usage(format!("--tol must be positive, got {tol}"));
    }
    if panel_cap == 0 {
        return usage("--panel-cap must be at least 1");
    }
    if panels == Some(0) {
        return usage("--panels must be at least 1");
    }
    let cfg = range_config(r, PANEL_SAMPLES)?;
    let (e, i) = target(t)?;
    let class = SmoothnessClass::from(t.class);
    let mut rep = Report::new(EXIT_OK);
    rep.set("rule", rule.name());
    rep.set("class", class.name());
    if rule == Rule::Oracle {
        let v = oracle_integral(&e, i, tol.max(1e-14))?;
        rep.set("estimate", v);
        rep.set("panels", Value::Null);
        return Ok(rep);
    }
    let base = if global {
        SuppliedRanges::global(&e, i, class.max_order(), cfg)?
    } else {
        SuppliedRanges::new(Some(cfg))
    };
    let provider = supplied(base, i, &r.ranges)?;
    let result = match panels {
        Some(n) => composite_integrate(&e, i, n, rule, class, &provider)?,
        None => adaptive_integrate(&e, i, tol, rule, class, &provider, panel_cap)?,
    };
    rep.set("estimate", result.estimate);
    rep.set("panels", result.panels);
    rep.set("tol_met", result.tol_met);
    if let Some(enc) = &result.enclosure {
        rep.set("enclosure", enclosure_json(enc));
    }
    if let Some(p) = &result.partition {
        rep.set("width", p.total_width());
        for panel in &p.panels {
            rep.rows.push(value_map(json!({
                "a": panel.interval.a(),
                "b": panel.interval.b(),
                "estimate": panel.estimate,
                "lower": panel.enclosure.lower,
                "width": panel.width,
                "upper": panel.enclosure.upper,
                "theorem": panel.enclosure.theorem.tag(),
                "confidence": panel.enclosure.confidence.name(),
            })));
        }
    }
    if !result.tol_met {
        rep.exit = EXIT_TOL;
    }
    Ok(rep)
}

fn cmd_bound(t: &TargetArgs, r: &RangeArgs) -> Result<Report, Failure> {
    let cfg = range_config(r, DEFAULT_SAMPLES)?;
    let (e, i) = target(t)?;
    let class = SmoothnessClass::from(t.class);
    let provider = supplied(SuppliedRanges::new(Some(cfg)), i, &r.ranges)?;
    let best = best_bound(&e, i, class, &provider)?;
    let mut rep = Report::new(EXIT_OK);
    rep.set("class", class.name());
    rep.set("enclosure", enclosure_json(&best.winner));
    rep.set("candidates", best.candidates.iter().map(enclosure_json).collect::<Vec<_>>());
    let mut ranges = Vec::new();
    for order in 1..=class.max_order() {
        let d = provider.range(&e, i, order)?;
        ranges.push(json!({"order": order, "min": d.min, "max": d.max, "confidence": d.confidence.name()}));
    }
    rep.set("ranges", ranges);
    rep.rows = best.candidates.iter().map(|c| value_map(enclosure_json(c))).collect();
    Ok(rep)
}

fn cmd_verify(suite: Suite, seed: u64) -> Result<Report, Failure> {
    let props = run_suite(suite, seed)?;
    let all = props.iter().all(|p| p.pass);
    let mut rep = Report::new(if all { EXIT_OK } else { EXIT_TOL });
    rep.set("seed", seed);
    rep.rows = props
        .iter()
        .map(|p| value_map(json!({"name": p.name, "pass": p.pass, "slack": p.slack})))
        .collect();
    rep.set("properties", rep.rows.iter().cloned().map(Value::Object).collect::<Vec<_>>());
    Ok(rep)
}

fn cmd_sharpness(w: Witness, a: f64) -> Result<Report, Failure> {
    let ok = a.is_finite() && if w == Witness::DFunction { a > 1.0 } else { a > 0.0 };
    if !ok {
        return usage(format!("--param out of range for {w}: {a}"));
    }
    let ratio = sharpness_ratio(w, a)?;
    let mut rep = Report::new(EXIT_OK);
    rep.set("witness", w.tag());
    rep.set("param", a);
    rep.set("ratio", ratio);
    match w {
        Witness::DFunction => {
            rep.set("closed_form", d_ratio_closed_form(a));
            rep.set("limit", Theorem::Thm2.constant());
        }
        Witness::AbsCubic => rep.set("limit", 1.0 / 288.0),
        Witness::X4 | Witness::X5 => rep.set("limit", 1.0),
    }
    rep.rows.push(rep.fields.clone());
    Ok(rep)
}

fn cmd_coth(y: f64, x: f64, method: CothMethod) -> Result<Report, Failure> {
    if !(y > 0.0) || !y.is_finite() {
        return usage(format!("--y must be > 0, got {y}"));
    }
    if !(x > y) || !x.is_finite() {
        return usage(format!("--x must exceed --y, got {x}"));
    }
    let mut rep = Report::new(EXIT_OK);
    rep.set("y", y);
    rep.set("x", x);
    let b = match method {
        CothMethod::Thm5 => coth_mean_bounds(y, x)?,
        _ => coth_mean_corrected(y, x)?,
    };
    let thm5 = Enclosure::new(b.lower, b.upper, Theorem::Thm5, Confidence::AnalyticRange);
    let main = match (method, b.corrected, b.corrected_radius) {
        (CothMethod::Thm6, Some(c), Some(r)) => {
            Enclosure::symmetric(c, r, Theorem::Thm6, Confidence::AnalyticRange)
        }
        _ => thm5,
    };
    rep.set("method", format!("{method:?}").to_lowercase());
    rep.set("enclosure", enclosure_json(&main));
    if let (Some(c), Some(r)) = (b.corrected, b.corrected_radius) {
        rep.set("corrected", c);
        rep.set("corrected_radius", r);
    }
    if method == CothMethod::Both {
        rep.set("thm5", enclosure_json(&thm5));
    }
    rep.rows.push(value_map(enclosure_json(&main)));
    Ok(rep)
}

fn cmd_search(class: SmoothnessClass, seed: u64, trials: usize) -> Result<Report, Failure> {
    if !matches!(class, SmoothnessClass::C1 | SmoothnessClass::C2) {
        return usage("--class must be c1 or c2");
    }
    if trials == 0 {
        return usage("--trials must be at least 1");
    }
    let r = constant_search(class, seed, trials)?;
    let mut rep = Report::new(EXIT_OK);
    let fields = value_map(serde_json::to_value(&r).expect("report serializes"));
    rep.fields.extend(fields.clone());
    rep.set("seed", seed);
    rep.rows.push(fields);
    Ok(rep)
}

fn dispatch(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::Integrate { target, ranges, rule, tol, panels, panel_cap, global_ranges } => {
            cmd_integrate(target, ranges, (*rule).into(), *tol, *panels, *panel_cap, *global_ranges)
        }
        Command::Bound { target, ranges } => cmd_bound(target, ranges),
        Command::Verify { suite, seed } => cmd_verify((*suite).into(), *seed),
        Command::Sharpness { witness, param } => cmd_sharpness((*witness).into(), *param),
        Command::Coth { y, x, method } => cmd_coth(*y, *x, *method),
        Command::Search { class, seed, trials } => cmd_search((*class).into(), *seed, *trials),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_csv(rows: &[Map<String, Value>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(first) = rows.first() {
        let header: Vec<&String> = first.keys().collect();
        w.write_record(&header).expect("in-memory write");
        for row in rows {
            w.write_record(header.iter().map(|k| row.get(*k).map(scalar).unwrap_or_default()))
                .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn render_text(fields: &Map<String, Value>) -> String {
    let mut out = String::new();
    for (k, v) in fields {
        match v {
            Value::Array(items) => {
                out.push_str(&format!("{k}:\n"));
                for item in items {
                    out.push_str(&format!("  {}\n", flat(item)));
                }
            }
            other => out.push_str(&format!("{k}: {}\n", flat(other))),
        }
    }
    out
}

fn flat(v: &Value) -> String {
    match v {
        Value::Object(m) => m.iter().map(|(k, v)| format!("{k}={}", scalar(v))).collect::<Vec<_>>().join(" "),
        other => scalar(other),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code, the text for stdout and the text for stderr.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK { (code, text, String::new()) } else { (code, String::new(), text) };
        }
    };
    let name = cli.command.name();
    let (report, error) = match dispatch(&cli.command) {
        Ok(r) => (r, None),
        Err(Failure::Usage(msg)) => return (EXIT_USAGE, String::new(), format!("error: {msg}\n")),
        Err(Failure::Eval(e)) => {
            let mut r = Report::new(EXIT_EVAL);
            r.set("error", e.to_string());
            (r, Some(e))
        }
    };
    let mut fields = report.fields;
    fields.insert("command".into(), name.into());
    fields.insert("exit".into(), report.exit.into());
    let stdout = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&Value::Object(fields)).expect("json");
            s.push('\n');
            s
        }
        Format::Csv if error.is_none() && !report.rows.is_empty() => render_csv(&report.rows),
        Format::Csv => render_csv(&[fields]),
        Format::Text => render_text(&fields),
    };
    let stderr = error.map(|e| format!("error: {e}\n")).unwrap_or_default();
    (report.exit, stdout, stderr)
}
