//! Command-line runner behind the `koksma` binary.
//!
//! Every subcommand reads an optional JSON config, resolves it against the
//! flags, validates everything, and only then writes artifacts into `--out`.
//! Exit codes: 0 on success, 1 when a bound or invariant fails (a
//! `witness.json` is written), 2 on any configuration or precondition error
//! (nothing is written).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::discrepancy::{brute_force_discrepancy, discrepancy_report, full_report, sandwich_witness, BRUTE_FORCE_LIMIT, MAX_DYADIC_LEVEL};
use crate::dyadic::Dyadic;
use crate::error::{LabError, Result};
use crate::lilclt::{clt_sample, draw_x, generate_source, lil_scan, CltParams, Grid, PointSource, ReferenceConstants, Variant};
use crate::oscillatory::{
    lemma3_check, lemma4_check, lemma5_check, lemma5_partition, random_admissible_subintervals, vdc_check, CaseVerdict,
    PhaseKind, PhaseSpec, VERDICT_CSV_HEADER,
};
use crate::periodic::PeriodicFunction;
use crate::selftest::{self, lemma34_rows, Artifacts, CriterionResult};
use crate::seqgen::{generate_iid, generate_linear_orbit, generate_power_orbit, CertifiedPointList, ExponentRule, Interval, OrbitSpec, DEFAULT_EPS, MAX_EPS, MIN_EPS};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "koksma-out";

#[derive(Parser, Debug)]
#[command(name = "koksma", version, about = "Experiments on the fractional parts of xi * x^s_n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Artifact directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for Monte Carlo runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Point radius target or bound-check tolerance, depending on the subcommand.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Certified orbit points as CSV.
    Generate,
    /// Star and extremal discrepancy of a point set.
    Discrepancy {
        /// Points file (one value per line, or an orbit CSV).
        input: Option<PathBuf>,
    },
    /// Dyadic discrepancies and the sandwich check for R = 1..r_max.
    Dyadic {
        input: Option<PathBuf>,
    },
    /// Randomized and explicit oscillatory-integral bound checks.
    Vdc,
    /// Three-interval partitions and the bound on each piece.
    Lemma5,
    /// LIL trajectory of a point source.
    Lil,
    /// CLT sample of normalized sums over random x.
    Clt,
    /// Print the reference limit constants.
    Constants,
    /// Run the acceptance criteria.
    Selftest {
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

/// Where a subcommand gets its points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsConfig {
    /// `frac(xi x^s_n)` for a given `x`.
    Power {
        #[serde(default = "one")]
        xi: f64,
        x: f64,
        #[serde(default = "identity")]
        rule: ExponentRule,
    },
    /// `frac(xi x^s_n)` with `x` drawn from the interval using the seed.
    SampledPower {
        #[serde(default = "one")]
        xi: f64,
        #[serde(default = "identity")]
        rule: ExponentRule,
        #[serde(default = "default_interval")]
        interval: Interval,
        #[serde(default)]
        draw: u64,
    },
    /// `frac(s_n x)`, computed exactly.
    Linear {
        x: f64,
        #[serde(default = "identity")]
        rule: ExponentRule,
    },
    Iid,
    Values {
        values: Vec<f64>,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

fn identity() -> ExponentRule {
    ExponentRule::Identity
}

fn default_interval() -> Interval {
    Interval { a: 1.1, b: 2.1 }
}

fn default_points() -> PointsConfig {
    PointsConfig::Power { xi: 1.0, x: 1.5, rule: ExponentRule::Identity }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    #[serde(default = "default_points")]
    pub points: PointsConfig,
    #[serde(default = "default_n")]
    pub n_points: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_n() -> usize {
    1000
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscrepancyConfig {
    #[serde(default = "default_points")]
    pub points: PointsConfig,
    #[serde(default = "default_n")]
    pub n_points: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Dyadic level for the extended report.
    #[serde(default)]
    pub r: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicConfig {
    #[serde(default = "default_points")]
    pub points: PointsConfig,
    #[serde(default = "default_n")]
    pub n_points: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_r_max")]
    pub r_max: u32,
}

fn default_r_max() -> u32 {
    8
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VdcConfig {
    /// Random cases per bound family.
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default = "default_interval")]
    pub interval: Interval,
    /// Extra phases; single-term ones get the single-term bound, plus-sign
    /// pairs the two-term bound, all others the monotone-derivative bound per piece.
    #[serde(default)]
    pub phases: Vec<PhaseSpec>,
    #[serde(default = "default_check_tol")]
    pub tolerance: f64,
}

fn default_cases() -> usize {
    40
}

fn default_check_tol() -> f64 {
    1e-6
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionParams {
    pub j: u32,
    pub k: u32,
    pub m: u32,
    pub n: u32,
    pub xi: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lemma5Config {
    /// Random parameter sets, used when `params` is empty.
    #[serde(default = "default_cases")]
    pub cases: usize,
    #[serde(default)]
    pub params: Vec<PartitionParams>,
    #[serde(default = "default_subintervals")]
    pub subintervals: usize,
    #[serde(default = "default_interval")]
    pub interval: Interval,
    #[serde(default = "default_check_tol")]
    pub tolerance: f64,
}

fn default_subintervals() -> usize {
    10
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LilConfig {
    #[serde(default = "default_lil_points")]
    pub points: PointsConfig,
    #[serde(default = "default_lil_n")]
    pub n_max: usize,
    #[serde(default = "default_grid")]
    pub grid: Grid,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_lil_points() -> PointsConfig {
    PointsConfig::SampledPower { xi: 1.0, rule: ExponentRule::Identity, interval: default_interval(), draw: 0 }
}

fn default_lil_n() -> usize {
    100_000
}

fn default_grid() -> Grid {
    Grid::Dyadic
}

fn default_variant() -> Variant {
    Variant::Star
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CltConfig {
    #[serde(default = "default_clt_f")]
    pub f: PeriodicFunction,
    #[serde(default = "identity")]
    pub rule: ExponentRule,
    #[serde(default = "one")]
    pub xi: f64,
    #[serde(default = "default_interval")]
    pub interval: Interval,
    #[serde(default = "default_clt_n")]
    pub n_terms: usize,
    #[serde(default = "default_clt_draws")]
    pub n_draws: usize,
}

fn default_clt_f() -> PeriodicFunction {
    PeriodicFunction::CenteredIndicator { a: 0.0, b: 0.5 }
}

fn default_clt_n() -> usize {
    4096
}

fn default_clt_draws() -> usize {
    2000
}

/// Outcome of a subcommand before anything touches the disk.
struct Outcome {
    artifacts: Artifacts,
    stdout: String,
    /// Set when a bound or invariant failed; written as `witness.json`.
    witness: Option<Value>,
}

impl Outcome {
    fn ok(artifacts: Artifacts, stdout: String) -> Self {
        Outcome { artifacts, stdout, witness: None }
    }
}

/// Parses `args` (without the program name) and runs the subcommand,
/// returning the process exit code.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("koksma".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Maps an error to its exit code.
pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Invariant(_) | LabError::Straddle { .. } | LabError::QuadratureBudget { .. } | LabError::Io(_) => 1,
        LabError::InvalidArgument(_)
        | LabError::PrecisionCap { .. }
        | LabError::SizeGuard { .. }
        | LabError::Precondition(_)
        | LabError::Config(_) => 2,
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(LabError::Config("--threads must be at least 1".into()));
        }
    }
    if let Some(t) = cli.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(LabError::Config("--tolerance must be positive".into()));
        }
    }
    let raw = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| LabError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<Value>(&text)?
        }
        None => json!({}),
    };
    let mut raw = match raw {
        Value::Object(m) => m,
        _ => return Err(LabError::Config("config must be a JSON object".into())),
    };
    let config_seed = match raw.remove("seed") {
        Some(v) => Some(v.as_u64().ok_or_else(|| LabError::Config("seed must be a non-negative integer".into()))?),
        None => None,
    };
    let seed = cli.seed.or(config_seed).unwrap_or(DEFAULT_SEED);
    let raw = Value::Object(raw);
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let (name, resolved, outcome) = match &cli.command {
        Command::Generate => {
            let mut c: GenerateConfig = parse(raw)?;
            if let Some(t) = cli.tolerance {
                c.eps = t;
            }
            let o = cmd_generate(&c, seed)?;
            ("generate", to_value(&c)?, o)
        }
        Command::Discrepancy { input } => {
            let mut c: DiscrepancyConfig = parse(raw)?;
            if let Some(p) = input {
                c.points = PointsConfig::File { path: p.clone() };
            }
            if let Some(t) = cli.tolerance {
                c.eps = t;
            }
            let o = cmd_discrepancy(&c, seed)?;
            ("discrepancy", to_value(&c)?, o)
        }
        Command::Dyadic { input } => {
            let mut c: DyadicConfig = parse(raw)?;
            if let Some(p) = input {
                c.points = PointsConfig::File { path: p.clone() };
            }
            if let Some(t) = cli.tolerance {
                c.eps = t;
            }
            let o = cmd_dyadic(&c, seed)?;
            ("dyadic", to_value(&c)?, o)
        }
        Command::Vdc => {
            let mut c: VdcConfig = parse(raw)?;
            if let Some(t) = cli.tolerance {
                c.tolerance = t;
            }
            let o = cmd_vdc(&c, seed)?;
            ("vdc", to_value(&c)?, o)
        }
        Command::Lemma5 => {
            let mut c: Lemma5Config = parse(raw)?;
            if let Some(t) = cli.tolerance {
                c.tolerance = t;
            }
            let o = cmd_lemma5(&c, seed)?;
            ("lemma5", to_value(&c)?, o)
        }
        Command::Lil => {
            let mut c: LilConfig = parse(raw)?;
            if let Some(t) = cli.tolerance {
                c.eps = t;
            }
            let o = cmd_lil(&c, seed)?;
            ("lil", to_value(&c)?, o)
        }
        Command::Clt => {
            let c: CltConfig = parse(raw)?;
            let o = cmd_clt(&c, seed, cli.threads)?;
            ("clt", to_value(&c)?, o)
        }
        Command::Constants => {
            let _: Empty = parse(raw)?;
            ("constants", json!({}), cmd_constants()?)
        }
        Command::Selftest { only } => {
            let _: Empty = parse(raw)?;
            let (_, o) = cmd_selftest(only, seed, cli.threads)?;
            ("selftest", json!({ "only": only }), o)
        }
    };

    let header = json!({ "command": name, "seed": seed, "config": resolved });
    write_outcome(&out, &header, &outcome)?;
    print!("{}", outcome.stdout);
    Ok(if outcome.witness.is_some() { 1 } else { 0 })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Empty {}

fn parse<T: DeserializeOwned>(raw: Value) -> Result<T> {
    serde_json::from_value(raw).map_err(|e| LabError::Config(e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| LabError::Config(e.to_string()))
}

/// Embeds the command, seed and resolved config: a `# {...}` line ahead of
/// CSV headers, a `"run"` member in JSON objects.
fn embed(name: &str, body: &str, header: &Value) -> Result<String> {
    if name.ends_with(".json") {
        let mut v: Value = serde_json::from_str(body)?;
        let v = match v {
            Value::Object(ref mut m) => {
                m.insert("run".into(), header.clone());
                v
            }
            other => json!({ "run": header, "data": other }),
        };
        Ok(serde_json::to_string_pretty(&v)? + "\n")
    } else {
        Ok(format!("# {header}\n{body}"))
    }
}

fn write_outcome(out: &Path, header: &Value, o: &Outcome) -> Result<()> {
    let mut files: Vec<(String, String)> = Vec::new();
    for (name, body) in &o.artifacts {
        files.push((name.clone(), embed(name, body, header)?));
    }
    if let Some(w) = &o.witness {
        files.push(("witness.json".into(), embed("witness.json", &w.to_string(), header)?));
    }
    fs::create_dir_all(out)?;
    for (name, text) in files {
        fs::write(out.join(name), text)?;
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(MIN_EPS..=MAX_EPS).contains(&eps) {
        return Err(LabError::Config(format!("eps {eps:e} outside [{MIN_EPS:e}, {MAX_EPS:e}]")));
    }
    Ok(())
}

/// Reads one value per line, or the `value` column of a CSV with a header.
/// Lines starting with `#` are skipped.
pub fn read_points_file(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let mut column = None;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if column.is_none() && values.is_empty() && fields[0].parse::<f64>().is_err() {
            column = Some(
                fields
                    .iter()
                    .position(|f| *f == "value")
                    .ok_or_else(|| LabError::Config(format!("{}: header has no `value` column", path.display())))?,
            );
            continue;
        }
        let field = fields.get(column.unwrap_or(0)).copied().unwrap_or("");
        let v = field
            .parse::<f64>()
            .map_err(|_| LabError::Config(format!("{}:{}: cannot parse `{field}`", path.display(), lineno + 1)))?;
        values.push(v);
    }
    Ok(values)
}

fn points_from(c: &PointsConfig, n: usize, eps: f64, seed: u64) -> Result<CertifiedPointList> {
    check_eps(eps)?;
    let interval = default_interval();
    match c {
        PointsConfig::Power { xi, x, rule } => {
            let spec = OrbitSpec::from_f64(*xi, *x, rule.clone(), interval)?;
            generate_power_orbit(&spec, n, eps)
        }
        PointsConfig::SampledPower { xi, rule, interval, draw } => {
            let interval = Interval::new(interval.a, interval.b)?;
            let x = draw_x(interval, seed, *draw, 53)?;
            let spec = OrbitSpec::new(Dyadic::from_f64(*xi)?, x, rule.clone(), interval)?;
            generate_power_orbit(&spec, n, eps)
        }
        PointsConfig::Linear { x, rule } => generate_linear_orbit(&Dyadic::from_f64(*x)?, rule, n),
        PointsConfig::Iid => Ok(generate_iid(seed, n)),
        PointsConfig::Values { values } => CertifiedPointList::from_values(values),
        PointsConfig::File { path } => CertifiedPointList::from_values(&read_points_file(path)?),
    }
}

fn require_points(p: &CertifiedPointList) -> Result<()> {
    if p.is_empty() {
        return Err(LabError::Config("point set is empty".into()));
    }
    Ok(())
}

fn cmd_generate(c: &GenerateConfig, seed: u64) -> Result<Outcome> {
    if c.n_points == 0 {
        return Err(LabError::Config("n_points must be positive".into()));
    }
    let pts = points_from(&c.points, c.n_points, c.eps, seed)?;
    let mut art = Artifacts::new();
    art.insert("orbit.csv".into(), pts.to_csv());
    let stdout = format!(
        "generated {} points at {} bits, max radius {:e}\n",
        pts.n_points(),
        pts.precision_bits,
        pts.max_radius()
    );
    Ok(Outcome::ok(art, stdout))
}

fn cmd_discrepancy(c: &DiscrepancyConfig, seed: u64) -> Result<Outcome> {
    let pts = points_from(&c.points, c.n_points, c.eps, seed)?;
    require_points(&pts)?;
    let mut report = match c.r {
        Some(r) => to_value(&full_report(&pts, r)?)?,
        None => {
            let r = discrepancy_report(&pts)?;
            json!({ "n": r.n_points, "d_star": r.d_star, "d_extremal": r.d_extremal, "slack": r.certified_slack })
        }
    };
    let mut witness = None;
    if pts.n_points() <= BRUTE_FORCE_LIMIT {
        let bf = brute_force_discrepancy(&pts)?;
        let (ds, de) = (report["d_star"].as_f64().unwrap_or(f64::NAN), report["d_extremal"].as_f64().unwrap_or(f64::NAN));
        let agrees = (ds - bf.star).abs() <= 1e-12 && (de - bf.extremal).abs() <= 1e-12;
        report["oracle"] = json!({ "d_star": bf.star, "d_extremal": bf.extremal, "agrees": agrees });
        if !agrees {
            witness = Some(json!({ "check": "closed form vs oracle", "report": report.clone() }));
        }
    }
    let stdout = format!("{}\n", serde_json::to_string(&report)?);
    let mut art = Artifacts::new();
    art.insert("discrepancy.json".into(), serde_json::to_string(&report)?);
    Ok(Outcome { artifacts: art, stdout, witness })
}

fn cmd_dyadic(c: &DyadicConfig, seed: u64) -> Result<Outcome> {
    if c.r_max == 0 || c.r_max > MAX_DYADIC_LEVEL {
        return Err(LabError::Config(format!("r_max must lie in [1, {MAX_DYADIC_LEVEL}]")));
    }
    let pts = points_from(&c.points, c.n_points, c.eps, seed)?;
    require_points(&pts)?;
    let rows = (1..=c.r_max).map(|r| sandwich_witness(&pts, r)).collect::<Result<Vec<_>>>()?;
    let failures: Vec<_> = rows.iter().filter(|w| !w.holds).collect();
    let witness = (!failures.is_empty()).then(|| json!({ "check": "sandwich inequality", "violations": failures }));
    let mut stdout = String::new();
    for w in &rows {
        stdout += &format!(
            "R={:2}  D*>={:.6}  D*={:.6}  D={:.6}  D>={:.6}  D<={:.6}  {}\n",
            w.r_level,
            w.d_large_star,
            w.d_star,
            w.d_extremal,
            w.d_large,
            w.d_small,
            if w.holds { "ok" } else { "VIOLATED" }
        );
    }
    let mut art = Artifacts::new();
    art.insert("dyadic.json".into(), serde_json::to_string(&json!({ "n": pts.n_points(), "levels": rows }))?);
    Ok(Outcome { artifacts: art, stdout, witness })
}

fn verdict_outcome(file: &str, rows: Vec<CaseVerdict>, extra: Artifacts) -> Result<Outcome> {
    let mut csv = format!("{VERDICT_CSV_HEADER}\n");
    for r in &rows {
        csv += &r.csv_row();
        csv.push('\n');
    }
    let failed: Vec<&CaseVerdict> = rows.iter().filter(|r| !r.pass).collect();
    let stdout = format!("{} cases, {} failed\n", rows.len(), failed.len());
    let witness = (!failed.is_empty()).then(|| json!({ "check": "oscillatory bound", "failures": failed }));
    let mut art = extra;
    art.insert(file.into(), csv);
    Ok(Outcome { artifacts: art, stdout, witness })
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0 && tol <= 1e-3) {
        return Err(LabError::Config(format!("tolerance {tol:e} outside (0, 1e-3]")));
    }
    Ok(())
}

fn cmd_vdc(c: &VdcConfig, seed: u64) -> Result<Outcome> {
    check_tol(c.tolerance)?;
    let iv = Interval::new(c.interval.a, c.interval.b)?;
    for p in &c.phases {
        p.validate()?;
    }
    let mut rows = if iv == default_interval() {
        lemma34_rows(seed, c.cases, c.tolerance)?
    } else {
        let mut v = Vec::new();
        for (i, p) in crate::oscillatory::random_lemma3_cases(seed, c.cases, iv.a, iv.b).iter().enumerate() {
            v.push(CaseVerdict { case_id: i, ..lemma3_check(p, c.tolerance)? });
        }
        for (i, p) in crate::oscillatory::random_lemma4_cases(seed, c.cases, iv.a, iv.b).iter().enumerate() {
            v.push(CaseVerdict { case_id: c.cases + i, ..lemma4_check(p, c.tolerance)? });
        }
        v
    };
    for p in &c.phases {
        let base = rows.len();
        let verdicts = match p.kind {
            PhaseKind::Single { .. } if p.alpha > 1.0 => vec![lemma3_check(p, c.tolerance)?],
            PhaseKind::Pair { sign: crate::oscillatory::Sign::Plus, n, m, .. } if n != m && p.alpha > 1.0 => {
                vec![lemma4_check(p, c.tolerance)?]
            }
            _ => vdc_check(p, c.tolerance)?,
        };
        rows.extend(verdicts.into_iter().enumerate().map(|(i, v)| CaseVerdict { case_id: base + i, ..v }));
    }
    verdict_outcome("vdc.csv", rows, Artifacts::new())
}

fn cmd_lemma5(c: &Lemma5Config, seed: u64) -> Result<Outcome> {
    check_tol(c.tolerance)?;
    let iv = Interval::new(c.interval.a, c.interval.b)?;
    let params: Vec<PartitionParams> = if c.params.is_empty() {
        crate::oscillatory::random_lemma5_params(seed, c.cases)
            .into_iter()
            .map(|(j, k, m, n, xi, eta)| PartitionParams { j, k, m, n, xi, eta })
            .collect()
    } else {
        c.params.clone()
    };
    let parts = params
        .iter()
        .map(|p| lemma5_partition(p.j, p.k, p.m, p.n, p.xi, p.eta, iv.a, iv.b))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut structural = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let inside = iv.a <= p.x1 && p.x1 <= iv.b;
        let residual = inside.then(|| p.stationary_residual());
        let ok = p.is_disjoint()
            && p.excluded_measure <= p.measure_limit()
            && p.is_monotone_on_intervals(selftest::thresholds::MONOTONE_SAMPLES)
            && residual.is_none_or(|r| r <= selftest::thresholds::STATIONARY_TOL);
        if !ok {
            structural.push(i);
        }
        let subs = random_admissible_subintervals(p, seed, (1 << 40) + 1000 + i as u64, c.subintervals);
        for (s, (lo, hi)) in subs.into_iter().enumerate() {
            rows.push(CaseVerdict { case_id: i * c.subintervals + s, ..lemma5_check(p, lo, hi, c.tolerance)? });
        }
    }
    let mut extra = Artifacts::new();
    extra.insert("partitions.json".into(), serde_json::to_string(&json!({ "partitions": parts }))?);
    let mut o = verdict_outcome("lemma5.csv", rows, extra)?;
    if !structural.is_empty() {
        o.witness = Some(json!({ "check": "partition structure", "cases": structural, "bound_failures": o.witness }));
    }
    Ok(o)
}

fn cmd_lil(c: &LilConfig, seed: u64) -> Result<Outcome> {
    let grid_points = c.grid.points(c.n_max)?;
    let source = match &c.points {
        PointsConfig::Power { xi, x, rule } => Some(PointSource::Power { xi: *xi, x: *x, rule: rule.clone() }),
        PointsConfig::SampledPower { xi, rule, draw, .. } => {
            Some(PointSource::SampledPower { xi: *xi, rule: rule.clone(), seed, draw: *draw })
        }
        PointsConfig::Iid => Some(PointSource::Iid { seed }),
        _ => None,
    };
    let interval = match &c.points {
        PointsConfig::SampledPower { interval, .. } => Interval::new(interval.a, interval.b)?,
        _ => default_interval(),
    };
    check_eps(c.eps)?;
    let pts = match source {
        Some(s) => generate_source(&s, c.n_max, interval, c.eps)?,
        None => points_from(&c.points, c.n_max, c.eps, seed)?,
    };
    if pts.n_points() < c.n_max {
        return Err(LabError::Config(format!("only {} points available, n_max is {}", pts.n_points(), c.n_max)));
    }
    let t = lil_scan(&pts, &c.grid, c.variant)?;
    let last = *grid_points.last().expect("grid is nonempty");
    let stdout = format!(
        "L({last}) = {:.6}, running max {:.6}, reference limsup {:.6}\n",
        t.at(last).unwrap_or(f64::NAN),
        t.running_max_at(last).unwrap_or(f64::NAN),
        ReferenceConstants::new().lil_power_orbit
    );
    let mut art = Artifacts::new();
    art.insert("lil.csv".into(), t.to_csv());
    Ok(Outcome::ok(art, stdout))
}

fn cmd_clt(c: &CltConfig, seed: u64, threads: Option<usize>) -> Result<Outcome> {
    let p = CltParams {
        f: c.f.clone(),
        rule: c.rule.clone(),
        xi: c.xi,
        interval: c.interval,
        n_terms: c.n_terms,
        n_draws: c.n_draws,
        seed,
    };
    let s = clt_sample(&p, threads)?;
    let summary = json!({
        "n_terms": s.n_terms,
        "n_draws": s.n_draws,
        "ks_distance": s.ks_distance,
        "ks_distance_unnormalized": s.ks_distance_raw,
        "mean_T": s.mean(),
        "norm": c.f.l2_norm(),
    });
    let stdout = format!("KS distance {:.5} (unnormalized {:.5})\n", s.ks_distance, s.ks_distance_raw);
    let mut art = Artifacts::new();
    art.insert("clt.csv".into(), s.to_csv());
    art.insert("clt_summary.json".into(), serde_json::to_string(&summary)?);
    Ok(Outcome::ok(art, stdout))
}

fn cmd_constants() -> Result<Outcome> {
    let c = ReferenceConstants::new();
    let stdout = format!(
        "lil_power_orbit      {:.15}\nkesten               {:.15}\nfukuyama_base2       {:.15}\nchung_smirnov        {:.15}\nfukuyama_irrational  {:.15}\n",
        c.lil_power_orbit, c.kesten, c.fukuyama_base2, c.chung_smirnov, c.fukuyama_irrational
    );
    let mut art = Artifacts::new();
    art.insert("constants.json".into(), serde_json::to_string(&c)?);
    Ok(Outcome::ok(art, stdout))
}

fn cmd_selftest(only: &[u32], seed: u64, threads: Option<usize>) -> Result<(Vec<CriterionResult>, Outcome)> {
    if let Some(bad) = only.iter().find(|&&i| !(1..=8).contains(&i)) {
        return Err(LabError::Config(format!("unknown criterion {bad}; choose from 1..8")));
    }
    let ids: Vec<u32> = if only.is_empty() { (1..=8).collect() } else { only.to_vec() };
    let (results, art) = selftest::run_selected(seed, threads, &ids)?;
    let stdout: String = results.iter().map(|r| r.line() + "\n").collect();
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).collect();
    let witness = (!failed.is_empty()).then(|| json!({ "check": "selftest", "failed": failed }));
    Ok((results, Outcome { artifacts: art, stdout, witness }))
}

/// Runs the selected criteria (all when `only` is empty) and writes their
/// artifacts into `out` exactly as `koksma selftest` does.
pub fn selftest_to_dir(only: &[u32], seed: u64, threads: Option<usize>, out: &Path) -> Result<Vec<CriterionResult>> {
    let (results, o) = cmd_selftest(only, seed, threads)?;
    let header = json!({ "command": "selftest", "seed": seed, "config": { "only": only } });
    write_outcome(out, &header, &o)?;
    Ok(results)
}
