use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adelic::adele::{adele_metric, crt_decompose, Adele, FiniteAdele, LatticeScale};
use adelic::adelic::{
    adelic_character, adelic_winding, finite_character_phase, restrict, winding_field, AdelicCircleMap, AdelicError,
};
use adelic::circle::{fmt_sig, generalized_winding, principal_lift, CircleError, CircleMap, WindingOptions};
use adelic::gallery::{figure1_data, GalleryEntry, GalleryError, GalleryObject, Param};
use adelic::limit::{check_chains, LimitError};
use adelic::numeric::Rational;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "adelic", version, about = "Winding numbers, lifts and adelic arithmetic from the command line")]
struct Cli {
    /// Structured JSON output instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generalized winding number of a gallery map.
    Winding(WindingArgs),
    /// Per-coset winding field of a unitization.
    WindingField(FieldArgs),
    /// Coset representative alpha in [0, N) with x_f in alpha + K_N.
    CrtDecompose {
        #[arg(long)]
        adele: PathBuf,
        #[arg(long)]
        n: u64,
    },
    /// Lift of a gallery map on an interval, as CSV.
    Lift(LiftArgs),
    /// The adelic character at an adele.
    Char {
        #[arg(long)]
        adele: PathBuf,
    },
    /// Functoriality checks for the circle covers up to a level.
    K1Limit {
        #[arg(long, value_name = "L")]
        check_chains: u64,
        /// Windings tested at every level.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,1,3")]
        windings: Vec<i64>,
    },
    /// Samples of the recursive example on [-9, 9] as CSV.
    ExamplePlot {
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Distance between two adeles.
    Metric {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
    },
}

#[derive(Args, Debug)]
struct MapArgs {
    /// Gallery entry name, e.g. "exp(q*x)".
    #[arg(long)]
    map: String,
    /// Rate parameter for "exp(q*x)" and "character-scaled".
    #[arg(long, value_parser = parse_rational, allow_hyphen_values = true)]
    q: Option<Rational>,
    /// Replaces the entry's parameters, one flag per parameter.
    #[arg(long = "param", value_parser = parse_param, allow_hyphen_values = true)]
    params: Vec<Param>,
    /// Finite adele (JSON file) fixing the fiber of an adelic map.
    #[arg(long)]
    fiber: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WindingArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, default_value_t = 0.125)]
    epsilon: f64,
    #[arg(long, default_value_t = 720)]
    n_max: u64,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, default_value_t = 1)]
    den_bound: u64,
    #[arg(long, default_value_t = 16.0)]
    tail_radius: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
}

#[derive(Args, Debug)]
struct LiftArgs {
    #[command(flatten)]
    map: MapArgs,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, allow_hyphen_values = true)]
    base_point: Option<f64>,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    step: f64,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn parse_param(s: &str) -> Result<Param, String> {
    if let Ok(q) = s.parse::<Rational>() {
        return Ok(Param::Rational(q));
    }
    s.parse::<f64>().map(Param::Real).map_err(|_| format!("{s:?} is neither a rational nor a real"))
}

/// Failure of a command, split by exit status.
#[derive(Debug)]
enum Failure {
    Domain(String),
    Invariant(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Invariant(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Invariant(m) => m,
        }
    }
}

fn circle_failure(e: &CircleError) -> Failure {
    match e {
        CircleError::InconsistentWinding { .. } | CircleError::NotUnit { .. } | CircleError::WindingMismatch { .. } => {
            Failure::Invariant(e.to_string())
        }
        _ => Failure::Domain(e.to_string()),
    }
}

impl From<CircleError> for Failure {
    fn from(e: CircleError) -> Self {
        circle_failure(&e)
    }
}

impl From<AdelicError> for Failure {
    fn from(e: AdelicError) -> Self {
        match &e {
            AdelicError::Circle(c) => circle_failure(c),
            AdelicError::CosetVariation { .. }
            | AdelicError::PeriodicityViolation { .. }
            | AdelicError::NotUnit { .. }
            | AdelicError::NotAProjection { .. } => Failure::Invariant(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<LimitError> for Failure {
    fn from(e: LimitError) -> Self {
        match e {
            LimitError::Circle(c) => circle_failure(&c),
            LimitError::NonIntegerWinding { .. } => Failure::Invariant(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Domain(e.to_string())
            }
        })*
    };
}

domain_from!(GalleryError, adelic::adele::AdeleError, std::io::Error);

/// Rounds every float in a JSON tree to 12 significant digits.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            fmt_sig(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

fn emit_json(v: Value) -> String {
    serde_json::to_string_pretty(&round_floats(v)).expect("JSON values serialize") + "\n"
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn fmt_complex(z: Complex64) -> String {
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    let sign = if im < 0.0 { '-' } else { '+' };
    format!("{}{}{}i", fmt_sig(re), sign, fmt_sig(im.abs()))
}

fn build_entry(args: &MapArgs) -> Result<GalleryEntry, Failure> {
    let mut entry = GalleryEntry::builtin(&args.map)?;
    if !args.params.is_empty() {
        entry = entry.with_params(args.params.clone());
    }
    if let Some(q) = &args.q {
        if !matches!(entry.name.as_str(), "exp(q*x)" | "character-scaled") {
            return Err(Failure::Domain(format!("--q does not apply to {}", entry.name)));
        }
        entry.params = vec![Param::Rational(q.clone())];
    }
    Ok(entry)
}

enum Built {
    Circle(CircleMap),
    Adelic(AdelicCircleMap),
}

fn build_map(args: &MapArgs, entry: &GalleryEntry) -> Result<Built, Failure> {
    let adelic = match entry.build()? {
        GalleryObject::Circle(f) => {
            if args.fiber.is_some() {
                return Err(Failure::Domain(format!("{} is a circle map and takes no fiber", entry.name)));
            }
            return Ok(Built::Circle(f));
        }
        GalleryObject::Adelic(g) => g,
        GalleryObject::Unitization { map, .. } => map,
    };
    match &args.fiber {
        Some(path) => {
            let x_f: FiniteAdele = read_json(path)?;
            Ok(Built::Circle(restrict(&adelic, &x_f)?))
        }
        None => Ok(Built::Adelic(adelic)),
    }
}

fn run_winding(args: &WindingArgs, json_out: bool) -> Result<String, Failure> {
    let entry = build_entry(&args.map)?;
    let opts = WindingOptions { epsilon: args.epsilon, n_max: args.n_max, ..WindingOptions::default() };
    let w = match build_map(&args.map, &entry)? {
        Built::Circle(f) => generalized_winding(&f, &opts)?,
        Built::Adelic(g) => adelic_winding(&g, &opts)?,
    };
    if json_out {
        let mut v = serde_json::to_value(&w).expect("winding serializes");
        v["map"] = serde_json::to_value(&entry).expect("entry serializes");
        Ok(emit_json(v))
    } else {
        Ok(format!("{}\n", w.value))
    }
}

fn run_field(args: &FieldArgs, json_out: bool) -> Result<String, Failure> {
    let mut entry = build_entry(&args.map)?;
    if let Some(n) = args.n {
        if !matches!(entry.build()?, GalleryObject::Unitization { .. }) {
            return Err(Failure::Domain(format!("{} is not a unitization", entry.name)));
        }
        entry.params[0] = Param::Rational(Rational::from_integer(n as i64));
    }
    let (map, scale) = match entry.build()? {
        GalleryObject::Unitization { map, scale } => (map, scale),
        _ => return Err(Failure::Domain(format!("{} is not a unitization", entry.name))),
    };
    let field = winding_field(&map, &scale, args.den_bound, args.tail_radius, args.step)?;
    if json_out {
        return Ok(emit_json(serde_json::to_value(&field).expect("field serializes")));
    }
    let mut out = format!("N = {}\n", scale.n());
    if field.values.is_empty() {
        out.push_str("all windings zero\n");
    }
    for (alpha, w) in &field.values {
        out.push_str(&format!("{alpha}\t{w}\n"));
    }
    Ok(out)
}

fn run_crt(adele: &Path, n: u64, json_out: bool) -> Result<String, Failure> {
    let x: Adele = read_json(adele)?;
    let scale = LatticeScale::new(n)?;
    let alpha = crt_decompose(x.finite(), &scale)?;
    if json_out {
        Ok(emit_json(json!({ "N": n, "alpha": alpha })))
    } else {
        Ok(format!("{alpha}\n"))
    }
}

fn run_lift(args: &LiftArgs, json_out: bool) -> Result<String, Failure> {
    let entry = build_entry(&args.map)?;
    let f = match build_map(&args.map, &entry)? {
        Built::Circle(f) => f,
        Built::Adelic(_) => return Err(Failure::Domain(format!("{} needs --fiber to be lifted", entry.name))),
    };
    let base = args.base_point.unwrap_or(args.from);
    let l = principal_lift(&f, base, (args.from, args.to), args.step)?;
    if json_out {
        let nodes: Vec<Value> = l.nodes().iter().map(|&(x, v)| json!({ "x": x, "lift": v })).collect();
        Ok(emit_json(json!({ "base_point": l.base_point(), "base_value": l.base_value(), "nodes": nodes })))
    } else {
        Ok(l.to_csv())
    }
}

fn run_char(adele: &Path, json_out: bool) -> Result<String, Failure> {
    let x: Adele = read_json(adele)?;
    let z = adelic_character(&x);
    if json_out {
        Ok(emit_json(json!({
            "re": z.re,
            "im": z.im,
            "finite_phase": finite_character_phase(x.finite()),
            "real": x.real(),
        })))
    } else {
        Ok(format!("{}\n", fmt_complex(z)))
    }
}

fn run_k1(limit: u64, windings: &[i64], json_out: bool) -> Result<String, Failure> {
    let report = check_chains(limit, windings)?;
    let out = if json_out {
        let mut v = serde_json::to_value(&report).expect("report serializes");
        v["passed"] = Value::Bool(report.passed());
        emit_json(v)
    } else {
        let failed = report.rows.iter().filter(|r| !r.passed()).count();
        format!("{}{} chains, {} failed\n", report.to_table(), report.rows.len(), failed)
    };
    if report.passed() {
        Ok(out)
    } else {
        print!("{out}");
        Err(Failure::Invariant("functoriality check failed".to_string()))
    }
}

fn run_plot(step: f64, output: Option<&Path>, json_out: bool) -> Result<String, Failure> {
    let csv = figure1_data(step)?;
    let text = if json_out {
        let rows: Vec<Value> = csv
            .lines()
            .skip(1)
            .filter_map(|line| line.split_once(','))
            .map(|(x, f)| json!({ "x": x.parse::<f64>().ok(), "f": f.parse::<f64>().ok() }))
            .collect();
        emit_json(json!({ "rows": rows }))
    } else {
        csv
    };
    match output {
        Some(path) => {
            fs::write(path, text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn run_metric(x: &Path, y: &Path, json_out: bool) -> Result<String, Failure> {
    let (a, b): (Adele, Adele) = (read_json(x)?, read_json(y)?);
    let d = adele_metric(&a, &b);
    if json_out {
        Ok(emit_json(json!({ "distance": d, "approx": d.to_f64() })))
    } else {
        Ok(format!("{d}\n"))
    }
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    let j = cli.json;
    match &cli.command {
        Command::Winding(a) => run_winding(a, j),
        Command::WindingField(a) => run_field(a, j),
        Command::CrtDecompose { adele, n } => run_crt(adele, *n, j),
        Command::Lift(a) => run_lift(a, j),
        Command::Char { adele } => run_char(adele, j),
        Command::K1Limit { check_chains, windings } => run_k1(*check_chains, windings, j),
        Command::ExamplePlot { step, output } => run_plot(*step, output.as_deref(), j),
        Command::Metric { x, y } => run_metric(x, y, j),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(64),
            };
        }
    };
    match dispatch(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
