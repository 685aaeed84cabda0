use std::path::{Path, PathBuf};
use std::sync::Arc;

use algsig::certify::TheoremId;
use algsig::registry::{builtin, Tabulated};
use algsig::vector::{FunctionRef, Interval, VectorValue};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Environment variable holding the default sigmoid order.
pub const DEFAULT_M_VAR: &str = "ALGSIG_DEFAULT_M";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    #[default]
    Both,
}

/// Run settings shared by every subcommand. The same fields are read from
/// the JSON config file; flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Builtin (`sin`, `abs:0.5`, `power:0,1.5`, ...) or `table:PATH` for a
    /// CSV with header `x,v1,...,vd`. Repeatable.
    #[arg(long, value_name = "NAME")]
    #[serde(alias = "functions")]
    pub function: Option<Vec<String>>,

    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    pub interval: Option<Vec<f64>>,

    /// Use the whole-line operator (approx).
    #[arg(long)]
    pub whole_line: bool,

    /// Operator sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,

    /// Sigmoid orders [default: $ALGSIG_DEFAULT_M or 1].
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<u32>>,

    /// Rate exponents in (0, 1).
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,

    /// Rate exponents for the fractional estimates.
    #[arg(long, value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,

    /// Fractional orders.
    #[arg(long, value_delimiter = ',')]
    pub frac_alpha: Option<Vec<f64>>,

    /// Derivative orders for the smooth-function estimate.
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(alias = "N")]
    pub order: Option<Vec<u32>>,

    /// Iteration counts for the iterated fractional estimate.
    #[arg(long, value_delimiter = ',')]
    #[serde(alias = "n_bar")]
    pub nbar: Option<Vec<u32>>,

    /// Modulus window for the iterated estimate [default: n^-alpha].
    #[arg(long)]
    pub delta: Option<f64>,

    /// Evaluation points of the pointwise estimates [default: 11 points across the interval].
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Option<Vec<f64>>,

    /// Grid points for sampled sup-norms and tables [default: 1001].
    #[arg(long)]
    pub grid: Option<usize>,

    /// Truncation tolerance [default: 1e-8 at m = 1, 1e-10 otherwise].
    #[arg(long)]
    pub epsilon: Option<f64>,

    /// Theorem ids (T11, T12, T14-point, ..., C38) or `all`.
    #[arg(long, value_delimiter = ',')]
    #[serde(alias = "theorems")]
    pub theorem: Option<Vec<String>>,

    /// Which one-sided derivatives to tabulate (fractional).
    #[arg(long, value_enum)]
    pub side: Option<Side>,

    /// Output file [default: standard output].
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Worker threads; results keep parameter order regardless.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl Settings {
    /// Fields set here take precedence over `file`.
    pub fn over(self, file: Settings) -> Settings {
        Settings {
            config: self.config,
            function: self.function.or(file.function),
            interval: self.interval.or(file.interval),
            whole_line: self.whole_line || file.whole_line,
            n: self.n.or(file.n),
            m: self.m.or(file.m),
            alpha: self.alpha.or(file.alpha),
            beta: self.beta.or(file.beta),
            frac_alpha: self.frac_alpha.or(file.frac_alpha),
            order: self.order.or(file.order),
            nbar: self.nbar.or(file.nbar),
            delta: self.delta.or(file.delta),
            x: self.x.or(file.x),
            grid: self.grid.or(file.grid),
            epsilon: self.epsilon.or(file.epsilon),
            theorem: self.theorem.or(file.theorem),
            side: self.side.or(file.side),
            output: self.output.or(file.output),
            format: self.format.or(file.format),
            jobs: self.jobs.or(file.jobs),
        }
    }

    /// Merges in the config file named by `--config`, if any.
    pub fn load(self) -> Result<Settings> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(path.display().to_string(), e))?;
        let file: Settings = serde_json::from_str(&text)?;
        Ok(self.over(file))
    }
}

#[derive(Debug, Clone)]
pub struct NamedFunction {
    pub spec: String,
    pub f: FunctionRef,
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub functions: Vec<NamedFunction>,
    pub interval: Interval,
    pub whole_line: bool,
    pub n: Vec<u64>,
    pub m: Vec<u32>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub frac_alpha: Vec<f64>,
    pub order: Vec<u32>,
    pub n_bar: Vec<u32>,
    pub delta: Option<f64>,
    pub points: Vec<f64>,
    pub theorems: Vec<TheoremId>,
    pub grid: usize,
    epsilon: Option<f64>,
    pub side: Side,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
}

pub const DEFAULT_GRID: usize = 1001;
pub const DEFAULT_LADDER: [u64; 4] = [64, 128, 256, 512];

fn non_empty<T>(what: &str, v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        return Err(CliError::Config(format!("`{what}` must not be empty")));
    }
    Ok(v)
}

fn default_m() -> Result<u32> {
    match std::env::var(DEFAULT_M_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .ok()
            .filter(|&m| m >= 1)
            .ok_or_else(|| CliError::Config(format!("{DEFAULT_M_VAR} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(1),
    }
}

impl SweepConfig {
    /// `n_default` applies when no `n` list was given.
    pub fn resolve(s: Settings, n_default: &[u64]) -> Result<SweepConfig> {
        let interval = match s.interval.as_deref() {
            None => Interval::new(0.0, 1.0)?,
            Some(&[a, b]) => Interval::new(a, b)?,
            Some(v) => return Err(CliError::Config(format!("`interval` needs two numbers, got {}", v.len()))),
        };
        let functions = non_empty("function", s.function.unwrap_or_else(|| vec!["sin".into()]))?
            .into_iter()
            .map(|spec| Ok(NamedFunction { f: resolve_function(&spec)?, spec }))
            .collect::<Result<Vec<_>>>()?;
        let theorems = non_empty("theorem", s.theorem.unwrap_or_else(|| vec!["T11".into()]))?;
        let theorems = if theorems.iter().any(|t| t.eq_ignore_ascii_case("all")) {
            TheoremId::ALL.to_vec()
        } else {
            theorems.iter().map(|t| t.parse()).collect::<algsig::error::Result<Vec<TheoremId>>>()?
        };
        let grid = s.grid.unwrap_or(DEFAULT_GRID);
        if grid < 2 {
            return Err(CliError::Config(format!("`grid` must be at least 2, got {grid}")));
        }
        if let Some(e) = s.epsilon {
            if !(e > 0.0 && e < 1.0) {
                return Err(CliError::Config(format!("`epsilon` must lie in (0, 1), got {e}")));
            }
        }
        if s.jobs == Some(0) {
            return Err(CliError::Config("`jobs` must be at least 1".into()));
        }
        let points = s.x.unwrap_or_else(|| interval.grid(11).collect());
        if let Some(x) = points.iter().find(|x| !interval.contains(**x)) {
            return Err(CliError::Config(format!("point {x} lies outside {interval}")));
        }
        let format = s.format.unwrap_or_else(|| match s.output.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        });
        Ok(SweepConfig {
            functions,
            interval,
            whole_line: s.whole_line,
            n: non_empty("n", s.n.unwrap_or_else(|| n_default.to_vec()))?,
            m: non_empty("m", s.m.map_or_else(|| default_m().map(|m| vec![m]), Ok)?)?,
            alpha: non_empty("alpha", s.alpha.unwrap_or_else(|| vec![0.5]))?,
            beta: non_empty("beta", s.beta.unwrap_or_else(|| vec![0.5]))?,
            frac_alpha: non_empty("frac_alpha", s.frac_alpha.unwrap_or_else(|| vec![0.5]))?,
            order: non_empty("N", s.order.unwrap_or_else(|| vec![1]))?,
            n_bar: non_empty("nbar", s.nbar.unwrap_or_else(|| vec![1]))?,
            delta: s.delta,
            points: non_empty("x", points)?,
            theorems,
            grid,
            epsilon: s.epsilon,
            side: s.side.unwrap_or_default(),
            output: s.output,
            format,
            jobs: s.jobs,
        })
    }

    /// The configured truncation tolerance, or the order-dependent default.
    pub fn epsilon_for(&self, m: u32) -> f64 {
        self.epsilon.unwrap_or(if m == 1 { 1e-8 } else { 1e-10 })
    }

    /// Runs `f` over `cells` on the configured number of threads. Output
    /// order follows `cells`.
    pub fn run_cells<T, R, F>(&self, cells: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        use rayon::prelude::*;
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = self.jobs {
            builder = builder.num_threads(j);
        }
        let pool = builder.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(|| cells.par_iter().map(&f).collect()))
    }
}

pub fn resolve_function(spec: &str) -> Result<FunctionRef> {
    match spec.strip_prefix("table:") {
        Some(path) => load_table(Path::new(path)),
        None => Ok(builtin(spec)?),
    }
}

/// Reads a tabulated function from a CSV file with header `x,v1,...,vd`.
pub fn load_table(path: &Path) -> Result<FunctionRef> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => CliError::io(path.display().to_string(), std::io::Error::other(e.to_string())),
        _ => CliError::Csv(e),
    })?;
    let header = reader.headers()?.clone();
    let dim = header.len().saturating_sub(1);
    let expected = (1..=dim).map(|i| format!("v{i}"));
    if dim == 0 || header.get(0).map(str::trim) != Some("x") || !header.iter().skip(1).map(str::trim).eq(expected) {
        return Err(CliError::Config(format!("{}: header must be `x,v1,...,vd`", path.display())));
    }
    let (mut xs, mut values) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let nums = record
            .iter()
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("{} row {}: {e}", path.display(), line + 2)))?;
        xs.push(nums[0]);
        values.push(VectorValue::new(&nums[1..])?);
    }
    let name = path.file_stem().map_or_else(|| "table".into(), |s| s.to_string_lossy().into_owned());
    Ok(Arc::new(Tabulated::new(name, xs, values)?))
}
