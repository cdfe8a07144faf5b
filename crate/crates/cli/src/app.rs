//! Argument parsing and the three subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use stagetv_core::degrade::{degrade, BlurSpec, DegradeSpec};
use stagetv_core::metrics;
use stagetv_core::stagewise::{run_single, run_stagewise};
use stagetv_core::{FourierSymbol, ImageGrid, Regularizer, RestoreResult, SelectionMode, StagewiseConfig};

use crate::io::{load_image, save_image, ImageError};
use crate::trace::{rows_from, write_trace, TraceError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "stagetv", version, about = "Stage-wise ROF/LLT total-variation restoration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blur and add seeded Gaussian noise; writes `<out>.json` alongside.
    Degrade(DegradeArgs),
    /// Restore a degraded image.
    Restore(RestoreArgs),
    /// Compare two images (B is the reference).
    Metrics(MetricsArgs),
}

#[derive(Debug, Args)]
struct BlurArgs {
    /// Gaussian kernel size; giving either blur flag enables blur.
    #[arg(long)]
    blur_size: Option<usize>,
    #[arg(long)]
    blur_sigma: Option<f64>,
}

impl BlurArgs {
    fn spec(&self) -> Option<BlurSpec> {
        if self.blur_size.is_none() && self.blur_sigma.is_none() {
            return None;
        }
        let d = BlurSpec::default();
        Some(BlurSpec {
            size: self.blur_size.unwrap_or(d.size),
            sigma: self.blur_sigma.unwrap_or(d.sigma),
        })
    }
}

#[derive(Debug, Args)]
struct DegradeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    noise_sigma: f64,
    #[command(flatten)]
    blur: BlurArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Rof,
    Llt,
    Stagewise,
}

#[derive(Debug, Args)]
struct RestoreArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Stagewise)]
    method: Method,
    #[arg(long, default_value_t = 2.0)]
    lambda1: f64,
    #[arg(long, default_value_t = 2.0)]
    lambda2: f64,
    #[arg(long, default_value_t = 2.0)]
    penalty: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 200)]
    max_inner: usize,
    #[arg(long, default_value_t = 12)]
    n_max: usize,
    /// Ground truth; switches selection from residual to PSNR.
    #[arg(long)]
    oracle: Option<PathBuf>,
    /// Assumed forward blur; omit for denoising.
    #[command(flatten)]
    blur: BlurArgs,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] stagetv_core::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let outcome = match cli.command {
        Command::Degrade(a) => cmd_degrade(&a),
        Command::Restore(a) => cmd_restore(&a),
        Command::Metrics(a) => cmd_metrics(&a),
    };
    match outcome.and_then(|v| emit(out, v)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "stagetv: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, value: Option<Value>) -> Result<(), CliError> {
    if let Some(v) = value {
        writeln!(out, "{v}").map_err(|source| CliError::Write {
            path: "<stdout>".into(),
            source,
        })?;
    }
    Ok(())
}

/// JSON has no infinity; a perfect PSNR is reported as `"inf"`.
fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!(x.to_string())
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn cmd_degrade(a: &DegradeArgs) -> Result<Option<Value>, CliError> {
    let clean = load_image(&a.input)?;
    let spec = DegradeSpec {
        blur: a.blur.spec(),
        noise_sigma: a.noise_sigma,
        seed: a.seed,
    };
    let f = degrade(&clean, &spec)?;
    save_image(&f, &a.out)?;
    let sidecar = json!({
        "input": a.input.display().to_string(),
        "output": a.out.display().to_string(),
        "spec": spec,
    });
    let path = sidecar_path(&a.out);
    let text = serde_json::to_string_pretty(&sidecar).expect("plain JSON value") + "\n";
    std::fs::write(&path, text).map_err(|source| CliError::Write { path, source })?;
    Ok(None)
}

fn forward_symbol(blur: Option<BlurSpec>, rows: usize, cols: usize) -> Result<FourierSymbol, CliError> {
    Ok(match blur {
        Some(b) => b.kernel()?.symbol(rows, cols)?,
        None => FourierSymbol::identity(rows, cols),
    })
}

fn quality(u: &ImageGrid, reference: &ImageGrid) -> Result<(Value, Value, Value), CliError> {
    let psnr = real(metrics::psnr(u, reference)?);
    let ssim = metrics::ssim(u, reference).map_or(Value::Null, real);
    let fom = metrics::fom(u, reference).map_or(Value::Null, real);
    Ok((psnr, ssim, fom))
}

fn cmd_restore(a: &RestoreArgs) -> Result<Option<Value>, CliError> {
    let f = load_image(&a.input)?;
    let oracle = a.oracle.as_deref().map(load_image).transpose()?;
    let sym_k = forward_symbol(a.blur.spec(), f.rows(), f.cols())?;
    let cfg = StagewiseConfig {
        lambda1: a.lambda1,
        lambda2: a.lambda2,
        penalty: a.penalty,
        tol: a.tol,
        max_inner_iters: a.max_inner,
        n_max: a.n_max,
        mode: if oracle.is_some() {
            SelectionMode::OraclePsnr
        } else {
            SelectionMode::BlindResidual
        },
        oracle: oracle.clone(),
        ..StagewiseConfig::default()
    };
    let result: RestoreResult = match a.method {
        Method::Stagewise => run_stagewise(&f, &sym_k, &cfg)?,
        Method::Rof => run_single(&f, &sym_k, Regularizer::FirstOrder, &cfg)?,
        Method::Llt => run_single(&f, &sym_k, Regularizer::SecondOrder, &cfg)?,
    };
    save_image(&result.image, &a.out)?;
    if let Some(path) = &a.trace {
        write_trace(&rows_from(&result), path)?;
    }

    let (psnr, ssim, fom) = match &oracle {
        Some(o) => quality(&result.image.quantized(), o)?,
        None => (Value::Null, Value::Null, Value::Null),
    };
    Ok(Some(json!({
        "method": a.method,
        "psnr": psnr,
        "ssim": ssim,
        "fom": fom,
        "stages": result.stages.len(),
        "total_iters": result.total_inner_iters(),
        "termination": result.termination,
    })))
}

fn cmd_metrics(a: &MetricsArgs) -> Result<Option<Value>, CliError> {
    let u = load_image(&a.a)?;
    let reference = load_image(&a.b)?;
    let (psnr, ssim, fom) = quality(&u, &reference)?;
    Ok(Some(json!({ "psnr": psnr, "ssim": ssim, "fom": fom })))
}
