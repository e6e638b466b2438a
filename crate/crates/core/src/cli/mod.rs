//! The `scatterlab` command-line front end.
//!
//! Every command reads an [`ExperimentConfig`] (JSON file, then flag
//! overrides), runs one experiment and writes CSV/JSON/PPM files into the
//! output directory. JSON reports echo the effective configuration.

mod config;
mod heatmap;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::greens::green_truncated;
use crate::lattice::{ball_count_s, enumerate_window, remainder_exponent_fit, weyl_count};
use crate::quantize::{momentum_measure, top_mass_fraction};
use crate::spectral::{self, save_perturbed_csv, SecularEquation};
use crate::stats::{
    certificates, localization_filter, pair_correlation, pair_count, pc_limit, select_filter_params, FilterParams,
    PairCorrConfig,
};

pub use config::{parse_triple, parse_window, ExperimentConfig, FilterConfig, KSpec};
pub use heatmap::{render, Heatmap, Palette};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COVERAGE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_NUMERIC: i32 = 6;

/// Process exit status for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Configuration(_) => EXIT_CONFIG,
        Error::Coverage { .. } | Error::Capacity { .. } => EXIT_COVERAGE,
        Error::Solver { .. } | Error::Pole { .. } | Error::EmptyTruncation { .. } | Error::Degeneracy { .. } => {
            EXIT_SOLVER
        }
        Error::Io { .. } => EXIT_IO,
        Error::Fit(_) | Error::DegenerateMeasure | Error::Normalization(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(name = "scatterlab", version, about = "Point scatterer on the 3-torus with quasimomentum")]
pub struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Quasimomentum `a,b,c` or the preset `paper` (alias `reference`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    k: Option<String>,
    /// Scatterer position `a,b,c`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Extension parameter in (−π, π).
    #[arg(long, global = true, allow_negative_numbers = true)]
    phi: Option<f64>,
    /// Energy window `a:b`.
    #[arg(long, global = true)]
    window: Option<String>,
    /// Truncation exponent: `L = λ^{−delta}`.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Angular width of the heatmap kernel in radians.
    #[arg(long, global = true, default_value_t = 0.05)]
    bandwidth: f64,
    /// Worker threads; falls back to `SCATTER_THREADS`.
    #[arg(long, global = true, env = "SCATTER_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = PaletteArg::Viridis)]
    palette: PaletteArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PaletteArg {
    Gray,
    Viridis,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unperturbed spectrum of the window as CSV.
    Spectrum,
    /// Perturbed eigenvalues, one per gap meeting the window.
    Perturbed,
    /// Momentum measure and heatmap of one perturbed eigenfunction.
    Measure {
        /// Position of the eigenvalue among the roots in the window (from 0).
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Pair correlation against its limit.
    Paircorr {
        #[arg(long, default_value_t = 1.0)]
        d: f64,
        #[arg(long, default_value_t = 400.0)]
        t: f64,
    },
    /// Localization filter with per-eigenvalue certificates.
    Localize {
        #[arg(long, default_value_t = 300.0)]
        t: f64,
    },
    /// Shifted-ball counts and the remainder exponent fit.
    Count {
        #[arg(long, default_value_t = 80.0)]
        r_max: f64,
        #[arg(long, default_value_t = 5.0)]
        r_min: f64,
    },
}

impl Cli {
    /// Configuration file (if any) with flag overrides applied, validated.
    pub fn effective_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(k) = &self.k {
            cfg.k = KSpec::parse(k)?;
        }
        if let Some(x0) = &self.x0 {
            cfg.x0 = parse_triple(x0)?;
        }
        if let Some(phi) = self.phi {
            cfg.phi = phi;
        }
        if let Some(w) = &self.window {
            cfg.window = parse_window(w)?;
        }
        if let Some(d) = self.delta {
            cfg.delta = d;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::param("--threads must be at least 1"));
        }
        // the global pool can only be configured once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = cli.effective_config()?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    match cli.command {
        Command::Spectrum => cmd_spectrum(&cfg),
        Command::Perturbed => cmd_perturbed(&cfg),
        Command::Measure { index } => {
            let palette = match cli.palette {
                PaletteArg::Gray => Palette::Gray,
                PaletteArg::Viridis => Palette::Viridis,
            };
            cmd_measure(&cfg, index, cli.bandwidth, palette)
        }
        Command::Paircorr { d, t } => cmd_paircorr(&cfg, d, t),
        Command::Localize { t } => cmd_localize(&cfg, t),
        Command::Count { r_max, r_min } => cmd_count(&cfg, r_max, r_min),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("reports are plain JSON");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn provenance(cfg: &ExperimentConfig, command: &str) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    })
}

fn finite_or_null(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

/// `spectrum.csv` with the unperturbed modes of the window.
pub fn cmd_spectrum(cfg: &ExperimentConfig) -> Result<()> {
    let spec = enumerate_window(&cfg.quasimomentum()?, cfg.window())?;
    let path = cfg.output_dir.join("spectrum.csv");
    spec.save_csv(&path)?;
    println!("{} modes -> {}", spec.len(), path.display());
    Ok(())
}

/// `perturbed.csv` with one root per gap meeting the window.
pub fn cmd_perturbed(cfg: &ExperimentConfig) -> Result<()> {
    let roots = spectral::perturbed_spectrum(&cfg.quasimomentum()?, &cfg.scatterer()?, cfg.window())?;
    let path = cfg.output_dir.join("perturbed.csv");
    save_perturbed_csv(&roots, &path)?;
    println!("{} eigenvalues -> {}", roots.len(), path.display());
    Ok(())
}

/// Momentum measure of the truncated eigenfunction `g_{λ,L}`, `L = λ^{−δ}`,
/// at the `index`-th root of the window.
pub fn cmd_measure(cfg: &ExperimentConfig, index: usize, bandwidth: f64, palette: Palette) -> Result<()> {
    if !(bandwidth > 0.0) {
        return Err(Error::param(format!("bandwidth {bandwidth} must be positive")));
    }
    let k = cfg.quasimomentum()?;
    let roots = spectral::perturbed_spectrum(&k, &cfg.scatterer()?, cfg.window())?;
    let root = roots.get(index).ok_or_else(|| {
        Error::param(format!("index {index} is out of range: the window holds {} eigenvalues", roots.len()))
    })?;
    let width = root.lambda.max(1.0).powf(-cfg.delta);
    let v = green_truncated(&k, cfg.x0, root.lambda, width)?;
    let mu = momentum_measure(&v, true)?;
    let top = top_mass_fraction(&mu, 1);

    let stem = format!("measure_{index}");
    mu.save_csv(&cfg.output_dir.join(format!("{stem}.csv")))?;
    let image = render(&mu, 360, 180, bandwidth);
    let ppm = cfg.output_dir.join(format!("{stem}.ppm"));
    let file = fs::File::create(&ppm).map_err(|e| Error::io(&ppm, e))?;
    let mut out = std::io::BufWriter::new(file);
    image.write_ppm(&mut out, palette).map_err(|e| Error::io(&ppm, e))?;
    out.flush().map_err(|e| Error::io(&ppm, e))?;

    let mut report = provenance(cfg, "measure");
    report["index"] = json!(index);
    report["lambda"] = json!(root.lambda);
    report["gap_index"] = json!(root.gap_index);
    report["L"] = json!(width);
    report["atoms"] = json!(mu.atoms().len());
    report["top_mass_fraction"] = json!(top);
    report["bandwidth"] = json!(bandwidth);
    write_json(&cfg.output_dir.join(format!("{stem}.json")), &report)?;
    println!("lambda = {} with {} atoms, top mass fraction {top:.6}", root.lambda, mu.atoms().len());
    Ok(())
}

#[derive(Serialize)]
struct PairCorrSummary {
    #[serde(rename = "R")]
    r: f64,
    limit: f64,
    ratio: serde_json::Value,
}

fn pair_summary(spec: &crate::lattice::OrderedSpectrum, d: f64, t: f64) -> Result<PairCorrSummary> {
    let pc = PairCorrConfig::shell(d, t)?;
    let r = pair_correlation(spec, &pc)?;
    let limit = pc_limit(&pc);
    Ok(PairCorrSummary {
        r,
        limit,
        ratio: finite_or_null(r / limit),
    })
}

/// `paircorr.json`: `R` for `ψ = 1_{[1/2,1]}`, `ĥ = 1_{[−D,D]}` against its limit.
pub fn cmd_paircorr(cfg: &ExperimentConfig, d: f64, t: f64) -> Result<()> {
    let spec = enumerate_window(&cfg.quasimomentum()?, cfg.window())?;
    let summary = pair_summary(&spec, d, t)?;
    let pairs = pair_count(&spec, d, t)?;
    let mut report = provenance(cfg, "paircorr");
    report["T"] = json!(t);
    report["D"] = json!(d);
    report["pairs"] = json!(pairs);
    report["pair_corr"] = json!(summary);
    let path = cfg.output_dir.join("paircorr.json");
    write_json(&path, &report)?;
    println!("R = {}, limit = {}, ratio = {}", summary.r, summary.limit, summary.ratio);
    Ok(())
}

/// Resolves `(G, D, E, F)`: missing `E`/`F` come from the canonical selection.
fn filter_params(cfg: &ExperimentConfig, spec: &crate::lattice::OrderedSpectrum, t: f64) -> Result<FilterParams> {
    let fc = &cfg.filter;
    match (fc.e, fc.f) {
        (Some(e), Some(f)) => FilterParams::new(fc.g, fc.d, e, f),
        (e, f) => {
            let chosen = select_filter_params(spec, fc.g, fc.d, t)?;
            FilterParams::new(fc.g, fc.d, e.unwrap_or(chosen.e), f.unwrap_or(chosen.f))
        }
    }
}

/// `localize.json` and `certificates.csv`.
pub fn cmd_localize(cfg: &ExperimentConfig, t: f64) -> Result<()> {
    let k = cfg.quasimomentum()?;
    let spec = enumerate_window(&k, cfg.window())?;
    let params = filter_params(cfg, &spec, t)?;
    let outcome = localization_filter(&spec, &params, t)?;
    let equation = SecularEquation::new(&k, cfg.window[1])?;
    let certs = certificates(&spec, &equation, &cfg.scatterer()?, &outcome)?;
    let min_top = certs.iter().map(|c| c.top_fraction).fold(f64::INFINITY, f64::min);
    let summary = pair_summary(&spec, params.d, t)?;

    let csv_path = cfg.output_dir.join("certificates.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for c in &certs {
        w.serialize(c).map_err(|e| Error::io(&csv_path, std::io::Error::other(e)))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let mut report = provenance(cfg, "localize");
    report["T"] = json!(t);
    report["G"] = json!(params.g);
    report["D"] = json!(params.d);
    report["E"] = json!(params.e);
    report["F"] = json!(params.f);
    report["retained_density"] = json!(outcome.density);
    report["min_top_mass"] = finite_or_null(min_top);
    report["total"] = json!(outcome.total);
    report["retained"] = json!(outcome.retained.len());
    report["removed"] = json!({
        "gap": outcome.removed_gap,
        "cluster": outcome.removed_cluster,
        "tail": outcome.removed_tail,
    });
    report["pair_corr"] = json!(summary);
    write_json(&cfg.output_dir.join("localize.json"), &report)?;
    println!(
        "retained {} of {} (density {:.4}), min top-(E+1) mass {min_top:.6}",
        outcome.retained.len(),
        outcome.total,
        outcome.density
    );
    Ok(())
}

/// `count.json`: `S(R)` on the unit-step grid `r_min, r_min + 1, …, ≤ r_max` and the exponent fit.
pub fn cmd_count(cfg: &ExperimentConfig, r_max: f64, r_min: f64) -> Result<()> {
    if !(r_min > 0.0) {
        return Err(Error::param(format!("r_min = {r_min} must be positive")));
    }
    let k = cfg.quasimomentum()?;
    let radii: Vec<f64> = (0..)
        .map(|i| r_min + i as f64)
        .take_while(|&r| r <= r_max)
        .collect();
    let table: Vec<serde_json::Value> = radii
        .iter()
        .map(|&r| {
            let s = ball_count_s(&k, r);
            json!({"R": r, "S": s, "remainder": s as f64 - weyl_count(r * r)})
        })
        .collect();
    let mut report = provenance(cfg, "count");
    report["r_min"] = json!(r_min);
    report["r_max"] = json!(r_max);
    report["table"] = json!(table);
    match remainder_exponent_fit(&k, &radii) {
        Ok(fit) => {
            report["fit"] = json!({
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual": fit.residual,
                "points_used": fit.points_used,
            });
            println!("remainder exponent {:.4} over {} radii", fit.slope, fit.points_used);
        }
        Err(e) => {
            report["fit"] = serde_json::Value::Null;
            report["fit_error"] = json!(e.to_string());
            println!("fit unavailable: {e}");
        }
    }
    write_json(&cfg.output_dir.join("count.json"), &report)
}
