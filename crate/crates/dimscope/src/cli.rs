//! The `dimscope` command line front end.
//!
//! Subcommands: `generate`, `estimate`, `multiscale`, `baseline`, `curve`.
//! Primary results go to stdout, diagnostics to stderr, data to files. Every
//! output file gets a `<file>.manifest` sidecar recording the resolved flags
//! and seed, so a run can be reproduced bit for bit on the same build.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 fit failure.
//! `DIMSCOPE_THREADS` caps internal parallelism (0 or unset = automatic).

use std::path::{Path, PathBuf};
use std::sync::Once;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::baselines::{corrdim_estimate, gpca_estimate, mpca_profile, pca_spectrum, GpcaCriterion, DEFAULT_CORRDIM_BAND};
use crate::corr::empirical_correlation_integral;
use crate::data::{pairwise_distances, RngHandle};
use crate::datasets::{Family, SyntheticSpec, BLOB_SIDE};
use crate::error::{Error, Result};
use crate::estimator::{estimate_id_global, EstimatorConfig};
use crate::io;
use crate::model::FciParams;
use crate::multiscale::{
    auto_knn_grid, auto_radius_grid, multiscale_with_centers, sample_centers, MultiscaleConfig,
    Scale,
};

#[derive(Parser)]
#[command(
    name = "dimscope",
    version,
    about = "Intrinsic dimension estimation from the full correlation integral"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset.
    Generate(GenerateArgs),
    /// Global intrinsic-dimension estimate of a dataset.
    Estimate(EstimateArgs),
    /// Local estimates over a grid of neighborhood scales.
    Multiscale(MultiscaleArgs),
    /// Classical baseline estimators.
    Baseline(BaselineArgs),
    /// Export the empirical correlation integral, optionally with the model.
    Curve(CurveArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Family: binary|gaussian|hypercube|cmanifold|swissroll|sphere|blobs.
    #[arg(long)]
    family: String,
    /// Intrinsic parameter (defaults depend on the family).
    #[arg(long)]
    d: Option<usize>,
    /// Ambient dimension (defaults depend on the family).
    #[arg(long = "D")]
    ambient: Option<usize>,
    /// Sample count.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Blob count for the blobs family.
    #[arg(long)]
    blobs: Option<usize>,
    /// Post-embedding Gaussian noise standard deviation.
    #[arg(long)]
    noise: Option<f64>,
    /// Output path; `.dset` writes the binary format, anything else CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Maximum curve points kept for the fit.
    #[arg(long, default_value_t = 1000)]
    subsample: usize,
    /// Minimum accepted sample count.
    #[arg(long = "min-samples", default_value_t = 5)]
    min_samples: usize,
    /// Upper bound for the fitted dimension (default max(2 D, 2048)).
    #[arg(long = "d-max")]
    d_max: Option<f64>,
    /// Run the full multistart grid.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    multistart: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the fit report (key=value text).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MultiscaleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Number of randomly drawn centers.
    #[arg(long, default_value_t = 20)]
    centers: usize,
    /// Scale kind: knn|radius.
    #[arg(long = "scale-kind", default_value = "knn")]
    scale_kind: String,
    /// Comma-separated scale list, or `auto`.
    #[arg(long, default_value = "auto")]
    scales: String,
    /// Neighbor count under which local estimates are unreliable.
    #[arg(long = "min-reliable", default_value_t = 20)]
    min_reliable: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the profiles CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Method: corrdim|gpca|mpca.
    #[arg(long)]
    method: String,
    /// Quantile band `qlo,qhi` for corrdim.
    #[arg(long)]
    band: Option<String>,
    /// Criterion for gpca: gap|mass.
    #[arg(long, default_value = "gap")]
    criterion: String,
    /// Number of centers for mpca.
    #[arg(long, default_value_t = 20)]
    centers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Overlay the analytic model, given as `d,rs`.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

/// Runs the CLI on the given argv (program name first); returns the exit code.
pub fn run_cli<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    init_thread_pool();
    let started = Instant::now();
    let outcome = match cli.command {
        Command::Generate(args) => run_generate(args, started),
        Command::Estimate(args) => run_estimate(args, started),
        Command::Multiscale(args) => run_multiscale(args, started),
        Command::Baseline(args) => run_baseline(args, started),
        Command::Curve(args) => run_curve(args, started),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::UnfittableCurve(_) | Error::NoReliableScale => 4,
        _ => 3,
    }
}

fn init_thread_pool() {
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        if let Ok(value) = std::env::var("DIMSCOPE_THREADS") {
            if let Ok(threads) = value.trim().parse::<usize>() {
                if threads > 0 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(threads)
                        .build_global();
                }
            }
        }
    });
}

fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(suffix);
    PathBuf::from(os)
}

struct Manifest {
    command: &'static str,
    flags: Vec<(String, String)>,
}

impl Manifest {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            flags: Vec::new(),
        }
    }

    fn flag(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.flags.push((key.to_string(), value.to_string()));
        self
    }

    fn write(&self, out: &Path, started: Instant) -> Result<()> {
        let path = sibling_path(out, ".manifest");
        let duration_ms = started.elapsed().as_millis();
        io::write_atomic(&path, |w| {
            use std::io::Write;
            writeln!(w, "command={}", self.command)?;
            writeln!(w, "version={}", env!("CARGO_PKG_VERSION"))?;
            for (key, value) in &self.flags {
                writeln!(w, "flag.{key}={value}")?;
            }
            writeln!(w, "duration_ms={duration_ms}")?;
            Ok(())
        })
    }
}

fn resolve_spec(args: &GenerateArgs) -> Result<SyntheticSpec> {
    let family = Family::parse(&args.family)?;
    let n_blobs = args.blobs.unwrap_or(1);
    let needs_d = |d: Option<usize>| {
        d.ok_or_else(|| {
            Error::InvalidSpec(format!("family '{}' requires --d", args.family))
        })
    };
    let (d, ambient) = match family {
        Family::Binary | Family::Gaussian | Family::Hypercube => {
            let d = needs_d(args.d)?;
            (d, args.ambient.unwrap_or(d))
        }
        Family::CManifold => {
            let d = needs_d(args.d)?;
            (d, args.ambient.unwrap_or(2 * d))
        }
        Family::SwissRoll => (args.d.unwrap_or(2), args.ambient.unwrap_or(3)),
        Family::Sphere => {
            let d = needs_d(args.d)?;
            (d, args.ambient.unwrap_or(d + 1))
        }
        Family::Blobs => (
            args.d.unwrap_or(5 * n_blobs),
            args.ambient.unwrap_or(BLOB_SIDE * BLOB_SIDE),
        ),
    };
    let mut spec = SyntheticSpec::new(family, d, ambient, args.n, args.seed);
    spec.n_blobs = n_blobs;
    spec.noise_sigma = args.noise.unwrap_or(0.0);
    spec.validate()?;
    Ok(spec)
}

fn run_generate(args: GenerateArgs, started: Instant) -> Result<()> {
    let spec = resolve_spec(&args)?;
    let data = spec.generate()?;
    io::write_dataset(&args.out, &data)?;
    io::write_atomic(&sibling_path(&args.out, ".meta"), |w| {
        use std::io::Write;
        w.write_all(spec.sidecar().as_bytes())?;
        Ok(())
    })?;
    let mut manifest = Manifest::new("generate");
    manifest
        .flag("family", spec.family.as_str())
        .flag("d", spec.d)
        .flag("D", spec.ambient_dim)
        .flag("n", spec.n_samples)
        .flag("seed", spec.seed)
        .flag("blobs", spec.n_blobs)
        .flag("noise", spec.noise_sigma)
        .flag("out", args.out.display());
    manifest.write(&args.out, started)
}

fn run_estimate(args: EstimateArgs, started: Instant) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    let cfg = EstimatorConfig {
        subsample: args.subsample,
        min_samples: args.min_samples,
        d_max: args.d_max,
        multistart: args.multistart,
        rng: RngHandle::new(args.seed),
    };
    let est = estimate_id_global(&data, &cfg)?;
    io::write_atomic(&args.out, |w| {
        use std::io::Write;
        writeln!(w, "d_est={}", est.d_est)?;
        writeln!(w, "d_sphere={}", est.fit.d_sphere)?;
        writeln!(w, "r_s={}", est.fit.r_s)?;
        writeln!(w, "rss={}", est.fit.rss)?;
        writeln!(w, "converged={}", est.fit.converged)?;
        writeln!(w, "n_curve_points={}", est.fit.n_curve_points)?;
        writeln!(w, "n_samples_used={}", est.n_samples_used)?;
        Ok(())
    })?;
    let mut manifest = Manifest::new("estimate");
    manifest
        .flag("in", args.input.display())
        .flag("subsample", args.subsample)
        .flag("min-samples", args.min_samples)
        .flag(
            "d-max",
            args.d_max.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
        )
        .flag("multistart", args.multistart)
        .flag("seed", args.seed)
        .flag("out", args.out.display());
    manifest.write(&args.out, started)?;
    println!("{}", est.d_est);
    Ok(())
}

fn parse_scales(kind: &str, text: &str, data_len: usize) -> Result<Vec<Scale>> {
    match (kind, text) {
        ("knn", "auto") => Ok(auto_knn_grid(data_len)),
        ("knn", list) => list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map(Scale::Knn)
                    .map_err(|e| Error::Parse(format!("neighbor count '{tok}': {e}")))
            })
            .collect(),
        ("radius", "auto") => Err(Error::InvalidInput(
            "radius auto grid is resolved against the sampled centers".into(),
        )),
        ("radius", list) => list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map(Scale::Radius)
                    .map_err(|e| Error::Parse(format!("radius '{tok}': {e}")))
            })
            .collect(),
        (other, _) => Err(Error::InvalidInput(format!(
            "unknown scale kind '{other}' (expected knn or radius)"
        ))),
    }
}

fn run_multiscale(args: MultiscaleArgs, started: Instant) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    let rng = RngHandle::new(args.seed);
    let centers = sample_centers(&data, args.centers, &rng)?;
    let scales = if args.scale_kind == "radius" && args.scales == "auto" {
        auto_radius_grid(&data, &centers)?
    } else {
        parse_scales(&args.scale_kind, &args.scales, data.n_samples())?
    };
    let cfg = MultiscaleConfig {
        n_reliable: args.min_reliable,
        estimator: EstimatorConfig {
            rng,
            ..EstimatorConfig::default()
        },
    };
    let result = multiscale_with_centers(&data, &centers, &scales, &cfg)?;
    io::write_profiles_csv(&args.out, &result.profiles)?;
    let mut manifest = Manifest::new("multiscale");
    manifest
        .flag("in", args.input.display())
        .flag("centers", args.centers)
        .flag("scale-kind", &args.scale_kind)
        .flag("scales", &args.scales)
        .flag("min-reliable", args.min_reliable)
        .flag("seed", args.seed)
        .flag("out", args.out.display())
        .flag("d_summary", result.d_summary);
    manifest.write(&args.out, started)?;
    println!("{}", result.d_summary);
    Ok(())
}

fn parse_band(text: &str) -> Result<(f64, f64)> {
    let mut parts = text.split(',');
    let lo = parts
        .next()
        .and_then(|t| t.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Parse(format!("band '{text}' is not 'qlo,qhi'")))?;
    let hi = parts
        .next()
        .and_then(|t| t.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Parse(format!("band '{text}' is not 'qlo,qhi'")))?;
    if parts.next().is_some() {
        return Err(Error::Parse(format!("band '{text}' has extra fields")));
    }
    Ok((lo, hi))
}

fn run_baseline(args: BaselineArgs, started: Instant) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    let mut manifest = Manifest::new("baseline");
    manifest
        .flag("in", args.input.display())
        .flag("method", &args.method)
        .flag("out", args.out.display());
    match args.method.as_str() {
        "corrdim" => {
            let band = match &args.band {
                Some(text) => parse_band(text)?,
                None => DEFAULT_CORRDIM_BAND,
            };
            let fit = corrdim_estimate(&data, band)?;
            io::write_atomic(&args.out, |w| {
                use std::io::Write;
                writeln!(w, "d_est={}", fit.d_est)?;
                writeln!(w, "q_lo={}", fit.fit_band.0)?;
                writeln!(w, "q_hi={}", fit.fit_band.1)?;
                writeln!(w, "n_points_used={}", fit.n_points_used)?;
                writeln!(w, "r_squared={}", fit.r_squared)?;
                Ok(())
            })?;
            manifest.flag("band", format!("{},{}", band.0, band.1));
            manifest.write(&args.out, started)?;
            println!("{}", fit.d_est);
        }
        "gpca" => {
            let criterion = match args.criterion.as_str() {
                "gap" => GpcaCriterion::Gap,
                "mass" => GpcaCriterion::Mass(0.95),
                other => {
                    return Err(Error::InvalidInput(format!(
                        "unknown criterion '{other}' (expected gap or mass)"
                    )))
                }
            };
            let spectrum = pca_spectrum(&data)?;
            let estimate = gpca_estimate(&spectrum, criterion)?;
            io::write_spectrum_csv(&args.out, &spectrum)?;
            manifest.flag("criterion", &args.criterion);
            manifest.write(&args.out, started)?;
            println!("{estimate}");
        }
        "mpca" => {
            let rng = RngHandle::new(args.seed);
            let centers = sample_centers(&data, args.centers, &rng)?;
            let dists = pairwise_distances(&data)?;
            let radii: Vec<f64> = (1..=9)
                .map(|k| dists.quantile(k as f64 / 10.0))
                .collect::<Result<Vec<_>>>()?;
            let profile = mpca_profile(&data, &centers, &radii)?;
            io::write_mpca_csv(&args.out, &profile)?;
            manifest
                .flag("centers", args.centers)
                .flag("seed", args.seed);
            manifest.write(&args.out, started)?;
            match profile.mass_bound {
                Some((lo, hi)) => println!("{lo} {hi}"),
                None => println!(),
            }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected corrdim, gpca or mpca)"
            )))
        }
    }
    Ok(())
}

fn run_curve(args: CurveArgs, started: Instant) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    let dists = pairwise_distances(&data)?;
    let curve = empirical_correlation_integral(&dists)?;
    match &args.model {
        Some(text) => {
            let (d, r_s) = parse_band(text)
                .map_err(|_| Error::Parse(format!("model '{text}' is not 'd,rs'")))?;
            let params = FciParams::new(d, r_s)?;
            io::write_curve_with_model_csv(&args.out, &curve, &params)?;
        }
        None => io::write_curve_csv(&args.out, &curve)?,
    }
    let mut manifest = Manifest::new("curve");
    manifest
        .flag("in", args.input.display())
        .flag(
            "model",
            args.model.clone().unwrap_or_else(|| "none".into()),
        )
        .flag("out", args.out.display());
    manifest.write(&args.out, started)
}
