use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gumrf::covariance::CovarianceSpec;
use gumrf::gmrf::{sample_multivariate, Method, MultivariateGmrfSpec};
use gumrf::gum::{
    gum_field, pi_map, sample_dgum, sample_labels_from_pi, ClassSet, SimplexVertices,
};
use gumrf::field::{RealFieldStack};
use gumrf::lattice::{GridShape, NeighborhoodSystem};
use gumrf::potts::{chromatic_gibbs_sample, gibbs_sample, PottsSpec};
use gumrf::rng::{RngSeed, StreamRng};
use gumrf::stats;
use gumrf_cli::bench::{
    bench_dgum_fourier, bench_dgum_spectral, bench_gibbs_convergence, GibbsScheme,
};
use gumrf_cli::config::{parse_list, Config};
use gumrf_cli::fileio;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "gumrf", version, about = "Discrete random field sampling toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a discrete label field (Gaussian stack + nearest simplex vertex)
    SampleDgum(SampleDgumArgs),
    /// Sample the smoothed scalar field of class labels
    SampleGum(SampleGumArgs),
    /// Sample labels independently per site from the softmax probabilities
    SamplePiLabels(SamplePiArgs),
    /// Sample the raw Gaussian component stack
    SampleGmrf(SampleGmrfArgs),
    /// Sample a Potts field by Gibbs updates
    SamplePotts(SamplePottsArgs),
    /// Summary statistics over replicated samples
    Stats(StatsArgs),
    /// Softmax probability triplets for three classes, one CSV row per site
    ExportBarycentric(BarycentricArgs),
    /// Compare wall-clock cost of the sampling routes
    Bench(BenchArgs),
}

/// Options shared by every sampling command; unset flags fall back to the
/// config file, then to defaults.
#[derive(Args, Clone)]
struct CommonOpts {
    /// Flat key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Number of classes K
    #[arg(long)]
    classes: Option<usize>,
    /// Explicit class labels, comma separated and strictly increasing
    #[arg(long)]
    omegas: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    /// fourier | spectral | cholesky
    #[arg(long)]
    method: Option<String>,
    /// Band count for the spectral method
    #[arg(long)]
    bands: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

struct Resolved {
    shape: GridShape,
    classes: ClassSet,
    cov: CovarianceSpec,
    method: Method,
    bands: usize,
    seed: RngSeed,
}

fn parse_method(raw: &str) -> Result<Method> {
    Ok(match raw {
        "fourier" => Method::Fourier,
        "spectral" => Method::Spectral,
        "cholesky" => Method::Cholesky,
        other => bail!("unknown method `{other}` (fourier | spectral | cholesky)"),
    })
}

impl CommonOpts {
    fn resolve(&self) -> Result<Resolved> {
        let cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let height = cfg.pick(self.height, "height", 64)?;
        let width = cfg.pick(self.width, "width", 64)?;
        let num_classes = cfg.pick(self.classes, "classes", 2)?;
        let omegas = cfg.pick_opt(self.omegas.clone(), "omegas")?;
        let sigma = cfg.pick(self.sigma, "sigma", 1.0)?;
        let kappa = cfg.pick(self.kappa, "kappa", 0.1)?;
        let nu = cfg.pick(self.nu, "nu", 1.0)?;
        let method_raw = cfg.pick(self.method.clone(), "method", "fourier".to_string())?;
        let bands = cfg.pick(self.bands, "bands", 5000)?;
        let seed = cfg.pick(self.seed, "seed", 0)?;

        let classes = match omegas {
            Some(raw) => {
                let list = parse_list(&raw)?;
                let set = ClassSet::new(list)?;
                if set.len() != num_classes && self.classes.is_some() {
                    bail!("--classes disagrees with the --omegas list length");
                }
                set
            }
            None => ClassSet::default_k(num_classes)?,
        };
        let resolved = Resolved {
            shape: GridShape::new(height, width)?,
            classes,
            cov: CovarianceSpec::new(sigma, kappa, nu)?,
            method: parse_method(&method_raw)?,
            bands,
            seed: RngSeed(seed),
        };
        eprintln!(
            "resolved: height={height} width={width} classes={:?} sigma={sigma} \
             kappa={kappa} nu={nu} method={method_raw} bands={bands} seed={seed}",
            resolved.classes.omegas()
        );
        Ok(resolved)
    }

    fn gmrf_spec(&self, r: &Resolved) -> Result<MultivariateGmrfSpec> {
        Ok(MultivariateGmrfSpec::balanced_isotropic(
            r.classes.len(),
            r.cov,
            r.method,
            r.bands,
        )?)
    }
}

#[derive(Args)]
struct SampleDgumArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Output PGM image
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleGumArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Softmax scale parameter
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Output field file (single component)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SamplePiArgs {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Output PGM image
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleGmrfArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Output field file (K-1 components)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SamplePottsArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    classes: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    /// four | eight
    #[arg(long)]
    neighborhood: Option<String>,
    /// sequential | chromatic
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output PGM image
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[command(subcommand)]
    which: StatsCmd,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Class-balance bias and spread across replicates
    Balance {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 50)]
        reps: usize,
    },
    /// Label agreement against pair distance
    Pairwise {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        /// Sampled pair budget; 0 means every pair
        #[arg(long, default_value_t = 200_000)]
        pairs: usize,
        #[arg(long, default_value_t = 60)]
        max_distance: usize,
        /// Output CSV
        #[arg(long)]
        out: PathBuf,
    },
    /// Neighbor agreement as the softmax scale c sweeps
    PhaseC {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated c values
        #[arg(long)]
        cs: String,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Neighbor agreement as the range parameter kappa sweeps
    PhaseKappa {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated kappa values
        #[arg(long)]
        kappas: String,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Empirical axis-lag covariance of the Gaussian field vs the model
    Covariance {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long, default_value_t = 30)]
        max_lag: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct BarycentricArgs {
    #[command(flatten)]
    common: CommonOpts,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Output CSV of per-site probability triplets
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated square grid sizes
    #[arg(long, default_value = "64,128,256")]
    sizes: String,
    /// Comma-separated discrete-field methods: fourier,spectral
    #[arg(long, default_value = "fourier")]
    methods: String,
    #[arg(long, default_value_t = 2)]
    classes: usize,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 2000)]
    bands: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    if let Ok(raw) = std::env::var("GUMRF_THREADS") {
        let threads: usize = raw
            .parse()
            .with_context(|| format!("GUMRF_THREADS=`{raw}` is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match Cli::parse().cmd {
        Cmd::SampleDgum(args) => {
            let r = args.common.resolve()?;
            let spec = args.common.gmrf_spec(&r)?;
            let field = sample_dgum(r.shape, &spec, &r.classes, r.seed)?;
            fileio::write_label_pgm(&args.out, &field, &r.classes)?;
        }
        Cmd::SampleGum(args) => {
            let r = args.common.resolve()?;
            let spec = args.common.gmrf_spec(&r)?;
            let z = sample_multivariate(r.shape, &spec, r.seed)?;
            let field = gum_field(&z, args.c, &r.classes)?;
            fileio::write_field_file(&args.out, &RealFieldStack::new(vec![field])?)?;
        }
        Cmd::SamplePiLabels(args) => {
            let r = args.common.resolve()?;
            let spec = args.common.gmrf_spec(&r)?;
            let z = sample_multivariate(r.shape, &spec, r.seed)?;
            let field = sample_labels_from_pi(&z, args.c, &r.classes, r.seed)?;
            fileio::write_label_pgm(&args.out, &field, &r.classes)?;
        }
        Cmd::SampleGmrf(args) => {
            let r = args.common.resolve()?;
            let spec = args.common.gmrf_spec(&r)?;
            let z = sample_multivariate(r.shape, &spec, r.seed)?;
            fileio::write_field_file(&args.out, &z)?;
        }
        Cmd::SamplePotts(args) => run_potts(args)?,
        Cmd::Stats(args) => run_stats(args)?,
        Cmd::ExportBarycentric(args) => {
            let r = args.common.resolve()?;
            if r.classes.len() != 3 {
                bail!("barycentric export needs exactly 3 classes");
            }
            let spec = args.common.gmrf_spec(&r)?;
            let z = sample_multivariate(r.shape, &spec, r.seed)?;
            let vertices = SimplexVertices::new(2)?;
            let soft = pi_map(&z, args.c, &vertices)?;
            let rows: Vec<Vec<f64>> = (0..r.shape.num_sites())
                .map(|s| soft.site_probs(s).to_vec())
                .collect();
            fileio::write_csv(&args.out, "p0,p1,p2", &rows)?;
        }
        Cmd::Bench(args) => run_bench(args)?,
    }
    Ok(())
}

fn run_potts(args: SamplePottsArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let height = cfg.pick(args.height, "height", 64)?;
    let width = cfg.pick(args.width, "width", 64)?;
    let classes = cfg.pick(args.classes, "classes", 2)?;
    let beta = cfg.pick(args.beta, "beta", 0.5)?;
    let neighborhood = cfg.pick(args.neighborhood, "neighborhood", "four".to_string())?;
    let scheme = cfg.pick(args.scheme, "scheme", "sequential".to_string())?;
    let max_iters = cfg.pick(args.max_iters, "max_iters", 1000)?;
    let seed = cfg.pick(args.seed, "seed", 0)?;
    eprintln!(
        "resolved: height={height} width={width} classes={classes} beta={beta} \
         neighborhood={neighborhood} scheme={scheme} max_iters={max_iters} seed={seed}"
    );

    let system = match neighborhood.as_str() {
        "four" => NeighborhoodSystem::Four,
        "eight" => NeighborhoodSystem::Eight,
        other => bail!("unknown neighborhood `{other}` (four | eight)"),
    };
    let shape = GridShape::new(height, width)?;
    let spec = PottsSpec::new(classes, beta, system)?;
    let result = match scheme.as_str() {
        "sequential" => gibbs_sample(shape, &spec, RngSeed(seed), max_iters)?,
        "chromatic" => chromatic_gibbs_sample(shape, &spec, RngSeed(seed), max_iters)?,
        other => bail!("unknown scheme `{other}` (sequential | chromatic)"),
    };
    eprintln!(
        "gibbs: iterations={} converged={}",
        result.iterations, result.converged
    );
    let class_set = ClassSet::default_k(classes)?;
    fileio::write_label_pgm(&args.out, &result.field, &class_set)?;
    Ok(())
}

fn run_stats(args: StatsArgs) -> Result<()> {
    match args.which {
        StatsCmd::Balance { common, reps } => {
            let r = common.resolve()?;
            let spec = common.gmrf_spec(&r)?;
            let mut f0 = Vec::with_capacity(reps);
            for rep in 0..reps {
                let seed = StreamRng::derive_seed(r.seed, &[0x300, rep as u64]);
                let field = sample_dgum(r.shape, &spec, &r.classes, seed)?;
                f0.push(stats::class_frequencies(&field, &r.classes)?[0]);
            }
            let report = stats::balance_report(&f0, r.classes.len())?;
            println!(
                "mean={} bias={} std={}",
                report.mean, report.bias, report.std
            );
        }
        StatsCmd::Pairwise {
            common,
            reps,
            pairs,
            max_distance,
            out,
        } => {
            let r = common.resolve()?;
            let spec = common.gmrf_spec(&r)?;
            let fields: Vec<_> = (0..reps)
                .map(|rep| {
                    let seed = StreamRng::derive_seed(r.seed, &[0x300, rep as u64]);
                    sample_dgum(r.shape, &spec, &r.classes, seed)
                })
                .collect::<gumrf::Result<_>>()?;
            let budget = if pairs == 0 {
                stats::PairBudget::All
            } else {
                stats::PairBudget::Sampled(pairs)
            };
            let bins = stats::pairwise_similarity(&fields, budget, max_distance, r.seed)?;
            let rows: Vec<Vec<f64>> = bins
                .iter()
                .map(|b| vec![b.distance, b.agreement, b.pairs as f64])
                .collect();
            fileio::write_csv(&out, "distance,agreement,pairs", &rows)?;
        }
        StatsCmd::PhaseC {
            common,
            cs,
            reps,
            out,
        } => {
            let r = common.resolve()?;
            let cs: Vec<f64> = parse_list(&cs)?;
            let points = stats::phase_curve_c(
                r.shape,
                r.classes.len(),
                r.cov,
                &cs,
                r.method,
                r.bands,
                reps,
                r.seed,
            )?;
            fileio::write_curve_csv(&out, &points)?;
        }
        StatsCmd::PhaseKappa {
            common,
            kappas,
            reps,
            out,
        } => {
            let r = common.resolve()?;
            let kappas: Vec<f64> = parse_list(&kappas)?;
            let points = stats::phase_curve_kappa(
                r.shape,
                r.classes.len(),
                r.cov.sigma,
                r.cov.nu,
                &kappas,
                r.method,
                r.bands,
                reps,
                r.seed,
            )?;
            fileio::write_curve_csv(&out, &points)?;
        }
        StatsCmd::Covariance {
            common,
            reps,
            max_lag,
            out,
        } => {
            let r = common.resolve()?;
            let spec = common.gmrf_spec(&r)?;
            let fields: Vec<_> = (0..reps)
                .map(|rep| {
                    let seed = StreamRng::derive_seed(r.seed, &[0x300, rep as u64]);
                    let z = sample_multivariate(r.shape, &spec, seed)?;
                    Ok(z.component(0).clone())
                })
                .collect::<gumrf::Result<_>>()?;
            let est = stats::empirical_covariance(&fields)?;
            let rows: Vec<Vec<f64>> = (0..=max_lag.min(r.shape.width() - 1))
                .map(|d| {
                    let got = if d < r.shape.height() {
                        0.5 * (est.at_lag(0, d) + est.at_lag(d, 0))
                    } else {
                        est.at_lag(0, d)
                    };
                    let dist = gumrf::lattice::torus_lag_distance((0, d), r.shape);
                    vec![d as f64, got, gumrf::covariance::matern(dist, &r.cov)]
                })
                .collect();
            fileio::write_csv(&out, "lag,estimate,model", &rows)?;
        }
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let sizes: Vec<usize> = parse_list(&args.sizes)?;
    let methods: Vec<String> = parse_list(&args.methods)?;
    let cov = CovarianceSpec::new(args.sigma, args.kappa, args.nu)?;
    let seed = RngSeed(args.seed);

    println!("route,size,median_ms,iqr_ms");
    let mut best_dgum = f64::INFINITY;
    let mut best_gibbs = f64::INFINITY;
    for &size in &sizes {
        let shape = GridShape::new(size, size)?;
        for method in &methods {
            let stats = match method.as_str() {
                "fourier" => bench_dgum_fourier(shape, args.classes, &cov, args.reps, seed)?,
                "spectral" => bench_dgum_spectral(
                    shape,
                    args.classes,
                    &cov,
                    args.bands,
                    args.reps,
                    seed,
                )?,
                other => bail!("unknown bench method `{other}` (fourier | spectral)"),
            };
            println!("dgum-{method},{size},{},{}", stats.median_ms, stats.iqr_ms);
            best_dgum = best_dgum.min(stats.median_ms);
        }
        let potts = gumrf_cli::bench::default_potts(args.classes, args.beta)?;
        let stats = bench_gibbs_convergence(
            shape,
            &potts,
            GibbsScheme::Chromatic,
            args.max_iters,
            args.reps,
            seed,
        )?;
        println!("chromatic-gibbs,{size},{},{}", stats.median_ms, stats.iqr_ms);
        best_gibbs = best_gibbs.min(stats.median_ms);
    }
    println!("# best-gibbs / best-dgum median ratio: {}", best_gibbs / best_dgum);
    Ok(())
}
