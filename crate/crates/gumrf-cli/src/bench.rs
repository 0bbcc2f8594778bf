//! Wall-clock benchmark harness comparing discrete-field generation
//! routes. Per-method setup (spectrum factorization, neighbor tables)
//! runs outside the timed region; each rep is one full field.

use anyhow::Result;
use gumrf::covariance::CovarianceSpec;
use gumrf::field::RealFieldStack;
use gumrf::gmrf::{sample_spectral, FourierSampler};
use gumrf::gum::{dgum_field, ClassSet};
use gumrf::lattice::{GridShape, NeighborhoodSystem};
use gumrf::potts::{chromatic_gibbs_sample, gibbs_sample, PottsSpec};
use gumrf::rng::{RngSeed, StreamRng};
use std::time::Instant;

#[derive(Debug, Clone, Copy)]
pub struct BenchStats {
    pub median_ms: f64,
    pub iqr_ms: f64,
    pub reps: usize,
}

/// Time `reps` calls of `f`, reporting the median and interquartile range.
pub fn time_reps(reps: usize, mut f: impl FnMut(usize)) -> BenchStats {
    let mut times: Vec<f64> = (0..reps)
        .map(|r| {
            let t0 = Instant::now();
            f(r);
            t0.elapsed().as_secs_f64() * 1e3
        })
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    BenchStats {
        median_ms: gumrf::stats::quantile_sorted(&times, 0.5),
        iqr_ms: gumrf::stats::quantile_sorted(&times, 0.75)
            - gumrf::stats::quantile_sorted(&times, 0.25),
        reps,
    }
}

fn rep_seed(seed: RngSeed, r: usize, k: usize) -> RngSeed {
    StreamRng::derive_seed(seed, &[0x200, r as u64, k as u64])
}

/// One discrete field per rep via the circulant route; the spectrum
/// factorization is shared setup.
pub fn bench_dgum_fourier(
    shape: GridShape,
    num_classes: usize,
    cov: &CovarianceSpec,
    reps: usize,
    seed: RngSeed,
) -> Result<BenchStats> {
    let sampler = FourierSampler::new(shape, cov)?;
    let classes = ClassSet::default_k(num_classes)?;
    Ok(time_reps(reps, |r| {
        let comps = (0..num_classes - 1)
            .map(|k| sampler.sample(rep_seed(seed, r, k)))
            .collect();
        let z = RealFieldStack::new(comps).expect("same shape");
        dgum_field(&z, &classes).expect("valid stack");
    }))
}

/// One discrete field per rep via random-band spectral sampling.
pub fn bench_dgum_spectral(
    shape: GridShape,
    num_classes: usize,
    cov: &CovarianceSpec,
    bands: usize,
    reps: usize,
    seed: RngSeed,
) -> Result<BenchStats> {
    let classes = ClassSet::default_k(num_classes)?;
    let cov = *cov;
    Ok(time_reps(reps, |r| {
        let comps = (0..num_classes - 1)
            .map(|k| sample_spectral(shape, &cov, bands, rep_seed(seed, r, k)).expect("valid"))
            .collect();
        let z = RealFieldStack::new(comps).expect("same shape");
        dgum_field(&z, &classes).expect("valid stack");
    }))
}

/// Scheme for the Gibbs baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GibbsScheme {
    Sequential,
    Chromatic,
}

/// One Gibbs run to convergence per rep (the run errors if the stopping
/// rule never fires, so the timing always covers a converged field).
pub fn bench_gibbs_convergence(
    shape: GridShape,
    spec: &PottsSpec,
    scheme: GibbsScheme,
    max_iters: usize,
    reps: usize,
    seed: RngSeed,
) -> Result<BenchStats> {
    let mut failed = None;
    let stats = time_reps(reps, |r| {
        let s = rep_seed(seed, r, 0);
        let result = match scheme {
            GibbsScheme::Sequential => gibbs_sample(shape, spec, s, max_iters),
            GibbsScheme::Chromatic => chromatic_gibbs_sample(shape, spec, s, max_iters),
        };
        match result {
            Ok(res) if res.converged => {}
            Ok(_) => failed = Some(anyhow::anyhow!("Gibbs did not converge in {max_iters} sweeps")),
            Err(e) => failed = Some(e.into()),
        }
    });
    match failed {
        Some(e) => Err(e),
        None => Ok(stats),
    }
}

/// Default baseline model for the benchmark: attractive Potts on the
/// four-neighborhood.
pub fn default_potts(num_classes: usize, beta: f64) -> Result<PottsSpec> {
    Ok(PottsSpec::new(num_classes, beta, NeighborhoodSystem::Four)?)
}
