//! End-to-end acceptance gate: nine criteria, one test each, every
//! tolerance pinned in the assertion. Each test prints a single
//! `criterion N (...): pass|fail` line.

use gumrf::covariance::{matern, CovarianceSpec};
use gumrf::field::RealField;
use gumrf::gmrf::{
    cholesky_factor, sample_spectral, FourierSampler, Method, MultivariateGmrfSpec,
};
use gumrf::gum::{sample_dgum, ClassSet, SimplexVertices};
use gumrf::lattice::{GridShape, NeighborhoodSystem};
use gumrf::potts::{ChromaticChain, GibbsChain, PottsSpec};
use gumrf::rng::{RngSeed, StreamRng};
use gumrf::stats::{
    balance_report, class_frequencies, empirical_covariance, neighbor_agreement,
    pairwise_similarity, phase_curve_c, PairBudget,
};
use gumrf_cli::bench::{bench_dgum_fourier, bench_gibbs_convergence, GibbsScheme};

fn report(criterion: &str, ok: bool) {
    println!("criterion {criterion}: {}", if ok { "pass" } else { "fail" });
    assert!(ok, "criterion {criterion} failed");
}

fn paper_cov() -> CovarianceSpec {
    CovarianceSpec::new(1.0, 0.1, 1.0).unwrap()
}

fn rep_seed(base: u64, r: usize) -> RngSeed {
    StreamRng::derive_seed(RngSeed(base), &[0x400, r as u64])
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn criterion_1_simplex_geometry() {
    let t0 = std::time::Instant::now();
    let mut ok = true;
    for p in 1..=10usize {
        let v = SimplexVertices::new(p).unwrap();
        let pairwise = (2.0 * (p + 1) as f64 / p as f64).sqrt();
        let mut centroid = vec![0.0; p];
        for i in 0..=p {
            let vi = v.vertex(i);
            ok &= (dot(vi, vi).sqrt() - 1.0).abs() < 1e-12;
            for j in (i + 1)..=p {
                let vj = v.vertex(j);
                let d: f64 = vi
                    .iter()
                    .zip(vj)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                ok &= (d - pairwise).abs() < 1e-12;
            }
            for (c, x) in centroid.iter_mut().zip(vi) {
                *c += x;
            }
        }
        ok &= centroid.iter().all(|c| c.abs() < 1e-12);
    }
    ok &= t0.elapsed().as_secs_f64() < 1.0;
    report("1 (simplex geometry, dims 1-10, tol 1e-12, under 1 s)", ok);
}

#[test]
fn criterion_2_gaussian_covariance_both_routes() {
    let shape = GridShape::new(64, 64).unwrap();
    let cov = paper_cov();
    let mut ok = true;

    let sampler = FourierSampler::new(shape, &cov).unwrap();
    let fields: Vec<RealField> = (0..2000).map(|r| sampler.sample(rep_seed(1, r))).collect();
    let est = empirical_covariance(&fields).unwrap();
    ok &= (est.at_lag(0, 0) - 1.0).abs() < 0.1;
    ok &= (est.at_lag(0, 1) - matern(1.0, &cov)).abs() < 0.03;
    for d in 1..=30usize {
        let got = 0.5 * (est.at_lag(0, d) + est.at_lag(d, 0));
        ok &= (got - matern(d as f64, &cov)).abs() < 0.05;
    }

    let spectral: Vec<RealField> = (0..500)
        .map(|r| sample_spectral(shape, &cov, 5000, rep_seed(2, r)).unwrap())
        .collect();
    for d in 0..=30usize {
        let got = plane_lag(&spectral, d);
        ok &= (got - matern(d as f64, &cov)).abs() < 0.05;
    }
    report(
        "2 (Matern covariance, Fourier 2000 reps and spectral 5000 bands x 500 reps, \
         lags 0-30 within 0.05)",
        ok,
    );
}

/// Non-wrapping axis-lag covariance estimate.
fn plane_lag(fields: &[RealField], d: usize) -> f64 {
    let shape = fields[0].shape();
    let (h, w) = (shape.height(), shape.width());
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in fields {
        let z = f.values();
        for r in 0..h {
            for c in 0..w - d {
                sum += z[shape.index(r, c)] * z[shape.index(r, c + d)];
                count += 1;
            }
        }
        for r in 0..h - d {
            for c in 0..w {
                sum += z[shape.index(r, c)] * z[shape.index(r + d, c)];
                count += 1;
            }
        }
    }
    sum / count as f64
}

#[test]
fn criterion_3_fourier_matches_dense_factorization() {
    let shape = GridShape::new(16, 16).unwrap();
    let cov = CovarianceSpec::new(1.0, 0.6, 1.0).unwrap();
    let reps = 5000;
    let sampler = FourierSampler::new(shape, &cov).unwrap();
    let fourier: Vec<RealField> = (0..reps).map(|r| sampler.sample(rep_seed(3, r))).collect();
    let factor = cholesky_factor(shape, &cov).unwrap();
    let chol: Vec<RealField> = (0..reps).map(|r| factor.sample(rep_seed(4, r))).collect();
    let ef = empirical_covariance(&fourier).unwrap();
    let ec = empirical_covariance(&chol).unwrap();
    let mut ok = true;
    for d in 0..=8usize {
        ok &= (ef.at_lag(0, d) - ec.at_lag(0, d)).abs() < 0.05;
        ok &= (ef.at_lag(d, 0) - ec.at_lag(d, 0)).abs() < 0.05;
    }
    report(
        "3 (Fourier vs dense Cholesky on 16x16, 5000 reps, axis lags within 0.05)",
        ok,
    );
}

#[test]
fn criterion_4_class_balance_across_k_and_methods() {
    let shape = GridShape::new(150, 150).unwrap();
    let cov = paper_cov();
    let reps = 50;
    let mut ok = true;
    for method in [Method::Fourier, Method::Spectral] {
        for k in 2..=7usize {
            let classes = ClassSet::default_k(k).unwrap();
            let spec =
                MultivariateGmrfSpec::balanced_isotropic(k, cov, method, 2000).unwrap();
            let mut f0 = Vec::with_capacity(reps);
            for r in 0..reps {
                let seed = StreamRng::derive_seed(RngSeed(5), &[k as u64, r as u64]);
                let field = sample_dgum(shape, &spec, &classes, seed).unwrap();
                f0.push(class_frequencies(&field, &classes).unwrap()[0]);
            }
            let rep = balance_report(&f0, k).unwrap();
            let this_ok = rep.bias <= 0.03 && rep.std >= 0.02 && rep.std <= 0.12;
            if !this_ok {
                eprintln!(
                    "balance {method:?} K={k}: bias {} std {}",
                    rep.bias, rep.std
                );
            }
            ok &= this_ok;
        }
    }
    report(
        "4 (class balance on 150x150, K=2..7, Fourier and spectral: bias <= 0.03, \
         std in [0.02, 0.12] over 50 reps)",
        ok,
    );
}

#[test]
fn criterion_5_gibbs_matches_exact_enumeration() {
    let shape = GridShape::new(3, 3).unwrap();
    let beta = 0.3;
    let spec = PottsSpec::new(2, beta, NeighborhoodSystem::Four).unwrap();

    // exact Boltzmann distribution, each undirected torus edge once
    let mut exact = vec![0.0f64; 512];
    for (config, p) in exact.iter_mut().enumerate() {
        let label = |r: usize, c: usize| (config >> shape.index(r % 3, c % 3)) & 1;
        let mut same = 0u32;
        for r in 0..3 {
            for c in 0..3 {
                same += (label(r, c) == label(r, c + 1)) as u32;
                same += (label(r, c) == label(r + 1, c)) as u32;
            }
        }
        *p = (beta * same as f64).exp();
    }
    let z: f64 = exact.iter().sum();
    for p in &mut exact {
        *p /= z;
    }

    let mut chain = GibbsChain::new(shape, &spec, RngSeed(6));
    for _ in 0..1000 {
        chain.sweep();
    }
    let sweeps = 2_000_000u64;
    let mut counts = vec![0u64; 512];
    for _ in 0..sweeps {
        chain.sweep();
        let idx: usize = chain
            .field()
            .labels()
            .iter()
            .enumerate()
            .map(|(i, &l)| (l as usize) << i)
            .sum();
        counts[idx] += 1;
    }
    let tv: f64 = counts
        .iter()
        .zip(&exact)
        .map(|(&c, &p)| (c as f64 / sweeps as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    report(
        "5 (Gibbs vs exact enumeration, 3x3 binary, beta 0.3, total variation <= 0.02)",
        tv <= 0.02,
    );
}

#[test]
fn criterion_6_similarity_decays_to_chance() {
    let shape = GridShape::new(150, 150).unwrap();
    let cov = paper_cov();
    let reps = 20;
    let mut ok = true;
    for (k, target_tol) in [(2usize, 0.1), (7usize, 0.05)] {
        let classes = ClassSet::default_k(k).unwrap();
        let spec = MultivariateGmrfSpec::balanced_isotropic(k, cov, Method::Fourier, 0).unwrap();
        let fields: Vec<_> = (0..reps)
            .map(|r| {
                let seed = StreamRng::derive_seed(RngSeed(7), &[k as u64, r as u64]);
                sample_dgum(shape, &spec, &classes, seed).unwrap()
            })
            .collect();
        let bins =
            pairwise_similarity(&fields, PairBudget::Sampled(2_000_000), 60, RngSeed(8)).unwrap();
        // monotone decay up to Monte-Carlo noise
        for pair in bins.windows(2) {
            ok &= pair[1].agreement <= pair[0].agreement + 0.02;
        }
        let chance = 1.0 / k as f64;
        for bin in bins.iter().filter(|b| b.distance >= 50.0) {
            ok &= (bin.agreement - chance).abs() <= target_tol;
        }
    }
    report(
        "6 (pair similarity nonincreasing within 0.02 noise; chance level at distance \
         >= 50: K=2 within 0.1, K=7 within 0.05)",
        ok,
    );
}

#[test]
fn criterion_7_range_and_softness_limits() {
    let shape = GridShape::new(150, 150).unwrap();
    let reps = 10;
    let mut ok = true;

    // kappa = 10: essentially independent sites, agreement at chance
    let rough = CovarianceSpec::new(1.0, 10.0, 1.0).unwrap();
    let spec = MultivariateGmrfSpec::balanced_isotropic(2, rough, Method::Fourier, 0).unwrap();
    let classes = ClassSet::default_k(2).unwrap();
    let mut acc = 0.0;
    for r in 0..reps {
        let field = sample_dgum(shape, &spec, &classes, rep_seed(9, r)).unwrap();
        acc += neighbor_agreement(&field, NeighborhoodSystem::Four);
    }
    ok &= (acc / reps as f64 - 0.5).abs() < 0.03;

    // kappa = 0.01: long-range order, strong local agreement
    let smooth = CovarianceSpec::new(1.0, 0.01, 1.0).unwrap();
    let spec = MultivariateGmrfSpec::balanced_isotropic(2, smooth, Method::Fourier, 0).unwrap();
    let mut acc = 0.0;
    for r in 0..reps {
        let field = sample_dgum(shape, &spec, &classes, rep_seed(10, r)).unwrap();
        acc += neighbor_agreement(&field, NeighborhoodSystem::Four);
    }
    ok &= acc / reps as f64 >= 0.9;

    // softmax scale: flat response below c = 0.5, chance level beyond c = 100
    let grid = GridShape::new(64, 64).unwrap();
    let points = phase_curve_c(
        grid,
        3,
        paper_cov(),
        &[0.1, 0.25, 0.5, 100.0, 1000.0],
        Method::Fourier,
        0,
        reps,
        RngSeed(11),
    )
    .unwrap();
    let low: Vec<f64> = points
        .iter()
        .filter(|p| p.x <= 0.5)
        .map(|p| p.mean)
        .collect();
    let spread = low.iter().cloned().fold(f64::MIN, f64::max)
        - low.iter().cloned().fold(f64::MAX, f64::min);
    ok &= spread <= 0.05;
    for p in points.iter().filter(|p| p.x >= 100.0) {
        ok &= (p.mean - 1.0 / 3.0).abs() <= 0.03;
    }
    report(
        "7 (agreement at chance within 0.03 for kappa=10, >= 0.9 for kappa=0.01; \
         soft-label curve flat within 0.05 below c=0.5 and at chance within 0.03 \
         beyond c=100)",
        ok,
    );
}

#[test]
fn criterion_8_discrete_sampler_outruns_gibbs() {
    let shape = GridShape::new(256, 256).unwrap();
    let cov = paper_cov();
    let dgum = bench_dgum_fourier(shape, 2, &cov, 10, RngSeed(12)).unwrap();
    let potts = PottsSpec::new(2, 1.5, NeighborhoodSystem::Four).unwrap();
    let gibbs =
        bench_gibbs_convergence(shape, &potts, GibbsScheme::Chromatic, 1000, 10, RngSeed(13))
            .unwrap();
    let ratio = gibbs.median_ms / dgum.median_ms;
    println!("  median ms: dgum {} gibbs {} ratio {ratio:.1}", dgum.median_ms, gibbs.median_ms);
    report(
        "8 (256x256 binary field: median chromatic-Gibbs-to-convergence time at least \
         10x the Fourier route, 10 reps each)",
        ratio >= 10.0,
    );
}

#[test]
fn criterion_9_reproducibility_across_runs_and_thread_pools() {
    let shape = GridShape::new(64, 64).unwrap();
    let cov = paper_cov();
    let spec =
        MultivariateGmrfSpec::balanced_isotropic(3, cov, Method::Spectral, 1000).unwrap();
    let classes = ClassSet::default_k(3).unwrap();
    let potts = PottsSpec::new(3, 0.8, NeighborhoodSystem::Four).unwrap();
    let mut ok = true;
    for seed in 0..5u64 {
        let in_pool = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                let dgum = sample_dgum(shape, &spec, &classes, RngSeed(seed)).unwrap();
                let mut chain = ChromaticChain::new(shape, &potts, RngSeed(seed));
                for _ in 0..20 {
                    chain.sweep();
                }
                (dgum, chain.field().clone())
            })
        };
        ok &= in_pool(1) == in_pool(4);
        // repeat in the same pool: identical again
        ok &= in_pool(4) == in_pool(4);
    }

    // the binary produces byte-identical artifacts across invocations and
    // thread counts
    let dir = std::env::temp_dir().join("gumrf-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_gumrf"))
            .args([
                "sample-dgum",
                "--height",
                "64",
                "--width",
                "64",
                "--classes",
                "3",
                "--method",
                "spectral",
                "--bands",
                "1000",
                "--seed",
                "5",
                "--out",
            ])
            .arg(&out)
            .env("GUMRF_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&out).unwrap()
    };
    ok &= run("1", "a.pgm") == run("4", "b.pgm");
    report(
        "9 (5 seeds bit-identical across repeated runs and 1- vs 4-thread pools, \
         library and binary)",
        ok,
    );
}
