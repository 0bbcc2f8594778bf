//! Summary statistics over sampled fields: class balance, pairwise
//! similarity curves, neighbor agreement, phase sweeps, and the averaged
//! periodogram estimate of the covariance.

use crate::covariance::{CirculantBase, CovarianceSpec};
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::field::{LabelField, RealField};
use crate::gmrf::{sample_multivariate, Method, MultivariateGmrfSpec};
use crate::gum::{sample_dgum, sample_labels_from_pi, ClassSet};
use crate::lattice::{neighbors, plane_distance, GridShape, NeighborhoodSystem};
use crate::rng::{RngSeed, StreamRng};

const TAG_PAIRS: u64 = 0x20;
const TAG_PHASE: u64 = 0x21;

/// Per-class relative frequencies in `classes` order. A label outside the
/// class set is a data error.
pub fn class_frequencies(field: &LabelField, classes: &ClassSet) -> Result<Vec<f64>> {
    let mut counts = vec![0usize; classes.len()];
    for &l in field.labels() {
        let k = classes
            .index_of(l)
            .ok_or_else(|| Error::Data(format!("label {l} is not in the class set")))?;
        counts[k] += 1;
    }
    let n = field.labels().len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Spread of the first-class frequency across replicates.
#[derive(Debug, Clone, Copy)]
pub struct BalanceReport {
    pub mean: f64,
    /// |mean - 1/K|
    pub bias: f64,
    /// Sample standard deviation across replicates.
    pub std: f64,
    pub num_classes: usize,
}

pub fn balance_report(first_class_freqs: &[f64], num_classes: usize) -> Result<BalanceReport> {
    if first_class_freqs.len() < 2 {
        return Err(Error::invalid("balance report needs at least 2 replicates"));
    }
    if num_classes < 2 {
        return Err(Error::invalid("balance report needs K >= 2"));
    }
    let mean = mean(first_class_freqs);
    let std = sample_std(first_class_freqs, mean);
    Ok(BalanceReport {
        mean,
        bias: (mean - 1.0 / num_classes as f64).abs(),
        std,
        num_classes,
    })
}

/// Fraction of ordered (site, neighbor) pairs with equal labels.
pub fn neighbor_agreement(field: &LabelField, system: NeighborhoodSystem) -> f64 {
    let shape = field.shape();
    let labels = field.labels();
    let mut same = 0usize;
    let mut total = 0usize;
    for site in 0..shape.num_sites() {
        for t in neighbors(site, shape, system).expect("site in range") {
            total += 1;
            if labels[site] == labels[t] {
                same += 1;
            }
        }
    }
    same as f64 / total as f64
}

/// How many site pairs enter the similarity estimate.
#[derive(Debug, Clone, Copy)]
pub enum PairBudget {
    /// Every unordered pair; quadratic in grid size.
    All,
    /// This many pairs drawn uniformly (the same pairs for every field).
    Sampled(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct SimilarityBin {
    /// Rounded plane distance.
    pub distance: f64,
    /// (replicate, pair) observations in the bin.
    pub pairs: u64,
    /// Fraction of observations with equal labels.
    pub agreement: f64,
}

/// P(x_s = x_t) against rounded plane distance, pooled over the replicate
/// fields. Bins are the integers 1..=max_distance; empty bins are dropped.
pub fn pairwise_similarity(
    fields: &[LabelField],
    budget: PairBudget,
    max_distance: usize,
    seed: RngSeed,
) -> Result<Vec<SimilarityBin>> {
    if fields.is_empty() {
        return Err(Error::invalid("similarity needs at least one field"));
    }
    let shape = fields[0].shape();
    if fields.iter().any(|f| f.shape() != shape) {
        return Err(Error::invalid("all fields must share one shape"));
    }
    if max_distance == 0 {
        return Err(Error::invalid("max_distance must be >= 1"));
    }
    let n = shape.num_sites();
    let pairs: Vec<(usize, usize)> = match budget {
        PairBudget::All => {
            let mut v = Vec::new();
            for s in 0..n {
                for t in (s + 1)..n {
                    v.push((s, t));
                }
            }
            v
        }
        PairBudget::Sampled(m) => {
            if m == 0 {
                return Err(Error::invalid("pair budget must be >= 1"));
            }
            let mut rng = StreamRng::from_tags(seed, &[TAG_PAIRS]);
            let mut v = Vec::with_capacity(m);
            while v.len() < m {
                let s = (rng.next_f64() * n as f64) as usize;
                let t = (rng.next_f64() * n as f64) as usize;
                if s != t {
                    v.push((s, t));
                }
            }
            v
        }
    };

    let mut total = vec![0u64; max_distance + 1];
    let mut same = vec![0u64; max_distance + 1];
    for &(s, t) in &pairs {
        let d = plane_distance(s, t, shape).round() as usize;
        if d == 0 || d > max_distance {
            continue;
        }
        for field in fields {
            total[d] += 1;
            if field.labels()[s] == field.labels()[t] {
                same[d] += 1;
            }
        }
    }
    Ok((1..=max_distance)
        .filter(|&d| total[d] > 0)
        .map(|d| SimilarityBin {
            distance: d as f64,
            pairs: total[d],
            agreement: same[d] as f64 / total[d] as f64,
        })
        .collect())
}

/// One point of a phase sweep: replicate mean with the 10%/90% deciles.
#[derive(Debug, Clone, Copy)]
pub struct PhasePoint {
    pub x: f64,
    pub mean: f64,
    pub q10: f64,
    pub q90: f64,
}

fn summarize(x: f64, samples: &mut [f64]) -> PhasePoint {
    let m = mean(samples);
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    PhasePoint {
        x,
        mean: m,
        q10: quantile_sorted(samples, 0.1),
        q90: quantile_sorted(samples, 0.9),
    }
}

/// Neighbor agreement of the discrete field as the correlation range
/// parameter kappa sweeps; `sigma` and `nu` stay fixed.
#[allow(clippy::too_many_arguments)]
pub fn phase_curve_kappa(
    shape: GridShape,
    num_classes: usize,
    sigma: f64,
    nu: f64,
    kappas: &[f64],
    method: Method,
    bands: usize,
    reps: usize,
    seed: RngSeed,
) -> Result<Vec<PhasePoint>> {
    if reps < 2 {
        return Err(Error::invalid("phase curve needs at least 2 replicates"));
    }
    let classes = ClassSet::default_k(num_classes)?;
    let mut out = Vec::with_capacity(kappas.len());
    for (i, &kappa) in kappas.iter().enumerate() {
        let cov = CovarianceSpec::new(sigma, kappa, nu)?;
        let spec = MultivariateGmrfSpec::balanced_isotropic(num_classes, cov, method, bands)?;
        let mut agreements = Vec::with_capacity(reps);
        for r in 0..reps {
            let sub = StreamRng::derive_seed(seed, &[TAG_PHASE, i as u64, r as u64]);
            let field = sample_dgum(shape, &spec, &classes, sub)?;
            agreements.push(neighbor_agreement(&field, NeighborhoodSystem::Four));
        }
        out.push(summarize(kappa, &mut agreements));
    }
    Ok(out)
}

/// Neighbor agreement of the soft-labelled field as the softmax scale `c`
/// sweeps, with the underlying Gaussian stack fixed per replicate so the
/// curve isolates the effect of `c`.
#[allow(clippy::too_many_arguments)]
pub fn phase_curve_c(
    shape: GridShape,
    num_classes: usize,
    cov: CovarianceSpec,
    cs: &[f64],
    method: Method,
    bands: usize,
    reps: usize,
    seed: RngSeed,
) -> Result<Vec<PhasePoint>> {
    if reps < 2 {
        return Err(Error::invalid("phase curve needs at least 2 replicates"));
    }
    let classes = ClassSet::default_k(num_classes)?;
    let spec = MultivariateGmrfSpec::balanced_isotropic(num_classes, cov, method, bands)?;
    let stacks: Vec<_> = (0..reps)
        .map(|r| {
            let sub = StreamRng::derive_seed(seed, &[TAG_PHASE, 0, r as u64]);
            sample_multivariate(shape, &spec, sub)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(cs.len());
    for (i, &c) in cs.iter().enumerate() {
        let mut agreements = Vec::with_capacity(reps);
        for (r, z) in stacks.iter().enumerate() {
            let sub = StreamRng::derive_seed(seed, &[TAG_PHASE, 1 + i as u64, r as u64]);
            let field = sample_labels_from_pi(z, c, &classes, sub)?;
            agreements.push(neighbor_agreement(&field, NeighborhoodSystem::Four));
        }
        out.push(summarize(c, &mut agreements));
    }
    Ok(out)
}

/// Circular empirical covariance by the averaged periodogram:
/// `c_hat[l] = mean_r IDFT(|DFT(z_r)|^2)[l] / n^2`, which equals the
/// direct lag-product average `(1/n) sum_s z_s z_{s+l}` exactly.
pub fn empirical_covariance(fields: &[RealField]) -> Result<CirculantBase> {
    if fields.is_empty() {
        return Err(Error::invalid("covariance estimate needs at least one field"));
    }
    let shape = fields[0].shape();
    if fields.iter().any(|f| f.shape() != shape) {
        return Err(Error::invalid("all fields must share one shape"));
    }
    let fft = Fft2::new(shape);
    let n = shape.num_sites();
    let mut acc = vec![0.0f64; n];
    let mut buf = vec![rustfft::num_complex::Complex::new(0.0, 0.0); n];
    for field in fields {
        for (b, &v) in buf.iter_mut().zip(field.values()) {
            *b = rustfft::num_complex::Complex::new(v, 0.0);
        }
        fft.forward(&mut buf);
        for b in buf.iter_mut() {
            *b = rustfft::num_complex::Complex::new(b.norm_sqr(), 0.0);
        }
        fft.inverse(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.re;
        }
    }
    let scale = 1.0 / (fields.len() as f64 * (n as f64) * (n as f64));
    CirculantBase::new(shape, acc.into_iter().map(|a| a * scale).collect())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_std(xs: &[f64], mean: f64) -> f64 {
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile of an already sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(h: usize, w: usize) -> GridShape {
        GridShape::new(h, w).unwrap()
    }

    #[test]
    fn frequencies_count_correctly() {
        let s = shape(2, 2);
        let classes = ClassSet::new(vec![3, 7]).unwrap();
        let f = LabelField::new(s, vec![3, 7, 7, 7]).unwrap();
        let freqs = class_frequencies(&f, &classes).unwrap();
        assert_eq!(freqs, vec![0.25, 0.75]);
    }

    #[test]
    fn foreign_label_is_data_error() {
        let s = shape(2, 2);
        let classes = ClassSet::default_k(2).unwrap();
        let f = LabelField::new(s, vec![0, 1, 2, 0]).unwrap();
        assert!(matches!(
            class_frequencies(&f, &classes),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn balance_report_matches_hand_computation() {
        let freqs = [0.5, 0.6, 0.4, 0.5];
        let rep = balance_report(&freqs, 2).unwrap();
        assert!((rep.mean - 0.5).abs() < 1e-15);
        assert!(rep.bias < 1e-15);
        let expected_std = (0.02f64 / 3.0).sqrt();
        assert!((rep.std - expected_std).abs() < 1e-12);
    }

    #[test]
    fn agreement_on_constant_and_checkerboard() {
        let s = shape(4, 4);
        let constant = LabelField::new(s, vec![1; 16]).unwrap();
        assert_eq!(neighbor_agreement(&constant, NeighborhoodSystem::Four), 1.0);
        let labels = (0..16).map(|i| ((i / 4 + i % 4) % 2) as u32).collect();
        let checker = LabelField::new(s, labels).unwrap();
        assert_eq!(neighbor_agreement(&checker, NeighborhoodSystem::Four), 0.0);
        // diagonal neighbors of a checkerboard always agree: 4 of 8
        assert_eq!(
            neighbor_agreement(&checker, NeighborhoodSystem::Eight),
            0.5
        );
    }

    #[test]
    fn similarity_constant_field_is_one_everywhere() {
        let s = shape(8, 8);
        let f = LabelField::new(s, vec![2; 64]).unwrap();
        let bins = pairwise_similarity(&[f], PairBudget::All, 5, RngSeed(0)).unwrap();
        assert!(!bins.is_empty());
        for bin in bins {
            assert_eq!(bin.agreement, 1.0);
        }
    }

    #[test]
    fn similarity_bins_by_rounded_distance() {
        // 1 x 4 strip, two replicates; all pairs have distance = col gap
        let s = shape(1, 4);
        let a = LabelField::new(s, vec![0, 0, 1, 1]).unwrap();
        let b = LabelField::new(s, vec![0, 1, 0, 1]).unwrap();
        let bins = pairwise_similarity(&[a, b], PairBudget::All, 3, RngSeed(0)).unwrap();
        assert_eq!(bins.len(), 3);
        // d=1 pairs: (0,1),(1,2),(2,3) over 2 fields -> agreements 1,0,1 / 0,0,0
        assert_eq!(bins[0].pairs, 6);
        assert!((bins[0].agreement - 2.0 / 6.0).abs() < 1e-15);
        // d=2 pairs: (0,2),(1,3) -> 0,0 / 1,1
        assert!((bins[1].agreement - 0.5).abs() < 1e-15);
        // d=3 pair: (0,3) -> 0 / 0... labels a: 0 vs 1 disagree; b: 0 vs 1 disagree
        assert_eq!(bins[2].agreement, 0.0);
    }

    #[test]
    fn sampled_pairs_are_deterministic() {
        let s = shape(16, 16);
        let f = LabelField::new(s, (0..256).map(|i| (i % 3) as u32).collect()).unwrap();
        let a = pairwise_similarity(std::slice::from_ref(&f), PairBudget::Sampled(500), 10, RngSeed(9)).unwrap();
        let b = pairwise_similarity(&[f], PairBudget::Sampled(500), 10, RngSeed(9)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pairs, y.pairs);
            assert_eq!(x.agreement, y.agreement);
        }
    }

    #[test]
    fn periodogram_equals_direct_lag_products() {
        let s = shape(4, 6);
        let mut rng = StreamRng::new(RngSeed(42));
        let values: Vec<f64> = (0..24).map(|_| rng.next_f64() - 0.5).collect();
        let field = RealField::new(s, values.clone()).unwrap();
        let est = empirical_covariance(&[field]).unwrap();
        for dr in 0..4 {
            for dc in 0..6 {
                let mut direct = 0.0;
                for r in 0..4 {
                    for c in 0..6 {
                        direct += values[s.index(r, c)]
                            * values[s.index((r + dr) % 4, (c + dc) % 6)];
                    }
                }
                direct /= 24.0;
                assert!(
                    (est.at_lag(dr, dc) - direct).abs() < 1e-12,
                    "lag ({dr},{dc}): {} vs {direct}",
                    est.at_lag(dr, dc)
                );
            }
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!((quantile_sorted(&xs, 0.0) - 1.0).abs() < 1e-15);
        assert!((quantile_sorted(&xs, 1.0) - 5.0).abs() < 1e-15);
        assert!((quantile_sorted(&xs, 0.5) - 3.0).abs() < 1e-15);
        assert!((quantile_sorted(&xs, 0.1) - 1.4).abs() < 1e-12);
        assert!((quantile_sorted(&xs, 0.9) - 4.6).abs() < 1e-12);
    }

    #[test]
    fn phase_curve_c_flattens_at_large_c() {
        let s = shape(24, 24);
        let cov = CovarianceSpec::new(1.0, 0.1, 1.0).unwrap();
        let pts = phase_curve_c(
            s,
            3,
            cov,
            &[0.05, 1000.0],
            Method::Spectral,
            200,
            4,
            RngSeed(3),
        )
        .unwrap();
        // tiny c: soft labels track the smooth field, high agreement
        assert!(pts[0].mean > 0.6, "{}", pts[0].mean);
        // huge c: labels are i.i.d. uniform, agreement near 1/3
        assert!((pts[1].mean - 1.0 / 3.0).abs() < 0.05, "{}", pts[1].mean);
    }
}
