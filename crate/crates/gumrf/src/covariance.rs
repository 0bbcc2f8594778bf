//! Matérn covariance evaluation and the circulant base / spectrum used by
//! Fourier sampling on the torus.

use crate::bessel::{bessel_k, gamma};
use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::lattice::{torus_lag_distance, GridShape};
use rustfft::num_complex::Complex;

/// Stationary isotropic Matérn covariance parameters: marginal standard
/// deviation `sigma`, inverse range `kappa`, smoothness `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSpec {
    pub sigma: f64,
    pub kappa: f64,
    pub nu: f64,
}

impl CovarianceSpec {
    pub fn new(sigma: f64, kappa: f64, nu: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(kappa > 0.0) || !(nu > 0.0) {
            return Err(Error::invalid(format!(
                "Matern parameters must be positive, got sigma={sigma} kappa={kappa} nu={nu}"
            )));
        }
        Ok(CovarianceSpec { sigma, kappa, nu })
    }
}

/// C(d) = sigma^2 / (2^{nu-1} Gamma(nu)) * (kappa d)^nu * K_nu(kappa d),
/// with the continuous limit C(0) = sigma^2 as an explicit branch
/// ((kappa d)^nu K_nu(kappa d) is 0*inf at d = 0).
pub fn matern(d: f64, spec: &CovarianceSpec) -> f64 {
    debug_assert!(d >= 0.0);
    if d == 0.0 {
        return spec.sigma * spec.sigma;
    }
    let kd = spec.kappa * d;
    let coeff = spec.sigma * spec.sigma / (2f64.powf(spec.nu - 1.0) * gamma(spec.nu));
    let k = bessel_k(spec.nu, kd).expect("kd > 0");
    coeff * kd.powf(spec.nu) * k
}

/// First row of the circulant covariance matrix on the torus:
/// `values[lag] = C(torus_lag_distance(lag))`, row-major over lags.
#[derive(Debug, Clone)]
pub struct CirculantBase {
    shape: GridShape,
    values: Vec<f64>,
}

impl CirculantBase {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.num_sites() {
            return Err(Error::invalid("lag table length must match grid size"));
        }
        Ok(CirculantBase { shape, values })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at_lag(&self, dr: usize, dc: usize) -> f64 {
        self.values[self.shape.index(dr, dc)]
    }
}

pub fn circulant_base(shape: GridShape, spec: &CovarianceSpec) -> CirculantBase {
    let h = shape.height();
    let w = shape.width();
    let mut values = vec![0.0; shape.num_sites()];
    for dr in 0..h {
        for dc in 0..w {
            values[shape.index(dr, dc)] = matern(torus_lag_distance((dr, dc), shape), spec);
        }
    }
    CirculantBase { shape, values }
}

/// Eigenvalues of the circulant covariance, nonnegative after clamping.
#[derive(Debug, Clone)]
pub struct Spectrum {
    shape: GridShape,
    eigenvalues: Vec<f64>,
    /// Fraction of the trace removed by clamping negative eigenvalues.
    clamped_mass_fraction: f64,
}

impl Spectrum {
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn clamped_mass_fraction(&self) -> f64 {
        self.clamped_mass_fraction
    }
}

/// Negative-eigenvalue magnitudes below this fraction of sigma^2 are pure
/// roundoff and do not count as clamped mass.
pub const EPS_CLAMP: f64 = 1e-8;

/// The embedding is rejected when clamping would remove more than this
/// fraction of the trace.
pub const MAX_CLAMPED_MASS: f64 = 0.05;

/// Real eigenvalues of the circulant base: the 2D DFT, unclamped.
/// Panics only on an asymmetric base (imaginary parts beyond 1e-9 sigma^2).
pub fn raw_eigenvalues(base: &CirculantBase) -> Vec<f64> {
    let fft = Fft2::new(base.shape());
    let mut data: Vec<Complex<f64>> = base
        .values()
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .collect();
    fft.forward(&mut data);
    let scale = base.values()[0].abs().max(1.0);
    for v in &data {
        assert!(
            v.im.abs() <= 1e-9 * scale * base.shape().num_sites() as f64,
            "circulant base is not symmetric under lag negation"
        );
    }
    data.into_iter().map(|v| v.re).collect()
}

/// Spectrum of the base with negative eigenvalues clamped to zero.
///
/// The min-wrap covariance base need not be nonnegative definite on a small
/// torus; small negative mass is absorbed by clamping, and the embedding is
/// rejected only when the clamped mass exceeds `MAX_CLAMPED_MASS` of the
/// trace (the covariance would then be visibly distorted).
pub fn base_eigenvalues(base: &CirculantBase) -> Result<Spectrum> {
    let raw = raw_eigenvalues(base);
    let sigma2 = base.values()[0];
    let trace: f64 = raw.iter().sum();
    let mut clamped = 0.0;
    let eigenvalues: Vec<f64> = raw
        .into_iter()
        .map(|v| {
            if v < 0.0 {
                if v < -EPS_CLAMP * sigma2 {
                    clamped -= v;
                }
                0.0
            } else {
                v
            }
        })
        .collect();
    let mass_fraction = if trace > 0.0 { clamped / trace } else { 1.0 };
    if mass_fraction > MAX_CLAMPED_MASS {
        return Err(Error::EmbeddingFailure {
            mass_fraction,
            limit: MAX_CLAMPED_MASS,
        });
    }
    Ok(Spectrum {
        shape: base.shape(),
        eigenvalues,
        clamped_mass_fraction: mass_fraction,
    })
}
