//! Unit-simplex construction and the mappings from a real-valued field
//! stack to soft probability stacks, soft label fields, and hard label
//! fields (the simplex discretization), plus the end-to-end discrete
//! sampler built on the GMRF samplers.

use crate::error::{Error, Result};
use crate::field::{LabelField, RealField, RealFieldStack};
use crate::gmrf::{sample_multivariate, MultivariateGmrfSpec};
use crate::lattice::GridShape;
use crate::rng::{RngSeed, StreamRng};

const TAG_PI_LABELS: u64 = 0x05;

/// Vertices of the regular (K-1)-simplex inscribed in the unit sphere of
/// R^{K-1}; vertex k is bound to class index k.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVertices {
    dim: usize,
    /// K vertices, each of length `dim`, flattened row-major.
    vertices: Vec<f64>,
}

impl SimplexVertices {
    /// Vertices of the unit P-simplex:
    /// v_j = sqrt((P+1)/P) e_j - (sqrt(P+1)-1)/(P sqrt(P)) 1 for j = 1..P,
    /// v_{P+1} = -1/sqrt(P) 1, re-indexed to 0..P in that order.
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::invalid("simplex dimension must be >= 1"));
        }
        let p = dim as f64;
        let a = ((p + 1.0) / p).sqrt();
        let b = ((p + 1.0).sqrt() - 1.0) / (p * p.sqrt());
        let mut vertices = vec![0.0; (dim + 1) * dim];
        for j in 0..dim {
            for i in 0..dim {
                vertices[j * dim + i] = if i == j { a - b } else { -b };
            }
        }
        for i in 0..dim {
            vertices[dim * dim + i] = -1.0 / p.sqrt();
        }
        Ok(SimplexVertices { dim, vertices })
    }

    /// Dimension P of the ambient space; the simplex has P+1 vertices.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.dim + 1
    }

    pub fn vertex(&self, k: usize) -> &[f64] {
        &self.vertices[k * self.dim..(k + 1) * self.dim]
    }

    /// Copy with all vertex coordinates scaled (test hook for the argmin
    /// scale-equivariance property).
    pub fn scaled(&self, factor: f64) -> Self {
        SimplexVertices {
            dim: self.dim,
            vertices: self.vertices.iter().map(|v| v * factor).collect(),
        }
    }

    /// Copy with vertices rearranged by `perm` (vertex k of the result is
    /// vertex perm[k] of self).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.num_vertices());
        let mut vertices = Vec::with_capacity(self.vertices.len());
        for &src in perm {
            vertices.extend_from_slice(self.vertex(src));
        }
        SimplexVertices {
            dim: self.dim,
            vertices,
        }
    }
}

/// The class values omega_0 < ... < omega_{K-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSet {
    omegas: Vec<u32>,
}

impl ClassSet {
    pub fn new(omegas: Vec<u32>) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::invalid("need at least two classes"));
        }
        if omegas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("class values must be strictly increasing"));
        }
        Ok(ClassSet { omegas })
    }

    /// The default class set {0, 1, ..., K-1}.
    pub fn default_k(k: usize) -> Result<Self> {
        Self::new((0..k as u32).collect())
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn omega(&self, k: usize) -> u32 {
        self.omegas[k]
    }

    pub fn omegas(&self) -> &[u32] {
        &self.omegas
    }

    /// Class index of a label value, if it belongs to the set.
    pub fn index_of(&self, label: u32) -> Option<usize> {
        self.omegas.binary_search(&label).ok()
    }
}

/// K probability fields over the grid, pointwise nonnegative, summing to 1.
#[derive(Debug, Clone)]
pub struct SoftStack {
    shape: GridShape,
    num_classes: usize,
    /// site-major: probs[site * K + i]
    probs: Vec<f64>,
}

impl SoftStack {
    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn site_probs(&self, site: usize) -> &[f64] {
        &self.probs[site * self.num_classes..(site + 1) * self.num_classes]
    }
}

fn squared_distances_to_vertices(
    z: &RealFieldStack,
    vertices: &SimplexVertices,
    site: usize,
    out: &mut [f64],
) {
    let p = vertices.dim();
    for (k, o) in out.iter_mut().enumerate() {
        let v = vertices.vertex(k);
        let mut d2 = 0.0;
        for (i, &vi) in v.iter().enumerate().take(p) {
            let diff = z.component(i).values()[site] - vi;
            d2 += diff * diff;
        }
        *o = d2;
    }
}

/// Softmax over negated squared vertex distances scaled by 1/c^2,
/// computed with per-site max subtraction so c as small as 1e-4 is safe.
pub fn pi_map(z: &RealFieldStack, c: f64, vertices: &SimplexVertices) -> Result<SoftStack> {
    if !(c > 0.0) {
        return Err(Error::invalid(format!("pi_map requires c > 0, got {c}")));
    }
    if z.num_components() != vertices.dim() {
        return Err(Error::invalid(format!(
            "stack has {} components but simplex dimension is {}",
            z.num_components(),
            vertices.dim()
        )));
    }
    let k = vertices.num_vertices();
    let n = z.shape().num_sites();
    let inv_c2 = 1.0 / (c * c);
    let mut probs = vec![0.0; n * k];
    let mut d2 = vec![0.0; k];
    for site in 0..n {
        squared_distances_to_vertices(z, vertices, site, &mut d2);
        let row = &mut probs[site * k..(site + 1) * k];
        // logit_i = -d2_i / c^2; the max logit comes from the min distance
        let max_logit = -d2.iter().cloned().fold(f64::INFINITY, f64::min) * inv_c2;
        let mut sum = 0.0;
        for (i, &d) in d2.iter().enumerate() {
            let e = (-d * inv_c2 - max_logit).exp();
            row[i] = e;
            sum += e;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(SoftStack {
        shape: z.shape(),
        num_classes: k,
        probs,
    })
}

/// The soft label field: per-site class-weighted mixture
/// sum_i omega_i pi_i^c(z_s); values lie in [omega_0, omega_{K-1}].
pub fn gum_field(z: &RealFieldStack, c: f64, classes: &ClassSet) -> Result<RealField> {
    let vertices = SimplexVertices::new(z.num_components())?;
    if classes.len() != vertices.num_vertices() {
        return Err(Error::invalid(format!(
            "class set has {} classes but stack implies K = {}",
            classes.len(),
            vertices.num_vertices()
        )));
    }
    let soft = pi_map(z, c, &vertices)?;
    let n = z.shape().num_sites();
    let mut values = vec![0.0; n];
    for (site, out) in values.iter_mut().enumerate() {
        *out = soft
            .site_probs(site)
            .iter()
            .zip(classes.omegas())
            .map(|(p, &w)| p * w as f64)
            .sum();
    }
    RealField::new(z.shape(), values)
}

/// Index of the nearest vertex; ties break toward the smallest index.
fn nearest_vertex(z: &RealFieldStack, vertices: &SimplexVertices, site: usize, d2: &mut [f64]) -> usize {
    squared_distances_to_vertices(z, vertices, site, d2);
    let mut best = 0;
    for (k, &d) in d2.iter().enumerate().skip(1) {
        if d < d2[best] {
            best = k;
        }
    }
    best
}

/// Hard label field for explicit vertices (test hook; `dgum_field` is the
/// standard entry point).
pub fn dgum_field_with_vertices(
    z: &RealFieldStack,
    vertices: &SimplexVertices,
    classes: &ClassSet,
) -> Result<LabelField> {
    if z.num_components() != vertices.dim() {
        return Err(Error::invalid("component count must match simplex dim"));
    }
    if classes.len() != vertices.num_vertices() {
        return Err(Error::invalid("class count must equal vertex count"));
    }
    let n = z.shape().num_sites();
    let mut d2 = vec![0.0; vertices.num_vertices()];
    let mut labels = Vec::with_capacity(n);
    for site in 0..n {
        let k = nearest_vertex(z, vertices, site, &mut d2);
        labels.push(classes.omega(k));
    }
    LabelField::new(z.shape(), labels)
}

/// The discretized field: each site takes the class of its nearest
/// simplex vertex (the c -> 0 limit of `gum_field`).
pub fn dgum_field(z: &RealFieldStack, classes: &ClassSet) -> Result<LabelField> {
    let vertices = SimplexVertices::new(z.num_components())?;
    dgum_field_with_vertices(z, &vertices, classes)
}

/// End-to-end discrete sampler: multivariate GMRF draw followed by the
/// nearest-vertex discretization.
pub fn sample_dgum(
    shape: GridShape,
    spec: &MultivariateGmrfSpec,
    classes: &ClassSet,
    seed: RngSeed,
) -> Result<LabelField> {
    if spec.num_classes != classes.len() {
        return Err(Error::invalid(format!(
            "spec has K = {} but class set has {}",
            spec.num_classes,
            classes.len()
        )));
    }
    let z = sample_multivariate(shape, spec, seed)?;
    dgum_field(&z, classes)
}

/// Class index drawn from `probs` by inverting the CDF at `u` in [0, 1).
pub fn categorical_from_uniform(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Per-site independent categorical draw with the `pi_map` probabilities.
pub fn sample_labels_from_pi(
    z: &RealFieldStack,
    c: f64,
    classes: &ClassSet,
    seed: RngSeed,
) -> Result<LabelField> {
    let vertices = SimplexVertices::new(z.num_components())?;
    if classes.len() != vertices.num_vertices() {
        return Err(Error::invalid("class count must equal vertex count"));
    }
    let soft = pi_map(z, c, &vertices)?;
    let n = z.shape().num_sites();
    let mut rng = StreamRng::from_tags(seed, &[TAG_PI_LABELS]);
    let mut labels = Vec::with_capacity(n);
    for site in 0..n {
        let k = categorical_from_uniform(soft.site_probs(site), rng.next_f64());
        labels.push(classes.omega(k));
    }
    LabelField::new(z.shape(), labels)
}
