//! Baseline Ising/Potts samplers: sequential Gibbs and chromatic Gibbs
//! with the majority-vote stopping rule.

use crate::error::{Error, Result};
use crate::field::LabelField;
use crate::lattice::{color_grid, neighbors, GridShape, NeighborhoodSystem};
use crate::rng::{RngSeed, StreamRng};
use rayon::prelude::*;

const TAG_POTTS_INIT: u64 = 0x10;
const TAG_POTTS_SITE: u64 = 0x11;

/// Interaction sign. `Attractive` rewards neighbor agreement (the
/// convention every experiment uses); `Repulsive` penalizes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    Attractive,
    Repulsive,
}

#[derive(Debug, Clone, Copy)]
pub struct PottsSpec {
    pub num_classes: usize,
    pub beta: f64,
    pub system: NeighborhoodSystem,
    pub interaction: Interaction,
}

impl PottsSpec {
    pub fn new(num_classes: usize, beta: f64, system: NeighborhoodSystem) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::invalid("Potts model needs K >= 2"));
        }
        if !(beta >= 0.0) {
            return Err(Error::invalid("beta must be nonnegative"));
        }
        Ok(PottsSpec {
            num_classes,
            beta,
            system,
            interaction: Interaction::Attractive,
        })
    }
}

/// Full conditional p(x_s = k | neighbors) (attractive convention:
/// proportional to exp(beta * #same-label neighbors)), normalized.
pub fn conditional_distribution(
    x: &LabelField,
    site: usize,
    spec: &PottsSpec,
) -> Result<Vec<f64>> {
    let nbrs = neighbors(site, x.shape(), spec.system)?;
    let mut counts = vec![0u32; spec.num_classes];
    for t in nbrs {
        counts[x.labels()[t] as usize] += 1;
    }
    Ok(conditional_from_counts(&counts, spec))
}

fn conditional_from_counts(counts: &[u32], spec: &PottsSpec) -> Vec<f64> {
    let sign = match spec.interaction {
        Interaction::Attractive => 1.0,
        Interaction::Repulsive => -1.0,
    };
    let max = *counts.iter().max().expect("K >= 2") as f64;
    // shift by the max count so exponents stay small
    let mut probs: Vec<f64> = counts
        .iter()
        .map(|&c| (sign * spec.beta * (c as f64 - max)).exp())
        .collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    probs
}

#[inline]
fn draw_from_counts(counts: &[u32], spec: &PottsSpec, u: f64) -> u32 {
    let probs = conditional_from_counts(counts, spec);
    crate::gum::categorical_from_uniform(&probs, u) as u32
}

/// Stopping rule: converged once the last `window` fields exist and the
/// current field differs from their per-site majority label on fewer than
/// `threshold` of the sites.
#[derive(Debug, Clone)]
pub struct ConvergenceState {
    history: std::collections::VecDeque<Vec<u32>>,
    pub window: usize,
    pub threshold: f64,
}

impl Default for ConvergenceState {
    fn default() -> Self {
        ConvergenceState {
            history: std::collections::VecDeque::new(),
            window: 10,
            threshold: 0.05,
        }
    }
}

impl ConvergenceState {
    pub fn push(&mut self, field: &LabelField) {
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(field.labels().to_vec());
    }

    /// Per-site majority over the history; ties break to the smallest label.
    fn majority(&self, num_classes: usize) -> Vec<u32> {
        let n = self.history[0].len();
        let mut out = vec![0u32; n];
        let mut counts = vec![0u32; num_classes];
        for (site, o) in out.iter_mut().enumerate() {
            counts.iter_mut().for_each(|c| *c = 0);
            for past in &self.history {
                counts[past[site] as usize] += 1;
            }
            let mut best = 0usize;
            for (k, &c) in counts.iter().enumerate().skip(1) {
                if c > counts[best] {
                    best = k;
                }
            }
            *o = best as u32;
        }
        out
    }

    pub fn check(&self, current: &LabelField, num_classes: usize) -> bool {
        if self.history.len() < self.window {
            return false;
        }
        let majority = self.majority(num_classes);
        let n = current.labels().len();
        let changed = current
            .labels()
            .iter()
            .zip(&majority)
            .filter(|(a, b)| a != b)
            .count();
        (changed as f64 / n as f64) < self.threshold
    }
}

/// Outcome of a Gibbs run.
#[derive(Debug, Clone)]
pub struct GibbsResult {
    pub field: LabelField,
    pub iterations: usize,
    pub converged: bool,
}

fn initial_field(shape: GridShape, spec: &PottsSpec, seed: RngSeed) -> LabelField {
    let mut rng = StreamRng::from_tags(seed, &[TAG_POTTS_INIT]);
    let labels = (0..shape.num_sites())
        .map(|_| (rng.next_f64() * spec.num_classes as f64) as u32)
        .collect();
    LabelField::new(shape, labels).expect("length matches")
}

#[inline]
fn site_uniform(seed: RngSeed, iter: usize, site: usize) -> f64 {
    StreamRng::from_tags(seed, &[TAG_POTTS_SITE, iter as u64, site as u64]).next_f64()
}

/// A sequential single-site Gibbs chain advanced one raster sweep at a
/// time, so callers can record the trajectory.
pub struct GibbsChain {
    spec: PottsSpec,
    seed: RngSeed,
    table: NeighborTable,
    x: LabelField,
    iter: usize,
}

impl GibbsChain {
    pub fn new(shape: GridShape, spec: &PottsSpec, seed: RngSeed) -> Self {
        GibbsChain {
            spec: *spec,
            seed,
            table: build_neighbor_table(shape, spec.system),
            x: initial_field(shape, spec, seed),
            iter: 0,
        }
    }

    pub fn sweep(&mut self) {
        self.iter += 1;
        let mut counts = vec![0u32; self.spec.num_classes];
        for site in 0..self.x.shape().num_sites() {
            counts.iter_mut().for_each(|c| *c = 0);
            for &t in self.table.of(site) {
                counts[self.x.labels()[t] as usize] += 1;
            }
            self.x.labels_mut()[site] =
                draw_from_counts(&counts, &self.spec, site_uniform(self.seed, self.iter, site));
        }
    }

    pub fn field(&self) -> &LabelField {
        &self.x
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }
}

/// Sequential single-site Gibbs sweeps in raster order.
pub fn gibbs_sample(
    shape: GridShape,
    spec: &PottsSpec,
    seed: RngSeed,
    max_iters: usize,
) -> Result<GibbsResult> {
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be >= 1"));
    }
    let mut chain = GibbsChain::new(shape, spec, seed);
    let mut conv = ConvergenceState::default();
    for iter in 1..=max_iters {
        chain.sweep();
        if conv.check(chain.field(), spec.num_classes) {
            return Ok(GibbsResult {
                field: chain.x,
                iterations: iter,
                converged: true,
            });
        }
        conv.push(chain.field());
    }
    Ok(GibbsResult {
        field: chain.x,
        iterations: max_iters,
        converged: false,
    })
}

/// Chromatic Gibbs: per iteration, update each color class wholesale;
/// sites of one class are mutually non-adjacent so they may run in
/// parallel, and per-(iteration, site) random streams keep the result
/// independent of the schedule.
pub struct ChromaticChain {
    spec: PottsSpec,
    seed: RngSeed,
    classes: Vec<Vec<usize>>,
    table: NeighborTable,
    x: LabelField,
    iter: usize,
}

impl ChromaticChain {
    pub fn new(shape: GridShape, spec: &PottsSpec, seed: RngSeed) -> Self {
        ChromaticChain {
            spec: *spec,
            seed,
            classes: color_grid(shape, spec.system).classes(),
            table: build_neighbor_table(shape, spec.system),
            x: initial_field(shape, spec, seed),
            iter: 0,
        }
    }

    pub fn sweep(&mut self) {
        self.iter += 1;
        let (spec, seed, iter) = (self.spec, self.seed, self.iter);
        for class_sites in &self.classes {
            let labels = self.x.labels();
            let table = &self.table;
            let updates: Vec<u32> = class_sites
                .par_iter()
                .map(|&site| {
                    let mut counts = vec![0u32; spec.num_classes];
                    for &t in table.of(site) {
                        counts[labels[t] as usize] += 1;
                    }
                    draw_from_counts(&counts, &spec, site_uniform(seed, iter, site))
                })
                .collect();
            let labels = self.x.labels_mut();
            for (&site, &l) in class_sites.iter().zip(&updates) {
                labels[site] = l;
            }
        }
    }

    pub fn field(&self) -> &LabelField {
        &self.x
    }

    pub fn iterations(&self) -> usize {
        self.iter
    }
}

pub fn chromatic_gibbs_sample(
    shape: GridShape,
    spec: &PottsSpec,
    seed: RngSeed,
    max_iters: usize,
) -> Result<GibbsResult> {
    if max_iters == 0 {
        return Err(Error::invalid("max_iters must be >= 1"));
    }
    let mut chain = ChromaticChain::new(shape, spec, seed);
    let mut conv = ConvergenceState::default();
    for iter in 1..=max_iters {
        chain.sweep();
        if conv.check(chain.field(), spec.num_classes) {
            return Ok(GibbsResult {
                field: chain.x,
                iterations: iter,
                converged: true,
            });
        }
        conv.push(chain.field());
    }
    Ok(GibbsResult {
        field: chain.x,
        iterations: max_iters,
        converged: false,
    })
}

/// Flattened per-site neighbor lists (degree is constant per system).
struct NeighborTable {
    flat: Vec<usize>,
    degree: usize,
}

impl NeighborTable {
    #[inline]
    fn of(&self, site: usize) -> &[usize] {
        &self.flat[site * self.degree..(site + 1) * self.degree]
    }
}

fn build_neighbor_table(shape: GridShape, system: NeighborhoodSystem) -> NeighborTable {
    let degree = system.degree();
    let mut flat = Vec::with_capacity(shape.num_sites() * degree);
    for site in 0..shape.num_sites() {
        flat.extend(neighbors(site, shape, system).expect("site in range"));
    }
    NeighborTable { flat, degree }
}
