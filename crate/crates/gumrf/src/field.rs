//! Field containers: real-valued fields, stacks of them, and discrete
//! label fields over a grid.

use crate::error::{Error, Result};
use crate::lattice::GridShape;

/// One real value per site.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    shape: GridShape,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.num_sites() {
            return Err(Error::Data(format!(
                "field has {} values for {} sites",
                values.len(),
                shape.num_sites()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("field contains non-finite values".into()));
        }
        Ok(RealField { shape, values })
    }

    pub fn zeros(shape: GridShape) -> Self {
        RealField {
            shape,
            values: vec![0.0; shape.num_sites()],
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// The K-1 components of a multivariate field realization, sharing a shape.
#[derive(Debug, Clone, PartialEq)]
pub struct RealFieldStack {
    components: Vec<RealField>,
}

impl RealFieldStack {
    pub fn new(components: Vec<RealField>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Data("stack needs at least one component".into()));
        }
        let shape = components[0].shape();
        if components.iter().any(|f| f.shape() != shape) {
            return Err(Error::Data("stack components disagree on shape".into()));
        }
        Ok(RealFieldStack { components })
    }

    pub fn shape(&self) -> GridShape {
        self.components[0].shape()
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, k: usize) -> &RealField {
        &self.components[k]
    }

    pub fn components(&self) -> &[RealField] {
        &self.components
    }

    /// The component values at one site, in component order.
    pub fn site_vector(&self, site: usize, out: &mut Vec<f64>) {
        out.clear();
        for c in &self.components {
            out.push(c.values()[site]);
        }
    }
}

/// One discrete label per site, each drawn from the class set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelField {
    shape: GridShape,
    labels: Vec<u32>,
}

impl LabelField {
    pub fn new(shape: GridShape, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != shape.num_sites() {
            return Err(Error::Data(format!(
                "label field has {} labels for {} sites",
                labels.len(),
                shape.num_sites()
            )));
        }
        Ok(LabelField { shape, labels })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u32] {
        &mut self.labels
    }
}
