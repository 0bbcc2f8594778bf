//! Thin 2D DFT wrapper over rustfft. Transforms are unnormalized in both
//! directions (the inverse is the conjugate-kernel sum without the 1/n).

use crate::lattice::GridShape;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Fft2 {
    shape: GridShape,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(shape: GridShape) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            shape,
            row_fwd: planner.plan_fft_forward(shape.width()),
            row_inv: planner.plan_fft_inverse(shape.width()),
            col_fwd: planner.plan_fft_forward(shape.height()),
            col_inv: planner.plan_fft_inverse(shape.height()),
        }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    fn transform(&self, data: &mut [Complex<f64>], inverse: bool) {
        let h = self.shape.height();
        let w = self.shape.width();
        assert_eq!(data.len(), h * w);
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        let mut scratch = vec![Complex::default(); row.get_inplace_scratch_len()];
        for r in 0..h {
            row.process_with_scratch(&mut data[r * w..(r + 1) * w], &mut scratch);
        }
        let mut colbuf = vec![Complex::default(); h];
        let mut scratch = vec![Complex::default(); col.get_inplace_scratch_len()];
        for c in 0..w {
            for r in 0..h {
                colbuf[r] = data[r * w + c];
            }
            col.process_with_scratch(&mut colbuf, &mut scratch);
            for r in 0..h {
                data[r * w + c] = colbuf[r];
            }
        }
    }

    /// Forward 2D DFT, in place, unnormalized.
    pub fn forward(&self, data: &mut [Complex<f64>]) {
        self.transform(data, false);
    }

    /// Inverse-kernel 2D DFT, in place, unnormalized (apply 1/n yourself).
    pub fn inverse(&self, data: &mut [Complex<f64>]) {
        self.transform(data, true);
    }
}
