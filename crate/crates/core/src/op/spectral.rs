//! Fourier-multiplier realization on the periodic torus.

use super::OperatorSpec;
use crate::error::Result;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub(crate) struct SpectralTable {
    /// |pi k / L|^{2s} per mode, mode lattice in FFT index order
    multiplier: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    m: usize,
    dim: usize,
}

impl SpectralTable {
    pub(super) fn build(spec: &OperatorSpec) -> Result<Self> {
        let grid = spec.grid();
        let m = grid.points_per_axis();
        let dim = grid.dimension();
        let l = grid.half_width();
        let s = spec.s();
        let base = PI / l;

        let signed = |k: usize| -> f64 {
            if k <= m / 2 {
                k as f64
            } else {
                k as f64 - m as f64
            }
        };

        let multiplier = match dim {
            1 => (0..m)
                .map(|k| (base * signed(k).abs()).powf(2.0 * s))
                .collect(),
            2 => {
                let mut t = Vec::with_capacity(m * m);
                for k0 in 0..m {
                    for k1 in 0..m {
                        let k2 = signed(k0).powi(2) + signed(k1).powi(2);
                        t.push((base * base * k2).powf(s));
                    }
                }
                t
            }
            _ => unreachable!("spec validation caps the dimension"),
        };

        let mut planner = FftPlanner::new();
        Ok(Self {
            multiplier,
            fft_fwd: planner.plan_fft_forward(m),
            fft_inv: planner.plan_fft_inverse(m),
            m,
            dim,
        })
    }

    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self.dim {
            1 => self.apply_1d(x, y),
            2 => self.apply_2d(x, y),
            _ => unreachable!(),
        }
    }

    fn apply_1d(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_fwd.process(&mut buf);
        for (b, &mu) in buf.iter_mut().zip(&self.multiplier) {
            *b *= mu;
        }
        self.fft_inv.process(&mut buf);
        let scale = 1.0 / m as f64;
        for (out, b) in y.iter_mut().zip(&buf) {
            *out = b.re * scale;
        }
    }

    fn apply_2d(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_axes(&mut buf, &self.fft_fwd);
        for (b, &mu) in buf.iter_mut().zip(&self.multiplier) {
            *b *= mu;
        }
        self.transform_axes(&mut buf, &self.fft_inv);
        let scale = 1.0 / (m * m) as f64;
        for (out, b) in y.iter_mut().zip(&buf) {
            *out = b.re * scale;
        }
    }

    /// FFT along rows (contiguous), then along columns through a gather.
    fn transform_axes(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        for row in buf.chunks_exact_mut(m) {
            fft.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for j in 0..m {
            for i in 0..m {
                col[i] = buf[i * m + j];
            }
            fft.process(&mut col);
            for i in 0..m {
                buf[i * m + j] = col[i];
            }
        }
    }
}
