//! Singular-kernel quadrature tables for the truncated and restricted kinds.
//!
//! Weight of the cell at offset k from a node is the exact cell integral of
//! c(N,s)|z|^{-N-2s} (antiderivative in 1D, Gauss / equivalent-disk corrected
//! in 2D), so point evaluation never touches the singularity. The per-node
//! tail coefficient is the exact integral of the kernel over the box exterior
//! where field values are identically zero.

use super::OperatorSpec;
use crate::linalg::pairwise_sum;
use crate::special::gamma;
use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// 8-point Gauss-Legendre rule on [-1, 1].
const GAUSS_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GAUSS_W: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// One-dimensional kernel table with circulant-embedded FFT convolution.
pub struct Kernel1d {
    /// scaled exchange weights, w[k] = h * c * cellavg(|z|^{-1-2s}) at offset k; w[0] = 0
    weights: Vec<f64>,
    /// per-node exterior tail coefficient
    tail: Vec<f64>,
    /// diagonal = sum of exchange weights + tail, per node
    diag: Vec<f64>,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    kernel_hat: Vec<Complex64>,
    m: usize,
}

impl Kernel1d {
    pub(super) fn build(spec: &OperatorSpec, c: f64) -> Self {
        let grid = spec.grid();
        let m = grid.points_per_axis();
        let h = grid.spacing();
        let l = grid.half_width();
        let two_s = 2.0 * spec.s();

        // w[k] = c * integral over the offset-k cell of |z|^{-1-2s} dz
        //      = c * ((k-1/2 h)^{-2s} - (k+1/2 h)^{-2s}) / (2s)
        let mut weights = vec![0.0; m];
        for (k, w) in weights.iter_mut().enumerate().skip(1) {
            let a = (k as f64 - 0.5) * h;
            let b = (k as f64 + 0.5) * h;
            *w = c * (a.powf(-two_s) - b.powf(-two_s)) / two_s;
        }
        // self-cell principal value: p.v. over |z| < h/2 of (f(x) - f(x+z)) k(z)
        // equals -(f''/2) * int z^2 k(z) dz + O(h^4); realized as a
        // second-difference exchange so weights stay nonnegative
        let self_cell = c * (0.5 * h).powf(2.0 - two_s) / ((2.0 - two_s) * h * h);
        weights[1] += self_cell;

        let mut tail = vec![0.0; m];
        let mut diag = vec![0.0; m];
        // prefix sums give each node's total exchange weight in O(M)
        let mut prefix = vec![0.0; m];
        let mut acc = 0.0;
        for k in 1..m {
            acc += weights[k];
            prefix[k] = acc;
        }
        for i in 0..m {
            let x = grid.axis_coord(i);
            tail[i] = c * ((l - x).powf(-two_s) + (l + x).powf(-two_s)) / two_s;
            if i == 0 || i == m - 1 {
                // the self-cell second difference reaches one ghost cell
                // beyond the boundary, where values are identically zero
                tail[i] += self_cell;
            }
            diag[i] = prefix[i] + prefix[m - 1 - i] + tail[i];
        }

        // circulant embedding of the symmetric Toeplitz exchange matrix
        let n2 = 2 * m;
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(n2);
        let fft_inv = planner.plan_fft_inverse(n2);
        let mut col = vec![Complex64::new(0.0, 0.0); n2];
        for k in 1..m {
            col[k] = Complex64::new(weights[k], 0.0);
            col[n2 - k] = Complex64::new(weights[k], 0.0);
        }
        fft_fwd.process(&mut col);

        Self {
            weights,
            tail,
            diag,
            fft_fwd,
            fft_inv,
            kernel_hat: col,
            m,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// y_i = diag_i x_i - sum_j w_{|i-j|} x_j (convolution via the circulant).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        let n2 = 2 * m;
        let mut buf = vec![Complex64::new(0.0, 0.0); n2];
        for i in 0..m {
            buf[i] = Complex64::new(x[i], 0.0);
        }
        self.fft_fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.fft_inv.process(&mut buf);
        let scale = 1.0 / n2 as f64;
        for i in 0..m {
            y[i] = self.diag[i] * x[i] - buf[i].re * scale;
        }
    }

    /// Single-node evaluation with pairwise-tree summation.
    pub fn apply_at(&self, x: &[f64], node: usize) -> f64 {
        let terms: Vec<f64> = (0..self.m)
            .filter(|&j| j != node)
            .map(|j| self.weights[node.abs_diff(j)] * (x[node] - x[j]))
            .collect();
        pairwise_sum(&terms) + self.tail[node] * x[node]
    }

    pub fn dense(&self, n: usize) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = self.diag[i];
            for j in 0..n {
                if i != j {
                    a[(i, j)] = -self.weights[i.abs_diff(j)];
                }
            }
        }
        a
    }
}

/// Two-dimensional kernel table with fixed-order direct summation
/// (desk-scale grids only).
pub struct Kernel2d {
    /// offset-indexed scaled weights, index da * m + db, w[0] = 0
    weights: Vec<f64>,
    tail: Vec<f64>,
    diag: Vec<f64>,
    m: usize,
}

impl Kernel2d {
    pub(super) fn build(spec: &OperatorSpec, c: f64) -> Self {
        let grid = spec.grid();
        let m = grid.points_per_axis();
        let h = grid.spacing();
        let l = grid.half_width();
        let s = spec.s();
        let expo = -2.0 - 2.0 * s;

        // scaled weight = h^2 * c * cellavg = c * cell integral of |z|^{-2-2s}
        let mut weights = vec![0.0; m * m];
        for da in 0..m {
            for db in 0..m {
                if da == 0 && db == 0 {
                    continue;
                }
                let cx = da as f64 * h;
                let cy = db as f64 * h;
                let w = if da.max(db) <= 4 {
                    // 8x8 Gauss on the exact cell
                    let mut acc = 0.0;
                    for (gi, &xi) in GAUSS_X.iter().enumerate() {
                        for (gj, &xj) in GAUSS_X.iter().enumerate() {
                            let px = cx + 0.5 * h * xi;
                            let py = cy + 0.5 * h * xj;
                            acc += GAUSS_W[gi] * GAUSS_W[gj] * (px * px + py * py).powf(expo / 2.0);
                        }
                    }
                    c * acc * (0.5 * h) * (0.5 * h)
                } else {
                    c * h * h * (cx * cx + cy * cy).powf(expo / 2.0)
                };
                weights[da * m + db] = w;
            }
        }

        // self-cell principal value as a five-point second difference:
        // -(Laplacian f / 4) * int_cell |z|^{-2s} dz, equivalent-disk cell
        let re = h / PI.sqrt();
        let q_cell = c * 2.0 * PI * re.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        let gamma_nb = q_cell / (4.0 * h * h);
        weights[m] += gamma_nb; // offset (1, 0)
        weights[1] += gamma_nb; // offset (0, 1)

        let hp_const = PI.sqrt() * gamma(s + 0.5) / gamma(1.0 + s);
        let half_plane = |a: f64| hp_const * a.powf(-2.0 * s) / (2.0 * s);
        let corner = |a: f64, b: f64| corner_integral(a, b, s);

        let n = m * m;
        let mut tail = vec![0.0; n];
        let mut diag = vec![0.0; n];
        // row weight sums per node (O(M^4) once at build; desk scale)
        for ia in 0..m {
            let xa = grid.axis_coord(ia);
            for ib in 0..m {
                let xb = grid.axis_coord(ib);
                let idx = ia * m + ib;
                let (rx, lx) = (l - xa, l + xa);
                let (ry, ly) = (l - xb, l + xb);
                tail[idx] = c
                    * (half_plane(rx) + half_plane(lx) + half_plane(ry) + half_plane(ly)
                        - corner(rx, ry)
                        - corner(rx, ly)
                        - corner(lx, ry)
                        - corner(lx, ly));
                let ghosts = usize::from(ia == 0)
                    + usize::from(ia == m - 1)
                    + usize::from(ib == 0)
                    + usize::from(ib == m - 1);
                tail[idx] += ghosts as f64 * gamma_nb;
                let mut sum = 0.0;
                for ja in 0..m {
                    let da = ia.abs_diff(ja);
                    for jb in 0..m {
                        sum += weights[da * m + ib.abs_diff(jb)];
                    }
                }
                diag[idx] = sum + tail[idx];
            }
        }

        Self {
            weights,
            tail,
            diag,
            m,
        }
    }

    pub fn tail(&self) -> &[f64] {
        &self.tail
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        for ia in 0..m {
            for ib in 0..m {
                let idx = ia * m + ib;
                let mut conv = 0.0;
                for ja in 0..m {
                    let row = ia.abs_diff(ja) * m;
                    let base = ja * m;
                    for jb in 0..m {
                        conv += self.weights[row + ib.abs_diff(jb)] * x[base + jb];
                    }
                }
                y[idx] = self.diag[idx] * x[idx] - conv;
            }
        }
    }

    pub fn apply_at(&self, x: &[f64], node: usize) -> f64 {
        let m = self.m;
        let (ia, ib) = (node / m, node % m);
        let terms: Vec<f64> = (0..m * m)
            .filter(|&j| j != node)
            .map(|j| {
                let (ja, jb) = (j / m, j % m);
                self.weights[ia.abs_diff(ja) * m + ib.abs_diff(jb)] * (x[node] - x[j])
            })
            .collect();
        pairwise_sum(&terms) + self.tail[node] * x[node]
    }

    pub fn dense(&self, m: usize) -> DMatrix<f64> {
        let n = m * m;
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            let (ia, ib) = (i / m, i % m);
            a[(i, i)] = self.diag[i];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (ja, jb) = (j / m, j % m);
                a[(i, j)] = -self.weights[ia.abs_diff(ja) * m + ib.abs_diff(jb)];
            }
        }
        a
    }
}

/// Integral of |z|^{-2-2s} over the quadrant {z1 > a, z2 > b}, via the
/// substitution z = (a/u, b/v) mapping it to the unit square.
fn corner_integral(a: f64, b: f64, s: f64) -> f64 {
    let mut acc = 0.0;
    for (gi, &xi) in GAUSS_X.iter().enumerate() {
        let u = 0.5 * (xi + 1.0);
        for (gj, &xj) in GAUSS_X.iter().enumerate() {
            let v = 0.5 * (xj + 1.0);
            let fu = a / u;
            let fv = b / v;
            let val = (fu * fu + fv * fv).powf(-1.0 - s) * (a * b) / (u * u * v * v);
            acc += GAUSS_W[gi] * GAUSS_W[gj] * val;
        }
    }
    acc * 0.25
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Topology, UniformGrid};
    use crate::op::{OperatorKind, OperatorSpec};

    #[test]
    fn square_exterior_integral_sandwiched_by_disks() {
        // the square [-L,L]^2 sits between the inscribed disk (radius L) and
        // the circumscribed disk (radius L sqrt(2)), so its exterior integral
        // of |z|^{-2-2s} is sandwiched by the two closed-form disk tails
        let s = 0.4;
        let hp = PI.sqrt() * gamma(s + 0.5) / gamma(1.0 + s) / (2.0 * s);
        let l: f64 = 10.0;
        let ext = 4.0 * hp * l.powf(-2.0 * s) - 4.0 * corner_integral(l, l, s);
        let disk = |r: f64| 2.0 * PI * r.powf(-2.0 * s) / (2.0 * s);
        assert!(
            ext < disk(l),
            "square exterior {ext} should be below the inscribed-disk tail {}",
            disk(l)
        );
        assert!(
            ext > disk(l * 2f64.sqrt()),
            "square exterior {ext} should exceed the circumscribed-disk tail {}",
            disk(l * 2f64.sqrt())
        );
    }

    #[test]
    fn weights_positive_and_decreasing() {
        let g = UniformGrid::new(1, 4.0, 64, Topology::Truncated).unwrap();
        let spec = OperatorSpec::new(0.5, OperatorKind::TruncatedQuadrature, g).unwrap();
        let k = Kernel1d::build(&spec, 1.0 / PI);
        assert_eq!(k.weights()[0], 0.0);
        for i in 1..63 {
            assert!(k.weights()[i] > k.weights()[i + 1]);
            assert!(k.weights()[i] > 0.0);
        }
        for &t in k.tail() {
            assert!(t > 0.0);
        }
    }

    #[test]
    fn corner_integral_symmetry() {
        let c1 = corner_integral(2.0, 5.0, 0.3);
        let c2 = corner_integral(5.0, 2.0, 0.3);
        assert!((c1 - c2).abs() < 1e-12 * c1);
    }
}
