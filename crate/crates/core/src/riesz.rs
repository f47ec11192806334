//! Riesz potential: discrete convolution with c_{N,s} |y|^{2s-N}, the inverse
//! of the fractional Laplacian in the supercritical range N > 2s.

use crate::error::{Error, Result};
use crate::grid::{Exterior, Field};
use crate::special::{check_order, riesz_constant};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Discrete Riesz potential of a decaying field.
///
/// The kernel cell at offset zero and its neighbors use exact cell averages
/// (the singularity |y|^{2s-N} is integrable for N > 2s), so the convolution
/// is second order.
pub fn riesz_potential(f: &Field, s: f64) -> Result<Field> {
    check_order(s)?;
    let grid = f.grid();
    let dim = grid.dimension();
    if (dim as f64) <= 2.0 * s {
        return Err(Error::Subcritical { n: dim, s });
    }
    if f.exterior() != Exterior::ZeroOutside {
        return Err(Error::InvalidInput(
            "riesz potential requires a decaying (zero-outside) field".into(),
        ));
    }
    let c = riesz_constant(dim, s)?;
    match dim {
        1 => Ok(f.with_values(riesz_1d(f, s, c))),
        2 => Ok(f.with_values(riesz_2d(f, s, c))),
        _ => Err(Error::UnsupportedDimension(
            "riesz potential is capped at N <= 2".into(),
        )),
    }
}

fn riesz_1d(f: &Field, s: f64, c: f64) -> Vec<f64> {
    let grid = f.grid();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let two_s = 2.0 * s;

    // scaled kernel weights: rho[k] = c * cell integral of |z|^{2s-1}
    let mut rho = vec![0.0; m];
    rho[0] = c * 2.0 * (0.5 * h).powf(two_s) / two_s;
    for (k, r) in rho.iter_mut().enumerate().skip(1) {
        let a = (k as f64 - 0.5) * h;
        let b = (k as f64 + 0.5) * h;
        *r = c * (b.powf(two_s) - a.powf(two_s)) / two_s;
    }

    // full circulant convolution including the diagonal
    let n2 = 2 * m;
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n2);
    let inv = planner.plan_fft_inverse(n2);
    let mut khat = vec![Complex64::new(0.0, 0.0); n2];
    khat[0] = Complex64::new(rho[0], 0.0);
    for k in 1..m {
        khat[k] = Complex64::new(rho[k], 0.0);
        khat[n2 - k] = Complex64::new(rho[k], 0.0);
    }
    fwd.process(&mut khat);

    let mut buf = vec![Complex64::new(0.0, 0.0); n2];
    for i in 0..m {
        buf[i] = Complex64::new(f.values()[i], 0.0);
    }
    fwd.process(&mut buf);
    for (b, k) in buf.iter_mut().zip(&khat) {
        *b *= k;
    }
    inv.process(&mut buf);
    let scale = 1.0 / n2 as f64;
    (0..m).map(|i| buf[i].re * scale).collect()
}

fn riesz_2d(f: &Field, s: f64, c: f64) -> Vec<f64> {
    let grid = f.grid();
    let m = grid.points_per_axis();
    let h = grid.spacing();
    let expo = 2.0 * s - 2.0;

    // offset table of scaled weights: c * cell integral of |z|^{2s-2}
    let mut rho = vec![0.0; m * m];
    for da in 0..m {
        for db in 0..m {
            let w = if da == 0 && db == 0 {
                // equivalent-disk correction: disk of the same area as a cell
                let re = h / PI.sqrt();
                c * PI * re.powf(2.0 * s) / s
            } else if da.max(db) <= 4 {
                let mut acc = 0.0;
                for (gi, &xi) in GAUSS_X.iter().enumerate() {
                    for (gj, &xj) in GAUSS_X.iter().enumerate() {
                        let px = da as f64 * h + 0.5 * h * xi;
                        let py = db as f64 * h + 0.5 * h * xj;
                        acc += GAUSS_W[gi] * GAUSS_W[gj] * (px * px + py * py).powf(expo / 2.0);
                    }
                }
                c * acc * (0.5 * h) * (0.5 * h)
            } else {
                let r2 = (da as f64 * h).powi(2) + (db as f64 * h).powi(2);
                c * h * h * r2.powf(expo / 2.0)
            };
            rho[da * m + db] = w;
        }
    }

    let x = f.values();
    let mut out = vec![0.0; m * m];
    for ia in 0..m {
        for ib in 0..m {
            let mut acc = 0.0;
            for ja in 0..m {
                let row = ia.abs_diff(ja) * m;
                let base = ja * m;
                for jb in 0..m {
                    acc += rho[row + ib.abs_diff(jb)] * x[base + jb];
                }
            }
            out[ia * m + ib] = acc;
        }
    }
    out
}

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

/// Growth profile |x|^{2s-1} of the one-dimensional Green kernel, defined for
/// s in (1/2, 1).
pub fn one_d_kernel(x: f64, s: f64) -> Result<f64> {
    if !(s > 0.5 && s < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "the 1D Green kernel requires s in (1/2, 1), got {s}"
        )));
    }
    Ok(x.abs().powf(2.0 * s - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Topology, UniformGrid};
    use crate::op::{DiscreteOperator, OperatorKind, OperatorSpec};

    #[test]
    fn subcritical_rejection() {
        let g = UniformGrid::new(1, 4.0, 32, Topology::Truncated).unwrap();
        let f = Field::constant(g, 1.0).unwrap();
        assert!(matches!(
            riesz_potential(&f, 0.5),
            Err(Error::Subcritical { .. })
        ));
        assert!(matches!(
            riesz_potential(&f, 0.8),
            Err(Error::Subcritical { .. })
        ));
    }

    #[test]
    fn one_d_kernel_values_and_domain() {
        assert_eq!(one_d_kernel(0.0, 0.75).unwrap(), 0.0);
        assert_eq!(one_d_kernel(4.0, 0.75).unwrap(), 2.0);
        assert!(one_d_kernel(1.0, 0.5).is_err());
        assert!(one_d_kernel(1.0, 0.3).is_err());
    }

    #[test]
    fn one_d_kernel_elementary_holder_inequality() {
        // | |x|^a - |y|^a | <= |x-y|^a for a in (0,1), sampled
        let s = 0.75;
        let a = 2.0 * s - 1.0;
        let mut state = 123_456_789_u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0
        };
        for _ in 0..1000 {
            let (x, y) = (rand(), rand());
            let lhs = (one_d_kernel(x, s).unwrap() - one_d_kernel(y, s).unwrap()).abs();
            let rhs = (x - y).abs().powf(a);
            assert!(lhs <= rhs + 1e-12, "x={x}, y={y}");
        }
    }

    #[test]
    fn riesz_inverts_truncated_operator_on_smooth_bump() {
        // zero-mass band-limited bump: the operator image then decays fast
        // enough that the box truncation contributes nothing at this scale,
        // leaving only the O(h^2) quadrature error of the two convolutions
        let s = 0.3;
        let g = UniformGrid::new(1, 32.0, 4096, Topology::Truncated).unwrap();
        let f = Field::from_fn(g.clone(), |x| (1.0 - 2.0 * x[0] * x[0]) * (-x[0] * x[0]).exp())
            .unwrap();
        let spec = OperatorSpec::new(s, OperatorKind::TruncatedQuadrature, g).unwrap();
        let o = DiscreteOperator::build(spec).unwrap();
        let g1 = o.apply(&f).unwrap();
        let back = riesz_potential(&g1, s).unwrap();
        let num: f64 = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = f.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(num / den <= 1e-3, "relative L2 error {}", num / den);
    }

    #[test]
    fn potential_of_narrow_bump_decays_like_power() {
        let s = 0.3;
        let g = UniformGrid::new(1, 256.0, 2048, Topology::Truncated).unwrap();
        let f = Field::from_fn(g.clone(), |x| (-(x[0] * 4.0).powi(2)).exp()).unwrap();
        let pot = riesz_potential(&f, s).unwrap();
        // log-log fit over distances well inside the box
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..g.node_count() {
            let x = g.axis_coord(i);
            if (8.0..=64.0).contains(&x) {
                xs.push(x.ln());
                ys.push(pot.values()[i].ln());
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        let expect = 2.0 * s - 1.0;
        assert!(
            (slope - expect).abs() <= 0.05 * expect.abs(),
            "fitted exponent {slope}, expected {expect}"
        );
    }
}
