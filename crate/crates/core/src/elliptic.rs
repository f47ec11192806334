//! The nonlinear nonlocal elliptic problem v + lambda (-Delta)^s phi_eps(v) = g,
//! solved by projected damped Newton in the v variable.
//!
//! This is both the standalone elliptic object (lambda = 1, g = f) and the
//! implicit Euler step of the parabolic marcher (lambda = dt, g = previous
//! state). Jacobian solves use a dense LU factorization up to 512 unknowns
//! and diagonally preconditioned conjugate gradients on the symmetrized
//! system above that.

use crate::error::{Error, Result};
use crate::grid::{ball_mass, BallSpec, Field};
use crate::lab::{classify_extinction, Classification, ClassifyThresholds, SweepResult};
use crate::linalg::pcg;
use crate::nonlin::{Nonlinearity, RegularizedNonlinearity};
use crate::op::{DiscreteOperator, OperatorSpec};
use nalgebra::{DMatrix, DVector};

/// One elliptic problem instance; borrows the operator and the source.
pub struct EllipticProblem<'a> {
    op: &'a DiscreteOperator,
    rnl: RegularizedNonlinearity,
    source: &'a Field,
    lambda: f64,
}

impl<'a> EllipticProblem<'a> {
    pub fn new(
        op: &'a DiscreteOperator,
        rnl: RegularizedNonlinearity,
        source: &'a Field,
        lambda: f64,
    ) -> Result<Self> {
        if source.grid() != op.grid() {
            return Err(Error::InvalidInput(
                "source grid does not match operator grid".into(),
            ));
        }
        if source.values().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("source must be nonnegative".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self {
            op,
            rnl,
            source,
            lambda,
        })
    }

    pub fn op(&self) -> &DiscreteOperator {
        self.op
    }

    pub fn rnl(&self) -> &RegularizedNonlinearity {
        &self.rnl
    }

    pub fn source(&self) -> &Field {
        self.source
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Convergence record of one Newton solve.
#[derive(Debug, Clone, Copy)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub damping_events: usize,
}

/// Solver knobs; the defaults implement the documented tolerances.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Absolute residual tolerance; `None` means 1e-10 (1 + |g|_inf).
    pub tol: Option<f64>,
    pub max_iter: usize,
    /// Unknown-count threshold between dense LU and matrix-free CG solves.
    pub dense_limit: usize,
    pub cg_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: None,
            max_iter: 60,
            dense_limit: 512,
            cg_max_iter: 1200,
        }
    }
}

impl SolverOptions {
    pub fn resolve_tol(&self, g: &Field) -> f64 {
        self.tol.unwrap_or_else(|| {
            let ginf = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            1e-10 * (1.0 + ginf)
        })
    }
}

/// Residual field v + lambda A phi_eps(v) - g.
pub fn residual(p: &EllipticProblem, v: &Field) -> Result<Field> {
    if v.grid() != p.op.grid() {
        return Err(Error::InvalidInput("residual: grid mismatch".into()));
    }
    if v.values().iter().any(|&x| x < 0.0) {
        return Err(Error::DomainError(
            "residual requires a nonnegative iterate".into(),
        ));
    }
    let mut r = vec![0.0; v.values().len()];
    residual_values(p, v.values(), &mut r)?;
    Ok(v.with_values(r))
}

fn residual_values(p: &EllipticProblem, v: &[f64], out: &mut [f64]) -> Result<()> {
    let n = v.len();
    let mut phi = vec![0.0; n];
    for i in 0..n {
        phi[i] = p.rnl.phi_eps(v[i])?;
    }
    p.op.apply_values(&phi, out);
    let g = p.source.values();
    for i in 0..n {
        out[i] = v[i] + p.lambda * out[i] - g[i];
    }
    Ok(())
}

fn linf(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Solve the elliptic problem by projected damped Newton.
///
/// The iterate stays nonnegative by projection; a backtracking line search on
/// the residual max-norm guards each update. The returned flag is honest:
/// callers must treat `converged = false` as a failure.
pub fn solve_elliptic(
    p: &EllipticProblem,
    opts: &SolverOptions,
    warm_start: Option<&Field>,
) -> Result<(Field, SolveReport)> {
    let n = p.source.values().len();
    let tol = opts.resolve_tol(p.source);

    let mut v: Vec<f64> = match warm_start {
        Some(w) => {
            if w.grid() != p.op.grid() {
                return Err(Error::InvalidInput("warm start grid mismatch".into()));
            }
            w.values().iter().map(|&x| x.max(0.0)).collect()
        }
        None => p.source.values().iter().map(|&x| x.max(0.0)).collect(),
    };

    let mut r = vec![0.0; n];
    residual_values(p, &v, &mut r)?;
    let mut rnorm = linf(&r);

    let mut best_v = v.clone();
    let mut best_rnorm = rnorm;
    let mut iterations = 0;
    let mut damping_events = 0;

    while rnorm > tol && iterations < opts.max_iter {
        let mut d = vec![0.0; n];
        for i in 0..n {
            d[i] = p.rnl.phi_eps_prime(v[i])?.max(1e-300);
        }
        let delta = if n <= opts.dense_limit {
            dense_newton_step(p, &d, &r)
        } else {
            cg_newton_step(p, &d, &r, tol, rnorm, opts.cg_max_iter)
        };

        // backtracking on the projected update
        let mut alpha = 1.0;
        let mut trial = vec![0.0; n];
        let mut r_trial = vec![0.0; n];
        let mut accepted = false;
        while alpha >= 1e-12 {
            for i in 0..n {
                trial[i] = (v[i] + alpha * delta[i]).max(0.0);
            }
            residual_values(p, &trial, &mut r_trial)?;
            let t_norm = linf(&r_trial);
            if t_norm <= (1.0 - 1e-4 * alpha) * rnorm {
                if alpha < 1.0 {
                    damping_events += 1;
                }
                v.copy_from_slice(&trial);
                r.copy_from_slice(&r_trial);
                rnorm = t_norm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        iterations += 1;
        if !accepted {
            break; // stalled; report best iterate honestly
        }
        if rnorm < best_rnorm {
            best_rnorm = rnorm;
            best_v.copy_from_slice(&v);
        }
    }

    let (final_v, final_rnorm) = if rnorm <= best_rnorm {
        (v, rnorm)
    } else {
        (best_v, best_rnorm)
    };
    let report = SolveReport {
        iterations,
        final_residual: final_rnorm,
        converged: final_rnorm <= tol,
    damping_events,
    };
    let field = p.source.with_values(final_v).with_floor(p.rnl.eps());
    Ok((field, report))
}

/// Dense Newton step: factor J = I + lambda A diag(d) and solve J delta = -r.
fn dense_newton_step(p: &EllipticProblem, d: &[f64], r: &[f64]) -> Vec<f64> {
    let n = r.len();
    let a = p.op.dense();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        let scale = p.lambda * d[col];
        for row in 0..n {
            j[(row, col)] = scale * a[(row, col)];
        }
        j[(col, col)] += 1.0;
    }
    let rhs = DVector::from_iterator(n, r.iter().map(|&x| -x));
    let lu = j.lu();
    match lu.solve(&rhs) {
        Some(sol) => sol.as_slice().to_vec(),
        None => vec![0.0; n], // singular Jacobian: fall back to a null step
    }
}

/// Matrix-free Newton step through the symmetrized SPD system
/// (I + lambda D^{1/2} A D^{1/2}) y = -D^{1/2} r, delta = D^{-1/2} y.
fn cg_newton_step(
    p: &EllipticProblem,
    d: &[f64],
    r: &[f64],
    tol: f64,
    rnorm: f64,
    cg_max_iter: usize,
) -> Vec<f64> {
    let n = r.len();
    let dsqrt: Vec<f64> = d.iter().map(|&x| x.sqrt()).collect();
    let adiag = p.op.diagonal();
    let lambda = p.lambda;

    let apply = |x: &[f64], y: &mut [f64]| {
        let scaled: Vec<f64> = x.iter().zip(&dsqrt).map(|(v, s)| v * s).collect();
        p.op.apply_values(&scaled, y);
        for i in 0..n {
            y[i] = x[i] + lambda * dsqrt[i] * y[i];
        }
    };
    let precond = |rr: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = rr[i] / (1.0 + lambda * d[i] * adiag[i]);
        }
    };
    let b: Vec<f64> = r.iter().zip(&dsqrt).map(|(x, s)| -x * s).collect();
    let mut y = vec![0.0; n];
    // inexact Newton: loose solves far from the root, tight near it
    let eta = (0.5 * tol / rnorm).clamp(1e-13, 1e-6);
    pcg(apply, precond, &b, &mut y, eta, cg_max_iter);
    y.iter().zip(&dsqrt).map(|(v, s)| v / s).collect()
}

/// Per-epsilon ball masses of u_eps = v_eps + eps for the standalone elliptic
/// problem (lambda = 1, g = f), with warm-started continuation in eps.
///
/// Classification follows the explicit extinction rule; any non-converged
/// inner solve marks the sweep `Inconclusive`.
pub fn elliptic_epsilon_sweep(
    f: &Field,
    op_spec: &OperatorSpec,
    nl: &Nonlinearity,
    eps_list: &[f64],
    ball: &BallSpec,
    opts: &SolverOptions,
    thresholds: &ClassifyThresholds,
) -> Result<SweepResult> {
    if eps_list.windows(2).any(|w| w[1] >= w[0]) || eps_list.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidParameter(
            "eps_list must be strictly decreasing and positive".into(),
        ));
    }
    let op = DiscreteOperator::build(op_spec.clone())?;
    let mut masses = Vec::with_capacity(eps_list.len());
    let mut all_converged = true;
    let mut warm: Option<Field> = None;
    for &eps in eps_list {
        let rnl = RegularizedNonlinearity::new(nl.clone(), eps)?;
        let problem = EllipticProblem::new(&op, rnl, f, 1.0)?;
        let (v, report) = solve_elliptic(&problem, opts, warm.as_ref())?;
        if !report.converged {
            all_converged = false;
        }
        let u = v.add_scalar(eps);
        masses.push(ball_mass(&u, ball)?);
        warm = Some(v);
    }
    let reference = ball_mass(f, ball)?;
    let (classification, slope) = if all_converged {
        classify_extinction(&masses, eps_list, reference, thresholds)?
    } else {
        (Classification::Inconclusive, f64::NAN)
    };
    Ok(SweepResult {
        eps_values: eps_list.to_vec(),
        ball_masses: masses,
        tau: 0.0,
        slope,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Exterior, Topology, UniformGrid};
    use crate::op::{DiscreteOperator, OperatorKind, OperatorSpec};

    fn build(s: f64, kind: OperatorKind, grid: &UniformGrid) -> DiscreteOperator {
        DiscreteOperator::build(OperatorSpec::new(s, kind, grid.clone()).unwrap()).unwrap()
    }

    fn power_rnl(n: f64, eps: f64) -> RegularizedNonlinearity {
        RegularizedNonlinearity::new(Nonlinearity::power(n).unwrap(), eps).unwrap()
    }

    #[test]
    fn constant_source_on_torus_solves_in_two_iterations() {
        let g = UniformGrid::new(1, 4.0, 32, Topology::Periodic).unwrap();
        let op = build(0.5, OperatorKind::PeriodicSpectral, &g);
        let src = Field::constant(g, 0.7).unwrap();
        let p = EllipticProblem::new(&op, power_rnl(1.0, 0.1), &src, 1.0).unwrap();
        let (v, rep) = solve_elliptic(&p, &SolverOptions::default(), None).unwrap();
        assert!(rep.converged);
        assert!(rep.iterations <= 2, "took {} iterations", rep.iterations);
        for &x in v.values() {
            assert!((x - 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let g = UniformGrid::new(1, 2.0, 16, Topology::Truncated).unwrap();
        let op = build(0.4, OperatorKind::TruncatedQuadrature, &g);
        let src = Field::constant(g, 0.0).unwrap();
        let p = EllipticProblem::new(&op, power_rnl(1.0, 0.5), &src, 1.0).unwrap();
        let r = residual(&p, &src).unwrap();
        assert!(linf(r.values()) == 0.0);
        let (v, rep) = solve_elliptic(&p, &SolverOptions::default(), None).unwrap();
        assert!(rep.converged && rep.iterations == 0);
        assert!(v.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn residual_matches_hand_assembled_dense_evaluation() {
        let g = UniformGrid::new(1, 1.0, 8, Topology::Truncated).unwrap();
        let op = build(0.6, OperatorKind::TruncatedQuadrature, &g);
        let rnl = power_rnl(1.3, 0.2);
        let vvals = vec![0.3, 0.9, 0.0, 0.4, 1.2, 0.11, 0.05, 0.6];
        let gvals = vec![0.5, 0.1, 0.7, 0.0, 0.3, 0.9, 0.25, 0.4];
        let src = Field::new(g.clone(), gvals.clone(), Exterior::ZeroOutside).unwrap();
        let v = Field::new(g.clone(), vvals.clone(), Exterior::ZeroOutside).unwrap();
        let lambda = 0.37;
        let p = EllipticProblem::new(&op, rnl.clone(), &src, lambda).unwrap();
        let r = residual(&p, &v).unwrap();

        let a = op.dense();
        for i in 0..8 {
            let mut expect = vvals[i] - gvals[i];
            for j in 0..8 {
                expect += lambda * a[(i, j)] * rnl.phi_eps(vvals[j]).unwrap();
            }
            assert!(
                (r.values()[i] - expect).abs() < 1e-14,
                "node {i}: {} vs {expect}",
                r.values()[i]
            );
        }
    }

    #[test]
    fn residual_rejects_negative_iterates() {
        let g = UniformGrid::new(1, 1.0, 8, Topology::Truncated).unwrap();
        let op = build(0.5, OperatorKind::TruncatedQuadrature, &g);
        let src = Field::constant(g.clone(), 1.0).unwrap();
        let p = EllipticProblem::new(&op, power_rnl(1.0, 0.1), &src, 1.0).unwrap();
        let bad = Field::new(
            g,
            vec![0.1, -0.2, 0.3, 0.1, 0.0, 0.2, 0.5, 0.1],
            Exterior::ZeroOutside,
        )
        .unwrap();
        assert!(matches!(residual(&p, &bad), Err(Error::DomainError(_))));
    }

    #[test]
    fn jacobian_matches_directional_finite_differences() {
        let g = UniformGrid::new(1, 3.0, 24, Topology::Truncated).unwrap();
        let op = build(0.45, OperatorKind::TruncatedQuadrature, &g);
        let rnl = power_rnl(1.0, 0.3);
        let src = Field::constant(g.clone(), 0.0).unwrap();
        let lambda = 0.8;
        let p = EllipticProblem::new(&op, rnl.clone(), &src, lambda).unwrap();

        let mut state = 42u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let v: Vec<f64> = (0..24).map(|_| 0.1 + rand()).collect();
        let w: Vec<f64> = (0..24).map(|_| rand() * 2.0 - 1.0).collect();
        let h = 1e-6;

        let vp: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + h * b).collect();
        let vm: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - h * b).collect();
        let mut rp = vec![0.0; 24];
        let mut rm = vec![0.0; 24];
        residual_values(&p, &vp, &mut rp).unwrap();
        residual_values(&p, &vm, &mut rm).unwrap();

        // analytic J w = w + lambda A (phi_eps'(v) .* w)
        let mut scaled = vec![0.0; 24];
        for i in 0..24 {
            scaled[i] = rnl.phi_eps_prime(v[i]).unwrap() * w[i];
        }
        let mut jw = vec![0.0; 24];
        op.apply_values(&scaled, &mut jw);
        let scale = jw.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0;
        for i in 0..24 {
            let fd = (rp[i] - rm[i]) / (2.0 * h);
            let an = w[i] + lambda * jw[i];
            assert!(
                (fd - an).abs() <= 1e-6 * scale,
                "node {i}: fd={fd}, analytic={an}"
            );
        }
    }

    #[test]
    fn five_node_problem_matches_brute_force_root_find() {
        // dense oracle: Newton on the full nonlinear system with a
        // finite-difference Jacobian, written independently of the solver path
        let g = UniformGrid::new(1, 1.0, 8, Topology::Truncated).unwrap();
        let op = build(0.5, OperatorKind::TruncatedQuadrature, &g);
        let rnl = power_rnl(1.0, 0.1);
        let gvals: Vec<f64> = vec![0.4, 1.0, 0.2, 0.8, 0.6, 0.3, 0.9, 0.5];
        let src = Field::new(g.clone(), gvals, Exterior::ZeroOutside).unwrap();
        let p = EllipticProblem::new(&op, rnl.clone(), &src, 1.0).unwrap();
        let (v, rep) = solve_elliptic(&p, &SolverOptions::default(), None).unwrap();
        assert!(rep.converged);

        // oracle
        let n = 8;
        let a = op.dense().clone();
        let f_res = |x: &DVector<f64>| -> DVector<f64> {
            let phi = DVector::from_iterator(n, x.iter().map(|&u| rnl.phi_eps(u).unwrap()));
            x + &a * phi - DVector::from_column_slice(src.values())
        };
        let mut x = DVector::from_element(n, 0.5);
        for _ in 0..200 {
            let r = f_res(&x);
            if r.amax() < 1e-13 {
                break;
            }
            let mut jac = DMatrix::zeros(n, n);
            let hfd = 1e-7;
            for j in 0..n {
                let mut xp = x.clone();
                xp[j] += hfd;
                let mut xm = x.clone();
                xm[j] -= hfd;
                xm[j] = xm[j].max(1e-12);
                let col = (f_res(&xp) - f_res(&xm)) / (xp[j] - xm[j]);
                jac.set_column(j, &col);
            }
            let step = jac.lu().solve(&(-f_res(&x))).unwrap();
            x += step;
            x.iter_mut().for_each(|u| *u = u.max(0.0));
        }
        for i in 0..n {
            assert!(
                (v.values()[i] - x[i]).abs() < 1e-10,
                "node {i}: solver={}, oracle={}",
                v.values()[i],
                x[i]
            );
        }
    }

    #[test]
    fn order_preservation_of_the_resolvent() {
        let g = UniformGrid::new(1, 4.0, 48, Topology::Truncated).unwrap();
        let op = build(0.5, OperatorKind::TruncatedQuadrature, &g);
        let g1 = Field::from_fn(g.clone(), |x| (-x[0] * x[0]).exp()).unwrap();
        let g2 = Field::from_fn(g.clone(), |x| (-x[0] * x[0]).exp() + 0.2).unwrap();
        let opts = SolverOptions::default();
        let rnl = power_rnl(1.0, 0.05);
        let p1 = EllipticProblem::new(&op, rnl.clone(), &g1, 0.5).unwrap();
        let p2 = EllipticProblem::new(&op, rnl, &g2, 0.5).unwrap();
        let (v1, r1) = solve_elliptic(&p1, &opts, None).unwrap();
        let (v2, r2) = solve_elliptic(&p2, &opts, None).unwrap();
        assert!(r1.converged && r2.converged);
        let tol = 2.0 * opts.resolve_tol(&g2);
        for i in 0..48 {
            assert!(
                v1.values()[i] <= v2.values()[i] + tol,
                "order violated at node {i}"
            );
        }
    }

    #[test]
    fn l1_contraction_of_the_resolvent() {
        let g = UniformGrid::new(1, 4.0, 48, Topology::Truncated).unwrap();
        let h = g.spacing();
        let op = build(0.4, OperatorKind::TruncatedQuadrature, &g);
        let mut state = 7u64;
        let mut rand = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let opts = SolverOptions::default();
        for _ in 0..5 {
            let a: Vec<f64> = (0..48).map(|_| rand()).collect();
            let b: Vec<f64> = (0..48).map(|_| rand()).collect();
            let ga = Field::new(g.clone(), a.clone(), Exterior::ZeroOutside).unwrap();
            let gb = Field::new(g.clone(), b.clone(), Exterior::ZeroOutside).unwrap();
            let rnl = power_rnl(1.0, 0.1);
            let pa = EllipticProblem::new(&op, rnl.clone(), &ga, 0.3).unwrap();
            let pb = EllipticProblem::new(&op, rnl, &gb, 0.3).unwrap();
            let (va, _) = solve_elliptic(&pa, &opts, None).unwrap();
            let (vb, _) = solve_elliptic(&pb, &opts, None).unwrap();
            let lhs: f64 = va
                .values()
                .iter()
                .zip(vb.values())
                .map(|(x, y)| (x - y).max(0.0))
                .sum::<f64>()
                * h;
            let rhs: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).max(0.0)).sum::<f64>() * h;
            assert!(lhs <= rhs + 1e-9, "contraction violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn epsilon_monotone_at_elliptic_level() {
        let g = UniformGrid::new(1, 8.0, 64, Topology::Truncated).unwrap();
        let op_spec = OperatorSpec::new(0.3, OperatorKind::TruncatedQuadrature, g.clone()).unwrap();
        let op = DiscreteOperator::build(op_spec).unwrap();
        let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let opts = SolverOptions::default();
        let mut last: Option<Vec<f64>> = None;
        for eps in [1e-1, 1e-2, 1e-3] {
            let p = EllipticProblem::new(&op, power_rnl(1.0, eps), &f, 1.0).unwrap();
            let (v, rep) = solve_elliptic(&p, &opts, None).unwrap();
            assert!(rep.converged);
            let u: Vec<f64> = v.values().iter().map(|x| x + eps).collect();
            if let Some(bigger) = &last {
                let tol = 2.0 * opts.resolve_tol(&f);
                for i in 0..u.len() {
                    assert!(u[i] <= bigger[i] + tol, "eps-monotonicity failed at {i}");
                }
            }
            last = Some(u);
        }
    }

    #[test]
    fn matrix_free_path_agrees_with_dense_path() {
        let g = UniformGrid::new(1, 6.0, 96, Topology::Truncated).unwrap();
        let op = build(0.5, OperatorKind::TruncatedQuadrature, &g);
        let f = Field::from_fn(g, |x| 1.2 * (-x[0] * x[0] / 2.0).exp()).unwrap();
        let rnl = power_rnl(1.0, 0.05);
        let p = EllipticProblem::new(&op, rnl, &f, 0.7).unwrap();
        let dense_opts = SolverOptions {
            dense_limit: 4096,
            ..Default::default()
        };
        let cg_opts = SolverOptions {
            dense_limit: 8,
            ..Default::default()
        };
        let (vd, rd) = solve_elliptic(&p, &dense_opts, None).unwrap();
        let (vc, rc) = solve_elliptic(&p, &cg_opts, None).unwrap();
        assert!(rd.converged && rc.converged);
        for i in 0..96 {
            assert!((vd.values()[i] - vc.values()[i]).abs() < 1e-8);
        }
    }
}
