//! Implicit Euler marching for the regularized Cauchy/Dirichlet problem in
//! v-form: each step solves v_next + dt (-Delta)^s phi_eps(v_next) = v.
//!
//! The step operator is exactly the elliptic resolvent, so it inherits order
//! preservation, positivity, and the L1 contraction nodewise up to solver
//! tolerance. On step failure the marcher halves dt for that interval, up to
//! six times, then aborts with a partial trajectory.

use crate::elliptic::{solve_elliptic, EllipticProblem, SolveReport, SolverOptions};
use crate::error::{Error, Result};
use crate::grid::{ball_mass, lp_norm, total_mass, BallSpec, Field};
use crate::nonlin::{Nonlinearity, RegularizedNonlinearity};
use crate::op::{DiscreteOperator, OperatorKind, OperatorSpec};

/// One regularized parabolic problem: operator, nonlinearity, eps, data,
/// horizon, and step size.
#[derive(Clone)]
pub struct ParabolicProblem {
    pub op_spec: OperatorSpec,
    pub nl: Nonlinearity,
    pub eps: f64,
    /// Initial data u0 >= 0; the march runs in v-form with v(0) = u0.
    pub initial: Field,
    pub t_end: f64,
    pub dt: f64,
    /// Ball used by the per-step summaries.
    pub ball: BallSpec,
    pub solver: SolverOptions,
}

impl ParabolicProblem {
    pub fn validate(&self) -> Result<()> {
        if self.initial.grid() != self.op_spec.grid() {
            return Err(Error::InvalidInput(
                "initial data grid does not match operator grid".into(),
            ));
        }
        if self.initial.values().iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("initial data must be nonnegative".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter("eps must be positive".into()));
        }
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(Error::InvalidParameter(
                "need 0 < dt <= t_end".into(),
            ));
        }
        Ok(())
    }

    fn rnl(&self) -> Result<RegularizedNonlinearity> {
        RegularizedNonlinearity::new(self.nl.clone(), self.eps)
    }

    /// Equality of configuration up to initial data (used by comparisons).
    pub fn same_configuration(&self, other: &ParabolicProblem) -> bool {
        self.op_spec == other.op_spec
            && self.eps == other.eps
            && self.dt == other.dt
            && self.t_end == other.t_end
            && nonlinearity_eq(&self.nl, &other.nl)
    }
}

fn nonlinearity_eq(a: &Nonlinearity, b: &Nonlinearity) -> bool {
    match (a, b) {
        (Nonlinearity::Power { n: x }, Nonlinearity::Power { n: y }) => x == y,
        (Nonlinearity::Logarithmic, Nonlinearity::Logarithmic) => true,
        _ => false,
    }
}

/// Aggregates recorded at every accepted top-level step boundary.
#[derive(Debug, Clone, Copy)]
pub struct StepSummary {
    pub t: f64,
    pub mass: f64,
    pub ball_mass: f64,
    pub linf: f64,
    pub min: f64,
    pub max: f64,
}

/// A completed (or aborted) march: summaries every step, snapshots at the
/// requested sample times, and an honest failure flag.
pub struct Trajectory {
    pub summaries: Vec<StepSummary>,
    /// (actual time, v state) at the step boundaries nearest the requested times
    pub snapshots: Vec<(f64, Field)>,
    pub failed: bool,
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.t).collect()
    }

    /// Snapshot whose recorded time is nearest to `t`.
    pub fn snapshot_near(&self, t: f64) -> Option<&(f64, Field)> {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.0 - t).abs().total_cmp(&(b.0 - t).abs()))
    }
}

/// One implicit Euler step: solves v_next + dt A phi_eps(v_next) = state.
pub fn step(
    state: &Field,
    op: &DiscreteOperator,
    rnl: &RegularizedNonlinearity,
    dt: f64,
    opts: &SolverOptions,
) -> Result<(Field, SolveReport)> {
    let problem = EllipticProblem::new(op, rnl.clone(), state, dt)?;
    let (v, report) = solve_elliptic(&problem, opts, Some(state))?;
    if !report.converged {
        return Err(Error::StepFailure {
            t: f64::NAN,
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    Ok((v, report))
}

fn summary(t: f64, v: &Field, ball: &BallSpec) -> StepSummary {
    StepSummary {
        t,
        mass: total_mass(v),
        ball_mass: ball_mass(v, ball).unwrap_or(f64::NAN),
        linf: lp_norm(v, f64::INFINITY).unwrap_or(f64::NAN),
        min: v.min(),
        max: v.max(),
    }
}

/// Advance one interval of length `dt`, halving on step failure up to
/// `MAX_HALVINGS` levels deep. Deterministic by construction.
fn advance(
    state: &Field,
    op: &DiscreteOperator,
    rnl: &RegularizedNonlinearity,
    dt: f64,
    depth: usize,
    t: f64,
    opts: &SolverOptions,
) -> Result<Field> {
    const MAX_HALVINGS: usize = 6;
    let problem = EllipticProblem::new(op, rnl.clone(), state, dt)?;
    let (v, report) = solve_elliptic(&problem, opts, Some(state))?;
    if report.converged {
        return Ok(v);
    }
    if depth >= MAX_HALVINGS {
        return Err(Error::StepFailure {
            t,
            iterations: report.iterations,
            residual: report.final_residual,
        });
    }
    let half = dt / 2.0;
    let mid = advance(state, op, rnl, half, depth + 1, t, opts)?;
    advance(&mid, op, rnl, half, depth + 1, t + half, opts)
}

/// March the problem to t_end, recording summaries at every top-level step
/// and snapshots at the step boundaries nearest the requested sample times.
pub fn evolve(p: &ParabolicProblem, sample_times: &[f64]) -> Result<Trajectory> {
    p.validate()?;
    if sample_times.iter().any(|&t| t < 0.0 || t > p.t_end + 1e-12) {
        return Err(Error::InvalidParameter(
            "sample times must lie in [0, t_end]".into(),
        ));
    }
    let op = DiscreteOperator::build(p.op_spec.clone())?;
    evolve_with_operator(p, sample_times, &op)
}

/// Same as [`evolve`] but reuses an already built operator.
pub fn evolve_with_operator(
    p: &ParabolicProblem,
    sample_times: &[f64],
    op: &DiscreteOperator,
) -> Result<Trajectory> {
    let rnl = p.rnl()?;
    let n_steps = (p.t_end / p.dt - 1e-9).ceil().max(1.0) as usize;

    // map each requested time to the nearest step boundary index
    let mut want: Vec<usize> = sample_times
        .iter()
        .map(|&t| ((t / p.dt).round() as usize).min(n_steps))
        .collect();
    want.sort_unstable();
    want.dedup();

    let mut v = p.initial.clone().with_floor(p.eps);
    let mut summaries = vec![summary(0.0, &v, &p.ball)];
    let mut snapshots = Vec::new();
    if want.first() == Some(&0) {
        snapshots.push((0.0, v.clone()));
    }

    for k in 1..=n_steps {
        let t_prev = (k - 1) as f64 * p.dt;
        let dt_k = if k == n_steps {
            p.t_end - t_prev
        } else {
            p.dt
        };
        match advance(&v, op, &rnl, dt_k, 0, t_prev, &p.solver) {
            Ok(next) => v = next,
            Err(e) => {
                return Ok(Trajectory {
                    summaries,
                    snapshots,
                    failed: true,
                    failure: Some(e),
                });
            }
        }
        let t = t_prev + dt_k;
        summaries.push(summary(t, &v, &p.ball));
        if want.binary_search(&k).is_ok() {
            snapshots.push((t, v.clone()));
        }
    }
    Ok(Trajectory {
        summaries,
        snapshots,
        failed: false,
        failure: None,
    })
}

/// Trajectory-level diagnostics; every entry is recomputable from the
/// trajectory alone.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsReport {
    /// max_t |mass(t) - mass(0)| / mass(0)
    pub mass_drift: f64,
    /// sup-norm of v nonincreasing between consecutive summaries (1e-10 slack)
    pub linf_monotone: bool,
    /// positive part of the time-monotonicity defect, in u = v + eps:
    /// Power(n): max over nodes and consecutive snapshots of
    /// u(t2)/u(t1) - (t2/t1)^{1/(n+1)}; Logarithmic: the log form
    /// log u(t2) - log u(t1) - log(t2/t1), checked for t2 <= t_end/2.
    pub ab_violation: f64,
    /// max positive increment of the L1 norm between consecutive summaries
    /// (contraction against the zero solution)
    pub contraction_excess: f64,
}

pub fn diagnostics(tr: &Trajectory, p: &ParabolicProblem) -> DiagnosticsReport {
    let m0 = tr.summaries.first().map(|s| s.mass).unwrap_or(0.0);
    let mut mass_drift = 0.0f64;
    let mut linf_monotone = true;
    let mut contraction_excess = 0.0f64;
    for w in tr.summaries.windows(2) {
        if w[1].linf > w[0].linf + 1e-10 {
            linf_monotone = false;
        }
        contraction_excess = contraction_excess.max(w[1].mass - w[0].mass);
    }
    for s in &tr.summaries {
        let d = (s.mass - m0).abs();
        mass_drift = mass_drift.max(if m0 != 0.0 { d / m0 } else { d });
    }

    let mut ab_violation = 0.0f64;
    if let Some(n) = p.nl.exponent() {
        let a = 1.0 / (n + 1.0);
        let log_kind = matches!(p.nl, Nonlinearity::Logarithmic);
        for w in tr.snapshots.windows(2) {
            let (t1, ref f1) = w[0];
            let (t2, ref f2) = w[1];
            if t1 <= 0.0 || t2 <= t1 {
                continue;
            }
            if log_kind && t2 > p.t_end / 2.0 {
                continue; // near extinction the log-form cone needs care; flag only
            }
            for (x1, x2) in f1.values().iter().zip(f2.values()) {
                let u1 = x1 + p.eps;
                let u2 = x2 + p.eps;
                let defect = if log_kind {
                    (u2 / u1).ln() - (t2 / t1).ln()
                } else {
                    u2 / u1 - (t2 / t1).powf(a)
                };
                ab_violation = ab_violation.max(defect);
            }
        }
    }

    DiagnosticsReport {
        mass_drift,
        linf_monotone,
        ab_violation: ab_violation.max(0.0),
        contraction_excess,
    }
}

/// Runs both problems to time t and returns
/// |(v1(t) - v2(t))_+|_1 - |(u0_1 - u0_2)_+|_1, which the L1 contraction
/// bounds by zero up to solver tolerance.
pub fn contraction_check(p1: &ParabolicProblem, p2: &ParabolicProblem, t: f64) -> Result<f64> {
    if !p1.same_configuration(p2) {
        return Err(Error::InvalidInput(
            "contraction check requires identical configuration".into(),
        ));
    }
    let tr1 = evolve(p1, &[t])?;
    let tr2 = evolve(p2, &[t])?;
    if tr1.failed || tr2.failed {
        return Err(Error::Inconclusive("a contraction run aborted".into()));
    }
    let (_, v1) = tr1
        .snapshot_near(t)
        .ok_or_else(|| Error::Inconclusive("missing snapshot".into()))?;
    let (_, v2) = tr2
        .snapshot_near(t)
        .ok_or_else(|| Error::Inconclusive("missing snapshot".into()))?;
    let h = v1.grid().cell_volume();
    let after: f64 = v1
        .values()
        .iter()
        .zip(v2.values())
        .map(|(a, b)| (a - b).max(0.0))
        .sum::<f64>()
        * h;
    let before: f64 = p1
        .initial
        .values()
        .iter()
        .zip(p2.initial.values())
        .map(|(a, b)| (a - b).max(0.0))
        .sum::<f64>()
        * h;
    Ok(after - before)
}

/// Which Dirichlet realization to compare against the Cauchy march.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirichletKind {
    Restricted,
    Spectral,
}

/// Marches the Dirichlet problem with data chi_{Omega'} u0 and the truncated
/// Cauchy problem with data u0 at the same eps, and checks the comparison
/// w_eps <= u_eps nodewise at time t (within `tol`).
#[allow(clippy::too_many_arguments)]
pub fn dirichlet_chain_check(
    u0: &Field,
    mask: &Field,
    s: f64,
    nl: &Nonlinearity,
    eps: f64,
    t: f64,
    kind: DirichletKind,
    dt: f64,
    tol: f64,
) -> Result<bool> {
    if mask.grid() != u0.grid() {
        return Err(Error::InvalidInput("mask grid mismatch".into()));
    }
    if mask.values().iter().any(|&m| m != 0.0 && m != 1.0) {
        return Err(Error::InvalidInput("mask must be 0/1 valued".into()));
    }
    let grid = u0.grid().clone();
    let masked = u0.with_values(
        u0.values()
            .iter()
            .zip(mask.values())
            .map(|(a, b)| a * b)
            .collect(),
    );
    let op_kind = match kind {
        DirichletKind::Restricted => OperatorKind::DirichletRestricted,
        DirichletKind::Spectral => OperatorKind::DirichletSpectral,
    };
    let ball = BallSpec::centered(&grid, grid.half_width() / 4.0)?;
    let mk = |kind_sel: OperatorKind, data: Field| -> Result<ParabolicProblem> {
        Ok(ParabolicProblem {
            op_spec: OperatorSpec::new(s, kind_sel, grid.clone())?,
            nl: nl.clone(),
            eps,
            initial: data,
            t_end: t,
            dt,
            ball: ball.clone(),
            solver: SolverOptions::default(),
        })
    };
    let dirichlet = mk(op_kind, masked)?;
    let cauchy = mk(OperatorKind::TruncatedQuadrature, u0.clone())?;
    let tr_d = evolve(&dirichlet, &[t])?;
    let tr_c = evolve(&cauchy, &[t])?;
    if tr_d.failed || tr_c.failed {
        return Err(Error::Inconclusive("a chain-check run aborted".into()));
    }
    let (_, wd) = tr_d.snapshot_near(t).unwrap();
    let (_, uc) = tr_c.snapshot_near(t).unwrap();
    Ok(wd
        .values()
        .iter()
        .zip(uc.values())
        .all(|(w, u)| *w <= *u + tol))
}
