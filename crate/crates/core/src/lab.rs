//! The scientific payload: eps-sweeps, extinction classification, the (s, n)
//! phase diagram, Green-identity verification, explicit solutions, and the
//! s -> 1/2 continuity probe.

use crate::error::{Error, Result};
use crate::grid::{ball_mass, BallSpec, Field, UniformGrid};
use crate::nonlin::Nonlinearity;
use crate::parabolic::{evolve, evolve_with_operator, ParabolicProblem, Trajectory};
use crate::riesz::{one_d_kernel, riesz_potential};
use crate::special::riesz_constant_signed;
use crate::op::{DiscreteOperator, OperatorSpec};
use rayon::prelude::*;

/// Extinction classification of one sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Extinct,
    Persistent,
    Inconclusive,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Classification::Extinct => "extinct",
            Classification::Persistent => "persistent",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

/// Explicit decision thresholds of the finite-eps classification rule.
///
/// The continuum statement (the limit vanishes identically) has no canonical
/// finite-eps test, so the rule is explicit, overridable, and recorded in
/// every run manifest.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyThresholds {
    /// Extinct requires final mass <= theta * (initial-data ball mass).
    pub theta: f64,
    /// Extinct requires the log-mass / log-eps slope over the last 3 points
    /// to be at least sigma.
    pub sigma: f64,
    /// Persistent requires the last-two relative change to be at most this.
    pub stabilization: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self {
            theta: 0.05,
            sigma: 0.1,
            stabilization: 0.05,
        }
    }
}

/// Per-eps ball masses and the resulting classification.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub eps_values: Vec<f64>,
    pub ball_masses: Vec<f64>,
    pub tau: f64,
    /// least-squares slope of log mass vs log eps over the last 3 points
    pub slope: f64,
    pub classification: Classification,
}

/// Least-squares slope of y against x.
fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Apply the explicit classification rule to a mass-vs-eps series.
///
/// Returns the classification and the fitted log-log slope. Fewer than four
/// points is trivially `Inconclusive`.
pub fn classify_extinction(
    masses: &[f64],
    eps_values: &[f64],
    reference_mass: f64,
    thresholds: &ClassifyThresholds,
) -> Result<(Classification, f64)> {
    if masses.len() != eps_values.len() {
        return Err(Error::InvalidInput(
            "masses and eps lists must have equal length".into(),
        ));
    }
    if masses.iter().any(|&m| m <= 0.0 || !m.is_finite()) {
        return Err(Error::InvalidInput("masses must be positive".into()));
    }
    if masses.len() < 4 {
        return Ok((Classification::Inconclusive, f64::NAN));
    }
    let k = masses.len();
    let log_eps: Vec<f64> = eps_values[k - 3..].iter().map(|e| e.ln()).collect();
    let log_m: Vec<f64> = masses[k - 3..].iter().map(|m| m.ln()).collect();
    let slope = ls_slope(&log_eps, &log_m);

    let strictly_decreasing = masses.windows(2).all(|w| w[1] < w[0]);
    let extinct = strictly_decreasing
        && masses[k - 1] <= thresholds.theta * reference_mass
        && slope >= thresholds.sigma;
    if extinct {
        return Ok((Classification::Extinct, slope));
    }
    let last_change = (masses[k - 1] - masses[k - 2]).abs() / masses[k - 2];
    let persistent =
        last_change <= thresholds.stabilization && masses[k - 1] >= 0.5 * masses[0];
    if persistent {
        return Ok((Classification::Persistent, slope));
    }
    Ok((Classification::Inconclusive, slope))
}

/// Run one eps-sweep of the parabolic problem: for each eps (strictly
/// decreasing) restart from u0 + eps, march to tau, and record the ball mass
/// of u_eps(., tau). The template's own `eps` field is ignored.
pub fn epsilon_sweep(
    template: &ParabolicProblem,
    eps_list: &[f64],
    tau: f64,
    ball: &BallSpec,
    thresholds: &ClassifyThresholds,
) -> Result<SweepResult> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "eps_list must be nonempty and strictly decreasing".into(),
        ));
    }
    if !(tau > 0.0 && tau <= template.t_end + 1e-12) {
        return Err(Error::InvalidParameter("need 0 < tau <= t_end".into()));
    }
    let op = DiscreteOperator::build(template.op_spec.clone())?;
    let mut masses = Vec::with_capacity(eps_list.len());
    let mut aborted = false;
    for &eps in eps_list {
        let mut run = template.clone();
        run.eps = eps;
        run.t_end = tau;
        run.dt = template.dt.min(tau);
        let tr = evolve_with_operator(&run, &[tau], &op)?;
        if tr.failed {
            aborted = true;
            break;
        }
        let (_, v) = tr
            .snapshot_near(tau)
            .ok_or_else(|| Error::Inconclusive("missing sweep snapshot".into()))?;
        let u = v.add_scalar(eps);
        masses.push(ball_mass(&u, ball)?);
    }
    let reference = ball_mass(&template.initial, ball)?;
    let (classification, slope) = if aborted {
        (Classification::Inconclusive, f64::NAN)
    } else {
        classify_extinction(&masses, &eps_list[..masses.len()], reference, thresholds)?
    };
    Ok(SweepResult {
        eps_values: eps_list[..masses.len()].to_vec(),
        ball_masses: masses,
        tau,
        slope,
        classification,
    })
}

/// One classified point of the (s, n) phase diagram.
#[derive(Debug, Clone)]
pub struct PhasePoint {
    pub s: f64,
    pub n: f64,
    pub classification: Classification,
    /// distance |n - (2s - 1)| to the critical line
    pub margin: f64,
    pub final_mass: f64,
    pub slope: f64,
}

/// Everything one phase-diagram point needs besides (s, n).
#[derive(Clone)]
pub struct PhaseProtocol {
    pub grid: UniformGrid,
    pub initial: Field,
    pub eps_list: Vec<f64>,
    pub tau: f64,
    pub dt: f64,
    pub ball: BallSpec,
    pub solver: crate::elliptic::SolverOptions,
    pub thresholds: ClassifyThresholds,
    /// half-width of the excluded near-critical band |n - (2s-1)| < margin
    pub exclusion_margin: f64,
}

/// Classify every requested (s, n) pair, skipping the near-critical band.
/// Points run concurrently; per-point failures are recorded as
/// `Inconclusive` and never abort the scan.
pub fn phase_diagram(
    s_values: &[f64],
    n_values: &[f64],
    protocol: &PhaseProtocol,
) -> Result<Vec<PhasePoint>> {
    if protocol.grid.dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "the phase diagram protocol is one-dimensional".into(),
        ));
    }
    let mut points = Vec::new();
    for &s in s_values {
        for &n in n_values {
            let margin = (n - (2.0 * s - 1.0)).abs();
            if margin >= protocol.exclusion_margin {
                points.push((s, n, margin));
            }
        }
    }
    let results: Vec<PhasePoint> = points
        .par_iter()
        .map(|&(s, n, margin)| run_phase_point(s, n, margin, protocol))
        .collect();
    Ok(results)
}

fn run_phase_point(s: f64, n: f64, margin: f64, protocol: &PhaseProtocol) -> PhasePoint {
    let inconclusive = |_: Error| PhasePoint {
        s,
        n,
        classification: Classification::Inconclusive,
        margin,
        final_mass: f64::NAN,
        slope: f64::NAN,
    };
    let attempt = || -> Result<PhasePoint> {
        let nl = if n == 0.0 {
            Nonlinearity::Logarithmic
        } else {
            Nonlinearity::power(n)?
        };
        let template = ParabolicProblem {
            op_spec: OperatorSpec::new(
                s,
                crate::op::OperatorKind::TruncatedQuadrature,
                protocol.grid.clone(),
            )?,
            nl,
            eps: protocol.eps_list[0],
            initial: protocol.initial.clone(),
            t_end: protocol.tau,
            dt: protocol.dt,
            ball: protocol.ball.clone(),
            solver: protocol.solver,
        };
        let sweep = epsilon_sweep(
            &template,
            &protocol.eps_list,
            protocol.tau,
            &protocol.ball,
            &protocol.thresholds,
        )?;
        Ok(PhasePoint {
            s,
            n,
            classification: sweep.classification,
            margin,
            final_mass: sweep.ball_masses.last().copied().unwrap_or(f64::NAN),
            slope: sweep.slope,
        })
    };
    attempt().unwrap_or_else(inconclusive)
}

/// Which Green identity applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenRegime {
    /// N > 2s: Riesz-potential identity
    Supercritical,
    /// N = 1, s > 1/2: growing-kernel identity centered at the origin
    OneDSupHalf,
}

/// Verification record at one probe node.
#[derive(Debug, Clone, Copy)]
pub struct GreenIdentityReport {
    pub x: f64,
    /// time quadrature of phi_eps(v(x, .)) over [tau_star, tau]
    /// (centered at x = 0 in the 1D supercritical-order regime)
    pub lhs: f64,
    /// Riesz / growing-kernel integral of the state increment
    pub rhs: f64,
    pub residual: f64,
    pub regime: GreenRegime,
}

/// Chebyshev-Lobatto times on [a, b] (endpoints included, clustered at both
/// ends); the snapshot schedule for Green-identity quadrature.
pub fn chebyshev_times(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && b > a);
    let mut ts: Vec<f64> = (0..count)
        .map(|k| {
            let c = (std::f64::consts::PI * k as f64 / (count - 1) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * c
        })
        .collect();
    ts.reverse();
    ts[0] = a;
    ts[count - 1] = b;
    ts
}

/// Verify the time-integrated Green identity along a trajectory.
///
/// lhs at node x is the trapezoid quadrature of phi_eps(v(x, t)) over the
/// trajectory snapshots inside [tau_star, tau]; rhs reconstructs it from the
/// state increment through the inverse operator: the Riesz potential of
/// v(tau_star) - v(tau) for N > 2s, and the centered growing-kernel integral
/// of v(tau) - v(tau_star) for N = 1, s in (1/2, 1).
pub fn verify_green_identity(
    tr: &Trajectory,
    p: &ParabolicProblem,
    x_nodes: &[usize],
    tau_star: f64,
    tau: f64,
) -> Result<Vec<GreenIdentityReport>> {
    let dim = p.op_spec.grid().dimension();
    let s = p.op_spec.s();
    let regime = if (dim as f64) > 2.0 * s {
        GreenRegime::Supercritical
    } else if dim == 1 && s > 0.5 {
        GreenRegime::OneDSupHalf
    } else {
        return Err(Error::UnsupportedRegime(format!(
            "no Green identity for N = {dim}, s = {s}"
        )));
    };
    if tau_star > tau {
        return Err(Error::InvalidParameter("need tau_star <= tau".into()));
    }
    let rnl = crate::nonlin::RegularizedNonlinearity::new(p.nl.clone(), p.eps)?;

    // snapshots inside the window, in time order
    let lo = tau_star - 1e-12;
    let hi = tau + 1e-12;
    let mut snaps: Vec<&(f64, Field)> = tr
        .snapshots
        .iter()
        .filter(|(t, _)| *t >= lo && *t <= hi)
        .collect();
    snaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    snaps.dedup_by(|a, b| a.0 == b.0);
    if tau_star == tau {
        // empty time interval: identity degenerates to 0 = 0
        return Ok(x_nodes
            .iter()
            .map(|&i| GreenIdentityReport {
                x: p.op_spec.grid().node_coord(i)[0],
                lhs: 0.0,
                rhs: 0.0,
                residual: 0.0,
                regime,
            })
            .collect());
    }
    if snaps.len() < 3 {
        return Err(Error::InvalidInput(
            "green verification needs at least 3 snapshots in [tau_star, tau]".into(),
        ));
    }

    let grid = p.op_spec.grid();
    let n = grid.node_count();
    // trapezoid in time of phi_eps(v) at every node
    let mut w_int = vec![0.0; n];
    for pair in snaps.windows(2) {
        let (t0, ref f0) = *pair[0];
        let (t1, ref f1) = *pair[1];
        let half_dt = 0.5 * (t1 - t0);
        for i in 0..n {
            let a = rnl.phi_eps(f0.values()[i])?;
            let b = rnl.phi_eps(f1.values()[i])?;
            w_int[i] += half_dt * (a + b);
        }
    }

    let first = snaps.first().unwrap();
    let last = snaps.last().unwrap();
    let reports = match regime {
        GreenRegime::Supercritical => {
            // rho = v(tau_star) - v(tau); lhs = riesz(rho) nodewise
            let rho = first.1.with_values(
                first
                    .1
                    .values()
                    .iter()
                    .zip(last.1.values())
                    .map(|(a, b)| a - b)
                    .collect(),
            );
            let pot = riesz_potential(&rho, s)?;
            x_nodes
                .iter()
                .map(|&i| {
                    let lhs = w_int[i];
                    let rhs = pot.values()[i];
                    GreenIdentityReport {
                        x: grid.node_coord(i)[0],
                        lhs,
                        rhs,
                        residual: (lhs - rhs).abs(),
                        regime,
                    }
                })
                .collect()
        }
        GreenRegime::OneDSupHalf => {
            let k_abs = -riesz_constant_signed(1, s)?;
            let h = grid.spacing();
            let origin = grid.nearest_node(&[0.0]);
            let rho: Vec<f64> = last
                .1
                .values()
                .iter()
                .zip(first.1.values())
                .map(|(b, a)| b - a)
                .collect();
            let ys: Vec<f64> = (0..n).map(|j| grid.axis_coord(j)).collect();
            x_nodes
                .iter()
                .map(|&i| {
                    let x = ys[i];
                    let mut acc = 0.0;
                    for j in 0..n {
                        let k_xy = one_d_kernel(x - ys[j], s).unwrap();
                        let k_y = one_d_kernel(ys[j], s).unwrap();
                        acc += rho[j] * (k_xy - k_y);
                    }
                    let rhs = k_abs * h * acc;
                    let lhs = w_int[i] - w_int[origin];
                    GreenIdentityReport {
                        x,
                        lhs,
                        rhs,
                        residual: (lhs - rhs).abs(),
                        regime,
                    }
                })
                .collect()
        }
    };
    Ok(reports)
}

/// Closed-form reference solutions.
#[derive(Debug, Clone, Copy)]
pub enum ExplicitKind {
    /// U(x, t) = 2 (T - t) / (1 + x^2): half-Laplacian, logarithmic
    /// nonlinearity, extinguishes at t = T.
    LogHalf { t_extinct: f64 },
    /// U(x, t) = C (T - t)^{1/(1-m)} |x|^{-2s/(1-m)}, m < 1: separate-variables
    /// very singular profile (non-integrable spatial singularity).
    VerySingular {
        m: f64,
        s: f64,
        amplitude: f64,
        t_extinct: f64,
    },
}

pub fn explicit_solution(kind: ExplicitKind, x: f64, t: f64) -> Result<f64> {
    match kind {
        ExplicitKind::LogHalf { t_extinct } => {
            if t > t_extinct {
                return Err(Error::DomainError(format!(
                    "explicit log solution is defined for t <= {t_extinct}, got {t}"
                )));
            }
            Ok(2.0 * (t_extinct - t) / (1.0 + x * x))
        }
        ExplicitKind::VerySingular {
            m,
            s,
            amplitude,
            t_extinct,
        } => {
            if m >= 1.0 {
                return Err(Error::InvalidParameter("very singular profile needs m < 1".into()));
            }
            if x == 0.0 {
                return Err(Error::DomainError(
                    "very singular profile is singular at x = 0".into(),
                ));
            }
            if t > t_extinct {
                return Err(Error::DomainError(format!(
                    "very singular profile is defined for t <= {t_extinct}, got {t}"
                )));
            }
            let p = 1.0 / (1.0 - m);
            Ok(amplitude * (t_extinct - t).powf(p) * x.abs().powf(-2.0 * s * p))
        }
    }
}

/// Fitted tail exponent of a positive 1D field over the outer third of the
/// grid, |x| >= 2L/3.
#[derive(Debug, Clone, Copy)]
pub struct TailDecay {
    pub exponent: f64,
    /// false when the fitted slope is steeper than -3 (not power-like)
    pub power_like: bool,
}

pub fn tail_decay_probe(f: &Field) -> Result<TailDecay> {
    let grid = f.grid();
    if grid.dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "tail probe is one-dimensional".into(),
        ));
    }
    let cutoff = 2.0 * grid.half_width() / 3.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..grid.node_count() {
        let x = grid.axis_coord(i);
        if x.abs() >= cutoff {
            let v = f.values()[i];
            if v <= 0.0 {
                return Err(Error::InvalidInput(
                    "tail probe requires positive values on the outer third".into(),
                ));
            }
            xs.push(x.abs().ln());
            ys.push(v.ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::InvalidInput("tail probe has too few nodes".into()));
    }
    let exponent = ls_slope(&xs, &ys);
    Ok(TailDecay {
        exponent,
        power_like: exponent > -3.0,
    })
}

/// March the s = 1/2 problem and its s = 1/2 + delta neighbors on the same
/// grid, data, and eps; returns the L1 distances at t_end, one per delta.
pub fn s_continuity_probe(base: &ParabolicProblem, deltas: &[f64]) -> Result<Vec<f64>> {
    if (base.op_spec.s() - 0.5).abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "continuity probe expects the base problem at s = 1/2".into(),
        ));
    }
    if deltas.is_empty() || deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter(
            "deltas must be strictly decreasing".into(),
        ));
    }
    if deltas[0] + 0.5 >= 1.0 || deltas[deltas.len() - 1] <= 0.0 {
        return Err(Error::InvalidParameter(
            "deltas must keep s = 1/2 + delta inside (1/2, 1)".into(),
        ));
    }
    let t = base.t_end;
    let tr_base = evolve(base, &[t])?;
    if tr_base.failed {
        return Err(Error::Inconclusive("base run aborted".into()));
    }
    let (_, v_base) = tr_base.snapshot_near(t).unwrap();
    let h = v_base.grid().cell_volume();
    let mut out = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let mut run = base.clone();
        run.op_spec = OperatorSpec::new(
            0.5 + d,
            base.op_spec.kind(),
            base.op_spec.grid().clone(),
        )?;
        let tr = evolve(&run, &[t])?;
        if tr.failed {
            return Err(Error::Inconclusive(format!("run at delta = {d} aborted")));
        }
        let (_, v) = tr.snapshot_near(t).unwrap();
        let dist: f64 = v
            .values()
            .iter()
            .zip(v_base.values())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * h;
        out.push(dist);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_geometric_decay_is_extinct() {
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let masses = [1.0, 0.1, 0.01, 0.001];
        let (c, slope) =
            classify_extinction(&masses, &eps, 1.0, &ClassifyThresholds::default()).unwrap();
        assert_eq!(c, Classification::Extinct);
        assert!((slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_constant_is_persistent() {
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let masses = [1.0, 1.0, 1.0, 1.0];
        let (c, slope) =
            classify_extinction(&masses, &eps, 1.0, &ClassifyThresholds::default()).unwrap();
        assert_eq!(c, Classification::Persistent);
        assert_eq!(slope, 0.0);
    }

    #[test]
    fn classify_oscillation_is_inconclusive() {
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let masses = [1.0, 2.0, 1.0, 2.0];
        let (c, _) =
            classify_extinction(&masses, &eps, 1.0, &ClassifyThresholds::default()).unwrap();
        assert_eq!(c, Classification::Inconclusive);
    }

    #[test]
    fn classify_rejects_nonpositive_and_short_lists() {
        let thresholds = ClassifyThresholds::default();
        assert!(classify_extinction(&[1.0, 0.0, 0.1, 0.1], &[4.0, 3.0, 2.0, 1.0], 1.0, &thresholds).is_err());
        let (c, _) = classify_extinction(&[1.0], &[1.0], 1.0, &thresholds).unwrap();
        assert_eq!(c, Classification::Inconclusive);
    }

    #[test]
    fn chebyshev_times_cluster_and_cover() {
        let ts = chebyshev_times(0.25, 1.0, 33);
        assert_eq!(ts.len(), 33);
        assert_eq!(ts[0], 0.25);
        assert_eq!(ts[32], 1.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        // clustered: first gap much smaller than the middle gap
        assert!((ts[1] - ts[0]) < 0.2 * (ts[17] - ts[16]));
    }

    #[test]
    fn explicit_log_half_values() {
        let kind = ExplicitKind::LogHalf { t_extinct: 1.0 };
        assert_eq!(explicit_solution(kind, 0.0, 0.0).unwrap(), 2.0);
        assert_eq!(explicit_solution(kind, 3.0, 1.0).unwrap(), 0.0);
        assert!(explicit_solution(kind, 0.0, 1.01).is_err());
    }

    #[test]
    fn explicit_very_singular_guards() {
        let kind = ExplicitKind::VerySingular {
            m: -1.0,
            s: 0.75,
            amplitude: 1.0,
            t_extinct: 1.0,
        };
        assert!(explicit_solution(kind, 0.0, 0.5).is_err());
        let v = explicit_solution(kind, 2.0, 0.5).unwrap();
        // C (T-t)^{1/2} |x|^{-s}: 0.5^{1/2} * 2^{-0.75}
        let expect = 0.5f64.sqrt() * 2.0f64.powf(-0.75);
        assert!((v - expect).abs() < 1e-14);
        assert!(explicit_solution(
            ExplicitKind::VerySingular {
                m: 1.5,
                s: 0.75,
                amplitude: 1.0,
                t_extinct: 1.0
            },
            1.0,
            0.0
        )
        .is_err());
    }

    #[test]
    fn tail_probe_recovers_exact_power() {
        let g = UniformGrid::new(1, 8.0, 512, crate::grid::Topology::Truncated).unwrap();
        let f = crate::profiles::power_profile(g, -0.5).unwrap();
        let fit = tail_decay_probe(&f).unwrap();
        assert!((fit.exponent + 0.5).abs() <= 0.02, "slope {}", fit.exponent);
        assert!(fit.power_like);
    }

    #[test]
    fn green_verifier_guards() {
        use crate::elliptic::SolverOptions;
        use crate::grid::Topology;
        use crate::op::{OperatorKind, OperatorSpec};
        let g = UniformGrid::new(1, 4.0, 32, Topology::Truncated).unwrap();
        let mk = |s: f64| ParabolicProblem {
            op_spec: OperatorSpec::new(s, OperatorKind::TruncatedQuadrature, g.clone()).unwrap(),
            nl: Nonlinearity::power(1.0).unwrap(),
            eps: 1e-2,
            initial: crate::profiles::gaussian(g.clone(), 1.0, 1.0).unwrap(),
            t_end: 0.1,
            dt: 0.02,
            ball: BallSpec::centered(&g, 1.0).unwrap(),
            solver: SolverOptions::default(),
        };
        // s = 1/2 in 1D is neither supercritical nor above one half
        let p_half = mk(0.5);
        let tr = evolve(&p_half, &[0.05, 0.1]).unwrap();
        assert!(matches!(
            verify_green_identity(&tr, &p_half, &[16], 0.05, 0.1),
            Err(Error::UnsupportedRegime(_))
        ));
        // empty time window degenerates to the 0 = 0 identity
        let p = mk(0.3);
        let tr = evolve(&p, &[0.05, 0.1]).unwrap();
        let reports = verify_green_identity(&tr, &p, &[16], 0.05, 0.05).unwrap();
        assert_eq!(reports[0].lhs, 0.0);
        assert_eq!(reports[0].rhs, 0.0);
        assert_eq!(reports[0].residual, 0.0);
    }

    #[test]
    fn single_entry_sweep_is_inconclusive() {
        use crate::elliptic::SolverOptions;
        use crate::grid::Topology;
        use crate::op::{OperatorKind, OperatorSpec};
        let g = UniformGrid::new(1, 8.0, 32, Topology::Truncated).unwrap();
        let ball = BallSpec::centered(&g, 2.0).unwrap();
        let template = ParabolicProblem {
            op_spec: OperatorSpec::new(0.3, OperatorKind::TruncatedQuadrature, g.clone()).unwrap(),
            nl: Nonlinearity::power(1.0).unwrap(),
            eps: 1e-1,
            initial: crate::profiles::gaussian(g.clone(), 1.0, 1.0).unwrap(),
            t_end: 0.05,
            dt: 0.025,
            ball: ball.clone(),
            solver: SolverOptions::default(),
        };
        let sweep = epsilon_sweep(&template, &[1e-1], 0.05, &ball, &ClassifyThresholds::default())
            .unwrap();
        assert_eq!(sweep.classification, Classification::Inconclusive);
        assert_eq!(sweep.ball_masses.len(), 1);
    }

    #[test]
    fn tail_probe_flags_gaussian_as_not_power_like() {
        let g = UniformGrid::new(1, 8.0, 512, crate::grid::Topology::Truncated).unwrap();
        let f = crate::profiles::gaussian(g, 1.0, 1.0).unwrap();
        // add a floor so the outer third stays positive
        let f = f.add_scalar(0.0);
        match tail_decay_probe(&f) {
            Ok(fit) => {
                assert!(fit.exponent <= -3.0, "slope {}", fit.exponent);
                assert!(!fit.power_like);
            }
            Err(_) => {
                // underflowed tail values are also an acceptable rejection
            }
        }
    }
}
