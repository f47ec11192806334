use fdlab_core::elliptic::SolverOptions;
use fdlab_core::grid::*;
use fdlab_core::lab::*;
use fdlab_core::linalg::pcg;
use fdlab_core::nonlin::*;
use fdlab_core::op::*;
use fdlab_core::parabolic::*;
use fdlab_core::profiles::gaussian;
use fdlab_core::riesz::riesz_potential;

fn main() {
    let m = 1024;
    let (tau_star, tau) = (0.02, 0.06);
    let steps = 192usize;
    let g = UniformGrid::new(1, 400.0, m, Topology::Truncated).unwrap();
    let op = DiscreteOperator::build(OperatorSpec::new(0.3, OperatorKind::TruncatedQuadrature, g.clone()).unwrap()).unwrap();
    let rnl = RegularizedNonlinearity::new(Nonlinearity::power(1.0).unwrap(), 1e-2).unwrap();
    let dt = tau / steps as f64;
    let mut v = gaussian(g.clone(), 2.0, 8.0).unwrap();
    let mut riemann = vec![0.0; m];
    let mut v_at_star: Option<Field> = None;
    let opts = SolverOptions::default();
    for k in 1..=steps {
        let (next, rep) = step(&v, &op, &rnl, dt, &opts).unwrap();
        assert!(rep.converged);
        v = next;
        let t = k as f64 * dt;
        if t > tau_star + 1e-12 {
            for i in 0..m { riemann[i] += dt * rnl.phi_eps(v.values()[i]).unwrap(); }
        }
        if (t - tau_star).abs() < 1e-12 { v_at_star = Some(v.clone()); }
    }
    let v_star = v_at_star.unwrap();
    // rho_bar = v(tau*) - v(tau)
    let rho: Vec<f64> = v_star.values().iter().zip(v.values()).map(|(a, b)| a - b).collect();
    let rho_f = v.with_values(rho.clone());
    // exact discrete inverse: solve A w = rho via CG
    let diag = op.diagonal();
    let mut w = vec![0.0; m];
    let out = pcg(
        |x, y| op.apply_values(x, y),
        |r, z| { for i in 0..m { z[i] = r[i] / diag[i]; } },
        &rho, &mut w, 1e-12, 20000,
    );
    println!("cg: {:?}", out);
    let pot = riesz_potential(&rho_f, 0.3).unwrap();
    for x in [0.5f64, 1.0, 2.0, 4.0, 16.0, 64.0] {
        let i = g.nearest_node(&[x]);
        println!("x={x:6}: riemann={:+.5e}  Ainv={:+.5e}  riesz={:+.5e}", riemann[i], w[i], pot.values()[i]);
    }
}
