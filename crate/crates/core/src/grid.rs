//! Uniform cell-centered grids, grid-sampled fields, and mass functionals.
//!
//! Nodes are cell centers, x_i = -L + (i + 1/2) h with h = 2L/M, so no node
//! ever coincides with the origin of a singular kernel or with the box
//! boundary. All integrals are midpoint-rule sums, which on this layout are
//! second order and positivity preserving.

use crate::error::{Error, Result};

/// Domain topology: a truncated box with zero exterior, or the periodic torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Truncated,
    Periodic,
}

/// Exterior convention of a field; must match the grid topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exterior {
    ZeroOutside,
    PeriodicWrap,
}

/// Uniform discretization of the box [-L, L]^N with M cells per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformGrid {
    dimension: usize,
    half_width: f64,
    points_per_axis: usize,
    topology: Topology,
}

impl UniformGrid {
    pub fn new(
        dimension: usize,
        half_width: f64,
        points_per_axis: usize,
        topology: Topology,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if points_per_axis < 8 {
            return Err(Error::InvalidParameter(format!(
                "points_per_axis must be >= 8, got {points_per_axis}"
            )));
        }
        Ok(Self {
            dimension,
            half_width,
            points_per_axis,
            topology,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Grid spacing h = 2L/M, derived, never stored.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Cell volume h^N.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dimension as i32)
    }

    /// Total number of nodes M^N.
    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dimension as u32)
    }

    /// Coordinate of cell center i along one axis: -L + (i + 1/2) h.
    pub fn axis_coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    /// Multi-index of a node from its lexicographic linear index
    /// (axis 0 varies slowest).
    pub fn multi_index(&self, linear: usize) -> Vec<usize> {
        let m = self.points_per_axis;
        let mut idx = vec![0usize; self.dimension];
        let mut rem = linear;
        for d in (0..self.dimension).rev() {
            idx[d] = rem % m;
            rem /= m;
        }
        idx
    }

    /// Coordinates of a node from its linear index.
    pub fn node_coord(&self, linear: usize) -> Vec<f64> {
        self.multi_index(linear)
            .into_iter()
            .map(|i| self.axis_coord(i))
            .collect()
    }

    /// Linear index of the node whose center is nearest to the given point.
    pub fn nearest_node(&self, point: &[f64]) -> usize {
        assert_eq!(point.len(), self.dimension);
        let m = self.points_per_axis;
        let h = self.spacing();
        let mut linear = 0usize;
        for &x in point {
            let i = ((x + self.half_width) / h - 0.5).round();
            let i = i.clamp(0.0, (m - 1) as f64) as usize;
            linear = linear * m + i;
        }
        linear
    }

    /// FNV-1a checksum over the defining data; recorded in run manifests.
    pub fn checksum(&self) -> u64 {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= b as u64;
                hash = hash.wrapping_mul(0x100_0000_01b3);
            }
        };
        feed(&(self.dimension as u64).to_le_bytes());
        feed(&self.half_width.to_bits().to_le_bytes());
        feed(&(self.points_per_axis as u64).to_le_bytes());
        feed(&[match self.topology {
            Topology::Truncated => 0u8,
            Topology::Periodic => 1u8,
        }]);
        hash
    }
}

/// A grid-sampled function with an exterior convention.
///
/// `floor` is the additive constant carried alongside the values when the
/// field represents u_eps = v_eps + eps; zero otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: UniformGrid,
    values: Vec<f64>,
    exterior: Exterior,
    floor: f64,
}

impl Field {
    pub fn new(grid: UniformGrid, values: Vec<f64>, exterior: Exterior) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidInput(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("field contains non-finite values".into()));
        }
        let consistent = matches!(
            (grid.topology(), exterior),
            (Topology::Periodic, Exterior::PeriodicWrap) | (Topology::Truncated, Exterior::ZeroOutside)
        );
        if !consistent {
            return Err(Error::InvalidInput(
                "exterior convention inconsistent with grid topology".into(),
            ));
        }
        Ok(Self {
            grid,
            values,
            exterior,
            floor: 0.0,
        })
    }

    /// Natural exterior convention for a grid's topology.
    pub fn default_exterior(grid: &UniformGrid) -> Exterior {
        match grid.topology() {
            Topology::Periodic => Exterior::PeriodicWrap,
            Topology::Truncated => Exterior::ZeroOutside,
        }
    }

    pub fn constant(grid: UniformGrid, c: f64) -> Result<Self> {
        let exterior = Self::default_exterior(&grid);
        let n = grid.node_count();
        Self::new(grid, vec![c; n], exterior)
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: UniformGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let exterior = Self::default_exterior(&grid);
        let values = (0..grid.node_count())
            .map(|i| f(&grid.node_coord(i)))
            .collect();
        Self::new(grid, values, exterior)
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exterior(&self) -> Exterior {
        self.exterior
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Same values, new floor tag.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    /// New field with values v_i + c (used to restore u = v + eps).
    pub fn add_scalar(&self, c: f64) -> Field {
        let mut out = self.clone();
        for v in &mut out.values {
            *v += c;
        }
        out
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Field {
        debug_assert_eq!(values.len(), self.values.len());
        Field {
            grid: self.grid.clone(),
            values,
            exterior: self.exterior,
            floor: self.floor,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A ball (interval for N = 1) that must fit inside the grid box.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSpec {
    center: Vec<f64>,
    radius: f64,
}

impl BallSpec {
    pub fn new(grid: &UniformGrid, center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.len() != grid.dimension() {
            return Err(Error::InvalidParameter(
                "ball center dimension does not match grid".into(),
            ));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("ball radius must be positive".into()));
        }
        let l = grid.half_width();
        if center.iter().any(|&c| c.abs() + radius > l) {
            return Err(Error::InvalidParameter(
                "ball does not fit inside the grid box".into(),
            ));
        }
        Ok(Self { center, radius })
    }

    pub fn centered(grid: &UniformGrid, radius: f64) -> Result<Self> {
        Self::new(grid, vec![0.0; grid.dimension()], radius)
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn contains(&self, point: &[f64]) -> bool {
        let d2: f64 = point
            .iter()
            .zip(&self.center)
            .map(|(x, c)| (x - c) * (x - c))
            .sum();
        d2 <= self.radius * self.radius
    }

    /// Midpoint-rule measure of the ball: h^N times the number of contained nodes.
    pub fn discrete_measure(&self, grid: &UniformGrid) -> f64 {
        let count = (0..grid.node_count())
            .filter(|&i| self.contains(&grid.node_coord(i)))
            .count();
        count as f64 * grid.cell_volume()
    }
}

/// Midpoint-rule L^p norm; p = infinity gives the max of |values|.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [1, inf], got {p}"
        )));
    }
    if p.is_infinite() {
        return Ok(f.values().iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let vol = f.grid().cell_volume();
    if p == 1.0 {
        return Ok(f.values().iter().map(|v| v.abs()).sum::<f64>() * vol);
    }
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * vol).powf(1.0 / p))
}

/// Midpoint-rule integral of |f| over the nodes whose centers lie in the ball.
pub fn ball_mass(f: &Field, ball: &BallSpec) -> Result<f64> {
    let grid = f.grid();
    if ball.center.len() != grid.dimension() {
        return Err(Error::InvalidParameter(
            "ball dimension does not match field grid".into(),
        ));
    }
    if ball.center.iter().any(|&c| c.abs() + ball.radius > grid.half_width()) {
        return Err(Error::InvalidParameter("ball outside the grid box".into()));
    }
    let vol = grid.cell_volume();
    let mut sum = 0.0;
    for i in 0..grid.node_count() {
        if ball.contains(&grid.node_coord(i)) {
            sum += f.values()[i].abs();
        }
    }
    Ok(sum * vol)
}

/// Total midpoint-rule integral of f (signed).
pub fn total_mass(f: &Field) -> f64 {
    f.values().iter().sum::<f64>() * f.grid().cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1d(l: f64, m: usize) -> UniformGrid {
        UniformGrid::new(1, l, m, Topology::Truncated).unwrap()
    }

    #[test]
    fn spacing_times_points_is_box_width() {
        let g = grid1d(1.0, 10);
        assert_eq!(g.spacing() * g.points_per_axis() as f64, 2.0);
    }

    #[test]
    fn nodes_are_cell_centers() {
        let g = grid1d(1.0, 10);
        assert!((g.axis_coord(0) + 0.9).abs() < 1e-15);
        assert!((g.axis_coord(9) - 0.9).abs() < 1e-15);
        // no node at the origin or the boundary for even M
        for i in 0..10 {
            let x = g.axis_coord(i);
            assert!(x != 0.0 && x.abs() < 1.0);
        }
    }

    #[test]
    fn l1_norm_of_unit_constant_is_volume() {
        let g = grid1d(1.0, 16);
        let f = Field::constant(g, 1.0).unwrap();
        assert_eq!(lp_norm(&f, 1.0).unwrap(), 2.0);
        let z = Field::constant(grid1d(1.0, 16), 0.0).unwrap();
        for p in [1.0, 2.0, f64::INFINITY] {
            assert_eq!(lp_norm(&z, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn l1_norm_of_gaussian_matches_sqrt_pi() {
        // Midpoint rule on a fast-decaying smooth function: boundary terms of
        // Euler-Maclaurin vanish, so the error is far below 1e-6.
        let g = grid1d(8.0, 1024);
        let f = Field::from_fn(g, |x| (-x[0] * x[0]).exp()).unwrap();
        let n1 = lp_norm(&f, 1.0).unwrap();
        assert!(
            (n1 - std::f64::consts::PI.sqrt()).abs() < 1e-6,
            "|f|_1 = {n1}"
        );
    }

    #[test]
    fn lp_norm_rejects_p_below_one() {
        let g = grid1d(1.0, 8);
        let f = Field::constant(g, 1.0).unwrap();
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn ball_mass_of_constant() {
        let g = grid1d(8.0, 256);
        let h = g.spacing();
        let f = Field::constant(g.clone(), 1.0).unwrap();
        let b = BallSpec::centered(&g, 1.0).unwrap();
        let m = ball_mass(&f, &b).unwrap();
        assert!((m - 2.0).abs() <= h + 1e-12, "mass = {m}");
        let z = Field::constant(g.clone(), 0.0).unwrap();
        assert_eq!(ball_mass(&z, &b).unwrap(), 0.0);
    }

    #[test]
    fn ball_mass_of_indicator_overlap() {
        // indicator of [0,2] against the ball [-1,1]: overlap length 1
        let g = grid1d(8.0, 512);
        let h = g.spacing();
        let f = Field::from_fn(g.clone(), |x| {
            if (0.0..=2.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let b = BallSpec::centered(&g, 1.0).unwrap();
        let m = ball_mass(&f, &b).unwrap();
        assert!((m - 1.0).abs() <= h + 1e-12, "mass = {m}");
    }

    #[test]
    fn ball_must_fit_in_box() {
        let g = grid1d(1.0, 8);
        assert!(BallSpec::new(&g, vec![0.5], 0.75).is_err());
        assert!(BallSpec::new(&g, vec![0.0], 1.5).is_err());
        let ok = BallSpec::new(&g, vec![0.25], 0.5).unwrap();
        assert_eq!(ok.radius(), 0.5);
    }

    #[test]
    fn ball_mass_nondecreasing_in_radius() {
        let g = grid1d(4.0, 128);
        let f = Field::from_fn(g.clone(), |x| (1.0 + x[0]).abs()).unwrap();
        let mut prev = 0.0;
        for k in 1..=10 {
            let b = BallSpec::centered(&g, 0.35 * k as f64).unwrap();
            let m = ball_mass(&f, &b).unwrap();
            assert!(m >= prev - 1e-14);
            prev = m;
        }
    }

    #[test]
    fn field_validates_shape_topology_and_finiteness() {
        let g = grid1d(1.0, 8);
        assert!(Field::new(g.clone(), vec![0.0; 7], Exterior::ZeroOutside).is_err());
        assert!(Field::new(g.clone(), vec![f64::NAN; 8], Exterior::ZeroOutside).is_err());
        assert!(Field::new(g.clone(), vec![0.0; 8], Exterior::PeriodicWrap).is_err());
        let gp = UniformGrid::new(1, 1.0, 8, Topology::Periodic).unwrap();
        assert!(Field::new(gp, vec![0.0; 8], Exterior::PeriodicWrap).is_ok());
    }

    #[test]
    fn grid_checksum_distinguishes_grids() {
        let a = grid1d(1.0, 8).checksum();
        let b = grid1d(1.0, 16).checksum();
        let c = grid1d(2.0, 8).checksum();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, grid1d(1.0, 8).checksum());
    }

    #[test]
    fn lexicographic_order_in_2d() {
        let g = UniformGrid::new(2, 1.0, 8, Topology::Truncated).unwrap();
        assert_eq!(g.node_count(), 64);
        // linear index 9 -> (1, 1)
        assert_eq!(g.multi_index(9), vec![1, 1]);
        let c = g.node_coord(9);
        assert!((c[0] - g.axis_coord(1)).abs() < 1e-15);
        assert!((c[1] - g.axis_coord(1)).abs() < 1e-15);
    }

    #[test]
    fn nearest_node_roundtrip() {
        let g = grid1d(2.0, 16);
        for i in 0..16 {
            let x = g.axis_coord(i);
            assert_eq!(g.nearest_node(&[x]), i);
        }
        assert_eq!(g.nearest_node(&[-100.0]), 0);
        assert_eq!(g.nearest_node(&[100.0]), 15);
    }
}
