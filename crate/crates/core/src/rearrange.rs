//! Symmetric decreasing rearrangement and the concentration order on 1D fields.

use crate::error::{Error, Result};
use crate::grid::Field;

/// Outcome of a concentration comparison between two nonnegative fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concentration {
    Equal,
    Less,
    Greater,
    Incomparable,
}

/// Node ordering used to place sorted values: ascending distance from the
/// origin, the positive node first when two nodes share the same |x|.
///
/// In integer arithmetic node i sits at |2i + 1 - M| half-spacings from 0,
/// which keeps the ordering exact.
fn fill_order(m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    let ring = |i: usize| (2 * i as i64 + 1 - m as i64).abs();
    order.sort_by(|&a, &b| ring(a).cmp(&ring(b)).then(b.cmp(&a)));
    order
}

/// Symmetric decreasing rearrangement of a nonnegative 1D field.
///
/// The multiset of values is preserved; the largest value is placed at the
/// node nearest the origin and values decrease with |x|.
pub fn decreasing_rearrangement(f: &Field) -> Result<Field> {
    if f.grid().dimension() != 1 {
        return Err(Error::UnsupportedDimension(
            "rearrangement is implemented for 1D grids only".into(),
        ));
    }
    if f.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidInput(
            "rearrangement requires a nonnegative field".into(),
        ));
    }
    let m = f.grid().points_per_axis();
    let mut sorted = f.values().to_vec();
    // total order keeps repeated passes bit-identical even with signed zeros
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut out = vec![0.0; m];
    for (slot, value) in fill_order(m).into_iter().zip(sorted) {
        out[slot] = value;
    }
    Ok(f.with_values(out))
}

/// Cumulative midpoint masses of the rearranged field over centered balls of
/// radius (k + 1/2) h, k = 0, 1, ...
fn cumulative_profile(rearranged: &Field) -> Vec<f64> {
    let m = rearranged.grid().points_per_axis();
    let h = rearranged.grid().spacing();
    let order = fill_order(m);
    let ring = |i: usize| (2 * i as i64 + 1 - m as i64).abs();
    // nodes with ring index <= 2k+1 lie in the ball of radius (k+1/2)h
    let mut cums = Vec::new();
    let mut acc = 0.0;
    let mut pos = 0usize;
    let mut k = 0i64;
    while pos < m {
        while pos < m && ring(order[pos]) <= 2 * k + 1 {
            acc += rearranged.values()[order[pos]] * h;
            pos += 1;
        }
        cums.push(acc);
        k += 1;
    }
    cums
}

/// Compare two nonnegative fields on the same 1D grid in the concentration
/// order: `Less` means every centered ball carries no more mass of u^# than
/// of v^#. Comparisons use absolute tolerance 1e-12 times the larger total
/// mass.
pub fn concentration_compare(u: &Field, v: &Field) -> Result<Concentration> {
    if u.grid() != v.grid() {
        return Err(Error::InvalidInput(
            "concentration comparison requires matching grids".into(),
        ));
    }
    let us = decreasing_rearrangement(u)?;
    let vs = decreasing_rearrangement(v)?;
    let cu = cumulative_profile(&us);
    let cv = cumulative_profile(&vs);
    let total = cu.last().copied().unwrap_or(0.0).max(cv.last().copied().unwrap_or(0.0));
    let tol = 1e-12 * total;
    let mut le = true;
    let mut ge = true;
    for (a, b) in cu.iter().zip(&cv) {
        if *a > *b + tol {
            le = false;
        }
        if *b > *a + tol {
            ge = false;
        }
    }
    Ok(match (le, ge) {
        (true, true) => Concentration::Equal,
        (true, false) => Concentration::Less,
        (false, true) => Concentration::Greater,
        (false, false) => Concentration::Incomparable,
    })
}
