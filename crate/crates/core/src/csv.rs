//! Field CSV serialization: header `x0[,x1,...],value`, rows in lexicographic
//! node order, values at 17 significant digits.

use crate::error::{Error, Result};
use crate::grid::{Field, UniformGrid};
use std::fmt::Write as _;

/// Render a value with 17 significant digits (round-trips f64 exactly).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_to_csv(f: &Field) -> String {
    let dim = f.grid().dimension();
    let mut out = String::new();
    for d in 0..dim {
        let _ = write!(out, "x{d},");
    }
    out.push_str("value\n");
    for i in 0..f.grid().node_count() {
        for x in f.grid().node_coord(i) {
            let _ = write!(out, "{},", fmt_f64(x));
        }
        let _ = writeln!(out, "{}", fmt_f64(f.values()[i]));
    }
    out
}

/// Parse a field CSV produced by [`field_to_csv`] against a known grid.
pub fn field_from_csv(grid: UniformGrid, text: &str) -> Result<Field> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidInput("empty field CSV".into()))?;
    let expected_cols = grid.dimension() + 1;
    if header.split(',').count() != expected_cols {
        return Err(Error::InvalidInput(format!(
            "field CSV header has wrong arity: {header}"
        )));
    }
    let mut values = Vec::with_capacity(grid.node_count());
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let last = line
            .rsplit(',')
            .next()
            .ok_or_else(|| Error::InvalidInput(format!("bad CSV row {}", lineno + 2)))?;
        let v: f64 = last
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad value on CSV row {}", lineno + 2)))?;
        values.push(v);
    }
    let exterior = Field::default_exterior(&grid);
    Field::new(grid, values, exterior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Topology, UniformGrid};

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let g = UniformGrid::new(1, 3.0, 16, Topology::Truncated).unwrap();
        let f = Field::from_fn(g.clone(), |x| (x[0] * 1.7).sin() / 3.0).unwrap();
        let text = field_to_csv(&f);
        assert!(text.starts_with("x0,value\n"));
        let back = field_from_csv(g, &text).unwrap();
        assert_eq!(f.values(), back.values());
    }

    #[test]
    fn csv_2d_header_and_order() {
        let g = UniformGrid::new(2, 1.0, 8, Topology::Truncated).unwrap();
        let f = Field::from_fn(g.clone(), |x| x[0] + 10.0 * x[1]).unwrap();
        let text = field_to_csv(&f);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x0,x1,value");
        // first row is the lexicographically first node (i0 = 0, i1 = 0)
        let first = lines.next().unwrap();
        assert!(first.starts_with(&fmt_f64(g.axis_coord(0))));
    }
}
