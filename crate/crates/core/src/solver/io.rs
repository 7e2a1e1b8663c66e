//! Solution CSV (`x,y,u`) reading and writing.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{Mesh, Vec2};
use crate::solver::ScalarField;

const HEADER: &str = "x,y,u";

/// Values are written in shortest round-trip form, so reading the file
/// back reproduces every bit.
pub fn write_solution_csv<W: Write>(mesh: &Mesh, u: &ScalarField, mut w: W) -> Result<()> {
    if u.values.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: u.values.len() });
    }
    let mut s = String::with_capacity(64 * u.values.len());
    s.push_str(HEADER);
    s.push('\n');
    for (x, v) in mesh.vertices.iter().zip(&u.values) {
        let _ = writeln!(s, "{},{},{}", x.x, x.y, v);
    }
    w.write_all(s.as_bytes())?;
    Ok(())
}

/// Reads `(points, values)`; errors carry 1-based line numbers.
pub fn read_solution_csv<R: BufRead>(r: R) -> Result<(Vec<Vec2>, ScalarField)> {
    let mut pts = Vec::new();
    let mut vals = Vec::new();
    let mut header = false;
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if !header {
            if line.replace(' ', "") != HEADER {
                return Err(Error::Parse { line: lineno, message: format!("expected header {HEADER:?}, got {line:?}") });
            }
            header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line: lineno, message: format!("expected 3 fields, got {}", fields.len()) });
        }
        let mut xs = [0.0f64; 3];
        for (k, f) in fields.iter().enumerate() {
            xs[k] = f.trim().parse().map_err(|e| Error::Parse { line: lineno, message: format!("field {}: {f:?}: {e}", k + 1) })?;
            if !xs[k].is_finite() {
                return Err(Error::Parse { line: lineno, message: format!("field {} is not finite", k + 1) });
            }
        }
        pts.push(Vec2::new(xs[0], xs[1]));
        vals.push(xs[2]);
    }
    if !header {
        return Err(Error::Parse { line: 1, message: "empty file".into() });
    }
    Ok((pts, ScalarField { values: vals }))
}

/// Checks that the points read from a solution file are the vertices of
/// `mesh`, in order.
pub fn check_matches_mesh(mesh: &Mesh, pts: &[Vec2]) -> Result<()> {
    if pts.len() != mesh.vertex_count() {
        return Err(Error::SizeMismatch { expected: mesh.vertex_count(), got: pts.len() });
    }
    for (v, (a, b)) in mesh.vertices.iter().zip(pts).enumerate() {
        if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
            return Err(Error::Parse { line: v + 2, message: format!("point {b:?} does not match mesh vertex {a:?}") });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{triangulate, BoundaryCurve, DomainSpec};

    #[test]
    fn round_trip_is_bit_identical() {
        let m = triangulate(&BoundaryCurve::new(&DomainSpec::Disk { r: 1.0 }).unwrap(), 0.2).unwrap();
        let u = ScalarField { values: m.vertices.iter().map(|x| (1.0 - x.norm_squared()) / 3.0 + 1e-17).collect() };
        let mut buf = Vec::new();
        write_solution_csv(&m, &u, &mut buf).unwrap();
        let (pts, back) = read_solution_csv(buf.as_slice()).unwrap();
        check_matches_mesh(&m, &pts).unwrap();
        for (a, b) in u.values.iter().zip(&back.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = "x,y,u\n0,0,1\n0,oops,2\n";
        match read_solution_csv(bad.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_solution_csv("a,b\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(read_solution_csv("x,y,u\n1,2\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }
}
