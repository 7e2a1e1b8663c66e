//! Conforming triangulations of smooth planar domains.
//!
//! Boundary vertices are placed on the exact curve at (nearly) equal
//! arclength spacing `h`; interior vertices start from a hexagonal lattice
//! of spacing `h` and are relaxed by a few rounds of Laplacian smoothing,
//! re-triangulating with a constrained Delaunay triangulation each round.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use spade::{ConstrainedDelaunayTriangulation, HasPosition, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::geometry::curve::{BoundaryCurve, Component, Vec2};
use crate::geometry::measures::touching_radii;
use crate::quadrature::{gauss_legendre, integrate, Tolerance};

/// Minimum interior angle every mesh must satisfy, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;
/// Lattice points closer than this multiple of `h` to the boundary are dropped.
const BOUNDARY_CLEARANCE: f64 = 0.55;
const SMOOTHING_ROUNDS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub component: usize,
    /// Curve parameters of `a` and `b`; `t_end` may equal `2π` on the
    /// closing edge of a loop.
    pub t_start: f64,
    pub t_end: f64,
    pub t_mid: f64,
    /// Exact outward unit normal of the curve at `t_mid`.
    pub normal: Vec2,
    /// Chord length.
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// `(component, t)` for vertices on the boundary.
    pub boundary_param: Vec<Option<(usize, f64)>>,
    pub h: f64,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    pos: Point2<f64>,
    id: usize,
}

impl HasPosition for Node {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Triangulates the domain bounded by `curve` with target edge length `h`.
pub fn triangulate(curve: &BoundaryCurve, h: f64) -> Result<Mesh> {
    let (rho_i, _) = touching_radii(curve)?;
    let limit = 0.5 * rho_i;
    if !(h > 0.0) || h > limit * (1.0 + 1e-12) {
        return Err(Error::MeshTooCoarse { h, suggested: limit });
    }

    let mut vertices = Vec::new();
    let mut boundary_param = Vec::new();
    let mut loops: Vec<Vec<usize>> = Vec::new();
    for (c, comp) in curve.components().iter().enumerate() {
        let ts = arclength_parameters(comp, h)?;
        let mut lp = Vec::with_capacity(ts.len());
        for t in ts {
            lp.push(vertices.len());
            vertices.push(comp.point(t));
            boundary_param.push(Some((c, t)));
        }
        loops.push(lp);
    }
    let n_boundary = vertices.len();

    // Dense polyline used for distance-to-boundary queries.
    let fine: Vec<(Vec2, Vec2)> = curve
        .components()
        .iter()
        .flat_map(|comp| {
            let n = ((polyline_length(comp) / (0.1 * h)).ceil() as usize).max(64);
            (0..n).map(move |i| {
                let (t0, t1) = (TAU * i as f64 / n as f64, TAU * (i + 1) as f64 / n as f64);
                (comp.point(t0), comp.point(t1))
            })
        })
        .collect();
    let spec = curve.spec();
    let clearance = |p: &Vec2| fine.iter().map(|(a, b)| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min);

    // Hexagonal lattice centred on the origin.
    let (lo, hi) = bounding_box(&vertices);
    let dy = h * 3f64.sqrt() / 2.0;
    let j0 = (lo.y / dy).floor() as i64 - 1;
    let j1 = (hi.y / dy).ceil() as i64 + 1;
    let i0 = (lo.x / h).floor() as i64 - 1;
    let i1 = (hi.x / h).ceil() as i64 + 1;
    for j in j0..=j1 {
        let shift = if j.rem_euclid(2) == 1 { 0.5 * h } else { 0.0 };
        for i in i0..=i1 {
            let p = Vec2::new(i as f64 * h + shift, j as f64 * dy);
            if spec.contains(p.x, p.y) && clearance(&p) >= BOUNDARY_CLEARANCE * h {
                vertices.push(p);
                boundary_param.push(None);
            }
        }
    }

    let mut triangles = Vec::new();
    for round in 0..=SMOOTHING_ROUNDS {
        triangles = constrained_triangulation(&vertices, &loops)?;
        if round == SMOOTHING_ROUNDS {
            break;
        }
        let neighbours = vertex_neighbours(vertices.len(), &triangles);
        let moved: Vec<Vec2> = (n_boundary..vertices.len())
            .map(|v| {
                let nb = &neighbours[v];
                if nb.is_empty() {
                    return vertices[v];
                }
                let centre = nb.iter().map(|&w| vertices[w]).sum::<Vec2>() / nb.len() as f64;
                if spec.contains(centre.x, centre.y) && clearance(&centre) >= 0.3 * h {
                    centre
                } else {
                    vertices[v]
                }
            })
            .collect();
        vertices[n_boundary..].copy_from_slice(&moved);
    }

    let mut boundary_edges = Vec::new();
    for (c, lp) in loops.iter().enumerate() {
        let comp = curve.component(c);
        for k in 0..lp.len() {
            let (a, b) = (lp[k], lp[(k + 1) % lp.len()]);
            let t_start = boundary_param[a].unwrap().1;
            let mut t_end = boundary_param[b].unwrap().1;
            if t_end <= t_start {
                t_end += TAU;
            }
            let t_mid = 0.5 * (t_start + t_end);
            boundary_edges.push(BoundaryEdge {
                a,
                b,
                component: c,
                t_start,
                t_end,
                t_mid,
                normal: comp.outward_normal(t_mid),
                length: (vertices[b] - vertices[a]).norm(),
            });
        }
    }

    let mesh = Mesh { vertices, triangles, boundary_edges, boundary_param, h };
    mesh.check_quality()?;
    Ok(mesh)
}

/// Parameters of points spaced (nearly) evenly in arclength along `comp`.
fn arclength_parameters(comp: &Component, h: f64) -> Result<Vec<f64>> {
    const PANELS: usize = 1024;
    let speed = |t: f64| comp.speed(t);
    let mut cumulative = Vec::with_capacity(PANELS + 1);
    cumulative.push(0.0);
    for k in 0..PANELS {
        let (a, b) = (TAU * k as f64 / PANELS as f64, TAU * (k + 1) as f64 / PANELS as f64);
        let last = *cumulative.last().unwrap();
        cumulative.push(last + gauss_legendre(&speed, a, b));
    }
    let length = cumulative[PANELS];
    let n = ((length / h).ceil() as usize).max(8);
    let mut ts = Vec::with_capacity(n);
    for i in 0..n {
        let target = length * i as f64 / n as f64;
        let k = cumulative.partition_point(|&s| s <= target).saturating_sub(1).min(PANELS - 1);
        let a = TAU * k as f64 / PANELS as f64;
        let mut t = a + (target - cumulative[k]) / speed(a).max(1e-300);
        for _ in 0..8 {
            let s = cumulative[k] + integrate(speed, a, t, Tolerance::relative(1e-13))?;
            let step = (s - target) / speed(t);
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        ts.push(t.rem_euclid(TAU));
    }
    Ok(ts)
}

fn polyline_length(comp: &Component) -> f64 {
    (0..256)
        .map(|i| (comp.point(TAU * (i + 1) as f64 / 256.0) - comp.point(TAU * i as f64 / 256.0)).norm())
        .sum()
}

fn bounding_box(pts: &[Vec2]) -> (Vec2, Vec2) {
    let mut lo = Vec2::repeat(f64::INFINITY);
    let mut hi = Vec2::repeat(f64::NEG_INFINITY);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

fn segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn constrained_triangulation(vertices: &[Vec2], loops: &[Vec<usize>]) -> Result<Vec<[usize; 3]>> {
    let mut cdt = ConstrainedDelaunayTriangulation::<Node>::new();
    let mut handles = Vec::with_capacity(vertices.len());
    for (id, p) in vertices.iter().enumerate() {
        let handle = cdt
            .insert(Node { pos: Point2::new(p.x, p.y), id })
            .map_err(|e| Error::Mesh(format!("vertex {id}: {e:?}")))?;
        handles.push(handle);
    }
    for lp in loops {
        for k in 0..lp.len() {
            cdt.add_constraint(handles[lp[k]], handles[lp[(k + 1) % lp.len()]]);
        }
    }
    let polygons: Vec<Vec<Vec2>> = loops.iter().map(|lp| lp.iter().map(|&i| vertices[i]).collect()).collect();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.data().id);
        let centroid = (vertices[a] + vertices[b] + vertices[c]) / 3.0;
        if !inside_polygons(&polygons, &centroid) {
            continue;
        }
        let tri = if signed_area(&vertices[a], &vertices[b], &vertices[c]) > 0.0 { [a, b, c] } else { [a, c, b] };
        triangles.push(tri);
    }
    Ok(triangles)
}

/// Even–odd point-in-polygon over several closed loops.
fn inside_polygons(polygons: &[Vec<Vec2>], p: &Vec2) -> bool {
    let mut inside = false;
    for poly in polygons {
        let n = poly.len();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

pub(crate) fn signed_area(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

/// Sorted, de-duplicated neighbour lists.
pub(crate) fn vertex_neighbours(n: usize, triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    for t in triangles {
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    sets[t[i]].insert(t[j]);
                }
            }
        }
    }
    sets.into_iter().map(|s| s.into_iter().collect()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    pub max_edge: f64,
    pub min_signed_area: f64,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary_param[v].is_some()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(&self.vertices[a], &self.vertices[b], &self.vertices[c])
    }

    pub fn total_area(&self) -> f64 {
        crate::quadrature::sum((0..self.triangles.len()).map(|t| self.triangle_area(t)))
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangles[t];
        (self.vertices[a] + self.vertices[b] + self.vertices[c]) / 3.0
    }

    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        vertex_neighbours(self.vertices.len(), &self.triangles)
    }

    /// Triangles incident to each vertex.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                out[v].push(t);
            }
        }
        out
    }

    /// Triangle containing each boundary edge.
    pub fn boundary_edge_triangles(&self) -> Result<Vec<usize>> {
        let vt = self.vertex_triangles();
        self.boundary_edges
            .iter()
            .map(|e| {
                vt[e.a]
                    .iter()
                    .copied()
                    .find(|&t| self.triangles[t].contains(&e.b))
                    .ok_or_else(|| Error::Mesh(format!("boundary edge ({}, {}) has no triangle", e.a, e.b)))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        let mut edges = BTreeSet::new();
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Number of closed loops formed by the boundary edges.
    pub fn boundary_loop_count(&self) -> usize {
        let mut next = std::collections::HashMap::new();
        for e in &self.boundary_edges {
            next.insert(e.a, e.b);
        }
        let mut seen = BTreeSet::new();
        let mut loops = 0;
        for e in &self.boundary_edges {
            if seen.contains(&e.a) {
                continue;
            }
            let mut v = e.a;
            loop {
                seen.insert(v);
                match next.get(&v) {
                    Some(&w) if w == e.a => {
                        loops += 1;
                        break;
                    }
                    Some(&w) if !seen.contains(&w) => v = w,
                    _ => break,
                }
            }
        }
        loops
    }

    pub fn quality(&self) -> MeshQuality {
        let mut q = MeshQuality { min_angle_deg: 180.0, max_edge: 0.0, min_signed_area: f64::INFINITY };
        for (t, tri) in self.triangles.iter().enumerate() {
            q.min_signed_area = q.min_signed_area.min(self.triangle_area(t));
            for i in 0..3 {
                let p = self.vertices[tri[i]];
                let u = self.vertices[tri[(i + 1) % 3]] - p;
                let w = self.vertices[tri[(i + 2) % 3]] - p;
                q.max_edge = q.max_edge.max(u.norm());
                let angle = (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos().to_degrees();
                q.min_angle_deg = q.min_angle_deg.min(angle);
            }
        }
        q
    }

    fn check_quality(&self) -> Result<()> {
        let q = self.quality();
        if !(q.min_signed_area > 0.0) {
            return Err(Error::Mesh(format!("non-positive triangle area {:e}", q.min_signed_area)));
        }
        if q.max_edge > 2.0 * self.h {
            return Err(Error::Mesh(format!("edge of length {} exceeds 2h = {}", q.max_edge, 2.0 * self.h)));
        }
        if q.min_angle_deg < MIN_ANGLE_DEG {
            return Err(Error::Mesh(format!("minimum angle {:.2} deg below {MIN_ANGLE_DEG}", q.min_angle_deg)));
        }
        let counted = self.boundary_edge_triangles()?.len();
        if counted != self.boundary_edges.len() {
            return Err(Error::Mesh("boundary edges are not all covered".into()));
        }
        Ok(())
    }

    /// Relabels vertices: new index of old vertex `v` is `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Mesh {
        let n = self.vertices.len();
        let mut vertices = vec![Vec2::zeros(); n];
        let mut boundary_param = vec![None; n];
        for v in 0..n {
            vertices[perm[v]] = self.vertices[v];
            boundary_param[perm[v]] = self.boundary_param[v];
        }
        Mesh {
            vertices,
            triangles: self.triangles.iter().map(|t| t.map(|v| perm[v])).collect(),
            boundary_edges: self
                .boundary_edges
                .iter()
                .map(|e| BoundaryEdge { a: perm[e.a], b: perm[e.b], ..e.clone() })
                .collect(),
            boundary_param,
            h: self.h,
        }
    }

    /// Writes the sectioned CSV form: `VERTICES`, `TRIANGLES`, `BOUNDARY`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut s = String::new();
        s.push_str("VERTICES\nx,y\n");
        for p in &self.vertices {
            let _ = writeln!(s, "{},{}", p.x, p.y);
        }
        s.push_str("TRIANGLES\ni,j,k\n");
        for t in &self.triangles {
            let _ = writeln!(s, "{},{},{}", t[0], t[1], t[2]);
        }
        s.push_str("BOUNDARY\ni,j,t,nx,ny\n");
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{},{},{},{},{}", e.a, e.b, e.t_mid, e.normal.x, e.normal.y);
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Reads the raw sections written by [`Mesh::write_csv`].
    pub fn read_csv_sections<R: BufRead>(r: R) -> Result<MeshCsv> {
        let mut out = MeshCsv::default();
        let mut section = "";
        let mut expect_header = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let lineno = lineno + 1;
            if line.is_empty() {
                continue;
            }
            match line {
                "VERTICES" | "TRIANGLES" | "BOUNDARY" => {
                    section = match line {
                        "VERTICES" => "v",
                        "TRIANGLES" => "t",
                        _ => "b",
                    };
                    expect_header = true;
                    continue;
                }
                _ if expect_header => {
                    expect_header = false;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split(',').collect();
            let bad = |m: &str| Error::Parse { line: lineno, message: m.to_string() };
            let float = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(&format!("{s:?}: {e}")));
            let index = |s: &str| s.trim().parse::<usize>().map_err(|e| bad(&format!("{s:?}: {e}")));
            match (section, fields.len()) {
                ("v", 2) => out.vertices.push([float(fields[0])?, float(fields[1])?]),
                ("t", 3) => out.triangles.push([index(fields[0])?, index(fields[1])?, index(fields[2])?]),
                ("b", 5) => out.boundary.push((
                    index(fields[0])?,
                    index(fields[1])?,
                    float(fields[2])?,
                    float(fields[3])?,
                    float(fields[4])?,
                )),
                ("", _) => return Err(bad("data before any section header")),
                _ => return Err(bad(&format!("unexpected field count {}", fields.len()))),
            }
        }
        Ok(out)
    }
}

/// Raw content of a mesh CSV file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MeshCsv {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<(usize, usize, f64, f64, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::DomainSpec;
    use std::f64::consts::PI;

    fn mesh(spec: DomainSpec, h: f64) -> Mesh {
        triangulate(&BoundaryCurve::new(&spec).unwrap(), h).unwrap()
    }

    #[test]
    fn coarse_disk() {
        let m = mesh(DomainSpec::Disk { r: 1.0 }, 0.5);
        assert!(m.quality().min_signed_area > 0.0);
        assert!((m.total_area() - PI).abs() < 0.6 * 0.25, "{}", m.total_area());
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn annulus_topology() {
        let m = mesh(DomainSpec::Annulus { r1: 1.0, r2: 2.0 }, 0.2);
        assert_eq!(m.boundary_loop_count(), 2);
        assert_eq!(m.euler_characteristic(), 0);
        // No triangle inside the hole.
        for t in 0..m.triangles.len() {
            assert!(m.centroid(t).norm() > 1.0);
        }
    }

    #[test]
    fn ellipse_boundary_vertices_are_on_the_curve() {
        let m = mesh(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, 0.1);
        let mut count = 0;
        for (v, p) in m.vertices.iter().enumerate() {
            if m.is_boundary(v) {
                count += 1;
                assert!(((p.x / 2.0).powi(2) + p.y.powi(2) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(count, m.boundary_edges.len());
        assert_eq!(m.boundary_loop_count(), 1);
        for e in &m.boundary_edges {
            let mid = (m.vertices[e.a] + m.vertices[e.b]) / 2.0;
            assert!(e.normal.dot(&mid) > 0.0);
            assert!((e.normal.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quality_holds_on_canonical_domains() {
        let specs = [
            (DomainSpec::Disk { r: 1.0 }, 0.05),
            (DomainSpec::Ellipse { a: 2.0, b: 1.0 }, 0.05),
            (DomainSpec::Annulus { r1: 1.0, r2: 2.0 }, 0.05),
            (DomainSpec::Fourier { c0: 1.0, cos: vec![0.0, 0.1], sin: vec![0.0, 0.05] }, 0.05),
        ];
        for (spec, h) in specs {
            let m = mesh(spec.clone(), h);
            let q = m.quality();
            assert!(q.min_angle_deg >= MIN_ANGLE_DEG, "{spec:?}: {q:?}");
            assert!(q.max_edge <= 2.0 * h, "{spec:?}: {q:?}");
        }
    }

    #[test]
    fn area_converges_quadratically() {
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&h| (mesh(DomainSpec::Ellipse { a: 2.0, b: 1.0 }, h).total_area() - TAU).abs())
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > 3.0, "{errs:?}");
        }
    }

    #[test]
    fn refuses_coarse_h() {
        let c = BoundaryCurve::new(&DomainSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        match triangulate(&c, 0.3) {
            Err(Error::MeshTooCoarse { suggested, .. }) => assert!((suggested - 0.25).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_sections_parse_back() {
        let m = mesh(DomainSpec::Disk { r: 1.0 }, 0.3);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let raw = Mesh::read_csv_sections(buf.as_slice()).unwrap();
        assert_eq!(raw.vertices.len(), m.vertices.len());
        assert_eq!(raw.triangles, m.triangles);
        for (p, q) in raw.vertices.iter().zip(&m.vertices) {
            assert_eq!(p[0], q.x);
            assert_eq!(p[1], q.y);
        }
        assert_eq!(raw.boundary.len(), m.boundary_edges.len());
    }

    #[test]
    fn permutation_relabels_consistently() {
        let m = mesh(DomainSpec::Disk { r: 1.0 }, 0.3);
        let n = m.vertex_count();
        let perm: Vec<usize> = (0..n).map(|v| (v * 7 + 3) % n).collect();
        let mut seen = vec![false; n];
        perm.iter().for_each(|&p| seen[p] = true);
        if seen.iter().all(|&s| s) {
            let pm = m.permuted(&perm);
            assert!((pm.total_area() - m.total_area()).abs() < 1e-14);
            assert_eq!(pm.boundary_loop_count(), 1);
        }
    }
}
