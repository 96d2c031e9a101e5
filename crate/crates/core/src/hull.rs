//! 3D convex hulls (Quickhull) in vertex and half-space form.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::{Point3, Vector3};

/// Containment tolerance for hull queries, meters.
pub const HULL_EPS: f64 = 1e-9;
/// Symmetric inflation applied to collinear or coplanar inputs, meters.
pub const DEGENERATE_INFLATION: f64 = 1e-6;

/// Closed half-space `normal . x <= offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: Vector3,
    pub offset: f64,
}

impl HalfSpace {
    #[inline]
    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    vertices: Vec<Point3>,
    faces: Vec<HalfSpace>,
}

impl ConvexHull {
    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[HalfSpace] {
        &self.faces
    }

    /// True iff `p` satisfies every half-space within `eps`.
    pub fn contains(&self, p: &Point3, eps: f64) -> bool {
        self.faces.iter().all(|f| f.signed_distance(p) <= eps)
    }

    /// Containment in the hull with every face pushed out by the support of an
    /// axis-aligned cube of half-width `half_extent`. For a hull over voxel
    /// centers this covers every point inside the voxels themselves.
    pub fn contains_inflated(&self, p: &Point3, half_extent: f64, eps: f64) -> bool {
        self.faces.iter().all(|f| {
            let support = half_extent * f.normal.abs().sum();
            f.signed_distance(p) <= support + eps
        })
    }

    pub fn aabb(&self) -> (Point3, Point3) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices[1..] {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}

/// Free-function form of [`ConvexHull::contains`].
pub fn hull_contains(hull: &ConvexHull, p: &Point3, eps: f64) -> bool {
    hull.contains(p, eps)
}

struct Face {
    v: [usize; 3],
    normal: Vector3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(points: &[Point3], v: [usize; 3]) -> Face {
        let (a, b, c) = (points[v[0]], points[v[1]], points[v[2]]);
        let n = (b - a).cross(&(c - a));
        let normal = n / n.norm();
        Face { v, normal, offset: normal.dot(&a.coords), outside: Vec::new(), alive: true }
    }

    fn distance(&self, p: &Point3) -> f64 {
        self.normal.dot(&p.coords) - self.offset
    }

    fn edges(&self) -> [(usize, usize); 3] {
        [(self.v[0], self.v[1]), (self.v[1], self.v[2]), (self.v[2], self.v[0])]
    }
}

/// Convex hull of `points`. Collinear, coplanar and single-point inputs are
/// replaced by the corners of a cube of half-width [`DEGENERATE_INFLATION`]
/// around every point before hulling.
pub fn compute_hull(points: &[Point3]) -> Result<ConvexHull> {
    if points.is_empty() {
        return Err(Error::Validation("convex hull of an empty point set".into()));
    }
    let mut pts: Vec<Point3> = points.to_vec();
    pts.sort_unstable_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    pts.dedup();
    if let Some(hull) = quickhull(&pts) {
        return Ok(hull);
    }
    let e = DEGENERATE_INFLATION;
    let inflated: Vec<Point3> = pts
        .iter()
        .flat_map(|p| {
            [-e, e].into_iter().flat_map(move |dx| {
                [-e, e]
                    .into_iter()
                    .flat_map(move |dy| [-e, e].into_iter().map(move |dz| Point3::new(p.x + dx, p.y + dy, p.z + dz)))
            })
        })
        .collect();
    quickhull(&inflated).ok_or_else(|| Error::Internal("inflated hull is degenerate".into()))
}

/// Returns `None` for degenerate (lower-dimensional) inputs.
fn quickhull(points: &[Point3]) -> Option<ConvexHull> {
    let max_abs = points.iter().flat_map(|p| p.iter().map(|c| c.abs())).fold(0.0, f64::max);
    let eps = 1e-12 * (1.0 + max_abs);
    let simplex = initial_simplex(points, eps)?;

    let mut faces: Vec<Face> = Vec::new();
    let interior = Point3::from((simplex.iter().map(|&i| points[i].coords).sum::<Vector3>()) / 4.0);
    for tri in [[0, 1, 2], [0, 3, 1], [1, 3, 2], [0, 2, 3]] {
        let mut v = tri.map(|t| simplex[t]);
        let mut f = Face::new(points, v);
        if f.distance(&interior) > 0.0 {
            v.swap(1, 2);
            f = Face::new(points, v);
        }
        faces.push(f);
    }
    // directed edge -> owning face
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (fi, f) in faces.iter().enumerate() {
        for e in f.edges() {
            edge_face.insert(e, fi);
        }
    }
    for (pi, p) in points.iter().enumerate() {
        if simplex.contains(&pi) {
            continue;
        }
        if let Some(f) = faces.iter_mut().find(|f| f.distance(p) > eps) {
            f.outside.push(pi);
        }
    }

    let mut visible = Vec::new();
    let mut stack = Vec::new();
    let mut mark: Vec<bool> = Vec::new();
    while let Some(start) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) {
        let eye = *faces[start]
            .outside
            .iter()
            .max_by(|&&a, &&b| faces[start].distance(&points[a]).total_cmp(&faces[start].distance(&points[b])))
            .expect("non-empty outside set");
        let eye_p = points[eye];

        visible.clear();
        mark.clear();
        mark.resize(faces.len(), false);
        stack.clear();
        stack.push(start);
        mark[start] = true;
        while let Some(fi) = stack.pop() {
            visible.push(fi);
            for (a, b) in faces[fi].edges() {
                let nb = edge_face[&(b, a)];
                if !mark[nb] && faces[nb].distance(&eye_p) > eps {
                    mark[nb] = true;
                    stack.push(nb);
                }
            }
        }
        let mut horizon = Vec::new();
        for &fi in &visible {
            for (a, b) in faces[fi].edges() {
                if !mark[edge_face[&(b, a)]] {
                    horizon.push((a, b));
                }
            }
        }
        let mut orphans = Vec::new();
        for &fi in &visible {
            let f = &mut faces[fi];
            f.alive = false;
            orphans.append(&mut f.outside);
            for e in f.edges() {
                edge_face.remove(&e);
            }
        }
        let first_new = faces.len();
        for (a, b) in horizon {
            let f = Face::new(points, [a, b, eye]);
            let fi = faces.len();
            for e in f.edges() {
                edge_face.insert(e, fi);
            }
            faces.push(f);
        }
        for pi in orphans {
            if pi == eye {
                continue;
            }
            let p = points[pi];
            let target = (first_new..faces.len())
                .chain(0..first_new)
                .find(|&fi| faces[fi].alive && faces[fi].distance(&p) > eps);
            if let Some(fi) = target {
                faces[fi].outside.push(pi);
            }
        }
    }

    let mut used: Vec<usize> = faces.iter().filter(|f| f.alive).flat_map(|f| f.v).collect();
    used.sort_unstable();
    used.dedup();
    let vertices: Vec<Point3> = used.iter().map(|&i| points[i]).collect();

    let mut planes: Vec<HalfSpace> = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let dup =
            planes.iter().any(|h| h.normal.dot(&f.normal) > 1.0 - 1e-12 && (h.offset - f.offset).abs() <= 10.0 * eps);
        if !dup {
            planes.push(HalfSpace { normal: f.normal, offset: f.offset });
        }
    }
    // Tighten offsets so every hull vertex satisfies every plane exactly.
    for h in &mut planes {
        let support = vertices.iter().map(|v| h.normal.dot(&v.coords)).fold(f64::MIN, f64::max);
        h.offset = h.offset.max(support);
    }
    Some(ConvexHull { vertices, faces: planes })
}

fn initial_simplex(points: &[Point3], eps: f64) -> Option<[usize; 4]> {
    if points.len() < 4 {
        return None;
    }
    // farthest pair among the axis extremes
    let mut extremes = Vec::with_capacity(6);
    for axis in 0..3 {
        let lo = (0..points.len()).min_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]))?;
        let hi = (0..points.len()).max_by(|&a, &b| points[a][axis].total_cmp(&points[b][axis]))?;
        extremes.push(lo);
        extremes.push(hi);
    }
    let mut best = (0, 0, -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = (points[a] - points[b]).norm_squared();
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    let (p0, p1) = (best.0, best.1);
    if best.2.sqrt() <= eps {
        return None;
    }
    let axis = (points[p1] - points[p0]).normalize();
    let line_dist = |p: &Point3| {
        let d = p - points[p0];
        (d - axis * d.dot(&axis)).norm()
    };
    let p2 = (0..points.len()).max_by(|&a, &b| line_dist(&points[a]).total_cmp(&line_dist(&points[b])))?;
    if line_dist(&points[p2]) <= eps {
        return None;
    }
    let n = (points[p1] - points[p0]).cross(&(points[p2] - points[p0])).normalize();
    let plane_dist = |p: &Point3| n.dot(&(p - points[p0])).abs();
    let p3 = (0..points.len()).max_by(|&a, &b| plane_dist(&points[a]).total_cmp(&plane_dist(&points[b])))?;
    if plane_dist(&points[p3]) <= eps {
        return None;
    }
    Some([p0, p1, p2, p3])
}
