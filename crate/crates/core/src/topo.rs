//! Topological map (clusters joined by portals), its navigation graph, point
//! location, A* planning and the hull-only file format.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Write as _;
use std::io::BufRead;

use crate::cluster::VoxelCluster;
use crate::error::{Error, Result};
use crate::hull::{compute_hull, ConvexHull, HULL_EPS};
use crate::voxel::{world_to_voxel, VoxelIndex, VoxelMap};
use crate::Point3;

/// Adjacency region between two clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Portal {
    pub id: usize,
    pub vertex_a: usize,
    pub vertex_b: usize,
    /// Centers of the voxel faces shared by the two clusters.
    pub shared_faces: Vec<Point3>,
    pub center: Point3,
    /// Number of shared faces. Equals `shared_faces.len()` unless the portal
    /// was read from a file, which keeps only the count.
    pub face_count: usize,
}

impl Portal {
    pub fn other(&self, vertex: usize) -> usize {
        if vertex == self.vertex_a {
            self.vertex_b
        } else {
            self.vertex_a
        }
    }
}

/// A topological vertex: a convex region with its hull and volume. The voxel
/// set is kept only for maps built in-process.
#[derive(Debug, Clone, PartialEq)]
pub struct TopoVertex {
    pub id: usize,
    pub hull: ConvexHull,
    /// Voxel count times voxel volume, cubic meters.
    pub volume: f64,
    pub voxels: Option<BTreeSet<VoxelIndex>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologicalMap {
    pub voxel_size: f64,
    pub vertices: Vec<TopoVertex>,
    pub portals: Vec<Portal>,
    owner: Option<VoxelMap<usize>>,
}

/// One portal per pair of clusters that share at least one voxel face.
/// Portals are ordered by vertex pair and numbered from 0.
pub fn extract_portals(clusters: &[VoxelCluster], voxel_size: f64) -> Vec<Portal> {
    let mut owner: VoxelMap<usize> = VoxelMap::default();
    for c in clusters {
        for v in &c.voxels {
            owner.insert(*v, c.id);
        }
    }
    let mut faces: BTreeMap<(usize, usize), Vec<Point3>> = BTreeMap::new();
    for c in clusters {
        for v in &c.voxels {
            for n in [v.offset(1, 0, 0), v.offset(0, 1, 0), v.offset(0, 0, 1)] {
                if let Some(&other) = owner.get(&n) {
                    if other != c.id {
                        let face = nalgebra::center(&v.center(voxel_size), &n.center(voxel_size));
                        faces.entry((c.id.min(other), c.id.max(other))).or_default().push(face);
                    }
                }
            }
        }
    }
    faces
        .into_iter()
        .enumerate()
        .map(|(id, ((a, b), mut shared))| {
            shared.sort_unstable_by(|p, q| p.x.total_cmp(&q.x).then(p.y.total_cmp(&q.y)).then(p.z.total_cmp(&q.z)));
            let n = shared.len() as f64;
            let center = Point3::from(shared.iter().map(|p| p.coords).sum::<crate::Vector3>() / n);
            Portal { id, vertex_a: a, vertex_b: b, face_count: shared.len(), shared_faces: shared, center }
        })
        .collect()
}

impl TopologicalMap {
    /// Builds the map from voxel-disjoint clusters with ids `0..n`.
    pub fn from_clusters(clusters: &[VoxelCluster], voxel_size: f64) -> Result<Self> {
        let mut owner: VoxelMap<usize> = VoxelMap::default();
        for (i, c) in clusters.iter().enumerate() {
            if c.id != i {
                return Err(Error::Validation(format!("cluster ids must be dense, found {} at {i}", c.id)));
            }
            for v in &c.voxels {
                if owner.insert(*v, c.id).is_some() {
                    return Err(Error::Validation(format!("voxel {v} belongs to two clusters")));
                }
            }
        }
        let portals = extract_portals(clusters, voxel_size);
        let vertices = clusters
            .iter()
            .map(|c| TopoVertex {
                id: c.id,
                hull: c.hull.clone(),
                volume: c.volume(voxel_size),
                voxels: Some(c.voxels.clone()),
            })
            .collect();
        Ok(Self { voxel_size, vertices, portals, owner: Some(owner) })
    }

    pub fn has_voxels(&self) -> bool {
        self.owner.is_some()
    }

    /// Same map without voxel sets, as it would be read back from a file.
    pub fn without_voxels(&self) -> Self {
        let mut m = self.clone();
        m.owner = None;
        for v in &mut m.vertices {
            v.voxels = None;
        }
        m
    }

    /// Ids of portals touching `vertex`, ascending.
    pub fn portals_of(&self, vertex: usize) -> Vec<usize> {
        self.portals.iter().filter(|p| p.vertex_a == vertex || p.vertex_b == vertex).map(|p| p.id).collect()
    }

    /// Cluster holding `p`. With voxel sets the owner of `p`'s voxel wins;
    /// otherwise see [`TopologicalMap::locate_by_hull`].
    pub fn locate(&self, p: &Point3) -> Result<usize> {
        match &self.owner {
            Some(owner) => owner.get(&world_to_voxel(p, self.voxel_size)).copied().ok_or_else(|| Error::not_located(p)),
            None => self.locate_by_hull(p),
        }
    }

    /// Hull-only point location. A vertex claims `p` when `p` lies inside its
    /// hull grown by half a voxel on every face, which covers the vertex's
    /// voxels. Overlaps go to the smallest volume, then the smallest id.
    pub fn locate_by_hull(&self, p: &Point3) -> Result<usize> {
        let half = 0.5 * self.voxel_size;
        self.vertices
            .iter()
            .filter(|v| v.hull.contains_inflated(p, half, HULL_EPS))
            .min_by(|a, b| a.volume.total_cmp(&b.volume).then(a.id.cmp(&b.id)))
            .map(|v| v.id)
            .ok_or_else(|| Error::not_located(p))
    }

    /// True if `p` is within the voxel-extent of `vertex`'s hull.
    pub fn vertex_covers(&self, vertex: usize, p: &Point3) -> bool {
        self.vertices[vertex].hull.contains_inflated(p, 0.5 * self.voxel_size, HULL_EPS)
    }

    /// Hull-only text format, see the crate README.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "TOPOMAP v1 voxel_size={:.6}", self.voxel_size);
        for v in &self.vertices {
            let verts = v.hull.vertices();
            let _ = writeln!(out, "V {} {:.6} {}", v.id, v.volume, verts.len());
            for p in verts {
                let _ = writeln!(out, "{:.6} {:.6} {:.6}", p.x, p.y, p.z);
            }
        }
        for p in &self.portals {
            let c = p.center;
            let _ = writeln!(
                out,
                "P {} {} {} {:.6} {:.6} {:.6} {}",
                p.id, p.vertex_a, p.vertex_b, c.x, c.y, c.z, p.face_count
            );
        }
        out
    }

    pub fn from_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
            Ok(l) if l.trim().is_empty() => None,
            other => Some((i + 1, other)),
        });
        let fmt = |line: usize, msg: &str| Error::Format(format!("line {line}: {msg}"));
        let (n, header) = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
        let header = header?;
        let size_str = header
            .trim()
            .strip_prefix("TOPOMAP v1 voxel_size=")
            .ok_or_else(|| fmt(n, "expected `TOPOMAP v1 voxel_size=<m>` header"))?;
        let voxel_size: f64 = size_str.parse().map_err(|_| fmt(n, "bad voxel_size"))?;
        if !(voxel_size > 0.0) {
            return Err(fmt(n, "voxel_size must be positive"));
        }
        let mut vertices = Vec::new();
        let mut portals = Vec::new();
        while let Some((n, line)) = lines.next() {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |f: &str| f.parse::<f64>().map_err(|_| fmt(n, "bad number"));
            let int = |f: &str| f.parse::<usize>().map_err(|_| fmt(n, "bad integer"));
            match fields.first().copied() {
                Some("V") => {
                    if fields.len() != 4 {
                        return Err(fmt(n, "vertex line needs `V id volume n`"));
                    }
                    let id = int(fields[1])?;
                    if id != vertices.len() {
                        return Err(fmt(n, "vertex ids must be dense and ordered"));
                    }
                    let volume = num(fields[2])?;
                    let count = int(fields[3])?;
                    if count == 0 {
                        return Err(fmt(n, "vertex without hull points"));
                    }
                    let mut pts = Vec::with_capacity(count);
                    for _ in 0..count {
                        let (m, l) = lines.next().ok_or_else(|| Error::Format("truncated hull".into()))?;
                        let l = l?;
                        let xyz: Vec<&str> = l.split_whitespace().collect();
                        if xyz.len() != 3 {
                            return Err(fmt(m, "hull point needs `x y z`"));
                        }
                        let c = |f: &str| f.parse::<f64>().map_err(|_| fmt(m, "bad number"));
                        pts.push(Point3::new(c(xyz[0])?, c(xyz[1])?, c(xyz[2])?));
                    }
                    let hull = compute_hull(&pts)?;
                    vertices.push(TopoVertex { id, hull, volume, voxels: None });
                }
                Some("P") => {
                    if fields.len() != 8 {
                        return Err(fmt(n, "portal line needs `P id va vb cx cy cz n`"));
                    }
                    let id = int(fields[1])?;
                    if id != portals.len() {
                        return Err(fmt(n, "portal ids must be dense and ordered"));
                    }
                    let (a, b) = (int(fields[2])?, int(fields[3])?);
                    if a == b {
                        return Err(fmt(n, "portal joins a vertex to itself"));
                    }
                    let center = Point3::new(num(fields[4])?, num(fields[5])?, num(fields[6])?);
                    let face_count = int(fields[7])?;
                    portals.push(Portal { id, vertex_a: a, vertex_b: b, shared_faces: Vec::new(), center, face_count });
                }
                _ => return Err(fmt(n, "expected a `V` or `P` record")),
            }
        }
        let mut pairs = BTreeSet::new();
        for p in &portals {
            if p.vertex_a >= vertices.len() || p.vertex_b >= vertices.len() {
                return Err(Error::Format(format!("portal {} references a missing vertex", p.id)));
            }
            if !pairs.insert((p.vertex_a.min(p.vertex_b), p.vertex_a.max(p.vertex_b))) {
                return Err(Error::Format(format!("duplicate portal between {} and {}", p.vertex_a, p.vertex_b)));
            }
        }
        Ok(Self { voxel_size, vertices, portals, owner: None })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NavEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
    /// Vertex whose interior the edge crosses.
    pub vertex: usize,
}

/// Dual graph: nodes are portal centers (node id = portal id), and the
/// portals of each vertex are pairwise connected.
#[derive(Debug, Clone, PartialEq)]
pub struct NavGraph {
    pub nodes: Vec<(usize, Point3)>,
    pub edges: Vec<NavEdge>,
    adjacency: Vec<Vec<usize>>,
}

impl NavGraph {
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = &NavEdge> + '_ {
        self.adjacency[node].iter().map(move |&e| &self.edges[e])
    }
}

pub fn build_nav_graph(topo: &TopologicalMap) -> NavGraph {
    let nodes: Vec<(usize, Point3)> = topo.portals.iter().map(|p| (p.id, p.center)).collect();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); topo.vertices.len()];
    for p in &topo.portals {
        incident[p.vertex_a].push(p.id);
        incident[p.vertex_b].push(p.id);
    }
    let mut edges = Vec::new();
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for (vertex, ports) in incident.iter().enumerate() {
        for (x, &a) in ports.iter().enumerate() {
            for &b in &ports[x + 1..] {
                let weight = (nodes[a].1 - nodes[b].1).norm();
                adjacency[a].push(edges.len());
                adjacency[b].push(edges.len());
                edges.push(NavEdge { a, b, weight, vertex });
            }
        }
    }
    NavGraph { nodes, edges, adjacency }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    /// Start, crossed portal centers, goal.
    pub waypoints: Vec<Point3>,
    pub length: f64,
    /// Clusters traversed, start cluster first.
    pub vertex_sequence: Vec<usize>,
    /// Portal ids crossed, in order.
    pub portal_sequence: Vec<usize>,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path from `a` to `b` through portal centers. The start and goal
/// are joined to every portal of their clusters (and to each other when they
/// share a cluster); A* with the straight-line heuristic searches the result.
pub fn plan(topo: &TopologicalMap, nav: &NavGraph, a: &Point3, b: &Point3) -> Result<PlanResult> {
    let va = topo.locate(a)?;
    let vb = topo.locate(b)?;
    let portal_count = nav.nodes.len();
    let (start, goal) = (portal_count, portal_count + 1);
    let position = |n: usize| match n {
        n if n == start => *a,
        n if n == goal => *b,
        n => nav.nodes[n].1,
    };
    let start_links = topo.portals_of(va);
    let goal_links: Vec<usize> = topo.portals_of(vb);

    let mut g_score = vec![f64::INFINITY; portal_count + 2];
    // (predecessor, vertex crossed to get here)
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; portal_count + 2];
    let mut closed = vec![false; portal_count + 2];
    let mut heap = BinaryHeap::new();
    g_score[start] = 0.0;
    heap.push(Frontier { f: (b - a).norm(), g: 0.0, node: start });

    while let Some(Frontier { g, node, .. }) = heap.pop() {
        if closed[node] {
            continue;
        }
        closed[node] = true;
        if node == goal {
            break;
        }
        let here = position(node);
        let mut relax = |next: usize, vertex: usize, heap: &mut BinaryHeap<Frontier>| {
            let cost = g + (position(next) - here).norm();
            if cost < g_score[next] {
                g_score[next] = cost;
                parent[next] = Some((node, vertex));
                heap.push(Frontier { f: cost + (b - position(next)).norm(), g: cost, node: next });
            }
        };
        if node == start {
            if va == vb {
                relax(goal, va, &mut heap);
            }
            for &p in &start_links {
                relax(p, va, &mut heap);
            }
        } else {
            for e in nav.neighbors(node) {
                let next = if e.a == node { e.b } else { e.a };
                relax(next, e.vertex, &mut heap);
            }
            if goal_links.contains(&node) {
                relax(goal, vb, &mut heap);
            }
        }
    }
    if !closed[goal] {
        return Err(Error::NoPath);
    }
    let mut nodes = vec![goal];
    let mut vertices = Vec::new();
    let mut cur = goal;
    while let Some((prev, vertex)) = parent[cur] {
        nodes.push(prev);
        vertices.push(vertex);
        cur = prev;
    }
    nodes.reverse();
    vertices.reverse();
    let mut vertex_sequence: Vec<usize> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if vertex_sequence.last() != Some(&v) {
            vertex_sequence.push(v);
        }
    }
    let waypoints: Vec<Point3> = nodes.iter().map(|&n| position(n)).collect();
    let length = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    let portal_sequence = nodes[1..nodes.len() - 1].to_vec();
    Ok(PlanResult { waypoints, length, vertex_sequence, portal_sequence })
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = 0.25;

    fn v(i: i32, j: i32, k: i32) -> VoxelIndex {
        VoxelIndex::new(i, j, k)
    }

    fn cluster(id: usize, voxels: impl IntoIterator<Item = VoxelIndex>) -> VoxelCluster {
        VoxelCluster::new(id, voxels.into_iter().collect(), S).unwrap()
    }

    fn row(id: usize, from: i32, to: i32) -> VoxelCluster {
        cluster(id, (from..to).flat_map(|i| (0..4).flat_map(move |j| (0..4).map(move |k| v(i, j, k)))))
    }

    #[test]
    fn single_face_portal() {
        let c = [cluster(0, [v(0, 0, 0)]), cluster(1, [v(1, 0, 0)])];
        let p = extract_portals(&c, S);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].center, Point3::new(0.25, 0.125, 0.125));
        assert_eq!((p[0].vertex_a, p[0].vertex_b), (0, 1));
    }

    #[test]
    fn corner_contact_is_not_a_portal() {
        let c = [cluster(0, [v(0, 0, 0)]), cluster(1, [v(1, 1, 0)]), cluster(2, [v(5, 5, 5)])];
        assert!(extract_portals(&c, S).is_empty());
    }

    #[test]
    fn chain_of_three() {
        let c = [row(0, 0, 4), row(1, 4, 8), row(2, 8, 12)];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        assert_eq!(topo.portals.len(), 2);
        assert_eq!(topo.portals[0].face_count, 16);
        let nav = build_nav_graph(&topo);
        assert_eq!(nav.nodes.len(), 2);
        assert_eq!(nav.edges.len(), 1);
        assert_eq!(nav.edges[0].vertex, 1);
    }

    #[test]
    fn star_vertex_gives_triangle() {
        // hub 0 with three neighbours on different faces
        let hub = cluster(0, [v(1, 1, 1)]);
        let c = [
            hub,
            cluster(1, [v(0, 1, 1)]),
            cluster(2, [v(2, 1, 1)]),
            cluster(3, [v(1, 2, 1)]),
            cluster(4, [v(9, 9, 9)]),
        ];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        let nav = build_nav_graph(&topo);
        assert_eq!(nav.nodes.len(), 3);
        assert_eq!(nav.edges.len(), 3);
        assert!(nav.edges.iter().all(|e| e.vertex == 0));
    }

    #[test]
    fn locate_rules() {
        let c = [row(0, 0, 4), row(1, 4, 8)];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        assert_eq!(topo.locate(&c[1].centroid).unwrap(), 1);
        assert!(matches!(topo.locate(&Point3::new(50.0, 0.0, 0.0)), Err(Error::NotLocated { .. })));
        let bare = topo.without_voxels();
        assert_eq!(bare.locate(&c[0].centroid).unwrap(), 0);
        assert!(bare.locate(&Point3::new(50.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn overlapping_hulls_prefer_smaller_volume() {
        let big = row(0, 0, 8);
        let small = cluster(1, [v(20, 0, 0), v(21, 0, 0), v(20, 1, 0), v(20, 0, 1)]);
        let mut topo = TopologicalMap::from_clusters(&[big, small], S).unwrap().without_voxels();
        // put the small hull inside the big one
        topo.vertices[1].hull =
            compute_hull(&[v(2, 1, 1).center(S), v(3, 1, 1).center(S), v(2, 2, 1).center(S), v(2, 1, 2).center(S)])
                .unwrap();
        assert_eq!(topo.locate(&v(2, 1, 1).center(S)).unwrap(), 1);
        assert_eq!(topo.locate(&v(6, 1, 1).center(S)).unwrap(), 0);
    }

    #[test]
    fn plan_same_cluster_is_direct() {
        let c = [row(0, 0, 4), row(1, 4, 8)];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        let nav = build_nav_graph(&topo);
        let (a, b) = (v(0, 0, 0).center(S), v(3, 3, 3).center(S));
        let r = plan(&topo, &nav, &a, &b).unwrap();
        assert_eq!(r.waypoints, vec![a, b]);
        assert!((r.length - (b - a).norm()).abs() < 1e-12);
        assert_eq!(r.vertex_sequence, vec![0]);
        let same = plan(&topo, &nav, &a, &a).unwrap();
        assert_eq!(same.length, 0.0);
    }

    #[test]
    fn plan_adjacent_goes_through_portal() {
        let c = [row(0, 0, 4), row(1, 4, 8)];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        let nav = build_nav_graph(&topo);
        let (a, b) = (v(0, 0, 0).center(S), v(7, 3, 3).center(S));
        let r = plan(&topo, &nav, &a, &b).unwrap();
        assert_eq!(r.waypoints, vec![a, topo.portals[0].center, b]);
        assert_eq!(r.vertex_sequence, vec![0, 1]);
        assert_eq!(r.portal_sequence, vec![0]);
    }

    #[test]
    fn plan_errors() {
        let c = [row(0, 0, 4), row(1, 10, 14)];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        let nav = build_nav_graph(&topo);
        let a = v(0, 0, 0).center(S);
        assert!(matches!(plan(&topo, &nav, &a, &v(12, 0, 0).center(S)), Err(Error::NoPath)));
        assert!(matches!(plan(&topo, &nav, &a, &Point3::new(-9.0, 0.0, 0.0)), Err(Error::NotLocated { .. })));
    }

    #[test]
    fn text_round_trip() {
        let c = [row(0, 0, 4), row(1, 4, 8), cluster(2, [v(8, 0, 0)])];
        let topo = TopologicalMap::from_clusters(&c, S).unwrap();
        let text = topo.to_text();
        let back = TopologicalMap::from_text(text.as_bytes()).unwrap();
        assert!(!back.has_voxels());
        assert_eq!(back.vertices.len(), 3);
        assert_eq!(back.portals.len(), topo.portals.len());
        for (p, q) in topo.portals.iter().zip(&back.portals) {
            assert_eq!((p.id, p.vertex_a, p.vertex_b, p.face_count), (q.id, q.vertex_a, q.vertex_b, q.face_count));
            assert!((p.center - q.center).norm() < 1e-6);
        }
        for (x, y) in topo.vertices.iter().zip(&back.vertices) {
            assert_eq!(x.hull.vertices().len(), y.hull.vertices().len());
            for p in x.hull.vertices() {
                assert!(y.hull.vertices().iter().any(|q| (p - q).norm() < 1e-6));
            }
        }
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn bad_files() {
        let ok = "TOPOMAP v1 voxel_size=0.250000\nV 0 0.015625 1\n0.125000 0.125000 0.125000\n";
        assert!(TopologicalMap::from_text(ok.as_bytes()).is_ok());
        let dangling = format!("{ok}P 0 0 3 0 0 0 1\n");
        assert!(matches!(TopologicalMap::from_text(dangling.as_bytes()), Err(Error::Format(_))));
        let version = ok.replace("v1", "v2");
        assert!(matches!(TopologicalMap::from_text(version.as_bytes()), Err(Error::Format(_))));
        let truncated = "TOPOMAP v1 voxel_size=0.250000\nV 0 0.015625 2\n0.125000 0.125000 0.125000\n";
        assert!(matches!(TopologicalMap::from_text(truncated.as_bytes()), Err(Error::Format(_))));
    }
}
