//! Poincaré-Reeb graphs of a domain under a coordinate projection.
//!
//! The graph is read off the sweep that [`crate::domain`] already built: at
//! each station the domain cells touching the station line are grouped by
//! overlapping limit ranges, which yields the components of the closed
//! fiber. Groups that contain a characteristic point of the closure become
//! vertices; every other group joins exactly one cell on each side and is
//! contracted into an edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::{fiber_roots, Domain, Range};
use crate::error::{Error, Result};
use crate::geom::{Axis, Point};

/// Components of the closure on one line `{axis = t}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fiber {
    pub t: f64,
    /// Disjoint sorted closed intervals in the other coordinate.
    pub intervals: Vec<[f64; 2]>,
    /// Per interval, the index of its lowest cell on the line.
    pub components: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    /// A component of the fiber at sweep station `station`.
    Fiber { station: usize, points: Vec<Point> },
    /// A vertex of an input graph.
    Input { id: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub height: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
}

/// Directed multigraph whose edges point from lower to higher vertices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VDigraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoMode {
    /// Directed-graph isomorphism.
    Orientation,
    /// Additionally monotone in heights.
    HeightOrder,
    /// Heights agree within the tolerance.
    ExactHeight,
}

const MAX_ISO_VERTICES: usize = 64;

impl VDigraph {
    pub fn from_parts(heights: &[f64], edges: &[(usize, usize)]) -> Result<VDigraph> {
        let g = VDigraph {
            vertices: heights.iter().enumerate().map(|(id, &height)| Vertex { id, height, provenance: None }).collect(),
            edges: edges.iter().map(|&(from, to)| Edge { from, to }).collect(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn from_json(s: &str) -> Result<VDigraph> {
        let g: VDigraph = serde_json::from_str(s)?;
        g.validate()?;
        Ok(g)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    fn position(&self, id: usize) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn vertex(&self, id: usize) -> Option<&Vertex> {
        self.vertices.iter().find(|v| v.id == id)
    }

    pub fn height(&self, id: usize) -> f64 {
        self.vertex(id).map_or(f64::NAN, |v| v.height)
    }

    /// Unique ids, edges between known vertices going strictly upward,
    /// and connectivity.
    pub fn validate(&self) -> Result<()> {
        let mut ids: Vec<usize> = self.vertices.iter().map(|v| v.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate vertex id".into()));
        }
        for e in &self.edges {
            let (Some(a), Some(b)) = (self.vertex(e.from), self.vertex(e.to)) else {
                return Err(Error::InvalidInput(format!("edge {}->{} names an unknown vertex", e.from, e.to)));
            };
            if !(a.height < b.height) {
                return Err(Error::InvalidInput(format!("edge {}->{} does not go upward", e.from, e.to)));
            }
        }
        if !self.is_connected() {
            return Err(Error::InvalidInput("graph is not connected".into()));
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let adj = self.undirected_adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            if let (Some(a), Some(b)) = (self.position(e.from), self.position(e.to)) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        adj
    }

    pub fn in_degree(&self, id: usize) -> usize {
        self.edges.iter().filter(|e| e.to == id).count()
    }

    pub fn out_degree(&self, id: usize) -> usize {
        self.edges.iter().filter(|e| e.from == id).count()
    }

    /// First Betti number `E - V + 1` of a connected graph.
    pub fn betti1(&self) -> isize {
        self.edges.len() as isize - self.vertices.len() as isize + 1
    }

    /// Removes vertices with one incoming and one outgoing edge, joining the
    /// two edges. The result has the same underlying topological space.
    pub fn suppress_pass_through(&self) -> VDigraph {
        let mut g = self.clone();
        loop {
            let Some(v) = g.vertices.iter().map(|v| v.id).find(|&id| g.in_degree(id) == 1 && g.out_degree(id) == 1) else {
                return g;
            };
            let from = g.edges.iter().find(|e| e.to == v).unwrap().from;
            let to = g.edges.iter().find(|e| e.from == v).unwrap().to;
            g.edges.retain(|e| e.from != v && e.to != v);
            g.edges.push(Edge { from, to });
            g.vertices.retain(|x| x.id != v);
        }
    }

    /// Graphviz rendering with vertices ranked by height.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "digraph {name} {{");
        let _ = writeln!(s, "  rankdir=LR;");
        let mut by_height: Vec<&Vertex> = self.vertices.iter().collect();
        by_height.sort_by(|a, b| a.height.total_cmp(&b.height));
        for v in &by_height {
            let _ = writeln!(s, "  v{} [label=\"{} @ {:.6}\"];", v.id, v.id, v.height);
        }
        let mut level: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for v in &by_height {
            level.entry(format!("{:.9}", v.height)).or_default().push(v.id);
        }
        for ids in level.values().filter(|ids| ids.len() > 1) {
            let names: Vec<String> = ids.iter().map(|i| format!("v{i}")).collect();
            let _ = writeln!(s, "  {{ rank=same; {}; }}", names.join("; "));
        }
        for e in &self.edges {
            let _ = writeln!(s, "  v{} -> v{};", e.from, e.to);
        }
        s.push_str("}\n");
        s
    }
}

/// Whether the two graphs are isomorphic as V-digraphs under `mode`.
pub fn vdigraph_isomorphic(g1: &VDigraph, g2: &VDigraph, mode: IsoMode, tol: f64) -> Result<bool> {
    for g in [g1, g2] {
        if g.vertices.len() > MAX_ISO_VERTICES {
            return Err(Error::TooLarge(g.vertices.len()));
        }
    }
    if g1.vertices.len() != g2.vertices.len() || g1.edges.len() != g2.edges.len() {
        return Ok(false);
    }
    let a = Indexed::new(g1);
    let b = Indexed::new(g2);
    let n = a.heights.len();
    // Visit vertices of g1 bottom-up so height pruning bites early.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.heights[i].total_cmp(&a.heights[j]));
    let mut search = Iso { a: &a, b: &b, mode, tol, map: vec![usize::MAX; n], used: vec![false; n], order };
    Ok(search.extend(0))
}

/// Isomorphism after suppressing pass-through vertices in both graphs.
pub fn homeomorphic(g1: &VDigraph, g2: &VDigraph, mode: IsoMode, tol: f64) -> Result<bool> {
    vdigraph_isomorphic(&g1.suppress_pass_through(), &g2.suppress_pass_through(), mode, tol)
}

struct Indexed {
    heights: Vec<f64>,
    /// Edge multiplicity `mult[i][j]` from position i to position j.
    mult: Vec<Vec<u32>>,
    indeg: Vec<usize>,
    outdeg: Vec<usize>,
}

impl Indexed {
    fn new(g: &VDigraph) -> Indexed {
        let n = g.vertices.len();
        let mut mult = vec![vec![0u32; n]; n];
        let mut indeg = vec![0; n];
        let mut outdeg = vec![0; n];
        for e in &g.edges {
            let (i, j) = (g.position(e.from).unwrap(), g.position(e.to).unwrap());
            mult[i][j] += 1;
            outdeg[i] += 1;
            indeg[j] += 1;
        }
        Indexed { heights: g.vertices.iter().map(|v| v.height).collect(), mult, indeg, outdeg }
    }
}

struct Iso<'a> {
    a: &'a Indexed,
    b: &'a Indexed,
    mode: IsoMode,
    tol: f64,
    map: Vec<usize>,
    used: Vec<bool>,
    order: Vec<usize>,
}

impl Iso<'_> {
    fn compatible(&self, i: usize, j: usize) -> bool {
        let (a, b) = (self.a, self.b);
        if a.indeg[i] != b.indeg[j] || a.outdeg[i] != b.outdeg[j] || a.mult[i][i] != b.mult[j][j] {
            return false;
        }
        match self.mode {
            IsoMode::Orientation => {}
            IsoMode::ExactHeight => {
                if (a.heights[i] - b.heights[j]).abs() > self.tol {
                    return false;
                }
            }
            IsoMode::HeightOrder => {
                // Strictly ordered pairs must stay ordered the same way.
                for (k, &m) in self.map.iter().enumerate() {
                    if m == usize::MAX {
                        continue;
                    }
                    let da = a.heights[i] - a.heights[k];
                    let db = b.heights[j] - b.heights[m];
                    if (da > self.tol && db < -self.tol) || (da < -self.tol && db > self.tol) {
                        return false;
                    }
                }
            }
        }
        self.map.iter().enumerate().all(|(k, &m)| {
            m == usize::MAX || (a.mult[i][k] == b.mult[j][m] && a.mult[k][i] == b.mult[m][j])
        })
    }

    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let i = self.order[depth];
        for j in 0..self.b.heights.len() {
            if self.used[j] || !self.compatible(i, j) {
                continue;
            }
            self.map[i] = j;
            self.used[j] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.map[i] = usize::MAX;
            self.used[j] = false;
        }
        false
    }
}

/// Closed fiber of the domain on the line `{axis = t}`. At a station the
/// intervals may be degenerate.
pub fn fiber_at(domain: &Domain, axis: Axis, t: f64) -> Result<Fiber> {
    let sweep = domain.sweep(axis);
    if !(sweep.range.lo < t && t < sweep.range.hi) {
        return Err(Error::InvalidInput(format!("fiber coordinate {t} outside the box")));
    }
    let eps = 10.0 * domain.scene.tol.solver * domain.scene.length_scale();
    if let Some(si) = sweep.stations.iter().position(|s| s.t_lo - eps <= t && t <= s.t_hi + eps) {
        let st = &sweep.stations[si];
        let groups = station_groups(si, &sweep.station_cells(si));
        return Ok(Fiber {
            t,
            intervals: groups.iter().map(|g| [st.anchors[g.range.0], st.anchors[g.range.1]]).collect(),
            components: groups.iter().map(|g| g.range.0).collect(),
        });
    }
    let k = sweep
        .slabs
        .iter()
        .position(|s| s.t_lo < t && t < s.t_hi)
        .ok_or(Error::MembershipUndecided(Point::from_axis(axis, t, sweep.across.mid())))?;
    let roots = fiber_roots(sweep.curves(), axis, t, sweep.across, sweep.fiber_tol)?;
    if roots.us.len() != sweep.slabs[k].mid.us.len() {
        return Err(Error::MembershipUndecided(Point::from_axis(axis, t, sweep.across.mid())));
    }
    let mut bounds = vec![sweep.across.lo];
    bounds.extend(&roots.us);
    bounds.push(sweep.across.hi);
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    let mut components = Vec::new();
    for c in 0..=roots.us.len() {
        if !sweep.in_domain(k, c) {
            continue;
        }
        let (lo, hi) = (bounds[c], bounds[c + 1]);
        match intervals.last_mut() {
            // Two domain cells meeting at a single root share that point.
            Some(last) if last[1] == lo => last[1] = hi,
            _ => {
                intervals.push([lo, hi]);
                components.push(c);
            }
        }
    }
    Ok(Fiber { t, intervals, components })
}

/// A component of the closed fiber at a station.
struct Group {
    range: Range,
    /// Cells on the lower and upper side as (slab, cell).
    below: Vec<(usize, usize)>,
    above: Vec<(usize, usize)>,
}

/// Groups the domain cells touching station `si` (between slabs `si` and
/// `si + 1`) into components of the closed fiber.
fn station_groups(si: usize, cells: &[(usize, usize, Range)]) -> Vec<Group> {
    let mut sorted = cells.to_vec();
    sorted.sort_by_key(|c| c.2);
    let mut out: Vec<Group> = Vec::new();
    for (slab, cell, r) in sorted {
        let g = match out.last_mut() {
            Some(g) if r.0 <= g.range.1 => {
                g.range.1 = g.range.1.max(r.1);
                g
            }
            _ => {
                out.push(Group { range: r, below: Vec::new(), above: Vec::new() });
                out.last_mut().unwrap()
            }
        };
        if slab == si {
            g.below.push((slab, cell));
        } else {
            g.above.push((slab, cell));
        }
    }
    out
}

/// Poincaré-Reeb V-digraph of the domain for the projection onto `axis`.
pub fn poincare_reeb(domain: &Domain, axis: Axis) -> Result<VDigraph> {
    let morse = domain.classify_morse();
    if !morse.morse {
        let why: Vec<String> = morse.witnesses.iter().map(|w| format!("{} at {}", w.reason, w.location)).collect();
        return Err(Error::NotMorse(why.join("; ")));
    }
    let sweep = domain.sweep(axis);
    let mut vertices = Vec::new();
    // Domain cells, joined through pass-through groups.
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut parent: Vec<usize> = Vec::new();
    let mut ends: Vec<((usize, usize), usize, bool)> = Vec::new();
    let mut id_of = |c: (usize, usize), parent: &mut Vec<usize>| {
        *ids.entry(c).or_insert_with(|| {
            parent.push(parent.len());
            parent.len() - 1
        })
    };
    for (si, st) in sweep.stations.iter().enumerate() {
        for g in station_groups(si, &sweep.station_cells(si)) {
            let points: Vec<Point> = st
                .events
                .iter()
                .filter(|(_, a)| g.range.0 <= *a && *a <= g.range.1)
                .map(|(p, _)| p.location)
                .collect();
            if points.is_empty() {
                if g.below.len() != 1 || g.above.len() != 1 {
                    return Err(Error::SweepMatchingAmbiguous(st.t));
                }
                let a = id_of(g.below[0], &mut parent);
                let b = id_of(g.above[0], &mut parent);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
                continue;
            }
            let vid = vertices.len();
            vertices.push(Vertex { id: vid, height: st.t, provenance: Some(Provenance::Fiber { station: si, points }) });
            for &c in &g.below {
                ends.push((c, vid, true));
            }
            for &c in &g.above {
                ends.push((c, vid, false));
            }
        }
    }
    // Each chain of cells must run from one vertex below to one above.
    let mut chains: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (c, vid, upper_end) in ends {
        let k = id_of(c, &mut parent);
        let root = find(&mut parent, k);
        let e = chains.entry(root).or_default();
        if upper_end {
            e.1.push(vid);
        } else {
            e.0.push(vid);
        }
    }
    let mut edges = Vec::new();
    for (lo, hi) in chains.values() {
        match (lo.as_slice(), hi.as_slice()) {
            ([a], [b]) => edges.push(Edge { from: *a, to: *b }),
            _ => return Err(Error::SweepMatchingAmbiguous(lo.first().or(hi.first()).map_or(f64::NAN, |&v| vertices[v].height))),
        }
    }
    if ids.len() != parent.len() || chains.len() != (0..parent.len()).filter(|&i| find(&mut parent, i) == i).count() {
        return Err(Error::SweepMatchingAmbiguous(f64::NAN));
    }
    let g = VDigraph { vertices, edges };
    g.validate()?;
    Ok(g)
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    parent[i] = r;
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, Scene};
    use crate::geom::Box2;
    use crate::poly::Poly2;

    fn scene(curves: Vec<Poly2>, seed: Point) -> Scene {
        Scene::new(curves, Box2::centered(2.0), seed)
    }

    fn disk() -> Domain {
        build_domain(&scene(vec![Poly2::circle(Point::new(0.0, 0.0), 1.0)], Point::new(0.0, 0.0))).unwrap()
    }

    fn annulus() -> Domain {
        let o = Point::new(0.0, 0.0);
        build_domain(&scene(vec![Poly2::circle(o, 1.0), Poly2::circle(o, 0.5)], Point::new(0.0, 0.7))).unwrap()
    }

    #[test]
    fn disk_is_a_path() {
        let g = poincare_reeb(&disk(), Axis::X).unwrap();
        assert_eq!(g.vertices.len(), 2);
        assert_eq!(g.edges.len(), 1);
        let mut h: Vec<f64> = g.vertices.iter().map(|v| v.height).collect();
        h.sort_by(f64::total_cmp);
        assert!((h[0] + 1.0).abs() < 1e-8 && (h[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn annulus_is_a_cycle() {
        let g = poincare_reeb(&annulus(), Axis::X).unwrap();
        let expect = VDigraph::from_parts(&[-1.0, -0.5, 0.5, 1.0], &[(0, 1), (1, 2), (1, 2), (2, 3)]).unwrap();
        assert!(vdigraph_isomorphic(&g, &expect, IsoMode::ExactHeight, 1e-8).unwrap());
        assert_eq!(g.betti1(), 1);
    }

    #[test]
    fn disk_axes_agree() {
        let d = disk();
        let gx = poincare_reeb(&d, Axis::X).unwrap();
        let gy = poincare_reeb(&d, Axis::Y).unwrap();
        assert!(vdigraph_isomorphic(&gx, &gy, IsoMode::ExactHeight, 1e-8).unwrap());
    }

    #[test]
    fn fibers() {
        let f = fiber_at(&disk(), Axis::X, 0.0).unwrap();
        assert_eq!(f.intervals.len(), 1);
        assert!((f.intervals[0][0] + 1.0).abs() < 1e-9 && (f.intervals[0][1] - 1.0).abs() < 1e-9);
        let f = fiber_at(&annulus(), Axis::X, 0.0).unwrap();
        assert_eq!(f.intervals.len(), 2);
        assert!((f.intervals[0][1] + 0.5).abs() < 1e-9 && (f.intervals[1][0] - 0.5).abs() < 1e-9);
        let f = fiber_at(&disk(), Axis::X, 0.999_999).unwrap();
        let w = f.intervals[0][1] - f.intervals[0][0];
        assert!((w - 2.0 * (1.0f64 - 0.999_999f64 * 0.999_999).sqrt()).abs() < 1e-9);
        // At the pole the fiber is a single point.
        let f = fiber_at(&disk(), Axis::X, 1.0 - 1e-12).unwrap();
        assert_eq!(f.intervals.len(), 1);
        assert!(f.intervals[0][1] - f.intervals[0][0] < 1e-6);
    }

    #[test]
    fn isomorphism_modes() {
        let a = VDigraph::from_parts(&[-1.0, 1.0], &[(0, 1)]).unwrap();
        let b = VDigraph::from_parts(&[0.0, 5.0], &[(0, 1)]).unwrap();
        assert!(vdigraph_isomorphic(&a, &b, IsoMode::HeightOrder, 1e-9).unwrap());
        assert!(!vdigraph_isomorphic(&a, &b, IsoMode::ExactHeight, 1e-9).unwrap());
        let cyc = VDigraph::from_parts(&[-1.0, -0.5, 0.5, 1.0], &[(0, 1), (1, 2), (1, 2), (2, 3)]).unwrap();
        for mode in [IsoMode::Orientation, IsoMode::HeightOrder, IsoMode::ExactHeight] {
            assert!(!vdigraph_isomorphic(&cyc, &a, mode, 1e-9).unwrap());
        }
        let relabeled = VDigraph::from_parts(&[0.5, 1.0, -1.0, -0.5], &[(2, 3), (3, 0), (3, 0), (0, 1)]).unwrap();
        assert!(vdigraph_isomorphic(&cyc, &relabeled, IsoMode::ExactHeight, 1e-9).unwrap());
    }

    #[test]
    fn height_order_rejects_swapped_branches() {
        let y1 = VDigraph::from_parts(&[0.0, 1.0, 2.0, 3.0], &[(0, 1), (1, 2), (1, 3)]).unwrap();
        // Same degrees but the split is now a merge.
        let y2 = VDigraph::from_parts(&[0.0, 2.5, 2.0, 3.0], &[(0, 1), (1, 3), (2, 3)]).unwrap();
        assert!(!vdigraph_isomorphic(&y1, &y2, IsoMode::Orientation, 1e-9).unwrap());
        // A path whose middle vertex moves above the top is not height-ordered.
        let p1 = VDigraph::from_parts(&[0.0, 1.0, 2.0], &[(0, 1), (0, 2)]).unwrap();
        let p2 = VDigraph::from_parts(&[0.0, 3.0, 2.0], &[(0, 1), (0, 2)]).unwrap();
        let p3 = VDigraph::from_parts(&[0.0, 2.0, 1.0], &[(0, 1), (0, 2)]).unwrap();
        assert!(vdigraph_isomorphic(&p1, &p2, IsoMode::HeightOrder, 1e-9).unwrap());
        assert!(vdigraph_isomorphic(&p1, &p3, IsoMode::HeightOrder, 1e-9).unwrap());
        let q1 = VDigraph::from_parts(&[0.0, 1.0, 2.0, 3.0], &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let q2 = VDigraph::from_parts(&[0.0, 1.0, 2.0, 3.0], &[(0, 1), (0, 2), (1, 3)]).unwrap();
        assert!(!vdigraph_isomorphic(&q1, &q2, IsoMode::Orientation, 1e-9).unwrap());
        let y3 = VDigraph::from_parts(&[0.0, 1.5, 2.0, 3.0], &[(0, 1), (1, 2), (1, 3)]).unwrap();
        assert!(vdigraph_isomorphic(&y1, &y3, IsoMode::HeightOrder, 1e-9).unwrap());
        assert!(!vdigraph_isomorphic(&y1, &y3, IsoMode::ExactHeight, 1e-9).unwrap());
    }

    #[test]
    fn too_large() {
        let h: Vec<f64> = (0..70).map(f64::from).collect();
        let e: Vec<(usize, usize)> = (0..69).map(|i| (i, i + 1)).collect();
        let g = VDigraph::from_parts(&h, &e).unwrap();
        assert!(matches!(vdigraph_isomorphic(&g, &g, IsoMode::Orientation, 0.0), Err(Error::TooLarge(70))));
    }

    #[test]
    fn invalid_graphs_are_rejected() {
        assert!(VDigraph::from_parts(&[1.0, 0.0], &[(0, 1)]).is_err());
        assert!(VDigraph::from_parts(&[0.0, 1.0, 2.0], &[(0, 1)]).is_err());
        let s = r#"{"vertices":[{"id":3,"height":0.0},{"id":7,"height":1.0}],"edges":[{"from":3,"to":7}]}"#;
        let g = VDigraph::from_json(s).unwrap();
        assert_eq!(g.out_degree(3), 1);
        assert_eq!(VDigraph::from_json(&g.to_json()).unwrap(), g);
        assert!(g.to_dot("g").contains("v3 -> v7"));
    }

    #[test]
    fn suppression_keeps_the_shape() {
        let g = VDigraph::from_parts(&[0.0, 1.0, 2.0], &[(0, 1), (1, 2)]).unwrap();
        let s = g.suppress_pass_through();
        assert_eq!((s.vertices.len(), s.edges.len()), (2, 1));
    }
}
