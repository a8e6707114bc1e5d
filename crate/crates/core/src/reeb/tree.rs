use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::TriangulatedSphere;
use crate::math::ceil;
use crate::{Error, Result};

/// Default number of level slabs across the full range of the function.
pub const DEFAULT_SLABS: usize = 256;

const NONE: usize = usize::MAX;

/// Critical (or atom-carrying) point of the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub value: f64,
    /// Area of the flat patch collapsed into this node (0 for ordinary
    /// critical points).
    pub atom: f64,
    /// Smallest sphere vertex index in the node's level component.
    pub vertex: usize,
}

/// Monotone family of level components between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeArc {
    /// Endpoint with the lower value.
    pub lo: usize,
    /// Endpoint with the higher value.
    pub hi: usize,
    lo_value: f64,
    hi_value: f64,
    /// Measure of the part of the arc below equally spaced levels.
    table: Vec<f64>,
}

impl TreeArc {
    pub fn levels(&self) -> (f64, f64) {
        (self.lo_value, self.hi_value)
    }

    pub fn measure(&self) -> f64 {
        *self.table.last().unwrap_or(&0.0)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn knot(&self, k: usize) -> f64 {
        let n = self.table.len();
        if k + 1 >= n {
            self.hi_value
        } else {
            self.lo_value + (self.hi_value - self.lo_value) * k as f64 / (n - 1) as f64
        }
    }

    /// Measure of the arc below `level`, interpolated linearly between slabs.
    pub fn cumulative(&self, level: f64) -> f64 {
        let n = self.table.len();
        let span = self.hi_value - self.lo_value;
        if level <= self.lo_value || span <= 0.0 {
            return if level >= self.hi_value {
                self.measure()
            } else {
                0.0
            };
        }
        if level >= self.hi_value {
            return self.measure();
        }
        let u = (level - self.lo_value) / span * (n - 1) as f64;
        let k = (u as usize).min(n - 2);
        let f = u - k as f64;
        (1.0 - f) * self.table[k] + f * self.table[k + 1]
    }

    /// Level splitting the arc into `below` and `measure - below`, by
    /// bisection on the cumulative measure.
    pub fn level_for(&self, below: f64) -> f64 {
        let (mut a, mut b) = (self.lo_value, self.hi_value);
        if below <= 0.0 {
            return a;
        }
        if below >= self.measure() {
            return b;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.cumulative(m) < below {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

/// Where a point of the sphere lands in the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreePosition {
    Node(usize),
    Arc(usize),
}

/// Contour tree of a PL function on a sphere with the pushed-forward area.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasuredReebTree {
    nodes: Vec<TreeNode>,
    arcs: Vec<TreeArc>,
    incident: Vec<Vec<usize>>,
    /// Arc to the parent when rooted at node 0.
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    /// Nodes in depth-first preorder from the root.
    preorder: Vec<usize>,
    total_measure: f64,
    area: f64,
}

impl MeasuredReebTree {
    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn arcs(&self) -> &[TreeArc] {
        &self.arcs
    }

    /// Arcs incident to `node`.
    pub fn incident(&self, node: usize) -> &[usize] {
        &self.incident[node]
    }

    pub fn total_measure(&self) -> f64 {
        self.total_measure
    }

    /// Area of the sphere the tree was built from.
    pub fn sphere_area(&self) -> f64 {
        self.area
    }

    pub(crate) fn root(&self) -> usize {
        0
    }

    pub(crate) fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    pub(crate) fn parent_arc(&self, node: usize) -> Option<usize> {
        let e = self.parent_arc[node];
        (e != NONE).then_some(e)
    }

    /// The endpoint of `arc` farther from the root.
    pub(crate) fn child(&self, arc: usize) -> usize {
        let e = &self.arcs[arc];
        if self.parent_arc[e.lo] == arc {
            e.lo
        } else {
            e.hi
        }
    }

    pub(crate) fn other_end(&self, arc: usize, node: usize) -> usize {
        let e = &self.arcs[arc];
        if e.lo == node {
            e.hi
        } else {
            e.lo
        }
    }

    fn in_subtree(&self, root: usize, node: usize) -> bool {
        self.tin[root] <= self.tin[node] && self.tout[node] <= self.tout[root]
    }

    fn anchor(&self, p: TreePosition) -> usize {
        match p {
            TreePosition::Node(n) => n,
            TreePosition::Arc(e) => self.child(e),
        }
    }

    /// Node where a monotone path leaving `p` toward `q` passes first.
    fn exit(&self, p: TreePosition, q: TreePosition, out: &mut Vec<usize>) -> usize {
        match p {
            TreePosition::Node(n) => n,
            TreePosition::Arc(e) => {
                out.push(e);
                let c = self.child(e);
                if self.in_subtree(c, self.anchor(q)) {
                    c
                } else {
                    self.other_end(e, c)
                }
            }
        }
    }

    /// Arcs met by the tree path from `p` to `q`.
    fn path(&self, p: TreePosition, q: TreePosition, out: &mut Vec<usize>) {
        out.clear();
        if let (TreePosition::Arc(a), TreePosition::Arc(b)) = (p, q) {
            if a == b {
                out.push(a);
                return;
            }
        }
        let mut u = self.exit(p, q, out);
        let mut v = self.exit(q, p, out);
        while u != v {
            if self.depth[u] >= self.depth[v] {
                let e = self.parent_arc[u];
                out.push(e);
                u = self.other_end(e, u);
            } else {
                let e = self.parent_arc[v];
                out.push(e);
                v = self.other_end(e, v);
            }
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
        rb
    }
}

/// Sublevel area `|{F <= c}|` of a linear triangle with sorted values.
fn sublevel_area(area: f64, f: [f64; 3], c: f64) -> f64 {
    let [f0, f1, f2] = f;
    if c <= f0 {
        0.0
    } else if c >= f2 {
        area
    } else if c <= f1 {
        area * (c - f0) * (c - f0) / ((f1 - f0) * (f2 - f0))
    } else {
        area * (1.0 - (f2 - c) * (f2 - c) / ((f2 - f1) * (f2 - f0)))
    }
}

/// Contour tree by join/split-tree merge, with equal-valued edges collapsed
/// first so flat patches become single nodes carrying their area. Arc
/// measures are exact at `slabs` levels across the full range of `F` and
/// interpolated in between.
pub fn build_contour_tree(sphere: &TriangulatedSphere, slabs: usize) -> Result<MeasuredReebTree> {
    if slabs == 0 {
        return Err(Error::OutOfRange("slab count must be positive".into()));
    }
    let values = sphere.values();
    let tris = sphere.triangles();
    let areas = sphere.areas();
    let nv = values.len();

    // level components through vertices
    let mut uf = UnionFind::new(nv);
    for t in tris {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            if values[a] == values[b] {
                uf.union(a, b);
            }
        }
    }
    let mut sv_of = vec![NONE; nv];
    let mut sv_min = Vec::new();
    for v in 0..nv {
        let r = uf.find(v);
        if sv_of[r] == NONE {
            sv_of[r] = sv_min.len();
            sv_min.push(v);
        }
        sv_of[v] = sv_of[r];
    }
    let m = sv_min.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_unstable_by(|&a, &b| {
        values[sv_min[a]]
            .total_cmp(&values[sv_min[b]])
            .then(sv_min[a].cmp(&sv_min[b]))
    });
    let mut rank = vec![0; m];
    for (r, &sv) in order.iter().enumerate() {
        rank[sv] = r;
    }
    let rank_of = |v: usize| rank[sv_of[v]];
    let value_at: Vec<f64> = order.iter().map(|&sv| values[sv_min[sv]]).collect();
    let vertex_at: Vec<usize> = order.iter().map(|&sv| sv_min[sv]).collect();

    let mut atom = vec![0.0; m];
    let mut pairs = Vec::with_capacity(3 * tris.len());
    for (t, &a) in tris.iter().zip(areas) {
        let r = [rank_of(t[0]), rank_of(t[1]), rank_of(t[2])];
        if r[0] == r[1] && r[1] == r[2] {
            atom[r[0]] += a;
            continue;
        }
        for k in 0..3 {
            let (x, y) = (r[k], r[(k + 1) % 3]);
            if x != y {
                pairs.push((x.min(y), x.max(y)));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();

    // lower and upper neighbours in CSR form
    let mut lo_start = vec![0usize; m + 1];
    let mut hi_start = vec![0usize; m + 1];
    for &(a, b) in &pairs {
        lo_start[b + 1] += 1;
        hi_start[a + 1] += 1;
    }
    for r in 0..m {
        lo_start[r + 1] += lo_start[r];
        hi_start[r + 1] += hi_start[r];
    }
    let mut lower = vec![0usize; pairs.len()];
    let mut upper = vec![0usize; pairs.len()];
    {
        let mut fl = lo_start.clone();
        let mut fh = hi_start.clone();
        for &(a, b) in &pairs {
            lower[fl[b]] = a;
            fl[b] += 1;
            upper[fh[a]] = b;
            fh[a] += 1;
        }
    }

    // join tree (sublevel sets merge going up)
    let mut jt_up = vec![NONE; m];
    let mut jt_down_n = vec![0u32; m];
    let mut jt_down_x = vec![0usize; m];
    let mut uf = UnionFind::new(m);
    let mut head = vec![0usize; m];
    for r in 0..m {
        for &u in &lower[lo_start[r]..lo_start[r + 1]] {
            let c = uf.find(u);
            if c != uf.find(r) {
                let h = head[c];
                jt_up[h] = r;
                jt_down_n[r] += 1;
                jt_down_x[r] ^= h;
                uf.union(c, r);
            }
        }
        let c = uf.find(r);
        head[c] = r;
    }
    // split tree (superlevel sets merge going down)
    let mut st_down = vec![NONE; m];
    let mut st_up_n = vec![0u32; m];
    let mut st_up_x = vec![0usize; m];
    let mut uf = UnionFind::new(m);
    for r in (0..m).rev() {
        for &u in &upper[hi_start[r]..hi_start[r + 1]] {
            let c = uf.find(u);
            if c != uf.find(r) {
                let h = head[c];
                st_down[h] = r;
                st_up_n[r] += 1;
                st_up_x[r] ^= h;
                uf.union(c, r);
            }
        }
        let c = uf.find(r);
        head[c] = r;
    }

    // merge
    let mut ct_edges: Vec<(usize, usize)> = Vec::with_capacity(m.saturating_sub(1));
    let mut removed = vec![false; m];
    let is_leaf =
        |r: usize, jd: &[u32], su: &[u32]| (su[r] == 0 && jd[r] == 1) || (jd[r] == 0 && su[r] == 1);
    let mut queue: Vec<usize> = (0..m)
        .filter(|&r| is_leaf(r, &jt_down_n, &st_up_n))
        .collect();
    let mut remaining = m;
    while remaining > 1 {
        let Some(v) = queue.pop() else {
            return Err(Error::Tree(format!(
                "merge stalled with {remaining} vertices left"
            )));
        };
        if removed[v] {
            continue;
        }
        let w;
        if st_up_n[v] == 0 && jt_down_n[v] == 1 && st_down[v] != NONE {
            w = st_down[v];
            ct_edges.push((w, v));
            st_up_n[w] -= 1;
            st_up_x[w] ^= v;
            let (u, p) = (jt_down_x[v], jt_up[v]);
            jt_up[u] = p;
            if p != NONE {
                jt_down_x[p] ^= v ^ u;
            }
        } else if jt_down_n[v] == 0 && st_up_n[v] == 1 && jt_up[v] != NONE {
            w = jt_up[v];
            ct_edges.push((v, w));
            jt_down_n[w] -= 1;
            jt_down_x[w] ^= v;
            let (u, p) = (st_up_x[v], st_down[v]);
            st_down[u] = p;
            if p != NONE {
                st_up_x[p] ^= v ^ u;
            }
        } else {
            continue;
        }
        removed[v] = true;
        remaining -= 1;
        if is_leaf(w, &jt_down_n, &st_up_n) {
            queue.push(w);
        }
    }

    // reduce to critical and atom nodes
    let mut up_n = vec![0u32; m];
    let mut down_n = vec![0u32; m];
    let mut up_start = vec![0usize; m + 1];
    for &(a, b) in &ct_edges {
        up_n[a] += 1;
        down_n[b] += 1;
        up_start[a + 1] += 1;
    }
    for r in 0..m {
        up_start[r + 1] += up_start[r];
    }
    let mut ups = vec![0usize; ct_edges.len()];
    {
        let mut fill = up_start.clone();
        for &(a, b) in &ct_edges {
            ups[fill[a]] = b;
            fill[a] += 1;
        }
    }
    let is_node: Vec<bool> = (0..m)
        .map(|r| !(up_n[r] == 1 && down_n[r] == 1) || atom[r] > 0.0)
        .collect();
    let mut node_of = vec![NONE; m];
    let mut nodes = Vec::new();
    for r in 0..m {
        if is_node[r] {
            node_of[r] = nodes.len();
            nodes.push(TreeNode {
                value: value_at[r],
                atom: atom[r],
                vertex: vertex_at[r],
            });
        }
    }
    let mut position = vec![TreePosition::Node(0); m];
    let mut arc_ends = Vec::new();
    for r in 0..m {
        if !is_node[r] {
            continue;
        }
        position[r] = TreePosition::Node(node_of[r]);
        for &first in &ups[up_start[r]..up_start[r + 1]] {
            let id = arc_ends.len();
            let mut x = first;
            while !is_node[x] {
                position[x] = TreePosition::Arc(id);
                x = ups[up_start[x]];
            }
            arc_ends.push((node_of[r], node_of[x]));
        }
    }

    let global_range =
        value_at.last().copied().unwrap_or(0.0) - value_at.first().copied().unwrap_or(0.0);
    let mut arcs: Vec<TreeArc> = arc_ends
        .iter()
        .map(|&(lo, hi)| {
            let (lv, hv) = (nodes[lo].value, nodes[hi].value);
            let n = if global_range > 0.0 && hv > lv {
                let k = ceil(slabs as f64 * (hv - lv) / global_range) as usize;
                k.max(8) + 1
            } else {
                2
            };
            TreeArc {
                lo,
                hi,
                lo_value: lv,
                hi_value: hv,
                table: vec![0.0; n],
            }
        })
        .collect();

    let nn = nodes.len();
    let mut incident = vec![Vec::new(); nn];
    for (e, a) in arcs.iter().enumerate() {
        incident[a.lo].push(e);
        incident[a.hi].push(e);
    }
    if nn != arcs.len() + 1 {
        return Err(Error::Tree(format!(
            "{} nodes and {} arcs do not form a tree",
            nn,
            arcs.len()
        )));
    }

    // root at node 0
    let mut parent_arc = vec![NONE; nn];
    let mut depth = vec![0usize; nn];
    let mut tin = vec![0usize; nn];
    let mut tout = vec![0usize; nn];
    let mut preorder = Vec::with_capacity(nn);
    let mut seen = vec![false; nn];
    let mut clock = 0;
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    seen[0] = true;
    tin[0] = clock;
    preorder.push(0);
    while let Some(top) = stack.last_mut() {
        let (v, next) = *top;
        if next < incident[v].len() {
            top.1 += 1;
            let e = incident[v][next];
            let w = if arcs[e].lo == v {
                arcs[e].hi
            } else {
                arcs[e].lo
            };
            if !seen[w] {
                seen[w] = true;
                parent_arc[w] = e;
                depth[w] = depth[v] + 1;
                clock += 1;
                tin[w] = clock;
                preorder.push(w);
                stack.push((w, 0));
            }
        } else {
            clock += 1;
            tout[v] = clock;
            stack.pop();
        }
    }
    if preorder.len() != nn {
        return Err(Error::Tree("contour tree is disconnected".into()));
    }

    let mut tree = MeasuredReebTree {
        nodes,
        arcs: Vec::new(),
        incident,
        parent_arc,
        depth,
        tin,
        tout,
        preorder,
        total_measure: 0.0,
        area: sphere.total_area(),
    };
    tree.arcs = arcs.clone();

    // exact per-triangle sublevel areas attributed along the tree
    let mut steps: Vec<Vec<f64>> = arcs.iter().map(|a| vec![0.0; a.table.len() + 1]).collect();
    let mut path = Vec::new();
    for (t, &area) in tris.iter().zip(areas) {
        let mut r = [rank_of(t[0]), rank_of(t[1]), rank_of(t[2])];
        if r[0] == r[1] && r[1] == r[2] {
            continue;
        }
        r.sort_unstable();
        let f = [value_at[r[0]], value_at[r[1]], value_at[r[2]]];
        tree.path(position[r[0]], position[r[2]], &mut path);
        for &e in &path {
            let arc = &mut arcs[e];
            let c0 = arc.lo_value.max(f[0]);
            let c1 = arc.hi_value.min(f[2]);
            if !(c1 > c0) {
                continue;
            }
            let base = sublevel_area(area, f, c0);
            let n = arc.table.len();
            let mut k = first_knot_above(arc, c0, false);
            let end = first_knot_above(arc, c1, true);
            while k < end {
                let x = arc.knot(k);
                arc.table[k] += sublevel_area(area, f, x) - base;
                k += 1;
            }
            if end < n {
                steps[e][end] += sublevel_area(area, f, c1) - base;
            }
        }
    }
    for (arc, step) in arcs.iter_mut().zip(&steps) {
        let mut run = 0.0;
        for (k, slot) in arc.table.iter_mut().enumerate() {
            run += step[k];
            *slot += run;
        }
    }
    tree.total_measure = tree.nodes.iter().map(|n| n.atom).sum::<f64>()
        + arcs.iter().map(|a| a.measure()).sum::<f64>();
    tree.arcs = arcs;
    Ok(tree)
}

/// First table knot strictly above `c` (or at/above it when `inclusive`).
fn first_knot_above(arc: &TreeArc, c: f64, inclusive: bool) -> usize {
    let n = arc.table.len();
    let span = arc.hi_value - arc.lo_value;
    let guess = ((c - arc.lo_value) / span * (n - 1) as f64).max(0.0) as usize;
    let mut k = guess.min(n);
    let past = |k: usize| {
        let x = arc.knot(k);
        if inclusive {
            x >= c
        } else {
            x > c
        }
    };
    while k > 0 && past(k - 1) {
        k -= 1;
    }
    while k < n && !past(k) {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        build_sphere, parse_field_expression, tetrahedron, AnnulusChart, Chart, SamplingOptions,
    };

    fn ramp_sphere(expr: &str, n: usize, s: f64, a: f64) -> TriangulatedSphere {
        let chart = Chart::Annulus(AnnulusChart {
            collar: 0.02,
            ..AnnulusChart::with_resolution(n)
        });
        let f = parse_field_expression(expr, &chart, SamplingOptions::default()).unwrap();
        build_sphere(&f, s, a).unwrap()
    }

    #[test]
    fn constant_field_is_one_atom() {
        let s = ramp_sphere("0", 16, 0.1, 0.75);
        let t = build_contour_tree(&s, DEFAULT_SLABS).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert!(t.arcs().is_empty());
        assert!((t.nodes()[0].atom - 1.5).abs() < 1e-12);
    }

    #[test]
    fn tetrahedron_is_a_path() {
        let s = tetrahedron([0.0, 1.0, 2.0, 3.0], [0.25; 4]).unwrap();
        let t = build_contour_tree(&s, 16).unwrap();
        assert_eq!(t.nodes().len(), 2);
        assert_eq!(t.arcs().len(), 1);
        assert!((t.total_measure() - 1.0).abs() < 1e-12);
        let arc = &t.arcs()[0];
        assert_eq!(arc.levels(), (0.0, 3.0));
        assert!(arc.table().windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn shift_gives_atom_arc_arc_atom() {
        let s = ramp_sphere("h", 64, 0.2, 0.75);
        let t = build_contour_tree(&s, DEFAULT_SLABS).unwrap();
        assert_eq!(t.nodes().len(), 3, "{:?}", t.nodes());
        assert_eq!(t.arcs().len(), 2);
        let atoms: Vec<f64> = t
            .nodes()
            .iter()
            .map(|n| n.atom)
            .filter(|&a| a > 0.0)
            .collect();
        assert_eq!(atoms.len(), 2);
        // bottom atom: cap s plus the flat half-collar
        assert!(
            atoms.iter().any(|&a| a > 0.2 - 1e-12 && a < 0.2 + 0.02),
            "{atoms:?}"
        );
        assert!((t.total_measure() - 1.5).abs() < 1e-9);
        for arc in t.arcs() {
            assert!(arc.table().windows(2).all(|w| w[1] >= w[0] - 1e-15));
        }
    }

    #[test]
    fn generic_field_measure_is_exact() {
        let s = ramp_sphere("sin(2*pi*θ)*sin(pi*h)*exp(h)", 48, 0.1, 0.7);
        let t = build_contour_tree(&s, DEFAULT_SLABS).unwrap();
        assert!((t.total_measure() - 1.4).abs() < 1e-9);
        assert_eq!(t.nodes().len(), t.arcs().len() + 1);
    }

    #[test]
    fn sublevel_area_endpoints() {
        let f = [0.0, 1.0, 3.0];
        assert_eq!(sublevel_area(2.0, f, 0.0), 0.0);
        assert_eq!(sublevel_area(2.0, f, 3.0), 2.0);
        // continuity at the middle value
        let below = sublevel_area(2.0, f, 1.0 - 1e-12);
        let above = sublevel_area(2.0, f, 1.0 + 1e-12);
        assert!((below - above).abs() < 1e-9);
        assert!((sublevel_area(2.0, f, 1.0) - 2.0 / 3.0).abs() < 1e-15);
    }
}
