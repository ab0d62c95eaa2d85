//! Face-width, short non-contractible nooses, grouping of nooses by the
//! branch vertices they pass, and bridge sides for two-vertex cuts.

use std::collections::{BTreeMap, BTreeSet};

use crate::budget::Budget;
use crate::embed::{extend_embedding, EmbeddingQuery};
use crate::error::{invalid, Result};
use crate::graph::{bridges_of, Graph, Skeleton};
use crate::map::{cut_along, cut_is_contractible, validate_noose, CombinatorialMap, CutResult, Hit, Noose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FaceWidth {
    Finite(usize),
    /// Genus 0: no curve is non-contractible.
    Unbounded,
}

impl std::fmt::Display for FaceWidth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FaceWidth::Finite(k) => write!(f, "{k}"),
            FaceWidth::Unbounded => write!(f, "unbounded"),
        }
    }
}

struct Walk<'a> {
    m: &'a CombinatorialMap,
    cf: Vec<usize>,
    face_corners: Vec<Vec<usize>>,
    k: usize,
    used: Vec<bool>,
    hits: Vec<Hit>,
}

impl<'a> Walk<'a> {
    fn new(m: &'a CombinatorialMap, k: usize) -> Self {
        let cf = m.corner_faces();
        let mut face_corners = vec![Vec::new(); m.num_faces()];
        for c in 0..m.darts() {
            face_corners[cf[c]].push(c);
        }
        Walk { m, cf, face_corners, k, used: vec![false; m.n()], hits: Vec::new() }
    }

    /// Calls `f` on every valid noose of length `k` once per traversal
    /// direction pair; stops when `f` returns true.
    fn run(&mut self, f: &mut dyn FnMut(&Noose) -> bool) -> bool {
        for v0 in 0..self.m.n() {
            self.used[v0] = true;
            for &c0 in self.m.rotation(v0) {
                if self.extend(v0, c0, f) {
                    return true;
                }
            }
            self.used[v0] = false;
        }
        false
    }

    fn extend(&mut self, v: usize, enter: usize, f: &mut dyn FnMut(&Noose) -> bool) -> bool {
        let v0 = self.hits.first().map_or(v, |h| h.vertex);
        let last = self.hits.len() + 1 == self.k;
        for &leave in self.m.rotation(v) {
            if leave == enter {
                continue;
            }
            let face = self.cf[leave];
            self.hits.push(Hit { vertex: v, enter, leave });
            if last {
                let c0 = self.hits[0].enter;
                if self.cf[c0] == face && self.canonical_direction() {
                    let n = Noose { hits: self.hits.clone() };
                    if validate_noose(self.m, &n).is_ok() && f(&n) {
                        self.hits.pop();
                        return true;
                    }
                }
            } else {
                for i in 0..self.face_corners[face].len() {
                    let c = self.face_corners[face][i];
                    let w = self.m.origin(c);
                    if w <= v0 || self.used[w] {
                        continue;
                    }
                    self.used[w] = true;
                    let stop = self.extend(w, c, f);
                    self.used[w] = false;
                    if stop {
                        self.hits.pop();
                        return true;
                    }
                }
            }
            self.hits.pop();
        }
        false
    }

    fn canonical_direction(&self) -> bool {
        let h = &self.hits;
        if h.len() <= 2 {
            h[0].enter < h[0].leave
        } else {
            h[1].vertex < h[h.len() - 1].vertex
        }
    }
}

/// Visits every noose of length `k` (one per curve, up to rotation and
/// reversal) in a fixed order; stops early when `f` returns true.
pub fn for_each_noose(m: &CombinatorialMap, k: usize, f: &mut dyn FnMut(&Noose) -> bool) {
    if k == 0 || k > m.n() {
        return;
    }
    Walk::new(m, k).run(f);
}

pub fn is_noncontractible(m: &CombinatorialMap, c: &Noose) -> bool {
    cut_along(m, c).map(|cut| !cut_is_contractible(&cut)).unwrap_or(false)
}

/// Least length of a non-contractible noose, by increasing length.
pub fn face_width(m: &CombinatorialMap) -> FaceWidth {
    if m.total_euler_genus() == 0 {
        return FaceWidth::Unbounded;
    }
    for k in 1..=m.n() {
        let mut found = false;
        for_each_noose(m, k, &mut |c| {
            found = is_noncontractible(m, c);
            found
        });
        if found {
            return FaceWidth::Finite(k);
        }
    }
    unreachable!("a map of positive genus has a non-contractible noose")
}

/// All non-contractible nooses of length exactly `l`, in search order.
pub fn enumerate_nooses(m: &CombinatorialMap, l: usize) -> Vec<Noose> {
    let mut out = Vec::new();
    if m.total_euler_genus() == 0 {
        return out;
    }
    for_each_noose(m, l, &mut |c| {
        if is_noncontractible(m, c) {
            out.push(c.clone());
        }
        false
    });
    out
}

/// Nooses of one length sharing a bucket key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NooseClass {
    pub representative: Noose,
    /// Branch vertex each hit slides to, sorted.
    pub branch_vertex_signature: Vec<usize>,
    pub orientation_preserving: bool,
    /// `(genus change, components, orientable)` after cutting.
    pub cut_signature: (i64, usize, bool),
    pub members: Vec<Noose>,
}

fn cut_signature(cut: &CutResult) -> (i64, usize, bool) {
    (cut.genus_delta, cut.map.graph().components().len(), cut.map.is_orientable())
}

/// Buckets the non-contractible nooses of length `l` by the branch
/// vertices of the map's graph they can slide to, orientation character
/// and cut signature. Buckets come sorted by key.
pub fn homotopy_buckets(m: &CombinatorialMap, l: usize) -> Result<Vec<NooseClass>> {
    if !(1..=2).contains(&l) {
        return invalid("bucket length must be 1 or 2");
    }
    if m.total_euler_genus() == 0 {
        return Ok(Vec::new());
    }
    if l == 2 && !enumerate_nooses(m, 1).is_empty() {
        return invalid("two-vertex buckets need face-width at least 2");
    }
    let g = m.graph();
    let sk = Skeleton::from_edges(g, &(0..g.m()).collect::<Vec<_>>());
    let mut slide: Vec<usize> = (0..g.n()).collect();
    for p in &sk.branches {
        let end = if sk.branch_vertices.binary_search(&p[0]).is_ok() { p[0].min(*p.last().unwrap()) } else { p[0] };
        for &v in &p[1..p.len() - 1] {
            slide[v] = end;
        }
    }
    let mut by: BTreeMap<(Vec<usize>, bool, (i64, usize, bool)), Vec<Noose>> = BTreeMap::new();
    for nz in enumerate_nooses(m, l) {
        let cut = cut_along(m, &nz)?;
        let mut sig: Vec<usize> = nz.hits.iter().map(|h| slide[h.vertex]).collect();
        sig.sort_unstable();
        let two_sided = crate::map::boundary_faces(&cut).len() == 2;
        by.entry((sig, two_sided, cut_signature(&cut))).or_default().push(nz);
    }
    Ok(by
        .into_iter()
        .map(|((sig, op, cs), members)| NooseClass {
            representative: members[0].clone(),
            branch_vertex_signature: sig,
            orientation_preserving: op,
            cut_signature: cs,
            members,
        })
        .collect())
}

/// Placement of the bridges that touch two branches shared by two faces.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SideAssignment {
    /// Indices into `bridges_of` placed in the first face.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Per inner branch vertex, the darts of non-skeleton edges going to
    /// the first face and the rest.
    pub split_arcs: Vec<(usize, Vec<usize>, Vec<usize>)>,
}

/// Vertices with a corner in each face of `fm`.
fn face_vertices(fm: &CombinatorialMap) -> Vec<BTreeSet<usize>> {
    let cf = fm.corner_faces();
    let mut out = vec![BTreeSet::new(); fm.num_faces()];
    for d in 0..fm.darts() {
        out[cf[d]].insert(fm.origin(d));
    }
    out
}

fn check_faces(sk: &Skeleton, fm: &CombinatorialMap, w: [usize; 2], r: [usize; 2]) -> Result<Vec<BTreeSet<usize>>> {
    let fv = face_vertices(fm);
    if w[0] == w[1] || w.iter().any(|&f| f >= fv.len()) {
        return invalid("faces must be two distinct faces of the skeleton map");
    }
    if r.iter().any(|&b| b >= sk.branches.len()) {
        return invalid("unknown branch");
    }
    for &b in &r {
        if !sk.branches[b].iter().all(|v| fv[w[0]].contains(v) && fv[w[1]].contains(v)) {
            return invalid("branch is not on both faces");
        }
    }
    Ok(fv)
}

/// Forced placement of every bridge with an attachment on `R1 ∪ R2` and
/// one elsewhere: a bridge fits a face only if all its attachments lie on
/// that face. `None` when some bridge fits neither. A bridge fitting both
/// goes to the first face. `fm` is a map of the skeleton whose edge `i` is
/// `sk.edges[i]`, on the vertex ids of `g`.
pub fn assign_bridge_sides(
    g: &Graph,
    sk: &Skeleton,
    fm: &CombinatorialMap,
    w: [usize; 2],
    r: [usize; 2],
) -> Result<Option<SideAssignment>> {
    let fv = check_faces(sk, fm, w, r)?;
    let bridges = bridges_of(g, sk)?;
    if bridges.iter().any(|b| !b.stable) {
        return invalid("bridges must be stable");
    }
    let on_r: BTreeSet<usize> = r.iter().flat_map(|&b| sk.branches[b].iter().copied()).collect();
    let mut out = SideAssignment::default();
    for (i, b) in bridges.iter().enumerate() {
        let touches = b.attachments.iter().any(|a| on_r.contains(a));
        let leaves = b.attachments.iter().any(|a| !on_r.contains(a));
        if !(touches && leaves) {
            continue;
        }
        if b.attachments.iter().all(|a| fv[w[0]].contains(a)) {
            out.left.push(i);
        } else if b.attachments.iter().all(|a| fv[w[1]].contains(a)) {
            out.right.push(i);
        } else {
            return Ok(None);
        }
    }
    let left_edges: BTreeSet<usize> = out.left.iter().flat_map(|&i| bridges[i].edges.iter().copied()).collect();
    let in_sk: BTreeSet<usize> = sk.edges.iter().copied().collect();
    let mut inner: BTreeSet<usize> = BTreeSet::new();
    for &b in &r {
        let p = &sk.branches[b];
        inner.extend(p[1..p.len() - 1].iter().copied());
    }
    for v in inner {
        let (mut l, mut rt) = (Vec::new(), Vec::new());
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if in_sk.contains(&e) {
                continue;
            }
            for (end, d) in [(a, 2 * e), (b, 2 * e + 1)] {
                if end == v {
                    if left_edges.contains(&e) {
                        l.push(d);
                    } else {
                        rt.push(d);
                    }
                }
            }
        }
        out.split_arcs.push((v, l, rt));
    }
    Ok(Some(out))
}

/// Inserts a path `u - x - v` through the face holding corners `cu` and
/// `cv`, keeping the Euler genus. `x` is a new vertex.
fn add_path_in_face(m: &CombinatorialMap, cu: usize, cv: usize) -> Option<CombinatorialMap> {
    let (u, v) = (m.origin(cu), m.origin(cv));
    let mut g = m.graph().clone();
    let x = g.add_vertex();
    let e1 = g.add_edge(u, x);
    let e2 = g.add_edge(x, v);
    let mut rot = m.rotations().to_vec();
    let put = |rot: &mut Vec<Vec<usize>>, at: usize, after: usize, d: usize| {
        let i = rot[at].iter().position(|&y| y == after).unwrap();
        rot[at].insert(i + 1, d);
    };
    put(&mut rot, u, cu, 2 * e1);
    rot.push(vec![2 * e1 + 1, 2 * e2]);
    put(&mut rot, v, cv, 2 * e2 + 1);
    let genus = m.total_euler_genus();
    [1i8, -1].into_iter().find_map(|s| {
        let mut sig = m.signature().to_vec();
        sig.push(1);
        sig.push(s);
        let out = CombinatorialMap::new(g.clone(), rot.clone(), sig).ok()?;
        (out.total_euler_genus() == genus).then_some(out)
    })
}

/// Least pair `(u, v)`, `u` on `R1` and `v` on `R2`, such that a
/// non-contractible noose runs `u -> W1 -> v -> W2 -> u` in the skeleton
/// map and the whole graph embeds around it at the same genus. The second
/// condition is tested by extending the skeleton map with two paths
/// `u - x1 - v` in `W1` and `u - x2 - v` in `W2`.
pub fn candidate_cut_vertices(
    g: &Graph,
    sk: &Skeleton,
    fm: &CombinatorialMap,
    w: [usize; 2],
    r: [usize; 2],
    budget: &Budget,
) -> Result<Option<(usize, usize)>> {
    if assign_bridge_sides(g, sk, fm, w, r)?.is_none() {
        return Ok(None);
    }
    let cf = fm.corner_faces();
    let corners = |v: usize, f: usize| fm.rotation(v).iter().copied().filter(|&d| cf[d] == f).collect::<Vec<_>>();
    let sorted = |b: usize| {
        let mut vs = sk.branches[b].clone();
        vs.sort_unstable();
        vs.dedup();
        vs
    };
    let genus = fm.total_euler_genus();
    let mut host = g.clone();
    let (x1, x2) = (host.add_vertex(), host.add_vertex());
    for u in sorted(r[0]) {
        for v in sorted(r[1]) {
            if u == v {
                continue;
            }
            let mut h = host.clone();
            h.add_edge(u, x1);
            h.add_edge(x1, v);
            h.add_edge(u, x2);
            h.add_edge(x2, v);
            for &cu1 in &corners(u, w[0]) {
                for &cv1 in &corners(v, w[0]) {
                    for &cu2 in &corners(u, w[1]) {
                        for &cv2 in &corners(v, w[1]) {
                            let nz = Noose {
                                hits: vec![
                                    Hit { vertex: u, enter: cu2, leave: cu1 },
                                    Hit { vertex: v, enter: cv1, leave: cv2 },
                                ],
                            };
                            if validate_noose(fm, &nz).is_err() || !is_noncontractible(fm, &nz) {
                                continue;
                            }
                            let Some(a) = add_path_in_face(fm, cu1, cv1) else { continue };
                            let Some(b) = add_path_in_face(&a, cu2, cv2) else { continue };
                            let mut q = EmbeddingQuery::new(&h, genus);
                            q.fixed = Some(&b);
                            if extend_embedding(&q, budget)?.is_some() {
                                return Ok(Some((u, v)));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}
