//! Combinatorial maps: rotation system plus edge signature.
//!
//! Edge `e = (u, v)` owns darts `2e` (at `u`) and `2e + 1` (at `v`).
//! A flag is `2 * dart + side`; side 0 is the corner between the dart and its
//! rotation successor, side 1 the corner between its predecessor and it.
//! Corners are named by the dart that precedes them in the rotation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{parse_num, Graph};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CombinatorialMap {
    graph: Graph,
    rotation: Vec<Vec<usize>>,
    signature: Vec<i8>,
    next: Vec<usize>,
    prev: Vec<usize>,
}

/// A facial walk: the corners it passes through, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub id: usize,
    pub corners: Vec<usize>,
}

impl CombinatorialMap {
    pub fn new(graph: Graph, rotation: Vec<Vec<usize>>, signature: Vec<i8>) -> Result<Self> {
        let m = graph.m();
        if rotation.len() != graph.n() {
            return Err(Error::Malformed("one rotation per vertex required".into()));
        }
        if signature.len() != m || signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Malformed("signature must be +1/-1 per edge".into()));
        }
        let mut next = vec![usize::MAX; 2 * m];
        let mut prev = vec![usize::MAX; 2 * m];
        for (v, rot) in rotation.iter().enumerate() {
            for (i, &d) in rot.iter().enumerate() {
                if d >= 2 * m {
                    return Err(Error::Malformed(format!("dart {d} out of range")));
                }
                if next[d] != usize::MAX {
                    return Err(Error::Malformed(format!("dart {d} duplicated")));
                }
                let (a, b) = graph.edge(d / 2);
                if (if d % 2 == 0 { a } else { b }) != v {
                    return Err(Error::Malformed(format!("dart {d} not at its origin {v}")));
                }
                let nx = rot[(i + 1) % rot.len()];
                next[d] = nx;
                prev[nx] = d;
            }
        }
        if let Some(d) = next.iter().position(|&x| x == usize::MAX) {
            return Err(Error::Malformed(format!("dart {d} missing from rotations")));
        }
        Ok(CombinatorialMap { graph, rotation, signature, next, prev })
    }

    /// Builds a map by listing, per vertex, neighbor edge ids in cyclic order.
    pub fn from_edge_rotation(graph: Graph, rot: &[Vec<usize>], signature: Vec<i8>) -> Result<Self> {
        let mut darts = Vec::with_capacity(rot.len());
        for (v, es) in rot.iter().enumerate() {
            let mut used = BTreeSet::new();
            let mut r = Vec::new();
            for &e in es {
                let (a, b) = graph.edge(e);
                let d = if a == v && used.insert(2 * e) {
                    2 * e
                } else if b == v && used.insert(2 * e + 1) {
                    2 * e + 1
                } else {
                    return Err(Error::Malformed(format!("edge {e} not at vertex {v}")));
                };
                r.push(d);
            }
            darts.push(r);
        }
        CombinatorialMap::new(graph, darts, signature)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.graph.m()
    }

    pub fn darts(&self) -> usize {
        2 * self.graph.m()
    }

    #[inline]
    pub fn origin(&self, d: usize) -> usize {
        let (a, b) = self.graph.edge(d / 2);
        if d % 2 == 0 {
            a
        } else {
            b
        }
    }

    #[inline]
    pub fn next(&self, d: usize) -> usize {
        self.next[d]
    }

    #[inline]
    pub fn prev(&self, d: usize) -> usize {
        self.prev[d]
    }

    #[inline]
    pub fn sign(&self, e: usize) -> i8 {
        self.signature[e]
    }

    #[inline]
    pub fn alpha0(&self, f: usize) -> usize {
        let d = f / 2;
        let s = f % 2;
        if self.signature[d / 2] > 0 {
            2 * (d ^ 1) + (s ^ 1)
        } else {
            2 * (d ^ 1) + s
        }
    }

    #[inline]
    pub fn alpha1(&self, f: usize) -> usize {
        let d = f / 2;
        if f % 2 == 0 {
            2 * self.next[d] + 1
        } else {
            2 * self.prev[d]
        }
    }

    #[inline]
    pub fn alpha2(&self, f: usize) -> usize {
        f ^ 1
    }

    #[inline]
    pub fn corner_of_flag(&self, f: usize) -> usize {
        if f % 2 == 0 {
            f / 2
        } else {
            self.prev[f / 2]
        }
    }

    /// Facial walks sorted by least flag id.
    pub fn faces(&self) -> Vec<Face> {
        let nf = 4 * self.m();
        let mut seen = vec![false; nf];
        let mut out = Vec::new();
        for f in 0..nf {
            if seen[f] {
                continue;
            }
            let mut corners = Vec::new();
            let mut x = f;
            loop {
                seen[x] = true;
                let y = self.alpha0(x);
                seen[y] = true;
                corners.push(self.corner_of_flag(x));
                x = self.alpha1(y);
                if x == f {
                    break;
                }
            }
            out.push(Face { id: f, corners });
        }
        out
    }

    /// Index (into `faces()`) of the face containing each corner.
    pub fn corner_faces(&self) -> Vec<usize> {
        let mut cf = vec![usize::MAX; self.darts()];
        for (i, f) in self.faces().iter().enumerate() {
            for &c in &f.corners {
                cf[c] = i;
            }
        }
        cf
    }

    pub fn num_faces(&self) -> usize {
        self.faces().len()
    }

    /// Euler genus of a connected map.
    pub fn euler_genus(&self) -> Result<usize> {
        if !self.graph.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(self.total_euler_genus())
    }

    /// Sum of the Euler genera of the connected components.
    pub fn total_euler_genus(&self) -> usize {
        let comps = self.graph.components();
        let mut comp_of = vec![0; self.n()];
        for (i, c) in comps.iter().enumerate() {
            c.iter().for_each(|&v| comp_of[v] = i);
        }
        let mut v = vec![0i64; comps.len()];
        let mut e = vec![0i64; comps.len()];
        let mut f = vec![0i64; comps.len()];
        for (i, c) in comps.iter().enumerate() {
            v[i] = c.len() as i64;
        }
        for &(a, _) in self.graph.edges() {
            e[comp_of[a]] += 1;
        }
        for face in self.faces() {
            f[comp_of[self.origin(face.corners[0])]] += 1;
        }
        (0..comps.len())
            .map(|i| {
                let faces = if e[i] == 0 { 1 } else { f[i] };
                (2 - v[i] + e[i] - faces) as usize
            })
            .sum()
    }

    /// True when some switching makes every signature +1.
    pub fn is_orientable(&self) -> bool {
        let adj = self.graph.adjacency();
        let mut s = vec![0i8; self.n()];
        for r in 0..self.n() {
            if s[r] != 0 {
                continue;
            }
            s[r] = 1;
            let mut st = vec![r];
            while let Some(v) = st.pop() {
                for &(w, e) in &adj[v] {
                    let want = s[v] * self.signature[e];
                    if s[w] == 0 {
                        s[w] = want;
                        st.push(w);
                    } else if s[w] != want {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Switch at `v`: reverse its rotation and flip non-loop edge signs.
    pub fn switch(&self, v: usize) -> CombinatorialMap {
        let mut rot = self.rotation.clone();
        rot[v].reverse();
        let mut sig = self.signature.clone();
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            if (a == v) != (b == v) {
                sig[e] = -sig[e];
            }
        }
        CombinatorialMap::new(self.graph.clone(), rot, sig).expect("switching keeps validity")
    }

    /// Equivalent map with all BFS spanning-tree edges positive.
    pub fn normalized(&self) -> CombinatorialMap {
        let adj = self.graph.adjacency();
        let mut flip = vec![false; self.n()];
        let mut seen = vec![false; self.n()];
        let mut sig = self.signature.clone();
        for r in 0..self.n() {
            if seen[r] {
                continue;
            }
            seen[r] = true;
            let mut q = std::collections::VecDeque::from([r]);
            while let Some(v) = q.pop_front() {
                for &(w, e) in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        flip[w] = (sig[e] < 0) != flip[v];
                        q.push_back(w);
                    }
                }
            }
        }
        let mut rot = self.rotation.clone();
        for v in 0..self.n() {
            if flip[v] {
                rot[v].reverse();
            }
        }
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            if flip[a] != flip[b] {
                sig[e] = -sig[e];
            }
        }
        CombinatorialMap::new(self.graph.clone(), rot, sig).expect("switching keeps validity")
    }

    pub fn mirror(&self) -> CombinatorialMap {
        let rot = self.rotation.iter().map(|r| r.iter().rev().copied().collect()).collect();
        CombinatorialMap::new(self.graph.clone(), rot, self.signature.clone()).expect("mirror is valid")
    }

    /// Renames vertices by `perm` (old -> new); darts keep their ids.
    pub fn relabel(&self, perm: &[usize]) -> CombinatorialMap {
        let g = self.graph.relabel(perm);
        let mut rot = vec![Vec::new(); self.n()];
        for v in 0..self.n() {
            rot[perm[v]] = self.rotation[v].clone();
        }
        CombinatorialMap::new(g, rot, self.signature.clone()).expect("relabel is valid")
    }

    /// Renames vertices by `perm` and edges by `eperm`; `flip[e]` swaps the
    /// two darts of edge `e`.
    pub fn relabel_full(&self, perm: &[usize], eperm: &[usize], flip: &[bool]) -> CombinatorialMap {
        let mut g = Graph::new(self.n());
        let mut edges = vec![(0, 0); self.m()];
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            edges[eperm[e]] = if flip[e] { (perm[b], perm[a]) } else { (perm[a], perm[b]) };
        }
        for &(a, b) in &edges {
            g.add_edge(a, b);
        }
        for v in 0..self.n() {
            g.set_mark(perm[v], self.graph.mark(v));
        }
        let dmap = |d: usize| 2 * eperm[d / 2] + ((d % 2) ^ flip[d / 2] as usize);
        let mut rot = vec![Vec::new(); self.n()];
        for v in 0..self.n() {
            rot[perm[v]] = self.rotation[v].iter().map(|&d| dmap(d)).collect();
        }
        let mut sig = vec![1; self.m()];
        for e in 0..self.m() {
            sig[eperm[e]] = self.signature[e];
        }
        CombinatorialMap::new(g, rot, sig).expect("relabel is valid")
    }

    /// Equal graphs, signatures and rotations up to cyclic shift.
    pub fn same_rotations(&self, other: &CombinatorialMap) -> bool {
        self.graph == other.graph
            && self.signature == other.signature
            && (0..self.darts()).all(|d| self.next[d] == other.next[d])
    }

    pub fn with_marks(&self, marks: &[u64]) -> CombinatorialMap {
        let mut c = self.clone();
        for (v, &m) in marks.iter().enumerate() {
            c.graph.set_mark(v, m);
        }
        c
    }

    /// Sub-map on the listed edges (all vertices kept). Returns the map and,
    /// for each new edge, its old id.
    pub fn restrict(&self, keep: &[usize]) -> (CombinatorialMap, Vec<usize>) {
        let mut new_id = vec![usize::MAX; self.m()];
        let mut g = Graph::new(self.n());
        for v in 0..self.n() {
            g.set_mark(v, self.graph.mark(v));
        }
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for (i, &e) in keep.iter().enumerate() {
            new_id[e] = i;
            let (a, b) = self.graph.edge(e);
            g.add_edge(a, b);
        }
        let rot = self
            .rotation
            .iter()
            .map(|r| {
                r.iter()
                    .filter(|&&d| new_id[d / 2] != usize::MAX)
                    .map(|&d| 2 * new_id[d / 2] + d % 2)
                    .collect()
            })
            .collect();
        let sig = keep.iter().map(|&e| self.signature[e]).collect();
        (CombinatorialMap::new(g, rot, sig).expect("restriction is valid"), keep)
    }

    /// Bipartite vertex/face incidence graph, one edge per corner. Face `i`
    /// (index into `faces()`) is node `n + i`; `corner[e]` is edge `e`'s corner.
    pub fn radial_graph(&self) -> (Graph, Vec<usize>) {
        let faces = self.faces();
        let mut g = Graph::new(self.n() + faces.len());
        let mut corner = Vec::new();
        for (i, f) in faces.iter().enumerate() {
            for &c in &f.corners {
                g.add_edge(self.origin(c), self.n() + i);
                corner.push(c);
            }
        }
        (g, corner)
    }

    pub fn parse(text: &str) -> Result<CombinatorialMap> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "map" {
            return Err(Error::Parse { line: ln, msg: "expected `map <n> <m>`".into() });
        }
        let n = parse_num(h[1], ln)?;
        let m = parse_num(h[2], ln)?;
        let mut rot: Vec<Option<Vec<usize>>> = vec![None; n];
        let mut sig: Vec<Option<i8>> = vec![None; m];
        let mut marks = vec![0u64; n];
        for (ln, line) in lines {
            let (head, rest) = match line.split_once(':') {
                Some((a, b)) => (a.trim(), b.trim()),
                None => (line, ""),
            };
            let t: Vec<&str> = head.split_whitespace().collect();
            let err = |msg: &str| Error::Parse { line: ln, msg: msg.into() };
            match t.first().copied() {
                Some("rot") if t.len() == 2 => {
                    let v = parse_num(t[1], ln)?;
                    if v >= n || rot[v].is_some() {
                        return Err(err("bad or repeated rotation vertex"));
                    }
                    let ds = rest.split_whitespace().map(|x| parse_num(x, ln)).collect::<Result<Vec<_>>>()?;
                    if ds.iter().any(|&d| d >= 2 * m) {
                        return Err(err("dart out of range"));
                    }
                    rot[v] = Some(ds);
                }
                Some("edge") if t.len() == 2 => {
                    let e = parse_num(t[1], ln)?;
                    let r: Vec<&str> = rest.split_whitespace().collect();
                    if e >= m || r.len() != 3 {
                        return Err(err("expected `edge <e>: dA dB <+|->`"));
                    }
                    if parse_num(r[0], ln)? != 2 * e || parse_num(r[1], ln)? != 2 * e + 1 {
                        return Err(err("edge darts must be 2e and 2e+1"));
                    }
                    sig[e] = Some(match r[2] {
                        "+" => 1,
                        "-" => -1,
                        _ => return Err(err("signature must be + or -")),
                    });
                }
                Some("mark") if t.len() == 3 => {
                    let v = parse_num(t[1], ln)?;
                    if v >= n {
                        return Err(err("vertex out of range"));
                    }
                    marks[v] = parse_num(t[2], ln)? as u64;
                }
                _ => return Err(err("unrecognized line")),
            }
        }
        let mut origin = vec![usize::MAX; 2 * m];
        for (v, r) in rot.iter().enumerate() {
            for &d in r.as_deref().unwrap_or(&[]) {
                origin[d] = v;
            }
        }
        if origin.contains(&usize::MAX) {
            return Err(Error::Parse { line: ln, msg: "some dart is in no rotation".into() });
        }
        let mut g = Graph::new(n);
        for e in 0..m {
            g.add_edge(origin[2 * e], origin[2 * e + 1]);
        }
        for (v, &c) in marks.iter().enumerate() {
            g.set_mark(v, c);
        }
        let sig = sig.into_iter().map(|s| s.unwrap_or(1)).collect();
        let rot = rot.into_iter().map(|r| r.unwrap_or_default()).collect();
        CombinatorialMap::new(g, rot, sig)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("map {} {}\n", self.n(), self.m());
        for (v, r) in self.rotation.iter().enumerate() {
            let _ = write!(s, "rot {v}:");
            for d in r {
                let _ = write!(s, " {d}");
            }
            s.push('\n');
        }
        for e in 0..self.m() {
            let _ = writeln!(s, "edge {e}: {} {} {}", 2 * e, 2 * e + 1, if self.signature[e] > 0 { '+' } else { '-' });
        }
        for v in 0..self.n() {
            if self.graph.mark(v) != 0 {
                let _ = writeln!(s, "mark {v} {}", self.graph.mark(v));
            }
        }
        s
    }
}

/// One vertex of a noose: entered through corner `enter`, left through `leave`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hit {
    pub vertex: usize,
    pub enter: usize,
    pub leave: usize,
}

/// A closed curve meeting the map only in vertices. Segment `i` runs inside
/// the face holding corner `hits[i].leave` and `hits[i + 1].enter`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Noose {
    pub hits: Vec<Hit>,
}

impl Noose {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.vertex).collect()
    }

    /// Face ids (least flag) of the segments.
    pub fn faces(&self, m: &CombinatorialMap) -> Vec<usize> {
        let faces = m.faces();
        let cf = m.corner_faces();
        self.hits.iter().map(|h| faces[cf[h.leave]].id).collect()
    }

    pub fn to_text(&self, m: &CombinatorialMap) -> String {
        let mut s = String::from("noose");
        for (h, f) in self.hits.iter().zip(self.faces(m)) {
            let _ = write!(s, " {} {}", h.vertex, f);
        }
        s
    }

    /// Parses `noose v0 f0 v1 f1 ...`; when a vertex meets a face at several
    /// corners the least dart id consistent with the curve is used.
    pub fn parse(m: &CombinatorialMap, text: &str) -> Result<Noose> {
        let err = |msg: &str| Error::Parse { line: 1, msg: msg.into() };
        let t: Vec<&str> = text.split_whitespace().collect();
        if t.first() != Some(&"noose") || t.len() < 3 || t.len() % 2 == 0 {
            return Err(err("expected `noose v0 f0 v1 f1 ...`"));
        }
        let nums = t[1..].iter().map(|x| parse_num(x, 1)).collect::<Result<Vec<_>>>()?;
        let faces = m.faces();
        let cf = m.corner_faces();
        let fidx = |id: usize| faces.iter().position(|f| f.id == id);
        let k = nums.len() / 2;
        let mut hits = Vec::new();
        for i in 0..k {
            let v = nums[2 * i];
            let fin = fidx(nums[(2 * i + 2 * k - 1) % (2 * k)]).ok_or_else(|| err("unknown face"))?;
            let fout = fidx(nums[2 * i + 1]).ok_or_else(|| err("unknown face"))?;
            if v >= m.n() {
                return Err(err("vertex out of range"));
            }
            let at = |fi: usize| -> Vec<usize> {
                m.rotation(v).iter().copied().filter(|&c| cf[c] == fi).collect::<BTreeSet<_>>().into_iter().collect()
            };
            let (ins, outs) = (at(fin), at(fout));
            let pick = ins
                .iter()
                .flat_map(|&a| outs.iter().map(move |&b| (a, b)))
                .find(|&(a, b)| a != b)
                .ok_or_else(|| err("vertex not incident to both faces at distinct corners"))?;
            hits.push(Hit { vertex: v, enter: pick.0, leave: pick.1 });
        }
        let n = Noose { hits };
        validate_noose(m, &n)?;
        Ok(n)
    }
}

fn position_in_face(m: &CombinatorialMap) -> Vec<usize> {
    let mut pos = vec![0; m.darts()];
    for f in m.faces() {
        for (i, &c) in f.corners.iter().enumerate() {
            pos[c] = i;
        }
    }
    pos
}

pub fn validate_noose(m: &CombinatorialMap, c: &Noose) -> Result<()> {
    let bad = |s: &str| Err(Error::Invalid(format!("noose: {s}")));
    if c.hits.is_empty() {
        return bad("empty");
    }
    let verts: BTreeSet<usize> = c.hits.iter().map(|h| h.vertex).collect();
    if verts.len() != c.hits.len() {
        return bad("repeated vertex");
    }
    let cf = m.corner_faces();
    for h in &c.hits {
        if h.enter >= m.darts() || h.leave >= m.darts() {
            return bad("corner out of range");
        }
        if m.origin(h.enter) != h.vertex || m.origin(h.leave) != h.vertex || h.enter == h.leave {
            return bad("corners must be distinct corners of the hit vertex");
        }
    }
    let k = c.hits.len();
    let pos = position_in_face(m);
    let mut chords: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..k {
        let a = c.hits[i].leave;
        let b = c.hits[(i + 1) % k].enter;
        if cf[a] != cf[b] {
            return bad("consecutive corners not on a common face");
        }
        chords.push((cf[a], pos[a], pos[b]));
    }
    for i in 0..k {
        for j in i + 1..k {
            let (f1, a1, b1) = chords[i];
            let (f2, a2, b2) = chords[j];
            if f1 != f2 {
                continue;
            }
            let (lo, hi) = (a1.min(b1), a1.max(b1));
            let inside = |x: usize| x > lo && x < hi;
            if inside(a2) != inside(b2) {
                return bad("segments cross inside a face");
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct CutResult {
    pub map: CombinatorialMap,
    /// `(original vertex, copy A, copy B)`; copy A keeps the original id.
    pub split_pairs: Vec<(usize, usize, usize)>,
    pub genus_delta: i64,
    /// Per hit, the new corners at copy A and copy B where the curve ran.
    pub wrap_corners: Vec<(usize, usize)>,
}

impl CutResult {
    /// Re-identifies every copy pair, undoing the cut.
    pub fn reglue(&self) -> CombinatorialMap {
        let n0 = self.map.n() - self.split_pairs.len();
        let mut rot: Vec<Vec<usize>> = self.map.rotations()[..n0].to_vec();
        for &(v, a, b) in &self.split_pairs {
            let mut r = self.map.rotation(a).to_vec();
            r.extend_from_slice(self.map.rotation(b));
            rot[v] = r;
        }
        let mut g = Graph::new(n0);
        let orig = |x: usize| self.split_pairs.iter().find(|p| p.2 == x).map_or(x, |p| p.0);
        for &(u, v) in self.map.graph().edges() {
            g.add_edge(orig(u), orig(v));
        }
        for v in 0..n0 {
            g.set_mark(v, self.map.graph().mark(v));
        }
        CombinatorialMap::new(g, rot, self.map.signature().to_vec()).expect("reglue is valid")
    }
}

/// Splits every hit vertex into the two rotation arcs on either side of the
/// curve. Copy B of hit `i` gets id `n + i` and the arc after `leave`.
pub fn cut_along(m: &CombinatorialMap, c: &Noose) -> Result<CutResult> {
    validate_noose(m, c)?;
    let n = m.n();
    let mut g = m.graph().clone();
    let mut rot = m.rotations().to_vec();
    let mut pairs = Vec::new();
    let mut wraps = Vec::new();
    for (i, h) in c.hits.iter().enumerate() {
        let (a, b) = (h.enter, h.leave);
        let mut arc1 = Vec::new();
        let mut d = m.next(a);
        loop {
            arc1.push(d);
            if d == b {
                break;
            }
            d = m.next(d);
        }
        let mut arc2 = Vec::new();
        let mut d = m.next(b);
        loop {
            arc2.push(d);
            if d == a {
                break;
            }
            d = m.next(d);
        }
        let copy = g.add_vertex();
        debug_assert_eq!(copy, n + i);
        g.set_mark(copy, g.mark(h.vertex));
        for &d in &arc2 {
            let (x, y) = g.edge(d / 2);
            if d % 2 == 0 {
                g.set_edge(d / 2, copy, y);
            } else {
                g.set_edge(d / 2, x, copy);
            }
        }
        rot[h.vertex] = arc1;
        rot.push(arc2);
        pairs.push((h.vertex, h.vertex, copy));
        wraps.push((b, a));
    }
    let map = CombinatorialMap::new(g, rot, m.signature().to_vec())?;
    let before = m.total_euler_genus() as i64;
    let after = map.total_euler_genus() as i64;
    Ok(CutResult { map, split_pairs: pairs, genus_delta: after - before, wrap_corners: wraps })
}

/// Faces of the cut map touched by the curve's new corners: two for a
/// two-sided curve, one for a one-sided curve.
pub fn boundary_faces(cut: &CutResult) -> Vec<usize> {
    let cf = cut.map.corner_faces();
    let mut fs: Vec<usize> = cut.wrap_corners.iter().flat_map(|&(a, b)| [cf[a], cf[b]]).collect();
    fs.sort_unstable();
    fs.dedup();
    fs
}

pub fn is_orientation_preserving(m: &CombinatorialMap, c: &Noose) -> Result<bool> {
    let cut = cut_along(m, c)?;
    Ok(boundary_faces(&cut).len() == 2)
}

pub fn is_contractible(m: &CombinatorialMap, c: &Noose) -> Result<bool> {
    let cut = cut_along(m, c)?;
    Ok(cut_is_contractible(&cut))
}

/// A cut bounds a disk when it separates and one side is a sphere.
pub fn cut_is_contractible(cut: &CutResult) -> bool {
    let comps = cut.map.graph().components();
    if comps.len() < 2 {
        return false;
    }
    comps.iter().any(|comp| {
        let keep: Vec<usize> = (0..cut.map.m()).filter(|&e| comp.contains(&cut.map.graph().edge(e).0)).collect();
        // vertices outside the component become isolated and add zero
        cut.map.restrict(&keep).0.total_euler_genus() == 0
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn k4_planar() -> CombinatorialMap {
        // 0 center-ish; faces 012, 023, 031, 132
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (2, 3), (3, 1)]);
        let rot = vec![vec![0, 1, 2], vec![0, 5, 3], vec![1, 3, 4], vec![2, 4, 5]];
        CombinatorialMap::from_edge_rotation(g, &rot, vec![1; 6]).unwrap()
    }

    pub use crate::fixtures::{one_loop, torus_grid};

    #[test]
    fn k4_faces_and_genus() {
        let m = k4_planar();
        let f = m.faces();
        assert_eq!(f.len(), 4);
        assert!(f.iter().all(|x| x.corners.len() == 3));
        assert_eq!(m.euler_genus().unwrap(), 0);
        let total: usize = f.iter().map(|x| x.corners.len()).sum();
        assert_eq!(total, 2 * m.m());
        assert!(m.is_orientable());
    }

    #[test]
    fn one_loop_projective() {
        let m = one_loop();
        let f = m.faces();
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].corners.len(), 2);
        assert_eq!(m.euler_genus().unwrap(), 1);
        assert!(!m.is_orientable());
    }

    #[test]
    fn torus_grid_genus() {
        let m = torus_grid(3, 3);
        assert_eq!(m.num_faces(), 9);
        assert_eq!(m.euler_genus().unwrap(), 2);
    }

    #[test]
    fn radial_graph_counts() {
        let (r, _) = k4_planar().radial_graph();
        assert_eq!((r.n(), r.m()), (8, 12));
        let (r, _) = one_loop().radial_graph();
        assert_eq!((r.n(), r.m()), (2, 2));
        let c3 = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let m = CombinatorialMap::from_edge_rotation(c3, &[vec![0, 2], vec![1, 0], vec![2, 1]], vec![1; 3]).unwrap();
        let (r, _) = m.radial_graph();
        assert_eq!((r.n(), r.m()), (5, 6));
    }

    #[test]
    fn loop_cut_is_one_sided_and_planarizes() {
        let m = one_loop();
        let c = Noose { hits: vec![Hit { vertex: 0, enter: 0, leave: 1 }] };
        let cut = cut_along(&m, &c).unwrap();
        assert_eq!(cut.genus_delta, -1);
        assert_eq!(cut.map.total_euler_genus(), 0);
        assert!(!is_orientation_preserving(&m, &c).unwrap());
        assert!(!is_contractible(&m, &c).unwrap());
        assert!(cut.reglue().same_rotations(&m));
    }

    #[test]
    fn bowtie_vertex_noose_contractible() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 0), (0, 3), (3, 4), (4, 0)]);
        let rot = vec![vec![0, 2, 3, 5], vec![0, 1], vec![1, 2], vec![3, 4], vec![4, 5]];
        let m = CombinatorialMap::from_edge_rotation(g, &rot, vec![1; 6]).unwrap();
        assert_eq!(m.euler_genus().unwrap(), 0);
        // the outer face passes vertex 0 twice
        let cf = m.corner_faces();
        let at0: Vec<usize> = m.rotation(0).to_vec();
        let (a, b) = at0
            .iter()
            .flat_map(|&a| at0.iter().map(move |&b| (a, b)))
            .find(|&(a, b)| a != b && cf[a] == cf[b])
            .unwrap();
        let c = Noose { hits: vec![Hit { vertex: 0, enter: a, leave: b }] };
        let cut = cut_along(&m, &c).unwrap();
        assert_eq!(cut.genus_delta, 0);
        assert_eq!(cut.map.n(), 6);
        assert!(is_contractible(&m, &c).unwrap());
        assert!(is_orientation_preserving(&m, &c).unwrap());
    }

    #[test]
    fn crossing_segments_rejected() {
        let m = torus_grid(3, 3);
        let c = Noose { hits: vec![Hit { vertex: 0, enter: m.rotation(0)[0], leave: m.rotation(0)[0] }] };
        assert!(cut_along(&m, &c).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = torus_grid(3, 3).with_marks(&[0, 4, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(CombinatorialMap::parse(&m.to_text()).unwrap(), m);
        let p = one_loop();
        assert_eq!(CombinatorialMap::parse(&p.to_text()).unwrap(), p);
        assert!(CombinatorialMap::parse("map 1 1\nrot 0: 0\n").is_err());
    }

    #[test]
    fn normalization_and_switching_keep_faces() {
        let m = torus_grid(3, 3).switch(4).switch(2);
        assert_ne!(m.signature(), torus_grid(3, 3).signature());
        let n = m.normalized();
        assert_eq!(n.num_faces(), 9);
        assert!(n.signature().iter().all(|&s| s == 1));
        assert_eq!(n.euler_genus().unwrap(), 2);
    }
}
