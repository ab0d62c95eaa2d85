//! The isomorphism engine.
//!
//! Every object gets a canonical vertex order. Its code is the full
//! encoding of the object under that order (marks, then the sorted edge
//! list with dart colors), so equal codes mean isomorphic objects and the
//! two orders give the bijection. Orders are chosen as the least encoding
//! over a candidate set that commutes with relabeling:
//!
//! * disconnected graphs: components sorted by code;
//! * block tree, then triconnected tree, rooted at the center, child codes
//!   passed down as vertex marks and dart colors;
//! * planar torsos: the colored map canon of their unique embedding;
//! * non-planar 3-connected torsos: all embeddings of least Euler genus,
//!   routed by the largest face-width found. Width three or more uses the
//!   map canon directly; width two cuts along every two-vertex noose and
//!   recurses on the two sides of the cylinder analysis; width one splits
//!   the noose vertex and recurses.
//!
//! Invariant keys prune candidates before the expensive recursion; a key
//! only has to be invariant, never injective.

use std::cell::{Cell, RefCell};
use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use crate::budget::Budget;
use crate::canon::{canonical_form, CanonicalCode, Mode};
use crate::decomposition::{
    circular_chain, spqr_path_cylinders, tree_centers, triconnected_tree, BagKind, ChainDecomposition, DecompTree,
    EdgeRef,
};
use crate::embed::{dedup_maps, embeddings_of_genus, euler_genus_of, min_euler_genus, planar_embed};
use crate::error::{invalid, Error, Result};
use crate::facewidth::{enumerate_nooses, for_each_noose, is_noncontractible};
use crate::graph::{blocks, Graph};
use crate::map::{boundary_faces, cut_along, CombinatorialMap, CutResult, Noose};

fn h(words: &[u64]) -> u64 {
    let mut s = DefaultHasher::new();
    words.hash(&mut s);
    s.finish()
}

/// A graph with a color on every dart (`2e` at the first end of `e`).
#[derive(Clone, Debug)]
struct Obj {
    g: Graph,
    colors: Vec<u64>,
}

impl Obj {
    fn plain(g: &Graph) -> Obj {
        Obj { g: g.clone(), colors: vec![0; 2 * g.m()] }
    }

    /// Compact copy on `verts` (in the given order) and `edges`.
    fn sub(&self, g: &Graph, verts: &[usize], edges: &[usize], mark: impl Fn(usize) -> u64) -> Obj {
        let mut pos = HashMap::with_capacity(verts.len());
        verts.iter().enumerate().for_each(|(i, &v)| {
            pos.insert(v, i);
        });
        let mut out = Graph::new(verts.len());
        let mut colors = Vec::with_capacity(2 * edges.len());
        for &e in edges {
            let (u, v) = g.edge(e);
            out.add_edge(pos[&u], pos[&v]);
            colors.push(self.colors[2 * e]);
            colors.push(self.colors[2 * e + 1]);
        }
        for (i, &v) in verts.iter().enumerate() {
            out.set_mark(i, mark(v));
        }
        Obj { g: out, colors }
    }
}

/// Encoding of the sub-object on `edges` with vertices listed by `order`.
fn encode_sub(g: &Graph, colors: &[u64], order: &[usize], edges: &[usize], mark: impl Fn(usize) -> u64) -> Vec<u64> {
    let mut pos = HashMap::with_capacity(order.len());
    order.iter().enumerate().for_each(|(i, &v)| {
        pos.insert(v, i as u64);
    });
    let mut words = vec![order.len() as u64, edges.len() as u64];
    words.extend(order.iter().map(|&v| mark(v)));
    let mut es: Vec<[u64; 4]> = edges
        .iter()
        .map(|&e| {
            let (u, v) = g.edge(e);
            let a = (pos[&u], colors[2 * e]);
            let b = (pos[&v], colors[2 * e + 1]);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            [a.0, a.1, b.0, b.1]
        })
        .collect();
    es.sort_unstable();
    words.extend(es.into_iter().flatten());
    words
}

fn encode(o: &Obj, order: &[usize]) -> Vec<u64> {
    let all: Vec<usize> = (0..o.g.m()).collect();
    encode_sub(&o.g, &o.colors, order, &all, |v| o.g.mark(v))
}

/// Colour refinement hash: invariant, cheap, not injective.
fn wl_key(o: &Obj) -> u64 {
    let n = o.g.n();
    let mut inc: Vec<Vec<(usize, u64, u64)>> = vec![Vec::new(); n];
    for (e, &(u, v)) in o.g.edges().iter().enumerate() {
        inc[u].push((v, o.colors[2 * e], o.colors[2 * e + 1]));
        inc[v].push((u, o.colors[2 * e + 1], o.colors[2 * e]));
    }
    let mut c: Vec<u64> = (0..n).map(|v| h(&[o.g.mark(v)])).collect();
    for _ in 0..3 {
        c = (0..n)
            .map(|v| {
                let mut nb: Vec<u64> = inc[v].iter().map(|&(w, a, b)| h(&[c[w], a, b])).collect();
                nb.sort_unstable();
                nb.push(c[v]);
                h(&nb)
            })
            .collect();
    }
    let mut all = c;
    all.sort_unstable();
    all.push(n as u64);
    all.push(o.g.m() as u64);
    h(&all)
}

#[derive(Clone, Debug)]
struct Lab {
    /// Vertex ids of the containing object.
    order: Vec<usize>,
    code: Vec<u64>,
    /// Edge ids covered (subtree labels only).
    edges: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseTag {
    Planar,
    Polyhedral,
    Facewidth2,
    Facewidth2Degenerate,
    Facewidth1,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            CaseTag::Planar => "planar",
            CaseTag::Polyhedral => "polyhedral",
            CaseTag::Facewidth2 => "facewidth2",
            CaseTag::Facewidth2Degenerate => "facewidth2-degenerate",
            CaseTag::Facewidth1 => "facewidth1",
        }
    }
}

/// One routing decision of the engine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub depth: usize,
    pub case: CaseTag,
    pub vertices: usize,
    pub genus: usize,
    /// Embeddings of least genus up to isomorphism.
    pub embeddings: usize,
    /// Candidates before pruning and after.
    pub candidates: usize,
    pub survivors: usize,
}

impl std::fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}{} n={} genus={} embeddings={} candidates={} kept={}",
            "  ".repeat(self.depth),
            self.case.name(),
            self.vertices,
            self.genus,
            self.embeddings,
            self.candidates,
            self.survivors
        )
    }
}

#[derive(Clone, Debug)]
pub struct IsoVerdict {
    pub isomorphic: bool,
    /// `witness[v]` is the image in the second graph of vertex `v`.
    pub witness: Option<Vec<usize>>,
    pub trace: Vec<TraceEntry>,
}

/// A two-vertex noose cut into a part `G'` and the cylinder `L'` around the
/// noose. Roles 0..4 name the shared vertices: the inner boundary pair on
/// the first side, then on the second.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FwPair {
    pub noose: Noose,
    /// `G'` in compact ids; `g_vertices[i]` is its vertex in `G`.
    pub g_prime: Graph,
    pub g_vertices: Vec<usize>,
    /// Role bits per vertex of `G'`.
    pub g_roles: Vec<u8>,
    pub l_prime: Graph,
    pub l_vertices: Vec<usize>,
    pub l_roles: Vec<u8>,
    /// Edge ids of `G` on each side.
    pub g_edges: Vec<usize>,
    pub l_edges: Vec<usize>,
    /// Cylinder analysis did not apply; `G'` is the whole cut-open graph.
    pub fallback: bool,
}

/// A face-width one split: `u` cut into two copies along a one-vertex noose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub vertex: usize,
    /// Edge ids moving to the new copy.
    pub moved: Vec<usize>,
    /// `G` with `u` split; the copy is vertex `n`, both carry the split role.
    pub graph: Graph,
}

#[derive(Clone, Debug)]
pub struct CasePlan {
    pub case: CaseTag,
    pub genus: usize,
    /// Least-genus embeddings up to isomorphism, sorted by map code.
    pub maps: Vec<CombinatorialMap>,
    pub face_width: Vec<usize>,
}

/// Internal pieces of `G` after the tree reductions.
#[derive(Clone, Debug)]
pub struct Step1 {
    /// Non-planar 3-connected torsos with adhesion roles in the marks
    /// (`mark * 3 + role`, role 1 and 2 the parent poles).
    pub nonplanar1: Vec<Graph>,
    pub nonplanar2: Vec<Graph>,
    /// Both graphs have only planar torsos: the verdict is already known.
    pub decided: Option<bool>,
    /// Codes of the block trees (with planar torsos) compared at this step.
    pub tree_code1: CanonicalCode,
    pub tree_code2: CanonicalCode,
}

const SPLIT_ROLE: u64 = 0x5350_4c49_54;
const PERMS: [[usize; 4]; 8] =
    [[0, 1, 2, 3], [1, 0, 2, 3], [0, 1, 3, 2], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 0, 1], [2, 3, 1, 0], [3, 2, 1, 0]];

fn permute_bits(bits: u8, p: &[usize; 4]) -> u8 {
    (0..4).filter(|&r| bits & (1 << r) != 0).fold(0, |acc, r| acc | (1 << p[r]))
}

fn role_mark(mark: u64, bits: u8) -> u64 {
    if bits == 0 {
        mark
    } else {
        h(&[mark, 0x524f_4c45, bits as u64])
    }
}

/// Largest face-width up to three: 1, 2, or 3 meaning "at least 3".
fn width_upto3(m: &CombinatorialMap) -> usize {
    for k in 1..=2 {
        let mut found = false;
        for_each_noose(m, k, &mut |c| {
            found = is_noncontractible(m, c);
            found
        });
        if found {
            return k;
        }
    }
    3
}

pub struct Engine<'a> {
    budget: &'a Budget,
    gmax: usize,
    depth: Cell<usize>,
    trace: RefCell<Vec<TraceEntry>>,
    /// Results by exact labeled input; sub-objects repeat across candidates.
    memo: RefCell<HashMap<Vec<u64>, Lab>>,
}

impl<'a> Engine<'a> {
    pub fn new(gmax: usize, budget: &'a Budget) -> Self {
        Engine { budget, gmax, depth: Cell::new(0), trace: RefCell::new(Vec::new()), memo: RefCell::new(HashMap::new()) }
    }

    pub fn take_trace(&self) -> Vec<TraceEntry> {
        std::mem::take(&mut self.trace.borrow_mut())
    }

    /// Canonical code and vertex order (`order[i]` is the vertex placed
    /// at position `i`).
    pub fn canonical_labeling(&self, g: &Graph) -> Result<(CanonicalCode, Vec<usize>)> {
        if g.edges().iter().any(|&(u, v)| u == v) {
            return invalid("loops are not supported");
        }
        if euler_genus_of(g, self.gmax, self.budget)?.is_none() {
            return Err(Error::GenusTooLarge(self.gmax));
        }
        let lab = self.canon_any(&Obj::plain(g))?;
        Ok((CanonicalCode { words: lab.code }, lab.order))
    }

    fn canon_any(&self, o: &Obj) -> Result<Lab> {
        self.budget.tick()?;
        let n = o.g.n();
        if n == 0 {
            return Ok(Lab { order: vec![], code: encode(o, &[]), edges: vec![] });
        }
        let comps = o.g.components();
        if comps.len() == 1 {
            let order = self.canon_connected(o)?;
            let code = encode(o, &order);
            return Ok(Lab { order, code, edges: vec![] });
        }
        let mut labs = Vec::new();
        for c in comps {
            let cs: BTreeSet<usize> = c.iter().copied().collect();
            let es: Vec<usize> = (0..o.g.m()).filter(|&e| cs.contains(&o.g.edge(e).0)).collect();
            let sub = o.sub(&o.g, &c, &es, |v| o.g.mark(v));
            let lab = self.canon_any(&sub)?;
            labs.push((lab.code, lab.order.iter().map(|&i| c[i]).collect::<Vec<_>>()));
        }
        labs.sort();
        let order: Vec<usize> = labs.into_iter().flat_map(|l| l.1).collect();
        let code = encode(o, &order);
        Ok(Lab { order, code, edges: vec![] })
    }

    fn canon_connected(&self, o: &Obj) -> Result<Vec<usize>> {
        let n = o.g.n();
        if n == 1 {
            return Ok(vec![0]);
        }
        let bl = blocks(&o.g);
        if bl.len() == 1 {
            return self.canon_2conn(o);
        }
        let bt = BlockTree::new(&o.g, bl);
        let nb = bt.blocks.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nb + bt.cuts.len()];
        for (ci, &c) in bt.cuts.iter().enumerate() {
            for &b in &bt.holders[c] {
                adj[nb + ci].push(b);
                adj[b].push(nb + ci);
            }
        }
        let centers = tree_centers(&adj);
        let root = centers[0];
        let order = if root < nb {
            self.bc_block(o, &bt, root, None)?.order
        } else {
            let c = bt.cuts[root - nb];
            let mut kids = Vec::new();
            for &b in &bt.holders[c] {
                kids.push(self.bc_block(o, &bt, b, Some(c))?);
            }
            kids.sort_by(|a, b| a.code.cmp(&b.code));
            let mut order = vec![c];
            for k in kids {
                order.extend(k.order.into_iter().filter(|&v| v != c));
            }
            order
        };
        Ok(order)
    }

    /// Subtree of the block tree below block `b`, entered at cut vertex `p`.
    fn bc_block(&self, o: &Obj, bt: &BlockTree, b: usize, p: Option<usize>) -> Result<Lab> {
        let verts = &bt.verts[b];
        let mut kids: BTreeMap<usize, Vec<Lab>> = BTreeMap::new();
        for &c in verts {
            if Some(c) == p || bt.holders[c].len() < 2 {
                continue;
            }
            let mut ls = Vec::new();
            for &b2 in &bt.holders[c] {
                if b2 != b {
                    ls.push(self.bc_block(o, bt, b2, Some(c))?);
                }
            }
            ls.sort_by(|a, b| a.code.cmp(&b.code));
            kids.insert(c, ls);
        }
        let flavor: HashMap<usize, u64> = kids
            .iter()
            .map(|(&c, ls)| {
                let mut w = vec![2];
                for l in ls {
                    w.push(l.code.len() as u64);
                    w.extend_from_slice(&l.code);
                }
                (c, h(&w))
            })
            .collect();
        let mark = |v: usize| {
            if Some(v) == p {
                h(&[o.g.mark(v), 1])
            } else if let Some(&f) = flavor.get(&v) {
                h(&[o.g.mark(v), f])
            } else {
                o.g.mark(v)
            }
        };
        let bo = o.sub(&o.g, verts, &bt.blocks[b], mark);
        let border = self.canon_2conn(&bo)?;
        let mut order: Vec<usize> = border.iter().map(|&i| verts[i]).collect();
        let mut edges = bt.blocks[b].clone();
        for i in 0..verts.len() {
            let c = order[i];
            if let Some(ls) = kids.get(&c) {
                for l in ls {
                    order.extend(l.order.iter().copied().filter(|&v| v != c));
                    edges.extend_from_slice(&l.edges);
                }
            }
        }
        let pm = |v: usize| if Some(v) == p { h(&[o.g.mark(v), 1]) } else { o.g.mark(v) };
        let code = encode_sub(&o.g, &o.colors, &order, &edges, pm);
        Ok(Lab { order, code, edges })
    }

    fn canon_2conn(&self, o: &Obj) -> Result<Vec<usize>> {
        if o.g.n() == 2 {
            return Ok(self.least_of(o, vec![vec![0, 1], vec![1, 0]]));
        }
        let t = triconnected_tree(&o.g)?;
        if t.bags.len() == 1 {
            return self.canon_torso(o, t.bags[0].kind);
        }
        let adj: Vec<Vec<usize>> = (0..t.bags.len()).map(|i| t.neighbors(i).into_iter().map(|x| x.1).collect()).collect();
        let mut memo = HashMap::new();
        let mut cands = Vec::new();
        for c in tree_centers(&adj) {
            cands.push(self.spqr_node(o, &t, c, None, &mut memo)?.order);
        }
        Ok(self.least_of(o, cands))
    }

    fn least_of(&self, o: &Obj, cands: Vec<Vec<usize>>) -> Vec<usize> {
        cands.into_iter().map(|c| (encode(o, &c), c)).min().expect("a candidate").1
    }

    /// Subtree below bag `i`; `parent` is the link and whether its
    /// adhesion is read from the larger vertex.
    fn spqr_node(
        &self,
        o: &Obj,
        t: &DecompTree,
        i: usize,
        parent: Option<(usize, bool)>,
        memo: &mut HashMap<(usize, Option<(usize, bool)>), Lab>,
    ) -> Result<Lab> {
        if let Some(l) = memo.get(&(i, parent)) {
            return Ok(l.clone());
        }
        let bag = &t.bags[i];
        let mut kids: HashMap<usize, (Lab, Lab)> = HashMap::new();
        for (k, j) in t.neighbors(i) {
            if parent.map(|p| p.0) == Some(k) {
                continue;
            }
            let fwd = self.spqr_node(o, t, j, Some((k, false)), memo)?;
            let rev = self.spqr_node(o, t, j, Some((k, true)), memo)?;
            kids.insert(k, (fwd, rev));
        }
        let poles = parent.map(|(k, rev)| {
            let a = &t.links[k].adhesion;
            if rev {
                (a[1], a[0])
            } else {
                (a[0], a[1])
            }
        });
        let role = |v: usize| match poles {
            Some((a, _)) if a == v => 1,
            Some((_, b)) if b == v => 2,
            _ => 0,
        };
        let pos: HashMap<usize, usize> = bag.vertices.iter().enumerate().map(|(p, &v)| (v, p)).collect();
        let mut tg = Graph::new(bag.vertices.len());
        let mut colors = Vec::new();
        for (p, &v) in bag.vertices.iter().enumerate() {
            tg.set_mark(p, h(&[o.g.mark(v), role(v)]));
        }
        for e in &bag.edges {
            tg.add_edge(pos[&e.u], pos[&e.v]);
            let (cu, cv) = match e.id {
                EdgeRef::Real(x) => (h(&[0, o.colors[2 * x]]), h(&[0, o.colors[2 * x + 1]])),
                EdgeRef::Virtual(k) if parent.map(|p| p.0) == Some(k) => (h(&[1]), h(&[1])),
                EdgeRef::Virtual(k) => {
                    let (fwd, rev) = &kids[&k];
                    let (f, r) = (h(&fwd.code), h(&rev.code));
                    if e.u == t.links[k].adhesion[0] {
                        (h(&[2, f]), h(&[2, r]))
                    } else {
                        (h(&[2, r]), h(&[2, f]))
                    }
                }
            };
            colors.push(cu);
            colors.push(cv);
        }
        let torso = Obj { g: tg, colors };
        let torder = self.canon_torso(&torso, bag.kind)?;
        let mut order: Vec<usize> = torder.iter().map(|&p| bag.vertices[p]).collect();
        let place: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut edges: Vec<usize> = bag
            .edges
            .iter()
            .filter_map(|e| match e.id {
                EdgeRef::Real(x) => Some(x),
                EdgeRef::Virtual(_) => None,
            })
            .collect();
        let mut ks: Vec<(usize, usize, Vec<u64>, usize)> = kids
            .iter()
            .map(|(&k, (fwd, rev))| {
                let a = &t.links[k].adhesion;
                let (pa, pb) = (place[&a[0]], place[&a[1]]);
                let code = if pa < pb { fwd.code.clone() } else { rev.code.clone() };
                (pa.min(pb), pa.max(pb), code, k)
            })
            .collect();
        ks.sort();
        for (pa, _, _, k) in ks {
            let (fwd, rev) = &kids[&k];
            let a = &t.links[k].adhesion;
            let l = if place[&a[0]] == pa { fwd } else { rev };
            order.extend(l.order.iter().copied().filter(|v| !place.contains_key(v)));
            edges.extend_from_slice(&l.edges);
        }
        let code = encode_sub(&o.g, &o.colors, &order, &edges, |v| h(&[o.g.mark(v), role(v)]));
        let lab = Lab { order, code, edges };
        memo.insert((i, parent), lab.clone());
        Ok(lab)
    }

    fn canon_torso(&self, o: &Obj, kind: BagKind) -> Result<Vec<usize>> {
        match kind {
            BagKind::Bond => Ok(self.least_of(o, vec![vec![0, 1], vec![1, 0]])),
            BagKind::Block => unreachable!("block bags are not torsos"),
            BagKind::Cycle | BagKind::Rigid => match planar_embed(&o.g) {
                Some(m) => Ok(canonical_form(&m, Mode::Free, Some(&o.colors)).vertex_order),
                None => self.canon_genus(o),
            },
        }
    }

    fn push_trace(&self, case: CaseTag, o: &Obj, genus: usize, embeddings: usize, candidates: usize, survivors: usize) {
        self.trace.borrow_mut().push(TraceEntry {
            depth: self.depth.get(),
            case,
            vertices: o.g.n(),
            genus,
            embeddings,
            candidates,
            survivors,
        });
    }

    fn recurse(&self, o: &Obj) -> Result<Lab> {
        let mut key = vec![o.g.n() as u64];
        key.extend_from_slice(o.g.marks());
        for (e, &(u, v)) in o.g.edges().iter().enumerate() {
            key.extend([u as u64, v as u64, o.colors[2 * e], o.colors[2 * e + 1]]);
        }
        if let Some(lab) = self.memo.borrow().get(&key) {
            return Ok(lab.clone());
        }
        self.depth.set(self.depth.get() + 1);
        let r = self.canon_any(o);
        self.depth.set(self.depth.get() - 1);
        if let Ok(lab) = &r {
            self.memo.borrow_mut().insert(key, lab.clone());
        }
        r
    }

    /// Least genus, all labeled embeddings of it, the classes, and the
    /// width of each class.
    fn embeddings(&self, o: &Obj) -> Result<(usize, Vec<CombinatorialMap>, Vec<CombinatorialMap>, Vec<usize>)> {
        let (t, _) = min_euler_genus(&o.g, self.gmax, self.budget)?.ok_or(Error::GenusTooLarge(self.gmax))?;
        let raw = embeddings_of_genus(&o.g, t, self.budget)?;
        let classes: Vec<CombinatorialMap> = dedup_maps(raw.clone(), Some(&o.colors)).into_iter().map(|x| x.1).collect();
        let widths = classes.iter().map(width_upto3).collect();
        Ok((t, raw, classes, widths))
    }

    /// 3-connected non-planar object.
    fn canon_genus(&self, o: &Obj) -> Result<Vec<usize>> {
        let (t, raw, classes, widths) = self.embeddings(o)?;
        let top = widths.iter().copied().max().unwrap_or(3);
        match top {
            3 => {
                let best = classes
                    .iter()
                    .zip(&widths)
                    .filter(|x| *x.1 == 3)
                    .map(|(m, _)| canonical_form(m, Mode::Free, Some(&o.colors)))
                    .min_by(|a, b| a.code.cmp(&b.code))
                    .expect("a polyhedral map");
                let k = widths.iter().filter(|&&w| w == 3).count();
                self.push_trace(CaseTag::Polyhedral, o, t, classes.len(), k, 1);
                Ok(best.vertex_order)
            }
            2 => {
                let maps: Vec<&CombinatorialMap> = classes.iter().zip(&widths).filter(|x| *x.1 == 2).map(|x| x.0).collect();
                self.canon_fw2(o, t, classes.len(), &maps)
            }
            _ => self.canon_fw1(o, t, classes.len(), &raw),
        }
    }

    fn canon_fw2(&self, o: &Obj, t: usize, nclasses: usize, maps: &[&CombinatorialMap]) -> Result<Vec<usize>> {
        let mut raw_pairs = Vec::new();
        let mut degenerate = false;
        for m in maps {
            for nz in enumerate_nooses(m, 2) {
                let cut = cut_along(m, &nz)?;
                assert!(cut.genus_delta < 0, "cutting a non-contractible noose lowers the genus");
                for swap in [false, true] {
                    let (p, deg) = pair_parts(&o.g, &cut, &nz, swap);
                    degenerate |= deg;
                    raw_pairs.push(p);
                }
            }
        }
        let mut seen = BTreeSet::new();
        raw_pairs.retain(|p| seen.insert(p.key()));
        // candidates: pair x role permutation; prune by the cylinder side first
        let mut cands = Vec::new();
        for pi in 0..raw_pairs.len() {
            for perm in &PERMS {
                cands.push((pi, *perm));
            }
        }
        let total = cands.len();
        // cheap invariant first, full recursion only on the least
        let mut lobjs: HashMap<(Vec<usize>, Vec<(usize, u8)>), (u64, Obj)> = HashMap::new();
        let mut keyed = Vec::new();
        for &(pi, perm) in &cands {
            let p = &raw_pairs[pi];
            let lbits: Vec<(usize, u8)> = p.l_bits.iter().map(|&(v, b)| (v, permute_bits(b, &perm))).collect();
            let key = (p.l_edges.clone(), lbits.clone());
            let wl = lobjs
                .entry(key.clone())
                .or_insert_with(|| {
                    let lo = l_obj(o, &p.l_verts, &p.l_edges, &lbits);
                    (wl_key(&lo), lo)
                })
                .0;
            keyed.push((wl, pi, perm, key));
        }
        let wmin = keyed.iter().map(|x| x.0).min().expect("a pair");
        let mut lcodes: HashMap<(Vec<usize>, Vec<(usize, u8)>), Lab> = HashMap::new();
        let mut scored = Vec::new();
        for (_, pi, perm, key) in keyed.into_iter().filter(|x| x.0 == wmin) {
            let p = &raw_pairs[pi];
            if !lcodes.contains_key(&key) {
                let lab = self.recurse(&lobjs[&key].1)?;
                let order = lab.order.iter().map(|&i| p.l_verts[i]).collect();
                lcodes.insert(key.clone(), Lab { order, code: lab.code, edges: vec![] });
            }
            scored.push((pi, perm, key));
        }
        let least = scored.iter().map(|s| &lcodes[&s.2].code).min().cloned().expect("a pair");
        scored.retain(|s| lcodes[&s.2].code == least);
        let mut gkeyed = Vec::new();
        for (pi, perm, lkey) in scored {
            let p = &raw_pairs[pi];
            let go = g_obj(o, p, &perm);
            gkeyed.push((wl_key(&go), pi, perm, lkey, go));
        }
        let kmin = gkeyed.iter().map(|x| x.0).min().unwrap();
        gkeyed.retain(|x| x.0 == kmin);
        let survivors = gkeyed.len();
        let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
        for (_, pi, _, lkey, go) in gkeyed {
            let p = &raw_pairs[pi];
            let lab = self.recurse(&go)?;
            let mut placed = vec![false; o.g.n()];
            let mut order = Vec::with_capacity(o.g.n());
            for &i in &lab.order {
                let v = p.orig[p.g_verts[i]];
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
            for &v in &lcodes[&lkey].order {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
            assert_eq!(order.len(), o.g.n(), "the two sides cover the graph");
            let code = encode(o, &order);
            if best.as_ref().map_or(true, |b| code < b.0) {
                best = Some((code, order));
            }
        }
        let case = if degenerate && t == 2 { CaseTag::Facewidth2Degenerate } else { CaseTag::Facewidth2 };
        self.push_trace(case, o, t, nclasses, total, survivors);
        Ok(best.expect("a candidate").1)
    }

    fn canon_fw1(&self, o: &Obj, t: usize, nclasses: usize, raw: &[CombinatorialMap]) -> Result<Vec<usize>> {
        let mut splits: BTreeMap<(usize, Vec<usize>), Obj> = BTreeMap::new();
        for m in raw {
            for nz in enumerate_nooses(m, 1) {
                let cut = cut_along(m, &nz)?;
                assert!(cut.genus_delta < 0, "cutting a non-contractible noose lowers the genus");
                let (u, moved) = split_key(&cut, o.g.n());
                splits.entry((u, moved)).or_insert_with(|| split_obj(o, &cut, u));
            }
        }
        let total = splits.len();
        let keyed: Vec<(u64, usize, Obj)> = splits.into_iter().map(|((u, _), s)| (wl_key(&s), u, s)).collect();
        let kmin = keyed.iter().map(|x| x.0).min().expect("a one-vertex noose");
        let keep: Vec<(usize, Obj)> = keyed.into_iter().filter(|x| x.0 == kmin).map(|x| (x.1, x.2)).collect();
        let survivors = keep.len();
        let n = o.g.n();
        let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
        for (u, s) in keep {
            let lab = self.recurse(&s)?;
            let mut order = Vec::with_capacity(n);
            let mut placed = false;
            for &v in &lab.order {
                let w = if v == n { u } else { v };
                if w == u {
                    if placed {
                        continue;
                    }
                    placed = true;
                }
                order.push(w);
            }
            let code = encode(o, &order);
            if best.as_ref().map_or(true, |b| code < b.0) {
                best = Some((code, order));
            }
        }
        self.push_trace(CaseTag::Facewidth1, o, t, nclasses, total, survivors);
        Ok(best.expect("a candidate").1)
    }
}

struct BlockTree {
    blocks: Vec<Vec<usize>>,
    verts: Vec<Vec<usize>>,
    holders: Vec<Vec<usize>>,
    cuts: Vec<usize>,
}

impl BlockTree {
    fn new(g: &Graph, blocks: Vec<Vec<usize>>) -> Self {
        let verts: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| {
                let mut vs: Vec<usize> = b.iter().flat_map(|&e| [g.edge(e).0, g.edge(e).1]).collect();
                vs.sort_unstable();
                vs.dedup();
                vs
            })
            .collect();
        let mut holders = vec![Vec::new(); g.n()];
        for (i, vs) in verts.iter().enumerate() {
            for &v in vs {
                holders[v].push(i);
            }
        }
        let cuts = (0..g.n()).filter(|&v| holders[v].len() > 1).collect();
        BlockTree { blocks, verts, holders, cuts }
    }
}

/// Working form of a cut-open pair: `G'` in ids of the cut graph.
#[derive(Clone, Debug)]
struct PairParts {
    cut_graph: Graph,
    /// Cut-graph vertex to `G` vertex.
    orig: Vec<usize>,
    g_verts: Vec<usize>,
    g_edges: Vec<usize>,
    g_bits: Vec<(usize, u8)>,
    l_verts: Vec<usize>,
    l_edges: Vec<usize>,
    l_bits: Vec<(usize, u8)>,
    fallback: bool,
}

impl PairParts {
    /// Identity of the pair as a labeled object up to role symmetry: copy
    /// ids alone are meaningless across different nooses.
    fn key(&self) -> (Vec<(usize, (usize, usize), (usize, usize))>, Vec<((usize, usize), u8)>, Vec<usize>) {
        let cg = &self.cut_graph;
        // copies told apart by their least edge inside G'; edges on the
        // cylinder side vary between nooses giving the same pair
        let mut least = vec![usize::MAX; cg.n()];
        for &e in &self.g_edges {
            let (u, v) = cg.edge(e);
            least[u] = least[u].min(e);
            least[v] = least[v].min(e);
        }
        let rep = |v: usize| (self.orig[v], least[v]);
        let es = self
            .g_edges
            .iter()
            .map(|&e| {
                let (u, v) = cg.edge(e);
                (e, rep(u).min(rep(v)), rep(u).max(rep(v)))
            })
            .collect();
        // role bits up to the role symmetries, which candidates range over
        let bits = PERMS
            .iter()
            .map(|perm| {
                let mut bits: Vec<((usize, usize), u8)> =
                    self.g_bits.iter().map(|&(v, b)| (rep(v), permute_bits(b, perm))).collect();
                bits.sort_unstable();
                bits
            })
            .min()
            .expect("eight symmetries");
        (es, bits, self.l_edges.clone())
    }
}

/// Splits a cut-open graph into `G'` and the cylinder side. Copies are
/// paired `(x, y)` / `(x', y')`, or crosswise when `swap`. Returns the parts
/// and whether every bag was a cylinder.
fn pair_parts(g: &Graph, cut: &CutResult, nz: &Noose, swap: bool) -> (PairParts, bool) {
    let cg = cut.map.graph().clone();
    let mut orig: Vec<usize> = (0..cg.n()).collect();
    for &(v, _, b) in &cut.split_pairs {
        orig[b] = v;
    }
    let (x, y) = (nz.hits[0].vertex, nz.hits[1].vertex);
    let (xb, yb) = (cut.split_pairs[0].2, cut.split_pairs[1].2);
    let ends = if swap { [(x, yb), (xb, y)] } else { [(x, y), (xb, yb)] };
    let mut degenerate = false;
    let analysed = match spqr_path_cylinders(cut, ends) {
        Ok(pc) if pc.degenerate() => {
            degenerate = true;
            None
        }
        Ok(pc) => Some(pc),
        Err(_) => None,
    };
    let (g_edges, b1, b2, l_edges, fallback) = match &analysed {
        Some(pc) => {
            let (t1, t2, mid) = pc.split();
            let mut l: Vec<usize> = t1.into_iter().chain(t2).collect();
            l.sort_unstable();
            (mid, pc.inner1, pc.inner2, l, false)
        }
        None => ((0..cg.m()).collect(), ends[0], ends[1], Vec::new(), true),
    };
    let mut gb: BTreeMap<usize, u8> = BTreeMap::new();
    *gb.entry(b1.0).or_default() |= 1;
    *gb.entry(b1.1).or_default() |= 2;
    *gb.entry(b2.0).or_default() |= 4;
    *gb.entry(b2.1).or_default() |= 8;
    let mut gv: BTreeSet<usize> = g_edges.iter().flat_map(|&e| [cg.edge(e).0, cg.edge(e).1]).collect();
    gv.extend(gb.keys().copied());
    let mut lb: BTreeMap<usize, u8> = BTreeMap::new();
    for (&w, &b) in &gb {
        *lb.entry(orig[w]).or_default() |= b;
    }
    let mut lv: BTreeSet<usize> = l_edges.iter().flat_map(|&e| [g.edge(e).0, g.edge(e).1]).collect();
    lv.extend([x, y]);
    lv.extend(lb.keys().copied());
    let parts = PairParts {
        cut_graph: cg,
        orig,
        g_verts: gv.into_iter().collect(),
        g_edges,
        g_bits: gb.into_iter().collect(),
        l_verts: lv.into_iter().collect(),
        l_edges,
        l_bits: lb.into_iter().collect(),
        fallback,
    };
    (parts, degenerate)
}

fn l_obj(o: &Obj, verts: &[usize], edges: &[usize], bits: &[(usize, u8)]) -> Obj {
    let bm: HashMap<usize, u8> = bits.iter().copied().collect();
    o.sub(&o.g, verts, edges, |v| role_mark(o.g.mark(v), bm.get(&v).copied().unwrap_or(0)))
}

fn g_obj(o: &Obj, p: &PairParts, perm: &[usize; 4]) -> Obj {
    let bm: HashMap<usize, u8> = p.g_bits.iter().map(|&(v, b)| (v, permute_bits(b, perm))).collect();
    let cg = &p.cut_graph;
    o.sub(cg, &p.g_verts, &p.g_edges, |v| role_mark(cg.mark(v), bm.get(&v).copied().unwrap_or(0)))
}

/// The split vertex and the edges at its new copy, normalized so that the
/// smaller side (by least edge id) is listed.
fn split_key(cut: &CutResult, n: usize) -> (usize, Vec<usize>) {
    let cg = cut.map.graph();
    let u = cut.split_pairs[0].0;
    let side = |w: usize| {
        let mut es: Vec<usize> = (0..cg.m()).filter(|&e| cg.edge(e).0 == w || cg.edge(e).1 == w).collect();
        es.sort_unstable();
        es
    };
    let (a, b) = (side(u), side(n));
    (u, a.min(b))
}

fn split_obj(o: &Obj, cut: &CutResult, u: usize) -> Obj {
    let cg = cut.map.graph();
    let n = o.g.n();
    let verts: Vec<usize> = (0..cg.n()).collect();
    let edges: Vec<usize> = (0..cg.m()).collect();
    o.sub(cg, &verts, &edges, |v| if v == u || v == n { h(&[o.g.mark(u), SPLIT_ROLE]) } else { o.g.mark(v) })
}

/// Decides isomorphism of two graphs of Euler genus at most `gmax`. A
/// positive verdict carries a checked vertex bijection.
pub fn isomorphic(g1: &Graph, g2: &Graph, gmax: usize, budget: &Budget) -> Result<IsoVerdict> {
    let no = |trace| Ok(IsoVerdict { isomorphic: false, witness: None, trace });
    let sig = |g: &Graph| {
        let mut d: Vec<(usize, u64)> = g.degrees().into_iter().zip(g.marks().iter().copied()).collect();
        d.sort_unstable();
        (g.n(), g.m(), d)
    };
    if sig(g1) != sig(g2) {
        return no(Vec::new());
    }
    let e = Engine::new(gmax, budget);
    let (c1, o1) = e.canonical_labeling(g1)?;
    let (c2, o2) = e.canonical_labeling(g2)?;
    let trace = e.take_trace();
    if c1 != c2 {
        return no(trace);
    }
    let mut w = vec![0; g1.n()];
    for (a, b) in o1.iter().zip(&o2) {
        w[*a] = *b;
    }
    if !verify_witness(g1, g2, &w) {
        return Err(Error::Invalid("internal error: equal codes with a failing witness".into()));
    }
    Ok(IsoVerdict { isomorphic: true, witness: Some(w), trace })
}

/// Edge multisets and marks correspond under `w`.
pub fn verify_witness(g1: &Graph, g2: &Graph, w: &[usize]) -> bool {
    if g1.n() != g2.n() || g1.m() != g2.m() || w.len() != g1.n() {
        return false;
    }
    let mut seen = vec![false; g2.n()];
    for &x in w {
        if x >= g2.n() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    if (0..g1.n()).any(|v| g1.mark(v) != g2.mark(w[v])) {
        return false;
    }
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut e1: Vec<(usize, usize)> = g1.edges().iter().map(|&(a, b)| norm(w[a], w[b])).collect();
    let mut e2: Vec<(usize, usize)> = g2.edges().iter().map(|&(a, b)| norm(a, b)).collect();
    e1.sort_unstable();
    e2.sort_unstable();
    e1 == e2
}

/// Canonical code of a graph of Euler genus at most `gmax`.
pub fn canonical_graph_code(g: &Graph, gmax: usize, budget: &Budget) -> Result<CanonicalCode> {
    Ok(Engine::new(gmax, budget).canonical_labeling(g)?.0)
}

/// Non-planar torsos of both graphs (through block and triconnected
/// trees) and the verdict when no such torso exists.
pub fn reduce_step1(g1: &Graph, g2: &Graph, gmax: usize, budget: &Budget) -> Result<Step1> {
    let e = Engine::new(gmax, budget);
    let torsos = |g: &Graph| -> Result<Vec<Graph>> {
        let mut out = Vec::new();
        for blk in blocks(g) {
            let mut vs: Vec<usize> = blk.iter().flat_map(|&x| [g.edge(x).0, g.edge(x).1]).collect();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() < 3 {
                continue;
            }
            let bo = Obj::plain(g).sub(g, &vs, &blk, |v| g.mark(v));
            let t = triconnected_tree(&bo.g)?;
            for (i, bag) in t.bags.iter().enumerate() {
                if bag.kind != BagKind::Rigid {
                    continue;
                }
                let pos: HashMap<usize, usize> = bag.vertices.iter().enumerate().map(|(p, &v)| (v, p)).collect();
                let mut tg = Graph::new(bag.vertices.len());
                for be in &bag.edges {
                    tg.add_edge(pos[&be.u], pos[&be.v]);
                }
                if planar_embed(&tg).is_some() {
                    continue;
                }
                let poles: BTreeSet<usize> = t.neighbors(i).iter().flat_map(|&(k, _)| t.links[k].adhesion.clone()).collect();
                for (p, &v) in bag.vertices.iter().enumerate() {
                    tg.set_mark(p, bo.g.mark(v) * 3 + if poles.contains(&v) { 1 } else { 0 });
                }
                out.push(tg);
            }
        }
        Ok(out)
    };
    let (n1, n2) = (torsos(g1)?, torsos(g2)?);
    let mut prov = |v: &crate::decomposition::BagView| -> Result<CanonicalCode> {
        let o = Obj { g: v.graph.clone(), colors: v.colors.clone() };
        Ok(CanonicalCode { words: e.canon_any(&o)?.code })
    };
    let code = |g: &Graph, prov: &mut dyn FnMut(&crate::decomposition::BagView) -> Result<CanonicalCode>| {
        crate::decomposition::canonical_tree_code(&crate::decomposition::biconnected_tree(g)?, prov)
    };
    let c1 = code(g1, &mut prov)?;
    let c2 = code(g2, &mut prov)?;
    let decided = if n1.is_empty() && n2.is_empty() {
        Some(e.canonical_labeling(g1)?.0 == e.canonical_labeling(g2)?.0)
    } else if c1 != c2 {
        Some(false)
    } else {
        None
    };
    Ok(Step1 { nonplanar1: n1, nonplanar2: n2, decided, tree_code1: c1, tree_code2: c2 })
}

/// Least genus, embedding classes with their face-widths, and the case.
pub fn plan_case(g: &Graph, gmax: usize, budget: &Budget) -> Result<CasePlan> {
    let e = Engine::new(gmax, budget);
    let o = Obj::plain(g);
    if planar_embed(g).is_some() {
        return Ok(CasePlan { case: CaseTag::Planar, genus: 0, maps: planar_embed(g).into_iter().collect(), face_width: vec![] });
    }
    let (t, _, classes, widths) = e.embeddings(&o)?;
    let top = widths.iter().copied().max().unwrap_or(3);
    let case = match top {
        3 => CaseTag::Polyhedral,
        2 => {
            if t == 2 && !case_facewidth2_degenerate(g, gmax, budget)?.is_empty() {
                CaseTag::Facewidth2Degenerate
            } else {
                CaseTag::Facewidth2
            }
        }
        _ => CaseTag::Facewidth1,
    };
    Ok(CasePlan { case, genus: t, maps: classes, face_width: widths })
}

/// All least-genus embeddings of face-width at least three, up to
/// isomorphism.
pub fn case_polyhedral(g: &Graph, gmax: usize, budget: &Budget) -> Result<Vec<CombinatorialMap>> {
    let e = Engine::new(gmax, budget);
    let (_, _, classes, widths) = e.embeddings(&Obj::plain(g))?;
    Ok(classes.into_iter().zip(widths).filter(|x| x.1 == 3).map(|x| x.0).collect())
}

fn labeled_fw2_maps(g: &Graph, gmax: usize, budget: &Budget) -> Result<Vec<CombinatorialMap>> {
    let (t, _) = min_euler_genus(g, gmax, budget)?.ok_or(Error::GenusTooLarge(gmax))?;
    if t == 0 {
        return Ok(Vec::new());
    }
    let raw = embeddings_of_genus(g, t, budget)?;
    let top = raw.iter().map(width_upto3).max().unwrap_or(3);
    if top != 2 {
        return Ok(Vec::new());
    }
    Ok(raw.into_iter().filter(|m| width_upto3(m) == 2).collect())
}

/// Every `(G', L')` split from the two-vertex nooses of every labeled
/// least-genus embedding of face-width two, both pairings of the copies.
/// Identical labeled pairs are listed once.
pub fn case_facewidth2(g: &Graph, gmax: usize, budget: &Budget) -> Result<Vec<FwPair>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for m in labeled_fw2_maps(g, gmax, budget)? {
        for nz in enumerate_nooses(&m, 2) {
            let cut = cut_along(&m, &nz)?;
            for swap in [false, true] {
                let (p, _) = pair_parts(g, &cut, &nz, swap);
                if !seen.insert(p.key()) {
                    continue;
                }
                out.push(public_pair(g, &p, nz.clone()));
            }
        }
    }
    Ok(out)
}

fn public_pair(g: &Graph, p: &PairParts, noose: Noose) -> FwPair {
    let o = Obj::plain(&p.cut_graph);
    let gb: HashMap<usize, u8> = p.g_bits.iter().copied().collect();
    let gp = o.sub(&p.cut_graph, &p.g_verts, &p.g_edges, |v| p.cut_graph.mark(v));
    let lb: HashMap<usize, u8> = p.l_bits.iter().copied().collect();
    let lp = Obj::plain(g).sub(g, &p.l_verts, &p.l_edges, |v| g.mark(v));
    FwPair {
        noose,
        g_prime: gp.g,
        g_vertices: p.g_verts.iter().map(|&v| p.orig[v]).collect(),
        g_roles: p.g_verts.iter().map(|v| gb.get(v).copied().unwrap_or(0)).collect(),
        l_prime: lp.g,
        l_vertices: p.l_verts.clone(),
        l_roles: p.l_verts.iter().map(|v| lb.get(v).copied().unwrap_or(0)).collect(),
        g_edges: p.g_edges.clone(),
        l_edges: p.l_edges.clone(),
        fallback: p.fallback,
    }
}

/// Code of a pair, invariant under relabeling of `G`: the least over role
/// symmetries of the codes of both sides with roles as marks.
pub fn pair_code(p: &FwPair, gmax: usize, budget: &Budget) -> Result<Vec<u64>> {
    let e = Engine::new(gmax, budget);
    let mut best: Option<Vec<u64>> = None;
    for perm in &PERMS {
        let side = |g: &Graph, roles: &[u8]| {
            let mut g = g.clone();
            for (v, &r) in roles.iter().enumerate() {
                g.set_mark(v, role_mark(g.mark(v), permute_bits(r, perm)));
            }
            e.canon_any(&Obj::plain(&g)).map(|l| l.code)
        };
        let mut w = side(&p.g_prime, &p.g_roles)?;
        w.push(u64::MAX);
        w.extend(side(&p.l_prime, &p.l_roles)?);
        if best.as_ref().map_or(true, |b| w < *b) {
            best = Some(w);
        }
    }
    Ok(best.expect("eight symmetries"))
}

/// The rings of cylinders found by cutting a genus-two graph along
/// two-vertex nooses whose cut-open path is all cylinders, one per
/// distinct chain.
pub fn case_facewidth2_degenerate(g: &Graph, gmax: usize, budget: &Budget) -> Result<Vec<ChainDecomposition>> {
    let mut out: Vec<ChainDecomposition> = Vec::new();
    for m in labeled_fw2_maps(g, gmax, budget)? {
        if m.total_euler_genus() != 2 {
            continue;
        }
        for nz in enumerate_nooses(&m, 2) {
            let cut = cut_along(&m, &nz)?;
            if boundary_faces(&cut).len() != 2 || cut.genus_delta != -2 {
                continue;
            }
            let (x, y) = (nz.hits[0].vertex, nz.hits[1].vertex);
            let (xb, yb) = (cut.split_pairs[0].2, cut.split_pairs[1].2);
            for ends in [[(x, y), (xb, yb)], [(x, yb), (xb, y)]] {
                if let Ok(ch) = circular_chain(g, &cut, ends) {
                    if !out.contains(&ch) {
                        out.push(ch);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Vertices met by a non-contractible one-vertex noose in some least-genus
/// embedding, and the distinct splits they give. Empty unless the largest
/// face-width is one.
pub fn case_facewidth1(g: &Graph, gmax: usize, budget: &Budget) -> Result<(Vec<usize>, Vec<Split>)> {
    let (t, _) = min_euler_genus(g, gmax, budget)?.ok_or(Error::GenusTooLarge(gmax))?;
    if t == 0 {
        return Ok((vec![], vec![]));
    }
    let raw = embeddings_of_genus(g, t, budget)?;
    if raw.iter().map(width_upto3).max().unwrap_or(3) != 1 {
        return Ok((vec![], vec![]));
    }
    let mut v1 = BTreeSet::new();
    let mut splits: BTreeMap<(usize, Vec<usize>), Graph> = BTreeMap::new();
    for m in &raw {
        for nz in enumerate_nooses(m, 1) {
            let cut = cut_along(m, &nz)?;
            let (u, moved) = split_key(&cut, g.n());
            v1.insert(u);
            splits.entry((u, moved)).or_insert_with(|| {
                let mut s = cut.map.graph().clone();
                s.set_mark(u, h(&[g.mark(u), SPLIT_ROLE]));
                s.set_mark(g.n(), h(&[g.mark(u), SPLIT_ROLE]));
                s
            });
        }
    }
    let splits = splits.into_iter().map(|((vertex, moved), graph)| Split { vertex, moved, graph }).collect();
    Ok((v1.into_iter().collect(), splits))
}

/// Matches two families of leaves by canonical code: isomorphic when the
/// code multisets agree. The witness maps leaf `i` of the first family to
/// its partner in the second.
pub fn finish_step6(pieces1: &[Graph], pieces2: &[Graph], gmax: usize, budget: &Budget) -> Result<IsoVerdict> {
    let e = Engine::new(gmax, budget);
    let codes = |ps: &[Graph]| -> Result<Vec<(CanonicalCode, usize)>> {
        let mut v = Vec::new();
        for (i, p) in ps.iter().enumerate() {
            v.push((e.canonical_labeling(p)?.0, i));
        }
        v.sort();
        Ok(v)
    };
    let (a, b) = (codes(pieces1)?, codes(pieces2)?);
    let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.0 == y.0);
    let witness = same.then(|| {
        let mut w = vec![0; a.len()];
        a.iter().zip(&b).for_each(|(x, y)| w[x.1] = y.1);
        w
    });
    Ok(IsoVerdict { isomorphic: same, witness, trace: e.take_trace() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{algotorus_ring, fige, figa, fw1_gadget, shuffled};
    use crate::graph::tests::complete;
    use rand::SeedableRng;

    fn k33() -> Graph {
        Graph::from_edges(6, &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)])
    }

    fn prism() -> Graph {
        Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)])
    }

    fn budget() -> Budget {
        Budget::new(Budget::DEFAULT)
    }

    fn check_invariant(g: &Graph, gmax: usize, rounds: usize, seed: u64) {
        let b = budget();
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let base = canonical_graph_code(g, gmax, &b).unwrap();
        for _ in 0..rounds {
            let (h, _) = shuffled(g, &mut rng);
            let v = isomorphic(g, &h, gmax, &b).unwrap();
            assert!(v.isomorphic);
            assert!(verify_witness(g, &h, v.witness.as_ref().unwrap()));
            assert_eq!(canonical_graph_code(&h, gmax, &b).unwrap(), base);
        }
    }

    #[test]
    fn small_examples() {
        let b = budget();
        assert!(!isomorphic(&k33(), &prism(), 1, &b).unwrap().isomorphic);
        check_invariant(&complete(5), 1, 5, 1);
        check_invariant(&k33(), 1, 5, 2);
        check_invariant(&prism(), 0, 5, 3);
        assert!(matches!(isomorphic(&complete(6), &complete(6), 0, &b), Err(Error::GenusTooLarge(0))));
    }

    #[test]
    fn marks_matter() {
        let b = budget();
        let mut p = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let mut q = p.clone();
        p.set_mark(0, 1);
        q.set_mark(1, 1);
        assert!(!isomorphic(&p, &q, 0, &b).unwrap().isomorphic);
    }

    #[test]
    fn non_three_connected_shapes() {
        // K5 with a pendant triangle vs K5 with a pendant path
        let mut a = complete(5);
        let x = a.add_vertex();
        let y = a.add_vertex();
        a.add_edge(0, x);
        a.add_edge(x, y);
        a.add_edge(y, 0);
        let mut c = complete(5);
        let x = c.add_vertex();
        let y = c.add_vertex();
        c.add_edge(0, x);
        c.add_edge(x, y);
        c.add_edge(y, 1);
        let b = budget();
        assert!(!isomorphic(&a, &c, 2, &b).unwrap().isomorphic);
        check_invariant(&a, 2, 5, 4);
        check_invariant(&c, 2, 5, 5);
        let s = reduce_step1(&a, &c, 2, &b).unwrap();
        assert_eq!(s.nonplanar1.len(), 1);
        assert_eq!(s.decided, Some(false));
    }

    #[test]
    fn family_routes() {
        let b = budget();
        assert_eq!(plan_case(&complete(6), 1, &b).unwrap().case, CaseTag::Polyhedral);
        assert_eq!(plan_case(&figa(0), 2, &b).unwrap().case, CaseTag::Facewidth2Degenerate);
        assert_eq!(plan_case(&fw1_gadget(4, 3), 2, &b).unwrap().case, CaseTag::Facewidth1);
        check_invariant(&figa(0), 2, 3, 6);
        check_invariant(&fige(3).0, 2, 3, 7);
        check_invariant(&algotorus_ring(3), 2, 2, 8);
        check_invariant(&fw1_gadget(4, 3), 2, 3, 9);
    }

    #[test]
    fn fige_pair_is_the_tube() {
        let b = budget();
        let (g, lab) = fige(3);
        let pairs = case_facewidth2(&g, 2, &b).unwrap();
        let tube: BTreeSet<usize> = [lab.cd.0, lab.cd.1, lab.ef.0, lab.ef.1]
            .into_iter()
            .chain(lab.inner.iter().flat_map(|p| [p.0, p.1]))
            .collect();
        let exact = pairs.iter().filter(|p| p.l_vertices.iter().copied().collect::<BTreeSet<_>>() == tube).count();
        assert!(exact > 0);
    }
}
