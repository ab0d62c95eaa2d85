//! Ground truth for tests: brute-force isomorphism by individualization
//! and refinement, exhaustive generation of small connected graphs, and
//! exhaustive noose listing over every labeled least-genus embedding.
//!
//! Nothing here calls into the isomorphism engine.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::{Duration, Instant};

use crate::budget::Budget;
use crate::embed::{enumerate_embeddings, EmbeddingQuery};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::map::{cut_along, cut_is_contractible, validate_noose, CombinatorialMap, Hit, Noose};

#[derive(Clone, Copy, Debug)]
pub struct OracleBudget {
    pub max_nodes: u64,
    pub time_limit: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_nodes: 50_000_000, time_limit: Duration::from_secs(120) }
    }
}

struct Meter {
    limit: OracleBudget,
    start: Instant,
    nodes: u64,
}

impl Meter {
    fn new(limit: OracleBudget) -> Self {
        Meter { limit, start: Instant::now(), nodes: 0 }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.limit.max_nodes {
            return Err(Error::OracleBudget(format!("more than {} search nodes", self.limit.max_nodes)));
        }
        if self.nodes % 1024 == 0 && self.start.elapsed() > self.limit.time_limit {
            return Err(Error::OracleBudget(format!("more than {:?}", self.limit.time_limit)));
        }
        Ok(())
    }
}

/// Edge multiplicities; loops counted on the diagonal.
fn matrix(g: &Graph) -> Vec<Vec<u32>> {
    let mut a = vec![vec![0; g.n()]; g.n()];
    for &(u, v) in g.edges() {
        a[u][v] += 1;
        if u != v {
            a[v][u] += 1;
        }
    }
    a
}

type Sig = (usize, u32, Vec<(usize, u32)>);

fn signature(a: &[Vec<u32>], c: &[usize], v: usize) -> Sig {
    let mut nb: Vec<(usize, u32)> = (0..a.len()).filter(|&w| w != v && a[v][w] > 0).map(|w| (c[w], a[v][w])).collect();
    nb.sort_unstable();
    (c[v], a[v][v], nb)
}

fn count_colors(c: &[usize]) -> usize {
    c.iter().collect::<BTreeSet<_>>().len()
}

/// Joint colour refinement of two graphs to a common stable partition.
/// Colour ids depend only on the signatures, so they name the same
/// classes in both graphs. False when the class sizes differ.
fn refine(a: &[Vec<u32>], b: &[Vec<u32>], ca: &mut Vec<usize>, cb: &mut Vec<usize>) -> bool {
    loop {
        let before = count_colors(ca);
        let sa: Vec<Sig> = (0..a.len()).map(|v| signature(a, ca, v)).collect();
        let sb: Vec<Sig> = (0..b.len()).map(|v| signature(b, cb, v)).collect();
        let ids: BTreeMap<&Sig, usize> = {
            let all: BTreeSet<&Sig> = sa.iter().chain(&sb).collect();
            all.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
        };
        *ca = sa.iter().map(|s| ids[s]).collect();
        *cb = sb.iter().map(|s| ids[s]).collect();
        let mut ha = ca.clone();
        let mut hb = cb.clone();
        ha.sort_unstable();
        hb.sort_unstable();
        if ha != hb {
            return false;
        }
        if count_colors(ca) == before {
            return true;
        }
    }
}

/// Smallest non-singleton colour class, least colour first.
fn target_cell(c: &[usize]) -> Option<usize> {
    let mut size: BTreeMap<usize, usize> = BTreeMap::new();
    c.iter().for_each(|&x| *size.entry(x).or_default() += 1);
    size.into_iter().filter(|x| x.1 > 1).min_by_key(|&(col, s)| (s, col)).map(|x| x.0)
}

fn initial_colors(g1: &Graph, g2: &Graph) -> (Vec<usize>, Vec<usize>) {
    let ids: BTreeMap<u64, usize> = g1.marks().iter().chain(g2.marks()).copied().collect::<BTreeSet<_>>().into_iter().zip(0..).collect();
    (g1.marks().iter().map(|m| ids[m]).collect(), g2.marks().iter().map(|m| ids[m]).collect())
}

/// A mark-preserving isomorphism `g1 -> g2` (`f[v]` is the image of `v`),
/// or `None`. Multigraphs and loops are compared with multiplicity.
pub fn brute_iso(g1: &Graph, g2: &Graph, limit: OracleBudget) -> Result<Option<Vec<usize>>> {
    if g1.n() != g2.n() || g1.m() != g2.m() {
        return Ok(None);
    }
    let (a, b) = (matrix(g1), matrix(g2));
    let (ca, cb) = initial_colors(g1, g2);
    let mut meter = Meter::new(limit);
    search(&a, &b, ca, cb, &mut meter)
}

fn search(a: &[Vec<u32>], b: &[Vec<u32>], mut ca: Vec<usize>, mut cb: Vec<usize>, meter: &mut Meter) -> Result<Option<Vec<usize>>> {
    meter.tick()?;
    if !refine(a, b, &mut ca, &mut cb) {
        return Ok(None);
    }
    let n = a.len();
    let Some(cell) = target_cell(&ca) else {
        let mut f = vec![0; n];
        for v in 0..n {
            f[v] = cb.iter().position(|&x| x == ca[v]).expect("same colours");
        }
        let ok = (0..n).all(|u| (0..n).all(|v| a[u][v] == b[f[u]][f[v]]));
        return Ok(ok.then_some(f));
    };
    let fresh = n + 1 + ca.iter().max().copied().unwrap_or(0);
    let v = ca.iter().position(|&x| x == cell).unwrap();
    for w in (0..n).filter(|&w| cb[w] == cell) {
        let mut ca2 = ca.clone();
        let mut cb2 = cb.clone();
        ca2[v] = fresh;
        cb2[w] = fresh;
        if let Some(f) = search(a, b, ca2, cb2, meter)? {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

/// Certificate: least adjacency listing over all leaves of the refinement
/// tree. Equal certificates exactly for isomorphic graphs.
pub fn certificate(g: &Graph, limit: OracleBudget) -> Result<Vec<u64>> {
    let a = matrix(g);
    let (c, _) = initial_colors(g, g);
    let mut meter = Meter::new(limit);
    let mut best: Option<Vec<u64>> = None;
    cert_search(g, &a, c, &mut meter, &mut best)?;
    Ok(best.unwrap_or_default())
}

fn cert_search(g: &Graph, a: &[Vec<u32>], mut c: Vec<usize>, meter: &mut Meter, best: &mut Option<Vec<u64>>) -> Result<()> {
    meter.tick()?;
    let mut c2 = c.clone();
    refine(a, a, &mut c, &mut c2);
    let n = a.len();
    let Some(cell) = target_cell(&c) else {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&v| c[v]);
        let mut code = vec![n as u64];
        code.extend(order.iter().map(|&v| g.mark(v)));
        for i in 0..n {
            for j in i..n {
                code.push(a[order[i]][order[j]] as u64);
            }
        }
        if best.as_ref().map_or(true, |b| code < *b) {
            *best = Some(code);
        }
        return Ok(());
    };
    let fresh = n + 1 + c.iter().max().copied().unwrap_or(0);
    for v in (0..n).filter(|&v| c[v] == cell) {
        let mut c3 = c.clone();
        c3[v] = fresh;
        cert_search(g, a, c3, meter, best)?;
    }
    Ok(())
}

/// All connected simple graphs on `n` vertices up to isomorphism, by
/// adding a vertex to each graph on `n - 1` vertices in every way.
pub fn connected_graphs(n: usize) -> Vec<Graph> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Graph::new(1)];
    }
    let limit = OracleBudget::default();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for base in connected_graphs(n - 1) {
        for subset in 1u32..(1 << (n - 1)) {
            let mut g = Graph::new(n);
            for &(u, v) in base.edges() {
                g.add_edge(u, v);
            }
            for u in (0..n - 1).filter(|&u| subset & (1 << u) != 0) {
                g.add_edge(u, n - 1);
            }
            let cert = certificate(&g, limit).expect("tiny graphs fit the oracle budget");
            if seen.insert(cert.clone()) {
                out.push((cert, g));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|x| x.1).collect()
}

/// One labeled least-genus embedding and its non-contractible nooses.
#[derive(Clone, Debug)]
pub struct EmbeddingNooses {
    pub map: CombinatorialMap,
    pub nooses: Vec<Noose>,
}

/// Every labeled embedding of least Euler genus (at most `gmax`) with all
/// of its non-contractible nooses of length at most `l`, found by trying
/// every corner combination. Nooses are listed once up to rotation and
/// reversal.
pub fn exhaustive_nooses(g: &Graph, gmax: usize, l: usize, budget: &Budget) -> Result<Vec<EmbeddingNooses>> {
    let mut maps = Vec::new();
    for t in 0..=gmax {
        let mut q = EmbeddingQuery::new(g, t);
        q.enumerate_all = true;
        maps = enumerate_embeddings(&q, budget)?.into_iter().filter(|m| m.total_euler_genus() == t).collect();
        if !maps.is_empty() {
            break;
        }
    }
    if maps.is_empty() {
        return Err(Error::GenusTooLarge(gmax));
    }
    let mut out = Vec::new();
    for m in maps {
        let nooses = if m.total_euler_genus() == 0 { Vec::new() } else { map_nooses(&m, l, budget)? };
        out.push(EmbeddingNooses { map: m, nooses });
    }
    Ok(out)
}

fn reversed(c: &Noose) -> Noose {
    let mut hits: Vec<Hit> = c.hits.iter().rev().map(|h| Hit { vertex: h.vertex, enter: h.leave, leave: h.enter }).collect();
    let i = (0..hits.len()).min_by_key(|&i| hits[i].vertex).unwrap();
    hits.rotate_left(i);
    Noose { hits }
}

/// All non-contractible nooses of one map with length at most `l`.
pub fn map_nooses(m: &CombinatorialMap, l: usize, budget: &Budget) -> Result<Vec<Noose>> {
    let cf = m.corner_faces();
    let mut found = BTreeSet::new();
    for k in 1..=l.min(m.n()) {
        let mut verts = Vec::new();
        let mut hits = Vec::new();
        for v0 in 0..m.n() {
            verts.push(v0);
            grow(m, &cf, k, &mut verts, &mut hits, &mut found, budget)?;
            verts.pop();
        }
    }
    Ok(found.into_iter().collect())
}

/// Extends the vertex sequence (first vertex least) and picks corners.
fn grow(
    m: &CombinatorialMap,
    cf: &[usize],
    k: usize,
    verts: &mut Vec<usize>,
    hits: &mut Vec<Hit>,
    found: &mut BTreeSet<Noose>,
    budget: &Budget,
) -> Result<()> {
    budget.tick()?;
    if verts.len() < k {
        for w in verts[0] + 1..m.n() {
            if !verts.contains(&w) {
                verts.push(w);
                grow(m, cf, k, verts, hits, found, budget)?;
                verts.pop();
            }
        }
        return Ok(());
    }
    let i = hits.len();
    if i == k {
        let c = Noose { hits: hits.clone() };
        if cf[c.hits[k - 1].leave] != cf[c.hits[0].enter] || validate_noose(m, &c).is_err() {
            return Ok(());
        }
        let r = reversed(&c);
        if r < c && found.contains(&r) {
            return Ok(());
        }
        if !cut_is_contractible(&cut_along(m, &c)?) {
            found.insert(c.min(r));
        }
        return Ok(());
    }
    let v = verts[i];
    for &enter in m.rotation(v) {
        if i > 0 && cf[enter] != cf[hits[i - 1].leave] {
            continue;
        }
        for &leave in m.rotation(v) {
            if leave == enter {
                continue;
            }
            hits.push(Hit { vertex: v, enter, leave });
            grow(m, cf, k, verts, hits, found, budget)?;
            hits.pop();
        }
    }
    Ok(())
}

/// Vertex sets of all nooses found, across embeddings.
pub fn noose_vertex_sets(found: &[EmbeddingNooses]) -> BTreeSet<Vec<usize>> {
    found
        .iter()
        .flat_map(|e| e.nooses.iter().map(|c| {
            let mut v = c.vertices();
            v.sort_unstable();
            v
        }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{fw1_gadget, shuffled};
    use crate::graph::tests::complete;
    use rand::SeedableRng;

    fn lim() -> OracleBudget {
        OracleBudget::default()
    }

    #[test]
    fn brute_small() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        let k5 = complete(5);
        let (h, _) = shuffled(&k5, &mut rng);
        let f = brute_iso(&k5, &h, lim()).unwrap().unwrap();
        assert!(k5.edges().iter().all(|&(u, v)| h.has_edge(f[u], f[v])));
        let k33 = Graph::from_edges(6, &[(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)]);
        let prism = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]);
        assert_eq!(brute_iso(&k33, &prism, lim()).unwrap(), None);
        let mut p = Graph::from_edges(3, &[(0, 1), (1, 2)]);
        let mut q = p.clone();
        p.set_mark(0, 7);
        q.set_mark(1, 7);
        assert_eq!(brute_iso(&p, &q, lim()).unwrap(), None);
        // multiplicities count
        let a = Graph::from_edges(3, &[(0, 1), (0, 1), (1, 2)]);
        let b = Graph::from_edges(3, &[(0, 1), (1, 2), (1, 2)]);
        let c = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(brute_iso(&a, &b, lim()).unwrap().is_some());
        assert!(brute_iso(&a, &c, lim()).unwrap().is_none());
    }

    #[test]
    fn budget_is_an_error() {
        let k = complete(6);
        let tight = OracleBudget { max_nodes: 2, time_limit: Duration::from_secs(10) };
        assert!(matches!(brute_iso(&k, &k, tight), Err(Error::OracleBudget(_))));
    }

    #[test]
    fn graph_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| connected_graphs(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn nooses_of_small_fixtures() {
        let b = Budget::new(Budget::DEFAULT);
        let planar = exhaustive_nooses(&complete(4), 2, 2, &b).unwrap();
        assert!(planar.iter().all(|e| e.nooses.is_empty()));
        let found = exhaustive_nooses(&fw1_gadget(4, 3), 2, 1, &b).unwrap();
        // the merged apex is the only vertex on a one-vertex noose
        let sets = noose_vertex_sets(&found);
        assert_eq!(sets.into_iter().collect::<Vec<_>>(), vec![vec![12]]);
    }
}
