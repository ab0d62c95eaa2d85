//! Embedding search: planarity, minimum Euler genus, extension of a fixed
//! sub-map, genus-critical subgraphs and exhaustive enumeration.

mod partial;
mod planar;
mod search;

use std::collections::BTreeMap;

pub use planar::planar_embed;

use crate::budget::Budget;
use crate::canon::{canonical_form, CanonicalCode, Mode};
use crate::error::{invalid, Error, Result};
use crate::facewidth::{face_width, FaceWidth};
use crate::graph::{blocks, Graph, Skeleton};
use crate::map::CombinatorialMap;
use search::{Flow, Search};

#[derive(Clone, Debug)]
pub struct EmbeddingQuery<'a> {
    pub graph: &'a Graph,
    pub max_genus: usize,
    pub fixed: Option<&'a CombinatorialMap>,
    pub min_face_width: Option<usize>,
    pub enumerate_all: bool,
}

impl<'a> EmbeddingQuery<'a> {
    pub fn new(graph: &'a Graph, max_genus: usize) -> Self {
        EmbeddingQuery { graph, max_genus, fixed: None, min_face_width: None, enumerate_all: false }
    }
}

/// Compact copy of the subgraph spanned by `edges`, with the vertex list.
fn spanned(g: &Graph, edges: &[usize]) -> (Graph, Vec<usize>) {
    let mut verts: Vec<usize> = edges.iter().flat_map(|&e| [g.edge(e).0, g.edge(e).1]).collect();
    verts.sort_unstable();
    verts.dedup();
    let mut pos = vec![usize::MAX; g.n()];
    verts.iter().enumerate().for_each(|(i, &v)| pos[v] = i);
    let mut h = Graph::new(verts.len());
    for &e in edges {
        let (u, v) = g.edge(e);
        h.add_edge(pos[u], pos[v]);
    }
    for (i, &v) in verts.iter().enumerate() {
        h.set_mark(i, g.mark(v));
    }
    (h, verts)
}

/// First embedding of genus at most `t` in search order.
fn first_of_genus(g: &Graph, t: usize, budget: &Budget) -> Result<Option<CombinatorialMap>> {
    let mut s = Search::new(g, None, t, false, true, budget)?;
    let mut found = None;
    s.run(&mut |pm| {
        found = Some(pm.to_map());
        Flow::Stop
    })?;
    Ok(found)
}

/// Least Euler genus of a block (given compact), with a witness.
fn block_genus(h: &Graph, gmax: usize, budget: &Budget) -> Result<Option<(usize, CombinatorialMap)>> {
    if let Some(m) = planar_embed(h) {
        return Ok(Some((0, m)));
    }
    for t in 1..=gmax {
        if let Some(m) = first_of_genus(h, t, budget)? {
            return Ok(Some((t, m)));
        }
    }
    Ok(None)
}

/// Euler genus of any graph as the sum over its blocks (isolated vertices
/// contribute nothing), with a witness map; `None` above `gmax`.
pub fn euler_genus_of(g: &Graph, gmax: usize, budget: &Budget) -> Result<Option<(usize, CombinatorialMap)>> {
    let mut total = 0;
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    let mut sig = vec![1i8; g.m()];
    for blk in blocks(g) {
        if g.edge(blk[0]).0 == g.edge(blk[0]).1 {
            return invalid("loops are not supported by the genus search");
        }
        let (h, verts) = spanned(g, &blk);
        let Some((t, m)) = block_genus(&h, gmax - total, budget)? else { return Ok(None) };
        total += t;
        for (i, &v) in verts.iter().enumerate() {
            rot[v].extend(m.rotation(i).iter().map(|&d| 2 * blk[d / 2] + d % 2));
        }
        for (i, &e) in blk.iter().enumerate() {
            sig[e] = m.sign(i);
        }
    }
    Ok(Some((total, CombinatorialMap::new(g.clone(), rot, sig)?)))
}

/// Least Euler genus `<= gmax` of a connected graph with a witness map.
/// Blocks are embedded separately and joined at cut vertices; a planar block
/// uses path insertion, a non-planar one the first map found by the search at
/// genus 1, 2, ... in search order.
pub fn min_euler_genus(g: &Graph, gmax: usize, budget: &Budget) -> Result<Option<(usize, CombinatorialMap)>> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    euler_genus_of(g, gmax, budget)
}

/// Every embedding of the connected loopless graph `g` with Euler genus
/// exactly `t`, one per mirror pair, in search order.
pub(crate) fn embeddings_of_genus(g: &Graph, t: usize, budget: &Budget) -> Result<Vec<CombinatorialMap>> {
    let mut out = Vec::new();
    let mut s = Search::new(g, None, t, true, true, budget)?;
    s.run(&mut |pm| {
        out.push(pm.to_map());
        Flow::Continue
    })?;
    Ok(out)
}

/// Keeps one map per isomorphism class (marks and dart colors respected),
/// sorted by canonical code.
pub(crate) fn dedup_maps(maps: Vec<CombinatorialMap>, colors: Option<&[u64]>) -> Vec<(CanonicalCode, CombinatorialMap)> {
    let mut by: BTreeMap<CanonicalCode, CombinatorialMap> = BTreeMap::new();
    for m in maps {
        let c = canonical_form(&m, Mode::Free, colors).code;
        by.entry(c).or_insert(m);
    }
    by.into_iter().collect()
}

/// All embeddings of genus at most `max_genus` meeting the face-width
/// bound, one per map isomorphism class, sorted by canonical code. With
/// `enumerate_all` every labeled embedding is kept (one per mirror pair),
/// in search order.
pub fn enumerate_embeddings(q: &EmbeddingQuery, budget: &Budget) -> Result<Vec<CombinatorialMap>> {
    if !q.graph.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut all = Vec::new();
    for t in 0..=q.max_genus {
        all.extend(embeddings_of_genus(q.graph, t, budget)?);
    }
    if let Some(k) = q.min_face_width {
        all.retain(|m| match face_width(m) {
            FaceWidth::Unbounded => true,
            FaceWidth::Finite(w) => w >= k,
        });
    }
    if q.enumerate_all {
        return Ok(all);
    }
    Ok(dedup_maps(all, None).into_iter().map(|(_, m)| m).collect())
}

/// Edge ids of `g` matching the edges of `sub` (same vertex ids), with a
/// flag telling whether the edge is reversed.
fn match_edges(g: &Graph, sub: &Graph) -> Result<Vec<(usize, bool)>> {
    if sub.n() != g.n() {
        return invalid("fixed sub-map must use the vertex ids of the graph");
    }
    let mut used = vec![false; g.m()];
    let mut out = Vec::new();
    for &(a, b) in sub.edges() {
        let hit = (0..g.m()).find(|&e| !used[e] && (g.edge(e) == (a, b) || g.edge(e) == (b, a)));
        let Some(e) = hit else { return invalid("fixed sub-map is not a subgraph") };
        used[e] = true;
        out.push((e, g.edge(e) != (a, b)));
    }
    Ok(out)
}

/// Extends the fixed sub-map to all of `q.graph` within Euler genus
/// `q.max_genus`, keeping the sub-map's rotations and signatures.
pub fn extend_embedding(q: &EmbeddingQuery, budget: &Budget) -> Result<Option<CombinatorialMap>> {
    let Some(fixed) = q.fixed else { return invalid("extension needs a fixed sub-map") };
    let g = q.graph;
    let matched = match_edges(g, fixed.graph())?;
    // rewrite the fixed map over the darts of g
    let mut sub = Graph::new(g.n());
    for e in 0..g.m() {
        sub.add_edge(g.edge(e).0, g.edge(e).1);
    }
    let dmap = |d: usize| {
        let (e, flip) = matched[d / 2];
        2 * e + ((d % 2) ^ flip as usize)
    };
    let mut rot: Vec<Vec<usize>> = (0..g.n()).map(|v| fixed.rotation(v).iter().map(|&d| dmap(d)).collect()).collect();
    let mut sig = vec![1i8; g.m()];
    let mut in_fixed = vec![false; g.m()];
    for (i, &(e, _)) in matched.iter().enumerate() {
        sig[e] = fixed.sign(i);
        in_fixed[e] = true;
    }
    // darts of other edges are appended only to satisfy map validity; the
    // loader keeps just the fixed ones
    for e in 0..g.m() {
        if !in_fixed[e] {
            rot[g.edge(e).0].push(2 * e);
            rot[g.edge(e).1].push(2 * e + 1);
        }
    }
    let full = CombinatorialMap::new(sub, rot, sig)?;
    let edges: Vec<usize> = matched.iter().map(|&(e, _)| e).collect();
    let sub_graph = g.edge_subgraph(&edges);
    let span: Vec<usize> = (0..g.n()).filter(|&v| sub_graph.degrees()[v] > 0).collect();
    if !span.is_empty() && sub_graph.induced(&span).0.components().len() > 1 {
        return invalid("fixed sub-map must be connected");
    }
    let mut s = Search::new(g, Some((&full, &edges)), q.max_genus, false, false, budget)?;
    let mut found = None;
    s.run(&mut |pm| {
        found = Some(pm.to_map());
        Flow::Stop
    })?;
    Ok(found)
}

/// Greedy edge deletion in increasing edge id: an edge is dropped whenever
/// the rest still has Euler genus `genus`.
pub fn genus_critical_subgraph(g: &Graph, genus: usize, budget: &Budget) -> Result<Skeleton> {
    if genus == 0 {
        return invalid("genus-critical subgraphs need positive genus");
    }
    let mut keep: Vec<bool> = vec![true; g.m()];
    for e in 0..g.m() {
        keep[e] = false;
        let rest: Vec<usize> = (0..g.m()).filter(|&f| keep[f]).collect();
        let h = g.edge_subgraph(&rest);
        let lower = euler_genus_of(&h, genus - 1, budget)?.is_some();
        if lower {
            keep[e] = true;
        }
    }
    let edges: Vec<usize> = (0..g.m()).filter(|&f| keep[f]).collect();
    Ok(Skeleton::from_edges(g, &edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub fn complete(n: usize) -> Graph {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn k33() -> Graph {
        let mut g = Graph::new(6);
        for u in 0..3 {
            for v in 3..6 {
                g.add_edge(u, v);
            }
        }
        g
    }

    #[test]
    fn planar_examples() {
        assert_eq!(planar_embed(&complete(4)).unwrap().num_faces(), 4);
        assert!(planar_embed(&complete(5)).is_none());
        assert!(planar_embed(&k33()).is_none());
        // 3x3 grid
        let mut g = Graph::new(9);
        for i in 0..3 {
            for j in 0..3 {
                if j < 2 {
                    g.add_edge(3 * i + j, 3 * i + j + 1);
                }
                if i < 2 {
                    g.add_edge(3 * i + j, 3 * i + j + 3);
                }
            }
        }
        let m = planar_embed(&g).unwrap();
        assert_eq!(m.num_faces(), g.m() - g.n() + 2);
        assert_eq!(m.euler_genus().unwrap(), 0);
    }

    #[test]
    fn small_genera() {
        let b = Budget::default();
        for (g, want) in [(complete(5), 1), (k33(), 1), (complete(6), 1), (complete(4), 0)] {
            let (t, m) = min_euler_genus(&g, 3, &b).unwrap().unwrap();
            assert_eq!(t, want);
            assert_eq!(m.euler_genus().unwrap(), want);
            assert_eq!(m.graph(), &g);
        }
        assert!(min_euler_genus(&complete(5), 0, &b).unwrap().is_none());
    }

    #[test]
    fn budget_is_reported() {
        let b = Budget::new(10);
        assert!(matches!(min_euler_genus(&complete(6), 2, &b), Err(Error::Budget(10))));
    }

    #[test]
    fn enumerate_k4_planar_unique() {
        let b = Budget::default();
        let maps = enumerate_embeddings(&EmbeddingQuery::new(&complete(4), 0), &b).unwrap();
        assert_eq!(maps.len(), 1);
    }

    #[test]
    fn identity_extension() {
        let b = Budget::default();
        let g = complete(5);
        let (_, m) = min_euler_genus(&g, 1, &b).unwrap().unwrap();
        let q = EmbeddingQuery { fixed: Some(&m), ..EmbeddingQuery::new(&g, 1) };
        let ext = extend_embedding(&q, &b).unwrap().unwrap();
        assert!(ext.same_rotations(&m));
    }

    #[test]
    fn critical_subgraph_drops_pendant() {
        let b = Budget::default();
        let mut g = complete(5);
        let a = g.add_vertex();
        let c = g.add_vertex();
        g.add_edge(0, a);
        g.add_edge(a, c);
        let k = genus_critical_subgraph(&g, 1, &b).unwrap();
        assert_eq!(k.edges, (0..10).collect::<Vec<_>>());
    }
}
