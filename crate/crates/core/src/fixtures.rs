//! Generators for the test families: flip tori, a wheel with a handle tube,
//! rings of cylinders, vertex-identification gadgets, random planar
//! triangulations and their augmentations.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{connectivity, Graph};
use crate::map::CombinatorialMap;

/// The lexicographic product of a cycle of length `k + 4` with two
/// independent vertices: a 4-connected torus quadrangulation whose every
/// consecutive pair of layers can be flipped independently. Layer `i` is
/// vertices `2i` and `2i + 1`.
pub fn figa(k: usize) -> Graph {
    let l = k + 4;
    let mut g = Graph::new(2 * l);
    for i in 0..l {
        let j = (i + 1) % l;
        for a in 0..2 {
            for b in 0..2 {
                g.add_edge(2 * i + a, 2 * j + b);
            }
        }
    }
    g
}

/// Named vertices of [`fige`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FigeLabels {
    /// One end of the tube on the wheel rim.
    pub cd: (usize, usize),
    /// The other end.
    pub ef: (usize, usize),
    /// Pairs inside the tube, from the `cd` end.
    pub inner: Vec<(usize, usize)>,
}

/// A wheel on six rim vertices with a tube of `t >= 1` complete-bipartite
/// segments joining the rim edges `(c, d)` and `(e, f)`. The tube needs a
/// handle, and every pair inside it is a two-vertex noose; the tube is the
/// only flexible part.
pub fn fige(t: usize) -> (Graph, FigeLabels) {
    assert!(t >= 1);
    let mut g = Graph::new(7);
    for i in 0..6 {
        g.add_edge(i, (i + 1) % 6);
        g.add_edge(6, i);
    }
    let (c, d, e, f) = (0, 1, 3, 4);
    let mut prev = (c, d);
    let mut inner = Vec::new();
    for _ in 1..t {
        let p = (g.add_vertex(), g.add_vertex());
        inner.push(p);
        join_pairs(&mut g, prev, p);
        prev = p;
    }
    join_pairs(&mut g, prev, (e, f));
    (g, FigeLabels { cd: (c, d), ef: (e, f), inner })
}

fn join_pairs(g: &mut Graph, a: (usize, usize), b: (usize, usize)) {
    for x in [a.0, a.1] {
        for y in [b.0, b.1] {
            g.add_edge(x, y);
        }
    }
}

/// A ring of `l >= 3` annular pieces glued along vertex pairs. Piece `i`
/// has entry pair `(5i, 5i + 1)` inside a triangle on `5i + 2 .. 5i + 4`
/// and exit pair equal to the next entry outside it, so the intended
/// embedding closes up on the torus.
pub fn algotorus_ring(l: usize) -> Graph {
    assert!(l >= 3);
    let mut g = Graph::new(5 * l);
    for i in 0..l {
        let (a, b) = (5 * i, 5 * i + 1);
        let r = [5 * i + 2, 5 * i + 3, 5 * i + 4];
        let (c, d) = (5 * ((i + 1) % l), 5 * ((i + 1) % l) + 1);
        for (u, v) in [(r[0], r[1]), (r[1], r[2]), (r[2], r[0]), (a, r[0]), (a, r[1]), (b, r[1]), (b, r[2])] {
            g.add_edge(u, v);
        }
        for (u, v) in [(c, r[1]), (c, r[2]), (d, r[2]), (d, r[0])] {
            g.add_edge(u, v);
        }
    }
    g
}

/// Identifies vertices `u` and `w` of `base` (the merged vertex keeps the
/// id `u`; later ids shift down).
pub fn identify(base: &Graph, u: usize, w: usize) -> Graph {
    assert!(u != w && !base.has_edge(u, w));
    let id = |x: usize| {
        if x == w {
            u.min(w)
        } else {
            let x = if x == u { u.min(w) } else { x };
            if x > w {
                x - 1
            } else {
                x
            }
        }
    };
    let mut g = Graph::new(base.n() - 1);
    let mut seen = std::collections::BTreeSet::new();
    for &(a, b) in base.edges() {
        let (x, y) = (id(a), id(b));
        if seen.insert((x.min(y), x.max(y))) {
            g.add_edge(x, y);
        }
    }
    g
}

/// The face-width one gadget: a tube of `rings >= 3` triangulated bands
/// of `k`-cycles, capped by two apexes that are then identified. Every
/// least-genus embedding has a one-vertex noose through the merged apex.
pub fn fw1_gadget(k: usize, rings: usize) -> Graph {
    assert!(k >= 3 && rings >= 3);
    let mut g = Graph::new(k * rings + 2);
    let (top, bot) = (k * rings, k * rings + 1);
    for j in 0..rings {
        for i in 0..k {
            g.add_edge(j * k + i, j * k + (i + 1) % k);
            if j + 1 < rings {
                g.add_edge(j * k + i, (j + 1) * k + i);
                g.add_edge(j * k + (i + 1) % k, (j + 1) * k + i);
            }
        }
    }
    for i in 0..k {
        g.add_edge(top, i);
        g.add_edge(bot, (rings - 1) * k + i);
    }
    identify(&g, top, bot)
}

/// One vertex with a single twisted loop: the projective plane.
pub fn one_loop() -> CombinatorialMap {
    let g = Graph::from_edges(1, &[(0, 0)]);
    CombinatorialMap::new(g, vec![vec![0, 1]], vec![-1]).expect("valid map")
}

/// `C_a x C_b` on the torus; vertex `(i, j)` is `i * b + j`.
pub fn torus_grid(a: usize, b: usize) -> CombinatorialMap {
    let id = |i: usize, j: usize| (i % a) * b + (j % b);
    let mut g = Graph::new(a * b);
    let mut right = vec![0; a * b];
    let mut down = vec![0; a * b];
    for i in 0..a {
        for j in 0..b {
            right[id(i, j)] = g.add_edge(id(i, j), id(i, j + 1));
            down[id(i, j)] = g.add_edge(id(i, j), id(i + 1, j));
        }
    }
    let mut rot = vec![Vec::new(); a * b];
    for i in 0..a {
        for j in 0..b {
            let v = id(i, j);
            let left = right[id(i, j + b - 1)];
            let up = down[id(i + a - 1, j)];
            rot[v] = vec![2 * right[v], 2 * down[v], 2 * left + 1, 2 * up + 1];
        }
    }
    CombinatorialMap::new(g, rot, vec![1; 2 * a * b]).expect("valid map")
}

/// Random planar triangulation on `n >= 3` vertices: random face splits
/// followed by random edge flips. Vertex ids are shuffled.
pub fn random_triangulation(n: usize, rng: &mut impl Rng) -> CombinatorialMap {
    assert!(n >= 3);
    // oriented triangles; each directed edge belongs to exactly one
    let mut tris: Vec<[usize; 3]> = vec![[0, 1, 2], [0, 2, 1]];
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    let set = |owner: &mut HashMap<(usize, usize), usize>, t: &[usize; 3], id: usize| {
        for i in 0..3 {
            owner.insert((t[i], t[(i + 1) % 3]), id);
        }
    };
    for (i, t) in tris.iter().enumerate() {
        set(&mut owner, t, i);
    }
    for x in 3..n {
        let fi = rng.gen_range(0..tris.len());
        let [a, b, c] = tris[fi];
        let t0 = [a, b, x];
        let t1 = [b, c, x];
        let t2 = [c, a, x];
        tris[fi] = t0;
        set(&mut owner, &t0, fi);
        tris.push(t1);
        set(&mut owner, &t1, tris.len() - 1);
        tris.push(t2);
        set(&mut owner, &t2, tris.len() - 1);
    }
    let mut deg = vec![0usize; n];
    for &(u, _) in owner.keys() {
        deg[u] += 1;
    }
    for _ in 0..4 * n {
        let fi = rng.gen_range(0..tris.len());
        let k = rng.gen_range(0..3);
        let t = tris[fi];
        let (u, v, w) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
        let fj = owner[&(v, u)];
        let s = tris[fj];
        let z = (0..3).map(|i| s[i]).find(|&y| y != u && y != v).unwrap();
        if w == z || owner.contains_key(&(w, z)) || deg[u] <= 3 || deg[v] <= 3 {
            continue;
        }
        // (u, v, w) and (v, u, z) become (w, z, v) and (z, w, u)
        owner.remove(&(u, v));
        owner.remove(&(v, u));
        let a = [w, z, v];
        let b = [z, w, u];
        tris[fi] = a;
        tris[fj] = b;
        set(&mut owner, &a, fi);
        set(&mut owner, &b, fj);
        deg[u] -= 1;
        deg[v] -= 1;
        deg[w] += 1;
        deg[z] += 1;
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    triangles_to_map(n, &tris, &perm)
}

/// Rotation system from oriented triangles; vertex `x` is renamed `perm[x]`.
fn triangles_to_map(n: usize, tris: &[[usize; 3]], perm: &[usize]) -> CombinatorialMap {
    // around v, after neighbor a comes the third vertex of the triangle
    // holding directed edge (v, a)... taken in reverse for a consistent turn
    let mut succ: HashMap<(usize, usize), usize> = HashMap::new();
    for t in tris {
        for i in 0..3 {
            let (v, a, b) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
            succ.insert((v, b), a);
        }
    }
    let mut g = Graph::new(n);
    let mut eid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pairs: Vec<(usize, usize)> = succ.keys().filter(|&&(u, v)| u < v).copied().collect();
    pairs.sort_unstable();
    for (u, v) in pairs {
        let e = g.add_edge(perm[u], perm[v]);
        eid.insert((u, v), e);
    }
    let mut rot = vec![Vec::new(); n];
    for v in 0..n {
        let start = *succ.keys().filter(|&&(x, _)| x == v).map(|(_, a)| a).min().unwrap();
        let mut a = start;
        loop {
            let e = eid[&(v.min(a), v.max(a))];
            rot[perm[v]].push(if perm[v] == g.edge(e).0 { 2 * e } else { 2 * e + 1 });
            a = succ[&(v, a)];
            if a == start {
                break;
            }
        }
    }
    let m = g.m();
    CombinatorialMap::new(g, rot, vec![1; m]).expect("triangulation rotation is valid")
}

/// Random 3-connected planar graph: a random triangulation with random
/// edges removed while 3-connectivity holds, `drop` attempts.
pub fn random_3conn_planar(n: usize, drop: usize, rng: &mut impl Rng) -> Graph {
    let mut g = random_triangulation(n, rng).into_graph();
    for _ in 0..drop {
        if g.m() == 0 {
            break;
        }
        let e = rng.gen_range(0..g.m());
        let keep: Vec<usize> = (0..g.m()).filter(|&f| f != e).collect();
        let h = g.edge_subgraph(&keep);
        if connectivity(&h, 3).unwrap_or(false) {
            g = h;
        }
    }
    g
}

/// Adds `extra` random edges between non-adjacent vertices.
pub fn augment(g: &Graph, extra: usize, rng: &mut impl Rng) -> Graph {
    let mut h = g.clone();
    let n = g.n();
    let mut added = 0;
    let mut tries = 0;
    while added < extra && tries < 1000 {
        tries += 1;
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && !h.has_edge(u, v) {
            h.add_edge(u, v);
            added += 1;
        }
    }
    h
}

/// A random relabeling of `g` with shuffled edge order and endpoint order;
/// returns the copy and the vertex permutation used (old to new).
pub fn shuffled(g: &Graph, rng: &mut impl Rng) -> (Graph, Vec<usize>) {
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(rng);
    let mut es: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| if rng.gen() { (perm[u], perm[v]) } else { (perm[v], perm[u]) })
        .collect();
    es.shuffle(rng);
    let mut h = Graph::from_edges(g.n(), &es);
    for v in 0..g.n() {
        h.set_mark(perm[v], g.mark(v));
    }
    (h, perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::embed::min_euler_genus;
    use rand::SeedableRng;

    #[test]
    fn triangulation_counts() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);
        for n in [3, 4, 10, 50] {
            let m = random_triangulation(n, &mut rng);
            assert_eq!(m.m(), 3 * n - 6);
            assert_eq!(m.euler_genus().unwrap(), 0);
            assert!(m.graph().is_simple());
        }
    }

    #[test]
    fn family_genera() {
        let b = Budget::default();
        assert_eq!(min_euler_genus(&figa(0), 3, &b).unwrap().unwrap().0, 2);
        let (g, _) = fige(3);
        assert_eq!(min_euler_genus(&g, 3, &b).unwrap().unwrap().0, 2);
        assert!(connectivity(&g, 3).unwrap());
        let r = algotorus_ring(3);
        assert!(connectivity(&r, 3).unwrap());
        assert_eq!(min_euler_genus(&r, 3, &b).unwrap().unwrap().0, 2);
        assert_eq!(min_euler_genus(&fw1_gadget(4, 3), 3, &b).unwrap().unwrap().0, 2);
    }
}
