//! Canonical codes for marked maps: a breadth-first flag traversal from every
//! admissible start flag, keeping the lexicographically least word.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::map::CombinatorialMap;

const SCHEME: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Reflections allowed.
    Free,
    /// Only orientation-preserving correspondences (orientable maps).
    Oriented,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    pub words: Vec<u64>,
}

impl CanonicalCode {
    pub fn scheme(&self) -> u64 {
        SCHEME
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.words.iter().flat_map(|w| w.to_be_bytes()).collect()
    }

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for b in self.to_bytes() {
            let _ = write!(s, "{b:02x}");
        }
        s
    }
}

/// Result of a canonical traversal.
#[derive(Clone, Debug)]
pub struct MapCanon {
    pub code: CanonicalCode,
    /// Vertices in first-visit order of the optimal traversal.
    pub vertex_order: Vec<usize>,
    /// Flags in traversal order of the optimal traversal.
    pub flag_order: Vec<usize>,
}

struct Walker<'a> {
    m: &'a CombinatorialMap,
    colors: Option<&'a [u64]>,
    num: Vec<u32>,
    stamp: Vec<u32>,
    epoch: u32,
    queue: Vec<usize>,
    word: Vec<u64>,
}

impl<'a> Walker<'a> {
    fn new(m: &'a CombinatorialMap, colors: Option<&'a [u64]>) -> Self {
        let nf = 4 * m.m();
        Walker {
            m,
            colors,
            num: vec![0; nf],
            stamp: vec![0; nf],
            epoch: 0,
            queue: Vec::with_capacity(nf),
            word: Vec::with_capacity(5 * nf),
        }
    }

    #[inline]
    fn number(&mut self, f: usize) -> u64 {
        if self.stamp[f] != self.epoch {
            self.stamp[f] = self.epoch;
            self.num[f] = self.queue.len() as u32;
            self.queue.push(f);
        }
        self.num[f] as u64
    }

    /// Runs from `start`, aborting as soon as the word exceeds `best`.
    /// Returns the comparison of the produced word with `best`.
    fn run(&mut self, start: usize, best: Option<&[u64]>) -> Ordering {
        self.epoch += 1;
        self.queue.clear();
        self.word.clear();
        self.number(start);
        let mut state = if best.is_some() { Ordering::Equal } else { Ordering::Less };
        let mut head = 0;
        while head < self.queue.len() {
            let f = self.queue[head];
            head += 1;
            let d = f / 2;
            let a0 = self.m.alpha0(f);
            let a1 = self.m.alpha1(f);
            let w0 = self.number(a0);
            let w1 = self.number(a1);
            let w2 = self.number(f ^ 1);
            let mark = self.m.graph().mark(self.m.origin(d));
            let col = self.colors.map_or(0, |c| c[d]);
            for w in [w0, w1, w2, mark, col] {
                if state == Ordering::Equal {
                    let b = best.unwrap()[self.word.len()];
                    match w.cmp(&b) {
                        Ordering::Greater => return Ordering::Greater,
                        Ordering::Less => state = Ordering::Less,
                        Ordering::Equal => {}
                    }
                }
                self.word.push(w);
            }
        }
        state
    }
}

/// Isomorphism-invariant key of a start flag; only flags with the least key
/// are tried.
fn start_keys(m: &CombinatorialMap, colors: Option<&[u64]>) -> Vec<(u64, usize, usize, u64)> {
    let faces = m.faces();
    let mut flen = vec![0usize; m.darts()];
    for f in &faces {
        for &c in &f.corners {
            flen[c] = f.corners.len();
        }
    }
    let deg: Vec<usize> = (0..m.n()).map(|v| m.rotation(v).len()).collect();
    (0..4 * m.m())
        .map(|f| {
            let d = f / 2;
            let v = m.origin(d);
            (m.graph().mark(v), deg[v], flen[m.corner_of_flag(f)], colors.map_or(0, |c| c[d]))
        })
        .collect()
}

/// Canonical form of a connected map, optionally with a color per dart.
pub fn canonical_form(m: &CombinatorialMap, mode: Mode, colors: Option<&[u64]>) -> MapCanon {
    let header = |extra: u64| vec![SCHEME, m.n() as u64, m.m() as u64, extra];
    if m.m() == 0 {
        let mut words = header(0);
        words.extend(m.graph().marks().iter().copied());
        return MapCanon { code: CanonicalCode { words }, vertex_order: (0..m.n()).collect(), flag_order: vec![] };
    }
    let oriented = mode == Mode::Oriented && m.is_orientable();
    let normalized;
    let work = if oriented {
        normalized = m.normalized();
        &normalized
    } else {
        m
    };
    let keys = start_keys(work, colors);
    let least = *keys
        .iter()
        .enumerate()
        .filter(|(f, _)| !oriented || f % 2 == 0)
        .map(|(_, k)| k)
        .min()
        .expect("map has flags");
    let mut walker = Walker::new(work, colors);
    let mut best: Option<(Vec<u64>, usize)> = None;
    for f in 0..keys.len() {
        if (oriented && f % 2 == 1) || keys[f] != least {
            continue;
        }
        let ord = walker.run(f, best.as_ref().map(|b| b.0.as_slice()));
        if ord == Ordering::Less {
            best = Some((std::mem::take(&mut walker.word), f));
        }
    }
    let (word, start) = best.expect("at least one start");
    walker.run(start, None);
    let flag_order = walker.queue.clone();
    let mut seen = vec![false; m.n()];
    let mut vertex_order = Vec::with_capacity(m.n());
    for &f in &flag_order {
        let v = m.origin(f / 2);
        if !seen[v] {
            seen[v] = true;
            vertex_order.push(v);
        }
    }
    let mut words = header(oriented as u64);
    words.extend([least.0, least.1 as u64, least.2 as u64, least.3]);
    words.extend(word);
    MapCanon { code: CanonicalCode { words }, vertex_order, flag_order }
}

pub fn canonical_code(m: &CombinatorialMap, mode: Mode) -> CanonicalCode {
    canonical_form(m, mode, None).code
}

/// A flag bijection `a -> b` preserving the three involutions and marks.
pub fn maps_isomorphic(a: &CombinatorialMap, b: &CombinatorialMap, mode: Mode) -> Option<Vec<usize>> {
    if a.n() != b.n() || a.m() != b.m() || !a.graph().is_connected() || !b.graph().is_connected() {
        return None;
    }
    let ca = canonical_form(a, mode, None);
    let cb = canonical_form(b, mode, None);
    if ca.code != cb.code {
        return None;
    }
    let mut map = vec![usize::MAX; 4 * a.m()];
    for (x, y) in ca.flag_order.iter().zip(&cb.flag_order) {
        map[*x] = *y;
    }
    Some(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::map::tests::{k4_planar, one_loop, torus_grid};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};

    fn random_relabel(m: &CombinatorialMap, rng: &mut impl Rng) -> CombinatorialMap {
        let mut perm: Vec<usize> = (0..m.n()).collect();
        perm.shuffle(rng);
        let mut eperm: Vec<usize> = (0..m.m()).collect();
        eperm.shuffle(rng);
        let flip: Vec<bool> = (0..m.m()).map(|_| rng.gen()).collect();
        m.relabel_full(&perm, &eperm, &flip)
    }

    #[test]
    fn invariant_under_relabeling() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for m in [k4_planar(), one_loop(), torus_grid(3, 4), torus_grid(3, 3).switch(1)] {
            let c = canonical_code(&m, Mode::Free);
            for _ in 0..20 {
                let r = random_relabel(&m, &mut rng);
                assert_eq!(canonical_code(&r, Mode::Free), c);
                let iso = maps_isomorphic(&m, &r, Mode::Free).unwrap();
                for f in 0..4 * m.m() {
                    assert_eq!(iso[m.alpha0(f)], r.alpha0(iso[f]));
                    assert_eq!(iso[m.alpha1(f)], r.alpha1(iso[f]));
                    assert_eq!(iso[f ^ 1], iso[f] ^ 1);
                }
            }
        }
    }

    #[test]
    fn tetrahedron_is_amphichiral() {
        let m = k4_planar();
        let mir = m.mirror();
        assert_eq!(canonical_code(&m, Mode::Free), canonical_code(&mir, Mode::Free));
        assert_eq!(canonical_code(&m, Mode::Oriented), canonical_code(&mir, Mode::Oriented));
    }

    #[test]
    fn chiral_map_distinguished_in_oriented_mode() {
        // torus grid 3x4 with a marked L-shaped triple has no reflection symmetry
        let mut marks = vec![0; 12];
        marks[0] = 1;
        marks[1] = 2;
        marks[4] = 3;
        let m = torus_grid(3, 4).with_marks(&marks);
        let mir = m.mirror();
        assert_eq!(canonical_code(&m, Mode::Free), canonical_code(&mir, Mode::Free));
        assert_ne!(canonical_code(&m, Mode::Oriented), canonical_code(&mir, Mode::Oriented));
    }

    #[test]
    fn marks_change_code() {
        let m = k4_planar();
        let mut marks = vec![0; 4];
        marks[2] = 1;
        assert_ne!(canonical_code(&m, Mode::Free), canonical_code(&m.with_marks(&marks), Mode::Free));
    }

    #[test]
    fn different_maps_differ() {
        let a = torus_grid(3, 4);
        let b = torus_grid(2, 6);
        assert_ne!(canonical_code(&a, Mode::Free), canonical_code(&b, Mode::Free));
        let g = Graph::from_edges(2, &[(0, 1)]);
        let e = CombinatorialMap::new(g, vec![vec![0], vec![1]], vec![1]).unwrap();
        assert!(maps_isomorphic(&e, &k4_planar(), Mode::Free).is_none());
    }

    #[test]
    fn vertex_order_is_a_permutation() {
        let m = torus_grid(3, 4);
        let c = canonical_form(&m, Mode::Free, None);
        let mut o = c.vertex_order.clone();
        o.sort_unstable();
        assert_eq!(o, (0..12).collect::<Vec<_>>());
        assert_eq!(c.code.to_hex().len(), c.code.words.len() * 16);
    }
}
