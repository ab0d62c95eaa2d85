use crate::graph::Graph;
use crate::map::CombinatorialMap;

const NONE: usize = usize::MAX;

/// A rotation system over a subset of the edges of a fixed graph.
#[derive(Clone, Debug)]
pub(crate) struct PartialMap<'g> {
    pub g: &'g Graph,
    next: Vec<usize>,
    prev: Vec<usize>,
    pub sig: Vec<i8>,
    pub present: Vec<bool>,
    some_dart: Vec<usize>,
    pub deg: Vec<usize>,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'g> PartialMap<'g> {
    pub fn new(g: &'g Graph) -> Self {
        let d = 2 * g.m();
        PartialMap {
            g,
            next: vec![NONE; d],
            prev: vec![NONE; d],
            sig: vec![1; g.m()],
            present: vec![false; g.m()],
            some_dart: vec![NONE; g.n()],
            deg: vec![0; g.n()],
            stamp: vec![0; 4 * g.m()],
            epoch: 0,
        }
    }

    #[inline]
    pub fn origin(&self, d: usize) -> usize {
        let (a, b) = self.g.edge(d / 2);
        if d % 2 == 0 {
            a
        } else {
            b
        }
    }

    /// Darts present at `v` in rotation order starting from the least id.
    pub fn darts_at(&self, v: usize) -> Vec<usize> {
        let s = self.some_dart[v];
        if s == NONE {
            return Vec::new();
        }
        let mut out = vec![s];
        let mut d = self.next[s];
        while d != s {
            out.push(d);
            d = self.next[d];
        }
        let k = out.iter().enumerate().min_by_key(|(_, &d)| d).map(|(i, _)| i).unwrap();
        out.rotate_left(k);
        out
    }

    fn insert_dart(&mut self, d: usize, after: Option<usize>) {
        let v = self.origin(d);
        match after {
            None => {
                debug_assert_eq!(self.deg[v], 0);
                self.next[d] = d;
                self.prev[d] = d;
                self.some_dart[v] = d;
            }
            Some(a) => {
                let b = self.next[a];
                self.next[a] = d;
                self.prev[d] = a;
                self.next[d] = b;
                self.prev[b] = d;
            }
        }
        self.deg[v] += 1;
    }

    fn remove_dart(&mut self, d: usize) {
        let v = self.origin(d);
        self.deg[v] -= 1;
        if self.deg[v] == 0 {
            self.some_dart[v] = NONE;
        } else {
            let (a, b) = (self.prev[d], self.next[d]);
            self.next[a] = b;
            self.prev[b] = a;
            if self.some_dart[v] == d {
                self.some_dart[v] = b;
            }
        }
        self.next[d] = NONE;
        self.prev[d] = NONE;
    }

    /// Inserts edge `e`: its first dart after `au`, its second after `av`.
    pub fn insert_edge(&mut self, e: usize, au: Option<usize>, av: Option<usize>, sign: i8) {
        self.insert_dart(2 * e, au);
        self.insert_dart(2 * e + 1, av);
        self.sig[e] = sign;
        self.present[e] = true;
    }

    pub fn remove_edge(&mut self, e: usize) {
        self.remove_dart(2 * e + 1);
        self.remove_dart(2 * e);
        self.present[e] = false;
        self.sig[e] = 1;
    }

    #[inline]
    fn alpha0(&self, f: usize) -> usize {
        let d = f / 2;
        if self.sig[d / 2] > 0 {
            2 * (d ^ 1) + ((f % 2) ^ 1)
        } else {
            2 * (d ^ 1) + f % 2
        }
    }

    #[inline]
    fn alpha1(&self, f: usize) -> usize {
        let d = f / 2;
        if f % 2 == 0 {
            2 * self.next[d] + 1
        } else {
            2 * self.prev[d]
        }
    }

    #[inline]
    fn corner(&self, f: usize) -> usize {
        if f % 2 == 0 {
            f / 2
        } else {
            self.prev[f / 2]
        }
    }

    /// Labels every present corner with a face number; returns the count.
    pub fn label_faces(&mut self, label: &mut [u32]) -> usize {
        self.epoch += 1;
        let ep = self.epoch;
        let mut count = 0;
        for e in 0..self.g.m() {
            if !self.present[e] {
                continue;
            }
            for f in 4 * e..4 * e + 4 {
                if self.stamp[f] == ep {
                    continue;
                }
                let mut x = f;
                loop {
                    self.stamp[x] = ep;
                    let y = self.alpha0(x);
                    self.stamp[y] = ep;
                    label[self.corner(x)] = count as u32;
                    x = self.alpha1(y);
                    if x == f {
                        break;
                    }
                }
                count += 1;
            }
        }
        count
    }

    /// True when the face through the first flag of edge `e` also contains
    /// every other flag of `e` (the edge lies on one face only).
    pub fn edge_on_single_face(&mut self, e: usize) -> bool {
        self.epoch += 1;
        let ep = self.epoch;
        let f = 4 * e;
        let mut x = f;
        loop {
            self.stamp[x] = ep;
            let y = self.alpha0(x);
            self.stamp[y] = ep;
            x = self.alpha1(y);
            if x == f {
                break;
            }
        }
        (4 * e..4 * e + 4).all(|x| self.stamp[x] == ep)
    }

    pub fn to_map(&self) -> CombinatorialMap {
        let rot = (0..self.g.n()).map(|v| self.darts_at(v)).collect();
        CombinatorialMap::new(self.g.clone(), rot, self.sig.clone()).expect("complete partial map is valid")
    }

    /// Loads all darts of a map over the same graph.
    pub fn load(&mut self, m: &CombinatorialMap, edges: impl Iterator<Item = usize>) {
        let edges: Vec<usize> = edges.collect();
        let keep: Vec<bool> = {
            let mut k = vec![false; self.g.m()];
            edges.iter().for_each(|&e| k[e] = true);
            k
        };
        for v in 0..m.n() {
            let r: Vec<usize> = m.rotation(v).iter().copied().filter(|&d| keep[d / 2]).collect();
            for (i, &d) in r.iter().enumerate() {
                self.insert_dart(d, if i == 0 { None } else { Some(r[i - 1]) });
            }
        }
        for &e in &edges {
            self.present[e] = true;
            self.sig[e] = m.sign(e);
        }
    }
}
