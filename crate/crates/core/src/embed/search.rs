//! Backtracking over edge insertions into a growing rotation system.
//!
//! Vertices are added one at a time, preferring the vertex with the most
//! already-placed neighbors, then higher degree, then lower id. The first
//! edge to a new vertex is a tree edge with signature +1 (every embedding is
//! switching-equivalent to one of this form); each remaining edge tries every
//! pair of corners at its ends, in increasing dart order, with signature +1
//! then -1. Partial Euler genus never decreases, so branches above the target
//! are cut.

use super::partial::PartialMap;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::map::CombinatorialMap;

#[derive(Clone, Copy, Debug)]
enum Step {
    Tree { edge: usize, old: usize },
    Back { edge: usize },
}

pub(crate) struct Search<'a> {
    g: &'a Graph,
    pm: PartialMap<'a>,
    steps: Vec<Step>,
    /// (step index, vertex): the insertion at which only one of each mirror
    /// pair is generated.
    mirror: Option<(usize, usize)>,
    target: usize,
    exact: bool,
    v_placed: i64,
    e_placed: i64,
    faces: i64,
    labels: Vec<Vec<u32>>,
    budget: &'a Budget,
}

pub(crate) enum Flow {
    Continue,
    Stop,
}

impl<'a> Search<'a> {
    /// `fixed`: a map over a subgraph of `g` given as darts of `g`.
    pub fn new(
        g: &'a Graph,
        fixed: Option<(&CombinatorialMap, &[usize])>,
        target: usize,
        exact: bool,
        mirror_fix: bool,
        budget: &'a Budget,
    ) -> Result<Self> {
        if g.edges().iter().any(|&(u, v)| u == v) {
            return Err(Error::Invalid("embedding search needs a loopless graph".into()));
        }
        let mut pm = PartialMap::new(g);
        let n = g.n();
        let adj = g.adjacency();
        let deg = g.degrees();
        let mut placed = vec![false; n];
        let mut steps = Vec::new();
        let mut in_fixed = vec![false; g.m()];
        if let Some((m, edges)) = fixed {
            pm.load(m, edges.iter().copied());
            for &e in edges {
                in_fixed[e] = true;
                placed[g.edge(e).0] = true;
                placed[g.edge(e).1] = true;
            }
            for e in 0..g.m() {
                let (u, v) = g.edge(e);
                if !in_fixed[e] && placed[u] && placed[v] {
                    steps.push(Step::Back { edge: e });
                }
            }
        }
        if !placed.iter().any(|&p| p) && n > 0 {
            let v0 = (0..n).max_by_key(|&v| (deg[v], std::cmp::Reverse(v))).unwrap();
            placed[v0] = true;
        }
        let mut count = vec![0usize; n];
        for v in 0..n {
            if placed[v] {
                for &(w, _) in &adj[v] {
                    count[w] += 1;
                }
            }
        }
        loop {
            let w = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| (count[v], deg[v], std::cmp::Reverse(v)));
            let Some(w) = w else { break };
            if count[w] == 0 {
                return Err(Error::Disconnected);
            }
            let mut es: Vec<usize> = adj[w].iter().filter(|&&(x, _)| placed[x]).map(|&(_, e)| e).collect();
            es.sort_unstable();
            let (u0, v0) = g.edge(es[0]);
            steps.push(Step::Tree { edge: es[0], old: if u0 == w { v0 } else { u0 } });
            for &e in &es[1..] {
                steps.push(Step::Back { edge: e });
            }
            placed[w] = true;
            for &(x, _) in &adj[w] {
                count[x] += 1;
            }
        }
        let mut mirror = None;
        if mirror_fix && fixed.is_none() {
            let mut d = vec![0usize; n];
            'scan: for (i, s) in steps.iter().enumerate() {
                let e = match *s {
                    Step::Tree { edge, .. } | Step::Back { edge } => edge,
                };
                let (u, v) = g.edge(e);
                for x in [u, v] {
                    d[x] += 1;
                    if d[x] == 3 {
                        mirror = Some((i, x));
                        break 'scan;
                    }
                }
            }
        }
        let mut labels = Vec::new();
        labels.resize_with(steps.len() + 1, || vec![0u32; 2 * g.m()]);
        let v_placed = (0..n).filter(|&v| pm.deg[v] > 0).count().max(1) as i64;
        let e_placed = pm.present.iter().filter(|&&p| p).count() as i64;
        let faces = if e_placed == 0 { 1 } else { pm.label_faces(&mut labels[0]) as i64 };
        Ok(Search { g, pm, steps, mirror, target, exact, v_placed, e_placed, faces, labels, budget })
    }

    fn genus(&self) -> i64 {
        2 - self.v_placed + self.e_placed - self.faces
    }

    pub fn run(&mut self, sink: &mut dyn FnMut(&PartialMap) -> Flow) -> Result<()> {
        if self.genus() > self.target as i64 {
            return Ok(());
        }
        self.dfs(0, sink).map(|_| ())
    }

    fn dfs(&mut self, i: usize, sink: &mut dyn FnMut(&PartialMap) -> Flow) -> Result<bool> {
        self.budget.tick()?;
        if i == self.steps.len() {
            if self.exact && self.genus() != self.target as i64 {
                return Ok(false);
            }
            return Ok(matches!(sink(&self.pm), Flow::Stop));
        }
        let limit = self.target as i64;
        match self.steps[i] {
            Step::Tree { edge, old } => {
                let mut spots: Vec<Option<usize>> = self.pm.darts_at(old).into_iter().map(Some).collect();
                if spots.is_empty() {
                    spots.push(None);
                }
                spots.sort_unstable();
                if let Some((mi, mv)) = self.mirror {
                    if mi == i && mv == old {
                        spots = self.mirror_spot(old);
                    }
                }
                let at_first = self.g.edge(edge).0 == old;
                for a in spots {
                    let (au, av) = if at_first { (a, None) } else { (None, a) };
                    self.pm.insert_edge(edge, au, av, 1);
                    self.v_placed += 1;
                    self.e_placed += 1;
                    let stop = self.dfs(i + 1, sink)?;
                    self.v_placed -= 1;
                    self.e_placed -= 1;
                    self.pm.remove_edge(edge);
                    if stop {
                        return Ok(true);
                    }
                }
            }
            Step::Back { edge } => {
                let (u, v) = self.g.edge(edge);
                let mut label = std::mem::take(&mut self.labels[i]);
                self.pm.label_faces(&mut label);
                let mut au_list = self.pm.darts_at(u);
                let mut av_list = self.pm.darts_at(v);
                au_list.sort_unstable();
                av_list.sort_unstable();
                if let Some((mi, mv)) = self.mirror {
                    if mi == i {
                        if mv == u {
                            au_list = self.mirror_spot(u).into_iter().flatten().collect();
                        } else if mv == v {
                            av_list = self.mirror_spot(v).into_iter().flatten().collect();
                        }
                    }
                }
                let g0 = self.genus();
                let mut stop = false;
                'outer: for &a in &au_list {
                    for &b in &av_list {
                        let same = label[a] == label[b];
                        if !same && g0 + 2 > limit {
                            continue;
                        }
                        for s in [1i8, -1] {
                            self.pm.insert_edge(edge, Some(a), Some(b), s);
                            let df = if !same {
                                -1
                            } else if self.pm.edge_on_single_face(edge) {
                                0
                            } else {
                                1
                            };
                            if g0 + 1 - df <= limit {
                                self.e_placed += 1;
                                self.faces += df;
                                stop = self.dfs(i + 1, sink)?;
                                self.e_placed -= 1;
                                self.faces -= df;
                            }
                            self.pm.remove_edge(edge);
                            if stop {
                                break 'outer;
                            }
                        }
                    }
                }
                self.labels[i] = label;
                if stop {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// The single insertion spot kept at the mirror-fixing step: right after
    /// the earlier-inserted of the two darts present.
    fn mirror_spot(&self, v: usize) -> Vec<Option<usize>> {
        let ds = self.pm.darts_at(v);
        debug_assert_eq!(ds.len(), 2);
        let first = self
            .steps
            .iter()
            .filter_map(|s| match *s {
                Step::Tree { edge, .. } | Step::Back { edge } => Some(edge),
            })
            .find(|&e| ds.iter().any(|&d| d / 2 == e))
            .unwrap();
        vec![ds.iter().copied().find(|&d| d / 2 == first)]
    }
}
