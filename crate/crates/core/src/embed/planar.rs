//! Planarity with embedding by repeated path insertion into faces
//! (Demoucron, Malgrange and Pertuiset), per block.

use std::collections::VecDeque;

use super::partial::PartialMap;
use crate::graph::{blocks, Graph};
use crate::map::CombinatorialMap;

/// A genus-0 map of `g`, or `None` when `g` is not planar. Disconnected
/// graphs are embedded component by component.
pub fn planar_embed(g: &Graph) -> Option<CombinatorialMap> {
    let mut rot: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for blk in blocks(g) {
        let r = embed_block(g, &blk)?;
        for (v, ds) in r {
            rot[v].extend(ds);
        }
    }
    Some(CombinatorialMap::new(g.clone(), rot, vec![1; g.m()]).expect("block rotations combine"))
}

/// Rotation lists for the vertices of one block.
fn embed_block(g: &Graph, blk: &[usize]) -> Option<Vec<(usize, Vec<usize>)>> {
    let mut pm = PartialMap::new(g);
    let mut verts: Vec<usize> = blk.iter().flat_map(|&e| [g.edge(e).0, g.edge(e).1]).collect();
    verts.sort_unstable();
    verts.dedup();
    let collect = |pm: &PartialMap| verts.iter().map(|&v| (v, pm.darts_at(v))).collect::<Vec<_>>();
    if blk.len() == 1 {
        let e = blk[0];
        pm.insert_edge(e, None, if g.edge(e).0 == g.edge(e).1 { Some(2 * e) } else { None }, 1);
        return Some(collect(&pm));
    }
    let mut in_blk = vec![false; g.m()];
    blk.iter().for_each(|&e| in_blk[e] = true);
    let adj: Vec<Vec<(usize, usize)>> = g
        .adjacency()
        .into_iter()
        .map(|l| l.into_iter().filter(|&(_, e)| in_blk[e]).collect())
        .collect();
    // initial cycle through the least edge
    let e0 = blk[0];
    let (a, b) = g.edge(e0);
    let path = bfs_path(&adj, b, a, |_| true, Some(e0))?;
    let mut in_h = vec![false; g.n()];
    let mut cyc_edges = vec![e0];
    cyc_edges.extend(path.iter().map(|&(_, e)| e));
    let mut cur = a;
    for &e in &cyc_edges {
        let (x, y) = g.edge(e);
        // every cycle vertex has at most one dart here, so the spot is forced
        let at = |pm: &PartialMap, v: usize| pm.darts_at(v).first().copied();
        let (au, av) = (at(&pm, x), at(&pm, y));
        pm.insert_edge(e, au, av, 1);
        in_h[cur] = true;
        cur = if x == cur { y } else { x };
    }
    let mut label = vec![0u32; 2 * g.m()];
    loop {
        let nf = pm.label_faces(&mut label);
        let mut face_has = vec![vec![false; g.n()]; nf];
        for v in verts.iter().copied().filter(|&v| in_h[v]) {
            for d in pm.darts_at(v) {
                face_has[label[d] as usize][v] = true;
            }
        }
        let frags = fragments(g, blk, &adj, &pm.present, &in_h);
        if frags.is_empty() {
            break;
        }
        let mut choice: Option<(usize, usize)> = None;
        for (i, fr) in frags.iter().enumerate() {
            let ok: Vec<usize> = (0..nf).filter(|&f| fr.attach.iter().all(|&v| face_has[f][v])).collect();
            match ok.len() {
                0 => return None,
                1 => {
                    choice = Some((i, ok[0]));
                    break;
                }
                _ => {
                    if choice.is_none() {
                        choice = Some((i, ok[0]));
                    }
                }
            }
        }
        let (fi, face) = choice.unwrap();
        let fr = &frags[fi];
        let p = if fr.kernel.is_empty() {
            let e = fr.edges[0];
            let (x, y) = g.edge(e);
            vec![(x, e), (y, usize::MAX)]
        } else {
            let s = fr.attach[0];
            let t = fr.attach[1];
            let mut in_frag = vec![false; g.m()];
            fr.edges.iter().for_each(|&e| in_frag[e] = true);
            let kernel = &fr.kernel;
            let steps = bfs_path_frag(&adj, s, t, kernel, &in_frag)?;
            let mut p = vec![(s, steps[0].1)];
            for w in 0..steps.len() {
                let nx = if w + 1 < steps.len() { steps[w + 1].1 } else { usize::MAX };
                p.push((steps[w].0, nx));
            }
            p
        };
        // p: list of (vertex, edge to next vertex)
        let corner_at = |pm: &PartialMap, v: usize| pm.darts_at(v).into_iter().find(|&d| label[d] as usize == face);
        let c_start = corner_at(&pm, p[0].0).expect("attachment on face");
        let c_end = corner_at(&pm, p[p.len() - 1].0).expect("attachment on face");
        let mut arrive: Option<usize> = None;
        for i in 0..p.len() - 1 {
            let (v, e) = p[i];
            let (x, _) = g.edge(e);
            let from_start = i == 0;
            let to_end = i + 2 == p.len();
            let at_v = if from_start { Some(c_start) } else { arrive };
            let at_w = if to_end { Some(c_end) } else { None };
            let (au, av) = if x == v { (at_v, at_w) } else { (at_w, at_v) };
            pm.insert_edge(e, au, av, 1);
            let dw = if x == v { 2 * e + 1 } else { 2 * e };
            arrive = Some(dw);
            in_h[p[i + 1].0] = true;
        }
    }
    Some(collect(&pm))
}

struct Fragment {
    kernel: Vec<usize>,
    attach: Vec<usize>,
    edges: Vec<usize>,
}

fn fragments(g: &Graph, blk: &[usize], adj: &[Vec<(usize, usize)>], present: &[bool], in_h: &[bool]) -> Vec<Fragment> {
    let mut out = Vec::new();
    for &e in blk {
        let (u, v) = g.edge(e);
        if !present[e] && in_h[u] && in_h[v] {
            let mut attach = vec![u, v];
            attach.sort_unstable();
            attach.dedup();
            out.push(Fragment { kernel: vec![], attach, edges: vec![e] });
        }
    }
    let mut seen = vec![false; g.n()];
    for &e in blk {
        for s in [g.edge(e).0, g.edge(e).1] {
            if in_h[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut kernel = vec![s];
            let mut attach = Vec::new();
            let mut edges = Vec::new();
            let mut i = 0;
            while i < kernel.len() {
                let v = kernel[i];
                i += 1;
                for &(w, f) in &adj[v] {
                    if !edges.contains(&f) {
                        edges.push(f);
                    }
                    if in_h[w] {
                        if !attach.contains(&w) {
                            attach.push(w);
                        }
                    } else if !seen[w] {
                        seen[w] = true;
                        kernel.push(w);
                    }
                }
            }
            attach.sort_unstable();
            out.push(Fragment { kernel, attach, edges });
        }
    }
    out
}

/// Path `s -> t` as a list of (next vertex, edge), avoiding `skip`.
fn bfs_path(
    adj: &[Vec<(usize, usize)>],
    s: usize,
    t: usize,
    allow: impl Fn(usize) -> bool,
    skip: Option<usize>,
) -> Option<Vec<(usize, usize)>> {
    let mut prev = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        if v == t {
            break;
        }
        for &(w, e) in &adj[v] {
            if Some(e) == skip || seen[w] || !allow(w) {
                continue;
            }
            seen[w] = true;
            prev[w] = Some((v, e));
            q.push_back(w);
        }
    }
    if !seen[t] {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = t;
    while cur != s {
        let (p, e) = prev[cur]?;
        out.push((cur, e));
        cur = p;
    }
    out.reverse();
    Some(out)
}

/// Path from attachment `s` to attachment `t` with interior in `kernel`.
fn bfs_path_frag(
    adj: &[Vec<(usize, usize)>],
    s: usize,
    t: usize,
    kernel: &[usize],
    in_frag: &[bool],
) -> Option<Vec<(usize, usize)>> {
    let mut ok = vec![false; adj.len()];
    kernel.iter().for_each(|&v| ok[v] = true);
    ok[t] = true;
    let restricted: Vec<Vec<(usize, usize)>> =
        adj.iter().map(|l| l.iter().copied().filter(|&(_, e)| in_frag[e]).collect()).collect();
    // interior vertices must be kernel vertices; `s` only as the start
    let mut prev = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[s] = true;
    let mut q = VecDeque::from([s]);
    while let Some(v) = q.pop_front() {
        if v == t {
            break;
        }
        if v != s && !kernel.contains(&v) {
            continue;
        }
        for &(w, e) in &restricted[v] {
            if seen[w] || !ok[w] {
                continue;
            }
            seen[w] = true;
            prev[w] = Some((v, e));
            q.push_back(w);
        }
    }
    if !seen[t] {
        return None;
    }
    let mut out = Vec::new();
    let mut cur = t;
    while cur != s {
        let (p, e) = prev[cur]?;
        out.push((cur, e));
        cur = p;
    }
    out.reverse();
    Some(out)
}
