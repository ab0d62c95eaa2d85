//! One line per acceptance criterion. Run with `cargo test --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use surfiso::budget::Budget;
use surfiso::canon::{canonical_code, CanonicalCode, Mode};
use surfiso::decomposition::{
    biconnected_tree, canonical_tree_code, map_bag_code, triconnected_tree, BagView, ChainDecomposition, DecompTree,
};
use surfiso::embed::{euler_genus_of, min_euler_genus};
use surfiso::facewidth::{face_width, FaceWidth};
use surfiso::fixtures::{
    algotorus_ring, augment, figa, fige, fw1_gadget, one_loop, random_3conn_planar, random_triangulation, shuffled,
    torus_grid,
};
use surfiso::graph::{blocks, Graph};
use surfiso::iso::{
    canonical_graph_code, case_facewidth1, case_facewidth2, case_facewidth2_degenerate, isomorphic, verify_witness, Engine,
    FwPair,
};
use surfiso::map::{cut_along, is_orientation_preserving, validate_noose, CombinatorialMap, Hit, Noose};
use surfiso::oracle::{brute_iso, connected_graphs, exhaustive_nooses, map_nooses, EmbeddingNooses, OracleBudget};

type Outcome = (bool, String);

fn budget() -> Budget {
    Budget::new(Budget::DEFAULT)
}

fn oracle() -> OracleBudget {
    OracleBudget::default()
}

/// Swaps the ends of two disjoint edges, keeping degrees.
fn switch_edges(g: &Graph, rng: &mut StdRng) -> Option<Graph> {
    for _ in 0..200 {
        let e = rng.gen_range(0..g.m());
        let f = rng.gen_range(0..g.m());
        let ((a, b), (c, d)) = (g.edge(e), g.edge(f));
        if [a, b].contains(&c) || [a, b].contains(&d) || g.has_edge(a, d) || g.has_edge(c, b) {
            continue;
        }
        let mut es: Vec<(usize, usize)> = g.edges().to_vec();
        es[e] = (a, d);
        es[f] = (c, b);
        let h = Graph::from_edges(g.n(), &es);
        if h.is_connected() {
            return Some(h);
        }
    }
    None
}

fn family_graph(rng: &mut StdRng) -> (String, Graph) {
    match rng.gen_range(0..5) {
        0 => {
            let k = rng.gen_range(0..=3);
            (format!("figa({k})"), figa(k))
        }
        1 => {
            let t = rng.gen_range(3..=4);
            (format!("fige({t})"), fige(t).0)
        }
        2 => ("ring(3)".into(), algotorus_ring(3)),
        3 => ("fw1(4,3)".into(), fw1_gadget(4, 3)),
        _ => {
            let n = rng.gen_range(6..=14);
            let base = random_3conn_planar(n, n, rng);
            let extra = rng.gen_range(1..=2);
            (format!("planar({n})+{extra}"), augment(&base, extra, rng))
        }
    }
}

fn criterion1() -> Outcome {
    let b = budget();
    let lim = oracle();
    let mut rng = StdRng::seed_from_u64(1);
    let mut graphs = Vec::new();
    for n in 1..=7 {
        graphs.extend(connected_graphs(n));
    }
    let mut failures = Vec::new();
    let mut relabel_checks = 0;
    let mut codes = Vec::with_capacity(graphs.len());
    for g in &graphs {
        let (code, _) = match Engine::new(2, &b).canonical_labeling(g) {
            Ok(x) => x,
            Err(e) => {
                failures.push(format!("{}: {e}", g.to_text().replace('\n', ";")));
                codes.push(None);
                continue;
            }
        };
        codes.push(Some(code));
        let (h, _) = shuffled(g, &mut rng);
        let v = isomorphic(g, &h, 2, &b).expect("within genus 2");
        let o = brute_iso(g, &h, lim).expect("tiny");
        relabel_checks += 1;
        if !v.isomorphic || o.is_none() || !verify_witness(g, &h, v.witness.as_ref().unwrap()) {
            failures.push(format!("relabeling of {}", g.to_text().replace('\n', ";")));
        }
    }
    let mut classes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, g) in graphs.iter().enumerate() {
        classes.entry((g.n(), g.m())).or_default().push(i);
    }
    let mut pair_checks = 0;
    for ids in classes.values() {
        for (x, &i) in ids.iter().enumerate() {
            for &j in &ids[x + 1..] {
                let engine = codes[i].is_some() && codes[i] == codes[j];
                let truth = brute_iso(&graphs[i], &graphs[j], lim).expect("tiny").is_some();
                pair_checks += 1;
                if engine != truth {
                    failures.push(format!("pair {i} {j}"));
                }
            }
        }
    }
    // family pairs
    let mut fam_checks = 0;
    let mut positives = 0;
    while fam_checks < 500 {
        let (name, g) = family_graph(&mut rng);
        let h = if rng.gen_bool(0.5) {
            shuffled(&g, &mut rng).0
        } else {
            match switch_edges(&g, &mut rng) {
                Some(h) if euler_genus_of(&h, 2, &b).ok().flatten().is_some() => shuffled(&h, &mut rng).0,
                _ => continue,
            }
        };
        let v = match isomorphic(&g, &h, 2, &b) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("{name}: {e}"));
                fam_checks += 1;
                continue;
            }
        };
        let truth = brute_iso(&g, &h, lim).expect("family graphs fit the oracle");
        fam_checks += 1;
        positives += v.isomorphic as usize;
        if v.isomorphic != truth.is_some() || (v.isomorphic && !verify_witness(&g, &h, v.witness.as_ref().unwrap())) {
            failures.push(format!("{name}: engine {} oracle {}", v.isomorphic, truth.is_some()));
        }
    }
    let detail = format!(
        "{} graphs, {relabel_checks} relabelings, {pair_checks} same-size pairs, {fam_checks} family pairs ({positives} isomorphic), {} disagreements{}",
        graphs.len(),
        failures.len(),
        failures.first().map(|f| format!(", first: {f}")).unwrap_or_default()
    );
    (failures.is_empty(), detail)
}

fn complete(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v);
        }
    }
    g
}

fn k33() -> Graph {
    let mut g = Graph::new(6);
    for u in 0..3 {
        for v in 3..6 {
            g.add_edge(u, v);
        }
    }
    g
}

fn criterion2() -> Outcome {
    let b = Budget::unlimited();
    let cases = [("K5", complete(5), 1, 10), ("K6", complete(6), 1, 10), ("K3,3", k33(), 1, 10), ("K7", complete(7), 2, 600)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g, want, secs) in cases {
        let t0 = Instant::now();
        let got = min_euler_genus(&g, 4, &b).expect("no budget");
        let el = t0.elapsed();
        let (t, m) = got.expect("genus at most 4");
        // Euler formula on the witness embedding
        let euler = 2 + m.m() as i64 - m.n() as i64 - m.num_faces() as i64;
        let good = t == want && euler == want as i64 && m.graph().edges() == g.edges() && el <= Duration::from_secs(secs);
        ok &= good;
        parts.push(format!("{name}={t} ({:.2}s)", el.as_secs_f64()));
    }
    (ok, parts.join(", "))
}

/// Least length of a non-contractible noose by exhaustive corner search.
fn brute_face_width(m: &CombinatorialMap) -> Option<usize> {
    let b = Budget::unlimited();
    (1..=m.n()).find(|&l| !map_nooses(m, l, &b).expect("no budget").is_empty())
}

fn criterion3() -> Outcome {
    let b = budget();
    let (_, k6) = min_euler_genus(&complete(6), 2, &b).unwrap().unwrap();
    let cases = [("K6 projective", k6, 3), ("one loop", one_loop(), 1), ("C3xC3 torus", torus_grid(3, 3), 3)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, m, want) in cases {
        let t0 = Instant::now();
        let w = face_width(&m);
        let el = t0.elapsed();
        let brute = brute_face_width(&m);
        let good = w == FaceWidth::Finite(want) && brute == Some(want) && el <= Duration::from_secs(5);
        ok &= good;
        parts.push(format!("{name}={w} (exhaustive {}, {:.2}s)", brute.map_or("none".into(), |x| x.to_string()), el.as_secs_f64()));
    }
    (ok, parts.join(", "))
}

fn random_map(rng: &mut StdRng) -> CombinatorialMap {
    loop {
        let n = rng.gen_range(2..=6);
        let m = rng.gen_range(n - 1..=n + 4);
        let mut g = Graph::new(n);
        for v in 1..n {
            g.add_edge(rng.gen_range(0..v), v);
        }
        while g.m() < m {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            // loops and parallel edges welcome
            if rng.gen_bool(0.2) || u != v {
                g.add_edge(u, v);
            }
        }
        let mut rot = vec![Vec::new(); n];
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            rot[u].push(2 * e);
            rot[v].push(2 * e + 1);
        }
        for r in &mut rot {
            r.shuffle(rng);
        }
        let sig = (0..g.m()).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
        if let Ok(map) = CombinatorialMap::new(g, rot, sig) {
            return map;
        }
    }
}

fn criterion4() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut instances, mut bad, mut maps) = (0, 0, 0);
    while instances < 200 && maps < 5000 {
        let m = random_map(&mut rng);
        maps += 1;
        let mut here = 0;
        for v in 0..m.n() {
            for &enter in m.rotation(v) {
                for &leave in m.rotation(v) {
                    let c = Noose { hits: vec![Hit { vertex: v, enter, leave }] };
                    if enter == leave || validate_noose(&m, &c).is_err() {
                        continue;
                    }
                    // a few per map keeps the sample varied
                    if here == 4 || is_orientation_preserving(&m, &c).expect("valid noose") {
                        continue;
                    }
                    here += 1;
                    instances += 1;
                    let cut = cut_along(&m, &c).expect("valid noose");
                    if cut.map.total_euler_genus() >= m.total_euler_genus() || cut.genus_delta >= 0 {
                        bad += 1;
                    }
                }
            }
        }
    }
    (instances >= 50 && bad == 0, format!("{instances} one-sided one-vertex nooses on {maps} random maps, {bad} without genus drop"))
}

struct Fixture {
    name: &'static str,
    graph: Graph,
}

fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture { name: "figa(0)", graph: figa(0) },
        Fixture { name: "fige(3)", graph: fige(3).0 },
        Fixture { name: "ring(3)", graph: algotorus_ring(3) },
        Fixture { name: "fw1(4,3)", graph: fw1_gadget(4, 3) },
    ]
}

/// The eight symmetries of the four copy roles: swap inside each end pair,
/// and swap the two ends.
fn role_perms() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for outer in [false, true] {
        for a in [false, true] {
            for c in [false, true] {
                let mut p = [if a { 1 } else { 0 }, if a { 0 } else { 1 }, if c { 3 } else { 2 }, if c { 2 } else { 3 }];
                if outer {
                    p = [p[2], p[3], p[0], p[1]];
                }
                out.push(p);
            }
        }
    }
    out
}

fn permute_roles(bits: u8, p: &[usize; 4]) -> u8 {
    (0..4).filter(|&r| bits & (1 << r) != 0).fold(0, |acc, r| acc | (1 << p[r]))
}

type PairDesc = (Vec<(usize, u8)>, Vec<(usize, u8)>);

fn pair_descs(pairs: &[FwPair], perm: &[usize]) -> BTreeMap<PairDesc, usize> {
    let mut out = BTreeMap::new();
    for p in pairs {
        let side = |vs: &[usize], rs: &[u8], rp: &[usize; 4]| {
            let mut s: Vec<(usize, u8)> = vs.iter().zip(rs).map(|(&v, &r)| (perm[v], permute_roles(r, rp))).collect();
            s.sort_unstable();
            s
        };
        let d = role_perms()
            .iter()
            .map(|rp| (side(&p.g_vertices, &p.g_roles, rp), side(&p.l_vertices, &p.l_roles, rp)))
            .min()
            .unwrap();
        *out.entry(d).or_insert(0) += 1;
    }
    out
}

fn chain_descs(chains: &[ChainDecomposition], perm: &[usize]) -> BTreeSet<(bool, Vec<Vec<usize>>)> {
    chains
        .iter()
        .map(|ch| {
            let seq: Vec<Vec<usize>> = ch
                .pieces
                .iter()
                .map(|p| {
                    let mut q: Vec<usize> = p.iter().map(|&v| perm[v]).collect();
                    q.sort_unstable();
                    q
                })
                .collect();
            let k = seq.len();
            let mut best: Option<Vec<Vec<usize>>> = None;
            for rev in [false, true] {
                let base: Vec<Vec<usize>> = if rev { seq.iter().rev().cloned().collect() } else { seq.clone() };
                let shifts = if ch.circular { k } else { 1 };
                for s in 0..shifts {
                    let mut r = base.clone();
                    r.rotate_left(s);
                    if best.as_ref().map_or(true, |b| r < *b) {
                        best = Some(r);
                    }
                }
            }
            (ch.circular, best.unwrap_or_default())
        })
        .collect()
}

fn tree_codes(g: &Graph) -> (CanonicalCode, Option<CanonicalCode>) {
    let bc = canonical_tree_code(&biconnected_tree(g).unwrap(), &mut map_bag_code).unwrap();
    let tri = if g.n() >= 3 && blocks(g).len() == 1 {
        Some(canonical_tree_code(&triconnected_tree(g).unwrap(), &mut map_bag_code).unwrap())
    } else {
        None
    };
    (bc, tri)
}

const RELABELINGS: usize = 100;

fn criterion5() -> Outcome {
    let b = budget();
    let mut rng = StdRng::seed_from_u64(5);
    let mut mismatches: Vec<String> = Vec::new();
    let mut parts = Vec::new();
    for fx in fixtures() {
        let g = &fx.graph;
        let id: Vec<usize> = (0..g.n()).collect();
        let g_pairs = case_facewidth2(g, 2, &b).unwrap();
        let pairs = pair_descs(&g_pairs, &id);
        let (v1, splits) = case_facewidth1(g, 2, &b).unwrap();
        let g_chains = case_facewidth2_degenerate(g, 2, &b).unwrap();
        let chains = chain_descs(&g_chains, &id);
        let trees = tree_codes(g);
        let code = canonical_graph_code(g, 2, &b).unwrap();
        let (_, map) = min_euler_genus(g, 2, &b).unwrap().unwrap();
        let map_code = canonical_code(&map, Mode::Free);
        for _ in 0..RELABELINGS {
            let (h, perm) = shuffled(g, &mut rng);
            let mut miss = |what: &str| mismatches.push(format!("{} {what}", fx.name));
            if pair_descs(&case_facewidth2(&h, 2, &b).unwrap(), &id) != pair_descs(&g_pairs, &perm) {
                miss("pairs");
            }
            let (hv1, hsplits) = case_facewidth1(&h, 2, &b).unwrap();
            let mut mv1: Vec<usize> = v1.iter().map(|&v| perm[v]).collect();
            mv1.sort_unstable();
            if hv1 != mv1 || hsplits.len() != splits.len() {
                miss("V1");
            }
            if chain_descs(&case_facewidth2_degenerate(&h, 2, &b).unwrap(), &id) != chain_descs(&g_chains, &perm) {
                miss("chains");
            }
            if tree_codes(&h) != trees {
                miss("tree code");
            }
            if canonical_graph_code(&h, 2, &b).unwrap() != code {
                miss("canonical code");
            }
            let mut eperm: Vec<usize> = (0..map.m()).collect();
            eperm.shuffle(&mut rng);
            let flip: Vec<bool> = (0..map.m()).map(|_| rng.gen()).collect();
            if canonical_code(&map.relabel_full(&perm, &eperm, &flip), Mode::Free) != map_code {
                miss("map code");
            }
        }
        parts.push(format!("{} ({} pairs, |V1|={}, {} chains)", fx.name, pairs.values().sum::<usize>(), v1.len(), chains.len()));
    }
    let detail = format!(
        "{RELABELINGS} relabelings of {}, {} mismatches{}",
        parts.join(", "),
        mismatches.len(),
        mismatches.first().map(|m| format!(", first: {m}")).unwrap_or_default()
    );
    (mismatches.is_empty(), detail)
}

fn criterion6() -> Outcome {
    let b = budget();
    let mut ok = true;
    let mut parts = Vec::new();
    for fx in fixtures() {
        let g = &fx.graph;
        let found = exhaustive_nooses(g, 2, 2, &b).expect("fixture fits the search");
        // the face-width-two case applies when no embedding is polyhedral and
        // some embedding has no one-vertex noose; the one case when every
        // embedding has one
        let has_one = |e: &EmbeddingNooses| e.nooses.iter().any(|c| c.len() == 1);
        let all_short = found.iter().all(|e| !e.nooses.is_empty());
        let width_two: Vec<&EmbeddingNooses> = if all_short { found.iter().filter(|e| !has_one(e)).collect() } else { Vec::new() };
        let width_one = all_short && found.iter().all(has_one);
        let mut need: BTreeSet<(usize, usize)> = BTreeSet::new();
        for e in &width_two {
            for c in e.nooses.iter().filter(|c| c.len() == 2) {
                let (x, y) = (c.hits[0].vertex, c.hits[1].vertex);
                need.insert((x.min(y), x.max(y)));
            }
        }
        let pairs = case_facewidth2(g, 2, &b).unwrap();
        let uncovered = need
            .iter()
            .filter(|&&(x, y)| !pairs.iter().any(|p| p.l_vertices.contains(&x) && p.l_vertices.contains(&y)))
            .count();
        let want_v1: Vec<usize> = if width_one {
            found.iter().flat_map(|e| e.nooses.iter().filter(|c| c.len() == 1).map(|c| c.hits[0].vertex)).collect::<BTreeSet<_>>().into_iter().collect()
        } else {
            Vec::new()
        };
        let (v1, _) = case_facewidth1(g, 2, &b).unwrap();
        ok &= uncovered == 0 && v1 == want_v1;
        parts.push(format!(
            "{}: {} embeddings, {} noose pairs ({} uncovered), V1 {:?} vs {:?}",
            fx.name,
            found.len(),
            need.len(),
            uncovered,
            v1,
            want_v1
        ));
    }
    (ok, parts.join("; "))
}

fn criterion7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let sizes = [500usize, 1000, 2000, 4000];
    let mut pts = Vec::new();
    for &n in &sizes {
        let m = random_triangulation(n, &mut rng);
        let t0 = Instant::now();
        let c = canonical_code(&m, Mode::Free);
        let el = t0.elapsed().as_secs_f64().max(1e-6);
        assert!(!c.words.is_empty() && m.n() == n);
        pts.push((n as f64, el, m.m()));
    }
    // least-squares slope in log-log space
    let k = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y, _)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / k, sy / k);
    let num: f64 = pts.iter().map(|&(x, y, _)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = pts.iter().map(|&(x, _, _)| (x.ln() - mx).powi(2)).sum();
    let slope = num / den;
    let last = pts.last().unwrap().1;
    let times: Vec<String> = pts.iter().map(|(n, t, m)| format!("n={n} m={m} {t:.3}s")).collect();
    (slope <= 2.3 && last <= 60.0, format!("{}, slope {slope:.2}", times.join(", ")))
}

/// Bag sizes and kinds only: the shape of the tree without labels.
fn shape_code(t: &DecompTree) -> CanonicalCode {
    canonical_tree_code(t, &mut |v: &BagView| Ok(CanonicalCode { words: vec![v.graph.n() as u64, v.graph.m() as u64] })).unwrap()
}

fn criterion8() -> Outcome {
    let lim = oracle();
    let mut rng = StdRng::seed_from_u64(8);
    let mut corpus: Vec<Graph> = (1..=7).flat_map(connected_graphs).collect();
    corpus.extend(fixtures().into_iter().map(|f| f.graph));
    for _ in 0..40 {
        corpus.push(family_graph(&mut rng).1);
    }
    let (mut trees, mut bad) = (0, Vec::new());
    for (i, g) in corpus.iter().enumerate() {
        let mut kinds: Vec<fn(&Graph) -> surfiso::error::Result<DecompTree>> = vec![biconnected_tree];
        if g.n() >= 3 && blocks(g).len() == 1 {
            kinds.push(triconnected_tree);
        }
        for build in kinds {
            let t = build(g).unwrap();
            trees += 1;
            if brute_iso(&t.reconstruct(), g, lim).expect("corpus fits the oracle").is_none() {
                bad.push(format!("graph {i}: reconstruction"));
            }
            let shape = shape_code(&t);
            for _ in 0..3 {
                let (h, _) = shuffled(g, &mut rng);
                if shape_code(&build(&h).unwrap()) != shape {
                    bad.push(format!("graph {i}: shape"));
                }
            }
        }
    }
    let detail = format!(
        "{} graphs, {trees} trees, {} failures{}",
        corpus.len(),
        bad.len(),
        bad.first().map(|f| format!(", first: {f}")).unwrap_or_default()
    );
    (bad.is_empty(), detail)
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("oracle equivalence", criterion1),
        ("euler genus golden values", criterion2),
        ("face-width golden values", criterion3),
        ("one-sided one-vertex cuts lower the genus", criterion4),
        ("relabeling equivariance", criterion5),
        ("noose coverage", criterion6),
        ("map canon scaling", criterion7),
        ("decomposition uniqueness", criterion8),
    ];
    let mut all = true;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        eprintln!("criterion {} running: {name}", i + 1);
        let (ok, detail) = f();
        all &= ok;
        println!("criterion {}: {} {name}: {detail} [{:.1}s]", i + 1, if ok { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
    }
    if !all {
        std::process::exit(1);
    }
}
