//! Independent reference implementations and random inputs shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `(k, birth, death)` triples.
pub type Points = Vec<(u32, f64, f64)>;

/// Exhaustive optimal matching between two small diagrams. Points pair only
/// within the same `k` unless `across_k`; unmatched points go to the
/// diagonal at half their persistence. `r = None` gives the bottleneck
/// distance, `Some(r)` the r-Wasserstein distance.
pub fn exhaustive_distance(a: &[(u32, f64, f64)], b: &[(u32, f64, f64)], r: Option<f64>, across_k: bool) -> f64 {
    fn diag(p: &(u32, f64, f64)) -> f64 {
        (p.2 - p.1) / 2.0
    }
    fn pair(p: &(u32, f64, f64), q: &(u32, f64, f64)) -> f64 {
        (p.1 - q.1).abs().max((p.2 - q.2).abs())
    }
    fn combine(acc: f64, c: f64, r: Option<f64>) -> f64 {
        match r {
            None => acc.max(c),
            Some(r) => acc + c.powf(r),
        }
    }
    fn rec(
        i: usize,
        a: &[(u32, f64, f64)],
        b: &[(u32, f64, f64)],
        used: &mut Vec<bool>,
        acc: f64,
        r: Option<f64>,
        across_k: bool,
    ) -> f64 {
        if i == a.len() {
            return b
                .iter()
                .zip(used.iter())
                .filter(|(_, &u)| !u)
                .fold(acc, |s, (q, _)| combine(s, diag(q), r));
        }
        let mut best = rec(i + 1, a, b, used, combine(acc, diag(&a[i]), r), r, across_k);
        for j in 0..b.len() {
            if !used[j] && (across_k || a[i].0 == b[j].0) {
                used[j] = true;
                best = best.min(rec(i + 1, a, b, used, combine(acc, pair(&a[i], &b[j]), r), r, across_k));
                used[j] = false;
            }
        }
        best
    }
    let total = rec(0, a, b, &mut vec![false; b.len()], 0.0, r, across_k);
    match r {
        None => total,
        Some(r) => total.powf(1.0 / r),
    }
}

/// All-pairs shortest paths by Floyd–Warshall; `INFINITY` marks
/// disconnected pairs.
pub fn floyd_warshall(n: usize, edges: &[(u32, u32, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        let (u, v) = (u as usize, v as usize);
        if w < d[u][v] {
            d[u][v] = w;
            d[v][u] = w;
        }
    }
    for m in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][m] + d[m][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut x = x;
    while parent[x] != r {
        let next = parent[x];
        parent[x] = r;
        x = next;
    }
    r
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<u32>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v as u32);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Clique communities present once every pair with value `<= level` is an
/// edge, each as a set of its k-cliques. Recomputed from scratch.
fn communities_at(n: usize, values: &[Vec<Option<f64>>], k: usize, level: f64) -> Vec<BTreeSet<Vec<u32>>> {
    let present = |u: u32, v: u32| values[u as usize][v as usize].is_some_and(|w| w <= level);
    let cliques: Vec<Vec<u32>> = k_subsets(n, k)
        .into_iter()
        .filter(|c| {
            c.iter()
                .enumerate()
                .all(|(i, &u)| c[i + 1..].iter().all(|&v| present(u, v)))
        })
        .collect();
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    if k == 1 {
        for i in 0..cliques.len() {
            for j in i + 1..cliques.len() {
                if present(cliques[i][0], cliques[j][0]) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
    } else {
        let mut first_with_face: HashMap<Vec<u32>, usize> = HashMap::new();
        for (ci, c) in cliques.iter().enumerate() {
            for drop in 0..k {
                let face: Vec<u32> = c
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &v)| v)
                    .collect();
                match first_with_face.get(&face) {
                    Some(&other) => {
                        let (ri, rj) = (find(&mut parent, ci), find(&mut parent, other));
                        parent[ri] = rj;
                    }
                    None => {
                        first_with_face.insert(face, ci);
                    }
                }
            }
        }
    }
    let mut groups: HashMap<usize, BTreeSet<Vec<u32>>> = HashMap::new();
    for (ci, c) in cliques.into_iter().enumerate() {
        let root = find(&mut parent, ci);
        groups.entry(root).or_default().insert(c);
    }
    groups.into_values().collect()
}

/// Clique-community persistence by sweeping the threshold over every
/// distinct pair value and recomputing the communities at each level.
/// Communities that merge keep the earliest birth; the others die at the
/// merge level. Zero-persistence finite points are dropped; survivors are
/// reported as essential with death `cap`. Returns sorted
/// `(k, birth, death, essential)` tuples for `k = 1..=k_max`, stopping at
/// the first `k` without cliques.
pub fn sweep_oracle(n: usize, entries: &[(u32, u32, f64)], k_max: u32) -> Vec<(u32, f64, f64, bool)> {
    let mut values = vec![vec![None; n]; n];
    for &(u, v, w) in entries {
        values[u as usize][v as usize] = Some(w);
        values[v as usize][u as usize] = Some(w);
    }
    let cap = entries.iter().map(|e| e.2).fold(0.0, f64::max);
    let mut levels: Vec<f64> = entries.iter().map(|e| e.2).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut out = Vec::new();
    for k in 1..=k_max {
        let mut alive: Vec<(BTreeSet<Vec<u32>>, f64)> = Vec::new();
        let mut points = Vec::new();
        for &level in &levels {
            let comps = communities_at(n, &values, k as usize, level);
            let mut next = Vec::with_capacity(comps.len());
            for comp in comps {
                let mut births: Vec<f64> = alive
                    .iter()
                    .filter(|(old, _)| old.iter().next().is_some_and(|c| comp.contains(c)))
                    .map(|(_, b)| *b)
                    .collect();
                births.sort_by(f64::total_cmp);
                let birth = births.first().copied().unwrap_or(level);
                for &b in births.iter().skip(1) {
                    if b < level {
                        points.push((k, b, level, false));
                    }
                }
                next.push((comp, birth));
            }
            alive = next;
        }
        if alive.is_empty() {
            break;
        }
        points.extend(alive.iter().map(|(_, b)| (k, *b, cap, true)));
        out.extend(points);
    }
    out.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    out
}

/// Random small diagram with `k` tags in `1..=3`; occasionally adds
/// essential-style points that share the death `cap`.
pub fn random_points(rng: &mut ChaCha8Rng, max_len: usize, cap: f64) -> Points {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let birth = rng.gen_range(0.0..1.0);
            if rng.gen_bool(0.2) {
                (k, birth, cap)
            } else {
                (k, birth, birth + rng.gen_range(0.01..1.0))
            }
        })
        .collect()
}

/// Random weighted graph on `n` nodes; small integer weights make ties common.
pub fn random_edges(rng: &mut ChaCha8Rng, n: usize, density: f64, integer_weights: bool) -> Vec<(u32, u32, f64)> {
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if rng.gen_bool(density) {
                let w = if integer_weights {
                    rng.gen_range(1..=5) as f64
                } else {
                    rng.gen_range(0.05..3.0)
                };
                edges.push((u, v, w));
            }
        }
    }
    edges
}
