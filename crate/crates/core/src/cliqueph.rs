//! Clique-community persistent homology.
//!
//! For each clique size `k`, the k-cliques of a weighted graph are filtered by
//! their largest internal edge weight. Two k-cliques are adjacent when they
//! share `k - 1` vertices; connected components of that adjacency are the
//! k-clique communities. A community is born with its first clique and dies,
//! by the elder rule, when it merges into an older community.
//!
//! For `k = 1` the communities are ordinary connected components: every
//! vertex is born at 0 and edges merge them.

use std::collections::{HashMap, HashSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::GeodesicLayer;
use crate::scalar::{total_cmp, Scalar};

/// Default ceiling on the number of cliques of one size in one layer.
pub const DEFAULT_MAX_CLIQUES: usize = 20_000_000;

pub const DIAGRAM_CSV_HEADER: [&str; 4] = ["k", "birth", "death", "essential"];

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramPoint<T> {
    pub k: u32,
    pub birth: T,
    /// Finite death, or the essential cap when `essential` is set.
    pub death: T,
    pub essential: bool,
}

impl<T: Scalar> DiagramPoint<T> {
    pub fn persistence(&self) -> T {
        self.death - self.birth
    }

    fn sort_key(a: &Self, b: &Self) -> std::cmp::Ordering {
        a.k.cmp(&b.k)
            .then_with(|| total_cmp(&a.birth, &b.birth))
            .then_with(|| total_cmp(&a.death, &b.death))
            .then_with(|| a.essential.cmp(&b.essential))
    }
}

/// Multiset of `(birth, death, k)` points with capped essential classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram<T> {
    points: Vec<DiagramPoint<T>>,
    /// Death value assigned to essential classes; `None` for diagrams that
    /// never had one (e.g. built by hand without essentials).
    essential_cap: Option<T>,
}

impl<T> Default for PersistenceDiagram<T> {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            essential_cap: None,
        }
    }
}

impl<T: Scalar> PersistenceDiagram<T> {
    /// Canonicalizes point order and drops finite zero-persistence points.
    pub fn new(mut points: Vec<DiagramPoint<T>>, essential_cap: Option<T>) -> Self {
        points.retain(|p| p.essential || p.death > p.birth);
        points.sort_by(DiagramPoint::sort_key);
        Self { points, essential_cap }
    }

    /// Finite `(birth, death)` pairs, all tagged with clique size `k`.
    pub fn from_pairs(k: u32, pairs: &[(T, T)]) -> Self {
        let points = pairs
            .iter()
            .map(|&(birth, death)| DiagramPoint {
                k,
                birth,
                death,
                essential: false,
            })
            .collect();
        Self::new(points, None)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn points(&self) -> &[DiagramPoint<T>] {
        &self.points
    }

    pub fn essential_cap(&self) -> Option<T> {
        self.essential_cap
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with clique size `k` only.
    pub fn restricted(&self, k: u32) -> Self {
        Self {
            points: self.points.iter().filter(|p| p.k == k).copied().collect(),
            essential_cap: self.essential_cap,
        }
    }

    /// Distinct clique sizes present, ascending.
    pub fn ks(&self) -> Vec<u32> {
        let mut ks: Vec<u32> = self.points.iter().map(|p| p.k).collect();
        ks.dedup();
        ks
    }

    pub fn essential_count(&self, k: u32) -> usize {
        self.points.iter().filter(|p| p.k == k && p.essential).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(DIAGRAM_CSV_HEADER)?;
        for p in &self.points {
            w.write_record([
                p.k.to_string(),
                p.birth.to_string(),
                p.death.to_string(),
                u8::from(p.essential).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sorted distinct pair values of a layer.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationGrid<T> {
    pub thresholds: Vec<T>,
}

impl<T: Scalar> FiltrationGrid<T> {
    pub fn of(layer: &GeodesicLayer<T>) -> Self {
        let mut thresholds: Vec<T> = layer.entries().iter().map(|e| e.2).collect();
        thresholds.sort_by(total_cmp);
        thresholds.dedup();
        Self { thresholds }
    }

    pub fn max(&self) -> Option<T> {
        self.thresholds.last().copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KClique<T> {
    /// Local vertex indices, ascending.
    pub vertices: Vec<u32>,
    pub filtration_value: T,
}

/// Row-major adjacency bitsets.
struct BitRows {
    words: usize,
    data: Vec<u64>,
}

impl BitRows {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self {
            words,
            data: vec![0; words * n],
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    fn set(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / 64] |= 1 << (j % 64);
        self.data[j * self.words + i / 64] |= 1 << (i % 64);
    }
}

fn ones(bits: &[u64]) -> impl Iterator<Item = usize> + '_ {
    bits.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(w * 64 + b)
        })
    })
}

fn count_ones(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

/// Drop every bit `<= x`.
fn clear_upto(bits: &mut [u64], x: usize) {
    let w = x / 64;
    for word in bits.iter_mut().take(w) {
        *word = 0;
    }
    let keep = if x % 64 == 63 { 0 } else { !0u64 << (x % 64 + 1) };
    bits[w] &= keep;
}

/// Union-find whose roots remember the earliest birth of their class.
struct ElderUnionFind<T> {
    parent: Vec<u32>,
    size: Vec<u32>,
    birth: Vec<T>,
}

impl<T: Scalar> ElderUnionFind<T> {
    fn new() -> Self {
        Self {
            parent: Vec::new(),
            size: Vec::new(),
            birth: Vec::new(),
        }
    }

    fn make(&mut self, birth: T) -> u32 {
        let id = self.parent.len() as u32;
        self.parent.push(id);
        self.size.push(1);
        self.birth.push(birth);
        id
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Merges the classes of `a` and `b` at `value`; the younger class dies.
    fn union(&mut self, a: u32, b: u32, value: T, deaths: &mut Vec<(T, T)>) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        let (ba, bb) = (self.birth[ra as usize], self.birth[rb as usize]);
        let a_elder = ba < bb || (ba == bb && ra < rb);
        let (elder_birth, young_birth) = if a_elder { (ba, bb) } else { (bb, ba) };
        if value > young_birth {
            deaths.push((young_birth, value));
        }
        let (big, small) = if self.size[ra as usize] >= self.size[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent[small as usize] = big;
        self.size[big as usize] += self.size[small as usize];
        self.birth[big as usize] = elder_birth;
    }

    fn root_births(&mut self) -> Vec<T> {
        (0..self.parent.len() as u32)
            .filter(|&x| self.parent[x as usize] == x)
            .map(|x| self.birth[x as usize])
            .collect()
    }
}

/// Maps sorted vertex tuples of a fixed size to dense ids.
enum FaceIndex {
    Dense { binom: Vec<Vec<u64>>, slots: Vec<u32> },
    Sparse(HashMap<Box<[u32]>, u32>),
}

const DENSE_FACE_LIMIT: u64 = 1 << 22;

impl FaceIndex {
    fn new(n: usize, size: usize) -> Self {
        // binom[v][t] = C(v, t), saturating
        let mut binom = vec![vec![0u64; size + 1]; n + 1];
        for v in 0..=n {
            binom[v][0] = 1;
            for t in 1..=size {
                binom[v][t] = if v == 0 {
                    0
                } else {
                    binom[v - 1][t - 1].saturating_add(binom[v - 1][t])
                };
            }
        }
        let total = binom[n][size];
        if total <= DENSE_FACE_LIMIT {
            FaceIndex::Dense {
                binom,
                slots: vec![u32::MAX; total as usize],
            }
        } else {
            FaceIndex::Sparse(HashMap::new())
        }
    }

    fn get_or_insert(&mut self, face: &[u32], make: impl FnOnce() -> u32) -> u32 {
        match self {
            FaceIndex::Dense { binom, slots } => {
                let rank: u64 = face.iter().enumerate().map(|(t, &v)| binom[v as usize][t + 1]).sum();
                let slot = &mut slots[rank as usize];
                if *slot == u32::MAX {
                    *slot = make();
                }
                *slot
            }
            FaceIndex::Sparse(map) => match map.get(face) {
                Some(&id) => id,
                None => {
                    let id = make();
                    map.insert(face.into(), id);
                    id
                }
            },
        }
    }
}

/// Incremental k-clique community tracker over an edge sweep.
struct CommunitySweep<'a, T> {
    k: usize,
    adj: BitRows,
    faces: FaceIndex,
    uf: ElderUnionFind<T>,
    deaths: Vec<(T, T)>,
    scratch: Vec<Vec<u64>>,
    chosen: Vec<u32>,
    clique: Vec<u32>,
    face: Vec<u32>,
    count: usize,
    limit: usize,
    layer: &'a str,
}

impl<'a, T: Scalar> CommunitySweep<'a, T> {
    fn new(n: usize, k: usize, limit: usize, layer: &'a str) -> Self {
        let adj = BitRows::new(n);
        let words = adj.words;
        Self {
            k,
            adj,
            faces: FaceIndex::new(n, k - 1),
            uf: ElderUnionFind::new(),
            deaths: Vec::new(),
            scratch: vec![vec![0; words]; k.saturating_sub(1)],
            chosen: Vec::with_capacity(k),
            clique: Vec::with_capacity(k),
            face: Vec::with_capacity(k),
            count: 0,
            limit,
            layer,
        }
    }

    /// Inserts edge `{i, j}` at `value` and registers every k-clique it completes.
    fn add_edge(&mut self, i: usize, j: usize, value: T) -> Result<()> {
        let need = self.k - 2;
        let common = &mut self.scratch[0];
        for (c, (a, b)) in common.iter_mut().zip(self.adj.row(i).iter().zip(self.adj.row(j))) {
            *c = a & b;
        }
        if count_ones(&self.scratch[0]) >= need {
            self.chosen.clear();
            self.extend(0, need, i as u32, j as u32, value)?;
        }
        self.adj.set(i, j);
        Ok(())
    }

    fn extend(&mut self, depth: usize, need: usize, i: u32, j: u32, value: T) -> Result<()> {
        if need == 0 {
            return self.register(i, j, value);
        }
        let cands: Vec<usize> = ones(&self.scratch[depth]).collect();
        for x in cands {
            if need > 1 {
                let (lo, hi) = self.scratch.split_at_mut(depth + 1);
                let next = &mut hi[0];
                for (n, (c, a)) in next.iter_mut().zip(lo[depth].iter().zip(self.adj.row(x))) {
                    *n = c & a;
                }
                clear_upto(next, x);
                if count_ones(next) < need - 1 {
                    continue;
                }
            }
            self.chosen.push(x as u32);
            self.extend(depth + 1, need - 1, i, j, value)?;
            self.chosen.pop();
        }
        Ok(())
    }

    fn register(&mut self, i: u32, j: u32, value: T) -> Result<()> {
        self.count += 1;
        if self.count > self.limit {
            return Err(Error::CliqueLimit {
                layer: self.layer.to_string(),
                count: self.count,
                limit: self.limit,
            });
        }
        self.clique.clear();
        self.clique.extend_from_slice(&self.chosen);
        self.clique.push(i);
        self.clique.push(j);
        self.clique.sort_unstable();
        let mut first = None;
        for skip in 0..self.k {
            self.face.clear();
            self.face.extend(
                self.clique
                    .iter()
                    .enumerate()
                    .filter(|&(t, _)| t != skip)
                    .map(|(_, &v)| v),
            );
            let uf = &mut self.uf;
            let id = self.faces.get_or_insert(&self.face, || uf.make(value));
            match first {
                None => first = Some(id),
                Some(f) => self.uf.union(f, id, value, &mut self.deaths),
            }
        }
        Ok(())
    }
}

fn sorted_edges<T: Scalar>(layer: &GeodesicLayer<T>) -> Vec<(u32, u32, T)> {
    let mut edges = layer.entries().to_vec();
    // entries are (i, j)-sorted already; a stable sort keeps that as tie order
    edges.sort_by(|a, b| total_cmp(&a.2, &b.2));
    edges
}

fn cap_of<T: Scalar>(layer: &GeodesicLayer<T>) -> T {
    layer.max_value().unwrap_or_else(T::zero)
}

/// Births and finite deaths of k-clique communities, plus the births of the
/// classes alive at the end. Returns `None` when the layer has no k-clique.
fn community_persistence<T: Scalar>(
    layer: &GeodesicLayer<T>,
    k: usize,
    max_cliques: usize,
) -> Result<(Vec<(T, T)>, Vec<T>)> {
    let n = layer.node_count();
    if k == 1 {
        if n > max_cliques {
            return Err(Error::CliqueLimit {
                layer: layer.source_layer().to_string(),
                count: n,
                limit: max_cliques,
            });
        }
        let mut uf = ElderUnionFind::new();
        for _ in 0..n {
            uf.make(T::zero());
        }
        let mut deaths = Vec::new();
        for (i, j, w) in sorted_edges(layer) {
            uf.union(i, j, w, &mut deaths);
        }
        return Ok((deaths, uf.root_births()));
    }
    let mut sweep = CommunitySweep::new(n, k, max_cliques, layer.source_layer());
    for (i, j, w) in sorted_edges(layer) {
        sweep.add_edge(i as usize, j as usize, w)?;
    }
    let alive = sweep.uf.root_births();
    Ok((sweep.deaths, alive))
}

/// Persistence diagram of k-clique communities for a single `k`. Essential
/// classes are capped at the layer's largest filtration value.
pub fn clique_community_pd<T: Scalar>(
    layer: &GeodesicLayer<T>,
    k: u32,
    max_cliques: usize,
) -> Result<PersistenceDiagram<T>> {
    if k == 0 {
        return Err(Error::param("clique size k must be at least 1"));
    }
    let cap = cap_of(layer);
    let (deaths, alive) = community_persistence(layer, k as usize, max_cliques)?;
    let points = deaths
        .into_iter()
        .map(|(birth, death)| DiagramPoint {
            k,
            birth,
            death,
            essential: false,
        })
        .chain(alive.into_iter().map(|birth| DiagramPoint {
            k,
            birth,
            death: cap,
            essential: true,
        }))
        .collect();
    Ok(PersistenceDiagram::new(points, Some(cap)))
}

/// Union of the clique-community diagrams for `k = 1..=k_max`.
pub fn layer_pd<T: Scalar>(layer: &GeodesicLayer<T>, k_max: u32, max_cliques: usize) -> Result<PersistenceDiagram<T>> {
    if k_max == 0 {
        return Err(Error::param("k_max must be at least 1"));
    }
    let cap = cap_of(layer);
    let mut points = Vec::new();
    for k in 1..=k_max {
        let pd = clique_community_pd(layer, k, max_cliques)?;
        if pd.is_empty() {
            // no k-clique implies no larger clique either
            break;
        }
        points.extend_from_slice(pd.points());
    }
    Ok(PersistenceDiagram::new(points, Some(cap)))
}

/// Dense pair-value lookup for small enumeration work.
fn value_matrix<T: Scalar>(layer: &GeodesicLayer<T>) -> Vec<Option<T>> {
    let n = layer.node_count();
    let mut m = vec![None; n * n];
    for &(i, j, w) in layer.entries() {
        m[i as usize * n + j as usize] = Some(w);
        m[j as usize * n + i as usize] = Some(w);
    }
    m
}

fn bron_kerbosch(adj: &BitRows, r: &mut Vec<u32>, mut p: Vec<u64>, mut x: Vec<u64>, out: &mut Vec<Vec<u32>>) {
    if p.iter().all(|&w| w == 0) {
        if x.iter().all(|&w| w == 0) {
            out.push(r.clone());
        }
        return;
    }
    // pivot: vertex of P ∪ X with most neighbours in P
    let pivot = ones(&p)
        .chain(ones(&x))
        .max_by_key(|&u| {
            adj.row(u)
                .iter()
                .zip(&p)
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
        })
        .expect("P non-empty");
    let cands: Vec<usize> = ones(&p)
        .filter(|&v| adj.row(pivot)[v / 64] & (1 << (v % 64)) == 0)
        .collect();
    for v in cands {
        let row = adj.row(v);
        let np: Vec<u64> = p.iter().zip(row).map(|(a, b)| a & b).collect();
        let nx: Vec<u64> = x.iter().zip(row).map(|(a, b)| a & b).collect();
        r.push(v as u32);
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p[v / 64] &= !(1 << (v % 64));
        x[v / 64] |= 1 << (v % 64);
    }
}

/// Every clique of size `1..=k_max` with its filtration value (0 for single
/// vertices, otherwise the largest internal pair value). Maximal cliques are
/// found once with pivoted Bron–Kerbosch and expanded into their sub-cliques.
/// Output is sorted by size, then vertex tuple.
pub fn enumerate_k_cliques<T: Scalar>(
    layer: &GeodesicLayer<T>,
    k_max: u32,
    max_cliques: usize,
) -> Result<Vec<KClique<T>>> {
    if k_max == 0 {
        return Err(Error::param("k_max must be at least 1"));
    }
    let n = layer.node_count();
    let mut adj = BitRows::new(n);
    for &(i, j, _) in layer.entries() {
        adj.set(i as usize, j as usize);
    }
    let mut p = vec![0u64; adj.words];
    for v in 0..n {
        p[v / 64] |= 1 << (v % 64);
    }
    let mut maximal = Vec::new();
    if n > 0 {
        bron_kerbosch(&adj, &mut Vec::new(), p, vec![0; adj.words], &mut maximal);
    }

    let values = value_matrix(layer);
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut out = Vec::new();
    let limit_err = |count| Error::CliqueLimit {
        layer: layer.source_layer().to_string(),
        count,
        limit: max_cliques,
    };
    for mut m in maximal {
        m.sort_unstable();
        let top = (k_max as usize).min(m.len());
        for size in 1..=top {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let sub: Vec<u32> = idx.iter().map(|&t| m[t]).collect();
                if !seen.contains(&sub) {
                    let mut value = T::zero();
                    for a in 0..sub.len() {
                        for b in (a + 1)..sub.len() {
                            let w = values[sub[a] as usize * n + sub[b] as usize].expect("clique vertices adjacent");
                            if w > value {
                                value = w;
                            }
                        }
                    }
                    seen.insert(sub.clone());
                    out.push(KClique {
                        vertices: sub,
                        filtration_value: value,
                    });
                    if out.len() > max_cliques {
                        return Err(limit_err(out.len()));
                    }
                }
                // next combination in lexicographic order
                let mut t = size;
                while t > 0 && idx[t - 1] == m.len() - size + t - 1 {
                    t -= 1;
                }
                if t == 0 {
                    break;
                }
                idx[t - 1] += 1;
                for u in t..size {
                    idx[u] = idx[u - 1] + 1;
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.vertices
            .len()
            .cmp(&b.vertices.len())
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    Ok(out)
}
