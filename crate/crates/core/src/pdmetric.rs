//! Stacked persistence diagrams and bottleneck / Wasserstein distances.
//!
//! Ground metric is L∞ on the plane; a point may be matched to the diagonal
//! at cost `(death - birth) / 2`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assignment::{hopcroft_karp, hungarian};
use crate::cliqueph::{DiagramPoint, PersistenceDiagram};
use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "r")]
pub enum DiagramDistance<T> {
    Bottleneck,
    Wasserstein(T),
}

impl<T: Scalar> Default for DiagramDistance<T> {
    fn default() -> Self {
        DiagramDistance::Wasserstein(T::one())
    }
}

impl<T: Scalar> DiagramDistance<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DiagramDistance::Wasserstein(r) if !(r >= T::one()) || !r.is_finite() => Err(Error::param(format!(
                "Wasserstein order r must be finite and >= 1, got {r}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Accepts `w1`, `w2`, `wR` for any real `R >= 1`, and `bottleneck`.
impl<T: Scalar> FromStr for DiagramDistance<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "bottleneck" || s == "winf" {
            return Ok(DiagramDistance::Bottleneck);
        }
        let r = s
            .strip_prefix('w')
            .and_then(|r| r.parse::<f64>().ok())
            .and_then(T::from_f64)
            .ok_or_else(|| Error::param(format!("unknown distance `{s}`")))?;
        let d = DiagramDistance::Wasserstein(r);
        d.validate()?;
        Ok(d)
    }
}

impl<T: Scalar> fmt::Display for DiagramDistance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiagramDistance::Bottleneck => f.write_str("bottleneck"),
            DiagramDistance::Wasserstein(r) => write!(f, "w{r}"),
        }
    }
}

/// How points are allowed to pair up.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchPolicy {
    /// Allow a point of clique size `k` to match one of a different size.
    pub across_k: bool,
    /// Pool all layer blocks of a stacked diagram into one before matching.
    pub pooled: bool,
}

/// Layer-tagged collection of per-layer diagrams for one snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StackedPersistenceDiagram<T> {
    pub time: u64,
    blocks: Vec<(String, PersistenceDiagram<T>)>,
}

impl<T: Scalar> StackedPersistenceDiagram<T> {
    pub fn blocks(&self) -> &[(String, PersistenceDiagram<T>)] {
        &self.blocks
    }

    pub fn block(&self, layer: &str) -> Option<&PersistenceDiagram<T>> {
        self.blocks.iter().find(|(l, _)| l == layer).map(|(_, d)| d)
    }

    pub fn layer_names(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().map(|(l, _)| l.as_str())
    }

    /// Number of topological feature classes across all blocks.
    pub fn total_points(&self) -> usize {
        self.blocks.iter().map(|(_, d)| d.len()).sum()
    }

    /// All blocks merged into one diagram (ablation only).
    pub fn pooled(&self) -> PersistenceDiagram<T> {
        let points = self
            .blocks
            .iter()
            .flat_map(|(_, d)| d.points().iter().copied())
            .collect();
        let cap = self
            .blocks
            .iter()
            .filter_map(|(_, d)| d.essential_cap())
            .max_by(total_cmp);
        PersistenceDiagram::new(points, cap)
    }
}

/// Stacks per-layer diagrams in the given order.
pub fn stack<T: Scalar>(pds: Vec<(String, PersistenceDiagram<T>)>, time: u64) -> Result<StackedPersistenceDiagram<T>> {
    let names: BTreeSet<&str> = pds.iter().map(|(l, _)| l.as_str()).collect();
    if names.len() != pds.len() {
        return Err(Error::param("layer names in a stacked diagram must be unique"));
    }
    Ok(StackedPersistenceDiagram { time, blocks: pds })
}

fn linf<T: Scalar>(a: &DiagramPoint<T>, b: &DiagramPoint<T>) -> T {
    (a.birth - b.birth).abs().max((a.death - b.death).abs())
}

fn to_diagonal<T: Scalar>(p: &DiagramPoint<T>) -> T {
    (p.death - p.birth).abs() / T::of(2.0)
}

/// Augmented `(n+m) x (n+m)` problem: rows are A then diagonal slots for B,
/// columns are B then diagonal slots for A.
struct Augmented<T> {
    n: usize,
    m: usize,
    pair: Vec<T>,
    diag_a: Vec<T>,
    diag_b: Vec<T>,
}

impl<T: Scalar> Augmented<T> {
    fn new(a: &[DiagramPoint<T>], b: &[DiagramPoint<T>]) -> Self {
        let pair = a.iter().flat_map(|p| b.iter().map(move |q| linf(p, q))).collect();
        Self {
            n: a.len(),
            m: b.len(),
            pair,
            diag_a: a.iter().map(to_diagonal).collect(),
            diag_b: b.iter().map(to_diagonal).collect(),
        }
    }

    fn wasserstein_power(&self, r: T) -> T {
        let (n, m) = (self.n, self.m);
        let size = n + m;
        if size == 0 {
            return T::zero();
        }
        let pow = |x: T| if r == T::one() { x } else { x.powf(r) };
        let mut cost = vec![T::zero(); size * size];
        for i in 0..size {
            for j in 0..size {
                cost[i * size + j] = match (i < n, j < m) {
                    (true, true) => pow(self.pair[i * m + j]),
                    (true, false) => pow(self.diag_a[i]),
                    (false, true) => pow(self.diag_b[j]),
                    (false, false) => T::zero(),
                };
            }
        }
        hungarian(size, &cost).1
    }

    fn bottleneck(&self) -> T {
        let (n, m) = (self.n, self.m);
        if n + m == 0 {
            return T::zero();
        }
        let mut candidates: Vec<T> = self
            .pair
            .iter()
            .chain(&self.diag_a)
            .chain(&self.diag_b)
            .copied()
            .chain(std::iter::once(T::zero()))
            .collect();
        candidates.sort_by(total_cmp);
        candidates.dedup();
        let feasible = |lambda: T| {
            let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n + m];
            for i in 0..n {
                for j in 0..m {
                    if self.pair[i * m + j] <= lambda {
                        adj[i].push(j as u32);
                    }
                }
                if self.diag_a[i] <= lambda {
                    adj[i].push((m + i) as u32);
                }
            }
            for j in 0..m {
                let row = &mut adj[n + j];
                if self.diag_b[j] <= lambda {
                    row.push(j as u32);
                }
                row.extend((0..n).map(|i| (m + i) as u32));
            }
            hopcroft_karp(n + m, n + m, &adj) == n + m
        };
        let (mut lo, mut hi) = (0, candidates.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if feasible(candidates[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        candidates[lo]
    }
}

/// Points grouped into the independent matching problems implied by the policy.
fn groups<'a, T: Scalar>(
    a: &'a PersistenceDiagram<T>,
    b: &'a PersistenceDiagram<T>,
    across_k: bool,
) -> Vec<(Vec<DiagramPoint<T>>, Vec<DiagramPoint<T>>)> {
    if across_k {
        return vec![(a.points().to_vec(), b.points().to_vec())];
    }
    let ks: BTreeSet<u32> = a.points().iter().chain(b.points()).map(|p| p.k).collect();
    ks.into_iter()
        .map(|k| {
            let pick = |d: &PersistenceDiagram<T>| d.points().iter().filter(|p| p.k == k).copied().collect();
            (pick(a), pick(b))
        })
        .collect()
}

fn distance_unchecked<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    d: DiagramDistance<T>,
    across_k: bool,
) -> T {
    let problems = groups(a, b, across_k);
    match d {
        DiagramDistance::Bottleneck => problems
            .iter()
            .map(|(pa, pb)| Augmented::new(pa, pb).bottleneck())
            .fold(T::zero(), T::max),
        DiagramDistance::Wasserstein(r) => {
            let total: T = problems
                .iter()
                .map(|(pa, pb)| Augmented::new(pa, pb).wasserstein_power(r))
                .sum();
            if r == T::one() {
                total
            } else {
                total.powf(T::one() / r)
            }
        }
    }
}

/// True when both diagrams finitized their essential classes at the same value.
pub fn caps_match<T: Scalar>(a: &PersistenceDiagram<T>, b: &PersistenceDiagram<T>) -> bool {
    let has_essential = |d: &PersistenceDiagram<T>| d.points().iter().any(|p| p.essential);
    !(has_essential(a) && has_essential(b)) || a.essential_cap() == b.essential_cap()
}

/// Exact bottleneck or r-Wasserstein distance between two diagrams.
pub fn diagram_distance<T: Scalar>(
    a: &PersistenceDiagram<T>,
    b: &PersistenceDiagram<T>,
    d: DiagramDistance<T>,
    policy: MatchPolicy,
) -> Result<T> {
    d.validate()?;
    if !caps_match(a, b) {
        log::warn!(
            "comparing diagrams with different essential caps ({:?} vs {:?})",
            a.essential_cap(),
            b.essential_cap()
        );
    }
    Ok(distance_unchecked(a, b, d, policy.across_k))
}

/// Distance between stacked diagrams: per-layer distances aggregated by max
/// (bottleneck) or by an r-sum (Wasserstein). Blocks are matched by layer name.
pub fn spd_distance<T: Scalar>(
    a: &StackedPersistenceDiagram<T>,
    b: &StackedPersistenceDiagram<T>,
    d: DiagramDistance<T>,
    policy: MatchPolicy,
) -> Result<T> {
    d.validate()?;
    let la: BTreeSet<&str> = a.layer_names().collect();
    let lb: BTreeSet<&str> = b.layer_names().collect();
    if la != lb {
        return Err(Error::LayerMismatch(format!(
            "{:?} vs {:?}",
            la.into_iter().collect::<Vec<_>>(),
            lb.into_iter().collect::<Vec<_>>()
        )));
    }
    if policy.pooled {
        return Ok(distance_unchecked(&a.pooled(), &b.pooled(), d, policy.across_k));
    }
    let per_block = a.blocks().iter().map(|(layer, da)| {
        let db = b.block(layer).expect("layer sets checked");
        distance_unchecked(da, db, d, policy.across_k)
    });
    Ok(aggregate(per_block, d))
}

/// Combines per-layer distances the way [`spd_distance`] does.
pub fn aggregate<T: Scalar>(values: impl Iterator<Item = T>, d: DiagramDistance<T>) -> T {
    match d {
        DiagramDistance::Bottleneck => values.fold(T::zero(), T::max),
        DiagramDistance::Wasserstein(r) if r == T::one() => values.sum(),
        DiagramDistance::Wasserstein(r) => values.map(|v| v.powf(r)).sum::<T>().powf(T::one() / r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pd(points: &[(f64, f64)]) -> PersistenceDiagram<f64> {
        PersistenceDiagram::from_pairs(1, points)
    }

    const W1: DiagramDistance<f64> = DiagramDistance::Wasserstein(1.0);
    const B: DiagramDistance<f64> = DiagramDistance::Bottleneck;

    fn dist(a: &PersistenceDiagram<f64>, b: &PersistenceDiagram<f64>, d: DiagramDistance<f64>) -> f64 {
        diagram_distance(a, b, d, MatchPolicy::default()).unwrap()
    }

    #[test]
    fn identical_is_zero() {
        let a = pd(&[(0.0, 2.0), (1.0, 3.0)]);
        assert_eq!(dist(&a, &a, W1), 0.0);
        assert_eq!(dist(&a, &a, B), 0.0);
    }

    #[test]
    fn single_point_against_empty() {
        let a = pd(&[(0.0, 2.0)]);
        let e = pd(&[]);
        assert_eq!(dist(&a, &e, B), 1.0);
        assert_eq!(dist(&a, &e, W1), 1.0);
        assert_eq!(dist(&e, &e, W1), 0.0);
    }

    #[test]
    fn direct_match_beats_diagonal() {
        let a = pd(&[(0.0, 1.0)]);
        let b = pd(&[(0.0, 2.0)]);
        assert_eq!(dist(&a, &b, B), 1.0);
        assert_eq!(dist(&a, &b, W1), 1.0);
    }

    #[test]
    fn wasserstein_two() {
        // (0,4) vs (0,1): direct 3, via diagonal 2 + 0.5 -> r=2: min(9, 4.25)
        let a = pd(&[(0.0, 4.0)]);
        let b = pd(&[(0.0, 1.0)]);
        let d = dist(&a, &b, DiagramDistance::Wasserstein(2.0));
        assert!((d - 4.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn k_tags_block_matching() {
        let a = PersistenceDiagram::from_pairs(2, &[(0.0, 2.0)]);
        let b = PersistenceDiagram::from_pairs(3, &[(0.0, 2.0)]);
        assert_eq!(dist(&a, &b, W1), 2.0);
        let across = MatchPolicy {
            across_k: true,
            pooled: false,
        };
        assert_eq!(diagram_distance(&a, &b, W1, across).unwrap(), 0.0);
    }

    #[test]
    fn bad_order_rejected() {
        let a = pd(&[]);
        assert!(diagram_distance(&a, &a, DiagramDistance::Wasserstein(0.5), MatchPolicy::default()).is_err());
        assert!("w0.5".parse::<DiagramDistance<f64>>().is_err());
        assert_eq!("w1".parse::<DiagramDistance<f64>>().unwrap(), W1);
        assert_eq!("bottleneck".parse::<DiagramDistance<f64>>().unwrap(), B);
    }

    fn spd(blocks: Vec<(&str, PersistenceDiagram<f64>)>) -> StackedPersistenceDiagram<f64> {
        stack(blocks.into_iter().map(|(l, d)| (l.to_string(), d)).collect(), 1).unwrap()
    }

    #[test]
    fn stacking_keeps_blocks_apart() {
        let s = spd(vec![
            ("a", pd(&[(0.0, 1.0), (0.0, 2.0), (0.0, 3.0)])),
            ("b", pd(&[(0.0, 1.0), (0.0, 2.0)])),
            ("c", pd(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)])),
        ]);
        assert_eq!(s.blocks().len(), 3);
        assert_eq!(s.total_points(), 8);
        let empty = spd(vec![("a", pd(&[])), ("b", pd(&[]))]);
        assert_eq!(empty.blocks().len(), 2);
        assert!(stack(vec![("a".into(), pd(&[])), ("a".into(), pd(&[]))], 1).is_err());
    }

    #[test]
    fn spd_aggregation() {
        let x = spd(vec![("a", pd(&[(0.0, 2.0)])), ("b", pd(&[(0.0, 5.0)]))]);
        let y = spd(vec![("a", pd(&[])), ("b", pd(&[]))]);
        let p = MatchPolicy::default();
        assert_eq!(spd_distance(&x, &y, W1, p).unwrap(), 3.5);
        assert_eq!(spd_distance(&x, &y, B, p).unwrap(), 2.5);
        assert_eq!(spd_distance(&x, &x, W1, p).unwrap(), 0.0);

        let single = spd(vec![("a", pd(&[(0.0, 2.0), (1.0, 4.0)]))]);
        let other = spd(vec![("a", pd(&[(0.5, 1.0)]))]);
        assert_eq!(
            spd_distance(&single, &other, W1, p).unwrap(),
            dist(single.block("a").unwrap(), other.block("a").unwrap(), W1)
        );

        let z = spd(vec![("a", pd(&[])), ("c", pd(&[]))]);
        assert!(matches!(spd_distance(&x, &z, W1, p), Err(Error::LayerMismatch(_))));
    }

    #[test]
    fn pooled_matching_crosses_layers() {
        let x = spd(vec![("a", pd(&[(0.0, 4.0)])), ("b", pd(&[]))]);
        let y = spd(vec![("a", pd(&[])), ("b", pd(&[(0.0, 4.0)]))]);
        let pooled = MatchPolicy {
            across_k: false,
            pooled: true,
        };
        assert_eq!(spd_distance(&x, &y, W1, pooled).unwrap(), 0.0);
        assert_eq!(spd_distance(&x, &y, W1, MatchPolicy::default()).unwrap(), 4.0);
    }
}
