//! Temporal multilayer graphs: data model, edge-list ingestion, weight
//! transforms and top-edge sampling.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{total_cmp, Scalar};

pub const EDGE_CSV_HEADER: [&str; 5] = ["t", "layer", "src", "dst", "weight"];

/// Dense node identifier. Ids are assigned in lexicographic order of the
/// node names, so comparing ids compares names.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeData<T> {
    /// Aggregated activity (transaction count) before transformation.
    pub raw: T,
    /// Filtration weight; distance semantics.
    pub weight: T,
}

/// Weighted undirected simple graph of one layer at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGraph<T> {
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<(NodeId, NodeId), EdgeData<T>>,
}

impl<T> Default for LayerGraph<T> {
    fn default() -> Self {
        Self {
            nodes: BTreeSet::new(),
            edges: BTreeMap::new(),
        }
    }
}

fn ordered(u: NodeId, v: NodeId) -> (NodeId, NodeId) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl<T: Scalar> LayerGraph<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, u: NodeId) {
        self.nodes.insert(u);
    }

    /// Adds raw activity to `{u, v}`; the weight mirrors the accumulated raw
    /// value until a transform is applied. Self-loops are ignored and
    /// reported as `false`.
    pub fn add_raw(&mut self, u: NodeId, v: NodeId, raw: T) -> bool {
        if u == v {
            return false;
        }
        self.nodes.insert(u);
        self.nodes.insert(v);
        let e = self.edges.entry(ordered(u, v)).or_insert(EdgeData {
            raw: T::zero(),
            weight: T::zero(),
        });
        e.raw = e.raw + raw;
        e.weight = e.raw;
        true
    }

    /// Inserts or replaces an edge with explicit raw activity and weight.
    pub fn set_edge(&mut self, u: NodeId, v: NodeId, data: EdgeData<T>) {
        assert!(u != v, "self-loop");
        self.nodes.insert(u);
        self.nodes.insert(v);
        self.edges.insert(ordered(u, v), data);
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    /// Edges as `(u, v, data)` with `u < v`, in `(u, v)` order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, &EdgeData<T>)> + '_ {
        self.edges.iter().map(|(&(u, v), d)| (u, v, d))
    }

    pub fn edge(&self, u: NodeId, v: NodeId) -> Option<&EdgeData<T>> {
        self.edges.get(&ordered(u, v))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_raw(&self) -> Option<T> {
        self.edges.values().map(|e| e.raw).max_by(total_cmp)
    }

    /// Subgraph induced on `keep`: every edge with both endpoints kept survives.
    pub fn induced(&self, keep: &BTreeSet<NodeId>) -> Self {
        let nodes = self.nodes.intersection(keep).copied().collect();
        let edges = self
            .edges
            .iter()
            .filter(|((u, v), _)| keep.contains(u) && keep.contains(v))
            .map(|(k, d)| (*k, *d))
            .collect();
        Self { nodes, edges }
    }

    /// Edges sorted by decreasing raw activity, ties by `(src, dst)` ids.
    fn edges_by_activity(&self) -> Vec<(NodeId, NodeId, T)> {
        let mut es: Vec<_> = self.edges().map(|(u, v, d)| (u, v, d.raw)).collect();
        es.sort_by(|a, b| total_cmp(&b.2, &a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        es
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TransformKind {
    Identity,
    #[default]
    ReciprocalOfNormalized,
    OneMinusNormalized,
    Unweighted,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationScope {
    #[default]
    PerSnapshotLayer,
    GlobalPerLayer,
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "reciprocal-of-normalized" | "reciprocal" => Ok(Self::ReciprocalOfNormalized),
            "one-minus-normalized" | "one-minus" => Ok(Self::OneMinusNormalized),
            "unweighted" => Ok(Self::Unweighted),
            other => Err(Error::param(format!("unknown weight transform `{other}`"))),
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Identity => "identity",
            Self::ReciprocalOfNormalized => "reciprocal-of-normalized",
            Self::OneMinusNormalized => "one-minus-normalized",
            Self::Unweighted => "unweighted",
        })
    }
}

impl FromStr for NormalizationScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-snapshot-layer" => Ok(Self::PerSnapshotLayer),
            "global-per-layer" => Ok(Self::GlobalPerLayer),
            other => Err(Error::param(format!("unknown normalization scope `{other}`"))),
        }
    }
}

impl fmt::Display for NormalizationScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PerSnapshotLayer => "per-snapshot-layer",
            Self::GlobalPerLayer => "global-per-layer",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct WeightTransform {
    pub kind: TransformKind,
    pub scope: NormalizationScope,
}

impl WeightTransform {
    pub fn new(kind: TransformKind, scope: NormalizationScope) -> Self {
        Self { kind, scope }
    }

    pub fn identity() -> Self {
        Self::new(TransformKind::Identity, NormalizationScope::PerSnapshotLayer)
    }
}

/// Recomputes every edge weight from its raw activity. The normalizing
/// maximum is the layer's own maximum raw count.
pub fn apply_weight_transform<T: Scalar>(layer: &LayerGraph<T>, transform: WeightTransform) -> Result<LayerGraph<T>> {
    let max = layer.max_raw().unwrap_or_else(T::one);
    transform_with_max(layer, transform.kind, max)
}

fn transform_with_max<T: Scalar>(layer: &LayerGraph<T>, kind: TransformKind, max: T) -> Result<LayerGraph<T>> {
    let mut out = layer.clone();
    for (&(u, v), e) in out.edges.iter_mut() {
        if !(e.raw > T::zero()) || !e.raw.is_finite() {
            return Err(Error::param(format!(
                "edge ({}, {}) has non-positive raw count {}",
                u.0, v.0, e.raw
            )));
        }
        e.weight = match kind {
            TransformKind::Identity => e.raw,
            TransformKind::ReciprocalOfNormalized => max / e.raw,
            TransformKind::OneMinusNormalized => T::one() - e.raw / (max + T::one()),
            TransformKind::Unweighted => T::one(),
        };
    }
    Ok(out)
}

/// Induced subgraph on the endpoints of the `p` most active edges.
pub fn sample_top_edges<T: Scalar>(layer: &LayerGraph<T>, p: usize) -> LayerGraph<T> {
    assert!(p >= 1, "p must be at least 1");
    if layer.edge_count() <= p {
        return layer.clone();
    }
    let keep: BTreeSet<NodeId> = layer
        .edges_by_activity()
        .into_iter()
        .take(p)
        .flat_map(|(u, v, _)| [u, v])
        .collect();
    layer.induced(&keep)
}

/// Greedy node-budget variant: adds edges by decreasing activity and stops
/// before the first edge that would push the kept node set past `budget`.
pub fn sample_node_budget<T: Scalar>(layer: &LayerGraph<T>, budget: usize) -> LayerGraph<T> {
    if layer.node_count() <= budget {
        return layer.clone();
    }
    let mut keep = BTreeSet::new();
    for (u, v, _) in layer.edges_by_activity() {
        let grow = usize::from(!keep.contains(&u)) + usize::from(!keep.contains(&v));
        if keep.len() + grow > budget {
            break;
        }
        keep.insert(u);
        keep.insert(v);
    }
    layer.induced(&keep)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Sampling {
    #[default]
    None,
    TopEdges(usize),
    NodeBudget(usize),
}

impl Sampling {
    pub fn apply<T: Scalar>(&self, layer: &LayerGraph<T>) -> LayerGraph<T> {
        match *self {
            Sampling::None => layer.clone(),
            Sampling::TopEdges(p) => sample_top_edges(layer, p),
            Sampling::NodeBudget(n) => sample_node_budget(layer, n),
        }
    }
}

/// One time slice: `L` layers in canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilayerSnapshot<T> {
    pub time: u64,
    pub layers: Vec<LayerGraph<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemporalMultilayerGraph<T> {
    node_names: Vec<String>,
    layer_names: Vec<String>,
    snapshots: Vec<MultilayerSnapshot<T>>,
}

impl<T: Scalar> TemporalMultilayerGraph<T> {
    /// Validates the structural invariants: unique layer names, strictly
    /// increasing times, a layer slot per name in every snapshot and node
    /// ids within range.
    pub fn new(
        node_names: Vec<String>,
        layer_names: Vec<String>,
        snapshots: Vec<MultilayerSnapshot<T>>,
    ) -> Result<Self> {
        if layer_names.is_empty() {
            return Err(Error::param("at least one layer is required"));
        }
        let unique: BTreeSet<_> = layer_names.iter().collect();
        if unique.len() != layer_names.len() {
            return Err(Error::param("layer names must be unique"));
        }
        for w in snapshots.windows(2) {
            if w[0].time >= w[1].time {
                return Err(Error::param("snapshot times must be strictly increasing"));
            }
        }
        for s in &snapshots {
            if s.layers.len() != layer_names.len() {
                return Err(Error::param(format!(
                    "snapshot t={} has {} layers, expected {}",
                    s.time,
                    s.layers.len(),
                    layer_names.len()
                )));
            }
            for l in &s.layers {
                if l.nodes.iter().any(|n| n.index() >= node_names.len()) {
                    return Err(Error::param("node id out of range"));
                }
            }
        }
        Ok(Self {
            node_names,
            layer_names,
            snapshots,
        })
    }

    pub fn node_names(&self) -> &[String] {
        &self.node_names
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id.index()]
    }

    pub fn layer_names(&self) -> &[String] {
        &self.layer_names
    }

    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layer_names.iter().position(|l| l == name)
    }

    pub fn snapshots(&self) -> &[MultilayerSnapshot<T>] {
        &self.snapshots
    }

    pub fn snapshot_at(&self, time: u64) -> Option<&MultilayerSnapshot<T>> {
        self.snapshots
            .binary_search_by_key(&time, |s| s.time)
            .ok()
            .map(|i| &self.snapshots[i])
    }

    pub fn times(&self) -> Vec<u64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Same graph with every weight recomputed from raw activity.
    pub fn transformed(&self, transform: WeightTransform) -> Result<Self> {
        let global_max: Vec<T> = (0..self.layer_names.len())
            .map(|l| {
                self.snapshots
                    .iter()
                    .filter_map(|s| s.layers[l].max_raw())
                    .max_by(total_cmp)
                    .unwrap_or_else(T::one)
            })
            .collect();
        let snapshots = self
            .snapshots
            .iter()
            .map(|s| {
                let layers = s
                    .layers
                    .iter()
                    .enumerate()
                    .map(|(l, g)| match transform.scope {
                        NormalizationScope::PerSnapshotLayer => apply_weight_transform(g, transform),
                        NormalizationScope::GlobalPerLayer => transform_with_max(g, transform.kind, global_max[l]),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MultilayerSnapshot { time: s.time, layers })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            node_names: self.node_names.clone(),
            layer_names: self.layer_names.clone(),
            snapshots,
        })
    }

    /// Writes the raw activity as an edge CSV; re-ingesting the output with
    /// the identity transform reproduces the raw data.
    pub fn write_edge_list<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(EDGE_CSV_HEADER)?;
        for s in &self.snapshots {
            let t = s.time.to_string();
            for (l, g) in s.layers.iter().enumerate() {
                for (u, v, d) in g.edges() {
                    w.write_record([
                        t.as_str(),
                        self.layer_names[l].as_str(),
                        self.node_name(u),
                        self.node_name(v),
                        d.raw.to_string().as_str(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Ingested<T> {
    pub graph: TemporalMultilayerGraph<T>,
    pub self_loops_dropped: usize,
    pub records: usize,
}

struct Record {
    t: u64,
    layer: String,
    src: String,
    dst: String,
    weight: f64,
}

fn ingest_err(line: u64, message: impl Into<String>) -> Error {
    Error::Ingest {
        line,
        message: message.into(),
    }
}

/// Parses an edge CSV (`t,layer,src,dst,weight`) into a temporal multilayer
/// graph. Duplicate and reversed records of the same `(t, layer, {src,dst})`
/// are summed before the transform is applied; under the unweighted
/// transform the weight column is not read and raw activity counts records.
pub fn ingest_edge_list<T: Scalar, R: Read>(stream: R, transform: WeightTransform) -> Result<Ingested<T>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::None)
        .from_reader(stream);

    let mut records = Vec::new();
    let mut header_seen = false;
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if !header_seen {
            let cols: Vec<&str> = row.iter().collect();
            if cols != EDGE_CSV_HEADER {
                return Err(ingest_err(
                    line,
                    format!("expected header `{}`", EDGE_CSV_HEADER.join(",")),
                ));
            }
            header_seen = true;
            continue;
        }
        if row.len() != 5 {
            return Err(ingest_err(line, format!("expected 5 fields, found {}", row.len())));
        }
        let t = row[0]
            .parse::<u64>()
            .map_err(|_| ingest_err(line, format!("invalid time index `{}`", &row[0])))?;
        let weight = if transform.kind == TransformKind::Unweighted {
            1.0
        } else {
            let w = row[4]
                .parse::<f64>()
                .map_err(|_| ingest_err(line, format!("non-numeric weight `{}`", &row[4])))?;
            if !w.is_finite() || w <= 0.0 {
                return Err(ingest_err(
                    line,
                    format!("weight must be positive and finite, found `{}`", &row[4]),
                ));
            }
            w
        };
        if row[1].is_empty() || row[2].is_empty() || row[3].is_empty() {
            return Err(ingest_err(line, "empty layer or node field"));
        }
        records.push(Record {
            t,
            layer: row[1].to_string(),
            src: row[2].to_string(),
            dst: row[3].to_string(),
            weight,
        });
    }
    if records.is_empty() {
        return Err(Error::NoRecords);
    }

    let self_loops_dropped = records.iter().filter(|r| r.src == r.dst).count();
    if self_loops_dropped > 0 {
        log::warn!("dropped {self_loops_dropped} self-loop record(s)");
    }

    let names: BTreeSet<&str> = records
        .iter()
        .filter(|r| r.src != r.dst)
        .flat_map(|r| [r.src.as_str(), r.dst.as_str()])
        .collect();
    let node_names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let node_ids: HashMap<&str, NodeId> = names.iter().enumerate().map(|(i, s)| (*s, NodeId(i as u32))).collect();
    let layer_names: Vec<String> = records
        .iter()
        .map(|r| r.layer.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
        .collect();
    let layer_idx: HashMap<&str, usize> = layer_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let mut by_time: BTreeMap<u64, Vec<LayerGraph<T>>> = BTreeMap::new();
    for r in &records {
        let layers = by_time
            .entry(r.t)
            .or_insert_with(|| vec![LayerGraph::new(); layer_names.len()]);
        if r.src == r.dst {
            continue;
        }
        let raw = T::from_f64(r.weight)
            .filter(|w| w.is_finite())
            .ok_or_else(|| Error::param(format!("weight {} not representable", r.weight)))?;
        layers[layer_idx[r.layer.as_str()]].add_raw(node_ids[r.src.as_str()], node_ids[r.dst.as_str()], raw);
    }
    let snapshots = by_time
        .into_iter()
        .map(|(time, layers)| MultilayerSnapshot { time, layers })
        .collect();
    let graph = TemporalMultilayerGraph::new(node_names, layer_names, snapshots)?.transformed(transform)?;
    Ok(Ingested {
        graph,
        self_loops_dropped,
        records: records.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ingest(s: &str, transform: WeightTransform) -> Result<Ingested<f64>> {
        ingest_edge_list(s.as_bytes(), transform)
    }

    fn id(g: &TemporalMultilayerGraph<f64>, name: &str) -> NodeId {
        NodeId(g.node_names().iter().position(|n| n == name).unwrap() as u32)
    }

    #[test]
    fn aggregates_reversed_duplicates() {
        let csv = "t,layer,src,dst,weight\n1,A,u,v,2\n1,A,v,u,3\n1,B,u,w,1\n";
        let g = ingest(csv, WeightTransform::identity()).unwrap().graph;
        assert_eq!(g.len(), 1);
        assert_eq!(g.layer_names(), ["A", "B"]);
        let s = &g.snapshots()[0];
        let (u, v, w) = (id(&g, "u"), id(&g, "v"), id(&g, "w"));
        assert_eq!(s.layers[0].edge_count(), 1);
        assert_eq!(s.layers[0].edge(u, v).unwrap().weight, 5.0);
        assert_eq!(s.layers[1].edge(u, w).unwrap().weight, 1.0);
        assert!(s.layers[1].edge(u, v).is_none());
    }

    #[test]
    fn drops_self_loops() {
        let csv = "t,layer,src,dst,weight\n1,A,u,u,4\n1,A,u,v,1";
        let out = ingest(csv, WeightTransform::identity()).unwrap();
        assert_eq!(out.self_loops_dropped, 1);
        assert_eq!(out.graph.snapshots()[0].layers[0].edge_count(), 1);
    }

    #[test]
    fn no_gap_filling() {
        let csv = "t,layer,src,dst,weight\n1,A,a,b,1\n3,A,a,b,1\n";
        let g = ingest(csv, WeightTransform::identity()).unwrap().graph;
        assert_eq!(g.times(), vec![1, 3]);
    }

    #[test]
    fn absent_layer_is_empty() {
        let csv = "t,layer,src,dst,weight\n1,A,a,b,1\n2,B,a,b,1\n";
        let g = ingest(csv, WeightTransform::identity()).unwrap().graph;
        assert!(g.snapshots()[0].layers[1].is_empty());
        assert!(g.snapshots()[1].layers[0].is_empty());
    }

    #[test]
    fn ingestion_errors_name_the_line() {
        let cases = [
            ("t,layer,src,dst,weight\n1,A,a,b\n", 2),
            ("t,layer,src,dst,weight\n1,A,a,b,1\n1,A,a,b,x\n", 3),
            ("t,layer,src,dst,weight\n1,A,a,b,-1\n", 2),
            ("t,layer,src,dst,weight\n-1,A,a,b,1\n", 2),
        ];
        for (csv, line) in cases {
            match ingest(csv, WeightTransform::identity()) {
                Err(Error::Ingest { line: l, .. }) => assert_eq!(l, line, "{csv}"),
                other => panic!("expected ingest error, got {other:?}"),
            }
        }
        assert!(matches!(
            ingest("t,layer,src,dst,weight\n", WeightTransform::identity()),
            Err(Error::NoRecords)
        ));
        assert!(matches!(ingest("", WeightTransform::identity()), Err(Error::NoRecords)));
        assert!(matches!(
            ingest("a,b\n1,2\n", WeightTransform::identity()),
            Err(Error::Ingest { line: 1, .. })
        ));
    }

    #[test]
    fn unweighted_ignores_weight_column() {
        let csv = "t,layer,src,dst,weight\n1,A,a,b,oops\n";
        let t = WeightTransform::new(TransformKind::Unweighted, NormalizationScope::PerSnapshotLayer);
        let g = ingest(csv, t).unwrap().graph;
        let e = g.snapshots()[0].layers[0].edge(NodeId(0), NodeId(1)).unwrap();
        assert_eq!(e.weight, 1.0);
    }

    fn counts(values: &[f64]) -> LayerGraph<f64> {
        let mut g = LayerGraph::new();
        for (i, &c) in values.iter().enumerate() {
            g.add_raw(NodeId(0), NodeId(i as u32 + 1), c);
        }
        g
    }

    fn weights(g: &LayerGraph<f64>) -> Vec<f64> {
        g.edges().map(|(_, _, d)| d.weight).collect()
    }

    #[test]
    fn weight_transforms() {
        let per = NormalizationScope::PerSnapshotLayer;
        let g = counts(&[4.0, 2.0, 1.0]);
        let r = apply_weight_transform(&g, WeightTransform::new(TransformKind::ReciprocalOfNormalized, per)).unwrap();
        assert_eq!(weights(&r), vec![1.0, 2.0, 4.0]);

        let g = counts(&[4.0, 2.0]);
        let r = apply_weight_transform(&g, WeightTransform::new(TransformKind::OneMinusNormalized, per)).unwrap();
        let w = weights(&r);
        assert!((w[0] - 0.2).abs() < 1e-15 && (w[1] - 0.6).abs() < 1e-15);

        let g = counts(&[7.0, 3.0, 0.5]);
        let r = apply_weight_transform(&g, WeightTransform::new(TransformKind::Unweighted, per)).unwrap();
        assert_eq!(weights(&r), vec![1.0; 3]);
        assert_eq!(r.nodes(), g.nodes());
    }

    #[test]
    fn transform_rejects_non_positive_counts() {
        let mut g = counts(&[1.0]);
        g.set_edge(NodeId(5), NodeId(6), EdgeData { raw: 0.0, weight: 0.0 });
        assert!(apply_weight_transform(&g, WeightTransform::default()).is_err());
    }

    #[test]
    fn global_scope_uses_layer_max_over_time() {
        let csv = "t,layer,src,dst,weight\n1,A,a,b,8\n2,A,a,b,2\n";
        let t = WeightTransform::new(
            TransformKind::ReciprocalOfNormalized,
            NormalizationScope::GlobalPerLayer,
        );
        let g = ingest(csv, t).unwrap().graph;
        let w: Vec<f64> = g
            .snapshots()
            .iter()
            .map(|s| s.layers[0].edge(NodeId(0), NodeId(1)).unwrap().weight)
            .collect();
        assert_eq!(w, vec![1.0, 4.0]);
    }

    fn star(counts: &[f64]) -> LayerGraph<f64> {
        let mut g = LayerGraph::new();
        for (i, &c) in counts.iter().enumerate() {
            g.add_raw(NodeId(0), NodeId(i as u32 + 1), c);
        }
        g
    }

    #[test]
    fn top_edges_on_star() {
        let g = star(&[10.0, 9.0, 1.0, 1.0, 1.0]);
        let s = sample_top_edges(&g, 2);
        let nodes: Vec<u32> = s.nodes().iter().map(|n| n.0).collect();
        assert_eq!(nodes, vec![0, 1, 2]);
        assert_eq!(s.edge_count(), 2);
        assert_eq!(sample_top_edges(&g, 5), g);
        assert_eq!(sample_top_edges(&g, 50), g);
    }

    #[test]
    fn top_edges_ties_break_by_ids() {
        let g = star(&[1.0, 1.0, 1.0]);
        let s = sample_top_edges(&g, 1);
        let nodes: Vec<u32> = s.nodes().iter().map(|n| n.0).collect();
        assert_eq!(nodes, vec![0, 1]);
    }

    #[test]
    fn node_budget_stops_before_overflow() {
        // Path 0-1 (5), 2-3 (4), 1-2 (3): budget 3 keeps only the first edge.
        let mut g = LayerGraph::new();
        g.add_raw(NodeId(0), NodeId(1), 5.0);
        g.add_raw(NodeId(2), NodeId(3), 4.0);
        g.add_raw(NodeId(1), NodeId(2), 3.0);
        let s = sample_node_budget(&g, 3);
        assert_eq!(s.node_count(), 2);
        let s = sample_node_budget(&g, 4);
        assert_eq!(s, g);
    }

    fn arb_layer() -> impl Strategy<Value = LayerGraph<f64>> {
        prop::collection::vec((0u32..12, 0u32..12, 1u32..20), 0..40).prop_map(|es| {
            let mut g = LayerGraph::new();
            for (u, v, c) in es {
                g.add_raw(NodeId(u), NodeId(v), c as f64);
            }
            g
        })
    }

    /// Brute force: the set of kept nodes from the top-p edge list.
    fn brute_top(g: &LayerGraph<f64>, p: usize) -> BTreeSet<NodeId> {
        let mut es: Vec<_> = g.edges().map(|(u, v, d)| (u, v, d.raw)).collect();
        es.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then((a.0, a.1).cmp(&(b.0, b.1))));
        if es.len() <= p {
            return g.nodes().clone();
        }
        es.iter().take(p).flat_map(|e| [e.0, e.1]).collect()
    }

    proptest! {
        #[test]
        fn sampling_yields_induced_subgraphs(g in arb_layer(), p in 1usize..10, budget in 0usize..10) {
            for s in [sample_top_edges(&g, p), sample_node_budget(&g, budget)] {
                for (u, v, d) in g.edges() {
                    let kept = s.nodes().contains(&u) && s.nodes().contains(&v);
                    prop_assert_eq!(kept, s.edge(u, v) == Some(d));
                }
            }
            let s = sample_node_budget(&g, budget);
            prop_assert!(s.node_count() <= budget || g.node_count() <= budget);
            let top = sample_top_edges(&g, p);
            prop_assert_eq!(top.nodes(), &brute_top(&g, p));
            prop_assert_eq!(sample_top_edges(&g, p), sample_top_edges(&g, p));
        }

        #[test]
        fn csv_round_trip(rows in prop::collection::vec((1u64..6, 0usize..3, 0u32..8, 0u32..8, 1u32..50), 1..60)) {
            let mut csv = String::from("t,layer,src,dst,weight\n");
            for (t, l, u, v, w) in &rows {
                csv.push_str(&format!("{t},{},n{u},n{v},{w}\n", ["x", "y", "z"][*l]));
            }
            let Ok(first) = ingest(&csv, WeightTransform::identity()) else {
                // every row was a self-loop
                prop_assert!(rows.iter().all(|r| r.2 == r.3));
                return Ok(());
            };
            if first.graph.snapshots().iter().all(|s| s.layers.iter().all(|l| l.edge_count() == 0)) {
                return Ok(());
            }
            let mut buf = Vec::new();
            first.graph.write_edge_list(&mut buf).unwrap();
            let second = ingest_edge_list::<f64, _>(buf.as_slice(), WeightTransform::identity()).unwrap();
            // layers that only carried self-loops vanish on re-serialization
            if first.graph.layer_names() == second.graph.layer_names() && first.graph.times() == second.graph.times() {
                prop_assert_eq!(first.graph, second.graph);
            }
        }
    }
}
