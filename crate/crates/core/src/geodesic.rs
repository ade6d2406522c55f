//! Geodesic densification: each layer's weighted adjacency is replaced by its
//! shortest-path metric on every connected pair.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlgraph::{EdgeData, LayerGraph, MultilayerSnapshot, NodeId};
use crate::scalar::{total_cmp, Scalar};

/// Complete weighted graph on each connected component of a layer.
///
/// Nodes are addressed locally by their position in [`nodes`](Self::nodes);
/// entries are stored once per unordered pair as `(i, j, dist)` with `i < j`,
/// sorted by `(i, j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicLayer<T> {
    source_layer: String,
    nodes: Vec<NodeId>,
    entries: Vec<(u32, u32, T)>,
}

impl<T: Scalar> GeodesicLayer<T> {
    /// Builds a layer from explicit pair values. Also used to feed arbitrary
    /// weighted graphs to the clique filtration without densifying them.
    pub fn from_entries(
        source_layer: impl Into<String>,
        nodes: Vec<NodeId>,
        mut entries: Vec<(u32, u32, T)>,
    ) -> Result<Self> {
        let n = nodes.len() as u32;
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("geodesic layer nodes must be strictly increasing"));
        }
        for e in entries.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0, e.2);
            }
            if e.0 == e.1 || e.1 >= n {
                return Err(Error::param(format!("invalid pair ({}, {})", e.0, e.1)));
            }
            if !(e.2 > T::zero()) || !e.2.is_finite() {
                return Err(Error::param(format!("pair value {} must be positive and finite", e.2)));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        if entries.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::param("duplicate pair"));
        }
        Ok(Self {
            source_layer: source_layer.into(),
            nodes,
            entries,
        })
    }

    /// Convenience for tests and small examples: `n` nodes with ids `0..n`.
    pub fn from_edges(n: usize, edges: &[(u32, u32, T)]) -> Result<Self> {
        Self::from_entries("", (0..n as u32).map(NodeId).collect(), edges.to_vec())
    }

    pub fn source_layer(&self) -> &str {
        &self.source_layer
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn entries(&self) -> &[(u32, u32, T)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dist(&self, u: NodeId, v: NodeId) -> Option<T> {
        let i = self.nodes.binary_search(&u).ok()? as u32;
        let j = self.nodes.binary_search(&v).ok()? as u32;
        let key = if i < j { (i, j) } else { (j, i) };
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .ok()
            .map(|k| self.entries[k].2)
    }

    /// Largest stored value, or `None` when there are no pairs.
    pub fn max_value(&self) -> Option<T> {
        self.entries.iter().map(|e| e.2).max_by(total_cmp)
    }

    /// The metric viewed as an ordinary layer (raw activity = distance).
    pub fn to_layer_graph(&self) -> LayerGraph<T> {
        let mut g = LayerGraph::new();
        for &n in &self.nodes {
            g.add_node(n);
        }
        for &(i, j, d) in &self.entries {
            g.set_edge(
                self.nodes[i as usize],
                self.nodes[j as usize],
                EdgeData { raw: d, weight: d },
            );
        }
        g
    }

    /// Debug dump `u,v,dist` with node names.
    pub fn write_csv<W: Write>(&self, names: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["u", "v", "dist"])?;
        for &(i, j, d) in &self.entries {
            w.write_record([
                names[self.nodes[i as usize].index()].as_str(),
                names[self.nodes[j as usize].index()].as_str(),
                d.to_string().as_str(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapItem<T> {
    dist: T,
    node: u32,
}

impl<T: Scalar> Eq for HeapItem<T> {}

impl<T: Scalar> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        total_cmp(&other.dist, &self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl<T: Scalar> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest-path metric of `layer` by Dijkstra from every node. Each pair is
/// computed once (from its smaller endpoint), so the result is exactly
/// symmetric. Disconnected pairs carry no entry.
pub fn densify<T: Scalar>(layer: &LayerGraph<T>, source_layer: impl Into<String>) -> GeodesicLayer<T> {
    let nodes: Vec<NodeId> = layer.nodes().iter().copied().collect();
    let n = nodes.len();
    let local = |id: NodeId| nodes.binary_search(&id).expect("edge endpoint in node set") as u32;
    let mut adj: Vec<Vec<(u32, T)>> = vec![Vec::new(); n];
    for (u, v, d) in layer.edges() {
        let (i, j) = (local(u), local(v));
        adj[i as usize].push((j, d.weight));
        adj[j as usize].push((i, d.weight));
    }

    let mut entries = Vec::new();
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = None);
        done.iter_mut().for_each(|d| *d = false);
        dist[s] = Some(T::zero());
        heap.push(HeapItem {
            dist: T::zero(),
            node: s as u32,
        });
        while let Some(HeapItem { dist: d, node }) = heap.pop() {
            let u = node as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, w) in &adj[u] {
                let nd = d + w;
                let v = v as usize;
                if !done[v] && dist[v].is_none_or(|old| nd < old) {
                    dist[v] = Some(nd);
                    heap.push(HeapItem {
                        dist: nd,
                        node: v as u32,
                    });
                }
            }
        }
        for (t, d) in dist.iter().enumerate().skip(s + 1) {
            if let Some(d) = d {
                entries.push((s as u32, t as u32, *d));
            }
        }
    }
    GeodesicLayer {
        source_layer: source_layer.into(),
        nodes,
        entries,
    }
}

/// Densifies every layer of a snapshot, preserving layer order.
pub fn densify_snapshot<T: Scalar>(snapshot: &MultilayerSnapshot<T>, layer_names: &[String]) -> Vec<GeodesicLayer<T>> {
    snapshot
        .layers
        .iter()
        .zip(layer_names)
        .map(|(g, name)| densify(g, name.as_str()))
        .collect()
}
