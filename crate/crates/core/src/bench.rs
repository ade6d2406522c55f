//! Synthetic benchmarks: a seeded multilayer generator with planted
//! anomalies, ground-truth handling and windowed confusion-matrix scoring.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlgraph::{LayerGraph, MultilayerSnapshot, NodeId, TemporalMultilayerGraph};
use crate::scalar::Scalar;

/// Name and version of the generator's random stream.
pub const RNG_ALGORITHM: &str = "chacha8-v1";

pub const DEFAULT_WINDOW: u64 = 2;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnomalyKind {
    /// Edge intensity multiplied by the magnitude at the anomaly time only.
    Shock,
    /// Edge intensity multiplied by the magnitude from the anomaly time on.
    RegimeChange,
    /// A clique on `magnitude` random nodes added at the anomaly time.
    CliquePlant,
}

impl FromStr for AnomalyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shock" => Ok(Self::Shock),
            "regime-change" => Ok(Self::RegimeChange),
            "clique-plant" => Ok(Self::CliquePlant),
            other => Err(Error::param(format!("unknown anomaly kind `{other}`"))),
        }
    }
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Shock => "shock",
            Self::RegimeChange => "regime-change",
            Self::CliquePlant => "clique-plant",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub layers: usize,
    /// Number of snapshots; times run `1..=snapshots`.
    pub snapshots: usize,
    pub nodes: usize,
    /// Expected mean degree of the base regime.
    pub mean_degree: f64,
    /// Expected degrees fall off as `(i + 1)^-degree_exponent`.
    pub degree_exponent: f64,
    /// Success probability of the geometric draw behind raw counts.
    pub count_p: f64,
    pub anomaly: AnomalyKind,
    pub at: u64,
    /// 0-based affected layers; empty means every layer.
    pub affected_layers: Vec<usize>,
    pub magnitude: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            layers: 3,
            snapshots: 100,
            nodes: 60,
            mean_degree: 0.35,
            degree_exponent: 0.1,
            count_p: 0.5,
            anomaly: AnomalyKind::Shock,
            at: 50,
            affected_layers: Vec::new(),
            magnitude: 3.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.snapshots == 0 || self.nodes < 2 {
            return Err(Error::param("need at least one layer, one snapshot and two nodes"));
        }
        if !(1..=self.snapshots as u64).contains(&self.at) {
            return Err(Error::param(format!(
                "anomaly time {} outside 1..={}",
                self.at, self.snapshots
            )));
        }
        if !(self.mean_degree > 0.0 && self.mean_degree.is_finite()) {
            return Err(Error::param("mean degree must be positive"));
        }
        if !(self.degree_exponent >= 0.0 && self.degree_exponent.is_finite()) {
            return Err(Error::param("degree exponent must be non-negative"));
        }
        if !(self.count_p > 0.0 && self.count_p <= 1.0) {
            return Err(Error::param("count probability must lie in (0, 1]"));
        }
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(Error::param("magnitude must be non-negative"));
        }
        if self.anomaly == AnomalyKind::CliquePlant
            && (self.magnitude.fract() != 0.0 || self.magnitude as usize > self.nodes)
        {
            return Err(Error::param(
                "planted clique size must be an integer no larger than the node count",
            ));
        }
        if let Some(&l) = self.affected_layers.iter().find(|&&l| l >= self.layers) {
            return Err(Error::param(format!("affected layer {l} out of range")));
        }
        Ok(())
    }

    fn affects(&self, layer: usize) -> bool {
        self.affected_layers.is_empty() || self.affected_layers.contains(&layer)
    }

    fn intensity(&self, t: u64, layer: usize) -> f64 {
        let hit = match self.anomaly {
            AnomalyKind::Shock => t == self.at,
            AnomalyKind::RegimeChange => t >= self.at,
            AnomalyKind::CliquePlant => false,
        };
        if hit && self.affects(layer) {
            self.magnitude
        } else {
            1.0
        }
    }

    fn expected_degrees(&self) -> Vec<f64> {
        let shape: Vec<f64> = (0..self.nodes)
            .map(|i| ((i + 1) as f64).powf(-self.degree_exponent))
            .collect();
        let total: f64 = shape.iter().sum();
        let scale = self.mean_degree * self.nodes as f64 / total;
        shape.into_iter().map(|w| w * scale).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub events: BTreeSet<u64>,
    pub window: u64,
}

impl GroundTruth {
    pub fn new(events: impl IntoIterator<Item = u64>, window: u64) -> Self {
        Self {
            events: events.into_iter().collect(),
            window,
        }
    }

    pub fn write_csv<W: Write>(&self, label: &str, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "label"])?;
        for t in &self.events {
            w.write_record([t.to_string().as_str(), label])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an events CSV with header `t,label`.
    pub fn read_csv<R: Read>(input: R, window: u64) -> Result<Self> {
        Ok(Self::new(read_times(input, &["t", "label"])?, window))
    }
}

fn read_times<R: Read>(input: R, header: &[&str]) -> Result<Vec<u64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut out = Vec::new();
    let mut header_seen = false;
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if !header_seen {
            if row.iter().collect::<Vec<_>>() != header {
                return Err(Error::Ingest {
                    line,
                    message: format!("expected header `{}`", header.join(",")),
                });
            }
            header_seen = true;
            continue;
        }
        if row.len() != header.len() {
            return Err(Error::Ingest {
                line,
                message: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        let t = row[0].parse::<u64>().map_err(|_| Error::Ingest {
            line,
            message: format!("invalid time `{}`", &row[0]),
        })?;
        out.push(t);
    }
    Ok(out)
}

/// Reads a predictions CSV with header `t`.
pub fn read_predictions<R: Read>(input: R) -> Result<Vec<u64>> {
    read_times(input, &["t"])
}

pub fn write_predictions<W: Write>(times: &[u64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t"])?;
    for t in times {
        w.write_record([t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationMeta {
    pub rng: String,
    pub spec: SyntheticSpec,
}

#[derive(Clone, Debug)]
pub struct Simulation<T> {
    /// Raw activity counts; weights equal the raw counts.
    pub graph: TemporalMultilayerGraph<T>,
    pub truth: GroundTruth,
    pub meta: SimulationMeta,
}

/// Number of failures before the first success, by inversion.
fn geometric(rng: &mut ChaCha8Rng, p: f64) -> u64 {
    if p >= 1.0 {
        return 0;
    }
    let u: f64 = 1.0 - rng.gen::<f64>();
    (u.ln() / (1.0 - p).ln()).floor() as u64
}

/// Draws a seeded synthetic sequence with one planted anomaly.
pub fn simulate<T: Scalar>(spec: &SyntheticSpec) -> Result<Simulation<T>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.nodes;
    let w = spec.expected_degrees();
    let total: f64 = w.iter().sum();
    let width = n.saturating_sub(1).to_string().len().max(3);
    let node_names: Vec<String> = (0..n).map(|i| format!("n{i:0width$}")).collect();
    let layer_names: Vec<String> = (1..=spec.layers).map(|l| format!("L{l}")).collect();

    let mut snapshots = Vec::with_capacity(spec.snapshots);
    for t in 1..=spec.snapshots as u64 {
        let mut layers = Vec::with_capacity(spec.layers);
        for l in 0..spec.layers {
            let intensity = spec.intensity(t, l);
            let mut g = LayerGraph::new();
            for i in 0..n {
                for j in i + 1..n {
                    let p = (intensity * w[i] * w[j] / total).min(1.0);
                    if rng.gen::<f64>() < p {
                        let raw = 1 + geometric(&mut rng, spec.count_p);
                        g.add_raw(NodeId(i as u32), NodeId(j as u32), T::of(raw as f64));
                    }
                }
            }
            if spec.anomaly == AnomalyKind::CliquePlant && t == spec.at && spec.affects(l) {
                let size = spec.magnitude as usize;
                let mut pool: Vec<u32> = (0..n as u32).collect();
                for k in 0..size {
                    let pick = rng.gen_range(k..n);
                    pool.swap(k, pick);
                }
                let mut members = pool[..size].to_vec();
                members.sort_unstable();
                for (a, &u) in members.iter().enumerate() {
                    for &v in &members[a + 1..] {
                        let raw = 1 + geometric(&mut rng, spec.count_p);
                        g.add_raw(NodeId(u), NodeId(v), T::of(raw as f64));
                    }
                }
            }
            layers.push(g);
        }
        snapshots.push(MultilayerSnapshot { time: t, layers });
    }
    let graph = TemporalMultilayerGraph::new(node_names, layer_names, snapshots)?;
    Ok(Simulation {
        graph,
        truth: GroundTruth::new([spec.at], DEFAULT_WINDOW),
        meta: SimulationMeta {
            rng: RNG_ALGORITHM.to_string(),
            spec: spec.clone(),
        },
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ConfusionMatrix {
    pub fn from_counts(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self {
            tp,
            fp,
            tn,
            fn_,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            precision,
            recall,
            f1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// One-to-one windowed matching: events are taken in time order and each
/// claims the earliest unclaimed prediction within `±window`. Remaining
/// predictions are false positives, remaining events false negatives, and
/// every other time index a true negative.
pub fn evaluate(predicted: &[u64], truth: &GroundTruth, total: u64) -> ConfusionMatrix {
    let preds: Vec<u64> = predicted.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut used = vec![false; preds.len()];
    let mut tp = 0;
    for &e in &truth.events {
        let lo = e.saturating_sub(truth.window);
        let hi = e.saturating_add(truth.window);
        let start = preds.partition_point(|&p| p < lo);
        if let Some(k) = (start..preds.len()).take_while(|&k| preds[k] <= hi).find(|&k| !used[k]) {
            used[k] = true;
            tp += 1;
        }
    }
    let fp = preds.len() as u64 - tp;
    let fn_ = truth.events.len() as u64 - tp;
    let tn = total.saturating_sub(tp + fp + fn_);
    ConfusionMatrix::from_counts(tp, fp, tn, fn_)
}
