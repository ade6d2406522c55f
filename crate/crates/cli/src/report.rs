use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use tad_core::pipeline::{DetectionReport, Timings};
use tad_core::{PipelineConfig, Scalar};

#[derive(Serialize)]
pub struct SeriesPoint<T> {
    pub t: u64,
    pub distance: T,
}

#[derive(Serialize)]
pub struct Score<T> {
    pub t: u64,
    pub statistic: T,
}

#[derive(Serialize)]
pub struct LayerReport<T> {
    pub layer: String,
    pub alpha: f64,
    pub distance_series: Vec<SeriesPoint<T>>,
    pub anomalies: Vec<u64>,
}

/// Run-specific fields; everything outside `meta` depends only on inputs and flags.
#[derive(Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub generated_unix_ms: u128,
    pub jobs: usize,
    pub timings: Timings,
}

#[derive(Serialize)]
pub struct Report<'a, T> {
    pub config: &'a PipelineConfig<T>,
    pub layers: &'a [String],
    pub snapshots: usize,
    pub distance_series: Vec<SeriesPoint<T>>,
    pub anomalies: Vec<u64>,
    /// Test statistics of the multilayer detector's flagged points.
    pub scores: Vec<Score<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_layer_anomalies: Option<Vec<LayerReport<T>>>,
    pub meta: Meta,
}

pub fn points<T: Scalar>(series: &[(u64, T)]) -> Vec<SeriesPoint<T>> {
    series
        .iter()
        .map(|&(t, distance)| SeriesPoint { t, distance })
        .collect()
}

impl<'a, T: Scalar> Report<'a, T> {
    pub fn new(
        config: &'a PipelineConfig<T>,
        layers: &'a [String],
        snapshots: usize,
        run: &DetectionReport<T>,
    ) -> Self {
        let scores = run
            .tad
            .as_ref()
            .map(|tad| {
                tad.detection
                    .scores
                    .iter()
                    .map(|&(i, statistic)| Score {
                        t: tad.distance_series[i].0,
                        statistic,
                    })
                    .collect()
            })
            .unwrap_or_default();
        let per_layer_anomalies = run.per_layer.as_ref().map(|sets| {
            sets.layers
                .iter()
                .map(|l| LayerReport {
                    layer: l.layer.clone(),
                    alpha: sets.alpha_per_layer,
                    distance_series: points(&l.distance_series),
                    anomalies: l.anomalies.clone(),
                })
                .collect()
        });
        let generated_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        Self {
            config,
            layers,
            snapshots,
            distance_series: points(&run.distance_series),
            anomalies: run.anomalies.clone(),
            scores,
            per_layer_anomalies,
            meta: Meta {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                generated_unix_ms,
                jobs: config.jobs,
                timings: run.timings.clone(),
            },
        }
    }
}
