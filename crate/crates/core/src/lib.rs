//! Topological anomaly detection for dynamic multilayer networks.
//!
//! Snapshots of a multilayer graph are turned into geodesic distance layers,
//! summarized by clique-community persistence diagrams, compared with
//! bottleneck or Wasserstein distances, and the resulting distance series is
//! screened with a seasonal ESD test.

mod assignment;
pub mod bench;
pub mod cliqueph;
pub mod error;
pub mod geodesic;
pub mod mlgraph;
pub mod pdmetric;
pub mod pipeline;
pub mod scalar;
pub mod sesd;
pub mod special;

pub use cliqueph::{
    clique_community_pd, enumerate_k_cliques, layer_pd, DiagramPoint, KClique, PersistenceDiagram, DEFAULT_MAX_CLIQUES,
};
pub use error::{Error, Result};
pub use geodesic::{densify, densify_snapshot, GeodesicLayer};
pub use mlgraph::{
    apply_weight_transform, ingest_edge_list, sample_node_budget, sample_top_edges, LayerGraph, MultilayerSnapshot,
    NodeId, NormalizationScope, Sampling, TemporalMultilayerGraph, TransformKind, WeightTransform,
};
pub use pdmetric::{diagram_distance, spd_distance, stack, DiagramDistance, MatchPolicy, StackedPersistenceDiagram};
pub use pipeline::{combine, fwer, run, run_stad, run_tad, Combine, Mode, PipelineConfig};
pub use scalar::Scalar;
pub use sesd::{AnomalySet, Decomposition, SesdConfig};

pub type LayerGraphF64 = LayerGraph<f64>;
pub type LayerGraphF32 = LayerGraph<f32>;
pub type TemporalGraphF64 = TemporalMultilayerGraph<f64>;
pub type TemporalGraphF32 = TemporalMultilayerGraph<f32>;
pub type GeodesicLayerF64 = GeodesicLayer<f64>;
pub type GeodesicLayerF32 = GeodesicLayer<f32>;
pub type PersistenceDiagramF64 = PersistenceDiagram<f64>;
pub type PersistenceDiagramF32 = PersistenceDiagram<f32>;
pub type StackedDiagramF64 = StackedPersistenceDiagram<f64>;
pub type StackedDiagramF32 = StackedPersistenceDiagram<f32>;
pub type PipelineConfigF64 = PipelineConfig<f64>;
pub type PipelineConfigF32 = PipelineConfig<f32>;
