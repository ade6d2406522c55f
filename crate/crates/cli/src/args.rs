use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tad_core::bench::{AnomalyKind, SyntheticSpec, DEFAULT_WINDOW};
use tad_core::{
    DiagramDistance, MatchPolicy, Mode, NormalizationScope, PipelineConfig, Sampling, Scalar, SesdConfig,
    TransformKind, WeightTransform, DEFAULT_MAX_CLIQUES,
};

/// Topological anomaly detection for dynamic multilayer networks.
#[derive(Debug, Parser)]
#[command(name = "tad", version)]
pub struct Cli {
    /// More log output on stderr (repeat for more)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only log errors
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run detection on an edge list; writes a report JSON and the distance series
    Detect(DetectArgs),
    /// Generate a synthetic sequence with a planted anomaly
    Simulate(SimulateArgs),
    /// Score predicted anomaly times against ground-truth events
    Eval(EvalArgs),
    /// Persistence diagram of one layer at one snapshot
    Diagram(DiagramArgs),
    /// Distances between consecutive snapshots
    DistanceSeries(DistanceSeriesArgs),
    /// Print every flag with its default as JSON
    ConfigSchema(SchemaArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F64,
    F32,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Tad,
    StadUnion,
    StadIntersect,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Tad => Mode::Tad,
            ModeArg::StadUnion => Mode::StadUnion,
            ModeArg::StadIntersect => Mode::StadIntersect,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    ReciprocalOfNormalized,
    OneMinusNormalized,
    Identity,
    Unweighted,
}

impl From<TransformArg> for TransformKind {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::ReciprocalOfNormalized => TransformKind::ReciprocalOfNormalized,
            TransformArg::OneMinusNormalized => TransformKind::OneMinusNormalized,
            TransformArg::Identity => TransformKind::Identity,
            TransformArg::Unweighted => TransformKind::Unweighted,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    PerSnapshotLayer,
    GlobalPerLayer,
}

impl From<ScopeArg> for NormalizationScope {
    fn from(s: ScopeArg) -> Self {
        match s {
            ScopeArg::PerSnapshotLayer => NormalizationScope::PerSnapshotLayer,
            ScopeArg::GlobalPerLayer => NormalizationScope::GlobalPerLayer,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnomalyArg {
    Shock,
    RegimeChange,
    CliquePlant,
}

impl From<AnomalyArg> for AnomalyKind {
    fn from(a: AnomalyArg) -> Self {
        match a {
            AnomalyArg::Shock => AnomalyKind::Shock,
            AnomalyArg::RegimeChange => AnomalyKind::RegimeChange,
            AnomalyArg::CliquePlant => AnomalyKind::CliquePlant,
        }
    }
}

/// Input edge list and how its weights are read.
#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge CSV with header t,layer,src,dst,weight
    #[arg(short, long)]
    pub input: PathBuf,

    /// Map from raw activity to distance-like weights
    #[arg(long, value_enum, default_value_t = TransformArg::ReciprocalOfNormalized)]
    pub transform: TransformArg,

    /// Where the normalizing maximum is taken
    #[arg(long, value_enum, default_value_t = ScopeArg::PerSnapshotLayer)]
    pub normalization: ScopeArg,

    /// Floating-point precision of the computation
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    pub precision: Precision,
}

impl GraphArgs {
    pub fn transform(&self) -> WeightTransform {
        WeightTransform::new(self.transform.into(), self.normalization.into())
    }
}

/// Diagram construction settings.
#[derive(Debug, Clone, Args)]
pub struct TStepArgs {
    /// Largest clique size k in the filtration
    #[arg(long = "kmax", default_value_t = 4)]
    pub k_max: u32,

    /// Ceiling on the number of k-cliques per layer and k
    #[arg(long, default_value_t = DEFAULT_MAX_CLIQUES)]
    pub max_cliques: usize,

    /// Keep only the N heaviest-activity edges per layer [default: off]
    #[arg(long, value_name = "N", conflicts_with = "node_budget")]
    pub top_edges: Option<usize>,

    /// Keep nodes of the heaviest edges until N nodes are reached [default: off]
    #[arg(long, value_name = "N")]
    pub node_budget: Option<usize>,
}

impl TStepArgs {
    pub fn sampling(&self) -> Sampling {
        match (self.top_edges, self.node_budget) {
            (Some(p), _) => Sampling::TopEdges(p),
            (None, Some(n)) => Sampling::NodeBudget(n),
            (None, None) => Sampling::None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DistanceArgs {
    /// Diagram distance: w1, w2, wR for real R >= 1, or bottleneck
    #[arg(long, default_value = "w1")]
    pub distance: String,

    /// Let points of different clique sizes be matched [default: off]
    #[arg(long = "match-across-k")]
    pub across_k: bool,

    /// Merge all layers into one diagram before matching [default: off]
    #[arg(long = "spd-pooled")]
    pub pooled: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Worker threads for diagram construction; output does not depend on it
    #[arg(short, long, default_value_t = 1)]
    pub jobs: usize,

    /// Directory for cached stacked diagrams [default: no cache]
    #[arg(long, env = "TAD_WORKSPACE")]
    pub workspace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SesdArgs {
    /// Detection structure
    #[arg(long, value_enum, default_value_t = ModeArg::Tad)]
    pub mode: ModeArg,

    /// Seasonal period of the distance series
    #[arg(long, default_value_t = 7)]
    pub period: usize,

    /// Global significance level
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Largest flagged fraction of the series
    #[arg(long, default_value_t = 0.10)]
    pub max_anoms: f64,

    /// Trend piece length in periods
    #[arg(long, default_value_t = 2)]
    pub trend_window: usize,

    /// Use mean and standard deviation instead of median and MAD [default: off]
    #[arg(long)]
    pub non_robust: bool,

    /// Test every layer at the full alpha in the per-layer modes [default: off]
    #[arg(long)]
    pub no_bonferroni: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub tstep: TStepArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
    #[command(flatten)]
    pub sesd: SesdArgs,
    #[command(flatten)]
    pub run: RunArgs,

    /// Report JSON path
    #[arg(long, default_value = "report.json")]
    pub report: PathBuf,

    /// Distance-series CSV path
    #[arg(long, default_value = "distance_series.csv")]
    pub series: PathBuf,

    /// Also write flagged times as a predictions CSV [default: off]
    #[arg(long, value_name = "PATH")]
    pub predictions: Option<PathBuf>,

    /// Write per-snapshot, per-layer geodesic CSVs into this directory [default: off]
    #[arg(long, value_name = "DIR")]
    pub dump_geodesic: Option<PathBuf>,

    /// Write the seasonal decomposition of the distance series [default: off]
    #[arg(long, value_name = "PATH")]
    pub dump_decomposition: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of layers
    #[arg(long, default_value_t = 3)]
    pub layers: usize,

    /// Number of snapshots
    #[arg(long = "T", visible_alias = "snapshots", default_value_t = 100)]
    pub snapshots: usize,

    /// Nodes per layer
    #[arg(long, default_value_t = 60)]
    pub nodes: usize,

    /// Expected mean degree of the base regime
    #[arg(long, default_value_t = SyntheticSpec::default().mean_degree)]
    pub mean_degree: f64,

    /// Expected degrees fall off as (i + 1)^-exponent
    #[arg(long, default_value_t = SyntheticSpec::default().degree_exponent)]
    pub degree_exponent: f64,

    /// Success probability of the geometric raw-count draw
    #[arg(long, default_value_t = SyntheticSpec::default().count_p)]
    pub count_p: f64,

    /// Kind of planted anomaly
    #[arg(long, value_enum, default_value_t = AnomalyArg::Shock)]
    pub anomaly: AnomalyArg,

    /// Anomaly time
    #[arg(long, default_value_t = 50)]
    pub at: u64,

    /// Comma-separated 1-based layers hit by the anomaly [default: all]
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub affected_layers: Vec<usize>,

    /// Intensity factor, or clique size for clique-plant
    #[arg(long, default_value_t = 3.0)]
    pub magnitude: f64,

    /// Random seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Edge CSV output path
    #[arg(long, default_value = "edges.csv")]
    pub edges: PathBuf,

    /// Events CSV output path
    #[arg(long, default_value = "events.csv")]
    pub events: PathBuf,

    /// Also write the generator settings as JSON [default: off]
    #[arg(long, value_name = "PATH")]
    pub meta: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn spec(&self) -> anyhow::Result<SyntheticSpec> {
        let affected_layers = self
            .affected_layers
            .iter()
            .map(|&l| {
                if l == 0 || l > self.layers {
                    anyhow::bail!(tad_core::Error::Parameter(format!(
                        "affected layer {l} outside 1..={}",
                        self.layers
                    )));
                }
                Ok(l - 1)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(SyntheticSpec {
            layers: self.layers,
            snapshots: self.snapshots,
            nodes: self.nodes,
            mean_degree: self.mean_degree,
            degree_exponent: self.degree_exponent,
            count_p: self.count_p,
            anomaly: self.anomaly.into(),
            at: self.at,
            affected_layers,
            magnitude: self.magnitude,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predictions CSV with header t; required unless --counts is given
    #[arg(long, required_unless_present = "counts")]
    pub predictions: Option<PathBuf>,

    /// Events CSV with header t,label; required unless --counts is given
    #[arg(long, required_unless_present = "counts")]
    pub events: Option<PathBuf>,

    /// Number of evaluable time points; required unless --counts is given
    #[arg(long, required_unless_present = "counts")]
    pub total: Option<u64>,

    /// Matching window m: a prediction within m steps of an event counts
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: u64,

    /// Score given counts TP,FP,TN,FN directly [default: off]
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        value_name = "TP,FP,TN,FN",
        conflicts_with_all = ["predictions", "events", "total"]
    )]
    pub counts: Option<Vec<u64>>,

    /// Output path [default: stdout]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub tstep: TStepArgs,

    /// Snapshot time
    #[arg(short, long)]
    pub t: u64,

    /// Layer name
    #[arg(short, long)]
    pub layer: String,

    /// Output path [default: stdout]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceSeriesArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub tstep: TStepArgs,
    #[command(flatten)]
    pub distance: DistanceArgs,
    #[command(flatten)]
    pub run: RunArgs,

    /// Series of a single layer instead of the stacked diagrams [default: off]
    #[arg(short, long)]
    pub layer: Option<String>,

    /// Output path [default: stdout]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    /// Output path [default: stdout]
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Assembles and validates a pipeline configuration from the flag groups.
pub fn pipeline_config<T: Scalar>(
    graph: &GraphArgs,
    tstep: &TStepArgs,
    distance: Option<&DistanceArgs>,
    sesd: Option<&SesdArgs>,
    run: Option<&RunArgs>,
) -> tad_core::Result<PipelineConfig<T>> {
    let mut cfg = PipelineConfig::<T> {
        k_max: tstep.k_max,
        max_cliques: tstep.max_cliques,
        transform: graph.transform(),
        sampling: tstep.sampling(),
        ..PipelineConfig::default()
    };
    if let Some(d) = distance {
        cfg.distance = d.distance.parse::<DiagramDistance<T>>()?;
        cfg.match_policy = MatchPolicy {
            across_k: d.across_k,
            pooled: d.pooled,
        };
    }
    if let Some(s) = sesd {
        cfg.mode = s.mode.into();
        cfg.bonferroni = !s.no_bonferroni;
        cfg.sesd = SesdConfig {
            period: s.period,
            alpha: s.alpha,
            max_anoms_fraction: s.max_anoms,
            robust: !s.non_robust,
            trend_window: s.trend_window,
        };
    }
    if let Some(r) = run {
        if r.jobs == 0 {
            return Err(tad_core::Error::Parameter("jobs must be at least 1".into()));
        }
        cfg.jobs = r.jobs;
        cfg.cache_dir = r.workspace.as_ref().map(|w| w.join("spd-cache"));
    }
    cfg.validate()?;
    Ok(cfg)
}
