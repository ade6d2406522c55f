//! End-to-end detection: snapshots to stacked diagrams (T-step), consecutive
//! distances, then S-ESD on the distance series (AD-step). Also the
//! per-layer variant and its multiple-testing combination.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cliqueph::{layer_pd, PersistenceDiagram, DEFAULT_MAX_CLIQUES};
use crate::error::{Error, Result};
use crate::geodesic::densify;
use crate::mlgraph::{Sampling, TemporalMultilayerGraph, WeightTransform};
use crate::pdmetric::{
    caps_match, diagram_distance, spd_distance, stack, DiagramDistance, MatchPolicy, StackedPersistenceDiagram,
};
use crate::scalar::Scalar;
use crate::sesd::{self, AnomalySet, SesdConfig};

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    Tad,
    StadUnion,
    StadIntersect,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tad" => Ok(Mode::Tad),
            "stad-union" => Ok(Mode::StadUnion),
            "stad-intersect" => Ok(Mode::StadIntersect),
            other => Err(Error::param(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Tad => "tad",
            Mode::StadUnion => "stad-union",
            Mode::StadIntersect => "stad-intersect",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combine {
    Union,
    Intersect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig<T> {
    pub distance: DiagramDistance<T>,
    pub match_policy: MatchPolicy,
    pub k_max: u32,
    pub max_cliques: usize,
    pub transform: WeightTransform,
    pub sampling: Sampling,
    /// S-ESD settings; `sesd.alpha` is the global significance level.
    pub sesd: SesdConfig,
    pub mode: Mode,
    /// Bonferroni-correct the per-layer level in the S-TAD modes.
    pub bonferroni: bool,
    /// T-step worker count; results do not depend on it.
    #[serde(skip)]
    pub jobs: usize,
    #[serde(skip)]
    pub cache_dir: Option<PathBuf>,
}

impl<T: Scalar> Default for PipelineConfig<T> {
    fn default() -> Self {
        Self {
            distance: DiagramDistance::default(),
            match_policy: MatchPolicy::default(),
            k_max: 4,
            max_cliques: DEFAULT_MAX_CLIQUES,
            transform: WeightTransform::default(),
            sampling: Sampling::None,
            sesd: SesdConfig::default(),
            mode: Mode::Tad,
            bonferroni: true,
            jobs: 1,
            cache_dir: None,
        }
    }
}

impl<T: Scalar> PipelineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.distance.validate()?;
        self.sesd.validate()?;
        if self.k_max == 0 {
            return Err(Error::param("k_max must be at least 1"));
        }
        match self.sampling {
            Sampling::TopEdges(0) => return Err(Error::param("top-edge sample size must be at least 1")),
            Sampling::NodeBudget(0) => return Err(Error::param("node budget must be at least 1")),
            _ => {}
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.sesd.alpha
    }
}

/// Settings that determine the stacked diagrams, used as cache key material.
#[derive(Serialize)]
struct TStepKey<'a> {
    scalar: &'static str,
    k_max: u32,
    max_cliques: usize,
    transform: &'a WeightTransform,
    sampling: &'a Sampling,
}

/// On-disk store of stacked diagrams keyed by snapshot time and a digest of
/// the T-step settings and the snapshot content.
pub struct SpdCache {
    dir: PathBuf,
}

impl SpdCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path<T: Scalar>(
        &self,
        g: &TemporalMultilayerGraph<T>,
        index: usize,
        cfg: &PipelineConfig<T>,
    ) -> Result<PathBuf> {
        let snap = &g.snapshots()[index];
        let key = TStepKey {
            scalar: std::any::type_name::<T>(),
            k_max: cfg.k_max,
            max_cliques: cfg.max_cliques,
            transform: &cfg.transform,
            sampling: &cfg.sampling,
        };
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&key)?);
        h.update(serde_json::to_vec(g.layer_names())?);
        h.update(snap.time.to_le_bytes());
        for layer in &snap.layers {
            h.update(b"layer");
            for u in layer.nodes() {
                h.update(u.0.to_le_bytes());
            }
            for (u, v, e) in layer.edges() {
                h.update(format!("{},{},{},{};", u.0, v.0, e.raw, e.weight).as_bytes());
            }
        }
        let digest = hex::encode(h.finalize());
        Ok(self.dir.join(format!("spd-t{}-{}.json", snap.time, &digest[..16])))
    }

    fn load<T: Scalar>(&self, path: &Path) -> Option<StackedPersistenceDiagram<T>> {
        let bytes = std::fs::read(path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(spd) => Some(spd),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                None
            }
        }
    }

    fn store<T: Scalar>(&self, path: &Path, spd: &StackedPersistenceDiagram<T>) -> Result<()> {
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, serde_json::to_vec(spd)?)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn layer_diagram<T: Scalar>(
    g: &TemporalMultilayerGraph<T>,
    index: usize,
    layer: usize,
    cfg: &PipelineConfig<T>,
) -> Result<PersistenceDiagram<T>> {
    let snap = &g.snapshots()[index];
    let name = &g.layer_names()[layer];
    let sampled = cfg.sampling.apply(&snap.layers[layer]);
    let geo = densify(&sampled, name.as_str());
    layer_pd(&geo, cfg.k_max, cfg.max_cliques).map_err(|e| Error::Context {
        time: snap.time,
        layer: name.clone(),
        source: Box::new(e),
    })
}

fn in_pool<R: Send>(jobs: usize, work: impl FnOnce() -> R + Send) -> Result<R> {
    if jobs <= 1 {
        return Ok(work());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(work))
}

/// T-step: one stacked diagram per snapshot, in time order. The graph must
/// already carry the configured weights (see [`TemporalMultilayerGraph::transformed`]).
pub fn stacked_diagrams<T: Scalar>(
    g: &TemporalMultilayerGraph<T>,
    cfg: &PipelineConfig<T>,
) -> Result<Vec<StackedPersistenceDiagram<T>>> {
    cfg.validate()?;
    let cache = cfg.cache_dir.as_ref().map(SpdCache::new).transpose()?;
    let n = g.len();
    let layers = g.layer_names().len();

    let mut out: Vec<Option<StackedPersistenceDiagram<T>>> = vec![None; n];
    let mut paths = vec![None; n];
    if let Some(cache) = &cache {
        for i in 0..n {
            let path = cache.path(g, i, cfg)?;
            out[i] = cache.load(&path);
            paths[i] = Some(path);
        }
    }
    let hits = out.iter().filter(|s| s.is_some()).count();
    if cache.is_some() {
        log::info!("SPD cache: {hits} of {n} snapshots reused");
    }

    let tasks: Vec<(usize, usize)> = (0..n)
        .filter(|&i| out[i].is_none())
        .flat_map(|i| (0..layers).map(move |l| (i, l)))
        .collect();
    let run = |&(i, l): &(usize, usize)| layer_diagram(g, i, l, cfg);
    let computed: Vec<Result<PersistenceDiagram<T>>> = if cfg.jobs <= 1 {
        tasks.iter().map(run).collect()
    } else {
        in_pool(cfg.jobs, || tasks.par_iter().map(run).collect())?
    };

    let mut computed = computed.into_iter();
    for i in 0..n {
        if out[i].is_some() {
            continue;
        }
        let blocks = g
            .layer_names()
            .iter()
            .map(|name| Ok((name.clone(), computed.next().expect("one result per task")?)))
            .collect::<Result<Vec<_>>>()?;
        let spd = stack(blocks, g.snapshots()[i].time)?;
        if let (Some(cache), Some(path)) = (&cache, &paths[i]) {
            cache.store(path, &spd)?;
        }
        out[i] = Some(spd);
    }
    Ok(out.into_iter().map(|s| s.expect("filled")).collect())
}

fn check_length<T: Scalar>(g: &TemporalMultilayerGraph<T>, cfg: &PipelineConfig<T>) -> Result<()> {
    let required = 2 * cfg.sesd.period + 1;
    if g.len() < required {
        return Err(Error::TooFewSnapshots {
            found: g.len(),
            required,
        });
    }
    Ok(())
}

/// Distances between consecutive stacked diagrams, tagged with the later time.
pub fn distance_series<T: Scalar>(
    spds: &[StackedPersistenceDiagram<T>],
    cfg: &PipelineConfig<T>,
) -> Result<Vec<(u64, T)>> {
    let mismatched = spds
        .windows(2)
        .filter(|w| {
            w[0].blocks()
                .iter()
                .zip(w[1].blocks())
                .any(|((_, a), (_, b))| !caps_match(a, b))
        })
        .count();
    if mismatched > 0 {
        log::warn!(
            "{mismatched} of {} consecutive pairs compare diagrams with different essential caps",
            spds.len().saturating_sub(1)
        );
    }
    spds.windows(2)
        .map(|w| Ok((w[1].time, spd_distance(&w[0], &w[1], cfg.distance, cfg.match_policy)?)))
        .collect()
}

/// Per-layer distance series between consecutive diagrams of one layer.
pub fn layer_distance_series<T: Scalar>(
    spds: &[StackedPersistenceDiagram<T>],
    layer: &str,
    cfg: &PipelineConfig<T>,
) -> Result<Vec<(u64, T)>> {
    let policy = MatchPolicy {
        pooled: false,
        ..cfg.match_policy
    };
    spds.windows(2)
        .map(|w| {
            let (a, b) = (w[0].block(layer), w[1].block(layer));
            let (a, b) = a
                .zip(b)
                .ok_or_else(|| Error::LayerMismatch(format!("layer `{layer}` missing")))?;
            Ok((w[1].time, diagram_distance(a, b, cfg.distance, policy)?))
        })
        .collect()
}

/// S-ESD on a time-tagged series; flagged positions map back to times.
fn flag_times<T: Scalar>(series: &[(u64, T)], sesd_cfg: &SesdConfig) -> Result<(Vec<u64>, AnomalySet<T>)> {
    let values: Vec<T> = series.iter().map(|s| s.1).collect();
    let set = sesd::detect(&values, sesd_cfg)?;
    let times = set.indices.iter().map(|&i| series[i].0).collect();
    Ok((times, set))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TadResult<T> {
    pub distance_series: Vec<(u64, T)>,
    pub anomalies: Vec<u64>,
    pub detection: AnomalySet<T>,
}

/// Multilayer detection on stacked diagrams.
pub fn run_tad<T: Scalar>(g: &TemporalMultilayerGraph<T>, cfg: &PipelineConfig<T>) -> Result<TadResult<T>> {
    cfg.validate()?;
    check_length(g, cfg)?;
    let g = g.transformed(cfg.transform)?;
    let spds = stacked_diagrams(&g, cfg)?;
    tad_from_spds(&spds, cfg)
}

pub fn tad_from_spds<T: Scalar>(
    spds: &[StackedPersistenceDiagram<T>],
    cfg: &PipelineConfig<T>,
) -> Result<TadResult<T>> {
    let series = distance_series(spds, cfg)?;
    let (anomalies, detection) = flag_times(&series, &cfg.sesd)?;
    Ok(TadResult {
        distance_series: series,
        anomalies,
        detection,
    })
}

/// Per-layer anomaly sets from the single-layer variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerAnomalySets<T> {
    /// Significance level used for each layer's test.
    pub alpha_per_layer: f64,
    pub layers: Vec<LayerAnomalies<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerAnomalies<T> {
    pub layer: String,
    pub distance_series: Vec<(u64, T)>,
    pub anomalies: Vec<u64>,
}

/// Single-layer detection: every layer's consecutive-diagram distances are
/// tested on their own, at `alpha / L` when Bonferroni correction is on.
pub fn run_stad<T: Scalar>(g: &TemporalMultilayerGraph<T>, cfg: &PipelineConfig<T>) -> Result<LayerAnomalySets<T>> {
    cfg.validate()?;
    check_length(g, cfg)?;
    let g = g.transformed(cfg.transform)?;
    let spds = stacked_diagrams(&g, cfg)?;
    stad_from_spds(&spds, g.layer_names(), cfg)
}

pub fn stad_from_spds<T: Scalar>(
    spds: &[StackedPersistenceDiagram<T>],
    layer_names: &[String],
    cfg: &PipelineConfig<T>,
) -> Result<LayerAnomalySets<T>> {
    let alpha_per_layer = if cfg.bonferroni {
        cfg.alpha() / layer_names.len() as f64
    } else {
        cfg.alpha()
    };
    let sesd_cfg = cfg.sesd.with_alpha(alpha_per_layer);
    let layers = layer_names
        .iter()
        .map(|layer| {
            let series = layer_distance_series(spds, layer, cfg)?;
            let (anomalies, _) = flag_times(&series, &sesd_cfg)?;
            Ok(LayerAnomalies {
                layer: layer.clone(),
                distance_series: series,
                anomalies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LayerAnomalySets {
        alpha_per_layer,
        layers,
    })
}

/// Union keeps times flagged in at least one layer; intersection keeps
/// times flagged in every layer.
pub fn combine<T>(sets: &LayerAnomalySets<T>, how: Combine) -> Vec<u64> {
    let mut iter = sets
        .layers
        .iter()
        .map(|l| l.anomalies.iter().copied().collect::<BTreeSet<u64>>());
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    let out = iter.fold(first, |acc, s| match how {
        Combine::Union => &acc | &s,
        Combine::Intersect => &acc & &s,
    });
    out.into_iter().collect()
}

/// Family-wise error rate `1 - (1 - alpha_c)^L` of `L` independent tests.
pub fn fwer(alpha_c: f64, layers: u32) -> Result<f64> {
    if !(alpha_c > 0.0 && alpha_c < 1.0) {
        return Err(Error::param(format!(
            "per-test level must lie in (0, 1), got {alpha_c}"
        )));
    }
    if layers == 0 {
        return Err(Error::param("at least one test is required"));
    }
    if layers == 1 {
        return Ok(alpha_c);
    }
    Ok(-(f64::from(layers) * (-alpha_c).ln_1p()).exp_m1())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub tstep_ms: f64,
    pub adstep_ms: f64,
}

/// Everything a detection run produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport<T> {
    pub mode: Mode,
    pub distance_series: Vec<(u64, T)>,
    pub anomalies: Vec<u64>,
    pub tad: Option<TadResult<T>>,
    pub per_layer: Option<LayerAnomalySets<T>>,
    pub timings: Timings,
}

/// Runs the configured mode end to end.
pub fn run<T: Scalar>(g: &TemporalMultilayerGraph<T>, cfg: &PipelineConfig<T>) -> Result<DetectionReport<T>> {
    cfg.validate()?;
    check_length(g, cfg)?;
    let started = Instant::now();
    let g = g.transformed(cfg.transform)?;
    let spds = stacked_diagrams(&g, cfg)?;
    let tstep = started.elapsed();

    let started = Instant::now();
    let tad = tad_from_spds(&spds, cfg)?;
    let (anomalies, per_layer) = match cfg.mode {
        Mode::Tad => (tad.anomalies.clone(), None),
        Mode::StadUnion | Mode::StadIntersect => {
            let sets = stad_from_spds(&spds, g.layer_names(), cfg)?;
            let how = if cfg.mode == Mode::StadUnion {
                Combine::Union
            } else {
                Combine::Intersect
            };
            (combine(&sets, how), Some(sets))
        }
    };
    let adstep = started.elapsed();
    Ok(DetectionReport {
        mode: cfg.mode,
        distance_series: tad.distance_series.clone(),
        anomalies,
        tad: Some(tad),
        per_layer,
        timings: Timings {
            tstep_ms: tstep.as_secs_f64() * 1e3,
            adstep_ms: adstep.as_secs_f64() * 1e3,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(layers: &[&[u64]]) -> LayerAnomalySets<f64> {
        LayerAnomalySets {
            alpha_per_layer: 0.05,
            layers: layers
                .iter()
                .enumerate()
                .map(|(i, a)| LayerAnomalies {
                    layer: format!("l{i}"),
                    distance_series: Vec::new(),
                    anomalies: a.to_vec(),
                })
                .collect(),
        }
    }

    #[test]
    fn combine_set_algebra() {
        let s = sets(&[&[5], &[5, 9]]);
        assert_eq!(combine(&s, Combine::Union), vec![5, 9]);
        assert_eq!(combine(&s, Combine::Intersect), vec![5]);
        let e = sets(&[&[], &[]]);
        assert!(combine(&e, Combine::Union).is_empty());
        assert!(combine(&e, Combine::Intersect).is_empty());
    }

    #[test]
    fn fwer_values() {
        assert_eq!(fwer(0.05, 1).unwrap(), 0.05);
        assert!((fwer(0.05, 6).unwrap() - 0.264_908_109_375).abs() < 1e-12);
        assert!(fwer(0.05 / 6.0, 6).unwrap() <= 0.05);
        assert!(fwer(0.0, 3).is_err());
        assert!(fwer(0.1, 0).is_err());
    }

    #[test]
    fn modes_parse() {
        for m in [Mode::Tad, Mode::StadUnion, Mode::StadIntersect] {
            assert_eq!(m.to_string().parse::<Mode>().unwrap(), m);
        }
        assert!("nope".parse::<Mode>().is_err());
    }
}
