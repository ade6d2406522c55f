use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tad_core::bench::{evaluate, read_predictions, simulate, write_predictions, ConfusionMatrix, GroundTruth};
use tad_core::pipeline::{self, stacked_diagrams};
use tad_core::{densify, ingest_edge_list, layer_pd, Error, Scalar, TemporalMultilayerGraph};

use crate::args::{
    pipeline_config, DetectArgs, DiagramArgs, DistanceSeriesArgs, EvalArgs, GraphArgs, SchemaArgs, SimulateArgs,
};
use crate::report::Report;
use crate::schema::schema;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// File at `path`, or stdout.
fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn write_json(value: &impl serde::Serialize, mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn write_series<T: Scalar>(series: &[(u64, T)], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "distance"])?;
    for (t, d) in series {
        w.write_record([t.to_string(), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn load<T: Scalar>(args: &GraphArgs) -> Result<TemporalMultilayerGraph<T>> {
    let ingested = ingest_edge_list::<T, _>(open(&args.input)?, args.transform())
        .with_context(|| format!("reading {}", args.input.display()))?;
    if ingested.self_loops_dropped > 0 {
        log::warn!("dropped {} self-loop records", ingested.self_loops_dropped);
    }
    log::info!(
        "{} records, {} snapshots, {} layers, {} nodes",
        ingested.records,
        ingested.graph.len(),
        ingested.graph.layer_names().len(),
        ingested.graph.node_names().len()
    );
    Ok(ingested.graph)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn dump_geodesic<T: Scalar>(
    g: &TemporalMultilayerGraph<T>,
    cfg: &tad_core::PipelineConfig<T>,
    dir: &Path,
) -> Result<()> {
    let g = g.transformed(cfg.transform)?;
    for snap in g.snapshots() {
        for (layer, name) in snap.layers.iter().zip(g.layer_names()) {
            let geo = densify(&cfg.sampling.apply(layer), name.as_str());
            let path = dir.join(format!("geodesic-t{}-{}.csv", snap.time, file_safe(name)));
            geo.write_csv(g.node_names(), create(&path)?)?;
        }
    }
    Ok(())
}

pub fn detect(args: &DetectArgs) -> Result<()> {
    match args.graph.precision {
        crate::args::Precision::F64 => detect_as::<f64>(args),
        crate::args::Precision::F32 => detect_as::<f32>(args),
    }
}

fn detect_as<T: Scalar>(args: &DetectArgs) -> Result<()> {
    let cfg = pipeline_config::<T>(
        &args.graph,
        &args.tstep,
        Some(&args.distance),
        Some(&args.sesd),
        Some(&args.run),
    )?;
    let g = load::<T>(&args.graph)?;
    let run = pipeline::run(&g, &cfg)?;
    log::info!(
        "T-step {:.0} ms, AD-step {:.0} ms, {} anomalies",
        run.timings.tstep_ms,
        run.timings.adstep_ms,
        run.anomalies.len()
    );

    let report = Report::new(&cfg, g.layer_names(), g.len(), &run);
    write_json(&report, create(&args.report)?)?;
    write_series(&run.distance_series, create(&args.series)?)?;
    if let Some(path) = &args.predictions {
        write_predictions(&run.anomalies, create(path)?)?;
    }
    if let Some(path) = &args.dump_decomposition {
        if let Some(d) = run.tad.as_ref().and_then(|t| t.detection.decomposition.as_ref()) {
            d.write_csv(create(path)?)?;
        }
    }
    if let Some(dir) = &args.dump_geodesic {
        dump_geodesic(&g, &cfg, dir)?;
    }
    Ok(())
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let spec = args.spec()?;
    let sim = simulate::<f64>(&spec)?;
    let mut edges = create(&args.edges)?;
    sim.graph.write_edge_list(&mut edges)?;
    edges.flush()?;
    let mut events = create(&args.events)?;
    sim.truth.write_csv(&spec.anomaly.to_string(), &mut events)?;
    events.flush()?;
    if let Some(path) = &args.meta {
        write_json(&sim.meta, create(path)?)?;
    }
    Ok(())
}

fn check_range(what: &str, times: &[u64], total: u64) -> Result<()> {
    if let Some(t) = times.iter().find(|&&t| t == 0 || t > total) {
        anyhow::bail!(Error::Ingest {
            line: 0,
            message: format!("{what} time {t} outside 1..={total}"),
        });
    }
    Ok(())
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let cm = match (&args.counts, &args.predictions, &args.events, args.total) {
        (Some(c), ..) => {
            let [tp, fp, tn, fn_] = c[..] else {
                anyhow::bail!(Error::Parameter(format!("--counts takes 4 values, got {}", c.len())));
            };
            ConfusionMatrix::from_counts(tp, fp, tn, fn_)
        }
        (None, Some(p), Some(e), Some(total)) => {
            let predicted = read_predictions(open(p)?).with_context(|| format!("reading {}", p.display()))?;
            let truth =
                GroundTruth::read_csv(open(e)?, args.window).with_context(|| format!("reading {}", e.display()))?;
            check_range("prediction", &predicted, total)?;
            check_range("event", &truth.events.iter().copied().collect::<Vec<_>>(), total)?;
            evaluate(&predicted, &truth, total)
        }
        _ => anyhow::bail!(Error::Parameter("predictions, events and total are required".into())),
    };
    write_json(&cm, sink(args.output.as_ref())?)
}

pub fn diagram(args: &DiagramArgs) -> Result<()> {
    match args.graph.precision {
        crate::args::Precision::F64 => diagram_as::<f64>(args),
        crate::args::Precision::F32 => diagram_as::<f32>(args),
    }
}

fn diagram_as<T: Scalar>(args: &DiagramArgs) -> Result<()> {
    let cfg = pipeline_config::<T>(&args.graph, &args.tstep, None, None, None)?;
    let g = load::<T>(&args.graph)?.transformed(cfg.transform)?;
    let l = g
        .layer_index(&args.layer)
        .ok_or_else(|| Error::LayerMismatch(format!("no layer `{}`", args.layer)))?;
    let snap = g.snapshot_at(args.t).ok_or_else(|| Error::Ingest {
        line: 0,
        message: format!("no snapshot at t={}", args.t),
    })?;
    let geo = densify(&cfg.sampling.apply(&snap.layers[l]), args.layer.as_str());
    let pd = layer_pd(&geo, cfg.k_max, cfg.max_cliques).map_err(|e| Error::Context {
        time: args.t,
        layer: args.layer.clone(),
        source: Box::new(e),
    })?;
    pd.write_csv(sink(args.output.as_ref())?)?;
    Ok(())
}

pub fn distance_series(args: &DistanceSeriesArgs) -> Result<()> {
    match args.graph.precision {
        crate::args::Precision::F64 => distance_series_as::<f64>(args),
        crate::args::Precision::F32 => distance_series_as::<f32>(args),
    }
}

fn distance_series_as<T: Scalar>(args: &DistanceSeriesArgs) -> Result<()> {
    let cfg = pipeline_config::<T>(&args.graph, &args.tstep, Some(&args.distance), None, Some(&args.run))?;
    let g = load::<T>(&args.graph)?.transformed(cfg.transform)?;
    if let Some(layer) = &args.layer {
        if g.layer_index(layer).is_none() {
            anyhow::bail!(Error::LayerMismatch(format!("no layer `{layer}`")));
        }
    }
    let spds = stacked_diagrams(&g, &cfg)?;
    let series = match &args.layer {
        Some(layer) => pipeline::layer_distance_series(&spds, layer, &cfg)?,
        None => pipeline::distance_series(&spds, &cfg)?,
    };
    write_series(&series, sink(args.output.as_ref())?)
}

pub fn config_schema(args: &SchemaArgs) -> Result<()> {
    write_json(&schema(), sink(args.output.as_ref())?)
}
