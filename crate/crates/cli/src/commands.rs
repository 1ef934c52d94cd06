use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use multisage::embed::{
    embed, read_checkpoint, write_checkpoint, Checkpoint, Features, Mode, Topology,
};
use multisage::eval::{read_split, write_split, EvalSplit};
use multisage::experiments::{
    emit_results, run_sweep, split_for_run, train_on_split, ErBase, OutputFormat, RunSettings,
    SweepKind, SweepSpec,
};
use multisage::graph::{LayerId, MultiplexGraph};
use multisage::ingest::{
    load_multiplex, parse_couplings, reference_summary, CouplingPolicy, GraphSummary,
};
use multisage::seed::derive_seed;
use serde::Serialize;

use crate::config::{load_dataset, resolve, DatasetConfig, RunConfig};
use crate::error::CliError;
use crate::{ConfigArgs, ScoreArgs, SplitExportArgs, SplitImportArgs, SweepArgs, TrainArgs};

pub fn inspect(
    edges: &Path,
    couplings: Option<&Path>,
    policy: CouplingPolicy,
    reference: Option<&str>,
    data_dir: Option<&Path>,
) -> Result<(), CliError> {
    let edges = resolve(edges, data_dir);
    let couplings = couplings.map(|c| resolve(c, data_dir));
    let g = load_multiplex(&edges, couplings.as_deref(), policy)?;
    let summary = GraphSummary::of(&g);
    let stem = edges
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset");
    println!("{stem}: {summary}");
    for (i, size) in g.layer_sizes().iter().enumerate() {
        println!("  layer {}: {size} replicas", g.layer_name(LayerId(i)));
    }
    let name = reference.unwrap_or(stem);
    match reference_summary(name) {
        Some(expected) => {
            let mismatches = summary.mismatches(&expected);
            if mismatches.is_empty() {
                println!("matches published counts for {name}");
            } else {
                for (field, got, want) in &mismatches {
                    println!("MISMATCH {field}: got {got}, published {want}");
                }
                return Err(CliError::Data(format!(
                    "{} field(s) differ from the published counts for {name}",
                    mismatches.len()
                )));
            }
        }
        None if reference.is_some() => {
            return Err(CliError::Config(format!(
                "no published counts for {name:?}"
            )));
        }
        None => {}
    }
    Ok(())
}

struct Loaded {
    config: RunConfig,
    dataset: DatasetConfig,
    graph: MultiplexGraph,
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.settings.master_seed = seed;
    }
    Ok(config)
}

fn load_with_graph(args: &ConfigArgs, data_dir: Option<&Path>) -> Result<Loaded, CliError> {
    let config = load_config(args)?;
    let dataset = config.dataset(args.dataset.as_deref())?.clone();
    let graph = load_dataset(&dataset, data_dir)?;
    Ok(Loaded {
        config,
        dataset,
        graph,
    })
}

fn read_split_file(path: &Path, g: &MultiplexGraph) -> Result<EvalSplit, CliError> {
    let f = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_split(BufReader::new(f), g)?)
}

fn set_threads(n: usize) -> Result<(), CliError> {
    if n == 0 {
        return Err(CliError::Config("threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))
}

#[derive(Serialize)]
struct Metrics<'a> {
    config: &'a RunConfig,
    dataset: &'a str,
    mode: Mode,
    run: usize,
    master_seed: u64,
    split_seed: u64,
    auc_intra: Option<f64>,
    auc_inter: Option<f64>,
    loss_history: &'a [f64],
}

pub fn train(args: &TrainArgs, data_dir: Option<&Path>) -> Result<(), CliError> {
    set_threads(args.threads)?;
    let Loaded {
        config,
        dataset,
        graph,
    } = load_with_graph(&args.config, data_dir)?;
    let settings = &config.settings;
    let mode = args.mode.unwrap_or(settings.modes[0]);
    let split = match &args.split {
        Some(p) => read_split_file(p, &graph)?,
        None => split_for_run(&graph, settings, args.run)?,
    };
    let trained = train_on_split(&graph, &split, mode, settings, args.run)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| config.output.dir.clone());
    fs::create_dir_all(&out)?;

    let metrics = Metrics {
        config: &config,
        dataset: &dataset.name,
        mode,
        run: args.run,
        master_seed: settings.master_seed,
        split_seed: split.seed,
        auc_intra: trained.evaluation.auc_intra,
        auc_inter: trained.evaluation.auc_inter,
        loss_history: &trained.loss_history,
    };
    let provenance = serde_json::to_string(&metrics)?;
    let checkpoint = Checkpoint {
        params: trained.params,
        seed: derive_seed(settings.master_seed, "train", args.run as u64),
        provenance,
    };
    write_checkpoint(
        BufWriter::new(File::create(out.join("model.ckpt"))?),
        &checkpoint,
    )?;
    let mut w = BufWriter::new(File::create(out.join("metrics.json"))?);
    serde_json::to_writer_pretty(&mut w, &metrics)?;
    writeln!(w)?;
    w.flush()?;

    let fmt = |a: Option<f64>| a.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!(
        "{} {mode} run {}: intra AUC {}, inter AUC {}, final loss {}",
        dataset.name,
        args.run,
        fmt(metrics.auc_intra),
        fmt(metrics.auc_inter),
        fmt(trained.loss_history.last().copied()),
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn needs_dataset(kind: &SweepKind) -> bool {
    matches!(
        kind,
        SweepKind::Benchmark
            | SweepKind::LayerSweep
            | SweepKind::ErSweep {
                base: ErBase::LargestLayer,
                ..
            }
    )
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

pub fn sweep(args: &SweepArgs, data_dir: Option<&Path>) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let kind = config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("config has no [sweep] table".into()))?;
    let mut settings: RunSettings = config.settings.clone();
    if let Some(r) = args.runs {
        settings.runs = r;
    }
    if let Some(t) = args.threads {
        settings.threads = Some(t);
    }
    settings.validate()?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| config.output.dir.clone());
    fs::create_dir_all(&out)?;
    let spec = SweepSpec {
        sweep: kind,
        settings,
    };
    let ext = extension(config.output.format);
    let mut written: Vec<PathBuf> = Vec::new();
    if needs_dataset(&spec.sweep) {
        let datasets: Vec<&DatasetConfig> = match &args.config.dataset {
            Some(name) => vec![config.dataset(Some(name))?],
            None => config.datasets.iter().collect(),
        };
        if datasets.is_empty() {
            return Err(CliError::Config(format!(
                "{} needs a dataset",
                spec.sweep.name()
            )));
        }
        for d in datasets {
            let g = load_dataset(d, data_dir)?;
            let result = run_sweep(&spec, Some((&d.name, &g)))?;
            let path = out.join(format!("{}-{}.{ext}", spec.sweep.name(), d.name));
            emit_results(&result, config.output.format, &path)?;
            written.push(path);
        }
    } else {
        let result = run_sweep(&spec, None)?;
        let path = out.join(format!("{}.{ext}", spec.sweep.name()));
        emit_results(&result, config.output.format, &path)?;
        written.push(path);
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn layer_id(g: &MultiplexGraph, name: &str) -> Option<LayerId> {
    g.layer_names().iter().position(|l| l == name).map(LayerId)
}

pub fn score(args: &ScoreArgs, data_dir: Option<&Path>) -> Result<(), CliError> {
    let Loaded { graph, .. } = load_with_graph(&args.config, data_dir)?;
    let f = File::open(&args.checkpoint)
        .map_err(|e| CliError::Data(format!("cannot open {}: {e}", args.checkpoint.display())))?;
    let checkpoint = read_checkpoint(BufReader::new(f))?;
    let params = checkpoint.params;
    let n = graph.node_count();
    if params.dims[0] != n {
        return Err(CliError::Data(format!(
            "checkpoint expects {} replicas, dataset has {n}",
            params.dims[0]
        )));
    }
    let embedded = match &args.split {
        Some(p) => read_split_file(p, &graph)?.training_graph(&graph),
        None => graph.clone(),
    };
    let z = embed(
        &params,
        &Topology::new(&embedded, params.mode),
        &Features::OneHot(n),
    )?;

    let reader: Box<dyn BufRead> = match &args.pairs {
        Some(p) => {
            Box::new(BufReader::new(File::open(p).map_err(|e| {
                CliError::Data(format!("cannot open {}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufReader::new(io::stdin())),
    };
    let pairs = parse_couplings(reader)?;
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    for p in pairs {
        let find = |layer: &str, node: &str| {
            layer_id(&graph, layer)
                .and_then(|l| graph.find(l, node))
                .ok_or_else(|| {
                    CliError::Data(format!("line {}: unknown replica {node}@{layer}", p.line))
                })
        };
        let (u, v) = (find(&p.layer_a, &p.node_a)?, find(&p.layer_b, &p.node_b)?);
        writeln!(
            w,
            "{} {} {} {} {}",
            p.layer_a,
            p.node_a,
            p.layer_b,
            p.node_b,
            z.score(u, v)
        )?;
    }
    w.flush()?;
    Ok(())
}

fn describe(split: &EvalSplit) -> String {
    format!(
        "seed {}, {} marked, train {} intra + {} inter, test {} intra + {} inter positives, \
         {} intra + {} inter negatives",
        split.seed,
        split.marked_nodes.len(),
        split.train_pos_intra.len(),
        split.train_pos_inter.len(),
        split.test_pos_intra.len(),
        split.test_pos_inter.len(),
        split.test_neg_intra.len(),
        split.test_neg_inter.len(),
    )
}

pub fn split_export(args: &SplitExportArgs, data_dir: Option<&Path>) -> Result<(), CliError> {
    let Loaded { config, graph, .. } = load_with_graph(&args.config, data_dir)?;
    let split = split_for_run(&graph, &config.settings, args.run)?;
    let mut w = BufWriter::new(File::create(&args.out)?);
    write_split(&mut w, &split, &graph)?;
    w.flush()?;
    println!("{}: {}", args.out.display(), describe(&split));
    Ok(())
}

pub fn split_import(args: &SplitImportArgs, data_dir: Option<&Path>) -> Result<(), CliError> {
    let Loaded { graph, dataset, .. } = load_with_graph(&args.config, data_dir)?;
    let split = read_split_file(&args.split, &graph)?;
    println!(
        "{} ({}): {}",
        args.split.display(),
        dataset.name,
        describe(&split)
    );
    Ok(())
}
