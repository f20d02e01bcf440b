use std::fs;
use std::path::{Path, PathBuf};

use advwalk::eval::{
    aggregate, attack, link_prediction_auc, node_classification, split_link_prediction, AttackMode, LinkSplit,
    MetricRow,
};
use advwalk::model::{read_matrix, write_matrix};
use advwalk::{EmbeddingModel, Graph, Labels, LoadOptions, Method, TrainConfig, Trainer, WalkConfig};

use crate::config::RunConfig;
use crate::fail::Failure;

pub fn preprocess(
    input: &Path,
    output: &Path,
    node_map: Option<&Path>,
    directed: bool,
    weighted: bool,
) -> Result<(), Failure> {
    let opts = LoadOptions { directed, weighted };
    let graph = Graph::load_edge_list(input, opts)?;
    graph.write_edge_list(output)?;
    // Ids are assigned in file order, so the map must describe the
    // canonical file as it will be read back.
    let canonical = Graph::load_edge_list(output, opts)?;
    let map = node_map.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = output.as_os_str().to_owned();
        p.push(".nodes");
        PathBuf::from(p)
    });
    canonical.write_node_map(&map)?;
    println!(
        "{} nodes, {} edges -> {}",
        canonical.node_count(),
        canonical.edge_count(),
        output.display()
    );
    Ok(())
}

pub fn train_config() -> RunConfig {
    let t = TrainConfig::default();
    let w = WalkConfig::default();
    RunConfig::new(
        "train",
        &[
            ("graph", None),
            ("out", None),
            ("directed", Some("false")),
            ("weighted", Some("false")),
            ("method", Some(t.method.as_str())),
            ("dim", Some(&t.dim.to_string())),
            ("epochs", Some(&t.epochs.to_string())),
            ("pretrain_epochs", Some(&t.pretrain_epochs.to_string())),
            ("batch_size", Some(&t.batch_size.to_string())),
            ("learning_rate", Some(&t.learning_rate.to_string())),
            ("eps", Some(&t.eps.to_string())),
            ("lambda", Some(&t.lambda.to_string())),
            ("neighbors", Some(&t.neighbors.to_string())),
            ("use_scale", Some(&t.use_scale.to_string())),
            ("proximity_order", Some(&t.proximity_order.to_string())),
            ("walks_per_node", Some(&w.walks_per_node.to_string())),
            ("walk_length", Some(&w.walk_length.to_string())),
            ("window", Some(&w.window.to_string())),
            ("negatives", Some(&w.negatives.to_string())),
            ("seed", Some("0")),
        ],
    )
}

fn walk_from(c: &RunConfig, seed: u64) -> Result<WalkConfig, Failure> {
    Ok(WalkConfig {
        walks_per_node: c.get("walks_per_node")?,
        walk_length: c.get("walk_length")?,
        window: c.get("window")?,
        negatives: c.get("negatives")?,
        seed,
    })
}

fn out_dir(c: &RunConfig) -> Result<PathBuf, Failure> {
    let out = c.path("out")?;
    fs::create_dir_all(&out).map_err(|e| Failure::Data(format!("{}: {e}", out.display())))?;
    Ok(out)
}

fn load_graph(c: &RunConfig) -> Result<Graph, Failure> {
    let opts = LoadOptions {
        directed: c.get("directed")?,
        weighted: c.get("weighted")?,
    };
    Ok(Graph::load_edge_list(c.path("graph")?, opts)?)
}

pub fn train(c: &RunConfig) -> Result<(), Failure> {
    c.raw("out")?;
    let seed: u64 = c.get("seed")?;
    let cfg = TrainConfig {
        method: c.get::<Method>("method")?,
        dim: c.get("dim")?,
        epochs: c.get("epochs")?,
        pretrain_epochs: c.get("pretrain_epochs")?,
        batch_size: c.get("batch_size")?,
        learning_rate: c.get("learning_rate")?,
        eps: c.get("eps")?,
        lambda: c.get("lambda")?,
        neighbors: c.get("neighbors")?,
        use_scale: c.get("use_scale")?,
        proximity_order: c.get("proximity_order")?,
        seed,
    };
    let walk = walk_from(c, seed)?;
    let graph = load_graph(c)?;
    let out = out_dir(c)?;
    c.write(&out.join("train.conf"))?;

    let mut trainer = Trainer::new(&graph, walk, cfg)?;
    let mut log = csv::Writer::from_path(out.join("loss.csv"))?;
    log.write_record(["epoch", "clean_loss", "reg_loss", "zero_grad_count"])?;
    let mut write_err = None;
    let result = trainer.run(|s, _| {
        if write_err.is_none() {
            let rec = [
                s.epoch.to_string(),
                s.clean_loss.to_string(),
                s.reg_loss.to_string(),
                s.zero_grad_count.to_string(),
            ];
            if let Err(e) = log.write_record(&rec) {
                write_err = Some(e);
            }
        }
    });
    log.flush()?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    result?;

    let model = trainer.model();
    write_matrix(out.join("embeddings.txt"), graph.names(), model.dim(), model.target())?;
    write_matrix(out.join("context.txt"), graph.names(), model.dim(), model.context())?;
    println!("trained {} epochs -> {}", trainer.epochs_done(), out.display());
    Ok(())
}

pub fn split_config() -> RunConfig {
    RunConfig::new(
        "split-lp",
        &[
            ("graph", None),
            ("out", None),
            ("weighted", Some("false")),
            ("keep_ratio", Some("0.8")),
            ("seed", Some("0")),
        ],
    )
}

pub fn split_lp(c: &RunConfig) -> Result<(), Failure> {
    c.raw("out")?;
    let opts = LoadOptions {
        directed: false,
        weighted: c.get("weighted")?,
    };
    let graph = Graph::load_edge_list(c.path("graph")?, opts)?;
    let split = split_link_prediction(&graph, c.get("keep_ratio")?, c.get("seed")?)?;
    let out = out_dir(c)?;
    c.write(&out.join("split.conf"))?;
    split.write(&graph, out.join("train_edges.txt"), out.join("test_pairs.txt"))?;
    println!(
        "{} training edges, {} test edges, {} test negatives -> {}",
        split.train_edges.len(),
        split.test_edges.len(),
        split.test_negatives.len(),
        out.display()
    );
    Ok(())
}

pub fn eval_config(task: &'static str) -> RunConfig {
    let mut keys: Vec<(&'static str, Option<&str>)> = vec![
        ("embeddings", None),
        ("graph", None),
        ("out", None),
        ("dataset", Some("graph")),
        ("method", None),
        ("seeds", Some("0,1,2,3,4,5,6,7,8,9")),
    ];
    match task {
        "lp" => keys.push(("test_pairs", None)),
        "nc" => {
            keys.extend([
                ("directed", Some("false")),
                ("weighted", Some("false")),
                ("labels", None),
                ("ratios", Some("0.1,0.5")),
            ]);
        }
        _ => {
            keys.extend([
                ("directed", Some("false")),
                ("weighted", Some("false")),
                ("labels", None),
                ("context", None),
                ("eps_grid", Some("0,0.5,1,1.5,2")),
                ("mode", Some("both")),
                ("train_ratio", Some("0.8")),
                ("walks_per_node", Some("1")),
                ("walk_length", Some("40")),
                ("window", Some("5")),
                ("negatives", Some("5")),
            ]);
        }
    }
    let section = match task {
        "lp" => "eval lp",
        "nc" => "eval nc",
        _ => "eval attack",
    };
    RunConfig::new(section, &keys)
}

/// Method label for result rows: the setting, else the sibling
/// `train.conf` of the embedding file, else `unknown`.
fn method_label(c: &RunConfig, embeddings: &Path) -> String {
    if let Ok(m) = c.raw("method") {
        return m.to_owned();
    }
    let sibling = embeddings.with_file_name("train.conf");
    let mut train = train_config();
    if train.load_file(&sibling).is_ok() {
        if let Ok(m) = train.raw("method") {
            return m.to_owned();
        }
    }
    "unknown".into()
}

fn embedding_rows(path: &Path, graph: &Graph) -> Result<(Vec<f64>, usize), Failure> {
    let m = read_matrix(path)?;
    Ok((m.aligned_to(graph.names())?, m.dim))
}

/// Maps `f` over `items` on up to `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> Result<R, Failure> + Sync) -> Result<Vec<R>, Failure> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let parts: Vec<Result<Vec<R>, Failure>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(|| part.iter().map(&f).collect::<Result<Vec<R>, Failure>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("evaluation worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

fn write_results(out: &Path, task: &str, rows: &[MetricRow]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(out.join(format!("{task}_metrics.csv")))?;
    w.write_record(["dataset", "method", "task", "ratio_or_eps", "seed", "metric", "value"])?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.method.clone(),
            r.task.clone(),
            r.ratio_or_eps.to_string(),
            r.seed.to_string(),
            r.metric.clone(),
            r.value.to_string(),
        ])?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(out.join(format!("{task}_aggregate.csv")))?;
    w.write_record(["dataset", "method", "task", "ratio_or_eps", "metric", "runs", "mean", "std"])?;
    for a in aggregate(rows) {
        println!(
            "{} {} {} {} {}: {:.4} +- {:.4} ({} runs)",
            a.dataset, a.method, a.task, a.ratio_or_eps, a.metric, a.mean, a.std, a.runs
        );
        w.write_record([
            a.dataset,
            a.method,
            a.task,
            a.ratio_or_eps.to_string(),
            a.metric,
            a.runs.to_string(),
            a.mean.to_string(),
            a.std.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct RowLabel {
    dataset: String,
    method: String,
}

impl RowLabel {
    fn row(&self, task: &str, ratio_or_eps: f64, seed: u64, metric: &str, value: f64) -> MetricRow {
        MetricRow {
            dataset: self.dataset.clone(),
            method: self.method.clone(),
            task: task.into(),
            ratio_or_eps,
            seed,
            metric: metric.into(),
            value,
        }
    }
}

fn label(c: &RunConfig, embeddings: &Path) -> Result<RowLabel, Failure> {
    Ok(RowLabel {
        dataset: c.raw("dataset")?.to_owned(),
        method: method_label(c, embeddings),
    })
}

pub fn eval_lp(c: &RunConfig, jobs: usize) -> Result<(), Failure> {
    c.raw("out")?;
    let emb_path = c.path("embeddings")?;
    let graph = Graph::load_edge_list(c.path("graph")?, LoadOptions { directed: false, weighted: true })?;
    let (emb, dim) = embedding_rows(&emb_path, &graph)?;
    let split = LinkSplit::read_test(&graph, c.path("test_pairs")?)?;
    let seeds: Vec<u64> = c.list("seeds")?;
    let lbl = label(c, &emb_path)?;
    let out = out_dir(c)?;
    c.write(&out.join("lp.conf"))?;
    let rows = par_map(&seeds, jobs, |&seed| {
        let auc = link_prediction_auc(&emb, dim, &split, seed)?;
        Ok(lbl.row("lp", split.keep_ratio, seed, "auc", auc))
    })?;
    write_results(&out, "lp", &rows)
}

pub fn eval_nc(c: &RunConfig, jobs: usize) -> Result<(), Failure> {
    c.raw("out")?;
    let emb_path = c.path("embeddings")?;
    let graph = load_graph(c)?;
    let (emb, dim) = embedding_rows(&emb_path, &graph)?;
    let labels = Labels::load(c.path("labels")?, &graph)?;
    let ratios: Vec<f64> = c.list("ratios")?;
    let seeds: Vec<u64> = c.list("seeds")?;
    let lbl = label(c, &emb_path)?;
    let out = out_dir(c)?;
    c.write(&out.join("nc.conf"))?;
    let cells: Vec<(f64, u64)> = ratios.iter().flat_map(|&r| seeds.iter().map(move |&s| (r, s))).collect();
    let rows = par_map(&cells, jobs, |&(ratio, seed)| {
        let acc = node_classification(&emb, dim, &labels, ratio, seed)?;
        Ok(lbl.row("nc", ratio, seed, "accuracy", acc))
    })?;
    write_results(&out, "nc", &rows)
}

pub fn eval_attack(c: &RunConfig, jobs: usize) -> Result<(), Failure> {
    c.raw("out")?;
    let emb_path = c.path("embeddings")?;
    let graph = load_graph(c)?;
    let (target, dim) = embedding_rows(&emb_path, &graph)?;
    let context_path = match c.raw("context") {
        Ok(p) => PathBuf::from(p),
        Err(_) => emb_path.with_file_name("context.txt"),
    };
    let (context, cdim) = embedding_rows(&context_path, &graph)?;
    if cdim != dim {
        return Err(Failure::Data(format!("target dimension {dim} but context dimension {cdim}")));
    }
    let model = EmbeddingModel::from_matrices(graph.node_count(), dim, target, context)?;
    let labels = Labels::load(c.path("labels")?, &graph)?;
    let grid: Vec<f64> = c.list("eps_grid")?;
    let modes = match c.raw("mode")? {
        "adversarial" => vec![AttackMode::Adversarial],
        "random" => vec![AttackMode::Random],
        "both" => vec![AttackMode::Adversarial, AttackMode::Random],
        other => return Err(Failure::Usage(format!("unknown attack mode {other:?}"))),
    };
    let ratio: f64 = c.get("train_ratio")?;
    let seeds: Vec<u64> = c.list("seeds")?;
    let walk = walk_from(c, 0)?;
    let lbl = label(c, &emb_path)?;
    let out = out_dir(c)?;
    c.write(&out.join("attack.conf"))?;
    let cells: Vec<(AttackMode, u64)> = modes.iter().flat_map(|&m| seeds.iter().map(move |&s| (m, s))).collect();
    let rows = par_map(&cells, jobs, |&(mode, seed)| {
        let points = attack(&model, &graph, &labels, &grid, mode, ratio, seed, &walk)?;
        let task = format!("attack_{}", mode.as_str());
        Ok(points
            .into_iter()
            .map(|p| lbl.row(&task, p.eps, seed, "accuracy", p.accuracy))
            .collect::<Vec<_>>())
    })?;
    write_results(&out, "attack", &rows.concat())
}
