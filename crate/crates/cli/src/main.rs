mod commands;
mod config;
mod fail;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::fail::Failure;

/// Adversarially regularized DeepWalk embeddings and their evaluation.
#[derive(Debug, Parser)]
#[command(name = "advwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Clean an edge list: drop self-loops and isolated nodes, merge
    /// duplicates, and write it in canonical order with a node-id map.
    Preprocess(PreprocessArgs),
    /// Train embeddings.
    Train(TrainArgs),
    /// Hide edges for link prediction and write the residual graph and
    /// labelled test pairs.
    SplitLp(SplitArgs),
    /// Evaluate embeddings.
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args)]
struct GraphFlags {
    /// Treat edges as directed arcs.
    #[arg(long)]
    directed: bool,
    /// Read a third column as the edge weight.
    #[arg(long)]
    weighted: bool,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    input: PathBuf,
    output: PathBuf,
    /// Node-id map path (default: OUTPUT with a `.nodes` suffix).
    #[arg(long)]
    node_map: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphFlags,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// `key = value` settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = "ADVWALK_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    directed: Option<bool>,
    #[arg(long)]
    weighted: Option<bool>,
    /// dwns, rand, advt or iadvt.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Leading epochs of plain training.
    #[arg(long)]
    pretrain: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Nearest neighbours per node (iadvt).
    #[arg(long)]
    neighbors: Option<usize>,
    /// Scale positive-pair perturbations by connection strength.
    #[arg(long)]
    use_scale: Option<bool>,
    #[arg(long)]
    proximity_order: Option<usize>,
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, env = "ADVWALK_OUT")]
    out: Option<PathBuf>,
    #[arg(long)]
    weighted: Option<bool>,
    /// Fraction of edges kept in the residual graph.
    #[arg(long)]
    keep_ratio: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EvalCommon {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Target-embedding file.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, env = "ADVWALK_OUT")]
    out: Option<PathBuf>,
    /// Dataset name for the result rows.
    #[arg(long)]
    dataset: Option<String>,
    /// Method name for the result rows.
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated evaluation seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Worker threads over independent evaluation cells.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    /// Link-prediction AUC.
    Lp {
        #[command(flatten)]
        common: EvalCommon,
        /// Labelled test pairs written by `split-lp`.
        #[arg(long)]
        test_pairs: Option<PathBuf>,
    },
    /// Node-classification accuracy over training ratios.
    Nc {
        #[command(flatten)]
        common: EvalCommon,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Comma-separated training ratios.
        #[arg(long)]
        ratios: Option<String>,
    },
    /// Classification accuracy after perturbing the embeddings.
    Attack {
        #[command(flatten)]
        common: EvalCommon,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Context-embedding file (needed for the adversarial mode).
        #[arg(long)]
        context: Option<PathBuf>,
        /// Comma-separated perturbation norms.
        #[arg(long)]
        eps_grid: Option<String>,
        /// adversarial, random or both.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        train_ratio: Option<f64>,
        #[arg(long)]
        walks_per_node: Option<usize>,
        #[arg(long)]
        walk_length: Option<usize>,
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        negatives: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("advwalk: {failure}");
            failure.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Preprocess(a) => commands::preprocess(&a.input, &a.output, a.node_map.as_deref(), a.graph.directed, a.graph.weighted),
        Command::Train(a) => {
            let mut c = commands::train_config();
            if let Some(p) = &a.config {
                c.load_file(p)?;
            }
            c.flag("graph", a.graph.map(|p| p.display().to_string()));
            c.flag("out", a.out.map(|p| p.display().to_string()));
            c.flag("directed", a.directed);
            c.flag("weighted", a.weighted);
            c.flag("method", a.method);
            c.flag("dim", a.dim);
            c.flag("epochs", a.epochs);
            c.flag("pretrain_epochs", a.pretrain);
            c.flag("batch_size", a.batch_size);
            c.flag("learning_rate", a.lr);
            c.flag("eps", a.eps);
            c.flag("lambda", a.lambda);
            c.flag("neighbors", a.neighbors);
            c.flag("use_scale", a.use_scale);
            c.flag("proximity_order", a.proximity_order);
            c.flag("walks_per_node", a.walks_per_node);
            c.flag("walk_length", a.walk_length);
            c.flag("window", a.window);
            c.flag("negatives", a.negatives);
            c.flag("seed", a.seed);
            commands::train(&c)
        }
        Command::SplitLp(a) => {
            let mut c = commands::split_config();
            if let Some(p) = &a.config {
                c.load_file(p)?;
            }
            c.flag("graph", a.graph.map(|p| p.display().to_string()));
            c.flag("out", a.out.map(|p| p.display().to_string()));
            c.flag("weighted", a.weighted);
            c.flag("keep_ratio", a.keep_ratio);
            c.flag("seed", a.seed);
            commands::split_lp(&c)
        }
        Command::Eval(task) => {
            let (mut c, common) = match &task {
                EvalCommand::Lp { common, .. } => (commands::eval_config("lp"), common),
                EvalCommand::Nc { common, .. } => (commands::eval_config("nc"), common),
                EvalCommand::Attack { common, .. } => (commands::eval_config("attack"), common),
            };
            if let Some(p) = &common.config {
                c.load_file(p)?;
            }
            c.flag("embeddings", common.embeddings.as_ref().map(|p| p.display().to_string()));
            c.flag("graph", common.graph.as_ref().map(|p| p.display().to_string()));
            c.flag("out", common.out.as_ref().map(|p| p.display().to_string()));
            c.flag("dataset", common.dataset.clone());
            c.flag("method", common.method.clone());
            c.flag("seeds", common.seeds.clone());
            let jobs = common.jobs.unwrap_or(1).max(1);
            match task {
                EvalCommand::Lp { test_pairs, .. } => {
                    c.flag("test_pairs", test_pairs.map(|p| p.display().to_string()));
                    commands::eval_lp(&c, jobs)
                }
                EvalCommand::Nc { labels, ratios, .. } => {
                    c.flag("labels", labels.map(|p| p.display().to_string()));
                    c.flag("ratios", ratios);
                    commands::eval_nc(&c, jobs)
                }
                EvalCommand::Attack {
                    labels,
                    context,
                    eps_grid,
                    mode,
                    train_ratio,
                    walks_per_node,
                    walk_length,
                    window,
                    negatives,
                    ..
                } => {
                    c.flag("labels", labels.map(|p| p.display().to_string()));
                    c.flag("context", context.map(|p| p.display().to_string()));
                    c.flag("eps_grid", eps_grid);
                    c.flag("mode", mode);
                    c.flag("train_ratio", train_ratio);
                    c.flag("walks_per_node", walks_per_node);
                    c.flag("walk_length", walk_length);
                    c.flag("window", window);
                    c.flag("negatives", negatives);
                    commands::eval_attack(&c, jobs)
                }
            }
        }
    }
}
