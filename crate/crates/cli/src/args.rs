use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "treespace", version, about = "Statistics on tree-space and low-distortion embeddings")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON object of option values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Omit timestamps so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Gen(Gen),
    /// Pairwise geodesic distances of a tree population.
    Dist(Dist),
    /// Fréchet mean of a tree population.
    Mean(Mean),
    /// Two-group permutation test on means or variances.
    Permtest(Permtest),
    /// Subtree-distance feature matrix.
    SubtreeFeatures(SubtreeFeatures),
    /// Cross-validated elastic-net classification.
    Classify(Classify),
    /// Cross-validated k-nearest-neighbour classification.
    Knn(Knn),
    /// Correlation of subtree deviations between branches.
    Correlate(Correlate),
    /// Planar embedding of a distance matrix.
    Embed(Embed),
    /// Distortion of an existing embedding.
    Distortion(Distortion),
}

#[derive(Debug, Subcommand)]
pub enum Gen {
    /// Points on a cone of total angle 5π/2.
    Corner(GenCorner),
    /// Points on an open book.
    Sheets(GenSheets),
    /// A tree population around a template.
    Trees(GenTrees),
}

#[derive(Debug, Args)]
pub struct GenCorner {
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    /// Dataset JSON; the exact matrix goes next to it as CSV.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenSheets {
    #[arg(long, default_value_t = 3)]
    pub sheets: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 50)]
    pub per_sheet: usize,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenTrees {
    /// Trees in the control class.
    #[arg(long, default_value_t = 30)]
    pub n: usize,
    /// Trees in the case class, which receive the shifts.
    #[arg(long, default_value_t = 0)]
    pub n_case: usize,
    /// `airway` or a tree JSON file.
    #[arg(long, default_value = "airway")]
    pub template: String,
    /// Attribute dimension for the airway template.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub topology_noise: f64,
    #[arg(long, default_value_t = 0.1)]
    pub attr_sigma: f64,
    /// `LABEL=v1,v2,...`; a single value is used for every coordinate.
    #[arg(long)]
    pub shift: Vec<String>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Dist {
    /// Population JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Matrix CSV.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct MeanOpts {
    /// Default: 1000 per tree.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct Mean {
    #[arg(long)]
    pub input: PathBuf,
    /// Only trees of this class.
    #[arg(long)]
    pub class: Option<String>,
    /// Average the subtrees rooted at this labelled branch.
    #[arg(long)]
    pub label: Option<String>,
    #[command(flatten)]
    pub mean: MeanOpts,
    /// Mean tree JSON; the trace goes next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Statistic {
    Mean,
    Variance,
}

#[derive(Debug, Args)]
pub struct Permtest {
    /// Population JSON with exactly two classes.
    #[arg(long)]
    pub groups: PathBuf,
    #[arg(long, value_enum, default_value_t = Statistic::Mean)]
    pub statistic: Statistic,
    /// Number of permutations.
    #[arg(long = "M", alias = "m", default_value_t = 1000)]
    pub permutations: usize,
    #[arg(long)]
    pub label: Option<String>,
    /// Include every permuted statistic in the report.
    #[arg(long)]
    pub include_permuted: bool,
    #[command(flatten)]
    pub mean: MeanOpts,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Pooled,
    TwoClass,
}

#[derive(Debug, Args, Clone)]
pub struct FeatureOpts {
    #[arg(long, value_enum, default_value_t = Mode::TwoClass)]
    pub mode: Mode,
    /// Branch labels, comma separated (default: the airway scheme).
    #[arg(long, value_delimiter = ',')]
    pub scheme: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct SubtreeFeatures {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub features: FeatureOpts,
    #[command(flatten)]
    pub mean: MeanOpts,
    /// Feature CSV.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Classify {
    /// Precomputed feature CSV.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    pub features: Option<PathBuf>,
    /// Population JSON; subtree means are recomputed in every fold.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub feature_opts: FeatureOpts,
    #[command(flatten)]
    pub mean: MeanOpts,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.75, 0.5, 0.25])]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 50)]
    pub n_lambda: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lambda_min_ratio: f64,
    /// Fit on raw rather than standardized features.
    #[arg(long)]
    pub no_standardize: bool,
    /// Report JSON; the full-data models go next to it.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Knn {
    /// Matrix CSV with labels.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Correlate {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub scheme: Option<Vec<String>>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    #[command(flatten)]
    pub mean: MeanOpts,
    /// Also write one deviation histogram per branch here.
    #[arg(long)]
    pub svg_dir: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EmbedMethod {
    Mds,
    Isomap,
    Hmds,
    Hisomap,
}

#[derive(Debug, Args)]
pub struct Embed {
    #[arg(long, value_enum)]
    pub method: EmbedMethod,
    /// Matrix CSV or dataset JSON.
    #[arg(long)]
    pub input: PathBuf,
    /// Isomap neighbour count.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iterations: usize,
    /// Relative stress decrease treated as stalled.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 21)]
    pub bins: usize,
    /// Output directory.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Hyperbolic,
}

#[derive(Debug, Args)]
pub struct Distortion {
    /// Original matrix CSV.
    #[arg(long)]
    pub original: PathBuf,
    /// Embedded matrix CSV.
    #[arg(long, conflicts_with = "coords", required_unless_present = "coords")]
    pub embedded: Option<PathBuf>,
    /// Coordinates CSV (`id,label,x,y`).
    #[arg(long)]
    pub coords: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    #[arg(long, default_value_t = 21)]
    pub bins: usize,
    /// Also write the error histogram as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}
