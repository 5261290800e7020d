use std::collections::BTreeMap;
use std::future::IntoFuture;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use causal_advisor_core::datagen::{
    generate_chain_synthetic, generate_student_surrogate, GeneratedBundle, SurrogateConfig,
    SynthConfig,
};
use causal_advisor_core::discovery::{ges_discover, pc_search, GesConfig, PcConfig};
use causal_advisor_core::effects::estimate_ate;
use causal_advisor_core::graph::{BackgroundKnowledge, MixedGraph, NodeId};
use causal_advisor_core::io::{self, CsvOptions, GraphFormat};
use causal_advisor_core::scm::{
    counterfactual, fit_linear_scm, recommend, Intervention, LinearScm, Observation, RecommendMode,
};
use causal_advisor_core::stats::{zscore_normalize, Dataset, NormalizationRecord};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{manifest_path_for, RunManifest};
use crate::service::{self, SessionState, DEFAULT_THRESHOLD_Z};

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "causal-advisor",
    version,
    about = "Causal discovery and counterfactual recommendations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Generate a synthetic dataset with its ground truth.
    Synth(SynthArgs),
    /// Estimate a CPDAG from data.
    Discover(DiscoverArgs),
    /// Fit a linear SCM on a fully directed graph.
    FitScm(FitScmArgs),
    /// Adjusted average treatment effect.
    Ate(AteArgs),
    /// Counterfactual values under do-assignments.
    Cf(CfArgs),
    /// Least change of actionable nodes reaching a threshold.
    Recommend(RecommendArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Generator {
    Chain,
    Student,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Pc,
    Ges,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Pin every actionable node.
    All,
    /// Change one node; effects pass through mediators.
    Single,
}

impl From<Mode> for RecommendMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::All => RecommendMode::AllActionable,
            Mode::Single => RecommendMode::SingleNode,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub generator: Generator,
    #[arg(long, default_value_t = 5000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct DiscoverArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Pc)]
    pub algo: Algo,
    /// Significance level of the PC independence tests.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Background knowledge JSON.
    #[arg(long)]
    pub knowledge: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Also write Graphviz DOT here.
    #[arg(long)]
    #[serde(skip)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitScmArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Orient an undirected edge as NAME1 -> NAME2. Repeatable.
    #[arg(long, value_name = "NAME1,NAME2")]
    pub orient: Vec<String>,
    /// z-score the data first and store the record next to the model.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct AteArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub treatment: String,
    #[arg(long)]
    pub outcome: String,
}

#[derive(Debug, Args, Serialize)]
pub struct CfArgs {
    #[arg(long)]
    pub scm: PathBuf,
    /// Row index into --data, an inline JSON object, or a JSON file.
    #[arg(long, allow_hyphen_values = true)]
    pub obs: String,
    /// Dataset the row index refers to.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// do-assignment NAME=VALUE. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct RecommendArgs {
    #[arg(long)]
    pub scm: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub obs: String,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub target: String,
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: f64,
    #[arg(long, value_name = "NAME,NAME")]
    pub actionable: String,
    #[arg(long, value_enum, default_value_t = Mode::All)]
    pub mode: Mode,
}

#[derive(Debug, Args, Serialize)]
pub struct ServeArgs {
    #[arg(long)]
    pub scm: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Outcome node; defaults to the last sink of the model.
    #[arg(long)]
    pub target: Option<String>,
    /// Default actionable nodes; defaults to the target's ancestors.
    #[arg(long, value_name = "NAME,NAME")]
    pub actionable: Option<String>,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_THRESHOLD_Z)]
    pub threshold: f64,
}

pub fn execute(
    cli: Cli,
    threads: Option<usize>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Discover(a) => discover(a, err),
        Command::FitScm(a) => fit_scm(a),
        Command::Ate(a) => ate(a, out, err),
        Command::Cf(a) => cf(a, out, err),
        Command::Recommend(a) => recommend_cmd(a, out, err),
        Command::Serve(a) => serve(a, threads, err),
    }
}

/// `scm.json` -> `scm.normalization.json`.
pub fn normalization_path_for(scm: &Path) -> PathBuf {
    scm.with_extension("normalization.json")
}

fn load_data(path: &Path, m: &mut RunManifest) -> CliResult<Dataset> {
    m.input(path)?;
    Ok(io::load_csv(path, &CsvOptions::default())?)
}

/// Columns of `d` reordered to match `labels`.
fn align(d: &Dataset, labels: &[String]) -> CliResult<Dataset> {
    let cols = labels
        .iter()
        .map(|name| {
            d.index_of(name)
                .ok_or_else(|| causal_advisor_core::Error::UnknownColumn(name.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(d.select(&cols)?)
}

fn node(g: &MixedGraph, name: &str) -> CliResult<NodeId> {
    g.index_of(name)
        .ok_or_else(|| causal_advisor_core::Error::UnknownNode(name.to_string()).into())
}

fn split_names(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn write_stdout_json<T: Serialize>(value: &T, out: &mut dyn Write) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn emit_manifest(m: &RunManifest, err: &mut dyn Write) -> CliResult<()> {
    writeln!(err, "manifest: {}", m.to_line())?;
    Ok(())
}

fn synth(a: &SynthArgs) -> CliResult<()> {
    let mut m = RunManifest::new("synth", a, Some(a.seed))?;
    let bundle: GeneratedBundle = match a.generator {
        Generator::Chain => generate_chain_synthetic(&SynthConfig {
            n: a.n,
            seed: a.seed,
            ..Default::default()
        })?,
        Generator::Student => generate_student_surrogate(&SurrogateConfig {
            n: a.n,
            seed: a.seed,
            ..Default::default()
        })?,
    };
    std::fs::create_dir_all(&a.out)?;
    let data = a.out.join("data.csv");
    let graph = a.out.join("truth_graph.json");
    let scm = a.out.join("truth_scm.json");
    io::save_csv(&bundle.dataset, &data, &CsvOptions::default())?;
    io::save_graph(&bundle.truth_dag, GraphFormat::Json, &graph)?;
    io::save_scm(&bundle.truth_scm, &scm)?;
    for p in [&data, &graph, &scm] {
        m.output(p);
    }
    m.write(&a.out.join("manifest.json"))
}

fn discover(a: &DiscoverArgs, err: &mut dyn Write) -> CliResult<()> {
    let mut m = RunManifest::new("discover", a, None)?;
    let d = load_data(&a.data, &mut m)?;
    let k = match &a.knowledge {
        Some(path) => {
            m.input(path)?;
            io::load_knowledge(path, d.names())?
        }
        None => BackgroundKnowledge::none(),
    };
    let g = match a.algo {
        Algo::Pc => {
            let outcome = pc_search(
                &d,
                &k,
                &PcConfig {
                    alpha: a.alpha,
                    ..Default::default()
                },
            )?;
            for w in &outcome.warnings {
                writeln!(err, "warning: {w}")?;
            }
            outcome.graph
        }
        Algo::Ges => ges_discover(&d, &k, &GesConfig::default())?,
    };
    io::save_graph(&g, GraphFormat::Json, &a.out)?;
    m.output(&a.out);
    if let Some(dot) = &a.dot {
        io::save_graph(&g, GraphFormat::Dot, dot)?;
        m.output(dot);
    }
    m.write(&manifest_path_for(&a.out))
}

fn apply_orientations(g: &mut MixedGraph, args: &[String]) -> CliResult<()> {
    for arg in args {
        let names = split_names(arg);
        let [a, b] = names.as_slice() else {
            return Err(CliError::data(
                "invalid_orientation",
                format!("--orient expects NAME1,NAME2, got `{arg}`"),
            ));
        };
        let (a, b) = (node(g, a)?, node(g, b)?);
        if g.has_undirected(a, b) {
            g.remove_edge(a, b);
            g.add_directed(a, b);
        } else if !g.has_directed(a, b) {
            return Err(CliError::data(
                "invalid_orientation",
                format!(
                    "`{arg}` does not name an undirected edge of the graph ({} -> {} is not allowed)",
                    g.label(a),
                    g.label(b)
                ),
            ));
        }
    }
    Ok(())
}

fn fit_scm(a: &FitScmArgs) -> CliResult<()> {
    let mut m = RunManifest::new("fit-scm", a, None)?;
    let d = load_data(&a.data, &mut m)?;
    m.input(&a.graph)?;
    let mut g = io::load_graph(&a.graph)?;
    apply_orientations(&mut g, &a.orient)?;
    let undirected = g.undirected_edges();
    if !undirected.is_empty() {
        let list = undirected
            .iter()
            .map(|&(x, y)| format!("{} -- {}", g.label(x), g.label(y)))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(CliError::data(
            "not_a_dag",
            format!(
                "graph has undirected edges ({list}); orient each with --orient NAME1,NAME2 \
                 or rerun discover with background knowledge that fixes the direction"
            ),
        ));
    }
    g.topological_sort()?;
    let d = align(&d, g.labels())?;
    let d = if a.normalize {
        let (z, rec) = zscore_normalize(&d)?;
        let path = normalization_path_for(&a.out);
        io::save_normalization(&rec, &path)?;
        m.output(&path);
        z
    } else {
        d
    };
    let scm = fit_linear_scm(&d, &g)?;
    io::save_scm(&scm, &a.out)?;
    m.output(&a.out);
    m.write(&manifest_path_for(&a.out))
}

fn ate_table(d: &Dataset, treatment: NodeId, outcome: NodeId, g: &MixedGraph) -> CliResult<String> {
    let r = estimate_ate(d, g, treatment, outcome)?;
    let adjustment = format!(
        "{{{}}}",
        r.adjustment_set
            .iter()
            .map(|&v| g.label(v))
            .collect::<Vec<_>>()
            .join(",")
    );
    let header = [
        "treatment",
        "outcome",
        "adjustment_set",
        "effect",
        "std_error",
        "p_value",
        "naive_effect",
    ];
    let row = [
        g.label(treatment).to_string(),
        g.label(outcome).to_string(),
        adjustment,
        format!("{:.6}", r.effect),
        format!("{:.6}", r.std_error),
        format!("{:.3e}", r.p_value),
        format!("{:.6}", r.naive_effect),
    ];
    let widths: Vec<usize> = header
        .iter()
        .zip(&row)
        .map(|(h, v)| h.len().max(v.len()))
        .collect();
    let line = |cells: &[&str]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, &w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let row_refs: Vec<&str> = row.iter().map(String::as_str).collect();
    Ok(format!("{}\n{}\n", line(&header), line(&row_refs)))
}

fn ate(a: &AteArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut m = RunManifest::new("ate", a, None)?;
    let d = load_data(&a.data, &mut m)?;
    m.input(&a.graph)?;
    let g = io::load_graph(&a.graph)?;
    let d = align(&d, g.labels())?;
    let (t, o) = (node(&g, &a.treatment)?, node(&g, &a.outcome)?);
    out.write_all(ate_table(&d, t, o, &g)?.as_bytes())?;
    emit_manifest(&m, err)
}

struct LoadedModel {
    scm: LinearScm,
    normalization: Option<NormalizationRecord>,
}

fn load_model(path: &Path, m: &mut RunManifest) -> CliResult<LoadedModel> {
    m.input(path)?;
    let scm = io::load_scm(path)?;
    let norm_path = normalization_path_for(path);
    let normalization = if norm_path.exists() {
        m.input(&norm_path)?;
        Some(io::load_normalization(&norm_path)?)
    } else {
        None
    };
    Ok(LoadedModel { scm, normalization })
}

/// Observation in model units from `--obs`.
fn load_observation(
    model: &LoadedModel,
    obs: &str,
    data: Option<&Path>,
    m: &mut RunManifest,
) -> CliResult<Observation> {
    let scm = &model.scm;
    if let Ok(row) = obs.trim().parse::<usize>() {
        let Some(path) = data else {
            return Err(CliError::data(
                "invalid_query",
                format!("--obs {row} is a row index; give the dataset with --data"),
            ));
        };
        let d = load_data(path, m)?;
        let rows = service::model_rows(scm, &d, model.normalization.as_ref())?;
        let values = rows.get(row).ok_or_else(|| {
            CliError::data(
                "invalid_query",
                format!("row {row} is out of range for {} rows", rows.len()),
            )
        })?;
        return Ok(Observation::full(values));
    }
    let named: BTreeMap<String, f64> = if obs.trim_start().starts_with('{') {
        serde_json::from_str(obs)?
    } else {
        let path = Path::new(obs);
        m.input(path)?;
        io::read_json(path)?
    };
    Ok(Observation::from_named(scm, &named)?)
}

fn parse_assignments(args: &[String]) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for arg in args {
        let parsed = arg
            .split_once('=')
            .and_then(|(k, v)| Some((k.trim().to_string(), v.trim().parse::<f64>().ok()?)));
        let Some((name, value)) = parsed else {
            return Err(CliError::data(
                "invalid_query",
                format!("--set expects NAME=VALUE, got `{arg}`"),
            ));
        };
        out.insert(name, value);
    }
    Ok(out)
}

fn by_name(
    scm: &LinearScm,
    values: impl IntoIterator<Item = (NodeId, f64)>,
) -> BTreeMap<String, f64> {
    values
        .into_iter()
        .map(|(v, x)| (scm.label(v).to_string(), x))
        .collect()
}

#[derive(Serialize)]
struct CfOutput {
    observation: BTreeMap<String, f64>,
    interventions: BTreeMap<String, f64>,
    counterfactual_values: BTreeMap<String, f64>,
    abducted_noise: BTreeMap<String, f64>,
}

fn cf(a: &CfArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut m = RunManifest::new("cf", a, None)?;
    let model = load_model(&a.scm, &mut m)?;
    let obs = load_observation(&model, &a.obs, a.data.as_deref(), &mut m)?;
    let scm = &model.scm;
    let i = Intervention::from_named(scm, &parse_assignments(&a.set)?)?;
    let r = counterfactual(scm, &obs, &i)?;
    let output = CfOutput {
        observation: by_name(
            scm,
            (0..scm.node_count()).filter_map(|v| Some((v, obs.get(v)?))),
        ),
        interventions: by_name(scm, i.assignments.iter().map(|(&v, &x)| (v, x))),
        counterfactual_values: by_name(scm, r.counterfactual_values.iter().copied().enumerate()),
        abducted_noise: by_name(scm, r.abducted_noise.iter().map(|(&v, &u)| (v, u))),
    };
    write_stdout_json(&output, out)?;
    emit_manifest(&m, err)
}

#[derive(Serialize)]
struct RecommendOutput {
    target: String,
    threshold: f64,
    mode: RecommendMode,
    intervention: BTreeMap<String, f64>,
    delta: BTreeMap<String, f64>,
    predicted_outcome: f64,
    norm_of_change: f64,
}

fn recommend_cmd(a: &RecommendArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let mut m = RunManifest::new("recommend", a, None)?;
    let model = load_model(&a.scm, &mut m)?;
    let obs = load_observation(&model, &a.obs, a.data.as_deref(), &mut m)?;
    let scm = &model.scm;
    let target = scm.index_of(&a.target)?;
    let actionable = split_names(&a.actionable)
        .iter()
        .map(|n| scm.index_of(n))
        .collect::<Result<Vec<_>, _>>()?;
    let r = recommend(scm, &obs, target, a.threshold, &actionable, a.mode.into())?;
    let output = RecommendOutput {
        target: a.target.clone(),
        threshold: a.threshold,
        mode: a.mode.into(),
        intervention: by_name(
            scm,
            r.intervention.assignments.iter().map(|(&v, &x)| (v, x)),
        ),
        delta: by_name(scm, r.delta.iter().map(|(&v, &d)| (v, d))),
        predicted_outcome: r.predicted_outcome,
        norm_of_change: r.norm_of_change,
    };
    write_stdout_json(&output, out)?;
    emit_manifest(&m, err)
}

fn serve(a: &ServeArgs, threads: Option<usize>, err: &mut dyn Write) -> CliResult<()> {
    let mut m = RunManifest::new("serve", a, None)?;
    let mut builder = tokio::runtime::Builder::new_multi_thread();
    builder.enable_all();
    if let Some(n) = threads {
        builder.worker_threads(n);
    }
    let runtime = builder.build()?;
    runtime.block_on(async {
        let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().map_err(|_| {
            CliError::data(
                "invalid_config",
                format!("bad address {}:{}", a.host, a.port),
            )
        })?;
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let listener_addr = listener.local_addr()?;
        let state: service::SharedState = Arc::new(OnceLock::new());
        let server =
            tokio::spawn(axum::serve(listener, service::router(state.clone())).into_future());
        writeln!(err, "listening on http://{}", listener_addr)?;
        err.flush()?;

        let model = load_model(&a.scm, &mut m)?;
        let d = load_data(&a.data, &mut m)?;
        let rows = service::model_rows(&model.scm, &d, model.normalization.as_ref())?;
        let actionable = a.actionable.as_deref().map(split_names);
        let session = SessionState::new(
            model.scm,
            rows,
            model.normalization.as_ref(),
            a.target.as_deref(),
            actionable.as_deref(),
            a.threshold,
        )?;
        let _ = state.set(session);
        emit_manifest(&m, err)?;
        err.flush()?;
        server
            .await
            .map_err(|e| CliError::data("io", e.to_string()))??;
        Ok(())
    })
}
