use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use gtaxo::io::{read_dataset, write_dataset, write_json_pretty};
use gtaxo::manifest::RunManifest;
use gtaxo::mpnn::{self, ConvKind, ModelConfig, TrainConfig};
use gtaxo::perturb::{perturb_dataset, BandMode, PerturbConfig, PerturbationKind};
use gtaxo::profiler::{self, ProfileConfig, SensitivityMatrix};
use gtaxo::spectral::{self, LaplacianKind};
use gtaxo::synthgen::{self, Family, FamilyParams, GenSpec, SplitSpec};
use gtaxo::taxonomy::{self, Taxonomy};
use gtaxo::{Error, Result, SplitRole};
use serde_json::json;

/// Flags whose values are output locations.
const OUTPUT_FLAGS: [&str; 2] = ["--out", "--csv"];

/// Arguments as recorded in manifests: worker count and verbosity dropped,
/// output paths masked, so reruns elsewhere record the same command.
pub fn recorded_command(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--jobs" {
            it.next();
        } else if a.starts_with("--jobs=") || a == "--verbose" || (a.starts_with("-v") && a[1..].chars().all(|c| c == 'v')) {
        } else if let Some(flag) = OUTPUT_FLAGS.iter().find(|f| a.as_str() == **f) {
            out.push(a.clone());
            if it.next().is_some() {
                out.push(format!("<{}>", &flag[2..]));
            }
        } else if let Some(flag) = OUTPUT_FLAGS.iter().find(|f| a.starts_with(&format!("{f}="))) {
            out.push(format!("{flag}=<{}>", &flag[2..]));
        } else {
            out.push(a.clone());
        }
    }
    out
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T> {
    s.parse()
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// small_world | scale_free | sbm_pattern | sbm_cluster | synthie_like | syntheticnew_like
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Full generator description; family flags below override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    num_graphs: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Within-block edge probability (SBM families).
    #[arg(long)]
    p_in: Option<f64>,
    /// Between-block edge probability (SBM families).
    #[arg(long)]
    p_out: Option<f64>,
    /// Feature noise (syntheticnew_like).
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Merge the two feature sets (synthie_like).
    #[arg(long)]
    collapse_features: bool,
    /// Predefined train/val fractions, e.g. `0.8,0.1`.
    #[arg(long)]
    split: Option<String>,
}

pub fn generate(a: GenerateArgs, command: Vec<String>) -> Result<()> {
    let family: Family = parse(&a.family)?;
    let mut spec = match &a.spec {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            let s: GenSpec = serde_json::from_str(&text).map_err(|e| Error::InputFormat(format!("{}: {e}", p.display())))?;
            if s.family() != family {
                return Err(Error::InvalidArgument(format!("spec is for {}, not {family}", s.family())));
            }
            s
        }
        None => GenSpec::default_for(family, a.seed),
    };
    spec.seed = a.seed;
    if let Some(n) = a.num_graphs {
        spec.num_graphs = n;
    }
    if let Some(n) = a.nodes {
        spec.nodes_per_graph = n;
    }
    if let Some(s) = &a.split {
        let parts: Vec<f64> = s
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("--split: {e}"))))
            .collect::<Result<_>>()?;
        let [train, val] = parts[..] else {
            return Err(Error::InvalidArgument("--split takes two fractions".into()));
        };
        spec.split = Some(SplitSpec { train, val });
    }
    match &mut spec.params {
        FamilyParams::SbmCluster { p_in, p_out, .. } | FamilyParams::SbmPattern { p_in, p_out, .. } => {
            *p_in = a.p_in.unwrap_or(*p_in);
            *p_out = a.p_out.unwrap_or(*p_out);
        }
        FamilyParams::SyntheticnewLike { noise_sigma, .. } => {
            *noise_sigma = a.noise_sigma.unwrap_or(*noise_sigma);
        }
        FamilyParams::SynthieLike { collapse_features, .. } => {
            *collapse_features |= a.collapse_features;
        }
        _ => {}
    }
    let ds = synthgen::generate(&spec)?;
    prepare_dir(&a.out)?;
    write_dataset(&ds, &a.out)?;
    write_json_pretty(&a.out.join("genspec.json"), &spec)?;
    let mut m = RunManifest::new(command, to_value(&spec)?).seed("seed", a.seed);
    if let Some(p) = &a.spec {
        m = m.input(p)?;
    }
    m.finish_dir(&a.out)
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// One row per class (the default table).
    #[arg(long)]
    per_class: bool,
    /// Write the table here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the Laplacian spectrum of one graph as `node_index,eigenvalue`.
    #[arg(long)]
    eigenvalues: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    graph: usize,
    /// normalized | combinatorial
    #[arg(long, default_value = "normalized")]
    laplacian: String,
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let ds = read_dataset(&a.dataset)?;
    let table = synthgen::stats::per_class_csv(&ds);
    match &a.out {
        Some(p) => write_text(p, &table)?,
        None => print!("{table}"),
    }
    if let Some(path) = &a.eigenvalues {
        let g = ds
            .graphs()
            .get(a.graph)
            .ok_or_else(|| Error::InvalidArgument(format!("--graph {} out of range", a.graph)))?;
        let (kind, m) = match a.laplacian.as_str() {
            "normalized" => (LaplacianKind::Normalized, spectral::normalized_laplacian(g)),
            "combinatorial" => (LaplacianKind::Combinatorial, spectral::laplacian(g)),
            other => return Err(Error::InvalidArgument(format!("unknown laplacian '{other}'"))),
        };
        let dec = spectral::eigendecompose(&m, kind, spectral::dense_limit_from_env()?)?;
        let mut text = String::from("node_index,eigenvalue\n");
        for (i, v) in dec.eigenvalues.iter().enumerate() {
            text.push_str(&format!("{i},{v}\n"));
        }
        write_text(path, &text)?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// Perturbation name, e.g. NoEdges, Frag-k, LowPass.
    #[arg(long)]
    kind: String,
    /// Hop radius for Frag-k.
    #[arg(long)]
    k: Option<u8>,
    /// Band-pass mode: hard | wavelet | auto
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rewire_fraction: Option<f64>,
    #[arg(long)]
    node_deg_cap: Option<usize>,
}

fn perturb_config(mode: &str) -> Result<PerturbConfig> {
    Ok(PerturbConfig {
        band_mode: parse::<BandMode>(mode)?,
        dense_limit: spectral::dense_limit_from_env()?,
        ..PerturbConfig::default()
    })
}

pub fn perturb(a: PerturbArgs, command: Vec<String>) -> Result<()> {
    let kind = PerturbationKind::parse_with_k(&a.kind, a.k)?;
    let mut cfg = perturb_config(&a.mode)?;
    if let Some(f) = a.rewire_fraction {
        cfg.rewire_fraction = f;
    }
    cfg.node_deg_cap = a.node_deg_cap;
    let ds = read_dataset(&a.dataset)?;
    let out = perturb_dataset(&ds, kind, &cfg, a.seed)?;
    prepare_dir(&a.out)?;
    write_dataset(&out.dataset, &a.out)?;
    write_json_pretty(&a.out.join("perturb_meta.json"), &out.meta)?;
    RunManifest::new(command, json!({ "kind": kind, "perturb": cfg }))
        .seed("seed", a.seed)
        .input(&a.dataset)?
        .finish_dir(&a.out)
}

/// Training flags shared by `train` and `profile`.
#[derive(Args, Debug)]
pub struct TrainFlags {
    #[arg(long, default_value_t = ModelConfig::DEFAULT_HIDDEN)]
    hidden: usize,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    plateau_patience: Option<usize>,
    #[arg(long)]
    early_stop_patience: Option<usize>,
}

impl TrainFlags {
    fn config(&self, seed: u64) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            lr: self.lr.unwrap_or(d.lr),
            max_epochs: self.max_epochs.unwrap_or(d.max_epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            plateau_patience: self.plateau_patience.unwrap_or(d.plateau_patience),
            early_stop_patience: self.early_stop_patience.unwrap_or(d.early_stop_patience),
            seed,
            ..d
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    /// gcn | gin
    #[arg(long, default_value = "gcn")]
    model: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Predefined fold, or cross-validation fold when the dataset has none.
    #[arg(long, default_value_t = 0)]
    fold: usize,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    flags: TrainFlags,
}

pub fn train(a: TrainArgs, command: Vec<String>) -> Result<()> {
    let kind: ConvKind = parse(&a.model)?;
    let ds = read_dataset(&a.dataset)?;
    let roles = profiler::repeat_roles(&ds, a.fold, a.seed)?;
    let mcfg = ModelConfig::for_dataset(&ds, kind).with_hidden(a.flags.hidden);
    let tcfg = a.flags.config(a.seed);
    let mut model = mpnn::train(&ds, &roles, &mcfg, &tcfg)?;
    let test = mpnn::evaluate(&model, &ds, &roles, SplitRole::Test)?;
    log::info!("test AUROC {:?} over {} entities", test.auroc, test.count);
    model.manifest = Some(
        RunManifest::new(
            command,
            json!({ "model": mcfg, "train": tcfg, "fold": a.fold, "test_auroc": test.auroc }),
        )
        .seed("seed", a.seed)
        .input(&a.dataset)?,
    );
    model.save(&a.out)
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[arg(long, num_args = 1.., required = true)]
    datasets: Vec<PathBuf>,
    /// gcn | gin
    #[arg(long, default_value = "gcn")]
    model: String,
    #[arg(long, default_value_t = profiler::DEFAULT_REPEATS)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated perturbation names (default: all thirteen).
    #[arg(long)]
    perturbations: Option<String>,
    /// Band-pass mode: hard | wavelet | auto
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long)]
    out: PathBuf,
    /// Percentage-ratio table.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    flags: TrainFlags,
}

const PROFILE_DECISIONS: [&str; 5] = [
    "ratio = mean test AUROC (perturbed) / mean test AUROC (original), means over repeats",
    "log2 ratios are stored unclamped; clustering clamps them to [-1, 1]",
    "datasets without predefined splits use stratified 10-fold cross-validation (test fold r, validation fold r+1)",
    "FullyConn and FiedlerFrag are skipped on transductive datasets",
    "a training run with a non-finite loss is retried once with a new derived seed",
];

pub fn profile(a: ProfileArgs, command: Vec<String>) -> Result<()> {
    let kind: ConvKind = parse(&a.model)?;
    let mut cfg = ProfileConfig::new(kind, a.seed);
    cfg.repeats = a.repeats;
    cfg.hidden_dim = a.flags.hidden;
    cfg.train = a.flags.config(0);
    cfg.perturb = perturb_config(&a.mode)?;
    if let Some(list) = &a.perturbations {
        cfg.perturbations = list.split(',').map(|s| parse::<PerturbationKind>(s.trim())).collect::<Result<_>>()?;
    }
    let datasets = a.datasets.iter().map(|d| read_dataset(d)).collect::<Result<Vec<_>>>()?;
    let mut matrix = profiler::run_grid(&datasets, &cfg)?;
    let mut manifest = RunManifest::new(command, to_value(&cfg)?)
        .seed("seed", a.seed)
        .decisions(&PROFILE_DECISIONS);
    for d in &a.datasets {
        manifest = manifest.input(d)?;
    }
    if let Some(csv) = &a.csv {
        write_text(csv, &matrix.to_percent_csv())?;
    }
    matrix.manifest = Some(manifest);
    write_json_pretty(&a.out, &matrix)
}

fn read_matrix(path: &Path) -> Result<SensitivityMatrix> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::InputFormat(format!("{}: {e}", path.display())))
}

fn read_taxonomy(path: &Path) -> Result<Taxonomy> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::InputFormat(format!("{}: {e}", path.display())))
}

#[derive(Args, Debug)]
pub struct TaxonomizeArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
}

fn csv_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn grid_csv(corner: &str, rows: &[String], cols: &[String], value: impl Fn(usize, usize) -> Option<f64>) -> String {
    let mut s = format!("{corner},{}\n", cols.join(","));
    for (i, r) in rows.iter().enumerate() {
        s.push_str(r);
        for j in 0..cols.len() {
            s.push(',');
            s.push_str(&csv_value(value(i, j)));
        }
        s.push('\n');
    }
    s
}

/// Companion CSV files of a taxonomy, keyed by file suffix.
fn taxonomy_tables(t: &Taxonomy) -> Vec<(&'static str, String)> {
    let comps: Vec<String> = (1..=t.pca.explained_variance.len()).map(|c| format!("PC{c}")).collect();
    let cols: Vec<String> = t.columns.iter().map(|c| c.name()).collect();
    let mut clusters = String::from("dataset,cluster\n");
    for (r, c) in t.rows.iter().zip(&t.clusters) {
        clusters.push_str(&format!("{r},{c}\n"));
    }
    let mut variance = String::from("component,explained_variance,explained_variance_ratio\n");
    for (c, name) in comps.iter().enumerate() {
        variance.push_str(&format!(
            "{name},{},{}\n",
            t.pca.explained_variance[c], t.pca.explained_variance_ratio[c]
        ));
    }
    vec![
        ("clusters.csv", clusters),
        (
            "pca_coordinates.csv",
            grid_csv("dataset", &t.rows, &comps, |i, j| Some(t.pca.coordinates[i][j])),
        ),
        (
            "pca_loadings.csv",
            grid_csv("perturbation", &cols, &comps, |i, j| Some(t.pca.loadings[i][j])),
        ),
        ("explained_variance.csv", variance),
        (
            "pert_correlation.csv",
            grid_csv("perturbation", &cols, &cols, |i, j| t.pert_correlation[i][j]),
        ),
        ("dendrogram.nwk", format!("{}\n", t.newick)),
    ]
}

pub fn taxonomize(a: TaxonomizeArgs, command: Vec<String>) -> Result<()> {
    let matrix = read_matrix(&a.matrix)?;
    let mut t = taxonomy::taxonomize(&matrix, a.k)?;
    let dir = parent_of(&a.out);
    prepare_dir(&dir)?;
    let stem = a.out.file_stem().and_then(|s| s.to_str()).unwrap_or("taxonomy").to_string();
    let mut written = Vec::new();
    for (suffix, text) in taxonomy_tables(&t) {
        let path = dir.join(format!("{stem}_{suffix}"));
        write_text(&path, &text)?;
        written.push(path);
    }
    t.manifest = Some(
        RunManifest::new(command, json!({ "k": a.k }))
            .decisions(&[
                "Ward linkage on Euclidean distances between clamped log2 rows",
                "columns missing for any dataset are dropped",
                "equal merge costs go to the lowest (id, id) pair",
            ])
            .input(&a.matrix)?
            .outputs(&dir, &written)?,
    );
    write_json_pretty(&a.out, &t)
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

pub fn report(a: ReportArgs, command: Vec<String>) -> Result<()> {
    let m = read_matrix(&a.matrix)?;
    let t = read_taxonomy(&a.taxonomy)?;
    if t.rows != m.rows {
        return Err(Error::Shape("taxonomy and matrix list different datasets".into()));
    }
    let order = t.dendrogram.leaf_order();
    let cols: Vec<String> = m.columns.iter().map(|c| c.name()).collect();
    let mut heat = format!("dataset,cluster,{}\n", cols.join(","));
    for &i in &order {
        heat.push_str(&format!("{},{}", m.rows[i], t.clusters[i]));
        for v in &m.ratio[i] {
            heat.push(',');
            if let Some(r) = v {
                heat.push_str(&format!("{:.2}", 100.0 * r));
            }
        }
        heat.push('\n');
    }
    let datasets: Vec<serde_json::Value> = order
        .iter()
        .map(|&i| {
            let profile: serde_json::Map<String, serde_json::Value> = cols
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    (
                        c.clone(),
                        json!({
                            "mean_auroc": m.cells[i][j].mean_auroc,
                            "ratio": m.ratio[i][j],
                            "log2_ratio": m.log2_ratio[i][j],
                            "status": m.cells[i][j].status,
                        }),
                    )
                })
                .collect();
            json!({
                "id": m.rows[i],
                "cluster": t.clusters[i],
                "pca": t.pca.coordinates[i].iter().take(2).collect::<Vec<_>>(),
                "profile": profile,
            })
        })
        .collect();
    let summary = json!({
        "model": m.model,
        "k": t.k,
        "columns": cols,
        "taxonomy_columns": t.columns,
        "explained_variance_ratio": t.pca.explained_variance_ratio,
        "newick": t.newick,
        "datasets": datasets,
    });
    prepare_dir(&a.out)?;
    write_json_pretty(&a.out.join("summary.json"), &summary)?;
    write_text(&a.out.join("heatmap.csv"), &heat)?;
    RunManifest::new(command, json!({}))
        .input(&a.matrix)?
        .input(&a.taxonomy)?
        .finish_dir(&a.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorded_command_masks_outputs_and_drops_jobs() {
        let args: Vec<String> = ["--jobs", "4", "profile", "--out", "/tmp/x.json", "-vv", "--csv=a.csv", "--seed", "3"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            recorded_command(&args),
            vec!["profile", "--out", "<out>", "--csv=<csv>", "--seed", "3"]
        );
    }
}
