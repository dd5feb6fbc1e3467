//! Command-line driver. [`run_command`] parses an argv, runs one stage and
//! returns the process exit code: 0 on success, 2 for usage errors and
//! missing inputs, 1 when processing fails.
//!
//! Every output is accompanied by a `<output>.run.json` sidecar (or
//! `run.json` inside an output directory) recording the resolved
//! configuration, its digest and the SHA-256 of every input and output.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{self, AnnotationManifest, EmbeddingMatrix};
use crate::lift::{assign_by_projection, attach_pixel_aligned, PixelAlignedScene};
use crate::metrics::{self, EvalReport};
use crate::pipeline::{sha256_file, PipelineConfig};
use crate::query::{recover_features, relevancy_map, segment, FeatureMap};
use crate::synth::{self, SynthConfig};
use crate::{bank::SemanticIndexMap, render::render};

pub const THREADS_ENV: &str = "SEGSPLAT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "semsplat", version, about = "Semantic Gaussian splatting pipeline")]
struct Cli {
    /// JSON file overriding pipeline defaults; explicit flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Semantic bank construction.
    #[command(subcommand)]
    Bank(BankCommand),
    /// Attach bank indices to a Gaussian scene.
    Lift(LiftArgs),
    /// Render color and semantic buffers from a camera.
    Render(RenderArgs),
    /// Open-vocabulary relevancy and mask for one query.
    Query(QueryArgs),
    /// Segmentation IoU and optional image quality metrics.
    Eval(EvalArgs),
    /// Write the deterministic synthetic scene.
    Synth(SynthArgs),
}

#[derive(Debug, Subcommand)]
enum BankCommand {
    /// Cluster mask embeddings into a bank and write per-view index maps.
    Build(BankBuildArgs),
}

#[derive(Debug, Args)]
struct BankBuildArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bank file to write.
    #[arg(long)]
    out: PathBuf,
    /// Directory receiving `view_<index>.png` index maps.
    maps: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LiftMode {
    /// One Gaussian per input pixel, stored view-major.
    Pixel,
    /// Project centers into the input views.
    Project,
}

#[derive(Debug, Args)]
struct LiftArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Directory written by `bank build`.
    #[arg(long)]
    maps: PathBuf,
    #[arg(long, value_enum, default_value = "pixel")]
    mode: LiftMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RenderArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    camera: PathBuf,
    /// Color PNG followed by the semantic buffer.
    #[arg(long, required = true, num_args = 2, value_names = ["RGB_PNG", "SEMANTIC_BIN"])]
    out: Vec<PathBuf>,
    /// Also write the recovered unit feature map.
    #[arg(long)]
    features_out: Option<PathBuf>,
    #[arg(long)]
    tile_size: Option<usize>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// Feature map, or a semantic buffer when `--bank` is given.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    bank: Option<PathBuf>,
    /// Single-row embedding file.
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    canon: PathBuf,
    #[arg(long)]
    tau: Option<f64>,
    /// Heatmap PNG followed by the mask PNG.
    #[arg(long, required = true, num_args = 2, value_names = ["RELEVANCY_PNG", "MASK_PNG"])]
    out: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// `NAME:PRED_MASK:GT_MASK`, repeatable.
    #[arg(long = "query", value_parser = parse_eval_query)]
    queries: Vec<EvalQuery>,
    #[arg(long, requires = "reference")]
    image: Option<PathBuf>,
    #[arg(long, requires = "image")]
    reference: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone)]
struct EvalQuery {
    name: String,
    pred: PathBuf,
    gt: PathBuf,
}

fn parse_eval_query(s: &str) -> std::result::Result<EvalQuery, String> {
    let mut parts = s.splitn(3, ':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(name), Some(pred), Some(gt)) if !name.is_empty() && !pred.is_empty() && !gt.is_empty() => Ok(EvalQuery {
            name: name.to_string(),
            pred: pred.into(),
            gt: gt.into(),
        }),
        _ => Err(format!("expected NAME:PRED:GT, got '{s}'")),
    }
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Usage(String),
    Processing(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Processing(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Processing(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Err(_) => 0,
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                eprintln!("error: {THREADS_ENV} must be a non-negative integer, got '{v}'");
                return 2;
            }
        },
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Processing(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        None => PipelineConfig::default(),
        Some(path) => {
            require_inputs(&[path])?;
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Processing(Error::io(path, e)))?;
            PipelineConfig::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
    };
    match cli.command {
        Command::Bank(BankCommand::Build(a)) => {
            cfg.lambda = a.lambda.unwrap_or(cfg.lambda);
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            let cfg = validated(cfg)?;
            bank_build(&a, &cfg)
        }
        Command::Lift(a) => lift(&a, &validated(cfg)?),
        Command::Render(a) => {
            cfg.render.tile_size = a.tile_size.unwrap_or(cfg.render.tile_size);
            let cfg = validated(cfg)?;
            render_cmd(&a, &cfg)
        }
        Command::Query(a) => {
            cfg.temperature = a.tau.unwrap_or(cfg.temperature);
            let cfg = validated(cfg)?;
            query_cmd(&a, &cfg)
        }
        Command::Eval(a) => eval_cmd(&a, &validated(cfg)?),
        Command::Synth(a) => {
            cfg.seed = a.seed.unwrap_or(cfg.seed);
            synth_cmd(&a, &validated(cfg)?)
        }
    }
}

fn validated(cfg: PipelineConfig) -> CliResult<PipelineConfig> {
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    info!("config {}", cfg.to_json());
    info!("config digest {}", cfg.digest());
    Ok(cfg)
}

fn require_inputs(paths: &[&Path]) -> CliResult<()> {
    for p in paths {
        if !p.exists() {
            return Err(Failure::Usage(format!("input not found: {}", p.display())));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    command: &'a str,
    config: &'a PipelineConfig,
    config_digest: String,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

fn digests(paths: &[&Path]) -> Result<BTreeMap<String, String>> {
    paths.iter().map(|p| Ok((p.display().to_string(), sha256_file(p)?))).collect()
}

fn hash_inputs(paths: &[&Path]) -> Result<BTreeMap<String, String>> {
    let d = digests(paths)?;
    for (path, hash) in &d {
        info!("input {path} sha256 {hash}");
    }
    Ok(d)
}

/// Writes the run record next to `sidecar_for` (a file) or inside it (a
/// directory).
fn write_record(
    command: &str,
    cfg: &PipelineConfig,
    inputs: BTreeMap<String, String>,
    outputs: &[&Path],
    sidecar_for: &Path,
) -> Result<()> {
    let record = RunRecord {
        command,
        config: cfg,
        config_digest: cfg.digest(),
        inputs,
        outputs: digests(outputs)?,
    };
    let path = if sidecar_for.is_dir() {
        sidecar_for.join("run.json")
    } else {
        let mut name = sidecar_for.as_os_str().to_owned();
        name.push(".run.json");
        PathBuf::from(name)
    };
    io::write_bytes(&path, serde_json::to_string_pretty(&record)?.as_bytes())
}

fn manifest_base(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn map_path(dir: &Path, view_index: u32) -> PathBuf {
    dir.join(format!("view_{view_index}.png"))
}

fn bank_build(a: &BankBuildArgs, cfg: &PipelineConfig) -> CliResult<()> {
    require_inputs(&[&a.manifest])?;
    let manifest = AnnotationManifest::read(&a.manifest)?;
    let base = manifest_base(&a.manifest);
    let mut inputs = vec![a.manifest.clone()];
    for v in &manifest.views {
        inputs.push(base.join(&v.embeddings_path));
        match &v.mask_paths {
            Some(paths) => inputs.extend(paths.iter().map(|p| base.join(p))),
            None => inputs.push(base.join(&v.label_map_path)),
        }
    }
    let input_refs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    require_inputs(&input_refs)?;
    let input_hashes = hash_inputs(&input_refs)?;

    let views = manifest.load_views(base)?;
    let (bank, maps) = cfg.build_bank(views)?;
    io::write_bank(&a.out, &bank)?;
    let mut outputs = vec![a.out.clone()];
    for m in &maps {
        let p = map_path(&a.maps, m.view_index);
        io::write_label_map_png(&p, &m.values)?;
        outputs.push(p);
    }
    println!("M = {}", bank.len());
    let refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    write_record("bank build", cfg, input_hashes.clone(), &refs, &a.out)?;
    write_record("bank build", cfg, input_hashes, &refs, &a.maps)?;
    Ok(())
}

fn lift(a: &LiftArgs, cfg: &PipelineConfig) -> CliResult<()> {
    require_inputs(&[&a.scene, &a.manifest, &a.maps])?;
    let manifest = AnnotationManifest::read(&a.manifest)?;
    let map_paths: Vec<PathBuf> = manifest.views.iter().map(|v| map_path(&a.maps, v.view_index)).collect();
    let mut inputs: Vec<&Path> = vec![&a.scene, &a.manifest];
    inputs.extend(map_paths.iter().map(PathBuf::as_path));
    require_inputs(&inputs)?;
    let input_hashes = hash_inputs(&inputs)?;

    let gaussians = io::read_scene_ply(&a.scene)?;
    let maps = manifest
        .views
        .iter()
        .zip(&map_paths)
        .map(|(v, p)| {
            Ok(SemanticIndexMap {
                view_index: v.view_index,
                values: io::read_label_map(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lifted = match a.mode {
        LiftMode::Pixel => {
            let first = manifest.views.first().ok_or_else(|| Error::invalid("manifest has no views"))?;
            let (w, h) = (first.image_width as usize, first.image_height as usize);
            if manifest.views.iter().any(|v| v.image_width as usize != w || v.image_height as usize != h) {
                return Err(Error::invalid("pixel-aligned lifting needs all views at one resolution").into());
            }
            let sources = manifest.views.iter().map(|v| v.view_index).collect();
            let scene = PixelAlignedScene::new(gaussians, manifest.views.len(), h, w, sources)?;
            attach_pixel_aligned(&scene, &maps)?
        }
        LiftMode::Project => assign_by_projection(&gaussians, &manifest.cameras(), &maps)?,
    };
    io::write_scene_ply(&a.out, &lifted)?;
    let assigned = lifted.iter().filter(|g| g.semantic_index != 0).count();
    println!("{assigned} of {} gaussians labeled", lifted.len());
    write_record("lift", cfg, input_hashes, &[&a.out], &a.out)?;
    Ok(())
}

fn render_cmd(a: &RenderArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let inputs: [&Path; 3] = [&a.scene, &a.bank, &a.camera];
    require_inputs(&inputs)?;
    let input_hashes = hash_inputs(&inputs)?;
    let gaussians = io::read_scene_ply(&a.scene)?;
    let bank = io::read_bank(&a.bank)?;
    let camera = io::read_camera(&a.camera)?;

    let buffers = render(&gaussians, bank.len(), &camera, &cfg.render)?;
    let semantic = match buffers.semantic {
        Some(s) => s,
        None => crate::Raster::from_vec(buffers.width(), buffers.height(), 0, Vec::new())?,
    };
    let (rgb_path, sem_path) = (&a.out[0], &a.out[1]);
    io::write_rgb_png(rgb_path, &buffers.color)?;
    io::write_buffer(sem_path, &semantic)?;
    let mut outputs: Vec<&Path> = vec![rgb_path, sem_path];
    if let Some(f) = &a.features_out {
        let features = recover_features(&semantic, &bank)?;
        io::write_buffer(f, &features.values)?;
        outputs.push(f);
    }
    for o in &outputs {
        write_record("render", cfg, input_hashes.clone(), &outputs, o)?;
    }
    Ok(())
}

fn single_row(m: EmbeddingMatrix, path: &Path) -> CliResult<Vec<f32>> {
    if m.rows != 1 {
        return Err(Failure::Usage(format!("{} must hold exactly one embedding, found {}", path.display(), m.rows)));
    }
    Ok(m.row(0).to_vec())
}

fn query_cmd(a: &QueryArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let mut inputs: Vec<&Path> = vec![&a.features, &a.query, &a.canon];
    if let Some(b) = &a.bank {
        inputs.push(b);
    }
    require_inputs(&inputs)?;
    let input_hashes = hash_inputs(&inputs)?;

    let raw = io::read_buffer(&a.features)?;
    let features = match &a.bank {
        Some(b) => recover_features(&raw, &io::read_bank(b)?)?,
        None => FeatureMap::from_values(raw),
    };
    let query = single_row(io::read_embeddings(&a.query)?, &a.query)?;
    let canonicals = io::read_embeddings(&a.canon)?.to_rows();
    let qc = cfg.query_config(query, canonicals);
    let relevancy = relevancy_map(&features, &qc)?;
    let mask = segment(&relevancy, qc.mask_threshold)?;
    let (heat_path, mask_path) = (&a.out[0], &a.out[1]);
    io::write_heatmap_png(heat_path, &relevancy)?;
    io::write_mask_png(mask_path, &mask)?;
    println!("{} pixels selected", mask.data().iter().filter(|&&m| m).count());
    let outputs: [&Path; 2] = [heat_path, mask_path];
    for o in outputs {
        write_record("query", cfg, input_hashes.clone(), &outputs, o)?;
    }
    Ok(())
}

fn eval_cmd(a: &EvalArgs, cfg: &PipelineConfig) -> CliResult<()> {
    if a.queries.is_empty() && a.image.is_none() {
        return Err(Failure::Usage("eval needs at least one --query or an --image/--reference pair".into()));
    }
    let mut inputs: Vec<&Path> = a.queries.iter().flat_map(|q| [q.pred.as_path(), q.gt.as_path()]).collect();
    inputs.extend(a.image.iter().chain(&a.reference).map(PathBuf::as_path));
    require_inputs(&inputs)?;
    let input_hashes = hash_inputs(&inputs)?;

    let mut per_query = BTreeMap::new();
    for q in &a.queries {
        let iou = metrics::iou(&io::read_mask(&q.pred)?, &io::read_mask(&q.gt)?)?;
        if per_query.insert(q.name.clone(), iou).is_some() {
            return Err(Failure::Usage(format!("query name '{}' given twice", q.name)));
        }
    }
    let (psnr, ssim) = match (&a.image, &a.reference) {
        (Some(i), Some(r)) => {
            let (img, reference) = (io::read_rgb_png(i)?, io::read_rgb_png(r)?);
            (Some(metrics::psnr(&img, &reference)?), Some(metrics::ssim(&img, &reference)?))
        }
        _ => (None, None),
    };
    let report = EvalReport::new(per_query, psnr, ssim, cfg.digest());
    io::write_bytes(&a.out, serde_json::to_string_pretty(&report)?.as_bytes())?;
    println!("mIoU {:.4}", report.miou);
    write_record("eval", cfg, input_hashes, &[&a.out], &a.out)?;
    Ok(())
}

fn synth_cmd(a: &SynthArgs, cfg: &PipelineConfig) -> CliResult<()> {
    let scfg = SynthConfig {
        seed: cfg.seed,
        ..SynthConfig::default()
    };
    let scene = synth::generate(&scfg)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let files = synth::write_scene(&scene, &a.out)?;
    io::write_bytes(&a.out.join("files.json"), serde_json::to_string_pretty(&files)?.as_bytes())?;
    let mut names: Vec<PathBuf> = std::fs::read_dir(&a.out)
        .map_err(|e| Error::io(&a.out, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.file_name().is_some_and(|n| n != "run.json"))
        .collect();
    names.sort();
    let refs: Vec<&Path> = names.iter().map(PathBuf::as_path).collect();
    write_record("synth", cfg, BTreeMap::new(), &refs, &a.out)?;
    println!("synthetic scene written to {}", a.out.display());
    Ok(())
}
