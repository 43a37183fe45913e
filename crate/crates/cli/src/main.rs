//! `mbr`: build MBR code instances, encode files into shards, simulate node
//! failures and repairs, and print verification and comparison reports.
//!
//! Node ids on the command line and in every file are 1-based.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mbr_codes::cluster::Cluster;
use mbr_codes::manifest::{Manifest, ManifestError};
use mbr_codes::report::{compare, render_compare, verify_report};
use mbr_codes::shard::Shard;
use mbr_codes::{BuildSpec, CodeError, Exec, GraphChoice, Scheme, VerifyOptions};

#[derive(Parser)]
#[command(name = "mbr", version, about = "Minimum-bandwidth regenerating codes on a simulated cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a code instance and write its manifest.
    Build {
        #[command(flatten)]
        code: CodeArgs,
        /// Output directory for manifest.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Encode a file into one shard per node.
    Encode {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Shard directory; defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Regenerate a failed node from exactly d helpers.
    Repair {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        shards: Option<PathBuf>,
        #[arg(long)]
        failed: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        helpers: Vec<usize>,
        /// Where to write the regenerated shard; defaults to the shard directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Recover the original file from exactly k nodes.
    Collect {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        shards: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        nodes: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run repair and data-collection scenarios and report code properties.
    Verify {
        #[arg(long, conflicts_with_all = ["scheme", "n", "k", "d"])]
        manifest: Option<PathBuf>,
        #[command(flatten)]
        code: OptCodeArgs,
        /// Check every scenario (n <= 12) instead of a seeded sample.
        #[arg(long)]
        exhaustive: bool,
        /// Random messages per scenario.
        #[arg(long, default_value_t = 20)]
        messages: usize,
        /// Sampled scenarios per kind when not exhaustive.
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate field size, replication, HBT coverage and update complexity.
    Compare {
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<Scheme>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphArg {
    Circulant,
    Core,
}

#[derive(Args)]
struct CodeArgs {
    #[arg(long)]
    scheme: Scheme,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Repair degree; may be omitted for rbt (d = n-1).
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    extra: ExtraArgs,
}

#[derive(Args)]
struct OptCodeArgs {
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    extra: ExtraArgs,
}

#[derive(Args)]
struct ExtraArgs {
    /// Base field degree override, GF(2^bits).
    #[arg(long)]
    field_bits: Option<u32>,
    /// cons-a precoder: none, gabidulin or single-parity.
    #[arg(long)]
    precoder: Option<String>,
    /// Base code for replicate / near-replicate.
    #[arg(long)]
    base: Option<Scheme>,
    /// Replication graph for replicate.
    #[arg(long, value_enum)]
    graph: Option<GraphArg>,
}

/// Bad parameters or inputs; exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

/// Verification or decoding did not succeed; exit code 1.
#[derive(Debug)]
struct Failed;

impl std::fmt::Display for Failed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for Failed {}

fn code_error(e: CodeError) -> anyhow::Error {
    match e {
        CodeError::InvalidParams(_) | CodeError::Unsupported(_) | CodeError::FieldTooSmall(_) | CodeError::Field(_) => {
            usage(e.to_string())
        }
        other => anyhow!(other),
    }
}

fn manifest_error(e: ManifestError) -> anyhow::Error {
    match e {
        ManifestError::Code(c) => code_error(c),
        ManifestError::Io { .. } | ManifestError::Json(_) | ManifestError::Version(_) => usage(e.to_string()),
        other => anyhow!(other),
    }
}

fn spec_from(scheme: Scheme, n: usize, k: usize, d: Option<usize>, extra: &ExtraArgs) -> Result<BuildSpec> {
    let mut spec = BuildSpec::new(scheme, n, k, d).map_err(code_error)?;
    spec.field_bits = extra.field_bits;
    spec.precoder = extra.precoder.clone();
    spec.base = extra.base;
    spec.graph = extra.graph.map(|g| match g {
        GraphArg::Circulant => GraphChoice::Circulant,
        GraphArg::Core => GraphChoice::Core,
    });
    Ok(spec)
}

fn shard_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node-{node}.shard"))
}

fn default_dir(manifest: &Path) -> PathBuf {
    manifest.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
}

fn to_zero_based(ids: &[usize], n: usize) -> Result<Vec<usize>> {
    ids.iter()
        .map(|&i| if (1..=n).contains(&i) { Ok(i - 1) } else { Err(usage(format!("node id {i} outside 1..={n}"))) })
        .collect()
}

fn load(manifest: &Path) -> Result<(Manifest, Arc<mbr_codes::CodeInstance>)> {
    let m = Manifest::load(manifest).map_err(manifest_error)?;
    let inst = m.rebuild().map_err(manifest_error)?;
    Ok((m, Arc::new(inst)))
}

/// Reads every shard file present in `dir`, skipping `exclude`.
fn load_shards(dir: &Path, n: usize, exclude: Option<usize>) -> Result<Vec<Shard>> {
    let mut shards = Vec::new();
    for node in 1..=n {
        if Some(node) == exclude {
            continue;
        }
        let path = shard_path(dir, node);
        if !path.exists() {
            continue;
        }
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let shard = Shard::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))?;
        if shard.header.node_id as usize != node {
            bail!("{} carries node id {}", path.display(), shard.header.node_id);
        }
        shards.push(shard);
    }
    Ok(shards)
}

fn emit(json: bool, value: serde_json::Value, text: String) {
    if json {
        println!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        print!("{text}");
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Build { code, out, json } => {
            let spec = spec_from(code.scheme, code.n, code.k, code.d, &code.extra)?;
            let (manifest, inst) = Manifest::build(&spec).map_err(manifest_error)?;
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let path = out.join("manifest.json");
            manifest.save(&path).map_err(manifest_error)?;
            let p = inst.params();
            emit(
                json,
                serde_json::json!({
                    "manifest": path.display().to_string(),
                    "scheme": inst.scheme(),
                    "n": p.n, "k": p.k, "d": p.d, "alpha": p.alpha, "b": p.b,
                    "field_bits": inst.field().bits(),
                    "generator_sha256": manifest.generator_sha256,
                }),
                format!(
                    "built {} (n={}, k={}, d={}, alpha={}, B={}) over GF(2^{})\nmanifest: {}\n",
                    inst.scheme(),
                    p.n,
                    p.k,
                    p.d,
                    p.alpha,
                    p.b,
                    inst.field().bits(),
                    path.display()
                ),
            );
        }
        Command::Encode { manifest: mpath, input, out, json } => {
            let (mut manifest, inst) = load(&mpath)?;
            let data = fs::read(&input).with_context(|| format!("reading {}", input.display())).map_err(|e| usage(format!("{e:#}")))?;
            let dir = out.unwrap_or_else(|| default_dir(&mpath));
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let cluster = Cluster::encode(Arc::clone(&inst), &data, Exec::default())?;
            for node in 0..inst.params().n {
                let shard = cluster.shard(node).expect("fresh cluster has every shard");
                let path = shard_path(&dir, node + 1);
                fs::write(&path, shard.to_bytes()).with_context(|| format!("writing {}", path.display()))?;
            }
            manifest.payload_len = Some(data.len() as u64);
            manifest.save(&mpath).map_err(manifest_error)?;
            emit(
                json,
                serde_json::json!({ "bytes": data.len(), "stripes": cluster.stripes(), "shards": inst.params().n, "dir": dir.display().to_string() }),
                format!("encoded {} bytes into {} stripes across {} shards in {}\n", data.len(), cluster.stripes(), inst.params().n, dir.display()),
            );
        }
        Command::Repair { manifest: mpath, shards, failed, helpers, out, json } => {
            let (_, inst) = load(&mpath)?;
            let p = *inst.params();
            let dir = shards.unwrap_or_else(|| default_dir(&mpath));
            let failed0 = to_zero_based(&[failed], p.n)?[0];
            let helpers0 = to_zero_based(&helpers, p.n)?;
            if helpers0.len() != p.d {
                return Err(usage(format!("repair needs exactly d = {} helpers, got {}", p.d, helpers0.len())));
            }
            if helpers0.contains(&failed0) {
                return Err(usage(format!("node {failed} cannot help repair itself")));
            }
            let original = fs::read(shard_path(&dir, failed)).ok();
            let mut cluster = Cluster::from_shards(Arc::clone(&inst), load_shards(&dir, p.n, Some(failed))?, Exec::default())?;
            for &h in &helpers0 {
                if !cluster.is_live(h) {
                    bail!("helper {} has no shard in {}", h + 1, dir.display());
                }
            }
            let report = cluster.repair(failed0, &helpers0)?;
            let bytes = cluster.shard(failed0).expect("repaired").to_bytes();
            let target = out.unwrap_or_else(|| shard_path(&dir, failed));
            fs::write(&target, &bytes).with_context(|| format!("writing {}", target.display()))?;
            let identical = original.as_ref().map(|o| *o == bytes);
            emit(
                json,
                serde_json::json!({
                    "failed": failed,
                    "helpers": helpers,
                    "stripes": report.stripes,
                    "transferred": report.transferred,
                    "helper_reads": report.helper_reads,
                    "hbt": report.hbt,
                    "rbt": report.rbt,
                    "identical_to_original": identical,
                    "shard": target.display().to_string(),
                }),
                format!(
                    "repaired node {failed} from {:?}: {} symbols transferred, {} read at helpers, hbt={}, rbt={}{}\n",
                    helpers,
                    report.transferred,
                    report.helper_reads,
                    report.hbt,
                    report.rbt,
                    identical.map_or(String::new(), |same| format!(", identical to original: {same}"))
                ),
            );
            if identical == Some(false) {
                eprintln!("error: regenerated shard differs from the original");
                return Err(anyhow::Error::new(Failed));
            }
        }
        Command::Collect { manifest: mpath, shards, nodes, out, json } => {
            let (manifest, inst) = load(&mpath)?;
            let p = *inst.params();
            let dir = shards.unwrap_or_else(|| default_dir(&mpath));
            let nodes0 = to_zero_based(&nodes, p.n)?;
            if nodes0.len() != p.k {
                return Err(usage(format!("collection needs exactly k = {} nodes, got {}", p.k, nodes0.len())));
            }
            let len = manifest.payload_len.ok_or_else(|| usage("manifest records no encoded payload; run encode first"))?;
            let cluster = Cluster::from_shards(Arc::clone(&inst), load_shards(&dir, p.n, None)?, Exec::default())?;
            let (data, report) = cluster
                .collect_bytes(&nodes0, len as usize)
                .with_context(|| format!("collecting from nodes {nodes:?}"))?;
            fs::write(&out, &data).with_context(|| format!("writing {}", out.display()))?;
            emit(
                json,
                serde_json::json!({ "nodes": nodes, "bytes": data.len(), "stripes": report.stripes, "symbols_read": report.symbols_read }),
                format!("recovered {} bytes from nodes {:?} ({} symbols read)\n", data.len(), nodes, report.symbols_read),
            );
        }
        Command::Verify { manifest, code, exhaustive, messages, samples, seed, json } => {
            let inst = match manifest {
                Some(path) => load(&path)?.1,
                None => {
                    let (Some(scheme), Some(n), Some(k)) = (code.scheme, code.n, code.k) else {
                        return Err(usage("verify needs --manifest or --scheme, --n and --k"));
                    };
                    let spec = spec_from(scheme, n, k, code.d, &code.extra)?;
                    Arc::new(spec.build().map_err(code_error)?)
                }
            };
            let n = inst.params().n;
            if exhaustive && n > 12 {
                return Err(usage(format!("--exhaustive supports n <= 12, got n = {n}")));
            }
            let opts = VerifyOptions {
                messages,
                seed,
                exhaustive_limit: if exhaustive { 12 } else { 0 },
                sample_scenarios: samples,
                ..VerifyOptions::default()
            };
            let report = verify_report(&inst, &opts).map_err(code_error)?;
            let text = format!(
                "{} (n={}, k={}, d={}, B={}) over GF(2^{})\nrepair: {}/{} passed{}\ncollection: {}/{} passed{}\nreplication: {:?} (max {})\nhbt nodes: {:?}\nupdate complexity: {:?}\n{}\n",
                report.scheme,
                report.n,
                report.k,
                report.d,
                report.b,
                report.field_bits,
                report.repair.passed,
                report.repair.total,
                if report.repair.exhaustive { " (exhaustive)" } else { " (sampled)" },
                report.collection.passed,
                report.collection.total,
                if report.collection.exhaustive { " (exhaustive)" } else { " (sampled)" },
                report.replication_histogram,
                report.max_replication,
                report.hbt.iter().filter(|(_, &v)| v).map(|(&i, _)| i).collect::<Vec<_>>(),
                report.update_complexity.values().collect::<Vec<_>>(),
                if report.passed { "PASS" } else { "FAIL" },
            );
            emit(json, serde_json::to_value(&report)?, text);
            if !report.passed {
                return Err(anyhow::Error::new(Failed));
            }
        }
        Command::Compare { schemes, n, k, d, json } => {
            let schemes = if schemes.is_empty() { Scheme::ALL.to_vec() } else { schemes };
            let rows = compare(&schemes, n, k, d);
            emit(json, serde_json::to_value(&rows)?, render_compare(&rows));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Failed>() => ExitCode::from(1),
        Err(e) if e.is::<Usage>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
