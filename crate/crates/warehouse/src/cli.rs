//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation errors (or an invalid bundle),
//! 2 usage errors and unreadable inputs.

use std::ffi::OsString;
use std::fs;
use std::io::{BufReader, Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use warehouse_core::compose::{NoiseRegion, NoiseSpec};
use warehouse_core::detect::{analyze, DEFAULT_SUPERNODE_THRESHOLD};
use warehouse_core::diagnostic::has_errors;
use warehouse_core::nodes::Partition;
use warehouse_core::scenario::{Scenario, ScenarioSpec};
use warehouse_core::session::SessionEvent;
use warehouse_core::topology::{Topology, TopologyKind, TopologySpec};
use warehouse_core::{new_template, parse_module, serialize_module, validate_module, Bundle, Diagnostic, Palette, Session};

use crate::archive::{bundle_zip, load_bundle, pack_dir, unpack, ArchiveError};
use crate::generate::{generate, GenRequest, PatternSpec};
use crate::play::{play_session, read_log, score_line, write_log};
use crate::render::render_view;
use crate::samples::{sample, samples, SAMPLE_AUTHOR};
use crate::service::{self, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "warehouse", version, about = "Author, check, generate and play traffic-matrix learning modules")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Check module files (.json) or bundles (.zip).
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// One JSON object per line instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Write a blank template module.
    New {
        /// 6x6 or 10x10.
        #[arg(long)]
        size: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Generate a module from one or more overlaid patterns, or the sample set.
    Gen(Box<GenArgs>),
    /// Validate a directory of modules and zip it.
    Pack {
        dir: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Extract a bundle.
    Unpack {
        bundle: PathBuf,
        #[arg(short, long)]
        dir: PathBuf,
    },
    /// Play a bundle (.zip, directory, or built-in sample id) in the terminal.
    Play {
        bundle: String,
        #[arg(long, env = "WAREHOUSE_SEED")]
        seed: Option<u64>,
        /// Write the session event log here (JSON lines).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Rebuild the session from a saved log instead of reading keys.
        #[arg(long)]
        replay: Option<PathBuf>,
        /// Instructor mode: show matrices without questions.
        #[arg(long)]
        no_questions: bool,
    },
    /// Report the structures detected in a module's matrix.
    Analyze {
        path: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SUPERNODE_THRESHOLD)]
        threshold: usize,
        #[arg(long)]
        json: bool,
    },
    /// List the built-in sample bundles.
    Samples,
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        /// Idle time before a session expires, e.g. 90s, 30m, 24h.
        #[arg(long, default_value = "24h", value_parser = parse_duration)]
        session_ttl: Duration,
        /// Upload limit in bytes.
        #[arg(long, default_value_t = service::DEFAULT_MAX_UPLOAD)]
        max_upload: usize,
        /// Web player assets to serve at /.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Pattern slugs, overlaid in order (e.g. ring, ddos-attack).
    kinds: Vec<String>,
    /// Matrix size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    hub: Option<usize>,
    /// Bipartite source part size.
    #[arg(long)]
    a: Option<usize>,
    /// Bipartite destination part size.
    #[arg(long)]
    b: Option<usize>,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Comma-separated node indices for self-loop and triangle.
    #[arg(long, value_delimiter = ',')]
    vertices: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    weight: u64,
    /// Mirror every topology edge.
    #[arg(long)]
    symmetric: bool,
    /// Node spaces as a B/G/R string, e.g. BBBBGGRRRR.
    #[arg(long)]
    partition: Option<String>,
    /// Packets per active scenario cell.
    #[arg(long, default_value_t = 1)]
    intensity: u64,
    /// Red nodes acting as C2 servers.
    #[arg(long, default_value_t = 2)]
    c2: usize,
    /// Background packets to scatter.
    #[arg(long)]
    noise: Option<u64>,
    /// all, grey, blue or red.
    #[arg(long, default_value = "all")]
    noise_region: String,
    #[arg(long, default_value_t = 15)]
    noise_cap: u64,
    /// Defaults to --seed.
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, env = "WAREHOUSE_SEED", default_value_t = 0)]
    seed: u64,
    /// Attach a "which pattern is this" question.
    #[arg(long)]
    question: bool,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = SAMPLE_AUTHOR)]
    author: String,
    #[arg(long)]
    hint: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
    /// Write every sample bundle (module files and zips) here instead.
    #[arg(long, conflicts_with_all = ["kinds", "out"])]
    bundle_dir: Option<PathBuf>,
}

/// Failure carrying its exit code.
#[derive(Debug)]
enum Fail {
    Usage(String),
    Invalid(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Usage(_) => 2,
            Fail::Invalid(_) => 1,
        }
    }
}

type CmdResult = Result<u8, Fail>;

fn usage(e: impl std::fmt::Display) -> Fail {
    Fail::Usage(e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Fail> {
    fs::read(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn write_new(path: &Path, bytes: &[u8], force: bool) -> Result<(), Fail> {
    if path.exists() && !force {
        return Err(Fail::Usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    fs::write(path, bytes).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn io_fail(e: std::io::Error) -> Fail {
    Fail::Usage(e.to_string())
}

/// Accepts plain seconds or a number with an `s`, `m`, `h` or `d` suffix.
pub fn parse_duration(s: &str) -> Result<Duration, String> {
    let s = s.trim();
    let (num, unit) = match s.find(|c: char| !c.is_ascii_digit()) {
        Some(i) => s.split_at(i),
        None => (s, "s"),
    };
    let n: u64 = num.parse().map_err(|_| format!("bad duration {s:?}"))?;
    let secs = match unit {
        "s" => 1,
        "m" => 60,
        "h" => 3600,
        "d" => 86400,
        _ => return Err(format!("bad duration unit in {s:?}")),
    };
    Ok(Duration::from_secs(n * secs))
}

pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Validate { paths, json } => cmd_validate(&paths, json, out, err),
        Cmd::New { size, out: path, force } => cmd_new(&size, &path, force, out),
        Cmd::Gen(args) => cmd_gen(*args, out),
        Cmd::Pack { dir, out: path } => cmd_pack(&dir, &path, out, err),
        Cmd::Unpack { bundle, dir } => cmd_unpack(&bundle, &dir, out),
        Cmd::Play { bundle, seed, log, replay, no_questions } => {
            cmd_play(&bundle, seed, log.as_deref(), replay.as_deref(), no_questions, stdin, out, err)
        }
        Cmd::Analyze { path, threshold, json } => cmd_analyze(&path, threshold, json, out),
        Cmd::Samples => cmd_samples(out),
        Cmd::Serve { port, host, data_dir, session_ttl, max_upload, static_dir } => {
            let config = ServiceConfig { data_dir, session_ttl, max_upload, static_dir };
            cmd_serve(config, SocketAddr::new(host, port))
        }
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let (Fail::Usage(msg) | Fail::Invalid(msg)) = &f;
            let _ = writeln!(err, "error: {msg}");
            f.code()
        }
    }
}

fn print_diags(label: &str, diags: &[Diagnostic], json: bool, out: &mut dyn Write) -> std::io::Result<()> {
    for d in diags {
        if json {
            let mut v = serde_json::to_value(d)?;
            v["source"] = json!(label);
            writeln!(out, "{v}")?;
        } else {
            writeln!(out, "{label}: {d}")?;
        }
    }
    let ok = !has_errors(diags);
    if json {
        writeln!(out, "{}", json!({ "source": label, "ok": ok }))
    } else if ok {
        writeln!(out, "{label}: OK")
    } else {
        Ok(())
    }
}

/// Diagnostics for one file; `Err` when it could not be read.
fn check_path(path: &Path) -> Result<Vec<Diagnostic>, Fail> {
    let bytes = read(path)?;
    let is_zip = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("zip"));
    Ok(if is_zip {
        match load_bundle(&bytes) {
            Ok(loaded) => loaded.warnings,
            Err(d) => d,
        }
    } else {
        match parse_module(&bytes) {
            Ok(m) => validate_module(&m),
            Err(d) => d,
        }
    })
}

fn cmd_validate(paths: &[PathBuf], json: bool, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let mut code = 0;
    for path in paths {
        let label = path.display().to_string();
        match check_path(path) {
            Ok(diags) => {
                print_diags(&label, &diags, json, out).map_err(io_fail)?;
                if has_errors(&diags) {
                    code = code.max(1);
                }
            }
            Err(Fail::Usage(msg) | Fail::Invalid(msg)) => {
                let _ = writeln!(err, "error: {msg}");
                code = 2;
            }
        }
    }
    Ok(code)
}

fn cmd_new(size: &str, path: &Path, force: bool, out: &mut dyn Write) -> CmdResult {
    let n = match size.to_ascii_lowercase().as_str() {
        "6x6" | "6" => 6,
        "10x10" | "10" => 10,
        _ => return Err(Fail::Usage(format!("unsupported size {size:?}; use 6x6 or 10x10"))),
    };
    let module = new_template(n).map_err(usage)?;
    write_new(path, serialize_module(&module).as_bytes(), force)?;
    writeln!(out, "wrote {}", path.display()).map_err(io_fail)?;
    Ok(0)
}

fn topology_for(kind: TopologyKind, a: &GenArgs, n: usize) -> Topology {
    match kind {
        TopologyKind::Star => Topology::Star { hub: a.hub.unwrap_or(0) },
        TopologyKind::Clique => Topology::Clique,
        TopologyKind::Bipartite => {
            let first = a.a.unwrap_or(n / 2);
            Topology::Bipartite { a: first, b: a.b.unwrap_or(n.saturating_sub(first)) }
        }
        TopologyKind::Tree => Topology::Tree { branching: a.branching },
        TopologyKind::Ring => Topology::Ring,
        TopologyKind::Mesh => Topology::Mesh { rows: a.rows.unwrap_or(3), cols: a.cols.unwrap_or(3) },
        TopologyKind::ToroidalMesh => Topology::ToroidalMesh { rows: a.rows.unwrap_or(3), cols: a.cols.unwrap_or(3) },
        TopologyKind::SelfLoop => Topology::SelfLoop {
            vertices: if a.vertices.is_empty() { (0..n).collect() } else { a.vertices.clone() },
        },
        TopologyKind::Triangle => Topology::Triangle {
            vertices: match a.vertices[..] {
                [x, y, z] => [x, y, z],
                _ => [0, 1, 2],
            },
        },
    }
}

fn gen_request(a: &GenArgs) -> Result<GenRequest, Fail> {
    if a.kinds.is_empty() {
        return Err(usage("name at least one pattern, or pass --bundle-dir"));
    }
    let partition = match &a.partition {
        Some(s) => Some(Partition::parse(s).ok_or_else(|| usage(format!("bad partition {s:?}; use B, G and R")))?),
        None => None,
    };
    if matches!(a.vertices.len(), 1 | 2) && a.kinds.iter().any(|k| k == "triangle") {
        return Err(usage("triangle needs exactly three --vertices"));
    }
    let grid = a.rows.zip(a.cols).map(|(r, c)| r * c);
    let n = a
        .n
        .or(partition.as_ref().map(Partition::len))
        .or(grid.filter(|_| a.kinds.iter().all(|k| k.contains("mesh"))))
        .unwrap_or(10);
    let mut patterns = Vec::new();
    for slug in &a.kinds {
        if let Some(kind) = TopologyKind::from_slug(slug) {
            let spec = TopologySpec::new(topology_for(kind, a, n), n).symmetric(a.symmetric).weight(a.weight);
            patterns.push(PatternSpec::Topology(spec));
        } else if let Some(scenario) = Scenario::from_slug(slug) {
            let mut spec = ScenarioSpec::new(scenario, n);
            if let Some(p) = &partition {
                spec.partition = p.clone();
            }
            spec.intensity = a.intensity;
            spec.hub = a.hub;
            spec.c2_count = a.c2;
            patterns.push(PatternSpec::Scenario(spec));
        } else {
            return Err(usage(format!("unknown pattern {slug:?}")));
        }
    }
    let noise = match a.noise {
        Some(count) => {
            let region = match a.noise_region.to_ascii_lowercase().as_str() {
                "all" => NoiseRegion::All,
                "grey" | "gray" => NoiseRegion::Color(Palette::Grey),
                "blue" => NoiseRegion::Color(Palette::Blue),
                "red" => NoiseRegion::Color(Palette::Red),
                other => return Err(usage(format!("bad noise region {other:?}"))),
            };
            Some(NoiseSpec { seed: a.noise_seed.unwrap_or(a.seed), count, region, max_per_cell: a.noise_cap })
        }
        None => None,
    };
    Ok(GenRequest {
        patterns,
        partition,
        labels: None,
        noise,
        question_seed: a.question.then_some(a.seed),
        name: a.name.clone(),
        author: a.author.clone(),
        hint: a.hint.clone(),
    })
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> CmdResult {
    if let Some(dir) = &a.bundle_dir {
        return write_samples(dir, a.force, out);
    }
    let req = gen_request(&a)?;
    let module = generate(&req).map_err(usage)?;
    let text = serialize_module(&module);
    match &a.out {
        Some(path) => {
            write_new(path, text.as_bytes(), a.force)?;
            writeln!(out, "wrote {}", path.display()).map_err(io_fail)?;
        }
        None => writeln!(out, "{text}").map_err(io_fail)?,
    }
    Ok(0)
}

fn write_samples(dir: &Path, force: bool, out: &mut dyn Write) -> CmdResult {
    let sets = samples();
    for set in &sets {
        let sub = dir.join(set.id);
        fs::create_dir_all(&sub).map_err(io_fail)?;
        for (name, module) in &set.modules {
            write_new(&sub.join(name), serialize_module(module).as_bytes(), force)?;
        }
        write_new(&dir.join(set.archive), &bundle_zip(&set.modules), force)?;
        writeln!(out, "{}: {} modules -> {}", set.id, set.modules.len(), dir.join(set.archive).display())
            .map_err(io_fail)?;
    }
    Ok(0)
}

fn cmd_pack(dir: &Path, path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    match pack_dir(dir) {
        Ok((bytes, warnings)) => {
            for w in &warnings {
                writeln!(err, "{w}").map_err(io_fail)?;
            }
            fs::write(path, bytes).map_err(io_fail)?;
            writeln!(out, "wrote {}", path.display()).map_err(io_fail)?;
            Ok(0)
        }
        Err(ArchiveError::Invalid(diags)) => {
            for d in &diags {
                writeln!(out, "{d}").map_err(io_fail)?;
            }
            Err(Fail::Invalid(format!("{} is not a valid bundle; nothing written", dir.display())))
        }
        Err(e) => Err(usage(e)),
    }
}

fn cmd_unpack(bundle: &Path, dir: &Path, out: &mut dyn Write) -> CmdResult {
    let bytes = read(bundle)?;
    let files = unpack(&bytes, dir).map_err(|e| match e {
        ArchiveError::Zip(_) | ArchiveError::UnsafePath(_) => Fail::Invalid(e.to_string()),
        e => usage(e),
    })?;
    for f in files {
        writeln!(out, "{}", f.display()).map_err(io_fail)?;
    }
    Ok(0)
}

/// Built-in sample id, zip file, or directory of module files.
fn open_bundle(spec: &str) -> Result<Bundle, Fail> {
    let path = Path::new(spec);
    let bytes = if path.is_dir() {
        match pack_dir(path) {
            Ok((b, _)) => b,
            Err(ArchiveError::Invalid(d)) => return Err(invalid_bundle(spec, &d)),
            Err(e) => return Err(usage(e)),
        }
    } else if path.exists() {
        read(path)?
    } else if let Some(s) = sample(spec) {
        bundle_zip(&s.modules)
    } else {
        return Err(usage(format!("{spec}: no such file or sample bundle")));
    };
    load_bundle(&bytes).map(|l| l.bundle).map_err(|d| invalid_bundle(spec, &d))
}

fn invalid_bundle(spec: &str, diags: &[Diagnostic]) -> Fail {
    let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
    Fail::Invalid(format!("{spec} is not a valid bundle:\n{}", lines.join("\n")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_play(
    spec: &str,
    seed: Option<u64>,
    log: Option<&Path>,
    replay: Option<&Path>,
    no_questions: bool,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    let bundle = Arc::new(open_bundle(spec)?);
    let session = match replay {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
            let records = read_log(BufReader::new(file)).map_err(usage)?;
            let s = Session::replay(bundle, &records).map_err(|e| Fail::Invalid(e.to_string()))?;
            if let Ok((view, _)) = s.present() {
                out.write_all(render_view(&view).as_bytes()).map_err(io_fail)?;
            }
            writeln!(out, "{}", score_line(&s)).map_err(io_fail)?;
            s
        }
        None => {
            let seed = seed.unwrap_or_else(rand::random);
            writeln!(err, "seed {seed}").map_err(io_fail)?;
            let mut s = Session::start(bundle, seed).map_err(|e| Fail::Invalid(e.to_string()))?;
            if no_questions {
                s.apply(SessionEvent::Questions { enabled: false }).map_err(|e| Fail::Invalid(e.to_string()))?;
            }
            play_session(s, stdin, out).map_err(io_fail)?
        }
    };
    if let Some(path) = log {
        let mut f = fs::File::create(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
        write_log(session.log(), &mut f).map_err(io_fail)?;
    }
    Ok(0)
}

fn cmd_analyze(path: &Path, threshold: usize, json: bool, out: &mut dyn Write) -> CmdResult {
    let bytes = read(path)?;
    let module = parse_module(&bytes).map_err(|d| invalid_bundle(&path.display().to_string(), &d))?;
    let report = analyze(&module.traffic_matrix, &module.traffic_matrix_colors, threshold);
    let w = |e| io_fail(e);
    if json {
        writeln!(out, "{}", serde_json::to_string(&report).map_err(usage)?).map_err(w)?;
        return Ok(0);
    }
    let label = |i: usize| module.axis_labels.0.get(i).cloned().unwrap_or_else(|| i.to_string());
    for f in &report.findings {
        let nodes: Vec<String> = f.nodes.iter().map(|&i| label(i)).collect();
        writeln!(out, "{:?} {} ({} cells, {:?})", f.kind, nodes.join(" "), f.cells, f.confidence).map_err(w)?;
    }
    let kinds: Vec<&str> = report.topologies.iter().map(|k| k.slug()).collect();
    writeln!(out, "topologies: {}", if kinds.is_empty() { "-".into() } else { kinds.join(", ") }).map_err(w)?;
    writeln!(out, "unexplained cells: {}", report.residual).map_err(w)?;
    Ok(0)
}

fn cmd_samples(out: &mut dyn Write) -> CmdResult {
    for s in samples() {
        writeln!(out, "{:<28} {:>2} modules  {}", s.id, s.modules.len(), s.title).map_err(io_fail)?;
    }
    Ok(0)
}

fn cmd_serve(config: ServiceConfig, addr: SocketAddr) -> CmdResult {
    let rt = tokio::runtime::Runtime::new().map_err(io_fail)?;
    rt.block_on(service::serve(config, addr)).map_err(io_fail)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations() {
        assert_eq!(parse_duration("90"), Ok(Duration::from_secs(90)));
        assert_eq!(parse_duration("30m"), Ok(Duration::from_secs(1800)));
        assert_eq!(parse_duration("2d"), Ok(Duration::from_secs(172800)));
        assert!(parse_duration("5y").is_err());
        assert!(parse_duration("m").is_err());
    }

    #[test]
    fn mesh_size_follows_grid() {
        let cli = Cli::try_parse_from(["warehouse", "gen", "mesh", "--rows", "2", "--cols", "4"]).unwrap();
        let Cmd::Gen(a) = cli.cmd else { panic!() };
        let req = gen_request(&a).unwrap();
        assert_eq!(req.patterns[0].n(), 8);
    }
}
