//! `textland` command-line interface.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 parse error, 3 no detection
//! associated with a pose, 4 no long-term classes to distill, 5 map not
//! distilled, 6 no selection for the query, 7 map holds no landmarks,
//! 8 language-model backend failure.

use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use textland::io::{self, MapFile};
use textland::llm::{BackendConfig, LlmError};
use textland::memory::MemoryStatus;
use textland::pipeline::MapState;
use textland::sim::{render_stream, Scenario};
use textland::svg::render_map_svg;
use textland::{Error, LlmBackend, RunConfig, Verdict, WorldPoint};

#[derive(Parser)]
#[command(name = "textland", version, about = "Build, distill and query scene-text landmark maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run text mapping over a trajectory and a detection log.
    Build {
        #[arg(long)]
        poses: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Name, judge and localize the long-term classes of a map.
    Distill {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        backend: PathBuf,
    },
    /// Answer a navigation query against a distilled map.
    Query {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        backend: PathBuf,
        /// Read queries line by line from stdin until end of input.
        #[arg(long)]
        interactive: bool,
        query: Option<String>,
    },
    /// Render a synthetic scenario into poses, detections and ground truth.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the landmark table, optionally with an SVG plot.
    Inspect {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::Config(_)
        | Error::Scenario(_)
        | Error::InvalidMap(_)
        | Error::MapVersion(_)
        | Error::Geometry(_)
        | Error::Text(_)
        | Error::Memory(_)
        | Error::Cluster(_) => 2,
        Error::EmptyAssociation => 3,
        Error::NoPromotedClasses => 4,
        Error::MapNotDistilled => 5,
        Error::Llm(LlmError::NoSelection(_)) => 6,
        Error::NoLandmarks => 7,
        Error::Llm(LlmError::Config(_) | LlmError::Template(_)) => 2,
        Error::Llm(_) => 8,
        Error::StalePose { .. } | Error::MissingClass(_) | Error::Io { .. } => 1,
    }
}

fn fmt_point(p: &WorldPoint) -> String {
    format!("{} {} {}", p.x, p.y, p.z)
}

fn verdict_flag(v: Verdict) -> &'static str {
    match v {
        Verdict::Landmark => "1",
        Verdict::NotLandmark => "0",
        Verdict::Unknown => "?",
    }
}

fn load_backend(path: &Path) -> Result<LlmBackend, Error> {
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(BackendConfig::load(path)?.into_backend(base)?)
}

fn build(poses: &Path, detections: &Path, config: &Path, out: &Path) -> Result<(), Error> {
    let cfg = RunConfig::load(config)?;
    let trajectory = io::load_trajectory(poses)?;
    let records = io::load_detection_log(detections)?;
    let (frames, stats) = io::associate(&trajectory, &records, cfg.engine.association_window_s)?;
    let mut state = MapState::new(cfg.intrinsics, cfg.engine);
    let (mut rejected, mut positions) = (0, 0);
    for frame in &frames {
        let r = state.process_frame(frame)?;
        rejected += r.rejected_border + r.rejected_empty;
        positions += r.positions_recorded;
    }
    MapFile::from_state(&state)?.save(out)?;

    println!("frames\t{}", frames.len());
    println!("detections\t{} matched\t{} unmatched\t{rejected} rejected", stats.matched, stats.unmatched);
    println!("positions\t{positions}");
    println!(
        "classes\t{} long-term\t{} short-term\t{} forgotten",
        state.memory.count(MemoryStatus::LongTerm),
        state.memory.count(MemoryStatus::ShortTerm),
        state.memory.count(MemoryStatus::Forgotten)
    );
    println!("class_id\trepresentative\tsightings\tpositions");
    for id in state.long_term_ids() {
        if let Some(class) = state.classes.get(id) {
            let n = state.records.get(&id).map_or(0, |r| r.positions.len());
            println!("{id}\t{}\t{}\t{n}", class.representative(), class.total_count());
        }
    }
    Ok(())
}

/// Returns whether at least one class was distilled without a backend error.
fn distill(map: &Path, backend: &Path) -> Result<bool, Error> {
    let mut state = MapFile::load(map)?.into_state()?;
    let backend = load_backend(backend)?;
    let report = state.distill(&backend)?;
    MapFile::from_state(&state)?.save(map)?;

    println!("Landmark\tIs this a shop?");
    for e in &report.entries {
        let name = e.canonical_name.as_deref().unwrap_or("-");
        println!("{name}\t{}", verdict_flag(e.verdict));
    }
    for (id, err) in &report.failures {
        eprintln!("warning: class {id}: {err}");
    }
    Ok(report.succeeded() > 0)
}

fn query(map: &Path, backend: &Path, interactive: bool, query: Option<&str>) -> Result<(), Error> {
    let state = MapFile::load(map)?.into_state()?;
    if !state.distilled {
        return Err(Error::MapNotDistilled);
    }
    let backend = load_backend(backend)?;
    if !interactive {
        let q = query.ok_or_else(|| Error::Config("a query is required unless --interactive is given".into()))?;
        let (name, pos) = state.navigate(q, &backend)?;
        println!("{name}\t{}", fmt_point(&pos));
        return Ok(());
    }
    for line in std::io::stdin().lock().lines() {
        let line = line.map_err(|e| Error::io(Path::new("<stdin>"), e))?;
        let q = line.trim();
        if q.is_empty() {
            continue;
        }
        match state.navigate(q, &backend) {
            Ok((name, pos)) => println!("{name}\t{}", fmt_point(&pos)),
            Err(e) => eprintln!("error: {e}"),
        }
    }
    Ok(())
}

fn simulate(scenario: &Path, out_dir: &Path) -> Result<(), Error> {
    let sc = Scenario::load(scenario)?;
    let out = render_stream(&sc)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let write = |name: &str, body: String| {
        let p = out_dir.join(name);
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
    };
    write("poses.txt", io::format_trajectory(&out.poses))?;
    write("detections.jsonl", io::format_detection_log(&out.detections))?;
    let mut gt = serde_json::to_string_pretty(&out.ground_truth).expect("ground truth serializes");
    gt.push('\n');
    write("ground_truth.json", gt)?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    println!("frames\t{}", out.poses.len());
    println!("detections\t{}", out.detections.len());
    println!("spurious\t{}", out.ground_truth.spurious_detections);
    Ok(())
}

fn inspect(map: &Path, plot: Option<&Path>) -> Result<(), Error> {
    let file = MapFile::load(map)?;
    println!("class_id\tname\tverdict\tposition\tn_observations");
    for lm in &file.landmarks {
        let name = lm
            .canonical_name
            .clone()
            .or_else(|| lm.member_counts.iter().max_by_key(|(_, c)| **c).map(|(m, _)| m.clone()))
            .unwrap_or_default();
        let verdict = match lm.verdict {
            Verdict::Landmark => "LANDMARK",
            Verdict::NotLandmark => "NOT_LANDMARK",
            Verdict::Unknown => "UNKNOWN",
        };
        let pos = lm.position.as_ref().map_or_else(|| "-".to_owned(), fmt_point);
        println!("{}\t{name}\t{verdict}\t{pos}\t{}", lm.class_id, lm.n_observations);
    }
    if let Some(path) = plot {
        std::fs::write(path, render_map_svg(&file)).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build {
            poses,
            detections,
            config,
            out,
        } => build(poses, detections, config, out),
        Command::Distill { map, backend } => match distill(map, backend) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: every class failed to distill");
                return ExitCode::from(8);
            }
            Err(e) => Err(e),
        },
        Command::Query {
            map,
            backend,
            interactive,
            query: q,
        } => query(map, backend, *interactive, q.as_deref()),
        Command::Simulate { scenario, out_dir } => simulate(scenario, out_dir),
        Command::Inspect { map, plot } => inspect(map, plot.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
