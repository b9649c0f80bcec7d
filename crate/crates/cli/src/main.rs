use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use polytrack::geometry::Polygon;
use polytrack::io::{
    format_results, ground_truth_records, load_pipeline_config, load_scenario, parse_detections, parse_results,
    read_pgm, records_to_sequence, render_svg, write_atomic, write_detections, write_results, ResultRecord,
};
use polytrack::metrics::evaluate;
use polytrack::simulator::{generate, perturb};
use polytrack::tracker::run_sequence;
use polytrack::{Error, Result};

/// Detection noise draws from a stream separate from the scenario layout.
const NOISE_STREAM: u64 = 0x006e_6f69_7365;

#[derive(Parser)]
#[command(
    name = "polytrack",
    version,
    about = "Polygon-based multi-object tracking and segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground truth and noisy detections from a scenario file.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Replaces the seed given in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Detection file to write.
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth results file to write.
        #[arg(long)]
        gt: PathBuf,
    },
    /// Track a detection file and write KITTI-MOTS result lines.
    Track {
        #[arg(long)]
        dets: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Keep frozen tracks at their last detected position.
        #[arg(long)]
        no_ukf: bool,
        /// Image width, when the detection file does not record it.
        #[arg(long)]
        width: Option<usize>,
        /// Image height, when the detection file does not record it.
        #[arg(long)]
        height: Option<usize>,
    },
    /// Score a results file against ground truth.
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        results: PathBuf,
        /// Aligned-text report.
        #[arg(long)]
        report: PathBuf,
        /// Key-value report; defaults to the report path with a `.kv`
        /// extension.
        #[arg(long)]
        kv: Option<PathBuf>,
    },
    /// Fit polygons to every PGM mask in a directory.
    Polygonize {
        #[arg(long)]
        mask_dir: PathBuf,
        #[arg(long, default_value_t = 32)]
        vertices: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw one frame of a results file as SVG.
    Render {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        frame: u64,
        #[arg(long)]
        out: PathBuf,
        /// Detection file whose offsets are drawn as arrows.
        #[arg(long)]
        dets: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            scenario,
            seed,
            out,
            gt,
        } => simulate(&scenario, seed, &out, &gt),
        Command::Track {
            dets,
            config,
            out,
            no_ukf,
            width,
            height,
        } => track(&dets, config.as_deref(), &out, no_ukf, width.zip(height)),
        Command::Evaluate {
            gt,
            results,
            report,
            kv,
        } => {
            let kv = kv.unwrap_or_else(|| report.with_extension("kv"));
            evaluate_files(&gt, &results, &report, &kv)
        }
        Command::Polygonize {
            mask_dir,
            vertices,
            out,
        } => polygonize(&mask_dir, vertices, &out),
        Command::Render {
            results,
            frame,
            out,
            dets,
        } => render(&results, frame, &out, dets.as_deref()),
    }
}

fn simulate(scenario: &Path, seed: Option<u64>, out: &Path, gt_path: &Path) -> Result<()> {
    let (sc, noise) = load_scenario(scenario, seed)?;
    let gt = generate(&sc)?;
    let dets = perturb(&gt, &noise, sc.seed ^ NOISE_STREAM)?;
    write_detections(&dets, Some((sc.width, sc.height)), out)?;
    write_atomic(gt_path, format_results(&ground_truth_records(&gt)?).as_bytes())
}

fn track(dets: &Path, config: Option<&Path>, out: &Path, no_ukf: bool, size: Option<(usize, usize)>) -> Result<()> {
    let mut cfg = match config {
        Some(p) => load_pipeline_config(p)?.tracker,
        None => Default::default(),
    };
    if no_ukf {
        cfg.use_ukf = false;
    }
    let file = parse_detections(dets)?;
    let (width, height) = size
        .or(file.image_size)
        .ok_or_else(|| Error::InvalidInput("image size unknown: pass --width and --height".to_string()))?;
    let tracks = run_sequence(&file.frames, &cfg)?;
    write_results(&tracks, width, height, out)
}

fn evaluate_files(gt: &Path, results: &Path, report: &Path, kv: &Path) -> Result<()> {
    let gt_records = parse_results(gt)?;
    let hyp_records = parse_results(results)?;
    let size = |r: &[ResultRecord]| r.first().map(|r| (r.width, r.height));
    let fallback = size(&gt_records).or(size(&hyp_records));
    let gt_seq = records_to_sequence(&gt_records, fallback)?;
    let hyp_seq = records_to_sequence(&hyp_records, fallback)?;

    let overall = evaluate(&gt_seq, &hyp_seq)?;
    let mut text = overall.to_aligned_text("all");
    let mut kv_text = overall.to_key_values("");
    let mut classes = gt_seq.classes();
    classes.extend(hyp_seq.classes());
    classes.sort_unstable();
    classes.dedup();
    for class in classes {
        let r = evaluate(&gt_seq.filter_class(class), &hyp_seq.filter_class(class))?;
        let table = r.to_aligned_text(&format!("class {class}"));
        // Only the data row; the header is already printed.
        let _ = write!(text, "{}", table.lines().nth(1).unwrap_or_default());
        text.push('\n');
        kv_text.push_str(&r.to_key_values(&format!("class{class}.")));
    }
    write_atomic(report, text.as_bytes())?;
    write_atomic(kv, kv_text.as_bytes())
}

fn polygonize(dir: &Path, vertices: usize, out: &Path) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        let p = entry.path();
        if p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")) {
            paths.push(p);
        }
    }
    paths.sort();
    let mut text = String::from("# file cx cy x1 y1 ... xn yn\n");
    for p in paths {
        let name = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
        let mask = read_pgm(&p).map_err(|e| match e {
            Error::Parse { line, msg } => Error::Parse {
                line,
                msg: format!("{name}: {msg}"),
            },
            other => other,
        })?;
        if mask.is_empty() {
            let _ = writeln!(text, "# {name}: empty mask");
            continue;
        }
        let poly: Polygon<f64> = mask.polygonize(vertices)?;
        let c = poly.centroid();
        let _ = write!(text, "{name} {} {}", c.x, c.y);
        for v in poly.vertices() {
            let _ = write!(text, " {} {}", v.x, v.y);
        }
        text.push('\n');
    }
    write_atomic(out, text.as_bytes())
}

fn render(results: &Path, frame: u64, out: &Path, dets: Option<&Path>) -> Result<()> {
    let records = parse_results(results)?;
    let detections = match dets {
        Some(p) => Some(parse_detections(p)?),
        None => None,
    };
    let frame_dets = detections
        .as_ref()
        .and_then(|f| f.frames.get(frame as usize))
        .map(|d| d.as_slice());
    let svg = render_svg(&records, frame, frame_dets)?;
    write_atomic(out, svg.as_bytes())
}
