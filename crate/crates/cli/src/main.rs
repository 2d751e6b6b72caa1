use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qiseg::{
    build_pipeline, neqr, qasm, run_tracked, sample_shots, CostReport, Histogram, ImageGray, RegisterLayout,
    ThresholdConfig,
};

#[derive(Parser)]
#[command(name = "qiseg", version, about = "Quantum threshold segmentation of NEQR images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment a plain PGM image with one or more thresholds.
    Segment(SegmentArgs),
    /// Print the cost report for a given gray depth as JSON.
    Cost {
        /// Gray bit depth.
        #[arg(long)]
        q: usize,
        /// Number of evenly spaced thresholds.
        #[arg(long, default_value_t = 2)]
        thresholds: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Backend {
    Tracked,
    Statevector,
}

#[derive(clap::Args)]
struct SegmentArgs {
    /// Input image (plain P2 PGM, square, power-of-two side).
    #[arg(long)]
    input: PathBuf,
    /// Thresholds, ascending; decimal or 0b-prefixed binary.
    #[arg(long = "t", value_delimiter = ',', value_parser = parse_value,
          required_unless_present_all = ["t_low", "t_high"], conflicts_with_all = ["t_low", "t_high"])]
    thresholds: Vec<u32>,
    /// Low threshold (two-threshold shorthand).
    #[arg(long, value_parser = parse_value, requires = "t_high")]
    t_low: Option<u32>,
    /// High threshold (two-threshold shorthand).
    #[arg(long, value_parser = parse_value, requires = "t_low")]
    t_high: Option<u32>,
    /// Output levels g1..g(n+1).
    #[arg(long, value_delimiter = ',', value_parser = parse_value)]
    levels: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value_t = Backend::Tracked)]
    backend: Backend,
    /// Shots for the statevector backend.
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Segmented image output (P2 PGM).
    #[arg(long)]
    out: PathBuf,
    /// Shot histogram CSV (statevector backend only).
    #[arg(long)]
    histogram: Option<PathBuf>,
    /// Cost report JSON.
    #[arg(long)]
    cost_report: Option<PathBuf>,
    /// OpenQASM 2.0 export of the full circuit.
    #[arg(long)]
    export_qasm: Option<PathBuf>,
}

fn parse_value(s: &str) -> Result<u32, String> {
    let parsed = match s.strip_prefix("0b").or_else(|| s.strip_prefix("0B")) {
        Some(bits) => u32::from_str_radix(bits, 2),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("`{s}` is not a decimal or 0b-binary value: {e}"))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Per-position majority color over the shots. Positions with more than one
/// observed color are returned separately.
fn majority_image(hist: &Histogram, layout: &RegisterLayout) -> Result<(ImageGray, Vec<u64>)> {
    let pos_bits = layout.position().len();
    let mut votes: Vec<Vec<(u64, u64)>> = vec![Vec::new(); 1 << pos_bits];
    for r in &hist.records {
        let position = r.bitstring & ((1 << pos_bits) - 1);
        let color = r.bitstring >> pos_bits;
        votes[position as usize].push((color, r.count));
    }
    let mut mixed = Vec::new();
    let mut pixels = Vec::with_capacity(votes.len());
    for (position, v) in votes.iter().enumerate() {
        // Highest count wins; ties go to the smaller color.
        let Some(&(color, _)) = v.iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))) else {
            bail!("position {position} was never observed in {} shots; increase --shots", hist.shots);
        };
        if v.len() > 1 {
            mixed.push(position as u64);
        }
        pixels.push(color as u32);
    }
    Ok((ImageGray::new(layout.n(), layout.q(), pixels)?, mixed))
}

fn segment(args: &SegmentArgs) -> Result<()> {
    let bytes = fs::read(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let image = ImageGray::read_pgm(&bytes).with_context(|| format!("parsing {}", args.input.display()))?;
    let thresholds = match (args.t_low, args.t_high) {
        (Some(low), Some(high)) => vec![low, high],
        _ => args.thresholds.clone(),
    };
    let config = ThresholdConfig::new(image.q(), thresholds, args.levels.clone())?;
    if args.backend == Backend::Statevector && args.shots == 0 {
        bail!("--shots must be at least 1");
    }
    if args.histogram.is_some() && args.backend != Backend::Statevector {
        bail!("--histogram requires --backend statevector");
    }

    let circuit = build_pipeline(&image, &config)?;
    let layout = circuit.layout().expect("pipeline carries its layout");

    let segmented = match args.backend {
        Backend::Tracked => {
            let map = run_tracked(&circuit)?;
            map.assert_no_collision()?;
            neqr::decode(&map, layout)?
        }
        Backend::Statevector => {
            let hist = sample_shots(&circuit, args.shots, args.seed)?;
            if let Some(path) = &args.histogram {
                write(path, hist.to_csv())?;
            }
            let (image, mixed) = majority_image(&hist, layout)?;
            if !mixed.is_empty() {
                let list: Vec<String> = mixed.iter().map(|p| format!("{p:0w$b}", w = layout.position().len())).collect();
                eprintln!("warning: color not unanimous at positions {}", list.join(", "));
            }
            image
        }
    };
    write(&args.out, segmented.write_pgm())?;

    if let Some(path) = &args.cost_report {
        write(path, CostReport::for_circuit(&circuit, &config)?.to_json())?;
    }
    if let Some(path) = &args.export_qasm {
        write(path, qasm::export(&circuit)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Segment(args) => segment(&args),
        Command::Cost { q, thresholds } => {
            print!("{}", CostReport::for_depth(q, thresholds)?.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
