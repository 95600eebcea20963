//! Command-line front end for the Schur sampling toolkit.
//!
//! Every randomized subcommand takes `--seed` and is byte-reproducible for
//! identical arguments. Exit codes: 0 on success, 2 on validation errors,
//! 3 when a size guard rejects the instance (`SCHUR_MAX_DENSE_N` overrides
//! the dense guard).

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use schur_core::bits::BitString;
use schur_core::circuit::{ClassicalMap, PermutationGate, PreparedState, ReversibleCircuit};
use schur_core::error::Error;
use schur_core::estimate::{estimate_marginal, estimate_overlap, EstimationParams};
use schur_core::heavy::{km_search, resolve_heavy_probabilities, KmParams};
use schur_core::seed::{mix, rng_from};
use schur_core::sparse::{build_approx_distribution, sample, SparsityParams, TailSampler};
use schur_core::spin::{DoubledSpin, SpinPath};
use schur_core::state::SchurLabel;
use schur_cli::character::character_demo;
use schur_cli::experiments::{sparsity_scan, ScanParams};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "schur", version, about = "Classical toolkit for Schur sampling circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TailMode {
    Rejection,
    Gnw,
}

/// Input state selection shared by most subcommands: a coupled-basis label
/// plus an optional classical circuit or permutation; extra circuit wires
/// beyond the label become zero-initialized ancillas.
#[derive(Args)]
struct StateArgs {
    /// Yamanouchi symbol of the input path (empty string for one qubit).
    #[arg(long = "in-path", allow_hyphen_values = true, default_value = "")]
    in_path: String,
    /// Doubled azimuthal number 2M of the input.
    #[arg(long = "in-2m", allow_hyphen_values = true)]
    in_2m: i32,
    /// JSON circuit file: {"wires":n,"gates":[{"g":"ccx","c":[1,2],"t":3},…]}.
    #[arg(long)]
    circuit: Option<PathBuf>,
    /// Permutation as cycles "(1,2,3)(4,5)" or one-line "2,3,1,5,4".
    #[arg(long)]
    perm: Option<String>,
}

impl StateArgs {
    fn build(&self) -> Result<PreparedState, Error> {
        let path = SpinPath::parse(&self.in_path)?;
        let label = SchurLabel::new(path, self.in_2m)?;
        let n = label.qubits();
        let map = match (&self.circuit, &self.perm) {
            (Some(_), Some(_)) => {
                return Err(Error::BadParameter("give either --circuit or --perm".into()))
            }
            (Some(file), None) => {
                let text = std::fs::read_to_string(file)
                    .map_err(|e| Error::BadParameter(format!("cannot read {file:?}: {e}")))?;
                let c: ReversibleCircuit = serde_json::from_str(&text)
                    .map_err(|e| Error::BadParameter(format!("bad circuit JSON: {e}")))?;
                ClassicalMap::Circuit(c)
            }
            (None, Some(spec)) => ClassicalMap::Perm(parse_perm(spec, None)?),
            (None, None) => ClassicalMap::Identity(n),
        };
        let wires = map.wires();
        if wires < n {
            return Err(Error::LengthMismatch { want: n, got: wires });
        }
        PreparedState::new(map, label, wires - n)
    }
}

fn parse_perm(spec: &str, wires: Option<usize>) -> Result<PermutationGate, Error> {
    let trimmed = spec.trim();
    if trimmed.starts_with('(') {
        let max_entry = trimmed
            .split(|c: char| !c.is_ascii_digit())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let n = wires.unwrap_or(max_entry).max(max_entry);
        PermutationGate::from_cycles(trimmed, n)
    } else {
        let one_line: Vec<usize> = trimmed
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::BadParameter(format!("bad permutation entry '{t}'")))
            })
            .collect::<Result<_, _>>()?;
        PermutationGate::from_one_line(&one_line)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Amplitude ⟨x| W |J,M⟩ of one computational basis string.
    Amplitude {
        #[command(flatten)]
        state: StateArgs,
        /// Basis bitstring, leftmost character = wire 1.
        #[arg(long)]
        x: String,
    },
    /// Draw basis strings from the output law of W |J,M⟩.
    SampleState {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, default_value_t = 16)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Monte Carlo estimate of ⟨J',M'| W |J,M⟩.
    EstimateOverlap {
        #[command(flatten)]
        state: StateArgs,
        /// Yamanouchi symbol of the bra-side path (defaults to the input).
        #[arg(long = "out-path", allow_hyphen_values = true)]
        out_path: Option<String>,
        /// Doubled azimuthal number of the bra side (defaults to the input).
        #[arg(long = "out-2m", allow_hyphen_values = true)]
        out_2m: Option<i32>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Monte Carlo estimate of the output marginal of a branching prefix.
    EstimateMarginal {
        #[command(flatten)]
        state: StateArgs,
        /// Yamanouchi symbol of the prefix.
        #[arg(long, default_value = "")]
        prefix: String,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Find every output path heavier than θ; resolve per-M probabilities.
    Km {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        /// Accuracy of the per-M resolution (default θ/4).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Per-entry failure of the resolution.
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Build the near-sparse approximation and stream samples from it.
    SparseSample {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        samples: u64,
        #[arg(long, value_enum, default_value_t = TailMode::Rejection)]
        tail_sampler: TailMode,
        #[arg(long)]
        seed: u64,
    },
    /// Exact output distribution over all (path, 2M) pairs (dense oracle).
    ExactDist {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Replicate the near-sparsity survey over random permutation gates.
    SparsityScan {
        /// Qubit range "lo..hi" (inclusive).
        #[arg(long, default_value = "4..10")]
        n: String,
        #[arg(long, default_value_t = 5)]
        paths: usize,
        #[arg(long, default_value_t = 10)]
        perms: usize,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 2.0)]
        d: f64,
        /// Embed per-instance records in the report.
        #[arg(long, default_value_t = false)]
        emit_instances: bool,
        #[arg(long)]
        seed: u64,
    },
    /// Trace of a permutation gate over one total-spin block, with the
    /// exact character cross-check.
    CharacterDemo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        perm: String,
        /// Doubled total spin 2J of the block.
        #[arg(long = "twice-j")]
        twice_j: u32,
    },
}

#[derive(Serialize)]
struct AmplitudeOut {
    x: String,
    path: String,
    twice_m: i32,
    amplitude: f64,
}

#[derive(Serialize)]
struct EstimateOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    prefix: Option<String>,
    epsilon: f64,
    delta: f64,
    estimate: f64,
    samples_used: u64,
}

#[derive(Serialize)]
struct KmReport {
    theta: f64,
    gamma: f64,
    halted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    halted_level: Option<usize>,
    level_widths: Vec<usize>,
    heavy: Vec<schur_core::heavy::HeavyEntry>,
    resolved: Vec<schur_core::heavy::ResolvedEntry>,
}

#[derive(Serialize)]
struct SampleLine<'a> {
    path: &'a str,
    twice_m: i32,
}

fn run(cli: &Cli, out: &mut String) -> Result<(), Error> {
    match &cli.command {
        Command::Amplitude { state, x } => {
            let phi = state.build()?;
            let bits = BitString::parse(x)?;
            let amplitude = phi.amplitude(&bits)?;
            let row = AmplitudeOut {
                x: x.clone(),
                path: state.in_path.clone(),
                twice_m: state.in_2m,
                amplitude,
            };
            writeln!(out, "{}", serde_json::to_string(&row).unwrap()).unwrap();
        }
        Command::SampleState { state, samples, seed } => {
            let phi = state.build()?;
            let mut rng = rng_from(*seed);
            for _ in 0..*samples {
                let x = phi.sample(&mut rng);
                writeln!(out, "{{\"x\":\"{x}\"}}").unwrap();
            }
        }
        Command::EstimateOverlap { state, out_path, out_2m, epsilon, delta, seed } => {
            let phi = state.build()?;
            let bra_path = match out_path {
                Some(p) => SpinPath::parse(p)?,
                None => *phi.label().path(),
            };
            let bra = SchurLabel::new(bra_path, out_2m.unwrap_or(state.in_2m))?;
            if bra.qubits() != phi.wires() {
                return Err(Error::DimensionMismatch(bra.qubits(), phi.wires()));
            }
            let params = EstimationParams::new(*epsilon, *delta, *seed)?;
            let est = estimate_overlap(&bra, &phi, &params)?;
            let row = EstimateOut {
                prefix: None,
                epsilon: *epsilon,
                delta: *delta,
                estimate: est.value,
                samples_used: est.samples_used,
            };
            writeln!(out, "{}", serde_json::to_string(&row).unwrap()).unwrap();
        }
        Command::EstimateMarginal { state, prefix, epsilon, delta, seed } => {
            let phi = state.build()?;
            let prefix = SpinPath::parse(prefix)?;
            let params = EstimationParams::new(*epsilon, *delta, *seed)?;
            let est = estimate_marginal(&prefix, &phi, &params)?;
            let row = EstimateOut {
                prefix: Some(prefix.to_string()),
                epsilon: *epsilon,
                delta: *delta,
                estimate: est.value,
                samples_used: est.samples_used,
            };
            writeln!(out, "{}", serde_json::to_string(&row).unwrap()).unwrap();
        }
        Command::Km { state, theta, gamma, epsilon, delta, seed } => {
            let phi = state.build()?;
            let params = KmParams::new(*theta, *gamma, *seed)?;
            let list = km_search(&phi, &params)?;
            let resolved = resolve_heavy_probabilities(
                &phi,
                &list,
                epsilon.unwrap_or(theta / 4.0),
                *delta,
                mix(*seed, 0x5e01),
            )?;
            let report = KmReport {
                theta: *theta,
                gamma: *gamma,
                halted: list.halted_at.is_some(),
                halted_level: list.halted_at,
                level_widths: list.level_widths.clone(),
                heavy: list.entries.clone(),
                resolved,
            };
            writeln!(out, "{}", serde_json::to_string(&report).unwrap()).unwrap();
        }
        Command::SparseSample { state, epsilon, t, gamma, samples, tail_sampler, seed } => {
            let phi = state.build()?;
            let params = SparsityParams::new(*epsilon, *t, *gamma, *seed)?;
            let dist = build_approx_distribution(&phi, &params)?;
            writeln!(out, "{}", serde_json::to_string(&dist).unwrap()).unwrap();
            let mode = match tail_sampler {
                TailMode::Rejection => TailSampler::Rejection,
                TailMode::Gnw => TailSampler::Gnw,
            };
            let mut rng = rng_from(mix(*seed, 0x5a3f));
            for _ in 0..*samples {
                let (path, m) = sample(&dist, mode, &mut rng)?;
                let line = SampleLine { path: &path.to_string(), twice_m: m.0 };
                writeln!(out, "{}", serde_json::to_string(&line).unwrap()).unwrap();
            }
        }
        Command::ExactDist { state, format } => {
            let phi = state.build()?;
            let dist = phi.output_distribution()?;
            match format {
                Format::Csv => {
                    writeln!(out, "path,twice_m,probability").unwrap();
                    for (label, p) in &dist {
                        writeln!(out, "{},{},{:.16e}", label.path(), label.twice_m(), p)
                            .unwrap();
                    }
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Row {
                        path: String,
                        twice_m: i32,
                        probability: f64,
                    }
                    let rows: Vec<Row> = dist
                        .iter()
                        .map(|(l, p)| Row {
                            path: l.path().to_string(),
                            twice_m: l.twice_m(),
                            probability: *p,
                        })
                        .collect();
                    writeln!(out, "{}", serde_json::to_string(&rows).unwrap()).unwrap();
                }
            }
        }
        Command::SparsityScan { n, paths, perms, c, d, emit_instances, seed } => {
            let (lo, hi) = parse_range(n)?;
            let params = ScanParams {
                n_lo: lo,
                n_hi: hi,
                paths_per_n: *paths,
                perms_per_path: *perms,
                seed: *seed,
                c_coeff: *c,
                d_exponent: *d,
                include_instances: *emit_instances,
            };
            let report = sparsity_scan(&params)?;
            writeln!(out, "{}", serde_json::to_string(&report).unwrap()).unwrap();
        }
        Command::CharacterDemo { n, perm, twice_j } => {
            let gate = parse_perm(perm, Some(*n))?;
            if gate.wires() != *n {
                return Err(Error::LengthMismatch { want: *n, got: gate.wires() });
            }
            let demo = character_demo(*n, &gate, DoubledSpin(*twice_j))?;
            writeln!(out, "{}", serde_json::to_string(&demo).unwrap()).unwrap();
        }
    }
    Ok(())
}

fn parse_range(spec: &str) -> Result<(usize, usize), Error> {
    let parts: Vec<&str> = spec.split("..").collect();
    let bad = || Error::BadParameter(format!("range '{spec}' is not lo..hi"));
    match parts.as_slice() {
        [single] => {
            let v = single.trim().parse().map_err(|_| bad())?;
            Ok((v, v))
        }
        [lo, hi] => {
            let lo = lo.trim().parse().map_err(|_| bad())?;
            let hi = hi.trim().parse().map_err(|_| bad())?;
            Ok((lo, hi))
        }
        _ => Err(bad()),
    }
}

fn main() {
    let cli = Cli::parse();
    let mut rendered = String::new();
    match run(&cli, &mut rendered) {
        Ok(()) => {
            let result = match &cli.out {
                Some(path) => std::fs::write(path, rendered.as_bytes()),
                None => std::io::stdout().write_all(rendered.as_bytes()),
            };
            if let Err(e) = result {
                eprintln!("error: {e}");
                std::process::exit(2);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::TooLarge { .. } => 3,
                _ => 2,
            };
            std::process::exit(code);
        }
    }
}
