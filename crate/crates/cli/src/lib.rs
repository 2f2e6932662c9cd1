//! Front end: reads process specs, runs analyses and sweeps, writes JSON
//! reports and CSV tables.

pub mod document;
pub mod report;

use agent_thermo::case_studies::{self, BrownianRingParams, CaseStudyError, ResetClockParams};
use agent_thermo::quantum_encoding::{self, GramEncoding, Provenance, QuantumError};
use agent_thermo::thermo::{self, ThermoError};
use agent_thermo::transducer::{self, TransducerError, DEFAULT_BUDGET};
use clap::{Parser, Subcommand, ValueEnum};
use document::{read_spec, LoadedSpec};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Depth of the interrogation oracle printed by `detect`.
pub const DETECT_DEPTH: usize = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("{0}")]
    Capacity(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Analysis(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Spec(_) => 3,
            CliError::Capacity(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

impl From<TransducerError> for CliError {
    fn from(e: TransducerError) -> Self {
        match e {
            TransducerError::Budget { .. } => CliError::Capacity(e.to_string()),
            TransducerError::Invalid(_) => CliError::Spec(e.to_string()),
            other => CliError::Analysis(other.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::Transducer(t) => t.into(),
            QuantumError::Budget { .. } => CliError::Capacity(e.to_string()),
            other => CliError::Analysis(other.to_string()),
        }
    }
}

impl From<ThermoError> for CliError {
    fn from(e: ThermoError) -> Self {
        match e {
            ThermoError::Transducer(t) => t.into(),
            ThermoError::Quantum(q) => q.into(),
            other => CliError::Analysis(other.to_string()),
        }
    }
}

impl From<CaseStudyError> for CliError {
    fn from(e: CaseStudyError) -> Self {
        match e {
            CaseStudyError::Domain(msg) => CliError::Usage(msg),
            CaseStudyError::Transducer(t) => t.into(),
            other => CliError::Analysis(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "agent-thermo", version, about = "Work cost of classical and quantum agent memories")]
pub struct Cli {
    /// Cap on (|X||Y|)^L · states for exact enumeration.
    #[arg(long, global = true, env = "AGENT_THERMO_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize the machine and write a JSON work-cost report.
    Analyze {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// kT in joules; adds physical energies to the report.
        #[arg(long = "kT")]
        kt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a case study as CSV.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        /// Ring sizes, comma separated (brownian).
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        gamma0: Option<f64>,
        #[arg(long)]
        gamma1: Option<f64>,
        #[arg(long)]
        gammax: Option<f64>,
        /// Time steps, comma separated (clock).
        #[arg(long, value_delimiter = ',')]
        dt: Vec<f64>,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List causally wasteful state pairs.
    Detect {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded trajectory as CSV.
    Simulate {
        spec: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the minimal equivalent spec.
    Minimize {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Brownian,
    Clock,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let budget = cli.budget;
    match cli.command {
        Command::Analyze { spec, stride, kt, out } => {
            let loaded = read_spec(&spec)?;
            let doc = analyze(&loaded, &spec, stride, kt, budget)?;
            write_output(out.as_deref(), report::to_json(&doc).as_bytes())
        }
        Command::Sweep { kind, n, sigma, p, gamma0, gamma1, gammax, dt, tau, truncation, out } => {
            let clock_flags = p.is_some()
                || gamma0.is_some()
                || gamma1.is_some()
                || gammax.is_some()
                || !dt.is_empty()
                || tau.is_some()
                || truncation.is_some();
            let csv = match kind {
                SweepKind::Brownian => {
                    if clock_flags {
                        return Err(CliError::Usage(
                            "brownian sweep takes only --n and --sigma".into(),
                        ));
                    }
                    let ns = if n.is_empty() { (3..=10).map(|k| 1usize << k).collect() } else { n };
                    let sigma = sigma.unwrap_or(0.01);
                    for &n in &ns {
                        BrownianRingParams::new(n, sigma)?;
                    }
                    report::brownian_csv(&case_studies::brownian_sweep(sigma, &ns)?)
                }
                SweepKind::Clock => {
                    if !n.is_empty() || sigma.is_some() {
                        return Err(CliError::Usage("clock sweep does not take --n or --sigma".into()));
                    }
                    let d = ResetClockParams::default();
                    let base = ResetClockParams {
                        p: p.unwrap_or(d.p),
                        gamma0: gamma0.unwrap_or(d.gamma0),
                        gamma1: gamma1.unwrap_or(d.gamma1),
                        gammax: gammax.unwrap_or(d.gammax),
                        tau: tau.unwrap_or(d.tau),
                        truncation,
                        ..d
                    };
                    let dts = if dt.is_empty() { vec![0.1, 0.05, 0.025, 0.0125, 0.00625] } else { dt };
                    report::clock_csv(&case_studies::clock_sweep(base, &dts)?)
                }
            };
            write_output(out.as_deref(), csv.as_bytes())
        }
        Command::Detect { spec, stride, out } => {
            let loaded = read_spec(&spec)?;
            write_output(out.as_deref(), detect(&loaded, stride, budget)?.as_bytes())
        }
        Command::Simulate { spec, steps, seed, out } => {
            let loaded = read_spec(&spec)?;
            let run = transducer::simulate(&loaded.machine, &loaded.input, steps, seed)?;
            write_output(out.as_deref(), report::trajectory_csv(&loaded, &run).as_bytes())
        }
        Command::Minimize { spec, out } => {
            let loaded = read_spec(&spec)?;
            let (min, names) = minimized(&loaded);
            if loaded.gram.is_some() && min.states() != loaded.machine.states() {
                eprintln!("note: dropping the encoding; it addresses states that were merged");
            }
            let mut doc = document::document_for(
                &min,
                names,
                &loaded.document.inputs,
                &loaded.document.outputs,
                &loaded.document.input_distribution,
            );
            if min.states() == loaded.machine.states() {
                doc.encoding = loaded.document.encoding.clone();
            }
            let text = serde_json::to_string_pretty(&doc).expect("document serializes") + "\n";
            write_output(out.as_deref(), text.as_bytes())
        }
    }
}

/// Minimal machine with each causal state named after its first member.
pub fn minimized(loaded: &LoadedSpec) -> (transducer::Transducer, Vec<String>) {
    let m = transducer::minimize(&loaded.machine);
    let mut names = vec![String::new(); m.machine.states()];
    for (s, &c) in m.state_map.iter().enumerate().rev() {
        names[c] = loaded.state_name(s).to_string();
    }
    (m.machine, names)
}

/// Loaded spec reduced to its causal states, renamed accordingly.
fn minimal_spec(loaded: &LoadedSpec) -> Result<(LoadedSpec, Vec<usize>), CliError> {
    let m = transducer::minimize(&loaded.machine);
    if m.machine.states() == loaded.machine.states() {
        return Ok((loaded.clone(), m.state_map));
    }
    if loaded.gram.is_some() {
        return Err(CliError::Spec(format!(
            "the encoding addresses {} states but the machine has {} causal states; run `minimize` and \
             supply a Gram table for the minimal machine",
            loaded.machine.states(),
            m.machine.states()
        )));
    }
    let (machine, names) = minimized(loaded);
    let mut document = document::document_for(
        &machine,
        names,
        &loaded.document.inputs,
        &loaded.document.outputs,
        &loaded.document.input_distribution,
    );
    document.encoding = None;
    Ok((LoadedSpec { document, machine, input: loaded.input.clone(), gram: None }, m.state_map))
}

pub fn analyze(
    loaded: &LoadedSpec,
    path: &Path,
    stride: usize,
    kt: Option<f64>,
    budget: u64,
) -> Result<serde_json::Value, CliError> {
    if stride == 0 {
        return Err(CliError::Usage("--stride must be at least 1".into()));
    }
    if let Some(kt) = kt {
        if !(kt > 0.0 && kt.is_finite()) {
            return Err(CliError::Usage(format!("--kT must be positive, got {kt}")));
        }
    }
    let (min, state_map) = minimal_spec(loaded)?;
    transducer::check_budget(&min.machine, stride, budget)?;
    let extra: Vec<(String, GramEncoding)> = min
        .gram
        .iter()
        .map(|g| ("supplied".to_string(), GramEncoding::new(g.clone(), Provenance::UserSupplied)))
        .collect();
    let r = thermo::analyze(&min.machine, &min.input, stride, &extra, budget, kt)?;
    let systematic = quantum_encoding::systematic_encoding(&min.machine)?;
    Ok(report::analysis_document(loaded, &min, &state_map, path, budget, &r, &systematic))
}

pub fn detect(loaded: &LoadedSpec, stride: usize, budget: u64) -> Result<String, CliError> {
    let (min, _) = minimal_spec(loaded)?;
    let t = &min.machine;
    let d = quantum_encoding::distinguishability(t)?;
    let g = quantum_encoding::solve_overlaps(t)?.gram();
    let v = quantum_encoding::interrogation_table(t, DETECT_DEPTH, budget)?;
    let mut out = String::new();
    if min.machine.states() != loaded.machine.states() {
        out.push_str(&format!(
            "# minimized {} states to {} causal states\n",
            loaded.machine.states(),
            t.states()
        ));
    }
    let pairs = d.wasteful_pairs();
    if pairs.is_empty() {
        out.push_str("wasteful pairs: none\n");
    } else {
        out.push_str(&format!("wasteful pairs: {}\n", pairs.len()));
        out.push_str(&format!("state_a,state_b,gram,oracle_depth_{DETECT_DEPTH}\n"));
        for (i, j) in pairs {
            out.push_str(&format!(
                "{},{},{},{}\n",
                min.state_name(i),
                min.state_name(j),
                report::fmt_num(g[(i, j)]),
                report::fmt_num(v[(i, j)])
            ));
        }
    }
    let verdict = thermo::advantage_predicate(t, &min.input, stride, budget)?;
    match verdict.witness {
        Some(w) => {
            let word: Vec<String> = w.word.iter().map(|&z| min.symbol_name(z)).collect();
            out.push_str(&format!(
                "advantage at stride {stride}: yes (state {} of pair {}/{} shifts by {} after {})\n",
                min.state_name(w.state),
                min.state_name(w.pair.0),
                min.state_name(w.pair.1),
                report::fmt_num(w.shift),
                word.join(" ")
            ));
        }
        None => out.push_str(&format!("advantage at stride {stride}: no\n")),
    }
    Ok(out)
}

pub fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes).and_then(|_| stdout.flush()).map_err(|e| CliError::Io(e.to_string()))
        }
    }
}
