use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maskverif::json::export_structural_json;
use maskverif::pipeline::{run_monolithic, run_statewise, ModelSel, PipelineError, RunOpts};
use maskverif::report::{emit_json, emit_text};
use maskverif::text::{dump_labels, dump_netlist, parse_labels, parse_netlist};
use maskverif_core::circuit::Circuit;
use maskverif_core::label::{Labeling, Model, DEFAULT_SET_CAP};
use maskverif_core::oracle::{oracle_stable, oracle_transient};
use maskverif_core::{generate, split_all};

#[derive(Parser)]
#[command(
    name = "maskverif",
    about = "First-order probing security checker for masked gate-level netlists"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Statewise,
    Monolithic,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Stable,
    Transient,
    Both,
}

impl ModelArg {
    fn sel(self) -> ModelSel {
        match self {
            ModelArg::Stable => ModelSel::Stable,
            ModelArg::Transient => ModelSel::Transient,
            ModelArg::Both => ModelSel::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FlawArg {
    Reassoc,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a labeled netlist for first-order leaks.
    Verify {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "both")]
        model: ModelArg,
        #[arg(long, default_value_t = 1)]
        order: u8,
        /// Run the exhaustive-simulation oracle next to the checker.
        #[arg(long)]
        oracle: bool,
        /// Write the JSON report here ("-" for stdout).
        #[arg(long, value_name = "OUT")]
        json: Option<PathBuf>,
        /// Write each per-state sub-design netlist and label file here.
        #[arg(long, value_name = "DIR")]
        dump_states: Option<PathBuf>,
        /// Record wall time per verification in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Exhaustively simulate a labeled netlist and report leaking nets.
    Oracle {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        model: ModelArg,
    },
    /// Emit a built-in benchmark as netlist, label, and JSON files.
    Gen {
        #[arg(long)]
        bench: String,
        #[arg(long, value_enum)]
        flaw: Option<FlawArg>,
        /// Override the FSM state count for benchmarks with a variant.
        #[arg(long)]
        states: Option<usize>,
        #[arg(short, value_name = "DIR")]
        o: PathBuf,
    },
    /// List the built-in benchmarks.
    ListBenches,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    msg: String,
    code: u8,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { msg: msg.into(), code: 2 }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError { msg: e.to_string(), code: e.exit_code() as u8 }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load(netlist: &Path, labels: &Path) -> Result<(Circuit, Labeling), CliError> {
    let c = parse_netlist(&read(netlist)?)
        .map_err(|e| usage(format!("{}: {e}", netlist.display())))?;
    let l = parse_labels(&read(labels)?, &c)
        .map_err(|e| usage(format!("{}: {e}", labels.display())))?;
    Ok((c, l))
}

fn cap_from_env() -> Result<usize, CliError> {
    match std::env::var("MASKVERIF_CAP") {
        Ok(s) => s
            .parse()
            .map_err(|_| usage(format!("MASKVERIF_CAP: `{s}` is not a count"))),
        Err(_) => Ok(DEFAULT_SET_CAP),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Cmd::Verify {
            netlist,
            labels,
            mode,
            model,
            order,
            oracle,
            json,
            dump_states,
            timings,
        } => {
            if order != 1 && order != 2 {
                return Err(usage("supported attack orders: 1, 2"));
            }
            let (c, l) = load(&netlist, &labels)?;
            let opts = RunOpts {
                models: model.sel(),
                order,
                cap: cap_from_env()?,
                timings,
                oracle,
            };
            if let Some(dir) = &dump_states {
                let stem = netlist
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "design".to_string());
                dump_state_files(&c, &l, dir, &stem)?;
            }
            let report = match mode {
                ModeArg::Statewise => run_statewise(&c, &l, &opts)?,
                ModeArg::Monolithic => run_monolithic(&c, &l, &opts)?,
            };
            match &json {
                Some(p) if p.as_os_str() == "-" => print!("{}", emit_json(&report)),
                Some(p) => {
                    fs::write(p, emit_json(&report))
                        .map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    print!("{}", emit_text(&report));
                }
                None => print!("{}", emit_text(&report)),
            }
            Ok(if report.secure() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Oracle { netlist, labels, model } => {
            let (c, l) = load(&netlist, &labels)?;
            let models: &[Model] = match model {
                ModelArg::Stable => &[Model::Stable],
                ModelArg::Transient => &[Model::Transient],
                ModelArg::Both => &[Model::Stable, Model::Transient],
            };
            let mut any_insecure = false;
            let mut check = |name: &str, c: &Circuit, l: &Labeling| -> Result<(), CliError> {
                for &m in models {
                    let rep = match m {
                        Model::Stable => oracle_stable(c, l),
                        Model::Transient => oracle_transient(c, l),
                    }
                    .map_err(PipelineError::Oracle)?;
                    if rep.secure() {
                        println!("{name} ({}): secure", m.name());
                    } else {
                        any_insecure = true;
                        let nets: Vec<&str> =
                            rep.insecure.iter().map(|&n| c.name(n)).collect();
                        println!("{name} ({}): insecure: {}", m.name(), nets.join(", "));
                    }
                }
                Ok(())
            };
            if c.fsm().is_some() {
                let subs = split_all(&c, &l).map_err(PipelineError::Circuit)?;
                for sub in &subs {
                    check(&sub.state, &sub.circuit, &sub.labeling)?;
                }
            } else {
                check("design", &c, &l)?;
            }
            Ok(if any_insecure { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Cmd::Gen { bench, flaw, states, o } => {
            let (c, l) = generate(&bench, flaw.is_some(), states)
                .map_err(|e| usage(e.to_string()))?;
            fs::create_dir_all(&o).map_err(|e| usage(format!("{}: {e}", o.display())))?;
            let base = if flaw.is_some() { format!("{bench}-flawed") } else { bench };
            let write = |ext: &str, data: String| -> Result<(), CliError> {
                let path = o.join(format!("{base}.{ext}"));
                fs::write(&path, data).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                println!("wrote {}", path.display());
                Ok(())
            };
            write("net", dump_netlist(&c))?;
            write("lbl", dump_labels(&l, &c))?;
            write("json", export_structural_json(&c))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::ListBenches => {
            for spec in maskverif_core::list() {
                let states = if spec.states == 0 {
                    "comb".to_string()
                } else {
                    match spec.alt_states {
                        Some(alt) => format!("{} states (alt {alt})", spec.states),
                        None => format!("{} states", spec.states),
                    }
                };
                let flaw = if spec.supports_flaw { "  [--flaw reassoc]" } else { "" };
                println!("{:<16} {:<18} {}{flaw}", spec.name, states, spec.summary);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn dump_state_files(
    c: &Circuit,
    l: &Labeling,
    dir: &Path,
    stem: &str,
) -> Result<(), CliError> {
    if c.fsm().is_none() {
        return Err(usage("--dump-states needs a netlist with an fsm block"));
    }
    let subs = split_all(c, l).map_err(PipelineError::Circuit)?;
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    for sub in &subs {
        let net = dir.join(format!("{stem}.state{}.net", sub.state_index));
        let lbl = dir.join(format!("{stem}.state{}.lbl", sub.state_index));
        fs::write(&net, dump_netlist(&sub.circuit))
            .map_err(|e| usage(format!("{}: {e}", net.display())))?;
        fs::write(&lbl, dump_labels(&sub.labeling, &sub.circuit))
            .map_err(|e| usage(format!("{}: {e}", lbl.display())))?;
    }
    Ok(())
}
