use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use covgen::agents::PolicyKind;
use covgen::bridge::{ServeLimits, Server};
use covgen::corpus::{self, compare_design, load_design};
use covgen::env::{EnvConfig, RewardScheme};
use covgen::experiment::{compare, find_max_coverage, maxcov_csv, run_one, trajectory_csv, write_outputs};
use covgen::hdl::ports::parse_port_spec;
use covgen::hdl::{emit_port_spec, extract_ports, parse_design, PortFormat};
use covgen::sim::CoverageType;
use covgen::tbgen::{render_testbench, sv_smoke_check, Template, DEFAULT_TEMPLATE};

#[derive(Parser)]
#[command(name = "covgen", version, about = "Coverage-directed stimulus generation for RTL designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode of the configured policy and report coverage.
    Run {
        /// Env config file, or the name of a built-in design.
        #[arg(long)]
        config: String,
        /// Write the trajectory CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare random stimulus with every learning policy and reward scheme.
    Compare {
        /// Env config files or built-in design names.
        #[arg(long, num_args = 1.., required = true)]
        designs: Vec<String>,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Override every design's step budget.
        #[arg(long)]
        max_steps: Option<u64>,
        /// Cycles per probe when a maximum has to be measured.
        #[arg(long, default_value_t = 5000)]
        budget: u64,
    },
    /// Estimate the reachable coverage maximum of a design.
    Maxcov {
        /// Env config file or built-in design name.
        #[arg(long)]
        design: String,
        #[arg(long, default_value_t = 5000)]
        budget: u64,
        /// Random probes run alongside any exhaustive sweep.
        #[arg(long, default_value_t = 8)]
        probes: u64,
        /// Coverage type, overriding the config's.
        #[arg(long)]
        coverage: Option<CoverageType>,
    },
    /// Serve stimulus to an external simulator over TCP.
    Serve {
        #[arg(long, default_value_t = 5555)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Env config file or built-in design name.
        #[arg(long)]
        config: String,
        /// Exit after this many sessions.
        #[arg(long)]
        sessions: Option<usize>,
        /// Per-read timeout in seconds.
        #[arg(long)]
        timeout: Option<u64>,
        /// Directory for session transcripts.
        #[arg(long)]
        transcripts: Option<PathBuf>,
    },
    /// Extract a port specification from Verilog.
    Parse {
        #[arg(long = "in")]
        input: PathBuf,
        /// `.json` selects JSON, anything else XML. Stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a SystemVerilog testbench from a port specification.
    Tbgen {
        /// Port spec (XML or JSON), or a Verilog source.
        #[arg(long)]
        ports: PathBuf,
        #[arg(long)]
        template: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run { config, out } => run(&config, out.as_deref()),
        Command::Compare {
            designs,
            seeds,
            out,
            max_steps,
            budget,
        } => run_compare(&designs, seeds, &out, max_steps, budget),
        Command::Maxcov {
            design,
            budget,
            probes,
            coverage,
        } => {
            let (mut cfg, base) = load_config(&design)?;
            if let Some(c) = coverage {
                cfg.coverage_type = c;
            }
            let ir = load_design(&cfg, &base)?;
            let m = find_max_coverage(&ir, &cfg, budget, probes)?;
            print!("{}", maxcov_csv([&m]));
            Ok(())
        }
        Command::Serve {
            port,
            host,
            config,
            sessions,
            timeout,
            transcripts,
        } => {
            let (cfg, base) = load_config(&config)?;
            let ports = extract_ports(&load_design(&cfg, &base)?);
            let server = Server::bind((host.as_str(), port), cfg, ports)?;
            log::info!("listening on {}", server.local_addr()?);
            let limits = ServeLimits {
                max_sessions: sessions,
                read_timeout: timeout.map(Duration::from_secs),
                transcript_dir: transcripts,
            };
            for (n, end) in server.serve(&limits)?.iter().enumerate() {
                println!("session {n}: {end:?}");
            }
            Ok(())
        }
        Command::Parse { input, out } => {
            let src = std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let ports = extract_ports(&parse_design(&src)?);
            let format = out.as_deref().map_or(PortFormat::Xml, PortFormat::from_path);
            emit(out.as_deref(), &emit_port_spec(&ports, format))
        }
        Command::Tbgen { ports, template, out } => {
            let text = std::fs::read_to_string(&ports).with_context(|| format!("reading {}", ports.display()))?;
            let spec = match ports.extension().and_then(|e| e.to_str()) {
                Some("v") | Some("sv") => extract_ports(&parse_design(&text)?),
                _ => parse_port_spec(&text)?,
            };
            let tpl = match &template {
                Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                None => DEFAULT_TEMPLATE.to_string(),
            };
            let sv = render_testbench(&spec, &Template::parse(&tpl)?)?;
            for problem in sv_smoke_check(&sv) {
                log::warn!("generated testbench: {problem}");
            }
            emit(out.as_deref(), &sv)
        }
    }
}

/// A config file path, or the name of a built-in design with its shipped
/// config. Also returns the directory relative sources resolve against.
fn load_config(arg: &str) -> Result<(EnvConfig, PathBuf)> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let cfg = EnvConfig::parse(&text).with_context(|| format!("in {arg}"))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok((cfg, base));
    }
    match corpus::entry(arg) {
        Ok(e) => Ok((e.env_config()?, PathBuf::from("."))),
        Err(_) => bail!("`{arg}` is neither a config file nor a built-in design"),
    }
}

fn run(config: &str, out: Option<&Path>) -> Result<()> {
    let (cfg, base) = load_config(config)?;
    let d = compare_design(&cfg, &base, 5000, 8)?;
    let r = run_one(&d.ir, &cfg, d.max.max)?;
    println!("design       {}", r.design);
    println!("policy       {} ({})", r.policy, r.scheme_label());
    println!("seed         {}", r.seed);
    println!("maximum      {}%", d.max.max.percent_string(2));
    println!("final        {}%", r.episode.final_score().percent_string(2));
    match r.stimuli_to_max {
        Some(n) => println!("stimuli      {n}"),
        None => println!("stimuli      >{} (maximum not reached)", r.max_steps),
    }
    println!("updates      {}", r.episode.updates);
    println!("wall time    {:.2?}", r.wall_time);
    if let Some(path) = out {
        std::fs::write(path, trajectory_csv(&r)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn run_compare(designs: &[String], seeds: u64, out: &Path, max_steps: Option<u64>, budget: u64) -> Result<()> {
    let mut inputs = Vec::new();
    for d in designs {
        let (mut cfg, base) = load_config(d)?;
        if let Some(m) = max_steps {
            cfg.max_steps = m;
        }
        inputs.push(compare_design(&cfg, &base, budget, 8)?);
    }
    let mut combos = Vec::new();
    for p in PolicyKind::LEARNING {
        for s in [RewardScheme::Optimistic, RewardScheme::Penalty] {
            combos.push((p, s));
        }
    }
    let report = compare(&inputs, &combos, seeds)?;
    let files = write_outputs(&report, out)?;
    print!("{}", report.summary_csv());
    log::info!("wrote {} files to {}", files.len(), out.display());
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
