use std::net::TcpListener;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::Parser;
use log::info;
use rfq_core::builder::NodeScenario;
use rfq_core::rpc::{self, ServeOptions};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Transport {
    Stdio,
    Tcp(u16),
}

impl FromStr for Transport {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            None if s == "stdio" => Ok(Transport::Stdio),
            Some(("tcp", port)) => port.parse().map(Transport::Tcp).map_err(|e| format!("bad port {port:?}: {e}")),
            _ => Err(format!("expected stdio or tcp:<port>, got {s:?}")),
        }
    }
}

/// Runs a simulated RF dongle node and serves its command protocol.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    /// Scenario file (TOML) describing actors, radios and modules.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// `stdio` or `tcp:<port>`.
    #[arg(long, default_value = "stdio")]
    transport: Transport,
    /// Log filter, e.g. `info` or `rfq_core=debug`. Falls back to RFQ_LOG.
    #[arg(long)]
    log_level: Option<String>,
    /// Comma-separated modules to load instead of the scenario's list.
    #[arg(long, value_delimiter = ',')]
    modules: Option<Vec<String>>,
    /// Virtual time per loop iteration.
    #[arg(long)]
    loop_step_us: Option<u64>,
    /// Virtual seconds per wall-clock second; 0 runs as fast as possible.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Seed used when no scenario is given.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn init_logging(level: Option<&str>) {
    let env = env_logger::Env::new().filter_or("RFQ_LOG", "warn");
    let mut b = env_logger::Builder::from_env(env);
    if let Some(l) = level {
        b.parse_filters(l);
    }
    b.target(env_logger::Target::Stderr).init();
}

fn main() -> Result<()> {
    let args = Args::parse();
    init_logging(args.log_level.as_deref());

    let mut scenario = match &args.scenario {
        Some(p) => NodeScenario::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => NodeScenario::quiet(args.seed),
    };
    if let Some(m) = args.modules {
        scenario.node.modules = Some(m.into_iter().filter(|s| !s.is_empty()).collect());
    }
    if let Some(step) = args.loop_step_us {
        scenario.node.loop_step_us = step;
    }
    if args.speed < 0.0 {
        bail!("--speed must be >= 0");
    }
    let mut node = scenario.build()?;
    info!("modules: {}", node.module_names().join(", "));
    let opts = ServeOptions { speed: (args.speed > 0.0).then_some(args.speed), ..ServeOptions::default() };

    match args.transport {
        Transport::Stdio => {
            let stats = rpc::serve(&mut node, std::io::stdin(), std::io::stdout(), opts);
            info!("stdin closed after {} commands, {} frames sent", stats.commands, stats.sent);
        }
        Transport::Tcp(port) => {
            let listener = TcpListener::bind(("127.0.0.1", port)).with_context(|| format!("binding port {port}"))?;
            info!("listening on {}", listener.local_addr()?);
            rpc::serve_tcp(&mut node, listener, opts, None)?;
        }
    }
    Ok(())
}
