use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aclsim_core::acl::AclPrediction;
use aclsim_core::community::Method;
use aclsim_core::diffusion::{remove_top_gatekeepers, simulate_on};
use aclsim_core::graph::{load_graph, AttributedGraph};
use aclsim_core::harness::{
    predict_acl, replicate_seed, run_simulation1, run_simulation2, write_sim1_csv, write_sim2_csv,
    ExperimentConfig, OutputDir, DEFAULT_CONFIG_NAME,
};
use aclsim_core::netgen::generate_network;
use aclsim_core::{Error, Result};

#[derive(Parser)]
#[command(name = "aclsim", version, about = "ACL prediction and robustness simulations on attributed ego-networks")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Config file, or `default` for the built-in configuration.
    #[arg(long, global = true, default_value = DEFAULT_CONFIG_NAME, value_name = "PATH")]
    config: String,

    /// Overrides masterSeed.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Overrides outputDir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_name = "N")]
    jobs: usize,

    /// Config override by dotted path, e.g. `diffusion.beta=0.5`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct NetworkArgs {
    /// Homophily condition name.
    #[arg(long, default_value = "H1")]
    condition: String,

    /// Read the network from a graph JSON file instead of generating it.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate networks; all conditions unless `--condition` is given.
    Generate {
        #[arg(long)]
        condition: Option<String>,
    },
    /// Detect communities on one network.
    Detect {
        #[command(flatten)]
        network: NetworkArgs,
        #[arg(long, default_value = "MC")]
        method: Method,
    },
    /// Predict the ACL on one network.
    Acl {
        #[command(flatten)]
        network: NetworkArgs,
        #[arg(long, default_value = "LE")]
        method: Method,
    },
    /// Run one diffusion replicate of the configured grid.
    Diffuse {
        #[command(flatten)]
        network: NetworkArgs,
        /// Must be one of diffusion.seedCounts.
        #[arg(long)]
        seed_count: Option<usize>,
        /// Index into diffusion.removalFractions.
        #[arg(long, default_value_t = 0)]
        fraction_index: usize,
        #[arg(long, default_value_t = 0)]
        replicate: usize,
    },
    /// ACL prediction for every condition and method.
    Sim1,
    /// Diffusion grid with gatekeeper removal.
    Sim2,
    /// Load, override and validate the config, then print it.
    ValidateConfig,
}

fn load_config(args: &GlobalArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?.with_overrides(&args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn network(cfg: &ExperimentConfig, args: &NetworkArgs) -> Result<(usize, AttributedGraph)> {
    let index = cfg.condition_index(&args.condition)?;
    let g = match &args.graph {
        Some(path) => load_graph(path)?,
        None => generate_network(&cfg.generator_config(index)?)?,
    };
    Ok((index, g))
}

fn acl_line(condition: &str, p: &AclPrediction) -> String {
    format!(
        "{condition} {} clusters={} aclSize={} precision={:.6} recall={:.6} f1={:.6}",
        p.method, p.cluster_count, p.acl_size, p.precision, p.recall, p.f1
    )
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.global)?;
    let jobs = cli.global.jobs;
    match cli.command {
        Command::ValidateConfig => {
            print!("{}", cfg.to_json_string()?);
        }
        Command::Generate { condition } => {
            let out = OutputDir::create(&cfg.output_dir)?;
            let indices: Vec<usize> = match &condition {
                Some(name) => vec![cfg.condition_index(name)?],
                None => (0..cfg.homophily_conditions.len()).collect(),
            };
            for i in indices {
                let name = &cfg.homophily_conditions[i].name;
                let g = generate_network(&cfg.generator_config(i)?)?;
                let path = out.write_graph(name, &g)?;
                println!("{name} nodes={} edges={} {}", g.node_count(), g.edge_count(), path.display());
            }
        }
        Command::Detect { network: n, method } => {
            let (_, g) = network(&cfg, &n)?;
            let cover = method.detect(&g);
            let out = OutputDir::create(&cfg.output_dir)?;
            let path = out.write_json(&OutputDir::cover_name(&n.condition, method), &cover)?;
            println!("{} {method} clusters={} {}", n.condition, cover.len(), path.display());
        }
        Command::Acl { network: n, method } => {
            let (_, g) = network(&cfg, &n)?;
            let (cover, prediction) = predict_acl(&cfg, &g, method);
            let out = OutputDir::create(&cfg.output_dir)?;
            out.write_json(&OutputDir::cover_name(&n.condition, method), &cover)?;
            let p = prediction?;
            out.write_json(&OutputDir::acl_name(&n.condition, method), &p)?;
            println!("{}", acl_line(&n.condition, &p));
        }
        Command::Diffuse {
            network: n,
            seed_count,
            fraction_index,
            replicate,
        } => {
            let d = &cfg.diffusion;
            let si = match seed_count {
                Some(s) => d
                    .seed_counts
                    .iter()
                    .position(|&x| x == s)
                    .ok_or_else(|| Error::InvalidConfig(format!("seed count {s} is not in diffusion.seedCounts")))?,
                None => 0,
            };
            let fraction = *d.removal_fractions.get(fraction_index).ok_or_else(|| {
                Error::InvalidConfig(format!("fraction index {fraction_index} out of range"))
            })?;
            let (ci, g) = network(&cfg, &n)?;
            let (_, prediction) = predict_acl(&cfg, &g, d.method);
            let p = prediction?;
            let (residual, removed, total) = remove_top_gatekeepers(&g, &p.acl, fraction)?;
            let seed = replicate_seed(&cfg, ci, si, fraction_index, replicate);
            let o = simulate_on(&residual, &p.acl, removed, total, d.seed_counts[si], d.beta, seed)?;
            println!(
                "{} {} seeds={} removal={:.6} replicate={replicate} removed={}/{} infected={} aclInfected={}/{} fraction={:.6} rounds={}",
                n.condition,
                d.method,
                d.seed_counts[si],
                fraction,
                o.removed_gatekeepers.len(),
                o.gatekeeper_total,
                o.infected_total,
                o.infected_acl_count,
                o.acl_size,
                o.infected_acl_fraction,
                o.rounds
            );
        }
        Command::Sim1 => {
            let sim = run_simulation1(&cfg, jobs)?;
            let out = OutputDir::create(&cfg.output_dir)?;
            out.write_simulation1(&cfg, &sim)?;
            let mut buf = Vec::new();
            write_sim1_csv(&sim.rows(), &mut buf)?;
            for line in String::from_utf8_lossy(&buf).lines().skip(1) {
                println!("{line}");
            }
        }
        Command::Sim2 => {
            let sim = run_simulation2(&cfg, jobs)?;
            let out = OutputDir::create(&cfg.output_dir)?;
            out.write_simulation2(&cfg, &sim)?;
            let mut buf = Vec::new();
            write_sim2_csv(&sim.rows, &mut buf)?;
            for line in String::from_utf8_lossy(&buf).lines().skip(1) {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
