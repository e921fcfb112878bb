use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::sim::{Sim1Row, Sim2Row, Simulation1, Simulation2, SummaryRow};
use crate::community::Method;
use crate::error::Result;
use crate::graph::{to_json_string, AttributedGraph};
use crate::rng::RNG_ALGORITHM;

pub const SIM1_HEADER: [&str; 9] = [
    "masterSeed",
    "condition",
    "method",
    "clusterCount",
    "aclSize",
    "precision",
    "recall",
    "f1",
    "error",
];

pub const SIM2_HEADER: [&str; 14] = [
    "masterSeed",
    "homophilyConfig",
    "method",
    "seedCount",
    "removalFraction",
    "replicate",
    "gatekeeperTotal",
    "gatekeepersRemoved",
    "infectedTotal",
    "infectedAclCount",
    "aclSize",
    "infectedAclFraction",
    "rounds",
    "error",
];

pub const SUMMARY_HEADER: [&str; 11] = [
    "masterSeed",
    "homophilyConfig",
    "method",
    "seedCount",
    "removalFraction",
    "runs",
    "failed",
    "meanInfectedAclFraction",
    "sdInfectedAclFraction",
    "meanInfectedTotal",
    "sdInfectedTotal",
];

/// Marker for summary rows pooled over a factor.
pub const POOLED: &str = "all";

fn frac(x: f64) -> String {
    format!("{x:.6}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_sim1_csv<W: Write>(rows: &[Sim1Row], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SIM1_HEADER)?;
    for r in rows {
        out.write_record([
            r.master_seed.to_string(),
            r.condition.clone(),
            r.method.to_string(),
            opt(r.cluster_count),
            opt(r.acl_size),
            opt(r.precision.map(frac)),
            opt(r.recall.map(frac)),
            opt(r.f1.map(frac)),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sim2_csv<W: Write>(rows: &[Sim2Row], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SIM2_HEADER)?;
    for r in rows {
        let mut record = vec![
            r.master_seed.to_string(),
            r.condition.clone(),
            r.method.to_string(),
            r.seed_count.to_string(),
            frac(r.removal_fraction),
            r.replicate.to_string(),
        ];
        match &r.outcome {
            Ok(o) => {
                record.extend([
                    o.gatekeeper_total.to_string(),
                    o.removed_gatekeepers.len().to_string(),
                    o.infected_total.to_string(),
                    o.infected_acl_count.to_string(),
                    o.acl_size.to_string(),
                    frac(o.infected_acl_fraction),
                    o.rounds.to_string(),
                    String::new(),
                ]);
            }
            Err(e) => {
                record.extend(std::iter::repeat_n(String::new(), 7));
                record.push(e.clone());
            }
        }
        out.write_record(&record)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            r.master_seed.to_string(),
            r.condition.clone().unwrap_or_else(|| POOLED.into()),
            r.method.to_string(),
            r.seed_count.map_or_else(|| POOLED.into(), |s| s.to_string()),
            frac(r.removal_fraction),
            r.runs.to_string(),
            r.failed.to_string(),
            frac(r.mean_infected_acl_fraction),
            frac(r.sd_infected_acl_fraction),
            frac(r.mean_infected_total),
            frac(r.sd_infected_total),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunMetadata<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    master_seed: u64,
    rng_algorithm: &'static str,
    config: &'a ExperimentConfig,
}

/// Writes the files of one run into a directory.
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(OutputDir {
            root: root.as_ref().to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, contents)?;
        Ok(path)
    }

    pub fn write_graph(&self, condition: &str, g: &AttributedGraph) -> Result<PathBuf> {
        self.write(&format!("graph_{condition}.json"), to_json_string(g)?.as_bytes())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn cover_name(condition: &str, method: Method) -> String {
        format!("cover_{condition}_{method}.json")
    }

    pub fn acl_name(condition: &str, method: Method) -> String {
        format!("acl_{condition}_{method}.json")
    }

    pub fn write_metadata(&self, command: &str, cfg: &ExperimentConfig) -> Result<PathBuf> {
        let meta = RunMetadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            master_seed: cfg.master_seed,
            rng_algorithm: RNG_ALGORITHM,
            config: cfg,
        };
        self.write_json(&format!("run_{command}.json"), &meta)
    }

    /// `sim1.csv`, plus every network, cover and ACL.
    pub fn write_simulation1(&self, cfg: &ExperimentConfig, sim: &Simulation1) -> Result<()> {
        for (name, g) in &sim.networks {
            self.write_graph(name, g)?;
        }
        for cell in &sim.cells {
            self.write_json(&Self::cover_name(&cell.condition, cell.method), &cell.cover)?;
            if let Ok(p) = &cell.outcome {
                self.write_json(&Self::acl_name(&cell.condition, cell.method), p)?;
            }
        }
        let mut buf = Vec::new();
        write_sim1_csv(&sim.rows(), &mut buf)?;
        self.write("sim1.csv", &buf)?;
        self.write_metadata("sim1", cfg)?;
        Ok(())
    }

    /// `sim2.csv`, `summary.csv`, plus every network, cover and ACL.
    pub fn write_simulation2(&self, cfg: &ExperimentConfig, sim: &Simulation2) -> Result<()> {
        for (name, g) in &sim.networks {
            self.write_graph(name, g)?;
        }
        for acl in &sim.acls {
            self.write_json(&Self::cover_name(&acl.condition, acl.cover.method), &acl.cover)?;
            if let Ok(p) = &acl.prediction {
                self.write_json(&Self::acl_name(&acl.condition, p.method), p)?;
            }
        }
        let mut buf = Vec::new();
        write_sim2_csv(&sim.rows, &mut buf)?;
        self.write("sim2.csv", &buf)?;
        let mut buf = Vec::new();
        write_summary_csv(&sim.summary(cfg), &mut buf)?;
        self.write("summary.csv", &buf)?;
        self.write_metadata("sim2", cfg)?;
        Ok(())
    }
}
