use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::acl::AclPrediction;
use crate::community::{CommunityCover, Method};
use crate::diffusion::{remove_top_gatekeepers, simulate_on, DiffusionOutcome};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::netgen::generate_network;
use crate::rng::{derive_seed, Purpose};

/// One community-detection run against one condition's network.
#[derive(Clone, Debug)]
pub struct Sim1Cell {
    pub condition: String,
    pub method: Method,
    pub cover: CommunityCover,
    pub outcome: std::result::Result<AclPrediction, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sim1Row {
    pub master_seed: u64,
    pub condition: String,
    pub method: Method,
    pub cluster_count: Option<usize>,
    pub acl_size: Option<usize>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Simulation1 {
    pub master_seed: u64,
    /// `(condition name, network)` in config order.
    pub networks: Vec<(String, AttributedGraph)>,
    /// Condition-major, methods in config order.
    pub cells: Vec<Sim1Cell>,
}

impl Simulation1 {
    pub fn rows(&self) -> Vec<Sim1Row> {
        self.cells
            .iter()
            .map(|cell| {
                let mut row = Sim1Row {
                    master_seed: self.master_seed,
                    condition: cell.condition.clone(),
                    method: cell.method,
                    cluster_count: Some(cell.cover.len()),
                    acl_size: None,
                    precision: None,
                    recall: None,
                    f1: None,
                    error: None,
                };
                match &cell.outcome {
                    Ok(p) => {
                        row.acl_size = Some(p.acl_size);
                        row.precision = Some(p.precision);
                        row.recall = Some(p.recall);
                        row.f1 = Some(p.f1);
                    }
                    Err(e) => row.error = Some(e.clone()),
                }
                row
            })
            .collect()
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

/// Generates one network per homophily condition, in config order.
pub fn generate_networks(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<(String, AttributedGraph)>> {
    cfg.validate()?;
    let graphs: Vec<Result<AttributedGraph>> = pool(jobs)?.install(|| {
        (0..cfg.homophily_conditions.len())
            .into_par_iter()
            .map(|i| generate_network(&cfg.generator_config(i)?))
            .collect()
    });
    cfg.homophily_conditions
        .iter()
        .zip(graphs)
        .map(|(c, g)| Ok((c.name.clone(), g?)))
        .collect()
}

/// Detects communities with `method` and predicts the ACL from the
/// configured untrusted seeds.
pub fn predict_acl(cfg: &ExperimentConfig, g: &AttributedGraph, method: Method) -> (CommunityCover, Result<AclPrediction>) {
    let cover = method.detect(g);
    let u = &cfg.untrusted;
    let prediction = AclPrediction::predict(g, &cover, &u.attribute, &u.value, u.count);
    (cover, prediction)
}

/// Runs ACL prediction for every condition and method. A failing cell is
/// recorded with its error; the other cells still run.
pub fn run_simulation1(cfg: &ExperimentConfig, jobs: usize) -> Result<Simulation1> {
    let networks = generate_networks(cfg, jobs)?;
    let tasks: Vec<(usize, Method)> = (0..networks.len())
        .flat_map(|i| cfg.methods.iter().map(move |&m| (i, m)))
        .collect();
    let cells = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(i, method)| {
                let (name, g) = &networks[i];
                let (cover, outcome) = predict_acl(cfg, g, method);
                Sim1Cell {
                    condition: name.clone(),
                    method,
                    cover,
                    outcome: outcome.map_err(|e| e.to_string()),
                }
            })
            .collect()
    });
    Ok(Simulation1 {
        master_seed: cfg.master_seed,
        networks,
        cells,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sim2Row {
    pub master_seed: u64,
    pub condition: String,
    pub method: Method,
    pub seed_count: usize,
    pub removal_fraction: f64,
    pub replicate: usize,
    pub outcome: std::result::Result<DiffusionOutcome, String>,
}

/// Per-network ACL used by the diffusion runs.
#[derive(Clone, Debug)]
pub struct ConditionAcl {
    pub condition: String,
    pub cover: CommunityCover,
    pub prediction: std::result::Result<AclPrediction, String>,
}

#[derive(Clone, Debug)]
pub struct Simulation2 {
    pub master_seed: u64,
    pub networks: Vec<(String, AttributedGraph)>,
    pub acls: Vec<ConditionAcl>,
    /// Ordered by condition, seed count, removal fraction, replicate.
    pub rows: Vec<Sim2Row>,
}

/// Stream index of a diffusion grid cell, from the positions of its
/// condition, seed count and removal fraction in the config.
pub fn cell_index(cfg: &ExperimentConfig, condition: usize, seed_count: usize, fraction: usize) -> u64 {
    let d = &cfg.diffusion;
    ((condition * d.seed_counts.len() + seed_count) * d.removal_fractions.len() + fraction) as u64
}

/// RNG seed of one diffusion replicate.
pub fn replicate_seed(cfg: &ExperimentConfig, condition: usize, seed_count: usize, fraction: usize, replicate: usize) -> u64 {
    derive_seed(
        cfg.master_seed,
        Purpose::Cascade,
        cell_index(cfg, condition, seed_count, fraction),
        replicate as u64,
    )
}

/// Runs the full diffusion grid: conditions x seed counts x removal fractions
/// x replications. Gatekeeper removal is computed once per condition and
/// fraction; every replicate draws seeds and cascade from its own stream.
pub fn run_simulation2(cfg: &ExperimentConfig, jobs: usize) -> Result<Simulation2> {
    let networks = generate_networks(cfg, jobs)?;
    let pool = pool(jobs)?;
    let method = cfg.diffusion.method;
    let acls: Vec<ConditionAcl> = pool.install(|| {
        networks
            .par_iter()
            .map(|(name, g)| {
                let (cover, prediction) = predict_acl(cfg, g, method);
                ConditionAcl {
                    condition: name.clone(),
                    cover,
                    prediction: prediction.map_err(|e| e.to_string()),
                }
            })
            .collect()
    });

    let d = &cfg.diffusion;
    let mut rows = Vec::new();
    for (ci, ((name, g), acl)) in networks.iter().zip(&acls).enumerate() {
        let removals: Vec<Result<_>> = d
            .removal_fractions
            .iter()
            .map(|&f| match &acl.prediction {
                Ok(p) => remove_top_gatekeepers(g, &p.acl, f),
                Err(e) => Err(Error::InvalidConfig(format!("no ACL: {e}"))),
            })
            .collect();
        let mut tasks = Vec::new();
        for (si, &s) in d.seed_counts.iter().enumerate() {
            for (fi, &f) in d.removal_fractions.iter().enumerate() {
                for r in 0..d.replications {
                    tasks.push((si, s, fi, f, r));
                }
            }
        }
        let block: Vec<Sim2Row> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(si, s, fi, f, r)| {
                    let outcome = match (&removals[fi], &acl.prediction) {
                        (Ok((residual, removed, total)), Ok(p)) => {
                            let seed = replicate_seed(cfg, ci, si, fi, r);
                            simulate_on(residual, &p.acl, removed.clone(), *total, s, d.beta, seed)
                                .map_err(|e| e.to_string())
                        }
                        (Err(e), _) => Err(e.to_string()),
                        (_, Err(e)) => Err(e.clone()),
                    };
                    Sim2Row {
                        master_seed: cfg.master_seed,
                        condition: name.clone(),
                        method,
                        seed_count: s,
                        removal_fraction: f,
                        replicate: r,
                        outcome,
                    }
                })
                .collect()
        });
        rows.extend(block);
    }
    Ok(Simulation2 {
        master_seed: cfg.master_seed,
        networks,
        acls,
        rows,
    })
}

/// Mean and sample standard deviation of one diffusion grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub master_seed: u64,
    /// `None` for rows pooled over all conditions.
    pub condition: Option<String>,
    pub method: Method,
    /// `None` for rows pooled over all seed counts.
    pub seed_count: Option<usize>,
    pub removal_fraction: f64,
    pub runs: usize,
    pub failed: usize,
    pub mean_infected_acl_fraction: f64,
    pub sd_infected_acl_fraction: f64,
    pub mean_infected_total: f64,
    pub sd_infected_total: f64,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, sd)
}

fn summarize<'a>(
    sim: &Simulation2,
    condition: Option<String>,
    seed_count: Option<usize>,
    removal_fraction: f64,
    rows: impl Iterator<Item = &'a Sim2Row>,
) -> Option<SummaryRow> {
    let rows: Vec<&Sim2Row> = rows.collect();
    let method = rows.first()?.method;
    let ok: Vec<&DiffusionOutcome> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let fractions: Vec<f64> = ok.iter().map(|o| o.infected_acl_fraction).collect();
    let totals: Vec<f64> = ok.iter().map(|o| o.infected_total as f64).collect();
    let (mf, sf) = mean_sd(&fractions);
    let (mt, st) = mean_sd(&totals);
    Some(SummaryRow {
        master_seed: sim.master_seed,
        condition,
        method,
        seed_count,
        removal_fraction,
        runs: ok.len(),
        failed: rows.len() - ok.len(),
        mean_infected_acl_fraction: mf,
        sd_infected_acl_fraction: sf,
        mean_infected_total: mt,
        sd_infected_total: st,
    })
}

impl Simulation2 {
    /// One row per grid cell in run order, then one row per removal fraction
    /// pooled over conditions and seed counts.
    pub fn summary(&self, cfg: &ExperimentConfig) -> Vec<SummaryRow> {
        let d = &cfg.diffusion;
        let mut out = Vec::new();
        for (name, _) in &self.networks {
            for &s in &d.seed_counts {
                for &f in &d.removal_fractions {
                    let rows = self
                        .rows
                        .iter()
                        .filter(|r| &r.condition == name && r.seed_count == s && r.removal_fraction == f);
                    out.extend(summarize(self, Some(name.clone()), Some(s), f, rows));
                }
            }
        }
        for &f in &d.removal_fractions {
            let rows = self.rows.iter().filter(|r| r.removal_fraction == f);
            out.extend(summarize(self, None, None, f, rows));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig::default()
            .with_overrides(&[
                "generator.nodes=120",
                "diffusion.seedCounts=[10, 20]",
                "diffusion.replications=4",
                "untrusted.count=5",
            ])
            .unwrap()
    }

    #[test]
    fn simulation1_grid_and_determinism() {
        let cfg = small();
        let a = run_simulation1(&cfg, 1).unwrap();
        assert_eq!(a.rows().len(), 9);
        assert_eq!(a.networks.len(), 3);
        let b = run_simulation1(&cfg, 3).unwrap();
        assert_eq!(a.rows(), b.rows());
        for (cell, row) in a.cells.iter().zip(a.rows()) {
            assert_eq!((cell.condition.as_str(), cell.method), (row.condition.as_str(), row.method));
            if let Ok(p) = &cell.outcome {
                let s = crate::acl::evaluate_acl(&p.acl, &p.ground_truth).unwrap();
                assert_eq!(s, p.scores());
            }
        }
    }

    #[test]
    fn simulation1_records_errors() {
        let cfg = small().with_overrides(&["untrusted.count=400"]).unwrap();
        let sim = run_simulation1(&cfg, 1).unwrap();
        let rows = sim.rows();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.error.is_some() && r.precision.is_none()));
    }

    #[test]
    fn simulation2_grid_and_summary() {
        let cfg = small();
        let sim = run_simulation2(&cfg, 2).unwrap();
        assert_eq!(sim.rows.len(), 3 * 2 * 3 * 4);
        let again = run_simulation2(&cfg, 1).unwrap();
        assert_eq!(sim.rows, again.rows);

        let summary = sim.summary(&cfg);
        assert_eq!(summary.len(), 18 + 3);
        for row in &summary[..18] {
            let values: Vec<f64> = sim
                .rows
                .iter()
                .filter(|r| Some(&r.condition) == row.condition.as_ref()
                    && Some(r.seed_count) == row.seed_count
                    && r.removal_fraction == row.removal_fraction)
                .map(|r| r.outcome.as_ref().unwrap().infected_acl_fraction)
                .collect();
            assert_eq!(values.len(), 4);
            let mean = values.iter().sum::<f64>() / 4.0;
            assert!((row.mean_infected_acl_fraction - mean).abs() < 1e-12);
        }
        for row in &sim.rows {
            let o = row.outcome.as_ref().unwrap();
            assert_eq!(o.seeds.len(), row.seed_count);
            assert!((0.0..=1.0).contains(&o.infected_acl_fraction));
        }
    }

    #[test]
    fn zero_beta_infects_no_acl_member() {
        let cfg = small()
            .with_overrides(&["diffusion.beta=0", "diffusion.removalFractions=[0]"])
            .unwrap();
        let sim = run_simulation2(&cfg, 1).unwrap();
        assert!(sim
            .rows
            .iter()
            .all(|r| r.outcome.as_ref().unwrap().infected_acl_fraction == 0.0));
    }
}
