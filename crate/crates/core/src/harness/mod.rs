//! Experiment configuration, orchestration and result files.

mod config;
mod output;
mod sim;

pub use config::{
    DiffusionGrid, ExperimentConfig, GeneratorSettings, HomophilyCondition, UntrustedSpec, DEFAULT_CONFIG_NAME,
};
pub use output::{
    write_sim1_csv, write_sim2_csv, write_summary_csv, OutputDir, POOLED, SIM1_HEADER, SIM2_HEADER, SUMMARY_HEADER,
};
pub use sim::{
    cell_index, generate_networks, predict_acl, replicate_seed, run_simulation1, run_simulation2, ConditionAcl, Sim1Cell, Sim1Row, Sim2Row,
    Simulation1, Simulation2, SummaryRow,
};
