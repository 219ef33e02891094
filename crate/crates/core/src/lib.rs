//! Epoch-based simulator and multi-objective scheduling engine for LLM
//! inference requests across geo-distributed datacenters.
//!
//! Every 15-minute epoch the engine predicts per-(region, model) arrivals,
//! searches for a set of mutually non-dominated scheduling plans over four
//! objectives (mean time-to-first-token, carbon, water, energy cost), lets a
//! policy or an operator pick one plan, and then executes the observed trace
//! against a model of heterogeneous GPU nodes, cooling, water and grid
//! intensities.
//!
//! ```text
//!   trace ──▶ predictor ──▶ optimizer (local search + EA + archive) ──▶ selection
//!                                   │ evaluate_plan                        │
//!                                   ▼                                      ▼
//!                      perf model + sustainability model ◀── execute observed trace
//! ```
//!
//! Module map:
//!
//! | module | contents |
//! |---|---|
//! | [`workload`] | requests, trace generation, memory footprint, arrival predictor |
//! | [`infrastructure`] | node types, datacenters, topology, config loading |
//! | [`perf`] | load/migration/processing latency and the local round-robin placement |
//! | [`sustainability`] | energy, cost, water, carbon and whole-plan evaluation |
//! | [`surrogate`] | least-squares gradient boosting over regression trees |
//! | [`optimizer`] | plans, Pareto archive, ML-guided local search, EA, selection |
//! | [`baselines`] | round-robin, least-queue and nearest-datacenter routers |
//! | [`sim`] | the epoch loop, interactive sessions, reports and run outputs |

pub mod baselines;
pub mod error;
pub mod exec;
pub mod infrastructure;
pub mod optimizer;
pub mod perf;
pub mod sim;
pub mod surrogate;
pub mod sustainability;
pub mod workload;

pub use error::{Error, Result};
pub use exec::Exec;
pub use infrastructure::{load_config, Infrastructure, LoadedConfig, SimConfig};
pub use optimizer::{ObjectiveVector, ParetoArchive, SchedulingPlan};
pub use sim::{run_simulation, RunReport, SchedulerKind, SelectionPolicy, Simulation};
