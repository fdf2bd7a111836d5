//! Tourist and resident mobility analytics over location-based social
//! network check-ins.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! * [`ingest`]: check-in and venue parsing, category remapping
//! * [`classify`]: home-city inference and tourist/resident labels
//! * [`behavior`]: interval distributions, venue rankings, hourly routines,
//!   category popularity
//! * [`mobility`]: mean displacement and radius of gyration
//! * [`stgraph`]: venue-by-hour mobility graphs and their centralities
//! * [`profiles`]: LDA topic profiles over visited subcategories
//! * [`synth`]: seeded synthetic scenarios with ground truth
//! * [`pipeline`]: config-driven orchestration and report writing

pub mod behavior;
pub mod classify;
pub mod ingest;
pub mod mobility;
pub mod pipeline;
pub mod profiles;
pub mod stgraph;
pub mod synth;

pub use classify::{Label, UserClass};
pub use ingest::{Category, CheckIn, Venue, VenueCatalog};
