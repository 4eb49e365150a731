//! Fringe subtree statistics of random trees with a given degree statistic:
//! exact moments, uniform samplers, limit-law constants and Monte Carlo
//! checks.

pub mod asymptotics;
pub mod error;
pub mod harness;
pub mod moments;
pub mod offspring;
pub mod rational;
pub mod sampling;
pub mod tree;

pub use asymptotics::{CovMatrix, Exceptional, GWEquivalents, Regime, TollFunction, WeightSequence};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentReport, StatFamily};
pub use offspring::OffspringDistribution;
pub use rational::{ExtNum, MomentValue, Num};
pub use sampling::{DegreeSequence, LabelledTree, Seed};
pub use tree::{count_trees, DegreeStatistic, LukasiewiczPath, PlaneTree, UnorderedKey};
