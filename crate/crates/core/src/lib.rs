//! Priority pricing for a two-class preemptive M/M/1 queue.
//!
//! Customers choose whether to buy premium (preemptive) priority at a price
//! set by the operator. This crate provides the closed-form waiting-time
//! formulas, the pricing mechanisms (flat, optimal random, discretized,
//! cost-indexed schedule and two auction baselines), an equilibrium analyzer
//! for the customer game, an adaptive quadrature routine and a discrete-event
//! simulator used to check the analytics.

pub mod cli;
pub mod cost;
mod error;
pub mod game;
pub mod mechanisms;
pub mod model;
pub mod quadrature;
pub mod sim;

pub use cost::CostDistribution;
pub use error::{Error, Result};
pub use game::{EquilibriumReport, Stability, StrategyProfile};
pub use mechanisms::{PriceMechanism, PricePoint};
pub use model::{PremiumFraction, QueueParams};
pub use quadrature::QuadratureResult;
pub use sim::{SimConfig, SimResult};
