//! Deterministic simulation suite for a milligram-scale unimorph actuator:
//! hysteretic wire kinetics, Joule heating, leaf-spring mechanics, the full
//! characterization protocol, and two small robots built on the actuator.

pub mod actuator;
pub mod calibrate;
pub mod crawler;
pub mod defaults;
pub mod error;
pub mod harness;
pub mod material;
pub mod mechanics;
pub mod optim;
pub mod targets;
pub mod signal;
pub mod strider;
pub mod thermal;
pub mod trajectory;

pub use error::{Result, SimError};
