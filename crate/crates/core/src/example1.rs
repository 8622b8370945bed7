//! The bundled two-agent, four-state example structure with binary signals
//! and a uniform prior.

use crate::infostructure::InfoStructure;
use crate::scenario::Scenario;

pub const SCENARIO_JSON: &str = include_str!("../scenarios/example1.json");

pub fn scenario() -> Scenario {
    Scenario::parse_valid(SCENARIO_JSON).expect("bundled scenario is valid")
}

pub fn structure() -> InfoStructure {
    scenario().info
}

/// State indices by label.
pub const THETA1: usize = 0;
pub const THETA2: usize = 1;
pub const THETA3: usize = 2;
pub const THETA4: usize = 3;
