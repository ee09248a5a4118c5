//! Assembles a node from a scenario file: environment, radios and modules.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attacks::{MouseJack, RollJam};
use crate::clamping::GuessingModule;
use crate::env::{EnvError, EnvScenario, Environment, Micros};
use crate::hal::{FrontendKind, FrontendProfile, RadioHal, RadioId};
use crate::modules::{PacketFilter, PacketModEngine, RadioModule, Repeater};
use crate::pipeline::{Module, Node, NodeError, DEFAULT_LOOP_STEP_US};

/// Non-radio modules in registration (and hook) order.
pub const STANDARD_MODULES: [&str; 6] = [
    GuessingModule::NAME,
    RollJam::NAME,
    MouseJack::NAME,
    PacketFilter::NAME,
    PacketModEngine::NAME,
    Repeater::NAME,
];

#[derive(Debug, Error)]
pub enum BuildError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Node(#[from] NodeError),
    #[error("unknown module {0:?}")]
    UnknownModule(String),
    #[error("bad scenario: {0}")]
    Scenario(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    #[serde(default = "default_radios")]
    pub radios: Vec<FrontendKind>,
    /// Modules to load; all standard modules when absent.
    #[serde(default)]
    pub modules: Option<Vec<String>>,
    #[serde(default = "default_step")]
    pub loop_step_us: Micros,
}

fn default_radios() -> Vec<FrontendKind> {
    vec![FrontendKind::Vc1101, FrontendKind::Vc1101, FrontendKind::Vnrf24]
}

fn default_step() -> Micros {
    DEFAULT_LOOP_STEP_US
}

impl Default for NodeSection {
    fn default() -> Self {
        Self { radios: default_radios(), modules: None, loop_step_us: default_step() }
    }
}

/// A scenario file: the RF environment plus an optional `[node]` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeScenario {
    #[serde(default)]
    pub node: NodeSection,
    #[serde(flatten)]
    pub env: EnvScenario,
}

impl NodeScenario {
    pub fn quiet(seed: u64) -> Self {
        Self { node: NodeSection::default(), env: EnvScenario::quiet(seed) }
    }

    pub fn from_toml(text: &str) -> Result<Self, BuildError> {
        let s: Self = toml::from_str(text).map_err(|e| BuildError::Scenario(e.to_string()))?;
        s.env.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, BuildError> {
        let text = std::fs::read_to_string(path).map_err(|e| BuildError::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn build(&self) -> Result<Node, BuildError> {
        let names: Vec<&str> = match &self.node.modules {
            Some(m) => m.iter().map(String::as_str).collect(),
            None => STANDARD_MODULES.to_vec(),
        };
        build_node(&self.env, &self.node.radios, &names, self.node.loop_step_us)
    }
}

fn standard_module(name: &str) -> Option<Box<dyn Module>> {
    Some(match name {
        GuessingModule::NAME => Box::new(GuessingModule::default()),
        RollJam::NAME => Box::new(RollJam::default()),
        MouseJack::NAME => Box::new(MouseJack::default()),
        PacketFilter::NAME => Box::new(PacketFilter::default()),
        PacketModEngine::NAME => Box::new(PacketModEngine::default()),
        Repeater::NAME => Box::new(Repeater::default()),
        _ => return None,
    })
}

/// One radio module per frontend, then `modules` in standard order.
pub fn build_node(env: &EnvScenario, radios: &[FrontendKind], modules: &[&str], loop_step_us: Micros) -> Result<Node, BuildError> {
    if let Some(bad) = modules.iter().find(|m| !STANDARD_MODULES.contains(m)) {
        return Err(BuildError::UnknownModule(bad.to_string()));
    }
    let mut hal = RadioHal::new(Environment::new(env)?);
    for kind in radios {
        hal.attach(match kind {
            FrontendKind::Vc1101 => FrontendProfile::vc1101(),
            FrontendKind::Vnrf24 => FrontendProfile::vnrf24(),
        });
    }
    let mut node = Node::new(hal);
    node.set_loop_step(loop_step_us);
    let mut priority = 0;
    for i in 0..radios.len() {
        node.register(Box::new(RadioModule::new(RadioId(i))), priority)?;
        priority += 10;
    }
    for name in STANDARD_MODULES.iter().filter(|n| modules.contains(n)) {
        node.register(standard_module(name).expect("listed"), priority)?;
        priority += 10;
    }
    Ok(node)
}
