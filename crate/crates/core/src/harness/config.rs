use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::MIN_RECEIVERS;
use crate::coordinator::{CoordinatorStrategy, NonSignallingStrategy};
use crate::error::{Error, Result};
use crate::ghz::PhaseGhzSource;

/// Which conferencing resources the receivers have.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Shared entanglement but no communication: a non-signalling coordinator.
    #[serde(rename = "entanglement-only")]
    EntanglementOnly,
    #[serde(rename = "classical-only-i")]
    ClassicalOnlyI,
    #[serde(rename = "classical-only-ii")]
    ClassicalOnlyII,
    #[serde(rename = "entanglement+classical")]
    EntanglementClassical,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::EntanglementOnly,
        Scenario::ClassicalOnlyI,
        Scenario::ClassicalOnlyII,
        Scenario::EntanglementClassical,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::EntanglementOnly => "entanglement-only",
            Scenario::ClassicalOnlyI => "classical-only-i",
            Scenario::ClassicalOnlyII => "classical-only-ii",
            Scenario::EntanglementClassical => "entanglement+classical",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::Config(format!("unknown scenario {name:?}")))
    }

    pub fn uses_ghz(self) -> bool {
        self == Scenario::EntanglementClassical
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdversaryConfig {
    /// GHZ source kind, e.g. `honest` or `parity-violating`.
    pub source: String,
    pub source_param: f64,
    /// Coordinator used by the entanglement-only scenario.
    pub local_strategy: String,
}

impl Default for AdversaryConfig {
    fn default() -> Self {
        Self { source: "honest".into(), source_param: 0.0, local_strategy: "parity-share-box".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Also write the first trial's transcript as JSON lines.
    pub transcript: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    /// Number of receivers `N`.
    pub receivers: usize,
    /// Block length `n`.
    pub block_len: usize,
    /// Security parameter `m`.
    pub security: usize,
    pub trials: u64,
    pub seed: u64,
    pub adversary: AdversaryConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::ClassicalOnlyII,
            receivers: 4,
            block_len: 64,
            security: 2,
            trials: 1000,
            seed: 0,
            adversary: AdversaryConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.receivers < MIN_RECEIVERS {
            return Err(Error::Config(format!("N must be at least {MIN_RECEIVERS}, got {}", self.receivers)));
        }
        if self.block_len == 0 || self.block_len > 64 {
            return Err(Error::Config(format!("n must be in 1..=64, got {}", self.block_len)));
        }
        if self.scenario.uses_ghz() && self.security == 0 {
            return Err(Error::Config("m must be at least 1 when GHZ copies are used".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.source()?;
        self.local_strategy()?;
        Ok(())
    }

    pub fn source(&self) -> Result<PhaseGhzSource> {
        PhaseGhzSource::parse(&self.adversary.source, self.adversary.source_param)
    }

    pub fn local_strategy(&self) -> Result<NonSignallingStrategy> {
        NonSignallingStrategy::parse(&self.adversary.local_strategy)
    }

    pub fn strategy(&self) -> Result<CoordinatorStrategy> {
        Ok(match self.scenario {
            Scenario::EntanglementOnly => CoordinatorStrategy::NonSignalling(self.local_strategy()?),
            Scenario::ClassicalOnlyI => CoordinatorStrategy::ClassicalPerUse,
            Scenario::ClassicalOnlyII => CoordinatorStrategy::ClassicalZeroSum,
            Scenario::EntanglementClassical => {
                CoordinatorStrategy::EntanglementAssisted { source: self.source()?, security: self.security }
            }
        })
    }
}
