use std::path::Path;

use pnpvamp::operators::pgm::GrayImage;
use serde::Serialize;

use crate::config::{Scenario, ScenarioConfig};
use crate::CliError;

/// Wall-clock time of one cell. Kept out of `results.csv` so reruns stay
/// byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub cell: String,
    pub seed: u64,
    pub runtime_ms: f64,
}

impl TimingRow {
    pub fn new(cell: String, seed: u64, runtime_ms: f64) -> Self {
        TimingRow { cell, seed, runtime_ms }
    }
}

/// Everything a scenario produces, buffered until the single writer
/// flushes it to disk.
pub struct Artifacts {
    results: csv::Writer<Vec<u8>>,
    se: csv::Writer<Vec<u8>>,
    has_se: bool,
    pub timing: Vec<TimingRow>,
    pub images: Vec<(String, GrayImage)>,
    pub seeds: Vec<u64>,
}

impl Default for Artifacts {
    fn default() -> Self {
        Artifacts {
            results: csv::Writer::from_writer(Vec::new()),
            se: csv::Writer::from_writer(Vec::new()),
            has_se: false,
            timing: Vec::new(),
            images: Vec::new(),
            seeds: Vec::new(),
        }
    }
}

fn csv_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

#[derive(Serialize)]
struct Meta<'a> {
    scenario: &'a str,
    master_seed: u64,
    seeds: &'a [u64],
    config: &'a ScenarioConfig,
}

impl Artifacts {
    pub fn push_results<T: Serialize>(&mut self, rows: &[T]) -> Result<(), CliError> {
        rows.iter().try_for_each(|r| self.results.serialize(r)).map_err(csv_err)
    }

    pub fn push_se<T: Serialize>(&mut self, rows: &[T]) -> Result<(), CliError> {
        self.has_se |= !rows.is_empty();
        rows.iter().try_for_each(|r| self.se.serialize(r)).map_err(csv_err)
    }

    /// `results.csv` contents.
    pub fn results_csv(&mut self) -> Result<Vec<u8>, CliError> {
        self.results.flush().map_err(csv_err)?;
        Ok(self.results.get_ref().clone())
    }

    pub fn se_csv(&mut self) -> Result<Option<Vec<u8>>, CliError> {
        if !self.has_se {
            return Ok(None);
        }
        self.se.flush().map_err(csv_err)?;
        Ok(Some(self.se.get_ref().clone()))
    }

    /// Writes `results.csv`, `se.csv` (when present), `timing.csv`, any
    /// images and `meta.toml` into `dir`.
    pub fn write(mut self, dir: &Path, scenario: Scenario, config: &ScenarioConfig) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("results.csv"), self.results_csv()?).map_err(io)?;
        if let Some(se) = self.se_csv()? {
            std::fs::write(dir.join("se.csv"), se).map_err(io)?;
        }
        let mut timing = csv::Writer::from_writer(Vec::new());
        for row in &self.timing {
            timing.serialize(row).map_err(csv_err)?;
        }
        std::fs::write(dir.join("timing.csv"), timing.into_inner().map_err(csv_err)?).map_err(io)?;
        for (name, img) in &self.images {
            img.write(dir.join(name)).map_err(|e| CliError::Runtime(format!("{name}: {e}")))?;
        }
        let meta = Meta {
            scenario: scenario.name(),
            master_seed: config.master_seed,
            seeds: &self.seeds,
            config,
        };
        let text = toml::to_string(&meta).map_err(|e| CliError::Runtime(format!("meta: {e}")))?;
        std::fs::write(dir.join("meta.toml"), text).map_err(io)?;
        Ok(())
    }
}
