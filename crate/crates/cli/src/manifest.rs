use serde::{Deserialize, Serialize};

/// Manifest file name for a command, e.g. `manifest_step-steer.json`.
pub fn manifest_file(command: &str) -> String {
    format!("manifest_{command}.json")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub v_mps: f64,
    pub mu: f64,
    pub files: Vec<String>,
    pub wall_clock_s: f64,
    /// `None` on success, otherwise the failure message.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Resolved configuration, TOML; parses back to the same settings.
    pub config: String,
    pub conditions: Vec<ConditionRecord>,
    /// Files not tied to one condition (summaries, plot data).
    pub files: Vec<String>,
    pub summary: SummaryTable,
    pub notes: Vec<String>,
    pub wall_clock_s: f64,
}

impl RunManifest {
    pub fn all_files(&self) -> impl Iterator<Item = &str> {
        self.conditions
            .iter()
            .flat_map(|c| c.files.iter())
            .chain(&self.files)
            .map(String::as_str)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}
