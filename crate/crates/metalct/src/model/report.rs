use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{line_distance, Error, Line, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StreakLineClass {
    Bitangent,
    CornerCorner,
    CornerTangent,
    SegmentLine,
    CornerLimitTangent,
    Degenerate,
}

impl StreakLineClass {
    pub fn name(&self) -> &'static str {
        match self {
            StreakLineClass::Bitangent => "Bitangent",
            StreakLineClass::CornerCorner => "CornerCorner",
            StreakLineClass::CornerTangent => "CornerTangent",
            StreakLineClass::SegmentLine => "SegmentLine",
            StreakLineClass::CornerLimitTangent => "CornerLimitTangent",
            StreakLineClass::Degenerate => "Degenerate",
        }
    }
}

/// One streak line with its provenance and optional measurements.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreakEntry {
    pub line: Line,
    pub class: StreakLineClass,
    /// Every class that produced this line, including `class`.
    pub sources: Vec<StreakLineClass>,
    pub amplitude: Option<f64>,
    pub order: Option<f64>,
    pub flags: Vec<String>,
}

impl StreakEntry {
    pub fn new(line: Line, class: StreakLineClass) -> Self {
        StreakEntry { line, class, sources: vec![class], amplitude: None, order: None, flags: Vec::new() }
    }

    pub fn has_source(&self, class: StreakLineClass) -> bool {
        self.sources.contains(&class)
    }

    pub fn is_degenerate(&self) -> bool {
        self.class == StreakLineClass::Degenerate || self.flags.iter().any(|f| f == "degenerate")
    }

    pub fn flag(&mut self, f: &str) {
        if !self.flags.iter().any(|g| g == f) {
            self.flags.push(f.to_string());
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StreakReport {
    pub entries: Vec<StreakEntry>,
}

impl StreakReport {
    pub fn lines(&self) -> Vec<Line> {
        self.entries.iter().map(|e| e.line).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the entry closest to `line`, if within `tol` under `line_distance(·, ·, s_scale)`.
    pub fn find(&self, line: &Line, s_scale: f64, tol: f64) -> Option<usize> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (i, line_distance(&e.line, line, s_scale)))
            .filter(|&(_, d)| d < tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Plain-text table, one streak per line.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# class               s            phi          amplitude      order     flags\n");
        for e in &self.entries {
            let amp = e.amplitude.map_or("-".to_string(), |a| format!("{a:.6e}"));
            let ord = e.order.map_or("-".to_string(), |o| format!("{o:.3}"));
            let mut flags = e.flags.join(",");
            if e.sources.len() > 1 {
                let names: Vec<&str> = e.sources.iter().map(|c| c.name()).collect();
                if !flags.is_empty() {
                    flags.push(',');
                }
                flags.push_str(&format!("sources={}", names.join("+")));
            }
            if flags.is_empty() {
                flags.push('-');
            }
            let _ = writeln!(
                out,
                "{:<20} {:>12.8} {:>12.8} {:>14} {:>8}  {}",
                e.class.name(),
                // keep tiny negative offsets from printing as -0.00000000
                if e.line.s.abs() < 5e-9 { 0.0 } else { e.line.s },
                e.line.phi,
                amp,
                ord,
                flags
            );
        }
        out
    }

    /// Machine-readable sidecar (JSON).
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("streak report: {e}")))
    }
}
