use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Result;

/// One named assertion of a pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Output directory plus the Markdown summary assembled along the way.
pub struct Report {
    dir: PathBuf,
    title: String,
    lines: Vec<String>,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

impl Report {
    pub fn new(dir: &Path, title: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Report { dir: dir.to_path_buf(), title: title.into(), lines: Vec::new(), checks: Vec::new(), files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn heading(&mut self, text: &str) {
        self.lines.push(format!("\n## {text}\n"));
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }

    /// Writes `report.md`: provenance, body lines, checks and produced files.
    pub fn finish(&mut self, provenance: &[(&str, String)], config_toml: &str) -> Result<()> {
        let mut s = String::new();
        let _ = writeln!(s, "# {}\n", self.title);
        for (k, v) in provenance {
            let _ = writeln!(s, "- {k}: {v}");
        }
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        let _ = writeln!(s, "\n## Checks\n\n| check | result | detail |\n|---|---|---|");
        for c in &self.checks {
            let _ = writeln!(s, "| {} | {} | {} |", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail.replace('|', "\\|"));
        }
        let _ = writeln!(s, "\n## Files\n");
        for f in &self.files {
            let _ = writeln!(s, "- {f}");
        }
        let _ = writeln!(s, "\n## Configuration\n\n```toml\n{}```", config_toml);
        std::fs::write(self.dir.join("report.md"), s)?;
        Ok(())
    }
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Formats an optional number as an empty cell when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_report_and_tracks_failures() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new(dir.path(), "demo").unwrap();
        r.write("a.csv", &csv(&["x", "y"], [vec!["1".into(), opt(None)]])).unwrap();
        r.check("first", true, "|x| < 1");
        r.check("second", false, "bad");
        r.check("third", false, "worse");
        assert_eq!(r.first_failure().unwrap().name, "second");
        r.finish(&[("seed", "1".into())], "seed = 1\n").unwrap();
        let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
        assert!(md.contains("| second | FAIL | bad |") && md.contains("| first | pass | \\|x\\| < 1 |") && md.contains("- a.csv"));
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x,y\n1,\n");
    }
}
