use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::ScenarioConfig;

/// Version of the emitted file layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Provenance embedded in every output file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub tool: String,
    pub command: String,
    pub scenario: String,
    pub schema_version: u32,
    pub config_sha256: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(command: &str, cfg: &ScenarioConfig) -> Result<Self> {
        Ok(Self {
            tool: format!("scanprobe {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            scenario: cfg.scenario.clone(),
            schema_version: SCHEMA_VERSION,
            config_sha256: cfg.hash()?,
            seed: cfg.seed,
        })
    }

    fn comment_lines(&self, prefix: &str) -> String {
        format!(
            "{prefix} tool = {}\n{prefix} command = {}\n{prefix} scenario = {}\n{prefix} schema_version = {}\n{prefix} config_sha256 = {}\n{prefix} seed = {}\n",
            self.tool, self.command, self.scenario, self.schema_version, self.config_sha256, self.seed
        )
    }
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

/// A table with a header row, written as CSV.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push<I, D>(&mut self, row: I)
    where
        I: IntoIterator<Item = D>,
        D: Display,
    {
        self.rows.push(row.into_iter().map(|v| v.to_string()).collect());
    }
}

/// Files of one command, staged in a scratch directory and moved into
/// place only when the command succeeds.
pub struct OutputSet {
    root: PathBuf,
    command: String,
    staging: PathBuf,
    meta: Meta,
    files: Vec<String>,
}

impl OutputSet {
    pub fn begin(root: &Path, meta: Meta) -> Result<Self> {
        let staging = root.join(format!(".partial-{}", meta.command));
        if staging.exists() {
            fs::remove_dir_all(&staging).with_context(|| format!("clearing {}", staging.display()))?;
        }
        fs::create_dir_all(&staging).with_context(|| format!("creating {}", staging.display()))?;
        Ok(Self { root: root.to_path_buf(), command: meta.command.clone(), staging, meta, files: Vec::new() })
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.staging.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row)?;
        }
        let body = String::from_utf8(w.into_inner()?)?;
        self.write(name, &format!("{}{body}", self.meta.comment_lines("#")))
    }

    /// Writes CSV text that already has its own header row.
    pub fn write_csv_text(&mut self, name: &str, body: &str) -> Result<()> {
        self.write(name, &format!("{}{body}", self.meta.comment_lines("#")))
    }

    /// Writes `{"meta": …, <fields of value>}`.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(&Wrapped { meta: &self.meta, body: value })?;
        self.write(name, &format!("{text}\n"))
    }

    pub fn write_svg(&mut self, name: &str, svg: &str) -> Result<()> {
        let comment = format!("<!--\n{}-->\n", self.meta.comment_lines(" "));
        let body = match svg.find('>') {
            Some(i) if svg.starts_with("<svg") => format!("{}\n{comment}{}", &svg[..=i], &svg[i + 1..]),
            _ => format!("{comment}{svg}"),
        };
        self.write(name, &body)
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Moves the staged files to `<root>/<command>`, replacing what was
    /// there.
    pub fn commit(self) -> Result<PathBuf> {
        let dest = self.root.join(&self.command);
        if dest.exists() {
            fs::remove_dir_all(&dest).with_context(|| format!("replacing {}", dest.display()))?;
        }
        fs::rename(&self.staging, &dest).with_context(|| format!("moving outputs to {}", dest.display()))?;
        Ok(dest)
    }

    /// Moves whatever was written to `<root>/quarantine/<command>`.
    pub fn quarantine(self) -> Result<PathBuf> {
        let dest = self.root.join("quarantine").join(&self.command);
        if dest.exists() {
            fs::remove_dir_all(&dest)?;
        }
        fs::create_dir_all(dest.parent().unwrap_or(&self.root))?;
        fs::rename(&self.staging, &dest)?;
        Ok(dest)
    }
}

/// Runs `body` against a fresh output set. On failure the partial files
/// are quarantined and the error names their location.
pub fn run_staged<R>(
    cfg: &ScenarioConfig,
    command: &str,
    body: impl FnOnce(&mut OutputSet) -> Result<R>,
) -> Result<(R, PathBuf)> {
    let mut out = OutputSet::begin(&cfg.output_dir, Meta::new(command, cfg)?)?;
    match body(&mut out) {
        Ok(r) => Ok((r, out.commit()?)),
        Err(e) => match out.quarantine() {
            Ok(q) => Err(e.context(format!("{command} failed; partial outputs in {}", q.display()))),
            Err(qe) => Err(e.context(format!("{command} failed; quarantining partial outputs also failed: {qe}"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_in(dir: &Path) -> ScenarioConfig {
        ScenarioConfig { output_dir: dir.to_path_buf(), ..Default::default() }
    }

    #[test]
    fn success_commits_and_embeds_meta() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = cfg_in(tmp.path());
        let (_, dir) = run_staged(&cfg, "demo", |out| {
            let mut t = Table::new(&["a", "b"]);
            t.push([1.5, 2.0]);
            out.write_table("t.csv", &t)?;
            out.write_json("r.json", &serde_json::json!({"x": 1}))?;
            out.write_svg("p.svg", "<svg xmlns=\"http://www.w3.org/2000/svg\"></svg>")
        })
        .unwrap();
        assert_eq!(dir, tmp.path().join("demo"));
        let hash = cfg.hash().unwrap();
        for f in ["t.csv", "r.json", "p.svg"] {
            let text = fs::read_to_string(dir.join(f)).unwrap();
            assert!(text.contains(&hash), "{f}");
            assert!(text.contains("seed"), "{f}");
            assert!(text.contains("schema_version"), "{f}");
        }
        assert!(fs::read_to_string(dir.join("t.csv")).unwrap().ends_with("a,b\n1.5,2\n"));
        assert!(!tmp.path().join(".partial-demo").exists());
    }

    #[test]
    fn failure_quarantines() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = cfg_in(tmp.path());
        let err = run_staged(&cfg, "demo", |out| -> Result<()> {
            out.write_table("half.csv", &Table::new(&["x"]))?;
            anyhow::bail!("boom")
        })
        .unwrap_err();
        assert!(format!("{err:#}").contains("boom"));
        assert!(tmp.path().join("quarantine/demo/half.csv").is_file());
        assert!(!tmp.path().join("demo").exists());
    }
}
