use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::args::Global;

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Input(_) => 65,
            CliError::Compute(_) => 70,
        }
    }

    /// One JSON object on one line.
    pub fn to_line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Input(m) => ("input", m),
            CliError::Compute(m) => ("computation", m),
        };
        serde_json::json!({ "error": kind, "code": self.code(), "message": msg.replace('\n', " ") }).to_string()
    }
}

impl From<treespace::Error> for CliError {
    fn from(e: treespace::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Compute(e.to_string())
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    argv: &'a [String],
    seed: u64,
    threads: usize,
    config: Option<String>,
    inputs: &'a [String],
    outputs: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    duration_ms: Option<u128>,
}

pub struct Context {
    pub seed: u64,
    pub deterministic: bool,
    argv: Vec<String>,
    threads: usize,
    config: Option<PathBuf>,
    started: Instant,
    inputs: Vec<String>,
    outputs: Vec<String>,
}

impl Context {
    pub fn new(argv: &[OsString], global: &Global) -> Context {
        Context {
            seed: global.seed,
            deterministic: global.deterministic,
            argv: argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
            threads: rayon::current_num_threads(),
            config: global.config.clone(),
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        self.inputs.push(path.display().to_string());
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> CliResult {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)
                .map_err(|e| CliError::Compute(format!("cannot create {}: {e}", dir.display())))?;
        }
        std::fs::write(path, contents).map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes to `path`, or to standard output when no path is given.
    pub fn emit(&mut self, path: Option<&Path>, contents: &[u8]) -> CliResult {
        match path {
            Some(p) => self.write(p, contents),
            None => {
                use std::io::Write;
                std::io::stdout()
                    .write_all(contents)
                    .map_err(|e| CliError::Compute(format!("cannot write output: {e}")))
            }
        }
    }

    /// Note for SVG comments; absent in deterministic runs.
    pub fn svg_note(&self) -> Option<String> {
        if self.deterministic {
            return None;
        }
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Some(format!("generated at unix time {secs}"))
    }

    /// Writes the run manifest to `path` if any file output was produced.
    pub fn finish(mut self, command: &str, path: Option<PathBuf>) -> CliResult {
        let Some(path) = path else { return Ok(()) };
        if self.outputs.is_empty() {
            return Ok(());
        }
        let manifest = RunManifest {
            tool: "treespace",
            version: env!("CARGO_PKG_VERSION"),
            command,
            argv: &self.argv,
            seed: self.seed,
            threads: self.threads,
            config: self.config.as_ref().map(|p| p.display().to_string()),
            inputs: &self.inputs,
            outputs: &self.outputs,
            duration_ms: (!self.deterministic).then(|| self.started.elapsed().as_millis()),
        };
        let text = serde_json::to_string_pretty(&manifest).expect("manifests always serialize") + "\n";
        self.write(&path, text.as_bytes())
    }
}

/// `out.json` → `out.<suffix>`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
