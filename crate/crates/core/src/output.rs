//! Artifact persistence: CSV documents with `#` metadata headers, and the
//! manifest that lists every file written by a run with its SHA-256.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolve::FieldState;

pub const MANIFEST: &str = "manifest.json";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// The single writer through which a run stores its files; safe to share
/// between threads.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    mode: String,
    files: Mutex<BTreeMap<String, FileEntry>>,
}

impl ArtifactWriter {
    /// Creates `root` and removes any manifest left by an earlier run, so a
    /// crashed run never leaves a stale "complete" manifest behind.
    pub fn create(root: &Path, mode: &str) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::Io(format!("cannot create {}: {e}", root.display())))?;
        match fs::remove_file(root.join(MANIFEST)) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(Error::Io(format!("cannot clear old manifest: {e}"))),
        }
        Ok(Self {
            root: root.to_path_buf(),
            mode: mode.to_string(),
            files: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        if name.is_empty() || name == MANIFEST || Path::new(name).is_absolute() || name.contains("..") {
            return Err(Error::Usage(format!("invalid artifact name `{name}`")));
        }
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
        let entry = FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents),
            bytes: contents.len() as u64,
        };
        self.files
            .lock()
            .expect("manifest lock poisoned")
            .insert(name.to_string(), entry);
        Ok(path)
    }

    /// Writes `manifest.json` with files sorted by path.
    pub fn finish(self, status: Status, error: Option<String>) -> Result<Manifest> {
        let manifest = Manifest {
            tool: "barotropic-ns".into(),
            version: VERSION.into(),
            mode: self.mode,
            status,
            error,
            files: self
                .files
                .into_inner()
                .expect("manifest lock poisoned")
                .into_values()
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.root.join(MANIFEST), text)?;
        Ok(manifest)
    }
}

/// Shortest round-trip representation, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Builds a CSV document: `# key: value` metadata lines, a header row, then
/// one line per row.
pub fn csv_document<I, R>(meta: &[(String, String)], columns: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut s = String::new();
    let _ = writeln!(s, "# barotropic-ns {VERSION}");
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}: {v}");
    }
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|&x| fmt_num(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// Parses the numeric body of a CSV document written by [`csv_document`],
/// returning the header and the rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Usage("CSV document has no header".into()))?;
    let header: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, line) in lines {
        let row = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Usage(format!("line {}: {e}", i + 1)))?;
        if row.len() != header.len() {
            return Err(Error::Usage(format!(
                "line {}: expected {} columns, found {}",
                i + 1,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn state_csv(s: &FieldState, meta: &[(String, String)]) -> String {
    let mut meta = meta.to_vec();
    meta.push(("t".into(), fmt_num(s.t)));
    meta.push(("N".into(), s.n().to_string()));
    csv_document(
        &meta,
        &["x", "u", "v"],
        s.grid.iter().zip(&s.u).zip(&s.v).map(|((&x, &u), &v)| [x, u, v]),
    )
}

/// Reads a state written by [`state_csv`]; the time is taken from the `t`
/// metadata line when present.
pub fn load_state(path: &Path) -> Result<FieldState> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    let (header, rows) = parse_csv(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
    if header != ["x", "u", "v"] {
        return Err(Error::Usage(format!(
            "{}: expected columns x,u,v, found {}",
            path.display(),
            header.join(",")
        )));
    }
    let t = text
        .lines()
        .find_map(|l| l.strip_prefix("# t: "))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0.0);
    let s = FieldState {
        grid: rows.iter().map(|r| r[0]).collect(),
        u: rows.iter().map(|r| r[1]).collect(),
        v: rows.iter().map(|r| r[2]).collect(),
        t,
    };
    s.check_shape()?;
    Ok(s)
}
