//! Artifact files, the run manifest and the non-finite scan.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

/// One output file, held in memory until the run succeeds.
#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
    /// Column holding the time coordinate, for CSVs scanned for blow-ups.
    pub time_column: Option<usize>,
}

impl Artifact {
    pub fn csv(name: &str, time_column: usize, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> CliResult<Self> {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        Ok(Self {
            name: name.into(),
            bytes,
            time_column: Some(time_column),
        })
    }

    pub fn json<S: Serialize>(name: &str, value: &S) -> CliResult<Self> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::from)?;
        bytes.push(b'\n');
        Ok(Self {
            name: name.into(),
            bytes,
            time_column: None,
        })
    }

    pub fn text(name: &str, text: String) -> Self {
        Self {
            name: name.into(),
            bytes: text.into_bytes(),
            time_column: None,
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }

    /// First data row containing a non-finite value, with the time of the
    /// row before it.
    pub fn first_non_finite(&self) -> Option<(usize, Option<f64>)> {
        let col = self.time_column?;
        let text = std::str::from_utf8(&self.bytes).ok()?;
        let mut last_good = None;
        for (i, line) in text.lines().enumerate().skip(1) {
            let bad = line.split(',').any(|f| {
                let f = f.trim();
                f.parse::<f64>().is_ok_and(|x| !x.is_finite()) || f.eq_ignore_ascii_case("nan")
            });
            if bad {
                return Some((i + 1, last_good));
            }
            last_good = line.split(',').nth(col).and_then(|f| f.trim().parse().ok());
        }
        None
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub config: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub files: Vec<FileEntry>,
    /// Hash over the `name  sha256` lines of `files`, in order.
    pub outputs_sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn outputs_hash(files: &[FileEntry]) -> String {
    let mut h = Sha256::new();
    for f in files {
        h.update(format!("{}  {}\n", f.name, f.sha256));
    }
    hex::encode(h.finalize())
}

/// Rejects non-finite CSV rows before anything touches the disk.
pub fn check_finite(artifacts: &[Artifact]) -> CliResult<()> {
    for a in artifacts {
        if let Some((line, last_good)) = a.first_non_finite() {
            return Err(CliError::Numeric {
                message: format!("non-finite value in {} at line {line}", a.name),
                last_good_time: last_good,
            });
        }
    }
    Ok(())
}

/// Makes `dir` ready for a run: files listed by an earlier manifest are
/// removed, anything else present is refused so that the new manifest covers
/// every file in the directory.
pub fn prepare_dir(dir: &Path) -> CliResult<()> {
    if !dir.exists() {
        fs::create_dir_all(dir)?;
        return Ok(());
    }
    if !dir.is_dir() {
        return Err(CliError::config(format!("{} is not a directory", dir.display())));
    }
    let previous: Vec<String> = match fs::read(dir.join(MANIFEST)) {
        Ok(bytes) => match serde_json::from_slice::<Manifest>(&bytes) {
            Ok(m) => m.files.into_iter().map(|f| f.name).chain([MANIFEST.to_string()]).collect(),
            Err(_) => Vec::new(),
        },
        Err(_) => Vec::new(),
    };
    let mut foreign = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if !previous.contains(&name) {
            foreign.push(name);
        }
    }
    if !foreign.is_empty() {
        foreign.sort();
        return Err(CliError::config(format!(
            "output directory {} holds files not produced by a previous run: {}",
            dir.display(),
            foreign.join(", ")
        )));
    }
    for name in previous {
        match fs::remove_file(dir.join(&name)) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Writes the artifacts, then the manifest describing them.
pub fn write_all(dir: &Path, artifacts: &[Artifact], mut manifest: Manifest) -> CliResult<Manifest> {
    manifest.files = artifacts
        .iter()
        .map(|a| FileEntry {
            name: a.name.clone(),
            bytes: a.bytes.len() as u64,
            sha256: a.sha256(),
        })
        .collect();
    manifest.outputs_sha256 = outputs_hash(&manifest.files);
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::from)?;
    bytes.push(b'\n');
    fs::write(dir.join(MANIFEST), bytes)?;
    Ok(manifest)
}

/// Gnuplot recipe: shared preamble plus one `plot` command per entry.
pub struct Gnuplot {
    lines: Vec<String>,
}

impl Gnuplot {
    pub fn new() -> Self {
        Self {
            lines: vec![
                "# gnuplot recipe; run `gnuplot -p plot.gp` in this directory".into(),
                "set datafile separator ','".into(),
                "set key outside right".into(),
                "set grid".into(),
            ],
        }
    }

    pub fn line(mut self, s: impl Into<String>) -> Self {
        self.lines.push(s.into());
        self
    }

    pub fn finish(self) -> Artifact {
        let mut text = self.lines.join("\n");
        text.push('\n');
        Artifact::text("plot.gp", text)
    }
}

impl Default for Gnuplot {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_first_non_finite_row() {
        let a = Artifact {
            name: "x.csv".into(),
            bytes: b"t,v\n0.0,1.0\n0.5,2.0\n1.0,NaN\n1.5,inf\n".to_vec(),
            time_column: Some(0),
        };
        assert_eq!(a.first_non_finite(), Some((4, Some(0.5))));
        let ok = Artifact {
            bytes: b"t,v\n0.0,1.0\n".to_vec(),
            ..a
        };
        assert_eq!(ok.first_non_finite(), None);
    }

    #[test]
    fn outputs_hash_depends_on_names_and_contents() {
        let f = |n: &str, h: &str| FileEntry {
            name: n.into(),
            bytes: 0,
            sha256: h.into(),
        };
        let a = outputs_hash(&[f("a", "00"), f("b", "11")]);
        assert_eq!(a, outputs_hash(&[f("a", "00"), f("b", "11")]));
        assert_ne!(a, outputs_hash(&[f("a", "00"), f("b", "12")]));
        assert_ne!(a, outputs_hash(&[f("c", "00"), f("b", "11")]));
    }
}
