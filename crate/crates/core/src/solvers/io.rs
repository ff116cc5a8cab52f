//! Trajectory output: a manifest `# traj v1 eq=<kind> K=<steps> tau=<τ>`
//! with rows `k t_k file`, and one spectral field file per node.

use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::fsio::write_atomic;
use crate::spectral::write_field;

pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub index: usize,
    pub time: f64,
    pub file: PathBuf,
}

/// Writes every node of `traj` into `dir` (created if missing) and returns
/// the manifest path.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let width = traj.len().to_string().len().max(4);
    let mut names = Vec::with_capacity(traj.len());
    for (k, state) in traj.states().iter().enumerate() {
        let name = format!("state_{k:0width$}.txt");
        write_atomic(&dir.join(&name), |w| write_field(state, w))?;
        names.push(name);
    }
    let manifest = dir.join(MANIFEST_NAME);
    let tau = traj.times().last().copied().unwrap_or(0.0);
    write_atomic(&manifest, |w| {
        writeln!(
            w,
            "# traj v1 eq={} K={} tau={:e} repr={:?}",
            traj.context().equation(),
            traj.len() - 1,
            tau,
            traj.representation()
        )?;
        for ((k, t), name) in traj.times().iter().enumerate().zip(&names) {
            writeln!(w, "{k} {t:e} {name}")?;
        }
        Ok(())
    })?;
    Ok(manifest)
}

/// Parses a manifest; file paths are returned relative to the manifest.
pub fn read_trajectory_manifest<R: BufRead>(input: R) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    let mut saw_header = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let parse = |message: String| Error::Parse { line: lineno, message };
        if !saw_header {
            if !line.starts_with("# traj v1 ") {
                return Err(parse("missing '# traj v1' header".into()));
            }
            saw_header = true;
            continue;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        let [k, t, file] = cols[..] else {
            return Err(parse(format!("expected 'k t file', got '{line}'")));
        };
        let index: usize = k.parse().map_err(|_| parse(format!("bad node index '{k}'")))?;
        let time: f64 = t.parse().map_err(|_| parse(format!("bad time '{t}'")))?;
        if index != entries.len() {
            return Err(parse(format!("node index {index} out of order")));
        }
        entries.push(ManifestEntry { index, time, file: PathBuf::from(file) });
    }
    if !saw_header {
        return Err(Error::Parse { line: 0, message: "empty manifest".into() });
    }
    Ok(entries)
}
