use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use qtmlab_core::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance embedded in every report. Wall time is recorded only when
/// asked for, so that reruns with the same seed stay byte-identical.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub jobs: usize,
    pub guard: usize,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: u64, jobs: usize, guard: usize, timing: bool) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            seed,
            jobs,
            guard,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_s: None,
            started: timing.then(Instant::now),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: format!("{:x}", Sha256::digest(&bytes)) });
        Ok(bytes)
    }

    pub fn read_text(&mut self, path: &Path) -> Result<String> {
        String::from_utf8(self.read(path)?).map_err(|_| Error::Validation(format!("{} is not UTF-8", path.display())))
    }

    pub fn finish(&mut self) {
        if let Some(t) = self.started {
            self.wall_time_s = Some(t.elapsed().as_secs_f64());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digests_inputs_and_omits_time_by_default() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        std::fs::write(&p, b"abc").unwrap();
        let mut m = RunManifest::new(vec!["qtmlab".into()], 7, 1, 10, false);
        m.read(&p).unwrap();
        m.finish();
        assert_eq!(m.inputs[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        let v = serde_json::to_value(&m).unwrap();
        assert!(v.get("wall_time_s").is_none());
        let mut timed = RunManifest::new(vec![], 0, 1, 10, true);
        timed.finish();
        assert!(timed.wall_time_s.is_some());
    }
}
