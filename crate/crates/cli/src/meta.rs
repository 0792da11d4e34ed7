use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    }))
}

/// Run description written next to every output as `<out>.meta`.
pub struct Metadata {
    pub command: &'static str,
    pub inputs: Vec<(&'static str, PathBuf)>,
    pub seed: Option<u64>,
    pub config: String,
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

impl Metadata {
    pub fn render(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "tool = hawkes {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "command = {}", self.command);
        let argv: Vec<String> = std::env::args().collect();
        let _ = writeln!(s, "argv = {}", argv.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
            let _ = writeln!(s, "rng = {}", hawkes_core::simulate::RNG_ALGORITHM);
        }
        for (role, path) in &self.inputs {
            let _ = writeln!(s, "input.{role} = {}", path.display());
            let _ = writeln!(s, "input.{role}.sha256 = {}", sha256_file(path)?);
        }
        let _ = writeln!(s, "[config]");
        s.push_str(&self.config);
        if !self.config.ends_with('\n') {
            s.push('\n');
        }
        Ok(s)
    }
}

/// Writes `content` to `out` and the metadata sidecar beside it.
pub fn write_with_sidecar(out: &Path, content: &str, meta: &Metadata) -> Result<()> {
    let sidecar = meta.render()?;
    std::fs::write(out, content).with_context(|| format!("writing {}", out.display()))?;
    let side = sidecar_path(out);
    std::fs::write(&side, sidecar).with_context(|| format!("writing {}", side.display()))?;
    Ok(())
}
