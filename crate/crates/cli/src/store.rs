use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use hdms_core::crypto::KeyPair;
use hdms_core::ledger::Chain;

/// Exclusive advisory lock on `<chain>.lock`, released on drop.
pub struct ChainLock {
    _file: File,
}

impl ChainLock {
    pub fn acquire(chain: &Path) -> Result<Self> {
        let path = sidecar(chain, "lock");
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .with_context(|| format!("opening lock file {}", path.display()))?;
        file.lock().with_context(|| format!("locking {}", path.display()))?;
        Ok(Self { _file: file })
    }
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".{ext}"));
    path.with_file_name(name)
}

/// Replaces `path` with `bytes` through a temporary sibling and a rename, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = sidecar(path, &format!("tmp{}", std::process::id()));
    let mut f = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}

pub fn load_chain(path: &Path) -> Result<Chain> {
    let bytes = fs::read(path).with_context(|| format!("reading chain {}", path.display()))?;
    Ok(Chain::from_json_slice(&bytes)?)
}

pub fn save_chain(path: &Path, chain: &Chain) -> Result<()> {
    write_atomic(path, chain.to_json().as_bytes())
}

pub fn load_key(path: &Path) -> Result<KeyPair> {
    let bytes = fs::read(path).with_context(|| format!("reading key {}", path.display()))?;
    let kp: KeyPair = serde_json::from_slice(&bytes).with_context(|| format!("parsing key {}", path.display()))?;
    anyhow::ensure!(kp.is_consistent(), "key file {} has mismatched halves", path.display());
    Ok(kp)
}
