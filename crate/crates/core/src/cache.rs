//! On-disk closure cache keyed by a digest of the generator set.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{ClosureResult, PhaseGroupElement};
use crate::module::ModuleSpace;

const MAGIC: &str = "phaseforge-closure v1";

/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "PHASEFORGE_CACHE_DIR";

/// sha256 over the sorted, length-prefixed generator keys and the cap.
pub fn generator_digest(generators: &[PhaseGroupElement], cap: usize) -> String {
    let mut keys: Vec<Vec<u8>> = generators.iter().map(|g| g.key()).collect();
    keys.sort();
    keys.dedup();
    let mut h = Sha256::new();
    for k in &keys {
        h.update((k.len() as u64).to_le_bytes());
        h.update(k);
    }
    h.update((cap as u64).to_le_bytes());
    hex::encode(h.finalize())
}

fn header(space: &ModuleSpace, digest: &str, cap: usize) -> String {
    format!(
        "ring={} n={} cap={cap} generators={digest}",
        space.ring().spec(),
        space.rank()
    )
}

pub fn cache_path(dir: &Path, digest: &str) -> PathBuf {
    dir.join(format!("closure-{digest}.txt"))
}

/// Stored closure elements and whether the stored run reached a fixpoint.
pub fn load(
    dir: &Path,
    space: &Arc<ModuleSpace>,
    digest: &str,
    cap: usize,
) -> Result<Option<(Vec<PhaseGroupElement>, bool)>> {
    let path = cache_path(dir, digest);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(&path, e)),
    };
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) || lines.next() != Some(header(space, digest, cap).as_str()) {
        // stale or foreign file: ignore rather than trust it
        return Ok(None);
    }
    let fixpoint = match lines.next() {
        Some("fixpoint=true") => true,
        Some("fixpoint=false") => false,
        _ => return Ok(None),
    };
    let elements = lines
        .map(|l| {
            let key = hex::decode(l.trim())
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            PhaseGroupElement::from_key(space, &key)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some((elements, fixpoint)))
}

pub fn store(dir: &Path, digest: &str, cap: usize, closure: &ClosureResult) -> Result<PathBuf> {
    let space = match closure.elements.first() {
        Some(g) => g.space().clone(),
        None => return Err(Error::Inadmissible("empty closure".into())),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "{}", header(&space, digest, cap)).unwrap();
    writeln!(out, "fixpoint={}", closure.reached_fixpoint).unwrap();
    for g in &closure.elements {
        writeln!(out, "{}", hex::encode(g.key())).unwrap();
    }
    let path = cache_path(dir, digest);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, out).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
