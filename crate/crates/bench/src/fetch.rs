//! Download of the two real-world test matrices.
//!
//! Files are cached under `$KRYLOV_MATRIX_DIR` (default `data/matrices`).
//! Each download writes `<name>.mtx` plus a `<name>.mtx.sha256` sidecar; later
//! loads through [`locate`] refuse a file whose digest no longer matches.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use sha2::{Digest, Sha256};

use crate::BenchError;

pub const MATRIX_DIR_ENV: &str = "KRYLOV_MATRIX_DIR";
pub const DEFAULT_MATRIX_DIR: &str = "data/matrices";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KnownMatrix {
    pub name: &'static str,
    pub n: usize,
    pub url: &'static str,
}

pub const KNOWN_MATRICES: [KnownMatrix; 2] = [
    KnownMatrix {
        name: "bcsstk20",
        n: 485,
        url: "https://sparse.tamu.edu/MM/HB/bcsstk20.tar.gz",
    },
    KnownMatrix {
        name: "plat1919",
        n: 1919,
        url: "https://sparse.tamu.edu/MM/HB/plat1919.tar.gz",
    },
];

pub fn matrix_dir() -> PathBuf {
    std::env::var_os(MATRIX_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_MATRIX_DIR))
}

pub fn known(name: &str) -> Option<KnownMatrix> {
    KNOWN_MATRICES.iter().copied().find(|m| m.name == name)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".sha256");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |e| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    }
}

/// Checks `path` against its recorded digest, if one was recorded.
pub fn verify(path: &Path) -> Result<(), BenchError> {
    let side = sidecar(path);
    if !side.exists() {
        return Ok(());
    }
    let recorded = fs::read_to_string(&side).map_err(io_err(&side))?;
    let expected = recorded.split_whitespace().next().unwrap_or_default();
    let actual = sha256_hex(&fs::read(path).map_err(io_err(path))?);
    if actual != expected {
        return Err(BenchError::Fetch(format!(
            "{}: sha256 {actual} does not match recorded {expected}",
            path.display()
        )));
    }
    Ok(())
}

/// Path of a fetched matrix in `dir`, or `None` when it has not been fetched.
pub fn locate(dir: &Path, name: &str) -> Result<Option<PathBuf>, BenchError> {
    let path = dir.join(format!("{name}.mtx"));
    if !path.is_file() {
        return Ok(None);
    }
    verify(&path)?;
    Ok(Some(path))
}

/// Pulls `<name>/<name>.mtx` out of a gzipped tarball.
fn extract_mtx<R: Read>(archive: R, name: &str) -> Result<Vec<u8>, BenchError> {
    let mut tar = tar::Archive::new(GzDecoder::new(archive));
    let wanted = format!("{name}.mtx");
    let entries = tar
        .entries()
        .map_err(|e| BenchError::Fetch(format!("{name}: bad archive: {e}")))?;
    for entry in entries {
        let mut entry = entry.map_err(|e| BenchError::Fetch(format!("{name}: bad archive: {e}")))?;
        let is_match = entry
            .path()
            .ok()
            .and_then(|p| p.file_name().map(|f| f == wanted.as_str()))
            .unwrap_or(false);
        if is_match {
            let mut out = Vec::new();
            entry
                .read_to_end(&mut out)
                .map_err(|e| BenchError::Fetch(format!("{name}: {e}")))?;
            return Ok(out);
        }
    }
    Err(BenchError::Fetch(format!("{name}: archive has no {wanted}")))
}

#[derive(Debug, Clone)]
pub struct Fetched {
    pub name: &'static str,
    pub path: PathBuf,
    pub sha256: String,
}

/// Downloads one matrix into `dir` and records its digest.
pub fn fetch(m: KnownMatrix, dir: &Path) -> Result<Fetched, BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let response = ureq::get(m.url)
        .call()
        .map_err(|e| BenchError::Fetch(format!("{}: {e}", m.url)))?;
    let bytes = extract_mtx(response.into_body().into_reader(), m.name)?;
    let csr = stable_krylov::mmio::read_matrix_market(bytes.as_slice()).map_err(|e| {
        BenchError::Matrix {
            path: m.url.to_string(),
            source: e,
        }
    })?;
    if (csr.rows(), csr.cols()) != (m.n, m.n) {
        return Err(BenchError::Fetch(format!(
            "{}: expected {n}x{n}, got {}x{}",
            m.name,
            csr.rows(),
            csr.cols(),
            n = m.n
        )));
    }
    let path = dir.join(format!("{}.mtx", m.name));
    let digest = sha256_hex(&bytes);
    fs::write(&path, &bytes).map_err(io_err(&path))?;
    let side = sidecar(&path);
    let mut f = fs::File::create(&side).map_err(io_err(&side))?;
    writeln!(f, "{digest}  {}.mtx", m.name).map_err(io_err(&side))?;
    Ok(Fetched {
        name: m.name,
        path,
        sha256: digest,
    })
}
