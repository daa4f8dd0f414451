//! Disk cache for eigendecompositions and reference curves.
//!
//! One file per key. Layout: a short self-describing text header (magic
//! line, `key=value` lines, `END`), then little-endian f64 blocks. Writes go
//! through a temporary file and an atomic rename, so concurrent writers of
//! the same key are safe.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, ShapeBuilder};
use sha2::{Digest, Sha256};

use crate::eigen::EigenDecomposition;
use crate::error::{EastError, Result};
use crate::operators::{HamiltonianSpec, Regime};

const EIG_MAGIC: &str = "EAST-EIG v1";
const CURVE_MAGIC: &str = "EAST-CURVE v1";

/// Content-hash key of a Hamiltonian spec (first 16 hex chars of SHA-256).
pub fn cache_key(spec: &HamiltonianSpec) -> String {
    let digest = Sha256::digest(spec.key_string().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn eig_path(dir: &Path, spec: &HamiltonianSpec) -> PathBuf {
    dir.join(format!("{}.eig", cache_key(spec)))
}

fn write_f64_block(w: &mut impl Write, data: impl Iterator<Item = f64>) -> std::io::Result<()> {
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64_block(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

fn atomic_write(path: &Path, write_body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Store a decomposition under the spec's key. Returns the file path.
pub fn save_decomposition(
    dir: &Path,
    spec: &HamiltonianSpec,
    decomp: &EigenDecomposition,
) -> Result<PathBuf> {
    let path = eig_path(dir, spec);
    let s_field = match spec.regime() {
        Regime::Limit => "limit".to_string(),
        Regime::FiniteS(s) => format!("{:e}:{:016x}", s, s.to_bits()),
    };
    atomic_write(&path, |w| {
        writeln!(w, "{EIG_MAGIC}")?;
        writeln!(w, "l={}", spec.l())?;
        writeln!(w, "s={s_field}")?;
        writeln!(w, "count={}", decomp.len())?;
        writeln!(w, "complete={}", decomp.is_complete() as u8)?;
        writeln!(w, "END")?;
        write_f64_block(w, decomp.eigenvalues().iter().copied())?;
        for k in 0..decomp.len() {
            write_f64_block(w, decomp.vector(k).iter().copied())?;
        }
        Ok(())
    })?;
    Ok(path)
}

fn parse_header(lines: &[String], magic: &str) -> Result<std::collections::HashMap<String, String>> {
    if lines.first().map(|s| s.as_str()) != Some(magic) {
        return Err(EastError::CacheFormat(format!(
            "bad magic: {:?}",
            lines.first()
        )));
    }
    let mut map = std::collections::HashMap::new();
    for line in &lines[1..] {
        if line == "END" {
            return Ok(map);
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| EastError::CacheFormat(format!("bad header line {line:?}")))?;
        map.insert(k.to_string(), v.to_string());
    }
    Err(EastError::CacheFormat("missing END".into()))
}

fn read_header_lines(r: &mut impl Read) -> Result<Vec<String>> {
    // headers are short; read byte-wise until the END line
    let mut lines = Vec::new();
    let mut current = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte)?;
        if byte[0] == b'\n' {
            let line = String::from_utf8(current.clone())
                .map_err(|_| EastError::CacheFormat("non-utf8 header".into()))?;
            let done = line == "END";
            lines.push(line);
            current.clear();
            if done {
                return Ok(lines);
            }
            if lines.len() > 64 {
                return Err(EastError::CacheFormat("runaway header".into()));
            }
        } else {
            current.push(byte[0]);
        }
    }
}

/// Load a decomposition if a valid cache file for the spec exists.
/// `Ok(None)` when absent; `Err` when present but malformed.
pub fn load_decomposition(
    dir: &Path,
    spec: &HamiltonianSpec,
) -> Result<Option<EigenDecomposition>> {
    let path = eig_path(dir, spec);
    if !path.exists() {
        return Ok(None);
    }
    let mut r = BufReader::new(File::open(&path)?);
    let header = parse_header(&read_header_lines(&mut r)?, EIG_MAGIC)?;
    let l: usize = header
        .get("l")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| EastError::CacheFormat("missing l".into()))?;
    if l != spec.l() {
        return Err(EastError::CacheFormat(format!(
            "cached l={l} does not match requested l={}",
            spec.l()
        )));
    }
    let count: usize = header
        .get("count")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| EastError::CacheFormat("missing count".into()))?;
    let complete = header.get("complete").map(|v| v == "1").unwrap_or(false);
    let n = 1usize << l;
    let eigenvalues = read_f64_block(&mut r, count)?;
    let flat = read_f64_block(&mut r, count * n)?;
    let vectors = Array2::from_shape_vec((n, count).f(), flat)
        .map_err(|_| EastError::CacheFormat("vector block shape".into()))?;
    Ok(Some(EigenDecomposition::new(eigenvalues, vectors, complete)))
}

/// Named float columns with string metadata; the reference-curve format.
#[derive(Debug, Clone)]
pub struct CurveFile {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<(String, Vec<f64>)>,
}

/// Store a reference curve under `name` (plus `.curve`).
pub fn save_curve(dir: &Path, name: &str, curve: &CurveFile) -> Result<PathBuf> {
    let path = dir.join(format!("{name}.curve"));
    let rows = curve.columns.first().map(|(_, v)| v.len()).unwrap_or(0);
    for (label, col) in &curve.columns {
        if col.len() != rows {
            return Err(EastError::CacheFormat(format!(
                "column {label} length {} != {rows}",
                col.len()
            )));
        }
    }
    atomic_write(&path, |w| {
        writeln!(w, "{CURVE_MAGIC}")?;
        for (k, v) in &curve.meta {
            writeln!(w, "meta.{k}={v}")?;
        }
        writeln!(w, "rows={rows}")?;
        writeln!(
            w,
            "columns={}",
            curve
                .columns
                .iter()
                .map(|(n, _)| n.as_str())
                .collect::<Vec<_>>()
                .join(",")
        )?;
        writeln!(w, "END")?;
        for (_, col) in &curve.columns {
            write_f64_block(w, col.iter().copied())?;
        }
        Ok(())
    })?;
    Ok(path)
}

/// Load a reference curve; `Ok(None)` when absent.
pub fn load_curve(dir: &Path, name: &str) -> Result<Option<CurveFile>> {
    let path = dir.join(format!("{name}.curve"));
    if !path.exists() {
        return Ok(None);
    }
    let mut r = BufReader::new(File::open(&path)?);
    let header = parse_header(&read_header_lines(&mut r)?, CURVE_MAGIC)?;
    let rows: usize = header
        .get("rows")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| EastError::CacheFormat("missing rows".into()))?;
    let names: Vec<String> = header
        .get("columns")
        .map(|v| v.split(',').map(|s| s.to_string()).collect())
        .ok_or_else(|| EastError::CacheFormat("missing columns".into()))?;
    let mut columns = Vec::with_capacity(names.len());
    for name in names {
        columns.push((name, read_f64_block(&mut r, rows)?));
    }
    let meta = header
        .iter()
        .filter_map(|(k, v)| {
            k.strip_prefix("meta.")
                .map(|key| (key.to_string(), v.clone()))
        })
        .collect();
    Ok(Some(CurveFile { meta, columns }))
}
