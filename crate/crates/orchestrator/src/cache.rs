//! On-disk artifact cache.
//!
//! One file per artifact: the magic line, one JSON header line, then the
//! payload as little-endian `f64`. The file name carries the artifact kind,
//! its κ and a hash of the inputs it depends on; the header repeats the full
//! inputs so a hash collision is detected rather than served.

use crate::error::{Error, Result};
use gbse_core::dirac::RadialSpectrum;
use gbse_core::mp_assembly::{Diagnostics, PartialWaveResult};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

pub const MAGIC: &[u8] = b"GBSECACHE1\n";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const MAX_HEADER: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub tool_version: String,
    pub kind: String,
    pub kappa: Option<i32>,
    /// Inputs the artifact depends on.
    pub inputs: Value,
    /// Non-array parts of the artifact.
    pub meta: Value,
    pub payload_len: usize,
    pub payload_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub header: CacheHeader,
    pub payload: Vec<f64>,
}

fn payload_bytes(p: &[f64]) -> Vec<u8> {
    p.iter().flat_map(|x| x.to_le_bytes()).collect()
}

impl CacheEntry {
    pub fn new(kind: &str, kappa: Option<i32>, inputs: Value, meta: Value, payload: Vec<f64>) -> Self {
        let sha = hex::encode(Sha256::digest(payload_bytes(&payload)));
        let header = CacheHeader {
            tool_version: TOOL_VERSION.into(),
            kind: kind.into(),
            kappa,
            inputs,
            meta,
            payload_len: payload.len(),
            payload_sha256: sha,
        };
        Self { header, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend(serde_json::to_vec(&self.header).expect("header serializes"));
        out.push(b'\n');
        out.extend(payload_bytes(&self.payload));
        out
    }
}

pub fn decode(bytes: &[u8]) -> Result<CacheEntry> {
    let bad = |m: &str| Error::Cache(m.into());
    let rest = bytes.strip_prefix(MAGIC).ok_or_else(|| bad("bad magic"))?;
    let nl = rest.iter().take(MAX_HEADER).position(|&b| b == b'\n').ok_or_else(|| bad("unterminated header"))?;
    let header: CacheHeader = serde_json::from_slice(&rest[..nl]).map_err(|e| Error::Cache(format!("header: {e}")))?;
    let body = &rest[nl + 1..];
    if header.payload_len.checked_mul(8) != Some(body.len()) {
        return Err(Error::Cache(format!("payload is {} bytes, header says {} values", body.len(), header.payload_len)));
    }
    if hex::encode(Sha256::digest(body)) != header.payload_sha256 {
        return Err(bad("payload checksum mismatch"));
    }
    let payload = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(CacheEntry { header, payload })
}

/// Values that can round-trip through a cache entry.
pub trait Cacheable: Sized {
    const KIND: &'static str;
    fn kappa(&self) -> Option<i32>;
    fn to_parts(&self) -> (Value, Vec<f64>);
    fn from_parts(meta: &Value, payload: &[f64]) -> Result<Self>;
}

#[derive(Serialize, Deserialize)]
struct SpectrumMeta {
    kappa: i32,
    z: f64,
    spec: gbse_core::basis::BasisSpec,
    dim: usize,
    states: usize,
}

impl Cacheable for RadialSpectrum {
    const KIND: &'static str = "spectrum";

    fn kappa(&self) -> Option<i32> {
        Some(self.kappa)
    }

    fn to_parts(&self) -> (Value, Vec<f64>) {
        let meta = SpectrumMeta { kappa: self.kappa, z: self.z, spec: self.spec, dim: self.dim, states: self.energies.len() };
        let mut p = self.energies.clone();
        p.extend_from_slice(&self.coeffs);
        (serde_json::to_value(meta).expect("meta serializes"), p)
    }

    fn from_parts(meta: &Value, payload: &[f64]) -> Result<Self> {
        let m: SpectrumMeta = serde_json::from_value(meta.clone())?;
        if m.states.checked_mul(m.dim.checked_add(1).unwrap_or(usize::MAX)) != Some(payload.len()) {
            return Err(Error::Cache("spectrum payload has the wrong length".into()));
        }
        Ok(Self {
            kappa: m.kappa,
            z: m.z,
            spec: m.spec,
            energies: payload[..m.states].to_vec(),
            coeffs: payload[m.states..].to_vec(),
            dim: m.dim,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct RowMeta {
    kappa: i32,
    diagnostics: Diagnostics,
}

impl Cacheable for PartialWaveResult {
    const KIND: &'static str = "mp";

    fn kappa(&self) -> Option<i32> {
        Some(self.kappa)
    }

    fn to_parts(&self) -> (Value, Vec<f64>) {
        let meta = RowMeta { kappa: self.kappa, diagnostics: self.diagnostics.clone() };
        (serde_json::to_value(meta).expect("meta serializes"), vec![self.e_bound, self.e_zero, self.e_one, self.e_mp])
    }

    fn from_parts(meta: &Value, payload: &[f64]) -> Result<Self> {
        let m: RowMeta = serde_json::from_value(meta.clone())?;
        let [e_bound, e_zero, e_one, e_mp] = payload else {
            return Err(Error::Cache("row payload must hold four values".into()));
        };
        Ok(Self { kappa: m.kappa, e_bound: *e_bound, e_zero: *e_zero, e_one: *e_one, e_mp: *e_mp, diagnostics: m.diagnostics })
    }
}

/// A single scalar such as a momentum-space term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalar(pub f64);

impl Cacheable for Scalar {
    const KIND: &'static str = "scalar";

    fn kappa(&self) -> Option<i32> {
        None
    }

    fn to_parts(&self) -> (Value, Vec<f64>) {
        (Value::Null, vec![self.0])
    }

    fn from_parts(_: &Value, payload: &[f64]) -> Result<Self> {
        match payload {
            [x] => Ok(Self(*x)),
            _ => Err(Error::Cache("scalar payload must hold one value".into())),
        }
    }
}

#[derive(Debug)]
pub struct Cache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, hits: AtomicUsize::new(0), misses: AtomicUsize::new(0) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    fn path(&self, name: &str, kappa: Option<i32>, inputs: &Value) -> PathBuf {
        let h = Sha256::new_with_prefix(TOOL_VERSION).chain_update(inputs.to_string());
        let hash = hex::encode(&h.finalize()[..8]);
        let k = kappa.map(|k| format!("_k{k}")).unwrap_or_default();
        self.dir.join(format!("{name}{k}_{hash}.gbc"))
    }

    /// Return the cached artifact for `inputs`, or compute and store it.
    ///
    /// `name` distinguishes artifacts of one kind, e.g. spectrum families.
    pub fn get_or_compute<T: Cacheable>(
        &self,
        name: &str,
        kappa: Option<i32>,
        inputs: &impl Serialize,
        compute: impl FnOnce() -> Result<T>,
    ) -> Result<T> {
        let inputs = serde_json::to_value(inputs)?;
        let path = self.path(name, kappa, &inputs);
        if let Some(v) = self.load::<T>(&path, &inputs) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            log::info!("cache hit {}", path.display());
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        log::debug!("cache miss {}", path.display());
        let v = compute()?;
        let (meta, payload) = v.to_parts();
        let entry = CacheEntry::new(T::KIND, kappa, inputs, meta, payload);
        self.write_atomic(&path, &entry.encode())?;
        Ok(v)
    }

    fn load<T: Cacheable>(&self, path: &Path, inputs: &Value) -> Option<T> {
        let bytes = std::fs::read(path).ok()?;
        let entry = match decode(&bytes) {
            Ok(e) => e,
            Err(e) => {
                log::warn!("ignoring unreadable cache file {}: {e}", path.display());
                return None;
            }
        };
        let h = &entry.header;
        if h.tool_version != TOOL_VERSION || h.kind != T::KIND || &h.inputs != inputs {
            log::warn!("ignoring cache file {} written for different inputs", path.display());
            return None;
        }
        match T::from_parts(&h.meta, &entry.payload) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("ignoring malformed cache file {}: {e}", path.display());
                None
            }
        }
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        static SEQ: AtomicUsize = AtomicUsize::new(0);
        let tmp = path.with_extension(format!("tmp{}.{}", std::process::id(), SEQ.fetch_add(1, Ordering::Relaxed)));
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_round_trip() {
        let e = CacheEntry::new("scalar", Some(-3), serde_json::json!({"a": 1}), Value::Null, vec![1.5, -0.0, f64::MIN_POSITIVE]);
        let d = decode(&e.encode()).unwrap();
        assert_eq!(d.header, e.header);
        assert_eq!(d.payload.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), e.payload.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn corrupt_entries_are_rejected() {
        let bytes = CacheEntry::new("scalar", None, Value::Null, Value::Null, vec![2.0]).encode();
        assert!(decode(&bytes[1..]).is_err());
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut flipped = bytes.clone();
        *flipped.last_mut().unwrap() ^= 1;
        assert!(matches!(decode(&flipped), Err(Error::Cache(m)) if m.contains("checksum")));
        assert!(decode(MAGIC).is_err());
    }

    #[test]
    fn row_parts_round_trip() {
        let r = PartialWaveResult::new(4, 1.0, 0.25, 0.125);
        let (m, p) = r.to_parts();
        assert_eq!(PartialWaveResult::from_parts(&m, &p).unwrap(), r);
        assert!(PartialWaveResult::from_parts(&m, &p[..3]).is_err());
    }
}
