//! On-disk feature cache: one `BVQF` file per (video, kind, extractor hash).
//!
//! Layout, all little-endian: magic `BVQF`, u32 version, u32 length + kind
//! name, u32 length + video id, u32 dim, `dim` f32 values.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fusion::{sanitize, FeatureKind, FeatureVector};

pub const CACHE_MAGIC: &[u8; 4] = b"BVQF";
pub const CACHE_VERSION: u32 = 1;

pub fn encode(feature: &FeatureVector) -> Vec<u8> {
    let kind = feature.kind.name().as_bytes();
    let id = feature.video_id.as_bytes();
    let mut out = Vec::with_capacity(20 + kind.len() + id.len() + 4 * feature.values.len());
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    for s in [kind, id] {
        out.extend_from_slice(&(s.len() as u32).to_le_bytes());
        out.extend_from_slice(s);
    }
    out.extend_from_slice(&(feature.values.len() as u32).to_le_bytes());
    for &v in &feature.values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn bytes(&mut self, n: usize) -> Result<&[u8]> {
        if self.0.len() < n {
            return Err(Error::Format("truncated feature cache entry".into()));
        }
        let (head, tail) = self.0.split_at(n);
        self.0 = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.bytes(n)?.to_vec()).map_err(|_| Error::Format("cache string is not UTF-8".into()))
    }
}

pub fn decode(bytes: &[u8]) -> Result<FeatureVector> {
    let mut r = Reader(bytes);
    if r.bytes(4)? != CACHE_MAGIC {
        return Err(Error::Format("not a BVQF feature file".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Format(format!("unsupported cache version {version}")));
    }
    let kind: FeatureKind = r.string()?.parse()?;
    let video_id = r.string()?;
    let dim = r.u32()? as usize;
    if r.0.len() != 4 * dim {
        return Err(Error::Format(format!("cache body holds {} bytes, expected {}", r.0.len(), 4 * dim)));
    }
    let values = r
        .0
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    FeatureVector::new(kind, video_id, values)
}

/// Directory of cached features, keyed by video id, kind and a version hash.
#[derive(Clone, Debug)]
pub struct FeatureCache {
    pub dir: PathBuf,
}

impl FeatureCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FeatureCache { dir: dir.into() }
    }

    pub fn path(&self, video_id: &str, kind: FeatureKind, version_hash: &str) -> PathBuf {
        self.dir
            .join(kind.name())
            .join(format!("{}.{version_hash}.bvqf", sanitize(video_id)))
    }

    /// A valid entry for exactly this key, or `None` (missing, corrupt or mismatched).
    pub fn get(&self, video_id: &str, kind: FeatureKind, version_hash: &str) -> Option<FeatureVector> {
        let path = self.path(video_id, kind, version_hash);
        let bytes = std::fs::read(&path).ok()?;
        match decode(&bytes) {
            Ok(f) if f.kind == kind && f.video_id == video_id => Some(f),
            Ok(_) => {
                log::warn!("{}: cache entry key mismatch", path.display());
                None
            }
            Err(e) => {
                log::warn!("{}: {e}", path.display());
                None
            }
        }
    }

    /// Atomically writes the entry (temporary file, then rename).
    pub fn put(&self, feature: &FeatureVector, version_hash: &str) -> Result<PathBuf> {
        let path = self.path(&feature.video_id, feature.kind, version_hash);
        let dir = path.parent().expect("cache path has a parent");
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        let write = || -> std::io::Result<()> {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(&encode(feature))?;
            f.sync_all()?;
            std::fs::rename(&tmp, &path)
        };
        write().map_err(|e| {
            let _ = std::fs::remove_file(&tmp);
            Error::io(&path, e)
        })?;
        Ok(path)
    }
}

pub fn read_file(path: &Path) -> Result<FeatureVector> {
    decode(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureVector {
        let values = (0..224).map(|i| (i as f32 * 0.37).sin() as f64).collect();
        FeatureVector::new(FeatureKind::Saliency, "clip/α 1", values).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let back = decode(&encode(&f)).unwrap();
        assert_eq!(back.kind, f.kind);
        assert_eq!(back.video_id, f.video_id);
        assert!(back.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(encode(&back), encode(&f));
    }

    #[test]
    fn corrupt_entries_rejected() {
        let bytes = encode(&sample());
        assert!(decode(&bytes[..bytes.len() - 2]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut bad_dim = bytes;
        let at = bad_dim.len() - 224 * 4 - 4;
        bad_dim[at..at + 4].copy_from_slice(&10u32.to_le_bytes());
        assert!(decode(&bad_dim).is_err());
    }

    #[test]
    fn put_get_and_version_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FeatureCache::new(dir.path());
        let f = sample();
        let p = cache.put(&f, "abc").unwrap();
        assert!(p.exists());
        assert_eq!(cache.get(&f.video_id, f.kind, "abc").unwrap(), f);
        assert!(cache.get(&f.video_id, f.kind, "abd").is_none());
        std::fs::write(&p, b"junk").unwrap();
        assert!(cache.get(&f.video_id, f.kind, "abc").is_none());
    }
}
