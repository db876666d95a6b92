//! Little-endian binary orbit cache.
//!
//! Header: magic `WLCT`, version `u32`, kind `u8`, level `u32`, conjugator
//! entries (`4` or `8` x `f64`), `T: f64`, count `u64`, covolume `f64`, CRC-64
//! of the body. Body: per point the integer entries (`i64`), `dist: f64` and the
//! Cartan angles (`f64`), in distance order.

use std::fs;
use std::path::Path;

use crc::{Crc, CRC_64_ECMA_182};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LatticeKind, LatticeSpec, OrbitSet};
use crate::error::{CacheErrorKind, Error, Result};
use crate::lie::{GroupElement, GroupSpec};

pub const CACHE_MAGIC: [u8; 4] = *b"WLCT";
pub const CACHE_VERSION: u32 = 1;
const CRC: Crc<u64> = Crc::<u64>::new(&CRC_64_ECMA_182);
const REVALIDATION_TOLERANCE: f64 = 1e-9;

pub fn save_cache(orbit: &OrbitSet, path: &Path) -> Result<()> {
    let bytes = encode(orbit);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_cache(path: &Path) -> Result<OrbitSet> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingCache(path.display().to_string()),
        _ => Error::io(path, e),
    })?;
    decode(&bytes).map_err(|kind| Error::Cache { path: path.to_path_buf(), kind })
}

fn encode(orbit: &OrbitSet) -> Vec<u8> {
    let (kind, level) = orbit.lattice.kind.code();
    let mut body = Vec::with_capacity(orbit.len() * 8 * (1 + orbit.lattice.kind.stride() + orbit.lattice.kind.angle_stride()));
    for p in orbit.iter() {
        for v in p.gamma {
            body.extend_from_slice(&v.to_le_bytes());
        }
        body.extend_from_slice(&p.dist.to_le_bytes());
        for a in p.angles {
            body.extend_from_slice(&a.to_le_bytes());
        }
    }
    let mut out = Vec::with_capacity(body.len() + 96);
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.push(kind);
    out.extend_from_slice(&level.to_le_bytes());
    for b in orbit.lattice.conjugator.blocks() {
        for v in [b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.extend_from_slice(&orbit.t.to_le_bytes());
    out.extend_from_slice(&(orbit.len() as u64).to_le_bytes());
    out.extend_from_slice(&orbit.covolume.to_le_bytes());
    out.extend_from_slice(&CRC.checksum(&body).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], CacheErrorKind> {
        if self.pos + n > self.bytes.len() {
            return Err(CacheErrorKind::Truncated { expected: self.pos + n, found: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> std::result::Result<u32, CacheErrorKind> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> std::result::Result<u64, CacheErrorKind> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> std::result::Result<f64, CacheErrorKind> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(bytes: &[u8]) -> std::result::Result<OrbitSet, CacheErrorKind> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CACHE_MAGIC {
        return Err(CacheErrorKind::BadMagic);
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(CacheErrorKind::VersionMismatch { found: version, expected: CACHE_VERSION });
    }
    let kind_code = r.take(1)?[0];
    let level = r.u32()?;
    let kind = LatticeKind::from_code(kind_code, level)
        .ok_or_else(|| CacheErrorKind::KindMismatch(format!("unknown lattice code {kind_code}")))?;
    let nblocks = if kind.is_product() { 2 } else { 1 };
    let mut blocks = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let e = [r.f64()?, r.f64()?, r.f64()?, r.f64()?];
        blocks.push(DMatrix::from_row_slice(2, 2, &e));
    }
    let spec = if kind.is_product() { GroupSpec::product(&[2, 2]) } else { GroupSpec::sl(2) };
    let conjugator = GroupElement::new(spec, blocks).map_err(|e| CacheErrorKind::KindMismatch(e.to_string()))?;
    let lattice = LatticeSpec::new(kind, conjugator).map_err(|e| CacheErrorKind::KindMismatch(e.to_string()))?;
    let t = r.f64()?;
    let count = r.u64()? as usize;
    let covolume = r.f64()?;
    let stored = r.u64()?;
    let (s, a) = (kind.stride(), kind.angle_stride());
    let record = 8 * (s + 1 + a);
    let body_len = count
        .checked_mul(record)
        .ok_or(CacheErrorKind::Truncated { expected: usize::MAX, found: bytes.len() })?;
    let body = r.take(body_len)?;
    if r.pos != bytes.len() {
        return Err(CacheErrorKind::Truncated { expected: r.pos, found: bytes.len() });
    }
    let computed = CRC.checksum(body);
    if computed != stored {
        return Err(CacheErrorKind::ChecksumMismatch { stored, computed });
    }
    let mut entries = Vec::with_capacity(count * s);
    let mut dists = Vec::with_capacity(count);
    let mut angles = Vec::with_capacity(count * a);
    for rec in body.chunks_exact(record) {
        let mut words = rec.chunks_exact(8);
        for _ in 0..s {
            entries.push(i64::from_le_bytes(words.next().unwrap().try_into().unwrap()));
        }
        dists.push(f64::from_le_bytes(words.next().unwrap().try_into().unwrap()));
        for _ in 0..a {
            angles.push(f64::from_le_bytes(words.next().unwrap().try_into().unwrap()));
        }
    }
    let orbit = OrbitSet { lattice, t, covolume, entries, dists, angles };
    revalidate(&orbit)?;
    Ok(orbit)
}

/// Recomputes the distance of a seeded 1% sample (at least one point).
fn revalidate(orbit: &OrbitSet) -> std::result::Result<(), CacheErrorKind> {
    if orbit.is_empty() {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(orbit.len() as u64 ^ orbit.t.to_bits());
    let n = (orbit.len() / 100).max(1);
    for _ in 0..n {
        let i = rng.random_range(0..orbit.len());
        let recomputed = orbit.recompute_dist(i);
        let stored = orbit.dists()[i];
        if !((recomputed - stored).abs() <= REVALIDATION_TOLERANCE) {
            return Err(CacheErrorKind::Revalidation { index: i, stored, recomputed });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psl.wlct");
        let o = enumerate(&LatticeSpec::psl2z(), 5.0).unwrap();
        save_cache(&o, &path).unwrap();
        let back = load_cache(&path).unwrap();
        assert_eq!(back, o);
        assert_eq!(encode(&back), fs::read(&path).unwrap());
    }

    #[test]
    fn corruption_is_detected() {
        let o = enumerate(&LatticeSpec::psl2z(), 4.0).unwrap();
        let bytes = encode(&o);
        let mut bad = bytes.clone();
        let last = bad.len() - 3;
        bad[last] ^= 0x10;
        assert!(matches!(decode(&bad), Err(CacheErrorKind::ChecksumMismatch { .. })));
        assert!(matches!(decode(&bytes[..bytes.len() - 5]), Err(CacheErrorKind::Truncated { .. })));
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(matches!(decode(&magic), Err(CacheErrorKind::BadMagic)));
        let mut ver = bytes;
        ver[4] = 9;
        assert!(matches!(decode(&ver), Err(CacheErrorKind::VersionMismatch { found: 9, .. })));
    }

    #[test]
    fn forged_distance_fails_revalidation() {
        let mut o = enumerate(&LatticeSpec::psl2z(), 3.0).unwrap();
        o.dists.iter_mut().for_each(|d| *d += 1e-6);
        assert!(matches!(decode(&encode(&o)), Err(CacheErrorKind::Revalidation { .. })));
    }

    #[test]
    fn missing_file() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_cache(&dir.path().join("none")), Err(Error::MissingCache(_))));
    }
}
