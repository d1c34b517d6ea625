//! Binary trajectory dump. All integers and floats little-endian.
//!
//! ```text
//! header
//!   magic        8 bytes  "NVDNPTRJ"
//!   version      u32      1
//!   flags        u32      bit 0: frames carry A_z
//!   config_hash  32 bytes SHA-256 of the canonical scenario JSON
//!   n_spins      u64
//!   n_frames     u64
//!   dt           f64      μs
//! frame (repeated n_frames times)
//!   time         f64      μs
//!   n_swaps      u32
//!   swaps        u32 × n_swaps
//!   g            (re f64, im f64) × n_spins     rad·μs⁻¹
//!   az           f64 × n_spins                  only if flags bit 0
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{CouplingTrajectory, Frame};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"NVDNPTRJ";
const VERSION: u32 = 1;
const HAS_AZ: u32 = 1;

pub fn write_trajectory(path: impl AsRef<Path>, traj: &CouplingTrajectory) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    encode(&mut w, traj)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<CouplingTrajectory> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode(&mut BufReader::new(file)).map_err(|e| match e.kind() {
        std::io::ErrorKind::InvalidData => Error::Parse {
            what: path.display().to_string(),
            message: e.to_string(),
        },
        _ => Error::io(path, e),
    })
}

fn encode<W: Write>(w: &mut W, traj: &CouplingTrajectory) -> std::io::Result<()> {
    let has_az = traj.frames.first().is_some_and(|f| f.az.is_some());
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(if has_az { HAS_AZ } else { 0 }).to_le_bytes())?;
    w.write_all(&traj.config_hash)?;
    w.write_all(&(traj.n_spins as u64).to_le_bytes())?;
    w.write_all(&(traj.frames.len() as u64).to_le_bytes())?;
    w.write_all(&traj.dt.to_le_bytes())?;
    for f in &traj.frames {
        w.write_all(&f.time.to_le_bytes())?;
        w.write_all(&(f.swaps.len() as u32).to_le_bytes())?;
        for s in &f.swaps {
            w.write_all(&s.to_le_bytes())?;
        }
        for g in &f.g {
            w.write_all(&g.re.to_le_bytes())?;
            w.write_all(&g.im.to_le_bytes())?;
        }
        if has_az {
            for a in f.az.as_deref().unwrap_or(&[]) {
                w.write_all(&a.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, msg.into())
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn decode<R: Read>(r: &mut R) -> std::io::Result<CouplingTrajectory> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not a trajectory dump (bad magic)"));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(invalid(format!("unsupported dump version {version}")));
    }
    let has_az = read_u32(r)? & HAS_AZ != 0;
    let mut config_hash = [0u8; 32];
    r.read_exact(&mut config_hash)?;
    let n_spins = read_u64(r)? as usize;
    let n_frames = read_u64(r)? as usize;
    let dt = read_f64(r)?;
    let mut frames = Vec::with_capacity(n_frames.min(1 << 20));
    for _ in 0..n_frames {
        let time = read_f64(r)?;
        let n_swaps = read_u32(r)? as usize;
        let swaps = (0..n_swaps).map(|_| read_u32(r)).collect::<std::io::Result<Vec<_>>>()?;
        if swaps.iter().any(|&s| s as usize >= n_spins) {
            return Err(invalid("swap index out of range"));
        }
        let g = (0..n_spins)
            .map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?)))
            .collect::<std::io::Result<Vec<_>>>()?;
        let az = if has_az {
            Some((0..n_spins).map(|_| read_f64(r)).collect::<std::io::Result<Vec<_>>>()?)
        } else {
            None
        };
        frames.push(Frame { time, swaps, g, az });
    }
    Ok(CouplingTrajectory {
        dt,
        n_spins,
        config_hash,
        frames,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::generate_trajectory;
    use crate::config::RawConfig;

    #[test]
    fn round_trip_is_exact() {
        let mut raw = RawConfig::new(3.2, 0.46, 0.5, 660.0);
        raw.box_length_nm = Some(8.0);
        raw.t_max_us = 5.0;
        raw.detuning_fluctuations = true;
        let cfg = raw.validate().unwrap();
        let traj = generate_trajectory(&cfg, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        write_trajectory(&path, &traj).unwrap();
        let back = read_trajectory(&path).unwrap();
        assert_eq!(back, traj);
    }

    #[test]
    fn rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"definitely not a dump").unwrap();
        assert!(matches!(read_trajectory(&path), Err(Error::Parse { .. })));
    }
}
