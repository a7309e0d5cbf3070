//! Binary checkpoint format.
//!
//! Layout (all integers little-endian):
//!   magic "NCKP" | version u32 | use_case u8 | input u32 | n_hidden u8 |
//!   hidden widths u32... | n_actions u32 | iteration u64 |
//!   policy count u64 | policy params f64... |
//!   value count u64 | value params f64...

use super::{ArchDescriptor, PolicySnapshot};
use crate::error::{Error, Result};
use crate::space::UseCase;
use std::io::{Read, Write};
use std::path::Path;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

fn use_case_tag(u: UseCase) -> u8 {
    match u {
        UseCase::Abr => 0,
        UseCase::Cc => 1,
        UseCase::Lb => 2,
    }
}

fn tag_use_case(t: u8) -> Result<UseCase> {
    match t {
        0 => Ok(UseCase::Abr),
        1 => Ok(UseCase::Cc),
        2 => Ok(UseCase::Lb),
        other => Err(Error::Checkpoint(format!("unknown use-case tag {other}"))),
    }
}

pub fn write_checkpoint(snapshot: &PolicySnapshot, mut w: impl Write) -> Result<()> {
    snapshot.validate()?;
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&[use_case_tag(snapshot.use_case)])?;
    w.write_all(&(snapshot.arch.input_dim as u32).to_le_bytes())?;
    w.write_all(&[snapshot.arch.hidden.len() as u8])?;
    for &h in &snapshot.arch.hidden {
        w.write_all(&(h as u32).to_le_bytes())?;
    }
    w.write_all(&(snapshot.arch.n_actions as u32).to_le_bytes())?;
    w.write_all(&snapshot.iteration.to_le_bytes())?;
    for vec in [&snapshot.params, &snapshot.value_params] {
        w.write_all(&(vec.len() as u64).to_le_bytes())?;
        for p in vec {
            w.write_all(&p.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_checkpoint(mut r: impl Read) -> Result<PolicySnapshot> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let use_case = tag_use_case(read_u8(&mut r)?)?;
    let input_dim = read_u32(&mut r)? as usize;
    let n_hidden = read_u8(&mut r)? as usize;
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(read_u32(&mut r)? as usize);
    }
    let n_actions = read_u32(&mut r)? as usize;
    let iteration = read_u64(&mut r)?;
    let params = read_f64_vec(&mut r)?;
    let value_params = read_f64_vec(&mut r)?;
    let snapshot = PolicySnapshot {
        version,
        use_case,
        arch: ArchDescriptor {
            input_dim,
            hidden,
            n_actions,
        },
        iteration,
        params,
        value_params,
    };
    snapshot.validate()?;
    Ok(snapshot)
}

pub fn save_checkpoint(snapshot: &PolicySnapshot, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(snapshot, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<PolicySnapshot> {
    let data = std::fs::read(path)?;
    read_checkpoint(data.as_slice())
}

fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64_vec(r: &mut impl Read) -> Result<Vec<f64>> {
    let n = read_u64(r)? as usize;
    if n > 100_000_000 {
        return Err(Error::Checkpoint("implausible parameter count".into()));
    }
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}
