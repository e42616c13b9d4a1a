//! Parameter checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 8     | magic `QTCNNPAR` |
//! | 4     | format version (`u32`, currently 1) |
//! | 32    | SHA-256 of [`NetworkSpec::canonical`] |
//! | 8     | parameter count `n` (`u64`) |
//! | 8·n   | parameters as `f64`, in the flat layout of the network |
//!
//! Nothing follows the last parameter.

use super::{CnnError, Network, NetworkSpec, Result};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"QTCNNPAR";
pub const VERSION: u32 = 1;

pub fn spec_digest(spec: &NetworkSpec) -> [u8; 32] {
    Sha256::digest(spec.canonical().as_bytes()).into()
}

pub fn write_checkpoint<W: Write>(network: &Network, params: &[f64], mut out: W) -> Result<()> {
    if params.len() != network.n_params() {
        return Err(CnnError::ShapeMismatch(format!(
            "expected {} parameters, got {}",
            network.n_params(),
            params.len()
        )));
    }
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&spec_digest(network.spec()))?;
    out.write_all(&(params.len() as u64).to_le_bytes())?;
    for p in params {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

/// Reads parameters for `network`, rejecting files written for a different
/// architecture.
pub fn read_checkpoint<R: Read>(network: &Network, mut input: R) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let bad = |msg: String| Err(CnnError::Checkpoint(msg));
    let header = 8 + 4 + 32 + 8;
    if bytes.len() < header {
        return bad(format!("{} bytes is shorter than the header", bytes.len()));
    }
    if &bytes[..8] != MAGIC {
        return bad("wrong magic".into());
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return bad(format!("unsupported version {version}"));
    }
    if bytes[12..44] != spec_digest(network.spec()) {
        return bad(format!(
            "written for a different network than {}",
            network.spec().canonical()
        ));
    }
    let n = u64::from_le_bytes(bytes[44..52].try_into().unwrap());
    if n != network.n_params() as u64 {
        return bad(format!("{n} parameters, network has {}", network.n_params()));
    }
    let payload = &bytes[header..];
    if payload.len() as u64 != 8 * n {
        return bad(format!("payload is {} bytes, expected {}", payload.len(), 8 * n));
    }
    Ok(payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn save_checkpoint(network: &Network, params: &[f64], path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(52 + 8 * params.len());
    write_checkpoint(network, params, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(network: &Network, path: &Path) -> Result<Vec<f64>> {
    read_checkpoint(network, std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_rejections() {
        let net = Network::new(NetworkSpec::mnist_default(8, 8, 3)).unwrap();
        let params = net.init_params(1);
        let mut buf = Vec::new();
        write_checkpoint(&net, &params, &mut buf).unwrap();
        assert_eq!(buf.len(), 52 + 8 * params.len());
        assert_eq!(read_checkpoint(&net, buf.as_slice()).unwrap(), params);

        let other = Network::new(NetworkSpec::mnist_default(8, 8, 4)).unwrap();
        assert!(matches!(
            read_checkpoint(&other, buf.as_slice()),
            Err(CnnError::Checkpoint(_))
        ));
        let mut truncated = buf.clone();
        truncated.pop();
        assert!(read_checkpoint(&net, truncated.as_slice()).is_err());
        let mut wrong = buf.clone();
        wrong[0] = b'X';
        assert!(read_checkpoint(&net, wrong.as_slice()).is_err());
        buf.push(0);
        assert!(read_checkpoint(&net, buf.as_slice()).is_err());
    }
}
