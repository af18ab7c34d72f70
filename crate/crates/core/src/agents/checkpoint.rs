//! Versioned weight checkpoints.
//!
//! Layout, all little endian: magic `CVGW`, `u32` version, `u8` policy
//! kind, `u32` network count, then per network a `u32` size count, the
//! `u32` layer sizes and every parameter as an `f64` (layer by layer,
//! weights row-major before biases).

use std::io::{Read, Write};

use super::mlp::{Layer, Mlp};
use super::{AgentError, AgentPolicy, PolicyKind};

const MAGIC: &[u8; 4] = b"CVGW";
pub const VERSION: u32 = 1;

fn kind_code(k: PolicyKind) -> u8 {
    match k {
        PolicyKind::Random => 0,
        PolicyKind::Dqn => 1,
        PolicyKind::A2c => 2,
        PolicyKind::Ppo => 3,
    }
}

pub fn write_checkpoint(agent: &AgentPolicy, out: &mut impl Write) -> Result<(), AgentError> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[kind_code(agent.kind())])?;
    let nets = agent.networks();
    out.write_all(&(nets.len() as u32).to_le_bytes())?;
    for net in nets {
        let sizes = net.sizes();
        out.write_all(&(sizes.len() as u32).to_le_bytes())?;
        for s in sizes {
            out.write_all(&(s as u32).to_le_bytes())?;
        }
        for p in net.params() {
            out.write_all(&p.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, AgentError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Reads the networks stored in a checkpoint.
pub fn read_checkpoint(r: &mut impl Read) -> Result<(PolicyKind, Vec<Mlp>), AgentError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(AgentError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(AgentError::Checkpoint(format!("unsupported version {version}")));
    }
    let mut k = [0u8; 1];
    r.read_exact(&mut k)?;
    let kind = match k[0] {
        0 => PolicyKind::Random,
        1 => PolicyKind::Dqn,
        2 => PolicyKind::A2c,
        3 => PolicyKind::Ppo,
        c => return Err(AgentError::Checkpoint(format!("unknown policy code {c}"))),
    };
    let count = read_u32(r)?;
    let mut nets = Vec::new();
    for _ in 0..count {
        let n = read_u32(r)? as usize;
        if !(2..=64).contains(&n) {
            return Err(AgentError::Checkpoint(format!("implausible layer count {n}")));
        }
        let sizes: Vec<usize> = (0..n).map(|_| read_u32(r).map(|s| s as usize)).collect::<Result<_, _>>()?;
        let mut layers = Vec::new();
        for p in sizes.windows(2) {
            let (i, o) = (p[0], p[1]);
            let mut read_f64s = |len: usize| -> Result<Vec<f64>, AgentError> {
                (0..len)
                    .map(|_| {
                        let mut b = [0u8; 8];
                        r.read_exact(&mut b)?;
                        Ok(f64::from_le_bytes(b))
                    })
                    .collect()
            };
            let w = read_f64s(i * o)?;
            let b = read_f64s(o)?;
            layers.push(Layer { w, b, inputs: i, outputs: o });
        }
        nets.push(Mlp::from_layers(layers)?);
    }
    Ok((kind, nets))
}

/// Loads checkpoint weights into an agent of the same kind and shape.
pub fn load_checkpoint(agent: &mut AgentPolicy, r: &mut impl Read) -> Result<(), AgentError> {
    let (kind, nets) = read_checkpoint(r)?;
    if kind != agent.kind() {
        return Err(AgentError::Checkpoint(format!("checkpoint is for {kind}, agent is {}", agent.kind())));
    }
    let targets = agent.networks_mut();
    if targets.len() != nets.len() {
        return Err(AgentError::Checkpoint("network count differs".into()));
    }
    for (t, n) in targets.into_iter().zip(nets) {
        if t.sizes() != n.sizes() {
            return Err(AgentError::Checkpoint(format!("layer sizes {:?} != {:?}", n.sizes(), t.sizes())));
        }
        *t = n;
    }
    if let AgentPolicy::Dqn(d) = agent {
        d.target = d.q.clone();
    }
    Ok(())
}
