//! Flat action indices to port values and back.
//!
//! The index's binary expansion is split across the action ports in list
//! order, the first port taking the most significant slice.

use std::collections::BTreeMap;

use super::EnvError;
use crate::bits::{mask, BitVector};
use crate::hdl::PortSpec;

/// Largest supported action space, as a power of two.
pub const MAX_ACTION_BITS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionCodec {
    ports: Vec<(String, u32)>,
    bits: u32,
}

impl ActionCodec {
    pub fn new(ports: Vec<(String, u32)>) -> Result<Self, EnvError> {
        let bits: u32 = ports.iter().map(|(_, w)| *w).sum();
        if bits > MAX_ACTION_BITS {
            return Err(EnvError::ActionSpaceTooLarge {
                bits,
                cap_bits: MAX_ACTION_BITS,
            });
        }
        Ok(Self { ports, bits })
    }

    pub fn from_specs(ports: &[PortSpec]) -> Result<Self, EnvError> {
        Self::new(ports.iter().map(|p| (p.name.clone(), p.width)).collect())
    }

    pub fn ports(&self) -> &[(String, u32)] {
        &self.ports
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn size(&self) -> usize {
        1usize << self.bits
    }

    /// Raw per-port values for `index`, in port order.
    pub fn split(&self, index: usize) -> Result<Vec<u64>, EnvError> {
        if index >= self.size() {
            return Err(EnvError::IndexOutOfRange { index, size: self.size() });
        }
        let mut shift = self.bits;
        Ok(self
            .ports
            .iter()
            .map(|(_, w)| {
                shift -= w;
                (index as u64 >> shift) & mask(*w)
            })
            .collect())
    }

    pub fn decode(&self, index: usize) -> Result<Vec<(String, BitVector)>, EnvError> {
        let raw = self.split(index)?;
        Ok(self
            .ports
            .iter()
            .zip(raw)
            .map(|((n, w), v)| (n.clone(), BitVector::new(*w, v).expect("masked to width")))
            .collect())
    }

    /// Inverse of [`split`](Self::split); values must fit their ports.
    pub fn join(&self, values: &[u64]) -> Result<usize, EnvError> {
        if values.len() != self.ports.len() {
            return Err(EnvError::Config(format!(
                "expected {} action values, got {}",
                self.ports.len(),
                values.len()
            )));
        }
        let mut index = 0usize;
        for ((name, w), v) in self.ports.iter().zip(values) {
            if v & !mask(*w) != 0 {
                return Err(EnvError::Config(format!("value {v} does not fit port `{name}`")));
            }
            index = (index << w) | *v as usize;
        }
        Ok(index)
    }
}

pub fn decode_action(index: usize, ports: &[PortSpec]) -> Result<BTreeMap<String, BitVector>, EnvError> {
    Ok(ActionCodec::from_specs(ports)?.decode(index)?.into_iter().collect())
}

pub fn encode_action(values: &BTreeMap<String, BitVector>, ports: &[PortSpec]) -> Result<usize, EnvError> {
    let codec = ActionCodec::from_specs(ports)?;
    let mut raw = Vec::with_capacity(ports.len());
    for p in ports {
        let v = values.get(&p.name).ok_or_else(|| EnvError::UnknownPort(p.name.clone()))?;
        if v.width() != p.width {
            return Err(EnvError::Config(format!("port `{}` expects {} bits", p.name, p.width)));
        }
        raw.push(v.value());
    }
    codec.join(&raw)
}
