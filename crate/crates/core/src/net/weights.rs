//! Named `f32` tensors and their binary container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "E2CD" | version u32 | count u32 |
//!   count × ( name_len u16 | name utf-8 | dtype u8 (0 = f32) | rank u8 |
//!             dims u32 × rank | payload f32 × prod(dims) )
//! ```
//!
//! Tensors are written in name order, so a store has exactly one encoding.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::net::ArchConfig;

pub const WEIGHTS_MAGIC: &[u8; 4] = b"E2CD";
pub const WEIGHTS_VERSION: u32 = 1;
const DTYPE_F32: u8 = 0;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::InvalidShape(format!(
                "tensor shape {shape:?} needs {n} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![0.0; n] }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightStore {
    tensors: BTreeMap<String, Tensor>,
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Option<Tensor> {
        self.tensors.insert(name.into(), tensor)
    }

    pub fn remove(&mut self, name: &str) -> Option<Tensor> {
        self.tensors.remove(name)
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::MissingParameter(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| Error::MissingParameter(name.to_string()))
    }

    /// Fetches a tensor and checks its shape.
    pub fn get_shaped(&self, name: &str, shape: &[usize]) -> Result<&Tensor> {
        let t = self.get(name)?;
        if t.shape != shape {
            return Err(Error::Schema(format!(
                "tensor `{name}` has shape {:?}, expected {shape:?}",
                t.shape
            )));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    /// Checks that the store holds exactly the architecture's tensors.
    pub fn check_schema(&self, arch: &ArchConfig) -> Result<()> {
        let schema = arch.schema();
        for (name, shape) in &schema {
            self.get_shaped(name, shape)?;
        }
        if let Some(extra) = self.names().find(|n| !schema.iter().any(|(s, _)| s == n)) {
            return Err(Error::Schema(format!("unknown tensor `{extra}` for this architecture")));
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(WEIGHTS_MAGIC);
        out.extend_from_slice(&WEIGHTS_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.tensors.len() as u32).to_le_bytes());
        for (name, t) in &self.tensors {
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(DTYPE_F32);
            out.push(t.shape.len() as u8);
            for &d in &t.shape {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for &v in &t.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != WEIGHTS_MAGIC {
            return Err(Error::Format {
                offset: 0,
                message: "bad magic, expected \"E2CD\"".into(),
            });
        }
        let version = r.u32()?;
        if version != WEIGHTS_VERSION {
            return Err(r.fail(format!("unsupported container version {version}")));
        }
        let count = r.u32()?;
        let mut tensors = BTreeMap::new();
        for _ in 0..count {
            let start = r.pos;
            let len = r.u16()? as usize;
            let name = std::str::from_utf8(r.take(len)?)
                .map_err(|_| Error::Format {
                    offset: start + 2,
                    message: "tensor name is not UTF-8".into(),
                })?
                .to_string();
            let dtype = r.u8()?;
            if dtype != DTYPE_F32 {
                return Err(r.fail(format!("tensor `{name}`: unsupported dtype tag {dtype}")));
            }
            let rank = r.u8()? as usize;
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u32()? as usize);
            }
            let n = shape
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .and_then(|n| n.checked_mul(4))
                .ok_or_else(|| r.fail(format!("tensor `{name}`: shape overflow")))?;
            let payload = r.take(n)?;
            let data = payload
                .chunks_exact(4)
                .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
                .collect();
            if tensors.insert(name.clone(), Tensor { shape, data }).is_some() {
                return Err(Error::Format {
                    offset: start,
                    message: format!("duplicate tensor `{name}`"),
                });
            }
        }
        if r.pos != bytes.len() {
            return Err(r.fail(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Self { tensors })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }

    /// Loads a container and checks it against a fixed architecture.
    pub fn load_for(path: &Path, arch: &ArchConfig) -> Result<Self> {
        let store = Self::load(path)?;
        store.check_schema(arch)?;
        Ok(store)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail(&self, message: String) -> Error {
        Error::Format {
            offset: self.pos,
            message,
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format {
                offset: self.bytes.len(),
                message: format!("truncated: needed {n} bytes at offset {}", self.pos),
            }),
        }
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn name_stream(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf29ce484222325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100000001b3)
    })
}

/// Deterministic initialization: He-normal kernels (`std = sqrt(2 / fan_in)`),
/// zero biases, zero final layers on residual branches. Each tensor draws
/// from its own stream keyed by name, so adding tensors never perturbs others.
pub fn init_weights(seed: u64, arch: &ArchConfig) -> WeightStore {
    let mut store = WeightStore::new();
    for (name, shape) in arch.schema() {
        let tensor = if name.ends_with(".bias") || ArchConfig::is_residual_final(&name) {
            Tensor::zeros(shape)
        } else {
            let fan_in: usize = shape[1..].iter().product();
            let normal = Normal::new(0.0f64, (2.0 / fan_in as f64).sqrt()).expect("finite std");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(name_stream(&name));
            let n = shape.iter().product();
            let data = (0..n).map(|_| normal.sample(&mut rng) as f32).collect();
            Tensor { shape, data }
        };
        store.insert(name, tensor);
    }
    store
}
