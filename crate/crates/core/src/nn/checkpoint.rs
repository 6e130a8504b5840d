//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes  "FGRASPCK"
//! version    u32      currently 1
//! net count  u8
//! per net:
//!   name     u8 length + utf-8 bytes
//!   input    u8 rank + u32 dims
//!   layers   u16 count + per layer: u8 tag + u32 fields
//!            tags: 1 dense(in,out)  2 conv(in,out,k,s,p)  3 relu  4 upsample(f)
//!   payload  f32 raw bits, one tensor after another in layer order
//! checksum   u64 FNV-1a over everything before it
//! ```

use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::layers::LayerSpec;
use super::network::{Network, NetworkSpec};
use super::tensor::Tensor;

const MAGIC: &[u8; 8] = b"FGRASPCK";
const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),
    #[error("unsupported checkpoint version {0} (expected {VERSION})")]
    Version(u32),
    #[error("checkpoint checksum mismatch")]
    Checksum,
    #[error("checkpoint has no network named {0:?}")]
    MissingNetwork(String),
    #[error("network {name:?} layer {layer}: expected {expected}, found {found}")]
    SpecMismatch {
        name: String,
        layer: usize,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn push_layer(buf: &mut Vec<u8>, layer: &LayerSpec) {
    match *layer {
        LayerSpec::Dense { input, output } => {
            buf.push(1);
            buf.extend((input as u32).to_le_bytes());
            buf.extend((output as u32).to_le_bytes());
        }
        LayerSpec::Conv2d {
            in_ch,
            out_ch,
            kernel,
            stride,
            pad,
        } => {
            buf.push(2);
            for v in [in_ch, out_ch, kernel, stride, pad] {
                buf.extend((v as u32).to_le_bytes());
            }
        }
        LayerSpec::Relu => buf.push(3),
        LayerSpec::Upsample { factor } => {
            buf.push(4);
            buf.extend((factor as u32).to_le_bytes());
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CheckpointError> {
        if self.pos + n > self.bytes.len() {
            return Err(CheckpointError::BadCheckpoint("truncated file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CheckpointError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

fn read_layer(r: &mut Reader) -> Result<LayerSpec, CheckpointError> {
    Ok(match r.u8()? {
        1 => LayerSpec::Dense {
            input: r.u32()? as usize,
            output: r.u32()? as usize,
        },
        2 => LayerSpec::Conv2d {
            in_ch: r.u32()? as usize,
            out_ch: r.u32()? as usize,
            kernel: r.u32()? as usize,
            stride: r.u32()? as usize,
            pad: r.u32()? as usize,
        },
        3 => LayerSpec::Relu,
        4 => LayerSpec::Upsample {
            factor: r.u32()? as usize,
        },
        tag => {
            return Err(CheckpointError::BadCheckpoint(format!(
                "unknown layer tag {tag}"
            )))
        }
    })
}

/// Serialize named networks to `path`. Loading the result reproduces forward
/// outputs bitwise (parameters are stored as raw f32 bits).
pub fn save_networks(path: &Path, nets: &[(&str, &Network<f32>)]) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    buf.extend(MAGIC);
    buf.extend(VERSION.to_le_bytes());
    buf.push(nets.len() as u8);
    for (name, net) in nets {
        buf.push(name.len() as u8);
        buf.extend(name.as_bytes());
        let spec = net.spec();
        buf.push(spec.input_shape.len() as u8);
        for &d in &spec.input_shape {
            buf.extend((d as u32).to_le_bytes());
        }
        buf.extend((spec.layers.len() as u16).to_le_bytes());
        for layer in &spec.layers {
            push_layer(&mut buf, layer);
        }
        for layer_params in net.params() {
            for t in layer_params {
                for v in t.data() {
                    buf.extend(v.to_le_bytes());
                }
            }
        }
    }
    buf.extend(fnv1a(&buf).to_le_bytes());
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Load every network in the file.
pub fn load_networks(path: &Path) -> Result<Vec<(String, Network<f32>)>, CheckpointError> {
    let bytes = fs::read(path)?;
    if bytes.len() < MAGIC.len() + 8 || &bytes[..8] != MAGIC {
        return Err(CheckpointError::BadCheckpoint("wrong magic bytes".into()));
    }
    let body_len = bytes.len() - 8;
    let stored = u64::from_le_bytes(bytes[body_len..].try_into().unwrap());
    if fnv1a(&bytes[..body_len]) != stored {
        return Err(CheckpointError::Checksum);
    }
    let mut r = Reader {
        bytes: &bytes[..body_len],
        pos: 8,
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let count = r.u8()?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let name_len = r.u8()? as usize;
        let name = String::from_utf8(r.take(name_len)?.to_vec())
            .map_err(|_| CheckpointError::BadCheckpoint("non-utf8 name".into()))?;
        let rank = r.u8()? as usize;
        let mut input_shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            input_shape.push(r.u32()? as usize);
        }
        let n_layers = r.u16()? as usize;
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            layers.push(read_layer(&mut r)?);
        }
        let spec = NetworkSpec::new(&input_shape, layers)
            .map_err(|e| CheckpointError::BadCheckpoint(e.to_string()))?;
        let mut params = Vec::with_capacity(spec.layers.len());
        for layer in &spec.layers {
            let mut layer_params = Vec::new();
            for shape in layer.param_shapes() {
                let n: usize = shape.iter().product();
                let raw = r.take(n * 4)?;
                let data = raw
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                layer_params.push(
                    Tensor::from_vec(&shape, data)
                        .map_err(|e| CheckpointError::BadCheckpoint(e.to_string()))?,
                );
            }
            params.push(layer_params);
        }
        let net = Network::from_params(spec, params)
            .map_err(|e| CheckpointError::BadCheckpoint(e.to_string()))?;
        out.push((name, net));
    }
    if r.pos != body_len {
        return Err(CheckpointError::BadCheckpoint("trailing bytes".into()));
    }
    Ok(out)
}

/// Load one named network and require its spec to match `expected`; on
/// mismatch the error names the first offending layer.
pub fn load_named(
    path: &Path,
    name: &str,
    expected: &NetworkSpec,
) -> Result<Network<f32>, CheckpointError> {
    let nets = load_networks(path)?;
    let (_, net) = nets
        .into_iter()
        .find(|(n, _)| n == name)
        .ok_or_else(|| CheckpointError::MissingNetwork(name.to_string()))?;
    let found_spec = net.spec();
    if found_spec != expected {
        for (idx, want) in expected.layers.iter().enumerate() {
            match found_spec.layers.get(idx) {
                Some(got) if got == want => continue,
                Some(got) => {
                    return Err(CheckpointError::SpecMismatch {
                        name: name.to_string(),
                        layer: idx,
                        expected: want.to_string(),
                        found: got.to_string(),
                    })
                }
                None => {
                    return Err(CheckpointError::SpecMismatch {
                        name: name.to_string(),
                        layer: idx,
                        expected: want.to_string(),
                        found: "missing layer".to_string(),
                    })
                }
            }
        }
        return Err(CheckpointError::SpecMismatch {
            name: name.to_string(),
            layer: expected.layers.len(),
            expected: format!("input shape {:?}", expected.input_shape),
            found: format!(
                "input shape {:?} or extra layers",
                found_spec.input_shape
            ),
        });
    }
    Ok(net)
}
