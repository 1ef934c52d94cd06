//! Model checkpoint container, format version 1. All integers and floats are
//! little-endian.
//!
//! | field      | type                | notes                                   |
//! |------------|---------------------|-----------------------------------------|
//! | magic      | 8 bytes             | `MSAGECKP`                              |
//! | version    | u32                 | `1`                                     |
//! | mode       | u8                  | 0 multisage, 1 graphsage                |
//! | activation | u8                  | 0 relu, 1 sigmoid, 2 identity           |
//! | normalize  | u8                  | 1 when outputs are unit-normalized      |
//! | output act | u8                  | activation of depth K, coded as above   |
//! | seed       | u64                 | training seed                           |
//! | depth K    | u32                 |                                         |
//! | dims       | (K+1) × u64         | `d_0 … d_K`                             |
//! | weights    | f64 blocks          | per depth: `W_H`, `W_V` (or `W`), `S`; each `d_k × d_{k-1}` row-major |
//! | meta len   | u64                 |                                         |
//! | meta       | UTF-8               | free-form provenance, JSON by convention |

use std::io::{self, Read, Write};

use ndarray::Array2;
use thiserror::Error;

use super::{Activation, DepthParams, Mode, ModelParams};

const MAGIC: &[u8; 8] = b"MSAGECKP";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub seed: u64,
    pub provenance: String,
}

pub fn write_checkpoint<W: Write>(mut w: W, ck: &Checkpoint) -> Result<(), CheckpointError> {
    let p = &ck.params;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let mode = match p.mode {
        Mode::Multisage => 0u8,
        Mode::Graphsage => 1,
    };
    w.write_all(&[
        mode,
        activation_code(p.activation),
        u8::from(p.normalize_output),
        activation_code(p.output_activation),
    ])?;
    w.write_all(&ck.seed.to_le_bytes())?;
    w.write_all(&(p.depth() as u32).to_le_bytes())?;
    for &d in &p.dims {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for depth in &p.depths {
        for m in depth.matrices() {
            for x in m.as_standard_layout().iter() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
    }
    w.write_all(&(ck.provenance.len() as u64).to_le_bytes())?;
    w.write_all(ck.provenance.as_bytes())?;
    Ok(())
}

fn activation_code(a: Activation) -> u8 {
    match a {
        Activation::Relu => 0,
        Activation::Sigmoid => 1,
        Activation::Identity => 2,
    }
}

fn activation_from(code: u8) -> Result<Activation, CheckpointError> {
    match code {
        0 => Ok(Activation::Relu),
        1 => Ok(Activation::Sigmoid),
        2 => Ok(Activation::Identity),
        x => Err(CheckpointError::Corrupt(format!("activation byte {x}"))),
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> io::Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

fn read_u64<R: Read>(r: &mut R) -> io::Result<u64> {
    read_array::<8, _>(r).map(u64::from_le_bytes)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint, CheckpointError> {
    if &read_array::<8, _>(&mut r)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let [mode, act, norm, out_act] = read_array::<4, _>(&mut r)?;
    let mode = match mode {
        0 => Mode::Multisage,
        1 => Mode::Graphsage,
        x => return Err(CheckpointError::Corrupt(format!("mode byte {x}"))),
    };
    let activation = activation_from(act)?;
    let output_activation = activation_from(out_act)?;
    let seed = read_u64(&mut r)?;
    let depth = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if depth == 0 || depth > 64 {
        return Err(CheckpointError::Corrupt(format!("depth {depth}")));
    }
    let dims = (0..=depth)
        .map(|_| read_u64(&mut r).map(|d| d as usize))
        .collect::<io::Result<Vec<_>>>()?;
    let mut depths = Vec::with_capacity(depth);
    for k in 0..depth {
        let (rows, cols) = (dims[k + 1], dims[k]);
        let mut read_matrix = || -> Result<Array2<f64>, CheckpointError> {
            let mut buf = vec![0u8; rows * cols * 8];
            r.read_exact(&mut buf)?;
            let data = buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            Array2::from_shape_vec((rows, cols), data)
                .map_err(|e| CheckpointError::Corrupt(e.to_string()))
        };
        let neighbor = (0..mode.channels())
            .map(|_| read_matrix())
            .collect::<Result<Vec<_>, _>>()?;
        let self_weight = read_matrix()?;
        depths.push(DepthParams {
            neighbor,
            self_weight,
        });
    }
    let len = read_u64(&mut r)? as usize;
    let mut meta = vec![0u8; len];
    r.read_exact(&mut meta)?;
    let provenance =
        String::from_utf8(meta).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    let params = ModelParams {
        mode,
        activation,
        output_activation,
        normalize_output: norm != 0,
        dims,
        depths,
    };
    params
        .validate()
        .map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    Ok(Checkpoint {
        params,
        seed,
        provenance,
    })
}
