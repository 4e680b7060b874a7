//! Small fully-connected color networks and the GLNN binary format.
//!
//! Layers apply `relu(W·x + b)`; the final layer uses a sigmoid so outputs
//! land in (0,1) without clamping. GLNN v1, little-endian: magic "GLNN",
//! u32 version, u32 layer count, then per layer u32 rows, u32 cols,
//! rows·cols f32 row-major weights, rows f32 biases.

use super::FieldError;
use crate::math::{Rgb, Vec3};
use std::io::{Read, Write};

/// Input layout without positional encoding: [p, d].
pub const PLAIN_INPUT_DIM: usize = 6;
/// With 4 sinusoid bands: [p, sin(2^k p), cos(2^k p) for k = 0..4, d].
pub const ENCODED_INPUT_DIM: usize = 30;
const ENCODING_BANDS: usize = 4;

const MAGIC: [u8; 4] = *b"GLNN";
const VERSION: u32 = 1;

/// Flattens position and view direction into the network input vector.
pub fn encode_input(p: Vec3, dir: Vec3, encoded: bool) -> Vec<f64> {
    let mut v = Vec::with_capacity(if encoded {
        ENCODED_INPUT_DIM
    } else {
        PLAIN_INPUT_DIM
    });
    v.extend_from_slice(&[p.x, p.y, p.z]);
    if encoded {
        for band in 0..ENCODING_BANDS {
            let freq = (1u32 << band) as f64;
            v.extend_from_slice(&[(freq * p.x).sin(), (freq * p.y).sin(), (freq * p.z).sin()]);
            v.extend_from_slice(&[(freq * p.x).cos(), (freq * p.y).cos(), (freq * p.z).cos()]);
        }
    }
    v.extend_from_slice(&[dir.x, dir.y, dir.z]);
    v
}

#[derive(Debug, Clone)]
pub struct Layer {
    rows: usize,
    cols: usize,
    w: Vec<f32>, // row-major, rows × cols
    b: Vec<f32>,
}

impl Layer {
    pub fn new(rows: usize, cols: usize, w: Vec<f32>, b: Vec<f32>) -> Result<Layer, FieldError> {
        if rows == 0 || cols == 0 || w.len() != rows * cols || b.len() != rows {
            return Err(FieldError::NonFinite {
                what: format!(
                    "layer shape: {rows}x{cols} with {} weights, {} biases",
                    w.len(),
                    b.len()
                ),
            });
        }
        if w.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite {
                what: "network weight".to_string(),
            });
        }
        Ok(Layer { rows, cols, w, b })
    }

    /// y = W·x + b, no activation.
    fn affine(&self, x: &[f64], y: &mut Vec<f64>) {
        y.clear();
        for r in 0..self.rows {
            let row = &self.w[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.b[r] as f64;
            for (wi, xi) in row.iter().zip(x) {
                acc += *wi as f64 * xi;
            }
            y.push(acc);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ColorNet {
    layers: Vec<Layer>,
}

impl ColorNet {
    pub fn new(layers: Vec<Layer>) -> Result<ColorNet, FieldError> {
        if layers.is_empty() {
            return Err(FieldError::EmptyNet);
        }
        for i in 1..layers.len() {
            if layers[i].cols != layers[i - 1].rows {
                return Err(FieldError::LayerChain {
                    layer: i,
                    expected: layers[i - 1].rows,
                    found: layers[i].cols,
                });
            }
        }
        Ok(ColorNet { layers })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        assert_eq!(input.len(), self.input_dim(), "network input width");
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&cur, &mut next);
            if i == last {
                for v in &mut next {
                    *v = 1.0 / (1.0 + (-*v).exp());
                }
            } else {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    pub fn forward_rgb(&self, input: &[f64]) -> Rgb {
        let out = self.forward(input);
        assert_eq!(out.len(), 3, "color network output width");
        [out[0], out[1], out[2]]
    }

    pub fn write_glnn(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        for layer in &self.layers {
            w.write_all(&(layer.rows as u32).to_le_bytes())?;
            w.write_all(&(layer.cols as u32).to_le_bytes())?;
            for &v in &layer.w {
                w.write_all(&v.to_le_bytes())?;
            }
            for &v in &layer.b {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_glnn(r: &mut impl Read) -> Result<ColorNet, FieldError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(FieldError::BadMagic {
                expected: MAGIC,
                found: magic,
            });
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(FieldError::UnsupportedVersion { found: version });
        }
        let n_layers = read_u32(r)? as usize;
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let rows = read_u32(r)? as usize;
            let cols = read_u32(r)? as usize;
            let count = rows.checked_mul(cols).ok_or(FieldError::EmptyNet)?;
            let mut w = vec![0.0_f32; count];
            for v in &mut w {
                *v = read_f32(r)?;
            }
            let mut b = vec![0.0_f32; rows];
            for v in &mut b {
                *v = read_f32(r)?;
            }
            layers.push(Layer::new(rows, cols, w, b)?);
        }
        ColorNet::new(layers)
    }
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f32(r: &mut impl Read) -> std::io::Result<f32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(f32::from_le_bytes(b))
}
