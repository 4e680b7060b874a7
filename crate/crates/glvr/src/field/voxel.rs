//! Vertex-centered voxel grids with trilinear interpolation and the GLVX
//! binary format.
//!
//! GLVX v1, little-endian: magic "GLVX", u32 version, u32 nx/ny/nz, six f64
//! bounds (min.xyz then max.xyz), nx·ny·nz f32 densities in x-fastest order,
//! then one f32 RGB triple per vertex in the same order. Grid vertex (i,j,k)
//! sits at min + (i/(nx−1), j/(ny−1), k/(nz−1)) · extent, so a query at a
//! vertex returns exactly that vertex's stored value.

use super::FieldError;
use crate::math::{Aabb, Rgb, Vec3};
use std::io::{Read, Write};

const MAGIC: [u8; 4] = *b"GLVX";
const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct VoxelGrid {
    nx: usize,
    ny: usize,
    nz: usize,
    bounds: Aabb,
    density: Vec<f32>,
    color: Vec<f32>, // rgb per vertex
}

impl VoxelGrid {
    pub fn new(
        resolution: (usize, usize, usize),
        bounds: Aabb,
        density: Vec<f32>,
        color: Vec<f32>,
    ) -> Result<Self, FieldError> {
        let (nx, ny, nz) = resolution;
        if nx < 2 || ny < 2 || nz < 2 {
            return Err(FieldError::GridTooSmall {
                nx: nx as u32,
                ny: ny as u32,
                nz: nz as u32,
            });
        }
        let vertices = nx * ny * nz;
        if density.len() != vertices || color.len() != vertices * 3 {
            return Err(FieldError::NonFinite {
                what: format!(
                    "array lengths (density {}, color {}) for a {nx}x{ny}x{nz} grid",
                    density.len(),
                    color.len()
                ),
            });
        }
        let ext = bounds.extent();
        if !(ext.x > 0.0 && ext.y > 0.0 && ext.z > 0.0)
            || !bounds.min.length_squared().is_finite()
            || !bounds.max.length_squared().is_finite()
        {
            return Err(FieldError::BadGridBounds);
        }
        for (i, &d) in density.iter().enumerate() {
            if !d.is_finite() {
                return Err(FieldError::NonFinite {
                    what: format!("density at voxel index {i}"),
                });
            }
            if d < 0.0 {
                return Err(FieldError::NegativeDensity { index: i, value: d });
            }
        }
        if let Some(i) = color.iter().position(|c| !c.is_finite()) {
            return Err(FieldError::NonFinite {
                what: format!("color component at index {i}"),
            });
        }
        Ok(VoxelGrid {
            nx,
            ny,
            nz,
            bounds,
            density,
            color,
        })
    }

    pub fn resolution(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn density_at(&self, p: Vec3) -> f64 {
        self.trilinear(p, |idx| self.density[idx] as f64)
    }

    pub fn color_at(&self, p: Vec3) -> Rgb {
        [
            self.trilinear(p, |idx| self.color[3 * idx] as f64),
            self.trilinear(p, |idx| self.color[3 * idx + 1] as f64),
            self.trilinear(p, |idx| self.color[3 * idx + 2] as f64),
        ]
    }

    fn vertex_index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Trilinear blend of the 8 cell corners around p; coordinates are
    /// clamped to the grid, so boundary queries stay inside.
    fn trilinear(&self, p: Vec3, value: impl Fn(usize) -> f64) -> f64 {
        let ext = self.bounds.extent();
        let u = [
            ((p.x - self.bounds.min.x) / ext.x * (self.nx - 1) as f64)
                .clamp(0.0, (self.nx - 1) as f64),
            ((p.y - self.bounds.min.y) / ext.y * (self.ny - 1) as f64)
                .clamp(0.0, (self.ny - 1) as f64),
            ((p.z - self.bounds.min.z) / ext.z * (self.nz - 1) as f64)
                .clamp(0.0, (self.nz - 1) as f64),
        ];
        let cell = [
            (u[0] as usize).min(self.nx - 2),
            (u[1] as usize).min(self.ny - 2),
            (u[2] as usize).min(self.nz - 2),
        ];
        let f = [
            u[0] - cell[0] as f64,
            u[1] - cell[1] as f64,
            u[2] - cell[2] as f64,
        ];
        let mut acc = 0.0;
        for dz in 0..2 {
            for dy in 0..2 {
                for dx in 0..2 {
                    let w = (if dx == 1 { f[0] } else { 1.0 - f[0] })
                        * (if dy == 1 { f[1] } else { 1.0 - f[1] })
                        * (if dz == 1 { f[2] } else { 1.0 - f[2] });
                    acc += w * value(self.vertex_index(cell[0] + dx, cell[1] + dy, cell[2] + dz));
                }
            }
        }
        acc
    }

    pub fn write_glvx(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for n in [self.nx, self.ny, self.nz] {
            w.write_all(&(n as u32).to_le_bytes())?;
        }
        for v in [
            self.bounds.min.x,
            self.bounds.min.y,
            self.bounds.min.z,
            self.bounds.max.x,
            self.bounds.max.y,
            self.bounds.max.z,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for &d in &self.density {
            w.write_all(&d.to_le_bytes())?;
        }
        for &c in &self.color {
            w.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_glvx(r: &mut impl Read) -> Result<Self, FieldError> {
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
        let nx = read_u32(r)? as usize;
        let ny = read_u32(r)? as usize;
        let nz = read_u32(r)? as usize;
        let mut b = [0.0_f64; 6];
        for v in &mut b {
            *v = read_f64(r)?;
        }
        let vertices = nx
            .checked_mul(ny)
            .and_then(|v| v.checked_mul(nz))
            .ok_or(FieldError::BadGridBounds)?;
        let mut density = vec![0.0_f32; vertices];
        for v in &mut density {
            *v = read_f32(r)?;
        }
        let mut color = vec![0.0_f32; vertices * 3];
        for v in &mut color {
            *v = read_f32(r)?;
        }
        VoxelGrid::new(
            (nx, ny, nz),
            Aabb::new(Vec3::new(b[0], b[1], b[2]), Vec3::new(b[3], b[4], b[5])),
            density,
            color,
        )
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

fn read_f64(r: &mut impl Read) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
