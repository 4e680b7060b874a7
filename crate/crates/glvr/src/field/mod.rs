//! Scene fields: density σ(p) ≥ 0 and color c(p, d) ∈ [0,1]³ with three
//! backends — analytic primitive lists, voxel grids, and voxel density paired
//! with a small color network. Every density/color evaluation bumps a shared
//! atomic counter; the color count is the efficiency metric the whole crate
//! exists to measure, so totals must stay exact under concurrent render
//! workers.

mod analytic;
mod net;
mod voxel;

pub use analytic::{
    transmittance_oracle, AnalyticField, Primitive, Shape, SurfaceColor, TransmittanceEstimate,
};
pub(crate) use analytic::slab_interval;
pub use net::{encode_input, ColorNet, Layer, ENCODED_INPUT_DIM, PLAIN_INPUT_DIM};
pub use voxel::VoxelGrid;

use crate::math::{rgb_clamp_unit, Aabb, Rgb, Vec3};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

/// One joint field query: clamped density and color.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub sigma: f64,
    pub color: Rgb,
}

/// Exact totals of field evaluations since construction or the last reset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CallCounts {
    pub density: u64,
    pub color: u64,
}

#[derive(Debug, Default)]
struct CallCounters {
    density: AtomicU64,
    color: AtomicU64,
}

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {found} (supported: 1)")]
    UnsupportedVersion { found: u32 },
    #[error("grid resolution {nx}x{ny}x{nz} too small: every axis needs at least 2 points")]
    GridTooSmall { nx: u32, ny: u32, nz: u32 },
    #[error("grid bounds are degenerate or non-finite")]
    BadGridBounds,
    #[error("negative density {value} at voxel index {index}")]
    NegativeDensity { index: usize, value: f32 },
    #[error("non-finite {what}")]
    NonFinite { what: String },
    #[error("network has no layers")]
    EmptyNet,
    #[error("layer {layer}: expected {expected} input columns to chain with the previous layer, found {found}")]
    LayerChain {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("color network must output 3 channels, found {found}")]
    BadOutputDim { found: usize },
    #[error("color network expects {found}-dim input, but {expected} (position+direction{encoded}) is required")]
    BadInputDim {
        expected: usize,
        found: usize,
        encoded: &'static str,
    },
}

#[derive(Debug)]
enum Backend {
    Analytic(AnalyticField),
    Voxel(VoxelGrid),
    VoxelNet {
        grid: VoxelGrid,
        net: ColorNet,
        encoded: bool,
    },
}

/// A queryable scene field with shared evaluation counters.
#[derive(Debug)]
pub struct Field {
    backend: Backend,
    counters: CallCounters,
}

impl Field {
    pub fn analytic(field: AnalyticField) -> Field {
        Field {
            backend: Backend::Analytic(field),
            counters: CallCounters::default(),
        }
    }

    pub fn voxel(grid: VoxelGrid) -> Field {
        Field {
            backend: Backend::Voxel(grid),
            counters: CallCounters::default(),
        }
    }

    /// Density from the grid, color from the network. `encoded` selects the
    /// 4-band sinusoidal position encoding; the network's input width must
    /// match the choice.
    pub fn voxel_net(grid: VoxelGrid, net: ColorNet, encoded: bool) -> Result<Field, FieldError> {
        let expected = if encoded {
            ENCODED_INPUT_DIM
        } else {
            PLAIN_INPUT_DIM
        };
        if net.input_dim() != expected {
            return Err(FieldError::BadInputDim {
                expected,
                found: net.input_dim(),
                encoded: if encoded { ", encoded" } else { "" },
            });
        }
        if net.output_dim() != 3 {
            return Err(FieldError::BadOutputDim {
                found: net.output_dim(),
            });
        }
        Ok(Field {
            backend: Backend::VoxelNet { grid, net, encoded },
            counters: CallCounters::default(),
        })
    }

    /// World-space box outside of which the field is identically zero.
    /// `None` for an empty analytic scene (every ray misses).
    pub fn bounds(&self) -> Option<Aabb> {
        match &self.backend {
            Backend::Analytic(f) => f.bounds(),
            Backend::Voxel(g) => Some(g.bounds()),
            Backend::VoxelNet { grid, .. } => Some(grid.bounds()),
        }
    }

    pub fn density_at(&self, p: Vec3) -> f64 {
        self.counters.density.fetch_add(1, Ordering::Relaxed);
        self.raw_density(p)
    }

    /// `dir` must be unit length; only view-dependent backends read it.
    pub fn color_at(&self, p: Vec3, dir: Vec3) -> Rgb {
        debug_assert!((dir.length() - 1.0).abs() < 1e-6, "direction not unit");
        self.counters.color.fetch_add(1, Ordering::Relaxed);
        self.raw_color(p, dir)
    }

    pub fn sample_at(&self, p: Vec3, dir: Vec3) -> FieldSample {
        FieldSample {
            sigma: self.density_at(p),
            color: self.color_at(p, dir),
        }
    }

    pub fn counts(&self) -> CallCounts {
        CallCounts {
            density: self.counters.density.load(Ordering::Relaxed),
            color: self.counters.color.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counts(&self) {
        self.counters.density.store(0, Ordering::Relaxed);
        self.counters.color.store(0, Ordering::Relaxed);
    }

    pub fn as_analytic(&self) -> Option<&AnalyticField> {
        match &self.backend {
            Backend::Analytic(f) => Some(f),
            _ => None,
        }
    }

    fn raw_density(&self, p: Vec3) -> f64 {
        let inside = self.bounds().is_some_and(|b| b.contains(p));
        if !inside {
            return 0.0;
        }
        let sigma = match &self.backend {
            Backend::Analytic(f) => f.density(p),
            Backend::Voxel(g) => g.density_at(p),
            Backend::VoxelNet { grid, .. } => grid.density_at(p),
        };
        sigma.max(0.0)
    }

    fn raw_color(&self, p: Vec3, dir: Vec3) -> Rgb {
        let inside = self.bounds().is_some_and(|b| b.contains(p));
        if !inside {
            return [0.0; 3];
        }
        let c = match &self.backend {
            Backend::Analytic(f) => f.color(p, dir),
            Backend::Voxel(g) => g.color_at(p),
            Backend::VoxelNet { grid, net, encoded } => {
                let _ = grid;
                net.forward_rgb(&encode_input(p, dir, *encoded))
            }
        };
        rgb_clamp_unit(c)
    }
}
