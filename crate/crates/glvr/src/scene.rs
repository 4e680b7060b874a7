//! Cameras, ray generation, ray–box clipping, and JSON scene files.
//!
//! Scene files are UTF-8 JSON with four top-level keys: `field` (tagged by
//! `kind`: `analytic` primitives inline, `voxel`/`voxel_net` referencing
//! binary assets relative to the scene file), `cameras`, optional
//! `background` RGB (default black), and optional `render` defaults that the
//! command line can override. Camera poses are camera-to-world, 12 numbers
//! row-major (rotation columns orthonormal, then translation in the fourth
//! column). The camera looks down −z in its own frame; world axes are
//! right-handed.

use crate::field::{
    slab_interval, AnalyticField, ColorNet, Field, FieldError, Primitive, Shape, SurfaceColor,
    VoxelGrid,
};
use crate::math::{Aabb, Ray, Rgb, Vec3};
use crate::render::RenderMode;
use serde::Deserialize;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The serde message already carries "at line L column C".
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Asset {
        path: PathBuf,
        #[source]
        source: FieldError,
    },
    #[error("pixel ({px}, {py}) outside the {width}x{height} image")]
    PixelOutOfRange {
        px: u32,
        py: u32,
        width: u32,
        height: u32,
    },
}

/// Pinhole camera. `pose` rows are world-frame images of the camera axes
/// plus the camera position; intrinsics are in pixels.
#[derive(Debug, Clone, Copy)]
pub struct Camera {
    rotation: [[f64; 3]; 3], // row-major, camera-to-world
    translation: Vec3,
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl Camera {
    /// `pose` is 12 numbers row-major: 3×3 rotation columns-orthonormal
    /// within 1e-6, fourth column translation.
    pub fn new(
        pose: [f64; 12],
        focal: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
    ) -> Result<Camera, SceneError> {
        if pose.iter().any(|v| !v.is_finite()) {
            return Err(SceneError::Invalid("pose entries must be finite".into()));
        }
        if focal <= 0.0 || !focal.is_finite() {
            return Err(SceneError::Invalid(format!(
                "focal must be a positive finite pixel count, got {focal}"
            )));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(SceneError::Invalid(
                "principal point (cx, cy) must be finite".into(),
            ));
        }
        if width == 0 || height == 0 {
            return Err(SceneError::Invalid(format!(
                "resolution {width}x{height} must be at least 1x1"
            )));
        }
        let rotation = [
            [pose[0], pose[1], pose[2]],
            [pose[4], pose[5], pose[6]],
            [pose[8], pose[9], pose[10]],
        ];
        let col = |j: usize| Vec3::new(rotation[0][j], rotation[1][j], rotation[2][j]);
        let mut deviation = 0.0_f64;
        for i in 0..3 {
            for j in i..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                deviation = deviation.max((col(i).dot(col(j)) - expect).abs());
            }
        }
        if deviation > 1e-6 {
            return Err(SceneError::Invalid(format!(
                "pose rotation is not orthonormal (deviation {deviation:.2e} > 1e-6)"
            )));
        }
        Ok(Camera {
            rotation,
            translation: Vec3::new(pose[3], pose[7], pose[11]),
            focal,
            cx,
            cy,
            width,
            height,
        })
    }

    fn rotate(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.rotation[0][0] * v.x + self.rotation[0][1] * v.y + self.rotation[0][2] * v.z,
            self.rotation[1][0] * v.x + self.rotation[1][1] * v.y + self.rotation[1][2] * v.z,
            self.rotation[2][0] * v.x + self.rotation[2][1] * v.y + self.rotation[2][2] * v.z,
        )
    }

    pub fn position(&self) -> Vec3 {
        self.translation
    }

    /// World direction of the camera's −z axis (the viewing direction).
    pub fn optical_axis(&self) -> Vec3 {
        self.rotate(Vec3::new(0.0, 0.0, -1.0))
    }

    /// Ray through the center of pixel (px, py), unit direction, unclipped
    /// span [0, ∞).
    pub fn generate_ray(&self, px: u32, py: u32) -> Result<Ray, SceneError> {
        if px >= self.width || py >= self.height {
            return Err(SceneError::PixelOutOfRange {
                px,
                py,
                width: self.width,
                height: self.height,
            });
        }
        let dir_cam = Vec3::new(
            (px as f64 + 0.5 - self.cx) / self.focal,
            -(py as f64 + 0.5 - self.cy) / self.focal,
            -1.0,
        );
        let dir = self.rotate(dir_cam).normalized();
        Ok(Ray::new(self.translation, dir))
    }
}

/// Slab-method clip of a ray against a box. The entry parameter is clamped
/// to 0 (origins inside the box start integrating immediately); boxes
/// entirely behind the origin are misses.
pub fn ray_aabb(ray: &Ray, aabb: &Aabb) -> Option<(f64, f64)> {
    let (enter, exit) = slab_interval(ray, aabb)?;
    let enter = enter.max(0.0);
    if exit < enter {
        None
    } else {
        Some((enter, exit))
    }
}

/// Scene-file values the CLI falls back to when flags are omitted.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RenderDefaults {
    pub mode: Option<RenderMode>,
    pub n_samples: Option<u32>,
    pub delta_t: Option<f64>,
}

#[derive(Debug)]
pub struct Scene {
    pub field: Field,
    pub cameras: Vec<Camera>,
    pub background: Rgb,
    pub defaults: RenderDefaults,
}

impl Scene {
    pub fn camera(&self, index: usize) -> Result<&Camera, SceneError> {
        self.cameras.get(index).ok_or_else(|| {
            SceneError::Invalid(format!(
                "camera index {index} out of range: scene has {} camera(s)",
                self.cameras.len()
            ))
        })
    }
}

// Raw serde mirror of the file schema; converted with validation below.

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneSpec {
    field: FieldSpec,
    cameras: Vec<CameraSpec>,
    background: Option<[f64; 3]>,
    render: Option<RenderSpec>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum FieldSpec {
    Analytic {
        primitives: Vec<PrimitiveSpec>,
    },
    Voxel {
        path: String,
    },
    VoxelNet {
        grid: String,
        net: String,
        #[serde(default)]
        positional_encoding: bool,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimitiveSpec {
    shape: ShapeSpec,
    color: ColorSpec,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ShapeSpec {
    Sphere {
        center: [f64; 3],
        radius: f64,
        sigma: f64,
    },
    Box {
        min: [f64; 3],
        max: [f64; 3],
        sigma: f64,
    },
    GaussianBlob {
        center: [f64; 3],
        scale: f64,
        peak: f64,
    },
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum ColorSpec {
    Constant { rgb: [f64; 3] },
    ViewTinted { base: [f64; 3], normal: [f64; 3] },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CameraSpec {
    pose: [f64; 12],
    focal: f64,
    cx: f64,
    cy: f64,
    width: u32,
    height: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenderSpec {
    mode: Option<ModeSpec>,
    n_samples: Option<u32>,
    delta_t: Option<f64>,
}

#[derive(Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum ModeSpec {
    Vanilla,
    Gl,
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn invalid(ctx: &str, what: impl std::fmt::Display) -> SceneError {
    SceneError::Invalid(format!("{ctx}: {what}"))
}

fn check_unit_rgb(ctx: &str, name: &str, rgb: [f64; 3]) -> Result<Rgb, SceneError> {
    if rgb.iter().any(|c| !c.is_finite() || !(0.0..=1.0).contains(c)) {
        return Err(invalid(
            ctx,
            format!("{name} {rgb:?} must have channels in [0, 1]"),
        ));
    }
    Ok(rgb)
}

fn build_shape(ctx: &str, spec: ShapeSpec) -> Result<Shape, SceneError> {
    let check_sigma = |sigma: f64| {
        if sigma.is_finite() && sigma >= 0.0 {
            Ok(sigma)
        } else {
            Err(invalid(ctx, format!("sigma must be ≥ 0, got {sigma}")))
        }
    };
    match spec {
        ShapeSpec::Sphere {
            center,
            radius,
            sigma,
        } => {
            if radius <= 0.0 || !radius.is_finite() {
                return Err(invalid(ctx, format!("radius must be > 0, got {radius}")));
            }
            Ok(Shape::Sphere {
                center: vec3(center),
                radius,
                sigma: check_sigma(sigma)?,
            })
        }
        ShapeSpec::Box { min, max, sigma } => {
            let (min, max) = (vec3(min), vec3(max));
            let ext = max - min;
            if !(ext.x > 0.0 && ext.y > 0.0 && ext.z > 0.0) {
                return Err(invalid(ctx, "box needs min < max on every axis"));
            }
            Ok(Shape::Box {
                min,
                max,
                sigma: check_sigma(sigma)?,
            })
        }
        ShapeSpec::GaussianBlob {
            center,
            scale,
            peak,
        } => {
            if scale <= 0.0 || !scale.is_finite() {
                return Err(invalid(ctx, format!("scale must be > 0, got {scale}")));
            }
            Ok(Shape::GaussianBlob {
                center: vec3(center),
                scale,
                peak: check_sigma(peak)?,
            })
        }
    }
}

fn build_color(ctx: &str, spec: ColorSpec) -> Result<SurfaceColor, SceneError> {
    match spec {
        ColorSpec::Constant { rgb } => Ok(SurfaceColor::Constant(check_unit_rgb(ctx, "rgb", rgb)?)),
        ColorSpec::ViewTinted { base, normal } => {
            let n = vec3(normal);
            if n.length() <= 1e-12 {
                return Err(invalid(ctx, "view tint normal must be non-zero"));
            }
            Ok(SurfaceColor::ViewTinted {
                base: check_unit_rgb(ctx, "base", base)?,
                normal: n.normalized(),
            })
        }
    }
}

fn open_asset(scene_dir: &Path, rel: &str) -> Result<(PathBuf, BufReader<File>), SceneError> {
    let path = scene_dir.join(rel);
    let file = File::open(&path).map_err(|source| SceneError::Io {
        path: path.clone(),
        source,
    })?;
    Ok((path, BufReader::new(file)))
}

fn build_field(scene_dir: &Path, spec: FieldSpec) -> Result<Field, SceneError> {
    match spec {
        FieldSpec::Analytic { primitives } => {
            let mut out = Vec::with_capacity(primitives.len());
            for (i, p) in primitives.into_iter().enumerate() {
                let ctx = format!("field.primitives[{i}]");
                out.push(Primitive {
                    shape: build_shape(&ctx, p.shape)?,
                    color: build_color(&ctx, p.color)?,
                });
            }
            Ok(Field::analytic(AnalyticField::new(out)))
        }
        FieldSpec::Voxel { path } => {
            let (path, mut reader) = open_asset(scene_dir, &path)?;
            let grid = VoxelGrid::read_glvx(&mut reader)
                .map_err(|source| SceneError::Asset { path, source })?;
            Ok(Field::voxel(grid))
        }
        FieldSpec::VoxelNet {
            grid,
            net,
            positional_encoding,
        } => {
            let (grid_path, mut reader) = open_asset(scene_dir, &grid)?;
            let grid = VoxelGrid::read_glvx(&mut reader).map_err(|source| SceneError::Asset {
                path: grid_path,
                source,
            })?;
            let (net_path, mut reader) = open_asset(scene_dir, &net)?;
            let net = ColorNet::read_glnn(&mut reader).map_err(|source| SceneError::Asset {
                path: net_path.clone(),
                source,
            })?;
            Field::voxel_net(grid, net, positional_encoding).map_err(|source| SceneError::Asset {
                path: net_path,
                source,
            })
        }
    }
}

pub fn load_scene(path: &Path) -> Result<Scene, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let spec: SceneSpec = serde_json::from_str(&text).map_err(|source| SceneError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    let scene_dir = path.parent().unwrap_or(Path::new("."));

    let field = build_field(scene_dir, spec.field)?;
    let mut cameras = Vec::with_capacity(spec.cameras.len());
    for (i, c) in spec.cameras.iter().enumerate() {
        let cam = Camera::new(c.pose, c.focal, c.cx, c.cy, c.width, c.height).map_err(|e| {
            match e {
                SceneError::Invalid(what) => SceneError::Invalid(format!("cameras[{i}]: {what}")),
                other => other,
            }
        })?;
        cameras.push(cam);
    }
    let background = match spec.background {
        Some(bg) => check_unit_rgb("background", "background", bg)?,
        None => [0.0; 3],
    };
    let render = spec.render.unwrap_or(RenderSpec {
        mode: None,
        n_samples: None,
        delta_t: None,
    });
    if let Some(n) = render.n_samples {
        if n == 0 {
            return Err(SceneError::Invalid("render.n_samples must be ≥ 1".into()));
        }
    }
    if let Some(dt) = render.delta_t {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(SceneError::Invalid(format!(
                "render.delta_t must be > 0, got {dt}"
            )));
        }
    }
    Ok(Scene {
        field,
        cameras,
        background,
        defaults: RenderDefaults {
            mode: render.mode.map(|m| match m {
                ModeSpec::Vanilla => RenderMode::Vanilla,
                ModeSpec::Gl => RenderMode::Gl,
            }),
            n_samples: render.n_samples,
            delta_t: render.delta_t,
        },
    })
}
