//! The two ray integrators: a dense Riemann-sum renderer that doubles as the
//! accuracy oracle, and the quadrature renderer that spends one color
//! evaluation per Laguerre node instead of one per march step.
//!
//! Substituting optical depth x(t) = ∫σ dt for the ray parameter turns the
//! rendering integral ∫ T·σ·c dt into ∫ e^{−x}·c dx over [0, ∞), exactly the
//! weight Gauss-Laguerre rules integrate against. The march still walks t in
//! Δt steps to accumulate x, but color — the expensive evaluation in the
//! field backends this models — is only queried where x crosses a node.

use crate::field::Field;
use crate::image_buffer::ImageBuffer;
use crate::math::{rgb_add_scaled, rgb_clamp_unit, Ray, Rgb};
use crate::quadrature::{laguerre_rule, QuadratureRule, RuleKind};
use crate::scene::{ray_aabb, Camera, Scene};
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderMode {
    Vanilla,
    Gl,
}

/// Where inside a march segment a node crossing places its color sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodePlacement {
    /// Linear interpolation inside the segment where the crossing happened:
    /// t = segment start + fraction·step. Geometrically consistent; default.
    #[default]
    Interpolated,
    /// Compatibility variant that additionally subtracts one full Δt,
    /// reproducing a published pseudocode's position formula whose offset
    /// assumes the post-increment ray parameter. Clamped to the ray span.
    StepBehind,
}

#[derive(Debug, Clone)]
pub struct RenderConfig {
    pub mode: RenderMode,
    /// Vanilla: Riemann sample count N. Gl: Laguerre node count n.
    pub n_samples: u32,
    /// March step Δt in world units; `None` = span/1024 per ray.
    pub delta_t: Option<f64>,
    pub background: Rgb,
    /// Density floor applied to every σ sample.
    pub epsilon_sigma: f64,
    pub placement: NodePlacement,
}

impl RenderConfig {
    pub fn new(mode: RenderMode, n_samples: u32) -> RenderConfig {
        RenderConfig {
            mode,
            n_samples,
            delta_t: None,
            background: [0.0; 3],
            epsilon_sigma: 0.0,
            placement: NodePlacement::Interpolated,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_samples == 0 {
            return Err("n_samples must be ≥ 1".into());
        }
        if let Some(dt) = self.delta_t {
            if dt <= 0.0 || !dt.is_finite() {
                return Err(format!("delta_t must be a positive finite step, got {dt}"));
            }
        }
        if self.background.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(format!(
                "background {:?} must have channels in [0, 1]",
                self.background
            ));
        }
        Ok(())
    }

    fn resolve_dt(&self, span: f64) -> f64 {
        self.delta_t.unwrap_or(span / 1024.0)
    }
}

/// One color sample chosen by the quadrature march.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectedPoint {
    /// Ray parameter of the color evaluation, inside [t_min, t_max].
    pub t: f64,
    /// Which node of the rule this sample realizes.
    pub node_index: usize,
    /// The node's quadrature weight, copied verbatim from the rule.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RenderStats {
    pub color_calls: u64,
    pub density_calls: u64,
    pub wall: Duration,
    pub rays_total: u64,
    pub rays_missed: u64,
}

impl RenderStats {
    pub fn wall_ms(&self) -> f64 {
        self.wall.as_secs_f64() * 1e3
    }
}

/// Midpoint Riemann sum with N equal steps over the clipped span. Exactly N
/// density and N color evaluations per call. Leftover transmittance goes to
/// the background so a vacuum renders as background, matching the quadrature
/// renderer's compositing.
pub fn render_pixel_vanilla(ray: &Ray, field: &Field, config: &RenderConfig) -> Rgb {
    debug_assert!(ray.t_max.is_finite() && ray.t_max >= ray.t_min);
    let n = config.n_samples;
    let delta = ray.span() / n as f64;
    let mut transmittance = 1.0;
    let mut acc = [0.0; 3];
    for i in 0..n {
        let t = ray.t_min + (i as f64 + 0.5) * delta;
        let p = ray.at(t);
        let sigma = field.density_at(p).max(config.epsilon_sigma);
        let color = field.color_at(p, ray.dir);
        let absorb = (-sigma * delta).exp();
        acc = rgb_add_scaled(acc, transmittance * (1.0 - absorb), color);
        transmittance *= absorb;
    }
    rgb_clamp_unit(rgb_add_scaled(acc, transmittance, config.background))
}

/// Marches optical depth x(t) in Δt steps under a piecewise-constant σ and
/// returns one sample per rule node the march reaches, plus the summed
/// weight of the nodes it never reaches (the background's share).
///
/// σ is sampled once at each segment start; x grows by σ·step. A node k with
/// x < node ≤ x_next is crossed inside the segment at fraction
/// (node − x)/(x_next − x). Steep media can cross several nodes in a single
/// segment, so crossings loop until the segment's depth budget is exhausted —
/// advancing at most one node per step would smear every node after the
/// first across later segments and break opaque surfaces.
pub fn select_gl_points(
    ray: &Ray,
    field: &Field,
    rule: &QuadratureRule,
    delta_t: f64,
    placement: NodePlacement,
    epsilon_sigma: f64,
) -> (Vec<SelectedPoint>, f64) {
    assert_eq!(rule.kind, RuleKind::Laguerre, "node march needs a Laguerre rule");
    debug_assert!(delta_t > 0.0);
    let n = rule.len();
    let mut points = Vec::with_capacity(n);
    let mut x = 0.0_f64;
    let mut k = 0_usize;
    // Segment starts derive from the index, not repeated addition, so long
    // marches don't accumulate rounding in t.
    let mut segment = 0_u64;
    while k < n {
        let t0 = ray.t_min + segment as f64 * delta_t;
        if t0 >= ray.t_max {
            break;
        }
        let step = delta_t.min(ray.t_max - t0);
        let sigma = field.density_at(ray.at(t0)).max(epsilon_sigma);
        let x_next = x + sigma * step;
        debug_assert!(x_next >= x, "optical depth must not decrease");
        while k < n && rule.nodes[k] > x && rule.nodes[k] <= x_next {
            let frac = (rule.nodes[k] - x) / (x_next - x);
            let t_raw = match placement {
                NodePlacement::Interpolated => t0 + frac * step,
                NodePlacement::StepBehind => t0 + frac * step - delta_t,
            };
            points.push(SelectedPoint {
                t: t_raw.clamp(ray.t_min, ray.t_max),
                node_index: k,
                weight: rule.weights[k],
            });
            k += 1;
        }
        x = x_next;
        segment += 1;
    }
    let bg_weight = rule.weights[k..].iter().sum();
    (points, bg_weight)
}

/// Quadrature estimate of the ray color: Σ w_k·c(t_k) + bg_weight·background.
/// One color evaluation per selected point — at most n per ray.
pub fn render_pixel_gl(
    ray: &Ray,
    field: &Field,
    rule: &QuadratureRule,
    config: &RenderConfig,
) -> Rgb {
    let delta_t = config.resolve_dt(ray.span());
    let (points, bg_weight) =
        select_gl_points(ray, field, rule, delta_t, config.placement, config.epsilon_sigma);
    let mut acc = [0.0; 3];
    for p in &points {
        let color = field.color_at(ray.at(p.t), ray.dir);
        acc = rgb_add_scaled(acc, p.weight, color);
    }
    rgb_clamp_unit(rgb_add_scaled(acc, bg_weight, config.background))
}

/// Renders every pixel of `camera`'s image. `workers` = 0 uses the global
/// thread pool; any other count gets its own pool. Pixels are pure functions
/// of the scene, so the image is bit-identical for every worker count; only
/// wall time varies.
///
/// Stats come from the field's shared counters (delta around the render), so
/// the field must not be queried concurrently by anything else.
pub fn render_image(
    scene: &Scene,
    camera: &Camera,
    config: &RenderConfig,
    workers: usize,
) -> (ImageBuffer, RenderStats) {
    let rule = match config.mode {
        RenderMode::Gl => Some(
            laguerre_rule(config.n_samples as usize)
                .expect("validated n_samples within rule range"),
        ),
        RenderMode::Vanilla => None,
    };
    let width = camera.width;
    let mut img = ImageBuffer::new(width, camera.height);
    let bounds = scene.field.bounds();
    let missed = AtomicU64::new(0);

    let before = scene.field.counts();
    let start = Instant::now();
    let mut render_rows = || {
        img.data
            .par_chunks_mut(width as usize * 3)
            .enumerate()
            .for_each(|(py, row)| {
                for px in 0..width {
                    let ray = camera
                        .generate_ray(px, py as u32)
                        .expect("pixel coordinates in range");
                    let clipped = bounds.and_then(|b| ray_aabb(&ray, &b));
                    let rgb = match clipped {
                        None => {
                            missed.fetch_add(1, Ordering::Relaxed);
                            config.background
                        }
                        Some((t0, t1)) => {
                            let ray = ray.with_span(t0, t1);
                            match &rule {
                                Some(rule) => render_pixel_gl(&ray, &scene.field, rule, config),
                                None => render_pixel_vanilla(&ray, &scene.field, config),
                            }
                        }
                    };
                    row[px as usize * 3..px as usize * 3 + 3].copy_from_slice(&rgb);
                }
            });
    };
    if workers == 0 {
        render_rows();
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction");
        pool.install(render_rows);
    }
    let wall = start.elapsed();
    let after = scene.field.counts();

    let stats = RenderStats {
        color_calls: after.color - before.color,
        density_calls: after.density - before.density,
        wall,
        rays_total: camera.width as u64 * camera.height as u64,
        rays_missed: missed.into_inner(),
    };
    (img, stats)
}
