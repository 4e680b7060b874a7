//! Image-quality and efficiency metrics: PSNR, a fixed SSIM variant, and the
//! comparison records the CLI serializes as CSV.
//!
//! SSIM here is deliberately simple and fully pinned down: luminance only
//! (0.2126R + 0.7152G + 0.0722B), non-overlapping 8×8 windows with any
//! remainder rows/columns truncated, population moments (÷64), constants
//! C1 = 0.01², C2 = 0.03². The sliding Gaussian window of the original
//! formulation buys nothing for comparative use and would make golden
//! values harder to freeze.

use crate::image_buffer::ImageBuffer;
use crate::render::RenderStats;
use std::time::Duration;
use thiserror::Error;

pub const SSIM_WINDOW: u32 = 8;
const C1: f64 = 0.01 * 0.01;
const C2: f64 = 0.03 * 0.03;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("image dimensions differ: {a_width}x{a_height} vs {b_width}x{b_height}")]
    DimensionMismatch {
        a_width: u32,
        a_height: u32,
        b_width: u32,
        b_height: u32,
    },
    #[error("image {width}x{height} smaller than the {window}x{window} ssim window")]
    TooSmallForSsim { width: u32, height: u32, window: u32 },
}

fn check_dims(a: &ImageBuffer, b: &ImageBuffer) -> Result<(), MetricsError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(MetricsError::DimensionMismatch {
            a_width: a.width(),
            a_height: a.height(),
            b_width: b.width(),
            b_height: b.height(),
        });
    }
    Ok(())
}

/// 10·log10(1/MSE) over all channels with peak 1.0; +∞ for identical images.
pub fn psnr(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    let mse: f64 = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.data.len() as f64;
    if mse == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(10.0 * (1.0 / mse).log10())
    }
}

fn luminance(img: &ImageBuffer, x: u32, y: u32) -> f64 {
    let [r, g, b] = img.pixel(x, y);
    0.2126 * r + 0.7152 * g + 0.0722 * b
}

/// Mean per-window SSIM on luminance; see the module docs for the exact
/// convention being pinned.
pub fn ssim(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, MetricsError> {
    check_dims(a, b)?;
    if a.width() < SSIM_WINDOW || a.height() < SSIM_WINDOW {
        return Err(MetricsError::TooSmallForSsim {
            width: a.width(),
            height: a.height(),
            window: SSIM_WINDOW,
        });
    }
    let windows_x = a.width() / SSIM_WINDOW;
    let windows_y = a.height() / SSIM_WINDOW;
    let pixels = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let mut total = 0.0;
    for wy in 0..windows_y {
        for wx in 0..windows_x {
            let (mut sum_a, mut sum_b) = (0.0, 0.0);
            let (mut sum_aa, mut sum_bb, mut sum_ab) = (0.0, 0.0, 0.0);
            for dy in 0..SSIM_WINDOW {
                for dx in 0..SSIM_WINDOW {
                    let la = luminance(a, wx * SSIM_WINDOW + dx, wy * SSIM_WINDOW + dy);
                    let lb = luminance(b, wx * SSIM_WINDOW + dx, wy * SSIM_WINDOW + dy);
                    sum_a += la;
                    sum_b += lb;
                    sum_aa += la * la;
                    sum_bb += lb * lb;
                    sum_ab += la * lb;
                }
            }
            let mu_a = sum_a / pixels;
            let mu_b = sum_b / pixels;
            let var_a = sum_aa / pixels - mu_a * mu_a;
            let var_b = sum_bb / pixels - mu_b * mu_b;
            let cov = sum_ab / pixels - mu_a * mu_b;
            total += ((2.0 * mu_a * mu_b + C1) * (2.0 * cov + C2))
                / ((mu_a * mu_a + mu_b * mu_b + C1) * (var_a + var_b + C2));
        }
    }
    Ok(total / (windows_x * windows_y) as f64)
}

/// Quality and efficiency of a test render against a reference render.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareReport {
    pub psnr_db: f64,
    pub ssim: f64,
    pub color_calls_reference: u64,
    pub color_calls_test: u64,
    /// test / reference color calls.
    pub color_call_ratio: f64,
    pub density_calls_reference: u64,
    pub density_calls_test: u64,
    pub wall_reference: Duration,
    pub wall_test: Duration,
}

pub fn compare_report(
    reference: &ImageBuffer,
    test: &ImageBuffer,
    stats_reference: &RenderStats,
    stats_test: &RenderStats,
) -> Result<CompareReport, MetricsError> {
    Ok(CompareReport {
        psnr_db: psnr(reference, test)?,
        ssim: ssim(reference, test)?,
        color_calls_reference: stats_reference.color_calls,
        color_calls_test: stats_test.color_calls,
        color_call_ratio: stats_test.color_calls as f64 / stats_reference.color_calls as f64,
        density_calls_reference: stats_reference.density_calls,
        density_calls_test: stats_test.density_calls,
        wall_reference: stats_reference.wall,
        wall_test: stats_test.wall,
    })
}

pub const CSV_HEADER: &str = "scene,mode,n,delta_t,psnr_db,ssim,color_calls,density_calls,wall_ms";

/// One row of the comparison/benchmark schema. Numbers print via the
/// shortest round-trip form; infinite PSNR prints as "inf"; an unset Δt
/// (per-ray default) leaves the cell empty.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub scene: String,
    pub mode: String,
    pub n: u32,
    pub delta_t: Option<f64>,
    pub psnr_db: f64,
    pub ssim: f64,
    pub color_calls: u64,
    pub density_calls: u64,
    pub wall_ms: f64,
}

impl CsvRow {
    pub fn to_line(&self) -> String {
        let dt = self.delta_t.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.scene,
            self.mode,
            self.n,
            dt,
            self.psnr_db,
            self.ssim,
            self.color_calls,
            self.density_calls,
            self.wall_ms
        )
    }
}
