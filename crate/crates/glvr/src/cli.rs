//! The `glvr` binary: render, compare, quad-table, verify-color, and bench
//! subcommands over JSON scene files.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 usage or configuration
//! error (including unreadable/invalid scene files), 3 domain condition such
//! as a probe ray missing the scene.

use crate::image_buffer::ImageBuffer;
use crate::metrics::{compare_report, psnr, ssim, CsvRow, MetricsError, CSV_HEADER};
use crate::quadrature::{laguerre_rule, legendre_rule, QuadratureRule};
use crate::render::{render_image, RenderConfig, RenderMode, RenderStats};
use crate::scene::{load_scene, ray_aabb, Scene};
use crate::verify::{color_profile, polyfit, support_samples};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "glvr",
    version,
    about = "Volume renderer comparing Gauss-Laguerre color sampling against dense ray marching"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render one camera view to a PPM or PNG image
    Render(RenderArgs),
    /// Render a baseline and GL settings, reporting quality and cost as CSV
    Compare(CompareArgs),
    /// Print quadrature nodes and weights
    QuadTable(QuadTableArgs),
    /// Fit a polynomial to one ray's color-vs-optical-depth profile
    VerifyColor(VerifyColorArgs),
    /// Time vanilla N∈{128,4096} against GL n∈{4,8} renders
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Vanilla,
    Gl,
}

impl From<ModeArg> for RenderMode {
    fn from(m: ModeArg) -> RenderMode {
        match m {
            ModeArg::Vanilla => RenderMode::Vanilla,
            ModeArg::Gl => RenderMode::Gl,
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    /// Scene JSON file
    #[arg(long)]
    scene: PathBuf,
    /// Camera index within the scene
    #[arg(long)]
    camera: usize,
    /// Estimator; falls back to the scene's render defaults
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Sample count: Riemann points (vanilla) or Laguerre nodes (gl)
    #[arg(long)]
    n: Option<u32>,
    /// March step in world units (default: span/1024 per ray)
    #[arg(long)]
    dt: Option<f64>,
    /// Output image path, .ppm or .png
    #[arg(long)]
    out: PathBuf,
    /// Worker threads, 0 = auto (or env GLVR_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    camera: usize,
    /// Vanilla baseline sample count
    #[arg(long)]
    baseline_n: u32,
    /// Comma-separated GL node counts, e.g. 1,2,4,8
    #[arg(long, value_delimiter = ',', required = true)]
    gl_n: Vec<u32>,
    #[arg(long)]
    dt: Option<f64>,
    /// Write the CSV report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Laguerre,
    Legendre,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// Bare index,x,w rows
    Text,
    /// Same rows under an index,x,w header
    Csv,
}

#[derive(Args)]
struct QuadTableArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Rule size, 1..=64
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: FormatArg,
}

#[derive(Args)]
struct VerifyColorArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    camera: usize,
    /// Probe pixel as px,py
    #[arg(long, value_parser = parse_pixel)]
    pixel: (u32, u32),
    /// Polynomial degree to fit
    #[arg(long)]
    degree: usize,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    camera: usize,
    /// Repetitions per setting; wall time reported as the median
    #[arg(long)]
    repeat: usize,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Domain(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
            CliError::Domain(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Domain(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Stdout writer that treats a closed pipe (e.g. `glvr … | head`) as success.
fn emit(text: &str) -> Result<(), CliError> {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Render(args) => cmd_render(args),
        Command::Compare(args) => cmd_compare(args),
        Command::QuadTable(args) => cmd_quad_table(args),
        Command::VerifyColor(args) => cmd_verify_color(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn parse_pixel(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected px,py — got {s:?}"))?;
    let px = a.trim().parse().map_err(|_| format!("bad pixel x {a:?}"))?;
    let py = b.trim().parse().map_err(|_| format!("bad pixel y {b:?}"))?;
    Ok((px, py))
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("GLVR_THREADS") {
        Ok(s) => s.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "GLVR_THREADS must be a non-negative integer, got {s:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn scene_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Merges CLI flags over the scene's render defaults into a checked config.
fn build_config(
    scene: &Scene,
    mode: Option<RenderMode>,
    n: Option<u32>,
    dt: Option<f64>,
) -> Result<RenderConfig, CliError> {
    let mode = mode.or(scene.defaults.mode).ok_or_else(|| {
        CliError::Usage("--mode is required (the scene file sets no default)".into())
    })?;
    let n = n.or(scene.defaults.n_samples).ok_or_else(|| {
        CliError::Usage("--n is required (the scene file sets no default)".into())
    })?;
    let mut config = RenderConfig::new(mode, n);
    config.delta_t = dt.or(scene.defaults.delta_t);
    config.background = scene.background;
    config.validate().map_err(CliError::Usage)?;
    if mode == RenderMode::Gl {
        // Surface an out-of-range node count as a usage error instead of a
        // panic inside the render.
        laguerre_rule(n as usize).map_err(usage)?;
    }
    Ok(config)
}

fn write_image(path: &Path, img: &ImageBuffer) -> Result<(), CliError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("ppm") => std::fs::write(path, img.to_ppm())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        Some("png") => image::save_buffer(
            path,
            &img.to_rgb8(),
            img.width(),
            img.height(),
            image::ExtendedColorType::Rgb8,
        )
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        _ => Err(CliError::Usage(format!(
            "output path {} must end in .ppm or .png",
            path.display()
        ))),
    }
}

fn metrics_err(e: MetricsError) -> CliError {
    CliError::Usage(e.to_string())
}

fn cmd_render(args: RenderArgs) -> Result<(), CliError> {
    let scene = load_scene(&args.scene).map_err(usage)?;
    let camera = *scene.camera(args.camera).map_err(usage)?;
    let config = build_config(&scene, args.mode.map(Into::into), args.n, args.dt)?;
    let threads = resolve_threads(args.threads)?;
    let (img, stats) = render_image(&scene, &camera, &config, threads);
    write_image(&args.out, &img)?;
    emit(&format!(
        "{},{},{}\n",
        stats.color_calls,
        stats.density_calls,
        stats.wall_ms()
    ))
}

// One parameter per CSV column; a struct here would just rename CsvRow.
#[allow(clippy::too_many_arguments)]
fn csv_row(
    label: &str,
    mode: &str,
    n: u32,
    dt: Option<f64>,
    psnr_db: f64,
    ssim: f64,
    stats: &RenderStats,
    wall_ms: f64,
) -> String {
    CsvRow {
        scene: label.to_string(),
        mode: mode.to_string(),
        n,
        delta_t: dt,
        psnr_db,
        ssim,
        color_calls: stats.color_calls,
        density_calls: stats.density_calls,
        wall_ms,
    }
    .to_line()
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let scene = load_scene(&args.scene).map_err(usage)?;
    let camera = *scene.camera(args.camera).map_err(usage)?;
    let threads = resolve_threads(args.threads)?;
    let label = scene_label(&args.scene);

    let base_cfg = build_config(
        &scene,
        Some(RenderMode::Vanilla),
        Some(args.baseline_n),
        args.dt,
    )?;
    let (base_img, base_stats) = render_image(&scene, &camera, &base_cfg, threads);

    let mut lines = vec![CSV_HEADER.to_string()];
    let self_report =
        compare_report(&base_img, &base_img, &base_stats, &base_stats).map_err(metrics_err)?;
    lines.push(csv_row(
        &label,
        "vanilla",
        args.baseline_n,
        args.dt,
        self_report.psnr_db,
        self_report.ssim,
        &base_stats,
        base_stats.wall_ms(),
    ));

    for &n in &args.gl_n {
        let cfg = build_config(&scene, Some(RenderMode::Gl), Some(n), args.dt)?;
        let (img, stats) = render_image(&scene, &camera, &cfg, threads);
        let report = compare_report(&base_img, &img, &base_stats, &stats).map_err(metrics_err)?;
        lines.push(csv_row(
            &label,
            "gl",
            n,
            args.dt,
            report.psnr_db,
            report.ssim,
            &stats,
            stats.wall_ms(),
        ));
    }

    let text = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => emit(&text),
    }
}

fn format_rule(rule: &QuadratureRule, format: FormatArg) -> String {
    let mut out = String::new();
    if format == FormatArg::Csv {
        out.push_str("index,x,w\n");
    }
    for i in 0..rule.len() {
        out.push_str(&format!("{},{},{}\n", i + 1, rule.nodes[i], rule.weights[i]));
    }
    out
}

fn cmd_quad_table(args: QuadTableArgs) -> Result<(), CliError> {
    let rule = match args.kind {
        KindArg::Laguerre => laguerre_rule(args.n),
        KindArg::Legendre => legendre_rule(args.n),
    }
    .map_err(usage)?;
    emit(&format_rule(&rule, args.format))
}

fn cmd_verify_color(args: VerifyColorArgs) -> Result<(), CliError> {
    let scene = load_scene(&args.scene).map_err(usage)?;
    let camera = scene.camera(args.camera).map_err(usage)?;
    let (px, py) = args.pixel;
    let ray = camera.generate_ray(px, py).map_err(usage)?;
    let span = scene.field.bounds().and_then(|b| ray_aabb(&ray, &b));
    let (t0, t1) = span.ok_or_else(|| {
        CliError::Domain(format!("ray through pixel ({px},{py}) misses the scene"))
    })?;
    let ray = ray.with_span(t0, t1);
    let delta_t = (t1 - t0) / 1024.0;

    // One channel characterizes the profile; red is the fixed choice.
    let profile = color_profile(&ray, &scene.field, delta_t, 0);
    let support = support_samples(&profile);
    let points: Vec<(f64, f64)> = support.iter().map(|s| (s.x, s.value)).collect();
    let fit = polyfit(&points, args.degree).map_err(|e| CliError::Domain(e.to_string()))?;

    let mut text = String::from("x,c,fit,residual\n");
    for s in &support {
        let fitted = fit.eval(s.x);
        text.push_str(&format!("{},{},{},{}\n", s.x, s.value, fitted, s.value - fitted));
    }
    text.push_str(&format!("relative_error,{}\n", fit.relative_error));
    emit(&text)
}

fn median_ms(walls: &mut [f64]) -> f64 {
    walls.sort_by(f64::total_cmp);
    let k = walls.len();
    if k % 2 == 1 {
        walls[k / 2]
    } else {
        0.5 * (walls[k / 2 - 1] + walls[k / 2])
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    if args.repeat == 0 {
        return Err(CliError::Usage("--repeat must be ≥ 1".into()));
    }
    let scene = load_scene(&args.scene).map_err(usage)?;
    let camera = *scene.camera(args.camera).map_err(usage)?;
    let threads = resolve_threads(args.threads)?;
    let label = scene_label(&args.scene);

    let settings: [(RenderMode, u32, &str); 4] = [
        (RenderMode::Vanilla, 128, "vanilla"),
        (RenderMode::Vanilla, 4096, "vanilla"),
        (RenderMode::Gl, 4, "gl"),
        (RenderMode::Gl, 8, "gl"),
    ];
    let mut runs = Vec::with_capacity(settings.len());
    for (mode, n, name) in settings {
        let cfg = build_config(&scene, Some(mode), Some(n), None)?;
        let mut walls = Vec::with_capacity(args.repeat);
        let mut last = None;
        for _ in 0..args.repeat {
            let (img, stats) = render_image(&scene, &camera, &cfg, threads);
            walls.push(stats.wall_ms());
            last = Some((img, stats));
        }
        let (img, stats) = last.expect("repeat ≥ 1");
        runs.push((name, n, img, stats, median_ms(&mut walls)));
    }

    // Quality columns compare everything against the densest baseline.
    let reference = runs[1].2.clone();
    let mut lines = vec![CSV_HEADER.to_string()];
    for (name, n, img, stats, median) in &runs {
        let p = psnr(&reference, img).map_err(metrics_err)?;
        let s = ssim(&reference, img).map_err(metrics_err)?;
        lines.push(csv_row(&label, name, *n, None, p, s, stats, *median));
    }
    emit(&(lines.join("\n") + "\n"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticField, Field};
    use crate::scene::RenderDefaults;

    #[test]
    fn pixel_parser_accepts_pairs_and_rejects_garbage() {
        assert_eq!(parse_pixel("32,17").unwrap(), (32, 17));
        assert_eq!(parse_pixel(" 4 , 5 ").unwrap(), (4, 5));
        assert!(parse_pixel("32").is_err());
        assert!(parse_pixel("a,b").is_err());
    }

    #[test]
    fn median_of_odd_and_even_runs() {
        assert_eq!(median_ms(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median_ms(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(median_ms(&mut [7.5]), 7.5);
    }

    #[test]
    fn scene_label_uses_the_file_stem() {
        assert_eq!(scene_label(Path::new("scenes/slab.json")), "slab");
        assert_eq!(scene_label(Path::new("blob.json")), "blob");
    }

    #[test]
    fn config_resolution_prefers_flags_over_scene_defaults() {
        let scene = Scene {
            field: Field::analytic(AnalyticField::new(vec![])),
            cameras: vec![],
            background: [0.1, 0.2, 0.3],
            defaults: RenderDefaults {
                mode: Some(RenderMode::Vanilla),
                n_samples: Some(64),
                delta_t: Some(0.5),
            },
        };
        let cfg = build_config(&scene, None, None, None).unwrap();
        assert_eq!((cfg.mode, cfg.n_samples, cfg.delta_t), (RenderMode::Vanilla, 64, Some(0.5)));
        assert_eq!(cfg.background, [0.1, 0.2, 0.3]);

        let cfg = build_config(&scene, Some(RenderMode::Gl), Some(8), Some(0.25)).unwrap();
        assert_eq!((cfg.mode, cfg.n_samples, cfg.delta_t), (RenderMode::Gl, 8, Some(0.25)));

        let err = build_config(&scene, None, Some(0), None).unwrap_err();
        assert!(matches!(err, CliError::Usage(ref m) if m.contains("n")));
        assert_eq!(err.exit_code(), 2);

        let bare = Scene {
            field: Field::analytic(AnalyticField::new(vec![])),
            cameras: vec![],
            background: [0.0; 3],
            defaults: RenderDefaults::default(),
        };
        assert!(build_config(&bare, Some(RenderMode::Gl), None, None).is_err());
        assert!(build_config(&bare, None, Some(8), None).is_err());
    }
}
