//! Studies that justify the quadrature renderer: extracting the color of a
//! ray as a function of optical depth, checking how well a low-degree
//! polynomial approximates it, and the Bernstein-polynomial identities
//! behind the density argument for why such approximations must exist.

use crate::field::Field;
use crate::math::Ray;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("polynomial degree {degree} needs at least {needed} samples, got {got}")]
    NotEnoughSamples {
        degree: usize,
        needed: usize,
        got: usize,
    },
    #[error(
        "least-squares system is rank-deficient (pivot ratio {pivot_ratio:.2e}); \
         the samples do not span enough distinct x values"
    )]
    RankDeficient { pivot_ratio: f64 },
}

/// One march step of a ray's color profile along optical depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    /// Ray parameter at the segment start.
    pub t: f64,
    /// Optical depth accumulated before this segment.
    pub x: f64,
    /// The chosen color channel at this point.
    pub value: f64,
    /// T·σ = e^{−x}·σ, the integrand weight this point would carry. Used to
    /// decide which part of the profile matters.
    pub weight_density: f64,
}

/// Marches the clipped ray in Δt steps and records (x, c) pairs — the color
/// channel as a function of optical depth, i.e. the integrand the quadrature
/// renderer evaluates at its nodes.
pub fn color_profile(ray: &Ray, field: &Field, delta_t: f64, channel: usize) -> Vec<ProfileSample> {
    assert!(channel < 3, "rgb channel index");
    assert!(delta_t > 0.0);
    let mut out = Vec::new();
    let mut x = 0.0_f64;
    let mut segment = 0_u64;
    loop {
        let t = ray.t_min + segment as f64 * delta_t;
        if t >= ray.t_max {
            break;
        }
        let step = delta_t.min(ray.t_max - t);
        let p = ray.at(t);
        let sigma = field.density_at(p);
        let value = field.color_at(p, ray.dir)[channel];
        out.push(ProfileSample {
            t,
            x,
            value,
            weight_density: (-x).exp() * sigma,
        });
        x += sigma * step;
        segment += 1;
    }
    out
}

/// Fraction of the peak weight density below which profile samples are
/// considered outside the support and dropped before fitting.
pub const SUPPORT_THRESHOLD_RATIO: f64 = 1e-4;

/// The part of the profile that actually contributes to the ray color:
/// samples whose weight density exceeds the relative threshold. Empty for a
/// vacuum (every weight density is zero).
pub fn support_samples(profile: &[ProfileSample]) -> Vec<ProfileSample> {
    let peak = profile
        .iter()
        .map(|s| s.weight_density)
        .fold(0.0_f64, f64::max);
    let cut = SUPPORT_THRESHOLD_RATIO * peak;
    profile
        .iter()
        .filter(|s| s.weight_density > cut)
        .copied()
        .collect()
}

/// A least-squares polynomial fit. Fitting and evaluation run in a Chebyshev
/// basis scaled to the sample interval — a raw Vandermonde matrix is already
/// unusable around degree 7 — while `coefficients` reports the equivalent
/// monomial form for inspection.
#[derive(Debug, Clone)]
pub struct PolyFit {
    cheb: Vec<f64>,
    /// Monomial coefficients, ascending: p(x) = Σ coefficients[k]·x^k.
    pub coefficients: Vec<f64>,
    /// RMS residual / RMS of y over the fitted samples.
    pub relative_error: f64,
    scale: f64,
    offset: f64,
}

impl PolyFit {
    pub fn degree(&self) -> usize {
        self.cheb.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.cheb, self.scale * x + self.offset)
    }
}

/// Σ c_k·T_k(u) by Clenshaw recurrence.
fn clenshaw(c: &[f64], u: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for k in (1..c.len()).rev() {
        let b = 2.0 * u * b1 - b2 + c[k];
        b2 = b1;
        b1 = b;
    }
    u * b1 - b2 + c[0]
}

/// Gaussian elimination with partial pivoting. `Err` carries the offending
/// pivot relative to the largest matrix entry as a conditioning diagnostic.
#[allow(clippy::needless_range_loop)] // two-row updates need plain indices
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, f64> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(0.0);
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        let pivot = a[pivot_row][col].abs();
        if pivot <= 1e-12 * scale {
            return Err(pivot / scale);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Monomial coefficient vectors of T_0..T_deg via the recurrence
/// T_{k+1} = 2u·T_k − T_{k−1}.
fn chebyshev_monomials(deg: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![1.0]];
    if deg >= 1 {
        out.push(vec![0.0, 1.0]);
    }
    for k in 2..=deg {
        let mut next = vec![0.0; k + 1];
        for (i, &c) in out[k - 1].iter().enumerate() {
            next[i + 1] += 2.0 * c;
        }
        for (i, &c) in out[k - 2].iter().enumerate() {
            next[i] -= c;
        }
        out.push(next);
    }
    out
}

/// Coefficients of Σ mu[k]·(s·x + off)^k as a polynomial in x.
fn affine_compose(mu: &[f64], s: f64, off: f64) -> Vec<f64> {
    let deg = mu.len() - 1;
    let mut result = vec![0.0; deg + 1];
    let mut power = vec![1.0];
    for (k, &m) in mu.iter().enumerate() {
        for (i, &c) in power.iter().enumerate() {
            result[i] += m * c;
        }
        if k < deg {
            let mut next = vec![0.0; power.len() + 1];
            for (i, &c) in power.iter().enumerate() {
                next[i] += c * off;
                next[i + 1] += c * s;
            }
            power = next;
        }
    }
    result
}

/// Least-squares fit of (x, y) samples by a degree-`degree` polynomial via
/// the normal equations in the scaled Chebyshev basis.
#[allow(clippy::needless_range_loop)] // symmetric Gram fill wants indices
pub fn polyfit(samples: &[(f64, f64)], degree: usize) -> Result<PolyFit, VerifyError> {
    let needed = degree + 1;
    if samples.len() < needed {
        return Err(VerifyError::NotEnoughSamples {
            degree,
            needed,
            got: samples.len(),
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, _) in samples {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    // u = scale·x + offset maps [lo, hi] onto [−1, 1]; a single distinct x
    // degenerates to u = 0 (only a degree-0 fit can succeed there).
    let (scale, offset) = if hi > lo {
        (2.0 / (hi - lo), -(hi + lo) / (hi - lo))
    } else {
        (1.0, -lo)
    };

    let dim = degree + 1;
    let mut gram = vec![vec![0.0; dim]; dim];
    let mut rhs = vec![0.0; dim];
    let mut basis = vec![0.0; dim];
    for &(x, y) in samples {
        let u = scale * x + offset;
        basis[0] = 1.0;
        if degree >= 1 {
            basis[1] = u;
        }
        for k in 2..dim {
            basis[k] = 2.0 * u * basis[k - 1] - basis[k - 2];
        }
        for i in 0..dim {
            for j in i..dim {
                gram[i][j] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }
    for i in 0..dim {
        for j in 0..i {
            gram[i][j] = gram[j][i];
        }
    }

    let cheb = solve_dense(gram, rhs)
        .map_err(|pivot_ratio| VerifyError::RankDeficient { pivot_ratio })?;

    let (mut ss_res, mut ss_y) = (0.0, 0.0);
    for &(x, y) in samples {
        let fit = clenshaw(&cheb, scale * x + offset);
        ss_res += (y - fit) * (y - fit);
        ss_y += y * y;
    }
    let relative_error = if ss_y == 0.0 {
        if ss_res == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (ss_res / ss_y).sqrt()
    };

    let t_polys = chebyshev_monomials(degree);
    let mut mu = vec![0.0; dim];
    for (k, poly) in t_polys.iter().enumerate() {
        for (i, &c) in poly.iter().enumerate() {
            mu[i] += cheb[k] * c;
        }
    }
    let coefficients = affine_compose(&mu, scale, offset);

    Ok(PolyFit {
        cheb,
        coefficients,
        relative_error,
        scale,
        offset,
    })
}

/// The n-th Bernstein polynomial of f at x: Σ_{k=0}^{n} f(k/n)·C(n,k)·
/// x^k(1−x)^{n−k}, evaluated by de Casteljau's recurrence, which stays
/// stable far past the n where binomial coefficients overflow.
pub fn bernstein(f: impl Fn(f64) -> f64, n: usize, x: f64) -> f64 {
    assert!(n >= 1, "bernstein order must be ≥ 1");
    assert!((0.0..=1.0).contains(&x));
    let mut c: Vec<f64> = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
    for level in (1..=n).rev() {
        for i in 0..level {
            c[i] += x * (c[i + 1] - c[i]);
        }
    }
    c[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{AnalyticField, Primitive, Shape, SurfaceColor};
    use crate::math::Vec3;

    fn const_color_slab(sigma: f64) -> Field {
        Field::analytic(AnalyticField::new(vec![Primitive {
            shape: Shape::Box {
                min: Vec3::new(-5.0, -5.0, 0.0),
                max: Vec3::new(5.0, 5.0, 4.0),
                sigma,
            },
            color: SurfaceColor::Constant([0.7, 0.3, 0.1]),
        }]))
    }

    #[test]
    fn homogeneous_profile_is_linear_in_depth_with_constant_color() {
        let field = const_color_slab(1.0);
        let ray = Ray::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1.0))
            .with_span(1.0, 5.0);
        let profile = color_profile(&ray, &field, 0.01, 0);
        assert_eq!(profile.len(), 400);
        for s in &profile {
            assert!((s.x - (s.t - 1.0)).abs() < 1e-12, "x should equal depth");
            assert_eq!(s.value, 0.7);
        }
        for pair in profile.windows(2) {
            assert!(pair[1].x >= pair[0].x);
        }
        let support = support_samples(&profile);
        assert_eq!(support.len(), profile.len());
    }

    #[test]
    fn vacuum_profile_has_empty_support() {
        let field = const_color_slab(0.0);
        let ray = Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0)).with_span(0.0, 4.0);
        let profile = color_profile(&ray, &field, 0.1, 0);
        assert!(!profile.is_empty());
        assert!(profile.iter().all(|s| s.x == 0.0));
        assert!(support_samples(&profile).is_empty());
    }

    #[test]
    fn blob_profile_is_a_bump_on_a_subinterval() {
        // A gaussian blob mid-ray: the weight density must vanish at both
        // ends of the span and peak strictly inside.
        let field = Field::analytic(AnalyticField::new(vec![Primitive {
            shape: Shape::GaussianBlob {
                center: Vec3::new(0.0, 0.0, 2.0),
                scale: 0.3,
                peak: 6.0,
            },
            color: SurfaceColor::Constant([0.8, 0.4, 0.2]),
        }]));
        let ray = Ray::new(Vec3::ZERO, Vec3::new(0.0, 0.0, 1.0));
        let bounds = field.bounds().unwrap();
        let (t0, t1) = crate::scene::ray_aabb(&ray, &bounds).unwrap();
        let profile = color_profile(&ray.with_span(t0, t1), &field, (t1 - t0) / 512.0, 0);
        let peak = profile
            .iter()
            .map(|s| s.weight_density)
            .fold(0.0_f64, f64::max);
        assert!(peak > 0.1);
        assert!(profile.first().unwrap().weight_density < 1e-4 * peak);
        assert!(profile.last().unwrap().weight_density < 1e-4 * peak);
        let support = support_samples(&profile);
        assert!(!support.is_empty() && support.len() < profile.len());
    }

    #[test]
    fn polyfit_recovers_an_exact_quadratic() {
        let samples: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = i as f64 * 0.1;
                (x, 3.0 * x * x - x + 2.0)
            })
            .collect();
        let fit = polyfit(&samples, 2).unwrap();
        assert!(fit.relative_error < 1e-10);
        let want = [2.0, -1.0, 3.0];
        for (got, want) in fit.coefficients.iter().zip(want) {
            assert!((got - want).abs() < 1e-9, "{:?}", fit.coefficients);
        }
        for &(x, y) in &samples {
            assert!((fit.eval(x) - y).abs() < 1e-9);
        }
    }

    #[test]
    fn polyfit_constant_data_degree_zero_is_exact() {
        let samples: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, 0.42)).collect();
        let fit = polyfit(&samples, 0).unwrap();
        assert!(fit.relative_error < 1e-12);
        assert!((fit.coefficients[0] - 0.42).abs() < 1e-12);
    }

    #[test]
    fn polyfit_error_is_monotone_in_degree() {
        let samples: Vec<(f64, f64)> = (0..200)
            .map(|i| {
                let x = i as f64 / 199.0 * 3.0;
                (x, (1.5 * x).sin().exp())
            })
            .collect();
        let mut last = f64::INFINITY;
        for degree in 0..=9 {
            let err = polyfit(&samples, degree).unwrap().relative_error;
            assert!(
                err <= last + 1e-12,
                "degree {degree}: {err} > previous {last}"
            );
            last = err;
        }
        assert!(last < 5e-3, "degree 9 on a smooth function: {last}");
    }

    #[test]
    fn polyfit_rejects_degenerate_inputs() {
        let few = [(0.0, 1.0), (1.0, 2.0)];
        assert!(matches!(
            polyfit(&few, 3),
            Err(VerifyError::NotEnoughSamples { needed: 4, got: 2, .. })
        ));
        let stacked: Vec<(f64, f64)> = (0..10).map(|i| (2.5, i as f64)).collect();
        assert!(matches!(
            polyfit(&stacked, 1),
            Err(VerifyError::RankDeficient { .. })
        ));
    }

    #[test]
    fn bernstein_reproduces_constants_and_linear_exactly() {
        for n in [1, 2, 8, 33] {
            for i in 0..=10 {
                let x = i as f64 / 10.0;
                assert!((bernstein(|_| 0.625, n, x) - 0.625).abs() < 1e-12);
                assert!((bernstein(|t| t, n, x) - x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bernstein_quadratic_identity() {
        // B_n(t²)(x) = x² + x(1−x)/n, the variance of a Binomial(n, x)/n.
        for n in [1, 2, 8, 32] {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let want = x * x + x * (1.0 - x) / n as f64;
                let got = bernstein(|t| t * t, n, x);
                assert!((got - want).abs() < 1e-10, "n={n} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bernstein_output_is_a_convex_combination_of_node_values() {
        let f = |t: f64| (7.3 * t).sin() + 0.2 * t;
        for n in [3, 9, 27] {
            let values: Vec<f64> = (0..=n).map(|k| f(k as f64 / n as f64)).collect();
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                    (l.min(v), h.max(v))
                });
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                let b = bernstein(f, n, x);
                assert!(b >= lo - 1e-12 && b <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn bernstein_sup_error_for_the_kink_matches_frozen_references() {
        // |x − 0.5| is the canonical non-smooth test: convergence is O(1/√n)
        // and these sup errors over a 1001-point grid were frozen from an
        // independent scripted evaluation.
        let f = |t: f64| (t - 0.5).abs();
        let frozen = [
            (8, 0.13671875),
            (32, 0.06997496704570949),
            (128, 0.035193046085007576),
            (512, 0.017622317742919363),
        ];
        let mut last = f64::INFINITY;
        for (n, want) in frozen {
            let sup = (0..=1000)
                .map(|i| {
                    let x = i as f64 / 1000.0;
                    (bernstein(f, n, x) - f(x)).abs()
                })
                .fold(0.0_f64, f64::max);
            assert!((sup - want).abs() < 1e-12, "n={n}: {sup} vs {want}");
            assert!(sup <= last);
            last = sup;
        }
        assert!(last < 0.05);
    }
}
