//! Closed forms and quadratures for the pairing of `x^2` with the conjugated
//! squaring maps, the quadratic polynomials and the Lattès family.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use std::f64::consts::{LN_2, PI, TAU};

use crate::error::{Error, Result};
use crate::heights::{standard_height, ProjPointQ};
use crate::util::KahanSum;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Default cap on integrand evaluations for one adaptive quadrature.
pub const DEFAULT_MAX_EVALUATIONS: usize = 400_000;

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_685_212_570,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Absolute and relative tolerance; the target is the larger of the two.
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn absolute(tol: f64) -> Self {
        Tolerance { abs: tol, rel: 0.0 }
    }

    pub fn relative(tol: f64) -> Self {
        Tolerance { abs: 0.0, rel: tol }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Too narrow to bisect in double precision.
    exhausted: bool,
}

/// One 21-point Kronrod panel. The integrand returns a value and an
/// absolute error bound on that value (zero for exact evaluations).
fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (fc, ec) = f(c)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut inner = WGK[10] * ec;
    for j in 0..10 {
        let (f1, e1) = f(c - h * XGK[j])?;
        let (f2, e2) = f(c + h * XGK[j])?;
        kronrod += WGK[j] * (f1 + f2);
        inner += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    let error = ((kronrod - gauss) * h).abs() + inner * h.abs();
    let exhausted =
        !(a < c && c < b) || (b - a).abs() <= 64.0 * f64::EPSILON * c.abs().max(f64::MIN_POSITIVE);
    Ok(Panel {
        a,
        b,
        value,
        error,
        exhausted,
    })
}

/// Globally adaptive 21-point Gauss–Kronrod quadrature over consecutive
/// breakpoints `points[0] < points[1] < ...`, bisecting the panel with the
/// largest error until the summed error meets the tolerance.
pub fn integrate<F>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
    max_evals: usize,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter(
            "quadrature breakpoints must increase".into(),
        ));
    }
    let mut panels = Vec::new();
    for w in points.windows(2) {
        panels.push(gk21(&mut f, w[0], w[1])?);
    }
    let mut evals = 21 * panels.len();
    loop {
        let mut value = KahanSum::default();
        let mut error = 0.0;
        for p in &panels {
            value.add(p.value);
            error += p.error;
        }
        let value = value.value();
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.exhausted)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let done = error <= tol.target(value);
        if done || worst.is_none() || evals + 42 > max_evals || !value.is_finite() {
            if done {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    evaluations: evals,
                });
            }
            return Err(Error::Quadrature {
                tol: tol.target(value),
                evaluations: evals,
                value,
                error,
            });
        }
        let p = panels.swap_remove(worst.expect("checked"));
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk21(&mut f, p.a, mid)?);
        panels.push(gk21(&mut f, mid, p.b)?);
        evals += 42;
    }
}

fn exact<G: FnMut(f64) -> f64>(mut g: G) -> impl FnMut(f64) -> Result<(f64, f64)> {
    move |x| Ok((g(x), 0.0))
}

// ---------------------------------------------------------------------------
// Conjugated squaring maps

/// `I(t) = ∫_0^1 log⁺|t + e^{2πiθ}| dθ - log⁺ t` to absolute error `tol`.
pub fn i_of_t(t: f64, tol: f64) -> Result<QuadratureResult> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "I(t) needs t >= 0, got {t}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    if t == 0.0 || t >= 2.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    // |t + e^{2πiθ}| > 1 exactly for |θ| < θ*, so by symmetry the first
    // integral is twice the integral of the logarithm over [0, θ*].
    let theta_star = (-t / 2.0).acos() / TAU;
    let g = |theta: f64| {
        let c = (PI * theta).cos();
        // |t + e^{2πiθ}|^2 = (1 - t)^2 + 4t cos^2(πθ).
        ((1.0 - t) * (1.0 - t) + 4.0 * t * c * c).ln()
    };
    let q = integrate(
        exact(g),
        &[0.0, theta_star],
        Tolerance::absolute(tol),
        DEFAULT_MAX_EVALUATIONS,
    )?;
    Ok(QuadratureResult {
        value: q.value - t.ln().max(0.0),
        ..q
    })
}

/// `(3√3 / 4π) L(2, χ)` with `χ` the nontrivial character mod 3, to absolute
/// error `tol`.
pub fn smyth_constant(tol: f64) -> f64 {
    (3.0 * 3f64.sqrt() / (4.0 * PI)) * l2_chi3(tol * 4.0 * PI / (3.0 * 3f64.sqrt()))
}

/// `L(2, χ) = 1 - 1/4 + 1/16 - 1/25 + ...`. The nonzero terms alternate in
/// sign with decreasing size, so the limit lies between consecutive partial
/// sums; the midpoint is within half the first omitted term.
fn l2_chi3(tol: f64) -> f64 {
    let tol = tol.max(1e-15);
    let mut sum = KahanSum::default();
    let mut k: u64 = 1;
    loop {
        let sign = if k % 3 == 1 { 1.0 } else { -1.0 };
        sum.add(sign / (k * k) as f64);
        k += if k % 3 == 1 { 1 } else { 2 };
        let next = 1.0 / (k * k) as f64;
        if next <= 2.0 * tol {
            let sign = if k % 3 == 1 { 1.0 } else { -1.0 };
            return sum.value() + 0.5 * sign * next;
        }
    }
}

/// `h_st(α) + I(|α|)`.
pub fn coc_pairing_exact(alpha: &BigRational, tol: f64) -> Result<f64> {
    let h = standard_height(&ProjPointQ::from_rational(alpha)).value;
    let t = alpha.abs().to_f64().unwrap_or(f64::INFINITY);
    Ok(h + i_of_t(t, tol)?.value)
}

/// `[h_st(c)/2 - log 3, h_st(c)/2 + log 2]`.
pub fn quad_pairing_bounds(c: &BigRational) -> (f64, f64) {
    let h = standard_height(&ProjPointQ::from_rational(c)).value;
    (0.5 * h - 3f64.ln(), 0.5 * h + LN_2)
}

// ---------------------------------------------------------------------------
// Lattès family

/// `1 / (|αe^{iθ} - 1| |βe^{iθ} + 1|)`, written to stay accurate near the
/// poles at `α = 1, θ = 0` and `β = 1, θ = π`.
fn f_integrand(alpha: f64, beta: f64, theta: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    let d1 = (alpha - 1.0) * (alpha - 1.0) + 4.0 * alpha * s * s;
    let d2 = (beta - 1.0) * (beta - 1.0) + 4.0 * beta * c * c;
    1.0 / (d1 * d2).sqrt()
}

fn f_unchecked(alpha: f64, beta: f64, tol: Tolerance) -> Result<QuadratureResult> {
    let q = integrate(
        exact(|t| f_integrand(alpha, beta, t)),
        &[0.0, PI],
        Tolerance {
            abs: tol.abs / 2.0,
            rel: tol.rel,
        },
        DEFAULT_MAX_EVALUATIONS,
    )?;
    Ok(QuadratureResult {
        value: 2.0 * q.value,
        error_estimate: 2.0 * q.error_estimate,
        evaluations: q.evaluations,
    })
}

/// `F(α, β) = ∫_0^{2π} dθ / (|αe^{iθ} - 1| |βe^{iθ} + 1|)` to absolute error
/// `tol`. Divergent at `α = 1` or `β = 1`.
#[allow(non_snake_case)]
pub fn F_alpha_beta(alpha: f64, beta: f64, tol: f64) -> Result<QuadratureResult> {
    if !(alpha >= 0.0 && beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
        return Err(Error::InvalidParameter(
            "F(α, β) needs finite α, β >= 0".into(),
        ));
    }
    if alpha == 1.0 || beta == 1.0 {
        return Err(Error::InvalidParameter(
            "F(α, β) diverges at α = 1 or β = 1".into(),
        ));
    }
    f_unchecked(alpha, beta, Tolerance::absolute(tol))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LattesArchData {
    pub a: u64,
    pub b: u64,
    /// `∫ |P(x)|^{-1} dℓ(x)` over the plane.
    pub c_p: QuadratureResult,
    /// `∫ log⁺|x| dμ`, the measure being `|P|^{-1} dℓ / C_P`.
    pub logplus_integral: QuadratureResult,
    pub theta: QuadratureResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LattesQuadrature {
    pub data: LattesArchData,
    /// `Θ + log √(ab)`.
    pub pairing: QuadratureResult,
    /// `(1/ab) ∫_0^∞ F(r/a, r/b) log(r/√(ab)) dr`, zero in exact arithmetic.
    pub vanishing_integral: QuadratureResult,
    /// `C_P` and the log⁺ integral by Cartesian panels, for reconciliation.
    pub cartesian_c_p: QuadratureResult,
    pub cartesian_logplus: QuadratureResult,
}

/// `∫_lo^∞ g(r) dr` split at the breakpoints, with the tail beyond the last
/// breakpoint `R` mapped to `u ∈ (0, 1]` through `r = R/u`.
fn half_line<G>(mut g: G, points: &[f64], tol: Tolerance) -> Result<QuadratureResult>
where
    G: FnMut(f64) -> Result<(f64, f64)>,
{
    let r = *points.last().expect("breakpoints");
    let head = integrate(&mut g, points, tol, DEFAULT_MAX_EVALUATIONS)?;
    let tail = integrate(
        |u: f64| {
            let (v, e) = g(r / u)?;
            let jac = r / (u * u);
            Ok((v * jac, e * jac))
        },
        &[0.0, 1.0],
        tol,
        DEFAULT_MAX_EVALUATIONS,
    )?;
    Ok(QuadratureResult {
        value: head.value + tail.value,
        error_estimate: head.error_estimate + tail.error_estimate,
        evaluations: head.evaluations + tail.evaluations,
    })
}

fn sorted_points(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|&p| p > lo && p < hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `value / den` with first-order error propagation.
fn ratio(num: &QuadratureResult, den: &QuadratureResult) -> QuadratureResult {
    let value = num.value / den.value;
    let error_estimate = num.error_estimate / den.value.abs()
        + num.value.abs() * den.error_estimate / (den.value * den.value);
    QuadratureResult {
        value,
        error_estimate,
        evaluations: num.evaluations + den.evaluations,
    }
}

/// Polar route: every integral is `∫ F(r/a, r/b) w(r) dr` for a weight `w`.
fn lattes_polar(a: f64, b: f64, tol: f64) -> Result<[QuadratureResult; 4]> {
    let inner_rel = 1e-3 * tol;
    let f = |r: f64, w: f64| -> Result<(f64, f64)> {
        if w == 0.0 {
            return Ok((0.0, 0.0));
        }
        let q = f_unchecked(r / a, r / b, Tolerance::relative(inner_rel))?;
        Ok((q.value * w, q.error_estimate * w.abs()))
    };
    let big = 2.0 * a.max(b);
    let rel = Tolerance::relative(tol);
    let total = half_line(|r| f(r, 1.0), &sorted_points(vec![a, b], 0.0, big), rel)?;
    let logplus = half_line(|r| f(r, r.ln()), &sorted_points(vec![a, b], 1.0, big), rel)?;
    let theta = integrate(
        |r| f(r, -r.ln()),
        &sorted_points(vec![a, b], 0.0, 1.0),
        rel,
        DEFAULT_MAX_EVALUATIONS,
    )?;
    let centre = (a * b).sqrt();
    let vanishing = half_line(
        |r| f(r, (r / centre).ln()),
        &sorted_points(vec![a, b, centre], 0.0, big),
        Tolerance::absolute(tol * total.value),
    )?;
    Ok([total, logplus, theta, vanishing])
}

/// Cartesian route: `∫∫ w(x, y) / |P(x + iy)| dx dy` over the plane, using
/// the symmetry `y -> -y`.
fn lattes_cartesian(a: f64, b: f64, tol: f64, logplus: bool) -> Result<QuadratureResult> {
    let inv_p = |x: f64, y: f64| {
        let m0 = (x * x + y * y).sqrt();
        let m1 = ((x - a) * (x - a) + y * y).sqrt();
        let m2 = ((x + b) * (x + b) + y * y).sqrt();
        let w = if logplus { m0.ln().max(0.0) } else { 1.0 };
        w / (m0 * m1 * m2)
    };
    let inner_rel = 1e-3 * tol;
    let column = |x: f64| -> Result<(f64, f64)> {
        let mut pts = vec![];
        if logplus && x.abs() < 1.0 {
            pts.push((1.0 - x * x).sqrt());
        }
        let y_big = 1.0 + x.abs();
        let q = half_line(
            exact(|y| inv_p(x, y)),
            &sorted_points(pts, 0.0, y_big),
            Tolerance::relative(inner_rel),
        )?;
        Ok((2.0 * q.value, 2.0 * q.error_estimate))
    };
    let x_big = 2.0 * a.max(b) + 1.0;
    let mut pts = vec![0.0, a, -b, -x_big];
    if logplus {
        pts.extend([-1.0, 1.0]);
    }
    let rel = Tolerance::relative(tol);
    let right = half_line(column, &sorted_points(pts.clone(), -x_big, x_big), rel)?;
    // The left tail, mirrored onto the right.
    let left = integrate(
        |u: f64| {
            let (v, e) = column(-x_big / u)?;
            let jac = x_big / (u * u);
            Ok((v * jac, e * jac))
        },
        &[0.0, 1.0],
        rel,
        DEFAULT_MAX_EVALUATIONS,
    )?;
    Ok(QuadratureResult {
        value: right.value + left.value,
        error_estimate: right.error_estimate + left.error_estimate,
        evaluations: right.evaluations + left.evaluations,
    })
}

/// The archimedean Lattès data for `y^2 = x(x - a)(x + b)` and the pairing
/// `Θ_{a,b} + log √(ab)` with `x^2`, to relative tolerance about `tol`.
/// `C_P` and the log⁺ integral are computed in polar and Cartesian
/// coordinates; their error estimates include the gap between the two.
pub fn lattes_pairing_quadrature(a: u64, b: u64, tol: f64) -> Result<LattesQuadrature> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter(
            "Lattès parameters must be positive".into(),
        ));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let (af, bf) = (a as f64, b as f64);
    let ab = af * bf;
    let [total, logplus, theta_int, vanishing] = lattes_polar(af, bf, tol)?;
    let scale = |q: &QuadratureResult, s: f64| QuadratureResult {
        value: q.value * s,
        error_estimate: q.error_estimate * s,
        evaluations: q.evaluations,
    };
    let mut c_p = scale(&total, 1.0 / ab);
    let mut logplus_mu = ratio(&logplus, &total);
    let theta = ratio(&theta_int, &total);

    let cart_tol = tol.max(1e-7);
    let cart_total = lattes_cartesian(af, bf, cart_tol, false)?;
    let cart_log = lattes_cartesian(af, bf, cart_tol, true)?;
    let cart_logplus = ratio(&cart_log, &cart_total);
    c_p.error_estimate = c_p.error_estimate.max((c_p.value - cart_total.value).abs());
    logplus_mu.error_estimate = logplus_mu
        .error_estimate
        .max((logplus_mu.value - cart_logplus.value).abs());

    let pairing = QuadratureResult {
        value: theta.value + 0.5 * ab.ln(),
        error_estimate: theta.error_estimate,
        evaluations: theta.evaluations,
    };
    Ok(LattesQuadrature {
        data: LattesArchData {
            a,
            b,
            c_p,
            logplus_integral: logplus_mu,
            theta,
        },
        pairing,
        vanishing_integral: scale(&vanishing, 1.0 / ab),
        cartesian_c_p: cart_total,
        cartesian_logplus: cart_logplus,
    })
}
