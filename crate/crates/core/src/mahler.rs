//! Complex roots of integer polynomials and the log Mahler measure.
//!
//! Roots are found by Aberth–Ehrlich iteration. Approximations are always
//! stored as `f64` complex numbers; only the evaluation of `f` and `f'` is
//! done at higher precision, in exact fixed-point arithmetic on [`BigInt`]
//! with a rigorous rounding bound. Each root then gets an inclusion radius
//! from the Weierstrass correction `n |f(z_i)| / (|a_n| Π|z_i - z_j|)`:
//! every connected union of `k` such disks holds exactly `k` roots.
//!
//! Points with `|z| > 1` are evaluated through the reversed polynomial at
//! `1/z`, so fixed-point Horner never sees a point outside the unit disk.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::bigpoly::{IntPolynomial, Primitive};
use crate::error::{Error, Result};
use crate::util::{ldexp, log_abs, split_bigint, KahanSum};

/// Relative radius `log_mahler` asks for.
pub const DEFAULT_TARGET_RADIUS: f64 = 1e-11;

const F64_SWEEPS: usize = 200;
const ORACLE_SWEEPS: usize = 2000;
const BIG_SWEEPS: usize = 120;
const START_BITS: u64 = 128;
const MAX_BITS: u64 = 16384;
/// Fractional bits of the fixed-point evaluation point.
const POINT_BITS: u64 = 62;
/// Centering shifts larger than this are skipped: they would cost the small
/// roots their relative precision.
const MAX_SHIFT: i64 = 64;

/// Approximate roots with inclusion radii.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    pub radii: Vec<f64>,
    /// Largest `|f(z)|` relative to `Σ|a_k| max(1,|z|)^n` over the roots.
    pub residual: f64,
    /// Fractional bits of the last evaluation pass (0 when none was needed).
    pub precision_bits: u32,
}

impl RootSet {
    pub fn worst_relative_radius(&self) -> f64 {
        self.roots
            .iter()
            .zip(&self.radii)
            .map(|(z, r)| r / z.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MahlerValue {
    pub value: f64,
    pub error_bound: f64,
}

// ---------------------------------------------------------------------------
// Double-precision evaluation

/// Coefficients as `(mantissa, exponent)` pairs so that polynomials whose
/// coefficients span more than the double exponent range still evaluate.
struct F64Poly {
    fwd: Vec<(f64, i64)>,
    rev: Vec<(f64, i64)>,
}

impl F64Poly {
    fn new(coeffs: &[BigInt]) -> Self {
        let fwd: Vec<(f64, i64)> = coeffs.iter().map(split_bigint).collect();
        let rev = fwd.iter().rev().copied().collect();
        F64Poly { fwd, rev }
    }

    fn degree(&self) -> usize {
        self.fwd.len() - 1
    }

    /// `(p, p', bound)` all scaled by a common power of two.
    fn horner(c: &[(f64, i64)], z: Complex64) -> (Complex64, Complex64, f64) {
        let n = c.len() - 1;
        let az = z.norm();
        let (mn, en) = c[n];
        let mut scale = en;
        let mut p = Complex64::new(mn, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut e = mn.abs();
        for k in (0..n).rev() {
            let (m, ex) = c[k];
            if m != 0.0 && ex - scale > 400 {
                // Keep the incoming coefficient representable.
                let shift = ex - scale;
                let f = ldexp(1.0, -shift);
                p *= f;
                dp *= f;
                e *= f;
                scale += shift;
            }
            let ck = if m == 0.0 { 0.0 } else { ldexp(m, ex - scale) };
            dp = dp * z + p;
            p = p * z + ck;
            e = e * az + ck.abs();
            let big = e.max(dp.norm());
            if big > 0.0 && !(2f64.powi(-400)..=2f64.powi(400)).contains(&big) {
                let shift = big.log2().floor() as i64;
                let f = ldexp(1.0, -shift);
                p *= f;
                dp *= f;
                e *= f;
                scale += shift;
            }
        }
        (p, dp, e)
    }

    /// Newton ratio `f/f'`, or `None` when `f(z)` is below rounding noise.
    fn newton(&self, z: Complex64) -> Option<Complex64> {
        let n = self.degree() as f64;
        let noise_factor = 4.0 * (n + 1.0) * f64::EPSILON;
        if z.norm() <= 1.0 {
            let (p, dp, e) = Self::horner(&self.fwd, z);
            if p.norm() <= noise_factor * e {
                return None;
            }
            Some(p / dp)
        } else {
            let w = z.inv();
            let (g, dg, e) = Self::horner(&self.rev, w);
            if g.norm() <= noise_factor * e {
                return None;
            }
            Some(z * g / (g * n - w * dg))
        }
    }
}

// ---------------------------------------------------------------------------
// Fixed-point evaluation

/// Complex fixed-point number `(re + i im) * 2^-frac`.
#[derive(Clone, Debug)]
struct CBig {
    re: BigInt,
    im: BigInt,
}

impl CBig {
    fn zero() -> Self {
        CBig {
            re: BigInt::zero(),
            im: BigInt::zero(),
        }
    }

    /// `self * (zr + i zi) / 2^shift`, rounded toward -inf.
    fn mul_point(&self, zr: i64, zi: i64, shift: u64) -> CBig {
        let re = (&self.re * zr - &self.im * zi) >> shift;
        let im = (&self.re * zi + &self.im * zr) >> shift;
        CBig { re, im }
    }

    fn add_assign(&mut self, other: &CBig) {
        self.re += &other.re;
        self.im += &other.im;
    }

    /// `(c, e)` with value `c * 2^e`.
    fn to_f64(&self) -> (Complex64, i64) {
        let bits = self.re.bits().max(self.im.bits());
        let shift = bits.saturating_sub(60);
        let conv = |x: &BigInt| (x >> shift).to_f64().expect("60 bits");
        (Complex64::new(conv(&self.re), conv(&self.im)), shift as i64)
    }

    fn ln_abs(&self) -> f64 {
        let (c, e) = self.to_f64();
        c.norm().ln() + e as f64 * std::f64::consts::LN_2
    }
}

struct BigPoly {
    fwd: Vec<BigInt>,
    rev: Vec<BigInt>,
    frac_bits: u64,
    /// `log 2^(S - F)`: the absolute size of one unit in the last place.
    ln_ulp: f64,
}

struct BigEval {
    /// The point actually evaluated (differs from the input by rounding).
    point: Complex64,
    newton: Option<Complex64>,
    ln_f: f64,
    ln_err: f64,
}

impl BigPoly {
    fn new(coeffs: &[BigInt], frac_bits: u64) -> Self {
        let l1: BigInt = coeffs.iter().map(|c| c.abs()).sum();
        let s = l1.bits() as i64;
        let shift = frac_bits as i64 - s;
        let conv = |c: &BigInt| {
            if shift >= 0 {
                c << shift as u64
            } else {
                c >> (-shift) as u64
            }
        };
        let fwd: Vec<BigInt> = coeffs.iter().map(conv).collect();
        let rev = fwd.iter().rev().cloned().collect();
        BigPoly {
            fwd,
            rev,
            frac_bits,
            ln_ulp: -(shift as f64) * std::f64::consts::LN_2,
        }
    }

    fn degree(&self) -> usize {
        self.fwd.len() - 1
    }

    fn horner(c: &[BigInt], zr: i64, zi: i64, shift: u64) -> (CBig, CBig) {
        let n = c.len() - 1;
        let mut p = CBig {
            re: c[n].clone(),
            im: BigInt::zero(),
        };
        let mut dp = CBig::zero();
        for k in (0..n).rev() {
            dp = dp.mul_point(zr, zi, shift);
            dp.add_assign(&p);
            p = p.mul_point(zr, zi, shift);
            p.re += &c[k];
        }
        (p, dp)
    }

    fn eval(&self, z: Complex64) -> BigEval {
        let n = self.degree();
        // Points in the unit disk as `(re + i im) / 2^shift`, with the shift
        // chosen so that small points keep full relative precision.
        let to_fixed = |w: Complex64| {
            let extra = if w.norm() > 0.0 {
                (-w.norm().log2()).floor().max(0.0) as u64
            } else {
                0
            };
            let shift = POINT_BITS + extra;
            let re = ldexp(w.re, shift as i64).round();
            let im = ldexp(w.im, shift as i64).round();
            let point = Complex64::new(ldexp(re, -(shift as i64)), ldexp(im, -(shift as i64)));
            (re as i64, im as i64, shift, point)
        };
        // Each Horner step rounds both components; coefficients are rounded
        // once. Four ulps per step is a comfortable majorant.
        let ln_err0 = (4.0 * (n as f64 + 1.0)).ln() + self.ln_ulp;
        let ratio = |a: &CBig, b: &CBig| -> Option<Complex64> {
            let (ca, ea) = a.to_f64();
            let (cb, eb) = b.to_f64();
            if cb.norm() == 0.0 {
                return None;
            }
            let q = ca / cb;
            let r = Complex64::new(ldexp(q.re, ea - eb), ldexp(q.im, ea - eb));
            (r.re.is_finite() && r.im.is_finite()).then_some(r)
        };
        if z.norm() <= 1.0 {
            let (zr, zi, shift, point) = to_fixed(z);
            let (p, dp) = Self::horner(&self.fwd, zr, zi, shift);
            let ln_f = p.ln_abs() + self.ln_ulp;
            let resolved = ln_f > ln_err0 + 4f64.ln();
            BigEval {
                point,
                newton: if resolved { ratio(&p, &dp) } else { None },
                ln_f,
                ln_err: ln_err0,
            }
        } else {
            let (wr, wi, shift, w) = to_fixed(z.inv());
            let point = w.inv();
            let (g, dg) = Self::horner(&self.rev, wr, wi, shift);
            // f(z) = z^n g(w); f/f' = z g / (n g - w g').
            let lift = n as f64 * point.norm().ln();
            let ln_f = g.ln_abs() + self.ln_ulp + lift;
            let ln_err = ln_err0 + lift;
            let resolved = ln_f > ln_err + 4f64.ln();
            let newton = if resolved {
                let mut den = CBig {
                    re: &g.re * n,
                    im: &g.im * n,
                };
                let wdg = dg.mul_point(wr, wi, shift);
                den.re -= &wdg.re;
                den.im -= &wdg.im;
                ratio(&g, &den).map(|r| r * point)
            } else {
                None
            };
            BigEval {
                point,
                newton,
                ln_f,
                ln_err,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Iteration

/// Starting points on the circles of the Newton polygon of `|a_k|`, with a
/// fixed angular offset so runs are reproducible.
fn initial_guesses(coeffs: &[BigInt]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let pts: Vec<(usize, f64)> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k, log_abs(c)))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (k1, l1) = hull[hull.len() - 2];
            let (k2, l2) = hull[hull.len() - 1];
            // Drop the middle point unless it lies strictly above the chord.
            let cross = (k2 as f64 - k1 as f64) * (p.1 - l1) - (l2 - l1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = Vec::with_capacity(n);
    for (seg, w) in hull.windows(2).enumerate() {
        let (k1, l1) = w[0];
        let (k2, l2) = w[1];
        let m = k2 - k1;
        let r = ((l1 - l2) / m as f64).exp();
        let offset = 0.7 + 0.37 * seg as f64;
        for t in 0..m {
            let theta = std::f64::consts::TAU * t as f64 / m as f64 + offset;
            out.push(Complex64::from_polar(r, theta));
        }
    }
    out
}

fn aberth_sum(z: &[Complex64], i: usize) -> Complex64 {
    let zi = z[i];
    let mut s = Complex64::new(0.0, 0.0);
    for (j, &zj) in z.iter().enumerate() {
        if j != i {
            s += (zi - zj).inv();
        }
    }
    s
}

fn aberth_step(z: &mut [Complex64], i: usize, newton: Complex64) -> f64 {
    let s = aberth_sum(z, i);
    let corr = newton / (Complex64::new(1.0, 0.0) - newton * s);
    if corr.re.is_finite() && corr.im.is_finite() {
        z[i] -= corr;
        corr.norm()
    } else {
        0.0
    }
}

fn f64_phase<N: Fn(Complex64) -> Option<Complex64>>(newton: N, z: &mut [Complex64], sweeps: usize) {
    let n = z.len();
    let mut frozen = vec![false; n];
    for _ in 0..sweeps {
        let mut active = false;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            match newton(z[i]) {
                None => frozen[i] = true,
                Some(nr) => {
                    let c = aberth_step(z, i, nr);
                    if c <= 4.0 * f64::EPSILON * z[i].norm() {
                        frozen[i] = true;
                    } else {
                        active = true;
                    }
                }
            }
        }
        if !active {
            break;
        }
    }
}

/// Separates coincident starting points, which would make the Aberth sums
/// and the inclusion products singular.
fn spread_duplicates(z: &mut [Complex64]) {
    let n = z.len();
    for i in 0..n {
        for j in 0..i {
            let scale = z[i].norm().max(f64::MIN_POSITIVE);
            if (z[i] - z[j]).norm() <= 1e-12 * scale {
                let angle = 2.399963229728653 * i as f64;
                z[i] += Complex64::from_polar(1e-8 * scale, angle);
            }
        }
    }
}

/// Inclusion radii from cached evaluations, merged over overlapping disks.
fn inclusion_radii(z: &[Complex64], evals: &[BigEval], ln_lead: f64) -> Vec<f64> {
    let n = z.len();
    let ln_n = (n as f64).ln();
    let mut radii: Vec<f64> = (0..n)
        .map(|i| {
            let e = &evals[i];
            let hi = e.ln_f.max(e.ln_err);
            let ln_res = hi + (1.0 + (e.ln_f.min(e.ln_err) - hi).exp()).ln();
            let mut ln_prod = 0.0;
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    ln_prod += (z[i] - zj).norm().ln();
                }
            }
            let r = (ln_n + ln_res - ln_lead - ln_prod).exp() * (1.0 + 1e-9);
            // Outside the unit disk the stored point is the rounded
            // reciprocal of the evaluated one.
            let r = r + z[i].norm() * ldexp(1.0, -50);
            if r.is_nan() {
                f64::INFINITY
            } else {
                r
            }
        })
        .collect();
    // Union-find over overlapping disks.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= radii[i] + radii[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut span = vec![0.0; n];
    let mut size = vec![0usize; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        span[r] += 2.0 * radii[i];
        size[r] += 1;
    }
    for i in 0..n {
        let r = find(&mut parent, i);
        if size[r] > 1 {
            radii[i] = span[r];
        }
    }
    radii
}

struct Solved {
    roots: Vec<Complex64>,
    radii: Vec<f64>,
    residual: f64,
    bits: u64,
    certified: bool,
}

/// Roots of a polynomial with nonzero constant term.
fn solve(coeffs: &[BigInt], target: f64, shift: f64, start: Start<'_>) -> Solved {
    let n = coeffs.len() - 1;
    let ln_lead = log_abs(&coeffs[n]);
    let ln_l1 = log_abs(&coeffs.iter().map(|c| c.abs()).sum::<BigInt>());
    let mut z = match start {
        Start::Points(p) => {
            let mut z = p;
            spread_duplicates(&mut z);
            z
        }
        Start::Oracle(log_deriv) => {
            let mut z = initial_guesses(coeffs);
            f64_phase(|y| log_deriv(y).map(|l| l.inv()), &mut z, ORACLE_SWEEPS);
            z
        }
        Start::Default => {
            let mut z = initial_guesses(coeffs);
            let poly = F64Poly::new(coeffs);
            f64_phase(|y| poly.newton(y), &mut z, F64_SWEEPS);
            z
        }
    };

    let ok = |z: Complex64, r: f64| r <= target * (z + shift).norm().max(1.0);
    let mut bits = START_BITS;
    let mut big = BigPoly::new(coeffs, bits);
    let mut evals: Vec<BigEval> = z.iter().map(|&zi| big.eval(zi)).collect();
    let mut radii = Vec::new();
    let mut certified = false;
    for _ in 0..BIG_SWEEPS {
        for (zi, e) in z.iter_mut().zip(&evals) {
            *zi = e.point;
        }
        radii = inclusion_radii(&z, &evals, ln_lead);
        if z.iter().zip(&radii).all(|(&zi, &r)| ok(zi, r)) {
            certified = true;
            break;
        }
        let mut unresolved = false;
        let mut moved = false;
        let mut precision_bound = false;
        for i in 0..n {
            if ok(z[i], radii[i]) {
                continue;
            }
            if evals[i].ln_f < evals[i].ln_err + 20.0 * std::f64::consts::LN_2 {
                precision_bound = true;
            }
            match evals[i].newton {
                None => unresolved = true,
                Some(nr) => {
                    let c = aberth_step(&mut z, i, nr);
                    if c > 2.0 * f64::EPSILON * z[i].norm() {
                        moved = true;
                    }
                    evals[i] = big.eval(z[i]);
                }
            }
        }
        if unresolved || precision_bound {
            if bits >= MAX_BITS {
                break;
            }
            bits *= 2;
            big = BigPoly::new(coeffs, bits);
            evals = z.iter().map(|&zi| big.eval(zi)).collect();
        } else if !moved {
            // Resolved residuals and no further motion: more sweeps or bits
            // cannot shrink these disks.
            break;
        }
    }
    if radii.is_empty() {
        radii = inclusion_radii(&z, &evals, ln_lead);
    }
    let residual = z
        .iter()
        .zip(&evals)
        .map(|(zi, e)| (e.ln_f - ln_l1 - n as f64 * zi.norm().max(1.0).ln()).exp())
        .fold(0.0, f64::max);
    Solved {
        roots: z,
        radii,
        residual,
        bits: big.frac_bits,
        certified,
    }
}

/// Logarithmic derivative `f'/f` of the polynomial being solved, or `None`
/// where the evaluation cannot resolve `f` from zero.
pub type LogDerivative<'a> = &'a dyn Fn(Complex64) -> Option<Complex64>;

/// Optional help for [`complex_roots_hinted`]. Neither changes what is
/// certified; both only change where the iteration starts.
#[derive(Clone, Copy, Default)]
pub struct RootHints<'a> {
    /// Approximations to all roots, with multiplicity.
    pub start: Option<&'a [Complex64]>,
    /// A better-conditioned evaluator of `f'/f` for the double-precision
    /// phase (for instance through an iterated map instead of the monomial
    /// basis).
    pub log_derivative: Option<LogDerivative<'a>>,
}

enum Start<'a> {
    Default,
    Points(Vec<Complex64>),
    Oracle(&'a dyn Fn(Complex64) -> Option<Complex64>),
}

/// All complex roots of `f` with inclusion radii at most
/// `target_radius * max(1, |z|)`.
///
/// On failure the error carries the best roots found, whose radii are still
/// valid inclusion radii, only larger than requested.
pub fn complex_roots(f: &IntPolynomial, target_radius: f64) -> Result<RootSet> {
    complex_roots_hinted(f, target_radius, &RootHints::default())
}

/// Removes from `pts` the `count` entries closest to `at`.
fn take_nearest(pts: &mut Vec<Complex64>, at: Complex64, count: usize) {
    for _ in 0..count {
        if let Some((i, _)) = pts
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - at).norm().total_cmp(&(b.1 - at).norm()))
        {
            pts.swap_remove(i);
        }
    }
}

/// [`complex_roots`] with optional starting information.
pub fn complex_roots_hinted(
    f: &IntPolynomial,
    target_radius: f64,
    hints: &RootHints<'_>,
) -> Result<RootSet> {
    let Some(deg) = f.degree() else {
        return Err(Error::InvalidParameter(
            "zero polynomial has no roots".into(),
        ));
    };
    if deg == 0 {
        return Err(Error::InvalidParameter(
            "constant polynomial has no roots".into(),
        ));
    }
    if !(target_radius > 0.0) {
        return Err(Error::InvalidParameter(
            "target radius must be positive".into(),
        ));
    }
    let zeros = f.zero_root_multiplicity();
    let body = IntPolynomial::new(f.coeffs()[zeros..].to_vec()).primitive_part();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let mut radii = vec![f64::MIN_POSITIVE; zeros];
    let mut residual: f64 = 0.0;
    let mut bits = 0;
    let mut certified = true;
    if let Some(m) = body.degree().filter(|&m| m > 0) {
        // Center the roots on the nearest integer to their mean.
        let c = body.coeffs();
        let (q, r) = (-&c[m - 1]).div_mod_floor(&(&c[m] * BigInt::from(m)));
        let twice_r: BigInt = &r * 2;
        let s = if twice_r.abs() >= (&c[m] * BigInt::from(m)).abs() {
            q + 1
        } else {
            q
        };
        let s = s.to_i64().filter(|s| s.abs() <= MAX_SHIFT).unwrap_or(0);
        let g = if s == 0 {
            body.clone()
        } else {
            body.taylor_shift(&BigInt::from(s))
        };
        // The shift may land exactly on roots.
        let at_shift = g.zero_root_multiplicity();
        roots.extend(std::iter::repeat_n(Complex64::new(s as f64, 0.0), at_shift));
        radii.extend(std::iter::repeat_n(f64::MIN_POSITIVE, at_shift));
        let g = &g.coeffs()[at_shift..];
        let sf = s as f64;
        let reduced = move |l: Complex64, y: Complex64| {
            // Remove the exactly known roots at 0 and at the shift.
            let mut l = l;
            if zeros > 0 {
                l -= (y + sf).inv() * zeros as f64;
            }
            if at_shift > 0 {
                l -= y.inv() * at_shift as f64;
            }
            l
        };
        let oracle_g = hints
            .log_derivative
            .map(|ld| move |y: Complex64| ld(y + sf).map(|l| reduced(l, y)));
        let start = match (hints.start, &oracle_g) {
            (Some(p), _) if p.len() == deg => {
                let mut p = p.to_vec();
                take_nearest(&mut p, Complex64::new(0.0, 0.0), zeros);
                take_nearest(&mut p, Complex64::new(sf, 0.0), at_shift);
                Start::Points(p.into_iter().map(|z| z - sf).collect())
            }
            (_, Some(o)) => Start::Oracle(o),
            _ => Start::Default,
        };
        if g.len() > 1 {
            let hinted = matches!(start, Start::Points(_));
            let mut solved = solve(g, target_radius, sf, start);
            if hinted && !solved.certified {
                // Poor hints can stall; retry from the default start and
                // keep whichever result is tighter.
                let retry = solve(g, target_radius, sf, Start::Default);
                let worst = |s: &Solved| s.radii.iter().copied().fold(0.0, f64::max);
                if retry.certified || worst(&retry) < worst(&solved) {
                    solved = retry;
                }
            }
            for (z, r) in solved.roots.into_iter().zip(solved.radii) {
                roots.push(z + sf);
                radii.push(r);
            }
            residual = solved.residual;
            bits = solved.bits;
            certified = solved.certified;
        }
    }
    // Deterministic order: by real part, then imaginary part.
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&a, &b| {
        roots[a]
            .re
            .total_cmp(&roots[b].re)
            .then(roots[a].im.total_cmp(&roots[b].im))
    });
    let set = RootSet {
        roots: idx.iter().map(|&i| roots[i]).collect(),
        radii: idx.iter().map(|&i| radii[i]).collect(),
        residual,
        precision_bits: bits as u32,
    };
    if certified {
        Ok(set)
    } else {
        Err(Error::RootsNotCertified {
            precision: bits as u32,
            worst_radius: set.worst_relative_radius(),
            best: Box::new(set),
        })
    }
}

fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// `m(f)` from roots and radii; the bound covers the worst position of each
/// root inside its disk.
pub fn log_mahler_from_roots(f: &IntPolynomial, roots: &RootSet) -> MahlerValue {
    let lead = f.leading().expect("nonzero");
    let mut sum = KahanSum::default();
    let mut err = KahanSum::default();
    let mut count = 0.0;
    sum.add(log_abs(lead));
    for (z, &r) in roots.roots.iter().zip(&roots.radii) {
        let a = z.norm();
        let v = log_plus(a);
        sum.add(v);
        let hi = log_plus(a + r) - v;
        let lo = v - log_plus((a - r).max(0.0));
        err.add(hi.max(lo));
        count += 1.0;
    }
    let value = sum.value();
    MahlerValue {
        value,
        error_bound: err.value() + 4.0 * f64::EPSILON * (value.abs() + count),
    }
}

/// [`log_mahler_with_target`] with root-finding hints; also returns the
/// roots used.
pub fn log_mahler_hinted(
    f: &IntPolynomial,
    target_radius: f64,
    hints: &RootHints<'_>,
) -> Result<(MahlerValue, RootSet)> {
    let Some(deg) = f.degree() else {
        return Err(Error::InvalidParameter("Mahler measure of zero".into()));
    };
    if deg == 0 {
        let empty = RootSet {
            roots: Vec::new(),
            radii: Vec::new(),
            residual: 0.0,
            precision_bits: 0,
        };
        let value = MahlerValue {
            value: log_abs(&f.coeffs()[0]),
            error_bound: 0.0,
        };
        return Ok((value, empty));
    }
    let roots = match complex_roots_hinted(f, target_radius, hints) {
        Ok(r) => r,
        Err(Error::RootsNotCertified { best, .. }) => *best,
        Err(e) => return Err(e),
    };
    Ok((log_mahler_from_roots(f, &roots), roots))
}

/// Log Mahler measure `log|a_n| + Σ log⁺|α_i|`.
pub fn log_mahler(f: &IntPolynomial) -> Result<MahlerValue> {
    log_mahler_with_target(f, DEFAULT_TARGET_RADIUS)
}

/// [`log_mahler`] with an explicit root radius target. An uncertified root
/// set still yields a value; its looser radii simply widen the bound.
pub fn log_mahler_with_target(f: &IntPolynomial, target_radius: f64) -> Result<MahlerValue> {
    log_mahler_hinted(f, target_radius, &RootHints::default()).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    fn close(roots: &RootSet, expected: &[Complex64], tol: f64) {
        assert_eq!(roots.roots.len(), expected.len());
        for e in expected {
            assert!(
                roots.roots.iter().any(|z| (z - e).norm() < tol),
                "{e} not among {:?}",
                roots.roots
            );
        }
    }

    #[test]
    fn golden_roots() {
        let r = complex_roots(&poly(&[-1, -1, 1]), 1e-12).unwrap();
        let s5 = 5f64.sqrt();
        close(
            &r,
            &[
                Complex64::new((1.0 + s5) / 2.0, 0.0),
                Complex64::new((1.0 - s5) / 2.0, 0.0),
            ],
            1e-13,
        );
        assert!(r.radii.iter().all(|&x| x > 0.0 && x < 1e-12));
    }

    #[test]
    fn repeated_zero_and_real_pair() {
        let r = complex_roots(&poly(&[0, 0, -2, 0, 1]), 1e-12).unwrap();
        let s2 = 2f64.sqrt();
        close(
            &r,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(s2, 0.0),
                Complex64::new(-s2, 0.0),
            ],
            1e-13,
        );
    }

    #[test]
    fn cube_roots_of_unity() {
        let r = complex_roots(&poly(&[-1, 0, 0, 1]), 1e-12).unwrap();
        for z in &r.roots {
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((z.powu(3) - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn mahler_examples() {
        let m = log_mahler(&poly(&[-2, 1])).unwrap();
        assert!((m.value - 2f64.ln()).abs() < 1e-12);
        let g = log_mahler(&poly(&[-1, -1, 1])).unwrap();
        assert!((g.value - 0.48121182505960344).abs() < 1e-12);
        let lehmer = poly(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]);
        let l = log_mahler(&lehmer).unwrap();
        assert!((l.value - 0.16235761).abs() < 1e-7, "{}", l.value);
        assert!(l.error_bound < 1e-9);
    }

    #[test]
    fn lehmer_against_oracle() {
        // Oracle: the Salem number is the unique real root > 1; bisect it in
        // plain doubles from the palindromic polynomial.
        let p = |x: f64| {
            let c = [1.0, 1.0, 0.0, -1.0, -1.0, -1.0, -1.0, -1.0, 0.0, 1.0, 1.0];
            c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
        };
        let (mut lo, mut hi) = (1.1f64, 1.3f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(lo) * p(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let lehmer = poly(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1, 1]);
        let l = log_mahler(&lehmer).unwrap();
        assert!((l.value - lo.ln()).abs() < 1e-12);
    }

    #[test]
    fn kronecker_products_vanish() {
        // x (x - 1)(x^2 + x + 1)(x^4 + 1)(x^6 - x^3 + 1) and a higher one
        let phi = [
            poly(&[0, 1]),
            poly(&[-1, 1]),
            poly(&[1, 1, 1]),
            poly(&[1, 0, 0, 0, 1]),
            poly(&[1, 0, 0, -1, 0, 0, 1]),
        ];
        let prod = phi.iter().fold(IntPolynomial::one(), |a, b| &a * b);
        let m = log_mahler(&prod).unwrap();
        assert!(m.value.abs() <= 1e-10, "{m:?}");
        let big = &poly(&[
            -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1,
        ]) * &poly(&[1, 1]);
        let m = log_mahler(&big).unwrap();
        assert!(m.value.abs() <= 1e-10, "{m:?}");
    }

    #[test]
    fn content_counts() {
        let m = log_mahler(&poly(&[6, 0, -6])).unwrap();
        assert!((m.value - 6f64.ln()).abs() < 1e-12);
        let c = log_mahler(&poly(&[-5])).unwrap();
        assert!((c.value - 5f64.ln()).abs() < 1e-15);
        assert!(log_mahler(&IntPolynomial::zero()).is_err());
    }

    #[test]
    fn huge_coefficients_need_more_bits() {
        // (x - 3)^2 (x - 10^30) (x + 10^-?): use (x - 3)(x - 4)(10^30 x - 1).
        let big = BigInt::from(10).pow(30);
        let f = &(&poly(&[-3, 1]) * &poly(&[-4, 1]))
            * &IntPolynomial::new(vec![BigInt::from(-1), big.clone()]);
        let m = log_mahler(&f).unwrap();
        let expected = log_abs(&big) + 12f64.ln();
        assert!((m.value - expected).abs() < 1e-10, "{m:?}");
    }

    #[test]
    fn wilkinson_twenty() {
        let f = (1..=20).fold(IntPolynomial::one(), |a, k| &a * &poly(&[-k, 1]));
        let r = complex_roots(&f, 1e-11).unwrap();
        for (k, z) in (1..=20).zip(&r.roots) {
            assert!((z - Complex64::new(k as f64, 0.0)).norm() < 1e-9, "{k} {z}");
        }
        let m = log_mahler(&f).unwrap();
        let exact: f64 = (2..=20).map(|k| (k as f64).ln()).sum();
        assert!((m.value - exact).abs() < 1e-9);
    }

    #[test]
    fn double_root_is_a_cluster() {
        // (x - 2)^2 (x + 3)
        let f = &poly(&[-2, 1]).pow(2) * &poly(&[3, 1]);
        let m = log_mahler(&f).unwrap();
        let expected = 2.0 * 2f64.ln() + 3f64.ln();
        assert!((m.value - expected).abs() <= m.error_bound.max(1e-12));
    }

    fn small_poly() -> impl Strategy<Value = IntPolynomial> {
        prop::collection::vec(-9i64..=9, 2..8).prop_filter_map("nonconstant", |mut v| {
            if *v.last().unwrap() == 0 {
                *v.last_mut().unwrap() = 1;
            }
            let p = IntPolynomial::from_i64(&v);
            (p.degree().unwrap_or(0) >= 1).then_some(p)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn multiplicative(f in small_poly(), g in small_poly()) {
            let mf = log_mahler(&f).unwrap();
            let mg = log_mahler(&g).unwrap();
            let mfg = log_mahler(&(&f * &g)).unwrap();
            let slack = mf.error_bound + mg.error_bound + mfg.error_bound + 1e-12;
            prop_assert!((mfg.value - mf.value - mg.value).abs() <= slack);
        }

        #[test]
        fn reflection_invariant(f in small_poly()) {
            let neg: Vec<BigInt> = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect();
            let a = log_mahler(&f).unwrap();
            let b = log_mahler(&IntPolynomial::new(neg)).unwrap();
            prop_assert!((a.value - b.value).abs() <= a.error_bound + b.error_bound + 1e-12);
        }

        #[test]
        fn vieta_and_kronecker_bound(f in small_poly()) {
            let r = complex_roots(&f, 1e-11).unwrap_or_else(|e| match e {
                Error::RootsNotCertified { best, .. } => *best,
                other => panic!("{other}"),
            });
            let n = f.degree().unwrap();
            let lead = crate::util::bigint_to_f64(f.leading().unwrap());
            let prod = r.roots.iter().fold(Complex64::new(lead, 0.0), |a, z| a * z);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c0 = crate::util::bigint_to_f64(&f.coeffs()[0]);
            let scale: f64 = r.roots.iter().map(|z| z.norm().max(1.0)).product::<f64>() * lead.abs();
            prop_assert!((prod * sign - c0).norm() <= 1e-6 * scale);
            prop_assert!(log_mahler(&f).unwrap().value >= -1e-12);
        }
    }
}
