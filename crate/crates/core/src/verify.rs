//! Checks of the height-difference bound, the family inequalities, the
//! sharpness of its constant, and the preperiodicity spot checks.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::LN_2;

use crate::dynmap::RationalMap;
use crate::error::{Error, Result};
use crate::families::{coc_pairing_exact, lattes_pairing_quadrature, smyth_constant};
use crate::heights::{canonical_height, standard_height, ProjPointQ};
use crate::mahler::{complex_roots, RootSet, DEFAULT_TARGET_RADIUS};
use crate::pairing::{default_schedule, pairing_converged, periodic_form};
use crate::DEFAULT_DEGREE_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationCase {
    pub input: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    /// Numerical uncertainty allowed in the comparison.
    pub slack: f64,
    pub pass: bool,
    /// Passed with `margin < 2 * slack`.
    pub tight: bool,
    pub outcome: Outcome,
}

impl VerificationCase {
    /// The case `lhs <= rhs` up to `slack`.
    pub fn inequality(input: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = rhs - lhs;
        let pass = margin >= -slack;
        VerificationCase {
            input: input.into(),
            lhs,
            rhs,
            margin,
            slack,
            pass,
            tight: pass && margin < 2.0 * slack,
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
        }
    }

    fn with_outcome(mut self, outcome: Outcome) -> Self {
        self.outcome = outcome;
        self.pass = outcome == Outcome::Pass;
        self.tight &= self.pass;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Consistency {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub name: String,
    pub cases: Vec<VerificationCase>,
    /// Every case passed; inconclusive cases do not pass.
    pub all_pass: bool,
    /// Set by the preperiodicity spot checks.
    pub verdict: Option<Consistency>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, cases: Vec<VerificationCase>) -> Self {
        let all_pass = cases.iter().all(|c| c.pass);
        VerificationReport {
            name: name.into(),
            cases,
            all_pass,
            verdict: None,
        }
    }

    pub fn tight_cases(&self) -> usize {
        self.cases.iter().filter(|c| c.tight).count()
    }

    pub fn min_margin(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

// ---------------------------------------------------------------------------
// Sample points

fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// All `p/q` with `|p| <= bound`, `1 <= q <= bound`, in lowest terms, in
/// Farey order (by denominator, then numerator).
pub fn farey_points(bound: i64) -> Vec<ProjPointQ> {
    let mut out = Vec::new();
    for q in 1..=bound {
        for p in -bound..=bound {
            if p.gcd(&q) == 1 {
                out.push(ProjPointQ::from_i64(p, q).expect("q > 0"));
            }
        }
    }
    out
}

/// Continued-fraction convergents of `x` with numerator and denominator at
/// most `bound` in absolute value.
fn convergents(x: f64, bound: &BigInt) -> Vec<ProjPointQ> {
    let mut out = Vec::new();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(x.floor() as i64), BigInt::one());
    let mut frac = x - x.floor();
    for _ in 0..40 {
        if p1.abs() > *bound || q1 > *bound {
            break;
        }
        out.push(ProjPointQ::new(p1.clone(), q1.clone()).expect("q > 0"));
        if frac.abs() < 1e-12 {
            break;
        }
        let inv = 1.0 / frac;
        let a = BigInt::from(inv.floor() as i64);
        frac = inv - inv.floor();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

/// Real fixed points of `ψ` (finite ones), from the degree-`d + 1` form.
fn real_fixed_points(psi: &RationalMap) -> Vec<f64> {
    let Ok(form) = periodic_form(psi, 1, DEFAULT_DEGREE_CAP) else {
        return Vec::new();
    };
    let poly = form.dehomogenize();
    if poly.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let roots = match complex_roots(&poly, DEFAULT_TARGET_RADIUS) {
        Ok(r) => r,
        Err(Error::RootsNotCertified { best, .. }) => *best,
        Err(_) => return Vec::new(),
    };
    roots
        .roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-9 * z.norm().max(1.0))
        .map(|z| z.re)
        .collect()
}

/// `count` distinct points of standard height at most `max_height`: Farey
/// points of small height, then convergents to the real fixed points of
/// `psi`, then uniform random numerators and denominators from `seed`.
pub fn sample_points(
    psi: Option<&RationalMap>,
    count: usize,
    max_height: f64,
    seed: u64,
) -> Vec<ProjPointQ> {
    let bound = max_height.exp().floor().max(1.0) as i64;
    let big_bound = BigInt::from(bound);
    let mut out: Vec<ProjPointQ> = Vec::with_capacity(count);
    let push = |p: ProjPointQ, out: &mut Vec<ProjPointQ>| {
        if out.len() < count && !out.contains(&p) {
            out.push(p);
        }
    };
    for p in farey_points(bound.min(4)) {
        push(p, &mut out);
    }
    if let Some(psi) = psi {
        for x in real_fixed_points(psi) {
            if !x.is_finite() {
                continue;
            }
            for p in convergents(x, &big_bound).into_iter().rev().take(3) {
                push(p, &mut out);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count {
        attempts += 1;
        let p: i64 = rng.gen_range(-bound..=bound);
        let q: i64 = rng.gen_range(1..=bound);
        push(
            ProjPointQ::new(p.into(), q.into()).expect("q > 0"),
            &mut out,
        );
    }
    out
}

// ---------------------------------------------------------------------------
// Height-difference bound

/// `h_ψ(x) - h_st(x) <= pairing + h_ψ(∞) + log 2` on each sample point. The
/// slack adds the height error bounds, `pairing_error` and `tol`.
pub fn check_height_diff_with(
    psi: &RationalMap,
    pairing: f64,
    pairing_error: f64,
    sample: &[ProjPointQ],
    tol: f64,
) -> Result<VerificationReport> {
    let h_inf = canonical_height(psi, &ProjPointQ::infinity(), tol)?;
    let rhs = pairing + h_inf.value + LN_2;
    let mut cases = Vec::with_capacity(sample.len());
    for x in sample {
        let h = canonical_height(psi, x, tol)?;
        let lhs = h.value - standard_height(x).value;
        let slack = h.error_bound + h_inf.error_bound + pairing_error + tol;
        cases.push(VerificationCase::inequality(
            format!("x = {x}"),
            lhs,
            rhs,
            slack,
        ));
    }
    Ok(VerificationReport::new(
        format!("height difference for {psi}"),
        cases,
    ))
}

pub fn check_height_diff(
    psi: &RationalMap,
    pairing: f64,
    sample: &[ProjPointQ],
    tol: f64,
) -> Result<VerificationReport> {
    check_height_diff_with(psi, pairing, 0.0, sample, tol)
}

/// The family inequalities, with `c₂ = smyth + log 2` for the conjugated
/// squaring maps, `c₃ = log 4` for `x^2 + c`, and for the Lattès maps the
/// observed `Θ_{a,b} + log 2` in place of the unknown constant.
pub fn check_family_inequalities() -> Result<VerificationReport> {
    check_family_inequalities_with(50, 1e-9, 7)
}

pub fn check_family_inequalities_with(
    points: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let mut cases = Vec::new();
    let c2 = smyth_constant(1e-12) + LN_2;
    for alpha in [1, 2, 5, -3] {
        let a = rational(alpha, 1);
        let map = RationalMap::coc(&a);
        let bound = standard_height(&ProjPointQ::from_rational(&a)).value + c2;
        for x in sample_points(Some(&map), points, 10.0, seed) {
            let h = canonical_height(&map, &x, tol)?;
            let lhs = h.value - standard_height(&x).value;
            cases.push(VerificationCase::inequality(
                format!("sigma_alpha alpha={alpha} x={x}"),
                lhs,
                bound,
                h.error_bound + tol,
            ));
        }
    }
    let c3 = 4f64.ln();
    for c in [1, 2, 5, -7, 12] {
        let cr = rational(c, 1);
        let map = RationalMap::quad(&cr);
        let bound = 0.5 * standard_height(&ProjPointQ::from_rational(&cr)).value + c3;
        for x in sample_points(Some(&map), points, 10.0, seed) {
            let h = canonical_height(&map, &x, tol)?;
            let lhs = h.value - standard_height(&x).value;
            cases.push(VerificationCase::inequality(
                format!("quad c={c} x={x}"),
                lhs,
                bound,
                h.error_bound + tol,
            ));
        }
    }
    for (a, b) in [(1u64, 1u64), (1, 2), (2, 3)] {
        let map = RationalMap::lattes(a, b)?;
        let q = lattes_pairing_quadrature(a, b, 1e-9)?;
        let theta = q.data.theta;
        let bound = 0.5 * ((a * b) as f64).ln() + theta.value + LN_2;
        for x in sample_points(Some(&map), points, 10.0, seed) {
            let h = canonical_height(&map, &x, tol)?;
            let lhs = h.value - standard_height(&x).value;
            cases.push(VerificationCase::inequality(
                format!("lattes a={a} b={b} x={x}"),
                lhs,
                bound,
                h.error_bound + theta.error_estimate + tol,
            ));
        }
    }
    Ok(VerificationReport::new("family inequalities", cases))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessProbe {
    /// `⟨σ, σ₁⟩ + log 2 - (h_{σ₁}(-1) - h_st(-1))`, which equals the pairing.
    pub margin: f64,
    /// `log 2 - ⟨σ, σ₁⟩`: no constant below this can replace `log 2`.
    pub gap: f64,
    pub report: VerificationReport,
}

/// The bound for `ψ = 1 - (1 - x)^2` at `x = -1`, where it is off by exactly
/// the pairing.
pub fn sharpness_probe(tol: f64) -> Result<SharpnessProbe> {
    let psi = RationalMap::coc(&rational(1, 1));
    let pairing = coc_pairing_exact(&rational(1, 1), tol)?;
    let x = ProjPointQ::from_i64(-1, 1)?;
    let report = check_height_diff_with(&psi, pairing, tol, &[x], tol)?;
    let margin = report.cases[0].margin;
    Ok(SharpnessProbe {
        margin,
        gap: LN_2 - pairing,
        report,
    })
}

// ---------------------------------------------------------------------------
// Preperiodicity spot checks

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitVerdict {
    /// The orbit returned to an earlier point within its error.
    Preperiodic,
    /// The orbit never recurred while its error stayed small, or it was
    /// attracted to a cycle without landing on it.
    NotPreperiodic,
    /// The error grew too large before either happened.
    Inconclusive,
}

fn chordal(a: [Complex64; 2], b: [Complex64; 2]) -> f64 {
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let nb = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
    (a[0] * b[1] - a[1] * b[0]).norm() / (na * nb)
}

/// Follows the `φ`-orbit of `z` next to a shadow orbit started a distance
/// `δ` away. The ratio of their separation to `δ` estimates how much the
/// initial error `err0` has been amplified.
pub fn orbit_verdict(
    phi: &RationalMap,
    z: [Complex64; 2],
    err0: f64,
    max_steps: usize,
) -> (OrbitVerdict, usize, f64) {
    const DELTA: f64 = 1e-9;
    let mut shadow = if z[1].norm() >= z[0].norm() {
        [z[0] + z[1] * DELTA, z[1]]
    } else {
        [z[0], z[1] + z[0] * DELTA]
    };
    let delta0 = chordal(z, shadow).max(f64::MIN_POSITIVE);
    let base_err = err0.max(4.0 * f64::EPSILON);
    let mut orbit = vec![z];
    let mut closest = f64::INFINITY;
    let mut cur = z;
    for step in 1..=max_steps {
        cur = phi.apply_complex(cur);
        shadow = phi.apply_complex(shadow);
        let amp = chordal(cur, shadow) / delta0;
        // Rounding is relative to the coordinates, which in the chordal
        // metric shrinks near 0 and ∞.
        let local = cur[0].norm() * cur[1].norm() / (cur[0].norm_sqr() + cur[1].norm_sqr());
        let err = base_err * amp + 8.0 * f64::EPSILON * step as f64 * local;
        for (j, &w) in orbit.iter().enumerate() {
            let d = chordal(cur, w);
            closest = closest.min(d);
            if d <= 100.0 * err {
                return (OrbitVerdict::Preperiodic, step - j, d);
            }
        }
        if amp * delta0 > 1e-3 || err > 1e-4 {
            return (OrbitVerdict::Inconclusive, step, closest);
        }
        if amp < 1e-30 {
            return (OrbitVerdict::NotPreperiodic, step, closest);
        }
        orbit.push(cur);
    }
    (OrbitVerdict::NotPreperiodic, max_steps, closest)
}

/// Period-`n` points of `ψ` for `n <= n_max` as projective pairs with their
/// inclusion radii.
fn periodic_points(psi: &RationalMap, n_max: u32) -> Result<Vec<([Complex64; 2], f64, u32)>> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut out: Vec<([Complex64; 2], f64, u32)> = Vec::new();
    for n in 1..=n_max {
        let form = periodic_form(psi, n, DEFAULT_DEGREE_CAP)?;
        if form.infinity_multiplicity() > 0 && !out.iter().any(|p| p.0[1] == zero) {
            out.push(([one, zero], 0.0, n));
        }
        let poly = form.dehomogenize();
        if poly.degree().unwrap_or(0) == 0 {
            continue;
        }
        let roots: RootSet = match complex_roots(&poly, DEFAULT_TARGET_RADIUS) {
            Ok(r) => r,
            Err(Error::RootsNotCertified { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        for (z, r) in roots.roots.iter().zip(&roots.radii) {
            let dup = out.iter().any(|p| chordal(p.0, [*z, one]) <= 1e-9);
            if !dup {
                out.push(([*z, one], *r, n));
            }
        }
    }
    Ok(out)
}

/// Compares the pairing with the orbits of `ψ`-periodic points under `φ`.
/// A vanishing pairing predicts every such point is `φ`-preperiodic; a
/// positive one predicts that some of them are not.
pub fn equivalence_spot_check(
    phi: &RationalMap,
    psi: &RationalMap,
    n_max: u32,
) -> Result<VerificationReport> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let est = pairing_converged(phi, psi, &default_schedule(n_max), 0.03)?;
    let zero_tol = 1e-6;
    let vanishing = est.value.abs() <= zero_tol + est.error_bound;
    let mut cases = vec![VerificationCase::inequality(
        format!(
            "pairing estimate at n = {} (|value| <= {zero_tol:e} means vanishing)",
            est.n
        ),
        est.value.abs(),
        zero_tol,
        est.error_bound,
    )
    .with_outcome(Outcome::Pass)];

    let points = periodic_points(psi, n_max)?;
    let mut verdicts = Vec::with_capacity(points.len());
    for (z, r, n) in &points {
        let (v, steps, closest) = orbit_verdict(phi, *z, r.max(1e-15), 64);
        verdicts.push(v);
        let outcome = match (vanishing, v) {
            (_, OrbitVerdict::Inconclusive) => Outcome::Inconclusive,
            (true, OrbitVerdict::Preperiodic) => Outcome::Pass,
            (true, OrbitVerdict::NotPreperiodic) => Outcome::Fail,
            // With a positive pairing individual points may go either way.
            (false, _) => Outcome::Pass,
        };
        let label = match v {
            OrbitVerdict::Preperiodic => "preperiodic",
            OrbitVerdict::NotPreperiodic => "not preperiodic",
            OrbitVerdict::Inconclusive => "inconclusive",
        };
        let z_aff = if z[1].norm() == 0.0 {
            "inf".to_string()
        } else {
            let w = z[0] / z[1];
            format!("{:.6}{:+.6}i", w.re, w.im)
        };
        cases.push(
            VerificationCase::inequality(
                format!("period {n} point {z_aff}: {label} after {steps} steps"),
                closest,
                0.0,
                0.0,
            )
            .with_outcome(outcome),
        );
    }
    let escaped = verdicts.iter().any(|v| *v == OrbitVerdict::NotPreperiodic);
    let unclear = verdicts.iter().any(|v| *v == OrbitVerdict::Inconclusive);
    if !vanishing {
        let outcome = if escaped {
            Outcome::Pass
        } else if unclear {
            Outcome::Inconclusive
        } else {
            Outcome::Fail
        };
        cases.push(
            VerificationCase::inequality("some periodic point is not preperiodic", 0.0, 0.0, 0.0)
                .with_outcome(outcome),
        );
    }
    let verdict = if cases.iter().any(|c| c.outcome == Outcome::Fail) {
        Consistency::Inconsistent
    } else if cases.iter().any(|c| c.outcome == Outcome::Inconclusive) {
        Consistency::Inconclusive
    } else {
        Consistency::Consistent
    };
    let mut report = VerificationReport::new(format!("spot check ({phi}, {psi})"), cases);
    report.verdict = Some(verdict);
    Ok(report)
}
