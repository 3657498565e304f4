//! Periodic-point estimates of the Arakelov–Zhang pairing.
//!
//! `<φ, ψ>` is the limit of the average `φ`-canonical height over the
//! `d_ψ^n + 1` period-`n` points of `ψ`. Here `h_φ` is replaced by its
//! approximant `h(φ^k(x)) / d_φ^k`, and the average over the Galois-stable
//! multiset of points is the log Mahler measure of the form whose roots are
//! `φ^k` of the period-`n` points.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::bigpoly::{resultant_with_parameters, IntBinaryForm, Primitive};
use crate::dynmap::{is_probable_prime, RationalMap, DEFAULT_DEGREE_CAP};
use crate::error::{Error, Result};
use crate::heights::step_bounds;
use crate::mahler::{log_mahler_hinted, RootHints, RootSet, DEFAULT_TARGET_RADIUS};
use crate::util::bigint_to_f64;

/// One entry of a schedule run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub n: u32,
    pub k: u32,
    pub value: f64,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingEstimate {
    pub value: f64,
    pub n: u32,
    pub k: u32,
    pub form_degree: usize,
    /// Mahler-measure numerics only; truncation in `(n, k)` is not bounded.
    pub error_bound: f64,
    pub history: Vec<HistoryEntry>,
    /// Whether the last three history values lie within the stability
    /// tolerance (`None` with fewer than three entries).
    pub stable: Option<bool>,
}

/// Knobs shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingOptions {
    pub degree_cap: u64,
    pub target_radius: f64,
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions {
            degree_cap: DEFAULT_DEGREE_CAP,
            target_radius: DEFAULT_TARGET_RADIUS,
        }
    }
}

/// Primitive form `x1 Ψ0 - x0 Ψ1` whose roots are the fixed points of `ψ^n`.
pub fn periodic_form(psi: &RationalMap, n: u32, degree_cap: u64) -> Result<IntBinaryForm> {
    let (lift, _) = psi
        .iterate_lift(n, degree_cap.saturating_sub(1))
        .map_err(|e| match e {
            Error::DegreeCap { degree, .. } => Error::DegreeCap {
                degree: degree + 1,
                cap: degree_cap,
            },
            e => e,
        })?;
    let form = &lift.x0.shift(0, 1) - &lift.x1.shift(1, 0);
    Ok(form.primitive_part())
}

/// Primitive form whose roots are `φ^k` of the roots of `f`.
pub fn pushforward_form(f: &IntBinaryForm, phi: &RationalMap, k: u32) -> Result<IntBinaryForm> {
    let lift = phi.lift();
    let mut g = f.primitive_part();
    for _ in 0..k {
        g = resultant_with_parameters(&g, &lift.x0, &lift.x1)?;
    }
    Ok(g)
}

/// Whether `h_φ` is the standard height, detected from a vanishing
/// one-step discrepancy bound (true for `x^{±d}` and their sign twists).
pub fn has_standard_height(phi: &RationalMap) -> bool {
    step_bounds(phi).constant() == 0.0
}

pub fn pairing_estimate(
    phi: &RationalMap,
    psi: &RationalMap,
    n: u32,
    k: u32,
) -> Result<PairingEstimate> {
    pairing_estimate_with(phi, psi, n, k, &PairingOptions::default())
}

/// Binary form value and partial derivatives at `(a, b)`.
fn form_with_partials(
    c: &[f64],
    a: Complex64,
    b: Complex64,
) -> (Complex64, Complex64, Complex64, f64) {
    let d = c.len() - 1;
    let mut pa = vec![Complex64::new(1.0, 0.0); d + 1];
    let mut pb = vec![Complex64::new(1.0, 0.0); d + 1];
    for j in 1..=d {
        pa[j] = pa[j - 1] * a;
        pb[j] = pb[j - 1] * b;
    }
    let (na, nb) = (a.norm(), b.norm());
    let mut v = Complex64::new(0.0, 0.0);
    let mut d0 = Complex64::new(0.0, 0.0);
    let mut d1 = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        v += pa[d - i] * pb[i] * ci;
        mag += ci.abs() * na.powi((d - i) as i32) * nb.powi(i as i32);
        if d > i {
            d0 += pa[d - i - 1] * pb[i] * (ci * (d - i) as f64);
        }
        if i > 0 {
            d1 += pa[d - i] * pb[i - 1] * (ci * i as f64);
        }
    }
    (v, d0, d1, mag)
}

/// `F'/F` for `F(x) = Ψ0(x, 1) - x Ψ1(x, 1)` with `Ψ` the `n`-th iterate of
/// the lift, evaluated by iterating the lift with forward derivatives and a
/// running rounding bound. Much better conditioned than the expanded form.
fn periodic_log_derivative(psi: &RationalMap, n: u32) -> impl Fn(Complex64) -> Option<Complex64> {
    let c0: Vec<f64> = psi.lift().x0.coeffs().iter().map(bigint_to_f64).collect();
    let c1: Vec<f64> = psi.lift().x1.coeffs().iter().map(bigint_to_f64).collect();
    let d = psi.degree() as f64;
    move |z: Complex64| {
        let one = Complex64::new(1.0, 0.0);
        let (mut a, mut b) = (z, one);
        let (mut da, mut db) = (one, Complex64::new(0.0, 0.0));
        let mut err = 0.0;
        for _ in 0..n {
            let (va, a0, a1, ma) = form_with_partials(&c0, a, b);
            let (vb, b0, b1, mb) = form_with_partials(&c1, a, b);
            let grow = (a0.norm() + a1.norm()).max(b0.norm() + b1.norm());
            err = grow * err + 4.0 * (d + 1.0) * f64::EPSILON * ma.max(mb);
            let (nda, ndb) = (a0 * da + a1 * db, b0 * da + b1 * db);
            let s = va.norm().max(vb.norm());
            if !(s > 0.0 && s.is_finite()) {
                return None;
            }
            a = va / s;
            b = vb / s;
            da = nda / s;
            db = ndb / s;
            err /= s;
        }
        let f = a - z * b;
        let df = da - b - z * db;
        let noise = err * (1.0 + z.norm()) + 4.0 * f64::EPSILON * (a.norm() + (z * b).norm());
        if f.norm() <= 4.0 * noise {
            return None;
        }
        let l = df / f;
        (l.re.is_finite() && l.im.is_finite()).then_some(l)
    }
}

/// Images under `φ^k` of the roots of `f` (finite roots from `roots`, the
/// rest at infinity), as starting points for the roots of `pushed`.
fn pushed_hints(
    f: &IntBinaryForm,
    roots: &RootSet,
    phi: &RationalMap,
    k: u32,
    pushed: &IntBinaryForm,
) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut pts: Vec<[Complex64; 2]> = roots.roots.iter().map(|&z| [z, one]).collect();
    pts.extend(std::iter::repeat_n([one, zero], f.infinity_multiplicity()));
    let mut images: Vec<Complex64> = pts
        .into_iter()
        .map(|mut p| {
            for _ in 0..k {
                p = phi.apply_complex(p);
            }
            p[0] / p[1]
        })
        .filter(|z| z.is_finite())
        .collect();
    images.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    images.truncate(pushed.degree() - pushed.infinity_multiplicity());
    images
}

/// `m(φ^k_* Per_n(ψ)) / ((d_ψ^n + 1) d_φ^k)`.
pub fn pairing_estimate_with(
    phi: &RationalMap,
    psi: &RationalMap,
    n: u32,
    k: u32,
    opts: &PairingOptions,
) -> Result<PairingEstimate> {
    let per = periodic_form(psi, n, opts.degree_cap)?;
    let oracle = periodic_log_derivative(psi, n);
    let hints = RootHints {
        start: None,
        log_derivative: Some(&oracle),
    };
    let (mut m, roots) = log_mahler_hinted(&per.dehomogenize(), opts.target_radius, &hints)?;
    if k > 0 {
        let pushed = pushforward_form(&per, phi, k)?;
        let start = pushed_hints(&per, &roots, phi, k, &pushed);
        let hints = RootHints {
            start: Some(&start),
            log_derivative: None,
        };
        m = log_mahler_hinted(&pushed.dehomogenize(), opts.target_radius, &hints)?.0;
    }
    let denom = per.degree() as f64 * (phi.degree() as f64).powi(k as i32);
    let value = m.value / denom;
    let error_bound = m.error_bound / denom;
    Ok(PairingEstimate {
        value,
        n,
        k,
        form_degree: per.degree(),
        error_bound,
        history: vec![HistoryEntry {
            n,
            k,
            value,
            error_bound,
        }],
        stable: None,
    })
}

/// The `k = n` schedule for `n = 1..=n_max`.
pub fn default_schedule(n_max: u32) -> Vec<(u32, u32)> {
    (1..=n_max).map(|n| (n, n)).collect()
}

/// Runs a schedule and returns the last estimate with the full history.
/// When `h_φ` is the standard height, `k` is forced to 0.
pub fn pairing_converged(
    phi: &RationalMap,
    psi: &RationalMap,
    schedule: &[(u32, u32)],
    stability_tol: f64,
) -> Result<PairingEstimate> {
    pairing_converged_with(
        phi,
        psi,
        schedule,
        stability_tol,
        &PairingOptions::default(),
    )
}

pub fn pairing_converged_with(
    phi: &RationalMap,
    psi: &RationalMap,
    schedule: &[(u32, u32)],
    stability_tol: f64,
    opts: &PairingOptions,
) -> Result<PairingEstimate> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty schedule".into()));
    }
    let standard = has_standard_height(phi);
    let mut history = Vec::with_capacity(schedule.len());
    let mut last = None;
    for &(n, k) in schedule {
        let k = if standard { 0 } else { k };
        let est = pairing_estimate_with(phi, psi, n, k, opts)?;
        history.extend(est.history.iter().copied());
        last = Some(est);
    }
    let mut est = last.expect("nonempty schedule");
    let stable = (history.len() >= 3).then(|| {
        let tail = &history[history.len() - 3..];
        let hi = tail.iter().map(|h| h.value).fold(f64::MIN, f64::max);
        let lo = tail.iter().map(|h| h.value).fold(f64::MAX, f64::min);
        hi - lo <= stability_tol
    });
    est.history = history;
    est.stable = stable;
    Ok(est)
}

/// Both directional estimates at the same `(n, k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryDiagnostic {
    pub forward: PairingEstimate,
    pub backward: PairingEstimate,
    pub gap: f64,
}

pub fn symmetry_diagnostic(
    phi: &RationalMap,
    psi: &RationalMap,
    n: u32,
    k: u32,
) -> Result<SymmetryDiagnostic> {
    let forward = pairing_estimate(phi, psi, n, k)?;
    let backward = pairing_estimate(psi, phi, n, k)?;
    let gap = (forward.value - backward.value).abs();
    Ok(SymmetryDiagnostic {
        forward,
        backward,
        gap,
    })
}

fn valuation(x: &BigInt, p: &BigInt) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(p);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

/// Local pairing at a prime of good reduction for both maps:
/// `log|s0 t1 - s1 t0|_p - log max(|s0|_p, |s1|_p) - log max(|t0|_p, |t1|_p)`.
pub fn local_pairing_good_reduction(
    s: (&BigInt, &BigInt),
    t: (&BigInt, &BigInt),
    p: &BigInt,
) -> Result<f64> {
    if !is_probable_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let ln_p = crate::util::log_abs(p);
    // log|x|_p = -v_p(x) log p
    let log_p = |x: &BigInt| valuation(x, p).map(|v| -(v as f64) * ln_p);
    let log_max = |a: &BigInt, b: &BigInt| -> Result<f64> {
        match (log_p(a), log_p(b)) {
            (None, None) => Err(Error::InvalidParameter("(0,0) is not a point".into())),
            (x, y) => Ok(x
                .unwrap_or(f64::NEG_INFINITY)
                .max(y.unwrap_or(f64::NEG_INFINITY))),
        }
    };
    let cross = s.0 * t.1 - s.1 * t.0;
    let Some(lc) = log_p(&cross) else {
        return Err(Error::InvalidParameter(
            "the two sections have the same divisor".into(),
        ));
    };
    Ok(lc - log_max(s.0, s.1)? - log_max(t.0, t.1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigpoly::IntPolynomial;
    use num_rational::BigRational;

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn bf(c: &[i64]) -> IntBinaryForm {
        IntBinaryForm::from_i64(c)
    }

    #[test]
    fn periodic_form_examples() {
        let s = RationalMap::squaring();
        // x1 x0^2 - x0 x1^2 = x0 x1 (x0 - x1)
        assert_eq!(periodic_form(&s, 1, 5000).unwrap(), bf(&[0, 1, -1, 0]));
        assert_eq!(
            periodic_form(&s, 2, 5000).unwrap(),
            bf(&[0, 1, 0, 0, -1, 0])
        );
        let q = RationalMap::quad(&rat(-1));
        assert_eq!(periodic_form(&q, 1, 5000).unwrap(), bf(&[0, 1, -1, -1]));
        for n in 1..=6 {
            assert_eq!(periodic_form(&q, n, 5000).unwrap().degree(), (1 << n) + 1);
        }
        assert!(matches!(
            periodic_form(&s, 13, 5000),
            Err(Error::DegreeCap { .. })
        ));
    }

    #[test]
    fn pushforward_examples() {
        let s = RationalMap::squaring();
        let f = bf(&[0, 1, -1, 0]);
        assert_eq!(pushforward_form(&f, &s, 0).unwrap(), f);
        assert_eq!(pushforward_form(&f, &s, 1).unwrap(), f);
        // x^2 - 2 -> roots {2, 2}
        let g = IntPolynomial::from_i64(&[-2, 0, 1]).homogenize(2);
        assert_eq!(pushforward_form(&g, &s, 1).unwrap(), bf(&[1, -4, 4]));
    }

    #[test]
    fn pushforward_matches_pointwise_images() {
        let phi = RationalMap::lattes(1, 2).unwrap();
        let f = IntPolynomial::from_i64(&[3, -1, 2, 1]).homogenize(3);
        let pushed = pushforward_form(&f, &phi, 1).unwrap();
        let r0 = crate::mahler::complex_roots(&f.dehomogenize(), 1e-12).unwrap();
        let r1 = crate::mahler::complex_roots(&pushed.dehomogenize(), 1e-12).unwrap();
        for z in &r0.roots {
            let w = phi.apply_complex([*z, Complex64::new(1.0, 0.0)]);
            let img = w[0] / w[1];
            assert!(r1
                .roots
                .iter()
                .any(|u| (u - img).norm() < 1e-8 * img.norm().max(1.0)));
        }
    }

    #[test]
    fn estimate_examples() {
        let s = RationalMap::squaring();
        for n in 1..=5 {
            let e = pairing_estimate(&s, &s, n, 0).unwrap();
            assert!(e.value.abs() <= 1e-12);
            assert_eq!(e.form_degree, (1 << n) + 1);
        }
        let q = RationalMap::quad(&rat(-1));
        let e = pairing_estimate(&s, &q, 1, 0).unwrap();
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((e.value - golden / 3.0).abs() < 1e-12);
        let cube = RationalMap::make_map(
            &IntPolynomial::from_i64(&[0, 0, 0, 1]),
            &IntPolynomial::one(),
        )
        .unwrap();
        for n in 1..=3 {
            assert!(pairing_estimate(&s, &cube, n, 0).unwrap().value.abs() < 1e-12);
        }
    }

    #[test]
    fn converged_forces_k_zero_for_standard_maps() {
        let s = RationalMap::squaring();
        let c = RationalMap::coc(&rat(1));
        let est = pairing_converged(&s, &c, &default_schedule(4), 0.1).unwrap();
        assert!(est.history.iter().all(|h| h.k == 0));
        assert_eq!(est.history.len(), 4);
        assert!(est.stable.is_some());
        assert!(!has_standard_height(&c));
    }

    #[test]
    fn local_pairing_examples() {
        let b = |x: i64| BigInt::from(x);
        for p in [2, 3, 7] {
            let v = local_pairing_good_reduction((&b(0), &b(1)), (&b(1), &b(0)), &b(p)).unwrap();
            assert_eq!(v, 0.0);
            let v = local_pairing_good_reduction((&b(1), &b(0)), (&b(p), &b(1)), &b(p)).unwrap();
            assert_eq!(v, 0.0);
        }
        let v = local_pairing_good_reduction((&b(1), &b(1)), (&b(1), &b(-1)), &b(2)).unwrap();
        assert!((v + 2f64.ln()).abs() < 1e-15);
        assert!(local_pairing_good_reduction((&b(1), &b(1)), (&b(2), &b(2)), &b(2)).is_err());
        assert!(local_pairing_good_reduction((&b(1), &b(1)), (&b(1), &b(2)), &b(4)).is_err());
    }
}
