//! Standard and canonical heights of rational points.
//!
//! Over Q every place has weight one, so the standard height of a coprime
//! integer pair is just `log max(|x0|, |x1|)`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::bigpoly::{IntBinaryForm, Primitive};
use crate::dynmap::RationalMap;
use crate::error::{Error, Result};
use crate::mahler::log_mahler;
use crate::util::{log_abs, KahanSum};

/// Default iteration cap for [`canonical_height`].
pub const DEFAULT_HEIGHT_ITERATIONS: usize = 64;

/// Once the exact orbit point exceeds this many bits the archimedean part is
/// carried by a truncated pair and the gcds by residues.
const EXACT_BITS: u64 = 4096;
/// Working precision of the truncated pair.
const APPROX_BITS: u64 = 1024;

/// A point of `P^1(Q)` as a coprime integer pair with `x1 >= 0`, and
/// `(1:0)` for infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProjPointQ {
    x0: BigInt,
    x1: BigInt,
}

impl ProjPointQ {
    pub fn new(x0: BigInt, x1: BigInt) -> Result<Self> {
        let g = x0.gcd(&x1);
        if g.is_zero() {
            return Err(Error::InvalidParameter("(0:0) is not a point".into()));
        }
        let (mut x0, mut x1) = (x0 / &g, x1 / &g);
        if x1.is_negative() || (x1.is_zero() && x0.is_negative()) {
            x0 = -x0;
            x1 = -x1;
        }
        Ok(ProjPointQ { x0, x1 })
    }

    pub fn from_i64(x0: i64, x1: i64) -> Result<Self> {
        Self::new(x0.into(), x1.into())
    }

    pub fn from_rational(x: &BigRational) -> Self {
        Self::new(x.numer().clone(), x.denom().clone()).expect("denominator is nonzero")
    }

    pub fn infinity() -> Self {
        ProjPointQ {
            x0: BigInt::one(),
            x1: BigInt::zero(),
        }
    }

    pub fn x0(&self) -> &BigInt {
        &self.x0
    }

    pub fn x1(&self) -> &BigInt {
        &self.x1
    }

    pub fn is_infinity(&self) -> bool {
        self.x1.is_zero()
    }

    /// Affine coordinate `x0/x1`, or `None` at infinity.
    pub fn to_rational(&self) -> Option<BigRational> {
        (!self.x1.is_zero()).then(|| BigRational::new(self.x0.clone(), self.x1.clone()))
    }
}

impl fmt::Display for ProjPointQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.x0, self.x1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HeightValue {
    pub value: f64,
    pub error_bound: f64,
    pub iterations_used: usize,
}

pub fn standard_height(p: &ProjPointQ) -> HeightValue {
    let value = log_abs(&p.x0).max(log_abs(&p.x1));
    HeightValue {
        value,
        error_bound: value * f64::EPSILON,
        iterations_used: 0,
    }
}

/// Explicit bounds on the one-step discrepancy
/// `δ(x) = h(φ(x)) - d·h(x)` of a map: `lower <= δ <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepBounds {
    pub upper: f64,
    pub lower: f64,
}

impl StepBounds {
    /// `sup |δ|`.
    pub fn constant(&self) -> f64 {
        self.upper.abs().max(self.lower.abs())
    }

    /// Bound on `|h_φ - h|`.
    pub fn height_difference(&self, degree: usize) -> f64 {
        self.constant() / (degree as f64 - 1.0)
    }
}

fn l1_norm_f64(coeffs: &[BigRational]) -> f64 {
    coeffs
        .iter()
        .map(|c| (log_abs(c.numer()) - log_abs(c.denom())).exp())
        .filter(|v| v.is_finite())
        .sum()
}

/// Solves `H0*Φ0 + H1*Φ1 = target` for forms `H0, H1` of degree `d-1`,
/// exactly over Q.
fn bezout_cofactors(
    phi0: &IntBinaryForm,
    phi1: &IntBinaryForm,
    target: &[BigInt],
) -> (Vec<BigRational>, Vec<BigRational>) {
    let d = phi0.degree();
    let n = 2 * d;
    // Row r is the coefficient of x0^(2d-1-r) x1^r; column j < d is H0's
    // x1^j coefficient, column d + j is H1's.
    let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n + 1]; n];
    for j in 0..d {
        for (i, c) in phi0.coeffs().iter().enumerate() {
            m[i + j][j] = BigRational::from_integer(c.clone());
        }
        for (i, c) in phi1.coeffs().iter().enumerate() {
            m[i + j][d + j] = BigRational::from_integer(c.clone());
        }
    }
    for (r, t) in target.iter().enumerate() {
        m[r][n] = BigRational::from_integer(t.clone());
    }
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .expect("nonzero resultant makes the system regular");
        m.swap(col, piv);
        let p = m[col][col].clone();
        for c in col..=n {
            m[col][c] = &m[col][c] / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let v = &f * &m[col][c];
                    m[r][c] -= v;
                }
            }
        }
    }
    let sol: Vec<BigRational> = m.into_iter().map(|row| row[n].clone()).collect();
    (sol[..d].to_vec(), sol[d..].to_vec())
}

/// Computes [`StepBounds`] for a map.
///
/// The upper bound is the triangle inequality on the lift. The lower bound
/// combines the Bezout identities `H0Φ0 + H1Φ1 = x0^(2d-1)` (and likewise for
/// `x1`), which bound `max|Φ|` from below at the archimedean place, with the
/// fact that the gcd removed from `Φ(x)` divides `Res(Φ)`.
pub fn step_bounds(map: &RationalMap) -> StepBounds {
    let lift = map.lift();
    let d = map.degree();
    let l1 = |f: &IntBinaryForm| -> f64 {
        f.coeffs()
            .iter()
            .map(crate::util::bigint_to_f64)
            .map(f64::abs)
            .sum()
    };
    let upper = l1(&lift.x0).max(l1(&lift.x1)).ln();
    let mut worst: f64 = 0.0;
    for which in [0, 2 * d - 1] {
        let mut target = vec![BigInt::zero(); 2 * d];
        target[which] = BigInt::one();
        let (h0, h1) = bezout_cofactors(&lift.x0, &lift.x1, &target);
        worst = worst.max(l1_norm_f64(&h0) + l1_norm_f64(&h1));
    }
    let lower = -worst.ln() - log_abs(map.resultant());
    StepBounds { upper, lower }
}

fn truncate_pair(u: &mut BigInt, v: &mut BigInt) {
    let bits = u.bits().max(v.bits());
    if bits > APPROX_BITS {
        let s = bits - APPROX_BITS;
        *u = &*u >> s;
        *v = &*v >> s;
    }
}

/// Canonical height with the default iteration cap.
pub fn canonical_height(map: &RationalMap, p: &ProjPointQ, tol: f64) -> Result<HeightValue> {
    canonical_height_with_cap(map, p, tol, DEFAULT_HEIGHT_ITERATIONS)
}

/// `h_φ(p)` to within `tol`.
///
/// Writes `h_φ(p) = h(p) + Σ_j δ(P_j) / d^(j+1)` along the reduced orbit
/// `P_j`, with `δ(P) = log max|Φ(P)| - d log max|P| - log gcd(Φ(P))`, and
/// stops once the geometric tail `C / (d^n (d-1))` drops below `tol / d`.
pub fn canonical_height_with_cap(
    map: &RationalMap,
    p: &ProjPointQ,
    tol: f64,
    max_iterations: usize,
) -> Result<HeightValue> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let d = map.degree() as f64;
    let c = step_bounds(map).constant();
    let lift = map.lift();
    let res = map.resultant().abs();
    let trivial_gcd = res.is_one();

    let h0 = standard_height(p).value;
    let mut sum = KahanSum::default();
    sum.add(h0);
    let goal = tol / d;
    let tail = |n: usize| c / (d.powi(n as i32) * (d - 1.0));

    // Exact phase: the pair itself. Approximate phase: a truncated real pair
    // plus residues modulo `modulus` for the gcds.
    let mut exact = Some((p.x0().clone(), p.x1().clone()));
    let (mut u, mut v) = (BigInt::zero(), BigInt::zero());
    let (mut r0, mut r1, mut modulus) = (BigInt::zero(), BigInt::zero(), BigInt::one());

    let mut n = 0;
    let mut scale = 1.0;
    while tail(n) > goal {
        if n == max_iterations {
            let value = sum.value();
            return Err(Error::HeightTolerance {
                tol,
                iterations: n,
                value,
                bound: tail(n),
            });
        }
        scale /= d;
        let delta = match exact.take() {
            Some((a, b)) => {
                let (fa, fb) = lift.apply(&a, &b);
                let g = fa.gcd(&fb);
                let lam = log_abs(&fa).max(log_abs(&fb)) - d * log_abs(&a).max(log_abs(&b));
                let (na, nb) = (fa / &g, fb / &g);
                if na.bits().max(nb.bits()) <= EXACT_BITS {
                    exact = Some((na, nb));
                } else {
                    u = na.clone();
                    v = nb.clone();
                    truncate_pair(&mut u, &mut v);
                    if !trivial_gcd {
                        modulus = res.pow((max_iterations - n + 1) as u32);
                        r0 = na.mod_floor(&modulus);
                        r1 = nb.mod_floor(&modulus);
                    }
                }
                lam - log_abs(&g)
            }
            None => {
                let (fu, fv) = lift.apply(&u, &v);
                let lam = log_abs(&fu).max(log_abs(&fv)) - d * log_abs(&u).max(log_abs(&v));
                u = fu;
                v = fv;
                truncate_pair(&mut u, &mut v);
                let mut log_g = 0.0;
                if !trivial_gcd {
                    let (s0, s1) = lift.apply(&r0, &r1);
                    let (s0, s1) = (s0.mod_floor(&modulus), s1.mod_floor(&modulus));
                    let g = s0.gcd(&s1).gcd(&res);
                    log_g = log_abs(&g);
                    modulus = &modulus / &g;
                    r0 = (s0 / &g).mod_floor(&modulus);
                    r1 = (s1 / &g).mod_floor(&modulus);
                }
                lam - log_g
            }
        };
        sum.add(delta * scale);
        n += 1;
    }
    let value = sum.value();
    let rounding = 8.0 * f64::EPSILON * (h0.abs() + c + 1.0);
    let error_bound = tail(n) + rounding;
    Ok(HeightValue {
        // Heights are nonnegative; a negative value is pure truncation error.
        value: value.max(0.0),
        error_bound,
        iterations_used: n,
    })
}

/// Average standard height over the projective roots of a primitive form,
/// `m(F) / deg F`.
pub fn orbit_average_height(f: &IntBinaryForm) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::InvalidParameter("zero form".into()));
    }
    let poly = f.dehomogenize().primitive_part();
    let m = log_mahler(&poly)?;
    Ok(m.value / f.degree() as f64)
}
