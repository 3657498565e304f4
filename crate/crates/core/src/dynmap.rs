//! Rational self-maps of the projective line over Q.
//!
//! A map is stored as its jointly primitive integer lift `(Φ0, Φ1)` with the
//! sign fixed so that the first nonzero coefficient of `Φ0` (or of `Φ1` when
//! `Φ0 = 0`) is positive. Every global quantity computed downstream is
//! independent of the scalar normalization of the lift, so this choice is a
//! canonical representative rather than a restriction.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bigpoly::{joint_normalize, resultant_binary, IntBinaryForm, IntPolynomial};
use crate::error::{Error, Result};
use crate::heights::ProjPointQ;

/// Largest lift degree the iteration routines will build unless told
/// otherwise.
pub const DEFAULT_DEGREE_CAP: u64 = 5000;

/// A pair of binary forms of equal degree, `(x0, x1) -> (Φ0, Φ1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lift {
    pub x0: IntBinaryForm,
    pub x1: IntBinaryForm,
}

impl Lift {
    pub fn degree(&self) -> usize {
        self.x0.degree()
    }

    /// Jointly primitive representative and the content removed.
    pub fn normalized(&self) -> (BigInt, Lift) {
        let (g, parts) = joint_normalize(&[self.x0.coeffs(), self.x1.coeffs()]);
        let mut it = parts.into_iter();
        let x0 = IntBinaryForm::new(it.next().expect("two parts"));
        let x1 = IntBinaryForm::new(it.next().expect("two parts"));
        (g, Lift { x0, x1 })
    }

    /// `self ∘ inner`: substitutes the forms of `inner` into `self`.
    pub fn compose(&self, inner: &Lift) -> Lift {
        let d = self.degree();
        let mut p_pow = vec![IntBinaryForm::from_i64(&[1])];
        let mut q_pow = vec![IntBinaryForm::from_i64(&[1])];
        for j in 1..=d {
            p_pow.push(&p_pow[j - 1] * &inner.x0);
            q_pow.push(&q_pow[j - 1] * &inner.x1);
        }
        let subst = |f: &IntBinaryForm| {
            let mut acc = IntBinaryForm::zero(d * inner.degree());
            for (i, c) in f.coeffs().iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let term = (&p_pow[d - i] * &q_pow[i]).scale(c);
                acc = &acc + &term;
            }
            acc
        };
        Lift {
            x0: subst(&self.x0),
            x1: subst(&self.x1),
        }
    }

    /// Applies the lift to an integer pair, without reduction.
    pub fn apply(&self, a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
        (self.x0.eval(a, b), self.x1.eval(a, b))
    }
}

/// Integral Möbius transformation `x -> (a x + b) / (c x + d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobiusQ {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl MobiusQ {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::from_big(a.into(), b.into(), c.into(), d.into())
    }

    pub fn from_big(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if (&a * &d - &b * &c).is_zero() {
            return Err(Error::InvalidParameter(
                "Möbius matrix must be invertible".into(),
            ));
        }
        Ok(MobiusQ { a, b, c, d })
    }

    /// The adjugate, which represents the inverse transformation.
    pub fn inverse(&self) -> MobiusQ {
        MobiusQ {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    fn as_lift(&self) -> Lift {
        Lift {
            x0: IntBinaryForm::new(vec![self.a.clone(), self.b.clone()]),
            x1: IntBinaryForm::new(vec![self.c.clone(), self.d.clone()]),
        }
    }
}

/// Rational map of degree at least two with a nondegenerate primitive lift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMap {
    lift: Lift,
    res: BigInt,
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |p: &IntPolynomial| {
            let terms: Vec<String> = p.coeffs().iter().map(|c| c.to_string()).collect();
            format!("[{}]", terms.join(","))
        };
        write!(
            f,
            "num={} den={}",
            show(&self.lift.x0.dehomogenize()),
            show(&self.lift.x1.dehomogenize())
        )
    }
}

impl RationalMap {
    /// `x -> num(x) / den(x)`.
    pub fn make_map(num: &IntPolynomial, den: &IntPolynomial) -> Result<Self> {
        if num.is_zero() && den.is_zero() {
            return Err(Error::InvalidParameter("num and den both zero".into()));
        }
        let d = num.degree().unwrap_or(0).max(den.degree().unwrap_or(0));
        Self::from_lift(Lift {
            x0: num.homogenize(d),
            x1: den.homogenize(d),
        })
    }

    /// Builds a map from rational coefficient lists (ascending), clearing
    /// denominators.
    pub fn from_rational(num: &[BigRational], den: &[BigRational]) -> Result<Self> {
        let lcm = num
            .iter()
            .chain(den)
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let clear = |v: &[BigRational]| {
            IntPolynomial::new(
                v.iter()
                    .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
                    .collect(),
            )
        };
        Self::make_map(&clear(num), &clear(den))
    }

    pub fn from_lift(lift: Lift) -> Result<Self> {
        if lift.x0.degree() != lift.x1.degree() {
            return Err(Error::InvalidParameter(
                "lift forms differ in degree".into(),
            ));
        }
        let d = lift.degree();
        if d < 2 {
            return Err(Error::DegreeTooSmall(d));
        }
        let (_, lift) = lift.normalized();
        let res = resultant_binary(&lift.x0, &lift.x1);
        if res.is_zero() {
            return Err(Error::DegenerateLift);
        }
        Ok(RationalMap { lift, res })
    }

    pub fn squaring() -> Self {
        Self::make_map(&IntPolynomial::from_i64(&[0, 0, 1]), &IntPolynomial::one())
            .expect("x^2 is a valid map")
    }

    /// `x -> α - (α - x)^2`, the squaring map conjugated by `x -> α - x`.
    pub fn coc(alpha: &BigRational) -> Self {
        let two = BigRational::from_integer(2.into());
        let num = [alpha - alpha * alpha, &two * alpha, -BigRational::one()];
        Self::from_rational(&num, &[BigRational::one()]).expect("valid for every α")
    }

    /// `x -> x^2 + c`.
    pub fn quad(c: &BigRational) -> Self {
        let num = [c.clone(), BigRational::zero(), BigRational::one()];
        Self::from_rational(&num, &[BigRational::one()]).expect("valid for every c")
    }

    /// Lattès map of `y^2 = x(x-a)(x+b)`:
    /// `x -> (x^2 + ab)^2 / (4 x (x - a)(x + b))`.
    pub fn lattes(a: u64, b: u64) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidParameter(
                "Lattès parameters must be positive integers".into(),
            ));
        }
        let ab = BigInt::from(a) * BigInt::from(b);
        let inner = IntPolynomial::new(vec![ab.clone(), BigInt::zero(), BigInt::one()]);
        let num = inner.pow(2);
        // 4x(x-a)(x+b) = 4x^3 + 4(b-a)x^2 - 4ab x
        let four = BigInt::from(4);
        let den = IntPolynomial::new(vec![
            BigInt::zero(),
            -&four * &ab,
            &four * (BigInt::from(b) - BigInt::from(a)),
            four,
        ]);
        Self::make_map(&num, &den)
    }

    pub fn degree(&self) -> usize {
        self.lift.degree()
    }

    pub fn lift(&self) -> &Lift {
        &self.lift
    }

    pub fn resultant(&self) -> &BigInt {
        &self.res
    }

    /// Jointly primitive lift of the `n`-th iterate and the product of the
    /// contents removed along the way.
    pub fn iterate_lift(&self, n: u32, degree_cap: u64) -> Result<(Lift, BigInt)> {
        if n == 0 {
            return Err(Error::InvalidParameter("iterate needs n >= 1".into()));
        }
        let degree = (self.degree() as u64).checked_pow(n).unwrap_or(u64::MAX);
        if degree > degree_cap {
            return Err(Error::DegreeCap {
                degree,
                cap: degree_cap,
            });
        }
        let mut acc = self.lift.clone();
        let mut removed = BigInt::one();
        for _ in 1..n {
            let (g, next) = self.lift.compose(&acc).normalized();
            removed *= g;
            acc = next;
        }
        Ok((acc, removed))
    }

    /// Map of the `n`-th iterate.
    pub fn iterate(&self, n: u32, degree_cap: u64) -> Result<RationalMap> {
        let (lift, _) = self.iterate_lift(n, degree_cap)?;
        RationalMap::from_lift(lift)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap> {
        RationalMap::from_lift(self.lift.compose(&inner.lift))
    }

    /// `γ⁻¹ ∘ φ ∘ γ`.
    pub fn conjugate(&self, gamma: &MobiusQ) -> RationalMap {
        let inner = self.lift.compose(&gamma.as_lift());
        let outer = gamma.inverse().as_lift().compose(&inner);
        RationalMap::from_lift(outer).expect("conjugation preserves degree and nondegeneracy")
    }

    /// Reduced image of a rational projective point.
    pub fn apply(&self, p: &ProjPointQ) -> ProjPointQ {
        let (a, b) = self.lift.apply(p.x0(), p.x1());
        ProjPointQ::new(a, b).expect("nondegenerate lift never maps to (0,0)")
    }

    /// Image of an affine rational `x`; `None` means `∞`.
    pub fn eval_rational(&self, x: &BigRational) -> Option<BigRational> {
        let p = ProjPointQ::from_rational(x);
        self.apply(&p).to_rational()
    }

    /// Image of a point of `P^1(C)` given in homogeneous coordinates,
    /// rescaled so the larger coordinate has modulus one.
    pub fn apply_complex(&self, z: [Complex64; 2]) -> [Complex64; 2] {
        let eval = |f: &IntBinaryForm| {
            let d = f.degree();
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, c) in f.coeffs().iter().enumerate() {
                let c = crate::util::bigint_to_f64(c);
                if c != 0.0 {
                    acc += z[0].powu((d - i) as u32) * z[1].powu(i as u32) * c;
                }
            }
            acc
        };
        let w = [eval(&self.lift.x0), eval(&self.lift.x1)];
        let s = w[0].norm().max(w[1].norm());
        if s == 0.0 || !s.is_finite() {
            return w;
        }
        [w[0] / s, w[1] / s]
    }

    /// Whether `∞ = (1:0)` is a fixed point.
    pub fn fixes_infinity(&self) -> bool {
        self.lift.x1.coeffs()[0].is_zero()
    }

    /// Primes of bad reduction for the primitive lift: the prime divisors
    /// of `Res(Φ)`.
    pub fn bad_reduction_primes(&self) -> BadPrimes {
        factor_with_cap(&self.res.abs(), TRIAL_DIVISION_LIMIT, RHO_ITERATION_CAP)
    }
}

const TRIAL_DIVISION_LIMIT: u64 = 1 << 16;
const RHO_ITERATION_CAP: u64 = 1 << 18;

/// Result of factoring a resultant under a resource cap.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct BadPrimes {
    /// Distinct primes found, ascending.
    #[serde(serialize_with = "crate::util::serialize_bigints")]
    pub primes: Vec<BigInt>,
    /// Cofactor left unfactored when the cap was hit (`None` when complete).
    #[serde(serialize_with = "crate::util::serialize_opt_bigint")]
    pub unfactored: Option<BigInt>,
}

impl BadPrimes {
    pub fn complete(&self) -> bool {
        self.unfactored.is_none()
    }
}

fn mod_pow(base: &BigInt, exp: &BigInt, m: &BigInt) -> BigInt {
    base.modpow(exp, m)
}

/// Miller–Rabin with the first twelve prime bases (deterministic below
/// 3.3e24, overwhelmingly reliable beyond).
pub(crate) fn is_probable_prime(n: &BigInt) -> bool {
    let two = BigInt::from(2);
    if n < &two {
        return false;
    }
    const BASES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        let p = BigInt::from(p);
        if n == &p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'outer: for a in BASES {
        let mut x = mod_pow(&BigInt::from(a), &d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard rho; `None` when the cap is exhausted.
fn pollard_rho(n: &BigInt, cap: u64) -> Option<BigInt> {
    if n.is_even() {
        return Some(BigInt::from(2));
    }
    let mut spent = 0u64;
    for c in 1u32.. {
        let c = BigInt::from(c);
        let f = |x: &BigInt| (x * x + &c) % n;
        let (mut y, mut r, mut q) = (BigInt::from(2), 1u64, BigInt::one());
        let mut g = BigInt::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let m = 64.min(r - k);
                for _ in 0..m {
                    y = f(&y);
                    q = q * (&x - &y).abs() % n;
                }
                g = q.gcd(n);
                k += m;
                spent += m;
                if spent > cap {
                    return None;
                }
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        if spent > cap {
            return None;
        }
    }
    None
}

pub(crate) fn factor_with_cap(n: &BigInt, trial_limit: u64, rho_cap: u64) -> BadPrimes {
    let mut primes = Vec::new();
    let mut rest = n.abs();
    if rest.is_zero() {
        return BadPrimes {
            primes,
            unfactored: Some(rest),
        };
    }
    let mut p = 2u64;
    while p <= trial_limit && rest > BigInt::one() {
        let bp = BigInt::from(p);
        if (&rest % &bp).is_zero() {
            primes.push(bp.clone());
            while (&rest % &bp).is_zero() {
                rest /= &bp;
            }
        }
        if &bp * &bp > rest {
            break;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut pending = Vec::new();
    if rest > BigInt::one() {
        pending.push(rest);
    }
    let mut leftover = BigInt::one();
    while let Some(m) = pending.pop() {
        if m.to_u64().is_some_and(|v| v <= trial_limit * trial_limit) || is_probable_prime(&m) {
            if !primes.contains(&m) {
                primes.push(m);
            }
            continue;
        }
        match pollard_rho(&m, rho_cap) {
            Some(f) => {
                let g = &m / &f;
                pending.push(f);
                pending.push(g);
            }
            None => leftover *= m,
        }
    }
    primes.sort();
    BadPrimes {
        primes,
        unfactored: (!leftover.is_one()).then_some(leftover),
    }
}
