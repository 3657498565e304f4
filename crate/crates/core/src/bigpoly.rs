//! Exact integer polynomials and binary forms.
//!
//! Binary forms store their coefficients ascending in `x1`: index `i` holds
//! the coefficient of `x0^(d-i) * x1^i`. Dehomogenizing at `x1 = 1` reverses
//! the vector into the ascending-in-`x` layout of [`IntPolynomial`], and the
//! same index order is the descending order a Sylvester matrix wants.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Gauss content and primitive part.
///
/// The primitive part has coprime coefficients and a positive leading
/// coefficient (highest degree for polynomials, highest power of `x0` for
/// forms); the zero object has content 0 and is its own primitive part.
pub trait Primitive: Sized {
    fn content_primitive(&self) -> (BigInt, Self);

    fn primitive_part(&self) -> Self {
        self.content_primitive().1
    }
}

fn content_of(coeffs: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Divides out the content and flips the sign so the leading entry is
/// positive: the last nonzero one when `lead_last`, else the first. Returns
/// the (nonnegative) content.
fn normalize_coeffs(coeffs: &[BigInt], lead_last: bool) -> (BigInt, Vec<BigInt>) {
    let g = content_of(coeffs);
    if g.is_zero() {
        return (g, coeffs.to_vec());
    }
    let lead = if lead_last {
        coeffs.iter().rev().find(|c| !c.is_zero())
    } else {
        coeffs.iter().find(|c| !c.is_zero())
    };
    let negate = lead.is_some_and(|c| c.is_negative());
    let divisor = if negate { -&g } else { g.clone() };
    let out = if divisor.is_one() {
        coeffs.to_vec()
    } else {
        coeffs.iter().map(|c| c / &divisor).collect()
    };
    (g, out)
}

/// Joint content of several coefficient slices, with the sign convention of
/// [`Primitive`] applied to the concatenation.
pub(crate) fn joint_normalize(parts: &[&[BigInt]]) -> (BigInt, Vec<Vec<BigInt>>) {
    let flat: Vec<BigInt> = parts.iter().flat_map(|p| p.iter().cloned()).collect();
    let (g, flat) = normalize_coeffs(&flat, false);
    let mut out = Vec::with_capacity(parts.len());
    let mut it = flat.into_iter();
    for p in parts {
        out.push(it.by_ref().take(p.len()).collect());
    }
    (g, out)
}

// ---------------------------------------------------------------------------
// Coefficient-vector kernels

const KRONECKER_MIN_LEN: usize = 24;

fn mul_schoolbook(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn max_bits(v: &[BigInt]) -> u64 {
    v.iter().map(|c| c.bits()).max().unwrap_or(0)
}

/// Packs `coeffs` at `slot` bits per entry; negative entries go to the second
/// integer so that the packed value is `pos - neg`.
fn kronecker_pack(coeffs: &[BigInt], slot: u64) -> (BigUint, BigUint) {
    let words = ((coeffs.len() as u64 * slot).div_ceil(64) + 1) as usize;
    let mut pos = vec![0u64; words];
    let mut neg = vec![0u64; words];
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let target = if c.is_negative() { &mut neg } else { &mut pos };
        let base = i as u64 * slot;
        for (k, digit) in c.magnitude().iter_u64_digits().enumerate() {
            let bit = base + 64 * k as u64;
            let (w, off) = ((bit / 64) as usize, bit % 64);
            target[w] |= digit << off;
            if off != 0 {
                target[w + 1] |= digit >> (64 - off);
            }
        }
    }
    (
        BigUint::from_slice(&to_u32(&pos)),
        BigUint::from_slice(&to_u32(&neg)),
    )
}

fn to_u32(words: &[u64]) -> Vec<u32> {
    words
        .iter()
        .flat_map(|w| [*w as u32, (*w >> 32) as u32])
        .collect()
}

fn extract_bits(words: &[u64], start: u64, len: u64) -> BigUint {
    let mut out = vec![0u64; len.div_ceil(64) as usize];
    for (k, slot) in out.iter_mut().enumerate() {
        let bit = start + 64 * k as u64;
        let (w, off) = ((bit / 64) as usize, bit % 64);
        let lo = words.get(w).copied().unwrap_or(0) >> off;
        let hi = if off == 0 {
            0
        } else {
            words.get(w + 1).copied().unwrap_or(0) << (64 - off)
        };
        *slot = lo | hi;
    }
    let rem = len % 64;
    if rem != 0 {
        if let Some(last) = out.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
    BigUint::from_slice(&to_u32(&out))
}

/// Polynomial product by Kronecker substitution: both operands are packed
/// into single integers, multiplied with the big-integer library's
/// subquadratic routines, and unpacked with balanced digits.
fn mul_kronecker(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let n = a.len() + b.len() - 1;
    let bound =
        max_bits(a) + max_bits(b) + 64 - (a.len().min(b.len()) as u64).leading_zeros() as u64;
    let slot = bound + 2;
    let (ap, an) = kronecker_pack(a, slot);
    let (bp, bn) = kronecker_pack(b, slot);
    let av = BigInt::from_biguint(Sign::Plus, ap) - BigInt::from_biguint(Sign::Plus, an);
    let bv = BigInt::from_biguint(Sign::Plus, bp) - BigInt::from_biguint(Sign::Plus, bn);
    let prod = av * bv;
    let negative = prod.is_negative();
    let words: Vec<u64> = prod.magnitude().iter_u64_digits().collect();
    let half = BigUint::one() << (slot - 1);
    let full = BigInt::one() << slot;
    let mut carry = false;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut t = extract_bits(&words, k as u64 * slot, slot);
        if carry {
            t += 1u32;
        }
        let digit = if t >= half {
            carry = true;
            BigInt::from_biguint(Sign::Plus, t) - &full
        } else {
            carry = false;
            BigInt::from_biguint(Sign::Plus, t)
        };
        out.push(if negative { -digit } else { digit });
    }
    out
}

pub(crate) fn mul_coeffs(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a.len().min(b.len()) >= KRONECKER_MIN_LEN {
        mul_kronecker(a, b)
    } else {
        mul_schoolbook(a, b)
    }
}

// ---------------------------------------------------------------------------
// IntPolynomial

/// Dense integer polynomial, coefficients ascending in degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPolynomial { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPolynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    /// Multiplicity of the root `x = 0`.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| {
                acc * x + BigRational::from_integer(c.clone())
            })
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `f(-x)`.
    pub fn reflect(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// `f(x + c)`, by repeated synthetic division.
    pub fn taylor_shift(&self, c: &BigInt) -> Self {
        if c.is_zero() || self.coeffs.len() < 2 {
            return self.clone();
        }
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n - 1 {
            for j in (i..n - 1).rev() {
                let t = &a[j + 1] * c;
                a[j] += t;
            }
        }
        Self::new(a)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Homogenizes to a binary form of the given degree (`degree >= deg f`).
    pub fn homogenize(&self, degree: usize) -> IntBinaryForm {
        assert!(
            self.coeffs.len() <= degree + 1,
            "homogenization degree below polynomial degree"
        );
        let mut coeffs = vec![BigInt::zero(); degree + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[degree - j] = c.clone();
        }
        IntBinaryForm { degree, coeffs }
    }
}

impl Primitive for IntPolynomial {
    fn content_primitive(&self) -> (BigInt, Self) {
        let (g, c) = normalize_coeffs(&self.coeffs, true);
        (g, IntPolynomial { coeffs: c })
    }
}

fn add_coeffs(a: &[BigInt], b: &[BigInt], negate_b: bool) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            match b.get(i) {
                Some(y) if negate_b => x - y,
                Some(y) => x + y,
                None => x,
            }
        })
        .collect()
}

impl Add for &IntPolynomial {
    type Output = IntPolynomial;
    fn add(self, rhs: &IntPolynomial) -> IntPolynomial {
        IntPolynomial::new(add_coeffs(&self.coeffs, &rhs.coeffs, false))
    }
}

impl Sub for &IntPolynomial {
    type Output = IntPolynomial;
    fn sub(self, rhs: &IntPolynomial) -> IntPolynomial {
        IntPolynomial::new(add_coeffs(&self.coeffs, &rhs.coeffs, true))
    }
}

impl Mul for &IntPolynomial {
    type Output = IntPolynomial;
    fn mul(self, rhs: &IntPolynomial) -> IntPolynomial {
        IntPolynomial::new(mul_coeffs(&self.coeffs, &rhs.coeffs))
    }
}

impl Neg for &IntPolynomial {
    type Output = IntPolynomial;
    fn neg(self) -> IntPolynomial {
        IntPolynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// IntBinaryForm

/// Integer binary form of a fixed degree; index `i` is the coefficient of
/// `x0^(degree - i) * x1^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntBinaryForm {
    degree: usize,
    coeffs: Vec<BigInt>,
}

impl IntBinaryForm {
    /// Panics on an empty coefficient vector.
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "binary form needs at least one coefficient"
        );
        IntBinaryForm {
            degree: coeffs.len() - 1,
            coeffs,
        }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero(degree: usize) -> Self {
        IntBinaryForm {
            degree,
            coeffs: vec![BigInt::zero(); degree + 1],
        }
    }

    /// `x0^(degree - j) * x1^j`.
    pub fn monomial(degree: usize, j: usize) -> Self {
        let mut f = Self::zero(degree);
        f.coeffs[j] = BigInt::one();
        f
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `F(x, 1)`, ascending in `x`.
    pub fn dehomogenize(&self) -> IntPolynomial {
        IntPolynomial::new(self.coeffs.iter().rev().cloned().collect())
    }

    /// Multiplicity of the projective root `∞ = (1:0)`, i.e. the power of
    /// `x1` dividing the form.
    pub fn infinity_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    pub fn eval(&self, x0: &BigInt, x1: &BigInt) -> BigInt {
        // Horner in x1/x0, homogenized.
        let mut acc = BigInt::zero();
        let mut p1 = BigInt::one();
        let mut terms = Vec::with_capacity(self.degree + 1);
        for _ in 0..=self.degree {
            terms.push(p1.clone());
            p1 *= x1;
        }
        let mut p0 = BigInt::one();
        for i in (0..=self.degree).rev() {
            if !self.coeffs[i].is_zero() {
                acc += &self.coeffs[i] * &p0 * &terms[i];
            }
            p0 *= x0;
        }
        acc
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntBinaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Multiplies by `x0^a * x1^b`.
    pub fn shift(&self, a: usize, b: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); self.degree + a + b + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i + b] = c.clone();
        }
        IntBinaryForm {
            degree: self.degree + a + b,
            coeffs,
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = IntBinaryForm::from_i64(&[1]);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Value at a floating-point affine coordinate, as `(F(x,1), F(1,0))`-style
    /// homogeneous evaluation at `(x0, x1)`.
    pub fn eval_f64(&self, x0: f64, x1: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let c = crate::util::bigint_to_f64(c);
            acc += c * x0.powi((self.degree - i) as i32) * x1.powi(i as i32);
        }
        acc
    }
}

impl Primitive for IntBinaryForm {
    fn content_primitive(&self) -> (BigInt, Self) {
        let (g, c) = normalize_coeffs(&self.coeffs, false);
        (
            g,
            IntBinaryForm {
                degree: self.degree,
                coeffs: c,
            },
        )
    }
}

impl Add for &IntBinaryForm {
    type Output = IntBinaryForm;
    fn add(self, rhs: &IntBinaryForm) -> IntBinaryForm {
        assert_eq!(self.degree, rhs.degree, "adding forms of different degree");
        IntBinaryForm {
            degree: self.degree,
            coeffs: add_coeffs(&self.coeffs, &rhs.coeffs, false),
        }
    }
}

impl Sub for &IntBinaryForm {
    type Output = IntBinaryForm;
    fn sub(self, rhs: &IntBinaryForm) -> IntBinaryForm {
        assert_eq!(
            self.degree, rhs.degree,
            "subtracting forms of different degree"
        );
        IntBinaryForm {
            degree: self.degree,
            coeffs: add_coeffs(&self.coeffs, &rhs.coeffs, true),
        }
    }
}

impl Mul for &IntBinaryForm {
    type Output = IntBinaryForm;
    fn mul(self, rhs: &IntBinaryForm) -> IntBinaryForm {
        IntBinaryForm {
            degree: self.degree + rhs.degree,
            coeffs: mul_coeffs(&self.coeffs, &rhs.coeffs),
        }
    }
}

impl Neg for &IntBinaryForm {
    type Output = IntBinaryForm;
    fn neg(self) -> IntBinaryForm {
        IntBinaryForm {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Resultants

/// Fraction-free (Bareiss) determinant.
pub(crate) fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign_flip = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(k, p);
            sign_flip = !sign_flip;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign_flip {
        -d
    } else {
        d
    }
}

/// Sylvester matrix of two coefficient lists given in descending order
/// (formal degrees `a.len()-1`, `b.len()-1`).
fn sylvester(a: &[BigInt], b: &[BigInt]) -> Vec<Vec<BigInt>> {
    let m = a.len() - 1;
    let n = b.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![BigInt::zero(); size];
        row[r..r + m + 1].clone_from_slice(a);
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![BigInt::zero(); size];
        row[r..r + n + 1].clone_from_slice(b);
        rows.push(row);
    }
    rows
}

/// Resultant of two binary forms: the Sylvester determinant of their
/// dehomogenizations at `x1 = 1`, padded to the forms' degrees. Vanishes
/// exactly when the forms share a projective root.
pub fn resultant_binary(f: &IntBinaryForm, g: &IntBinaryForm) -> BigInt {
    det_bareiss(sylvester(&f.coeffs, &g.coeffs))
}

/// `Res(G, F)` for a small-degree `g` with nonzero leading coefficient and
/// an arbitrary `f` (both ascending, `f` of exact degree).
///
/// With `c = lc(g)`, the element `y = c*x` of `Z[x]/(g)` is integral with a
/// monic minimal relation, so `c^deg(f) * f(x)` reduces to an integral
/// polynomial `h(y)` of degree `< deg g` by a Horner pass with no division.
/// Then `Res(g, f) = Res(monic, h) / c^(deg f * (deg g - 1))`.
fn resultant_small_by_large(g: &[BigInt], f: &[BigInt]) -> BigInt {
    let d = g.len() - 1;
    let m = f.len() - 1;
    let c = &g[d];
    debug_assert!(!c.is_zero());
    if d == 0 {
        return c.pow(m as u32);
    }
    // Monic relation y^d + sum_{j<d} g_j c^(d-1-j) y^j.
    let mut cpow = Vec::with_capacity(m.max(d) + 1);
    cpow.push(BigInt::one());
    for i in 1..=m.max(d) {
        let next = &cpow[i - 1] * c;
        cpow.push(next);
    }
    let monic: Vec<BigInt> = (0..d).map(|j| &g[j] * &cpow[d - 1 - j]).collect();

    let mut acc = vec![BigInt::zero(); d];
    for i in (0..=m).rev() {
        // acc <- acc * y mod monic
        let top = std::mem::take(&mut acc[d - 1]);
        for j in (1..d).rev() {
            acc[j] = std::mem::take(&mut acc[j - 1]);
        }
        if !top.is_zero() {
            for j in 0..d {
                acc[j] -= &top * &monic[j];
            }
        }
        if !f[i].is_zero() {
            acc[0] += &f[i] * &cpow[m - i];
        }
    }
    // Sylvester of (monic of degree d, acc of formal degree d-1), descending.
    let mut mono_desc = Vec::with_capacity(d + 1);
    mono_desc.push(BigInt::one());
    mono_desc.extend(monic.iter().rev().cloned());
    let acc_desc: Vec<BigInt> = acc.into_iter().rev().collect();
    let r = det_bareiss(sylvester(&mono_desc, &acc_desc));
    let denom = c.pow((m * (d - 1)) as u32);
    if denom.is_one() {
        r
    } else {
        debug_assert!((&r % &denom).is_zero());
        r / denom
    }
}

/// Exact interpolation from values at consecutive integers `t0, t0+1, ...`.
/// The interpolant is assumed to have integer coefficients.
fn interpolate_consecutive(values: Vec<BigInt>, t0: i64) -> Vec<BigInt> {
    let n = values.len();
    // Forward differences; diffs[k] = Δ^k v(0).
    let mut work = values;
    let mut diffs = Vec::with_capacity(n);
    for k in 0..n {
        diffs.push(work[0].clone());
        for i in 0..n - 1 - k {
            let d = &work[i + 1] - &work[i];
            work[i] = d;
        }
    }
    let mut fact = BigInt::one();
    for (k, d) in diffs.iter_mut().enumerate() {
        if k > 1 {
            fact *= k;
        }
        if k > 1 {
            debug_assert!((&*d % &fact).is_zero());
            *d = &*d / &fact;
        }
    }
    // Falling-factorial basis to monomials in s.
    let mut poly: Vec<BigInt> = vec![diffs[n - 1].clone()];
    for k in (0..n - 1).rev() {
        // poly <- poly * (s - k) + diffs[k]
        let mut next = vec![BigInt::zero(); poly.len() + 1];
        for (i, p) in poly.iter().enumerate() {
            next[i + 1] += p;
            if k != 0 {
                next[i] -= p * k;
            }
        }
        next[0] += &diffs[k];
        poly = next;
    }
    // t = s + t0, so the polynomial in t is poly(t - t0).
    IntPolynomial::new(poly)
        .taylor_shift(&BigInt::from(-t0))
        .into_coeffs()
}

/// Pushes the root multiset of `f` through `x -> (A(x):B(x))`.
///
/// Returns the primitive form `Res_x(F(x0,x1), X1*A(x0,x1) - X0*B(x0,x1))` in
/// `(X0, X1)`, of degree `deg F`, whose projective roots are the images
/// `(A(β):B(β))` of the roots `β` of `F`, with multiplicity.
pub fn resultant_with_parameters(
    f: &IntBinaryForm,
    a: &IntBinaryForm,
    b: &IntBinaryForm,
) -> Result<IntBinaryForm> {
    if f.is_zero() {
        return Err(Error::InvalidParameter("zero form".into()));
    }
    if a.degree() != b.degree() {
        return Err(Error::InvalidParameter(
            "parametric resultant needs deg A = deg B".into(),
        ));
    }
    let at_inf = f.infinity_multiplicity();
    let finite = f.dehomogenize(); // ascending, exact degree deg F - at_inf
    let m = finite.degree().expect("nonzero form");
    let da = a.dehomogenize();
    let db = b.dehomogenize();
    let d = a.degree();
    let coeff = |p: &IntPolynomial, i: usize| p.coeffs().get(i).cloned().unwrap_or_default();
    let lead_a = coeff(&da, d);
    let lead_b = coeff(&db, d);
    if lead_a.is_zero() && lead_b.is_zero() {
        // A and B share the root at infinity; no image is defined there.
        return Err(Error::DegenerateResultant);
    }

    let mut body = if m == 0 {
        IntBinaryForm::from_i64(&[1])
    } else {
        // Avoid the (at most one) parameter where A - tB drops degree.
        let bad = if lead_b.is_zero() {
            None
        } else {
            let (q, r) = lead_a.div_rem(&lead_b);
            r.is_zero().then_some(q)
        };
        let t0: i64 = match bad {
            Some(t) if t >= BigInt::zero() && t <= BigInt::from(m) => {
                i64::try_from(&t).expect("small") + 1
            }
            _ => 0,
        };
        let sign_neg = (m * d) % 2 == 1;
        let mut values = Vec::with_capacity(m + 1);
        for s in 0..=m as i64 {
            let t = BigInt::from(t0 + s);
            let g: Vec<BigInt> = (0..=d)
                .map(|i| coeff(&da, i) - &t * coeff(&db, i))
                .collect();
            let r = resultant_small_by_large(&g, finite.coeffs());
            values.push(if sign_neg { -r } else { r });
        }
        let poly = interpolate_consecutive(values, t0);
        // poly(t) with t = X0/X1, homogenized to degree m.
        let mut coeffs = vec![BigInt::zero(); m + 1];
        for (j, c) in poly.into_iter().enumerate() {
            if j > m {
                debug_assert!(c.is_zero());
                continue;
            }
            coeffs[m - j] = c;
        }
        IntBinaryForm::new(coeffs)
    };
    if at_inf > 0 {
        // Each root at ∞ maps to (A(1,0) : B(1,0)).
        let image = IntBinaryForm::new(vec![-b.coeffs()[0].clone(), a.coeffs()[0].clone()]);
        body = &body * &image.pow(at_inf as u32);
    }
    if body.is_zero() {
        return Err(Error::DegenerateResultant);
    }
    Ok(body.primitive_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bf(c: &[i64]) -> IntBinaryForm {
        IntBinaryForm::from_i64(c)
    }

    #[test]
    fn content_examples() {
        let (c, p) = IntPolynomial::from_i64(&[-4, 0, 6]).content_primitive();
        assert_eq!(c, BigInt::from(2));
        assert_eq!(p, IntPolynomial::from_i64(&[-2, 0, 3]));
        let (c, p) = IntPolynomial::from_i64(&[-1, -1, 1]).content_primitive();
        assert_eq!(c, BigInt::one());
        assert_eq!(p, IntPolynomial::from_i64(&[-1, -1, 1]));
        let (c, p) = IntPolynomial::from_i64(&[0, -3]).content_primitive();
        assert_eq!(c, BigInt::from(3));
        assert_eq!(p, IntPolynomial::from_i64(&[0, 1]));
        let (c, p) = IntPolynomial::zero().content_primitive();
        assert!(c.is_zero() && p.is_zero());
    }

    #[test]
    fn content_of_form_uses_first_coefficient_sign() {
        // 6x^2 - 4 as a form: x0-ascending layout [6, 0, -4].
        let (c, p) = bf(&[6, 0, -4]).content_primitive();
        assert_eq!(c, BigInt::from(2));
        assert_eq!(p, bf(&[3, 0, -2]));
        let (c, p) = bf(&[-3, 0]).content_primitive();
        assert_eq!(c, BigInt::from(3));
        assert_eq!(p, bf(&[1, 0]));
    }

    #[test]
    fn resultant_examples() {
        // x0^2 and x1^2
        assert_eq!(
            resultant_binary(&bf(&[1, 0, 0]), &bf(&[0, 0, 1])),
            BigInt::one()
        );
        for c in [-7i64, -1, 0, 3, 12] {
            assert_eq!(
                resultant_binary(&bf(&[1, 0, c]), &bf(&[0, 0, 1])),
                BigInt::one()
            );
        }
        assert!(resultant_binary(&bf(&[0, 1, 0]), &bf(&[0, 1, 0])).is_zero());
        // Res(x - 2, x - 5) = 2 - 5 up to sign convention: linear forms
        // x0 - 2x1 and x0 - 5x1 give det [[1,-2],[1,-5]] = -3.
        assert_eq!(
            resultant_binary(&bf(&[1, -2]), &bf(&[1, -5])),
            BigInt::from(-3)
        );
    }

    #[test]
    fn small_by_large_matches_sylvester() {
        let g = IntPolynomial::from_i64(&[3, -1, 2]); // 2x^2 - x + 3
        let f = IntPolynomial::from_i64(&[5, 0, -2, 7, 1, -4]);
        let direct = {
            let gd: Vec<BigInt> = g.coeffs().iter().rev().cloned().collect();
            let fd: Vec<BigInt> = f.coeffs().iter().rev().cloned().collect();
            det_bareiss(sylvester(&gd, &fd))
        };
        assert_eq!(resultant_small_by_large(g.coeffs(), f.coeffs()), direct);
    }

    #[test]
    fn pushforward_examples() {
        let sq0 = bf(&[1, 0, 0]);
        let sq1 = bf(&[0, 0, 1]);
        // {0, ∞} -> {0, ∞}
        let r = resultant_with_parameters(&bf(&[0, 1, 0]), &sq0, &sq1).unwrap();
        assert_eq!(r, bf(&[0, 1, 0]));
        // ±1 -> 1 twice
        let r = resultant_with_parameters(&bf(&[1, 0, -1]), &sq0, &sq1).unwrap();
        assert_eq!(r, bf(&[1, -2, 1]));
        // golden pair -> {φ^2, (1-φ)^2}: e1 = 3, e2 = 1 by symmetric functions.
        let r = resultant_with_parameters(&bf(&[1, -1, -1]), &sq0, &sq1).unwrap();
        assert_eq!(r, bf(&[1, -3, 1]));
    }

    #[test]
    fn pushforward_degenerate() {
        // A = B = x0*x1 vanish together at the roots of x0*x1.
        let a = bf(&[0, 1, 0]);
        let r = resultant_with_parameters(&bf(&[0, 1, 0]), &a, &a);
        assert!(matches!(r, Err(Error::DegenerateResultant)));
    }

    #[test]
    fn kronecker_agrees_with_schoolbook_on_large_inputs() {
        let a: Vec<BigInt> = (0..60)
            .map(|i| BigInt::from((i * 7919 % 1000) as i64 - 500) << (i % 70))
            .collect();
        let b: Vec<BigInt> = (0..45)
            .map(|i| -BigInt::from((i * 104729 % 997) as i64 - 400) << (i % 33))
            .collect();
        assert_eq!(mul_kronecker(&a, &b), mul_schoolbook(&a, &b));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = IntPolynomial::from_i64(&[4, -3, 0, 5, -1]);
        for t0 in [0i64, 3, -2] {
            let vals: Vec<BigInt> = (0..5).map(|s| p.eval(&BigInt::from(t0 + s))).collect();
            assert_eq!(IntPolynomial::new(interpolate_consecutive(vals, t0)), p);
        }
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let p = IntPolynomial::from_i64(&[1, -2, 0, 3]);
        let q = p.taylor_shift(&BigInt::from(-3));
        for x in -4i64..5 {
            assert_eq!(q.eval(&BigInt::from(x)), p.eval(&BigInt::from(x - 3)));
        }
    }

    fn small_form(max_deg: usize) -> impl Strategy<Value = IntBinaryForm> {
        prop::collection::vec(-9i64..=9, 1..=max_deg + 1)
            .prop_filter("nonzero", |v| v.iter().any(|&c| c != 0))
            .prop_map(|v| IntBinaryForm::from_i64(&v))
    }

    proptest! {
        #[test]
        fn resultant_is_multiplicative(f in small_form(4), g in small_form(3), h in small_form(3)) {
            let gh = &g * &h;
            prop_assert_eq!(
                resultant_binary(&f, &gh),
                resultant_binary(&f, &g) * resultant_binary(&f, &h)
            );
        }

        #[test]
        fn primitive_is_idempotent(v in prop::collection::vec(-50i64..=50, 0..8)) {
            let p = IntPolynomial::from_i64(&v);
            let (_, q) = p.content_primitive();
            let (c2, q2) = q.content_primitive();
            prop_assert_eq!(&q, &q2);
            prop_assert!(p.is_zero() || c2.is_one());
        }

        #[test]
        fn dehomogenize_round_trip(f in small_form(6), extra in 0usize..3) {
            let g = f.shift(0, 0);
            prop_assert_eq!(g.dehomogenize().homogenize(g.degree()), g.clone());
            let padded = f.shift(extra, 0);
            prop_assert_eq!(padded.dehomogenize().homogenize(padded.degree()), padded);
        }

        #[test]
        fn product_content_is_multiplicative(a in small_form(4), b in small_form(4)) {
            // Gauss's lemma.
            let (ca, _) = a.content_primitive();
            let (cb, _) = b.content_primitive();
            let (cab, _) = (&a * &b).content_primitive();
            prop_assert_eq!(cab, ca * cb);
        }
    }
}
