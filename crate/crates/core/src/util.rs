//! Small numeric helpers shared across modules.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

/// Natural log of `|n|`, accurate to double precision for any size.
/// Returns `-inf` for zero.
pub fn log_abs(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().expect("finite");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `n` as `f64`, saturating to ±inf beyond the double range.
pub fn bigint_to_f64(n: &BigInt) -> f64 {
    n.to_f64().unwrap_or(if n.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    })
}

/// Splits `x` into `(mantissa, exponent)` with `x = mantissa * 2^exponent`
/// exactly and `|mantissa| < 2^53`.
pub fn decompose_f64(x: f64) -> (i64, i64) {
    if x == 0.0 {
        return (0, 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), exp - 1075)
    };
    let tz = m.trailing_zeros() as i64;
    (sign * (m >> tz), e + tz)
}

/// `x * 2^e` without intermediate overflow or underflow.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

/// `n = m * 2^e` with `m` a double carrying the top 60 bits of `n`.
pub fn split_bigint(n: &BigInt) -> (f64, i64) {
    let bits = n.bits();
    if bits <= 60 {
        return (n.to_f64().expect("small"), 0);
    }
    let shift = bits - 60;
    ((n >> shift).to_f64().expect("60 bits"), shift as i64)
}

pub(crate) fn serialize_bigints<S: serde::Serializer>(
    v: &[BigInt],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|n| n.to_string()))
}

pub(crate) fn serialize_opt_bigint<S: serde::Serializer>(
    v: &Option<BigInt>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(n) => s.serialize_some(&n.to_string()),
        None => s.serialize_none(),
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_abs_of_huge_integer() {
        let n = BigInt::from(3) << 5000u32;
        let expected = 3f64.ln() + 5000.0 * std::f64::consts::LN_2;
        assert!((log_abs(&n) - expected).abs() < 1e-12 * expected);
        assert!((log_abs(&BigInt::from(-7)) - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn decompose_round_trips() {
        for x in [1.0, -0.75, 3.5e-300, 1e300, 5e-324, 0.1] {
            let (m, e) = decompose_f64(x);
            let e = e as i32;
            assert_eq!(m as f64 * 2f64.powi(e / 2) * 2f64.powi(e - e / 2), x, "{x}");
        }
    }

    #[test]
    fn ldexp_spans_exponent_range() {
        assert_eq!(ldexp(1.5, 2000), f64::INFINITY);
        assert_eq!(ldexp(3.0, -1), 1.5);
        assert_eq!(ldexp(ldexp(1.0, -1060), 1060), 1.0);
        assert_eq!(ldexp(1.0, 1023), 2f64.powi(1023));
        let (m, e) = split_bigint(&(BigInt::from(5) << 300u32));
        assert_eq!(ldexp(m, e - 300), 5.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut k = KahanSum::default();
        k.add(1e16);
        for _ in 0..1000 {
            k.add(1.0);
        }
        k.add(-1e16);
        assert_eq!(k.value(), 1000.0);
    }
}
