//! Parsing of map specs, rationals, points, polynomials and ranges.

use std::collections::BTreeMap;

use dynpair::{ProjPointQ, RationalMap};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError(msg.into()))
}

/// `p/q`, `p`, or a decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseError> {
    let s = s.trim();
    let bad = || ParseError(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            t => t.parse().map_err(|_| bad())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = BigRational::new(frac_part, scale);
        let int_abs = BigRational::from_integer(num_traits::Signed::abs(&int_part));
        let v = int_abs + mag;
        return Ok(if negative { -v } else { v });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// A rational point `p/q`, an integer, or `inf`.
pub fn parse_point(s: &str) -> Result<ProjPointQ, ParseError> {
    match s.trim() {
        "inf" | "infinity" | "1/0" => Ok(ProjPointQ::infinity()),
        t => Ok(ProjPointQ::from_rational(&parse_rational(t)?)),
    }
}

/// `[c0,c1,...]`, ascending, with rational entries.
pub fn parse_coeff_list(s: &str) -> Result<Vec<BigRational>, ParseError> {
    let t = s.trim();
    let inner = t
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| ParseError(format!("expected a bracketed coefficient list, got {t:?}")))?;
    if inner.trim().is_empty() {
        return err("empty coefficient list");
    }
    inner.split(',').map(parse_rational).collect()
}

/// `key=value` pairs separated by whitespace. Brackets may contain spaces.
fn key_values(s: &str) -> Result<BTreeMap<String, String>, ParseError> {
    let mut out = BTreeMap::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                tokens.push(std::mem::take(&mut cur));
            }
        } else {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| ParseError(format!("expected key=value, got {tok:?}")))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("repeated key {k:?}"));
        }
    }
    Ok(out)
}

fn take(kv: &mut BTreeMap<String, String>, key: &str, family: &str) -> Result<String, ParseError> {
    kv.remove(key)
        .ok_or_else(|| ParseError(format!("family {family} needs {key}=...")))
}

fn positive_int(s: &str, key: &str) -> Result<u64, ParseError> {
    match s.parse::<u64>() {
        Ok(v) if v > 0 => Ok(v),
        _ => err(format!("{key} must be a positive integer, got {s:?}")),
    }
}

/// A map spec: `family:squaring`, `family:coc alpha=1`, `family:quad c=-1`,
/// `family:lattes a=2 b=3`, or `num=[...] den=[...]` with ascending rational
/// coefficients.
pub fn parse_map(spec: &str) -> Result<RationalMap, ParseError> {
    let spec = spec.trim();
    let lib = |e: dynpair::Error| ParseError(format!("invalid map {spec:?}: {e}"));
    if let Some(rest) = spec.strip_prefix("family:") {
        let (name, params) = match rest.split_once(char::is_whitespace) {
            Some((n, p)) => (n, p),
            None => (rest, ""),
        };
        let mut kv = key_values(params)?;
        let map = match name {
            "squaring" | "sigma" => RationalMap::squaring(),
            "coc" => RationalMap::coc(&parse_rational(&take(&mut kv, "alpha", name)?)?),
            "quad" => RationalMap::quad(&parse_rational(&take(&mut kv, "c", name)?)?),
            "lattes" => {
                let a = positive_int(&take(&mut kv, "a", name)?, "a")?;
                let b = positive_int(&take(&mut kv, "b", name)?, "b")?;
                RationalMap::lattes(a, b).map_err(lib)?
            }
            other => {
                return err(format!(
                    "unknown family {other:?} (squaring, coc, quad, lattes)"
                ))
            }
        };
        if let Some(k) = kv.keys().next() {
            return err(format!("unexpected parameter {k:?} for family {name}"));
        }
        return Ok(map);
    }
    let mut kv = key_values(spec)?;
    let num = parse_coeff_list(&take(&mut kv, "num", "num/den")?)?;
    let den = match kv.remove("den") {
        Some(d) => parse_coeff_list(&d)?,
        None => vec![BigRational::one()],
    };
    if let Some(k) = kv.keys().next() {
        return err(format!("unexpected key {k:?} in map spec"));
    }
    RationalMap::from_rational(&num, &den).map_err(lib)
}

/// `a..b` (inclusive) or a single `n`.
pub fn parse_range(s: &str) -> Result<(u32, u32), ParseError> {
    let bad = || ParseError(format!("expected n or a..b with 1 <= a <= b, got {s:?}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<u32>().map_err(|_| bad())?,
            b.trim()
                .trim_start_matches('=')
                .parse::<u32>()
                .map_err(|_| bad())?,
        ),
        None => {
            let n = s.trim().parse::<u32>().map_err(|_| bad())?;
            (n, n)
        }
    };
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// How `k` follows `n` along a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KRule {
    EqualsN,
    Fixed(u32),
}

pub fn parse_k_rule(s: &str) -> Result<KRule, ParseError> {
    match s.trim() {
        "n" => Ok(KRule::EqualsN),
        t => t
            .parse::<u32>()
            .map(KRule::Fixed)
            .map_err(|_| ParseError(format!("k must be \"n\" or an integer, got {t:?}"))),
    }
}

impl KRule {
    pub fn schedule(self, (lo, hi): (u32, u32)) -> Vec<(u32, u32)> {
        (lo..=hi)
            .map(|n| match self {
                KRule::EqualsN => (n, n),
                KRule::Fixed(k) => (n, k),
            })
            .collect()
    }
}
