//! Exact rational scalars used throughout the template calculus.
//!
//! Every slope and breakpoint arising from the template constructions is
//! rational with a small denominator, so exact arithmetic is cheap and
//! removes all tolerance questions from axiom checking and scoring.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::Error;

/// Exact rational scalar.
pub type Rat = BigRational;

/// Integer as a rational.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Reduced fraction `n/d`. Panics if `d == 0`.
pub fn frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

/// Canonical string form: `"p"` for integers, `"p/q"` otherwise (always reduced).
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses the canonical form emitted by [`fmt_rat`]; also accepts `"p/1"`.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let mk_err = || Error::Parse(format!("invalid rational {s:?}"));
    match s.split_once('/') {
        None => {
            let n: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rat::from_integer(n))
        }
        Some((n, d)) => {
            let n: BigInt = n.parse().map_err(|_| mk_err())?;
            let d: BigInt = d.parse().map_err(|_| mk_err())?;
            if d.is_zero() {
                return Err(mk_err());
            }
            Ok(Rat::new(n, d))
        }
    }
}

/// Nearest `f64` to an exact rational (used only at the float boundary).
pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of approximations for extreme magnitudes.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact rational equal to a finite `f64`.
pub fn rat_from_f64(x: f64) -> Result<Rat, Error> {
    Rat::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_round_trip() {
        for r in [rat(0), rat(-7), frac(1, 3), frac(-22, 8), frac(10, 5)] {
            let s = fmt_rat(&r);
            assert_eq!(parse_rat(&s).unwrap(), r);
        }
        assert_eq!(fmt_rat(&frac(-22, 8)), "-11/4");
        assert_eq!(fmt_rat(&frac(10, 5)), "2");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1/2/3").is_err());
    }

    #[test]
    fn f64_round_trip_is_exact() {
        for x in [0.5, -3.25, 0.1, 1e-9] {
            assert_eq!(rat_to_f64(&rat_from_f64(x).unwrap()), x);
        }
    }
}
