//! Exact rational scalars and the `p/q` text form used in files and reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

/// Shorthand constructor used pervasively in tests and builders.
///
/// Panics on a zero denominator, like `BigRational::new`.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Canonical text form: lowest terms, sign on the numerator, no `/1` suffix.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p` or `p/q` with optional leading minus. Decimal points, exponents
/// and whitespace are rejected; the denominator must be positive after
/// normalisation (handled by `BigRational::new`).
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let bad = || format!("not a rational: {s:?} (expected \"p\" or \"p/q\")");
    if s.is_empty() || s.contains(|c: char| c.is_whitespace()) {
        return Err(bad());
    }
    let (numer, denom) = match s.split_once('/') {
        None => (s, "1"),
        Some((n, d)) => (n, d),
    };
    let n: BigInt = numer.parse().map_err(|_| bad())?;
    let d: BigInt = denom.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

pub fn is_strictly_positive(r: &Rational) -> bool {
    r.is_positive()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_without_unit_denominator() {
        assert_eq!(format_rational(&rat(7, 2)), "7/2");
        assert_eq!(format_rational(&rat(4, 2)), "2");
        assert_eq!(format_rational(&rat(-3, 4)), "-3/4");
        assert_eq!(format_rational(&rat(3, -4)), "-3/4");
        assert_eq!(format_rational(&int(0)), "0");
    }

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("7/2").unwrap(), rat(7, 2));
        assert_eq!(parse_rational("-7/2").unwrap(), rat(-7, 2));
        assert_eq!(parse_rational("5").unwrap(), int(5));
        assert_eq!(parse_rational("4/6").unwrap(), rat(2, 3));
    }

    #[test]
    fn rejects_junk() {
        for s in ["", "1.5", "1/0", "1e3", " 1", "1 /2", "a/b", "1/2/3"] {
            assert!(parse_rational(s).is_err(), "accepted {s:?}");
        }
    }

    #[test]
    fn round_trips_canonical_text() {
        for s in ["7/2", "-7/2", "5", "0", "-1", "1/64"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(format_rational(&r), s);
        }
    }
}
