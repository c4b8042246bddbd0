//! Exact rational helpers on top of `num_rational::BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// `num / den` as a rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Parses `a`, `-a`, `a/b` or `-a/b` with decimal digits only.
///
/// On failure returns the zero-based character offset of the problem and a
/// message.
pub fn parse_rational(text: &str) -> Result<Rational, (usize, String)> {
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err((0, "empty rational literal".into()));
    }
    let mut pos = 0;
    let negative = bytes[0] == b'-';
    if negative {
        pos = 1;
    }
    let num_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos == num_start {
        return Err((pos, format!("expected digits in rational literal {text:?}")));
    }
    let num: BigInt = text[num_start..pos].parse().expect("digits");
    let den: BigInt = if pos == bytes.len() {
        BigInt::one()
    } else if bytes[pos] == b'/' {
        pos += 1;
        let den_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == den_start {
            return Err((pos, format!("expected denominator digits in {text:?}")));
        }
        if pos != bytes.len() {
            return Err((pos, format!("unexpected character in {text:?}")));
        }
        let d: BigInt = text[den_start..pos].parse().expect("digits");
        if d.is_zero() {
            return Err((den_start, "zero denominator".into()));
        }
        d
    } else {
        return Err((pos, format!("unexpected character in {text:?}")));
    };
    let num = if negative { -num } else { num };
    Ok(Rational::new(num, den))
}

/// Decimal rendering with `digits` places after the point, rounded half away
/// from zero. Exact: no floating point involved.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = value.abs() * Rational::from_integer(scale.clone());
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if value.is_negative() && !rounded.is_zero() {
        "-"
    } else {
        ""
    };
    if digits == 0 {
        return format!("{sign}{whole}");
    }
    format!(
        "{sign}{whole}.{:0>width$}",
        frac.to_string(),
        width = digits
    )
}

/// Lossy conversion for reporting only.
pub fn approx_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// `Some(v)` if the rational is an integer that fits in `usize`.
pub fn as_usize(value: &Rational) -> Option<usize> {
    if value.is_integer() {
        value.to_integer().to_usize()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rational("10/4").unwrap(), rat(5, 2));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("a/2").is_err());
        assert!(parse_rational("2/").is_err());
        assert_eq!(parse_rational("1/2x").unwrap_err().0, 3);
    }

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(rat(6, 4).to_string(), "3/2");
        assert_eq!(rat(4, 2).to_string(), "2");
        assert_eq!(rat(3, -9).to_string(), "-1/3");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&rat(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&rat(2, 3), 4), "0.6667");
        assert_eq!(to_decimal(&rat(-5, 4), 1), "-1.3");
        assert_eq!(to_decimal(&int(7), 0), "7");
        assert_eq!(to_decimal(&rat(17, 8), 3), "2.125");
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [rat(1, 4), rat(1, 6), int(2)];
        assert_eq!(common_denominator(&v), BigInt::from(12));
    }
}
