//! Exact number types shared by every layer.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn int_rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn is_unit_interval(p: &Rat) -> bool {
    !p.is_negative() && *p <= Rat::one()
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rat {
    Rat::new(Int::one(), Int::one() << k as usize)
}

pub fn max_rat(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn clamp_nat(v: &Int) -> Rat {
    if v.is_negative() {
        Rat::zero()
    } else {
        Rat::from_integer(v.clone())
    }
}

/// Renders `1/2`, `3`, `-7/4`. Parses back through the grammar's `rat` rule.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation for human-facing output only.
pub fn approx(r: &Rat, digits: usize) -> String {
    let neg = r.is_negative();
    let r = r.abs();
    let scale = num_traits::pow(Int::from(10), digits);
    let scaled = (r * Rat::from_integer(scale.clone())).round().to_integer();
    let int_part = &scaled / &scale;
    let frac = &scaled % &scale;
    let sign = if neg && !scaled.is_zero() { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    format!("{sign}{int_part}.{:0>width$}", frac.to_string(), width = digits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        assert_eq!(fmt_rat(&rat(1, 2)), "1/2");
        assert_eq!(fmt_rat(&rat(4, 2)), "2");
        assert_eq!(fmt_rat(&rat(-3, 4)), "-3/4");
        assert_eq!(approx(&rat(2, 3), 4), "0.6667");
        assert_eq!(approx(&rat(-5, 2), 1), "-2.5");
        assert_eq!(approx(&int_rat(3), 0), "3");
    }

    #[test]
    fn powers() {
        assert_eq!(pow2_neg(3), rat(1, 8));
        assert_eq!(clamp_nat(&Int::from(-4)), Rat::zero());
    }
}
