use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use dashu_int::ops::{DivRem, Gcd};
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

/// An arbitrary-precision rational count, always kept in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactCount(RBig);

impl Default for ExactCount {
    fn default() -> Self {
        ExactCount::zero()
    }
}

impl ExactCount {
    pub fn zero() -> Self {
        ExactCount(RBig::ZERO)
    }

    pub fn one() -> Self {
        ExactCount(RBig::ONE)
    }

    pub fn from_integer(v: i64) -> Self {
        ExactCount(RBig::from(v))
    }

    /// `num / den`; `None` when `den == 0`.
    pub fn new(num: i64, den: i64) -> Option<Self> {
        (den != 0).then(|| ExactCount(RBig::from_parts_signed(num.into(), den.into())))
    }

    pub fn as_ratio(&self) -> &RBig {
        &self.0
    }

    pub fn numer(&self) -> &IBig {
        self.0.numerator()
    }

    pub fn denom(&self) -> &UBig {
        self.0.denominator()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.numerator() > &IBig::ZERO
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_int()
    }

    /// The value divided by a positive integer.
    pub fn div_int(&self, by: usize) -> Self {
        assert!(by > 0, "division by zero");
        ExactCount(&self.0 / UBig::from(by))
    }

    /// Multiplied by a small integer (fault injection and tests).
    pub fn mul_int(&self, by: i64) -> Self {
        ExactCount(&self.0 * IBig::from(by))
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Integer value when the denominator is 1 and it fits in a `u64`.
    pub fn to_u64(&self) -> Option<u64> {
        if self.0.is_int() {
            u64::try_from(self.0.numerator()).ok()
        } else {
            None
        }
    }

    /// Always `num/den`, even for integers.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.0.numerator(), self.0.denominator())
    }
}

impl From<RBig> for ExactCount {
    fn from(r: RBig) -> Self {
        ExactCount(r)
    }
}

impl From<u64> for ExactCount {
    fn from(v: u64) -> Self {
        ExactCount(RBig::from(v))
    }
}

impl AddAssign<&ExactCount> for ExactCount {
    fn add_assign(&mut self, rhs: &ExactCount) {
        self.0 += &rhs.0;
    }
}

impl Add for &ExactCount {
    type Output = ExactCount;

    fn add(self, rhs: &ExactCount) -> ExactCount {
        ExactCount(&self.0 + &rhs.0)
    }
}

impl<'a> std::iter::Sum<&'a ExactCount> for ExactCount {
    fn sum<I: Iterator<Item = &'a ExactCount>>(iter: I) -> Self {
        let mut acc = ExactCount::zero();
        for v in iter {
            acc += v;
        }
        acc
    }
}

impl fmt::Display for ExactCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_int() {
            write!(f, "{}", self.0.numerator())
        } else {
            write!(f, "{}/{}", self.0.numerator(), self.0.denominator())
        }
    }
}

impl fmt::Debug for ExactCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_fraction_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational {0:?}")]
pub struct ParseExactError(pub String);

impl FromStr for ExactCount {
    type Err = ParseExactError;

    /// Accepts `a`, `a/b` and finite decimals such as `2.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let err = || ParseExactError(s.to_string());
        let int = |v: &str| -> Result<IBig, ParseExactError> {
            let v = v.trim();
            let digits = v.strip_prefix(['-', '+']).unwrap_or(v);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            v.trim_start_matches('+').parse().map_err(|_| err())
        };
        if let Some((n, d)) = t.split_once('/') {
            let (n, d) = (int(n)?, int(d)?);
            if d == IBig::ZERO {
                return Err(err());
            }
            return Ok(ExactCount(RBig::from_parts_signed(n, d)));
        }
        if let Some((whole, frac)) = t.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let digits = int(&format!("{whole}{frac}"))?;
            let scale = UBig::from(10u8).pow(frac.len());
            return Ok(ExactCount(RBig::from_parts(digits, scale)));
        }
        Ok(ExactCount(RBig::from(int(t)?)))
    }
}

/// Running total of many rationals whose denominators share most factors.
///
/// The total is kept over a common denominator that only grows by the missing
/// factors of each term, so an addition usually costs one division instead of
/// a gcd against the whole total. It is reduced when read.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExactSum {
    num: IBig,
    den: UBig,
}

impl ExactSum {
    pub fn new() -> Self {
        ExactSum {
            num: IBig::ZERO,
            den: UBig::ONE,
        }
    }

    pub fn add(&mut self, v: &ExactCount) {
        let (a, b) = (v.numer(), v.denom());
        let (q, r) = (&self.den).div_rem(b);
        if r.is_zero() {
            self.num += a * IBig::from(q);
            return;
        }
        let g = (&self.den).gcd(b);
        let grow = b / &g;
        let scale = &self.den / &g;
        self.num = &self.num * IBig::from(grow.clone()) + a * IBig::from(scale);
        self.den *= grow;
    }

    pub fn value(&self) -> ExactCount {
        ExactCount(RBig::from_parts(self.num.clone(), self.den.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirds_sum_to_one() {
        let third = ExactCount::one().div_int(3);
        let total: ExactCount = [&third, &third, &third].into_iter().sum();
        assert_eq!(total, ExactCount::one());
        assert!(total.is_integer());
    }

    #[test]
    fn reduced_form() {
        let v = ExactCount::new(6, -4).unwrap();
        assert_eq!(v.to_fraction_string(), "-3/2");
        assert!(ExactCount::new(1, 0).is_none());
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3".parse::<ExactCount>().unwrap(), ExactCount::from(3u64));
        assert_eq!(
            "6/4".parse::<ExactCount>().unwrap(),
            ExactCount::new(3, 2).unwrap()
        );
        assert_eq!(
            "2.5".parse::<ExactCount>().unwrap(),
            ExactCount::new(5, 2).unwrap()
        );
        assert!("1/0".parse::<ExactCount>().is_err());
        assert!("abc".parse::<ExactCount>().is_err());
        assert!("1/x".parse::<ExactCount>().is_err());
        assert_eq!(
            "-1.25".parse::<ExactCount>().unwrap(),
            ExactCount::new(-5, 4).unwrap()
        );
    }

    #[test]
    fn running_sum_matches_reduced_sum() {
        let terms: Vec<ExactCount> = [(1, 2), (1, 3), (5, 12), (7, 9), (1, 2), (3, 1), (-1, 6)]
            .iter()
            .map(|&(a, b)| ExactCount::new(a, b).unwrap())
            .collect();
        let mut acc = ExactSum::new();
        assert_eq!(acc.value(), ExactCount::zero());
        for t in &terms {
            acc.add(t);
        }
        assert_eq!(acc.value(), terms.iter().sum::<ExactCount>());
    }

    #[test]
    fn numeric_order_and_display() {
        let half = ExactCount::new(1, 2).unwrap();
        let two_thirds = ExactCount::new(2, 3).unwrap();
        assert!(half < two_thirds);
        assert!(ExactCount::from_integer(3) > ExactCount::new(5, 2).unwrap());
        assert!(ExactCount::new(-7, 2).unwrap() < ExactCount::zero());
        assert_eq!(two_thirds.to_string(), "2/3");
        assert_eq!(ExactCount::from_integer(4).to_string(), "4");
        assert_eq!(ExactCount::from_integer(4).to_fraction_string(), "4/1");
        assert_eq!(ExactCount::from(7u64).to_u64(), Some(7));
        assert_eq!(half.to_u64(), None);
        assert_eq!(half.to_f64(), 0.5);
    }
}
