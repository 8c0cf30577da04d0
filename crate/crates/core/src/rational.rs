//! Exact rational scalars and small combinatorial helpers.

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar used for every coefficient in the toolkit.
///
/// Always stored in lowest terms with a positive denominator; the canonical
/// zero is `0/1`.
pub type Rational = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1);
    for i in 0..k {
        // Stays integral at each step: the running product is C(n, i+1) * (i+1)!/(i+1)!.
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `(-1)^k` as a rational sign.
pub fn sign_pow(k: u32) -> Rational {
    if k % 2 == 0 {
        rat(1)
    } else {
        rat(-1)
    }
}
