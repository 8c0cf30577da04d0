//! Sparse polynomials in the model parameters over exact rationals.
//!
//! Symbols cover the potential strengths `g1..gN`, the two centrifugal
//! constants `l1`, `l2`, and one formal symbol `H` reserved for bracket
//! coefficients that depend on the Hamiltonian value itself.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::rational::Rational;

/// A symbol of the coefficient ring.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ParamSym {
    /// Potential strength `g<n>`.
    Gamma(u8),
    /// Centrifugal constant `l<i>`, `i` in `{1, 2}`.
    Lambda(u8),
    /// Formal Hamiltonian symbol.
    FormalH,
}

impl ParamSym {
    pub fn gamma(n: usize) -> Self {
        ParamSym::Gamma(u8::try_from(n).expect("gamma index out of range"))
    }
}

impl fmt::Display for ParamSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSym::Gamma(n) => write!(f, "g{n}"),
            ParamSym::Lambda(n) => write!(f, "l{n}"),
            ParamSym::FormalH => write!(f, "H"),
        }
    }
}

/// Errors raised by numeric evaluation of polynomials.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("parameter {0} is not bound")]
    UnboundParameter(ParamSym),
    #[error("{var} lies within the singularity threshold of zero under a negative exponent")]
    SingularEvaluation { var: &'static str },
}

/// Product of parameter symbols with positive integer exponents.
///
/// The unit monomial is the empty map; zero exponents are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ParamMonomial {
    exps: BTreeMap<ParamSym, u32>,
}

impl ParamMonomial {
    pub fn unit() -> Self {
        Self::default()
    }

    pub fn symbol(sym: ParamSym) -> Self {
        Self::power(sym, 1)
    }

    pub fn power(sym: ParamSym, exp: u32) -> Self {
        let mut exps = BTreeMap::new();
        if exp > 0 {
            exps.insert(sym, exp);
        }
        Self { exps }
    }

    pub fn from_pairs(pairs: &[(ParamSym, u32)]) -> Self {
        let mut m = Self::unit();
        for &(sym, exp) in pairs {
            if exp > 0 {
                *m.exps.entry(sym).or_insert(0) += exp;
            }
        }
        m
    }

    pub fn is_unit(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.values().sum()
    }

    pub fn exponent(&self, sym: ParamSym) -> u32 {
        self.exps.get(&sym).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParamSym, &u32)> {
        self.exps.iter()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut exps = self.exps.clone();
        for (sym, e) in &rhs.exps {
            *exps.entry(*sym).or_insert(0) += e;
        }
        Self { exps }
    }

    /// Componentwise division; `None` when `rhs` does not divide `self`.
    pub fn try_div(&self, rhs: &Self) -> Option<Self> {
        let mut exps = self.exps.clone();
        for (sym, e) in &rhs.exps {
            let cur = exps.get_mut(sym)?;
            if *cur < *e {
                return None;
            }
            *cur -= e;
            if *cur == 0 {
                exps.remove(sym);
            }
        }
        Some(Self { exps })
    }
}

impl Ord for ParamMonomial {
    /// Graded ordering: total degree first, then the monomial with the higher
    /// exponent at the earliest symbol is the larger one.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.exps.iter().peekable();
        let mut b = other.exps.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => {
                        if ea != eb {
                            return ea.cmp(eb);
                        }
                        a.next();
                        b.next();
                    }
                },
            }
        }
    }
}

impl PartialOrd for ParamMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ParamMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (sym, exp) in &self.exps {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if *exp == 1 {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^{exp}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial in the parameter symbols over exact rationals.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ParamPolynomial {
    terms: BTreeMap<ParamMonomial, Rational>,
}

impl ParamPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(ParamMonomial::unit(), c)
    }

    pub fn symbol(sym: ParamSym) -> Self {
        Self::monomial(ParamMonomial::symbol(sym), Rational::one())
    }

    pub fn monomial(m: ParamMonomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(ParamMonomial::degree).max().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ParamMonomial, &Rational)> {
        self.terms.iter()
    }

    /// Terms in descending monomial order, the canonical print order.
    pub fn iter_desc(&self) -> impl Iterator<Item = (&ParamMonomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn coeff(&self, m: &ParamMonomial) -> Option<&Rational> {
        self.terms.get(m)
    }

    pub fn add_term(&mut self, m: ParamMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, r)| (m.clone(), r * c)).collect(),
        }
    }

    /// Multiply by a single symbol power.
    pub fn mul_monomial(&self, m: &ParamMonomial) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, r)| (k.mul(m), r.clone()))
                .collect(),
        }
    }

    /// Exact substitution of a symbol by a rational constant.
    pub fn substitute_rational(&self, sym: ParamSym, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(sym);
            if e == 0 {
                out.add_term(m.clone(), c.clone());
            } else {
                let stripped = m
                    .try_div(&ParamMonomial::power(sym, e))
                    .expect("exponent bookkeeping");
                let mut factor = c.clone();
                for _ in 0..e {
                    factor *= value;
                }
                out.add_term(stripped, factor);
            }
        }
        out
    }

    /// Numeric evaluation under a symbol binding.
    pub fn eval(&self, params: &BTreeMap<ParamSym, Complex64>) -> Result<Complex64, EvalError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = Complex64::new(c.to_f64().expect("coefficient out of f64 range"), 0.0);
            for (sym, exp) in m.iter() {
                let z = params
                    .get(sym)
                    .copied()
                    .ok_or(EvalError::UnboundParameter(*sym))?;
                v *= z.powi(*exp as i32);
            }
            total += v;
        }
        Ok(total)
    }
}

impl fmt::Display for ParamPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.iter_desc() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if !m.is_unit() {
                write!(f, " * {m}")?;
            }
        }
        Ok(())
    }
}

impl Add for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn add(self, rhs: &ParamPolynomial) -> ParamPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn sub(self, rhs: &ParamPolynomial) -> ParamPolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn neg(self) -> ParamPolynomial {
        ParamPolynomial {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Mul for &ParamPolynomial {
    type Output = ParamPolynomial;
    fn mul(self, rhs: &ParamPolynomial) -> ParamPolynomial {
        let mut out = ParamPolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn g(n: u8) -> ParamSym {
        ParamSym::Gamma(n)
    }

    #[test]
    fn monomial_ordering_is_graded_then_first_higher_exponent() {
        let g1g3 = ParamMonomial::from_pairs(&[(g(1), 1), (g(3), 1)]);
        let g2sq = ParamMonomial::from_pairs(&[(g(2), 2)]);
        let g1 = ParamMonomial::symbol(g(1));
        assert!(g1g3 > g2sq);
        assert!(g2sq > g1);
        let g4h = ParamMonomial::from_pairs(&[(g(4), 1), (ParamSym::FormalH, 1)]);
        let g3sq = ParamMonomial::from_pairs(&[(g(3), 2)]);
        assert!(g3sq > g4h);
    }

    #[test]
    fn display_canonical() {
        let mut p = ParamPolynomial::zero();
        p.add_term(ParamMonomial::from_pairs(&[(g(2), 2)]), rat(-1));
        p.add_term(
            ParamMonomial::from_pairs(&[(g(1), 1), (g(3), 1)]),
            rat(2),
        );
        p.add_term(
            ParamMonomial::from_pairs(&[(g(4), 1), (ParamSym::FormalH, 1)]),
            rat(2),
        );
        assert_eq!(p.to_string(), "2 * g1 g3 + -1 * g2^2 + 2 * g4 H");
        assert_eq!(ParamPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn substitution_drops_bound_symbol() {
        let p = &(&ParamPolynomial::symbol(g(1)) * &ParamPolynomial::symbol(g(1)))
            + &ParamPolynomial::symbol(g(2));
        let q = p.substitute_rational(g(1), &rat(0));
        assert_eq!(q, ParamPolynomial::symbol(g(2)));
        let r = p.substitute_rational(g(1), &rat(3));
        let expected = &ParamPolynomial::constant(rat(9)) + &ParamPolynomial::symbol(g(2));
        assert_eq!(r, expected);
    }

    #[test]
    fn eval_requires_bindings() {
        let p = ParamPolynomial::symbol(g(1));
        let err = p.eval(&BTreeMap::new()).unwrap_err();
        assert_eq!(err, EvalError::UnboundParameter(g(1)));
    }
}
