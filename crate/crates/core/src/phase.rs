//! Sparse Laurent polynomials on the four canonical variables
//! `(q1, q2, p1, p2)` with coefficients in the parameter ring, the canonical
//! Poisson bracket, and complex evaluation.
//!
//! Exponents are signed so that centrifugal `l/q^2` terms are first-class
//! citizens. All values are immutable after construction and every operation
//! is a pure function.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::param::{EvalError, ParamPolynomial, ParamSym};
use crate::rational::{rat, Rational};

/// Coordinates closer to zero than this are treated as singular when they
/// appear under a negative exponent.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// One of the four canonical variables.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PhaseVar {
    Q1,
    Q2,
    P1,
    P2,
}

impl PhaseVar {
    pub const ALL: [PhaseVar; 4] = [PhaseVar::Q1, PhaseVar::Q2, PhaseVar::P1, PhaseVar::P2];

    pub fn index(self) -> usize {
        match self {
            PhaseVar::Q1 => 0,
            PhaseVar::Q2 => 1,
            PhaseVar::P1 => 2,
            PhaseVar::P2 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhaseVar::Q1 => "q1",
            PhaseVar::Q2 => "q2",
            PhaseVar::P1 => "p1",
            PhaseVar::P2 => "p2",
        }
    }
}

/// Signed exponent vector over `(q1, q2, p1, p2)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PhaseMonomial {
    pub exps: [i32; 4],
}

impl PhaseMonomial {
    pub fn unit() -> Self {
        Self { exps: [0; 4] }
    }

    pub fn new(exps: [i32; 4]) -> Self {
        Self { exps }
    }

    pub fn var(v: PhaseVar) -> Self {
        let mut exps = [0; 4];
        exps[v.index()] = 1;
        Self { exps }
    }

    pub fn is_unit(&self) -> bool {
        self.exps == [0; 4]
    }

    /// Total degree; may be negative for Laurent monomials.
    pub fn degree(&self) -> i64 {
        self.exps.iter().map(|&e| e as i64).sum()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut exps = [0; 4];
        for (out, (a, b)) in exps.iter_mut().zip(self.exps.iter().zip(rhs.exps)) {
            *out = a.checked_add(b).expect("phase exponent overflow");
        }
        Self { exps }
    }

    /// Exchange the two particle labels: `q1 <-> q2`, `p1 <-> p2`.
    pub fn swap_particles(&self) -> Self {
        let [a, b, c, d] = self.exps;
        Self { exps: [b, a, d, c] }
    }
}

impl Ord for PhaseMonomial {
    /// Graded lexicographic order with variable priority `(q1, q2, p1, p2)`.
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        for i in 0..4 {
            match self.exps[i].cmp(&other.exps[i]) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for PhaseMonomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PhaseMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in PhaseVar::ALL {
            let e = self.exps[v.index()];
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{}", v.name())?;
            } else {
                write!(f, "{}^{}", v.name(), e)?;
            }
        }
        Ok(())
    }
}

/// Sparse Laurent polynomial on phase space with parameter-ring coefficients.
///
/// Zero coefficients are never stored; equality is term-map equality.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PhasePolynomial {
    terms: BTreeMap<PhaseMonomial, ParamPolynomial>,
}

fn add_term(terms: &mut BTreeMap<PhaseMonomial, ParamPolynomial>, m: PhaseMonomial, c: ParamPolynomial) {
    if c.is_zero() {
        return;
    }
    match terms.entry(m) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get() + &c;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

impl PhasePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant_rational(rat(1))
    }

    pub fn constant_rational(c: Rational) -> Self {
        Self::monomial(PhaseMonomial::unit(), ParamPolynomial::constant(c))
    }

    pub fn constant(c: ParamPolynomial) -> Self {
        Self::monomial(PhaseMonomial::unit(), c)
    }

    pub fn var(v: PhaseVar) -> Self {
        Self::monomial(PhaseMonomial::var(v), ParamPolynomial::one())
    }

    pub fn monomial(m: PhaseMonomial, c: ParamPolynomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    /// True iff the pruned term map is empty.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PhaseMonomial, &ParamPolynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &PhaseMonomial) -> Option<&ParamPolynomial> {
        self.terms.get(m)
    }

    pub fn support(&self) -> impl Iterator<Item = &PhaseMonomial> {
        self.terms.keys()
    }

    pub fn add_term(&mut self, m: PhaseMonomial, c: ParamPolynomial) {
        add_term(&mut self.terms, m, c);
    }

    pub fn scale_rational(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, p)| (*m, p.scale(c)))
                .collect(),
        }
    }

    pub fn scale_param(&self, c: &ParamPolynomial) -> Self {
        let mut out = Self::zero();
        for (m, p) in &self.terms {
            out.add_term(*m, p * c);
        }
        out
    }

    /// Shift every exponent vector by `m`.
    pub fn mul_monomial(&self, m: &PhaseMonomial) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(k, p)| (k.mul(m), p.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Formal Laurent derivative: each exponent `e` maps to `e - 1` with
    /// multiplier `e`.
    pub fn partial(&self, var: PhaseVar) -> Self {
        let i = var.index();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exps[i];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps;
            exps[i] = e.checked_sub(1).expect("phase exponent overflow");
            out.add_term(PhaseMonomial::new(exps), c.scale(&rat(e as i64)));
        }
        out
    }

    /// Exchange the two particle labels in the phase variables.
    pub fn swap_particles(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(m.swap_particles(), c.clone());
        }
        out
    }

    /// Exact substitution of a parameter symbol by a rational constant.
    pub fn substitute_param_rational(&self, sym: ParamSym, value: &Rational) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            out.add_term(*m, c.substitute_rational(sym, value));
        }
        out
    }

    /// Numeric evaluation at a complex phase-space point under a parameter
    /// binding.
    pub fn eval(
        &self,
        point: &[Complex64; 4],
        params: &BTreeMap<ParamSym, Complex64>,
    ) -> Result<Complex64, EvalError> {
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.eval(params)?;
            for (var, (&e, &z)) in PhaseVar::ALL.iter().zip(m.exps.iter().zip(point)) {
                if e == 0 {
                    continue;
                }
                if e < 0 && z.norm() < SINGULARITY_THRESHOLD {
                    return Err(EvalError::SingularEvaluation { var: var.name() });
                }
                v *= z.powi(e);
            }
            total += v;
        }
        Ok(total)
    }

    /// Resolve all parameter coefficients to complex numbers once, for fast
    /// repeated evaluation.
    pub fn compile(
        &self,
        params: &BTreeMap<ParamSym, Complex64>,
    ) -> Result<CompiledPoly, EvalError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            terms.push((m.exps, c.eval(params)?));
        }
        Ok(CompiledPoly { terms })
    }

    /// Highest total degree over the support, zero for the zero polynomial.
    pub fn max_degree(&self) -> i64 {
        self.terms.keys().map(PhaseMonomial::degree).max().unwrap_or(0)
    }
}

impl fmt::Display for PhasePolynomial {
    /// Canonical serialization: terms sorted by descending graded-lex order
    /// of the phase monomial, then descending parameter-monomial order, each
    /// printed as `coeff [* params] [* vars]` with unit exponents elided.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            for (pm, r) in c.iter_desc() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "{r}")?;
                if !pm.is_unit() {
                    write!(f, " * {pm}")?;
                }
                if !m.is_unit() {
                    write!(f, " * {m}")?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn add(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn sub(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c);
        }
        out
    }
}

impl Neg for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn neg(self) -> PhasePolynomial {
        PhasePolynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Mul for &PhasePolynomial {
    type Output = PhasePolynomial;
    fn mul(self, rhs: &PhasePolynomial) -> PhasePolynomial {
        let mut out = PhasePolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

/// Canonical Poisson bracket `{f, g}` on the two degrees of freedom.
pub fn poisson_bracket(f: &PhasePolynomial, g: &PhasePolynomial) -> PhasePolynomial {
    let mut acc = PhasePolynomial::zero();
    for (q, p) in [(PhaseVar::Q1, PhaseVar::P1), (PhaseVar::Q2, PhaseVar::P2)] {
        acc = &acc + &(&f.partial(q) * &g.partial(p));
        acc = &acc - &(&f.partial(p) * &g.partial(q));
    }
    acc
}

/// Phase polynomial with all parameters resolved to complex constants.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<([i32; 4], Complex64)>,
}

impl CompiledPoly {
    pub fn eval(&self, point: &[Complex64; 4]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (exps, coeff) in &self.terms {
            let mut v = *coeff;
            for i in 0..4 {
                let e = exps[i];
                if e != 0 {
                    v *= point[i].powi(e);
                }
            }
            total += v;
        }
        total
    }
}

/// Rational-to-f64 helper shared by numeric layers.
pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}
