//! Builders for the momentum-dependent Hamiltonian family
//! `H_N = p1^2 + p2^2 + sum_n g_n (q1 p1 + q2 p2)^n`, its higher-order
//! constants of motion, and the exact identities that certify
//! superintegrability.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use thiserror::Error;

use crate::param::{ParamPolynomial, ParamSym};
use crate::phase::{poisson_bracket, PhaseMonomial, PhasePolynomial, PhaseVar};
use crate::rational::{rat, sign_pow, Rational};

/// Default cap on the potential order.
pub const DEFAULT_MAX_ORDER: usize = 12;

/// How the potential strengths are supplied.
#[derive(Clone, Debug)]
pub enum GammaMode {
    /// Keep every `g_n` as a symbol of the coefficient ring.
    Symbolic,
    /// Bind `g_n` to complex values for numeric work. Keys must lie in
    /// `1..=order`; missing keys are left unbound.
    Bound(BTreeMap<usize, Complex64>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("order {order} outside 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },
    #[error("binding for g{index} outside 1..={order}")]
    BindingOutOfRange { index: usize, order: usize },
}

/// Order of the family member plus the treatment of its strengths.
#[derive(Clone, Debug)]
pub struct ModelSpec {
    order: usize,
    gamma: GammaMode,
    max_order: usize,
}

impl ModelSpec {
    pub fn symbolic(order: usize) -> Result<Self, SpecError> {
        Self::with_max_order(order, GammaMode::Symbolic, DEFAULT_MAX_ORDER)
    }

    pub fn bound(order: usize, bindings: BTreeMap<usize, Complex64>) -> Result<Self, SpecError> {
        Self::with_max_order(order, GammaMode::Bound(bindings), DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(
        order: usize,
        gamma: GammaMode,
        max_order: usize,
    ) -> Result<Self, SpecError> {
        if order < 1 || order > max_order {
            return Err(SpecError::OrderOutOfRange {
                order,
                max: max_order,
            });
        }
        if let GammaMode::Bound(map) = &gamma {
            if let Some(&index) = map.keys().find(|&&k| k < 1 || k > order) {
                return Err(SpecError::BindingOutOfRange { index, order });
            }
        }
        Ok(Self {
            order,
            gamma,
            max_order,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn gamma(&self) -> &GammaMode {
        &self.gamma
    }

    pub fn gamma_value(&self, n: usize) -> Option<Complex64> {
        match &self.gamma {
            GammaMode::Symbolic => None,
            GammaMode::Bound(map) => map.get(&n).copied(),
        }
    }

    /// Parameter bindings for the evaluation layer; empty in symbolic mode.
    pub fn param_bindings(&self) -> BTreeMap<ParamSym, Complex64> {
        match &self.gamma {
            GammaMode::Symbolic => BTreeMap::new(),
            GammaMode::Bound(map) => map
                .iter()
                .map(|(&n, &v)| (ParamSym::gamma(n), v))
                .collect(),
        }
    }
}

/// Parity indicator: 1 for even, 0 for odd.
pub fn theta(m: u64) -> u64 {
    if m % 2 == 0 {
        1
    } else {
        0
    }
}

/// Greatest even integer strictly less than `n` (requires `n >= 1`).
pub fn phi(n: usize) -> usize {
    debug_assert!(n >= 1);
    if n % 2 == 0 {
        n - 2
    } else {
        n - 1
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("index j={j} exceeds phi({n})={max}")]
pub struct QIndexError {
    pub n: usize,
    pub j: usize,
    pub max: usize,
}

fn q_term(acc: &mut PhasePolynomial, coeff: Rational, e1: u32, e2: u32) {
    acc.add_term(
        PhaseMonomial::new([e1 as i32, e2 as i32, 0, 0]),
        ParamPolynomial::constant(coeff),
    );
}

fn binom(n: usize, k: usize) -> Rational {
    Rational::from_integer(crate::rational::binomial(n as u32, k as u32))
}

// The four parity families of homogeneous degree-n polynomials in (q1, q2).
// Empty index ranges contribute nothing.

fn q_even_even(n: usize, j: usize) -> PhasePolynomial {
    let mut acc = PhasePolynomial::zero();
    let outer = sign_pow((j / 2) as u32);
    let head = sign_pow((n / 2 + 1) as u32);
    for k in 0..=j / 2 {
        let c = &outer * &sign_pow(k as u32) * binom(n, 2 * k);
        q_term(&mut acc, &c * &head, (n - 2 * k) as u32, (2 * k) as u32);
        q_term(&mut acc, c, (2 * k) as u32, (n - 2 * k) as u32);
    }
    acc
}

fn q_even_odd(n: usize, j: usize) -> PhasePolynomial {
    let mut acc = PhasePolynomial::zero();
    let outer = sign_pow(((j - 1) / 2) as u32);
    let head = sign_pow((n / 2) as u32);
    for k in 0..=(j - 1) / 2 {
        let c = &outer * &sign_pow(k as u32) * binom(n, 2 * k + 1);
        q_term(&mut acc, &c * &head, (n - 2 * k - 1) as u32, (2 * k + 1) as u32);
        q_term(&mut acc, c, (2 * k + 1) as u32, (n - 2 * k - 1) as u32);
    }
    acc
}

fn q_odd_even(n: usize, j: usize) -> PhasePolynomial {
    let mut acc = PhasePolynomial::zero();
    let outer = sign_pow((j / 2) as u32);
    let head = sign_pow(((n + 1) / 2) as u32);
    for k in 0..j / 2 {
        let c = &(&outer * &sign_pow(k as u32)) * &head * binom(n, 2 * k + 1);
        q_term(&mut acc, c, (n - 2 * k - 1) as u32, (2 * k + 1) as u32);
    }
    for k in 0..=j / 2 {
        let c = &outer * &sign_pow(k as u32) * binom(n, 2 * k);
        q_term(&mut acc, c, (2 * k) as u32, (n - 2 * k) as u32);
    }
    acc
}

fn q_odd_odd(n: usize, j: usize) -> PhasePolynomial {
    let mut acc = PhasePolynomial::zero();
    let outer = sign_pow(((j - 1) / 2) as u32);
    let head = sign_pow(((n + 1) / 2) as u32);
    for k in 0..=(j - 1) / 2 {
        let s = &outer * &sign_pow(k as u32);
        q_term(
            &mut acc,
            &(&s * &head) * binom(n, 2 * k),
            (n - 2 * k) as u32,
            (2 * k) as u32,
        );
        q_term(
            &mut acc,
            &s * binom(n, 2 * k + 1),
            (2 * k + 1) as u32,
            (n - 2 * k - 1) as u32,
        );
    }
    acc
}

/// The homogeneous polynomial `Q^(n-j, j)(q1, q2)` selected by the parities
/// of `n` and `j`.
pub fn build_q(n: usize, j: usize) -> Result<PhasePolynomial, QIndexError> {
    assert!(n >= 1, "q polynomials start at degree 1");
    if j > phi(n) {
        return Err(QIndexError {
            n,
            j,
            max: phi(n),
        });
    }
    let poly = match (n % 2 == 0, j % 2 == 0) {
        (true, true) => q_even_even(n, j),
        (true, false) => q_even_odd(n, j),
        (false, true) => q_odd_even(n, j),
        (false, false) => q_odd_odd(n, j),
    };
    Ok(poly)
}

/// `p1^2 + p2^2`.
pub fn momentum_square() -> PhasePolynomial {
    &PhasePolynomial::var(PhaseVar::P1).pow(2) + &PhasePolynomial::var(PhaseVar::P2).pow(2)
}

/// `q1 p1 + q2 p2`.
pub fn position_momentum_dot() -> PhasePolynomial {
    &(&PhasePolynomial::var(PhaseVar::Q1) * &PhasePolynomial::var(PhaseVar::P1))
        + &(&PhasePolynomial::var(PhaseVar::Q2) * &PhasePolynomial::var(PhaseVar::P2))
}

/// Angular momentum `C = q1 p2 - q2 p1`.
pub fn build_c() -> PhasePolynomial {
    &(&PhasePolynomial::var(PhaseVar::Q1) * &PhasePolynomial::var(PhaseVar::P2))
        - &(&PhasePolynomial::var(PhaseVar::Q2) * &PhasePolynomial::var(PhaseVar::P1))
}

/// `G_n = (q1 p1 + q2 p2)^n`.
pub fn build_g(n: usize) -> PhasePolynomial {
    position_momentum_dot().pow(n as u32)
}

/// `J_n = sum_{j=0}^{phi(n)} p2^(n-j) p1^j Q^(n-j, j)`.
pub fn build_j(n: usize) -> PhasePolynomial {
    let mut acc = PhasePolynomial::zero();
    for j in 0..=phi(n) {
        let q = build_q(n, j).expect("j ranges over 0..=phi(n)");
        let shift = PhaseMonomial::new([0, 0, j as i32, (n - j) as i32]);
        acc = &acc + &q.mul_monomial(&shift);
    }
    acc
}

/// The Hamiltonian with symbolic strengths `g_1..g_N`; numeric bindings are
/// applied at evaluation time.
pub fn build_hamiltonian(spec: &ModelSpec) -> PhasePolynomial {
    let qp = position_momentum_dot();
    let mut h = momentum_square();
    let mut g = PhasePolynomial::one();
    for n in 1..=spec.order() {
        g = &g * &qp;
        h = &h + &g.scale_param(&ParamPolynomial::symbol(ParamSym::gamma(n)));
    }
    h
}

/// The higher-order constant of motion
/// `I_N = p2^2 + sum_n g_n J_n`.
pub fn build_i(spec: &ModelSpec) -> PhasePolynomial {
    let mut acc = PhasePolynomial::var(PhaseVar::P2).pow(2);
    for n in 1..=spec.order() {
        acc = &acc + &build_j(n).scale_param(&ParamPolynomial::symbol(ParamSym::gamma(n)));
    }
    acc
}

/// The partner constant of motion, the particle-swap image of `I_N`.
pub fn build_i_prime(spec: &ModelSpec) -> PhasePolynomial {
    build_i(spec).swap_particles()
}

/// `H_N - I_N - I'_N - sum_k (-1)^k g_{2k} C^{2k}`; exactly zero for every
/// order.
pub fn relation_residual(spec: &ModelSpec) -> PhasePolynomial {
    let n = spec.order();
    let mut r = &(&build_hamiltonian(spec) - &build_i(spec)) - &build_i_prime(spec);
    let c2 = build_c().pow(2);
    let mut cpow = PhasePolynomial::one();
    for k in 1..=phi(n + 1) / 2 {
        cpow = &cpow * &c2;
        let coeff = ParamPolynomial::monomial(
            crate::param::ParamMonomial::symbol(ParamSym::gamma(2 * k)),
            sign_pow(k as u32),
        );
        r = &r - &cpow.scale_param(&coeff);
    }
    r
}

/// `G_n - J_n - J'_n - ((-1)^(n/2) C^n when n even)`; exactly zero.
pub fn parity_split(n: usize) -> PhasePolynomial {
    let j = build_j(n);
    let mut r = &(&build_g(n) - &j) - &j.swap_particles();
    if n % 2 == 0 {
        let c_pow = build_c().pow(n as u32);
        r = &r - &c_pow.scale_rational(&sign_pow((n / 2) as u32));
    }
    r
}

/// Report of the exact bracket identities plus the numeric independence
/// check for one order.
#[derive(Clone, Debug)]
pub struct CertifyReport {
    pub order: usize,
    pub bracket_h_i: bool,
    pub bracket_h_iprime: bool,
    pub bracket_h_c: bool,
    pub independence_points: usize,
    pub independence_ok: bool,
    /// Smallest ratio of the third singular value to the largest one seen
    /// over the sampled points.
    pub min_singular_ratio: f64,
}

impl CertifyReport {
    pub fn all_ok(&self) -> bool {
        self.bracket_h_i && self.bracket_h_iprime && self.bracket_h_c && self.independence_ok
    }
}

/// Relative singular-value threshold for the rank test.
pub const RANK_TOLERANCE: f64 = 1e-8;

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    let r = rng.gen_range(0.4..1.2);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::new(r * theta.cos(), r * theta.sin())
}

fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Eigenvalues of a 3x3 Hermitian matrix, descending.
fn hermitian3_eigenvalues(g: &[[Complex64; 3]; 3]) -> [f64; 3] {
    let q = (g[0][0].re + g[1][1].re + g[2][2].re) / 3.0;
    let off = g[0][1].norm_sqr() + g[0][2].norm_sqr() + g[1][2].norm_sqr();
    let p2 = (g[0][0].re - q).powi(2)
        + (g[1][1].re - q).powi(2)
        + (g[2][2].re - q).powi(2)
        + 2.0 * off;
    if p2 <= f64::EPSILON * (1.0 + q * q) {
        return [q, q, q];
    }
    let p = (p2 / 6.0).sqrt();
    let mut b = *g;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= Complex64::new(q, 0.0);
        for entry in row.iter_mut() {
            *entry /= Complex64::new(p, 0.0);
        }
    }
    let r = (det3(&b).re / 2.0).clamp(-1.0, 1.0);
    let angle = r.acos() / 3.0;
    let e1 = q + 2.0 * p * angle.cos();
    let e3 = q + 2.0 * p * (angle + 2.0 * std::f64::consts::PI / 3.0).cos();
    // The remaining root comes from the trace.
    let e2 = 3.0 * q - e1 - e3;
    let mut eigs = [e1, e2, e3];
    eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eigs
}

/// Numeric rank of a 3x4 complex matrix via its Gram spectrum.
fn numeric_rank_3x4(rows: &[[Complex64; 4]; 3], rel_tol: f64) -> (usize, f64) {
    let mut gram = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = Complex64::new(0.0, 0.0);
            for (a, b) in rows[i].iter().zip(&rows[j]) {
                s += a * b.conj();
            }
            gram[i][j] = s;
        }
    }
    let eigs = hermitian3_eigenvalues(&gram);
    let svals: Vec<f64> = eigs.iter().map(|&e| e.max(0.0).sqrt()).collect();
    let smax = svals[0];
    if smax == 0.0 {
        return (0, 0.0);
    }
    let rank = svals.iter().filter(|&&s| s > rel_tol * smax).count();
    (rank, svals[2] / smax)
}

/// Certify the three bracket identities exactly and check functional
/// independence of `(H, I, C)` at random complex points.
pub fn certify(spec: &ModelSpec, seed: u64) -> CertifyReport {
    let h = build_hamiltonian(spec);
    let i = build_i(spec);
    let i_prime = build_i_prime(spec);
    let c = build_c();

    let bracket_h_i = poisson_bracket(&h, &i).is_zero();
    let bracket_h_iprime = poisson_bracket(&h, &i_prime).is_zero();
    let bracket_h_c = poisson_bracket(&h, &c).is_zero();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bindings = spec.param_bindings();
    if matches!(spec.gamma(), GammaMode::Symbolic) {
        for n in 1..=spec.order() {
            bindings.insert(ParamSym::gamma(n), random_complex(&mut rng));
        }
    }

    let partials = |f: &PhasePolynomial| -> Result<Vec<crate::phase::CompiledPoly>, _> {
        PhaseVar::ALL
            .iter()
            .map(|&v| f.partial(v).compile(&bindings))
            .collect()
    };
    let (dh, di, dc) = match (partials(&h), partials(&i), partials(&c)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => {
            // Unbound strengths in bound mode; the rank test cannot run.
            return CertifyReport {
                order: spec.order(),
                bracket_h_i,
                bracket_h_iprime,
                bracket_h_c,
                independence_points: 0,
                independence_ok: false,
                min_singular_ratio: 0.0,
            };
        }
    };

    let points = 10;
    let mut ok = true;
    let mut min_ratio = f64::INFINITY;
    for _ in 0..points {
        let z: [Complex64; 4] = std::array::from_fn(|_| random_complex(&mut rng));
        let row = |grads: &[crate::phase::CompiledPoly]| -> [Complex64; 4] {
            std::array::from_fn(|k| grads[k].eval(&z))
        };
        let jac = [row(&dh), row(&di), row(&dc)];
        let (rank, ratio) = numeric_rank_3x4(&jac, RANK_TOLERANCE);
        min_ratio = min_ratio.min(ratio);
        if rank != 3 {
            ok = false;
        }
    }

    CertifyReport {
        order: spec.order(),
        bracket_h_i,
        bracket_h_iprime,
        bracket_h_c,
        independence_points: points,
        independence_ok: ok,
        min_singular_ratio: min_ratio,
    }
}

/// Correction coefficient `(-1)^k g_{2k}` on `C^{2k}` in the relation between
/// `H_N`, `I_N` and `I'_N`, for `k = 1..=phi(N+1)/2`.
pub fn relation_correction_terms(order: usize) -> Vec<(usize, ParamPolynomial)> {
    (1..=phi(order + 1) / 2)
        .map(|k| {
            (
                2 * k,
                ParamPolynomial::monomial(
                    crate::param::ParamMonomial::symbol(ParamSym::gamma(2 * k)),
                    sign_pow(k as u32),
                ),
            )
        })
        .collect()
}

/// Human-readable relation, e.g. `H2 = I2 + I2' - g2*C^2`.
pub fn relation_description(order: usize) -> String {
    let mut s = format!("H{order} = I{order} + I{order}'");
    for (power, _) in relation_correction_terms(order) {
        let k = power / 2;
        if k % 2 == 1 {
            s.push_str(&format!(" - g{power}*C^{power}"));
        } else {
            s.push_str(&format!(" + g{power}*C^{power}"));
        }
    }
    s
}

/// Euler residual `q . grad Q - n Q`; exactly zero for every admissible pair.
pub fn euler_residual(n: usize, j: usize) -> Result<PhasePolynomial, QIndexError> {
    let q = build_q(n, j)?;
    let scaled = &(&PhasePolynomial::var(PhaseVar::Q1) * &q.partial(PhaseVar::Q1))
        + &(&PhasePolynomial::var(PhaseVar::Q2) * &q.partial(PhaseVar::Q2));
    Ok(&scaled - &q.scale_rational(&rat(n as i64)))
}

/// Derivative recurrence residual
/// `dQ^(N-a,a)/dq1 + dQ^(N-a-1,a+1)/dq2 - (N-a-1) C(N,a+1) q2^(N-a-2) q1^(a+1)`.
pub fn recurrence_residual(n: usize, a: usize) -> Result<PhasePolynomial, QIndexError> {
    let lhs = &build_q(n, a)?.partial(PhaseVar::Q1) + &build_q(n, a + 1)?.partial(PhaseVar::Q2);
    let coeff = binom(n, a + 1) * rat((n - a - 1) as i64);
    let rhs = PhasePolynomial::monomial(
        PhaseMonomial::new([(a + 1) as i32, (n - a - 2) as i32, 0, 0]),
        ParamPolynomial::constant(coeff),
    );
    Ok(&lhs - &rhs)
}

/// Lemma behind the certification: `{G_M, J_N} = 0`.
pub fn lemma_g_j(m: usize, n: usize) -> PhasePolynomial {
    poisson_bracket(&build_g(m), &build_j(n))
}

/// Companion lemma: `{G_N, p2^2} + {p1^2 + p2^2, J_N} = 0`.
pub fn lemma_free_parts(n: usize) -> PhasePolynomial {
    let i0 = PhasePolynomial::var(PhaseVar::P2).pow(2);
    &poisson_bracket(&build_g(n), &i0) + &poisson_bracket(&momentum_square(), &build_j(n))
}

/// Zero out the even strengths exactly; with only odd potentials the relation
/// collapses to `H = I + I'`.
pub fn odd_only_residual(spec: &ModelSpec) -> PhasePolynomial {
    let mut r = &(&build_hamiltonian(spec) - &build_i(spec)) - &build_i_prime(spec);
    for n in 1..=spec.order() {
        if n % 2 == 0 {
            r = r.substitute_param_rational(ParamSym::gamma(n), &rat(0));
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param::ParamMonomial;
    use crate::rational::ratio;

    fn pp_gamma(n: usize) -> ParamPolynomial {
        ParamPolynomial::symbol(ParamSym::gamma(n))
    }

    #[test]
    fn parity_helpers() {
        assert_eq!(theta(0), 1);
        assert_eq!(theta(7), 0);
        assert_eq!(theta(8), 1);
        assert_eq!(phi(1), 0);
        assert_eq!(phi(3), 2);
        assert_eq!(phi(8), 6);
    }

    #[test]
    fn q_table_spot_checks() {
        assert_eq!(build_q(1, 0).unwrap().to_string(), "1 * q2");
        assert_eq!(
            build_q(3, 1).unwrap().to_string(),
            "1 * q1^3 + 3 * q1 q2^2"
        );
        assert_eq!(
            build_q(8, 2).unwrap().to_string(),
            "1 * q1^8 + -28 * q1^6 q2^2 + 28 * q1^2 q2^6 + -1 * q2^8"
        );
        assert!(build_q(2, 1).is_err());
    }

    #[test]
    fn hamiltonian_shapes() {
        let spec = ModelSpec::symbolic(2).unwrap();
        let h = build_hamiltonian(&spec);
        // Quadratic member written out longhand.
        let qp = position_momentum_dot();
        let expected = &(&momentum_square() + &qp.scale_param(&pp_gamma(1)))
            + &qp.pow(2).scale_param(&pp_gamma(2));
        assert_eq!(h, expected);

        // Dropping g1 exactly leaves free motion.
        let h1 = build_hamiltonian(&ModelSpec::symbolic(1).unwrap())
            .substitute_param_rational(ParamSym::gamma(1), &rat(0));
        assert_eq!(h1, momentum_square());

        // Pure cubic potential.
        let h3 = build_hamiltonian(&ModelSpec::symbolic(3).unwrap())
            .substitute_param_rational(ParamSym::gamma(1), &rat(0))
            .substitute_param_rational(ParamSym::gamma(2), &rat(0))
            .substitute_param_rational(ParamSym::gamma(3), &rat(1));
        assert_eq!(h3, &momentum_square() + &build_g(3));
    }

    #[test]
    fn integral_low_orders() {
        let p2sq = PhasePolynomial::var(PhaseVar::P2).pow(2);
        let i1 = build_i(&ModelSpec::symbolic(1).unwrap());
        let q2p2 = &PhasePolynomial::var(PhaseVar::Q2) * &PhasePolynomial::var(PhaseVar::P2);
        assert_eq!(i1, &p2sq + &q2p2.scale_param(&pp_gamma(1)));

        let i2 = build_i(&ModelSpec::symbolic(2).unwrap());
        let radius = &PhasePolynomial::var(PhaseVar::Q1).pow(2)
            + &PhasePolynomial::var(PhaseVar::Q2).pow(2);
        let expected = &(&p2sq + &q2p2.scale_param(&pp_gamma(1)))
            + &(&radius * &p2sq).scale_param(&pp_gamma(2));
        assert_eq!(i2, expected);

        let ip1 = build_i_prime(&ModelSpec::symbolic(1).unwrap());
        let p1sq = PhasePolynomial::var(PhaseVar::P1).pow(2);
        let q1p1 = &PhasePolynomial::var(PhaseVar::Q1) * &PhasePolynomial::var(PhaseVar::P1);
        assert_eq!(ip1, &p1sq + &q1p1.scale_param(&pp_gamma(1)));
    }

    #[test]
    fn integral_order_four_termwise() {
        // Row four of the bundled table, assembled from the Q data.
        let spec = ModelSpec::symbolic(4).unwrap();
        let mut expected = PhasePolynomial::var(PhaseVar::P2).pow(2);
        let pieces: [(usize, &[(usize, usize)]); 4] = [
            (1, &[(1, 0)]),
            (2, &[(2, 0)]),
            (3, &[(3, 0), (2, 1), (1, 2)]),
            (4, &[(4, 0), (3, 1), (2, 2)]),
        ];
        for (n, idx) in pieces {
            let mut block = PhasePolynomial::zero();
            for &(a, j) in idx {
                assert_eq!(a + j, n);
                let shift = PhaseMonomial::new([0, 0, j as i32, a as i32]);
                block = &block + &build_q(n, j).unwrap().mul_monomial(&shift);
            }
            expected = &expected + &block.scale_param(&pp_gamma(n));
        }
        assert_eq!(build_i(&spec), expected);
    }

    #[test]
    fn swap_involution_on_integrals() {
        for n in 1..=8 {
            let i = build_i(&ModelSpec::symbolic(n).unwrap());
            assert_eq!(i.swap_particles().swap_particles(), i);
        }
    }

    #[test]
    fn integral_increments() {
        for n in 2..=8 {
            let spec_n = ModelSpec::symbolic(n).unwrap();
            let spec_prev = ModelSpec::symbolic(n - 1).unwrap();
            let diff = &build_i(&spec_n) - &build_i(&spec_prev);
            let expected = build_j(n).scale_param(&pp_gamma(n));
            assert_eq!(diff, expected);
        }
    }

    #[test]
    fn relation_residual_vanishes() {
        for n in 1..=6 {
            assert!(
                relation_residual(&ModelSpec::symbolic(n).unwrap()).is_zero(),
                "relation failed at order {n}"
            );
        }
    }

    #[test]
    fn relation_description_text() {
        assert_eq!(relation_description(1), "H1 = I1 + I1'");
        assert_eq!(relation_description(2), "H2 = I2 + I2' - g2*C^2");
        assert_eq!(
            relation_description(6),
            "H6 = I6 + I6' - g2*C^2 + g4*C^4 - g6*C^6"
        );
    }

    #[test]
    fn parity_split_vanishes() {
        for n in [2, 3, 6] {
            assert!(parity_split(n).is_zero(), "split failed at {n}");
        }
    }

    #[test]
    fn angular_momentum_basics() {
        let c = build_c();
        assert_eq!(c.swap_particles(), -&c);
        for n in 1..=6 {
            let h = build_hamiltonian(&ModelSpec::symbolic(n).unwrap());
            assert!(poisson_bracket(&c, &h).is_zero());
        }
    }

    #[test]
    fn g_and_j_low_orders() {
        assert_eq!(build_g(1), position_momentum_dot());
        let q2p2 = &PhasePolynomial::var(PhaseVar::Q2) * &PhasePolynomial::var(PhaseVar::P2);
        assert_eq!(build_j(1), q2p2);
    }

    #[test]
    fn euler_homogeneity_sample() {
        for n in 1..=8 {
            for j in 0..=phi(n) {
                assert!(euler_residual(n, j).unwrap().is_zero(), "n={n} j={j}");
            }
        }
    }

    #[test]
    fn recurrence_sample() {
        for n in 3..=8 {
            for a in 0..phi(n) {
                assert!(recurrence_residual(n, a).unwrap().is_zero(), "n={n} a={a}");
            }
        }
    }

    #[test]
    fn lemma_spot_checks() {
        for (m, n) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
            assert!(lemma_g_j(m, n).is_zero(), "lemma failed at ({m},{n})");
        }
        for n in 1..=6 {
            assert!(lemma_free_parts(n).is_zero(), "free-part lemma at {n}");
        }
    }

    #[test]
    fn odd_only_relation() {
        for n in [3, 5, 7] {
            assert!(odd_only_residual(&ModelSpec::symbolic(n).unwrap()).is_zero());
        }
    }

    #[test]
    fn certify_small_orders() {
        let report = certify(&ModelSpec::symbolic(2).unwrap(), 0);
        assert!(report.all_ok(), "{report:?}");

        // Free motion keeps full rank.
        let free = ModelSpec::bound(
            2,
            BTreeMap::from([(1, Complex64::new(0.0, 0.0)), (2, Complex64::new(0.0, 0.0))]),
        )
        .unwrap();
        let report = certify(&free, 1);
        assert!(report.all_ok(), "{report:?}");
    }

    #[test]
    fn quadratic_member_numeric_values() {
        let spec = ModelSpec::symbolic(2).unwrap();
        let h = build_hamiltonian(&spec);
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);

        // Free kinetic value with both strengths bound to zero.
        let params = BTreeMap::from([
            (ParamSym::gamma(1), zero),
            (ParamSym::gamma(2), zero),
        ]);
        let v = h.eval(&[zero, zero, one, zero], &params).unwrap();
        assert!((v - one).norm() < 1e-15);

        // Hand substitution at (1,1,1,1) with g1 = 2i, g2 = -1:
        // p^2 = 2, g1 (q.p) = 4i, g2 (q.p)^2 = -4.
        let params = BTreeMap::from([
            (ParamSym::gamma(1), Complex64::new(0.0, 2.0)),
            (ParamSym::gamma(2), Complex64::new(-1.0, 0.0)),
        ]);
        let v = h.eval(&[one, one, one, one], &params).unwrap();
        assert!((v - Complex64::new(-2.0, 4.0)).norm() < 1e-14);
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::symbolic(0).is_err());
        assert!(ModelSpec::symbolic(13).is_err());
        assert!(ModelSpec::bound(2, BTreeMap::from([(3, Complex64::new(1.0, 0.0))])).is_err());
    }

    #[test]
    fn correction_terms_signs() {
        let terms = relation_correction_terms(6);
        assert_eq!(terms.len(), 3);
        let expected_g2 = ParamPolynomial::monomial(
            ParamMonomial::symbol(ParamSym::gamma(2)),
            ratio(-1, 1),
        );
        assert_eq!(terms[0].1, expected_g2);
    }
}
