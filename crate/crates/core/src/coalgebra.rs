//! Poisson realizations of the rank-one symmetry algebra behind the
//! Hamiltonian family.
//!
//! The generators obey `{J3, J+} = 2 J+`, `{J3, J-} = -2 J-` and
//! `{J-, J+} = 4 J3` (this sign convention is kept throughout), with
//! quadratic Casimir `J- J+ - J3^2`. The two-particle realization is the sum
//! of two disjoint one-particle copies, and feeding the generators into the
//! potential reproduces the Hamiltonian family exactly.

use crate::param::{ParamPolynomial, ParamSym};
use crate::phase::{PhaseMonomial, PhasePolynomial, PhaseVar};
use crate::rational::rat;
use crate::zernike::ModelSpec;

/// Symplectic realization of the three generators.
#[derive(Clone, Debug)]
pub struct Sl2Realization {
    pub j_minus: PhasePolynomial,
    pub j_plus: PhasePolynomial,
    pub j_3: PhasePolynomial,
    pub particles: usize,
}

/// One-particle realization on the variable pair `(q_i, p_i)` with its
/// centrifugal symbol `l_i`.
fn one_particle(i: usize) -> Sl2Realization {
    debug_assert!(i == 1 || i == 2);
    let (q, p) = if i == 1 {
        (PhaseVar::Q1, PhaseVar::P1)
    } else {
        (PhaseVar::Q2, PhaseVar::P2)
    };
    let q_poly = PhasePolynomial::var(q);
    let p_poly = PhasePolynomial::var(p);
    let mut inv_sq = [0i32; 4];
    inv_sq[q.index()] = -2;
    let centrifugal = PhasePolynomial::monomial(
        PhaseMonomial::new(inv_sq),
        ParamPolynomial::symbol(ParamSym::Lambda(i as u8)),
    );
    Sl2Realization {
        j_minus: q_poly.pow(2),
        j_plus: &p_poly.pow(2) + &centrifugal,
        j_3: &q_poly * &p_poly,
        particles: 1,
    }
}

/// Build the one- or two-particle realization with symbolic centrifugal
/// constants. The two-particle generators are the termwise sum of the two
/// disjoint one-particle copies.
pub fn build_realization(particles: usize) -> Sl2Realization {
    assert!(
        particles == 1 || particles == 2,
        "realizations exist for one or two particles"
    );
    if particles == 1 {
        return one_particle(1);
    }
    let a = one_particle(1);
    let b = one_particle(2);
    Sl2Realization {
        j_minus: &a.j_minus + &b.j_minus,
        j_plus: &a.j_plus + &b.j_plus,
        j_3: &a.j_3 + &b.j_3,
        particles: 2,
    }
}

/// Quadratic Casimir `J- J+ - J3^2`.
pub fn casimir(r: &Sl2Realization) -> PhasePolynomial {
    &(&r.j_minus * &r.j_plus) - &r.j_3.pow(2)
}

fn bind_lambda_zero(p: &PhasePolynomial) -> PhasePolynomial {
    p.substitute_param_rational(ParamSym::Lambda(1), &rat(0))
        .substitute_param_rational(ParamSym::Lambda(2), &rat(0))
}

/// The Hamiltonian assembled from the generators at vanishing centrifugal
/// constants: `J+ + sum_n g_n J3^n`. Must agree termwise with the direct
/// construction.
pub fn coalgebra_hamiltonian(spec: &ModelSpec) -> PhasePolynomial {
    let two = build_realization(2);
    let j_plus = bind_lambda_zero(&two.j_plus);
    let j_3 = bind_lambda_zero(&two.j_3);
    assemble(spec, &j_plus, &j_3)
}

/// The centrifugal extension `J+ + sum_n g_n J3^n` with the `l_i` symbols
/// kept; it always commutes with the two-particle Casimir.
pub fn lambda_hamiltonian(spec: &ModelSpec) -> PhasePolynomial {
    let two = build_realization(2);
    assemble(spec, &two.j_plus, &two.j_3)
}

fn assemble(
    spec: &ModelSpec,
    j_plus: &PhasePolynomial,
    j_3: &PhasePolynomial,
) -> PhasePolynomial {
    let mut h = j_plus.clone();
    let mut power = PhasePolynomial::one();
    for n in 1..=spec.order() {
        power = &power * j_3;
        h = &h + &power.scale_param(&ParamPolynomial::symbol(ParamSym::gamma(n)));
    }
    h
}
