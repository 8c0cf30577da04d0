//! The polynomial bracket algebra closed by the constants of motion.
//!
//! From `L1 = C/2`, `L2 = (I' - I)/2` and `L3 = {L1, L2}` the bracket
//! `{L2, L3}` is matched exactly against the odd-power ansatz
//! `sum_k (alpha_k + beta_k H) L1^(2k+1)` by equating phase-space monomial
//! coefficients and solving the resulting linear system over the rationals.

use num_traits::Zero;
use thiserror::Error;

use crate::linsolve::{solve_lenient, SparseRow};
use crate::param::{ParamMonomial, ParamPolynomial, ParamSym};
use crate::phase::{poisson_bracket, PhaseMonomial, PhasePolynomial};
use crate::rational::{rat, ratio, Rational};
use crate::zernike::{build_c, build_hamiltonian, build_i, build_i_prime, ModelSpec};

/// The three generators of the bracket algebra.
#[derive(Clone, Debug)]
pub struct RacahGenerators {
    pub l1: PhasePolynomial,
    pub l2: PhasePolynomial,
    pub l3: PhasePolynomial,
}

/// `L1 = C/2`, `L2 = (I'_N - I_N)/2`, `L3 = {L1, L2}`.
pub fn build_generators(spec: &ModelSpec) -> RacahGenerators {
    let half = ratio(1, 2);
    let l1 = build_c().scale_rational(&half);
    let l2 = (&build_i_prime(spec) - &build_i(spec)).scale_rational(&half);
    let l3 = poisson_bracket(&l1, &l2);
    RacahGenerators { l1, l2, l3 }
}

/// Solved coefficients of the odd-power ansatz, on the `L1^(2k+1)` basis.
///
/// `beta_k` carries the part linear in the formal Hamiltonian symbol; it may
/// itself contain that symbol when the quadratic escalation was needed.
#[derive(Clone, Debug)]
pub struct RacahDecomposition {
    pub order: usize,
    pub coefficients: Vec<(ParamPolynomial, ParamPolynomial)>,
    pub residual: PhasePolynomial,
}

#[derive(Debug, Clone, Error)]
pub enum RacahError {
    #[error("bracket does not close on the odd-power ansatz at order {order}")]
    DecompositionFailed {
        order: usize,
        residual: PhasePolynomial,
    },
}

fn gamma_monomials_up_to(order: usize, degree: u32) -> Vec<ParamMonomial> {
    let mut out = vec![ParamMonomial::unit()];
    if degree >= 1 {
        for a in 1..=order {
            out.push(ParamMonomial::symbol(ParamSym::gamma(a)));
        }
    }
    if degree >= 2 {
        for a in 1..=order {
            for b in a..=order {
                out.push(ParamMonomial::from_pairs(&[
                    (ParamSym::gamma(a), 1),
                    (ParamSym::gamma(b), 1),
                ]));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
struct Unknown {
    k: usize,
    h_power: u32,
    mono: ParamMonomial,
}

struct AnsatzBasis {
    /// `expansions[k][d] = H^d * L1^(2k+1)` as explicit phase polynomials.
    expansions: Vec<Vec<PhasePolynomial>>,
}

fn build_basis(spec: &ModelSpec, max_h_power: u32) -> AnsatzBasis {
    let n = spec.order();
    let h = build_hamiltonian(spec);
    let l1 = build_c().scale_rational(&ratio(1, 2));
    let l1_sq = &l1 * &l1;
    let mut expansions = Vec::with_capacity(n);
    let mut odd = l1;
    for k in 0..n {
        if k > 0 {
            odd = &odd * &l1_sq;
        }
        let mut by_power = Vec::with_capacity(max_h_power as usize + 1);
        let mut cur = odd.clone();
        by_power.push(cur.clone());
        for _ in 0..max_h_power {
            cur = &cur * &h;
            by_power.push(cur.clone());
        }
        expansions.push(by_power);
    }
    AnsatzBasis { expansions }
}

fn attempt(
    spec: &ModelSpec,
    bracket: &PhasePolynomial,
    max_h_power: u32,
    reverse_columns: bool,
) -> RacahDecomposition {
    let n = spec.order();
    let basis = build_basis(spec, max_h_power);

    // Column layout: the Hamiltonian-free block first so that pivots prefer
    // plain gamma coefficients, matching the canonical table presentation.
    let mut unknowns = Vec::new();
    for d in 0..=max_h_power {
        let degree = if d == 0 { 2 } else { 1 };
        for k in 0..n {
            for mono in gamma_monomials_up_to(n, degree) {
                unknowns.push(Unknown { k, h_power: d, mono });
            }
        }
    }
    if reverse_columns {
        unknowns.reverse();
    }

    // Equation assembly: one row per (phase monomial, parameter monomial).
    use std::collections::BTreeMap;
    let mut support: std::collections::BTreeSet<PhaseMonomial> =
        bracket.support().copied().collect();
    for k in 0..n {
        for d in 0..=max_h_power as usize {
            support.extend(basis.expansions[k][d].support().copied());
        }
    }

    let mut rows = Vec::new();
    for m in &support {
        let mut by_tau: BTreeMap<ParamMonomial, Vec<(usize, Rational)>> = BTreeMap::new();
        if let Some(rhs_poly) = bracket.coeff(m) {
            for (tau, _) in rhs_poly.iter() {
                by_tau.entry(tau.clone()).or_default();
            }
        }
        for (col, u) in unknowns.iter().enumerate() {
            let Some(poly) = basis.expansions[u.k][u.h_power as usize].coeff(m) else {
                continue;
            };
            for (sigma, c) in poly.iter() {
                let tau = u.mono.mul(sigma);
                by_tau.entry(tau).or_default().push((col, c.clone()));
            }
        }
        for (tau, mut entries) in by_tau {
            entries.sort_by_key(|&(c, _)| c);
            // Merge duplicate columns.
            let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(entries.len());
            for (c, v) in entries {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            let rhs = bracket
                .coeff(m)
                .and_then(|p| p.coeff(&tau).cloned())
                .unwrap_or_else(|| rat(0));
            rows.push(SparseRow::new(merged, rhs));
        }
    }

    let (solution, _consistent) = solve_lenient(unknowns.len(), rows);

    // Extract alpha/beta and perform the substitution check: the solved
    // ansatz must annihilate the bracket as a phase-space identity.
    let mut coefficients = vec![(ParamPolynomial::zero(), ParamPolynomial::zero()); n];
    let mut residual = bracket.clone();
    for (col, u) in unknowns.iter().enumerate() {
        let x = &solution[col];
        if x.is_zero() {
            continue;
        }
        let contribution = ParamPolynomial::monomial(u.mono.clone(), x.clone());
        residual = &residual
            - &basis.expansions[u.k][u.h_power as usize].scale_param(&contribution);
        match u.h_power {
            0 => coefficients[u.k].0 = &coefficients[u.k].0 + &contribution,
            1 => coefficients[u.k].1 = &coefficients[u.k].1 + &contribution,
            _ => {
                let lifted = contribution
                    .mul_monomial(&ParamMonomial::power(ParamSym::FormalH, u.h_power - 1));
                coefficients[u.k].1 = &coefficients[u.k].1 + &lifted;
            }
        }
    }

    RacahDecomposition {
        order: n,
        coefficients,
        residual,
    }
}

/// Compute `{L2, L3}` exactly and resolve it on the odd-power ansatz.
///
/// The ansatz is first solved with coefficients linear in the formal
/// Hamiltonian symbol; if the residual does not vanish the cap is raised to
/// quadratic before reporting failure.
pub fn decompose(spec: &ModelSpec) -> Result<RacahDecomposition, RacahError> {
    decompose_with_order(spec, false)
}

/// Same as [`decompose`] with the unknown ordering reversed; used to confirm
/// that the solution does not depend on elimination order.
pub fn decompose_with_order(
    spec: &ModelSpec,
    reverse_columns: bool,
) -> Result<RacahDecomposition, RacahError> {
    let gens = build_generators(spec);
    let bracket = poisson_bracket(&gens.l2, &gens.l3);
    let mut last = None;
    for cap in 1..=2 {
        let dec = attempt(spec, &bracket, cap, reverse_columns);
        if dec.residual.is_zero() {
            return Ok(dec);
        }
        last = Some(dec);
    }
    let failed = last.expect("at least one attempt ran");
    Err(RacahError::DecompositionFailed {
        order: failed.order,
        residual: failed.residual,
    })
}

fn reference_poly(terms: &[(i64, &[(usize, u32)])]) -> ParamPolynomial {
    let mut p = ParamPolynomial::zero();
    for &(c, pairs) in terms {
        let mono = ParamMonomial::from_pairs(
            &pairs
                .iter()
                .map(|&(g, e)| (ParamSym::gamma(g), e))
                .collect::<Vec<_>>(),
        );
        p.add_term(mono, rat(c));
    }
    p
}

type RefTerms = Vec<(i64, &'static [(usize, u32)])>;

/// Published bracket coefficients on the `L1^(2k+1)` basis, orders 1..=6.
pub fn reference_coefficients(order: usize) -> Option<Vec<(ParamPolynomial, ParamPolynomial)>> {
    let base_alpha0: &[(i64, &[(usize, u32)])] = &[(-1, &[(1, 2)])];
    let base_beta0: &[(i64, &[(usize, u32)])] = &[(-2, &[(2, 1)])];
    let rows: Vec<(RefTerms, RefTerms)> = match order {
        1 => vec![(base_alpha0.to_vec(), vec![])],
        2 => vec![
            (base_alpha0.to_vec(), base_beta0.to_vec()),
            (vec![(-8, &[(2, 2)])], vec![]),
        ],
        3 => vec![
            (base_alpha0.to_vec(), base_beta0.to_vec()),
            (vec![(-8, &[(2, 2)]), (16, &[(1, 1), (3, 1)])], vec![]),
            (vec![(-48, &[(3, 2)])], vec![]),
        ],
        4 => vec![
            (base_alpha0.to_vec(), base_beta0.to_vec()),
            (
                vec![(-8, &[(2, 2)]), (16, &[(1, 1), (3, 1)])],
                vec![(16, &[(4, 1)])],
            ),
            (vec![(-48, &[(3, 2)]), (96, &[(2, 1), (4, 1)])], vec![]),
            (vec![(-256, &[(4, 2)])], vec![]),
        ],
        5 => vec![
            (base_alpha0.to_vec(), base_beta0.to_vec()),
            (
                vec![(-8, &[(2, 2)]), (16, &[(1, 1), (3, 1)])],
                vec![(16, &[(4, 1)])],
            ),
            (
                vec![
                    (-48, &[(3, 2)]),
                    (96, &[(2, 1), (4, 1)]),
                    (-96, &[(1, 1), (5, 1)]),
                ],
                vec![],
            ),
            (
                vec![(-256, &[(4, 2)]), (512, &[(3, 1), (5, 1)])],
                vec![],
            ),
            (vec![(-1280, &[(5, 2)])], vec![]),
        ],
        6 => vec![
            (base_alpha0.to_vec(), base_beta0.to_vec()),
            (
                vec![(-8, &[(2, 2)]), (16, &[(1, 1), (3, 1)])],
                vec![(16, &[(4, 1)])],
            ),
            (
                vec![
                    (-48, &[(3, 2)]),
                    (96, &[(2, 1), (4, 1)]),
                    (-96, &[(1, 1), (5, 1)]),
                ],
                vec![(-96, &[(6, 1)])],
            ),
            (
                vec![
                    (-256, &[(4, 2)]),
                    (512, &[(3, 1), (5, 1)]),
                    (-512, &[(2, 1), (6, 1)]),
                ],
                vec![],
            ),
            (
                vec![(-1280, &[(5, 2)]), (2560, &[(4, 1), (6, 1)])],
                vec![],
            ),
            (vec![(-6144, &[(6, 2)])], vec![]),
        ],
        _ => return None,
    };
    Some(
        rows.into_iter()
            .map(|(a, b)| (reference_poly(&a), reference_poly(&b)))
            .collect(),
    )
}

/// Per-coefficient comparison between a solved decomposition and the
/// published table.
#[derive(Clone, Debug)]
pub struct CoeffCheck {
    pub power_index: usize,
    pub alpha_match: bool,
    pub beta_match: bool,
}

#[derive(Clone, Debug)]
pub struct Table2Check {
    pub order: usize,
    pub entries: Vec<CoeffCheck>,
}

impl Table2Check {
    pub fn all_match(&self) -> bool {
        self.entries.iter().all(|e| e.alpha_match && e.beta_match)
    }
}

/// Compare the solved coefficients against the bundled table for every order
/// up to `max_order` (at most 6, the table's extent).
pub fn verify_table2(max_order: usize) -> Result<Vec<Table2Check>, RacahError> {
    assert!(max_order <= 6, "reference table covers orders 1..=6");
    let mut out = Vec::new();
    for n in 1..=max_order {
        let spec = ModelSpec::symbolic(n).expect("order within cap");
        let dec = decompose(&spec)?;
        let expected = reference_coefficients(n).expect("n <= 6");
        let entries = expected
            .iter()
            .zip(dec.coefficients.iter())
            .enumerate()
            .map(|(k, ((ea, eb), (sa, sb)))| CoeffCheck {
                power_index: k,
                alpha_match: ea == sa,
                beta_match: eb == sb,
            })
            .collect();
        out.push(Table2Check { order: n, entries });
    }
    Ok(out)
}

/// Table-style presentation: the first line on the `L1` basis, the rest on
/// the `(2 L1)^(2k+1)` basis.
pub fn layout_lines(dec: &RacahDecomposition) -> Vec<String> {
    let mut lines = Vec::with_capacity(dec.coefficients.len());
    for (k, (alpha, beta)) in dec.coefficients.iter().enumerate() {
        let f_k = alpha + &beta.mul_monomial(&ParamMonomial::symbol(ParamSym::FormalH));
        if k == 0 {
            lines.push(format!("racah[L1^1] = {f_k}"));
        } else {
            let power = 2 * k + 1;
            let scale = ratio(1, 1i64 << power);
            lines.push(format!("racah[(2 L1)^{power}] = {}", f_k.scale(&scale)));
        }
    }
    lines
}
