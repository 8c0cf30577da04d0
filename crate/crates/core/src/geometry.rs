//! Curvature-dependent trigonometry, the canonical chart transformations
//! between Cartesian and (shifted) geodesic polar variables, the curved-space
//! forms of the Hamiltonian family, and numeric checks of the isometry
//! algebra of the underlying metric.
//!
//! The curvature is a runtime parameter covering the sphere (positive), the
//! Euclidean plane (zero) and the hyperbolic plane (negative) with a single
//! code path.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use thiserror::Error;

use crate::param::{EvalError, ParamSym};
use crate::rational::binomial;
use crate::zernike::ModelSpec;

/// Curvatures smaller than this in magnitude take the flat branch.
pub const KAPPA_FLAT_EPS: f64 = 1e-14;

/// Evaluations this close to a zero of the curvature cosine fail instead of
/// blowing up.
pub const POLE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point outside the chart domain: {reason}")]
    Domain { reason: String },
    #[error("curvature cosine vanishes at the evaluation point")]
    Pole,
    #[error("g2 must be bound to the negative curvature (expected {expected}, got {got})")]
    CurvatureMismatch { expected: f64, got: Complex64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Curvature cosine.
pub fn ck(kappa: f64, x: f64) -> f64 {
    if kappa > KAPPA_FLAT_EPS {
        (kappa.sqrt() * x).cos()
    } else if kappa < -KAPPA_FLAT_EPS {
        ((-kappa).sqrt() * x).cosh()
    } else {
        1.0
    }
}

/// Curvature sine; reduces to the identity in the flat limit.
pub fn sk(kappa: f64, x: f64) -> f64 {
    if kappa > KAPPA_FLAT_EPS {
        let r = kappa.sqrt();
        (r * x).sin() / r
    } else if kappa < -KAPPA_FLAT_EPS {
        let r = (-kappa).sqrt();
        (r * x).sinh() / r
    } else {
        x
    }
}

/// Curvature tangent `sk/ck`; fails at zeros of the curvature cosine.
pub fn tk(kappa: f64, x: f64) -> Result<f64, GeomError> {
    let c = ck(kappa, x);
    if c.abs() < POLE_EPS {
        return Err(GeomError::Pole);
    }
    Ok(sk(kappa, x) / c)
}

/// Complex-argument curvature cosine.
pub fn ck_c(kappa: f64, z: Complex64) -> Complex64 {
    if kappa > KAPPA_FLAT_EPS {
        (z * kappa.sqrt()).cos()
    } else if kappa < -KAPPA_FLAT_EPS {
        (z * (-kappa).sqrt()).cosh()
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Complex-argument curvature sine.
pub fn sk_c(kappa: f64, z: Complex64) -> Complex64 {
    if kappa > KAPPA_FLAT_EPS {
        let r = kappa.sqrt();
        (z * r).sin() / r
    } else if kappa < -KAPPA_FLAT_EPS {
        let r = (-kappa).sqrt();
        (z * r).sinh() / r
    } else {
        z
    }
}

/// Complex-argument curvature tangent.
pub fn tk_c(kappa: f64, z: Complex64) -> Result<Complex64, GeomError> {
    let c = ck_c(kappa, z);
    if c.norm() < POLE_EPS {
        return Err(GeomError::Pole);
    }
    Ok(sk_c(kappa, z) / c)
}

/// Coordinate chart on phase space.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Chart {
    Cartesian,
    Polar,
    GeodesicPolar,
    /// Geodesic polar with the radial momentum shifted by `-(g1/2) tk(rho)`,
    /// which turns the linear momentum potential into a central one.
    ShiftedGeodesicPolar,
}

/// Phase-space point in a given chart. Coordinates are usually real; complex
/// coordinates are accepted for complexified dynamics and bypass the domain
/// validation, which is recorded in `domain_checked`.
#[derive(Clone, Copy, Debug)]
pub struct CurvedPoint {
    pub chart: Chart,
    pub coords: [Complex64; 2],
    pub momenta: [Complex64; 2],
    pub kappa: f64,
    /// Linear-potential strength entering the shifted chart map.
    pub gamma1: Complex64,
    pub domain_checked: bool,
}

fn is_real(z: Complex64) -> bool {
    z.im == 0.0
}

impl CurvedPoint {
    /// Validate the chart domain for real coordinates; complex coordinates
    /// skip validation and the point is flagged accordingly.
    pub fn new(
        chart: Chart,
        coords: [Complex64; 2],
        momenta: [Complex64; 2],
        kappa: f64,
        gamma1: Complex64,
    ) -> Result<Self, GeomError> {
        let mut point = Self {
            chart,
            coords,
            momenta,
            kappa,
            gamma1,
            domain_checked: false,
        };
        if chart == Chart::Cartesian {
            point.domain_checked = true;
            return Ok(point);
        }
        if !(is_real(coords[0]) && is_real(coords[1])) {
            return Ok(point);
        }
        let rho = coords[0].re;
        let phi = coords[1].re;
        if rho <= 0.0 {
            return Err(GeomError::Domain {
                reason: format!("radial coordinate {rho} must be positive"),
            });
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(GeomError::Domain {
                reason: format!("angle {phi} outside [0, 2*pi)"),
            });
        }
        let curved = matches!(chart, Chart::GeodesicPolar | Chart::ShiftedGeodesicPolar);
        if curved && kappa > KAPPA_FLAT_EPS {
            let limit = std::f64::consts::FRAC_PI_2 / kappa.sqrt();
            if rho >= limit {
                return Err(GeomError::Domain {
                    reason: format!("radius {rho} reaches the hemisphere bound {limit}"),
                });
            }
        }
        point.domain_checked = true;
        Ok(point)
    }

    pub fn new_real(
        chart: Chart,
        coords: [f64; 2],
        momenta: [f64; 2],
        kappa: f64,
        gamma1: Complex64,
    ) -> Result<Self, GeomError> {
        Self::new(
            chart,
            [Complex64::new(coords[0], 0.0), Complex64::new(coords[1], 0.0)],
            [Complex64::new(momenta[0], 0.0), Complex64::new(momenta[1], 0.0)],
            kappa,
            gamma1,
        )
    }

    /// Effective curvature of the chart map; the plain polar chart is the
    /// flat member of the geodesic polar family.
    fn kappa_eff(&self) -> f64 {
        match self.chart {
            Chart::Polar => 0.0,
            _ => self.kappa,
        }
    }

    /// The chart map into Cartesian variables.
    pub fn to_cartesian(&self) -> Result<CurvedPoint, GeomError> {
        if self.chart == Chart::Cartesian {
            return Ok(*self);
        }
        let kappa = self.kappa_eff();
        let rho = self.coords[0];
        let phi = self.coords[1];
        let (sin_phi, cos_phi) = (phi.sin(), phi.cos());
        let s = sk_c(kappa, rho);
        let c = ck_c(kappa, rho);
        if c.norm() < POLE_EPS {
            return Err(GeomError::Pole);
        }
        if s.norm() < POLE_EPS {
            return Err(GeomError::Domain {
                reason: "radial coordinate too close to the origin".into(),
            });
        }
        let p_rho = match self.chart {
            Chart::ShiftedGeodesicPolar => self.momenta[0] - self.gamma1 / 2.0 * (s / c),
            _ => self.momenta[0],
        };
        let p_phi = self.momenta[1];
        let q1 = s * cos_phi;
        let q2 = s * sin_phi;
        let p1 = cos_phi * p_rho / c - sin_phi * p_phi / s;
        let p2 = sin_phi * p_rho / c + cos_phi * p_phi / s;
        Ok(CurvedPoint {
            chart: Chart::Cartesian,
            coords: [q1, q2],
            momenta: [p1, p2],
            kappa: self.kappa,
            gamma1: self.gamma1,
            domain_checked: self.domain_checked,
        })
    }

    /// Flattened `(q1, q2, p1, p2)` view of a Cartesian point.
    pub fn state(&self) -> [Complex64; 4] {
        [
            self.coords[0],
            self.coords[1],
            self.momenta[0],
            self.momenta[1],
        ]
    }

    /// Jacobian of the chart map, rows `(q1, q2, p1, p2)` against columns
    /// `(rho, phi, p_rho, p_phi)`.
    pub fn jacobian_to_cartesian(&self) -> Result<[[Complex64; 4]; 4], GeomError> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        if self.chart == Chart::Cartesian {
            let mut jac = [[zero; 4]; 4];
            for (i, row) in jac.iter_mut().enumerate() {
                row[i] = one;
            }
            return Ok(jac);
        }
        let kappa = self.kappa_eff();
        let rho = self.coords[0];
        let phi = self.coords[1];
        let (sin_phi, cos_phi) = (phi.sin(), phi.cos());
        let s = sk_c(kappa, rho);
        let c = ck_c(kappa, rho);
        if c.norm() < POLE_EPS || s.norm() < POLE_EPS {
            return Err(GeomError::Pole);
        }
        let t = s / c;
        let p_phi = self.momenta[1];
        let (shift, d_shift) = match self.chart {
            Chart::ShiftedGeodesicPolar => {
                // d/drho of tk is 1 + kappa tk^2.
                let dt = one + kappa * t * t;
                (self.gamma1 / 2.0 * t, self.gamma1 / 2.0 * dt)
            }
            _ => (zero, zero),
        };
        let s_eff = self.momenta[0] - shift;

        // q1 = sk cos(phi), q2 = sk sin(phi)
        let dq1 = [c * cos_phi, -s * sin_phi, zero, zero];
        let dq2 = [c * sin_phi, s * cos_phi, zero, zero];

        // p1 = cos(phi) s_eff / ck - sin(phi) p_phi / sk
        // d/drho (1/ck) = kappa sk / ck^2; d/drho (1/sk) = -ck / sk^2.
        let inv_c = one / c;
        let inv_s = one / s;
        let d_inv_c = kappa * s / (c * c);
        let d_inv_s = -c / (s * s);
        let dp1 = [
            cos_phi * (-d_shift * inv_c + s_eff * d_inv_c) - sin_phi * p_phi * d_inv_s,
            -sin_phi * s_eff * inv_c - cos_phi * p_phi * inv_s,
            cos_phi * inv_c,
            -sin_phi * inv_s,
        ];
        let dp2 = [
            sin_phi * (-d_shift * inv_c + s_eff * d_inv_c) + cos_phi * p_phi * d_inv_s,
            cos_phi * s_eff * inv_c - sin_phi * p_phi * inv_s,
            sin_phi * inv_c,
            cos_phi * inv_s,
        ];
        Ok([dq1, dq2, dp1, dp2])
    }
}

/// Largest entry of `J^T W J - W` where `W` is the symplectic form; zero for
/// a canonical map.
pub fn symplectic_deviation(point: &CurvedPoint) -> Result<f64, GeomError> {
    let jac = point.jacobian_to_cartesian()?;
    let zero = Complex64::new(0.0, 0.0);
    let mut omega = [[zero; 4]; 4];
    omega[0][2] = Complex64::new(1.0, 0.0);
    omega[1][3] = Complex64::new(1.0, 0.0);
    omega[2][0] = Complex64::new(-1.0, 0.0);
    omega[3][1] = Complex64::new(-1.0, 0.0);
    let mut max_dev: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let mut v = zero;
            for c in 0..4 {
                for d in 0..4 {
                    v += jac[c][a] * omega[c][d] * jac[d][b];
                }
            }
            max_dev = max_dev.max((v - omega[a][b]).norm());
        }
    }
    Ok(max_dev)
}

fn gamma_binding(spec: &ModelSpec, n: usize) -> Result<Complex64, GeomError> {
    spec.gamma_value(n)
        .ok_or(GeomError::Eval(EvalError::UnboundParameter(ParamSym::gamma(n))))
}

fn check_curvature_identification(spec: &ModelSpec, kappa: f64) -> Result<(), GeomError> {
    if spec.order() < 2 {
        if kappa.abs() > KAPPA_FLAT_EPS {
            return Err(GeomError::CurvatureMismatch {
                expected: -kappa,
                got: Complex64::new(0.0, 0.0),
            });
        }
        return Ok(());
    }
    let g2 = gamma_binding(spec, 2)?;
    if (g2 + kappa).norm() > 1e-12 {
        return Err(GeomError::CurvatureMismatch {
            expected: -kappa,
            got: g2,
        });
    }
    Ok(())
}

/// Evaluate the Hamiltonian in geodesic polar variables,
/// `p_rho^2 + p_phi^2/sk^2 + g1 tk p_rho + sum_{n>=3} g_n (tk p_rho)^n`,
/// which requires `g2` bound to the negative curvature.
pub fn eval_curved_hamiltonian(
    spec: &ModelSpec,
    point: &CurvedPoint,
) -> Result<Complex64, GeomError> {
    assert!(
        matches!(point.chart, Chart::GeodesicPolar | Chart::Polar),
        "geodesic polar form expects a (geodesic) polar point"
    );
    let kappa = point.kappa_eff();
    check_curvature_identification(spec, kappa)?;
    let rho = point.coords[0];
    let s = sk_c(kappa, rho);
    if s.norm() < POLE_EPS {
        return Err(GeomError::Domain {
            reason: "radial coordinate too close to the origin".into(),
        });
    }
    let t = tk_c(kappa, rho)?;
    let p_rho = point.momenta[0];
    let p_phi = point.momenta[1];
    let mut h = p_rho * p_rho + p_phi * p_phi / (s * s);
    let g1 = gamma_binding(spec, 1)?;
    let radial = t * p_rho;
    h += g1 * radial;
    let mut power = radial * radial;
    for n in 3..=spec.order() {
        power *= radial;
        let gn = gamma_binding(spec, n)?;
        h += gn * power;
    }
    Ok(h)
}

/// The natural-form split `kinetic + central potential + momentum potential`
/// seen from the shifted chart.
#[derive(Clone, Debug)]
pub struct NaturalForm {
    pub kappa: f64,
    order: usize,
    gamma: Vec<Complex64>,
}

impl NaturalForm {
    /// Requires every strength bound and `g2 = -kappa`.
    pub fn new(spec: &ModelSpec, kappa: f64) -> Result<Self, GeomError> {
        check_curvature_identification(spec, kappa)?;
        let mut gamma = vec![Complex64::new(0.0, 0.0)];
        for n in 1..=spec.order() {
            gamma.push(gamma_binding(spec, n)?);
        }
        Ok(Self {
            kappa,
            order: spec.order(),
            gamma,
        })
    }

    pub fn kinetic(&self, rho: f64, p_rho: Complex64, p_phi: Complex64) -> Complex64 {
        let s = sk(self.kappa, rho);
        p_rho * p_rho + p_phi * p_phi / (s * s)
    }

    /// Central potential `-(g1/2)^2 tk^2 + sum_{n>=3} (-1)^n g_n (g1/2)^n tk^(2n)`.
    pub fn central(&self, rho: f64) -> Complex64 {
        let t = Complex64::new(tk(self.kappa, rho).expect("within chart domain"), 0.0);
        let half_g1 = self.gamma[1] / 2.0;
        let mut u = -(half_g1 * half_g1) * t * t;
        for n in 3..=self.order {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            u += sign * self.gamma[n] * half_g1.powu(n as u32) * t.powu(2 * n as u32);
        }
        u
    }

    /// Momentum-dependent potential
    /// `sum_{n>=3} g_n sum_{k=1}^{n} (-1)^(n-k) C(n,k) (g1/2)^(n-k) tk^(2n-k) p_rho^k`.
    pub fn momentum_potential(&self, rho: f64, p_rho: Complex64) -> Complex64 {
        let t = Complex64::new(tk(self.kappa, rho).expect("within chart domain"), 0.0);
        let half_g1 = self.gamma[1] / 2.0;
        let mut v = Complex64::new(0.0, 0.0);
        for n in 3..=self.order {
            let mut inner = Complex64::new(0.0, 0.0);
            for k in 1..=n {
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                let choose = binomial(n as u32, k as u32)
                    .to_f64()
                    .expect("small binomial");
                inner += sign
                    * choose
                    * half_g1.powu((n - k) as u32)
                    * t.powu((2 * n - k) as u32)
                    * p_rho.powu(k as u32);
            }
            v += self.gamma[n] * inner;
        }
        v
    }

    /// Full value `kinetic + central + momentum potential`.
    pub fn total(&self, rho: f64, p_rho: Complex64, p_phi: Complex64) -> Complex64 {
        self.kinetic(rho, p_rho, p_phi) + self.central(rho) + self.momentum_potential(rho, p_rho)
    }
}

/// Killing-vector momenta of the constant-curvature metric in geodesic polar
/// variables, with their closed-form partial derivatives.
#[derive(Clone, Copy, Debug)]
struct IsometryFrame {
    j01: f64,
    j02: f64,
    j12: f64,
    /// Gradients against `(rho, phi, p_rho, p_phi)`.
    d01: [f64; 4],
    d02: [f64; 4],
    d12: [f64; 4],
}

fn isometry_frame(kappa: f64, rho: f64, phi: f64, p_rho: f64, p_phi: f64) -> IsometryFrame {
    let t = sk(kappa, rho) / ck(kappa, rho);
    let dt = 1.0 + kappa * t * t;
    let (sin_phi, cos_phi) = phi.sin_cos();
    let j01 = cos_phi * p_rho - sin_phi * p_phi / t;
    let j02 = sin_phi * p_rho + cos_phi * p_phi / t;
    let j12 = p_phi;
    IsometryFrame {
        j01,
        j02,
        j12,
        d01: [
            sin_phi * p_phi * dt / (t * t),
            -sin_phi * p_rho - cos_phi * p_phi / t,
            cos_phi,
            -sin_phi / t,
        ],
        d02: [
            -cos_phi * p_phi * dt / (t * t),
            cos_phi * p_rho - sin_phi * p_phi / t,
            sin_phi,
            cos_phi / t,
        ],
        d12: [0.0, 0.0, 0.0, 1.0],
    }
}

fn frame_bracket(df: &[f64; 4], dg: &[f64; 4]) -> f64 {
    df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1]
}

/// Result of sampling the isometry algebra.
#[derive(Clone, Debug)]
pub struct IsometryReport {
    pub kappa: f64,
    pub samples: usize,
    /// Deviations of the three structure relations.
    pub max_bracket_dev: [f64; 3],
    /// Deviation of the kinetic Casimir identity.
    pub max_casimir_dev: f64,
}

impl IsometryReport {
    pub fn max_dev(&self) -> f64 {
        self.max_bracket_dev
            .iter()
            .copied()
            .fold(self.max_casimir_dev, f64::max)
    }
}

/// Sample radial coordinate comfortably inside the chart domain.
pub fn sample_rho(kappa: f64, rng: &mut impl Rng) -> f64 {
    if kappa > KAPPA_FLAT_EPS {
        let limit = std::f64::consts::FRAC_PI_2 / kappa.sqrt();
        rng.gen_range(0.15 * limit..0.85 * limit)
    } else {
        rng.gen_range(0.1..2.0)
    }
}

/// Evaluate the structure relations of the Killing momenta and the kinetic
/// Casimir identity at random in-domain points.
pub fn isometry_check(kappa: f64, samples: usize, seed: u64) -> IsometryReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_bracket_dev = [0.0f64; 3];
    let mut max_casimir_dev = 0.0f64;
    for _ in 0..samples {
        let rho = sample_rho(kappa, &mut rng);
        let phi = rng.gen_range(0.0..TAU);
        let p_rho = rng.gen_range(-2.0..2.0);
        let p_phi = rng.gen_range(-2.0..2.0);
        let f = isometry_frame(kappa, rho, phi, p_rho, p_phi);
        let devs = [
            frame_bracket(&f.d12, &f.d01) - f.j02,
            frame_bracket(&f.d12, &f.d02) + f.j01,
            frame_bracket(&f.d01, &f.d02) - kappa * f.j12,
        ];
        for (acc, d) in max_bracket_dev.iter_mut().zip(devs) {
            *acc = acc.max(d.abs());
        }
        let s = sk(kappa, rho);
        let kinetic = p_rho * p_rho + p_phi * p_phi / (s * s);
        let casimir = f.j01 * f.j01 + f.j02 * f.j02 + kappa * f.j12 * f.j12;
        max_casimir_dev = max_casimir_dev.max((kinetic - casimir).abs());
    }
    IsometryReport {
        kappa,
        samples,
        max_bracket_dev,
        max_casimir_dev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trig_branches() {
        assert!((sk(0.0, 3.7) - 3.7).abs() < 1e-15);
        assert!((ck(1.0, 0.0) - 1.0).abs() < 1e-15);
        for x in [0.3, 1.1, 2.4] {
            assert!((tk(-1.0, x).unwrap() - x.tanh()).abs() < 1e-14);
            assert!((tk(1.0, x % 1.4).unwrap() - (x % 1.4).tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_pythagoras_and_flat_limit() {
        for kappa in [2.0, 1.0, 0.0, -1.0, -0.5] {
            for x in [0.1, 0.4, 0.9] {
                let lhs = ck(kappa, x).powi(2) + kappa * sk(kappa, x).powi(2);
                assert!((lhs - 1.0).abs() < 1e-12, "kappa={kappa} x={x}");
            }
        }
        for x in [0.2, 0.8, 1.5] {
            let dev = (sk(1e-8, x) - sk(0.0, x)).abs();
            assert!(dev < 1e-7 * x.powi(3).max(1.0), "x={x} dev={dev}");
        }
    }

    #[test]
    fn pole_detection() {
        let kappa = 1.0;
        let pole = std::f64::consts::FRAC_PI_2;
        assert_eq!(tk(kappa, pole), Err(GeomError::Pole));
    }

    #[test]
    fn polar_axis_point() {
        let p = CurvedPoint::new_real(Chart::Polar, [1.0, 0.0], [1.0, 0.0], 0.0, c(0.0, 0.0))
            .unwrap();
        let cart = p.to_cartesian().unwrap();
        let state = cart.state();
        assert!((state[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((state[1]).norm() < 1e-15);
        assert!((state[2] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((state[3]).norm() < 1e-15);
    }

    #[test]
    fn geodesic_polar_flat_limit_is_polar() {
        let coords = [0.7, 1.3];
        let momenta = [0.4, -0.9];
        let a = CurvedPoint::new_real(Chart::GeodesicPolar, coords, momenta, 0.0, c(0.0, 0.0))
            .unwrap()
            .to_cartesian()
            .unwrap();
        let b = CurvedPoint::new_real(Chart::Polar, coords, momenta, 0.0, c(0.0, 0.0))
            .unwrap()
            .to_cartesian()
            .unwrap();
        for i in 0..4 {
            assert!((a.state()[i] - b.state()[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn sphere_quarter_point() {
        let rho = std::f64::consts::FRAC_PI_4;
        let p = CurvedPoint::new_real(Chart::GeodesicPolar, [rho, 0.0], [0.0, 1.0], 1.0, c(0.0, 0.0))
            .unwrap()
            .to_cartesian()
            .unwrap();
        let s = p.state();
        let half_sqrt2 = std::f64::consts::SQRT_2 / 2.0;
        assert!((s[0].re - half_sqrt2).abs() < 1e-15);
        assert!(s[1].norm() < 1e-15);
        assert!(s[2].norm() < 1e-15);
        assert!((s[3].re - std::f64::consts::SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn domain_enforcement() {
        let over = CurvedPoint::new_real(
            Chart::GeodesicPolar,
            [1.8, 0.0],
            [0.0, 0.0],
            1.0,
            c(0.0, 0.0),
        );
        assert!(matches!(over, Err(GeomError::Domain { .. })));
        // Complex coordinates bypass validation with the flag cleared.
        let bypass = CurvedPoint::new(
            Chart::GeodesicPolar,
            [c(1.8, 0.1), c(0.0, 0.0)],
            [c(0.0, 0.0), c(0.0, 0.0)],
            1.0,
            c(0.0, 0.0),
        )
        .unwrap();
        assert!(!bypass.domain_checked);
    }

    #[test]
    fn charts_are_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for chart in [Chart::Polar, Chart::GeodesicPolar, Chart::ShiftedGeodesicPolar] {
            for &kappa in &[1.0, -1.0, 0.0] {
                for _ in 0..20 {
                    let rho = sample_rho(kappa, &mut rng);
                    let phi = rng.gen_range(0.0..TAU);
                    let point = CurvedPoint::new_real(
                        chart,
                        [rho, phi],
                        [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                        kappa,
                        c(0.0, 2.0),
                    )
                    .unwrap();
                    let dev = symplectic_deviation(&point).unwrap();
                    assert!(dev < 1e-9, "chart {chart:?} kappa {kappa} dev {dev}");
                }
            }
        }
    }

    #[test]
    fn curved_form_matches_cartesian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &kappa in &[1.0, -1.0] {
            let bindings = BTreeMap::from([
                (1, c(0.0, 2.0)),
                (2, c(-kappa, 0.0)),
                (3, c(0.0, 0.05)),
            ]);
            let spec = ModelSpec::bound(3, bindings).unwrap();
            let h = crate::zernike::build_hamiltonian(&spec);
            let params = spec.param_bindings();
            for _ in 0..30 {
                let rho = sample_rho(kappa, &mut rng);
                let phi = rng.gen_range(0.0..TAU);
                let momenta = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let point =
                    CurvedPoint::new_real(Chart::GeodesicPolar, [rho, phi], momenta, kappa, c(0.0, 2.0))
                        .unwrap();
                let lhs = eval_curved_hamiltonian(&spec, &point).unwrap();
                let cart = point.to_cartesian().unwrap();
                let rhs = h.eval(&cart.state(), &params).unwrap();
                let scale = lhs.norm().max(1.0);
                assert!((lhs - rhs).norm() / scale < 1e-12, "kappa {kappa}");
            }
        }
    }

    #[test]
    fn free_case_round_metric() {
        let bindings = BTreeMap::from([(1, c(0.0, 0.0)), (2, c(-1.0, 0.0))]);
        let spec = ModelSpec::bound(2, bindings).unwrap();
        let rho = 0.6;
        let point = CurvedPoint::new_real(
            Chart::GeodesicPolar,
            [rho, 0.3],
            [0.7, 0.2],
            1.0,
            c(0.0, 0.0),
        )
        .unwrap();
        let h = eval_curved_hamiltonian(&spec, &point).unwrap();
        let expected = 0.7f64.powi(2) + 0.2f64.powi(2) / rho.sin().powi(2);
        assert!((h - c(expected, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn natural_form_agrees_through_shifted_chart() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for &kappa in &[1.0, -1.0, 0.0] {
            let bindings = BTreeMap::from([
                (1, c(0.0, 2.0)),
                (2, c(-kappa, 0.0)),
                (3, c(0.0, 0.04)),
                (4, c(0.03, 0.0)),
            ]);
            let spec = ModelSpec::bound(4, bindings).unwrap();
            let h = crate::zernike::build_hamiltonian(&spec);
            let params = spec.param_bindings();
            let natural = NaturalForm::new(&spec, kappa).unwrap();
            for _ in 0..20 {
                let rho = sample_rho(kappa, &mut rng);
                let phi = rng.gen_range(0.0..TAU);
                let p_rho = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3));
                let p_phi = c(rng.gen_range(-1.0..1.0), 0.0);
                let point = CurvedPoint::new(
                    Chart::ShiftedGeodesicPolar,
                    [c(rho, 0.0), c(phi, 0.0)],
                    [p_rho, p_phi],
                    kappa,
                    c(0.0, 2.0),
                )
                .unwrap();
                let lhs = natural.total(rho, p_rho, p_phi);
                let cart = point.to_cartesian().unwrap();
                let rhs = h.eval(&cart.state(), &params).unwrap();
                let scale = lhs.norm().max(1.0);
                assert!((lhs - rhs).norm() / scale < 1e-12, "kappa {kappa}");
            }
        }
    }

    #[test]
    fn momentum_shift_equivalence() {
        // Substituting the shifted radial momentum into the polar form gives
        // the natural split pointwise.
        let kappa = 1.0;
        let bindings = BTreeMap::from([
            (1, c(0.0, 2.0)),
            (2, c(-kappa, 0.0)),
            (3, c(0.0, 0.1)),
        ]);
        let spec = ModelSpec::bound(3, bindings).unwrap();
        let natural = NaturalForm::new(&spec, kappa).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rho = sample_rho(kappa, &mut rng);
            let phi = rng.gen_range(0.0..TAU);
            let p_rho = c(rng.gen_range(-1.0..1.0), 0.0);
            let p_phi = c(rng.gen_range(-1.0..1.0), 0.0);
            let t = tk(kappa, rho).unwrap();
            let shifted = p_rho - c(0.0, 2.0) / 2.0 * t;
            let point = CurvedPoint::new(
                Chart::GeodesicPolar,
                [c(rho, 0.0), c(phi, 0.0)],
                [shifted, p_phi],
                kappa,
                c(0.0, 2.0),
            )
            .unwrap();
            let lhs = eval_curved_hamiltonian(&spec, &point).unwrap();
            let rhs = natural.total(rho, p_rho, p_phi);
            assert!((lhs - rhs).norm() / lhs.norm().max(1.0) < 1e-12);
        }
    }

    #[test]
    fn natural_potentials_quadratic_member() {
        // With g1 = 2 i omega the central potential is omega^2 tk^2 and the
        // momentum potential vanishes.
        let omega = 1.3;
        for kappa in [1.0, -1.0] {
            let bindings = BTreeMap::from([
                (1, c(0.0, 2.0 * omega)),
                (2, c(-kappa, 0.0)),
            ]);
            let spec = ModelSpec::bound(2, bindings).unwrap();
            let natural = NaturalForm::new(&spec, kappa).unwrap();
            for rho in [0.2, 0.5, 0.9] {
                let t = tk(kappa, rho).unwrap();
                let u = natural.central(rho);
                assert!((u - c(omega * omega * t * t, 0.0)).norm() < 1e-13);
                assert!(natural.momentum_potential(rho, c(0.7, 0.1)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn natural_potentials_without_linear_strength() {
        // g1 = 0 leaves no central part; the momentum potential reduces to
        // g_n tk^n p_rho^n termwise.
        let kappa = -1.0;
        let g3 = c(0.0, 0.2);
        let g4 = c(0.1, 0.0);
        let bindings = BTreeMap::from([
            (1, c(0.0, 0.0)),
            (2, c(-kappa, 0.0)),
            (3, g3),
            (4, g4),
        ]);
        let spec = ModelSpec::bound(4, bindings).unwrap();
        let natural = NaturalForm::new(&spec, kappa).unwrap();
        let rho = 0.8;
        let p_rho = c(0.6, -0.2);
        let t = tk(kappa, rho).unwrap();
        assert!(natural.central(rho).norm() < 1e-15);
        let expected = g3 * (p_rho * t).powu(3) + g4 * (p_rho * t).powu(4);
        assert!((natural.momentum_potential(rho, p_rho) - expected).norm() < 1e-14);
    }

    #[test]
    fn gamma_kappa_identification_enforced() {
        let bindings = BTreeMap::from([(1, c(0.0, 2.0)), (2, c(0.5, 0.0))]);
        let spec = ModelSpec::bound(2, bindings).unwrap();
        let point =
            CurvedPoint::new_real(Chart::GeodesicPolar, [0.5, 0.1], [0.1, 0.2], 1.0, c(0.0, 2.0))
                .unwrap();
        assert!(matches!(
            eval_curved_hamiltonian(&spec, &point),
            Err(GeomError::CurvatureMismatch { .. })
        ));
    }

    #[test]
    fn isometry_algebra_closes() {
        for &kappa in &[1.0, 0.0, -1.0] {
            let report = isometry_check(kappa, 100, 17);
            assert!(report.max_dev() < 1e-10, "kappa {kappa}: {report:?}");
        }
    }
}
