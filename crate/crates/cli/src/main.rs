//! Command-line front end: exact certification, canonical tables, bracket
//! algebra, chart cross-checks and complexified trajectory simulation.

mod complex_lit;
mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};
use serde_json::json;

use complex_lit::{parse_complex_pair, parse_gamma_binding, parse_real_pair};
use report::{Report, ReportFormat};

use zernike_core::coalgebra::{
    build_realization, casimir, coalgebra_hamiltonian, lambda_hamiltonian,
};
use zernike_core::dynamics::{
    export_path, integrate, FlowProblem, Tolerances,
};
use zernike_core::geometry::{
    eval_curved_hamiltonian, isometry_check, sample_rho, symplectic_deviation, tk, Chart,
    CurvedPoint, NaturalForm,
};
use zernike_core::param::{ParamPolynomial, ParamSym};
use zernike_core::phase::poisson_bracket;
use zernike_core::racah::{decompose, layout_lines};
use zernike_core::rational::rat;
use zernike_core::zernike::{
    build_c, build_g, build_hamiltonian, build_j, certify, euler_residual, lemma_g_j,
    momentum_square, phi, recurrence_residual, relation_description, relation_residual, ModelSpec,
};

#[derive(Parser)]
#[command(
    name = "zernike",
    version,
    about = "Exact certification and complex dynamics for momentum-dependent superintegrable Hamiltonians"
)]
struct Cli {
    /// Seed driving every randomized numeric check.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,

    /// Highest order exercised by identity sweeps.
    #[arg(long, global = true, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..=12))]
    max_order: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the exact identities order by order and exit nonzero on the
    /// first failure.
    Verify,
    /// Print a canonical table and diff it against the bundled golden copy.
    Tables {
        /// Order of the table to render.
        #[arg(long)]
        order: usize,
        /// Which table family to render.
        #[arg(long, value_enum, default_value_t = TableKind::Table1)]
        which: TableKind,
    },
    /// Solve the bracket algebra at one order and print its table layout.
    Racah {
        #[arg(long)]
        order: usize,
    },
    /// Check the symmetry-algebra realization identities.
    CoalgebraCheck,
    /// Cross-check chart maps, curved Hamiltonian forms and isometries.
    TransformCheck {
        #[arg(long, allow_hyphen_values = true)]
        kappa: f64,
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Integrate the complexified flow and export the trajectory.
    Simulate {
        #[arg(long)]
        order: usize,
        /// Oscillator frequency entering g1 = 2 i omega.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        omega: f64,
        /// Curvature entering g2 = -kappa (orders >= 2).
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        kappa: f64,
        /// Extra strength binding n=value; repeatable. Values are complex
        /// literals such as 0.05i or 1+2i.
        #[arg(long = "gamma", value_parser = parse_gamma_binding)]
        gamma: Vec<(usize, Complex64)>,
        /// Initial position, two complex literals.
        #[arg(long, value_parser = parse_complex_pair, default_value = "0.3,0.1", allow_hyphen_values = true)]
        q0: [Complex64; 2],
        /// Initial momentum, two complex literals.
        #[arg(long, value_parser = parse_complex_pair, default_value = "-0.1,0.3", allow_hyphen_values = true)]
        p0: [Complex64; 2],
        /// Integration window t0,t1.
        #[arg(long, value_parser = parse_real_pair, default_value = "0,20", allow_hyphen_values = true)]
        tspan: (f64, f64),
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-12)]
        atol: f64,
        /// Output file; the extension selects csv or svg. Repeatable.
        #[arg(long = "out")]
        out: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, clap::ValueEnum)]
enum TableKind {
    Table1,
    Racah,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let max_order = cli.max_order as usize;
    let report = match &cli.command {
        Command::Verify => run_verify(cli.seed, max_order),
        Command::Tables { order, which } => run_tables(cli.seed, *order, *which),
        Command::Racah { order } => run_racah(cli.seed, *order),
        Command::CoalgebraCheck => run_coalgebra_check(cli.seed, max_order),
        Command::TransformCheck {
            kappa,
            order,
            samples,
        } => run_transform_check(cli.seed, *kappa, *order, *samples),
        Command::Simulate {
            order,
            omega,
            kappa,
            gamma,
            q0,
            p0,
            tspan,
            samples,
            rtol,
            atol,
            out,
        } => run_simulate(
            cli.seed, *order, *omega, *kappa, gamma, *q0, *p0, *tspan, *samples, *rtol, *atol, out,
        ),
    };
    let report = match report {
        Ok(r) => r,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    print!("{}", report.render(cli.report));
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn spec_symbolic(order: usize) -> Result<ModelSpec, String> {
    ModelSpec::symbolic(order).map_err(|e| e.to_string())
}

fn run_verify(seed: u64, max_order: usize) -> Result<Report, String> {
    let mut report = Report::new("verify", seed, json!({ "max_order": max_order }));
    for n in 1..=max_order {
        let spec = spec_symbolic(n)?;
        let cert = certify(&spec, seed.wrapping_add(n as u64));
        report.check(format!("{{H{n}, I{n}}} = 0"), cert.bracket_h_i);
        report.check(format!("{{H{n}, I{n}'}} = 0"), cert.bracket_h_iprime);
        report.check(format!("{{H{n}, C}} = 0"), cert.bracket_h_c);
        report.check(
            format!(
                "rank d(H{n},I{n},C) = 3 at {} random complex points",
                cert.independence_points
            ),
            cert.independence_ok,
        );
        report.check(relation_description(n), relation_residual(&spec).is_zero());
        let parity_name = if n % 2 == 1 {
            format!("G{n} = J{n} + J{n}'")
        } else if (n / 2) % 2 == 1 {
            format!("G{n} = J{n} + J{n}' - C^{n}")
        } else {
            format!("G{n} = J{n} + J{n}' + C^{n}")
        };
        report.check(parity_name, zernike_core::zernike::parity_split(n).is_zero());
    }
    let mut lemma_ok = true;
    for m in 1..=max_order {
        for n in 1..=max_order {
            lemma_ok &= lemma_g_j(m, n).is_zero();
        }
    }
    report.check(
        format!("{{G_M, J_N}} = 0 for 1 <= M,N <= {max_order}"),
        lemma_ok,
    );
    let deep = max_order + 2;
    let mut free_ok = true;
    let mut rec_ok = true;
    for n in 1..=deep {
        let p2sq = zernike_core::phase::PhasePolynomial::var(zernike_core::phase::PhaseVar::P2)
            .pow(2);
        free_ok &= (&poisson_bracket(&build_g(n), &p2sq)
            + &poisson_bracket(&momentum_square(), &build_j(n)))
            .is_zero();
        for a in 0..phi(n) {
            rec_ok &= recurrence_residual(n, a)
                .map(|r| r.is_zero())
                .unwrap_or(false);
        }
    }
    report.check(
        format!("{{G_N, p2^2}} + {{p1^2 + p2^2, J_N}} = 0 for N <= {deep}"),
        free_ok,
    );
    report.check(format!("dQ recurrence for N <= {deep}"), rec_ok);
    let mut euler_ok = true;
    for n in 1..=max_order + 4 {
        for j in 0..=phi(n) {
            euler_ok &= euler_residual(n, j).map(|r| r.is_zero()).unwrap_or(false);
        }
    }
    report.check(
        format!("Euler homogeneity q.grad Q = n Q for n <= {}", max_order + 4),
        euler_ok,
    );
    Ok(report)
}

fn run_tables(seed: u64, order: usize, which: TableKind) -> Result<Report, String> {
    if order < 1 || order > 12 {
        return Err(format!("table order {order} outside 1..=12"));
    }
    let which_name = match which {
        TableKind::Table1 => "table1",
        TableKind::Racah => "racah",
    };
    let mut report = Report::new(
        "tables",
        seed,
        json!({ "order": order, "which": which_name }),
    );
    let (rendered, golden) = match which {
        TableKind::Table1 => (
            zernike_core::golden::render_table1(order),
            zernike_core::golden::table1_golden(order),
        ),
        TableKind::Racah => (
            zernike_core::golden::render_table2(order).map_err(|e| e.to_string())?,
            zernike_core::golden::table2_golden(order),
        ),
    };
    report.body = Some(rendered.clone());
    match golden {
        Some(expected) => {
            let matches = rendered == expected;
            if !matches {
                for (line, (got, want)) in rendered.lines().zip(expected.lines()).enumerate() {
                    if got != want {
                        report.info(format!("first diff at line {}: got `{got}`, want `{want}`", line + 1));
                        break;
                    }
                }
            }
            report.check(format!("{which_name} order {order} matches bundled golden"), matches);
        }
        None => report.info(format!(
            "warning: no bundled golden for {which_name} at order {order}; generated only"
        )),
    }
    Ok(report)
}

fn run_racah(seed: u64, order: usize) -> Result<Report, String> {
    let mut report = Report::new("racah", seed, json!({ "order": order }));
    let spec = spec_symbolic(order)?;
    let dec = decompose(&spec).map_err(|e| e.to_string())?;
    let mut body = format!("{{L2, L3}} at order {order}:\n");
    for line in layout_lines(&dec) {
        body.push_str(&line);
        body.push('\n');
    }
    report.body = Some(body);
    report.check(
        format!("substitution residual of the order-{order} bracket ansatz is zero"),
        dec.residual.is_zero(),
    );
    Ok(report)
}

fn run_coalgebra_check(seed: u64, max_order: usize) -> Result<Report, String> {
    let mut report = Report::new("coalgebra-check", seed, json!({ "max_order": max_order }));
    for particles in [1usize, 2] {
        let r = build_realization(particles);
        report.check(
            format!("{{J3, J+}} = 2 J+  ({particles} particle)"),
            (&poisson_bracket(&r.j_3, &r.j_plus) - &r.j_plus.scale_rational(&rat(2))).is_zero(),
        );
        report.check(
            format!("{{J3, J-}} = -2 J-  ({particles} particle)"),
            (&poisson_bracket(&r.j_3, &r.j_minus) + &r.j_minus.scale_rational(&rat(2))).is_zero(),
        );
        report.check(
            format!("{{J-, J+}} = 4 J3  ({particles} particle)"),
            (&poisson_bracket(&r.j_minus, &r.j_plus) - &r.j_3.scale_rational(&rat(4))).is_zero(),
        );
    }
    let one = build_realization(1);
    report.check(
        "one-particle Casimir equals l1",
        casimir(&one)
            == zernike_core::phase::PhasePolynomial::constant(ParamPolynomial::symbol(
                ParamSym::Lambda(1),
            )),
    );
    let two = build_realization(2);
    let cas = casimir(&two);
    for (label, j) in [("J3", &two.j_3), ("J+", &two.j_plus), ("J-", &two.j_minus)] {
        report.check(
            format!("{{C2, {label}}} = 0"),
            poisson_bracket(&cas, j).is_zero(),
        );
    }
    let bound = cas
        .substitute_param_rational(ParamSym::Lambda(1), &rat(0))
        .substitute_param_rational(ParamSym::Lambda(2), &rat(0));
    report.check("C2 at l = 0 equals C^2", bound == build_c().pow(2));
    let mut agree = true;
    for n in 1..=max_order {
        let spec = spec_symbolic(n)?;
        agree &= coalgebra_hamiltonian(&spec) == build_hamiltonian(&spec);
    }
    report.check(
        format!("generator-built H_n equals direct H_n for n <= {max_order}"),
        agree,
    );
    let spec = spec_symbolic(max_order.min(4))?;
    report.check(
        "centrifugal extension commutes with C2",
        poisson_bracket(&lambda_hamiltonian(&spec), &cas).is_zero(),
    );
    Ok(report)
}

fn random_complex(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    let r = rng.gen_range(lo..hi);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::new(r * theta.cos(), r * theta.sin())
}

#[allow(clippy::too_many_arguments)]
fn run_transform_check(
    seed: u64,
    kappa: f64,
    order: usize,
    samples: usize,
) -> Result<Report, String> {
    if samples < 1 {
        return Err("sample count must be at least 1".into());
    }
    if kappa.abs() > 1e-14 && order < 2 {
        return Err("curved checks need order >= 2 so that g2 = -kappa can be bound".into());
    }
    let mut report = Report::new(
        "transform-check",
        seed,
        json!({ "kappa": kappa, "order": order, "samples": samples }),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bindings = BTreeMap::new();
    bindings.insert(1, random_complex(&mut rng, 0.3, 1.0));
    if order >= 2 {
        bindings.insert(2, Complex64::new(-kappa, 0.0));
    }
    for n in 3..=order {
        bindings.insert(n, random_complex(&mut rng, 0.02, 0.2));
    }
    let spec = ModelSpec::bound(order, bindings).map_err(|e| e.to_string())?;
    let gamma1 = spec.gamma_value(1).unwrap();
    let h = build_hamiltonian(&spec);
    let params = spec.param_bindings();
    let natural = NaturalForm::new(&spec, kappa).map_err(|e| e.to_string())?;

    let mut dev_chart: f64 = 0.0;
    let mut dev_natural: f64 = 0.0;
    let mut dev_shift: f64 = 0.0;
    let mut dev_sympl: f64 = 0.0;
    for _ in 0..samples {
        let rho = sample_rho(kappa, &mut rng);
        let phi_angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let coords = [Complex64::new(rho, 0.0), Complex64::new(phi_angle, 0.0)];
        let momenta = [
            random_complex(&mut rng, 0.2, 1.0),
            random_complex(&mut rng, 0.2, 1.0),
        ];
        let point = CurvedPoint::new(Chart::GeodesicPolar, coords, momenta, kappa, gamma1)
            .map_err(|e| e.to_string())?;
        let lhs = eval_curved_hamiltonian(&spec, &point).map_err(|e| e.to_string())?;
        let rhs = h
            .eval(&point.to_cartesian().map_err(|e| e.to_string())?.state(), &params)
            .map_err(|e| e.to_string())?;
        dev_chart = dev_chart.max((lhs - rhs).norm() / lhs.norm().max(1.0));

        let shifted = CurvedPoint::new(Chart::ShiftedGeodesicPolar, coords, momenta, kappa, gamma1)
            .map_err(|e| e.to_string())?;
        let lhs_nat = natural.total(rho, momenta[0], momenta[1]);
        let rhs_nat = h
            .eval(
                &shifted.to_cartesian().map_err(|e| e.to_string())?.state(),
                &params,
            )
            .map_err(|e| e.to_string())?;
        dev_natural = dev_natural.max((lhs_nat - rhs_nat).norm() / lhs_nat.norm().max(1.0));

        // Shift substitution applied directly to the polar form.
        let t = tk(kappa, rho).map_err(|e| e.to_string())?;
        let sub_point = CurvedPoint::new(
            Chart::GeodesicPolar,
            coords,
            [momenta[0] - gamma1 / 2.0 * t, momenta[1]],
            kappa,
            gamma1,
        )
        .map_err(|e| e.to_string())?;
        let lhs_shift = eval_curved_hamiltonian(&spec, &sub_point).map_err(|e| e.to_string())?;
        dev_shift = dev_shift.max((lhs_shift - lhs_nat).norm() / lhs_nat.norm().max(1.0));

        for chart in [Chart::Polar, Chart::GeodesicPolar, Chart::ShiftedGeodesicPolar] {
            let p = CurvedPoint::new(chart, coords, momenta, kappa, gamma1)
                .map_err(|e| e.to_string())?;
            dev_sympl = dev_sympl.max(symplectic_deviation(&p).map_err(|e| e.to_string())?);
        }
    }
    let iso = isometry_check(kappa, samples, seed.wrapping_add(1));
    let iso_bracket = iso
        .max_bracket_dev
        .iter()
        .copied()
        .fold(0.0f64, f64::max);

    report.check(
        format!("geodesic polar form vs cartesian, max rel dev {dev_chart:.3e} (tol 1e-10)"),
        dev_chart < 1e-10,
    );
    report.check(
        format!("natural form via shifted chart, max rel dev {dev_natural:.3e} (tol 1e-10)"),
        dev_natural < 1e-10,
    );
    report.check(
        format!("momentum shift equivalence, max rel dev {dev_shift:.3e} (tol 1e-12)"),
        dev_shift < 1e-12,
    );
    report.check(
        format!("chart canonicity JT.W.J = W, max dev {dev_sympl:.3e} (tol 1e-9)"),
        dev_sympl < 1e-9,
    );
    report.check(
        format!("isometry structure relations, max dev {iso_bracket:.3e} (tol 1e-9)"),
        iso_bracket < 1e-9,
    );
    report.check(
        format!(
            "kinetic term equals isometry Casimir, max dev {:.3e} (tol 1e-9)",
            iso.max_casimir_dev
        ),
        iso.max_casimir_dev < 1e-9,
    );
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    seed: u64,
    order: usize,
    omega: f64,
    kappa: f64,
    gamma: &[(usize, Complex64)],
    q0: [Complex64; 2],
    p0: [Complex64; 2],
    tspan: (f64, f64),
    samples: usize,
    rtol: f64,
    atol: f64,
    out: &[PathBuf],
) -> Result<Report, String> {
    let mut bindings: BTreeMap<usize, Complex64> = (1..=order)
        .map(|n| (n, Complex64::new(0.0, 0.0)))
        .collect();
    bindings.insert(1, Complex64::new(0.0, 2.0 * omega));
    if order >= 2 {
        bindings.insert(2, Complex64::new(-kappa, 0.0));
    }
    for &(n, v) in gamma {
        if n > order {
            return Err(format!("gamma index {n} exceeds order {order}"));
        }
        bindings.insert(n, v);
    }
    let gamma_echo: Vec<String> = bindings
        .iter()
        .map(|(n, v)| format!("g{n}={v}"))
        .collect();
    let mut report = Report::new(
        "simulate",
        seed,
        json!({
            "order": order,
            "omega": omega,
            "kappa": kappa,
            "gamma": gamma_echo,
            "tspan": [tspan.0, tspan.1],
            "samples": samples,
            "rtol": rtol,
            "atol": atol,
        }),
    );
    let spec = ModelSpec::bound(order, bindings).map_err(|e| e.to_string())?;
    let problem = FlowProblem {
        spec,
        initial: [q0[0], q0[1], p0[0], p0[1]],
        t_span: tspan,
        samples,
    };
    let tol = Tolerances {
        rel: rtol,
        abs: atol,
    };
    let record = integrate(&problem, tol).map_err(|e| e.to_string())?;
    for (label, drift) in ["H", "C", "I"].iter().zip(record.drift) {
        report.check(
            format!("relative drift of {label} = {drift:.3e} (tol 1e-8)"),
            drift < 1e-8,
        );
    }
    for path in out {
        export_path(&record, path).map_err(|e| e.to_string())?;
        report.info(format!("wrote {}", path.display()));
    }
    Ok(report)
}
