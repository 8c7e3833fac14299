//! `verify` mode: cross-check the analytic paths against their independent
//! counterparts and report the maximum deviation per check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cvct::chain;
use cvct::gaussian::{gaussian_product, Gaussian1D};
use cvct::measurement::{self, SelectivityWindow};
use cvct::oracle;
use cvct::states::{SqueezedCoherent, SqueezedVacuum};

use crate::output::{Table, Value};
use crate::run::RunSettings;
use crate::scenario::Scenario;
use crate::CliError;

struct Check {
    name: &'static str,
    points: usize,
    max_dev: f64,
    tolerance: f64,
}

fn distribution_check() -> Result<Check, CliError> {
    let cases = [(0.3, 1.2, -0.4), (-0.8, 2.4, 0.6), (0.5, 0.9, 0.0)];
    let mut max_dev: f64 = 0.0;
    let mut points = 0;
    for &(r1, theta, r2) in &cases {
        let s = SqueezedCoherent::new(0.4, -0.7, r1, theta)?;
        let vac = SqueezedVacuum::new(r2)?;
        for i in 0..11 {
            let p1 = -6.0 + 12.0 * i as f64 / 10.0;
            let quadrature = measurement::outcome_distribution(&s, &vac, p1)?;
            let closed = measurement::outcome_distribution_closed(&s, &vac, p1);
            let scale = quadrature.abs().max(closed.abs()).max(f64::MIN_POSITIVE);
            max_dev = max_dev.max((quadrature - closed).abs() / scale);
            points += 1;
        }
    }
    Ok(Check {
        name: "distribution-closed-vs-quadrature",
        points,
        max_dev,
        tolerance: 1e-8,
    })
}

fn erf_check() -> Result<Check, CliError> {
    let s = SqueezedCoherent::new(0.7, -0.4, 0.3, 1.1)?;
    let mut max_dev: f64 = 0.0;
    let mut points = 0;
    for vs2 in [0.8, 1.0, 1.6] {
        let vac = SqueezedVacuum::new(0.5 * f64::ln(vs2))?;
        for width in [0.5, 1.5, 3.0] {
            let window = SelectivityWindow::new(-s.q0(), width)?;
            let quadrature = measurement::teleport_probability(&s, &vac, &window)?;
            let closed = measurement::teleport_probability_closed(&s, &vac, width)?;
            max_dev = max_dev.max((quadrature - closed).abs());
            points += 1;
        }
    }
    Ok(Check {
        name: "erf-probability-law",
        points,
        max_dev,
        tolerance: 1e-6,
    })
}

fn gaussian_product_check() -> Result<Check, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let factors: Vec<(f64, f64)> = (0..50)
        .map(|_| (rng.gen_range(0.05..4.0), rng.gen_range(-3.0..3.0)))
        .collect();
    let product = gaussian_product(&factors)?;
    let mut max_dev: f64 = 0.0;
    let mut points = 0;
    for i in 0..=120 {
        let q = -6.0 + 12.0 * i as f64 / 120.0;
        let mut log_direct = 0.0;
        for &(v, c) in &factors {
            log_direct += Gaussian1D::new(c, v, 0.0)?.log_pdf(q);
        }
        let log_composed = product.scale_log + product.composite.log_pdf(q);
        max_dev = max_dev.max((log_direct - log_composed).abs());
        points += 1;
    }
    Ok(Check {
        name: "gaussian-product-grid",
        points,
        max_dev,
        tolerance: 1e-10,
    })
}

fn chain_dual_path_check() -> Result<Check, CliError> {
    let spec = chain::uniform_fidelity_scenario(5, -0.3, std::f64::consts::PI, 0.4, -0.4)?;
    let reduced = chain::chain_fidelity(&spec)?;
    let raw = chain::chain_fidelity_raw(&spec)?;
    Ok(Check {
        name: "chain-dual-path",
        points: 1,
        max_dev: (raw - reduced).abs() / reduced.abs().max(f64::MIN_POSITIVE),
        tolerance: 1e-10,
    })
}

fn oracle_checks(grid_points: usize) -> Result<(Check, Check), CliError> {
    let cases = [
        (0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        (0.6, -0.4, 0.3, 1.9, 0.25, -0.2),
        (-0.5, 0.8, -0.6, 2.6, 0.5, 0.7),
    ];
    let mut max_f: f64 = 0.0;
    for &(q0, p0, r1, theta, r2, p1) in &cases {
        let s = SqueezedCoherent::new(q0, p0, r1, theta)?;
        let vac = SqueezedVacuum::new(r2)?;
        let payload = oracle::payload_grid(&s, grid_points)?;
        let grid = oracle::oracle_fidelity(&payload, &vac, p1)?;
        let closed = cvct::teleport::fidelity_closed(&s, &vac, p1);
        max_f = max_f.max((grid - closed).abs());
    }

    let s = SqueezedCoherent::new(0.5, -0.2, 0.25, 0.8)?;
    let vac = SqueezedVacuum::new(0.2)?;
    let payload = oracle::payload_grid(&s, grid_points)?;
    let wire = oracle::prepare_wire_input(&payload)?;
    let window = SelectivityWindow::new(-0.5, 1.6)?;
    let grid_p = oracle::oracle_teleport_probability(&wire, &vac, &window)?;
    let analytic_p = measurement::teleport_probability(&s, &vac, &window)?;

    Ok((
        Check {
            name: "oracle-fidelity",
            points: cases.len(),
            max_dev: max_f,
            tolerance: 1e-4,
        },
        Check {
            name: "oracle-probability",
            points: 1,
            max_dev: (grid_p - analytic_p).abs(),
            tolerance: 1e-4,
        },
    ))
}

pub fn run(scenario: &Scenario, settings: &RunSettings) -> Result<(Table, usize), CliError> {
    let mut checks = vec![
        distribution_check()?,
        erf_check()?,
        gaussian_product_check()?,
        chain_dual_path_check()?,
    ];
    let (fidelity, probability) = oracle_checks(settings.grid_points)?;
    checks.push(fidelity);
    checks.push(probability);

    let mut rows = Vec::with_capacity(checks.len());
    let mut failures = 0;
    for check in &checks {
        let tolerance = settings.tol.unwrap_or(check.tolerance);
        let pass = check.max_dev <= tolerance;
        if !pass {
            failures += 1;
        }
        rows.push(vec![
            Value::Text(check.name.to_string()),
            Value::Int(check.points as i64),
            Value::Num(check.max_dev),
            Value::Num(tolerance),
            Value::Bool(pass),
        ]);
    }
    let table = Table {
        config: scenario.effective_config(),
        columns: ["check", "points", "max_dev", "tolerance", "pass"]
            .map(str::to_string)
            .to_vec(),
        rows,
    };
    Ok((table, failures))
}
