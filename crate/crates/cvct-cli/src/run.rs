//! Scenario execution: expand the sweep axis, compute one row per point in a
//! worker pool (output serialized in sweep order), and assemble the table.

use std::collections::BTreeMap;

use rayon::prelude::*;

use cvct::chain::{self, Stage};
use cvct::measurement::{self, SelectivityWindow};
use cvct::oracle;
use cvct::states::{SqueezedCoherent, SqueezedVacuum};
use cvct::teleport;

use crate::output::{Table, Value};
use crate::scenario::{Mode, Scenario};
use crate::verify;
use crate::CliError;

pub struct RunOutput {
    pub table: Table,
    pub verify_failures: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub grid_points: usize,
    pub tol: Option<f64>,
}

fn get(params: &BTreeMap<String, f64>, key: &str) -> f64 {
    *params
        .get(key)
        .unwrap_or_else(|| panic!("parameter '{key}' has no value"))
}

fn get_or(params: &BTreeMap<String, f64>, key: &str, fallback: f64) -> f64 {
    params.get(key).copied().unwrap_or(fallback)
}

fn get_count(params: &BTreeMap<String, f64>, key: &str) -> Result<usize, CliError> {
    let raw = get(params, key);
    let rounded = raw.round();
    if !(rounded >= 1.0 && rounded <= 1_000_000.0) {
        return Err(CliError::Config(format!(
            "parameter '{key}' must be a positive count, got {raw}"
        )));
    }
    Ok(rounded as usize)
}

fn payload(params: &BTreeMap<String, f64>) -> Result<SqueezedCoherent, CliError> {
    let r1 = get_or(params, "r", get(params, "r1"));
    Ok(SqueezedCoherent::new(
        get(params, "q0"),
        get(params, "p0"),
        r1,
        get(params, "theta"),
    )?)
}

fn ancilla(params: &BTreeMap<String, f64>) -> Result<SqueezedVacuum, CliError> {
    let r2 = get_or(params, "r", get(params, "r2"));
    Ok(SqueezedVacuum::new(r2)?)
}

/// Echoed parameter columns: every key of the effective map, in order.
fn param_columns(params: &BTreeMap<String, f64>) -> Vec<String> {
    params.keys().cloned().collect()
}

fn param_values(params: &BTreeMap<String, f64>) -> Vec<Value> {
    params
        .iter()
        .map(|(key, v)| {
            if key == "n" || key.ends_with("steps") {
                Value::Int(v.round() as i64)
            } else {
                Value::Num(*v)
            }
        })
        .collect()
}

fn single_prob_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let s = payload(params)?;
    let vac = ancilla(params)?;
    let width = get(params, "width");
    let center = get_or(params, "center", -s.q0());
    let window = SelectivityWindow::new(center, width)?;
    let p_tel = measurement::teleport_probability(&s, &vac, &window)?;
    let p_tel_erf = measurement::teleport_probability_closed(&s, &vac, width)?;
    let mut row = param_values(params);
    row.push(Value::Num(center));
    row.push(Value::Num(measurement::sigma_squared(&s, &vac)));
    row.push(Value::Num(p_tel));
    row.push(Value::Num(p_tel_erf));
    Ok(row)
}

fn single_fidelity_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let s = payload(params)?;
    let vac = ancilla(params)?;
    let p1 = match (params.get("x0"), params.get("p1")) {
        (Some(x0), _) => x0 - s.q0(),
        (None, Some(p1)) => *p1,
        (None, None) => -s.q0(),
    };
    let result = teleport::single_shot(&s, &vac, p1)?;
    let quadrature = teleport::fidelity(&s, &vac, p1)?;
    let mut row = param_values(params);
    row.push(Value::Num(p1));
    row.push(Value::Num(result.effective_displacement));
    row.push(Value::Num(result.probability_density));
    row.push(Value::Num(result.fidelity));
    row.push(Value::Num(quadrature));
    Ok(row)
}

fn avg_fidelity_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let s = payload(params)?;
    let vac = ancilla(params)?;
    let width = get(params, "width");
    let center = get_or(params, "center", -s.q0());
    let window = SelectivityWindow::new(center, width)?;
    let avg = teleport::average_fidelity(&s, &vac, &window)?;
    let avg_norm = teleport::average_fidelity_normalized(&s, &vac, &window)?;
    let p_tel = measurement::teleport_probability(&s, &vac, &window)?;
    let mut row = param_values(params);
    row.push(Value::Num(center));
    row.push(Value::Num(p_tel));
    row.push(Value::Num(avg));
    row.push(Value::Num(avg_norm));
    Ok(row)
}

fn chain_stages(
    params: &BTreeMap<String, f64>,
    n: usize,
    last_window: Option<SelectivityWindow>,
) -> Result<Vec<Stage>, CliError> {
    let vac = ancilla(params)?;
    let outcome_default = match last_window {
        Some(_) => get(params, "q0"),
        None => -get(params, "q0"),
    };
    let outcome = get_or(params, "outcome", outcome_default);
    Ok(match last_window {
        Some(window) => {
            let mut stages = vec![Stage::fixed(vac, outcome); n - 1];
            stages.push(Stage::windowed(vac, window));
            stages
        }
        None => vec![Stage::fixed(vac, outcome); n],
    })
}

fn chain_prob_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let s = payload(params)?;
    let n = get_count(params, "n")?;
    let width = get(params, "width");
    let q0 = s.q0();
    let default_center = if n == 1 {
        -q0
    } else {
        q0 * (n as f64 - 2.0) / n as f64
    };
    let center = get_or(params, "center", default_center);
    let window = SelectivityWindow::new(center, width)?;
    let stages = chain_stages(params, n, Some(window))?;
    let spec = chain::ChainSpec::new(s, stages)?;
    let p = chain::chain_probability(&spec)?;
    let mut row = param_values(params);
    row.push(Value::Num(center));
    row.push(Value::Num(p));
    Ok(row)
}

fn chain_fidelity_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let s = payload(params)?;
    let n = get_count(params, "n")?;
    let stages = chain_stages(params, n, None)?;
    let spec = chain::ChainSpec::new(s, stages.clone())?;
    let f = chain::chain_fidelity(&spec)?;
    let f_closed = chain::chain_fidelity_closed(&s, &stages)?;
    let composite = chain::composite_envelope(&stages)?;
    let mut row = param_values(params);
    row.push(Value::Num(s.q0() + composite.net_center));
    row.push(Value::Num(f));
    row.push(Value::Num(f_closed));
    Ok(row)
}

fn optimize_center_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let s = payload(params)?;
    let n = get_count(params, "n")?;
    let width = get(params, "width");
    let placeholder = SelectivityWindow::new(0.0, width)?;
    let stages = chain_stages(params, n, Some(placeholder))?;
    let spec = chain::ChainSpec::new(s, stages)?;
    let center = chain::optimize_chain_center(&spec, width)?;
    let optimal = SelectivityWindow::new(center, width)?;
    let stages = chain_stages(params, n, Some(optimal))?;
    let spec = chain::ChainSpec::new(s, stages)?;
    let p = chain::chain_probability(&spec)?;
    let mut row = param_values(params);
    row.push(Value::Num(center));
    row.push(Value::Num(p));
    Ok(row)
}

fn optimize_theta_row(params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    let n = get_count(params, "n")?;
    let r = get(params, "r");
    let theta = chain::optimize_theta(n, r)?;
    let spec = chain::uniform_fidelity_scenario(n, r, theta, 0.0, 0.0)?;
    let fidelity = chain::chain_fidelity(&spec)?;
    let mut row = param_values(params);
    row.push(Value::Num(theta));
    row.push(Value::Num(fidelity));
    Ok(row)
}

fn output_columns(mode: Mode) -> Vec<&'static str> {
    match mode {
        Mode::SingleProb => vec!["center_eff", "sigma_sq", "p_tel", "p_tel_erf"],
        Mode::SingleFidelity => vec!["p1_eff", "x0", "p_density", "fidelity", "fidelity_quad"],
        Mode::AvgFidelity => vec!["center_eff", "p_tel", "f_avg", "f_avg_norm"],
        Mode::ChainProb => vec!["center_eff", "p_tel"],
        Mode::ChainFidelity => vec!["x0", "fidelity", "fidelity_closed"],
        Mode::OptimizeCenter => vec!["center_opt", "p_tel_opt"],
        Mode::OptimizeTheta => vec!["theta_opt", "fidelity_opt"],
        Mode::Wigner => vec![],
        Mode::Verify => vec![],
    }
}

fn scenario_row(mode: Mode, params: &BTreeMap<String, f64>) -> Result<Vec<Value>, CliError> {
    match mode {
        Mode::SingleProb => single_prob_row(params),
        Mode::SingleFidelity => single_fidelity_row(params),
        Mode::AvgFidelity => avg_fidelity_row(params),
        Mode::ChainProb => chain_prob_row(params),
        Mode::ChainFidelity => chain_fidelity_row(params),
        Mode::OptimizeCenter => optimize_center_row(params),
        Mode::OptimizeTheta => optimize_theta_row(params),
        Mode::Wigner | Mode::Verify => unreachable!("handled separately"),
    }
}

fn wigner_table(scenario: &Scenario, settings: &RunSettings) -> Result<Table, CliError> {
    let params = &scenario.params;
    let s = payload(params)?;
    let vac = ancilla(params)?;
    let payload_state = oracle::payload_grid(&s, settings.grid_points)?;
    let wire = oracle::prepare_wire_input(&payload_state)?;

    let q_steps = get_count(params, "qsteps")?.max(2);
    let p_steps = get_count(params, "psteps")?.max(2);
    let (q_lo, q_hi) = (get(params, "qmin"), get(params, "qmax"));
    let (p_lo, p_hi) = (get(params, "pmin"), get(params, "pmax"));
    if !(q_lo < q_hi && p_lo < p_hi) {
        return Err(CliError::Config("wigner lattice bounds must be increasing".into()));
    }

    let mut columns = param_columns(params);
    columns.extend(["q", "p", "w"].map(str::to_string));
    let mut rows = Vec::with_capacity(q_steps * p_steps);
    for i in 0..q_steps {
        let q = q_lo + (q_hi - q_lo) * i as f64 / (q_steps - 1) as f64;
        for j in 0..p_steps {
            let p = p_lo + (p_hi - p_lo) * j as f64 / (p_steps - 1) as f64;
            let w = oracle::wigner_cluster_mode1(&wire, &vac, q, p)?;
            let mut row = param_values(params);
            row.extend([Value::Num(q), Value::Num(p), Value::Num(w)]);
            rows.push(row);
        }
    }
    Ok(Table {
        config: scenario.effective_config(),
        columns,
        rows,
    })
}

pub fn run_scenario(scenario: &Scenario, settings: &RunSettings) -> Result<RunOutput, CliError> {
    if matches!(scenario.mode, Mode::Wigner | Mode::Verify) && scenario.sweep.is_some() {
        return Err(CliError::Config(format!(
            "mode {} does not support a sweep axis",
            scenario.mode
        )));
    }
    match scenario.mode {
        Mode::Verify => {
            let (table, failures) = verify::run(scenario, settings)?;
            Ok(RunOutput {
                table,
                verify_failures: failures,
            })
        }
        Mode::Wigner => Ok(RunOutput {
            table: wigner_table(scenario, settings)?,
            verify_failures: 0,
        }),
        mode => {
            let points: Vec<BTreeMap<String, f64>> = match &scenario.sweep {
                None => vec![scenario.params.clone()],
                Some(sweep) => sweep
                    .values()
                    .into_iter()
                    .map(|v| {
                        let mut params = scenario.params.clone();
                        params.insert(sweep.key.to_string(), v);
                        params
                    })
                    .collect(),
            };
            let rows: Result<Vec<Vec<Value>>, CliError> = points
                .par_iter()
                .map(|params| scenario_row(mode, params))
                .collect();
            let mut columns = param_columns(&points[0]);
            columns.extend(output_columns(mode).into_iter().map(str::to_string));
            Ok(RunOutput {
                table: Table {
                    config: scenario.effective_config(),
                    columns,
                    rows: rows?,
                },
                verify_failures: 0,
            })
        }
    }
}
