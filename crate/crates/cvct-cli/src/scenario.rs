//! Scenario definition: mode, parameters with per-mode defaults, and an
//! optional sweep axis. Scenario files are flat JSON objects whose keys are
//! the parameter names plus `mode` and `sweep`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    SingleProb,
    SingleFidelity,
    AvgFidelity,
    ChainProb,
    ChainFidelity,
    OptimizeCenter,
    OptimizeTheta,
    Wigner,
    Verify,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, CliError> {
        Ok(match s {
            "single-prob" => Mode::SingleProb,
            "single-fidelity" => Mode::SingleFidelity,
            "avg-fidelity" => Mode::AvgFidelity,
            "chain-prob" => Mode::ChainProb,
            "chain-fidelity" => Mode::ChainFidelity,
            "optimize-center" => Mode::OptimizeCenter,
            "optimize-theta" => Mode::OptimizeTheta,
            "wigner" => Mode::Wigner,
            "verify" => Mode::Verify,
            other => {
                return Err(CliError::Config(format!(
                    "unknown mode '{other}' (expected one of: single-prob, single-fidelity, \
                     avg-fidelity, chain-prob, chain-fidelity, optimize-center, optimize-theta, \
                     wigner, verify)"
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::SingleProb => "single-prob",
            Mode::SingleFidelity => "single-fidelity",
            Mode::AvgFidelity => "avg-fidelity",
            Mode::ChainProb => "chain-prob",
            Mode::ChainFidelity => "chain-fidelity",
            Mode::OptimizeCenter => "optimize-center",
            Mode::OptimizeTheta => "optimize-theta",
            Mode::Wigner => "wigner",
            Mode::Verify => "verify",
        }
    }

    /// Parameter names and their defaults for this mode. `None` means the
    /// default is derived from other parameters at run time.
    pub fn parameters(&self) -> Vec<(&'static str, Option<f64>)> {
        // `r` is the matched-squeezing alias: when set it overrides both
        // r1 (payload) and r2 (ancilla), the r1 = r2 = r scenario of the
        // fidelity and chain figures.
        let state = |q0: f64| {
            vec![
                ("q0", Some(q0)),
                ("p0", Some(0.0)),
                ("r1", Some(0.0)),
                ("r2", Some(0.0)),
                ("r", None),
                ("theta", Some(0.0)),
            ]
        };
        match self {
            Mode::SingleProb => {
                let mut p = state(0.0);
                p.push(("width", Some(1.0)));
                p.push(("center", None)); // -q0
                p
            }
            Mode::SingleFidelity => {
                let mut p = state(0.0);
                p.push(("p1", None)); // -q0, i.e. X0 = 0
                p.push(("x0", None)); // overrides p1 when given
                p
            }
            Mode::AvgFidelity => {
                let mut p = state(0.0);
                p.push(("width", Some(1.0)));
                p.push(("center", None)); // -q0
                p
            }
            Mode::ChainProb => {
                let mut p = state(1.0);
                p.push(("n", Some(2.0)));
                p.push(("width", Some(1.0)));
                p.push(("center", None)); // q0 (n-2)/n
                p.push(("outcome", None)); // q0
                p
            }
            Mode::ChainFidelity => {
                let mut p = state(1.0);
                // the canonical chain scenario peaks at theta = pi
                p.retain(|(k, _)| *k != "theta");
                p.push(("theta", Some(std::f64::consts::PI)));
                p.push(("n", Some(2.0)));
                p.push(("outcome", None)); // -q0, i.e. X0 = 0
                p
            }
            Mode::OptimizeCenter => {
                let mut p = state(1.0);
                p.push(("n", Some(1.0)));
                p.push(("width", Some(0.5)));
                p.push(("outcome", None)); // q0
                p
            }
            Mode::OptimizeTheta => vec![("n", Some(1.0)), ("r", Some(-0.5))],
            Mode::Wigner => {
                let mut p = state(0.0);
                p.push(("qmin", Some(-5.0)));
                p.push(("qmax", Some(5.0)));
                p.push(("qsteps", Some(41.0)));
                p.push(("pmin", Some(-5.0)));
                p.push(("pmax", Some(5.0)));
                p.push(("psteps", Some(41.0)));
                p
            }
            Mode::Verify => vec![],
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub key: &'static str,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|i| self.from + (self.to - self.from) * i as f64 / (self.steps - 1) as f64)
            .collect()
    }

    pub fn encode(&self) -> String {
        format!("{}:{}:{}:{}", self.key, self.from, self.to, self.steps)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub mode: Mode,
    pub params: BTreeMap<String, f64>,
    pub sweep: Option<SweepSpec>,
}

fn intern_key(mode: Mode, key: &str) -> Result<&'static str, CliError> {
    mode.parameters()
        .iter()
        .map(|(k, _)| *k)
        .find(|k| *k == key)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown parameter '{key}' for mode {} (known: {})",
                mode.name(),
                mode.parameters()
                    .iter()
                    .map(|(k, _)| *k)
                    .collect::<Vec<_>>()
                    .join(", ")
            ))
        })
}

impl Scenario {
    pub fn new(
        mode: Mode,
        raw_params: &[(String, f64)],
        sweep: Option<(String, f64, f64, usize)>,
    ) -> Result<Self, CliError> {
        let mut params = BTreeMap::new();
        // defaults first, then explicit values over them
        for (key, default) in mode.parameters() {
            if let Some(v) = default {
                params.insert(key.to_string(), v);
            }
        }
        for (key, value) in raw_params {
            let key = intern_key(mode, key)?;
            if !value.is_finite() {
                return Err(CliError::Config(format!("parameter '{key}' must be finite")));
            }
            params.insert(key.to_string(), *value);
        }
        let sweep = match sweep {
            None => None,
            Some((key, from, to, steps)) => {
                let key = intern_key(mode, &key)?;
                if steps < 2 {
                    return Err(CliError::Config("sweep needs at least 2 steps".into()));
                }
                if !(from.is_finite() && to.is_finite()) {
                    return Err(CliError::Config("sweep bounds must be finite".into()));
                }
                Some(SweepSpec {
                    key,
                    from,
                    to,
                    steps,
                })
            }
        };
        Ok(Scenario {
            mode,
            params,
            sweep,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }

    /// The key = value block echoed into every output, sufficient to
    /// reconstruct the scenario.
    pub fn effective_config(&self) -> Vec<(String, String)> {
        let mut out = vec![("mode".to_string(), self.mode.name().to_string())];
        for (k, v) in &self.params {
            out.push((k.clone(), format!("{v}")));
        }
        if let Some(sweep) = &self.sweep {
            out.push(("sweep".to_string(), sweep.encode()));
        }
        out
    }
}

/// Parse `key:from:to:steps`.
pub fn parse_sweep_arg(s: &str) -> Result<(String, f64, f64, usize), CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(CliError::Config(format!(
            "sweep '{s}' must have the form key:from:to:steps"
        )));
    }
    let from: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Config(format!("sweep 'from' is not a number: {}", parts[1])))?;
    let to: f64 = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("sweep 'to' is not a number: {}", parts[2])))?;
    let steps: usize = parts[3]
        .parse()
        .map_err(|_| CliError::Config(format!("sweep 'steps' is not an integer: {}", parts[3])))?;
    Ok((parts[0].to_string(), from, to, steps))
}

/// Parse `key=value`.
pub fn parse_param_arg(s: &str) -> Result<(String, f64), CliError> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("parameter '{s}' must have the form key=value")))?;
    let value: f64 = value
        .parse()
        .map_err(|_| CliError::Config(format!("parameter '{key}' has a non-numeric value: {value}")))?;
    Ok((key.to_string(), value))
}

/// Load a scenario file: a flat JSON object with `mode`, parameter keys and
/// an optional `sweep` string. CLI-level parameters override file values.
pub fn load_scenario_file(
    path: &Path,
    mode_override: Option<Mode>,
    cli_params: &[(String, f64)],
    cli_sweep: Option<(String, f64, f64, usize)>,
) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!(
            "{} is not valid JSON (line {}, column {})",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let object = value
        .as_object()
        .ok_or_else(|| CliError::Config(format!("{} must hold a JSON object", path.display())))?;

    let mode = match mode_override {
        Some(mode) => mode,
        None => {
            let raw = object
                .get("mode")
                .and_then(|v| v.as_str())
                .ok_or_else(|| CliError::Config("scenario file is missing 'mode'".into()))?;
            Mode::parse(raw)?
        }
    };

    let mut params: Vec<(String, f64)> = Vec::new();
    let mut sweep = None;
    for (key, value) in object {
        match key.as_str() {
            "mode" => {}
            "sweep" => {
                let raw = value.as_str().ok_or_else(|| {
                    CliError::Config("scenario 'sweep' must be a key:from:to:steps string".into())
                })?;
                sweep = Some(parse_sweep_arg(raw)?);
            }
            _ => {
                let number = value.as_f64().ok_or_else(|| {
                    CliError::Config(format!("scenario key '{key}' must be numeric"))
                })?;
                // reject unknown keys with their name
                intern_key(mode, key)?;
                params.push((key.clone(), number));
            }
        }
    }
    params.extend_from_slice(cli_params);
    let sweep = cli_sweep.or(sweep);
    Scenario::new(mode, &params, sweep)
}
