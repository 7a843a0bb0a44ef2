//! Per-command option records. One struct serves as the clap flag set and as
//! the JSON config schema; resolution layers defaults, then the config file,
//! then explicit flags.

use std::fs;
use std::path::Path;

use clap::Args;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BasisOpts {
    /// Verblunsky family: zero | constant:<a> | decay:<c>:<p> | file:<path> | weight:<kind>
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<String>,
    /// Degree of the basis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Print the regularity table (epsilon_k and the Nevai proxy) instead of kappa and alpha.
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<bool>,
    /// Write `<out>.json` as well.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl BasisOpts {
    pub fn defaults() -> Self {
        Self {
            alphas: Some("zero".into()),
            n: Some(20),
            report: Some(false),
            out: None,
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct KernelOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<String>,
    /// Kernel order (sum over j = 0..=n).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// First point as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    /// Second point as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    /// direct | cd | both
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl KernelOpts {
    pub fn defaults() -> Self {
        Self {
            alphas: Some("zero".into()),
            n: Some(20),
            z: Some("0,0".into()),
            w: Some("0,0".into()),
            method: Some("both".into()),
            out: None,
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntensityOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<String>,
    /// Second point; when given the two-point density is reported.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    /// Also print the large-n limit.
    #[arg(long, num_args = 0, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl IntensityOpts {
    pub fn defaults() -> Self {
        Self {
            alphas: Some("zero".into()),
            n: Some(20),
            z: Some("0,0".into()),
            w: None,
            limit: Some(false),
            out: None,
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// gaussian | uniform_disk | quaternary
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// annulus:<s>:<t> | sector:<r>:<alpha>:<beta>
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output prefix: writes `<out>.counts.csv` and `<out>.summary.json`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl SimulateOpts {
    pub fn defaults() -> Self {
        Self {
            alphas: Some("zero".into()),
            n: Some(100),
            model: Some("gaussian".into()),
            region: Some("annulus:0:0.5".into()),
            trials: Some(1000),
            seed: Some(0),
            out: Some("opucz_run".into()),
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceOpts {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphas: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// A sector region.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
    /// Strictly increasing degrees, comma separated.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ns: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Output prefix: writes `<out>.convergence.csv`, `<out>.convergence.svg`, `<out>.summary.json`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ConvergenceOpts {
    pub fn defaults() -> Self {
        Self {
            alphas: Some("zero".into()),
            model: Some("gaussian".into()),
            region: Some("sector:0.5:0:pi/2".into()),
            ns: Some("25,50,100,200".into()),
            trials: Some(1000),
            seed: Some(0),
            out: Some("opucz_convergence".into()),
        }
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VarianceOpts {
    /// Inner radius.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    /// Outer radius.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// closed | series | quadrature | all
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    /// Series tail tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Quadrature refinement target.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl VarianceOpts {
    pub fn defaults() -> Self {
        Self {
            s: Some(0.0),
            t: Some(0.5),
            method: Some("closed".into()),
            tol: Some(1e-12),
            target: Some(1e-8),
            out: None,
        }
    }
}

fn object(v: Value, what: &str) -> Result<Map<String, Value>, CliError> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Usage(format!("--config: {what} must be a JSON object"))),
    }
}

/// Defaults, overlaid by the config file, overlaid by explicit flags.
///
/// A config file may be a bare option object or any JSON object carrying one
/// under `"config"` (such as a summary written by an earlier run).
pub fn resolve<T>(flags: &T, defaults: T, config: Option<&Path>) -> Result<T, CliError>
where
    T: Serialize + DeserializeOwned,
{
    let to_map = |t: &T| object(serde_json::to_value(t).expect("options serialize"), "options");
    let mut merged = to_map(&defaults)?;
    if let Some(path) = config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("--config: cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("--config: {} is not valid JSON: {e}", path.display())))?;
        let mut file = object(value, "the file")?;
        if let Some(inner) = file.remove("config") {
            file = object(inner, "the \"config\" entry")?;
        }
        merged.extend(file);
    }
    merged.extend(to_map(flags)?);
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("--config: {e}")))
}
