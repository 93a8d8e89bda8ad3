//! Run configuration: JSON schema, validation and derived constants.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::kernel::{zeta_for_alpha, CutoffSchedule, KernelParams};
use crate::measure::GridSpec;
use crate::sim::{InitialLaw, Scheme, SimConfig};

pub const OUT_DIR_ENV: &str = "BOLTZMANN_LAB_OUT";

/// One cutoff schedule. `zeta` and `alpha` are alternatives; with neither,
/// `ζ = ζ_0(ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    /// Filled in by [`RunConfig::materialize`]; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived: Option<CutoffSchedule>,
}

impl ScheduleSpec {
    pub fn new(epsilon: f64) -> Self {
        ScheduleSpec {
            epsilon,
            zeta: None,
            alpha: None,
            eta0: None,
            derived: None,
        }
    }

    fn build(&self, kernel: &KernelParams) -> Result<CutoffSchedule> {
        let zeta = match (self.zeta, self.alpha) {
            (Some(_), Some(_)) => {
                return Err(LabError::config("zeta", "give either zeta or alpha, not both"))
            }
            (Some(z), None) => z,
            (None, a) => {
                let a = a.unwrap_or(0.0);
                if !(a >= 0.0 && a.is_finite()) {
                    return Err(LabError::config("alpha", format!("α = {a} must be ≥ 0")));
                }
                zeta_for_alpha(self.epsilon, kernel.gamma, kernel.nu, a)
            }
        };
        CutoffSchedule::new(kernel, self.epsilon, zeta, self.eta0)
    }
}

fn default_replicas() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub n: usize,
    pub t_end: f64,
    /// Defaults to `[t_end]`.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default)]
    pub replica_offset: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "InitialLaw::maxwellian")]
    pub initial_law: InitialLaw,
    #[serde(default)]
    pub symmetric: bool,
}

fn default_scheme() -> Scheme {
    Scheme::Fictive
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    /// Defaults to `kernel.lambda_prime`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_prime: Option<f64>,
    /// Defaults to `[2, R_99.9]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annulus: Option<(f64, f64)>,
    /// Estimate densities from mollified, confinement-weighted samples.
    #[serde(default)]
    pub weighted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Falls back to `$BOLTZMANN_LAB_OUT`, then `./out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            formats: default_formats(),
        }
    }
}

impl OutputSpec {
    pub fn resolved_dir(&self) -> PathBuf {
        self.dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelParams,
    pub schedules: Vec<ScheduleSpec>,
    pub sim: SimSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn prefixed(e: LabError, prefix: &str) -> LabError {
    match e {
        LabError::Config { key, message } if !key.starts_with(prefix) => {
            let key = if key.starts_with("kernel") { key } else { format!("{prefix}.{key}") };
            LabError::Config { key, message }
        }
        other => other,
    }
}

impl RunConfig {
    /// Validates every section and fills in the derived schedule constants.
    pub fn materialize(mut self) -> Result<Self> {
        self.kernel.validate()?;
        if self.schedules.is_empty() {
            return Err(LabError::config("schedules", "at least one schedule is required"));
        }
        for (i, s) in self.schedules.iter_mut().enumerate() {
            s.derived = Some(s.build(&self.kernel).map_err(|e| prefixed(e, &format!("schedules[{i}]")))?);
        }
        if self.sim.snapshot_times.is_empty() {
            self.sim.snapshot_times = vec![self.sim.t_end];
        }
        if self.sim.replicas == 0 {
            return Err(LabError::config("sim.replicas", "need at least one replica"));
        }
        self.sim_config(0)?.validate().map_err(|e| prefixed(e, "sim"))?;
        if let Some(g) = &self.analysis.grid {
            g.validate()?;
        }
        if let Some(h) = self.analysis.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(LabError::config("analysis.bandwidth", "bandwidth must be positive"));
            }
        }
        if let Some(lp) = self.analysis.lambda_prime {
            if !(lp > 0.0 && lp < 2.0) {
                return Err(LabError::config("analysis.lambda_prime", "λ' must lie in (0, 2)"));
            }
        }
        if let Some((lo, hi)) = self.analysis.annulus {
            if !(lo >= 0.0 && hi > lo) {
                return Err(LabError::config("analysis.annulus", "need 0 ≤ r_min < r_max"));
            }
        }
        Ok(self)
    }

    pub fn schedule(&self, index: usize) -> Result<CutoffSchedule> {
        let spec = self
            .schedules
            .get(index)
            .ok_or_else(|| LabError::config("schedules", format!("no schedule #{index}")))?;
        match spec.derived {
            Some(d) => Ok(d),
            None => spec.build(&self.kernel),
        }
    }

    pub fn all_schedules(&self) -> Result<Vec<CutoffSchedule>> {
        (0..self.schedules.len()).map(|i| self.schedule(i)).collect()
    }

    /// Simulator settings for the first replica under schedule `index`.
    pub fn sim_config(&self, index: usize) -> Result<SimConfig> {
        Ok(SimConfig {
            params: self.kernel,
            schedule: self.schedule(index)?,
            initial_law: self.sim.initial_law.clone(),
            n: self.sim.n,
            t_end: self.sim.t_end,
            snapshot_times: if self.sim.snapshot_times.is_empty() {
                vec![self.sim.t_end]
            } else {
                self.sim.snapshot_times.clone()
            },
            scheme: self.sim.scheme,
            master_seed: self.sim.seed,
            replica: self.sim.replica_offset,
            symmetric: self.sim.symmetric,
        })
    }

    pub fn lambda_prime(&self) -> f64 {
        self.analysis.lambda_prime.unwrap_or(self.kernel.lambda_prime)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a JSON document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RunConfig = serde_json::from_str(text).map_err(|e| LabError::Parse(format!("config: {e}")))?;
    raw.materialize()
}

/// Accepts either inline JSON or a path to a JSON file.
pub fn load_config(source: &str) -> Result<RunConfig> {
    if source.trim_start().starts_with('{') {
        return parse_config(source);
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "kernel": {"nu": 0.05, "gamma": 1.0, "lambda": 1.5, "lambda_prime": 1.0},
        "schedules": [{"epsilon": 0.01}],
        "sim": {"n": 100, "t_end": 1.0}
    }"#;

    fn key_of(e: LabError) -> String {
        match e {
            LabError::Config { key, .. } => key,
            LabError::Parse(m) => m,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn minimal_config_materializes() {
        let c = parse_config(MINIMAL).unwrap();
        let d = c.schedules[0].derived.unwrap();
        assert!((d.gamma_eps - 100f64.ln().powf(d.eta0)).abs() < 1e-12);
        assert!((d.zeta - 0.01f64.powf(2.0 / 0.95)).abs() < 1e-15);
        assert_eq!(c.sim.snapshot_times, vec![1.0]);
        assert!(c.to_json().contains("gamma_eps"));
    }

    #[test]
    fn print_parse_round_trip() {
        let c = parse_config(MINIMAL).unwrap();
        let again = parse_config(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.to_json(), again.to_json());
    }

    #[test]
    fn rejects_bad_nu() {
        let bad = MINIMAL.replace("\"nu\": 0.05", "\"nu\": 0.6");
        let e = parse_config(&bad).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("0<ν<1/2"));
        assert_eq!(key_of(e), "kernel.nu");
    }

    #[test]
    fn rejects_large_epsilon() {
        let bad = MINIMAL.replace("\"epsilon\": 0.01", "\"epsilon\": 0.5");
        let e = parse_config(&bad).unwrap_err();
        assert_eq!(key_of(e), "schedules[0].epsilon");
    }

    #[test]
    fn rejects_eta0_outside_interval() {
        let bad = MINIMAL.replace("\"epsilon\": 0.01", "\"epsilon\": 0.01, \"eta0\": 0.5");
        let e = parse_config(&bad).unwrap_err();
        assert!(e.to_string().contains("(1/λ, 1/(γ∨ν))"));
        assert_eq!(key_of(e), "schedules[0].eta0");
    }

    #[test]
    fn unknown_and_missing_keys_are_named() {
        let bad = MINIMAL.replace("\"t_end\"", "\"t_stop\"");
        let msg = key_of(parse_config(&bad).unwrap_err());
        assert!(msg.contains("t_stop"), "{msg}");
        let bad = MINIMAL.replace("\"n\": 100, ", "");
        let msg = key_of(parse_config(&bad).unwrap_err());
        assert!(msg.contains("`n`"), "{msg}");
    }

    #[test]
    fn zeta_and_alpha_are_exclusive() {
        let bad = MINIMAL.replace("\"epsilon\": 0.01", "\"epsilon\": 0.01, \"zeta\": 0.1, \"alpha\": 1.0");
        assert_eq!(key_of(parse_config(&bad).unwrap_err()), "schedules[0].zeta");
        let ok = MINIMAL.replace("\"epsilon\": 0.01", "\"epsilon\": 0.01, \"alpha\": 1.0");
        let c = parse_config(&ok).unwrap();
        let z = c.schedules[0].derived.unwrap().zeta;
        assert!((z - 0.01f64.powf(3.0 / 0.95)).abs() < 1e-15);
    }

    #[test]
    fn snapshot_times_validated() {
        let bad = MINIMAL.replace("\"t_end\": 1.0", "\"t_end\": 1.0, \"snapshot_times\": [0.5, 0.2]");
        assert_eq!(key_of(parse_config(&bad).unwrap_err()), "sim.snapshot_times");
    }

    #[test]
    fn inline_and_file_sources_agree() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, MINIMAL).unwrap();
        assert_eq!(load_config(p.to_str().unwrap()).unwrap(), load_config(MINIMAL).unwrap());
        assert!(matches!(load_config("/no/such/file.json"), Err(LabError::Io { .. })));
    }
}
