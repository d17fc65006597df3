use crate::composition::CompositionScheme;
use crate::error::{Error, Result};
use crate::maps::{LinearPhaseMap, MapKind};
use crate::nonham::{OdeMethod, OdeScheme};
use crate::problems::{SchwarzschildParams, VdpParams};
use crate::reference::{ImplicitMidpointConfig, OracleConfig};
use crate::splitting::{DriverMode, ExtendedMethod, Scheme};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemId {
    Schwarzschild,
    Vdp,
    Harmonic,
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "schwarzschild" | "geodesic" => Ok(Self::Schwarzschild),
            "vdp" | "van-der-pol" | "vanderpol" => Ok(Self::Vdp),
            "harmonic" | "oscillator" => Ok(Self::Harmonic),
            _ => Err(Error::Unknown {
                kind: "problem",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Schwarzschild => "schwarzschild",
            Self::Vdp => "vdp",
            Self::Harmonic => "harmonic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodId {
    /// A catalog leapfrog on the extended Hamiltonian phase space.
    Extended,
    Method1,
    Method2,
    ImplicitMidpoint,
    Oracle,
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "extended" | "leapfrog" => Ok(Self::Extended),
            "method1" | "1" => Ok(Self::Method1),
            "method2" | "2" => Ok(Self::Method2),
            "implicit-midpoint" | "midpoint" | "im" => Ok(Self::ImplicitMidpoint),
            "oracle" | "reference" => Ok(Self::Oracle),
            _ => Err(Error::Unknown {
                kind: "method",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Extended => "extended",
            Self::Method1 => "method1",
            Self::Method2 => "method2",
            Self::ImplicitMidpoint => "implicit-midpoint",
            Self::Oracle => "oracle",
        })
    }
}

/// Step size in problem time units or in multiples of the problem period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSize {
    Absolute(f64),
    Periods(f64),
}

impl StepSize {
    pub fn resolve(self, period: f64) -> f64 {
        match self {
            Self::Absolute(h) => h,
            Self::Periods(f) => f * period,
        }
    }

    fn value(self) -> f64 {
        match self {
            Self::Absolute(v) | Self::Periods(v) => v,
        }
    }
}

impl FromStr for StepSize {
    type Err = Error;

    /// `"0.02"` is absolute, `"0.02P"` is a fraction of the period.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (num, periods) = match t.strip_suffix(['P', 'p']) {
            Some(rest) => (rest.trim(), true),
            None => (t, false),
        };
        let v: f64 = num
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("cannot parse step size `{s}`")))?;
        Ok(if periods {
            Self::Periods(v)
        } else {
            Self::Absolute(v)
        })
    }
}

/// Run length in problem time units or in periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Duration {
    Time(f64),
    Periods(f64),
}

impl Duration {
    pub fn resolve(self, period: f64) -> f64 {
        match self {
            Self::Time(t) => t,
            Self::Periods(n) => n * period,
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemId,
    pub method: MethodId,
    pub scheme: Scheme,
    pub mix1: LinearPhaseMap,
    pub mix2: LinearPhaseMap,
    pub projection: LinearPhaseMap,
    pub mode: DriverMode,
    pub composition: CompositionScheme,
    pub h: StepSize,
    pub duration: Duration,
    pub sample_every: u64,
    /// Compare samples against an oracle solve of the same problem.
    pub compare_oracle: bool,
    pub out: Option<PathBuf>,
    pub oracle: OracleConfig,
    pub implicit: ImplicitMidpointConfig,
    pub seed: u64,
    pub schwarzschild: SchwarzschildParams,
    pub vdp: VdpParams,
    pub omega: f64,
    /// Initial state for first-order problems; Schwarzschild derives its own.
    pub initial: Vec<f64>,
}

impl ExperimentConfig {
    /// The published setup for each problem.
    pub fn defaults_for(problem: ProblemId) -> Self {
        let preset = |n: &str| LinearPhaseMap::preset(n).expect("preset exists");
        let base = Self {
            problem,
            method: MethodId::Extended,
            scheme: Scheme::QPtQtP,
            mix1: LinearPhaseMap::identity(),
            mix2: LinearPhaseMap::identity(),
            projection: preset("proj_primary_q_aux_p"),
            mode: DriverMode::ExtendedPersistent,
            composition: CompositionScheme::single(),
            h: StepSize::Periods(0.02),
            duration: Duration::Periods(10.0),
            sample_every: 1,
            compare_oracle: true,
            out: None,
            oracle: OracleConfig::default(),
            implicit: ImplicitMidpointConfig::default(),
            seed: 0,
            schwarzschild: SchwarzschildParams::default(),
            vdp: VdpParams::default(),
            omega: 1.0,
            initial: vec![],
        };
        match problem {
            ProblemId::Schwarzschild => Self {
                mix1: preset("swap_momenta"),
                mix2: preset("swap_momenta"),
                ..base
            },
            ProblemId::Vdp => {
                let m = OdeMethod::vdp_default(OdeScheme::Method1);
                Self {
                    method: MethodId::Method1,
                    mix1: m.mix1,
                    mix2: m.mix2,
                    projection: m.projection,
                    mode: m.mode,
                    composition: m.composition,
                    h: StepSize::Absolute(0.02),
                    duration: Duration::Time(500.0),
                    initial: vec![2.0, 2.0],
                    ..base
                }
            }
            ProblemId::Harmonic => Self {
                h: StepSize::Absolute(0.01),
                duration: Duration::Time(10.0),
                initial: vec![1.0, 0.0],
                ..base
            },
        }
    }

    /// Builds a configuration from layered overrides; later layers win.
    pub fn from_layers(layers: &[ConfigOverrides]) -> Result<Self> {
        let problem = layers
            .iter()
            .rev()
            .find_map(|l| l.problem.as_deref())
            .map(str::parse)
            .transpose()?
            .unwrap_or(ProblemId::Schwarzschild);
        let mut cfg = Self::defaults_for(problem);
        for layer in layers {
            layer.apply(&mut cfg)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Time unit for `P`-relative step sizes and durations.
    pub fn period(&self) -> f64 {
        match self.problem {
            ProblemId::Schwarzschild => self.schwarzschild.period(),
            ProblemId::Vdp => self.vdp.period,
            ProblemId::Harmonic => 2.0 * PI / self.omega,
        }
    }

    pub fn step_size(&self) -> f64 {
        self.h.resolve(self.period())
    }

    pub fn end_time(&self) -> f64 {
        self.duration.resolve(self.period())
    }

    /// Number of fixed steps covering the duration.
    pub fn n_steps(&self) -> u64 {
        (self.end_time() / self.step_size()).round() as u64
    }

    pub fn extended_method(&self) -> ExtendedMethod {
        ExtendedMethod::new(self.scheme)
            .with_mixing(self.mix1, self.mix2)
            .with_projection(self.projection)
            .with_mode(self.mode)
            .with_composition(self.composition.clone())
    }

    pub fn ode_method(&self) -> Result<OdeMethod> {
        let scheme = match self.method {
            MethodId::Method1 => OdeScheme::Method1,
            MethodId::Method2 => OdeScheme::Method2,
            other => {
                return Err(Error::InvalidParameter(format!(
                    "`{other}` is not an extended ODE method"
                )))
            }
        };
        Ok(OdeMethod::new(scheme)
            .with_mixing(self.mix1, self.mix2)
            .with_projection(self.projection)
            .with_mode(self.mode)
            .with_composition(self.composition.clone()))
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.h.value();
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
        }
        let t = self.end_time();
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "duration must be non-negative, got {t}"
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter("sample stride must be at least 1".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        self.oracle.validate()?;
        match self.problem {
            ProblemId::Schwarzschild => self.schwarzschild.validate()?,
            ProblemId::Vdp | ProblemId::Harmonic => {
                if self.initial.len() != 2 {
                    return Err(Error::InvalidParameter(format!(
                        "{} needs a two-component initial state, got {}",
                        self.problem,
                        self.initial.len()
                    )));
                }
            }
        }
        match (self.problem, self.method) {
            (ProblemId::Vdp, MethodId::Extended) => {
                return Err(Error::InvalidParameter(
                    "the extended Hamiltonian leapfrogs need a Hamiltonian problem; use method1 or method2".into(),
                ))
            }
            (_, MethodId::Extended) => self.extended_method().validate()?,
            (_, MethodId::Method1 | MethodId::Method2) => self.ode_method()?.validate()?,
            _ => {}
        }
        Ok(())
    }
}

/// A number given either as JSON number or string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    fn text(&self) -> String {
        match self {
            Self::Num(v) => v.to_string(),
            Self::Text(s) => s.clone(),
        }
    }
}

/// Partial configuration as read from a JSON file or command-line flags.
///
/// Keys mirror the CLI flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigOverrides {
    pub problem: Option<String>,
    pub method: Option<String>,
    pub scheme: Option<String>,
    pub mix1: Option<String>,
    pub mix2: Option<String>,
    pub proj: Option<String>,
    pub mode: Option<String>,
    pub composition: Option<String>,
    pub h: Option<NumOrText>,
    pub orbits: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_every: Option<u64>,
    pub compare_oracle: Option<bool>,
    pub out: Option<PathBuf>,
    pub oracle_rtol: Option<f64>,
    pub oracle_atol: Option<f64>,
    pub implicit_tol: Option<f64>,
    pub seed: Option<u64>,
    pub mass: Option<f64>,
    pub particle_mass: Option<f64>,
    pub a: Option<f64>,
    pub e: Option<f64>,
    pub mu: Option<f64>,
    pub amplitude: Option<f64>,
    pub forcing_period: Option<f64>,
    pub omega: Option<f64>,
    pub initial: Option<Vec<f64>>,
}

impl ConfigOverrides {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(v) = &self.problem {
            cfg.problem = v.parse()?;
        }
        if let Some(v) = &self.method {
            cfg.method = v.parse()?;
        }
        if let Some(v) = &self.scheme {
            cfg.scheme = v.parse()?;
        }
        if let Some(v) = &self.mix1 {
            cfg.mix1 = LinearPhaseMap::parse(v, MapKind::Mixing)?;
        }
        if let Some(v) = &self.mix2 {
            cfg.mix2 = LinearPhaseMap::parse(v, MapKind::Mixing)?;
        }
        if let Some(v) = &self.proj {
            cfg.projection = LinearPhaseMap::parse(v, MapKind::Projection)?;
        }
        if let Some(v) = &self.mode {
            cfg.mode = v.parse()?;
        }
        if let Some(v) = &self.composition {
            cfg.composition = v.parse()?;
        }
        if let Some(v) = &self.h {
            cfg.h = v.text().parse()?;
        }
        match (self.orbits, self.t_end) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "give either orbits or t-end, not both".into(),
                ))
            }
            (Some(n), None) => cfg.duration = Duration::Periods(n),
            (None, Some(t)) => cfg.duration = Duration::Time(t),
            (None, None) => {}
        }
        if let Some(v) = self.sample_every {
            cfg.sample_every = v;
        }
        if let Some(v) = self.compare_oracle {
            cfg.compare_oracle = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.oracle_rtol {
            cfg.oracle.rel_tol = v;
        }
        if let Some(v) = self.oracle_atol {
            cfg.oracle.abs_tol = v;
        }
        if let Some(v) = self.implicit_tol {
            cfg.implicit.tol = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        let sp = &mut cfg.schwarzschild;
        for (dst, src) in [
            (&mut sp.mass, self.mass),
            (&mut sp.particle_mass, self.particle_mass),
            (&mut sp.a, self.a),
            (&mut sp.e, self.e),
            (&mut cfg.vdp.mu, self.mu),
            (&mut cfg.vdp.amplitude, self.amplitude),
            (&mut cfg.vdp.period, self.forcing_period),
            (&mut cfg.omega, self.omega),
        ] {
            if let Some(v) = src {
                *dst = v;
            }
        }
        if let Some(v) = &self.initial {
            cfg.initial = v.clone();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_size_parsing() {
        assert_eq!("0.02P".parse::<StepSize>().unwrap(), StepSize::Periods(0.02));
        assert_eq!(" 0.5 ".parse::<StepSize>().unwrap(), StepSize::Absolute(0.5));
        assert!("fast".parse::<StepSize>().is_err());
        assert_eq!(StepSize::Periods(0.5).resolve(4.0), 2.0);
    }

    #[test]
    fn geodesic_defaults_match_published_setup() {
        let cfg = ExperimentConfig::from_layers(&[]).unwrap();
        assert_eq!(cfg.problem, ProblemId::Schwarzschild);
        assert_eq!(cfg.n_steps(), 500);
        assert_eq!(cfg.mix1, LinearPhaseMap::preset("swap_momenta").unwrap());
        assert_eq!(cfg.extended_method().evaluations_per_step(), 8);
    }

    #[test]
    fn later_layers_win() {
        let file = ConfigOverrides::from_json_str(
            r#"{"problem": "vdp", "h": "0.01", "t-end": 5, "mix2": "identity"}"#,
        )
        .unwrap();
        let flags = ConfigOverrides {
            h: Some(NumOrText::Num(0.05)),
            ..Default::default()
        };
        let cfg = ExperimentConfig::from_layers(&[file, flags]).unwrap();
        assert_eq!(cfg.problem, ProblemId::Vdp);
        assert_eq!(cfg.step_size(), 0.05);
        assert_eq!(cfg.n_steps(), 100);
        assert!(cfg.mix2.is_identity());
        assert_eq!(cfg.composition, CompositionScheme::kahan6());
    }

    #[test]
    fn bad_configs_are_config_errors() {
        let bad = [
            r#"{"method": "rk4"}"#,
            r#"{"h": -1}"#,
            r#"{"problem": "vdp", "method": "extended"}"#,
            r#"{"mix1": "0.5"}"#,
            r#"{"orbits": 1, "t-end": 3}"#,
            r#"{"e": 0.99}"#,
            r#"{"unknown-key": 1}"#,
        ];
        for s in bad {
            let err = ConfigOverrides::from_json_str(s)
                .and_then(|o| ExperimentConfig::from_layers(&[o]))
                .unwrap_err();
            assert!(err.is_config(), "{s}: {err}");
        }
    }
}
