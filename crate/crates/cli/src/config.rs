//! Run configuration: command-line flags merged over an optional TOML file
//! whose keys are the long flag names.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, ValueEnum};
use serde::Deserialize;

use eitat::analysis::Metric;
use eitat::lineshape::{Grid, Prefactor};
use eitat::model::{DecayMatrix, Scheme, SystemKind};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    Lambda,
    CascadeEit,
    CascadeAt,
    Vee,
}

impl From<SystemArg> for SystemKind {
    fn from(s: SystemArg) -> Self {
        match s {
            SystemArg::Lambda => SystemKind::Lambda,
            SystemArg::CascadeEit => SystemKind::CascadeEit,
            SystemArg::CascadeAt => SystemKind::CascadeAt,
            SystemArg::Vee => SystemKind::Vee,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    AbsImag,
    Modulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `MIN:MAX:N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(format!("expected MIN:MAX:N, got `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number `{x}`: {e}"));
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad point count `{count}`: {e}"))?;
        Ok(Self {
            min: num(min)?,
            max: num(max)?,
            count,
        })
    }
}

impl<'de> Deserialize<'de> for RangeSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `31=1,32=0.9,21=0.001`: channel `ij` carries rate `W_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySpec(pub Vec<((usize, usize), f64)>);

impl FromStr for DecaySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (key, value) = p
                    .split_once('=')
                    .ok_or_else(|| format!("expected ij=RATE, got `{p}`"))?;
                let digits: Vec<usize> = key
                    .trim()
                    .chars()
                    .map(|c| c.to_digit(10).map(|d| d as usize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| format!("bad channel `{key}`"))?;
                let [from, to] = digits.as_slice() else {
                    return Err(format!("channel `{key}` must be two level digits, e.g. 31"));
                };
                let rate = value
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad rate `{value}`: {e}"))?;
                Ok(((*from, *to), rate))
            })
            .collect::<Result<_, _>>()
            .map(DecaySpec)
    }
}

impl<'de> Deserialize<'de> for DecaySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Comma-separated factors, e.g. `2,1.1,0.5,0.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorList(pub Vec<f64>);

impl FromStr for FactorList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad factor `{p}`: {e}")))
            .collect::<Result<_, _>>()
            .map(FactorList)
    }
}

/// Flags shared by every command. Each may also come from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Level scheme.
    #[arg(long, value_enum)]
    pub system: Option<SystemArg>,
    /// Decay-rate overrides, e.g. `31=1,32=0.9,21=0.001` (default: built-in set).
    #[arg(long)]
    pub decay: Option<DecaySpec>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Coupling-field selection.
#[derive(Debug, Clone, Default, Args)]
pub struct FieldArgs {
    /// Coupling Rabi frequency in scaled units.
    #[arg(long, conflicts_with = "threshold_factor")]
    pub omega_c: Option<f64>,
    /// Coupling Rabi frequency as a multiple of the scheme's threshold.
    #[arg(long)]
    pub threshold_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub system: Option<SystemArg>,
    pub decay: Option<DecaySpec>,
    pub omega_c: Option<f64>,
    pub threshold_factor: Option<f64>,
    pub grid: Option<RangeSpec>,
    pub prefactor: Option<Switch>,
    pub metric: Option<MetricArg>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub probe_eps: Option<f64>,
    pub tol: Option<f64>,
    pub factors: Option<String>,
    pub log: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::Other)?;
        toml::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldInput {
    OmegaC(f64),
    ThresholdFactor(f64),
}

/// Fully resolved inputs of one command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub field: Option<FieldInput>,
    pub grid: Option<RangeSpec>,
    pub prefactor: Prefactor,
    pub metric: Metric,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(common: &CommonArgs, file: &FileConfig) -> Result<Self, Failure> {
        let system: SystemKind = common
            .system
            .or(file.system)
            .ok_or_else(|| Failure::Usage("--system is required".into()))?
            .into();
        let scheme = match common.decay.as_ref().or(file.decay.as_ref()) {
            Some(DecaySpec(channels)) => DecayMatrix::from_channels(channels)
                .and_then(|w| Scheme::new(system, w))
                .map_err(Failure::from)?,
            None => Scheme::standard(system),
        };
        Ok(Self {
            scheme,
            field: None,
            grid: file.grid,
            prefactor: match file.prefactor {
                Some(Switch::On) => Prefactor::On,
                _ => Prefactor::Off,
            },
            metric: match file.metric {
                Some(MetricArg::Modulus) => Metric::Modulus,
                _ => Metric::AbsImag,
            },
            format: common.format.or(file.format).unwrap_or_default(),
            output: common.output.clone().or_else(|| file.output.clone()),
        })
    }

    pub fn with_field(mut self, field: &FieldArgs, file: &FileConfig) -> Result<Self, Failure> {
        let pick = |omega_c: Option<f64>, factor: Option<f64>| match (omega_c, factor) {
            (Some(_), Some(_)) => Err(Failure::Usage(
                "give exactly one of omega-c / threshold-factor".into(),
            )),
            (Some(w), None) => Ok(Some(FieldInput::OmegaC(w))),
            (None, Some(f)) => Ok(Some(FieldInput::ThresholdFactor(f))),
            (None, None) => Ok(None),
        };
        let chosen = match pick(field.omega_c, field.threshold_factor)? {
            Some(f) => f,
            None => pick(file.omega_c, file.threshold_factor)?.ok_or_else(|| {
                Failure::Usage("one of --omega-c / --threshold-factor is required".into())
            })?,
        };
        let value = match chosen {
            FieldInput::OmegaC(v) | FieldInput::ThresholdFactor(v) => v,
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(Failure::Usage(format!("field strength must be finite and >= 0, got {value}")));
        }
        self.field = Some(chosen);
        Ok(self)
    }

    pub fn with_grid(mut self, grid: Option<RangeSpec>) -> Self {
        if grid.is_some() {
            self.grid = grid;
        }
        self
    }

    pub fn with_prefactor(mut self, prefactor: Option<Switch>) -> Self {
        if let Some(p) = prefactor {
            self.prefactor = Prefactor::from(p == Switch::On);
        }
        self
    }

    pub fn with_metric(mut self, metric: Option<MetricArg>) -> Self {
        if let Some(m) = metric {
            self.metric = match m {
                MetricArg::AbsImag => Metric::AbsImag,
                MetricArg::Modulus => Metric::Modulus,
            };
        }
        self
    }

    /// Resolved coupling Rabi frequency.
    pub fn omega_c(&self) -> Result<f64, Failure> {
        match self.field {
            Some(FieldInput::OmegaC(w)) => Ok(w),
            Some(FieldInput::ThresholdFactor(f)) => {
                self.scheme.omega_c_for_factor(f).map_err(Failure::from)
            }
            None => Err(Failure::Usage("no coupling field given".into())),
        }
    }

    /// Requested grid, or the default one for `omega_c`.
    pub fn detuning_grid(&self, omega_c: f64) -> Result<Grid, Failure> {
        match self.grid {
            Some(r) => Grid::linspace(r.min, r.max, r.count).map_err(Failure::from),
            None => Grid::default_for(omega_c, &self.scheme.gammas).map_err(Failure::from),
        }
    }

    /// Grid for dip analysis: at least 3 points, odd count so 0 is sampled.
    pub fn dip_grid(&self, omega_c: f64) -> Result<Grid, Failure> {
        if let Some(r) = self.grid {
            if r.count < 3 || r.count % 2 == 0 {
                return Err(Failure::Usage(format!(
                    "dip analysis needs an odd grid count >= 3, got {}",
                    r.count
                )));
            }
        }
        self.detuning_grid(omega_c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_spec_parses() {
        let r: RangeSpec = "-10:10:2001".parse().unwrap();
        assert_eq!((r.min, r.max, r.count), (-10.0, 10.0, 2001));
        assert!("1:2".parse::<RangeSpec>().is_err());
        assert!("a:2:3".parse::<RangeSpec>().is_err());
        assert!("1:2:-3".parse::<RangeSpec>().is_err());
    }

    #[test]
    fn decay_spec_parses() {
        let d: DecaySpec = "31=1, 32=0.9,21=0.001".parse().unwrap();
        assert_eq!(d.0, vec![((3, 1), 1.0), ((3, 2), 0.9), ((2, 1), 0.001)]);
        assert!("3=1".parse::<DecaySpec>().is_err());
        assert!("31:1".parse::<DecaySpec>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str(
            "system = \"vee\"\nthreshold-factor = 0.5\nformat = \"json\"\ngrid = \"-3:3:7\"\n",
        )
        .unwrap();
        let common = CommonArgs {
            system: Some(SystemArg::Lambda),
            ..Default::default()
        };
        let field = FieldArgs {
            omega_c: Some(2.0),
            threshold_factor: None,
        };
        let cfg = RunConfig::resolve(&common, &file)
            .unwrap()
            .with_field(&field, &file)
            .unwrap();
        assert_eq!(cfg.scheme.system, SystemKind::Lambda);
        assert_eq!(cfg.field, Some(FieldInput::OmegaC(2.0)));
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.grid.unwrap().count, 7);
    }

    #[test]
    fn file_with_both_field_inputs_is_rejected() {
        let file: FileConfig =
            toml::from_str("system = \"vee\"\nthreshold-factor = 0.5\nomega-c = 1.0\n").unwrap();
        let cfg = RunConfig::resolve(&CommonArgs::default(), &file).unwrap();
        assert!(matches!(
            cfg.with_field(&FieldArgs::default(), &file),
            Err(Failure::Usage(_))
        ));
    }

    #[test]
    fn unknown_config_key_is_rejected() {
        assert!(toml::from_str::<FileConfig>("colour = \"red\"\n").is_err());
    }

    #[test]
    fn even_dip_grid_is_rejected() {
        let file = FileConfig::default();
        let common = CommonArgs {
            system: Some(SystemArg::Lambda),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&common, &file)
            .unwrap()
            .with_grid(Some("-10:10:200".parse().unwrap()));
        assert!(matches!(cfg.dip_grid(1.0), Err(Failure::Usage(_))));
    }
}
