//! Level schemes, decay-rate inputs, derived coherence damping and the
//! per-scheme coupling threshold.
//!
//! Levels are numbered 1, 2, 3. All rates are dimensionless, expressed in
//! units of the largest population decay rate of the set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four three-level configurations driven by a probe and a coupling field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Lambda,
    CascadeEit,
    CascadeAt,
    Vee,
}

/// A dipole transition between two levels, `lower < upper` in level numbering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub lower: usize,
    pub upper: usize,
}

impl Transition {
    const fn new(lower: usize, upper: usize) -> Self {
        Self { lower, upper }
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lower, self.upper)
    }
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [
        SystemKind::Lambda,
        SystemKind::CascadeEit,
        SystemKind::CascadeAt,
        SystemKind::Vee,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SystemKind::Lambda => "lambda",
            SystemKind::CascadeEit => "cascade-eit",
            SystemKind::CascadeAt => "cascade-at",
            SystemKind::Vee => "vee",
        }
    }

    /// Transition addressed by the weak probe field.
    pub fn probe_transition(self) -> Transition {
        match self {
            SystemKind::Lambda | SystemKind::Vee => Transition::new(1, 3),
            SystemKind::CascadeEit => Transition::new(1, 2),
            SystemKind::CascadeAt => Transition::new(2, 3),
        }
    }

    /// Transition addressed by the (resonant) coupling field.
    pub fn coupling_transition(self) -> Transition {
        match self {
            SystemKind::Lambda | SystemKind::CascadeEit => Transition::new(2, 3),
            SystemKind::CascadeAt | SystemKind::Vee => Transition::new(1, 2),
        }
    }

    /// Spontaneous decay channels `(from, to)` permitted by the level diagram.
    pub fn allowed_channels(self) -> &'static [(usize, usize)] {
        match self {
            SystemKind::Lambda => &[(3, 1), (3, 2), (2, 1)],
            SystemKind::CascadeEit | SystemKind::CascadeAt => &[(2, 1), (3, 2), (3, 1)],
            SystemKind::Vee => &[(3, 1), (2, 1), (3, 2)],
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lambda" => Ok(SystemKind::Lambda),
            "cascade-eit" => Ok(SystemKind::CascadeEit),
            "cascade-at" => Ok(SystemKind::CascadeAt),
            "vee" => Ok(SystemKind::Vee),
            other => Err(Error::InvalidArgument(format!(
                "unknown system `{other}` (expected lambda, cascade-eit, cascade-at or vee)"
            ))),
        }
    }
}

/// Population decay rates `W_ij` from level `i` to level `j`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DecayMatrix {
    rates: [[f64; 3]; 3],
}

impl DecayMatrix {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a matrix from `((from, to), rate)` entries, 1-based.
    ///
    /// Entries must be finite, nonnegative and off-diagonal. Topology is
    /// checked separately by [`DecayMatrix::validate_for`].
    pub fn from_channels(channels: &[((usize, usize), f64)]) -> Result<Self> {
        let mut w = Self::zero();
        for &((from, to), rate) in channels {
            if !(1..=3).contains(&from) || !(1..=3).contains(&to) || from == to {
                return Err(Error::InvalidArgument(format!(
                    "decay channel W{from}{to} does not connect two distinct levels 1..3"
                )));
            }
            if !rate.is_finite() || rate < 0.0 {
                return Err(Error::InvalidRate {
                    from,
                    to,
                    value: rate,
                });
            }
            w.rates[from - 1][to - 1] = rate;
        }
        Ok(w)
    }

    /// `W_ij`, 1-based.
    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.rates[from - 1][to - 1]
    }

    /// Total population decay rate out of `level`.
    pub fn total_out(&self, level: usize) -> f64 {
        self.rates[level - 1].iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut rates = self.rates;
        rates.iter_mut().flatten().for_each(|w| *w *= factor);
        Self { rates }
    }

    /// Nonzero channels as `((from, to), rate)`, in row-major order.
    pub fn channels(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        (1..=3).flat_map(move |i| {
            (1..=3).filter_map(move |j| {
                let w = self.get(i, j);
                (w != 0.0).then_some(((i, j), w))
            })
        })
    }

    pub fn validate_for(&self, system: SystemKind) -> Result<()> {
        for i in 1..=3 {
            for j in 1..=3 {
                let w = self.get(i, j);
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidRate {
                        from: i,
                        to: j,
                        value: w,
                    });
                }
                if w != 0.0 && !system.allowed_channels().contains(&(i, j)) {
                    return Err(Error::ForbiddenChannel {
                        system,
                        from: i,
                        to: j,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Coherence damping rates `γ_mn` derived from a [`DecayMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationRates {
    pub gamma12: f64,
    pub gamma13: f64,
    pub gamma23: f64,
}

impl PolarizationRates {
    /// `γ_mn` for any ordering of distinct `m`, `n` (1-based).
    pub fn get(&self, m: usize, n: usize) -> f64 {
        match (m.min(n), m.max(n)) {
            (1, 2) => self.gamma12,
            (1, 3) => self.gamma13,
            (2, 3) => self.gamma23,
            _ => panic!("no coherence between levels {m} and {n}"),
        }
    }

    pub fn max(&self) -> f64 {
        self.gamma12.max(self.gamma13).max(self.gamma23)
    }
}

/// Field parameters. The coupling field is always resonant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldParams {
    pub omega_c: f64,
    pub omega_p: f64,
}

impl FieldParams {
    pub const DELTA_C: f64 = 0.0;

    pub fn new(omega_c: f64, omega_p: f64) -> Result<Self> {
        if !(omega_c.is_finite() && omega_c >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coupling Rabi frequency must be finite and >= 0, got {omega_c}"
            )));
        }
        if !(omega_p.is_finite() && omega_p >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "probe Rabi frequency must be finite and >= 0, got {omega_p}"
            )));
        }
        Ok(Self { omega_c, omega_p })
    }

    pub fn delta_c(&self) -> f64 {
        Self::DELTA_C
    }
}

/// `γ_mn = Σ_t (W_mt + W_nt)`: the full total decay of both levels, no ½.
pub fn derive_gammas(system: SystemKind, w: &DecayMatrix) -> Result<PolarizationRates> {
    w.validate_for(system)?;
    let pair = |m: usize, n: usize| w.total_out(m) + w.total_out(n);
    Ok(PolarizationRates {
        gamma12: pair(1, 2),
        gamma13: pair(1, 3),
        gamma23: pair(2, 3),
    })
}

/// The coupling strength at which the pole-pair square root changes
/// character, without the positivity check.
pub fn raw_threshold(system: SystemKind, g: &PolarizationRates) -> f64 {
    match system {
        SystemKind::Lambda => g.gamma13 - g.gamma12,
        SystemKind::CascadeEit => g.gamma12 - g.gamma13,
        SystemKind::CascadeAt | SystemKind::Vee => g.gamma12,
    }
}

pub fn threshold_of(system: SystemKind, g: &PolarizationRates) -> Result<f64> {
    let threshold = raw_threshold(system, g);
    if threshold > 0.0 {
        Ok(threshold)
    } else {
        Err(Error::DegenerateThreshold { system, threshold })
    }
}

pub fn threshold_factor(omega_c: f64, threshold: f64) -> Result<f64> {
    if threshold > 0.0 {
        Ok(omega_c / threshold)
    } else {
        Err(Error::InvalidArgument(format!(
            "threshold must be positive to form a threshold factor, got {threshold}"
        )))
    }
}

/// Scaled decay rates used for every modeled configuration.
pub fn standard_decay(system: SystemKind) -> DecayMatrix {
    let channels: &[((usize, usize), f64)] = match system {
        SystemKind::CascadeEit | SystemKind::CascadeAt => {
            &[((2, 1), 1.0), ((3, 2), 0.2), ((3, 1), 0.001)]
        }
        SystemKind::Lambda => &[((3, 1), 1.0), ((3, 2), 0.9), ((2, 1), 0.001)],
        SystemKind::Vee => &[((3, 1), 1.0), ((2, 1), 0.9), ((3, 2), 0.001)],
    };
    DecayMatrix::from_channels(channels).expect("builtin decay set is valid")
}

/// A level scheme with validated decay rates and its derived damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scheme {
    pub system: SystemKind,
    pub decay: DecayMatrix,
    pub gammas: PolarizationRates,
}

impl Scheme {
    pub fn new(system: SystemKind, decay: DecayMatrix) -> Result<Self> {
        let gammas = derive_gammas(system, &decay)?;
        Ok(Self {
            system,
            decay,
            gammas,
        })
    }

    pub fn standard(system: SystemKind) -> Self {
        Self::new(system, standard_decay(system)).expect("builtin decay set is valid")
    }

    pub fn threshold(&self) -> Result<f64> {
        threshold_of(self.system, &self.gammas)
    }

    /// Coupling Rabi frequency for a given threshold factor.
    pub fn omega_c_for_factor(&self, factor: f64) -> Result<f64> {
        Ok(factor * self.threshold()?)
    }

    /// Same scheme with every decay rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.system, self.decay.scaled(factor))
    }
}
