//! Resonance-magnitude scans, regime and category classification, dip
//! detection, and the resonance-evolution suites.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lineshape::{poles, resonance_pair, spectrum_table, Grid, Prefactor, SpectrumTable, EPS_POLE};
use crate::model::{raw_threshold, threshold_factor, Scheme, SystemKind};
use crate::search::golden_section_max;

/// Dead band around threshold factor 1 in which no regime is asserted.
pub const EPS_CLS: f64 = 1e-6;
/// Minimum relative depth for a centre minimum to count as a dip.
pub const EPS_DIP: f64 = 1e-3;
/// Relative tolerance of the peak refinement.
pub const PEAK_REL_TOL: f64 = 1e-10;
/// Threshold factors of the four evolution subplots: strong, just above
/// threshold, weak, very weak.
pub const DEFAULT_EVOLUTION_FACTORS: [f64; 4] = [2.0, 1.1, 0.5, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    First,
    Second,
}

/// How a resonance's size is measured when locating its peak.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// `|Im r|`, the signed absorption contribution's magnitude.
    #[default]
    AbsImag,
    /// `|r|`.
    Modulus,
}

impl Metric {
    fn apply(self, z: num_complex::Complex64) -> f64 {
        match self {
            Metric::AbsImag => z.im.abs(),
            Metric::Modulus => z.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonancePeak {
    pub delta_star: f64,
    pub peak: f64,
}

/// Maximum over `δp` of one resonance: coarse scan on the default grid,
/// then golden-section refinement on the bracketing interval.
pub fn resonance_peak(scheme: &Scheme, omega_c: f64, which: Which, metric: Metric) -> Result<ResonancePeak> {
    let system = scheme.system;
    let g = scheme.gammas;
    let eval = |d: f64| -> Result<f64> {
        let dec = resonance_pair(system, &g, omega_c, d, Prefactor::Off)?;
        Ok(metric.apply(match which {
            Which::First => dec.r1,
            Which::Second => dec.r2,
        }))
    };
    // fail early on degeneracy
    eval(0.0)?;

    let grid = Grid::default_for(omega_c, &g)?;
    let xs = grid.points();
    let values = xs.iter().map(|&d| eval(d)).collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for k in 1..xs.len() {
        let (v, vb) = (values[k], values[best]);
        let tie = (v - vb).abs() <= 1e-12 * vb.abs();
        if (v > vb && !tie) || (tie && xs[k].abs() < xs[best].abs()) {
            best = k;
        }
    }
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(xs.len() - 1)];
    let span = grid.max() - grid.min();
    let f = |d: f64| eval(d).unwrap_or(f64::NEG_INFINITY);
    let (x, fx) = golden_section_max(f, lo, hi, PEAK_REL_TOL, 1e-14 * span);
    if fx > values[best] {
        Ok(ResonancePeak {
            delta_star: x,
            peak: fx,
        })
    } else {
        Ok(ResonancePeak {
            delta_star: xs[best],
            peak: values[best],
        })
    }
}

/// One point of the resonance-magnitude scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub threshold_factor: f64,
    /// `max|r1| / max|r2|` under the chosen metric.
    pub ratio: f64,
    /// `max(ratio, 1/ratio)`.
    pub dominance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RatioScan {
    pub points: Vec<RatioPoint>,
    /// Factors left out because they sit in the degenerate band.
    pub skipped: Vec<f64>,
}

pub fn ratio_point(scheme: &Scheme, factor: f64, metric: Metric) -> Result<RatioPoint> {
    let omega_c = scheme.omega_c_for_factor(factor)?;
    let p1 = resonance_peak(scheme, omega_c, Which::First, metric)?;
    let p2 = resonance_peak(scheme, omega_c, Which::Second, metric)?;
    let ratio = p1.peak / p2.peak;
    Ok(RatioPoint {
        threshold_factor: factor,
        ratio,
        dominance: ratio.max(1.0 / ratio),
    })
}

pub fn ratio_scan(scheme: &Scheme, factors: &[f64], metric: Metric) -> Result<RatioScan> {
    scheme.threshold()?;
    if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "threshold factors must be positive, got {bad}"
        )));
    }
    let outcomes: Vec<Result<Option<RatioPoint>>> = factors
        .par_iter()
        .map(|&f| {
            if (f - 1.0).abs() <= EPS_CLS {
                return Ok(None);
            }
            match ratio_point(scheme, f, metric) {
                Ok(p) => Ok(Some(p)),
                Err(Error::DegeneratePole { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut scan = RatioScan::default();
    for (&f, outcome) in factors.iter().zip(outcomes) {
        match outcome? {
            Some(p) => scan.points.push(p),
            None => scan.skipped.push(f),
        }
    }
    Ok(scan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Strong,
    Weak,
    Degenerate,
}

/// The two families of schemes that behave differently below threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Category {
    /// Lambda and Cascade-EIT: two comparable resonances that interfere.
    Interference,
    /// Cascade-AT and Vee: one resonance takes over as the field weakens.
    SingleDominant,
}

impl Category {
    pub fn of(system: SystemKind) -> Self {
        match system {
            SystemKind::Lambda | SystemKind::CascadeEit => Category::Interference,
            SystemKind::CascadeAt | SystemKind::Vee => Category::SingleDominant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phenomenon {
    #[serde(rename = "AT")]
    At,
    #[serde(rename = "EIT")]
    Eit,
    SingleResonance,
    Indeterminate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Phenomenon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phenomenon::At => "AT",
            Phenomenon::Eit => "EIT",
            Phenomenon::SingleResonance => "SingleResonance",
            Phenomenon::Indeterminate => "Indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub system: SystemKind,
    pub omega_c: f64,
    pub threshold: f64,
    pub threshold_factor: f64,
    pub regime: Regime,
    pub category: Category,
    pub phenomenon: Phenomenon,
}

pub fn classify(scheme: &Scheme, omega_c: f64) -> Result<RegimeReport> {
    let threshold = scheme.threshold()?;
    let factor = threshold_factor(omega_c, threshold)?;
    let regime = if factor > 1.0 + EPS_CLS {
        Regime::Strong
    } else if factor < 1.0 - EPS_CLS {
        Regime::Weak
    } else {
        Regime::Degenerate
    };
    let category = Category::of(scheme.system);
    let phenomenon = match (regime, category) {
        (Regime::Strong, _) => Phenomenon::At,
        (Regime::Weak, Category::Interference) => Phenomenon::Eit,
        (Regime::Weak, Category::SingleDominant) => Phenomenon::SingleResonance,
        (Regime::Degenerate, _) => Phenomenon::Indeterminate,
    };
    Ok(RegimeReport {
        system: scheme.system,
        omega_c,
        threshold,
        threshold_factor: factor,
        regime,
        category,
        phenomenon,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DipReport {
    pub has_dip: bool,
    /// `1 − A(0)/max A`.
    pub depth: f64,
    /// Grid positions of the strict local maxima of the absorption.
    pub peak_positions: Vec<f64>,
}

pub fn dip_report(table: &SpectrumTable) -> Result<DipReport> {
    let a = table.absorption();
    let xs: Vec<f64> = table.grid().collect();
    if a.len() < 3 {
        return Err(Error::InvalidGrid("dip analysis needs at least 3 samples".into()));
    }
    let i0 = xs.iter().position(|&x| x == 0.0).ok_or_else(|| {
        Error::InvalidGrid("dip analysis needs a sample at delta_p = 0".into())
    })?;
    let reach = 3.0 * table.omega_c.max(table.gammas.gamma23);
    if xs[0] > -reach || xs[xs.len() - 1] < reach {
        return Err(Error::InvalidGrid(format!(
            "dip analysis needs the grid to cover at least +-{reach}"
        )));
    }

    let last = a.len() - 1;
    let amax = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if amax <= 0.0 {
        return Ok(DipReport {
            has_dip: false,
            depth: 0.0,
            peak_positions: Vec::new(),
        });
    }
    let interior_max = a[1..last].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if a[0].max(a[last]) > interior_max {
        return Err(Error::GridTooNarrow);
    }

    let depth = 1.0 - a[i0] / amax;
    let centre_min = i0 > 0 && i0 < last && a[i0] < a[i0 - 1] && a[i0] < a[i0 + 1];
    let peak_positions = (1..last)
        .filter(|&i| a[i] > a[i - 1] && a[i] > a[i + 1])
        .map(|i| xs[i])
        .collect();
    Ok(DipReport {
        has_dip: centre_min && depth > EPS_DIP,
        depth,
        peak_positions,
    })
}

/// Data behind one evolution subplot; `table` is absent for a degenerate
/// factor and `note` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionFrame {
    pub factor: f64,
    pub omega_c: f64,
    pub table: Option<SpectrumTable>,
    pub note: Option<String>,
}

pub fn evolution_suite(scheme: &Scheme, factors: &[f64], prefactor: Prefactor) -> Result<Vec<EvolutionFrame>> {
    if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "threshold factors must be positive, got {bad}"
        )));
    }
    if factors.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "evolution factors must be strictly descending".into(),
        ));
    }
    factors
        .iter()
        .map(|&factor| {
            let omega_c = scheme.omega_c_for_factor(factor)?;
            let grid = Grid::default_for(omega_c, &scheme.gammas)?;
            Ok(match spectrum_table(scheme, omega_c, &grid, prefactor) {
                Ok(table) => EvolutionFrame {
                    factor,
                    omega_c,
                    table: Some(table),
                    note: None,
                },
                Err(e @ Error::DegeneratePole { .. }) => EvolutionFrame {
                    factor,
                    omega_c,
                    table: None,
                    note: Some(e.to_string()),
                },
                Err(e) => return Err(e),
            })
        })
        .collect()
}

/// Whether `omega_c` is far enough from the threshold for the split to exist.
pub fn is_nondegenerate(scheme: &Scheme, omega_c: f64) -> bool {
    poles(scheme.system, &scheme.gammas, omega_c).separation() > EPS_POLE
        && raw_threshold(scheme.system, &scheme.gammas) > 0.0
}
