//! Closed-form probe coherences, their pole pair, and the split of each
//! coherence into two single-pole resonances.
//!
//! For every scheme the probe coherence has the form
//!
//! ```text
//!            numerator(δp)
//! ρ  ∝  ------------------------------
//!        Ωc²/4 − (δp − iγa)(δp − iγb)
//! ```
//!
//! The denominator of `−conj(ρ)` factors as `(δp − Z_I)(δp − Z_II)`, so a
//! partial-fraction expansion gives two terms `r1 + r2 = −conj(ρ)`. Their
//! imaginary parts add up to `Im ρ`, which is all the absorption depends on.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{raw_threshold, PolarizationRates, Scheme, SystemKind};

/// Below this separation the two poles are treated as coincident.
pub const EPS_POLE: f64 = 1e-9;
/// Floor on the closed-form denominator modulus.
pub const EPS_DEN: f64 = 1e-300;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Whether to multiply by the saturation prefactor dropped from the bare
/// Cascade-AT and Vee expressions. Lambda and Cascade-EIT have none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Prefactor {
    #[default]
    Off,
    On,
}

impl Prefactor {
    pub fn is_on(self) -> bool {
        self == Prefactor::On
    }
}

impl From<bool> for Prefactor {
    fn from(on: bool) -> Self {
        if on {
            Prefactor::On
        } else {
            Prefactor::Off
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolePair {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl PolePair {
    pub fn separation(&self) -> f64 {
        (self.z1 - self.z2).norm()
    }
}

/// Sum of the two damping rates whose product forms the denominator, and
/// the rate difference that sits under the square root.
fn pole_rates(system: SystemKind, g: &PolarizationRates) -> (f64, f64) {
    match system {
        SystemKind::Lambda | SystemKind::CascadeEit => (g.gamma23, raw_threshold(system, g)),
        SystemKind::CascadeAt | SystemKind::Vee => (g.gamma23 + g.gamma13, g.gamma12),
    }
}

/// Principal root of a real number: `+i·√|x|` for negative `x`.
fn principal_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

pub fn poles(system: SystemKind, g: &PolarizationRates, omega_c: f64) -> PolePair {
    let (gamma_sum, split) = pole_rates(system, g);
    let root = principal_sqrt(omega_c * omega_c - split * split);
    let centre = Complex64::new(0.0, -gamma_sum);
    PolePair {
        z1: 0.5 * (centre + root),
        z2: 0.5 * (centre - root),
    }
}

/// `|Ωc|²/(4γ12²)`, the Vee weighting between its two numerator terms.
fn vee_weight(system: SystemKind, g: &PolarizationRates, omega_c: f64, delta_p: f64) -> Result<f64> {
    if g.gamma12 <= 0.0 {
        return Err(Error::NearSingularDenominator { system, delta_p });
    }
    Ok(omega_c * omega_c / (4.0 * g.gamma12 * g.gamma12))
}

/// Multiplicative prefactor of the scheme's coherence (1 when off).
pub fn prefactor_value(
    system: SystemKind,
    g: &PolarizationRates,
    omega_c: f64,
    prefactor: Prefactor,
) -> Result<f64> {
    if !prefactor.is_on() {
        return Ok(1.0);
    }
    let quarter = omega_c * omega_c / 4.0;
    match system {
        SystemKind::Lambda | SystemKind::CascadeEit => Ok(1.0),
        SystemKind::CascadeAt => {
            let den = g.gamma12 * g.gamma12 + 2.0 * quarter;
            if den <= EPS_DEN {
                // no coupling and no damping: the empty transition stays empty
                return Ok(0.0);
            }
            Ok(quarter / den)
        }
        SystemKind::Vee => {
            let w = vee_weight(system, g, omega_c, 0.0)?;
            Ok(1.0 / (1.0 + 2.0 * w))
        }
    }
}

/// Probe coherence as printed for each scheme.
pub fn coherence_closed_form(
    system: SystemKind,
    g: &PolarizationRates,
    omega_c: f64,
    delta_p: f64,
    prefactor: Prefactor,
) -> Result<Complex64> {
    let d = Complex64::new(delta_p, 0.0);
    let quarter = omega_c * omega_c / 4.0;
    let (numerator, den) = match system {
        SystemKind::Lambda => (
            d - I * g.gamma12,
            quarter - (d - I * g.gamma13) * (d - I * g.gamma12),
        ),
        SystemKind::CascadeEit => (
            d - I * g.gamma13,
            quarter - (d - I * g.gamma12) * (d - I * g.gamma13),
        ),
        SystemKind::CascadeAt => (
            d - I * g.gamma23,
            quarter - (d - I * g.gamma23) * (d - I * g.gamma13),
        ),
        SystemKind::Vee => {
            let w = vee_weight(system, g, omega_c, delta_p)?;
            (
                (d - I * g.gamma13) * w + (d - I * g.gamma23),
                quarter - (d - I * g.gamma23) * (d - I * g.gamma13),
            )
        }
    };
    if den.norm() <= EPS_DEN {
        return Err(Error::NearSingularDenominator { system, delta_p });
    }
    let scale = prefactor_value(system, g, omega_c, prefactor)?;
    Ok(scale * numerator / den)
}

/// Two resonances at one probe detuning, with the closed form alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceDecomposition {
    pub pole_pair: PolePair,
    pub r1: Complex64,
    pub r2: Complex64,
    pub total_closed_form: Complex64,
}

impl ResonanceDecomposition {
    pub fn sum(&self) -> Complex64 {
        self.r1 + self.r2
    }
}

/// Residue numerator `N(Z)` of the scheme's partial-fraction expansion.
fn residue_numerator(
    system: SystemKind,
    g: &PolarizationRates,
    omega_c: f64,
    z: Complex64,
) -> Result<Complex64> {
    Ok(match system {
        SystemKind::Lambda => z + I * g.gamma12,
        SystemKind::CascadeEit => z + I * g.gamma13,
        SystemKind::CascadeAt => z + I * g.gamma23,
        SystemKind::Vee => {
            let w = vee_weight(system, g, omega_c, 0.0)?;
            z * (1.0 + w) + I * (g.gamma23 + g.gamma13 * w)
        }
    })
}

fn check_nondegenerate(
    system: SystemKind,
    g: &PolarizationRates,
    omega_c: f64,
    pair: &PolePair,
) -> Result<()> {
    if pair.separation() <= EPS_POLE {
        return Err(Error::DegeneratePole {
            system,
            omega_c,
            threshold: raw_threshold(system, g),
        });
    }
    Ok(())
}

pub fn resonance_pair(
    system: SystemKind,
    g: &PolarizationRates,
    omega_c: f64,
    delta_p: f64,
    prefactor: Prefactor,
) -> Result<ResonanceDecomposition> {
    let pair = poles(system, g, omega_c);
    check_nondegenerate(system, g, omega_c, &pair)?;
    let total_closed_form = coherence_closed_form(system, g, omega_c, delta_p, prefactor)?;
    let scale = prefactor_value(system, g, omega_c, prefactor)?;
    let PolePair { z1, z2 } = pair;
    let d = Complex64::new(delta_p, 0.0);
    let inv_split = 1.0 / (z1 - z2);
    let r1 = scale * inv_split * residue_numerator(system, g, omega_c, z1)? / (d - z1);
    let r2 = -scale * inv_split * residue_numerator(system, g, omega_c, z2)? / (d - z2);
    Ok(ResonanceDecomposition {
        pole_pair: pair,
        r1,
        r2,
        total_closed_form,
    })
}

/// Strictly increasing, finite probe-detuning samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid(Vec<f64>);

impl Grid {
    pub const DEFAULT_POINTS: usize = 2001;

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("grid contains non-finite values".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("grid is not strictly increasing".into()));
        }
        Ok(Self(points))
    }

    /// `n` evenly spaced points on `[min, max]`. Built about the midpoint so
    /// a grid symmetric about zero is exactly symmetric and, for odd `n`,
    /// contains zero exactly.
    pub fn linspace(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("grid needs at least one point".into()));
        }
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid("grid bounds must be finite".into()));
        }
        if n == 1 {
            return Self::from_points(vec![min]);
        }
        if max <= min {
            return Err(Error::InvalidGrid(format!(
                "grid bounds must satisfy min < max, got {min}:{max}"
            )));
        }
        let centre = 0.5 * (min + max);
        let half = 0.5 * (max - min);
        let mid = (n - 1) as f64 / 2.0;
        let points = (0..n)
            .map(|k| centre + half * ((k as f64 - mid) / mid))
            .collect();
        Self::from_points(points)
    }

    /// `±5·max(Ωc, γ23)` with 2001 points: wide enough to hold both
    /// Autler-Townes peaks at any coupling strength.
    pub fn default_for(omega_c: f64, g: &PolarizationRates) -> Result<Self> {
        let half = 5.0 * omega_c.max(g.gamma23);
        if half <= 0.0 {
            return Err(Error::InvalidGrid(
                "default grid needs a nonzero coupling or damping scale".into(),
            ));
        }
        Self::linspace(-half, half, Self::DEFAULT_POINTS)
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }

    pub fn max(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Largest spacing between consecutive samples (0 for a single point).
    pub fn max_step(&self) -> f64 {
        self.0
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of an exact `δp = 0` sample, if the grid has one.
    pub fn zero_index(&self) -> Option<usize> {
        self.0.iter().position(|&x| x == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub delta_p: f64,
    pub r1: Complex64,
    pub r2: Complex64,
    pub total: Complex64,
    /// `−Im(total)`: positive for an ordinary absorption line.
    pub absorption: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub system: SystemKind,
    pub omega_c: f64,
    pub gammas: PolarizationRates,
    pub prefactor: Prefactor,
    pub pole_pair: PolePair,
    pub rows: Vec<SpectrumRow>,
}

impl SpectrumTable {
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.delta_p)
    }

    pub fn absorption(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.absorption).collect()
    }

    /// Grid points where the absorption is below `-tol`.
    pub fn negative_absorption(&self, tol: f64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.absorption < -tol)
            .map(|r| r.delta_p)
            .collect()
    }
}

pub fn spectrum_table(
    scheme: &Scheme,
    omega_c: f64,
    grid: &Grid,
    prefactor: Prefactor,
) -> Result<SpectrumTable> {
    let system = scheme.system;
    let g = scheme.gammas;
    let pole_pair = poles(system, &g, omega_c);
    check_nondegenerate(system, &g, omega_c, &pole_pair)?;
    let rows = grid
        .points()
        .par_iter()
        .map(|&delta_p| {
            let dec = resonance_pair(system, &g, omega_c, delta_p, prefactor)?;
            Ok(SpectrumRow {
                delta_p,
                r1: dec.r1,
                r2: dec.r2,
                total: dec.total_closed_form,
                absorption: -dec.total_closed_form.im,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumTable {
        system,
        omega_c,
        gammas: g,
        prefactor,
        pole_pair,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemKind::*;

    fn assert_c(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() <= tol, "{a} vs {b}");
    }

    #[test]
    fn zero_field_poles_are_bare_damping() {
        let g = Scheme::standard(Lambda).gammas;
        let p = poles(Lambda, &g, 0.0);
        assert_c(p.z1, Complex64::new(0.0, -0.001), 1e-12);
        assert_c(p.z2, Complex64::new(0.0, -1.9), 1e-12);
    }

    #[test]
    fn strong_field_lambda_poles() {
        let g = Scheme::standard(Lambda).gammas;
        let p = poles(Lambda, &g, 4.0);
        assert_c(p.z1, Complex64::new(1.760241389696311, -0.9505), 1e-12);
        assert_c(p.z2, Complex64::new(-1.760241389696311, -0.9505), 1e-12);
    }

    #[test]
    fn poles_coincide_at_threshold() {
        for s in SystemKind::ALL {
            let scheme = Scheme::standard(s);
            let thr = scheme.threshold().unwrap();
            let p = poles(s, &scheme.gammas, thr);
            let (gamma_sum, _) = pole_rates(s, &scheme.gammas);
            assert_eq!(p.z1, p.z2);
            assert_c(p.z1, Complex64::new(0.0, -gamma_sum / 2.0), 1e-15);
        }
    }

    #[test]
    fn lambda_zero_field_line_centre() {
        let g = Scheme::standard(Lambda).gammas;
        let rho = coherence_closed_form(Lambda, &g, 0.0, 0.0, Prefactor::Off).unwrap();
        assert_c(rho, Complex64::new(0.0, -1.0 / 1.9), 1e-12);
        assert!((rho.im + 0.526316).abs() < 1e-6);
    }

    #[test]
    fn cascade_at_prefactor_vanishes_without_coupling() {
        let g = Scheme::standard(CascadeAt).gammas;
        for d in [-3.0, 0.0, 0.7] {
            let rho = coherence_closed_form(CascadeAt, &g, 0.0, d, Prefactor::On).unwrap();
            assert_eq!(rho, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn vee_prefactor() {
        let g = Scheme::standard(Vee).gammas;
        let p = prefactor_value(Vee, &g, 0.9, Prefactor::On).unwrap();
        assert!((p - 1.0 / 1.5).abs() < 1e-14);
        assert_eq!(prefactor_value(Lambda, &g, 3.0, Prefactor::On).unwrap(), 1.0);
    }

    #[test]
    fn lambda_factor_two_line_centre() {
        // regression value from this build; the split reproduces -conj(ρ)
        let g = Scheme::standard(Lambda).gammas;
        let dec = resonance_pair(Lambda, &g, 3.798, 0.0, Prefactor::Off).unwrap();
        assert_c(
            dec.total_closed_form,
            Complex64::new(0.0, -2.771541040563998e-4),
            1e-15,
        );
        assert_c(dec.sum(), -dec.total_closed_form.conj(), 1e-15);
        let rel = (dec.sum().im - dec.total_closed_form.im).abs() / dec.total_closed_form.norm();
        assert!(rel <= 1e-10);
    }

    #[test]
    fn degenerate_pole_at_threshold() {
        for s in SystemKind::ALL {
            let scheme = Scheme::standard(s);
            let thr = scheme.threshold().unwrap();
            let err = resonance_pair(s, &scheme.gammas, thr, 0.1, Prefactor::Off).unwrap_err();
            match err {
                Error::DegeneratePole { threshold, .. } => assert_eq!(threshold, thr),
                other => panic!("unexpected {other:?}"),
            }
            let rho = coherence_closed_form(s, &scheme.gammas, thr, 0.1, Prefactor::On).unwrap();
            assert!(rho.re.is_finite() && rho.im.is_finite());
        }
    }

    #[test]
    fn all_zero_damping_is_near_singular() {
        let g = PolarizationRates {
            gamma12: 0.0,
            gamma13: 0.0,
            gamma23: 0.0,
        };
        let err = coherence_closed_form(Lambda, &g, 0.0, 0.0, Prefactor::Off).unwrap_err();
        assert!(matches!(err, Error::NearSingularDenominator { .. }));
    }

    #[test]
    fn grid_construction() {
        let g = Grid::linspace(-10.0, 10.0, 2001).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.zero_index(), Some(1000));
        for k in 0..1000 {
            assert_eq!(g.points()[k], -g.points()[2000 - k]);
        }
        assert_eq!(Grid::linspace(0.5, 0.5, 1).unwrap().len(), 1);
        assert!(Grid::linspace(1.0, -1.0, 5).is_err());
        assert!(Grid::linspace(-1.0, 1.0, 0).is_err());
        assert!(Grid::from_points(vec![0.0, 0.0]).is_err());
        assert!(Grid::from_points(vec![]).is_err());
    }

    #[test]
    fn single_point_table() {
        let scheme = Scheme::standard(Lambda);
        let grid = Grid::from_points(vec![0.3]).unwrap();
        let t = spectrum_table(&scheme, 1.0, &grid, Prefactor::Off).unwrap();
        assert_eq!(t.rows.len(), 1);
    }

    #[test]
    fn zero_field_lambda_is_single_peak() {
        let scheme = Scheme::standard(Lambda);
        let grid = Grid::linspace(-10.0, 10.0, 2001).unwrap();
        let t = spectrum_table(&scheme, 0.0, &grid, Prefactor::Off).unwrap();
        let a = t.absorption();
        let imax = (0..a.len()).max_by(|&i, &j| a[i].total_cmp(&a[j])).unwrap();
        assert_eq!(t.rows[imax].delta_p, 0.0);
        let maxima = (1..a.len() - 1)
            .filter(|&i| a[i] > a[i - 1] && a[i] > a[i + 1])
            .count();
        assert_eq!(maxima, 1);
    }

    #[test]
    fn lambda_factor_two_has_two_peaks() {
        let scheme = Scheme::standard(Lambda);
        let omega_c = 3.798;
        let grid = Grid::default_for(omega_c, &scheme.gammas).unwrap();
        let t = spectrum_table(&scheme, omega_c, &grid, Prefactor::Off).unwrap();
        let a = t.absorption();
        let i0 = grid.zero_index().unwrap();
        assert!(a[i0] < a[i0 - 1] && a[i0] < a[i0 + 1]);
        let maxima = (1..a.len() - 1)
            .filter(|&i| a[i] > a[i - 1] && a[i] > a[i + 1])
            .count();
        assert_eq!(maxima, 2);
    }

    #[test]
    fn spectrum_propagates_degeneracy() {
        let scheme = Scheme::standard(Vee);
        let thr = scheme.threshold().unwrap();
        let grid = Grid::default_for(thr, &scheme.gammas).unwrap();
        assert!(matches!(
            spectrum_table(&scheme, thr, &grid, Prefactor::Off),
            Err(Error::DegeneratePole { .. })
        ));
    }
}
