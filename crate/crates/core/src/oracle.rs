//! Steady-state optical Bloch equations for the three-level schemes, used as
//! an independent check of the closed-form coherences.
//!
//! The density matrix is vectorised row-major: `ρ_mn` (0-based `m`, `n`)
//! sits at index `3m + n`. Equations are written in the frame rotating with
//! both fields (rotating-wave approximation, resonant coupling):
//!
//! ```text
//! dρ/dt = −i[H, ρ] + (population transfer W_ij) − γ_mn ρ_mn   (m ≠ n)
//! ```
//!
//! with `H` carrying `Ωp/2` on the probe transition, `Ωc/2` on the
//! coupling transition, and `−δp` on whichever levels the probe detuning
//! reaches in that frame.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::lineshape::{coherence_closed_form, poles, Grid, Prefactor, EPS_POLE};
use crate::model::{raw_threshold, DecayMatrix, FieldParams, PolarizationRates, Scheme, SystemKind};

pub const DIM: usize = 9;
pub const DEFAULT_PROBE_EPS: f64 = 1e-4;
pub const MAX_PROBE_EPS: f64 = 1e-2;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Coherence damping injected into the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DampingConvention {
    /// `γ_mn` exactly as derived from the decay matrix.
    #[default]
    Full,
    /// `γ_mn / 2`, the usual Lindblad half-sum.
    Halved,
}

impl DampingConvention {
    fn factor(self) -> f64 {
        match self {
            DampingConvention::Full => 1.0,
            DampingConvention::Halved => 0.5,
        }
    }
}

pub fn vec_index(m: usize, n: usize) -> usize {
    3 * m + n
}

#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub matrix: Matrix<DIM>,
    pub system: SystemKind,
    pub field: FieldParams,
    pub delta_p: f64,
    pub decay: DecayMatrix,
    pub gammas: PolarizationRates,
    pub convention: DampingConvention,
}

/// Rotating-frame level energies (0-based levels).
fn frame_energies(system: SystemKind, delta_p: f64) -> [f64; 3] {
    let d = -delta_p;
    match system {
        // level 1 is the probe's lower level; 2 and 3 are tied by the
        // resonant coupling
        SystemKind::Lambda | SystemKind::CascadeEit => [0.0, d, d],
        SystemKind::CascadeAt | SystemKind::Vee => [0.0, 0.0, d],
    }
}

pub fn build_liouvillian(
    scheme: &Scheme,
    omega_c: f64,
    omega_p: f64,
    delta_p: f64,
    convention: DampingConvention,
) -> Result<Liouvillian> {
    scheme.decay.validate_for(scheme.system)?;
    let field = FieldParams::new(omega_c, omega_p)?;
    if !delta_p.is_finite() {
        return Err(Error::InvalidArgument(format!("delta_p must be finite, got {delta_p}")));
    }
    let system = scheme.system;

    let mut h = [[ZERO; 3]; 3];
    for (k, e) in frame_energies(system, delta_p).into_iter().enumerate() {
        h[k][k] = Complex64::new(e, 0.0);
    }
    for (t, rabi) in [
        (system.probe_transition(), omega_p),
        (system.coupling_transition(), omega_c),
    ] {
        let (a, b) = (t.lower - 1, t.upper - 1);
        h[a][b] = Complex64::new(rabi / 2.0, 0.0);
        h[b][a] = Complex64::new(rabi / 2.0, 0.0);
    }

    let mut l = [[ZERO; DIM]; DIM];
    // −i(Hρ − ρH): (Hρ)_mn = Σ_k H_mk ρ_kn, (ρH)_mn = Σ_k ρ_mk H_kn
    for m in 0..3 {
        for n in 0..3 {
            let row = vec_index(m, n);
            for k in 0..3 {
                l[row][vec_index(k, n)] += -I * h[m][k];
                l[row][vec_index(m, k)] += I * h[k][n];
            }
        }
    }
    let damping = convention.factor();
    for m in 0..3 {
        for n in 0..3 {
            if m != n {
                l[vec_index(m, n)][vec_index(m, n)] -= damping * scheme.gammas.get(m + 1, n + 1);
            }
        }
    }
    for ((from, to), w) in scheme.decay.channels() {
        let (src, dst) = (vec_index(from - 1, from - 1), vec_index(to - 1, to - 1));
        l[src][src] -= w;
        l[dst][src] += w;
    }

    Ok(Liouvillian {
        matrix: l,
        system,
        field,
        delta_p,
        decay: scheme.decay,
        gammas: scheme.gammas,
        convention,
    })
}

impl Liouvillian {
    /// Largest entry of the summed population rows; zero when the
    /// equations conserve the trace.
    pub fn trace_flow_residual(&self) -> f64 {
        (0..DIM)
            .map(|col| {
                (0..3)
                    .map(|k| self.matrix[vec_index(k, k)][col])
                    .sum::<Complex64>()
                    .norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of `L[(m,n),(k,l)] = conj L[(n,m),(l,k)]`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (m, n, k, q) in index_quads() {
            let a = self.matrix[vec_index(m, n)][vec_index(k, q)];
            let b = self.matrix[vec_index(n, m)][vec_index(q, k)];
            worst = worst.max((a - b.conj()).norm());
        }
        worst
    }

    /// `L` with the `ρ_11` equation replaced by `Tr ρ = 1`.
    pub fn constrained_system(&self) -> (Matrix<DIM>, [Complex64; DIM]) {
        let mut a = self.matrix;
        let mut b = [ZERO; DIM];
        a[0] = [ZERO; DIM];
        for k in 0..3 {
            a[0][vec_index(k, k)] = ONE;
        }
        b[0] = ONE;
        (a, b)
    }
}

fn index_quads() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..81).map(|i| (i / 27, (i / 9) % 3, (i / 3) % 3, i % 3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub rho: [[Complex64; 3]; 3],
}

impl SteadyState {
    pub fn from_vec(v: &[Complex64; DIM]) -> Self {
        Self {
            rho: std::array::from_fn(|m| std::array::from_fn(|n| v[vec_index(m, n)])),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..3).map(|k| self.rho[k][k]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..3 {
            for n in 0..3 {
                worst = worst.max((self.rho[m][n] - self.rho[n][m].conj()).norm());
            }
        }
        worst
    }

    pub fn populations(&self) -> [f64; 3] {
        std::array::from_fn(|k| self.rho[k][k].re)
    }

    /// Checks Hermiticity, unit trace and nonnegative populations to `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
            && (self.trace() - ONE).norm() <= tol
            && (0..3).all(|k| self.rho[k][k].im.abs() <= tol && self.rho[k][k].re >= -tol)
    }

    /// Coherence `ρ_lower,upper` on the given transition (1-based levels).
    pub fn coherence(&self, lower: usize, upper: usize) -> Complex64 {
        self.rho[lower - 1][upper - 1]
    }
}

pub fn steady_state(l: &Liouvillian) -> Result<SteadyState> {
    let (a, b) = l.constrained_system();
    let v = linalg::solve(a, b)?;
    Ok(SteadyState::from_vec(&v))
}

/// Probe Rabi frequency used by the oracle for a given `probe_eps`.
pub fn probe_rabi(scheme: &Scheme, probe_eps: f64) -> Result<f64> {
    if !(probe_eps > 0.0 && probe_eps <= MAX_PROBE_EPS) {
        return Err(Error::InvalidArgument(format!(
            "probe_eps must lie in (0, {MAX_PROBE_EPS}], got {probe_eps}"
        )));
    }
    let scale = raw_threshold(scheme.system, &scheme.gammas).max(scheme.gammas.gamma23);
    if scale <= 0.0 {
        return Err(Error::InvalidArgument(
            "probe strength needs a positive threshold or gamma23".into(),
        ));
    }
    Ok(probe_eps * scale)
}

/// Steady-state probe coherence divided by `Ωp/2`, one value per grid point.
pub fn probe_response(scheme: &Scheme, omega_c: f64, grid: &Grid, probe_eps: f64) -> Result<Vec<Complex64>> {
    probe_response_with(scheme, omega_c, grid, probe_eps, DampingConvention::Full)
}

pub fn probe_response_with(
    scheme: &Scheme,
    omega_c: f64,
    grid: &Grid,
    probe_eps: f64,
    convention: DampingConvention,
) -> Result<Vec<Complex64>> {
    let omega_p = probe_rabi(scheme, probe_eps)?;
    let probe = scheme.system.probe_transition();
    grid.points()
        .par_iter()
        .map(|&delta_p| {
            let l = build_liouvillian(scheme, omega_c, omega_p, delta_p, convention)?;
            let ss = steady_state(&l)?;
            Ok(ss.coherence(probe.lower, probe.upper) / (omega_p / 2.0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    /// Complex `k` minimising `Σ|oracle − k·closed form|²`.
    pub scale: Complex64,
    /// RMS misfit relative to the RMS oracle response.
    pub residual: f64,
    /// Worst single-point misfit relative to the RMS oracle response.
    pub per_point: f64,
}

impl OracleVerdict {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual < tol
    }
}

/// Fits one complex scale between two equally sampled responses.
pub fn fit_scale(oracle: &[Complex64], model: &[Complex64]) -> Result<OracleVerdict> {
    if oracle.len() != model.len() || oracle.is_empty() {
        return Err(Error::InvalidArgument(
            "oracle and model must have the same nonzero length".into(),
        ));
    }
    let cc: f64 = model.iter().map(|c| c.norm_sqr()).sum();
    let oo: f64 = oracle.iter().map(|o| o.norm_sqr()).sum();
    if cc == 0.0 || oo == 0.0 {
        return Err(Error::InvalidArgument(
            "cannot fit a scale to an identically zero response".into(),
        ));
    }
    let co: Complex64 = model.iter().zip(oracle).map(|(c, o)| c.conj() * o).sum();
    let scale = co / cc;
    let misfit: Vec<f64> = oracle.iter().zip(model).map(|(o, c)| (o - scale * c).norm()).collect();
    let rr: f64 = misfit.iter().map(|r| r * r).sum();
    let n = oracle.len() as f64;
    let rms_oracle = (oo / n).sqrt();
    Ok(OracleVerdict {
        scale,
        residual: (rr / oo).sqrt(),
        per_point: misfit.iter().copied().fold(0.0, f64::max) / rms_oracle,
    })
}

pub fn compare_to_closed_form(scheme: &Scheme, omega_c: f64, grid: &Grid, probe_eps: f64) -> Result<OracleVerdict> {
    let system = scheme.system;
    if poles(system, &scheme.gammas, omega_c).separation() <= EPS_POLE {
        return Err(Error::DegeneratePole {
            system,
            omega_c,
            threshold: raw_threshold(system, &scheme.gammas),
        });
    }
    let oracle = probe_response(scheme, omega_c, grid, probe_eps)?;
    let model = grid
        .points()
        .iter()
        .map(|&d| coherence_closed_form(system, &scheme.gammas, omega_c, d, Prefactor::On))
        .collect::<Result<Vec<_>>>()?;
    fit_scale(&oracle, &model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemKind::*;

    fn standard(s: SystemKind) -> Scheme {
        Scheme::standard(s)
    }

    #[test]
    fn free_evolution_is_only_phase_rotation() {
        let scheme = Scheme::new(Lambda, DecayMatrix::zero()).unwrap();
        let l = build_liouvillian(&scheme, 0.0, 0.0, 0.7, DampingConvention::Full).unwrap();
        let e = frame_energies(Lambda, 0.7);
        for row in 0..DIM {
            for col in 0..DIM {
                let (m, n) = (row / 3, row % 3);
                let expected = if row == col {
                    -I * (e[m] - e[n])
                } else {
                    ZERO
                };
                assert_eq!(l.matrix[row][col], expected);
            }
        }
        assert!(matches!(steady_state(&l), Err(Error::SingularSystem { .. })));
    }

    #[test]
    fn construction_invariants() {
        for s in SystemKind::ALL {
            for (oc, d) in [(0.0, 0.0), (1.3, -0.4), (7.0, 2.5)] {
                let l = build_liouvillian(&standard(s), oc, 1e-3, d, DampingConvention::Full).unwrap();
                assert!(l.trace_flow_residual() <= 1e-14, "{s}");
                assert!(l.hermiticity_residual() <= 1e-14, "{s}");
            }
        }
    }

    #[test]
    fn lambda_without_probe_pumps_to_ground() {
        let l = build_liouvillian(&standard(Lambda), 3.0, 0.0, 0.2, DampingConvention::Full).unwrap();
        let ss = steady_state(&l).unwrap();
        let p = ss.populations();
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12 && p[2].abs() < 1e-12);
    }

    #[test]
    fn no_fields_relaxes_to_ground() {
        let l = build_liouvillian(&standard(Lambda), 0.0, 0.0, 0.0, DampingConvention::Full).unwrap();
        let ss = steady_state(&l).unwrap();
        for m in 0..3 {
            for n in 0..3 {
                let expected = if m == 0 && n == 0 { ONE } else { ZERO };
                assert!((ss.rho[m][n] - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn two_level_limit_matches_lorentzian() {
        // analytic weak-probe two-level coherence: ρ12 = (Ωp/2)/(δp − iγ12)
        let scheme = standard(CascadeEit);
        let g12 = scheme.gammas.gamma12;
        let omega_p = 1e-4 * g12;
        for d in [-3.0, -0.5, 0.0, 0.2, 4.0] {
            let l = build_liouvillian(&scheme, 0.0, omega_p, d, DampingConvention::Full).unwrap();
            let rho12 = steady_state(&l).unwrap().coherence(1, 2);
            let analytic = (omega_p / 2.0) / Complex64::new(d, -g12);
            assert!((rho12 - analytic).norm() <= 1e-8 * analytic.norm(), "{d}");
        }
    }

    #[test]
    fn steady_state_is_physical() {
        for s in SystemKind::ALL {
            for oc in [0.0, 0.5, 2.0, 20.0] {
                for d in [-2.0, 0.0, 1.0] {
                    let l = build_liouvillian(&standard(s), oc, 1e-3, d, DampingConvention::Full).unwrap();
                    let ss = steady_state(&l).unwrap();
                    assert!(ss.is_physical(1e-12), "{s} {oc} {d}: {:?}", ss.rho);
                }
            }
        }
    }

    #[test]
    fn probe_eps_is_validated() {
        let scheme = standard(Vee);
        let grid = Grid::from_points(vec![0.0]).unwrap();
        assert!(probe_response(&scheme, 1.0, &grid, 0.0).is_err());
        assert!(probe_response(&scheme, 1.0, &grid, 0.02).is_err());
        assert!(probe_response(&scheme, 1.0, &grid, 1e-2).is_ok());
    }

    #[test]
    fn cascade_at_response_vanishes_without_coupling() {
        let scheme = standard(CascadeAt);
        let grid = Grid::linspace(-2.0, 2.0, 5).unwrap();
        let r = probe_response(&scheme, 0.0, &grid, DEFAULT_PROBE_EPS).unwrap();
        assert!(r.iter().all(|z| z.norm() < 1e-12));
        let weak = probe_response(&scheme, 1e-3, &grid, DEFAULT_PROBE_EPS).unwrap();
        assert!(weak.iter().all(|z| z.norm() < 1e-5));
    }

    #[test]
    fn verdict_invariants() {
        let o = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0), Complex64::new(-1.0, 1.0)];
        let c = [Complex64::new(1.1, 0.0), Complex64::new(0.0, 1.8), Complex64::new(-1.0, 0.7)];
        let v = fit_scale(&o, &c).unwrap();
        assert!(v.residual >= 0.0 && v.residual <= v.per_point);
        let exact = fit_scale(&o, &o).unwrap();
        assert!(exact.residual < 1e-15 && (exact.scale - ONE).norm() < 1e-15);
        assert!(!exact.passes(0.0));
        assert!(fit_scale(&o, &[ZERO; 3]).is_err());
    }

    #[test]
    fn halved_convention_changes_the_answer() {
        let scheme = standard(Lambda);
        let grid = Grid::linspace(-3.0, 3.0, 7).unwrap();
        let a = probe_response_with(&scheme, 1.0, &grid, 1e-4, DampingConvention::Full).unwrap();
        let b = probe_response_with(&scheme, 1.0, &grid, 1e-4, DampingConvention::Halved).unwrap();
        assert!(a.iter().zip(&b).any(|(x, y)| (x - y).norm() > 1e-3));
    }
}
