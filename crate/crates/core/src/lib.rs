//! Probe-absorption lineshapes of three-level atoms driven by a weak probe
//! and a resonant coupling field.
//!
//! The crate covers the four canonical schemes (Lambda, Cascade-EIT,
//! Cascade-AT, Vee) and answers, for any operating point, whether a dip in
//! the probe absorption is Autler-Townes splitting (a gap between two
//! displaced resonances), electromagnetically induced transparency
//! (destructive interference of two overlapping resonances), or whether the
//! line is carried by a single resonance.
//!
//! - [`model`]: level schemes, decay rates, coherence damping, thresholds.
//! - [`lineshape`]: closed-form coherences, pole pairs, two-resonance split.
//! - [`analysis`]: ratio scans, regime classification, dips, evolution suites.
//! - [`oracle`]: steady-state optical Bloch equations as an independent check.
//!
//! ```
//! use eitat::{analysis, model::{Scheme, SystemKind}};
//!
//! let lambda = Scheme::standard(SystemKind::Lambda);
//! let omega_c = lambda.omega_c_for_factor(0.5)?;
//! let report = analysis::classify(&lambda, omega_c)?;
//! assert_eq!(report.phenomenon, analysis::Phenomenon::Eit);
//! # Ok::<(), eitat::Error>(())
//! ```

pub mod analysis;
mod error;
pub mod linalg;
pub mod lineshape;
pub mod model;
pub mod oracle;
mod search;

pub use error::{Error, Result};

// The guide's and README's code listings run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/schemes.md")]
    mod schemes {}
    #[doc = include_str!("../../../book/src/resonances.md")]
    mod resonances {}
    #[doc = include_str!("../../../book/src/regimes.md")]
    mod regimes {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
