//! Dense complex LU solve with partial pivoting for small fixed-size systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots smaller than this, relative to the largest entry of the input
/// matrix, mark the system as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

pub type Matrix<const N: usize> = [[Complex64; N]; N];

/// Solves `a·x = b` by Gaussian elimination with row partial pivoting.
pub fn solve<const N: usize>(mut a: Matrix<N>, mut b: [Complex64; N]) -> Result<[Complex64; N]> {
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::SingularSystem { column: 0, pivot: 0.0 });
    }
    for col in 0..N {
        let pivot_row = (col..N)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("non-empty range");
        let pivot = a[pivot_row][col];
        if pivot.norm() <= SINGULAR_REL_TOL * scale {
            return Err(Error::SingularSystem {
                column: col,
                pivot: pivot.norm(),
            });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..N {
            let m = a[row][col] / pivot;
            if m == Complex64::new(0.0, 0.0) {
                continue;
            }
            let upper = a[col];
            for (entry, u) in a[row][col..].iter_mut().zip(&upper[col..]) {
                *entry -= m * u;
            }
            let rhs = b[col];
            b[row] -= m * rhs;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); N];
    for row in (0..N).rev() {
        let tail: Complex64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}
