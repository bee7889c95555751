//! One-dimensional maximisation.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `rel_tol·(|a|+|b|) + abs_tol`.
/// Returns the best sample seen, which is never worse than either end.
pub(crate) fn golden_section_max<F>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64, abs_tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut best = {
        let (fa, fb) = (f(a), f(b));
        if fb > fa {
            (b, fb)
        } else {
            (a, fa)
        }
    };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= rel_tol * (a.abs() + b.abs()) + abs_tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_vertex() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 2.0, 1e-12, 1e-14);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn finds_lorentzian_at_origin() {
        let (x, _) = golden_section_max(|x| 1.0 / (x * x + 0.01), -0.5, 0.4, 1e-10, 1e-14);
        assert!(x.abs() < 1e-6);
    }

    #[test]
    fn monotone_function_returns_endpoint() {
        let (x, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-10, 1e-14);
        assert_eq!(x, 1.0);
    }
}
