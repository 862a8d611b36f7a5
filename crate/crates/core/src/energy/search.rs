//! One-dimensional solvers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`. Stops when
/// the bracket is narrower than `tol` or after `max_iter` shrinks. Returns
/// the best evaluated point and its value.
pub fn golden_section<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Outcome of [`bisect_increasing`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Root of an increasing function with `g(lo) < 0 < g(hi)`. Stops once the
/// bracket is narrower than `width_tol` and `|g(mid)| <= value_tol`, or after
/// `max_iter` halvings.
pub fn bisect_increasing<G>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    width_tol: f64,
    value_tol: f64,
    max_iter: usize,
) -> Bisection
where
    G: FnMut(f64) -> f64,
{
    let mut mid = 0.5 * (lo + hi);
    let mut value = g(mid);
    let mut iterations = 0;
    while iterations < max_iter {
        if hi - lo < width_tol && value.abs() <= value_tol {
            break;
        }
        if value < 0.0 {
            lo = mid;
        } else if value > 0.0 {
            hi = mid;
        } else {
            break;
        }
        mid = 0.5 * (lo + hi);
        value = g(mid);
        iterations += 1;
    }
    Bisection {
        root: mid,
        value,
        iterations,
    }
}
