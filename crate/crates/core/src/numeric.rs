//! Scalar root finding and maximization used by the norm functionals.

/// Finds the crossing point of a nonincreasing function `f` with `target`
/// inside `[lo, hi]`, where `f(lo) > target >= f(hi)`.
///
/// Bisects until the bracket can no longer be split in floating point or
/// its relative width drops below `rel_tol`. Returns the upper end of the
/// final bracket, which always satisfies `f(hi) <= target`.
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * hi {
            break;
        }
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Bracket `[lo, hi]` around the point where the nonincreasing `f` drops to
/// `target`, starting from `start > 0` and expanding by factors of two.
pub fn bracket_decreasing<F: Fn(f64) -> f64>(f: &F, target: f64, start: f64) -> (f64, f64) {
    let mut hi = start;
    let mut guard = 0;
    while f(hi) > target && guard < 4000 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = hi / 2.0;
    guard = 0;
    while f(lo) <= target && lo > f64::MIN_POSITIVE && guard < 4000 {
        hi = lo;
        lo /= 2.0;
        guard += 1;
    }
    (lo, hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of `f` on `[a, b]`.
///
/// Stops when the interval is shorter than `tol` or after `max_iter`
/// iterations. Returns `(argmax, max)` over the evaluated points.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..max_iter {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }
    best
}

/// Logarithmically spaced grid with `points` entries from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt() {
        let f = |c: f64| 2.0 / (c * c);
        let (lo, hi) = bracket_decreasing(&f, 1.0, 1.0);
        assert!(f(lo) > 1.0 && f(hi) <= 1.0);
        let r = bisect_decreasing(f, 1.0, lo, hi, 0.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bracket_shrinks_towards_zero() {
        let f = |c: f64| 1e-30 / c;
        let (lo, hi) = bracket_decreasing(&f, 1.0, 1.0);
        assert!(f(lo) > 1.0 && f(hi) <= 1.0);
    }

    #[test]
    fn golden_section_interior_and_endpoint() {
        let (x, v) = golden_max(|t| -(t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-12, 200);
        assert!((x - 0.3).abs() < 1e-6 && v <= 0.0);
        let (x, _) = golden_max(|t| t, 0.0, 2.0, 1e-12, 200);
        assert!((x - 2.0).abs() < 1e-9);
    }

    #[test]
    fn log_grid_endpoints_exact() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[6], 1e3);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}
