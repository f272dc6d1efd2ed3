//! Scalar root bracketing.

/// Bisection on `[a, b]` where `f(a)` and `f(b)` differ in sign.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if !(fa.signum() != fb.signum()) {
        return None;
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= xtol || m == a || m == b {
            return Some(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Grows a symmetric bracket around `x0` until `f` changes sign, then bisects.
pub(crate) fn root_near(f: impl Fn(f64) -> f64, x0: f64, step: f64, max_width: f64, xtol: f64) -> Option<f64> {
    let mut h = step;
    while h <= max_width {
        if let Some(r) = bisect(&f, x0 - h, x0 + h, xtol) {
            return Some(r);
        }
        h *= 2.0;
    }
    None
}
