//! Adaptive Simpson quadrature for smooth integrands, used to cross-check
//! closed-form integrals and to evaluate the one auxiliary integral that has
//! no elementary antiderivative.

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
}

fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    whole: f64,
    m: f64,
    fm: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let (left, lm, flm) = simpson(f, a, fa, m, fm);
    let (right, rm, frm) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return left + right + delta / 15.0;
    }
    recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * eps, depth - 1)
        + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * eps, depth - 1)
}

/// Integral of `f` over `[a, b]` to absolute tolerance about `eps`.
/// `f` must be finite on the closed interval; the recursion depth cap keeps
/// pathological integrands from hanging rather than silently degrading
/// well-behaved ones.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, eps, 48)
}
