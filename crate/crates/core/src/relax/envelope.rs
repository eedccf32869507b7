//! Univariate convex and concave envelopes, each returned as a value and a
//! slope at the query point.

/// Affine function through `(l, fl)` and `(u, fu)`; constant when `l == u`.
pub fn secant(l: f64, fl: f64, u: f64, fu: f64, t: f64) -> (f64, f64) {
    if u - l <= 0.0 {
        return (fl.max(fu), 0.0);
    }
    let m = (fu - fl) / (u - l);
    (fl + m * (t - l), m)
}

fn tanh_slope(t: f64) -> f64 {
    let th = t.tanh();
    1.0 - th * th
}

/// Convex envelope of `tanh` on `[l, u]`, evaluated at `t`.
pub fn tanh_cv(l: f64, u: f64, t: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (t.tanh(), tanh_slope(t));
    }
    if l >= 0.0 {
        return secant(l, l.tanh(), u, u.tanh(), t);
    }
    // tangent at p in [l, 0] that passes through (u, tanh u)
    let gap = |p: f64| p.tanh() + tanh_slope(p) * (u - p) - u.tanh();
    if gap(l) >= 0.0 {
        return secant(l, l.tanh(), u, u.tanh(), t);
    }
    let (mut a, mut b) = (l, 0.0);
    while b - a > 1e-12 * (1.0 + a.abs()) {
        let m = 0.5 * (a + b);
        if gap(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    // `a` keeps the tangent below tanh(u), so the line stays underneath.
    let p = a;
    if t <= p {
        (t.tanh(), tanh_slope(t))
    } else {
        let m = tanh_slope(p);
        (p.tanh() + m * (t - p), m)
    }
}

/// Concave envelope of `tanh` on `[l, u]`, by odd symmetry.
pub fn tanh_cc(l: f64, u: f64, t: f64) -> (f64, f64) {
    let (v, m) = tanh_cv(-u, -l, -t);
    (-v, m)
}

/// Concave envelope of `exp(-w s^2)` on `s` in `[a, b]`.
pub fn bump_cc(w: f64, a: f64, b: f64, s: f64) -> (f64, f64) {
    let g = |s: f64| (-w * s * s).exp();
    let dg = |s: f64| -2.0 * w * s * (-w * s * s).exp();
    let sigma = (0.5 / w).sqrt();
    if b <= -sigma || a >= sigma || b - a <= 0.0 {
        return secant(a, g(a), b, g(b), s);
    }
    if a >= -sigma && b <= sigma {
        return (g(s), dg(s));
    }

    // Tangent point for the chord leaving endpoint `e` (left of the concave
    // part); `None` when the plain secant to `far` is already the envelope.
    let touch = |e: f64, far: f64| -> Option<f64> {
        let gap = |p: f64| g(p) + dg(p) * (e - p) - g(e);
        let top = far.min(0.0);
        if gap(top) <= 0.0 {
            return None;
        }
        let (mut lo, mut hi) = (-sigma, top);
        while hi - lo > 1e-12 * (1.0 + lo.abs()) {
            let m = 0.5 * (lo + hi);
            if gap(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        // `hi` keeps the tangent above g(e).
        Some(hi)
    };

    let left = if a < -sigma { Some(touch(a, b)) } else { None };
    // mirror image for the right tail
    let right = if b > sigma {
        Some(touch(-b, -a).map(|p| -p))
    } else {
        None
    };

    if matches!(left, Some(None)) || matches!(right, Some(None)) {
        return secant(a, g(a), b, g(b), s);
    }
    let pl = left.flatten();
    let pr = right.flatten();
    if let Some(p) = pl {
        if s <= p {
            let m = dg(p);
            return (g(p) + m * (s - p), m);
        }
    }
    if let Some(p) = pr {
        if s >= p {
            let m = dg(p);
            return (g(p) + m * (s - p), m);
        }
    }
    (g(s), dg(s))
}
