//! Real roots of low-degree polynomials, as needed by the 7-point solver.

/// Real roots of `c3 x^3 + c2 x^2 + c1 x + c0 = 0`, Newton-polished and
/// deduplicated. Near-zero leading coefficients degrade gracefully to the
/// quadratic / linear case.
pub(crate) fn real_cubic_roots(c3: f64, c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    let scale = c3.abs().max(c2.abs()).max(c1.abs()).max(c0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let mut roots = if c3.abs() < 1e-12 * scale {
        real_quadratic_roots(c2, c1, c0)
    } else {
        depressed_cubic_roots(c2 / c3, c1 / c3, c0 / c3)
    };
    for root in &mut roots {
        *root = polish(*root, c3, c2, c1, c0);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs())));
    roots
}

/// Roots of the monic cubic `x^3 + a x^2 + b x + c`.
fn depressed_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    // Substitute x = t - a/3 to remove the quadratic term.
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let shift = -a / 3.0;
    let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
    if disc > 0.0 {
        // One real root (Cardano). Pick the larger-magnitude cube root first.
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        vec![u + v + shift]
    } else {
        // Three real roots (trigonometric form); disc == 0 collapses them.
        if p.abs() < 1e-300 {
            return vec![(-q).cbrt() + shift];
        }
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos();
        (0..3)
            .map(|k| m * ((theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos() + shift)
            .collect()
    }
}

fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if a.abs() < 1e-12 * scale {
        if b.abs() < 1e-12 * scale {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    // Citardauq form on one branch avoids cancellation.
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

fn polish(x0: f64, c3: f64, c2: f64, c1: f64, c0: f64) -> f64 {
    let mut x = x0;
    for _ in 0..2 {
        let f = ((c3 * x + c2) * x + c1) * x + c0;
        let df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
        if df.abs() < 1e-300 {
            break;
        }
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_roots(mut got: Vec<f64>, want: &[f64]) {
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got.len(), want.len(), "roots = {got:?}, want {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-9, "root {g} vs {w}");
        }
    }

    #[test]
    fn three_distinct_roots() {
        // (x - 1)(x - 2)(x - 3)
        assert_roots(real_cubic_roots(1.0, -6.0, 11.0, -6.0), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn double_root_collapses() {
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        assert_roots(real_cubic_roots(1.0, 0.0, -3.0, 2.0), &[-2.0, 1.0]);
    }

    #[test]
    fn single_real_root() {
        // x^3 + x = x (x^2 + 1)
        assert_roots(real_cubic_roots(1.0, 0.0, 1.0, 0.0), &[0.0]);
    }

    #[test]
    fn quadratic_fallback() {
        assert_roots(real_cubic_roots(0.0, 1.0, 0.0, -4.0), &[-2.0, 2.0]);
        assert_roots(real_cubic_roots(0.0, 1.0, 0.0, 4.0), &[]);
        assert_roots(real_cubic_roots(0.0, 0.0, 2.0, -4.0), &[2.0]);
    }

    #[test]
    fn roots_satisfy_polynomial() {
        let cases = [
            (2.0, -3.0, -11.0, 6.0),
            (1.0, 5.0, -2.0, -24.0),
            (-0.3, 0.7, 1.9, -0.2),
            (1e-3, 1.0, -1.0, -1.0),
        ];
        for (c3, c2, c1, c0) in cases {
            let coeffs: [f64; 4] = [c3, c2, c1, c0];
            let scale: f64 = coeffs.iter().fold(0.0, |m: f64, c| m.max(c.abs()));
            for x in real_cubic_roots(c3, c2, c1, c0) {
                let v = ((c3 * x + c2) * x + c1) * x + c0;
                let bound = 1e-8 * scale * (1.0 + x.abs()).powi(3);
                assert!(v.abs() <= bound, "p({x}) = {v} for {c3} {c2} {c1} {c0}");
            }
        }
    }
}
