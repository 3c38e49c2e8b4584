//! Gauss-Legendre quadrature and composite rules.

/// Gauss-Legendre nodes and weights on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; agrees with standard tables to
/// ~1e-15 for n <= 128.
pub fn gl_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d2) = legendre(n, x);
                dp = d2;
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    // cos() guesses descend; return ascending nodes.
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Legendre polynomial P_n and derivative P_n' at x via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre nodes and weights mapped to [a, b].
pub fn gl_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gl_nodes(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| half * w).collect(),
    )
}

/// Composite Gauss-Legendre integral of `f` over [a, b]: `panels` equal panels,
/// `nodes` points each.
pub fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, nodes: usize) -> f64 {
    let (xs, ws) = gl_nodes(nodes);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (x, w) in xs.iter().zip(&ws) {
            total += 0.5 * h * w * f(mid + 0.5 * h * x);
        }
    }
    total
}

/// Composite Simpson weights on [0, t] with n (even) intervals: (nodes, weights).
pub fn simpson_on(n: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2 && n % 2 == 0, "simpson rule needs an even interval count");
    let h = t / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut weights = vec![1.0; n + 1];
    for i in 1..n {
        weights[i] = if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    for w in &mut weights {
        *w *= t / (3.0 * n as f64);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gl_exact_on_polynomials() {
        // GL-8 integrates degree <= 15 exactly: int_{-1}^{1} x^14 dx = 2/15.
        let (xs, ws) = gl_nodes(8);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(got, 2.0 / 15.0, max_relative = 1e-14);
    }

    #[test]
    fn gl_weights_sum_to_interval_length() {
        for n in [4, 16, 64] {
            let (_, ws) = gl_on(n, 1.0, 2.0);
            let s: f64 = ws.iter().sum();
            assert_relative_eq!(s, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn gl_nodes_symmetric() {
        let (xs, ws) = gl_nodes(64);
        for i in 0..32 {
            assert_relative_eq!(xs[i], -xs[63 - i], epsilon = 1e-14);
            assert_relative_eq!(ws[i], ws[63 - i], max_relative = 1e-13);
        }
    }

    #[test]
    fn composite_matches_single_panel_on_smooth_integrand() {
        let f = |x: f64| (3.0 * x).sin() * (-x).exp();
        let single = composite_gl(&f, 0.0, 2.0, 1, 64);
        let multi = composite_gl(&f, 0.0, 2.0, 16, 24);
        assert_relative_eq!(single, multi, max_relative = 1e-13);
    }

    #[test]
    fn simpson_weights_integrate_cubics_exactly() {
        let (xs, ws) = simpson_on(16, 2.0);
        let got: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(3)).sum();
        assert_relative_eq!(got, 4.0, max_relative = 1e-13);
    }
}
