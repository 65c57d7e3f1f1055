//! Quadrature rules on stored time grids.

/// Nodes (on `[0, 1]`) and weights of the two-point Gauss-Legendre rule.
pub const GAUSS2: [(f64, f64); 2] = [
    (0.5 - 0.288_675_134_594_812_9, 0.5),
    (0.5 + 0.288_675_134_594_812_9, 0.5),
];

/// Composite trapezoid rule on arbitrary nodes.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Weights integrating the quadratic interpolant through `nodes` over `[lo, hi]`.
fn quadratic_weights(nodes: [f64; 3], lo: f64, hi: f64) -> [f64; 3] {
    // local coordinates keep the antiderivative differences well conditioned
    let [x0, x1, x2] = nodes.map(|x| x - lo);
    let h = hi - lo;
    let antideriv = |x: f64, b: f64, c: f64| x * x * x / 3.0 - (b + c) * x * x / 2.0 + b * c * x;
    let w = |a: f64, b: f64, c: f64| antideriv(h, b, c) / ((a - b) * (a - c));
    [w(x0, x1, x2), w(x1, x0, x2), w(x2, x0, x1)]
}

/// Composite Simpson rule on arbitrary (non-uniform) nodes. Intervals are
/// taken in pairs; with an odd interval count the last interval integrates
/// the quadratic through the final three nodes. Two nodes fall back to the
/// trapezoid rule.
pub fn simpson(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let n = times.len();
    if n < 3 {
        return trapezoid(times, values);
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut acc = 0.0;
    let mut i = 0;
    while i < paired {
        let nodes = [times[i], times[i + 1], times[i + 2]];
        let w = quadratic_weights(nodes, times[i], times[i + 2]);
        acc += w[0] * values[i] + w[1] * values[i + 1] + w[2] * values[i + 2];
        i += 2;
    }
    if paired < intervals {
        let nodes = [times[n - 3], times[n - 2], times[n - 1]];
        let w = quadratic_weights(nodes, times[n - 2], times[n - 1]);
        acc += w[0] * values[n - 3] + w[1] * values[n - 2] + w[2] * values[n - 1];
    }
    acc
}
