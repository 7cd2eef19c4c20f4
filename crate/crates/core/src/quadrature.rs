//! Gauss-Legendre rules and composite panels over breakpoint-delimited
//! segments.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1],
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel order used by [`composite_gauss_legendre`].
pub const PANEL_ORDER: usize = 8;

/// Composite Gauss-Legendre rule on [breaks[0], breaks[last]] with panel
/// boundaries at every breakpoint, using roughly `n_nodes` nodes in total.
/// Breakpoints need not be sorted or distinct. Nodes are strictly interior
/// to each segment, so integrands are never evaluated on a breakpoint.
pub fn composite_gauss_legendre(breaks: &[f64], n_nodes: usize) -> (Vec<f64>, Vec<f64>) {
    let mut b: Vec<f64> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, c| (*a - *c).abs() <= 1e-15 * a.abs().max(c.abs()).max(1.0));
    if b.len() < 2 {
        return (Vec::new(), Vec::new());
    }
    let total = b[b.len() - 1] - b[0];
    let (gx, gw) = gauss_legendre(PANEL_ORDER);
    let total_panels = (n_nodes / PANEL_ORDER).max(b.len() - 1);
    let mut nodes = Vec::with_capacity(n_nodes + PANEL_ORDER * b.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for seg in b.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let panels = ((total_panels as f64 * (hi - lo) / total).round() as usize).max(1);
        let h = (hi - lo) / panels as f64;
        for k in 0..panels {
            let a = lo + h * k as f64;
            let mid = a + 0.5 * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
    }
    (nodes, weights)
}
