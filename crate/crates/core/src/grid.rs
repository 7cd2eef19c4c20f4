//! Discretization of the t-axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScheme {
    Uniform,
    Geometric,
}

/// Strictly increasing nodes 0 = t₀ < t₁ < … < t_N = t_max with N ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct TGrid {
    nodes: Vec<f64>,
    scheme: GridScheme,
}

impl TGrid {
    /// `n_nodes` equally spaced nodes on [0, t_max].
    pub fn uniform(t_max: f64, n_nodes: usize) -> Result<Self> {
        check_extent(t_max, n_nodes)?;
        let last = (n_nodes - 1) as f64;
        let mut nodes: Vec<f64> = (0..n_nodes).map(|k| t_max * (k as f64) / last).collect();
        nodes[n_nodes - 1] = t_max;
        Ok(TGrid {
            nodes,
            scheme: GridScheme::Uniform,
        })
    }

    /// t₀ = 0 followed by `n_nodes - 1` geometrically spaced nodes from
    /// `t_first` to `t_max`.
    pub fn geometric(t_max: f64, n_nodes: usize, t_first: f64) -> Result<Self> {
        check_extent(t_max, n_nodes)?;
        if !(t_first > 0.0 && t_first < t_max) {
            return Err(Error::InvalidParameter {
                name: "tgrid.t_first",
                reason: format!("must lie in (0, t_max), got {t_first}"),
            });
        }
        let steps = (n_nodes - 2) as f64;
        let ratio = (t_max / t_first).ln() / steps;
        let mut nodes = Vec::with_capacity(n_nodes);
        nodes.push(0.0);
        for k in 0..n_nodes - 1 {
            nodes.push(t_first * (ratio * k as f64).exp());
        }
        nodes[n_nodes - 1] = t_max;
        Ok(TGrid {
            nodes,
            scheme: GridScheme::Geometric,
        })
    }

    /// Wraps caller-supplied nodes after checking the grid invariants.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidParameter {
                name: "tgrid",
                reason: format!("need at least 3 nodes, got {}", nodes.len()),
            });
        }
        if nodes[0] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "tgrid",
                reason: "first node must be 0".into(),
            });
        }
        if nodes.iter().any(|t| !t.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "tgrid",
                reason: "nodes must be finite and strictly increasing".into(),
            });
        }
        Ok(TGrid {
            nodes,
            scheme: GridScheme::Geometric,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn scheme(&self) -> GridScheme {
        self.scheme
    }

    /// Composite trapezoid weights on the (possibly nonuniform) nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        trapezoid_weights(&self.nodes)
    }

    /// Weights of the outer t-integral: composite Simpson on uniform grids
    /// (a Simpson 3/8 panel closes an odd interval count), trapezoid
    /// otherwise.
    pub fn outer_weights(&self) -> Vec<f64> {
        match self.scheme {
            GridScheme::Uniform => simpson_weights(self.nodes.len(), self.nodes[1] - self.nodes[0]),
            GridScheme::Geometric => self.trapezoid_weights(),
        }
    }
}

fn check_extent(t_max: f64, n_nodes: usize) -> Result<()> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tgrid.t_max",
            reason: format!("must be positive and finite, got {t_max}"),
        });
    }
    if n_nodes < 3 {
        return Err(Error::InvalidParameter {
            name: "tgrid.n",
            reason: format!("need at least 3 nodes, got {n_nodes}"),
        });
    }
    Ok(())
}

/// Trapezoid weights for arbitrary sorted abscissae.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = 0.5 * (x[i + 1] - x[i]);
        w[i] += h;
        w[i + 1] += h;
    }
    w
}

/// Composite Simpson weights for `n` equally spaced nodes with spacing `h`.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    if intervals == 1 {
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    // An odd interval count leaves the last three intervals to the 3/8 rule.
    let simpson_end = if intervals.is_multiple_of(2) {
        intervals
    } else {
        intervals - 3
    };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if simpson_end < intervals {
        let k = simpson_end;
        w[k] += 3.0 * h / 8.0;
        w[k + 1] += 9.0 * h / 8.0;
        w[k + 2] += 9.0 * h / 8.0;
        w[k + 3] += 3.0 * h / 8.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(w: &[f64], x: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        w.iter().zip(x).map(|(w, x)| w * f(*x)).sum()
    }

    #[test]
    fn uniform_grid_invariants() {
        let g = TGrid::uniform(2.0, 5).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(TGrid::uniform(1.0, 2).is_err());
        assert!(TGrid::uniform(-1.0, 10).is_err());
    }

    #[test]
    fn geometric_grid_is_strictly_increasing() {
        let g = TGrid::geometric(10.0, 50, 1e-3).unwrap();
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.nodes()[1], 1e-3);
        assert_eq!(g.t_max(), 10.0);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn from_nodes_checks_invariants() {
        assert!(TGrid::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TGrid::from_nodes(vec![0.1, 1.0, 2.0]).is_err());
        assert!(TGrid::from_nodes(vec![0.0, 1.0, 3.0]).is_ok());
    }

    #[test]
    fn simpson_is_exact_for_cubics_with_either_parity() {
        for n in [3usize, 4, 5, 8, 2048] {
            let g = TGrid::uniform(1.0, n).unwrap();
            let w = g.outer_weights();
            let v = integrate(&w, g.nodes(), |t| t * t * t - t + 2.0);
            assert!((v - (0.25 - 0.5 + 2.0)).abs() < 1e-13, "n = {n}: {v}");
        }
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = TGrid::uniform(1.0, 101).unwrap();
        let v = integrate(&g.trapezoid_weights(), g.nodes(), |t| t);
        assert!((v - 0.5).abs() < 1e-12);
    }
}
