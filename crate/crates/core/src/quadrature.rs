//! Composite Gauss-Legendre rules on finite intervals.

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex;

use crate::error::{Error, Result};

pub const MAX_NODES: usize = 2000;
pub const DEFAULT_PANEL_WIDTH: f64 = 1.0;
pub const DEFAULT_NODES_PER_PANEL: usize = 32;
/// Tails are cut where the weight drops below this fraction of its peak.
pub const DEFAULT_TAIL_TOL: f64 = 1e-18;

/// Equal-width panels, each carrying the same Gauss-Legendre rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraturePlan {
    lo: f64,
    hi: f64,
    panels: usize,
    nodes_per_panel: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadraturePlan {
    /// Panels of width at most `panel_width` covering `[lo, hi]`.
    pub fn new(lo: f64, hi: f64, panel_width: f64, nodes_per_panel: usize) -> Result<Self> {
        if !(hi > lo) || !(panel_width > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!(
                "invalid quadrature interval [{lo}, {hi}] with panel width {panel_width}"
            )));
        }
        let panels = ((hi - lo) / panel_width).ceil().max(1.0) as usize;
        Self::with_panels(lo, hi, panels, nodes_per_panel)
    }

    pub fn with_panels(lo: f64, hi: f64, panels: usize, nodes_per_panel: usize) -> Result<Self> {
        let total = panels * nodes_per_panel;
        if total > MAX_NODES {
            return Err(Error::SizeLimit {
                what: "quadrature nodes",
                got: total,
                max: MAX_NODES,
            });
        }
        let rule = GaussLegendre::new(nodes_per_panel)
            .map_err(|e| Error::Parameter(format!("Gauss-Legendre rule: {e}")))?;
        let width = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let mid = a + 0.5 * width;
            for &(x, w) in rule.as_node_weight_pairs() {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        // ascending order regardless of the rule's internal ordering
        let mut idx: Vec<usize> = (0..total).collect();
        idx.sort_by(|&i, &j| nodes[i].total_cmp(&nodes[j]));
        let nodes = idx.iter().map(|&i| nodes[i]).collect();
        let weights = idx.iter().map(|&i| weights[i]).collect();
        Ok(QuadraturePlan {
            lo,
            hi,
            panels,
            nodes_per_panel,
            nodes,
            weights,
        })
    }

    /// Interval for a weight decaying like `|x|^degree e^{-left_rate |x|}`
    /// on the left and `x^degree e^{-right_rate x}` on the right, relative
    /// to its value at the origin. Panels are widened if the node budget
    /// would otherwise be exceeded.
    pub fn for_tails(
        left_rate: f64,
        right_rate: f64,
        degree: f64,
        tol: f64,
        panel_width: f64,
        nodes_per_panel: usize,
    ) -> Result<Self> {
        let lo = -tail_cutoff(left_rate, degree, tol)?;
        let hi = tail_cutoff(right_rate, degree, tol)?;
        Self::fitted(lo, hi, panel_width, nodes_per_panel)
    }

    /// `[0, L]` for a weight `x^degree e^{-rate x}`.
    pub fn half_line(
        rate: f64,
        degree: f64,
        tol: f64,
        panel_width: f64,
        nodes_per_panel: usize,
    ) -> Result<Self> {
        let hi = tail_cutoff(rate, degree, tol)?;
        Self::fitted(0.0, hi, panel_width, nodes_per_panel)
    }

    fn fitted(lo: f64, hi: f64, panel_width: f64, nodes_per_panel: usize) -> Result<Self> {
        let max_panels = (MAX_NODES / nodes_per_panel).max(1);
        let panels = ((hi - lo) / panel_width).ceil().max(1.0) as usize;
        Self::with_panels(lo, hi, panels.min(max_panels), nodes_per_panel)
    }

    /// Same panels, different rule.
    pub fn with_nodes_per_panel(&self, nodes_per_panel: usize) -> Result<Self> {
        Self::with_panels(self.lo, self.hi, self.panels, nodes_per_panel)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.nodes_per_panel
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    pub fn integrate_complex(&self, mut f: impl FnMut(f64) -> Complex<f64>) -> Complex<f64> {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// Smallest `L ≥ 1` with `L^degree e^{-rate L} < tol`.
pub fn tail_cutoff(rate: f64, degree: f64, tol: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(Error::Domain(format!("tail decay rate {rate} is not positive")));
    }
    let target = tol.ln();
    let log_w = |l: f64| degree.max(0.0) * l.ln() - rate * l;
    let mut l = (-target / rate).max(1.0);
    // the polynomial factor only pushes the cutoff outward
    for _ in 0..200 {
        if log_w(l) < target {
            break;
        }
        l *= 1.1;
    }
    Ok(l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_gaussian() {
        let plan = QuadraturePlan::new(-10.0, 10.0, 1.0, 16).unwrap();
        let v = plan.integrate(|x| (-x * x).exp());
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert_eq!(plan.len(), 320);
    }

    #[test]
    fn nodes_are_sorted_and_inside() {
        let plan = QuadraturePlan::new(0.0, 3.5, 1.0, 8).unwrap();
        assert_eq!(plan.panels(), 4);
        assert!(plan.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(plan.nodes()[0] > 0.0 && *plan.nodes().last().unwrap() < 3.5);
    }

    #[test]
    fn tail_cutoff_respects_tolerance() {
        let l = tail_cutoff(2.0, 5.0, 1e-18).unwrap();
        assert!(5.0 * l.ln() - 2.0 * l < (1e-18f64).ln());
        assert!(tail_cutoff(0.0, 1.0, 1e-18).is_err());
    }

    #[test]
    fn node_budget_enforced() {
        assert!(matches!(
            QuadraturePlan::new(0.0, 100.0, 1.0, 32),
            Err(Error::SizeLimit { .. })
        ));
        let plan = QuadraturePlan::half_line(0.01, 4.0, 1e-18, 1.0, 32).unwrap();
        assert!(plan.len() <= MAX_NODES);
    }
}
