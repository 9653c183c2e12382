//! Deterministic Gauss–Legendre quadrature with dyadic panel refinement, the
//! Gaussian-damped semi-infinite integral and Abel-limit extrapolation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::{Error, Result};

/// Points per panel of the composite rule.
pub const PANEL_ORDER: usize = 16;

/// Gaussian tail truncation constant: `e^{-k²}` is below 1e-15.
pub const GAUSSIAN_TAIL_K: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Initial node count of finite-interval integrals.
    pub finite_nodes: usize,
    /// Lower bound on the truncation radius of spectral integrals.
    pub rho_truncation: f64,
    /// Initial node count of the spectral (ρ) integral.
    pub rho_nodes: usize,
    /// Minimum node count of the angular kernel integral over `[0, π]`.
    pub alpha_nodes: usize,
    /// Decreasing regularization values for `e^{-λτ}` damping.
    pub tau_schedule: Vec<f64>,
    /// Decreasing times used to extrapolate the heat solution to `t = 0`.
    pub t_schedule: Vec<f64>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of panel doublings allowed before giving up on `rel_tol`.
    pub max_refinements: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            finite_nodes: 64,
            rho_truncation: 10.0,
            rho_nodes: 128,
            alpha_nodes: 64,
            tau_schedule: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            t_schedule: vec![0.02, 0.01, 0.005, 0.0025, 0.00125],
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_refinements: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.finite_nodes < 2 || self.rho_nodes < 2 || self.alpha_nodes < 2 {
            bad.push("node counts must be at least 2".to_string());
        }
        if !(self.rho_truncation > 0.0) {
            bad.push("rho_truncation must be positive".to_string());
        }
        for (name, s) in [("tau_schedule", &self.tau_schedule), ("t_schedule", &self.t_schedule)] {
            if s.iter().any(|&v| !(v > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
                bad.push(format!("{name} must be positive and strictly decreasing"));
            }
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            bad.push("tolerances must be positive".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Domain(bad.join("; ")))
        }
    }

    fn initial_panels(nodes: usize) -> usize {
        nodes.div_ceil(PANEL_ORDER).max(1)
    }
}

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Newton iteration on `P_n` from Chebyshev initial guesses.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if n == 1 { x } else { p1 };
                let pm1 = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights of the composite rule with `panels` equal panels on `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
        let h = (b - a) / panels as f64;
        let mut out = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + 0.5 * h * x, 0.5 * h * w));
            }
        }
        out
    }
}

/// The shared 16-point panel rule.
pub fn panel_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(PANEL_ORDER))
}

/// Composite-rule nodes on `[a, b]` with at least `min_nodes` points.
pub fn composite_nodes(a: f64, b: f64, min_nodes: usize) -> Vec<(f64, f64)> {
    panel_rule().composite(a, b, QuadratureSpec::initial_panels(min_nodes))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: Complex64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    /// False when the node budget ran out before `rel_tol` was met.
    pub converged: bool,
    pub evaluations: usize,
}

fn composite_sum(f: &impl Fn(f64) -> Complex64, a: f64, b: f64, panels: usize) -> Complex64 {
    panel_rule()
        .composite(a, b, panels)
        .into_iter()
        .map(|(x, w)| f(x) * w)
        .sum()
}

fn refine(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    start_nodes: usize,
    spec: &QuadratureSpec,
) -> Integral {
    let mut panels = QuadratureSpec::initial_panels(start_nodes);
    let mut prev = composite_sum(&f, a, b, panels);
    let mut evaluations = panels * PANEL_ORDER;
    for _ in 0..spec.max_refinements {
        panels *= 2;
        let cur = composite_sum(&f, a, b, panels);
        evaluations += panels * PANEL_ORDER;
        let error = (cur - prev).norm();
        if error <= spec.rel_tol * cur.norm() + spec.abs_tol {
            return Integral { value: cur, error, converged: true, evaluations };
        }
        prev = cur;
    }
    Integral { value: prev, error: f64::NAN, converged: false, evaluations }
}

/// Composite Gauss–Legendre on `[a, b]`, doubling the panel count until two
/// successive levels agree to `rel_tol`.
pub fn integrate_finite(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !(a < b) {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    let mut out = refine(f, a, b, spec.finite_nodes, spec);
    if !out.converged {
        out.error = f64::INFINITY;
    }
    Ok(out)
}

/// Truncation radius for an integrand damped by `e^{-ρ² s}`.
pub fn damped_truncation(damping_scale: f64, spec: &QuadratureSpec) -> f64 {
    spec.rho_truncation.max(GAUSSIAN_TAIL_K / damping_scale.sqrt())
}

/// `∫_0^∞ f(ρ) dρ` for integrands that carry an `e^{-ρ² s}` factor with
/// `s = damping_scale`.
pub fn integrate_semiinfinite_damped(
    f: impl Fn(f64) -> Complex64,
    damping_scale: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !(damping_scale > 0.0) {
        return Err(Error::Domain(format!(
            "damping scale {damping_scale} must be positive; use abel_limit for undamped integrals"
        )));
    }
    let upper = damped_truncation(damping_scale, spec);
    Ok(refine(f, 0.0, upper, spec.rho_nodes, spec))
}

/// Result of an extrapolation to a vanishing regularization parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelLimit {
    pub value: Complex64,
    /// Change of the extrapolant when the largest parameter is dropped.
    pub spread: f64,
    pub samples: Vec<(f64, Complex64)>,
}

/// Neville's scheme evaluated at zero for the interpolating polynomial
/// through `points`.
pub fn extrapolate_to_zero(points: &[(f64, Complex64)]) -> Complex64 {
    let mut p: Vec<Complex64> = points.iter().map(|&(_, v)| v).collect();
    let n = p.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xi, xj) = (points[i].0, points[i + level].0);
            p[i] = p[i + 1] + (p[i + 1] - p[i]) * (xj / (xi - xj));
        }
    }
    p[0]
}

/// Evaluate a regularized family on `schedule` and extrapolate the
/// interpolating polynomial to zero.
pub fn try_abel_limit(
    mut family: impl FnMut(f64) -> Result<Complex64>,
    schedule: &[f64],
) -> Result<AbelLimit> {
    if schedule.len() < 3 {
        return Err(Error::Domain("Abel schedule needs at least 3 entries".into()));
    }
    let mut samples = Vec::with_capacity(schedule.len());
    for &tau in schedule {
        let v = family(tau)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { tau });
        }
        samples.push((tau, v));
    }
    let value = extrapolate_to_zero(&samples);
    let coarse = extrapolate_to_zero(&samples[1..]);
    Ok(AbelLimit { value, spread: (value - coarse).norm(), samples })
}

pub fn abel_limit(
    mut family: impl FnMut(f64) -> Complex64,
    schedule: &[f64],
) -> Result<AbelLimit> {
    try_abel_limit(|t| Ok(family(t)), schedule)
}
