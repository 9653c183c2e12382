//! Kernels with non-separated transverse variables.
//!
//! ```text
//! φ_{k,j}(ρ, x, ξ, s) = ∫_0^π sin^{m/2}α · J_ν(ρ s sin α)/s^ν · Φ_k(x, ρ cos α) Φ*_j(ξ, ρ cos α) dα,
//! ν = (m − 2)/2
//! ```
//!
//! The transverse factor is evaluated as `sin^{m−1}α · ρ^ν · J_ν(z)/z^ν`,
//! `z = ρ s sin α`, which is regular at `s = 0` and for `m = 1`.
//!
//! For two half-spaces in ideal contact the α-integral has closed forms in
//! terms of `K(c) = J_{(m−1)/2}(ρR)/R^{(m−1)/2}`, `R = √(c² + s²)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::eigen::{PiecewiseWave, SpectralProblem};
use crate::media::TwoLayerIdealParams;
use crate::quadrature::{composite_nodes, GaussRule, QuadratureSpec, PANEL_ORDER};
use crate::special::{bessel_j, normalized_bessel};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQuery {
    pub rho: f64,
    pub x: f64,
    pub xi: f64,
    /// Transverse distance `|y − η|`.
    pub s: f64,
    /// Layer of `x`.
    pub k: usize,
    /// Layer of `ξ`.
    pub j: usize,
    pub m: usize,
}

impl KernelQuery {
    fn check(&self, layers: usize) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Domain(format!("rho = {} must be positive", self.rho)));
        }
        if !(self.s >= 0.0) {
            return Err(Error::Domain(format!("transverse distance {} must be non-negative", self.s)));
        }
        if self.k >= layers || self.j >= layers {
            return Err(Error::Domain(format!("layer ids ({}, {}) out of range for {layers} layers", self.k, self.j)));
        }
        if self.m < 1 {
            return Err(Error::Domain("transverse dimension must be at least 1".into()));
        }
        Ok(())
    }
}

/// Order `(m − 2)/2` of the transverse Bessel factor.
pub fn transverse_order(m: usize) -> f64 {
    (m as f64 - 2.0) / 2.0
}

/// `sin^{m/2}α · J_ν(ρ s sin α) / s^ν`.
pub fn transverse_weight(rho: f64, alpha: f64, s: f64, m: usize) -> f64 {
    let nu = transverse_order(m);
    let sa = alpha.sin();
    let nb = normalized_bessel(nu, rho * s * sa).expect("order and argument in range");
    sa.powi(m as i32 - 1) * rho.powf(nu) * nb
}

/// Nodes on `[0, π]` for an integrand whose phase varies by about
/// `rho · span` over each half. The halves are integrated separately because
/// the complete family switches branch at `α = π/2`.
pub fn alpha_rule(rho: f64, span: f64, spec: &QuadratureSpec) -> Vec<(f64, f64)> {
    alpha_rule_capped(rho, span, None, spec)
}

/// As [`alpha_rule`], restricted to `ρ sin α ≤ kappa_cap` when a cap is given.
pub fn alpha_rule_capped(rho: f64, span: f64, kappa_cap: Option<f64>, spec: &QuadratureSpec) -> Vec<(f64, f64)> {
    let per_half = (spec.alpha_nodes.div_ceil(2)).max(PANEL_ORDER);
    let edge = match kappa_cap {
        Some(k) if k < rho => (k / rho).asin(),
        _ => 0.5 * PI,
    };
    let frac = edge / (0.5 * PI);
    let panels = ((per_half.div_ceil(PANEL_ORDER) as f64 * frac).ceil() as usize)
        .max((rho * span * frac / 12.0).ceil() as usize)
        .max(1);
    let mut out = composite_nodes(0.0, edge, panels * PANEL_ORDER);
    out.extend(composite_nodes(PI - edge, PI, panels * PANEL_ORDER));
    out
}

/// Complete eigenfunction pairs at `β = ρ cos α` for every node of an
/// α rule, built once and shared by all `(x, ξ, s)` at this `ρ`.
#[derive(Debug, Clone)]
pub struct AlphaCache {
    pub rho: f64,
    pub nodes: Vec<AlphaNode>,
}

#[derive(Debug, Clone)]
pub struct AlphaNode {
    pub alpha: f64,
    pub weight: f64,
    pub primal: PiecewiseWave,
    pub dual: PiecewiseWave,
}

impl AlphaCache {
    pub fn new(problem: &SpectralProblem, rho: f64, span: f64, spec: &QuadratureSpec) -> Result<Self> {
        let nodes = alpha_rule(rho, span, spec)
            .into_iter()
            .map(|(alpha, weight)| {
                let (primal, dual) = problem.complete_pair(rho * alpha.cos()).map_err(|e| {
                    Error::Domain(format!("eigenfunction pair at alpha = {alpha}, rho = {rho}: {e}"))
                })?;
                Ok(AlphaNode { alpha, weight, primal, dual })
            })
            .collect::<Result<_>>()?;
        Ok(Self { rho, nodes })
    }

    /// `φ_{k,j}` at this cache's `ρ`; `x` and `ξ` are evaluated with the
    /// components of layers `k` and `j`.
    pub fn phi_kj(&self, x: f64, xi: f64, s: f64, k: usize, j: usize, m: usize) -> Complex64 {
        self.nodes
            .iter()
            .map(|n| {
                n.primal.component(k, x)
                    * n.dual.component(j, xi)
                    * (n.weight * transverse_weight(self.rho, n.alpha, s, m))
            })
            .sum()
    }
}

fn kernel_span(problem: &SpectralProblem, q: &KernelQuery) -> f64 {
    let m = &problem.medium;
    q.x.abs() / m.a(q.k) + q.xi.abs() / m.a(q.j) + q.s
}

/// `φ_{k,j}` by Gauss–Legendre quadrature of the α-integral.
pub fn phi_kj_integral(q: &KernelQuery, problem: &SpectralProblem, spec: &QuadratureSpec) -> Result<Complex64> {
    q.check(problem.medium.layer_count())?;
    let cache = AlphaCache::new(problem, q.rho, kernel_span(problem, q), spec)?;
    Ok(cache.phi_kj(q.x, q.xi, q.s, q.k, q.j, q.m))
}

/// `K(c) = J_{(m−1)/2}(ρR) / R^{(m−1)/2}`, `R = √(c² + s²)`, regular at `R = 0`.
pub fn radial_kernel(rho: f64, c: f64, s: f64, m: usize) -> f64 {
    let order = (m as f64 - 1.0) / 2.0;
    let r = c.hypot(s);
    rho.powf(order) * normalized_bessel(order, rho * r).expect("order and argument in range")
}

/// Which two-layer closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// The four formulas as printed. The printed subscripts are read as
    /// (layer of ξ, layer of x), which is what their arguments imply.
    Printed,
    /// The closed forms of the α-integral with the complete family.
    Corrected,
}

/// Two-layer ideal-contact kernels in closed form (interface at 0).
pub fn phi_kj_closed_two_layer(q: &KernelQuery, params: &TwoLayerIdealParams, form: ClosedForm) -> Result<f64> {
    q.check(2)?;
    let (a1, a2) = (params.a1, params.a2);
    let d = params.delta0();
    let kk = |c: f64| radial_kernel(q.rho, c, q.s, q.m);
    let (x, xi) = (q.x, q.xi);
    Ok(match form {
        ClosedForm::Printed => match (q.k, q.j) {
            (0, 0) => ((1.0 + d) * kk((x - xi) / a1) - (1.0 - d) * kk((x + xi) / a1)) / a1,
            (1, 0) => ((1.0 + d) * kk(x / a2 - xi / a1) + (1.0 - d) * kk(x / a2 + xi / a1)) / (a2 * d.sqrt()),
            (0, 1) => d.sqrt() * ((1.0 + d) * kk(x / a1 - xi / a2) + (1.0 - d) * kk(x / a1 + xi / a2)) / a1,
            _ => ((1.0 + d) * kk((x - xi) / a2) - (1.0 - d) * kk((x + xi) / a2)) / (a2 * d),
        },
        ClosedForm::Corrected => {
            let g = (2.0 * PI / q.rho).sqrt();
            let r = (1.0 - d) / (1.0 + d);
            match (q.k, q.j) {
                (0, 0) => g / a1 * (kk((x - xi) / a1) - r * kk((x + xi) / a1)),
                (1, 1) => g / a2 * (kk((x - xi) / a2) + r * kk((x + xi) / a2)),
                (0, 1) => 2.0 * g / (a2 * (1.0 + d)) * kk(x / a1 - xi / a2),
                _ => 2.0 * d * g / (a1 * (1.0 + d)) * kk(x / a2 - xi / a1),
            }
        }
    })
}

/// Both sides of `ρ^{m/2} J_ν(ρ|y|)/|y|^ν = (2π)^{−m/2} ∫_{S_ρ} e^{i⟨y,ξ⟩} dS`.
///
/// The surface integral is a trapezoid rule on the circle for `m = 2` and a
/// Gauss-in-`cos θ` times trapezoid-in-`φ` product rule on the sphere for
/// `m = 3`.
pub fn plane_wave_identity_check(rho: f64, y: &[f64], spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let m = y.len();
    let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > 0.0) || !(rho > 0.0) {
        return Err(Error::Domain("plane-wave identity needs rho > 0 and |y| > 0".into()));
    }
    let nu = transverse_order(m);
    let periodic = |extra: f64| spec.alpha_nodes.max(2 * (rho * r).ceil() as usize + extra as usize);
    let lhs = rho.powf(m as f64 / 2.0) * bessel_j(nu, rho * r)? / r.powf(nu);
    let rhs = match m {
        2 => {
            let n = periodic(40.0);
            let h = 2.0 * PI / n as f64;
            let sum: f64 = (0..n)
                .map(|i| {
                    let t = i as f64 * h;
                    (rho * (y[0] * t.cos() + y[1] * t.sin())).cos()
                })
                .sum();
            sum * h * rho / (2.0 * PI)
        }
        3 => {
            let nphi = periodic(40.0);
            let hphi = 2.0 * PI / nphi as f64;
            let polar = GaussRule::legendre(periodic(24.0));
            let mut sum = 0.0;
            for (u, w) in polar.nodes.iter().zip(&polar.weights) {
                let st = (1.0 - u * u).sqrt();
                for i in 0..nphi {
                    let p = i as f64 * hphi;
                    let dot = y[0] * st * p.cos() + y[1] * st * p.sin() + y[2] * u;
                    sum += w * (rho * dot).cos();
                }
            }
            sum * hphi * rho * rho / (2.0 * PI).powf(1.5)
        }
        _ => return Err(Error::Unsupported(format!("plane-wave identity for m = {m}"))),
    };
    Ok((lhs, rhs))
}

/// `|Δ_η K + ρ² sin²α K|` with `K(η) = J_ν(ρ sin α |y − η|)/|y − η|^ν`, by
/// central differences with step `1e-3`.
pub fn laplacian_eigen_check(rho: f64, alpha: f64, y: &[f64], eta: &[f64], m: usize) -> f64 {
    const H: f64 = 1e-3;
    let nu = transverse_order(m);
    let kappa = rho * alpha.sin();
    let k = |e: &[f64]| {
        let r = y.iter().zip(e).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        kappa.powf(nu) * normalized_bessel(nu, kappa * r).expect("order and argument in range")
    };
    let centre = k(eta);
    let mut lap = 0.0;
    let mut p = eta.to_vec();
    for i in 0..eta.len() {
        p[i] = eta[i] + H;
        let up = k(&p);
        p[i] = eta[i] - H;
        let down = k(&p);
        p[i] = eta[i];
        lap += (up - 2.0 * centre + down) / (H * H);
    }
    (lap + kappa * kappa * centre).abs()
}
