//! Finite-difference reference solver for ideal-contact layered media.
//!
//! Crank–Nicolson in time and central differences in space on a grid that
//! puts every interface on a node. The transverse directions carry
//! homogeneous Dirichlet conditions and are diagonalized by sine modes, so
//! each mode is a tridiagonal system in `x`.
//!
//! Interface nodes. Multiplying `u_t = a_j² u_xx + Δ_y u` by `w_j = k_j / a_j²`
//! gives `w (u_t − Δ_y u) = ∂_x(k ∂_x u)`, with `k_{j+1} = ν_j k_j` so
//! that `k_L u'_L = k_R u'_R` is the flux condition `u'_L = ν u'_R`. Writing
//! the one-sided three-point update on each side with a ghost value and
//! eliminating both ghosts through the flux condition gives the half-cell
//! balance
//!
//! ```text
//! ((w_L + w_R) h / 2) (u_t − Δ_y u_i) = [k_R (u_{i+1} − u_i) − k_L (u_i − u_{i−1})] / h
//! ```
//!
//! which is second order and conserves `Σ M_i u_i` up to boundary flux.

use std::f64::consts::PI;

use rustdct::DctPlanner;

use crate::heat::{HeatScenario, Sample};
use crate::media::{InterfaceCoupling, LayeredMedium};
use crate::transforms::Probe;
use crate::{Error, Result};

/// Boundary values must stay below this fraction of `max |g|`.
pub const BOUNDARY_DECAY: f64 = 1e-8;
/// Modes whose initial amplitude is below this fraction of the largest are dropped.
const MODE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub x_lo: f64,
    pub x_hi: f64,
    pub h_x: f64,
    /// Transverse box, one range per coordinate.
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    pub h_y: f64,
    pub dt: f64,
    pub t_end: f64,
}

impl FdGrid {
    pub fn new(medium: &LayeredMedium, x: (f64, f64), h_x: f64, y: &[(f64, f64)], h_y: f64, dt: f64, t_end: f64) -> Result<Self> {
        for (name, v) in [("h_x", h_x), ("h_y", h_y), ("dt", dt), ("t_end", t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        if y.len() != medium.transverse_dim {
            return Err(Error::Domain(format!("grid has {} transverse ranges, medium has {}", y.len(), medium.transverse_dim)));
        }
        let grid = Self {
            x_lo: x.0,
            x_hi: x.1,
            h_x,
            y_lo: y.iter().map(|r| r.0).collect(),
            y_hi: y.iter().map(|r| r.1).collect(),
            h_y,
            dt,
            t_end,
        };
        let on_node = |v: f64, lo: f64, h: f64| {
            let s = (v - lo) / h;
            (s - s.round()).abs() <= 1e-9 * s.abs().max(1.0)
        };
        if !(x.0 < x.1) || !on_node(x.1, x.0, h_x) {
            return Err(Error::Domain(format!("x range [{}, {}] is not a whole number of steps {h_x}", x.0, x.1)));
        }
        for &(lo, hi) in y {
            if !(lo < hi) || !on_node(hi, lo, h_y) || grid.count(lo, hi, h_y) < 3 {
                return Err(Error::Domain(format!("y range [{lo}, {hi}] is not a whole number of steps {h_y}")));
            }
        }
        for (k, &l) in medium.interfaces.iter().enumerate() {
            if !(x.0 < l && l < x.1) || !on_node(l, x.0, h_x) {
                return Err(Error::Domain(format!("interface {k} at {l} is not an interior grid node")));
            }
        }
        Ok(grid)
    }

    /// Grid covering the support of the initial data plus the distance heat
    /// spreads by the last requested time, with every interface on a node.
    pub fn auto(sc: &HeatScenario, h_x: f64, h_y: f64, dt: f64) -> Result<Self> {
        let medium = &sc.problem.medium;
        let m = medium.transverse_dim;
        let t_end = sc.times.iter().copied().fold(0.0, f64::max);
        let a_max = medium.diffusivity.iter().copied().fold(0.0, f64::max);
        let reach = (4.0 * t_end * (1.0 / BOUNDARY_DECAY).ln()).sqrt();
        let (margin, margin_y) = (a_max * reach + 4.0 * h_x, reach + 4.0 * h_y);
        let (mut xl, mut xh) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yr = vec![(f64::INFINITY, f64::NEG_INFINITY); m];
        for layer in 0..medium.layer_count() {
            let Some(b) = sc.initial.support(layer) else { continue };
            let (lo, hi) = medium.bounds(layer);
            let Some(b) = b.clip_x(lo, hi) else { continue };
            xl = xl.min(b.x.0);
            xh = xh.max(b.x.1);
            for (r, &(l, h)) in yr.iter_mut().zip(&b.y) {
                *r = (r.0.min(l), r.1.max(h));
            }
        }
        for p in &sc.probes {
            xl = xl.min(p.x);
            xh = xh.max(p.x);
            for (r, &v) in yr.iter_mut().zip(&p.y) {
                *r = (r.0.min(v), r.1.max(v));
            }
        }
        if !(xl.is_finite() && xh.is_finite()) {
            return Err(Error::Unsupported("initial data without a bounded support".into()));
        }
        for l in &medium.interfaces {
            xl = xl.min(*l);
            xh = xh.max(*l);
        }
        let anchor = medium.interfaces.first().copied().unwrap_or(0.0);
        let x_lo = anchor - ((anchor - (xl - margin)) / h_x).ceil() * h_x;
        let x_hi = anchor + (((xh + margin) - anchor) / h_x).ceil() * h_x;
        let y: Vec<(f64, f64)> = yr
            .iter()
            .map(|&(l, h)| {
                let (l, h) = if l.is_finite() { (l, h) } else { (0.0, 0.0) };
                let lo = l - margin_y;
                (lo, lo + ((h + margin_y - lo) / h_y).ceil() * h_y)
            })
            .collect();
        Self::new(medium, (x_lo, x_hi), h_x, &y, h_y, dt, t_end)
    }

    fn count(&self, lo: f64, hi: f64, h: f64) -> usize {
        ((hi - lo) / h).round() as usize + 1
    }

    /// Number of `x` nodes including both boundary nodes.
    pub fn nx(&self) -> usize {
        self.count(self.x_lo, self.x_hi, self.h_x)
    }

    /// Interior node counts per transverse coordinate.
    pub fn ny(&self) -> Vec<usize> {
        self.y_lo.iter().zip(&self.y_hi).map(|(&l, &h)| self.count(l, h, self.h_y) - 2).collect()
    }

    /// Heat-kernel bound on `|u| / max |g|` at the boundary by `t_end`,
    /// from the distance between the data support and the box edges.
    pub fn decay_estimate(&self, sc: &HeatScenario) -> f64 {
        let medium = &sc.problem.medium;
        let a_max = medium.diffusivity.iter().copied().fold(0.0, f64::max);
        let mut worst: f64 = 0.0;
        for layer in 0..medium.layer_count() {
            let (lo, hi) = medium.bounds(layer);
            let Some(b) = sc.initial.support(layer).and_then(|b| b.clip_x(lo, hi)) else { continue };
            // x spreads with a_j, y with unit diffusivity
            let bound = |d: f64, a: f64| if d <= 0.0 { 1.0 } else { (-d * d / (4.0 * a * a * self.t_end)).exp() };
            worst = worst.max(bound((b.x.0 - self.x_lo).min(self.x_hi - b.x.1), a_max));
            for (k, &(l, h)) in b.y.iter().enumerate() {
                worst = worst.max(bound((l - self.y_lo[k]).min(self.y_hi[k] - h), 1.0));
            }
        }
        worst
    }
}

/// Flux ratios `ν_k` of an ideal-contact coupling.
fn contact_ratios(coupling: &InterfaceCoupling) -> Result<Vec<f64>> {
    coupling
        .interfaces
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if !c.is_value_continuous() || c.beta[1] != [0.0, 0.0] || c.alpha[1][0] == 0.0 {
                return Err(Error::Unsupported(format!("interface {k} is not ideal contact")));
            }
            Ok(c.alpha[1][1] / c.alpha[1][0])
        })
        .collect()
}

/// Sine-mode Crank–Nicolson integrator.
pub struct FdSolver {
    medium: LayeredMedium,
    nu: Vec<f64>,
    x_lo: f64,
    h: f64,
    nx: usize,
    /// Conductivity on edge `(i, i+1)`.
    k_edge: Vec<f64>,
    /// Row mass `M_i`, which also weights `Δ_y`.
    mass: Vec<f64>,
    y_lo: Vec<f64>,
    h_y: f64,
    ny: Vec<usize>,
    /// Active modes: multi-index, eigenvalue of `Δ_y`, amplitudes over `x`.
    modes: Vec<Mode>,
    dt: f64,
    t: f64,
    factor: Option<(f64, Vec<Factor>)>,
    pub warnings: Vec<String>,
}

struct Mode {
    index: Vec<usize>,
    mu: f64,
    u: Vec<f64>,
}

/// Thomas elimination of `(M − τA)` for one mode.
struct Factor {
    cp: Vec<f64>,
    inv: Vec<f64>,
}

impl FdSolver {
    pub fn new(sc: &HeatScenario, grid: &FdGrid) -> Result<Self> {
        let medium = sc.problem.medium.clone();
        let m = medium.transverse_dim;
        if !(1..=2).contains(&m) {
            return Err(Error::Unsupported(format!("finite-difference oracle supports m = 1, 2, not {m}")));
        }
        let nu = contact_ratios(&sc.problem.coupling)?;
        let decay = grid.decay_estimate(sc);
        if decay > BOUNDARY_DECAY {
            return Err(Error::Domain(format!(
                "grid too small: boundary values may reach {decay:.2e} of max |g| by t = {}",
                grid.t_end
            )));
        }
        let mut warnings = Vec::new();
        if grid.dt > grid.h_x * grid.h_x {
            warnings.push(format!(
                "dt = {} exceeds h_x² = {}; stable but time error may dominate",
                grid.dt,
                grid.h_x * grid.h_x
            ));
        }
        let (nx, h) = (grid.nx(), grid.h_x);
        let x_of = |i: usize| grid.x_lo + i as f64 * h;

        let mut k_layer = vec![1.0];
        for &v in &nu {
            k_layer.push(k_layer.last().unwrap() * v);
        }
        let w_layer: Vec<f64> = k_layer.iter().enumerate().map(|(j, k)| k / medium.a(j).powi(2)).collect();
        let edge_layer = |i: usize| medium.interfaces.partition_point(|&l| l <= x_of(i) + 0.5 * h);
        let k_edge: Vec<f64> = (0..nx - 1).map(|i| k_layer[edge_layer(i)]).collect();
        let w_edge: Vec<f64> = (0..nx - 1).map(|i| w_layer[edge_layer(i)]).collect();
        let mut mass = vec![0.0; nx];
        for i in 1..nx - 1 {
            mass[i] = 0.5 * h * (w_edge[i - 1] + w_edge[i]);
        }

        let ny = grid.ny();
        let h_y = grid.h_y;
        let total: usize = ny.iter().product();
        let interface_node: Vec<Option<usize>> = (0..nx)
            .map(|i| medium.interfaces.iter().position(|&l| ((l - x_of(i)) / h).abs() < 1e-6))
            .collect();
        let mut planner = DctPlanner::new();
        let plans: Vec<_> = ny.iter().map(|&n| planner.plan_dst1(n)).collect();
        // amplitude[flat mode][i]
        let mut amp = vec![vec![0.0; nx]; total];
        let mut row = vec![0.0; total];
        let mut y = vec![0.0; m];
        for i in 1..nx - 1 {
            let x = x_of(i);
            for (flat, slot) in row.iter_mut().enumerate() {
                let mut r = flat;
                for d in (0..m).rev() {
                    y[d] = grid.y_lo[d] + (r % ny[d] + 1) as f64 * h_y;
                    r /= ny[d];
                }
                *slot = match interface_node[i] {
                    Some(k) => 0.5 * (sc.initial.value(k, x, &y) + sc.initial.value(k + 1, x, &y)),
                    None => sc.initial.value(medium.layer_index(x)?, x, &y),
                };
            }
            transform(&mut row, &ny, &plans);
            for (flat, v) in row.iter().enumerate() {
                amp[flat][i] = *v;
            }
        }
        let peak = amp.iter().flat_map(|a| a.iter()).fold(0.0f64, |p, v| p.max(v.abs()));
        let mut modes = Vec::new();
        for (flat, u) in amp.into_iter().enumerate() {
            if peak == 0.0 || u.iter().all(|v| v.abs() <= MODE_FLOOR * peak) {
                continue;
            }
            let mut index = vec![0; m];
            let mut r = flat;
            for d in (0..m).rev() {
                index[d] = r % ny[d] + 1;
                r /= ny[d];
            }
            let mu = index
                .iter()
                .zip(&ny)
                .map(|(&k, &n)| -4.0 / (h_y * h_y) * (PI * k as f64 / (2.0 * (n + 1) as f64)).sin().powi(2))
                .sum();
            modes.push(Mode { index, mu, u });
        }
        Ok(Self {
            medium,
            nu,
            x_lo: grid.x_lo,
            h,
            nx,
            k_edge,
            mass,
            y_lo: grid.y_lo.clone(),
            h_y,
            ny,
            modes,
            dt: grid.dt,
            t: 0.0,
            factor: None,
            warnings,
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    fn factorize(&self, tau: f64) -> Vec<Factor> {
        let (n, h) = (self.nx, self.h);
        self.modes
            .iter()
            .map(|mode| {
                let mut cp = vec![0.0; n];
                let mut inv = vec![0.0; n];
                let mut prev = 0.0;
                for i in 1..n - 1 {
                    let lower = -tau * self.k_edge[i - 1] / h;
                    let diag = self.mass[i] + tau * (self.k_edge[i - 1] + self.k_edge[i]) / h - tau * mode.mu * self.mass[i];
                    let upper = -tau * self.k_edge[i] / h;
                    let d = diag - if i > 1 { lower * prev } else { 0.0 };
                    inv[i] = 1.0 / d;
                    cp[i] = upper * inv[i];
                    prev = cp[i];
                }
                Factor { cp, inv }
            })
            .collect()
    }

    fn step(&mut self, dt: f64) {
        let tau = 0.5 * dt;
        if self.factor.as_ref().is_none_or(|(t, _)| *t != tau) {
            self.factor = Some((tau, self.factorize(tau)));
        }
        let factors = &self.factor.as_ref().unwrap().1;
        let (n, h) = (self.nx, self.h);
        let mut rhs = vec![0.0; n];
        for (mode, f) in self.modes.iter_mut().zip(factors) {
            let u = &mut mode.u;
            for i in 1..n - 1 {
                let flux = (self.k_edge[i] * (u[i + 1] - u[i]) - self.k_edge[i - 1] * (u[i] - u[i - 1])) / h;
                rhs[i] = self.mass[i] * u[i] + tau * (flux + mode.mu * self.mass[i] * u[i]);
            }
            // forward sweep; the sub-diagonal is −τ k_{i−1}/h
            let mut prev = 0.0;
            for i in 1..n - 1 {
                let lower = -tau * self.k_edge[i - 1] / h;
                let d = rhs[i] - if i > 1 { lower * prev } else { 0.0 };
                rhs[i] = d * f.inv[i];
                prev = rhs[i];
            }
            for i in (1..n - 2).rev() {
                rhs[i] -= f.cp[i] * rhs[i + 1];
            }
            u[1..n - 1].copy_from_slice(&rhs[1..n - 1]);
        }
    }

    /// Advance to time `t` in equal steps no longer than the grid step.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t < self.t {
            return Err(Error::Domain(format!("cannot step back from {} to {t}", self.t)));
        }
        let span = t - self.t;
        let steps = (span / self.dt - 1e-9).ceil().max(0.0) as usize;
        for _ in 0..steps {
            self.step(span / steps as f64);
        }
        self.t = t;
        Ok(())
    }

    fn basis(&self, index: &[usize], y: &[f64]) -> f64 {
        index
            .iter()
            .enumerate()
            .map(|(d, &k)| {
                let n = self.ny[d];
                let s = (y[d] - self.y_lo[d]) / self.h_y;
                if s <= 0.0 || s >= (n + 1) as f64 {
                    return 0.0;
                }
                (PI * k as f64 * s / (n + 1) as f64).sin()
            })
            .product()
    }

    /// Cubic interpolation in `x` from nodes of the probe's own layer, sine
    /// series in `y`.
    pub fn value(&self, probe: &Probe) -> f64 {
        let (h, n) = (self.h, self.nx);
        let (lo, hi) = self.medium.bounds(probe.layer);
        let first = if lo.is_finite() { ((lo - self.x_lo) / h).round() as usize } else { 0 };
        let last = if hi.is_finite() { ((hi - self.x_lo) / h).round() as usize } else { n - 1 };
        let s = (probe.x - self.x_lo) / h;
        if s <= 0.0 || s >= (n - 1) as f64 {
            return 0.0;
        }
        let start = (s.floor() as usize).saturating_sub(1).clamp(first, last.saturating_sub(3).max(first));
        let nodes: Vec<usize> = (start..=(start + 3).min(last)).collect();
        let weights: Vec<f64> = nodes
            .iter()
            .map(|&i| {
                nodes
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (s - j as f64) / (i as f64 - j as f64))
                    .product()
            })
            .collect();
        self.modes
            .iter()
            .map(|mode| {
                let ux: f64 = nodes.iter().zip(&weights).map(|(&i, w)| w * mode.u[i]).sum();
                ux * self.basis(&mode.index, &probe.y)
            })
            .sum()
    }

    /// Discrete heat content `Σ_i M_i Σ_j u_ij h_y^m`.
    pub fn mass(&self) -> f64 {
        let sums: Vec<Vec<f64>> = self
            .ny
            .iter()
            .map(|&n| {
                (1..=n)
                    .map(|k| (1..=n).map(|j| (PI * (k * j) as f64 / (n + 1) as f64).sin()).sum())
                    .collect()
            })
            .collect();
        let cell = self.h_y.powi(self.ny.len() as i32);
        self.modes
            .iter()
            .map(|mode| {
                let s: f64 = mode.index.iter().enumerate().map(|(d, &k)| sums[d][k - 1]).product();
                let row: f64 = mode.u.iter().zip(&self.mass).map(|(u, w)| u * w).sum();
                row * s * cell
            })
            .sum()
    }

    /// Largest `|u'_L − ν u'_R|` over interface nodes and transverse nodes,
    /// from one-sided three-point derivatives, with the largest `|u'_L|` for
    /// scale.
    pub fn interface_residual(&self) -> (f64, f64) {
        let total: usize = self.ny.iter().product();
        let mut planner = DctPlanner::new();
        let plans: Vec<_> = self.ny.iter().map(|&n| planner.plan_dst1(n)).collect();
        let (mut worst, mut scale) = (0.0f64, 0.0f64);
        for (k, &l) in self.medium.interfaces.iter().enumerate() {
            let i = ((l - self.x_lo) / self.h).round() as usize;
            let mut res = vec![0.0; total];
            let mut left = vec![0.0; total];
            for mode in &self.modes {
                let u = &mode.u;
                let dl = (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * self.h);
                let dr = (-3.0 * u[i] + 4.0 * u[i + 1] - u[i + 2]) / (2.0 * self.h);
                let flat = mode.index.iter().zip(&self.ny).fold(0, |f, (&ix, &n)| f * n + ix - 1);
                res[flat] = dl - self.nu[k] * dr;
                left[flat] = dl;
            }
            // the inverse of the normalized transform is the bare DST-I
            synthesize(&mut res, &self.ny, &plans);
            synthesize(&mut left, &self.ny, &plans);
            worst = res.iter().fold(worst, |w, v| w.max(v.abs()));
            scale = left.iter().fold(scale, |w, v| w.max(v.abs()));
        }
        (worst, scale)
    }
}

type Plan = std::sync::Arc<dyn rustdct::Dst1<f64>>;

/// DST-I along every axis of a row-major block.
fn synthesize(data: &mut [f64], ny: &[usize], plans: &[Plan]) {
    let m = ny.len();
    for d in 0..m {
        let n = ny[d];
        let inner: usize = ny[d + 1..].iter().product();
        let outer: usize = ny[..d].iter().product();
        let mut line = vec![0.0; n];
        for o in 0..outer {
            for q in 0..inner {
                let at = |j: usize| (o * n + j) * inner + q;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[at(j)];
                }
                plans[d].process_dst1(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[at(j)] = *v;
                }
            }
        }
    }
}

/// Sine coefficients `û` with `u_j = Σ_k û_k sin(π k j / (n + 1))` per axis.
fn transform(data: &mut [f64], ny: &[usize], plans: &[Plan]) {
    synthesize(data, ny, plans);
    let scale: f64 = ny.iter().map(|&n| 2.0 / (n + 1) as f64).product();
    data.iter_mut().for_each(|v| *v *= scale);
}

/// Samples at every scenario time and probe, time-major, plus any
/// accuracy warnings.
pub fn fd_solve(sc: &HeatScenario, grid: &FdGrid) -> Result<(Vec<Sample>, Vec<String>)> {
    let mut solver = FdSolver::new(sc, grid)?;
    let mut order: Vec<usize> = (0..sc.times.len()).collect();
    order.sort_by(|&a, &b| sc.times[a].total_cmp(&sc.times[b]));
    let mut rows = vec![Vec::new(); sc.times.len()];
    for ti in order {
        let t = sc.times[ti];
        solver.advance_to(t)?;
        rows[ti] = sc.probes.iter().map(|p| Sample { t, probe: p.clone(), value: solver.value(p) }).collect();
    }
    Ok((rows.concat(), solver.warnings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub l2_rel: f64,
    pub linf_rel: f64,
    /// Per-layer errors, normalized by the norms of the whole reference so
    /// that layer L2 errors add in quadrature to the total.
    pub per_layer: Vec<LayerError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerError {
    pub layer: usize,
    pub samples: usize,
    pub l2_rel: f64,
    pub linf_rel: f64,
}

/// Error of `samples` against `reference` on the same probes and times.
pub fn compare(samples: &[Sample], reference: &[Sample]) -> Result<ErrorReport> {
    if samples.len() != reference.len() {
        return Err(Error::ProbeMismatch(format!("{} samples against {} reference samples", samples.len(), reference.len())));
    }
    for (k, (s, r)) in samples.iter().zip(reference).enumerate() {
        if s.t != r.t || s.probe != r.probe {
            return Err(Error::ProbeMismatch(format!("sample {k}: {:?} at t = {} against {:?} at t = {}", s.probe, s.t, r.probe, r.t)));
        }
    }
    let ref_l2 = reference.iter().map(|r| r.value * r.value).sum::<f64>().sqrt();
    let ref_inf = reference.iter().fold(0.0f64, |m, r| m.max(r.value.abs()));
    let rel = |v: f64, norm: f64| if norm > 0.0 { v / norm } else { v };
    let layers = reference.iter().map(|r| r.probe.layer).max().map_or(0, |l| l + 1);
    let mut per_layer = Vec::new();
    let (mut sq, mut inf) = (0.0, 0.0f64);
    for layer in 0..layers {
        let diffs: Vec<f64> = samples
            .iter()
            .zip(reference)
            .filter(|(_, r)| r.probe.layer == layer)
            .map(|(s, r)| s.value - r.value)
            .collect();
        if diffs.is_empty() {
            continue;
        }
        let l_sq: f64 = diffs.iter().map(|d| d * d).sum();
        let l_inf = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        sq += l_sq;
        inf = inf.max(l_inf);
        per_layer.push(LayerError { layer, samples: diffs.len(), l2_rel: rel(l_sq.sqrt(), ref_l2), linf_rel: rel(l_inf, ref_inf) });
    }
    Ok(ErrorReport { l2_rel: rel(sq.sqrt(), ref_l2), linf_rel: rel(inf, ref_inf), per_layer })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::SpectralProblem;
    use crate::field::{BumpField, GaussianBump, MirrorField};
    use crate::media::TwoLayerIdealParams;
    use crate::quadrature::QuadratureSpec;
    use crate::transforms::SpectralWeightMode;

    fn problem(a1: f64, a2: f64, nu: f64, m: usize) -> SpectralProblem {
        SpectralProblem::two_layer(&TwoLayerIdealParams::new(a1, a2, nu).unwrap(), m).unwrap()
    }

    fn scenario<'a>(p: SpectralProblem, g: &'a BumpField, t: f64, pts: &[(f64, Vec<f64>)]) -> HeatScenario<'a> {
        HeatScenario::new(p, g, vec![t], pts, SpectralWeightMode::PaperLiteral, QuadratureSpec::default()).unwrap()
    }

    fn widened(sigma: f64, t: f64, x: f64, y: f64) -> f64 {
        let v = sigma * sigma + 2.0 * t;
        (sigma * sigma / v) * (-(x * x + y * y) / (2.0 * v)).exp()
    }

    fn probe_grid() -> Vec<(f64, Vec<f64>)> {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                pts.push((-0.95 + 0.45 * i as f64, vec![-1.0 + 0.5 * j as f64]));
            }
        }
        pts
    }

    /// Relative L2 error against the widened Gaussian for a bump split across
    /// both halves of an equal-layer medium.
    fn homogeneous_error(h: f64, dt: f64) -> f64 {
        let sigma = 0.5;
        let bumps = (0..2).map(|l| GaussianBump::isotropic(l, 1.0, vec![0.0, 0.0], sigma)).collect();
        let g = BumpField::new(1, bumps).unwrap();
        let sc = scenario(problem(1.0, 1.0, 1.0, 1), &g, 0.1, &probe_grid());
        let grid = FdGrid::auto(&sc, h, h, dt).unwrap();
        let (samples, _) = fd_solve(&sc, &grid).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for s in &samples {
            let want = widened(sigma, 0.1, s.probe.x, s.probe.y[0]);
            num += (s.value - want).powi(2);
            den += want * want;
        }
        (num / den).sqrt()
    }

    #[test]
    fn homogeneous_gaussian_matches_analytic() {
        let err = homogeneous_error(0.01, 1e-3);
        assert!(err <= 1e-3, "{err}");
    }

    #[test]
    fn second_order_convergence() {
        let coarse = homogeneous_error(0.08, 8e-3);
        let fine = homogeneous_error(0.04, 4e-3);
        let ratio = coarse / fine;
        assert!((3.0..=5.0).contains(&ratio), "{coarse} / {fine} = {ratio}");
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = BumpField::zero(1);
        let sc = scenario(problem(1.0, 2.0, 1.5, 1), &g, 0.1, &[(0.3, vec![0.2]), (-0.7, vec![0.0])]);
        let grid = FdGrid::new(&sc.problem.medium, (-3.0, 3.0), 0.05, &[(-3.0, 3.0)], 0.05, 0.01, 0.1).unwrap();
        let (samples, _) = fd_solve(&sc, &grid).unwrap();
        assert!(samples.iter().all(|s| s.value == 0.0));
    }

    #[test]
    fn mass_is_conserved_for_equal_layers() {
        let g = BumpField::new(
            1,
            vec![GaussianBump::isotropic(0, 1.0, vec![-0.4, 0.1], 0.3), GaussianBump::isotropic(1, 0.5, vec![0.6, -0.2], 0.25)],
        )
        .unwrap();
        let sc = scenario(problem(1.3, 1.3, 1.0, 1), &g, 0.05, &[]);
        let grid = FdGrid::auto(&sc, 0.02, 0.02, 1e-3).unwrap();
        let mut solver = FdSolver::new(&sc, &grid).unwrap();
        let m0 = solver.mass();
        for n in 1..=20 {
            solver.advance_to(n as f64 * 1e-3).unwrap();
            let m = solver.mass();
            assert!((m - m0).abs() <= 1e-10 * m0, "step {n}: {m} vs {m0}");
        }
    }

    #[test]
    fn interface_residual_is_second_order() {
        let residual = |h: f64| {
            // data that already satisfies both contact conditions
            let params = TwoLayerIdealParams::new(1.0, 2.0, 1.5).unwrap();
            let g = MirrorField::new(&params, GaussianBump::isotropic(0, 1.0, vec![-0.5, 0.0], 0.3).term());
            let sc = HeatScenario::new(problem(1.0, 2.0, 1.5, 1), &g, vec![0.05], &[], SpectralWeightMode::PaperLiteral, QuadratureSpec::default())
                .unwrap();
            // Crank–Nicolson barely damps the stiff modes, so dt shrinks faster than h
            let grid = FdGrid::auto(&sc, h, 0.05, h / 20.0).unwrap();
            let mut solver = FdSolver::new(&sc, &grid).unwrap();
            solver.advance_to(0.05).unwrap();
            let (r, scale) = solver.interface_residual();
            r / scale
        };
        let (coarse, fine) = (residual(0.04), residual(0.02));
        assert!(fine < 1e-2 && coarse / fine > 3.0, "{coarse} -> {fine}");
    }

    #[test]
    fn two_transverse_dimensions() {
        let sigma = 0.5;
        let bumps = (0..2).map(|l| GaussianBump::isotropic(l, 1.0, vec![0.0, 0.0, 0.0], sigma)).collect();
        let g = BumpField::new(2, bumps).unwrap();
        let pts = [(0.3, vec![0.2, -0.4]), (-0.6, vec![0.0, 0.5])];
        let sc = HeatScenario::new(problem(1.0, 1.0, 1.0, 2), &g, vec![0.1], &pts, SpectralWeightMode::PaperLiteral, QuadratureSpec::default())
            .unwrap();
        let grid = FdGrid::auto(&sc, 0.05, 0.05, 5e-3).unwrap();
        let (samples, _) = fd_solve(&sc, &grid).unwrap();
        let v = sigma * sigma + 0.2;
        for s in samples {
            let r2 = s.probe.x.powi(2) + s.probe.y.iter().map(|y| y * y).sum::<f64>();
            let want = (sigma * sigma / v).powf(1.5) * (-r2 / (2.0 * v)).exp();
            assert!((s.value - want).abs() <= 5e-3 * want, "{s:?} vs {want}");
        }
    }

    #[test]
    fn grid_validation() {
        let medium = problem(1.0, 2.0, 1.0, 1).medium;
        assert!(FdGrid::new(&medium, (-1.03, 2.0), 0.1, &[(-1.0, 1.0)], 0.1, 0.01, 0.1).is_err());
        assert!(FdGrid::new(&medium, (-1.0, 2.0), 0.1, &[(-1.0, 1.0)], 0.1, -0.01, 0.1).is_err());
        assert!(FdGrid::new(&medium, (-1.0, 2.0), 0.1, &[(-1.0, 1.0), (0.0, 1.0)], 0.1, 0.01, 0.1).is_err());
        let g = BumpField::new(1, vec![GaussianBump::isotropic(0, 1.0, vec![-0.5, 0.0], 0.3)]).unwrap();
        let sc = scenario(problem(1.0, 2.0, 1.0, 1), &g, 0.5, &[]);
        let small = FdGrid::new(&sc.problem.medium, (-3.0, 1.0), 0.1, &[(-3.0, 3.0)], 0.1, 0.01, 0.5).unwrap();
        assert!(matches!(FdSolver::new(&sc, &small), Err(Error::Domain(_))));
        let big = FdGrid::auto(&sc, 0.1, 0.1, 0.05).unwrap();
        assert!(big.decay_estimate(&sc) <= BOUNDARY_DECAY);
        assert_eq!(FdSolver::new(&sc, &big).unwrap().warnings.len(), 1);
    }

    fn samples(values: &[f64]) -> Vec<Sample> {
        let medium = problem(1.0, 2.0, 1.0, 1).medium;
        values
            .iter()
            .enumerate()
            .map(|(k, &v)| Sample { t: 0.1, probe: Probe::new(&medium, k as f64 - 1.5, vec![0.0]).unwrap(), value: v })
            .collect()
    }

    #[test]
    fn compare_examples() {
        let r = samples(&[1.0, 2.0, -4.0, 0.5]);
        let same = compare(&r, &r).unwrap();
        assert_eq!((same.l2_rel, same.linf_rel), (0.0, 0.0));
        assert!(same.per_layer.iter().all(|l| l.l2_rel == 0.0 && l.linf_rel == 0.0));
        let d = 0.01;
        let shifted = samples(&[1.0 + d, 2.0 + d, -4.0 + d, 0.5 + d]);
        let rep = compare(&shifted, &r).unwrap();
        assert!((rep.linf_rel - d / 4.0).abs() < 1e-15);
        let total: f64 = rep.per_layer.iter().map(|l| l.l2_rel * l.l2_rel).sum();
        assert!((total.sqrt() - rep.l2_rel).abs() < 1e-15);
        assert_eq!(rep.per_layer.iter().map(|l| l.samples).collect::<Vec<_>>(), vec![2, 2]);
        assert!(matches!(compare(&r[..3], &r), Err(Error::ProbeMismatch(_))));
        let mut moved = r.clone();
        moved[0].t = 0.2;
        assert!(matches!(compare(&moved, &r), Err(Error::ProbeMismatch(_))));
    }
}
