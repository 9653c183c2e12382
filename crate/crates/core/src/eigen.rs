//! Eigenfunctions of the segmented Sturm–Liouville problems.
//!
//! Every layer component has the form `A_j e^{iλx/a_j} + B_j e^{-iλx/a_j}`.
//! Amplitudes are fixed in the last layer and propagated backward through the
//! interfaces, one 2×2 solve per interface.
//!
//! The dual problem is the adjoint of `a_j² d²/dx²` under the unweighted
//! pairing `Σ_j ∫ u_j v_j`. Its interface conditions carry the factor
//! `a²/Δ` on each side:
//!
//! ```text
//! (a_k²/Δ_{1,k}) [α_{m1} d/dx + β_{m1}] φ*_k = (a_{k+1}²/Δ_{2,k}) [α_{m2} d/dx + β_{m2}] φ*_{k+1}
//! ```
//!
//! so that the interface terms `a²(u'v − uv')` cancel. With these conditions
//! the dual wave is a per-layer multiple `w_j` of the conjugate primal wave.

use num_complex::Complex64;

use crate::media::{self, InterfaceCoupling, LayeredMedium, TwoLayerIdealParams};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseWave {
    pub kind: WaveKind,
    /// Spectral parameter appearing in the exponents.
    pub lambda: f64,
    /// `(A_j, B_j)` per layer.
    pub amplitudes: Vec<(Complex64, Complex64)>,
    interfaces: Vec<f64>,
    diffusivity: Vec<f64>,
}

impl PiecewiseWave {
    fn new(kind: WaveKind, lambda: f64, amplitudes: Vec<(Complex64, Complex64)>, medium: &LayeredMedium) -> Self {
        Self {
            kind,
            lambda,
            amplitudes,
            interfaces: medium.interfaces.clone(),
            diffusivity: medium.diffusivity.clone(),
        }
    }

    pub fn layer_count(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn wavenumber(&self, layer: usize) -> f64 {
        self.lambda / self.diffusivity[layer]
    }

    /// Layer component `j` evaluated at any `x` (not restricted to the layer).
    pub fn component(&self, layer: usize, x: f64) -> Complex64 {
        let (a, b) = self.amplitudes[layer];
        let e = Complex64::from_polar(1.0, self.wavenumber(layer) * x);
        a * e + b * e.conj()
    }

    pub fn component_derivative(&self, layer: usize, x: f64) -> Complex64 {
        let (a, b) = self.amplitudes[layer];
        let k = self.wavenumber(layer);
        let e = Complex64::from_polar(1.0, k * x);
        I * k * (a * e - b * e.conj())
    }

    fn layer_of(&self, x: f64) -> Result<usize> {
        if let Some(k) = self.interfaces.iter().position(|&l| l == x) {
            return Err(Error::AmbiguousPoint { x, interface: k });
        }
        Ok(self.interfaces.partition_point(|&l| l < x))
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(self.component(self.layer_of(x)?, x))
    }

    /// One-sided value; on an interface `side` selects the layer.
    pub fn eval_side(&self, x: f64, side: Side) -> Complex64 {
        let layer = match self.interfaces.iter().position(|&l| l == x) {
            Some(k) => match side {
                Side::Left => k,
                Side::Right => k + 1,
            },
            None => self.interfaces.partition_point(|&l| l < x),
        };
        self.component(layer, x)
    }

    fn scaled(mut self, s: Complex64) -> Self {
        for (a, b) in &mut self.amplitudes {
            *a *= s;
            *b *= s;
        }
        self
    }
}

/// Medium plus coupling, validated once, with the layer weights `w_j` that
/// relate dual and conjugate primal waves.
#[derive(Debug, Clone)]
pub struct SpectralProblem {
    pub medium: LayeredMedium,
    pub coupling: InterfaceCoupling,
    weights: Vec<f64>,
    indefinite_at: Option<usize>,
}

impl SpectralProblem {
    pub fn new(medium: LayeredMedium, coupling: InterfaceCoupling) -> Result<Self> {
        media::validate(&medium, &coupling).map_err(Error::Invalid)?;
        let n = medium.layer_count();
        let mut weights = vec![1.0; n];
        let mut indefinite_at = None;
        for k in (0..n - 1).rev() {
            let ratio = coupling.delta(k, 0) / coupling.delta(k, 1);
            let (al, ar) = (medium.a(k), medium.a(k + 1));
            weights[k] = weights[k + 1] * ratio * ar * ar / (al * al);
            if weights[k] <= 0.0 && indefinite_at.is_none() {
                indefinite_at = Some(k);
            }
        }
        Ok(Self { medium, coupling, weights, indefinite_at })
    }

    pub fn two_layer(params: &TwoLayerIdealParams, transverse_dim: usize) -> Result<Self> {
        Self::new(params.medium(transverse_dim)?, params.coupling())
    }

    /// `w_j` with `w_last = 1`; the dual wave equals `w_j · conj(primal)` layerwise.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Scale applied to each side of interface `k` in the dual conditions.
    fn dual_scales(&self, k: usize) -> (f64, f64) {
        let (al, ar) = (self.medium.a(k), self.medium.a(k + 1));
        (al * al / self.coupling.delta(k, 0), ar * ar / self.coupling.delta(k, 1))
    }

    fn side_scales(&self, kind: WaveKind, k: usize) -> (f64, f64) {
        match kind {
            WaveKind::Primal => (1.0, 1.0),
            WaveKind::Dual => self.dual_scales(k),
        }
    }

    /// Fix `(A, B)` in the last layer and solve the interface systems
    /// backward to layer 0.
    pub fn propagate(&self, lambda: f64, last: (Complex64, Complex64), kind: WaveKind) -> Result<PiecewiseWave> {
        if !(lambda != 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("spectral parameter {lambda} must be finite and non-zero")));
        }
        let n = self.medium.layer_count();
        let mut amps = vec![(Complex64::default(), Complex64::default()); n];
        amps[n - 1] = last;
        for k in (0..n - 1).rev() {
            let l = self.medium.interfaces[k];
            let c = &self.coupling.interfaces[k];
            let (sl, sr) = self.side_scales(kind, k);
            let kr = lambda / self.medium.a(k + 1);
            let kl = lambda / self.medium.a(k);
            let (ar, br) = amps[k + 1];
            let er = Complex64::from_polar(1.0, kr * l);
            let value_r = ar * er + br * er.conj();
            let deriv_r = I * kr * (ar * er - br * er.conj());
            let el = Complex64::from_polar(1.0, kl * l);
            let mut m = [[Complex64::default(); 2]; 2];
            let mut rhs = [Complex64::default(); 2];
            for row in 0..2 {
                let (alpha, beta) = (c.alpha[row][0], c.beta[row][0]);
                m[row][0] = sl * (alpha * I * kl + beta) * el;
                m[row][1] = sl * (-alpha * I * kl + beta) * el.conj();
                rhs[row] = sr * (c.alpha[row][1] * deriv_r + c.beta[row][1] * value_r);
            }
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let scale = (m[0][0].norm() + m[0][1].norm()) * (m[1][0].norm() + m[1][1].norm());
            if !(det.norm() > 1e-13 * scale) {
                return Err(Error::SingularInterface { interface: k, lambda });
            }
            let a = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
            let b = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det;
            amps[k] = (a, b);
        }
        Ok(PiecewiseWave::new(kind, lambda, amps, &self.medium))
    }

    /// Primal eigenfunction normalized by `φ_{n+1} = e^{iλx/a_{n+1}}`.
    pub fn build_primal(&self, lambda: f64) -> Result<PiecewiseWave> {
        self.propagate(lambda, (Complex64::new(1.0, 0.0), Complex64::default()), WaveKind::Primal)
    }

    /// Dual eigenfunction normalized by `φ*_{n+1} = e^{-iλx/a_{n+1}}`.
    pub fn build_dual(&self, lambda: f64) -> Result<PiecewiseWave> {
        self.propagate(lambda, (Complex64::default(), Complex64::new(1.0, 0.0)), WaveKind::Dual)
    }

    /// Complete biorthogonal family `(Φ(·,β), Φ*(·,β))`, `β ≠ 0`, with
    /// `∫_ℝ Φ(x,β) Φ*(ξ,β) dβ = 2π δ(x − ξ)`.
    ///
    /// For `β > 0`, Φ is the wave incident from the left (unit incoming
    /// amplitude in layer 0, no incoming wave from the right); for `β < 0` it
    /// is the wave incident from the right at `|β|`. Each is scaled by
    /// `1/√(w a)` of its incident layer, and `Φ* = w_j conj(Φ)`.
    pub fn complete_pair(&self, beta: f64) -> Result<(PiecewiseWave, PiecewiseWave)> {
        if let Some(k) = self.indefinite_at {
            return Err(Error::IndefiniteWeight { interface: k });
        }
        let lambda = beta.abs();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::default();
        let right_going = self.propagate(lambda, (one, zero), WaveKind::Primal)?;
        let a0 = right_going.amplitudes[0].0;
        if !(a0.norm() > 1e-300) {
            return Err(Error::SingularInterface { interface: 0, lambda });
        }
        let n = self.medium.layer_count();
        let primal = if beta > 0.0 {
            let norm = 1.0 / (self.weights[0] * self.medium.a(0)).sqrt();
            right_going.scaled(norm / a0)
        } else {
            let left_going = self.propagate(lambda, (zero, one), WaveKind::Primal)?;
            let c = -left_going.amplitudes[0].0 / a0;
            let mut amps = left_going.amplitudes.clone();
            for (dst, src) in amps.iter_mut().zip(&right_going.amplitudes) {
                dst.0 += c * src.0;
                dst.1 += c * src.1;
            }
            let norm = 1.0 / (self.weights[n - 1] * self.medium.a(n - 1)).sqrt();
            PiecewiseWave::new(WaveKind::Primal, lambda, amps, &self.medium).scaled(Complex64::new(norm, 0.0))
        };
        let dual_amps = primal
            .amplitudes
            .iter()
            .zip(&self.weights)
            .map(|(&(a, b), &w)| (w * b.conj(), w * a.conj()))
            .collect();
        let dual = PiecewiseWave::new(WaveKind::Dual, lambda, dual_amps, &self.medium);
        Ok((primal, dual))
    }

    /// Largest relative mismatch of the two conditions at interface `k`,
    /// using the conditions appropriate to `wave.kind`.
    pub fn coupling_residual(&self, wave: &PiecewiseWave, k: usize) -> f64 {
        let l = self.medium.interfaces[k];
        let c = &self.coupling.interfaces[k];
        let (sl, sr) = self.side_scales(wave.kind, k);
        let (ul, dl) = (wave.component(k, l), wave.component_derivative(k, l));
        let (ur, dr) = (wave.component(k + 1, l), wave.component_derivative(k + 1, l));
        (0..2)
            .map(|m| {
                let lhs = sl * (c.alpha[m][0] * dl + c.beta[m][0] * ul);
                let rhs = sr * (c.alpha[m][1] * dr + c.beta[m][1] * ur);
                let scale = (sl.abs() * (c.alpha[m][0].abs() * dl.norm() + c.beta[m][0].abs() * ul.norm()))
                    .max(sr.abs() * (c.alpha[m][1].abs() * dr.norm() + c.beta[m][1].abs() * ur.norm()))
                    .max(f64::MIN_POSITIVE);
                (lhs - rhs).norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

pub fn build_primal(medium: &LayeredMedium, coupling: &InterfaceCoupling, lambda: f64) -> Result<PiecewiseWave> {
    SpectralProblem::new(medium.clone(), coupling.clone())?.build_primal(lambda)
}

pub fn build_dual(medium: &LayeredMedium, coupling: &InterfaceCoupling, lambda: f64) -> Result<PiecewiseWave> {
    SpectralProblem::new(medium.clone(), coupling.clone())?.build_dual(lambda)
}

/// Two-layer ideal-contact eigenfunctions in closed form (interface at 0):
///
/// ```text
/// φ_1 = (1+δ0)(cos(λx/a1) + i δ0^{-1/2} sin(λx/a1))
/// φ_2 = (1+δ0)(cos(λx/a2) + i δ0^{1/2}  sin(λx/a2))
/// φ*_k = r_k conj(φ_k)
/// ```
pub fn closed_form_two_layer(params: &TwoLayerIdealParams, kind: WaveKind, lambda: f64) -> PiecewiseWave {
    let d = params.delta0();
    let scale = 1.0 + d;
    let split = |c: f64| (scale * 0.5 * (1.0 + c), scale * 0.5 * (1.0 - c));
    let (a1, b1) = split(1.0 / d.sqrt());
    let (a2, b2) = split(d.sqrt());
    let c = |x: f64| Complex64::new(x, 0.0);
    let amplitudes = match kind {
        WaveKind::Primal => vec![(c(a1), c(b1)), (c(a2), c(b2))],
        WaveKind::Dual => vec![(c(params.r1() * b1), c(params.r1() * a1)), (c(params.r2() * b2), c(params.r2() * a2))],
    };
    PiecewiseWave {
        kind,
        lambda,
        amplitudes,
        interfaces: vec![0.0],
        diffusivity: vec![params.a1, params.a2],
    }
}

/// Relative residual of `a_j² φ'' + λ² φ` at `x` for layer component `j`,
/// with a central second difference of step `h`.
pub fn ode_residual(wave: &PiecewiseWave, layer: usize, x: f64, h: f64) -> f64 {
    let a = wave.diffusivity[layer];
    let f = |x| wave.component(layer, x);
    let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    let lam2 = wave.lambda * wave.lambda;
    let (p, q) = wave.amplitudes[layer];
    let scale = lam2 * (p.norm() + q.norm());
    (a * a * d2 + lam2 * f(x)).norm() / scale
}
