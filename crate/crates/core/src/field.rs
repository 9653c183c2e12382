//! Initial data and test fields on the layered domain.
//!
//! A field is a set of per-layer components `f_j(x, y)`. Each component is a
//! smooth function defined on all of `ℝ^{1+m}`; it is used only on its own
//! layer, but evaluating it outside (for difference stencils) is allowed.

use crate::media::{LayeredMedium, TwoLayerIdealParams};
use crate::{Error, Result};

/// `e^{-x²/2}` is below 2e-16 beyond this many standard deviations.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.5;

/// Axis-aligned box outside which a component is negligible.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBox {
    pub x: (f64, f64),
    pub y: Vec<(f64, f64)>,
}

impl SupportBox {
    /// Clip the x-range to `(lo, hi)`; `None` if nothing is left.
    pub fn clip_x(&self, lo: f64, hi: f64) -> Option<SupportBox> {
        let x = (self.x.0.max(lo), self.x.1.min(hi));
        (x.0 < x.1).then(|| SupportBox { x, y: self.y.clone() })
    }

    fn hull(&self, other: &SupportBox) -> SupportBox {
        SupportBox {
            x: (self.x.0.min(other.x.0), self.x.1.max(other.x.1)),
            y: self.y.iter().zip(&other.y).map(|(a, b)| (a.0.min(b.0), a.1.max(b.1))).collect(),
        }
    }
}

/// Unnormalized one-dimensional Gaussian `e^{-(x-c)²/(2σ²)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1d {
    pub center: f64,
    pub sigma: f64,
}

impl Gaussian1d {
    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.sigma;
        (-0.5 * z * z).exp()
    }

    pub fn support(&self) -> (f64, f64) {
        let r = GAUSSIAN_SUPPORT_SIGMAS * self.sigma;
        (self.center - r, self.center + r)
    }
}

/// Transverse factor of a separable term.
#[derive(Debug, Clone, PartialEq)]
pub enum TransverseProfile {
    /// `e^{-|y-c|²/(2σ²)}`; its transforms have closed forms.
    Isotropic { center: Vec<f64>, sigma: f64 },
    /// Product of per-coordinate Gaussians with distinct widths.
    Product(Vec<Gaussian1d>),
}

impl TransverseProfile {
    pub fn value(&self, y: &[f64]) -> f64 {
        match self {
            Self::Isotropic { center, sigma } => {
                let r2: f64 = y.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                (-0.5 * r2 / (sigma * sigma)).exp()
            }
            Self::Product(g) => g.iter().zip(y).map(|(g, &v)| g.value(v)).product(),
        }
    }

    pub fn support(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Isotropic { center, sigma } => {
                center.iter().map(|&c| Gaussian1d { center: c, sigma: *sigma }.support()).collect()
            }
            Self::Product(g) => g.iter().map(Gaussian1d::support).collect(),
        }
    }

    pub fn min_sigma(&self) -> f64 {
        match self {
            Self::Isotropic { sigma, .. } => *sigma,
            Self::Product(g) => g.iter().map(|g| g.sigma).fold(f64::INFINITY, f64::min),
        }
    }
}

/// `amplitude · X(x) · Y(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableTerm {
    pub amplitude: f64,
    pub x: Gaussian1d,
    pub y: TransverseProfile,
}

impl SeparableTerm {
    pub fn value(&self, x: f64, y: &[f64]) -> f64 {
        self.amplitude * self.x.value(x) * self.y.value(y)
    }

    pub fn support(&self) -> SupportBox {
        SupportBox { x: self.x.support(), y: self.y.support() }
    }
}

pub trait ScalarField: Sync {
    fn transverse_dim(&self) -> usize;

    /// Component of layer `layer` at `(x, y)`, for any `x`.
    fn value(&self, layer: usize, x: f64, y: &[f64]) -> f64;

    /// Box containing the essential support of the component, or `None` if
    /// the component vanishes.
    fn support(&self, layer: usize) -> Option<SupportBox>;

    /// Decomposition of the component into Gaussian separable terms, when
    /// one exists. Transforms use it to avoid tensor-product quadrature.
    fn terms(&self, _layer: usize) -> Option<Vec<SeparableTerm>> {
        None
    }
}

/// Value of `f` at `(x, y)`, using the component of the layer containing `x`.
pub fn evaluate(f: &dyn ScalarField, medium: &LayeredMedium, x: f64, y: &[f64]) -> Result<f64> {
    Ok(f.value(medium.layer_index(x)?, x, y))
}

/// Per-layer Gaussian bump with a diagonal covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBump {
    pub layer: usize,
    pub amplitude: f64,
    /// `(x, y_1, …, y_m)`.
    pub center: Vec<f64>,
    /// Standard deviation per coordinate, same layout as `center`.
    pub sigma: Vec<f64>,
}

impl GaussianBump {
    /// Bump with the same width `sigma` in every coordinate.
    pub fn isotropic(layer: usize, amplitude: f64, center: Vec<f64>, sigma: f64) -> Self {
        let n = center.len();
        Self { layer, amplitude, center, sigma: vec![sigma; n] }
    }

    pub fn term(&self) -> SeparableTerm {
        let ys = &self.sigma[1..];
        let y = if ys.iter().all(|&s| s == ys[0]) || ys.is_empty() {
            TransverseProfile::Isotropic { center: self.center[1..].to_vec(), sigma: ys.first().copied().unwrap_or(1.0) }
        } else {
            TransverseProfile::Product(
                self.center[1..].iter().zip(ys).map(|(&c, &s)| Gaussian1d { center: c, sigma: s }).collect(),
            )
        };
        SeparableTerm { amplitude: self.amplitude, x: Gaussian1d { center: self.center[0], sigma: self.sigma[0] }, y }
    }
}

/// Sum of Gaussian bumps; each bump lives in one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpField {
    pub transverse_dim: usize,
    pub bumps: Vec<GaussianBump>,
}

impl BumpField {
    pub fn new(transverse_dim: usize, bumps: Vec<GaussianBump>) -> Result<Self> {
        for (i, b) in bumps.iter().enumerate() {
            if b.center.len() != transverse_dim + 1 || b.sigma.len() != transverse_dim + 1 {
                return Err(Error::Domain(format!(
                    "bump {} needs {} coordinates in center and sigma",
                    i + 1,
                    transverse_dim + 1
                )));
            }
            if b.sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) || !b.amplitude.is_finite() {
                return Err(Error::Domain(format!("bump {} has a non-positive width or bad amplitude", i + 1)));
            }
        }
        Ok(Self { transverse_dim, bumps })
    }

    pub fn zero(transverse_dim: usize) -> Self {
        Self { transverse_dim, bumps: Vec::new() }
    }

    fn layer_terms(&self, layer: usize) -> Vec<SeparableTerm> {
        self.bumps.iter().filter(|b| b.layer == layer).map(GaussianBump::term).collect()
    }
}

impl ScalarField for BumpField {
    fn transverse_dim(&self) -> usize {
        self.transverse_dim
    }

    fn value(&self, layer: usize, x: f64, y: &[f64]) -> f64 {
        self.layer_terms(layer).iter().map(|t| t.value(x, y)).sum()
    }

    fn support(&self, layer: usize) -> Option<SupportBox> {
        self.layer_terms(layer).iter().map(SeparableTerm::support).reduce(|a, b| a.hull(&b))
    }

    fn terms(&self, layer: usize) -> Option<Vec<SeparableTerm>> {
        Some(self.layer_terms(layer))
    }
}

/// Field compliant with two-layer ideal contact at `x = 0`:
///
/// ```text
/// f_1(x, y) = g(x, y) + c_r g(-x, y)
/// f_2(x, y) = c_t g(s x, y),   s = a1/a2
/// ```
///
/// with `c_t = 2/(1 + ν s)` and `c_r = c_t − 1`, which makes `f` and
/// `f_x(0⁻) − ν f_x(0⁺)` continuous for any Gaussian `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorField {
    pub g: SeparableTerm,
    pub scale: f64,
    pub transmitted: f64,
    pub reflected: f64,
}

impl MirrorField {
    pub fn new(params: &TwoLayerIdealParams, g: SeparableTerm) -> Self {
        let scale = params.a1 / params.a2;
        let transmitted = 2.0 / (1.0 + params.nu * scale);
        Self { g, scale, transmitted, reflected: transmitted - 1.0 }
    }

    fn layer_terms(&self, layer: usize) -> Vec<SeparableTerm> {
        let g = &self.g;
        match layer {
            0 => vec![
                g.clone(),
                SeparableTerm {
                    amplitude: self.reflected * g.amplitude,
                    x: Gaussian1d { center: -g.x.center, sigma: g.x.sigma },
                    y: g.y.clone(),
                },
            ],
            1 => vec![SeparableTerm {
                amplitude: self.transmitted * g.amplitude,
                x: Gaussian1d { center: g.x.center / self.scale, sigma: g.x.sigma / self.scale },
                y: g.y.clone(),
            }],
            _ => Vec::new(),
        }
    }
}

impl ScalarField for MirrorField {
    fn transverse_dim(&self) -> usize {
        self.g.y.support().len()
    }

    fn value(&self, layer: usize, x: f64, y: &[f64]) -> f64 {
        self.layer_terms(layer).iter().map(|t| t.value(x, y)).sum()
    }

    fn support(&self, layer: usize) -> Option<SupportBox> {
        self.layer_terms(layer).iter().map(SeparableTerm::support).reduce(|a, b| a.hull(&b))
    }

    fn terms(&self, layer: usize) -> Option<Vec<SeparableTerm>> {
        Some(self.layer_terms(layer))
    }
}

/// Field given by a closure `(layer, x, y) -> value` with explicit supports.
pub struct FnField<F> {
    pub transverse_dim: usize,
    pub supports: Vec<Option<SupportBox>>,
    pub f: F,
}

impl<F: Fn(usize, f64, &[f64]) -> f64 + Sync> ScalarField for FnField<F> {
    fn transverse_dim(&self) -> usize {
        self.transverse_dim
    }

    fn value(&self, layer: usize, x: f64, y: &[f64]) -> f64 {
        (self.f)(layer, x, y)
    }

    fn support(&self, layer: usize) -> Option<SupportBox> {
        self.supports.get(layer).cloned().flatten()
    }
}
