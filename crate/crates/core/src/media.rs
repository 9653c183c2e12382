//! The segmented axis, per-layer diffusivities and interface couplings.
//!
//! Layers are numbered from 0 in code: layer `j` occupies
//! `(l_{j-1}, l_j)` with `l_{-1} = -∞` and `l_n = +∞`. Reports print them
//! 1-based.

use std::fmt;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredMedium {
    /// Interface positions, strictly increasing.
    pub interfaces: Vec<f64>,
    /// `a_j`, so that `a_j²` is the x-diffusivity of layer `j`.
    pub diffusivity: Vec<f64>,
    /// Dimension `m` of the transverse variable `y`.
    pub transverse_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub message: String,
    pub index: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{} (index {})", self.message, i + 1),
            None => f.write_str(&self.message),
        }
    }
}

fn violation(message: impl Into<String>, index: Option<usize>) -> Violation {
    Violation { message: message.into(), index }
}

impl LayeredMedium {
    pub fn new(interfaces: Vec<f64>, diffusivity: Vec<f64>, transverse_dim: usize) -> Result<Self> {
        let medium = Self { interfaces, diffusivity, transverse_dim };
        let v = medium.violations();
        if v.is_empty() {
            Ok(medium)
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn homogeneous(a: f64, transverse_dim: usize) -> Result<Self> {
        Self::new(Vec::new(), vec![a], transverse_dim)
    }

    pub fn layer_count(&self) -> usize {
        self.diffusivity.len()
    }

    pub fn interface_count(&self) -> usize {
        self.interfaces.len()
    }

    pub fn a(&self, layer: usize) -> f64 {
        self.diffusivity[layer]
    }

    /// Open interval occupied by `layer`.
    pub fn bounds(&self, layer: usize) -> (f64, f64) {
        let lo = if layer == 0 { f64::NEG_INFINITY } else { self.interfaces[layer - 1] };
        let hi = self.interfaces.get(layer).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    /// Layer containing `x`; points on an interface are rejected.
    pub fn layer_index(&self, x: f64) -> Result<usize> {
        if let Some(k) = self.interfaces.iter().position(|&l| l == x) {
            return Err(Error::AmbiguousPoint { x, interface: k });
        }
        Ok(self.interfaces.partition_point(|&l| l < x))
    }

    pub(crate) fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.transverse_dim < 1 {
            out.push(violation("transverse dimension must be at least 1", None));
        }
        if self.diffusivity.len() != self.interfaces.len() + 1 {
            out.push(violation(
                format!(
                    "layer count {} must equal interface count {} + 1",
                    self.diffusivity.len(),
                    self.interfaces.len()
                ),
                None,
            ));
        }
        for (i, &a) in self.diffusivity.iter().enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                out.push(violation("diffusivity must be positive", Some(i)));
            }
        }
        for (i, w) in self.interfaces.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                out.push(violation("interfaces must be strictly increasing", Some(i + 1)));
            }
        }
        if self.interfaces.iter().any(|l| !l.is_finite()) {
            out.push(violation("interface positions must be finite", None));
        }
        out
    }
}

/// Coefficients of the two conditions at one interface:
/// `[α_{m0} d/dx + β_{m0}] u_left = [α_{m1} d/dx + β_{m1}] u_right`, `m ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceConditions {
    /// `alpha[m][side]`: derivative coefficient of condition `m` on side `side`.
    pub alpha: [[f64; 2]; 2],
    /// `beta[m][side]`: value coefficient.
    pub beta: [[f64; 2]; 2],
}

impl InterfaceConditions {
    /// `Δ_side = α_{0,side} β_{1,side} − α_{1,side} β_{0,side}`.
    pub fn delta(&self, side: usize) -> f64 {
        self.alpha[0][side] * self.beta[1][side] - self.alpha[1][side] * self.beta[0][side]
    }

    /// True when condition 0 is plain value continuity, which the
    /// finite-difference oracle requires.
    pub fn is_value_continuous(&self) -> bool {
        self.alpha[0] == [0.0, 0.0] && self.beta[0][0] == self.beta[0][1] && self.beta[0][0] != 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceCoupling {
    pub interfaces: Vec<InterfaceConditions>,
}

impl InterfaceCoupling {
    /// Value continuity and `u'_left = ν u'_right` at each of `interface_count` planes.
    pub fn ideal_contact(nu: f64, interface_count: usize) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Domain(format!("conductivity ratio nu = {nu} must be positive")));
        }
        let c = InterfaceConditions { alpha: [[0.0, 0.0], [1.0, nu]], beta: [[1.0, 1.0], [0.0, 0.0]] };
        Ok(Self { interfaces: vec![c; interface_count] })
    }

    pub fn delta(&self, interface: usize, side: usize) -> f64 {
        self.interfaces[interface].delta(side)
    }
}

/// Check every invariant of the medium and coupling, returning all violations.
pub fn validate(medium: &LayeredMedium, coupling: &InterfaceCoupling) -> Result<(), Vec<Violation>> {
    let mut out = medium.violations();
    if coupling.interfaces.len() != medium.interfaces.len() {
        out.push(violation(
            format!(
                "coupling has {} interfaces, medium has {}",
                coupling.interfaces.len(),
                medium.interfaces.len()
            ),
            None,
        ));
    }
    for (k, c) in coupling.interfaces.iter().enumerate() {
        for side in 0..2 {
            let d = c.delta(side);
            if d == 0.0 || !d.is_finite() {
                out.push(violation(format!("Δ_{{{},k}} = 0", side + 1), Some(k)));
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Two half-spaces in ideal contact at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLayerIdealParams {
    pub a1: f64,
    pub a2: f64,
    /// Conductivity ratio `ν = λ_2 / λ_1`.
    pub nu: f64,
}

impl TwoLayerIdealParams {
    pub fn new(a1: f64, a2: f64, nu: f64) -> Result<Self> {
        if !(a1 > 0.0 && a2 > 0.0 && nu > 0.0) {
            return Err(Error::Domain(format!("two-layer parameters must be positive: a1={a1} a2={a2} nu={nu}")));
        }
        Ok(Self { a1, a2, nu })
    }

    /// Contrast `δ0 = a2 / (ν a1)`.
    pub fn delta0(&self) -> f64 {
        self.a2 / (self.nu * self.a1)
    }

    pub fn r1(&self) -> f64 {
        self.a2 / (self.nu * self.a1 * self.a1)
    }

    pub fn r2(&self) -> f64 {
        1.0 / self.a2
    }

    pub fn medium(&self, transverse_dim: usize) -> Result<LayeredMedium> {
        LayeredMedium::new(vec![0.0], vec![self.a1, self.a2], transverse_dim)
    }

    pub fn coupling(&self) -> InterfaceCoupling {
        InterfaceCoupling::ideal_contact(self.nu, 1).expect("nu validated at construction")
    }
}
