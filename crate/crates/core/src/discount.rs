//! Generalized discounted problems `f(x, eps v) + G(x, Dv) = 0`.

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianModel, Side};
use crate::potential::Potential;
use std::fmt;
use std::sync::Arc;

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SlopeField = Arc<dyn Fn(f64, f64, Side) -> f64 + Send + Sync>;

/// Shape of `p -> G(x, p)`. Convexity assertions apply only to `Convex`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Convex,
    Concave,
    General,
}

/// Exponents fed to `exp` are clamped to this magnitude.
pub const EXPONENT_CLAMP: f64 = 60.0;

fn clamped_exp(t: f64) -> f64 {
    t.clamp(-EXPONENT_CLAMP, EXPONENT_CLAMP).exp()
}

/// The pair `(f, G)`; `G` takes the relative slope `Dv`, any momentum shift is built in.
#[derive(Clone)]
pub struct GeneralizedDiscount {
    discount: ScalarField,
    discount_rate: ScalarField,
    cost: ScalarField,
    cost_slope: SlopeField,
    critical_momenta: Vec<f64>,
    radicand: Option<ScalarField>,
    lambda0: Option<f64>,
    shape: Shape,
}

impl fmt::Debug for GeneralizedDiscount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralizedDiscount")
            .field("critical_momenta", &self.critical_momenta)
            .field("lambda0", &self.lambda0)
            .field("shape", &self.shape)
            .finish_non_exhaustive()
    }
}

impl GeneralizedDiscount {
    /// Assemble a pair from closures. `critical_momenta` lists the slopes where
    /// `p -> G(x, p)` changes monotonicity, shared by all `x`.
    pub fn new(
        discount: ScalarField,
        discount_rate: ScalarField,
        cost: ScalarField,
        cost_slope: SlopeField,
        critical_momenta: Vec<f64>,
        shape: Shape,
    ) -> Self {
        let mut critical_momenta = critical_momenta;
        critical_momenta.sort_by(f64::total_cmp);
        Self {
            discount,
            discount_rate,
            cost,
            cost_slope,
            critical_momenta,
            radicand: None,
            lambda0: None,
            shape,
        }
    }

    /// `f(x, r) = r - level`, `G(x, p) = H(x, P + p)`: the plain discounted problem.
    pub fn from_hamiltonian(h: &HamiltonianModel, level: f64) -> Self {
        let shift = h.momentum();
        let (hg, hs) = (h.clone(), h.clone());
        Self::new(
            Arc::new(move |_, r| r - level),
            Arc::new(|_, _| 1.0),
            Arc::new(move |x, p| hg.eval(x, shift + p)),
            Arc::new(move |x, p, side| hs.slope(x, shift + p, side)),
            h.critical_momenta().into_iter().map(|c| c - shift).collect(),
            Shape::General,
        )
    }

    /// `f(x, r) = -exp(-lambda0 r)`, `G(x, p) = exp(lambda0 (H(x, P + p) - level))`.
    pub fn exponential(h: &HamiltonianModel, lambda0: f64, level: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda0 must be positive, got {lambda0}")));
        }
        let shift = h.momentum();
        let (hg, hs) = (h.clone(), h.clone());
        let mut gd = Self::new(
            Arc::new(move |_, r| -clamped_exp(-lambda0 * r)),
            Arc::new(move |_, r| lambda0 * clamped_exp(-lambda0 * r)),
            Arc::new(move |x, p| clamped_exp(lambda0 * (hg.eval(x, shift + p) - level))),
            Arc::new(move |x, p, side| {
                let q = shift + p;
                lambda0 * hs.slope(x, q, side) * clamped_exp(lambda0 * (hs.eval(x, q) - level))
            }),
            h.critical_momenta().into_iter().map(|c| c - shift).collect(),
            Shape::Convex,
        );
        gd.lambda0 = Some(lambda0);
        Ok(gd)
    }

    /// Double-well rewrite `-sqrt(V + level - r) + sign (1 - |P + p|^2) = 0`, where
    /// `sign = +1` for the concave branch and `-1` for the convex one.
    pub fn double_well_branch(momentum: f64, level: f64, potential: Potential, concave: bool) -> Self {
        let sign = if concave { 1.0 } else { -1.0 };
        let (v1, v2, v3) = (potential.clone(), potential.clone(), potential);
        let mut gd = Self::new(
            Arc::new(move |x, r| -(v1.eval(x) + level - r).sqrt()),
            Arc::new(move |x, r| 0.5 / (v2.eval(x) + level - r).sqrt()),
            Arc::new(move |_, p| {
                let q = momentum + p;
                sign * (1.0 - q * q)
            }),
            Arc::new(move |_, p, _| -2.0 * sign * (momentum + p)),
            vec![-momentum],
            if concave { Shape::Concave } else { Shape::Convex },
        );
        gd.radicand = Some(Arc::new(move |x, r| v3.eval(x) + level - r));
        gd
    }

    pub fn with_lambda0(mut self, lambda0: f64) -> Self {
        self.lambda0 = Some(lambda0);
        self
    }

    #[inline]
    pub fn f(&self, x: f64, r: f64) -> f64 {
        (self.discount)(x, r)
    }

    #[inline]
    pub fn f_r(&self, x: f64, r: f64) -> f64 {
        (self.discount_rate)(x, r)
    }

    #[inline]
    pub fn f_r0(&self, x: f64) -> f64 {
        self.f_r(x, 0.0)
    }

    #[inline]
    pub fn g(&self, x: f64, p: f64) -> f64 {
        (self.cost)(x, p)
    }

    #[inline]
    pub fn g_slope(&self, x: f64, p: f64, side: Side) -> f64 {
        (self.cost_slope)(x, p, side)
    }

    pub fn critical_momenta(&self) -> &[f64] {
        &self.critical_momenta
    }

    pub fn lambda0(&self) -> Option<f64> {
        self.lambda0
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// Checks the square-root argument, if any, at `(x, r)`.
    pub fn check_domain(&self, x: f64, r: f64) -> Result<()> {
        match &self.radicand {
            Some(rad) if !(rad(x, r) >= 0.0) => Err(Error::NegativeRadicand { x }),
            _ => Ok(()),
        }
    }

    /// Midpoint convexity of `G` in `p` at one triple.
    pub fn midpoint_convex_at(&self, x: f64, p1: f64, p2: f64, tol: f64) -> bool {
        self.g(x, 0.5 * (p1 + p2)) <= 0.5 * (self.g(x, p1) + self.g(x, p2)) + tol
    }
}
