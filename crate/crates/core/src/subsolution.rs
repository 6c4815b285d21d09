//! Sublevel slopes, maximal subsolutions, viscosity residual tests and the explicit
//! constructions for the flat quasi-convex example.

use crate::discount::GeneralizedDiscount;
use crate::error::{Error, Result};
use crate::grid::{one_sided_at, GridFunction, TorusGrid};
use crate::hamiltonian::{bisect, HamiltonianModel};
use crate::potential::Potential;
use serde::Serialize;

/// Slopes sampled per sub- or superdifferential interval.
pub const CORNER_SAMPLES: usize = 33;

/// `{q : H(x, P + q) <= level}` as a hull with its connected components.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeInterval {
    pub lo: f64,
    pub hi: f64,
    pub connected: bool,
    pub components: Vec<(f64, f64)>,
}

pub fn admissible_slopes(h: &HamiltonianModel, x: f64, momentum: f64, level: f64) -> Result<SlopeInterval> {
    let mut crit = h.critical_momenta();
    if crit.is_empty() {
        return Err(Error::InvalidParameter("admissible slopes need the critical momenta of H".into()));
    }
    crit.sort_by(f64::total_cmp);
    let g = |p: f64| h.eval(x, p) - level;
    let escape = |from: f64, dir: f64| {
        let mut step = 1.0;
        let mut p = from + dir * step;
        while g(p) <= 0.0 && step < 1e12 {
            step *= 2.0;
            p = from + dir * step;
        }
        p
    };
    let mut ends = Vec::with_capacity(crit.len() + 2);
    ends.push(escape(crit[0], -1.0));
    ends.extend(crit.iter().copied());
    ends.push(escape(*crit.last().unwrap(), 1.0));

    // Sign indicator so that touching the level at a bracket end still bisects correctly.
    let inside = |p: f64| if g(p) <= 0.0 { -1.0 } else { 1.0 };
    let mut components: Vec<(f64, f64)> = Vec::new();
    for w in ends.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (in_a, in_b) = (g(a) <= 0.0, g(b) <= 0.0);
        let piece = match (in_a, in_b) {
            (true, true) => Some((a, b)),
            (true, false) => Some((a, bisect(inside, a, b))),
            (false, true) => Some((bisect(inside, a, b), b)),
            (false, false) => None,
        };
        if let Some((lo, hi)) = piece {
            match components.last_mut() {
                Some(last) if lo <= last.1 + 1e-12 => last.1 = last.1.max(hi),
                _ => components.push((lo, hi)),
            }
        }
    }
    if components.is_empty() {
        return Err(Error::EmptyInterval { x });
    }
    let shift = |c: (f64, f64)| (c.0 - momentum, c.1 - momentum);
    let components: Vec<(f64, f64)> = components.into_iter().map(shift).collect();
    Ok(SlopeInterval {
        lo: components[0].0,
        hi: components.last().unwrap().1,
        connected: components.len() == 1,
        components,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximalSubsolution {
    pub vertex: f64,
    pub s: GridFunction,
    /// Node where the shorter path switches from the rightward to the leftward branch.
    pub cut_point: f64,
}

/// `S(., y)`: the least of the two path integrals of the extreme admissible slopes.
pub fn maximal_subsolution(h: &HamiltonianModel, momentum: f64, level: f64, y: f64, grid: TorusGrid) -> Result<MaximalSubsolution> {
    let n = grid.len();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for x in grid.nodes() {
        let iv = admissible_slopes(h, x, momentum, level)?;
        if !iv.connected {
            return Err(Error::DisconnectedSublevel { x });
        }
        lo.push(iv.lo);
        hi.push(iv.hi);
    }
    let dx = grid.spacing();
    let j = grid.nearest(y);
    let mut right = vec![0.0; n + 1];
    let mut left = vec![0.0; n + 1];
    for k in 1..=n {
        let (a, b) = ((j + k - 1) % n, (j + k) % n);
        right[k] = right[k - 1] + 0.5 * dx * (hi[a] + hi[b]);
        let (a, b) = ((j + n - (k - 1)) % n, (j + n - k) % n);
        left[k] = left[k - 1] - 0.5 * dx * (lo[a] + lo[b]);
    }
    let mut values = vec![0.0; n];
    let mut cut_point = grid.node(j);
    let mut switched = false;
    for k in 1..n {
        let (r, l) = (right[k], left[n - k]);
        values[(j + k) % n] = r.min(l);
        if !switched && l < r {
            switched = true;
            cut_point = grid.node(j + k);
        }
    }
    Ok(MaximalSubsolution { vertex: grid.node(j), s: GridFunction::new(grid, values)?, cut_point })
}

/// Positive entries are violations of the sub- and supersolution tests.
#[derive(Debug, Clone, PartialEq)]
pub struct ViscosityResiduals {
    pub sub: GridFunction,
    pub sup: GridFunction,
}

impl ViscosityResiduals {
    pub fn max_sub(&self) -> f64 {
        self.sub.max()
    }

    pub fn max_sup(&self) -> f64 {
        self.sup.max()
    }

    /// Largest supersolution violation away from the listed nodes.
    pub fn max_sup_excluding(&self, nodes: &[usize]) -> f64 {
        self.sup
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| !nodes.contains(i))
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn corner_max(a: f64, b: f64, dense: bool, eval: impl Fn(f64) -> f64) -> f64 {
    if dense {
        (0..CORNER_SAMPLES)
            .map(|k| eval(a + (b - a) * k as f64 / (CORNER_SAMPLES - 1) as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        eval(a).max(eval(b))
    }
}

/// Residual tests at every node for a map `(x, q) -> H(x, q) - level`.
///
/// At a concave corner (`d- >= d+`) the subsolution test samples the whole interval
/// `[d+, d-]`; at a convex corner it checks both one-sided slopes. The supersolution
/// test mirrors this.
fn residuals_with(u: &GridFunction, excess: impl Fn(f64, f64) -> f64) -> ViscosityResiduals {
    let grid = u.grid();
    let dx = grid.spacing();
    let (mut sub, mut sup) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
    for i in 0..grid.len() {
        let x = grid.node(i);
        let (dm, dp) = one_sided_at(u.values(), i, dx);
        sub.push(corner_max(dp.min(dm), dp.max(dm), dm >= dp, |q| excess(x, q)));
        sup.push(corner_max(dm.min(dp), dm.max(dp), dm <= dp, |q| -excess(x, q)));
    }
    ViscosityResiduals {
        sub: GridFunction::new(grid, sub).expect("same grid"),
        sup: GridFunction::new(grid, sup).expect("same grid"),
    }
}

/// Sub/supersolution residuals of `H(x, P + Du) = level`.
pub fn viscosity_residuals(u: &GridFunction, h: &HamiltonianModel, momentum: f64, level: f64) -> ViscosityResiduals {
    residuals_with(u, |x, q| h.eval(x, momentum + q) - level)
}

/// Sub/supersolution residuals of `f(x, 0) + G(x, Dw) = 0`.
pub fn discount_residuals(w: &GridFunction, gd: &GeneralizedDiscount) -> ViscosityResiduals {
    residuals_with(w, |x, q| gd.f(x, 0.0) + gd.g(x, q))
}

/// Slope `-7/2` on `(y - 1/8, y)` and `1/2` on `(y, y + 7/8)`, vanishing at `y`.
pub fn explicit_w(y: f64, grid: TorusGrid) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        let t = (x - y).rem_euclid(1.0);
        if t <= 7.0 / 8.0 {
            0.5 * t
        } else {
            3.5 * (1.0 - t)
        }
    })
}

fn bump_integral(s: f64, x: f64) -> f64 {
    if x <= s {
        0.5 * x * x
    } else if x <= 2.0 * s {
        s * s - 0.5 * (2.0 * s - x) * (2.0 * s - x)
    } else {
        s * s
    }
}

fn check_bump_width(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 0.25) {
        return Err(Error::InvalidParameter(format!("bump width {s} outside (0, 1/4)")));
    }
    Ok(())
}

/// Selected limit for the flat example with a triangular bump of width `s`, and the
/// point `b` where it returns to zero.
pub fn analytic_flat_limit(s: f64, grid: TorusGrid) -> Result<(GridFunction, f64)> {
    check_bump_width(s)?;
    let peak = s + s * s;
    let b = 2.0 * s + 2.0 * peak;
    if b >= 1.0 {
        return Err(Error::DomainOverflow(format!("return point {b} is not below 1")));
    }
    let u0 = GridFunction::from_fn(grid, |x| {
        if x <= 2.0 * s {
            0.5 * x + bump_integral(s, x)
        } else if x <= b {
            peak - 0.5 * (x - 2.0 * s)
        } else {
            0.0
        }
    });
    Ok((u0, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatConstruction {
    pub v: GridFunction,
    pub a: f64,
    pub b: f64,
}

const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Five-point Gauss-Legendre on `panels` equal pieces of `[a, b]`.
fn gauss(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * w, a + (k + 1) as f64 * w);
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            GAUSS_NODES.iter().zip(&GAUSS_WEIGHTS).map(|(t, wt)| wt * f(mid + half * t)).sum::<f64>() * half
        })
        .sum()
}

/// Integral over `[a, b]` split at the kinks of the potential.
fn piecewise_integral(f: &impl Fn(f64) -> f64, a: f64, b: f64, kinks: &[f64]) -> f64 {
    let mut cuts = vec![a];
    cuts.extend(kinks.iter().copied().filter(|&k| k > a && k < b));
    cuts.push(b);
    cuts.windows(2).map(|w| gauss(f, w[0], w[1], 8)).sum()
}

/// Explicit solution of `eps v + F(|3/2 + v'|) = 1 + V` for the triangular bump of width `s`.
pub fn flat_discounted_construction(s: f64, epsilon: f64, grid: TorusGrid) -> Result<FlatConstruction> {
    check_bump_width(s)?;
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("discount must be positive".into()));
    }
    let v_pot = Potential::TriangularBump { s };
    let kinks = [s, 2.0 * s];
    let rising = |x: f64| {
        let f = |r: f64| (epsilon * (r - x)).exp() * (0.5 + v_pot.eval(r));
        piecewise_integral(&f, 0.0, x, &kinks)
    };
    let crossing = |x: f64| epsilon * rising(x) - v_pot.eval(x);
    let a = root_on(crossing, s, 2.0 * s)?;
    let va = rising(a);
    let falling = |x: f64| {
        let f = |r: f64| (epsilon * (r - x)).exp() * (-0.5 + v_pot.eval(r));
        (epsilon * (a - x)).exp() * va + piecewise_integral(&f, a, x, &kinks)
    };
    let b = root_on(falling, 2.0 * s, 1.0)?;
    let v = GridFunction::from_fn(grid, |x| {
        if x <= a {
            rising(x)
        } else if x <= b {
            falling(x)
        } else {
            0.0
        }
    });
    Ok(FlatConstruction { v, a, b })
}

fn root_on(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
    let (fl, fh) = (f(lo), f(hi));
    if !(fl.is_finite() && fh.is_finite()) || fl * fh > 0.0 {
        return Err(Error::RootNotBracketed { lo, hi });
    }
    Ok(bisect(f, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Polynomial;
    use approx::assert_abs_diff_eq;

    fn flat(s: Option<f64>) -> HamiltonianModel {
        HamiltonianModel::flat(s.map_or(Potential::Zero, |s| Potential::triangular_bump(s).unwrap()))
    }

    #[test]
    fn flat_admissible_interval() {
        let h = flat(Some(0.1));
        for &x in &[0.05, 0.1, 0.5] {
            let v = h.potential().unwrap().eval(x);
            let iv = admissible_slopes(&h, x, 1.5, 1.0).unwrap();
            assert!(iv.connected);
            assert_abs_diff_eq!(iv.lo, -3.5 - v, epsilon = 1e-11);
            assert_abs_diff_eq!(iv.hi, 0.5 + v, epsilon = 1e-11);
        }
    }

    #[test]
    fn double_well_zero_level_is_disconnected() {
        let h = HamiltonianModel::double_well(0.0, Potential::Zero);
        let iv = admissible_slopes(&h, 0.3, 0.0, 0.0).unwrap();
        assert!(!iv.connected);
        assert_eq!(iv.components.len(), 2);
        assert_abs_diff_eq!(iv.lo, -1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(iv.hi, 1.0, epsilon = 1e-7);
        assert!(matches!(admissible_slopes(&h, 0.3, 0.0, -0.1), Err(Error::EmptyInterval { .. })));
    }

    #[test]
    fn quadratic_unit_level() {
        let k = Polynomial::new(vec![0.0, 0.0, 1.0]).unwrap();
        let h = HamiltonianModel::smooth_quasi_convex(k, Potential::Zero, 0.0).unwrap();
        let iv = admissible_slopes(&h, 0.0, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(iv.lo, -1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(iv.hi, 1.0, epsilon = 1e-11);
    }

    #[test]
    fn maximal_subsolution_closed_forms() {
        let grid = TorusGrid::new(64).unwrap();
        let h = flat(None);
        let y = 0.25;
        let m = maximal_subsolution(&h, 1.5, 1.0, y, grid).unwrap();
        assert_eq!(m.s.at(16), 0.0);
        assert_abs_diff_eq!(m.s.interpolate(y + 7.0 / 8.0), 7.0 / 16.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.s.interpolate(y + 0.5), 0.25, epsilon = 1e-9);
    }

    #[test]
    fn maximal_subsolution_rejects_disconnected_levels() {
        let grid = TorusGrid::new(16).unwrap();
        let h = HamiltonianModel::double_well(0.0, Potential::Zero);
        assert!(matches!(
            maximal_subsolution(&h, 0.0, 0.5, 0.0, grid),
            Err(Error::DisconnectedSublevel { .. })
        ));
    }

    #[test]
    fn explicit_w_values() {
        let grid = TorusGrid::new(64).unwrap();
        let w = explicit_w(0.25, grid);
        assert_eq!(w.at(16), 0.0);
        assert_abs_diff_eq!(w.interpolate(0.25 + 7.0 / 8.0), 7.0 / 16.0, epsilon = 1e-12);
    }

    #[test]
    fn constants_are_subsolutions_at_high_level() {
        let grid = TorusGrid::new(32).unwrap();
        let h = HamiltonianModel::double_well(0.3, Potential::tent(0.25, 0.5).unwrap());
        let level = grid.nodes().map(|x| h.eval(x, 0.3)).fold(f64::NEG_INFINITY, f64::max);
        let r = viscosity_residuals(&GridFunction::constant(grid, 0.0), &h, 0.3, level);
        assert!(r.max_sub() <= 0.0);
    }

    #[test]
    fn analytic_limit_numbers() {
        let grid = TorusGrid::new(100).unwrap();
        let (u0, b) = analytic_flat_limit(0.1, grid).unwrap();
        assert_abs_diff_eq!(b, 0.42, epsilon = 1e-12);
        assert_abs_diff_eq!(u0.at(20), 0.11, epsilon = 1e-12);
        assert!((43..100).all(|i| u0.at(i) == 0.0));
        assert!(matches!(analytic_flat_limit(0.24, grid), Err(Error::DomainOverflow(_))));
    }

    #[test]
    fn construction_start_and_limit() {
        let grid = TorusGrid::new(1000).unwrap();
        let c = flat_discounted_construction(0.1, 1e-3, grid).unwrap();
        assert_eq!(c.v.at(0), 0.0);
        assert_abs_diff_eq!((c.v.at(1) - c.v.at(0)) / grid.spacing(), 0.5, epsilon = 2e-3);
        let c4 = flat_discounted_construction(0.1, 1e-4, grid).unwrap();
        assert!((c4.a - 0.2).abs() < (c.a - 0.2).abs());
        assert!((c4.a - 0.2).abs() < 1e-3);
    }
}
