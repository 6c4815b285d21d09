//! Effective Hamiltonians, vanishing-discount limits and double-well case analysis.

use crate::adjoint::DiscreteMeasure;
use crate::discount::GeneralizedDiscount;
use crate::error::{Error, Result};
use crate::grid::{one_sided_at, GridFunction, TorusGrid};
use crate::hamiltonian::{HamiltonianModel, Polynomial};
use crate::potential::{oscillation, Potential};
use crate::solver::{check_decreasing, solve_discounted_ladder, SolveResult, SolverConfig};
use crate::subsolution::discount_residuals;
use rayon::prelude::*;
use serde::Serialize;

/// Tolerance under which consecutive ladder gaps count as equal.
const GAP_SLACK: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicEstimate {
    pub hbar: f64,
    /// `(eps, -eps u(x0))` for each discount.
    pub eps_ladder: Vec<(f64, f64)>,
    pub extrapolation_gap: f64,
    pub anchor: usize,
}

/// Richardson extrapolation of `-eps u(x0)` over the last two discounts of a ladder.
pub fn estimate_from_ladder(results: &[SolveResult], anchor: usize) -> Result<ErgodicEstimate> {
    if results.len() < 3 {
        return Err(Error::InvalidParameter("ergodic estimate needs at least three discounts".into()));
    }
    let ladder: Vec<(f64, f64)> = results.iter().map(|r| (r.epsilon, r.scaled_value(anchor))).collect();
    let k = ladder.len();
    let (e1, y1) = ladder[k - 2];
    let (e2, y2) = ladder[k - 1];
    let hbar = (e1 * y2 - e2 * y1) / (e1 - e2);
    let gaps: Vec<f64> = ladder.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let last = gaps[gaps.len() - 1];
    if last > gaps[gaps.len() - 2] + GAP_SLACK {
        return Err(Error::NonConvergence { iterations: k, residual: last });
    }
    Ok(ErgodicEstimate { hbar, eps_ladder: ladder, extrapolation_gap: last, anchor })
}

pub fn estimate_ergodic_constant(h: &HamiltonianModel, grid: TorusGrid, eps_seq: &[f64], cfg: &SolverConfig) -> Result<ErgodicEstimate> {
    estimate_ergodic_constant_at(h, grid, eps_seq, cfg, 0)
}

pub fn estimate_ergodic_constant_at(
    h: &HamiltonianModel,
    grid: TorusGrid,
    eps_seq: &[f64],
    cfg: &SolverConfig,
    anchor: usize,
) -> Result<ErgodicEstimate> {
    if eps_seq.len() < 3 {
        return Err(Error::InvalidParameter("ergodic estimate needs at least three discounts".into()));
    }
    let results = solve_discounted_ladder(h, eps_seq, grid, cfg)?;
    estimate_from_ladder(&results, anchor)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub momentum: f64,
    pub hbar: Option<f64>,
    pub extrapolation_gap: Option<f64>,
    pub error: Option<String>,
}

/// Effective Hamiltonian along a momentum grid; failures are recorded per point.
pub fn sweep_effective_hamiltonian<F>(
    family: F,
    momenta: &[f64],
    grid: TorusGrid,
    eps_seq: &[f64],
    cfg: &SolverConfig,
) -> Vec<SweepPoint>
where
    F: Fn(f64) -> HamiltonianModel + Sync,
{
    momenta
        .par_iter()
        .map(|&p| match estimate_ergodic_constant(&family(p), grid, eps_seq, cfg) {
            Ok(est) => SweepPoint {
                momentum: p,
                hbar: Some(est.hbar),
                extrapolation_gap: Some(est.extrapolation_gap),
                error: None,
            },
            Err(e) => SweepPoint { momentum: p, hbar: None, extrapolation_gap: None, error: Some(e.to_string()) },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitStudy {
    pub eps_seq: Vec<f64>,
    pub hbar: f64,
    /// `u^eps + hbar / eps` for each discount.
    pub v_eps: Vec<GridFunction>,
    /// `|v^eps_k - v^eps_{k+1}|` in max norm.
    pub cauchy_gaps: Vec<f64>,
    pub u0: GridFunction,
    pub solutions: Vec<SolveResult>,
}

/// Normalized solutions along the ladder; fails if the last gap grows.
pub fn vanishing_discount_limit(
    h: &HamiltonianModel,
    hbar: f64,
    grid: TorusGrid,
    eps_seq: &[f64],
    cfg: &SolverConfig,
) -> Result<LimitStudy> {
    check_decreasing(eps_seq)?;
    let solutions = solve_discounted_ladder(h, eps_seq, grid, cfg)?;
    let v_eps: Vec<GridFunction> = solutions.iter().map(|s| s.normalized(hbar)).collect();
    let cauchy_gaps: Vec<f64> = v_eps.windows(2).map(|w| w[0].max_abs_diff(&w[1])).collect();
    if cauchy_gaps.len() >= 2 {
        let k = cauchy_gaps.len();
        if cauchy_gaps[k - 1] > cauchy_gaps[k - 2] + GAP_SLACK {
            return Err(Error::NonConvergence { iterations: eps_seq.len(), residual: cauchy_gaps[k - 1] });
        }
    }
    Ok(LimitStudy {
        eps_seq: eps_seq.to_vec(),
        hbar,
        u0: v_eps.last().expect("nonempty ladder").clone(),
        v_eps,
        cauchy_gaps,
        solutions,
    })
}

/// Gaps decrease strictly over the final `steps` entries.
pub fn gaps_decreasing(gaps: &[f64], steps: usize) -> bool {
    if gaps.len() < steps {
        return false;
    }
    gaps[gaps.len() - steps..].windows(2).all(|w| w[1] < w[0] || w[0] <= GAP_SLACK)
}

/// Pair `f(r) = -exp(-lambda0 r)`, `G = exp(lambda0 H)`; the caller normalizes `H`.
pub fn exp_transform(h: &HamiltonianModel, lambda0: f64) -> Result<GeneralizedDiscount> {
    GeneralizedDiscount::exponential(h, lambda0, 0.0)
}

/// Smallest `lambda0 = 2^k`, `k >= 0`, such that `lambda0 H_p^2 + H_pp >= 0` on sampled
/// nodes and slopes `|p| <= p_cap` (convexity of `exp(lambda0 H)`).
pub fn default_lambda0(h: &HamiltonianModel, grid: TorusGrid, p_cap: f64) -> Result<f64> {
    const SAMPLES: usize = 161;
    let stride = (grid.len() / 64).max(1);
    let xs: Vec<f64> = grid.nodes().step_by(stride).collect();
    let momentum = h.momentum();
    'search: for k in 0..=20 {
        let lambda = f64::powi(2.0, k);
        for &x in &xs {
            for j in 0..SAMPLES {
                let q = -p_cap + 2.0 * p_cap * j as f64 / (SAMPLES - 1) as f64;
                let p = momentum + q;
                let hp = h.slope(x, p, crate::hamiltonian::Side::Right);
                if lambda * hp * hp + h.curvature(x, p) < -1e-8 {
                    continue 'search;
                }
            }
        }
        return Ok(lambda);
    }
    Err(Error::InvalidParameter("no power of two up to 2^20 makes exp(lambda0 H) convex".into()))
}

/// Branches of `(|P + p|^2 - 1)^2 - V = hbar` for the double well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WellCase {
    /// `|P| < 1`, `hbar > 0`: slopes stay inside the unit ball.
    Inner,
    /// `|P| > 1`, `hbar > 0`: slopes stay outside.
    Outer,
    /// `hbar = 0`.
    Degenerate,
}

impl WellCase {
    pub fn tag(&self) -> &'static str {
        match self {
            WellCase::Inner => "a",
            WellCase::Outer => "b",
            WellCase::Degenerate => "c",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "a" => Some(WellCase::Inner),
            "b" => Some(WellCase::Outer),
            "c" => Some(WellCase::Degenerate),
            _ => None,
        }
    }
}

/// Case of `(P, hbar)`; `hbar` counts as zero when `|hbar| <= 10 gap`.
pub fn classify_case(momentum: f64, hbar: f64, gap: f64) -> Option<WellCase> {
    if hbar.abs() <= 10.0 * gap {
        Some(WellCase::Degenerate)
    } else if hbar > 0.0 && momentum.abs() < 1.0 {
        Some(WellCase::Inner)
    } else if hbar > 0.0 && momentum.abs() > 1.0 {
        Some(WellCase::Outer)
    } else {
        None
    }
}

/// Magnitude below which `hbar` is accepted as zero by the degenerate-case check.
pub const DEGENERATE_HBAR_TOL: f64 = 1e-6;

fn check_case(momentum: f64, hbar: f64, case: WellCase) -> Result<()> {
    let ok = match case {
        WellCase::Inner => momentum.abs() < 1.0 && hbar > 0.0,
        WellCase::Outer => momentum.abs() > 1.0 && hbar > 0.0,
        WellCase::Degenerate => hbar.abs() <= DEGENERATE_HBAR_TOL,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::CaseMismatch { p: momentum })
    }
}

/// Worst margin of the case's gradient inclusion over nodes and one-sided slopes;
/// a nonnegative margin means the inclusion holds.
pub fn gradient_inclusion_check(u: &GridFunction, momentum: f64, hbar: f64, case: WellCase) -> Result<f64> {
    check_case(momentum, hbar, case)?;
    let dx = u.grid().spacing();
    let sign = if momentum < 0.0 { -1.0 } else { 1.0 };
    let margin_of = |q: f64| match case {
        WellCase::Inner => 1.0 - q.abs(),
        WellCase::Outer => sign * q - 1.0,
        WellCase::Degenerate => sign * q,
    };
    Ok((0..u.grid().len())
        .map(|i| {
            let (dm, dp) = one_sided_at(u.values(), i, dx);
            margin_of(momentum + dm).min(margin_of(momentum + dp))
        })
        .fold(f64::INFINITY, f64::min))
}

/// Rewrite of the double well in the inner or outer case as
/// `-sqrt(V + hbar - eps v) +- (1 - |P + v'|^2) = 0` for the normalized `v`.
pub fn double_well_case_transform(momentum: f64, hbar: f64, potential: &Potential, case: WellCase) -> Result<GeneralizedDiscount> {
    check_case(momentum, hbar, case)?;
    match case {
        WellCase::Inner => Ok(GeneralizedDiscount::double_well_branch(momentum, hbar, potential.clone(), true)),
        WellCase::Outer => Ok(GeneralizedDiscount::double_well_branch(momentum, hbar, potential.clone(), false)),
        WellCase::Degenerate => Err(Error::CaseMismatch { p: momentum }),
    }
}

/// Kinetic profile data for the multiwell convergence criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiwellSpec {
    pub critical_points: Vec<f64>,
    pub critical_values: Vec<f64>,
    /// Smallest height difference between consecutive critical values.
    pub depth: f64,
}

impl MultiwellSpec {
    pub fn from_profile(profile: &Polynomial) -> Result<Self> {
        let h = HamiltonianModel::multiwell(profile.clone(), Potential::Zero, 0.0)?;
        let critical_points = h.critical_momenta();
        let critical_values = critical_points.iter().map(|&p| profile.eval(p)).collect();
        Self::with_points(critical_points, critical_values)
    }

    /// Spec from the values at `p_1 < ... < p_{2L+1}` alone.
    pub fn from_critical_values(values: Vec<f64>) -> Result<Self> {
        let points = (0..values.len()).map(|i| i as f64).collect();
        Self::with_points(points, values)
    }

    fn with_points(critical_points: Vec<f64>, critical_values: Vec<f64>) -> Result<Self> {
        if critical_values.len() < 3 || critical_values.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("a multiwell profile has an odd number (>= 3) of critical points".into()));
        }
        let depth = critical_values.windows(2).map(|w| (w[0] - w[1]).abs()).fold(f64::INFINITY, f64::min);
        Ok(Self { critical_points, critical_values, depth })
    }
}

/// `osc(V) < depth`, together with the depth.
pub fn multiwell_admissible(spec: &MultiwellSpec, potential: &Potential) -> (bool, f64) {
    (oscillation(potential) < spec.depth, spec.depth)
}

/// Checks `sum_atoms f_r(x, 0) w(x) <= tol` for each measure, after confirming that `w`
/// is a subsolution of `f(x, 0) + G(x, Dw) = 0` within `tol`.
pub fn selection_constraint_check(w: &GridFunction, measures: &[DiscreteMeasure], gd: &GeneralizedDiscount, tol: f64) -> Result<bool> {
    let excess = discount_residuals(w, gd).max_sub();
    if excess > tol {
        return Err(Error::NotASubsolution { excess });
    }
    Ok(measures.iter().all(|mu| mu.pair_weighted(gd, w) <= tol))
}
