//! Monotone finite-difference solvers for discounted and generalized problems.
//!
//! The unknown is stored as `u = w - offset / eps` so that `w` stays of order one even
//! when `|u|` grows like `1/eps`.

use crate::cyclic::PeriodicTridiagonal;
use crate::discount::GeneralizedDiscount;
use crate::error::{Error, Result};
use crate::grid::{lipschitz_estimate, one_sided_at, GridFunction, TorusGrid};
use crate::hamiltonian::{HamiltonianModel, Side};
use crate::scheme::{node_flux, NodeFlux, Scheme};
use serde::{Deserialize, Serialize};

/// Nonlinear iteration used on each discount level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Iteration {
    /// Newton steps with a backtracking line search on the max-norm residual.
    #[default]
    Newton,
    /// Nodewise relaxation `w_i -= damping r_i / J_ii`.
    DampedFixedPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub iteration: Iteration,
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Explicit viscosity `eta`; the equation gains `-eta^2 v''`.
    pub eta: f64,
    /// Largest discount of the continuation ladder used when no warm start is given.
    pub continuation_start: f64,
    /// Slope range over which the Lax-Friedrichs dissipation is checked.
    pub p_cap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Godunov,
            iteration: Iteration::Newton,
            damping: 0.9,
            tol: 1e-10,
            max_iter: 100_000,
            eta: 0.0,
            continuation_start: 2.0,
            p_cap: 8.0,
        }
    }
}

impl SolverConfig {
    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return bad("eta must be nonnegative");
        }
        if !(self.continuation_start > 0.0) || !(self.p_cap > 0.0) {
            return bad("continuation_start and p_cap must be positive");
        }
        if let Scheme::LaxFriedrichs { sigma } = self.scheme {
            if !(sigma > 0.0) {
                return bad("sigma must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub u: GridFunction,
    pub epsilon: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lipschitz: f64,
    pub(crate) shape: Vec<f64>,
    pub(crate) offset: f64,
    pub(crate) eta: f64,
}

impl SolveResult {
    /// `u + level / eps`, computed without forming `u` first.
    pub fn normalized(&self, level: f64) -> GridFunction {
        let c = (level - self.offset) / self.epsilon;
        GridFunction::new(self.u.grid(), self.shape.iter().map(|w| w + c).collect())
            .expect("same grid")
    }

    /// `-eps u` at node `i`.
    pub fn scaled_value(&self, i: usize) -> f64 {
        self.offset - self.epsilon * self.shape[i % self.shape.len()]
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

pub(crate) struct Discretization<'a> {
    pub gd: &'a GeneralizedDiscount,
    pub grid: TorusGrid,
    pub eps: f64,
    pub eta: f64,
    pub scheme: Scheme,
    xs: Vec<f64>,
}

impl<'a> Discretization<'a> {
    pub fn new(gd: &'a GeneralizedDiscount, grid: TorusGrid, eps: f64, eta: f64, scheme: Scheme) -> Self {
        Self { gd, grid, eps, eta, scheme, xs: grid.nodes().collect() }
    }

    pub fn fluxes(&self, w: &[f64]) -> Vec<NodeFlux> {
        let h = self.grid.spacing();
        (0..w.len())
            .map(|i| {
                let (dm, dp) = one_sided_at(w, i, h);
                node_flux(self.gd, self.scheme, self.xs[i], dm, dp)
            })
            .collect()
    }

    /// Residual at every node; returns the max norm, NaN if any entry is undefined.
    pub fn residual(&self, w: &[f64], offset: f64, fluxes: &[NodeFlux], out: &mut [f64]) -> f64 {
        let n = w.len();
        let h = self.grid.spacing();
        let visc = self.eta * self.eta / (h * h);
        let mut norm: f64 = 0.0;
        for i in 0..n {
            let prev = if i == 0 { n - 1 } else { i - 1 };
            let next = if i + 1 == n { 0 } else { i + 1 };
            let r = self.gd.f(self.xs[i], self.eps * w[i] - offset) + fluxes[i].value
                - visc * (w[next] - 2.0 * w[i] + w[prev]);
            out[i] = r;
            if r.is_nan() {
                norm = f64::NAN;
            } else if !norm.is_nan() {
                norm = norm.max(r.abs());
            }
        }
        norm
    }

    /// Jacobian of the residual map. With `rate_at_zero` the discount derivative is
    /// frozen at `f_r(x, 0)`, as in the adjoint equation.
    pub fn linearize(&self, w: &[f64], offset: f64, fluxes: &[NodeFlux], rate_at_zero: bool) -> Result<PeriodicTridiagonal> {
        let n = w.len();
        let h = self.grid.spacing();
        let visc = self.eta * self.eta / (h * h);
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 0..n {
            let x = self.xs[i];
            let r = if rate_at_zero { 0.0 } else { self.eps * w[i] - offset };
            let rate = self.gd.f_r(x, r);
            if !(rate > 0.0) {
                return Err(Error::MonotonicityViolation { x, slope: rate });
            }
            let fl = &fluxes[i];
            lower[i] = -fl.d_minus_coef / h - visc;
            upper[i] = fl.d_plus_coef / h - visc;
            diag[i] = self.eps * rate + (fl.d_minus_coef - fl.d_plus_coef) / h + 2.0 * visc;
            if !(diag[i] > 0.0) {
                return Err(Error::SingularLinearization { row: i });
            }
        }
        PeriodicTridiagonal::new(lower, diag, upper)
    }

    fn check_domain(&self, w: &[f64], offset: f64) -> Result<()> {
        for (i, &wi) in w.iter().enumerate() {
            self.gd.check_domain(self.xs[i], self.eps * wi - offset)?;
        }
        Ok(())
    }
}

struct State {
    w: Vec<f64>,
    offset: f64,
    eps: f64,
    residual: f64,
    iterations: usize,
}

/// Largest `|D_p G|` over nodes and `|p| <= p_cap`; the Lax-Friedrichs dissipation must exceed it.
pub fn dissipation_bound(gd: &GeneralizedDiscount, grid: TorusGrid, p_cap: f64) -> f64 {
    const SAMPLES: usize = 201;
    let mut bound: f64 = 0.0;
    for x in grid.nodes() {
        for k in 0..SAMPLES {
            let p = -p_cap + 2.0 * p_cap * k as f64 / (SAMPLES - 1) as f64;
            bound = bound
                .max(gd.g_slope(x, p, Side::Left).abs())
                .max(gd.g_slope(x, p, Side::Right).abs());
        }
    }
    bound
}

fn check_sigma(gd: &GeneralizedDiscount, grid: TorusGrid, cfg: &SolverConfig) -> Result<()> {
    if let Scheme::LaxFriedrichs { sigma } = cfg.scheme {
        let required = dissipation_bound(gd, grid, cfg.p_cap);
        if sigma < required {
            return Err(Error::InvalidSigma { sigma, required });
        }
    }
    Ok(())
}

fn iterate(disc: &Discretization, state: &mut State, cfg: &SolverConfig) -> Result<()> {
    let n = state.w.len();
    let mut res = vec![0.0; n];
    let mut trial_res = vec![0.0; n];
    disc.check_domain(&state.w, state.offset)?;
    let mut fluxes = disc.fluxes(&state.w);
    let mut norm = disc.residual(&state.w, state.offset, &fluxes, &mut res);
    if norm.is_nan() {
        return Err(Error::NonConvergence { iterations: state.iterations, residual: norm });
    }
    let mut trial = vec![0.0; n];
    while norm > cfg.tol {
        if state.iterations >= cfg.max_iter {
            return Err(Error::NonConvergence { iterations: state.iterations, residual: norm });
        }
        state.iterations += 1;
        let jac = disc.linearize(&state.w, state.offset, &fluxes, false)?;
        let step: Vec<f64> = match cfg.iteration {
            Iteration::Newton => {
                let neg: Vec<f64> = res.iter().map(|r| -r).collect();
                jac.solve(&neg)?
            }
            Iteration::DampedFixedPoint => {
                res.iter().zip(&jac.diag).map(|(r, d)| -cfg.damping * r / d).collect()
            }
        };
        if cfg.iteration == Iteration::DampedFixedPoint {
            for (w, s) in state.w.iter_mut().zip(&step) {
                *w += s;
            }
            fluxes = disc.fluxes(&state.w);
            norm = disc.residual(&state.w, state.offset, &fluxes, &mut res);
            if norm.is_nan() {
                disc.check_domain(&state.w, state.offset)?;
                return Err(Error::NonConvergence { iterations: state.iterations, residual: norm });
            }
            continue;
        }
        let mut t = 1.0;
        loop {
            for i in 0..n {
                trial[i] = state.w[i] + t * step[i];
            }
            let trial_fluxes = disc.fluxes(&trial);
            let trial_norm = disc.residual(&trial, state.offset, &trial_fluxes, &mut trial_res);
            let accept = trial_norm < norm || (t < 1e-10 && trial_norm.is_finite());
            if accept {
                std::mem::swap(&mut state.w, &mut trial);
                std::mem::swap(&mut res, &mut trial_res);
                fluxes = trial_fluxes;
                norm = trial_norm;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                disc.check_domain(&trial, state.offset)?;
                return Err(Error::NonConvergence { iterations: state.iterations, residual: norm });
            }
        }
    }
    state.residual = norm;
    Ok(())
}

/// Move a converged state to a smaller discount, keeping `-eps u` at node 0 fixed.
fn rescale(state: &mut State, eps: f64) {
    let anchor = state.offset - state.eps * state.w[0];
    let shift = (state.offset - anchor) / state.eps;
    for w in state.w.iter_mut() {
        *w -= shift;
    }
    state.offset = anchor;
    state.eps = eps;
}

fn ladder_between(from: f64, to: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut e = from;
    while e > to * (1.0 + 1e-12) {
        out.push(e);
        e *= 0.5;
    }
    out.push(to);
    out
}

/// Offset for which the constant function solves the equation at node 0.
fn initial_offset(gd: &GeneralizedDiscount) -> Result<f64> {
    let target = -gd.g(0.0, 0.0);
    // Undefined values of f are treated as lying above the root: the only domain
    // restriction among the built-in pairs is an upper bound on r.
    let phi = |r: f64| {
        let v = gd.f(0.0, r) - target;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let mut k = 0;
    while phi(lo) > 0.0 {
        lo *= 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::RootNotBracketed { lo, hi });
        }
    }
    while phi(hi) < 0.0 {
        hi *= 2.0;
        k += 1;
        if k > 400 {
            return Err(Error::RootNotBracketed { lo, hi });
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if phi(m) > 0.0 {
            hi = m;
        } else {
            lo = m;
        }
    }
    Ok(-0.5 * (lo + hi))
}

fn finish(state: State, grid: TorusGrid, eta: f64) -> SolveResult {
    let u = GridFunction::new(grid, state.w.iter().map(|w| w - state.offset / state.eps).collect())
        .expect("same grid");
    let lipschitz = lipschitz_estimate(&GridFunction::new(grid, state.w.clone()).expect("same grid"));
    SolveResult {
        u,
        epsilon: state.eps,
        residual: state.residual,
        iterations: state.iterations,
        converged: true,
        lipschitz,
        shape: state.w,
        offset: state.offset,
        eta,
    }
}

fn run_ladder(gd: &GeneralizedDiscount, grid: TorusGrid, cfg: &SolverConfig, mut state: State, ladder: &[f64]) -> Result<State> {
    for &e in ladder {
        if e != state.eps {
            rescale(&mut state, e);
        }
        let disc = Discretization::new(gd, grid, e, cfg.eta, cfg.scheme);
        iterate(&disc, &mut state, cfg)?;
    }
    Ok(state)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("discount must be positive, got {eps}")));
    }
    Ok(())
}

/// Solves `f(x, eps v) + G(x, Dv) - eta^2 v'' = 0`, reaching `eps` by halving from
/// `cfg.continuation_start`.
pub fn solve_generalized(gd: &GeneralizedDiscount, epsilon: f64, grid: TorusGrid, cfg: &SolverConfig) -> Result<SolveResult> {
    check_eps(epsilon)?;
    cfg.validate()?;
    check_sigma(gd, grid, cfg)?;
    let start = cfg.continuation_start.max(epsilon);
    let state = State { w: vec![0.0; grid.len()], offset: initial_offset(gd)?, eps: start, residual: f64::NAN, iterations: 0 };
    let state = run_ladder(gd, grid, cfg, state, &ladder_between(start, epsilon))?;
    Ok(finish(state, grid, cfg.eta))
}

/// Continues a previous solution (possibly of another pair on the same grid) to `epsilon`.
pub fn solve_generalized_from(
    gd: &GeneralizedDiscount,
    epsilon: f64,
    grid: TorusGrid,
    cfg: &SolverConfig,
    previous: &SolveResult,
) -> Result<SolveResult> {
    check_eps(epsilon)?;
    cfg.validate()?;
    check_sigma(gd, grid, cfg)?;
    if previous.u.grid() != grid {
        return Err(Error::InvalidParameter("warm start lives on another grid".into()));
    }
    let state = State {
        w: previous.shape.clone(),
        offset: previous.offset,
        eps: previous.epsilon,
        residual: f64::NAN,
        iterations: 0,
    };
    let ladder = if previous.epsilon > epsilon { ladder_between(previous.epsilon, epsilon) } else { vec![epsilon] };
    let state = run_ladder(gd, grid, cfg, state, &ladder)?;
    Ok(finish(state, grid, cfg.eta))
}

/// Newton at `epsilon` started from a given guess for `v`.
pub fn solve_generalized_with_guess(
    gd: &GeneralizedDiscount,
    epsilon: f64,
    grid: TorusGrid,
    cfg: &SolverConfig,
    guess: &GridFunction,
) -> Result<SolveResult> {
    check_eps(epsilon)?;
    cfg.validate()?;
    check_sigma(gd, grid, cfg)?;
    let anchor = -epsilon * guess.at(0);
    let state = State {
        w: guess.values().iter().map(|v| v + anchor / epsilon).collect(),
        offset: anchor,
        eps: epsilon,
        residual: f64::NAN,
        iterations: 0,
    };
    let state = run_ladder(gd, grid, cfg, state, &[epsilon])?;
    Ok(finish(state, grid, cfg.eta))
}

/// Solves `eps u + H(x, P + Du) - eta^2 u'' = 0`.
pub fn solve_discounted(h: &HamiltonianModel, epsilon: f64, grid: TorusGrid, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_generalized(&GeneralizedDiscount::from_hamiltonian(h, 0.0), epsilon, grid, cfg)
}

/// Solves along a decreasing sequence of discounts, warm-starting each from the last.
pub fn solve_discounted_ladder(h: &HamiltonianModel, eps_seq: &[f64], grid: TorusGrid, cfg: &SolverConfig) -> Result<Vec<SolveResult>> {
    solve_generalized_ladder(&GeneralizedDiscount::from_hamiltonian(h, 0.0), eps_seq, grid, cfg)
}

pub fn solve_generalized_ladder(gd: &GeneralizedDiscount, eps_seq: &[f64], grid: TorusGrid, cfg: &SolverConfig) -> Result<Vec<SolveResult>> {
    check_decreasing(eps_seq)?;
    let mut out: Vec<SolveResult> = Vec::with_capacity(eps_seq.len());
    for &e in eps_seq {
        let next = match out.last() {
            None => solve_generalized(gd, e, grid, cfg)?,
            Some(prev) => solve_generalized_from(gd, e, grid, cfg, prev)?,
        };
        out.push(next);
    }
    Ok(out)
}

pub(crate) fn check_decreasing(eps_seq: &[f64]) -> Result<()> {
    if eps_seq.is_empty() || eps_seq.windows(2).any(|w| !(w[1] < w[0])) || eps_seq.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidParameter("discount sequence must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// `eps u_i + H^(x_i, d-, d+) - eta^2 (D^2 u)_i` at every node.
pub fn residual_field(u: &GridFunction, h: &HamiltonianModel, epsilon: f64, cfg: &SolverConfig) -> GridFunction {
    generalized_residual_field(u, &GeneralizedDiscount::from_hamiltonian(h, 0.0), epsilon, cfg)
}

/// `f(x_i, eps v_i) + G^(x_i, d-, d+) - eta^2 (D^2 v)_i` at every node.
pub fn generalized_residual_field(v: &GridFunction, gd: &GeneralizedDiscount, epsilon: f64, cfg: &SolverConfig) -> GridFunction {
    let disc = Discretization::new(gd, v.grid(), epsilon, cfg.eta, cfg.scheme);
    let w = v.values();
    let fluxes = disc.fluxes(w);
    let mut out = vec![0.0; w.len()];
    disc.residual(w, 0.0, &fluxes, &mut out);
    GridFunction::new(v.grid(), out).expect("same grid")
}
