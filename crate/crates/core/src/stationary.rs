//! Stationary solutions `(ρ_s, v_s = 0, E_s)` satisfying `U_q(ρ_s) + U = E_s`.
//!
//! The condition is equivalent to the linear eigenproblem
//! `-(ħ²/2m) R'' + U R = E R` for `R = √ρ_s`, so stationary states are built
//! from eigenpairs: analytically (Hermite functions) for the harmonic well,
//! numerically (Sturm bisection plus inverse iteration on the three-point
//! discretization) for general potentials.

use crate::error::{Error, Result};
use crate::grid::{integrate, integrate_unchecked, Grid1D};
use crate::madelung::quantum_potential;
use crate::params::{Params, PotentialSpec};
use crate::state::StationaryState;

/// Stationary densities must fall below this value at the grid edges;
/// otherwise the grid is too narrow to hold the state.
pub const BOUNDARY_DECAY_THRESHOLD: f64 = 1e-10;

/// Nodes with `ρ_s` below this mask are excluded from residual checks; the
/// stationary condition involves a division by ρ that is meaningless in the
/// floored tail.
pub const RESIDUAL_MASK: f64 = 1e-6;

/// Normalized Hermite-function value h_n(ξ)·exp(-ξ²/2)/π^{1/4}-style, via the
/// stable three-term recurrence for the orthonormal oscillator functions.
fn hermite_function(n: usize, xi: f64) -> f64 {
    let h0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if n == 0 {
        return h0;
    }
    let mut prev = h0;
    let mut cur = std::f64::consts::SQRT_2 * xi * h0;
    for k in 1..n {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * xi * cur
            - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `n`-th eigenstate of the harmonic oscillator, sampled on the grid and
/// renormalized there. `E_s = ħω(n + 1/2)` with `ω = √(d/m)`.
///
/// Excited states (`n ≥ 1`) have interior density nodes where the velocity
/// field of the fluid picture is undefined; [`density_node_indices`] lists
/// them so callers can flag the state.
pub fn oscillator_eigenstate(n: usize, grid: &Grid1D, params: &Params) -> Result<StationaryState> {
    let omega = params.oscillator_frequency().ok_or_else(|| {
        Error::Contract("oscillator_eigenstate requires a harmonic potential".into())
    })?;
    let scale = (params.mass * omega / params.hbar).sqrt();
    let mut rho: Vec<f64> = grid
        .xs()
        .iter()
        .map(|&x| {
            let phi = hermite_function(n, scale * x);
            scale * phi * phi
        })
        .collect();
    let mass = integrate(&rho, grid)?;
    if !(mass > 0.0) {
        return Err(Error::SolverFailure(
            "oscillator eigenstate vanished on the grid".into(),
        ));
    }
    for r in &mut rho {
        *r /= mass;
    }
    let edge = rho[0].max(rho[grid.n() - 1]);
    if edge > BOUNDARY_DECAY_THRESHOLD {
        return Err(Error::BoundaryDecay(format!(
            "rho_s at the grid edge is {edge:.3e} (threshold {BOUNDARY_DECAY_THRESHOLD:.1e}); widen the grid"
        )));
    }
    let e_s = params.hbar * omega * (n as f64 + 0.5);
    StationaryState::new(rho, e_s)
}

/// Interior nodes where the stationary density effectively vanishes
/// (ρ_s below `threshold` relative to its peak).
pub fn density_node_indices(state: &StationaryState, threshold: f64) -> Vec<usize> {
    let peak = state.rho_s.iter().fold(0.0, |a: f64, &b| a.max(b));
    let cut = peak * threshold;
    let n = state.rho_s.len();
    (1..n - 1)
        .filter(|&i| {
            state.rho_s[i] <= cut
                && state.rho_s[i] < state.rho_s[i - 1]
                && state.rho_s[i] <= state.rho_s[i + 1]
        })
        .collect()
}

/// Residual of the stationary condition, `U_q(ρ_s) + U - E_s`, masked to
/// nodes with `ρ_s > mask` (NaN elsewhere would be meaningless: the floored
/// tail has no stationary condition to satisfy). Returns (residual, mask hit
/// count).
pub fn stationary_residual(
    state: &StationaryState,
    grid: &Grid1D,
    params: &Params,
    mask: f64,
) -> Result<(Vec<f64>, usize)> {
    let u = params.potential.values(grid)?;
    let uq = quantum_potential(&state.rho_s, grid, params)?;
    let mut out = vec![0.0; grid.n()];
    let mut count = 0;
    for i in 0..grid.n() {
        if state.rho_s[i] > mask {
            out[i] = uq[i] + u[i] - state.e_s;
            count += 1;
        }
    }
    Ok((out, count))
}

/// Max-norm of the masked stationary residual.
pub fn stationary_residual_max(
    state: &StationaryState,
    grid: &Grid1D,
    params: &Params,
) -> Result<f64> {
    let (res, _) = stationary_residual(state, grid, params, RESIDUAL_MASK)?;
    Ok(res.iter().fold(0.0, |a: f64, &b| a.max(b.abs())))
}

// --- symmetric tridiagonal eigensolver -----------------------------------

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below
/// `x` (Sturm sequence count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = 1e-300;
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q.abs() < tiny {
            if q < 0.0 {
                -tiny
            } else {
                tiny
            }
        } else {
            q
        };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th smallest eigenvalue (0-indexed) by bisection on the Sturm count.
fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let n = diag.len();
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 }
            + if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    let tol = 1e-14 * scale;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo || mid == hi {
            break; // bisection exhausted floating-point resolution
        }
    }
    0.5 * (lo + hi)
}

fn safe_pivot(p: f64) -> f64 {
    if p.abs() >= 1e-300 {
        p
    } else if p == 0.0 {
        1e-300
    } else {
        1e-300_f64.copysign(p)
    }
}

/// Solve (T - shift·I) w = rhs for a symmetric tridiagonal T by LU with
/// partial pivoting (the shift sits next to an eigenvalue, so the unpivoted
/// Thomas recursion is not safe here). Row swaps create one extra
/// superdiagonal of fill-in.
fn shifted_tridiag_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d: Vec<f64> = diag.iter().map(|&v| v - shift).collect();
    let mut du: Vec<f64> = off.to_vec(); // superdiagonal, len n-1
    let mut dl: Vec<f64> = off.to_vec(); // subdiagonal, len n-1
    let mut du2 = vec![0.0; n.saturating_sub(2)]; // fill-in, len n-2
    let mut b = rhs.to_vec();

    for i in 0..n - 1 {
        if dl[i].abs() <= d[i].abs() {
            let m = dl[i] / safe_pivot(d[i]);
            d[i + 1] -= m * du[i];
            b[i + 1] -= m * b[i];
        } else {
            // swap rows i and i+1, then eliminate
            let m = d[i] / dl[i];
            d[i] = dl[i];
            let t = d[i + 1];
            d[i + 1] = du[i] - m * t;
            if i + 1 < n - 1 {
                du2[i] = du[i + 1];
                du[i + 1] = -m * du2[i];
            }
            du[i] = t;
            b.swap(i, i + 1);
            b[i + 1] -= m * b[i];
        }
    }

    let mut w = vec![0.0; n];
    w[n - 1] = b[n - 1] / safe_pivot(d[n - 1]);
    if n >= 2 {
        w[n - 2] = (b[n - 2] - du[n - 2] * w[n - 1]) / safe_pivot(d[n - 2]);
    }
    for i in (0..n.saturating_sub(2)).rev() {
        w[i] = (b[i] - du[i] * w[i + 1] - du2[i] * w[i + 2]) / safe_pivot(d[i]);
    }
    w
}

fn normalize_l2(w: &mut [f64]) {
    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in w.iter_mut() {
            *x /= norm;
        }
    }
}

/// Rayleigh quotient wᵀTw / wᵀw for the symmetric tridiagonal T.
fn rayleigh_quotient(diag: &[f64], off: &[f64], w: &[f64]) -> f64 {
    let n = diag.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        let mut tw = diag[i] * w[i];
        if i > 0 {
            tw += off[i - 1] * w[i - 1];
        }
        if i < n - 1 {
            tw += off[i] * w[i + 1];
        }
        num += w[i] * tw;
        den += w[i] * w[i];
    }
    num / den
}

fn residual_norm(diag: &[f64], off: &[f64], lambda: f64, w: &[f64]) -> f64 {
    let n = diag.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut tw = (diag[i] - lambda) * w[i];
        if i > 0 {
            tw += off[i - 1] * w[i - 1];
        }
        if i < n - 1 {
            tw += off[i] * w[i + 1];
        }
        worst = worst.max(tw.abs());
    }
    worst
}

/// Eigenpair of the three-point discretization of `-(ħ²/2m) d²/dx² + U`
/// nearest the guess, returned as a normalized stationary state.
///
/// The eigenvector must decay at the grid edges (normalizability proxy per
/// [`BOUNDARY_DECAY_THRESHOLD`]); a free particle in a finite box fails that
/// check and reports `EigenNotFound`.
pub fn solve_stationary(
    potential: &PotentialSpec,
    e_guess: f64,
    grid: &Grid1D,
    params: &Params,
) -> Result<StationaryState> {
    let u = potential.values(grid)?;
    let n = grid.n();
    let dx = grid.dx();
    let kin = params.hbar * params.hbar / (2.0 * params.mass * dx * dx);
    let diag: Vec<f64> = u.iter().map(|&ui| 2.0 * kin + ui).collect();
    let off = vec![-kin; n - 1];

    // Eigenvalue nearest the guess: bracket with the Sturm count.
    let below = sturm_count(&diag, &off, e_guess);
    let mut candidates = Vec::new();
    if below > 0 {
        candidates.push((below - 1, kth_eigenvalue(&diag, &off, below - 1)));
    }
    if below < n {
        candidates.push((below, kth_eigenvalue(&diag, &off, below)));
    }
    let (index, mut lambda) = candidates
        .into_iter()
        .min_by(|a, b| {
            (a.1 - e_guess)
                .abs()
                .partial_cmp(&(b.1 - e_guess).abs())
                .unwrap()
        })
        .ok_or_else(|| Error::EigenNotFound {
            guess: e_guess,
            reason: "empty spectrum window".into(),
        })?;

    // Inverse iteration at the bisected eigenvalue.
    let mut w: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.3 * ((i % 7) as f64 - 3.0) / 7.0)
        .collect();
    normalize_l2(&mut w);
    let scale = diag.iter().fold(0.0, |a: f64, &b| a.max(b.abs()));
    let mut converged = false;
    for _ in 0..8 {
        let mut next = shifted_tridiag_solve(&diag, &off, lambda, &w);
        normalize_l2(&mut next);
        w = next;
        lambda = rayleigh_quotient(&diag, &off, &w);
        if residual_norm(&diag, &off, lambda, &w) < 1e-11 * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SolverFailure(format!(
            "inverse iteration did not converge near E = {e_guess}"
        )));
    }

    // Ground branch: enforce a sign-definite eigenvector.
    if index == 0 {
        if w.iter().sum::<f64>() < 0.0 {
            for x in &mut w {
                *x = -*x;
            }
        }
        let peak = w.iter().fold(0.0, |a: f64, &b| a.max(b.abs()));
        let most_negative = w.iter().fold(0.0, |a: f64, &b| a.min(b));
        if most_negative < -1e-8 * peak {
            return Err(Error::SolverFailure(format!(
                "ground-branch eigenvector changes sign (min {most_negative:.3e} vs peak {peak:.3e})"
            )));
        }
        for x in &mut w {
            *x = x.max(0.0);
        }
    }

    let mut rho: Vec<f64> = w.iter().map(|&x| x * x).collect();
    let mass = integrate_unchecked(&rho, grid);
    if !(mass > 0.0) {
        return Err(Error::SolverFailure("eigenvector has zero mass".into()));
    }
    for r in &mut rho {
        *r /= mass;
    }
    let edge = rho[0].max(rho[n - 1]);
    if edge > BOUNDARY_DECAY_THRESHOLD {
        return Err(Error::EigenNotFound {
            guess: e_guess,
            reason: format!(
                "eigenstate does not decay at the boundary (edge density {edge:.3e}); \
                 no normalizable stationary state near the guess"
            ),
        });
    }
    StationaryState::new(rho, lambda)
}
