//! Time integration of the 1D dissipative fluid system
//!
//! ```text
//!   ∂ρ/∂t = -∂(ρv)/∂x
//! m ∂v/∂t = -∂/∂x [ m v²/2 + U_q(ρ) + U ] - k v
//! ```
//!
//! by a modified leapfrog: the velocity is kicked a half step, the density
//! drifts a full step with the half-step velocity (midpoint flux), the
//! velocity kick is completed, and the friction is applied as an exact
//! exponential integrating factor `e^{-k·dt/(2m)}` around the conservative
//! update. The factor makes `v = 0` states exact fixed points of the damping
//! and keeps friction unconditionally stable at any `k`.
//!
//! Boundaries follow the asymptotic conditions: the velocity at the two edge
//! nodes is linearly extrapolated from the adjacent interior values, and the
//! density there evolves by one-sided flux differences.

use crate::error::{Error, Result};
use crate::grid::{derivative_into, integrate_unchecked, Grid1D};
use crate::madelung::{quantum_potential_into, DEFAULT_RHO_FLOOR};
use crate::params::Params;
use crate::state::{HydroState, DEFAULT_TOL_NORM};

/// Damping force evaluated per node; implementations must dissipate, i.e.
/// satisfy `∫ρ v f(v) dx ≤ 0` on every state the solver visits (checked by
/// `stability::dissipation_check`).
pub trait DampingForce {
    /// Force (not acceleration) produced at a node moving with velocity `v`.
    fn force(&self, v: f64) -> f64;

    /// Linear coefficient for the exact integrating factor, if the force is
    /// exactly `-k v`. The solver uses the exponential factor in that case.
    fn linear_coefficient(&self) -> Option<f64>;
}

/// Built-in damping laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingSpec {
    /// Newtonian friction `F = -k v`.
    LinearInV { k: f64 },
}

impl DampingForce for DampingSpec {
    fn force(&self, v: f64) -> f64 {
        match self {
            DampingSpec::LinearInV { k } => -k * v,
        }
    }

    fn linear_coefficient(&self) -> Option<f64> {
        match self {
            DampingSpec::LinearInV { k } => Some(*k),
        }
    }
}

/// Boundary treatment for the velocity field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// `v[0] = 2 v[1] - v[2]` and mirrored at the right edge.
    ExtrapolateVelocity,
}

/// Time-stepping configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub rho_floor: f64,
    /// Renormalize the density only when `|∫ρ - 1|` exceeds this.
    pub tol_norm: f64,
    pub boundary: BoundaryRule,
    pub damping: DampingSpec,
}

impl SolverConfig {
    pub fn new(dt: f64, damping: DampingSpec) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::Contract(format!("dt must be positive, got {dt}")));
        }
        Ok(SolverConfig {
            dt,
            rho_floor: DEFAULT_RHO_FLOOR,
            tol_norm: DEFAULT_TOL_NORM,
            boundary: BoundaryRule::ExtrapolateVelocity,
            damping: DampingSpec::LinearInV { k: 0.0 },
        }
        .with_damping(damping))
    }

    fn with_damping(mut self, damping: DampingSpec) -> Self {
        self.damping = damping;
        self
    }
}

/// Advisory step bound `0.1·dx²·m/ħ`, reduced by `1/(1 + (k/m)·t_ref)` with
/// `t_ref = 1` in the dimensionless units, to keep headroom under strong
/// damping. The quantum-potential stiffness scales like a free Schrödinger
/// operator, hence the dx² law.
pub fn stable_dt(grid: &Grid1D, params: &Params) -> f64 {
    let dx = grid.dx();
    let base = 0.1 * dx * dx * params.mass / params.hbar;
    base / (1.0 + params.damping / params.mass)
}

/// Ordered snapshots of a run plus bookkeeping the drivers put in manifests.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<HydroState>,
    pub steps: u64,
    /// Number of steps on which the density was renormalized.
    pub renormalizations: u64,
    /// Total node-steps on which the density was clamped at the floor.
    pub clamped_nodes: u64,
}

/// Scratch buffers for the stepping kernel; reused across steps by `run`.
struct Stepper {
    grid: Grid1D,
    params: Params,
    cfg: SolverConfig,
    u: Vec<f64>,
    half_damp: f64,
    sqrt_buf: Vec<f64>,
    d2_buf: Vec<f64>,
    uq: Vec<f64>,
    bracket: Vec<f64>,
    accel: Vec<f64>,
    v_half: Vec<f64>,
    flux: Vec<f64>,
    dflux: Vec<f64>,
    rho_mid: Vec<f64>,
    clamped: u64,
    renormalized: u64,
}

impl Stepper {
    fn new(grid: &Grid1D, params: &Params, cfg: &SolverConfig) -> Result<Self> {
        if !(cfg.dt > 0.0) {
            return Err(Error::Contract(format!(
                "dt must be positive, got {}",
                cfg.dt
            )));
        }
        let u = params.potential.values(grid)?;
        let n = grid.n();
        let k = match cfg.damping {
            DampingSpec::LinearInV { k } => {
                if !(k >= 0.0) {
                    return Err(Error::Contract(format!(
                        "damping coefficient must be nonnegative, got {k}"
                    )));
                }
                k
            }
        };
        let half_damp = (-0.5 * k * cfg.dt / params.mass).exp();
        Ok(Stepper {
            grid: *grid,
            params: params.clone(),
            cfg: cfg.clone(),
            u,
            half_damp,
            sqrt_buf: vec![0.0; n],
            d2_buf: vec![0.0; n],
            uq: vec![0.0; n],
            bracket: vec![0.0; n],
            accel: vec![0.0; n],
            v_half: vec![0.0; n],
            flux: vec![0.0; n],
            dflux: vec![0.0; n],
            rho_mid: vec![0.0; n],
            clamped: 0,
            renormalized: 0,
        })
    }

    /// accel = -d/dx [ v²/2 + (U_q(rho) + U)/m ]
    fn accel_into(&mut self, rho: &[f64], v: &[f64]) {
        quantum_potential_into(
            rho,
            &self.grid,
            &self.params,
            self.cfg.rho_floor,
            &mut self.sqrt_buf,
            &mut self.d2_buf,
            &mut self.uq,
        );
        let inv_m = 1.0 / self.params.mass;
        for i in 0..rho.len() {
            self.bracket[i] = 0.5 * v[i] * v[i] + (self.uq[i] + self.u[i]) * inv_m;
        }
        derivative_into(&self.bracket, &self.grid, &mut self.accel);
        for a in &mut self.accel {
            *a = -*a;
        }
    }

    fn extrapolate_boundary(v: &mut [f64]) {
        let n = v.len();
        v[0] = 2.0 * v[1] - v[2];
        v[n - 1] = 2.0 * v[n - 2] - v[n - 3];
    }

    /// One full step; `rho` and `v` are updated in place, `t` advanced by dt.
    fn advance(&mut self, rho: &mut Vec<f64>, v: &mut Vec<f64>, t: &mut f64) -> Result<()> {
        let dt = self.cfg.dt;
        let n = rho.len();

        // half friction
        for vi in v.iter_mut() {
            *vi *= self.half_damp;
        }

        // half kick
        self.accel_into(rho, v);
        for i in 0..n {
            self.v_half[i] = v[i] + 0.5 * dt * self.accel[i];
        }
        Self::extrapolate_boundary(&mut self.v_half);

        // full drift with midpoint flux
        for i in 0..n {
            self.flux[i] = rho[i] * self.v_half[i];
        }
        derivative_into(&self.flux, &self.grid, &mut self.dflux);
        for i in 0..n {
            self.rho_mid[i] = rho[i] - 0.5 * dt * self.dflux[i];
        }
        for i in 0..n {
            self.flux[i] = self.rho_mid[i] * self.v_half[i];
        }
        derivative_into(&self.flux, &self.grid, &mut self.dflux);
        for i in 0..n {
            rho[i] -= dt * self.dflux[i];
        }

        // clamp negatives at the floor, renormalize only above the drift tolerance
        for r in rho.iter_mut() {
            if *r < self.cfg.rho_floor {
                *r = self.cfg.rho_floor;
                self.clamped += 1;
            }
        }
        let mass = integrate_unchecked(rho, &self.grid);
        if (mass - 1.0).abs() > self.cfg.tol_norm {
            let inv = 1.0 / mass;
            for r in rho.iter_mut() {
                *r *= inv;
            }
            self.renormalized += 1;
        }

        // completing kick at the new density
        self.accel_into(rho, &self.v_half);
        for i in 0..n {
            v[i] = self.v_half[i] + 0.5 * dt * self.accel[i];
        }
        Self::extrapolate_boundary(v);

        // half friction
        for vi in v.iter_mut() {
            *vi *= self.half_damp;
        }

        *t += dt;

        for i in 0..n {
            if !rho[i].is_finite() || !v[i].is_finite() {
                return Err(Error::Diverged { node: i, t: *t });
            }
        }
        Ok(())
    }
}

/// One time step. The input state is not modified.
pub fn step(h: &HydroState, grid: &Grid1D, params: &Params, cfg: &SolverConfig) -> Result<HydroState> {
    grid.check_len(h.rho.len())?;
    grid.check_len(h.v.len())?;
    if let Some(i) = h.rho.iter().position(|r| !(*r >= 0.0)) {
        return Err(Error::Contract(format!(
            "step requires rho >= 0, rho[{i}] = {}",
            h.rho[i]
        )));
    }
    let mut stepper = Stepper::new(grid, params, cfg)?;
    let mut rho = h.rho.clone();
    let mut v = h.v.clone();
    let mut t = h.t;
    stepper.advance(&mut rho, &mut v, &mut t)?;
    Ok(HydroState { t, rho, v })
}

/// Repeated stepping with snapshots at the requested cadence (nearest step);
/// the final state is always included.
pub fn run(
    initial: &HydroState,
    grid: &Grid1D,
    params: &Params,
    cfg: &SolverConfig,
    t_end: f64,
    snapshot_every: f64,
) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Contract(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if !(snapshot_every > 0.0) {
        return Err(Error::Contract(format!(
            "snapshot_every must be positive, got {snapshot_every}"
        )));
    }
    grid.check_len(initial.rho.len())?;
    grid.check_len(initial.v.len())?;

    let dt = cfg.dt;
    let n_steps = (t_end / dt).round().max(1.0) as u64;
    let mut stepper = Stepper::new(grid, params, cfg)?;

    let mut rho = initial.rho.clone();
    let mut v = initial.v.clone();
    let t0 = initial.t;
    let mut t = t0;

    let snapshot_step = |j: u64| -> u64 { ((j as f64) * snapshot_every / dt).round() as u64 };

    let mut snapshots = Vec::new();
    snapshots.push(HydroState {
        t,
        rho: rho.clone(),
        v: v.clone(),
    });
    let mut next_target = 1u64;

    for s in 1..=n_steps {
        stepper.advance(&mut rho, &mut v, &mut t)?;
        // keep t exactly reproducible as a multiple of dt
        t = t0 + s as f64 * dt;
        while snapshot_step(next_target) < s {
            next_target += 1;
        }
        if snapshot_step(next_target) == s {
            snapshots.push(HydroState {
                t,
                rho: rho.clone(),
                v: v.clone(),
            });
            next_target += 1;
        }
    }
    if snapshots.last().map(|h| h.t) != Some(t) {
        snapshots.push(HydroState { t, rho, v });
    }
    Ok(Trajectory {
        snapshots,
        steps: n_steps,
        renormalizations: stepper.renormalized,
        clamped_nodes: stepper.clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PotentialSpec;
    use crate::stationary::oscillator_eigenstate;

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn stable_dt_formula() {
        let grid = Grid1D::new(0.0, 1.0, 11).unwrap(); // dx = 0.1
        let params = Params::dimensionless(0.0, PotentialSpec::Free).unwrap();
        assert!((stable_dt(&grid, &params) - 0.001).abs() < 1e-15);
        // halving dx quarters the bound
        let fine = Grid1D::new(0.0, 1.0, 21).unwrap();
        assert!((stable_dt(&fine, &params) - 0.00025).abs() < 1e-15);
        // damping reduces it
        let damped = Params::dimensionless(1.0, PotentialSpec::Free).unwrap();
        assert!((stable_dt(&grid, &damped) - 0.0005).abs() < 1e-15);
    }

    #[test]
    fn stationary_state_is_a_fixed_point_for_one_step() {
        let grid = Grid1D::new(-20.0, 20.0, 801).unwrap();
        for k in [0.0, 1.0] {
            let params =
                Params::dimensionless(k, PotentialSpec::Harmonic { stiffness: 0.02 }).unwrap();
            let st = oscillator_eigenstate(0, &grid, &params).unwrap();
            let h0 = st.at_rest(0.0);
            let cfg = SolverConfig::new(0.01, DampingSpec::LinearInV { k }).unwrap();
            let h1 = step(&h0, &grid, &params, &cfg).unwrap();
            let drho = max_abs_diff(&h1.rho, &h0.rho);
            assert!(drho < 1e-6, "k={k}: one-step density change {drho}");
        }
    }

    #[test]
    fn uniform_free_flow_decays_exponentially() {
        let grid = Grid1D::new(-20.0, 20.0, 201).unwrap();
        let params = Params::dimensionless(1.0, PotentialSpec::Free).unwrap();
        let n = grid.n();
        let rho = vec![1.0 / 40.0; n];
        let v = vec![1.0; n];
        let h0 = HydroState::new(0.0, rho, v).unwrap();
        let cfg = SolverConfig::new(1e-3, DampingSpec::LinearInV { k: 1.0 }).unwrap();
        let traj = run(&h0, &grid, &params, &cfg, 2.0, 0.5).unwrap();
        for snap in &traj.snapshots {
            let expected = (-snap.t).exp();
            let dv = snap
                .v
                .iter()
                .map(|&vi| (vi - expected).abs())
                .fold(0.0, f64::max);
            assert!(dv < 1e-4, "t={}: velocity error {dv}", snap.t);
        }
    }

    #[test]
    fn snapshot_cadence_counting() {
        let grid = Grid1D::new(-20.0, 20.0, 101).unwrap();
        let params = Params::dimensionless(1.0, PotentialSpec::Free).unwrap();
        let n = grid.n();
        let h0 = HydroState::new(0.0, vec![1.0 / 40.0; n], vec![0.0; n]).unwrap();
        let cfg = SolverConfig::new(0.05, DampingSpec::LinearInV { k: 1.0 }).unwrap();
        let traj = run(&h0, &grid, &params, &cfg, 100.0, 5.0).unwrap();
        assert_eq!(traj.snapshots.len(), 21);
        assert_eq!(traj.snapshots[0].t, 0.0);
        assert!((traj.snapshots[20].t - 100.0).abs() < 1e-9);
    }

    #[test]
    fn divergence_reports_node_and_time() {
        let grid = Grid1D::new(-20.0, 20.0, 801).unwrap();
        let params = Params::dimensionless(0.0, PotentialSpec::Harmonic { stiffness: 0.02 }).unwrap();
        let st = oscillator_eigenstate(0, &grid, &params).unwrap();
        let h0 = st.at_rest(0.0);
        // dt far above the advisory bound: the leapfrog CFL limit is violated
        let cfg = SolverConfig::new(0.1, DampingSpec::LinearInV { k: 0.0 }).unwrap();
        let r = run(&h0, &grid, &params, &cfg, 50.0, 10.0);
        assert!(matches!(r, Err(Error::Diverged { .. })), "{r:?}");
    }

    #[test]
    fn probability_is_conserved_on_a_short_oscillator_run() {
        let grid = Grid1D::new(-20.0, 20.0, 401).unwrap();
        let params = Params::dimensionless(0.0, PotentialSpec::Harmonic { stiffness: 0.02 }).unwrap();
        let a = 0.05;
        let mut h0 = HydroState::new(
            0.0,
            grid.sample(|x| (-a * (x + 2.0) * (x + 2.0)).exp()),
            vec![0.0; grid.n()],
        )
        .unwrap();
        h0.normalize(&grid).unwrap();
        let cfg = SolverConfig::new(stable_dt(&grid, &params), DampingSpec::LinearInV { k: 0.0 })
            .unwrap();
        let traj = run(&h0, &grid, &params, &cfg, 5.0, 1.0).unwrap();
        for snap in &traj.snapshots {
            let m = integrate_unchecked(&snap.rho, &grid);
            assert!((m - 1.0).abs() < 1e-4, "t={}: mass {m}", snap.t);
        }
    }
}
