//! Conversions between the wavefunction and hydrodynamic pictures, the
//! quantum potential, and the quantum pressure.
//!
//! Writing ψ = R·e^{iS} gives the fluid fields ρ = R² and v = (ħ/m)·∂S/∂x.
//! In one dimension the zero-vorticity condition on v holds identically, so
//! the two pictures are equivalent wherever ρ > 0.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{
    cumulative_integral, derivative, derivative_into, second_derivative_into, Grid1D,
};
use crate::params::Params;
use crate::state::{HydroState, WaveState};

/// Default density floor used wherever a formula divides by ρ. Applied as an
/// additive regularization `ρ + floor` so derived fields stay smooth where ρ
/// crosses the floor.
pub const DEFAULT_RHO_FLOOR: f64 = 1e-12;

/// The two algebraic forms of the quantum pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressureVariant {
    /// Flux form `P = -(ħ²/4m)(ρ'' - ρ'²/ρ)`; its gradient equals `ρ ∂x U_q`.
    P1,
    /// Log-curvature form `P = (ħ²/4m)(ln ρ)''`. In 1D this is the flux form
    /// divided by -ρ, so the gradient identity holds for `-ρ·P2`.
    P2,
}

/// Unwrap the phase of ψ along the grid, folding jumps larger than π.
///
/// Nodes with |ψ|² below `floor` carry no reliable phase; there the value is
/// held from the previous node so the unwrap is not poisoned downstream.
pub(crate) fn unwrapped_phase(psi: &[Complex64], floor: f64) -> Vec<f64> {
    let mut s = vec![0.0; psi.len()];
    let mut prev_arg: Option<f64> = None;
    let mut acc = 0.0;
    for (i, c) in psi.iter().enumerate() {
        if c.norm_sqr() < floor {
            s[i] = acc;
            continue;
        }
        let a = c.arg();
        match prev_arg {
            None => acc = a,
            Some(p) => {
                let mut jump = a - p;
                while jump > std::f64::consts::PI {
                    jump -= 2.0 * std::f64::consts::PI;
                }
                while jump <= -std::f64::consts::PI {
                    jump += 2.0 * std::f64::consts::PI;
                }
                acc += jump;
            }
        }
        prev_arg = Some(a);
        s[i] = acc;
    }
    s
}

/// Hydrodynamic fields of a wavefunction: ρ = |ψ|², v = (ħ/m)·∂S/∂x with S
/// the unwrapped phase. Where |ψ|² is below the density floor the velocity
/// is reported as 0.
pub fn to_hydro(w: &WaveState, grid: &Grid1D, params: &Params) -> Result<HydroState> {
    grid.check_len(w.psi.len())?;
    let rho = w.density();
    let peak = rho.iter().fold(0.0, |a: f64, &b| a.max(b));
    if peak < DEFAULT_RHO_FLOOR {
        return Err(Error::DegenerateState(
            "|psi|^2 is below the density floor on every node".into(),
        ));
    }
    let s = unwrapped_phase(&w.psi, DEFAULT_RHO_FLOOR);
    let mut v = derivative(&s, grid)?;
    let scale = params.hbar / params.mass;
    for (vi, ri) in v.iter_mut().zip(&rho) {
        if *ri < DEFAULT_RHO_FLOOR {
            *vi = 0.0;
        } else {
            *vi *= scale;
        }
    }
    HydroState::new(w.t, rho, v)
}

/// Wavefunction of a hydrodynamic state: ψ = √ρ·e^{iS} with
/// S(x) = (m/ħ)·∫ v from x_min and the gauge fixed by S(x_min) = 0.
pub fn to_wavefn(h: &HydroState, grid: &Grid1D, params: &Params) -> Result<WaveState> {
    grid.check_len(h.rho.len())?;
    grid.check_len(h.v.len())?;
    if let Some(i) = h.rho.iter().position(|r| !(*r >= 0.0)) {
        return Err(Error::Contract(format!(
            "to_wavefn requires rho >= 0, rho[{i}] = {}",
            h.rho[i]
        )));
    }
    let mut s = cumulative_integral(&h.v, grid)?;
    let scale = params.mass / params.hbar;
    for si in &mut s {
        *si *= scale;
    }
    let psi = h
        .rho
        .iter()
        .zip(&s)
        .map(|(&r, &si)| Complex64::from_polar(r.sqrt(), si))
        .collect();
    Ok(WaveState::new(h.t, psi))
}

pub(crate) fn quantum_potential_into(
    rho: &[f64],
    grid: &Grid1D,
    params: &Params,
    floor: f64,
    sqrt_buf: &mut [f64],
    d2_buf: &mut [f64],
    out: &mut [f64],
) {
    for (w, &r) in sqrt_buf.iter_mut().zip(rho) {
        *w = (r + floor).sqrt();
    }
    second_derivative_into(sqrt_buf, grid, d2_buf);
    let c = -0.5 * params.hbar * params.hbar / params.mass;
    for i in 0..rho.len() {
        out[i] = c * d2_buf[i] / sqrt_buf[i];
    }
}

/// Quantum potential `U_q = -(ħ²/2m)·(√ρ)''/√ρ`, evaluated in the √ρ form
/// with the density floor regularizing the division.
pub fn quantum_potential(rho: &[f64], grid: &Grid1D, params: &Params) -> Result<Vec<f64>> {
    grid.check_len(rho.len())?;
    let n = rho.len();
    let mut sqrt_buf = vec![0.0; n];
    let mut d2_buf = vec![0.0; n];
    let mut out = vec![0.0; n];
    quantum_potential_into(
        rho,
        grid,
        params,
        DEFAULT_RHO_FLOOR,
        &mut sqrt_buf,
        &mut d2_buf,
        &mut out,
    );
    Ok(out)
}

/// Quantum pressure in the requested algebraic form; see [`PressureVariant`].
pub fn quantum_pressure(
    rho: &[f64],
    grid: &Grid1D,
    params: &Params,
    variant: PressureVariant,
) -> Result<Vec<f64>> {
    grid.check_len(rho.len())?;
    let n = rho.len();
    let c = 0.25 * params.hbar * params.hbar / params.mass;
    match variant {
        PressureVariant::P1 => {
            let mut d1 = vec![0.0; n];
            let mut d2 = vec![0.0; n];
            derivative_into(rho, grid, &mut d1);
            second_derivative_into(rho, grid, &mut d2);
            Ok((0..n)
                .map(|i| -c * (d2[i] - d1[i] * d1[i] / (rho[i] + DEFAULT_RHO_FLOOR)))
                .collect())
        }
        PressureVariant::P2 => {
            let log_rho: Vec<f64> = rho.iter().map(|&r| (r + DEFAULT_RHO_FLOOR).ln()).collect();
            let mut d2 = vec![0.0; n];
            second_derivative_into(&log_rho, grid, &mut d2);
            Ok(d2.iter().map(|&v| c * v).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::integrate;
    use crate::params::PotentialSpec;

    fn params_free() -> Params {
        Params::dimensionless(0.0, PotentialSpec::Free).unwrap()
    }

    fn gaussian_hydro(grid: &Grid1D, sigma_sq: f64) -> HydroState {
        let rho = grid.sample(|x| (-0.5 * x * x / sigma_sq).exp());
        let mut h = HydroState::new(0.0, rho, vec![0.0; grid.n()]).unwrap();
        h.normalize(grid).unwrap();
        h
    }

    fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
        v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
    }

    #[test]
    fn real_gaussian_has_zero_velocity() {
        let grid = Grid1D::new(-10.0, 10.0, 301).unwrap();
        let h = gaussian_hydro(&grid, 1.0);
        let w = to_wavefn(&h, &grid, &params_free()).unwrap();
        let back = to_hydro(&w, &grid, &params_free()).unwrap();
        assert!(max_abs(back.v.iter().copied()) < 1e-12);
        let dr = max_abs(back.rho.iter().zip(&h.rho).map(|(a, b)| a - b));
        assert!(dr < 1e-14);
    }

    #[test]
    fn plane_wave_phase_gradient() {
        // psi = envelope * exp(i 0.5 x): v must be 0.5 on the interior.
        let grid = Grid1D::new(-10.0, 10.0, 401).unwrap();
        let psi: Vec<Complex64> = grid
            .xs()
            .iter()
            .map(|&x| Complex64::from_polar((-0.05 * x * x).exp(), 0.5 * x))
            .collect();
        let mut w = WaveState::new(0.0, psi);
        w.normalize(&grid).unwrap();
        let h = to_hydro(&w, &grid, &params_free()).unwrap();
        for i in 1..grid.n() - 1 {
            assert!(
                (h.v[i] - 0.5).abs() < 1e-6,
                "v[{i}] = {} should be 0.5",
                h.v[i]
            );
        }
    }

    #[test]
    fn constant_velocity_gives_linear_phase() {
        let grid = Grid1D::new(-5.0, 5.0, 201).unwrap();
        let p = 0.7;
        let mut h = gaussian_hydro(&grid, 1.0);
        h.v = vec![p; grid.n()];
        let w = to_wavefn(&h, &grid, &params_free()).unwrap();
        let s = unwrapped_phase(&w.psi, 0.0);
        for (i, &x) in grid.xs().iter().enumerate() {
            let expected = p * (x - grid.x_min());
            assert!(
                (s[i] - expected).abs() < 1e-8,
                "phase at node {i}: {} vs {expected}",
                s[i]
            );
        }
    }

    // Round trip with an affine velocity field: cumulative trapezoid and the
    // central-difference gradient are both exact for polynomials of degree
    // <= 1, so the round trip is exact to rounding.
    #[test]
    fn round_trip_affine_velocity() {
        let grid = Grid1D::new(-5.0, 5.0, 401).unwrap();
        let mut h = gaussian_hydro(&grid, 2.0);
        h.v = grid.sample(|x| 0.05 * x + 0.1);
        let back = to_hydro(&to_wavefn(&h, &grid, &params_free()).unwrap(), &grid, &params_free())
            .unwrap();
        let mask = |rho: &[f64], i: usize| rho[i] > 1e-9;
        let mut dv: f64 = 0.0;
        let mut dr: f64 = 0.0;
        for i in 0..grid.n() {
            dr = dr.max((back.rho[i] - h.rho[i]).abs());
            if mask(&h.rho, i) {
                dv = dv.max((back.v[i] - h.v[i]).abs());
            }
        }
        assert!(dr < 1e-12, "density round trip error {dr}");
        assert!(dv < 1e-8, "velocity round trip error {dv}");
    }

    // Round trip with a curved velocity: the pinned operators (cumulative
    // trapezoid, then centered gradient) reproduce v through the three-point
    // average (v[i-1] + 2 v[i] + v[i+1])/4, an O(dx²/4 · v'') smoothing.
    // On [-5,5] with n=401 and v = 0.1 sin x that bound is 1.6e-5.
    #[test]
    fn round_trip_sine_velocity_within_operator_accuracy() {
        let grid = Grid1D::new(-5.0, 5.0, 401).unwrap();
        let mut h = gaussian_hydro(&grid, 2.0);
        h.v = grid.sample(|x| 0.1 * x.sin());
        let back = to_hydro(&to_wavefn(&h, &grid, &params_free()).unwrap(), &grid, &params_free())
            .unwrap();
        let dx = grid.dx();
        let bound = 0.1 * dx * dx / 4.0 + 1e-9;
        for i in 1..grid.n() - 1 {
            if h.rho[i] > 1e-9 {
                assert!(
                    (back.v[i] - h.v[i]).abs() < bound,
                    "node {i}: {} vs {}",
                    back.v[i],
                    h.v[i]
                );
            }
        }
    }

    #[test]
    fn to_hydro_preserves_norm_samples() {
        let grid = Grid1D::new(-8.0, 8.0, 257).unwrap();
        let mut w = WaveState::new(
            0.0,
            grid.xs()
                .iter()
                .map(|&x| Complex64::from_polar((-0.3 * x * x).exp(), 0.2 * x * x))
                .collect(),
        );
        w.normalize(&grid).unwrap();
        let h = to_hydro(&w, &grid, &params_free()).unwrap();
        let lhs = integrate(&h.rho, &grid).unwrap();
        let rhs = w.norm_sq(&grid).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn phase_gauge_invariance() {
        let grid = Grid1D::new(-8.0, 8.0, 257).unwrap();
        let mut w = WaveState::new(
            0.0,
            grid.xs()
                .iter()
                .map(|&x| Complex64::from_polar((-0.3 * x * x).exp(), 0.1 * x))
                .collect(),
        );
        w.normalize(&grid).unwrap();
        let alpha = Complex64::from_polar(1.0, 2.31);
        let w2 = WaveState::new(0.0, w.psi.iter().map(|c| c * alpha).collect());
        let h1 = to_hydro(&w, &grid, &params_free()).unwrap();
        let h2 = to_hydro(&w2, &grid, &params_free()).unwrap();
        let dv = max_abs(h1.v.iter().zip(&h2.v).map(|(a, b)| a - b));
        assert!(dv < 1e-10, "gauge shift changed v by {dv}");
    }

    #[test]
    fn all_zero_psi_is_degenerate() {
        let grid = Grid1D::new(-1.0, 1.0, 21).unwrap();
        let w = WaveState::new(0.0, vec![Complex64::new(0.0, 0.0); 21]);
        assert!(matches!(
            to_hydro(&w, &grid, &params_free()),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn negative_rho_rejected_by_to_wavefn() {
        let grid = Grid1D::new(-1.0, 1.0, 21).unwrap();
        let h = HydroState {
            t: 0.0,
            rho: vec![-1.0; 21],
            v: vec![0.0; 21],
        };
        assert!(to_wavefn(&h, &grid, &params_free()).is_err());
    }

    #[test]
    fn uniform_density_has_zero_quantum_potential_and_pressure() {
        let grid = Grid1D::new(-1.0, 1.0, 41).unwrap();
        let rho = vec![0.5; 41];
        let uq = quantum_potential(&rho, &grid, &params_free()).unwrap();
        assert!(max_abs(uq.iter().copied()) < 1e-12);
        for variant in [PressureVariant::P1, PressureVariant::P2] {
            let p = quantum_pressure(&rho, &grid, &params_free(), variant).unwrap();
            assert!(max_abs(p.iter().copied()) < 1e-9);
        }
    }

    // For rho ∝ exp(-x²/2), U_q = 1/4 - x²/8 analytically.
    #[test]
    fn gaussian_quantum_potential_matches_analytic() {
        let grid = Grid1D::new(-10.0, 10.0, 801).unwrap();
        let mut h = gaussian_hydro(&grid, 1.0);
        h.normalize(&grid).unwrap();
        let uq = quantum_potential(&h.rho, &grid, &params_free()).unwrap();
        let center = grid.n() / 2;
        assert!((uq[center] - 0.25).abs() < 1e-4);
        for (i, &x) in grid.xs().iter().enumerate() {
            if h.rho[i] > 1e-6 {
                let expected = 0.25 - x * x / 8.0;
                assert!(
                    (uq[i] - expected).abs() < 1e-4,
                    "U_q({x}) = {} vs {expected}",
                    uq[i]
                );
            }
        }
    }

    // Log-curvature pressure of a Gaussian with sigma² = 1 is -1/4.
    #[test]
    fn gaussian_log_pressure_is_constant() {
        let grid = Grid1D::new(-10.0, 10.0, 801).unwrap();
        let h = gaussian_hydro(&grid, 1.0);
        let p = quantum_pressure(&h.rho, &grid, &params_free(), PressureVariant::P2).unwrap();
        for (i, &x) in grid.xs().iter().enumerate() {
            if x.abs() <= 5.0 {
                assert!(
                    (p[i] + 0.25).abs() < 1e-4,
                    "P2({x}) = {} should be -0.25",
                    p[i]
                );
            }
        }
    }
}
