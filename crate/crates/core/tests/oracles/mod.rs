//! Independent reference computations: fixed-step RK4 integration of the
//! Schrödinger equation, sharing nothing with the eigendecomposition path.

#![allow(dead_code)]

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64 as C64;

pub type M9 = SMatrix<C64, 9, 9>;
pub type V9 = SVector<C64, 9>;

fn deriv(h: &M9, psi: &V9) -> V9 {
    (h * psi) * C64::new(0.0, -1.0)
}

fn rk4_step(h: &M9, psi: &V9, dt: f64) -> V9 {
    let k1 = deriv(h, psi);
    let k2 = deriv(h, &(psi + k1 * C64::new(dt / 2.0, 0.0)));
    let k3 = deriv(h, &(psi + k2 * C64::new(dt / 2.0, 0.0)));
    let k4 = deriv(h, &(psi + k3 * C64::new(dt, 0.0)));
    psi + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0)
}

/// Propagator of `i dψ/dt = Hψ` over `t`, column by column, with steps of at most `dt`.
pub fn rk4_propagator(h: &M9, t: f64, dt: f64) -> M9 {
    let n = (t / dt).ceil().max(1.0) as usize;
    let step = t / n as f64;
    let mut u = M9::identity();
    for col in 0..9 {
        let mut psi = V9::zeros();
        psi[col] = C64::new(1.0, 0.0);
        for _ in 0..n {
            psi = rk4_step(h, &psi, step);
        }
        u.set_column(col, &psi);
    }
    u
}

/// Number of Rydberg-excited atoms in basis state `i = 3·control + target`.
pub fn rydberg_count(i: usize) -> f64 {
    ((i / 3 == 2) as u8 + (i % 3 == 2) as u8) as f64
}

/// ∫⟨n_ryd⟩ dt through a sequence of constant Hamiltonians, RK4 for the
/// state and the trapezoid rule for the integral, step `dt`.
pub fn rk4_exposure(pulses: &[(M9, f64)], initial: &V9, dt: f64) -> f64 {
    let pop = |psi: &V9| (0..9).map(|i| rydberg_count(i) * psi[i].norm_sqr()).sum::<f64>();
    let mut psi = *initial;
    let mut total = 0.0;
    for (h, t) in pulses {
        let n = (t / dt).ceil().max(1.0) as usize;
        let step = t / n as f64;
        let mut prev = pop(&psi);
        for _ in 0..n {
            psi = rk4_step(h, &psi, step);
            let now = pop(&psi);
            total += 0.5 * (prev + now) * step;
            prev = now;
        }
    }
    total
}

pub fn max_abs(m: &M9) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
