//! Multidimensional FFT over every array axis, built from `rustfft` lanes.

use std::cell::RefCell;

use ndarray::Axis as NdAxis;
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::grid::GridFn;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized transform in place: `Σ_j u_j e^{∓2πi jk/N}` on every axis.
pub fn fft_in_place(u: &mut GridFn, direction: FftDirection) {
    for ax in 0..u.ndim() {
        let n = u.shape()[ax];
        if n <= 1 {
            continue;
        }
        let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for mut lane in u.lanes_mut(NdAxis(ax)) {
            for (b, v) in buf.iter_mut().zip(lane.iter()) {
                *b = *v;
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for (v, b) in lane.iter_mut().zip(buf.iter()) {
                *v = *b;
            }
        }
    }
}

/// `û = N^{-d} Σ u e^{−ixξ}`.
pub fn forward(u: &GridFn) -> GridFn {
    let mut a = u.clone();
    fft_in_place(&mut a, FftDirection::Forward);
    let scale = 1.0 / a.len() as f64;
    a.mapv_inplace(|v| v * scale);
    a
}

/// `u = Σ û e^{ixξ}`.
pub fn inverse(uh: &GridFn) -> GridFn {
    let mut a = uh.clone();
    fft_in_place(&mut a, FftDirection::Inverse);
    a
}

/// Coefficients in the orthonormal Fourier basis: `N^{-d/2} Σ u e^{−ixξ}`.
pub fn forward_unitary(u: &GridFn) -> GridFn {
    let mut a = u.clone();
    fft_in_place(&mut a, FftDirection::Forward);
    let scale = 1.0 / (a.len() as f64).sqrt();
    a.mapv_inplace(|v| v * scale);
    a
}

pub fn inverse_unitary(uh: &GridFn) -> GridFn {
    let mut a = uh.clone();
    fft_in_place(&mut a, FftDirection::Inverse);
    let scale = 1.0 / (a.len() as f64).sqrt();
    a.mapv_inplace(|v| v * scale);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::grid::TorusGrid;
    use approx::assert_relative_eq;

    #[test]
    fn single_mode_lands_on_its_frequency() {
        let g = TorusGrid::torus([1, 2], 8);
        let u = g.sample(2, |x| Complex64::new(0.0, 3.0 * x[0] - 2.0 * x[1]).exp());
        let uh = forward(&u);
        // frequency 3 sits at index 3, −2 at index 6
        assert_relative_eq!(uh[[3, 6]].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(uh.iter().map(|v| v.norm()).sum::<f64>(), 1.0, epsilon = 1e-12);
        let back = inverse(&uh);
        for (a, b) in back.iter().zip(u.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
