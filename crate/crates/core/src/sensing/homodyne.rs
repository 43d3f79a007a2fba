use nalgebra::DMatrix;
use num_complex::Complex;

use crate::numerics::{hermite_phys, log_factorial};
use crate::scalar::{cis, Real};

/// Quadrature densities of `|m1⟩⟨m2|` at angle `θ`, one row per grid point:
/// `e^{i(m1−m2)θ} e^{−x²} H_{m1}(x) H_{m2}(x) / √(π 2^{m1+m2} m1! m2!)`.
pub fn homodyne_row<T: Real>(theta: T, grid: &[T], m_c: usize) -> DMatrix<Complex<T>> {
    let k = m_c + 1;
    let half_log_pi = T::lit(0.5 * std::f64::consts::PI.ln());
    let ln2 = T::lit(std::f64::consts::LN_2);
    // log of 1/√(2^m m!) per index
    let norm: Vec<T> =
        (0..k).map(|m| -(T::of_usize(m) * ln2 + log_factorial::<T>(m as u64)) * T::lit(0.5)).collect();
    DMatrix::from_fn(grid.len(), k * k, |r, c| {
        let (m1, m2) = (c / k, c % k);
        let x = grid[r];
        let h = hermite_phys(m1 as u32, x) * hermite_phys(m2 as u32, x);
        let mag = (norm[m1] + norm[m2] - half_log_pi - x * x).exp() * h;
        cis(T::lit(m1 as f64 - m2 as f64) * theta) * mag
    })
}
