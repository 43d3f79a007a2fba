//! Special functions and Fock-space matrix elements.
//!
//! Every factorial and power product is assembled as a log-magnitude plus a
//! phase and exponentiated once, so counts of several hundred excitations do
//! not overflow.

use num_complex::Complex;

use crate::scalar::{argument, cis, modulus, Real};

/// Below this displacement magnitude the matrix elements use their `β → 0`
/// limit.
pub const ZERO_DISPLACEMENT: f64 = 1e-12;

/// Lower index above which [`assoc_laguerre`] switches from the explicit sum
/// to the three-term recurrence.
pub const LAGUERRE_SUM_MAX_DEGREE: u32 = 30;

/// `ln(n!)`.
pub fn log_factorial<T: Real>(n: u64) -> T {
    T::lit(log_factorial_f64(n))
}

fn log_factorial_f64(n: u64) -> f64 {
    if n < 20 {
        // n! is exact (or within one ulp) in f64 for n < 20.
        let mut f = 1.0f64;
        for k in 2..=n {
            f *= k as f64;
        }
        return f.ln();
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Stirling series through the 1/n^11 term.
    let series = inv
        * (1.0 / 12.0
            - inv2
                * (1.0 / 360.0
                    - inv2
                        * (1.0 / 1260.0
                            - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0 - inv2 * 691.0 / 360360.0)))));
    x * x.ln() - x + 0.5 * (std::f64::consts::TAU * x).ln() + series
}

/// `ln |C(top, j)|` and the sign of the generalized binomial coefficient for
/// integer (possibly negative) `top`. Returns `None` when the coefficient is
/// zero.
fn log_binomial(top: i64, j: u64) -> Option<(f64, f64)> {
    if top >= 0 {
        let top = top as u64;
        if j > top {
            return None;
        }
        let v = log_factorial_f64(top) - log_factorial_f64(j) - log_factorial_f64(top - j);
        Some((v, 1.0))
    } else {
        // C(-a, j) = (-1)^j C(a + j - 1, j)
        let a = (-top) as u64;
        let t = a + j - 1;
        let v = log_factorial_f64(t) - log_factorial_f64(j) - log_factorial_f64(t - j);
        Some((v, if j % 2 == 0 { 1.0 } else { -1.0 }))
    }
}

/// Associated Laguerre polynomial `L_m^k(x)`; `k` may be negative.
///
/// Uses the explicit finite sum `Σ_i C(m+k, m−i) (−x)^i / i!` (log-domain
/// terms, tracked signs) up to degree [`LAGUERRE_SUM_MAX_DEGREE`], and the
/// upward recurrence in `m` beyond it. The alternating sum cancels badly once
/// `x` is comparable to `m`; when its largest term exceeds the result by more
/// than [`LAGUERRE_MAX_CANCELLATION`] the recurrence is used instead.
pub fn assoc_laguerre<T: Real>(m: u32, k: i64, x: T) -> T {
    if m == 0 {
        return T::one();
    }
    if m <= LAGUERRE_SUM_MAX_DEGREE {
        let (v, biggest) = laguerre_sum_terms(m, k, x);
        if biggest <= LAGUERRE_MAX_CANCELLATION * v.abs().to_f64() {
            return v;
        }
    }
    laguerre_recurrence(m, k, x)
}

/// Largest tolerated ratio of the biggest summand to the sum.
pub const LAGUERRE_MAX_CANCELLATION: f64 = 1e3;

#[cfg(test)]
pub(crate) fn laguerre_sum<T: Real>(m: u32, k: i64, x: T) -> T {
    laguerre_sum_terms(m, k, x).0
}

/// Finite sum together with the magnitude of its largest term.
fn laguerre_sum_terms<T: Real>(m: u32, k: i64, x: T) -> (T, f64) {
    let top = m as i64 + k;
    let xf = x.to_f64();
    if xf == 0.0 {
        return match log_binomial(top, m as u64) {
            Some((l, s)) => (T::lit(s * l.exp()), l.exp()),
            None => (T::zero(), 0.0),
        };
    }
    let ln_x = xf.abs().ln();
    let x_neg = xf < 0.0;
    let mut acc = T::zero();
    let mut biggest = 0.0f64;
    for i in 0..=m as u64 {
        let Some((lb, sb)) = log_binomial(top, m as u64 - i) else {
            continue;
        };
        let log_mag = lb + i as f64 * ln_x - log_factorial_f64(i);
        // (−x)^i: sign flips for odd i when x > 0.
        let odd = i % 2 == 1;
        let sign_x = if odd != x_neg { -1.0 } else { 1.0 };
        let t = log_mag.exp();
        biggest = biggest.max(t);
        acc += T::lit(sb * sign_x * t);
    }
    (acc, biggest)
}

pub(crate) fn laguerre_recurrence<T: Real>(m: u32, k: i64, x: T) -> T {
    let kk = T::lit(k as f64);
    let mut prev = T::one();
    let mut cur = T::one() + kk - x;
    for j in 1..m {
        let jj = T::lit(j as f64);
        let next = ((T::lit(2.0) * jj + T::one() + kk - x) * cur - (jj + kk) * prev) / (jj + T::one());
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial `H_m(x)`.
pub fn hermite_phys<T: Real>(m: u32, x: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if m == 0 {
        return prev;
    }
    let mut cur = two * x;
    for j in 1..m {
        let next = two * x * cur - two * T::lit(j as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Displacement operator matrix element `⟨n|D(γ)|m⟩`.
pub fn displacement_element<T: Real>(n: usize, m: usize, gamma: Complex<T>) -> Complex<T> {
    let r = modulus(gamma);
    if r.to_f64() < ZERO_DISPLACEMENT {
        return if n == m { Complex::new(T::one(), T::zero()) } else { Complex::new(T::zero(), T::zero()) };
    }
    let x = r * r;
    let (lo, hi) = if n >= m { (m, n) } else { (n, m) };
    let lag = assoc_laguerre(lo as u32, (hi - lo) as i64, x);
    if lag == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let log_mag = T::lit(0.5) * (log_factorial::<T>(lo as u64) - log_factorial::<T>(hi as u64))
        + T::of_usize(hi - lo) * r.ln()
        - x * T::lit(0.5)
        + lag.abs().ln();
    let sign = if lag < T::zero() { -T::one() } else { T::one() };
    // n ≥ m: γ^{n−m};  n < m: (−γ*)^{m−n}
    let phase = if n >= m {
        T::of_usize(hi - lo) * argument(gamma)
    } else {
        T::of_usize(hi - lo) * argument(-gamma.conj())
    };
    cis(phase) * (sign * log_mag.exp())
}

/// Phase `exp(i Im(β* α))` picked up when `D(−β)` acts on a state displaced by
/// `α`: `D(−β) D(α) = exp(i Im(β* α)) D(α − β)`.
#[inline]
pub fn composition_phase<T: Real>(beta: Complex<T>, alpha: Complex<T>) -> Complex<T> {
    cis((beta.conj() * alpha).im)
}

/// Amplitude `⟨n|D(−β)|α, m⟩` with `|α, m⟩ = D(α)|m⟩`.
pub fn displaced_amplitude<T: Real>(n: usize, beta: Complex<T>, alpha: Complex<T>, m: usize) -> Complex<T> {
    composition_phase(beta, alpha) * displacement_element(n, m, alpha - beta)
}

/// Sensing-matrix entry for the Fock basis element `|m1⟩⟨m2|`:
/// `tr[D(β)|n⟩⟨n|D(−β) |m1⟩⟨m2|] = ⟨n|D(−β)|m1⟩ ⟨n|D(−β)|m2⟩*`.
///
/// Equivalent to the Laguerre-product form
/// `e^{−|β|²} |β|^{2n}/n! · √(m1! m2!) / ((−β)^{m1} (−β*)^{m2}) · L_{m1}^{n−m1} L_{m2}^{n−m2}`
/// but without the removable singularity at `β = 0`.
pub fn qn_fock_element<T: Real>(n: usize, beta: Complex<T>, m1: usize, m2: usize) -> Complex<T> {
    if modulus(beta).to_f64() < ZERO_DISPLACEMENT {
        let v = if n == m1 && n == m2 { T::one() } else { T::zero() };
        return Complex::new(v, T::zero());
    }
    let a = displacement_element(n, m1, -beta);
    let b = displacement_element(n, m2, -beta);
    a * b.conj()
}

/// `Q_n^β(|α_i⟩⟨α_j|)`, including the phase `θ(β, α_i, α_j)` and the damping
/// `e^{−(d_i−d_j)²/2} e^{−d_i d_j}`.
pub fn qn_coherent_element<T: Real>(
    n: usize,
    beta: Complex<T>,
    alpha_i: Complex<T>,
    alpha_j: Complex<T>,
) -> Complex<T> {
    let gi = alpha_i - beta;
    let gj = alpha_j - beta;
    let di = modulus(gi);
    let dj = modulus(gj);
    let half = T::lit(0.5);
    let theta_phase = composition_phase(beta, alpha_i) * composition_phase(beta, alpha_j).conj();
    let damping = -(di * di + dj * dj) * half;
    if n == 0 {
        return theta_phase * damping.exp();
    }
    if di.to_f64() == 0.0 || dj.to_f64() == 0.0 {
        return Complex::new(T::zero(), T::zero());
    }
    let nn = T::of_usize(n);
    let log_mag = nn * (di.ln() + dj.ln()) - log_factorial::<T>(n as u64) + damping;
    let phase = nn * (argument(gi) - argument(gj));
    theta_phase * cis(phase) * log_mag.exp()
}

/// Partial derivatives of [`displaced_amplitude`] with respect to `Re β` and
/// `Im β`, given the neighbouring elements `⟨n±1|D(γ)|m⟩`.
///
/// Uses `∂_{Re γ} D = (a† − a + i Im γ) D` and `∂_{Im γ} D = i(a† + a − Re γ) D`.
pub fn amplitude_gradient<T: Real>(
    n: usize,
    beta: Complex<T>,
    alpha: Complex<T>,
    d_prev: Complex<T>,
    d_here: Complex<T>,
    d_next: Complex<T>,
) -> (Complex<T>, Complex<T>) {
    let gamma = alpha - beta;
    let i = Complex::new(T::zero(), T::one());
    let sn = T::of_usize(n).sqrt();
    let sn1 = T::of_usize(n + 1).sqrt();
    let d_re_gamma = d_prev * sn - d_next * sn1 + i * d_here * gamma.im;
    let d_im_gamma = i * (d_prev * sn + d_next * sn1) - i * d_here * gamma.re;
    let phase = composition_phase(beta, alpha);
    // ∂/∂Re β of exp(i Im(β* α)) = i Im α; ∂/∂Im β = −i Re α.
    let d_phase_re = i * alpha.im;
    let d_phase_im = -(i * alpha.re);
    // γ = α − β flips the sign of the γ-derivatives.
    let d_re = phase * (d_phase_re * d_here - d_re_gamma);
    let d_im = phase * (d_phase_im * d_here - d_im_gamma);
    (d_re, d_im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type C = Complex<f64>;

    #[test]
    fn log_factorial_small() {
        assert_eq!(log_factorial::<f64>(0), 0.0);
        assert_eq!(log_factorial::<f64>(1), 0.0);
        assert_relative_eq!(log_factorial::<f64>(10), 15.104412573075516, max_relative = 1e-14);
    }

    #[test]
    fn log_factorial_matches_summation_across_branch() {
        for n in [19u64, 20, 21, 50, 171, 1000, 100_000] {
            let mut s = 0.0f64;
            let mut comp = 0.0f64;
            for k in 2..=n {
                let y = (k as f64).ln() - comp;
                let t = s + y;
                comp = (t - s) - y;
                s = t;
            }
            assert_relative_eq!(log_factorial::<f64>(n), s, max_relative = 1e-13);
        }
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(assoc_laguerre(0, 7, 3.3f64), 1.0);
        assert_eq!(assoc_laguerre(0, -4, 0.1f64), 1.0);
        assert_relative_eq!(assoc_laguerre(1, 2, 3.0f64), 0.0, epsilon = 1e-14);
        assert_relative_eq!(assoc_laguerre(2, 1, 1.0f64), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn laguerre_sum_and_recurrence_overlap() {
        // well-conditioned region of the sum: x small against m
        for m in 25..=35u32 {
            for &k in &[-3i64, 0, 4, 40] {
                for &x in &[0.3f64, 2.0] {
                    let a = laguerre_sum(m, k, x);
                    let b = laguerre_recurrence(m, k, x);
                    let scale = a.abs().max(1.0);
                    assert!((a - b).abs() / scale < 1e-8, "m={m} k={k} x={x}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn laguerre_large_argument() {
        // 40-digit references; the raw finite sum loses every digit here.
        let cases = [
            (25u32, -3i64, 9.5f64, -3.004091477752577490834662850219425471514),
            (30, -3, 30.0, -308852.0651561244330523413750470232953719),
            (20, -3, 60.0, -1798524144396.733739502425924363120294124),
        ];
        for (m, k, x, want) in cases {
            assert_relative_eq!(assoc_laguerre(m, k, x), want, max_relative = 1e-10);
        }
    }

    #[test]
    fn laguerre_negative_upper_index_identity() {
        // L_m^{-k}(x) = (-x)^k (m-k)!/m! L_{m-k}^{k}(x) for k ≤ m
        for m in 1..8u32 {
            for k in 1..=m {
                let x = 1.7f64;
                let lhs = assoc_laguerre(m, -(k as i64), x);
                let ratio = (log_factorial::<f64>((m - k) as u64) - log_factorial::<f64>(m as u64)).exp();
                let rhs = (-x).powi(k as i32) * ratio * assoc_laguerre(m - k, k as i64, x);
                assert_relative_eq!(lhs, rhs, epsilon = 1e-12, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_phys(0, 0.7f64), 1.0);
        assert_eq!(hermite_phys(1, 2.0f64), 4.0);
        assert_eq!(hermite_phys(3, 1.0f64), -4.0);
        assert_eq!(hermite_phys(4, 0.0f64), 12.0);
    }

    #[test]
    fn fock_element_at_zero_displacement() {
        let z = C::new(0.0, 0.0);
        assert_eq!(qn_fock_element(3, z, 3, 3), C::new(1.0, 0.0));
        assert_eq!(qn_fock_element(3, z, 2, 3), C::new(0.0, 0.0));
        assert_eq!(qn_fock_element(2, C::new(1e-14, 0.0), 2, 2), C::new(1.0, 0.0));
    }

    #[test]
    fn vacuum_column_is_poisson() {
        let beta = C::new(1.3, -0.4);
        let mu = beta.norm_sqr();
        for n in 0..30 {
            let expect = (-mu + n as f64 * mu.ln() - log_factorial::<f64>(n as u64)).exp();
            let got = qn_fock_element(n, beta, 0, 0);
            assert_relative_eq!(got.re, expect, max_relative = 1e-12);
            assert!(got.im.abs() < 1e-15);
        }
    }

    #[test]
    fn fock_element_matches_laguerre_product_form() {
        // Direct transcription of the Laguerre-product expression (β ≠ 0).
        let beta = C::new(0.8, 1.1);
        let x = beta.norm_sqr();
        for n in 0..12usize {
            for m1 in 0..5usize {
                for m2 in 0..5usize {
                    let pref = (-x + n as f64 * x.ln() - log_factorial::<f64>(n as u64)).exp()
                        * (0.5 * (log_factorial::<f64>(m1 as u64) + log_factorial::<f64>(m2 as u64))).exp();
                    let denom = (-beta).powu(m1 as u32) * (-beta.conj()).powu(m2 as u32);
                    let lag = assoc_laguerre(m1 as u32, n as i64 - m1 as i64, x)
                        * assoc_laguerre(m2 as u32, n as i64 - m2 as i64, x);
                    let expect = C::new(pref * lag, 0.0) / denom;
                    let got = qn_fock_element(n, beta, m1, m2);
                    assert!((got - expect).norm() < 1e-12, "n={n} m1={m1} m2={m2}");
                }
            }
        }
    }

    #[test]
    fn coherent_element_examples() {
        let a = C::new(0.7, -1.2);
        assert_relative_eq!(qn_coherent_element(0, a, a, a).re, 1.0, max_relative = 1e-14);
        assert!(qn_coherent_element(3, a, a, a).norm() < 1e-300);
        let beta = C::new(-0.4, 0.9);
        let d2 = (a - beta).norm_sqr();
        let mut total = 0.0;
        for n in 0..80 {
            let v = qn_coherent_element(n, beta, a, a);
            let expect = (-d2 + n as f64 * d2.ln() - log_factorial::<f64>(n as u64)).exp();
            assert_relative_eq!(v.norm(), expect, max_relative = 1e-12);
            total += v.re;
        }
        assert_relative_eq!(total, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn coherent_element_matches_displaced_amplitudes() {
        let beta = C::new(0.3, 0.5);
        let ai = C::new(2.0, 0.1);
        let aj = C::new(-1.5, 0.7);
        for n in 0..20 {
            let direct = displaced_amplitude(n, beta, ai, 0) * displaced_amplitude(n, beta, aj, 0).conj();
            let closed = qn_coherent_element(n, beta, ai, aj);
            assert!((direct - closed).norm() < 1e-14, "n={n}");
        }
    }

    #[test]
    fn amplitude_gradient_matches_finite_differences() {
        let alpha = C::new(0.6, -0.9);
        let beta = C::new(-0.7, 0.45);
        let h = 1e-6;
        for n in 0..8usize {
            for m in 0..4usize {
                let d = |b: C, k: usize| displacement_element(k, m, alpha - b);
                let prev = if n == 0 { C::new(0.0, 0.0) } else { d(beta, n - 1) };
                let (gre, gim) = amplitude_gradient(n, beta, alpha, prev, d(beta, n), d(beta, n + 1));
                let f = |b: C| displaced_amplitude(n, b, alpha, m);
                let fre = (f(beta + C::new(h, 0.0)) - f(beta - C::new(h, 0.0))) / (2.0 * h);
                let fim = (f(beta + C::new(0.0, h)) - f(beta - C::new(0.0, h))) / (2.0 * h);
                assert!((gre - fre).norm() < 1e-8, "re n={n} m={m}");
                assert!((gim - fim).norm() < 1e-8, "im n={n} m={m}");
            }
        }
    }

    #[test]
    fn kernels_run_in_single_precision() {
        let beta = Complex::new(0.5f32, 0.25);
        let v = qn_fock_element(1, beta, 1, 1);
        let w = qn_fock_element(1, Complex::new(0.5f64, 0.25), 1, 1);
        assert!((v.re as f64 - w.re).abs() < 1e-5);
        assert_eq!(hermite_phys(3, 1.0f32), -4.0);
    }
}
