//! Small statistics used by the checks: rank correlation and line fits.

use statrs::statistics::{Data, OrderStatistics, RankTieBreaker, Statistics};

/// Spearman rank correlation (average ranks for ties). Pairs with a
/// non-finite member are dropped.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).unzip();
    let rx = Data::new(xs).ranks(RankTieBreaker::Average);
    let ry = Data::new(ys).ranks(RankTieBreaker::Average);
    rx.iter().covariance(ry.iter()) / (rx.iter().std_dev() * ry.iter().std_dev())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    LineFit { slope, intercept, r_squared }
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_fit(x: &[f64], y: &[f64]) -> LineFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

pub fn median(v: &[f64]) -> f64 {
    Data::new(v.to_vec()).median()
}

/// Strict local maxima (8-neighbourhood, interior cells) of a grid.
pub fn count_local_maxima(values: &[Vec<f64>]) -> usize {
    let n = values.len();
    let mut count = 0;
    for i in 1..n.saturating_sub(1) {
        let m = values[i].len();
        for j in 1..m.saturating_sub(1) {
            let v = values[i][j];
            let higher = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .filter(|&p| p != (i, j))
                .all(|(a, b)| values[a][b] < v);
            if higher {
                count += 1;
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spearman_examples() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 25.0, 100.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        // ρ = 1 − 6Σd²/(n(n²−1)) = 1 − 24/120
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let f = linear_fit(&x, &x.map(|v| 3.0 * v - 0.5));
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 0.5).abs() < 1e-12 && f.r_squared > 1.0 - 1e-12);
        let g = log_log_fit(&x, &x.map(|v: f64| 2.0 * v.powf(-0.5)));
        assert!((g.slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn maxima() {
        let g = vec![vec![0.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 2.0], vec![0.0; 4]];
        assert_eq!(count_local_maxima(&g), 1);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }
}
