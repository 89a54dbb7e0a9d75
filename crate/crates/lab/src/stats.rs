//! Goodness-of-fit tests and summary statistics used by the experiment suites.

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

/// Neumaier-compensated sum, so that totals do not depend on the grouping
/// of partial sums beyond rounding of the final value.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

pub fn sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

pub fn mean(xs: &[f64]) -> f64 {
    sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).collect::<CompensatedSum>().value() / (xs.len() as f64 - 1.0)
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Mean and standard error of `Σa / Σb` over i.i.d. pairs, by the delta method.
pub fn ratio_estimate(a: &[f64], b: &[f64]) -> (f64, f64) {
    let n = a.len() as f64;
    let (ma, mb) = (mean(a), mean(b));
    let r = ma / mb;
    let resid: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - r * y).collect();
    (r, (variance(&resid) / n).sqrt() / mb.abs())
}

/// Least-squares slope of `y` on `x` and its standard error.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, intercept, se)
}

/// `sup |F_n - F|` of a sample against a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// `P(sup |F_n - F| < d)` for a continuous `F`, by the Marsaglia–Tsang–Wang
/// matrix recursion. Exact up to rounding.
pub fn kolmogorov_cdf_exact(n: usize, d: f64) -> f64 {
    let nf = n as f64;
    let t = nf * d;
    if t <= 0.5 {
        return 0.0;
    }
    if d >= 1.0 {
        return 1.0;
    }
    let k = t.floor() as usize + 1;
    let m = 2 * k - 1;
    let h = k as f64 - t;
    let mut mat = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            if i + 1 >= j {
                mat[i * m + j] = 1.0;
            }
        }
    }
    for i in 0..m {
        mat[i * m] -= h.powi(i as i32 + 1);
        mat[(m - 1) * m + i] -= h.powi((m - i) as i32);
    }
    mat[(m - 1) * m] += if 2.0 * h - 1.0 > 0.0 { (2.0 * h - 1.0).powi(m as i32) } else { 0.0 };
    for i in 0..m {
        for j in 0..m {
            if i + 1 > j {
                for g in 1..=(i + 1 - j) {
                    mat[i * m + j] /= g as f64;
                }
            }
        }
    }
    // power with a running base-10 exponent to avoid overflow
    let (pow, mut exp10) = matrix_power(&mat, m, n);
    let mut s = pow[(k - 1) * m + k - 1];
    for i in 1..=n {
        s *= i as f64 / nf;
        if s < 1e-140 {
            s *= 1e140;
            exp10 -= 140;
        }
    }
    s * 10f64.powi(exp10)
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for l in 0..m {
            let x = a[i * m + l];
            if x != 0.0 {
                for j in 0..m {
                    c[i * m + j] += x * b[l * m + j];
                }
            }
        }
    }
    c
}

fn matrix_power(a: &[f64], m: usize, n: usize) -> (Vec<f64>, i32) {
    if n == 1 {
        return (a.to_vec(), 0);
    }
    let (half, e) = matrix_power(a, m, n / 2);
    let mut v = matmul(&half, &half, m);
    let mut exp10 = 2 * e;
    if n % 2 == 1 {
        v = matmul(a, &v, m);
    }
    if v[(m / 2) * m + m / 2] > 1e140 {
        v.iter_mut().for_each(|x| *x *= 1e-140);
        exp10 += 140;
    }
    (v, exp10)
}

/// Limiting Kolmogorov survival function `Q(x) = 2 Σ (-1)^{j-1} e^{-2 j² x²}`.
pub fn kolmogorov_q(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * x * x).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// p-value of the one-sample KS statistic `d` with `n` points: exact for
/// moderate `n d`, asymptotic with Stephens' correction otherwise.
pub fn ks_p_value(n: usize, d: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n <= 2000 && n as f64 * d < 60.0 {
        return (1.0 - kolmogorov_cdf_exact(n, d)).clamp(0.0, 1.0);
    }
    let s = (n as f64).sqrt();
    kolmogorov_q((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test: `(statistic, p_value)`.
pub fn ks_test<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> (f64, f64) {
    let d = ks_statistic(sample, cdf);
    (d, ks_p_value(sample.len(), d))
}

/// Two-sample KS test with the asymptotic p-value: `(statistic, p_value)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    (d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d))
}

/// Index-of-dispersion test of counts against a Poisson law:
/// `(n-1) s² / mean ~ χ²_{n-1}`, two-sided. Returns `(index, p_value)`.
pub fn dispersion_test(counts: &[f64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let index = variance(counts) / mean(counts);
    let chi = ChiSquared::new(n - 1.0).expect("at least two counts");
    let f = chi.cdf((n - 1.0) * index);
    (index, (2.0 * f.min(1.0 - f)).min(1.0))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with a two-sided p-value from the `t` approximation.
pub fn spearman(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(&rx), mean(&ry));
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    let rho = sxy / (sxx * syy).sqrt();
    let n = x.len() as f64;
    let t = rho * ((n - 2.0) / (1.0 - rho * rho).max(1e-300)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 2.0).expect("at least three points");
    (rho, (2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_is_order_free() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(sum(&xs), 2.0);
        let mut r = xs;
        r.reverse();
        assert_eq!(sum(&r), 2.0);
    }

    #[test]
    fn exact_kolmogorov_small_n() {
        // n = 1: P(D < d) = 2d - 1 on [1/2, 1]
        for &d in &[0.6, 0.75, 0.9] {
            assert!((kolmogorov_cdf_exact(1, d) - (2.0 * d - 1.0)).abs() < 1e-12);
        }
        // n = 2, d in [1/2, 1]: P = 2 (d - 1/2)(... ) closed form 1 - 2(1-d)^2
        for &d in &[0.55, 0.7, 0.95] {
            assert!((kolmogorov_cdf_exact(2, d) - (1.0 - 2.0 * (1.0 - d).powi(2))).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_kolmogorov_critical_values() {
        // (n, alpha, critical value) from standard two-sided tables
        let table = [(5, 0.05, 0.56328), (5, 0.01, 0.66853), (10, 0.05, 0.40925), (10, 0.01, 0.48893), (8, 0.05, 0.45427)];
        for (n, alpha, c) in table {
            let p = 1.0 - kolmogorov_cdf_exact(n, c);
            assert!((p - alpha).abs() < 1e-4, "n = {n}: {p}");
        }
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn exact_kolmogorov_all_small_n() {
        // frozen from an independent implementation of the exact law
        let grid = [0.15, 0.3, 0.45, 0.6];
        let table: [[f64; 4]; 10] = [
            [0.0, 0.0, 0.0, 0.2],
            [0.0, 0.02, 0.32, 0.68],
            [0.0, 0.113_777_777_777_777_7, 0.5415, 0.856],
            [0.000_15, 0.2292, 0.7071, 0.9326],
            [0.0012, 0.336, 0.806_006_25, 0.969_92],
            [0.004_045_432_098_765_426, 0.444_984_938_271_604_85, 0.874_607_597_222_221_9, 0.986_496_296_296_296_3],
            [0.010_594_646_444_083_68, 0.533_736_123_009_970_5, 0.917_640_818_240_539_3, 0.993_859_602_308_561_9],
            [0.018_961_326_562_5, 0.609_885_659_790_039, 0.946_393_349_599_609_1, 0.997_221_513_476_562_5],
            [0.030_573_799_948_525_673, 0.675_608_083_152_601_2, 0.964_922_034_461_563, 0.998_744_727_031_237_7],
            [0.046_034_73, 0.729_464_425_200_000_5, 0.977_108_189_688_281_8, 0.999_431_832_8],
        ];
        for (i, row) in table.iter().enumerate() {
            for (d, want) in grid.iter().zip(row) {
                let got = kolmogorov_cdf_exact(i + 1, *d);
                assert!((got - want).abs() < 1e-12, "n = {}, d = {d}: {got} vs {want}", i + 1);
            }
        }
    }

    #[test]
    fn exact_and_asymptotic_agree_for_large_n() {
        let n = 1500;
        let d = 1.2 / (n as f64).sqrt();
        let exact = 1.0 - kolmogorov_cdf_exact(n, d);
        let s = (n as f64).sqrt();
        let asym = kolmogorov_q((s + 0.12 + 0.11 / s) * d);
        assert!((exact - asym).abs() < 2e-3, "{exact} vs {asym}");
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        let (r, _) = spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 30.0, 40.0]);
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_fit_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (s, i, se) = linear_fit(&x, &y);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && se < 1e-12);
    }

    #[test]
    fn ratio_of_constants() {
        let (r, se) = ratio_estimate(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]);
        assert!((r - 2.0).abs() < 1e-15 && se < 1e-15);
    }
}
