//! The feature computations: each maps a series to one `FeatureValue`.
//!
//! Precondition failures (series too short, zero variance, singular fits)
//! come back as domain-error specials rather than panics, so batch
//! computation never aborts and the catalog filter can do its job.

use std::cell::RefCell;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::stats;
use crate::value::FeatureValue;

/// Time-reversal asymmetry statistic at lag `tau`:
/// mean cubed lag-difference over the 3/2 power of the mean squared one.
pub fn trev(x: &[f64], tau: usize) -> FeatureValue {
    if tau == 0 || x.len() <= tau {
        return FeatureValue::domain_error();
    }
    let n = x.len() - tau;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    for t in 0..n {
        let d = x[t + tau] - x[t];
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n as f64;
    m3 /= n as f64;
    if !(m2 > 0.0) {
        return FeatureValue::domain_error();
    }
    FeatureValue::from_f64(m3 / m2.powf(1.5))
}

/// One step of the up/down symbolization. Ties match neither direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Up,
    Down,
}

/// A four-step up/down pattern over successive differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MotifPattern(pub [Step; 4]);

impl MotifPattern {
    /// Parse a code like "dudu" (the down-up-down-up motif).
    pub fn parse(code: &str) -> Option<Self> {
        let mut steps = [Step::Up; 4];
        if code.len() != 4 {
            return None;
        }
        for (i, c) in code.chars().enumerate() {
            steps[i] = match c {
                'u' => Step::Up,
                'd' => Step::Down,
                _ => return None,
            };
        }
        Some(Self(steps))
    }

    pub fn code(&self) -> String {
        self.0
            .iter()
            .map(|s| match s {
                Step::Up => 'u',
                Step::Down => 'd',
            })
            .collect()
    }

    /// All sixteen four-step patterns, in lexicographic code order.
    pub fn all() -> Vec<Self> {
        let mut out = Vec::with_capacity(16);
        for bits in 0..16u8 {
            let mut steps = [Step::Up; 4];
            for (i, step) in steps.iter_mut().enumerate() {
                *step = if bits & (1 << (3 - i)) == 0 {
                    Step::Down
                } else {
                    Step::Up
                };
            }
            out.push(Self(steps));
        }
        out
    }
}

/// Count of positions whose four successive strict differences match the
/// pattern, as a proportion of the series length N (not N-4).
pub fn motif_freq(x: &[f64], pattern: MotifPattern) -> FeatureValue {
    let n = x.len();
    if n < 5 {
        return FeatureValue::domain_error();
    }
    let matches_step = |a: f64, b: f64, s: Step| match s {
        Step::Up => b > a,
        Step::Down => b < a,
    };
    let count = (0..n - 4)
        .filter(|&t| (0..4).all(|k| matches_step(x[t + k], x[t + k + 1], pattern.0[k])))
        .count();
    FeatureValue::Real(count as f64 / n as f64)
}

/// Median of the cumulative sum of the z-scored series. High for series
/// with a decreasing trend, low for an increasing one.
pub fn cumsum_median(x: &[f64]) -> FeatureValue {
    match stats::zscore(x) {
        Some(z) => FeatureValue::from_f64(stats::median(&stats::cumulative_sum(&z))),
        None => FeatureValue::domain_error(),
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// One-sided periodogram of the mean-removed, Hamming-windowed series at
/// the Fourier frequencies 2*pi*k/N, k = 0..floor(N/2). No zero padding.
fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = stats::mean(x);
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos();
            Complex::new((v - m) * w, 0.0)
        })
        .collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(n);
        fft.process(&mut buf);
    });
    buf[..=n / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// Mel-scaled frequency at which the cumulative periodogram reaches 90%
/// of its total. Mel transform: 1127 * ln(omega/(1400*pi) + 1).
pub fn spectral_q90_mel(x: &[f64]) -> FeatureValue {
    let n = x.len();
    if n < 8 {
        return FeatureValue::domain_error();
    }
    let power = periodogram(x);
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return FeatureValue::domain_error();
    }
    let threshold = 0.9 * total;
    let mut acc = 0.0;
    let mut k_star = power.len() - 1;
    for (k, p) in power.iter().enumerate() {
        acc += p;
        if acc >= threshold {
            k_star = k;
            break;
        }
    }
    let omega = 2.0 * PI * k_star as f64 / n as f64;
    FeatureValue::from_f64(1127.0 * (omega / (1400.0 * PI) + 1.0).ln())
}

/// StatAv: dispersion of non-overlapping window means relative to the
/// overall dispersion. Near 1 for white noise at small windows, near 0 for
/// a stationary mean.
pub fn stat_av(x: &[f64], window: usize) -> FeatureValue {
    let n = x.len();
    if window == 0 || n < 2 * window {
        return FeatureValue::domain_error();
    }
    let sd = stats::sample_std(x);
    if !(sd > 0.0) {
        return FeatureValue::domain_error();
    }
    let means: Vec<f64> = x
        .chunks_exact(window)
        .map(|w| stats::mean(w))
        .collect();
    FeatureValue::from_f64(stats::sample_std(&means) / sd)
}

/// Approximate entropy ApEn(m, r) with Chebyshev template matching and
/// self-matches included; tolerance r = r_frac * sample std.
pub fn approx_entropy(x: &[f64], m: usize, r_frac: f64) -> FeatureValue {
    let n = x.len();
    if m == 0 || n < m + 2 {
        return FeatureValue::domain_error();
    }
    let sd = stats::sample_std(x);
    if !(sd > 0.0) {
        return FeatureValue::domain_error();
    }
    let r = r_frac * sd;
    FeatureValue::from_f64(phi(x, m, r) - phi(x, m + 1, r))
}

fn phi(x: &[f64], m: usize, r: f64) -> f64 {
    let count = x.len() - m + 1;
    let mut sum = 0.0;
    for i in 0..count {
        let mut matches = 0usize;
        'templates: for j in 0..count {
            for k in 0..m {
                if (x[i + k] - x[j + k]).abs() > r {
                    continue 'templates;
                }
            }
            matches += 1;
        }
        // self-match guarantees matches >= 1, so the log is finite
        sum += (matches as f64 / count as f64).ln();
    }
    sum / count as f64
}

/// Autocorrelation at lag `tau`, biased estimator (normalized by the full
/// sum of squares). acf(0) = 1 by definition.
pub fn acf(x: &[f64], tau: usize) -> FeatureValue {
    let n = x.len();
    if n <= tau {
        return FeatureValue::domain_error();
    }
    let m = stats::mean(x);
    let denom: f64 = x.iter().map(|v| (v - m) * (v - m)).sum();
    if !(denom > 0.0) {
        return FeatureValue::domain_error();
    }
    let num: f64 = (0..n - tau).map(|t| (x[t] - m) * (x[t + tau] - m)).sum();
    FeatureValue::from_f64(num / denom)
}

/// Smallest lag at which the autocorrelation is <= 0; N-1 if it never is.
pub fn acf_first_zero(x: &[f64]) -> FeatureValue {
    let n = x.len();
    for tau in 1..n {
        match acf(x, tau) {
            FeatureValue::Real(v) => {
                if v <= 0.0 {
                    return FeatureValue::Real(tau as f64);
                }
            }
            special => return special,
        }
    }
    FeatureValue::Real((n - 1) as f64)
}

fn bin_of(v: f64, min: f64, max: f64, bins: usize) -> usize {
    // equal-width bins over [min, max], rightmost bin closed
    let width = (max - min) / bins as f64;
    let idx = ((v - min) / width) as usize;
    idx.min(bins - 1)
}

/// Auto-mutual information (nats) of (x_t, x_{t+tau}) over a bins x bins
/// joint histogram spanning the series range.
pub fn automutual_info(x: &[f64], tau: usize, bins: usize) -> FeatureValue {
    let n = x.len();
    if tau == 0 || n <= tau || bins < 2 {
        return FeatureValue::domain_error();
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return FeatureValue::domain_error();
    }
    let pairs = n - tau;
    let mut joint = vec![0usize; bins * bins];
    for t in 0..pairs {
        let a = bin_of(x[t], min, max, bins);
        let b = bin_of(x[t + tau], min, max, bins);
        joint[a * bins + b] += 1;
    }
    let mut row = vec![0usize; bins];
    let mut col = vec![0usize; bins];
    for a in 0..bins {
        for b in 0..bins {
            row[a] += joint[a * bins + b];
            col[b] += joint[a * bins + b];
        }
    }
    let total = pairs as f64;
    let mut mi = 0.0;
    for a in 0..bins {
        for b in 0..bins {
            let c = joint[a * bins + b];
            if c > 0 {
                let p = c as f64 / total;
                let pa = row[a] as f64 / total;
                let pb = col[b] as f64 / total;
                mi += p * (p / (pa * pb)).ln();
            }
        }
    }
    FeatureValue::from_f64(mi)
}

/// Shannon entropy (nats) of the equal-width histogram; 0 for a constant
/// series by definition.
pub fn entropy_hist(x: &[f64], bins: usize) -> FeatureValue {
    if x.len() < 2 || bins == 0 {
        return FeatureValue::domain_error();
    }
    let min = x.iter().copied().fold(f64::INFINITY, f64::min);
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return FeatureValue::Real(0.0);
    }
    let mut counts = vec![0usize; bins];
    for &v in x {
        counts[bin_of(v, min, max, bins)] += 1;
    }
    let n = x.len() as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum();
    FeatureValue::from_f64(h)
}

/// LZ76 phrase count of a binary string via the exhaustive-history parse:
/// each phrase is the longest prefix of the remainder that can be copied
/// from an earlier start (overlap allowed) plus one fresh symbol; the final
/// phrase may be purely a copy.
pub fn lz76_phrase_count(s: &[u8]) -> usize {
    let n = s.len();
    let mut phrases = 0usize;
    let mut pos = 0usize;
    while pos < n {
        let mut starts: Vec<usize> = (0..pos).collect();
        let mut len = 0usize;
        while pos + len < n && !starts.is_empty() {
            let sym = s[pos + len];
            starts.retain(|&st| s[st + len] == sym);
            if starts.is_empty() {
                break;
            }
            len += 1;
        }
        let phrase_len = if pos + len >= n { n - pos } else { len + 1 };
        pos += phrase_len;
        phrases += 1;
    }
    phrases
}

/// Normalized Lempel-Ziv complexity of the median-binarized series:
/// c(N) * log2(N) / N.
pub fn lempel_ziv(x: &[f64]) -> FeatureValue {
    let n = x.len();
    if n < 2 {
        return FeatureValue::domain_error();
    }
    let med = stats::median(x);
    let symbols: Vec<u8> = x.iter().map(|&v| u8::from(v > med)).collect();
    let c = lz76_phrase_count(&symbols);
    FeatureValue::from_f64(c as f64 * (n as f64).log2() / n as f64)
}

/// Moment skewness m3 / m2^(3/2); domain error on zero variance.
pub fn skewness(x: &[f64]) -> FeatureValue {
    let m2 = stats::central_moment(x, 2);
    if !(m2 > 0.0) {
        return FeatureValue::domain_error();
    }
    FeatureValue::from_f64(stats::central_moment(x, 3) / m2.powf(1.5))
}

/// Non-excess kurtosis m4 / m2^2; domain error on zero variance.
pub fn kurtosis(x: &[f64]) -> FeatureValue {
    let m2 = stats::central_moment(x, 2);
    if !(m2 > 0.0) {
        return FeatureValue::domain_error();
    }
    FeatureValue::from_f64(stats::central_moment(x, 4) / (m2 * m2))
}

/// Fraction of points farther than k sample standard deviations from the
/// mean.
pub fn outlier_frac(x: &[f64], k: f64) -> FeatureValue {
    let m = stats::mean(x);
    let sd = stats::sample_std(x);
    if !(sd > 0.0) {
        return FeatureValue::domain_error();
    }
    let count = x.iter().filter(|&&v| ((v - m) / sd).abs() > k).count();
    FeatureValue::Real(count as f64 / x.len() as f64)
}

/// Least-squares AR(p) fit of the mean-removed series (intercept included,
/// not reported). Returns the lag coefficients and the ratio of residual
/// mean square to the series sample variance.
pub fn ar_fit(x: &[f64], p: usize) -> Option<(Vec<f64>, f64)> {
    let n = x.len();
    if p == 0 || n < p + 2 {
        return None;
    }
    let series_var = stats::sample_variance(x);
    if !(series_var > 0.0) {
        return None;
    }
    let m = stats::mean(x);
    let xc: Vec<f64> = x.iter().map(|v| v - m).collect();

    // design has p lag columns plus an intercept
    let d = p + 1;
    let rows = n - p;
    let mut ata = vec![0.0; d * d];
    let mut atb = vec![0.0; d];
    let mut predictors = vec![0.0; d];
    for t in p..n {
        for k in 0..p {
            predictors[k] = xc[t - 1 - k];
        }
        predictors[p] = 1.0;
        let y = xc[t];
        for i in 0..d {
            atb[i] += predictors[i] * y;
            for j in 0..d {
                ata[i * d + j] += predictors[i] * predictors[j];
            }
        }
    }
    let sol = solve_dense(&mut ata, &mut atb, d)?;

    let mut ssr = 0.0;
    for t in p..n {
        let mut pred = sol[p];
        for k in 0..p {
            pred += sol[k] * xc[t - 1 - k];
        }
        let e = xc[t] - pred;
        ssr += e * e;
    }
    let ratio = (ssr / rows as f64) / series_var;
    Some((sol[..p].to_vec(), ratio))
}

/// Gaussian elimination with partial pivoting on a dense d x d system.
/// Returns `None` when the pivot collapses (singular design).
pub(crate) fn solve_dense(a: &mut [f64], b: &mut [f64], d: usize) -> Option<Vec<f64>> {
    let scale = a
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
            .unwrap();
        if a[pivot_row * d + col].abs() <= scale * 1e-12 {
            return None;
        }
        if pivot_row != col {
            for k in 0..d {
                a.swap(col * d + k, pivot_row * d + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * d + col];
        for row in col + 1..d {
            let factor = a[row * d + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..d {
                a[row * d + k] -= factor * a[col * d + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for col in (0..d).rev() {
        let mut acc = b[col];
        for k in col + 1..d {
            acc -= a[col * d + k] * x[k];
        }
        x[col] = acc / a[col * d + col];
    }
    Some(x)
}
