//! One-way ANOVA and Tukey's HSD (Tukey-Kramer for unequal group sizes).
//!
//! Studentized range probabilities are computed by nested Gauss-Legendre
//! quadrature and inverted by safeguarded false position.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Result of a one-way ANOVA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anova {
    pub f_statistic: f64,
    pub p_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    /// Within-group mean square (pooled variance).
    pub mse: f64,
}

fn check_groups<S: AsRef<[f64]>>(groups: &[S]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 groups, got {}",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        let g = g.as_ref();
        if g.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "group {i} has {} samples, need at least 2",
                g.len()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "group {i} contains a non-finite value"
            )));
        }
    }
    Ok(())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One-factor ANOVA. With zero spread both within and between groups the
/// F statistic is reported as 0 with p = 1.
pub fn anova_oneway<S: AsRef<[f64]>>(groups: &[S]) -> Result<Anova> {
    check_groups(groups)?;
    let k = groups.len();
    let n: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / n as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let g = g.as_ref();
        let m = mean(g);
        ss_between += g.len() as f64 * (m - grand).powi(2);
        ss_within += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let ms_between = ss_between / df_between as f64;
    let mse = ss_within / df_within as f64;

    // relative to the data scale, so rounding noise in constant groups reads as zero
    let scale = groups
        .iter()
        .flat_map(|g| g.as_ref())
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let negligible = |ss: f64| ss <= (scale * 1e-12).powi(2) * n as f64;

    let (f_statistic, p_value) = if negligible(ss_within) {
        if negligible(ss_between) {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_between / mse;
        let dist = FisherSnedecor::new(df_between as f64, df_within as f64)
            .map_err(|e| Error::invalid(format!("F distribution: {e}")))?;
        (f, dist.sf(f).clamp(0.0, 1.0))
    };
    Ok(Anova {
        f_statistic,
        p_value,
        df_between,
        df_within,
        mse: if negligible(ss_within) { 0.0 } else { mse },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: String,
    pub b: String,
    /// mean(a) - mean(b)
    pub mean_difference: f64,
    pub p_value: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub groups: Vec<String>,
    pub means: Vec<f64>,
    pub f_statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// Critical studentized range q(1 - alpha; k, N - k).
    pub q_critical: f64,
    /// All unordered pairs, in (i < j) order of `groups`.
    pub pairwise: Vec<PairComparison>,
}

impl SignificanceReport {
    pub fn pair(&self, a: &str, b: &str) -> Option<&PairComparison> {
        self.pairwise
            .iter()
            .find(|p| (p.a == a && p.b == b) || (p.a == b && p.b == a))
    }
}

/// Tukey's honestly significant difference over named groups.
pub fn tukey_hsd<S: AsRef<[f64]>>(groups: &[(&str, S)], alpha: f64) -> Result<SignificanceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let samples: Vec<&[f64]> = groups.iter().map(|(_, s)| s.as_ref()).collect();
    let anova = anova_oneway(&samples)?;
    let k = groups.len();
    let df = anova.df_within as f64;
    let q_critical = studentized_range_quantile(1.0 - alpha, k, df)?;
    let means: Vec<f64> = samples.iter().map(|s| mean(s)).collect();

    let mut pairwise = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in (i + 1)..k {
            let diff = means[i] - means[j];
            let se = (anova.mse / 2.0
                * (1.0 / samples[i].len() as f64 + 1.0 / samples[j].len() as f64))
                .sqrt();
            let (p_value, significant) = if se == 0.0 {
                if diff == 0.0 {
                    (1.0, false)
                } else {
                    (0.0, true)
                }
            } else {
                let q = diff.abs() / se;
                let p = (1.0 - studentized_range_cdf(q, k, df)).clamp(0.0, 1.0);
                (p, q > q_critical)
            };
            pairwise.push(PairComparison {
                a: groups[i].0.to_string(),
                b: groups[j].0.to_string(),
                mean_difference: diff,
                p_value,
                significant,
            });
        }
    }
    Ok(SignificanceReport {
        groups: groups.iter().map(|(n, _)| n.to_string()).collect(),
        means,
        f_statistic: anova.f_statistic,
        p_value: anova.p_value,
        alpha,
        q_critical,
        pairwise,
    })
}

const GL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                // Legendre recurrence for P_n(x) and its derivative
                let (mut p0, mut p1) = (1.0, x);
                for m in 2..=n {
                    let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + width * p as f64;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            s += w * f(mid + half * x);
        }
        total += s * half;
    }
    total
}

fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

const Z_LIMIT: f64 = 8.5;
const Z_PANELS: usize = 16;
const S_PANELS: usize = 16;

/// Quadrature grid over z for the range-of-normals integral, with the
/// w-independent factors precomputed.
struct RangeGrid {
    z: Vec<f64>,
    /// quadrature weight times phi(z)
    weighted_pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl RangeGrid {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre();
        let width = 2.0 * Z_LIMIT / Z_PANELS as f64;
        let half = 0.5 * width;
        let mut grid = RangeGrid {
            z: Vec::with_capacity(Z_PANELS * GL_ORDER),
            weighted_pdf: Vec::with_capacity(Z_PANELS * GL_ORDER),
            cdf: Vec::with_capacity(Z_PANELS * GL_ORDER),
        };
        for p in 0..Z_PANELS {
            let mid = -Z_LIMIT + width * (p as f64 + 0.5);
            for (x, w) in nodes.iter().zip(weights) {
                let z = mid + half * x;
                grid.z.push(z);
                grid.weighted_pdf.push(w * half * norm_pdf(z));
                grid.cdf.push(norm_cdf(z));
            }
        }
        grid
    }

    /// P(range of k standard normals < w).
    fn range_cdf(&self, w: f64, k: usize) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for ((z, wp), c) in self.z.iter().zip(&self.weighted_pdf).zip(&self.cdf) {
            let inner = c - norm_cdf(z - w);
            if inner > 0.0 {
                total += wp * inner.powi(k as i32 - 1);
            }
        }
        (k as f64 * total).clamp(0.0, 1.0)
    }
}

fn range_grid() -> &'static RangeGrid {
    static GRID: OnceLock<RangeGrid> = OnceLock::new();
    GRID.get_or_init(RangeGrid::new)
}

/// CDF of the studentized range distribution with `k` groups and `df`
/// error degrees of freedom.
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    if q <= 0.0 || k < 2 {
        return 0.0;
    }
    let grid = range_grid();
    if df > 50_000.0 {
        return grid.range_cdf(q, k);
    }
    // density of s = sqrt(chi2_df / df)
    let half = df / 2.0;
    let log_norm = half * df.ln() - ln_gamma(half) - (half - 1.0) * std::f64::consts::LN_2;
    let density = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            (log_norm + (df - 1.0) * s.ln() - half * s * s).exp()
        }
    };
    let spread = 12.0 / (2.0 * df).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread.max(8.0 / df.sqrt());
    integrate(|s| density(s) * grid.range_cdf(q * s, k), lo, hi, S_PANELS).clamp(0.0, 1.0)
}

/// Quantile `q` with `studentized_range_cdf(q, k, df) == p`.
pub fn studentized_range_quantile(p: f64, k: usize, df: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "probability must lie in (0,1), got {p}"
        )));
    }
    if k < 2 || df.is_nan() || df < 1.0 {
        return Err(Error::InsufficientData(format!(
            "studentized range needs k >= 2 and df >= 1 (k={k}, df={df})"
        )));
    }
    let f = |q: f64| studentized_range_cdf(q, k, df) - p;
    let (mut a, mut fa) = (0.0, -p);
    let mut b = 8.0;
    let mut fb = f(b);
    while fb < 0.0 {
        a = b;
        fa = fb;
        b *= 2.0;
        if b > 1e6 {
            return Err(Error::invalid("studentized range quantile did not bracket"));
        }
        fb = f(b);
    }
    // Illinois false position
    let mut side = 0i8;
    let mut last = f64::NAN;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        if (c - last).abs() < 1e-11 * c.abs().max(1.0) {
            return Ok(c);
        }
        last = c;
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if (fc < 0.0) == (fa < 0.0) {
            a = c;
            fa = fc;
            if side == -1 {
                fb /= 2.0;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa /= 2.0;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}
