#![allow(dead_code)]

use std::path::{Path, PathBuf};

use ghvfdt::harness::dataset::{load_or_convert, Dataset};
use ghvfdt::{ClassLabel, StreamRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Binned Hellinger distance straight from normalized frequencies.
pub fn brute_hellinger(pos: &[u64], neg: &[u64]) -> f64 {
    let tp: u64 = pos.iter().sum();
    let tn: u64 = neg.iter().sum();
    let mut s = 0.0;
    for (&p, &n) in pos.iter().zip(neg) {
        let d = (p as f64 / tp as f64).sqrt() - (n as f64 / tn as f64).sqrt();
        s += d * d;
    }
    s.sqrt()
}

fn normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Hellinger distance between two normals from composite Simpson
/// integration of `sqrt(p q)`. The window is centred where the integrand
/// peaks and spans 14 of its standard deviations each way.
pub fn quadrature_gaussian_hellinger(mu1: f64, s1: f64, mu2: f64, s2: f64) -> f64 {
    let w1 = 1.0 / (s1 * s1);
    let w2 = 1.0 / (s2 * s2);
    let centre = (mu1 * w1 + mu2 * w2) / (w1 + w2);
    let spread = (2.0 / (w1 + w2)).sqrt();
    let (a, b) = (centre - 14.0 * spread, centre + 14.0 * spread);
    let panels = 20_000;
    let h = (b - a) / panels as f64;
    let f = |x: f64| (normal_pdf(x, mu1, s1) * normal_pdf(x, mu2, s2)).sqrt();
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let x = a + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    let bc = sum * h / 3.0;
    (1.0 - bc).max(0.0).sqrt()
}

/// Two-class Gaussian blobs: each feature of class `c` is drawn from
/// `N(means[c][j], sds[c][j])`.
pub fn gaussian_dataset(
    n_pos: usize,
    n_neg: usize,
    means: [&[f64]; 2],
    sds: [&[f64]; 2],
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = means[0].len();
    let mut rows = Vec::with_capacity(n_pos + n_neg);
    let mut labels = Vec::with_capacity(n_pos + n_neg);
    for i in 0..n_pos + n_neg {
        let c = usize::from(i >= n_pos);
        let row = (0..dims)
            .map(|j| {
                Normal::new(means[c][j], sds[c][j])
                    .unwrap()
                    .sample(&mut rng)
            })
            .collect();
        rows.push(row);
        labels.push(if c == 0 {
            ClassLabel::Positive
        } else {
            ClassLabel::Negative
        });
    }
    let names = (0..dims).map(|j| format!("x{j}")).collect();
    Dataset::new("synthetic", names, rows, labels).unwrap()
}

/// Endless labeled records from two Gaussian classes, `pos_rate` of them positive.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    pos: Vec<Normal<f64>>,
    neg: Vec<Normal<f64>>,
    pos_rate: f64,
}

impl GaussianStream {
    pub fn new(seed: u64, pos: &[(f64, f64)], neg: &[(f64, f64)], pos_rate: f64) -> Self {
        let mk = |v: &[(f64, f64)]| v.iter().map(|&(m, s)| Normal::new(m, s).unwrap()).collect();
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            pos: mk(pos),
            neg: mk(neg),
            pos_rate,
        }
    }

    pub fn next_record(&mut self) -> StreamRecord {
        let positive = self.rng.random::<f64>() < self.pos_rate;
        let dists = if positive { &self.pos } else { &self.neg };
        let features = dists.iter().map(|d| d.sample(&mut self.rng)).collect();
        let truth = if positive {
            ClassLabel::Positive
        } else {
            ClassLabel::Negative
        };
        StreamRecord::labeled(features, truth).unwrap()
    }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Locates the UCI Skin Segmentation data: `GHVFDT_SKIN_PATH`, then
/// `data/Skin_NonSkin.txt` or `data/skin.csv` under the workspace root.
pub fn skin_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("GHVFDT_SKIN_PATH") {
        let p = PathBuf::from(p);
        return p.exists().then_some(p);
    }
    ["data/Skin_NonSkin.txt", "data/skin.csv"]
        .iter()
        .map(|rel| workspace_root().join(rel))
        .find(|p| p.exists())
}

/// Loads Skin with skin pixels (raw label `1`) as Positive.
pub fn load_skin() -> Result<Dataset, String> {
    let path = skin_path().ok_or_else(|| {
        "Skin dataset not found (set GHVFDT_SKIN_PATH or place Skin_NonSkin.txt under data/)"
            .to_string()
    })?;
    load_or_convert(&path, &["1".to_string()]).map_err(|e| e.to_string())
}
