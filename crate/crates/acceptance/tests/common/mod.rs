use fracpk::commands::quantile;
use fracpk::fbm::FbmSampler;
use fracpk::grid::SamplePath;
use fracpk::Seed;

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn median(v: &[f64]) -> f64 {
    quantile(v, 0.5)
}

/// Runs `f` on every path of `count` seeds under `master`, in batches so
/// that only a batch of paths is held in memory.
pub fn map_paths<T>(sampler: &FbmSampler, master: u64, count: usize, mut f: impl FnMut(&SamplePath) -> T) -> Vec<T> {
    const BATCH: usize = 256;
    let seeds = Seed::replicates(master, count);
    let mut out = Vec::with_capacity(count);
    for chunk in seeds.chunks(BATCH) {
        for path in sampler.sample_many(chunk).expect("sampling succeeds") {
            out.push(f(&path));
        }
    }
    out
}

/// Least-squares slope of y on x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub struct Verdict {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(label: &str, pass: bool, detail: &str) -> Self {
        Verdict {
            label: label.to_string(),
            pass,
            detail: detail.to_string(),
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.label, self.detail)
    }
}
