//! Lattice-level figures of a code: Gram matrix, fundamental volume,
//! minimum-determinant search, normalized minimum determinant and NVD checks.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codebook::CodeSpec;
use crate::error::{Error, Result};
use crate::linalg::{det, is_zero, ComplexMatrix, RealMatrix};

/// Largest candidate count searched exhaustively.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;
pub const RANDOM_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x5EED_2013;
/// Normalized minimum determinant of an orthogonally shaped 16-dimensional
/// lattice in M4(C).
pub const ORTHOGONAL_DELTA_REF: f64 = 1.0 / 16.0;

const CHUNK: usize = 4096;

pub fn gram(code: &CodeSpec) -> RealMatrix {
    code.gram()
}

/// √det(Gram) through the Cholesky factor.
pub fn volume(code: &CodeSpec) -> Result<f64> {
    let u = code.gram().cholesky_upper()?;
    Ok((0..code.k()).map(|i| u[(i, i)]).product())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive,
    /// All weight-1 and weight-2 vectors plus seeded random samples.
    Structured,
}

impl SearchMode {
    pub fn label(&self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Structured => "structured",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    /// Coefficients range over [−range, range].
    pub range: i64,
    pub budget: u128,
    pub random_samples: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            range: 1,
            budget: EXHAUSTIVE_LIMIT,
            random_samples: RANDOM_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

impl SearchConfig {
    pub fn with_range(range: i64) -> Self {
        Self {
            range,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinDetResult {
    pub mindet: f64,
    pub g: Vec<i64>,
    pub mode: SearchMode,
    /// Nonzero candidates evaluated.
    pub evaluated: u64,
    /// Candidates whose determinant is zero at rounding level.
    pub zeros: u64,
}

#[derive(Clone, Debug)]
struct Best {
    det: f64,
    g: Vec<i64>,
    evaluated: u64,
    zeros: u64,
}

impl Best {
    fn empty() -> Self {
        Self {
            det: f64::INFINITY,
            g: Vec::new(),
            evaluated: 0,
            zeros: 0,
        }
    }

    fn offer(&mut self, d: f64, g: &[i64]) {
        let eps = 1e-12 * (1.0 + self.det.min(d));
        let better = d < self.det - eps || ((d - self.det).abs() <= eps && g < self.g.as_slice());
        if self.g.is_empty() || better {
            self.det = d;
            self.g = g.to_vec();
        }
    }

    fn merge(mut self, other: Best) -> Best {
        self.evaluated += other.evaluated;
        self.zeros += other.zeros;
        if !other.g.is_empty() {
            self.offer(other.det, &other.g);
        }
        self
    }
}

struct Evaluator<'a> {
    basis: Vec<ComplexMatrix>,
    code: &'a CodeSpec,
}

impl<'a> Evaluator<'a> {
    fn new(code: &'a CodeSpec) -> Self {
        Self {
            basis: code.scaled_basis(),
            code,
        }
    }

    fn eval(&self, g: &[i64], best: &mut Best) {
        if g.iter().all(|&v| v == 0) {
            return;
        }
        let mut x = ComplexMatrix::zeros(self.code.n_t, self.code.t);
        for (gi, b) in g.iter().zip(&self.basis) {
            if *gi != 0 {
                x.axpy(*gi as f64, b).expect("equal shapes");
            }
        }
        let d = det(&x).expect("square codewords").norm();
        best.evaluated += 1;
        if is_zero(d, x.frob_norm().powi(self.code.n_t as i32)) {
            best.zeros += 1;
        }
        best.offer(d, g);
    }
}

fn candidates(range: i64, k: usize) -> u128 {
    ((2 * range + 1) as u128).checked_pow(k as u32).unwrap_or(u128::MAX)
}

/// Smallest |det| of nonzero codewords with coefficients in [−r, r]^K.
///
/// Exhaustive when the box holds at most `budget` candidates, otherwise all
/// weight-1 and weight-2 vectors plus `random_samples` seeded uniform draws.
/// Ties are broken by lexicographically smallest g, independent of threads.
pub fn min_det_search(code: &CodeSpec, cfg: &SearchConfig) -> Result<MinDetResult> {
    if cfg.range < 1 {
        return Err(Error::invalid(format!("range {} must be at least 1", cfg.range)));
    }
    if code.n_t != code.t {
        return Err(Error::NotSquare {
            rows: code.n_t,
            cols: code.t,
        });
    }
    let k = code.k();
    let ev = Evaluator::new(code);
    let total = candidates(cfg.range, k);
    let base = (2 * cfg.range + 1) as u128;
    let (best, mode) = if total <= cfg.budget {
        let chunks = total.div_ceil(CHUNK as u128) as usize;
        let parts: Vec<Best> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut best = Best::empty();
                let mut g = vec![0i64; k];
                let start = c as u128 * CHUNK as u128;
                let end = (start + CHUNK as u128).min(total);
                for idx in start..end {
                    let mut rem = idx;
                    for slot in g.iter_mut().rev() {
                        *slot = (rem % base) as i64 - cfg.range;
                        rem /= base;
                    }
                    ev.eval(&g, &mut best);
                }
                best
            })
            .collect();
        (parts.into_iter().fold(Best::empty(), Best::merge), SearchMode::Exhaustive)
    } else {
        let mut best = Best::empty();
        let vals: Vec<i64> = (-cfg.range..=cfg.range).filter(|&v| v != 0).collect();
        let mut g = vec![0i64; k];
        for i in 0..k {
            for &a in &vals {
                g[i] = a;
                ev.eval(&g, &mut best);
                for j in i + 1..k {
                    for &b in &vals {
                        g[j] = b;
                        ev.eval(&g, &mut best);
                    }
                    g[j] = 0;
                }
            }
            g[i] = 0;
        }
        let chunks = cfg.random_samples.div_ceil(CHUNK);
        let parts: Vec<Best> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(c as u64);
                let mut best = Best::empty();
                let mut g = vec![0i64; k];
                let n = CHUNK.min(cfg.random_samples - c * CHUNK);
                for _ in 0..n {
                    for slot in g.iter_mut() {
                        *slot = rng.random_range(-cfg.range..=cfg.range);
                    }
                    ev.eval(&g, &mut best);
                }
                best
            })
            .collect();
        (parts.into_iter().fold(best, Best::merge), SearchMode::Structured)
    };
    Ok(MinDetResult {
        mindet: best.det,
        g: best.g,
        mode,
        evaluated: best.evaluated,
        zeros: best.zeros,
    })
}

/// δ = mindet / m^{n/K}.
pub fn delta_from(mindet: f64, volume: f64, n: usize, k: usize) -> Result<f64> {
    if !(mindet > 0.0) {
        return Err(Error::invalid(format!("minimum determinant {mindet} must be positive")));
    }
    if !(volume > 0.0) {
        return Err(Error::invalid(format!("volume {volume} must be positive")));
    }
    Ok(mindet / volume.powf(n as f64 / k as f64))
}

pub fn normalized_min_det(code: &CodeSpec, mindet: f64) -> Result<f64> {
    delta_from(mindet, volume(code)?, code.n_t, code.k())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NvdReport {
    pub holds: bool,
    pub lower_bound: f64,
    pub search: MinDetResult,
}

/// Whether every sampled nonzero codeword has |det| ≥ `lower_bound` − 1e−6.
pub fn check_nvd(code: &CodeSpec, cfg: &SearchConfig, lower_bound: f64) -> Result<NvdReport> {
    let search = min_det_search(code, cfg)?;
    Ok(NvdReport {
        holds: search.mindet >= lower_bound - 1e-6,
        lower_bound,
        search,
    })
}

#[derive(Clone, Debug)]
pub struct LatticeReport {
    pub code: String,
    pub k: usize,
    pub n: usize,
    pub gram: RealMatrix,
    pub volume: f64,
    pub search: MinDetResult,
    pub range: i64,
    /// None when the search found a zero determinant.
    pub delta: Option<f64>,
}

pub fn analyze(code: &CodeSpec, cfg: &SearchConfig) -> Result<LatticeReport> {
    let volume = volume(code)?;
    let search = min_det_search(code, cfg)?;
    let delta = if search.zeros > 0 {
        None
    } else {
        delta_from(search.mindet, volume, code.n_t, code.k()).ok()
    };
    Ok(LatticeReport {
        code: code.name.clone(),
        k: code.k(),
        n: code.n_t,
        gram: code.gram(),
        volume,
        search,
        range: cfg.range,
        delta,
    })
}

/// Ten significant digits, with float noise below 1e-12 printed as 0.
pub fn fmt_num(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".into();
    }
    let digits = (9 - x.abs().log10().floor() as i32).max(0) as usize;
    let t = format!("{x:.digits$}");
    if t.contains('.') {
        t.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        t
    }
}

impl LatticeReport {
    /// `key value` lines followed by the Gram matrix, one row per line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "code {}", self.code);
        let _ = writeln!(s, "k {}", self.k);
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "volume {}", fmt_num(self.volume));
        let _ = writeln!(s, "search {} range {}", self.search.mode.label(), self.range);
        let _ = writeln!(s, "evaluated {}", self.search.evaluated);
        let _ = writeln!(s, "zero_dets {}", self.search.zeros);
        let _ = writeln!(s, "mindet {}", fmt_num(self.search.mindet));
        let g: Vec<String> = self.search.g.iter().map(i64::to_string).collect();
        let _ = writeln!(s, "mindet_g {}", g.join(","));
        match self.delta {
            Some(d) => {
                let _ = writeln!(s, "delta {}", fmt_num(d));
            }
            None => {
                let _ = writeln!(s, "delta none");
            }
        }
        let _ = writeln!(s, "gram");
        for i in 0..self.k {
            let row: Vec<String> = (0..self.k).map(|j| fmt_num(self.gram[(i, j)])).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }
}
