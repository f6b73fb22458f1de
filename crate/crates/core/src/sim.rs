//! Monte-Carlo block error rate over i.i.d. Rayleigh fading, `Y = HX + N`.
//!
//! Every frame draws from its own ChaCha stream keyed by (seed, SNR point,
//! frame), so results do not depend on the worker count.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::codebook::{by_name, spherical_codebook, CodeSpec, Constellation};
use crate::error::{Error, Result};
use crate::fastdecode::{complexity_estimate, discover_pattern, ComplexityReport, SphereDecoder, SplitPolicy};
use crate::linalg::{ComplexMatrix, C64};

pub const DEFAULT_SEED: u64 = 20130401;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// i.i.d. CN(0, 1) entries: real and imaginary parts each N(0, 1/2).
pub fn sample_channel<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> ComplexMatrix {
    sample_gaussian(n_r, n_t, 1.0, rng)
}

fn sample_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> ComplexMatrix {
    let s = (variance / 2.0).sqrt();
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shaping {
    /// Independent uniform Q-PAM coefficients.
    Linear { pam: u32 },
    /// Uniform draws from the `size` lowest-energy codewords over Q-PAM.
    Spherical { pam: u32, size: usize },
}

impl Shaping {
    pub fn label(&self) -> String {
        match self {
            Shaping::Linear { pam } => format!("pam:{pam}"),
            Shaping::Spherical { pam, size } => format!("spherical:{pam}:{size}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |v: &str| -> Result<u64> { v.parse().map_err(|_| Error::invalid(format!("bad number `{v}` in `{s}`"))) };
        let shaping = match parts.as_slice() {
            ["pam", q] => Shaping::Linear { pam: num(q)? as u32 },
            ["spherical", q, n] => Shaping::Spherical {
                pam: num(q)? as u32,
                size: num(n)? as usize,
            },
            _ => return Err(Error::invalid(format!("alphabet `{s}`: expected pam:Q or spherical:Q:SIZE"))),
        };
        let q = match shaping {
            Shaping::Linear { pam } | Shaping::Spherical { pam, .. } => pam,
        };
        Constellation::pam(q)?;
        Ok(shaping)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub code: String,
    pub n_r: usize,
    pub shaping: Shaping,
    /// dB values; `f64::INFINITY` means noiseless.
    pub snr_db: Vec<f64>,
    pub frames: u64,
    pub seed: u64,
    /// 0 selects the default rayon pool size.
    pub workers: usize,
    /// Use the grouped search when the code has structure.
    pub grouped: bool,
}

impl SimConfig {
    pub fn new(code: &str, n_r: usize, shaping: Shaping, snr_db: Vec<f64>, frames: u64, seed: u64) -> Self {
        Self {
            code: code.to_string(),
            n_r,
            shaping,
            snr_db,
            frames,
            seed,
            workers: 0,
            grouped: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::invalid("frames must be at least 1"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::invalid("SNR grid is empty"));
        }
        if self.n_r == 0 {
            return Err(Error::invalid("n_r must be at least 1"));
        }
        if let Some(s) = self.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return Err(Error::invalid(format!("invalid SNR {s}")));
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    ///
    /// Keys: `code`, `n_r`, `alphabet` (`pam:Q` or `spherical:Q:SIZE`),
    /// `snr` (comma-separated dB, `inf` allowed), `frames`, `seed`,
    /// `workers`, `grouped` (`true`/`false`).
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::new("", 2, Shaping::Linear { pam: 2 }, Vec::new(), 1000, DEFAULT_SEED);
        let mut have_code = false;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let perr = |message: String| Error::Parse { line: no + 1, message };
            let (key, value) = line.split_once('=').ok_or_else(|| perr(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let int = |v: &str| -> Result<u64> { v.parse().map_err(|_| perr(format!("bad integer `{v}` for `{key}`"))) };
            match key {
                "code" => {
                    cfg.code = value.to_string();
                    have_code = true;
                }
                "n_r" => cfg.n_r = int(value)? as usize,
                "alphabet" => cfg.shaping = Shaping::parse(value).map_err(|e| perr(e.to_string()))?,
                "snr" => cfg.snr_db = parse_snr_list(value).map_err(|e| perr(e.to_string()))?,
                "frames" => cfg.frames = int(value)?,
                "seed" => cfg.seed = int(value)?,
                "workers" => cfg.workers = int(value)? as usize,
                "grouped" => {
                    cfg.grouped = value.parse().map_err(|_| perr(format!("bad boolean `{value}`")))?;
                }
                other => return Err(perr(format!("unknown key `{other}`"))),
            }
        }
        if !have_code {
            return Err(Error::Parse {
                line: 0,
                message: "missing `code`".into(),
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn parse_snr_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().map_err(|_| Error::invalid(format!("bad SNR `{t}`")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub frames: u64,
    pub errors: u64,
    pub bler: f64,
    /// Half-width of the 95% Wilson interval.
    pub ci95: f64,
}

/// 95% Wilson score interval (lower, upper) for `errors` out of `frames`.
pub fn wilson(errors: u64, frames: u64) -> (f64, f64) {
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

impl BlerPoint {
    pub fn new(snr_db: f64, frames: u64, errors: u64) -> Self {
        let (lo, hi) = wilson(errors, frames);
        Self {
            snr_db,
            frames,
            errors,
            bler: errors as f64 / frames as f64,
            ci95: (hi - lo) / 2.0,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson(self.errors, self.frames)
    }
}

/// Per-run quantities echoed into the metadata sidecar.
#[derive(Clone, Debug, PartialEq)]
pub struct SimSummary {
    pub points: Vec<BlerPoint>,
    /// E‖X‖²_F of the unnormalized codebook.
    pub mean_energy: f64,
    /// Factor applied to the code so that E‖X‖²_F / T = 1.
    pub energy_scale: f64,
    pub structure: Option<ComplexityReport>,
}

fn mix(seed: u64, point: u64) -> u64 {
    let mut z = seed ^ point.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum Source {
    Linear(Vec<i64>),
    Book(Vec<Vec<i64>>, HashSet<Vec<i64>>),
}

/// E‖X‖²_F for uniform Q-PAM coefficients: E[g²] · tr(Gram).
pub fn pam_mean_energy(code: &CodeSpec, q: u32) -> f64 {
    let gram = code.gram();
    Constellation::pam_energy(q) * (0..code.k()).map(|i| gram[(i, i)]).sum::<f64>()
}

pub fn run_bler(cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let code = by_name(&cfg.code)?;
    run_bler_with(&code, cfg)
}

pub fn run_bler_with(code: &CodeSpec, cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let (source, alphabet, mean_energy) = match &cfg.shaping {
        Shaping::Linear { pam } => {
            let pts = Constellation::pam_points(*pam);
            (Source::Linear(pts.clone()), pts, pam_mean_energy(code, *pam))
        }
        Shaping::Spherical { pam, size } => {
            let pts = Constellation::pam_points(*pam);
            let words = spherical_codebook(code, &pts, *size)?;
            let mean = words.iter().map(|w| w.energy).sum::<f64>() / words.len() as f64;
            let list: Vec<Vec<i64>> = words.into_iter().map(|w| w.g).collect();
            let set = list.iter().cloned().collect();
            (Source::Book(list, set), pts, mean)
        }
    };
    let energy_scale = (code.t as f64 / mean_energy).sqrt();
    let scaled = code.rescaled(energy_scale);
    let structure = if cfg.grouped && matches!(source, Source::Linear(_)) {
        let mask = discover_pattern(&scaled, cfg.n_r, 20, cfg.seed, 1e-9)?;
        let rep = complexity_estimate(&mask, SplitPolicy::BestPrefix);
        (rep.kappa < rep.k).then_some(rep)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let k = code.k();
    let frame = |point: usize, snr: f64, f: u64| -> Result<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(cfg.seed, point as u64));
        rng.set_stream(f);
        let g: Vec<i64> = match &source {
            Source::Linear(pts) => (0..k).map(|_| pts[rng.random_range(0..pts.len())]).collect(),
            Source::Book(list, _) => list[rng.random_range(0..list.len())].clone(),
        };
        let x = scaled.encode_int(&g)?;
        let h = sample_channel(cfg.n_r, code.n_t, &mut rng);
        let n0 = if snr.is_infinite() { 0.0 } else { 10f64.powf(-snr / 10.0) };
        let noise = sample_gaussian(cfg.n_r, code.t, n0, &mut rng);
        let y = &h.matmul(&x)? + &noise;
        let decoded = match &source {
            Source::Linear(_) => {
                let dec = match SphereDecoder::new(&scaled, &h, &alphabet, structure.as_ref()) {
                    Err(Error::InvalidArgument(_)) if structure.is_some() => SphereDecoder::new(&scaled, &h, &alphabet, None)?,
                    other => other?,
                };
                dec.decode(&y)?
            }
            Source::Book(_, set) => {
                let dec = SphereDecoder::new(&scaled, &h, &alphabet, None)?;
                let member = |c: &[i64]| set.contains(c);
                dec.decode_filtered(&y, Some(&member))?
            }
        };
        Ok(u64::from(decoded.g != g))
    };
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (pi, &snr) in cfg.snr_db.iter().enumerate() {
        let errors = pool.install(|| {
            (0..cfg.frames)
                .into_par_iter()
                .map(|f| frame(pi, snr, f))
                .try_reduce(|| 0, |a, b| Ok(a + b))
        })?;
        points.push(BlerPoint::new(snr, cfg.frames, errors));
    }
    Ok(SimSummary {
        points,
        mean_energy,
        energy_scale,
        structure,
    })
}

pub const CSV_HEADER: &str = "snr_db,frames,errors,bler,ci95";

pub fn to_csv(points: &[BlerPoint]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{},{},{},{},{}", p.snr_db, p.frames, p.errors, p.bler, p.ci95);
    }
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<BlerPoint>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: "missing CSV header".into(),
        });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let perr = |m: &str| Error::Parse {
                line: i + 2,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(perr("expected 5 fields"));
            }
            let num = |v: &str| v.parse::<f64>().map_err(|_| perr("bad number"));
            let int = |v: &str| v.parse::<u64>().map_err(|_| perr("bad integer"));
            Ok(BlerPoint {
                snr_db: num(f[0])?,
                frames: int(f[1])?,
                errors: int(f[2])?,
                bler: num(f[3])?,
                ci95: num(f[4])?,
            })
        })
        .collect()
}

pub fn export_csv(points: &[BlerPoint], dest: &Path) -> Result<()> {
    let mut f = std::fs::File::create(dest)?;
    f.write_all(to_csv(points).as_bytes())?;
    Ok(())
}

/// `key=value` run metadata.
pub fn metadata(cfg: &SimConfig, summary: &SimSummary) -> String {
    let snr: Vec<String> = cfg.snr_db.iter().map(|v| v.to_string()).collect();
    let mut s = String::new();
    let _ = writeln!(s, "version=stbc {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "code={}", cfg.code);
    let _ = writeln!(s, "n_r={}", cfg.n_r);
    let _ = writeln!(s, "alphabet={}", cfg.shaping.label());
    let _ = writeln!(s, "snr={}", snr.join(","));
    let _ = writeln!(s, "frames={}", cfg.frames);
    let _ = writeln!(s, "seed={}", cfg.seed);
    let _ = writeln!(s, "workers={}", cfg.workers);
    let _ = writeln!(s, "grouped={}", cfg.grouped);
    let decoder = match &summary.structure {
        Some(r) => format!("sphere-grouped:{}", r.worst_case()),
        None => "sphere".to_string(),
    };
    let _ = writeln!(s, "decoder={decoder}");
    let _ = writeln!(s, "normalization=mean_energy_per_channel_use=1");
    let _ = writeln!(s, "snr_definition=received_signal_power_per_rx_antenna/noise_variance_per_complex_entry");
    let _ = writeln!(s, "mean_energy_unscaled={}", summary.mean_energy);
    let _ = writeln!(s, "energy_scale={}", summary.energy_scale);
    s
}
