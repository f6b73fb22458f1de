//! Report builders behind the `stbc` subcommands. Each returns the exact
//! text the binary prints, so library callers get byte-identical output.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{
    admissible, algebra_index, delta_bound, lattice_volume, maximal_order_discriminant, min_discriminant_bound,
    z_discriminant, CenterDescriptor, FiniteInvariant, HasseInvariantSet, TableRow, TABLE_ROWS,
};
use crate::codebook::{by_name, datasheet, CODE_NAMES};
use crate::error::{Error, Result};
use crate::fastdecode::{
    complexity_estimate, discover_pattern, exhaustive_ml, predicted_r_zeros, ComplexityReport, SphereDecoder,
    SplitPolicy, EXHAUSTIVE_BUDGET,
};
use crate::lattice::{analyze, fmt_num, SearchConfig, ORTHOGONAL_DELTA_REF};
use crate::sim::{metadata, run_bler, sample_channel, to_csv, Shaping, SimConfig};

pub const DEFAULT_SEED: u64 = 42;
pub const PATTERN_SAMPLES: usize = 200;

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn structure(name: &str, samples: usize, seed: u64, policy: SplitPolicy) -> Result<ComplexityReport> {
    let code = by_name(name)?;
    let mask = discover_pattern(&code, code.n_r, samples, seed, 1e-9)?;
    Ok(complexity_estimate(&mask, policy))
}

pub fn list_codes() -> Result<String> {
    let mut s = String::new();
    for name in CODE_NAMES {
        let code = by_name(name)?;
        let rep = structure(name, 20, DEFAULT_SEED, SplitPolicy::BestPrefix)?;
        let _ = writeln!(
            s,
            "{:<20} n_t={} K={} R1={} kappa={} worst={} nvd={}",
            name,
            code.n_t,
            code.k(),
            code.dimension_rate(),
            rep.kappa,
            rep.worst_case(),
            code.nvd.label()
        );
    }
    Ok(s)
}

pub fn analyze_report(name: &str, range: i64, seed: u64) -> Result<String> {
    let code = by_name(name)?;
    let cfg = SearchConfig {
        seed,
        ..SearchConfig::with_range(range)
    };
    let rep = analyze(&code, &cfg)?;
    Ok(format!("seed {seed}\n{}", rep.render()))
}

pub fn pattern_report(name: &str, samples: usize, seed: u64, policy: SplitPolicy) -> Result<String> {
    let code = by_name(name)?;
    let mask = discover_pattern(&code, code.n_r, samples, seed, 1e-9)?;
    let rep = complexity_estimate(&mask, policy);
    let mut s = String::new();
    let _ = writeln!(s, "code {name}");
    let _ = writeln!(s, "samples {samples}");
    let _ = writeln!(s, "seed {seed}");
    let _ = writeln!(s, "mask");
    s.push_str(&mask.render());
    s.push_str(&rep.render());
    let _ = writeln!(s, "predicted_r_zeros {}", predicted_r_zeros(&mask).len());
    Ok(s)
}

/// Sphere decoder against the exhaustive oracle on seeded noisy trials.
pub fn decode_test_report(name: &str, shaping: &str, trials: u64, seed: u64, snr_db: f64, grouped: bool) -> Result<String> {
    let code = by_name(name)?;
    let q = match Shaping::parse(shaping)? {
        Shaping::Linear { pam } => pam,
        Shaping::Spherical { .. } => return Err(Error::invalid("decode-test takes pam:Q")),
    };
    let alphabet = crate::codebook::Constellation::pam_points(q);
    let rep = if grouped {
        Some(structure(name, 20, seed, SplitPolicy::BestPrefix)?)
    } else {
        None
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n0 = 10f64.powf(-snr_db / 10.0);
    let (mut mismatches, mut argmin_diff, mut visited, mut worst) = (0u64, 0u64, 0u64, 0f64);
    for _ in 0..trials {
        let g: Vec<i64> = (0..code.k()).map(|_| alphabet[rand::Rng::random_range(&mut rng, 0..alphabet.len())]).collect();
        let h = sample_channel(code.n_r, code.n_t, &mut rng);
        let noise = sample_channel(code.n_r, code.t, &mut rng).scale_real(n0.sqrt());
        let y = &h.matmul(&code.encode_int(&g)?)? + &noise;
        let oracle = exhaustive_ml(&code, &y, &h, &alphabet, EXHAUSTIVE_BUDGET)?;
        let dec = SphereDecoder::new(&code, &h, &alphabet, rep.as_ref())?.decode(&y)?;
        let diff = (dec.metric - oracle.metric).abs();
        worst = worst.max(diff);
        if diff > 1e-9 {
            mismatches += 1;
        }
        if dec.g != oracle.g {
            argmin_diff += 1;
        }
        visited += dec.visited;
    }
    let mut s = String::new();
    let _ = writeln!(s, "code {name}");
    let _ = writeln!(s, "alphabet {shaping}");
    let _ = writeln!(s, "trials {trials}");
    let _ = writeln!(s, "seed {seed}");
    let _ = writeln!(s, "snr_db {snr_db}");
    let _ = writeln!(s, "grouped {}", rep.as_ref().map_or("no".into(), |r| r.worst_case()));
    let _ = writeln!(s, "metric_mismatches {mismatches}");
    let _ = writeln!(s, "argmin_mismatches {argmin_diff}");
    let _ = writeln!(s, "max_metric_diff {worst:e}");
    let _ = writeln!(s, "mean_nodes {}", visited as f64 / trials.max(1) as f64);
    Ok(s)
}

/// CSV text and metadata sidecar text of a simulation run.
pub fn simulate(cfg: &SimConfig) -> Result<(String, String)> {
    let summary = run_bler(cfg)?;
    Ok((to_csv(&summary.points), metadata(cfg, &summary)))
}

pub fn bounds_report(center: &str, index: u64, all_real_ramified: bool) -> Result<String> {
    let c = CenterDescriptor::parse(center)?;
    let disc = min_discriminant_bound(&c, index, all_real_ramified)?;
    let z = z_discriminant(&disc.value(), c.disc, index);
    let mut s = String::new();
    let _ = writeln!(s, "center {}", c.name);
    let _ = writeln!(s, "index {index}");
    let _ = writeln!(s, "all_real_ramified {all_real_ramified}");
    let _ = writeln!(s, "min_discriminant {disc}");
    let _ = writeln!(s, "min_discriminant_value {}", disc.value());
    let _ = writeln!(s, "z_discriminant {z}");
    let _ = writeln!(s, "volume {}", fmt_num(lattice_volume(&z)));
    let _ = writeln!(s, "delta_bound {:.6}", delta_bound(&z, index)?);
    let _ = writeln!(s, "orthogonal_reference {}", ORTHOGONAL_DELTA_REF);
    Ok(s)
}

/// Reads lines `finite LABEL NORM A M` and `real COUNT`; `#` comments.
pub fn parse_invariants(text: &str) -> Result<HasseInvariantSet> {
    let mut inv = HasseInvariantSet::default();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let perr = |m: String| Error::Parse { line: no + 1, message: m };
        let f: Vec<&str> = line.split_whitespace().collect();
        let num = |v: &str| v.parse::<u64>().map_err(|_| perr(format!("bad integer `{v}`")));
        match f.as_slice() {
            ["finite", label, norm, a, m] => inv.finite.push(FiniteInvariant::new(label, num(norm)?, num(a)?, num(m)?)),
            ["real", count] => inv.ramified_real = num(count)? as u32,
            _ => return Err(perr(format!("unrecognized line `{line}`"))),
        }
    }
    inv.validate()?;
    Ok(inv)
}

pub fn hasse_report(inv: &HasseInvariantSet) -> Result<String> {
    let mut s = String::new();
    let ok = admissible(inv)?;
    let _ = writeln!(s, "admissible {ok}");
    if ok {
        let n = algebra_index(inv)?;
        let d = maximal_order_discriminant(inv, n)?;
        let _ = writeln!(s, "index {n}");
        let _ = writeln!(s, "discriminant {d}");
        let _ = writeln!(s, "discriminant_value {}", d.value());
    }
    Ok(s)
}

/// Every applicable table row at k, m ∈ {1, 2, 3} with primes of norm 2, 3.
pub fn hasse_table() -> Result<String> {
    let mut s = String::new();
    for row in TABLE_ROWS {
        if row == TableRow::OddIndex {
            let _ = writeln!(s, "{row:?} excluded: odd index cannot ramify at real places");
            continue;
        }
        for k in 1..=3 {
            for m in 1..=3 {
                if !row.applies(k, m) {
                    continue;
                }
                let inv = row.instantiate(k, m, 2, 3)?;
                let n = algebra_index(&inv)?;
                let inv_txt: Vec<String> = inv.finite.iter().map(|p| format!("{}/{}", p.a, p.m)).collect();
                let _ = writeln!(
                    s,
                    "{row:?} k={k} m={m} invariants=[{}] real={} admissible={} index={} expected={}",
                    inv_txt.join(","),
                    inv.ramified_real,
                    admissible(&inv)?,
                    n,
                    row.index(k)
                );
            }
        }
    }
    Ok(s)
}

pub fn datasheet_report(name: &str) -> Result<String> {
    Ok(datasheet(&by_name(name)?))
}

