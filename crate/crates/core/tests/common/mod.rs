//! Invariant checks shared by the property suite and the acceptance run.
//! Each returns `Err` with a description of the first violation.
#![allow(dead_code)]

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stbc::cda::{build_quaternionizer, is_alamouti_blocks, left_regular, quaternionize, CyclicAlgebraSpec};
use stbc::codebook::{by_name, CodeSpec, CODE_NAMES};
use stbc::fastdecode::{
    complexity_estimate, discover_pattern, effective_generator, predicted_r_zeros, r_entry_is_zero, SplitPolicy,
};
use stbc::lattice::{min_det_search, normalized_min_det, SearchConfig};
use stbc::linalg::{det, dot, frob_inner, norm, qr_decompose, realify, ComplexMatrix, RealMatrix, C64};
use stbc::numberfield::{rat, CyclotomicField, FieldElement, GaloisAuto};
use stbc::sim::{run_bler, sample_channel, to_csv, Shaping, SimConfig};

pub type Check = Result<(), String>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> ComplexMatrix {
    sample_channel(rows, cols, r).scale_real(r.random_range(0.1..10.0))
}

pub fn random_real(n: usize, r: &mut ChaCha8Rng) -> RealMatrix {
    RealMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0))
}

pub fn random_element(field: &CyclotomicField, bound: i64, den: i64, r: &mut ChaCha8Rng) -> FieldElement {
    let coords = (0..field.degree())
        .map(|_| rat(r.random_range(-bound..=bound), r.random_range(1..=den)))
        .collect();
    field.element(coords).expect("degree-length coordinates")
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn isometry(seed: u64, count: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..count {
        let x = random_complex(r.random_range(1..7), r.random_range(1..7), &mut r);
        let (a, b) = (x.frob_norm(), norm(&realify(&x)));
        if !rel_close(a, b, 1e-12) {
            return Err(format!("||X||_F = {a} but ||realify(X)|| = {b}"));
        }
    }
    Ok(())
}

pub fn frob_inner_matches_dot(seed: u64, count: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..count {
        let (m, n) = (r.random_range(1..6), r.random_range(1..6));
        let (a, b) = (random_complex(m, n, &mut r), random_complex(m, n, &mut r));
        let ip = frob_inner(&a, &b).map_err(|e| e.to_string())?;
        let d = dot(&realify(&a), &realify(&b));
        if (ip - d).abs() > 1e-12 * a.frob_norm() * b.frob_norm() {
            return Err(format!("frob_inner {ip} vs dot {d}"));
        }
    }
    Ok(())
}

pub fn qr_det_is_diagonal_product(seed: u64, count: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..count {
        let b = random_real(r.random_range(1..9), &mut r);
        let qr = qr_decompose(&b).map_err(|e| e.to_string())?;
        let prod: f64 = (0..b.cols()).map(|i| qr.r[(i, i)].abs()).product();
        let d = b.det().map_err(|e| e.to_string())?.abs();
        if !rel_close(prod, d, 1e-9) {
            return Err(format!("prod R_ii = {prod}, |det B| = {d}"));
        }
    }
    Ok(())
}

pub const FIELDS: [u32; 5] = [4, 5, 20, 7, 8];

pub fn field_axioms(seed: u64, triples: usize) -> Check {
    let mut r = rng(seed);
    for t in 0..triples {
        let f = CyclotomicField::new(FIELDS[t % FIELDS.len()]).map_err(|e| e.to_string())?;
        let x = random_element(&f, 5, 4, &mut r);
        let y = random_element(&f, 5, 4, &mut r);
        let z = random_element(&f, 5, 4, &mut r);
        if &(&x * &y) * &z != &x * &(&y * &z) {
            return Err(format!("associativity fails in Q(zeta_{})", f.conductor()));
        }
        if &x * &(&y + &z) != &(&x * &y) + &(&x * &z) {
            return Err(format!("distributivity fails in Q(zeta_{})", f.conductor()));
        }
        if !x.is_zero() {
            let inv = x.inverse().map_err(|e| e.to_string())?;
            if &x * &inv != f.one() {
                return Err(format!("x * x^-1 != 1 in Q(zeta_{})", f.conductor()));
            }
        }
    }
    Ok(())
}

pub fn embed_is_homomorphism(seed: u64, count: usize) -> Check {
    let mut r = rng(seed);
    for t in 0..count {
        let f = CyclotomicField::new(FIELDS[t % FIELDS.len()]).map_err(|e| e.to_string())?;
        let m = f.conductor() as i64;
        let x = random_element(&f, 5, 3, &mut r);
        let y = random_element(&f, 5, 3, &mut r);
        let xy = &x * &y;
        for j in (1..m).filter(|j| num_integer::gcd(*j, m) == 1) {
            let (lhs, rhs) = (xy.embed(j), x.embed(j) * y.embed(j));
            if (lhs - rhs).norm() > 1e-10 * rhs.norm().max(1.0) {
                return Err(format!("embed_{j}(xy) = {lhs} vs {rhs} in Q(zeta_{m})"));
            }
        }
    }
    Ok(())
}

/// The σ used with each field by the shipped codes.
pub fn designated_sigma(m: u32) -> (CyclotomicField, GaloisAuto) {
    let f = CyclotomicField::new(m).expect("supported conductor");
    let k = match m {
        4 | 8 => m as i64 - 1,
        5 | 7 => 3,
        20 => 17,
        _ => panic!("no designated sigma for m = {m}"),
    };
    let s = GaloisAuto::new(&f, k).expect("unit exponent");
    (f, s)
}

/// `embed(σ^{n/2}(x)) = conj(embed(x))` for field `m`.
pub fn half_power_conjugates(m: u32, seed: u64, count: usize) -> Check {
    let (f, s) = designated_sigma(m);
    let half = s.pow(s.order() / 2);
    let mut r = rng(seed);
    for _ in 0..count {
        let x = random_element(&f, 4, 3, &mut r);
        let (a, b) = (half.apply(&x).to_complex(), x.to_complex().conj());
        if (a - b).norm() > 1e-10 * b.norm().max(1.0) {
            return Err(format!(
                "Q(zeta_{m}), sigma = zeta^{}: sigma^{}(x) = {a}, conj(x) = {b}",
                s.exponent(),
                s.order() / 2
            ));
        }
    }
    Ok(())
}

fn power_traces(x: &ComplexMatrix) -> Vec<C64> {
    let mut p = x.clone();
    let mut out = vec![p.trace()];
    for _ in 1..x.rows() {
        p = &p * x;
        out.push(p.trace());
    }
    out
}

/// Quaternionizing preserves the spectrum: traces of X^k agree for k ≤ n,
/// which fixes the eigenvalue multiset.
pub fn quaternionize_is_similarity(seed: u64, count: usize) -> Check {
    let mut r = rng(seed);
    for _ in 0..count {
        let gamma = rat(-r.random_range(1..20), r.random_range(1..10));
        let q = build_quaternionizer(4, &gamma).map_err(|e| e.to_string())?;
        let x = random_complex(4, 4, &mut r);
        let y = quaternionize(&x, &q).map_err(|e| e.to_string())?;
        let s = x.frob_norm();
        for (k, (a, b)) in power_traces(&x).iter().zip(power_traces(&y)).enumerate() {
            if (a - b).norm() > 1e-8 * s.powi(k as i32 + 1) {
                return Err(format!("tr X^{} = {a} but tr Y^{} = {b}", k + 1, k + 1));
            }
        }
    }
    Ok(())
}

pub fn quaternionized_left_regular_is_alamouti(alg: &CyclicAlgebraSpec, seed: u64, count: usize) -> Check {
    let q = build_quaternionizer(alg.n, &alg.gamma).map_err(|e| e.to_string())?;
    let mut r = rng(seed);
    for _ in 0..count {
        let x: Vec<FieldElement> = (0..alg.n).map(|_| random_element(&alg.field, 3, 1, &mut r)).collect();
        let l = left_regular(alg, &x).map_err(|e| e.to_string())?;
        let y = quaternionize(&l, &q).map_err(|e| e.to_string())?;
        if !is_alamouti_blocks(&y, 1e-9).map_err(|e| e.to_string())? {
            return Err(format!("n = {} gamma = {}: block form fails for {x:?}", alg.n, alg.gamma));
        }
    }
    Ok(())
}

pub fn grams_positive_definite() -> Check {
    for name in CODE_NAMES {
        let code = by_name(name).map_err(|e| e.to_string())?;
        let d = code.gram().det().map_err(|e| e.to_string())?;
        if d <= 0.0 {
            return Err(format!("{name}: Gram determinant {d}"));
        }
    }
    Ok(())
}

/// Random integer codewords of `name` all have 2x2 Alamouti blocks.
pub fn codewords_are_quaternionic(name: &str, seed: u64, count: usize) -> Check {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let mut r = rng(seed);
    for _ in 0..count {
        let g: Vec<i64> = (0..code.k()).map(|_| r.random_range(-3..=3)).collect();
        let x = code.encode_int(&g).map_err(|e| e.to_string())?;
        if !is_alamouti_blocks(&x, 1e-9).map_err(|e| e.to_string())? {
            return Err(format!("{name}: codeword for g = {g:?} is not in Alamouti block form"));
        }
    }
    Ok(())
}

pub fn dimension_rates() -> Check {
    for (name, rate) in [
        ("mido_a4_integral", 4.0),
        ("mido_c1", 4.0),
        ("mido_c2", 4.0),
        ("mido_c3", 4.0),
        ("code_6x3", 6.0),
        ("code_6x2", 4.0),
    ] {
        let got = by_name(name).map_err(|e| e.to_string())?.dimension_rate();
        if got != rate {
            return Err(format!("{name}: rate {got}, expected {rate}"));
        }
    }
    Ok(())
}

pub fn c1_full_diversity(seed: u64, count: usize) -> Check {
    let code = by_name("mido_c1").map_err(|e| e.to_string())?;
    let mut r = rng(seed);
    for _ in 0..count {
        let g: Vec<i64> = (0..16).map(|_| r.random_range(-2..=2)).collect();
        if g.iter().all(|v| *v == 0) {
            continue;
        }
        let x = code.encode_int(&g).map_err(|e| e.to_string())?;
        let d = det(&x).map_err(|e| e.to_string())?.norm();
        if stbc::linalg::is_zero(d, x.frob_norm().powi(4)) {
            return Err(format!("mido_c1: zero determinant at g = {g:?}"));
        }
    }
    Ok(())
}

fn small_search(seed: u64) -> SearchConfig {
    SearchConfig {
        random_samples: 20_000,
        seed,
        ..SearchConfig::with_range(1)
    }
}

pub fn delta_scale_invariant(name: &str, seed: u64) -> Check {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let cfg = small_search(seed);
    let base = normalized_min_det(&code, min_det_search(&code, &cfg).map_err(|e| e.to_string())?.mindet)
        .map_err(|e| e.to_string())?;
    for s in [0.5, 2.0, 5f64.sqrt()] {
        let scaled = code.rescaled(s);
        let md = min_det_search(&scaled, &cfg).map_err(|e| e.to_string())?.mindet;
        let d = normalized_min_det(&scaled, md).map_err(|e| e.to_string())?;
        if (d - base).abs() >= 1e-9 {
            return Err(format!("{name}: delta {base} becomes {d} at scale x{s}"));
        }
    }
    Ok(())
}

/// The code with every basis matrix conjugated by the quaternionizer.
pub fn conjugated(code: &CodeSpec, gamma: &BigRational) -> CodeSpec {
    let q = build_quaternionizer(code.n_t, gamma).expect("even n_t, negative gamma");
    let basis = code.basis.iter().map(|b| quaternionize(b, &q).expect("square")).collect();
    CodeSpec::new(&format!("{}_conj", code.name), basis, code.scale, code.n_r).expect("similar basis is independent")
}

pub fn mindet_similarity_invariant(name: &str, seed: u64) -> Check {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let conj = conjugated(&code, &rat(-8, 9));
    let cfg = small_search(seed);
    let a = min_det_search(&code, &cfg).map_err(|e| e.to_string())?;
    let b = min_det_search(&conj, &cfg).map_err(|e| e.to_string())?;
    if !rel_close(a.mindet, b.mindet, 1e-9) {
        return Err(format!("{name}: mindet {} vs {} after conjugation", a.mindet, b.mindet));
    }
    let v = conj.gram().cholesky_upper().map_err(|e| e.to_string())?;
    let vol: f64 = (0..conj.k()).map(|i| v[(i, i)]).product();
    let lv = stbc::lattice::volume(&conj).map_err(|e| e.to_string())?;
    if !rel_close(vol, lv, 1e-9) {
        return Err(format!("{name}: conjugated volume {lv} vs {vol} from its basis"));
    }
    Ok(())
}

/// Every R entry predicted zero by the mask is zero in fresh channels.
pub fn mask_predicts_r_zeros(name: &str, seed: u64, channels: usize) -> Check {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let mask = discover_pattern(&code, code.n_r, 200, seed, 1e-9).map_err(|e| e.to_string())?;
    let zeros = predicted_r_zeros(&mask);
    let mut r = rng(seed ^ 0xA5A5);
    for _ in 0..channels {
        let h = sample_channel(code.n_r, code.n_t, &mut r);
        let b = effective_generator(&code, &h).map_err(|e| e.to_string())?;
        let qr = qr_decompose(&b).map_err(|e| e.to_string())?;
        if let Some((i, j)) = zeros.iter().find(|(i, j)| !r_entry_is_zero(&qr.r, *i, *j, 1e-8)) {
            return Err(format!("{name}: R[{i}][{j}] = {} predicted zero", qr.r[(*i, *j)]));
        }
    }
    Ok(())
}

pub fn kappa_of(name: &str, seed: u64) -> Result<usize, String> {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let mask = discover_pattern(&code, code.n_r, 200, seed, 1e-9).map_err(|e| e.to_string())?;
    Ok(complexity_estimate(&mask, SplitPolicy::BestPrefix).kappa)
}

pub fn puncturing_never_increases_kappa(seed: u64) -> Check {
    let (full, punct) = (kappa_of("code_6x3", seed)?, kappa_of("code_6x2", seed)?);
    if punct > full {
        return Err(format!("kappa 6x3 = {full} < 6x2 = {punct}"));
    }
    Ok(())
}

pub fn sim_deterministic(name: &str, seed: u64) -> Check {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let mk = |workers| {
        let mut cfg = SimConfig::new(name, code.n_r, Shaping::Linear { pam: 2 }, vec![4.0, 10.0], 300, seed);
        cfg.workers = workers;
        run_bler(&cfg).map(|s| to_csv(&s.points)).map_err(|e| e.to_string())
    };
    let (a, b, c) = (mk(1)?, mk(3)?, mk(1)?);
    if a != b || a != c {
        return Err(format!("{name}: CSV differs across runs or worker counts"));
    }
    Ok(())
}

fn bler_points(name: &str, snr: &[f64], frames: u64, seed: u64) -> Result<Vec<stbc::sim::BlerPoint>, String> {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(name, code.n_r, Shaping::Linear { pam: 2 }, snr.to_vec(), frames, seed);
    Ok(run_bler(&cfg).map_err(|e| e.to_string())?.points)
}

/// Each step down the SNR grid lowers BLER with disjoint Wilson intervals.
pub fn bler_strictly_decreasing(points: &[stbc::sim::BlerPoint]) -> Check {
    for w in points.windows(2) {
        if w[1].interval().1 >= w[0].interval().0 {
            return Err(format!(
                "BLER {} at {} dB and {} at {} dB have overlapping intervals",
                w[0].bler, w[0].snr_db, w[1].bler, w[1].snr_db
            ));
        }
    }
    Ok(())
}

/// No step up the SNR grid raises BLER beyond interval overlap.
pub fn bler_nonincreasing(name: &str, snr: &[f64], frames: u64, seed: u64) -> Check {
    let pts = bler_points(name, snr, frames, seed)?;
    for w in pts.windows(2) {
        if w[1].interval().0 > w[0].interval().1 {
            return Err(format!(
                "{name}: BLER rises from {} at {} dB to {} at {} dB",
                w[0].bler, w[0].snr_db, w[1].bler, w[1].snr_db
            ));
        }
    }
    Ok(())
}

/// E‖X‖²_F / T after the simulator's scaling is exactly 1; the mean is
/// enumerated over all 2-PAM words when K ≤ 16.
pub fn energy_normalized(name: &str) -> Check {
    let code = by_name(name).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(name, code.n_r, Shaping::Linear { pam: 2 }, vec![f64::INFINITY], 1, 1);
    let summary = run_bler(&cfg).map_err(|e| e.to_string())?;
    let per_use = summary.energy_scale.powi(2) * summary.mean_energy / code.t as f64;
    if (per_use - 1.0).abs() > 1e-9 {
        return Err(format!("{name}: normalized energy per channel use {per_use}"));
    }
    let k = code.k();
    if k <= 16 {
        let basis = code.scaled_basis();
        let total: f64 = (0u32..1 << k)
            .map(|bits| {
                let mut x = ComplexMatrix::zeros(code.n_t, code.t);
                for (i, b) in basis.iter().enumerate() {
                    x.axpy(if bits >> i & 1 == 1 { 1.0 } else { -1.0 }, b).expect("same shape");
                }
                x.frob_norm_sqr()
            })
            .sum();
        let mean = total / (1u64 << k) as f64;
        if !rel_close(mean, summary.mean_energy, 1e-9) {
            return Err(format!("{name}: enumerated mean {mean} vs {}", summary.mean_energy));
        }
    }
    Ok(())
}

pub fn delta_bound_monotone() -> Check {
    use num_bigint::BigUint;
    use stbc::bounds::delta_bound;
    let zs: Vec<BigUint> = [2u64, 10, 1000, 6u64.pow(12), 1 << 62].iter().map(|z| BigUint::from(*z)).collect();
    for n in [2u64, 4, 6] {
        let d: Vec<f64> = zs.iter().map(|z| delta_bound(z, n)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        if d.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("delta_bound not decreasing in z_disc at n = {n}: {d:?}"));
        }
    }
    for z in &zs {
        let d: Vec<f64> = [8u64, 6, 4, 2].iter().map(|n| delta_bound(z, *n)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
        if d.windows(2).any(|w| w[1] >= w[0]) {
            return Err(format!("delta_bound not decreasing in 1/n at z = {z}: {d:?}"));
        }
    }
    Ok(())
}

pub fn min_disc_matches_table() -> Check {
    use stbc::bounds::{maximal_order_discriminant, min_discriminant_bound, CenterDescriptor, TableRow};
    let bound = min_discriminant_bound(&CenterDescriptor::rationals(), 4, true).map_err(|e| e.to_string())?;
    let inv = TableRow::FourKOddDegree.instantiate(1, 1, 2, 3).map_err(|e| e.to_string())?;
    let table = maximal_order_discriminant(&inv, 4).map_err(|e| e.to_string())?;
    if bound.value() != table.value() {
        return Err(format!("bound {bound} vs table discriminant {table}"));
    }
    Ok(())
}
