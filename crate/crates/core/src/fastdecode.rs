//! Fast decodability: effective real generator `B = (α(HB_1), …, α(HB_K))`,
//! the persistent orthogonality mask, the grouped worst-case exponent κ, and
//! an exact ML sphere decoder with an exhaustive oracle.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codebook::CodeSpec;
use crate::error::{Error, Result};
use crate::linalg::{frob_inner, qr_decompose, realify, ComplexMatrix, RealMatrix};
use crate::sim::sample_channel;

/// Columns `realify(H · scale · B_i)` in basis order.
pub fn effective_generator(code: &CodeSpec, h: &ComplexMatrix) -> Result<RealMatrix> {
    if h.cols() != code.n_t {
        return Err(Error::shape(format!("n_r x {}", code.n_t), format!("{:?}", h.shape())));
    }
    let cols = code
        .scaled_basis()
        .iter()
        .map(|b| h.matmul(b).map(|hb| realify(&hb)))
        .collect::<Result<Vec<_>>>()?;
    RealMatrix::from_columns(&cols)
}

/// Symmetric K×K mask; `get(i, j)` is true when `HB_i ⟂ HB_j` for every sampled H.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthoMask {
    k: usize,
    bits: Vec<bool>,
}

impl OrthoMask {
    pub fn from_fn(k: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut bits = vec![false; k * k];
        for i in 0..k {
            for j in 0..k {
                bits[i * k + j] = i != j && f(i, j) && f(j, i);
            }
        }
        Self { k, bits }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.k + j]
    }

    /// Rows of 0/1, 1 meaning persistent orthogonality.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for i in 0..self.k {
            let row: Vec<&str> = (0..self.k).map(|j| if self.get(i, j) { "1" } else { "0" }).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// Connected components of the non-orthogonality graph restricted to `idx`,
    /// each sorted, ordered by smallest member.
    pub fn components(&self, idx: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.k];
        let mut out = Vec::new();
        for &s in idx {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![s];
            let mut comp = Vec::new();
            while let Some(a) = stack.pop() {
                comp.push(a);
                for &b in idx {
                    if !seen[b] && !self.get(a, b) {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Intersection over `samples` random channels (n_r × n_t, seeded) of the
/// pairs with `|Re Tr(HB_i (HB_j)†)| ≤ tol · ‖HB_i‖ ‖HB_j‖`.
pub fn discover_pattern(code: &CodeSpec, n_r: usize, samples: usize, seed: u64, tol: f64) -> Result<OrthoMask> {
    if samples == 0 || n_r == 0 {
        return Err(Error::invalid("need at least one sample and one receive antenna"));
    }
    let k = code.k();
    let mut keep = vec![true; k * k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = code.scaled_basis();
    for _ in 0..samples {
        let h = sample_channel(n_r, code.n_t, &mut rng);
        let hb: Vec<ComplexMatrix> = basis.iter().map(|b| h.matmul(b)).collect::<Result<_>>()?;
        let norms: Vec<f64> = hb.iter().map(ComplexMatrix::frob_norm).collect();
        for i in 0..k {
            for j in i + 1..k {
                if keep[i * k + j] {
                    let v = frob_inner(&hb[i], &hb[j])?;
                    if v.abs() > tol * norms[i] * norms[j] {
                        keep[i * k + j] = false;
                        keep[j * k + i] = false;
                    }
                }
            }
        }
    }
    Ok(OrthoMask::from_fn(k, |i, j| keep[i * k + j]))
}

/// How the conditioned tail is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitPolicy {
    /// No tail when the mask already splits; otherwise the head prefix
    /// minimizing tail size plus largest head group.
    BestPrefix,
    /// Tail = trailing K/2 symbols.
    HalfTail,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexityReport {
    pub k: usize,
    /// The tail is `tail_start..k`.
    pub tail_start: usize,
    pub groups: Vec<Vec<usize>>,
    pub kappa: usize,
}

impl ComplexityReport {
    pub fn tail_size(&self) -> usize {
        self.k - self.tail_start
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// `(group count)|S|^κ`.
    pub fn worst_case(&self) -> String {
        format!("{}|S|^{}", self.group_count(), self.kappa)
    }

    /// Percentage reduction of the exponent relative to K.
    pub fn reduction_percent(&self) -> f64 {
        100.0 * (self.k - self.kappa) as f64 / self.k as f64
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "k {}", self.k);
        let _ = writeln!(s, "tail {}", self.tail_size());
        let _ = writeln!(s, "groups {}", self.group_count());
        for g in &self.groups {
            let idx: Vec<String> = g.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(s, "group {}", idx.join(","));
        }
        let _ = writeln!(s, "kappa {}", self.kappa);
        let _ = writeln!(s, "worst_case {}", self.worst_case());
        let _ = writeln!(s, "reduction {:.2}%", self.reduction_percent());
        s
    }
}

fn unstructured(k: usize) -> ComplexityReport {
    ComplexityReport {
        k,
        tail_start: k,
        groups: vec![(0..k).collect()],
        kappa: k,
    }
}

pub fn complexity_estimate(mask: &OrthoMask, policy: SplitPolicy) -> ComplexityReport {
    let k = mask.k();
    if k == 0 {
        return unstructured(0);
    }
    let all: Vec<usize> = (0..k).collect();
    let whole = mask.components(&all);
    let split = |p: usize| -> Option<ComplexityReport> {
        let head: Vec<usize> = (0..p).collect();
        let groups = mask.components(&head);
        if groups.len() < 2 {
            return None;
        }
        let largest = groups.iter().map(Vec::len).max().unwrap_or(0);
        Some(ComplexityReport {
            k,
            tail_start: p,
            kappa: (k - p) + largest,
            groups,
        })
    };
    match policy {
        SplitPolicy::BestPrefix => {
            if whole.len() >= 2 {
                let largest = whole.iter().map(Vec::len).max().unwrap_or(0);
                return ComplexityReport {
                    k,
                    tail_start: k,
                    groups: whole,
                    kappa: largest,
                };
            }
            let mut best: Option<ComplexityReport> = None;
            for p in 2..k {
                if let Some(r) = split(p) {
                    let better = match &best {
                        None => true,
                        Some(b) => r.kappa < b.kappa || (r.kappa == b.kappa && r.groups.len() > b.groups.len()),
                    };
                    if better {
                        best = Some(r);
                    }
                }
            }
            best.unwrap_or_else(|| unstructured(k))
        }
        SplitPolicy::HalfTail => split(k - k / 2).unwrap_or_else(|| unstructured(k)),
    }
}

/// Pairs i < j with `R_ij = 0` for every channel: b_j is orthogonal to
/// b_0, …, b_i.
pub fn predicted_r_zeros(mask: &OrthoMask) -> Vec<(usize, usize)> {
    let k = mask.k();
    let mut out = Vec::new();
    for j in 0..k {
        for i in 0..j {
            if mask.get(i, j) {
                out.push((i, j));
            } else {
                break;
            }
        }
    }
    out
}

/// Result of a decode: coefficients and `‖y − HX(g)‖²_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub g: Vec<i64>,
    pub metric: f64,
    /// Tree nodes (sphere decoder) or candidates (exhaustive) visited.
    pub visited: u64,
}

fn tie_eps(best: f64) -> f64 {
    if best.is_finite() {
        1e-10 * (1.0 + best)
    } else {
        0.0
    }
}

/// Whether candidate (m, g) beats the current best under the
/// metric-then-lexicographic order.
fn improves(m: f64, g: &[i64], best: &Option<(f64, Vec<i64>)>) -> bool {
    match best {
        None => true,
        Some((bm, bg)) => {
            let eps = tie_eps(*bm);
            m < bm - eps || ((m - bm).abs() <= eps && g < bg.as_slice())
        }
    }
}

type Leaf<'a> = dyn FnMut(&[i64], f64, f64) -> Option<(f64, Vec<i64>)> + 'a;

/// Prepared decoder for one channel realization.
pub struct SphereDecoder {
    b: RealMatrix,
    q: RealMatrix,
    r: RealMatrix,
    alphabet: Vec<i64>,
    structure: Option<ComplexityReport>,
    k: usize,
}

impl SphereDecoder {
    /// `structure` enables the grouped search; it must be valid for `code`
    /// (cross-group entries of R vanish), which is checked for this H.
    pub fn new(code: &CodeSpec, h: &ComplexMatrix, alphabet: &[i64], structure: Option<&ComplexityReport>) -> Result<Self> {
        let mut alpha = alphabet.to_vec();
        alpha.sort_unstable();
        alpha.dedup();
        if alpha.is_empty() {
            return Err(Error::invalid("empty alphabet"));
        }
        let b = effective_generator(code, h)?;
        let qr = qr_decompose(&b)?;
        let k = code.k();
        if let Some(s) = structure {
            if s.k != k {
                return Err(Error::shape(k, s.k));
            }
            for (a, ga) in s.groups.iter().enumerate() {
                for gb in &s.groups[a + 1..] {
                    for &i in ga {
                        for &j in gb {
                            let (lo, hi) = (i.min(j), i.max(j));
                            let scale = qr.r[(lo, lo)].abs() + qr.r[(hi, hi)].abs();
                            if qr.r[(lo, hi)].abs() > 1e-8 * scale {
                                return Err(Error::invalid(format!(
                                    "grouping does not decouple R at ({}, {})",
                                    lo + 1,
                                    hi + 1
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(Self {
            b,
            q: qr.q,
            r: qr.r,
            alphabet: alpha,
            structure: structure.cloned(),
            k,
        })
    }

    /// ‖y − B g‖² evaluated directly.
    pub fn metric(&self, y: &[f64], g: &[i64]) -> f64 {
        let gf: Vec<f64> = g.iter().map(|&v| v as f64).collect();
        let bg = self.b.mul_vec(&gf).expect("K columns");
        y.iter().zip(&bg).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn rec(
        &self,
        rows: &[usize],
        level: usize,
        target: &[f64],
        partial: f64,
        g: &mut Vec<i64>,
        best: &mut Option<(f64, Vec<i64>)>,
        leaf: &mut Leaf<'_>,
        visited: &mut u64,
    ) {
        let i = rows[level];
        let mut off = target[i];
        for &j in &rows[level + 1..] {
            off -= self.r[(i, j)] * g[j] as f64;
        }
        let rii = self.r[(i, i)];
        let c = off / rii;
        let mut order: Vec<i64> = self.alphabet.clone();
        order.sort_by(|a, b| (*a as f64 - c).abs().total_cmp(&(*b as f64 - c).abs()).then(a.cmp(b)));
        for a in order {
            let d = rii * (c - a as f64);
            let p = partial + d * d;
            let radius = best.as_ref().map_or(f64::INFINITY, |b| b.0);
            if p > radius + tie_eps(radius) {
                break;
            }
            g[i] = a;
            *visited += 1;
            if level == 0 {
                if let Some((m, full)) = leaf(g, p, radius) {
                    if improves(m, &full, best) {
                        *best = Some((m, full));
                    }
                }
            } else {
                self.rec(rows, level - 1, target, p, g, best, leaf, visited);
            }
        }
    }

    fn search(&self, rows: &[usize], target: &[f64], g: &mut Vec<i64>, radius: f64, leaf: &mut Leaf<'_>, visited: &mut u64) -> Option<(f64, Vec<i64>)> {
        if rows.is_empty() {
            return leaf(g, 0.0, radius);
        }
        // A sentinel best bounds the search when a radius is imposed from outside.
        let mut best = if radius.is_finite() {
            Some((radius, vec![i64::MAX; g.len()]))
        } else {
            None
        };
        self.rec(rows, rows.len() - 1, target, 0.0, g, &mut best, leaf, visited);
        best.filter(|(_, bg)| bg.first() != Some(&i64::MAX) || bg.is_empty())
    }

    /// ML decision for the received matrix `y` (n_r × T). With `accept`,
    /// only coefficient vectors it admits are considered (full search).
    pub fn decode_filtered(&self, y: &ComplexMatrix, accept: Option<&dyn Fn(&[i64]) -> bool>) -> Result<Decoded> {
        let yv = realify(y);
        if yv.len() != self.b.rows() {
            return Err(Error::shape(self.b.rows() / 2, yv.len() / 2));
        }
        let z = self.q.tmul_vec(&yv)?;
        let k = self.k;
        let mut g = vec![0i64; k];
        let mut visited = 0u64;
        let found = match (&self.structure, accept) {
            (Some(s), None) => self.grouped(s, &z, &mut g, &mut visited),
            (_, acc) => {
                let rows: Vec<usize> = (0..k).collect();
                let mut leaf = |g: &[i64], p: f64, _: f64| match acc {
                    Some(f) if !f(g) => None,
                    _ => Some((p, g.to_vec())),
                };
                self.search(&rows, &z, &mut g, f64::INFINITY, &mut leaf, &mut visited)
            }
        };
        let (_, g) = found.ok_or_else(|| Error::invalid("no admissible codeword"))?;
        let metric = self.metric(&yv, &g);
        Ok(Decoded { g, metric, visited })
    }

    pub fn decode(&self, y: &ComplexMatrix) -> Result<Decoded> {
        self.decode_filtered(y, None)
    }

    /// Enumerate the tail rows; at each tail leaf solve every head group on
    /// its own triangular block.
    fn grouped(&self, s: &ComplexityReport, z: &[f64], g: &mut Vec<i64>, visited: &mut u64) -> Option<(f64, Vec<i64>)> {
        let k = self.k;
        let tail: Vec<usize> = (s.tail_start..k).collect();
        let head_count = s.tail_start;
        let mut group_visits = 0u64;
        let found = {
            let mut leaf = |gt: &[i64], d_tail: f64, radius: f64| -> Option<(f64, Vec<i64>)> {
                let mut target = z.to_vec();
                for i in 0..head_count {
                    for &t in &tail {
                        target[i] -= self.r[(i, t)] * gt[t] as f64;
                    }
                }
                let mut full = gt.to_vec();
                let mut total = d_tail;
                for grp in &s.groups {
                    let left = radius - total;
                    let mut gl = full.clone();
                    let mut id = |g: &[i64], p: f64, _: f64| Some((p, g.to_vec()));
                    let (m, gg) = self.search(grp, &target, &mut gl, left, &mut id, &mut group_visits)?;
                    for &i in grp {
                        full[i] = gg[i];
                    }
                    total += m;
                }
                Some((total, full))
            };
            if tail.is_empty() {
                leaf(g, 0.0, f64::INFINITY)
            } else {
                self.search(&tail, z, g, f64::INFINITY, &mut leaf, visited)
            }
        };
        *visited += group_visits;
        found
    }
}

/// One-shot sphere decode; `structure` enables the grouped search.
pub fn sphere_decode(
    code: &CodeSpec,
    y: &ComplexMatrix,
    h: &ComplexMatrix,
    alphabet: &[i64],
    structure: Option<&ComplexityReport>,
) -> Result<Decoded> {
    SphereDecoder::new(code, h, alphabet, structure)?.decode(y)
}

pub const EXHAUSTIVE_BUDGET: u128 = 1 << 24;

/// Global minimizer of `‖y − HX(g)‖²` over alphabet^K by lexicographic
/// enumeration (last coordinate fastest); ties keep the earlier g.
pub fn exhaustive_ml(code: &CodeSpec, y: &ComplexMatrix, h: &ComplexMatrix, alphabet: &[i64], budget: u128) -> Result<Decoded> {
    let mut alpha = alphabet.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    if alpha.is_empty() {
        return Err(Error::invalid("empty alphabet"));
    }
    let k = code.k();
    let needed = (alpha.len() as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let b = effective_generator(code, h)?;
    let yv = realify(y);
    if yv.len() != b.rows() {
        return Err(Error::shape(b.rows() / 2, yv.len() / 2));
    }
    let cols: Vec<Vec<f64>> = (0..k).map(|j| b.column(j)).collect();
    let mut digits = vec![0usize; k];
    let mut g: Vec<i64> = vec![alpha[0]; k];
    let mut res: Vec<f64> = yv.clone();
    for (j, col) in cols.iter().enumerate() {
        for (r, c) in res.iter_mut().zip(col) {
            *r -= g[j] as f64 * c;
        }
    }
    let mut best = (f64::INFINITY, g.clone());
    let mut visited = 0u64;
    loop {
        visited += 1;
        let m: f64 = res.iter().map(|v| v * v).sum();
        if m < best.0 - tie_eps(best.0) {
            best = (m, g.clone());
        }
        let mut pos = k;
        loop {
            if pos == 0 {
                let metric = best.0;
                return Ok(Decoded {
                    g: best.1,
                    metric,
                    visited,
                });
            }
            pos -= 1;
            let old = g[pos];
            let (nd, wrapped) = if digits[pos] + 1 == alpha.len() { (0, true) } else { (digits[pos] + 1, false) };
            digits[pos] = nd;
            g[pos] = alpha[nd];
            let delta = (g[pos] - old) as f64;
            for (r, c) in res.iter_mut().zip(&cols[pos]) {
                *r -= delta * c;
            }
            if !wrapped {
                break;
            }
        }
    }
}

/// `‖y − H X(g)‖²_F` computed from the codeword.
pub fn codeword_metric(code: &CodeSpec, y: &ComplexMatrix, h: &ComplexMatrix, g: &[i64]) -> Result<f64> {
    let x = code.encode_int(g)?;
    let d = y - &h.matmul(&x)?;
    Ok(d.frob_norm_sqr())
}

/// `|R_ij| ≤ tol · max(|R_ii|, |R_jj|)`.
pub fn r_entry_is_zero(r: &RealMatrix, i: usize, j: usize, tol: f64) -> bool {
    r[(i, j)].abs() <= tol * r[(i, i)].abs().max(r[(j, j)].abs())
}
