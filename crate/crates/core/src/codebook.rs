//! Space-time lattice codes as ordered lists of real-linear basis
//! (dispersion) matrices, encoding, spherical shaping and datasheet export.
//!
//! The order of `basis` is part of each code's contract: the QR zero
//! pattern, and therefore the decoding complexity, depends on it.

use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{frob_inner, ComplexMatrix, RealMatrix, C64};
use crate::numberfield::{int, rat, CyclotomicField, FieldElement, GaloisAuto};

/// Non-vanishing determinant status of a shipped code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nvd {
    Yes,
    /// NVD holds after the documented rescaling.
    Scaled(&'static str),
    No,
}

impl Nvd {
    pub fn label(&self) -> String {
        match self {
            Nvd::Yes => "yes".into(),
            Nvd::Scaled(s) => format!("yes({s})"),
            Nvd::No => "no".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub name: String,
    pub n_t: usize,
    pub t: usize,
    /// Unscaled basis matrices; codewords are `scale · Σ g_i B_i`.
    pub basis: Vec<ComplexMatrix>,
    pub scale: f64,
    /// Receive antennas the code is designed for.
    pub n_r: usize,
    pub nvd: Nvd,
    pub notes: String,
}

impl CodeSpec {
    pub fn new(name: &str, basis: Vec<ComplexMatrix>, scale: f64, n_r: usize) -> Result<Self> {
        let first = basis.first().ok_or_else(|| Error::invalid("code needs at least one basis matrix"))?;
        let (n_t, t) = first.shape();
        if let Some(b) = basis.iter().find(|b| b.shape() != (n_t, t)) {
            return Err(Error::shape(format!("{n_t}x{t}"), format!("{:?}", b.shape())));
        }
        if basis.len() > 2 * n_t * t {
            return Err(Error::invalid(format!("K = {} exceeds 2·n_t·T = {}", basis.len(), 2 * n_t * t)));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(format!("scale {scale} must be positive")));
        }
        Ok(Self {
            name: name.to_string(),
            n_t,
            t,
            basis,
            scale,
            n_r,
            nvd: Nvd::Yes,
            notes: String::new(),
        })
    }

    fn with(mut self, nvd: Nvd, notes: &str) -> Self {
        self.nvd = nvd;
        self.notes = notes.to_string();
        self
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// Real dimensions per channel use, K / T.
    pub fn dimension_rate(&self) -> f64 {
        self.k() as f64 / self.t as f64
    }

    pub fn scaled_basis(&self) -> Vec<ComplexMatrix> {
        self.basis.iter().map(|b| b.scale_real(self.scale)).collect()
    }

    /// The same code with `scale` multiplied by `s`.
    pub fn rescaled(&self, s: f64) -> Self {
        let mut c = self.clone();
        c.scale *= s;
        c
    }

    /// Keeps the basis matrices whose 0-based index is not in `drop`.
    pub fn puncture(&self, name: &str, drop: &[usize]) -> Result<Self> {
        if let Some(&i) = drop.iter().find(|&&i| i >= self.k()) {
            return Err(Error::invalid(format!("puncture index {i} out of range")));
        }
        let basis = self
            .basis
            .iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, b)| b.clone())
            .collect();
        let mut c = Self::new(name, basis, self.scale, self.n_r)?;
        c.nvd = self.nvd;
        Ok(c)
    }

    pub fn encode(&self, g: &[f64]) -> Result<ComplexMatrix> {
        if g.len() != self.k() {
            return Err(Error::shape(self.k(), g.len()));
        }
        let mut x = ComplexMatrix::zeros(self.n_t, self.t);
        for (gi, b) in g.iter().zip(&self.basis) {
            if *gi != 0.0 {
                x.axpy(*gi, b)?;
            }
        }
        Ok(x.scale_real(self.scale))
    }

    pub fn encode_int(&self, g: &[i64]) -> Result<ComplexMatrix> {
        self.encode(&g.iter().map(|&v| v as f64).collect::<Vec<_>>())
    }

    /// `Re Tr(B_i B_j†)` of the scaled basis.
    pub fn gram(&self) -> RealMatrix {
        let k = self.k();
        let s2 = self.scale * self.scale;
        let mut g = RealMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = frob_inner(&self.basis[i], &self.basis[j]).expect("equal shapes") * s2;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }
}

/// Per-coordinate coefficient alphabet or an explicit finite codebook.
#[derive(Clone, Debug, PartialEq)]
pub enum Constellation {
    /// Q-PAM: the odd integers −Q+1, …, −1, 1, …, Q−1.
    Pam(u32),
    Explicit(Vec<Vec<i64>>),
}

impl Constellation {
    pub fn pam(q: u32) -> Result<Self> {
        if q < 2 || q % 2 != 0 {
            return Err(Error::invalid(format!("PAM size {q} must be even and at least 2")));
        }
        Ok(Constellation::Pam(q))
    }

    pub fn pam_points(q: u32) -> Vec<i64> {
        let q = q as i64;
        (0..q).map(|j| 2 * j - q + 1).collect()
    }

    /// Per-coordinate values, sorted.
    pub fn symbols(&self) -> Vec<i64> {
        match self {
            Constellation::Pam(q) => Self::pam_points(*q),
            Constellation::Explicit(words) => {
                let mut s: Vec<i64> = words.iter().flatten().copied().collect();
                s.sort_unstable();
                s.dedup();
                s
            }
        }
    }

    /// E[g_i²] for uniform PAM, (Q² − 1)/3.
    pub fn pam_energy(q: u32) -> f64 {
        let q = q as f64;
        (q * q - 1.0) / 3.0
    }
}

/// One entry of a spherically shaped codebook.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapedWord {
    pub g: Vec<i64>,
    /// ‖X‖²_F of the codeword.
    pub energy: f64,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct HeapKey(i128, Vec<i64>);

/// The `size` codewords of smallest Frobenius norm with coefficients in
/// `alphabet`, sorted by (energy, lexicographic g).
///
/// Runs a bounded enumeration of `gᵀ G g` whose radius shrinks to the
/// current `size`-th best energy, so only the low-energy part of the box is
/// visited.
pub fn spherical_codebook(code: &CodeSpec, alphabet: &[i64], size: usize) -> Result<Vec<ShapedWord>> {
    let mut alpha = alphabet.to_vec();
    alpha.sort_unstable();
    alpha.dedup();
    if alpha.is_empty() || size == 0 {
        return Err(Error::invalid("alphabet and target size must be nonempty"));
    }
    let k = code.k();
    let total = (alpha.len() as f64).powi(k as i32);
    if size as f64 > total {
        return Err(Error::invalid(format!(
            "target size {size} exceeds the {} available codewords",
            total
        )));
    }
    let gram = code.gram();
    let u = gram.cholesky_upper()?;
    let unit = (0..k).map(|i| gram[(i, i)]).sum::<f64>() / k as f64;
    let quant = |e: f64| (e / unit * 1e9).round() as i128;

    let mut heap: BinaryHeap<(HeapKey, u64)> = BinaryHeap::new();
    let mut energies: Vec<f64> = Vec::new();
    let mut g = vec![0i64; k];
    // Explicit DFS stack of (level, sorted candidate list, cursor).
    let mut cands: Vec<Vec<(f64, i64)>> = vec![Vec::new(); k];
    let mut cursor = vec![0usize; k];
    let radius = |heap: &BinaryHeap<(HeapKey, u64)>, energies: &[f64]| -> f64 {
        if heap.len() < size {
            f64::INFINITY
        } else {
            energies[heap.peek().expect("nonempty").1 as usize]
        }
    };
    let expand = |level: usize, g: &[i64], base: f64| -> Vec<(f64, i64)> {
        let off: f64 = (level + 1..k).map(|j| u[(level, j)] * g[j] as f64).sum();
        let mut v: Vec<(f64, i64)> = alpha
            .iter()
            .map(|&a| {
                let t = u[(level, level)] * a as f64 + off;
                (base + t * t, a)
            })
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v
    };
    let mut level = k - 1;
    cands[level] = expand(level, &g, 0.0);
    cursor[level] = 0;
    loop {
        let r = radius(&heap, &energies);
        let slack = 1e-9 * r.abs().max(unit);
        if cursor[level] < cands[level].len() && cands[level][cursor[level]].0 <= r + slack {
            let (e, a) = cands[level][cursor[level]];
            cursor[level] += 1;
            g[level] = a;
            if level == 0 {
                let key = HeapKey(quant(e), g.clone());
                if heap.len() < size {
                    energies.push(e);
                    heap.push((key, energies.len() as u64 - 1));
                } else if key < heap.peek().expect("nonempty").0 {
                    let (_, slot) = heap.pop().expect("nonempty");
                    energies[slot as usize] = e;
                    heap.push((key, slot));
                }
            } else {
                level -= 1;
                cands[level] = expand(level, &g, e);
                cursor[level] = 0;
            }
        } else {
            if level == k - 1 {
                break;
            }
            level += 1;
        }
    }
    let mut out: Vec<(HeapKey, f64)> = heap
        .into_iter()
        .map(|(key, slot)| {
            let e = energies[slot as usize];
            (key, e)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out
        .into_iter()
        .map(|(HeapKey(_, g), energy)| ShapedWord { g, energy })
        .collect())
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn z8() -> C64 {
    c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
}

fn mat(rows: &[&[C64]]) -> ComplexMatrix {
    ComplexMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

/// The four Alamouti dispersion matrices: I, diag(i, −i), [[0,−1],[1,0]], [[0,i],[i,0]].
fn alamouti_basis() -> Vec<ComplexMatrix> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    vec![
        mat(&[&[o, z], &[z, o]]),
        mat(&[&[i, z], &[z, -i]]),
        mat(&[&[z, -o], &[o, z]]),
        mat(&[&[z, i], &[i, z]]),
    ]
}

fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, m) = (a.rows(), b.rows());
    ComplexMatrix::from_fn(n + m, n + m, |i, j| {
        if i < n && j < n {
            a[(i, j)]
        } else if i >= n && j >= n {
            b[(i - n, j - n)]
        } else {
            c(0.0, 0.0)
        }
    })
}

/// 2x2 Alamouti code over Z[i]: `[[g1+ig2, −g3+ig4], [g3+ig4, g1−ig2]]`.
pub fn alamouti() -> CodeSpec {
    CodeSpec::new("alamouti", alamouti_basis(), 1.0, 1)
        .expect("valid basis")
        .with(Nvd::Yes, "(Q(i)/Q, conj, -1); orthogonal basis")
}

/// Quasi-orthogonal 4x4 code from the algebra with ζ8 entries; two
/// block-diagonal quaternion blocks. Order B1..B8: the four diagonal
/// matrices first, then the four anti-diagonal-block matrices.
pub fn quasi_orth_dort() -> CodeSpec {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    let w = z8();
    let wc = w.conj();
    let d = |a: C64, b: C64, cc: C64, dd: C64| ComplexMatrix::diagonal(&[a, b, cc, dd]);
    let blk = |a: &[&[C64]], b: &[&[C64]]| block_diag(&mat(a), &mat(b));
    let basis = vec![
        d(o, o, o, o),
        d(i, -i, i, -i),
        d(w, wc, -w, -wc),
        d(i * w, -i * wc, -i * w, i * wc),
        blk(&[&[z, -o], &[o, z]], &[&[z, -o], &[o, z]]),
        blk(&[&[z, i], &[i, z]], &[&[z, i], &[i, z]]),
        blk(&[&[z, -wc], &[w, z]], &[&[z, wc], &[-w, z]]),
        blk(&[&[z, i * wc], &[i * w, z]], &[&[z, -i * wc], &[-i * w, z]]),
    ];
    CodeSpec::new("dort", basis, 1.0, 1)
        .expect("valid basis")
        .with(Nvd::Yes, "natural order of a quasi-orthogonal division algebra; mindet >= 1")
}

/// 2x2 code of (Q(√3)/Q, σ, −1): `[[x1+x2√3, −x3+x4√3], [x3+x4√3, x1−x2√3]]`.
/// Negative control with no decoding reduction.
pub fn a2_code() -> CodeSpec {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let s = c(3f64.sqrt(), 0.0);
    let basis = vec![
        mat(&[&[o, z], &[z, o]]),
        mat(&[&[s, z], &[z, -s]]),
        mat(&[&[z, -o], &[o, z]]),
        mat(&[&[z, s], &[s, z]]),
    ];
    CodeSpec::new("a2", basis, 1.0, 1)
        .expect("valid basis")
        .with(Nvd::Yes, "(Q(sqrt3)/Q, sigma, -1); integer determinants")
}

/// Builds one basis matrix per (slot, element) pair: slot `s` carries the
/// element, all other slots are zero. `build` receives, for each slot, the
/// embedded values of `σ^p(x)` for `p = 0..order`.
fn slot_basis(
    sigma: &GaloisAuto,
    slots: usize,
    elems_per_slot: &[Vec<FieldElement>],
    build: impl Fn(&[Vec<C64>]) -> ComplexMatrix,
) -> Vec<ComplexMatrix> {
    let order = sigma.order();
    let powers: Vec<GaloisAuto> = (0..order).map(|p| sigma.pow(p)).collect();
    let mut out = Vec::new();
    for s in 0..slots {
        for e in &elems_per_slot[s] {
            let mut vals = vec![vec![c(0.0, 0.0); order as usize]; slots];
            vals[s] = powers.iter().map(|p| p.apply(e).to_complex()).collect();
            out.push(build(&vals));
        }
    }
    out
}

/// Q(ζ5) bases used for the 4x4 MIDO code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum A4Variant {
    /// {1−ζ, ζ−ζ², ζ²−ζ³, ζ³−ζ⁴}.
    Integral,
    /// {1, (ζ+ζ⁻¹)/2, (ζ−ζ⁻¹)/2, (ζ²−ζ⁻²)/4}.
    HalfImaginary,
}

pub fn a4_field_basis(variant: A4Variant) -> Vec<FieldElement> {
    let k = CyclotomicField::new(5).expect("m = 5");
    let one = int(1);
    match variant {
        A4Variant::Integral => (0..4)
            .map(|j| k.sum_of_powers(&[(j, one.clone()), (j + 1, int(-1))]))
            .collect(),
        A4Variant::HalfImaginary => vec![
            k.one(),
            k.sum_of_powers(&[(1, rat(1, 2)), (-1, rat(1, 2))]),
            k.sum_of_powers(&[(1, rat(1, 2)), (-1, rat(-1, 2))]),
            k.sum_of_powers(&[(2, rat(1, 4)), (-2, rat(-1, 4))]),
        ],
    }
}

/// The balanced and permuted left-regular matrix of (Q(ζ5)/Q, ζ ↦ ζ³, −8/9)
/// with `r = (8/9)^{1/4}`; `v[i][p]` is σ^p(y_{i+1}).
pub fn a4_matrix(v: &[Vec<C64>]) -> ComplexMatrix {
    let r = (8.0f64 / 9.0).powf(0.25);
    let (r2, r3) = (r * r, r * r * r);
    let y = |i: usize| v[i][0];
    let s = |i: usize| v[i][1];
    mat(&[
        &[y(0), -y(1).conj() * r2, -s(3) * r3, -s(2).conj() * r],
        &[y(1) * r2, y(0).conj(), s(2) * r, -s(3).conj() * r3],
        &[y(2) * r, -y(3).conj() * r3, s(0), -s(1).conj() * r2],
        &[y(3) * r3, y(2).conj() * r, s(1) * r2, s(0).conj()],
    ])
}

/// 4x4 MIDO code from the ζ5 algebra, K = 16, in quaternion-block form.
/// Basis order: y1 over the four field basis elements, then y2, y3, y4.
/// Unscaled; 9⁴·X has determinant at least one.
pub fn mido_a4(variant: A4Variant) -> CodeSpec {
    let field_basis = a4_field_basis(variant);
    let sigma = GaloisAuto::new(field_basis[0].field(), 3).expect("unit exponent");
    let basis = slot_basis(&sigma, 4, &vec![field_basis; 4], a4_matrix);
    let name = match variant {
        A4Variant::Integral => "mido_a4_integral",
        A4Variant::HalfImaginary => "mido_a4_half_imag",
    };
    CodeSpec::new(name, basis, 1.0, 2)
        .expect("valid basis")
        .with(Nvd::Scaled("9^4*X"), "(Q(zeta5)/Q, zeta->zeta^3, -8/9); det scaled by 9^4 is >= 1")
}

fn q20() -> CyclotomicField {
    CyclotomicField::new(20).expect("m = 20")
}

/// θ = (1+√5)/2 = 1 + ζ5 + ζ5⁴ and α = 1 + i − iθ inside Q(ζ20).
fn golden_constants(k: &CyclotomicField) -> (FieldElement, FieldElement) {
    let one = int(1);
    let theta = k.sum_of_powers(&[(0, one.clone()), (4, one.clone()), (16, one.clone())]);
    let i = k.zeta_pow(5);
    let alpha = &(&k.one() + &i) - &(&i * &theta);
    (theta, alpha)
}

/// Per-slot basis of `α(a + bθ)`, a, b ∈ Z[i]: α, iα, αθ, iαθ.
fn golden_slot_basis() -> Vec<FieldElement> {
    let k = q20();
    let (theta, alpha) = golden_constants(&k);
    let i = k.zeta_pow(5);
    let at = &alpha * &theta;
    vec![alpha.clone(), &i * &alpha, at.clone(), &i * &at]
}

/// `[[x0, γσ(x3), γx2, γσ(x1)], [x1, σ(x0), γx3, γσ(x2)], [x2, σ(x1), x0, γσ(x3)], [x3, σ(x2), x1, σ(x0)]]`.
fn mido1_matrix(v: &[Vec<C64>], gamma: C64) -> ComplexMatrix {
    let x = |i: usize| v[i][0];
    let s = |i: usize| v[i][1];
    mat(&[
        &[x(0), gamma * s(3), gamma * x(2), gamma * s(1)],
        &[x(1), s(0), gamma * x(3), gamma * s(2)],
        &[x(2), s(1), x(0), gamma * s(3)],
        &[x(3), s(2), x(1), s(0)],
    ])
}

fn golden_sigma() -> GaloisAuto {
    // ζ20 ↦ ζ20^17 fixes i and sends √5 to −√5.
    GaloisAuto::new(&q20(), 17).expect("unit exponent")
}

/// Golden-shaped 4x4 code C1 (γ = i), K = 16, scale 5^{−1/4}.
/// Basis order per slot x_j: Re a, Im a, Re b, Im b of x_j = α(a + bθ).
pub fn mido_c1() -> CodeSpec {
    let basis = slot_basis(&golden_sigma(), 4, &vec![golden_slot_basis(); 4], |v| {
        mido1_matrix(v, c(0.0, 1.0))
    });
    CodeSpec::new("mido_c1", basis, 5f64.powf(-0.25), 2)
        .expect("valid basis")
        .with(Nvd::Yes, "golden-shaped, gamma = i; volume 5^4*2^8, delta 1/20")
}

/// The untwisted C1 matrix with γ = −i, from which C3 is obtained.
pub fn mido_c3_untwisted() -> CodeSpec {
    let basis = slot_basis(&golden_sigma(), 4, &vec![golden_slot_basis(); 4], |v| {
        mido1_matrix(v, c(0.0, -1.0))
    });
    CodeSpec::new("mido_c3_untwisted", basis, 5f64.powf(-0.25), 2).expect("valid basis")
}

/// C3: γ = −i, rows 3–4 multiplied by ζ8 and columns 3–4 by ζ8⁻¹.
pub fn mido_c3() -> CodeSpec {
    let w = z8();
    let basis = slot_basis(&golden_sigma(), 4, &vec![golden_slot_basis(); 4], |v| {
        let x = mido1_matrix(v, c(0.0, -1.0));
        ComplexMatrix::from_fn(4, 4, |i, j| {
            let mut e = x[(i, j)];
            if i >= 2 {
                e *= w;
            }
            if j >= 2 {
                e *= w.conj();
            }
            e
        })
    });
    CodeSpec::new("mido_c3", basis, 5f64.powf(-0.25), 2)
        .expect("valid basis")
        .with(Nvd::Yes, "C1 with gamma = -i conjugated by diag(1,1,zeta8,zeta8)")
}

/// Coefficient bases of C2 in Q(ζ20): `a + ibζ + cζ² + idζ³` for x0, x1 and
/// `a(1+i) + b(1−i)ζ + c(1+i)ζ² + d(1−i)ζ³` for x2, x3.
fn c2_slot_bases() -> (Vec<FieldElement>, Vec<FieldElement>) {
    let k = q20();
    let i = k.zeta_pow(5);
    let p = &k.one() + &i;
    let m = &k.one() - &i;
    let plain = vec![k.one(), &i * &k.zeta_pow(1), k.zeta_pow(2), &i * &k.zeta_pow(3)];
    let twisted = vec![p.clone(), &m * &k.zeta_pow(1), &p * &k.zeta_pow(2), &m * &k.zeta_pow(3)];
    (plain, twisted)
}

/// Left-regular C2 matrix before the 2↔3 row/column permutation, with
/// `v[j][p] = σ^p(x_j)` and `*` the complex conjugate.
pub fn mido2_matrix(v: &[Vec<C64>]) -> ComplexMatrix {
    let x = |j: usize| v[j][0];
    let s = |j: usize| v[j][1];
    let i = c(0.0, 1.0);
    mat(&[
        &[x(0), i * s(3), -x(2).conj(), i * s(1).conj()],
        &[x(1), s(0), -x(3).conj(), -s(2).conj()],
        &[x(2), s(1), x(0).conj(), -s(3).conj()],
        &[x(3), s(2), x(1).conj(), s(0).conj()],
    ])
}

fn c2_basis(build: impl Fn(&[Vec<C64>]) -> ComplexMatrix) -> Vec<ComplexMatrix> {
    let (plain, twisted) = c2_slot_bases();
    let sigma = GaloisAuto::new(&q20(), 17).expect("unit exponent");
    // Slots in the order x0, x2, x1, x3.
    let slot_elems = vec![plain.clone(), twisted.clone(), plain, twisted];
    let reorder = [0usize, 2, 1, 3];
    slot_basis(&sigma, 4, &slot_elems, |v| {
        let mut w = vec![Vec::new(); 4];
        for (s, &j) in reorder.iter().enumerate() {
            w[j] = v[s].clone();
        }
        build(&w)
    })
}

/// C2 before the permutation, same basis order as [`mido_c2`].
pub fn mido_c2_unpermuted() -> CodeSpec {
    CodeSpec::new("mido_c2_unpermuted", c2_basis(mido2_matrix), 1.0, 2).expect("valid basis")
}

/// Punctured code C2 over Q(ζ20), γ = i, in the permuted form
/// `[[x0, −x2*, iσ(x3), iσ(x1)*], [x2, x0*, σ(x1), −σ(x3)*], [x1, −x3*, σ(x0), −σ(x2)*], [x3, x1*, σ(x2), σ(x0)*]]`.
/// Basis order: x0, x2, x1, x3, each over its four coefficients.
pub fn mido_c2() -> CodeSpec {
    let basis = c2_basis(|v| {
        let m = mido2_matrix(v);
        let p = [0usize, 2, 1, 3];
        ComplexMatrix::from_fn(4, 4, |i, j| m[(p[i], p[j])])
    });
    CodeSpec::new("mido_c2", basis, 1.0, 2)
        .expect("valid basis")
        .with(Nvd::Yes, "gamma = i; off-diagonal blocks are not quaternionic")
}

/// Q(ζ7) bases for the 6x6 code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SixVariant {
    /// Power basis 1, ζ, …, ζ⁵.
    Integral,
    /// {1, ζ+ζ⁻¹, ζ²+ζ⁻², ζ−ζ⁻¹, ζ²−ζ⁻², ζ³−ζ⁻³}.
    HalfImaginary,
}

pub fn six_field_basis(variant: SixVariant) -> Vec<FieldElement> {
    let k = CyclotomicField::new(7).expect("m = 7");
    match variant {
        SixVariant::Integral => (0..6).map(|j| k.zeta_pow(j)).collect(),
        SixVariant::HalfImaginary => {
            let mut b = vec![k.one()];
            for j in 1..=2 {
                b.push(k.sum_of_powers(&[(j, int(1)), (-j, int(1))]));
            }
            for j in 1..=3 {
                b.push(k.sum_of_powers(&[(j, int(1)), (-j, int(-1))]));
            }
            b
        }
    }
}

/// `X = (A B C)` for the ζ7 algebra with γ = −3/4, `r = √(3/4)`;
/// `v[i][p] = σ^p(x_i)`.
pub fn six_matrix(v: &[Vec<C64>]) -> ComplexMatrix {
    let r = 0.75f64.sqrt();
    let r2 = 0.75;
    let x = |i: usize| v[i][0];
    let s = |i: usize| v[i][1];
    let t = |i: usize| v[i][2];
    let rows: [[C64; 6]; 6] = [
        [x(0), -x(1).conj() * r, -s(5) * r2, -s(4).conj() * r, -t(3) * r2, -t(2).conj() * r],
        [x(1) * r, x(0).conj(), s(4) * r, -s(5).conj() * r2, t(2) * r, -t(3).conj() * r2],
        [x(2), -x(3).conj() * r, s(0), -s(1).conj() * r, -t(4) * r2, -t(5).conj() * r],
        [x(3) * r, x(2).conj(), s(1) * r, s(0).conj(), t(5) * r, -t(4).conj() * r2],
        [x(4), -x(5).conj() * r, s(2), -s(3).conj() * r, t(0), -t(1).conj() * r],
        [x(5) * r, x(4).conj(), s(3) * r, s(2).conj(), t(1) * r, t(0).conj()],
    ];
    ComplexMatrix::from_fn(6, 6, |i, j| rows[i][j])
}

/// 6x6 code over Q(ζ7), K = 36; basis index `6·i + t` is x_i over the
/// t-th field basis element.
pub fn code_6x3(variant: SixVariant) -> CodeSpec {
    let fb = six_field_basis(variant);
    let sigma = GaloisAuto::new(fb[0].field(), 3).expect("unit exponent");
    let basis = slot_basis(&sigma, 6, &vec![fb; 6], six_matrix);
    let name = match variant {
        SixVariant::Integral => "code_6x3",
        SixVariant::HalfImaginary => "code_6x3_half_imag",
    };
    CodeSpec::new(name, basis, 1.0, 3)
        .expect("valid basis")
        .with(Nvd::Scaled("4^5*det"), "(Q(zeta7)/Q, zeta->zeta^3, -3/4); 4^5 det is a nonzero integer")
}

/// 0-based indices removed from the half-imaginary 6x6 code to get the 6x2 code:
/// the totally real parts of x2..x5.
pub const SIX_X2_PUNCTURED: [usize; 12] = [12, 13, 14, 18, 19, 20, 24, 25, 26, 30, 31, 32];

/// 6x6 code for two receive antennas, K = 24.
pub fn code_6x2() -> CodeSpec {
    let mut c = code_6x3(SixVariant::HalfImaginary)
        .puncture("code_6x2", &SIX_X2_PUNCTURED)
        .expect("indices in range");
    c.n_r = 2;
    c.notes = "half-imaginary 6x6 code without the real parts of x2..x5".into();
    c
}

/// Unrotated SR structure `[[A, ζ8B], [ζ8C, D]]` from four independent
/// Alamouti blocks; basis order A, B, C, D. No full diversity.
pub fn sr_unrotated() -> CodeSpec {
    let w = z8();
    let al = alamouti_basis();
    let mut basis = Vec::new();
    for (bi, bj, f) in [(0, 0, c(1.0, 0.0)), (0, 1, w), (1, 0, w), (1, 1, c(1.0, 0.0))] {
        for b in &al {
            basis.push(ComplexMatrix::from_fn(4, 4, |i, j| {
                if i / 2 == bi && j / 2 == bj {
                    b[(i % 2, j % 2)] * f
                } else {
                    c(0.0, 0.0)
                }
            }));
        }
    }
    CodeSpec::new("sr_unrotated", basis, 1.0, 2)
        .expect("valid basis")
        .with(Nvd::No, "structural baseline only; zero determinants exist")
}

/// Catalog names in display order.
pub const CODE_NAMES: [&str; 12] = [
    "alamouti",
    "dort",
    "a2",
    "mido_a4_integral",
    "mido_a4_half_imag",
    "mido_c1",
    "mido_c2",
    "mido_c3",
    "code_6x3",
    "code_6x3_half_imag",
    "code_6x2",
    "sr_unrotated",
];

pub fn by_name(name: &str) -> Result<CodeSpec> {
    Ok(match name {
        "alamouti" => alamouti(),
        "dort" => quasi_orth_dort(),
        "a2" => a2_code(),
        "mido_a4_integral" | "a4" => mido_a4(A4Variant::Integral),
        "mido_a4_half_imag" => mido_a4(A4Variant::HalfImaginary),
        "mido_c1" => mido_c1(),
        "mido_c2" => mido_c2(),
        "mido_c3" => mido_c3(),
        "code_6x3" => code_6x3(SixVariant::Integral),
        "code_6x3_half_imag" => code_6x3(SixVariant::HalfImaginary),
        "code_6x2" => code_6x2(),
        "sr_unrotated" => sr_unrotated(),
        other => return Err(Error::UnknownCode(other.to_string())),
    })
}

/// Plain-text datasheet:
///
/// ```text
/// code <name>
/// n_t <n_t>
/// t <T>
/// k <K>
/// scale <scale>
/// basis <i>            (1-based, followed by n_t rows)
/// <re> <im> <re> <im> …
/// ```
///
/// Values are unscaled basis entries printed with shortest round-trip precision.
pub fn datasheet(code: &CodeSpec) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "code {}", code.name);
    let _ = writeln!(s, "n_t {}", code.n_t);
    let _ = writeln!(s, "t {}", code.t);
    let _ = writeln!(s, "k {}", code.k());
    let _ = writeln!(s, "scale {}", code.scale);
    for (idx, b) in code.basis.iter().enumerate() {
        let _ = writeln!(s, "basis {}", idx + 1);
        for i in 0..b.rows() {
            let row: Vec<String> = (0..b.cols())
                .flat_map(|j| {
                    let z = b[(i, j)];
                    [fmt_num(z.re), fmt_num(z.im)]
                })
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    s
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

type Lines<'a> = std::iter::Filter<std::iter::Enumerate<std::str::Lines<'a>>, fn(&(usize, &str)) -> bool>;

fn next_line<'a>(lines: &mut Lines<'a>, what: &str) -> Result<(usize, &'a str)> {
    lines.next().map(|(no, l)| (no + 1, l)).ok_or(Error::Parse {
        line: 0,
        message: format!("unexpected end of input, expected {what}"),
    })
}

fn header<'a>(lines: &mut Lines<'a>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = next_line(lines, key)?;
    match line.trim().split_once(' ') {
        Some((k, v)) if k == key => Ok((no, v.trim())),
        _ if line.trim() == key => Ok((no, "")),
        _ => Err(Error::Parse {
            line: no,
            message: format!("expected `{key}`"),
        }),
    }
}

fn parse_field<T: std::str::FromStr>(lines: &mut Lines<'_>, key: &str) -> Result<T> {
    let (no, v) = header(lines, key)?;
    v.parse().map_err(|_| Error::Parse {
        line: no,
        message: format!("bad value `{v}` for `{key}`"),
    })
}

/// Reads a datasheet back into a code (n_r defaults to 1).
pub fn parse_datasheet(text: &str) -> Result<CodeSpec> {
    let keep: fn(&(usize, &str)) -> bool = |(_, l)| !l.trim().is_empty();
    let mut lines: Lines<'_> = text.lines().enumerate().filter(keep);
    let name = header(&mut lines, "code")?.1.to_string();
    let n_t: usize = parse_field(&mut lines, "n_t")?;
    let t: usize = parse_field(&mut lines, "t")?;
    let k: usize = parse_field(&mut lines, "k")?;
    let scale: f64 = parse_field(&mut lines, "scale")?;
    let mut basis = Vec::with_capacity(k);
    for _ in 0..k {
        header(&mut lines, "basis")?;
        let mut data = Vec::with_capacity(n_t * t);
        for _ in 0..n_t {
            let (no, line) = next_line(&mut lines, "a basis row")?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: no,
                    message: e.to_string(),
                })?;
            if vals.len() != 2 * t {
                return Err(Error::Parse {
                    line: no,
                    message: format!("expected {} numbers, got {}", 2 * t, vals.len()),
                });
            }
            data.extend(vals.chunks(2).map(|p| c(p[0], p[1])));
        }
        basis.push(ComplexMatrix::from_vec(n_t, t, data)?);
    }
    CodeSpec::new(&name, basis, scale, 1)
}

/// ζ_m^j as a complex number.
pub fn root_of_unity(m: u32, j: i64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)
}
