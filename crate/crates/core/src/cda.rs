//! Cyclic algebras (E/K, σ, γ) over a cyclotomic E: left-regular
//! representation, the permutation-and-balance conjugation into 2x2
//! quaternion blocks, and the Alamouti block test.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{det, ComplexMatrix, C64};
use crate::numberfield::{rat, CyclotomicField, FieldElement, GaloisAuto};

/// `(E/K, σ, γ)` with γ rational; K is the fixed field of σ.
#[derive(Clone, Debug)]
pub struct CyclicAlgebraSpec {
    pub field: CyclotomicField,
    pub sigma: GaloisAuto,
    pub n: usize,
    pub gamma: BigRational,
    /// [K : Q].
    pub center_degree: usize,
}

impl CyclicAlgebraSpec {
    pub fn new(field: CyclotomicField, sigma_exponent: i64, gamma: BigRational) -> Result<Self> {
        if gamma.is_zero() {
            return Err(Error::invalid("gamma must be nonzero"));
        }
        let sigma = GaloisAuto::new(&field, sigma_exponent)?;
        let n = sigma.order() as usize;
        if n < 2 || field.degree() % n != 0 {
            return Err(Error::invalid(format!(
                "sigma of order {n} does not define a cyclic extension of degree dividing {}",
                field.degree()
            )));
        }
        Ok(Self {
            center_degree: field.degree() / n,
            field,
            sigma,
            n,
            gamma,
        })
    }

    /// (Q(i)/Q, complex conjugation, -1).
    pub fn alamouti() -> Self {
        Self::new(CyclotomicField::new(4).expect("m = 4"), 3, rat(-1, 1)).expect("valid algebra")
    }

    /// (Q(ζ5)/Q, ζ ↦ ζ³, -8/9).
    pub fn mido() -> Self {
        Self::new(CyclotomicField::new(5).expect("m = 5"), 3, rat(-8, 9)).expect("valid algebra")
    }

    /// (Q(ζ7)/Q, ζ ↦ ζ³, -3/4).
    pub fn six() -> Self {
        Self::new(CyclotomicField::new(7).expect("m = 7"), 3, rat(-3, 4)).expect("valid algebra")
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma.to_f64().unwrap_or(f64::NAN)
    }

    /// σ^{n/2} acts as complex conjugation, the condition for quaternion blocks.
    pub fn half_power_is_conjugation(&self) -> bool {
        self.n % 2 == 0 && self.sigma.pow(self.n as u32 / 2).is_complex_conjugation()
    }
}

/// Exact left-regular matrix of `x_0 + u x_1 + … + u^{n-1} x_{n-1}`:
/// entry (i, j) is `γ^{[i<j]} σ^j(x_{(i-j) mod n})`.
pub fn left_regular_exact(alg: &CyclicAlgebraSpec, x: &[FieldElement]) -> Result<Vec<Vec<FieldElement>>> {
    let n = alg.n;
    if x.len() != n {
        return Err(Error::shape(n, x.len()));
    }
    if x.iter().any(|e| *e.field() != alg.field) {
        return Err(Error::invalid("element outside the algebra's field"));
    }
    let powers: Vec<GaloisAuto> = (0..n).map(|j| alg.sigma.pow(j as u32)).collect();
    let gamma = alg.field.from_rational(alg.gamma.clone());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = Vec::with_capacity(n);
        for (j, s) in powers.iter().enumerate() {
            let v = s.apply(&x[(i + n - j) % n]);
            row.push(if i < j { &gamma * &v } else { v });
        }
        out.push(row);
    }
    Ok(out)
}

pub fn left_regular(alg: &CyclicAlgebraSpec, x: &[FieldElement]) -> Result<ComplexMatrix> {
    let exact = left_regular_exact(alg, x)?;
    let n = alg.n;
    Ok(ComplexMatrix::from_fn(n, n, |i, j| exact[i][j].to_complex()))
}

/// Exact reduced norm (determinant of the left-regular matrix) as a field element.
pub fn reduced_norm_exact(alg: &CyclicAlgebraSpec, x: &[FieldElement]) -> Result<FieldElement> {
    let mut a = left_regular_exact(alg, x)?;
    let n = alg.n;
    let mut d = alg.field.one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Ok(alg.field.zero());
        };
        if piv != col {
            a.swap(col, piv);
            d = -&d;
        }
        let inv = a[col][col].inverse()?;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] = &a[r][c] - &v;
            }
        }
        d = &d * &a[col][col];
    }
    Ok(d)
}

/// Floating determinant of the left-regular matrix and whether it is a
/// real rational with denominator dividing den(γ)^{n-1}.
pub fn reduced_norm_check(alg: &CyclicAlgebraSpec, x: &[FieldElement]) -> Result<(C64, bool)> {
    let d = det(&left_regular(alg, x)?)?;
    let den = alg.gamma.denom().to_f64().unwrap_or(f64::NAN).powi(alg.n as i32 - 1);
    let scaled = d.re * den;
    let mag = d.norm();
    let real = d.im.abs() <= 1e-8 * mag.max(1.0);
    let integral = (scaled - scaled.round()).abs() <= 1e-8 * scaled.abs().max(1.0);
    Ok((d, real && integral))
}

/// Permutation and balance matrices of the quaternionizing conjugation.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionizerData {
    /// `perm[i] = j` (0-indexed) iff P(i, j) = 1.
    pub perm: Vec<usize>,
    pub balance: Vec<f64>,
}

impl QuaternionizerData {
    pub fn p_matrix(&self) -> ComplexMatrix {
        let n = self.perm.len();
        ComplexMatrix::from_fn(n, n, |i, j| C64::new(if self.perm[i] == j { 1.0 } else { 0.0 }, 0.0))
    }

    pub fn b_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diagonal(&self.balance.iter().map(|&b| C64::new(b, 0.0)).collect::<Vec<_>>())
    }
}

pub fn build_quaternionizer(n_t: usize, gamma: &BigRational) -> Result<QuaternionizerData> {
    if n_t == 0 || n_t % 2 != 0 {
        return Err(Error::invalid(format!("n_t = {n_t} must be even and positive")));
    }
    if !gamma.is_negative() {
        return Err(Error::invalid(format!("gamma = {gamma} must be negative")));
    }
    let g = gamma.abs().to_f64().unwrap_or(f64::NAN);
    let perm = (1..=n_t)
        .map(|i| if i % 2 == 1 { (i + 1) / 2 - 1 } else { (i + n_t) / 2 - 1 })
        .collect();
    let balance = (1..=n_t).map(|i| if i % 2 == 1 { g.sqrt() } else { g }).collect();
    Ok(QuaternionizerData { perm, balance })
}

/// (BP) X (BP)^{-1}.
pub fn quaternionize(x: &ComplexMatrix, q: &QuaternionizerData) -> Result<ComplexMatrix> {
    let n = q.perm.len();
    if x.shape() != (n, n) {
        return Err(Error::shape(format!("{n}x{n}"), format!("{:?}", x.shape())));
    }
    // (BPXP^T B^{-1})_{ij} = b_i X_{p(i) p(j)} / b_j
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        x[(q.perm[i], q.perm[j])] * (q.balance[i] / q.balance[j])
    }))
}

/// Every 2x2 block [[a, b], [c, d]] has d = a* and c = -b* up to `tol`
/// times the block's Frobenius norm.
pub fn is_alamouti_blocks(x: &ComplexMatrix, tol: f64) -> Result<bool> {
    if x.rows() % 2 != 0 || x.cols() % 2 != 0 {
        return Err(Error::invalid(format!("odd dimension {:?}", x.shape())));
    }
    for bi in (0..x.rows()).step_by(2) {
        for bj in (0..x.cols()).step_by(2) {
            let b = x.block(bi, bj, 2, 2);
            let s = b.frob_norm();
            let (a, bb, c, d) = (b[(0, 0)], b[(0, 1)], b[(1, 0)], b[(1, 1)]);
            if (d - a.conj()).norm() > tol * s || (c + bb.conj()).norm() > tol * s {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
