//! Exact arithmetic in cyclotomic fields Q(ζ_m) on the power basis
//! 1, ζ, …, ζ^{φ(m)-1}, with Galois action ζ ↦ ζ^k and complex embeddings.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn totient(m: u32) -> u32 {
    (1..=m).filter(|&k| k.gcd(&m) == 1).count() as u32
}

struct FieldData {
    m: u32,
    phi: Vec<BigInt>,
    /// Power-basis coordinates of ζ^j for j in 0..m.
    powers: Vec<Vec<BigInt>>,
}

/// Q(ζ_m). Cheap to clone; equality is by conductor.
#[derive(Clone)]
pub struct CyclotomicField {
    inner: Arc<FieldData>,
}

impl PartialEq for CyclotomicField {
    fn eq(&self, other: &Self) -> bool {
        self.inner.m == other.inner.m
    }
}

impl Eq for CyclotomicField {}

impl fmt::Debug for CyclotomicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(zeta_{})", self.inner.m)
    }
}

/// Quotient of `num` by the monic `den`; `None` when the division is not exact.
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return rem.iter().all(Zero::is_zero).then(Vec::new);
    }
    let mut q = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        q[i] = c;
    }
    rem.iter().all(Zero::is_zero).then_some(q)
}

/// Integer coefficients (low to high) of the m-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(m: u32) -> Vec<BigInt> {
    assert!(m >= 1, "conductor must be positive");
    let mut p = vec![BigInt::zero(); m as usize + 1];
    p[0] = -BigInt::one();
    p[m as usize] = BigInt::one();
    for d in (1..m).filter(|d| m % d == 0) {
        let phi_d = cyclotomic_polynomial(d);
        p = poly_div_exact(&p, &phi_d).expect("cyclotomic factor divides x^m - 1");
    }
    p
}

impl CyclotomicField {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("conductor must be positive"));
        }
        let phi = cyclotomic_polynomial(m);
        let d = phi.len() - 1;
        let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(m as usize);
        let mut cur = vec![BigInt::zero(); d];
        cur[0] = BigInt::one();
        for _ in 0..m {
            powers.push(cur.clone());
            // multiply by ζ: shift up and fold ζ^d = -Σ phi_i ζ^i
            let top = cur[d - 1].clone();
            let mut next = vec![BigInt::zero(); d];
            next[1..d].clone_from_slice(&cur[..(d - 1)]);
            if !top.is_zero() {
                for (i, n) in next.iter_mut().enumerate() {
                    *n -= &top * &phi[i];
                }
            }
            cur = next;
        }
        Ok(Self {
            inner: Arc::new(FieldData { m, phi, powers }),
        })
    }

    pub fn conductor(&self) -> u32 {
        self.inner.m
    }

    pub fn degree(&self) -> usize {
        self.inner.phi.len() - 1
    }

    pub fn min_poly(&self) -> &[BigInt] {
        &self.inner.phi
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            coords: vec![BigRational::zero(); self.degree()],
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_rational(BigRational::one())
    }

    pub fn from_rational(&self, q: BigRational) -> FieldElement {
        let mut e = self.zero();
        e.coords[0] = q;
        e
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_rational(int(n))
    }

    /// ζ^k for any integer k.
    pub fn zeta_pow(&self, k: i64) -> FieldElement {
        let m = self.inner.m as i64;
        let idx = k.rem_euclid(m) as usize;
        FieldElement {
            field: self.clone(),
            coords: self.inner.powers[idx]
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
        }
    }

    /// Element from power-basis coordinates (length must equal the degree).
    pub fn element(&self, coords: Vec<BigRational>) -> Result<FieldElement> {
        if coords.len() != self.degree() {
            return Err(Error::shape(self.degree(), coords.len()));
        }
        Ok(FieldElement {
            field: self.clone(),
            coords,
        })
    }

    pub fn element_i64(&self, coords: &[i64]) -> Result<FieldElement> {
        self.element(coords.iter().map(|&c| int(c)).collect())
    }

    /// Canonical element from coefficients on 1, ζ, ζ², … of any length.
    pub fn reduce(&self, raw: &[BigRational]) -> FieldElement {
        let m = self.inner.m as usize;
        let mut coords = vec![BigRational::zero(); self.degree()];
        for (j, c) in raw.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (slot, p) in coords.iter_mut().zip(&self.inner.powers[j % m]) {
                if !p.is_zero() {
                    *slot += c * BigRational::from_integer(p.clone());
                }
            }
        }
        FieldElement {
            field: self.clone(),
            coords,
        }
    }

    /// Σ c·ζ^e over integer exponents.
    pub fn sum_of_powers(&self, terms: &[(i64, BigRational)]) -> FieldElement {
        let mut acc = self.zero();
        for (e, c) in terms {
            acc = &acc + &self.zeta_pow(*e).scale(c);
        }
        acc
    }
}

/// An element of Q(ζ_m) with exact rational coordinates on the power basis.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: CyclotomicField,
    coords: Vec<BigRational>,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| format!("({c})z^{j}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl FieldElement {
    pub fn field(&self) -> &CyclotomicField {
        &self.field
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_integral_coords(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            field: self.field.clone(),
            coords: self.coords.iter().map(|c| c * q).collect(),
        }
    }

    /// The rational value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        self.coords[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coords[0].clone())
    }

    fn check_same(&self, other: &Self) {
        assert!(self.field == other.field, "elements from different fields");
    }

    /// Matrix of multiplication by `self` on the power basis (column i = self·ζ^i).
    fn mult_matrix(&self) -> Vec<Vec<BigRational>> {
        let d = self.field.degree();
        let mut rows = vec![vec![BigRational::zero(); d]; d];
        for i in 0..d {
            let col = self * &self.field.zeta_pow(i as i64);
            for (r, v) in col.coords.into_iter().enumerate() {
                rows[r][i] = v;
            }
        }
        rows
    }

    /// Multiplicative inverse; fails for zero.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Singular);
        }
        let d = self.field.degree();
        let mut rhs = vec![BigRational::zero(); d];
        rhs[0] = BigRational::one();
        let sol = solve_rational(self.mult_matrix(), rhs)?;
        self.field.element(sol)
    }

    /// Absolute norm N_{Q(ζ)/Q}.
    pub fn norm(&self) -> BigRational {
        det_rational(self.mult_matrix())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = self.field.one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Complex conjugate (ζ ↦ ζ^{-1}).
    pub fn conj(&self) -> Self {
        let m = self.field.conductor() as i64;
        apply_exponent(self, m - 1)
    }

    /// Value at ζ_m^j = exp(2πij/m).
    pub fn embed(&self, j: i64) -> Complex64 {
        let m = self.field.conductor() as f64;
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(idx, c)| {
                let ang = 2.0 * std::f64::consts::PI * ((j * idx as i64) as f64) / m;
                Complex64::from_polar(1.0, ang) * c.to_f64().unwrap_or(f64::NAN)
            })
            .sum()
    }

    /// Canonical embedding (j = 1).
    pub fn to_complex(&self) -> Complex64 {
        self.embed(1)
    }
}

fn apply_exponent(x: &FieldElement, k: i64) -> FieldElement {
    let terms: Vec<(i64, BigRational)> = x
        .coords
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| (j as i64 * k, c.clone()))
        .collect();
    x.field.sum_of_powers(&terms)
}

impl Add for &FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: &FieldElement) -> FieldElement {
        self.check_same(rhs);
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: &FieldElement) -> FieldElement {
        self.check_same(rhs);
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: &FieldElement) -> FieldElement {
        self.check_same(rhs);
        let d = self.field.degree();
        let mut raw = vec![BigRational::zero(); 2 * d - 1];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coords.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        self.field.reduce(&raw)
    }
}

/// The automorphism ζ ↦ ζ^k of Q(ζ_m), gcd(k, m) = 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisAuto {
    field: CyclotomicField,
    k: u32,
}

impl GaloisAuto {
    pub fn new(field: &CyclotomicField, k: i64) -> Result<Self> {
        let m = field.conductor() as i64;
        let k = k.rem_euclid(m);
        if k.gcd(&m) != 1 {
            return Err(Error::invalid(format!("exponent {k} not coprime to {m}")));
        }
        Ok(Self {
            field: field.clone(),
            k: k as u32,
        })
    }

    pub fn identity(field: &CyclotomicField) -> Self {
        Self {
            field: field.clone(),
            k: 1 % field.conductor().max(1),
        }
    }

    pub fn exponent(&self) -> u32 {
        self.k
    }

    pub fn field(&self) -> &CyclotomicField {
        &self.field
    }

    pub fn apply(&self, x: &FieldElement) -> FieldElement {
        assert!(x.field == self.field, "automorphism of a different field");
        apply_exponent(x, self.k as i64)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let m = self.field.conductor() as u64;
        Self {
            field: self.field.clone(),
            k: ((self.k as u64 * other.k as u64) % m) as u32,
        }
    }

    pub fn pow(&self, t: u32) -> Self {
        let m = self.field.conductor() as u64;
        let mut k = 1 % m;
        for _ in 0..t {
            k = (k * self.k as u64) % m;
        }
        Self {
            field: self.field.clone(),
            k: k as u32,
        }
    }

    pub fn order(&self) -> u32 {
        let m = self.field.conductor() as u64;
        let mut k = self.k as u64 % m;
        let mut t = 1;
        while k != 1 % m {
            k = (k * self.k as u64) % m;
            t += 1;
        }
        t
    }

    /// True when the automorphism is complex conjugation under every embedding.
    pub fn is_complex_conjugation(&self) -> bool {
        let m = self.field.conductor();
        m > 2 && self.k == m - 1
    }
}

/// Coordinates of `x` in `basis`, exactly.
pub fn change_basis(x: &FieldElement, basis: &[FieldElement]) -> Result<Vec<BigRational>> {
    let d = x.field.degree();
    if basis.len() != d {
        return Err(Error::shape(d, basis.len()));
    }
    if let Some(b) = basis.iter().find(|b| b.field != x.field) {
        return Err(Error::invalid(format!("basis element from {:?}", b.field)));
    }
    let mut rows = vec![vec![BigRational::zero(); d]; d];
    for (j, b) in basis.iter().enumerate() {
        for (i, c) in b.coords.iter().enumerate() {
            rows[i][j] = c.clone();
        }
    }
    solve_rational(rows, x.coords.clone())
}

/// Σ coeffs_i · basis_i.
pub fn combine(coeffs: &[BigRational], basis: &[FieldElement]) -> Result<FieldElement> {
    let first = basis.first().ok_or_else(|| Error::invalid("empty basis"))?;
    if coeffs.len() != basis.len() {
        return Err(Error::shape(basis.len(), coeffs.len()));
    }
    let mut acc = first.field.zero();
    for (c, b) in coeffs.iter().zip(basis) {
        acc = &acc + &b.scale(c);
    }
    Ok(acc)
}

/// Solves `a x = b` over Q by Gaussian elimination; `a` is given by rows.
pub fn solve_rational(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Result<Vec<BigRational>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::shape(n, b.len()));
    }
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::Singular)?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
            let v = &f * &b[col];
            b[r] -= v;
        }
    }
    Ok((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Exact determinant over Q.
pub fn det_rational(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut d = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(col, piv);
            d = -d;
        }
        let p = a[col][col].clone();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let v = &f * &a[col][c];
                a[r][c] -= v;
            }
        }
        d *= p;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(m: u32) -> CyclotomicField {
        CyclotomicField::new(m).unwrap()
    }

    #[test]
    fn degrees_are_totients() {
        for m in 1..40 {
            assert_eq!(f(m).degree() as u32, totient(m), "m = {m}");
        }
    }

    #[test]
    fn phi_divides_xm_minus_1() {
        for m in [1u32, 4, 5, 7, 8, 12, 20] {
            let mut p = vec![BigInt::zero(); m as usize + 1];
            p[0] = -BigInt::one();
            p[m as usize] = BigInt::one();
            assert!(poly_div_exact(&p, &cyclotomic_polynomial(m)).is_some());
        }
        let phi5: Vec<i64> = cyclotomic_polynomial(5).iter().map(|c| c.to_i64().unwrap()).collect();
        assert_eq!(phi5, vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn reduce_zeta5_fourth_power() {
        let k = f(5);
        let raw = vec![int(0), int(0), int(0), int(0), int(1)];
        assert_eq!(k.reduce(&raw).coords(), &[int(-1), int(-1), int(-1), int(-1)]);
        assert_eq!(k.reduce(&[int(1)]), k.one());
    }

    #[test]
    fn reduce_i_squared() {
        let k = f(4);
        assert_eq!(k.zeta_pow(2), k.from_int(-1));
    }

    #[test]
    fn galois_zeta5() {
        let k = f(5);
        let s = GaloisAuto::new(&k, 2).unwrap();
        assert_eq!(s.apply(&k.zeta_pow(1)), k.zeta_pow(2));
        assert_eq!(s.pow(2).apply(&k.zeta_pow(1)), k.zeta_pow(4));
        assert_eq!(s.apply(&k.one()), k.one());
        assert_eq!(s.order(), 4);
        assert!(GaloisAuto::new(&k, 5).is_err());
    }

    #[test]
    fn embeddings() {
        let i = f(4).zeta_pow(1).to_complex();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let z8 = f(8).zeta_pow(1).to_complex();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z8 - Complex64::new(h, h)).norm() < 1e-15);
        let k = f(5);
        let t = &k.zeta_pow(1) + &k.zeta_pow(-1);
        for j in 1..5 {
            assert!(t.embed(j).im.abs() < 1e-12);
        }
    }

    #[test]
    fn change_basis_examples() {
        let k = f(5);
        let z = |e| k.zeta_pow(e);
        let integral: Vec<FieldElement> = (0..4).map(|j| &z(j) - &z(j + 1)).collect();
        let x = &k.one() - &z(1);
        assert_eq!(change_basis(&x, &integral).unwrap(), vec![int(1), int(0), int(0), int(0)]);
        let half = vec![
            k.one(),
            (&z(1) + &z(-1)).scale(&rat(1, 2)),
            (&z(1) - &z(-1)).scale(&rat(1, 2)),
            (&z(2) - &z(-2)).scale(&rat(1, 4)),
        ];
        assert_eq!(change_basis(&k.one(), &half).unwrap(), vec![int(1), int(0), int(0), int(0)]);
        let singular = vec![k.one(), k.one(), z(1), z(2)];
        assert!(matches!(change_basis(&x, &singular), Err(Error::Singular)));
    }

    #[test]
    fn inverse_and_norm() {
        let k = f(5);
        let x = &k.one() - &k.zeta_pow(1);
        let inv = x.inverse().unwrap();
        assert_eq!(&x * &inv, k.one());
        // N(1 - ζ5) = Φ5(1) = 5
        assert_eq!(x.norm(), int(5));
        assert!(k.zero().inverse().is_err());
    }

    #[test]
    fn conj_matches_embedding() {
        let k = f(7);
        let x = k.element_i64(&[1, -2, 3, 0, 5, -1]).unwrap();
        assert!((x.conj().to_complex() - x.to_complex().conj()).norm() < 1e-12);
    }
}
