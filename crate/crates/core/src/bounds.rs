//! Hasse invariants, maximal-order discriminants and the minimum
//! discriminant / normalized-determinant bounds they imply.
//!
//! Primes are carried as a label and a norm; no ideal arithmetic is done.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteInvariant {
    pub label: String,
    pub norm: u64,
    /// Invariant a/m_P with 0 ≤ a < m_P and gcd(a, m_P) = 1.
    pub a: u64,
    pub m: u64,
}

impl FiniteInvariant {
    pub fn new(label: &str, norm: u64, a: u64, m: u64) -> Self {
        Self {
            label: label.to_string(),
            norm,
            a,
            m,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HasseInvariantSet {
    pub finite: Vec<FiniteInvariant>,
    /// Each ramified real place carries the invariant 1/2.
    pub ramified_real: u32,
}

impl HasseInvariantSet {
    pub fn validate(&self) -> Result<()> {
        for p in &self.finite {
            if p.m == 0 || p.a >= p.m || p.a.gcd(&p.m) != 1 || p.norm < 2 {
                return Err(Error::invalid(format!(
                    "malformed invariant {}/{} at {} (norm {})",
                    p.a, p.m, p.label, p.norm
                )));
            }
        }
        Ok(())
    }

    fn sum(&self) -> BigRational {
        let mut s = BigRational::new(self.ramified_real.into(), 2u32.into());
        for p in &self.finite {
            s += BigRational::new(p.a.into(), p.m.into());
        }
        s
    }
}

/// Σ a/m_P + (ramified real places)/2 ≡ 0 mod 1.
pub fn admissible(inv: &HasseInvariantSet) -> Result<bool> {
    inv.validate()?;
    Ok(inv.sum().is_integer())
}

/// LCM of the local indices, counting 2 for each ramified real place.
pub fn algebra_index(inv: &HasseInvariantSet) -> Result<u64> {
    if !admissible(inv)? {
        return Err(Error::invalid("invariants do not sum to an integer"));
    }
    let mut l = if inv.ramified_real > 0 { 2 } else { 1 };
    for p in &inv.finite {
        l = l.lcm(&p.m);
    }
    Ok(l)
}

/// ∏ p^e over prime norms, kept factored and evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePowerProduct {
    pub factors: Vec<(u64, u64)>,
}

impl PrimePowerProduct {
    pub fn new(factors: Vec<(u64, u64)>) -> Self {
        let mut f: Vec<(u64, u64)> = Vec::new();
        for (p, e) in factors {
            if e == 0 || p == 1 {
                continue;
            }
            match f.iter_mut().find(|(q, _)| *q == p) {
                Some(slot) => slot.1 += e,
                None => f.push((p, e)),
            }
        }
        Self { factors: f }
    }

    pub fn value(&self) -> BigUint {
        self.factors
            .iter()
            .fold(BigUint::one(), |acc, &(p, e)| acc * BigUint::from(p).pow(e as u32))
    }
}

impl fmt::Display for PrimePowerProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// d(Λ/O_K) = ∏ P^{(m_P − 1)·n²/m_P} for a maximal order of an index-n algebra.
pub fn maximal_order_discriminant(inv: &HasseInvariantSet, n: u64) -> Result<PrimePowerProduct> {
    let idx = algebra_index(inv)?;
    if idx != n {
        return Err(Error::invalid(format!("index {n} does not match the invariants' index {idx}")));
    }
    Ok(PrimePowerProduct::new(
        inv.finite.iter().map(|p| (p.norm, (p.m - 1) * n * n / p.m)).collect(),
    ))
}

/// Arithmetic data of a number field center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CenterDescriptor {
    pub name: String,
    pub degree: u32,
    pub r1: u32,
    pub r2: u32,
    /// Norms of the two smallest primes, p1 ≤ p2.
    pub p1: u64,
    pub p2: u64,
    /// |d(O_K/Z)|.
    pub disc: u64,
}

impl CenterDescriptor {
    pub fn new(name: &str, degree: u32, r1: u32, r2: u32, p1: u64, p2: u64, disc: u64) -> Result<Self> {
        if degree != r1 + 2 * r2 {
            return Err(Error::invalid(format!("degree {degree} != r1 + 2 r2 = {}", r1 + 2 * r2)));
        }
        if p1 < 2 || p1 > p2 || disc == 0 {
            return Err(Error::invalid("prime norms must satisfy 2 <= p1 <= p2, disc >= 1"));
        }
        Ok(Self {
            name: name.to_string(),
            degree,
            r1,
            r2,
            p1,
            p2,
            disc,
        })
    }

    pub fn rationals() -> Self {
        Self::new("Q", 1, 1, 0, 2, 3, 1).expect("valid")
    }

    /// Q(√2): 2 ramifies (norm 2), 7 splits (norm 7); 3 and 5 are inert.
    pub fn q_sqrt2() -> Self {
        Self::new("Q(sqrt2)", 2, 2, 0, 2, 7, 8).expect("valid")
    }

    /// Q(√5): 2 is inert (norm 4), 5 ramifies (norm 5).
    pub fn q_sqrt5() -> Self {
        Self::new("Q(sqrt5)", 2, 2, 0, 4, 5, 5).expect("valid")
    }

    /// `Q`, `Q(sqrt2)`, `Q(sqrt5)` or
    /// `custom:degree,r1,r2,p1,p2,disc`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "Q" | "q" => Ok(Self::rationals()),
            "Q(sqrt2)" | "sqrt2" => Ok(Self::q_sqrt2()),
            "Q(sqrt5)" | "sqrt5" => Ok(Self::q_sqrt5()),
            other => {
                let body = other
                    .strip_prefix("custom:")
                    .ok_or_else(|| Error::invalid(format!("unknown center `{other}`")))?;
                let v: Vec<u64> = body
                    .split(',')
                    .map(|t| t.trim().parse::<u64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::invalid(format!("center `{other}`: {e}")))?;
                if v.len() != 6 {
                    return Err(Error::invalid("custom center needs degree,r1,r2,p1,p2,disc"));
                }
                let small = |x: u64| u32::try_from(x).map_err(|_| Error::invalid("degree too large"));
                Self::new(other, small(v[0])?, small(v[1])?, small(v[2])?, v[3], v[4], v[5])
            }
        }
    }
}

/// Smallest O_K-discriminant of a maximal order in an index-n division
/// algebra with the given center.
///
/// With `all_real_ramified` (totally real center, every real place
/// ramified; n even, k = n/2): 2‖n and 2 | m → (P1P2)^{k(k−1)};
/// 4 | n → (P1P2)^{n(n−1)}; 2‖n and m odd → P1^{n(n−1)} P2^{k(k−1)}.
/// Otherwise the general bounds: (P1P2)^{n(n−1)} for 4 | n or n odd; for
/// 2‖n, (P1P2)^{k(k−1)} with at least two real places, P1^{n(n−1)} P2^{k(k−1)}
/// with exactly one, and (P1P2)^{n(n−1)} with none.
pub fn min_discriminant_bound(c: &CenterDescriptor, n: u64, all_real_ramified: bool) -> Result<PrimePowerProduct> {
    if n < 2 {
        return Err(Error::invalid(format!("index {n} must be at least 2")));
    }
    let k = n / 2;
    let full = n * (n - 1);
    let half = k * k.saturating_sub(1);
    let both = |e: u64| PrimePowerProduct::new(vec![(c.p1, e), (c.p2, e)]);
    let mixed = || PrimePowerProduct::new(vec![(c.p1, full), (c.p2, half)]);
    let singly_even = n % 2 == 0 && n % 4 != 0;
    if all_real_ramified {
        if n % 2 != 0 {
            return Err(Error::invalid("real ramification forces an even index"));
        }
        if c.r2 > 0 {
            return Err(Error::invalid(format!("center {} is not totally real", c.name)));
        }
        return Ok(if n % 4 == 0 {
            both(full)
        } else if c.degree % 2 == 0 {
            both(half)
        } else {
            mixed()
        });
    }
    Ok(if !singly_even {
        both(full)
    } else if c.r1 >= 2 {
        both(half)
    } else if c.r1 == 1 {
        mixed()
    } else {
        both(full)
    })
}

/// |d(Λ/Z)| = |N(d(Λ/O_K))| · |d(O_K/Z)|^{n²}.
pub fn z_discriminant(center_disc_norm: &BigUint, field_disc: u64, n: u64) -> BigUint {
    center_disc_norm * BigUint::from(field_disc).pow((n * n) as u32)
}

/// Natural logarithm of a positive big integer.
fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// (1 / z)^{1/(2n)}: the normalized minimum determinant of the code from a
/// maximal order with Z-discriminant z.
pub fn delta_bound(z_disc: &BigUint, n: u64) -> Result<f64> {
    if z_disc.is_zero() || n == 0 {
        return Err(Error::invalid("discriminant and index must be positive"));
    }
    Ok((-ln_big(z_disc) / (2 * n) as f64).exp())
}

/// √z: fundamental volume of the code lattice of a maximal order.
pub fn lattice_volume(z_disc: &BigUint) -> f64 {
    (ln_big(z_disc) / 2.0).exp()
}

/// Rows of the table of optimal finite Hasse invariants for totally real
/// centers with every real place ramified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableRow {
    OddIndex,
    /// Index 4k, [K:Q] odd: 1/(4k), (2k−1)/(4k).
    FourKOddDegree,
    /// Index 4k, [K:Q] even: 1/(4k), and the admissible (4k−1)/(4k).
    FourKEvenDegree,
    /// Index 2k, k odd, [K:Q] even: 1/k, (k−1)/k.
    TwoKEvenDegree,
    /// Index 2k, k odd, [K:Q] odd: (k−2)/(2k), 1/k.
    TwoKOddDegree,
}

pub const TABLE_ROWS: [TableRow; 5] = [
    TableRow::OddIndex,
    TableRow::FourKOddDegree,
    TableRow::FourKEvenDegree,
    TableRow::TwoKEvenDegree,
    TableRow::TwoKOddDegree,
];

impl TableRow {
    pub fn index(&self, k: u64) -> u64 {
        match self {
            TableRow::OddIndex => 2 * k + 1,
            TableRow::FourKOddDegree | TableRow::FourKEvenDegree => 4 * k,
            TableRow::TwoKEvenDegree | TableRow::TwoKOddDegree => 2 * k,
        }
    }

    /// Whether the row applies to (k, m).
    pub fn applies(&self, k: u64, m: u32) -> bool {
        match self {
            TableRow::OddIndex => false,
            TableRow::FourKOddDegree => m % 2 == 1,
            TableRow::FourKEvenDegree => m % 2 == 0,
            TableRow::TwoKEvenDegree => k % 2 == 1 && m % 2 == 0,
            TableRow::TwoKOddDegree => k % 2 == 1 && m % 2 == 1,
        }
    }

    /// Finite invariants as signed fractions (num, den) before normalization.
    pub fn raw_invariants(&self, k: u64) -> Vec<(i64, u64)> {
        let ki = k as i64;
        match self {
            TableRow::OddIndex => Vec::new(),
            TableRow::FourKOddDegree => vec![(1, 4 * k), (2 * ki - 1, 4 * k)],
            TableRow::FourKEvenDegree => vec![(1, 4 * k), (4 * ki - 1, 4 * k)],
            TableRow::TwoKEvenDegree => vec![(1, k), (ki - 1, k)],
            TableRow::TwoKOddDegree => vec![(ki - 2, 2 * k), (1, k)],
        }
    }

    /// Invariant set for index from this row at (k, m), with all m real
    /// places ramified and the two finite primes of norms p1, p2.
    /// Fractions are reduced mod 1; trivial ones are dropped.
    pub fn instantiate(&self, k: u64, m: u32, p1: u64, p2: u64) -> Result<HasseInvariantSet> {
        if k == 0 || !self.applies(k, m) {
            return Err(Error::invalid(format!("row {self:?} does not apply to k = {k}, m = {m}")));
        }
        let finite = self
            .raw_invariants(k)
            .into_iter()
            .zip([("P1", p1), ("P2", p2)])
            .filter_map(|((a, d), (label, norm))| normalize(a, d).map(|(a, m)| FiniteInvariant::new(label, norm, a, m)))
            .collect();
        Ok(HasseInvariantSet {
            finite,
            ramified_real: m,
        })
    }
}

/// a/d reduced to lowest terms in [0, 1); None when it is an integer.
fn normalize(a: i64, d: u64) -> Option<(u64, u64)> {
    let di = d as i64;
    let a = a.rem_euclid(di) as u64;
    if a == 0 {
        return None;
    }
    let g = a.gcd(&d);
    Some((a / g, d / g))
}
