//! Length distributions of condensed strings.
//!
//! A pmf is indexed by length: `pmf[l]` is P(length = l). The total length of
//! N independent words is the N-fold convolution. Exact variants lift every
//! `f64` probability to the dyadic rational it represents and accumulate
//! big-integer numerators, so tail probabilities carry no rounding drift.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

fn check_pmf(pmf: &[f64]) -> Result<()> {
    if let Some(p) = pmf.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
    }
    Ok(())
}

/// Discrete convolution of two pmfs.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// N-fold self-convolution; the 0-fold power is the point mass at 0.
pub fn power(pmf: &[f64], n: usize) -> Result<Vec<f64>> {
    check_pmf(pmf)?;
    let mut acc = vec![1.0];
    for _ in 0..n {
        acc = convolve(&acc, pmf);
    }
    Ok(acc)
}

/// Exact pmf. Every finite `f64` is a dyadic rational, so all masses share
/// one power-of-two denominator: `pmf[l] = numerators[l] / 2^denom_log2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactPmf {
    numerators: Vec<BigInt>,
    denom_log2: u64,
}

impl ExactPmf {
    /// Lifts each `f64` to its exact rational value.
    pub fn from_f64(pmf: &[f64]) -> Result<Self> {
        check_pmf(pmf)?;
        let parts: Vec<(u64, i16)> = pmf
            .iter()
            .map(|&p| {
                let (mantissa, exponent, _) = Float::integer_decode(p);
                (mantissa, exponent)
            })
            .collect();
        let base = parts
            .iter()
            .filter(|(m, _)| *m != 0)
            .map(|&(_, e)| e)
            .min()
            .unwrap_or(0)
            .min(0);
        let numerators = parts
            .iter()
            .map(|&(m, e)| BigInt::from(m) << (e - base) as usize)
            .collect();
        Ok(Self {
            numerators,
            denom_log2: u64::from(base.unsigned_abs()),
        })
    }

    pub fn point_mass_zero() -> Self {
        Self {
            numerators: vec![BigInt::one()],
            denom_log2: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    fn denominator(&self) -> BigInt {
        BigInt::one() << self.denom_log2 as usize
    }

    /// P(L = l) as an exact rational.
    pub fn get(&self, l: usize) -> BigRational {
        self.numerators
            .get(l)
            .map(|n| BigRational::new(n.clone(), self.denominator()))
            .unwrap_or_else(BigRational::zero)
    }

    pub fn convolve(&self, other: &Self) -> Self {
        if self.numerators.is_empty() || other.numerators.is_empty() {
            return Self {
                numerators: Vec::new(),
                denom_log2: 0,
            };
        }
        let mut out = vec![BigInt::zero(); self.numerators.len() + other.numerators.len() - 1];
        for (i, x) in self.numerators.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.numerators.iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        Self {
            numerators: out,
            denom_log2: self.denom_log2 + other.denom_log2,
        }
    }

    pub fn power(&self, n: usize) -> Self {
        let mut acc = Self::point_mass_zero();
        for _ in 0..n {
            acc = acc.convolve(self);
        }
        acc
    }

    pub fn mean(&self) -> BigRational {
        let total = self
            .numerators
            .iter()
            .enumerate()
            .fold(BigInt::zero(), |acc, (l, p)| acc + p * BigInt::from(l));
        BigRational::new(total, self.denominator())
    }

    /// Σ over lengths satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(usize) -> bool) -> BigRational {
        let total = self
            .numerators
            .iter()
            .enumerate()
            .filter(|&(l, _)| pred(l))
            .fold(BigInt::zero(), |acc, (_, p)| acc + p);
        BigRational::new(total, self.denominator())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len()).map(|l| rational_to_f64(&self.get(l))).collect()
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// P(L > ℓ) for the N-fold total, exactly.
pub fn tail_greater(pmf: &[f64], n: usize, ell: usize) -> Result<f64> {
    let total = ExactPmf::from_f64(pmf)?.power(n);
    Ok(rational_to_f64(&total.mass_where(|l| l > ell)))
}

/// P(L < ℓ) for the N-fold total, exactly. `ell` may be fractional.
pub fn prob_less(pmf: &[f64], n: usize, ell: f64) -> Result<f64> {
    let total = ExactPmf::from_f64(pmf)?.power(n);
    Ok(rational_to_f64(&total.mass_where(|l| (l as f64) < ell)))
}

/// P(|L − N·mean| > N·δ) for the N-fold total, with the comparison done in
/// exact rational arithmetic.
pub fn deviation_probability(pmf: &[f64], n: usize, delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidDistribution(format!("invalid deviation {delta}")));
    }
    let single = ExactPmf::from_f64(pmf)?;
    let n_big = BigRational::from_integer(BigInt::from(n));
    let centre = single.mean() * &n_big;
    let radius = BigRational::from_float(delta).expect("finite") * &n_big;
    let total = single.power(n);
    let mass = total.mass_where(|l| {
        let diff = BigRational::from_integer(BigInt::from(l)) - &centre;
        let abs = if diff < BigRational::zero() { -diff } else { diff };
        abs > radius
    });
    Ok(rational_to_f64(&mass))
}
