use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use super::word::Word;
use crate::error::{Result, SigError};
use crate::scalar::Scalar;

/// A finite linear combination of words, i.e. a linear functional on signatures.
///
/// Stored sparsely; exact zeros are never kept, so two equal polynomials have
/// identical maps.
#[derive(Clone, PartialEq, Debug)]
pub struct TensorPoly<S> {
    d: usize,
    coeffs: BTreeMap<Word, S>,
}

pub(crate) fn check_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(SigError::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

impl<S: Scalar> TensorPoly<S> {
    pub fn zero(d: usize) -> Self {
        TensorPoly { d, coeffs: BTreeMap::new() }
    }

    /// `c` times the empty word.
    pub fn constant(d: usize, c: S) -> Self {
        Self::monomial(d, Word::empty(), c)
    }

    /// `c` times a single word. Letters are not range checked.
    pub fn monomial(d: usize, w: Word, c: S) -> Self {
        let mut p = Self::zero(d);
        p.add_term(w, c);
        p
    }

    /// A single word with coefficient one, from its letters.
    pub fn word(d: usize, letters: &[u8]) -> Self {
        Self::monomial(d, Word::from(letters), S::one())
    }

    /// Build from `(word, coefficient)` pairs, summing repeats and validating letters.
    pub fn from_terms<I>(d: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Word, S)>,
    {
        let mut p = Self::zero(d);
        for (w, c) in terms {
            if let Some(m) = w.max_letter() {
                if m as usize > d {
                    return Err(SigError::InvalidLetter { letter: m, d });
                }
            }
            p.add_term(w, c);
        }
        Ok(p)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Length of the longest word; zero for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().next_back().map_or(0, |w| w.len())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> S {
        self.coeffs.get(w).copied().unwrap_or_else(S::zero)
    }

    pub fn constant_term(&self) -> S {
        self.coeff(&Word::empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &S)> {
        self.coeffs.iter()
    }

    pub fn words(&self) -> impl Iterator<Item = &Word> {
        self.coeffs.keys()
    }

    /// Accumulate `c * w`, dropping the entry if it cancels to zero.
    pub fn add_term(&mut self, w: Word, c: S) {
        if c == S::zero() {
            return;
        }
        match self.coeffs.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == S::zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: S) -> Result<()> {
        check_dim(self.d, other.d)?;
        for (w, &x) in other.iter() {
            self.add_term(w.clone(), x * c);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, S::one())?;
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(other, -S::one())?;
        Ok(out)
    }

    pub fn scale(&self, c: S) -> Self {
        let mut out = Self::zero(self.d);
        for (w, &x) in self.iter() {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    /// Drop every word longer than `n`.
    pub fn truncate(&self, n: usize) -> Self {
        TensorPoly {
            d: self.d,
            coeffs: self.coeffs.iter().filter(|(w, _)| w.len() <= n).map(|(w, &c)| (w.clone(), c)).collect(),
        }
    }

    /// Keep only the words of length exactly `n`.
    pub fn level(&self, n: usize) -> Self {
        TensorPoly {
            d: self.d,
            coeffs: self.coeffs.iter().filter(|(w, _)| w.len() == n).map(|(w, &c)| (w.clone(), c)).collect(),
        }
    }

    /// `l ⊗ i`: append a letter to every word.
    pub fn append_letter(&self, i: u8) -> Self {
        TensorPoly {
            d: self.d,
            coeffs: self
                .coeffs
                .iter()
                .map(|(w, &c)| {
                    let mut w = w.clone();
                    w.push(i);
                    (w, c)
                })
                .collect(),
        }
    }

    /// Concatenation product, bilinear on words.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        check_dim(self.d, other.d)?;
        let mut out = Self::zero(self.d);
        for (u, &a) in self.iter() {
            for (v, &b) in other.iter() {
                out.add_term(u.concat(v), a * b);
            }
        }
        Ok(out)
    }

    /// `l|_i`: words ending in `i`, with that last letter removed.
    pub fn right_projection(&self, i: u8) -> Self {
        let mut out = Self::zero(self.d);
        for (w, &c) in self.iter() {
            if w.last() == Some(i) {
                out.add_term(w.prefix(), c);
            }
        }
        out
    }

    /// Largest absolute coefficient difference, measured through `to_f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64
    where
        S: num_traits::ToPrimitive,
    {
        let mut m = 0.0f64;
        for (w, &c) in self.iter() {
            let diff = (c - other.coeff(w)).to_f64().unwrap_or(f64::NAN).abs();
            m = m.max(diff);
        }
        for (w, &c) in other.iter() {
            if !self.coeffs.contains_key(w) {
                m = m.max(c.to_f64().unwrap_or(f64::NAN).abs());
            }
        }
        m
    }

    /// Change coefficient type.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(S) -> T) -> TensorPoly<T> {
        let mut out = TensorPoly::zero(self.d);
        for (w, &c) in self.iter() {
            out.add_term(w.clone(), f(c));
        }
        out
    }

    /// The same polynomial viewed over a larger alphabet.
    pub fn with_dim(&self, d: usize) -> Result<Self> {
        if let Some(m) = self.coeffs.keys().filter_map(|w| w.max_letter()).max() {
            if m as usize > d {
                return Err(SigError::InvalidLetter { letter: m, d });
            }
        }
        Ok(TensorPoly { d, coeffs: self.coeffs.clone() })
    }
}

impl<S: Scalar> Add for &TensorPoly<S> {
    type Output = TensorPoly<S>;
    fn add(self, rhs: Self) -> TensorPoly<S> {
        self.try_add(rhs).expect("alphabet mismatch in polynomial sum")
    }
}

impl<S: Scalar> Sub for &TensorPoly<S> {
    type Output = TensorPoly<S>;
    fn sub(self, rhs: Self) -> TensorPoly<S> {
        self.try_sub(rhs).expect("alphabet mismatch in polynomial difference")
    }
}

impl<S: Scalar> Neg for &TensorPoly<S> {
    type Output = TensorPoly<S>;
    fn neg(self) -> TensorPoly<S> {
        self.scale(-S::one())
    }
}

impl<S: Scalar> Mul<S> for &TensorPoly<S> {
    type Output = TensorPoly<S>;
    fn mul(self, rhs: S) -> TensorPoly<S> {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(d: usize, terms: &[(&str, f64)]) -> TensorPoly<f64> {
        TensorPoly::from_terms(d, terms.iter().map(|(w, c)| (Word::parse(w).unwrap(), *c))).unwrap()
    }

    #[test]
    fn zeros_are_dropped() {
        let a = p(1, &[("01", 1.0), ("1", 2.0)]);
        let b = p(1, &[("01", -1.0)]);
        let s = &a + &b;
        assert_eq!(s, p(1, &[("1", 2.0)]));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn degree_of_zero_is_zero() {
        assert_eq!(TensorPoly::<f64>::zero(2).degree(), 0);
        assert_eq!(p(2, &[("e", 1.0), ("012", 1.0)]).degree(), 3);
    }

    #[test]
    fn right_projection_strips_last_letter() {
        let l = p(2, &[("01", 2.0), ("11", 3.0), ("12", 5.0), ("1", 7.0)]);
        assert_eq!(l.right_projection(1), p(2, &[("0", 2.0), ("1", 3.0), ("e", 7.0)]));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = TensorPoly::<f64>::zero(1);
        let b = TensorPoly::<f64>::zero(2);
        assert!(matches!(a.try_add(&b), Err(SigError::DimensionMismatch { .. })));
    }

    #[test]
    fn from_terms_checks_letters() {
        let r = TensorPoly::<f64>::from_terms(1, vec![(Word::from([2u8]), 1.0)]);
        assert!(matches!(r, Err(SigError::InvalidLetter { .. })));
    }
}
