use super::poly::{check_dim, TensorPoly};
use super::word::Word;
use crate::error::{Result, SigError};
use crate::scalar::Scalar;

/// A dense element of the truncated tensor algebra `T^N(R^{d+1})`.
///
/// Level `n` holds `(d+1)^n` coefficients, indexed by [`Word::level_index`].
/// Signatures, expected signatures and their products live here.
#[derive(Clone, PartialEq, Debug)]
pub struct GroupTensor<S> {
    d: usize,
    depth: usize,
    data: Vec<S>,
    offsets: Vec<usize>,
}

impl<S: Scalar> GroupTensor<S> {
    pub fn zeros(d: usize, depth: usize) -> Self {
        let base = d + 1;
        let mut offsets = Vec::with_capacity(depth + 2);
        let mut off = 0;
        let mut size = 1;
        for _ in 0..=depth {
            offsets.push(off);
            off += size;
            size *= base;
        }
        offsets.push(off);
        GroupTensor { d, depth, data: vec![S::zero(); off], offsets }
    }

    /// The unit `1 = ∅`.
    pub fn unit(d: usize, depth: usize) -> Self {
        let mut t = Self::zeros(d, depth);
        t.data[0] = S::one();
        t
    }

    /// Dense copy of a polynomial.
    pub fn from_poly(l: &TensorPoly<S>, depth: usize) -> Result<Self> {
        if l.degree() > depth {
            return Err(SigError::DegreeExceedsTruncation { degree: l.degree(), level: depth });
        }
        let mut t = Self::zeros(l.d(), depth);
        for (w, &c) in l.iter() {
            *t.get_mut(w) = c;
        }
        Ok(t)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn level(&self, n: usize) -> &[S] {
        &self.data[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn level_mut(&mut self, n: usize) -> &mut [S] {
        let (a, b) = (self.offsets[n], self.offsets[n + 1]);
        &mut self.data[a..b]
    }

    /// Offset of level `n` inside [`GroupTensor::as_slice`].
    pub fn level_offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    /// Flat position of a word. Panics if the word is longer than the depth.
    pub fn flat_index(&self, w: &Word) -> usize {
        assert!(w.len() <= self.depth, "word {w} longer than truncation {}", self.depth);
        self.offsets[w.len()] + w.level_index(self.d)
    }

    /// Coefficient of a word; zero for words beyond the truncation.
    pub fn get(&self, w: &Word) -> S {
        if w.len() > self.depth {
            return S::zero();
        }
        self.data[self.flat_index(w)]
    }

    /// Coefficient of a word given by its letters, `None` beyond the truncation.
    pub fn coeff_of(&self, letters: &[u8]) -> Option<S> {
        if letters.len() > self.depth {
            return None;
        }
        let base = self.d + 1;
        let idx = letters.iter().fold(0usize, |acc, &l| acc * base + l as usize);
        Some(self.data[self.offsets[letters.len()] + idx])
    }

    /// `x ⊗ i`, dropping what falls beyond the truncation.
    pub fn append_letter(&self, i: u8) -> Self {
        let base = self.d + 1;
        let mut out = Self::zeros(self.d, self.depth);
        for n in 0..self.depth {
            let src = self.level(n);
            let off = out.offsets[n + 1];
            for (idx, &c) in src.iter().enumerate() {
                out.data[off + idx * base + i as usize] = c;
            }
        }
        out
    }

    pub fn get_mut(&mut self, w: &Word) -> &mut S {
        let i = self.flat_index(w);
        &mut self.data[i]
    }

    pub fn is_group_like(&self) -> bool {
        self.data[0] == S::one()
    }

    /// Drop all levels above `n`.
    pub fn truncate(&self, n: usize) -> Self {
        let n = n.min(self.depth);
        let mut t = Self::zeros(self.d, n);
        let len = t.data.len();
        t.data.copy_from_slice(&self.data[..len]);
        t
    }

    pub fn scale(&self, c: S) -> Self {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|x| *x *= c);
        t
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut t = self.clone();
        t.data.iter_mut().zip(&other.data).for_each(|(a, &b)| *a += b);
        Ok(t)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        check_dim(self.d, other.d)?;
        if self.depth != other.depth {
            return Err(SigError::TruncationMismatch { left: self.depth, right: other.depth });
        }
        Ok(())
    }

    /// Sparse view, exact zeros dropped.
    pub fn to_poly(&self) -> TensorPoly<S> {
        let mut p = TensorPoly::zero(self.d);
        for n in 0..=self.depth {
            for (i, &c) in self.level(n).iter().enumerate() {
                p.add_term(Word::from_level_index(i, n, self.d), c);
            }
        }
        p
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64
    where
        S: num_traits::ToPrimitive,
    {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).to_f64().unwrap_or(f64::NAN).abs())
            .fold(0.0, f64::max)
    }

    /// Multiply on the right by the exponential of a single increment,
    /// `self ← self ⊗ exp(Δ)`, in place.
    ///
    /// Level `n` of the product is evaluated by Horner's rule
    /// `((x_0 Δ/n + x_1) Δ/(n-1) + ...) Δ/1 + x_n`, top level first so the
    /// lower levels are still the old ones when they are read.
    pub fn mul_segment_exp(&mut self, delta: &[S]) {
        let base = self.d + 1;
        assert_eq!(delta.len(), base, "increment must have d + 1 components");
        let mut acc = Vec::with_capacity(self.data.len());
        let mut next = Vec::with_capacity(self.data.len());
        for n in (1..=self.depth).rev() {
            acc.clear();
            acc.push(self.data[0]);
            for k in 1..=n {
                let f = S::one() / S::from_int((n - k + 1) as i64);
                let xk = &self.data[self.offsets[k]..self.offsets[k + 1]];
                next.clear();
                for (a, &va) in acc.iter().enumerate() {
                    let va = va * f;
                    for (b, &db) in delta.iter().enumerate() {
                        next.push(va * db + xk[a * base + b]);
                    }
                }
                std::mem::swap(&mut acc, &mut next);
            }
            let off = self.offsets[n];
            self.data[off..off + acc.len()].copy_from_slice(&acc);
        }
    }

    /// `exp(Δ)` of a single increment, `Σ Δ^{⊗n}/n!`.
    pub fn segment_exp(delta: &[S], depth: usize) -> Self {
        let d = delta.len() - 1;
        let mut t = Self::unit(d, depth);
        for n in 1..=depth {
            let f = S::one() / S::from_int(n as i64);
            let (lo, hi) = t.data.split_at_mut(t.offsets[n]);
            let prev = &lo[t.offsets[n - 1]..];
            let mut k = 0;
            for &p in prev {
                for &x in delta {
                    hi[k] = p * x * f;
                    k += 1;
                }
            }
        }
        t
    }
}

/// `⟨l, x⟩ = Σ_v l^v x^v`.
pub fn pair<S: Scalar>(l: &TensorPoly<S>, x: &GroupTensor<S>) -> Result<S> {
    check_dim(l.d(), x.d())?;
    if l.degree() > x.depth() {
        return Err(SigError::DegreeExceedsTruncation { degree: l.degree(), level: x.depth() });
    }
    let mut s = S::zero();
    for (w, &c) in l.iter() {
        s += c * x.data[x.flat_index(w)];
    }
    Ok(s)
}

/// Truncated tensor product `a ⊗ b`.
pub fn chen_product<S: Scalar>(a: &GroupTensor<S>, b: &GroupTensor<S>) -> Result<GroupTensor<S>> {
    a.compatible(b)?;
    let mut out = GroupTensor::zeros(a.d, a.depth);
    for n in 0..=a.depth {
        let off = out.offsets[n];
        for k in 0..=n {
            let la = a.level(k);
            let lb = b.level(n - k);
            let stride = lb.len();
            for (i, &x) in la.iter().enumerate() {
                if x == S::zero() {
                    continue;
                }
                let dst = &mut out.data[off + i * stride..off + (i + 1) * stride];
                for (o, &y) in dst.iter_mut().zip(lb) {
                    *o += x * y;
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of a group-like element, level by level.
pub fn group_inverse<S: Scalar>(x: &GroupTensor<S>) -> Result<GroupTensor<S>> {
    if !x.is_group_like() {
        return Err(SigError::NotGroupLike);
    }
    let mut y = GroupTensor::unit(x.d, x.depth);
    for n in 1..=x.depth {
        let mut lvl = vec![S::zero(); y.level(n).len()];
        for k in 1..=n {
            let lx = x.level(k);
            let ly = y.level(n - k);
            let stride = ly.len();
            for (i, &a) in lx.iter().enumerate() {
                if a == S::zero() {
                    continue;
                }
                for (j, &b) in ly.iter().enumerate() {
                    lvl[i * stride + j] -= a * b;
                }
            }
        }
        y.level_mut(n).copy_from_slice(&lvl);
    }
    Ok(y)
}

/// Tensor exponential of a polynomial with zero constant term, truncated at `depth`.
pub fn tensor_exp<S: Scalar>(l: &TensorPoly<S>, depth: usize) -> Result<GroupTensor<S>> {
    if l.constant_term() != S::zero() {
        return Err(SigError::NonzeroConstantTerm);
    }
    let x = GroupTensor::from_poly(&l.truncate(depth), depth)?;
    let mut out = GroupTensor::unit(l.d(), depth);
    let mut term = GroupTensor::unit(l.d(), depth);
    for k in 1..=depth {
        term = chen_product(&term, &x)?.scale(S::one() / S::from_int(k as i64));
        out = out.try_add(&term)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_exp_matches_tensor_exp() {
        let delta = [0.1, -0.3, 0.7];
        let mut l = TensorPoly::zero(2);
        for (i, &x) in delta.iter().enumerate() {
            l.add_term(Word::letter(i as u8), x);
        }
        let a = GroupTensor::segment_exp(&delta, 4);
        let b = tensor_exp(&l, 4).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn horner_update_matches_chen_product() {
        let x = GroupTensor::segment_exp(&[0.2, 0.5, -0.1], 5);
        let delta = [0.3, -0.4, 0.9];
        let mut h = x.clone();
        h.mul_segment_exp(&delta);
        let c = chen_product(&x, &GroupTensor::segment_exp(&delta, 5)).unwrap();
        assert!(h.max_abs_diff(&c) < 1e-14);
    }

    #[test]
    fn inverse_of_segment_is_negated_segment() {
        let x = GroupTensor::segment_exp(&[0.2, 0.5], 6);
        let y = GroupTensor::segment_exp(&[-0.2, -0.5], 6);
        assert!(group_inverse(&x).unwrap().max_abs_diff(&y) < 1e-15);
    }

    #[test]
    fn pair_checks_degree() {
        let x = GroupTensor::<f64>::unit(1, 2);
        let l = TensorPoly::word(1, &[1, 1, 1]);
        assert!(matches!(pair(&l, &x), Err(SigError::DegreeExceedsTruncation { degree: 3, level: 2 })));
    }

    #[test]
    fn exp_rejects_constant() {
        let l = TensorPoly::constant(1, 1.0);
        assert_eq!(tensor_exp(&l, 2), Err(SigError::NonzeroConstantTerm));
    }

    #[test]
    fn inverse_rejects_non_group_like() {
        let x = GroupTensor::<f64>::zeros(1, 2);
        assert_eq!(group_inverse(&x), Err(SigError::NotGroupLike));
    }
}
