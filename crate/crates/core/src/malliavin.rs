//! Malliavin derivatives of signature functionals through pierced signatures.
//!
//! `D^i_t ⟨l, sig⟩ = ⟨l, sig_{[0,t]} ⊗ i ⊗ sig_{[t,T]}⟩`: the signature split at
//! `t` with a letter inserted. Iterating gives higher derivatives; averaging
//! the right factors gives Clark-Ocone integrands and chaos kernels.

use crate::error::{Result, SigError};
use crate::path_signature::{expected_brownian_sig, prefix_signatures, SampledPath};
use crate::scalar::{Real, Scalar};
use crate::sig_operators::{psi, SwitchSpec};
use crate::tensor_algebra::{chen_product, pair, GroupTensor, TensorPoly};

/// `prefix ⊗ i_1 ⊗ gap_1 ⊗ i_2 ⊗ ... ⊗ i_n ⊗ gap_n`.
#[derive(Clone, Debug)]
pub struct PiercedChain<S> {
    prefix: GroupTensor<S>,
    insertions: Vec<u8>,
    gaps: Vec<GroupTensor<S>>,
}

impl<S: Scalar> PiercedChain<S> {
    pub fn new(prefix: GroupTensor<S>, insertions: Vec<u8>, gaps: Vec<GroupTensor<S>>) -> Result<Self> {
        if insertions.len() != gaps.len() {
            return Err(SigError::InvalidParameter(format!(
                "{} insertions need {} gaps, got {}",
                insertions.len(),
                insertions.len(),
                gaps.len()
            )));
        }
        let d = prefix.d();
        for g in &gaps {
            if g.d() != d {
                return Err(SigError::DimensionMismatch { left: d, right: g.d() });
            }
        }
        if let Some(&bad) = insertions.iter().find(|&&i| i as usize > d) {
            return Err(SigError::InvalidLetter { letter: bad, d });
        }
        Ok(PiercedChain { prefix, insertions, gaps })
    }

    pub fn d(&self) -> usize {
        self.prefix.d()
    }

    fn factor(&self, k: usize) -> &GroupTensor<S> {
        if k == 0 {
            &self.prefix
        } else {
            &self.gaps[k - 1]
        }
    }
}

fn pierced_word<S: Scalar>(v: &[u8], chain: &PiercedChain<S>, slot: usize, acc: S, total: &mut S) -> Result<()> {
    let f = chain.factor(slot);
    if slot == chain.insertions.len() {
        let c = f.coeff_of(v).ok_or(SigError::DegreeExceedsTruncation { degree: v.len(), level: f.depth() })?;
        *total += acc * c;
        return Ok(());
    }
    let letter = chain.insertions[slot];
    let remaining = chain.insertions.len() - slot;
    if v.len() < remaining {
        return Ok(());
    }
    for p in 0..=v.len() - remaining {
        if v[p] != letter {
            continue;
        }
        let c = f.coeff_of(&v[..p]).ok_or(SigError::DegreeExceedsTruncation { degree: p, level: f.depth() })?;
        if c != S::zero() {
            pierced_word(&v[p + 1..], chain, slot + 1, acc * c, total)?;
        }
    }
    Ok(())
}

/// `⟨l, chain⟩`: every word of `l` split around the inserted letters, in order,
/// with each piece read from its tensor.
pub fn pierced_pair<S: Scalar>(l: &TensorPoly<S>, chain: &PiercedChain<S>) -> Result<S> {
    if l.d() != chain.d() {
        return Err(SigError::DimensionMismatch { left: l.d(), right: chain.d() });
    }
    let mut total = S::zero();
    for (w, &c) in l.iter() {
        let mut t = S::zero();
        pierced_word(w.letters(), chain, 0, S::one(), &mut t)?;
        total += c * t;
    }
    Ok(total)
}

/// Riemann-sum check of the iterated-integral identity on a sampled path.
///
/// Returns `(lhs, rhs)` where `lhs` is the trapezoidal (Stratonovich) sum of
/// `∫ ⟨l, sig_{s_1} ⊗ i_1 ⊗ ... ⊗ i_n ⊗ sig_{s_n,T}⟩ ∘dX^{j_1}_{s_1} ... ∘dX^{j_n}_{s_n}`
/// over the simplex, and `rhs = ⟨Ψ^{i}_{j}(l), sig⟩`. The path is
/// time-augmented: letter 0 is time, letter `k` is component `k`.
pub fn verify_iterated_integral<S: Scalar>(l: &TensorPoly<S>, path: &SampledPath<S>, ins: &[u8], outs: &[u8]) -> Result<(S, S)> {
    if ins.len() != outs.len() {
        return Err(SigError::InvalidParameter("insertions and integrators differ in number".into()));
    }
    if path.dim() != l.d() {
        return Err(SigError::DimensionMismatch { left: l.d(), right: path.dim() });
    }
    let depth = l.degree();
    let prefixes = prefix_signatures(path, depth, true);
    let mut delta = Vec::new();
    let mut segs = Vec::with_capacity(path.n_segments());
    let mut incs = Vec::with_capacity(path.n_segments());
    for m in 0..path.n_segments() {
        path.increment(m, true, &mut delta);
        segs.push(GroupTensor::segment_exp(&delta, depth));
        incs.push(delta.clone());
    }
    let half = S::one() / S::from_int(2);
    let mut y = prefixes;
    for (&i, &j) in ins.iter().zip(outs) {
        let mut z = Vec::with_capacity(y.len());
        let mut cur = GroupTensor::zeros(l.d(), depth);
        z.push(cur.clone());
        for m in 0..segs.len() {
            let dx = incs[m][j as usize] * half;
            let left = chen_product(&y[m].append_letter(i), &segs[m])?;
            let right = y[m + 1].append_letter(i);
            cur = chen_product(&cur, &segs[m])?.try_add(&left.try_add(&right)?.scale(dx))?;
            z.push(cur.clone());
        }
        y = z;
    }
    let lhs = pair(l, y.last().expect("non-empty path"))?;
    let sig = signature_of_full(path, depth);
    let rhs = pair(&psi(l, &SwitchSpec::letters(ins, outs)?), &sig)?;
    Ok((lhs, rhs))
}

fn signature_of_full<S: Scalar>(path: &SampledPath<S>, depth: usize) -> GroupTensor<S> {
    crate::path_signature::signature_of_path(path, depth, true)
}

/// `E[D^i_t F | F_t]` for `F = ⟨l, sig_{[0,T]}⟩`, given `sig_{[0,t]}` and the
/// remaining horizon `T - t`.
pub fn clark_ocone_integrand<S: Real>(l: &TensorPoly<S>, sig_t: &GroupTensor<S>, i: u8, horizon: S) -> Result<S> {
    let depth = l.degree().saturating_sub(1);
    let e = expected_brownian_sig(horizon, l.d(), depth)?;
    pierced_pair(l, &PiercedChain::new(sig_t.clone(), vec![i], vec![e])?)
}

/// Which trailing factor the chaos kernel uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelForm {
    /// `Ê_{s_1} ⊗ i_1 ⊗ Ê_{s_2 - s_1} ⊗ ... ⊗ i_n ⊗ Ê_{T - s_n}`.
    Full,
    /// Last factor `Ê_{s_n - s_{n-1}}` in place of `Ê_{T - s_n}`. Kept only to
    /// compare against; it gives wrong kernels whenever `l` has letters after
    /// the last insertion.
    Truncated,
}

/// `f_n(s_1, .., s_n) = (1/n!) ⟨l, Ê_{s_1} ⊗ i_1 ⊗ ... ⊗ i_n ⊗ Ê_{T - s_n}⟩`,
/// the chaos kernel of `⟨l, sig⟩` on the ordered simplex.
pub fn chaos_kernel<S: Real>(l: &TensorPoly<S>, letters: &[u8], times: &[S], t_end: S, form: KernelForm) -> Result<S> {
    if letters.len() != times.len() {
        return Err(SigError::InvalidParameter("one time per letter".into()));
    }
    let n = letters.len();
    let mut prev = S::zero();
    for &s in times {
        if s < prev || s > t_end {
            return Err(SigError::NonIncreasingTimes);
        }
        prev = s;
    }
    if n == 0 {
        let e = expected_brownian_sig(t_end, l.d(), l.degree())?;
        return pair(l, &e);
    }
    let depth = l.degree().saturating_sub(n);
    let d = l.d();
    let prefix = expected_brownian_sig(times[0], d, depth)?;
    let mut gaps = Vec::with_capacity(n);
    for k in 1..n {
        gaps.push(expected_brownian_sig(times[k] - times[k - 1], d, depth)?);
    }
    let last = match form {
        KernelForm::Full => t_end - times[n - 1],
        KernelForm::Truncated => times[n - 1] - if n >= 2 { times[n - 2] } else { S::zero() },
    };
    gaps.push(expected_brownian_sig(last, d, depth)?);
    let v = pierced_pair(l, &PiercedChain::new(prefix, letters.to_vec(), gaps)?)?;
    Ok(v * S::inv_factorial(n))
}
