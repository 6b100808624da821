use crate::error::{Result, SigError};
use crate::scalar::Scalar;
use crate::tensor_algebra::{check_dim, GroupTensor, TensorPoly, Word};

/// Replacement rule for the switching operator `Ψ`.
///
/// `sources[k]` is searched for in the input, `targets[k]` is written in its
/// place. Occurrences are consecutive, taken in slot order and do not overlap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchSpec {
    sources: Vec<Word>,
    targets: Vec<Word>,
}

impl SwitchSpec {
    pub fn new(sources: Vec<Word>, targets: Vec<Word>) -> Result<Self> {
        if sources.len() != targets.len() {
            return Err(SigError::InvalidParameter(format!(
                "switch needs as many targets as sources ({} vs {})",
                targets.len(),
                sources.len()
            )));
        }
        Ok(SwitchSpec { sources, targets })
    }

    /// One slot per letter: `Ψ^{i1..in}_{j1..jn}` with single-letter words.
    pub fn letters(sources: &[u8], targets: &[u8]) -> Result<Self> {
        Self::new(
            sources.iter().map(|&i| Word::letter(i)).collect(),
            targets.iter().map(|&j| Word::letter(j)).collect(),
        )
    }

    /// A single slot replacing `source` by `target`.
    pub fn single(source: &[u8], target: &[u8]) -> Self {
        SwitchSpec { sources: vec![Word::from(source)], targets: vec![Word::from(target)] }
    }

    pub fn sources(&self) -> &[Word] {
        &self.sources
    }

    pub fn targets(&self) -> &[Word] {
        &self.targets
    }

    /// Sources and targets swapped, the adjoint rule.
    pub fn adjoint(&self) -> Self {
        SwitchSpec { sources: self.targets.clone(), targets: self.sources.clone() }
    }

    /// Total source length minus total target length.
    pub fn shrink(&self) -> isize {
        let s: usize = self.sources.iter().map(Word::len).sum();
        let t: usize = self.targets.iter().map(Word::len).sum();
        s as isize - t as isize
    }

    /// Call `emit` once per way of rewriting `v`, with the rewritten letters.
    pub fn for_each_rewrite(&self, v: &[u8], mut emit: impl FnMut(&[u8])) {
        let n = self.sources.len();
        let mut rest = vec![0usize; n + 1];
        for k in (0..n).rev() {
            rest[k] = rest[k + 1] + self.sources[k].len();
        }
        if rest[0] > v.len() {
            return;
        }
        let mut buf = Vec::with_capacity(v.len() + 8);
        self.rewrite(v, 0, 0, &rest, &mut buf, &mut emit);
    }

    fn rewrite(&self, v: &[u8], pos: usize, slot: usize, rest: &[usize], buf: &mut Vec<u8>, emit: &mut impl FnMut(&[u8])) {
        if slot == self.sources.len() {
            let mark = buf.len();
            buf.extend_from_slice(&v[pos..]);
            emit(buf);
            buf.truncate(mark);
            return;
        }
        let s = self.sources[slot].letters();
        let last = v.len() - rest[slot];
        for p in pos..=last {
            if &v[p..p + s.len()] == s {
                let mark = buf.len();
                buf.extend_from_slice(&v[pos..p]);
                buf.extend_from_slice(self.targets[slot].letters());
                self.rewrite(v, p + s.len(), slot + 1, rest, buf, emit);
                buf.truncate(mark);
            }
        }
    }
}

/// `Ψ` on a polynomial: every admissible rewrite of every word, summed.
pub fn psi<S: Scalar>(l: &TensorPoly<S>, spec: &SwitchSpec) -> TensorPoly<S> {
    let mut out = TensorPoly::zero(l.d());
    for (w, &c) in l.iter() {
        spec.for_each_rewrite(w.letters(), |r| out.add_term(Word::from(r), c));
    }
    out
}

/// `Ψ` on a dense tensor.
///
/// Each output word `v0 t v1` collects the input coefficient of `v0 s v1`.
/// When the sources are longer than the targets by `k` letters, the top `k`
/// output levels would need input beyond the truncation, so the result has
/// depth `N - k`. Otherwise the depth is kept and longer outputs are dropped.
pub fn psi_on_tensor<S: Scalar>(x: &GroupTensor<S>, spec: &SwitchSpec) -> Result<GroupTensor<S>> {
    for w in spec.sources.iter().chain(&spec.targets) {
        if let Some(m) = w.max_letter() {
            if m as usize > x.d() {
                return Err(SigError::InvalidLetter { letter: m, d: x.d() });
            }
        }
    }
    let k = spec.shrink();
    let depth = if k > 0 { x.depth().saturating_sub(k as usize) } else { x.depth() };
    let mut out = GroupTensor::zeros(x.d(), depth);
    let max_in = (depth as isize + k).min(x.depth() as isize);
    if max_in < 0 {
        return Ok(out);
    }
    let d = x.d();
    for n in 0..=max_in as usize {
        for (idx, &c) in x.level(n).iter().enumerate() {
            if c == S::zero() {
                continue;
            }
            let v = Word::from_level_index(idx, n, d);
            spec.for_each_rewrite(v.letters(), |r| {
                let i = out.level_offset(r.len()) + Word::from(r).level_index(d);
                out.as_mut_slice()[i] += c;
            });
        }
    }
    Ok(out)
}

/// Shorthand for `Ψ^{src}_{tgt}` with a single slot.
pub(crate) fn psi1<S: Scalar>(l: &TensorPoly<S>, src: &[u8], tgt: &[u8]) -> TensorPoly<S> {
    psi(l, &SwitchSpec::single(src, tgt))
}

pub(crate) fn same_dim<S: Scalar>(a: &TensorPoly<S>, b: &TensorPoly<S>) -> Result<()> {
    check_dim(a.d(), b.d())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::{all_words, pair};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn single_letter_rewrite() {
        let l = TensorPoly::<f64>::word(1, &[0, 1, 1, 0, 1]);
        let out = psi(&l, &SwitchSpec::letters(&[1], &[0]).unwrap());
        let expect =
            TensorPoly::from_terms(1, vec![(w("00101"), 1.0), (w("01001"), 1.0), (w("01100"), 1.0)]).unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn two_slots_keep_order() {
        // 1 then 2, in that order
        let l = TensorPoly::<f64>::word(2, &[2, 1, 2]);
        let out = psi(&l, &SwitchSpec::letters(&[1, 2], &[0, 0]).unwrap());
        assert_eq!(out, TensorPoly::word(2, &[2, 0, 0]));
    }

    #[test]
    fn block_source_is_consecutive() {
        let l = TensorPoly::<f64>::word(1, &[1, 0, 1, 1, 1]);
        let out = psi(&l, &SwitchSpec::single(&[1, 1], &[0]));
        let expect = TensorPoly::from_terms(1, vec![(w("1001"), 1.0), (w("1010"), 1.0)]).unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn tensor_and_poly_forms_are_adjoint() {
        let x = GroupTensor::<f64>::segment_exp(&[0.3, -0.7, 0.4], 5);
        let spec = SwitchSpec::single(&[1, 2], &[0]);
        let y = psi_on_tensor(&x, &spec).unwrap();
        assert_eq!(y.depth(), 4);
        for v in all_words(2, 4) {
            let l = TensorPoly::monomial(2, v, 1.0);
            let a = pair(&l, &y).unwrap();
            let b = pair(&psi(&l, &spec.adjoint()), &x).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_slots_rejected() {
        assert!(SwitchSpec::letters(&[1, 2], &[0]).is_err());
    }
}
