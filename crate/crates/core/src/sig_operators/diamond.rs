use super::switching::{psi1, same_dim};
use super::CoeffVector;
use crate::error::{Result, SigError};
use crate::scalar::Scalar;
use crate::tensor_algebra::{shuffle_truncated, TensorPoly, Word};

/// `l ⋄^{u1,u2}_k l'` from its definition: for every split `v = v1 u1 v2` of a
/// word of `l` and `v' = v1' u2 v2'` of a word of `l'`, add
/// `(v1 ⧢ v1') k (v2 ⧢ v2')`.
pub fn diamond_direct<S: Scalar>(l: &TensorPoly<S>, lp: &TensorPoly<S>, u1: &[u8], u2: &[u8], k: u8) -> Result<TensorPoly<S>> {
    same_dim(l, lp)?;
    let d = l.d();
    let splits = |v: &[u8], u: &[u8]| -> Vec<(Word, Word)> {
        let mut out = Vec::new();
        if u.len() > v.len() {
            return out;
        }
        for p in 0..=v.len() - u.len() {
            if &v[p..p + u.len()] == u {
                out.push((Word::from(&v[..p]), Word::from(&v[p + u.len()..])));
            }
        }
        out
    };
    let mut out = TensorPoly::zero(d);
    for (v, &a) in l.iter() {
        let sv = splits(v.letters(), u1);
        if sv.is_empty() {
            continue;
        }
        for (vp, &b) in lp.iter() {
            for (v1, v2) in &sv {
                for (w1, w2) in splits(vp.letters(), u2) {
                    let left = shuffle_truncated(&TensorPoly::monomial(d, v1.clone(), S::one()), &TensorPoly::monomial(d, w1, S::one()), usize::MAX)?;
                    let right = shuffle_truncated(&TensorPoly::monomial(d, v2.clone(), S::one()), &TensorPoly::monomial(d, w2, S::one()), usize::MAX)?;
                    let prod = left.append_letter(k).concat(&right)?;
                    out.add_scaled(&prod, a * b)?;
                }
            }
        }
    }
    Ok(out)
}

/// `l ⋄^{i,i}_k l'` through the carré du champ,
/// `½ (Ψ^{ii}_k(l ⧢ l') - Ψ^{ii}_k(l) ⧢ l' - l ⧢ Ψ^{ii}_k(l'))`.
pub fn diamond_cdc<S: Scalar>(l: &TensorPoly<S>, lp: &TensorPoly<S>, i: u8, k: u8) -> Result<TensorPoly<S>> {
    diamond_cdc_capped(l, lp, i, k, usize::MAX)
}

/// [`diamond_cdc`] keeping only words of length at most `cap`. Every kept
/// coefficient is exact.
pub fn diamond_cdc_capped<S: Scalar>(l: &TensorPoly<S>, lp: &TensorPoly<S>, i: u8, k: u8, cap: usize) -> Result<TensorPoly<S>> {
    same_dim(l, lp)?;
    if i == 0 || i as usize > l.d() {
        return Err(SigError::InvalidLetter { letter: i, d: l.d() });
    }
    let ii = [i, i];
    let full = psi1(&shuffle_truncated(l, lp, cap.saturating_add(1))?, &ii, &[k]);
    let a = shuffle_truncated(&psi1(l, &ii, &[k]), lp, cap)?;
    let b = shuffle_truncated(l, &psi1(lp, &ii, &[k]), cap)?;
    let mut out = full.truncate(cap);
    out.add_scaled(&a, -S::one())?;
    out.add_scaled(&b, -S::one())?;
    Ok(out.scale(S::one() / S::from_int(2)))
}

/// General diamond: the carré du champ form when both inserted words are the
/// same single letter, the definition otherwise.
pub fn diamond<S: Scalar>(l: &TensorPoly<S>, lp: &TensorPoly<S>, u1: &[u8], u2: &[u8], k: u8) -> Result<TensorPoly<S>> {
    if u1.len() == 1 && u1 == u2 && u1[0] != 0 {
        diamond_cdc(l, lp, u1[0], k)
    } else {
        diamond_direct(l, lp, u1, u2, k)
    }
}

/// `l ⋄ h = Σ_i l ⋄^{i,i}_0 h_i`, the coefficient of `⟨D⟨l⟩, h⟩` when `h = D⟨h_i⟩`
/// componentwise.
pub fn diamond_vec<S: Scalar>(l: &TensorPoly<S>, h: &CoeffVector<S>) -> Result<TensorPoly<S>> {
    diamond_vec_capped(l, h, usize::MAX)
}

pub fn diamond_vec_capped<S: Scalar>(l: &TensorPoly<S>, h: &CoeffVector<S>, cap: usize) -> Result<TensorPoly<S>> {
    if h.d() != l.d() {
        return Err(SigError::DimensionMismatch { left: l.d(), right: h.d() });
    }
    let mut out = TensorPoly::zero(l.d());
    for i in 1..=l.d() as u8 {
        let hi = h.get(i);
        if hi.is_zero() {
            continue;
        }
        out.add_scaled(&diamond_cdc_capped(l, hi, i, 0, cap)?, S::one())?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w_with_itself_is_time() {
        let l = TensorPoly::<f64>::word(1, &[1]);
        let a = diamond_cdc(&l, &l, 1, 0).unwrap();
        assert_eq!(a, TensorPoly::word(1, &[0]));
        assert_eq!(diamond_direct(&l, &l, &[1], &[1], 0).unwrap(), a);
    }

    #[test]
    fn cdc_matches_definition_on_small_words() {
        let l = TensorPoly::from_terms(2, vec![(Word::from([1u8, 0, 1]), 1.5), (Word::from([2u8, 1]), -0.5)]).unwrap();
        let lp = TensorPoly::from_terms(2, vec![(Word::from([0u8, 1]), 2.0), (Word::from([1u8, 1]), 1.0)]).unwrap();
        let a = diamond_cdc(&l, &lp, 1, 0).unwrap();
        let b = diamond_direct(&l, &lp, &[1], &[1], 0).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-13);
    }

    #[test]
    fn capped_agrees_below_cap() {
        let l = TensorPoly::from_terms(1, vec![(Word::from([1u8, 1, 0]), 1.0), (Word::from([1u8]), 2.0)]).unwrap();
        let full = diamond_cdc(&l, &l, 1, 0).unwrap();
        let cap = diamond_cdc_capped(&l, &l, 1, 0, 3).unwrap();
        assert_eq!(full.truncate(3), cap);
    }
}
