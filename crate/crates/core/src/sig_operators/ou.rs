use super::switching::psi1;
use crate::error::{Result, SigError};
use crate::scalar::{Real, Scalar};
use crate::tensor_algebra::{shuffle, TensorPoly, Word};

/// Mean reversion speeds per Brownian letter and the OU time `θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct OuParams<S> {
    pub kappa: Vec<S>,
    pub theta: S,
}

fn check_kappa<S>(l_d: usize, kappa: &[S]) -> Result<()> {
    if kappa.len() != l_d {
        return Err(SigError::DimensionMismatch { left: l_d, right: kappa.len() });
    }
    Ok(())
}

/// `Λ_i`: each word scaled by how many times it contains `i`.
pub fn lambda_op<S: Scalar>(l: &TensorPoly<S>, i: u8) -> TensorPoly<S> {
    let mut out = TensorPoly::zero(l.d());
    for (w, &c) in l.iter() {
        let n = w.count(i);
        if n > 0 {
            out.add_term(w.clone(), c * S::from_int(n as i64));
        }
    }
    out
}

/// `J_i^c`: each word scaled by `exp(-c |v|_i)`.
pub fn j_op<S: Real>(l: &TensorPoly<S>, i: u8, c: S) -> TensorPoly<S> {
    let mut out = TensorPoly::zero(l.d());
    for (w, &x) in l.iter() {
        let n = S::from_int(w.count(i) as i64);
        out.add_term(w.clone(), x * (-c * n).exp());
    }
    out
}

/// `exp(Σ_i c_i Ψ^{ii}_0)(l)`. The sum terminates since every application
/// shortens words by one.
pub fn exp_psi_ii<S: Scalar>(l: &TensorPoly<S>, c: &[S]) -> TensorPoly<S> {
    let mut out = l.clone();
    let mut term = l.clone();
    let mut k = 1;
    while !term.is_zero() {
        let mut next = TensorPoly::zero(l.d());
        for (idx, &ci) in c.iter().enumerate() {
            if ci == S::zero() {
                continue;
            }
            let i = idx as u8 + 1;
            next.add_scaled(&psi1(&term, &[i, i], &[0]), ci).expect("same alphabet");
        }
        term = next.scale(S::one() / S::from_int(k));
        out.add_scaled(&term, S::one()).expect("same alphabet");
        k += 1;
    }
    out
}

/// Adjoint of the OU semigroup on signature functionals:
/// `⟨l, sig(Ŵ)⟩` evaluated on `e^{-κθ} W + sqrt(1 - e^{-2κθ}) W'` and averaged
/// over `W'` equals `⟨P*_θ l, sig(Ŵ)⟩`.
pub fn ou_semigroup_adjoint<S: Real>(l: &TensorPoly<S>, p: &OuParams<S>) -> Result<TensorPoly<S>> {
    check_kappa(l.d(), &p.kappa)?;
    let two = S::from_int(2);
    let c: Vec<S> = p.kappa.iter().map(|&k| (S::one() - (-two * k * p.theta).exp()) / two).collect();
    let mut out = exp_psi_ii(l, &c);
    for (idx, &k) in p.kappa.iter().enumerate() {
        out = j_op(&out, idx as u8 + 1, k * p.theta);
    }
    Ok(out)
}

/// Adjoint of the OU generator, `Σ_i κ_i (Ψ^{ii}_0 - Λ_i)`.
pub fn ou_generator_adjoint<S: Scalar>(l: &TensorPoly<S>, kappa: &[S]) -> Result<TensorPoly<S>> {
    check_kappa(l.d(), kappa)?;
    let mut out = TensorPoly::zero(l.d());
    for (idx, &k) in kappa.iter().enumerate() {
        let i = idx as u8 + 1;
        out.add_scaled(&psi1(l, &[i, i], &[0]), k)?;
        out.add_scaled(&lambda_op(l, i), -k)?;
    }
    Ok(out)
}

/// Coefficient of `δ(F e_i)` for `F = ⟨l, sig⟩`: `l ⧢ i - Ψ^i_0(l)`.
pub fn skorokhod_coeff<S: Scalar>(l: &TensorPoly<S>, i: u8) -> Result<TensorPoly<S>> {
    if i == 0 || i as usize > l.d() {
        return Err(SigError::InvalidLetter { letter: i, d: l.d() });
    }
    let sh = shuffle(l, &TensorPoly::monomial(l.d(), Word::letter(i), S::one()))?;
    sh.try_sub(&psi1(l, &[i], &[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn generator_on_square() {
        let l = TensorPoly::<f64>::word(1, &[1, 1]);
        let g = ou_generator_adjoint(&l, &[1.0]).unwrap();
        let expect = TensorPoly::from_terms(1, vec![(w("0"), 1.0), (w("11"), -2.0)]).unwrap();
        assert_eq!(g, expect);
    }

    #[test]
    fn semigroup_on_square() {
        let l = TensorPoly::<f64>::word(1, &[1, 1]);
        let theta: f64 = 0.7;
        let p = ou_semigroup_adjoint(&l, &OuParams { kappa: vec![1.0], theta }).unwrap();
        let a = (-2.0 * theta).exp();
        assert!((p.coeff(&w("11")) - a).abs() < 1e-15);
        assert!((p.coeff(&w("0")) - (1.0 - a) / 2.0).abs() < 1e-15);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn skorokhod_of_w() {
        let l = TensorPoly::<f64>::word(1, &[1]);
        let s = skorokhod_coeff(&l, 1).unwrap();
        let expect = TensorPoly::from_terms(1, vec![(w("11"), 2.0), (w("0"), -1.0)]).unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn kappa_length_checked() {
        let l = TensorPoly::<f64>::word(2, &[1]);
        assert!(ou_generator_adjoint(&l, &[1.0]).is_err());
    }
}
