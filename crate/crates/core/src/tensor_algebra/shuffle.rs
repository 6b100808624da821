use super::poly::{check_dim, TensorPoly};
use super::word::Word;
use crate::error::Result;
use crate::scalar::{Real, Scalar};

fn interleave(u: &[u8], v: &[u8], buf: &mut Vec<u8>, emit: &mut impl FnMut(&[u8])) {
    if u.is_empty() || v.is_empty() {
        let mark = buf.len();
        buf.extend_from_slice(u);
        buf.extend_from_slice(v);
        emit(buf);
        buf.truncate(mark);
        return;
    }
    buf.push(u[0]);
    interleave(&u[1..], v, buf, emit);
    buf.pop();
    buf.push(v[0]);
    interleave(u, &v[1..], buf, emit);
    buf.pop();
}

/// Shuffle of two words, with multiplicities.
pub fn shuffle_words<S: Scalar>(d: usize, u: &Word, v: &Word) -> TensorPoly<S> {
    let mut out = TensorPoly::zero(d);
    let mut buf = Vec::with_capacity(u.len() + v.len());
    interleave(u.letters(), v.letters(), &mut buf, &mut |w| out.add_term(Word::from(w), S::one()));
    out
}

/// Shuffle product `l ⧢ l'`.
pub fn shuffle<S: Scalar>(a: &TensorPoly<S>, b: &TensorPoly<S>) -> Result<TensorPoly<S>> {
    shuffle_truncated(a, b, usize::MAX)
}

/// Shuffle product keeping only words of length at most `max_len`.
///
/// Pairs whose lengths already exceed the cap are skipped, so this is much
/// cheaper than truncating the full product.
pub fn shuffle_truncated<S: Scalar>(a: &TensorPoly<S>, b: &TensorPoly<S>, max_len: usize) -> Result<TensorPoly<S>> {
    check_dim(a.d(), b.d())?;
    let mut out = TensorPoly::zero(a.d());
    let mut buf = Vec::new();
    for (u, &x) in a.iter() {
        for (v, &y) in b.iter() {
            if u.len() + v.len() > max_len {
                // b is sorted by length, nothing further fits either
                break;
            }
            let c = x * y;
            interleave(u.letters(), v.letters(), &mut buf, &mut |w| out.add_term(Word::from(w), c));
        }
    }
    Ok(out)
}

/// `l^{⧢n}`, truncated at `max_len`.
pub fn shuffle_power<S: Scalar>(l: &TensorPoly<S>, n: usize, max_len: usize) -> Result<TensorPoly<S>> {
    let mut acc = TensorPoly::constant(l.d(), S::one());
    for _ in 0..n {
        acc = shuffle_truncated(&acc, l, max_len)?;
    }
    Ok(acc)
}

/// Shuffle exponential truncated at level `n`.
///
/// The constant term factors out as an ordinary exponential, the rest is a
/// finite sum because every remaining word has length at least one.
pub fn shuffle_exp<S: Real>(l: &TensorPoly<S>, n: usize) -> Result<TensorPoly<S>> {
    let c = l.constant_term();
    let mut rest = l.truncate(n);
    rest.add_term(Word::empty(), -c);
    let mut out = TensorPoly::constant(l.d(), S::one());
    let mut term = TensorPoly::constant(l.d(), S::one());
    for k in 1..=n {
        term = shuffle_truncated(&term, &rest, n)?.scale(S::one() / S::from_int(k as i64));
        if term.is_zero() {
            break;
        }
        out.add_scaled(&term, S::one())?;
    }
    Ok(out.scale(c.exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_shuffle_counts() {
        let s: TensorPoly<f64> = shuffle_words(2, &Word::from([1u8]), &Word::from([2u8]));
        assert_eq!(s.coeff(&Word::from([1u8, 2])), 1.0);
        assert_eq!(s.coeff(&Word::from([2u8, 1])), 1.0);
        let s: TensorPoly<f64> = shuffle_words(1, &Word::from([1u8]), &Word::from([1u8, 1]));
        assert_eq!(s.coeff(&Word::from([1u8, 1, 1])), 3.0);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn shuffle_recursion_holds() {
        // vi ⧢ wj = (vi ⧢ w) j + (v ⧢ wj) i
        let d = 2;
        let v = Word::from([0u8, 1]);
        let w = Word::from([2u8]);
        let vi = v.concat(&Word::letter(2));
        let wj = w.concat(&Word::letter(1));
        let lhs: TensorPoly<f64> = shuffle_words(d, &vi, &wj);
        let a: TensorPoly<f64> = shuffle_words(d, &vi, &w);
        let b: TensorPoly<f64> = shuffle_words(d, &v, &wj);
        let rhs = &a.append_letter(1) + &b.append_letter(2);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn shuffle_exp_of_single_letter() {
        // exp⧢(a·1) = Σ a^n 1^n, since 1^{⧢n} = n! 1^n
        let l = TensorPoly::monomial(1, Word::letter(1), 0.5);
        let e = shuffle_exp(&l, 5).unwrap();
        for n in 0..=5 {
            let w = Word::from(vec![1u8; n].as_slice());
            assert!((e.coeff(&w) - 0.5f64.powi(n as i32)).abs() < 1e-15);
        }
        assert_eq!(e.degree(), 5);
    }

    #[test]
    fn shuffle_exp_constant_factor() {
        let mut l = TensorPoly::monomial(1, Word::letter(0), 1.0);
        l.add_term(Word::empty(), 2.0);
        let e = shuffle_exp(&l, 3).unwrap();
        assert!((e.constant_term() - 2f64.exp()).abs() < 1e-12);
        assert!((e.coeff(&Word::from([0u8, 0, 0])) - 2f64.exp()).abs() < 1e-12);
    }
}
