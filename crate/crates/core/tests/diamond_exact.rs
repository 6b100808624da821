//! Diamond products computed by hand, in exact rational arithmetic.

use num_rational::Ratio;
use sigmal::sig_operators::{diamond, diamond_cdc, diamond_direct, diamond_vec, CoeffVector};
use sigmal::tensor_algebra::{TensorPoly, Word};

type Q = Ratio<i64>;

fn q(t: &[(&str, i64, i64)]) -> TensorPoly<Q> {
    TensorPoly::from_terms(2, t.iter().map(|&(w, n, m)| (Word::parse(w).unwrap(), Q::new(n, m)))).unwrap()
}

#[test]
fn brownian_with_itself_is_time() {
    // ∫ D_t W · D_t W dt = T
    assert_eq!(diamond_cdc(&q(&[("1", 1, 1)]), &q(&[("1", 1, 1)]), 1, 0).unwrap(), q(&[("0", 1, 1)]));
}

#[test]
fn half_square_with_brownian() {
    // D(W²/2) = W_T, so the product integrates to T W_T = ⟨01 + 10⟩
    let got = diamond_cdc(&q(&[("11", 1, 1)]), &q(&[("1", 1, 1)]), 1, 0).unwrap();
    assert_eq!(got, q(&[("01", 1, 1), ("10", 1, 1)]));
}

#[test]
fn time_integral_of_brownian() {
    // ⟨10⟩ = ∫ W dt has D_t = T - t, and ∫ (T - t) dt = T²/2 = ⟨00⟩
    let got = diamond_cdc(&q(&[("10", 1, 1)]), &q(&[("1", 1, 1)]), 1, 0).unwrap();
    assert_eq!(got, q(&[("00", 1, 1)]));
}

#[test]
fn orthogonal_directions_vanish() {
    assert!(diamond_cdc(&q(&[("1", 1, 1)]), &q(&[("2", 1, 1)]), 1, 0).unwrap().is_zero());
    assert!(diamond_cdc(&q(&[("12", 3, 2)]), &q(&[("2", 1, 1)]), 1, 0).unwrap().is_zero());
}

#[test]
fn direct_form_matches_on_mixed_words() {
    let a = q(&[("121", 1, 2), ("01", -2, 3), ("11", 1, 1)]);
    let b = q(&[("211", 5, 4), ("1", 1, 1), ("10", -1, 6)]);
    for i in 1..=2u8 {
        assert_eq!(diamond_direct(&a, &b, &[i], &[i], 0).unwrap(), diamond_cdc(&a, &b, i, 0).unwrap());
        assert_eq!(diamond(&a, &b, &[i], &[i], 0).unwrap(), diamond_cdc(&a, &b, i, 0).unwrap());
    }
}

#[test]
fn vector_form_sums_components() {
    let l = q(&[("12", 1, 1), ("1", 2, 1)]);
    let h = CoeffVector::new(vec![q(&[("1", 1, 1)]), q(&[("e", 1, 1)])]).unwrap();
    let want = diamond_cdc(&l, &q(&[("1", 1, 1)]), 1, 0).unwrap().try_add(&diamond_cdc(&l, &q(&[("e", 1, 1)]), 2, 0).unwrap()).unwrap();
    assert_eq!(diamond_vec(&l, &h).unwrap(), want);
}
