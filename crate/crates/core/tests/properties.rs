use num_rational::Ratio;
use proptest::prelude::*;
use sigmal::path_signature::{expected_brownian_sig, signature_of_path, SampledPath, SigPlan};
use sigmal::sig_operators::{diamond_cdc, diamond_direct, ou_generator_adjoint, psi, psi_on_tensor, skorokhod_coeff, SwitchSpec};
use sigmal::tensor_algebra::{chen_product, from_text, group_inverse, pair, shuffle, to_text, GroupTensor, TensorPoly, Word};

type Q = Ratio<i64>;
const D: usize = 2;

fn word(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=D as u8, 0..=max_len)
}

fn poly_f64(max_len: usize) -> impl Strategy<Value = TensorPoly<f64>> {
    prop::collection::vec((word(max_len), -4i32..=4), 0..6).prop_map(|ts| {
        let mut p = TensorPoly::zero(D);
        for (w, c) in ts {
            p.add_term(Word::from(w.as_slice()), f64::from(c) / 2.0);
        }
        p
    })
}

fn poly_q(max_len: usize) -> impl Strategy<Value = TensorPoly<Q>> {
    prop::collection::vec((word(max_len), -6i64..=6, 1i64..=4), 0..5).prop_map(|ts| {
        let mut p = TensorPoly::zero(D);
        for (w, n, m) in ts {
            p.add_term(Word::from(w.as_slice()), Q::new(n, m));
        }
        p
    })
}

fn path(max_segments: usize) -> impl Strategy<Value = SampledPath<f64>> {
    prop::collection::vec((0.05f64..0.5, prop::collection::vec(-0.7f64..0.7, D)), 1..=max_segments).prop_map(|steps| {
        let mut t = 0.0;
        let mut x = vec![0.0; D];
        let (mut times, mut values) = (vec![0.0], vec![x.clone()]);
        for (dt, dx) in steps {
            t += dt;
            for (a, b) in x.iter_mut().zip(dx) {
                *a += b;
            }
            times.push(t);
            values.push(x.clone());
        }
        SampledPath::new(times, values).unwrap()
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn shuffle_is_commutative_and_associative(a in poly_q(3), b in poly_q(3), c in poly_q(2)) {
        prop_assert_eq!(shuffle(&a, &b).unwrap(), shuffle(&b, &a).unwrap());
        let left = shuffle(&shuffle(&a, &b).unwrap(), &c).unwrap();
        let right = shuffle(&a, &shuffle(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn shuffle_linearizes_products_on_signatures(a in poly_f64(3), b in poly_f64(3), p in path(5)) {
        let x = signature_of_path(&p, 6, true);
        let lhs = pair(&a, &x).unwrap() * pair(&b, &x).unwrap();
        let rhs = pair(&shuffle(&a, &b).unwrap(), &x).unwrap();
        prop_assert!(close(lhs, rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn chen_identity_holds(p in path(8), cut in 0usize..8) {
        let n = p.n_segments();
        prop_assume!(n >= 2);
        let cut = 1 + cut % (n - 1);
        let full = signature_of_path(&p, 5, true);
        let split = chen_product(&signature_of_path(&p.slice(0, cut).unwrap(), 5, true), &signature_of_path(&p.slice(cut, n).unwrap(), 5, true)).unwrap();
        prop_assert!(full.max_abs_diff(&split) < 1e-10);
    }

    #[test]
    fn inverse_is_two_sided(p in path(5)) {
        let x = signature_of_path(&p, 5, true);
        let y = group_inverse(&x).unwrap();
        let unit = GroupTensor::unit(D, 5);
        prop_assert!(chen_product(&x, &y).unwrap().max_abs_diff(&unit) < 1e-10);
        prop_assert!(chen_product(&y, &x).unwrap().max_abs_diff(&unit) < 1e-10);
        prop_assert!(x.is_group_like());
    }

    #[test]
    fn psi_adjoint_pairs_consistently(l in poly_f64(3), p in path(4), src in 1u8..=2, tgt in 0u8..=2) {
        let x = signature_of_path(&p, 5, true);
        let spec = SwitchSpec::letters(&[src], &[tgt]).unwrap();
        let y = psi_on_tensor(&x, &spec).unwrap();
        let lhs = pair(&l, &y).unwrap();
        let rhs = pair(&psi(&l, &spec.adjoint()), &x).unwrap();
        prop_assert!(close(lhs, rhs), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn diamond_forms_agree_exactly(a in poly_q(3), b in poly_q(3), i in 1u8..=2) {
        let direct = diamond_direct(&a, &b, &[i], &[i], 0).unwrap();
        let cdc = diamond_cdc(&a, &b, i, 0).unwrap();
        prop_assert_eq!(direct, cdc);
    }

    #[test]
    fn diamond_is_symmetric(a in poly_q(3), b in poly_q(3), i in 1u8..=2) {
        prop_assert_eq!(diamond_cdc(&a, &b, i, 0).unwrap(), diamond_cdc(&b, &a, i, 0).unwrap());
    }

    #[test]
    fn divergences_have_zero_mean(l in poly_q(4), i in 1u8..=2) {
        let e = expected_brownian_sig(Q::new(3, 2), D, 6).unwrap();
        prop_assert_eq!(pair(&skorokhod_coeff(&l, i).unwrap(), &e).unwrap(), Q::from(0));
        let kappa = [Q::from(1), Q::new(1, 3)];
        prop_assert_eq!(pair(&ou_generator_adjoint(&l, &kappa).unwrap(), &e).unwrap(), Q::from(0));
    }

    #[test]
    fn sparse_and_dense_plans_agree(a in poly_f64(4), b in poly_f64(3), p in path(6)) {
        let polys = [&a, &b];
        let dense = SigPlan::with_layout(D, &polys, Some(true)).unwrap();
        let sparse = SigPlan::with_layout(D, &polys, Some(false)).unwrap();
        let (mut ad, mut as_) = (dense.accumulator(), sparse.accumulator());
        let mut delta = Vec::new();
        for k in 0..p.n_segments() {
            p.increment(k, true, &mut delta);
            ad.push(&delta);
            as_.push(&delta);
        }
        let x = signature_of_path(&p, 4, true);
        for l in polys {
            let want = pair(l, &x).unwrap();
            prop_assert!(close(ad.pair(&dense.compile(l).unwrap()), want));
            prop_assert!(close(as_.pair(&sparse.compile(l).unwrap()), want));
        }
    }

    #[test]
    fn text_round_trip(l in poly_f64(4)) {
        prop_assert_eq!(from_text(D, &to_text(&l)).unwrap(), l);
    }
}
