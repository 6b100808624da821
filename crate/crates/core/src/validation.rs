//! Self-checks shared by the command line runner: algebraic identities,
//! worked examples, the Stratonovich identity and the Monte Carlo checks
//! against the Brownian expected signature and the OU semigroup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::brownian::{fill_increments, pairwise_sum, sample_signatures, summarize, MCConfig};
use crate::error::Result;
use crate::malliavin::{chaos_kernel, clark_ocone_integrand, pierced_pair, verify_iterated_integral, KernelForm, PiercedChain};
use crate::path_signature::{expected_brownian_sig, signature_of_path, SampledPath, SigPlan};
use crate::sig_operators::{
    diamond_cdc, diamond_direct, ou_generator_adjoint, ou_semigroup_adjoint, psi, psi_on_tensor, skorokhod_coeff, OuParams,
    SwitchSpec,
};
use crate::tensor_algebra::{all_words, chen_product, group_inverse, pair, shuffle, GroupTensor, TensorPoly, Word};
use crate::Poly;

/// Absolute tolerance for the algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Tolerance for the OU generator as the small-time limit of the semigroup.
pub const GENERATOR_TOL: f64 = 1e-6;
/// Tolerance for the Stratonovich Riemann sums at the finest grid.
pub const STRATONOVICH_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
}

impl CheckOutcome {
    fn within(name: &str, err: f64, tol: f64) -> Self {
        CheckOutcome { name: name.to_string(), passed: err <= tol, max_error: err }
    }
}

/// Random polynomial with `terms` words of length `1..=max_len` and
/// coefficients in `[-1, 1]`.
pub fn random_poly(rng: &mut impl Rng, d: usize, max_len: usize, terms: usize) -> Poly {
    let mut p = TensorPoly::zero(d);
    for _ in 0..terms {
        let len = rng.random_range(1..=max_len);
        let letters: Vec<u8> = (0..len).map(|_| rng.random_range(0..=d as u8)).collect();
        p.add_term(Word::from(letters.as_slice()), rng.random_range(-1.0..1.0));
    }
    p
}

/// `count` reproducible random functionals of degree exactly `degree`.
pub fn random_functionals(seed: u64, d: usize, degree: usize, terms: usize, count: usize) -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut p = random_poly(&mut rng, d, degree, terms);
            let top: Vec<u8> = (0..degree).map(|_| rng.random_range(0..=d as u8)).collect();
            p.add_term(Word::from(top.as_slice()), rng.random_range(0.5..1.0));
            p
        })
        .collect()
}

/// A rough-looking piecewise linear path with `n` segments on `[0, 1]`.
pub fn random_path(rng: &mut impl Rng, d: usize, n: usize) -> SampledPath<f64> {
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let mut x = vec![0.0; d];
    let mut values = vec![x.clone()];
    for _ in 0..n {
        for xi in &mut x {
            *xi += rng.random_range(-0.6..0.6);
        }
        values.push(x.clone());
    }
    SampledPath::new(times, values).expect("increasing grid")
}

fn scale_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Shuffle, Chen, inverse, `Ψ` adjointness, diamond forms, zero mean of
/// divergences and OU semigroup identities, on random inputs.
pub fn algebra_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2;
    let mut out = Vec::new();

    let mut err = 0.0f64;
    for _ in 0..20 {
        let x = signature_of_path(&random_path(&mut rng, d, 6), 8, true);
        let a = random_poly(&mut rng, d, 4, 5);
        let b = random_poly(&mut rng, d, 4, 5);
        let lhs = pair(&a, &x)? * pair(&b, &x)?;
        let rhs = pair(&shuffle(&a, &b)?, &x)?;
        err = err.max(scale_err(lhs, rhs));
    }
    out.push(CheckOutcome::within("shuffle_property", err, ALGEBRA_TOL));

    let mut err = 0.0f64;
    for _ in 0..10 {
        let p = random_path(&mut rng, d, 9);
        let full = signature_of_path(&p, 6, true);
        let a = signature_of_path(&p.slice(0, 4)?, 6, true);
        let b = signature_of_path(&p.slice(4, 9)?, 6, true);
        err = err.max(chen_product(&a, &b)?.max_abs_diff(&full));
    }
    out.push(CheckOutcome::within("chen_identity", err, ALGEBRA_TOL));

    let mut err = 0.0f64;
    for _ in 0..10 {
        let x = signature_of_path(&random_path(&mut rng, d, 5), 6, true);
        let y = group_inverse(&x)?;
        let unit = GroupTensor::unit(d, 6);
        err = err.max(chen_product(&x, &y)?.max_abs_diff(&unit)).max(chen_product(&y, &x)?.max_abs_diff(&unit));
    }
    out.push(CheckOutcome::within("group_inverse", err, ALGEBRA_TOL));

    let specs = [
        SwitchSpec::letters(&[1], &[0])?,
        SwitchSpec::letters(&[2, 1], &[0, 2])?,
        SwitchSpec::single(&[1, 1], &[0]),
        SwitchSpec::single(&[0], &[1, 2]),
    ];
    let mut err = 0.0f64;
    for spec in &specs {
        let x = signature_of_path(&random_path(&mut rng, d, 5), 6, true);
        let y = psi_on_tensor(&x, spec)?;
        for _ in 0..5 {
            let l = random_poly(&mut rng, d, y.depth(), 6).truncate(y.depth());
            let adj = psi(&l, &spec.adjoint());
            if adj.degree() > x.depth() {
                continue;
            }
            err = err.max(scale_err(pair(&l, &y)?, pair(&adj, &x)?));
        }
    }
    out.push(CheckOutcome::within("psi_adjoint", err, ALGEBRA_TOL));

    let words = all_words(d, 4);
    let mut err = 0.0f64;
    for u in &words {
        let l = TensorPoly::monomial(d, u.clone(), 1.0);
        for v in &words {
            let lp = TensorPoly::monomial(d, v.clone(), 1.0);
            for i in 1..=d as u8 {
                let a = diamond_direct(&l, &lp, &[i], &[i], 0)?;
                let b = diamond_cdc(&l, &lp, i, 0)?;
                err = err.max(a.max_abs_diff(&b));
            }
        }
    }
    out.push(CheckOutcome::within("diamond_direct_vs_cdc", err, ALGEBRA_TOL));

    let t_end = 1.3;
    let e = expected_brownian_sig(t_end, d, 9)?;
    let mut err = 0.0f64;
    for _ in 0..20 {
        let l = random_poly(&mut rng, d, 6, 8);
        for i in 1..=d as u8 {
            err = err.max(pair(&skorokhod_coeff(&l, i)?, &e)?.abs());
        }
        err = err.max(pair(&ou_generator_adjoint(&l, &[1.0, 0.7])?, &e)?.abs());
    }
    out.push(CheckOutcome::within("divergence_zero_mean", err, ALGEBRA_TOL));

    let kappa = vec![0.8, 1.3];
    let mut err = 0.0f64;
    let mut err_mean = 0.0f64;
    for _ in 0..10 {
        let l = random_poly(&mut rng, d, 6, 8);
        let ps = |theta: f64, l: &Poly| ou_semigroup_adjoint(l, &OuParams { kappa: kappa.clone(), theta });
        let lhs = ps(0.3, &ps(0.5, &l)?)?;
        let rhs = ps(0.8, &l)?;
        err = err.max(lhs.max_abs_diff(&rhs));
        err_mean = err_mean.max(scale_err(pair(&rhs, &e.truncate(6))?, pair(&l, &e.truncate(6))?));
    }
    out.push(CheckOutcome::within("ou_semigroup_law", err, ALGEBRA_TOL));
    out.push(CheckOutcome::within("ou_preserves_mean", err_mean, ALGEBRA_TOL));

    let mut err = 0.0f64;
    // Richardson-extrapolated one-sided difference quotient.
    let h = 1e-5;
    for _ in 0..10 {
        let l = random_poly(&mut rng, d, 5, 6);
        let quotient = |theta: f64| -> Result<Poly> {
            let p = ou_semigroup_adjoint(&l, &OuParams { kappa: kappa.clone(), theta })?;
            Ok(p.try_sub(&l)?.scale(1.0 / theta))
        };
        let fd = quotient(h / 2.0)?.scale(2.0).try_sub(&quotient(h)?)?;
        err = err.max(fd.max_abs_diff(&ou_generator_adjoint(&l, &kappa)?));
    }
    out.push(CheckOutcome::within("ou_generator_limit", err, GENERATOR_TOL));
    Ok(out)
}

fn terms(d: usize, t: &[(&str, f64)]) -> Poly {
    TensorPoly::from_terms(d, t.iter().map(|(w, c)| (Word::parse(w).expect("word literal"), *c))).expect("valid literal")
}

/// The small worked examples, compared coefficient by coefficient.
pub fn worked_examples() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let exact = |name: &str, got: &Poly, want: &Poly| {
        let same_support = got.words().eq(want.words());
        let err = got.max_abs_diff(want);
        CheckOutcome { name: name.to_string(), passed: same_support && err <= 1e-15, max_error: err }
    };
    let l = terms(1, &[("01101", 1.0)]);
    let got = psi(&l, &SwitchSpec::letters(&[1], &[0])?);
    out.push(exact("psi_01101", &got, &terms(1, &[("00101", 1.0), ("01001", 1.0), ("01100", 1.0)])));

    let sq = terms(1, &[("11", 1.0)]);
    out.push(exact("generator_11", &ou_generator_adjoint(&sq, &[1.0])?, &terms(1, &[("0", 1.0), ("11", -2.0)])));

    let (kappa, theta): (f64, f64) = (1.0, 0.5);
    let a = (-2.0 * kappa * theta).exp();
    let got = ou_semigroup_adjoint(&sq, &OuParams { kappa: vec![kappa], theta })?;
    out.push(exact("ou_semigroup_11", &got, &terms(1, &[("11", a), ("0", (1.0 - a) / 2.0)])));

    let w = terms(1, &[("1", 1.0)]);
    out.push(exact("skorokhod_1", &skorokhod_coeff(&w, 1)?, &terms(1, &[("11", 2.0), ("0", -1.0)])));
    Ok(out)
}

/// Smooth deterministic test path in one dimension.
pub fn smooth_path(n: usize) -> SampledPath<f64> {
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
    let values = times.iter().map(|&t| vec![(3.0 * t).sin() + 0.5 * t * t, (2.0 * t).cos() - 1.0]).collect();
    SampledPath::new(times, values).expect("increasing grid")
}

/// `|lhs - rhs|` of the iterated-integral identity on grids of increasing size.
pub fn stratonovich_errors(l: &Poly, ins: &[u8], outs: &[u8], grids: &[usize]) -> Result<Vec<f64>> {
    grids
        .iter()
        .map(|&n| {
            let (a, b) = verify_iterated_integral(l, &smooth_path(n), ins, outs)?;
            Ok((a - b).abs())
        })
        .collect()
}

/// Stratonovich identity for one and two insertions, the derivative against
/// a bumped path, and Clark-Ocone against the first chaos kernel.
pub fn malliavin_checks(seed: u64, finest: usize) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2;
    let mut out = Vec::new();
    let grids: Vec<usize> = [8, 4, 2, 1].iter().map(|&k| (finest / k).max(2)).collect();
    let cases: [(&str, Vec<u8>, Vec<u8>, usize); 2] =
        [("stratonovich_n1", vec![1], vec![2], 3), ("stratonovich_n2", vec![2, 1], vec![0, 1], 4)];
    for (name, ins, outs, deg) in cases {
        let l = random_poly(&mut rng, d, deg, 8);
        let errs = stratonovich_errors(&l, &ins, &outs, &grids)?;
        let last = *errs.last().unwrap();
        let decreasing = errs.windows(2).all(|w| w[1] <= w[0]);
        out.push(CheckOutcome { name: name.to_string(), passed: decreasing && last < STRATONOVICH_TOL, max_error: last });
    }

    let mut err = 0.0f64;
    let eps = 1e-4;
    for _ in 0..5 {
        let p = random_path(&mut rng, d, 8);
        let l = random_poly(&mut rng, d, 5, 8);
        let head = signature_of_path(&p.slice(0, 3)?, 5, true);
        let tail = signature_of_path(&p.slice(3, 8)?, 5, true);
        for i in 1..=d as u8 {
            let mut bump = vec![0.0; d + 1];
            bump[i as usize] = eps;
            let up = chen_product(&chen_product(&head, &GroupTensor::segment_exp(&bump, 5))?, &tail)?;
            bump[i as usize] = -eps;
            let dn = chen_product(&chen_product(&head, &GroupTensor::segment_exp(&bump, 5))?, &tail)?;
            let fd = (pair(&l, &up)? - pair(&l, &dn)?) / (2.0 * eps);
            let an = pierced_pair(&l, &PiercedChain::new(head.truncate(4), vec![i], vec![tail.truncate(4)])?)?;
            err = err.max(scale_err(fd, an));
        }
    }
    out.push(CheckOutcome::within("derivative_vs_bump", err, 1e-6));

    let mut err = 0.0f64;
    for _ in 0..10 {
        let l = random_poly(&mut rng, d, 5, 8);
        let unit = GroupTensor::unit(d, 4);
        for i in 1..=d as u8 {
            let co = clark_ocone_integrand(&l, &unit, i, 1.0)?;
            let f1 = chaos_kernel(&l, &[i], &[0.0], 1.0, KernelForm::Full)?;
            err = err.max(scale_err(co, f1));
        }
    }
    out.push(CheckOutcome::within("clark_ocone_vs_chaos", err, ALGEBRA_TOL));

    let sq = terms(1, &[("11", 1.0)]);
    let f1 = chaos_kernel(&sq, &[1], &[0.4], 1.0, KernelForm::Full)?;
    let f2 = chaos_kernel(&sq, &[1, 1], &[0.2, 0.7], 1.0, KernelForm::Full)?;
    out.push(CheckOutcome::within("chaos_square", f1.abs().max((f2 - 0.5).abs()), 1e-15));
    Ok(out)
}

/// Monte Carlo mean of one signature coefficient next to its exact value.
#[derive(Clone, Debug, PartialEq)]
pub struct WordStat {
    pub word: Word,
    pub mc: f64,
    pub std_error: f64,
    pub exact: f64,
}

impl WordStat {
    /// Within `k` standard errors; coefficients with no randomness must match
    /// to rounding.
    pub fn within(&self, k: f64) -> bool {
        (self.mc - self.exact).abs() <= k * self.std_error + 1e-12 * self.exact.abs().max(1.0)
    }
}

/// Every coefficient of `E[sig(Ŵ)]` up to `depth`, by Monte Carlo and in closed form.
pub fn esig_check(cfg: &MCConfig, d: usize, depth: usize) -> Result<Vec<WordStat>> {
    let words = all_words(d, depth);
    let full = TensorPoly::from_terms(d, words.iter().map(|w| (w.clone(), 1.0)))?;
    let plan = SigPlan::with_layout(d, &[&full], Some(true))?;
    let n = words.len();
    let samples = sample_signatures(&plan, cfg, n, |_, acc, row| {
        for (w, slot) in words.iter().zip(row.iter_mut()) {
            *slot = acc.get(w).expect("tracked");
        }
    })?;
    let exact = expected_brownian_sig(cfg.horizon, d, depth)?;
    Ok(words
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let r = summarize("", &crate::brownian::column(&samples, n, j), cfg.antithetic);
            WordStat { word: w.clone(), mc: r.estimate, std_error: r.std_error, exact: exact.get(w) }
        })
        .collect())
}

/// Semigroup value against an inner Monte Carlo on one outer path.
#[derive(Clone, Debug, PartialEq)]
pub struct OuPathStat {
    pub path: usize,
    pub operator: f64,
    pub inner_mean: f64,
    pub inner_se: f64,
}

impl OuPathStat {
    pub fn z(&self) -> f64 {
        (self.inner_mean - self.operator) / self.inner_se
    }
}

/// For each functional and outer path `W`, compare `⟨P*_θ l, sig(Ŵ)⟩` with the
/// average of `⟨l, sig(B̂)⟩` over `n_inner` draws of
/// `B = e^{-κθ} W + sqrt(1 - e^{-2κθ}) W'`. Results are `[functional][path]`.
pub fn ou_check(ls: &[Poly], kappa: &[f64], theta: f64, outer: &MCConfig, n_inner: usize) -> Result<Vec<Vec<OuPathStat>>> {
    let d = kappa.len();
    let ops: Vec<Poly> = ls.iter().map(|l| ou_semigroup_adjoint(l, &OuParams { kappa: kappa.to_vec(), theta })).collect::<Result<_>>()?;
    let mut all: Vec<&Poly> = ls.iter().collect();
    all.extend(ops.iter());
    let plan = SigPlan::new(d, &all)?;
    let cl: Vec<_> = ls.iter().map(|l| plan.compile(l)).collect::<Result<_>>()?;
    let co: Vec<_> = ops.iter().map(|l| plan.compile(l)).collect::<Result<_>>()?;
    let a: Vec<f64> = kappa.iter().map(|k| (-k * theta).exp()).collect();
    let b: Vec<f64> = kappa.iter().map(|k| (1.0 - (-2.0 * k * theta).exp()).sqrt()).collect();
    let inner_cfg = MCConfig { seed: outer.seed ^ 0x5851_f42d_4c95_7f2d, antithetic: false, ..outer.clone() };
    let steps = outer.total_steps();
    let rows: Vec<Vec<OuPathStat>> = (0..outer.n_paths)
        .into_par_iter()
        .map(|k| {
            let mut acc = plan.accumulator();
            let mut w = vec![0.0; steps * (d + 1)];
            let mut wp = w.clone();
            fill_increments(outer, d, k, &mut w);
            for delta in w.chunks_exact(d + 1) {
                acc.push(delta);
            }
            let op: Vec<f64> = co.iter().map(|c| acc.pair(c)).collect();
            let mut vals = vec![Vec::with_capacity(n_inner); ls.len()];
            let mut delta = vec![0.0; d + 1];
            for j in 0..n_inner {
                fill_increments(&inner_cfg, d, k * n_inner + j, &mut wp);
                acc.reset();
                for (x, y) in w.chunks_exact(d + 1).zip(wp.chunks_exact(d + 1)) {
                    delta[0] = x[0];
                    for i in 1..=d {
                        delta[i] = a[i - 1] * x[i] + b[i - 1] * y[i];
                    }
                    acc.push(&delta);
                }
                for (v, c) in vals.iter_mut().zip(&cl) {
                    v.push(acc.pair(c));
                }
            }
            vals.iter()
                .zip(&op)
                .map(|(v, &o)| {
                    let m = pairwise_sum(v) / v.len() as f64;
                    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
                    let se = (pairwise_sum(&sq) / (v.len() - 1) as f64 / v.len() as f64).sqrt();
                    OuPathStat { path: k, operator: o, inner_mean: m, inner_se: se }
                })
                .collect()
        })
        .collect();
    Ok((0..ls.len()).map(|f| rows.iter().map(|r| r[f].clone()).collect()).collect())
}

/// Aggregate verdict on [`ou_check`] output for one functional: the summed
/// discrepancy within 3 of its standard errors, and at most `max_exceed`
/// individual paths beyond 3 inner standard errors.
pub fn ou_verdict(stats: &[OuPathStat], max_exceed: usize) -> (bool, f64, usize) {
    let diff: f64 = stats.iter().map(|s| s.inner_mean - s.operator).sum();
    let se = stats.iter().map(|s| s.inner_se * s.inner_se).sum::<f64>().sqrt();
    let exceed = stats.iter().filter(|s| s.z().abs() > 3.0).count();
    let z = if se > 0.0 { diff / se } else { 0.0 };
    (z.abs() <= 3.0 && exceed <= max_exceed, z, exceed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples_pass() {
        for c in worked_examples().unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn quick_algebra_suite_passes() {
        for c in algebra_checks(11).unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn malliavin_suite_passes() {
        for c in malliavin_checks(5, 2000).unwrap() {
            println!("{c:?}");
            assert!(c.passed, "{c:?}");
        }
    }
}
