use std::fmt;

use super::model::ModelSpec;
use crate::error::{Result, SigError};
use crate::sig_operators::{diamond_cdc_capped, diamond_vec_capped, lambda_op, psi1, CoeffVector};
use crate::tensor_algebra::{pair, shuffle_truncated, GroupTensor, TensorPoly, Word};
use crate::{Coeffs, Poly};

/// The four direction choices for the delta weight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightKind {
    /// `h = (1, 0)`
    H1,
    /// `h = (D¹X_T, 0)`
    H2,
    /// `h = (0, 1)`
    H3,
    /// `h = (0, D²X_T)`
    H4,
}

impl WeightKind {
    pub const ALL: [WeightKind; 4] = [WeightKind::H1, WeightKind::H2, WeightKind::H3, WeightKind::H4];

    /// Truncation level at which every ingredient is exact, for vol degree `m`.
    pub fn required_level(self, m: usize) -> usize {
        match self {
            WeightKind::H1 => 2 * m + 1,
            WeightKind::H2 => 6 * m + 1,
            WeightKind::H3 => m + 1,
            WeightKind::H4 => 2 * m + 1,
        }
    }

    /// Uses the second Brownian factor, so undefined at `|ρ| = 1`.
    pub fn needs_rho_bar(self) -> bool {
        matches!(self, WeightKind::H3 | WeightKind::H4)
    }

    /// `h` as derivative coefficients for a given `ℓX`.
    pub fn direction(self, lx: &Poly) -> Coeffs {
        let d = lx.d();
        let one = |i: u8| TensorPoly::monomial(d, Word::letter(i), 1.0);
        let mut h = CoeffVector::zero(d);
        match self {
            WeightKind::H1 => h.set(1, one(1)),
            WeightKind::H2 => h.set(1, lx.clone()),
            WeightKind::H3 => h.set(2, one(2)),
            WeightKind::H4 => h.set(2, lx.clone()),
        }
        h
    }

    pub fn tag(self) -> &'static str {
        match self {
            WeightKind::H1 => "h1",
            WeightKind::H2 => "h2",
            WeightKind::H3 => "h3",
            WeightKind::H4 => "h4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "h1" => Some(WeightKind::H1),
            "h2" => Some(WeightKind::H2),
            "h3" => Some(WeightKind::H3),
            "h4" => Some(WeightKind::H4),
            _ => None,
        }
    }
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// What to do when the truncation level is below what the weight needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Fail with [`SigError::TruncationTooLow`].
    Strict,
    /// Drop words above the level from every ingredient.
    Truncate,
}

/// A Malliavin weight, kept as the polynomials it is built from.
///
/// With `⟨·⟩` pairing against the signature,
/// `π = ⟨F1⟩⟨div⟩/(⟨F2⟩⟨GH⟩) - ⟨F1H⟩/(⟨F2⟩⟨GH⟩) + ⟨F1⟩⟨F2H⟩/(⟨F2⟩²⟨GH⟩) + ⟨F1⟩⟨GHH⟩/(⟨F2⟩⟨GH⟩²)`,
/// where `F = F1/F2` is the derivative of the underlying, `GH = ⟨DG, h⟩`,
/// `GHH = ⟨D⟨DG, h⟩, h⟩`, `div = δ(h)` and `FiH = ⟨DFi, h⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct MalliavinWeight {
    pub tag: String,
    pub f1: Poly,
    pub f2: Poly,
    pub div: Poly,
    pub f1h: Poly,
    pub f2h: Poly,
    pub gh: Poly,
    pub ghh: Poly,
    /// Level at which the ingredients are exact.
    pub required_level: usize,
}

/// The pairings a weight needs, in ingredient order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeightPairs {
    pub f1: f64,
    pub f2: f64,
    pub div: f64,
    pub f1h: f64,
    pub f2h: f64,
    pub gh: f64,
    pub ghh: f64,
}

impl WeightPairs {
    /// The four-term weight. Exact zeros in `⟨F2⟩` or `⟨GH⟩` are reported, not divided by.
    pub fn weight(&self, path: usize) -> Result<f64> {
        if self.f2 == 0.0 || self.gh == 0.0 {
            return Err(SigError::ZeroDenominator { path });
        }
        let a = self.f2 * self.gh;
        Ok(self.f1 * self.div / a - self.f1h / a + self.f1 * self.f2h / (self.f2 * a) + self.f1 * self.ghh / (a * self.gh))
    }
}

/// `num / den` as polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunctional {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFunctional {
    pub fn evaluate(&self, sig: &GroupTensor<f64>) -> Result<f64> {
        let den = pair(&self.den, sig)?;
        if den == 0.0 {
            return Err(SigError::ZeroDenominator { path: 0 });
        }
        Ok(pair(&self.num, sig)? / den)
    }
}

impl MalliavinWeight {
    pub fn ingredients(&self) -> [&Poly; 7] {
        [&self.f1, &self.f2, &self.div, &self.f1h, &self.f2h, &self.gh, &self.ghh]
    }

    pub fn degree(&self) -> usize {
        self.ingredients().iter().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn pairs(&self, sig: &GroupTensor<f64>) -> Result<WeightPairs> {
        Ok(WeightPairs {
            f1: pair(&self.f1, sig)?,
            f2: pair(&self.f2, sig)?,
            div: pair(&self.div, sig)?,
            f1h: pair(&self.f1h, sig)?,
            f2h: pair(&self.f2h, sig)?,
            gh: pair(&self.gh, sig)?,
            ghh: pair(&self.ghh, sig)?,
        })
    }

    pub fn evaluate(&self, sig: &GroupTensor<f64>) -> Result<f64> {
        self.pairs(sig)?.weight(0)
    }

    /// The weight over a common denominator `⟨F2⟩²⟨GH⟩²`. Products are shuffles
    /// capped at `cap`.
    pub fn to_rational(&self, cap: usize) -> Result<RationalFunctional> {
        let sh = |a: &Poly, b: &Poly| shuffle_truncated(a, b, cap);
        let f2gh = sh(&self.f2, &self.gh)?;
        let mut num = sh(&sh(&self.div, &self.f1)?, &f2gh)?;
        num.add_scaled(&sh(&self.f1h, &f2gh)?, -1.0)?;
        num.add_scaled(&sh(&sh(&self.f1, &self.f2h)?, &self.gh)?, 1.0)?;
        num.add_scaled(&sh(&sh(&self.f1, &self.f2)?, &self.ghh)?, 1.0)?;
        let den = sh(&f2gh, &f2gh)?;
        Ok(RationalFunctional { num, den })
    }

    fn check_nondegenerate(self) -> Result<Self> {
        if self.gh.is_zero() {
            return Err(SigError::DegenerateWeight(format!("⟨DG, h⟩ is identically zero for {}", self.tag)));
        }
        if self.f2.is_zero() {
            return Err(SigError::DegenerateWeight(format!("F2 is identically zero for {}", self.tag)));
        }
        Ok(self)
    }
}

/// The delta weights for a European payoff on `X_T`, built from their
/// closed forms:
///
/// * h1: `⟨1⟩/(S0⟨Ψ^1_0 ℓX⟩) + ⟨Ψ^1_0 Ψ^1_0 ℓX⟩/(S0⟨Ψ^1_0 ℓX⟩²)`
/// * h2: `⟨(Λ_1 - Ψ^{11}_0) ℓX⟩/(S0⟨ℓX ⋄ ℓX⟩) + ⟨ℓX ⋄ ℓX ⋄ ℓX⟩/(S0⟨ℓX ⋄ ℓX⟩²)`, `⋄ = ⋄^{11}_0`
/// * h3: `⟨2⟩/(ρ̄ S0 ⟨σ 0⟩)`
/// * h4: `⟨σ 2⟩/(ρ̄ S0 ⟨(σ⧢σ) 0⟩)`
pub fn closed_form_weight(model: &ModelSpec, kind: WeightKind, level: usize, policy: Truncation) -> Result<MalliavinWeight> {
    let m = model.vol_degree();
    let required = kind.required_level(m);
    if policy == Truncation::Strict && level < required {
        return Err(SigError::TruncationTooLow { required, level });
    }
    let rb = model.rho_bar();
    if kind.needs_rho_bar() && rb == 0.0 {
        return Err(SigError::RhoAtBoundary);
    }
    let cap = level;
    let lx = model.log_price_coeff().truncate(cap);
    let s = model.sigma();
    let zero = TensorPoly::zero(2);
    let one = |i: u8| TensorPoly::monomial(2, Word::letter(i), 1.0);
    let (div, gh, ghh) = match kind {
        WeightKind::H1 => {
            let a = psi1(&lx, &[1], &[0]);
            let b = psi1(&a, &[1], &[0]);
            (one(1), a, b)
        }
        WeightKind::H2 => {
            let mut div = lambda_op(&lx, 1);
            div.add_scaled(&psi1(&lx, &[1, 1], &[0]), -1.0)?;
            let gh = diamond_cdc_capped(&lx, &lx, 1, 0, cap)?;
            let ghh = diamond_cdc_capped(&gh, &lx, 1, 0, cap)?;
            (div.truncate(cap), gh, ghh)
        }
        WeightKind::H3 => (one(2), s.append_letter(0).scale(rb).truncate(cap), zero.clone()),
        WeightKind::H4 => {
            let ss = shuffle_truncated(s, s, cap.saturating_sub(1))?.append_letter(0);
            (s.append_letter(2).scale(rb).truncate(cap), ss.scale(rb * rb), zero.clone())
        }
    };
    MalliavinWeight {
        tag: kind.tag().to_string(),
        f1: TensorPoly::constant(2, 1.0),
        f2: TensorPoly::constant(2, model.s0()),
        div,
        f1h: zero.clone(),
        f2h: zero,
        gh,
        ghh,
        required_level: required,
    }
    .check_nondegenerate()
}

/// The general weight for `∂_θ E[f(G)]` where `∂_θ G = ⟨ℓF1⟩/⟨ℓF2⟩` and the
/// direction is `h = D⟨h_i⟩` componentwise.
///
/// Under [`Truncation::Strict`] every ingredient must fit in `level`, else
/// [`SigError::TruncationTooLow`] reports the degree bound
/// `max(deg G + 2 deg h - 2, deg Fi + deg h - 1, ...)`. Under
/// [`Truncation::Truncate`] all products are capped at `level`.
pub fn universal_weight(tag: &str, lg: &Poly, lf1: &Poly, lf2: &Poly, h: &Coeffs, level: usize, policy: Truncation) -> Result<MalliavinWeight> {
    let dh = h.degree().max(1);
    let bound = [lg.degree() + 2 * dh - 2, lf1.degree() + dh - 1, lf2.degree() + dh - 1, dh, lf1.degree(), lf2.degree()]
        .into_iter()
        .max()
        .unwrap();
    // strict mode builds one level higher to see whether anything spills over
    let cap = match policy {
        Truncation::Strict => level + 1,
        Truncation::Truncate => level,
    };
    let lg = lg.truncate(cap);
    let gh = diamond_vec_capped(&lg, h, cap)?;
    let ghh = diamond_vec_capped(&gh, h, cap)?;
    let w = MalliavinWeight {
        tag: tag.to_string(),
        f1: lf1.truncate(cap),
        f2: lf2.truncate(cap),
        div: h.divergence_coeff().truncate(cap),
        f1h: diamond_vec_capped(lf1, h, cap)?,
        f2h: diamond_vec_capped(lf2, h, cap)?,
        gh,
        ghh,
        required_level: bound,
    };
    if policy == Truncation::Strict && w.degree() > level {
        return Err(SigError::TruncationTooLow { required: bound, level });
    }
    let required_level = if policy == Truncation::Strict { w.degree() } else { bound };
    MalliavinWeight { required_level, ..w }.check_nondegenerate()
}

/// [`universal_weight`] for the delta of a European payoff on `X_T`.
pub fn universal_delta_weight(model: &ModelSpec, kind: WeightKind, level: usize, policy: Truncation) -> Result<MalliavinWeight> {
    if kind.needs_rho_bar() && model.rho_bar() == 0.0 {
        return Err(SigError::RhoAtBoundary);
    }
    let lx = model.log_price_coeff();
    let h = kind.direction(&lx);
    let f1 = TensorPoly::constant(2, 1.0);
    let f2 = TensorPoly::constant(2, model.s0());
    universal_weight(&format!("univ-{}", kind.tag()), &lx, &f1, &f2, &h, level, policy)
}

/// [`universal_weight`] for the delta of an Asian payoff on `G = ⟨ℓG⟩`, where
/// `∂G/∂S0 = G/S0`. Directions are the `h1..h4` ones, built from `ℓX`.
pub fn universal_asian_weight(model: &ModelSpec, lg: &Poly, kind: WeightKind, level: usize, policy: Truncation) -> Result<MalliavinWeight> {
    if kind.needs_rho_bar() && model.rho_bar() == 0.0 {
        return Err(SigError::RhoAtBoundary);
    }
    let h = kind.direction(&model.log_price_coeff());
    let f2 = TensorPoly::constant(lg.d(), model.s0());
    universal_weight(kind.tag(), lg, lg, &f2, &h, level, policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::GroupTensor;

    fn model(terms: &[(&str, f64)], rho: f64) -> ModelSpec {
        let s = TensorPoly::from_terms(2, terms.iter().map(|(w, c)| (Word::parse(w).unwrap(), *c))).unwrap();
        ModelSpec::new(s, rho, 1.3).unwrap()
    }

    fn random_sig(depth: usize) -> GroupTensor<f64> {
        let mut x = GroupTensor::unit(2, depth);
        for k in 0..12 {
            let t = k as f64;
            x.mul_segment_exp(&[0.08, 0.3 * (1.7 * t).sin(), 0.25 * (2.3 * t + 0.4).cos()]);
        }
        x
    }

    #[test]
    fn strict_policy_reports_required_level() {
        let m = model(&[("e", 0.2), ("1", 0.1)], -0.5);
        assert_eq!(closed_form_weight(&m, WeightKind::H2, 6, Truncation::Strict), Err(SigError::TruncationTooLow { required: 7, level: 6 }));
        assert!(closed_form_weight(&m, WeightKind::H2, 7, Truncation::Strict).is_ok());
    }

    #[test]
    fn boundary_rho_refuses_second_factor() {
        let m = model(&[("e", 0.2), ("1", 0.1)], -1.0);
        assert_eq!(closed_form_weight(&m, WeightKind::H3, 5, Truncation::Strict), Err(SigError::RhoAtBoundary));
        assert_eq!(closed_form_weight(&m, WeightKind::H4, 5, Truncation::Strict), Err(SigError::RhoAtBoundary));
        assert!(closed_form_weight(&m, WeightKind::H1, 5, Truncation::Strict).is_ok());
    }

    #[test]
    fn zero_correlation_makes_first_factor_degenerate() {
        let m = model(&[("e", 0.2)], 0.0);
        assert!(matches!(closed_form_weight(&m, WeightKind::H1, 3, Truncation::Strict), Err(SigError::DegenerateWeight(_))));
    }

    #[test]
    fn closed_forms_match_universal_construction() {
        let m = model(&[("e", 0.25), ("1", 0.08), ("01", 0.05)], -0.6);
        let sig = random_sig(7);
        for kind in WeightKind::ALL {
            let a = closed_form_weight(&m, kind, 7, Truncation::Truncate).unwrap();
            let b = universal_delta_weight(&m, kind, 7, Truncation::Truncate).unwrap();
            for (p, q) in a.ingredients().iter().zip(b.ingredients()) {
                assert!(p.max_abs_diff(q) < 1e-13, "{kind}");
            }
            let (wa, wb) = (a.evaluate(&sig).unwrap(), b.evaluate(&sig).unwrap());
            assert!((wa - wb).abs() < 1e-10 * wa.abs().max(1.0), "{kind}");
        }
    }

    #[test]
    fn constant_vol_h3_is_bs_weight() {
        // π = W²_T / (ρ̄ S0 σ T)
        let m = model(&[("e", 0.2)], 0.6);
        let w = closed_form_weight(&m, WeightKind::H3, 1, Truncation::Strict).unwrap();
        let mut x = GroupTensor::unit(2, 1);
        x.mul_segment_exp(&[2.0, 0.3, -0.4]);
        let expect = -0.4 / (0.8 * 1.3 * 0.2 * 2.0);
        assert!((w.evaluate(&x).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn rational_form_agrees_with_four_terms() {
        let m = model(&[("e", 0.25), ("1", 0.1)], -0.5);
        let lx = m.log_price_coeff();
        let lf1 = lx.clone();
        let lf2 = TensorPoly::constant(2, m.s0());
        let h = WeightKind::H1.direction(&lx);
        let w = universal_weight("u", &lx, &lf1, &lf2, &h, 12, Truncation::Strict).unwrap();
        let r = w.to_rational(usize::MAX).unwrap();
        let depth = r.num.degree().max(r.den.degree());
        let sig = random_sig(depth);
        let a = w.evaluate(&sig.truncate(w.degree())).unwrap();
        let b = r.evaluate(&sig).unwrap();
        assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
    }

    #[test]
    fn exact_zero_denominator_is_reported() {
        let p = WeightPairs { f1: 1.0, f2: 1.0, gh: 0.0, ..Default::default() };
        assert_eq!(p.weight(17), Err(SigError::ZeroDenominator { path: 17 }));
    }
}
