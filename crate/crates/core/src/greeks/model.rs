use crate::error::{Result, SigError};
use crate::tensor_algebra::{shuffle, TensorPoly, Word};
use crate::Poly;

/// Signature volatility model.
///
/// `dS = S σ_t (ρ dW¹ + ρ̄ dW²)` with `σ_t = ⟨σ, sig(Ŵ¹)_{[0,t]}⟩` and
/// `ρ̄ = sqrt(1 - ρ²)`. Letter 1 drives volatility, letter 2 is the
/// independent factor and may not appear in `σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    sigma: Poly,
    rho: f64,
    s0: f64,
}

/// Model parameter to differentiate against.
#[derive(Clone, Debug, PartialEq)]
pub enum Sensitivity {
    Spot,
    Rho,
    /// Coefficient of one word of `σ`.
    Sigma(Word),
}

impl ModelSpec {
    pub fn new(sigma: Poly, rho: f64, s0: f64) -> Result<Self> {
        let sigma = if sigma.d() < 2 { sigma.with_dim(2)? } else { sigma };
        if sigma.d() != 2 {
            return Err(SigError::DimensionMismatch { left: 2, right: sigma.d() });
        }
        if let Some(m) = sigma.words().filter_map(Word::max_letter).max() {
            if m > 1 {
                return Err(SigError::InvalidLetter { letter: m, d: 1 });
            }
        }
        if !(rho.abs() <= 1.0) {
            return Err(SigError::InvalidParameter(format!("rho = {rho} outside [-1, 1]")));
        }
        if !(s0 > 0.0) || !s0.is_finite() {
            return Err(SigError::InvalidParameter(format!("S0 = {s0} must be positive")));
        }
        Ok(ModelSpec { sigma, rho, s0 })
    }

    /// Parse `sigma <word> <coeff>`, `rho <x>` and `S0 <x>` lines. Other keys
    /// are ignored, `#` starts a comment, `key = value` also works.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let mut sigma = TensorPoly::zero(2);
        let mut rho = None;
        let mut s0 = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").replace('=', " ");
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: String| SigError::Parse { line: k + 1, msg };
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number `{s}`")));
            match toks.as_slice() {
                ["sigma", w, c] => {
                    let word = Word::parse(w).ok_or_else(|| err(format!("bad word `{w}`")))?;
                    let word = Word::new(word.letters().to_vec(), 2).map_err(|e| err(e.to_string()))?;
                    sigma.add_term(word, num(c)?);
                }
                ["sigma", ..] => return Err(err("expected `sigma <word> <coeff>`".into())),
                ["rho", x] => rho = Some(num(x)?),
                ["S0" | "s0", x] => s0 = Some(num(x)?),
                _ => {}
            }
        }
        let rho = rho.ok_or(SigError::Parse { line: 0, msg: "missing rho".into() })?;
        let s0 = s0.unwrap_or(1.0);
        Self::new(sigma, rho, s0)
    }

    pub fn sigma(&self) -> &Poly {
        &self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_bar(&self) -> f64 {
        (1.0 - self.rho * self.rho).max(0.0).sqrt()
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn with_s0(&self, s0: f64) -> Result<Self> {
        Self::new(self.sigma.clone(), self.rho, s0)
    }

    /// Degree `M` of the volatility polynomial.
    pub fn vol_degree(&self) -> usize {
        self.sigma.degree()
    }

    /// `ℓX` with `X_T = ⟨ℓX, sig(Ŵ)_{[0,T]}⟩ = log S_T`:
    /// `ln S0 ∅ - ½ (σ⧢σ) 0 + ρ (σ 1 - ½ σ|_1 0) + ρ̄ σ 2`.
    pub fn log_price_coeff(&self) -> Poly {
        let s = &self.sigma;
        let mut l = TensorPoly::constant(2, self.s0.ln());
        let ss = shuffle(s, s).expect("same alphabet");
        l.add_scaled(&ss.append_letter(0), -0.5).unwrap();
        l.add_scaled(&s.append_letter(1), self.rho).unwrap();
        l.add_scaled(&s.right_projection(1).append_letter(0), -0.5 * self.rho).unwrap();
        l.add_scaled(&s.append_letter(2), self.rho_bar()).unwrap();
        l
    }

    /// Coefficient of `∂X_T / ∂θ` for a model parameter `θ`.
    pub fn sensitivity_coeff(&self, param: &Sensitivity) -> Result<Poly> {
        let s = &self.sigma;
        match param {
            Sensitivity::Spot => Ok(TensorPoly::constant(2, 1.0 / self.s0)),
            Sensitivity::Rho => {
                let rb = self.rho_bar();
                if rb == 0.0 {
                    return Err(SigError::RhoAtBoundary);
                }
                let mut l = s.append_letter(1);
                l.add_scaled(&s.right_projection(1).append_letter(0), -0.5)?;
                l.add_scaled(&s.append_letter(2), -self.rho / rb)?;
                Ok(l)
            }
            Sensitivity::Sigma(w) => {
                if w.max_letter().is_some_and(|m| m > 1) {
                    return Err(SigError::InvalidLetter { letter: w.max_letter().unwrap(), d: 1 });
                }
                let v = TensorPoly::monomial(2, w.clone(), 1.0);
                let mut l = shuffle(&v, s)?.append_letter(0).scale(-1.0);
                l.add_scaled(&v.append_letter(1), self.rho)?;
                l.add_scaled(&v.right_projection(1).append_letter(0), -0.5 * self.rho)?;
                l.add_scaled(&v.append_letter(2), self.rho_bar())?;
                l.add_scaled(&v.right_projection(2).append_letter(0), -0.5 * self.rho_bar())?;
                Ok(l)
            }
        }
    }

    /// Warn when `S` may fail to be a true martingale: volatility of degree
    /// `M > 0` that is not affine in `W`, unless `M` is odd and
    /// `ρ σ^{1..1} < 0`.
    pub fn martingale_warning(&self) -> Option<String> {
        let m = self.vol_degree();
        if m == 0 {
            return None;
        }
        let affine = self.sigma.words().all(|w| w.count(1) <= 1);
        if affine {
            return None;
        }
        let top = self.sigma.coeff(&Word::from(vec![1u8; m].as_slice()));
        if m % 2 == 1 && self.rho * top < 0.0 {
            return None;
        }
        Some(format!(
            "volatility of degree {m} is not affine in W and rho * sigma^(1^{m}) = {} is not negative; S may be a strict local martingale",
            self.rho * top
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn sigma(terms: &[(&str, f64)]) -> Poly {
        TensorPoly::from_terms(2, terms.iter().map(|(a, c)| (w(a), *c))).unwrap()
    }

    #[test]
    fn constant_vol_log_price() {
        let m = ModelSpec::new(sigma(&[("e", 0.2)]), 0.6, 2.0).unwrap();
        let l = m.log_price_coeff();
        assert!((l.constant_term() - 2f64.ln()).abs() < 1e-15);
        assert!((l.coeff(&w("0")) + 0.02).abs() < 1e-15);
        assert!((l.coeff(&w("1")) - 0.12).abs() < 1e-15);
        assert!((l.coeff(&w("2")) - 0.16).abs() < 1e-15);
        assert_eq!(l.len(), 4);
    }

    #[test]
    fn letter_two_rejected() {
        assert!(matches!(ModelSpec::new(sigma(&[("2", 0.1)]), 0.0, 1.0), Err(SigError::InvalidLetter { .. })));
        assert!(ModelSpec::new(sigma(&[("e", 0.1)]), 1.5, 1.0).is_err());
        assert!(ModelSpec::new(sigma(&[("e", 0.1)]), 0.0, -1.0).is_err());
    }

    #[test]
    fn log_price_degree() {
        let m = ModelSpec::new(sigma(&[("e", 0.25), ("1", 0.04), ("01", 0.04), ("110", 0.04), ("111", 0.04)]), -0.9, 1.0).unwrap();
        assert_eq!(m.vol_degree(), 3);
        assert_eq!(m.log_price_coeff().degree(), 7);
        assert!(m.martingale_warning().is_none());
    }

    #[test]
    fn martingale_guard() {
        let m = ModelSpec::new(sigma(&[("e", 0.2), ("11", 0.1)]), -0.5, 1.0).unwrap();
        assert!(m.martingale_warning().is_some());
        let m = ModelSpec::new(sigma(&[("e", 0.2), ("111", 0.1)]), 0.5, 1.0).unwrap();
        assert!(m.martingale_warning().is_some());
        let m = ModelSpec::new(sigma(&[("e", 0.2), ("1", 0.1), ("10", 0.05)]), 0.5, 1.0).unwrap();
        assert!(m.martingale_warning().is_none());
    }

    #[test]
    fn config_text() {
        let m = ModelSpec::from_config_text("# model\nsigma e 0.25\nsigma 1 0.1\nrho = -0.9\nS0 1.5\nN 8\n").unwrap();
        assert_eq!(m.rho(), -0.9);
        assert_eq!(m.s0(), 1.5);
        assert_eq!(m.sigma().coeff(&w("1")), 0.1);
        assert!(matches!(ModelSpec::from_config_text("sigma 1x 0.1\nrho 0"), Err(SigError::Parse { line: 1, .. })));
    }

    #[test]
    fn sigma_sensitivity_matches_bump() {
        // ∂ℓX/∂σ^v against a central difference of the coefficients
        let base = sigma(&[("e", 0.25), ("1", 0.1), ("10", 0.05)]);
        let m = ModelSpec::new(base.clone(), -0.7, 1.0).unwrap();
        for word in ["e", "1", "10"] {
            let h = 1e-6;
            let mut up = base.clone();
            up.add_term(w(word), h);
            let mut dn = base.clone();
            dn.add_term(w(word), -h);
            let lu = ModelSpec::new(up, -0.7, 1.0).unwrap().log_price_coeff();
            let ld = ModelSpec::new(dn, -0.7, 1.0).unwrap().log_price_coeff();
            let fd = (&lu - &ld).scale(0.5 / h);
            let an = m.sensitivity_coeff(&Sensitivity::Sigma(w(word))).unwrap();
            assert!(fd.max_abs_diff(&an) < 1e-8, "{word}");
        }
    }

    #[test]
    fn rho_sensitivity_matches_bump() {
        let s = sigma(&[("e", 0.25), ("1", 0.1)]);
        let h = 1e-6;
        let lu = ModelSpec::new(s.clone(), -0.5 + h, 1.0).unwrap().log_price_coeff();
        let ld = ModelSpec::new(s.clone(), -0.5 - h, 1.0).unwrap().log_price_coeff();
        let an = ModelSpec::new(s.clone(), -0.5, 1.0).unwrap().sensitivity_coeff(&Sensitivity::Rho).unwrap();
        assert!((&lu - &ld).scale(0.5 / h).max_abs_diff(&an) < 1e-8);
        let edge = ModelSpec::new(s, 1.0, 1.0).unwrap();
        assert_eq!(edge.sensitivity_coeff(&Sensitivity::Rho), Err(SigError::RhoAtBoundary));
    }
}
