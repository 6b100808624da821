use super::model::ModelSpec;
use super::payoff::Payoff;
use super::weights::{closed_form_weight, MalliavinWeight, Truncation, WeightKind, WeightPairs};
use crate::brownian::{column, sample_signatures, summarize, EstimatorResult, MCConfig};
use crate::error::{Result, SigError};
use crate::path_signature::{CompiledPoly, SigPlan};
use crate::tensor_algebra::shuffle_exp;
use crate::Poly;

/// How the signature functional `G` maps to the spot the payoff sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Underlying {
    /// `G = log S_T`.
    LogPrice,
    /// `G` is itself a price, e.g. an average.
    Price,
}

/// A delta problem: underlying `G = ⟨ℓG, sig⟩`, proportional to `S0` in spot terms.
#[derive(Clone, Debug)]
pub struct DeltaProblem {
    pub lg: Poly,
    pub underlying: Underlying,
    pub s0: f64,
    pub payoff: Payoff,
    /// Collar half-width for call localization; `None` turns it off.
    pub localization: Option<f64>,
    pub level: usize,
}

/// Default localization collar.
pub const DEFAULT_LOCALIZATION: f64 = 10.0;

impl DeltaProblem {
    pub fn european(model: &ModelSpec, payoff: Payoff, level: usize) -> Self {
        DeltaProblem {
            lg: model.log_price_coeff().truncate(level),
            underlying: Underlying::LogPrice,
            s0: model.s0(),
            payoff,
            localization: Some(DEFAULT_LOCALIZATION),
            level,
        }
    }

    /// Arithmetic average `(1/T) ∫ S_t dt`, through `(1/T) exp⧢(ℓX) 0` with the
    /// shuffle exponential cut at `level - 1`.
    pub fn asian(model: &ModelSpec, payoff: Payoff, horizon: f64, level: usize) -> Result<Self> {
        if level == 0 {
            return Err(SigError::InvalidParameter("Asian underlying needs level at least 1".into()));
        }
        Ok(DeltaProblem {
            lg: asian_coeff(model, horizon, level)?,
            underlying: Underlying::Price,
            s0: model.s0(),
            payoff,
            localization: Some(DEFAULT_LOCALIZATION),
            level,
        })
    }

    pub fn spot(&self, g: f64) -> f64 {
        match self.underlying {
            Underlying::LogPrice => g.exp(),
            Underlying::Price => g,
        }
    }
}

/// `ℓG = (1/T) exp⧢(ℓX)_{≤ level-1} ⊗ 0`.
pub fn asian_coeff(model: &ModelSpec, horizon: f64, level: usize) -> Result<Poly> {
    let e = shuffle_exp(&model.log_price_coeff(), level - 1)?;
    Ok(e.append_letter(0).scale(1.0 / horizon))
}

/// One way of estimating the delta.
#[derive(Clone, Debug)]
pub enum Estimator {
    Malliavin(MalliavinWeight),
    /// Central difference in `S0` with common random numbers.
    FiniteDifference { eps: f64 },
}

impl Estimator {
    pub fn tag(&self) -> String {
        match self {
            Estimator::Malliavin(w) => w.tag.clone(),
            Estimator::FiniteDifference { .. } => "fd".to_string(),
        }
    }
}

/// Default relative bump for finite differences.
pub const DEFAULT_FD_EPS: f64 = 0.01;

struct CompiledWeight {
    polys: [CompiledPoly; 7],
}

impl CompiledWeight {
    fn pairs(&self, acc: &crate::path_signature::SigAccumulator<'_>) -> WeightPairs {
        let v: Vec<f64> = self.polys.iter().map(|c| acc.pair(c)).collect();
        WeightPairs { f1: v[0], f2: v[1], div: v[2], f1h: v[3], f2h: v[4], gh: v[5], ghh: v[6] }
    }
}

fn build_plan(problem: &DeltaProblem, weights: &[&MalliavinWeight]) -> Result<(SigPlan, CompiledPoly, Vec<CompiledWeight>)> {
    let mut polys: Vec<&Poly> = vec![&problem.lg];
    for w in weights {
        polys.extend(w.ingredients());
    }
    if let Some(p) = polys.iter().find(|p| p.degree() > problem.level) {
        return Err(SigError::DegreeExceedsTruncation { degree: p.degree(), level: problem.level });
    }
    let plan = SigPlan::new(problem.lg.d(), &polys)?;
    let lg = plan.compile(&problem.lg)?;
    let mut cw = Vec::with_capacity(weights.len());
    for w in weights {
        let c = w.ingredients().map(|p| plan.compile(p));
        let [a, b, c2, d, e, f, g] = c;
        cw.push(CompiledWeight { polys: [a?, b?, c2?, d?, e?, f?, g?] });
    }
    Ok((plan, lg, cw))
}

/// Run several delta estimators on the same paths.
pub fn run_delta(problem: &DeltaProblem, estimators: &[Estimator], cfg: &MCConfig) -> Result<Vec<EstimatorResult>> {
    Ok(run_delta_payoffs(problem, &[problem.payoff], estimators, cfg)?.remove(0))
}

/// [`run_delta`] for several payoffs at once, sharing paths and weights.
/// The payoff stored in `problem` is ignored. Results are indexed
/// `[payoff][estimator]`.
pub fn run_delta_payoffs(problem: &DeltaProblem, payoffs: &[Payoff], estimators: &[Estimator], cfg: &MCConfig) -> Result<Vec<Vec<EstimatorResult>>> {
    let weights: Vec<&MalliavinWeight> = estimators
        .iter()
        .filter_map(|e| match e {
            Estimator::Malliavin(w) => Some(w),
            _ => None,
        })
        .collect();
    let (plan, lg, cw) = build_plan(problem, &weights)?;
    let locs: Vec<_> = payoffs.iter().map(|p| problem.localization.and_then(|w| p.localizer(w))).collect();
    let s0 = problem.s0;
    let ne = estimators.len();
    let n_out = ne * payoffs.len();
    let samples = sample_signatures(&plan, cfg, n_out, |idx, acc, row| {
        let s = problem.spot(acc.pair(&lg));
        let pis: Vec<Option<f64>> = cw.iter().map(|c| c.pairs(acc).weight(idx).ok()).collect();
        for (pi_row, (payoff, loc)) in row.chunks_exact_mut(ne).zip(payoffs.iter().zip(&locs)) {
            let f = payoff.value(s);
            let mut k = 0;
            for (e, slot) in estimators.iter().zip(pi_row.iter_mut()) {
                *slot = match e {
                    Estimator::FiniteDifference { eps } => {
                        (payoff.value((1.0 + eps) * s) - payoff.value((1.0 - eps) * s)) / (2.0 * eps * s0)
                    }
                    Estimator::Malliavin(_) => {
                        let pi = pis[k];
                        k += 1;
                        match (pi, loc) {
                            (Some(pi), Some(q)) => q.slope(s) * s / s0 + (f - q.value(s)) * pi,
                            (Some(pi), None) => f * pi,
                            (None, _) => f64::NAN,
                        }
                    }
                };
            }
        }
    })?;
    Ok((0..payoffs.len())
        .map(|p| {
            estimators
                .iter()
                .enumerate()
                .map(|(j, e)| {
                    let r = summarize(&e.tag(), &column(&samples, n_out, p * ne + j), cfg.antithetic);
                    if r.unstable() {
                        log::warn!("{}: {} of {} paths had a zero weight denominator", r.tag, r.n_excluded, cfg.n_paths);
                    }
                    r
                })
                .collect()
        })
        .collect())
}

/// `⟨DG, h⟩` on every path, one column per weight.
pub fn sample_denominators(problem: &DeltaProblem, weights: &[MalliavinWeight], cfg: &MCConfig) -> Result<Vec<Vec<f64>>> {
    let refs: Vec<&MalliavinWeight> = weights.iter().collect();
    let (plan, _, cw) = build_plan(problem, &refs)?;
    let n = weights.len();
    let samples = sample_signatures(&plan, cfg, n, |_, acc, row| {
        for (c, slot) in cw.iter().zip(row.iter_mut()) {
            *slot = acc.pair(&c.polys[5]);
        }
    })?;
    Ok((0..n).map(|j| column(&samples, n, j)).collect())
}

/// Delta of a European payoff with one closed-form weight.
pub fn delta_malliavin(model: &ModelSpec, payoff: Payoff, kind: WeightKind, level: usize, policy: Truncation, cfg: &MCConfig) -> Result<EstimatorResult> {
    let w = closed_form_weight(model, kind, level, policy)?;
    let problem = DeltaProblem::european(model, payoff, level);
    Ok(run_delta(&problem, &[Estimator::Malliavin(w)], cfg)?.remove(0))
}

/// Central finite-difference delta of a European payoff.
pub fn delta_finite_difference(model: &ModelSpec, payoff: Payoff, eps: f64, level: usize, cfg: &MCConfig) -> Result<EstimatorResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SigError::InvalidParameter(format!("bump {eps} must lie in (0, 1)")));
    }
    let problem = DeltaProblem::european(model, payoff, level);
    Ok(run_delta(&problem, &[Estimator::FiniteDifference { eps }], cfg)?.remove(0))
}

