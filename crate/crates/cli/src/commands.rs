use std::path::PathBuf;

use anyhow::{bail, Result};
use log::{info, warn};
use sigmal::brownian::EstimatorResult;
use sigmal::greeks::{
    run_delta_payoffs, sample_denominators, universal_asian_weight, universal_delta_weight, closed_form_weight, DeltaProblem, Estimator, ModelSpec,
    Payoff, Truncation, WeightKind, DEFAULT_FD_EPS, DEFAULT_LOCALIZATION,
};
use sigmal::tensor_algebra::{TensorPoly, Word};
use sigmal::validation::{self, CheckOutcome};

use crate::config::{Config, ConfigError, ConfigResult, Overrides};
use crate::output;

pub struct Context {
    pub config: Config,
    pub overrides: Overrides,
    pub out: PathBuf,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn model(&self) -> ConfigResult<ModelSpec> {
        let m = self.config.model()?;
        if let Some(w) = m.martingale_warning() {
            warn!("{w}");
        }
        Ok(m)
    }
}

fn report(checks: &[CheckOutcome]) -> bool {
    for c in checks {
        let status = if c.passed { "pass" } else { "FAIL" };
        info!("{status} {} (max error {:.3e})", c.name, c.max_error);
    }
    checks.iter().all(|c| c.passed)
}

pub fn validate_algebra(ctx: &Context) -> Result<bool> {
    let seed = ctx.overrides.seed(&ctx.config)?;
    let mut checks = validation::algebra_checks(seed)?;
    checks.extend(validation::worked_examples()?);
    output::write_validation(&ctx.path("validation.csv"), &checks)?;
    Ok(report(&checks))
}

pub fn validate_malliavin(ctx: &Context) -> Result<bool> {
    let seed = ctx.overrides.seed(&ctx.config)?;
    let finest = ctx.overrides.steps.map_or_else(|| ctx.config.num_or("steps", 2000), Ok)?;
    let checks = validation::malliavin_checks(seed, finest)?;
    output::write_validation(&ctx.path("validation.csv"), &checks)?;
    Ok(report(&checks))
}

pub fn esig_check(ctx: &Context) -> Result<bool> {
    let mc = ctx.overrides.mc(&ctx.config, 100_000, 500)?;
    let d = ctx.config.num_or("d", 2usize)?;
    let depth = ctx.overrides.level(&ctx.config, 4)?;
    let stats = validation::esig_check(&mc, d, depth)?;
    let checks: Vec<CheckOutcome> = stats
        .iter()
        .map(|s| CheckOutcome { name: format!("esig_{}", s.word), passed: s.within(3.0), max_error: (s.mc - s.exact).abs() })
        .collect();
    let rows: Vec<Vec<String>> =
        stats.iter().map(|s| vec![s.word.to_string(), format!("{:e}", s.mc), format!("{:e}", s.std_error), format!("{:e}", s.exact)]).collect();
    output::write_rows(&ctx.path("esig_coefficients.csv"), &["word", "mc", "std_error", "exact"], &rows)?;
    output::write_validation(&ctx.path("validation.csv"), &checks)?;
    let bad = checks.iter().filter(|c| !c.passed).count();
    info!("{} of {} coefficients within 3 standard errors", checks.len() - bad, checks.len());
    Ok(bad == 0)
}

pub fn ou_check(ctx: &Context) -> Result<bool> {
    let mc = ctx.overrides.mc(&ctx.config, 100, 500)?;
    let kappa = ctx.config.list_or("kappa", &[1.0, 0.5])?;
    if kappa.is_empty() || kappa.iter().any(|k| !(*k >= 0.0)) {
        return Err(ConfigError("kappa needs at least one non-negative rate".into()).into());
    }
    let theta = ctx.config.num_or("theta", 0.5)?;
    let inner = ctx.config.num_or("inner_paths", 10_000usize)?;
    if inner < 2 {
        return Err(ConfigError("inner_paths must be at least 2".into()).into());
    }
    let n_random = ctx.config.num_or("random_functionals", 2usize)?;
    let d = kappa.len();
    let mut ls = vec![TensorPoly::monomial(d, Word::from([1u8, 1].as_slice()), 1.0)];
    ls.extend(validation::random_functionals(mc.seed ^ 0xa076_1d64_78bd_642f, d, 3, 6, n_random));
    let stats = validation::ou_check(&ls, &kappa, theta, &mc, inner)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (f, s) in stats.iter().enumerate() {
        let (passed, z, exceed) = validation::ou_verdict(s, 3);
        info!("functional {f}: aggregate z = {z:.3}, {exceed} of {} paths beyond 3 inner SE", s.len());
        checks.push(CheckOutcome { name: format!("ou_functional_{f}"), passed, max_error: z.abs() });
        for p in s {
            rows.push(vec![f.to_string(), p.path.to_string(), format!("{:e}", p.operator), format!("{:e}", p.inner_mean), format!("{:e}", p.inner_se)]);
        }
    }
    output::write_rows(&ctx.path("ou_paths.csv"), &["functional", "path", "operator", "inner_mean", "inner_se"], &rows)?;
    output::write_validation(&ctx.path("validation.csv"), &checks)?;
    Ok(report(&checks))
}

fn payoffs(cfg: &Config, s0: f64) -> ConfigResult<Vec<Payoff>> {
    let strike = cfg.num_or("strike", s0)?;
    match cfg.str_or("payoff", "both").as_str() {
        "call" => Ok(vec![Payoff::Call { strike }]),
        "digital" => Ok(vec![Payoff::Digital { strike }]),
        "both" => Ok(vec![Payoff::Call { strike }, Payoff::Digital { strike }]),
        other => Err(ConfigError(format!("payoff must be call, digital or both, got `{other}`"))),
    }
}

/// Requested weights, with `univ-` marking the general formula; `fd` adds
/// the finite difference.
fn requested(cfg: &Config) -> ConfigResult<(Vec<(WeightKind, bool)>, bool)> {
    let universal_default = match cfg.str_or("weight_form", "closed").as_str() {
        "closed" => false,
        "universal" => true,
        other => return Err(ConfigError(format!("weight_form must be closed or universal, got `{other}`"))),
    };
    let mut kinds = Vec::new();
    let mut fd = false;
    for tok in cfg.str_or("weights", "h1,h2,h3,h4,fd").split([',', ' ']).filter(|t| !t.is_empty()) {
        if tok == "fd" {
            fd = true;
            continue;
        }
        let (name, univ) = match tok.strip_prefix("univ-") {
            Some(rest) => (rest, true),
            None => (tok, universal_default),
        };
        let kind = WeightKind::parse(name).ok_or_else(|| ConfigError(format!("unknown weight `{tok}`")))?;
        kinds.push((kind, univ));
    }
    Ok((kinds, fd))
}

fn truncation(cfg: &Config) -> ConfigResult<Truncation> {
    match cfg.str_or("truncation", "truncate").as_str() {
        "truncate" => Ok(Truncation::Truncate),
        "strict" => Ok(Truncation::Strict),
        other => Err(ConfigError(format!("truncation must be strict or truncate, got `{other}`"))),
    }
}

fn localization(cfg: &Config) -> ConfigResult<Option<f64>> {
    match cfg.str_or("localization", "").as_str() {
        "" => Ok(Some(DEFAULT_LOCALIZATION)),
        "none" | "off" => Ok(None),
        s => {
            let w: f64 = s.parse().map_err(|_| ConfigError(format!("localization: cannot parse `{s}`")))?;
            if w > 0.0 {
                Ok(Some(w))
            } else {
                Err(ConfigError("localization width must be positive".into()))
            }
        }
    }
}

fn fd_eps(cfg: &Config) -> ConfigResult<f64> {
    let eps = cfg.num_or("eps", DEFAULT_FD_EPS)?;
    if eps > 0.0 && eps < 1.0 {
        Ok(eps)
    } else {
        Err(ConfigError(format!("eps = {eps} must lie in (0, 1)")))
    }
}

fn run_and_write(ctx: &Context, problem: &DeltaProblem, pays: &[Payoff], est: &[Estimator]) -> Result<Vec<(String, EstimatorResult)>> {
    if est.is_empty() {
        bail!("no estimator could be built for this model");
    }
    let mc = ctx.overrides.mc(&ctx.config, 100_000, 500)?;
    let res = run_delta_payoffs(problem, pays, est, &mc)?;
    let mut runs = Vec::new();
    for (p, row) in pays.iter().zip(res) {
        for r in row {
            let tag = format!("{}/{}", p.tag(), r.tag);
            let mark = if r.unstable() { " [unstable]" } else { "" };
            info!("{tag}: {:.6} ± {:.6} ({} paths, {} excluded){mark}", r.estimate, r.std_error, r.n_used, r.n_excluded);
            runs.push((tag, r));
        }
    }
    output::write_convergence(&ctx.path("convergence.csv"), &runs)?;
    Ok(runs)
}

pub fn greeks_convergence(ctx: &Context) -> Result<bool> {
    let model = ctx.model()?;
    let level = ctx.overrides.level(&ctx.config, 7)?;
    let pays = payoffs(&ctx.config, model.s0())?;
    let (kinds, fd) = requested(&ctx.config)?;
    let policy = truncation(&ctx.config)?;
    let mut est = Vec::new();
    for (kind, univ) in kinds {
        let w = if univ { universal_delta_weight(&model, kind, level, policy) } else { closed_form_weight(&model, kind, level, policy) };
        match w {
            Ok(w) => est.push(Estimator::Malliavin(w)),
            Err(e) => warn!("skipping {}{kind}: {e}", if univ { "univ-" } else { "" }),
        }
    }
    if fd {
        est.push(Estimator::FiniteDifference { eps: fd_eps(&ctx.config)? });
    }
    let mut problem = DeltaProblem::european(&model, pays[0], level);
    problem.localization = localization(&ctx.config)?;
    run_and_write(ctx, &problem, &pays, &est)?;
    Ok(true)
}

pub fn asian_convergence(ctx: &Context) -> Result<bool> {
    let model = ctx.model()?;
    let level = ctx.overrides.level(&ctx.config, 8)?;
    let horizon = ctx.config.num_or("T", 1.0)?;
    let pays = payoffs(&ctx.config, model.s0())?;
    let (kinds, fd) = requested(&ctx.config)?;
    let policy = truncation(&ctx.config)?;
    let mut problem = DeltaProblem::asian(&model, pays[0], horizon, level)?;
    problem.localization = localization(&ctx.config)?;
    let mut est = Vec::new();
    for (kind, _) in kinds {
        match universal_asian_weight(&model, &problem.lg, kind, level, policy) {
            Ok(w) => est.push(Estimator::Malliavin(w)),
            Err(e) => warn!("skipping {kind}: {e}"),
        }
    }
    if fd {
        est.push(Estimator::FiniteDifference { eps: fd_eps(&ctx.config)? });
    }
    run_and_write(ctx, &problem, &pays, &est)?;
    Ok(true)
}

pub fn instability_histogram(ctx: &Context) -> Result<bool> {
    let model = ctx.model()?;
    let level = ctx.overrides.level(&ctx.config, 7)?;
    let policy = truncation(&ctx.config)?;
    let bins = ctx.config.num_or("bins", 50usize)?;
    let mc = ctx.overrides.mc(&ctx.config, 10_000, 500)?;
    let strike = ctx.config.num_or("strike", model.s0())?;
    let mut weights = Vec::new();
    for kind in WeightKind::ALL {
        match closed_form_weight(&model, kind, level, policy) {
            Ok(w) => weights.push(w),
            Err(e) => warn!("skipping {kind}: {e}"),
        }
    }
    let mut problem = DeltaProblem::european(&model, Payoff::Call { strike }, level);
    problem.localization = localization(&ctx.config)?;
    let dens = sample_denominators(&problem, &weights, &mc)?;
    let mut hists = Vec::new();
    for (w, xs) in weights.iter().zip(&dens) {
        let n = xs.len() as f64;
        let neg = xs.iter().filter(|x| **x < 0.0).count() as f64 / n;
        let pos = xs.iter().filter(|x| **x > 0.0).count() as f64 / n;
        info!("{}: ⟨DG, h⟩ negative on {:.2}% of paths, positive on {:.2}%", w.tag, 100.0 * neg, 100.0 * pos);
        hists.push((w.tag.clone(), output::histogram(xs, bins)));
    }
    output::write_histograms(&ctx.path("histogram.csv"), &hists)?;
    let mut est: Vec<Estimator> = weights.into_iter().map(Estimator::Malliavin).collect();
    est.push(Estimator::FiniteDifference { eps: fd_eps(&ctx.config)? });
    run_and_write(ctx, &problem, &[Payoff::Call { strike }], &est)?;
    Ok(true)
}
