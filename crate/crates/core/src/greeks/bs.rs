use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// Payoff shape for the closed-form deltas.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BsKind {
    Call,
    Digital,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Black-Scholes delta with zero rates.
pub fn bs_delta(s0: f64, k: f64, sigma: f64, t: f64, kind: BsKind) -> f64 {
    let n = std_normal();
    let sd = sigma * t.sqrt();
    let d1 = ((s0 / k).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    match kind {
        BsKind::Call => n.cdf(d1),
        BsKind::Digital => n.pdf(d2) / (s0 * sd),
    }
}

/// Black-Scholes price with zero rates.
pub fn bs_price(s0: f64, k: f64, sigma: f64, t: f64, kind: BsKind) -> f64 {
    let n = std_normal();
    let sd = sigma * t.sqrt();
    let d1 = ((s0 / k).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    match kind {
        BsKind::Call => s0 * n.cdf(d1) - k * n.cdf(d2),
        BsKind::Digital => n.cdf(d2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_the_money_values() {
        assert!((bs_delta(1.0, 1.0, 0.2, 1.0, BsKind::Call) - 0.539828).abs() < 1e-6);
        assert!((bs_delta(1.0, 1.0, 0.2, 1.0, BsKind::Digital) - 1.984763).abs() < 1e-6);
    }

    #[test]
    fn delta_is_price_slope() {
        for kind in [BsKind::Call, BsKind::Digital] {
            let h = 1e-5;
            let fd = (bs_price(1.0 + h, 1.1, 0.3, 0.7, kind) - bs_price(1.0 - h, 1.1, 0.3, 0.7, kind)) / (2.0 * h);
            assert!((fd - bs_delta(1.0, 1.1, 0.3, 0.7, kind)).abs() < 1e-7);
        }
    }
}
