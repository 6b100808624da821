/// Payoff on the spot value of the underlying.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Payoff {
    Call { strike: f64 },
    Digital { strike: f64 },
}

impl Payoff {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            Payoff::Call { strike } => (s - strike).max(0.0),
            Payoff::Digital { strike } => {
                if s > strike {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn strike(&self) -> f64 {
        match *self {
            Payoff::Call { strike } | Payoff::Digital { strike } => strike,
        }
    }

    /// Smooth part used to localize a call; digitals are not localized.
    pub fn localizer(&self, width: f64) -> Option<Localizer> {
        match *self {
            Payoff::Call { strike } if width > 0.0 => Some(Localizer { strike, width }),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Payoff::Call { .. } => "call",
            Payoff::Digital { .. } => "digital",
        }
    }
}

/// `C¹` approximation of a call: zero below `K - δ`, `(s - K + δ)²/(4δ)`
/// inside the collar, `s - K` above `K + δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Localizer {
    pub strike: f64,
    pub width: f64,
}

impl Localizer {
    pub fn value(&self, s: f64) -> f64 {
        let (k, dl) = (self.strike, self.width);
        if s <= k - dl {
            0.0
        } else if s < k + dl {
            (s - k + dl).powi(2) / (4.0 * dl)
        } else {
            s - k
        }
    }

    pub fn slope(&self, s: f64) -> f64 {
        let (k, dl) = (self.strike, self.width);
        if s <= k - dl {
            0.0
        } else if s < k + dl {
            (s - k + dl) / (2.0 * dl)
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn localizer_is_c1() {
        let q = Localizer { strike: 1.0, width: 0.5 };
        for edge in [0.5, 1.5] {
            let (a, b) = (edge - 1e-9, edge + 1e-9);
            assert!((q.value(a) - q.value(b)).abs() < 1e-8);
            assert!((q.slope(a) - q.slope(b)).abs() < 1e-8);
        }
        assert_eq!(q.value(3.0), 2.0);
        assert_eq!(q.value(0.0), 0.0);
    }

    #[test]
    fn digital_has_no_localizer() {
        assert!(Payoff::Digital { strike: 1.0 }.localizer(10.0).is_none());
        assert!(Payoff::Call { strike: 1.0 }.localizer(10.0).is_some());
        assert!(Payoff::Call { strike: 1.0 }.localizer(0.0).is_none());
    }
}
