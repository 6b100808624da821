use std::fmt::Write as _;
use std::str::FromStr;

use super::poly::TensorPoly;
use super::word::Word;
use crate::error::{Result, SigError};
use crate::scalar::Scalar;

/// Serialize as one `word coefficient` line per term, empty word written `e`.
pub fn to_text<S: Scalar>(l: &TensorPoly<S>) -> String {
    let mut s = String::new();
    for (w, c) in l.iter() {
        let _ = writeln!(s, "{w} {c}");
    }
    s
}

/// Inverse of [`to_text`]. Blank lines and `#` comments are skipped.
pub fn from_text<S: Scalar + FromStr>(d: usize, text: &str) -> Result<TensorPoly<S>> {
    let mut terms = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| SigError::Parse { line: k + 1, msg: msg.to_string() };
        let mut it = line.split_whitespace();
        let (Some(ws), Some(cs), None) = (it.next(), it.next(), it.next()) else {
            return Err(err("expected `word coefficient`"));
        };
        let w = Word::parse(ws).ok_or_else(|| err("bad word"))?;
        let c = cs.parse::<S>().map_err(|_| err("bad coefficient"))?;
        terms.push((w, c));
    }
    TensorPoly::from_terms(d, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let l = TensorPoly::from_terms(
            2,
            vec![(Word::empty(), 0.25), (Word::from([1u8]), -1.5e-7), (Word::from([0u8, 1, 2]), 1.0 / 3.0)],
        )
        .unwrap();
        let txt = to_text(&l);
        assert!(txt.starts_with("e 0.25\n"));
        let back: TensorPoly<f64> = from_text(2, &txt).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn parse_errors_carry_line() {
        let r: Result<TensorPoly<f64>> = from_text(1, "e 1\n\n01 x\n");
        assert!(matches!(r, Err(SigError::Parse { line: 3, .. })));
    }
}
