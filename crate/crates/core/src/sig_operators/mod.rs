//! Linear operators on tensor polynomials: the switching operator `Ψ`, the
//! number and OU operators, the Skorokhod coefficient and the diamond product.

mod diamond;
mod ou;
mod switching;

pub use diamond::{diamond, diamond_cdc, diamond_cdc_capped, diamond_direct, diamond_vec, diamond_vec_capped};
pub use ou::{exp_psi_ii, j_op, lambda_op, ou_generator_adjoint, ou_semigroup_adjoint, skorokhod_coeff, OuParams};
pub(crate) use switching::psi1;
pub use switching::{psi, psi_on_tensor, SwitchSpec};

use crate::error::{Result, SigError};
use crate::scalar::Scalar;
use crate::tensor_algebra::TensorPoly;

/// One polynomial per Brownian letter `1..=d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffVector<S> {
    comps: Vec<TensorPoly<S>>,
}

impl<S: Scalar> CoeffVector<S> {
    pub fn zero(d: usize) -> Self {
        CoeffVector { comps: vec![TensorPoly::zero(d); d] }
    }

    pub fn new(comps: Vec<TensorPoly<S>>) -> Result<Self> {
        let d = comps.len();
        if let Some(bad) = comps.iter().find(|c| c.d() != d) {
            return Err(SigError::DimensionMismatch { left: d, right: bad.d() });
        }
        Ok(CoeffVector { comps })
    }

    /// `l` in slot `i`, zero elsewhere.
    pub fn unit(l: TensorPoly<S>, i: u8) -> Result<Self> {
        let d = l.d();
        if i == 0 || i as usize > d {
            return Err(SigError::InvalidLetter { letter: i, d });
        }
        let mut v = Self::zero(d);
        v.comps[i as usize - 1] = l;
        Ok(v)
    }

    pub fn d(&self) -> usize {
        self.comps.len()
    }

    /// Component for letter `i` (1-based).
    pub fn get(&self, i: u8) -> &TensorPoly<S> {
        &self.comps[i as usize - 1]
    }

    pub fn set(&mut self, i: u8, l: TensorPoly<S>) {
        self.comps[i as usize - 1] = l;
    }

    pub fn degree(&self) -> usize {
        self.comps.iter().map(TensorPoly::degree).max().unwrap_or(0)
    }

    /// `Σ_i (Λ_i - Ψ^{ii}_0) h_i`, the coefficient of the divergence `δ(h)`
    /// when `h = D⟨h_i⟩` componentwise.
    pub fn divergence_coeff(&self) -> TensorPoly<S> {
        let d = self.d();
        let mut out = TensorPoly::zero(d);
        for i in 1..=d as u8 {
            let hi = self.get(i);
            out.add_scaled(&lambda_op(hi, i), S::one()).expect("same alphabet");
            out.add_scaled(&psi1(hi, &[i, i], &[0]), -S::one()).expect("same alphabet");
        }
        out
    }
}
