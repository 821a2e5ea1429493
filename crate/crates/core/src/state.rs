//! The first-order unknown `(psi1, psi2)` of the similarity system.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{same_grid, Parity, RadialField, RadialGrid};

#[derive(Debug, Clone)]
pub struct State {
    pub psi1: RadialField,
    pub psi2: RadialField,
}

impl State {
    pub fn new(psi1: RadialField, psi2: RadialField) -> Result<Self> {
        same_grid(&psi1, &psi2)?;
        Ok(Self { psi1, psi2 })
    }

    pub fn zeros(grid: &Arc<RadialGrid>) -> Self {
        Self { psi1: grid.zeros(), psi2: grid.zeros() }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        self.psi1.grid()
    }

    pub fn require_even(&self) -> Result<()> {
        if self.psi1.parity() != Parity::Even || self.psi2.parity() != Parity::Even {
            return Err(LabError::Contract("similarity state components must be even".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> State {
        State { psi1: self.psi1.scaled(c), psi2: self.psi2.scaled(c) }
    }

    /// `self + c * other`, componentwise.
    pub fn axpy(&self, c: f64, other: &State) -> Result<State> {
        same_grid(&self.psi1, &other.psi1)?;
        let mut out = self.clone();
        for (a, b) in out.psi1.values_mut().iter_mut().zip(other.psi1.values()) {
            *a += c * b;
        }
        for (a, b) in out.psi2.values_mut().iter_mut().zip(other.psi2.values()) {
            *a += c * b;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.psi1.max_abs().max(self.psi2.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.psi1.values().iter().chain(self.psi2.values()).all(|v| v.is_finite())
    }
}
