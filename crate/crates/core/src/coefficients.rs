//! Finitely supported fields of Fourier coefficients `xi -> u_hat(xi)`, an
//! `n x 1` block column of `d_xi x p` matrices at each representation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{rep_meta, GroupId, RepIndex};
use crate::linalg::{ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    group: GroupId,
    n: usize,
    entries: BTreeMap<RepIndex, Vec<ComplexMatrix>>,
}

impl CoefficientField {
    pub fn new(group: GroupId, n: usize) -> Self {
        Self {
            group,
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn group(&self) -> &GroupId {
        &self.group
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, xi: RepIndex, blocks: Vec<ComplexMatrix>) -> Result<()> {
        let d = rep_meta(&self.group, &xi)?.dim;
        if blocks.len() != self.n {
            return Err(Error::Shape(format!(
                "expected {} blocks at {xi}, got {}",
                self.n,
                blocks.len()
            )));
        }
        if blocks.iter().any(|b| b.rows() != d) {
            return Err(Error::WrongBlockSize {
                index: xi.to_string(),
                expected: d,
                rows: blocks.iter().find(|b| b.rows() != d).map_or(0, ComplexMatrix::rows),
                cols: blocks[0].cols(),
            });
        }
        if blocks.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.entries.insert(xi, blocks);
        Ok(())
    }

    /// Insert scalar coefficients (one per component) on the torus.
    pub fn insert_scalars(&mut self, xi: RepIndex, values: &[C64]) -> Result<()> {
        let blocks = values.iter().map(|&z| ComplexMatrix::diagonal(&[z])).collect();
        self.insert(xi, blocks)
    }

    pub fn get(&self, xi: &RepIndex) -> Option<&[ComplexMatrix]> {
        self.entries.get(xi).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&RepIndex, &[ComplexMatrix])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(sum_i ||u_hat_i(xi)||_HS^2)^{1/2}`; zero outside the support.
    pub fn hs_norm_at(&self, xi: &RepIndex) -> f64 {
        self.get(xi).map_or(0.0, stack_hs_norm)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().flatten().all(ComplexMatrix::is_zero)
    }

    /// `(sum_xi d_xi <xi>^{2s} sum_i ||u_hat_i(xi)||_HS^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (xi, blocks) in &self.entries {
            let meta = rep_meta(&self.group, xi)?;
            acc += meta.dim as f64 * meta.bracket.powf(2.0 * s) * stack_hs_norm(blocks).powi(2);
        }
        Ok(acc.sqrt())
    }
}

pub fn stack_hs_norm(blocks: &[ComplexMatrix]) -> f64 {
    blocks.iter().map(|b| b.hs_norm().powi(2)).sum::<f64>().sqrt()
}
