//! Antisymmetric perturbation matrices `S` and the induced drift `S̃ = C S`.
//!
//! Every implemented family is banded (at most one super-diagonal), so the
//! operators store only their band and apply in `O(n)`.

mod constants;
mod registry;

use std::fmt;

pub use constants::{
    c_constants_analytic, estimate_c_constants, expected_tilde_norm_sq, CConstants, CEstimate,
    Estimate,
};
pub use registry::{
    BidiagonalFamily, SkewFamily, SkewParams, SkewRegistry, UnitJordanFamily, WeightedJordanFamily,
    ZeroFamily,
};

use crate::error::{Error, Result};
use crate::target::Spectrum;

/// The structured families supported by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SkewKind {
    /// Jordan blocks with the weights `J_i = (2i−1)^k (2i)^k i^{[2(α−1)γ−1]/2}`.
    JordanWeighted,
    /// `S_{i,i+1} = 1`, `S_{i+1,i} = −1` for every `i`.
    FullBidiagonal,
    /// Jordan blocks with unit weights; squares to `−I`.
    JordanUnit,
    /// The zero matrix, i.e. standard MALA.
    Zero,
}

impl SkewKind {
    /// Canonical config-file name.
    pub fn name(self) -> &'static str {
        match self {
            SkewKind::JordanWeighted => "s1",
            SkewKind::FullBidiagonal => "s2",
            SkewKind::JordanUnit => "s3",
            SkewKind::Zero => "zero",
        }
    }
}

impl fmt::Display for SkewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sparse antisymmetric `n × n` matrix.
pub trait SkewOperator: Send + Sync + fmt::Debug {
    fn kind(&self) -> SkewKind;

    fn dim(&self) -> usize;

    /// `out = S x`.
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    /// Visit every nonzero strictly-upper entry `(i, j, S_ij)`, `i < j`.
    fn for_each_upper(&self, f: &mut dyn FnMut(usize, usize, f64));

    fn entry(&self, i: usize, j: usize) -> f64 {
        let mut value = 0.0;
        let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        if lo == hi {
            return 0.0;
        }
        self.for_each_upper(&mut |a, b, v| {
            if a == lo && b == hi {
                value = sign * v;
            }
        });
        value
    }

    fn is_zero(&self) -> bool {
        false
    }
}

/// `S x`, allocating.
pub fn apply(op: &dyn SkewOperator, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    op.apply_into(x, &mut out);
    out
}

/// `S̃ x = C S x`.
pub fn apply_tilde(op: &dyn SkewOperator, spectrum: &Spectrum, x: &[f64]) -> Vec<f64> {
    let mut out = apply(op, x);
    for (o, c) in out.iter_mut().zip(spectrum.cov()) {
        *o *= c;
    }
    out
}

/// Dense copy, for tests and small diagnostics.
pub fn to_dense(op: &dyn SkewOperator) -> Vec<Vec<f64>> {
    let n = op.dim();
    let mut m = vec![vec![0.0; n]; n];
    op.for_each_upper(&mut |i, j, v| {
        m[i][j] = v;
        m[j][i] = -v;
    });
    m
}

/// Block-diagonal matrix of 2×2 rotations; block `p` couples coordinates
/// `2p` and `2p+1` (0-based) with weight `weights[p]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanBlocks {
    kind: SkewKind,
    weights: Vec<f64>,
}

impl JordanBlocks {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl SkewOperator for JordanBlocks {
    fn kind(&self) -> SkewKind {
        self.kind
    }

    fn dim(&self) -> usize {
        2 * self.weights.len()
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        for ((o, xs), &w) in out
            .chunks_exact_mut(2)
            .zip(x.chunks_exact(2))
            .zip(&self.weights)
        {
            o[0] = w * xs[1];
            o[1] = -w * xs[0];
        }
    }

    fn for_each_upper(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for (p, &w) in self.weights.iter().enumerate() {
            f(2 * p, 2 * p + 1, w);
        }
    }
}

/// `S_{i,i+1} = 1`, `S_{i+1,i} = −1` on the whole first off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Bidiagonal {
    n: usize,
}

impl SkewOperator for Bidiagonal {
    fn kind(&self) -> SkewKind {
        SkewKind::FullBidiagonal
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        let n = self.n;
        if n == 1 {
            out[0] = 0.0;
            return;
        }
        out[0] = x[1];
        for i in 1..n - 1 {
            out[i] = x[i + 1] - x[i - 1];
        }
        out[n - 1] = -x[n - 2];
    }

    fn for_each_upper(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        for i in 0..self.n.saturating_sub(1) {
            f(i, i + 1, 1.0);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSkew {
    n: usize,
}

impl SkewOperator for ZeroSkew {
    fn kind(&self) -> SkewKind {
        SkewKind::Zero
    }

    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn for_each_upper(&self, _f: &mut dyn FnMut(usize, usize, f64)) {}

    fn is_zero(&self) -> bool {
        true
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("operator dimension must be at least 1"));
    }
    Ok(())
}

fn check_even(n: usize, what: &str) -> Result<()> {
    check_dim(n)?;
    if !n.is_multiple_of(2) {
        return Err(Error::validation(format!(
            "{what} needs an even dimension, got {n}"
        )));
    }
    Ok(())
}

/// Weight of Jordan block `pair` (1-based) in the weighted family.
pub fn jordan_weight(pair: usize, k: f64, alpha: f64, gamma: f64) -> f64 {
    let i = pair as f64;
    let exponent = (2.0 * (alpha - 1.0) * gamma - 1.0) / 2.0;
    (2.0 * i - 1.0).powf(k) * (2.0 * i).powf(k) * i.powf(exponent)
}

/// Weighted Jordan family, pair index `1..=n/2`.
pub fn build_s1(n: usize, k: f64, alpha: f64, gamma: f64) -> Result<JordanBlocks> {
    check_even(n, "s1")?;
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::validation(format!(
            "s1 requires alpha > 1, got {alpha}"
        )));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::validation(format!(
            "s1 requires gamma > 0, got {gamma}"
        )));
    }
    if !(k.is_finite() && k > 0.5) {
        return Err(Error::validation(format!("s1 requires k > 1/2, got {k}")));
    }
    let weights = (1..=n / 2)
        .map(|p| jordan_weight(p, k, alpha, gamma))
        .collect();
    Ok(JordanBlocks {
        kind: SkewKind::JordanWeighted,
        weights,
    })
}

pub fn build_s2(n: usize) -> Result<Bidiagonal> {
    check_dim(n)?;
    Ok(Bidiagonal { n })
}

pub fn build_s3(n: usize) -> Result<JordanBlocks> {
    check_even(n, "s3")?;
    Ok(JordanBlocks {
        kind: SkewKind::JordanUnit,
        weights: vec![1.0; n / 2],
    })
}

pub fn build_zero(n: usize) -> Result<ZeroSkew> {
    check_dim(n)?;
    Ok(ZeroSkew { n })
}
