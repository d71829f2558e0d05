use std::collections::BTreeMap;
use std::sync::Arc;

use super::{
    build_s1, build_s2, build_s3, build_zero, c_constants_analytic, CConstants, SkewKind,
    SkewOperator,
};
use crate::error::{Error, Result};

/// Everything a family may need to construct its `n × n` member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewParams {
    pub n: usize,
    /// Spectral decay exponent of the target (`λ_i = i^{-k}`).
    pub k: f64,
    pub alpha: f64,
    pub gamma: f64,
}

/// A named family of antisymmetric matrices, one member per dimension.
pub trait SkewFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> SkewKind;

    fn build(&self, params: &SkewParams) -> Result<Box<dyn SkewOperator>>;

    /// Limits `(c₁, c₂, c₃)` of the normalized drift moments as `n → ∞`.
    fn analytic_constants(&self, alpha: f64, gamma: f64) -> Result<CConstants> {
        c_constants_analytic(self.kind(), alpha, gamma)
    }
}

pub struct WeightedJordanFamily;
pub struct BidiagonalFamily;
pub struct UnitJordanFamily;
pub struct ZeroFamily;

impl SkewFamily for WeightedJordanFamily {
    fn name(&self) -> &'static str {
        "s1"
    }
    fn kind(&self) -> SkewKind {
        SkewKind::JordanWeighted
    }
    fn build(&self, p: &SkewParams) -> Result<Box<dyn SkewOperator>> {
        Ok(Box::new(build_s1(p.n, p.k, p.alpha, p.gamma)?))
    }
}

impl SkewFamily for BidiagonalFamily {
    fn name(&self) -> &'static str {
        "s2"
    }
    fn kind(&self) -> SkewKind {
        SkewKind::FullBidiagonal
    }
    fn build(&self, p: &SkewParams) -> Result<Box<dyn SkewOperator>> {
        Ok(Box::new(build_s2(p.n)?))
    }
}

impl SkewFamily for UnitJordanFamily {
    fn name(&self) -> &'static str {
        "s3"
    }
    fn kind(&self) -> SkewKind {
        SkewKind::JordanUnit
    }
    fn build(&self, p: &SkewParams) -> Result<Box<dyn SkewOperator>> {
        Ok(Box::new(build_s3(p.n)?))
    }
}

impl SkewFamily for ZeroFamily {
    fn name(&self) -> &'static str {
        "zero"
    }
    fn kind(&self) -> SkewKind {
        SkewKind::Zero
    }
    fn build(&self, p: &SkewParams) -> Result<Box<dyn SkewOperator>> {
        Ok(Box::new(build_zero(p.n)?))
    }
}

/// Name → family lookup used by configs and the CLI.
#[derive(Clone, Default)]
pub struct SkewRegistry {
    families: BTreeMap<&'static str, Arc<dyn SkewFamily>>,
}

impl SkewRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry preloaded with `s1`, `s2`, `s3` and `zero`.
    pub fn with_builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(WeightedJordanFamily);
        reg.register(BidiagonalFamily);
        reg.register(UnitJordanFamily);
        reg.register(ZeroFamily);
        reg
    }

    /// Adds a family, replacing any previous one with the same name.
    pub fn register<F: SkewFamily + 'static>(&mut self, family: F) {
        self.families.insert(family.name(), Arc::new(family));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SkewFamily>> {
        let key = name.trim().to_ascii_lowercase();
        self.families
            .get(key.as_str())
            .cloned()
            .ok_or_else(|| Error::UnknownFamily {
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn build(&self, name: &str, params: &SkewParams) -> Result<Box<dyn SkewOperator>> {
        self.get(name)?.build(params)
    }
}
