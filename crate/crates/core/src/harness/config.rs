use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::Coordinates;
use crate::skew::{SkewKind, SkewRegistry};
use crate::theory::LimitRegime;

/// Either standard MALA or an explicit drift exponent `α ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaRepr", into = "AlphaRepr")]
pub enum Alpha {
    Mala,
    Value(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum AlphaRepr {
    Number(f64),
    Text(String),
}

impl TryFrom<AlphaRepr> for Alpha {
    type Error = String;

    fn try_from(raw: AlphaRepr) -> std::result::Result<Self, String> {
        match raw {
            AlphaRepr::Number(v) => Ok(Alpha::Value(v)),
            AlphaRepr::Text(s) if s.trim().eq_ignore_ascii_case("mala") => Ok(Alpha::Mala),
            AlphaRepr::Text(s) => s
                .trim()
                .parse()
                .map(Alpha::Value)
                .map_err(|_| format!("alpha must be a number or \"mala\", got {s:?}")),
        }
    }
}

impl From<Alpha> for AlphaRepr {
    fn from(a: Alpha) -> Self {
        match a {
            Alpha::Mala => AlphaRepr::Text("mala".into()),
            Alpha::Value(v) => AlphaRepr::Number(v),
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Mala => f.write_str("mala"),
            Alpha::Value(v) => write!(f, "{v}"),
        }
    }
}

impl Alpha {
    /// Exponent fed to the kernel; irrelevant under the zero matrix.
    pub fn kernel_value(self) -> f64 {
        match self {
            Alpha::Mala => 2.0,
            Alpha::Value(v) => v,
        }
    }

    pub fn regime(self, gamma: f64) -> LimitRegime {
        match self {
            Alpha::Mala => LimitRegime::mala(gamma),
            Alpha::Value(v) => LimitRegime::new(v, gamma),
        }
    }

    pub(crate) fn validate(self) -> Result<()> {
        match self {
            Alpha::Value(v) if !(v.is_finite() && v >= 1.0) => {
                Err(Error::validation(format!("alpha must be >= 1, got {v}")))
            }
            _ => Ok(()),
        }
    }

    /// Resolves the matrix name, which must be `zero` (or absent) for MALA.
    pub(crate) fn matrix_name(self, matrix: Option<&str>) -> Result<String> {
        match (self, matrix) {
            (Alpha::Mala, None) => Ok(SkewKind::Zero.name().to_string()),
            (Alpha::Mala, Some(m)) if m.trim().eq_ignore_ascii_case("zero") => {
                Ok(SkewKind::Zero.name().to_string())
            }
            (Alpha::Mala, Some(m)) => Err(Error::validation(format!(
                "alpha = \"mala\" requires matrix = \"zero\", got {m:?}"
            ))),
            (Alpha::Value(_), Some(m)) => Ok(m.trim().to_ascii_lowercase()),
            (Alpha::Value(_), None) => Err(Error::validation(
                "matrix is required when alpha is numeric",
            )),
        }
    }
}

/// A single `ℓ` or an evenly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EllSpec {
    Fixed(f64),
    Grid { min: f64, max: f64, points: usize },
}

impl EllSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            EllSpec::Fixed(v) => vec![v],
            EllSpec::Grid { min, max, points } => {
                let step = (max - min) / (points - 1) as f64;
                (0..points).map(|i| min + step * i as f64).collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            EllSpec::Fixed(v) if !(v.is_finite() && v > 0.0) => {
                Err(Error::validation(format!("ell must be positive, got {v}")))
            }
            EllSpec::Grid { min, max, points } => {
                if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
                    return Err(Error::validation(format!(
                        "ell grid needs 0 < min < max, got [{min}, {max}]"
                    )));
                }
                if points < 2 {
                    return Err(Error::validation(format!(
                        "ell grid needs at least 2 points, got {points}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Mark the `ℓ` with the smallest mean CT.
    #[default]
    MinCt,
    /// Mark the single configured `ℓ`.
    FixedEll,
}

pub fn default_k() -> f64 {
    2.0
}

/// One experiment: a target, a matrix family, an `ℓ` grid and a replication plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: f64,
    pub gamma: f64,
    pub alpha: Alpha,
    #[serde(default)]
    pub matrix: Option<String>,
    pub ell: EllSpec,
    pub steps: usize,
    pub replications: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default)]
    pub coordinates: Coordinates,
}

impl ExperimentConfig {
    pub fn validate(&self, registry: &SkewRegistry) -> Result<()> {
        if self.n == 0 {
            return Err(Error::validation("n must be at least 1"));
        }
        if !(self.k.is_finite() && self.k > 0.5) {
            return Err(Error::validation(format!(
                "k must exceed 1/2, got {}",
                self.k
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::validation(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        self.alpha.validate()?;
        registry.get(&self.matrix_name()?)?;
        self.ell.validate()?;
        if self.steps < 100 {
            return Err(Error::validation(format!(
                "steps must be at least 100, got {}",
                self.steps
            )));
        }
        if self.replications == 0 {
            return Err(Error::validation("replications must be at least 1"));
        }
        if self.objective == Objective::FixedEll && !matches!(self.ell, EllSpec::Fixed(_)) {
            return Err(Error::validation(
                "objective = \"fixed_ell\" needs a single ell value",
            ));
        }
        Ok(())
    }

    pub fn matrix_name(&self) -> Result<String> {
        self.alpha.matrix_name(self.matrix.as_deref())
    }
}

/// A batch of experiments written to one CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub experiment: Vec<ExperimentConfig>,
}

/// Reads and parses a TOML file.
pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::ReadConfig {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::ParseConfig {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        n = 10
        gamma = 0.1667
        alpha = "mala"
        ell = { min = 0.5, max = 3.0, points = 26 }
        steps = 10000
        replications = 100
        master_seed = 1
    "#;

    #[test]
    fn parses_minimal_config() {
        let cfg: ExperimentConfig = toml::from_str(BASE).unwrap();
        assert_eq!(cfg.alpha, Alpha::Mala);
        assert_eq!(cfg.k, 2.0);
        assert_eq!(cfg.objective, Objective::MinCt);
        assert_eq!(cfg.coordinates, Coordinates::First);
        assert_eq!(cfg.matrix_name().unwrap(), "zero");
        let ells = cfg.ell.values();
        assert_eq!(ells.len(), 26);
        assert_eq!(ells[0], 0.5);
        assert!((ells[25] - 3.0).abs() < 1e-12);
        cfg.validate(&SkewRegistry::with_builtin()).unwrap();
    }

    #[test]
    fn numeric_alpha_and_fixed_ell() {
        let text = r#"
            n = 10
            gamma = 0.5
            alpha = 4
            matrix = "s1"
            ell = 0.8
            steps = 500
            replications = 2
            objective = "fixed_ell"
            coordinates = "all"
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.alpha, Alpha::Value(4.0));
        assert_eq!(cfg.ell, EllSpec::Fixed(0.8));
        cfg.validate(&SkewRegistry::with_builtin()).unwrap();
    }

    #[test]
    fn validation_failures() {
        let reg = SkewRegistry::with_builtin();
        let base: ExperimentConfig = toml::from_str(BASE).unwrap();
        let mut c = base.clone();
        c.steps = 99;
        assert!(c.validate(&reg).is_err());
        let mut c = base.clone();
        c.replications = 0;
        assert!(c.validate(&reg).is_err());
        let mut c = base.clone();
        c.ell = EllSpec::Grid {
            min: 2.0,
            max: 1.0,
            points: 5,
        };
        assert!(c.validate(&reg).is_err());
        let mut c = base.clone();
        c.ell = EllSpec::Grid {
            min: 0.5,
            max: 1.0,
            points: 1,
        };
        assert!(c.validate(&reg).is_err());
        let mut c = base.clone();
        c.matrix = Some("s1".into());
        assert!(c.validate(&reg).is_err());
        let mut c = base.clone();
        c.alpha = Alpha::Value(3.0);
        c.matrix = Some("s7".into());
        assert!(matches!(c.validate(&reg), Err(Error::UnknownFamily { .. })));
        let mut c = base;
        c.objective = Objective::FixedEll;
        assert!(c.validate(&reg).is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = format!("{BASE}\nbogus = 3\n");
        assert!(toml::from_str::<ExperimentConfig>(&text).is_err());
        assert!(toml::from_str::<ExperimentConfig>("n = 10").is_err());
        let bad_alpha = BASE.replace("\"mala\"", "\"fast\"");
        assert!(toml::from_str::<ExperimentConfig>(&bad_alpha).is_err());
    }

    #[test]
    fn load_errors_are_usage_errors() {
        let err = load_toml::<ExperimentConfig>(Path::new("/definitely/missing.toml")).unwrap_err();
        assert!(matches!(err, Error::ReadConfig { .. }));
        assert!(err.is_usage());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "n = [").unwrap();
        let err = load_toml::<ExperimentConfig>(&path).unwrap_err();
        assert!(matches!(err, Error::ParseConfig { .. }));
    }
}
