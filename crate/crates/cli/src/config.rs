use anyhow::{bail, ensure, Context, Result};
use clap::ValueEnum;
use icewall::{ModelParams64, VertexWeights64, C64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever a change could alter cached numbers.
pub const CACHE_VERSION: u32 = 1;
pub const MAX_GRID_POINTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Enumerate,
    Dp,
    Hankel,
    Wdet,
    Gauss,
    FredholmDisordered,
    FredholmDiscrete,
    FredholmRational,
    All,
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Enumerate => "enumerate",
            Representation::Dp => "dp",
            Representation::Hankel => "hankel",
            Representation::Wdet => "wdet",
            Representation::Gauss => "gauss",
            Representation::FredholmDisordered => "fredholm-disordered",
            Representation::FredholmDiscrete => "fredholm-discrete",
            Representation::FredholmRational => "fredholm-rational",
            Representation::All => "all",
        }
    }

    pub fn takes_weights(self) -> bool {
        matches!(self, Representation::Enumerate | Representation::Dp | Representation::All)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Parses `"re"` or `"re,im"`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().with_context(|| format!("not a number: {t:?}"));
    let z = match parts.as_slice() {
        [re] => C64::new(num(re)?, 0.0),
        [re, im] => C64::new(num(re)?, num(im)?),
        _ => bail!("expected \"re\" or \"re,im\", got {s:?}"),
    };
    ensure!(z.re.is_finite() && z.im.is_finite(), "non-finite value {s:?}");
    Ok(z)
}

pub fn parse_weights(s: &str) -> Result<[f64; 6]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("not a number: {t:?}")))
        .collect::<Result<_>>()?;
    ensure!(v.len() == 6, "--weights needs six values w1,...,w6, got {}", v.len());
    ensure!(v.iter().all(|w| w.is_finite()), "non-finite weight in {s:?}");
    Ok([v[0], v[1], v[2], v[3], v[4], v[5]])
}

/// Model input: either spectral parameters or explicit weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Model {
    Spectral { lambda: [f64; 2], eta: [f64; 2] },
    Weights { weights: [f64; 6] },
}

impl Model {
    pub fn spectral(lambda: C64, eta: C64) -> Self {
        Model::Spectral {
            lambda: [lambda.re, lambda.im],
            eta: [eta.re, eta.im],
        }
    }

    pub fn params(&self) -> Option<ModelParams64> {
        match self {
            Model::Spectral { lambda, eta } => {
                Some(ModelParams64::new(C64::new(lambda[0], lambda[1]), C64::new(eta[0], eta[1])))
            }
            Model::Weights { .. } => None,
        }
    }

    pub fn vertex_weights(&self) -> VertexWeights64 {
        match self {
            Model::Spectral { .. } => VertexWeights64::symmetric(&self.params().unwrap()),
            Model::Weights { weights } => VertexWeights64::from_real(*weights),
        }
    }
}

/// One unit of work. Its canonical JSON form is the cache key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub representation: Representation,
    pub n: usize,
    pub model: Model,
    pub bits: Option<u32>,
    pub tol: f64,
}

impl Job {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.n >= 1, "N must be at least 1");
        ensure!(self.tol > 0.0 && self.tol.is_finite(), "--tol must be positive");
        if let Some(b) = self.bits {
            ensure!(b >= icewall::PrecisionContext::MIN_BITS, "--bits must be at least {}", icewall::PrecisionContext::MIN_BITS);
        }
        if matches!(self.model, Model::Weights { .. }) && !self.representation.takes_weights() {
            bail!("{} needs --lambda/--eta; --weights only applies to enumerate and dp", self.representation.name());
        }
        Ok(())
    }

    pub fn cache_key(&self) -> String {
        let canon = serde_json::to_string(&(CACHE_VERSION, self)).expect("job serializes");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_strings() {
        assert_eq!(parse_complex("0.9").unwrap(), C64::new(0.9, 0.0));
        assert_eq!(parse_complex(" 0,0.3").unwrap(), C64::new(0.0, 0.3));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
        assert!(parse_weights("1,1,1,1,1").is_err());
    }

    #[test]
    fn cache_key_is_stable() {
        let job = Job {
            representation: Representation::Hankel,
            n: 4,
            model: Model::spectral(C64::new(0.9, 0.0), C64::new(0.3, 0.0)),
            bits: None,
            tol: 1e-8,
        };
        assert_eq!(job.cache_key(), job.clone().cache_key());
        let other = Job { n: 5, ..job.clone() };
        assert_ne!(job.cache_key(), other.cache_key());
    }
}
