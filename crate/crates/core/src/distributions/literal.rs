//! Distribution literals as they appear in experiment config files, e.g.
//! `{"kind":"normal","mu":0,"sigma":1}` or
//! `{"kind":"quantized","base":{"kind":"normal","mu":0,"sigma":1},"n":10000}`.
//!
//! Parsing is fail-closed: unknown keys are rejected explicitly because
//! serde's internally tagged enums would otherwise ignore them.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::pmf::DiscretePmf;
use super::scalar::ScalarDistribution;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Normal { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Exp { lambda: f64 },
    Neglog,
    Powerlaw { r: f64 },
    Pmf { support: Vec<f64>, probs: Vec<f64> },
    Cantor,
    Quantized { base: Box<DistributionSpec>, n: u64 },
}

impl DistributionSpec {
    /// Parse from JSON, rejecting unknown keys at every nesting level.
    pub fn from_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidParameter("distribution literal must be an object".into()))?;
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidParameter("distribution literal missing \"kind\"".into()))?;
        let allowed: &[&str] = match kind {
            "normal" => &["kind", "mu", "sigma"],
            "uniform" => &["kind", "a", "b"],
            "exp" => &["kind", "lambda"],
            "neglog" => &["kind"],
            "powerlaw" => &["kind", "r"],
            "pmf" => &["kind", "support", "probs"],
            "cantor" => &["kind"],
            "quantized" => &["kind", "base", "n"],
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown distribution kind \"{other}\""
                )))
            }
        };
        for key in obj.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "unknown key \"{key}\" in \"{kind}\" distribution literal"
                )));
            }
        }
        if kind == "quantized" {
            // recurse so the nested literal is validated the same way
            let base = obj
                .get("base")
                .ok_or_else(|| Error::InvalidParameter("quantized literal missing \"base\"".into()))?;
            let base = Self::from_value(base)?;
            let n = obj
                .get("n")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::InvalidParameter("quantized literal needs integer \"n\"".into()))?;
            return Ok(Self::Quantized {
                base: Box::new(base),
                n,
            });
        }
        serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidParameter(format!("distribution literal: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("distribution literal: {e}")))?;
        Self::from_value(&value)
    }

    /// Materialize the law, validating parameters.
    pub fn build(&self) -> Result<ScalarDistribution> {
        match self {
            Self::Normal { mu, sigma } => ScalarDistribution::normal(*mu, *sigma),
            Self::Uniform { a, b } => ScalarDistribution::uniform(*a, *b),
            Self::Exp { lambda } => ScalarDistribution::exponential(*lambda),
            Self::Neglog => Ok(ScalarDistribution::neg_log()),
            Self::Powerlaw { r } => ScalarDistribution::power_law(*r),
            Self::Pmf { support, probs } => Ok(ScalarDistribution::discrete(DiscretePmf::new(
                support.clone(),
                probs.clone(),
            )?)),
            Self::Cantor => Ok(ScalarDistribution::cantor()),
            Self::Quantized { base, n } => base.build()?.quantize(*n),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_literals() {
        let cases = [
            r#"{"kind":"normal","mu":0,"sigma":1}"#,
            r#"{"kind":"uniform","a":0,"b":1}"#,
            r#"{"kind":"exp","lambda":1}"#,
            r#"{"kind":"neglog"}"#,
            r#"{"kind":"powerlaw","r":0.5}"#,
            r#"{"kind":"pmf","support":[0,1],"probs":[0.3,0.7]}"#,
            r#"{"kind":"cantor"}"#,
            r#"{"kind":"quantized","base":{"kind":"uniform","a":0,"b":1},"n":100}"#,
        ];
        for text in cases {
            let spec = DistributionSpec::from_json(text).unwrap();
            spec.build().unwrap();
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(DistributionSpec::from_json(r#"{"kind":"normal","mu":0,"sigma":1,"nu":3}"#).is_err());
        assert!(DistributionSpec::from_json(r#"{"kind":"gauss","mu":0,"sigma":1}"#).is_err());
        // nested literal is validated too
        assert!(DistributionSpec::from_json(
            r#"{"kind":"quantized","base":{"kind":"uniform","a":0,"b":1,"c":2},"n":10}"#
        )
        .is_err());
    }

    #[test]
    fn bad_parameters_fail_at_build() {
        let spec = DistributionSpec::from_json(r#"{"kind":"normal","mu":0,"sigma":-1}"#).unwrap();
        assert!(spec.build().is_err());
    }
}
