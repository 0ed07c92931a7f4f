//! Finite discrete laws.

use crate::error::{Error, Result};

/// A finite pmf over strictly ascending real support points.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePmf {
    support: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl DiscretePmf {
    /// Masses must be positive and sum to 1 within 1e-9; support strictly
    /// ascending.
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.len() != probs.len() || support.is_empty() {
            return Err(Error::InvalidParameter(
                "support and probs must be non-empty and of equal length".into(),
            ));
        }
        for w in support.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "support not strictly ascending at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite support value".into()));
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut total = 0.0f64;
        for &p in &probs {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidParameter(format!("non-positive mass {p}")));
            }
            total += p;
            cum.push(total);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            support,
            probs,
            cum,
        })
    }

    /// Two-point law on {0, 1} with success mass `p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("bernoulli p={p}")));
        }
        Self::new(vec![0.0, 1.0], vec![1.0 - p, p])
    }

    pub fn point_mass(v: f64) -> Self {
        Self {
            support: vec![v],
            probs: vec![1.0],
            cum: vec![1.0],
        }
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_mass(&self) -> f64 {
        self.probs.iter().cloned().fold(0.0, f64::max)
    }

    pub fn min_mass(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().cloned().zip(self.probs.iter().cloned())
    }

    /// Right-continuous CDF (mass at `x` included).
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.support.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cum[idx - 1]
        }
    }

    /// `min{y : F(y) >= t}`, exact on the atom list.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::Domain(format!("quantile level {t} not in (0,1]")));
        }
        let idx = self.cum.partition_point(|&c| c < t);
        Ok(self.support[idx.min(self.support.len() - 1)])
    }

    /// Merge a list of (value, mass) pairs into a pmf, summing masses at
    /// equal values and dropping non-positive ones.
    pub fn from_weighted_values(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.retain(|&(_, m)| m > 0.0);
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("no positive masses".into()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        for (v, m) in pairs {
            if let Some(&last) = support.last() {
                if last == v {
                    *probs.last_mut().unwrap() += m;
                    continue;
                }
            }
            support.push(v);
            probs.push(m);
        }
        Self::new(support, probs)
    }
}
