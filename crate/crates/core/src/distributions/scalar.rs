//! The `ScalarDistribution` catalogue: the laws the experiments use,
//! spanning discrete, absolutely continuous, and singular classes.

use super::cantor::{cantor_cdf, cantor_quantile};
use super::pmf::DiscretePmf;
use crate::error::{Error, Result};
use crate::special::{normal_cdf, normal_pdf};

/// Lebesgue-decomposition class of a law.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassTag {
    Discrete,
    AbsolutelyContinuous,
    SingularContinuous,
    Mixture,
}

/// A one-dimensional law with CDF/quantile evaluation and, where they
/// exist, a density and an atom list.
#[derive(Clone, Debug)]
pub enum ScalarDistribution {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64 },
    Exponential { lambda: f64 },
    /// Density `-ln x` on (0, 1].
    NegLog,
    /// Density `(1-r) x^{-r}` on (0, 1], 0 < r < 1.
    PowerLaw { r: f64 },
    Discrete(DiscretePmf),
    Cantor,
    /// Convex combination of a discrete part and a continuous part.
    Mixture {
        discrete_weight: f64,
        discrete: DiscretePmf,
        continuous: Box<ScalarDistribution>,
    },
}

impl ScalarDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("uniform [{a}, {b}]")));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("normal({mu}, {sigma})")));
        }
        Ok(Self::Normal { mu, sigma })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("exp({lambda})")));
        }
        Ok(Self::Exponential { lambda })
    }

    pub fn neg_log() -> Self {
        Self::NegLog
    }

    pub fn power_law(r: f64) -> Result<Self> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidParameter(format!("power law r={r}")));
        }
        Ok(Self::PowerLaw { r })
    }

    pub fn discrete(pmf: DiscretePmf) -> Self {
        Self::Discrete(pmf)
    }

    pub fn cantor() -> Self {
        Self::Cantor
    }

    pub fn mixture(
        discrete_weight: f64,
        discrete: DiscretePmf,
        continuous: ScalarDistribution,
    ) -> Result<Self> {
        if !(discrete_weight > 0.0 && discrete_weight < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "mixture weight {discrete_weight}"
            )));
        }
        if continuous.class_tag() == ClassTag::Discrete
            || continuous.class_tag() == ClassTag::Mixture
        {
            return Err(Error::InvalidParameter(
                "mixture continuous part must be a continuous law".into(),
            ));
        }
        Ok(Self::Mixture {
            discrete_weight,
            discrete,
            continuous: Box::new(continuous),
        })
    }

    pub fn class_tag(&self) -> ClassTag {
        match self {
            Self::Discrete(_) => ClassTag::Discrete,
            Self::Cantor => ClassTag::SingularContinuous,
            Self::Mixture { .. } => ClassTag::Mixture,
            _ => ClassTag::AbsolutelyContinuous,
        }
    }

    /// True when the law has no atoms.
    pub fn is_continuous(&self) -> bool {
        !matches!(self, Self::Discrete(_) | Self::Mixture { .. })
    }

    /// Atoms as (value, mass) pairs; empty for continuous laws.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Discrete(pmf) => pmf.atoms().collect(),
            Self::Mixture {
                discrete_weight,
                discrete,
                ..
            } => discrete
                .atoms()
                .map(|(v, m)| (v, m * discrete_weight))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Interval outside which the law carries at most ~1e-9 of mass;
    /// used to set up grids and quadrature.
    pub fn support_hint(&self) -> (f64, f64) {
        match self {
            Self::Uniform { a, b } => (*a, *b),
            Self::Normal { mu, sigma } => (mu - 9.0 * sigma, mu + 9.0 * sigma),
            Self::Exponential { lambda } => (0.0, 42.0 / lambda),
            Self::NegLog | Self::PowerLaw { .. } | Self::Cantor => (0.0, 1.0),
            Self::Discrete(pmf) => (pmf.support()[0], *pmf.support().last().unwrap()),
            Self::Mixture {
                discrete,
                continuous,
                ..
            } => {
                let (lo, hi) = continuous.support_hint();
                (
                    lo.min(discrete.support()[0]),
                    hi.max(*discrete.support().last().unwrap()),
                )
            }
        }
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Self::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::Normal { mu, sigma } => normal_cdf((x - mu) / sigma),
            Self::Exponential { lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-lambda * x).exp_m1()
                }
            }
            Self::NegLog => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    x - x * x.ln()
                }
            }
            Self::PowerLaw { r } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    x.powf(1.0 - r)
                }
            }
            Self::Discrete(pmf) => pmf.cdf(x),
            Self::Cantor => cantor_cdf(x),
            Self::Mixture {
                discrete_weight,
                discrete,
                continuous,
            } => discrete_weight * discrete.cdf(x) + (1.0 - discrete_weight) * continuous.cdf(x),
        }
    }

    /// Generalized inverse CDF `min{y : F(y) >= t}` for `t` in (0, 1].
    ///
    /// Closed forms where available, otherwise monotone bisection on the
    /// widened support hint; the returned point always satisfies
    /// `cdf(q) >= t` up to the bisection bracket invariant.
    pub fn quantile(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t <= 1.0) || t.is_nan() {
            return Err(Error::Domain(format!("quantile level {t} not in (0,1]")));
        }
        Ok(match self {
            Self::Uniform { a, b } => {
                if t == 1.0 {
                    *b
                } else {
                    a + (b - a) * t
                }
            }
            Self::Normal { .. } => {
                if t == 1.0 {
                    f64::INFINITY
                } else {
                    self.bisect_quantile(t)
                }
            }
            Self::Exponential { lambda } => {
                if t == 1.0 {
                    f64::INFINITY
                } else {
                    -(-t).ln_1p() / lambda
                }
            }
            Self::NegLog => {
                if t == 1.0 {
                    1.0
                } else {
                    self.bisect_quantile(t)
                }
            }
            Self::PowerLaw { r } => {
                if t == 1.0 {
                    1.0
                } else {
                    t.powf(1.0 / (1.0 - r))
                }
            }
            Self::Discrete(pmf) => pmf.quantile(t)?,
            Self::Cantor => cantor_quantile(t),
            Self::Mixture { .. } => self.bisect_quantile(t),
        })
    }

    fn bisect_quantile(&self, t: f64) -> f64 {
        let (hint_lo, hint_hi) = self.support_hint();
        let pad = 0.5 * (hint_hi - hint_lo);
        let mut lo = hint_lo - pad;
        let mut hi = hint_hi + pad;
        // widen until the bracket is valid (paranoia for extreme t)
        for _ in 0..64 {
            if self.cdf(hi) >= t {
                break;
            }
            hi += pad;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) >= t {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo < 1e-13 * (1.0 + hi.abs()) {
                break;
            }
        }
        hi
    }

    /// Density of the absolutely continuous part, if the law has one.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            // half-open supports keep cell-boundary sums from double
            // counting endpoint values
            Self::Uniform { a, b } => Some(if x > *a && x <= *b {
                1.0 / (b - a)
            } else {
                0.0
            }),
            Self::Normal { mu, sigma } => Some(normal_pdf((x - mu) / sigma) / sigma),
            Self::Exponential { lambda } => Some(if x > 0.0 {
                lambda * (-lambda * x).exp()
            } else {
                0.0
            }),
            Self::NegLog => Some(if x > 0.0 && x <= 1.0 { -x.ln() } else { 0.0 }),
            Self::PowerLaw { r } => Some(if x > 0.0 && x <= 1.0 {
                (1.0 - r) * x.powf(-r)
            } else {
                0.0
            }),
            Self::Discrete(_) | Self::Cantor => None,
            Self::Mixture {
                discrete_weight,
                continuous,
                ..
            } => continuous
                .density(x)
                .map(|d| (1.0 - discrete_weight) * d),
        }
    }

    /// Analytic derivative of the density on the interior of its support.
    pub fn density_derivative(&self, x: f64) -> Option<f64> {
        match self {
            Self::Uniform { .. } => Some(0.0),
            Self::Normal { mu, sigma } => {
                let z = (x - mu) / sigma;
                Some(-z * normal_pdf(z) / (sigma * sigma))
            }
            Self::Exponential { lambda } => Some(if x >= 0.0 {
                -lambda * lambda * (-lambda * x).exp()
            } else {
                0.0
            }),
            Self::NegLog => Some(if x > 0.0 && x <= 1.0 { -1.0 / x } else { 0.0 }),
            Self::PowerLaw { r } => Some(if x > 0.0 && x <= 1.0 {
                -r * (1.0 - r) * x.powf(-r - 1.0)
            } else {
                0.0
            }),
            _ => None,
        }
    }

    /// Boundary jumps of the density as (location, magnitude) pairs.
    /// They enter the total-variation slope alongside the interior |p'|.
    pub fn density_boundary_jumps(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Uniform { a, b } => {
                let h = 1.0 / (b - a);
                vec![(*a, h), (*b, h)]
            }
            Self::Exponential { lambda } => vec![(0.0, *lambda)],
            // density at 1 is (1-r) > 0, then drops to zero
            Self::PowerLaw { r } => vec![(1.0, 1.0 - r)],
            // -ln x vanishes at 1 and diverges (no jump) at 0
            _ => Vec::new(),
        }
    }

    /// Law of `floor(n X)/n`: atoms at `i/n` with mass `F((i+1)/n) - F(i/n)`,
    /// truncated below 1e-15 and renormalized.
    pub fn quantize(&self, n: u64) -> Result<ScalarDistribution> {
        if n == 0 {
            return Err(Error::InvalidParameter("quantization step n=0".into()));
        }
        if self.class_tag() != ClassTag::AbsolutelyContinuous {
            return Err(Error::Precondition(
                "quantize requires an absolutely continuous law with bounded density".into(),
            ));
        }
        let (lo, hi) = self.support_hint();
        let i_lo = (lo * n as f64).floor() as i64 - 1;
        let i_hi = (hi * n as f64).ceil() as i64 + 1;
        let count = (i_hi - i_lo + 1) as u64;
        if count > 10_000_000 {
            return Err(Error::SizeCap(format!(
                "quantize would enumerate {count} atoms"
            )));
        }
        let mut pairs = Vec::new();
        let mut total = 0.0f64;
        for i in i_lo..=i_hi {
            let a = i as f64 / n as f64;
            let b = (i + 1) as f64 / n as f64;
            let mass = self.cdf(b) - self.cdf(a);
            if mass >= 1e-15 {
                pairs.push((a, mass));
                total += mass;
            }
        }
        for p in &mut pairs {
            p.1 /= total;
        }
        Ok(ScalarDistribution::Discrete(
            DiscretePmf::from_weighted_values(pairs)?,
        ))
    }

    /// Short stable label for CSV output.
    pub fn label(&self) -> String {
        match self {
            Self::Uniform { a, b } => format!("uniform[{a},{b}]"),
            Self::Normal { mu, sigma } => format!("normal({mu},{sigma})"),
            Self::Exponential { lambda } => format!("exp({lambda})"),
            Self::NegLog => "neglog".into(),
            Self::PowerLaw { r } => format!("powerlaw(r={r})"),
            Self::Discrete(pmf) => format!("pmf[{}]", pmf.len()),
            Self::Cantor => "cantor".into(),
            Self::Mixture {
                discrete_weight, ..
            } => format!("mixture(w={discrete_weight})"),
        }
    }
}
