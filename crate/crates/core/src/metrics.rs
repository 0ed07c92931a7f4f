//! Kolmogorov–Smirnov distance, total-variation distance, and Rényi
//! divergence between scalar laws, plus the TV–Rényi sandwich bounds.
//!
//! KS is exact for pairs involving a purely discrete law (the supremum of a
//! step-vs-monotone difference is attained at atoms, from one side or the
//! other); continuous pairs use a dense grid with local refinement.

use crate::distributions::{ClassTag, ScalarDistribution};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// How a distance value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ExactDiscrete,
    SupGrid,
    Quadrature,
}

/// A computed distance together with its computation route.
#[derive(Clone, Copy, Debug)]
pub struct DistancePair {
    pub value: f64,
    pub method: Method,
    pub grid_resolution: usize,
}

const KS_GRID: usize = 100_000;

/// `sup_x |F(x) - G(x)|`.
pub fn ks_distance(p: &ScalarDistribution, q: &ScalarDistribution) -> DistancePair {
    let p_disc = p.class_tag() == ClassTag::Discrete;
    let q_disc = q.class_tag() == ClassTag::Discrete;
    if p_disc && q_disc {
        return DistancePair {
            value: ks_discrete_discrete(p, q),
            method: Method::ExactDiscrete,
            grid_resolution: 0,
        };
    }
    if p_disc && q.is_continuous() {
        return DistancePair {
            value: ks_step_vs_continuous(p, q),
            method: Method::ExactDiscrete,
            grid_resolution: 0,
        };
    }
    if q_disc && p.is_continuous() {
        return DistancePair {
            value: ks_step_vs_continuous(q, p),
            method: Method::ExactDiscrete,
            grid_resolution: 0,
        };
    }
    DistancePair {
        value: ks_generic(p, q),
        method: Method::SupGrid,
        grid_resolution: KS_GRID,
    }
}

/// Exact KS between two purely discrete laws: walk the merged supports.
fn ks_discrete_discrete(p: &ScalarDistribution, q: &ScalarDistribution) -> f64 {
    let pa = p.atoms();
    let qa = q.atoms();
    let mut points: Vec<f64> = pa.iter().map(|a| a.0).chain(qa.iter().map(|a| a.0)).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut sup = 0.0f64;
    let (mut cp, mut cq) = (0.0f64, 0.0f64);
    let (mut i, mut j) = (0usize, 0usize);
    for &v in &points {
        // just below v
        sup = sup.max((cp - cq).abs());
        while i < pa.len() && pa[i].0 == v {
            cp += pa[i].1;
            i += 1;
        }
        while j < qa.len() && qa[j].0 == v {
            cq += qa[j].1;
            j += 1;
        }
        // at v (right-continuous)
        sup = sup.max((cp - cq).abs());
    }
    sup
}

/// Exact KS between a purely discrete law and a continuous one. Between
/// consecutive atoms the step CDF is flat and the continuous CDF is
/// monotone, so the supremum is attained at an atom from one side.
fn ks_step_vs_continuous(step: &ScalarDistribution, cont: &ScalarDistribution) -> f64 {
    let atoms = step.atoms();
    let mut sup = 0.0f64;
    let mut cum = 0.0f64;
    for &(v, m) in &atoms {
        let g = cont.cdf(v);
        sup = sup.max((cum - g).abs()); // just below the atom
        cum += m;
        sup = sup.max((cum - g).abs()); // at the atom
    }
    sup
}

/// Grid + refinement for pairs with a continuous component (incl. mixtures).
fn ks_generic(p: &ScalarDistribution, q: &ScalarDistribution) -> f64 {
    let (plo, phi) = p.support_hint();
    let (qlo, qhi) = q.support_hint();
    let lo = plo.min(qlo);
    let hi = phi.max(qhi);
    let diff = |x: f64| (p.cdf(x) - q.cdf(x)).abs();
    let mut sup = 0.0f64;
    let mut best_x = lo;
    let step = (hi - lo) / KS_GRID as f64;
    for k in 0..=KS_GRID {
        let x = lo + step * k as f64;
        let d = diff(x);
        if d > sup {
            sup = d;
            best_x = x;
        }
    }
    // atoms of either side, both one-sided limits
    for (v, m) in p.atoms().into_iter().chain(q.atoms()) {
        let _ = m;
        for x in [v, v - 1e-12 * (1.0 + v.abs())] {
            let d = diff(x);
            if d > sup {
                sup = d;
                best_x = x;
            }
        }
    }
    // golden-section polish around the best grid point
    let (mut a, mut b) = (best_x - step, best_x + step);
    let phi_ratio = 0.618_033_988_749_894_9;
    let mut x1 = b - phi_ratio * (b - a);
    let mut x2 = a + phi_ratio * (b - a);
    let (mut f1, mut f2) = (diff(x1), diff(x2));
    for _ in 0..200 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi_ratio * (b - a);
            f2 = diff(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi_ratio * (b - a);
            f1 = diff(x1);
        }
        if b - a < 1e-12 * (1.0 + a.abs()) {
            break;
        }
    }
    sup.max(f1).max(f2)
}

/// `sup_A |P(A) - Q(A)|`, i.e. half the L1 distance between pmfs or
/// densities. Defined here for pure discrete-discrete and AC-AC pairs;
/// anything else is refused (use `ks_distance` for those).
pub fn tv_distance(p: &ScalarDistribution, q: &ScalarDistribution) -> Result<DistancePair> {
    match (p.class_tag(), q.class_tag()) {
        (ClassTag::Discrete, ClassTag::Discrete) => {
            let mut l1 = 0.0f64;
            for (pv, qv) in merged_masses(p, q) {
                l1 += (pv - qv).abs();
            }
            Ok(DistancePair {
                value: 0.5 * l1,
                method: Method::ExactDiscrete,
                grid_resolution: 0,
            })
        }
        (ClassTag::AbsolutelyContinuous, ClassTag::AbsolutelyContinuous) => {
            let (plo, phi) = p.support_hint();
            let (qlo, qhi) = q.support_hint();
            let lo = plo.min(qlo);
            let hi = phi.max(qhi);
            let v = adaptive_simpson(
                |x| (p.density(x).unwrap_or(0.0) - q.density(x).unwrap_or(0.0)).abs(),
                lo,
                hi,
                1e-8,
            )?;
            Ok(DistancePair {
                value: 0.5 * v,
                method: Method::Quadrature,
                grid_resolution: 0,
            })
        }
        (a, b) => Err(Error::UnsupportedPair(format!(
            "tv_distance needs both laws discrete or both absolutely continuous, got {a:?}/{b:?}"
        ))),
    }
}

/// Merged (p_mass, q_mass) pairs over the union of two discrete supports.
fn merged_masses(p: &ScalarDistribution, q: &ScalarDistribution) -> Vec<(f64, f64)> {
    let pa = p.atoms();
    let qa = q.atoms();
    let mut out = Vec::with_capacity(pa.len() + qa.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < pa.len() || j < qa.len() {
        if j >= qa.len() || (i < pa.len() && pa[i].0 < qa[j].0) {
            out.push((pa[i].1, 0.0));
            i += 1;
        } else if i >= pa.len() || qa[j].0 < pa[i].0 {
            out.push((0.0, qa[j].1));
            j += 1;
        } else {
            out.push((pa[i].1, qa[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rényi divergence `D_α(P ‖ Q)` with the continuous extensions at
/// α ∈ {0, 1, ∞}. Absolute-continuity failure yields +∞ rather than an
/// error; mutually singular pairs (e.g. discrete vs absolutely continuous)
/// are +∞ for every α > 0.
pub fn renyi_divergence(p: &ScalarDistribution, q: &ScalarDistribution, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "Rényi order must be nonnegative");
    match (p.class_tag(), q.class_tag()) {
        (ClassTag::Discrete, ClassTag::Discrete) => {
            renyi_from_masses(&merged_masses(p, q), alpha)
        }
        (ClassTag::AbsolutelyContinuous, ClassTag::AbsolutelyContinuous) => {
            renyi_densities(p, q, alpha)
        }
        _ => {
            if alpha == 0.0 {
                0.0 // D_0 compares supports only; not meaningful here
            } else {
                f64::INFINITY
            }
        }
    }
}

fn renyi_from_masses(pairs: &[(f64, f64)], alpha: f64) -> f64 {
    if alpha == 1.0 {
        let mut kl = 0.0f64;
        for &(pv, qv) in pairs {
            if pv > 0.0 {
                if qv == 0.0 {
                    return f64::INFINITY;
                }
                kl += pv * (pv / qv).ln();
            }
        }
        return kl.max(0.0);
    }
    if alpha.is_infinite() {
        let mut worst = 0.0f64;
        for &(pv, qv) in pairs {
            if pv > 0.0 {
                if qv == 0.0 {
                    return f64::INFINITY;
                }
                worst = worst.max(pv / qv);
            }
        }
        return worst.ln().max(0.0);
    }
    if alpha == 0.0 {
        let mass: f64 = pairs.iter().filter(|&&(pv, _)| pv > 0.0).map(|&(_, qv)| qv).sum();
        return if mass > 0.0 { -mass.ln() } else { f64::INFINITY };
    }
    let mut sum = 0.0f64;
    for &(pv, qv) in pairs {
        if pv > 0.0 {
            if qv == 0.0 {
                if alpha > 1.0 {
                    return f64::INFINITY;
                }
                continue;
            }
            sum += pv.powf(alpha) * qv.powf(1.0 - alpha);
        }
    }
    if sum <= 0.0 {
        return f64::INFINITY;
    }
    (sum.ln() / (alpha - 1.0)).max(0.0)
}

fn renyi_densities(p: &ScalarDistribution, q: &ScalarDistribution, alpha: f64) -> f64 {
    let (plo, phi) = p.support_hint();
    let (qlo, qhi) = q.support_hint();
    let lo = plo.min(qlo);
    let hi = phi.max(qhi);
    let pd = |x: f64| p.density(x).unwrap_or(0.0);
    let qd = |x: f64| q.density(x).unwrap_or(0.0);
    if alpha == 1.0 {
        let v = adaptive_simpson(
            |x| {
                let (a, b) = (pd(x), qd(x));
                if a > 0.0 && b > 0.0 {
                    a * (a / b).ln()
                } else if a > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            },
            lo,
            hi,
            1e-8,
        );
        return v.map(|x| x.max(0.0)).unwrap_or(f64::INFINITY);
    }
    if alpha.is_infinite() {
        let mut worst = 0.0f64;
        for k in 0..=200_000 {
            let x = lo + (hi - lo) * k as f64 / 200_000.0;
            let (a, b) = (pd(x), qd(x));
            if a > 0.0 {
                if b == 0.0 {
                    return f64::INFINITY;
                }
                worst = worst.max(a / b);
            }
        }
        return worst.ln().max(0.0);
    }
    if alpha == 0.0 {
        let v = adaptive_simpson(|x| if pd(x) > 0.0 { qd(x) } else { 0.0 }, lo, hi, 1e-8);
        return v
            .map(|m| if m > 0.0 { -m.ln() } else { f64::INFINITY })
            .unwrap_or(f64::INFINITY)
            .max(0.0);
    }
    let v = adaptive_simpson(
        |x| {
            let (a, b) = (pd(x), qd(x));
            if a > 0.0 && b > 0.0 {
                a.powf(alpha) * b.powf(1.0 - alpha)
            } else if a > 0.0 && alpha > 1.0 {
                f64::INFINITY
            } else {
                0.0
            }
        },
        lo,
        hi,
        1e-8,
    );
    match v {
        Ok(sum) if sum > 0.0 => (sum.ln() / (alpha - 1.0)).max(0.0),
        _ => f64::INFINITY,
    }
}

/// The TV–Rényi sandwich for α ∈ (0, 1):
/// `log(1 + t)/(α-1) ≤ D_α ≤ log(1 - t)/(α-1)` with `t = |P-Q|_TV`
/// (sup-over-sets convention). Returns `(lower, D_α, upper)`.
pub fn renyi_tv_sandwich(
    p: &ScalarDistribution,
    q: &ScalarDistribution,
    alpha: f64,
) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("sandwich needs alpha in (0,1), got {alpha}")));
    }
    let tv = tv_distance(p, q)?.value;
    let value = renyi_divergence(p, q, alpha);
    let lower = (1.0 + tv).ln() / (alpha - 1.0);
    let upper = if tv < 1.0 {
        (1.0 - tv).ln() / (alpha - 1.0)
    } else {
        f64::INFINITY
    };
    Ok((lower, value, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DiscretePmf;

    fn pmf(support: &[f64], probs: &[f64]) -> ScalarDistribution {
        ScalarDistribution::discrete(DiscretePmf::new(support.to_vec(), probs.to_vec()).unwrap())
    }

    #[test]
    fn ks_landmarks() {
        let u = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        assert!(ks_distance(&u, &u).value < 1e-12);
        let point = pmf(&[0.0], &[1.0]);
        assert!((ks_distance(&point, &u).value - 1.0).abs() < 1e-12);
        let bern = pmf(&[0.0, 1.0], &[0.5, 0.5]);
        assert!((ks_distance(&bern, &point).value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ks_shifted_uniforms() {
        let a = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        let b = ScalarDistribution::uniform(0.5, 1.5).unwrap();
        assert!((ks_distance(&a, &b).value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn tv_landmarks() {
        let p = pmf(&[0.0, 1.0], &[0.5, 0.5]);
        let q = pmf(&[0.0, 1.0], &[1.0 - 1e-12, 1e-12]);
        assert!((tv_distance(&p, &q).unwrap().value - 0.5).abs() < 1e-9);
        let n = ScalarDistribution::normal(0.0, 1.0).unwrap();
        assert!(tv_distance(&n, &n).unwrap().value < 1e-8);
        let a = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        let b = ScalarDistribution::uniform(0.5, 1.5).unwrap();
        assert!((tv_distance(&a, &b).unwrap().value - 0.5).abs() < 1e-7);
    }

    #[test]
    fn tv_refuses_mixed_pairs() {
        let bern = pmf(&[0.0, 1.0], &[0.5, 0.5]);
        let u = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        assert!(matches!(
            tv_distance(&bern, &u),
            Err(Error::UnsupportedPair(_))
        ));
    }

    #[test]
    fn renyi_landmarks() {
        let p = pmf(&[0.0, 1.0], &[0.5, 0.5]);
        let q = pmf(&[0.0, 1.0], &[0.25, 0.75]);
        for alpha in [0.5, 1.0, 2.0, f64::INFINITY] {
            assert!(renyi_divergence(&p, &p, alpha).abs() < 1e-12);
        }
        // D_inf = log max ratio = log(0.5/0.25)
        assert!((renyi_divergence(&p, &q, f64::INFINITY) - 2.0f64.ln()).abs() < 1e-12);
        // direct-sum oracle for the relative entropy
        let expect = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert!((renyi_divergence(&p, &q, 1.0) - expect).abs() < 1e-12);
    }

    #[test]
    fn renyi_infinite_when_not_absolutely_continuous() {
        let p = pmf(&[0.0, 1.0], &[0.5, 0.5]);
        let q = pmf(&[0.0], &[1.0]);
        assert_eq!(renyi_divergence(&p, &q, 2.0), f64::INFINITY);
        assert_eq!(renyi_divergence(&p, &q, 1.0), f64::INFINITY);
        let u = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(renyi_divergence(&p, &u, 0.5), f64::INFINITY);
    }

    #[test]
    fn sandwich_examples() {
        let p = pmf(&[0.0, 1.0], &[0.5, 0.5]);
        let (lo, v, hi) = renyi_tv_sandwich(&p, &p, 0.5).unwrap();
        assert!(lo.abs() < 1e-12 && v.abs() < 1e-12 && hi.abs() < 1e-12);

        let q = pmf(&[0.0, 1.0], &[0.25, 0.75]);
        let (lo, v, hi) = renyi_tv_sandwich(&p, &q, 0.5).unwrap();
        assert!(lo <= v && v <= hi, "{lo} {v} {hi}");

        // extreme pair: TV = 0.5, upper bound -2 log(1 - 0.5)
        let point = pmf(&[0.0, 1.0], &[1.0 - 1e-15, 1e-15]);
        let (lo, v, hi) = renyi_tv_sandwich(&point, &p, 0.5).unwrap();
        assert!((hi - (-2.0 * 0.5f64.ln())).abs() < 1e-9);
        assert!(lo <= v && v <= hi, "{lo} {v} {hi}");
    }
}
