//! Seed-aware simulators: the simulator is allowed to read the seed law.
//!
//! For a continuous seed the inverse transform is exact. For an atomic
//! seed, mapping each atom to the target quantile at the midpoint of its
//! cumulative interval achieves KS error of exactly half the largest atom,
//! which is optimal. Discrete-to-discrete targets get a greedy assignment
//! by descending sequence probability that beats the midpoint rate.

use crate::distributions::{DiscretePmf, ScalarDistribution};
use crate::error::{Error, Result};
use crate::metrics;
use crate::typeclass::MarkovChainSpec;

/// Enumeration cap for explicit table constructions.
pub const TABLE_CAP: u64 = 10_000_000;

/// A seed atom: a real value or a symbol sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedAtom {
    Value(f64),
    Sequence(Vec<u8>),
}

impl SeedAtom {
    fn csv_field(&self) -> String {
        match self {
            SeedAtom::Value(v) => format!("{v:.16e}"),
            SeedAtom::Sequence(s) => {
                if s.iter().all(|&d| d < 10) {
                    s.iter().map(|&d| char::from(b'0' + d)).collect()
                } else {
                    s.iter()
                        .map(|d| d.to_string())
                        .collect::<Vec<_>>()
                        .join("-")
                }
            }
        }
    }

    fn sort_key_cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self, other) {
            (SeedAtom::Value(a), SeedAtom::Value(b)) => a.total_cmp(b),
            (SeedAtom::Sequence(a), SeedAtom::Sequence(b)) => a.cmp(b),
            (SeedAtom::Value(_), SeedAtom::Sequence(_)) => std::cmp::Ordering::Less,
            (SeedAtom::Sequence(_), SeedAtom::Value(_)) => std::cmp::Ordering::Greater,
        }
    }
}

/// An explicit finite simulator: seed atoms with their masses and the
/// target values they map to.
#[derive(Clone, Debug)]
pub struct MappingTable {
    entries: Vec<(SeedAtom, f64, f64)>,
}

impl MappingTable {
    /// Entries must carry nonnegative masses summing to 1 (within 1e-9).
    pub fn from_entries(entries: Vec<(SeedAtom, f64, f64)>) -> Result<Self> {
        let total: f64 = entries.iter().map(|e| e.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "table masses sum to {total}"
            )));
        }
        if entries.iter().any(|e| e.1 < 0.0 || !e.2.is_finite()) {
            return Err(Error::InvalidParameter(
                "negative mass or non-finite target value".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(SeedAtom, f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    /// Output law: masses merged over equal target values.
    pub fn output_law(&self) -> DiscretePmf {
        DiscretePmf::from_weighted_values(
            self.entries.iter().map(|e| (e.2, e.1)).collect(),
        )
        .expect("table invariant: masses sum to one")
    }

    /// CDF of the output law, `sum{mass : target_value <= y}`.
    pub fn output_cdf(&self, y: f64) -> f64 {
        self.output_law().cdf(y)
    }

    /// Exact KS of the output law against a target.
    pub fn achieved_ks(&self, target: &ScalarDistribution) -> f64 {
        let out = ScalarDistribution::discrete(self.output_law());
        metrics::ks_distance(&out, target).value
    }

    /// Compose with a non-decreasing map of the target axis. Monotonicity
    /// is checked on the table's own target values plus a grid between
    /// them.
    pub fn transfer(&self, g: &dyn Fn(f64) -> f64) -> Result<MappingTable> {
        let mut values: Vec<f64> = self.entries.iter().map(|e| e.2).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        if values.len() > 1 {
            let lo = values[0];
            let hi = *values.last().unwrap();
            for k in 0..=1000 {
                values.push(lo + (hi - lo) * k as f64 / 1000.0);
            }
            values.sort_by(f64::total_cmp);
        }
        let mut prev = f64::NEG_INFINITY;
        for &v in &values {
            let gv = g(v);
            if gv < prev - 1e-12 {
                return Err(Error::Precondition(format!(
                    "transfer map decreases near {v}"
                )));
            }
            prev = prev.max(gv);
        }
        let entries = self
            .entries
            .iter()
            .map(|(a, p, y)| (a.clone(), *p, g(*y)))
            .collect();
        MappingTable::from_entries(entries)
    }

    /// CSV with columns `seed_atom,probability,target_value`, sorted by
    /// seed atom, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<&(SeedAtom, f64, f64)> = self.entries.iter().collect();
        rows.sort_by(|a, b| a.0.sort_key_cmp(&b.0));
        let mut out = String::from("seed_atom,probability,target_value\n");
        for (atom, p, y) in rows {
            out.push_str(&format!("{},{p:.16e},{y:.16e}\n", atom.csv_field()));
        }
        out
    }
}

/// An atomic seed law in a fixed deterministic order (ascending values or
/// lexicographic sequences), ready for midpoint construction.
#[derive(Clone, Debug)]
pub struct FiniteSeedLaw {
    atoms: Vec<(SeedAtom, f64)>,
}

impl FiniteSeedLaw {
    pub fn from_pmf(pmf: &DiscretePmf) -> Self {
        Self {
            atoms: pmf.atoms().map(|(v, m)| (SeedAtom::Value(v), m)).collect(),
        }
    }

    /// Must be a purely discrete law.
    pub fn from_distribution(dist: &ScalarDistribution) -> Result<Self> {
        match dist {
            ScalarDistribution::Discrete(pmf) => Ok(Self::from_pmf(pmf)),
            _ => Err(Error::Precondition(
                "finite seed law requires a purely discrete distribution".into(),
            )),
        }
    }

    /// The i.i.d. product law over length-`n` sequences of pmf symbols,
    /// in lexicographic order.
    pub fn iid_product(pmf: &DiscretePmf, n: usize) -> Result<Self> {
        let m = pmf.len() as u64;
        let mut total: u64 = 1;
        for _ in 0..n {
            total = total.saturating_mul(m);
            if total > TABLE_CAP {
                return Err(Error::SizeCap(format!(
                    "{m}^{n} sequences exceed the {TABLE_CAP} cap"
                )));
            }
        }
        let probs = pmf.probs();
        let mut atoms = Vec::with_capacity(total as usize);
        let mut seq = vec![0u8; n];
        'outer: loop {
            let p: f64 = seq.iter().map(|&s| probs[s as usize]).product();
            atoms.push((SeedAtom::Sequence(seq.clone()), p));
            let mut i = n;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                if (seq[i] as u64) + 1 < m {
                    seq[i] += 1;
                    for s in seq[i + 1..].iter_mut() {
                        *s = 0;
                    }
                    break;
                }
            }
        }
        Ok(Self { atoms })
    }

    /// Length-`n` Markov path law, lexicographic.
    pub fn markov_paths(spec: &MarkovChainSpec, n: usize) -> Result<Self> {
        let paths = spec.path_law(n)?;
        Ok(Self {
            atoms: paths
                .into_iter()
                .map(|(seq, p)| (SeedAtom::Sequence(seq), p))
                .collect(),
        })
    }

    pub fn max_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Inverse transform simulator `x -> G^{-1}(F(x))` for a continuous seed;
/// the pushforward equals the target up to inversion tolerance.
pub struct InverseTransform {
    seed: ScalarDistribution,
    target: ScalarDistribution,
}

pub fn inverse_transform_map(
    seed: &ScalarDistribution,
    target: &ScalarDistribution,
) -> Result<InverseTransform> {
    if !seed.is_continuous() {
        return Err(Error::Precondition(
            "inverse transform needs a continuous seed; use atom_midpoint_map".into(),
        ));
    }
    Ok(InverseTransform {
        seed: seed.clone(),
        target: target.clone(),
    })
}

impl InverseTransform {
    pub fn eval(&self, x: f64) -> f64 {
        let t = self.seed.cdf(x).clamp(1e-300, 1.0);
        self.target
            .quantile(t)
            .expect("clamped level is always in (0,1]")
    }

    /// CDF of the pushforward law, via the monotonicity of the composed
    /// map: `P(eval(X) <= y) = F(sup{x : eval(x) <= y})`.
    pub fn pushforward_cdf(&self, y: f64) -> f64 {
        let (lo_hint, hi_hint) = self.seed.support_hint();
        let pad = 0.5 * (hi_hint - lo_hint) + 1.0;
        let mut lo = lo_hint - pad;
        let mut hi = hi_hint + pad;
        if self.eval(lo) > y {
            return 0.0;
        }
        if self.eval(hi) <= y {
            return 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.seed.cdf(lo)
    }
}

/// Atom-midpoint construction: atom `i` with mass `p_i` and cumulative
/// prefix `c_{i-1}` maps to `G^{-1}(c_{i-1} + p_i/2)`. Achieved KS against
/// a continuous target is exactly `max_i p_i / 2`.
pub fn atom_midpoint_map(
    seed: &FiniteSeedLaw,
    target: &ScalarDistribution,
) -> Result<MappingTable> {
    if seed.is_empty() {
        return Err(Error::Precondition("seed law has no atoms".into()));
    }
    if !target.is_continuous() {
        return Err(Error::Precondition(
            "atom-midpoint construction needs a continuous target".into(),
        ));
    }
    let mut entries = Vec::with_capacity(seed.len());
    let mut cum = 0.0f64;
    for (atom, mass) in &seed.atoms {
        // half-jump level from the running masses, never read off a CDF
        let level = (cum + 0.5 * mass).clamp(f64::MIN_POSITIVE, 1.0);
        let y = target.quantile(level)?;
        entries.push((atom.clone(), *mass, y));
        cum += mass;
    }
    MappingTable::from_entries(entries)
}

/// Greedy discrete-to-discrete assignment over `X^n`, by descending
/// sequence probability (lexicographic tie-break), each sequence going to
/// the currently most-deficient target symbol (value tie-break toward the
/// smallest). The final `|Y|+1` sequences fill the residual deficiencies
/// by the midpoint rule.
pub fn greedy_discrete_map(
    seed: &DiscretePmf,
    target: &DiscretePmf,
    n: usize,
) -> Result<MappingTable> {
    let law = FiniteSeedLaw::iid_product(seed, n)?;
    let total = law.len();
    let tail = target.len() + 1;
    if total < tail {
        return Err(Error::Precondition(format!(
            "need at least |Y|+1 = {tail} sequences, got {total}"
        )));
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| {
        law.atoms[j]
            .1
            .total_cmp(&law.atoms[i].1)
            .then_with(|| law.atoms[i].0.sort_key_cmp(&law.atoms[j].0))
    });

    let y_values = target.support();
    let mut deficiency: Vec<f64> = target.probs().to_vec();
    let mut entries: Vec<(SeedAtom, f64, f64)> = Vec::with_capacity(total);

    for &idx in &order[..total - tail] {
        let (atom, mass) = &law.atoms[idx];
        let mut best = 0usize;
        for j in 1..deficiency.len() {
            if deficiency[j] > deficiency[best] {
                best = j; // strict: ties stay with the smaller value
            }
        }
        deficiency[best] -= mass;
        entries.push((atom.clone(), *mass, y_values[best]));
    }

    // residual midpoint rule over the clamped deficiencies
    let residual: Vec<f64> = deficiency.iter().map(|&d| d.max(0.0)).collect();
    let res_total: f64 = residual.iter().sum();
    let tail_mass: f64 = order[total - tail..]
        .iter()
        .map(|&idx| law.atoms[idx].1)
        .sum();
    let mut cum = 0.0f64;
    for &idx in &order[total - tail..] {
        let (atom, mass) = &law.atoms[idx];
        let mid = (cum + 0.5 * mass) / tail_mass.max(f64::MIN_POSITIVE);
        let level = mid * res_total;
        // smallest target value whose residual cumulative reaches the level
        let mut acc = 0.0f64;
        let mut chosen = residual.len() - 1;
        for (j, &r) in residual.iter().enumerate() {
            acc += r;
            if acc >= level - 1e-15 {
                chosen = j;
                break;
            }
        }
        entries.push((atom.clone(), *mass, y_values[chosen]));
        cum += mass;
    }
    MappingTable::from_entries(entries)
}

/// Conditional quantile in the chain rule order: argument is the level,
/// slice holds the already-generated coordinates.
pub type ConditionalQuantile = Box<dyn Fn(f64, &[f64]) -> f64>;

/// Vector-target simulator from one continuous seed coordinate: the seed
/// is pushed to a uniform level, whose binary digits are dealt round-robin
/// to `d` coordinate levels, each fed through its conditional quantile.
pub struct VectorSimulator {
    seed: ScalarDistribution,
    quantiles: Vec<ConditionalQuantile>,
    digits_per_coord: u32,
}

pub fn digit_interleave_vector(
    seed: &ScalarDistribution,
    quantiles: Vec<ConditionalQuantile>,
) -> Result<VectorSimulator> {
    let d = quantiles.len();
    if d == 0 || d > 16 {
        return Err(Error::InvalidParameter(format!(
            "dimension {d} outside 1..=16 (52 mantissa digits split evenly)"
        )));
    }
    if !seed.is_continuous() {
        return Err(Error::Precondition(
            "digit interleaving needs a continuous seed".into(),
        ));
    }
    Ok(VectorSimulator {
        seed: seed.clone(),
        quantiles,
        digits_per_coord: 52 / d as u32,
    })
}

impl VectorSimulator {
    pub fn dimension(&self) -> usize {
        self.quantiles.len()
    }

    pub fn digits_per_coord(&self) -> u32 {
        self.digits_per_coord
    }

    /// Split the binary digits of a uniform level round-robin into
    /// per-coordinate levels.
    pub fn coordinate_levels(&self, u: f64) -> Vec<f64> {
        let d = self.quantiles.len();
        let mut levels = vec![0.0f64; d];
        let mut scale = vec![0.5f64; d];
        let mut v = u.clamp(0.0, 1.0 - f64::EPSILON);
        for k in 0..(self.digits_per_coord as usize * d) {
            v *= 2.0;
            let digit = v.floor();
            v -= digit;
            let coord = k % d;
            if digit >= 1.0 {
                levels[coord] += scale[coord];
            }
            scale[coord] *= 0.5;
        }
        levels
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let u = self.seed.cdf(x);
        let levels = self.coordinate_levels(u);
        let mut out = Vec::with_capacity(levels.len());
        for (q, &lv) in self.quantiles.iter().zip(&levels) {
            // half-grid shift keeps levels strictly inside (0,1)
            let lv = lv + 0.5 * 0.5f64.powi(self.digits_per_coord as i32);
            out.push(q(lv, &out));
        }
        out
    }
}
