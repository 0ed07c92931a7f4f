//! Seed-blind simulators for sequence seeds, built on type classes.
//!
//! Any i.i.d. (or fixed-order Markov) law is uniform on the set of
//! sequences sharing an empirical type, so ranking each class and mapping
//! rank `j` of a class of size `s` to the target quantile at `(j - 1/2)/s`
//! yields a simulator that never reads the seed law. Error bounds follow
//! from the class-count polynomial `(n+1)^{|X|}` (or `(n+1)^{|X|^{k+1}}`
//! for Markov types) times the largest sequence probability.

use std::collections::BTreeMap;

use num_bigint::BigUint;

use crate::distributions::{DiscretePmf, ScalarDistribution};
use crate::error::{Error, Result};
use crate::nonuniversal::{MappingTable, SeedAtom};

/// Enumeration cap for `|X|^n` sequence sweeps.
pub const SEQUENCE_CAP: u64 = 1_000_000;

/// Enumeration cap for the number of i.i.d. types.
pub const TYPE_CAP: u64 = 1_000_000;

/// An empirical type: the count statistics a seed law cannot see past.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeKind {
    /// Symbol counts over the alphabet.
    Iid,
    /// Transition-string counts over `X^{k+1}`, with a fixed initial state.
    Markov { order: usize, initial: Vec<u8> },
}

#[derive(Clone, Debug)]
pub struct TypeDescriptor {
    pub kind: TypeKind,
    pub n: usize,
    /// Dense count vector: per symbol (iid) or per string in `X^{k+1}`
    /// (markov, strings indexed base-|X|).
    pub counts: Vec<u64>,
    pub class_size: BigUint,
}

impl TypeDescriptor {
    /// Log-probability of one sequence of this type under the given
    /// i.i.d. single-letter law.
    pub fn log_sequence_prob(&self, probs: &[f64]) -> f64 {
        assert!(matches!(self.kind, TypeKind::Iid));
        self.counts
            .iter()
            .zip(probs)
            .map(|(&c, &p)| if c == 0 { 0.0 } else { c as f64 * p.ln() })
            .sum()
    }

    /// Log-probability of the whole class: `log |T| + log P(x^n)`.
    pub fn log_class_prob(&self, probs: &[f64]) -> f64 {
        big_ln(&self.class_size) + self.log_sequence_prob(probs)
    }

    /// Log-probability of one sequence of a Markov type under a
    /// transition law of the same shape.
    pub fn markov_log_sequence_prob(&self, spec: &MarkovChainSpec) -> f64 {
        assert!(matches!(self.kind, TypeKind::Markov { .. }));
        let states = spec.states;
        self.counts
            .iter()
            .enumerate()
            .map(|(gram, &c)| {
                if c == 0 {
                    return 0.0;
                }
                let context = gram / states;
                let symbol = gram % states;
                let p = spec.transitions[context][symbol];
                if p == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    c as f64 * p.ln()
                }
            })
            .sum()
    }

    pub fn markov_log_class_prob(&self, spec: &MarkovChainSpec) -> f64 {
        big_ln(&self.class_size) + self.markov_log_sequence_prob(spec)
    }
}

fn big_ln(v: &BigUint) -> f64 {
    // exact for anything that fits in f64; otherwise scale by powers of 2
    let bits = v.bits();
    if bits <= 52 {
        let small: f64 = v.to_string().parse().unwrap();
        return small.ln();
    }
    let shift = bits - 52;
    let head: BigUint = v >> shift;
    let head: f64 = head.to_string().parse().unwrap();
    head.ln() + shift as f64 * std::f64::consts::LN_2
}

fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::from(1u64);
    for k in 2..=n {
        acc *= k;
    }
    acc
}

fn multinomial(n: u64, counts: &[u64]) -> BigUint {
    let mut acc = factorial(n);
    for &c in counts {
        acc /= factorial(c);
    }
    acc
}

/// Number of i.i.d. types: C(n + m - 1, m - 1), saturating at u64::MAX.
fn composition_count(n: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    for k in 1..m {
        acc = acc.saturating_mul((n + k) as u128) / k as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// All i.i.d. types of length-`n` sequences over an alphabet of the given
/// size, with exact class sizes.
pub fn iid_types(n: usize, alphabet_size: usize) -> Result<Vec<TypeDescriptor>> {
    if alphabet_size == 0 || n == 0 {
        return Err(Error::InvalidParameter("empty alphabet or n=0".into()));
    }
    let total = composition_count(n as u64, alphabet_size as u64);
    if total > TYPE_CAP {
        return Err(Error::SizeCap(format!(
            "{total} type vectors exceed the {TYPE_CAP} cap"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut counts = vec![0u64; alphabet_size];
    fill_compositions(n as u64, 0, &mut counts, &mut out);
    Ok(out
        .into_iter()
        .map(|counts| {
            let class_size = multinomial(n as u64, &counts);
            TypeDescriptor {
                kind: TypeKind::Iid,
                n,
                counts,
                class_size,
            }
        })
        .collect())
}

fn fill_compositions(rest: u64, idx: usize, counts: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    if idx + 1 == counts.len() {
        counts[idx] = rest;
        out.push(counts.clone());
        return;
    }
    for c in 0..=rest {
        counts[idx] = c;
        fill_compositions(rest - c, idx + 1, counts, out);
    }
    counts[idx] = 0;
}

/// A seed-blind sequence-to-target mapping: per type class, sequences in
/// lexicographic order get the midpoint quantiles of the class.
#[derive(Clone, Debug)]
pub struct UniversalTable {
    pub n: usize,
    pub alphabet_size: usize,
    entries: Vec<(Vec<u8>, f64)>,
}

impl UniversalTable {
    pub fn entries(&self) -> &[(Vec<u8>, f64)] {
        &self.entries
    }

    /// Canonical CSV of the mapping itself (no seed enters this).
    pub fn canonical_csv(&self) -> String {
        let mut out = String::from("sequence,target_value\n");
        for (seq, y) in &self.entries {
            let digits: String = seq.iter().map(|s| char::from(b'0' + s)).collect();
            out.push_str(&format!("{digits},{y:.16e}\n"));
        }
        out
    }

    /// Attach i.i.d. seed probabilities, producing a finite mapping table.
    pub fn weighted_iid(&self, probs: &[f64]) -> Result<MappingTable> {
        if probs.len() != self.alphabet_size {
            return Err(Error::InvalidParameter(format!(
                "pmf over {} symbols does not match alphabet {}",
                probs.len(),
                self.alphabet_size
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|(seq, y)| {
                let p: f64 = seq.iter().map(|&s| probs[s as usize]).product();
                (SeedAtom::Sequence(seq.clone()), p, *y)
            })
            .collect();
        MappingTable::from_entries(entries)
    }

    /// Attach Markov path probabilities.
    pub fn weighted_markov(&self, spec: &MarkovChainSpec) -> Result<MappingTable> {
        if spec.states != self.alphabet_size {
            return Err(Error::InvalidParameter(
                "state space does not match table alphabet".into(),
            ));
        }
        let entries = self
            .entries
            .iter()
            .map(|(seq, y)| {
                let p = spec.path_prob(seq);
                (SeedAtom::Sequence(seq.clone()), p, *y)
            })
            .collect();
        MappingTable::from_entries(entries)
    }

    /// Exact KS of the pushforward of an i.i.d. seed against a target.
    pub fn achieved_ks_iid(&self, probs: &[f64], target: &ScalarDistribution) -> Result<f64> {
        Ok(self.weighted_iid(probs)?.achieved_ks(target))
    }
}

fn check_sequence_cap(alphabet_size: usize, n: usize) -> Result<u64> {
    let mut total: u64 = 1;
    for _ in 0..n {
        total = total.saturating_mul(alphabet_size as u64);
        if total > SEQUENCE_CAP {
            return Err(Error::SizeCap(format!(
                "{alphabet_size}^{n} sequences exceed the {SEQUENCE_CAP} cap"
            )));
        }
    }
    Ok(total)
}

fn for_each_sequence(alphabet_size: usize, n: usize, mut f: impl FnMut(&[u8])) {
    let mut seq = vec![0u8; n];
    loop {
        f(&seq);
        // lexicographic increment
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if (seq[i] as usize) + 1 < alphabet_size {
                seq[i] += 1;
                for s in seq[i + 1..].iter_mut() {
                    *s = 0;
                }
                break;
            }
        }
    }
}

/// The i.i.d. type-class simulator. The construction sees only `(n,
/// alphabet, target)`; every seed pmf over the alphabet gets the same
/// table.
pub fn typeclass_simulator(
    n: usize,
    alphabet_size: usize,
    target: &ScalarDistribution,
) -> Result<UniversalTable> {
    if !target.is_continuous() {
        return Err(Error::Precondition(
            "type-class simulator needs a continuous target".into(),
        ));
    }
    if n == 0 || alphabet_size == 0 {
        return Err(Error::InvalidParameter("bad (n, alphabet) shape".into()));
    }
    if alphabet_size > 255 {
        return Err(Error::SizeCap(format!(
            "alphabet of {alphabet_size} symbols exceeds the byte representation"
        )));
    }
    let total = check_sequence_cap(alphabet_size, n)?;
    // pass 1: class sizes
    let mut sizes: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for_each_sequence(alphabet_size, n, |seq| {
        let mut counts = vec![0u64; alphabet_size];
        for &s in seq {
            counts[s as usize] += 1;
        }
        *sizes.entry(counts).or_insert(0) += 1;
    });
    // pass 2: midpoint quantile per within-class lexicographic rank
    let mut ranks: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut entries = Vec::with_capacity(total as usize);
    let mut err = None;
    for_each_sequence(alphabet_size, n, |seq| {
        if err.is_some() {
            return;
        }
        let mut counts = vec![0u64; alphabet_size];
        for &s in seq {
            counts[s as usize] += 1;
        }
        let size = sizes[&counts];
        let rank = ranks.entry(counts).or_insert(0);
        *rank += 1;
        let t = (*rank as f64 - 0.5) / size as f64;
        match target.quantile(t) {
            Ok(y) => entries.push((seq.to_vec(), y)),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(UniversalTable {
        n,
        alphabet_size,
        entries,
    })
}

/// The class-count error bound for the i.i.d. simulator:
/// `1/2 (n+1)^{|X|} (max_x P(x))^n`.
pub fn universal_error_bound(pmf: &DiscretePmf, n: usize) -> f64 {
    let m = pmf.len() as f64;
    let max_p = pmf.max_mass();
    0.5 * ((n as f64) * max_p.ln() + m * ((n + 1) as f64).ln()).exp()
}

/// Collapse a pmf over the integers to `2k+1` buckets:
/// `(-inf, -k], {-k+1}, ..., {k-1}, [k, inf)`, represented by the points
/// `-k ..= k`.
pub fn truncate_countable(pmf: &dyn Fn(i64) -> f64, k: i64) -> Result<DiscretePmf> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let tail = |from: i64, step: i64| -> f64 {
        let mut total = 0.0;
        let mut j = from;
        for _ in 0..1_000_000 {
            let m = pmf(j);
            total += m;
            // geometric-style cutoff once the remaining mass is negligible
            if m < 1e-18 && (j - from).abs() > 64 {
                break;
            }
            j += step;
        }
        total
    };
    let mut pairs = Vec::new();
    pairs.push((-k as f64, tail(-k, -1)));
    for j in (-k + 1)..k {
        pairs.push((j as f64, pmf(j)));
    }
    pairs.push((k as f64, tail(k, 1)));
    DiscretePmf::from_weighted_values(pairs)
}

/// Bucket a CDF into `2k+2` width-Δ cells plus two tails, representing
/// bucket `i` by its right edge. Interior masses are `F((i+1)Δ) - F(iΔ)`.
pub fn interval_quantize(dist: &ScalarDistribution, delta: f64, k: i64) -> Result<DiscretePmf> {
    if !(delta > 0.0) || k < 1 {
        return Err(Error::InvalidParameter(format!("delta={delta}, k={k}")));
    }
    if 2 * k + 2 > 20_000_000 {
        return Err(Error::SizeCap(format!("{k} buckets", k = 2 * k + 2)));
    }
    let mut pairs = Vec::with_capacity(2 * k as usize + 2);
    pairs.push((-k as f64 * delta, dist.cdf(-k as f64 * delta)));
    for i in -k..k {
        let mass = dist.cdf((i + 1) as f64 * delta) - dist.cdf(i as f64 * delta);
        pairs.push(((i + 1) as f64 * delta, mass));
    }
    pairs.push(((k + 1) as f64 * delta, 1.0 - dist.cdf(k as f64 * delta)));
    DiscretePmf::from_weighted_values(pairs)
}

/// A finite-state Markov chain of fixed order with a pinned initial state.
#[derive(Clone, Debug)]
pub struct MarkovChainSpec {
    pub states: usize,
    pub order: usize,
    /// Initial context, oldest symbol first; length = order.
    pub initial: Vec<u8>,
    /// Row-stochastic table: one row per context in `X^order`
    /// (base-|X| encoded, most recent symbol last), one column per symbol.
    pub transitions: Vec<Vec<f64>>,
}

impl MarkovChainSpec {
    pub fn new(
        states: usize,
        order: usize,
        initial: Vec<u8>,
        transitions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if !(1..=255).contains(&states) || order < 1 {
            return Err(Error::InvalidParameter("bad state count or order".into()));
        }
        if initial.len() != order || initial.iter().any(|&s| s as usize >= states) {
            return Err(Error::InvalidParameter(
                "initial state length must equal order, symbols in range".into(),
            ));
        }
        let contexts = states.pow(order as u32);
        if transitions.len() != contexts {
            return Err(Error::InvalidParameter(format!(
                "expected {contexts} transition rows, got {}",
                transitions.len()
            )));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != states {
                return Err(Error::InvalidParameter(format!("row {i} has wrong arity")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 || row.iter().any(|&p| p < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "row {i} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self {
            states,
            order,
            initial,
            transitions,
        })
    }

    fn context_index(&self, ctx: &[u8]) -> usize {
        ctx.iter()
            .fold(0usize, |acc, &s| acc * self.states + s as usize)
    }

    pub fn path_log_prob(&self, path: &[u8]) -> f64 {
        let mut ctx = self.initial.clone();
        let mut lp = 0.0;
        for &s in path {
            let p = self.transitions[self.context_index(&ctx)][s as usize];
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            lp += p.ln();
            ctx.rotate_left(1);
            *ctx.last_mut().unwrap() = s;
        }
        lp
    }

    pub fn path_prob(&self, path: &[u8]) -> f64 {
        self.path_log_prob(path).exp()
    }

    /// Largest path probability over `X^n`, by max-product dynamic
    /// programming in the log domain.
    pub fn max_path_log_prob(&self, n: usize) -> f64 {
        let contexts = self.states.pow(self.order as u32);
        let mut v = vec![f64::NEG_INFINITY; contexts];
        v[self.context_index(&self.initial)] = 0.0;
        let mut next = vec![f64::NEG_INFINITY; contexts];
        for _ in 0..n {
            next.iter_mut().for_each(|x| *x = f64::NEG_INFINITY);
            for ctx in 0..contexts {
                if v[ctx] == f64::NEG_INFINITY {
                    continue;
                }
                for s in 0..self.states {
                    let p = self.transitions[ctx][s];
                    if p > 0.0 {
                        let nctx = (ctx * self.states) % contexts + s;
                        let cand = v[ctx] + p.ln();
                        if cand > next[nctx] {
                            next[nctx] = cand;
                        }
                    }
                }
            }
            std::mem::swap(&mut v, &mut next);
        }
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Finite-horizon min-entropy estimate `-(1/n) max log P(x^n)`.
    pub fn min_entropy_dp(&self, n: usize) -> f64 {
        -self.max_path_log_prob(n) / n as f64
    }

    /// Min-entropy rate by the loop formula, for ergodic order-1 chains:
    /// the minimum over simple cycles of the average log-inverse
    /// transition probability.
    pub fn min_entropy_loop(&self) -> Result<f64> {
        if self.order != 1 {
            return Err(Error::Precondition(
                "loop formula applies to order-1 chains".into(),
            ));
        }
        if self.states > 12 {
            return Err(Error::SizeCap(
                "loop enumeration capped at 12 states".into(),
            ));
        }
        if !self.is_irreducible() {
            return Err(Error::Precondition(
                "loop formula needs an irreducible chain".into(),
            ));
        }
        let mut best = f64::INFINITY;
        // simple cycles, deduplicated by anchoring each at its minimum state
        let mut stack: Vec<usize> = Vec::new();
        for start in 0..self.states {
            stack.clear();
            stack.push(start);
            self.cycle_dfs(start, start, &mut stack, &mut vec![false; self.states], &mut best);
        }
        Ok(best)
    }

    fn cycle_dfs(
        &self,
        start: usize,
        current: usize,
        stack: &mut Vec<usize>,
        visited: &mut Vec<bool>,
        best: &mut f64,
    ) {
        visited[current] = true;
        for next in 0..self.states {
            let p = self.transitions[current][next];
            if p <= 0.0 {
                continue;
            }
            if next == start {
                let mut cost = 0.0;
                for w in 0..stack.len() {
                    let a = stack[w];
                    let b = stack[(w + 1) % stack.len()];
                    cost += -self.transitions[a][b].ln();
                }
                let avg = cost / stack.len() as f64;
                if avg < *best {
                    *best = avg;
                }
            } else if next > start && !visited[next] {
                stack.push(next);
                self.cycle_dfs(start, next, stack, visited, best);
                stack.pop();
            }
        }
        visited[current] = false;
    }

    fn is_irreducible(&self) -> bool {
        let reach = |from: usize, transpose: bool| -> Vec<bool> {
            let mut seen = vec![false; self.states];
            let mut queue = vec![from];
            seen[from] = true;
            while let Some(v) = queue.pop() {
                for w in 0..self.states {
                    let p = if transpose {
                        self.transitions[w][v]
                    } else {
                        self.transitions[v][w]
                    };
                    if p > 0.0 && !seen[w] {
                        seen[w] = true;
                        queue.push(w);
                    }
                }
            }
            seen
        };
        reach(0, false).iter().all(|&b| b) && reach(0, true).iter().all(|&b| b)
    }

    /// Min-entropy rate: loop formula for ergodic order-1 chains, finite-
    /// horizon DP estimate (n = 2000) otherwise.
    pub fn min_entropy_rate(&self) -> Result<f64> {
        if self.order == 1 && self.states <= 12 && self.is_irreducible() {
            self.min_entropy_loop()
        } else {
            Ok(self.min_entropy_dp(2000))
        }
    }

    /// Enumerate all length-`n` paths with positive probability structure,
    /// lexicographically, with probabilities.
    pub fn path_law(&self, n: usize) -> Result<Vec<(Vec<u8>, f64)>> {
        check_sequence_cap(self.states, n)?;
        let mut out = Vec::new();
        for_each_sequence(self.states, n, |seq| {
            out.push((seq.to_vec(), self.path_prob(seq)));
        });
        Ok(out)
    }
}

/// The order-`k` Markov type of a sequence: occurrence counts of every
/// `(k+1)`-string in the initial-state-prefixed sequence.
pub fn markov_type(seq: &[u8], states: usize, order: usize, initial: &[u8]) -> TypeDescriptor {
    assert_eq!(initial.len(), order);
    let mut prefixed = initial.to_vec();
    prefixed.extend_from_slice(seq);
    let strings = states.pow(order as u32 + 1);
    let mut counts = vec![0u64; strings];
    for i in 0..seq.len() {
        let gram = &prefixed[i..i + order + 1];
        let idx = gram
            .iter()
            .fold(0usize, |acc, &s| acc * states + s as usize);
        counts[idx] += 1;
    }
    TypeDescriptor {
        kind: TypeKind::Markov {
            order,
            initial: initial.to_vec(),
        },
        n: seq.len(),
        counts,
        class_size: BigUint::from(1u64), // filled by enumeration when needed
    }
}

/// All order-`k` Markov types of length-`n` sequences, with class sizes
/// counted by enumeration.
pub fn markov_types(
    n: usize,
    states: usize,
    order: usize,
    initial: &[u8],
) -> Result<Vec<TypeDescriptor>> {
    if initial.len() != order || initial.iter().any(|&s| s as usize >= states) {
        return Err(Error::InvalidParameter("bad initial state".into()));
    }
    check_sequence_cap(states, n)?;
    let mut sizes: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for_each_sequence(states, n, |seq| {
        let t = markov_type(seq, states, order, initial);
        *sizes.entry(t.counts).or_insert(0) += 1;
    });
    Ok(sizes
        .into_iter()
        .map(|(counts, size)| TypeDescriptor {
            kind: TypeKind::Markov {
                order,
                initial: initial.to_vec(),
            },
            n,
            counts,
            class_size: BigUint::from(size),
        })
        .collect())
}

/// CSV dump of an i.i.d. type list: `counts,class_size,log_class_prob`,
/// counts dash-separated, log probability under the given seed pmf.
pub fn type_dump_csv(types: &[TypeDescriptor], probs: &[f64]) -> String {
    let mut out = String::from("counts,class_size,log_class_prob\n");
    for t in types {
        let counts: Vec<String> = t.counts.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(
            "{},{},{:.16e}\n",
            counts.join("-"),
            t.class_size,
            t.log_class_prob(probs)
        ));
    }
    out
}

/// Markov analogue of `type_dump_csv`, probabilities from a transition law.
pub fn markov_type_dump_csv(types: &[TypeDescriptor], spec: &MarkovChainSpec) -> String {
    let mut out = String::from("counts,class_size,log_class_prob\n");
    for t in types {
        let counts: Vec<String> = t.counts.iter().map(|c| c.to_string()).collect();
        out.push_str(&format!(
            "{},{},{:.16e}\n",
            counts.join("-"),
            t.class_size,
            t.markov_log_class_prob(spec)
        ));
    }
    out
}

/// Markov type-class simulator: same rank-to-midpoint construction, with
/// classes given by transition-count tables. Depends only on the chain
/// shape `(|X|, k, initial state)` and the target, never the transition law.
pub fn markov_typeclass_simulator(
    n: usize,
    states: usize,
    order: usize,
    initial: &[u8],
    target: &ScalarDistribution,
) -> Result<UniversalTable> {
    if !target.is_continuous() {
        return Err(Error::Precondition(
            "type-class simulator needs a continuous target".into(),
        ));
    }
    if initial.len() != order || initial.iter().any(|&s| s as usize >= states) {
        return Err(Error::InvalidParameter("bad initial state".into()));
    }
    let total = check_sequence_cap(states, n)?;
    let mut sizes: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for_each_sequence(states, n, |seq| {
        let t = markov_type(seq, states, order, initial);
        *sizes.entry(t.counts).or_insert(0) += 1;
    });
    let mut ranks: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut entries = Vec::with_capacity(total as usize);
    let mut err = None;
    for_each_sequence(states, n, |seq| {
        if err.is_some() {
            return;
        }
        let t = markov_type(seq, states, order, initial);
        let size = sizes[&t.counts];
        let rank = ranks.entry(t.counts).or_insert(0);
        *rank += 1;
        let level = (*rank as f64 - 0.5) / size as f64;
        match target.quantile(level) {
            Ok(y) => entries.push((seq.to_vec(), y)),
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(UniversalTable {
        n,
        alphabet_size: states,
        entries,
    })
}

/// Markov analogue of the class-count error bound:
/// `1/2 (n+1)^{|X|^{k+1}} max_{x^n} P(x^n)`.
pub fn markov_error_bound(spec: &MarkovChainSpec, n: usize) -> f64 {
    let strings = (spec.states as f64).powi(spec.order as i32 + 1);
    0.5 * (spec.max_path_log_prob(n) + strings * ((n + 1) as f64).ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_types_small_cases() {
        let t2 = iid_types(2, 2).unwrap();
        assert_eq!(t2.len(), 3);
        let mut sizes: Vec<u64> = t2
            .iter()
            .map(|t| t.class_size.to_string().parse().unwrap())
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);

        let t4 = iid_types(4, 2).unwrap();
        assert_eq!(t4.len(), 5);
        let mut sizes: Vec<u64> = t4
            .iter()
            .map(|t| t.class_size.to_string().parse().unwrap())
            .collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 4, 4, 6]);

        // stars-and-bars + multinomial oracle
        let t33 = iid_types(3, 3).unwrap();
        assert_eq!(t33.len(), 10);
        let total: BigUint = t33.iter().map(|t| t.class_size.clone()).sum();
        assert_eq!(total, BigUint::from(27u64));
    }

    #[test]
    fn class_sizes_partition_the_cube() {
        for (n, m) in [(6usize, 2usize), (5, 3), (4, 4), (12, 2)] {
            let types = iid_types(n, m).unwrap();
            let total: BigUint = types.iter().map(|t| t.class_size.clone()).sum();
            assert_eq!(total, BigUint::from(m as u64).pow(n as u32));
        }
    }

    #[test]
    fn iid_types_cap() {
        assert!(matches!(iid_types(10_000, 6), Err(Error::SizeCap(_))));
    }

    #[test]
    fn simulator_matches_hand_table_n2() {
        let unif = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        let table = typeclass_simulator(2, 2, &unif).unwrap();
        let map: BTreeMap<String, f64> = table
            .entries()
            .iter()
            .map(|(s, y)| (format!("{}{}", s[0], s[1]), *y))
            .collect();
        assert_eq!(map["00"], 0.5);
        assert_eq!(map["01"], 0.25);
        assert_eq!(map["10"], 0.75);
        assert_eq!(map["11"], 0.5);
        // brute-force output CDF oracle for the fair seed
        let ks = table.achieved_ks_iid(&[0.5, 0.5], &unif).unwrap();
        assert!((ks - 0.25).abs() < 1e-13);
    }

    #[test]
    fn simulator_n1_collapses_to_half() {
        let unif = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        let table = typeclass_simulator(1, 3, &unif).unwrap();
        for (_, y) in table.entries() {
            assert_eq!(*y, 0.5);
        }
        let ks = table.achieved_ks_iid(&[0.2, 0.5, 0.3], &unif).unwrap();
        assert!((ks - 0.5).abs() < 1e-13);
    }

    #[test]
    fn simulator_rejects_discrete_target() {
        let bern = ScalarDistribution::discrete(DiscretePmf::bernoulli(0.5).unwrap());
        assert!(matches!(
            typeclass_simulator(3, 2, &bern),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn eq_bound_arithmetic() {
        let pmf = DiscretePmf::bernoulli(0.5).unwrap();
        assert!((universal_error_bound(&pmf, 4) - 0.78125).abs() < 1e-12);
        let pmf = DiscretePmf::new(vec![0.0, 1.0], vec![0.1, 0.9]).unwrap();
        let expect = 0.5 * 11f64.powi(2) * 0.9f64.powi(10);
        assert!((universal_error_bound(&pmf, 10) - expect).abs() < 1e-12);
    }

    #[test]
    fn truncate_geometric() {
        let geo = |j: i64| -> f64 {
            if j < 0 {
                0.0
            } else {
                0.5f64.powi(j as i32 + 1)
            }
        };
        let pmf = truncate_countable(&geo, 1).unwrap();
        let total: f64 = pmf.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // buckets: (-inf,-1] has zero mass (dropped), {0}, [1, inf)
        assert_eq!(pmf.len(), 2);
        assert!((pmf.probs()[0] - 0.5).abs() < 1e-12);
        assert!((pmf.probs()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truncate_point_mass() {
        let point = |j: i64| if j == 0 { 1.0 } else { 0.0 };
        let pmf = truncate_countable(&point, 5).unwrap();
        assert_eq!(pmf.len(), 1);
        assert_eq!(pmf.probs()[0], 1.0);
    }

    #[test]
    fn truncate_poisson_max_bucket_descends_to_mode() {
        // pmf-evaluation oracle: Poisson(4) modal mass = e^-4 4^4/4!
        let pois = |j: i64| -> f64 {
            if j < 0 {
                return 0.0;
            }
            let mut v = (-4.0f64).exp();
            for k in 1..=j {
                v *= 4.0 / k as f64;
            }
            v
        };
        let modal = pois(4);
        assert!((modal - 0.195_366_814_813_420_24).abs() < 1e-12);
        let mut last = f64::INFINITY;
        for k in [2i64, 4, 8, 16] {
            let pmf = truncate_countable(&pois, k).unwrap();
            let maxm = pmf.max_mass();
            assert!(maxm <= last + 1e-15);
            last = maxm;
        }
        assert!((last - modal).abs() < 1e-9);
    }

    #[test]
    fn interval_quantize_uniform() {
        let u = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        let pmf = interval_quantize(&u, 0.25, 8).unwrap();
        for (v, m) in pmf.atoms() {
            if v > 0.0 && v <= 1.0 {
                assert!((m - 0.25).abs() < 1e-12, "bucket at {v} has {m}");
            }
        }
    }

    #[test]
    fn interval_quantize_gaussian_tails() {
        // Gaussian tail oracle: beyond 5 sigma the tails are < 3e-7.
        let n = ScalarDistribution::normal(0.0, 1.0).unwrap();
        let pmf = interval_quantize(&n, 0.01, 500).unwrap();
        let first = pmf.atoms().next().unwrap();
        let last = pmf.atoms().last().unwrap();
        assert!(first.1 < 3e-7);
        assert!(last.1 < 3e-7);
    }

    #[test]
    fn markov_type_counts() {
        let t = markov_type(&[0, 0], 2, 1, &[0]);
        assert_eq!(t.counts, vec![2, 0, 0, 0]); // "00" twice
        let t = markov_type(&[0, 1], 2, 1, &[0]);
        assert_eq!(t.counts, vec![1, 1, 0, 0]); // "00" then "01"
        let total: u64 = t.counts.iter().sum();
        assert_eq!(total as usize, t.n);
    }

    #[test]
    fn markov_types_match_probability_classes() {
        // Two sequences share a type iff their path probabilities agree
        // under every transition law; enumeration oracle over random laws.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let seqs: Vec<Vec<u8>> = (0..16u8).map(|b| (0..4).map(|i| (b >> i) & 1).collect()).collect();
        let types: Vec<Vec<u64>> = seqs
            .iter()
            .map(|s| markov_type(s, 2, 1, &[0]).counts)
            .collect();
        for _ in 0..100 {
            let rows: Vec<Vec<f64>> = (0..2)
                .map(|_| {
                    let a: f64 = rng.random_range(0.05..0.95);
                    vec![a, 1.0 - a]
                })
                .collect();
            let spec = MarkovChainSpec::new(2, 1, vec![0], rows).unwrap();
            for i in 0..seqs.len() {
                for j in 0..seqs.len() {
                    if types[i] == types[j] {
                        let d = (spec.path_log_prob(&seqs[i]) - spec.path_log_prob(&seqs[j])).abs();
                        assert!(d < 1e-12);
                    }
                }
            }
        }
        // separation direction: a generic law distinguishes distinct types
        let spec = MarkovChainSpec::new(
            2,
            1,
            vec![0],
            vec![vec![0.61, 0.39], vec![0.17, 0.83]],
        )
        .unwrap();
        for i in 0..seqs.len() {
            for j in 0..seqs.len() {
                if types[i] != types[j] {
                    let d = (spec.path_log_prob(&seqs[i]) - spec.path_log_prob(&seqs[j])).abs();
                    assert!(d > 1e-9, "types differ but probs agree: {i} {j}");
                }
            }
        }
    }

    #[test]
    fn markov_types_partition_the_cube() {
        for (n, m, k) in [(6usize, 2usize, 1usize), (4, 3, 1), (5, 2, 2)] {
            let init = vec![0u8; k];
            let types = markov_types(n, m, k, &init).unwrap();
            let total: BigUint = types.iter().map(|t| t.class_size.clone()).sum();
            assert_eq!(total, BigUint::from(m as u64).pow(n as u32));
        }
    }

    #[test]
    fn type_dumps_are_well_formed() {
        let types = iid_types(4, 2).unwrap();
        let csv = type_dump_csv(&types, &[0.3, 0.7]);
        assert!(csv.starts_with("counts,class_size,log_class_prob\n"));
        assert_eq!(csv.lines().count(), 6);
        // the all-ones class: counts 0-4, size 1, log prob = 4 ln 0.7
        let line = csv.lines().find(|l| l.starts_with("0-4,")).unwrap();
        let lp: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((lp - 4.0 * 0.7f64.ln()).abs() < 1e-12);

        let spec =
            MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let mtypes = markov_types(3, 2, 1, &[0]).unwrap();
        let csv = markov_type_dump_csv(&mtypes, &spec);
        assert_eq!(csv.lines().count(), mtypes.len() + 1);
        // class log-probs must aggregate to total probability 1
        let total: f64 = mtypes
            .iter()
            .map(|t| t.markov_log_class_prob(&spec).exp())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn markov_simulator_n2_all_singletons() {
        let unif = ScalarDistribution::uniform(0.0, 1.0).unwrap();
        let table = markov_typeclass_simulator(2, 2, 1, &[0], &unif).unwrap();
        assert_eq!(table.entries().len(), 4);
        for (_, y) in table.entries() {
            assert_eq!(*y, 0.5); // four distinct types, each a singleton
        }
        let spec = MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let ks = table.weighted_markov(&spec).unwrap().achieved_ks(&unif);
        assert!((ks - 0.5).abs() < 1e-13);
    }

    #[test]
    fn min_entropy_landmarks() {
        let fair = MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!((fair.min_entropy_loop().unwrap() - 2f64.ln()).abs() < 1e-12);

        // loops: (0) -> log(1/0.9); (1) -> log 2; (0,1) -> avg of log(1/0.1), log 2
        let chain =
            MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.9, 0.1], vec![0.5, 0.5]]).unwrap();
        let expect = (1.0f64 / 0.9).ln();
        assert!((chain.min_entropy_loop().unwrap() - expect).abs() < 1e-12);
        // DP max-product oracle agrees in the long horizon
        assert!((chain.min_entropy_dp(4000) - expect).abs() < 5e-3);

        // deterministic cycle: one path has probability 1
        let cyc = MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(cyc.min_entropy_loop().unwrap(), 0.0);
        assert_eq!(cyc.min_entropy_dp(100), 0.0);
    }

    #[test]
    fn min_entropy_rejects_bad_rows() {
        assert!(MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.9, 0.2], vec![0.5, 0.5]]).is_err());
        assert!(MarkovChainSpec::new(2, 1, vec![0, 0], vec![vec![0.5, 0.5]; 2]).is_err());
    }

    #[test]
    fn markov_error_bound_shape() {
        let spec =
            MarkovChainSpec::new(2, 1, vec![0], vec![vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap();
        let n = 6;
        let bound = markov_error_bound(&spec, n);
        let max_path = spec.max_path_log_prob(n).exp();
        assert!((bound - 0.5 * 7f64.powi(4) * max_path).abs() < 1e-12);
    }
}
