//! Signatures of piecewise linear paths, the Brownian expected signature, and
//! a compiled evaluator that tracks only the coefficients a set of
//! functionals needs.

use std::collections::BTreeMap;

use crate::error::{Result, SigError};
use crate::scalar::Scalar;
use crate::tensor_algebra::{chen_product, group_inverse, tensor_exp, GroupTensor, TensorPoly, Word};

/// Samples of a path, linearly interpolated between sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledPath<S> {
    times: Vec<S>,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> SampledPath<S> {
    /// `values[k]` is the position at `times[k]`.
    pub fn new(times: Vec<S>, values: Vec<Vec<S>>) -> Result<Self> {
        if times.len() < 2 {
            return Err(SigError::TooFewSamples);
        }
        if times.len() != values.len() {
            return Err(SigError::DimensionMismatch { left: times.len(), right: values.len() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SigError::NonMonotoneTimes);
        }
        let dim = values[0].len();
        if let Some(v) = values.iter().find(|v| v.len() != dim) {
            return Err(SigError::DimensionMismatch { left: dim, right: v.len() });
        }
        Ok(SampledPath { times, values })
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    /// Spatial dimension, not counting time.
    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn n_segments(&self) -> usize {
        self.times.len() - 1
    }

    /// Increment of segment `k`, with time as component 0 when `augment_time`.
    pub fn increment(&self, k: usize, augment_time: bool, out: &mut Vec<S>) {
        out.clear();
        if augment_time {
            out.push(self.times[k + 1] - self.times[k]);
        }
        out.extend(self.values[k + 1].iter().zip(&self.values[k]).map(|(&b, &a)| b - a));
    }

    /// Sub-path between two sample indices, inclusive.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self> {
        Self::new(self.times[from..=to].to_vec(), self.values[from..=to].to_vec())
    }
}

/// Signature of the piecewise linear interpolation, truncated at `depth`.
///
/// With `augment_time` the alphabet is `{0, time; 1..=dim, components}`.
/// Without it, component `j` of the samples is letter `j`.
pub fn signature_of_path<S: Scalar>(p: &SampledPath<S>, depth: usize, augment_time: bool) -> GroupTensor<S> {
    let d = if augment_time { p.dim() } else { p.dim() - 1 };
    let mut sig = GroupTensor::unit(d, depth);
    let mut delta = Vec::with_capacity(d + 1);
    for k in 0..p.n_segments() {
        p.increment(k, augment_time, &mut delta);
        sig.mul_segment_exp(&delta);
    }
    sig
}

/// Signatures of every prefix `[t_0, t_k]`, one per sample.
pub fn prefix_signatures<S: Scalar>(p: &SampledPath<S>, depth: usize, augment_time: bool) -> Vec<GroupTensor<S>> {
    let d = if augment_time { p.dim() } else { p.dim() - 1 };
    let mut sig = GroupTensor::unit(d, depth);
    let mut out = Vec::with_capacity(p.times.len());
    out.push(sig.clone());
    let mut delta = Vec::with_capacity(d + 1);
    for k in 0..p.n_segments() {
        p.increment(k, augment_time, &mut delta);
        sig.mul_segment_exp(&delta);
        out.push(sig.clone());
    }
    out
}

/// `E[sig(Ŵ)_{[0,t]}] = exp⊗(t·0 + (t/2) Σ_i ii)` for time-augmented Brownian motion.
pub fn expected_brownian_sig<S: Scalar>(t: S, d: usize, depth: usize) -> Result<GroupTensor<S>> {
    let mut gen = TensorPoly::monomial(d, Word::letter(0), t);
    let half = t / S::from_int(2);
    for i in 1..=d as u8 {
        gen.add_term(Word::from([i, i]), half);
    }
    tensor_exp(&gen, depth)
}

/// Signature over `[s, t]` from the signatures over `[0, t]` and `[0, s]`.
pub fn interval_signature<S: Scalar>(full: &GroupTensor<S>, prefix: &GroupTensor<S>) -> Result<GroupTensor<S>> {
    chen_product(&group_inverse(prefix)?, full)
}

#[derive(Clone, Copy, Debug)]
struct Node {
    parent: u32,
    letter: u8,
    slot: u32,
    inv: f64,
    write: bool,
}

const ROOT: u32 = u32::MAX;

#[derive(Clone, Debug)]
enum Layout {
    Dense,
    Sparse(Vec<Vec<Node>>),
}

/// The set of signature coefficients needed by a family of functionals,
/// closed under taking prefixes, with an update schedule for appending one
/// linear segment.
///
/// For each target length `m` the words of that length form a trie. Walking
/// the trie with `acc_j = acc_{j-1} Δ_{w_j} / (m - j + 1) + x^{w_1..w_j}`
/// produces the new coefficients at depth `m`, sharing work between words with
/// a common prefix. Lengths are processed longest first so every read sees the
/// old value. When the closure is most of the full tensor, a dense level
/// Horner update is used instead.
#[derive(Clone, Debug)]
pub struct SigPlan {
    d: usize,
    depth: usize,
    slots: BTreeMap<Word, usize>,
    layout: Layout,
    n_values: usize,
    dense_offsets: Vec<usize>,
}

/// A functional compiled against a [`SigPlan`].
#[derive(Clone, Debug, Default)]
pub struct CompiledPoly {
    terms: Vec<(u32, f64)>,
}

impl CompiledPoly {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl SigPlan {
    /// Plan covering every word of the given polynomials.
    pub fn new(d: usize, polys: &[&TensorPoly<f64>]) -> Result<Self> {
        Self::with_layout(d, polys, None)
    }

    /// Force dense (`Some(true)`) or sparse (`Some(false)`) evaluation.
    pub fn with_layout(d: usize, polys: &[&TensorPoly<f64>], dense: Option<bool>) -> Result<Self> {
        let mut words: BTreeMap<Word, usize> = BTreeMap::new();
        words.insert(Word::empty(), 0);
        for p in polys {
            if p.d() != d {
                return Err(SigError::DimensionMismatch { left: d, right: p.d() });
            }
            for w in p.words() {
                let mut w = w.clone();
                while !w.is_empty() && !words.contains_key(&w) {
                    words.insert(w.clone(), 0);
                    w = w.prefix();
                }
            }
        }
        let depth = words.keys().next_back().map_or(0, Word::len);
        let base = d + 1;
        let dense_cost: usize = (1..=depth).map(|n| (1..=n).map(|k| base.pow(k as u32)).sum::<usize>()).sum();

        // trie nodes per target length: distinct prefixes of words of that length
        let mut sparse_cost = 0usize;
        let mut by_len: Vec<Vec<Word>> = vec![Vec::new(); depth + 1];
        for w in words.keys() {
            by_len[w.len()].push(w.clone());
        }
        let mut tries: Vec<Vec<Word>> = vec![Vec::new(); depth + 1];
        for m in 1..=depth {
            let mut nodes: BTreeMap<Word, ()> = BTreeMap::new();
            for w in &by_len[m] {
                for j in 1..=m {
                    nodes.insert(Word::from(&w.letters()[..j]), ());
                }
            }
            sparse_cost += nodes.len();
            tries[m] = nodes.into_keys().collect();
        }
        // a dense node is a contiguous fused multiply-add, a sparse node a gather;
        // measured at roughly a factor four apart
        let use_dense = dense.unwrap_or(dense_cost <= 4 * sparse_cost);

        let mut plan = SigPlan { d, depth, slots: BTreeMap::new(), layout: Layout::Dense, n_values: 0, dense_offsets: Vec::new() };
        if use_dense {
            let t = GroupTensor::<f64>::zeros(d, depth);
            plan.dense_offsets = (0..=depth + 1).map(|n| if n <= depth { t.level_offset(n) } else { t.as_slice().len() }).collect();
            plan.n_values = t.as_slice().len();
            for w in words.keys() {
                plan.slots.insert(w.clone(), t.flat_index(w));
            }
        } else {
            for (k, w) in words.keys().enumerate() {
                plan.slots.insert(w.clone(), k);
            }
            plan.n_values = words.len();
            let mut passes = Vec::with_capacity(depth);
            for m in (1..=depth).rev() {
                let mut index: BTreeMap<Word, u32> = BTreeMap::new();
                let mut nodes = Vec::with_capacity(tries[m].len());
                // tries[m] is in length-then-lex order, so parents come first
                for p in &tries[m] {
                    let j = p.len();
                    let parent = if j == 1 { ROOT } else { index[&p.prefix()] };
                    index.insert(p.clone(), nodes.len() as u32);
                    nodes.push(Node {
                        parent,
                        letter: p.last().unwrap(),
                        slot: plan.slots[p] as u32,
                        inv: 1.0 / (m - j + 1) as f64,
                        write: j == m,
                    });
                }
                passes.push(nodes);
            }
            plan.layout = Layout::Sparse(passes);
        }
        Ok(plan)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.layout, Layout::Dense)
    }

    /// Number of tracked words, including the empty word.
    pub fn n_words(&self) -> usize {
        self.slots.len()
    }

    /// Compile a polynomial whose words are all tracked by the plan.
    pub fn compile(&self, l: &TensorPoly<f64>) -> Result<CompiledPoly> {
        if l.d() != self.d {
            return Err(SigError::DimensionMismatch { left: self.d, right: l.d() });
        }
        let mut terms = Vec::with_capacity(l.len());
        for (w, &c) in l.iter() {
            match self.slots.get(w) {
                Some(&s) => terms.push((s as u32, c)),
                None => {
                    return Err(SigError::DegreeExceedsTruncation { degree: w.len(), level: self.depth });
                }
            }
        }
        Ok(CompiledPoly { terms })
    }

    pub fn accumulator(&self) -> SigAccumulator<'_> {
        let mut values = vec![0.0; self.n_values];
        values[0] = 1.0;
        let scratch = if self.is_dense() { (self.d + 1).pow(self.depth as u32) } else {
            match &self.layout {
                Layout::Sparse(p) => p.iter().map(Vec::len).max().unwrap_or(0),
                Layout::Dense => 0,
            }
        };
        SigAccumulator { plan: self, values, acc: vec![0.0; scratch], next: vec![0.0; scratch] }
    }
}

/// Running signature restricted to the words of a [`SigPlan`].
pub struct SigAccumulator<'a> {
    plan: &'a SigPlan,
    values: Vec<f64>,
    acc: Vec<f64>,
    next: Vec<f64>,
}

impl SigAccumulator<'_> {
    /// Back to the trivial path.
    pub fn reset(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
        self.values[0] = 1.0;
    }

    /// Append a linear segment with increment `delta` (time first).
    pub fn push(&mut self, delta: &[f64]) {
        debug_assert_eq!(delta.len(), self.plan.d + 1);
        match &self.plan.layout {
            Layout::Sparse(passes) => {
                let acc = &mut self.acc;
                let values = &mut self.values;
                for nodes in passes {
                    for (j, n) in nodes.iter().enumerate() {
                        let a = if n.parent == ROOT { values[0] } else { acc[n.parent as usize] };
                        let v = a * delta[n.letter as usize] * n.inv + values[n.slot as usize];
                        acc[j] = v;
                        if n.write {
                            values[n.slot as usize] = v;
                        }
                    }
                }
            }
            Layout::Dense => self.push_dense(delta),
        }
    }

    fn push_dense(&mut self, delta: &[f64]) {
        match self.plan.d + 1 {
            2 => self.push_dense_fixed::<2>(delta),
            3 => self.push_dense_fixed::<3>(delta),
            4 => self.push_dense_fixed::<4>(delta),
            _ => self.push_dense_any(delta),
        }
    }

    fn push_dense_fixed<const B: usize>(&mut self, delta: &[f64]) {
        let dl: [f64; B] = delta.try_into().expect("increment length");
        let off = &self.plan.dense_offsets;
        let x = &mut self.values;
        for n in (1..=self.plan.depth).rev() {
            let mut len = 1;
            self.acc[0] = x[0];
            for k in 1..=n {
                let f = 1.0 / (n - k + 1) as f64;
                let xk = &x[off[k]..off[k + 1]];
                let dst = &mut self.next[..len * B];
                for ((o, src), &a) in dst.chunks_exact_mut(B).zip(xk.chunks_exact(B)).zip(&self.acc[..len]) {
                    let va = a * f;
                    for b in 0..B {
                        o[b] = va * dl[b] + src[b];
                    }
                }
                len *= B;
                std::mem::swap(&mut self.acc, &mut self.next);
            }
            x[off[n]..off[n + 1]].copy_from_slice(&self.acc[..len]);
        }
    }

    fn push_dense_any(&mut self, delta: &[f64]) {
        let base = self.plan.d + 1;
        let off = &self.plan.dense_offsets;
        let x = &mut self.values;
        for n in (1..=self.plan.depth).rev() {
            let mut len = 1;
            self.acc[0] = x[0];
            for k in 1..=n {
                let f = 1.0 / (n - k + 1) as f64;
                let xk = &x[off[k]..off[k + 1]];
                for a in 0..len {
                    let va = self.acc[a] * f;
                    for b in 0..base {
                        self.next[a * base + b] = va * delta[b] + xk[a * base + b];
                    }
                }
                len *= base;
                std::mem::swap(&mut self.acc, &mut self.next);
            }
            x[off[n]..off[n + 1]].copy_from_slice(&self.acc[..len]);
        }
    }

    pub fn pair(&self, l: &CompiledPoly) -> f64 {
        l.terms.iter().map(|&(s, c)| c * self.values[s as usize]).sum()
    }

    /// Coefficient of a tracked word.
    pub fn get(&self, w: &Word) -> Option<f64> {
        self.plan.slots.get(w).map(|&s| self.values[s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::{all_words, pair};

    fn zigzag(n: usize) -> SampledPath<f64> {
        let times: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let values = times.iter().map(|&t| vec![(3.0 * t).sin(), t * t - 0.5 * t]).collect();
        SampledPath::new(times, values).unwrap()
    }

    #[test]
    fn path_validation() {
        assert_eq!(SampledPath::new(vec![0.0], vec![vec![0.0]]), Err(SigError::TooFewSamples));
        assert_eq!(SampledPath::new(vec![0.0, 0.0], vec![vec![0.0], vec![1.0]]), Err(SigError::NonMonotoneTimes));
    }

    #[test]
    fn chen_identity_on_split_path() {
        let p = zigzag(20);
        let a = signature_of_path(&p.slice(0, 8).unwrap(), 4, true);
        let b = signature_of_path(&p.slice(8, 20).unwrap(), 4, true);
        let full = signature_of_path(&p, 4, true);
        assert!(chen_product(&a, &b).unwrap().max_abs_diff(&full) < 1e-14);
        assert!(interval_signature(&full, &a).unwrap().max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn single_segment_is_exponential() {
        let p = SampledPath::new(vec![0.0, 0.5], vec![vec![0.0, 0.0], vec![0.3, -0.2]]).unwrap();
        let s = signature_of_path(&p, 3, true);
        assert!(s.max_abs_diff(&GroupTensor::segment_exp(&[0.5, 0.3, -0.2], 3)) < 1e-15);
    }

    #[test]
    fn sparse_and_dense_plans_agree_with_signature() {
        let p = zigzag(30);
        let full = signature_of_path(&p, 4, true);
        let l1 = TensorPoly::from_terms(2, vec![(Word::from([0u8, 1, 1, 2]), 1.5), (Word::from([2u8]), -1.0)]).unwrap();
        let l2 = TensorPoly::from_terms(2, vec![(Word::from([1u8, 0, 1]), 0.25), (Word::empty(), 3.0)]).unwrap();
        for dense in [Some(false), Some(true)] {
            let plan = SigPlan::with_layout(2, &[&l1, &l2], dense).unwrap();
            let mut acc = plan.accumulator();
            let mut delta = Vec::new();
            for k in 0..p.n_segments() {
                p.increment(k, true, &mut delta);
                acc.push(&delta);
            }
            for l in [&l1, &l2] {
                let c = plan.compile(l).unwrap();
                assert!((acc.pair(&c) - pair(l, &full).unwrap()).abs() < 1e-14);
            }
            for w in all_words(2, 4) {
                if let Some(v) = acc.get(&w) {
                    assert!((v - full.get(&w)).abs() < 1e-14, "{w}");
                }
            }
        }
    }

    #[test]
    fn compile_rejects_untracked_word() {
        let l = TensorPoly::word(1, &[1, 1]);
        let plan = SigPlan::new(1, &[&l]).unwrap();
        assert!(plan.compile(&TensorPoly::word(1, &[0, 1])).is_err());
    }

    #[test]
    fn expected_signature_low_levels() {
        let e = expected_brownian_sig(2.0f64, 1, 4).unwrap();
        assert!((e.get(&Word::from([0u8])) - 2.0).abs() < 1e-15);
        assert!((e.get(&Word::from([1u8, 1])) - 1.0).abs() < 1e-15);
        assert!((e.get(&Word::from([1u8, 1, 1, 1])) - 0.5).abs() < 1e-15);
        assert_eq!(e.get(&Word::from([1u8])), 0.0);
    }
}
