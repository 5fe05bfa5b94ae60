//! Largeness at finite depth: target sets, derived sets `E_f` and `E_x`,
//! the pushing step, and the direct tree-Hales-Jewett search.
//!
//! The bounded surrogate of largeness quantifies over further subspaces of
//! a fixed length `q` drawn inside a fixed block prefix. Candidates are
//! enumerated canonically: the prefix itself first, then by cut vector and
//! blockwise word order, so "least counterexample" and "first witness"
//! are well-defined and worker-independent.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::cert::SearchStats;
use crate::error::{Error, Result};
use crate::exec;
use crate::tree::VectorTree;
use crate::word::{
    enumerate_variable_words, is_further_subspace, Alphabet, ConstantWord, FiniteSubspace,
    VariableWord, Word,
};

/// A decidable set of constant words anchored at `ℓ`: nonempty members
/// must have `bt = ℓ`; the empty word may or may not belong.
#[derive(Clone)]
pub struct TargetSet {
    anchor: usize,
    pred: Arc<dyn Fn(&ConstantWord) -> Result<bool> + Send + Sync>,
}

impl std::fmt::Debug for TargetSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetSet")
            .field("anchor", &self.anchor)
            .finish()
    }
}

impl TargetSet {
    pub fn new(
        anchor: usize,
        pred: impl Fn(&ConstantWord) -> Result<bool> + Send + Sync + 'static,
    ) -> Self {
        TargetSet {
            anchor,
            pred: Arc::new(pred),
        }
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn contains(&self, w: &ConstantWord) -> Result<bool> {
        if !w.is_empty() && w.bt() != self.anchor {
            return Ok(false);
        }
        (self.pred)(w)
    }

    pub fn from_words(anchor: usize, words: BTreeSet<ConstantWord>) -> Self {
        TargetSet::new(anchor, move |w| Ok(words.contains(w)))
    }

    pub fn full(anchor: usize) -> Self {
        TargetSet::new(anchor, |_| Ok(true))
    }

    pub fn empty(anchor: usize) -> Self {
        TargetSet::new(anchor, |_| Ok(false))
    }

    /// The color class `coloring⁻¹(color)`.
    pub fn color_class(
        anchor: usize,
        color: u32,
        coloring: impl Fn(&ConstantWord) -> Result<u32> + Send + Sync + 'static,
    ) -> Self {
        TargetSet::new(anchor, move |w| Ok(coloring(w)? == color))
    }
}

/// `E_f`: the words `g` with `f' ∪ g ∈ E` for every `f'` in the span of
/// `f`; equals `E` itself when `f` is empty. Evaluated lazily.
pub fn derived_set(vt: &VectorTree, alph: &Alphabet, e: &TargetSet, f: &Word) -> Result<TargetSet> {
    if f.is_empty() {
        return Ok(e.clone());
    }
    if f.bt() != e.anchor() {
        return Err(Error::pre(format!(
            "word starts at {} but target set is anchored at {}",
            f.bt(),
            e.anchor()
        )));
    }
    let instances = f.span(vt, alph)?;
    let base = e.clone();
    Ok(TargetSet::new(f.tp(), move |g| {
        for inst in &instances {
            if !base.contains(&inst.concat(g)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }))
}

/// `E_x = ⋂_{f ∈ [x]_Λ} E_f` for a finite subspace `x`.
pub fn derived_set_seq(
    vt: &VectorTree,
    alph: &Alphabet,
    e: &TargetSet,
    x: &FiniteSubspace,
) -> Result<TargetSet> {
    if !x.is_empty() && x.anchor_l != e.anchor() {
        return Err(Error::pre(format!(
            "subspace anchored at {} but target set at {}",
            x.anchor_l,
            e.anchor()
        )));
    }
    let span = x.span_sequence(vt, alph)?;
    let base = e.clone();
    let top = x.top();
    Ok(TargetSet::new(top, move |g| {
        for f in &span {
            if !base.contains(&f.concat(g)?)? {
                return Ok(false);
            }
        }
        Ok(true)
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LargenessOutcome {
    /// Every further subspace of length `q` inside the checked prefix has
    /// a span meeting the target set. `depth` is the top level checked.
    LargeUpto { q: usize, depth: usize },
    /// The least further subspace whose span avoids the target set.
    Counterexample(FiniteSubspace),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LargenessReport {
    pub outcome: LargenessOutcome,
    pub stats: SearchStats,
}

impl LargenessReport {
    pub fn is_large(&self) -> bool {
        matches!(self.outcome, LargenessOutcome::LargeUpto { .. })
    }
}

/// Bounded largeness: `E` is large up to `q` in `X` when every further
/// subspace of length `q` drawn inside `X`'s `q`-block prefix meets `E`.
pub fn is_large_upto(
    vt: &VectorTree,
    alph: &Alphabet,
    e: &TargetSet,
    x: &FiniteSubspace,
    q: usize,
) -> Result<LargenessReport> {
    if q > x.len() {
        return Err(Error::pre(format!(
            "largeness depth {q} exceeds block count {}",
            x.len()
        )));
    }
    if !x.is_empty() && e.anchor() != x.anchor_l {
        return Err(Error::pre(format!(
            "target set anchored at {} but subspace at {}",
            e.anchor(),
            x.anchor_l
        )));
    }
    let prefix = x.prefix(q)?;
    let e = e.clone();
    let (hit, stats) = search_further(vt, alph, &prefix, q, move |y, span| {
        for w in span {
            if e.contains(w)? {
                return Ok(None);
            }
        }
        Ok(Some(y.clone()))
    })?;
    let outcome = match hit {
        Some(y) => LargenessOutcome::Counterexample(y),
        None => LargenessOutcome::LargeUpto {
            q,
            depth: prefix.top(),
        },
    };
    Ok(LargenessReport { outcome, stats })
}

#[derive(Debug, Clone)]
pub enum PushStep {
    /// `g` spans inside a block prefix of `X`, its support dominates the
    /// requested level, and `E_g` is large in the tail after that prefix.
    Found {
        g: VariableWord,
        tail: FiniteSubspace,
        report: LargenessReport,
    },
    /// No qualifying word exists within this truncation.
    DepthExhausted { stats: SearchStats },
    /// The largeness precondition on `E` itself already fails.
    PreconditionFailed { counterexample: FiniteSubspace },
}

/// The pushing step: assuming `E` is large up to `q` in `X`, find the
/// least variable word `g` (by prefix length, then canonical order) with
/// span inside a block prefix of `X` and support dominating `T(k)`, whose
/// derived set is large in the corresponding tail.
pub fn push_large_step(
    vt: &VectorTree,
    alph: &Alphabet,
    e: &TargetSet,
    x: &FiniteSubspace,
    k: usize,
    q: usize,
) -> Result<PushStep> {
    let pre = is_large_upto(vt, alph, e, x, q.min(x.len()))?;
    let mut stats = pre.stats;
    if let LargenessOutcome::Counterexample(y) = pre.outcome {
        return Ok(PushStep::PreconditionFailed { counterexample: y });
    }
    for p in 1..x.len() {
        let prefix = x.prefix(p)?;
        let top = prefix.top();
        let tail = FiniteSubspace {
            anchor_k: x.anchor_k + p,
            anchor_l: x.blocks[p].bt(),
            blocks: x.blocks[p..].to_vec(),
        };
        let q_tail = q.min(tail.len());
        for g in enumerate_variable_words(vt, alph, x.anchor_l, top, k, usize::MAX)? {
            stats.candidates += 1;
            let mut inside = true;
            for inst in g.span(vt, alph)? {
                if !prefix.contains_word(vt, &inst)? {
                    inside = false;
                    break;
                }
            }
            if !inside {
                stats.prunes += 1;
                continue;
            }
            let eg = derived_set(vt, alph, e, &Word::Var(g.clone()))?;
            let report = is_large_upto(vt, alph, &eg, &tail, q_tail)?;
            stats.merge(report.stats);
            if report.is_large() {
                return Ok(PushStep::Found { g, tail, report });
            }
        }
    }
    Ok(PushStep::DepthExhausted { stats })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeHjOutcome {
    Witness { x: FiniteSubspace, color: u32 },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeHjCertificate {
    pub outcome: TreeHjOutcome,
    pub stats: SearchStats,
}

/// Direct finite tree-Hales-Jewett search: the first further subspace of
/// length `q` (prefix first, then canonical order) whose whole span is one
/// color. Exhausting the truncation never contradicts the infinite
/// theorem; it only bounds this instance.
pub fn tree_hj_search<F>(
    vt: &VectorTree,
    alph: &Alphabet,
    coloring: F,
    x: &FiniteSubspace,
    q: usize,
) -> Result<TreeHjCertificate>
where
    F: Fn(&ConstantWord) -> Result<u32> + Send + Sync,
{
    if q > x.len() {
        return Err(Error::pre(format!(
            "search depth {q} exceeds block count {}",
            x.len()
        )));
    }
    let prefix = x.prefix(q)?;
    let (hit, stats) = search_further(vt, alph, &prefix, q, move |y, span| {
        let mut colors = span.iter().map(&coloring);
        let first = match colors.next() {
            Some(c) => c?,
            None => return Ok(None),
        };
        for c in colors {
            if c? != first {
                return Ok(None);
            }
        }
        Ok(Some((y.clone(), first)))
    })?;
    let outcome = match hit {
        Some((y, color)) => TreeHjOutcome::Witness { x: y, color },
        None => TreeHjOutcome::Exhausted,
    };
    Ok(TreeHjCertificate { outcome, stats })
}

/// Independent witness check: `y` really is a further subspace of `x`'s
/// prefix and its span is monochromatic under the coloring.
pub fn validate_tree_hj_witness<F>(
    vt: &VectorTree,
    alph: &Alphabet,
    coloring: F,
    x: &FiniteSubspace,
    witness: &FiniteSubspace,
    color: u32,
) -> Result<bool>
where
    F: Fn(&ConstantWord) -> Result<u32>,
{
    let q = witness.len().min(x.len());
    let mut prefix = x.prefix(q)?;
    prefix.anchor_k = 0;
    let mut reanchored = witness.clone();
    reanchored.anchor_k = 0;
    if !is_further_subspace(vt, alph, &reanchored, &prefix)? {
        return Ok(false);
    }
    for w in witness.span_sequence(vt, alph)? {
        if coloring(&w)? != color {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All further subspaces of length `q` inside `prefix`, in search order.
pub fn enumerate_further_subspaces(
    vt: &VectorTree,
    alph: &Alphabet,
    prefix: &FiniteSubspace,
    q: usize,
) -> Result<Vec<FiniteSubspace>> {
    let collected = std::sync::Mutex::new(Vec::new());
    search_further::<()>(vt, alph, &prefix.prefix(q)?, q, |y, _span| {
        collected.lock().expect("collector poisoned").push(y.clone());
        Ok(None)
    })?;
    let mut out = collected.into_inner().expect("collector poisoned");
    // shards may interleave; restore canonical order with the prefix first
    out.sort();
    let mut probe = prefix.prefix(q)?;
    probe.anchor_k = 0;
    if let Some(pos) = out.iter().position(|y| *y == probe) {
        let p = out.remove(pos);
        out.insert(0, p);
    }
    Ok(out)
}

/// Core engine: applies `test` to every further subspace of length `q`
/// inside `prefix` (the prefix itself first, then ordered by cut vector
/// and blockwise canonical word order) and returns the first hit. The
/// span of each candidate is materialized once and shared with `test`.
fn search_further<R: Send>(
    vt: &VectorTree,
    alph: &Alphabet,
    prefix: &FiniteSubspace,
    q: usize,
    test: impl Fn(&FiniteSubspace, &[ConstantWord]) -> Result<Option<R>> + Send + Sync,
) -> Result<(Option<R>, SearchStats)> {
    let mut stats = SearchStats::default();
    if q == 0 {
        let empty = FiniteSubspace {
            anchor_k: 0,
            anchor_l: prefix.anchor_l,
            blocks: Vec::new(),
        };
        let span = empty.span_sequence(vt, alph)?;
        stats.candidates += 1;
        return Ok((test(&empty, &span)?, stats));
    }
    let l = prefix.anchor_l;
    let top = prefix.top();
    // the prefix is its own further subspace; probe it first
    stats.candidates += 1;
    let reanchored = FiniteSubspace {
        anchor_k: 0,
        anchor_l: l,
        blocks: prefix.blocks.clone(),
    };
    if let Some(r) = test(&reanchored, &reanchored.span_sequence(vt, alph)?)? {
        return Ok((Some(r), stats));
    }

    // shard seeds: one per (cut vector, first block candidate)
    let mut seeds = Vec::new();
    for cuts in interior_cuts(l, top, q) {
        let first_hi = if q == 1 { top } else { cuts[0] };
        for w in enumerate_variable_words(vt, alph, l, first_hi, 0, usize::MAX)? {
            seeds.push((cuts.clone(), w));
        }
    }
    let results = exec::map_shards(seeds, |(cuts, first)| {
        complete_and_test(vt, alph, &reanchored, &cuts, first, &test)
    });
    for res in results {
        let (hit, shard_stats) = res?;
        stats.merge(shard_stats);
        if let Some(r) = hit {
            return Ok((Some(r), stats));
        }
    }
    Ok((None, stats))
}

/// All strictly increasing interior cut vectors of length `q - 1` inside
/// `(l, top)`, in lexicographic order.
fn interior_cuts(l: usize, top: usize, q: usize) -> Vec<Vec<usize>> {
    if q == 1 {
        return vec![Vec::new()];
    }
    let need = q - 1;
    if l + q > top {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cuts: Vec<usize> = (l + 1..l + 1 + need).collect();
    loop {
        out.push(cuts.clone());
        let mut i = need;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            let max_here = top - (need - i);
            if cuts[i] < max_here {
                cuts[i] += 1;
                for j in i + 1..need {
                    cuts[j] = cuts[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn complete_and_test<R>(
    vt: &VectorTree,
    alph: &Alphabet,
    prefix: &FiniteSubspace,
    cuts: &[usize],
    first: VariableWord,
    test: &(impl Fn(&FiniteSubspace, &[ConstantWord]) -> Result<Option<R>> + Sync),
) -> Result<(Option<R>, SearchStats)> {
    let l = prefix.anchor_l;
    let top = prefix.top();
    let q = cuts.len() + 1;
    let mut bounds = Vec::with_capacity(q + 1);
    bounds.push(l);
    bounds.extend_from_slice(cuts);
    bounds.push(top);
    let mut stats = SearchStats::default();
    let mut blocks = vec![first];
    let hit = fill_blocks(vt, alph, prefix, &bounds, &mut blocks, 1, test, &mut stats)?;
    Ok((
        match hit {
            ControlFlow::Break(r) => Some(r),
            ControlFlow::Continue(()) => None,
        },
        stats,
    ))
}

#[allow(clippy::too_many_arguments)]
fn fill_blocks<R>(
    vt: &VectorTree,
    alph: &Alphabet,
    prefix: &FiniteSubspace,
    bounds: &[usize],
    blocks: &mut Vec<VariableWord>,
    depth: usize,
    test: &(impl Fn(&FiniteSubspace, &[ConstantWord]) -> Result<Option<R>> + Sync),
    stats: &mut SearchStats,
) -> Result<ControlFlow<R>> {
    let q = bounds.len() - 1;
    if depth == q {
        // domination for a plain further subspace: block i covers T(i)
        for (i, b) in blocks.iter().enumerate() {
            if !b.support().dominates_full_level(vt, i)? {
                stats.prunes += 1;
                return Ok(ControlFlow::Continue(()));
            }
        }
        let candidate = FiniteSubspace {
            anchor_k: 0,
            anchor_l: prefix.anchor_l,
            blocks: blocks.clone(),
        };
        if candidate == *prefix {
            return Ok(ControlFlow::Continue(())); // already probed up front
        }
        if !is_further_subspace(vt, alph, &candidate, prefix)? {
            stats.prunes += 1;
            return Ok(ControlFlow::Continue(()));
        }
        stats.candidates += 1;
        let span = candidate.span_sequence(vt, alph)?;
        if let Some(r) = test(&candidate, &span)? {
            return Ok(ControlFlow::Break(r));
        }
        return Ok(ControlFlow::Continue(()));
    }
    let lo = bounds[depth];
    let hi = bounds[depth + 1];
    for w in enumerate_variable_words(vt, alph, lo, hi, depth, usize::MAX)? {
        blocks.push(w);
        let flow = fill_blocks(vt, alph, prefix, bounds, blocks, depth + 1, test, stats)?;
        blocks.pop();
        if let ControlFlow::Break(r) = flow {
            return Ok(ControlFlow::Break(r));
        }
    }
    Ok(ControlFlow::Continue(()))
}
