//! Disjoint-union structures and theorem verifiers: min-rooted cell sets,
//! families indexed by a vector subset, union spans, the reduction map
//! from two-letter words to span elements with a fixed minimum, the
//! min-canonicalization repair step, the finite Halpern-Lauchli search,
//! the disjoint-union pipeline, Folkman search, and the pair-coloring
//! counterexample verifier.

use std::collections::{BTreeMap, BTreeSet};

use crate::cert::SearchStats;
use crate::error::{Error, Result};
use crate::exec;
use crate::large::{tree_hj_search, TreeHjOutcome};
use crate::tree::{Cell, NodeRef, Tree, VectorSubset, VectorTree};
use crate::word::{Alphabet, ConstantWord, Symbol};

/// A nonempty finite set of cells admitting a minimum in the level
/// product order. Cells are kept sorted in canonical order; the minimum
/// is the first cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MinSet {
    cells: Vec<Cell>,
}

impl MinSet {
    pub fn new(vt: &VectorTree, cells: BTreeSet<Cell>) -> Result<Self> {
        match MinSet::try_new(vt, cells)? {
            Some(ms) => Ok(ms),
            None => Err(Error::structure("cell set has no minimum")),
        }
    }

    /// `None` when the set is empty or has no minimum.
    pub fn try_new(vt: &VectorTree, cells: BTreeSet<Cell>) -> Result<Option<Self>> {
        let cells: Vec<Cell> = cells.into_iter().collect();
        let Some(first) = cells.first() else {
            return Ok(None);
        };
        for c in &cells[1..] {
            if !vt.cell_leq(first, c)? {
                return Ok(None);
            }
        }
        Ok(Some(MinSet { cells }))
    }

    pub fn minimum(&self) -> &Cell {
        &self.cells[0]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_disjoint(&self, other: &MinSet) -> bool {
        let set: BTreeSet<&Cell> = self.cells.iter().collect();
        other.cells.iter().all(|c| !set.contains(c))
    }

    pub fn max_level(&self) -> usize {
        self.cells.iter().map(|c| c.level).max().unwrap_or(0)
    }

    pub fn count_at_level(&self, level: usize) -> usize {
        self.cells.iter().filter(|c| c.level == level).count()
    }

    /// Cells sorted by (level, indices), rendered `L:i1,...` joined by `;`.
    pub fn encode(&self) -> String {
        let parts: Vec<String> = self.cells.iter().map(|c| c.to_string()).collect();
        parts.join(";")
    }

    pub fn parse(vt: &VectorTree, s: &str) -> Result<Self> {
        let mut cells = BTreeSet::new();
        for part in s.split(';') {
            let cell = crate::tree::parse_cell(part)?;
            vt.check_cell(&cell)?;
            cells.insert(cell);
        }
        MinSet::new(vt, cells)
    }
}

/// A family of pairwise disjoint min-rooted sets indexed by the level
/// product of a vector subset: `min U_t = t` for every index cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UFamily {
    pub base: VectorSubset,
    pub sets: BTreeMap<Cell, MinSet>,
}

impl UFamily {
    pub fn new(vt: &VectorTree, base: VectorSubset, sets: BTreeMap<Cell, MinSet>) -> Result<Self> {
        base.validate(vt)?;
        let domain = base.all_cells();
        if domain.len() != sets.len() || domain.iter().any(|t| !sets.contains_key(t)) {
            return Err(Error::structure(
                "family must assign exactly one set per index cell",
            ));
        }
        let mut seen: BTreeSet<&Cell> = BTreeSet::new();
        for (t, u) in &sets {
            if u.minimum() != t {
                return Err(Error::structure(format!(
                    "set at {t} has minimum {}",
                    u.minimum()
                )));
            }
            for c in u.cells() {
                vt.check_cell(c)?;
                if !seen.insert(c) {
                    return Err(Error::structure(format!(
                        "cell {c} appears in two family sets"
                    )));
                }
            }
        }
        Ok(UFamily { base, sets })
    }

    /// The family of singletons `U_t = {t}` over the given base.
    pub fn singletons(vt: &VectorTree, base: VectorSubset) -> Result<Self> {
        let mut sets = BTreeMap::new();
        for t in base.all_cells() {
            let ms = MinSet::new(vt, [t.clone()].into_iter().collect())?;
            sets.insert(t, ms);
        }
        UFamily::new(vt, base, sets)
    }

    /// Index cells in canonical order.
    pub fn domain(&self) -> Vec<Cell> {
        self.base.all_cells()
    }

    pub fn get(&self, t: &Cell) -> Option<&MinSet> {
        self.sets.get(t)
    }

    /// The sub-family indexed by a vector subset of the base.
    pub fn restrict(&self, vt: &VectorTree, sub: &VectorSubset) -> Result<UFamily> {
        for cell in sub.all_cells() {
            if !self.base.contains_cell(&cell) {
                return Err(Error::pre(format!("index cell {cell} outside the base")));
            }
        }
        let sets = sub
            .all_cells()
            .into_iter()
            .map(|t| {
                let u = self.sets[&t].clone();
                (t, u)
            })
            .collect();
        UFamily::new(vt, sub.clone(), sets)
    }
}

/// `⋃_{t ∈ Γ} U_t` when it admits a minimum; `None` for empty `Γ` or a
/// minimum-free union.
pub fn union_span(vt: &VectorTree, u: &UFamily, gamma: &BTreeSet<Cell>) -> Result<Option<MinSet>> {
    if gamma.is_empty() {
        return Ok(None);
    }
    let mut cells = BTreeSet::new();
    for t in gamma {
        let set = u
            .sets
            .get(t)
            .ok_or_else(|| Error::pre(format!("index cell {t} outside the family domain")))?;
        cells.extend(set.cells().iter().cloned());
    }
    MinSet::try_new(vt, cells)
}

/// `[U]`: every union over a nonempty index subset that admits a minimum,
/// duplicate-free, in canonical order. The domain must be small enough to
/// enumerate its power set.
pub fn span_u(vt: &VectorTree, u: &UFamily) -> Result<Vec<MinSet>> {
    let domain = u.domain();
    if domain.len() > 20 {
        return Err(Error::range(format!(
            "family domain of {} cells is too large to span exhaustively",
            domain.len()
        )));
    }
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << domain.len()) {
        let gamma: BTreeSet<Cell> = domain
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, c)| c.clone())
            .collect();
        if let Some(ms) = union_span(vt, u, &gamma)? {
            out.push(ms);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Span elements whose cells all sit below `depth`.
pub fn span_u_within(vt: &VectorTree, u: &UFamily, depth: usize) -> Result<Vec<MinSet>> {
    Ok(span_u(vt, u)?
        .into_iter()
        .filter(|ms| ms.max_level() < depth)
        .collect())
}

/// The relativization of a family base at an anchor cell `t`: the anchor
/// is the root of an induced vector tree whose higher levels are the
/// occupied base levels above `t`, which must contain every descendant of
/// `t` there (full relative levels). Words on the strict successors live
/// on relative levels `[1, height)`.
#[derive(Debug, Clone)]
pub struct Relativization {
    pub anchor: Cell,
    pub rel_tree: VectorTree,
    /// relative level -> host level; entry 0 is the anchor's level.
    pub level_map: Vec<usize>,
}

impl Relativization {
    pub fn above(vt: &VectorTree, base: &VectorSubset, t: &Cell) -> Result<Self> {
        vt.check_cell(t)?;
        if !base.contains_cell(t) {
            return Err(Error::pre(format!("anchor {t} is not an index cell")));
        }
        let mut level_map = vec![t.level];
        level_map.extend(base.occupied_levels().into_iter().filter(|&l| l > t.level));
        if level_map.len() == 1 {
            return Err(Error::structure("no occupied base levels above the anchor"));
        }
        // every descendant of the anchor must be present at each level
        for &host_level in &level_map[1..] {
            let coords = &base.levels[&host_level];
            for (i, tree) in vt.trees().iter().enumerate() {
                let range =
                    tree.descendant_range(NodeRef::new(t.level, t.indices[i]), host_level)?;
                for idx in range {
                    if !coords[i].contains(&idx) {
                        return Err(Error::structure(format!(
                            "base is not full above the anchor at level {host_level}"
                        )));
                    }
                }
            }
        }
        let mut trees = Vec::with_capacity(vt.dim());
        for tree in vt.trees() {
            let branching = level_map
                .windows(2)
                .map(|w| tree.stride(w[0], w[1]))
                .collect();
            trees.push(Tree::new(branching)?);
        }
        Ok(Relativization {
            anchor: t.clone(),
            rel_tree: VectorTree::new(trees)?,
            level_map,
        })
    }

    pub fn height(&self) -> usize {
        self.level_map.len()
    }

    /// Number of relative levels strictly above the anchor.
    pub fn levels_above(&self) -> usize {
        self.level_map.len() - 1
    }

    /// Maps a relativized cell to its host cell.
    pub fn to_host(&self, vt: &VectorTree, rel: &Cell) -> Result<Cell> {
        if rel.level >= self.level_map.len() {
            return Err(Error::range(format!(
                "relative level {} outside the relativization",
                rel.level
            )));
        }
        let host_level = self.level_map[rel.level];
        let indices = rel
            .indices
            .iter()
            .enumerate()
            .map(|(i, &idx)| {
                let stride = vt.tree(i).stride(self.anchor.level, host_level);
                self.anchor.indices[i] * stride + idx
            })
            .collect();
        Ok(Cell::new(host_level, indices))
    }
}

/// The reduction map `Q`: a two-letter word `f` on the relativized level
/// product selects which family sets join `U_t`; the result always has
/// minimum `t`.
pub fn reduction_q(
    vt: &VectorTree,
    u: &UFamily,
    rel: &Relativization,
    f: &ConstantWord,
) -> Result<MinSet> {
    let t = &rel.anchor;
    let base_set = u
        .sets
        .get(t)
        .ok_or_else(|| Error::pre(format!("anchor {t} outside the family domain")))?;
    let mut cells: BTreeSet<Cell> = base_set.cells().iter().cloned().collect();
    if !f.is_empty() {
        let rel_cells = rel.rel_tree.range_cells(f.bt(), f.tp())?;
        for (cell, &letter) in rel_cells.iter().zip(f.letters()) {
            if letter > 1 {
                return Err(Error::pre("reduction expects a two-letter word"));
            }
            if letter == 1 {
                let host = rel.to_host(vt, cell)?;
                let set = u.sets.get(&host).ok_or_else(|| {
                    Error::pre(format!("selected cell {host} outside the family domain"))
                })?;
                cells.extend(set.cells().iter().cloned());
            }
        }
    }
    MinSet::new(vt, cells)
}

/// First pair of span elements (within `depth`) sharing a minimum but not
/// a color; `None` when the coloring is min-determined on the checked span.
pub fn min_determined_check<F>(
    vt: &VectorTree,
    u: &UFamily,
    coloring: F,
    depth: usize,
) -> Result<Option<(MinSet, MinSet)>>
where
    F: Fn(&MinSet) -> Result<u32>,
{
    let span = span_u_within(vt, u, depth)?;
    let mut first_by_min: BTreeMap<Cell, (MinSet, u32)> = BTreeMap::new();
    for v in span {
        let color = coloring(&v)?;
        match first_by_min.get(v.minimum()) {
            None => {
                first_by_min.insert(v.minimum().clone(), (v, color));
            }
            Some((anchor_set, anchor_color)) => {
                if *anchor_color != color {
                    return Ok(Some((anchor_set.clone(), v)));
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone)]
pub enum MinFixOutcome {
    /// The regrouped family: every span element rooted at the anchor is
    /// one color.
    Witness { family: UFamily, color: u32 },
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct MinFixCertificate {
    pub outcome: MinFixOutcome,
    pub stats: SearchStats,
}

/// Finite min-fixing step: pull the set coloring back through `Q` to a
/// two-letter word coloring on the relativized tree, search for a
/// length-`q` monochromatic-span subspace, and regroup the family along
/// the witness blocks (letter-1 cells absorb into the anchor's set,
/// letter-0 cells drop, variable cells merge per support cell).
pub fn fix_min_step<F>(
    vt: &VectorTree,
    u: &UFamily,
    coloring: F,
    t: &Cell,
    q: usize,
) -> Result<MinFixCertificate>
where
    F: Fn(&MinSet) -> Result<u32> + Send + Sync,
{
    let rel = Relativization::above(vt, &u.base, t)?;
    if rel.levels_above() < q {
        return Ok(MinFixCertificate {
            outcome: MinFixOutcome::Exhausted,
            stats: SearchStats::default(),
        });
    }
    // the word space sits on the strict successors: anchor level excluded
    let two = Alphabet::new(2)?;
    let x = crate::word::canonical_subspace(&rel.rel_tree, &two, 0, 1, q)?;
    let pulled = {
        let vt = vt.clone();
        let u = u.clone();
        let rel = rel.clone();
        move |w: &ConstantWord| -> Result<u32> { coloring(&reduction_q(&vt, &u, &rel, w)?) }
    };
    let cert = tree_hj_search(&rel.rel_tree, &two, pulled, &x, q)?;
    let stats = cert.stats;
    match cert.outcome {
        TreeHjOutcome::Exhausted => Ok(MinFixCertificate {
            outcome: MinFixOutcome::Exhausted,
            stats,
        }),
        TreeHjOutcome::Witness { x: witness, color } => {
            let family = regroup_family(vt, u, &rel, &witness)?;
            Ok(MinFixCertificate {
                outcome: MinFixOutcome::Witness { family, color },
                stats,
            })
        }
    }
}

/// Builds the repaired family from a monochromatic witness subspace on
/// the relativization: base levels at or below the anchor are kept, the
/// levels above are replaced by the witness supports; sets not above the
/// anchor are kept as they are.
fn regroup_family(
    vt: &VectorTree,
    u: &UFamily,
    rel: &Relativization,
    witness: &crate::word::FiniteSubspace,
) -> Result<UFamily> {
    let t = &rel.anchor;
    let mut anchor_cells: BTreeSet<Cell> = u.sets[t].cells().iter().cloned().collect();
    // grouped[s] = union of family sets over the occurrence cells of v_s
    let mut grouped: BTreeMap<Cell, BTreeSet<Cell>> = BTreeMap::new();
    let mut support_levels: BTreeSet<usize> = BTreeSet::new();
    for block in &witness.blocks {
        let support_cells = block.support().cells();
        let host_level = rel.level_map[block.support().level];
        support_levels.insert(host_level);
        let rel_cells = rel.rel_tree.range_cells(block.bt(), block.tp())?;
        for (cell, sym) in rel_cells.iter().zip(block.symbols()) {
            let host = rel.to_host(vt, cell)?;
            match sym {
                Symbol::Letter(1) => {
                    anchor_cells.extend(u.sets[&host].cells().iter().cloned());
                }
                Symbol::Letter(_) => {}
                Symbol::Var(r) => {
                    let s_host = rel.to_host(vt, &support_cells[*r as usize])?;
                    grouped
                        .entry(s_host)
                        .or_default()
                        .extend(u.sets[&host].cells().iter().cloned());
                }
            }
        }
    }
    // new base: levels <= anchor level unchanged, witness support levels
    // above; at those levels keep non-descendants plus the support cells
    let mut new_base = VectorSubset::new();
    for (&level, coords) in &u.base.levels {
        if level <= t.level {
            new_base.levels.insert(level, coords.clone());
        }
    }
    for &host_level in &support_levels {
        let old = &u.base.levels[&host_level];
        let mut coords: Vec<BTreeSet<usize>> = Vec::with_capacity(vt.dim());
        for (i, tree) in vt.trees().iter().enumerate() {
            let desc = tree.descendant_range(NodeRef::new(t.level, t.indices[i]), host_level)?;
            let mut keep: BTreeSet<usize> = old[i]
                .iter()
                .copied()
                .filter(|idx| !desc.contains(idx))
                .collect();
            for s in grouped.keys() {
                if s.level == host_level {
                    keep.insert(s.indices[i]);
                }
            }
            coords.push(keep);
        }
        new_base.levels.insert(host_level, coords);
    }
    // assemble the sets over the new index cells
    let mut sets: BTreeMap<Cell, MinSet> = BTreeMap::new();
    for cell in new_base.all_cells() {
        if cell == *t {
            sets.insert(cell.clone(), MinSet::new(vt, anchor_cells.clone())?);
        } else if let Some(members) = grouped.get(&cell) {
            sets.insert(cell.clone(), MinSet::new(vt, members.clone())?);
        } else if let Some(existing) = u.sets.get(&cell) {
            sets.insert(cell.clone(), existing.clone());
        } else {
            return Err(Error::structure(format!(
                "regrouped base produced an unindexed cell {cell}"
            )));
        }
    }
    UFamily::new(vt, new_base, sets)
}

/// Independent check for the repaired family: every span element rooted
/// at the anchor carries one color.
pub fn validate_min_fix_witness<F>(
    vt: &VectorTree,
    family: &UFamily,
    coloring: F,
    t: &Cell,
    color: u32,
) -> Result<bool>
where
    F: Fn(&MinSet) -> Result<u32>,
{
    for v in span_u(vt, family)? {
        if v.minimum() == t && coloring(&v)? != color {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HlBranch {
    /// Dense pattern, all cells color 1.
    Dense,
    /// Anchor-relative dense pattern, all cells color 0.
    TDense { anchor: Cell },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HlOutcome {
    Witness {
        branch: HlBranch,
        subset: VectorSubset,
        color: u32,
    },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlCertificate {
    pub outcome: HlOutcome,
    pub stats: SearchStats,
}

/// Finite Halpern-Lauchli search on a cell coloring of `⊗D`: branch (i)
/// looks for a vector subset of `D` on `m` levels, dense up to `m`, with
/// all cells color 1; branch (ii) relativizes to an anchor cell and asks
/// for color 0. Within a level pattern the levels are independent, and
/// shrinking a witness preserves it, so searching images of extension
/// choices (minimal dominating sets) is exhaustive.
pub fn hl_search<F>(
    vt: &VectorTree,
    coloring: F,
    d: &VectorSubset,
    m: usize,
) -> Result<HlCertificate>
where
    F: Fn(&Cell) -> Result<u32> + Send + Sync,
{
    if m == 0 {
        return Err(Error::pre("hl_search needs m >= 1"));
    }
    d.validate(vt)?;
    let mut stats = SearchStats::default();
    // branch (i): dense in the whole tree, color 1
    let levels = d.occupied_levels();
    for pattern in combinations(&levels, m) {
        stats.candidates += 1;
        if let Some(subset) = dense_witness_for_pattern(vt, &coloring, d, &pattern, None, 1)? {
            return Ok(HlCertificate {
                outcome: HlOutcome::Witness {
                    branch: HlBranch::Dense,
                    subset,
                    color: 1,
                },
                stats,
            });
        }
    }
    // branch (ii): anchor-relative density, color 0
    for anchor_level in 0..vt.height() {
        for anchor in vt.level_cells(anchor_level)? {
            let usable: Vec<usize> =
                levels.iter().copied().filter(|&l| l >= anchor_level).collect();
            for pattern in combinations(&usable, m) {
                stats.candidates += 1;
                if let Some(subset) =
                    dense_witness_for_pattern(vt, &coloring, d, &pattern, Some(&anchor), 0)?
                {
                    return Ok(HlCertificate {
                        outcome: HlOutcome::Witness {
                            branch: HlBranch::TDense { anchor },
                            subset,
                            color: 0,
                        },
                        stats,
                    });
                }
            }
        }
    }
    Ok(HlCertificate {
        outcome: HlOutcome::Exhausted,
        stats,
    })
}

/// Searches one level pattern: for each pattern position `j` the chosen
/// per-coordinate sets must dominate the (anchor-relative) level-`j`
/// targets and give a monochromatic product. Levels are independent, so
/// the first valid tuple per level assembles the witness.
fn dense_witness_for_pattern<F>(
    vt: &VectorTree,
    coloring: &F,
    d: &VectorSubset,
    pattern: &[usize],
    anchor: Option<&Cell>,
    color: u32,
) -> Result<Option<VectorSubset>>
where
    F: Fn(&Cell) -> Result<u32>,
{
    let anchor_level = anchor.map_or(0, |a| a.level);
    let mut chosen: Vec<(usize, Vec<BTreeSet<usize>>)> = Vec::with_capacity(pattern.len());
    for (j, &level) in pattern.iter().enumerate() {
        let target_level = anchor_level + j;
        if target_level >= vt.height() || level < target_level {
            return Ok(None);
        }
        // per-coordinate candidates: images of "one extension per target"
        let mut per_coord: Vec<Vec<BTreeSet<usize>>> = Vec::with_capacity(vt.dim());
        for (i, tree) in vt.trees().iter().enumerate() {
            let pool: Vec<usize> = match anchor {
                None => d.levels[&level][i].iter().copied().collect(),
                Some(a) => {
                    let desc = tree.descendant_range(NodeRef::new(a.level, a.indices[i]), level)?;
                    d.levels[&level][i]
                        .iter()
                        .copied()
                        .filter(|idx| desc.contains(idx))
                        .collect()
                }
            };
            let targets: Vec<usize> = match anchor {
                None => (0..tree.level_size(target_level)?).collect(),
                Some(a) => tree
                    .descendant_range(NodeRef::new(a.level, a.indices[i]), target_level)?
                    .collect(),
            };
            let candidates = dominating_images(tree, &targets, target_level, &pool, level);
            if candidates.is_empty() {
                return Ok(None);
            }
            per_coord.push(candidates);
        }
        // first tuple whose product is monochromatic
        let mut pick = vec![0usize; vt.dim()];
        let found = 'tuples: loop {
            let tuple: Vec<BTreeSet<usize>> = pick
                .iter()
                .enumerate()
                .map(|(i, &p)| per_coord[i][p].clone())
                .collect();
            if product_is_monochromatic(coloring, level, &tuple, color)? {
                break 'tuples Some(tuple);
            }
            let mut i = vt.dim();
            loop {
                if i == 0 {
                    break 'tuples None;
                }
                i -= 1;
                pick[i] += 1;
                if pick[i] < per_coord[i].len() {
                    break;
                }
                pick[i] = 0;
            }
        };
        match found {
            Some(tuple) => chosen.push((level, tuple)),
            None => return Ok(None),
        }
    }
    let mut subset = VectorSubset::new();
    for (level, coords) in chosen {
        subset.levels.insert(level, coords);
    }
    Ok(Some(subset))
}

/// Images of every "extension per target" choice, duplicate-free, in
/// choice order. Each image dominates the targets by construction, and
/// any dominating subset of the pool contains one.
fn dominating_images(
    tree: &Tree,
    targets: &[usize],
    target_level: usize,
    pool: &[usize],
    level: usize,
) -> Vec<BTreeSet<usize>> {
    let mut extension_lists: Vec<Vec<usize>> = Vec::with_capacity(targets.len());
    for &u in targets {
        let range = match tree.descendant_range(NodeRef::new(target_level, u), level) {
            Ok(r) => r,
            Err(_) => return Vec::new(),
        };
        let exts: Vec<usize> = pool.iter().copied().filter(|idx| range.contains(idx)).collect();
        if exts.is_empty() {
            return Vec::new();
        }
        extension_lists.push(exts);
    }
    let mut images = Vec::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut pick = vec![0usize; targets.len()];
    loop {
        let image: BTreeSet<usize> = pick
            .iter()
            .enumerate()
            .map(|(i, &p)| extension_lists[i][p])
            .collect();
        let key: Vec<usize> = image.iter().copied().collect();
        if seen.insert(key) {
            images.push(image);
        }
        let mut i = targets.len();
        loop {
            if i == 0 {
                return images;
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < extension_lists[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

fn product_is_monochromatic<F>(
    coloring: &F,
    level: usize,
    coords: &[BTreeSet<usize>],
    color: u32,
) -> Result<bool>
where
    F: Fn(&Cell) -> Result<u32>,
{
    let lists: Vec<Vec<usize>> = coords.iter().map(|c| c.iter().copied().collect()).collect();
    let mut pick = vec![0usize; lists.len()];
    loop {
        let cell = Cell::new(
            level,
            pick.iter().enumerate().map(|(i, &p)| lists[i][p]).collect(),
        );
        if coloring(&cell)? != color {
            return Ok(false);
        }
        let mut i = lists.len();
        loop {
            if i == 0 {
                return Ok(true);
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < lists[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Independent density and color re-validation for an HL witness.
pub fn validate_hl_witness<F>(
    vt: &VectorTree,
    coloring: &F,
    outcome: &HlOutcome,
    m: usize,
) -> Result<bool>
where
    F: Fn(&Cell) -> Result<u32>,
{
    let HlOutcome::Witness {
        branch,
        subset,
        color,
    } = outcome
    else {
        return Ok(true);
    };
    subset.validate(vt)?;
    for cell in subset.all_cells() {
        if coloring(&cell)? != *color {
            return Ok(false);
        }
    }
    for (i, tree) in vt.trees().iter().enumerate() {
        let nodes = subset.coordinate_nodes(i);
        let ok = match branch {
            HlBranch::Dense => tree.is_dense_upto(&nodes, m)?,
            HlBranch::TDense { anchor } => {
                tree.is_t_dense_upto(&nodes, NodeRef::new(anchor.level, anchor.indices[i]), m)?
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All size-`m` ascending selections from `items`, lexicographically.
fn combinations(items: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 || m > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < items.len() - (m - i) {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum DuOutcome {
    Witness {
        branch: HlBranch,
        family: UFamily,
        color: u32,
    },
    Exhausted,
}

#[derive(Debug, Clone)]
pub struct DuCertificate {
    pub outcome: DuOutcome,
    pub stats: SearchStats,
    pub notes: Vec<String>,
}

/// The disjoint-union pipeline: canonicalize the coloring to depend only
/// on minima (repairing violations with the min-fixing step, inside a
/// budget), push the induced cell coloring through the Halpern-Lauchli
/// search, lift the witness back to a sub-family, and re-validate the
/// lifted span.
pub fn disjoint_union_search<F>(
    vt: &VectorTree,
    u: &UFamily,
    coloring: F,
    depth: usize,
    m: usize,
) -> Result<DuCertificate>
where
    F: Fn(&MinSet) -> Result<u32> + Send + Sync,
{
    let mut stats = SearchStats::default();
    let mut notes = Vec::new();
    let mut current = u.clone();
    // stage 1: min-determinedness, with repair budget = |domain|
    let mut budget = current.domain().len();
    loop {
        let violation = min_determined_check(vt, &current, &coloring, depth)?;
        let Some((a, b)) = violation else {
            break;
        };
        if budget == 0 {
            notes.push(format!(
                "repair budget exhausted; coloring not min-determined at {}",
                a.minimum()
            ));
            return Ok(DuCertificate {
                outcome: DuOutcome::Exhausted,
                stats,
                notes,
            });
        }
        budget -= 1;
        let t = a.minimum().clone();
        let step = fix_min_step(vt, &current, &coloring, &t, 1)?;
        stats.merge(step.stats);
        match step.outcome {
            MinFixOutcome::Witness { family, color } => {
                if !validate_min_fix_witness(vt, &family, &coloring, &t, color)? {
                    notes.push(format!("repair at {t} failed independent validation"));
                    return Ok(DuCertificate {
                        outcome: DuOutcome::Exhausted,
                        stats,
                        notes,
                    });
                }
                notes.push(format!("repaired min-determinedness at {t}"));
                current = family;
            }
            MinFixOutcome::Exhausted => {
                notes.push(format!(
                    "no repair found at {t} (violating pair {} / {})",
                    a.encode(),
                    b.encode()
                ));
                return Ok(DuCertificate {
                    outcome: DuOutcome::Exhausted,
                    stats,
                    notes,
                });
            }
        }
    }
    // stage 2: induced cell coloring via the family's own representatives
    let induced = {
        let current = current.clone();
        let coloring = &coloring;
        move |s: &Cell| -> Result<u32> {
            let set = current.sets.get(s).ok_or_else(|| {
                Error::input(format!("induced coloring asked outside the domain: {s}"))
            })?;
            coloring(set)
        }
    };
    // stage 3: Halpern-Lauchli on the induced coloring
    let hl = hl_search(vt, &induced, &current.base, m)?;
    stats.merge(hl.stats);
    let HlOutcome::Witness {
        branch,
        subset,
        color,
    } = hl.outcome
    else {
        notes.push("halpern-lauchli stage exhausted".to_string());
        return Ok(DuCertificate {
            outcome: DuOutcome::Exhausted,
            stats,
            notes,
        });
    };
    // stage 4: lift and re-validate on the checked span
    let lifted = current.restrict(vt, &subset)?;
    for v in span_u_within(vt, &lifted, depth)? {
        if coloring(&v)? != color {
            notes.push(format!(
                "lifted witness failed span validation at {}",
                v.encode()
            ));
            return Ok(DuCertificate {
                outcome: DuOutcome::Exhausted,
                stats,
                notes,
            });
        }
    }
    Ok(DuCertificate {
        outcome: DuOutcome::Witness {
            branch,
            family: lifted,
            color,
        },
        stats,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolkmanOutcome {
    /// Pairwise disjoint nonempty parts, every nonempty-index union one
    /// color; lexicographically least as ascending bitmask tuples.
    Witness { parts: Vec<u32>, color: u32 },
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolkmanCertificate {
    pub outcome: FolkmanOutcome,
    pub stats: SearchStats,
}

/// Exhaustive search for a monochromatic disjoint-union family of `k`
/// parts inside a ground set of the given size. Subsets are bitmasks.
pub fn folkman_search<F>(ground_size: usize, k: usize, coloring: F) -> Result<FolkmanCertificate>
where
    F: Fn(u32) -> Result<u32>,
{
    if ground_size == 0 || k == 0 {
        return Err(Error::pre("folkman_search needs ground_size, k >= 1"));
    }
    if ground_size > 20 {
        return Err(Error::range("ground set too large for exhaustive search"));
    }
    let mut stats = SearchStats::default();
    let full = (1u32 << ground_size) - 1;
    let mut parts: Vec<u32> = Vec::with_capacity(k);
    let hit = folkman_rec(full, k, 1, &mut parts, &coloring, &mut stats)?;
    Ok(FolkmanCertificate {
        outcome: match hit {
            Some((parts, color)) => FolkmanOutcome::Witness { parts, color },
            None => FolkmanOutcome::Exhausted,
        },
        stats,
    })
}

fn folkman_rec<F>(
    full: u32,
    k: usize,
    from: u32,
    parts: &mut Vec<u32>,
    coloring: &F,
    stats: &mut SearchStats,
) -> Result<Option<(Vec<u32>, u32)>>
where
    F: Fn(u32) -> Result<u32>,
{
    if parts.len() == k {
        stats.candidates += 1;
        let mut color = None;
        for sel in 1u32..(1 << k) {
            let mut union = 0u32;
            for (i, &p) in parts.iter().enumerate() {
                if sel & (1 << i) != 0 {
                    union |= p;
                }
            }
            let c = coloring(union)?;
            match color {
                None => color = Some(c),
                Some(prev) if prev != c => return Ok(None),
                Some(_) => {}
            }
        }
        return Ok(Some((parts.clone(), color.expect("k >= 1"))));
    }
    let used: u32 = parts.iter().copied().fold(0, |a, b| a | b);
    for mask in from..=full {
        if mask & used != 0 {
            continue;
        }
        parts.push(mask);
        if let Some(hit) = folkman_rec(full, k, mask + 1, parts, coloring, stats)? {
            return Ok(Some(hit));
        }
        parts.pop();
    }
    Ok(None)
}

/// Recomputes all `2^k - 1` union colors of a claimed witness.
pub fn validate_folkman_witness<F>(parts: &[u32], color: u32, coloring: F) -> Result<bool>
where
    F: Fn(u32) -> Result<u32>,
{
    for (i, a) in parts.iter().enumerate() {
        if *a == 0 {
            return Ok(false);
        }
        for b in &parts[i + 1..] {
            if a & b != 0 {
                return Ok(false);
            }
        }
    }
    for sel in 1u32..(1 << parts.len()) {
        let mut union = 0u32;
        for (i, &p) in parts.iter().enumerate() {
            if sel & (1 << i) != 0 {
                union |= p;
            }
        }
        if coloring(union)? != color {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An explicit coloring of the nonempty subsets of `{0..n-1}`, indexed by
/// `mask - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetColoringTable {
    pub n: usize,
    pub colors: Vec<u32>,
}

impl SubsetColoringTable {
    pub fn color_of(&self, mask: u32) -> u32 {
        self.colors[(mask - 1) as usize]
    }

    /// `<elements> <color>` lines, elements ascending joined by commas.
    pub fn render(&self) -> Vec<String> {
        (1u32..(1u32 << self.n))
            .map(|mask| {
                let elems: Vec<String> = (0..self.n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| i.to_string())
                    .collect();
                format!("{} {}", elems.join(","), self.color_of(mask))
            })
            .collect()
    }

    pub fn admits_witness(&self, k: usize) -> Result<bool> {
        let cert = folkman_search(self.n, k, |m| Ok(self.color_of(m)))?;
        Ok(matches!(cert.outcome, FolkmanOutcome::Witness { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FolkmanNumberOutcome {
    Resolved {
        n: usize,
        avoiding_prev: Option<SubsetColoringTable>,
    },
    Unresolved {
        n_max: usize,
        avoiding: Option<SubsetColoringTable>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolkmanNumberCertificate {
    pub outcome: FolkmanNumberOutcome,
    pub stats: SearchStats,
}

/// Computes the least ground size (up to `n_max`) forcing a monochromatic
/// `k`-family under every `c`-coloring, exhaustively over colorings with
/// the first singleton's color pinned.
pub fn folkman_number(k: usize, c: usize, n_max: usize) -> Result<FolkmanNumberCertificate> {
    if k == 0 || c == 0 || n_max == 0 {
        return Err(Error::pre("folkman_number needs k, c, n_max >= 1"));
    }
    if n_max > 5 && c > 1 {
        return Err(Error::range(
            "coloring space beyond ground size 5 exceeds the exhaustive budget",
        ));
    }
    let mut stats = SearchStats::default();
    let mut prev: Option<SubsetColoringTable> = None;
    for n in 1..=n_max {
        let subsets = (1usize << n) - 1;
        let families = enumerate_folkman_families(n, k);
        let (avoiding, scan) = if families.is_empty() {
            // no family fits in this ground set: the all-zero coloring avoids
            (
                Some(SubsetColoringTable {
                    n,
                    colors: vec![0; subsets],
                }),
                SearchStats::default(),
            )
        } else {
            scan_subset_colorings(n, c, &families)
        };
        stats.merge(scan);
        match avoiding {
            Some(table) => prev = Some(table),
            None => {
                return Ok(FolkmanNumberCertificate {
                    outcome: FolkmanNumberOutcome::Resolved {
                        n,
                        avoiding_prev: prev,
                    },
                    stats,
                });
            }
        }
    }
    Ok(FolkmanNumberCertificate {
        outcome: FolkmanNumberOutcome::Unresolved {
            n_max,
            avoiding: prev,
        },
        stats,
    })
}

/// All `k`-families as union-mask lists: for each ascending tuple of
/// pairwise disjoint nonempty parts, the `2^k - 1` union masks.
fn enumerate_folkman_families(n: usize, k: usize) -> Vec<Vec<u32>> {
    let full = (1u32 << n) - 1;
    let mut out = Vec::new();
    let mut parts = Vec::with_capacity(k);
    collect_families(full, k, 1, &mut parts, &mut out);
    out
}

fn collect_families(full: u32, k: usize, from: u32, parts: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts.len() == k {
        let mut unions = Vec::with_capacity((1 << k) - 1);
        for sel in 1u32..(1 << k) {
            let mut u = 0u32;
            for (i, &p) in parts.iter().enumerate() {
                if sel & (1 << i) != 0 {
                    u |= p;
                }
            }
            unions.push(u);
        }
        out.push(unions);
        return;
    }
    let used: u32 = parts.iter().copied().fold(0, |a, b| a | b);
    for mask in from..=full {
        if mask & used != 0 {
            continue;
        }
        parts.push(mask);
        collect_families(full, k, mask + 1, parts, out);
        parts.pop();
    }
}

/// Scans all `c`-colorings (first subset pinned to color 0) for one where
/// no family is monochromatic. Two-color scans read the coloring straight
/// off the counter bits; wider palettes decode base-`c` digits.
fn scan_subset_colorings(
    n: usize,
    c: usize,
    families: &[Vec<u32>],
) -> (Option<SubsetColoringTable>, SearchStats) {
    let subsets = (1usize << n) - 1;
    let free = subsets - 1;
    let total = (c as u64).saturating_pow(free as u32);
    let shards = exec::chunk_ranges(total, 1024);
    let results = exec::map_shards(shards, |(lo, hi)| {
        let mut examined = 0u64;
        let mut found: Option<u64> = None;
        if c == 2 {
            'outer2: for counter in lo..hi {
                examined += 1;
                let colors = (counter << 1) as u32; // bit (mask-1) = color of mask
                for fam in families {
                    let first = (colors >> (fam[0] - 1)) & 1;
                    if fam[1..].iter().all(|&u| (colors >> (u - 1)) & 1 == first) {
                        continue 'outer2;
                    }
                }
                found = Some(counter);
                break;
            }
        } else {
            'outer: for counter in lo..hi {
                examined += 1;
                for fam in families {
                    let first = subset_color(counter, c, fam[0]);
                    if fam[1..].iter().all(|&u| subset_color(counter, c, u) == first) {
                        continue 'outer;
                    }
                }
                found = Some(counter);
                break;
            }
        }
        (found, examined)
    });
    let mut stats = SearchStats::default();
    let mut hit = None;
    for (found, examined) in results {
        stats.candidates += examined;
        if hit.is_none() {
            hit = found;
        }
    }
    stats.prunes = total.saturating_mul(factorial(c).saturating_sub(1));
    let table = hit.map(|counter| {
        let colors = (1..=subsets as u32)
            .map(|mask| subset_color(counter, c, mask))
            .collect();
        SubsetColoringTable { n, colors }
    });
    (table, stats)
}

fn subset_color(counter: u64, c: usize, mask: u32) -> u32 {
    if mask == 1 {
        return 0;
    }
    let mut v = counter;
    for _ in 2..mask {
        v /= c as u64;
    }
    (v % c as u64) as u32
}

fn factorial(r: usize) -> u64 {
    (1..=r as u64).product()
}

/// The pair coloring from the multidimensional counterexample: the size
/// of `U1`'s slice at the level of `min U2`, modulo 2. Host is d=1.
pub fn counterexample_color(vt: &VectorTree, u1: &MinSet, u2: &MinSet) -> Result<u32> {
    if vt.dim() != 1 {
        return Err(Error::pre("pair coloring is defined for d=1 hosts"));
    }
    if !u1.is_disjoint(u2) {
        return Err(Error::pre("pair coloring needs disjoint sets"));
    }
    if !vt.cell_leq(u1.minimum(), u2.minimum())? {
        return Err(Error::pre("pair coloring needs min U1 <= min U2"));
    }
    Ok((u1.count_at_level(u2.minimum().level) % 2) as u32)
}

/// A strong subtree of a d=1 host: sparse levels, one root, and every
/// node realizing each of its immediate-successor directions exactly once
/// at the next chosen level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongSubtree {
    pub levels: Vec<usize>,
    pub nodes: Vec<Vec<usize>>,
}

impl StrongSubtree {
    pub fn validate(&self, tree: &Tree) -> Result<()> {
        if self.levels.is_empty() || self.levels.len() != self.nodes.len() {
            return Err(Error::structure("levels and node lists must align"));
        }
        if self.nodes[0].len() != 1 {
            return Err(Error::structure("strong subtree needs a unique root"));
        }
        for w in self.levels.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::structure("levels must increase"));
            }
        }
        for (li, level) in self.levels.iter().enumerate() {
            for &idx in &self.nodes[li] {
                tree.check_node(NodeRef::new(*level, idx))?;
            }
            if li + 1 == self.levels.len() {
                continue;
            }
            let next_level = self.levels[li + 1];
            for &idx in &self.nodes[li] {
                let b = tree.branching()[*level];
                for dir in 0..b {
                    let child = NodeRef::new(level + 1, idx * b + dir);
                    let count = self.nodes[li + 1]
                        .iter()
                        .filter(|&&n| {
                            tree.descendant_range(child, next_level)
                                .map(|r| r.contains(&n))
                                .unwrap_or(false)
                        })
                        .count();
                    if count != 1 {
                        return Err(Error::structure(format!(
                            "direction {dir} of node {idx}@{level} realized {count} times"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn all_nodes(&self) -> Vec<NodeRef> {
        let mut out = Vec::new();
        for (li, level) in self.levels.iter().enumerate() {
            for &idx in &self.nodes[li] {
                out.push(NodeRef::new(*level, idx));
            }
        }
        out
    }
}

/// Every strong subtree of the given height with levels below `depth`.
pub fn enumerate_strong_subtrees(
    tree: &Tree,
    height: usize,
    depth: usize,
) -> Result<Vec<StrongSubtree>> {
    let depth = depth.min(tree.height());
    if height == 0 || height > depth {
        return Ok(Vec::new());
    }
    let all_levels: Vec<usize> = (0..depth).collect();
    let mut out = Vec::new();
    for levels in combinations(&all_levels, height) {
        for root in 0..tree.level_size(levels[0])? {
            let mut partial: Vec<Vec<Vec<usize>>> = vec![vec![vec![root]]];
            for li in 1..height {
                let mut next_partial = Vec::new();
                for prefix in &partial {
                    // one descendant per immediate-successor direction of
                    // every node one pattern level down
                    let mut slots: Vec<Vec<usize>> = Vec::new();
                    for &idx in prefix[li - 1].iter() {
                        let level = levels[li - 1];
                        let b = tree.branching()[level];
                        for dir in 0..b {
                            let child = NodeRef::new(level + 1, idx * b + dir);
                            let range = tree.descendant_range(child, levels[li])?;
                            slots.push(range.collect());
                        }
                    }
                    let mut pick = vec![0usize; slots.len()];
                    loop {
                        let mut chosen = prefix.clone();
                        chosen
                            .push(pick.iter().enumerate().map(|(i, &p)| slots[i][p]).collect());
                        next_partial.push(chosen);
                        let mut i = slots.len();
                        let mut done = false;
                        loop {
                            if i == 0 {
                                done = true;
                                break;
                            }
                            i -= 1;
                            pick[i] += 1;
                            if pick[i] < slots[i].len() {
                                break;
                            }
                            pick[i] = 0;
                        }
                        if done {
                            break;
                        }
                    }
                }
                partial = next_partial;
            }
            for nodes in partial {
                let st = StrongSubtree {
                    levels: levels.clone(),
                    nodes,
                };
                st.validate(tree)?;
                out.push(st);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub verified: bool,
    /// Encoding of the first failing (subtree, family) instance.
    pub failing: Option<String>,
    pub stats: SearchStats,
    pub set_size_cap: usize,
}

/// Checks that for every strong subtree of the given height (levels below
/// `depth`) and every family of pairwise disjoint min-rooted sets indexed
/// by its nodes (each set drawn from the node's successors, at most
/// `set_size_cap` cells), the pair coloring attains both colors over the
/// disjoint comparable pairs of the family span.
pub fn verify_counterexample(
    tree: &Tree,
    subtree_height: usize,
    depth: usize,
    set_size_cap: usize,
) -> Result<CounterexampleReport> {
    if subtree_height == 0 {
        return Err(Error::pre("subtree height must be >= 1"));
    }
    if set_size_cap == 0 {
        return Err(Error::pre("set size cap must be >= 1"));
    }
    let vt = VectorTree::new(vec![tree.clone()])?;
    let mut stats = SearchStats::default();
    if subtree_height == 1 {
        // no pair with distinct minima at two subtree levels
        return Ok(CounterexampleReport {
            verified: true,
            failing: None,
            stats,
            set_size_cap,
        });
    }
    let subtrees = enumerate_strong_subtrees(tree, subtree_height, depth)?;
    let results = exec::map_shards(subtrees, |st| -> Result<(Option<String>, SearchStats)> {
        let mut local = SearchStats::default();
        let nodes = st.all_nodes();
        let mut family: Vec<(Cell, BTreeSet<Cell>)> = Vec::new();
        let fail = family_rec(
            &vt,
            tree,
            &nodes,
            0,
            depth,
            set_size_cap,
            &mut family,
            &mut local,
            &st,
        )?;
        Ok((fail, local))
    });
    for res in results {
        let (fail, local) = res?;
        stats.merge(local);
        if let Some(f) = fail {
            return Ok(CounterexampleReport {
                verified: false,
                failing: Some(f),
                stats,
                set_size_cap,
            });
        }
    }
    Ok(CounterexampleReport {
        verified: true,
        failing: None,
        stats,
        set_size_cap,
    })
}

#[allow(clippy::too_many_arguments)]
fn family_rec(
    vt: &VectorTree,
    tree: &Tree,
    nodes: &[NodeRef],
    at: usize,
    depth: usize,
    cap: usize,
    family: &mut Vec<(Cell, BTreeSet<Cell>)>,
    stats: &mut SearchStats,
    st: &StrongSubtree,
) -> Result<Option<String>> {
    if at == nodes.len() {
        stats.candidates += 1;
        return check_family_pairs(vt, family, st);
    }
    let node = nodes[at];
    let used: BTreeSet<Cell> = family.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
    // successor cells of this node below the depth, excluding used ones
    let mut pool: Vec<Cell> = Vec::new();
    for level in node.level..depth.min(tree.height()) {
        for idx in tree.descendant_range(node, level)? {
            let cell = Cell::new(level, vec![idx]);
            if !used.contains(&cell) {
                pool.push(cell);
            }
        }
    }
    let own = Cell::new(node.level, vec![node.index]);
    if !pool.contains(&own) {
        return Ok(None); // node already consumed by an earlier set
    }
    let extras: Vec<Cell> = pool.into_iter().filter(|c| *c != own).collect();
    let max_extra = cap.saturating_sub(1).min(extras.len());
    let positions: Vec<usize> = (0..extras.len()).collect();
    for size in 0..=max_extra {
        let combos = if size == 0 {
            vec![Vec::new()]
        } else {
            combinations(&positions, size)
        };
        for combo in combos {
            let mut cells: BTreeSet<Cell> = [own.clone()].into_iter().collect();
            cells.extend(combo.iter().map(|&i| extras[i].clone()));
            family.push((own.clone(), cells));
            let res = family_rec(vt, tree, nodes, at + 1, depth, cap, family, stats, st)?;
            family.pop();
            if res.is_some() {
                return Ok(res);
            }
        }
    }
    Ok(None)
}

fn check_family_pairs(
    vt: &VectorTree,
    family: &[(Cell, BTreeSet<Cell>)],
    st: &StrongSubtree,
) -> Result<Option<String>> {
    // assemble the family as a UFamily over the subtree's node cells
    let mut base = VectorSubset::new();
    for (li, level) in st.levels.iter().enumerate() {
        base.levels
            .insert(*level, vec![st.nodes[li].iter().copied().collect()]);
    }
    let mut sets = BTreeMap::new();
    for (t, cells) in family {
        sets.insert(t.clone(), MinSet::new(vt, cells.clone())?);
    }
    let fam = UFamily::new(vt, base, sets)?;
    let span = span_u(vt, &fam)?;
    let mut colors = BTreeSet::new();
    let mut any_pair = false;
    for (i, v1) in span.iter().enumerate() {
        for v2 in span.iter().skip(i + 1) {
            for (a, b) in [(v1, v2), (v2, v1)] {
                if a.is_disjoint(b) && a.minimum() != b.minimum() && vt.cell_leq(a.minimum(), b.minimum())? {
                    any_pair = true;
                    colors.insert(counterexample_color(vt, a, b)?);
                }
            }
        }
    }
    if colors.len() >= 2 || !any_pair {
        return Ok(None);
    }
    // a family whose pair span is monochromatic falsifies the claim
    let desc: Vec<String> = family
        .iter()
        .map(|(t, cells)| {
            let parts: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
            format!("{t}->{}", parts.join(";"))
        })
        .collect();
    Ok(Some(format!(
        "levels {:?} family {}",
        st.levels,
        desc.join(" ")
    )))
}
