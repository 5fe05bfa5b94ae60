//! Balanced rooted trees of finite height, vector trees, level products,
//! level subsets, domination and bounded density checks.
//!
//! A tree is stored as its per-level branching vector: every node at level
//! `i` has exactly `branching[i]` children, so a node is just a pair
//! (level, index) and parent/ancestor arithmetic is integer division.
//! Children of node `(n, j)` are `(n+1, j*b_n) .. (n+1, j*b_n + b_n - 1)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// A node identified by its level and its index within that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeRef {
    pub level: usize,
    pub index: usize,
}

impl NodeRef {
    pub fn new(level: usize, index: usize) -> Self {
        NodeRef { level, index }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.index)
    }
}

/// A nonempty set of node indices at a single level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSubset {
    pub level: usize,
    pub members: BTreeSet<usize>,
}

impl LevelSubset {
    pub fn new(level: usize, members: impl IntoIterator<Item = usize>) -> Self {
        LevelSubset {
            level,
            members: members.into_iter().collect(),
        }
    }

    pub fn full(tree: &Tree, level: usize) -> Result<Self> {
        let size = tree.level_size(level)?;
        Ok(LevelSubset {
            level,
            members: (0..size).collect(),
        })
    }

    pub fn validate(&self, tree: &Tree) -> Result<()> {
        let size = tree.level_size(self.level)?;
        if self.members.is_empty() {
            return Err(Error::structure("level subset must be nonempty"));
        }
        if let Some(&m) = self.members.iter().next_back() {
            if m >= size {
                return Err(Error::range(format!(
                    "index {m} out of range at level {} (size {size})",
                    self.level
                )));
            }
        }
        Ok(())
    }
}

/// Uniformly branching balanced tree truncated at height `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    branching: Vec<usize>,
    level_sizes: Vec<usize>,
}

impl Tree {
    /// `branching[i]` is the child count shared by every node at level `i`;
    /// the height is `branching.len() + 1`.
    pub fn new(branching: Vec<usize>) -> Result<Self> {
        if branching.iter().any(|&b| b == 0) {
            return Err(Error::structure(
                "branching factors must be >= 1 (no terminal interior nodes)",
            ));
        }
        let mut level_sizes = Vec::with_capacity(branching.len() + 1);
        let mut size = 1usize;
        level_sizes.push(size);
        for &b in &branching {
            size = size
                .checked_mul(b)
                .ok_or_else(|| Error::structure("level size overflow"))?;
            level_sizes.push(size);
        }
        Ok(Tree {
            branching,
            level_sizes,
        })
    }

    pub fn binary(height: usize) -> Self {
        Tree::new(vec![2; height.saturating_sub(1)]).expect("valid binary tree")
    }

    pub fn height(&self) -> usize {
        self.level_sizes.len()
    }

    pub fn branching(&self) -> &[usize] {
        &self.branching
    }

    pub fn level_size(&self, n: usize) -> Result<usize> {
        self.level_sizes
            .get(n)
            .copied()
            .ok_or_else(|| Error::range(format!("level {n} out of range (height {})", self.height())))
    }

    pub fn check_node(&self, node: NodeRef) -> Result<()> {
        let size = self.level_size(node.level)?;
        if node.index >= size {
            return Err(Error::range(format!(
                "node {node} out of range (level size {size})"
            )));
        }
        Ok(())
    }

    /// All nodes at level `n` in increasing index order.
    pub fn level_nodes(&self, n: usize) -> Result<Vec<NodeRef>> {
        let size = self.level_size(n)?;
        Ok((0..size).map(|i| NodeRef::new(n, i)).collect())
    }

    pub fn parent(&self, node: NodeRef) -> Option<NodeRef> {
        if node.level == 0 {
            None
        } else {
            Some(NodeRef::new(
                node.level - 1,
                node.index / self.branching[node.level - 1],
            ))
        }
    }

    /// Number of descendants a node at `from` has at level `to`.
    pub fn stride(&self, from: usize, to: usize) -> usize {
        self.branching[from..to].iter().product()
    }

    /// Index of the ancestor of `node` at `level` (requires `level <= node.level`).
    pub fn ancestor_index(&self, node: NodeRef, level: usize) -> usize {
        node.index / self.stride(level, node.level)
    }

    /// `a <=_T b`: `a` is an ancestor of `b` or equal to it.
    pub fn leq(&self, a: NodeRef, b: NodeRef) -> Result<bool> {
        self.check_node(a)?;
        self.check_node(b)?;
        if a.level > b.level {
            return Ok(false);
        }
        Ok(self.ancestor_index(b, a.level) == a.index)
    }

    /// Index range of the descendants of `node` at level `to`.
    pub fn descendant_range(&self, node: NodeRef, to: usize) -> Result<std::ops::Range<usize>> {
        self.check_node(node)?;
        if to < node.level || to >= self.height() {
            return Err(Error::range(format!(
                "descendant level {to} out of range for node {node}"
            )));
        }
        let stride = self.stride(node.level, to);
        Ok(node.index * stride..(node.index + 1) * stride)
    }

    /// `upper` dominates `lower`: every node of `lower` has an extension in `upper`.
    pub fn dominates(&self, upper: &LevelSubset, lower: &LevelSubset) -> Result<bool> {
        upper.validate(self)?;
        lower.validate(self)?;
        if upper.level < lower.level {
            return Err(Error::pre(format!(
                "dominating level {} below dominated level {}",
                upper.level, lower.level
            )));
        }
        let stride = self.stride(lower.level, upper.level);
        Ok(lower
            .members
            .iter()
            .all(|&t| upper.members.range(t * stride..(t + 1) * stride).next().is_some()))
    }

    /// Occupied levels of `d`, sorted ascending.
    pub fn level_set(&self, d: &BTreeSet<NodeRef>) -> Vec<usize> {
        let mut levels: BTreeSet<usize> = d.iter().map(|n| n.level).collect();
        levels.retain(|&l| l < self.height());
        levels.into_iter().collect()
    }

    /// Bounded density: with occupied levels `l_0 < l_1 < ...`, requires at
    /// least `k` of them and that `d` at level `l_j` dominates the full
    /// level `T(j)` for each `j < k`.
    pub fn is_dense_upto(&self, d: &BTreeSet<NodeRef>, k: usize) -> Result<bool> {
        if d.is_empty() {
            return Err(Error::pre("density check needs a nonempty set"));
        }
        for n in d {
            self.check_node(*n)?;
        }
        let levels = self.level_set(d);
        if levels.len() < k {
            return Ok(false);
        }
        for (j, &lj) in levels.iter().enumerate().take(k) {
            if lj < j {
                return Ok(false);
            }
            let at_level = LevelSubset::new(
                lj,
                d.iter().filter(|n| n.level == lj).map(|n| n.index),
            );
            let full = LevelSubset::full(self, j)?;
            if !self.dominates(&at_level, &full)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `t`-relativized density: restrict to successors of `t` and re-index
    /// levels from `t`'s level.
    pub fn is_t_dense_upto(&self, d: &BTreeSet<NodeRef>, t: NodeRef, k: usize) -> Result<bool> {
        self.check_node(t)?;
        if d.is_empty() {
            return Err(Error::pre("density check needs a nonempty set"));
        }
        let above: BTreeSet<NodeRef> = d
            .iter()
            .filter(|n| n.level < self.height() && self.leq(t, **n).unwrap_or(false))
            .copied()
            .collect();
        if above.is_empty() {
            return Ok(k == 0);
        }
        let levels = self.level_set(&above);
        if levels.len() < k {
            return Ok(false);
        }
        for (j, &lj) in levels.iter().enumerate().take(k) {
            // target: all descendants of t at relative level j
            let target_level = t.level + j;
            if target_level >= self.height() || lj < target_level {
                return Ok(false);
            }
            let at_level = LevelSubset::new(
                lj,
                above.iter().filter(|n| n.level == lj).map(|n| n.index),
            );
            let target = LevelSubset::new(target_level, self.descendant_range(t, target_level)?);
            if !self.dominates(&at_level, &target)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// One element of the level product: a level plus one node index per
/// coordinate tree. `Ord` is the canonical enumeration order (level-major,
/// then lexicographic on the index tuple); the tree order is `VectorTree::cell_leq`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub level: usize,
    pub indices: Vec<usize>,
}

impl Cell {
    pub fn new(level: usize, indices: Vec<usize>) -> Self {
        Cell { level, indices }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.level)?;
        for (i, idx) in self.indices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        Ok(())
    }
}

/// Parses the `L:i1,i2,...` cell rendering.
pub fn parse_cell(s: &str) -> Result<Cell> {
    let (lvl, rest) = s
        .split_once(':')
        .ok_or_else(|| Error::input(format!("malformed cell `{s}` (expected L:i1,...)")))?;
    let level = lvl
        .parse::<usize>()
        .map_err(|_| Error::input(format!("malformed cell level in `{s}`")))?;
    let mut indices = Vec::new();
    for part in rest.split(',') {
        indices.push(
            part.parse::<usize>()
                .map_err(|_| Error::input(format!("malformed cell index in `{s}`")))?,
        );
    }
    Ok(Cell::new(level, indices))
}

/// A nonempty tuple of trees of equal height.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorTree {
    trees: Vec<Tree>,
}

impl VectorTree {
    pub fn new(trees: Vec<Tree>) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::structure("vector tree needs at least one coordinate"));
        }
        let h = trees[0].height();
        if trees.iter().any(|t| t.height() != h) {
            return Err(Error::structure("all coordinate trees must share one height"));
        }
        Ok(VectorTree { trees })
    }

    pub fn dim(&self) -> usize {
        self.trees.len()
    }

    pub fn height(&self) -> usize {
        self.trees[0].height()
    }

    pub fn tree(&self, i: usize) -> &Tree {
        &self.trees[i]
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn check_cell(&self, cell: &Cell) -> Result<()> {
        if cell.indices.len() != self.dim() {
            return Err(Error::structure(format!(
                "cell dimension {} does not match vector tree dimension {}",
                cell.indices.len(),
                self.dim()
            )));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            tree.check_node(NodeRef::new(cell.level, cell.indices[i]))?;
        }
        Ok(())
    }

    /// Size of the level product at level `n`.
    pub fn level_card(&self, n: usize) -> Result<usize> {
        let mut card = 1usize;
        for t in &self.trees {
            card *= t.level_size(n)?;
        }
        Ok(card)
    }

    /// All cells at level `n`, in lexicographic order of index tuples.
    pub fn level_cells(&self, n: usize) -> Result<Vec<Cell>> {
        let card = self.level_card(n)?;
        let sizes: Vec<usize> = self
            .trees
            .iter()
            .map(|t| t.level_size(n))
            .collect::<Result<_>>()?;
        let mut cells = Vec::with_capacity(card);
        let mut tuple = vec![0usize; self.dim()];
        loop {
            cells.push(Cell::new(n, tuple.clone()));
            // odometer with the last coordinate fastest
            let mut pos = self.dim();
            loop {
                if pos == 0 {
                    return Ok(cells);
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < sizes[pos] {
                    break;
                }
                tuple[pos] = 0;
            }
        }
    }

    /// Coordinatewise tree order on cells.
    pub fn cell_leq(&self, a: &Cell, b: &Cell) -> Result<bool> {
        self.check_cell(a)?;
        self.check_cell(b)?;
        if a.level > b.level {
            return Ok(false);
        }
        for (i, tree) in self.trees.iter().enumerate() {
            if tree.ancestor_index(NodeRef::new(b.level, b.indices[i]), a.level) != a.indices[i] {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The unique cell-predecessor at `level` (requires `level <= cell.level`).
    pub fn cell_ancestor(&self, cell: &Cell, level: usize) -> Result<Cell> {
        self.check_cell(cell)?;
        if level > cell.level {
            return Err(Error::range(format!(
                "ancestor level {level} above cell level {}",
                cell.level
            )));
        }
        let indices = self
            .trees
            .iter()
            .enumerate()
            .map(|(i, t)| t.ancestor_index(NodeRef::new(cell.level, cell.indices[i]), level))
            .collect();
        Ok(Cell::new(level, indices))
    }

    /// Cells of the restriction to levels `[lo, hi)` in canonical order.
    pub fn range_cells(&self, lo: usize, hi: usize) -> Result<Vec<Cell>> {
        if lo > hi || hi > self.height() {
            return Err(Error::range(format!(
                "range [{lo},{hi}) invalid for height {}",
                self.height()
            )));
        }
        let mut cells = Vec::new();
        for n in lo..hi {
            cells.extend(self.level_cells(n)?);
        }
        Ok(cells)
    }

    pub fn range_len(&self, lo: usize, hi: usize) -> Result<usize> {
        if lo > hi || hi > self.height() {
            return Err(Error::range(format!(
                "range [{lo},{hi}) invalid for height {}",
                self.height()
            )));
        }
        let mut len = 0usize;
        for n in lo..hi {
            len += self.level_card(n)?;
        }
        Ok(len)
    }

    /// Offset of `cell` in the canonical enumeration of `[lo, hi)`.
    pub fn cell_offset(&self, lo: usize, hi: usize, cell: &Cell) -> Result<usize> {
        self.check_cell(cell)?;
        if cell.level < lo || cell.level >= hi {
            return Err(Error::range(format!(
                "cell {cell} outside range [{lo},{hi})"
            )));
        }
        let mut offset = 0usize;
        for n in lo..cell.level {
            offset += self.level_card(n)?;
        }
        let mut rank = 0usize;
        for (i, tree) in self.trees.iter().enumerate() {
            rank = rank * tree.level_size(cell.level)? + cell.indices[i];
        }
        Ok(offset + rank)
    }

    /// Compact single-token encoding, e.g. `2|2,2|3,1` for d=2.
    pub fn encode_compact(&self) -> String {
        let mut out = self.dim().to_string();
        for t in &self.trees {
            out.push('|');
            let parts: Vec<String> = t.branching().iter().map(|b| b.to_string()).collect();
            out.push_str(&parts.join(","));
        }
        out
    }

    pub fn parse_compact(s: &str) -> Result<Self> {
        let mut parts = s.split('|');
        let d: usize = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| Error::input(format!("malformed compact tree `{s}`")))?;
        let mut trees = Vec::new();
        for part in parts {
            let branching = if part.is_empty() {
                Vec::new()
            } else {
                part.split(',')
                    .map(|b| {
                        b.parse::<usize>()
                            .map_err(|_| Error::input(format!("malformed branching `{b}`")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            trees.push(Tree::new(branching)?);
        }
        if trees.len() != d {
            return Err(Error::input(format!(
                "compact tree declares d={d} but has {} coordinates",
                trees.len()
            )));
        }
        VectorTree::new(trees)
    }

    /// Parses the tree spec text format: `d <dim>` then one
    /// `tree <b_0> <b_1> ...` line per coordinate; `#` starts a comment.
    pub fn parse_spec(text: &str) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut trees: Vec<Tree> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let mut tokens = content.split_whitespace();
            match tokens.next() {
                Some("d") => {
                    if dim.is_some() {
                        return Err(Error::parse(line, 1, "duplicate `d` line"));
                    }
                    let tok = tokens
                        .next()
                        .ok_or_else(|| Error::parse(line, 2, "missing dimension after `d`"))?;
                    let d: usize = tok
                        .parse()
                        .map_err(|_| Error::parse(line, 3, format!("invalid dimension `{tok}`")))?;
                    if d == 0 {
                        return Err(Error::parse(line, 3, "dimension must be positive"));
                    }
                    if let Some(extra) = tokens.next() {
                        return Err(Error::parse(line, 1, format!("unexpected token `{extra}`")));
                    }
                    dim = Some(d);
                }
                Some("tree") => {
                    if dim.is_none() {
                        return Err(Error::parse(line, 1, "`tree` line before `d` line"));
                    }
                    let mut branching = Vec::new();
                    for (i, tok) in tokens.enumerate() {
                        let b: usize = tok.parse().map_err(|_| {
                            Error::parse(line, i + 2, format!("invalid branching `{tok}`"))
                        })?;
                        if b == 0 {
                            return Err(Error::parse(line, i + 2, "branching must be >= 1"));
                        }
                        branching.push(b);
                    }
                    trees.push(Tree::new(branching)?);
                }
                Some(other) => {
                    return Err(Error::parse(line, 1, format!("unknown directive `{other}`")));
                }
                None => unreachable!(),
            }
        }
        let d = dim.ok_or_else(|| Error::parse(1, 1, "missing `d` line"))?;
        if trees.len() != d {
            return Err(Error::input(format!(
                "tree spec declares d={d} but defines {} trees",
                trees.len()
            )));
        }
        let vt = VectorTree::new(trees)?;
        Ok(vt)
    }

    pub fn format_spec(&self) -> String {
        let mut out = format!("d {}\n", self.dim());
        for t in &self.trees {
            out.push_str("tree");
            for b in t.branching() {
                out.push_str(&format!(" {b}"));
            }
            out.push('\n');
        }
        out
    }
}

/// A vector level subset: per coordinate, a nonempty sorted set of node
/// indices, all at one shared level. Used as variable-word supports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VectorLevelSubset {
    pub level: usize,
    pub coords: Vec<Vec<usize>>,
}

impl VectorLevelSubset {
    pub fn new(level: usize, coords: Vec<Vec<usize>>) -> Self {
        let coords = coords
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        VectorLevelSubset { level, coords }
    }

    pub fn full(vt: &VectorTree, level: usize) -> Result<Self> {
        let coords = vt
            .trees()
            .iter()
            .map(|t| t.level_size(level).map(|s| (0..s).collect()))
            .collect::<Result<_>>()?;
        Ok(VectorLevelSubset { level, coords })
    }

    pub fn validate(&self, vt: &VectorTree) -> Result<()> {
        if self.coords.len() != vt.dim() {
            return Err(Error::structure("support dimension mismatch"));
        }
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::structure(format!(
                    "support coordinate {i} is empty"
                )));
            }
            let size = vt.tree(i).level_size(self.level)?;
            if c.iter().any(|&m| m >= size) {
                return Err(Error::range(format!(
                    "support index out of range at coordinate {i}"
                )));
            }
        }
        Ok(())
    }

    /// Cells of the product, in lexicographic tuple order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        let mut pos = vec![0usize; self.coords.len()];
        loop {
            out.push(Cell::new(
                self.level,
                pos.iter()
                    .enumerate()
                    .map(|(i, &p)| self.coords[i][p])
                    .collect(),
            ));
            let mut i = self.coords.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                pos[i] += 1;
                if pos[i] < self.coords[i].len() {
                    break;
                }
                pos[i] = 0;
            }
        }
    }

    pub fn card(&self) -> usize {
        self.coords.iter().map(|c| c.len()).product()
    }

    /// Coordinatewise domination of the full vector level `T(j)`.
    pub fn dominates_full_level(&self, vt: &VectorTree, j: usize) -> Result<bool> {
        if self.level < j {
            return Ok(false);
        }
        for (i, c) in self.coords.iter().enumerate() {
            let upper = LevelSubset::new(self.level, c.iter().copied());
            let lower = LevelSubset::full(vt.tree(i), j)?;
            if !vt.tree(i).dominates(&upper, &lower)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Coordinatewise domination of another vector level subset.
    pub fn dominates(&self, vt: &VectorTree, other: &VectorLevelSubset) -> Result<bool> {
        if self.level < other.level {
            return Ok(false);
        }
        for i in 0..self.coords.len() {
            let upper = LevelSubset::new(self.level, self.coords[i].iter().copied());
            let lower = LevelSubset::new(other.level, other.coords[i].iter().copied());
            if !vt.tree(i).dominates(&upper, &lower)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A vector subset: for each occupied level, per-coordinate nonempty index
/// sets. All coordinates occupy exactly the same levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorSubset {
    pub levels: BTreeMap<usize, Vec<BTreeSet<usize>>>,
}

impl VectorSubset {
    pub fn new() -> Self {
        VectorSubset {
            levels: BTreeMap::new(),
        }
    }

    pub fn from_level_subsets(parts: impl IntoIterator<Item = VectorLevelSubset>) -> Self {
        let mut vs = VectorSubset::new();
        for p in parts {
            vs.levels.insert(
                p.level,
                p.coords.into_iter().map(|c| c.into_iter().collect()).collect(),
            );
        }
        vs
    }

    /// Full levels `lo..hi` of the vector tree.
    pub fn full_levels(vt: &VectorTree, lo: usize, hi: usize) -> Result<Self> {
        let mut vs = VectorSubset::new();
        for n in lo..hi {
            let coords = vt
                .trees()
                .iter()
                .map(|t| t.level_size(n).map(|s| (0..s).collect()))
                .collect::<Result<_>>()?;
            vs.levels.insert(n, coords);
        }
        Ok(vs)
    }

    pub fn validate(&self, vt: &VectorTree) -> Result<()> {
        for (&level, coords) in &self.levels {
            if coords.len() != vt.dim() {
                return Err(Error::structure("vector subset dimension mismatch"));
            }
            for (i, c) in coords.iter().enumerate() {
                if c.is_empty() {
                    return Err(Error::structure(format!(
                        "vector subset empty at level {level}, coordinate {i}"
                    )));
                }
                let size = vt.tree(i).level_size(level)?;
                if let Some(&m) = c.iter().next_back() {
                    if m >= size {
                        return Err(Error::range(format!(
                            "vector subset index {m} out of range at level {level}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn occupied_levels(&self) -> Vec<usize> {
        self.levels.keys().copied().collect()
    }

    /// Cells of the level product of the subset at occupied level `level`.
    pub fn level_cells(&self, level: usize) -> Vec<Cell> {
        let Some(coords) = self.levels.get(&level) else {
            return Vec::new();
        };
        let lists: Vec<Vec<usize>> = coords.iter().map(|c| c.iter().copied().collect()).collect();
        VectorLevelSubset { level, coords: lists }.cells()
    }

    /// All cells of `⊗D` in canonical order.
    pub fn all_cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &level in self.levels.keys() {
            out.extend(self.level_cells(level));
        }
        out
    }

    pub fn contains_cell(&self, cell: &Cell) -> bool {
        match self.levels.get(&cell.level) {
            None => false,
            Some(coords) => coords
                .iter()
                .zip(&cell.indices)
                .all(|(c, idx)| c.contains(idx)),
        }
    }

    /// Per-coordinate node sets, for the density checkers.
    pub fn coordinate_nodes(&self, i: usize) -> BTreeSet<NodeRef> {
        let mut out = BTreeSet::new();
        for (&level, coords) in &self.levels {
            for &idx in &coords[i] {
                out.insert(NodeRef::new(level, idx));
            }
        }
        out
    }

    pub fn dim(&self) -> Option<usize> {
        self.levels.values().next().map(|c| c.len())
    }
}

impl Default for VectorSubset {
    fn default() -> Self {
        VectorSubset::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary(h: usize) -> Tree {
        Tree::binary(h)
    }

    #[test]
    fn level_sizes_are_products() {
        let t = binary(3);
        assert_eq!(t.level_size(0).unwrap(), 1);
        assert_eq!(t.level_size(2).unwrap(), 4);
        assert!(t.level_size(3).is_err());
        let t = Tree::new(vec![3, 2]).unwrap();
        assert_eq!(t.level_nodes(2).unwrap().len(), 6);
    }

    #[test]
    fn level_nodes_examples() {
        let t = binary(3);
        let nodes = t.level_nodes(2).unwrap();
        assert_eq!(nodes.len(), 4);
        assert_eq!(nodes[0], NodeRef::new(2, 0));
        assert_eq!(nodes[3], NodeRef::new(2, 3));
        assert_eq!(t.level_nodes(0).unwrap(), vec![NodeRef::new(0, 0)]);
    }

    #[test]
    fn leq_is_partial_order_on_small_trees() {
        for t in [binary(3), Tree::new(vec![3, 2]).unwrap(), Tree::new(vec![1, 1, 1]).unwrap()] {
            let mut nodes = Vec::new();
            for n in 0..t.height() {
                nodes.extend(t.level_nodes(n).unwrap());
            }
            for &a in &nodes {
                assert!(t.leq(a, a).unwrap());
                for &b in &nodes {
                    if t.leq(a, b).unwrap() && t.leq(b, a).unwrap() {
                        assert_eq!(a, b);
                    }
                    for &c in &nodes {
                        if t.leq(a, b).unwrap() && t.leq(b, c).unwrap() {
                            assert!(t.leq(a, c).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn root_below_everything() {
        let t = binary(4);
        let root = NodeRef::new(0, 0);
        for n in 0..4 {
            for node in t.level_nodes(n).unwrap() {
                assert!(t.leq(root, node).unwrap());
            }
        }
        // distinct nodes at equal level are incomparable
        assert!(!t.leq(NodeRef::new(1, 0), NodeRef::new(1, 1)).unwrap());
    }

    #[test]
    fn full_levels_dominate_lower_ones() {
        let t = binary(4);
        for n in 0..4 {
            for m in 0..=n {
                let upper = LevelSubset::full(&t, n).unwrap();
                let lower = LevelSubset::full(&t, m).unwrap();
                assert!(t.dominates(&upper, &lower).unwrap());
            }
        }
    }

    #[test]
    fn domination_counterexample() {
        let t = binary(3);
        let upper = LevelSubset::new(2, [0]);
        let lower = LevelSubset::full(&t, 1).unwrap();
        // node 1 at level 1 has no extension among {leftmost of T(2)}
        assert!(!t.dominates(&upper, &lower).unwrap());
        // reflexive on a full level
        let lvl = LevelSubset::full(&t, 1).unwrap();
        assert!(t.dominates(&lvl, &lvl).unwrap());
        // precondition: upper below lower
        assert!(t
            .dominates(&LevelSubset::new(0, [0]), &LevelSubset::new(1, [0]))
            .is_err());
    }

    #[test]
    fn dense_upto_examples() {
        let t = binary(5);
        // whole tree is dense up to every k < H
        let whole: BTreeSet<NodeRef> = (0..5)
            .flat_map(|n| t.level_nodes(n).unwrap())
            .collect();
        for k in 1..5 {
            assert!(t.is_dense_upto(&whole, k).unwrap());
        }
        // a single branch fails at k = 2
        let branch: BTreeSet<NodeRef> = (0..3).map(|n| NodeRef::new(n, 0)).collect();
        let t3 = binary(3);
        assert!(t3.is_dense_upto(&branch, 1).unwrap());
        assert!(!t3.is_dense_upto(&branch, 2).unwrap());
        // even levels of a binary H=5 tree are dense up to 2
        let evens: BTreeSet<NodeRef> = [0usize, 2, 4]
            .iter()
            .flat_map(|&n| t.level_nodes(n).unwrap())
            .collect();
        assert!(t.is_dense_upto(&evens, 2).unwrap());
        assert!(t.is_dense_upto(&evens, 3).unwrap());
        assert!(!t.is_dense_upto(&evens, 4).unwrap());
        // monotone in k
        for k in 1..3 {
            assert!(t.is_dense_upto(&evens, k).unwrap());
        }
        assert!(t.is_dense_upto(&BTreeSet::new(), 1).is_err());
    }

    #[test]
    fn t_dense_restricts_to_successors() {
        let t = binary(4);
        let anchor = NodeRef::new(1, 1);
        // all descendants of the anchor at levels 2 and 3
        let mut d = BTreeSet::new();
        for lvl in 2..4 {
            for idx in t.descendant_range(anchor, lvl).unwrap() {
                d.insert(NodeRef::new(lvl, idx));
            }
        }
        assert!(t.is_t_dense_upto(&d, anchor, 2).unwrap());
        // nothing above a different anchor
        assert!(!t.is_t_dense_upto(&d, NodeRef::new(1, 0), 1).unwrap());
    }

    #[test]
    fn level_product_cells() {
        let vt = VectorTree::new(vec![binary(3), binary(3)]).unwrap();
        assert_eq!(vt.level_cells(2).unwrap().len(), 16);
        assert_eq!(vt.level_cells(0).unwrap().len(), 1);
        let d1 = VectorTree::new(vec![binary(3)]).unwrap();
        let cells = d1.level_cells(2).unwrap();
        let nodes = binary(3).level_nodes(2).unwrap();
        assert_eq!(cells.len(), nodes.len());
        for (c, n) in cells.iter().zip(nodes) {
            assert_eq!(c.indices[0], n.index);
        }
    }

    #[test]
    fn cell_order_and_parents() {
        let vt = VectorTree::new(vec![binary(3), binary(3)]).unwrap();
        let root = Cell::new(0, vec![0, 0]);
        for n in 0..3 {
            for c in vt.level_cells(n).unwrap() {
                assert!(vt.cell_leq(&root, &c).unwrap());
            }
        }
        // s = (level 1, (0,0)), t = (level 2, (0,1)): 1 div 2 = 0 in coordinate 2
        let s = Cell::new(1, vec![0, 0]);
        let t = Cell::new(2, vec![0, 1]);
        assert!(vt.cell_leq(&s, &t).unwrap());
        // same level, different coordinate value
        let u = Cell::new(1, vec![0, 1]);
        assert!(!vt.cell_leq(&s, &u).unwrap());
        // every cell at level n+1 has exactly one predecessor at level n
        for n in 0..2 {
            for c in vt.level_cells(n + 1).unwrap() {
                let preds: Vec<Cell> = vt
                    .level_cells(n)
                    .unwrap()
                    .into_iter()
                    .filter(|p| vt.cell_leq(p, &c).unwrap())
                    .collect();
                assert_eq!(preds.len(), 1);
                assert_eq!(preds[0], vt.cell_ancestor(&c, n).unwrap());
            }
        }
        // dimension mismatch is a structural error
        let bad = Cell::new(0, vec![0]);
        assert!(vt.cell_leq(&bad, &root).is_err());
    }

    #[test]
    fn cell_offsets_match_enumeration() {
        let vt = VectorTree::new(vec![Tree::new(vec![2, 3]).unwrap(), binary(3)]).unwrap();
        let cells = vt.range_cells(0, 3).unwrap();
        assert_eq!(cells.len(), vt.range_len(0, 3).unwrap());
        for (i, c) in cells.iter().enumerate() {
            assert_eq!(vt.cell_offset(0, 3, c).unwrap(), i);
        }
        let mut sorted = cells.clone();
        sorted.sort();
        assert_eq!(sorted, cells, "canonical order agrees with Ord");
    }

    #[test]
    fn spec_parse_roundtrip() {
        let text = "# two binary coordinates\nd 2\ntree 2 2 2\ntree 2 2 2\n";
        let vt = VectorTree::parse_spec(text).unwrap();
        assert_eq!(vt.dim(), 2);
        assert_eq!(vt.height(), 4);
        let vt2 = VectorTree::parse_spec(&vt.format_spec()).unwrap();
        assert_eq!(vt, vt2);
        let compact = vt.encode_compact();
        assert_eq!(VectorTree::parse_compact(&compact).unwrap(), vt);
    }

    #[test]
    fn spec_parse_errors() {
        assert!(matches!(
            VectorTree::parse_spec("tree 2 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            VectorTree::parse_spec("d 1\ntree 2 x\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        // unequal heights
        assert!(VectorTree::parse_spec("d 2\ntree 2 2\ntree 2\n").is_err());
        // no trees
        assert!(VectorTree::parse_spec("# empty\n").is_err());
    }

    #[test]
    fn vector_level_subset_products() {
        let vt = VectorTree::new(vec![binary(3), binary(3)]).unwrap();
        let vls = VectorLevelSubset::new(1, vec![vec![0, 1], vec![1]]);
        vls.validate(&vt).unwrap();
        let cells = vls.cells();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0], Cell::new(1, vec![0, 1]));
        assert_eq!(cells[1], Cell::new(1, vec![1, 1]));
        assert!(vls.dominates_full_level(&vt, 0).unwrap());
        assert!(!vls.dominates_full_level(&vt, 1).unwrap());
        let full = VectorLevelSubset::full(&vt, 2).unwrap();
        assert!(full.dominates_full_level(&vt, 1).unwrap());
        assert!(full.dominates(&vt, &vls).unwrap());
    }

    #[test]
    fn cell_display_roundtrip() {
        let c = Cell::new(3, vec![1, 4]);
        assert_eq!(c.to_string(), "3:1,4");
        assert_eq!(parse_cell("3:1,4").unwrap(), c);
        assert!(parse_cell("nope").is_err());
    }
}
