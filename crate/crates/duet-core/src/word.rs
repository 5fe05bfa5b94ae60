//! Words on level products: constant and variable words, substitution,
//! spans, compatibility, concatenation, and finite subspaces.
//!
//! A word on `[m, n)` assigns a symbol to every cell of the level product
//! restricted to those levels, stored in canonical cell order. Variable
//! words carry a support (a vector level subset); the variable tagged by a
//! support cell `s` must occur at a set of cells admitting `s` as minimum,
//! and all variables must occur on the same set of levels.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::tree::{Cell, VectorLevelSubset, VectorTree};

pub type Letter = u8;

/// A finite alphabet; letters are `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || size > 255 {
            return Err(Error::structure("alphabet size must be in 1..=255"));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.size as Letter
    }

    pub fn check(&self, letter: Letter) -> Result<()> {
        if (letter as usize) < self.size {
            Ok(())
        } else {
            Err(Error::range(format!(
                "letter {letter} outside alphabet of size {}",
                self.size
            )))
        }
    }
}

/// One symbol of a variable word: a letter, or the variable tagged by the
/// support cell with the given rank in the support's canonical enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Letter(Letter),
    Var(u32),
}

/// A constant word: letters on the cells of `⊗T↾[lo, hi)` in canonical
/// order. The empty function is normalized to the range `[0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstantWord {
    lo: usize,
    hi: usize,
    letters: Vec<Letter>,
}

impl ConstantWord {
    pub fn new(vt: &VectorTree, alph: &Alphabet, lo: usize, hi: usize, letters: Vec<Letter>) -> Result<Self> {
        if lo == hi {
            if !letters.is_empty() {
                return Err(Error::structure("empty range with nonempty letters"));
            }
            return Ok(ConstantWord::empty());
        }
        let len = vt.range_len(lo, hi)?;
        if letters.len() != len {
            return Err(Error::structure(format!(
                "expected {len} letters on [{lo},{hi}), got {}",
                letters.len()
            )));
        }
        for &a in &letters {
            alph.check(a)?;
        }
        Ok(ConstantWord { lo, hi, letters })
    }

    pub fn empty() -> Self {
        ConstantWord {
            lo: 0,
            hi: 0,
            letters: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn bt(&self) -> usize {
        self.lo
    }

    pub fn tp(&self) -> usize {
        self.hi
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn letter_at(&self, vt: &VectorTree, cell: &Cell) -> Result<Letter> {
        let off = vt.cell_offset(self.lo, self.hi, cell)?;
        Ok(self.letters[off])
    }

    /// Restriction to `[lo, hi)`, a sub-range of the word's range.
    pub fn restrict(&self, vt: &VectorTree, lo: usize, hi: usize) -> Result<ConstantWord> {
        if lo == hi {
            return Ok(ConstantWord::empty());
        }
        if lo < self.lo || hi > self.hi {
            return Err(Error::range(format!(
                "restriction [{lo},{hi}) outside word range [{},{})",
                self.lo, self.hi
            )));
        }
        let start = vt.range_len(self.lo, lo)?;
        let len = vt.range_len(lo, hi)?;
        Ok(ConstantWord {
            lo,
            hi,
            letters: self.letters[start..start + len].to_vec(),
        })
    }

    /// Function union with an abutting (or empty) word.
    pub fn concat(&self, other: &ConstantWord) -> Result<ConstantWord> {
        if self.is_empty() {
            return Ok(other.clone());
        }
        if other.is_empty() {
            return Ok(self.clone());
        }
        if self.hi != other.lo {
            return Err(Error::pre(format!(
                "ranges [{},{}) and [{},{}) do not abut",
                self.lo, self.hi, other.lo, other.hi
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(ConstantWord {
            lo: self.lo,
            hi: other.hi,
            letters,
        })
    }

    pub fn encode(&self) -> String {
        let mut out = format!("[{},{}):", self.lo, self.hi);
        let parts: Vec<String> = self.letters.iter().map(|a| format!("a{a}")).collect();
        out.push_str(&parts.join(","));
        out
    }

    pub fn parse(vt: &VectorTree, alph: &Alphabet, s: &str) -> Result<Self> {
        let (lo, hi, symbols) = parse_word_body(s)?;
        let mut letters = Vec::with_capacity(symbols.len());
        for sym in symbols {
            match sym {
                ParsedSymbol::Letter(a) => letters.push(a),
                ParsedSymbol::Var(_) => {
                    return Err(Error::input(format!(
                        "variable symbol in constant word `{s}`"
                    )))
                }
            }
        }
        ConstantWord::new(vt, alph, lo, hi, letters)
    }
}

/// A variable word on `[lo, hi)` with support inside the range.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableWord {
    lo: usize,
    hi: usize,
    support: VectorLevelSubset,
    symbols: Vec<Symbol>,
}

impl VariableWord {
    pub fn new(
        vt: &VectorTree,
        alph: &Alphabet,
        lo: usize,
        hi: usize,
        support: VectorLevelSubset,
        symbols: Vec<Symbol>,
    ) -> Result<Self> {
        let w = VariableWord {
            lo,
            hi,
            support,
            symbols,
        };
        w.validate(vt, alph)?;
        Ok(w)
    }

    pub fn bt(&self) -> usize {
        self.lo
    }

    pub fn tp(&self) -> usize {
        self.hi
    }

    /// The support `ws(f)`.
    pub fn support(&self) -> &VectorLevelSubset {
        &self.support
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn var_count(&self) -> usize {
        self.support.card()
    }

    /// Checks both word conditions: every variable's occurrence set is
    /// nonempty with its support cell as minimum, and all occurrence sets
    /// share one level set.
    pub fn validate(&self, vt: &VectorTree, alph: &Alphabet) -> Result<()> {
        if self.lo >= self.hi {
            return Err(Error::structure("variable word needs a nonempty range"));
        }
        self.support.validate(vt)?;
        if self.support.level < self.lo || self.support.level >= self.hi {
            return Err(Error::structure(format!(
                "support level {} outside range [{},{})",
                self.support.level, self.lo, self.hi
            )));
        }
        let cells = vt.range_cells(self.lo, self.hi)?;
        if self.symbols.len() != cells.len() {
            return Err(Error::structure(format!(
                "expected {} symbols, got {}",
                cells.len(),
                self.symbols.len()
            )));
        }
        let support_cells = self.support.cells();
        let nvars = support_cells.len();
        let mut occurrences: Vec<Vec<&Cell>> = vec![Vec::new(); nvars];
        for (cell, sym) in cells.iter().zip(&self.symbols) {
            match sym {
                Symbol::Letter(a) => alph.check(*a)?,
                Symbol::Var(r) => {
                    let r = *r as usize;
                    if r >= nvars {
                        return Err(Error::structure(format!(
                            "variable rank {r} outside support of size {nvars}"
                        )));
                    }
                    occurrences[r].push(cell);
                }
            }
        }
        let mut shared_levels: Option<BTreeSet<usize>> = None;
        for (r, occ) in occurrences.iter().enumerate() {
            let s = &support_cells[r];
            if occ.is_empty() {
                return Err(Error::structure(format!(
                    "variable v({s}) never occurs"
                )));
            }
            for c in occ {
                if !vt.cell_leq(s, c)? {
                    return Err(Error::structure(format!(
                        "occurrence {c} of v({s}) is not above its support cell"
                    )));
                }
            }
            if !occ.iter().any(|c| **c == *s) {
                return Err(Error::structure(format!(
                    "v({s}) does not occur at its own support cell"
                )));
            }
            let levels: BTreeSet<usize> = occ.iter().map(|c| c.level).collect();
            match &shared_levels {
                None => shared_levels = Some(levels),
                Some(l) => {
                    if *l != levels {
                        return Err(Error::structure(
                            "occurrence level sets differ between variables",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, vt: &VectorTree, alph: &Alphabet) -> bool {
        self.validate(vt, alph).is_ok()
    }

    /// Substitutes `family[r]` for every occurrence of the rank-`r`
    /// variable; letters elsewhere unchanged.
    pub fn substitute(&self, vt: &VectorTree, alph: &Alphabet, family: &[Letter]) -> Result<ConstantWord> {
        if family.len() != self.var_count() {
            return Err(Error::pre(format!(
                "family assigns {} letters but support has {} cells",
                family.len(),
                self.var_count()
            )));
        }
        for &a in family {
            alph.check(a)?;
        }
        let letters = self
            .symbols
            .iter()
            .map(|sym| match sym {
                Symbol::Letter(a) => *a,
                Symbol::Var(r) => family[*r as usize],
            })
            .collect();
        ConstantWord::new(vt, alph, self.lo, self.hi, letters)
    }

    /// All substitution instances, in lexicographic family order.
    /// Cardinality is `|Λ|^{var_count}`.
    pub fn span(&self, vt: &VectorTree, alph: &Alphabet) -> Result<Vec<ConstantWord>> {
        let nvars = self.var_count();
        let mut out = Vec::new();
        let mut family = vec![0 as Letter; nvars];
        loop {
            out.push(self.substitute(vt, alph, &family)?);
            let mut pos = nvars;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                family[pos] += 1;
                if (family[pos] as usize) < alph.size() {
                    break;
                }
                family[pos] = 0;
            }
        }
    }

    /// Membership of a constant word in this word's span, without
    /// materializing the span.
    pub fn span_contains(&self, vt: &VectorTree, target: &ConstantWord) -> Result<bool> {
        if target.bt() != self.lo || target.tp() != self.hi {
            return Ok(false);
        }
        let mut assigned: Vec<Option<Letter>> = vec![None; self.var_count()];
        for (sym, &have) in self.symbols.iter().zip(target.letters()) {
            match sym {
                Symbol::Letter(a) => {
                    if *a != have {
                        return Ok(false);
                    }
                }
                Symbol::Var(r) => match assigned[*r as usize] {
                    None => assigned[*r as usize] = Some(have),
                    Some(prev) => {
                        if prev != have {
                            return Ok(false);
                        }
                    }
                },
            }
        }
        let _ = vt;
        Ok(true)
    }

    pub fn encode(&self) -> String {
        let support_cells = self.support.cells();
        let mut out = format!("[{},{}):", self.lo, self.hi);
        let parts: Vec<String> = self
            .symbols
            .iter()
            .map(|sym| match sym {
                Symbol::Letter(a) => format!("a{a}"),
                Symbol::Var(r) => format!("v({})", support_cells[*r as usize]),
            })
            .collect();
        out.push_str(&parts.join(","));
        out
    }

    pub fn parse(vt: &VectorTree, alph: &Alphabet, s: &str) -> Result<Self> {
        let (lo, hi, parsed) = parse_word_body(s)?;
        // reconstruct the support from the distinct variable tags
        let mut tags: BTreeSet<Cell> = BTreeSet::new();
        for sym in &parsed {
            if let ParsedSymbol::Var(c) = sym {
                tags.insert(c.clone());
            }
        }
        if tags.is_empty() {
            return Err(Error::input(format!("no variables in variable word `{s}`")));
        }
        let level = tags.iter().next().unwrap().level;
        if tags.iter().any(|c| c.level != level) {
            return Err(Error::input(
                "variable tags must share one support level".to_string(),
            ));
        }
        let dim = vt.dim();
        let mut coords: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); dim];
        for c in &tags {
            if c.indices.len() != dim {
                return Err(Error::input("variable tag dimension mismatch".to_string()));
            }
            for (i, &idx) in c.indices.iter().enumerate() {
                coords[i].insert(idx);
            }
        }
        let support = VectorLevelSubset::new(
            level,
            coords.into_iter().map(|c| c.into_iter().collect()).collect(),
        );
        let support_cells = support.cells();
        if support_cells.len() != tags.len() {
            return Err(Error::input(
                "variable tags do not form a full product of a vector level subset".to_string(),
            ));
        }
        let rank: BTreeMap<&Cell, u32> = support_cells
            .iter()
            .enumerate()
            .map(|(i, c)| (c, i as u32))
            .collect();
        let symbols = parsed
            .into_iter()
            .map(|sym| match sym {
                ParsedSymbol::Letter(a) => Symbol::Letter(a),
                ParsedSymbol::Var(c) => Symbol::Var(rank[&c]),
            })
            .collect();
        VariableWord::new(vt, alph, lo, hi, support, symbols)
    }
}

/// A word: constant (possibly empty) or variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Word {
    Const(ConstantWord),
    Var(VariableWord),
}

impl Word {
    pub fn is_empty(&self) -> bool {
        matches!(self, Word::Const(c) if c.is_empty())
    }

    pub fn bt(&self) -> usize {
        match self {
            Word::Const(c) => c.bt(),
            Word::Var(v) => v.bt(),
        }
    }

    pub fn tp(&self) -> usize {
        match self {
            Word::Const(c) => c.tp(),
            Word::Var(v) => v.tp(),
        }
    }

    /// `[f]_Λ`: all substitution instances for a variable word, the
    /// singleton `{f}` for a constant word.
    pub fn span(&self, vt: &VectorTree, alph: &Alphabet) -> Result<Vec<ConstantWord>> {
        match self {
            Word::Const(c) => Ok(vec![c.clone()]),
            Word::Var(v) => v.span(vt, alph),
        }
    }

    pub fn encode(&self) -> String {
        match self {
            Word::Const(c) => c.encode(),
            Word::Var(v) => v.encode(),
        }
    }
}

/// A pair of words is compatible when one is empty or their ranges abut.
pub fn compatible(f1: &Word, f2: &Word) -> bool {
    f1.is_empty() || f2.is_empty() || f1.tp() == f2.bt()
}

/// Function union of two words on abutting ranges. At most one side may be
/// variable; the union of two variable words is not itself a variable word.
pub fn word_union(vt: &VectorTree, alph: &Alphabet, a: &Word, b: &Word) -> Result<Word> {
    if a.is_empty() {
        return Ok(b.clone());
    }
    if b.is_empty() {
        return Ok(a.clone());
    }
    if a.tp() != b.bt() {
        return Err(Error::pre(format!(
            "ranges [{},{}) and [{},{}) do not abut",
            a.bt(),
            a.tp(),
            b.bt(),
            b.tp()
        )));
    }
    match (a, b) {
        (Word::Const(x), Word::Const(y)) => {
            let mut letters = x.letters().to_vec();
            letters.extend_from_slice(y.letters());
            Ok(Word::Const(ConstantWord::new(vt, alph, x.bt(), y.tp(), letters)?))
        }
        (Word::Const(x), Word::Var(y)) => {
            let mut symbols: Vec<Symbol> = x.letters().iter().map(|&a| Symbol::Letter(a)).collect();
            symbols.extend_from_slice(y.symbols());
            Ok(Word::Var(VariableWord::new(
                vt,
                alph,
                x.bt(),
                y.tp(),
                y.support().clone(),
                symbols,
            )?))
        }
        (Word::Var(x), Word::Const(y)) => {
            let mut symbols = x.symbols().to_vec();
            symbols.extend(y.letters().iter().map(|&a| Symbol::Letter(a)));
            Ok(Word::Var(VariableWord::new(
                vt,
                alph,
                x.bt(),
                y.tp(),
                x.support().clone(),
                symbols,
            )?))
        }
        (Word::Var(_), Word::Var(_)) => Err(Error::structure(
            "union of two variable words is not a variable word",
        )),
    }
}

/// `A ⌢ B`: all unions `f1 ∪ f2`. Every pair must have abutting ranges
/// (or an empty side).
pub fn concat_spans(vt: &VectorTree, alph: &Alphabet, a: &[Word], b: &[Word]) -> Result<Vec<Word>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for f1 in a {
        for f2 in b {
            if !compatible(f1, f2) {
                return Err(Error::pre(format!(
                    "incompatible pair in concatenation: [{},{}) then [{},{})",
                    f1.bt(),
                    f1.tp(),
                    f2.bt(),
                    f2.tp()
                )));
            }
            out.push(word_union(vt, alph, f1, f2)?);
        }
    }
    Ok(out)
}

fn concat_constant(a: &ConstantWord, b: &ConstantWord) -> ConstantWord {
    a.concat(b).expect("blockwise ranges abut")
}

/// A finite `(k, ℓ)`-subspace: a compatible sequence of variable words
/// whose `i`-th support dominates the full vector level `T(k + i)`, with
/// `bt(f_0) = ℓ`. The degenerate zero-block sequence is permitted (it
/// arises as a quotient tail) and spans `{∅}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FiniteSubspace {
    pub anchor_k: usize,
    pub anchor_l: usize,
    pub blocks: Vec<VariableWord>,
}

impl FiniteSubspace {
    pub fn new(vt: &VectorTree, alph: &Alphabet, anchor_k: usize, anchor_l: usize, blocks: Vec<VariableWord>) -> Result<Self> {
        let x = FiniteSubspace {
            anchor_k,
            anchor_l,
            blocks,
        };
        x.validate(vt, alph)?;
        Ok(x)
    }

    pub fn validate(&self, vt: &VectorTree, alph: &Alphabet) -> Result<()> {
        if let Some(first) = self.blocks.first() {
            if first.bt() != self.anchor_l {
                return Err(Error::structure(format!(
                    "first block starts at {} but anchor is {}",
                    first.bt(),
                    self.anchor_l
                )));
            }
        }
        for (i, block) in self.blocks.iter().enumerate() {
            block.validate(vt, alph)?;
            if i + 1 < self.blocks.len() && block.tp() != self.blocks[i + 1].bt() {
                return Err(Error::structure(format!(
                    "blocks {i} and {} are not compatible",
                    i + 1
                )));
            }
            if !block
                .support()
                .dominates_full_level(vt, self.anchor_k + i)?
            {
                return Err(Error::structure(format!(
                    "support of block {i} does not dominate level {}",
                    self.anchor_k + i
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn top(&self) -> usize {
        self.blocks.last().map_or(self.anchor_l, |b| b.tp())
    }

    /// The initial segment with `q` blocks, same anchors.
    pub fn prefix(&self, q: usize) -> Result<FiniteSubspace> {
        if q > self.blocks.len() {
            return Err(Error::pre(format!(
                "prefix length {q} exceeds block count {}",
                self.blocks.len()
            )));
        }
        Ok(FiniteSubspace {
            anchor_k: self.anchor_k,
            anchor_l: self.anchor_l,
            blocks: self.blocks[..q].to_vec(),
        })
    }

    /// `[x]_Λ`: the blockwise concatenation of spans. The zero-block
    /// sequence spans `{∅}`.
    pub fn span_sequence(&self, vt: &VectorTree, alph: &Alphabet) -> Result<Vec<ConstantWord>> {
        if self.blocks.is_empty() {
            return Ok(vec![ConstantWord::empty()]);
        }
        let spans: Vec<Vec<ConstantWord>> = self
            .blocks
            .iter()
            .map(|b| b.span(vt, alph))
            .collect::<Result<_>>()?;
        let mut out = vec![ConstantWord::empty()];
        for span in &spans {
            let mut next = Vec::with_capacity(out.len() * span.len());
            for prefix in &out {
                for w in span {
                    next.push(concat_constant(prefix, w));
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Blockwise membership: `w` is in the span iff its restriction to
    /// every block range lies in that block's span.
    pub fn contains_word(&self, vt: &VectorTree, w: &ConstantWord) -> Result<bool> {
        if self.blocks.is_empty() {
            return Ok(w.is_empty());
        }
        if w.bt() != self.anchor_l || w.tp() != self.top() {
            return Ok(false);
        }
        for block in &self.blocks {
            let part = w.restrict(vt, block.bt(), block.tp())?;
            if !block.span_contains(vt, &part)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `y ≤ x`: every element of `[y]_Λ` lies in `[x]_Λ`. Blocks of `y` may
/// cut at different levels than blocks of `x`; membership short-circuits
/// blockwise against `x`'s boundaries.
pub fn is_further_subspace(
    vt: &VectorTree,
    alph: &Alphabet,
    y: &FiniteSubspace,
    x: &FiniteSubspace,
) -> Result<bool> {
    if y.anchor_l != x.anchor_l {
        return Err(Error::pre(format!(
            "anchor mismatch: {} vs {}",
            y.anchor_l, x.anchor_l
        )));
    }
    if y.is_empty() {
        return Ok(x.is_empty());
    }
    if y.top() != x.top() {
        return Ok(false);
    }
    for w in y.span_sequence(vt, alph)? {
        if !x.contains_word(vt, &w)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `X / x`: the tail of `X` after the unique block prefix spanned by `x`.
pub fn quotient(
    vt: &VectorTree,
    alph: &Alphabet,
    big: &FiniteSubspace,
    x: &FiniteSubspace,
) -> Result<FiniteSubspace> {
    if x.is_empty() {
        return Err(Error::pre("quotient by the empty sequence"));
    }
    let mut q = None;
    for i in 1..=big.len() {
        if big.blocks[i - 1].tp() == x.top() {
            q = Some(i);
            break;
        }
    }
    let q = q.ok_or_else(|| {
        Error::pre(format!(
            "no block prefix of X ends at level {}",
            x.top()
        ))
    })?;
    let prefix = big.prefix(q)?;
    if !is_further_subspace(vt, alph, x, &prefix)? {
        return Err(Error::pre(
            "x is not a further subspace of the matching block prefix",
        ));
    }
    let blocks = big.blocks[q..].to_vec();
    let anchor_l = blocks.first().map_or(big.top(), |b| b.bt());
    Ok(FiniteSubspace {
        anchor_k: big.anchor_k + q,
        anchor_l,
        blocks,
    })
}

/// The canonical `(k, ℓ)`-subspace of length `q`: block `i` lives on the
/// single level `ℓ + i` with the full vector level as support and every
/// cell a variable. Requires `ℓ >= k` and `ℓ + q <= height`.
pub fn canonical_subspace(
    vt: &VectorTree,
    alph: &Alphabet,
    k: usize,
    l: usize,
    q: usize,
) -> Result<FiniteSubspace> {
    if l < k {
        return Err(Error::pre(format!(
            "canonical subspace needs l >= k (got k={k}, l={l})"
        )));
    }
    if l + q > vt.height() {
        return Err(Error::range(format!(
            "canonical subspace [{l},{}) exceeds height {}",
            l + q,
            vt.height()
        )));
    }
    let mut blocks = Vec::with_capacity(q);
    for i in 0..q {
        let level = l + i;
        let support = VectorLevelSubset::full(vt, level)?;
        let symbols = (0..support.card()).map(|r| Symbol::Var(r as u32)).collect();
        blocks.push(VariableWord::new(vt, alph, level, level + 1, support, symbols)?);
    }
    FiniteSubspace::new(vt, alph, k, l, blocks)
}

/// Enumerates, in canonical order, every valid variable word on `[lo, hi)`
/// whose support dominates the full vector level `T(target_level)` and has
/// at most `size_cap` product cells. Exhaustive and duplicate-free.
pub fn enumerate_variable_words(
    vt: &VectorTree,
    alph: &Alphabet,
    lo: usize,
    hi: usize,
    target_level: usize,
    size_cap: usize,
) -> Result<Vec<VariableWord>> {
    if lo >= hi || hi > vt.height() {
        return Err(Error::range(format!(
            "range [{lo},{hi}) invalid for height {}",
            vt.height()
        )));
    }
    let mut out = Vec::new();
    if size_cap == 0 {
        return Ok(out);
    }
    let cells = vt.range_cells(lo, hi)?;
    for support_level in lo..hi {
        for support in level_subset_candidates(vt, support_level)? {
            if support.card() > size_cap {
                continue;
            }
            if !support.dominates_full_level(vt, target_level)? {
                continue;
            }
            emit_words_for_support(vt, alph, lo, hi, &cells, &support, &mut out)?;
        }
    }
    Ok(out)
}

/// All vector level subsets at `level`, in canonical (mask-odometer) order.
fn level_subset_candidates(vt: &VectorTree, level: usize) -> Result<Vec<VectorLevelSubset>> {
    let sizes: Vec<usize> = vt
        .trees()
        .iter()
        .map(|t| t.level_size(level))
        .collect::<Result<_>>()?;
    if sizes.iter().any(|&s| s > 16) {
        return Err(Error::range(
            "level too wide for exhaustive support enumeration (max 16 nodes per coordinate)",
        ));
    }
    let mut out = Vec::new();
    let mut masks: Vec<u32> = vec![1; sizes.len()];
    loop {
        let coords: Vec<Vec<usize>> = masks
            .iter()
            .zip(&sizes)
            .map(|(&m, &s)| (0..s).filter(|&i| m & (1 << i) != 0).collect())
            .collect();
        out.push(VectorLevelSubset::new(level, coords));
        let mut pos = masks.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            masks[pos] += 1;
            if masks[pos] < (1u32 << sizes[pos]) {
                break;
            }
            masks[pos] = 1;
        }
    }
}

fn emit_words_for_support(
    vt: &VectorTree,
    alph: &Alphabet,
    lo: usize,
    hi: usize,
    cells: &[Cell],
    support: &VectorLevelSubset,
    out: &mut Vec<VariableWord>,
) -> Result<()> {
    let support_cells = support.cells();
    let rank: BTreeMap<&Cell, u32> = support_cells
        .iter()
        .enumerate()
        .map(|(i, c)| (c, i as u32))
        .collect();
    // per-cell choice lists, in canonical symbol order
    let mut choices: Vec<Vec<Symbol>> = Vec::with_capacity(cells.len());
    for cell in cells {
        if cell.level < support.level {
            choices.push(alph.letters().map(Symbol::Letter).collect());
        } else if cell.level == support.level {
            match rank.get(cell) {
                Some(&r) => choices.push(vec![Symbol::Var(r)]),
                None => choices.push(alph.letters().map(Symbol::Letter).collect()),
            }
        } else {
            let mut opts: Vec<Symbol> = alph.letters().map(Symbol::Letter).collect();
            for (r, s) in support_cells.iter().enumerate() {
                if vt.cell_leq(s, cell)? {
                    opts.push(Symbol::Var(r as u32));
                }
            }
            choices.push(opts);
        }
    }
    let nvars = support_cells.len();
    let mut pick = vec![0usize; cells.len()];
    loop {
        let symbols: Vec<Symbol> = pick
            .iter()
            .zip(&choices)
            .map(|(&p, opts)| opts[p])
            .collect();
        if occurrence_levels_agree(cells, &symbols, nvars) {
            out.push(VariableWord {
                lo,
                hi,
                support: support.clone(),
                symbols,
            });
        }
        let mut pos = cells.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            pick[pos] += 1;
            if pick[pos] < choices[pos].len() {
                break;
            }
            pick[pos] = 0;
        }
    }
}

fn occurrence_levels_agree(cells: &[Cell], symbols: &[Symbol], nvars: usize) -> bool {
    let mut level_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nvars];
    for (cell, sym) in cells.iter().zip(symbols) {
        if let Symbol::Var(r) = sym {
            level_sets[*r as usize].insert(cell.level);
        }
    }
    level_sets.windows(2).all(|w| w[0] == w[1])
}

/// Serializes a list of constant words between `BEGIN SPAN` / `END SPAN`
/// fences, one canonical encoding per line.
pub fn write_span(words: &[ConstantWord]) -> String {
    let mut out = String::from("BEGIN SPAN\n");
    for w in words {
        out.push_str(&w.encode());
        out.push('\n');
    }
    out.push_str("END SPAN\n");
    out
}

/// Serializes a finite subspace between `BEGIN SUBSPACE` / `END SUBSPACE`
/// fences: an anchor line, then one block encoding per line.
pub fn write_subspace(x: &FiniteSubspace) -> String {
    let mut out = String::from("BEGIN SUBSPACE\n");
    out.push_str(&format!("anchor {} {}\n", x.anchor_k, x.anchor_l));
    for block in &x.blocks {
        out.push_str(&block.encode());
        out.push('\n');
    }
    out.push_str("END SUBSPACE\n");
    out
}

pub fn parse_subspace(vt: &VectorTree, alph: &Alphabet, text: &str) -> Result<FiniteSubspace> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "BEGIN SUBSPACE")) => {}
        Some((i, other)) => {
            return Err(Error::parse(
                i + 1,
                1,
                format!("expected BEGIN SUBSPACE, got `{other}`"),
            ))
        }
        None => return Err(Error::parse(1, 1, "missing BEGIN SUBSPACE fence")),
    }
    let (anchor_k, anchor_l) = match lines.next() {
        Some((i, line)) => {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["anchor", k, l] => {
                    let k = k
                        .parse()
                        .map_err(|_| Error::parse(i + 1, 8, "bad anchor k"))?;
                    let l = l
                        .parse()
                        .map_err(|_| Error::parse(i + 1, 10, "bad anchor l"))?;
                    (k, l)
                }
                _ => return Err(Error::parse(i + 1, 1, "expected `anchor <k> <l>`")),
            }
        }
        None => return Err(Error::parse(2, 1, "missing anchor line")),
    };
    let mut blocks = Vec::new();
    let mut closed = false;
    for (i, line) in lines {
        if line == "END SUBSPACE" {
            closed = true;
            break;
        }
        blocks.push(
            VariableWord::parse(vt, alph, line)
                .map_err(|e| Error::parse(i + 1, 1, e.to_string()))?,
        );
    }
    if !closed {
        return Err(Error::parse(
            text.lines().count() + 1,
            1,
            "missing END SUBSPACE fence",
        ));
    }
    FiniteSubspace::new(vt, alph, anchor_k, anchor_l, blocks)
}

pub fn parse_span(vt: &VectorTree, alph: &Alphabet, text: &str) -> Result<Vec<ConstantWord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "BEGIN SPAN")) => {}
        Some((i, other)) => {
            return Err(Error::parse(i + 1, 1, format!("expected BEGIN SPAN, got `{other}`")))
        }
        None => return Err(Error::parse(1, 1, "missing BEGIN SPAN fence")),
    }
    let mut words = Vec::new();
    let mut closed = false;
    for (i, line) in lines {
        if line == "END SPAN" {
            closed = true;
            break;
        }
        words.push(
            ConstantWord::parse(vt, alph, line)
                .map_err(|e| Error::parse(i + 1, 1, e.to_string()))?,
        );
    }
    if !closed {
        return Err(Error::parse(
            text.lines().count() + 1,
            1,
            "missing END SPAN fence",
        ));
    }
    Ok(words)
}

enum ParsedSymbol {
    Letter(Letter),
    Var(Cell),
}

/// Parses `[lo,hi):sym,sym,...` into range and symbols. Commas inside
/// `v(...)` do not split.
fn parse_word_body(s: &str) -> Result<(usize, usize, Vec<ParsedSymbol>)> {
    let rest = s
        .strip_prefix('[')
        .ok_or_else(|| Error::input(format!("word `{s}` must start with `[`")))?;
    let (range_part, body) = rest
        .split_once("):")
        .ok_or_else(|| Error::input(format!("word `{s}` missing `):` separator")))?;
    let (lo_s, hi_s) = range_part
        .split_once(',')
        .ok_or_else(|| Error::input(format!("malformed range in `{s}`")))?;
    let lo: usize = lo_s
        .parse()
        .map_err(|_| Error::input(format!("malformed range start in `{s}`")))?;
    let hi: usize = hi_s
        .parse()
        .map_err(|_| Error::input(format!("malformed range end in `{s}`")))?;
    let mut symbols = Vec::new();
    if body.is_empty() {
        return Ok((lo, hi, symbols));
    }
    let mut depth = 0usize;
    let mut token = String::new();
    for ch in body.chars().chain(std::iter::once(',')) {
        match ch {
            '(' => {
                depth += 1;
                token.push(ch);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                token.push(ch);
            }
            ',' if depth == 0 => {
                symbols.push(parse_symbol_token(&token)?);
                token.clear();
            }
            _ => token.push(ch),
        }
    }
    Ok((lo, hi, symbols))
}

fn parse_symbol_token(tok: &str) -> Result<ParsedSymbol> {
    if let Some(num) = tok.strip_prefix('a') {
        let a: Letter = num
            .parse()
            .map_err(|_| Error::input(format!("malformed letter `{tok}`")))?;
        return Ok(ParsedSymbol::Letter(a));
    }
    if let Some(inner) = tok.strip_prefix("v(").and_then(|t| t.strip_suffix(')')) {
        return Ok(ParsedSymbol::Var(crate::tree::parse_cell(inner)?));
    }
    Err(Error::input(format!("unknown symbol token `{tok}`")))
}
