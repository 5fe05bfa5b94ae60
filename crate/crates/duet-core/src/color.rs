//! Builtin coloring registry and coloring-table ingestion. A coloring is
//! specified as a builtin name with parameters (`size_mod 2`,
//! `letter_count_mod 3`, `level_parity`, `const 1`, ...) or as `table
//! <path>` referencing a `<key> <color>` file keyed by the canonical
//! encoding of the colored object.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tree::Cell;
use crate::unions::MinSet;
use crate::word::{ConstantWord, Letter};

/// A parsed coloring specification. `render` is the canonical echo used
/// in certificates; `parse ∘ render` is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColoringSpec {
    Const(u32),
    SizeMod(u32),
    MinLevelMod(u32),
    LevelParity,
    LetterCountMod(u32),
    CounterexamplePair,
    Table(PathBuf),
}

impl ColoringSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let name = tokens
            .next()
            .ok_or_else(|| Error::config("empty coloring spec"))?;
        let arg = tokens.next();
        if tokens.next().is_some() {
            return Err(Error::config(format!("too many tokens in coloring `{s}`")));
        }
        let need_mod = |arg: Option<&str>| -> Result<u32> {
            let a = arg.ok_or_else(|| Error::config(format!("`{name}` needs a modulus")))?;
            let m: u32 = a
                .parse()
                .map_err(|_| Error::config(format!("invalid modulus `{a}`")))?;
            if m == 0 {
                return Err(Error::config("modulus must be positive"));
            }
            Ok(m)
        };
        match name {
            "const" => {
                let a = arg.ok_or_else(|| Error::config("`const` needs a color"))?;
                let c: u32 = a
                    .parse()
                    .map_err(|_| Error::config(format!("invalid color `{a}`")))?;
                Ok(ColoringSpec::Const(c))
            }
            "size_mod" => Ok(ColoringSpec::SizeMod(need_mod(arg)?)),
            "min_level_mod" => Ok(ColoringSpec::MinLevelMod(need_mod(arg)?)),
            "level_parity" => {
                if arg.is_some() {
                    return Err(Error::config("`level_parity` takes no parameter"));
                }
                Ok(ColoringSpec::LevelParity)
            }
            "letter_count_mod" => Ok(ColoringSpec::LetterCountMod(need_mod(arg)?)),
            "counterexample_pair" => {
                if arg.is_some() {
                    return Err(Error::config("`counterexample_pair` takes no parameter"));
                }
                Ok(ColoringSpec::CounterexamplePair)
            }
            "table" => {
                let a = arg.ok_or_else(|| Error::config("`table` needs a file path"))?;
                Ok(ColoringSpec::Table(PathBuf::from(a)))
            }
            other => Err(Error::config(format!("unknown builtin coloring `{other}`"))),
        }
    }

    pub fn render(&self) -> String {
        match self {
            ColoringSpec::Const(c) => format!("const {c}"),
            ColoringSpec::SizeMod(m) => format!("size_mod {m}"),
            ColoringSpec::MinLevelMod(m) => format!("min_level_mod {m}"),
            ColoringSpec::LevelParity => "level_parity".to_string(),
            ColoringSpec::LetterCountMod(m) => format!("letter_count_mod {m}"),
            ColoringSpec::CounterexamplePair => "counterexample_pair".to_string(),
            ColoringSpec::Table(p) => format!("table {}", p.display()),
        }
    }
}

/// Parses a `<key> <color>` table; `#` starts a comment line. Keys carry
/// no whitespace, so the split is at the last space.
pub fn parse_table(text: &str) -> Result<BTreeMap<String, u32>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, color) = line
            .rsplit_once(' ')
            .ok_or_else(|| Error::parse(i + 1, 1, "expected `<key> <color>`"))?;
        let key = key.trim_end();
        if key.is_empty() {
            return Err(Error::parse(i + 1, 1, "empty key"));
        }
        let c: u32 = color
            .parse()
            .map_err(|_| Error::parse(i + 1, key.len() + 2, format!("invalid color `{color}`")))?;
        if out.insert(key.to_string(), c).is_some() {
            return Err(Error::parse(i + 1, 1, format!("duplicate key `{key}`")));
        }
    }
    Ok(out)
}

pub fn load_table(path: &Path) -> Result<BTreeMap<String, u32>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read table `{}`: {e}", path.display())))?;
    parse_table(&text)
}

fn table_lookup(table: &BTreeMap<String, u32>, key: &str) -> Result<u32> {
    table
        .get(key)
        .copied()
        .ok_or_else(|| Error::input(format!("partial coloring: no entry for `{key}`")))
}

/// Coloring of constant words on a level product.
#[derive(Debug, Clone)]
pub enum WordColoring {
    Const(u32),
    /// Occurrences of letter 0, modulo `m`.
    LetterCountMod(u32),
    Table(BTreeMap<String, u32>),
}

impl WordColoring {
    pub fn from_spec(spec: &ColoringSpec) -> Result<Self> {
        match spec {
            ColoringSpec::Const(c) => Ok(WordColoring::Const(*c)),
            ColoringSpec::LetterCountMod(m) => Ok(WordColoring::LetterCountMod(*m)),
            ColoringSpec::Table(p) => Ok(WordColoring::Table(load_table(p)?)),
            other => Err(Error::config(format!(
                "coloring `{}` does not apply to words",
                other.render()
            ))),
        }
    }

    pub fn eval(&self, w: &ConstantWord) -> Result<u32> {
        match self {
            WordColoring::Const(c) => Ok(*c),
            WordColoring::LetterCountMod(m) => {
                Ok(w.letters().iter().filter(|&&a| a == 0).count() as u32 % m)
            }
            WordColoring::Table(t) => table_lookup(t, &w.encode()),
        }
    }
}

/// Coloring of level-product cells.
#[derive(Debug, Clone)]
pub enum CellColoring {
    Const(u32),
    LevelParity,
    Table(BTreeMap<String, u32>),
}

impl CellColoring {
    pub fn from_spec(spec: &ColoringSpec) -> Result<Self> {
        match spec {
            ColoringSpec::Const(c) => Ok(CellColoring::Const(*c)),
            ColoringSpec::LevelParity => Ok(CellColoring::LevelParity),
            ColoringSpec::Table(p) => Ok(CellColoring::Table(load_table(p)?)),
            other => Err(Error::config(format!(
                "coloring `{}` does not apply to cells",
                other.render()
            ))),
        }
    }

    pub fn eval(&self, c: &Cell) -> Result<u32> {
        match self {
            CellColoring::Const(x) => Ok(*x),
            CellColoring::LevelParity => Ok((c.level % 2) as u32),
            CellColoring::Table(t) => table_lookup(t, &c.to_string()),
        }
    }
}

/// Coloring of min-rooted cell sets.
#[derive(Debug, Clone)]
pub enum SetColoring {
    Const(u32),
    SizeMod(u32),
    MinLevelMod(u32),
    Table(BTreeMap<String, u32>),
}

impl SetColoring {
    pub fn from_spec(spec: &ColoringSpec) -> Result<Self> {
        match spec {
            ColoringSpec::Const(c) => Ok(SetColoring::Const(*c)),
            ColoringSpec::SizeMod(m) => Ok(SetColoring::SizeMod(*m)),
            ColoringSpec::MinLevelMod(m) => Ok(SetColoring::MinLevelMod(*m)),
            // level parity of a set reads off its minimum
            ColoringSpec::LevelParity => Ok(SetColoring::MinLevelMod(2)),
            ColoringSpec::Table(p) => Ok(SetColoring::Table(load_table(p)?)),
            other => Err(Error::config(format!(
                "coloring `{}` does not apply to sets",
                other.render()
            ))),
        }
    }

    pub fn eval(&self, s: &MinSet) -> Result<u32> {
        match self {
            SetColoring::Const(c) => Ok(*c),
            SetColoring::SizeMod(m) => Ok(s.len() as u32 % m),
            SetColoring::MinLevelMod(m) => Ok(s.minimum().level as u32 % m),
            SetColoring::Table(t) => table_lookup(t, &s.encode()),
        }
    }
}

/// Coloring of classic words over `Λ^N`, keyed by letter string.
#[derive(Debug, Clone)]
pub enum ClassicColoring {
    Const(u32),
    LetterCountMod(u32),
    Table(BTreeMap<String, u32>),
}

impl ClassicColoring {
    pub fn from_spec(spec: &ColoringSpec) -> Result<Self> {
        match spec {
            ColoringSpec::Const(c) => Ok(ClassicColoring::Const(*c)),
            ColoringSpec::LetterCountMod(m) => Ok(ClassicColoring::LetterCountMod(*m)),
            ColoringSpec::Table(p) => Ok(ClassicColoring::Table(load_table(p)?)),
            other => Err(Error::config(format!(
                "coloring `{}` does not apply to classic words",
                other.render()
            ))),
        }
    }

    pub fn eval(&self, w: &[Letter]) -> Result<u32> {
        match self {
            ClassicColoring::Const(c) => Ok(*c),
            ClassicColoring::LetterCountMod(m) => {
                Ok(w.iter().filter(|&&a| a == 0).count() as u32 % m)
            }
            ClassicColoring::Table(t) => {
                let key: String = w
                    .iter()
                    .map(|&a| char::from_digit(a as u32, 10).unwrap_or('?'))
                    .collect();
                table_lookup(t, &key)
            }
        }
    }
}

/// Coloring of subsets of a finite ground set, keyed by ascending element
/// lists (`0,2`).
#[derive(Debug, Clone)]
pub enum SubsetColoring {
    Const(u32),
    SizeMod(u32),
    Table(BTreeMap<String, u32>),
}

impl SubsetColoring {
    pub fn from_spec(spec: &ColoringSpec) -> Result<Self> {
        match spec {
            ColoringSpec::Const(c) => Ok(SubsetColoring::Const(*c)),
            ColoringSpec::SizeMod(m) => Ok(SubsetColoring::SizeMod(*m)),
            ColoringSpec::Table(p) => Ok(SubsetColoring::Table(load_table(p)?)),
            other => Err(Error::config(format!(
                "coloring `{}` does not apply to ground subsets",
                other.render()
            ))),
        }
    }

    pub fn eval(&self, mask: u32) -> Result<u32> {
        match self {
            SubsetColoring::Const(c) => Ok(*c),
            SubsetColoring::SizeMod(m) => Ok(mask.count_ones() % m),
            SubsetColoring::Table(t) => table_lookup(t, &mask_key(mask)),
        }
    }
}

pub fn mask_key(mask: u32) -> String {
    let elems: Vec<String> = (0..32)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| i.to_string())
        .collect();
    elems.join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{Tree, VectorTree};
    use crate::word::Alphabet;

    #[test]
    fn spec_parse_render_roundtrip() {
        for s in [
            "const 1",
            "size_mod 2",
            "min_level_mod 3",
            "level_parity",
            "letter_count_mod 2",
            "counterexample_pair",
            "table colors.tbl",
        ] {
            let spec = ColoringSpec::parse(s).unwrap();
            assert_eq!(spec.render(), s);
        }
        assert!(ColoringSpec::parse("no_such_builtin").is_err());
        assert!(ColoringSpec::parse("size_mod").is_err());
        assert!(ColoringSpec::parse("size_mod 0").is_err());
        assert!(ColoringSpec::parse("level_parity 2").is_err());
    }

    #[test]
    fn table_parsing() {
        let table = parse_table("# comment\n00 0\n01 1\n\n11 0\n").unwrap();
        assert_eq!(table.len(), 3);
        assert_eq!(table["01"], 1);
        assert!(matches!(
            parse_table("00 x\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_table("00 0\n00 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn evaluators() {
        let vt = VectorTree::new(vec![Tree::binary(2)]).unwrap();
        let a = Alphabet::new(2).unwrap();
        let w = ConstantWord::new(&vt, &a, 0, 2, vec![0, 1, 0]).unwrap();
        let wc = WordColoring::from_spec(&ColoringSpec::LetterCountMod(2)).unwrap();
        assert_eq!(wc.eval(&w).unwrap(), 0);
        let cc = CellColoring::from_spec(&ColoringSpec::LevelParity).unwrap();
        assert_eq!(cc.eval(&Cell::new(3, vec![0])).unwrap(), 1);
        let ms = MinSet::new(&vt, [Cell::new(1, vec![0])].into_iter().collect()).unwrap();
        let sc = SetColoring::from_spec(&ColoringSpec::LevelParity).unwrap();
        assert_eq!(sc.eval(&ms).unwrap(), 1);
        let sc = SetColoring::from_spec(&ColoringSpec::SizeMod(2)).unwrap();
        assert_eq!(sc.eval(&ms).unwrap(), 1);
        // wrong-domain builtins are rejected
        assert!(WordColoring::from_spec(&ColoringSpec::SizeMod(2)).is_err());
        assert!(CellColoring::from_spec(&ColoringSpec::LetterCountMod(2)).is_err());
    }

    #[test]
    fn subset_keys() {
        assert_eq!(mask_key(0b101), "0,2");
        let sub = SubsetColoring::from_spec(&ColoringSpec::SizeMod(2)).unwrap();
        assert_eq!(sub.eval(0b111).unwrap(), 1);
    }
}
