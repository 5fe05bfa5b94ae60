//! Run configuration, dispatch, and certificate assembly. Every command
//! echoes its configuration into the certificate (trees in compact form,
//! colorings as registry specs), re-validates witnesses through the
//! independent checkers before writing, and serializes deterministically.
//! Worker count is execution detail, not configuration: it never appears
//! in the certificate, so 1-worker and N-worker runs emit identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use crate::cert::{Certificate, Outcome};
use crate::color::{
    CellColoring, ClassicColoring, ColoringSpec, SetColoring, SubsetColoring, WordColoring,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::large::{tree_hj_search, validate_tree_hj_witness, TreeHjOutcome};
use crate::line::{
    combinatorial_lines, find_mono_line, hj_number, ClassicWord, ColoringTable, HjOutcome,
    LineOutcome,
};
use crate::tree::{parse_cell, Cell, VectorSubset, VectorTree};
use crate::unions::{
    disjoint_union_search, folkman_number, folkman_search, hl_search, span_u_within,
    validate_folkman_witness, validate_hl_witness, verify_counterexample, DuOutcome,
    FolkmanNumberOutcome, FolkmanOutcome, HlBranch, HlOutcome, MinSet, SubsetColoringTable,
    UFamily,
};
use crate::word::{canonical_subspace, Alphabet, FiniteSubspace, VariableWord};

/// Where a vector tree comes from: a spec file or an inline compact form.
/// Certificates always echo the compact form, so they validate without
/// the original file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeSource {
    Path(PathBuf),
    Compact(String),
}

impl TreeSource {
    pub fn load(&self) -> Result<VectorTree> {
        match self {
            TreeSource::Path(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    Error::input(format!("cannot read tree spec `{}`: {e}", p.display()))
                })?;
                VectorTree::parse_spec(&text)
            }
            TreeSource::Compact(s) => VectorTree::parse_compact(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandSpec {
    Hj {
        k: usize,
        r: usize,
        nmax: usize,
    },
    Lines {
        k: usize,
        n: usize,
        coloring: Option<ColoringSpec>,
    },
    FolkmanNumber {
        k: usize,
        colors: usize,
        nmax: usize,
    },
    FolkmanSearch {
        k: usize,
        ground: usize,
        coloring: ColoringSpec,
    },
    TreeHj {
        tree: TreeSource,
        alphabet: usize,
        l: usize,
        q: usize,
        coloring: ColoringSpec,
    },
    Hl {
        tree: TreeSource,
        coloring: ColoringSpec,
        m: usize,
    },
    DisjointUnion {
        tree: TreeSource,
        coloring: ColoringSpec,
        depth: usize,
        m: usize,
    },
    Counterexample {
        tree: TreeSource,
        subtree_height: usize,
        depth: usize,
        set_cap: usize,
    },
    Validate {
        cert: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandSpec,
    pub workers: usize,
}

/// Environment variable consulted by the CLI for the default worker count.
pub const WORKERS_ENV: &str = "DUET_WORKERS";

pub fn run(cfg: &RunConfig) -> Result<Certificate> {
    if cfg.workers == 0 {
        return Err(Error::config("worker count must be positive"));
    }
    let command = cfg.command.clone();
    exec::with_workers(cfg.workers, move || dispatch(&command))
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(Error::config(format!("budget `{name}` must be positive")));
    }
    Ok(v)
}

fn dispatch(cmd: &CommandSpec) -> Result<Certificate> {
    match cmd {
        CommandSpec::Hj { k, r, nmax } => run_hj(*k, *r, *nmax),
        CommandSpec::Lines { k, n, coloring } => run_lines(*k, *n, coloring.as_ref()),
        CommandSpec::FolkmanNumber { k, colors, nmax } => run_folkman_number(*k, *colors, *nmax),
        CommandSpec::FolkmanSearch { k, ground, coloring } => {
            run_folkman_search(*k, *ground, coloring)
        }
        CommandSpec::TreeHj {
            tree,
            alphabet,
            l,
            q,
            coloring,
        } => run_tree_hj(tree, *alphabet, *l, *q, coloring),
        CommandSpec::Hl { tree, coloring, m } => run_hl(tree, coloring, *m),
        CommandSpec::DisjointUnion {
            tree,
            coloring,
            depth,
            m,
        } => run_disjoint_union(tree, coloring, *depth, *m),
        CommandSpec::Counterexample {
            tree,
            subtree_height,
            depth,
            set_cap,
        } => run_counterexample(tree, *subtree_height, *depth, *set_cap),
        CommandSpec::Validate { cert } => run_validate(cert),
    }
}

fn run_hj(k: usize, r: usize, nmax: usize) -> Result<Certificate> {
    positive("k", k)?;
    positive("r", r)?;
    positive("nmax", nmax)?;
    let config = vec![
        ("k".to_string(), k.to_string()),
        ("r".to_string(), r.to_string()),
        ("nmax".to_string(), nmax.to_string()),
    ];
    let result = hj_number(k, r, nmax)?;
    let (outcome, table, note) = match result.outcome {
        HjOutcome::Resolved { n, avoiding_prev } => (
            Outcome::Resolved(format!("hj({k},{r})={n}")),
            avoiding_prev,
            None,
        ),
        HjOutcome::Unresolved {
            n_max,
            avoiding,
            note,
        } => (
            Outcome::Unresolved(format!("nmax={n_max}")),
            avoiding,
            note,
        ),
    };
    let mut cert = Certificate::new("hj", config, outcome);
    if let Some(t) = &table {
        cert.witness = t.render();
        cert.witness.insert(0, format!("avoiding-at n={}", t.n));
        cert.validated = Some(t.avoids_mono_line()?);
    }
    cert.push_stats(result.stats);
    if let Some(n) = note {
        cert.notes.push(n);
    }
    Ok(cert)
}

fn run_lines(k: usize, n: usize, coloring: Option<&ColoringSpec>) -> Result<Certificate> {
    positive("k", k)?;
    positive("n", n)?;
    let mut config = vec![
        ("k".to_string(), k.to_string()),
        ("n".to_string(), n.to_string()),
    ];
    if let Some(spec) = coloring {
        config.push(("coloring".to_string(), spec.render()));
    }
    match coloring {
        None => {
            let lines = combinatorial_lines(k, n)?;
            let expect = (k + 1).pow(n as u32) - k.pow(n as u32);
            let mut cert = Certificate::new(
                "lines",
                config,
                Outcome::Resolved(format!("count={}", lines.len())),
            );
            if lines.len() <= 256 {
                cert.witness = lines.iter().map(|l| l.encode()).collect();
            } else {
                cert.notes.push(format!(
                    "line list omitted (count={} exceeds 256)",
                    lines.len()
                ));
            }
            cert.validated = Some(lines.len() == expect);
            cert.push_stat("candidates", lines.len() as u64);
            Ok(cert)
        }
        Some(spec) => {
            let col = ClassicColoring::from_spec(spec)?;
            let result = find_mono_line(k, n, |w| col.eval(w))?;
            let mut cert = match &result.outcome {
                LineOutcome::Witness { word, color } => {
                    let mut c = Certificate::new(
                        "lines",
                        config,
                        Outcome::Witness(format!("line={} color={color}", word.encode())),
                    );
                    c.witness = vec![format!("{} {color}", word.encode())];
                    // independent check: recompute every point color
                    let mut ok = true;
                    for pt in word.points(k) {
                        if col.eval(&pt)? != *color {
                            ok = false;
                        }
                    }
                    c.validated = Some(ok);
                    c
                }
                LineOutcome::Exhausted => Certificate::new("lines", config, Outcome::Exhausted),
            };
            cert.push_stats(result.stats);
            Ok(cert)
        }
    }
}

fn run_folkman_number(k: usize, colors: usize, nmax: usize) -> Result<Certificate> {
    positive("k", k)?;
    positive("colors", colors)?;
    positive("nmax", nmax)?;
    let config = vec![
        ("mode".to_string(), "number".to_string()),
        ("k".to_string(), k.to_string()),
        ("colors".to_string(), colors.to_string()),
        ("nmax".to_string(), nmax.to_string()),
    ];
    let result = folkman_number(k, colors, nmax)?;
    let (outcome, table) = match result.outcome {
        FolkmanNumberOutcome::Resolved { n, avoiding_prev } => (
            Outcome::Resolved(format!("folkman({k},{colors})={n}")),
            avoiding_prev,
        ),
        FolkmanNumberOutcome::Unresolved { n_max, avoiding } => {
            (Outcome::Unresolved(format!("nmax={n_max}")), avoiding)
        }
    };
    let mut cert = Certificate::new("folkman", config, outcome);
    if let Some(t) = &table {
        cert.witness = t.render();
        cert.witness.insert(0, format!("avoiding-at n={}", t.n));
        cert.validated = Some(!t.admits_witness(k)?);
    }
    cert.push_stats(result.stats);
    Ok(cert)
}

fn run_folkman_search(k: usize, ground: usize, spec: &ColoringSpec) -> Result<Certificate> {
    positive("k", k)?;
    positive("ground", ground)?;
    let config = vec![
        ("mode".to_string(), "search".to_string()),
        ("k".to_string(), k.to_string()),
        ("ground".to_string(), ground.to_string()),
        ("coloring".to_string(), spec.render()),
    ];
    let col = SubsetColoring::from_spec(spec)?;
    let result = folkman_search(ground, k, |m| col.eval(m))?;
    let mut cert = match &result.outcome {
        FolkmanOutcome::Witness { parts, color } => {
            let rendered = render_parts(parts);
            let mut c = Certificate::new(
                "folkman",
                config,
                Outcome::Witness(format!("parts={rendered} color={color}")),
            );
            c.witness = vec![format!("{rendered} {color}")];
            c.validated = Some(validate_folkman_witness(parts, *color, |m| col.eval(m))?);
            c
        }
        FolkmanOutcome::Exhausted => Certificate::new("folkman", config, Outcome::Exhausted),
    };
    cert.push_stats(result.stats);
    Ok(cert)
}

fn render_parts(parts: &[u32]) -> String {
    let rendered: Vec<String> = parts.iter().map(|&m| crate::color::mask_key(m)).collect();
    rendered.join("|")
}

fn parse_parts(s: &str) -> Result<Vec<u32>> {
    s.split('|')
        .map(|part| {
            let mut mask = 0u32;
            for e in part.split(',') {
                let i: u32 = e
                    .parse()
                    .map_err(|_| Error::input(format!("bad element `{e}` in parts")))?;
                mask |= 1 << i;
            }
            Ok(mask)
        })
        .collect()
}

fn tree_config_entry(tree: &TreeSource) -> Result<(VectorTree, (String, String))> {
    let vt = tree.load()?;
    Ok((vt.clone(), ("tree".to_string(), vt.encode_compact())))
}

fn run_tree_hj(
    tree: &TreeSource,
    alphabet: usize,
    l: usize,
    q: usize,
    spec: &ColoringSpec,
) -> Result<Certificate> {
    positive("alphabet", alphabet)?;
    positive("q", q)?;
    let (vt, tree_entry) = tree_config_entry(tree)?;
    let config = vec![
        tree_entry,
        ("alphabet".to_string(), alphabet.to_string()),
        ("l".to_string(), l.to_string()),
        ("q".to_string(), q.to_string()),
        ("coloring".to_string(), spec.render()),
    ];
    let alph = Alphabet::new(alphabet)?;
    let x = canonical_subspace(&vt, &alph, 0, l, q)?;
    let col = WordColoring::from_spec(spec)?;
    let result = tree_hj_search(&vt, &alph, |w| col.eval(w), &x, q)?;
    let mut cert = match &result.outcome {
        TreeHjOutcome::Witness { x: witness, color } => {
            let mut c = Certificate::new(
                "tree-hj",
                config,
                Outcome::Witness(format!("color={color} blocks={}", witness.len())),
            );
            c.witness = witness.blocks.iter().map(|b| b.encode()).collect();
            c.validated = Some(validate_tree_hj_witness(
                &vt,
                &alph,
                |w| col.eval(w),
                &x,
                witness,
                *color,
            )?);
            c
        }
        TreeHjOutcome::Exhausted => Certificate::new("tree-hj", config, Outcome::Exhausted),
    };
    cert.push_stats(result.stats);
    Ok(cert)
}

fn render_subset(vs: &VectorSubset) -> Vec<String> {
    vs.levels
        .iter()
        .map(|(level, coords)| {
            let per: Vec<String> = coords
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|i| i.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            format!("level {level} {}", per.join("|"))
        })
        .collect()
}

fn parse_subset_line(line: &str) -> Result<(usize, Vec<BTreeSet<usize>>)> {
    let rest = line
        .strip_prefix("level ")
        .ok_or_else(|| Error::input(format!("expected `level ...`, got `{line}`")))?;
    let (lvl, coords_s) = rest
        .split_once(' ')
        .ok_or_else(|| Error::input(format!("malformed level line `{line}`")))?;
    let level: usize = lvl
        .parse()
        .map_err(|_| Error::input(format!("bad level `{lvl}`")))?;
    let coords = coords_s
        .split('|')
        .map(|c| {
            c.split(',')
                .map(|i| {
                    i.parse::<usize>()
                        .map_err(|_| Error::input(format!("bad index `{i}`")))
                })
                .collect::<Result<BTreeSet<usize>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((level, coords))
}

fn run_hl(tree: &TreeSource, spec: &ColoringSpec, m: usize) -> Result<Certificate> {
    positive("m", m)?;
    let (vt, tree_entry) = tree_config_entry(tree)?;
    let config = vec![
        tree_entry,
        ("coloring".to_string(), spec.render()),
        ("m".to_string(), m.to_string()),
    ];
    let d = VectorSubset::full_levels(&vt, 0, vt.height())?;
    let col = CellColoring::from_spec(spec)?;
    let result = hl_search(&vt, |c| col.eval(c), &d, m)?;
    let mut cert = match &result.outcome {
        HlOutcome::Witness {
            branch,
            subset,
            color,
        } => {
            let mut c = Certificate::new(
                "hl",
                config,
                Outcome::Witness(branch_summary(branch, *color)),
            );
            if let HlBranch::TDense { anchor } = branch {
                c.witness.push(format!("anchor {anchor}"));
            }
            c.witness.extend(render_subset(subset));
            c.validated = Some(validate_hl_witness(
                &vt,
                &|cell| col.eval(cell),
                &result.outcome,
                m,
            )?);
            c
        }
        HlOutcome::Exhausted => Certificate::new("hl", config, Outcome::Exhausted),
    };
    cert.push_stats(result.stats);
    Ok(cert)
}

fn branch_summary(branch: &HlBranch, color: u32) -> String {
    match branch {
        HlBranch::Dense => format!("branch=dense color={color}"),
        HlBranch::TDense { anchor } => format!("branch=t-dense anchor={anchor} color={color}"),
    }
}

fn run_disjoint_union(
    tree: &TreeSource,
    spec: &ColoringSpec,
    depth: usize,
    m: usize,
) -> Result<Certificate> {
    positive("depth", depth)?;
    positive("m", m)?;
    let (vt, tree_entry) = tree_config_entry(tree)?;
    let config = vec![
        tree_entry,
        ("coloring".to_string(), spec.render()),
        ("depth".to_string(), depth.to_string()),
        ("m".to_string(), m.to_string()),
    ];
    let depth = depth.min(vt.height());
    let base = VectorSubset::full_levels(&vt, 0, depth)?;
    let family = UFamily::singletons(&vt, base)?;
    let col = SetColoring::from_spec(spec)?;
    let result = disjoint_union_search(&vt, &family, |s| col.eval(s), depth, m)?;
    let mut cert = match &result.outcome {
        DuOutcome::Witness {
            branch,
            family: witness,
            color,
        } => {
            let mut c = Certificate::new(
                "disjoint-union",
                config,
                Outcome::Witness(branch_summary(branch, *color)),
            );
            if let HlBranch::TDense { anchor } = branch {
                c.witness.push(format!("anchor {anchor}"));
            }
            for t in witness.domain() {
                c.witness.push(format!("set {t} {}", witness.sets[&t].encode()));
            }
            c.validated = Some(validate_du_witness(
                &vt,
                &col,
                branch,
                witness,
                *color,
                depth,
                m,
            )?);
            c
        }
        DuOutcome::Exhausted => Certificate::new("disjoint-union", config, Outcome::Exhausted),
    };
    cert.push_stats(result.stats);
    cert.notes.extend(result.notes.iter().cloned());
    cert.notes.push(
        "witness pattern validated as dense-up-to-m (theorem statement); proof text says dominating"
            .to_string(),
    );
    Ok(cert)
}

fn validate_du_witness(
    vt: &VectorTree,
    col: &SetColoring,
    branch: &HlBranch,
    family: &UFamily,
    color: u32,
    depth: usize,
    m: usize,
) -> Result<bool> {
    // density pattern of the index base, per branch
    let hl_outcome = HlOutcome::Witness {
        branch: branch.clone(),
        subset: family.base.clone(),
        color,
    };
    // cell coloring induced by the family's own sets
    let induced = |c: &Cell| -> Result<u32> {
        family
            .sets
            .get(c)
            .map(|s| col.eval(s))
            .unwrap_or_else(|| Err(Error::input(format!("no set at {c}"))))
    };
    if !validate_hl_witness(vt, &induced, &hl_outcome, m)? {
        return Ok(false);
    }
    // every span element within depth carries the branch color
    for v in span_u_within(vt, family, depth)? {
        if col.eval(&v)? != color {
            return Ok(false);
        }
    }
    Ok(true)
}

fn run_counterexample(
    tree: &TreeSource,
    subtree_height: usize,
    depth: usize,
    set_cap: usize,
) -> Result<Certificate> {
    positive("subtree_height", subtree_height)?;
    positive("depth", depth)?;
    positive("set_cap", set_cap)?;
    let (vt, tree_entry) = tree_config_entry(tree)?;
    if vt.dim() != 1 {
        return Err(Error::config(
            "counterexample verification is defined for d=1 hosts",
        ));
    }
    let config = vec![
        tree_entry,
        ("subtree_height".to_string(), subtree_height.to_string()),
        ("depth".to_string(), depth.to_string()),
        ("set_cap".to_string(), set_cap.to_string()),
        ("coloring".to_string(), "counterexample_pair".to_string()),
    ];
    let report = verify_counterexample(vt.tree(0), subtree_height, depth, set_cap)?;
    let mut cert = if report.verified {
        Certificate::new(
            "counterexample",
            config,
            Outcome::Resolved("both-colors-attained".to_string()),
        )
    } else {
        let mut c = Certificate::new("counterexample", config, Outcome::Exhausted);
        if let Some(f) = &report.failing {
            c.notes.push(format!("monochromatic pair family: {f}"));
        }
        c
    };
    cert.push_stats(report.stats);
    cert.notes
        .push(format!("family generator capped at {} cells per set", report.set_size_cap));
    Ok(cert)
}

fn run_validate(path: &PathBuf) -> Result<Certificate> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read certificate `{}`: {e}", path.display())))?;
    let target = Certificate::parse(&text)?;
    let config = vec![("cert".to_string(), path.display().to_string())];
    let (ok, notes) = validate_certificate(&target)?;
    let mut cert = if ok {
        Certificate::new(
            "validate",
            config,
            Outcome::Resolved("certificate-valid".to_string()),
        )
    } else {
        Certificate::new(
            "validate",
            config,
            Outcome::Unresolved("certificate-invalid".to_string()),
        )
    };
    cert.notes = notes;
    Ok(cert)
}

/// Re-checks a parsed certificate: the config hash, the round trip, and
/// the witness payload against the independent checker for its command.
pub fn validate_certificate(cert: &Certificate) -> Result<(bool, Vec<String>)> {
    let mut notes = Vec::new();
    let mut ok = true;
    if !cert.hash_is_consistent() {
        notes.push("config hash mismatch".to_string());
        ok = false;
    }
    if Certificate::parse(&cert.serialize()).as_ref() != Ok(cert) {
        notes.push("serialization does not round-trip".to_string());
        ok = false;
    }
    let witness_ok = match cert.command.as_str() {
        "hj" => validate_hj_cert(cert, &mut notes)?,
        "lines" => validate_lines_cert(cert, &mut notes)?,
        "folkman" => validate_folkman_cert(cert, &mut notes)?,
        "tree-hj" => validate_tree_hj_cert(cert, &mut notes)?,
        "hl" => validate_hl_cert(cert, &mut notes)?,
        "disjoint-union" => validate_du_cert(cert, &mut notes)?,
        "counterexample" => validate_counterexample_cert(cert, &mut notes)?,
        "validate" => true,
        other => {
            notes.push(format!("unknown command `{other}`"));
            false
        }
    };
    Ok((ok && witness_ok, notes))
}

fn config_usize(cert: &Certificate, key: &str) -> Result<usize> {
    cert.config_value(key)
        .ok_or_else(|| Error::input(format!("certificate lacks config `{key}`")))?
        .parse()
        .map_err(|_| Error::input(format!("malformed config `{key}`")))
}

fn config_coloring(cert: &Certificate) -> Result<ColoringSpec> {
    ColoringSpec::parse(
        cert.config_value("coloring")
            .ok_or_else(|| Error::input("certificate lacks config `coloring`"))?,
    )
}

fn config_tree(cert: &Certificate) -> Result<VectorTree> {
    VectorTree::parse_compact(
        cert.config_value("tree")
            .ok_or_else(|| Error::input("certificate lacks config `tree`"))?,
    )
}

/// Witness tables open with an `avoiding-at n=<n>` header line.
fn witness_table_size(cert: &Certificate, notes: &mut Vec<String>) -> Option<usize> {
    let first = cert.witness.first()?;
    match first.strip_prefix("avoiding-at n=") {
        Some(n) => match n.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                notes.push(format!("malformed witness header `{first}`"));
                None
            }
        },
        None => {
            notes.push("missing avoiding-at witness header".to_string());
            None
        }
    }
}

fn validate_hj_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    if cert.witness.is_empty() {
        return Ok(true); // resolutions at n=1 carry no avoiding coloring
    }
    let k = config_usize(cert, "k")?;
    let Some(n) = witness_table_size(cert, notes) else {
        return Ok(false);
    };
    let words = crate::line::classic_words(k, n);
    let mut colors = vec![0u32; words.len()];
    for line in &cert.witness[1..] {
        let (word, color) = match line.rsplit_once(' ') {
            Some(p) => p,
            None => {
                notes.push(format!("malformed witness line `{line}`"));
                return Ok(false);
            }
        };
        let letters: Vec<u8> = word
            .chars()
            .filter_map(|ch| ch.to_digit(10).map(|d| d as u8))
            .collect();
        if letters.len() != n {
            notes.push(format!("witness word `{word}` has wrong length"));
            return Ok(false);
        }
        colors[crate::line::classic_rank(&letters, k)] = color
            .parse()
            .map_err(|_| Error::input(format!("bad color in `{line}`")))?;
    }
    if cert.witness.len() - 1 != words.len() {
        notes.push("avoiding coloring is not total".to_string());
        return Ok(false);
    }
    let table = ColoringTable { k, n, colors };
    let avoids = table.avoids_mono_line()?;
    if !avoids {
        notes.push("claimed avoiding coloring admits a monochromatic line".to_string());
    }
    Ok(avoids)
}

fn validate_lines_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    let k = config_usize(cert, "k")?;
    let n = config_usize(cert, "n")?;
    match &cert.outcome {
        Outcome::Resolved(_) => {
            let expect = (k + 1).pow(n as u32) - k.pow(n as u32);
            if cert.witness.is_empty() {
                return Ok(true);
            }
            if cert.witness.len() != expect {
                notes.push(format!(
                    "witness lists {} lines, expected {expect}",
                    cert.witness.len()
                ));
                return Ok(false);
            }
            let mut seen = BTreeSet::new();
            for enc in &cert.witness {
                let w = ClassicWord::parse(enc)?;
                if w.len() != n || !seen.insert(enc.clone()) {
                    notes.push(format!("bad or duplicate line `{enc}`"));
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Outcome::Witness(_) => {
            let col = ClassicColoring::from_spec(&config_coloring(cert)?)?;
            let Some(line) = cert.witness.first() else {
                notes.push("witness outcome without witness payload".to_string());
                return Ok(false);
            };
            let (enc, color_s) = line
                .rsplit_once(' ')
                .ok_or_else(|| Error::input(format!("malformed witness `{line}`")))?;
            let word = ClassicWord::parse(enc)?;
            let color: u32 = color_s
                .parse()
                .map_err(|_| Error::input(format!("bad color `{color_s}`")))?;
            for pt in word.points(k) {
                if col.eval(&pt)? != color {
                    notes.push("line is not monochromatic under the coloring".to_string());
                    return Ok(false);
                }
            }
            Ok(true)
        }
        _ => Ok(true),
    }
}

fn validate_folkman_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    let k = config_usize(cert, "k")?;
    match cert.config_value("mode") {
        Some("number") => {
            if cert.witness.is_empty() {
                return Ok(true);
            }
            let Some(n) = witness_table_size(cert, notes) else {
                return Ok(false);
            };
            let subsets = (1usize << n) - 1;
            if cert.witness.len() - 1 != subsets {
                notes.push("avoiding coloring is not total".to_string());
                return Ok(false);
            }
            let mut colors = vec![0u32; subsets];
            for line in &cert.witness[1..] {
                let (elems, color) = line
                    .rsplit_once(' ')
                    .ok_or_else(|| Error::input(format!("malformed witness `{line}`")))?;
                let mask = parse_parts(elems)?[0];
                colors[(mask - 1) as usize] = color
                    .parse()
                    .map_err(|_| Error::input(format!("bad color `{color}`")))?;
            }
            let table = SubsetColoringTable { n, colors };
            let ok = !table.admits_witness(k)?;
            if !ok {
                notes.push("claimed avoiding coloring admits a witness".to_string());
            }
            Ok(ok)
        }
        Some("search") => {
            if !matches!(cert.outcome, Outcome::Witness(_)) {
                return Ok(true);
            }
            let col = SubsetColoring::from_spec(&config_coloring(cert)?)?;
            let Some(line) = cert.witness.first() else {
                notes.push("witness outcome without payload".to_string());
                return Ok(false);
            };
            let (parts_s, color_s) = line
                .rsplit_once(' ')
                .ok_or_else(|| Error::input(format!("malformed witness `{line}`")))?;
            let parts = parse_parts(parts_s)?;
            let color: u32 = color_s
                .parse()
                .map_err(|_| Error::input(format!("bad color `{color_s}`")))?;
            let ok = validate_folkman_witness(&parts, color, |m| col.eval(m))?;
            if !ok {
                notes.push("witness family fails union recoloring check".to_string());
            }
            Ok(ok)
        }
        other => {
            notes.push(format!("unknown folkman mode {other:?}"));
            Ok(false)
        }
    }
}

fn validate_tree_hj_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    let Outcome::Witness(summary) = &cert.outcome else {
        return Ok(true);
    };
    let vt = config_tree(cert)?;
    let alph = Alphabet::new(config_usize(cert, "alphabet")?)?;
    let l = config_usize(cert, "l")?;
    let q = config_usize(cert, "q")?;
    let col = WordColoring::from_spec(&config_coloring(cert)?)?;
    let color = parse_summary_u32(summary, "color=")?;
    let blocks: Vec<VariableWord> = cert
        .witness
        .iter()
        .map(|enc| VariableWord::parse(&vt, &alph, enc))
        .collect::<Result<_>>()?;
    let witness = FiniteSubspace {
        anchor_k: 0,
        anchor_l: l,
        blocks,
    };
    let x = canonical_subspace(&vt, &alph, 0, l, q)?;
    let ok = validate_tree_hj_witness(&vt, &alph, |w| col.eval(w), &x, &witness, color)?;
    if !ok {
        notes.push("witness subspace fails span monochromaticity".to_string());
    }
    Ok(ok)
}

fn parse_summary_u32(summary: &str, key: &str) -> Result<u32> {
    for token in summary.split_whitespace() {
        if let Some(v) = token.strip_prefix(key) {
            return v
                .parse()
                .map_err(|_| Error::input(format!("bad `{key}` in outcome summary")));
        }
    }
    Err(Error::input(format!("outcome summary lacks `{key}`")))
}

fn parse_summary_anchor(summary: &str) -> Result<Option<Cell>> {
    for token in summary.split_whitespace() {
        if let Some(v) = token.strip_prefix("anchor=") {
            return Ok(Some(parse_cell(v)?));
        }
    }
    Ok(None)
}

fn parse_witness_subset(lines: &[String]) -> Result<(Option<Cell>, VectorSubset)> {
    let mut anchor = None;
    let mut vs = VectorSubset::new();
    for line in lines {
        if let Some(a) = line.strip_prefix("anchor ") {
            anchor = Some(parse_cell(a)?);
            continue;
        }
        let (level, coords) = parse_subset_line(line)?;
        vs.levels.insert(level, coords);
    }
    Ok((anchor, vs))
}

fn validate_hl_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    let Outcome::Witness(summary) = &cert.outcome else {
        return Ok(true);
    };
    let vt = config_tree(cert)?;
    let m = config_usize(cert, "m")?;
    let col = CellColoring::from_spec(&config_coloring(cert)?)?;
    let color = parse_summary_u32(summary, "color=")?;
    let (anchor, subset) = parse_witness_subset(&cert.witness)?;
    let branch = match (summary.contains("branch=dense"), anchor) {
        (true, _) => HlBranch::Dense,
        (false, Some(a)) => HlBranch::TDense { anchor: a },
        (false, None) => {
            notes.push("t-dense witness lacks an anchor".to_string());
            return Ok(false);
        }
    };
    let outcome = HlOutcome::Witness {
        branch,
        subset,
        color,
    };
    let ok = validate_hl_witness(&vt, &|c| col.eval(c), &outcome, m)?;
    if !ok {
        notes.push("witness fails density or color re-validation".to_string());
    }
    Ok(ok)
}

fn validate_du_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    let Outcome::Witness(summary) = &cert.outcome else {
        return Ok(true);
    };
    let vt = config_tree(cert)?;
    let m = config_usize(cert, "m")?;
    let depth = config_usize(cert, "depth")?.min(vt.height());
    let col = SetColoring::from_spec(&config_coloring(cert)?)?;
    let color = parse_summary_u32(summary, "color=")?;
    let anchor = parse_summary_anchor(summary)?;
    // rebuild the family from `set <t> <cells>` lines
    let mut sets: BTreeMap<Cell, MinSet> = BTreeMap::new();
    for line in &cert.witness {
        if line.starts_with("anchor ") {
            continue;
        }
        let rest = line
            .strip_prefix("set ")
            .ok_or_else(|| Error::input(format!("expected `set ...`, got `{line}`")))?;
        let (t_s, cells_s) = rest
            .split_once(' ')
            .ok_or_else(|| Error::input(format!("malformed set line `{line}`")))?;
        let t = parse_cell(t_s)?;
        let ms = MinSet::parse(&vt, cells_s)?;
        sets.insert(t, ms);
    }
    // base reconstruction: per level, per coordinate index sets; the index
    // cells must form the full product
    let mut base = VectorSubset::new();
    for t in sets.keys() {
        let coords = base
            .levels
            .entry(t.level)
            .or_insert_with(|| vec![BTreeSet::new(); vt.dim()]);
        for (i, &idx) in t.indices.iter().enumerate() {
            coords[i].insert(idx);
        }
    }
    let family = match UFamily::new(&vt, base, sets) {
        Ok(f) => f,
        Err(e) => {
            notes.push(format!("witness family invalid: {e}"));
            return Ok(false);
        }
    };
    let branch = match anchor {
        Some(a) => HlBranch::TDense { anchor: a },
        None => HlBranch::Dense,
    };
    let ok = validate_du_witness(&vt, &col, &branch, &family, color, depth, m)?;
    if !ok {
        notes.push("witness family fails span or density re-validation".to_string());
    }
    Ok(ok)
}

fn validate_counterexample_cert(cert: &Certificate, notes: &mut Vec<String>) -> Result<bool> {
    let vt = config_tree(cert)?;
    let report = verify_counterexample(
        vt.tree(0),
        config_usize(cert, "subtree_height")?,
        config_usize(cert, "depth")?,
        config_usize(cert, "set_cap")?,
    )?;
    let claimed = matches!(cert.outcome, Outcome::Resolved(_));
    if report.verified != claimed {
        notes.push("re-verification disagrees with the recorded outcome".to_string());
        return Ok(false);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_compact(h: usize) -> TreeSource {
        TreeSource::Compact(format!(
            "1|{}",
            vec!["2"; h - 1].join(",")
        ))
    }

    fn run_cmd(cmd: CommandSpec, workers: usize) -> Certificate {
        run(&RunConfig {
            command: cmd,
            workers,
        })
        .unwrap()
    }

    #[test]
    fn hj_certificate_roundtrip_and_exit() {
        let cert = run_cmd(
            CommandSpec::Hj {
                k: 2,
                r: 2,
                nmax: 4,
            },
            1,
        );
        assert!(matches!(&cert.outcome, Outcome::Resolved(s) if s == "hj(2,2)=2"));
        assert_eq!(cert.validated, Some(true));
        assert_eq!(cert.outcome.exit_code(), 0);
        let text = cert.serialize();
        let back = Certificate::parse(&text).unwrap();
        assert_eq!(back, cert);
        let (ok, notes) = validate_certificate(&back).unwrap();
        assert!(ok, "{notes:?}");
    }

    #[test]
    fn worker_count_does_not_change_bytes() {
        for cmd in [
            CommandSpec::Hj {
                k: 2,
                r: 2,
                nmax: 2,
            },
            CommandSpec::Lines {
                k: 2,
                n: 2,
                coloring: None,
            },
            CommandSpec::Hl {
                tree: binary_compact(4),
                coloring: ColoringSpec::LevelParity,
                m: 2,
            },
        ] {
            let a = run_cmd(cmd.clone(), 1).serialize();
            let b = run_cmd(cmd, 4).serialize();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lines_and_mono_line_certificates() {
        let cert = run_cmd(
            CommandSpec::Lines {
                k: 2,
                n: 2,
                coloring: None,
            },
            1,
        );
        assert!(matches!(&cert.outcome, Outcome::Resolved(s) if s == "count=5"));
        assert_eq!(cert.witness.len(), 5);
        let (ok, _) = validate_certificate(&cert).unwrap();
        assert!(ok);
        // constant coloring has the least line as witness
        let cert = run_cmd(
            CommandSpec::Lines {
                k: 2,
                n: 2,
                coloring: Some(ColoringSpec::Const(0)),
            },
            1,
        );
        assert!(matches!(&cert.outcome, Outcome::Witness(s) if s.starts_with("line=0v")));
        let (ok, _) = validate_certificate(&cert).unwrap();
        assert!(ok);
    }

    #[test]
    fn folkman_search_certificate() {
        let cert = run_cmd(
            CommandSpec::FolkmanSearch {
                k: 2,
                ground: 3,
                coloring: ColoringSpec::SizeMod(2),
            },
            1,
        );
        assert_eq!(cert.outcome, Outcome::Exhausted);
        assert_eq!(cert.outcome.exit_code(), 1);
        let cert = run_cmd(
            CommandSpec::FolkmanSearch {
                k: 2,
                ground: 4,
                coloring: ColoringSpec::Const(0),
            },
            1,
        );
        assert!(matches!(cert.outcome, Outcome::Witness(_)));
        assert_eq!(cert.validated, Some(true));
        let (ok, _) = validate_certificate(&cert).unwrap();
        assert!(ok);
    }

    #[test]
    fn tree_hj_certificate() {
        let cert = run_cmd(
            CommandSpec::TreeHj {
                tree: binary_compact(3),
                alphabet: 2,
                l: 0,
                q: 2,
                coloring: ColoringSpec::Const(1),
            },
            1,
        );
        assert!(matches!(&cert.outcome, Outcome::Witness(s) if s.contains("color=1")));
        assert_eq!(cert.validated, Some(true));
        let back = Certificate::parse(&cert.serialize()).unwrap();
        let (ok, notes) = validate_certificate(&back).unwrap();
        assert!(ok, "{notes:?}");
    }

    #[test]
    fn hl_certificate_and_validation() {
        let cert = run_cmd(
            CommandSpec::Hl {
                tree: binary_compact(5),
                coloring: ColoringSpec::LevelParity,
                m: 2,
            },
            1,
        );
        assert!(matches!(cert.outcome, Outcome::Witness(_)));
        assert_eq!(cert.validated, Some(true));
        let (ok, notes) = validate_certificate(&cert).unwrap();
        assert!(ok, "{notes:?}");
    }

    #[test]
    fn du_certificate_and_validation() {
        let cert = run_cmd(
            CommandSpec::DisjointUnion {
                tree: binary_compact(4),
                coloring: ColoringSpec::MinLevelMod(2),
                depth: 4,
                m: 2,
            },
            1,
        );
        assert!(matches!(cert.outcome, Outcome::Witness(_)));
        assert_eq!(cert.validated, Some(true));
        let back = Certificate::parse(&cert.serialize()).unwrap();
        let (ok, notes) = validate_certificate(&back).unwrap();
        assert!(ok, "{notes:?}");
    }

    #[test]
    fn counterexample_certificate() {
        let cert = run_cmd(
            CommandSpec::Counterexample {
                tree: binary_compact(3),
                subtree_height: 2,
                depth: 3,
                set_cap: 2,
            },
            1,
        );
        assert!(matches!(&cert.outcome, Outcome::Resolved(s) if s == "both-colors-attained"));
        let (ok, notes) = validate_certificate(&cert).unwrap();
        assert!(ok, "{notes:?}");
    }

    #[test]
    fn tampered_witness_detected() {
        let mut cert = run_cmd(
            CommandSpec::Hl {
                tree: binary_compact(5),
                coloring: ColoringSpec::LevelParity,
                m: 2,
            },
            1,
        );
        // push the witness onto a wrong level
        cert.witness = cert
            .witness
            .iter()
            .map(|l| l.replace("level 1", "level 0"))
            .collect();
        let (ok, _) = validate_certificate(&cert).unwrap();
        assert!(!ok);
    }

    #[test]
    fn budget_errors() {
        assert!(matches!(
            run(&RunConfig {
                command: CommandSpec::Hj { k: 0, r: 2, nmax: 2 },
                workers: 1
            }),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run(&RunConfig {
                command: CommandSpec::Hj { k: 2, r: 2, nmax: 2 },
                workers: 0
            }),
            Err(Error::Config(_))
        ));
    }
}
