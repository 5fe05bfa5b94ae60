//! Command-line driver: parses arguments into a run configuration,
//! executes it, writes the certificate to stdout or a file, and maps the
//! outcome to the exit code (0 witness/resolved, 1 exhausted/unresolved,
//! 2 input or configuration error).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use duet_core::color::ColoringSpec;
use duet_core::shell::{self, CommandSpec, RunConfig, TreeSource};

#[derive(Parser)]
#[command(name = "duet")]
#[command(about = "Exhaustive verification of disjoint-union and Hales-Jewett type theorems on level products of trees")]
#[command(version)]
struct Cli {
    /// Worker threads (default: DUET_WORKERS or 1)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Write the certificate to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TreeArg {
    /// Tree spec file (`d <dim>` then `tree <b0> <b1> ...` lines)
    #[arg(long)]
    tree: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the Hales-Jewett number HJ(k, r) up to a length bound
    Hj {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        nmax: usize,
    },
    /// Enumerate combinatorial lines, or search a coloring for a
    /// monochromatic one
    Lines {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Classic-word coloring (`const C`, `letter_count_mod M`, `table PATH`)
        #[arg(long)]
        coloring: Option<String>,
    },
    /// Folkman search on a fixed ground set, or number certification
    Folkman {
        #[arg(long)]
        k: usize,
        /// Number mode: palette size
        #[arg(long, conflicts_with_all = ["ground", "coloring"])]
        colors: Option<usize>,
        /// Number mode: ground size bound
        #[arg(long, requires = "colors")]
        nmax: Option<usize>,
        /// Search mode: ground set size
        #[arg(long, requires = "coloring")]
        ground: Option<usize>,
        /// Search mode: subset coloring (`size_mod M`, `const C`, `table PATH`)
        #[arg(long)]
        coloring: Option<String>,
    },
    /// Tree-Hales-Jewett search over the canonical subspace
    TreeHj {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        /// Anchor level of the subspace
        #[arg(long, default_value_t = 0)]
        l: usize,
        /// Number of blocks searched
        #[arg(long)]
        q: usize,
        /// Word coloring (`const C`, `letter_count_mod M`, `table PATH`)
        #[arg(long)]
        coloring: String,
    },
    /// Finite Halpern-Lauchli search on a cell coloring
    Hl {
        #[command(flatten)]
        tree: TreeArg,
        /// Cell coloring (`level_parity`, `const C`, `table PATH`)
        #[arg(long)]
        coloring: String,
        /// Levels required in the witness pattern
        #[arg(long)]
        m: usize,
    },
    /// Disjoint-union pipeline over the canonical singleton family
    DisjointUnion {
        #[command(flatten)]
        tree: TreeArg,
        /// Set coloring (`size_mod M`, `min_level_mod M`, `level_parity`,
        /// `const C`, `table PATH`)
        #[arg(long)]
        coloring: String,
        /// Family depth (levels of the index base)
        #[arg(long)]
        depth: usize,
        /// Levels required in the witness pattern
        #[arg(long)]
        m: usize,
    },
    /// Verify the pair-coloring counterexample on strong subtrees
    Counterexample {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long, default_value_t = 2)]
        subtree_height: usize,
        #[arg(long)]
        depth: usize,
        /// Cells per family set in the canonical generator
        #[arg(long, default_value_t = 2)]
        set_cap: usize,
    },
    /// Re-check a previously emitted certificate
    Validate {
        /// Certificate file
        cert: PathBuf,
    },
}

fn build_config(cli: &Cli) -> Result<RunConfig, duet_core::Error> {
    let workers = match cli.workers {
        Some(w) => w,
        None => std::env::var(shell::WORKERS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(1),
    };
    let coloring = |s: &str| ColoringSpec::parse(s);
    let command = match &cli.command {
        Command::Hj { k, r, nmax } => CommandSpec::Hj {
            k: *k,
            r: *r,
            nmax: *nmax,
        },
        Command::Lines { k, n, coloring: c } => CommandSpec::Lines {
            k: *k,
            n: *n,
            coloring: c.as_deref().map(coloring).transpose()?,
        },
        Command::Folkman {
            k,
            colors,
            nmax,
            ground,
            coloring: c,
        } => match (colors, ground) {
            (Some(colors), None) => CommandSpec::FolkmanNumber {
                k: *k,
                colors: *colors,
                nmax: nmax.ok_or_else(|| {
                    duet_core::Error::config("folkman number mode needs --nmax")
                })?,
            },
            (None, Some(ground)) => CommandSpec::FolkmanSearch {
                k: *k,
                ground: *ground,
                coloring: coloring(c.as_deref().ok_or_else(|| {
                    duet_core::Error::config("folkman search mode needs --coloring")
                })?)?,
            },
            _ => {
                return Err(duet_core::Error::config(
                    "folkman needs either --colors/--nmax (number) or --ground/--coloring (search)",
                ))
            }
        },
        Command::TreeHj {
            tree,
            alphabet,
            l,
            q,
            coloring: c,
        } => CommandSpec::TreeHj {
            tree: TreeSource::Path(tree.tree.clone()),
            alphabet: *alphabet,
            l: *l,
            q: *q,
            coloring: coloring(c)?,
        },
        Command::Hl {
            tree,
            coloring: c,
            m,
        } => CommandSpec::Hl {
            tree: TreeSource::Path(tree.tree.clone()),
            coloring: coloring(c)?,
            m: *m,
        },
        Command::DisjointUnion {
            tree,
            coloring: c,
            depth,
            m,
        } => CommandSpec::DisjointUnion {
            tree: TreeSource::Path(tree.tree.clone()),
            coloring: coloring(c)?,
            depth: *depth,
            m: *m,
        },
        Command::Counterexample {
            tree,
            subtree_height,
            depth,
            set_cap,
        } => CommandSpec::Counterexample {
            tree: TreeSource::Path(tree.tree.clone()),
            subtree_height: *subtree_height,
            depth: *depth,
            set_cap: *set_cap,
        },
        Command::Validate { cert } => CommandSpec::Validate { cert: cert.clone() },
    };
    Ok(RunConfig { command, workers })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("duet: {e}");
            return ExitCode::from(2);
        }
    };
    let started = Instant::now();
    match shell::run(&config) {
        Ok(cert) => {
            let text = cert.serialize();
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("duet: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            eprintln!("duet: {} in {:?}", cert.outcome_label(), started.elapsed());
            ExitCode::from(cert.outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("duet: {e}");
            ExitCode::from(2)
        }
    }
}
