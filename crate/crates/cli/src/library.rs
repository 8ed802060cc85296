//! Macro-library maintenance.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Subcommand;
use nsplan_core::macrolib::MacroLibrary;
use nsplan_core::similarity::SimilarityProvider;

#[derive(Subcommand)]
pub enum LibraryCommand {
    /// List entries as `id<TAB>cluster<TAB>description<TAB>steps`.
    List { path: PathBuf },
    /// Cluster entries by description similarity and save the assignment.
    Cluster {
        path: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        threshold: f64,
    },
    /// Print the best entry for a description, if similar enough.
    Lookup {
        path: PathBuf,
        description: String,
        #[arg(long, default_value_t = 0.8)]
        min_sim: f64,
    },
}

pub fn cmd_library(cmd: LibraryCommand) -> Result<ExitCode> {
    let sim = SimilarityProvider::Trigram;
    match cmd {
        LibraryCommand::List { path } => {
            let lib = MacroLibrary::load(&path).with_context(|| format!("loading {}", path.display()))?;
            let mut out = io::stdout().lock();
            for e in lib.entries() {
                let cluster = e.cluster.map_or("-".to_string(), |c| c.to_string());
                writeln!(out, "{}\t{}\t{}\t{}", e.id, cluster, e.description, e.block.len())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        LibraryCommand::Cluster { path, threshold } => {
            let mut lib = MacroLibrary::load(&path).with_context(|| format!("loading {}", path.display()))?;
            let assignment = lib.cluster(threshold, &sim)?;
            lib.save(&path).with_context(|| format!("saving {}", path.display()))?;
            let clusters: std::collections::BTreeSet<usize> = assignment.iter().map(|&(_, c)| c).collect();
            println!("{} entries in {} clusters", assignment.len(), clusters.len());
            Ok(ExitCode::SUCCESS)
        }
        LibraryCommand::Lookup { path, description, min_sim } => {
            let lib = MacroLibrary::load(&path).with_context(|| format!("loading {}", path.display()))?;
            match lib.lookup(&description, min_sim, &sim)? {
                Some(e) => {
                    println!("{}\t{}", e.id, e.description);
                    for a in &e.block {
                        println!("  {a}");
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    println!("no entry at or above {min_sim}");
                    Ok(ExitCode::FAILURE)
                }
            }
        }
    }
}
