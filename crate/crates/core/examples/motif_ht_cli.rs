//! Drive the command-line interface in-process.

use clap::Parser;
use motif_ht::cli::{run, Cli};

fn main() -> motif_ht::Result<()> {
    let dir = std::env::temp_dir().join("motif-ht-example");
    std::fs::create_dir_all(&dir)?;
    let graph = dir.join("er.txt");
    let graph = graph.to_str().unwrap();
    let ensemble = r#"{"kind":"erdos_renyi","n":200,"q":0.05,"seed":1}"#;
    run(&Cli::parse_from(["motif-ht", "generate", "--ensemble", ensemble, "--out", graph]))?;
    run(&Cli::parse_from(["motif-ht", "count", "--graph", graph, "--motif", "triangle"]))?;
    run(&Cli::parse_from(["motif-ht", "estimate", "--graph", graph, "--motif", "wedge", "--p", "0.3", "--seed", "5"]))?;
    Ok(())
}
