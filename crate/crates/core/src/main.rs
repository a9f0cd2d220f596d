use clap::Parser;

use double_phase::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
