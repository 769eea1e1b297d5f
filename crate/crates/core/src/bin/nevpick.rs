use clap::Parser;
use nevpick::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(Cli::parse()));
}
