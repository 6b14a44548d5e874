use clap::Parser;

fn main() {
    let cli = hazrank_cli::Cli::parse();
    std::process::exit(hazrank_cli::run(cli));
}
