use clap::Parser;

fn main() {
    let cli = qhm::Cli::parse();
    std::process::exit(qhm::main_with(&cli.command));
}
