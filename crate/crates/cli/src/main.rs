use clap::Parser;

fn main() -> std::process::ExitCode {
    hardy_cli::run(hardy_cli::Cli::parse())
}
