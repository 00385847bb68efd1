use clap::Parser;
use dsmc_cli::app::{main_with, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = main_with(cli, &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
