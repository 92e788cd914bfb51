use clap::Parser;
use streamlearn_cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let code = dispatch(cli, &mut stdout);
    std::process::exit(code);
}
