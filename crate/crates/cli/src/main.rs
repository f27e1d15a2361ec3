use clap::Parser;

fn main() {
    let cli = tradekit_cli::Cli::parse();
    if let Err(err) = tradekit_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
