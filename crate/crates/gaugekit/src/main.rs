use clap::Parser;
use gaugekit::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gaugekit: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
