use clap::Parser;
use orbitlab::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            println!("{}", out.csv.display());
            println!("{}", out.json.display());
        }
        Err(e) => {
            eprintln!("orbitlab: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
