use clap::Parser;

mod cli;

fn main() {
    let args = cli::Cli::parse();
    match cli::run(&args) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}
