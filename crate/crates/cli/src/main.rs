use clap::Parser;

fn main() {
    let cli = satjam::Cli::parse();
    if let Err(e) = satjam::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(satjam::exit_code(&e));
    }
}
