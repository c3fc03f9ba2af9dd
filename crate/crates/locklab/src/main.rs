use clap::Parser;

fn main() {
    let cli = locklab::cli::Cli::parse();
    if let Err(err) = locklab::cli::run(cli) {
        let payload = serde_json::json!({ "error": format!("{err:#}") });
        eprintln!("{payload}");
        std::process::exit(1);
    }
}
