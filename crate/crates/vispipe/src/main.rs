use clap::Parser;
use tracing_subscriber::EnvFilter;
use vispipe::cli::{run, Cli};

#[tokio::main]
async fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(level)))
        .init();
    if let Err(e) = run(cli).await {
        tracing::error!(code = e.code(), "{e}");
        eprintln!("error[{}]: {e}", e.code());
        std::process::exit(e.exit_code());
    }
}
