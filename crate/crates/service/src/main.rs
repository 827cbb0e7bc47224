use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use semiom_service::{serve, Registry, Store};

/// Serve semiom sessions over HTTP.
#[derive(Debug, Parser)]
#[command(name = "semiom-serve", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory of extra `*.json` packs; they replace bundled packs with the same id.
    #[arg(long)]
    pack_dir: Option<PathBuf>,
    /// Sessions are restored from this file at start, if it exists, and written back on shutdown.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(err) => {
            eprintln!("semiom-serve: {err}");
            return ExitCode::from(2);
        }
    };
    match runtime.block_on(run(args)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("semiom-serve: {err}");
            ExitCode::from(2)
        }
    }
}

async fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let mut registry = Registry::bundled();
    if let Some(dir) = &args.pack_dir {
        registry.load_dir(dir)?;
    }
    let store = Arc::new(Store::new(registry));
    if let Some(path) = args.snapshot.as_deref().filter(|p| p.exists()) {
        let count = store.load_snapshot(path)?;
        eprintln!("restored {count} sessions from {}", path.display());
    }
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    serve(listener, store.clone(), async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    if let Some(path) = &args.snapshot {
        let count = store.write_snapshot(path)?;
        eprintln!("saved {count} sessions to {}", path.display());
    }
    Ok(())
}
