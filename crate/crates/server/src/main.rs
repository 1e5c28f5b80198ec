use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pcs_core::config::Settings;
use pcs_server::{prepare_cache_dir, router, AppState};

#[derive(Debug, Parser)]
#[command(name = "pcs-server", version, about = "Serve citation spectra and the web UI over HTTP")]
struct Args {
    /// TOML settings file
    #[arg(long, env = "PCS_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long)]
    bind: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    /// Directory holding the built web UI
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn settings(args: &Args) -> Result<Settings, String> {
    let mut settings = Settings::load(args.config.as_deref()).map_err(|e| e.to_string())?;
    if let Some(bind) = &args.bind {
        settings.bind = bind.clone();
    }
    if let Some(port) = args.port {
        settings.port = port;
    }
    if let Some(dir) = &args.ui_dir {
        settings.ui_dir = dir.clone();
    }
    if let Some(dir) = &args.cache_dir {
        settings.cache_dir = dir.clone();
    }
    Ok(settings)
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PCS_LOG", "info")).init();
    let args = Args::parse();

    let settings = match settings(&args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("pcs-server: {e}");
            return ExitCode::from(2);
        }
    };
    let addr: SocketAddr = match format!("{}:{}", settings.bind, settings.port).parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("pcs-server: invalid bind address {}: {e}", settings.bind);
            return ExitCode::from(2);
        }
    };
    prepare_cache_dir(&settings);
    let state = match AppState::from_settings(settings) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("pcs-server: {e}");
            return ExitCode::from(2);
        }
    };

    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("pcs-server: cannot bind {addr}: {e}");
            return ExitCode::from(1);
        }
    };
    log::info!("listening on http://{addr}");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
    {
        eprintln!("pcs-server: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
