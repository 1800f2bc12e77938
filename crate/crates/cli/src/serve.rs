// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::net::SocketAddr;
use std::sync::Arc;

use ecoprompt_server::{serve_on, AppState, Providers};

use crate::{load_config, CliError, ServeArgs};

/// Resolves on ctrl-c, or SIGTERM on unix.
async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

pub fn run(args: ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_target(false)
        .try_init();

    let config = load_config(args.config.as_deref())?;
    let mode = args.provider.unwrap_or(config.provider.mode);
    let providers = Providers::from_config(&config);
    let state = AppState::open(config, &args.data_dir, mode, providers)
        .map_err(|e| CliError::Data(format!("startup failed: {e}")))?;

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let addr = SocketAddr::new(args.host, args.port);
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Data(format!("cannot bind {addr}: {e}")))?;
        let bound = listener.local_addr()?;
        writeln!(out, "listening on http://{bound} (provider {mode})")?;
        out.flush()?;
        serve_on(Arc::new(state), listener, shutdown_signal()).await?;
        writeln!(out, "shut down")?;
        Ok(())
    })
}
