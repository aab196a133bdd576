use std::io::Write;
use std::net::SocketAddr;
use std::process::ExitCode;

use clap::Parser;
use rebuild_core::canonical;
use rebuild_service::api::{self, AppState};
use rebuild_service::cli::{self, Cli, Command};
use rebuild_service::ops::OpError;
use rebuild_service::store::Store;

fn fail(e: &OpError) -> ExitCode {
    eprintln!("{}", canonical::to_string(&e.body()));
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Command::Serve { port, bind } = &args.command {
        let state = AppState::new(Store::new(&args.data_dir), cli::workers(&args));
        let addr = SocketAddr::new(*bind, *port);
        let served = tokio::runtime::Runtime::new()
            .and_then(|rt| rt.block_on(api::serve(state, addr)));
        return match served {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(&OpError::Io(format!("serve on {addr}: {e}"))),
        };
    }
    match cli::execute(&args) {
        Ok((text, _)) => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&OpError::Io(e.to_string())),
            }
        }
        Err(e) => fail(&e),
    }
}
