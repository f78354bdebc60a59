use super::{Outcome, ServeArgs};
use crate::gateway::{self, AppConfig};

pub(super) async fn run(args: ServeArgs) -> Outcome {
    let mut config = match &args.config {
        Some(path) => match AppConfig::load(path) {
            Ok(mut c) => {
                if let Some(dir) = path.parent() {
                    c.resolve_paths(dir);
                }
                c
            }
            Err(e) => return Outcome::usage("invalid_config", e.to_string()),
        },
        None => AppConfig::default(),
    };
    if let Some(bind) = args.bind {
        config.server.bind = bind;
    }
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    match gateway::serve(config, shutdown).await {
        Ok(()) => Outcome::ok(serde_json::json!({ "stopped": true }), ""),
        Err(e) => Outcome::fail("serve_failed", e.to_string()),
    }
}
