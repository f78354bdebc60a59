//! Build providers from a TOML configuration that points at remote vendors.
//!
//! ```text
//! DIALOGUE_API_KEY=... cargo run --example remote_config
//! ```
//!
//! Credentials are read from the named environment variables when a call is
//! made; the configuration only carries their names. No request is sent here.

use synthpatient::gateway::AppConfig;
use synthpatient::providers::ProviderSet;

const CONFIG: &str = r#"
[server]
bind = "127.0.0.1:8080"

[providers.transcriber]
kind = "transcriber"
mode = "disabled"

[providers.dialogue]
kind = "dialogue"
mode = "remote"
endpoint = "https://dialogue.example.com/v1/reply"
credential_env = "DIALOGUE_API_KEY"
timeout_ms = 20000
max_retries = 2

[providers.synthesizer]
kind = "synthesizer"
mode = "offline"

[providers.lipsync]
kind = "lipsync"
mode = "simulated"
simulated_delay_ms = [20000, 30000]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config: AppConfig = toml::from_str(CONFIG)?;
    config.validate()?;
    let providers = ProviderSet::from_config(&config.providers)?;
    println!("{providers:?}");
    println!("text only: {}", providers.text_only());
    match std::env::var("DIALOGUE_API_KEY") {
        Ok(_) => println!("DIALOGUE_API_KEY is set"),
        Err(_) => println!("DIALOGUE_API_KEY is not set; dialogue calls would fail with an auth error"),
    }
    Ok(())
}
