//! Validate a patient profile and assemble its dialogue prompt.
//!
//! ```text
//! cargo run --example persona_prompt [-- path/to/profile.json]
//! ```
//!
//! Without an argument the bundled Maria Gonzalez profile is used.

use synthpatient::persona::{assemble_prompt, fixtures, parse_profile, validate_profile, RolePlayInstructions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = match std::env::args().nth(1) {
        Some(path) => {
            let loaded = parse_profile(&std::fs::read(&path)?)?;
            for w in &loaded.warnings {
                println!("{w}");
            }
            loaded.profile
        }
        None => fixtures::maria(),
    };

    let report = validate_profile(&profile);
    for issue in &report.issues {
        println!("{issue}");
    }
    if !report.ok {
        println!("{} is not usable", profile.id);
        std::process::exit(1);
    }

    let prompt = assemble_prompt(&profile, &RolePlayInstructions::default_set())?;
    println!("{}\n", prompt.system_text);
    println!("profile:      {}", prompt.profile_id);
    println!("instructions: {}", prompt.instructions_version);
    println!("hash:         {}", prompt.content_hash);
    Ok(())
}
