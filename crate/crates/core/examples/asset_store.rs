//! Register a base video, verify the store, damage a file and verify again.
//!
//! ```text
//! cargo run --example asset_store
//! ```

use synthpatient::assets::{AssetKind, AssetStore};
use synthpatient::providers::{sine_tone, AudioBlob};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let store = AssetStore::open(dir.path())?;

    let bytes = AudioBlob::from_samples(&sine_tone(1_500)).into_bytes();
    let id = store.register_base_video(Some("demo-base"), &bytes, 1_500, true, "wav")?;
    let base = store.base_video(&id)?;
    println!("registered {} ({} bytes, sha256 {})", base.base_video_id, base.size, &base.checksum[..16]);

    let report = store.fsck();
    println!("fsck: {} checked, {} problems", report.checked, report.problems.len());

    let path = store.file_path(AssetKind::BaseVideo, &id)?;
    let mut damaged = std::fs::read(&path)?;
    damaged[0] ^= 0xff;
    std::fs::write(&path, damaged)?;

    let report = store.fsck();
    for p in &report.problems {
        println!("fsck: {} {}: {}", p.kind, p.id, p.problem);
    }
    match store.read_base_video(&id) {
        Ok(_) => println!("read succeeded unexpectedly"),
        Err(e) => println!("read refused: {e}"),
    }
    Ok(())
}
