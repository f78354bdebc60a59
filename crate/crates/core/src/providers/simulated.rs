use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::{
    AudioBlob, CallPolicy, ClipBlob, DelayRange, DialogueModel, DialogueRequest, LipSync,
    ProviderConfig, ProviderError, Synthesizer, Transcriber, VoiceParams,
};
use crate::assets::{BaseVideo, VoiceModelRef};

/// Wraps a binding and delays every call by a uniform draw from the
/// configured range before delegating. Used to reproduce slow render
/// farms without one. The configured timeout still applies.
pub struct Simulated<T> {
    inner: T,
    range: DelayRange,
    policy: CallPolicy,
    rng: Mutex<StdRng>,
}

impl<T> Simulated<T> {
    pub fn new(inner: T, config: &ProviderConfig) -> Self {
        let range = config.simulated_delay_ms.unwrap_or(DelayRange { lo: 0, hi: 0 });
        let rng = match config.seed {
            Some(seed) => StdRng::seed_from_u64(seed),
            None => StdRng::from_os_rng(),
        };
        Self {
            inner,
            range,
            policy: CallPolicy {
                max_retries: 0,
                ..CallPolicy::from_config(config)
            },
            rng: Mutex::new(rng),
        }
    }

    fn next_delay(&self) -> Duration {
        let ms = self
            .rng
            .lock()
            .expect("simulated rng lock")
            .random_range(self.range.lo..=self.range.hi);
        Duration::from_millis(ms)
    }

    async fn delayed<R, F>(&self, call: F) -> Result<R, ProviderError>
    where
        F: std::future::Future<Output = Result<R, ProviderError>>,
    {
        let delay = self.next_delay();
        let mut call = Some(call);
        self.policy
            .run(|_| {
                let call = call.take();
                async move {
                    tokio::time::sleep(delay).await;
                    match call {
                        Some(c) => c.await,
                        None => Err(ProviderError::Timeout),
                    }
                }
            })
            .await
    }
}

#[async_trait]
impl<T: Transcriber> Transcriber for Simulated<T> {
    async fn transcribe(&self, audio: &AudioBlob) -> Result<String, ProviderError> {
        self.delayed(self.inner.transcribe(audio)).await
    }

    fn is_enabled(&self) -> bool {
        self.inner.is_enabled()
    }
}

#[async_trait]
impl<T: DialogueModel> DialogueModel for Simulated<T> {
    async fn generate_reply(&self, request: DialogueRequest<'_>) -> Result<String, ProviderError> {
        self.delayed(self.inner.generate_reply(request)).await
    }
}

#[async_trait]
impl<T: Synthesizer> Synthesizer for Simulated<T> {
    async fn synthesize(
        &self,
        text: &str,
        voice: &VoiceModelRef,
        params: &VoiceParams,
    ) -> Result<AudioBlob, ProviderError> {
        self.delayed(self.inner.synthesize(text, voice, params)).await
    }
}

#[async_trait]
impl<T: LipSync> LipSync for Simulated<T> {
    async fn render(&self, base: &BaseVideo, audio: &AudioBlob) -> Result<ClipBlob, ProviderError> {
        self.delayed(self.inner.render(base, audio)).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::providers::{OfflineLipSync, ProviderKind};
    use tokio::time::Instant;

    fn base() -> BaseVideo {
        BaseVideo {
            base_video_id: "maria-base-01".into(),
            checksum: "0".repeat(64),
            duration_ms: 8000,
            loopable: true,
            container: "mp4".into(),
            size: 0,
        }
    }

    #[tokio::test(start_paused = true)]
    async fn render_waits_inside_range() {
        let range = DelayRange { lo: 20_000, hi: 30_000 };
        let mut cfg = ProviderConfig::simulated(ProviderKind::Lipsync, range);
        cfg.seed = Some(7);
        let sim = Simulated::new(OfflineLipSync, &cfg);
        let audio = AudioBlob::from_samples(&[1; 160]);
        let direct = OfflineLipSync.render(&base(), &audio).await.unwrap();
        for _ in 0..5 {
            let start = Instant::now();
            let clip = sim.render(&base(), &audio).await.unwrap();
            let waited = start.elapsed();
            assert!(waited >= Duration::from_millis(20_000), "{waited:?}");
            assert!(waited <= Duration::from_millis(30_000), "{waited:?}");
            assert_eq!(clip, direct);
        }
    }

    #[tokio::test(start_paused = true)]
    async fn delay_beyond_timeout_is_timeout() {
        let mut cfg = ProviderConfig::simulated(ProviderKind::Lipsync, DelayRange { lo: 5_000, hi: 5_000 });
        cfg.timeout_ms = 1_000;
        let sim = Simulated::new(OfflineLipSync, &cfg);
        let audio = AudioBlob::from_samples(&[1; 160]);
        assert_eq!(sim.render(&base(), &audio).await, Err(ProviderError::Timeout));
    }

    #[test]
    fn seeded_delays_repeat() {
        let mut cfg = ProviderConfig::simulated(ProviderKind::Lipsync, DelayRange { lo: 0, hi: 1_000_000 });
        cfg.seed = Some(42);
        let a = Simulated::new(OfflineLipSync, &cfg);
        let b = Simulated::new(OfflineLipSync, &cfg);
        let da: Vec<_> = (0..5).map(|_| a.next_delay()).collect();
        let db: Vec<_> = (0..5).map(|_| b.next_delay()).collect();
        assert_eq!(da, db);
    }
}
