use std::collections::HashMap;
use std::sync::Mutex;

use tokio_util::sync::CancellationToken;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JobState {
    Running,
    Ready,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CancelAck {
    /// The job was running and has been told to stop.
    Cancelled,
    /// The job had already finished; nothing changed.
    AlreadyFinished,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown job `{0}`")]
pub struct UnknownJob(pub String);

#[derive(Debug)]
struct JobEntry {
    token: CancellationToken,
    state: JobState,
}

/// Cancellation handles for jobs, keyed by job id.
#[derive(Debug, Default)]
pub struct JobRegistry {
    jobs: Mutex<HashMap<String, JobEntry>>,
}

impl JobRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a running job and returns its cancellation token.
    pub fn start(&self, job_id: &str) -> CancellationToken {
        let token = CancellationToken::new();
        self.jobs.lock().expect("job registry lock").insert(
            job_id.to_string(),
            JobEntry {
                token: token.clone(),
                state: JobState::Running,
            },
        );
        token
    }

    pub fn finish(&self, job_id: &str, state: JobState) {
        if let Some(e) = self.jobs.lock().expect("job registry lock").get_mut(job_id) {
            e.state = state;
        }
    }

    pub fn state(&self, job_id: &str) -> Option<JobState> {
        self.jobs
            .lock()
            .expect("job registry lock")
            .get(job_id)
            .map(|e| e.state)
    }

    pub fn cancel(&self, job_id: &str) -> Result<CancelAck, UnknownJob> {
        let jobs = self.jobs.lock().expect("job registry lock");
        let entry = jobs.get(job_id).ok_or_else(|| UnknownJob(job_id.to_string()))?;
        if entry.state != JobState::Running {
            return Ok(CancelAck::AlreadyFinished);
        }
        entry.token.cancel();
        Ok(CancelAck::Cancelled)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancel_lifecycle() {
        let reg = JobRegistry::new();
        assert_eq!(reg.cancel("nope"), Err(UnknownJob("nope".into())));
        let t = reg.start("j1");
        assert_eq!(reg.cancel("j1"), Ok(CancelAck::Cancelled));
        assert!(t.is_cancelled());

        let t2 = reg.start("j2");
        reg.finish("j2", JobState::Ready);
        assert_eq!(reg.cancel("j2"), Ok(CancelAck::AlreadyFinished));
        assert!(!t2.is_cancelled());
        assert_eq!(reg.state("j2"), Some(JobState::Ready));
    }
}
