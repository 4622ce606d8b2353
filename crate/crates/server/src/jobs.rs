//! In-process job queue with a fixed number of blocking workers.

use chrono::{DateTime, Utc};
use page_core::clock::Clock;
use page_core::pipeline::Pipeline;
use page_core::Error;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use tokio::sync::{mpsc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Retrieve,
    Personalize,
    Evaluate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }

    /// queued -> running -> {done, failed}, never backwards.
    pub fn can_become(self, next: JobStatus) -> bool {
        matches!(
            (self, next),
            (JobStatus::Queued, JobStatus::Running) | (JobStatus::Running, JobStatus::Done | JobStatus::Failed)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub job_id: String,
    pub kind: JobKind,
    pub status: JobStatus,
    pub profile_id: String,
    pub module_id: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished_at: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

struct Task {
    job_id: String,
}

pub struct JobQueue {
    jobs: RwLock<HashMap<String, Job>>,
    sender: mpsc::Sender<Task>,
}

impl JobQueue {
    /// Spawns `workers` consumers on the current runtime.
    pub fn start(pipeline: Arc<Pipeline>, workers: usize) -> Arc<Self> {
        let (sender, receiver) = mpsc::channel::<Task>(1024);
        let queue = Arc::new(Self {
            jobs: RwLock::new(HashMap::new()),
            sender,
        });
        let receiver = Arc::new(Mutex::new(receiver));
        for _ in 0..workers.max(1) {
            let queue = queue.clone();
            let pipeline = pipeline.clone();
            let receiver = receiver.clone();
            tokio::spawn(async move {
                loop {
                    let task = receiver.lock().await.recv().await;
                    let Some(task) = task else { break };
                    queue.run(&pipeline, task).await;
                }
            });
        }
        queue
    }

    pub fn get(&self, job_id: &str) -> Option<Job> {
        self.jobs.read().expect("job table poisoned").get(job_id).cloned()
    }

    pub async fn submit(&self, kind: JobKind, profile_id: &str, module_id: &str, clock: &dyn Clock) -> Result<Job, Error> {
        let job = Job {
            job_id: uuid::Uuid::new_v4().to_string(),
            kind,
            status: JobStatus::Queued,
            profile_id: profile_id.to_string(),
            module_id: module_id.to_string(),
            created_at: clock.now(),
            finished_at: None,
            result_ref: None,
            error: None,
        };
        self.jobs
            .write()
            .expect("job table poisoned")
            .insert(job.job_id.clone(), job.clone());
        self.sender
            .send(Task {
                job_id: job.job_id.clone(),
            })
            .await
            .map_err(|_| Error::new(page_core::ErrorCategory::Internal, "job queue is closed"))?;
        Ok(job)
    }

    fn transition(&self, job_id: &str, update: impl FnOnce(&mut Job)) -> Option<Job> {
        let mut jobs = self.jobs.write().expect("job table poisoned");
        let job = jobs.get_mut(job_id)?;
        let mut next = job.clone();
        update(&mut next);
        if next.status != job.status && !job.status.can_become(next.status) {
            tracing::error!(job_id, from = ?job.status, to = ?next.status, "illegal job transition");
            return None;
        }
        *job = next;
        Some(job.clone())
    }

    async fn run(&self, pipeline: &Arc<Pipeline>, task: Task) {
        let Some(job) = self.transition(&task.job_id, |j| j.status = JobStatus::Running) else {
            return;
        };
        self.persist(pipeline, &job);
        let p = pipeline.clone();
        let (kind, profile, module) = (job.kind, job.profile_id.clone(), job.module_id.clone());
        let outcome = tokio::task::spawn_blocking(move || -> Result<String, Error> {
            match kind {
                JobKind::Retrieve => {
                    p.retrieve(&profile, &module)?;
                    Ok(format!("kbs/{profile}/{module}"))
                }
                JobKind::Personalize => {
                    p.personalize(&profile, &module)?;
                    Ok(format!("adaptations/{profile}/{module}.json"))
                }
                JobKind::Evaluate => Err(Error::validation("evaluate jobs are not accepted over this queue")),
            }
        })
        .await;
        let now = pipeline.clock().now();
        let finished = self.transition(&task.job_id, |j| {
            j.finished_at = Some(now);
            match outcome {
                Ok(Ok(result)) => {
                    j.status = JobStatus::Done;
                    j.result_ref = Some(result);
                }
                Ok(Err(e)) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(e.to_string());
                }
                Err(e) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(format!("worker panicked: {e}"));
                }
            }
        });
        if let Some(job) = finished {
            self.persist(pipeline, &job);
        }
    }

    fn persist(&self, pipeline: &Pipeline, job: &Job) {
        if let Err(e) = pipeline.store().put(&["jobs"], &job.job_id, "job", job) {
            tracing::warn!(job_id = %job.job_id, error = %e, "could not persist job");
        }
    }
}
