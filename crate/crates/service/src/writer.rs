use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{SystemTime, UNIX_EPOCH};

use tokio::sync::{mpsc, oneshot};

use odaq_core::session::{Registry, SessionError, SessionPlan, Store, Submission, SubmitOutcome};

struct Request {
    plan: Arc<SessionPlan>,
    submission: Submission,
    reply: oneshot::Sender<Result<SubmitOutcome, SessionError>>,
}

/// Handle for queueing submissions to the single writer.
#[derive(Clone)]
pub struct Writer {
    tx: mpsc::Sender<Request>,
}

/// The writer thread; joining waits until every queued submission is on disk.
pub struct WriterThread {
    handle: JoinHandle<()>,
}

impl WriterThread {
    pub fn join(self) {
        if self.handle.join().is_err() {
            log::error!("results writer panicked");
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

impl Writer {
    pub fn spawn(store: Store, registry: Arc<RwLock<Registry>>) -> (Self, WriterThread) {
        let (tx, mut rx) = mpsc::channel::<Request>(256);
        let handle = std::thread::Builder::new()
            .name("results-writer".into())
            .spawn(move || {
                // Runs until every sender is dropped, so shutdown drains the queue.
                while let Some(req) = rx.blocking_recv() {
                    let decision = registry.read().expect("registry lock").check(&req.plan, &req.submission, now_ms());
                    let result = match decision {
                        Ok(SubmitOutcome::Accepted(stored)) => match store.append(&stored) {
                            Ok(()) => {
                                registry.write().expect("registry lock").record(stored.clone());
                                Ok(SubmitOutcome::Accepted(stored))
                            }
                            Err(e) => Err(e),
                        },
                        other => other,
                    };
                    let _ = req.reply.send(result);
                }
            })
            .expect("spawning the writer thread");
        (Self { tx }, WriterThread { handle })
    }

    pub async fn submit(&self, plan: Arc<SessionPlan>, submission: Submission) -> Result<SubmitOutcome, SessionError> {
        let (reply, rx) = oneshot::channel();
        let closed = || SessionError::Io { path: "results store".into(), source: std::io::Error::other("writer stopped") };
        self.tx.send(Request { plan, submission, reply }).await.map_err(|_| closed())?;
        rx.await.map_err(|_| closed())?
    }
}
