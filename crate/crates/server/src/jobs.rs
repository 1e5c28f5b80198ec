//! In-memory registry of submitted spectrum jobs.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::value::RawValue;

use crate::api::Reply;

/// Finished jobs kept for polling; older ones are forgotten first.
pub const MAX_FINISHED: usize = 256;

#[derive(Debug, Default)]
pub struct Jobs {
    next: AtomicU64,
    slots: Mutex<BTreeMap<u64, Option<Reply>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum JobState {
    Running,
    Done(Reply),
}

#[derive(Serialize)]
pub struct Envelope<'a> {
    pub job_id: u64,
    pub status: &'static str,
    pub status_url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub http_status: Option<u16>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<&'a RawValue>,
}

impl Jobs {
    pub fn create(&self) -> u64 {
        let id = self.next.fetch_add(1, Ordering::Relaxed) + 1;
        self.slots.lock().unwrap().insert(id, None);
        id
    }

    pub fn finish(&self, id: u64, reply: Reply) {
        let mut slots = self.slots.lock().unwrap();
        slots.insert(id, Some(reply));
        let finished: Vec<u64> = slots.iter().filter(|(_, r)| r.is_some()).map(|(id, _)| *id).collect();
        for old in finished.iter().take(finished.len().saturating_sub(MAX_FINISHED)) {
            slots.remove(old);
        }
    }

    pub fn get(&self, id: u64) -> Option<JobState> {
        let slots = self.slots.lock().unwrap();
        slots.get(&id).map(|slot| match slot {
            Some(reply) => JobState::Done(reply.clone()),
            None => JobState::Running,
        })
    }
}

pub fn status_url(id: u64) -> String {
    format!("/api/jobs/{id}")
}

/// Poll body for a job.
pub fn envelope(id: u64, state: &JobState) -> String {
    let raw;
    let env = match state {
        JobState::Running => Envelope {
            job_id: id,
            status: "running",
            status_url: status_url(id),
            http_status: None,
            result: None,
        },
        JobState::Done(reply) => {
            raw = RawValue::from_string(reply.body.clone()).expect("replies hold JSON");
            Envelope {
                job_id: id,
                status: if reply.status.is_success() || reply.status.as_u16() == 422 {
                    "done"
                } else {
                    "failed"
                },
                status_url: status_url(id),
                http_status: Some(reply.status.as_u16()),
                result: Some(&raw),
            }
        }
    };
    serde_json::to_string(&env).expect("envelopes serialize")
}
