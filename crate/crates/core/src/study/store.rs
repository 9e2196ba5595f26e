//! Study state: bundle plus an append-only event log of submissions.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::model::*;
use super::StudyError;
use crate::ErrorType;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Phase1(Phase1Response),
    Phase2(Phase2Response),
    Skip(SkipEvent),
}

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct StudyStore {
    bundle: StudyBundle,
    log_path: Option<PathBuf>,
    clock: Clock,
    phase1_keys: HashSet<(String, String)>,
    phase2_keys: HashSet<(String, String)>,
    skip_keys: HashSet<(String, String)>,
}

fn key(reader: &str, case: &str) -> (String, String) {
    (reader.to_string(), case.to_string())
}

impl StudyStore {
    pub fn new(bundle: StudyBundle) -> Result<Self, StudyError> {
        let mut store = StudyStore {
            bundle: StudyBundle {
                phase1: Vec::new(),
                phase2: Vec::new(),
                skips: Vec::new(),
                ..bundle.clone()
            },
            log_path: None,
            clock: Box::new(Utc::now),
            phase1_keys: HashSet::new(),
            phase2_keys: HashSet::new(),
            skip_keys: HashSet::new(),
        };
        let mut events: Vec<Event> = Vec::new();
        events.extend(bundle.phase1.into_iter().map(Event::Phase1));
        events.extend(bundle.phase2.into_iter().map(Event::Phase2));
        events.extend(bundle.skips.into_iter().map(Event::Skip));
        // phase-1 rows must be applied before the phase-2 rows that depend on them
        events.sort_by_key(|e| match e {
            Event::Phase1(r) => (r.submitted_at, 0),
            Event::Phase2(r) => (r.submitted_at, 1),
            Event::Skip(s) => (s.at, 2),
        });
        for e in events {
            store.apply(e)?;
        }
        Ok(store)
    }

    /// Loads a bundle and replays `log` (created if absent). New events are appended to it.
    pub fn open(bundle: StudyBundle, log: &Path) -> Result<Self, StudyError> {
        let mut store = Self::new(bundle)?;
        if log.exists() {
            for (i, line) in BufReader::new(File::open(log)?).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let e: Event = serde_json::from_str(&line).map_err(|e| StudyError::CorruptLog {
                    line: i + 1,
                    message: e.to_string(),
                })?;
                store.apply(e)?;
            }
        }
        store.log_path = Some(log.to_path_buf());
        Ok(store)
    }

    pub fn with_clock(mut self, clock: impl Fn() -> DateTime<Utc> + Send + Sync + 'static) -> Self {
        self.clock = Box::new(clock);
        self
    }

    pub fn bundle(&self) -> &StudyBundle {
        &self.bundle
    }

    fn reader(&self, reader_id: &str) -> Result<&Reader, StudyError> {
        self.bundle
            .readers
            .iter()
            .find(|r| r.reader_id == reader_id)
            .ok_or_else(|| StudyError::UnknownReader(reader_id.to_string()))
    }

    fn case(&self, case_id: &str) -> Result<&StudyCase, StudyError> {
        self.bundle
            .cases
            .iter()
            .find(|c| c.case_id == case_id)
            .ok_or_else(|| StudyError::UnknownCase(case_id.to_string()))
    }

    fn servable(&self) -> impl Iterator<Item = &StudyCase> {
        self.bundle.cases.iter().filter(|c| c.is_servable())
    }

    fn validate(&self, e: &Event) -> Result<(), StudyError> {
        match e {
            Event::Phase1(r) => {
                self.reader(&r.reader_id)?;
                if !self.case(&r.case_id)?.is_servable() {
                    return Err(StudyError::CaseNotServable(r.case_id.clone()));
                }
                let missing: Vec<ErrorType> =
                    ErrorType::ALL.into_iter().filter(|t| !r.judgments.contains_key(t)).collect();
                if !missing.is_empty() {
                    return Err(StudyError::IncompleteJudgments(missing));
                }
                if self.phase1_keys.contains(&key(&r.reader_id, &r.case_id)) {
                    return Err(StudyError::DuplicateSubmission);
                }
            }
            Event::Phase2(r) => {
                self.reader(&r.reader_id)?;
                self.case(&r.case_id)?;
                let k = key(&r.reader_id, &r.case_id);
                if !self.phase1_keys.contains(&k) {
                    return Err(StudyError::Phase1Missing);
                }
                let missing: Vec<ErrorType> = ErrorType::ALL.into_iter().filter(|t| !r.helpful.contains_key(t)).collect();
                if !missing.is_empty() {
                    return Err(StudyError::IncompleteJudgments(missing));
                }
                if self.phase2_keys.contains(&k) {
                    return Err(StudyError::DuplicateSubmission);
                }
            }
            Event::Skip(s) => {
                self.reader(&s.reader_id)?;
                self.case(&s.case_id)?;
                let k = key(&s.reader_id, &s.case_id);
                if self.phase2_keys.contains(&k) || self.skip_keys.contains(&k) {
                    return Err(StudyError::DuplicateSubmission);
                }
            }
        }
        Ok(())
    }

    fn apply(&mut self, e: Event) -> Result<(), StudyError> {
        self.validate(&e)?;
        match e {
            Event::Phase1(r) => {
                self.phase1_keys.insert(key(&r.reader_id, &r.case_id));
                self.bundle.phase1.push(r);
            }
            Event::Phase2(r) => {
                self.phase2_keys.insert(key(&r.reader_id, &r.case_id));
                self.bundle.phase2.push(r);
            }
            Event::Skip(s) => {
                self.skip_keys.insert(key(&s.reader_id, &s.case_id));
                self.bundle.skips.push(s);
            }
        }
        Ok(())
    }

    /// Validates, appends to the log, then applies.
    fn record(&mut self, e: Event) -> Result<(), StudyError> {
        self.validate(&e)?;
        if let Some(p) = &self.log_path {
            let mut f = OpenOptions::new().create(true).append(true).open(p)?;
            let mut line = serde_json::to_string(&e).expect("events serialize");
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.flush()?;
        }
        self.apply(e)
    }

    fn is_finished(&self, reader: &str, case: &str) -> bool {
        let k = key(reader, case);
        self.phase2_keys.contains(&k) || self.skip_keys.contains(&k)
    }

    /// Next case in the fixed global order that the reader has neither
    /// completed nor skipped. Idempotent until the reader submits.
    pub fn serve_next(&self, reader_id: &str) -> Result<NextCase, StudyError> {
        self.reader(reader_id)?;
        let total = self.servable().count();
        let (position, case) = self
            .servable()
            .enumerate()
            .find(|(_, c)| !self.is_finished(reader_id, &c.case_id))
            .ok_or(StudyError::NoCasesRemaining)?;
        if self.phase1_keys.contains(&key(reader_id, &case.case_id)) {
            return Ok(NextCase::Phase2(phase2_payload(case)));
        }
        Ok(NextCase::Phase1(Phase1Payload {
            case_id: case.case_id.clone(),
            draft_text: case.draft_text.clone(),
            final_text: case.final_text.clone(),
            diff: case.diff.clone(),
            questions: phase1_questions(),
            position: position + 1,
            total,
        }))
    }

    pub fn serve_phase1(&self, reader_id: &str) -> Result<Phase1Payload, StudyError> {
        match self.serve_next(reader_id)? {
            NextCase::Phase1(p) => Ok(p),
            NextCase::Phase2(p) => Err(StudyError::AwaitingPhase2(p.case_id)),
        }
    }

    pub fn submit_phase1(&mut self, case_id: &str, s: Phase1Submission) -> Result<Phase2Payload, StudyError> {
        let r = Phase1Response {
            reader_id: s.reader_id,
            case_id: case_id.to_string(),
            judgments: s.judgments,
            comments: s.comments,
            submitted_at: (self.clock)(),
        };
        self.record(Event::Phase1(r))?;
        Ok(phase2_payload(self.case(case_id)?))
    }

    pub fn submit_phase2(&mut self, case_id: &str, s: Phase2Submission) -> Result<(), StudyError> {
        let r = Phase2Response {
            reader_id: s.reader_id,
            case_id: case_id.to_string(),
            helpful: s.helpful,
            comments: s.comments,
            submitted_at: (self.clock)(),
        };
        self.record(Event::Phase2(r))
    }

    pub fn skip(&mut self, case_id: &str, reader_id: &str) -> Result<(), StudyError> {
        let e = SkipEvent {
            reader_id: reader_id.to_string(),
            case_id: case_id.to_string(),
            at: (self.clock)(),
        };
        self.record(Event::Skip(e))
    }

    pub fn progress(&self, reader_id: &str) -> Result<Progress, StudyError> {
        self.reader(reader_id)?;
        let mut p = Progress {
            reader_id: reader_id.to_string(),
            total: 0,
            phase1_done: 0,
            phase2_done: 0,
            skipped: 0,
            remaining: 0,
        };
        for c in self.servable() {
            let k = key(reader_id, &c.case_id);
            p.total += 1;
            p.phase1_done += usize::from(self.phase1_keys.contains(&k));
            p.phase2_done += usize::from(self.phase2_keys.contains(&k));
            p.skipped += usize::from(self.skip_keys.contains(&k) && !self.phase2_keys.contains(&k));
            p.remaining += usize::from(!self.is_finished(reader_id, &c.case_id));
        }
        Ok(p)
    }

    /// Per-(reader, case) judgment lookup for one error type.
    pub fn judgments(&self, error_type: ErrorType) -> BTreeMap<(String, String), bool> {
        self.bundle
            .phase1
            .iter()
            .filter_map(|r| Some(((r.reader_id.clone(), r.case_id.clone()), *r.judgments.get(&error_type)?)))
            .collect()
    }
}

fn phase2_payload(case: &StudyCase) -> Phase2Payload {
    Phase2Payload {
        case_id: case.case_id.clone(),
        gpt: case.gpt.clone(),
        questions: phase2_questions(),
    }
}
