//! JSON-lines persistence for metric logs and episode records.
//!
//! Metrics: one object per training episode. Episode records: a header line
//! per episode followed by one line per primitive step.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::sim::{Dims, Placement};
use crate::training::{EpisodeRecord, MetricsRow, StepRecord};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad record line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("record file ends mid-episode")]
    Truncated,
}

pub fn append_metrics(path: &Path, rows: &[MetricsRow]) -> Result<(), RecordError> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    for row in rows {
        serde_json::to_writer(&mut f, row).map_err(std::io::Error::other)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>, RecordError> {
    let f = BufReader::new(fs::File::open(path)?);
    let mut rows = Vec::new();
    for (idx, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(
            serde_json::from_str(&line).map_err(|source| RecordError::Parse {
                line: idx + 1,
                source,
            })?,
        );
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EpisodeHeader {
    episode: u64,
    seed: u64,
    placement: Placement,
    object_dims: Dims,
    object_mass: f64,
    object_friction: f64,
    success: bool,
    primitives_used: usize,
    steps: usize,
}

pub fn append_episode_records(path: &Path, records: &[EpisodeRecord]) -> Result<(), RecordError> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    for r in records {
        let header = EpisodeHeader {
            episode: r.episode,
            seed: r.seed,
            placement: r.placement,
            object_dims: r.object_dims,
            object_mass: r.object_mass,
            object_friction: r.object_friction,
            success: r.success,
            primitives_used: r.primitives_used,
            steps: r.steps.len(),
        };
        serde_json::to_writer(&mut f, &json!({ "episode_header": header }))
            .map_err(std::io::Error::other)?;
        f.write_all(b"\n")?;
        for s in &r.steps {
            serde_json::to_writer(&mut f, s).map_err(std::io::Error::other)?;
            f.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn read_episode_records(path: &Path) -> Result<Vec<EpisodeRecord>, RecordError> {
    let f = BufReader::new(fs::File::open(path)?);
    let mut records: Vec<EpisodeRecord> = Vec::new();
    let mut pending: Option<(EpisodeHeader, Vec<StepRecord>)> = None;
    for (idx, line) in f.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|source| RecordError::Parse {
                line: idx + 1,
                source,
            })?;
        if let Some(h) = value.get("episode_header") {
            if let Some((header, steps)) = pending.take() {
                records.push(assemble(header, steps));
            }
            let header: EpisodeHeader =
                serde_json::from_value(h.clone()).map_err(|source| RecordError::Parse {
                    line: idx + 1,
                    source,
                })?;
            pending = Some((header, Vec::new()));
        } else if let Some((_, steps)) = pending.as_mut() {
            let step: StepRecord =
                serde_json::from_value(value).map_err(|source| RecordError::Parse {
                    line: idx + 1,
                    source,
                })?;
            steps.push(step);
        }
    }
    if let Some((header, steps)) = pending.take() {
        if steps.len() != header.steps {
            return Err(RecordError::Truncated);
        }
        records.push(assemble(header, steps));
    }
    Ok(records)
}

fn assemble(header: EpisodeHeader, steps: Vec<StepRecord>) -> EpisodeRecord {
    EpisodeRecord {
        episode: header.episode,
        seed: header.seed,
        placement: header.placement,
        object_dims: header.object_dims,
        object_mass: header.object_mass,
        object_friction: header.object_friction,
        primitives_used: header.primitives_used,
        steps,
        success: header.success,
        loss_high: None,
        loss_low: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::Primitive;
    use crate::primitives::OutcomeResult;
    use crate::training::ActionRecord;

    fn sample_record(episode: u64) -> EpisodeRecord {
        EpisodeRecord {
            episode,
            seed: 9,
            placement: Placement::Random,
            object_dims: Dims {
                length: 0.142,
                width: 0.091,
                height: 0.041,
            },
            object_mass: 0.209,
            object_friction: 0.5,
            steps: vec![StepRecord {
                step: 1,
                action: ActionRecord {
                    x: 30,
                    y: 31,
                    i: 4,
                    phi: Primitive::Push,
                },
                outcome: OutcomeResult::AtWall,
                reward: 0.2,
                low_steps: 0,
            }],
            success: false,
            primitives_used: 1,
            loss_high: None,
            loss_low: None,
        }
    }

    #[test]
    fn episode_records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        let records = vec![sample_record(0), sample_record(1)];
        append_episode_records(&path, &records).unwrap();
        let back = read_episode_records(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].steps[0].reward, 0.2);
        assert_eq!(back[1].episode, 1);
    }

    #[test]
    fn step_lines_carry_the_documented_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        append_episode_records(&path, &[sample_record(0)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let step_line = text.lines().nth(1).unwrap();
        let v: serde_json::Value = serde_json::from_str(step_line).unwrap();
        for key in ["step", "action", "outcome", "reward", "low_steps"] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
        for key in ["x", "y", "i", "phi"] {
            assert!(v["action"].get(key).is_some(), "missing action key {key}");
        }
    }
}
