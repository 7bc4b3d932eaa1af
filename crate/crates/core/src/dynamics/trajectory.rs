use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Point, PointConfiguration};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Birth,
    Death,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub kind: EventKind,
    pub location: Point,
}

#[derive(Serialize, Deserialize)]
struct EventRecord {
    t: f64,
    kind: EventKind,
    x: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("event {index}: time {time} does not increase")]
    Time { index: usize, time: f64 },
    #[error("event {index}: death at {location:?} matches no live point")]
    UnknownDeath { index: usize, location: Point },
    #[error("event {index}: {source}")]
    Birth {
        index: usize,
        #[source]
        source: GeometryError,
    },
}

/// Initial configuration plus the time-ordered birth/death event log.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub initial: PointConfiguration,
    pub events: Vec<TrajectoryEvent>,
    pub t_end: f64,
}

fn find_point(config: &PointConfiguration, p: &Point) -> Option<usize> {
    config
        .neighbors_within(p, 0.0)
        .into_iter()
        .find(|&i| config.points()[i] == *p)
}

impl Trajectory {
    /// Applies one event to `state`.
    pub fn apply(state: &mut PointConfiguration, event: &TrajectoryEvent, index: usize) -> Result<(), ReplayError> {
        match event.kind {
            EventKind::Birth => {
                state
                    .insert(event.location)
                    .map_err(|source| ReplayError::Birth { index, source })?;
            }
            EventKind::Death => {
                let i = find_point(state, &event.location).ok_or(ReplayError::UnknownDeath {
                    index,
                    location: event.location,
                })?;
                state.remove(i);
            }
        }
        Ok(())
    }

    /// Replays every event and checks the log invariants; returns the final state.
    pub fn replay(&self) -> Result<PointConfiguration, ReplayError> {
        let mut state = self.initial.clone();
        let mut last = 0.0;
        for (index, event) in self.events.iter().enumerate() {
            if !(event.time > last || (index == 0 && event.time >= 0.0)) || event.time > self.t_end {
                return Err(ReplayError::Time {
                    index,
                    time: event.time,
                });
            }
            last = event.time;
            Self::apply(&mut state, event, index)?;
        }
        Ok(state)
    }

    /// Configuration at time `t` (events at exactly `t` included).
    pub fn state_at(&self, t: f64) -> Result<PointConfiguration, ReplayError> {
        let mut state = self.initial.clone();
        for (index, event) in self.events.iter().enumerate().take_while(|(_, e)| e.time <= t) {
            Self::apply(&mut state, event, index)?;
        }
        Ok(state)
    }

    /// Point counts at each of the sorted `times`, without rebuilding configurations.
    pub fn counts_at(&self, times: &[f64]) -> Vec<usize> {
        let mut n = self.initial.len() as i64;
        let mut out = Vec::with_capacity(times.len());
        let mut events = self.events.iter().peekable();
        for &t in times {
            while let Some(e) = events.next_if(|e| e.time <= t) {
                n += match e.kind {
                    EventKind::Birth => 1,
                    EventKind::Death => -1,
                };
            }
            out.push(n as usize);
        }
        out
    }

    /// One JSON object per line: `{"t":…,"kind":"birth"|"death","x":[…]}`.
    pub fn write_jsonl<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let dim = self.initial.window().dim();
        for e in &self.events {
            let record = EventRecord {
                t: e.time,
                kind: e.kind,
                x: e.location.coords(dim).to_vec(),
            };
            serde_json::to_writer(&mut *out, &record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Parses an event log written by [`Trajectory::write_jsonl`].
    pub fn read_jsonl_events(text: &str) -> Result<Vec<TrajectoryEvent>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let r: EventRecord = serde_json::from_str(l)?;
                Ok(TrajectoryEvent {
                    time: r.t,
                    kind: r.kind,
                    location: Point::from_slice(&r.x),
                })
            })
            .collect()
    }
}
