//! JSON instance files.
//!
//! ```json
//! {
//!   "d_default": 10,
//!   "resources": [{"id": 0, "reward": 1.0, "usage": {"kind": "det", "d": 10}}],
//!   "arrivals": [{"id": 0, "time": 0, "neighbors": [0]}]
//! }
//! ```
//!
//! `usage` is optional and is either `{"kind":"det","d":int}` or
//! `{"kind":"disc","atoms":[[dur,prob],...]}`. Integer fields are read as
//! signed so that out-of-range values are reported as violations rather
//! than as parse errors.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Arrival, Instance, InstanceError, Resource, Tick, UsageModel, Violation};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileInstance {
    d_default: i64,
    resources: Vec<FileResource>,
    arrivals: Vec<FileArrival>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileResource {
    id: u64,
    reward: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    usage: Option<FileUsage>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum FileUsage {
    #[serde(rename = "det")]
    Det { d: i64 },
    #[serde(rename = "disc")]
    Disc { atoms: Vec<(i64, f64)> },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileArrival {
    id: u64,
    time: i64,
    neighbors: Vec<u64>,
}

fn to_tick(value: i64, on_negative: Violation, out: &mut Vec<Violation>) -> Tick {
    if value < 0 {
        out.push(on_negative);
        0
    } else {
        value as Tick
    }
}

fn usage_from_file(u: FileUsage, resource: usize, out: &mut Vec<Violation>) -> UsageModel {
    let neg = Violation::NonPositiveDuration {
        resource: Some(resource),
    };
    match u {
        FileUsage::Det { d } => UsageModel::Deterministic(to_tick(d, neg, out)),
        FileUsage::Disc { atoms } => UsageModel::FiniteDiscrete(
            atoms
                .into_iter()
                .map(|(dur, p)| (to_tick(dur, neg.clone(), out), p))
                .collect(),
        ),
    }
}

fn from_file(raw: FileInstance) -> Result<Instance, InstanceError> {
    let mut violations = Vec::new();
    let d_default = to_tick(
        raw.d_default,
        Violation::NonPositiveDuration { resource: None },
        &mut violations,
    );
    let resources = raw
        .resources
        .into_iter()
        .enumerate()
        .map(|(index, r)| Resource {
            id: r.id as usize,
            reward: r.reward,
            usage: r.usage.map(|u| usage_from_file(u, index, &mut violations)),
        })
        .collect();
    let arrivals = raw
        .arrivals
        .into_iter()
        .enumerate()
        .map(|(index, a)| Arrival {
            id: a.id as usize,
            time: to_tick(a.time, Violation::NegativeTime { arrival: index }, &mut violations),
            neighbors: a.neighbors.into_iter().map(|n| n as usize).collect(),
        })
        .collect();
    let instance = Instance::new(d_default, resources, arrivals);
    for v in instance.validate() {
        if !violations.contains(&v) {
            violations.push(v);
        }
    }
    if violations.is_empty() {
        Ok(instance)
    } else {
        Err(InstanceError::Invalid(violations))
    }
}

fn to_file(instance: &Instance) -> FileInstance {
    FileInstance {
        d_default: instance.d_default() as i64,
        resources: instance
            .resources()
            .iter()
            .map(|r| FileResource {
                id: r.id as u64,
                reward: r.reward,
                usage: r.usage.as_ref().map(|u| match u {
                    UsageModel::Deterministic(d) => FileUsage::Det { d: *d as i64 },
                    UsageModel::FiniteDiscrete(atoms) => FileUsage::Disc {
                        atoms: atoms.iter().map(|&(d, p)| (d as i64, p)).collect(),
                    },
                }),
            })
            .collect(),
        arrivals: instance
            .arrivals()
            .iter()
            .map(|a| FileArrival {
                id: a.id as u64,
                time: a.time as i64,
                neighbors: a.neighbors.iter().map(|&n| n as u64).collect(),
            })
            .collect(),
    }
}

/// Parses and validates an instance document.
pub fn parse(text: &str) -> Result<Instance, InstanceError> {
    let raw: FileInstance = serde_json::from_str(text).map_err(|e| InstanceError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    from_file(raw)
}

/// Serializes an instance as pretty-printed JSON with a trailing newline.
pub fn to_json(instance: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(&to_file(instance)).expect("instance serializes");
    s.push('\n');
    s
}

pub fn save(instance: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    fs::write(path, to_json(instance)).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}
