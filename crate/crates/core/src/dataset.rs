//! Temporal knowledge graph dataset loading, validation, and indexing.
//!
//! Datasets follow the common extrapolation benchmark layout: one
//! whitespace-separated quadruple file per split (`train.txt`, `valid.txt`,
//! `test.txt`) with integer columns `subject relation object timestamp`
//! (an optional fifth column is ignored), plus a `stat.txt` holding
//! `num_entities num_relations` on one line.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TkgError};

/// A single timestamped fact. After inverse augmentation, `relation` ranges
/// over `[0, 2*num_relations)`: ids `>= num_relations` are inverse relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Quadruple {
    pub subject: usize,
    pub relation: usize,
    pub object: usize,
    pub timestamp: usize,
}

/// All facts sharing one (ordinal) timestamp, in file order, deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot {
    pub timestamp: usize,
    pub facts: Vec<Quadruple>,
}

impl Snapshot {
    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }
}

/// Declared and observed dataset statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetStats {
    pub num_entities: usize,
    /// Base relation count, before inverse augmentation.
    pub num_relations: usize,
    /// Number of distinct timestamps across all loaded splits.
    pub num_timestamps: usize,
    /// Fact count per split, in the order splits were requested.
    pub split_sizes: Vec<(String, usize)>,
    /// Ordinal index -> raw timestamp value, preserving chronological order.
    pub raw_time_map: Vec<i64>,
}

impl DatasetStats {
    /// Relation vocabulary size after inverse augmentation.
    pub fn num_relations_augmented(&self) -> usize {
        self.num_relations * 2
    }
}

/// An entity-prediction query key: all facts at one timestamp sharing
/// `(subject, relation)` collapse into one query with an answer set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub subject: usize,
    pub relation: usize,
    pub answers: Vec<usize>,
}

/// A relation-prediction query key `(subject, object) -> relations`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelQuery {
    pub subject: usize,
    pub object: usize,
    pub answers: Vec<usize>,
}

/// Per-timestamp query sets for the two prediction directions plus the
/// auxiliary relation-prediction queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    pub timestamp: usize,
    /// Queries from base-relation facts: `(s, r) -> {o}`.
    pub raw: Vec<Query>,
    /// Queries from inverse-relation facts: `(o, r + |R|) -> {s}`.
    pub inverse: Vec<Query>,
    /// Relation queries from base-relation facts only: `(s, o) -> {r}`.
    pub relation: Vec<RelQuery>,
}

impl QuerySet {
    pub fn is_empty(&self) -> bool {
        self.raw.is_empty() && self.inverse.is_empty()
    }

    /// Number of directed entity queries, counting every (key, answer) fact.
    pub fn directed_fact_count(&self) -> usize {
        let raw: usize = self.raw.iter().map(|q| q.answers.len()).sum();
        let inv: usize = self.inverse.iter().map(|q| q.answers.len()).sum();
        raw + inv
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| TkgError::io(path, e))
}

fn parse_stat_file(path: &Path) -> Result<(usize, usize)> {
    let text = read_to_string(path)?;
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| TkgError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "stat file is empty".into(),
        })?;
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>, what: &str| -> Result<usize> {
        tok.ok_or_else(|| TkgError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("missing {what}"),
        })?
        .parse::<usize>()
        .map_err(|e| TkgError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("bad {what}: {e}"),
        })
    };
    let num_entities = parse(it.next(), "entity count")?;
    let num_relations = parse(it.next(), "relation count")?;
    Ok((num_entities, num_relations))
}

/// A quadruple with its raw (not yet re-indexed) timestamp.
#[derive(Debug, Clone, Copy)]
struct RawFact {
    subject: usize,
    relation: usize,
    object: usize,
    raw_time: i64,
}

fn parse_split_file(path: &Path, num_entities: usize, num_relations: usize) -> Result<Vec<RawFact>> {
    let text = read_to_string(path)?;
    let mut facts = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 4 {
            return Err(TkgError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("expected at least 4 integer columns, got {}", cols.len()),
            });
        }
        let field = |i: usize, what: &str| -> Result<i64> {
            cols[i].parse::<i64>().map_err(|e| TkgError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                msg: format!("bad {what} '{}': {e}", cols[i]),
            })
        };
        let s = field(0, "subject")?;
        let r = field(1, "relation")?;
        let o = field(2, "object")?;
        let t = field(3, "timestamp")?;
        if s < 0 || s as usize >= num_entities {
            return Err(TkgError::Validation(format!(
                "{}:{line_no}: subject id {s} out of range [0, {num_entities})",
                path.display()
            )));
        }
        if o < 0 || o as usize >= num_entities {
            return Err(TkgError::Validation(format!(
                "{}:{line_no}: object id {o} out of range [0, {num_entities})",
                path.display()
            )));
        }
        if r < 0 || r as usize >= num_relations {
            return Err(TkgError::Validation(format!(
                "{}:{line_no}: relation id {r} out of range [0, {num_relations})",
                path.display()
            )));
        }
        if t < 0 {
            return Err(TkgError::Validation(format!(
                "{}:{line_no}: negative timestamp {t}",
                path.display()
            )));
        }
        facts.push(RawFact {
            subject: s as usize,
            relation: r as usize,
            object: o as usize,
            raw_time: t,
        });
    }
    Ok(facts)
}

/// Load a dataset directory: parse `stat.txt` and the requested split files,
/// re-index raw timestamps to consecutive ordinals `0..T-1` (order
/// preserving, shared across splits), and group facts into chronologically
/// sorted snapshots per split. Duplicate facts within a snapshot are dropped
/// with a logged count.
pub fn load_dataset(
    dir: &Path,
    split_names: &[&str],
) -> Result<(DatasetStats, Vec<Vec<Snapshot>>)> {
    let (num_entities, num_relations) = parse_stat_file(&dir.join("stat.txt"))?;
    let mut raw_splits = Vec::new();
    for name in split_names {
        let path = dir.join(format!("{name}.txt"));
        let facts = parse_split_file(&path, num_entities, num_relations)?;
        if facts.is_empty() {
            return Err(TkgError::Validation(format!(
                "split '{name}' has zero facts"
            )));
        }
        raw_splits.push(facts);
    }

    // Global ordinal re-indexing over all splits.
    let mut raw_times: Vec<i64> = raw_splits
        .iter()
        .flat_map(|f| f.iter().map(|q| q.raw_time))
        .collect();
    raw_times.sort_unstable();
    raw_times.dedup();
    let ordinal_of: BTreeMap<i64, usize> = raw_times
        .iter()
        .enumerate()
        .map(|(ord, &t)| (t, ord))
        .collect();

    let mut splits = Vec::new();
    let mut split_sizes = Vec::new();
    for (name, facts) in split_names.iter().zip(raw_splits) {
        let mut by_ordinal: BTreeMap<usize, Vec<Quadruple>> = BTreeMap::new();
        for f in &facts {
            let ord = ordinal_of[&f.raw_time];
            by_ordinal.entry(ord).or_default().push(Quadruple {
                subject: f.subject,
                relation: f.relation,
                object: f.object,
                timestamp: ord,
            });
        }
        let mut dropped = 0usize;
        let mut kept_total = 0usize;
        let snapshots: Vec<Snapshot> = by_ordinal
            .into_iter()
            .map(|(timestamp, facts)| {
                let mut seen = HashSet::with_capacity(facts.len());
                let mut kept = Vec::with_capacity(facts.len());
                for q in facts {
                    if seen.insert(q) {
                        kept.push(q);
                    } else {
                        dropped += 1;
                    }
                }
                kept_total += kept.len();
                Snapshot { timestamp, facts: kept }
            })
            .collect();
        if dropped > 0 {
            log::info!("split '{name}': dropped {dropped} duplicate facts within snapshots");
        }
        split_sizes.push((name.to_string(), kept_total));
        splits.push(snapshots);
    }

    let stats = DatasetStats {
        num_entities,
        num_relations,
        num_timestamps: raw_times.len(),
        split_sizes,
        raw_time_map: raw_times,
    };
    Ok((stats, splits))
}

/// Add the inverse companion `(o, r + |R|, s, t)` for each fact. Errors if
/// the input already contains a relation id `>= num_relations`.
pub fn augment_inverse(snapshots: &[Snapshot], num_relations: usize) -> Result<Vec<Snapshot>> {
    for snap in snapshots {
        if let Some(f) = snap.facts.iter().find(|f| f.relation >= num_relations) {
            return Err(TkgError::Validation(format!(
                "relation id {} at timestamp {} is >= {num_relations}; input looks already augmented",
                f.relation, snap.timestamp
            )));
        }
    }
    Ok(snapshots
        .iter()
        .map(|snap| {
            let mut facts = snap.facts.clone();
            facts.extend(snap.facts.iter().map(|f| Quadruple {
                subject: f.object,
                relation: f.relation + num_relations,
                object: f.subject,
                timestamp: f.timestamp,
            }));
            Snapshot {
                timestamp: snap.timestamp,
                facts,
            }
        })
        .collect())
}

/// Build the per-timestamp query sets from an augmented snapshot. Raw
/// queries come from base-relation facts, inverse queries from
/// inverse-relation facts, and relation queries from base-relation facts
/// only. Keys sharing several answers collapse into one query with an
/// answer set.
pub fn build_query_sets(snapshot: &Snapshot, num_relations: usize) -> QuerySet {
    let mut raw: Vec<Query> = Vec::new();
    let mut inverse: Vec<Query> = Vec::new();
    let mut relation: Vec<RelQuery> = Vec::new();
    let mut raw_idx: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut inv_idx: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rel_idx: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    for f in &snapshot.facts {
        if f.relation < num_relations {
            let i = *raw_idx.entry((f.subject, f.relation)).or_insert_with(|| {
                raw.push(Query {
                    subject: f.subject,
                    relation: f.relation,
                    answers: Vec::new(),
                });
                raw.len() - 1
            });
            raw[i].answers.push(f.object);

            let j = *rel_idx.entry((f.subject, f.object)).or_insert_with(|| {
                relation.push(RelQuery {
                    subject: f.subject,
                    object: f.object,
                    answers: Vec::new(),
                });
                relation.len() - 1
            });
            relation[j].answers.push(f.relation);
        } else {
            let i = *inv_idx.entry((f.subject, f.relation)).or_insert_with(|| {
                inverse.push(Query {
                    subject: f.subject,
                    relation: f.relation,
                    answers: Vec::new(),
                });
                inverse.len() - 1
            });
            inverse[i].answers.push(f.object);
        }
    }

    QuerySet {
        timestamp: snapshot.timestamp,
        raw,
        inverse,
        relation,
    }
}

/// Write snapshots back to the split file format, translating ordinal
/// timestamps through `raw_time_map`. Inverse of loading for round-trips.
pub fn write_split(path: &Path, snapshots: &[Snapshot], raw_time_map: &[i64]) -> Result<()> {
    let mut out = fs::File::create(path).map_err(|e| TkgError::io(path, e))?;
    for snap in snapshots {
        for f in &snap.facts {
            let raw_t = raw_time_map.get(f.timestamp).copied().ok_or_else(|| {
                TkgError::Validation(format!("ordinal {} missing from raw time map", f.timestamp))
            })?;
            writeln!(out, "{}\t{}\t{}\t{}", f.subject, f.relation, f.object, raw_t)
                .map_err(|e| TkgError::io(path, e))?;
        }
    }
    Ok(())
}

/// Manifest written by the `prepare` command: validated stats plus the
/// ordinal re-indexing map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreparedManifest {
    pub stats: DatasetStats,
    pub splits: Vec<String>,
}

impl PreparedManifest {
    pub fn new(stats: DatasetStats, split_names: &[&str]) -> Self {
        PreparedManifest {
            stats,
            splits: split_names.iter().map(|s| s.to_string()).collect(),
        }
    }
}
