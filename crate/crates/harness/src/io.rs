//! Plain-text artifacts: arrivals and pairs as CSV, models and results as
//! JSON, training histories as CSV.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use landing_core::domain::Aircraft;
use landing_core::{
    Arrival, ChromosomeLayout, Decision, Landing, Model, Pair, PfsmId, SequencePair, WakeClass, WakeTriple,
};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::analysis::TraceRow;
use crate::error::{HarnessError, Result};

pub const ARRIVALS_HEADER: [&str; 4] = ["seq_id", "pos", "wake", "eta_s"];
pub const PAIRS_HEADER: [&str; 6] = ["seq_id", "arrival_wakes", "etas", "landing_wakes", "landing_ids", "decision"];
pub const HISTORY_HEADER: [&str; 6] = ["generation", "best_fitness", "mean_fitness", "lev_eval", "ham_eval", "pos_eval"];

const LIST_SEP: char = '|';

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("writing to memory cannot fail")
}

fn record<const N: usize>(w: &mut csv::Writer<Vec<u8>>, fields: [String; N]) {
    w.write_record(fields).expect("writing to memory cannot fail");
}

fn csv_rows(path: &Path, text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let found = reader.headers().map_err(|e| HarnessError::data(path, e))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(HarnessError::data(path, format!("expected header `{}`", header.join(","))));
    }
    reader
        .records()
        .map(|r| r.map_err(|e| HarnessError::data(path, e)))
        .collect()
}

fn field<T: std::str::FromStr>(path: &Path, row: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let line = row.position().map_or(0, |p| p.line());
    row[i]
        .trim()
        .parse()
        .map_err(|_| HarnessError::data(path, format!("line {line}: invalid {name} `{}`", &row[i])))
}

fn list<T: std::str::FromStr>(path: &Path, s: &str, name: &str) -> Result<Vec<T>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(LIST_SEP)
        .map(|x| x.trim().parse().map_err(|_| HarnessError::data(path, format!("invalid {name} `{x}`"))))
        .collect()
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join("|")
}

// ---------------------------------------------------------------- arrivals

pub fn arrivals_csv(arrivals: &[Arrival]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(ARRIVALS_HEADER).expect("in memory");
    for (seq, a) in arrivals.iter().enumerate() {
        for (pos, ac) in a.aircraft().iter().enumerate() {
            record(&mut w, [seq.to_string(), pos.to_string(), ac.wake.to_string(), ac.eta.to_string()]);
        }
    }
    finish(w)
}

/// Parses arrivals with their sequence ids; rows of one sequence must be
/// contiguous with positions counting up from 0. Aircraft ids are the
/// positions.
pub fn parse_arrivals(path: &Path, text: &str) -> Result<Vec<(u64, Arrival)>> {
    let mut groups: Vec<(u64, Vec<Aircraft>)> = Vec::new();
    for row in csv_rows(path, text, &ARRIVALS_HEADER)? {
        let seq: u64 = field(path, &row, 0, "seq_id")?;
        let pos: u32 = field(path, &row, 1, "pos")?;
        let wake: WakeClass = field(path, &row, 2, "wake")?;
        let eta: f64 = field(path, &row, 3, "eta_s")?;
        if groups.last().is_none_or(|(s, _)| *s != seq) {
            if groups.iter().any(|(s, _)| *s == seq) {
                return Err(HarnessError::data(path, format!("rows of sequence {seq} are not contiguous")));
            }
            groups.push((seq, Vec::new()));
        }
        let aircraft = &mut groups.last_mut().expect("just pushed").1;
        if pos as usize != aircraft.len() {
            return Err(HarnessError::data(path, format!("sequence {seq}: expected pos {}, found {pos}", aircraft.len())));
        }
        aircraft.push(Aircraft::new(pos, wake, eta));
    }
    groups
        .into_iter()
        .map(|(seq, aircraft)| {
            Arrival::new(aircraft)
                .map(|a| (seq, a))
                .map_err(|e| HarnessError::data(path, format!("sequence {seq}: {e}")))
        })
        .collect()
}

pub fn read_arrivals(path: &Path) -> Result<Vec<(u64, Arrival)>> {
    parse_arrivals(path, &read_file(path)?)
}

// ----------------------------------------------------------------- pairs

pub fn pairs_csv(pairs: &[Pair]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(PAIRS_HEADER).expect("in memory");
    for p in pairs {
        record(
            &mut w,
            [
                p.id.to_string(),
                p.arrival.wake_string(),
                join(p.arrival.aircraft().iter().map(|a| a.eta)),
                p.reference.wake_string(),
                join(p.reference.ids()),
                p.decision.label().to_string(),
            ],
        );
    }
    finish(w)
}

pub fn parse_pairs(path: &Path, text: &str) -> Result<Vec<Pair>> {
    csv_rows(path, text, &PAIRS_HEADER)?
        .iter()
        .map(|row| {
            let id: u64 = field(path, row, 0, "seq_id")?;
            let bad = |e: &dyn std::fmt::Display| HarnessError::data(path, format!("sequence {id}: {e}"));
            let etas: Vec<f64> = list(path, &row[2], "eta")?;
            let arrival = Arrival::from_wakes(&row[1], &etas).map_err(|e| bad(&e))?;
            let ids: Vec<u32> = list(path, &row[4], "landing id")?;
            let reference = Landing::from_ids(&arrival, &ids).map_err(|e| bad(&e))?;
            if reference.wake_string() != row[3] {
                return Err(bad(&"landing_wakes disagree with landing_ids"));
            }
            let decision = Decision::from_label(&row[5]).ok_or_else(|| bad(&format!("invalid decision `{}`", &row[5])))?;
            SequencePair::new(id, arrival, reference, decision).map_err(|e| bad(&e))
        })
        .collect()
}

pub fn read_pairs(path: &Path) -> Result<Vec<Pair>> {
    parse_pairs(path, &read_file(path)?)
}

// ----------------------------------------------------------------- model

pub fn model_json(model: &Model) -> Value {
    let mut root = Map::new();
    root.insert("layout_version".into(), ChromosomeLayout::VERSION.into());
    for m in model.machines() {
        let mut sources = Map::new();
        for (s, row) in m.rows().enumerate() {
            let targets: Map<String, Value> =
                m.states().iter().zip(row).map(|(t, &p)| (t.to_string(), Value::from(p))).collect();
            sources.insert(m.states()[s].to_string(), targets.into());
        }
        root.insert(m.id().get().to_string(), sources.into());
    }
    root.into()
}

pub fn parse_model(path: &Path, text: &str) -> Result<Model> {
    let bad = |m: String| HarnessError::data(path, m);
    let value: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let root = value.as_object().ok_or_else(|| bad("model must be a JSON object".into()))?;
    match root.get("layout_version").and_then(Value::as_u64) {
        Some(v) if v == u64::from(ChromosomeLayout::VERSION) => {}
        Some(v) => return Err(bad(format!("unsupported layout_version {v}"))),
        None => return Err(bad("missing layout_version".into())),
    }
    for key in root.keys() {
        if key != "layout_version" && !PfsmId::ALL.iter().any(|id| id.get().to_string() == *key) {
            return Err(bad(format!("unexpected key `{key}`")));
        }
    }
    let mut rows: BTreeMap<(u8, usize), Vec<f64>> = BTreeMap::new();
    for id in PfsmId::ALL {
        let machine = root
            .get(&id.get().to_string())
            .and_then(Value::as_object)
            .ok_or_else(|| bad(format!("missing machine {id}")))?;
        if machine.len() != id.states().len() {
            return Err(bad(format!("machine {id} must list {} source states", id.states().len())));
        }
        for (s, source) in id.states().iter().enumerate() {
            let targets = machine
                .get(&source.to_string())
                .and_then(Value::as_object)
                .ok_or_else(|| bad(format!("machine {id}: missing source {source}")))?;
            if targets.len() != id.states().len() {
                return Err(bad(format!("machine {id}, source {source}: wrong number of targets")));
            }
            let row = id
                .states()
                .iter()
                .map(|t: &WakeTriple| {
                    targets
                        .get(&t.to_string())
                        .and_then(Value::as_f64)
                        .ok_or_else(|| bad(format!("machine {id}, source {source}: missing target {t}")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.insert((id.get(), s), row);
        }
    }
    Model::from_fn(|id, s| rows.remove(&(id.get(), s)).expect("every row collected")).map_err(|e| bad(e.to_string()))
}

pub fn read_model(path: &Path) -> Result<Model> {
    parse_model(path, &read_file(path)?)
}

// --------------------------------------------------------------- history

pub fn history_csv(rows: &[TraceRow]) -> Vec<u8> {
    let mut w = csv_writer();
    w.write_record(HISTORY_HEADER).expect("in memory");
    for r in rows {
        record(
            &mut w,
            [
                r.generation.to_string(),
                r.best_fitness.to_string(),
                r.mean_fitness.to_string(),
                r.eval[0].to_string(),
                r.eval[1].to_string(),
                r.eval[2].to_string(),
            ],
        );
    }
    finish(w)
}

pub fn parse_history(path: &Path, text: &str) -> Result<Vec<TraceRow>> {
    csv_rows(path, text, &HISTORY_HEADER)?
        .iter()
        .map(|row| {
            Ok(TraceRow {
                generation: field(path, row, 0, "generation")?,
                best_fitness: field(path, row, 1, "best_fitness")?,
                mean_fitness: field(path, row, 2, "mean_fitness")?,
                eval: [
                    field(path, row, 3, "lev_eval")?,
                    field(path, row, 4, "ham_eval")?,
                    field(path, row, 5, "pos_eval")?,
                ],
            })
        })
        .collect()
}

// ------------------------------------------------------------------ json

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<S: Serialize + ?Sized>(value: &S) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

pub fn write_json<S: Serialize + ?Sized>(path: &Path, value: &S) -> Result<()> {
    write_file(path, to_json_bytes(value))
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| HarnessError::data(path, e))
}
