//! Execution timelines: recording, validation against the task graph,
//! idle-time statistics and export to Chrome trace JSON and SVG Gantt charts.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::dag::{DagError, ReadyTracker, Section, Task, TaskGraph, TaskKind};
use crate::error::{CaluError, Result};

/// Unit of the timestamps in a timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    /// Virtual time of a simulated run.
    Ticks,
    /// Wall-clock nanoseconds since the start of a real run.
    Nanoseconds,
}

impl TimeUnit {
    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::Ticks => "ticks",
            TimeUnit::Nanoseconds => "ns",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "ticks" => Some(TimeUnit::Ticks),
            "ns" => Some(TimeUnit::Nanoseconds),
            _ => None,
        }
    }

    /// Divisor from native units to Chrome trace microseconds.
    fn per_microsecond(self) -> f64 {
        match self {
            TimeUnit::Ticks => 1.0,
            TimeUnit::Nanoseconds => 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub worker: usize,
    pub task: Task,
    pub t_start: f64,
    pub t_end: f64,
}

impl TraceEvent {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// All events of one run, sorted by worker then start time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub workers: usize,
    pub unit: TimeUnit,
    pub events: Vec<TraceEvent>,
}

impl Timeline {
    pub fn new(workers: usize, unit: TimeUnit, mut events: Vec<TraceEvent>) -> Self {
        events.sort_by(|a, b| {
            a.worker
                .cmp(&b.worker)
                .then(a.t_start.total_cmp(&b.t_start))
                .then(a.t_end.total_cmp(&b.t_end))
        });
        Self {
            workers,
            unit,
            events,
        }
    }

    /// Merges per-worker buffers.
    pub fn from_buffers(unit: TimeUnit, buffers: Vec<Vec<TraceEvent>>) -> Self {
        let workers = buffers.len();
        Self::new(workers, unit, buffers.into_iter().flatten().collect())
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    /// Time of the last task end; timestamps start at zero.
    pub fn makespan(&self) -> f64 {
        self.events.iter().map(|e| e.t_end).fold(0.0, f64::max)
    }

    pub fn worker_events(&self, worker: usize) -> impl Iterator<Item = &TraceEvent> {
        self.events.iter().filter(move |e| e.worker == worker)
    }

    /// Checks `t_start <= t_end`, worker ids and per-worker non-overlap.
    pub fn check_well_formed(&self) -> Result<()> {
        for e in &self.events {
            if e.worker >= self.workers {
                return Err(CaluError::Trace(format!(
                    "{} on unknown worker {}",
                    e.task, e.worker
                )));
            }
            // also rejects NaN
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(e.t_start <= e.t_end) {
                return Err(CaluError::Trace(format!(
                    "{} ends before it starts",
                    e.task
                )));
            }
        }
        for w in self.events.windows(2) {
            if w[0].worker == w[1].worker && w[1].t_start < w[0].t_end {
                return Err(CaluError::Trace(format!(
                    "{} and {} overlap on worker {}",
                    w[0].task, w[1].task, w[0].worker
                )));
            }
        }
        Ok(())
    }

    pub fn write_chrome(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_chrome_json())?;
        Ok(())
    }

    pub fn write_svg(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_svg())?;
        Ok(())
    }
}

/// Per-worker time accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdleStats {
    pub makespan: f64,
    pub busy: Vec<f64>,
    pub idle: Vec<f64>,
    pub idle_fraction: Vec<f64>,
    /// Fraction of the makespan after which 90% of the workers have run
    /// their last task.
    pub idle90_after: f64,
}

impl IdleStats {
    pub fn idle_max(&self) -> f64 {
        self.idle_fraction.iter().copied().fold(0.0, f64::max)
    }

    pub fn idle_avg(&self) -> f64 {
        self.idle_fraction.iter().sum::<f64>() / self.idle_fraction.len().max(1) as f64
    }
}

pub fn idle_stats(t: &Timeline) -> Result<IdleStats> {
    if t.is_empty() || t.workers == 0 {
        return Err(CaluError::Trace("empty timeline".into()));
    }
    let makespan = t.makespan();
    let mut busy = vec![0.0; t.workers];
    let mut last_end = vec![0.0_f64; t.workers];
    for e in &t.events {
        busy[e.worker] += e.duration();
        last_end[e.worker] = last_end[e.worker].max(e.t_end);
    }
    let idle: Vec<f64> = busy.iter().map(|b| makespan - b).collect();
    let idle_fraction = busy
        .iter()
        .map(|b| {
            if makespan > 0.0 {
                1.0 - b / makespan
            } else {
                0.0
            }
        })
        .collect();
    last_end.sort_by(f64::total_cmp);
    let rank = (0.9 * t.workers as f64).ceil() as usize;
    let idle90_after = if makespan > 0.0 {
        last_end[rank.clamp(1, t.workers) - 1] / makespan
    } else {
        0.0
    };
    Ok(IdleStats {
        makespan,
        busy,
        idle,
        idle_fraction,
        idle90_after,
    })
}

/// First problem found when replaying a timeline against its graph.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("{task} started before its predecessor {missing} finished")]
    Dependency { task: Task, missing: Task },
    #[error("{0} executed more than once")]
    Duplicate(Task),
    #[error("{0} is not part of the graph")]
    Unknown(Task),
    #[error("{0} was never executed")]
    Missing(Task),
}

/// Replays `t` in time order: a task may start only once all its
/// predecessors have ended. At equal timestamps, ends are replayed first.
pub fn validate(t: &Timeline, g: &TaskGraph) -> std::result::Result<(), Violation> {
    let mut ids = Vec::with_capacity(t.len());
    for e in &t.events {
        ids.push(g.id_of(&e.task).ok_or(Violation::Unknown(e.task))?);
    }
    // (time, 0 = end / 1 = start, event)
    let mut sweep: Vec<(f64, u8, usize)> = Vec::with_capacity(2 * t.len());
    for (n, e) in t.events.iter().enumerate() {
        sweep.push((e.t_start, 1, n));
        sweep.push((e.t_end, 0, n));
    }
    sweep.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let tracker = ReadyTracker::new(g);
    let mut started = vec![false; g.len()];
    let mut owner = vec![usize::MAX; g.len()];
    for (_, what, n) in sweep {
        let id = ids[n];
        if what == 1 {
            if started[id] {
                return Err(Violation::Duplicate(*g.task(id)));
            }
            started[id] = true;
            owner[id] = n;
            if let Some(p) = tracker.missing_predecessor(g, id) {
                return Err(Violation::Dependency {
                    task: *g.task(id),
                    missing: *g.task(p),
                });
            }
        } else if owner[id] == n {
            tracker.mark_done(g, id).map_err(|e| match e {
                DagError::DependencyViolation { task, missing } => {
                    Violation::Dependency { task, missing }
                }
                _ => Violation::Duplicate(*g.task(id)),
            })?;
        }
    }
    if let Some(id) = (0..g.len()).find(|&i| !started[i]) {
        return Err(Violation::Missing(*g.task(id)));
    }
    Ok(())
}

const PANEL_STATIC: &str = "#d62728";
const PANEL_DYNAMIC: &str = "#ff9896";
const UPDATE_STATIC: &str = "#2ca02c";
const UPDATE_DYNAMIC: &str = "#98df8a";

/// Fill colour: red for panel tasks (P, L), green for updates (U, S), lighter
/// for the dynamic section.
pub fn task_color(task: &Task) -> &'static str {
    match (task.kind.is_panel(), task.section) {
        (true, Section::Static) => PANEL_STATIC,
        (true, Section::Dynamic) => PANEL_DYNAMIC,
        (false, Section::Static) => UPDATE_STATIC,
        (false, Section::Dynamic) => UPDATE_DYNAMIC,
    }
}

fn section_name(s: Section) -> &'static str {
    match s {
        Section::Static => "static",
        Section::Dynamic => "dynamic",
    }
}

fn parse_kind(s: &str) -> Result<TaskKind> {
    match s {
        "P" => Ok(TaskKind::P),
        "L" => Ok(TaskKind::L),
        "U" => Ok(TaskKind::U),
        "S" => Ok(TaskKind::S),
        _ => Err(CaluError::Trace(format!("unknown task kind {s:?}"))),
    }
}

fn parse_section(s: &str) -> Result<Section> {
    match s {
        "static" => Ok(Section::Static),
        "dynamic" => Ok(Section::Dynamic),
        _ => Err(CaluError::Trace(format!("unknown section {s:?}"))),
    }
}

fn bad(msg: &str) -> CaluError {
    CaluError::Trace(msg.to_string())
}

impl Timeline {
    /// Chrome Trace Event Format document of complete (`"X"`) events. `ts`
    /// and `dur` are in microseconds for real runs and in ticks for simulated
    /// ones; exact native timestamps are kept in `args`.
    pub fn to_chrome_json(&self) -> String {
        let scale = self.unit.per_microsecond();
        let events: Vec<Value> = self
            .events
            .iter()
            .map(|e| {
                json!({
                    "name": e.task.to_string(),
                    "cat": e.task.kind.name(),
                    "ph": "X",
                    "pid": 0,
                    "tid": e.worker,
                    "ts": e.t_start / scale,
                    "dur": e.duration() / scale,
                    "args": {
                        "kind": e.task.kind.name(),
                        "step": e.task.step,
                        "row": e.task.row,
                        "col": e.task.col,
                        "section": section_name(e.task.section),
                        "t_start": e.t_start,
                        "t_end": e.t_end,
                    }
                })
            })
            .collect();
        let doc = json!({
            "traceEvents": events,
            "displayTimeUnit": "ns",
            "otherData": {
                "time_unit": self.unit.name(),
                "workers": self.workers,
                "makespan": self.makespan(),
            }
        });
        serde_json::to_string_pretty(&doc).expect("trace JSON serializes")
    }

    pub fn from_chrome_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| CaluError::Trace(e.to_string()))?;
        let other = &doc["otherData"];
        let unit = other["time_unit"]
            .as_str()
            .and_then(TimeUnit::from_name)
            .ok_or_else(|| bad("missing otherData.time_unit"))?;
        let workers = other["workers"]
            .as_u64()
            .ok_or_else(|| bad("missing otherData.workers"))? as usize;
        let list = doc["traceEvents"]
            .as_array()
            .ok_or_else(|| bad("missing traceEvents"))?;
        let mut events = Vec::with_capacity(list.len());
        for ev in list {
            if ev["ph"] != "X" {
                continue;
            }
            let a = &ev["args"];
            let num = |k: &str| {
                a[k].as_u64()
                    .map(|v| v as usize)
                    .ok_or_else(|| bad(&format!("missing args.{k}")))
            };
            let float = |k: &str| {
                a[k].as_f64()
                    .ok_or_else(|| bad(&format!("missing args.{k}")))
            };
            let task = Task {
                kind: parse_kind(a["kind"].as_str().unwrap_or(""))?,
                step: num("step")?,
                row: num("row")?,
                col: num("col")?,
                section: parse_section(a["section"].as_str().unwrap_or(""))?,
            };
            let worker = ev["tid"].as_u64().ok_or_else(|| bad("missing tid"))? as usize;
            events.push(TraceEvent {
                worker,
                task,
                t_start: float("t_start")?,
                t_end: float("t_end")?,
            });
        }
        Ok(Timeline::new(workers, unit, events))
    }

    /// Standalone SVG Gantt chart with one row per worker. Every rectangle
    /// carries its event as `data-*` attributes.
    pub fn to_svg(&self) -> String {
        const ROW: f64 = 24.0;
        const LEFT: f64 = 80.0;
        const WIDTH: f64 = 1000.0;
        let makespan = self.makespan();
        let scale = if makespan > 0.0 {
            WIDTH / makespan
        } else {
            0.0
        };
        let height = ROW * self.workers as f64 + 30.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{height}\" \
             data-workers=\"{}\" data-unit=\"{}\" data-makespan=\"{makespan}\">",
            LEFT + WIDTH + 10.0,
            self.workers,
            self.unit.name()
        );
        for w in 0..self.workers {
            let y = ROW * w as f64 + 5.0;
            let _ = writeln!(s, "<g class=\"worker\" data-worker=\"{w}\">");
            let _ = writeln!(
                s,
                "<text x=\"4\" y=\"{}\" font-size=\"12\">worker {w}</text>",
                y + 14.0
            );
            for e in self.worker_events(w) {
                let t = &e.task;
                let _ = writeln!(
                    s,
                    "<rect class=\"task\" x=\"{:.3}\" y=\"{y}\" width=\"{:.3}\" height=\"{}\" fill=\"{}\" \
                     data-worker=\"{w}\" data-task=\"{t}\" data-kind=\"{}\" data-step=\"{}\" data-row=\"{}\" \
                     data-col=\"{}\" data-section=\"{}\" data-start=\"{}\" data-end=\"{}\"><title>{t}</title></rect>",
                    LEFT + e.t_start * scale,
                    e.duration() * scale,
                    ROW - 4.0,
                    task_color(t),
                    t.kind.name(),
                    t.step,
                    t.row,
                    t.col,
                    section_name(t.section),
                    e.t_start,
                    e.t_end,
                );
            }
            s.push_str("</g>\n");
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn from_svg(text: &str) -> Result<Self> {
        static HEAD: OnceLock<Regex> = OnceLock::new();
        static RECT: OnceLock<Regex> = OnceLock::new();
        let head = HEAD.get_or_init(|| {
            Regex::new(r#"<svg [^>]*data-workers="(\d+)" data-unit="(\w+)""#).expect("valid regex")
        });
        let rect = RECT.get_or_init(|| {
            Regex::new(
                r#"<rect class="task" [^>]*data-worker="(\d+)" data-task="[^"]*" data-kind="(\w)" data-step="(\d+)" data-row="(\d+)" data-col="(\d+)" data-section="(\w+)" data-start="([^"]+)" data-end="([^"]+)""#,
            )
            .expect("valid regex")
        });
        let h = head
            .captures(text)
            .ok_or_else(|| bad("missing svg header"))?;
        let workers: usize = h[1].parse().map_err(|_| bad("bad worker count"))?;
        let unit = TimeUnit::from_name(&h[2]).ok_or_else(|| bad("bad time unit"))?;
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad integer attribute"));
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad("bad time attribute"));
        let mut events = Vec::new();
        for c in rect.captures_iter(text) {
            events.push(TraceEvent {
                worker: int(&c[1])?,
                task: Task {
                    kind: parse_kind(&c[2])?,
                    step: int(&c[3])?,
                    row: int(&c[4])?,
                    col: int(&c[5])?,
                    section: parse_section(&c[6])?,
                },
                t_start: float(&c[7])?,
                t_end: float(&c[8])?,
            });
        }
        Ok(Timeline::new(workers, unit, events))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Partition;

    fn task(kind: TaskKind, step: usize, row: usize, col: usize) -> Task {
        Task {
            kind,
            step,
            row,
            col,
            section: Section::Static,
        }
    }

    fn ev(worker: usize, t: Task, s: f64, e: f64) -> TraceEvent {
        TraceEvent {
            worker,
            task: t,
            t_start: s,
            t_end: e,
        }
    }

    fn two_by_two() -> TaskGraph {
        TaskGraph::build(&Partition::new(4, 4, 2).unwrap(), 2).unwrap()
    }

    fn serial_timeline(g: &TaskGraph) -> Timeline {
        let order = g.topological_order().unwrap();
        let events = order
            .iter()
            .enumerate()
            .map(|(n, &id)| ev(0, *g.task(id), n as f64, n as f64 + 1.0))
            .collect();
        Timeline::new(1, TimeUnit::Ticks, events)
    }

    #[test]
    fn idle_examples() {
        let p = task(TaskKind::P, 0, 0, 0);
        let t = Timeline::new(1, TimeUnit::Ticks, vec![ev(0, p, 0.0, 10.0)]);
        assert_eq!(idle_stats(&t).unwrap().idle_fraction, vec![0.0]);

        let u = task(TaskKind::U, 0, 0, 1);
        let t = Timeline::new(
            2,
            TimeUnit::Ticks,
            vec![ev(0, p, 0.0, 10.0), ev(1, u, 0.0, 5.0)],
        );
        let s = idle_stats(&t).unwrap();
        assert_eq!(s.idle_fraction, vec![0.0, 0.5]);
        let total: f64 = s.busy.iter().chain(&s.idle).sum();
        assert_eq!(total, 2.0 * s.makespan);

        let mut events = Vec::new();
        for w in 0..10 {
            let end = if w == 9 { 10.0 } else { 6.0 };
            events.push(ev(w, task(TaskKind::S, 0, w + 1, 1), 0.0, end));
        }
        let s = idle_stats(&Timeline::new(10, TimeUnit::Ticks, events)).unwrap();
        assert_eq!(s.idle90_after, 0.6);

        assert!(idle_stats(&Timeline::new(2, TimeUnit::Ticks, vec![])).is_err());
    }

    #[test]
    fn serial_trace_is_valid() {
        let g = two_by_two();
        assert_eq!(validate(&serial_timeline(&g), &g), Ok(()));
    }

    #[test]
    fn update_before_u_is_rejected() {
        let g = two_by_two();
        let events = vec![
            ev(0, *g.task(0), 0.0, 1.0),
            ev(0, task(TaskKind::L, 0, 1, 0), 1.0, 2.0),
            ev(0, task(TaskKind::S, 0, 1, 1), 2.0, 3.0),
            ev(1, task(TaskKind::U, 0, 0, 1), 2.5, 3.5),
            ev(0, *g.task(g.find(TaskKind::P, 1, 1, 1).unwrap()), 4.0, 5.0),
        ];
        match validate(&Timeline::new(2, TimeUnit::Ticks, events), &g) {
            Err(Violation::Dependency { task, missing }) => {
                assert_eq!(task.to_string(), "S(1,2,2)");
                assert_eq!(missing.to_string(), "U(1,2)");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn back_to_back_is_allowed_but_overlap_is_not() {
        let g = two_by_two();
        // L and U in parallel, S starting exactly when both end
        let order = [
            (0, TaskKind::P, 0, 0, 0, 0.0, 1.0),
            (0, TaskKind::L, 0, 1, 0, 1.0, 2.0),
            (1, TaskKind::U, 0, 0, 1, 1.0, 2.0),
            (1, TaskKind::S, 0, 1, 1, 2.0, 3.0),
            (0, TaskKind::P, 1, 1, 1, 3.0, 4.0),
        ];
        let mk = |shift: f64| {
            let events = order
                .iter()
                .map(|&(w, k, s, i, j, a, b)| {
                    let t = *g.task(g.find(k, s, i, j).unwrap());
                    let a = if k == TaskKind::S { a - shift } else { a };
                    ev(w, t, a, b)
                })
                .collect();
            Timeline::new(2, TimeUnit::Ticks, events)
        };
        assert_eq!(validate(&mk(0.0), &g), Ok(()));
        assert!(matches!(
            validate(&mk(0.5), &g),
            Err(Violation::Dependency { .. })
        ));
    }

    #[test]
    fn duplicates_missing_and_unknown() {
        let g = two_by_two();
        let mut t = serial_timeline(&g);
        let first = t.events[0];
        t.events.push(ev(0, first.task, 100.0, 101.0));
        assert_eq!(validate(&t, &g), Err(Violation::Duplicate(first.task)));

        let mut t = serial_timeline(&g);
        let last = t.events.pop().unwrap();
        assert_eq!(validate(&t, &g), Err(Violation::Missing(last.task)));

        let mut t = serial_timeline(&g);
        t.events.push(ev(0, task(TaskKind::S, 0, 7, 7), 50.0, 51.0));
        assert!(matches!(validate(&t, &g), Err(Violation::Unknown(_))));
    }

    #[test]
    fn chrome_export() {
        let empty = Timeline::new(2, TimeUnit::Ticks, vec![]);
        let v: Value = serde_json::from_str(&empty.to_chrome_json()).unwrap();
        assert_eq!(v["traceEvents"].as_array().unwrap().len(), 0);
        assert_eq!(
            Timeline::from_chrome_json(&empty.to_chrome_json()).unwrap(),
            empty
        );

        let p = task(TaskKind::P, 0, 0, 0);
        let u = task(TaskKind::U, 0, 0, 1);
        let t = Timeline::new(
            2,
            TimeUnit::Nanoseconds,
            vec![ev(0, p, 0.0, 3000.0), ev(1, u, 3000.0, 4500.0)],
        );
        let text = t.to_chrome_json();
        let v: Value = serde_json::from_str(&text).unwrap();
        let list = v["traceEvents"].as_array().unwrap();
        assert_eq!(list.len(), 2);
        assert_eq!(list[1]["ph"], "X");
        assert_eq!(list[1]["ts"], 3.0);
        assert_eq!(list[1]["dur"], 1.5);
        assert_eq!(list[1]["tid"], 1);
        assert_eq!(list[1]["cat"], "U");
        assert_eq!(list[1]["name"], "U(1,2)");
        assert_eq!(v["otherData"]["time_unit"], "ns");
        assert_eq!(Timeline::from_chrome_json(&text).unwrap(), t);
    }

    #[test]
    fn svg_export() {
        let g = two_by_two();
        let mut t = serial_timeline(&g);
        t.events[1].worker = 1;
        t.events[1].t_start = 0.1 + 0.2;
        t.workers = 3;
        let t = Timeline::new(t.workers, t.unit, t.events);
        let svg = t.to_svg();
        assert_eq!(svg.matches("<g class=\"worker\"").count(), 3);
        assert_eq!(svg.matches("<rect class=\"task\"").count(), t.len());
        assert!(svg.contains(PANEL_STATIC) && svg.contains(UPDATE_STATIC));
        assert_eq!(Timeline::from_svg(&svg).unwrap(), t);
    }

    #[test]
    fn colors() {
        let mut t = task(TaskKind::L, 0, 1, 0);
        assert_eq!(task_color(&t), PANEL_STATIC);
        t.section = Section::Dynamic;
        assert_eq!(task_color(&t), PANEL_DYNAMIC);
        t.kind = TaskKind::S;
        assert_eq!(task_color(&t), UPDATE_DYNAMIC);
    }

    #[test]
    fn well_formedness() {
        let p = task(TaskKind::P, 0, 0, 0);
        let u = task(TaskKind::U, 0, 0, 1);
        let t = Timeline::new(
            1,
            TimeUnit::Ticks,
            vec![ev(0, p, 0.0, 2.0), ev(0, u, 1.0, 3.0)],
        );
        assert!(t.check_well_formed().is_err());
        let t = Timeline::new(
            1,
            TimeUnit::Ticks,
            vec![ev(0, p, 0.0, 1.0), ev(0, u, 1.0, 3.0)],
        );
        assert!(t.check_well_formed().is_ok());
        let t = Timeline::new(1, TimeUnit::Ticks, vec![ev(1, p, 0.0, 1.0)]);
        assert!(t.check_well_formed().is_err());
    }
}
