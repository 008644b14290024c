//! CALU task dependency graph.
//!
//! One node per block operation:
//!
//! - `P(K)`: tournament pivoting of panel `K`, the panel row swaps and the
//!   factorization of the diagonal tile;
//! - `L(K, I)`: `L_IK = A_IK U_KK^{-1}` for `I > K`;
//! - `U(K, J)`: right swaps on block column `J`, then `U_KJ = L_KK^{-1} A_KJ`;
//! - `S(K, I, J)`: `A_IJ -= L_IK U_KJ`.
//!
//! Edges are the data dependencies between those operations. `P(K)` waits
//! only for column `K` to be updated through step `K - 1`, which is what lets
//! the next panel start before the rest of the trailing update finishes.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::layout::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    P,
    L,
    U,
    S,
}

impl TaskKind {
    /// Order of kinds inside one column and step.
    pub fn rank(self) -> u8 {
        match self {
            TaskKind::P => 0,
            TaskKind::L => 1,
            TaskKind::U => 2,
            TaskKind::S => 3,
        }
    }

    /// P and L work on the panel; U and S update the trailing matrix.
    pub fn is_panel(self) -> bool {
        matches!(self, TaskKind::P | TaskKind::L)
    }

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::P => "P",
            TaskKind::L => "L",
            TaskKind::U => "U",
            TaskKind::S => "S",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Section {
    Static,
    Dynamic,
}

/// One node of the graph, 0-based. `row`/`col` name the block the task writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Task {
    pub kind: TaskKind,
    pub step: usize,
    pub row: usize,
    pub col: usize,
    pub section: Section,
}

impl Task {
    /// Lexicographic tie-break key `(K, J, I)`.
    pub fn order_key(&self) -> (usize, usize, usize, u8) {
        (self.step, self.col, self.row, self.kind.rank())
    }

    /// Block the scheduler associates with this task for ownership and locality.
    pub fn home_block(&self) -> (usize, usize) {
        (self.row, self.col)
    }
}

/// 1-based notation, e.g. `S(1,2,2)`.
impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (k, i, j) = (self.step + 1, self.row + 1, self.col + 1);
        match self.kind {
            TaskKind::P => write!(f, "P({k})"),
            TaskKind::L => write!(f, "L({k},{i})"),
            TaskKind::U => write!(f, "U({k},{j})"),
            TaskKind::S => write!(f, "S({k},{i},{j})"),
        }
    }
}

pub type TaskId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("task {task} executed before its predecessor {missing}")]
    DependencyViolation { task: Task, missing: Task },
    #[error("task {0} completed twice")]
    AlreadyDone(Task),
    #[error("task {0} is not part of the graph")]
    UnknownTask(Task),
    #[error("graph contains a cycle")]
    Cycle,
}

/// Immutable structure of a task graph.
#[derive(Debug, Clone)]
pub struct TaskGraph {
    tasks: Vec<Task>,
    preds: Vec<Vec<TaskId>>,
    succs: Vec<Vec<TaskId>>,
    index: HashMap<(TaskKind, usize, usize, usize), TaskId>,
    n_static: usize,
    steps: usize,
    block_rows: usize,
    block_cols: usize,
}

struct Builder {
    tasks: Vec<Task>,
    preds: Vec<Vec<TaskId>>,
    index: HashMap<(TaskKind, usize, usize, usize), TaskId>,
}

impl Builder {
    fn add(&mut self, task: Task) -> TaskId {
        let id = self.tasks.len();
        self.tasks.push(task);
        self.preds.push(Vec::new());
        self.index
            .insert((task.kind, task.step, task.row, task.col), id);
        id
    }

    fn id(&self, kind: TaskKind, step: usize, row: usize, col: usize) -> TaskId {
        self.index[&(kind, step, row, col)]
    }

    fn edge(&mut self, from: TaskId, to: TaskId) {
        if !self.preds[to].contains(&from) {
            self.preds[to].push(from);
        }
    }
}

fn section_of(col: usize, n_static: usize) -> Section {
    if col < n_static {
        Section::Static
    } else {
        Section::Dynamic
    }
}

impl TaskGraph {
    /// Builds the CALU graph for `part`. Tasks on block columns `< n_static`
    /// are static, the rest dynamic.
    pub fn build(part: &Partition, n_static: usize) -> Result<Self, DagError> {
        let (mb, nb) = (part.block_rows, part.block_cols);
        let n_static = n_static.min(nb);
        let steps = mb.min(nb);
        let mut b = Builder {
            tasks: Vec::new(),
            preds: Vec::new(),
            index: HashMap::new(),
        };
        let t = |kind, step, row, col| Task {
            kind,
            step,
            row,
            col,
            section: section_of(col, n_static),
        };
        for k in 0..steps {
            let p = b.add(t(TaskKind::P, k, k, k));
            if k > 0 {
                for i in k..mb {
                    let s = b.id(TaskKind::S, k - 1, i, k);
                    b.edge(s, p);
                }
            }
            for i in k + 1..mb {
                let l = b.add(t(TaskKind::L, k, i, k));
                b.edge(p, l);
            }
            for j in k + 1..nb {
                let u = b.add(t(TaskKind::U, k, k, j));
                b.edge(p, u);
                if k > 0 {
                    // the right swap rewrites every row of column j from k down
                    for i in k..mb {
                        let s = b.id(TaskKind::S, k - 1, i, j);
                        b.edge(s, u);
                    }
                }
            }
            for j in k + 1..nb {
                for i in k + 1..mb {
                    let s = b.add(t(TaskKind::S, k, i, j));
                    let l = b.id(TaskKind::L, k, i, k);
                    let u = b.id(TaskKind::U, k, k, j);
                    b.edge(l, s);
                    b.edge(u, s);
                    if k > 0 {
                        let prev = b.id(TaskKind::S, k - 1, i, j);
                        b.edge(prev, s);
                    }
                }
            }
        }
        Self::finish(b, n_static, steps, mb, nb)
    }

    /// Graph of `rows x cols` independent update tasks, one per block
    /// `(1.., 1..)`, for load-balancing experiments. Columns `< n_static + 1`
    /// are static.
    pub fn independent(rows: usize, cols: usize, n_static: usize) -> Self {
        let mut b = Builder {
            tasks: Vec::new(),
            preds: Vec::new(),
            index: HashMap::new(),
        };
        for j in 1..=cols {
            for i in 1..=rows {
                b.add(Task {
                    kind: TaskKind::S,
                    step: 0,
                    row: i,
                    col: j,
                    section: section_of(j - 1, n_static),
                });
            }
        }
        Self::finish(b, n_static.min(cols), 1, rows + 1, cols + 1)
            .expect("edgeless graph is acyclic")
    }

    fn finish(
        b: Builder,
        n_static: usize,
        steps: usize,
        mb: usize,
        nb: usize,
    ) -> Result<Self, DagError> {
        let mut succs = vec![Vec::new(); b.tasks.len()];
        for (to, ps) in b.preds.iter().enumerate() {
            for &from in ps {
                succs[from].push(to);
            }
        }
        let g = TaskGraph {
            tasks: b.tasks,
            preds: b.preds,
            succs,
            index: b.index,
            n_static,
            steps,
            block_rows: mb,
            block_cols: nb,
        };
        g.topological_order()?;
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn task(&self, id: TaskId) -> &Task {
        &self.tasks[id]
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn preds(&self, id: TaskId) -> &[TaskId] {
        &self.preds[id]
    }

    pub fn succs(&self, id: TaskId) -> &[TaskId] {
        &self.succs[id]
    }

    pub fn n_static(&self) -> usize {
        self.n_static
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn block_rows(&self) -> usize {
        self.block_rows
    }

    pub fn block_cols(&self) -> usize {
        self.block_cols
    }

    /// Looks a task up by kind and block coordinates (section is ignored).
    pub fn find(&self, kind: TaskKind, step: usize, row: usize, col: usize) -> Option<TaskId> {
        self.index.get(&(kind, step, row, col)).copied()
    }

    pub fn id_of(&self, task: &Task) -> Option<TaskId> {
        self.find(task.kind, task.step, task.row, task.col)
    }

    /// Every `(from, to)` edge, sorted.
    pub fn edges(&self) -> Vec<(TaskId, TaskId)> {
        let mut e: Vec<(TaskId, TaskId)> = self
            .preds
            .iter()
            .enumerate()
            .flat_map(|(to, ps)| ps.iter().map(move |&from| (from, to)))
            .collect();
        e.sort_unstable();
        e
    }

    /// Kahn's algorithm; fails on a cycle.
    pub fn topological_order(&self) -> Result<Vec<TaskId>, DagError> {
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut queue: Vec<TaskId> = (0..self.len()).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        let mut head = 0;
        while head < queue.len() {
            let id = queue[head];
            head += 1;
            order.push(id);
            for &s in &self.succs[id] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    queue.push(s);
                }
            }
        }
        if order.len() != self.len() {
            return Err(DagError::Cycle);
        }
        Ok(order)
    }

    /// Longest path in the subgraph of `section` tasks under unit weights.
    /// Between equally long chains, the one through the next panel's column
    /// (`U`/`S`) is preferred over `L`, then the smallest `(K, J, I)`.
    pub fn critical_path(&self, section: Section) -> Vec<TaskId> {
        let order = self
            .topological_order()
            .expect("graph is acyclic by construction");
        let key = |id: TaskId| {
            let t = &self.tasks[id];
            (t.step, t.kind == TaskKind::L, t.col, t.row, t.kind.rank())
        };
        let mut len = vec![0usize; self.len()];
        let mut prev: Vec<Option<TaskId>> = vec![None; self.len()];
        for &id in &order {
            if self.tasks[id].section != section {
                continue;
            }
            let mut best: Option<TaskId> = None;
            for &p in &self.preds[id] {
                if self.tasks[p].section != section {
                    continue;
                }
                best = match best {
                    None => Some(p),
                    Some(b) if len[p] > len[b] || (len[p] == len[b] && key(p) < key(b)) => Some(p),
                    keep => keep,
                };
            }
            len[id] = 1 + best.map_or(0, |b| len[b]);
            prev[id] = best;
        }
        let end = (0..self.len())
            .filter(|&i| self.tasks[i].section == section)
            .max_by(|&a, &b| len[a].cmp(&len[b]).then_with(|| key(b).cmp(&key(a))));
        let mut path = Vec::new();
        let mut cur = end;
        while let Some(id) = cur {
            path.push(id);
            cur = prev[id];
        }
        path.reverse();
        path
    }

    /// Length of the heaviest dependency chain when task `t` takes `cost(t)`.
    pub fn longest_path(&self, cost: impl Fn(&Task) -> f64) -> f64 {
        let order = self
            .topological_order()
            .expect("graph is acyclic by construction");
        let mut finish = vec![0.0_f64; self.len()];
        for &id in &order {
            let start = self.preds[id]
                .iter()
                .map(|&p| finish[p])
                .fold(0.0, f64::max);
            finish[id] = start + cost(&self.tasks[id]);
        }
        finish.into_iter().fold(0.0, f64::max)
    }

    /// Graphviz rendering; static tasks are drawn as boxes.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph calu {\n  rankdir=TB;\n");
        for (id, t) in self.tasks.iter().enumerate() {
            let color = match t.kind {
                TaskKind::P | TaskKind::L => "#d62728",
                TaskKind::U | TaskKind::S => "#2ca02c",
            };
            let shape = match t.section {
                Section::Static => "box",
                Section::Dynamic => "ellipse",
            };
            let _ = writeln!(
                s,
                "  t{id} [label=\"{t}\", shape={shape}, color=\"{color}\"];"
            );
        }
        for (from, to) in self.edges() {
            let _ = writeln!(s, "  t{from} -> t{to};");
        }
        s.push_str("}\n");
        s
    }
}

/// Completion state of a graph, safe to update from several workers.
#[derive(Debug)]
pub struct ReadyTracker {
    remaining: Vec<AtomicUsize>,
    done: Vec<AtomicBool>,
    completed: AtomicUsize,
}

impl ReadyTracker {
    pub fn new(graph: &TaskGraph) -> Self {
        Self {
            remaining: graph
                .preds
                .iter()
                .map(|p| AtomicUsize::new(p.len()))
                .collect(),
            done: (0..graph.len()).map(|_| AtomicBool::new(false)).collect(),
            completed: AtomicUsize::new(0),
        }
    }

    /// Tasks with no predecessors.
    pub fn initial_ready(graph: &TaskGraph) -> Vec<TaskId> {
        (0..graph.len())
            .filter(|&i| graph.preds[i].is_empty())
            .collect()
    }

    pub fn is_done(&self, id: TaskId) -> bool {
        self.done[id].load(Ordering::Acquire)
    }

    pub fn completed(&self) -> usize {
        self.completed.load(Ordering::Acquire)
    }

    pub fn all_done(&self) -> bool {
        self.completed() == self.done.len()
    }

    /// First predecessor of `id` that has not completed, if any.
    pub fn missing_predecessor(&self, graph: &TaskGraph, id: TaskId) -> Option<TaskId> {
        graph.preds[id].iter().copied().find(|&p| !self.is_done(p))
    }

    /// Records completion of `id` and returns successors that just became ready.
    pub fn mark_done(&self, graph: &TaskGraph, id: TaskId) -> Result<Vec<TaskId>, DagError> {
        if let Some(p) = self.missing_predecessor(graph, id) {
            return Err(DagError::DependencyViolation {
                task: graph.tasks[id],
                missing: graph.tasks[p],
            });
        }
        if self.done[id].swap(true, Ordering::AcqRel) {
            return Err(DagError::AlreadyDone(graph.tasks[id]));
        }
        self.completed.fetch_add(1, Ordering::AcqRel);
        let mut ready = Vec::new();
        for &s in &graph.succs[id] {
            if self.remaining[s].fetch_sub(1, Ordering::AcqRel) == 1 {
                ready.push(s);
            }
        }
        Ok(ready)
    }
}
