//! Ready queues and task selection for every policy.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::dag::{Section, TaskGraph, TaskId, TaskKind};
use crate::layout::ThreadGrid;

use super::Policy;

/// Static queue order: panels first, then by step, column, kind and row.
type StaticKey = (u8, usize, usize, u8, usize, TaskId);
/// Global queue order: left to right by column, then step, kind and row.
type DynKey = (usize, usize, u8, usize, TaskId);

/// Tasks handed to one worker in a single dispatch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dispatch {
    pub tasks: Vec<TaskId>,
    /// Taken from the worker's own static queue.
    pub from_static: bool,
}

/// All ready-but-unstarted tasks. Every ready task sits in exactly one of
/// the static queues or the global queue.
#[derive(Debug)]
pub struct QueueState<'g> {
    graph: &'g TaskGraph,
    policy: Policy,
    grid: ThreadGrid,
    group: usize,
    lookahead: Option<usize>,
    statics: Vec<BTreeSet<StaticKey>>,
    global: BTreeSet<DynKey>,
    by_block: HashMap<(usize, usize), BTreeSet<DynKey>>,
    by_col: HashMap<usize, BTreeSet<DynKey>>,
    step_remaining: Vec<usize>,
    locality: Vec<VecDeque<(usize, usize)>>,
    holder: HashMap<(usize, usize), usize>,
    locality_cap: usize,
    current_col: Vec<Option<usize>>,
}

impl<'g> QueueState<'g> {
    pub fn new(
        graph: &'g TaskGraph,
        policy: Policy,
        grid: ThreadGrid,
        group: usize,
        lookahead: Option<usize>,
    ) -> Self {
        let workers = grid.workers();
        let mut step_remaining = vec![0; graph.steps().max(1)];
        for t in graph.tasks() {
            step_remaining[t.step] += 1;
        }
        let blocks = graph.block_rows() * graph.block_cols();
        Self {
            graph,
            policy,
            grid,
            group: group.max(1),
            lookahead,
            statics: vec![BTreeSet::new(); workers],
            global: BTreeSet::new(),
            by_block: HashMap::new(),
            by_col: HashMap::new(),
            step_remaining,
            locality: vec![VecDeque::new(); workers],
            holder: HashMap::new(),
            locality_cap: 2 * blocks.div_ceil(workers),
            current_col: vec![None; workers],
        }
    }

    fn static_key(&self, id: TaskId) -> StaticKey {
        let t = self.graph.task(id);
        (
            u8::from(t.kind != TaskKind::P),
            t.step,
            t.col,
            t.kind.rank(),
            t.row,
            id,
        )
    }

    fn dyn_key(&self, id: TaskId) -> DynKey {
        let t = self.graph.task(id);
        (t.col, t.step, t.kind.rank(), t.row, id)
    }

    /// Worker that owns task `id` under the block-cyclic distribution.
    pub fn owner(&self, id: TaskId) -> usize {
        let (i, j) = self.graph.task(id).home_block();
        self.grid.owner(i, j)
    }

    fn is_locality(&self) -> bool {
        matches!(
            self.policy,
            Policy::BlockLocality | Policy::GuidedColumnLocality
        )
    }

    /// Queues a task whose predecessors have all completed. Locality
    /// policies keep no static queues.
    pub fn push_ready(&mut self, id: TaskId) {
        let t = self.graph.task(id);
        if t.section == Section::Static && !self.is_locality() {
            let w = self.owner(id);
            let key = self.static_key(id);
            self.statics[w].insert(key);
        } else {
            let key = self.dyn_key(id);
            self.global.insert(key);
            self.by_block.entry(t.home_block()).or_default().insert(key);
            self.by_col.entry(t.col).or_default().insert(key);
        }
    }

    pub fn ready_len(&self) -> usize {
        self.global.len() + self.statics.iter().map(BTreeSet::len).sum::<usize>()
    }

    pub fn global_len(&self) -> usize {
        self.global.len()
    }

    pub fn static_len(&self, worker: usize) -> usize {
        self.statics[worker].len()
    }

    /// Look-ahead limit: panel `K` may start once step `K - 1 - depth` is complete.
    fn eligible(&self, id: TaskId) -> bool {
        let t = self.graph.task(id);
        match (t.kind, self.lookahead) {
            (TaskKind::P, Some(depth)) if t.step > depth => {
                self.step_remaining[t.step - 1 - depth] == 0
            }
            _ => true,
        }
    }

    fn first_eligible<'a>(&self, mut it: impl Iterator<Item = &'a DynKey>) -> Option<DynKey> {
        it.find(|k| self.eligible(k.4)).copied()
    }

    fn remove_dyn(&mut self, key: DynKey) {
        let t = self.graph.task(key.4);
        self.global.remove(&key);
        if let Some(s) = self.by_block.get_mut(&t.home_block()) {
            s.remove(&key);
        }
        if let Some(s) = self.by_col.get_mut(&t.col) {
            s.remove(&key);
        }
    }

    /// First eligible task of the global queue in column-major DFS order,
    /// removed from the queue. Earlier columns come first; inside a column,
    /// earlier steps, then `P`, `L`, `U`, `S`.
    pub fn dynamic_task(&mut self) -> Option<TaskId> {
        let key = self.first_eligible(self.global.iter())?;
        self.remove_dyn(key);
        Some(key.4)
    }

    /// Whether some worker could take a task from the global queue now.
    pub fn has_eligible_global(&self) -> bool {
        self.global.iter().any(|k| self.eligible(k.4))
    }

    /// Further ready updates of the same step and column as `first`, up to the group size.
    fn extend_static_group(&mut self, worker: usize, first: TaskId, out: &mut Vec<TaskId>) {
        let t = *self.graph.task(first);
        while out.len() < self.group {
            let Some(&next) = self.statics[worker].iter().next() else {
                break;
            };
            let n = self.graph.task(next.5);
            if n.kind != TaskKind::S || n.step != t.step || n.col != t.col {
                break;
            }
            self.statics[worker].remove(&next);
            out.push(next.5);
        }
    }

    /// Next work for `worker` under the configured policy.
    pub fn next(&mut self, worker: usize) -> Option<Dispatch> {
        match self.policy {
            Policy::Static | Policy::Dynamic | Policy::Hybrid => self.next_hybrid(worker),
            Policy::BlockLocality => self.next_locality(worker).map(|id| self.single(worker, id)),
            Policy::GuidedColumnLocality => {
                self.next_guided(worker).map(|id| self.single(worker, id))
            }
        }
    }

    fn single(&mut self, worker: usize, id: TaskId) -> Dispatch {
        self.steal_delete(worker, id);
        Dispatch {
            tasks: vec![id],
            from_static: false,
        }
    }

    /// Own static tasks first, with updates of one column batched; otherwise
    /// a single dynamic task.
    fn next_hybrid(&mut self, worker: usize) -> Option<Dispatch> {
        let own = self.statics[worker]
            .iter()
            .find(|k| self.eligible(k.5))
            .copied();
        if let Some(key) = own {
            self.statics[worker].remove(&key);
            let mut tasks = vec![key.5];
            if self.graph.task(key.5).kind == TaskKind::S {
                self.extend_static_group(worker, key.5, &mut tasks);
            }
            return Some(Dispatch {
                tasks,
                from_static: true,
            });
        }
        let id = self.dynamic_task()?;
        Some(Dispatch {
            tasks: vec![id],
            from_static: false,
        })
    }

    /// Most recently touched blocks of this worker first, then the global order.
    pub fn next_locality(&mut self, worker: usize) -> Option<TaskId> {
        let local = self.locality[worker].iter().find_map(|b| {
            self.by_block
                .get(b)
                .and_then(|s| self.first_eligible(s.iter()))
        });
        let key = match local {
            Some(k) => k,
            None => self.first_eligible(self.global.iter())?,
        };
        self.remove_dyn(key);
        Some(key.4)
    }

    /// Like [`Self::next_locality`], but keeps working down the current
    /// column and checks each remembered block's column before moving on to
    /// the next entry.
    pub fn next_guided(&mut self, worker: usize) -> Option<TaskId> {
        let mut pick = self.current_col[worker]
            .and_then(|j| self.by_col.get(&j))
            .and_then(|s| self.first_eligible(s.iter()));
        if pick.is_none() {
            pick = self.locality[worker].iter().find_map(|b| {
                self.by_block
                    .get(b)
                    .and_then(|s| self.first_eligible(s.iter()))
                    .or_else(|| {
                        self.by_col
                            .get(&b.1)
                            .and_then(|s| self.first_eligible(s.iter()))
                    })
            });
        }
        let key = match pick {
            Some(k) => k,
            None => self.first_eligible(self.global.iter())?,
        };
        self.remove_dyn(key);
        Some(key.4)
    }

    /// A worker taking a block another worker remembers removes it from
    /// that worker's list.
    fn steal_delete(&mut self, worker: usize, id: TaskId) {
        let block = self.graph.task(id).home_block();
        if let Some(&v) = self.holder.get(&block) {
            if v != worker {
                self.locality[v].retain(|b| *b != block);
                self.holder.remove(&block);
            }
        }
    }

    /// Bookkeeping after `worker` finished `id`.
    pub fn complete(&mut self, worker: usize, id: TaskId) {
        let t = *self.graph.task(id);
        self.step_remaining[t.step] -= 1;
        if self.is_locality() {
            let block = t.home_block();
            if let Some(&v) = self.holder.get(&block) {
                self.locality[v].retain(|b| *b != block);
            }
            let q = &mut self.locality[worker];
            q.push_front(block);
            self.holder.insert(block, worker);
            if q.len() > self.locality_cap {
                if let Some(old) = q.pop_back() {
                    self.holder.remove(&old);
                }
            }
            self.current_col[worker] = Some(t.col);
        }
    }

    pub fn locality_queue(&self, worker: usize) -> impl Iterator<Item = &(usize, usize)> {
        self.locality[worker].iter()
    }

    /// Number of workers whose locality list contains `block`.
    pub fn residency(&self, block: (usize, usize)) -> usize {
        self.locality.iter().filter(|q| q.contains(&block)).count()
    }

    pub fn locality_cap(&self) -> usize {
        self.locality_cap
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::Partition;

    fn graph(nb: usize, n_static: usize) -> TaskGraph {
        TaskGraph::build(&Partition::new(nb, nb, 1).unwrap(), n_static).unwrap()
    }

    fn id(g: &TaskGraph, kind: TaskKind, k: usize, i: usize, j: usize) -> TaskId {
        g.find(kind, k, i, j).unwrap()
    }

    #[test]
    fn empty_queue_gives_nothing() {
        let g = graph(4, 0);
        let mut q = QueueState::new(&g, Policy::Dynamic, ThreadGrid::for_workers(2), 3, Some(1));
        assert_eq!(q.dynamic_task(), None);
        assert_eq!(q.next(0), None);
    }

    #[test]
    fn leftmost_column_first() {
        let g = graph(10, 8);
        let mut q = QueueState::new(&g, Policy::Hybrid, ThreadGrid::for_workers(4), 1, None);
        let right = id(&g, TaskKind::S, 0, 3, 9);
        let left = id(&g, TaskKind::S, 0, 5, 8);
        q.push_ready(right);
        q.push_ready(left);
        assert_eq!(q.dynamic_task(), Some(left));
        assert_eq!(q.dynamic_task(), Some(right));
        assert_eq!(q.dynamic_task(), None);
    }

    #[test]
    fn u_before_updates_in_same_column() {
        let g = graph(6, 0);
        let mut q = QueueState::new(&g, Policy::Dynamic, ThreadGrid::for_workers(2), 1, None);
        let s = id(&g, TaskKind::S, 1, 3, 4);
        let u = id(&g, TaskKind::U, 2, 2, 4);
        q.push_ready(u);
        q.push_ready(s);
        // earlier step wins inside a column
        assert_eq!(q.dynamic_task(), Some(s));
        let s2 = id(&g, TaskKind::S, 2, 3, 4);
        q.push_ready(s2);
        let u3 = id(&g, TaskKind::U, 1, 1, 4);
        q.push_ready(u3);
        assert_eq!(q.dynamic_task(), Some(u3));
        assert_eq!(q.dynamic_task(), Some(u));
    }

    #[test]
    fn static_tasks_go_to_owner() {
        let g = graph(4, 4);
        let grid = ThreadGrid::new(2, 2).unwrap();
        let mut q = QueueState::new(&g, Policy::Hybrid, grid, 3, None);
        let s = id(&g, TaskKind::S, 0, 1, 2);
        q.push_ready(s);
        assert_eq!(q.static_len(grid.owner(1, 2)), 1);
        assert_eq!(q.next(0), None);
        let d = q.next(grid.owner(1, 2)).unwrap();
        assert_eq!(d.tasks, vec![s]);
        assert!(d.from_static);
    }

    #[test]
    fn groups_updates_of_one_column() {
        let g = graph(8, 8);
        let grid = ThreadGrid::new(1, 1).unwrap();
        let mut q = QueueState::new(&g, Policy::Static, grid, 3, None);
        for i in 1..8 {
            q.push_ready(id(&g, TaskKind::S, 0, i, 1));
        }
        q.push_ready(id(&g, TaskKind::S, 0, 1, 2));
        let d = q.next(0).unwrap();
        assert_eq!(d.tasks.len(), 3);
        for (n, &t) in d.tasks.iter().enumerate() {
            assert_eq!(g.task(t).row, n + 1);
        }
        assert_eq!(q.next(0).unwrap().tasks.len(), 3);
        assert_eq!(q.next(0).unwrap().tasks.len(), 1);
        assert_eq!(g.task(q.next(0).unwrap().tasks[0]).col, 2);
    }

    #[test]
    fn lookahead_holds_back_far_panels() {
        let g = graph(4, 0);
        let mut q = QueueState::new(&g, Policy::Dynamic, ThreadGrid::for_workers(1), 1, Some(1));
        let p2 = id(&g, TaskKind::P, 2, 2, 2);
        q.push_ready(p2);
        // step 0 is not complete
        assert_eq!(q.dynamic_task(), None);
        for t in 0..g.len() {
            if g.task(t).step == 0 {
                q.complete(0, t);
            }
        }
        assert_eq!(q.dynamic_task(), Some(p2));
    }

    #[test]
    fn block_locality_prefers_own_blocks() {
        let g = graph(6, 0);
        let grid = ThreadGrid::for_workers(2);
        let mut q = QueueState::new(&g, Policy::BlockLocality, grid, 1, None);
        // worker 1 last touched block (3, 4)
        q.complete(1, id(&g, TaskKind::S, 0, 3, 4));
        let near = id(&g, TaskKind::S, 1, 3, 4);
        let far = id(&g, TaskKind::S, 1, 2, 2);
        q.push_ready(far);
        q.push_ready(near);
        assert_eq!(q.next(1).unwrap().tasks, vec![near]);
        assert_eq!(q.next(1).unwrap().tasks, vec![far]);
        assert_eq!(q.next(0), None);
    }

    #[test]
    fn steal_removes_block_from_previous_worker() {
        let g = graph(6, 0);
        let mut q = QueueState::new(
            &g,
            Policy::BlockLocality,
            ThreadGrid::for_workers(2),
            1,
            None,
        );
        q.complete(1, id(&g, TaskKind::S, 0, 3, 4));
        assert_eq!(q.residency((3, 4)), 1);
        let t = id(&g, TaskKind::S, 1, 3, 4);
        q.push_ready(t);
        assert_eq!(q.next(0).unwrap().tasks, vec![t]);
        assert_eq!(q.residency((3, 4)), 0);
        q.complete(0, t);
        assert_eq!(q.residency((3, 4)), 1);
        assert_eq!(q.locality_queue(0).next(), Some(&(3, 4)));
    }

    #[test]
    fn locality_queue_is_capped() {
        let g = graph(6, 0);
        let mut q = QueueState::new(
            &g,
            Policy::BlockLocality,
            ThreadGrid::for_workers(4),
            1,
            None,
        );
        let cap = q.locality_cap();
        assert_eq!(cap, 2 * 36usize.div_ceil(4));
        for t in 0..g.len() {
            q.complete(0, t);
        }
        assert!(q.locality_queue(0).count() <= cap);
    }

    #[test]
    fn guided_stays_in_column() {
        let g = graph(8, 0);
        let mut q = QueueState::new(
            &g,
            Policy::GuidedColumnLocality,
            ThreadGrid::for_workers(2),
            1,
            None,
        );
        q.complete(0, id(&g, TaskKind::S, 0, 1, 5));
        let a = id(&g, TaskKind::S, 0, 2, 5);
        let b = id(&g, TaskKind::S, 0, 5, 5);
        let other = id(&g, TaskKind::S, 0, 2, 3);
        for t in [other, b, a] {
            q.push_ready(t);
        }
        assert_eq!(q.next(0).unwrap().tasks, vec![a]);
        q.complete(0, a);
        assert_eq!(q.next(0).unwrap().tasks, vec![b]);
        q.complete(0, b);
        // column 5 exhausted
        assert_eq!(q.next(0).unwrap().tasks, vec![other]);
    }

    #[test]
    fn guided_without_history_is_dynamic() {
        let g = graph(6, 0);
        let mut q = QueueState::new(
            &g,
            Policy::GuidedColumnLocality,
            ThreadGrid::for_workers(2),
            1,
            None,
        );
        let mut d = QueueState::new(&g, Policy::Dynamic, ThreadGrid::for_workers(2), 1, None);
        for t in [
            id(&g, TaskKind::S, 0, 4, 4),
            id(&g, TaskKind::S, 0, 2, 3),
            id(&g, TaskKind::U, 0, 0, 5),
        ] {
            q.push_ready(t);
            d.push_ready(t);
        }
        for _ in 0..3 {
            assert_eq!(q.next(1).map(|x| x.tasks), d.next(1).map(|x| x.tasks));
        }
    }
}
