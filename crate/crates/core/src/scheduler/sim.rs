//! Deterministic discrete-event execution in virtual time.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dag::{ReadyTracker, Task, TaskGraph, TaskId};
use crate::error::{CaluError, Result};
use crate::trace::{TimeUnit, Timeline, TraceEvent};

use super::{QueueState, RunReport, RunStats, SchedulerConfig};

/// Worker `worker` reaches a decision point at `time`.
#[derive(Debug, Clone, Copy)]
struct Wake {
    time: f64,
    worker: usize,
}

impl PartialEq for Wake {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Wake {}

impl PartialOrd for Wake {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Wake {
    // reversed: BinaryHeap pops the earliest time, then the lowest worker id
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.worker.cmp(&self.worker))
    }
}

struct Running {
    task: TaskId,
    start: f64,
}

pub(super) fn run(
    graph: &TaskGraph,
    cfg: &SchedulerConfig,
    cost: &dyn Fn(&Task) -> f64,
) -> Result<RunReport> {
    let p = cfg.workers;
    let deltas = cfg.deltas();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut queue = QueueState::new(graph, cfg.policy, cfg.grid(), cfg.group, cfg.lookahead);
    let tracker = ReadyTracker::new(graph);
    for id in ReadyTracker::initial_ready(graph) {
        queue.push_ready(id);
    }

    let mut heap = BinaryHeap::new();
    let mut running: Vec<Option<Running>> = (0..p).map(|_| None).collect();
    let mut pending: Vec<VecDeque<TaskId>> = vec![VecDeque::new(); p];
    let mut available = vec![false; p];
    let mut buffers: Vec<Vec<TraceEvent>> = vec![Vec::new(); p];
    let (mut static_dispatches, mut dynamic_dispatches) = (0, 0);
    for (w, &d) in deltas.iter().enumerate() {
        heap.push(Wake { time: d, worker: w });
    }

    let duration = |task: &Task, rng: &mut ChaCha8Rng| {
        let base = cost(task);
        if cfg.jitter > 0.0 {
            base * (1.0 + cfg.jitter * rng.random_range(-1.0..=1.0))
        } else {
            base
        }
    };

    while let Some(first) = heap.pop() {
        let now = first.time;
        let mut batch = vec![first.worker];
        while heap.peek().is_some_and(|w| w.time == now) {
            batch.push(heap.pop().expect("peeked").worker);
        }
        for w in batch {
            available[w] = true;
            if let Some(r) = running[w].take() {
                buffers[w].push(TraceEvent {
                    worker: w,
                    task: *graph.task(r.task),
                    t_start: r.start,
                    t_end: now,
                });
                let ready = tracker.mark_done(graph, r.task).map_err(|e| {
                    CaluError::Config(format!("simulation broke a dependency: {e}"))
                })?;
                queue.complete(w, r.task);
                for id in ready {
                    queue.push_ready(id);
                }
            }
        }
        // idle workers pick up work in id order
        for w in 0..p {
            if !available[w] || running[w].is_some() {
                continue;
            }
            if pending[w].is_empty() {
                if let Some(d) = queue.next(w) {
                    if d.from_static {
                        static_dispatches += d.tasks.len();
                    } else {
                        dynamic_dispatches += d.tasks.len();
                    }
                    pending[w].extend(d.tasks);
                }
            }
            if let Some(id) = pending[w].pop_front() {
                let dur = duration(graph.task(id), &mut rng);
                running[w] = Some(Running {
                    task: id,
                    start: now,
                });
                heap.push(Wake {
                    time: now + dur,
                    worker: w,
                });
            }
        }
        debug_assert!(
            cfg.policy == super::Policy::Static
                || !queue.has_eligible_global()
                || (0..p).all(|w| !available[w] || running[w].is_some()),
            "an idle worker ignored ready dynamic work"
        );
    }

    if !tracker.all_done() {
        return Err(CaluError::Config(format!(
            "simulation stalled after {} of {} tasks",
            tracker.completed(),
            graph.len()
        )));
    }
    let timeline = Timeline::from_buffers(TimeUnit::Ticks, buffers);
    let stats = RunStats::from_timeline(&timeline, deltas, static_dispatches, dynamic_dispatches);
    Ok(RunReport {
        factors: None,
        timeline,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{simulate, simulate_with, Policy};
    use super::*;
    use crate::layout::{Partition, ThreadGrid};
    use crate::model::NoiseProfile;
    use crate::trace;

    #[test]
    fn serial_makespan_is_total_cost() {
        let g = TaskGraph::build(&Partition::new(6, 6, 1).unwrap(), 3).unwrap();
        let cfg = SchedulerConfig::new(Policy::Hybrid, 1, 0.5).simulated();
        let r = simulate_with(&g, &cfg, |t| 1.0 + t.step as f64).unwrap();
        let total: f64 = g.tasks().iter().map(|t| 1.0 + t.step as f64).sum();
        assert_eq!(r.stats.makespan, total);
        assert_eq!(trace::validate(&r.timeline, &g), Ok(()));
    }

    #[test]
    fn independent_tasks_split_evenly() {
        let g = crate::dag::TaskGraph::independent(8, 8, 0);
        let cfg = SchedulerConfig::new(Policy::Dynamic, 4, 1.0).simulated();
        let r = simulate_with(&g, &cfg, |_| 1.0).unwrap();
        assert_eq!(r.stats.makespan, 16.0);
    }

    #[test]
    fn noisy_worker_starts_late() {
        let g = crate::dag::TaskGraph::independent(4, 4, 4);
        let mut cfg = SchedulerConfig::new(Policy::Static, 4, 0.0).simulated();
        cfg.grid = Some(ThreadGrid::new(4, 1).unwrap());
        cfg.noise = Some(NoiseProfile::single(4, 2, 2.5));
        let r = simulate_with(&g, &cfg, |_| 1.0).unwrap();
        assert_eq!(r.stats.makespan, 6.5);
        assert!(r.timeline.worker_events(2).all(|e| e.t_start >= 2.5));
    }

    #[test]
    fn deterministic_with_jitter() {
        let g = TaskGraph::build(&Partition::new(10, 10, 2).unwrap(), 3).unwrap();
        let mut cfg = SchedulerConfig::new(Policy::Hybrid, 3, 0.4).simulated();
        cfg.jitter = 0.3;
        cfg.seed = 11;
        let a = simulate(&g, &cfg).unwrap();
        let b = simulate(&g, &cfg).unwrap();
        assert_eq!(a.timeline, b.timeline);
        cfg.seed = 12;
        let c = simulate(&g, &cfg).unwrap();
        assert_ne!(a.timeline, c.timeline);
    }
}
