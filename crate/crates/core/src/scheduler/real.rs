//! Wall-clock execution on OS threads.

use std::sync::{Condvar, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use crate::dag::{ReadyTracker, TaskGraph, TaskId};
use crate::error::{CaluError, Result};
use crate::layout::LayoutMatrix;
use crate::trace::{TimeUnit, Timeline, TraceEvent};

use super::{Factors, Numeric, QueueState, RunReport, RunStats, SchedulerConfig};

const SPIN_ROUNDS: usize = 64;

struct Shared<'g> {
    queue: QueueState<'g>,
    failure: Option<CaluError>,
    static_dispatches: usize,
    dynamic_dispatches: usize,
}

struct Pool<'g> {
    graph: &'g TaskGraph,
    tracker: ReadyTracker,
    state: Mutex<Shared<'g>>,
    wake: Condvar,
}

impl<'g> Pool<'g> {
    fn lock(&self) -> MutexGuard<'_, Shared<'g>> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn finished(&self, s: &Shared<'g>) -> bool {
        s.failure.is_some() || self.tracker.all_done()
    }

    /// Blocks until work is available or the run is over.
    fn fetch(&self, worker: usize) -> Option<Vec<TaskId>> {
        for _ in 0..SPIN_ROUNDS {
            let mut s = self.lock();
            if self.finished(&s) {
                return None;
            }
            if let Some(d) = s.queue.next(worker) {
                return Some(Self::count(&mut s, d));
            }
            drop(s);
            std::thread::yield_now();
        }
        let mut s = self.lock();
        loop {
            if self.finished(&s) {
                return None;
            }
            if let Some(d) = s.queue.next(worker) {
                return Some(Self::count(&mut s, d));
            }
            s = self.wake.wait(s).unwrap_or_else(|e| e.into_inner());
        }
    }

    fn count(s: &mut Shared<'g>, d: super::Dispatch) -> Vec<TaskId> {
        if d.from_static {
            s.static_dispatches += d.tasks.len();
        } else {
            s.dynamic_dispatches += d.tasks.len();
        }
        d.tasks
    }

    fn complete(&self, worker: usize, id: TaskId) {
        let mut s = self.lock();
        match self.tracker.mark_done(self.graph, id) {
            Ok(ready) => {
                s.queue.complete(worker, id);
                for r in ready {
                    s.queue.push_ready(r);
                }
            }
            Err(e) => s.failure = Some(CaluError::Config(e.to_string())),
        }
        drop(s);
        self.wake.notify_all();
    }

    fn fail(&self, err: CaluError) {
        let mut s = self.lock();
        s.failure.get_or_insert(err);
        drop(s);
        self.wake.notify_all();
    }
}

pub(super) fn run(
    mat: &LayoutMatrix,
    graph: &TaskGraph,
    cfg: &SchedulerConfig,
) -> Result<RunReport> {
    let numeric = Numeric::new(mat, cfg.leaves(), cfg.cutoff);
    let mut queue = QueueState::new(graph, cfg.policy, cfg.grid(), cfg.group, cfg.lookahead);
    for id in ReadyTracker::initial_ready(graph) {
        queue.push_ready(id);
    }
    let pool = Pool {
        graph,
        tracker: ReadyTracker::new(graph),
        state: Mutex::new(Shared {
            queue,
            failure: None,
            static_dispatches: 0,
            dynamic_dispatches: 0,
        }),
        wake: Condvar::new(),
    };
    let origin = Instant::now();
    let buffers: Vec<Vec<TraceEvent>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..cfg.workers)
            .map(|w| {
                let pool = &pool;
                let numeric = &numeric;
                scope.spawn(move || worker_loop(w, pool, numeric, cfg, origin))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_default())
            .collect()
    });
    let shared = pool.state.into_inner().unwrap_or_else(|e| e.into_inner());
    if let Some(err) = shared.failure {
        return Err(err);
    }
    if !pool.tracker.all_done() {
        return Err(CaluError::Config(format!(
            "run stopped after {} of {} tasks",
            pool.tracker.completed(),
            graph.len()
        )));
    }
    let (pivots, perm) = numeric.finish()?;
    let timeline = Timeline::from_buffers(TimeUnit::Nanoseconds, buffers);
    let stats = RunStats::from_timeline(
        &timeline,
        vec![0.0; cfg.workers],
        shared.static_dispatches,
        shared.dynamic_dispatches,
    );
    Ok(RunReport {
        factors: Some(Factors {
            lu: mat.to_dense(),
            perm,
            pivots,
        }),
        timeline,
        stats,
    })
}

fn worker_loop(
    w: usize,
    pool: &Pool<'_>,
    numeric: &Numeric<'_>,
    cfg: &SchedulerConfig,
    origin: Instant,
) -> Vec<TraceEvent> {
    let mut events = Vec::new();
    let mut last_step = None;
    while let Some(tasks) = pool.fetch(w) {
        for id in tasks {
            let task = *pool.graph.task(id);
            if let Some(p) = cfg.perturbation.filter(|p| p.worker == w) {
                if last_step != Some(task.step) {
                    std::thread::sleep(Duration::from_millis(p.sleep_ms));
                }
            }
            last_step = Some(task.step);
            let t_start = origin.elapsed().as_nanos() as f64;
            let outcome = numeric.execute(&task);
            let t_end = origin.elapsed().as_nanos() as f64;
            if let Err(e) = outcome {
                pool.fail(e);
                return events;
            }
            events.push(TraceEvent {
                worker: w,
                task,
                t_start,
                t_end,
            });
            pool.complete(w, id);
        }
    }
    events
}
