//! Multi-threaded McSplit.
//!
//! Nodes shallower than `part_level` are not expanded locally. Their loop
//! (every right candidate, then the branch leaving the left vertex unmatched)
//! is packaged as a [`Task`] holding a private copy of the class arrays and
//! the mapping, and published on a [`TaskQueue`] ordered by position key. The
//! publisher then works through its own task; idle workers pick up the
//! earliest task that still has unclaimed iterations and help. Iteration
//! indices are handed out by an atomic cursor so each runs exactly once. Only
//! the publisher removes a task from the queue. Incumbent size is shared
//! through an atomic, so bound checks may read a stale (smaller) value.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, AtomicU8, AtomicUsize, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use mcsplit_core::{
    check_inputs, filter_classes, pick_max_degree, select_class_in, Bidomain, Control, Domains, Graph, Interrupt,
    Mapping, SearchStats, SolveError, SolveResult, Status,
};
use serde::{Deserialize, Serialize};

/// Task-publishing depth used when none is given.
pub const DEFAULT_PART_LEVEL: usize = 5;

const WORKER_STACK: usize = 64 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParallelConfig {
    pub workers: usize,
    pub part_level: usize,
    /// Disable to explore the whole tree, e.g. to compare visit sets.
    pub pruning: bool,
    /// Keep per-task claim counters for [`ParallelReport::audit`].
    pub audit: bool,
    /// Record every visited mapping in [`ParallelReport::trace`].
    pub trace: bool,
}

impl Default for ParallelConfig {
    fn default() -> ParallelConfig {
        ParallelConfig {
            workers: default_workers(),
            part_level: DEFAULT_PART_LEVEL,
            pruning: true,
            audit: false,
            trace: false,
        }
    }
}

impl ParallelConfig {
    pub fn with_workers(workers: usize) -> ParallelConfig {
        ParallelConfig { workers, ..ParallelConfig::default() }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

/// Path from the root as `(depth, iteration)` pairs; ordered lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskKey(pub Vec<(u32, u32)>);

impl TaskKey {
    pub fn root() -> TaskKey {
        TaskKey(Vec::new())
    }

    pub fn child(&self, depth: usize, iteration: usize) -> TaskKey {
        let mut path = self.0.clone();
        path.push((depth as u32, iteration as u32));
        TaskKey(path)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskState {
    Pending,
    Taken,
    Done,
}

/// Frozen search node: classes with the branching vertex already removed.
#[derive(Clone, Debug, Default)]
pub struct TaskPayload {
    pub domains: Domains,
    pub mapping: Mapping,
    pub v: usize,
    pub class: usize,
    /// Right candidates in ascending order.
    pub candidates: Vec<usize>,
}

#[derive(Debug)]
pub struct Task {
    key: TaskKey,
    depth: usize,
    iterations: usize,
    cursor: AtomicUsize,
    state: AtomicU8,
    claims: Vec<AtomicU32>,
    payload: TaskPayload,
}

impl Task {
    /// A task over `candidates.len() + 1` iterations, the last one being the
    /// unmatched branch.
    pub fn new(key: TaskKey, depth: usize, payload: TaskPayload) -> Task {
        let iterations = payload.candidates.len() + 1;
        Task {
            key,
            depth,
            iterations,
            cursor: AtomicUsize::new(0),
            state: AtomicU8::new(0),
            claims: (0..iterations).map(|_| AtomicU32::new(0)).collect(),
            payload,
        }
    }

    /// Task with `iterations` loop iterations and no search data, for
    /// exercising the queue on its own.
    pub fn bare(key: TaskKey, iterations: usize) -> Task {
        let payload = TaskPayload { candidates: (0..iterations.saturating_sub(1)).collect(), ..TaskPayload::default() };
        Task::new(key, 0, payload)
    }

    pub fn key(&self) -> &TaskKey {
        &self.key
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn state(&self) -> TaskState {
        match self.state.load(Ordering::Acquire) {
            0 => TaskState::Pending,
            1 => TaskState::Taken,
            _ => TaskState::Done,
        }
    }

    pub fn mark_done(&self) {
        self.state.store(2, Ordering::Release);
    }

    fn claimable(&self) -> bool {
        self.state() != TaskState::Done && self.cursor.load(Ordering::Acquire) < self.iterations
    }

    /// Next unclaimed iteration index, or `None` once all are handed out.
    pub fn claim_iteration(&self) -> Option<usize> {
        if self.state() == TaskState::Done {
            return None;
        }
        let i = self.cursor.fetch_add(1, Ordering::AcqRel);
        if i < self.iterations {
            let _ = self.state.compare_exchange(0, 1, Ordering::AcqRel, Ordering::Acquire);
            self.claims[i].fetch_add(1, Ordering::Relaxed);
            Some(i)
        } else {
            self.mark_done();
            None
        }
    }

    pub fn claim_counts(&self) -> Vec<u32> {
        self.claims.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }
}

#[derive(Debug, Default)]
struct QueueState {
    tasks: BTreeMap<TaskKey, Arc<Task>>,
    active: usize,
    shutdown: bool,
}

/// Shared queue of published tasks plus the termination bookkeeping: the
/// number of workers holding work. When it drops to zero with nothing left to
/// claim, the queue shuts down and every blocked worker is released.
#[derive(Debug, Default)]
pub struct TaskQueue {
    state: Mutex<QueueState>,
    ready: Condvar,
}

impl TaskQueue {
    /// Queue whose first `active` workers start out busy.
    pub fn new(active: usize) -> TaskQueue {
        TaskQueue { state: Mutex::new(QueueState { active, ..QueueState::default() }), ready: Condvar::new() }
    }

    pub fn publish(&self, task: Arc<Task>) {
        let mut s = self.state.lock().unwrap();
        s.tasks.insert(task.key.clone(), task);
        self.ready.notify_all();
    }

    /// Blocks until a task with unclaimed iterations exists and returns the
    /// earliest one, marking the caller busy. `None` after shutdown.
    pub fn acquire(&self) -> Option<Arc<Task>> {
        let mut s = self.state.lock().unwrap();
        loop {
            if s.shutdown {
                return None;
            }
            if let Some(t) = s.tasks.values().find(|t| t.claimable()) {
                let t = Arc::clone(t);
                s.active += 1;
                return Some(t);
            }
            if s.active == 0 {
                s.shutdown = true;
                self.ready.notify_all();
                return None;
            }
            s = self.ready.wait(s).unwrap();
        }
    }

    /// The caller has no work left.
    pub fn release(&self) {
        let mut s = self.state.lock().unwrap();
        s.active -= 1;
        if s.active == 0 && !s.tasks.values().any(|t| t.claimable()) {
            s.shutdown = true;
            self.ready.notify_all();
        }
    }

    /// Removes a task; called by its publisher only.
    pub fn retire(&self, task: &Task) {
        task.mark_done();
        self.state.lock().unwrap().tasks.remove(&task.key);
    }

    pub fn shutdown(&self) {
        self.state.lock().unwrap().shutdown = true;
        self.ready.notify_all();
    }

    pub fn len(&self) -> usize {
        self.state.lock().unwrap().tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Best mapping across workers. The size is readable without locking and
/// only ever grows; the mapping is replaced under the lock together with it.
#[derive(Debug, Default)]
pub struct SharedIncumbent {
    size: AtomicUsize,
    inner: Mutex<(Mapping, Vec<usize>)>,
}

impl SharedIncumbent {
    pub fn size(&self) -> usize {
        self.size.load(Ordering::Acquire)
    }

    /// Installs `m` if it is larger than the stored mapping.
    pub fn offer(&self, m: &Mapping) -> bool {
        if m.len() <= self.size() {
            return false;
        }
        let mut inner = self.inner.lock().unwrap();
        if m.len() <= inner.0.len() {
            return false;
        }
        inner.0 = m.clone();
        inner.1.push(m.len());
        self.size.store(m.len(), Ordering::Release);
        true
    }

    pub fn mapping(&self) -> Mapping {
        self.inner.lock().unwrap().0.clone()
    }

    /// Sizes in the order they were installed.
    pub fn log(&self) -> Vec<usize> {
        self.inner.lock().unwrap().1.clone()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerStats {
    pub recursions: u64,
    /// Time spent blocked waiting for work.
    pub idle: Duration,
    pub published: u64,
    /// Task iterations executed, own tasks included.
    pub iterations: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskAudit {
    pub key: TaskKey,
    /// How many times each loop iteration was claimed.
    pub claims: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct ParallelReport {
    pub result: SolveResult,
    pub workers: Vec<WorkerStats>,
    pub audit: Vec<TaskAudit>,
    /// Visited mappings (canonical order), when tracing.
    pub trace: Vec<Vec<(usize, usize)>>,
    pub incumbent_log: Vec<usize>,
}

type Trace = Vec<Vec<(usize, usize)>>;

struct Shared<'a, C: Control + ?Sized> {
    g: &'a Graph,
    h: &'a Graph,
    degree: Vec<usize>,
    config: ParallelConfig,
    control: &'a C,
    queue: TaskQueue,
    incumbent: SharedIncumbent,
    published: Mutex<Vec<Arc<Task>>>,
    interrupt: Mutex<Option<Interrupt>>,
}

struct Worker<'s, 'a, C: Control + ?Sized> {
    shared: &'s Shared<'a, C>,
    left: Vec<u32>,
    right: Vec<u32>,
    stats: WorkerStats,
    trace: Trace,
}

impl<C: Control + ?Sized> Worker<'_, '_, C> {
    /// Arrival at a node; `Ok(false)` when the node is pruned.
    fn enter(&mut self, classes: &[Bidomain], mapping: &Mapping) -> Result<bool, Interrupt> {
        let sh = self.shared;
        self.stats.recursions += 1;
        if let Some(i) = sh.control.interrupted() {
            return Err(i);
        }
        if sh.config.trace {
            self.trace.push(mapping.canonical());
        }
        if sh.incumbent.offer(mapping) {
            sh.control.offer(mapping.pairs());
        }
        if !sh.config.pruning {
            return Ok(true);
        }
        let bound = mapping.len() + classes.iter().map(Bidomain::min_side).sum::<usize>();
        Ok(bound > sh.incumbent.size().max(sh.control.external_best()))
    }

    fn expand(
        &mut self,
        mut classes: Vec<Bidomain>,
        mapping: &mut Mapping,
        depth: usize,
        key: &TaskKey,
    ) -> Result<(), Interrupt> {
        let sh = self.shared;
        loop {
            if !self.enter(&classes, mapping)? {
                return Ok(());
            }
            let Some(ci) = select_class_in(&self.left, &classes) else {
                return Ok(());
            };
            let c = classes[ci];
            let pos = pick_max_degree(self.left[c.l..c.l + c.left_len].iter().map(|&x| x as usize), &sh.degree)
                .expect("live class");
            let v_slot = c.l + c.left_len - 1;
            self.left.swap(c.l + pos, v_slot);
            let v = self.left[v_slot] as usize;
            classes[ci].left_len -= 1;
            let mut candidates: Vec<usize> = self.right[c.r..c.r + c.right_len].iter().map(|&x| x as usize).collect();
            candidates.sort_unstable();

            if depth < sh.config.part_level {
                let payload = TaskPayload {
                    domains: Domains { left: self.left.clone(), right: self.right.clone(), classes },
                    mapping: mapping.clone(),
                    v,
                    class: ci,
                    candidates,
                };
                let task = Arc::new(Task::new(key.clone(), depth, payload));
                if sh.config.audit {
                    sh.published.lock().unwrap().push(Arc::clone(&task));
                }
                sh.queue.publish(Arc::clone(&task));
                self.stats.published += 1;
                let out = self.work_on(&task);
                sh.queue.retire(&task);
                return out;
            }

            classes[ci].right_len -= 1;
            let (r, rlen) = (c.r, classes[ci].right_len);
            for &w in &candidates {
                let idx = (r..=r + rlen).find(|&i| self.right[i] as usize == w).expect("candidate in range");
                self.right.swap(idx, r + rlen);
                let child = filter_classes(&mut self.left, &mut self.right, &classes, v, w, sh.g, sh.h);
                mapping.push(v, w);
                self.expand(child, mapping, depth + 1, key)?;
                mapping.pop();
            }
            classes[ci].right_len += 1;
            if classes[ci].left_len == 0 {
                classes.swap_remove(ci);
            }
        }
    }

    fn work_on(&mut self, task: &Task) -> Result<(), Interrupt> {
        while let Some(i) = task.claim_iteration() {
            self.stats.iterations += 1;
            self.run_iteration(task, i)?;
        }
        Ok(())
    }

    fn run_iteration(&mut self, task: &Task, i: usize) -> Result<(), Interrupt> {
        let p = &task.payload;
        self.left.clone_from(&p.domains.left);
        self.right.clone_from(&p.domains.right);
        let mut classes = p.domains.classes.clone();
        let mut mapping = p.mapping.clone();
        let key = task.key.child(task.depth, i);
        let ci = p.class;
        if let Some(&w) = p.candidates.get(i) {
            let c = &mut classes[ci];
            let idx = (c.r..c.r + c.right_len).find(|&k| self.right[k] as usize == w).expect("candidate in range");
            self.right.swap(idx, c.r + c.right_len - 1);
            c.right_len -= 1;
            let child = filter_classes(&mut self.left, &mut self.right, &classes, p.v, w, self.shared.g, self.shared.h);
            mapping.push(p.v, w);
            self.expand(child, &mut mapping, task.depth + 1, &key)
        } else {
            if classes[ci].left_len == 0 {
                classes.swap_remove(ci);
            }
            self.expand(classes, &mut mapping, task.depth + 1, &key)
        }
    }

    fn abort(&self, i: Interrupt) {
        self.shared.interrupt.lock().unwrap().get_or_insert(i);
        self.shared.queue.shutdown();
    }

    fn help(&mut self) {
        loop {
            let waited = Instant::now();
            let task = self.shared.queue.acquire();
            self.stats.idle += waited.elapsed();
            let Some(task) = task else { return };
            if let Err(i) = self.work_on(&task) {
                self.abort(i);
            }
            self.shared.queue.release();
        }
    }
}

/// Maximum common induced subgraph using `config.workers` threads.
pub fn solve_parallel<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    config: ParallelConfig,
    control: &C,
) -> Result<SolveResult, SolveError> {
    solve_parallel_report(g, h, config, control).map(|r| r.result)
}

/// [`solve_parallel`] with per-worker statistics, the claim audit and the trace.
pub fn solve_parallel_report<C: Control + ?Sized>(
    g: &Graph,
    h: &Graph,
    config: ParallelConfig,
    control: &C,
) -> Result<ParallelReport, SolveError> {
    check_inputs(g, h)?;
    let workers = config.workers.max(1);
    let shared = Shared {
        g,
        h,
        degree: g.degrees(),
        config,
        control,
        queue: TaskQueue::new(1),
        incumbent: SharedIncumbent::default(),
        published: Mutex::new(Vec::new()),
        interrupt: Mutex::new(None),
    };
    let outputs: Vec<(WorkerStats, Trace)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|id| {
                let shared = &shared;
                std::thread::Builder::new()
                    .name(format!("mcsplit-worker-{id}"))
                    .stack_size(WORKER_STACK)
                    .spawn_scoped(scope, move || {
                        let mut w = Worker {
                            shared,
                            left: Vec::new(),
                            right: Vec::new(),
                            stats: WorkerStats::default(),
                            trace: Vec::new(),
                        };
                        if id == 0 {
                            let d = Domains::initial(shared.g, shared.h);
                            w.left = d.left;
                            w.right = d.right;
                            if let Err(i) = w.expand(d.classes, &mut Mapping::new(), 0, &TaskKey::root()) {
                                w.abort(i);
                            }
                            shared.queue.release();
                        }
                        w.help();
                        (w.stats, w.trace)
                    })
                    .expect("spawn worker")
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut stats = SearchStats::default();
    let mut worker_stats = Vec::with_capacity(workers);
    let mut trace = Vec::new();
    for (ws, t) in outputs {
        stats.recursions += ws.recursions;
        worker_stats.push(ws);
        trace.extend(t);
    }
    let incumbent_log = shared.incumbent.log();
    stats.improvements = incumbent_log.len() as u64;
    let status = shared.interrupt.lock().unwrap().map_or(Status::Optimal, Status::from);
    let audit = shared
        .published
        .lock()
        .unwrap()
        .iter()
        .map(|t| TaskAudit { key: t.key.clone(), claims: t.claim_counts() })
        .collect();
    Ok(ParallelReport {
        result: SolveResult {
            mapping: shared.incumbent.mapping(),
            status,
            stats,
            elapsed: control.elapsed(),
            seed: None,
        },
        workers: worker_stats,
        audit,
        trace,
        incumbent_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcsplit_core::{solve, Unlimited};
    use std::collections::BTreeSet;

    #[test]
    fn claims_in_order_then_exhausted() {
        let t = Task::bare(TaskKey::root(), 5);
        assert_eq!((0..5).map(|_| t.claim_iteration().unwrap()).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        assert_eq!(t.claim_iteration(), None);
        assert_eq!(t.claim_iteration(), None);
        assert_eq!(t.state(), TaskState::Done);
    }

    #[test]
    fn two_claimants_partition_indices() {
        let t = Task::bare(TaskKey::root(), 5);
        let got: Vec<Vec<usize>> = std::thread::scope(|s| {
            let hs: Vec<_> =
                (0..2).map(|_| s.spawn(|| std::iter::from_fn(|| t.claim_iteration()).collect::<Vec<_>>())).collect();
            hs.into_iter().map(|h| h.join().unwrap()).collect()
        });
        let mut all: Vec<usize> = got.concat();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert!(t.claim_counts().iter().all(|&c| c == 1));
    }

    #[test]
    fn earliest_key_served_first() {
        let q = TaskQueue::new(1);
        q.publish(Arc::new(Task::bare(TaskKey(vec![(1, 0)]), 2)));
        q.publish(Arc::new(Task::bare(TaskKey(vec![(0, 2)]), 2)));
        assert_eq!(q.acquire().unwrap().key(), &TaskKey(vec![(0, 2)]));
    }

    #[test]
    fn done_tasks_are_skipped() {
        let q = TaskQueue::new(1);
        let done = Arc::new(Task::bare(TaskKey(vec![(0, 0)]), 3));
        done.mark_done();
        q.publish(done);
        q.publish(Arc::new(Task::bare(TaskKey(vec![(0, 1)]), 3)));
        assert_eq!(q.acquire().unwrap().key(), &TaskKey(vec![(0, 1)]));
    }

    #[test]
    fn blocked_worker_resumes_on_publish() {
        let q = TaskQueue::new(1);
        std::thread::scope(|s| {
            let waiter = s.spawn(|| q.acquire().map(|t| t.key().clone()));
            std::thread::sleep(Duration::from_millis(20));
            q.publish(Arc::new(Task::bare(TaskKey(vec![(0, 7)]), 1)));
            assert_eq!(waiter.join().unwrap(), Some(TaskKey(vec![(0, 7)])));
        });
    }

    #[test]
    fn last_release_shuts_down() {
        let q = TaskQueue::new(1);
        std::thread::scope(|s| {
            let waiter = s.spawn(|| q.acquire().is_none());
            std::thread::sleep(Duration::from_millis(20));
            q.release();
            assert!(waiter.join().unwrap());
        });
    }

    #[test]
    fn incumbent_is_monotone() {
        let inc = SharedIncumbent::default();
        assert!(inc.offer(&Mapping::from_pairs(vec![(0, 0), (1, 1)])));
        assert!(!inc.offer(&Mapping::from_pairs(vec![(2, 2)])));
        assert_eq!(inc.size(), 2);
        assert_eq!(inc.mapping().len(), 2);
        assert_eq!(inc.log(), vec![2]);
    }

    #[test]
    fn single_worker_matches_sequential() {
        for seed in 0..10 {
            let g = Graph::random(8, 0.4, seed);
            let h = Graph::random(9, 0.5, seed + 100);
            let seq = solve(&g, &h, &Unlimited).unwrap();
            for part_level in [0, 2, DEFAULT_PART_LEVEL] {
                let cfg = ParallelConfig { workers: 1, part_level, ..ParallelConfig::default() };
                let par = solve_parallel(&g, &h, cfg, &Unlimited).unwrap();
                assert_eq!(par.size(), seq.size());
                assert_eq!(par.stats.recursions, seq.stats.recursions);
            }
        }
    }

    #[test]
    fn unpruned_audit_covers_every_iteration() {
        let g = Graph::random(5, 0.5, 1);
        let cfg = ParallelConfig { workers: 3, part_level: 3, pruning: false, audit: true, trace: true };
        let r = solve_parallel_report(&g, &g, cfg, &Unlimited).unwrap();
        assert!(!r.audit.is_empty());
        assert!(r.audit.iter().all(|a| a.claims.iter().all(|&c| c == 1)));
        let keys: BTreeSet<_> = r.audit.iter().map(|a| a.key.clone()).collect();
        assert_eq!(keys.len(), r.audit.len());
        assert_eq!(r.result.size(), 5);
    }
}
