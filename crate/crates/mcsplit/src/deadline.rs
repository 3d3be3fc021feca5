//! Wall-clock [`Control`] with an optional cancellation flag and an optional
//! size broadcast shared between engines.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use mcsplit_core::{Control, Interrupt};

#[derive(Clone, Debug)]
pub struct Deadline {
    start: Instant,
    budget: Option<Duration>,
    cancel: Arc<AtomicBool>,
    shared_best: Option<Arc<AtomicUsize>>,
}

impl Deadline {
    /// Starts the clock now; `None` never times out.
    pub fn new(budget: Option<Duration>) -> Deadline {
        Deadline { start: Instant::now(), budget, cancel: Arc::default(), shared_best: None }
    }

    pub fn unlimited() -> Deadline {
        Deadline::new(None)
    }

    pub fn with_cancel(mut self, cancel: Arc<AtomicBool>) -> Deadline {
        self.cancel = cancel;
        self
    }

    pub fn with_shared_best(mut self, best: Arc<AtomicUsize>) -> Deadline {
        self.shared_best = Some(best);
        self
    }

    pub fn cancel_handle(&self) -> Arc<AtomicBool> {
        Arc::clone(&self.cancel)
    }

    pub fn cancel(&self) {
        self.cancel.store(true, Ordering::Release);
    }

    pub fn remaining(&self) -> Option<Duration> {
        self.budget.map(|b| b.saturating_sub(self.start.elapsed()))
    }
}

impl Control for Deadline {
    fn interrupted(&self) -> Option<Interrupt> {
        if self.cancel.load(Ordering::Acquire) {
            return Some(Interrupt::Cancelled);
        }
        match self.budget {
            Some(b) if self.start.elapsed() >= b => Some(Interrupt::Timeout),
            _ => None,
        }
    }

    fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    fn external_best(&self) -> usize {
        self.shared_best.as_ref().map_or(0, |b| b.load(Ordering::Relaxed))
    }

    fn offer(&self, pairs: &[(usize, usize)]) {
        if let Some(b) = &self.shared_best {
            b.fetch_max(pairs.len(), Ordering::Relaxed);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_budget_times_out() {
        assert_eq!(Deadline::new(Some(Duration::ZERO)).interrupted(), Some(Interrupt::Timeout));
        assert_eq!(Deadline::unlimited().interrupted(), None);
    }

    #[test]
    fn cancel_wins_over_timeout() {
        let d = Deadline::new(Some(Duration::ZERO));
        d.cancel();
        assert_eq!(d.interrupted(), Some(Interrupt::Cancelled));
    }

    #[test]
    fn shared_best_is_monotone() {
        let best = Arc::new(AtomicUsize::new(0));
        let d = Deadline::unlimited().with_shared_best(Arc::clone(&best));
        d.offer(&[(0, 0), (1, 1)]);
        d.offer(&[(0, 0)]);
        assert_eq!(d.external_best(), 2);
    }
}
