//! Cooperative interruption.
//!
//! Engines poll a [`Control`] once per search node. The core crate has no
//! clock, so deadlines and cancellation flags are supplied by the caller.

use core::sync::atomic::{AtomicBool, Ordering};
use core::time::Duration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interrupt {
    Timeout,
    Cancelled,
}

pub trait Control: Sync {
    /// `Some` once the engine must stop and return its incumbent.
    fn interrupted(&self) -> Option<Interrupt>;

    /// Time since the run started, if the implementation has a clock.
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }

    /// Size of a mapping known elsewhere (another engine of a portfolio).
    /// Engines that prune against their incumbent also prune against this.
    fn external_best(&self) -> usize {
        0
    }

    /// Called whenever the engine improves its incumbent.
    fn offer(&self, _pairs: &[(usize, usize)]) {}
}

/// Never interrupts.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unlimited;

impl Control for Unlimited {
    fn interrupted(&self) -> Option<Interrupt> {
        None
    }
}

/// A cancellation flag usable without a clock.
#[derive(Debug, Default)]
pub struct CancelFlag(AtomicBool);

impl CancelFlag {
    pub fn new() -> CancelFlag {
        CancelFlag(AtomicBool::new(false))
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Release);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Acquire)
    }
}

impl Control for CancelFlag {
    fn interrupted(&self) -> Option<Interrupt> {
        self.is_cancelled().then_some(Interrupt::Cancelled)
    }
}

/// Stops after a fixed number of polls. Handy for deterministic "timeouts".
#[derive(Debug)]
pub struct NodeLimit {
    remaining: core::sync::atomic::AtomicUsize,
}

impl NodeLimit {
    /// Limits beyond `usize::MAX` saturate.
    pub fn new(polls: u64) -> NodeLimit {
        let polls = usize::try_from(polls).unwrap_or(usize::MAX);
        NodeLimit { remaining: core::sync::atomic::AtomicUsize::new(polls) }
    }
}

impl Control for NodeLimit {
    fn interrupted(&self) -> Option<Interrupt> {
        let left = self.remaining.fetch_update(Ordering::AcqRel, Ordering::Acquire, |r| r.checked_sub(1));
        match left {
            Ok(_) => None,
            Err(_) => Some(Interrupt::Timeout),
        }
    }
}
