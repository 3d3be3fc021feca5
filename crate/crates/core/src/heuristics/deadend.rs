//! Dead-end forecasting: the search keeps recursing without improving the
//! incumbent.

pub const DEFAULT_ABSOLUTE_THRESHOLD: u64 = 1_000_000;
pub const DEFAULT_MULTIPLIER: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DeadEndPolicy {
    /// Suspect once more than this many recursions pass without improvement.
    Absolute(u64),
    /// Suspect once the recursions since the last improvement reach
    /// `multiplier` times the recursion count at that improvement.
    Relative(f64),
}

impl Default for DeadEndPolicy {
    fn default() -> DeadEndPolicy {
        DeadEndPolicy::Absolute(DEFAULT_ABSOLUTE_THRESHOLD)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Continue,
    Suspect,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeadEndMonitor {
    total: u64,
    at_last_improvement: u64,
    policy: DeadEndPolicy,
}

impl DeadEndMonitor {
    pub fn new(policy: DeadEndPolicy) -> DeadEndMonitor {
        DeadEndMonitor { total: 0, at_last_improvement: 0, policy }
    }

    /// Monitor with preset counters.
    pub fn with_counts(policy: DeadEndPolicy, total: u64, at_last_improvement: u64) -> DeadEndMonitor {
        DeadEndMonitor { total, at_last_improvement: at_last_improvement.min(total), policy }
    }

    pub fn policy(&self) -> DeadEndPolicy {
        self.policy
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn at_last_improvement(&self) -> u64 {
        self.at_last_improvement
    }

    #[inline]
    pub fn record_recursion(&mut self) {
        self.total += 1;
    }

    #[inline]
    pub fn record_improvement(&mut self) {
        self.at_last_improvement = self.total;
    }

    /// Moves the reference point to now without counting an improvement.
    /// Restarts call this so the next trigger needs a fresh doubling.
    pub fn rearm(&mut self) {
        self.at_last_improvement = self.total;
    }

    pub fn check(&self) -> Verdict {
        let since = self.total - self.at_last_improvement;
        let suspect = match self.policy {
            DeadEndPolicy::Absolute(threshold) => since > threshold,
            DeadEndPolicy::Relative(multiplier) => since as f64 >= multiplier * self.at_last_improvement.max(1) as f64,
        };
        if suspect {
            Verdict::Suspect
        } else {
            Verdict::Continue
        }
    }

    #[inline]
    pub fn suspect(&self) -> bool {
        self.check() == Verdict::Suspect
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continue_right_after_improvement() {
        for policy in [DeadEndPolicy::Absolute(0), DeadEndPolicy::Relative(2.0)] {
            let mut m = DeadEndMonitor::new(policy);
            for _ in 0..10 {
                m.record_recursion();
            }
            m.record_improvement();
            assert_eq!(m.check(), Verdict::Continue);
        }
    }

    #[test]
    fn absolute_threshold() {
        let m = DeadEndMonitor::with_counts(DeadEndPolicy::Absolute(1000), 1000, 0);
        assert_eq!(m.check(), Verdict::Continue);
        let m = DeadEndMonitor::with_counts(DeadEndPolicy::Absolute(1000), 1001, 0);
        assert_eq!(m.check(), Verdict::Suspect);
    }

    #[test]
    fn relative_threshold() {
        let m = DeadEndMonitor::with_counts(DeadEndPolicy::Relative(2.0), 1500, 500);
        assert_eq!(m.check(), Verdict::Suspect);
        let m = DeadEndMonitor::with_counts(DeadEndPolicy::Relative(2.0), 1499, 500);
        assert_eq!(m.check(), Verdict::Continue);
    }

    #[test]
    fn rearm_resets_reference() {
        let mut m = DeadEndMonitor::with_counts(DeadEndPolicy::Relative(2.0), 30, 10);
        assert!(m.suspect());
        m.rearm();
        assert!(!m.suspect());
        assert_eq!(m.at_last_improvement(), 30);
    }
}
