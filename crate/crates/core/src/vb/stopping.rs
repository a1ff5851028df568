use std::collections::VecDeque;

use super::TraceRecord;
use crate::Scalar;

/// Incremental form of [`stopping_rule`].
///
/// The smoothed lower bound is the mean of the last `window` values (of all
/// values so far while fewer than `window` exist). Only full windows count
/// towards the running maximum and the patience counter.
#[derive(Debug, Clone)]
pub struct StoppingState<T> {
    window: usize,
    patience: usize,
    recent: VecDeque<T>,
    best: Option<T>,
    stall: usize,
}

impl<T: Scalar> StoppingState<T> {
    pub fn new(window: usize, patience: usize) -> Self {
        Self {
            window: window.max(1),
            patience,
            recent: VecDeque::with_capacity(window.max(1)),
            best: None,
            stall: 0,
        }
    }

    /// Adds one lower-bound value; returns the smoothed value and whether
    /// the rule has fired.
    pub fn push(&mut self, lower_bound: T) -> (T, bool) {
        if self.recent.len() == self.window {
            self.recent.pop_front();
        }
        self.recent.push_back(lower_bound);
        let smoothed = self.recent.iter().fold(T::zero(), |s, &v| s + v) / T::from_count(self.recent.len());
        if self.recent.len() < self.window {
            return (smoothed, false);
        }
        match self.best {
            Some(b) if !(smoothed > b) => self.stall += 1,
            _ => {
                self.best = Some(smoothed);
                self.stall = 0;
            }
        }
        (smoothed, self.stall >= self.patience)
    }
}

/// True iff the windowed moving average of the lower bound has not improved
/// on its running maximum for `patience` consecutive iterations.
pub fn stopping_rule<T: Scalar>(trace: &[TraceRecord<T>], window: usize, patience: usize) -> bool {
    let mut state = StoppingState::new(window, patience);
    let mut fired = false;
    for r in trace {
        fired = state.push(r.lower_bound).1;
    }
    fired
}

/// Trailing moving average with the same warm-up convention as [`StoppingState`].
pub fn moving_average<T: Scalar>(values: &[T], window: usize) -> Vec<T> {
    let mut state = StoppingState::new(window, usize::MAX);
    values.iter().map(|&v| state.push(v).0).collect()
}
