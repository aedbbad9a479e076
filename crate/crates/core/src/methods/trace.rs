use std::fmt;

use crate::linalg::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// A stopping tolerance was met.
    Converged,
    /// The iteration budget ran out.
    Budget,
    /// Gap or gradient vanished to machine precision.
    Optimal,
    /// A non-finite value appeared; the last row holds it.
    NonFinite,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::Budget => "budget",
            Termination::Optimal => "optimal",
            Termination::NonFinite => "non_finite",
        })
    }
}

/// One row per iterate. For accelerated methods the row describes `yₖ`;
/// `step_or_mu` holds `γₖ` or `μ̃ₖ` and is `None` on the last row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub f_gap: f64,
    pub grad_sq: f64,
    pub step_or_mu: Option<f64>,
    pub mu_tilde_raw: Option<f64>,
    pub beta: Option<f64>,
    pub potential: Option<f64>,
    pub best_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    pub x: Vector,
    pub y: Option<Vector>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub termination: Termination,
    /// Number of momentum estimates that were clamped into `[floor, L]`.
    pub clamp_events: usize,
    /// Filled only when iterates were requested.
    pub iterates: Vec<Iterate>,
}

impl RunTrace {
    /// First iteration whose gap is at most `tol`.
    pub fn iterations_to(&self, tol: f64) -> Option<usize> {
        self.rows.iter().find(|r| r.f_gap <= tol).map(|r| r.k)
    }

    pub fn final_gap(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.f_gap)
    }

    pub fn best_gap(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.best_gap)
    }

    /// Recorded step sizes or momentum estimates in iteration order.
    pub fn steps(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.step_or_mu).collect()
    }

    pub fn iterations(&self) -> usize {
        self.rows.last().map_or(0, |r| r.k)
    }
}

#[derive(Debug)]
pub(crate) struct Recorder {
    trace: RunTrace,
    best: f64,
    record_iterates: bool,
}

impl Recorder {
    pub(crate) fn new(record_iterates: bool) -> Self {
        Self {
            trace: RunTrace {
                rows: Vec::new(),
                termination: Termination::Budget,
                clamp_events: 0,
                iterates: Vec::new(),
            },
            best: f64::INFINITY,
            record_iterates,
        }
    }

    pub(crate) fn push(&mut self, mut row: TraceRow, x: &Vector, y: Option<&Vector>) {
        if row.f_gap < self.best {
            self.best = row.f_gap;
        }
        row.best_gap = self.best;
        self.trace.rows.push(row);
        if self.record_iterates {
            self.trace.iterates.push(Iterate {
                x: x.clone(),
                y: y.cloned(),
            });
        }
    }

    pub(crate) fn last_mut(&mut self) -> Option<&mut TraceRow> {
        self.trace.rows.last_mut()
    }

    pub(crate) fn clamp(&mut self) {
        self.trace.clamp_events += 1;
    }

    pub(crate) fn finish(mut self, termination: Termination) -> RunTrace {
        self.trace.termination = termination;
        self.trace
    }
}
