//! Certificate audit results and a process-wide tally of them.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use super::EIG_TOL;

/// Lower bound on `f − Σσᵢgᵢ` over region samples.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditReport {
    pub min_residual: f64,
    pub min_eigenvalue: f64,
}

impl AuditReport {
    pub(crate) fn new(min_residual: f64, min_eigenvalue: f64) -> Self {
        let r = Self {
            min_residual,
            min_eigenvalue,
        };
        record(&r);
        r
    }

    pub fn passed(&self) -> bool {
        self.min_residual >= -RESIDUAL_TOL && self.min_eigenvalue >= -EIG_TOL
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditStats {
    pub blocks: u64,
    pub failures: u64,
    pub worst_residual: f64,
    pub worst_eigenvalue: f64,
}

static BLOCKS: AtomicU64 = AtomicU64::new(0);
static FAILURES: AtomicU64 = AtomicU64::new(0);
static WORST: Mutex<(f64, f64)> = Mutex::new((f64::INFINITY, f64::INFINITY));

fn record(r: &AuditReport) {
    BLOCKS.fetch_add(1, Ordering::Relaxed);
    if !r.passed() {
        FAILURES.fetch_add(1, Ordering::Relaxed);
        log::warn!("certificate audit failed: {r:?}");
    }
    let mut w = WORST.lock().unwrap_or_else(|e| e.into_inner());
    w.0 = w.0.min(r.min_residual);
    w.1 = w.1.min(r.min_eigenvalue);
}

/// Every audit performed in this process since the last reset.
pub fn audit_stats() -> AuditStats {
    let w = *WORST.lock().unwrap_or_else(|e| e.into_inner());
    AuditStats {
        blocks: BLOCKS.load(Ordering::Relaxed),
        failures: FAILURES.load(Ordering::Relaxed),
        worst_residual: w.0,
        worst_eigenvalue: w.1,
    }
}

pub fn reset_audit_stats() {
    BLOCKS.store(0, Ordering::Relaxed);
    FAILURES.store(0, Ordering::Relaxed);
    *WORST.lock().unwrap_or_else(|e| e.into_inner()) = (f64::INFINITY, f64::INFINITY);
}
