//! Per-thread operation counters.
//!
//! Every rounded real operation counts as one flop. The complex counter
//! tracks complex additions and multiplications as single units.

use std::cell::Cell;

thread_local! {
    static REAL: Cell<u64> = const { Cell::new(0) };
    static COMPLEX: Cell<u64> = const { Cell::new(0) };
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct FlopCount {
    pub real: u64,
    pub complex: u64,
}

pub fn reset() {
    REAL.with(|c| c.set(0));
    COMPLEX.with(|c| c.set(0));
}

pub fn get() -> FlopCount {
    FlopCount {
        real: REAL.with(|c| c.get()),
        complex: COMPLEX.with(|c| c.get()),
    }
}

pub fn record(real: u64, complex: u64) {
    REAL.with(|c| c.set(c.get() + real));
    COMPLEX.with(|c| c.set(c.get() + complex));
}

/// Counts the flops spent inside `f`.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, FlopCount) {
    let before = get();
    let out = f();
    let after = get();
    (
        out,
        FlopCount {
            real: after.real - before.real,
            complex: after.complex - before.complex,
        },
    )
}
