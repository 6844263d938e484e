//! Bounded worker pool for embarrassingly parallel inner loops.
//!
//! The worker count is capped by the `EXCHMARKOV_THREADS` environment
//! variable (default: available parallelism). Results are collected in task
//! index order and every task derives its own seed from its index, so the
//! output is identical for every thread count.

use std::sync::atomic::{AtomicUsize, Ordering};

pub(crate) fn thread_cap() -> usize {
    std::env::var("EXCHMARKOV_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|p| p.get())
                .unwrap_or(1)
        })
}

/// Maps `f` over `0..count`, returning results in index order.
pub(crate) fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = thread_cap().min(count).max(1);
    if threads == 1 {
        return (0..count).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = Vec::with_capacity(count);
    slots.resize_with(count, || None);
    let next = AtomicUsize::new(0);
    let slots_ptr = SlotVec(slots.as_mut_ptr());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            let f = &f;
            let next = &next;
            let slots_ptr = &slots_ptr;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= count {
                    break;
                }
                let value = f(i);
                // Safety: each index is claimed by exactly one worker and the
                // vector outlives the scope.
                unsafe { *slots_ptr.0.add(i) = Some(value) };
            });
        }
    });
    slots.into_iter().map(|s| s.expect("slot filled")).collect()
}

struct SlotVec<T>(*mut Option<T>);
unsafe impl<T: Send> Sync for SlotVec<T> {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let out = par_map(100, |i| i * i);
        assert_eq!(out, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }
}
