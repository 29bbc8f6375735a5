//! Deterministic data parallelism over index ranges.
//!
//! Work is split into fixed contiguous chunks that are processed by scoped
//! threads and combined in chunk order, so results are bit-identical for any
//! thread count. The thread count defaults to 1 and can be raised globally
//! (the CLI maps `--threads` / `AXISYM_FBP_THREADS` here).

use std::sync::atomic::{AtomicUsize, Ordering};

static THREAD_CAP: AtomicUsize = AtomicUsize::new(1);

/// Caps the number of worker threads used by [`sum_over`] and [`map_rows`].
pub fn set_thread_cap(n: usize) {
    THREAD_CAP.store(n.max(1), Ordering::Relaxed);
}

pub fn thread_cap() -> usize {
    THREAD_CAP.load(Ordering::Relaxed).max(1)
}

/// Sums `f(i)` for i in 0..n.
///
/// The range is cut into fixed 4096-wide chunks whose partial sums are
/// combined in chunk order, so the result is bit-identical for every thread
/// count.
pub fn sum_over<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    const CHUNK: usize = 4096;
    let threads = thread_cap();
    if threads <= 1 || n <= CHUNK {
        let mut acc = 0.0;
        for c in 0..n.div_ceil(CHUNK) {
            let mut part = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                part += f(i);
            }
            acc += part;
        }
        return acc;
    }
    let num_chunks = n.div_ceil(CHUNK);
    let mut partials = vec![0.0f64; num_chunks];
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads.min(num_chunks))
            .map(|_| {
                let f = &f;
                let next = &next;
                scope.spawn(move || {
                    let mut mine: Vec<(usize, f64)> = Vec::new();
                    loop {
                        let c = next.fetch_add(1, Ordering::Relaxed);
                        if c >= num_chunks {
                            break;
                        }
                        let mut part = 0.0;
                        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                            part += f(i);
                        }
                        mine.push((c, part));
                    }
                    mine
                })
            })
            .collect();
        for handle in handles {
            for (c, part) in handle.join().unwrap() {
                partials[c] = part;
            }
        }
    });
    partials.iter().sum()
}

/// Fills `out[i] = f(i)` in parallel over fixed chunks.
pub fn map_rows<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let n = out.len();
    let threads = thread_cap().min(n.max(1));
    if threads <= 1 || n < 64 {
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = f(i);
        }
        return;
    }
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        let mut rest = &mut out[..];
        let mut offset = 0;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            let f = &f;
            let base = offset;
            scope.spawn(move || {
                for (k, slot) in head.iter_mut().enumerate() {
                    *slot = f(base + k);
                }
            });
            rest = tail;
            offset += take;
        }
    });
}
