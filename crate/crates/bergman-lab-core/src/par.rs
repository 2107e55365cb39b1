//! Fixed-chunk parallel map used by the Monte Carlo estimators.
//!
//! Work is always split into the same chunks, each chunk draws from its own
//! seeded stream, and partial results are merged in chunk order. The thread
//! count therefore never changes a result.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

static MAX_THREADS: AtomicUsize = AtomicUsize::new(0);

/// Caps the number of worker threads (0 means "use available parallelism").
/// Without the `std` feature everything runs on the calling thread.
pub fn set_max_threads(n: usize) {
    MAX_THREADS.store(n, Ordering::Relaxed);
}

pub fn max_threads() -> usize {
    let n = MAX_THREADS.load(Ordering::Relaxed);
    #[cfg(feature = "std")]
    {
        if n == 0 {
            return std::thread::available_parallelism().map_or(1, |v| v.get());
        }
    }
    n.max(1)
}

/// Evaluates `f(0), …, f(n_chunks − 1)` and returns the results in index order.
pub fn map_chunks<T, F>(n_chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "std")]
    {
        let threads = max_threads().min(n_chunks);
        if threads > 1 {
            return map_threaded(n_chunks, threads, &f);
        }
    }
    (0..n_chunks).map(f).collect()
}

#[cfg(feature = "std")]
fn map_threaded<T, F>(n_chunks: usize, threads: usize, f: &F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..n_chunks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= n_chunks {
                            break;
                        }
                        done.push((i, f(i)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, v) in h.join().expect("worker panicked") {
                slots[i] = Some(v);
            }
        }
    });
    slots.into_iter().map(|v| v.expect("chunk not computed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let v = map_chunks(37, |i| i * i);
        assert_eq!(v, (0..37).map(|i| i * i).collect::<Vec<_>>());
    }
}
