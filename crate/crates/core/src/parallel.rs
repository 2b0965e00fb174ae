use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Maps `f` over `items` on `workers` threads, preserving input order.
/// With `workers <= 1` everything runs on the calling thread.
pub fn ordered_map<T, U, F>(items: Vec<T>, workers: usize, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    if workers <= 1 {
        return items.into_iter().map(f).collect();
    }
    pool(workers).install(|| items.into_par_iter().map(f).collect())
}

fn pool(workers: usize) -> ThreadPool {
    ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool")
}
