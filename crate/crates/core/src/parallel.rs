use std::sync::OnceLock;

use rayon::{ThreadPool, ThreadPoolBuilder};

/// Environment variable that caps the worker threads used inside training.
pub const THREADS_ENV: &str = "HMMACCEL_THREADS";

static POOL: OnceLock<ThreadPool> = OnceLock::new();

pub(crate) fn pool() -> &'static ThreadPool {
    POOL.get_or_init(|| {
        let available = std::thread::available_parallelism().map_or(1, |n| n.get());
        let cap = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n >= 1)
            .unwrap_or(available);
        ThreadPoolBuilder::new()
            .num_threads(cap.min(available).max(1))
            .build()
            .expect("thread pool")
    })
}

/// Worker threads available to the training E-step.
pub fn threads() -> usize {
    pool().current_num_threads()
}
