/// Runs `f` inside a dedicated rayon pool of `workers` threads (at least one),
/// so parallel iterators inside `f` never touch the global pool.
pub(crate) fn run_with_workers<T, F>(workers: usize, f: F) -> T
where
    F: FnOnce() -> T + Send,
    T: Send,
{
    match rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
