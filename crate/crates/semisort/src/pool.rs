use semisort_core::ForkJoin;

use crate::Result;

/// Forks onto the current rayon pool.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rayon;

impl ForkJoin for Rayon {
    #[inline]
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        rayon::join(a, b)
    }

    fn workers(&self) -> usize {
        rayon::current_num_threads()
    }
}

/// Run `f` inside a dedicated pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
    Ok(pool.install(f))
}
