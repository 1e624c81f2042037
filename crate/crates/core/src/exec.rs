//! Fork-join executors.
//!
//! The algorithms only ever fork two closures and wait for both; any
//! work-stealing pool can back [`ForkJoin`]. All parallel loops built here
//! hand each task a disjoint piece of the data, so results do not depend on
//! the executor.

use alloc::vec::Vec;

pub trait ForkJoin: Sync {
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send;

    /// Number of workers the executor may use; informational.
    fn workers(&self) -> usize {
        1
    }
}

/// Runs both halves of every fork on the calling thread, left first.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl ForkJoin for Sequential {
    #[inline]
    fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        let ra = a();
        (ra, b())
    }
}

/// Calls `f(i, &mut items[i])` for every item, splitting the slice in halves.
pub fn for_each_mut<E, T, F>(exec: &E, items: &mut [T], f: &F)
where
    E: ForkJoin + ?Sized,
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    fn go<E, T, F>(exec: &E, base: usize, items: &mut [T], f: &F)
    where
        E: ForkJoin + ?Sized,
        T: Send,
        F: Fn(usize, &mut T) + Sync,
    {
        match items.len() {
            0 => {}
            1 => f(base, &mut items[0]),
            len => {
                let mid = len / 2;
                let (lo, hi) = items.split_at_mut(mid);
                exec.join(|| go(exec, base, lo, f), || go(exec, base + mid, hi, f));
            }
        }
    }
    go(exec, 0, items, f)
}

/// Calls `f(i)` for every `i` in `0..n`, with leaves of at most `grain`
/// indices.
pub fn for_range<E, F>(exec: &E, n: usize, grain: usize, f: &F)
where
    E: ForkJoin + ?Sized,
    F: Fn(core::ops::Range<usize>) + Sync,
{
    fn go<E, F>(exec: &E, lo: usize, hi: usize, grain: usize, f: &F)
    where
        E: ForkJoin + ?Sized,
        F: Fn(core::ops::Range<usize>) + Sync,
    {
        if hi - lo <= grain {
            if hi > lo {
                f(lo..hi);
            }
        } else {
            let mid = lo + (hi - lo) / 2;
            exec.join(|| go(exec, lo, mid, grain, f), || go(exec, mid, hi, grain, f));
        }
    }
    go(exec, 0, n, grain.max(1), f)
}

/// Maps `0..n` to values in index order.
pub fn map_collect<E, T, F>(exec: &E, n: usize, f: &F) -> Vec<T>
where
    E: ForkJoin + ?Sized,
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    fn go<E, T, F>(exec: &E, lo: usize, hi: usize, f: &F) -> Vec<T>
    where
        E: ForkJoin + ?Sized,
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        if hi - lo <= 1 {
            (lo..hi).map(f).collect()
        } else {
            let mid = lo + (hi - lo) / 2;
            let (mut a, mut b) = exec.join(|| go(exec, lo, mid, f), || go(exec, mid, hi, f));
            a.append(&mut b);
            a
        }
    }
    go(exec, 0, n, f)
}

/// Copy `src` into `dst` in parallel blocks.
pub fn par_copy<E, T>(exec: &E, dst: &mut [T], src: &[T])
where
    E: ForkJoin + ?Sized,
    T: Copy + Send + Sync,
{
    const BLOCK: usize = 1 << 16;
    assert_eq!(dst.len(), src.len());
    if dst.len() <= BLOCK {
        dst.copy_from_slice(src);
        return;
    }
    let mid = dst.len() / 2;
    let (d0, d1) = dst.split_at_mut(mid);
    let (s0, s1) = src.split_at(mid);
    exec.join(|| par_copy(exec, d0, s0), || par_copy(exec, d1, s1));
}

/// A raw pointer that may be shared between tasks writing disjoint indices.
#[derive(Clone, Copy)]
pub(crate) struct SharedMut<T>(pub(crate) *mut T);

// Safety: every user writes a disjoint set of indices, fixed before the
// parallel phase starts.
unsafe impl<T: Send> Send for SharedMut<T> {}
unsafe impl<T: Send> Sync for SharedMut<T> {}

impl<T> SharedMut<T> {
    #[inline]
    pub(crate) fn ptr(&self) -> *mut T {
        self.0
    }
}
