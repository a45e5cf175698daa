/// Hints `slice[i]` into cache. Out-of-range indices are ignored.
#[inline]
pub(crate) fn prefetch<T>(slice: &[T], i: usize) {
    #[cfg(target_arch = "x86_64")]
    if i < slice.len() {
        use std::arch::x86_64::{_mm_prefetch, _MM_HINT_T0};
        let p = slice.as_ptr().wrapping_add(i) as *const i8;
        // SAFETY: SSE is part of the x86_64 baseline and a prefetch never
        // faults.
        unsafe { _mm_prefetch::<_MM_HINT_T0>(p) };
    }
    #[cfg(not(target_arch = "x86_64"))]
    let _ = (slice, i);
}
