//! Independent jobs over a corpus. [`map`] runs on the rayon pool when the
//! `parallel` feature is enabled and degrades to [`map_seq`] otherwise;
//! results keep input order either way.

use crate::diffmod::DiffModule;
use crate::error::Result;
use crate::factorize::{self, Decomposition, PrecisionCtx};
use crate::radii::{self, RadiusProfile};

#[cfg(feature = "parallel")]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_seq(items, f)
}

pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Whether [`map`] uses the thread pool in this build.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Radius profiles along derivation `j`.
pub fn profiles(mods: &[DiffModule], j: usize) -> Vec<Result<RadiusProfile>> {
    map(mods, |m| radii::profile(m, j))
}

/// Unchecked decompositions along derivation `j`; callers judge the
/// certificates.
pub fn decompose_all(mods: &[DiffModule], j: usize, ctx: &PrecisionCtx) -> Vec<Result<Decomposition>> {
    map(mods, |m| factorize::decompose_unchecked(m, j, ctx))
}

/// Unchecked multi-derivation decompositions.
pub fn multi_decompose_all(mods: &[DiffModule], ctx: &PrecisionCtx) -> Vec<Result<Decomposition>> {
    map(mods, |m| factorize::multi_decompose_unchecked(m, ctx))
}
