//! Experiment runners. Each takes its task config and a shared [`Context`]
//! and returns a [`Report`].

mod artifacts;
mod decay;
mod holder;
mod independence;
mod second_level;
mod wilson;

use std::path::Path;

use rayon::prelude::*;
use ym2d::liealg::SuAlgebra;
use ym2d::spectral::ModeTable;

use crate::error::Result;

pub use artifacts::{lift, sample_field, transport};
pub use decay::first_level_decay;
pub use holder::holder_first;
pub use independence::independence;
pub use second_level::second_level;
pub use wilson::wilson_density;

/// Resources shared by every task of a run.
pub struct Context<'a> {
    pub table: &'a ModeTable,
    pub su: &'a SuAlgebra,
    pub seed: u64,
    pub config_hash: &'a str,
    pub out: &'a Path,
}

impl Context<'_> {
    /// Number of Lie algebra coordinates.
    pub fn dim(&self) -> usize {
        self.su.dim()
    }

    /// Runs `f` on every sample index in parallel, keeping index order so
    /// reductions do not depend on scheduling.
    pub fn per_sample<T: Send>(&self, samples: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        (0..samples).into_par_iter().map(f).collect()
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn label(v: f64) -> String {
    format!("{v}")
}
