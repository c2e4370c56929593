//! Thread-parallel driver for the Monte Carlo engine.

use chemokin_core::mc::{McEngine, McOutput, Tally};
use rayon::prelude::*;

use crate::error::Result;

pub const THREADS_VAR: &str = "CHEMOKIN_THREADS";

/// Worker count: `CHEMOKIN_THREADS` if set to a positive integer, otherwise
/// the number of available cores.
pub fn threads() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Pool sized by [`threads`].
pub fn pool() -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads())
        .build()
        .expect("failed to start worker threads")
}

/// Runs every chunk on the current rayon pool. Chunk tallies are merged in
/// chunk order, so the output does not depend on the thread count.
pub fn run_mc(engine: &McEngine) -> Result<McOutput> {
    let tallies: Vec<Tally> = (0..engine.chunks())
        .into_par_iter()
        .map(|c| engine.run_chunk(c))
        .collect::<Result<_, _>>()?;
    let mut total = engine.empty_tally();
    for t in &tallies {
        total.merge(t);
    }
    Ok(engine.finish(&total)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chemokin_core::mc::McConfig;
    use chemokin_core::ModelParams;

    #[test]
    fn matches_sequential_run() {
        let p = ModelParams::new(0.1, 10.0, 0.3, 1.25, 0.7).unwrap();
        let mut c = McConfig::desk(p, 5);
        c.n_particles = 40_000;
        c.t_end = 2.0;
        c.avg_window = 1.0;
        let engine = McEngine::new(c).unwrap();
        let seq = engine.run().unwrap();
        for n in [1, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            let par = pool.install(|| run_mc(&engine)).unwrap();
            assert_eq!(par.profile, seq.profile);
            assert_eq!(par.stats, seq.stats);
        }
    }
}
