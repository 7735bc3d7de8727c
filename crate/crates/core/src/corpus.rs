//! Seeded corpus of complexes with Morse and Morse–Bott functions, swept in parallel.

use std::ops::Range;

use crate::complex::Complex;
use crate::function::CellFunction;
use crate::gen::{
    cw_catalog, random_acyclic_matching, random_morse, random_morse_bott, random_simplicial,
    GenConfig,
};
use crate::gradient::VectorField;
use crate::par::Execution;

/// One in this many seeds takes its complex from the CW catalog instead of the simplicial generator.
pub const CATALOG_EVERY: u64 = 8;

#[derive(Clone, Debug)]
pub struct Sample {
    pub seed: u64,
    pub complex: Complex,
    /// The field `morse` was synthesized from.
    pub matching: VectorField,
    pub morse: CellFunction,
    pub morse_bott: CellFunction,
}

impl Sample {
    pub fn new(seed: u64) -> Self {
        let cfg = GenConfig::with_seed(seed);
        let complex = if seed % CATALOG_EVERY == CATALOG_EVERY - 1 {
            let catalog = cw_catalog();
            catalog[(seed / CATALOG_EVERY) as usize % catalog.len()].clone()
        } else {
            random_simplicial(&cfg).expect("default config is valid")
        };
        let matching = random_acyclic_matching(&complex, &cfg);
        let morse = random_morse(&complex, &cfg);
        let morse_bott =
            random_morse_bott(&complex, &cfg).expect("non-Morse output is not required");
        Self {
            seed,
            complex,
            matching,
            morse,
            morse_bott,
        }
    }
}

/// Builds the sample for every seed and applies `check`, in seed order.
pub fn sweep<R, F>(seeds: Range<u64>, exec: Execution, check: F) -> Vec<R>
where
    R: Send,
    F: Fn(&Sample) -> R + Sync + Send,
{
    let seeds: Vec<u64> = seeds.collect();
    exec.map(&seeds, |&s| check(&Sample::new(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::grad_morse;

    #[test]
    fn samples_are_consistent() {
        for s in sweep(0..40, Execution::Parallel, |s| {
            grad_morse(&s.complex, &s.morse).as_ref() == Ok(&s.matching) && s.complex.len() <= 30
        }) {
            assert!(s);
        }
    }

    #[test]
    fn modes_agree() {
        let name = |s: &Sample| s.morse_bott.to_text(&s.complex);
        assert_eq!(
            sweep(0..24, Execution::Sequential, name),
            sweep(0..24, Execution::Parallel, name)
        );
    }
}
