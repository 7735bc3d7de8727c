//! Seeded generators and independent oracles for property testing.
//!
//! Every generator draws from a ChaCha stream keyed by the config seed, with a
//! separate stream per generator so that changing one does not shift the others.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bott::check_morse_bott;
use crate::complex::{CellId, CellSpec, Complex, CoverSpec};
use crate::function::{CellFunction, Value};
use crate::gradient::{has_closed_orbit, synthesize_morse, VectorField};
use crate::homology::IntMatrix;
use crate::morse::check_morse;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenConfig {
    pub seed: u64,
    /// At most 26, since vertices are the letters `a`–`z`.
    pub max_vertices: usize,
    pub max_dim: usize,
    pub max_cells: usize,
    /// Fraction of candidate simplices attempted as facets.
    pub density: f64,
    /// Probability of offering each regular facet pair to the matching.
    pub match_rate: f64,
    /// Value merges attempted per Morse–Bott function.
    pub merge_steps: usize,
    /// Fresh starts for `random_morse_bott` when `require_non_morse` is set.
    pub retries: usize,
    pub require_non_morse: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_vertices: 6,
            max_dim: 2,
            max_cells: 30,
            density: 0.5,
            match_rate: 0.8,
            merge_steps: 8,
            retries: 8,
            require_non_morse: false,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidConfig(m.to_string()));
        if !(1..=26).contains(&self.max_vertices) {
            return bad("max_vertices must be between 1 and 26");
        }
        if self.max_cells == 0 {
            return bad("max_cells must be positive");
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad("density must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.match_rate) {
            return bad("match_rate must lie in [0, 1]");
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no non-Morse Morse-Bott function found for seed {seed} after {attempts} attempts")]
    GenerationExhausted { seed: u64, attempts: usize },
}

const STREAM_COMPLEX: u64 = 1;
const STREAM_MATCHING: u64 = 2;
const STREAM_MORSE: u64 = 3;
const STREAM_BOTT: u64 = 4;

fn closure_masks(facets: &BTreeSet<u32>) -> BTreeSet<u32> {
    let mut out = BTreeSet::new();
    for &f in facets {
        // all nonempty submasks
        let mut s = f;
        while s != 0 {
            out.insert(s);
            s = (s - 1) & f;
        }
    }
    out
}

/// A pure simplicial complex on letter-named vertices with at most `max_cells` cells.
pub fn random_simplicial(cfg: &GenConfig) -> Result<Complex, GenError> {
    cfg.validate()?;
    let mut rng = cfg.rng(STREAM_COMPLEX);
    let n = rng.gen_range(1..=cfg.max_vertices);
    let mut top = cfg.max_dim.min(n - 1);
    while top > 0 && (1usize << (top + 1)) - 1 > cfg.max_cells {
        top -= 1;
    }
    let d = rng.gen_range(0..=top);
    let verts: Vec<u32> = (0..n as u32).collect();
    let candidates = binomial(n, d + 1);
    let attempts = ((cfg.density * candidates as f64).ceil() as usize).max(1);
    let mut facets = BTreeSet::new();
    for _ in 0..attempts {
        let mask = verts
            .choose_multiple(&mut rng, d + 1)
            .fold(0u32, |m, &v| m | (1 << v));
        let mut next = facets.clone();
        next.insert(mask);
        if closure_masks(&next).len() <= cfg.max_cells {
            facets = next;
        }
    }
    let simplices: Vec<Vec<String>> = facets
        .iter()
        .map(|&m| {
            (0..n as u32)
                .filter(|v| m & (1 << v) != 0)
                .map(|v| char::from(b'a' + v as u8).to_string())
                .collect()
        })
        .collect();
    Ok(Complex::from_simplicial(&simplices).expect("generated simplices are nonempty"))
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Small CW complexes with irregular faces, which simplicial inputs never have.
pub fn cw_catalog() -> Vec<Complex> {
    fn build(
        cells: &[(&str, usize)],
        covers: &[(&str, &str, i64, bool)],
        deep: &[(&str, &str)],
    ) -> Complex {
        let cells: Vec<CellSpec> = cells.iter().map(|&(n, d)| CellSpec::new(n, d)).collect();
        let covers: Vec<CoverSpec> = covers
            .iter()
            .map(|&(a, b, i, r)| CoverSpec::new(a, b, i, r))
            .collect();
        let deep: Vec<(String, String)> = deep
            .iter()
            .map(|&(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Complex::build(&cells, &covers, &deep).expect("catalog complexes are valid")
    }
    vec![
        build(&[("v", 0), ("e", 1)], &[("v", "e", 0, false)], &[]),
        build(
            &[("v", 0), ("e", 1), ("t", 2)],
            &[("v", "e", 0, false), ("e", "t", 2, false)],
            &[("v", "t")],
        ),
        build(
            &[("v", 0), ("x", 1), ("y", 1), ("t", 2)],
            &[
                ("v", "x", 0, false),
                ("v", "y", 0, false),
                ("x", "t", 0, false),
                ("y", "t", 0, false),
            ],
            &[("v", "t")],
        ),
        // a disk bounded by two edges, with a loop hanging off one corner
        build(
            &[("u", 0), ("w", 0), ("p", 1), ("q", 1), ("l", 1), ("t", 2)],
            &[
                ("u", "p", -1, true),
                ("w", "p", 1, true),
                ("u", "q", -1, true),
                ("w", "q", 1, true),
                ("u", "l", 0, false),
                ("p", "t", 1, true),
                ("q", "t", -1, true),
            ],
            &[],
        ),
    ]
}

/// A valid field without closed orbits, grown greedily over shuffled regular facet pairs.
pub fn random_acyclic_matching_with(
    k: &Complex,
    rng: &mut impl Rng,
    match_rate: f64,
) -> VectorField {
    let mut pairs: Vec<(CellId, CellId)> = k
        .coverings()
        .iter()
        .filter(|cv| cv.regular)
        .map(|cv| (cv.face, cv.cell))
        .collect();
    pairs.shuffle(rng);
    let mut used = BTreeSet::new();
    let mut arrows: BTreeMap<CellId, CellId> = BTreeMap::new();
    for (s, t) in pairs {
        if used.contains(&s) || used.contains(&t) || !rng.gen_bool(match_rate) {
            continue;
        }
        arrows.insert(s, t);
        let v = VectorField::from_pairs(arrows.iter().map(|(&a, &b)| (a, b)))
            .expect("tails are unique");
        if has_closed_orbit(k, &v).is_some() {
            arrows.remove(&s);
        } else {
            used.extend([s, t]);
        }
    }
    VectorField::from_pairs(arrows).expect("tails are unique")
}

pub fn random_acyclic_matching(k: &Complex, cfg: &GenConfig) -> VectorField {
    random_acyclic_matching_with(k, &mut cfg.rng(STREAM_MATCHING), cfg.match_rate)
}

/// Replaces the values by random integers in the same order; every condition
/// on a function compares values only, so the Morse and Morse–Bott properties survive.
pub fn relabel_monotone(f: &CellFunction, rng: &mut impl Rng) -> CellFunction {
    let levels: BTreeSet<&Value> = f.values().iter().collect();
    let mut next = rng.gen_range(-3i64..=3);
    let mut map = BTreeMap::new();
    for v in levels {
        map.insert(v, next);
        next += rng.gen_range(1..=3);
    }
    CellFunction::from_values(f.values().iter().map(|v| Value::integer(map[v])).collect())
}

/// A discrete Morse function: synthesized from a random acyclic matching, then relabeled.
pub fn random_morse(k: &Complex, cfg: &GenConfig) -> CellFunction {
    let v = random_acyclic_matching(k, cfg);
    let g = synthesize_morse(k, &v).expect("generated fields are valid and acyclic");
    relabel_monotone(&g, &mut cfg.rng(STREAM_MORSE))
}

fn is_morse_bott(k: &Complex, f: &CellFunction) -> bool {
    check_morse_bott(k, f).is_ok_and(|v| v.is_morse_bott())
}

fn merge_once(k: &Complex, f: &mut CellFunction, rng: &mut impl Rng) {
    if rng.gen_bool(0.5) {
        // pull one cell of a covering pair onto the other's value
        let cv = &k.coverings()[rng.gen_range(0..k.coverings().len())];
        let (a, b) = if rng.gen_bool(0.5) {
            (cv.face, cv.cell)
        } else {
            (cv.cell, cv.face)
        };
        f.set(a, f.value(b).clone());
    } else {
        // fuse two adjacent level sets
        let levels: Vec<Value> = f.level_sets().into_keys().cloned().collect();
        if levels.len() < 2 {
            return;
        }
        let i = rng.gen_range(0..levels.len() - 1);
        let (lo, hi) = (&levels[i], &levels[i + 1]);
        let (from, to) = if rng.gen_bool(0.5) {
            (hi, lo)
        } else {
            (lo, hi)
        };
        for c in k.cells() {
            if f.value(c) == from {
                f.set(c, to.clone());
            }
        }
    }
}

/// A discrete Morse–Bott function obtained by merging values of a random
/// Morse function, keeping each merge only if the result is still Morse–Bott.
pub fn random_morse_bott(k: &Complex, cfg: &GenConfig) -> Result<CellFunction, GenError> {
    let mut rng = cfg.rng(STREAM_BOTT);
    for attempt in 0..cfg.retries.max(1) {
        let start = if attempt == 0 {
            random_morse(k, cfg)
        } else {
            let v = random_acyclic_matching_with(k, &mut rng, cfg.match_rate);
            relabel_monotone(
                &synthesize_morse(k, &v).expect("generated fields are valid and acyclic"),
                &mut rng,
            )
        };
        let mut f = start;
        if !k.coverings().is_empty() {
            for _ in 0..cfg.merge_steps {
                let mut g = f.clone();
                merge_once(k, &mut g, &mut rng);
                if is_morse_bott(k, &g) {
                    f = g;
                }
            }
        }
        if !cfg.require_non_morse || !check_morse(k, &f).is_ok_and(|v| v.is_morse()) {
            return Ok(f);
        }
    }
    Err(GenError::GenerationExhausted {
        seed: cfg.seed,
        attempts: cfg.retries.max(1),
    })
}

/// Integer matrix with entries in `-bound..=bound`.
pub fn random_int_matrix(rng: &mut impl Rng, rows: usize, cols: usize, bound: i64) -> IntMatrix {
    let data: Vec<Vec<i64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.gen_range(-bound..=bound)).collect())
        .collect();
    IntMatrix::from_rows(&data)
}

/// Rank over `Q` by fraction-exact Gaussian elimination.
pub fn rank_oracle(m: &IntMatrix) -> usize {
    let mut a: Vec<Vec<BigRational>> = (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..m.cols() {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..a.len() {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &a[rank][col];
            let (top, rest) = a.split_at_mut(r);
            for (x, y) in rest[0][col..].iter_mut().zip(&top[rank][col..]) {
                *x -= &factor * y;
            }
        }
        rank += 1;
    }
    rank
}

/// A failed structural statement about the face poset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StructuralViolation {
    /// `ν reg≺ σ reg≺ τ` without a second cell between `ν` and `τ`.
    AnotherCell {
        nu: CellId,
        sigma: CellId,
        tau: CellId,
    },
    /// `ν reg< τ` with gap at least two and an empty interval.
    RegularFace { nu: CellId, tau: CellId },
    /// `ν < α reg≺ τ` and every cell of `(ν, τ)` lies below `α`.
    NotBelowAlpha {
        nu: CellId,
        alpha: CellId,
        tau: CellId,
    },
    /// `(ν, τ) = {α}` but `α reg< τ`.
    UniqueIntervalRegular {
        nu: CellId,
        alpha: CellId,
        tau: CellId,
    },
}

/// Exhaustively checks the face-poset lemmas on every applicable pair and triple.
pub fn structural_lemma_suite(k: &Complex) -> Vec<StructuralViolation> {
    let mut out = Vec::new();
    let regular = |a: CellId, b: CellId| k.is_regular_face(a, b).unwrap_or(false);
    for tau in k.cells() {
        for &nu in k.faces(tau) {
            let interval = k.interval(nu, tau).expect("nu is a face of tau");
            let gap = k.dim(tau) - k.dim(nu);
            if gap >= 2 && regular(nu, tau) && interval.is_empty() {
                out.push(StructuralViolation::RegularFace { nu, tau });
            }
            if let [alpha] = interval[..] {
                if !k.is_irregular_face(alpha, tau) {
                    out.push(StructuralViolation::UniqueIntervalRegular { nu, alpha, tau });
                }
            }
            for &alpha in &interval {
                if !(k.is_facet(alpha, tau) && regular(alpha, tau)) {
                    continue;
                }
                if !interval.iter().any(|&b| b != alpha && !k.is_face(b, alpha)) {
                    out.push(StructuralViolation::NotBelowAlpha { nu, alpha, tau });
                }
                if gap == 2 && regular(nu, alpha) && interval.len() < 2 {
                    out.push(StructuralViolation::AnotherCell {
                        nu,
                        sigma: alpha,
                        tau,
                    });
                }
            }
        }
    }
    out
}
