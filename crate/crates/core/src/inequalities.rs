//! Count statistics and the discrete Morse and Morse–Bott polynomial identities.
//!
//! Both identities have the shape `lhs = P_t(K) + (1+t)·residual`. The
//! residual is computed from its closed formula, not by division, so the
//! equality check is a genuine test of every ingredient.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::bott::{check_morse_bott_with, collections, reduce_all, BottError, ReducedCollection};
use crate::complex::{CellId, Complex};
use crate::function::{CellFunction, FunctionError};
use crate::homology::{
    chain_complex_full, chain_complex_reduced, rank_profile, HomologyError, RankProfile,
};
use crate::morse::{check_morse, MorseError};
use crate::poly::IntPolynomial;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InequalityError {
    #[error(transparent)]
    Domain(#[from] FunctionError),
    #[error("function is not discrete Morse")]
    NotMorse,
    #[error("function is not discrete Morse-Bott")]
    NotMorseBott,
    #[error("cell set is not a subcomplex: `{0}` is missing a face")]
    NotASubcomplex(String),
    #[error("chain is not a nonzero cycle")]
    NotACycle,
    #[error(transparent)]
    Bott(#[from] BottError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

/// Per-dimension counts over a subcomplex `L`, with pairs taken inside `L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountProfile {
    pub c: Vec<usize>,
    /// Cells of `L` in no nc pair inside `L`.
    pub m: Vec<usize>,
    /// `u_k`: nc pairs `σ^k ≺ τ^{k+1}` inside `L`.
    pub u: Vec<usize>,
    /// `d_k`: nc pairs `ν^{k-1} ≺ σ^k` inside `L`.
    pub d: Vec<usize>,
    pub m_tilde: Vec<usize>,
    pub u_tilde: Vec<usize>,
    pub d_tilde: Vec<usize>,
}

impl CountProfile {
    /// `c_k = m_k + u_k + d_k`, which holds when every cell is in at most one nc pair.
    pub fn plain_decomposition_holds(&self) -> bool {
        decomposes(&self.c, &self.m, &self.u, &self.d)
    }

    /// `c_k = m̃_k + ũ_k + d̃_k`.
    pub fn tilde_decomposition_holds(&self) -> bool {
        decomposes(&self.c, &self.m_tilde, &self.u_tilde, &self.d_tilde)
    }
}

fn decomposes(c: &[usize], m: &[usize], u: &[usize], d: &[usize]) -> bool {
    (0..c.len()).all(|k| c[k] == m[k] + u[k] + d[k])
        && (0..c.len()).all(|k| u[k] == d.get(k + 1).copied().unwrap_or(0))
}

/// Counts over the subcomplex `l`; `u_k = d_{k+1}` holds by construction.
pub fn count_profile(
    k: &Complex,
    f: &CellFunction,
    l: &BTreeSet<CellId>,
) -> Result<CountProfile, InequalityError> {
    f.check_domain(k)?;
    if let Some(&bad) = l
        .iter()
        .find(|&&c| k.faces(c).iter().any(|x| !l.contains(x)))
    {
        return Err(InequalityError::NotASubcomplex(k.name(bad).to_string()));
    }
    let top = k.max_dim().map_or(0, |d| d + 1);
    let mut p = CountProfile {
        c: vec![0; top],
        m: vec![0; top],
        u: vec![0; top],
        d: vec![0; top],
        m_tilde: vec![0; top],
        u_tilde: vec![0; top],
        d_tilde: vec![0; top],
    };
    let mut paired = BTreeSet::new();
    let mut strictly_paired = BTreeSet::new();
    for cv in k.coverings() {
        if !(l.contains(&cv.face) && l.contains(&cv.cell)) {
            continue;
        }
        let (a, b) = (f.value(cv.face), f.value(cv.cell));
        let kd = k.dim(cv.face);
        if a >= b {
            p.u[kd] += 1;
            p.d[kd + 1] += 1;
            paired.extend([cv.face, cv.cell]);
        }
        if a > b {
            p.u_tilde[kd] += 1;
            p.d_tilde[kd + 1] += 1;
            strictly_paired.extend([cv.face, cv.cell]);
        }
    }
    for &s in l {
        let kd = k.dim(s);
        p.c[kd] += 1;
        if !paired.contains(&s) {
            p.m[kd] += 1;
        }
        if !strictly_paired.contains(&s) {
            p.m_tilde[kd] += 1;
        }
    }
    Ok(p)
}

/// `lhs = P_t(K) + (1+t)·residual`, checked exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub lhs: IntPolynomial,
    pub p_k: IntPolynomial,
    pub residual: IntPolynomial,
    pub holds: bool,
    pub nonnegative: bool,
    /// `lhs(−1) = χ(K)`.
    pub euler_holds: bool,
    /// `lhs − P_t(K)` is coefficientwise nonnegative, so each Betti number is bounded by its lhs coefficient.
    pub weak_holds: bool,
}

impl IdentityReport {
    fn new(lhs: IntPolynomial, full: &RankProfile, residual: IntPolynomial) -> Self {
        let p_k = full.poincare();
        let holds = lhs == &p_k + &(&IntPolynomial::one_plus_t() * &residual);
        let nonnegative = residual.is_nonnegative();
        let euler_holds = lhs.eval(-1) == full.euler_characteristic();
        let weak_holds = (&lhs - &p_k).is_nonnegative();
        Self {
            lhs,
            p_k,
            residual,
            holds,
            nonnegative,
            euler_holds,
            weak_holds,
        }
    }

    /// Exact equality, nonnegative residual, Euler and weak inequalities all hold.
    pub fn all_hold(&self) -> bool {
        self.holds && self.nonnegative && self.euler_holds && self.weak_holds
    }
}

fn require_morse(k: &Complex, f: &CellFunction) -> Result<(), InequalityError> {
    match check_morse(k, f) {
        Ok(v) if v.is_morse() => Ok(()),
        Ok(_) | Err(MorseError::NotMorse) => Err(InequalityError::NotMorse),
        Err(MorseError::Domain(e)) => Err(e.into()),
    }
}

fn all_cells(k: &Complex) -> BTreeSet<CellId> {
    k.cells().collect()
}

fn signed(v: &[i64]) -> IntPolynomial {
    IntPolynomial::new(v.to_vec())
}

/// `Σ m_k t^k = P_t(K) + (1+t) r(t)` with `r(t) = Σ_{k≥1} (rank B_{k-1} − d_k) t^{k-1}`.
pub fn morse_identity(k: &Complex, f: &CellFunction) -> Result<IdentityReport, InequalityError> {
    require_morse(k, f)?;
    let counts = count_profile(k, f, &all_cells(k))?;
    let full = rank_profile(&chain_complex_full(k));
    let lhs = IntPolynomial::from_counts(&counts.m);
    let r: Vec<i64> = (1..counts.c.len())
        .map(|j| full.boundary_below(j) as i64 - counts.d[j] as i64)
        .collect();
    Ok(IdentityReport::new(lhs, &full, signed(&r)))
}

/// Homology of one reduced collection and its own chain-level identity
/// `Σ #C^red_k t^k = P_t(C^red) + (1+t) Σ rank B^C_{k-1} t^{k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollectionReport {
    pub value: String,
    pub cells: Vec<CellId>,
    pub reduced: Vec<CellId>,
    pub ranks: RankProfile,
    pub poincare: IntPolynomial,
    pub identity_holds: bool,
}

fn collection_report(
    k: &Complex,
    rc: &ReducedCollection,
) -> Result<CollectionReport, InequalityError> {
    let cc = chain_complex_reduced(k, rc)?;
    let ranks = rank_profile(&cc);
    let poincare = ranks.poincare();
    let counts = IntPolynomial::from_counts(&ranks.chains);
    let below: Vec<i64> = (1..ranks.chains.len())
        .map(|j| ranks.boundary_below(j) as i64)
        .collect();
    let identity_holds = counts == &poincare + &(&IntPolynomial::one_plus_t() * &signed(&below));
    Ok(CollectionReport {
        value: rc.value().to_string(),
        cells: rc.collection.cells.clone(),
        reduced: rc.reduced.clone(),
        ranks,
        poincare,
        identity_holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseBottReport {
    pub identity: IdentityReport,
    pub collections: Vec<CollectionReport>,
    pub counts: CountProfile,
}

impl MorseBottReport {
    pub fn all_hold(&self) -> bool {
        self.identity.all_hold()
            && self.collections.iter().all(|c| c.identity_holds)
            && self.counts.tilde_decomposition_holds()
    }
}

fn reduced_reports(
    k: &Complex,
    f: &CellFunction,
) -> Result<Vec<CollectionReport>, InequalityError> {
    let colls = collections(k, f);
    if !check_morse_bott_with(k, f, &colls).is_morse_bott() {
        return Err(InequalityError::NotMorseBott);
    }
    let rcs = reduce_all(k, f, &colls)?;
    crate::par::map(&rcs, |rc| collection_report(k, rc))
        .into_iter()
        .collect()
}

/// `Σ_C P_t(C^red) = P_t(K) + (1+t) R(t)` with
/// `R(t) = Σ_{k≥1} (rank B_{k-1} − d̃_k − Σ_C rank B^C_{k-1}) t^{k-1}`.
pub fn morse_bott_identity(
    k: &Complex,
    f: &CellFunction,
) -> Result<MorseBottReport, InequalityError> {
    f.check_domain(k)?;
    let colls = reduced_reports(k, f)?;
    let counts = count_profile(k, f, &all_cells(k))?;
    let full = rank_profile(&chain_complex_full(k));
    let lhs: IntPolynomial = colls.iter().map(|c| &c.poincare).sum();
    let r: Vec<i64> = (1..counts.c.len())
        .map(|j| {
            let inner: usize = colls.iter().map(|c| c.ranks.boundary_below(j)).sum();
            full.boundary_below(j) as i64 - counts.d_tilde[j] as i64 - inner as i64
        })
        .collect();
    Ok(MorseBottReport {
        identity: IdentityReport::new(lhs, &full, signed(&r)),
        collections: colls,
        counts,
    })
}

/// The two equalities that turn the Morse–Bott identity into the Morse identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub reduced_sum: IntPolynomial,
    pub critical: IntPolynomial,
    /// `Σ_C P_t(C^red) = Σ m_k t^k`.
    pub poincare_matches: bool,
    /// `d_k = d̃_k + Σ_C rank B^C_{k-1}` for all `k`.
    pub counts_match: bool,
}

impl ReductionReport {
    pub fn holds(&self) -> bool {
        self.poincare_matches && self.counts_match
    }
}

pub fn reduction_check(k: &Complex, f: &CellFunction) -> Result<ReductionReport, InequalityError> {
    require_morse(k, f)?;
    let colls = reduced_reports(k, f)?;
    let counts = count_profile(k, f, &all_cells(k))?;
    let reduced_sum: IntPolynomial = colls.iter().map(|c| &c.poincare).sum();
    let critical = IntPolynomial::from_counts(&counts.m);
    let counts_match = (0..counts.c.len()).all(|j| {
        let inner: usize = colls.iter().map(|c| c.ranks.boundary_below(j)).sum();
        counts.d[j] == counts.d_tilde[j] + inner
    });
    Ok(ReductionReport {
        poincare_matches: reduced_sum == critical,
        reduced_sum,
        critical,
        counts_match,
    })
}

/// Outcome of the cycle restriction statement for one cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum RestrictionOutcome {
    /// `x^red` is a nonzero cycle of `∂^C` for the collection of `alpha`.
    Holds { alpha: CellId },
    /// The restriction is zero or not a cycle.
    Fails { alpha: CellId },
    /// No maximal support cell lies in a reduced collection, so nothing is claimed.
    NoHypothesisCell,
}

/// Restricts a nonzero `k`-cycle `x` to `A ∩ C^red`, where `C^red` contains a
/// support cell of maximal value, and checks that the result is a nonzero cycle of `∂^C`.
pub fn lemmbpoly_check(
    k: &Complex,
    f: &CellFunction,
    dim: usize,
    x: &[(CellId, BigInt)],
) -> Result<RestrictionOutcome, InequalityError> {
    f.check_domain(k)?;
    let support: Vec<(CellId, BigInt)> = x.iter().filter(|(_, a)| !a.is_zero()).cloned().collect();
    if support.is_empty() || support.iter().any(|(c, _)| k.dim(*c) != dim) {
        return Err(InequalityError::NotACycle);
    }
    let full = chain_complex_full(k);
    if !full.boundary_of(dim, &support).is_empty() {
        return Err(InequalityError::NotACycle);
    }
    let colls = collections(k, f);
    if !check_morse_bott_with(k, f, &colls).is_morse_bott() {
        return Err(InequalityError::NotMorseBott);
    }
    let rcs = reduce_all(k, f, &colls)?;
    let top = support
        .iter()
        .map(|(c, _)| f.value(*c))
        .max()
        .expect("nonempty support");
    let Some(alpha) = support
        .iter()
        .map(|(c, _)| *c)
        .find(|&c| f.value(c) == top && rcs[colls.index_of(c)].in_reduced(c))
    else {
        return Ok(RestrictionOutcome::NoHypothesisCell);
    };
    let rc = &rcs[colls.index_of(alpha)];
    let restricted: Vec<(CellId, BigInt)> = support
        .iter()
        .filter(|(c, _)| rc.in_reduced(*c))
        .cloned()
        .collect();
    let cc = chain_complex_reduced(k, rc)?;
    if !restricted.is_empty() && cc.boundary_of(dim, &restricted).is_empty() {
        Ok(RestrictionOutcome::Holds { alpha })
    } else {
        Ok(RestrictionOutcome::Fails { alpha })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bott::tests::{triangle_left, triangle_right};
    use crate::complex::tests::filled_triangle;
    use crate::function::tests::square_left;
    use crate::function::Value;
    use crate::gradient::{synthesize_morse, VectorField};
    use crate::homology::integer_kernel;

    fn hollow_triangle() -> Complex {
        Complex::from_simplicial(&[vec!["a", "b"], vec!["a", "c"], vec!["b", "c"]]).unwrap()
    }

    fn perfect_hollow() -> (Complex, CellFunction) {
        let k = hollow_triangle();
        let v = VectorField::from_named(&k, &[("b", "ab"), ("c", "bc")]).unwrap();
        let g = synthesize_morse(&k, &v).unwrap();
        (k, g)
    }

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::new(c.to_vec())
    }

    #[test]
    fn dimension_function_counts() {
        let k = filled_triangle();
        let f = CellFunction::dimension(&k);
        let c = count_profile(&k, &f, &all_cells(&k)).unwrap();
        assert_eq!(c.m, vec![3, 3, 1]);
        assert_eq!(c.u, vec![0, 0, 0]);
        assert!(c.plain_decomposition_holds() && c.tilde_decomposition_holds());

        let a: BTreeSet<CellId> = [k.id("a").unwrap()].into();
        let c = count_profile(&k, &f, &a).unwrap();
        assert_eq!((c.c, c.m), (vec![1, 0, 0], vec![1, 0, 0]));

        let ab: BTreeSet<CellId> = [k.id("ab").unwrap()].into();
        assert!(matches!(
            count_profile(&k, &f, &ab),
            Err(InequalityError::NotASubcomplex(_))
        ));
    }

    #[test]
    fn square_left_strict_counts() {
        // snc facet pairs: B > AB, C > BC, D > BD; nothing strict between edges and higher cells
        let (k, f) = square_left();
        let c = count_profile(&k, &f, &all_cells(&k)).unwrap();
        assert_eq!(c.d_tilde, vec![0, 3]);
        assert_eq!(c.u_tilde, vec![3, 0]);
        assert_eq!(c.m_tilde, vec![1, 2]);
        assert!(c.tilde_decomposition_holds());
        assert!(!c.plain_decomposition_holds());
    }

    #[test]
    fn morse_identity_on_dimension_function() {
        let k = filled_triangle();
        let r = morse_identity(&k, &CellFunction::dimension(&k)).unwrap();
        assert_eq!(r.lhs, p(&[3, 3, 1]));
        assert_eq!(r.p_k, p(&[1]));
        assert_eq!(r.residual, p(&[2, 1]));
        assert!(r.all_hold());
    }

    #[test]
    fn morse_identity_on_perfect_hollow_triangle() {
        let (k, g) = perfect_hollow();
        let r = morse_identity(&k, &g).unwrap();
        assert_eq!(r.lhs, p(&[1, 1]));
        assert_eq!(r.residual, IntPolynomial::zero());
        assert!(r.all_hold());
    }

    #[test]
    fn single_vertex_identity() {
        let k = Complex::from_simplicial(&[vec!["v"]]).unwrap();
        let f = CellFunction::constant(&k, Value::integer(0));
        let r = morse_identity(&k, &f).unwrap();
        assert_eq!(
            (r.lhs.clone(), r.residual.clone()),
            (p(&[1]), IntPolynomial::zero())
        );
        assert!(r.all_hold());
    }

    #[test]
    fn square_left_morse_bott_identity() {
        let (k, f) = square_left();
        let r = morse_bott_identity(&k, &f).unwrap();
        assert_eq!(r.identity.lhs, p(&[1, 2]));
        assert_eq!(r.identity.p_k, p(&[1, 2]));
        assert_eq!(r.identity.residual, IntPolynomial::zero());
        assert!(r.all_hold());
        assert_eq!(morse_identity(&k, &f), Err(InequalityError::NotMorse));
    }

    #[test]
    fn triangles_morse_bott_identity() {
        let (k, f) = triangle_right();
        let r = morse_bott_identity(&k, &f).unwrap();
        // critical a, b, c, ab plus P_t(C^red) = t
        assert_eq!(r.identity.lhs, p(&[3, 2]));
        assert_eq!(r.identity.p_k, p(&[1]));
        assert_eq!(r.identity.residual, p(&[2]));
        assert!(r.all_hold());

        let (k, f) = triangle_left();
        assert!(morse_bott_identity(&k, &f).unwrap().all_hold());
    }

    #[test]
    fn reduction_on_perfect_hollow_triangle() {
        let (k, g) = perfect_hollow();
        let r = reduction_check(&k, &g).unwrap();
        assert!(r.holds());
        let mb = morse_bott_identity(&k, &g).unwrap();
        let pairs: Vec<_> = mb
            .collections
            .iter()
            .filter(|c| c.cells.len() == 2)
            .collect();
        assert_eq!(pairs.len(), 2);
        for c in pairs {
            assert_eq!(c.poincare, IntPolynomial::zero());
            assert_eq!(c.ranks.boundary_below(1), 1);
        }
        let f = CellFunction::dimension(&k);
        assert!(reduction_check(&k, &f).unwrap().holds());
    }

    #[test]
    fn cycle_restriction_on_constant_edges() {
        let k = hollow_triangle();
        let mut f = CellFunction::dimension(&k);
        for e in ["ab", "ac", "bc"] {
            f.set(k.id(e).unwrap(), Value::integer(5));
        }
        let full = chain_complex_full(&k);
        let z = integer_kernel(&full.boundaries[1]);
        assert_eq!(z.len(), 1);
        let x: Vec<(CellId, BigInt)> = full.bases[1]
            .iter()
            .copied()
            .zip(z[0].iter().cloned())
            .collect();
        assert!(matches!(
            lemmbpoly_check(&k, &f, 1, &x).unwrap(),
            RestrictionOutcome::Holds { .. }
        ));
        let not_cycle = vec![(k.id("ab").unwrap(), BigInt::from(1))];
        assert_eq!(
            lemmbpoly_check(&k, &f, 1, &not_cycle),
            Err(InequalityError::NotACycle)
        );
    }
}
