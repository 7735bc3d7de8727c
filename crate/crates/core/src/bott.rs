//! Collections, discrete Morse–Bott validation and reduced collections.
//!
//! A collection is a connected component of the graph on a level set
//! `f⁻¹(c)` whose edges are the facet pairs inside that level set. Every
//! function partitions the complex into collections; Morse–Bott validation is
//! a separate pass over that partition.

use std::collections::BTreeSet;

use petgraph::unionfind::UnionFind;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{CellId, Complex};
use crate::function::{CellFunction, FunctionError, Value};
use crate::morse::check_morse;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collection {
    pub value: Value,
    /// Sorted by id.
    pub cells: Vec<CellId>,
}

impl Collection {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: CellId) -> bool {
        self.cells.binary_search(&c).is_ok()
    }
}

/// The partition of a complex into collections, with per-cell lookup.
#[derive(Clone, Debug)]
pub struct Collections {
    list: Vec<Collection>,
    owner: Vec<usize>,
}

impl Collections {
    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Collection> {
        self.list.iter()
    }

    pub fn as_slice(&self) -> &[Collection] {
        &self.list
    }

    /// `C_f(σ)`.
    pub fn of(&self, c: CellId) -> &Collection {
        &self.list[self.owner[c.index()]]
    }

    pub fn index_of(&self, c: CellId) -> usize {
        self.owner[c.index()]
    }
}

impl<'a> IntoIterator for &'a Collections {
    type Item = &'a Collection;
    type IntoIter = std::slice::Iter<'a, Collection>;

    fn into_iter(self) -> Self::IntoIter {
        self.list.iter()
    }
}

/// Computes the collections of `f`, ordered by (value, smallest cell id).
pub fn collections(k: &Complex, f: &CellFunction) -> Collections {
    let n = k.len();
    let mut uf = UnionFind::<usize>::new(n);
    for cv in k.coverings() {
        if f.value(cv.face) == f.value(cv.cell) {
            uf.union(cv.face.index(), cv.cell.index());
        }
    }
    let labels = uf.into_labeling();
    let mut groups: std::collections::BTreeMap<usize, Vec<CellId>> = Default::default();
    for (i, root) in labels.into_iter().enumerate() {
        groups.entry(root).or_default().push(CellId(i as u32));
    }
    let mut list: Vec<Collection> = groups
        .into_values()
        .map(|cells| Collection {
            value: f.value(cells[0]).clone(),
            cells,
        })
        .collect();
    list.sort_by(|a, b| (&a.value, a.cells[0]).cmp(&(&b.value, b.cells[0])));
    let mut owner = vec![0; n];
    for (i, c) in list.iter().enumerate() {
        for &cell in &c.cells {
            owner[cell.index()] = i;
        }
    }
    Collections { list, owner }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum MorseBottCondition {
    MB1,
    MB2,
    MB3,
    MB4,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MorseBottViolation {
    pub cell: CellId,
    pub condition: MorseBottCondition,
    /// For MB2/MB4 these are the counted cells, so `witnesses.len()` is `U^C` or `D^C`.
    pub witnesses: Vec<CellId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MorseBottVerdict {
    pub violations: Vec<MorseBottViolation>,
}

impl MorseBottVerdict {
    pub fn is_morse_bott(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn of(&self, condition: MorseBottCondition) -> impl Iterator<Item = &MorseBottViolation> {
        self.violations
            .iter()
            .filter(move |v| v.condition == condition)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BottError {
    #[error(transparent)]
    Domain(#[from] FunctionError),
    #[error("function is not discrete Morse-Bott")]
    NotMorseBott,
    #[error("cell `{0}` is both upward and downward noncritical")]
    TrichotomyViolation(String),
    #[error("closure difference of the collection at value {value} is not a subcomplex: `{face}` is missing")]
    SubcomplexViolation { value: String, face: String },
    #[error("cell `{0}` lies in a closure difference at the collection value but is not upward noncritical")]
    UpwardViolation(String),
}

fn cells_outside<'a>(
    c: &'a Collection,
    it: impl Iterator<Item = CellId> + 'a,
) -> impl Iterator<Item = CellId> + 'a {
    it.filter(move |x| !c.contains(*x))
}

/// Cofacets counted by `U^C(σ)`.
pub fn up_witnesses(k: &Complex, f: &CellFunction, c: &Collection, s: CellId) -> Vec<CellId> {
    cells_outside(c, f.nc_cofacets(k, s)).collect()
}

/// Facets counted by `D^C(σ)`.
pub fn down_witnesses(k: &Complex, f: &CellFunction, c: &Collection, s: CellId) -> Vec<CellId> {
    cells_outside(c, f.nc_facets(k, s)).collect()
}

fn mb_violations_at(
    k: &Complex,
    f: &CellFunction,
    colls: &Collections,
    s: CellId,
) -> Vec<MorseBottViolation> {
    let c = colls.of(s);
    let mut out = Vec::new();
    let mut push = |condition, witnesses: Vec<CellId>| {
        if !witnesses.is_empty() {
            out.push(MorseBottViolation {
                cell: s,
                condition,
                witnesses,
            });
        }
    };
    // irr< at any dimension gap, looking up from σ
    let irr_up: Vec<CellId> = k
        .cells()
        .filter(|&t| k.dim(t) > k.dim(s) && k.is_irregular_face(s, t) && f.value(s) >= f.value(t))
        .collect();
    push(MorseBottCondition::MB1, irr_up);
    let up = up_witnesses(k, f, c, s);
    push(
        MorseBottCondition::MB2,
        if up.len() > 1 { up } else { Vec::new() },
    );
    let irr_down: Vec<CellId> = k
        .faces(s)
        .iter()
        .copied()
        .filter(|&n| k.is_irregular_face(n, s) && f.value(n) >= f.value(s))
        .collect();
    push(MorseBottCondition::MB3, irr_down);
    let down = down_witnesses(k, f, c, s);
    push(
        MorseBottCondition::MB4,
        if down.len() > 1 { down } else { Vec::new() },
    );
    out
}

/// Checks (MB1)–(MB4) relative to the collections of `f`.
pub fn check_morse_bott(k: &Complex, f: &CellFunction) -> Result<MorseBottVerdict, BottError> {
    f.check_domain(k)?;
    let colls = collections(k, f);
    Ok(check_morse_bott_with(k, f, &colls))
}

pub fn check_morse_bott_with(
    k: &Complex,
    f: &CellFunction,
    colls: &Collections,
) -> MorseBottVerdict {
    let cells: Vec<CellId> = k.cells().collect();
    MorseBottVerdict {
        violations: crate::par::flat_map(&cells, |&s| mb_violations_at(k, f, colls, s)),
    }
}

/// A collection split into its reduced part and its upward/downward noncritical cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedCollection {
    pub collection: Collection,
    pub reduced: Vec<CellId>,
    pub removed_up: Vec<CellId>,
    pub removed_down: Vec<CellId>,
}

impl ReducedCollection {
    pub fn value(&self) -> &Value {
        &self.collection.value
    }

    pub fn in_reduced(&self, c: CellId) -> bool {
        self.reduced.binary_search(&c).is_ok()
    }

    /// `C = C^red`.
    pub fn is_unreduced(&self) -> bool {
        self.reduced.len() == self.collection.len()
    }

    /// `#{k-cells of C^red}`, indexed by dimension up to `top`.
    pub fn reduced_counts(&self, k: &Complex, top: usize) -> Vec<usize> {
        let mut out = vec![0; top];
        for &c in &self.reduced {
            out[k.dim(c)] += 1;
        }
        out
    }
}

/// Splits `c` without validating trichotomy: a cell with `U^C ≥ 1` is listed
/// as upward, one with `D^C ≥ 1` as downward, possibly both. For Morse–Bott
/// functions the counters never exceed one.
pub fn classify(k: &Complex, f: &CellFunction, c: &Collection) -> ReducedCollection {
    let mut reduced = Vec::new();
    let mut removed_up = Vec::new();
    let mut removed_down = Vec::new();
    for &s in &c.cells {
        let up = !up_witnesses(k, f, c, s).is_empty();
        let down = !down_witnesses(k, f, c, s).is_empty();
        if up {
            removed_up.push(s);
        }
        if down {
            removed_down.push(s);
        }
        if !up && !down {
            reduced.push(s);
        }
    }
    ReducedCollection {
        collection: c.clone(),
        reduced,
        removed_up,
        removed_down,
    }
}

/// The reduced collection `C^red`, rejecting cells that are both upward and downward noncritical.
pub fn reduce(
    k: &Complex,
    f: &CellFunction,
    c: &Collection,
) -> Result<ReducedCollection, BottError> {
    let rc = classify(k, f, c);
    if let Some(&s) = rc
        .removed_up
        .iter()
        .find(|s| rc.removed_down.binary_search(s).is_ok())
    {
        return Err(BottError::TrichotomyViolation(k.name(s).to_string()));
    }
    Ok(rc)
}

/// Reduces every collection.
pub fn reduce_all(
    k: &Complex,
    f: &CellFunction,
    colls: &Collections,
) -> Result<Vec<ReducedCollection>, BottError> {
    colls.iter().map(|c| reduce(k, f, c)).collect()
}

/// Both sides of the Morse ⇔ Morse–Bott structure equivalence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StructureEquivalence {
    pub is_morse: bool,
    pub is_morse_bott: bool,
    /// Every collection is a singleton, or an unreduced pair.
    pub small_collections: bool,
}

impl StructureEquivalence {
    pub fn bott_side(&self) -> bool {
        self.is_morse_bott && self.small_collections
    }

    pub fn holds(&self) -> bool {
        self.is_morse == self.bott_side()
    }
}

pub fn check_morse_iff_bott(
    k: &Complex,
    f: &CellFunction,
) -> Result<StructureEquivalence, BottError> {
    let is_morse = check_morse(k, f)
        .map_err(|e| match e {
            crate::morse::MorseError::Domain(d) => BottError::Domain(d),
            crate::morse::MorseError::NotMorse => BottError::NotMorseBott,
        })?
        .is_morse();
    let colls = collections(k, f);
    let is_morse_bott = check_morse_bott_with(k, f, &colls).is_morse_bott();
    let small_collections = colls
        .iter()
        .all(|c| c.len() == 1 || (c.len() == 2 && classify(k, f, c).is_unreduced()));
    Ok(StructureEquivalence {
        is_morse,
        is_morse_bott,
        small_collections,
    })
}

/// `cl(C^red) ∖ C^red`, verified to be a subcomplex whose cells at the
/// collection value are upward noncritical in their own collections.
pub fn closure_difference(
    k: &Complex,
    f: &CellFunction,
    colls: &Collections,
    rc: &ReducedCollection,
) -> Result<BTreeSet<CellId>, BottError> {
    let reduced: BTreeSet<CellId> = rc.reduced.iter().copied().collect();
    let diff: BTreeSet<CellId> = k.closure(&reduced).difference(&reduced).copied().collect();
    for &s in &diff {
        if let Some(missing) = k.faces(s).iter().find(|x| !diff.contains(x)) {
            return Err(BottError::SubcomplexViolation {
                value: rc.value().to_string(),
                face: k.name(*missing).to_string(),
            });
        }
        if f.value(s) == rc.value() && up_witnesses(k, f, colls.of(s), s).len() != 1 {
            return Err(BottError::UpwardViolation(k.name(s).to_string()));
        }
    }
    Ok(diff)
}

/// A structural statement about Morse–Bott functions that failed on an input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LemmaViolation {
    /// An upward noncritical cell has a facet in its collection that is not upward noncritical.
    UpwardFacet { cell: CellId, facet: CellId },
    /// A cell is both upward and downward noncritical.
    Trichotomy { cell: CellId },
    /// `ν snc< τ` without an intermediate `σ` with `ν snc≺ σ ≤ τ`.
    StrictDescent { face: CellId, cell: CellId },
    /// `cl(C^red) ∖ C^red` misses a face, or has a non-upward cell at the collection value.
    ClosureDifference { collection: usize, detail: String },
}

/// Runs the structural lemmas for Morse–Bott functions against `f` and
/// returns every failure. Errors if `f` is not Morse–Bott.
pub fn lemma_audit(k: &Complex, f: &CellFunction) -> Result<Vec<LemmaViolation>, BottError> {
    f.check_domain(k)?;
    let colls = collections(k, f);
    if !check_morse_bott_with(k, f, &colls).is_morse_bott() {
        return Err(BottError::NotMorseBott);
    }
    let mut out = Vec::new();
    let rcs: Vec<ReducedCollection> = colls.iter().map(|c| classify(k, f, c)).collect();
    for (i, rc) in rcs.iter().enumerate() {
        for &s in &rc.removed_up {
            if rc.removed_down.binary_search(&s).is_ok() {
                out.push(LemmaViolation::Trichotomy { cell: s });
            }
            for n in k.facets(s).filter(|&n| rc.collection.contains(n)) {
                if rc.removed_up.binary_search(&n).is_err() {
                    out.push(LemmaViolation::UpwardFacet { cell: s, facet: n });
                }
            }
        }
        if let Err(e) = closure_difference(k, f, &colls, rc) {
            out.push(LemmaViolation::ClosureDifference {
                collection: i,
                detail: e.to_string(),
            });
        }
    }
    for t in k.cells() {
        for &n in k.faces(t) {
            if f.value(n) > f.value(t) && !has_strict_step(k, f, n, t) {
                out.push(LemmaViolation::StrictDescent { face: n, cell: t });
            }
        }
    }
    Ok(out)
}

/// Whether some `σ` with `ν ≺ σ ≤ τ` has `f(ν) > f(σ)`.
fn has_strict_step(k: &Complex, f: &CellFunction, n: CellId, t: CellId) -> bool {
    k.cofacets(n)
        .any(|s| (s == t || k.is_face(s, t)) && f.value(n) > f.value(s))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::complex::tests::filled_triangle;
    use crate::function::tests::{square_left, square_right};

    /// Left triangle of the reduced-collection example.
    /// Vertices ν0 = a (2), ν1 = b (1), ν2 = c (3); edges σ0 = ab (2), σ1 = ac (4), σ2 = bc (2); τ = abc (2).
    pub fn triangle_left() -> (Complex, CellFunction) {
        let k = filled_triangle();
        let f = CellFunction::from_ints(
            &k,
            &[
                ("a", 2),
                ("b", 1),
                ("c", 3),
                ("ab", 2),
                ("ac", 4),
                ("bc", 2),
                ("abc", 2),
            ],
        )
        .unwrap();
        (k, f)
    }

    /// Right triangle: vertices a (1), b (1), c (2); edges σ0 = ab (2), σ1 = ac (3), σ2 = bc (3); τ = abc (3).
    pub fn triangle_right() -> (Complex, CellFunction) {
        let k = filled_triangle();
        let f = CellFunction::from_ints(
            &k,
            &[
                ("a", 1),
                ("b", 1),
                ("c", 2),
                ("ab", 2),
                ("ac", 3),
                ("bc", 3),
                ("abc", 3),
            ],
        )
        .unwrap();
        (k, f)
    }

    fn names(k: &Complex, ids: &[CellId]) -> Vec<String> {
        let mut v: Vec<String> = ids.iter().map(|&c| k.name(c).to_string()).collect();
        v.sort();
        v
    }

    fn sorted(v: &[&str]) -> Vec<String> {
        let mut v: Vec<String> = v.iter().map(|s| s.to_string()).collect();
        v.sort();
        v
    }

    #[test]
    fn square_left_collections() {
        let (k, f) = square_left();
        let colls = collections(&k, &f);
        let got: Vec<Vec<String>> = colls.iter().map(|c| names(&k, &c.cells)).collect();
        assert_eq!(
            got,
            vec![
                sorted(&["A", "AB"]),
                sorted(&["B", "BC", "BD"]),
                sorted(&["C", "D", "AC", "CD"])
            ]
        );
        assert!(check_morse_bott(&k, &f).unwrap().is_morse_bott());
        let rcs = reduce_all(&k, &f, &colls).unwrap();
        let reduced: Vec<Vec<String>> = rcs.iter().map(|r| names(&k, &r.reduced)).collect();
        assert_eq!(reduced, vec![sorted(&["A"]), vec![], sorted(&["AC", "CD"])]);
    }

    #[test]
    fn square_right_fails_at_marked_cell() {
        let (k, f) = square_right();
        let v = check_morse_bott(&k, &f).unwrap();
        assert_eq!(v.violations.len(), 1);
        let viol = &v.violations[0];
        assert_eq!(k.name(viol.cell), "C");
        assert_eq!(viol.condition, MorseBottCondition::MB2);
        assert_eq!(names(&k, &viol.witnesses), sorted(&["BC", "CD"]));
    }

    #[test]
    fn distinct_values_give_singletons() {
        let k = filled_triangle();
        let f = CellFunction::from_values(k.cells().map(|c| Value::integer(c.0 as i64)).collect());
        assert!(collections(&k, &f).iter().all(|c| c.len() == 1));
    }

    #[test]
    fn triangle_left_reduces() {
        let (k, f) = triangle_left();
        let colls = collections(&k, &f);
        let c = colls.of(k.id("abc").unwrap());
        assert_eq!(names(&k, &c.cells), sorted(&["a", "ab", "bc", "abc"]));
        assert_eq!(c.value, Value::integer(2));
        assert!(check_morse_bott(&k, &f).unwrap().is_morse_bott());
        let rc = reduce(&k, &f, c).unwrap();
        assert_eq!(names(&k, &rc.reduced), sorted(&["a", "ab"]));
        assert_eq!(names(&k, &rc.removed_down), sorted(&["bc", "abc"]));
        let diff = closure_difference(&k, &f, &colls, &rc).unwrap();
        assert_eq!(k.names_of(&diff), vec!["b"]);
    }

    #[test]
    fn triangle_right_is_unreduced() {
        let (k, f) = triangle_right();
        let colls = collections(&k, &f);
        let c = colls.of(k.id("abc").unwrap());
        assert_eq!(names(&k, &c.cells), sorted(&["ac", "bc", "abc"]));
        let rc = reduce(&k, &f, c).unwrap();
        assert!(rc.is_unreduced());
        // the bottom edge is a face of τ outside the collection
        let diff = closure_difference(&k, &f, &colls, &rc).unwrap();
        assert_eq!(k.names_of(&diff), vec!["a", "b", "c", "ab"]);
    }

    #[test]
    fn critical_singleton_is_unreduced() {
        let k = filled_triangle();
        let f = CellFunction::dimension(&k);
        let colls = collections(&k, &f);
        for c in &colls {
            assert_eq!(c.len(), 1);
            let rc = reduce(&k, &f, c).unwrap();
            assert_eq!(rc.reduced, c.cells);
            if k.dim(c.cells[0]) == 0 {
                assert!(closure_difference(&k, &f, &colls, &rc).unwrap().is_empty());
            }
        }
        let eq = check_morse_iff_bott(&k, &f).unwrap();
        assert!(eq.is_morse && eq.bott_side() && eq.holds());
    }

    #[test]
    fn equivalence_on_square_left() {
        let (k, f) = square_left();
        let eq = check_morse_iff_bott(&k, &f).unwrap();
        assert!(!eq.is_morse);
        assert!(eq.is_morse_bott);
        assert!(!eq.small_collections);
        assert!(eq.holds());
    }

    #[test]
    fn fixtures_pass_lemma_audit() {
        for (k, f) in [square_left(), triangle_left(), triangle_right()] {
            assert_eq!(lemma_audit(&k, &f).unwrap(), vec![]);
        }
        let (k, f) = square_right();
        assert_eq!(lemma_audit(&k, &f), Err(BottError::NotMorseBott));
    }

    #[test]
    fn trichotomy_violation_is_reported() {
        // a(5) nc≺ ab(4) nc≺ abc(3): ab is upward and downward noncritical.
        // abc has three nc facets, so the function is not Morse-Bott.
        let k = filled_triangle();
        let f = CellFunction::from_ints(
            &k,
            &[
                ("a", 5),
                ("b", 0),
                ("c", 0),
                ("ab", 4),
                ("ac", 6),
                ("bc", 1),
                ("abc", 3),
            ],
        )
        .unwrap();
        let colls = collections(&k, &f);
        let ab = colls.of(k.id("ab").unwrap());
        assert_eq!(
            reduce(&k, &f, ab),
            Err(BottError::TrichotomyViolation("ab".into()))
        );
        assert!(!check_morse_bott(&k, &f).unwrap().is_morse_bott());
    }
}
