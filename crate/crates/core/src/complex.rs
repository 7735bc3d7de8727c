//! Combinatorial model of a finite CW complex.
//!
//! A [`Complex`] is a graded poset of cells. The covering relation carries an
//! integer incidence number and a regularity flag; regularity of comparable
//! pairs further apart than one dimension is regular unless the pair is
//! listed as deep-irregular. Complexes are immutable once built, and
//! subcomplexes are plain sets of [`CellId`]s against the parent.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Dense index of a cell inside its [`Complex`].
///
/// Ids are assigned in `(dim, name)` order, so sorting ids sorts cells by
/// dimension first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CellId(pub u32);

impl CellId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Input description of a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSpec {
    pub name: String,
    pub dim: usize,
}

impl CellSpec {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
        }
    }
}

/// Input description of a covering pair `face ≺ cell` with incidence `[cell:face]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSpec {
    pub face: String,
    pub cell: String,
    pub incidence: i64,
    pub regular: bool,
}

impl CoverSpec {
    pub fn new(
        face: impl Into<String>,
        cell: impl Into<String>,
        incidence: i64,
        regular: bool,
    ) -> Self {
        Self {
            face: face.into(),
            cell: cell.into(),
            incidence,
            regular,
        }
    }
}

/// A validated covering pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Covering {
    pub face: CellId,
    pub cell: CellId,
    pub incidence: i64,
    pub regular: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("duplicate cell id `{0}`")]
    DuplicateId(String),
    #[error("reference to unknown cell `{0}`")]
    DanglingReference(String),
    #[error("covering `{face}` < `{cell}` has dimension gap {gap}, expected 1")]
    GradingViolation {
        face: String,
        cell: String,
        gap: i64,
    },
    #[error("covering `{face}` < `{cell}` is listed twice")]
    DuplicateCovering { face: String, cell: String },
    #[error(
        "boundary of boundary is nonzero: coefficient {coefficient} of `{face}` in dd(`{cell}`)"
    )]
    BoundarySquareNonzero {
        face: String,
        cell: String,
        coefficient: i64,
    },
    #[error("regular facet `{face}` of `{cell}` has incidence {incidence}, expected +1 or -1")]
    RegularityInconsistent {
        face: String,
        cell: String,
        incidence: i64,
    },
    #[error("regular face `{face}` < `{cell}` has an empty interval")]
    RegfaceViolation { face: String, cell: String },
    #[error(
        "deep irregular pair `{face}` < `{cell}` is not a face pair of dimension gap at least 2"
    )]
    InvalidDeepPair { face: String, cell: String },
    #[error("empty simplex")]
    EmptySimplex,
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("`{face}` is not a face of `{cell}`")]
    NotAFace { face: String, cell: String },
    #[error("`{0}` and `{1}` are not comparable")]
    NotComparable(String, String),
}

/// A finite, validated CW complex presented combinatorially.
#[derive(Clone, Debug)]
pub struct Complex {
    names: Vec<String>,
    dims: Vec<usize>,
    index: HashMap<String, CellId>,
    coverings: Vec<Covering>,
    /// covering indices where the cell is the face
    up: Vec<Vec<usize>>,
    /// covering indices where the cell is the coface
    down: Vec<Vec<usize>>,
    /// all faces (transitive), sorted
    below: Vec<Vec<CellId>>,
    deep_irregular: BTreeSet<(CellId, CellId)>,
    by_dim: Vec<Vec<CellId>>,
}

impl Complex {
    /// Builds and validates a complex.
    pub fn build(
        cells: &[CellSpec],
        coverings: &[CoverSpec],
        deep_irregular: &[(String, String)],
    ) -> Result<Self, ComplexError> {
        let mut sorted: Vec<&CellSpec> = cells.iter().collect();
        sorted.sort_by(|a, b| (a.dim, &a.name).cmp(&(b.dim, &b.name)));
        let mut index = HashMap::with_capacity(sorted.len());
        for (i, c) in sorted.iter().enumerate() {
            if index.insert(c.name.clone(), CellId(i as u32)).is_some() {
                return Err(ComplexError::DuplicateId(c.name.clone()));
            }
        }
        let names: Vec<String> = sorted.iter().map(|c| c.name.clone()).collect();
        let dims: Vec<usize> = sorted.iter().map(|c| c.dim).collect();
        let n = names.len();
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| ComplexError::DanglingReference(name.to_string()))
        };

        let mut covs = Vec::with_capacity(coverings.len());
        let mut seen = HashSet::new();
        for c in coverings {
            let face = lookup(&c.face)?;
            let cell = lookup(&c.cell)?;
            let gap = dims[cell.index()] as i64 - dims[face.index()] as i64;
            if gap != 1 {
                return Err(ComplexError::GradingViolation {
                    face: c.face.clone(),
                    cell: c.cell.clone(),
                    gap,
                });
            }
            if !seen.insert((face, cell)) {
                return Err(ComplexError::DuplicateCovering {
                    face: c.face.clone(),
                    cell: c.cell.clone(),
                });
            }
            if c.regular && c.incidence.abs() != 1 {
                return Err(ComplexError::RegularityInconsistent {
                    face: c.face.clone(),
                    cell: c.cell.clone(),
                    incidence: c.incidence,
                });
            }
            covs.push(Covering {
                face,
                cell,
                incidence: c.incidence,
                regular: c.regular,
            });
        }
        covs.sort_by_key(|c| (c.cell, c.face));

        let mut up = vec![Vec::new(); n];
        let mut down = vec![Vec::new(); n];
        for (i, c) in covs.iter().enumerate() {
            up[c.face.index()].push(i);
            down[c.cell.index()].push(i);
        }

        // Ids are sorted by dimension and every covering raises dimension by
        // one, so a single pass in id order sees all facets first.
        let mut below: Vec<Vec<CellId>> = vec![Vec::new(); n];
        for t in 0..n {
            let mut acc = BTreeSet::new();
            for &ci in &down[t] {
                let f = covs[ci].face;
                acc.insert(f);
                acc.extend(below[f.index()].iter().copied());
            }
            below[t] = acc.into_iter().collect();
        }

        let max_dim = dims.iter().copied().max().unwrap_or(0);
        let mut by_dim = vec![Vec::new(); if n == 0 { 0 } else { max_dim + 1 }];
        for i in 0..n {
            by_dim[dims[i]].push(CellId(i as u32));
        }

        let mut deep = BTreeSet::new();
        for (f, c) in deep_irregular {
            let face = lookup(f)?;
            let cell = lookup(c)?;
            let gap = dims[cell.index()] as i64 - dims[face.index()] as i64;
            if gap < 2 || below[cell.index()].binary_search(&face).is_err() {
                return Err(ComplexError::InvalidDeepPair {
                    face: f.clone(),
                    cell: c.clone(),
                });
            }
            deep.insert((face, cell));
        }

        let complex = Self {
            names,
            dims,
            index,
            coverings: covs,
            up,
            down,
            below,
            deep_irregular: deep,
            by_dim,
        };
        complex.check_boundary_square()?;
        complex.check_regface()?;
        Ok(complex)
    }

    fn check_boundary_square(&self) -> Result<(), ComplexError> {
        for t in 0..self.len() {
            let mut acc: HashMap<CellId, i64> = HashMap::new();
            for &ci in &self.down[t] {
                let a = self.coverings[ci];
                for &cj in &self.down[a.face.index()] {
                    let b = self.coverings[cj];
                    *acc.entry(b.face).or_insert(0) += a.incidence * b.incidence;
                }
            }
            let mut bad: Vec<_> = acc.into_iter().filter(|&(_, v)| v != 0).collect();
            bad.sort();
            if let Some((face, coefficient)) = bad.first() {
                return Err(ComplexError::BoundarySquareNonzero {
                    face: self.name(*face).to_string(),
                    cell: self.names[t].clone(),
                    coefficient: *coefficient,
                });
            }
        }
        Ok(())
    }

    fn check_regface(&self) -> Result<(), ComplexError> {
        for t in self.cells() {
            for &s in self.faces(t) {
                if self.dim(t) - self.dim(s) >= 2
                    && self.is_regular_pair(s, t)
                    && self.interval_len(s, t) == 0
                {
                    return Err(ComplexError::RegfaceViolation {
                        face: self.name(s).to_string(),
                        cell: self.name(t).to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Builds a simplicial complex from its facets.
    ///
    /// Every nonempty subset of every facet becomes a cell. Cells are named by
    /// concatenating their sorted vertex labels, directly when all labels are
    /// single characters and joined by `-` otherwise. Incidence numbers follow
    /// the alternating-sign rule on sorted vertex lists.
    pub fn from_simplicial<S: AsRef<str>>(facets: &[Vec<S>]) -> Result<Self, ComplexError> {
        if facets.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        let mut simplices: BTreeSet<Vec<String>> = BTreeSet::new();
        for facet in facets {
            let mut vs: Vec<String> = facet.iter().map(|v| v.as_ref().to_string()).collect();
            vs.sort();
            vs.dedup();
            if vs.is_empty() {
                return Err(ComplexError::EmptySimplex);
            }
            let k = vs.len();
            for mask in 1u64..(1u64 << k) {
                let sub: Vec<String> = (0..k)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| vs[i].clone())
                    .collect();
                simplices.insert(sub);
            }
        }
        let short = simplices.iter().flatten().all(|v| v.chars().count() == 1);
        let name_of = |s: &[String]| if short { s.concat() } else { s.join("-") };

        let cells: Vec<CellSpec> = simplices
            .iter()
            .map(|s| CellSpec::new(name_of(s), s.len() - 1))
            .collect();
        let mut covers = Vec::new();
        for s in simplices.iter().filter(|s| s.len() > 1) {
            for i in 0..s.len() {
                let mut face = s.clone();
                face.remove(i);
                let sign = if i % 2 == 0 { 1 } else { -1 };
                covers.push(CoverSpec::new(name_of(&face), name_of(s), sign, true));
            }
        }
        Self::build(&cells, &covers, &[])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Highest cell dimension, or `None` for the empty complex.
    pub fn max_dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..self.len() as u32).map(CellId)
    }

    pub fn cells_of_dim(&self, k: usize) -> &[CellId] {
        self.by_dim.get(k).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of cells in each dimension.
    pub fn cell_counts(&self) -> Vec<usize> {
        self.by_dim.iter().map(Vec::len).collect()
    }

    pub fn dim(&self, c: CellId) -> usize {
        self.dims[c.index()]
    }

    pub fn name(&self, c: CellId) -> &str {
        &self.names[c.index()]
    }

    pub fn id(&self, name: &str) -> Option<CellId> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<CellId, ComplexError> {
        self.id(name)
            .ok_or_else(|| ComplexError::UnknownCell(name.to_string()))
    }

    pub fn coverings(&self) -> &[Covering] {
        &self.coverings
    }

    pub fn deep_irregular(&self) -> impl Iterator<Item = (CellId, CellId)> + '_ {
        self.deep_irregular.iter().copied()
    }

    /// Coverings in which `c` is the higher cell.
    pub fn facet_coverings(&self, c: CellId) -> impl Iterator<Item = &Covering> + '_ {
        self.down[c.index()]
            .iter()
            .map(move |&i| &self.coverings[i])
    }

    /// Coverings in which `c` is the lower cell.
    pub fn cofacet_coverings(&self, c: CellId) -> impl Iterator<Item = &Covering> + '_ {
        self.up[c.index()].iter().map(move |&i| &self.coverings[i])
    }

    pub fn facets(&self, c: CellId) -> impl Iterator<Item = CellId> + '_ {
        self.facet_coverings(c).map(|cv| cv.face)
    }

    pub fn cofacets(&self, c: CellId) -> impl Iterator<Item = CellId> + '_ {
        self.cofacet_coverings(c).map(|cv| cv.cell)
    }

    /// All faces of `c` under the transitive order, sorted by id.
    pub fn faces(&self, c: CellId) -> &[CellId] {
        &self.below[c.index()]
    }

    /// `a < b` in the face order.
    pub fn is_face(&self, a: CellId, b: CellId) -> bool {
        self.below[b.index()].binary_search(&a).is_ok()
    }

    pub fn is_facet(&self, a: CellId, b: CellId) -> bool {
        self.covering(a, b).is_some()
    }

    pub fn covering(&self, face: CellId, cell: CellId) -> Option<&Covering> {
        self.facet_coverings(cell).find(|cv| cv.face == face)
    }

    /// Incidence number `[cell:face]`, zero for non-facets.
    pub fn incidence(&self, cell: CellId, face: CellId) -> i64 {
        self.covering(face, cell).map_or(0, |cv| cv.incidence)
    }

    /// The open interval `(a, b)`. Requires `a < b`.
    pub fn interval(&self, a: CellId, b: CellId) -> Result<Vec<CellId>, ComplexError> {
        if !self.is_face(a, b) {
            return Err(ComplexError::NotComparable(
                self.name(a).to_string(),
                self.name(b).to_string(),
            ));
        }
        Ok(self.interval_cells(a, b).collect())
    }

    fn interval_cells(&self, a: CellId, b: CellId) -> impl Iterator<Item = CellId> + '_ {
        self.below[b.index()]
            .iter()
            .copied()
            .filter(move |&m| self.is_face(a, m))
    }

    fn interval_len(&self, a: CellId, b: CellId) -> usize {
        self.interval_cells(a, b).count()
    }

    /// Regularity of a face pair. Errors when `a` is not a face of `b`.
    pub fn is_regular_face(&self, a: CellId, b: CellId) -> Result<bool, ComplexError> {
        if !self.is_face(a, b) {
            return Err(ComplexError::NotAFace {
                face: self.name(a).to_string(),
                cell: self.name(b).to_string(),
            });
        }
        Ok(self.is_regular_pair(a, b))
    }

    /// Regularity of a pair already known to satisfy `a < b`.
    pub(crate) fn is_regular_pair(&self, a: CellId, b: CellId) -> bool {
        match self.covering(a, b) {
            Some(cv) => cv.regular,
            None => !self.deep_irregular.contains(&(a, b)),
        }
    }

    /// `a irr< b`: comparable but not regular, at any dimension gap.
    pub fn is_irregular_face(&self, a: CellId, b: CellId) -> bool {
        self.is_face(a, b) && !self.is_regular_pair(a, b)
    }

    /// Every irregular pair `(face, cell)` of the complex.
    pub fn irregular_pairs(&self) -> Vec<(CellId, CellId)> {
        let mut out: Vec<_> = self
            .coverings
            .iter()
            .filter(|c| !c.regular)
            .map(|c| (c.face, c.cell))
            .chain(self.deep_irregular.iter().copied())
            .collect();
        out.sort();
        out
    }

    /// `s` together with all faces of its members.
    pub fn closure(&self, s: &BTreeSet<CellId>) -> BTreeSet<CellId> {
        let mut out = s.clone();
        for &c in s {
            out.extend(self.faces(c).iter().copied());
        }
        out
    }

    pub fn is_subcomplex(&self, s: &BTreeSet<CellId>) -> bool {
        s.iter()
            .all(|&c| self.faces(c).iter().all(|f| s.contains(f)))
    }

    /// Resolves a list of names into an id set.
    pub fn id_set<S: AsRef<str>>(&self, names: &[S]) -> Result<BTreeSet<CellId>, ComplexError> {
        names.iter().map(|n| self.require(n.as_ref())).collect()
    }

    /// Renders the complex as `cell`, `cover` and `irr` records.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in self.cells() {
            out.push_str(&format!("cell {} {}\n", self.name(c), self.dim(c)));
        }
        for cv in &self.coverings {
            let reg = if cv.regular { "reg" } else { "irr" };
            out.push_str(&format!(
                "cover {} {} {} {}\n",
                self.name(cv.face),
                self.name(cv.cell),
                cv.incidence,
                reg
            ));
        }
        for &(a, b) in &self.deep_irregular {
            out.push_str(&format!("irr {} {}\n", self.name(a), self.name(b)));
        }
        out
    }

    /// Names of the given cells, in id order.
    pub fn names_of<'a>(&'a self, ids: impl IntoIterator<Item = &'a CellId>) -> Vec<&'a str> {
        let mut v: Vec<CellId> = ids.into_iter().copied().collect();
        v.sort();
        v.into_iter().map(|c| self.name(c)).collect()
    }
}
