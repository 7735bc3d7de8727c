//! Integer chain complexes, Smith normal form ranks and Poincaré polynomials.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bott::ReducedCollection;
use crate::complex::{CellId, Complex};
use crate::poly::IntPolynomial;

/// Dense integer matrix with arbitrary-precision entries, row major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let prod = a * &rhs[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    /// `M·x` for a column vector `x`.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, x.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] -= q · row[src]
    fn sub_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = q * &self.data[src * self.cols + j];
            self.data[dst * self.cols + j] -= v;
        }
    }

    /// col[dst] -= q · col[src]
    fn sub_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = q * &self.data[i * self.cols + src];
            self.data[i * self.cols + dst] -= v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Rank and invariant factors `d_1 | d_2 | … | d_rank` of an integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub rank: usize,
    pub invariant_factors: Vec<BigInt>,
}

impl SmithForm {
    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.invariant_factors
            .iter()
            .filter(|d| !d.is_one())
            .cloned()
            .collect()
    }
}

/// Diagonalizes `m` by unimodular row and column operations.
pub fn smith_ranks(m: &IntMatrix) -> SmithForm {
    let mut a = m.clone();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < a.rows.min(a.cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..a.rows {
            for j in t..a.cols {
                let v = &a[(i, j)];
                if !v.is_zero() && best.is_none_or(|(bi, bj)| v.abs() < a[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        // Reduce row t and column t against the pivot with balanced
        // remainders. A leftover remainder is strictly smaller than the
        // pivot, so moving the smallest one into place always terminates
        // and keeps entries from growing.
        loop {
            for i in t + 1..a.rows {
                if !a[(i, t)].is_zero() {
                    let q = nearest_quotient(&a[(i, t)], &a[(t, t)]);
                    a.sub_row(i, t, &q);
                }
            }
            for j in t + 1..a.cols {
                if !a[(t, j)].is_zero() {
                    let q = nearest_quotient(&a[(t, j)], &a[(t, t)]);
                    a.sub_col(j, t, &q);
                }
            }
            let mut next: Option<(bool, usize)> = None;
            let mut small = a[(t, t)].abs();
            for i in t + 1..a.rows {
                let v = a[(i, t)].abs();
                if !v.is_zero() && v < small {
                    small = v;
                    next = Some((true, i));
                }
            }
            for j in t + 1..a.cols {
                let v = a[(t, j)].abs();
                if !v.is_zero() && v < small {
                    small = v;
                    next = Some((false, j));
                }
            }
            match next {
                Some((true, i)) => a.swap_rows(t, i),
                Some((false, j)) => a.swap_cols(t, j),
                None => break,
            }
        }
        diag.push(a[(t, t)].abs());
        t += 1;
    }
    SmithForm {
        rank: diag.len(),
        invariant_factors: normalize_divisibility(diag),
    }
}

/// `q` with `|a - q b| <= |b| / 2`.
fn nearest_quotient(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (two.clone() * a + b.abs()).div_floor(&(two * b.abs())) * b.signum()
}

/// Turns a diagonal into invariant factors with `d_i | d_{i+1}`.
fn normalize_divisibility(mut d: Vec<BigInt>) -> Vec<BigInt> {
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

/// A `Z`-basis of `ker m`, one vector per column of `m`'s domain.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    let mut a = m.clone();
    let mut q = IntMatrix::identity(m.cols);
    let mut p = 0;
    for i in 0..a.rows {
        if p == a.cols {
            break;
        }
        loop {
            let pivot = (p..a.cols)
                .filter(|&j| !a[(i, j)].is_zero())
                .min_by(|&x, &y| a[(i, x)].abs().cmp(&a[(i, y)].abs()));
            let Some(j0) = pivot else { break };
            a.swap_cols(p, j0);
            q.swap_cols(p, j0);
            let mut done = true;
            for j in p + 1..a.cols {
                if !a[(i, j)].is_zero() {
                    let f = a[(i, j)].div_floor(&a[(i, p)]);
                    a.sub_col(j, p, &f);
                    q.sub_col(j, p, &f);
                    if !a[(i, j)].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                p += 1;
                break;
            }
        }
    }
    (p..m.cols)
        .map(|j| (0..m.cols).map(|i| q[(i, j)].clone()).collect())
        .collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("cell set is not a subcomplex: `{0}` is missing a face")]
    NotASubcomplex(String),
    #[error("boundary of boundary is nonzero in dimension {0}")]
    BoundarySquareNonzero(usize),
}

/// Free chain complex over `Z` with one ordered basis per dimension.
#[derive(Clone, Debug)]
pub struct ChainComplexZ {
    /// Basis of `C_k`, sorted by id.
    pub bases: Vec<Vec<CellId>>,
    /// `∂_k : C_k → C_{k-1}` as a `#C_{k-1} × #C_k` matrix; `∂_0` has zero rows.
    pub boundaries: Vec<IntMatrix>,
}

impl ChainComplexZ {
    fn from_cells(k: &Complex, cells: &BTreeSet<CellId>) -> Self {
        let top = k.max_dim().map_or(0, |d| d + 1);
        let mut bases = vec![Vec::new(); top];
        for &c in cells {
            bases[k.dim(c)].push(c);
        }
        let boundaries = (0..top)
            .map(|d| {
                let rows: &[CellId] = if d == 0 { &[] } else { &bases[d - 1] };
                let cols = &bases[d];
                let mut m = IntMatrix::zeros(rows.len(), cols.len());
                for (j, &t) in cols.iter().enumerate() {
                    for cv in k.facet_coverings(t) {
                        if let Ok(i) = rows.binary_search(&cv.face) {
                            m[(i, j)] = BigInt::from(cv.incidence);
                        }
                    }
                }
                m
            })
            .collect();
        Self { bases, boundaries }
    }

    /// Number of graded slots (max dimension + 1 of the ambient complex).
    pub fn top(&self) -> usize {
        self.bases.len()
    }

    /// Verifies `∂_{k-1}∘∂_k = 0` for every `k`.
    pub fn check_square_zero(&self) -> Result<(), HomologyError> {
        for d in 2..self.top() {
            if !self.boundaries[d - 1].mul(&self.boundaries[d]).is_zero() {
                return Err(HomologyError::BoundarySquareNonzero(d));
            }
        }
        Ok(())
    }

    /// Applies `∂_k` to a chain given as `(cell, coefficient)` pairs; cells outside the basis are ignored.
    pub fn boundary_of(&self, d: usize, chain: &[(CellId, BigInt)]) -> Vec<(CellId, BigInt)> {
        if d == 0 || d >= self.top() {
            return Vec::new();
        }
        let mut x = vec![BigInt::zero(); self.bases[d].len()];
        for (c, a) in chain {
            if let Ok(j) = self.bases[d].binary_search(c) {
                x[j] += a;
            }
        }
        self.boundaries[d]
            .apply(&x)
            .into_iter()
            .zip(&self.bases[d - 1])
            .filter(|(v, _)| !v.is_zero())
            .map(|(v, &c)| (c, v))
            .collect()
    }
}

/// Cellular chain complex of the whole complex.
pub fn chain_complex_full(k: &Complex) -> ChainComplexZ {
    ChainComplexZ::from_cells(k, &k.cells().collect())
}

/// Cellular chain complex of the subcomplex `s`.
pub fn chain_complex(k: &Complex, s: &BTreeSet<CellId>) -> Result<ChainComplexZ, HomologyError> {
    if let Some(&bad) = s
        .iter()
        .find(|&&c| k.faces(c).iter().any(|f| !s.contains(f)))
    {
        return Err(HomologyError::NotASubcomplex(k.name(bad).to_string()));
    }
    let cc = ChainComplexZ::from_cells(k, s);
    cc.check_square_zero()?;
    Ok(cc)
}

/// Chain complex `(C_*(C^red), ∂^C)` of a reduced collection: only facets inside `C^red` are kept.
pub fn chain_complex_reduced(
    k: &Complex,
    rc: &ReducedCollection,
) -> Result<ChainComplexZ, HomologyError> {
    let cc = ChainComplexZ::from_cells(k, &rc.reduced.iter().copied().collect());
    cc.check_square_zero()?;
    Ok(cc)
}

/// Per-dimension ranks of a chain complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankProfile {
    /// `rank C_k`
    pub chains: Vec<usize>,
    /// `rank Z_k = rank ker ∂_k`
    pub cycles: Vec<usize>,
    /// `rank B_k = rank im ∂_{k+1}`
    pub boundaries: Vec<usize>,
    /// `b_k = rank Z_k − rank B_k`
    pub betti: Vec<usize>,
    /// Torsion coefficients of `H_k`, as decimal strings.
    pub torsion: Vec<Vec<String>>,
}

impl RankProfile {
    pub fn poincare(&self) -> IntPolynomial {
        IntPolynomial::from_counts(&self.betti)
    }

    /// `rank B_{k-1}`, zero for `k = 0`.
    pub fn boundary_below(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.boundaries.get(k - 1).copied().unwrap_or(0)
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.chains
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }
}

pub fn rank_profile(cc: &ChainComplexZ) -> RankProfile {
    let top = cc.top();
    let forms: Vec<SmithForm> = crate::par::map(&cc.boundaries, smith_ranks);
    let chains: Vec<usize> = cc.bases.iter().map(Vec::len).collect();
    let cycles: Vec<usize> = (0..top).map(|d| chains[d] - forms[d].rank).collect();
    let boundaries: Vec<usize> = (0..top)
        .map(|d| if d + 1 < top { forms[d + 1].rank } else { 0 })
        .collect();
    let betti = (0..top).map(|d| cycles[d] - boundaries[d]).collect();
    let torsion = (0..top)
        .map(|d| {
            if d + 1 < top {
                forms[d + 1]
                    .torsion()
                    .iter()
                    .map(ToString::to_string)
                    .collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    RankProfile {
        chains,
        cycles,
        boundaries,
        betti,
        torsion,
    }
}

pub fn poincare(cc: &ChainComplexZ) -> IntPolynomial {
    rank_profile(cc).poincare()
}
