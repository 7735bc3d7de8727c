//! Exact-valued cell functions and the noncritical face relations.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::complex::{CellId, Complex};

/// Exact value of a cell.
///
/// Equality of values decides collection membership, so values are exact
/// rationals rather than floats.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(pub BigRational);

impl Value {
    pub fn integer(n: i64) -> Self {
        Value(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        Value(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::integer(n)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal `{0}`")]
pub struct ParseValueError(pub String);

impl FromStr for Value {
    type Err = ParseValueError;

    /// Accepts `p`, `p/q` and decimal literals such as `-1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseValueError(s.to_string());
        let int = |t: &str| -> Result<BigInt, ParseValueError> {
            let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            t.parse::<BigInt>().map_err(|_| err())
        };
        if let Some((p, q)) = s.split_once('/') {
            let q = int(q)?;
            if !q.is_positive() {
                return Err(err());
            }
            return Ok(Value(BigRational::new(int(p)?, q)));
        }
        if let Some((whole, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let negative = whole.starts_with('-');
            let whole = if whole == "-" || whole == "+" || whole.is_empty() {
                BigInt::zero()
            } else {
                int(whole)?
            };
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let frac: BigInt = frac.parse().map_err(|_| err())?;
            let mut num = whole.abs() * &scale + frac;
            if negative {
                num = -num;
            }
            return Ok(Value(BigRational::new(num, scale)));
        }
        Ok(Value(BigRational::from_integer(int(s)?)))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctionError {
    #[error("no value given for cell `{0}`")]
    PartialFunction(String),
    #[error("value given for unknown cell `{0}`")]
    UnknownCell(String),
    #[error("value for cell `{0}` given twice")]
    DuplicateValue(String),
    #[error("function has {got} values but the complex has {expected} cells")]
    DomainMismatch { expected: usize, got: usize },
    #[error("cell {0} is not in the given collection")]
    CellNotInCollection(String),
}

/// A total function from the cells of a complex to exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellFunction {
    values: Vec<Value>,
}

impl CellFunction {
    /// Wraps a value vector indexed by [`CellId`].
    pub fn from_values(values: Vec<Value>) -> Self {
        Self { values }
    }

    /// Builds a function from `(name, value)` pairs; every cell needs exactly one value.
    pub fn from_named<S: AsRef<str>>(
        k: &Complex,
        pairs: &[(S, Value)],
    ) -> Result<Self, FunctionError> {
        let mut slots: Vec<Option<Value>> = vec![None; k.len()];
        for (name, v) in pairs {
            let id = k
                .id(name.as_ref())
                .ok_or_else(|| FunctionError::UnknownCell(name.as_ref().to_string()))?;
            if slots[id.index()].replace(v.clone()).is_some() {
                return Err(FunctionError::DuplicateValue(name.as_ref().to_string()));
            }
        }
        let values = slots
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    FunctionError::PartialFunction(k.name(CellId(i as u32)).to_string())
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { values })
    }

    /// Convenience constructor from integer values.
    pub fn from_ints(k: &Complex, pairs: &[(&str, i64)]) -> Result<Self, FunctionError> {
        let pairs: Vec<(&str, Value)> =
            pairs.iter().map(|&(n, v)| (n, Value::integer(v))).collect();
        Self::from_named(k, &pairs)
    }

    /// `f(σ) = dim σ`.
    pub fn dimension(k: &Complex) -> Self {
        Self {
            values: k.cells().map(|c| Value::integer(k.dim(c) as i64)).collect(),
        }
    }

    pub fn constant(k: &Complex, v: Value) -> Self {
        Self {
            values: vec![v; k.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, c: CellId) -> &Value {
        &self.values[c.index()]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn set(&mut self, c: CellId, v: Value) {
        self.values[c.index()] = v;
    }

    pub fn check_domain(&self, k: &Complex) -> Result<(), FunctionError> {
        if self.values.len() == k.len() {
            Ok(())
        } else {
            Err(FunctionError::DomainMismatch {
                expected: k.len(),
                got: self.values.len(),
            })
        }
    }

    /// Applies `v ↦ scale·v + shift` to every value.
    pub fn affine(&self, scale: &BigRational, shift: &BigRational) -> Self {
        Self {
            values: self
                .values
                .iter()
                .map(|v| Value(&v.0 * scale + shift))
                .collect(),
        }
    }

    /// Level sets as `value → cells`, in increasing value order.
    pub fn level_sets(&self) -> BTreeMap<&Value, Vec<CellId>> {
        let mut out: BTreeMap<&Value, Vec<CellId>> = BTreeMap::new();
        for (i, v) in self.values.iter().enumerate() {
            out.entry(v).or_default().push(CellId(i as u32));
        }
        out
    }

    /// `σ nc≺ τ`: `σ ≺ τ` and `f(σ) ≥ f(τ)`.
    pub fn is_nc_facet(&self, k: &Complex, s: CellId, t: CellId) -> bool {
        k.is_facet(s, t) && self.value(s) >= self.value(t)
    }

    /// `ν snc< τ`: `ν < τ` and `f(ν) > f(τ)`.
    pub fn is_snc(&self, k: &Complex, s: CellId, t: CellId) -> bool {
        k.is_face(s, t) && self.value(s) > self.value(t)
    }

    /// `ν snc≺ τ`: `ν ≺ τ` and `f(ν) > f(τ)`.
    pub fn is_snc_facet(&self, k: &Complex, s: CellId, t: CellId) -> bool {
        k.is_facet(s, t) && self.value(s) > self.value(t)
    }

    /// Noncritical cofacets of `σ`.
    pub fn nc_cofacets<'a>(
        &'a self,
        k: &'a Complex,
        s: CellId,
    ) -> impl Iterator<Item = CellId> + 'a {
        k.cofacets(s)
            .filter(move |&t| self.value(s) >= self.value(t))
    }

    /// Noncritical facets of `σ`.
    pub fn nc_facets<'a>(&'a self, k: &'a Complex, s: CellId) -> impl Iterator<Item = CellId> + 'a {
        k.facets(s).filter(move |&n| self.value(n) >= self.value(s))
    }

    /// `U(σ)`.
    pub fn up(&self, k: &Complex, s: CellId) -> usize {
        self.nc_cofacets(k, s).count()
    }

    /// `D(σ)`.
    pub fn down(&self, k: &Complex, s: CellId) -> usize {
        self.nc_facets(k, s).count()
    }

    /// `U^C(σ)`: noncritical cofacets outside the cell set `c`.
    pub fn up_outside(&self, k: &Complex, s: CellId, c: &[CellId]) -> Result<usize, FunctionError> {
        Self::require_member(k, s, c)?;
        Ok(self
            .nc_cofacets(k, s)
            .filter(|t| c.binary_search(t).is_err())
            .count())
    }

    /// `D^C(σ)`: noncritical facets outside the cell set `c`.
    pub fn down_outside(
        &self,
        k: &Complex,
        s: CellId,
        c: &[CellId],
    ) -> Result<usize, FunctionError> {
        Self::require_member(k, s, c)?;
        Ok(self
            .nc_facets(k, s)
            .filter(|t| c.binary_search(t).is_err())
            .count())
    }

    fn require_member(k: &Complex, s: CellId, c: &[CellId]) -> Result<(), FunctionError> {
        if c.binary_search(&s).is_ok() {
            Ok(())
        } else {
            Err(FunctionError::CellNotInCollection(k.name(s).to_string()))
        }
    }

    /// `U(σ) = D(σ) = 0`.
    pub fn is_critical(&self, k: &Complex, s: CellId) -> bool {
        self.up(k, s) == 0 && self.down(k, s) == 0
    }

    /// Renders the function as `value <cell> <rational>` lines in cell order.
    pub fn to_text(&self, k: &Complex) -> String {
        let mut out = String::new();
        for c in k.cells() {
            out.push_str(&format!("value {} {}\n", k.name(c), self.value(c)));
        }
        out
    }

    /// Values keyed by cell name.
    pub fn named(&self, k: &Complex) -> HashMap<String, Value> {
        k.cells()
            .map(|c| (k.name(c).to_string(), self.value(c).clone()))
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::complex::tests::{filled_triangle, square_graph};

    /// Left function of the square example.
    pub fn square_left() -> (Complex, CellFunction) {
        let k = square_graph();
        let f = CellFunction::from_ints(
            &k,
            &[
                ("A", 1),
                ("B", 2),
                ("C", 3),
                ("D", 3),
                ("AB", 1),
                ("AC", 3),
                ("BC", 2),
                ("BD", 2),
                ("CD", 3),
            ],
        )
        .unwrap();
        (k, f)
    }

    /// Right function of the square example; `C` is the marked cell.
    pub fn square_right() -> (Complex, CellFunction) {
        let k = square_graph();
        let f = CellFunction::from_ints(
            &k,
            &[
                ("A", 1),
                ("B", 2),
                ("C", 3),
                ("D", 2),
                ("AB", 1),
                ("AC", 3),
                ("BC", 2),
                ("BD", 2),
                ("CD", 2),
            ],
        )
        .unwrap();
        (k, f)
    }

    #[test]
    fn parse_values() {
        assert_eq!("3".parse::<Value>().unwrap(), Value::integer(3));
        assert_eq!("-7/14".parse::<Value>().unwrap(), Value::ratio(-1, 2));
        assert_eq!("-1.25".parse::<Value>().unwrap(), Value::ratio(-5, 4));
        assert_eq!("0.1".parse::<Value>().unwrap(), Value::ratio(1, 10));
        assert_eq!("-0.5".parse::<Value>().unwrap(), Value::ratio(-1, 2));
        for bad in ["", "1/0", "1/-2", "a", "1.", "1.2.3", "--1", "1e3", "/2"] {
            assert!(bad.parse::<Value>().is_err(), "{bad}");
        }
        assert_eq!(Value::ratio(6, 4).to_string(), "3/2");
        assert_eq!(Value::integer(-2).to_string(), "-2");
    }

    #[test]
    fn nc_relations_square_left() {
        let (k, f) = square_left();
        let id = |n| k.id(n).unwrap();
        assert!(f.is_nc_facet(&k, id("A"), id("AB")));
        assert!(f.is_nc_facet(&k, id("B"), id("AB")));
        assert!(f.is_snc_facet(&k, id("B"), id("AB")));
        assert!(!f.is_snc_facet(&k, id("A"), id("AB")));
        assert!(!f.is_snc(&k, id("A"), id("AC")));
        assert_eq!(f.down(&k, id("AB")), 2);
        // A has the equal-valued cofacet AB.
        assert_eq!(f.up(&k, id("A")), 1);
        assert!(!f.is_critical(&k, id("A")));
    }

    #[test]
    fn triangle_dim_function() {
        let k = filled_triangle();
        let f = CellFunction::dimension(&k);
        for s in k.cells() {
            for t in k.cofacets(s) {
                assert!(!f.is_nc_facet(&k, s, t));
            }
            assert!(f.is_critical(&k, s));
        }
    }

    #[test]
    fn counts_with_collection() {
        let (k, f) = square_right();
        let c = k.id("C").unwrap();
        assert_eq!(
            f.up_outside(&k, c, &[k.id("C").unwrap(), k.id("AC").unwrap()])
                .unwrap(),
            2
        );
        assert_eq!(f.up(&k, c), 3);

        let (k, f) = square_left();
        let mut coll = vec![k.id("A").unwrap(), k.id("AB").unwrap()];
        coll.sort();
        assert_eq!(f.up_outside(&k, k.id("A").unwrap(), &coll).unwrap(), 0);
        let single = [k.id("BD").unwrap()];
        assert_eq!(
            f.up_outside(&k, single[0], &single).unwrap(),
            f.up(&k, single[0])
        );
        assert_eq!(
            f.down_outside(&k, single[0], &single).unwrap(),
            f.down(&k, single[0])
        );
        assert!(matches!(
            f.up_outside(&k, k.id("C").unwrap(), &coll),
            Err(FunctionError::CellNotInCollection(_))
        ));
    }

    #[test]
    fn isolated_vertex() {
        let k = Complex::build(&[crate::complex::CellSpec::new("v", 0)], &[], &[]).unwrap();
        let f = CellFunction::constant(&k, Value::integer(0));
        assert_eq!(f.up(&k, CellId(0)), 0);
        assert_eq!(f.down(&k, CellId(0)), 0);
    }

    #[test]
    fn from_named_errors() {
        let k = square_graph();
        assert_eq!(
            CellFunction::from_ints(&k, &[("A", 1)]).unwrap_err(),
            FunctionError::PartialFunction("B".into())
        );
        assert_eq!(
            CellFunction::from_ints(&k, &[("Z", 1)]).unwrap_err(),
            FunctionError::UnknownCell("Z".into())
        );
        assert_eq!(
            CellFunction::from_ints(&k, &[("A", 1), ("A", 2)]).unwrap_err(),
            FunctionError::DuplicateValue("A".into())
        );
    }
}
