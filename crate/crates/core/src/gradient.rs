//! Combinatorial vector fields, the gradients `−∇f` and `−∇_s f`, V-paths and
//! synthesis of a discrete Morse function from an acyclic field.
//!
//! A field is stored as a map from tails to heads. The V-path digraph has the
//! tails as nodes and an edge `σ → σ'` whenever `σ' ≺ V(σ)`, `σ' ≠ σ` and `σ'`
//! is itself a tail. A V-path that reaches an unmatched cell simply stops, so
//! those cells contribute nothing to cycles or path lengths.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::{tarjan_scc, toposort};
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;
use thiserror::Error;

use crate::bott::check_morse_bott;
use crate::complex::{CellId, Complex};
use crate::function::{CellFunction, FunctionError, Value};
use crate::morse::check_morse;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct VectorField {
    arrows: BTreeMap<CellId, CellId>,
}

impl VectorField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fails with the repeated tail if a cell is given two heads.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (CellId, CellId)>) -> Result<Self, CellId> {
        let mut arrows = BTreeMap::new();
        for (s, t) in pairs {
            if arrows.insert(s, t).is_some() {
                return Err(s);
            }
        }
        Ok(Self { arrows })
    }

    pub fn from_named<S: AsRef<str>>(k: &Complex, pairs: &[(S, S)]) -> Result<Self, GradientError> {
        let mut ids = Vec::with_capacity(pairs.len());
        for (s, t) in pairs {
            let lookup = |n: &str| {
                k.id(n)
                    .ok_or_else(|| GradientError::UnknownCell(n.to_string()))
            };
            ids.push((lookup(s.as_ref())?, lookup(t.as_ref())?));
        }
        Self::from_pairs(ids).map_err(|s| GradientError::DuplicateTail(k.name(s).to_string()))
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    /// `V(σ)`, or `None` when `V(σ) = 0`.
    pub fn head(&self, s: CellId) -> Option<CellId> {
        self.arrows.get(&s).copied()
    }

    pub fn is_tail(&self, s: CellId) -> bool {
        self.arrows.contains_key(&s)
    }

    pub fn arrows(&self) -> impl Iterator<Item = (CellId, CellId)> + '_ {
        self.arrows.iter().map(|(&s, &t)| (s, t))
    }

    /// `arrow <σ> <τ>` lines sorted by tail name, then head name.
    pub fn to_text(&self, k: &Complex) -> String {
        let mut lines: Vec<String> = self
            .arrows()
            .map(|(s, t)| format!("arrow {} {}", k.name(s), k.name(t)))
            .collect();
        lines.sort();
        lines.into_iter().map(|l| l + "\n").collect()
    }

    pub fn named<'a>(&self, k: &'a Complex) -> Vec<(&'a str, &'a str)> {
        let mut out: Vec<_> = self.arrows().map(|(s, t)| (k.name(s), k.name(t))).collect();
        out.sort();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FieldCondition {
    /// A head is also a tail.
    HeadIsTail,
    /// `σ reg≺ V(σ)` fails.
    NotRegularFacet,
    /// Two tails share a head.
    NotInjective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldViolation {
    pub condition: FieldCondition,
    pub tail: CellId,
    pub head: CellId,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GradientError {
    #[error(transparent)]
    Domain(#[from] FunctionError),
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("cell `{0}` has more than one arrow")]
    DuplicateTail(String),
    #[error("function is not discrete Morse")]
    NotMorse,
    #[error("function is not discrete Morse-Bott")]
    NotMorseBott,
    #[error("cell `{0}` has more than one cofacet for its gradient arrow")]
    NonUniqueCofacet(String),
    #[error("vector field is invalid ({} violations)", .0.len())]
    InvalidField(Vec<FieldViolation>),
    #[error("vector field has a closed orbit through {}", .0.join(" -> "))]
    ClosedOrbitPresent(Vec<String>),
    #[error("gradient of the synthesized function differs from the input field")]
    RoundTripMismatch,
}

/// Checks conditions (1)–(3) of a combinatorial vector field.
pub fn validate_vector_field(k: &Complex, v: &VectorField) -> Vec<FieldViolation> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<CellId, CellId> = BTreeMap::new();
    for (s, t) in v.arrows() {
        if v.is_tail(t) {
            out.push(FieldViolation {
                condition: FieldCondition::HeadIsTail,
                tail: s,
                head: t,
            });
        }
        if !k.covering(s, t).is_some_and(|cv| cv.regular) {
            out.push(FieldViolation {
                condition: FieldCondition::NotRegularFacet,
                tail: s,
                head: t,
            });
        }
        if seen.insert(t, s).is_some() {
            out.push(FieldViolation {
                condition: FieldCondition::NotInjective,
                tail: s,
                head: t,
            });
        }
    }
    out
}

fn require_valid(k: &Complex, v: &VectorField) -> Result<(), GradientError> {
    let bad = validate_vector_field(k, v);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(GradientError::InvalidField(bad))
    }
}

/// `−∇f`: each cell goes to its noncritical cofacet, if it has one.
pub fn grad_morse(k: &Complex, f: &CellFunction) -> Result<VectorField, GradientError> {
    match check_morse(k, f) {
        Ok(v) if v.is_morse() => {}
        Ok(_) => return Err(GradientError::NotMorse),
        Err(crate::morse::MorseError::Domain(e)) => return Err(e.into()),
        Err(_) => return Err(GradientError::NotMorse),
    }
    let mut arrows = BTreeMap::new();
    for s in k.cells() {
        let mut up = f.nc_cofacets(k, s);
        if let Some(t) = up.next() {
            if up.next().is_some() {
                return Err(GradientError::NonUniqueCofacet(k.name(s).to_string()));
            }
            arrows.insert(s, t);
        }
    }
    let v = VectorField { arrows };
    require_valid(k, &v)?;
    Ok(v)
}

/// `−∇_s f`: each cell goes to its strictly noncritical cofacet, if it has one.
pub fn grad_strict(k: &Complex, f: &CellFunction) -> Result<VectorField, GradientError> {
    match check_morse_bott(k, f) {
        Ok(v) if v.is_morse_bott() => {}
        Ok(_) => return Err(GradientError::NotMorseBott),
        Err(crate::bott::BottError::Domain(e)) => return Err(e.into()),
        Err(_) => return Err(GradientError::NotMorseBott),
    }
    let mut arrows = BTreeMap::new();
    for s in k.cells() {
        let mut up = k.cofacets(s).filter(|&t| f.value(s) > f.value(t));
        if let Some(t) = up.next() {
            if up.next().is_some() {
                return Err(GradientError::NonUniqueCofacet(k.name(s).to_string()));
            }
            arrows.insert(s, t);
        }
    }
    let v = VectorField { arrows };
    require_valid(k, &v)?;
    Ok(v)
}

/// The V-path digraph over the tails of `v`.
pub struct VPathGraph {
    pub graph: DiGraph<CellId, ()>,
    pub node: BTreeMap<CellId, NodeIndex>,
}

pub fn vpath_graph(k: &Complex, v: &VectorField) -> VPathGraph {
    let mut graph = DiGraph::new();
    let node: BTreeMap<CellId, NodeIndex> =
        v.arrows().map(|(s, _)| (s, graph.add_node(s))).collect();
    for (s, t) in v.arrows() {
        for n in k.facets(t) {
            if n != s {
                if let Some(&j) = node.get(&n) {
                    graph.add_edge(node[&s], j, ());
                }
            }
        }
    }
    VPathGraph { graph, node }
}

/// A closed orbit as its sequence of tails `σ_0, …, σ_m` (with `σ_{m+1} = σ_0`), if any.
pub fn has_closed_orbit(k: &Complex, v: &VectorField) -> Option<Vec<CellId>> {
    let g = vpath_graph(k, v);
    // no self-loops exist, so any nontrivial strong component carries a cycle
    let comp = tarjan_scc(&g.graph).into_iter().find(|c| c.len() > 1)?;
    let inside: BTreeSet<NodeIndex> = comp.iter().copied().collect();
    let mut order = vec![comp[0]];
    let mut pos = BTreeMap::from([(comp[0], 0)]);
    loop {
        let cur = *order.last().unwrap();
        let next = g
            .graph
            .neighbors(cur)
            .filter(|n| inside.contains(n))
            .min()
            .unwrap();
        if let Some(&i) = pos.get(&next) {
            return Some(order[i..].iter().map(|&n| g.graph[n]).collect());
        }
        pos.insert(next, order.len());
        order.push(next);
    }
}

/// Every V-path has bounded length; on a finite complex this is the absence of closed orbits.
pub fn is_positively_bounded(k: &Complex, v: &VectorField) -> bool {
    has_closed_orbit(k, v).is_none()
}

/// `d(σ)` for every tail: the number of tails on the longest V-path starting at `σ`.
pub fn path_depths(k: &Complex, v: &VectorField) -> Result<BTreeMap<CellId, usize>, GradientError> {
    let g = vpath_graph(k, v);
    let Ok(order) = toposort(&g.graph, None) else {
        let cycle = has_closed_orbit(k, v).unwrap_or_default();
        return Err(GradientError::ClosedOrbitPresent(
            cycle.iter().map(|&c| k.name(c).to_string()).collect(),
        ));
    };
    let mut depth = vec![1usize; g.graph.node_count()];
    for &n in order.iter().rev() {
        if let Some(d) = g.graph.neighbors(n).map(|m| depth[m.index()]).max() {
            depth[n.index()] = d + 1;
        }
    }
    Ok(g.node
        .iter()
        .map(|(&c, &n)| (c, depth[n.index()]))
        .collect())
}

/// Builds a discrete Morse function `g` with `−∇g = V`.
///
/// A critical `p`-cell gets `2p`; a tail `σ` of dimension `p` and its head
/// both get `2p + 1 + Σ_{k=1}^{d(σ)} 2^{-k}`. Along a V-path the depth drops,
/// so every facet of a head other than its tail sits strictly below it.
pub fn synthesize_morse(k: &Complex, v: &VectorField) -> Result<CellFunction, GradientError> {
    require_valid(k, v)?;
    let depths = path_depths(k, v)?;
    let two = BigRational::from_integer(2.into());
    let mut values: Vec<Value> = k
        .cells()
        .map(|c| Value::integer(2 * k.dim(c) as i64))
        .collect();
    for (s, t) in v.arrows() {
        let d = depths[&s];
        let mut x = BigRational::from_integer((2 * k.dim(s) as i64 + 1).into());
        let mut step = BigRational::one();
        for _ in 0..d {
            step /= &two;
            x += &step;
        }
        debug_assert!(!step.is_zero());
        values[s.index()] = Value(x.clone());
        values[t.index()] = Value(x);
    }
    Ok(CellFunction::from_values(values))
}

/// `g := synthesize_morse(−∇_s f)`, checked to satisfy `−∇g = −∇_s f`.
pub fn lemsgvf_bridge(k: &Complex, f: &CellFunction) -> Result<CellFunction, GradientError> {
    let v = grad_strict(k, f)?;
    let g = synthesize_morse(k, &v)?;
    if grad_morse(k, &g)? != v {
        return Err(GradientError::RoundTripMismatch);
    }
    Ok(g)
}
