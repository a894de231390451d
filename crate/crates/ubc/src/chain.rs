//! Formal sums over arbitrary cell types with exact coefficients.
//!
//! A chain always knows its degree and the backend (chain complex) it lives
//! in, and is stored in reduced form: like cells merged, zero coefficients
//! dropped, terms ordered by the cell encoding. Equal chains therefore have
//! identical serialized form.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::coeff::{Coefficient, MeasuredSet, Ring};
use crate::error::{Error, Result};

/// The chain complex a chain belongs to. Mostly an identity token; backends
/// whose coefficients are step functions also expose the measured set.
pub trait ChainBackend: Clone + PartialEq + fmt::Display + fmt::Debug {
    fn space(&self) -> Option<&Arc<MeasuredSet>> {
        None
    }
}

/// A basis cell of some chain complex.
pub trait Cell: Clone + Ord + fmt::Debug {
    type Backend: ChainBackend;

    /// Does this cell belong to the backend in the given degree?
    fn check(&self, backend: &Self::Backend, degree: usize) -> Result<()>;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value, backend: &Self::Backend, degree: usize) -> Result<Self>;
}

/// Reduced formal sum Σ coef·cell of a fixed degree over a fixed backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalChain<C: Cell> {
    backend: C::Backend,
    degree: usize,
    ring: Ring,
    terms: BTreeMap<C, Coefficient>,
}

impl<C: Cell> FormalChain<C> {
    pub fn zero(backend: C::Backend, degree: usize, ring: Ring) -> FormalChain<C> {
        FormalChain {
            backend,
            degree,
            ring,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        backend: C::Backend,
        degree: usize,
        ring: Ring,
        terms: impl IntoIterator<Item = (C, Coefficient)>,
    ) -> Result<FormalChain<C>> {
        let mut chain = FormalChain::zero(backend, degree, ring);
        for (cell, coef) in terms {
            chain.add_term(cell, coef)?;
        }
        Ok(chain)
    }

    pub fn backend(&self) -> &C::Backend {
        &self.backend
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&C, &Coefficient)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, cell: &C) -> Option<&Coefficient> {
        self.terms.get(cell)
    }

    fn coerce(&self, coef: Coefficient) -> Result<Coefficient> {
        match (self.ring, coef) {
            (Ring::Rat, Coefficient::Int(v)) => Ok(Coefficient::Rat(BigRational::from_integer(v))),
            (ring, coef) if coef.ring() == ring => Ok(coef),
            (ring, coef) => Err(Error::RingMismatch(ring, coef.ring())),
        }
    }

    /// Add one term, merging with an existing coefficient on the same cell.
    /// Integer coefficients are accepted into rational chains.
    pub fn add_term(&mut self, cell: C, coef: Coefficient) -> Result<()> {
        let coef = self.coerce(coef)?;
        if coef.is_zero() {
            return Ok(());
        }
        cell.check(&self.backend, self.degree)?;
        use std::collections::btree_map::Entry;
        match self.terms.entry(cell) {
            Entry::Vacant(e) => {
                e.insert(coef);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&coef)?;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
        Ok(())
    }

    fn check_compatible(&self, other: &FormalChain<C>) -> Result<()> {
        if self.backend != other.backend {
            return Err(Error::BackendMismatch(
                self.backend.to_string(),
                other.backend.to_string(),
            ));
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch(self.ring, other.ring));
        }
        Ok(())
    }

    pub fn add(&self, other: &FormalChain<C>) -> Result<FormalChain<C>> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (cell, coef) in &other.terms {
            out.add_term(cell.clone(), coef.clone())?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> FormalChain<C> {
        FormalChain {
            backend: self.backend.clone(),
            degree: self.degree,
            ring: self.ring,
            terms: self.terms.iter().map(|(c, v)| (c.clone(), v.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &FormalChain<C>) -> Result<FormalChain<C>> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Coefficient) -> Result<FormalChain<C>> {
        let mut out = FormalChain::zero(self.backend.clone(), self.degree, self.ring);
        for (cell, coef) in &self.terms {
            out.add_term(cell.clone(), k.mul(coef)?)?;
        }
        Ok(out)
    }

    pub fn scale_int(&self, k: i64) -> FormalChain<C> {
        self.scale(&Coefficient::int(k)).expect("integer scaling cannot fail")
    }

    /// Reinterpret an integer chain rationally; rational chains pass through.
    pub fn to_rational(&self) -> Result<FormalChain<C>> {
        match self.ring {
            Ring::Rat => Ok(self.clone()),
            Ring::Int => {
                let mut out = FormalChain::zero(self.backend.clone(), self.degree, Ring::Rat);
                for (cell, coef) in &self.terms {
                    out.add_term(cell.clone(), coef.clone())?;
                }
                Ok(out)
            }
            Ring::Step => Err(Error::RingMismatch(Ring::Rat, Ring::Step)),
        }
    }

    /// Divide by a positive integer, promoting to rational coefficients.
    pub fn div_int(&self, by: &BigInt) -> Result<FormalChain<C>> {
        let mut out = FormalChain::zero(self.backend.clone(), self.degree, Ring::Rat);
        for (cell, coef) in &self.terms {
            out.add_term(cell.clone(), coef.div_int(by)?)?;
        }
        Ok(out)
    }

    /// The ℓ¹-norm: Σ |coef| with |f| = ∫|f|dμ for step functions.
    pub fn l1_norm(&self) -> BigRational {
        self.terms.values().map(Coefficient::norm).sum()
    }

    /// Σ over terms of the coefficient sup norm. For a parametrised chain
    /// Σ f_j ⊗ σ_j this is Σ_j |f_j|_∞.
    pub fn sum_sup_norm(&self) -> BigRational {
        self.terms.values().map(Coefficient::sup_norm).sum()
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(cell, coef)| json!({ "cell": cell.to_json(), "coef": coef.to_json() }))
            .collect();
        json!({
            "backend": self.backend.to_string(),
            "degree": self.degree,
            "ring": self.ring.to_string(),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value, backend: C::Backend) -> Result<FormalChain<C>> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::parse("chain", "chain must be a JSON object"))?;
        let stated = obj
            .get("backend")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::parse("chain.backend", "missing backend string"))?;
        if stated != backend.to_string() {
            return Err(Error::BackendMismatch(backend.to_string(), stated.to_string()));
        }
        let degree = obj
            .get("degree")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::parse("chain.degree", "missing degree"))? as usize;
        let ring = Ring::parse(
            obj.get("ring")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::parse("chain.ring", "missing ring"))?,
        )?;
        let terms = obj
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("chain.terms", "missing terms array"))?;
        let space = <C::Backend as ChainBackend>::space(&backend).cloned();
        let mut chain = FormalChain::zero(backend, degree, ring);
        for t in terms {
            let cell_v = t
                .get("cell")
                .ok_or_else(|| Error::parse("chain.terms", "term missing cell"))?;
            let coef_v = t
                .get("coef")
                .ok_or_else(|| Error::parse("chain.terms", "term missing coef"))?;
            let cell = C::from_json(cell_v, &chain.backend, degree)?;
            let coef = Coefficient::from_json(coef_v, ring, space.as_ref())?;
            chain.add_term(cell, coef)?;
        }
        Ok(chain)
    }
}

impl<C: Cell> fmt::Display for FormalChain<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (cell, coef)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({coef})·{cell:?}")?;
        }
        Ok(())
    }
}
