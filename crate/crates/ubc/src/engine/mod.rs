//! Følner filling engines.
//!
//! Every pipeline follows the same skeleton: lift the cycle and its witness
//! upstairs, measure the boundary defect ã = ∂b̃ − c̃ through [`LiftingData`],
//! average the witness over a Følner box, contract with the cone, and project
//! back down. What differs is the quotient the answer lands in and which
//! correction terms are needed to make the boundary identity exact. All
//! arithmetic is exact; every certificate carries the bound it claims as a
//! rational number together with the data needed to re-audit it.

pub mod completion;
pub mod mixed;
pub mod param;
pub mod rational;
pub mod shrink;
pub mod stable;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::bar::{boundary, lift, project, BarBackend, BarChain, Tuple};
use crate::coeff::rational_to_string;
use crate::error::{Error, Result};
use crate::group::{folner_box, s_boundary, Elem, FiniteSubset, Group};

/// One projected-cell class of a lift of zero: the lexicographically least
/// raw cell in the class and the shifts carrying it onto the others.
#[derive(Debug, Clone)]
pub struct LiftClass {
    pub rep: Tuple,
    pub shifts: FiniteSubset,
}

/// The data extracted from a lift of zero ã: the classes K, the symmetrized
/// shift set S, the coefficient sup m, and the constant C = |K|·|S|·m that
/// controls |F·ã|₁ ≤ C·|∂_S F| for every finite F.
#[derive(Debug, Clone)]
pub struct LiftingData {
    pub classes: Vec<LiftClass>,
    pub shift_set: FiniteSubset,
    pub coefficient_sup: BigRational,
    pub constant: BigRational,
}

impl LiftingData {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "classes": self.classes.len(),
            "shift_set": subset_json(&self.shift_set),
            "coefficient_sup": rational_to_string(&self.coefficient_sup),
            "constant": rational_to_string(&self.constant),
        })
    }
}

pub(crate) fn subset_json(s: &FiniteSubset) -> Value {
    Value::Array(
        s.iter()
            .map(|e| Value::Array(e.0.iter().map(|&x| json!(x)).collect()))
            .collect(),
    )
}

/// Compute the lifting data of ã relative to the quotient `target`.
///
/// ã must project to zero (it is a lift of 0); violating that is reported
/// with the first orbit that survives projection.
pub fn lifting_data(a_tilde: &BarChain, target: &BarBackend) -> Result<LiftingData> {
    let backend = a_tilde.backend();
    if backend != &target.upstairs() {
        return Err(Error::BackendMismatch(
            backend.to_string(),
            target.upstairs().to_string(),
        ));
    }
    let projected = project(a_tilde, target)?;
    if projected.term_count() != 0 {
        let (cell, coef) = projected.terms().next().expect("nonzero chain has a term");
        return Err(Error::Precondition(format!(
            "not a lift of zero: the orbit of {:?} survives projection with coefficient {}",
            cell.flat(),
            coef
        )));
    }

    let group = &backend.group;
    if a_tilde.term_count() == 0 {
        return Ok(LiftingData {
            classes: Vec::new(),
            shift_set: FiniteSubset::empty(),
            coefficient_sup: BigRational::zero(),
            constant: BigRational::zero(),
        });
    }

    // Group the raw cells by their projection; reuse the target backend's
    // canonical form as the grouping key.
    let mut by_class: BTreeMap<Tuple, Vec<Tuple>> = BTreeMap::new();
    let mut sup = BigRational::zero();
    for (t, coef) in a_tilde.terms() {
        let gamma = target.canonical_shift(&t.entry_elem(0, backend.width()));
        let key = t.translated(&gamma, group);
        by_class.entry(key).or_default().push(t.clone());
        let n = coef.sup_norm();
        if n > sup {
            sup = n;
        }
    }

    let width = backend.width();
    let mut classes = Vec::with_capacity(by_class.len());
    let mut union: Vec<Elem> = Vec::new();
    for (_, cells) in by_class {
        let rep = cells.first().expect("classes are nonempty").clone();
        let rep_first = rep.entry_elem(0, width);
        let mut shifts = Vec::with_capacity(cells.len());
        for cell in &cells {
            let s = group.mul(&cell.entry_elem(0, width), &group.inv(&rep_first));
            if &rep.translated(&s, group) != cell {
                return Err(Error::Precondition(format!(
                    "cells {:?} and {:?} project together but differ by no group shift",
                    rep.flat(),
                    cell.flat()
                )));
            }
            shifts.push(s);
        }
        let shifts = FiniteSubset::new(shifts);
        union.extend(shifts.iter().cloned());
        classes.push(LiftClass { rep, shifts });
    }
    let shift_set = FiniteSubset::new(union).symmetrize(group);
    let k_count = BigRational::from_integer(BigInt::from(classes.len()));
    let s_count = BigRational::from_integer(BigInt::from(shift_set.len()));
    let constant = &k_count * &s_count * &sup;
    Ok(LiftingData {
        classes,
        shift_set,
        coefficient_sup: sup,
        constant,
    })
}

/// The tested form of the lifting inequality: |F·ã|₁ ≤ C·|∂_S F|.
pub fn lifting_inequality_holds(
    data: &LiftingData,
    a_tilde: &BarChain,
    f: &FiniteSubset,
) -> Result<bool> {
    let spread = crate::bar::translate_sum(a_tilde, f)?;
    let lhs = spread.l1_norm();
    let boundary_size = s_boundary(f, &data.shift_set, &a_tilde.backend().group).len();
    let rhs = &data.constant * BigRational::from_integer(BigInt::from(boundary_size));
    Ok(lhs <= rhs)
}

/// How the Følner box is chosen.
#[derive(Debug, Clone)]
pub enum KSelection {
    /// Smallest k with C·|∂_S F_k|/|F_k| ≤ ε·|c|₁.
    ByConstant { epsilon: BigRational },
    /// Smallest k with |c|₁ + C·|∂_S F_k|/|F_k| ≤ target; used by the
    /// completion and decomposition layers, which need absolute norms.
    ByAchieved { target: BigRational },
}

#[derive(Debug, Clone)]
pub struct FillOptions {
    /// Hard cap on the box parameter k.
    pub k_cap: u64,
    /// Hard cap on the power-of-two box side used by class shrinking.
    pub shrink_cap: u64,
    /// Upper bound on the number of chain terms any intermediate step may
    /// materialize; exceeding it is an honest error, never an approximation.
    pub term_budget: usize,
}

impl Default for FillOptions {
    fn default() -> FillOptions {
        FillOptions {
            k_cap: 64,
            shrink_cap: 4096,
            term_budget: 20_000_000,
        }
    }
}

pub(crate) fn ensure_budget(estimated: usize, opts: &FillOptions, stage: &str) -> Result<()> {
    if estimated > opts.term_budget {
        return Err(Error::CapExceeded {
            cap: opts.term_budget,
            best: format!("{estimated} terms at {stage}"),
            target: "term budget".into(),
        });
    }
    Ok(())
}

/// |∂_S [0,k]^d| in closed form: a box point survives iff every coordinate
/// stays clear of the per-axis shift extents.
pub fn box_boundary_count(d: usize, k: u64, s: &FiniteSubset) -> BigInt {
    let volume = BigInt::from(k + 1).pow(d as u32);
    if s.is_empty() {
        return BigInt::zero();
    }
    let mut interior = BigInt::one();
    for i in 0..d {
        let mut plus: i64 = 0;
        let mut minus: i64 = 0;
        for e in s.iter() {
            plus = plus.max(e.0[i]);
            minus = minus.max(-e.0[i]);
        }
        let span = (k + 1) as i64 - plus - minus;
        if span <= 0 {
            return volume;
        }
        interior *= BigInt::from(span);
    }
    volume - interior
}

/// |∂_S F_k|/|F_k| for the box F_k = [0,k]^d, exactly.
pub fn box_boundary_ratio(d: usize, k: u64, s: &FiniteSubset) -> BigRational {
    let volume = BigInt::from(k + 1).pow(d as u32);
    BigRational::new(box_boundary_count(d, k, s), volume)
}

/// Pick the smallest box parameter k meeting the selection rule, then
/// cross-check the closed-form boundary count against direct enumeration at
/// the chosen k.
pub(crate) fn select_box(
    d: usize,
    data: &LiftingData,
    cycle_norm: &BigRational,
    selection: &KSelection,
    group: &Group,
    opts: &FillOptions,
) -> Result<(u64, BigRational)> {
    let goal = |k: u64| -> BigRational {
        &data.constant * box_boundary_ratio(d, k, &data.shift_set)
    };
    let acceptable = |k: u64| -> bool {
        match selection {
            KSelection::ByConstant { epsilon } => goal(k) <= epsilon * cycle_norm,
            KSelection::ByAchieved { target } => cycle_norm + goal(k) <= *target,
        }
    };
    if let KSelection::ByAchieved { target } = selection {
        if !data.constant.is_zero() && target <= cycle_norm {
            return Err(Error::InvalidArgument(format!(
                "achieved-norm target {} does not exceed the cycle norm {}",
                rational_to_string(target),
                rational_to_string(cycle_norm)
            )));
        }
    }
    for k in 0..=opts.k_cap {
        if acceptable(k) {
            let f = folner_box(d, k);
            let enumerated = s_boundary(&f, &data.shift_set, group).len();
            let closed = box_boundary_count(d, k, &data.shift_set);
            if BigInt::from(enumerated) != closed {
                return Err(Error::Precondition(format!(
                    "boundary count mismatch at k = {k}: enumerated {enumerated}, closed form {closed}"
                )));
            }
            return Ok((k, box_boundary_ratio(d, k, &data.shift_set)));
        }
    }
    let best = goal(opts.k_cap);
    Err(Error::CapExceeded {
        cap: opts.k_cap as usize,
        best: rational_to_string(&best),
        target: match selection {
            KSelection::ByConstant { epsilon } => {
                format!("C*|dS F|/|F| <= {}*|c|", rational_to_string(epsilon))
            }
            KSelection::ByAchieved { target } => {
                format!("|c| + C*|dS F|/|F| <= {}", rational_to_string(target))
            }
        },
    })
}

/// Exact equality of two chains, tolerant of the Int/Rat coercion.
pub fn chain_eq(a: &BarChain, b: &BarChain) -> Result<bool> {
    Ok(a.sub(b)?.term_count() == 0)
}

/// The lifted state every pipeline starts from.
pub(crate) struct Lifted {
    pub c_tilde: BarChain,
    pub b_tilde: BarChain,
    pub a_tilde: BarChain,
    pub data: LiftingData,
}

/// Lift a cycle and its witness upstairs and measure the defect ã = ∂b̃ − c̃.
pub(crate) fn lift_witness(c: &BarChain, b: &BarChain) -> Result<Lifted> {
    if b.degree() != c.degree() + 1 {
        return Err(Error::DegreeMismatch(b.degree(), c.degree() + 1));
    }
    if b.backend() != c.backend() {
        return Err(Error::BackendMismatch(
            b.backend().to_string(),
            c.backend().to_string(),
        ));
    }
    if !chain_eq(&boundary(b)?, c)? {
        return Err(Error::Precondition(
            "the witness does not fill the cycle: its boundary differs from c".into(),
        ));
    }
    let c_tilde = lift(c);
    let b_tilde = lift(b);
    let a_tilde = boundary(&b_tilde)?.sub(&c_tilde)?;
    let data = lifting_data(&a_tilde, c.backend())?;
    Ok(Lifted {
        c_tilde,
        b_tilde,
        a_tilde,
        data,
    })
}

/// The outcome of a filling run: the cycle, the filling, the exact norms,
/// the bound instance the construction promises, and the verification flag
/// computed through the independent boundary checker.
#[derive(Debug, Clone)]
pub struct FillCertificate {
    /// The input cycle.
    pub cycle: BarChain,
    /// What ∂(filling) equals; identical to `cycle` except for the stable
    /// pipeline, where it is the full lift of the cycle.
    pub target: BarChain,
    pub filling: BarChain,
    pub cycle_norm: BigRational,
    pub filling_norm: BigRational,
    pub bound: BigRational,
    pub bound_formula: String,
    pub constant: BigRational,
    pub class_count: usize,
    pub coefficient_sup: BigRational,
    pub shift_set: FiniteSubset,
    pub k: Option<u64>,
    pub folner_ratio: Option<BigRational>,
    pub verified: bool,
    pub details: BTreeMap<String, String>,
}

impl FillCertificate {
    pub(crate) fn detail(&mut self, key: &str, value: impl Into<String>) {
        self.details.insert(key.to_string(), value.into());
    }

    pub fn to_json(&self, full_chains: bool, elide_above: usize) -> Value {
        let chain = |c: &BarChain| -> Value {
            if full_chains || c.term_count() <= elide_above {
                c.to_json()
            } else {
                json!({
                    "elided": true,
                    "terms": c.term_count(),
                    "l1_norm": rational_to_string(&c.l1_norm()),
                })
            }
        };
        let mut v = json!({
            "cycle": chain(&self.cycle),
            "filling": chain(&self.filling),
            "cycle_norm": rational_to_string(&self.cycle_norm),
            "filling_norm": rational_to_string(&self.filling_norm),
            "bound": rational_to_string(&self.bound),
            "bound_formula": self.bound_formula,
            "constant": rational_to_string(&self.constant),
            "classes": self.class_count,
            "coefficient_sup": rational_to_string(&self.coefficient_sup),
            "shift_set": subset_json(&self.shift_set),
            "verified": self.verified,
            "details": self.details.iter().map(|(k, val)| (k.clone(), json!(val))).collect::<serde_json::Map<_, _>>(),
        });
        let obj = v.as_object_mut().expect("certificate serializes to an object");
        if !chain_ptr_eq(&self.target, &self.cycle) {
            obj.insert("target".into(), chain(&self.target));
        }
        if let Some(k) = self.k {
            obj.insert("k".into(), json!(k));
        }
        if let Some(r) = &self.folner_ratio {
            obj.insert("folner_ratio".into(), json!(rational_to_string(r)));
        }
        v
    }
}

fn chain_ptr_eq(a: &BarChain, b: &BarChain) -> bool {
    a.backend() == b.backend()
        && a.degree() == b.degree()
        && a.term_count() == b.term_count()
        && chain_eq(a, b).unwrap_or(false)
}

pub(crate) fn certificate(
    cycle: BarChain,
    target: BarChain,
    filling: BarChain,
    bound: BigRational,
    bound_formula: String,
    data: &LiftingData,
) -> FillCertificate {
    let cycle_norm = cycle.l1_norm();
    let filling_norm = filling.l1_norm();
    FillCertificate {
        cycle,
        target,
        filling,
        cycle_norm,
        filling_norm,
        bound,
        bound_formula,
        constant: data.constant.clone(),
        class_count: data.class_count(),
        coefficient_sup: data.coefficient_sup.clone(),
        shift_set: data.shift_set.clone(),
        k: None,
        folner_ratio: None,
        verified: false,
        details: BTreeMap::new(),
    }
}

/// Finish a certificate: check ∂(filling) = target through the independent
/// verifier and compare the achieved norm against the bound.
pub(crate) fn finalize(mut cert: FillCertificate) -> FillCertificate {
    cert.verified =
        crate::oracle::verify_fill(&cert.filling, &cert.target) && cert.filling_norm <= cert.bound;
    cert
}

pub(crate) fn big_ratio(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub(crate) fn usize_ratio(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// log₂-style stage count: the least M ≥ 0 with |c|/2^M ≤ tolerance.
pub(crate) fn halving_stages(cycle_norm: &BigRational, tolerance: &BigRational) -> Result<usize> {
    if !tolerance.is_positive() {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut stages = 0usize;
    let mut current = cycle_norm.clone();
    let two = BigRational::from_integer(BigInt::from(2));
    while &current > tolerance {
        current /= &two;
        stages += 1;
        if stages > 10_000 {
            return Err(Error::InvalidArgument(
                "tolerance is so small the halving chain would not terminate sensibly".into(),
            ));
        }
    }
    Ok(stages)
}
