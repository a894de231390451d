//! The equivariant simplicial resolution of a group: chains of homogeneous
//! tuples (γ₀,…,γ_n), the alternating-face differential, the Γ-action, the
//! norm-1 cone contraction, and the projections onto coefficient quotients.
//!
//! Three quotients of the same resolution appear:
//!
//! * `Raw` is the resolution upstairs, nothing identified. Chains here may
//!   carry integer, rational, or step-function coefficients.
//! * `Full` divides by all of Γ. Cells are tuples with first entry 1.
//!   With trivial coefficients this is the group's chain complex; with
//!   step-function coefficients it is the parametrised complex
//!   L∞(X;Z) ⊗_{ZΓ} C_*.
//! * `Mod(m)` divides by the congruence subgroup (mZ)^d only, modelling the
//!   degree-m^d cover. Cells are tuples whose first entry has all
//!   coordinates in {0,…,m−1}.
//!
//! The complex is never materialized; cells come into being inside chains.

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::action::OdometerAction;
use crate::chain::{Cell, ChainBackend, FormalChain};
use crate::coeff::{Coefficient, MeasuredSet, Ring};
use crate::error::{Error, Result};
use crate::group::{folner_box, Elem, FiniteSubset, Group, Subgroup};

/// A homogeneous tuple of group elements, stored flat: entry i occupies
/// `entries[i*width .. (i+1)*width]` where width is the group's element
/// length. The width lives on the backend, not the tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple {
    entries: Box<[i64]>,
}

impl Tuple {
    pub fn from_flat(entries: Vec<i64>) -> Tuple {
        Tuple {
            entries: entries.into_boxed_slice(),
        }
    }

    pub fn from_entries(entries: &[&[i64]]) -> Tuple {
        let mut flat = Vec::with_capacity(entries.len() * entries.first().map_or(0, |e| e.len()));
        for e in entries {
            flat.extend_from_slice(e);
        }
        Tuple::from_flat(flat)
    }

    pub fn from_elems(elems: &[Elem]) -> Tuple {
        let refs: Vec<&[i64]> = elems.iter().map(|e| e.0.as_slice()).collect();
        Tuple::from_entries(&refs)
    }

    pub fn flat(&self) -> &[i64] {
        &self.entries
    }

    pub fn arity(&self, width: usize) -> usize {
        debug_assert_eq!(self.entries.len() % width, 0);
        self.entries.len() / width
    }

    pub fn entry(&self, i: usize, width: usize) -> &[i64] {
        &self.entries[i * width..(i + 1) * width]
    }

    pub fn entry_elem(&self, i: usize, width: usize) -> Elem {
        Elem(self.entry(i, width).to_vec())
    }

    /// The tuple with entry i deleted.
    pub fn face(&self, i: usize, width: usize) -> Tuple {
        let mut flat = Vec::with_capacity(self.entries.len() - width);
        flat.extend_from_slice(&self.entries[..i * width]);
        flat.extend_from_slice(&self.entries[(i + 1) * width..]);
        Tuple::from_flat(flat)
    }

    /// γ·σ: left translation of every entry.
    pub fn translated(&self, gamma: &Elem, group: &Group) -> Tuple {
        match group {
            Group::Table(t) => {
                let g = gamma.0[0] as usize;
                let flat = self.entries.iter().map(|&e| t.mul[g][e as usize] as i64).collect();
                Tuple { entries: flat }
            }
            _ => {
                let width = gamma.0.len();
                let mut flat = self.entries.to_vec();
                for chunk in flat.chunks_mut(width) {
                    for (c, g) in chunk.iter_mut().zip(&gamma.0) {
                        *c += g;
                    }
                }
                Tuple::from_flat(flat)
            }
        }
    }

    /// (1, γ₀, …, γ_n): the cone over this tuple.
    pub fn coned(&self, group: &Group) -> Tuple {
        let id = group.id();
        let mut flat = Vec::with_capacity(self.entries.len() + id.0.len());
        flat.extend_from_slice(&id.0);
        flat.extend_from_slice(&self.entries);
        Tuple::from_flat(flat)
    }
}

/// Which identifications are applied to raw tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quotient {
    /// No identification: the resolution upstairs.
    Raw,
    /// Divide by all of Γ; representatives have first entry 1.
    Full,
    /// Divide by the congruence subgroup (mZ)^d; representatives have first
    /// entry with coordinates in {0,…,m−1}. Free abelian groups only.
    Mod(u64),
}

/// A bar-resolution chain complex: group, quotient, and (for parametrised
/// coefficients) the measured action the coefficients transform under.
#[derive(Debug, Clone)]
pub struct BarBackend {
    pub group: Group,
    pub quotient: Quotient,
    pub action: Option<Arc<OdometerAction>>,
}

impl PartialEq for BarBackend {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.quotient == other.quotient && self.action == other.action
    }
}

impl fmt::Display for BarBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bar:{}", self.group)?;
        match self.quotient {
            Quotient::Full => {}
            Quotient::Raw => write!(f, ":raw")?,
            Quotient::Mod(m) => write!(f, ":mod={m}")?,
        }
        if let Some(a) = &self.action {
            write!(f, ":param={}", a.space.name)?;
        }
        Ok(())
    }
}

impl ChainBackend for BarBackend {
    fn space(&self) -> Option<&Arc<MeasuredSet>> {
        self.action.as_ref().map(|a| &a.space)
    }
}

impl BarBackend {
    pub fn full(group: Group) -> BarBackend {
        BarBackend {
            group,
            quotient: Quotient::Full,
            action: None,
        }
    }

    pub fn raw(group: Group) -> BarBackend {
        BarBackend {
            group,
            quotient: Quotient::Raw,
            action: None,
        }
    }

    pub fn modular(group: Group, m: u64) -> Result<BarBackend> {
        if group.rank().is_none() {
            return Err(Error::UnsupportedBackend(
                "congruence quotients need a free abelian group".into(),
            ));
        }
        Ok(BarBackend {
            group,
            quotient: Quotient::Mod(m),
            action: None,
        })
    }

    pub fn parametrised(action: Arc<OdometerAction>) -> BarBackend {
        BarBackend {
            group: action.group(),
            quotient: Quotient::Full,
            action: Some(action),
        }
    }

    pub fn parametrised_raw(action: Arc<OdometerAction>) -> BarBackend {
        BarBackend {
            group: action.group(),
            quotient: Quotient::Raw,
            action: Some(action),
        }
    }

    /// The same backend with the quotient stripped: where lifts live.
    pub fn upstairs(&self) -> BarBackend {
        BarBackend {
            group: self.group.clone(),
            quotient: Quotient::Raw,
            action: self.action.clone(),
        }
    }

    pub fn width(&self) -> usize {
        self.group.elem_len()
    }

    pub fn parse(s: &str) -> Result<BarBackend> {
        let rest = s
            .strip_prefix("bar:")
            .ok_or_else(|| Error::parse("backend", format!("unrecognized backend {s:?}")))?;
        let (head, action) = match rest.split_once(":param=") {
            Some((head, space)) => (head, Some(OdometerAction::parse(space)?)),
            None => (rest, None),
        };
        let (group_str, quotient) = match head.split_once(':') {
            None => (head, Quotient::Full),
            Some((g, "raw")) => (g, Quotient::Raw),
            Some((g, q)) => match q.strip_prefix("mod=") {
                Some(m) => {
                    let m = m
                        .parse::<u64>()
                        .map_err(|_| Error::parse("backend", format!("bad modulus {q:?}")))?;
                    if m == 0 {
                        return Err(Error::parse("backend", "modulus must be positive"));
                    }
                    (g, Quotient::Mod(m))
                }
                None => return Err(Error::parse("backend", format!("unknown quotient {q:?}"))),
            },
        };
        let group = Group::parse(group_str)?;
        if let Some(a) = &action {
            if group != a.group() {
                return Err(Error::parse(
                    "backend",
                    "parametrised backend group must match the acting group",
                ));
            }
        }
        let backend = BarBackend {
            group,
            quotient,
            action,
        };
        if matches!(backend.quotient, Quotient::Mod(_)) && backend.action.is_some() {
            return Err(Error::parse(
                "backend",
                "congruence quotients do not carry parametrised coefficients",
            ));
        }
        Ok(backend)
    }

    /// The translation γ with γ·t canonical, for a tuple with the given
    /// first entry.
    pub(crate) fn canonical_shift(&self, first: &Elem) -> Elem {
        match self.quotient {
            Quotient::Raw => self.group.id(),
            Quotient::Full => self.group.inv(first),
            Quotient::Mod(m) => {
                let m = m as i64;
                Elem(first.0.iter().map(|c| c.rem_euclid(m) - c).collect())
            }
        }
    }

    fn first_entry_canonical(&self, t: &Tuple) -> bool {
        let width = self.width();
        let first = t.entry(0, width);
        match self.quotient {
            Quotient::Raw => true,
            Quotient::Full => match &self.group {
                Group::Table(tab) => first[0] == tab.id as i64,
                _ => first.iter().all(|&c| c == 0),
            },
            Quotient::Mod(m) => first.iter().all(|&c| 0 <= c && c < m as i64),
        }
    }
}

impl Cell for Tuple {
    type Backend = BarBackend;

    fn check(&self, backend: &BarBackend, degree: usize) -> Result<()> {
        let width = backend.width();
        if self.entries.len() != (degree + 1) * width {
            return Err(Error::Precondition(format!(
                "tuple {:?} is not a degree-{degree} cell of {backend}",
                self.entries
            )));
        }
        for i in 0..=degree {
            backend.group.check_elem(&self.entry_elem(i, width))?;
        }
        if !backend.first_entry_canonical(self) {
            return Err(Error::Precondition(format!(
                "tuple {:?} is not in canonical form for {backend}",
                self.entries
            )));
        }
        Ok(())
    }

    fn to_json(&self) -> Value {
        json!(self.entries.to_vec())
    }

    fn from_json(v: &Value, backend: &BarBackend, degree: usize) -> Result<Tuple> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::parse("cell", "cell must be a list of entries"))?;
        let width = backend.width();
        let flat: Vec<i64> = if arr.len() == (degree + 1) * width && arr.iter().all(Value::is_i64) {
            arr.iter().map(|x| x.as_i64().unwrap()).collect()
        } else {
            let mut flat = Vec::with_capacity((degree + 1) * width);
            for entry in arr {
                let entry = entry
                    .as_array()
                    .ok_or_else(|| Error::parse("cell", "entry must be an integer vector"))?;
                for c in entry {
                    flat.push(
                        c.as_i64()
                            .ok_or_else(|| Error::parse("cell", "entry coordinate must be an integer"))?,
                    );
                }
            }
            flat
        };
        let t = Tuple::from_flat(flat);
        t.check(backend, degree)?;
        Ok(t)
    }
}

pub type BarChain = FormalChain<Tuple>;

/// Canonicalize one raw term against a backend's quotient: returns the
/// representative cell and the transported coefficient. The representative
/// is γ·t for the canonical shift γ, and the coefficient picks up γ⁻¹ on
/// the right, matching the action γ·(a ⊗ σ) = a·γ⁻¹ ⊗ γ·σ.
fn reduce_term(backend: &BarBackend, t: &Tuple, coef: &Coefficient) -> (Tuple, Coefficient) {
    let width = backend.width();
    let gamma = backend.canonical_shift(&t.entry_elem(0, width));
    if gamma == backend.group.id() {
        return (t.clone(), coef.clone());
    }
    let rep = t.translated(&gamma, &backend.group);
    let coef = match (coef, &backend.action) {
        (Coefficient::Step(f), Some(action)) => {
            Coefficient::Step(action.act(f, &backend.group.inv(&gamma)))
        }
        _ => coef.clone(),
    };
    (rep, coef)
}

/// The simplicial differential: alternating sum of vertex deletions, each
/// face re-canonicalized for the chain's quotient.
pub fn boundary(c: &BarChain) -> Result<BarChain> {
    let n = c.degree();
    if n == 0 {
        return Err(Error::Precondition(
            "boundary of a degree-0 chain (the augmentation is not exposed)".into(),
        ));
    }
    let backend = c.backend().clone();
    let width = backend.width();
    let mut out = BarChain::zero(backend.clone(), n - 1, c.ring());
    for (t, coef) in c.terms() {
        for i in 0..=n {
            let face = t.face(i, width);
            let signed = if i % 2 == 0 { coef.clone() } else { coef.neg() };
            let (rep, moved) = reduce_term(&backend, &face, &signed);
            out.add_term(rep, moved)?;
        }
    }
    Ok(out)
}

/// γ·c on a raw chain: every tuple translated, every coefficient hit with
/// γ⁻¹ on the right.
pub fn translate(c: &BarChain, gamma: &Elem) -> Result<BarChain> {
    let backend = c.backend();
    if backend.quotient != Quotient::Raw {
        return Err(Error::UnsupportedBackend(format!(
            "translation acts upstairs, not on {backend}"
        )));
    }
    let group = &backend.group;
    let gamma_inv = group.inv(gamma);
    let mut out = BarChain::zero(backend.clone(), c.degree(), c.ring());
    for (t, coef) in c.terms() {
        let coef = match (coef, &backend.action) {
            (Coefficient::Step(f), Some(action)) => Coefficient::Step(action.act(f, &gamma_inv)),
            _ => coef.clone(),
        };
        out.add_term(t.translated(gamma, group), coef)?;
    }
    Ok(out)
}

/// Σ_{γ∈F} γ·c, accumulated in one pass.
pub fn translate_sum(c: &BarChain, f: &FiniteSubset) -> Result<BarChain> {
    let mut out = BarChain::zero(c.backend().clone(), c.degree(), c.ring());
    for gamma in f.iter() {
        let moved = translate(c, gamma)?;
        out = out.add(&moved)?;
    }
    Ok(out)
}

/// The contraction s(γ₀,…,γ_n) = (1,γ₀,…,γ_n), extended linearly. Raw
/// chains only; sends degree n to n+1 and never increases the norm.
pub fn cone(z: &BarChain) -> Result<BarChain> {
    let backend = z.backend();
    if backend.quotient != Quotient::Raw {
        return Err(Error::UnsupportedBackend(format!(
            "the cone contraction lives upstairs, not on {backend}"
        )));
    }
    let group = &backend.group;
    let mut out = BarChain::zero(backend.clone(), z.degree() + 1, z.ring());
    for (t, coef) in z.terms() {
        out.add_term(t.coned(group), coef.clone())?;
    }
    Ok(out)
}

/// cone(∂c): the canonical filling of c's boundary. Satisfies
/// ∂(fill_boundary(c)) = ∂c with |fill_boundary(c)|₁ ≤ |∂c|₁.
pub fn fill_boundary(c: &BarChain) -> Result<BarChain> {
    cone(&boundary(c)?)
}

/// Project a raw chain onto a quotient backend (same group and action).
pub fn project(c: &BarChain, target: &BarBackend) -> Result<BarChain> {
    let src = c.backend();
    if src.quotient != Quotient::Raw {
        return Err(Error::UnsupportedBackend(format!(
            "projection starts upstairs, not at {src}"
        )));
    }
    if src.group != target.group || src.action != target.action {
        return Err(Error::BackendMismatch(src.to_string(), target.to_string()));
    }
    if matches!(target.quotient, Quotient::Mod(_)) && c.ring() == Ring::Step {
        return Err(Error::UnsupportedBackend(
            "congruence quotients carry trivial coefficients".into(),
        ));
    }
    let mut out = BarChain::zero(target.clone(), c.degree(), c.ring());
    for (t, coef) in c.terms() {
        let (rep, moved) = reduce_term(target, t, coef);
        out.add_term(rep, moved)?;
    }
    Ok(out)
}

/// The canonical lift: each representative cell, being a genuine tuple
/// upstairs, is reused verbatim. project(lift(c)) = c and |lift(c)|₁ = |c|₁
/// for reduced c.
pub fn lift(c: &BarChain) -> BarChain {
    let upstairs = c.backend().upstairs();
    let mut out = BarChain::zero(upstairs, c.degree(), c.ring());
    for (t, coef) in c.terms() {
        out.add_term(t.clone(), coef.clone())
            .expect("raw backend accepts every cell");
    }
    out
}

/// The full lift of a trivial-coefficient chain to the degree-(k+1)^d
/// congruence cover: project_{Γ_k}(F_k · lift(c)).
pub fn full_lift(c: &BarChain, k: u64) -> Result<BarChain> {
    let backend = c.backend();
    if backend.quotient != Quotient::Full || backend.action.is_some() {
        return Err(Error::UnsupportedBackend(format!(
            "full lifts start from the trivial-coefficient quotient, not {backend}"
        )));
    }
    let d = backend
        .group
        .rank()
        .ok_or_else(|| Error::UnsupportedBackend("full lifts need a free abelian group".into()))?;
    let target = BarBackend::modular(backend.group.clone(), k + 1)?;
    let spread = translate_sum(&lift(c), &folner_box(d, k))?;
    project(&spread, &target)
}

/// Re-project a congruence-cover chain down the tower to the full quotient.
pub fn push_down(c: &BarChain) -> Result<BarChain> {
    let backend = c.backend();
    if !matches!(backend.quotient, Quotient::Mod(_)) {
        return Err(Error::UnsupportedBackend(format!(
            "push-down starts on a congruence cover, not {backend}"
        )));
    }
    project(&lift(c), &BarBackend::full(backend.group.clone()))
}

/// The subgroup a Mod backend quotients by.
pub fn mod_subgroup(backend: &BarBackend) -> Option<Subgroup> {
    match backend.quotient {
        Quotient::Mod(m) => backend.group.rank().map(|rank| Subgroup { rank, modulus: m }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn int_chain(backend: BarBackend, degree: usize, terms: &[(i64, &[i64])]) -> BarChain {
        BarChain::from_terms(
            backend,
            degree,
            Ring::Int,
            terms
                .iter()
                .map(|(k, flat)| (Tuple::from_flat(flat.to_vec()), Coefficient::int(*k))),
        )
        .unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn degree_one_boundary_dies_in_the_quotient() {
        let full = BarBackend::full(Group::FreeAbelian(1));
        let c = int_chain(full, 1, &[(1, &[0, 1])]);
        assert!(boundary(&c).unwrap().is_zero());

        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let c = int_chain(raw, 1, &[(1, &[0, 1])]);
        let b = boundary(&c).unwrap();
        assert_eq!(b, int_chain(BarBackend::raw(Group::FreeAbelian(1)), 0, &[(1, &[1]), (-1, &[0])]));
    }

    #[test]
    fn bar_differential_of_a_two_simplex() {
        // ∂(1,a,a²) = (a,a²) − (1,a²) + (1,a) → 2[a] − [a²] downstairs.
        let full = BarBackend::full(Group::FreeAbelian(1));
        let c = int_chain(full.clone(), 2, &[(1, &[0, 1, 2])]);
        let b = boundary(&c).unwrap();
        assert_eq!(b, int_chain(full, 1, &[(2, &[0, 1]), (-1, &[0, 2])]));
        assert_eq!(b.l1_norm(), rat(3, 1));
    }

    #[test]
    fn boundary_squares_to_zero() {
        let raw = BarBackend::raw(Group::FreeAbelian(2));
        let c = int_chain(raw, 3, &[(1, &[0, 0, 1, 0, 0, 1, 1, 1])]);
        let bb = boundary(&boundary(&c).unwrap()).unwrap();
        assert!(bb.is_zero());

        let mut rng = StdRng::seed_from_u64(7);
        for quotient in [Quotient::Raw, Quotient::Full, Quotient::Mod(3)] {
            let backend = BarBackend {
                group: Group::FreeAbelian(2),
                quotient,
                action: None,
            };
            let mut c = BarChain::zero(backend.clone(), 3, Ring::Int);
            for _ in 0..5 {
                let mut flat: Vec<i64> = (0..8).map(|_| rng.gen_range(-2..3)).collect();
                match quotient {
                    Quotient::Full => flat[..2].fill(0),
                    Quotient::Mod(m) => {
                        for c in flat[..2].iter_mut() {
                            *c = c.rem_euclid(m as i64);
                        }
                    }
                    Quotient::Raw => {}
                }
                c.add_term(Tuple::from_flat(flat), Coefficient::int(rng.gen_range(-3i64..4)))
                    .unwrap();
            }
            let bb = boundary(&boundary(&c).unwrap()).unwrap();
            assert!(bb.is_zero(), "∂∂ ≠ 0 on {backend}");
        }
    }

    #[test]
    fn boundary_of_degree_zero_is_refused() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let c = int_chain(raw, 0, &[(1, &[4])]);
        assert!(boundary(&c).is_err());
    }

    #[test]
    fn translation_is_an_action_commuting_with_boundary() {
        let raw = BarBackend::raw(Group::FreeAbelian(2));
        let c = int_chain(
            raw.clone(),
            2,
            &[(2, &[0, 0, 1, 0, 1, 1]), (-1, &[1, 0, 0, 1, 2, 2])],
        );
        let g = Elem(vec![3, -1]);
        let h = Elem(vec![-2, 5]);
        let gh = raw.group.mul(&g, &h);
        let via_two = translate(&translate(&c, &h).unwrap(), &g).unwrap();
        assert_eq!(via_two, translate(&c, &gh).unwrap());

        let left = boundary(&translate(&c, &g).unwrap()).unwrap();
        let right = translate(&boundary(&c).unwrap(), &g).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn cone_fills_cycles() {
        let raw = BarBackend::raw(Group::FreeAbelian(2));
        let w = int_chain(raw, 2, &[(1, &[0, 0, 1, 0, 1, 1])]);
        let z = boundary(&w).unwrap();
        let filled = cone(&z).unwrap();
        assert_eq!(boundary(&filled).unwrap(), z);
        assert!(filled.l1_norm() <= z.l1_norm());
    }

    #[test]
    fn fill_boundary_matches_its_contract() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let c = int_chain(raw, 2, &[(1, &[0, 1, 2])]);
        let filled = fill_boundary(&c).unwrap();
        assert_eq!(boundary(&filled).unwrap(), boundary(&c).unwrap());
        assert!(filled.l1_norm() <= boundary(&c).unwrap().l1_norm());
        assert!(filled.l1_norm() <= rat(3, 1));

        // A cycle fills to zero.
        let z = boundary(&int_chain(BarBackend::raw(Group::FreeAbelian(1)), 2, &[(1, &[0, 1, 2])])).unwrap();
        assert!(fill_boundary(&z).unwrap().is_zero());
    }

    #[test]
    fn projection_collapses_orbits() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let full = BarBackend::full(Group::FreeAbelian(1));
        // (1,a) + (a,a²) → 2[a]
        let c = int_chain(raw.clone(), 1, &[(1, &[0, 1]), (1, &[1, 2])]);
        let p = project(&c, &full).unwrap();
        assert_eq!(p, int_chain(full.clone(), 1, &[(2, &[0, 1])]));
        assert!(p.l1_norm() <= c.l1_norm());

        // project(γ·x) = project(x)
        let moved = translate(&c, &Elem(vec![-7])).unwrap();
        assert_eq!(project(&moved, &full).unwrap(), p);
    }

    #[test]
    fn lift_then_project_is_identity() {
        let full = BarBackend::full(Group::FreeAbelian(2));
        let c = int_chain(
            full.clone(),
            1,
            &[(3, &[0, 0, 1, 4]), (-2, &[0, 0, 2, -1])],
        );
        let up = lift(&c);
        assert_eq!(up.l1_norm(), c.l1_norm());
        assert_eq!(project(&up, &full).unwrap(), c);
    }

    #[test]
    fn full_lift_of_a_loop() {
        let full = BarBackend::full(Group::FreeAbelian(1));
        let c = int_chain(full.clone(), 1, &[(1, &[0, 1])]);

        // Γ_0 = Γ: the chain itself.
        let c0 = full_lift(&c, 0).unwrap();
        assert_eq!(c0, int_chain(BarBackend::modular(Group::FreeAbelian(1), 1).unwrap(), 1, &[(1, &[0, 1])]));

        // Γ_2 = 3Z: three orbit cells of total norm 3.
        let c2 = full_lift(&c, 2).unwrap();
        assert_eq!(c2.term_count(), 3);
        assert_eq!(c2.l1_norm(), rat(3, 1));
        assert_eq!(
            c2,
            int_chain(
                BarBackend::modular(Group::FreeAbelian(1), 3).unwrap(),
                1,
                &[(1, &[0, 1]), (1, &[1, 2]), (1, &[2, 3])]
            )
        );

        // Push-down along the cover recovers d_k · c.
        assert_eq!(push_down(&c2).unwrap(), c.scale_int(3));
    }

    #[test]
    fn parametrised_projection_transports_coefficients() {
        let x = OdometerAction::new(1, 6).unwrap();
        let raw = BarBackend::parametrised_raw(x.clone());
        let full = BarBackend::parametrised(x.clone());

        let f = x.indicator([0, 1]);
        let mut c = BarChain::zero(raw.clone(), 1, Ring::Step);
        c.add_term(Tuple::from_flat(vec![2, 3]), Coefficient::Step(f.clone())).unwrap();

        // (2,3) = 2·(0,1): representative (0,1), coefficient f·2 (that is,
        // x ↦ f(x+2), support {4,5}).
        let p = project(&c, &full).unwrap();
        let expect = x.act(&f, &Elem(vec![2]));
        assert_eq!(expect, x.indicator([4, 5]));
        let got = p.coefficient(&Tuple::from_flat(vec![0, 1])).unwrap();
        assert_eq!(got, &Coefficient::Step(expect));

        // Boundary downstairs stays a chain map: ∂∘project = project∘∂.
        let via_projection = boundary(&p).unwrap();
        let via_raw = project(&boundary(&c).unwrap(), &full).unwrap();
        assert_eq!(via_projection, via_raw);
    }

    #[test]
    fn backend_strings_round_trip() {
        let x = OdometerAction::new(1, 12).unwrap();
        for backend in [
            BarBackend::full(Group::FreeAbelian(2)),
            BarBackend::raw(Group::FreeAbelian(3)),
            BarBackend::modular(Group::FreeAbelian(1), 3).unwrap(),
            BarBackend::parametrised(x.clone()),
            BarBackend::parametrised_raw(x),
        ] {
            let s = backend.to_string();
            let parsed = BarBackend::parse(&s).unwrap();
            assert_eq!(parsed, backend, "{s}");
        }
        assert!(BarBackend::parse("bar:z^1:mod=0").is_err());
        assert!(BarBackend::parse("simplicial:z^1").is_err());
    }

    #[test]
    fn chain_json_round_trip_with_cells() {
        let full = BarBackend::full(Group::FreeAbelian(2));
        let c = int_chain(full.clone(), 1, &[(2, &[0, 0, 1, 0]), (-1, &[0, 0, 1, 1])]);
        let v = c.to_json();
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"backend\":\"bar:z^2\""));
        let back = BarChain::from_json(&v, full).unwrap();
        assert_eq!(back, c);

        // Nested entry encoding is accepted too.
        let nested: Value = serde_json::from_str(
            r#"{"backend":"bar:z^2","degree":1,"ring":"Z",
                "terms":[{"cell":[[0,0],[1,0]],"coef":"2"},{"cell":[[0,0],[1,1]],"coef":"-1"}]}"#,
        )
        .unwrap();
        let from_nested = BarChain::from_json(&nested, BarBackend::full(Group::FreeAbelian(2))).unwrap();
        assert_eq!(from_nested, c);
    }
}
