//! Finitely generated groups with decidable equality.
//!
//! Z^d is built in and carries all the Følner machinery (boxes, S-boundaries,
//! congruence subgroups with coset representatives). Arbitrary finite groups
//! can be supplied as multiplication tables; they get equality, subsets and
//! S-boundaries but no Følner search, since amenability data is an input
//! here, not something the library hunts for.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// A group element in canonical form.
///
/// Free abelian groups use integer vectors of their rank; table-backed
/// groups use a single index into the table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem(pub Vec<i64>);

impl Elem {
    pub fn rank(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A finite group given by its full multiplication table.
///
/// Element i is the word `[i]`. The table is checked for associativity,
/// identity and inverses on construction.
#[derive(Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    pub name: String,
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub id: usize,
    pub generators: Vec<usize>,
}

impl FiniteGroupTable {
    pub fn new(
        name: impl Into<String>,
        mul: Vec<Vec<usize>>,
        generators: Vec<usize>,
    ) -> Result<Arc<FiniteGroupTable>> {
        let n = mul.len();
        if n == 0 || mul.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("multiplication table must be square".into()));
        }
        if mul.iter().flatten().any(|&v| v >= n) {
            return Err(Error::InvalidArgument("table entry out of range".into()));
        }
        let id = (0..n)
            .find(|&e| (0..n).all(|a| mul[e][a] == a && mul[a][e] == a))
            .ok_or_else(|| Error::InvalidArgument("table has no identity".into()))?;
        let mut inv = vec![usize::MAX; n];
        for a in 0..n {
            inv[a] = (0..n)
                .find(|&b| mul[a][b] == id && mul[b][a] == id)
                .ok_or_else(|| Error::InvalidArgument(format!("element {a} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::InvalidArgument(format!(
                            "table is not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(Arc::new(FiniteGroupTable {
            name: name.into(),
            mul,
            inv,
            id,
            generators,
        }))
    }

    /// The cyclic group Z/n as a table, generated by 1.
    pub fn cyclic(n: usize) -> Arc<FiniteGroupTable> {
        let mul = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroupTable::new(format!("Z/{n}"), mul, vec![1 % n]).unwrap()
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }
}

/// The group a chain complex is built over.
#[derive(Debug, Clone)]
pub enum Group {
    /// Z^d with elements as integer vectors.
    FreeAbelian(usize),
    /// A product Z^{d_1} × … × Z^{d_m}, flattened to Z^{Σd_i} but keeping
    /// the factor shape for display.
    ProductOfFreeAbelian(Vec<usize>),
    /// Finite group with an explicit multiplication table.
    Table(Arc<FiniteGroupTable>),
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Group::FreeAbelian(a), Group::FreeAbelian(b)) => a == b,
            (Group::ProductOfFreeAbelian(a), Group::ProductOfFreeAbelian(b)) => a == b,
            (Group::Table(a), Group::Table(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Group {}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::FreeAbelian(d) => write!(f, "z^{d}"),
            Group::ProductOfFreeAbelian(ds) => {
                let parts: Vec<String> = ds.iter().map(|d| format!("z^{d}")).collect();
                write!(f, "{}", parts.join("x"))
            }
            Group::Table(t) => write!(f, "table:{}", t.name),
        }
    }
}

impl Group {
    /// Rank of the underlying free abelian group, if there is one.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Group::FreeAbelian(d) => Some(*d),
            Group::ProductOfFreeAbelian(ds) => Some(ds.iter().sum()),
            Group::Table(_) => None,
        }
    }

    pub fn is_abelian(&self) -> bool {
        match self {
            Group::FreeAbelian(_) | Group::ProductOfFreeAbelian(_) => true,
            Group::Table(t) => {
                let n = t.order();
                (0..n).all(|a| (0..n).all(|b| t.mul[a][b] == t.mul[b][a]))
            }
        }
    }

    /// Word length of elements: rank for free abelian, 1 for tables.
    pub fn elem_len(&self) -> usize {
        match self {
            Group::Table(_) => 1,
            g => g.rank().unwrap(),
        }
    }

    pub fn check_elem(&self, e: &Elem) -> Result<()> {
        if e.rank() != self.elem_len() {
            return Err(Error::InvalidArgument(format!(
                "element {e} has wrong length for group {self}"
            )));
        }
        if let Group::Table(t) = self {
            let i = e.0[0];
            if i < 0 || i as usize >= t.order() {
                return Err(Error::InvalidArgument(format!(
                    "element {e} outside table of order {}",
                    t.order()
                )));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> Elem {
        match self {
            Group::Table(t) => Elem(vec![t.id as i64]),
            g => Elem(vec![0; g.rank().unwrap()]),
        }
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match self {
            Group::Table(t) => Elem(vec![t.mul[a.0[0] as usize][b.0[0] as usize] as i64]),
            _ => Elem(a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect()),
        }
    }

    pub fn inv(&self, a: &Elem) -> Elem {
        match self {
            Group::Table(t) => Elem(vec![t.inv[a.0[0] as usize] as i64]),
            _ => Elem(a.0.iter().map(|x| -x).collect()),
        }
    }

    /// Symmetric generating set: ±e_i for free abelian groups, the listed
    /// generators and their inverses for tables.
    pub fn generators(&self) -> Vec<Elem> {
        match self {
            Group::Table(t) => {
                let mut out: Vec<Elem> = Vec::new();
                for &g in &t.generators {
                    out.push(Elem(vec![g as i64]));
                    out.push(Elem(vec![t.inv[g] as i64]));
                }
                out.sort();
                out.dedup();
                out
            }
            g => {
                let d = g.rank().unwrap();
                let mut out = Vec::with_capacity(2 * d);
                for i in 0..d {
                    for sign in [1i64, -1] {
                        let mut v = vec![0i64; d];
                        v[i] = sign;
                        out.push(Elem(v));
                    }
                }
                out.sort();
                out
            }
        }
    }

    pub fn parse(s: &str) -> Result<Group> {
        // "zd:2" and "z^2" both name Z²; "z^1xz^2" names the product.
        let single = |part: &str| -> Result<usize> {
            let body = part
                .strip_prefix("zd:")
                .or_else(|| part.strip_prefix("z^"))
                .ok_or_else(|| Error::parse("group", format!("unrecognized group {part:?}")))?;
            let d: usize = body
                .parse()
                .map_err(|_| Error::parse("group", format!("bad rank in {part:?}")))?;
            if d == 0 {
                return Err(Error::parse("group", "rank must be positive"));
            }
            Ok(d)
        };
        if s.contains('x') {
            let factors: Vec<usize> = s.split('x').map(single).collect::<Result<_>>()?;
            return Ok(Group::ProductOfFreeAbelian(factors));
        }
        Ok(Group::FreeAbelian(single(s)?))
    }

    /// The product G × H, flattening free abelian factors.
    pub fn product(&self, other: &Group) -> Result<Group> {
        let mut factors = Vec::new();
        for g in [self, other] {
            match g {
                Group::FreeAbelian(d) => factors.push(*d),
                Group::ProductOfFreeAbelian(ds) => factors.extend_from_slice(ds),
                Group::Table(_) => {
                    return Err(Error::UnsupportedBackend(
                        "products are built over free abelian factors".into(),
                    ))
                }
            }
        }
        Ok(Group::ProductOfFreeAbelian(factors))
    }
}

/// Sorted, duplicate-free set of group elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSubset {
    elems: Vec<Elem>,
}

impl FiniteSubset {
    pub fn new(mut elems: Vec<Elem>) -> FiniteSubset {
        elems.sort();
        elems.dedup();
        FiniteSubset { elems }
    }

    pub fn empty() -> FiniteSubset {
        FiniteSubset { elems: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, e: &Elem) -> bool {
        self.elems.binary_search(e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Elem> {
        self.elems.iter()
    }

    pub fn elems(&self) -> &[Elem] {
        &self.elems
    }

    pub fn inverse(&self, group: &Group) -> FiniteSubset {
        FiniteSubset::new(self.elems.iter().map(|e| group.inv(e)).collect())
    }

    /// Closure under inversion: F ∪ F⁻¹.
    pub fn symmetrize(&self, group: &Group) -> FiniteSubset {
        let mut elems = self.elems.clone();
        elems.extend(self.elems.iter().map(|e| group.inv(e)));
        FiniteSubset::new(elems)
    }

    pub fn union(&self, other: &FiniteSubset) -> FiniteSubset {
        let mut elems = self.elems.clone();
        elems.extend_from_slice(&other.elems);
        FiniteSubset::new(elems)
    }
}

/// {γ ∈ F | γ·s ∉ F for some s ∈ S}.
pub fn s_boundary(f: &FiniteSubset, s: &FiniteSubset, group: &Group) -> FiniteSubset {
    let elems = f
        .iter()
        .filter(|gamma| s.iter().any(|s_el| !f.contains(&group.mul(gamma, s_el))))
        .cloned()
        .collect();
    FiniteSubset { elems }
}

/// |∂_S F| / |F| as an exact rational.
pub fn boundary_ratio(f: &FiniteSubset, s: &FiniteSubset, group: &Group) -> BigRational {
    assert!(!f.is_empty(), "boundary ratio of the empty set");
    BigRational::new(
        BigInt::from(s_boundary(f, s, group).len()),
        BigInt::from(f.len()),
    )
}

fn box_elems(d: usize, lo: i64, hi: i64) -> Vec<Elem> {
    let side = (hi - lo + 1) as usize;
    let total = side.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![lo; d];
    loop {
        out.push(Elem(cur.clone()));
        let mut axis = d;
        while axis > 0 {
            axis -= 1;
            if cur[axis] < hi {
                cur[axis] += 1;
                for c in cur.iter_mut().skip(axis + 1) {
                    *c = lo;
                }
                break;
            }
            if axis == 0 {
                return out;
            }
        }
    }
}

/// The Følner box F_k = {0,…,k}^d in Z^d.
pub fn folner_box(d: usize, k: u64) -> FiniteSubset {
    assert!(d > 0);
    FiniteSubset {
        elems: box_elems(d, 0, k as i64),
    }
}

/// The ℓ∞ ball {−r,…,r}^d in Z^d.
pub fn linf_ball(d: usize, r: u64) -> FiniteSubset {
    assert!(d > 0);
    FiniteSubset {
        elems: box_elems(d, -(r as i64), r as i64),
    }
}

/// The congruence subgroup Γ_k = ((k+1)·Z)^d ≤ Z^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub rank: usize,
    pub modulus: u64,
}

impl Subgroup {
    pub fn index(&self) -> BigInt {
        BigInt::from(self.modulus).pow(self.rank as u32)
    }

    pub fn contains(&self, e: &Elem) -> bool {
        e.0.iter().all(|c| c.rem_euclid(self.modulus as i64) == 0)
    }

    /// Residue of an element: coordinates reduced into {0,…,modulus−1}.
    pub fn residue(&self, e: &Elem) -> Elem {
        Elem(e.0.iter().map(|c| c.rem_euclid(self.modulus as i64)).collect())
    }
}

/// Γ_k = ((k+1)Z)^d together with the representatives F_k = {0,…,k}^d,
/// checked to meet every coset exactly once.
pub fn coset_reps(d: usize, k: u64) -> (Subgroup, FiniteSubset) {
    let sub = Subgroup {
        rank: d,
        modulus: k + 1,
    };
    let reps = folner_box(d, k);
    let mut residues: Vec<Elem> = reps.iter().map(|e| sub.residue(e)).collect();
    residues.sort();
    residues.dedup();
    assert_eq!(
        residues.len(),
        reps.len(),
        "representatives collide modulo the subgroup"
    );
    (sub, reps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn s_boundary_of_empty_set() {
        let g = Group::FreeAbelian(2);
        let s = g.generators();
        let b = s_boundary(&FiniteSubset::empty(), &FiniteSubset::new(s), &g);
        assert!(b.is_empty());
    }

    #[test]
    fn s_boundary_of_z2_box() {
        let g = Group::FreeAbelian(2);
        let f = folner_box(2, 2);
        let s = FiniteSubset::new(g.generators());
        let b = s_boundary(&f, &s, &g);
        // All cells of {0,1,2}² except the center.
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&Elem(vec![1, 1])));
        assert_eq!(boundary_ratio(&f, &s, &g), rat(8, 9));
    }

    #[test]
    fn s_boundary_of_whole_finite_group() {
        let t = FiniteGroupTable::cyclic(5);
        let g = Group::Table(t);
        let all = FiniteSubset::new((0..5).map(|i| Elem(vec![i])).collect());
        let s = FiniteSubset::new(g.generators());
        assert!(s_boundary(&all, &s, &g).is_empty());
    }

    #[test]
    fn s_boundary_monotone_in_s() {
        let g = Group::FreeAbelian(1);
        let f = folner_box(1, 9);
        let small = FiniteSubset::new(vec![Elem(vec![1])]);
        let large = FiniteSubset::new(vec![Elem(vec![1]), Elem(vec![-1]), Elem(vec![3])]);
        let bs = s_boundary(&f, &small, &g);
        let bl = s_boundary(&f, &large, &g);
        assert!(bs.iter().all(|e| bl.contains(e)));
        assert!(bs.iter().all(|e| f.contains(e)));
    }

    #[test]
    fn folner_box_ratios() {
        let g1 = Group::FreeAbelian(1);
        let s1 = FiniteSubset::new(g1.generators());
        assert_eq!(boundary_ratio(&folner_box(1, 0), &s1, &g1), rat(1, 1));
        assert_eq!(boundary_ratio(&folner_box(1, 9), &s1, &g1), rat(2, 10));

        // Ratio bounded by 2d/(k+1) and non-increasing in k.
        let g3 = Group::FreeAbelian(3);
        let s3 = FiniteSubset::new(g3.generators());
        let mut prev: Option<BigRational> = None;
        for k in 1..6u64 {
            let r = boundary_ratio(&folner_box(3, k), &s3, &g3);
            assert!(r <= rat(6, (k + 1) as i64));
            if let Some(p) = prev {
                assert!(r <= p);
            }
            prev = Some(r);
        }
    }

    #[test]
    fn coset_reps_cover_residues() {
        let (sub, reps) = coset_reps(1, 2);
        assert_eq!(sub.modulus, 3);
        assert_eq!(sub.index(), BigInt::from(3));
        assert_eq!(reps.len(), 3);

        let (sub, reps) = coset_reps(2, 1);
        assert_eq!(sub.index(), BigInt::from(4));
        assert_eq!(reps.len(), 4);
        assert!(sub.contains(&Elem(vec![2, -4])));
        assert!(!sub.contains(&Elem(vec![2, 1])));

        let (sub, _) = coset_reps(1, 0);
        assert_eq!(sub.index(), BigInt::from(1));
    }

    #[test]
    fn table_group_arithmetic() {
        let g = Group::Table(FiniteGroupTable::cyclic(6));
        let a = Elem(vec![4]);
        let b = Elem(vec![5]);
        assert_eq!(g.mul(&a, &b), Elem(vec![3]));
        assert_eq!(g.mul(&a, &g.inv(&a)), g.id());
        assert!(g.is_abelian());

        let bad = FiniteGroupTable::new("bad", vec![vec![0, 1], vec![1, 1]], vec![1]);
        assert!(bad.is_err());
    }

    #[test]
    fn linf_ball_shape() {
        let b = linf_ball(2, 1);
        assert_eq!(b.len(), 9);
        assert!(b.contains(&Elem(vec![-1, 1])));
        assert!(!b.contains(&Elem(vec![2, 0])));
    }
}
