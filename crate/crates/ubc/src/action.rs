//! Finite measured Γ-spaces and tower decompositions.
//!
//! The only built-in space is the torus odometer: Z^d acting on (Z/N)^d by
//! coordinate-wise translation. It is finite rather than essentially free,
//! but the filling algorithms consume nothing beyond the tower properties,
//! and those are constructed explicitly and re-verified by enumeration on
//! every family handed out.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::coeff::{rational_to_string, MeasuredSet, StepFunction};
use crate::error::{Error, Result};
use crate::group::{boundary_ratio, folner_box, Elem, FiniteSubset, Group};

/// Z^d acting on the points of (Z/N)^d by translation mod N.
///
/// Point p encodes coordinates (x_0,…,x_{d−1}) with x_i ∈ {0,…,N−1} via
/// p = Σ x_i · N^i.
#[derive(Debug)]
pub struct OdometerAction {
    pub dims: usize,
    pub modulus: u64,
    pub space: Arc<MeasuredSet>,
}

impl PartialEq for OdometerAction {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims && self.modulus == other.modulus
    }
}

impl Eq for OdometerAction {}

impl OdometerAction {
    pub fn new(dims: usize, modulus: u64) -> Result<Arc<OdometerAction>> {
        if dims == 0 || modulus == 0 {
            return Err(Error::InvalidArgument(
                "odometer needs positive dimension and modulus".into(),
            ));
        }
        let size = (modulus as u128).checked_pow(dims as u32).and_then(|s| {
            if s <= u64::MAX as u128 {
                Some(s as u64)
            } else {
                None
            }
        });
        let size =
            size.ok_or_else(|| Error::InvalidArgument(format!("odometer {modulus}^{dims} is too large")))?;
        let space = MeasuredSet::new(format!("odometer:{dims}:{modulus}"), size);
        Ok(Arc::new(OdometerAction {
            dims,
            modulus,
            space,
        }))
    }

    pub fn group(&self) -> Group {
        Group::FreeAbelian(self.dims)
    }

    pub fn coords(&self, mut p: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.dims);
        for _ in 0..self.dims {
            out.push(p % self.modulus);
            p /= self.modulus;
        }
        out
    }

    pub fn point(&self, coords: &[u64]) -> u64 {
        debug_assert_eq!(coords.len(), self.dims);
        let mut p = 0u64;
        for &c in coords.iter().rev() {
            debug_assert!(c < self.modulus);
            p = p * self.modulus + c;
        }
        p
    }

    /// γ · p: translation of the point by the group element.
    pub fn apply(&self, gamma: &Elem, p: u64) -> u64 {
        let n = self.modulus as i64;
        let mut coords = self.coords(p);
        for (c, g) in coords.iter_mut().zip(&gamma.0) {
            *c = (*c as i64 + g).rem_euclid(n) as u64;
        }
        self.point(&coords)
    }

    /// The right action on step functions: (f·γ)(x) = f(γ·x).
    pub fn act(&self, f: &StepFunction, gamma: &Elem) -> StepFunction {
        let inv = Elem(gamma.0.iter().map(|g| -g).collect());
        f.relabel(|p| self.apply(&inv, p))
    }

    pub fn translate_points(&self, gamma: &Elem, points: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = points.iter().map(|&p| self.apply(gamma, p)).collect();
        out.sort_unstable();
        out
    }

    pub fn indicator(&self, points: impl IntoIterator<Item = u64>) -> StepFunction {
        StepFunction::indicator(self.space.clone(), points)
    }

    pub fn parse(s: &str) -> Result<Arc<OdometerAction>> {
        let rest = s
            .strip_prefix("odometer:")
            .ok_or_else(|| Error::parse("space", format!("unrecognized space {s:?}")))?;
        let (d, n) = rest
            .split_once(':')
            .ok_or_else(|| Error::parse("space", "expected odometer:<d>:<N>"))?;
        let dims = d
            .parse::<usize>()
            .map_err(|_| Error::parse("space", format!("bad dimension {d:?}")))?;
        let modulus = n
            .parse::<u64>()
            .map_err(|_| Error::parse("space", format!("bad modulus {n:?}")))?;
        OdometerAction::new(dims, modulus)
    }
}

/// One tower: a Følner shape F and a base block A, standing for the
/// disjoint translates {γ·A : γ ∈ F}.
#[derive(Debug, Clone)]
pub struct Tower {
    pub shape: FiniteSubset,
    pub base: Vec<u64>,
}

/// A decomposition X = (⊔_i F_i·A_i) ⊔ B into towers plus leftover.
#[derive(Debug)]
pub struct TowerFamily {
    pub action: Arc<OdometerAction>,
    pub towers: Vec<Tower>,
    pub leftover: Vec<u64>,
}

impl TowerFamily {
    /// All points of the i-th tower, sorted.
    pub fn tower_points(&self, i: usize) -> Vec<u64> {
        let t = &self.towers[i];
        let mut pts: Vec<u64> = t
            .shape
            .iter()
            .flat_map(|gamma| t.base.iter().map(move |&p| self.action.apply(gamma, p)))
            .collect();
        pts.sort_unstable();
        pts
    }

    pub fn leftover_measure(&self) -> BigRational {
        self.action.space.measure(self.leftover.len() as u64)
    }

    /// Checks every structural property by enumeration: translates of each
    /// base are pairwise disjoint, towers are pairwise disjoint, and the
    /// towers together with the leftover partition the space.
    pub fn verify(&self) -> Result<()> {
        let size = self.action.space.size;
        let mut seen = vec![false; size as usize];
        let mut mark = |p: u64, what: &str| -> Result<()> {
            let slot = &mut seen[p as usize];
            if *slot {
                return Err(Error::Precondition(format!(
                    "tower family is not disjoint: point {p} hit twice ({what})"
                )));
            }
            *slot = true;
            Ok(())
        };
        for (i, t) in self.towers.iter().enumerate() {
            for gamma in t.shape.iter() {
                for &p in &t.base {
                    mark(self.action.apply(gamma, p), &format!("tower {i}, level {gamma}"))?;
                }
            }
        }
        for &p in &self.leftover {
            mark(p, "leftover")?;
        }
        if let Some(p) = seen.iter().position(|&s| !s) {
            return Err(Error::Precondition(format!(
                "tower family does not cover the space: point {p} missed"
            )));
        }
        let covered: usize =
            self.towers.iter().map(|t| t.shape.len() * t.base.len()).sum::<usize>() + self.leftover.len();
        if covered as u64 != size {
            return Err(Error::Precondition(
                "tower family measure accounting is off".into(),
            ));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "space": self.action.space.name,
            "towers": self.towers.iter().map(|t| json!({
                "shape": t.shape.iter().map(|e| e.0.clone()).collect::<Vec<_>>(),
                "base": t.base,
            })).collect::<Vec<_>>(),
            "leftover": self.leftover,
            "leftover_measure": rational_to_string(&self.leftover_measure()),
        })
    }
}

/// A single Rokhlin tower for the odometer with shape F_k = {0,…,k}^d.
///
/// When (k+1) divides N the translates of the base tile the space exactly
/// and the leftover is empty; otherwise the base is the largest aligned
/// sub-grid whose tower still fits, and the leftover is everything missed.
pub fn rokhlin_tower(action: &Arc<OdometerAction>, k: u64) -> Result<TowerFamily> {
    let n = action.modulus;
    if k + 1 > n {
        return Err(Error::TowerInfeasible(format!(
            "tower of height {} does not fit in modulus {n}",
            k + 1
        )));
    }
    let q = n / (k + 1);
    let axis_coords: Vec<u64> = (0..q).map(|m| m * (k + 1)).collect();

    let mut base = vec![Vec::new()];
    for _ in 0..action.dims {
        let mut next = Vec::with_capacity(base.len() * axis_coords.len());
        for prefix in &base {
            for &c in &axis_coords {
                let mut v = prefix.clone();
                v.push(c);
                next.push(v);
            }
        }
        base = next;
    }
    let mut base: Vec<u64> = base.iter().map(|coords| action.point(coords)).collect();
    base.sort_unstable();

    let shape = folner_box(action.dims, k);
    let mut covered = vec![false; action.space.size as usize];
    for gamma in shape.iter() {
        for &p in &base {
            covered[action.apply(gamma, p) as usize] = true;
        }
    }
    let leftover: Vec<u64> = (0..action.space.size).filter(|&p| !covered[p as usize]).collect();

    let family = TowerFamily {
        action: action.clone(),
        towers: vec![Tower { shape, base }],
        leftover,
    };
    family.verify()?;
    Ok(family)
}

/// Tower provider in the Ornstein–Weiss style: finds a family whose shapes
/// are (S,ε)-invariant and whose leftover has measure below ε.
///
/// The search prefers the smallest admissible k whose box tiles exactly
/// ((k+1) | N, empty leftover) and otherwise takes the smallest k whose
/// leftover is still below ε. Every returned family has been re-verified by
/// enumeration.
pub fn ow_towers(
    action: &Arc<OdometerAction>,
    s: &FiniteSubset,
    eps: &BigRational,
) -> Result<TowerFamily> {
    if *eps <= BigRational::zero() {
        return Err(Error::TowerInfeasible(
            "invariance tolerance must be positive".into(),
        ));
    }
    let group = action.group();
    let n = action.modulus;

    let mut first_ratio_ok: Option<u64> = None;
    let mut fallback: Option<u64> = None;
    for k in 0..n {
        let f_inv = folner_box(action.dims, k).inverse(&group);
        if boundary_ratio(&f_inv, s, &group) >= *eps {
            continue;
        }
        if first_ratio_ok.is_none() {
            first_ratio_ok = Some(k);
        }
        if n % (k + 1) == 0 {
            let family = rokhlin_tower(action, k)?;
            debug_assert!(family.leftover.is_empty());
            return Ok(family);
        }
        if fallback.is_none() {
            let family = rokhlin_tower(action, k)?;
            if family.leftover_measure() < *eps {
                fallback = Some(k);
            }
        }
    }
    if let Some(k) = fallback {
        return rokhlin_tower(action, k);
    }
    match first_ratio_ok {
        None => Err(Error::TowerInfeasible(format!(
            "no box {{0,…,k}}^{} with k < {n} satisfies |∂_S(F⁻¹)|/|F| < {}",
            action.dims,
            rational_to_string(eps)
        ))),
        Some(k) => Err(Error::TowerInfeasible(format!(
            "boxes from k = {k} are (S,ε)-invariant but every leftover has measure ≥ {}",
            rational_to_string(eps)
        ))),
    }
}

/// Shapes of a family must be (S,ε)-invariant; used by callers that receive
/// a family from elsewhere.
pub fn check_shape_invariance(
    family: &TowerFamily,
    s: &FiniteSubset,
    eps: &BigRational,
) -> Result<()> {
    let group = family.action.group();
    for (i, t) in family.towers.iter().enumerate() {
        let inv = t.shape.inverse(&group);
        let ratio = boundary_ratio(&inv, s, &group);
        if ratio >= *eps {
            return Err(Error::Precondition(format!(
                "tower {i} shape has boundary ratio {} ≥ {}",
                rational_to_string(&ratio),
                rational_to_string(eps)
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn odometer_points_round_trip() {
        let x = OdometerAction::new(2, 5).unwrap();
        assert_eq!(x.space.size, 25);
        for p in 0..25 {
            assert_eq!(x.point(&x.coords(p)), p);
        }
        // (3,4) + (2,1) = (0,0) mod 5
        let p = x.point(&[3, 4]);
        assert_eq!(x.apply(&Elem(vec![2, 1]), p), 0);
    }

    #[test]
    fn action_on_step_functions_is_a_right_action() {
        let x = OdometerAction::new(1, 6).unwrap();
        let f = x.indicator([0, 1]);
        let a = Elem(vec![1]);
        let b = Elem(vec![2]);
        // (f·a)(p) = f(p+1): support moves to {5, 0}.
        let fa = x.act(&f, &a);
        assert_eq!(fa, x.indicator([0, 5]));
        // (f·a)·b = f·(ab)
        let fab = x.act(&fa, &b);
        assert_eq!(fab, x.act(&f, &x.group().mul(&a, &b)));
    }

    #[test]
    fn rokhlin_exact_tiling() {
        let x = OdometerAction::new(1, 6).unwrap();
        let fam = rokhlin_tower(&x, 1).unwrap();
        assert_eq!(fam.towers[0].base, vec![0, 2, 4]);
        assert!(fam.leftover.is_empty());
        assert_eq!(fam.leftover_measure(), rat(0, 1));

        let x2 = OdometerAction::new(2, 4).unwrap();
        let fam2 = rokhlin_tower(&x2, 1).unwrap();
        let want: Vec<u64> = vec![
            x2.point(&[0, 0]),
            x2.point(&[2, 0]),
            x2.point(&[0, 2]),
            x2.point(&[2, 2]),
        ]
        .into_iter()
        .collect();
        let mut want = want;
        want.sort_unstable();
        assert_eq!(fam2.towers[0].base, want);
        assert!(fam2.leftover.is_empty());
    }

    #[test]
    fn rokhlin_with_leftover() {
        let x = OdometerAction::new(1, 7).unwrap();
        let fam = rokhlin_tower(&x, 1).unwrap();
        assert_eq!(fam.towers[0].base, vec![0, 2, 4]);
        assert_eq!(fam.tower_points(0), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(fam.leftover, vec![6]);
        assert_eq!(fam.leftover_measure(), rat(1, 7));
    }

    #[test]
    fn rokhlin_too_tall() {
        let x = OdometerAction::new(1, 4).unwrap();
        assert!(matches!(rokhlin_tower(&x, 4), Err(Error::TowerInfeasible(_))));
    }

    #[test]
    fn ow_prefers_exact_tiling() {
        let x = OdometerAction::new(1, 12).unwrap();
        let s = FiniteSubset::new(x.group().generators());
        // Ratio 2/(k+1) < 1/2 needs k ≥ 4; k = 4 leaves a remainder, k = 5
        // tiles since 6 | 12.
        let fam = ow_towers(&x, &s, &rat(1, 2)).unwrap();
        assert_eq!(fam.towers[0].shape.len(), 6);
        assert_eq!(fam.towers[0].base, vec![0, 6]);
        assert!(fam.leftover.is_empty());
    }

    #[test]
    fn ow_eps_one_skips_single_point_box() {
        let x = OdometerAction::new(1, 6).unwrap();
        let s = FiniteSubset::new(x.group().generators());
        // F = {0} has ratio 1, not < 1; first admissible is k = 2 and 3 | 6.
        let fam = ow_towers(&x, &s, &rat(1, 1)).unwrap();
        assert_eq!(fam.towers[0].shape.len(), 3);
        assert_eq!(fam.towers[0].base, vec![0, 3]);
    }

    #[test]
    fn ow_infeasible_names_the_constraint() {
        let x = OdometerAction::new(1, 4).unwrap();
        let s = FiniteSubset::new(x.group().generators());
        let err = ow_towers(&x, &s, &rat(1, 100)).unwrap_err();
        match err {
            Error::TowerInfeasible(msg) => assert!(msg.contains("∂_S"), "{msg}"),
            other => panic!("wrong error {other:?}"),
        }
    }

    #[test]
    fn verify_rejects_overlap() {
        let x = OdometerAction::new(1, 4).unwrap();
        let bad = TowerFamily {
            action: x.clone(),
            towers: vec![Tower {
                shape: folner_box(1, 1),
                base: vec![0, 1],
            }],
            leftover: vec![3],
        };
        assert!(bad.verify().is_err());
    }
}
