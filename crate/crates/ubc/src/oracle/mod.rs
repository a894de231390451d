//! Ground truth, computed independently of the engines.
//!
//! Two services live here. `verify_fill` re-derives the boundary of a
//! filling from the flat tuple data with its own canonicalization and
//! coefficient transport, sharing none of the engines' boundary
//! bookkeeping. The finite-complex side (`FiniteComplex`, `bar_ball`,
//! `lp_min_fill`, `gap_report`) measures algorithmic fillings against the
//! exact minimal ℓ¹-filling on a finite truncation, solved by rational
//! simplex and certified by duality.

pub mod simplex;

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::bar::{BarBackend, BarChain, Quotient, Tuple};
use crate::coeff::{rational_from_str, rational_to_string, Coefficient, StepFunction};
use crate::engine::FillCertificate;
use crate::error::{Error, Result};
use crate::group::Group;

use simplex::{certify_optimal, solve, SimplexStatus, StandardLp};

/// Exact test of ∂b = c through a from-scratch boundary computation.
///
/// Structural mismatches (backends, degrees) make the answer false rather
/// than an error: a filling in the wrong complex does not fill c.
pub fn verify_fill(b: &BarChain, c: &BarChain) -> bool {
    if b.backend() != c.backend() || b.degree() != c.degree() + 1 || b.ring() != c.ring() {
        return false;
    }
    let Ok(boundary) = independent_boundary(b) else {
        return false;
    };
    let mut expected: BTreeMap<Vec<i64>, Coefficient> = BTreeMap::new();
    for (t, coef) in c.terms() {
        expected.insert(t.flat().to_vec(), coef.clone());
    }
    if boundary.len() != expected.len() {
        return false;
    }
    for (key, coef) in &boundary {
        let Some(want) = expected.get(key) else {
            return false;
        };
        let Ok(diff) = coef.add(&want.neg()) else {
            return false;
        };
        if !diff.is_zero() {
            return false;
        }
    }
    true
}

/// Face deletion, canonicalization, and coefficient transport, written
/// directly against the flat entry encoding.
fn independent_boundary(b: &BarChain) -> Result<BTreeMap<Vec<i64>, Coefficient>> {
    let backend = b.backend();
    let n = b.degree();
    if n == 0 {
        return Err(Error::Precondition("degree-0 chains have no boundary here".into()));
    }
    let width = backend.width();
    let mut acc: BTreeMap<Vec<i64>, Coefficient> = BTreeMap::new();
    for (t, coef) in b.terms() {
        let flat = t.flat();
        for j in 0..=n {
            let mut face: Vec<i64> = Vec::with_capacity(n * width);
            face.extend_from_slice(&flat[..j * width]);
            face.extend_from_slice(&flat[(j + 1) * width..]);
            let mut moved = if j % 2 == 0 { coef.clone() } else { coef.neg() };
            match backend.quotient {
                Quotient::Raw => {}
                Quotient::Full => {
                    let first: Vec<i64> = face[..width].to_vec();
                    match &backend.group {
                        Group::Table(table) => {
                            let g_inv = table.inv(face[0] as usize);
                            for e in face.iter_mut() {
                                *e = table.mul(g_inv, *e as usize) as i64;
                            }
                        }
                        _ => {
                            for (pos, e) in face.iter_mut().enumerate() {
                                *e -= first[pos % width];
                            }
                        }
                    }
                    if let (Coefficient::Step(f), Some(action)) = (&moved, &backend.action) {
                        moved = Coefficient::Step(transport_back(
                            f,
                            &first,
                            action.dims,
                            action.modulus,
                        ));
                    }
                }
                Quotient::Mod(m) => {
                    let m = m as i64;
                    let delta: Vec<i64> =
                        face[..width].iter().map(|&c| c - c.rem_euclid(m)).collect();
                    for (pos, e) in face.iter_mut().enumerate() {
                        *e -= delta[pos % width];
                    }
                }
            }
            match acc.entry(face) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(moved);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    let sum = slot.get().add(&moved)?;
                    if sum.is_zero() {
                        slot.remove();
                    } else {
                        *slot.get_mut() = sum;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// Transport a step coefficient across the canonical shift: the cell moved
/// by −first, so the coefficient picks up first on the right, relocating
/// each support point p to p − first, coordinate-wise modulo the odometer.
fn transport_back(f: &StepFunction, first: &[i64], dims: usize, modulus: u64) -> StepFunction {
    let m = modulus as i64;
    let entries: Vec<(u64, BigInt)> = f
        .support()
        .map(|(&p, v)| {
            let mut rest = p;
            let mut moved = 0u64;
            let mut base = 1u64;
            for first_c in first.iter().take(dims) {
                let x = (rest % modulus) as i64;
                rest /= modulus;
                let y = (x - first_c).rem_euclid(m) as u64;
                moved += y * base;
                base *= modulus;
            }
            (moved, v.clone())
        })
        .collect();
    StepFunction::from_values(f.space.clone(), entries)
}

/// Sparse integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), BigInt>,
}

impl SparseMat {
    pub fn new(rows: usize, cols: usize) -> SparseMat {
        SparseMat {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols, "entry ({i},{j}) outside matrix");
        let slot = self.entries.entry((i, j)).or_insert_with(BigInt::zero);
        *slot += v;
        if slot.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, &BigInt)> {
        self.entries
            .iter()
            .filter(move |((_, col), _)| *col == j)
            .map(|((row, _), v)| (*row, v))
    }

    /// Matrix-vector product over the rationals.
    pub fn apply(&self, x: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![BigRational::zero(); self.rows];
        for ((i, j), v) in &self.entries {
            if !x[*j].is_zero() {
                out[*i] += BigRational::from_integer(v.clone()) * &x[*j];
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .entries
            .iter()
            .map(|((i, j), v)| {
                let val = v
                    .to_i64()
                    .map(|x| json!(x))
                    .unwrap_or_else(|| json!(v.to_string()));
                json!([i, j, val])
            })
            .collect();
        json!({"rows": self.rows, "cols": self.cols, "entries": entries})
    }

    pub fn from_json(v: &Value) -> Result<SparseMat> {
        let rows = v["rows"]
            .as_u64()
            .ok_or_else(|| Error::parse("matrix", "missing row count"))? as usize;
        let cols = v["cols"]
            .as_u64()
            .ok_or_else(|| Error::parse("matrix", "missing column count"))? as usize;
        let mut mat = SparseMat::new(rows, cols);
        let entries = v["entries"]
            .as_array()
            .ok_or_else(|| Error::parse("matrix", "entries must be a list"))?;
        for e in entries {
            let triple = e
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::parse("matrix", "each entry is [row, col, value]"))?;
            let i = triple[0]
                .as_u64()
                .ok_or_else(|| Error::parse("matrix", "row index must be an integer"))?
                as usize;
            let j = triple[1]
                .as_u64()
                .ok_or_else(|| Error::parse("matrix", "column index must be an integer"))?
                as usize;
            let val = match &triple[2] {
                Value::Number(n) => BigInt::from(
                    n.as_i64()
                        .ok_or_else(|| Error::parse("matrix", "value must be an integer"))?,
                ),
                Value::String(s) => s
                    .parse::<BigInt>()
                    .map_err(|_| Error::parse("matrix", format!("bad integer {s:?}")))?,
                _ => return Err(Error::parse("matrix", "value must be an integer")),
            };
            if i >= rows || j >= cols {
                return Err(Error::parse("matrix", format!("entry ({i},{j}) outside matrix")));
            }
            mat.add(i, j, val);
        }
        Ok(mat)
    }
}

/// A finite chain complex given by cell counts and integer boundary
/// matrices; `boundaries[k]` maps degree k+1 to degree k. Loading checks
/// that consecutive boundaries compose to zero.
#[derive(Debug, Clone)]
pub struct FiniteComplex {
    pub name: String,
    pub degrees: Vec<usize>,
    pub boundaries: Vec<SparseMat>,
}

impl FiniteComplex {
    pub fn new(name: impl Into<String>, degrees: Vec<usize>, boundaries: Vec<SparseMat>) -> Result<FiniteComplex> {
        if degrees.is_empty() {
            return Err(Error::InvalidArgument("a complex needs at least one degree".into()));
        }
        if boundaries.len() + 1 != degrees.len() {
            return Err(Error::InvalidArgument(format!(
                "{} degrees need {} boundary matrices, got {}",
                degrees.len(),
                degrees.len() - 1,
                boundaries.len()
            )));
        }
        for (k, mat) in boundaries.iter().enumerate() {
            if mat.rows != degrees[k] || mat.cols != degrees[k + 1] {
                return Err(Error::InvalidArgument(format!(
                    "boundary {} has shape {}x{}, expected {}x{}",
                    k + 1,
                    mat.rows,
                    mat.cols,
                    degrees[k],
                    degrees[k + 1]
                )));
            }
        }
        // ∂∘∂ = 0, checked sparsely on every consecutive pair.
        for k in 0..boundaries.len().saturating_sub(1) {
            let low = &boundaries[k];
            let high = &boundaries[k + 1];
            for j in 0..high.cols {
                let mut acc: BTreeMap<usize, BigInt> = BTreeMap::new();
                for (mid, v) in high.column(j) {
                    for (row, w) in low.column(mid) {
                        let slot = acc.entry(row).or_insert_with(BigInt::zero);
                        *slot += v * w;
                    }
                }
                if acc.values().any(|v| !v.is_zero()) {
                    return Err(Error::Precondition(format!(
                        "composed boundaries are nonzero on degree-{} cell {}",
                        k + 2,
                        j
                    )));
                }
            }
        }
        Ok(FiniteComplex {
            name: name.into(),
            degrees,
            boundaries,
        })
    }

    /// ∂ of a degree-k coefficient vector, k ≥ 1.
    pub fn boundary_vec(&self, k: usize, x: &[BigRational]) -> Result<Vec<BigRational>> {
        if k == 0 || k >= self.degrees.len() {
            return Err(Error::InvalidArgument(format!("no boundary out of degree {k}")));
        }
        if x.len() != self.degrees[k] {
            return Err(Error::DegreeMismatch(x.len(), self.degrees[k]));
        }
        Ok(self.boundaries[k - 1].apply(x))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "degrees": self.degrees,
            "boundaries": self.boundaries.iter().map(SparseMat::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<FiniteComplex> {
        let degrees: Vec<usize> = v["degrees"]
            .as_array()
            .ok_or_else(|| Error::parse("complex", "missing degrees"))?
            .iter()
            .map(|d| {
                d.as_u64()
                    .map(|x| x as usize)
                    .ok_or_else(|| Error::parse("complex", "cell counts must be integers"))
            })
            .collect::<Result<_>>()?;
        let boundaries: Vec<SparseMat> = v["boundaries"]
            .as_array()
            .ok_or_else(|| Error::parse("complex", "missing boundaries"))?
            .iter()
            .map(SparseMat::from_json)
            .collect::<Result<_>>()?;
        let name = v["name"].as_str().unwrap_or("matrix-input").to_string();
        FiniteComplex::new(name, degrees, boundaries)
    }
}

/// A finite truncation of the trivial-coefficient bar complex of Z^d: the
/// cells of degree n are the canonical tuples whose entries and pairwise
/// entry differences all have word length at most r. Closure under entry
/// differences makes the cell set face-closed, so the boundary operator is
/// the honest restriction of the global one and every LP filling found here
/// is a genuine filling.
#[derive(Debug, Clone)]
pub struct BarBall {
    pub complex: FiniteComplex,
    pub backend: BarBackend,
    pub radius: i64,
    pub cells: Vec<Vec<Tuple>>,
    index: Vec<BTreeMap<Tuple, usize>>,
}

/// Word-metric ball of Z^d: all vectors with ℓ¹ norm ≤ r.
fn word_ball(d: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::new();
        for partial in &out {
            let used: i64 = partial.iter().map(|c| c.abs()).sum();
            for c in -(r - used)..=(r - used) {
                let mut v = partial.clone();
                v.push(c);
                next.push(v);
            }
        }
        out = next;
    }
    out.sort();
    out
}

fn word_len(v: &[i64]) -> i64 {
    v.iter().map(|c| c.abs()).sum()
}

pub fn bar_ball(group: &Group, radius: i64, max_degree: usize, cell_cap: usize) -> Result<BarBall> {
    let d = group
        .rank()
        .ok_or_else(|| Error::UnsupportedBackend("bar balls need a free abelian group".into()))?;
    if radius < 0 {
        return Err(Error::InvalidArgument("radius must be non-negative".into()));
    }
    let ball = word_ball(d, radius);
    let width = d;

    // Degree-n cells: (0, g_1, …, g_n), every entry and every difference in
    // the ball. Extend degree by degree; sorted tuples keep indices stable.
    let mut cells: Vec<Vec<Tuple>> = Vec::with_capacity(max_degree + 1);
    cells.push(vec![Tuple::from_flat(vec![0; width])]);
    for n in 1..=max_degree {
        let mut level: Vec<Tuple> = Vec::new();
        for cell in &cells[n - 1] {
            let flat = cell.flat();
            for g in &ball {
                let ok = (0..n).all(|i| {
                    let diff: Vec<i64> = (0..width)
                        .map(|c| g[c] - flat[i * width + c])
                        .collect();
                    word_len(&diff) <= radius
                });
                if ok {
                    let mut new_flat = flat.to_vec();
                    new_flat.extend_from_slice(g);
                    level.push(Tuple::from_flat(new_flat));
                }
            }
        }
        level.sort();
        if level.len() > cell_cap {
            return Err(Error::CapExceeded {
                cap: cell_cap,
                best: format!("{} degree-{n} cells", level.len()),
                target: "bar-ball cell cap".into(),
            });
        }
        cells.push(level);
    }

    let index: Vec<BTreeMap<Tuple, usize>> = cells
        .iter()
        .map(|level| {
            level
                .iter()
                .enumerate()
                .map(|(i, t)| (t.clone(), i))
                .collect()
        })
        .collect();

    let mut boundaries = Vec::with_capacity(max_degree);
    for n in 1..=max_degree {
        let mut mat = SparseMat::new(cells[n - 1].len(), cells[n].len());
        for (j, cell) in cells[n].iter().enumerate() {
            let flat = cell.flat();
            for i in 0..=n {
                let mut face: Vec<i64> = Vec::with_capacity(n * width);
                face.extend_from_slice(&flat[..i * width]);
                face.extend_from_slice(&flat[(i + 1) * width..]);
                let first: Vec<i64> = face[..width].to_vec();
                for (pos, e) in face.iter_mut().enumerate() {
                    *e -= first[pos % width];
                }
                let row = index[n - 1]
                    .get(&Tuple::from_flat(face))
                    .copied()
                    .ok_or_else(|| {
                        Error::Precondition("face closure failed inside the ball".into())
                    })?;
                let sign = if i % 2 == 0 { BigInt::from(1) } else { BigInt::from(-1) };
                mat.add(row, j, sign);
            }
        }
        boundaries.push(mat);
    }

    let degrees: Vec<usize> = cells.iter().map(Vec::len).collect();
    let complex = FiniteComplex::new(
        format!("bar-ball:{group}:r={radius}"),
        degrees,
        boundaries,
    )?;
    Ok(BarBall {
        complex,
        backend: BarBackend::full(group.clone()),
        radius,
        cells,
        index,
    })
}

impl BarBall {
    /// Coefficient vector of a trivial-coefficient chain over the ball's
    /// degree-n cells. Support outside the ball is an error naming the cell.
    pub fn chain_to_vec(&self, c: &BarChain) -> Result<Vec<BigRational>> {
        if c.backend() != &self.backend {
            return Err(Error::BackendMismatch(
                c.backend().to_string(),
                self.backend.to_string(),
            ));
        }
        let n = c.degree();
        if n >= self.cells.len() {
            return Err(Error::InvalidArgument(format!(
                "the ball was built up to degree {}, the chain has degree {n}",
                self.cells.len() - 1
            )));
        }
        let mut out = vec![BigRational::zero(); self.cells[n].len()];
        for (t, coef) in c.terms() {
            let i = self.index[n].get(t).copied().ok_or_else(|| {
                Error::Precondition(format!(
                    "cell {:?} lies outside the radius-{} ball",
                    t.flat(),
                    self.radius
                ))
            })?;
            out[i] = coef.as_rational()?;
        }
        Ok(out)
    }

    pub fn vec_to_chain(&self, degree: usize, x: &[BigRational]) -> Result<BarChain> {
        let mut out = BarChain::zero(self.backend.clone(), degree, crate::coeff::Ring::Rat);
        for (j, v) in x.iter().enumerate() {
            if !v.is_zero() {
                out.add_term(self.cells[degree][j].clone(), Coefficient::Rat(v.clone()))?;
            }
        }
        Ok(out)
    }

    /// Smallest radius whose face-closed ball contains every cell of c.
    pub fn enclosing_radius(c: &BarChain) -> Result<i64> {
        let backend = c.backend();
        let width = backend.width();
        if backend.quotient != Quotient::Full || backend.action.is_some() {
            return Err(Error::UnsupportedBackend(
                "enclosing radii are computed for trivial-coefficient quotient chains".into(),
            ));
        }
        let mut r: i64 = 0;
        for (t, _) in c.terms() {
            let flat = t.flat();
            let arity = t.arity(width);
            for i in 0..arity {
                for j in 0..arity {
                    let diff: Vec<i64> = (0..width)
                        .map(|p| flat[i * width + p] - flat[j * width + p])
                        .collect();
                    r = r.max(word_len(&diff));
                }
            }
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    /// Structurally impossible for ℓ¹ objectives; reported honestly if hit.
    UnboundedImpossible,
}

impl LpStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::UnboundedImpossible => "unbounded-impossible",
        }
    }
}

/// Result of an exact minimal-filling LP.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub optimum: Option<BigRational>,
    pub filling_vec: Option<Vec<BigRational>>,
    pub filling: Option<BarChain>,
    /// Optimality certificate: dual vector with yᵀ∂ ≤ 1 componentwise on
    /// split columns and yᵀc equal to the optimum.
    pub dual: Option<Vec<BigRational>>,
    /// Infeasibility certificate: y with yᵀ∂ = 0 and yᵀc > 0.
    pub farkas: Option<Vec<BigRational>>,
    pub certified: bool,
    pub basis_size: usize,
}

impl LpResult {
    pub fn to_json(&self) -> Value {
        let rvec = |v: &Vec<BigRational>| -> Value {
            Value::Array(v.iter().map(|x| json!(rational_to_string(x))).collect())
        };
        let mut out = json!({
            "status": self.status.as_str(),
            "certified": self.certified,
            "basis_size": self.basis_size,
        });
        let obj = out.as_object_mut().expect("object");
        if let Some(v) = &self.optimum {
            obj.insert("optimum".into(), json!(rational_to_string(v)));
        }
        if let Some(f) = &self.filling {
            obj.insert("filling".into(), f.to_json());
        } else if let Some(f) = &self.filling_vec {
            obj.insert("filling_vec".into(), rvec(f));
        }
        if let Some(d) = &self.dual {
            obj.insert("dual".into(), rvec(d));
        }
        if let Some(f) = &self.farkas {
            obj.insert("farkas".into(), rvec(f));
        }
        out
    }
}

/// min |b|₁ over ∂b = c inside the complex, degree n → n+1, by exact
/// simplex on the split variables b = b⁺ − b⁻. Every reported optimum is
/// re-certified by duality from the original data; infeasibility carries a
/// Farkas vector, checked exactly.
pub fn lp_min_fill_vec(complex: &FiniteComplex, degree: usize, c: &[BigRational]) -> Result<LpResult> {
    if degree + 1 >= complex.degrees.len() {
        return Err(Error::Precondition(format!(
            "the complex has no degree-{} cells to fill from",
            degree + 1
        )));
    }
    if c.len() != complex.degrees[degree] {
        return Err(Error::DegreeMismatch(c.len(), complex.degrees[degree]));
    }
    let m = complex.degrees[degree];
    let p = complex.degrees[degree + 1];
    if c.iter().all(BigRational::is_zero) {
        return Ok(LpResult {
            status: LpStatus::Optimal,
            optimum: Some(BigRational::zero()),
            filling_vec: Some(vec![BigRational::zero(); p]),
            filling: None,
            dual: Some(vec![BigRational::zero(); m]),
            farkas: None,
            certified: true,
            basis_size: 0,
        });
    }

    let mat = &complex.boundaries[degree];
    let mut a = vec![vec![BigRational::zero(); 2 * p]; m];
    for ((i, j), v) in &mat.entries {
        a[*i][*j] = BigRational::from_integer(v.clone());
        a[*i][p + *j] = BigRational::from_integer(-v.clone());
    }
    let lp = StandardLp {
        a,
        b: c.to_vec(),
        c: vec![BigRational::from_integer(BigInt::from(1)); 2 * p],
    };
    let sol = solve(&lp)?;
    match sol.status {
        SimplexStatus::Optimal => {
            let mut filling = vec![BigRational::zero(); p];
            for j in 0..p {
                filling[j] = &sol.x[j] - &sol.x[p + j];
            }
            // The optimum of the split LP is the ℓ¹ norm of the recombined
            // filling; a gap would mean the solver left slack mass behind.
            let l1: BigRational = filling.iter().map(|v| v.abs()).sum();
            if l1 != sol.objective {
                return Err(Error::Precondition(
                    "simplex left cancelling mass in the split variables".into(),
                ));
            }
            let residual = mat.apply(&filling);
            if residual.iter().zip(c).any(|(got, want)| got != want) {
                return Err(Error::Precondition("LP filling does not satisfy ∂b = c".into()));
            }
            let dual = certify_optimal(&lp, &sol)?;
            Ok(LpResult {
                status: LpStatus::Optimal,
                optimum: Some(sol.objective.clone()),
                filling_vec: Some(filling),
                filling: None,
                dual: Some(dual),
                farkas: None,
                certified: true,
                basis_size: sol.basis.len(),
            })
        }
        SimplexStatus::Infeasible => {
            let y = sol
                .farkas
                .clone()
                .ok_or_else(|| Error::Precondition("infeasible solve without a Farkas vector".into()))?;
            // y must vanish on every boundary column and pair positively
            // with c: an exact certificate that c is not a boundary within
            // this truncation.
            let mut certified = true;
            for j in 0..p {
                let mut dot = BigRational::zero();
                for (i, v) in mat.column(j) {
                    dot += &y[i] * BigRational::from_integer(v.clone());
                }
                if !dot.is_zero() {
                    certified = false;
                }
            }
            let pairing: BigRational = y.iter().zip(c).map(|(a, b)| a * b).sum();
            if !pairing.is_positive() {
                certified = false;
            }
            Ok(LpResult {
                status: LpStatus::Infeasible,
                optimum: None,
                filling_vec: None,
                filling: None,
                dual: None,
                farkas: Some(y),
                certified,
                basis_size: 0,
            })
        }
        SimplexStatus::Unbounded => Ok(LpResult {
            status: LpStatus::UnboundedImpossible,
            optimum: None,
            filling_vec: None,
            filling: None,
            dual: None,
            farkas: None,
            certified: false,
            basis_size: 0,
        }),
    }
}

/// The chain-level entry point: solve on a bar ball and hand the filling
/// back as a chain.
pub fn lp_min_fill(ball: &BarBall, c: &BarChain) -> Result<LpResult> {
    let vec = ball.chain_to_vec(c)?;
    let mut result = lp_min_fill_vec(&ball.complex, c.degree(), &vec)?;
    if let Some(fv) = &result.filling_vec {
        result.filling = Some(ball.vec_to_chain(c.degree() + 1, fv)?);
    }
    Ok(result)
}

/// One row of the optimality-gap study.
#[derive(Debug, Clone)]
pub struct GapRow {
    pub label: String,
    pub cycle_norm: BigRational,
    pub algorithm_norm: BigRational,
    pub bound: BigRational,
    pub slack: BigRational,
    pub lp_status: String,
    pub lp_optimum: Option<BigRational>,
    pub ratio: Option<BigRational>,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub radius: i64,
    pub rows: Vec<GapRow>,
    pub max_ratio: Option<BigRational>,
}

impl GapReport {
    pub fn to_json(&self) -> Value {
        json!({
            "radius": self.radius,
            "rows": self.rows.iter().map(|r| {
                let mut row = json!({
                    "label": r.label,
                    "cycle_norm": rational_to_string(&r.cycle_norm),
                    "algorithm_norm": rational_to_string(&r.algorithm_norm),
                    "bound": rational_to_string(&r.bound),
                    "slack": rational_to_string(&r.slack),
                    "lp_status": r.lp_status,
                });
                let obj = row.as_object_mut().expect("object");
                if let Some(v) = &r.lp_optimum {
                    obj.insert("lp_optimum".into(), json!(rational_to_string(v)));
                }
                if let Some(v) = &r.ratio {
                    obj.insert("ratio".into(), json!(rational_to_string(v)));
                }
                row
            }).collect::<Vec<_>>(),
            "max_ratio": self.max_ratio.as_ref().map(rational_to_string),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "label,cycle_norm,algorithm_norm,lp_optimum,ratio,bound,slack,lp_status,radius\n",
        );
        for r in &self.rows {
            let opt = r.lp_optimum.as_ref().map(rational_to_string).unwrap_or_default();
            let ratio = r.ratio.as_ref().map(rational_to_string).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.label,
                rational_to_string(&r.cycle_norm),
                rational_to_string(&r.algorithm_norm),
                opt,
                ratio,
                rational_to_string(&r.bound),
                rational_to_string(&r.slack),
                r.lp_status,
                self.radius,
            ));
        }
        out
    }
}

/// Compare certified fillings against the exact LP optimum on the given
/// truncation. Rows whose cycle leaves the ball, or whose LP is infeasible
/// at this radius, are flagged and kept; the aggregate ratio runs over the
/// rows where both numbers exist.
pub fn gap_report(certificates: &[FillCertificate], ball: &BarBall) -> GapReport {
    let mut rows = Vec::with_capacity(certificates.len());
    let mut max_ratio: Option<BigRational> = None;
    for (i, cert) in certificates.iter().enumerate() {
        let label = format!("instance-{i}");
        let algorithm_norm = cert.filling_norm.clone();
        let slack = &cert.bound - &algorithm_norm;
        let (lp_status, lp_optimum, ratio) = match lp_min_fill(ball, &cert.cycle) {
            Ok(lp) => {
                let status = lp.status.as_str().to_string();
                let ratio = match (&lp.optimum, lp.status) {
                    (Some(opt), LpStatus::Optimal) if opt.is_positive() => {
                        Some(&algorithm_norm / opt)
                    }
                    _ => None,
                };
                (status, lp.optimum, ratio)
            }
            Err(Error::Precondition(msg)) if msg.contains("outside") => {
                ("outside-truncation".to_string(), None, None)
            }
            Err(e) => (format!("error: {e}"), None, None),
        };
        if let Some(r) = &ratio {
            if max_ratio.as_ref().map(|m| r > m).unwrap_or(true) {
                max_ratio = Some(r.clone());
            }
        }
        rows.push(GapRow {
            label,
            cycle_norm: cert.cycle_norm.clone(),
            algorithm_norm,
            bound: cert.bound.clone(),
            slack,
            lp_status,
            lp_optimum,
            ratio,
        });
    }
    GapReport {
        radius: ball.radius,
        rows,
        max_ratio,
    }
}

/// Simplicial chain complex from a list of top simplices given as sorted
/// vertex tuples; lower cells are generated by taking faces.
fn simplicial_complex(name: String, vertices: usize, triangles: Vec<[usize; 3]>) -> Result<FiniteComplex> {
    let mut edges: Vec<[usize; 2]> = Vec::new();
    for t in &triangles {
        edges.push([t[1], t[2]]);
        edges.push([t[0], t[2]]);
        edges.push([t[0], t[1]]);
    }
    edges.sort();
    edges.dedup();
    let edge_index: BTreeMap<[usize; 2], usize> =
        edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();

    let mut d1 = SparseMat::new(vertices, edges.len());
    for (j, e) in edges.iter().enumerate() {
        d1.add(e[1], j, BigInt::from(1));
        d1.add(e[0], j, BigInt::from(-1));
    }
    let mut d2 = SparseMat::new(edges.len(), triangles.len());
    for (j, t) in triangles.iter().enumerate() {
        let faces = [[t[1], t[2]], [t[0], t[2]], [t[0], t[1]]];
        for (i, f) in faces.iter().enumerate() {
            let sign = if i % 2 == 0 { BigInt::from(1) } else { BigInt::from(-1) };
            d2.add(edge_index[f], j, sign);
        }
    }
    FiniteComplex::new(name, vec![vertices, edges.len(), triangles.len()], vec![d1, d2])
}

/// The n×n grid triangulation of the torus (diagonals added per square);
/// n ≥ 3 keeps the triangles honest simplices.
pub fn triangulated_torus(n: usize) -> Result<FiniteComplex> {
    if n < 3 {
        return Err(Error::InvalidArgument(
            "torus grids below 3x3 identify simplex vertices".into(),
        ));
    }
    let v = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut triangles = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            let mut a = [v(i, j), v(i, j + 1), v(i + 1, j + 1)];
            let mut b = [v(i, j), v(i + 1, j), v(i + 1, j + 1)];
            a.sort();
            b.sort();
            triangles.push(a);
            triangles.push(b);
        }
    }
    simplicial_complex(format!("torus:{n}"), n * n, triangles)
}

/// The boundary of the tetrahedron: the minimal triangulated 2-sphere.
pub fn triangulated_sphere() -> FiniteComplex {
    let triangles = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    simplicial_complex("sphere".into(), 4, triangles)
        .expect("the tetrahedron boundary is a valid complex")
}

/// Parse a complex designator: a generated name (`torus:<n>`, `sphere`) or
/// a path to a matrix JSON file.
pub fn load_complex(spec: &str) -> Result<FiniteComplex> {
    if let Some(n) = spec.strip_prefix("torus:") {
        let n: usize = n
            .parse()
            .map_err(|_| Error::parse("complex", format!("bad torus size {n:?}")))?;
        return triangulated_torus(n);
    }
    if spec == "sphere" {
        return Ok(triangulated_sphere());
    }
    let text = std::fs::read_to_string(spec)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Error::parse("complex", format!("invalid JSON: {e}")))?;
    FiniteComplex::from_json(&v)
}

pub fn parse_rational_vec(v: &Value, len: usize) -> Result<Vec<BigRational>> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::parse("vector", "expected a list of rationals"))?;
    if arr.len() != len {
        return Err(Error::DegreeMismatch(arr.len(), len));
    }
    arr.iter()
        .map(|x| match x {
            Value::Number(n) => n
                .as_i64()
                .map(|i| BigRational::from_integer(BigInt::from(i)))
                .ok_or_else(|| Error::parse("vector", "numbers must be integers; use strings for fractions")),
            Value::String(s) => rational_from_str(s),
            _ => Err(Error::parse("vector", "entries must be integers or rational strings")),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar::{boundary, cone, fill_boundary, lift, project};
    use crate::coeff::{Coefficient, MeasuredSet, Ring};
    use crate::group::folner_box;
    use num_traits::One;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn z() -> Group {
        Group::FreeAbelian(1)
    }

    fn rq(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn bundled_cycle() -> BarChain {
        let mut c = BarChain::zero(BarBackend::full(z()), 1, Ring::Int);
        c.add_term(Tuple::from_flat(vec![0, 1]), Coefficient::int(2)).unwrap();
        c.add_term(Tuple::from_flat(vec![0, 2]), Coefficient::int(-1)).unwrap();
        c
    }

    #[test]
    fn verify_fill_accepts_the_bundled_witness() {
        let c = bundled_cycle();
        let mut b = BarChain::zero(BarBackend::full(z()), 2, Ring::Int);
        b.add_term(Tuple::from_flat(vec![0, 1, 2]), Coefficient::int(1)).unwrap();
        assert!(verify_fill(&b, &c));
        assert!(verify_fill(
            &BarChain::zero(BarBackend::full(z()), 2, Ring::Int),
            &BarChain::zero(BarBackend::full(z()), 1, Ring::Int)
        ));
    }

    #[test]
    fn verify_fill_rejects_perturbed_targets() {
        let c = bundled_cycle();
        let mut b = BarChain::zero(BarBackend::full(z()), 2, Ring::Int);
        b.add_term(Tuple::from_flat(vec![0, 1, 2]), Coefficient::int(1)).unwrap();
        let mut off = c.clone();
        off.add_term(Tuple::from_flat(vec![0, 5]), Coefficient::int(1)).unwrap();
        assert!(!verify_fill(&b, &off));
        let mut wrong_coef = bundled_cycle();
        wrong_coef.add_term(Tuple::from_flat(vec![0, 1]), Coefficient::int(1)).unwrap();
        assert!(!verify_fill(&b, &wrong_coef));
    }

    #[test]
    fn verify_fill_matches_cone_on_random_raw_cycles() {
        let mut rng = StdRng::seed_from_u64(41);
        let raw = BarBackend::raw(Group::FreeAbelian(2));
        for _ in 0..8 {
            let mut x = BarChain::zero(raw.clone(), 2, Ring::Int);
            for _ in 0..6 {
                let t = Tuple::from_flat((0..6).map(|_| rng.gen_range(-2..=2)).collect());
                x.add_term(t, Coefficient::int(rng.gen_range(-2..=2i64))).unwrap();
            }
            let z = boundary(&x).unwrap();
            let filled = cone(&z).unwrap();
            assert!(verify_fill(&filled, &z));
        }
    }

    #[test]
    fn verify_fill_transports_parametrised_coefficients() {
        let action = crate::action::OdometerAction::new(1, 6).unwrap();
        let raw = BarBackend::parametrised_raw(action.clone());
        let full = BarBackend::parametrised(action.clone());
        let mut x = BarChain::zero(raw, 2, Ring::Step);
        x.add_term(
            Tuple::from_flat(vec![1, 3, 4]),
            Coefficient::Step(action.indicator([0, 2])),
        )
        .unwrap();
        let down = project(&x, &full).unwrap();
        let bdry = boundary(&down).unwrap();
        let filled = project(&fill_boundary(&lift(&down)).unwrap(), &full).unwrap();
        assert!(verify_fill(&filled, &bdry));
    }

    #[test]
    fn complexes_reject_broken_composition() {
        let mut d1 = SparseMat::new(1, 2);
        d1.add(0, 0, BigInt::from(1));
        d1.add(0, 1, BigInt::from(1));
        let mut d2 = SparseMat::new(2, 1);
        d2.add(0, 0, BigInt::from(1));
        d2.add(1, 0, BigInt::from(1));
        let err = FiniteComplex::new("bad", vec![1, 2, 1], vec![d1, d2]).unwrap_err();
        assert!(err.to_string().contains("nonzero"));
    }

    #[test]
    fn matrix_json_round_trips() {
        let complex = triangulated_sphere();
        let v = complex.to_json();
        let back = FiniteComplex::from_json(&v).unwrap();
        assert_eq!(back.degrees, vec![4, 6, 4]);
        assert_eq!(back.boundaries[0], complex.boundaries[0]);
        assert_eq!(back.boundaries[1], complex.boundaries[1]);
    }

    #[test]
    fn torus_counts_and_euler_characteristic() {
        let t = triangulated_torus(3).unwrap();
        assert_eq!(t.degrees, vec![9, 27, 18]);
        assert_eq!(9 - 27 + 18, 0);
        let s = triangulated_sphere();
        assert_eq!(s.degrees[0] - s.degrees[1] + s.degrees[2], 2);
    }

    #[test]
    fn radius_two_ball_has_the_frozen_cell_counts() {
        let ball = bar_ball(&z(), 2, 2, 100_000).unwrap();
        assert_eq!(ball.complex.degrees, vec![1, 5, 19]);
    }

    #[test]
    fn lp_fills_the_bundled_instance_with_optimum_one() {
        let ball = bar_ball(&z(), 2, 2, 100_000).unwrap();
        let c = bundled_cycle().to_rational().unwrap();
        let lp = lp_min_fill(&ball, &c).unwrap();
        assert_eq!(lp.status, LpStatus::Optimal);
        assert_eq!(lp.optimum, Some(BigRational::one()));
        assert!(lp.certified);
        let filling = lp.filling.unwrap();
        assert!(verify_fill(&filling, &c));
        assert_eq!(filling.l1_norm(), BigRational::one());
    }

    #[test]
    fn lp_zero_cycle_is_free() {
        let ball = bar_ball(&z(), 1, 2, 100_000).unwrap();
        let zero = BarChain::zero(BarBackend::full(z()), 1, Ring::Rat);
        let lp = lp_min_fill(&ball, &zero).unwrap();
        assert_eq!(lp.status, LpStatus::Optimal);
        assert_eq!(lp.optimum, Some(BigRational::zero()));
    }

    #[test]
    fn generator_class_is_infeasible_on_every_ball() {
        for r in 1..=4i64 {
            let ball = bar_ball(&z(), r, 2, 100_000).unwrap();
            let mut c = BarChain::zero(BarBackend::full(z()), 1, Ring::Rat);
            c.add_term(
                Tuple::from_flat(vec![0, 1]),
                Coefficient::Rat(BigRational::one()),
            )
            .unwrap();
            let lp = lp_min_fill(&ball, &c).unwrap();
            assert_eq!(lp.status, LpStatus::Infeasible, "radius {r}");
            assert!(lp.certified, "Farkas certificate at radius {r}");
        }
    }

    #[test]
    fn truncation_optimum_is_monotone_in_the_radius() {
        let c = bundled_cycle().to_rational().unwrap();
        let mut last: Option<BigRational> = None;
        for r in 2..=4i64 {
            let ball = bar_ball(&z(), r, 2, 100_000).unwrap();
            let lp = lp_min_fill(&ball, &c).unwrap();
            let opt = lp.optimum.unwrap();
            if let Some(prev) = &last {
                assert!(&opt <= prev, "radius {r}");
            }
            last = Some(opt);
        }
    }

    #[test]
    fn torus_loop_is_infeasible_but_local_boundaries_fill() {
        let t = triangulated_torus(3).unwrap();
        // A meridian loop: edges (0,1), (1,2), (2,0) around the first row.
        // Its class generates H_1, so no 2-chain fills it.
        let edge_ix = |a: usize, b: usize| -> usize {
            let key = [a.min(b), a.max(b)];
            let mut found = None;
            for j in 0..t.degrees[1] {
                let col: Vec<(usize, BigInt)> =
                    t.boundaries[0].column(j).map(|(i, v)| (i, v.clone())).collect();
                let verts: Vec<usize> = col.iter().map(|(i, _)| *i).collect();
                if verts == vec![key[0], key[1]] {
                    found = Some(j);
                }
            }
            found.expect("edge present")
        };
        let mut c = vec![BigRational::zero(); t.degrees[1]];
        // Orient the loop: +(0→1) +(1→2) −(0→2); with ∂[a<b] = b − a this
        // really is a cycle.
        c[edge_ix(0, 1)] = BigRational::one();
        c[edge_ix(1, 2)] = BigRational::one();
        c[edge_ix(0, 2)] = -BigRational::one();
        let lp = lp_min_fill_vec(&t, 1, &c).unwrap();
        assert_eq!(lp.status, LpStatus::Infeasible);
        assert!(lp.certified);

        // The boundary of a single triangle fills with norm 1.
        let col: Vec<(usize, BigInt)> = t.boundaries[1].column(0).map(|(i, v)| (i, v.clone())).collect();
        let mut c2 = vec![BigRational::zero(); t.degrees[1]];
        for (i, v) in col {
            c2[i] = BigRational::from_integer(v);
        }
        let lp2 = lp_min_fill_vec(&t, 1, &c2).unwrap();
        assert_eq!(lp2.status, LpStatus::Optimal);
        assert_eq!(lp2.optimum, Some(BigRational::one()));
    }

    #[test]
    fn enclosing_radius_matches_the_support() {
        let c = bundled_cycle();
        assert_eq!(BarBall::enclosing_radius(&c).unwrap(), 2);
    }

    #[test]
    fn step_transport_helper_matches_the_action() {
        let action = crate::action::OdometerAction::new(1, 6).unwrap();
        let f = action.indicator([1, 4]);
        let moved = transport_back(&f, &[2], 1, 6);
        let expected = StepFunction::indicator(f.space.clone(), [5u64, 2]);
        assert_eq!(moved, expected);
        let _ = MeasuredSet::new("unused", 1);
        let _ = folner_box(1, 1);
        let _ = rq(1, 2);
    }
}
