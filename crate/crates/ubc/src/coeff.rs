//! Coefficient rings for chains: integers, rationals, and integer-valued
//! step functions on a finite measured set.
//!
//! Step functions stand in for L∞(X; Z) over a probability space. The space
//! is a finite set of `size` points carrying the uniform measure, so the
//! integral of |f| is exact rational arithmetic.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Which coefficients a chain carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ring {
    /// Z
    Int,
    /// Q
    Rat,
    /// L∞(X; Z) for a fixed finite measured set X
    Step,
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Int => write!(f, "Z"),
            Ring::Rat => write!(f, "Q"),
            Ring::Step => write!(f, "LinfZ"),
        }
    }
}

impl Ring {
    pub fn parse(s: &str) -> Result<Ring> {
        match s {
            "Z" => Ok(Ring::Int),
            "Q" => Ok(Ring::Rat),
            "LinfZ" => Ok(Ring::Step),
            other => Err(Error::parse("ring", format!("unknown ring {other:?}"))),
        }
    }
}

/// A finite set with the uniform probability measure.
///
/// Points are indices `0..size`. Two sets are interchangeable exactly when
/// both name and size agree.
#[derive(Debug, PartialEq, Eq)]
pub struct MeasuredSet {
    pub name: String,
    pub size: u64,
}

impl MeasuredSet {
    pub fn new(name: impl Into<String>, size: u64) -> Arc<MeasuredSet> {
        assert!(size > 0, "measured set must be nonempty");
        Arc::new(MeasuredSet {
            name: name.into(),
            size,
        })
    }

    /// Measure of a set of `count` points: count/size.
    pub fn measure(&self, count: u64) -> BigRational {
        BigRational::new(BigInt::from(count), BigInt::from(self.size))
    }
}

/// Integer-valued step function on a [`MeasuredSet`], stored sparsely:
/// points where the value is zero are absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepFunction {
    pub space: Arc<MeasuredSet>,
    values: BTreeMap<u64, BigInt>,
}

impl StepFunction {
    pub fn zero(space: Arc<MeasuredSet>) -> StepFunction {
        StepFunction {
            space,
            values: BTreeMap::new(),
        }
    }

    /// Characteristic function of the given points.
    pub fn indicator(space: Arc<MeasuredSet>, points: impl IntoIterator<Item = u64>) -> StepFunction {
        let mut values = BTreeMap::new();
        for p in points {
            assert!(p < space.size, "point {p} outside space of size {}", space.size);
            values.insert(p, BigInt::from(1));
        }
        StepFunction { space, values }
    }

    /// Constant function with the given value everywhere.
    pub fn constant(space: Arc<MeasuredSet>, value: BigInt) -> StepFunction {
        let mut values = BTreeMap::new();
        if !value.is_zero() {
            for p in 0..space.size {
                values.insert(p, value.clone());
            }
        }
        StepFunction { space, values }
    }

    pub fn from_values(
        space: Arc<MeasuredSet>,
        entries: impl IntoIterator<Item = (u64, BigInt)>,
    ) -> StepFunction {
        let mut f = StepFunction::zero(space);
        for (p, v) in entries {
            f.add_at(p, v);
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at(&self, p: u64) -> BigInt {
        self.values.get(&p).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&u64, &BigInt)> {
        self.values.iter()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    fn add_at(&mut self, p: u64, v: BigInt) {
        assert!(p < self.space.size, "point {p} outside space");
        if v.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.values.entry(p) {
            Entry::Vacant(e) => {
                e.insert(v);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += v;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_same_space(&self, other: &StepFunction) -> Result<()> {
        if self.space != other.space {
            return Err(Error::Precondition(format!(
                "step functions live on different spaces: {} vs {}",
                self.space.name, other.space.name
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &StepFunction) -> Result<StepFunction> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (p, v) in &other.values {
            out.add_at(*p, v.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> StepFunction {
        StepFunction {
            space: self.space.clone(),
            values: self.values.iter().map(|(p, v)| (*p, -v)).collect(),
        }
    }

    pub fn scale(&self, by: &BigInt) -> StepFunction {
        if by.is_zero() {
            return StepFunction::zero(self.space.clone());
        }
        StepFunction {
            space: self.space.clone(),
            values: self.values.iter().map(|(p, v)| (*p, v * by)).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &StepFunction) -> Result<StepFunction> {
        self.check_same_space(other)?;
        let (small, large) = if self.values.len() <= other.values.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut values = BTreeMap::new();
        for (p, v) in &small.values {
            if let Some(w) = large.values.get(p) {
                values.insert(*p, v * w);
            }
        }
        Ok(StepFunction {
            space: self.space.clone(),
            values,
        })
    }

    /// ∫ |f| dμ with μ uniform.
    pub fn integral_abs(&self) -> BigRational {
        let total: BigInt = self.values.values().map(|v| v.abs()).sum();
        BigRational::new(total, BigInt::from(self.space.size))
    }

    /// max_x |f(x)|
    pub fn sup_norm(&self) -> BigInt {
        self.values
            .values()
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Transport the support along a point bijection: the result takes the
    /// value f(y) at map(y). With map = γ⁻¹ this computes the right action
    /// f·γ, i.e. x ↦ f(γx).
    pub fn relabel(&self, map: impl Fn(u64) -> u64) -> StepFunction {
        let mut out = StepFunction::zero(self.space.clone());
        for (p, v) in &self.values {
            out.add_at(map(*p), v.clone());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        // Group points by value; blocks ordered by value.
        let mut blocks: BTreeMap<BigInt, Vec<u64>> = BTreeMap::new();
        for (p, v) in &self.values {
            blocks.entry(v.clone()).or_default().push(*p);
        }
        let blocks: Vec<Value> = blocks
            .into_iter()
            .map(|(value, points)| json!({ "points": points, "value": bigint_json(&value) }))
            .collect();
        json!({ "blocks": blocks, "space": self.space.name })
    }

    pub fn from_json(v: &Value, space: &Arc<MeasuredSet>) -> Result<StepFunction> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::parse("coef", "step coefficient must be an object"))?;
        if let Some(name) = obj.get("space").and_then(Value::as_str) {
            if name != space.name {
                return Err(Error::parse(
                    "coef.space",
                    format!("expected space {:?}, got {:?}", space.name, name),
                ));
            }
        }
        let blocks = obj
            .get("blocks")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse("coef.blocks", "missing blocks array"))?;
        let mut f = StepFunction::zero(space.clone());
        for b in blocks {
            let value = b
                .get("value")
                .map(bigint_from_json)
                .transpose()?
                .ok_or_else(|| Error::parse("coef.blocks", "block missing value"))?;
            let points = b
                .get("points")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::parse("coef.blocks", "block missing points"))?;
            for p in points {
                let p = p
                    .as_u64()
                    .ok_or_else(|| Error::parse("coef.blocks", "point must be a nonnegative integer"))?;
                if p >= space.size {
                    return Err(Error::parse(
                        "coef.blocks",
                        format!("point {p} outside space of size {}", space.size),
                    ));
                }
                f.add_at(p, value.clone());
            }
        }
        Ok(f)
    }
}

fn bigint_json(v: &BigInt) -> Value {
    match i64::try_from(v) {
        Ok(n) => json!(n),
        Err(_) => json!(v.to_string()),
    }
}

fn bigint_from_json(v: &Value) -> Result<BigInt> {
    if let Some(n) = v.as_i64() {
        return Ok(BigInt::from(n));
    }
    if let Some(s) = v.as_str() {
        return s
            .parse::<BigInt>()
            .map_err(|e| Error::parse("integer", e.to_string()));
    }
    Err(Error::parse("integer", "expected integer or string"))
}

/// Serialize a rational the way chain files expect: "p/q", or just "p" for
/// integers.
pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_from_str(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| -> Result<BigInt> {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::parse("rational", format!("{t:?}: {e}")))
    };
    match s.split_once('/') {
        Some((num, den)) => {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(Error::parse("rational", "zero denominator"));
            }
            Ok(BigRational::new(parse_int(num)?, den))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

/// A coefficient from one of the three rings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Coefficient {
    Int(BigInt),
    Rat(BigRational),
    Step(StepFunction),
}

impl Coefficient {
    pub fn ring(&self) -> Ring {
        match self {
            Coefficient::Int(_) => Ring::Int,
            Coefficient::Rat(_) => Ring::Rat,
            Coefficient::Step(_) => Ring::Step,
        }
    }

    pub fn int(v: impl Into<BigInt>) -> Coefficient {
        Coefficient::Int(v.into())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Int(v) => v.is_zero(),
            Coefficient::Rat(v) => v.is_zero(),
            Coefficient::Step(f) => f.is_zero(),
        }
    }

    /// The contribution to the chain 1-norm: |v| for numbers, ∫|f|dμ for
    /// step functions.
    pub fn norm(&self) -> BigRational {
        match self {
            Coefficient::Int(v) => BigRational::from_integer(v.abs()),
            Coefficient::Rat(v) => v.abs(),
            Coefficient::Step(f) => f.integral_abs(),
        }
    }

    /// Sup norm: |v| for numbers, max_x |f(x)| for step functions.
    pub fn sup_norm(&self) -> BigRational {
        match self {
            Coefficient::Step(f) => BigRational::from_integer(f.sup_norm()),
            other => other.norm(),
        }
    }

    pub fn add(&self, other: &Coefficient) -> Result<Coefficient> {
        match (self, other) {
            (Coefficient::Int(a), Coefficient::Int(b)) => Ok(Coefficient::Int(a + b)),
            (Coefficient::Rat(a), Coefficient::Rat(b)) => Ok(Coefficient::Rat(a + b)),
            (Coefficient::Step(a), Coefficient::Step(b)) => Ok(Coefficient::Step(a.add(b)?)),
            (a, b) => Err(Error::RingMismatch(a.ring(), b.ring())),
        }
    }

    pub fn neg(&self) -> Coefficient {
        match self {
            Coefficient::Int(v) => Coefficient::Int(-v),
            Coefficient::Rat(v) => Coefficient::Rat(-v),
            Coefficient::Step(f) => Coefficient::Step(f.neg()),
        }
    }

    /// Multiplication with promotion: integers embed into rationals and act
    /// on step functions; rationals and step functions do not mix.
    pub fn mul(&self, other: &Coefficient) -> Result<Coefficient> {
        match (self, other) {
            (Coefficient::Int(a), Coefficient::Int(b)) => Ok(Coefficient::Int(a * b)),
            (Coefficient::Rat(a), Coefficient::Rat(b)) => Ok(Coefficient::Rat(a * b)),
            (Coefficient::Int(a), Coefficient::Rat(b)) | (Coefficient::Rat(b), Coefficient::Int(a)) => {
                Ok(Coefficient::Rat(BigRational::from_integer(a.clone()) * b))
            }
            (Coefficient::Int(a), Coefficient::Step(f)) | (Coefficient::Step(f), Coefficient::Int(a)) => {
                Ok(Coefficient::Step(f.scale(a)))
            }
            (Coefficient::Step(a), Coefficient::Step(b)) => Ok(Coefficient::Step(a.mul(b)?)),
            (a, b) => Err(Error::RingMismatch(a.ring(), b.ring())),
        }
    }

    /// Divide by a positive integer, promoting Z to Q. Step coefficients
    /// refuse: L∞(X;Z) has no division.
    pub fn div_int(&self, by: &BigInt) -> Result<Coefficient> {
        if by.is_zero() {
            return Err(Error::InvalidArgument("division by zero".into()));
        }
        match self {
            Coefficient::Int(v) => Ok(Coefficient::Rat(BigRational::new(v.clone(), by.clone()))),
            Coefficient::Rat(v) => {
                Ok(Coefficient::Rat(v / BigRational::from_integer(by.clone())))
            }
            Coefficient::Step(_) => Err(Error::Precondition(
                "cannot divide an integer step function".into(),
            )),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Coefficient::Int(v) => json!(v.to_string()),
            Coefficient::Rat(v) => json!(rational_to_string(v)),
            Coefficient::Step(f) => f.to_json(),
        }
    }

    pub fn from_json(v: &Value, ring: Ring, space: Option<&Arc<MeasuredSet>>) -> Result<Coefficient> {
        match ring {
            Ring::Int => {
                let r = match v {
                    Value::String(s) => rational_from_str(s)?,
                    Value::Number(_) => {
                        let n = v
                            .as_i64()
                            .ok_or_else(|| Error::parse("coef", "expected an integer"))?;
                        BigRational::from_integer(BigInt::from(n))
                    }
                    _ => return Err(Error::parse("coef", "expected integer coefficient")),
                };
                if r.denom() != &BigInt::from(1) {
                    return Err(Error::parse("coef", format!("{} is not an integer", rational_to_string(&r))));
                }
                Ok(Coefficient::Int(r.numer().clone()))
            }
            Ring::Rat => {
                let r = match v {
                    Value::String(s) => rational_from_str(s)?,
                    Value::Number(_) => {
                        let n = v
                            .as_i64()
                            .ok_or_else(|| Error::parse("coef", "expected a rational"))?;
                        BigRational::from_integer(BigInt::from(n))
                    }
                    _ => return Err(Error::parse("coef", "expected rational coefficient")),
                };
                Ok(Coefficient::Rat(r))
            }
            Ring::Step => {
                let space = space.ok_or_else(|| {
                    Error::parse("coef", "step coefficients need a backend with a measured set")
                })?;
                Ok(Coefficient::Step(StepFunction::from_json(v, space)?))
            }
        }
    }

    pub fn as_rational(&self) -> Result<BigRational> {
        match self {
            Coefficient::Int(v) => Ok(BigRational::from_integer(v.clone())),
            Coefficient::Rat(v) => Ok(v.clone()),
            Coefficient::Step(_) => Err(Error::Precondition(
                "step coefficient where a number was expected".into(),
            )),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Int(v) => write!(f, "{v}"),
            Coefficient::Rat(v) => write!(f, "{}", rational_to_string(v)),
            Coefficient::Step(s) => {
                let mut first = true;
                for (p, v) in s.support() {
                    if !first {
                        write!(f, " + ")?;
                    }
                    write!(f, "{v}·χ{{{p}}}")?;
                    first = false;
                }
                if first {
                    write!(f, "0")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(s: &str) -> BigRational {
        rational_from_str(s).unwrap()
    }

    #[test]
    fn step_norms_on_uniform_space() {
        let x = MeasuredSet::new("X", 6);
        let f = StepFunction::from_values(
            x.clone(),
            [(0, BigInt::from(1)), (1, BigInt::from(1)), (2, BigInt::from(-3))],
        );
        assert_eq!(f.integral_abs(), rat("5/6"));
        assert_eq!(f.sup_norm(), BigInt::from(3));
        let g = f.add(&f.neg()).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn indicator_products_cut() {
        let x = MeasuredSet::new("X", 4);
        let f = StepFunction::indicator(x.clone(), [0, 1, 2]);
        let cut = StepFunction::indicator(x.clone(), [2, 3]);
        let fg = f.mul(&cut).unwrap();
        assert_eq!(fg, StepFunction::indicator(x, [2]));
    }

    #[test]
    fn relabel_moves_support() {
        let x = MeasuredSet::new("X", 5);
        let f = StepFunction::indicator(x.clone(), [0, 1]);
        // Shift every point by +2 mod 5.
        let g = f.relabel(|p| (p + 2) % 5);
        assert_eq!(g, StepFunction::indicator(x, [2, 3]));
    }

    #[test]
    fn rational_strings_round_trip() {
        for s in ["3", "-7", "1/10", "-33/10", "0"] {
            assert_eq!(rational_to_string(&rat(s)), s);
        }
        assert_eq!(rat("6/4"), rat("3/2"));
    }

    #[test]
    fn promotion_rules() {
        let two = Coefficient::int(2);
        let half = Coefficient::Rat(rat("1/2"));
        assert_eq!(two.mul(&half).unwrap(), Coefficient::Rat(rat("1")));

        let x = MeasuredSet::new("X", 2);
        let f = Coefficient::Step(StepFunction::indicator(x, [0]));
        assert_eq!(two.mul(&f).unwrap().norm(), rat("1"));
        assert!(half.mul(&f).is_err());
        assert!(f.div_int(&BigInt::from(2)).is_err());
    }

    #[test]
    fn step_json_blocks_round_trip() {
        let x = MeasuredSet::new("X", 6);
        let f = StepFunction::from_values(
            x.clone(),
            [(0, BigInt::from(1)), (4, BigInt::from(1)), (2, BigInt::from(-3))],
        );
        let v = f.to_json();
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"blocks":[{"points":[2],"value":-3},{"points":[0,4],"value":1}],"space":"X"}"#
        );
        let back = StepFunction::from_json(&v, &x).unwrap();
        assert_eq!(back, f);
    }
}
