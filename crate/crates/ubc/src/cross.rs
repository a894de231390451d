//! The Eilenberg–Zilber shuffle product of bar chains.
//!
//! A pair of homogeneous tuples σ = (g₀,…,g_p) over G and τ = (h₀,…,h_q)
//! over H contributes one signed tuple over G × H per monotone lattice path
//! from (0,0) to (p,q): the path (a₀,b₀),…,(a_{p+q},b_{p+q}) yields the
//! tuple with entries (g_{a_t}, h_{b_t}), signed by the parity of the
//! corresponding (p,q)-shuffle.

use crate::bar::{BarBackend, BarChain, Quotient, Tuple};
use crate::chain::Cell;
use crate::coeff::Ring;
use crate::error::{Error, Result};

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// All (p,q)-shuffles as step words: `true` = step in the first coordinate.
/// Each word carries the sign of its shuffle permutation: (−1)^inv where
/// inv counts first-coordinate steps preceded by second-coordinate steps.
fn shuffle_words(p: usize, q: usize) -> Vec<(Vec<bool>, i64)> {
    let total = p + q;
    let mut out = Vec::with_capacity(binom(total, p));
    let mut word = vec![false; total];
    fn rec(word: &mut Vec<bool>, pos: usize, x_left: usize, y_left: usize, out: &mut Vec<(Vec<bool>, i64)>) {
        if x_left == 0 && y_left == 0 {
            let mut inv = 0usize;
            let mut ys_seen = 0usize;
            for &is_x in word.iter() {
                if is_x {
                    inv += ys_seen;
                } else {
                    ys_seen += 1;
                }
            }
            let sign = if inv % 2 == 0 { 1 } else { -1 };
            out.push((word.clone(), sign));
            return;
        }
        if x_left > 0 {
            word[pos] = true;
            rec(word, pos + 1, x_left - 1, y_left, out);
        }
        if y_left > 0 {
            word[pos] = false;
            rec(word, pos + 1, x_left, y_left - 1, out);
        }
    }
    rec(&mut word, 0, p, q, &mut out);
    out
}

/// The shuffle cross-product x × y over G × H.
///
/// Degrees add, and each basis pair expands into binom(p+q, p) signed
/// tuples, so |x×y|₁ ≤ binom(p+q,p)·|x|₁·|y|₁. Satisfies the Leibniz rule
/// ∂(x×y) = ∂x×y + (−1)^p x×∂y.
pub fn cross_product(x: &BarChain, y: &BarChain) -> Result<BarChain> {
    let (bx, by) = (x.backend(), y.backend());
    if bx.action.is_some() || by.action.is_some() {
        return Err(Error::UnsupportedBackend(
            "cross products take trivial-coefficient bar chains".into(),
        ));
    }
    if bx.quotient != by.quotient || matches!(bx.quotient, Quotient::Mod(_)) {
        return Err(Error::UnsupportedBackend(format!(
            "cross product needs matching raw or full quotients, got {bx} and {by}"
        )));
    }
    if x.ring() == Ring::Step || x.ring() != y.ring() {
        return Err(Error::RingMismatch(x.ring(), y.ring()));
    }
    let group = bx.group.product(&by.group)?;
    let backend = BarBackend {
        group,
        quotient: bx.quotient,
        action: None,
    };

    let (p, q) = (x.degree(), y.degree());
    let (wx, wy) = (bx.width(), by.width());
    let words = shuffle_words(p, q);

    let mut out = BarChain::zero(backend, p + q, x.ring());
    for (sigma, a) in x.terms() {
        for (tau, b) in y.terms() {
            let ab = a.mul(b)?;
            for (word, sign) in &words {
                let mut flat = Vec::with_capacity((p + q + 1) * (wx + wy));
                let (mut ai, mut bi) = (0usize, 0usize);
                flat.extend_from_slice(sigma.entry(0, wx));
                flat.extend_from_slice(tau.entry(0, wy));
                for &is_x in word {
                    if is_x {
                        ai += 1;
                    } else {
                        bi += 1;
                    }
                    flat.extend_from_slice(sigma.entry(ai, wx));
                    flat.extend_from_slice(tau.entry(bi, wy));
                }
                let coef = if *sign >= 0 { ab.clone() } else { ab.neg() };
                out.add_term(Tuple::from_flat(flat), coef)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bar::boundary;
    use crate::coeff::Coefficient;
    use crate::group::Group;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn chain(backend: &BarBackend, degree: usize, terms: &[(i64, &[i64])]) -> BarChain {
        BarChain::from_terms(
            backend.clone(),
            degree,
            Ring::Int,
            terms
                .iter()
                .map(|(k, flat)| (Tuple::from_flat(flat.to_vec()), Coefficient::int(*k))),
        )
        .unwrap()
    }

    #[test]
    fn degree_zero_factor_embeds() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let x = chain(&raw, 0, &[(1, &[5])]);
        let y = chain(&raw, 2, &[(3, &[0, 1, 2]), (-1, &[2, 2, 4])]);
        let xy = cross_product(&x, &y).unwrap();
        assert_eq!(xy.degree(), 2);
        assert_eq!(xy.term_count(), 2);
        assert_eq!(xy.l1_norm(), y.l1_norm());
        // Every product tuple carries 5 in the first coordinate and y's
        // entries in the second.
        assert_eq!(
            xy.coefficient(&Tuple::from_flat(vec![5, 0, 5, 1, 5, 2])),
            Some(&Coefficient::int(3))
        );
    }

    #[test]
    fn two_shuffles_in_bidegree_one_one() {
        let full = BarBackend::full(Group::FreeAbelian(1));
        let x = chain(&full, 1, &[(1, &[0, 2])]);
        let y = chain(&full, 1, &[(1, &[0, 3])]);
        let xy = cross_product(&x, &y).unwrap();
        assert_eq!(xy.term_count(), 2);
        assert_eq!(
            xy.coefficient(&Tuple::from_flat(vec![0, 0, 2, 0, 2, 3])),
            Some(&Coefficient::int(1))
        );
        assert_eq!(
            xy.coefficient(&Tuple::from_flat(vec![0, 0, 0, 3, 2, 3])),
            Some(&Coefficient::int(-1))
        );
    }

    #[test]
    fn leibniz_rule_on_random_chains() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let mut rng = StdRng::seed_from_u64(11);
        let mut random_chain = |degree: usize| {
            let mut c = BarChain::zero(raw.clone(), degree, Ring::Int);
            for _ in 0..3 {
                let flat: Vec<i64> = (0..=degree).map(|_| rng.gen_range(-3i64..4)).collect();
                c.add_term(Tuple::from_flat(flat), Coefficient::int(rng.gen_range(-2i64..3)))
                    .unwrap();
            }
            c
        };
        for p in 1..=2usize {
            for q in 1..=2usize {
                let x = random_chain(p);
                let y = random_chain(q);
                let lhs = boundary(&cross_product(&x, &y).unwrap()).unwrap();
                let mut rhs = cross_product(&boundary(&x).unwrap(), &y).unwrap();
                let second = cross_product(&x, &boundary(&y).unwrap()).unwrap();
                rhs = if p % 2 == 0 {
                    rhs.add(&second).unwrap()
                } else {
                    rhs.sub(&second).unwrap()
                };
                assert_eq!(lhs, rhs, "Leibniz fails at bidegree ({p},{q})");
            }
        }
    }

    #[test]
    fn norm_bound_is_binomial() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..10 {
            let p = rng.gen_range(0..3usize);
            let q = rng.gen_range(0..3usize);
            let mut mk = |deg: usize| {
                let mut c = BarChain::zero(raw.clone(), deg, Ring::Int);
                for _ in 0..2 {
                    let flat: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-2i64..3)).collect();
                    c.add_term(Tuple::from_flat(flat), Coefficient::int(rng.gen_range(-2i64..3)))
                        .unwrap();
                }
                c
            };
            let x = mk(p);
            let y = mk(q);
            let bound = BigRational::from_integer(BigInt::from(binom(p + q, p) as i64))
                * x.l1_norm()
                * y.l1_norm();
            assert!(cross_product(&x, &y).unwrap().l1_norm() <= bound);
        }
    }

    #[test]
    fn quotient_and_ring_guards() {
        let raw = BarBackend::raw(Group::FreeAbelian(1));
        let full = BarBackend::full(Group::FreeAbelian(1));
        let x = chain(&raw, 1, &[(1, &[0, 1])]);
        let y = chain(&full, 1, &[(1, &[0, 1])]);
        assert!(cross_product(&x, &y).is_err());

        let product = cross_product(&x, &x).unwrap();
        assert_eq!(product.backend().group, Group::ProductOfFreeAbelian(vec![1, 1]));
        let s = product.backend().to_string();
        assert_eq!(s, "bar:z^1xz^1:raw");
        assert_eq!(BarBackend::parse(&s).unwrap(), *product.backend());
    }
}
