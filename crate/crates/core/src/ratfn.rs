//! Rational functions in the deployment parameters, with exact arithmetic.
//!
//! Fractions are kept lightly reduced: numeric content and common monomial
//! factors are cancelled, and exact trial division is attempted, but no full
//! multivariate gcd is computed. Equality therefore goes through
//! cross-multiplication, which is exact regardless of the representative.

use crate::mpoly::{MPoly, Q};
use crate::symbol::Sym;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct RatFn {
    pub num: MPoly,
    pub den: MPoly,
}

impl RatFn {
    pub fn new(num: MPoly, den: MPoly) -> RatFn {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = RatFn { num, den };
        r.normalize();
        r
    }

    pub fn zero() -> RatFn {
        RatFn {
            num: MPoly::zero(),
            den: MPoly::one(),
        }
    }

    pub fn one() -> RatFn {
        RatFn {
            num: MPoly::one(),
            den: MPoly::one(),
        }
    }

    pub fn from_poly(p: MPoly) -> RatFn {
        RatFn {
            num: p,
            den: MPoly::one(),
        }
    }

    pub fn var(v: Sym) -> RatFn {
        Self::from_poly(MPoly::var(v))
    }

    pub fn from_q(q: Q) -> RatFn {
        Self::from_poly(MPoly::constant(q))
    }

    pub fn from_i64(n: i64) -> RatFn {
        Self::from_poly(MPoly::from_i64(n))
    }

    pub fn rational(p: i64, q: i64) -> RatFn {
        Self::from_q(Q::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn as_q(&self) -> Option<Q> {
        let n = self.num.as_constant()?;
        let d = self.den.as_constant()?;
        Some(n / d)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = MPoly::one();
            return;
        }
        // cancel shared monomial factors
        let mn = self.num.monomial_content();
        let md = self.den.monomial_content();
        let shared: Vec<(Sym, u32)> = {
            let dm: BTreeMap<Sym, u32> = md.into_iter().collect();
            mn.into_iter()
                .filter_map(|(v, e)| dm.get(&v).map(|&e2| (v, e.min(e2))))
                .collect()
        };
        if !shared.is_empty() {
            self.num = self.num.div_mono(&shared).unwrap();
            self.den = self.den.div_mono(&shared).unwrap();
        }
        // exact cancellation when one side divides the other
        if let Some(q) = self.num.div_exact(&self.den) {
            self.num = q;
            self.den = MPoly::one();
        } else if !self.num.is_constant() {
            if let Some(q) = self.den.div_exact(&self.num) {
                self.num = MPoly::one();
                self.den = q;
            }
        }
        // make denominator content one with positive leading coefficient
        let mut c = self.den.content();
        if let Some((_, lc)) = self.den.leading() {
            if lc.is_negative() {
                c = -c;
            }
        }
        if !c.is_one() {
            let inv = Q::one() / c;
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        if self.den == other.den {
            return RatFn::new(self.num.add(&other.num), self.den.clone());
        }
        RatFn::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RatFn {
        RatFn {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RatFn) -> RatFn {
        RatFn::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn scale_q(&self, q: &Q) -> RatFn {
        RatFn::new(self.num.scale(q), self.den.clone())
    }

    pub fn div(&self, other: &RatFn) -> RatFn {
        assert!(!other.is_zero(), "division by zero rational function");
        RatFn::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn inv(&self) -> RatFn {
        assert!(!self.is_zero(), "inverse of zero");
        RatFn::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, n: u32) -> RatFn {
        let mut out = RatFn::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Substitute exact values for a subset of variables.
    pub fn eval_partial(&self, assign: &BTreeMap<Sym, Q>) -> RatFn {
        RatFn::new(
            self.num.eval_partial(assign),
            self.den.eval_partial(assign),
        )
    }

    pub fn eval(&self, assign: &BTreeMap<Sym, Q>) -> Option<Q> {
        let d = self.den.eval(assign)?;
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(assign)? / d)
    }

    pub fn eval_f64(&self, assign: &BTreeMap<Sym, f64>) -> Option<f64> {
        let d = self.den.eval_f64(assign)?;
        Some(self.num.eval_f64(assign)? / d)
    }

    pub fn vars(&self) -> Vec<Sym> {
        let mut v = self.num.vars();
        for s in self.den.vars() {
            if !v.contains(&s) {
                v.push(s);
            }
        }
        v.sort();
        v
    }

    /// Value at a fixed generic rational point (per sample-set index).
    /// `None` when the denominator happens to vanish there.
    pub fn generic_value(&self, set: u32) -> Option<Q> {
        let mut assign = BTreeMap::new();
        for v in self.vars() {
            assign.insert(v, generic_point(v, set));
        }
        self.eval(&assign)
    }
}

/// A fixed "generic" rational value for a variable, distinct per sample set.
fn generic_point(v: Sym, set: u32) -> Q {
    let k = v.0 as i64;
    let s = set as i64;
    // small distinct non-resonant rationals, never 0 or 1
    Q::new(
        BigInt::from(2 * k + 3 + 11 * s),
        BigInt::from(7 + 5 * k + 3 * s * s),
    )
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        // cross-multiplication: exact for any representative
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatFn {}

impl PartialOrd for RatFn {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RatFn {
    /// Deterministic total order, consistent with cross-multiplied equality:
    /// compare values at generic rational points, falling back to the raw
    /// term representation when every sample point is degenerate.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if self == other {
            return std::cmp::Ordering::Equal;
        }
        for set in 0..6 {
            if let (Some(a), Some(b)) =
                (self.generic_value(set), other.generic_value(set))
            {
                let c = a.cmp(&b);
                if c != std::cmp::Ordering::Equal {
                    return c;
                }
            }
        }
        (&self.num.terms, &self.den.terms).cmp(&(&other.num.terms, &other.den.terms))
    }
}

impl std::fmt::Display for RatFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den.is_constant() && self.den.as_constant().map_or(false, |c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}
