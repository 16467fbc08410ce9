//! Compensators and finite sums of terms `c * x^e * (log x)^k`.
//!
//! The exponent `e` and coefficient `c` live in the exact coefficient ring
//! [`RatFn`]; the log power is a nonnegative integer. Sums of this shape are
//! closed under the Euler operator `x d/dx` and under resolution of the
//! cohomological equations that produce Dulac asymptotic scales.

use crate::ratfn::RatFn;
use std::collections::BTreeMap;

/// Compensator value: `(y^b - 1)/b` for `b != 0`, `log y` at `b = 0`.
///
/// Near `b = 0` the direct quotient loses all significant digits, so the
/// series in `b*log y` is used once `|b log y| < 1e-4`.
pub fn ld(y: f64, b: f64) -> f64 {
    assert!(y > 0.0, "compensator needs y > 0");
    let l = y.ln();
    if b == 0.0 {
        return l;
    }
    let t = b * l;
    if t.abs() < 1e-4 {
        // sum_{n=0}^{7} b^n l^{n+1} / (n+1)!
        let mut acc = 0.0;
        let mut term = l;
        for n in 0..8u32 {
            acc += term;
            term *= t / (n as f64 + 2.0);
        }
        acc
    } else {
        (y.powf(b) - 1.0) / b
    }
}

/// The compensated coordinate `z = y * ld(y, b)`.
pub fn comp_z(y: f64, b: f64) -> f64 {
    y * ld(y, b)
}

/// A finite sum of terms `coeff * x^exponent * (log x)^logpow` in normal
/// form: keyed by `(exponent, logpow)` under the deterministic coefficient
/// order, zero coefficients dropped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LogExpSum {
    pub terms: BTreeMap<(RatFn, u32), RatFn>,
}

impl LogExpSum {
    pub fn zero() -> LogExpSum {
        LogExpSum {
            terms: BTreeMap::new(),
        }
    }

    /// The single term `c * x^e * (log x)^k`.
    pub fn term(e: RatFn, k: u32, c: RatFn) -> LogExpSum {
        let mut s = LogExpSum::zero();
        s.push(e, k, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, e: RatFn, k: u32, c: RatFn) {
        if c.is_zero() {
            return;
        }
        let key = (e, k);
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &LogExpSum) -> LogExpSum {
        let mut out = self.clone();
        for ((e, k), c) in &other.terms {
            out.push(e.clone(), *k, c.clone());
        }
        out
    }

    pub fn neg(&self) -> LogExpSum {
        LogExpSum {
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &LogExpSum) -> LogExpSum {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &RatFn) -> LogExpSum {
        if c.is_zero() {
            return LogExpSum::zero();
        }
        let mut out = LogExpSum::zero();
        for ((e, k), c0) in &self.terms {
            out.push(e.clone(), *k, c0.mul(c));
        }
        out
    }

    /// Multiply by the monomial `c * x^e * (log x)^k`.
    pub fn mul_term(&self, e: &RatFn, k: u32, c: &RatFn) -> LogExpSum {
        let mut out = LogExpSum::zero();
        for ((e0, k0), c0) in &self.terms {
            out.push(e0.add(e), k0 + k, c0.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &LogExpSum) -> LogExpSum {
        let mut out = LogExpSum::zero();
        for ((e, k), c) in &other.terms {
            out = out.add(&self.mul_term(e, *k, c));
        }
        out
    }

    /// Euler operator `x d/dx`:
    /// `x^e log^k  ->  e x^e log^k + k x^e log^(k-1)`.
    pub fn chi0_apply(&self) -> LogExpSum {
        let mut out = LogExpSum::zero();
        for ((e, k), c) in &self.terms {
            out.push(e.clone(), *k, c.mul(e));
            if *k > 0 {
                out.push(e.clone(), k - 1, c.scale_q(&crate::mpoly::Q::from_integer((*k).into())));
            }
        }
        out
    }

    /// Numeric value at `x > 0` with parameters bound by `assign`.
    pub fn eval_f64(
        &self,
        x: f64,
        assign: &BTreeMap<crate::symbol::Sym, f64>,
    ) -> Option<f64> {
        let lx = x.ln();
        let mut total = 0.0;
        for ((e, k), c) in &self.terms {
            let ev = e.eval_f64(assign)?;
            let cv = c.eval_f64(assign)?;
            total += cv * x.powf(ev) * lx.powi(*k as i32);
        }
        Some(total)
    }

    /// Value at `x = 1` (only log-free terms contribute).
    pub fn value_at_one(&self) -> RatFn {
        let mut s = RatFn::zero();
        for ((_, k), c) in &self.terms {
            if *k == 0 {
                s = s.add(c);
            }
        }
        s
    }
}

/// Solve `x f' = r f + g` with `f(1) = 0`, term by term.
///
/// For a source term `c x^e log^k`:
/// resonant (`e = r`): the primitive is `c/(k+1) x^r log^(k+1)`;
/// otherwise, with `d = e - r`,
/// `f = sum_{i=0..k} c (-1)^i (k!/(k-i)!) / d^(i+1) x^e log^(k-i)
///      - c (-1)^k k! / d^(k+1) x^r`.
pub fn euler_resolve(r: &RatFn, g: &LogExpSum) -> LogExpSum {
    let mut f = LogExpSum::zero();
    for ((e, k), c) in &g.terms {
        if e == r {
            let kq = crate::mpoly::Q::from_integer((*k as i64 + 1).into());
            f.push(r.clone(), k + 1, c.scale_q(&(crate::mpoly::Q::from_integer(1.into()) / kq)));
            continue;
        }
        let d = e.sub(r);
        let mut fall = crate::mpoly::Q::from_integer(1.into()); // k!/(k-i)!
        let mut sign = crate::mpoly::Q::from_integer(1.into());
        let mut dpow = d.clone(); // d^(i+1)
        let mut boundary = RatFn::zero();
        for i in 0..=*k {
            let coeff = c
                .scale_q(&(sign.clone() * fall.clone()))
                .div(&dpow);
            f.push(e.clone(), k - i, coeff.clone());
            if i == *k {
                boundary = coeff;
            }
            if i < *k {
                fall *= crate::mpoly::Q::from_integer(((*k - i) as i64).into());
                sign = -sign;
                dpow = dpow.mul(&d);
            }
        }
        // enforce f(1) = 0
        f.push(r.clone(), 0, boundary.neg());
    }
    f
}

impl LogExpSum {
    /// Check that `f` solves `x f' = r f + g` exactly.
    pub fn solves_euler(f: &LogExpSum, r: &RatFn, g: &LogExpSum) -> bool {
        let lhs = f.chi0_apply();
        let rhs = f.scale(r).add(g);
        lhs == rhs
    }
}

impl std::fmt::Display for LogExpSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((e, k), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})*x^({})", c, e)?;
            if *k == 1 {
                write!(f, "*log(x)")?;
            } else if *k > 1 {
                write!(f, "*log(x)^{}", k)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpoly::MPoly;
    use crate::symbol::Sym;
    use proptest::prelude::*;

    #[test]
    fn compensator_limits() {
        // beta = 0 is an exact logarithm
        assert_eq!(ld(2.0, 0.0), 2.0_f64.ln());
        // beta = 1: (y - 1)
        assert!((ld(3.0, 1.0) - 2.0).abs() < 1e-15);
        // tiny beta matches the log closely
        let v = ld(0.5, 1e-9);
        assert!((v - 0.5_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn compensator_series_matches_direct() {
        // straddle the series switch: both branches agree to ~1e-14 rel
        for &b in &[9.9e-5_f64, 1.01e-4, 5e-5, 2e-4] {
            for &y in &[0.1_f64, 0.9, 2.5] {
                let direct = (y.powf(b) - 1.0) / b;
                let v = ld(y, b);
                assert!(
                    (v - direct).abs() <= 1e-11 * direct.abs().max(1.0),
                    "y={y} b={b}: {v} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn euler_examples() {
        // x f' = f + x, f(1)=0  =>  f = x log x
        let r = RatFn::one();
        let g = LogExpSum::term(RatFn::one(), 0, RatFn::one());
        let f = euler_resolve(&r, &g);
        assert_eq!(f, LogExpSum::term(RatFn::one(), 1, RatFn::one()));

        // x f' = 2f + x, f(1)=0  =>  f = x^2 - x
        let r2 = RatFn::from_i64(2);
        let f2 = euler_resolve(&r2, &g);
        let mut want = LogExpSum::term(RatFn::from_i64(2), 0, RatFn::one());
        want.push(RatFn::one(), 0, RatFn::from_i64(-1));
        assert_eq!(f2, want);
        assert!(LogExpSum::solves_euler(&f2, &r2, &g));
        assert!(f2.value_at_one().is_zero());
    }

    #[test]
    fn euler_with_logs_and_symbolic_rate() {
        let mu = RatFn::var(Sym::new("mu"));
        // source c x^(1+mu) log^2 x, rate r = 2 + mu
        let e = RatFn::one().add(&mu);
        let r = RatFn::from_i64(2).add(&mu);
        let g = LogExpSum::term(e, 2, RatFn::from_poly(MPoly::from_i64(3)));
        let f = euler_resolve(&r, &g);
        assert!(LogExpSum::solves_euler(&f, &r, &g));
        assert!(f.value_at_one().is_zero());
    }

    proptest! {
        #[test]
        fn euler_resolve_solves(
            es in proptest::collection::vec((-4i64..5, 0u32..4, -5i64..6), 1..5),
            rr in -4i64..5,
        ) {
            let r = RatFn::from_i64(rr);
            let mut g = LogExpSum::zero();
            for (e, k, c) in es {
                g.push(RatFn::from_i64(e), k, RatFn::from_i64(c));
            }
            let f = euler_resolve(&r, &g);
            prop_assert!(LogExpSum::solves_euler(&f, &r, &g));
            prop_assert!(f.value_at_one().is_zero());
        }

        #[test]
        fn compensator_monotone_in_y(
            y1 in 0.05f64..3.0, y2 in 0.05f64..3.0, b in -0.5f64..0.5,
        ) {
            // Ld(., b) is increasing
            let (lo, hi) = if y1 < y2 { (y1, y2) } else { (y2, y1) };
            if hi - lo > 1e-9 {
                prop_assert!(ld(lo, b) < ld(hi, b) + 1e-12);
            }
        }
    }
}
