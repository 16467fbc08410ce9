//! Sparse multivariate polynomials over exact rationals.

use crate::symbol::Sym;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

pub type Q = BigRational;

/// Monomial: sorted list of (variable, positive power).
pub type Mono = Vec<(Sym, u32)>;

fn mono_mul(a: &Mono, b: &Mono) -> Mono {
    let mut out: BTreeMap<Sym, u32> = a.iter().cloned().collect();
    for &(v, e) in b {
        *out.entry(v).or_insert(0) += e;
    }
    out.into_iter().collect()
}

/// Exact division of monomials; `None` if `b` does not divide `a`.
fn mono_div(a: &Mono, b: &Mono) -> Option<Mono> {
    let mut out: BTreeMap<Sym, u32> = a.iter().cloned().collect();
    for &(v, e) in b {
        match out.get_mut(&v) {
            Some(p) if *p >= e => {
                *p -= e;
            }
            _ => return None,
        }
    }
    Some(out.into_iter().filter(|&(_, e)| e > 0).collect())
}

fn mono_deg(m: &Mono) -> u32 {
    m.iter().map(|&(_, e)| e).sum()
}

/// Lex order on monomials by (variable id, exponent) pairs, graded first.
fn mono_cmp(a: &Mono, b: &Mono) -> std::cmp::Ordering {
    mono_deg(a).cmp(&mono_deg(b)).then_with(|| a.cmp(b))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MPoly {
    /// term map, monomial -> nonzero coefficient
    pub terms: BTreeMap<Mono, Q>,
}

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Q) -> MPoly {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(Vec::new(), c);
        }
        MPoly { terms: t }
    }

    pub fn one() -> MPoly {
        Self::constant(Q::one())
    }

    pub fn from_i64(n: i64) -> MPoly {
        Self::constant(Q::from_integer(BigInt::from(n)))
    }

    pub fn var(v: Sym) -> MPoly {
        let mut t = BTreeMap::new();
        t.insert(vec![(v, 1)], Q::one());
        MPoly { terms: t }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() <= 1 && self.terms.keys().all(|m| m.is_empty())
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.terms.is_empty() {
            return Some(Q::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Vec::new() as &Mono) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| mono_deg(m)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> Vec<Sym> {
        let mut out: Vec<Sym> = Vec::new();
        for m in self.terms.keys() {
            for &(v, _) in m {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out.sort();
        out
    }

    fn insert_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(mono_mul(ma, mb), ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> MPoly {
        let mut out = MPoly::one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Leading (maximal) term in graded-lex order.
    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| mono_cmp(a, b))
            .map(|(m, c)| (m, c))
    }

    /// Exact polynomial division: `Some(q)` iff `self == q * d` exactly.
    pub fn div_exact(&self, d: &MPoly) -> Option<MPoly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&(Q::one() / c)));
        }
        let (dm, dc) = d.leading().unwrap();
        let dm = dm.clone();
        let dc = dc.clone();
        let mut rem = self.clone();
        let mut q = MPoly::zero();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            let m = mono_div(rm, &dm)?;
            let c = rc / &dc;
            let mut t = MPoly::zero();
            t.insert_term(m.clone(), c.clone());
            q.insert_term(m, c);
            rem = rem.sub(&t.mul(d));
        }
        Some(q)
    }

    /// Substitute rational values for a subset of the variables.
    pub fn eval_partial(&self, assign: &BTreeMap<Sym, Q>) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest: Mono = Vec::new();
            for &(v, e) in m {
                if let Some(val) = assign.get(&v) {
                    let mut p = Q::one();
                    for _ in 0..e {
                        p *= val;
                    }
                    coeff *= p;
                } else {
                    rest.push((v, e));
                }
            }
            out.insert_term(rest, coeff);
        }
        out
    }

    /// Full rational evaluation; `None` if a variable is unassigned.
    pub fn eval(&self, assign: &BTreeMap<Sym, Q>) -> Option<Q> {
        self.eval_partial(assign).as_constant()
    }

    pub fn eval_f64(&self, assign: &BTreeMap<Sym, f64>) -> Option<f64> {
        let mut total = 0.0;
        for (m, c) in &self.terms {
            let mut v = q_to_f64(c);
            for &(s, e) in m {
                let x = *assign.get(&s)?;
                v *= x.powi(e as i32);
            }
            total += v;
        }
        Some(total)
    }

    /// GCD of the numeric coefficients (positive), as a rational.
    pub fn content(&self) -> Q {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_bigint::BigInt::from(num_integer::gcd(
                num_gcd.clone(),
                c.numer().abs(),
            ));
            den_lcm = num_integer::lcm(den_lcm, c.denom().clone());
        }
        if num_gcd.is_zero() {
            Q::one()
        } else {
            Q::new(num_gcd, den_lcm)
        }
    }

    /// Common monomial factor of all terms.
    pub fn monomial_content(&self) -> Mono {
        let mut iter = self.terms.keys();
        let first = match iter.next() {
            Some(m) => m.clone(),
            None => return Vec::new(),
        };
        let mut common: BTreeMap<Sym, u32> = first.into_iter().collect();
        for m in iter {
            let mm: BTreeMap<Sym, u32> = m.iter().cloned().collect();
            common = common
                .into_iter()
                .filter_map(|(v, e)| mm.get(&v).map(|&e2| (v, e.min(e2))))
                .filter(|&(_, e)| e > 0)
                .collect();
            if common.is_empty() {
                break;
            }
        }
        common.into_iter().collect()
    }

    pub fn div_mono(&self, m: &Mono) -> Option<MPoly> {
        let mut out = MPoly::zero();
        for (mm, c) in &self.terms {
            out.insert_term(mono_div(mm, m)?, c.clone());
        }
        Some(out)
    }
}

pub fn q_to_f64(q: &Q) -> f64 {
    // Scale each side down independently to stay in f64 range, then
    // reapply the exponent difference.
    let n = q.numer();
    let d = q.denom();
    let sn = (n.bits() as i64 - 512).max(0) as u64;
    let sd = (d.bits() as i64 - 512).max(0) as u64;
    let nf = bigint_to_f64(&(n >> sn));
    let df = bigint_to_f64(&(d >> sd));
    (nf / df) * 2f64.powi(sn as i32 - sd as i32)
}

fn bigint_to_f64(n: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    n.to_f64().unwrap_or(f64::NAN)
}

impl std::fmt::Display for MPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if m.is_empty() {
                write!(f, "{}", c)?;
            } else {
                if !c.is_one() {
                    write!(f, "{}*", c)?;
                }
                let parts: Vec<String> = m
                    .iter()
                    .map(|(v, e)| {
                        if *e == 1 {
                            v.to_string()
                        } else {
                            format!("{}^{}", v, e)
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join("*"))?;
            }
        }
        Ok(())
    }
}
