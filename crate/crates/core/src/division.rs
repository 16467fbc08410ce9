//! Division with remainder in local polynomial rings: initial exponents,
//! staircase diagrams, canonical quotients/remainders, ideal membership,
//! and stationarity of increasing ideal chains.
//!
//! The monomial order is *local*: the initial exponent of a polynomial is
//! its order-minimal support element, so division by non-monomial bases can
//! run forever on polynomials (units of the local ring have infinite
//! inverses). A precision-truncated mode caps the order and reports the
//! precision actually attained.

use crate::error::Error;
use crate::mpoly::Q;
use crate::ratfn::RatFn;
use crate::Result;
use num_bigint::BigInt;
use num_traits::Zero;
use std::collections::BTreeMap;

pub type Exp = Vec<u32>;

/// Order by the weighted degree `L(m) = sum w_j m_j`, ties broken by
/// `(m_1, ..., m_q)` lexicographically. Weights must be positive.
#[derive(Clone, Debug)]
pub struct MonomialOrder {
    pub weights: Vec<Q>,
}

impl MonomialOrder {
    /// Total degree: all weights one.
    pub fn total_degree(q: usize) -> MonomialOrder {
        MonomialOrder {
            weights: vec![Q::from_integer(1.into()); q],
        }
    }

    pub fn with_weights(weights: Vec<Q>) -> MonomialOrder {
        assert!(
            weights.iter().all(|w| *w > Q::zero()),
            "weights must be positive"
        );
        MonomialOrder { weights }
    }

    pub fn degree(&self, m: &Exp) -> Q {
        let mut s = Q::zero();
        for (w, &e) in self.weights.iter().zip(m) {
            s += w * Q::from_integer(BigInt::from(e));
        }
        s
    }

    pub fn cmp(&self, a: &Exp, b: &Exp) -> std::cmp::Ordering {
        self.degree(a).cmp(&self.degree(b)).then_with(|| a.cmp(b))
    }
}

/// Element of the local ring: finite support over exponent vectors, with
/// coefficients in the exact coefficient field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LocalPoly {
    pub terms: BTreeMap<Exp, RatFn>,
}

impl LocalPoly {
    pub fn zero() -> LocalPoly {
        LocalPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomial(m: Exp, c: RatFn) -> LocalPoly {
        let mut p = LocalPoly::zero();
        p.push(m, c);
        p
    }

    pub fn push(&mut self, m: Exp, c: RatFn) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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

    pub fn add(&self, other: &LocalPoly) -> LocalPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.push(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &LocalPoly) -> LocalPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.push(m.clone(), c.neg());
        }
        out
    }

    pub fn scale(&self, c: &RatFn) -> LocalPoly {
        if c.is_zero() {
            return LocalPoly::zero();
        }
        LocalPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k.mul(c)))
                .collect(),
        }
    }

    /// Multiply by the monomial `c * alpha^m`.
    pub fn shift(&self, m: &Exp, c: &RatFn) -> LocalPoly {
        let mut out = LocalPoly::zero();
        for (m0, c0) in &self.terms {
            let mm: Exp = m0.iter().zip(m).map(|(a, b)| a + b).collect();
            out.push(mm, c0.mul(c));
        }
        out
    }

    pub fn nvars(&self) -> usize {
        self.terms.keys().next().map_or(0, |m| m.len())
    }
}

/// The order-minimal support element.
pub fn initial_exponent(f: &LocalPoly, ord: &MonomialOrder) -> Result<Exp> {
    f.terms
        .keys()
        .min_by(|a, b| ord.cmp(a, b))
        .cloned()
        .ok_or(Error::ZeroPolynomial)
}

fn divides(a: &Exp, b: &Exp) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Staircase of a (completed) basis: minimal corners plus the cell
/// partition. A monomial in `N(J)` falls in the cell of the *first*
/// corner that divides it; the complement is the remainder region.
#[derive(Clone, Debug)]
pub struct ExponentDiagram {
    pub corners: Vec<Exp>,
}

impl ExponentDiagram {
    pub fn from_initials(mut initials: Vec<Exp>, ord: &MonomialOrder) -> ExponentDiagram {
        initials.sort_by(|a, b| ord.cmp(a, b));
        initials.dedup();
        let mut corners: Vec<Exp> = Vec::new();
        for m in initials {
            if !corners.iter().any(|c| divides(c, &m)) {
                corners.push(m);
            }
        }
        ExponentDiagram { corners }
    }

    /// Index of the cell containing `m`, or `None` if `m` is outside the
    /// staircase (remainder region).
    pub fn cell(&self, m: &Exp) -> Option<usize> {
        self.corners.iter().position(|c| divides(c, m))
    }
}

/// Outcome of a division: `f = sum Q_i a_i + R`, possibly only modulo the
/// precision ideal in truncated mode.
#[derive(Clone, Debug)]
pub struct DivisionResult {
    pub quotients: Vec<LocalPoly>,
    pub remainder: LocalPoly,
    /// `None` for an exact division; `Some(p)` when terms of order >= p
    /// were truncated (partial result).
    pub truncated_at: Option<Q>,
}

/// Per-call controls for [`divide`].
#[derive(Clone, Debug)]
pub struct DivideOpts {
    /// Stop processing terms of order >= this bound (truncated-series mode).
    pub precision: Option<Q>,
    /// Hard cap on reduction steps before declaring non-termination.
    pub step_budget: usize,
}

impl Default for DivideOpts {
    fn default() -> Self {
        DivideOpts {
            precision: None,
            step_budget: 200_000,
        }
    }
}

/// Canonical division of `f` by `basis` along the staircase of the basis's
/// initial exponents: the minimal unreduced term is sent to the quotient of
/// the first corner whose cone contains it, or to the remainder.
pub fn divide(
    f: &LocalPoly,
    basis: &[LocalPoly],
    ord: &MonomialOrder,
    opts: &DivideOpts,
) -> Result<DivisionResult> {
    let initials: Vec<Exp> = basis
        .iter()
        .map(|a| initial_exponent(a, ord))
        .collect::<Result<_>>()?;
    let leads: Vec<RatFn> = basis
        .iter()
        .zip(&initials)
        .map(|(a, m)| a.terms[m].clone())
        .collect();
    // cell assignment must follow the corner-first-match rule over the
    // *generator* initials (first matching generator wins), which realizes
    // the paper's partition when the basis is inter-reduced
    let mut quotients = vec![LocalPoly::zero(); basis.len()];
    let mut remainder = LocalPoly::zero();
    let mut work = f.clone();
    let mut truncated_at: Option<Q> = None;
    let mut steps = 0usize;

    while !work.is_zero() {
        steps += 1;
        if steps > opts.step_budget {
            return Err(Error::PrecisionExhausted(
                work.terms
                    .keys()
                    .map(|m| {
                        // report attained order as an integer floor
                        use num_traits::ToPrimitive;
                        ord.degree(m).to_integer().to_i64().unwrap_or(i64::MAX)
                    })
                    .min()
                    .unwrap_or(0),
            ));
        }
        let m = initial_exponent(&work, ord)?;
        if let Some(prec) = &opts.precision {
            if ord.degree(&m) >= *prec {
                // everything left is beyond the precision bound
                truncated_at = Some(prec.clone());
                break;
            }
        }
        let c = work.terms[&m].clone();
        match initials.iter().position(|e| divides(e, &m)) {
            Some(i) => {
                let shift: Exp = m.iter().zip(&initials[i]).map(|(a, b)| a - b).collect();
                let q = c.div(&leads[i]);
                quotients[i].push(shift.clone(), q.clone());
                work = work.sub(&basis[i].shift(&shift, &q));
            }
            None => {
                remainder.push(m.clone(), c);
                work.terms.remove(&m);
            }
        }
    }
    Ok(DivisionResult {
        quotients,
        remainder,
        truncated_at,
    })
}

/// One inter-reduction pass: divide each generator by the others, keep the
/// nonzero remainders, drop the zero ones. Iterated to a fixed point.
pub fn inter_reduce(
    gens: &[LocalPoly],
    ord: &MonomialOrder,
    opts: &DivideOpts,
) -> Result<Vec<LocalPoly>> {
    let mut basis: Vec<LocalPoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    for _pass in 0..40 {
        let mut changed = false;
        let mut i = 0;
        while i < basis.len() {
            if basis.len() == 1 {
                break;
            }
            let others: Vec<LocalPoly> = basis
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, g)| g.clone())
                .collect();
            match divide(&basis[i], &others, ord, opts) {
                Ok(r) if r.truncated_at.is_none() => {
                    if r.remainder.is_zero() {
                        basis.remove(i);
                        changed = true;
                        continue;
                    }
                    if r.remainder != basis[i] {
                        basis[i] = r.remainder;
                        changed = true;
                    }
                }
                // keep the original rather than a truncated/diverging artifact
                _ => {}
            }
            i += 1;
        }
        // deterministic ordering of the basis by initial exponent
        basis.sort_by(|a, b| {
            let ia = initial_exponent(a, ord).unwrap();
            let ib = initial_exponent(b, ord).unwrap();
            ord.cmp(&ia, &ib)
        });
        if !changed {
            break;
        }
    }
    Ok(basis)
}

/// Bounded standard-basis completion: adjoin reduced S-polynomials until no
/// new staircase corners appear or the budget runs out. Needed because an
/// arbitrary generating family does not realize the full staircase.
pub fn complete_basis(
    gens: &[LocalPoly],
    ord: &MonomialOrder,
    opts: &DivideOpts,
) -> Result<Vec<LocalPoly>> {
    let mut basis = inter_reduce(gens, ord, opts)?;
    let trunc = DivideOpts {
        precision: opts.precision.clone().or_else(|| {
            // default cap for completion: well past every in-scope example
            Some(Q::from_integer(48.into()))
        }),
        step_budget: opts.step_budget,
    };
    let mut budget = 64usize;
    loop {
        let initials: Vec<Exp> = basis
            .iter()
            .map(|a| initial_exponent(a, ord))
            .collect::<Result<_>>()?;
        let mut new_elem: Option<LocalPoly> = None;
        'pairs: for i in 0..basis.len() {
            for j in (i + 1)..basis.len() {
                let lcm: Exp = initials[i]
                    .iter()
                    .zip(&initials[j])
                    .map(|(a, b)| *a.max(b))
                    .collect();
                let si: Exp = lcm.iter().zip(&initials[i]).map(|(a, b)| a - b).collect();
                let sj: Exp = lcm.iter().zip(&initials[j]).map(|(a, b)| a - b).collect();
                let ci = basis[i].terms[&initials[i]].clone();
                let cj = basis[j].terms[&initials[j]].clone();
                let s = basis[i]
                    .shift(&si, &cj)
                    .sub(&basis[j].shift(&sj, &ci));
                if s.is_zero() {
                    continue;
                }
                let r = divide(&s, &basis, ord, &trunc)?;
                if r.remainder.is_zero() {
                    continue;
                }
                // only adjoin if it opens a genuinely new staircase corner
                let e = initial_exponent(&r.remainder, ord)?;
                if initials.iter().any(|m| divides(m, &e)) {
                    continue;
                }
                new_elem = Some(r.remainder);
                break 'pairs;
            }
        }
        match new_elem {
            None => break,
            Some(p) => {
                basis.push(p);
                basis = inter_reduce(&basis, ord, opts)?;
                budget -= 1;
                if budget == 0 {
                    break;
                }
            }
        }
    }
    Ok(basis)
}

/// Staircase of the ideal generated by `gens` (after completion).
pub fn diagram(gens: &[LocalPoly], ord: &MonomialOrder) -> Result<ExponentDiagram> {
    let basis = complete_basis(gens, ord, &DivideOpts::default())?;
    let initials: Vec<Exp> = basis
        .iter()
        .map(|a| initial_exponent(a, ord))
        .collect::<Result<_>>()?;
    Ok(ExponentDiagram::from_initials(initials, ord))
}

/// Ideal membership through division against the completed basis.
pub fn member(f: &LocalPoly, gens: &[LocalPoly], ord: &MonomialOrder) -> Result<bool> {
    if f.is_zero() {
        return Ok(true);
    }
    let basis = complete_basis(gens, ord, &DivideOpts::default())?;
    if basis.is_empty() {
        return Ok(false);
    }
    let r = divide(f, &basis, ord, &DivideOpts::default())?;
    if r.truncated_at.is_some() {
        return Err(Error::PrecisionExhausted(0));
    }
    Ok(r.remainder.is_zero())
}

/// Two-sided membership of generators.
pub fn ideals_equal(a: &[LocalPoly], b: &[LocalPoly], ord: &MonomialOrder) -> Result<bool> {
    for g in a {
        if !member(g, b, ord)? {
            return Ok(false);
        }
    }
    for g in b {
        if !member(g, a, ord)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stationarity {
    Index(usize),
    NotStabilized,
}

/// Least `n` with `ideal_n = ... = ideal_{n+window}` in an increasing chain
/// of ideals (each given by generators). Monotonicity is asserted.
pub fn chain_stationarity(
    chain: &[Vec<LocalPoly>],
    ord: &MonomialOrder,
    window: usize,
) -> Result<Stationarity> {
    for n in 0..chain.len().saturating_sub(1) {
        for g in &chain[n] {
            if !member(g, &chain[n + 1], ord)? {
                return Err(Error::Monotonicity(format!(
                    "chain not increasing at step {}",
                    n
                )));
            }
        }
    }
    'outer: for n in 0..chain.len() {
        for k in 1..=window {
            if n + k >= chain.len() {
                // ran out of evidence before confirming the window
                continue 'outer;
            }
            if !ideals_equal(&chain[n], &chain[n + k], ord)? {
                continue 'outer;
            }
        }
        return Ok(Stationarity::Index(n));
    }
    Ok(Stationarity::NotStabilized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(n: i64) -> RatFn {
        RatFn::from_i64(n)
    }

    fn poly(terms: &[(&[u32], i64)]) -> LocalPoly {
        let mut p = LocalPoly::zero();
        for (m, k) in terms {
            p.push(m.to_vec(), c(*k));
        }
        p
    }

    #[test]
    fn initial_exponent_examples() {
        let ord = MonomialOrder::total_degree(2);
        // tie at L=3 broken by m_1: (1,2) < (3,0)
        let f = poly(&[(&[1, 2], 1), (&[3, 0], 1)]);
        assert_eq!(initial_exponent(&f, &ord).unwrap(), vec![1, 2]);
        let g = poly(&[(&[0, 0], 1), (&[1, 0], 1)]);
        assert_eq!(initial_exponent(&g, &ord).unwrap(), vec![0, 0]);
        let h = poly(&[(&[0, 5], 1)]);
        assert_eq!(initial_exponent(&h, &ord).unwrap(), vec![0, 5]);
        assert!(initial_exponent(&LocalPoly::zero(), &ord).is_err());
    }

    #[test]
    fn diagram_monomial_cases() {
        let ord = MonomialOrder::total_degree(2);
        let d = diagram(&[poly(&[(&[2, 0], 1)])], &ord).unwrap();
        assert_eq!(d.corners, vec![vec![2, 0]]);
        assert_eq!(d.cell(&vec![0, 7]), None);
        assert_eq!(d.cell(&vec![1, 3]), None);
        assert_eq!(d.cell(&vec![2, 1]), Some(0));

        let d2 = diagram(&[poly(&[(&[1, 0], 1)]), poly(&[(&[0, 1], 1)])], &ord).unwrap();
        assert_eq!(d2.corners.len(), 2);
        assert_eq!(d2.cell(&vec![0, 0]), None);
    }

    #[test]
    fn completion_finds_hidden_corner() {
        // (a1^2 + a2^3, a1 a2): the S-polynomial chain exposes a2^4
        let ord = MonomialOrder::total_degree(2);
        let g1 = poly(&[(&[2, 0], 1), (&[0, 3], 1)]);
        let g2 = poly(&[(&[1, 1], 1)]);
        let d = diagram(&[g1.clone(), g2.clone()], &ord).unwrap();
        let mut corners = d.corners.clone();
        corners.sort();
        assert_eq!(corners, vec![vec![0, 4], vec![1, 1], vec![2, 0]]);
        assert!(member(&poly(&[(&[0, 4], 1)]), &[g1, g2], &ord).unwrap());
    }

    #[test]
    fn divide_examples() {
        let ord = MonomialOrder::total_degree(2);
        let f = poly(&[(&[2, 0], 1)]);
        let basis = vec![poly(&[(&[1, 0], 1)])];
        let r = divide(&f, &basis, &ord, &DivideOpts::default()).unwrap();
        assert_eq!(r.quotients[0], poly(&[(&[1, 0], 1)]));
        assert!(r.remainder.is_zero());

        let f2 = poly(&[(&[1, 0], 1), (&[0, 1], 1)]);
        let basis2 = vec![poly(&[(&[2, 0], 1)])];
        let r2 = divide(&f2, &basis2, &ord, &DivideOpts::default()).unwrap();
        assert!(r2.quotients[0].is_zero());
        assert_eq!(r2.remainder, f2);
    }

    #[test]
    fn truncated_mode_reports_precision() {
        // dividing a1 by (a1 - a1^2) never terminates exactly
        let ord = MonomialOrder::total_degree(1);
        let f = poly(&[(&[1], 1)]);
        let basis = vec![poly(&[(&[1], 1), (&[2], -1)])];
        let opts = DivideOpts {
            precision: Some(Q::from_integer(10.into())),
            step_budget: 100_000,
        };
        let r = divide(&f, &basis, &ord, &opts).unwrap();
        assert_eq!(r.truncated_at, Some(Q::from_integer(10.into())));
        assert!(r.remainder.is_zero());
        // and exact mode trips the step budget
        let tight = DivideOpts {
            precision: None,
            step_budget: 50,
        };
        assert!(divide(&f, &basis, &ord, &tight).is_err());
    }

    #[test]
    fn chain_stationarity_examples() {
        let ord = MonomialOrder::total_degree(2);
        let a1 = || vec![poly(&[(&[1, 0], 1)])];
        let a1sq = || vec![poly(&[(&[2, 0], 1)])];
        assert_eq!(
            chain_stationarity(&[a1(), a1(), a1(), a1(), a1()], &ord, 3).unwrap(),
            Stationarity::Index(0)
        );
        assert_eq!(
            chain_stationarity(&[a1sq(), a1(), a1(), a1(), a1()], &ord, 3).unwrap(),
            Stationarity::Index(1)
        );
        // decreasing chain is rejected
        assert!(chain_stationarity(&[a1(), a1sq()], &ord, 1).is_err());
    }

    fn exp_strategy(q: usize, max: u32) -> impl Strategy<Value = Exp> {
        proptest::collection::vec(0..=max, q)
    }

    fn brute_force_member(f: &LocalPoly, monos: &[Exp]) -> bool {
        // monomial-ideal membership: every support element divisible
        f.terms
            .keys()
            .all(|m| monos.iter().any(|g| divides(g, m)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn division_identity_and_supports(
            fterms in proptest::collection::vec((exp_strategy(3, 5), -6i64..7), 1..6),
            gexps in proptest::collection::vec(exp_strategy(3, 4), 1..4),
        ) {
            let ord = MonomialOrder::total_degree(3);
            let mut f = LocalPoly::zero();
            for (m, k) in fterms { f.push(m, c(k)); }
            let basis: Vec<LocalPoly> = gexps.iter()
                .map(|m| LocalPoly::monomial(m.clone(), c(1)))
                .collect();
            let r = divide(&f, &basis, &ord, &DivideOpts::default()).unwrap();
            prop_assert!(r.truncated_at.is_none());
            // identity
            let mut recon = r.remainder.clone();
            for (qi, ai) in r.quotients.iter().zip(&basis) {
                for (m, cc) in &qi.terms {
                    recon = recon.add(&ai.shift(m, cc));
                }
            }
            prop_assert_eq!(recon, f.clone());
            // support law against the generator staircase (first-match cells)
            let initials: Vec<Exp> = basis.iter()
                .map(|a| initial_exponent(a, &ord).unwrap()).collect();
            for (i, qi) in r.quotients.iter().enumerate() {
                for m in qi.terms.keys() {
                    let shifted: Exp = m.iter().zip(&initials[i]).map(|(a,b)| a+b).collect();
                    let first = initials.iter().position(|e| divides(e, &shifted));
                    prop_assert_eq!(first, Some(i));
                }
            }
            for m in r.remainder.terms.keys() {
                prop_assert!(initials.iter().all(|e| !divides(e, m)));
            }
            // idempotence
            let r2 = divide(&r.remainder, &basis, &ord, &DivideOpts::default()).unwrap();
            prop_assert!(r2.quotients.iter().all(|q| q.is_zero()));
            prop_assert_eq!(r2.remainder, r.remainder.clone());
            // membership agrees with brute-force divisibility
            let is_member = member(&f, &basis, &ord).unwrap();
            prop_assert_eq!(is_member, brute_force_member(&f, &gexps));
        }

        #[test]
        fn products_are_members(
            gexps in proptest::collection::vec(exp_strategy(2, 3), 1..4),
            picks in proptest::collection::vec((0usize..4, exp_strategy(2, 3), 1i64..5), 1..4),
        ) {
            let ord = MonomialOrder::total_degree(2);
            let basis: Vec<LocalPoly> = gexps.iter()
                .map(|m| LocalPoly::monomial(m.clone(), c(1)))
                .collect();
            let mut f = LocalPoly::zero();
            for (i, m, k) in picks {
                let g = &basis[i % basis.len()];
                f = f.add(&g.shift(&m, &c(k)));
            }
            prop_assert!(member(&f, &basis, &ord).unwrap());
        }
    }
}
