//! The chi-homogeneous block calculus: derivation action on monomial
//! blocks, Euler operators and their kernels, Wronskians of monomial
//! families, transverse (coefficient) ideals, and algebraic multiplicity.
//!
//! Variables: `x` together with compensator slots `z_1..z_q1` (ratios
//! `r_j = 1 + mu_j`) and resonant slots `u_1..u_ell` (exponents `s_j`).
//! The derivation is `chi = x d/dx - sum_j s_j u_j d/du_j`, under which
//! `chi x = x`, `chi z_j = r_j z_j + x`, `chi u_j = -s_j u_j`.

use crate::division::{
    self, chain_stationarity, LocalPoly, MonomialOrder, Stationarity,
};
use crate::error::Error;
use crate::logexp::LogExpSum;
use crate::mpoly::{q_to_f64, MPoly, Q};
use crate::ratfn::RatFn;
use crate::symbol::Sym;
use crate::Result;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// The derivation data: `q1` compensator slots and the exponent list `s`.
/// `alpha` names the analytic parameters that transverse ideals treat as
/// polynomial variables (everything else stays in the coefficient field).
#[derive(Clone, Debug)]
pub struct ChiDerivation {
    pub q1: usize,
    pub s: Vec<RatFn>,
    pub alpha: Vec<Sym>,
}

pub fn mu_sym(j: usize) -> Sym {
    Sym::new(&format!("mu{}", j))
}

pub fn lam_sym(j: usize) -> Sym {
    Sym::new(&format!("lam{}", j))
}

impl ChiDerivation {
    /// Standard setup: `s_j = 1 + mu'_j` with fresh residue symbols.
    pub fn new(q1: usize, ell: usize) -> ChiDerivation {
        let s = (1..=ell)
            .map(|j| RatFn::one().add(&RatFn::var(Sym::new(&format!("nu{}", j)))))
            .collect();
        ChiDerivation {
            q1,
            s,
            alpha: Vec::new(),
        }
    }

    pub fn with_s(q1: usize, s: Vec<RatFn>) -> ChiDerivation {
        ChiDerivation {
            q1,
            s,
            alpha: Vec::new(),
        }
    }

    pub fn ell(&self) -> usize {
        self.s.len()
    }

    /// Ratio of the `i`-th X-slot: `r_0 = 1` (the x slot), `r_j = 1+mu_j`.
    pub fn r(&self, i: usize) -> RatFn {
        if i == 0 {
            RatFn::one()
        } else {
            RatFn::one().add(&RatFn::var(mu_sym(i)))
        }
    }

    /// Eigenvalue `e_{m,n} = <m,r> - <n,s>`.
    pub fn eigenvalue(&self, m: &[u32], n: &[u32]) -> RatFn {
        let mut e = RatFn::zero();
        for (i, &mi) in m.iter().enumerate() {
            if mi > 0 {
                e = e.add(&self.r(i).scale_q(&Q::from_integer(mi.into())));
            }
        }
        for (j, &nj) in n.iter().enumerate() {
            if nj > 0 {
                e = e.sub(&self.s[j].scale_q(&Q::from_integer(nj.into())));
            }
        }
        e
    }

    /// The ideal variables of transverse ideals: alphas then lambdas.
    pub fn ideal_vars(&self) -> Vec<Sym> {
        let mut v = self.alpha.clone();
        for j in 1..=self.ell() {
            v.push(lam_sym(j));
        }
        v
    }
}

/// A chi-homogeneous block of degree `|m| - |n|`: monomials `X^m u^n`
/// (with `X = (x, z_1..z_q1)`) and coefficients in the exact field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChiBlock {
    pub degree: i64,
    pub terms: BTreeMap<(Vec<u32>, Vec<u32>), RatFn>,
}

fn abs_deg(v: &[u32]) -> i64 {
    v.iter().map(|&e| e as i64).sum()
}

impl ChiBlock {
    pub fn new(degree: i64) -> ChiBlock {
        ChiBlock {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, m: Vec<u32>, n: Vec<u32>, c: RatFn) {
        if c.is_zero() {
            return;
        }
        assert_eq!(
            abs_deg(&m) - abs_deg(&n),
            self.degree,
            "monomial degree must match the block degree"
        );
        match self.terms.entry((m, n)) {
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

    pub fn add(&self, other: &ChiBlock) -> ChiBlock {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for ((m, n), c) in &other.terms {
            out.push(m.clone(), n.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &RatFn) -> ChiBlock {
        let mut out = ChiBlock::new(self.degree);
        for ((m, n), c0) in &self.terms {
            out.push(m.clone(), n.clone(), c0.mul(c));
        }
        out
    }
}

/// Apply the derivation to a block: `X^m u^n` maps to
/// `e_{m,n} X^m u^n + sum_j m_j x X^(m - delta_j) u^n` (z-slot rule).
pub fn chi_apply(d: &ChiDerivation, b: &ChiBlock) -> ChiBlock {
    let mut out = ChiBlock::new(b.degree);
    for ((m, n), c) in &b.terms {
        let e = d.eigenvalue(m, n);
        out.push(m.clone(), n.clone(), c.mul(&e));
        for j in 1..m.len() {
            if m[j] > 0 {
                let mut m2 = m.clone();
                m2[j] -= 1;
                m2[0] += 1;
                out.push(m2, n.clone(), c.scale_q(&Q::from_integer(m[j].into())));
            }
        }
    }
    out
}

/// `E_F = prod_{(m,n) in F} (chi - e_{m,n} Id)` applied to `b`.
pub fn euler_operator(
    d: &ChiDerivation,
    family: &[(Vec<u32>, Vec<u32>)],
    b: &ChiBlock,
) -> ChiBlock {
    let mut cur = b.clone();
    for (m, n) in family {
        let e = d.eigenvalue(m, n);
        cur = chi_apply(d, &cur).add(&cur.scale(&e.neg()));
    }
    cur
}

/// All bi-indices `(m, n)` of degree exactly `p` with `|m| <= mmax`.
pub fn family_of_degree(d: &ChiDerivation, p: i64, mmax: u32) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut out = Vec::new();
    for total_m in 0..=mmax {
        let total_n = total_m as i64 - p;
        if total_n < 0 {
            continue;
        }
        for m in compositions(total_m, d.q1 + 1) {
            for n in compositions(total_n as u32, d.ell()) {
                out.push((m.clone(), n));
            }
        }
    }
    out
}

/// All length-`k` vectors of nonnegative integers summing to `t`.
fn compositions(t: u32, k: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return if t == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    fn rec(rem: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for v in 0..=rem {
            cur.push(v);
            rec(rem - v, slots - 1, cur, out);
            cur.pop();
        }
    }
    rec(t, k, &mut Vec::new(), &mut out);
    out
}

/// Split a mixed sum of monomials into its chi-homogeneous parts,
/// ordered by degree. Reassembling the parts reproduces the input.
pub fn fewnomial_split(
    terms: &[(Vec<u32>, Vec<u32>, RatFn)],
) -> Vec<ChiBlock> {
    let mut by_degree: BTreeMap<i64, ChiBlock> = BTreeMap::new();
    for (m, n, c) in terms {
        if c.is_zero() {
            continue;
        }
        let p = abs_deg(m) - abs_deg(n);
        by_degree
            .entry(p)
            .or_insert_with(|| ChiBlock::new(p))
            .push(m.clone(), n.clone(), c.clone());
    }
    by_degree.into_values().filter(|b| !b.is_zero()).collect()
}

// ---------------------------------------------------------------------------
// Wronskian of the degree-n monomial family (ell = 0)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct Wronskian {
    /// `Delta_n` as a single-term log-exp sum `b_n x^{s_n}`.
    pub determinant: LogExpSum,
    pub b_n: RatFn,
    pub s_n: RatFn,
    /// `N(n)`: the family size.
    pub dimension: usize,
}

/// Multi-indices `|m| = n` over `(x, z_1..z_q1)`, ordered by increasing
/// z-weight (so the change of basis below is triangular).
fn enumerate_family(q1: usize, n: u32) -> Vec<Vec<u32>> {
    let mut fam = compositions(n, q1 + 1);
    fam.sort_by_key(|m| (n - m[0], m[1..].to_vec()));
    fam
}

fn binom(n: u32, k: u32) -> Q {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    Q::new(num, den)
}

/// Expansion of `X^m` over the exponent basis: map from `m'` to the
/// coefficient of `x^{e_{m'}}`, using `z_j = (x^{r_j} - x)/mu_j`.
fn exponent_expansion(m: &[u32]) -> BTreeMap<Vec<u32>, RatFn> {
    let q1 = m.len() - 1;
    let mut acc: BTreeMap<Vec<u32>, RatFn> = BTreeMap::new();
    acc.insert(
        {
            let mut v = vec![0u32; q1 + 1];
            v[0] = m[0];
            v
        },
        RatFn::one(),
    );
    for j in 1..=q1 {
        if m[j] == 0 {
            continue;
        }
        let mu = RatFn::var(mu_sym(j));
        let mut next: BTreeMap<Vec<u32>, RatFn> = BTreeMap::new();
        for (key, coeff) in &acc {
            for a in 0..=m[j] {
                let mut sign = binom(m[j], a);
                if (m[j] - a) % 2 == 1 {
                    sign = -sign;
                }
                let c = coeff.scale_q(&sign).div(&mu.pow(m[j]));
                let mut k2 = key.clone();
                k2[j] += a;
                k2[0] += m[j] - a;
                match next.entry(k2) {
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
        }
        acc = next;
    }
    acc
}

/// Exact determinant of a rational matrix by Gaussian elimination.
fn det_q(mut m: Vec<Vec<Q>>) -> Q {
    let n = m.len();
    let mut det = Q::one();
    for col in 0..n {
        let pivot = (col..n).find(|&row| !m[row][col].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => return Q::zero(),
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= pv.clone();
        for row in (col + 1)..n {
            if m[row][col].is_zero() {
                continue;
            }
            let f = &m[row][col] / &pv;
            for k in col..n {
                let sub = &f * &m[col][k];
                m[row][k] -= sub;
            }
        }
    }
    det
}

fn q_pow(base: &Q, e: i64) -> Q {
    let mut out = Q::one();
    for _ in 0..e.unsigned_abs() {
        out *= base;
    }
    if e < 0 {
        Q::one() / out
    } else {
        out
    }
}

/// `Delta_n = det (chi^j X^m)_{j,m}` for the degree-`n` family, computed
/// through the exact factorization into a Vandermonde in the eigenvalues
/// times the triangular change of basis, then cross-checked numerically.
pub fn wronskian(d: &ChiDerivation, n: u32) -> Result<Wronskian> {
    if d.ell() != 0 {
        return Err(Error::Input("wronskian requires ell = 0".into()));
    }
    let fam = enumerate_family(d.q1, n);
    let big_n = fam.len();
    if big_n > 70 {
        return Err(Error::Input(format!(
            "family size {} exceeds the guard (70)",
            big_n
        )));
    }
    let exps: Vec<RatFn> = fam.iter().map(|m| d.eigenvalue(m, &[])).collect();

    // change of basis U: column m of the matrix expands over x^{e_{m'}}
    let expansions: Vec<BTreeMap<Vec<u32>, RatFn>> =
        fam.iter().map(|m| exponent_expansion(m)).collect();

    // verify the expansion against an independent product of log-exp sums
    for (m, expansion) in fam.iter().zip(&expansions) {
        let mut prod = LogExpSum::term(RatFn::zero(), 0, RatFn::one());
        let x = LogExpSum::term(RatFn::one(), 0, RatFn::one());
        for _ in 0..m[0] {
            prod = prod.mul(&x);
        }
        for j in 1..=d.q1 {
            let mu = RatFn::var(mu_sym(j));
            let mut zj = LogExpSum::term(d.r(j), 0, mu.inv());
            zj.push(RatFn::one(), 0, mu.inv().neg());
            for _ in 0..m[j] {
                prod = prod.mul(&zj);
            }
        }
        let mut from_u = LogExpSum::zero();
        for (mp, c) in expansion {
            from_u.push(d.eigenvalue(mp, &[]), 0, c.clone());
        }
        if prod != from_u {
            return Err(Error::Internal(
                "exponent-basis expansion mismatch".into(),
            ));
        }
        // triangularity: no contribution from strictly later family members
        let pos = fam.iter().position(|f| f == m).unwrap();
        for mp in expansion.keys() {
            let pp = fam.iter().position(|f| f == mp).unwrap();
            if pp > pos {
                return Err(Error::Internal(
                    "change of basis is not triangular".into(),
                ));
            }
        }
    }

    // det U = prod of the diagonal = prod_m prod_j mu_j^{-m_j}
    let mut det_u = RatFn::one();
    for m in &fam {
        for j in 1..=d.q1 {
            if m[j] > 0 {
                det_u = det_u.div(&RatFn::var(mu_sym(j)).pow(m[j]));
            }
        }
    }
    // det W = prod_m x^{e_m} * Vandermonde(e) (columns ordered like fam)
    let mut vdm = RatFn::one();
    for i in 0..big_n {
        for j in (i + 1)..big_n {
            vdm = vdm.mul(&exps[j].sub(&exps[i]));
        }
    }
    let b_n = vdm.mul(&det_u);
    let mut s_n = RatFn::zero();
    for e in &exps {
        s_n = s_n.add(e);
    }
    let determinant = LogExpSum::term(s_n.clone(), 0, b_n.clone());

    // s_n(0) = n * N(n)
    let zero_assign: BTreeMap<Sym, Q> =
        (1..=d.q1).map(|j| (mu_sym(j), Q::zero())).collect();
    let s0 = s_n
        .eval(&zero_assign)
        .ok_or_else(|| Error::Internal("s_n not evaluable at mu = 0".into()))?;
    if s0 != Q::from_integer(BigInt::from(n as i64 * big_n as i64)) {
        return Err(Error::Internal("s_n(0) != n N(n)".into()));
    }

    // independent cross-check: exact determinant of the x = 1 matrix at
    // rational mu samples must equal b_n there (it asserts b_n = Delta_n(1))
    for sample in 1..3u32 {
        let assign: BTreeMap<Sym, Q> = (1..=d.q1)
            .map(|j| {
                (
                    mu_sym(j),
                    Q::new(BigInt::from(2 * j as i64 + sample as i64), BigInt::from(7 + 4 * sample as i64)),
                )
            })
            .collect();
        let evals: Vec<Q> = exps
            .iter()
            .map(|e| e.eval(&assign).unwrap())
            .collect();
        let mut mat = vec![vec![Q::zero(); big_n]; big_n];
        for (col, expansion) in expansions.iter().enumerate() {
            for (mp, c) in expansion {
                let idx = fam.iter().position(|f| f == mp).unwrap();
                let cv = c.eval(&assign).unwrap();
                let mut p = Q::one();
                for row in 0..big_n {
                    mat[row][col] += &cv * &p;
                    p *= &evals[idx];
                }
            }
        }
        let det1 = det_q(mat);
        let bval = b_n.eval(&assign).unwrap();
        if det1 != bval {
            return Err(Error::Internal(
                "determinant at x=1 disagrees with b_n".into(),
            ));
        }
        // float check of the full Delta_n(x) = b_n x^{s_n} at an x sample;
        // only for small families: beyond that the determinant lies below
        // the f64 cancellation floor of the entries
        if big_n > 6 {
            continue;
        }
        let x = 0.37f64;
        let assignf: BTreeMap<Sym, f64> = assign
            .iter()
            .map(|(k, v)| (*k, q_to_f64(v)))
            .collect();
        let mut matf = vec![vec![0f64; big_n]; big_n];
        for (col, expansion) in expansions.iter().enumerate() {
            for (mp, c) in expansion {
                let idx = fam.iter().position(|f| f == mp).unwrap();
                let cv = c.eval_f64(&assignf).unwrap();
                let ev = q_to_f64(&evals[idx]);
                let xe = x.powf(ev);
                let mut p = 1.0;
                for row in 0..big_n {
                    matf[row][col] += cv * p * xe;
                    p *= ev;
                }
            }
        }
        let detf = det_f64(matf);
        let want = q_to_f64(&bval) * x.powf(q_to_f64(&s_n.eval(&assign).unwrap()));
        // smoke check only: the clustered eigenvalues make the float
        // determinant ill-conditioned, the exact checks above carry the load
        let scale = want.abs().max(1e-300);
        if ((detf - want) / scale).abs() > 1e-2 {
            return Err(Error::Internal(format!(
                "numeric determinant cross-check failed: {} vs {}",
                detf, want
            )));
        }
    }

    Ok(Wronskian {
        determinant,
        b_n,
        s_n,
        dimension: big_n,
    })
}

fn det_f64(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let (pivot, _) = m
            .iter()
            .enumerate()
            .skip(col)
            .map(|(i, row)| (i, row[col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let pv = m[col][col];
        det *= pv;
        for row in (col + 1)..n {
            let f = m[row][col] / pv;
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

// ---------------------------------------------------------------------------
// General chi-functions: sums of c * x^e (log x)^k u^n
// ---------------------------------------------------------------------------

/// A finite sum of terms `c * x^e * (log x)^k * u^n` with symbolic
/// exponents; closed under the derivation (z-slots get expanded into
/// their x-power form on conversion from blocks).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChiSum {
    pub terms: BTreeMap<(RatFn, u32, Vec<u32>), RatFn>,
}

impl ChiSum {
    pub fn zero() -> ChiSum {
        ChiSum {
            terms: BTreeMap::new(),
        }
    }

    pub fn term(e: RatFn, k: u32, n: Vec<u32>, c: RatFn) -> ChiSum {
        let mut s = ChiSum::zero();
        s.push(e, k, n, c);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, e: RatFn, k: u32, n: Vec<u32>, c: RatFn) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry((e, k, n)) {
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

    pub fn add(&self, other: &ChiSum) -> ChiSum {
        let mut out = self.clone();
        for ((e, k, n), c) in &other.terms {
            out.push(e.clone(), *k, n.clone(), c.clone());
        }
        out
    }

    /// Multiply by `x^a`.
    pub fn mul_xpow(&self, a: &RatFn) -> ChiSum {
        let mut out = ChiSum::zero();
        for ((e, k, n), c) in &self.terms {
            out.push(e.add(a), *k, n.clone(), c.clone());
        }
        out
    }

    /// Apply the derivation:
    /// `x^e log^k u^n -> (e - <n,s>) x^e log^k u^n + k x^e log^(k-1) u^n`.
    pub fn chi_apply(&self, d: &ChiDerivation) -> ChiSum {
        let mut out = ChiSum::zero();
        for ((e, k, n), c) in &self.terms {
            let mut rate = e.clone();
            for (j, &nj) in n.iter().enumerate() {
                if nj > 0 {
                    rate = rate.sub(&d.s[j].scale_q(&Q::from_integer(nj.into())));
                }
            }
            out.push(e.clone(), *k, n.clone(), c.mul(&rate));
            if *k > 0 {
                out.push(
                    e.clone(),
                    k - 1,
                    n.clone(),
                    c.scale_q(&Q::from_integer((*k).into())),
                );
            }
        }
        out
    }

    /// Expand a block into exponent form (z-slots become compensators).
    pub fn from_block(d: &ChiDerivation, b: &ChiBlock) -> ChiSum {
        let mut out = ChiSum::zero();
        for ((m, n), c) in &b.terms {
            for (mp, cc) in exponent_expansion(m) {
                out.push(d.eigenvalue(&mp, &[]), 0, n.clone(), c.mul(&cc));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Transverse ideals
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TransverseIdeal {
    pub vars: Vec<Sym>,
    pub generators: Vec<LocalPoly>,
}

impl TransverseIdeal {
    pub fn order(&self) -> MonomialOrder {
        MonomialOrder::total_degree(self.vars.len())
    }

    pub fn is_zero(&self) -> bool {
        self.generators.iter().all(|g| g.is_zero())
    }

    pub fn member(&self, p: &LocalPoly) -> Result<bool> {
        if p.is_zero() {
            return Ok(true);
        }
        if self.generators.is_empty() {
            return Ok(false);
        }
        division::member(p, &self.generators, &self.order())
    }

    pub fn equals(&self, other: &TransverseIdeal) -> Result<bool> {
        division::ideals_equal(&self.generators, &other.generators, &self.order())
    }
}

/// Decompose an exponent into `q0 + sum q_v * v`; errors when the exponent
/// is not an affine polynomial in the symbols.
fn affine_parts(e: &RatFn) -> Result<(Q, BTreeMap<Sym, Q>)> {
    let den = e
        .den
        .as_constant()
        .ok_or_else(|| Error::Domain("exponent has a symbolic denominator".into()))?;
    let mut q0 = Q::zero();
    let mut lin = BTreeMap::new();
    for (mono, c) in &e.num.terms {
        let cv = c / &den;
        match mono.len() {
            0 => q0 = cv,
            1 if mono[0].1 == 1 => {
                lin.insert(mono[0].0, cv);
            }
            _ => {
                return Err(Error::Domain(
                    "exponent is not affine in the residue symbols".into(),
                ))
            }
        }
    }
    Ok((q0, lin))
}

fn sanitize(q: &Q) -> String {
    format!("{}_{}", q.numer(), q.denom()).replace('-', "m")
}

/// Restriction of `f` to `{x = x0}` with `u_j = lam_j / x0^{s_j}`: a
/// polynomial in the ideal variables. Transcendental unit factors
/// (`x0^{mu}`, fractional powers of `x0`, `log x0`) are carried as formal
/// field symbols — they are invertible, so they never change the ideal.
pub fn restrict(d: &ChiDerivation, f: &ChiSum, x0: &Q) -> Result<LocalPoly> {
    assert!(x0 > &Q::zero(), "restriction point must be positive");
    let vars = d.ideal_vars();
    let at_one = x0.is_one();
    let log_sym = Sym::new(&format!("log_x0_{}", sanitize(x0)));

    // common denominators of the exponent data, for integer unit powers
    let mut den0 = BigInt::one();
    let mut denv: BTreeMap<Sym, BigInt> = BTreeMap::new();
    let mut parts = Vec::new();
    for ((e, k, n), c) in &f.terms {
        let mut full = e.clone();
        for (j, &nj) in n.iter().enumerate() {
            if nj > 0 {
                full = full.sub(&d.s[j].scale_q(&Q::from_integer(nj.into())));
            }
        }
        let (q0, lin) = affine_parts(&full)?;
        den0 = den0.lcm(q0.denom());
        for (v, qv) in &lin {
            let dd = denv.entry(*v).or_insert_with(BigInt::one);
            *dd = dd.lcm(qv.denom());
        }
        parts.push((q0, lin, *k, n.clone(), c.clone()));
    }

    let mut out = LocalPoly::zero();
    for (q0, lin, k, n, c) in parts {
        if at_one && k > 0 {
            continue; // log(1) = 0
        }
        let mut coeff = c;
        if !at_one {
            if k > 0 {
                coeff = coeff.mul(&RatFn::var(log_sym).pow(k));
            }
            // x0^{q0}: exact rational when q0 is an integer relative to
            // den0 = 1, else an integer power of the formal den0-th root
            if den0.is_one() {
                let p = q0.to_integer().to_i64().ok_or_else(|| {
                    Error::Domain("exponent too large to restrict".into())
                })?;
                coeff = coeff.scale_q(&q_pow(x0, p));
            } else {
                let root = Sym::new(&format!("x0rt_{}_{}", sanitize(x0), den0));
                let p = (q0 * Q::from_integer(den0.clone()))
                    .to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::Domain("exponent too large".into()))?;
                coeff = mul_sym_pow(&coeff, root, p);
            }
            for (v, qv) in &lin {
                let dv = &denv[v];
                let t = Sym::new(&format!(
                    "pw_x0_{}_{}_{}",
                    sanitize(x0),
                    v.name(),
                    dv
                ));
                let p = (qv * Q::from_integer(dv.clone()))
                    .to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::Domain("exponent too large".into()))?;
                coeff = mul_sym_pow(&coeff, t, p);
            }
        }
        // lambda part of the monomial
        let mut expv = vec![0u32; vars.len()];
        let base = d.alpha.len();
        for (j, &nj) in n.iter().enumerate() {
            expv[base + j] = nj;
        }
        // alpha part comes from the coefficient polynomial
        for (aexp, ac) in split_by_vars(&coeff, &d.alpha)? {
            let mut e2 = expv.clone();
            for (i, a) in aexp.iter().enumerate() {
                e2[i] += a;
            }
            out.push(e2, ac);
        }
    }
    Ok(out)
}

fn mul_sym_pow(c: &RatFn, v: Sym, p: i64) -> RatFn {
    if p == 0 {
        return c.clone();
    }
    let f = RatFn::var(v).pow(p.unsigned_abs() as u32);
    if p > 0 {
        c.mul(&f)
    } else {
        c.div(&f)
    }
}

/// Split a coefficient into monomials over the designated variables; the
/// denominator must be free of them.
fn split_by_vars(c: &RatFn, vars: &[Sym]) -> Result<Vec<(Vec<u32>, RatFn)>> {
    if vars.iter().any(|v| c.den.vars().contains(v)) {
        return Err(Error::Domain(
            "coefficient denominator contains ideal variables".into(),
        ));
    }
    let mut groups: BTreeMap<Vec<u32>, MPoly> = BTreeMap::new();
    for (mono, k) in &c.num.terms {
        let mut expv = vec![0u32; vars.len()];
        let mut rest: Vec<(Sym, u32)> = Vec::new();
        for &(v, e) in mono {
            if let Some(i) = vars.iter().position(|w| *w == v) {
                expv[i] = e;
            } else {
                rest.push((v, e));
            }
        }
        let entry = groups.entry(expv).or_insert_with(MPoly::zero);
        let mut t = MPoly::zero();
        t.terms.insert(rest, k.clone());
        *entry = entry.add(&t);
    }
    Ok(groups
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|(e, p)| (e, RatFn::new(p, c.den.clone())))
        .collect())
}

/// Generators = restrictions of `f, chi f, chi^2 f, ...` until two
/// consecutive restrictions are already members (stabilization), or the
/// derivative budget runs out.
pub fn transverse_ideal(
    d: &ChiDerivation,
    f: &ChiSum,
    x0: &Q,
    max_derivatives: usize,
) -> Result<TransverseIdeal> {
    let vars = d.ideal_vars();
    let ord = MonomialOrder::total_degree(vars.len());
    let mut gens: Vec<LocalPoly> = Vec::new();
    let mut g = f.clone();
    let mut consecutive = 0usize;
    for _j in 0..=max_derivatives {
        let r = restrict(d, &g, x0)?;
        let already = if r.is_zero() {
            true
        } else if gens.is_empty() {
            false
        } else {
            division::member(&r, &gens, &ord)?
        };
        if already {
            consecutive += 1;
            if consecutive >= 2 {
                return Ok(TransverseIdeal {
                    vars,
                    generators: gens,
                });
            }
        } else {
            gens.push(r);
            consecutive = 0;
        }
        g = g.chi_apply(d);
    }
    Err(Error::ChainNotStabilized(max_derivatives))
}

/// Stationarity index of the chain of transverse ideals of the partial
/// sums (the algebraic multiplicity), with the audited chain.
pub fn algebraic_multiplicity(
    d: &ChiDerivation,
    series: &[ChiSum],
    x0: &Q,
    n_max: usize,
) -> Result<(Stationarity, Vec<TransverseIdeal>)> {
    let vars = d.ideal_vars();
    let ord = MonomialOrder::total_degree(vars.len());
    let mut chain_ideals = Vec::new();
    let mut partial = ChiSum::zero();
    chain_ideals.push(TransverseIdeal {
        vars: vars.clone(),
        generators: Vec::new(),
    });
    for n in 1..=n_max {
        if let Some(block) = series.get(n - 1) {
            partial = partial.add(block);
        }
        chain_ideals.push(transverse_ideal(d, &partial, x0, 64)?);
    }
    let gen_chain: Vec<Vec<LocalPoly>> = chain_ideals
        .iter()
        .map(|i| i.generators.clone())
        .collect();
    let st = chain_stationarity(&gen_chain, &ord, 3)?;
    Ok((st, chain_ideals))
}

/// Smallest `n >= 0` such that `x^n f` lies in the saturated monomial
/// ideal `(x^A u^B)`: termwise, the u-part must dominate `B` and the
/// x-order must exceed `A` (strictly when a log factor is present).
pub fn min_saturation_power(
    f: &ChiSum,
    a_pow: u32,
    u_pows: &[u32],
    limit: u32,
) -> Option<u32> {
    'n: for n in 0..=limit {
        for ((e, k, nu), _) in &f.terms {
            if nu.iter().zip(u_pows).any(|(a, b)| a < b) || nu.len() != u_pows.len() {
                continue 'n;
            }
            let ev = match e.as_q() {
                Some(v) => v,
                None => continue 'n,
            };
            let order = ev + Q::from_integer(n.into()) - Q::from_integer(a_pow.into());
            let ok = if *k > 0 {
                order > Q::zero()
            } else {
                order >= Q::zero()
            };
            if !ok {
                continue 'n;
            }
        }
        return Some(n);
    }
    None
}

/// The non-noetherian witness: the ideal chain of the truncations of
/// `sum_n alpha^n x^{1/n}`, encoded over the ramified lattice
/// `t = x^{1/lcm(1..n_max)}` as monomial ideals in `(alpha, t)`.
pub fn ramified_witness_chain(n_max: u32) -> (Vec<Vec<LocalPoly>>, MonomialOrder) {
    let mut l = BigInt::one();
    for n in 1..=n_max {
        l = l.lcm(&BigInt::from(n));
    }
    let l = l.to_u32().expect("ramification index fits in u32");
    let mut chain = Vec::new();
    let mut gens: Vec<LocalPoly> = Vec::new();
    chain.push(gens.clone());
    for n in 1..=n_max {
        gens.push(LocalPoly::monomial(vec![n, l / n], RatFn::one()));
        chain.push(gens.clone());
    }
    (chain, MonomialOrder::total_degree(2))
}

// ---------------------------------------------------------------------------
// Double inclusion (Wronskian/Cramer certificate)
// ---------------------------------------------------------------------------

/// Tiny deterministic generator for rational sample points.
pub struct SampleRng(u64);

impl SampleRng {
    pub fn new(seed: u64) -> SampleRng {
        SampleRng(seed.wrapping_add(0x9e3779b97f4a7c15))
    }

    pub fn next_u64(&mut self) -> u64 {
        // splitmix64
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Small nonzero rational in roughly (-1/2, 1/2).
    pub fn small_q(&mut self) -> Q {
        let num = (self.next_u64() % 39) as i64 - 19;
        let num = if num == 0 { 7 } else { num };
        let den = (self.next_u64() % 50) as i64 + 41;
        Q::new(BigInt::from(num), BigInt::from(den))
    }
}

#[derive(Clone, Debug)]
pub struct InclusionReport {
    pub samples_checked: usize,
    pub holds: bool,
    /// Max over samples of the smallest admissible epsilon `max_i e_i - p`.
    pub max_achieved_exponent: Q,
    pub resamples: usize,
}

/// Exact inverse of the Vandermonde-style matrix `V[j][i] = e_i^j`.
fn invert_vdm(evals: &[Q]) -> Option<Vec<Vec<Q>>> {
    let n = evals.len();
    let mut aug: Vec<Vec<Q>> = (0..n)
        .map(|j| {
            let mut row: Vec<Q> = evals.iter().map(|e| q_pow(e, j as i64)).collect();
            for i in 0..n {
                row.push(if i == j { Q::one() } else { Q::zero() });
            }
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(pivot, col);
        let pv = aug[col][col].clone();
        for k in 0..2 * n {
            aug[col][k] = &aug[col][k] / &pv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for k in 0..2 * n {
                    let sub = &f * &aug[col][k];
                    aug[r][k] -= sub;
                }
            }
        }
    }
    // K[i][j] = (V^{-1})[i][j]
    Some((0..n).map(|i| aug[i][n..].to_vec()).collect())
}

/// At random rational mu-points, certify the sandwich: for every exponent-
/// basis coefficient `v_i` of the degree-`p` block `g`, the multiplier row
/// of the inverse Vandermonde exhibits `x^{p+eps} v_i` inside the module
/// generated by `(chi^j g)_j`, with admissible (nonnegative-power)
/// multipliers. The identity is checked exactly.
pub fn double_inclusion_check(
    d: &ChiDerivation,
    g: &ChiBlock,
    eps: &Q,
    samples: usize,
    seed: u64,
) -> Result<InclusionReport> {
    if d.ell() != 0 {
        return Err(Error::Input(
            "double inclusion check requires ell = 0".into(),
        ));
    }
    if g.is_zero() {
        return Ok(InclusionReport {
            samples_checked: samples,
            holds: true,
            max_achieved_exponent: Q::zero(),
            resamples: 0,
        });
    }
    let p = Q::from_integer(g.degree.into());
    let fam: Vec<Vec<u32>> = g.terms.keys().map(|(m, _)| m.clone()).collect();
    // exponent-basis coefficients v_{m'} of g, symbolically in alpha
    let mut v: BTreeMap<Vec<u32>, RatFn> = BTreeMap::new();
    for ((m, _), c) in &g.terms {
        for (mp, cc) in exponent_expansion(m) {
            let entry = v.entry(mp).or_insert_with(RatFn::zero);
            *entry = entry.add(&c.mul(&cc));
        }
    }
    let _ = fam;
    let basis: Vec<(Vec<u32>, RatFn)> = v.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    let n = basis.len();
    let mut rng = SampleRng::new(seed);
    let mut resamples = 0usize;
    let mut max_eps = Q::zero();

    for _ in 0..samples {
        // draw a mu-point with pairwise distinct eigenvalues
        let mut tries = 0;
        let (assign, evals) = loop {
            let assign: BTreeMap<Sym, Q> =
                (1..=d.q1).map(|j| (mu_sym(j), rng.small_q())).collect();
            let evals: Vec<Q> = basis
                .iter()
                .map(|(mp, _)| d.eigenvalue(mp, &[]).eval(&assign).unwrap())
                .collect();
            let mut distinct = true;
            for i in 0..n {
                for j in (i + 1)..n {
                    if evals[i] == evals[j] {
                        distinct = false;
                    }
                }
            }
            if distinct {
                break (assign, evals);
            }
            resamples += 1;
            tries += 1;
            if tries > 10 {
                return Err(Error::Domain(
                    "could not find a sample with distinct eigenvalues".into(),
                ));
            }
        };
        let k = invert_vdm(&evals)
            .ok_or_else(|| Error::Internal("vandermonde inversion failed".into()))?;
        // admissibility and the achieved exponent
        let emax = evals.iter().max().unwrap().clone();
        let achieved = &emax - &p;
        if achieved > max_eps {
            max_eps = achieved.clone();
        }
        if &achieved > eps {
            return Ok(InclusionReport {
                samples_checked: samples,
                holds: false,
                max_achieved_exponent: max_eps,
                resamples,
            });
        }
        // exact identity: sum_j K[i][j] x^{p+eps-e_i} chi^j g == v_i x^{p+eps}
        let vals: Vec<RatFn> = basis
            .iter()
            .map(|(_, c)| c.eval_partial(&assign))
            .collect();
        let target_exp = &p + eps;
        for i in 0..n {
            let mut acc: BTreeMap<Q, RatFn> = BTreeMap::new();
            for ip in 0..n {
                // coefficient of x^{e_{ip} + p + eps - e_i}
                let mut kj = Q::zero();
                let mut pw = Q::one();
                for j in 0..n {
                    kj += &k[i][j] * &pw;
                    pw *= &evals[ip];
                }
                if kj.is_zero() {
                    continue;
                }
                let ex = &evals[ip] + &target_exp - &evals[i];
                let c = vals[ip].scale_q(&kj);
                let entry = acc.entry(ex).or_insert_with(RatFn::zero);
                *entry = entry.add(&c);
            }
            acc.retain(|_, c| !c.is_zero());
            let want_c = &vals[i];
            if want_c.is_zero() {
                if !acc.is_empty() {
                    return Err(Error::Internal("cramer identity failed".into()));
                }
                continue;
            }
            if acc.len() != 1 {
                return Err(Error::Internal("cramer identity failed".into()));
            }
            let (ex, c) = acc.iter().next().unwrap();
            if *ex != target_exp || c != want_c {
                return Err(Error::Internal("cramer identity failed".into()));
            }
        }
    }
    Ok(InclusionReport {
        samples_checked: samples,
        holds: true,
        max_achieved_exponent: max_eps,
        resamples,
    })
}

#[cfg(test)]
mod tests;
