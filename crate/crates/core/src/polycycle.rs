//! Hyperbolic polycycles: displacement maps through a chain of corner
//! transitions, limit-cycle counting by sign scan with bracketed refinement,
//! Rolle-partition bounds, and the exact quasi-spherical blow-up identities.

use crate::error::Error;
use crate::ratfn::RatFn;
use crate::symbol::Sym;
use crate::Result;
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Displacement and counting
// ---------------------------------------------------------------------------

/// Breaking parameter as an affine function of the family parameter `nu`.
#[derive(Clone, Copy, Debug)]
pub struct Lambda {
    pub base: f64,
    pub slope: f64,
}

impl Lambda {
    pub fn constant(v: f64) -> Lambda {
        Lambda {
            base: v,
            slope: 0.0,
        }
    }

    pub fn at(&self, nu: f64) -> f64 {
        self.base + self.slope * nu
    }
}

/// A polycycle with `k` corner transition maps `d_j` and breaking
/// parameters `lambda_j`; the return chain is scanned on `(x_min, x_max]`.
pub struct PolycycleSpec<'a> {
    pub maps: Vec<Box<dyn Fn(f64) -> f64 + Sync + 'a>>,
    pub lambdas: Vec<Lambda>,
    pub x_min: f64,
    pub x_max: f64,
}

impl<'a> PolycycleSpec<'a> {
    pub fn k(&self) -> usize {
        self.maps.len()
    }
}

/// Displacement `delta(x1) = d_k(x_k) - lambda_k - x1` along the chain
/// `x_{j+1} = d_j(x_j) - lambda_j`. `None` marks escape from the window
/// (no cycle through that point).
pub fn displacement(spec: &PolycycleSpec, nu: f64, x1: f64) -> Option<f64> {
    let k = spec.k();
    let mut x = x1;
    for j in 0..k - 1 {
        x = (spec.maps[j])(x) - spec.lambdas[j].at(nu);
        if !(x > 0.0 && x <= spec.x_max && x.is_finite()) {
            return None;
        }
    }
    let back = (spec.maps[k - 1])(x) - spec.lambdas[k - 1].at(nu);
    if !back.is_finite() {
        return None;
    }
    Some(back - x1)
}

/// An isolated zero of the displacement with its sign-change bracket.
#[derive(Clone, Copy, Debug)]
pub struct CycleRoot {
    pub x: f64,
    pub bracket: (f64, f64),
    /// numerical multiplicity proxy: |delta'| below threshold at the root
    pub multiple: bool,
}

#[derive(Clone, Debug)]
pub struct NuCount {
    pub nu: f64,
    pub count: usize,
    pub roots: Vec<CycleRoot>,
    /// the adaptive scan hit its resolution budget without stabilizing
    pub resolution_limit: bool,
}

const SCAN_START: usize = 2048;
const SCAN_MAX: usize = 1 << 16;

fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn bisect_root<F: Fn(f64) -> Option<f64>>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a).unwrap_or(0.0);
    for _ in 0..120 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        let m = 0.5 * (a + b);
        match f(m) {
            None => break,
            Some(fm) => {
                if fm == 0.0 {
                    return m;
                }
                if (fm > 0.0) == (fa > 0.0) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
        }
    }
    0.5 * (a + b)
}

fn scan_roots(spec: &PolycycleSpec, nu: f64, n: usize) -> (usize, Vec<CycleRoot>) {
    let f = |x: f64| displacement(spec, nu, x);
    let xs = log_points(spec.x_min, spec.x_max, n);
    let vals: Vec<Option<f64>> = xs.iter().map(|&x| f(x)).collect();
    let sup = vals
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let slope_scale = (sup / spec.x_max).max(1e-9);
    let mut roots = Vec::new();
    for i in 0..n - 1 {
        if let (Some(va), Some(vb)) = (vals[i], vals[i + 1]) {
            if va == 0.0 || va.signum() == vb.signum() {
                continue;
            }
            let (a, b) = (xs[i], xs[i + 1]);
            let x = bisect_root(&f, a, b);
            let h = (1e-7 * x).max(1e-10);
            let dprime = match (f(x + h), f(x - h)) {
                (Some(p), Some(m)) => (p - m) / (2.0 * h),
                _ => f64::INFINITY,
            };
            roots.push(CycleRoot {
                x,
                bracket: (a, b),
                multiple: dprime.abs() < 1e-6 * slope_scale,
            });
        }
    }
    (roots.len(), roots)
}

/// Count limit cycles per parameter value by adaptive log-spaced sign scan
/// with bracketed refinement to 1e-12.
pub fn count_cycles(spec: &PolycycleSpec, nu_grid: &[f64]) -> Vec<NuCount> {
    nu_grid
        .iter()
        .map(|&nu| {
            let mut n = SCAN_START;
            let (mut count, mut roots) = scan_roots(spec, nu, n);
            let mut resolution_limit = true;
            while n < SCAN_MAX {
                n *= 2;
                let (c2, r2) = scan_roots(spec, nu, n);
                let stable = c2 == count;
                count = c2;
                roots = r2;
                if stable {
                    resolution_limit = false;
                    break;
                }
            }
            NuCount {
                nu,
                count,
                roots,
                resolution_limit,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Rolle-partition bound
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct RolleReport {
    /// `sum_j j * n_j` over the argmax partition
    pub bound: usize,
    /// number of maximal intervals per derivative index
    pub interval_counts: Vec<usize>,
}

fn argmax_abs(vals: &[f64]) -> Option<usize> {
    let mut best = 0;
    let mut bv = 0.0;
    for (i, v) in vals.iter().enumerate() {
        if v.abs() > bv {
            bv = v.abs();
            best = i;
        }
    }
    if bv == 0.0 {
        None
    } else {
        Some(best)
    }
}

/// Rolle bound from the sequence `(g, chi g, ..., chi^l g)` along an orbit
/// parameter `t` in `[t0, t1]`: the orbit is partitioned into maximal
/// intervals by the index of the dominating derivative; on each such
/// interval the dominating derivative must keep a constant sign
/// (certificate), and the interval with index `j` contributes `j` to the
/// zero bound by repeated Rolle.
pub fn rolle_bound(
    derivs: &[&(dyn Fn(f64) -> f64 + Sync)],
    t0: f64,
    t1: f64,
    samples: usize,
) -> Result<RolleReport> {
    if derivs.is_empty() {
        return Err(Error::Input("empty derivative sequence".into()));
    }
    let eval = |t: f64| -> Vec<f64> { derivs.iter().map(|f| f(t)).collect() };
    // (argmax index, sign of the dominating value) per sample
    let classify = |t: f64| -> Result<(usize, f64)> {
        let vals = eval(t);
        match argmax_abs(&vals) {
            None => Err(Error::Domain(format!(
                "no certificate: all derivatives vanish at t = {}",
                t
            ))),
            Some(j) => Ok((j, vals[j].signum())),
        }
    };
    let mut marks = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let t = t0 + (t1 - t0) * i as f64 / samples as f64;
        marks.push((t, classify(t)?));
    }
    // refine where the dominating index keeps but its sign flips: the true
    // partition must switch index in between, or the certificate fails
    let mut refined: Vec<(usize, f64)> = vec![marks[0].1];
    for w in marks.windows(2) {
        let ((ta, (ja, sa)), (tb, (jb, sb))) = (w[0], w[1]);
        if ja == jb && sa != sb {
            let mut found = false;
            for i in 1..256 {
                let t = ta + (tb - ta) * i as f64 / 256.0;
                let (j, s) = classify(t)?;
                if j != ja {
                    refined.push((j, s));
                    found = true;
                    break;
                }
            }
            if !found {
                return Err(Error::Domain(format!(
                    "no certificate: dominating derivative {} changes sign near t = {}",
                    ja, ta
                )));
            }
        }
        refined.push((jb, sb));
    }
    let mut interval_counts = vec![0usize; derivs.len()];
    let mut bound = 0usize;
    let mut prev: Option<usize> = None;
    for &(j, _) in &refined {
        if prev != Some(j) {
            interval_counts[j] += 1;
            bound += j;
            prev = Some(j);
        }
    }
    Ok(RolleReport {
        bound,
        interval_counts,
    })
}

// ---------------------------------------------------------------------------
// Power products with symbolic exponents, and the blow-up identities
// ---------------------------------------------------------------------------

/// Sum of terms `c * prod_i v_i^(e_i)` where both the coefficient and the
/// exponents are rational functions of the ratio symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct PowSum {
    /// exponent vector -> coefficient
    pub terms: BTreeMap<Vec<RatFn>, RatFn>,
    pub nvars: usize,
}

impl PowSum {
    pub fn zero(nvars: usize) -> PowSum {
        PowSum {
            terms: BTreeMap::new(),
            nvars,
        }
    }

    pub fn term(coeff: RatFn, exps: Vec<RatFn>) -> PowSum {
        let nvars = exps.len();
        let mut s = PowSum::zero(nvars);
        s.push(coeff, exps);
        s
    }

    pub fn push(&mut self, coeff: RatFn, exps: Vec<RatFn>) {
        assert_eq!(exps.len(), self.nvars);
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exps).or_insert_with(RatFn::zero);
        *entry = entry.add(&coeff);
        if entry.is_zero() {
            let key: Vec<Vec<RatFn>> = self
                .terms
                .iter()
                .filter(|(_, c)| c.is_zero())
                .map(|(e, _)| e.clone())
                .collect();
            for k in key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &PowSum) -> PowSum {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(c.clone(), e.clone());
        }
        out
    }

    pub fn neg(&self) -> PowSum {
        PowSum {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.neg()))
                .collect(),
            nvars: self.nvars,
        }
    }

    pub fn sub(&self, other: &PowSum) -> PowSum {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PowSum) -> PowSum {
        let mut out = PowSum::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<RatFn> =
                    ea.iter().zip(eb).map(|(x, y)| x.add(y)).collect();
                out.push(ca.mul(cb), exps);
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFn) -> PowSum {
        PowSum {
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k.mul(c)))
                .collect(),
            nvars: self.nvars,
        }
    }

    /// Multiply by the single power product `c * prod v_i^(sh_i)`.
    pub fn shift(&self, c: &RatFn, sh: &[RatFn]) -> PowSum {
        self.mul(&PowSum::term(c.clone(), sh.to_vec()))
    }

    /// Apply the derivation defined by `chi(v_i) = fields[i]`.
    pub fn derive(&self, fields: &[PowSum]) -> PowSum {
        let mut out = PowSum::zero(self.nvars);
        for (e, c) in &self.terms {
            for i in 0..self.nvars {
                if e[i].is_zero() {
                    continue;
                }
                // c * e_i * v^(e - delta_i) * chi(v_i)
                let mut shifted = e.clone();
                shifted[i] = shifted[i].sub(&RatFn::one());
                let factor = PowSum::term(c.mul(&e[i]), shifted);
                out = out.add(&factor.mul(&fields[i]));
            }
        }
        out
    }

    /// Substitute each variable by a single power product
    /// `v_i -> c_i * prod_j w_j^(m_{i,j})` (a monomial map between spaces).
    pub fn monomial_subst(&self, images: &[(RatFn, Vec<RatFn>)]) -> PowSum {
        assert_eq!(images.len(), self.nvars);
        let new_nvars = images[0].1.len();
        let mut out = PowSum::zero(new_nvars);
        for (e, c) in &self.terms {
            let mut coeff = c.clone();
            let mut exps = vec![RatFn::zero(); new_nvars];
            for i in 0..self.nvars {
                // only unit coefficients can carry symbolic exponents
                assert!(images[i].0.is_one());
                for j in 0..new_nvars {
                    exps[j] = exps[j].add(&images[i].1[j].mul(&e[i]));
                }
                let _ = &mut coeff;
            }
            out.push(coeff, exps);
        }
        out
    }
}

/// The Hilbert derivation of the principal-part polycycle model:
/// `chi x_1 = prod x_j` extended by `chi g_j = 0` for
/// `g_j = x_j^(r_j) - x_{j+1}`.
pub struct HilbertDerivation {
    pub k: usize,
    /// ratio symbols r_1 .. r_{k-1} (r_k = 1)
    pub ratios: Vec<RatFn>,
    /// component fields chi(x_j) in the x variables
    pub components: Vec<PowSum>,
    /// first integrals g_j, j = 1..k-1
    pub integrals: Vec<PowSum>,
}

fn ratio_sym(j: usize) -> RatFn {
    RatFn::var(Sym::new(&format!("r{}", j)))
}

impl HilbertDerivation {
    pub fn new(k: usize) -> HilbertDerivation {
        assert!(k >= 1);
        let mut ratios: Vec<RatFn> = (1..k).map(ratio_sym).collect();
        ratios.push(RatFn::one()); // r_k = 1
        let one = RatFn::one();
        // chi x_j = (prod_{i<j} r_i x_i^(r_i - 1)) * prod_i x_i
        let mut components = Vec::new();
        for j in 0..k {
            let mut coeff = RatFn::one();
            let mut exps = vec![one.clone(); k]; // prod x_i
            for i in 0..j {
                coeff = coeff.mul(&ratios[i]);
                exps[i] = exps[i].add(&ratios[i]).sub(&one);
            }
            components.push(PowSum::term(coeff, exps));
        }
        let mut integrals = Vec::new();
        for j in 0..k.saturating_sub(1) {
            let mut ej = vec![RatFn::zero(); k];
            ej[j] = ratios[j].clone();
            let mut en = vec![RatFn::zero(); k];
            en[j + 1] = one.clone();
            integrals.push(PowSum::term(one.clone(), ej).sub(&PowSum::term(one.clone(), en)));
        }
        HilbertDerivation {
            k,
            ratios,
            components,
            integrals,
        }
    }

    /// Dimension of non-triviality: number of independent first integrals.
    pub fn dimension(&self) -> usize {
        self.k - 1
    }

    pub fn apply(&self, f: &PowSum) -> PowSum {
        f.derive(&self.components)
    }

    /// Cumulative products `w_j = r_1 ... r_{j-1}` (so `w_1 = 1`).
    pub fn weight(&self, j: usize) -> RatFn {
        let mut w = RatFn::one();
        for i in 0..j {
            w = w.mul(&self.ratios[i]);
        }
        w
    }
}

#[derive(Clone, Debug)]
pub struct BlowUpReport {
    pub k: usize,
    /// chi(g_j) = 0 exactly for every first integral
    pub integrals_annihilated: bool,
    /// every component satisfies the weighted homogeneity under T_k
    pub homogeneous: bool,
    /// g_j o T_k = rho^(r_{1,j}) (y_j^(r_j) - y_{j+1}), and the
    /// quasi-sphere satisfies Q o T_k = rho^(r_{1,k}) Q(y)
    pub factorization: bool,
    /// in integral coordinates the pushforward is proportional to
    /// rho d/d rho - sum r_{1,j} u_j d/d u_j (cross-multiplied identity)
    pub pushforward_proportional: bool,
    /// blow-up exponent s_k = sum_{j<k} r_{1,j}
    pub s_k: RatFn,
}

impl BlowUpReport {
    pub fn all_hold(&self) -> bool {
        self.integrals_annihilated
            && self.homogeneous
            && self.factorization
            && self.pushforward_proportional
    }
}

/// Verify the quasi-spherical blow-up identities exactly over the symbolic
/// exponent ring in `r_1, ..., r_{k-1}`.
pub fn blowup_verify(k: usize) -> Result<BlowUpReport> {
    if !(2..=4).contains(&k) {
        return Err(Error::Input("blow-up verification supports k in 2..=4".into()));
    }
    let h = HilbertDerivation::new(k);
    let one = RatFn::one();

    // (i) the g_j are first integrals
    let integrals_annihilated = h
        .integrals
        .iter()
        .all(|g| h.apply(g).is_zero());

    // s_k = sum_{j=1}^{k-1} r_{1,j} = sum w_{j+1}
    let mut s_k = RatFn::zero();
    for j in 1..k {
        s_k = s_k.add(&h.weight(j));
    }

    // T_k: x_j = rho^(w_j) y_j maps x-space sums into (rho, y_1..y_k)
    let t_images: Vec<(RatFn, Vec<RatFn>)> = (0..k)
        .map(|j| {
            let mut img = vec![RatFn::zero(); k + 1];
            img[0] = h.weight(j);
            img[j + 1] = one.clone();
            (one.clone(), img)
        })
        .collect();

    // (ii) weighted homogeneity: chi_j(T(rho, y)) = rho^(s_k + w_j) chi_j(y)
    let mut homogeneous = true;
    for j in 0..k {
        let lhs = h.components[j].monomial_subst(&t_images);
        // the same component expression written in y, times the rho power
        let mut in_y = PowSum::zero(k + 1);
        for (e, c) in &h.components[j].terms {
            let mut exps = vec![s_k.add(&h.weight(j))];
            exps.extend(e.iter().cloned());
            in_y.push(c.clone(), exps);
        }
        if !lhs.sub(&in_y).is_zero() {
            homogeneous = false;
        }
    }

    // (iii) G_j = g_j o T factors through rho^(r_{1,j}), and the
    // quasi-sphere Q = sum x_j^(r_{j,k}) is rho-homogeneous of degree r_{1,k}
    let mut factorization = true;
    for j in 0..k - 1 {
        let big_g = h.integrals[j].monomial_subst(&t_images);
        // rho^(w_{j+1}) (y_j^(r_j) - y_{j+1})
        let mut ea = vec![RatFn::zero(); k + 1];
        ea[0] = h.weight(j + 1);
        ea[j + 1] = h.ratios[j].clone();
        let mut eb = vec![RatFn::zero(); k + 1];
        eb[0] = h.weight(j + 1);
        eb[j + 2] = one.clone();
        let expected = PowSum::term(one.clone(), ea).sub(&PowSum::term(one.clone(), eb));
        if !big_g.sub(&expected).is_zero() {
            factorization = false;
        }
    }
    let mut q = PowSum::zero(k);
    for j in 0..k {
        // r_{j,k} = prod_{i=j}^{k} r_i = r_{1,k} / w_j
        let mut rjk = RatFn::one();
        for i in j..k {
            rjk = rjk.mul(&h.ratios[i]);
        }
        let mut e = vec![RatFn::zero(); k];
        e[j] = rjk;
        q.push(one.clone(), e);
    }
    let q_up = q.monomial_subst(&t_images);
    let r1k = h.weight(k); // r_k = 1 so r_{1,k} = w_k
    let mut q_in_y = PowSum::zero(k + 1);
    for (e, c) in &q.terms {
        let mut exps = vec![r1k.clone()];
        exps.extend(e.iter().cloned());
        q_in_y.push(c.clone(), exps);
    }
    if !q_up.sub(&q_in_y).is_zero() {
        factorization = false;
    }

    // (iv) integral coordinates: rho from rho^(r_{1,k}) = Q(x) and
    // u_j = g_j rho^(-r_{1,j}); the pushed field must satisfy
    // chi(u_j) rho + r_{1,j} u_j chi(rho) = 0 (proportionality to
    // rho d/drho - sum r_{1,j} u_j d/du_j after cross-multiplication).
    // Work in the extended variables (x_1..x_k, rho) with
    // chi(rho) = chi(Q) rho^(1 - r_{1,k}) / r_{1,k}.
    let ext = |f: &PowSum| -> PowSum {
        let mut out = PowSum::zero(k + 1);
        for (e, c) in &f.terms {
            let mut exps = e.clone();
            exps.push(RatFn::zero());
            out.push(c.clone(), exps);
        }
        out
    };
    let chi_q = q.derive(&h.components);
    let mut rho_shift = vec![RatFn::zero(); k + 1];
    rho_shift[k] = one.sub(&r1k);
    let chi_rho = ext(&chi_q).shift(&r1k.inv(), &rho_shift);
    let mut ext_fields: Vec<PowSum> =
        h.components.iter().map(&ext).collect();
    ext_fields.push(chi_rho.clone());
    let mut pushforward_proportional = true;
    for j in 0..k - 1 {
        let r1j = h.weight(j + 1);
        let mut u_shift = vec![RatFn::zero(); k + 1];
        u_shift[k] = r1j.neg();
        let u_j = ext(&h.integrals[j]).shift(&one, &u_shift);
        let chi_u = u_j.derive(&ext_fields);
        let mut rho_e = vec![RatFn::zero(); k + 1];
        rho_e[k] = one.clone();
        let rho = PowSum::term(one.clone(), rho_e);
        let lhs = chi_u.mul(&rho).add(&u_j.scale(&r1j).mul(&chi_rho));
        if !lhs.is_zero() {
            pushforward_proportional = false;
        }
    }

    Ok(BlowUpReport {
        k,
        integrals_annihilated,
        homogeneous,
        factorization,
        pushforward_proportional,
        s_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn one_map<'a>(f: impl Fn(f64) -> f64 + Sync + 'a, lam: f64) -> PolycycleSpec<'a> {
        PolycycleSpec {
            maps: vec![Box::new(f)],
            lambdas: vec![Lambda::constant(lam)],
            x_min: 1e-6,
            x_max: 0.5,
        }
    }

    #[test]
    fn displacement_examples() {
        // identity return
        let id = one_map(|x| x, 0.0);
        for &x in &[0.01, 0.1, 0.4] {
            assert_eq!(displacement(&id, 0.0, x), Some(0.0));
        }
        // d = x^1.2: delta < 0 on (0, 1)
        let pw = one_map(|x: f64| x.powf(1.2), 0.0);
        for &x in &[0.01, 0.1, 0.4] {
            let d = displacement(&pw, 0.0, x).unwrap();
            assert!(d < 0.0);
        }
        // k = 2 with r1 r2 = 1: the composition collapses
        let res = PolycycleSpec {
            maps: vec![
                Box::new(|x: f64| x.powf(1.5)),
                Box::new(|x: f64| x.powf(2.0 / 3.0)),
            ],
            lambdas: vec![Lambda::constant(0.0); 2],
            x_min: 1e-6,
            x_max: 0.5,
        };
        for &x in &[0.02, 0.1, 0.45] {
            let d = displacement(&res, 0.0, x).unwrap();
            assert!(d.abs() < 1e-12, "{}", d);
        }
    }

    #[test]
    fn saddle_loop_counts() {
        // delta = x^1.2 - x - lambda; lambda swept through zero
        let spec = PolycycleSpec {
            maps: vec![Box::new(|x: f64| x.powf(1.2))],
            lambdas: vec![Lambda {
                base: 0.0,
                slope: 1.0,
            }],
            x_min: 1e-6,
            x_max: 0.5,
        };
        let nus: Vec<f64> = (0..=400)
            .map(|i| -1e-4 + 2e-4 * i as f64 / 400.0)
            .collect();
        let res = count_cycles(&spec, &nus);
        let max = res.iter().map(|r| r.count).max().unwrap();
        assert!(max <= 1);
        assert!(res.iter().any(|r| r.count == 1));
        // lambda = 0: no zero in the open window
        let at0 = count_cycles(&spec, &[0.0]);
        assert_eq!(at0[0].count, 0);
        // every root carries a genuine sign-change bracket
        for r in &res {
            for root in &r.roots {
                let (a, b) = root.bracket;
                let fa = displacement(&spec, r.nu, a).unwrap();
                let fb = displacement(&spec, r.nu, b).unwrap();
                assert!(fa.signum() != fb.signum());
                assert!(a <= root.x && root.x <= b);
            }
        }
    }

    #[test]
    fn two_saddle_counts() {
        let spec = PolycycleSpec {
            maps: vec![
                Box::new(|x: f64| x.powf(1.3)),
                Box::new(|x: f64| x.powf(0.9)),
            ],
            lambdas: vec![
                Lambda {
                    base: 1e-5,
                    slope: 1.0,
                },
                Lambda {
                    base: -2e-6,
                    slope: 0.5,
                },
            ],
            x_min: 1e-6,
            x_max: 0.5,
        };
        let nus: Vec<f64> = (0..60).map(|i| -3e-5 + 1e-6 * i as f64).collect();
        let res = count_cycles(&spec, &nus);
        for r in &res {
            assert!(r.count <= 2, "nu={}: count {}", r.nu, r.count);
        }
    }

    #[test]
    fn reduction_invariance() {
        // pre-composing an analytic change x -> x(1+cx) on the transversal
        // must not change counts on the matched window
        let c = 0.3;
        let fwd = move |x: f64| x * (1.0 + c * x);
        let inv = move |y: f64| (-1.0 + (1.0 + 4.0 * c * y).sqrt()) / (2.0 * c);
        for &lam in &[-5e-5, -1e-5, 0.0, 1e-5] {
            let plain = PolycycleSpec {
                maps: vec![Box::new(move |x: f64| x.powf(1.2) - lam)],
                lambdas: vec![Lambda::constant(0.0)],
                x_min: 1e-6,
                x_max: 0.5,
            };
            let conj = PolycycleSpec {
                maps: vec![Box::new(move |x: f64| {
                    fwd(inv(x).powf(1.2) - lam)
                })],
                lambdas: vec![Lambda::constant(0.0)],
                x_min: fwd(1e-6),
                x_max: fwd(0.5),
            };
            let a = count_cycles(&plain, &[0.0]);
            let b = count_cycles(&conj, &[0.0]);
            assert_eq!(a[0].count, b[0].count, "lambda = {}", lam);
        }
    }

    #[test]
    fn rolle_examples() {
        // nonvanishing g alone: bound 0
        let g0 = |t: f64| 1.0 + t * t;
        let r = rolle_bound(&[&g0], -1.0, 1.0, 512).unwrap();
        assert_eq!(r.bound, 0);
        // t^2 - eps with its derivatives
        let eps = 1e-3;
        let g = move |t: f64| t * t - eps;
        let dg = |t: f64| 2.0 * t;
        let ddg = |_t: f64| 2.0;
        let r = rolle_bound(&[&g, &dg, &ddg], -1.0, 1.0, 512).unwrap();
        assert!(r.bound >= 2, "bound {}", r.bound);
        // all derivatives vanish somewhere: no certificate
        let z = |_t: f64| 0.0;
        assert!(rolle_bound(&[&z], 0.0, 1.0, 16).is_err());
    }

    #[test]
    fn rolle_dominates_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let a: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let p = move |t: f64| {
                a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4])))
            };
            let p1 = move |t: f64| a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * 4.0 * a[4]));
            let p2 = move |t: f64| 2.0 * a[2] + t * (6.0 * a[3] + t * 12.0 * a[4]);
            let p3 = move |t: f64| 6.0 * a[3] + t * 24.0 * a[4];
            let p4 = move |_t: f64| 24.0 * a[4];
            let report = match rolle_bound(&[&p, &p1, &p2, &p3, &p4], -1.0, 1.0, 1024) {
                Ok(r) => r,
                Err(_) => continue, // no certificate produced for this draw
            };
            // direct sign-change scan of p
            let n = 4000;
            let mut zeros = 0;
            let mut prev = p(-1.0);
            for i in 1..=n {
                let t = -1.0 + 2.0 * i as f64 / n as f64;
                let v = p(t);
                if prev != 0.0 && v != 0.0 && prev.signum() != v.signum() {
                    zeros += 1;
                }
                prev = v;
            }
            assert!(
                report.bound >= zeros,
                "bound {} < zeros {} for {:?}",
                report.bound,
                zeros,
                a
            );
        }
    }

    #[test]
    fn hilbert_derivation_shape() {
        for k in 1..=4 {
            let h = HilbertDerivation::new(k);
            assert_eq!(h.dimension(), k - 1);
            for g in &h.integrals {
                assert!(h.apply(g).is_zero());
            }
        }
    }

    #[test]
    fn blowup_identities() {
        for k in 2..=4 {
            let rep = blowup_verify(k).unwrap();
            assert!(rep.all_hold(), "k = {}: {:?}", k, rep);
        }
        // k = 2: s_2 = r_1
        let rep2 = blowup_verify(2).unwrap();
        assert_eq!(rep2.s_k, ratio_sym(1));
        // r_1 = 1 specialization: s_2 = 1 and T_2 = rho Id
        let mut assign = std::collections::BTreeMap::new();
        assign.insert(Sym::new("r1"), crate::mpoly::Q::from_integer(1.into()));
        assert!(rep2.s_k.eval(&assign).unwrap() == crate::mpoly::Q::from_integer(1.into()));
        let h = HilbertDerivation::new(2);
        assert!(h.weight(1).eval(&assign).unwrap() == crate::mpoly::Q::from_integer(1.into()));
        // k = 3: s_3 = r_1 + r_1 r_2
        let rep3 = blowup_verify(3).unwrap();
        let expect = ratio_sym(1).add(&ratio_sym(1).mul(&ratio_sym(2)));
        assert_eq!(rep3.s_k, expect);
        // out of range
        assert!(blowup_verify(5).is_err());
    }
}
