//! Dulac maps of deployed resonant saddles: the integral operator, the
//! coefficient recursion, an independent ODE oracle, and map inversion.
//!
//! The deployment is `x dy + y(1 + mu + a(x,y)) dx` with
//! `a = x y sum_n a_n(x) y^(n-1)`. The transition map past the saddle is
//! assembled as `d(x) = sum_n f_n(x) (1/2)^(n-1)` with `f_1 = x^r`,
//! `r = 1 + mu`, and `f_n = L_{nr}(h_n)` through the integral operator.

use crate::error::Error;
use crate::ode::dopri5;
use crate::quad;
use crate::Result;
use num_complex::Complex64;

/// A prepared deployment: `mu` and the coefficient polynomials `a_n(x)`
/// (index `n-1`, inner vector = coefficients of powers of `x`).
/// The combined sup-norm bound `sum_n ||a_n||` on the unit disk is
/// enforced by rescaling on ingestion when it exceeds 1/4.
#[derive(Clone, Debug)]
pub struct SaddleDeployment {
    pub mu: f64,
    pub coeffs: Vec<Vec<f64>>,
    /// bound actually in force after ingestion
    pub norm_sum: f64,
    /// factor applied to every `a_n` (1.0 when no rescale was needed)
    pub rescaled_by: f64,
}

impl SaddleDeployment {
    pub fn new(mu: f64, coeffs: Vec<Vec<f64>>) -> SaddleDeployment {
        // sup-norm bound of a polynomial on [0,1]: sum of |coefficients|
        let raw: f64 = coeffs
            .iter()
            .map(|p| p.iter().map(|c| c.abs()).sum::<f64>())
            .sum();
        let scale = if raw > 0.25 { 0.25 / raw } else { 1.0 };
        let coeffs = coeffs
            .iter()
            .map(|p| p.iter().map(|c| c * scale).collect())
            .collect();
        SaddleDeployment {
            mu,
            coeffs,
            norm_sum: raw * scale,
            rescaled_by: scale,
        }
    }

    pub fn linear(mu: f64) -> SaddleDeployment {
        SaddleDeployment::new(mu, Vec::new())
    }

    pub fn r(&self) -> f64 {
        1.0 + self.mu
    }

    /// `a_n(x)`.
    pub fn a_n(&self, n: usize, x: f64) -> f64 {
        match self.coeffs.get(n - 1) {
            None => 0.0,
            Some(p) => {
                let mut v = 0.0;
                for c in p.iter().rev() {
                    v = v * x + c;
                }
                v
            }
        }
    }

    /// The full perturbation `a(x,y) = x y sum_n a_n(x) y^(n-1)`.
    pub fn a(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        let mut yp = 1.0;
        for n in 1..=self.coeffs.len() {
            s += self.a_n(n, x) * yp;
            yp *= y;
        }
        x * y * s
    }
}

// ---------------------------------------------------------------------------
// Paths and the integral operator
// ---------------------------------------------------------------------------

/// Integration path `[0, u0]` followed by the exponential arc
/// `z = u0 + u + i C (exp(u/K) - 1)`; `C = 0` degenerates to the real axis.
#[derive(Clone, Copy, Debug)]
pub struct DulacPath {
    pub u0: f64,
    pub k: f64,
    pub c: f64,
}

impl DulacPath {
    pub fn real() -> DulacPath {
        DulacPath {
            u0: 1.0,
            k: 1.0,
            c: 0.0,
        }
    }

    pub fn new(u0: f64, k: f64, c: f64) -> DulacPath {
        assert!(u0 >= 1.0 && k >= 1.0 && (-1.0..=1.0).contains(&c));
        DulacPath { u0, k, c }
    }

    pub fn z(&self, t: f64) -> Complex64 {
        if t <= self.u0 || self.c == 0.0 {
            Complex64::new(t, 0.0)
        } else {
            let u = t - self.u0;
            Complex64::new(t, self.c * ((u / self.k).exp() - 1.0))
        }
    }

    pub fn dz(&self, t: f64) -> Complex64 {
        if t <= self.u0 || self.c == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            let u = t - self.u0;
            Complex64::new(1.0, self.c / self.k * (u / self.k).exp())
        }
    }

    /// Admissibility at parameter `t`: `|tan(arg(s z'))| <= |exp(z)|`.
    pub fn admissible_at(&self, s: Complex64, t: f64) -> bool {
        let w = s * self.dz(t);
        if w.re <= 0.0 {
            return false;
        }
        (w.im / w.re).abs() <= self.z(t).re.exp()
    }

    /// Parameter of a target `w` on this path, or a domain error when the
    /// target is off the curve.
    pub fn param_of(&self, w: Complex64) -> Result<f64> {
        if self.c == 0.0 || w.re <= self.u0 {
            if w.im.abs() > 1e-12 * (1.0 + w.re.abs()) {
                return Err(Error::Domain(
                    "target is off the real path".into(),
                ));
            }
            if w.re < 0.0 {
                return Err(Error::Domain("target has negative real part".into()));
            }
            return Ok(w.re);
        }
        let t = w.re;
        let on_path = self.z(t);
        if (on_path.im - w.im).abs() > 1e-9 * (1.0 + w.im.abs()) {
            return Err(Error::Domain("target is off the exponential arc".into()));
        }
        Ok(t)
    }
}

/// The Dulac operator `L_s(f)(w) = s exp(-s w) int_{gamma_w} exp((s-1)z) f(z) dz`.
pub fn dulac_operator<F>(
    s: Complex64,
    f: &F,
    path: &DulacPath,
    w: Complex64,
) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let t_end = path.param_of(w)?;
    // the operator must stay in its non-singular domain: Re(s z) > 0 away
    // from the start of the path
    let probes = 64;
    for i in 1..=probes {
        let t = t_end * i as f64 / probes as f64;
        if (s * path.z(t)).re <= 0.0 {
            return Err(Error::Domain(format!(
                "path enters the singular direction at t = {}",
                t
            )));
        }
    }
    let g = |z: Complex64| ((s - Complex64::new(1.0, 0.0)) * z).exp() * f(z);
    let zf = |t: f64| path.z(t);
    let df = |t: f64| path.dz(t);
    let integral = quad::integrate_path(&g, &zf, &df, 0.0, t_end, 1e-13);
    Ok(s * (-s * w).exp() * integral)
}

#[derive(Clone, Debug)]
pub struct BoundReport {
    pub targets: usize,
    pub max_ratio: f64,
}

/// Lemma-style bound check: on admissible paths,
/// `|L_s(f)(w)| <= 2 sup |f|` at every sampled target.
pub fn operator_bound_check<F>(
    s: Complex64,
    f: &F,
    path: &DulacPath,
    samples: usize,
) -> Result<BoundReport>
where
    F: Fn(Complex64) -> Complex64,
{
    let t_max = path.u0 + 3.0 * path.k;
    // condition (tan/exp) along the whole sampled path first
    let fine = 400;
    for i in 0..=fine {
        let t = t_max * i as f64 / fine as f64;
        if !path.admissible_at(s, t) {
            return Err(Error::PathInadmissible(t));
        }
    }
    let mut max_ratio: f64 = 0.0;
    for i in 1..=samples {
        let t = t_max * i as f64 / samples as f64;
        let w = path.z(t);
        let val = dulac_operator(s, f, path, w)?;
        let mut sup: f64 = 0.0;
        for j in 0..=200 {
            let tt = t * j as f64 / 200.0;
            sup = sup.max(f(path.z(tt)).norm());
        }
        let ratio = if sup == 0.0 {
            if val.norm() > 1e-13 {
                return Err(Error::Internal(
                    "nonzero operator value on a zero integrand".into(),
                ));
            }
            0.0
        } else {
            val.norm() / sup
        };
        max_ratio = max_ratio.max(ratio);
    }
    if max_ratio > 2.0 + 1e-9 {
        return Err(Error::Internal(format!(
            "operator bound violated: ratio {}",
            max_ratio
        )));
    }
    Ok(BoundReport {
        targets: samples,
        max_ratio,
    })
}

// ---------------------------------------------------------------------------
// Coefficient recursion on Chebyshev panels
// ---------------------------------------------------------------------------

/// Piecewise Chebyshev-Lobatto interpolant in `tau = log x` on `[lo, 0]`.
#[derive(Clone, Debug)]
struct PanelInterp {
    breaks: Vec<f64>,          // panel boundaries in tau, ascending
    nodes: Vec<Vec<f64>>,      // tau nodes per panel
    values: Vec<Vec<f64>>,     // function values per panel
}

const PANEL_NODES: usize = 24;

fn cheb_nodes(a: f64, b: f64) -> Vec<f64> {
    (0..PANEL_NODES)
        .map(|i| {
            let t = (std::f64::consts::PI * i as f64 / (PANEL_NODES - 1) as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * t
        })
        .rev()
        .collect()
}

impl PanelInterp {
    fn layout(lo: f64) -> Vec<f64> {
        let panels = ((-lo) / 0.35).ceil().max(1.0) as usize;
        (0..=panels)
            .map(|i| lo + (0.0 - lo) * i as f64 / panels as f64)
            .collect()
    }

    /// All panel nodes as one ascending list (shared endpoints deduplicated).
    fn global_nodes(breaks: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        for w in breaks.windows(2) {
            let ns = cheb_nodes(w[0], w[1]);
            let skip = usize::from(!out.is_empty());
            out.extend_from_slice(&ns[skip..]);
        }
        out
    }

    /// Assemble from values at the global node list of `global_nodes`.
    fn from_values(breaks: Vec<f64>, global: &[f64]) -> PanelInterp {
        let mut nodes = Vec::new();
        let mut values = Vec::new();
        let stride = PANEL_NODES - 1;
        for (p, w) in breaks.windows(2).enumerate() {
            nodes.push(cheb_nodes(w[0], w[1]));
            values.push(global[p * stride..p * stride + PANEL_NODES].to_vec());
        }
        PanelInterp {
            breaks,
            nodes,
            values,
        }
    }

    /// Barycentric evaluation at `tau`.
    fn eval(&self, tau: f64) -> f64 {
        let tau = tau.clamp(self.breaks[0], *self.breaks.last().unwrap());
        let mut p = self
            .breaks
            .partition_point(|b| *b <= tau)
            .saturating_sub(1);
        p = p.min(self.nodes.len() - 1);
        let ns = &self.nodes[p];
        let vs = &self.values[p];
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, (&n, &v)) in ns.iter().zip(vs).enumerate() {
            let d = tau - n;
            if d.abs() < 1e-300 {
                return v;
            }
            let mut w = if i % 2 == 0 { 1.0 } else { -1.0 };
            if i == 0 || i == ns.len() - 1 {
                w *= 0.5;
            }
            num += w / d * v;
            den += w / d;
        }
        num / den
    }
}

/// The computed Dulac map: coefficient functions on panels and the
/// assembled evaluation `d(x) = sum_n f_n(x) (1/2)^(n-1)`.
#[derive(Clone, Debug)]
pub struct DulacModel {
    pub r: f64,
    pub n_trunc: usize,
    pub x_lo: f64,
    pub tail_estimate: f64,
    interp: Vec<PanelInterp>, // f_2 .. f_{n_trunc}
}

impl DulacModel {
    /// `f_n(x)`; `n >= 1`.
    pub fn coeff(&self, n: usize, x: f64) -> f64 {
        if n == 1 {
            return x.powf(self.r);
        }
        match self.interp.get(n - 2) {
            None => 0.0,
            Some(p) => p.eval(x.ln()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut d = 0.0;
        let mut half = 1.0;
        for n in 1..=self.n_trunc {
            d += self.coeff(n, x) * half;
            half *= 0.5;
        }
        d
    }
}

/// Compute `f_1..f_N` by the operator recursion
/// `f_n(x) = -x^{nr} int_x^1 t^{-nr} sum_{p<n} p a_{n-p}(t) f_p(t) dt`
/// on Chebyshev panels in `log x`, and validate the geometric decay.
pub fn dulac_coefficients(
    dep: &SaddleDeployment,
    n_trunc: usize,
    grid: &[f64],
) -> Result<DulacModel> {
    if grid.is_empty() {
        return Err(Error::Input("empty grid".into()));
    }
    let x_lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = grid.iter().cloned().fold(0.0, f64::max);
    if !(x_lo > 0.0 && x_hi <= 1.0) {
        return Err(Error::Input("grid must lie in (0, 1]".into()));
    }
    if x_lo < 0.01 {
        return Err(Error::Domain(
            "grid extends below x = 0.01 (step-size collapse)".into(),
        ));
    }
    let r = dep.r();
    if r <= 0.1 {
        return Err(Error::Input("ratio r too close to zero".into()));
    }
    let lo_tau = x_lo.ln();
    let mut model = DulacModel {
        r,
        n_trunc,
        x_lo,
        tail_estimate: 0.0,
        interp: Vec::new(),
    };
    let breaks = PanelInterp::layout(lo_tau);
    let taus = PanelInterp::global_nodes(&breaks);
    for n in 2..=n_trunc {
        let nr = n as f64 * r;
        // source term sum_{p<n} p a_{n-p} f_p, in tau coordinates
        let source = |sigma: f64, m: &DulacModel| -> f64 {
            let t = sigma.exp();
            let mut g = 0.0;
            for p in 1..n {
                let an = dep.a_n(n - p, t);
                if an != 0.0 {
                    g += p as f64 * an * m.coeff(p, t);
                }
            }
            g
        };
        // march right to left; the kernel is re-anchored at every node so
        // it stays in [0, 1] and no large factors ever appear
        let mut vals = vec![0.0; taus.len()];
        for i in (0..taus.len() - 1).rev() {
            let (a, b) = (taus[i], taus[i + 1]);
            let m_ref = &model;
            let piece = quad::gl32(
                &|sigma| (nr * (a - sigma) + sigma).exp() * source(sigma, m_ref),
                a,
                b,
            );
            vals[i] = (nr * (a - b)).exp() * vals[i + 1] - piece;
        }
        model
            .interp
            .push(PanelInterp::from_values(breaks.clone(), &vals));
    }
    // geometric decay of the coefficient functions on the grid
    let sup1: f64 = grid
        .iter()
        .fold(0.0f64, |m, &x| m.max(x.powf(r)))
        .max(1e-30);
    let mut last_sup = sup1;
    for n in 2..=n_trunc {
        let sup_n = grid
            .iter()
            .fold(0.0f64, |m, &x| m.max(model.coeff(n, x).abs()));
        let allowed = 0.5f64.powi(n as i32 - 1) * sup1.max(1.0);
        if sup_n > allowed * (1.0 + 1e-9) {
            return Err(Error::Internal(format!(
                "coefficient decay bound violated at n = {}: {} > {}",
                n, sup_n, allowed
            )));
        }
        last_sup = sup_n;
    }
    model.tail_estimate = last_sup * 0.5f64.powi(n_trunc as i32 - 1);
    if model.tail_estimate > 1e-8 {
        return Err(Error::Accuracy {
            context: "series tail above tolerance; increase N_trunc".into(),
            achieved: model.tail_estimate,
            requested: 1e-8,
        });
    }
    // the map must be strictly increasing on the requested grid
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut prev = f64::NEG_INFINITY;
    for &x in &sorted {
        let v = model.eval(x);
        if v <= prev {
            return Err(Error::Monotonicity(format!(
                "Dulac map not increasing at x = {}",
                x
            )));
        }
        prev = v;
    }
    Ok(model)
}

/// Independent oracle: integrate the deployment's trajectory from the
/// transversal point `(x, 1/2)` to `x = 1` and rescale by the
/// normalization `f(1, y) = y`.
pub fn dulac_ode_oracle(dep: &SaddleDeployment, x: f64) -> Result<f64> {
    if !(0.01..=1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "oracle restricted to x in [0.01, 1], got {}",
            x
        )));
    }
    let r = dep.r();
    let rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
        let xv = s.exp();
        dy[0] = -y[0] * (r + dep.a(xv, y[0]));
    };
    let y = dopri5(&rhs, x.ln(), 0.0, &[0.5], 1e-12)?;
    Ok(2.0 * y[0])
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

/// Numeric inverse of a strictly increasing map on `[lo, hi]`.
pub struct MonotoneInverse<'a> {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
    lo: f64,
    hi: f64,
}

/// Build the inverse after certifying monotonicity on the probe grid.
pub fn invert_map<'a, F>(f: F, lo: f64, hi: f64) -> Result<MonotoneInverse<'a>>
where
    F: Fn(f64) -> f64 + Send + Sync + 'a,
{
    assert!(lo < hi);
    let probes = 256;
    let mut prev = f64::NEG_INFINITY;
    for i in 0..=probes {
        let x = lo + (hi - lo) * i as f64 / probes as f64;
        let v = f(x);
        if v <= prev {
            return Err(Error::Monotonicity(format!(
                "map not increasing near x = {}",
                x
            )));
        }
        prev = v;
    }
    Ok(MonotoneInverse {
        f: Box::new(f),
        lo,
        hi,
    })
}

impl<'a> MonotoneInverse<'a> {
    /// Solve `f(x) = y` by bracketed bisection/secant refinement.
    pub fn eval(&self, y: f64) -> Result<f64> {
        let (mut a, mut b) = (self.lo, self.hi);
        let (fa, fb) = ((self.f)(a) - y, (self.f)(b) - y);
        if fa > 0.0 || fb < 0.0 {
            return Err(Error::Domain(format!(
                "value {} outside the range of the map",
                y
            )));
        }
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let fm = (self.f)(mid) - y;
            if fm == 0.0 || (b - a) < 1e-15 * (1.0 + mid.abs()) {
                return Ok(mid);
            }
            if fm < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logexp::ld;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn operator_closed_forms() {
        let path = DulacPath::real();
        // s = 1, f = 0
        let v = dulac_operator(c(1.0), &|_| c(0.0), &path, c(0.8)).unwrap();
        assert!(v.norm() < 1e-14);
        // s = 2, f = 1, w real: 2 e^{-2w} (e^w - 1)
        for &w in &[0.3, 0.7, 1.9] {
            let v = dulac_operator(c(2.0), &|_| c(1.0), &path, c(w)).unwrap();
            let exact = 2.0 * (-2.0 * w).exp() * (w.exp() - 1.0);
            assert!((v.re - exact).abs() < 1e-12, "{} vs {}", v.re, exact);
            assert!(v.im.abs() < 1e-13);
        }
    }

    #[test]
    fn operator_reproduces_compensator() {
        // L_r(-1/r)(w) with w = -log x equals x Ld(x, mu)
        for &mu in &[-0.3, -0.1, 0.0, 0.2, 0.3] {
            let r = 1.0 + mu;
            let path = DulacPath::real();
            for &x in &[0.05f64, 0.2, 0.5, 0.9] {
                let w = -x.ln();
                let v = dulac_operator(c(r), &|_| c(-1.0 / r), &path, c(w)).unwrap();
                let exact = x * ld(x, mu);
                assert!(
                    (v.re - exact).abs() < 1e-10,
                    "mu={} x={}: {} vs {}",
                    mu,
                    x,
                    v.re,
                    exact
                );
            }
        }
    }

    #[test]
    fn bound_check_on_paths() {
        let real = DulacPath::real();
        let rep = operator_bound_check(c(1.0), &|_| c(1.0), &real, 50).unwrap();
        assert!(rep.max_ratio <= 2.0);
        let rep0 = operator_bound_check(c(1.0), &|_| c(0.0), &real, 10).unwrap();
        assert_eq!(rep0.max_ratio, 0.0);
        // exponential path, decaying integrand
        let arc = DulacPath::new(1.0, 2.0, 0.5);
        let rep2 =
            operator_bound_check(c(3.0), &|z: Complex64| (-z).exp(), &arc, 25).unwrap();
        assert!(rep2.max_ratio <= 2.0);
    }

    #[test]
    fn linear_saddle_is_pure_power() {
        let dep = SaddleDeployment::linear(0.2);
        let grid = log_grid(0.05, 0.9, 30);
        let model = dulac_coefficients(&dep, 8, &grid).unwrap();
        for &x in &grid {
            assert!((model.eval(x) - x.powf(1.2)).abs() < 1e-14);
        }
        assert_eq!(model.tail_estimate, 0.0);
    }

    #[test]
    fn bernoulli_deployment_closed_form() {
        // mu = 0, a = c x y: exact map d = x / (1 - c x log x / 2);
        // ingestion rescales a_1 = 1 down to c = 1/4
        let dep = SaddleDeployment::new(0.0, vec![vec![1.0]]);
        assert!((dep.rescaled_by - 0.25).abs() < 1e-15);
        let cval = dep.coeffs[0][0];
        let grid = log_grid(0.05, 0.9, 40);
        let model = dulac_coefficients(&dep, 12, &grid).unwrap();
        for &x in &grid {
            let exact = x / (1.0 - cval * x * x.ln() / 2.0);
            let got = model.eval(x);
            assert!(
                ((got - exact) / exact).abs() < 1e-9,
                "x={}: {} vs {}",
                x,
                got,
                exact
            );
        }
    }

    #[test]
    fn series_matches_ode_oracle() {
        let dep = SaddleDeployment::new(0.1, vec![vec![1.0]]);
        let grid = log_grid(0.05, 0.9, 25);
        let model = dulac_coefficients(&dep, 12, &grid).unwrap();
        for &x in &grid {
            let od = dulac_ode_oracle(&dep, x).unwrap();
            let sr = model.eval(x);
            assert!(
                ((sr - od) / od).abs() < 1e-8,
                "x={}: series {} vs ode {}",
                x,
                sr,
                od
            );
        }
        // asymptotics: d(x)/x^r -> 1 as x -> 0 (gap grows with x)
        let mut prev_gap = 0.0;
        for &x in grid.iter().take(8) {
            let gap = (model.eval(x) / x.powf(dep.r()) - 1.0).abs();
            assert!(gap >= prev_gap - 1e-12);
            prev_gap = gap;
        }
        assert!((model.eval(grid[0]) / grid[0].powf(dep.r()) - 1.0).abs() < 0.05);
    }

    #[test]
    fn oracle_trivial_cases() {
        let dep = SaddleDeployment::linear(0.5);
        let v = dulac_ode_oracle(&dep, 0.25).unwrap();
        assert!((v - 0.125).abs() < 1e-11);
        // identity normalization at x = 1
        let v1 = dulac_ode_oracle(&dep, 1.0).unwrap();
        assert!((v1 - 1.0).abs() < 1e-12);
        // nonlinear: finite, positive, below x
        let dep2 = SaddleDeployment::new(0.0, vec![vec![1.0]]);
        let v2 = dulac_ode_oracle(&dep2, 0.3).unwrap();
        assert!(v2 > 0.0 && v2 < 0.3);
    }

    #[test]
    fn inversion_round_trips() {
        let id = invert_map(|x| x, 0.0, 1.0).unwrap();
        assert!((id.eval(0.37).unwrap() - 0.37).abs() < 1e-13);

        let sq = invert_map(|x| x * x, 1e-6, 1.0).unwrap();
        for &y in &[0.04, 0.25, 0.81] {
            assert!((sq.eval(y).unwrap() - y.sqrt()).abs() < 1e-12);
        }

        let dep = SaddleDeployment::new(0.1, vec![vec![1.0]]);
        let grid = log_grid(0.05, 0.9, 20);
        let model = dulac_coefficients(&dep, 12, &grid).unwrap();
        let inv = invert_map(|x| model.eval(x), 0.05, 0.9).unwrap();
        for &x in &grid {
            let back = inv.eval(model.eval(x)).unwrap();
            assert!((back - x).abs() < 1e-9, "x={} back={}", x, back);
        }
        // non-monotone input is rejected
        assert!(invert_map(|x| (6.0 * x).sin(), 0.0, 1.0).is_err());
    }
}
