//! The computational commands: each ingests a JSON config and writes
//! deterministic CSV/JSON artifacts into the output directory.

use crate::config::*;
use polycyclic_core::chi::{
    self, transverse_ideal, min_saturation_power, ChiDerivation, ChiSum, SampleRng,
};
use polycyclic_core::division::{self, LocalPoly, MonomialOrder};
use polycyclic_core::dulac::{
    dulac_coefficients, dulac_ode_oracle, invert_map, DulacModel, SaddleDeployment,
};
use polycyclic_core::logexp::{euler_resolve, ld, LogExpSum};
use polycyclic_core::mpoly::Q;
use polycyclic_core::polycycle::{blowup_verify, count_cycles, Lambda, NuCount, PolycycleSpec};
use polycyclic_core::{RatFn, Sym};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub struct Ctx {
    pub out: PathBuf,
    pub seed: u64,
    pub threads: usize,
    pub hash: u64,
}

impl Ctx {
    fn header(&self) -> String {
        format!(
            "# polycyclic v{} config_hash={:016x} seed={}",
            env!("CARGO_PKG_VERSION"),
            self.hash,
            self.seed
        )
    }

    fn meta(&self) -> Value {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "config_hash": format!("{:016x}", self.hash),
            "seed": self.seed,
        })
    }

    fn write(&self, name: &str, content: &str) -> CliResult<PathBuf> {
        let path = self.out.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::Compute(format!("cannot write {}: {}", path.display(), e)))?;
        Ok(path)
    }

    fn write_json(&self, name: &str, mut body: Value) -> CliResult<PathBuf> {
        body["_meta"] = self.meta();
        let text = serde_json::to_string_pretty(&body)
            .map_err(|e| CliError::Compute(e.to_string()))?;
        self.write(name, &(text + "\n"))
    }
}

pub fn load_config(path: &Path) -> CliResult<(Value, Vec<u8>)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
    let v: Value = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("invalid JSON: {}", e)))?;
    Ok((v, bytes))
}

fn grid_from(cfg: &Value, path: &str, def: (f64, f64, usize)) -> CliResult<Vec<f64>> {
    let (mut lo, mut hi, mut n) = def;
    if let Some(g) = opt_field(cfg, path) {
        lo = as_f64(field(g, "lo")?, &format!("{}.lo", path))?;
        hi = as_f64(field(g, "hi")?, &format!("{}.hi", path))?;
        n = as_usize(field(g, "n")?, &format!("{}.n", path))?;
    }
    if n < 2 || !(lo < hi) || lo <= 0.0 {
        return Err(CliError::Config(format!(
            "field `{}`: need 0 < lo < hi and n >= 2",
            path
        )));
    }
    Ok((0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect())
}

fn deployment_from(cfg: &Value) -> CliResult<SaddleDeployment> {
    let mu = as_f64(field(cfg, "mu")?, "mu")?;
    let mut coeffs = Vec::new();
    if let Some(cs) = opt_field(cfg, "coeffs") {
        for (i, row) in as_array(cs, "coeffs")?.iter().enumerate() {
            let row = as_array(row, &format!("coeffs[{}]", i))?;
            let mut out = Vec::new();
            for (j, c) in row.iter().enumerate() {
                out.push(as_f64(c, &format!("coeffs[{}][{}]", i, j))?);
            }
            coeffs.push(out);
        }
    }
    Ok(SaddleDeployment::new(mu, coeffs))
}

// ---------------------------------------------------------------------------

pub fn cmd_dulac(cfg: &Value, ctx: &Ctx) -> CliResult<()> {
    let dep = deployment_from(cfg)?;
    let n_trunc = match opt_field(cfg, "n_trunc") {
        Some(v) => as_usize(v, "n_trunc")?,
        None => 12,
    };
    let grid = grid_from(cfg, "grid", (0.05, 0.9, 25))?;
    let model = dulac_coefficients(&dep, n_trunc, &grid)?;

    let mut csv = String::new();
    csv.push_str(&ctx.header());
    csv.push_str("\nx,d_series,d_ode,rel_err\n");
    let mut max_rel = 0.0f64;
    for &x in &grid {
        let ds = model.eval(x);
        let od = dulac_ode_oracle(&dep, x)?;
        let rel = ((ds - od) / od).abs();
        max_rel = max_rel.max(rel);
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(x),
            fmt_f64(ds),
            fmt_f64(od),
            fmt_f64(rel)
        ));
    }
    ctx.write("dulac.csv", &csv)?;
    ctx.write_json(
        "dulac.json",
        json!({
            "r": model.r,
            "n_trunc": model.n_trunc,
            "tail_estimate": model.tail_estimate,
            "rescaled_by": dep.rescaled_by,
            "norm_sum": dep.norm_sum,
            "max_rel_err": max_rel,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------

enum VertexMap {
    Power(f64),
    Model(DulacModel),
}

impl VertexMap {
    fn eval(&self, x: f64) -> f64 {
        match self {
            VertexMap::Power(r) => x.powf(*r),
            VertexMap::Model(m) => m.eval(x),
        }
    }
}

pub fn cmd_cyclicity(cfg: &Value, ctx: &Ctx) -> CliResult<()> {
    let vs = as_array(field(cfg, "vertices")?, "vertices")?;
    if vs.is_empty() {
        return Err(CliError::Config("field `vertices`: need at least one vertex".into()));
    }
    let mut vertex_maps = Vec::new();
    let mut any_model = false;
    for (i, v) in vs.iter().enumerate() {
        if let Some(r) = opt_field(v, "r") {
            vertex_maps.push(VertexMap::Power(as_f64(r, &format!("vertices[{}].r", i))?));
        } else {
            let dep = deployment_from(v)
                .map_err(|e| CliError::Config(format!("vertices[{}]: {}", i, e)))?;
            let grid = grid_from(v, "grid", (0.05, 0.9, 25))?;
            let n_trunc = match opt_field(v, "n_trunc") {
                Some(n) => as_usize(n, &format!("vertices[{}].n_trunc", i))?,
                None => 12,
            };
            vertex_maps.push(VertexMap::Model(dulac_coefficients(&dep, n_trunc, &grid)?));
            any_model = true;
        }
    }
    let ls = as_array(field(cfg, "lambdas")?, "lambdas")?;
    if ls.len() != vertex_maps.len() {
        return Err(CliError::Config(
            "field `lambdas`: must have one entry per vertex".into(),
        ));
    }
    let mut lambdas = Vec::new();
    for (i, l) in ls.iter().enumerate() {
        let base = as_f64(field(l, "base")?, &format!("lambdas[{}].base", i))?;
        let slope = match opt_field(l, "slope") {
            Some(s) => as_f64(s, &format!("lambdas[{}].slope", i))?,
            None => 0.0,
        };
        lambdas.push(Lambda { base, slope });
    }
    let x_max = match opt_field(cfg, "x_max") {
        Some(v) => as_f64(v, "x_max")?,
        None => 0.5,
    };
    let x_min = match opt_field(cfg, "x_min") {
        Some(v) => as_f64(v, "x_min")?,
        None if any_model => 0.05,
        None => 1e-6,
    };
    if any_model && x_min < 0.04 {
        return Err(CliError::Config(
            "field `x_min`: must be >= 0.04 when a vertex uses a computed Dulac model".into(),
        ));
    }
    let nus = match opt_field(cfg, "nu_grid") {
        None => vec![0.0],
        Some(g) => {
            let lo = as_f64(field(g, "lo")?, "nu_grid.lo")?;
            let hi = as_f64(field(g, "hi")?, "nu_grid.hi")?;
            let n = as_usize(field(g, "n")?, "nu_grid.n")?;
            if n == 0 {
                return Err(CliError::Config("field `nu_grid.n`: empty grid".into()));
            }
            (0..n)
                .map(|i| {
                    if n == 1 {
                        lo
                    } else {
                        lo + (hi - lo) * i as f64 / (n - 1) as f64
                    }
                })
                .collect()
        }
    };

    let spec = PolycycleSpec {
        maps: vertex_maps
            .into_iter()
            .map(|m| Box::new(move |x: f64| m.eval(x)) as Box<dyn Fn(f64) -> f64 + Sync>)
            .collect(),
        lambdas,
        x_min,
        x_max,
    };

    // per-parameter counts are independent: chunk the grid over threads
    let results: Vec<NuCount> = if ctx.threads <= 1 || nus.len() < 2 * ctx.threads {
        count_cycles(&spec, &nus)
    } else {
        let chunk = nus.len().div_ceil(ctx.threads);
        let spec_ref = &spec;
        std::thread::scope(|s| {
            let handles: Vec<_> = nus
                .chunks(chunk)
                .map(|c| s.spawn(move || count_cycles(spec_ref, c)))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let mut csv = String::new();
    csv.push_str(&ctx.header());
    csv.push_str("\nnu,count,roots,multiple_flags,resolution_limit\n");
    let mut max_count = 0;
    let mut any_multiple = false;
    let mut any_limit = false;
    for r in &results {
        max_count = max_count.max(r.count);
        any_limit |= r.resolution_limit;
        let roots: Vec<String> = r.roots.iter().map(|c| fmt_f64(c.x)).collect();
        let flags: Vec<String> = r
            .roots
            .iter()
            .map(|c| {
                any_multiple |= c.multiple;
                if c.multiple { "1" } else { "0" }.to_string()
            })
            .collect();
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(r.nu),
            r.count,
            roots.join(";"),
            flags.join(";"),
            r.resolution_limit as u8
        ));
    }
    ctx.write("cyclicity.csv", &csv)?;
    ctx.write_json(
        "cyclicity.json",
        json!({
            "max_count": max_count,
            "any_multiple_flag": any_multiple,
            "any_resolution_limit": any_limit,
            "parameters": results.len(),
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------

fn local_poly_from(v: &Value, path: &str, nvars: usize) -> CliResult<LocalPoly> {
    let mut p = LocalPoly::zero();
    for (i, t) in as_array(v, path)?.iter().enumerate() {
        let tp = format!("{}[{}]", path, i);
        let (num, den) = as_rational(field(t, "coeff")?, &format!("{}.coeff", tp))?;
        let exps = as_array(field(t, "exps")?, &format!("{}.exps", tp))?;
        if exps.len() != nvars {
            return Err(CliError::Config(format!(
                "field `{}.exps`: expected {} exponents",
                tp, nvars
            )));
        }
        let mut e = Vec::new();
        for (j, x) in exps.iter().enumerate() {
            e.push(as_usize(x, &format!("{}.exps[{}]", tp, j))? as u32);
        }
        p.push(e, RatFn::rational(num, den));
    }
    Ok(p)
}

fn poly_to_json(p: &LocalPoly) -> Value {
    let terms: Vec<Value> = p
        .terms
        .iter()
        .map(|(e, c)| json!({ "exps": e, "coeff": c.to_string() }))
        .collect();
    Value::Array(terms)
}

pub fn cmd_divide(cfg: &Value, ctx: &Ctx) -> CliResult<()> {
    let nvars = as_usize(field(cfg, "nvars")?, "nvars")?;
    if nvars == 0 {
        return Err(CliError::Config("field `nvars`: must be positive".into()));
    }
    let ord = match opt_field(cfg, "weights") {
        None => MonomialOrder::total_degree(nvars),
        Some(ws) => {
            let ws = as_array(ws, "weights")?;
            if ws.len() != nvars {
                return Err(CliError::Config(
                    "field `weights`: expected one weight per variable".into(),
                ));
            }
            let mut out = Vec::new();
            for (i, w) in ws.iter().enumerate() {
                let (p, q) = as_rational(w, &format!("weights[{}]", i))?;
                out.push(Q::new(p.into(), q.into()));
            }
            MonomialOrder::with_weights(out)
        }
    };
    let dividend = local_poly_from(field(cfg, "dividend")?, "dividend", nvars)?;
    let mut divisors = Vec::new();
    for (i, d) in as_array(field(cfg, "divisors")?, "divisors")?.iter().enumerate() {
        divisors.push(local_poly_from(d, &format!("divisors[{}]", i), nvars)?);
    }
    if divisors.is_empty() {
        return Err(CliError::Config("field `divisors`: need at least one".into()));
    }
    let res = division::divide(&dividend, &divisors, &ord, &Default::default())?;
    let is_member = division::member(&dividend, &divisors, &ord)?;
    ctx.write_json(
        "divide.json",
        json!({
            "remainder": poly_to_json(&res.remainder),
            "quotients": res.quotients.iter().map(poly_to_json).collect::<Vec<_>>(),
            "truncated": res.truncated_at.map(|q| q.to_string()),
            "member": is_member,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn cmd_wronskian(cfg: &Value, ctx: &Ctx) -> CliResult<()> {
    let q1 = as_usize(field(cfg, "q1")?, "q1")?;
    let n = as_usize(field(cfg, "n")?, "n")? as u32;
    if q1 == 0 || n == 0 {
        return Err(CliError::Config("fields `q1`, `n`: must be positive".into()));
    }
    let d = ChiDerivation::new(q1, 0);
    let w = chi::wronskian(&d, n)?;
    // s_n at mu = 0
    let assign: std::collections::BTreeMap<Sym, Q> = (1..=q1)
        .map(|j| (chi::mu_sym(j), Q::from_integer(0.into())))
        .collect();
    let s_n_at_0 = w.s_n.eval(&assign).map(|q| q.to_string());
    ctx.write_json(
        "wronskian.json",
        json!({
            "q1": q1,
            "n": n,
            "dimension": w.dimension,
            "b_n": w.b_n.to_string(),
            "s_n": w.s_n.to_string(),
            "s_n_at_mu_zero": s_n_at_0,
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------

pub fn cmd_blowup(cfg: &Value, ctx: &Ctx) -> CliResult<()> {
    let k = as_usize(field(cfg, "k")?, "k")?;
    if !(2..=4).contains(&k) {
        return Err(CliError::Config("field `k`: must be 2, 3, or 4".into()));
    }
    let rep = blowup_verify(k)?;
    ctx.write_json(
        "blowup.json",
        json!({
            "k": rep.k,
            "s_k": rep.s_k.to_string(),
            "integrals_annihilated": rep.integrals_annihilated,
            "homogeneous": rep.homogeneous,
            "factorization": rep.factorization,
            "pushforward_proportional": rep.pushforward_proportional,
            "identity_holds": rep.all_hold(),
        }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn random_ratfn(rng: &mut SampleRng) -> RatFn {
    RatFn::from_q(rng.small_q())
}

pub fn cmd_selftest(_cfg: &Value, ctx: &Ctx) -> CliResult<()> {
    let mut checks: Vec<Check> = Vec::new();
    let mut rng = SampleRng::new(ctx.seed ^ 0x9e3779b97f4a7c15);

    // compensator identity on a (y, beta) grid including beta = 0
    {
        let mut max_rel = 0.0f64;
        for i in 0..100 {
            let y = 0.01 + 0.98 * i as f64 / 99.0;
            for j in 0..21 {
                let b = -1.0 + 2.0 * j as f64 / 20.0;
                let lhs = b * ld(y, b) + 1.0;
                let rhs = y.powf(b);
                max_rel = max_rel.max(((lhs - rhs) / rhs).abs());
            }
        }
        checks.push(Check {
            name: "compensator_identity",
            pass: max_rel < 1e-12,
            detail: format!("max_rel_err={}", fmt_f64(max_rel)),
        });
    }

    // Euler resolvent solves its equation exactly
    {
        let mut ok = 0;
        let trials = 200;
        for _ in 0..trials {
            let r = random_ratfn(&mut rng);
            let mut g = LogExpSum::zero();
            for _ in 0..=(rng.next_u64() % 3) {
                g.push(
                    random_ratfn(&mut rng),
                    (rng.next_u64() % 3) as u32,
                    random_ratfn(&mut rng),
                );
            }
            let f = euler_resolve(&r, &g);
            if LogExpSum::solves_euler(&f, &r, &g) {
                ok += 1;
            }
        }
        checks.push(Check {
            name: "euler_resolvent_exact",
            pass: ok == trials,
            detail: format!("{}/{} exact", ok, trials),
        });
    }

    // Wronskian shape for q1 = 1, n = 1: Delta_1 = x^(1+r), b_1 = 1
    {
        let d = ChiDerivation::new(1, 0);
        let w = chi::wronskian(&d, 1)?;
        let r1 = RatFn::one().add(&RatFn::var(chi::mu_sym(1)));
        let expect = RatFn::one().add(&r1);
        let pass = w.b_n.is_one() && w.s_n == expect;
        checks.push(Check {
            name: "wronskian_saddle",
            pass,
            detail: format!("b_1={} s_1={}", w.b_n, w.s_n),
        });
    }

    // division membership agrees with monomial divisibility
    {
        let ord = MonomialOrder::total_degree(2);
        let mut agree = 0;
        let trials = 50;
        for _ in 0..trials {
            let g1 = vec![(rng.next_u64() % 5) as u32, (rng.next_u64() % 5) as u32];
            let g2 = vec![(rng.next_u64() % 5) as u32, (rng.next_u64() % 5) as u32];
            let m = vec![(rng.next_u64() % 7) as u32, (rng.next_u64() % 7) as u32];
            let gens = vec![
                LocalPoly::monomial(g1.clone(), RatFn::one()),
                LocalPoly::monomial(g2.clone(), RatFn::one()),
            ];
            let f = LocalPoly::monomial(m.clone(), RatFn::one());
            let got = division::member(&f, &gens, &ord)?;
            let divides = |g: &[u32]| g.iter().zip(&m).all(|(a, b)| a <= b);
            if got == (divides(&g1) || divides(&g2)) {
                agree += 1;
            }
        }
        checks.push(Check {
            name: "division_membership_oracle",
            pass: agree == trials,
            detail: format!("{}/{} agree", agree, trials),
        });
    }

    // resonant block example: ideal (lam^N) and saturation power N
    {
        let mut pass = true;
        for n_pow in 1..=3u32 {
            let d = ChiDerivation::with_s(0, vec![RatFn::one()]);
            let f = ChiSum::term(RatFn::one(), 1, vec![n_pow], RatFn::one());
            let x0 = Q::new(1.into(), 2.into());
            let ideal = transverse_ideal(&d, &f, &x0, 16)?;
            let lam_n = LocalPoly::monomial(vec![n_pow], RatFn::one());
            pass &= ideal.member(&lam_n)?;
            if n_pow > 1 {
                pass &= !ideal.member(&LocalPoly::monomial(vec![n_pow - 1], RatFn::one()))?;
            }
            pass &= min_saturation_power(&f, n_pow, &[n_pow], 32) == Some(n_pow);
        }
        checks.push(Check {
            name: "transverse_ideal_resonant",
            pass,
            detail: "N = 1..3".into(),
        });
    }

    // Dulac map: linear exactness and oracle agreement
    {
        let grid: Vec<f64> = (0..20)
            .map(|i| (0.05f64.ln() + (0.9f64.ln() - 0.05f64.ln()) * i as f64 / 19.0).exp())
            .collect();
        let lin = SaddleDeployment::linear(0.2);
        let lm = dulac_coefficients(&lin, 8, &grid)?;
        let lin_err = grid
            .iter()
            .fold(0.0f64, |m, &x| m.max((lm.eval(x) - x.powf(1.2)).abs()));
        let dep = SaddleDeployment::new(0.1, vec![vec![1.0]]);
        let model = dulac_coefficients(&dep, 12, &grid)?;
        let mut ode_err = 0.0f64;
        for &x in &grid {
            let od = dulac_ode_oracle(&dep, x)?;
            ode_err = ode_err.max(((model.eval(x) - od) / od).abs());
        }
        let inv = invert_map(|x| model.eval(x), 0.05, 0.9)?;
        let mut inv_err = 0.0f64;
        for &x in &grid {
            inv_err = inv_err.max((inv.eval(model.eval(x))? - x).abs());
        }
        checks.push(Check {
            name: "dulac_map",
            pass: lin_err < 1e-12 && ode_err < 1e-8 && inv_err < 1e-9,
            detail: format!(
                "linear_err={} ode_err={} inversion_err={}",
                fmt_f64(lin_err),
                fmt_f64(ode_err),
                fmt_f64(inv_err)
            ),
        });
    }

    // cyclicity of the saddle loop
    {
        let spec = PolycycleSpec {
            maps: vec![Box::new(|x: f64| x.powf(1.2))],
            lambdas: vec![Lambda {
                base: 0.0,
                slope: 1.0,
            }],
            x_min: 1e-6,
            x_max: 0.5,
        };
        let nus: Vec<f64> = (0..101).map(|i| -1e-4 + 2e-6 * i as f64).collect();
        let res = count_cycles(&spec, &nus);
        let max = res.iter().map(|r| r.count).max().unwrap_or(0);
        checks.push(Check {
            name: "saddle_loop_cyclicity",
            pass: max <= 1 && res.iter().any(|r| r.count == 1),
            detail: format!("max_count={}", max),
        });
    }

    // blow-up identities
    {
        let mut pass = true;
        for k in 2..=4 {
            pass &= blowup_verify(k)?.all_hold();
        }
        checks.push(Check {
            name: "blowup_identities",
            pass,
            detail: "k = 2..4".into(),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let body: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
        .collect();
    ctx.write_json(
        "selftest.json",
        json!({ "checks": body, "all_pass": all_pass }),
    )?;
    if !all_pass {
        return Err(CliError::Compute("selftest reported failures".into()));
    }
    Ok(())
}
