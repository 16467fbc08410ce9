use super::*;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn rf(n: i64) -> RatFn {
    RatFn::from_i64(n)
}

#[test]
fn chi_apply_generator_rules() {
    let d = ChiDerivation::new(1, 0);
    // z_1 -> r_1 z_1 + x
    let mut b = ChiBlock::new(1);
    b.push(vec![0, 1], vec![], rf(1));
    let out = chi_apply(&d, &b);
    let r1 = RatFn::one().add(&RatFn::var(mu_sym(1)));
    assert_eq!(out.terms[&(vec![0, 1], vec![])], r1);
    assert_eq!(out.terms[&(vec![1, 0], vec![])], rf(1));

    // x^2 -> 2 x^2
    let mut b2 = ChiBlock::new(2);
    b2.push(vec![2, 0], vec![], rf(1));
    let out2 = chi_apply(&d, &b2);
    assert_eq!(out2.terms.len(), 1);
    assert_eq!(out2.terms[&(vec![2, 0], vec![])], rf(2));

    // x z_1 -> (1 + r_1) x z_1 + x^2
    let mut b3 = ChiBlock::new(2);
    b3.push(vec![1, 1], vec![], rf(1));
    let out3 = chi_apply(&d, &b3);
    assert_eq!(
        out3.terms[&(vec![1, 1], vec![])],
        RatFn::one().add(&r1)
    );
    assert_eq!(out3.terms[&(vec![2, 0], vec![])], rf(1));

    // x u_1 with s_1 = 1 + mu_1: eigenvalue -mu_1
    let s1 = RatFn::one().add(&RatFn::var(mu_sym(1)));
    let du = ChiDerivation::with_s(0, vec![s1]);
    let mut b4 = ChiBlock::new(0);
    b4.push(vec![1], vec![1], rf(1));
    let out4 = chi_apply(&du, &b4);
    assert_eq!(out4.terms.len(), 1);
    assert_eq!(
        out4.terms[&(vec![1], vec![1])],
        RatFn::var(mu_sym(1)).neg()
    );
}

#[test]
fn lambda_is_first_integral() {
    // lambda_j = x^{s_j} u_j satisfies chi(lambda_j) = 0, all (q1, ell) <= 3
    for q1 in 0..=3usize {
        for ell in 1..=3usize {
            let d = ChiDerivation::new(q1, ell);
            for j in 0..ell {
                let mut n = vec![0u32; ell];
                n[j] = 1;
                let lam = ChiSum::term(d.s[j].clone(), 0, n, RatFn::one());
                assert!(lam.chi_apply(&d).is_zero(), "q1={} ell={} j={}", q1, ell, j);
            }
        }
    }
}

#[test]
fn euler_operator_examples() {
    // F_{=1} annihilates a x + c z_1
    let d = ChiDerivation::new(1, 0);
    let fam = vec![(vec![1, 0], vec![]), (vec![0, 1], vec![])];
    let mut b = ChiBlock::new(1);
    b.push(vec![1, 0], vec![], RatFn::var(Sym::new("a")));
    b.push(vec![0, 1], vec![], RatFn::var(Sym::new("c")));
    assert!(euler_operator(&d, &fam, &b).is_zero());

    // single factor with e_m = 5 applied to x: (1-5) x
    let d0 = ChiDerivation::new(0, 0);
    let mut bx = ChiBlock::new(1);
    bx.push(vec![1], vec![], rf(1));
    let out = euler_operator(&d0, &[(vec![5], vec![])], &bx);
    assert_eq!(out.terms[&(vec![1], vec![])], rf(-4));

    // F_{=2} annihilates x z_1
    let fam2: Vec<(Vec<u32>, Vec<u32>)> = enumerate_family(1, 2)
        .into_iter()
        .map(|m| (m, vec![]))
        .collect();
    let mut b2 = ChiBlock::new(2);
    b2.push(vec![1, 1], vec![], rf(1));
    assert!(euler_operator(&d, &fam2, &b2).is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn euler_kernel_annihilates_blocks(
        q1 in 1usize..=2,
        n in 1u32..=3,
        coeffs in proptest::collection::vec(-5i64..6, 1..10),
    ) {
        let d = ChiDerivation::new(q1, 0);
        let fam: Vec<(Vec<u32>, Vec<u32>)> = enumerate_family(q1, n)
            .into_iter().map(|m| (m, vec![])).collect();
        let mut b = ChiBlock::new(n as i64);
        for ((m, _), c) in fam.iter().zip(coeffs.iter().cycle()) {
            b.push(m.clone(), vec![], rf(*c));
        }
        prop_assert!(euler_operator(&d, &fam, &b).is_zero());
    }
}

#[test]
fn wronskian_trivial_and_small() {
    // q1 = 0: Delta_n = x^n, b_n = 1
    let d0 = ChiDerivation::new(0, 0);
    for n in 1..=4u32 {
        let w = wronskian(&d0, n).unwrap();
        assert_eq!(w.dimension, 1);
        assert_eq!(w.b_n, RatFn::one());
        assert_eq!(w.s_n, rf(n as i64));
    }

    // q1 = 1, n = 1: Delta_1 = x^{1+r}, b_1 = 1
    let d1 = ChiDerivation::new(1, 0);
    let w1 = wronskian(&d1, 1).unwrap();
    assert_eq!(w1.dimension, 2);
    assert_eq!(w1.b_n, RatFn::one());
    let one_plus_r = rf(2).add(&RatFn::var(mu_sym(1)));
    assert_eq!(w1.s_n, one_plus_r);
    assert_eq!(
        w1.determinant,
        LogExpSum::term(one_plus_r, 0, RatFn::one())
    );

    // q1 = 1, n = 2: s_2 = 6 + 3 mu, s_2(0) = 6
    let w2 = wronskian(&d1, 2).unwrap();
    assert_eq!(w2.dimension, 3);
    assert_eq!(
        w2.s_n,
        rf(6).add(&RatFn::var(mu_sym(1)).scale_q(&q(3, 1)))
    );
}

#[test]
fn wronskian_two_slots() {
    let d2 = ChiDerivation::new(2, 0);
    for n in 1..=3u32 {
        let w = wronskian(&d2, n).unwrap();
        let expect_dim = ((n + 1) * (n + 2) / 2) as usize;
        assert_eq!(w.dimension, expect_dim);
        assert!(!w.b_n.is_zero());
    }
}

#[test]
fn fewnomial_split_examples() {
    // x + z_1 + x z_1 -> degrees {1, 2}
    let terms = vec![
        (vec![1, 0], vec![], rf(1)),
        (vec![0, 1], vec![], rf(1)),
        (vec![1, 1], vec![], rf(1)),
    ];
    let parts = fewnomial_split(&terms);
    assert_eq!(parts.len(), 2);
    assert_eq!(parts[0].degree, 1);
    assert_eq!(parts[0].terms.len(), 2);
    assert_eq!(parts[1].degree, 2);

    // u_1 x^2: single block of degree 1
    let parts2 = fewnomial_split(&[(vec![2], vec![1], rf(1))]);
    assert_eq!(parts2.len(), 1);
    assert_eq!(parts2[0].degree, 1);

    // zero input
    assert!(fewnomial_split(&[]).is_empty());

    // partition property: reassembly reproduces the input
    let mixed = vec![
        (vec![2, 0], vec![], rf(3)),
        (vec![0, 1], vec![], rf(-2)),
        (vec![1, 2], vec![], rf(5)),
    ];
    let parts3 = fewnomial_split(&mixed);
    let mut total: BTreeMap<(Vec<u32>, Vec<u32>), RatFn> = BTreeMap::new();
    for p in &parts3 {
        for (k, c) in &p.terms {
            total.insert(k.clone(), c.clone());
        }
    }
    for (m, n, c) in &mixed {
        assert_eq!(&total[&(m.clone(), n.clone())], c);
    }
}

#[test]
fn transverse_ideal_coefficient_example() {
    // f = a x^n with ell = 0: ideal (a)
    let mut d = ChiDerivation::new(0, 0);
    let a = Sym::new("a");
    d.alpha = vec![a];
    for n in 1..=3 {
        let f = ChiSum::term(rf(n), 0, vec![], RatFn::var(a));
        let ideal = transverse_ideal(&d, &f, &q(1, 2), 16).unwrap();
        assert_eq!(ideal.generators.len(), 1);
        let gen_a = LocalPoly::monomial(vec![1], RatFn::one());
        assert!(ideal.member(&gen_a).unwrap());
        assert!(!ideal.member(&LocalPoly::monomial(vec![0], RatFn::one())).unwrap());
    }
}

#[test]
fn transverse_ideal_resonant_example() {
    // f = u^N x log x with s = 1: ideal (lam^N), any x0
    for n_pow in 1..=5u32 {
        let d = ChiDerivation::with_s(0, vec![RatFn::one()]);
        let f = ChiSum::term(rf(1), 1, vec![n_pow], RatFn::one());
        let points = [q(1, 2), q(1, 1), q(2, 1)];
        let ideals: Vec<TransverseIdeal> = points
            .iter()
            .map(|x0| transverse_ideal(&d, &f, x0, 16).unwrap())
            .collect();
        let lam_n = LocalPoly::monomial(vec![n_pow], RatFn::one());
        for ideal in &ideals {
            assert!(ideal.member(&lam_n).unwrap());
            if n_pow > 1 {
                let lower = LocalPoly::monomial(vec![n_pow - 1], RatFn::one());
                assert!(!ideal.member(&lower).unwrap());
            }
        }
        // independence of the restriction point
        assert!(ideals[0].equals(&ideals[1]).unwrap());
        assert!(ideals[0].equals(&ideals[2]).unwrap());
    }
}

#[test]
fn transverse_ideal_of_zero() {
    let d = ChiDerivation::with_s(0, vec![RatFn::one()]);
    let ideal = transverse_ideal(&d, &ChiSum::zero(), &q(1, 2), 4).unwrap();
    assert!(ideal.is_zero());
}

#[test]
fn saturation_power_is_exactly_n() {
    // smallest n with x^n (u^N x log x) in (x^N u^N) is N
    for big_n in 1..=5u32 {
        let f = ChiSum::term(rf(1), 1, vec![big_n], RatFn::one());
        assert_eq!(
            min_saturation_power(&f, big_n, &[big_n], 32),
            Some(big_n)
        );
    }
}

#[test]
fn multiplicity_of_single_block() {
    // f = x: chain (0) in (1), ma = 1
    let d = ChiDerivation::new(0, 0);
    let series = vec![ChiSum::term(rf(1), 0, vec![], RatFn::one())];
    let (st, chain) = algebraic_multiplicity(&d, &series, &q(1, 2), 5).unwrap();
    assert_eq!(st, Stationarity::Index(1));
    assert!(chain[0].is_zero());
    assert!(!chain[1].is_zero());
}

#[test]
fn ramified_chain_never_stabilizes() {
    let (chain, ord) = ramified_witness_chain(20);
    assert_eq!(chain.len(), 21);
    // strictly increasing: each new generator is outside the previous ideal
    for n in 1..chain.len() {
        let new_gen = chain[n].last().unwrap();
        if n >= 2 {
            assert!(!division::member(new_gen, &chain[n - 1], &ord).unwrap());
        }
    }
    assert_eq!(
        chain_stationarity(&chain, &ord, 3).unwrap(),
        Stationarity::NotStabilized
    );
}

#[test]
fn double_inclusion_examples() {
    // g = a x, eps = 1
    let d0 = ChiDerivation::new(0, 0);
    let mut g = ChiBlock::new(1);
    g.push(vec![1], vec![], RatFn::var(Sym::new("a")));
    let rep = double_inclusion_check(&d0, &g, &q(1, 1), 5, 7).unwrap();
    assert!(rep.holds);
    assert!(rep.max_achieved_exponent <= Q::zero());

    // g = 0: trivial
    let rep0 =
        double_inclusion_check(&d0, &ChiBlock::new(1), &q(1, 1), 3, 1).unwrap();
    assert!(rep0.holds);

    // g = a x + c z_1, p = 1: achieved exponent <= 1 + eps at 20 samples
    let d1 = ChiDerivation::new(1, 0);
    let mut g1 = ChiBlock::new(1);
    g1.push(vec![1, 0], vec![], RatFn::var(Sym::new("a")));
    g1.push(vec![0, 1], vec![], RatFn::var(Sym::new("c")));
    let rep1 = double_inclusion_check(&d1, &g1, &q(1, 1), 20, 42).unwrap();
    assert!(rep1.holds);
    assert!(rep1.max_achieved_exponent <= q(1, 1));
}

#[test]
fn shifted_euler_ideal_certificate() {
    // for e with e(0) != p, g lies in the span of (chi^j (E g))_j where
    // E = chi - e Id: certified by exact polynomial interpolation in the
    // eigenvalues at rational mu samples
    let d = ChiDerivation::new(1, 0);
    let mut g = ChiBlock::new(1);
    g.push(vec![1, 0], vec![], rf(3));
    g.push(vec![0, 1], vec![], rf(-2));
    let e = RatFn::from_q(q(1, 2));

    let mut rng = SampleRng::new(11);
    for _ in 0..10 {
        let assign: BTreeMap<Sym, Q> = vec![(mu_sym(1), rng.small_q())].into_iter().collect();
        // exponent-basis data of g at the sample
        let mut v: BTreeMap<Vec<u32>, RatFn> = BTreeMap::new();
        for ((m, _), c) in &g.terms {
            for (mp, cc) in exponent_expansion(m) {
                let entry = v.entry(mp).or_insert_with(RatFn::zero);
                *entry = entry.add(&c.mul(&cc));
            }
        }
        let basis: Vec<(Q, Q)> = v
            .iter()
            .map(|(mp, c)| {
                (
                    d.eigenvalue(mp, &[]).eval(&assign).unwrap(),
                    c.eval(&assign).unwrap(),
                )
            })
            .collect();
        let ev = e.as_q().unwrap();
        // interpolation: P(e_i) = 1/(e_i - e); then sum_j P_j chi^j(Eg) = g
        let evals: Vec<Q> = basis.iter().map(|(a, _)| a.clone()).collect();
        let k = invert_vdm(&evals).unwrap();
        let n = evals.len();
        // c_j = sum_i K[i][j] / (e_i - e)
        let cj: Vec<Q> = (0..n)
            .map(|j| {
                let mut s = Q::zero();
                for i in 0..n {
                    s += &k[i][j] / (&evals[i] - &ev);
                }
                s
            })
            .collect();
        // verify: for each basis element, sum_j c_j e_i^j (e_i - e) = 1
        for (ei, vi) in &basis {
            if vi.is_zero() {
                continue;
            }
            let mut s = Q::zero();
            let mut p = Q::one();
            for c in &cj {
                s += c * &p;
                p *= ei;
            }
            s *= ei - &ev;
            assert_eq!(s, Q::one());
        }
    }
}

#[test]
fn chisum_matches_block_derivation() {
    // expanding then deriving equals deriving then expanding
    let d = ChiDerivation::new(2, 0);
    let mut b = ChiBlock::new(2);
    b.push(vec![1, 1, 0], vec![], rf(2));
    b.push(vec![0, 0, 2], vec![], rf(-3));
    b.push(vec![2, 0, 0], vec![], rf(1));
    let lhs = ChiSum::from_block(&d, &chi_apply(&d, &b));
    let rhs = ChiSum::from_block(&d, &b).chi_apply(&d);
    assert_eq!(lhs, rhs);
}
