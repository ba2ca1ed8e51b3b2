//! Acceptance suite: one test per criterion, each printing a single
//! `[PASS]`/`[FAIL]` line (run with `--nocapture` to see them on success).
//!
//! Every identity is established twice: exactly, through the coefficient
//! normal form, and numerically, through truncated matrix representations.
//! Tolerances are pinned here and nowhere else.

use num_complex::Complex64;
use qsphere_core::algebra::AlgebraElement;
use qsphere_core::coeff::{CoeffExpr, ZeroStatus};
use qsphere_core::groupoid::{enumerate_window, CanonicalClass, ExtNat, GroupoidElement, Unit};
use qsphere_core::rep::{to_matrix, ReprConfig, TruncatedMatrix};
use qsphere_core::report::CheckStatus;
use qsphere_core::rng::Lcg64;
use qsphere_core::spheres::{
    build_generators, check_exactness, check_lemma_restrictions, check_q_independence_proxy,
    check_set_identities, check_sphere_relations, check_su2q_relations, check_theorem_support,
    ANGLES, GRAM_RANK_TOL,
};
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str, t0: Instant) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!(
        "[{tag}] {criterion}: {detail} ({:.2} s)",
        t0.elapsed().as_secs_f64()
    );
    pass
}

#[test]
fn crit1_sphere_unit_identity() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut worst = 0.0f64;
    for n in 1..=3usize {
        for &q in &[0.3, 0.5, 0.9] {
            let gens = build_generators(n, q).unwrap();
            // exact identity
            let mut sum = AlgebraElement::zero(n);
            for g in &gens.y {
                sum = sum.add(&g.adjoint().convolve(g).unwrap()).unwrap();
            }
            let sym = sum.equal_status(&AlgebraElement::unit(n)).unwrap();
            pass &= sym == ZeroStatus::ProvablyZero;
            // numeric oracle: Σ M(Yₘ)*M(Yₘ) − I on interior columns at N=10
            for &angle in &ANGLES {
                let cfg = ReprConfig::new(n, 10, q, angle, vec![angle; n]).unwrap();
                let mut acc = TruncatedMatrix::zeros(cfg.clone());
                for g in &gens.y {
                    let m = to_matrix(g, &cfg).unwrap();
                    acc = acc.add(&m.adjoint().mul(&m).unwrap()).unwrap();
                }
                let diff = acc
                    .sub(&TruncatedMatrix::identity(cfg.clone()))
                    .unwrap();
                let mask = cfg.interior_mask(1).unwrap();
                worst = worst.max(diff.max_abs_on_columns(&mask));
            }
        }
    }
    pass &= worst < 1e-12;
    let elapsed_ok = t0.elapsed().as_secs_f64() < 30.0;
    let ok = report(
        "criterion 1 (sphere unit identity)",
        pass && elapsed_ok,
        &format!("n in 1..3, q in {{0.3,0.5,0.9}}, max matrix residual {worst:.2e}"),
        t0,
    );
    assert!(ok);
}

#[test]
fn crit2_factor_relations() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut worst = 0.0f64;
    for &q in &[0.3, 0.5, 0.9] {
        let rep = check_su2q_relations(q, 20).unwrap();
        pass &= rep.passed;
        worst = worst.max(rep.max_residual());
    }
    pass &= worst < 1e-12;
    let elapsed_ok = t0.elapsed().as_secs_f64() < 5.0;
    let ok = report(
        "criterion 2 (factor relations)",
        pass && elapsed_ok,
        &format!("four relations at N=20, max residual {worst:.2e}"),
        t0,
    );
    assert!(ok);
}

#[test]
fn crit3_theorem_support() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut witness_line = String::new();
    for (n, len) in [(2usize, 4usize), (3, 3)] {
        let rep = check_theorem_support(n, 0.5, len, 20240813).unwrap();
        pass &= rep.passed;
        let control = rep.find("theorem.negative_control").unwrap();
        pass &= control.status == CheckStatus::Pass;
        if let Some(w) = &control.witness {
            witness_line = format!("control witness {}", serde_json::to_string(w).unwrap());
        }
    }
    println!("    {witness_line}");
    let elapsed_ok = t0.elapsed().as_secs_f64() < 120.0;
    let ok = report(
        "criterion 3 (support characterization)",
        pass && elapsed_ok,
        &format!("words certified for n=2 (len 4), n=3 (len 3); {witness_line}"),
        t0,
    );
    assert!(ok);
}

#[test]
fn crit4_lemma_suite() {
    let t0 = Instant::now();
    let mut pass = true;
    for n in 2..=3usize {
        for &q in &[0.3, 0.5] {
            let rep = check_lemma_restrictions(n, q).unwrap();
            if !rep.passed {
                eprintln!("{}", rep.to_json_pretty());
            }
            pass &= rep.passed;
        }
    }
    let elapsed_ok = t0.elapsed().as_secs_f64() < 60.0;
    let ok = report(
        "criterion 4 (restriction suite)",
        pass && elapsed_ok,
        "items (a)-(e) symbolic for n in {2,3}",
        t0,
    );
    assert!(ok);
}

#[test]
fn crit5_set_identities() {
    let t0 = Instant::now();
    let mut pass = true;
    for (n, b, cutoff) in [(2usize, 3i64, 3i64), (3, 2, 2)] {
        let rep = check_set_identities(n, b, b, cutoff).unwrap();
        if !rep.passed {
            eprintln!("{}", rep.to_json_pretty());
        }
        pass &= rep.passed;
    }
    let elapsed_ok = t0.elapsed().as_secs_f64() < 120.0;
    let ok = report(
        "criterion 5 (subgroupoid set identities)",
        pass && elapsed_ok,
        "exhaustive windows n=2 (|z|,|x|<=3, N=3) and n=3 (|z|,|x|<=2, N=2), zero mismatches",
        t0,
    );
    assert!(ok);
}

#[test]
fn crit6_quotient_soundness() {
    let t0 = Instant::now();
    let mut rng = Lcg64::new(6);
    // pool of subgroupoid elements over a window, grouped for composability
    let pool: Vec<GroupoidElement> = enumerate_window(2, 2, 2, 3)
        .unwrap()
        .into_iter()
        .filter(|g| g.in_ftilde())
        .collect();
    let classes: Vec<CanonicalClass> = pool.iter().map(|g| CanonicalClass::new(g).unwrap()).collect();
    let mut failures = 0usize;
    let mut samples = 0usize;

    let pick_composable_with = |rng: &mut Lcg64, src: &Unit| -> Option<CanonicalClass> {
        for _ in 0..50 {
            let c = rng.choose(&classes);
            if c.range_class() == *src {
                return Some(c.clone());
            }
        }
        None
    };

    // random de-saturation of a canonical representative
    let desaturate = |rng: &mut Lcg64, g: &GroupoidElement| -> GroupoidElement {
        let Some(first) = g.w.first_inf() else {
            return g.clone();
        };
        let coords: Vec<ExtNat> = g
            .w
            .coords()
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if j > first && rng.next_range(0, 1) == 0 {
                    ExtNat::fin(rng.next_range(0, 5))
                } else {
                    c
                }
            })
            .collect();
        g.with_source(Unit::new(coords)).unwrap()
    };

    while samples < 10_000 {
        let a = rng.choose(&classes).clone();
        // inverse laws
        let left = a.compose(&a.inverse());
        let right = a.inverse().compose(&a);
        match (left, right) {
            (Ok(l), Ok(r)) => {
                if !(l.is_unit()
                    && r.is_unit()
                    && l.source_class() == a.range_class()
                    && r.source_class() == a.source_class())
                {
                    failures += 1;
                }
            }
            _ => failures += 1,
        }
        samples += 1;

        // representative independence of the quotient product
        if let Some(b) = pick_composable_with(&mut rng, &a.source_class()) {
            let expected = a.compose(&b).unwrap();
            let h = desaturate(&mut rng, b.rep());
            assert!(h.in_ftilde(), "de-saturation left the subgroupoid");
            let g = a.rep().with_source(h.range()).unwrap();
            assert!(g.in_ftilde(), "unit adjustment left the subgroupoid");
            let raw = g.compose(&h).unwrap();
            if CanonicalClass::new(&raw).unwrap() != expected {
                failures += 1;
            }
            samples += 1;

            // associativity on a composable triple
            if let Some(c) = pick_composable_with(&mut rng, &b.source_class()) {
                let lhs = a.compose(&b).unwrap().compose(&c).unwrap();
                let rhs = a.compose(&b.compose(&c).unwrap()).unwrap();
                if lhs != rhs {
                    failures += 1;
                }
                samples += 1;
            }
        }
    }
    let pass = failures == 0;
    let elapsed_ok = t0.elapsed().as_secs_f64() < 30.0;
    let ok = report(
        "criterion 6 (quotient soundness)",
        pass && elapsed_ok,
        &format!("{samples} seeded samples, {failures} failures"),
        t0,
    );
    assert!(ok);
}

#[test]
fn crit7_exactness_shadow() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut richness = 0.0f64;
    for &q in &[0.3, 0.5] {
        let rep = check_exactness(2, q, 6).unwrap();
        if !rep.passed {
            eprintln!("{}", rep.to_json_pretty());
        }
        pass &= rep.passed;
        richness = richness.max(rep.find("exact.ideal_richness").unwrap().residual.unwrap());
    }
    pass &= richness < 1e-8;
    let elapsed_ok = t0.elapsed().as_secs_f64() < 60.0;
    let ok = report(
        "criterion 7 (exactness shadow)",
        pass && elapsed_ok,
        &format!("ideal membership, boundary compatibility, matrix-unit recovery residual {richness:.2e}"),
        t0,
    );
    assert!(ok);
}

#[test]
fn crit8_q_independence() {
    let t0 = Instant::now();
    let mut pass = true;
    for (n, len, cutoff) in [(1usize, 3usize, 8usize), (2, 2, 5)] {
        let rep = check_q_independence_proxy(n, 0.3, 0.7, len, cutoff, GRAM_RANK_TOL).unwrap();
        if !rep.passed {
            eprintln!("{}", rep.to_json_pretty());
        }
        pass &= rep.passed;
    }
    let elapsed_ok = t0.elapsed().as_secs_f64() < 60.0;
    let ok = report(
        "criterion 8 (q-independence proxy)",
        pass && elapsed_ok,
        "equal Gram ranks and identical support patterns at q=0.3 vs q=0.7",
        t0,
    );
    assert!(ok);
}

#[test]
fn crit9_oracle_coherence() {
    let t0 = Instant::now();
    let mut pass = true;

    // Across the suites: certified identities never exceed 1e-10
    // numerically, refuted controls are visibly nonzero.
    let reports = [
        check_su2q_relations(0.5, 10).unwrap(),
        check_sphere_relations(2, 0.5, 8).unwrap(),
        check_lemma_restrictions(2, 0.5).unwrap(),
        check_exactness(2, 0.5, 6).unwrap(),
        check_theorem_support(2, 0.5, 3, 11).unwrap(),
    ];
    for rep in &reports {
        pass &= rep.passed;
        for item in &rep.checks {
            if let Some(r) = item.residual {
                let is_control = item.name.contains("negative_control");
                if item.status == CheckStatus::Pass && !is_control && !item.name.contains("richness")
                {
                    pass &= r < 1e-10;
                }
                if is_control {
                    // refuted witnesses must be numerically visible
                    pass &= r > 1e-10;
                }
            }
        }
    }

    // Interior-agreement contract on 10³ seeded random convolution pairs.
    let mut rng = Lcg64::new(99);
    let mut worst = 0.0f64;
    let random_element = |rng: &mut Lcg64, n: usize| -> AlgebraElement {
        let mut el = AlgebraElement::zero(n);
        for _ in 0..=rng.next_range(0, 1) {
            let z = rng.next_range(-1, 1);
            let x: Vec<i64> = (0..n).map(|_| rng.next_range(-2, 2)).collect();
            let coeff = match rng.next_range(0, 3) {
                0 => CoeffExpr::pow(
                    rng.next_range(0, n as i64 - 1) as usize,
                    rng.next_range(1, 2) as u32,
                    rng.next_range(-1, 1),
                ),
                1 => CoeffExpr::sqrt(rng.next_range(0, n as i64 - 1) as usize, rng.next_range(0, 2)),
                2 => CoeffExpr::ind(rng.next_range(0, n as i64 - 1) as usize, rng.next_range(1, 2)),
                _ => CoeffExpr::constant(Complex64::new(
                    rng.next_range(-2, 2) as f64,
                    rng.next_range(-1, 1) as f64,
                )),
            };
            el = el
                .add(&AlgebraElement::monomial(n, z, x, &coeff).unwrap())
                .unwrap();
        }
        el
    };
    for i in 0..1000 {
        let n = 1 + (i % 2);
        let f = random_element(&mut rng, n);
        let g = random_element(&mut rng, n);
        let conv = f.convolve(&g).unwrap();
        let b = f.band().max(g.band()).max(1) as usize;
        let q = 0.3 + 0.6 * rng.next_f64();
        let cfg = ReprConfig::new(n, 8, q, ANGLES[1], vec![ANGLES[2]; n]).unwrap();
        let lhs = to_matrix(&conv, &cfg).unwrap();
        let rhs = to_matrix(&f, &cfg)
            .unwrap()
            .mul(&to_matrix(&g, &cfg).unwrap())
            .unwrap();
        let mask = cfg.interior_mask(b).unwrap();
        worst = worst.max(lhs.sub(&rhs).unwrap().max_abs_on_columns(&mask));
    }
    pass &= worst < 1e-12;

    let ok = report(
        "criterion 9 (oracle coherence)",
        pass,
        &format!("symbolic/numeric agreement across suites; interior agreement residual {worst:.2e} over 1000 pairs"),
        t0,
    );
    assert!(ok);
}
