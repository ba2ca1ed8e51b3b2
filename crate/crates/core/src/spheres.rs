//! The odd quantum sphere generators and the verification suites.
//!
//! The generator family lives in the convolution algebra of the ambient
//! groupoid: `Y₁` is the diagonal `q^(w₁+…+wₙ)` carrying one global ℤ mode,
//! and for `2 ≤ m ≤ n+1` the generator `Yₘ` acts on slot `j = n+2−m`
//! (1-based) as a weighted lowering shift with `q`-power weights in the
//! slots before it:
//!
//! ```text
//! Y₁ = (z=1, x=0)        ↦ q^(w₁+…+wₙ)
//! Yₘ = (z=1, x=−e_j)     ↦ q^(w₁+…+w_{j−1}) · √(1 − q^(2 w_j)).
//! ```
//!
//! The suites check, symbolically first and numerically second:
//!
//! - the single-factor relations of the weighted-shift/diagonal pair
//!   ([`check_su2q_relations`]),
//! - the sphere relations `Σ Yₘ*Yₘ = 1` and slot-ordered `q`-commutation
//!   ([`check_sphere_relations`]),
//! - the face-restriction formulas and the pullback identities
//!   ([`check_lemma_restrictions`]),
//! - the support/invariance characterization of words
//!   ([`check_theorem_support`]),
//! - the subgroupoid set identities by exhaustive window scans
//!   ([`check_set_identities`]),
//! - the boundary-vanishing ideal and richness of the interior corner
//!   ([`check_exactness`]),
//! - a structural `q`-independence proxy ([`check_q_independence_proxy`]).
//!
//! Every symbolic `ProvablyZero` claim is shadowed by a matrix residual, so
//! the two oracles can never silently disagree.

use crate::algebra::{pi_pullback_boundary_family, AlgebraElement, AlgebraError, Certificate};
use crate::coeff::{CoeffExpr, ZeroStatus, PROBE_Q};
use crate::groupoid::{enumerate_window, GroupoidError};
use crate::rep::{gram_rank, to_matrix, RepError, ReprConfig, TruncatedMatrix};
use crate::report::{CheckItem, CheckReport, CheckStatus, Witness};
use crate::rng::Lcg64;
use num_complex::Complex64;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SphereError {
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("cannot parse word: {0}")]
    WordParse(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// Sampled angles for the ℤ-mode phases; fixed to guard against
/// angle-special accidents without blowing up runtime.
pub const ANGLES: [f64; 3] = [
    0.0,
    std::f64::consts::TAU / 7.0,
    std::f64::consts::FRAC_PI_2,
];

/// The `n+1` sphere generators at deformation parameter `q`.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    pub n: usize,
    pub q: f64,
    /// `y[m-1]` is the generator `Yₘ`, `1 ≤ m ≤ n+1`.
    pub y: Vec<AlgebraElement>,
}

/// Construct the generator family.
pub fn build_generators(n: usize, q: f64) -> Result<GeneratorSet, SphereError> {
    if n < 1 {
        return Err(SphereError::BadParameter("n must be at least 1".into()));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(SphereError::BadParameter(format!(
            "q must lie in (0,1), got {q}"
        )));
    }
    let mut y = Vec::with_capacity(n + 1);
    let full_diag = CoeffExpr::prod((0..n).map(|j| CoeffExpr::pow(j, 1, 0)).collect());
    y.push(AlgebraElement::monomial(n, 1, vec![0; n], &full_diag)?);
    for m in 2..=n + 1 {
        let j = n + 1 - m; // 0-based acting slot
        let mut x = vec![0i64; n];
        x[j] = -1;
        let mut factors: Vec<CoeffExpr> = (0..j).map(|l| CoeffExpr::pow(l, 1, 0)).collect();
        factors.push(CoeffExpr::sqrt(j, 0));
        y.push(AlgebraElement::monomial(n, 1, x, &CoeffExpr::prod(factors))?);
    }
    Ok(GeneratorSet { n, q, y })
}

impl GeneratorSet {
    /// The generator `Yₘ` (1-based).
    pub fn generator(&self, m: usize) -> &AlgebraElement {
        &self.y[m - 1]
    }

    /// The generator acting on 1-based slot `s` (`s = n+1` is the diagonal).
    pub fn by_slot(&self, s: usize) -> &AlgebraElement {
        self.generator(self.n + 2 - s)
    }

    /// All letters for word building: generators then adjoints.
    pub fn letters(&self) -> Vec<(String, AlgebraElement)> {
        let mut out = Vec::with_capacity(2 * (self.n + 1));
        for (i, g) in self.y.iter().enumerate() {
            out.push((format!("Y{}", i + 1), g.clone()));
        }
        for (i, g) in self.y.iter().enumerate() {
            out.push((format!("Y{}*", i + 1), g.adjoint()));
        }
        out
    }
}

/// All words of length ≤ `max_len` in the generators and their adjoints,
/// including the empty word, as (label, element) pairs.
pub fn words_up_to(
    gens: &GeneratorSet,
    max_len: usize,
) -> Result<Vec<(String, AlgebraElement)>, SphereError> {
    let letters = gens.letters();
    let mut out = vec![("1".to_string(), AlgebraElement::unit(gens.n))];
    let mut frontier = vec![out[0].clone()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(frontier.len() * letters.len());
        for (label, el) in &frontier {
            for (lname, lel) in &letters {
                let nlabel = if label == "1" {
                    lname.clone()
                } else {
                    format!("{label} {lname}")
                };
                next.push((nlabel, el.convolve(lel)?));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    Ok(out)
}

/// Parse a whitespace-separated word like `"Y1 Y2* Y3"`; `"1"` or the empty
/// string denote the unit.
pub fn parse_word(gens: &GeneratorSet, text: &str) -> Result<AlgebraElement, SphereError> {
    let mut el = AlgebraElement::unit(gens.n);
    for tok in text.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let (body, star) = match tok.strip_suffix('*') {
            Some(b) => (b, true),
            None => (tok, false),
        };
        let m: usize = body
            .strip_prefix('Y')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| SphereError::WordParse(format!("bad token `{tok}`")))?;
        if m < 1 || m > gens.n + 1 {
            return Err(SphereError::WordParse(format!(
                "generator index {m} out of range 1..={}",
                gens.n + 1
            )));
        }
        let g = gens.generator(m);
        let letter = if star { g.adjoint() } else { g.clone() };
        el = el.convolve(&letter)?;
    }
    Ok(el)
}

/// The last-face automorphism on algebra elements supported there:
/// `x_n ↦ x_n − z − Σ_{i<n} x_i`, coefficients unchanged.
pub fn phi_map(f: &AlgebraElement) -> Result<AlgebraElement, SphereError> {
    let n = f.n();
    let last = n - 1;
    if !f.faces().contains(&last) {
        return Err(SphereError::BadParameter(
            "phi_map needs an element supported on the last face".into(),
        ));
    }
    let mut out = AlgebraElement::zero(n);
    for (s, nf) in f.terms() {
        let mut x = s.x.clone();
        let head: i64 = x[..last].iter().sum();
        x[last] -= s.z + head;
        out = out.add(&AlgebraElement::monomial(n, s.z, x, &nf.to_expr())?)?;
    }
    let mut pinned = out;
    for &j in f.faces() {
        pinned = pinned.rho_face(j);
    }
    Ok(pinned)
}

/// Embed an element of the (n−1)-dimensional algebra into the last face of
/// the n-dimensional one: append a zero shift component and pin the slot.
pub fn embed_from_lower(f: &AlgebraElement) -> Result<AlgebraElement, SphereError> {
    if !f.faces().is_empty() {
        return Err(SphereError::BadParameter(
            "embed_from_lower expects a global element".into(),
        ));
    }
    let n = f.n() + 1;
    let mut out = AlgebraElement::zero(n);
    for (s, nf) in f.terms() {
        let mut x = s.x.clone();
        x.push(0);
        out = out.add(&AlgebraElement::monomial(n, s.z, x, &nf.to_expr())?)?;
    }
    Ok(out.rho_face(n - 1))
}

fn timed(mut item: CheckItem, t0: Instant) -> CheckItem {
    item.wall_ms = t0.elapsed().as_millis() as u64;
    item
}

fn status_of(sym: ZeroStatus, residual: f64, tol: f64) -> CheckStatus {
    match sym {
        ZeroStatus::ProvablyZero if residual < tol => CheckStatus::Pass,
        ZeroStatus::Unknown => CheckStatus::Unknown,
        _ => CheckStatus::Fail,
    }
}

fn angle_cfg(n: usize, cutoff: usize, q: f64, angle: f64) -> Result<ReprConfig, RepError> {
    ReprConfig::new(n, cutoff, q, angle, vec![angle; n])
}

/// Max interior-column residual of `Σᵢ lhsᵢ·rhsᵢ − target`, with the factor
/// products taken as genuine truncated matrix products.
fn product_residual(
    pairs: &[(AlgebraElement, AlgebraElement)],
    target: Option<&AlgebraElement>,
    n: usize,
    cutoff: usize,
    q: f64,
    bandwidth: usize,
) -> Result<f64, SphereError> {
    let mut worst = 0.0f64;
    for &angle in &ANGLES {
        let cfg = angle_cfg(n, cutoff, q, angle)?;
        let mut acc = TruncatedMatrix::zeros(cfg.clone());
        for (a, b) in pairs {
            let ma = to_matrix(a, &cfg)?;
            let mb = to_matrix(b, &cfg)?;
            acc = acc.add(&ma.mul(&mb)?)?;
        }
        if let Some(t) = target {
            acc = acc.sub(&to_matrix(t, &cfg)?)?;
        }
        let mask = cfg.interior_mask(bandwidth)?;
        worst = worst.max(acc.max_abs_on_columns(&mask));
    }
    Ok(worst)
}

/// Single-factor consistency of the chosen weighted-shift convention:
/// `αα* + γγ* = 1`, `α*α + q²γ*γ = 1`, `γα = qαγ`, `γγ* = γ*γ`.
pub fn check_su2q_relations(q: f64, cutoff: usize) -> Result<CheckReport, SphereError> {
    let mut report = CheckReport::new("su2q", serde_json::json!({ "q": q, "N": cutoff }));
    let alpha_star = AlgebraElement::monomial(1, 0, vec![-1], &CoeffExpr::sqrt(0, 0))?;
    let alpha = alpha_star.adjoint();
    let gamma = AlgebraElement::monomial(1, 0, vec![0], &CoeffExpr::pow(0, 1, 0))?;
    let gamma_star = gamma.adjoint();
    let unit = AlgebraElement::unit(1);
    let tol = 1e-12;

    // αα* + γγ* − 1
    let t0 = Instant::now();
    let sym = alpha
        .convolve(&alpha_star)?
        .add(&gamma.convolve(&gamma_star)?)?
        .equal_status(&unit)?;
    let num = product_residual(
        &[
            (alpha.clone(), alpha_star.clone()),
            (gamma.clone(), gamma_star.clone()),
        ],
        Some(&unit),
        1,
        cutoff,
        q,
        1,
    )?;
    report.push(timed(
        CheckItem::new("su2q.aa_star_plus_gg_star", status_of(sym, num, tol)).with_residual(num),
        t0,
    ));

    // α*α + q²γ*γ − 1
    let t0 = Instant::now();
    let lhs = alpha_star
        .convolve(&alpha)?
        .add(&gamma_star.convolve(&gamma)?.scale_qpow(2))?;
    let sym = lhs.equal_status(&unit)?;
    let mut num = 0.0f64;
    for &angle in &ANGLES {
        let cfg = angle_cfg(1, cutoff, q, angle)?;
        let m = to_matrix(&alpha_star, &cfg)?
            .mul(&to_matrix(&alpha, &cfg)?)?
            .add(
                &to_matrix(&gamma_star, &cfg)?
                    .mul(&to_matrix(&gamma, &cfg)?)?
                    .scale(Complex64::new(q * q, 0.0)),
            )?
            .sub(&to_matrix(&unit, &cfg)?)?;
        num = num.max(m.max_abs_on_columns(&cfg.interior_mask(1)?));
    }
    report.push(timed(
        CheckItem::new("su2q.a_star_a_plus_q2_g_star_g", status_of(sym, num, tol))
            .with_residual(num),
        t0,
    ));

    // γα − q·αγ
    let t0 = Instant::now();
    let sym = gamma
        .convolve(&alpha)?
        .sub(&alpha.convolve(&gamma)?.scale_qpow(1))?
        .equal_status(&AlgebraElement::zero(1))?;
    let mut num = 0.0f64;
    for &angle in &ANGLES {
        let cfg = angle_cfg(1, cutoff, q, angle)?;
        let m = to_matrix(&gamma, &cfg)?
            .mul(&to_matrix(&alpha, &cfg)?)?
            .sub(
                &to_matrix(&alpha, &cfg)?
                    .mul(&to_matrix(&gamma, &cfg)?)?
                    .scale(Complex64::new(q, 0.0)),
            )?;
        num = num.max(m.max_abs_on_columns(&cfg.interior_mask(1)?));
    }
    report.push(timed(
        CheckItem::new("su2q.ga_eq_q_ag", status_of(sym, num, tol)).with_residual(num),
        t0,
    ));

    // γγ* − γ*γ
    let t0 = Instant::now();
    let sym = gamma
        .convolve(&gamma_star)?
        .sub(&gamma_star.convolve(&gamma)?)?
        .equal_status(&AlgebraElement::zero(1))?;
    let num = product_residual(
        &[
            (gamma.clone(), gamma_star.clone()),
            (
                gamma_star.scale_const(Complex64::new(-1.0, 0.0)),
                gamma.clone(),
            ),
        ],
        None,
        1,
        cutoff,
        q,
        1,
    )?;
    report.push(timed(
        CheckItem::new("su2q.gg_star_comm", status_of(sym, num, tol)).with_residual(num),
        t0,
    ));

    Ok(report)
}

/// Sphere relations: `Σ Yₘ*Yₘ = 1` exactly, plus slot-ordered
/// `q`-commutation of the generator family.
pub fn check_sphere_relations(n: usize, q: f64, cutoff: usize) -> Result<CheckReport, SphereError> {
    let gens = build_generators(n, q)?;
    let mut report = CheckReport::new("sphere", serde_json::json!({ "n": n, "q": q, "N": cutoff }));
    let unit = AlgebraElement::unit(n);
    let tol = 1e-12;

    let t0 = Instant::now();
    let mut sum = AlgebraElement::zero(n);
    let mut pairs = Vec::new();
    for g in &gens.y {
        sum = sum.add(&g.adjoint().convolve(g)?)?;
        pairs.push((g.adjoint(), g.clone()));
    }
    let sym = sum.equal_status(&unit)?;
    let num = product_residual(&pairs, Some(&unit), n, cutoff, q, 1)?;
    report.push(timed(
        CheckItem::new("sphere.sum_ystar_y", status_of(sym, num, tol)).with_residual(num),
        t0,
    ));

    // slot-ordered q-commutation: A_s A_t = q A_t A_s for slots s < t
    for s in 1..=n + 1 {
        for t in s + 1..=n + 1 {
            let t0 = Instant::now();
            let a = gens.by_slot(s).clone();
            let b = gens.by_slot(t).clone();
            let sym = a
                .convolve(&b)?
                .sub(&b.convolve(&a)?.scale_qpow(1))?
                .equal_status(&AlgebraElement::zero(n))?;
            let mut num = 0.0f64;
            for &angle in &ANGLES {
                let cfg = angle_cfg(n, cutoff, q, angle)?;
                let ma = to_matrix(&a, &cfg)?;
                let mb = to_matrix(&b, &cfg)?;
                let m = ma
                    .mul(&mb)?
                    .sub(&mb.mul(&ma)?.scale(Complex64::new(q, 0.0)))?;
                num = num.max(m.max_abs_on_columns(&cfg.interior_mask(1)?));
            }
            report.push(timed(
                CheckItem::new(format!("sphere.q_comm[{s},{t}]"), status_of(sym, num, tol))
                    .with_residual(num),
                t0,
            ));
        }
    }

    Ok(report)
}

/// The face-restriction formulas and the quotient pullback identities.
pub fn check_lemma_restrictions(n: usize, q: f64) -> Result<CheckReport, SphereError> {
    if n < 2 {
        return Err(SphereError::BadParameter(
            "the restriction suite needs n at least 2".into(),
        ));
    }
    let gens = build_generators(n, q)?;
    let mut report = CheckReport::new("lemma", serde_json::json!({ "n": n, "q": q }));
    let last = n - 1;
    let shadow_cutoff = 6;

    for i in 1..n {
        // 1-based face index i < n; 0-based slot
        let i0 = i - 1;

        // (a) vanishing: ρ_i(Yₘ) = 0 for m ≤ n+1−i
        let t0 = Instant::now();
        let mut ok = true;
        for m in 1..=n + 1 - i {
            let r = gens.generator(m).rho_face(i0);
            ok &= r.is_zero();
        }
        report.push(timed(
            CheckItem::new(
                format!("lemma.vanish[i={i}]"),
                if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            ),
            t0,
        ));

        // (b) the surviving generator becomes a pure circle mode over the
        // face, times the diagonal in the earlier slots
        let t0 = Instant::now();
        let m = n + 2 - i;
        let mut x = vec![0i64; n];
        x[i0] = -1;
        let diag = if i0 == 0 {
            CoeffExpr::one()
        } else {
            CoeffExpr::prod((0..i0).map(|l| CoeffExpr::pow(l, 1, 0)).collect())
        };
        let expected = AlgebraElement::monomial(n, 1, x, &diag)?.rho_face(i0);
        let sym = gens.generator(m).rho_face(i0).equal_status(&expected)?;
        report.push(timed(
            CheckItem::new(
                format!("lemma.circle[i={i}]"),
                if sym == ZeroStatus::ProvablyZero {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
            ),
            t0,
        ));

        // (c) the remaining generators restrict to tensors `a ⊗ 1`: no
        // dependence on slots ≥ i and no last-slot shift
        let t0 = Instant::now();
        let mut ok = true;
        for m in n + 3 - i..=n + 1 {
            let r = gens.generator(m).rho_face(i0);
            for (s, nf) in r.terms() {
                ok &= s.x[last] == 0;
                ok &= !nf.has_slot_geq(i0);
            }
        }
        report.push(timed(
            CheckItem::new(
                format!("lemma.tensor[i={i}]"),
                if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            ),
            t0,
        ));

        // (d) the corner pullback inverts the corner restriction on all
        // restricted words of length ≤ 3
        let t0 = Instant::now();
        let mut status = CheckStatus::Pass;
        let mut witness = None;
        for (label, w) in words_up_to(&gens, 3)? {
            let f = w.rho_face(i0);
            let back = f.rho_face(last).pi_pullback_ni(i0)?;
            match back.equal_status(&f)? {
                ZeroStatus::ProvablyZero => {}
                other => {
                    status = CheckStatus::Fail;
                    witness = Some(Witness::Note {
                        text: format!("word {label}: difference status {other:?}"),
                    });
                    break;
                }
            }
        }
        let mut item = CheckItem::new(format!("lemma.pi_rho_id[i={i}]"), status);
        if let Some(w) = witness {
            item = item.with_witness(w);
        }
        report.push(timed(item, t0));

        // numeric shadow: the represented face block of a generator equals
        // the representation of its restriction
        let t0 = Instant::now();
        let mut worst = 0.0f64;
        for &angle in &ANGLES {
            let cfg = angle_cfg(n, shadow_cutoff, q, angle)?;
            let block: Vec<usize> = (0..cfg.dim())
                .filter(|&idx| cfg.unit_at(idx).in_face(i0))
                .collect();
            for g in &gens.y {
                let full = to_matrix(g, &cfg)?;
                let restricted = to_matrix(&g.rho_face(i0), &cfg)?;
                worst = worst.max(full.sub(&restricted)?.max_abs_on_block(&block));
            }
        }
        report.push(timed(
            CheckItem::new(
                format!("lemma.face_block[i={i}]"),
                if worst < 1e-12 {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Fail
                },
            )
            .with_residual(worst),
            t0,
        ));
    }

    // (e) the boundary family is recovered from its last-face component
    let t0 = Instant::now();
    let mut status = CheckStatus::Pass;
    let mut witness = None;
    'outer: for (label, w) in words_up_to(&gens, 3)? {
        let family = w.rho_boundary();
        let rebuilt = pi_pullback_boundary_family(family.rho_n_boundary())?;
        for i in 0..n {
            match rebuilt.component(i).equal_status(family.component(i))? {
                ZeroStatus::ProvablyZero => {}
                other => {
                    status = CheckStatus::Fail;
                    witness = Some(Witness::Note {
                        text: format!("word {label}, face {i}: difference status {other:?}"),
                    });
                    break 'outer;
                }
            }
        }
        // and the other composition is the identity on the last face
        let f = family.rho_n_boundary();
        if rebuilt.rho_n_boundary().equal_status(f)? != ZeroStatus::ProvablyZero {
            status = CheckStatus::Fail;
            witness = Some(Witness::Note {
                text: format!("word {label}: last-face roundtrip failed"),
            });
            break;
        }
    }
    let mut item = CheckItem::new("lemma.boundary_iso", status);
    if let Some(w) = witness {
        item = item.with_witness(w);
    }
    report.push(timed(item, t0));

    Ok(report)
}

/// Support and ∼-invariance of all short words, with a negative control.
pub fn check_theorem_support(
    n: usize,
    q: f64,
    max_len: usize,
    seed: u64,
) -> Result<CheckReport, SphereError> {
    let gens = build_generators(n, q)?;
    let mut report = CheckReport::new(
        "theorem",
        serde_json::json!({ "n": n, "q": q, "L": max_len, "seed": seed }),
    );

    let t0 = Instant::now();
    let words = words_up_to(&gens, max_len)?;
    let mut status = CheckStatus::Pass;
    let mut witness = None;
    for (label, w) in &words {
        match w.support_subset_ftilde() {
            Certificate::Certified => {}
            Certificate::Refuted(wit) => {
                status = CheckStatus::Fail;
                let coeff = w
                    .coefficient(&wit.element.shift)
                    .map(|nf| format!("{nf}"));
                witness = Some(Witness::Element {
                    element: wit.element,
                    abs: wit.value.norm(),
                    coefficient: coeff,
                });
                break;
            }
            Certificate::Unknown => {
                status = CheckStatus::Unknown;
                witness = Some(Witness::Note {
                    text: format!("word {label}: support certificate unknown"),
                });
                break;
            }
        }
        match w.sim_invariant()? {
            Certificate::Certified => {}
            Certificate::Refuted(wit) => {
                status = CheckStatus::Fail;
                let coeff = w.coefficient(&wit.a.shift).map(|nf| format!("{nf}"));
                witness = Some(Witness::Pair {
                    a: wit.a,
                    b: wit.b,
                    value_a: wit.value_a.norm(),
                    value_b: wit.value_b.norm(),
                    coefficient: coeff,
                });
                break;
            }
            Certificate::Unknown => {
                status = CheckStatus::Unknown;
                witness = Some(Witness::Note {
                    text: format!("word {label}: invariance certificate unknown"),
                });
                break;
            }
        }
    }
    let mut item = CheckItem::new("theorem.words_certified", status);
    if let Some(w) = witness {
        item = item.with_witness(w);
    }
    report.push(timed(item, t0));

    // negative control: a bare ℤ-mode cannot live on the subgroupoid
    let t0 = Instant::now();
    let control = AlgebraElement::monomial(n, 1, vec![0; n], &CoeffExpr::one())?;
    let item = match control.support_subset_ftilde() {
        Certificate::Refuted(wit) => {
            let coeff = control
                .coefficient(&wit.element.shift)
                .map(|nf| format!("{nf}"));
            CheckItem::new("theorem.negative_control", CheckStatus::Pass)
                .with_residual(wit.value.norm())
                .with_witness(Witness::Element {
                    element: wit.element,
                    abs: wit.value.norm(),
                    coefficient: coeff,
                })
        }
        other => CheckItem::new("theorem.negative_control", CheckStatus::Fail).with_witness(
            Witness::Note {
                text: format!("expected refutation, got {other:?}"),
            },
        ),
    };
    report.push(timed(item, t0));

    // seeded window scan: sampled words evaluate below tolerance at sampled
    // window elements outside the subgroupoid
    let t0 = Instant::now();
    let mut rng = Lcg64::new(seed);
    let outside: Vec<_> = enumerate_window(n, 2, 2, 2)?
        .into_iter()
        .filter(|g| !g.in_ftilde())
        .collect();
    let mut worst = 0.0f64;
    if !outside.is_empty() {
        for _ in 0..2000 {
            let (_, w) = rng.choose(&words);
            let g = rng.choose(&outside);
            let q_probe = *rng.choose(&PROBE_Q);
            worst = worst.max(w.value_at(g, q_probe)?.norm());
        }
    }
    report.push(timed(
        CheckItem::new(
            "theorem.window_scan",
            if worst < 1e-10 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_residual(worst),
        t0,
    ));

    Ok(report)
}

/// Exhaustive window verification of the subgroupoid set identities.
pub fn check_set_identities(
    n: usize,
    z_max: i64,
    x_max: i64,
    cutoff: i64,
) -> Result<CheckReport, SphereError> {
    if n < 2 {
        return Err(SphereError::BadParameter(
            "the set-identity scan needs n at least 2".into(),
        ));
    }
    let mut report = CheckReport::new(
        "sets",
        serde_json::json!({ "n": n, "zmax": z_max, "xmax": x_max, "N": cutoff }),
    );
    let window = enumerate_window(n, z_max, x_max, cutoff)?;
    let last = n - 1;

    // (a) membership in the primed set is exactly the image of the lower
    // embedded subgroupoid under the last-face automorphism
    let t0 = Instant::now();
    let mut scanned = 0usize;
    let mut mismatches = 0usize;
    for g in &window {
        if !g.w.in_face(last) {
            if g.in_ftilde_prime() {
                mismatches += 1;
            }
            continue;
        }
        scanned += 1;
        let preimage = g.phi_star_inv()?;
        if g.in_ftilde_prime() != preimage.in_ftilde_lower_embedded() {
            mismatches += 1;
        }
    }
    report.push(timed(
        CheckItem::new(
            "sets.prime_phi_image",
            if mismatches == 0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_witness(Witness::Note {
            text: format!("scanned={scanned}, mismatches={mismatches}"),
        }),
        t0,
    ));

    // (b) the double-primed set is the full preimage of the primed set
    // under the boundary quotient map
    let t0 = Instant::now();
    let mut scanned = 0usize;
    let mut mismatches = 0usize;
    for g in &window {
        if !g.w.in_boundary() {
            continue;
        }
        scanned += 1;
        let mapped = g.pi_n_boundary()?;
        if g.in_ftilde_doubleprime() != mapped.in_ftilde_prime() {
            mismatches += 1;
        }
    }
    report.push(timed(
        CheckItem::new(
            "sets.doubleprime_preimage",
            if mismatches == 0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_witness(Witness::Note {
            text: format!("scanned={scanned}, mismatches={mismatches}"),
        }),
        t0,
    ));

    // (c) saturation keeps the double-primed set stable
    let t0 = Instant::now();
    let mut scanned = 0usize;
    let mut mismatches = 0usize;
    for g in &window {
        if !g.in_ftilde_doubleprime() {
            continue;
        }
        scanned += 1;
        if !g.canonicalize()?.in_ftilde_doubleprime() {
            mismatches += 1;
        }
    }
    report.push(timed(
        CheckItem::new(
            "sets.canonicalize_closed",
            if mismatches == 0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_witness(Witness::Note {
            text: format!("scanned={scanned}, mismatches={mismatches}"),
        }),
        t0,
    ));

    Ok(report)
}

/// Membership of the masked word matrices' span: orthonormalize, then
/// report the worst least-squares residual over all finite matrix units.
fn ideal_richness_residual(q: f64, theta: f64) -> Result<f64, SphereError> {
    let cutoff = 2usize;
    let gens = build_generators(1, q)?;
    let cfg = ReprConfig::new(1, cutoff, q, theta, vec![theta])?;
    let letters: Vec<TruncatedMatrix> = {
        let mut v = Vec::new();
        for g in &gens.y {
            v.push(to_matrix(g, &cfg)?);
            v.push(to_matrix(&g.adjoint(), &cfg)?);
        }
        v
    };
    let fin: Vec<usize> = (0..cfg.dim())
        .filter(|&i| !cfg.unit_at(i).in_boundary())
        .collect();
    let k = fin.len();
    let vectorize = |m: &TruncatedMatrix| -> Vec<Complex64> {
        let mut v = Vec::with_capacity(k * k);
        for &r in &fin {
            for &c in &fin {
                v.push(m.get(r, c));
            }
        }
        v
    };
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let norm = |a: &[Complex64]| -> f64 { inner(a, a).re.max(0.0).sqrt() };

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let absorb = |vec: Vec<Complex64>, basis: &mut Vec<Vec<Complex64>>| {
        let mut v = vec;
        for b in basis.iter() {
            let c = inner(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 {
            for x in v.iter_mut() {
                *x /= nv;
            }
            basis.push(v);
        }
    };

    // breadth-first over word matrices (products of letter matrices)
    let mut frontier = vec![TruncatedMatrix::identity(cfg.clone())];
    absorb(vectorize(&frontier[0]), &mut basis);
    for _len in 1..=8 {
        if basis.len() == k * k {
            break;
        }
        let mut next = Vec::with_capacity(frontier.len() * letters.len());
        for m in &frontier {
            for l in &letters {
                let prod = m.mul(l)?;
                absorb(vectorize(&prod), &mut basis);
                next.push(prod);
            }
        }
        frontier = next;
    }

    let mut worst = 0.0f64;
    for a in 0..k {
        for b in 0..k {
            let mut v = vec![Complex64::new(0.0, 0.0); k * k];
            v[a * k + b] = Complex64::new(1.0, 0.0);
            for bb in &basis {
                let c = inner(bb, &v);
                for (x, y) in v.iter_mut().zip(bb) {
                    *x -= c * y;
                }
            }
            worst = worst.max(norm(&v));
        }
    }
    Ok(worst)
}

/// The exact-sequence shadow: ideal membership, boundary compatibility of
/// word families, and interior richness of the compact corner.
pub fn check_exactness(n: usize, q: f64, cutoff: usize) -> Result<CheckReport, SphereError> {
    let gens = build_generators(n, q)?;
    let mut report = CheckReport::new(
        "exactness",
        serde_json::json!({ "n": n, "q": q, "N": cutoff }),
    );

    // Y₁·Y₁* lies in the boundary-vanishing ideal
    let t0 = Instant::now();
    let y1 = gens.generator(1);
    let prod = y1.convolve(&y1.adjoint())?;
    let cert = prod.vanishes_on_boundary();
    let mut worst = 0.0f64;
    for &angle in &ANGLES {
        let cfg = angle_cfg(n, cutoff.min(4), q, angle)?;
        let m = to_matrix(&prod, &cfg)?;
        let boundary: Vec<usize> = (0..cfg.dim())
            .filter(|&i| cfg.unit_at(i).in_boundary())
            .collect();
        worst = worst.max(m.max_abs_on_columns(&boundary));
    }
    report.push(timed(
        CheckItem::new(
            "exact.ideal_member_y1y1star",
            if cert.is_certified() && worst < 1e-12 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_residual(worst),
        t0,
    ));

    // negative control: an element with a surviving boundary value
    let t0 = Instant::now();
    let control = if n == 1 {
        gens.generator(2).clone()
    } else {
        let mut sum = AlgebraElement::zero(n);
        for g in &gens.y {
            sum = sum.add(&g.convolve(&g.adjoint())?)?;
        }
        AlgebraElement::unit(n).sub(&sum)?
    };
    let item = match control.vanishes_on_boundary() {
        Certificate::Refuted(w) => {
            let coeff = control
                .coefficient(&w.element.shift)
                .map(|nf| format!("{}", nf.restrict_inf(w.slot)));
            CheckItem::new("exact.negative_control", CheckStatus::Pass)
                .with_residual(w.value.norm())
                .with_witness(Witness::Element {
                    element: w.element,
                    abs: w.value.norm(),
                    coefficient: coeff,
                })
        }
        other => CheckItem::new("exact.negative_control", CheckStatus::Fail).with_witness(
            Witness::Note {
                text: format!("expected refutation, got {other:?}"),
            },
        ),
    };
    report.push(timed(item, t0));

    // boundary families of short words are compatible on overlaps
    let t0 = Instant::now();
    let mut ok = true;
    for (_, w) in words_up_to(&gens, 3)? {
        ok &= w.rho_boundary().compatible();
    }
    report.push(timed(
        CheckItem::new(
            "exact.boundary_compatible",
            if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        ),
        t0,
    ));

    // interior richness of the one-dimensional corner
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for &angle in &ANGLES {
        worst = worst.max(ideal_richness_residual(q, angle)?);
    }
    report.push(timed(
        CheckItem::new(
            "exact.ideal_richness",
            if worst < 1e-8 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_residual(worst),
        t0,
    ));

    Ok(report)
}

/// Default Gram-rank threshold: the genuine spectral directions of the
/// masked word spans decay like q-powers of the window (relative size down
/// to ~1e-11 at q = 0.3 on the pinned configurations), while the f64 noise
/// floor of these small Gram matrices sits near 1e-14; the threshold lives
/// on the plateau between the two.
pub const GRAM_RANK_TOL: f64 = 1e-12;

/// Structural q-independence proxy: equal Gram ranks of masked word spans
/// and identical support patterns at two deformation parameters.
pub fn check_q_independence_proxy(
    n: usize,
    q1: f64,
    q2: f64,
    max_len: usize,
    cutoff: usize,
    tol: f64,
) -> Result<CheckReport, SphereError> {
    if q1 == q2 {
        return Err(SphereError::BadParameter("q1 and q2 must differ".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(SphereError::BadParameter("tolerance must be positive".into()));
    }
    let mut report = CheckReport::new(
        "qindep",
        serde_json::json!({ "n": n, "q1": q1, "q2": q2, "L": max_len, "N": cutoff, "tol": tol }),
    );

    let t0 = Instant::now();
    let theta = ANGLES[1];
    let mut ranks = Vec::new();
    let mut patterns: Vec<Vec<Vec<String>>> = Vec::new();
    for &q in &[q1, q2] {
        let gens = build_generators(n, q)?;
        let words = words_up_to(&gens, max_len)?;
        let cfg = ReprConfig::new(n, cutoff, q, theta, vec![theta; n])?;
        let mask = cfg.interior_mask(max_len.min(cutoff / 2))?;
        let mats: Vec<TruncatedMatrix> = words
            .iter()
            .map(|(_, w)| to_matrix(w, &cfg))
            .collect::<Result<_, _>>()?;
        ranks.push(gram_rank(&mats, &mask, tol)?);
        // which shifts carry numerically visible coefficients at this q
        let mut pat = Vec::with_capacity(words.len());
        for (_, w) in &words {
            let mut shifts = Vec::new();
            for (s, nf) in w.terms() {
                let visible = probe_units(n)
                    .iter()
                    .any(|u| nf.eval(u, q).map(|v| v.norm() > 1e-9).unwrap_or(false));
                if visible {
                    shifts.push(format!("{s}"));
                }
            }
            pat.push(shifts);
        }
        patterns.push(pat);
    }
    report.push(timed(
        CheckItem::new(
            "qindep.gram_rank",
            if ranks[0] == ranks[1] {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
        )
        .with_witness(Witness::Note {
            text: format!("rank(q={q1})={}, rank(q={q2})={}", ranks[0], ranks[1]),
        }),
        t0,
    ));

    let t0 = Instant::now();
    let same = patterns[0] == patterns[1];
    report.push(timed(
        CheckItem::new(
            "qindep.support_pattern",
            if same { CheckStatus::Pass } else { CheckStatus::Fail },
        ),
        t0,
    ));

    Ok(report)
}

fn probe_units(n: usize) -> Vec<crate::groupoid::Unit> {
    use crate::coeff::PROBE_W;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        out.push(crate::groupoid::Unit::new(
            idx.iter().map(|&i| PROBE_W[i]).collect(),
        ));
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < PROBE_W.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffExpr as E;
    use crate::groupoid::Shift;

    #[test]
    fn generator_shapes() {
        // n = 1: diagonal with ℤ mode, and the weighted lowering shift
        let g1 = build_generators(1, 0.5).unwrap();
        assert_eq!(g1.y.len(), 2);
        let y1 = AlgebraElement::monomial(1, 1, vec![0], &E::pow(0, 1, 0)).unwrap();
        let y2 = AlgebraElement::monomial(1, 1, vec![-1], &E::sqrt(0, 0)).unwrap();
        assert_eq!(g1.generator(1), &y1);
        assert_eq!(g1.generator(2), &y2);

        // n = 2, m = 2 acts on the last slot with one diagonal factor
        let g2 = build_generators(2, 0.5).unwrap();
        let y22 = AlgebraElement::monomial(
            2,
            1,
            vec![0, -1],
            &E::prod(vec![E::pow(0, 1, 0), E::sqrt(1, 0)]),
        )
        .unwrap();
        assert_eq!(g2.generator(2), &y22);
        // n = 2, m = 3 acts on the first slot with no diagonal factor
        let y23 =
            AlgebraElement::monomial(2, 1, vec![-1, 0], &E::prod(vec![E::sqrt(0, 0)])).unwrap();
        assert_eq!(g2.generator(3), &y23);

        assert!(build_generators(0, 0.5).is_err());
        assert!(build_generators(1, 1.0).is_err());
    }

    #[test]
    fn generators_have_single_terms_and_certificates() {
        for n in 1..=3 {
            let gens = build_generators(n, 0.5).unwrap();
            for g in &gens.y {
                assert_eq!(g.num_terms(), 1);
                assert!(g.support_subset_ftilde().is_certified());
                assert!(g.sim_invariant().unwrap().is_certified());
            }
        }
    }

    #[test]
    fn word_enumeration_counts() {
        // 2(n+1) letters: 1 + 6 + 36 + 216 + 1296 for n = 2, length 4
        let gens = build_generators(2, 0.5).unwrap();
        assert_eq!(words_up_to(&gens, 4).unwrap().len(), 1555);
        let gens3 = build_generators(3, 0.5).unwrap();
        assert_eq!(words_up_to(&gens3, 3).unwrap().len(), 585);
    }

    #[test]
    fn word_band_growth() {
        let gens = build_generators(2, 0.5).unwrap();
        for (label, w) in words_up_to(&gens, 3).unwrap() {
            let len = if label == "1" {
                0
            } else {
                label.split_whitespace().count()
            };
            assert!(w.band() <= len as i64, "band of {label} exceeds length");
            assert!(w.num_terms() <= 1, "words are single products");
        }
    }

    #[test]
    fn su2q_suite_passes() {
        let report = check_su2q_relations(0.5, 8).unwrap();
        assert!(report.passed, "{}", report.to_json_pretty());
        assert!(report.max_residual() < 1e-12);
        assert_eq!(report.checks.len(), 4);
    }

    #[test]
    fn sphere_suite_passes_small() {
        for n in 1..=3 {
            let report = check_sphere_relations(n, 0.5, 6).unwrap();
            assert!(report.passed, "{}", report.to_json_pretty());
            // unit sum plus one q-commutation item per slot pair
            assert_eq!(report.checks.len(), 1 + (n + 1) * n / 2);
        }
    }

    #[test]
    fn lemma_suite_passes_n2() {
        let report = check_lemma_restrictions(2, 0.5).unwrap();
        assert!(report.passed, "{}", report.to_json_pretty());
        assert!(check_lemma_restrictions(1, 0.5).is_err());
    }

    #[test]
    fn theorem_suite_small() {
        let report = check_theorem_support(2, 0.5, 2, 7).unwrap();
        assert!(report.passed, "{}", report.to_json_pretty());
        let control = report.find("theorem.negative_control").unwrap();
        assert!(control.witness.is_some());
    }

    #[test]
    fn set_identities_small_windows() {
        let report = check_set_identities(2, 2, 2, 2).unwrap();
        assert!(report.passed, "{}", report.to_json_pretty());
        assert!(check_set_identities(1, 2, 2, 2).is_err());
    }

    #[test]
    fn exactness_small() {
        let report = check_exactness(2, 0.5, 4).unwrap();
        assert!(report.passed, "{}", report.to_json_pretty());
    }

    #[test]
    fn qindep_small() {
        let report = check_q_independence_proxy(1, 0.3, 0.7, 2, 6, GRAM_RANK_TOL).unwrap();
        assert!(report.passed, "{}", report.to_json_pretty());
        assert!(check_q_independence_proxy(1, 0.5, 0.5, 2, 6, GRAM_RANK_TOL).is_err());
    }

    #[test]
    fn parse_word_round_trip() {
        let gens = build_generators(2, 0.5).unwrap();
        let w = parse_word(&gens, "Y1 Y2*").unwrap();
        let manual = gens
            .generator(1)
            .convolve(&gens.generator(2).adjoint())
            .unwrap();
        assert_eq!(w, manual);
        assert_eq!(parse_word(&gens, "").unwrap(), AlgebraElement::unit(2));
        assert_eq!(parse_word(&gens, "1").unwrap(), AlgebraElement::unit(2));
        assert!(parse_word(&gens, "Y9").is_err());
        assert!(parse_word(&gens, "Z1").is_err());
    }

    #[test]
    fn phi_transport_matches_restricted_generators() {
        // the (n−1)-generator family, embedded into the last face and pushed
        // through the automorphism, is exactly the restriction of the
        // n-dimensional family (with the first generator dying)
        for n in 2..=3usize {
            let q = 0.4;
            let hi = build_generators(n, q).unwrap();
            let lo = build_generators(n - 1, q).unwrap();
            let last = n - 1;
            assert!(hi.generator(1).rho_face(last).is_zero());
            for m in 1..=n {
                let transported = phi_map(&embed_from_lower(lo.generator(m)).unwrap()).unwrap();
                let restricted = hi.generator(m + 1).rho_face(last);
                assert_eq!(
                    transported.equal_status(&restricted).unwrap(),
                    ZeroStatus::ProvablyZero,
                    "transport mismatch at n={n}, m={m}"
                );
            }
        }
    }

    /// The *-algebra laws hold with provably zero differences over every
    /// letter pair and triple: associativity, anti-multiplicativity of the
    /// involution, distributivity.
    #[test]
    fn star_algebra_laws_on_letters() {
        let gens = build_generators(2, 0.5).unwrap();
        let letters: Vec<AlgebraElement> = gens.letters().into_iter().map(|(_, e)| e).collect();
        for a in &letters {
            for b in &letters {
                let ab = a.convolve(b).unwrap();
                // (ab)* = b* a*
                let lhs = ab.adjoint();
                let rhs = b.adjoint().convolve(&a.adjoint()).unwrap();
                assert_eq!(lhs.equal_status(&rhs).unwrap(), ZeroStatus::ProvablyZero);
                for c in &letters {
                    // (ab)c = a(bc)
                    let l = ab.convolve(c).unwrap();
                    let r = a.convolve(&b.convolve(c).unwrap()).unwrap();
                    assert_eq!(l.equal_status(&r).unwrap(), ZeroStatus::ProvablyZero);
                    // a(b + c) = ab + ac
                    let dl = a.convolve(&b.add(c).unwrap()).unwrap();
                    let dr = ab.add(&a.convolve(c).unwrap()).unwrap();
                    assert_eq!(dl.equal_status(&dr).unwrap(), ZeroStatus::ProvablyZero);
                }
            }
        }
    }

    /// The represented symbolic sum Σ Yₘ*Yₘ is the identity matrix: every
    /// eigenvalue is 1 to machine precision.
    #[test]
    fn unit_sum_spectrum_is_flat() {
        use crate::rep::{hermitian_spectrum, to_matrix, ReprConfig};
        let gens = build_generators(2, 0.5).unwrap();
        let mut sum = AlgebraElement::zero(2);
        for g in &gens.y {
            sum = sum.add(&g.adjoint().convolve(g).unwrap()).unwrap();
        }
        let cfg = ReprConfig::new(2, 4, 0.5, ANGLES[1], vec![ANGLES[1]; 2]).unwrap();
        let m = to_matrix(&sum, &cfg).unwrap();
        for v in hermitian_spectrum(&m).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qindep_trivial_word_length() {
        // only the unit word: rank 1 at both parameters
        let report = check_q_independence_proxy(1, 0.3, 0.7, 0, 6, GRAM_RANK_TOL).unwrap();
        assert!(report.passed);
        let note = report.find("qindep.gram_rank").unwrap();
        if let Some(crate::report::Witness::Note { text }) = &note.witness {
            assert!(text.contains("rank(q=0.3)=1") && text.contains("rank(q=0.7)=1"));
        } else {
            panic!("missing rank note");
        }
    }

    /// Generator coefficients converge to their face restriction as a slot
    /// grows: |c(w_j = K) − restrict(c)(w)| < 1e-10.  K = 256 keeps the
    /// bound valid up to q = 0.9 (the q-power tail is ~q^K).
    #[test]
    fn coefficients_continuous_at_infinity() {
        use crate::groupoid::{ExtNat, Unit};
        for n in 1..=3usize {
            let gens = build_generators(n, 0.5).unwrap();
            for g in &gens.y {
                for (_, nf) in g.terms() {
                    for j in 0..n {
                        let restricted = nf.restrict_inf(j);
                        for &q in &[0.3, 0.5, 0.9] {
                            for k in [256i64, 400] {
                                let w = Unit::new(
                                    (0..n)
                                        .map(|l| if l == j { ExtNat::fin(k) } else { ExtNat::fin(2) })
                                        .collect(),
                                );
                                let a = nf.eval(&w, q).unwrap();
                                let b = restricted.eval(&w, q).unwrap();
                                assert!(
                                    (a - b).norm() < 1e-10,
                                    "slot {j} of {nf} at K={k}, q={q}: |{a} - {b}|"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn phi_map_shifts_last_component() {
        let f = AlgebraElement::monomial(2, 1, vec![2, 0], &E::pow(0, 1, 0))
            .unwrap()
            .rho_face(1);
        let mapped = phi_map(&f).unwrap();
        let (s, _) = mapped.terms().next().unwrap();
        assert_eq!(s, &Shift::new(1, vec![2, -3]));
    }
}
