//! Symbolic, ∞-aware scalar functions on the unit space.
//!
//! The coefficient language is a small closed grammar over four kinds of
//! atoms, each a function of one unit coordinate `w_j` and the deformation
//! parameter `q ∈ (0,1)`:
//!
//! | atom            | value at finite `w_j = k`      | value at `w_j = ∞` |
//! |-----------------|--------------------------------|--------------------|
//! | `Pow(j, e, o)`  | `q^(e·(k + o))`                | `0`                |
//! | `Sqrt(j, o)`    | `√(1 − q^(2(k + o)))`, clamped | `1`                |
//! | `Ind(j, m)`     | `1` if `k ≥ m` else `0`        | `1`                |
//! | `QPow(t)`       | `q^t`                          | `q^t`              |
//!
//! plus complex constants, sums and products.  `Sqrt` clamps the radicand at
//! zero, so an offset pushed below its domain evaluates to `0` rather than
//! producing a NaN; the [`shift`](CoeffExpr::shift) operation additionally
//! guards such terms with an indicator, which keeps the clamped region
//! formally zero as well.
//!
//! Every expression has a normal form ([`NormalForm`]): a sum of monomials,
//! each a Laurent polynomial in `q` times at most one `q^(d·w_j)` power per
//! slot, a set of distinct square-root atoms, and merged indicator bounds.
//! Repeated square roots are eliminated by
//!
//! ```text
//! Sqrt(j,o)² = [w_j ≥ −o] · (1 − q^(2o) · q^(2 w_j)),
//! ```
//!
//! and an indicator is dropped whenever a square-root factor already forces
//! the monomial to vanish on the indicated region.  An empty normal form is
//! a proof of vanishing; this is the only way the crate ever certifies that
//! an identity holds.

use crate::groupoid::{ExtNat, Unit};
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("slot {slot} out of range for dimension {n}")]
    SlotOutOfRange { slot: usize, n: usize },
}

/// Outcome of a zero test.  Only `ProvablyZero` certifies anything; an
/// `Unknown` must be treated as a failure by every caller that wants to
/// assert vanishing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroStatus {
    ProvablyZero,
    ProvablyNonzero,
    Unknown,
}

/// Probe values used by numeric zero refutation, fixed for reproducibility.
pub const PROBE_W: [ExtNat; 5] = [
    ExtNat::Fin(0),
    ExtNat::Fin(1),
    ExtNat::Fin(2),
    ExtNat::Fin(5),
    ExtNat::Inf,
];
pub const PROBE_Q: [f64; 3] = [0.3, 0.5, 0.9];
const NONZERO_THRESHOLD: f64 = 1e-9;

/// A symbolic coefficient expression.
#[derive(Debug, Clone, PartialEq)]
pub enum CoeffExpr {
    Const(Complex64),
    /// `q^t`, independent of the unit.
    QPow(i64),
    /// `(q^(w_slot + offset))^exp` with `exp ≥ 1`.
    Pow { slot: usize, exp: u32, offset: i64 },
    /// `√(1 − q^(2(w_slot + offset)))`, clamped at zero below the domain.
    Sqrt { slot: usize, offset: i64 },
    /// Indicator of `w_slot ≥ min`.
    Ind { slot: usize, min: i64 },
    Sum(Vec<CoeffExpr>),
    Prod(Vec<CoeffExpr>),
}

impl CoeffExpr {
    pub fn zero() -> CoeffExpr {
        CoeffExpr::Const(Complex64::new(0.0, 0.0))
    }

    pub fn one() -> CoeffExpr {
        CoeffExpr::Const(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: impl Into<Complex64>) -> CoeffExpr {
        CoeffExpr::Const(c.into())
    }

    pub fn qpow(t: i64) -> CoeffExpr {
        CoeffExpr::QPow(t)
    }

    pub fn pow(slot: usize, exp: u32, offset: i64) -> CoeffExpr {
        assert!(exp >= 1, "Pow exponent must be at least 1");
        CoeffExpr::Pow { slot, exp, offset }
    }

    pub fn sqrt(slot: usize, offset: i64) -> CoeffExpr {
        CoeffExpr::Sqrt { slot, offset }
    }

    pub fn ind(slot: usize, min: i64) -> CoeffExpr {
        CoeffExpr::Ind { slot, min }
    }

    pub fn sum(terms: Vec<CoeffExpr>) -> CoeffExpr {
        CoeffExpr::Sum(terms)
    }

    pub fn prod(factors: Vec<CoeffExpr>) -> CoeffExpr {
        CoeffExpr::Prod(factors)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> CoeffExpr {
        CoeffExpr::Prod(vec![CoeffExpr::constant(-1.0), self])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: CoeffExpr, b: CoeffExpr) -> CoeffExpr {
        CoeffExpr::Sum(vec![a, b.neg()])
    }

    /// Largest slot referenced, if any.
    pub fn max_slot(&self) -> Option<usize> {
        match self {
            CoeffExpr::Const(_) | CoeffExpr::QPow(_) => None,
            CoeffExpr::Pow { slot, .. }
            | CoeffExpr::Sqrt { slot, .. }
            | CoeffExpr::Ind { slot, .. } => Some(*slot),
            CoeffExpr::Sum(v) | CoeffExpr::Prod(v) => v.iter().filter_map(|e| e.max_slot()).max(),
        }
    }

    /// ∞-aware evaluation at a unit.
    pub fn eval(&self, w: &Unit, q: f64) -> Result<Complex64, CoeffError> {
        let slot_val = |slot: usize| -> Result<ExtNat, CoeffError> {
            if slot < w.len() {
                Ok(w.get(slot))
            } else {
                Err(CoeffError::SlotOutOfRange { slot, n: w.len() })
            }
        };
        Ok(match self {
            CoeffExpr::Const(c) => *c,
            CoeffExpr::QPow(t) => Complex64::new(q.powi(*t as i32), 0.0),
            CoeffExpr::Pow { slot, exp, offset } => match slot_val(*slot)? {
                ExtNat::Inf => Complex64::new(0.0, 0.0),
                ExtNat::Fin(k) => Complex64::new(q.powi((*exp as i64 * (k + offset)) as i32), 0.0),
            },
            CoeffExpr::Sqrt { slot, offset } => match slot_val(*slot)? {
                ExtNat::Inf => Complex64::new(1.0, 0.0),
                ExtNat::Fin(k) => {
                    let r = 1.0 - q.powi((2 * (k + offset)) as i32);
                    Complex64::new(r.max(0.0).sqrt(), 0.0)
                }
            },
            CoeffExpr::Ind { slot, min } => match slot_val(*slot)? {
                ExtNat::Inf => Complex64::new(1.0, 0.0),
                ExtNat::Fin(k) => Complex64::new(if k >= *min { 1.0 } else { 0.0 }, 0.0),
            },
            CoeffExpr::Sum(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    acc += t.eval(w, q)?;
                }
                acc
            }
            CoeffExpr::Prod(factors) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors {
                    acc *= f.eval(w, q)?;
                }
                acc
            }
        })
    }

    /// Precompose with `w ↦ w + x`.  Square roots whose offset drops below
    /// zero pick up an indicator guard for their domain.
    pub fn shift(&self, x: &[i64]) -> CoeffExpr {
        match self {
            CoeffExpr::Const(_) | CoeffExpr::QPow(_) => self.clone(),
            CoeffExpr::Pow { slot, exp, offset } => CoeffExpr::Pow {
                slot: *slot,
                exp: *exp,
                offset: offset + x[*slot],
            },
            CoeffExpr::Sqrt { slot, offset } => {
                let o = offset + x[*slot];
                if o < 0 {
                    CoeffExpr::Prod(vec![
                        CoeffExpr::Ind { slot: *slot, min: -o },
                        CoeffExpr::Sqrt { slot: *slot, offset: o },
                    ])
                } else {
                    CoeffExpr::Sqrt { slot: *slot, offset: o }
                }
            }
            CoeffExpr::Ind { slot, min } => CoeffExpr::Ind {
                slot: *slot,
                min: min - x[*slot],
            },
            CoeffExpr::Sum(v) => CoeffExpr::Sum(v.iter().map(|e| e.shift(x)).collect()),
            CoeffExpr::Prod(v) => CoeffExpr::Prod(v.iter().map(|e| e.shift(x)).collect()),
        }
    }

    /// Substitute `w_i = ∞` symbolically; the result has no slot-`i` atoms.
    pub fn restrict_inf(&self, i: usize) -> CoeffExpr {
        match self {
            CoeffExpr::Const(_) | CoeffExpr::QPow(_) => self.clone(),
            CoeffExpr::Pow { slot, .. } if *slot == i => CoeffExpr::zero(),
            CoeffExpr::Sqrt { slot, .. } if *slot == i => CoeffExpr::one(),
            CoeffExpr::Ind { slot, .. } if *slot == i => CoeffExpr::one(),
            CoeffExpr::Pow { .. } | CoeffExpr::Sqrt { .. } | CoeffExpr::Ind { .. } => self.clone(),
            CoeffExpr::Sum(v) => CoeffExpr::Sum(v.iter().map(|e| e.restrict_inf(i)).collect()),
            CoeffExpr::Prod(v) => CoeffExpr::Prod(v.iter().map(|e| e.restrict_inf(i)).collect()),
        }
    }

    /// Complex conjugate (all atoms are real-valued; only constants change).
    pub fn conj(&self) -> CoeffExpr {
        match self {
            CoeffExpr::Const(c) => CoeffExpr::Const(c.conj()),
            CoeffExpr::Sum(v) => CoeffExpr::Sum(v.iter().map(|e| e.conj()).collect()),
            CoeffExpr::Prod(v) => CoeffExpr::Prod(v.iter().map(|e| e.conj()).collect()),
            _ => self.clone(),
        }
    }

    pub fn normalize(&self) -> NormalForm {
        NormalForm::from_expr(self)
    }

    pub fn is_zero(&self) -> ZeroStatus {
        let n = self.max_slot().map_or(0, |s| s + 1);
        self.normalize().zero_status(n)
    }

    pub fn equal(&self, other: &CoeffExpr) -> ZeroStatus {
        CoeffExpr::sub(self.clone(), other.clone()).is_zero()
    }
}

fn is_exact_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

/// A Laurent polynomial in `q` with complex coefficients: the scalar part of
/// a normal-form monomial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QPoly(BTreeMap<i64, Complex64>);

impl QPoly {
    pub fn zero() -> QPoly {
        QPoly(BTreeMap::new())
    }

    pub fn term(t: i64, c: Complex64) -> QPoly {
        let mut m = BTreeMap::new();
        if !is_exact_zero(c) {
            m.insert(t, c);
        }
        QPoly(m)
    }

    pub fn one() -> QPoly {
        QPoly::term(0, Complex64::new(1.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_assign(&mut self, other: &QPoly) {
        for (&t, &c) in &other.0 {
            let e = self.0.entry(t).or_insert_with(|| Complex64::new(0.0, 0.0));
            *e += c;
            if is_exact_zero(*e) {
                self.0.remove(&t);
            }
        }
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        let mut out = QPoly::zero();
        for (&t1, &c1) in &self.0 {
            for (&t2, &c2) in &other.0 {
                out.add_assign(&QPoly::term(t1 + t2, c1 * c2));
            }
        }
        out
    }

    pub fn neg(&self) -> QPoly {
        QPoly(self.0.iter().map(|(&t, &c)| (t, -c)).collect())
    }

    pub fn conj(&self) -> QPoly {
        QPoly(self.0.iter().map(|(&t, &c)| (t, c.conj())).collect())
    }

    pub fn scale(&self, c: Complex64) -> QPoly {
        if is_exact_zero(c) {
            return QPoly::zero();
        }
        QPoly(self.0.iter().map(|(&t, &a)| (t, a * c)).collect())
    }

    /// Multiply by `q^t`.
    pub fn shift_exp(&self, t: i64) -> QPoly {
        QPoly(self.0.iter().map(|(&e, &c)| (e + t, c)).collect())
    }

    pub fn eval(&self, q: f64) -> Complex64 {
        self.0
            .iter()
            .map(|(&t, &c)| c * q.powi(t as i32))
            .sum()
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        for (i, (&t, &c)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let cs = fmt_complex(c);
            if t == 0 {
                write!(f, "{cs}")?;
            } else if cs == "1" {
                write!(f, "q^{t}")?;
            } else if cs == "-1" {
                write!(f, "-q^{t}")?;
            } else {
                write!(f, "{cs}*q^{t}")?;
            }
        }
        Ok(())
    }
}

fn fmt_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}i", c.im)
    } else if c.im < 0.0 {
        format!("({}{}i)", c.re, c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

/// Signature of a normal-form monomial: merged powers, distinct square-root
/// atoms, and indicator bounds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonoKey {
    /// slot → degree d, meaning `q^(d·w_slot)`; degrees are ≥ 1.
    pub pow: BTreeMap<usize, u32>,
    /// distinct `(slot, offset)` square-root atoms.
    pub sqrt: BTreeSet<(usize, i64)>,
    /// slot → strongest lower bound `m ≥ 1`.
    pub ind: BTreeMap<usize, i64>,
}

impl MonoKey {
    fn unit() -> MonoKey {
        MonoKey {
            pow: BTreeMap::new(),
            sqrt: BTreeSet::new(),
            ind: BTreeMap::new(),
        }
    }

    pub fn slots(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.pow.keys().copied().collect();
        s.extend(self.sqrt.iter().map(|&(j, _)| j));
        s.extend(self.ind.keys().copied());
        s
    }
}

/// Intermediate monomial with square-root multiplicities, before pair
/// reduction.
#[derive(Debug, Clone)]
struct MonoBuilder {
    pow: BTreeMap<usize, u32>,
    sqrt_counts: BTreeMap<(usize, i64), u32>,
    ind: BTreeMap<usize, i64>,
    scalar: QPoly,
}

impl MonoBuilder {
    fn merge_ind(ind: &mut BTreeMap<usize, i64>, slot: usize, min: i64) {
        if min <= 0 {
            return;
        }
        let e = ind.entry(slot).or_insert(min);
        *e = (*e).max(min);
    }

    /// Drop indicators made redundant by a square-root factor: `Sqrt(j,o)`
    /// vanishes (with clamping) on `w_j ≤ −o`, so `Ind(j,m)` with
    /// `m − 1 ≤ −o` adds nothing.
    fn drop_redundant_inds(&mut self) {
        let sqrt_counts = &self.sqrt_counts;
        self.ind.retain(|&slot, &mut m| {
            !sqrt_counts
                .iter()
                .any(|(&(j, o), &cnt)| cnt > 0 && j == slot && o <= 1 - m)
        });
    }

    /// Eliminate repeated square roots; may branch into several monomials.
    fn finalize(mut self, out: &mut NormalForm) {
        if self.scalar.is_zero() {
            return;
        }
        self.drop_redundant_inds();
        // find a repeated atom
        let pair = self
            .sqrt_counts
            .iter()
            .find(|(_, &c)| c >= 2)
            .map(|(&k, _)| k);
        match pair {
            None => {
                let key = MonoKey {
                    pow: self.pow,
                    sqrt: self
                        .sqrt_counts
                        .into_iter()
                        .filter(|&(_, c)| c > 0)
                        .map(|(k, _)| k)
                        .collect(),
                    ind: self.ind,
                };
                out.insert(key, self.scalar);
            }
            Some((slot, offset)) => {
                // Sqrt(j,o)² = [w_j ≥ −o]·(1 − q^(2o) q^(2 w_j))
                *self.sqrt_counts.get_mut(&(slot, offset)).unwrap() -= 2;
                if offset < 0 {
                    Self::merge_ind(&mut self.ind, slot, -offset);
                }
                let plain = self.clone();
                plain.finalize(out);
                let mut squared = self;
                *squared.pow.entry(slot).or_insert(0) += 2;
                squared.scalar = squared.scalar.neg().shift_exp(2 * offset);
                squared.finalize(out);
            }
        }
    }
}

/// Canonical sum-of-monomials form of a coefficient expression.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalForm(BTreeMap<MonoKey, QPoly>);

impl NormalForm {
    pub fn zero() -> NormalForm {
        NormalForm(BTreeMap::new())
    }

    pub fn one() -> NormalForm {
        let mut nf = NormalForm::zero();
        nf.insert(MonoKey::unit(), QPoly::one());
        nf
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&MonoKey, &QPoly)> {
        self.0.iter()
    }

    fn insert(&mut self, key: MonoKey, poly: QPoly) {
        if poly.is_zero() {
            return;
        }
        let slot = self.0.entry(key).or_default();
        slot.add_assign(&poly);
        let gone = slot.is_zero();
        if gone {
            // re-borrow to remove; key equality via ordering
            let dead: Vec<MonoKey> = self
                .0
                .iter()
                .filter(|(_, p)| p.is_zero())
                .map(|(k, _)| k.clone())
                .collect();
            for k in dead {
                self.0.remove(&k);
            }
        }
    }

    pub fn from_expr(e: &CoeffExpr) -> NormalForm {
        match e {
            CoeffExpr::Const(c) => {
                let mut nf = NormalForm::zero();
                nf.insert(MonoKey::unit(), QPoly::term(0, *c));
                nf
            }
            CoeffExpr::QPow(t) => {
                let mut nf = NormalForm::zero();
                nf.insert(MonoKey::unit(), QPoly::term(*t, Complex64::new(1.0, 0.0)));
                nf
            }
            CoeffExpr::Pow { slot, exp, offset } => {
                let mut nf = NormalForm::zero();
                let mut pow = BTreeMap::new();
                pow.insert(*slot, *exp);
                nf.insert(
                    MonoKey {
                        pow,
                        sqrt: BTreeSet::new(),
                        ind: BTreeMap::new(),
                    },
                    QPoly::term(*exp as i64 * offset, Complex64::new(1.0, 0.0)),
                );
                nf
            }
            CoeffExpr::Sqrt { slot, offset } => {
                let b = MonoBuilder {
                    pow: BTreeMap::new(),
                    sqrt_counts: BTreeMap::from([((*slot, *offset), 1)]),
                    ind: BTreeMap::new(),
                    scalar: QPoly::one(),
                };
                let mut nf = NormalForm::zero();
                b.finalize(&mut nf);
                nf
            }
            CoeffExpr::Ind { slot, min } => {
                let mut nf = NormalForm::zero();
                let mut ind = BTreeMap::new();
                MonoBuilder::merge_ind(&mut ind, *slot, *min);
                nf.insert(
                    MonoKey {
                        pow: BTreeMap::new(),
                        sqrt: BTreeSet::new(),
                        ind,
                    },
                    QPoly::one(),
                );
                nf
            }
            CoeffExpr::Sum(terms) => {
                let mut nf = NormalForm::zero();
                for t in terms {
                    nf.add_assign(&NormalForm::from_expr(t));
                }
                nf
            }
            CoeffExpr::Prod(factors) => {
                let mut nf = NormalForm::one();
                for f in factors {
                    nf = nf.mul(&NormalForm::from_expr(f));
                }
                nf
            }
        }
    }

    pub fn add_assign(&mut self, other: &NormalForm) {
        for (k, p) in &other.0 {
            self.insert(k.clone(), p.clone());
        }
    }

    pub fn add(&self, other: &NormalForm) -> NormalForm {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn sub(&self, other: &NormalForm) -> NormalForm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NormalForm {
        NormalForm(self.0.iter().map(|(k, p)| (k.clone(), p.neg())).collect())
    }

    pub fn conj(&self) -> NormalForm {
        NormalForm(self.0.iter().map(|(k, p)| (k.clone(), p.conj())).collect())
    }

    pub fn scale_const(&self, c: Complex64) -> NormalForm {
        let mut out = NormalForm::zero();
        for (k, p) in &self.0 {
            out.insert(k.clone(), p.scale(c));
        }
        out
    }

    /// Multiply by `q^t`.
    pub fn scale_qpow(&self, t: i64) -> NormalForm {
        NormalForm(
            self.0
                .iter()
                .map(|(k, p)| (k.clone(), p.shift_exp(t)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &NormalForm) -> NormalForm {
        let mut out = NormalForm::zero();
        for (k1, p1) in &self.0 {
            for (k2, p2) in &other.0 {
                let mut pow = k1.pow.clone();
                for (&slot, &d) in &k2.pow {
                    *pow.entry(slot).or_insert(0) += d;
                }
                let mut sqrt_counts: BTreeMap<(usize, i64), u32> = BTreeMap::new();
                for &a in k1.sqrt.iter().chain(k2.sqrt.iter()) {
                    *sqrt_counts.entry(a).or_insert(0) += 1;
                }
                let mut ind = k1.ind.clone();
                for (&slot, &m) in &k2.ind {
                    MonoBuilder::merge_ind(&mut ind, slot, m);
                }
                MonoBuilder {
                    pow,
                    sqrt_counts,
                    ind,
                    scalar: p1.mul(p2),
                }
                .finalize(&mut out);
            }
        }
        out
    }

    /// Precompose with `w ↦ w + x`.  Square roots move by pure offset
    /// arithmetic: their clamped evaluation already vanishes below the
    /// domain, so no guard is introduced here (squaring reintroduces one
    /// where the rewrite needs it).
    pub fn shift(&self, x: &[i64]) -> NormalForm {
        let mut out = NormalForm::zero();
        for (k, p) in &self.0 {
            let mut scalar = p.clone();
            for (&slot, &d) in &k.pow {
                scalar = scalar.shift_exp(d as i64 * x[slot]);
            }
            let mut sqrt_counts: BTreeMap<(usize, i64), u32> = BTreeMap::new();
            let mut ind: BTreeMap<usize, i64> = BTreeMap::new();
            for (&slot, &m) in &k.ind {
                MonoBuilder::merge_ind(&mut ind, slot, m - x[slot]);
            }
            for &(slot, o) in &k.sqrt {
                *sqrt_counts.entry((slot, o + x[slot])).or_insert(0) += 1;
            }
            MonoBuilder {
                pow: k.pow.clone(),
                sqrt_counts,
                ind,
                scalar,
            }
            .finalize(&mut out);
        }
        out
    }

    /// Drop indicators that are implied by the validity domain of a term
    /// with shift `x` (the element `(z, x, w)` only exists for
    /// `w_j ≥ −x_j`).
    pub fn strip_implied_guards(&self, x: &[i64]) -> NormalForm {
        let mut out = NormalForm::zero();
        for (k, p) in &self.0 {
            let key = MonoKey {
                pow: k.pow.clone(),
                sqrt: k.sqrt.clone(),
                ind: k
                    .ind
                    .iter()
                    .filter(|&(&j, &m)| m > (-x[j]).max(0))
                    .map(|(&j, &m)| (j, m))
                    .collect(),
            };
            out.insert(key, p.clone());
        }
        out
    }

    /// Substitute `w_i = ∞`: monomials carrying a power in slot `i` vanish,
    /// square roots and indicators there become 1.
    pub fn restrict_inf(&self, i: usize) -> NormalForm {
        let mut out = NormalForm::zero();
        for (k, p) in &self.0 {
            if k.pow.contains_key(&i) {
                continue;
            }
            let key = MonoKey {
                pow: k.pow.clone(),
                sqrt: k.sqrt.iter().filter(|&&(j, _)| j != i).copied().collect(),
                ind: k
                    .ind
                    .iter()
                    .filter(|&(&j, _)| j != i)
                    .map(|(&j, &m)| (j, m))
                    .collect(),
            };
            out.insert(key, p.clone());
        }
        out
    }

    pub fn eval(&self, w: &Unit, q: f64) -> Result<Complex64, CoeffError> {
        let mut acc = Complex64::new(0.0, 0.0);
        'mono: for (k, p) in &self.0 {
            let mut v = p.eval(q);
            for (&slot, &d) in &k.pow {
                if slot >= w.len() {
                    return Err(CoeffError::SlotOutOfRange { slot, n: w.len() });
                }
                match w.get(slot) {
                    ExtNat::Inf => continue 'mono,
                    ExtNat::Fin(kk) => v *= q.powi((d as i64 * kk) as i32),
                }
            }
            for &(slot, o) in &k.sqrt {
                if slot >= w.len() {
                    return Err(CoeffError::SlotOutOfRange { slot, n: w.len() });
                }
                if let ExtNat::Fin(kk) = w.get(slot) {
                    let r = 1.0 - q.powi((2 * (kk + o)) as i32);
                    v *= r.max(0.0).sqrt();
                }
            }
            for (&slot, &m) in &k.ind {
                if slot >= w.len() {
                    return Err(CoeffError::SlotOutOfRange { slot, n: w.len() });
                }
                if let ExtNat::Fin(kk) = w.get(slot) {
                    if kk < m {
                        continue 'mono;
                    }
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    pub fn max_slot(&self) -> Option<usize> {
        self.0
            .keys()
            .filter_map(|k| k.slots().into_iter().max())
            .max()
    }

    pub fn slots_used(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for k in self.0.keys() {
            s.extend(k.slots());
        }
        s
    }

    pub fn has_slot_geq(&self, i: usize) -> bool {
        self.slots_used().iter().any(|&s| s >= i)
    }

    pub fn zero_status(&self, n: usize) -> ZeroStatus {
        match self.refute_zero(n) {
            None if self.is_empty() => ZeroStatus::ProvablyZero,
            None => ZeroStatus::Unknown,
            Some(_) => ZeroStatus::ProvablyNonzero,
        }
    }

    /// Search the fixed probe grid for a point where the value is clearly
    /// nonzero; returns `(w, q, |value|)`.
    pub fn refute_zero(&self, n: usize) -> Option<(Unit, f64, f64)> {
        if self.is_empty() {
            return None;
        }
        let mut idx = vec![0usize; n];
        loop {
            let w = Unit::new(idx.iter().map(|&i| PROBE_W[i]).collect());
            for &q in &PROBE_Q {
                let v = self.eval(&w, q).expect("probe within dimension");
                if v.norm() > NONZERO_THRESHOLD {
                    return Some((w, q, v.norm()));
                }
            }
            if n == 0 {
                return None;
            }
            let mut pos = n;
            loop {
                if pos == 0 {
                    return None;
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

    /// Render the expression tree equivalent of this normal form.
    pub fn to_expr(&self) -> CoeffExpr {
        if self.is_empty() {
            return CoeffExpr::zero();
        }
        let mut terms = Vec::new();
        for (k, p) in &self.0 {
            let mut factors: Vec<CoeffExpr> = p
                .0
                .iter()
                .map(|(&t, &c)| {
                    if t == 0 {
                        CoeffExpr::Const(c)
                    } else {
                        CoeffExpr::Prod(vec![CoeffExpr::Const(c), CoeffExpr::QPow(t)])
                    }
                })
                .collect();
            let scalar = if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                CoeffExpr::Sum(factors)
            };
            let mut prod = vec![scalar];
            for (&slot, &d) in &k.pow {
                prod.push(CoeffExpr::pow(slot, d, 0));
            }
            for &(slot, o) in &k.sqrt {
                prod.push(CoeffExpr::Sqrt { slot, offset: o });
            }
            for (&slot, &m) in &k.ind {
                prod.push(CoeffExpr::ind(slot, m));
            }
            terms.push(if prod.len() == 1 {
                prod.pop().unwrap()
            } else {
                CoeffExpr::Prod(prod)
            });
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            CoeffExpr::Sum(terms)
        }
    }
}

impl fmt::Display for NormalForm {
    /// Deterministic rendering: monomials in key order, `R(wj+o)` for
    /// `√(1 − q^(2(w_j+o)))` and `[wj>=m]` for indicators.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, p)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let scalar = format!("{p}");
            let trivial_scalar = scalar == "1";
            let mut wrote = false;
            if !trivial_scalar || (k.pow.is_empty() && k.sqrt.is_empty() && k.ind.is_empty()) {
                if p.0.len() > 1 {
                    write!(f, "({scalar})")?;
                } else {
                    write!(f, "{scalar}")?;
                }
                wrote = true;
            }
            for (&slot, &d) in &k.pow {
                if wrote {
                    write!(f, "*")?;
                }
                if d == 1 {
                    write!(f, "q^w{slot}")?;
                } else {
                    write!(f, "q^{{{d}w{slot}}}")?;
                }
                wrote = true;
            }
            for &(slot, o) in &k.sqrt {
                if wrote {
                    write!(f, "*")?;
                }
                match o.cmp(&0) {
                    std::cmp::Ordering::Equal => write!(f, "R(w{slot})")?,
                    std::cmp::Ordering::Greater => write!(f, "R(w{slot}+{o})")?,
                    std::cmp::Ordering::Less => write!(f, "R(w{slot}{o})")?,
                }
                wrote = true;
            }
            for (&slot, &m) in &k.ind {
                if wrote {
                    write!(f, "*")?;
                }
                write!(f, "[w{slot}>={m}]")?;
                wrote = true;
            }
        }
        Ok(())
    }
}
