//! The n-dimensional Toeplitz groupoid, its faces, the subgroupoid F̃ₙ,
//! and the quotient groupoid Fₙ = F̃ₙ/∼.
//!
//! An element is a triple `(z, x, w)` with `z ∈ ℤ`, `x ∈ ℤⁿ` and
//! `w ∈ ℤ̄ⁿ≥ = ({0,1,2,…} ∪ {∞})ⁿ`, subject to `w + x ∈ ℤ̄ⁿ≥`
//! componentwise (∞ absorbs every finite shift).  Source and range are
//! `w` and `w + x`; the product `g·h` is defined when
//! `source(g) = range(h)` and keeps `h`'s unit:
//!
//! ```text
//! (z₁, x₁, w₂ + x₂) · (z₂, x₂, w₂)  =  (z₁ + z₂, x₁ + x₂, w₂).
//! ```
//!
//! The face `F_i` of the unit space consists of units with `w_i = ∞`;
//! the boundary `∂F` is the union of the faces.  The subgroupoid F̃ₙ
//! keeps exactly the elements whose shift is compatible with every
//! ∞-coordinate of their unit:
//!
//! ```text
//! w_i = ∞   ⟹   x_i = −z − x_1 − … − x_{i−1}  and  x_{i+1} = … = x_n = 0.
//! ```
//!
//! The equivalence `∼` saturates a unit from any ∞ entry onward; its
//! classes have a unique maximal representative (all entries ∞ from the
//! first ∞ on), which is what [`canonicalize`](GroupoidElement::canonicalize)
//! computes and what [`CanonicalClass`] stores.

use serde::{Serialize, Serializer};
use std::fmt;
use thiserror::Error;

/// Errors from groupoid constructions and maps.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupoidError {
    /// A unit coordinate (or shifted coordinate) left ℤ̄≥.
    #[error("invalid unit: coordinate {slot} of {what} is negative")]
    InvalidUnit { what: &'static str, slot: usize },
    /// `source(g) ≠ range(h)` in a composition.
    #[error("not composable: source of left factor differs from range of right factor")]
    NotComposable,
    /// The element does not satisfy the F̃ₙ membership condition.
    #[error("element is not in the subgroupoid F~")]
    NotInSubgroupoid,
    /// The element is outside the domain of a face/quotient map.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// Vector lengths disagree with the ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// A window bound was negative.
    #[error("invalid window bound {0}")]
    InvalidBound(i64),
}

/// An element of ℤ̄≥ = {0, 1, 2, …} ∪ {∞}: one unit-space coordinate.
///
/// `Fin(k)` always holds `k ≥ 0`.  The derived order puts every finite
/// value below `Inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtNat {
    Fin(i64),
    Inf,
}

impl ExtNat {
    /// The point at infinity.
    pub const INF: ExtNat = ExtNat::Inf;

    /// A finite coordinate; panics on a negative argument.
    pub fn fin(v: i64) -> ExtNat {
        assert!(v >= 0, "finite unit coordinate must be nonnegative, got {v}");
        ExtNat::Fin(v)
    }

    pub fn is_inf(self) -> bool {
        matches!(self, ExtNat::Inf)
    }

    /// `self + d` when the result stays in ℤ̄≥; ∞ absorbs every shift.
    pub fn checked_add(self, d: i64) -> Option<ExtNat> {
        match self {
            ExtNat::Inf => Some(ExtNat::Inf),
            ExtNat::Fin(k) => {
                let s = k + d;
                (s >= 0).then_some(ExtNat::Fin(s))
            }
        }
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtNat::Fin(k) => write!(f, "{k}"),
            ExtNat::Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtNat::Fin(k) => s.serialize_i64(*k),
            ExtNat::Inf => s.serialize_str("inf"),
        }
    }
}

/// A point of the unit space ℤ̄ⁿ≥.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Unit(Vec<ExtNat>);

impl Unit {
    pub fn new(coords: Vec<ExtNat>) -> Unit {
        Unit(coords)
    }

    /// Unit with the given finite coordinates.
    pub fn from_fins(ks: &[i64]) -> Unit {
        Unit(ks.iter().map(|&k| ExtNat::fin(k)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> ExtNat {
        self.0[i]
    }

    pub fn coords(&self) -> &[ExtNat] {
        &self.0
    }

    /// Componentwise translate by `x`; `None` when a finite coordinate
    /// would drop below zero.
    pub fn translate(&self, x: &[i64]) -> Option<Unit> {
        debug_assert_eq!(self.len(), x.len());
        self.0
            .iter()
            .zip(x)
            .map(|(&w, &d)| w.checked_add(d))
            .collect::<Option<Vec<_>>>()
            .map(Unit)
    }

    /// Is this unit on the face `F_i` (0-based slot), i.e. `w_i = ∞`?
    pub fn in_face(&self, i: usize) -> bool {
        self.0[i].is_inf()
    }

    /// Is this unit on the boundary ∂F = ∪ᵢ F_i?
    pub fn in_boundary(&self) -> bool {
        self.0.iter().any(|w| w.is_inf())
    }

    /// Index of the first ∞ coordinate, if any.
    pub fn first_inf(&self) -> Option<usize> {
        self.0.iter().position(|w| w.is_inf())
    }

    /// Replace every coordinate from slot `i` onward by ∞.
    pub fn saturate_from(&self, i: usize) -> Unit {
        let mut v = self.0.clone();
        for c in v.iter_mut().skip(i) {
            *c = ExtNat::Inf;
        }
        Unit(v)
    }

    /// Saturated form: everything from the first ∞ onward becomes ∞.
    pub fn saturate(&self) -> Unit {
        match self.first_inf() {
            Some(i) => self.saturate_from(i),
            None => self.clone(),
        }
    }

    /// All entries after the first ∞ are already ∞.
    pub fn is_saturated(&self) -> bool {
        *self == self.saturate()
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// The discrete part of a groupoid element: the global ℤ coordinate `z`
/// and the translation `x ∈ ℤⁿ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Shift {
    pub z: i64,
    pub x: Vec<i64>,
}

impl Shift {
    pub fn new(z: i64, x: Vec<i64>) -> Shift {
        Shift { z, x }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn zero(n: usize) -> Shift {
        Shift { z: 0, x: vec![0; n] }
    }

    pub fn add(&self, other: &Shift) -> Shift {
        debug_assert_eq!(self.n(), other.n());
        Shift {
            z: self.z + other.z,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn neg(&self) -> Shift {
        Shift {
            z: -self.z,
            x: self.x.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(z={}, x=[", self.z)?;
        for (i, c) in self.x.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "])")
    }
}

/// A valid element `(z, x, w)` of the ambient groupoid.
///
/// Validity (`w + x ∈ ℤ̄ⁿ≥`) is established at construction and preserved
/// by every operation, so `range()` never fails.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GroupoidElement {
    pub shift: Shift,
    pub w: Unit,
}

impl GroupoidElement {
    /// Build `(z, x, w)`, checking that both `w` and `w + x` lie in ℤ̄ⁿ≥.
    pub fn new(z: i64, x: Vec<i64>, w: Vec<ExtNat>) -> Result<GroupoidElement, GroupoidError> {
        if x.len() != w.len() {
            return Err(GroupoidError::DimensionMismatch {
                expected: w.len(),
                got: x.len(),
            });
        }
        let unit = Unit::new(w);
        let shift = Shift::new(z, x);
        Self::from_parts(shift, unit)
    }

    pub fn from_parts(shift: Shift, w: Unit) -> Result<GroupoidElement, GroupoidError> {
        if shift.n() != w.len() {
            return Err(GroupoidError::DimensionMismatch {
                expected: w.len(),
                got: shift.n(),
            });
        }
        for (i, (&c, &d)) in w.coords().iter().zip(&shift.x).enumerate() {
            if c.checked_add(d).is_none() {
                return Err(GroupoidError::InvalidUnit { what: "range", slot: i });
            }
        }
        Ok(GroupoidElement { shift, w })
    }

    /// The unit element at `w`.
    pub fn unit_at(w: Unit) -> GroupoidElement {
        let n = w.len();
        GroupoidElement {
            shift: Shift::zero(n),
            w,
        }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn source(&self) -> &Unit {
        &self.w
    }

    pub fn range(&self) -> Unit {
        self.w
            .translate(&self.shift.x)
            .expect("validity is a construction invariant")
    }

    pub fn is_unit(&self) -> bool {
        self.shift.z == 0 && self.shift.x.iter().all(|&v| v == 0)
    }

    /// `self · h`, defined when `source(self) = range(h)`; keeps `h`'s unit.
    pub fn compose(&self, h: &GroupoidElement) -> Result<GroupoidElement, GroupoidError> {
        if self.n() != h.n() {
            return Err(GroupoidError::DimensionMismatch {
                expected: self.n(),
                got: h.n(),
            });
        }
        if *self.source() != h.range() {
            return Err(GroupoidError::NotComposable);
        }
        Ok(GroupoidElement {
            shift: self.shift.add(&h.shift),
            w: h.w.clone(),
        })
    }

    /// `(−z, −x, w + x)`; satisfies `g · g⁻¹ = unit at range(g)`.
    pub fn inverse(&self) -> GroupoidElement {
        GroupoidElement {
            shift: self.shift.neg(),
            w: self.range(),
        }
    }

    /// Replace the unit, keeping the shift; errors if the result is invalid.
    pub fn with_source(&self, w: Unit) -> Result<GroupoidElement, GroupoidError> {
        Self::from_parts(self.shift.clone(), w)
    }

    /// Membership in F̃ₙ: every ∞ coordinate of `w` forces
    /// `x_i = −z − x_1 − … − x_{i−1}` and zero trailing shifts.
    pub fn in_ftilde(&self) -> bool {
        let mut prefix = self.shift.z;
        for i in 0..self.n() {
            if self.w.get(i).is_inf() {
                return self.shift.x[i] == -prefix
                    && self.shift.x[i + 1..].iter().all(|&v| v == 0);
            }
            prefix += self.shift.x[i];
        }
        true
    }

    /// The maximal representative of the ∼-class: saturate the unit from
    /// its first ∞ entry onward.  Errors if the element is outside F̃ₙ.
    pub fn canonicalize(&self) -> Result<GroupoidElement, GroupoidError> {
        if !self.in_ftilde() {
            return Err(GroupoidError::NotInSubgroupoid);
        }
        match self.w.first_inf() {
            None => Ok(self.clone()),
            Some(i) => Ok(GroupoidElement {
                shift: self.shift.clone(),
                w: self.w.saturate_from(i),
            }),
        }
    }

    /// ∼-equivalence of two F̃ₙ elements.
    pub fn sim_equivalent(&self, other: &GroupoidElement) -> Result<bool, GroupoidError> {
        Ok(self.canonicalize()? == other.canonicalize()?)
    }

    /// The boundary-to-last-face quotient map: set `w_n = ∞`, keep the rest.
    /// Defined on elements over ∂F; idempotent on the last face.
    pub fn pi_n_boundary(&self) -> Result<GroupoidElement, GroupoidError> {
        if !self.w.in_boundary() {
            return Err(GroupoidError::Domain("pi_n_boundary needs a boundary unit"));
        }
        let n = self.n();
        Ok(GroupoidElement {
            shift: self.shift.clone(),
            w: {
                let mut v = self.w.coords().to_vec();
                v[n - 1] = ExtNat::Inf;
                Unit::new(v)
            },
        })
    }

    /// The face-i-to-corner quotient map (same formula, domain `F_i`).
    pub fn pi_ni(&self, i: usize) -> Result<GroupoidElement, GroupoidError> {
        if !self.w.in_face(i) {
            return Err(GroupoidError::Domain("pi_ni needs a unit on the given face"));
        }
        let n = self.n();
        let mut v = self.w.coords().to_vec();
        v[n - 1] = ExtNat::Inf;
        Ok(GroupoidElement {
            shift: self.shift.clone(),
            w: Unit::new(v),
        })
    }

    /// The automorphism of the last-face restriction:
    /// `x_n ↦ x_n − z − Σ_{i<n} x_i`, everything else fixed.
    pub fn phi_star(&self) -> Result<GroupoidElement, GroupoidError> {
        let n = self.n();
        if !self.w.in_face(n - 1) {
            return Err(GroupoidError::Domain("phi_star needs w_n = inf"));
        }
        let head: i64 = self.shift.x[..n - 1].iter().sum();
        let mut x = self.shift.x.clone();
        x[n - 1] -= self.shift.z + head;
        // w_n = ∞ absorbs the changed shift, so validity is untouched.
        Ok(GroupoidElement {
            shift: Shift::new(self.shift.z, x),
            w: self.w.clone(),
        })
    }

    /// Inverse of [`phi_star`](Self::phi_star).
    pub fn phi_star_inv(&self) -> Result<GroupoidElement, GroupoidError> {
        let n = self.n();
        if !self.w.in_face(n - 1) {
            return Err(GroupoidError::Domain("phi_star_inv needs w_n = inf"));
        }
        let head: i64 = self.shift.x[..n - 1].iter().sum();
        let mut x = self.shift.x.clone();
        x[n - 1] += self.shift.z + head;
        Ok(GroupoidElement {
            shift: Shift::new(self.shift.z, x),
            w: self.w.clone(),
        })
    }

    /// Membership in F̃′_{n−1} = F̃ₙ ∩ (last face): `w_n = ∞` together with
    /// the shift condition at every ∞ slot.
    pub fn in_ftilde_prime(&self) -> bool {
        self.w.in_face(self.n() - 1) && self.in_ftilde()
    }

    /// Membership in F̃″_{n−1}: a boundary unit together with the shift
    /// condition at every ∞ slot.
    pub fn in_ftilde_doubleprime(&self) -> bool {
        self.w.in_boundary() && self.in_ftilde()
    }

    /// Membership in the embedded copy of F̃_{n−1} inside the last face:
    /// `w_n = ∞`, `x_n = 0`, and the F̃ condition in the first n−1 slots.
    pub fn in_ftilde_lower_embedded(&self) -> bool {
        let n = self.n();
        if !self.w.in_face(n - 1) || self.shift.x[n - 1] != 0 {
            return false;
        }
        let mut prefix = self.shift.z;
        for i in 0..n - 1 {
            if self.w.get(i).is_inf() {
                return self.shift.x[i] == -prefix
                    && self.shift.x[i + 1..n - 1].iter().all(|&v| v == 0);
            }
            prefix += self.shift.x[i];
        }
        true
    }
}

impl fmt::Display for GroupoidElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(z={}, x=[", self.shift.z)?;
        for (i, c) in self.shift.x.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "], w={})", self.w)
    }
}

/// A ∼-class of F̃ₙ, stored through its canonical (saturated) representative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CanonicalClass {
    rep: GroupoidElement,
}

impl CanonicalClass {
    pub fn new(g: &GroupoidElement) -> Result<CanonicalClass, GroupoidError> {
        Ok(CanonicalClass {
            rep: g.canonicalize()?,
        })
    }

    pub fn rep(&self) -> &GroupoidElement {
        &self.rep
    }

    /// Source and range of the class, as saturated units.
    pub fn source_class(&self) -> Unit {
        self.rep.source().saturate()
    }

    pub fn range_class(&self) -> Unit {
        self.rep.range().saturate()
    }

    pub fn is_unit(&self) -> bool {
        self.rep.is_unit()
    }

    pub fn inverse(&self) -> CanonicalClass {
        CanonicalClass {
            // The inverse of a canonical representative is canonical: the
            // ∞ pattern of w + x equals that of w.
            rep: self.rep.inverse(),
        }
    }

    /// Product in the quotient groupoid.  The left representative's unit is
    /// adjusted to the right representative's range (legal inside F̃ₙ because
    /// shifts vanish past the first ∞), then the raw product is canonicalized.
    pub fn compose(&self, other: &CanonicalClass) -> Result<CanonicalClass, GroupoidError> {
        if self.source_class() != other.range_class() {
            return Err(GroupoidError::NotComposable);
        }
        let left = self.rep.with_source(other.rep.range())?;
        debug_assert!(left.in_ftilde());
        let product = left.compose(&other.rep)?;
        Ok(CanonicalClass {
            rep: product.canonicalize()?,
        })
    }
}

impl fmt::Display for CanonicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

/// Every valid element with `|z| ≤ z_max`, `|x_i| ≤ x_max`,
/// `w_i ∈ {0, …, cutoff, ∞}`, in lexicographic `(z, x, w)` order with ∞
/// sorted last.
pub fn enumerate_window(
    n: usize,
    z_max: i64,
    x_max: i64,
    cutoff: i64,
) -> Result<Vec<GroupoidElement>, GroupoidError> {
    for b in [z_max, x_max, cutoff] {
        if b < 0 {
            return Err(GroupoidError::InvalidBound(b));
        }
    }
    let mut out = Vec::new();
    let x_range: Vec<i64> = (-x_max..=x_max).collect();
    let w_range: Vec<ExtNat> = (0..=cutoff)
        .map(ExtNat::Fin)
        .chain(std::iter::once(ExtNat::Inf))
        .collect();
    let mut x = vec![0i64; n];
    let mut w_idx = vec![0usize; n];
    for z in -z_max..=z_max {
        // odometer over x
        let mut xi = vec![0usize; n];
        loop {
            for (k, &i) in xi.iter().enumerate() {
                x[k] = x_range[i];
            }
            // odometer over w
            for v in w_idx.iter_mut() {
                *v = 0;
            }
            loop {
                let w: Vec<ExtNat> = w_idx.iter().map(|&i| w_range[i]).collect();
                if let Ok(g) = GroupoidElement::new(z, x.clone(), w) {
                    out.push(g);
                }
                if !advance(&mut w_idx, w_range.len()) {
                    break;
                }
            }
            if !advance(&mut xi, x_range.len()) {
                break;
            }
        }
    }
    Ok(out)
}

/// Advance a mixed-radix odometer with the LAST digit fastest, so the overall
/// enumeration is lexicographic in the vector.
fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}
