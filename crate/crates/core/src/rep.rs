//! Truncated matrix representations: the numeric oracle.
//!
//! A window `W = ({0,…,N} ∪ {∞})ⁿ` replaces the unit space; an algebra
//! element becomes a dense complex matrix indexed by `W` in lexicographic
//! order with ∞ sorted last.  Finite coordinates follow the shift
//! (transitions leaving the window are dropped — the truncation), ∞
//! coordinates stay put and turn their shift component into a phase
//! `e^(i·x_j·φ_j)`; the global ℤ mode contributes `e^(i·z·θ)`.
//!
//! Truncation means products of representations agree with representations
//! of convolutions only away from the cutoff: the contract is exact
//! agreement on the columns of [`ReprConfig::interior_mask`], nothing more.
//!
//! Spectra come from a cyclic complex Jacobi sweep, operator norms from
//! power iteration on `M*M`, and numerical ranks from the Gram matrix of
//! masked matrices under the trace inner product.  All of it is
//! dependency-free and deterministic.

use crate::algebra::{AlgebraElement, AlgebraError};
use crate::groupoid::{ExtNat, Unit};
use num_complex::Complex64;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error("invalid representation parameter: {0}")]
    BadParameter(String),
    #[error("dimension mismatch between element and representation")]
    DimensionMismatch,
    #[error("matrix is not hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("bandwidth {b} too large for cutoff {n}")]
    BadBandwidth { b: usize, n: usize },
    #[error("empty matrix list")]
    EmptyList,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Parameters of a truncated representation: window cutoff, deformation
/// parameter, and the sampled angles for the ℤ modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReprConfig {
    n: usize,
    cutoff: usize,
    q: f64,
    theta: f64,
    phi: Vec<f64>,
}

const TWO_PI: f64 = std::f64::consts::TAU;

impl ReprConfig {
    pub fn new(
        n: usize,
        cutoff: usize,
        q: f64,
        theta: f64,
        phi: Vec<f64>,
    ) -> Result<ReprConfig, RepError> {
        if n < 1 {
            return Err(RepError::BadParameter("n must be at least 1".into()));
        }
        if cutoff < 1 {
            return Err(RepError::BadParameter("cutoff N must be at least 1".into()));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(RepError::BadParameter(format!("q must lie in (0,1), got {q}")));
        }
        if phi.len() != n {
            return Err(RepError::BadParameter(format!(
                "need {n} phase angles, got {}",
                phi.len()
            )));
        }
        Ok(ReprConfig {
            n,
            cutoff,
            q,
            theta: theta.rem_euclid(TWO_PI),
            phi: phi.into_iter().map(|a| a.rem_euclid(TWO_PI)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Matrix dimension `(N+2)ⁿ`.
    pub fn dim(&self) -> usize {
        (self.cutoff + 2).pow(self.n as u32)
    }

    /// Digits per slot: `0, 1, …, N, ∞`.
    fn radix(&self) -> usize {
        self.cutoff + 2
    }

    /// The unit at a window index (lexicographic, ∞ last).
    pub fn unit_at(&self, mut idx: usize) -> Unit {
        let r = self.radix();
        let mut digits = vec![0usize; self.n];
        for d in digits.iter_mut().rev() {
            *d = idx % r;
            idx /= r;
        }
        Unit::new(
            digits
                .into_iter()
                .map(|d| {
                    if d == self.cutoff + 1 {
                        ExtNat::Inf
                    } else {
                        ExtNat::Fin(d as i64)
                    }
                })
                .collect(),
        )
    }

    /// The window index of a unit, if all finite coordinates are ≤ N.
    pub fn index_of(&self, w: &Unit) -> Option<usize> {
        let r = self.radix();
        let mut idx = 0usize;
        for &c in w.coords() {
            let d = match c {
                ExtNat::Inf => self.cutoff + 1,
                ExtNat::Fin(k) if (0..=self.cutoff as i64).contains(&k) => k as usize,
                ExtNat::Fin(_) => return None,
            };
            idx = idx * r + d;
        }
        Some(idx)
    }

    /// Indices whose finite coordinates all lie in `[b, N−b]`; ∞ coordinates
    /// are always interior (they are exact, not truncated).
    pub fn interior_mask(&self, b: usize) -> Result<Vec<usize>, RepError> {
        if 2 * b > self.cutoff {
            return Err(RepError::BadBandwidth { b, n: self.cutoff });
        }
        let dim = self.dim();
        let mut mask = Vec::new();
        'outer: for idx in 0..dim {
            let w = self.unit_at(idx);
            for &c in w.coords() {
                if let ExtNat::Fin(k) = c {
                    if (k as usize) < b || (k as usize) > self.cutoff - b {
                        continue 'outer;
                    }
                }
            }
            mask.push(idx);
        }
        Ok(mask)
    }
}

/// A dense complex matrix over a window, together with its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrix {
    cfg: ReprConfig,
    dim: usize,
    data: Vec<Complex64>,
}

impl TruncatedMatrix {
    pub fn zeros(cfg: ReprConfig) -> TruncatedMatrix {
        let dim = cfg.dim();
        TruncatedMatrix {
            cfg,
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(cfg: ReprConfig) -> TruncatedMatrix {
        let mut m = TruncatedMatrix::zeros(cfg);
        for i in 0..m.dim {
            m.data[i * m.dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn cfg(&self) -> &ReprConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] = v;
    }

    fn add_at(&mut self, row: usize, col: usize, v: Complex64) {
        self.data[row * self.dim + col] += v;
    }

    pub fn add(&self, other: &TruncatedMatrix) -> Result<TruncatedMatrix, RepError> {
        if self.cfg != other.cfg {
            return Err(RepError::DimensionMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TruncatedMatrix) -> Result<TruncatedMatrix, RepError> {
        if self.cfg != other.cfg {
            return Err(RepError::DimensionMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> TruncatedMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= c;
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> TruncatedMatrix {
        let mut out = TruncatedMatrix::zeros(self.cfg.clone());
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.data[r * self.dim + c].conj();
            }
        }
        out
    }

    /// Matrix product, skipping zero entries (the representations here are
    /// band matrices, so this is effectively sparse × sparse).
    #[allow(clippy::needless_range_loop)]
    pub fn mul(&self, other: &TruncatedMatrix) -> Result<TruncatedMatrix, RepError> {
        if self.cfg != other.cfg {
            return Err(RepError::DimensionMismatch);
        }
        let dim = self.dim;
        let mut out = TruncatedMatrix::zeros(self.cfg.clone());
        // column-sparse view of self
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for r in 0..dim {
            for c in 0..dim {
                let v = self.data[r * dim + c];
                if v.re != 0.0 || v.im != 0.0 {
                    cols[c].push((r, v));
                }
            }
        }
        for k in 0..dim {
            if cols[k].is_empty() {
                continue;
            }
            for j in 0..dim {
                let b = other.data[k * dim + j];
                if b.re == 0.0 && b.im == 0.0 {
                    continue;
                }
                for &(i, a) in &cols[k] {
                    out.data[i * dim + j] += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entry magnitude over the given columns.
    pub fn max_abs_on_columns(&self, cols: &[usize]) -> f64 {
        let mut m = 0.0f64;
        for r in 0..self.dim {
            for &c in cols {
                m = m.max(self.data[r * self.dim + c].norm());
            }
        }
        m
    }

    /// Largest entry magnitude over the given rows *and* columns.
    pub fn max_abs_on_block(&self, idx: &[usize]) -> f64 {
        let mut m = 0.0f64;
        for &r in idx {
            for &c in idx {
                m = m.max(self.data[r * self.dim + c].norm());
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Deterministic text export, 17 significant digits, rows then columns
    /// sorted, one line per nonzero entry.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        let phi: Vec<String> = self.cfg.phi.iter().map(|&a| fmt17(a)).collect();
        let _ = writeln!(
            out,
            "%%GroupoidMatrix n={} N={} theta={} phi={}",
            self.cfg.n,
            self.cfg.cutoff,
            fmt17(self.cfg.theta),
            phi.join(",")
        );
        for r in 0..self.dim {
            for c in 0..self.dim {
                let v = self.data[r * self.dim + c];
                if v.re != 0.0 || v.im != 0.0 {
                    let _ = writeln!(out, "{} {} {} {}", r, c, fmt17(v.re), fmt17(v.im));
                }
            }
        }
        out
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Represent an algebra element over the window.  Entries whose target
/// leaves the window are dropped; pinned faces restrict the support to
/// columns with ∞ in the pinned slots.
pub fn to_matrix(f: &AlgebraElement, cfg: &ReprConfig) -> Result<TruncatedMatrix, RepError> {
    if f.n() != cfg.n {
        return Err(RepError::DimensionMismatch);
    }
    let mut m = TruncatedMatrix::zeros(cfg.clone());
    let dim = cfg.dim();
    'col: for col in 0..dim {
        let v = cfg.unit_at(col);
        for &j in f.faces() {
            if !v.in_face(j) {
                continue 'col;
            }
        }
        for (shift, nf) in f.terms() {
            // target unit and ∞-mode phases
            let mut phase = Complex64::from_polar(1.0, cfg.theta * shift.z as f64);
            let mut target = Vec::with_capacity(cfg.n);
            let mut ok = true;
            for (j, &c) in v.coords().iter().enumerate() {
                match c {
                    ExtNat::Inf => {
                        phase *= Complex64::from_polar(1.0, cfg.phi[j] * shift.x[j] as f64);
                        target.push(ExtNat::Inf);
                    }
                    ExtNat::Fin(k) => {
                        let t = k + shift.x[j];
                        if t < 0 || t > cfg.cutoff as i64 {
                            ok = false;
                            break;
                        }
                        target.push(ExtNat::Fin(t));
                    }
                }
            }
            if !ok {
                continue;
            }
            let row = cfg
                .index_of(&Unit::new(target))
                .expect("target stays in window");
            let val = nf.eval(&v, cfg.q).map_err(AlgebraError::from)?;
            m.add_at(row, col, phase * val);
        }
    }
    Ok(m)
}

/// Eigenvalues (ascending) and an orthonormal eigenbasis of a Hermitian
/// matrix, by cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &TruncatedMatrix) -> Result<(Vec<f64>, Vec<Vec<Complex64>>), RepError> {
    let dim = m.dim;
    // hermitian check
    let mut dev = 0.0f64;
    for r in 0..dim {
        for c in 0..dim {
            dev = dev.max((m.get(r, c) - m.get(c, r).conj()).norm());
        }
    }
    if dev > 1e-10 {
        return Err(RepError::NotHermitian(dev));
    }
    let mut a: Vec<Complex64> = m.data.clone();
    // symmetrize to kill the sub-tolerance asymmetry
    for r in 0..dim {
        for c in 0..dim {
            let avg = (a[r * dim + c] + a[c * dim + r].conj()) * 0.5;
            a[r * dim + c] = avg;
            a[c * dim + r] = avg.conj();
        }
    }
    let mut vecs = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        vecs[i * dim + i] = Complex64::new(1.0, 0.0);
    }

    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                if r != c {
                    s += a[r * dim + c].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > 1e-12 {
        sweeps += 1;
        assert!(sweeps <= 100, "jacobi sweep failed to converge");
        for p in 0..dim {
            for qq in p + 1..dim {
                let g = a[p * dim + qq];
                let mag = g.norm();
                if mag < 1e-300 {
                    continue;
                }
                let u = g / mag; // unit phase of the pivot
                let app = a[p * dim + p].re;
                let aqq = a[qq * dim + qq].re;
                let zeta = (app - aqq) / (2.0 * mag);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // columns p, q of A and V transform by the plane rotation
                // [c, -s·u; s·conj(u), c]
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + qq];
                    a[k * dim + p] = akp * c + akq * s * u.conj();
                    a[k * dim + qq] = akq * c - akp * s * u;
                    let vkp = vecs[k * dim + p];
                    let vkq = vecs[k * dim + qq];
                    vecs[k * dim + p] = vkp * c + vkq * s * u.conj();
                    vecs[k * dim + qq] = vkq * c - vkp * s * u;
                }
                // rows by conjugate symmetry
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[qq * dim + k];
                    a[p * dim + k] = apk * c + aqk * s * u;
                    a[qq * dim + k] = aqk * c - apk * s * u.conj();
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..dim).map(|i| (a[i * dim + i].re, i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let eigenvalues: Vec<f64> = pairs.iter().map(|&(v, _)| v).collect();
    let eigenvectors: Vec<Vec<Complex64>> = pairs
        .iter()
        .map(|&(_, i)| (0..dim).map(|k| vecs[k * dim + i]).collect())
        .collect();
    Ok((eigenvalues, eigenvectors))
}

/// Eigenvalues only, sorted ascending.
pub fn hermitian_spectrum(m: &TruncatedMatrix) -> Result<Vec<f64>, RepError> {
    hermitian_eigen(m).map(|(vals, _)| vals)
}

/// Operator norm estimate by power iteration on `M*M` (deterministic start,
/// 200 iterations or relative change below 1e−12).
pub fn op_norm_estimate(m: &TruncatedMatrix) -> f64 {
    let dim = m.dim;
    if dim == 0 {
        return 0.0;
    }
    let ms = m.adjoint();
    let mut v: Vec<Complex64> = (0..dim)
        .map(|i| Complex64::new(1.0 + 1e-3 * i as f64, 0.0))
        .collect();
    let norm = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    for x in v.iter_mut() {
        *x /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        let w = ms.mul_vec(&m.mul_vec(&v));
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw; // Rayleigh quotient for unit v
        v = w.into_iter().map(|c| c / nw).collect();
        if (next - lambda).abs() <= 1e-12 * next.max(1.0) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Numerical rank of the Gram matrix of masked matrices under the trace
/// inner product: eigenvalues above `tol × largest` count.
pub fn gram_rank(
    matrices: &[TruncatedMatrix],
    mask: &[usize],
    tol: f64,
) -> Result<usize, RepError> {
    if matrices.is_empty() {
        return Err(RepError::EmptyList);
    }
    let cfg = matrices[0].cfg.clone();
    for m in matrices {
        if m.cfg != cfg {
            return Err(RepError::DimensionMismatch);
        }
    }
    let k = matrices.len();
    let mut gram = vec![Complex64::new(0.0, 0.0); k * k];
    for a in 0..k {
        for b in 0..k {
            let mut s = Complex64::new(0.0, 0.0);
            for &r in mask {
                for &c in mask {
                    s += matrices[a].get(r, c).conj() * matrices[b].get(r, c);
                }
            }
            gram[a * k + b] = s;
        }
    }
    // wrap the Gram matrix for the eigensolver; its window is irrelevant
    let mut g = TruncatedMatrix {
        cfg,
        dim: k,
        data: gram,
    };
    // force exact hermitian symmetry against accumulation noise
    for r in 0..k {
        for c in r..k {
            let avg = (g.data[r * k + c] + g.data[c * k + r].conj()) * 0.5;
            g.data[r * k + c] = avg;
            g.data[c * k + r] = avg.conj();
        }
    }
    let vals = hermitian_spectrum(&g)?;
    let largest = vals.iter().cloned().fold(0.0, f64::max);
    if largest <= 0.0 {
        return Ok(0);
    }
    Ok(vals.iter().filter(|&&v| v > tol * largest).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffExpr as E;

    fn cfg(n: usize, cutoff: usize, q: f64) -> ReprConfig {
        ReprConfig::new(n, cutoff, q, 0.0, vec![0.0; n]).unwrap()
    }

    fn cfg_angles(n: usize, cutoff: usize, q: f64, theta: f64, phi: f64) -> ReprConfig {
        ReprConfig::new(n, cutoff, q, theta, vec![phi; n]).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(ReprConfig::new(0, 2, 0.5, 0.0, vec![]).is_err());
        assert!(ReprConfig::new(1, 0, 0.5, 0.0, vec![0.0]).is_err());
        assert!(ReprConfig::new(1, 2, 1.5, 0.0, vec![0.0]).is_err());
        assert!(ReprConfig::new(1, 2, 0.5, 0.0, vec![0.0, 0.0]).is_err());
        let c = ReprConfig::new(1, 2, 0.5, 7.0, vec![-1.0]).unwrap();
        assert!(c.theta() >= 0.0 && c.theta() < TWO_PI);
        assert!(c.phi()[0] >= 0.0 && c.phi()[0] < TWO_PI);
    }

    #[test]
    fn window_indexing_round_trips() {
        let c = cfg(2, 3, 0.5);
        assert_eq!(c.dim(), 25);
        for idx in 0..c.dim() {
            let u = c.unit_at(idx);
            assert_eq!(c.index_of(&u), Some(idx));
        }
        // ∞ sorts last per coordinate
        let last = c.unit_at(c.dim() - 1);
        assert!(last.in_face(0) && last.in_face(1));
    }

    #[test]
    fn interior_mask_examples() {
        let c = cfg(1, 4, 0.5);
        let mask = c.interior_mask(1).unwrap();
        let units: Vec<String> = mask.iter().map(|&i| format!("{}", c.unit_at(i))).collect();
        assert_eq!(units, vec!["[1]", "[2]", "[3]", "[inf]"]);
        assert_eq!(c.interior_mask(0).unwrap().len(), c.dim());
        let c2 = cfg(1, 2, 0.5);
        assert!(c2.interior_mask(2).is_err());
    }

    #[test]
    fn alpha_star_matrix_entries() {
        // weighted shift without ℤ modes: entries M[k−1, k] = √(1 − q^{2k}),
        // and the ∞ corner carries the circle-mode phase e^{−iφ}
        let q = 0.5;
        let phi = 1.1;
        let c = cfg_angles(1, 2, q, 0.3, phi);
        let a_star = AlgebraElement::monomial(1, 0, vec![-1], &E::sqrt(0, 0)).unwrap();
        let m = to_matrix(&a_star, &c).unwrap();
        let idx = |k: i64| c.index_of(&Unit::from_fins(&[k])).unwrap();
        let inf = c.index_of(&Unit::new(vec![ExtNat::Inf])).unwrap();
        for k in 1..=2i64 {
            let expected = (1.0 - q.powi(2 * k as i32)).sqrt();
            assert!((m.get(idx(k - 1), idx(k)) - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
        assert_eq!(m.get(idx(0), idx(0)), Complex64::new(0.0, 0.0));
        let corner = m.get(inf, inf);
        assert!((corner - Complex64::from_polar(1.0, -phi)).norm() < 1e-15);
    }

    #[test]
    fn unit_is_identity_and_gamma_diagonal() {
        let c = cfg(1, 3, 0.5);
        let u = to_matrix(&AlgebraElement::unit(1), &c).unwrap();
        assert_eq!(u, TruncatedMatrix::identity(c.clone()));
        let gamma = AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 1, 0)).unwrap();
        let m = to_matrix(&gamma, &c).unwrap();
        for k in 0..=3i64 {
            let idx = c.index_of(&Unit::from_fins(&[k])).unwrap();
            assert!((m.get(idx, idx).re - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
        let inf = c.index_of(&Unit::new(vec![ExtNat::Inf])).unwrap();
        assert_eq!(m.get(inf, inf), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn representation_is_linear() {
        let c = cfg_angles(1, 5, 0.5, 0.4, 0.8);
        let f = AlgebraElement::monomial(1, 1, vec![-1], &E::sqrt(0, 0)).unwrap();
        let g = AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 1, 0)).unwrap();
        let scaled = g.scale_const(Complex64::new(0.0, 2.0));
        let sum = f.add(&scaled).unwrap();
        let lhs = to_matrix(&sum, &c).unwrap();
        let rhs = to_matrix(&f, &c)
            .unwrap()
            .add(&to_matrix(&g, &c).unwrap().scale(Complex64::new(0.0, 2.0)))
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn z_mode_contributes_global_phase() {
        let theta = 0.7;
        let c = cfg_angles(1, 2, 0.5, theta, 0.0);
        let t = AlgebraElement::monomial(1, 2, vec![0], &E::one()).unwrap();
        let m = to_matrix(&t, &c).unwrap();
        for i in 0..c.dim() {
            assert!((m.get(i, i) - Complex64::from_polar(1.0, 2.0 * theta)).norm() < 1e-14);
        }
    }

    #[test]
    fn interior_agreement_for_products() {
        let q = 0.5;
        let c = cfg_angles(1, 8, q, 0.9, 0.4);
        let a_star = AlgebraElement::monomial(1, 1, vec![-1], &E::sqrt(0, 0)).unwrap();
        let a = a_star.adjoint();
        let conv = a_star.convolve(&a).unwrap();
        let lhs = to_matrix(&conv, &c).unwrap();
        let rhs = to_matrix(&a_star, &c)
            .unwrap()
            .mul(&to_matrix(&a, &c).unwrap())
            .unwrap();
        let mask = c.interior_mask(1).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        assert!(diff.max_abs_on_columns(&mask) < 1e-12);
    }

    #[test]
    fn adjoint_agreement_on_interior_block() {
        let c = cfg_angles(1, 8, 0.4, 0.3, 1.2);
        let f = AlgebraElement::monomial(1, 1, vec![-1], &E::sqrt(0, 0))
            .unwrap()
            .add(&AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 1, 0)).unwrap())
            .unwrap();
        let lhs = to_matrix(&f.adjoint(), &c).unwrap();
        let rhs = to_matrix(&f, &c).unwrap().adjoint();
        let mask = c.interior_mask(1).unwrap();
        assert!(lhs.sub(&rhs).unwrap().max_abs_on_block(&mask) < 1e-12);
    }

    #[test]
    fn jacobi_identity_and_diagonal() {
        let c = cfg(1, 4, 0.5);
        let id = TruncatedMatrix::identity(c.clone());
        let vals = hermitian_spectrum(&id).unwrap();
        assert!(vals.iter().all(|&v| (v - 1.0).abs() < 1e-12));

        // diag(q^{2k}) with the ∞ entry 0
        let gamma2 = AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 2, 0)).unwrap();
        let m = to_matrix(&gamma2, &cfg(1, 4, 0.5)).unwrap();
        let vals = hermitian_spectrum(&m).unwrap();
        let mut expected: Vec<f64> = (0..=4).map(|k| 0.25f64.powi(k)).collect();
        expected.push(0.0);
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(&expected) {
            assert!((v - e).abs() < 1e-12, "{v} vs {e}");
        }
    }

    #[test]
    fn jacobi_recovers_known_eigensystem() {
        // non-trivial complex hermitian matrix with hand-checkable residual
        let c = cfg(1, 2, 0.5);
        let mut m = TruncatedMatrix::zeros(c);
        let entries = [
            (0, 0, Complex64::new(2.0, 0.0)),
            (0, 1, Complex64::new(0.5, 0.7)),
            (0, 2, Complex64::new(-0.3, 0.1)),
            (1, 1, Complex64::new(-1.0, 0.0)),
            (1, 2, Complex64::new(0.2, -0.4)),
            (2, 2, Complex64::new(0.5, 0.0)),
            (3, 3, Complex64::new(1.5, 0.0)),
        ];
        for &(r, cc, v) in &entries {
            m.set(r, cc, v);
            if r != cc {
                m.set(cc, r, v.conj());
            }
        }
        let (vals, vecs) = hermitian_eigen(&m).unwrap();
        // residual ‖Av − λv‖ per pair
        for (lam, v) in vals.iter().zip(&vecs) {
            let av = m.mul_vec(v);
            let res: f64 = av
                .iter()
                .zip(v)
                .map(|(a, b)| (a - b * Complex64::new(*lam, 0.0)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "residual {res} for eigenvalue {lam}");
        }
        // trace and Frobenius preserved
        let tr: f64 = vals.iter().sum();
        assert!((tr - 3.0).abs() < 1e-10);
        let f2: f64 = vals.iter().map(|v| v * v).sum();
        assert!((f2 - m.frobenius().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let c = cfg(1, 1, 0.5);
        let mut m = TruncatedMatrix::zeros(c);
        m.set(0, 1, Complex64::new(1.0, 0.0));
        assert!(matches!(
            hermitian_spectrum(&m),
            Err(RepError::NotHermitian(_))
        ));
    }

    #[test]
    fn op_norm_matches_spectrum_peak() {
        let c = cfg(1, 6, 0.5);
        let gamma = AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 1, 0)).unwrap();
        let m = to_matrix(&gamma, &c).unwrap();
        assert!((op_norm_estimate(&m) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gram_rank_examples() {
        let c = cfg(1, 3, 0.5);
        let id = TruncatedMatrix::identity(c.clone());
        let mask: Vec<usize> = (0..c.dim()).collect();
        assert_eq!(gram_rank(std::slice::from_ref(&id), &mask, 1e-9).unwrap(), 1);
        let pair = [id.clone(), id.clone()];
        assert_eq!(gram_rank(&pair, &mask, 1e-9).unwrap(), 1);
        let two = id.scale(Complex64::new(2.0, 0.0));
        assert_eq!(gram_rank(&[id.clone(), two], &mask, 1e-9).unwrap(), 1);
        let gamma = to_matrix(
            &AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 1, 0)).unwrap(),
            &c,
        )
        .unwrap();
        assert_eq!(gram_rank(&[id, gamma], &mask, 1e-9).unwrap(), 2);
        assert!(gram_rank(&[], &mask, 1e-9).is_err());
    }

    #[test]
    fn export_format_is_stable() {
        let c = cfg_angles(1, 1, 0.5, 0.25, 0.75);
        let gamma = AlgebraElement::monomial(1, 0, vec![0], &E::pow(0, 1, 0)).unwrap();
        let m = to_matrix(&gamma, &c).unwrap();
        let text = m.export_text();
        let again = m.export_text();
        assert_eq!(text, again);
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("%%GroupoidMatrix n=1 N=1 theta=2.5"));
        // rows sorted, 17 significant digits
        let first = lines.next().unwrap();
        assert_eq!(first, format!("0 0 {} {}", fmt17(1.0), fmt17(0.0)));
        assert_eq!(fmt17(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn phase_only_elements_are_unimodular_diagonal() {
        // f supported on a single shift with x only in ∞ slots: on the face
        // the matrix block is diagonal with modulus-1 entries
        let c = cfg_angles(2, 3, 0.5, 0.6, 0.9);
        let f = AlgebraElement::monomial(2, 1, vec![-1, 0], &E::sqrt(0, 0))
            .unwrap()
            .rho_face(0);
        let m = to_matrix(&f, &c).unwrap();
        for col in 0..c.dim() {
            let u = c.unit_at(col);
            for row in 0..c.dim() {
                let v = m.get(row, col);
                if v.norm() > 0.0 {
                    assert_eq!(row, col);
                    assert!(u.in_face(0));
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }
}
