//! Exact exterior calculus on the flat unit-volume torus Tⁿ.
//!
//! A form is a finite sum  Σ C_{k,I} · e_k · dx^I  where `e_k` are Fourier
//! modes with `d e_k = i Σ k_μ dx^μ e_k` (frequencies absorb 2π, so every
//! coefficient stays a Gaussian rational and `∫ vol = 1`), `dx^I` runs over
//! sorted index subsets, and the coefficients `C` are matrices over a
//! Grassmann algebra (ghost-odd field values are ε-linear).
//!
//! Normal form: values are written to the LEFT of the form part. Ghost-odd
//! coefficients and `dx` anticommute under the total (ghost + form) parity
//! convention, so an operator that inserts a `dx` from the left (exterior
//! derivative, interior product, covector wedge) picks up the grade
//! involution of the coefficient it crosses. With this bookkeeping the
//! graded Leibniz rule `d(α∧β) = dα∧β + (−1)^{|α|} α∧dβ` holds exactly for
//! `|α|` the total parity (checked in tests, not assumed).

use crate::grassmann::{merge_sign, Grassmann};
use crate::scalar::ExactScalar;
use std::collections::BTreeMap;
use thiserror::Error;

pub type G = Grassmann<ExactScalar>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("value shape mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("operation requires degree {0}, form has degree {1}")]
    WrongDegree(usize, usize),
    #[error("operation requires dimension 4, form has dimension {0}")]
    NotDim4(usize),
    #[error("coefficients are not parity-homogeneous")]
    MixedParity,
}

/// Matrix with Grassmann entries; the pointwise value of a matrix-valued form.
#[derive(Clone, Debug, PartialEq)]
pub struct GMat {
    pub rows: usize,
    pub cols: usize,
    pub budget: usize,
    pub data: Vec<G>,
}

impl GMat {
    pub fn zeros(rows: usize, cols: usize, budget: usize) -> Self {
        GMat {
            rows,
            cols,
            budget,
            data: vec![G::zero(budget); rows * cols],
        }
    }

    pub fn identity(n: usize, budget: usize) -> Self {
        let mut m = Self::zeros(n, n, budget);
        for i in 0..n {
            m.data[i * n + i] = G::one(budget);
        }
        m
    }

    pub fn scalar(c: G) -> Self {
        let budget = c.budget();
        GMat {
            rows: 1,
            cols: 1,
            budget,
            data: vec![c],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &G {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: G) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|g| g.is_zero())
    }

    pub fn add(&self, o: &GMat) -> GMat {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        GMat {
            rows: self.rows,
            cols: self.cols,
            budget: self.budget,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn neg(&self) -> GMat {
        self.map(|g| -g.clone())
    }

    pub fn map<F: Fn(&G) -> G>(&self, f: F) -> GMat {
        GMat {
            rows: self.rows,
            cols: self.cols,
            budget: self.budget,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &ExactScalar) -> GMat {
        self.map(|g| g.scale(c))
    }

    pub fn scale_g(&self, c: &G) -> GMat {
        self.map(|g| c.try_mul(g).expect("budget"))
    }

    pub fn matmul(&self, o: &GMat) -> GMat {
        assert_eq!(
            self.cols, o.rows,
            "matmul shape {}x{} * {}x{}",
            self.rows, self.cols, o.rows, o.cols
        );
        let mut out = GMat::zeros(self.rows, o.cols, self.budget);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).clone() + a.try_mul(b).expect("budget");
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn commutator(&self, o: &GMat) -> GMat {
        self.matmul(o).add(&o.matmul(self).neg())
    }

    pub fn trace(&self) -> G {
        assert_eq!(self.rows, self.cols);
        let mut t = G::zero(self.budget);
        for i in 0..self.rows {
            t = t + self.get(i, i).clone();
        }
        t
    }

    pub fn transpose(&self) -> GMat {
        let mut out = GMat::zeros(self.cols, self.rows, self.budget);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Conjugate scalar coefficients entrywise (generators fixed).
    pub fn conj_coeffs(&self) -> GMat {
        self.map(|g| g.conj_coeffs())
    }

    /// Grade involution: negate ghost-odd monomials entrywise.
    pub fn grade_involution(&self) -> GMat {
        self.map(|g| g.grade_involution())
    }

    /// Ghost parity if all entries are homogeneous of the same parity.
    pub fn parity(&self) -> Option<usize> {
        let mut p: Option<usize> = None;
        for g in &self.data {
            if g.is_zero() {
                continue;
            }
            let q = if g.is_even() {
                0
            } else if g.is_odd() {
                1
            } else {
                return None;
            };
            match p {
                None => p = Some(q),
                Some(r) if r == q => {}
                _ => return None,
            }
        }
        Some(p.unwrap_or(0))
    }
}

pub type Freq = Vec<i32>;

/// Matrix-valued differential form on Tⁿ with finite Fourier support.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierForm {
    pub dim: usize,
    pub degree: usize,
    pub rows: usize,
    pub cols: usize,
    pub budget: usize,
    terms: BTreeMap<(Freq, u16), GMat>,
}

fn mask_degree(mask: u16) -> usize {
    mask.count_ones() as usize
}

impl FourierForm {
    pub fn zero(dim: usize, degree: usize, rows: usize, cols: usize, budget: usize) -> Self {
        FourierForm {
            dim,
            degree,
            rows,
            cols,
            budget,
            terms: BTreeMap::new(),
        }
    }

    /// Scalar constant 0-form.
    pub fn constant(dim: usize, c: ExactScalar, budget: usize) -> Self {
        let mut f = Self::zero(dim, 0, 1, 1, budget);
        f.add_term(vec![0; dim], 0, GMat::scalar(G::scalar(budget, c)));
        f
    }

    /// The volume form dx¹∧…∧dxⁿ.
    pub fn volume(dim: usize, budget: usize) -> Self {
        let mut f = Self::zero(dim, dim, 1, 1, budget);
        let mask = (1u16 << dim) - 1;
        f.add_term(vec![0; dim], mask, GMat::scalar(G::one(budget)));
        f
    }

    /// Basis covector dx^mu (1-based index).
    pub fn dx(dim: usize, mu: usize, budget: usize) -> Self {
        assert!(mu >= 1 && mu <= dim);
        let mut f = Self::zero(dim, 1, 1, 1, budget);
        f.add_term(vec![0; dim], 1u16 << (mu - 1), GMat::scalar(G::one(budget)));
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Freq, u16), &GMat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, freq: Freq, mask: u16, value: GMat) {
        assert_eq!(freq.len(), self.dim);
        assert_eq!(mask_degree(mask), self.degree, "mask degree");
        assert_eq!((value.rows, value.cols), (self.rows, self.cols));
        if value.is_zero() {
            return;
        }
        match self.terms.entry((freq, mask)) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(value);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&value);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, o: &FourierForm) -> Result<FourierForm, FormError> {
        if self.dim != o.dim {
            return Err(FormError::DimMismatch(self.dim, o.dim));
        }
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        if self.degree != o.degree {
            return Err(FormError::DegreeMismatch(self.degree, o.degree));
        }
        if (self.rows, self.cols) != (o.rows, o.cols) {
            return Err(FormError::ShapeMismatch(self.rows, self.cols, o.rows, o.cols));
        }
        let mut out = self.clone();
        for ((k, m), v) in &o.terms {
            out.add_term(k.clone(), *m, v.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> FourierForm {
        self.map_values(|v| v.neg())
    }

    pub fn sub(&self, o: &FourierForm) -> Result<FourierForm, FormError> {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &ExactScalar) -> FourierForm {
        self.map_values(|v| v.scale(c))
    }

    pub fn map_values<F: Fn(&GMat) -> GMat>(&self, f: F) -> FourierForm {
        let mut out = FourierForm::zero(self.dim, self.degree, self.rows, self.cols, self.budget);
        for ((k, m), v) in &self.terms {
            let w = f(v);
            if !w.is_zero() {
                out.add_term(k.clone(), *m, w);
            }
        }
        out
    }

    /// Map values with a shape-changing function (e.g. trace, projector).
    pub fn map_shape<F: Fn(&GMat) -> GMat>(
        &self,
        rows: usize,
        cols: usize,
        f: F,
    ) -> FourierForm {
        let mut out = FourierForm::zero(self.dim, self.degree, rows, cols, self.budget);
        for ((k, m), v) in &self.terms {
            let w = f(v);
            if !w.is_zero() {
                out.add_term(k.clone(), *m, w);
            }
        }
        out
    }

    /// Ghost parity of the coefficients, if homogeneous.
    pub fn ghost_parity(&self) -> Result<usize, FormError> {
        let mut p: Option<usize> = None;
        for v in self.terms.values() {
            match v.parity() {
                Some(q) => match p {
                    None => p = Some(q),
                    Some(r) if r == q => {}
                    _ => return Err(FormError::MixedParity),
                },
                None => return Err(FormError::MixedParity),
            }
        }
        Ok(p.unwrap_or(0))
    }

    /// Total (ghost + form) parity.
    pub fn total_parity(&self) -> Result<usize, FormError> {
        Ok((self.ghost_parity()? + self.degree) % 2)
    }

    /// Wedge product with an arbitrary value combiner. The combiner sees the
    /// right value already grade-involuted for the crossing past the left
    /// form part.
    pub fn wedge_with<F: Fn(&GMat, &GMat) -> GMat>(
        &self,
        o: &FourierForm,
        rows: usize,
        cols: usize,
        f: F,
    ) -> Result<FourierForm, FormError> {
        if self.dim != o.dim {
            return Err(FormError::DimMismatch(self.dim, o.dim));
        }
        let degree = self.degree + o.degree;
        let mut out = FourierForm::zero(self.dim, degree.min(self.dim), rows, cols, self.budget);
        if degree > self.dim {
            // wedge beyond top degree is zero, not an error
            return Ok(FourierForm::zero(self.dim, 0, rows, cols, self.budget));
        }
        for ((k1, m1), v1) in &self.terms {
            let cross = mask_degree(*m1) % 2 == 1;
            for ((k2, m2), v2) in &o.terms {
                if m1 & m2 != 0 {
                    continue;
                }
                let sign = merge_sign(*m1 as u64, *m2 as u64);
                let v2x = if cross {
                    v2.grade_involution()
                } else {
                    v2.clone()
                };
                let mut val = f(v1, &v2x);
                if sign < 0 {
                    val = val.neg();
                }
                let freq: Freq = k1.iter().zip(k2).map(|(a, b)| a + b).collect();
                out.add_term(freq, m1 | m2, val);
            }
        }
        Ok(out)
    }

    /// Wedge with matrix multiplication on values.
    pub fn wedge_mul(&self, o: &FourierForm) -> Result<FourierForm, FormError> {
        if self.cols != o.rows {
            // a structural zero multiplies anything
            if self.is_zero() || o.is_zero() {
                let degree = (self.degree + o.degree).min(self.dim);
                return Ok(FourierForm::zero(
                    self.dim,
                    degree,
                    self.rows,
                    o.cols,
                    self.budget,
                ));
            }
            return Err(FormError::ShapeMismatch(self.rows, self.cols, o.rows, o.cols));
        }
        self.wedge_with(o, self.rows, o.cols, |a, b| a.matmul(b))
    }

    /// Graded wedge-bracket on matrix-Lie-valued forms:
    /// `[α,β] = α∧β − (−1)^{|α||β|} β∧α` with total parities.
    pub fn wedge_bracket(&self, o: &FourierForm) -> Result<FourierForm, FormError> {
        let p = self.total_parity()?;
        let q = o.total_parity()?;
        let ab = self.wedge_mul(o)?;
        let ba = o.wedge_mul(self)?;
        if (p * q) % 2 == 1 {
            ab.add(&ba)
        } else {
            ab.sub(&ba)
        }
    }

    /// Exterior derivative: mode-wise multiplication by `i k_μ dx^μ` from the
    /// left (grade involution of the crossed coefficient included).
    pub fn exterior_d(&self) -> FourierForm {
        let mut out =
            FourierForm::zero(self.dim, (self.degree + 1).min(self.dim), self.rows, self.cols, self.budget);
        if self.degree + 1 > self.dim {
            return out;
        }
        for ((k, m), v) in &self.terms {
            let vx = v.grade_involution();
            for mu in 0..self.dim {
                if k[mu] == 0 {
                    continue;
                }
                let bit = 1u16 << mu;
                if m & bit != 0 {
                    continue;
                }
                let sign = merge_sign(bit as u64, *m as u64);
                let c = ExactScalar::i() * ExactScalar::from_int(k[mu] as i64);
                let c = if sign < 0 { -c } else { c };
                out.add_term(k.clone(), m | bit, vx.scale(&c));
            }
        }
        out
    }

    /// Coordinate derivative ∂_μ (1-based): mode-wise `i k_μ`, no dx.
    pub fn partial(&self, mu: usize) -> FourierForm {
        let mut out = FourierForm::zero(self.dim, self.degree, self.rows, self.cols, self.budget);
        for ((k, m), v) in &self.terms {
            if k[mu - 1] == 0 {
                continue;
            }
            let c = ExactScalar::i() * ExactScalar::from_int(k[mu - 1] as i64);
            out.add_term(k.clone(), *m, v.scale(&c));
        }
        out
    }

    /// Left wedge by dx^μ (1-based), crossing the coefficient.
    pub fn lmul_dx(&self, mu: usize) -> FourierForm {
        let bit = 1u16 << (mu - 1);
        let mut out =
            FourierForm::zero(self.dim, (self.degree + 1).min(self.dim), self.rows, self.cols, self.budget);
        if self.degree + 1 > self.dim {
            return out;
        }
        for ((k, m), v) in &self.terms {
            if m & bit != 0 {
                continue;
            }
            let sign = merge_sign(bit as u64, *m as u64);
            let mut vx = v.grade_involution();
            if sign < 0 {
                vx = vx.neg();
            }
            out.add_term(k.clone(), m | bit, vx);
        }
        out
    }

    /// Interior product ι_{e_μ} (1-based), crossing the coefficient.
    pub fn iota(&self, mu: usize) -> FourierForm {
        let bit = 1u16 << (mu - 1);
        let mut out = FourierForm::zero(
            self.dim,
            self.degree.saturating_sub(1),
            self.rows,
            self.cols,
            self.budget,
        );
        if self.degree == 0 {
            return out;
        }
        for ((k, m), v) in &self.terms {
            if m & bit == 0 {
                continue;
            }
            let lower = (m & (bit - 1)).count_ones();
            let mut vx = v.grade_involution();
            if lower % 2 == 1 {
                vx = vx.neg();
            }
            out.add_term(k.clone(), m & !bit, vx);
        }
        out
    }

    /// Hodge star for the flat metric, orientation dx¹…dxⁿ:
    /// `⋆ dx^I = sign(I, Iᶜ) dx^{Iᶜ}`.
    pub fn hodge_star(&self) -> FourierForm {
        let full = (1u16 << self.dim) - 1;
        let mut out = FourierForm::zero(
            self.dim,
            self.dim - self.degree,
            self.rows,
            self.cols,
            self.budget,
        );
        for ((k, m), v) in &self.terms {
            let comp = full & !m;
            let sign = merge_sign(*m as u64, comp as u64);
            let val = if sign < 0 { v.neg() } else { v.clone() };
            out.add_term(k.clone(), comp, val);
        }
        out
    }

    /// Self-dual / anti-self-dual projection of a 2-form on T⁴.
    pub fn sd_project(&self, plus: bool) -> Result<FourierForm, FormError> {
        if self.dim != 4 {
            return Err(FormError::NotDim4(self.dim));
        }
        if self.degree != 2 {
            return Err(FormError::WrongDegree(2, self.degree));
        }
        let s = self.hodge_star();
        let half = ExactScalar::ratio(1, 2);
        let sum = if plus { self.add(&s)? } else { self.sub(&s)? };
        Ok(sum.scale(&half))
    }

    /// Codifferential `d* = −⋆d⋆` (n = 4 Euclidean; sign verified by the
    /// adjointness test, not assumed).
    pub fn codifferential(&self) -> FourierForm {
        self.hodge_star().exterior_d().hodge_star().neg()
    }

    /// Integral of a top-degree form over the unit-volume torus: the
    /// zero-mode coefficient.
    pub fn integrate(&self) -> Result<GMat, FormError> {
        if self.degree != self.dim && !self.is_zero() {
            return Err(FormError::WrongDegree(self.dim, self.degree));
        }
        let key = (vec![0i32; self.dim], (1u16 << self.dim) - 1);
        Ok(self
            .terms
            .get(&key)
            .cloned()
            .unwrap_or_else(|| GMat::zeros(self.rows, self.cols, self.budget)))
    }

    /// Complex conjugate as a function: conjugate coefficients, negate
    /// frequencies, fix dx and ε.
    pub fn conj(&self) -> FourierForm {
        let mut out = FourierForm::zero(self.dim, self.degree, self.rows, self.cols, self.budget);
        for ((k, m), v) in &self.terms {
            let nk: Freq = k.iter().map(|x| -x).collect();
            out.add_term(nk, *m, v.conj_coeffs());
        }
        out
    }

    /// Formal conjugation of a Lie-algebra-valued form: conjugate the
    /// expansion coefficients over a fixed anti-Hermitian basis while
    /// keeping the basis matrices themselves. For an anti-Hermitian basis
    /// this is minus the entrywise-conjugate transpose, with frequencies
    /// negated as in [`FourierForm::conj`].
    pub fn conj_ad(&self) -> FourierForm {
        let mut out = FourierForm::zero(self.dim, self.degree, self.cols, self.rows, self.budget);
        for ((k, m), v) in &self.terms {
            let nk: Freq = k.iter().map(|x| -x).collect();
            out.add_term(nk, *m, v.conj_coeffs().transpose().neg());
        }
        out
    }

    /// Real part `(x + x̄)/2` with respect to [`FourierForm::conj_ad`].
    pub fn real_part_ad(&self) -> FourierForm {
        self.add(&self.conj_ad())
            .expect("same shape")
            .scale(&ExactScalar::ratio(1, 2))
    }

    /// Imaginary part `(x − x̄)/2i` with respect to [`FourierForm::conj_ad`].
    pub fn imag_part_ad(&self) -> FourierForm {
        self.sub(&self.conj_ad())
            .expect("same shape")
            .scale(&(ExactScalar::ratio(1, 2) * ExactScalar::i().inv()))
    }

    /// Real part `(x + x̄)/2`.
    pub fn real_part(&self) -> FourierForm {
        self.add(&self.conj())
            .expect("same shape")
            .scale(&ExactScalar::ratio(1, 2))
    }

    /// Imaginary part `(x − x̄)/2i`.
    pub fn imag_part(&self) -> FourierForm {
        self.sub(&self.conj())
            .expect("same shape")
            .scale(&(ExactScalar::ratio(1, 2) * ExactScalar::i().inv()))
    }
}

/// Pairing conventions for `inner_density`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    /// Scalar-valued forms: plain multiplication.
    Scalar,
    /// Matrix Lie values: normalized `−Tr(a·b)` with the given (num, den)
    /// normalization.
    LieTrace(i64, i64),
    /// Spinor columns: Hermitian `σ₁†σ₂` with function-level conjugation of
    /// the first slot, followed by the real part.
    SpinorRe,
}

/// `⟨α,β⟩ vol := pairing(α ∧ ⋆β)`.
pub fn inner_density(
    a: &FourierForm,
    b: &FourierForm,
    pairing: Pairing,
) -> Result<FourierForm, FormError> {
    if a.degree != b.degree && !a.is_zero() && !b.is_zero() {
        return Err(FormError::DegreeMismatch(a.degree, b.degree));
    }
    let sb = b.hodge_star();
    match pairing {
        Pairing::Scalar => a.wedge_mul(&sb),
        Pairing::LieTrace(num, den) => {
            let prod = a.wedge_with(&sb, 1, 1, |x, y| GMat::scalar(x.matmul(y).trace()))?;
            Ok(prod.scale(&ExactScalar::ratio(-num, den)))
        }
        Pairing::SpinorRe => {
            let ac = a.conj();
            let prod = ac.wedge_with(&sb, 1, 1, |x, y| {
                GMat::scalar(x.transpose().matmul(y).trace())
            })?;
            Ok(prod.real_part())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd_scalar(rng: &mut ChaCha8Rng) -> ExactScalar {
        ExactScalar::ratio(rng.gen_range(-7..=7), rng.gen_range(1..=7))
    }

    /// Random scalar-valued form of the given degree with sparse support.
    fn rnd_form(rng: &mut ChaCha8Rng, degree: usize) -> FourierForm {
        let mut f = FourierForm::zero(4, degree, 1, 1, 8);
        let masks: Vec<u16> = (0u16..16)
            .filter(|m| mask_degree(*m) == degree)
            .collect();
        for _ in 0..3 {
            let k: Freq = (0..4).map(|_| rng.gen_range(-2..=2)).collect();
            let m = masks[rng.gen_range(0..masks.len())];
            f.add_term(k, m, GMat::scalar(G::scalar(8, rnd_scalar(rng))));
        }
        f
    }

    #[test]
    fn wedge_basics() {
        let dx1 = FourierForm::dx(4, 1, 8);
        let dx2 = FourierForm::dx(4, 2, 8);
        let a = dx1.wedge_mul(&dx2).unwrap();
        let b = dx2.wedge_mul(&dx1).unwrap();
        assert_eq!(a, b.neg());
        assert!(dx1.wedge_mul(&dx1).unwrap().is_zero());
    }

    #[test]
    fn one_forms_anticommute() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = rnd_form(&mut rng, 1);
        let b = rnd_form(&mut rng, 1);
        let ab = a.wedge_mul(&b).unwrap();
        let ba = b.wedge_mul(&a).unwrap();
        assert_eq!(ab, ba.neg());
    }

    #[test]
    fn d_squared_zero_and_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for deg in 0..3 {
            let a = rnd_form(&mut rng, deg);
            assert!(a.exterior_d().exterior_d().is_zero());
        }
        let a = rnd_form(&mut rng, 1);
        let b = rnd_form(&mut rng, 2);
        let lhs = a.wedge_mul(&b).unwrap().exterior_d();
        let mut rhs = a.exterior_d().wedge_mul(&b).unwrap();
        let adb = a.wedge_mul(&b.exterior_d()).unwrap();
        // |a| odd (degree 1, even coefficients)
        rhs = rhs.sub(&adb).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn star_involution() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let w = rnd_form(&mut rng, 2);
        assert_eq!(w.hodge_star().hodge_star(), w);
        // ⋆⋆ = (−1)^{k(n−k)} on degree 1 in n=4: sign −1
        let a = rnd_form(&mut rng, 1);
        assert_eq!(a.hodge_star().hodge_star(), a.neg());
        let dx1 = FourierForm::dx(4, 1, 8);
        let d234 = FourierForm::dx(4, 2, 8)
            .wedge_mul(&FourierForm::dx(4, 3, 8))
            .unwrap()
            .wedge_mul(&FourierForm::dx(4, 4, 8))
            .unwrap();
        assert_eq!(dx1.hodge_star(), d234);
        let vol = FourierForm::volume(4, 8);
        assert_eq!(vol.hodge_star(), FourierForm::constant(4, ExactScalar::one(), 8));
    }

    #[test]
    fn sd_projection() {
        let dx12 = FourierForm::dx(4, 1, 8)
            .wedge_mul(&FourierForm::dx(4, 2, 8))
            .unwrap();
        let dx34 = FourierForm::dx(4, 3, 8)
            .wedge_mul(&FourierForm::dx(4, 4, 8))
            .unwrap();
        let sd = dx12.add(&dx34).unwrap();
        let asd = dx12.sub(&dx34).unwrap();
        assert_eq!(sd.sd_project(true).unwrap(), sd);
        assert!(asd.sd_project(true).unwrap().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let w = rnd_form(&mut rng, 2);
        let wp = w.sd_project(true).unwrap();
        let wm = w.sd_project(false).unwrap();
        assert_eq!(wp.add(&wm).unwrap(), w);
        assert_eq!(wp.sd_project(true).unwrap(), wp);
        assert_eq!(wp.hodge_star(), wp);
        // orthogonality of the two projections under the integral
        let dens = inner_density(&wp, &wm, Pairing::Scalar).unwrap();
        assert!(dens.integrate().unwrap().is_zero());
    }

    #[test]
    fn integration() {
        let vol = FourierForm::volume(4, 8);
        assert_eq!(
            vol.integrate().unwrap(),
            GMat::scalar(G::one(8))
        );
        let mut ek = FourierForm::zero(4, 4, 1, 1, 8);
        ek.add_term(vec![1, 0, 0, 0], 0b1111, GMat::scalar(G::one(8)));
        assert!(ek.integrate().unwrap().is_zero());
        // Stokes: ∫ d(3-form) = 0
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let b = rnd_form(&mut rng, 3);
        assert!(b.exterior_d().integrate().unwrap().is_zero());
    }

    #[test]
    fn codifferential_adjoint() {
        let c = FourierForm::constant(4, ExactScalar::ratio(2, 3), 8);
        let cdx1 = c.wedge_mul(&FourierForm::dx(4, 1, 8)).unwrap();
        assert!(cdx1.codifferential().is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..3 {
            let a = rnd_form(&mut rng, 1);
            let b = rnd_form(&mut rng, 2);
            let lhs = inner_density(&a.exterior_d(), &b, Pairing::Scalar)
                .unwrap()
                .integrate()
                .unwrap();
            let rhs = inner_density(&a, &b.codifferential(), Pairing::Scalar)
                .unwrap()
                .integrate()
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn laplacian_on_one_forms() {
        // (d*d + dd*) acts mode-wise as Σ k² on scalar-valued 1-forms
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = rnd_form(&mut rng, 1);
        let lap = a
            .exterior_d()
            .codifferential()
            .add(&a.codifferential().exterior_d())
            .unwrap();
        let mut expect = FourierForm::zero(4, 1, 1, 1, 8);
        for ((k, m), v) in a.terms() {
            let k2: i64 = k.iter().map(|x| (*x as i64) * (*x as i64)).sum();
            expect.add_term(k.clone(), *m, v.scale(&ExactScalar::from_int(k2)));
        }
        assert_eq!(lap, expect);
    }

    #[test]
    fn conjugation_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = rnd_form(&mut rng, 2);
        assert_eq!(a.conj().conj(), a);
        let re = a.real_part();
        assert_eq!(re.conj(), re);
    }
}
