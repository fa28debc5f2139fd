//! Antisymmetric matrices, Pfaffians, and Gaussian Berezin integrals.

use crate::grassmann::{Grassmann, GrassmannError, Ring};
use crate::scalar::ExactScalar;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("pfaffian requires even dimension, got {0}")]
    OddDimension(usize),
    #[error("matrix is not antisymmetric at ({0},{1})")]
    NotAntisymmetric(usize, usize),
    #[error("singular matrix")]
    Singular,
    #[error("odd vector length {0} does not match dimension {1}")]
    LengthMismatch(usize, usize),
    #[error("odd Gaussian integral: closed form and expansion disagree")]
    GaussianMismatch,
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
}

/// Antisymmetric square matrix over a commutative ring.
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymMatrix<R: Ring> {
    dim: usize,
    entries: Vec<R>,
}

impl<R: Ring> AntisymMatrix<R> {
    /// Build from a full entry table, validating antisymmetry.
    pub fn new(dim: usize, entries: Vec<R>) -> Result<Self, MatrixError> {
        assert_eq!(entries.len(), dim * dim);
        for i in 0..dim {
            for j in 0..=i {
                let a = entries[i * dim + j].clone();
                let b = entries[j * dim + i].clone();
                if !(a + b).is_zero() {
                    return Err(MatrixError::NotAntisymmetric(i, j));
                }
            }
        }
        Ok(AntisymMatrix { dim, entries })
    }

    /// Build from the strict upper triangle, row-major.
    pub fn from_upper(dim: usize, upper: &[R]) -> Self {
        assert_eq!(upper.len(), dim * (dim - 1) / 2);
        let mut entries = vec![R::zero(); dim * dim];
        let mut k = 0;
        for i in 0..dim {
            for j in (i + 1)..dim {
                entries[i * dim + j] = upper[k].clone();
                entries[j * dim + i] = -upper[k].clone();
                k += 1;
            }
        }
        AntisymMatrix { dim, entries }
    }

    /// Standard symplectic form in dimension `2k`: blocks [[0,1],[-1,0]].
    pub fn standard(dim: usize) -> Self {
        assert!(dim % 2 == 0);
        let mut entries = vec![R::zero(); dim * dim];
        for b in 0..dim / 2 {
            entries[(2 * b) * dim + 2 * b + 1] = R::one();
            entries[(2 * b + 1) * dim + 2 * b] = -R::one();
        }
        AntisymMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.entries[i * self.dim + j].clone()
    }

    /// Pfaffian by recursive expansion along the first row.
    /// `Pf` of the standard symplectic form is 1.
    pub fn pfaffian(&self) -> Result<R, MatrixError> {
        if self.dim % 2 != 0 {
            return Err(MatrixError::OddDimension(self.dim));
        }
        Ok(pf_rec(self.dim, &self.entries))
    }

    /// Determinant by cofactor expansion. Kept here as the independent
    /// oracle for `Pf(A)² = det(A)`.
    pub fn determinant(&self) -> R {
        det_cofactor(self.dim, &self.entries)
    }
}

fn pf_rec<R: Ring>(dim: usize, m: &[R]) -> R {
    if dim == 0 {
        return R::one();
    }
    let mut acc = R::zero();
    for j in 1..dim {
        let a = m[j].clone(); // entry (0, j)
        if a.is_zero() {
            continue;
        }
        let sub = strike_out(dim, m, 0, j);
        let p = pf_rec(dim - 2, &sub);
        let term = a * p;
        // sign (-1)^j with rows/cols 0 and j removed
        if j % 2 == 1 {
            acc = acc + term;
        } else {
            acc = acc - term;
        }
    }
    acc
}

fn strike_out<R: Ring>(dim: usize, m: &[R], r: usize, s: usize) -> Vec<R> {
    let keep: Vec<usize> = (0..dim).filter(|&i| i != r && i != s).collect();
    let nd = keep.len();
    let mut out = Vec::with_capacity(nd * nd);
    for &i in &keep {
        for &j in &keep {
            out.push(m[i * dim + j].clone());
        }
    }
    out
}

fn det_cofactor<R: Ring>(dim: usize, m: &[R]) -> R {
    if dim == 0 {
        return R::one();
    }
    if dim == 1 {
        return m[0].clone();
    }
    let mut acc = R::zero();
    for j in 0..dim {
        let a = m[j].clone();
        if a.is_zero() {
            continue;
        }
        let mut sub = Vec::with_capacity((dim - 1) * (dim - 1));
        for i in 1..dim {
            for k in 0..dim {
                if k != j {
                    sub.push(m[i * dim + k].clone());
                }
            }
        }
        let term = a * det_cofactor(dim - 1, &sub);
        if j % 2 == 0 {
            acc = acc + term;
        } else {
            acc = acc - term;
        }
    }
    acc
}

/// Inverse of a general square matrix over the Gaussian rationals.
pub fn invert(dim: usize, m: &[ExactScalar]) -> Result<Vec<ExactScalar>, MatrixError> {
    let mut a: Vec<ExactScalar> = m.to_vec();
    let mut inv: Vec<ExactScalar> = vec![ExactScalar::zero(); dim * dim];
    for i in 0..dim {
        inv[i * dim + i] = ExactScalar::one();
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .find(|&r| !a[r * dim + col].is_zero())
            .ok_or(MatrixError::Singular)?;
        if pivot != col {
            for j in 0..dim {
                a.swap(pivot * dim + j, col * dim + j);
                inv.swap(pivot * dim + j, col * dim + j);
            }
        }
        let p = a[col * dim + col].clone().inv();
        for j in 0..dim {
            a[col * dim + j] = a[col * dim + j].clone() * p.clone();
            inv[col * dim + j] = inv[col * dim + j].clone() * p.clone();
        }
        for r in 0..dim {
            if r == col || a[r * dim + col].is_zero() {
                continue;
            }
            let f = a[r * dim + col].clone();
            for j in 0..dim {
                let t = a[col * dim + j].clone() * f.clone();
                a[r * dim + j] = a[r * dim + j].clone() - t;
                let t = inv[col * dim + j].clone() * f.clone();
                inv[r * dim + j] = inv[r * dim + j].clone() - t;
            }
        }
    }
    Ok(inv)
}

/// Result of an odd Gaussian integral: the direct Berezin expansion and the
/// Pfaffian closed form, which are required to agree.
#[derive(Clone, Debug, PartialEq)]
pub struct OddGaussian {
    pub expansion: Grassmann<ExactScalar>,
    pub closed_form: Grassmann<ExactScalar>,
}

/// `∫dχ exp(-½⟨χ,Aχ⟩ + ⟨χ,B⟩)` over the first `dim(A)` generators of the
/// ambient Grassmann algebra. The entries of `B` must be odd elements
/// supported on generators above `dim(A)`. The closed form
/// `Pf(A)·exp(½⟨B,A⁻¹B⟩)` is computed independently and the call fails
/// unless both routes agree exactly.
pub fn odd_gaussian_integral(
    a: &AntisymMatrix<ExactScalar>,
    b: &[Grassmann<ExactScalar>],
    budget: usize,
) -> Result<OddGaussian, MatrixError> {
    let n = a.dim();
    if n % 2 != 0 {
        return Err(MatrixError::OddDimension(n));
    }
    if !b.is_empty() && b.len() != n {
        return Err(MatrixError::LengthMismatch(b.len(), n));
    }
    let chi: Vec<Grassmann<ExactScalar>> =
        (1..=n).map(|i| Grassmann::gen(budget, i)).collect();
    let bvec: Vec<Grassmann<ExactScalar>> = if b.is_empty() {
        vec![Grassmann::zero(budget); n]
    } else {
        b.to_vec()
    };
    for (i, bi) in bvec.iter().enumerate() {
        if !bi.is_odd() && !bi.is_zero() {
            return Err(MatrixError::LengthMismatch(i, n));
        }
        for (mask, _) in bi.terms() {
            if mask & ((1u64 << n) - 1) != 0 {
                return Err(MatrixError::LengthMismatch(i, n));
            }
        }
    }

    // exponent: -½ Σ χ_i A_ij χ_j + Σ χ_i B_i
    let half = ExactScalar::ratio(1, 2);
    let mut exponent = Grassmann::zero(budget);
    for i in 0..n {
        for j in 0..n {
            let aij = a.get(i, j);
            if aij.is_zero() {
                continue;
            }
            let t = chi[i].try_mul(&chi[j])?.scale(&(-(half.clone() * aij)));
            exponent = exponent + t;
        }
        exponent = exponent + chi[i].try_mul(&bvec[i])?;
    }
    let over: Vec<usize> = (1..=n).collect();
    let expansion = exponent.exp()?.berezin(&over)?;

    // Closed form Pf(A)·exp(-½⟨B, A⁻¹B⟩); only available when A is invertible.
    // The sign of the source exponent is tied to the Berezin ordering
    // convention fixed in `grassmann`: with ∫dε₁dε₂ ε₂ε₁ = 1 the direct
    // expansion produces Pf(A)·exp(-½ Σ B_i (A⁻¹)_ij B_j).
    let pf = a.pfaffian()?;
    let entries: Vec<ExactScalar> = (0..n * n)
        .map(|k| a.get(k / n, k % n))
        .collect();
    let closed_form = match invert(n, &entries) {
        Ok(ainv) => {
            let mut quad = Grassmann::zero(budget);
            for i in 0..n {
                for j in 0..n {
                    let c = ainv[i * n + j].clone();
                    if c.is_zero() {
                        continue;
                    }
                    quad = quad + bvec[i].try_mul(&bvec[j])?.scale(&(-(half.clone() * c)));
                }
            }
            quad.exp()?.scale(&pf)
        }
        Err(MatrixError::Singular) => {
            if bvec.iter().all(|x| x.is_zero()) {
                Grassmann::scalar(budget, pf)
            } else {
                return Err(MatrixError::Singular);
            }
        }
        Err(e) => return Err(e),
    };

    if expansion != closed_form {
        return Err(MatrixError::GaussianMismatch);
    }
    Ok(OddGaussian {
        expansion,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd_scalar(rng: &mut ChaCha8Rng) -> ExactScalar {
        ExactScalar::ratio(rng.gen_range(-7..=7), rng.gen_range(1..=7))
    }

    #[test]
    fn pfaffian_basics() {
        let a = ExactScalar::ratio(3, 4);
        let m = AntisymMatrix::from_upper(2, &[a.clone()]);
        assert_eq!(m.pfaffian().unwrap(), a);
        let std4 = AntisymMatrix::<ExactScalar>::standard(4);
        assert_eq!(std4.pfaffian().unwrap(), ExactScalar::one());
        let odd = AntisymMatrix::<ExactScalar>::from_upper(3, &[
            ExactScalar::zero(),
            ExactScalar::zero(),
            ExactScalar::zero(),
        ]);
        assert_eq!(odd.pfaffian().unwrap_err(), MatrixError::OddDimension(3));
    }

    #[test]
    fn antisymmetry_validated() {
        let bad = AntisymMatrix::new(
            2,
            vec![
                ExactScalar::zero(),
                ExactScalar::one(),
                ExactScalar::one(),
                ExactScalar::zero(),
            ],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn pf_squared_is_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [2usize, 4, 6] {
            for _ in 0..5 {
                let upper: Vec<ExactScalar> = (0..dim * (dim - 1) / 2)
                    .map(|_| rnd_scalar(&mut rng))
                    .collect();
                let m = AntisymMatrix::from_upper(dim, &upper);
                let pf = m.pfaffian().unwrap();
                assert_eq!(pf.clone() * pf, m.determinant());
            }
        }
    }

    #[test]
    fn pf_congruence() {
        // Pf(MᵀAM) = det(M)·Pf(A)
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dim = 4;
        for _ in 0..5 {
            let upper: Vec<ExactScalar> = (0..6).map(|_| rnd_scalar(&mut rng)).collect();
            let a = AntisymMatrix::from_upper(dim, &upper);
            let m: Vec<ExactScalar> = (0..dim * dim).map(|_| rnd_scalar(&mut rng)).collect();
            // C = MᵀAM
            let mut c = vec![ExactScalar::zero(); dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    let mut s = ExactScalar::zero();
                    for p in 0..dim {
                        for q in 0..dim {
                            s += m[p * dim + i].clone()
                                * a.get(p, q)
                                * m[q * dim + j].clone();
                        }
                    }
                    c[i * dim + j] = s;
                }
            }
            let cm = AntisymMatrix::new(dim, c).unwrap();
            let detm = det_cofactor(dim, &m);
            assert_eq!(cm.pfaffian().unwrap(), detm * a.pfaffian().unwrap());
        }
    }

    #[test]
    fn gaussian_no_source() {
        // dim 2, A = a·standard, B = 0 → a
        let a = ExactScalar::ratio(-5, 3);
        let m = AntisymMatrix::from_upper(2, &[a.clone()]);
        let r = odd_gaussian_integral(&m, &[], 8).unwrap();
        assert_eq!(r.expansion, Grassmann::scalar(8, a));
    }

    #[test]
    fn gaussian_dim4_is_pfaffian() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let upper: Vec<ExactScalar> = (0..6).map(|_| rnd_scalar(&mut rng)).collect();
            let m = AntisymMatrix::from_upper(4, &upper);
            let r = odd_gaussian_integral(&m, &[], 8).unwrap();
            assert_eq!(r.expansion, Grassmann::scalar(8, m.pfaffian().unwrap()));
        }
    }

    #[test]
    fn gaussian_with_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let a = rnd_scalar(&mut rng);
            if a.is_zero() {
                continue;
            }
            let m = AntisymMatrix::from_upper(2, &[a]);
            let b = vec![
                Grassmann::gen(8, 3).scale(&rnd_scalar(&mut rng)),
                Grassmann::gen(8, 4).scale(&rnd_scalar(&mut rng)),
            ];
            // the call itself enforces closed form == expansion
            odd_gaussian_integral(&m, &b, 8).unwrap();
        }
    }
}
