//! Free graded-commutative algebras over the exact scalars, with
//! derivations defined by generator images and extended by the graded
//! Leibniz rule.
//!
//! Monomials are stored as exponent vectors over a fixed ordered generator
//! list, with Koszul-sign normalization on multiplication. Odd generators
//! square to zero. A truncation bound caps the total polynomial degree in
//! even generators of nonzero degree (the curvature-type generators);
//! hitting it is recorded on the element, never silent.

use crate::scalar::ExactScalar;
use num_traits::Zero;
use rand::Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GcaError {
    #[error("unknown generator index {0}")]
    UnknownGenerator(usize),
    #[error("derivation image for generator {0} has degree {1}, expected {2}")]
    BadImageDegree(usize, i64, i64),
    #[error("derivation image count {0} does not match generator count {1}")]
    BadImageCount(usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenInfo {
    pub name: String,
    pub degree: i64,
}

impl GenInfo {
    pub fn new(name: &str, degree: i64) -> Self {
        GenInfo {
            name: name.to_string(),
            degree,
        }
    }

    pub fn is_odd(&self) -> bool {
        self.degree.rem_euclid(2) == 1
    }
}

pub type Mono = Vec<u16>;

/// Element of a [`Algebra`]: canonical sum of monomials. `truncated` records
/// whether any operation producing this element dropped a term at the
/// truncation bound.
#[derive(Clone, Debug, PartialEq)]
pub struct El {
    pub terms: BTreeMap<Mono, ExactScalar>,
    pub truncated: bool,
}

impl El {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Algebra {
    pub gens: Vec<GenInfo>,
    /// cap on Σ exponents over even generators of nonzero degree
    pub truncation: usize,
}

/// A derivation given by its images on the generators, extended by
/// `D(xy) = D(x)y + (−1)^{|D||x|} x D(y)`.
#[derive(Clone, Debug)]
pub struct DerivationSpec {
    pub name: String,
    pub degree: i64,
    pub images: Vec<El>,
}

impl Algebra {
    pub fn new(gens: Vec<GenInfo>, truncation: usize) -> Self {
        Algebra { gens, truncation }
    }

    pub fn zero(&self) -> El {
        El {
            terms: BTreeMap::new(),
            truncated: false,
        }
    }

    pub fn scalar(&self, c: ExactScalar) -> El {
        let mut e = self.zero();
        if !c.is_zero() {
            e.terms.insert(vec![0; self.gens.len()], c);
        }
        e
    }

    pub fn one(&self) -> El {
        self.scalar(ExactScalar::from_int(1))
    }

    pub fn gen_el(&self, i: usize) -> El {
        assert!(i < self.gens.len());
        let mut m = vec![0u16; self.gens.len()];
        m[i] = 1;
        let mut e = self.zero();
        e.terms.insert(m, ExactScalar::from_int(1));
        e
    }

    fn add_term(&self, e: &mut El, m: Mono, c: ExactScalar) {
        if c.is_zero() {
            return;
        }
        match e.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, a: &El, b: &El) -> El {
        let mut out = a.clone();
        out.truncated |= b.truncated;
        for (m, c) in &b.terms {
            self.add_term(&mut out, m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self, a: &El) -> El {
        self.scale(a, &(-ExactScalar::from_int(1)))
    }

    pub fn sub(&self, a: &El, b: &El) -> El {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &El, c: &ExactScalar) -> El {
        let mut out = self.zero();
        out.truncated = a.truncated;
        for (m, k) in &a.terms {
            self.add_term(&mut out, m.clone(), k.clone() * c.clone());
        }
        out
    }

    fn even_weight(&self, m: &Mono) -> usize {
        m.iter()
            .zip(&self.gens)
            .filter(|(_, g)| !g.is_odd() && g.degree != 0)
            .map(|(e, _)| *e as usize)
            .sum()
    }

    /// Koszul sign of concatenating canonical monomials `m1 · m2`, or None
    /// if an odd generator repeats.
    fn merge(&self, m1: &Mono, m2: &Mono) -> Option<(Mono, i32)> {
        let mut inversions = 0usize;
        // odd generators of m1 with index > j, counted from the top down
        let mut odd_above = 0usize;
        let n = self.gens.len();
        let mut out = vec![0u16; n];
        // walk indices descending, tracking how many odd m1-factors sit above
        let mut sign_flips = 0usize;
        for j in (0..n).rev() {
            if self.gens[j].is_odd() {
                if m1[j] > 0 && m2[j] > 0 {
                    return None;
                }
                if m2[j] > 0 {
                    sign_flips += odd_above;
                }
                if m1[j] > 0 {
                    odd_above += 1;
                }
            }
            out[j] = m1[j] + m2[j];
        }
        inversions += sign_flips;
        Some((out, if inversions % 2 == 0 { 1 } else { -1 }))
    }

    pub fn mul(&self, a: &El, b: &El) -> El {
        let mut out = self.zero();
        out.truncated = a.truncated || b.truncated;
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                if let Some((m, s)) = self.merge(m1, m2) {
                    if self.even_weight(&m) > self.truncation {
                        out.truncated = true;
                        continue;
                    }
                    let c = c1.clone() * c2.clone();
                    self.add_term(&mut out, m, if s < 0 { -c } else { c });
                }
            }
        }
        out
    }

    pub fn mono_degree(&self, m: &Mono) -> i64 {
        m.iter()
            .zip(&self.gens)
            .map(|(e, g)| (*e as i64) * g.degree)
            .sum()
    }

    /// Degree if homogeneous (zero element reports Some(0)).
    pub fn degree_of(&self, e: &El) -> Option<i64> {
        let mut d: Option<i64> = None;
        for m in e.terms.keys() {
            let md = self.mono_degree(m);
            match d {
                None => d = Some(md),
                Some(x) if x == md => {}
                _ => return None,
            }
        }
        Some(d.unwrap_or(0))
    }

    /// Validate a derivation spec against this algebra.
    pub fn derivation(
        &self,
        name: &str,
        degree: i64,
        images: Vec<El>,
    ) -> Result<DerivationSpec, GcaError> {
        if images.len() != self.gens.len() {
            return Err(GcaError::BadImageCount(images.len(), self.gens.len()));
        }
        for (i, img) in images.iter().enumerate() {
            if img.is_zero() {
                continue;
            }
            let expect = self.gens[i].degree + degree;
            match self.degree_of(img) {
                Some(d) if d == expect => {}
                Some(d) => return Err(GcaError::BadImageDegree(i, d, expect)),
                None => return Err(GcaError::BadImageDegree(i, i64::MIN, expect)),
            }
        }
        Ok(DerivationSpec {
            name: name.to_string(),
            degree,
            images,
        })
    }

    pub fn zero_derivation(&self, name: &str, degree: i64) -> DerivationSpec {
        DerivationSpec {
            name: name.to_string(),
            degree,
            images: vec![self.zero(); self.gens.len()],
        }
    }

    /// Apply a derivation by graded Leibniz over each monomial.
    pub fn derive(&self, x: &El, d: &DerivationSpec) -> El {
        let d_odd = d.degree.rem_euclid(2) == 1;
        let mut out = self.zero();
        out.truncated = x.truncated;
        for (m, c) in &x.terms {
            let mut prefix_parity = false;
            for i in 0..self.gens.len() {
                let e = m[i];
                if e == 0 {
                    continue;
                }
                let img = &d.images[i];
                if !img.is_zero() {
                    // prefix · g_i^{e−1} · D(g_i) · suffix, times e
                    let mut pre = vec![0u16; self.gens.len()];
                    pre[..i].copy_from_slice(&m[..i]);
                    pre[i] = e - 1;
                    let mut suf = vec![0u16; self.gens.len()];
                    suf[(i + 1)..].copy_from_slice(&m[(i + 1)..]);
                    let mut pre_el = self.zero();
                    pre_el.terms.insert(pre, c.clone());
                    let mut suf_el = self.zero();
                    suf_el.terms.insert(suf, ExactScalar::from_int(1));
                    let mut term = self.mul(&self.mul(&pre_el, img), &suf_el);
                    term = self.scale(&term, &ExactScalar::from_int(e as i64));
                    if d_odd && prefix_parity {
                        term = self.neg(&term);
                    }
                    out = self.add(&out, &term);
                }
                if self.gens[i].is_odd() && e % 2 == 1 {
                    prefix_parity = !prefix_parity;
                }
            }
        }
        out
    }

    /// Graded commutator of two derivations, as a derivation.
    pub fn commutator(&self, d1: &DerivationSpec, d2: &DerivationSpec) -> DerivationSpec {
        let sign = (d1.degree.rem_euclid(2)) * (d2.degree.rem_euclid(2)) % 2 == 1;
        let images = (0..self.gens.len())
            .map(|i| {
                let a = self.derive(&self.derive(&self.gen_el(i), d2), d1);
                let b = self.derive(&self.derive(&self.gen_el(i), d1), d2);
                if sign {
                    self.add(&a, &b)
                } else {
                    self.sub(&a, &b)
                }
            })
            .collect();
        DerivationSpec {
            name: format!("[{},{}]", d1.name, d2.name),
            degree: d1.degree + d2.degree,
            images,
        }
    }

    /// `exp(D)` applied to an element, for an even derivation whose
    /// applications terminate (nilpotent on each element).
    pub fn apply_exp(&self, x: &El, d: &DerivationSpec) -> El {
        assert!(d.degree.rem_euclid(2) == 0 || d.images.iter().all(|i| i.is_zero()));
        let mut out = x.clone();
        let mut pow = x.clone();
        let mut fact = ExactScalar::from_int(1);
        for k in 1..=64 {
            pow = self.derive(&pow, d);
            if pow.is_zero() {
                return out;
            }
            fact *= ExactScalar::from_int(k);
            out = self.add(&out, &self.scale(&pow, &fact.inv()));
        }
        panic!("exp of non-nilpotent derivation");
    }

    /// Random homogeneous-free element for identity testing.
    pub fn random_el<R: Rng>(&self, rng: &mut R, terms: usize) -> El {
        let mut out = self.zero();
        for _ in 0..terms {
            let mut m = vec![0u16; self.gens.len()];
            for (i, g) in self.gens.iter().enumerate() {
                if g.is_odd() {
                    m[i] = rng.gen_range(0..=1);
                } else {
                    m[i] = rng.gen_range(0..=1);
                }
            }
            if self.even_weight(&m) > self.truncation {
                continue;
            }
            let c = ExactScalar::ratio(rng.gen_range(-7..=7), rng.gen_range(1..=7));
            self.add_term(&mut out, m, c);
        }
        out
    }

    pub fn display(&self, e: &El) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (m, c) in &e.terms {
            let mut s = format!("({})", c);
            for (i, g) in self.gens.iter().enumerate() {
                match m[i] {
                    0 => {}
                    1 => s.push_str(&format!("·{}", g.name)),
                    e => s.push_str(&format!("·{}^{}", g.name, e)),
                }
            }
            parts.push(s);
        }
        parts.join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn theta_phi() -> Algebra {
        Algebra::new(
            vec![
                GenInfo::new("t1", 1),
                GenInfo::new("t2", 1),
                GenInfo::new("p1", 2),
                GenInfo::new("p2", 2),
            ],
            4,
        )
    }

    #[test]
    fn graded_commutativity() {
        let a = theta_phi();
        let t1 = a.gen_el(0);
        let t2 = a.gen_el(1);
        let p1 = a.gen_el(2);
        assert_eq!(a.mul(&t1, &t2), a.neg(&a.mul(&t2, &t1)));
        assert!(a.mul(&t1, &t1).is_zero());
        assert_eq!(a.mul(&t1, &p1), a.mul(&p1, &t1));
        // associativity with signs on a random triple
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = a.random_el(&mut rng, 4);
        let y = a.random_el(&mut rng, 4);
        let z = a.random_el(&mut rng, 4);
        let lhs = a.mul(&a.mul(&x, &y), &z);
        let rhs = a.mul(&x, &a.mul(&y, &z));
        assert_eq!(lhs.terms, rhs.terms);
    }

    #[test]
    fn truncation_recorded() {
        let a = Algebra::new(vec![GenInfo::new("p", 2)], 2);
        let p = a.gen_el(0);
        let p2 = a.mul(&p, &p);
        assert!(!p2.truncated);
        let p3 = a.mul(&p2, &p);
        assert!(p3.truncated);
        assert!(p3.is_zero());
    }

    #[test]
    fn leibniz_rule() {
        // D with D(t1) = p1, D(t2) = p2, D(p) = 0: an odd degree-1 derivation
        let a = theta_phi();
        let d = a
            .derivation(
                "d",
                1,
                vec![a.gen_el(2), a.gen_el(3), a.zero(), a.zero()],
            )
            .unwrap();
        // D(t1 t2) = p1 t2 − t1 p2
        let t1t2 = a.mul(&a.gen_el(0), &a.gen_el(1));
        let expect = a.sub(
            &a.mul(&a.gen_el(2), &a.gen_el(1)),
            &a.mul(&a.gen_el(0), &a.gen_el(3)),
        );
        assert_eq!(a.derive(&t1t2, &d), expect);
        // D(1) = 0
        assert!(a.derive(&a.one(), &d).is_zero());
        // two-factor oracle on random elements
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let x = a.random_el(&mut rng, 3);
            let y = a.random_el(&mut rng, 3);
            // split x by parity to apply the sign per homogeneous part
            let mut even = a.zero();
            let mut odd = a.zero();
            for (m, c) in &x.terms {
                let par = a.mono_degree(m).rem_euclid(2);
                let mut t = a.zero();
                t.terms.insert(m.clone(), c.clone());
                if par == 0 {
                    even = a.add(&even, &t);
                } else {
                    odd = a.add(&odd, &t);
                }
            }
            let lhs = a.derive(&a.mul(&x, &y), &d);
            let rhs = a.add(
                &a.mul(&a.derive(&x, &d), &y),
                &a.sub(
                    &a.mul(&even, &a.derive(&y, &d)),
                    &a.mul(&odd, &a.derive(&y, &d)),
                ),
            );
            assert_eq!(lhs.terms, rhs.terms);
        }
    }

    #[test]
    fn image_degree_validation() {
        let a = theta_phi();
        let bad = a.derivation("bad", 1, vec![a.gen_el(0), a.zero(), a.zero(), a.zero()]);
        assert!(matches!(bad, Err(GcaError::BadImageDegree(0, 1, 2))));
    }
}
