//! Randomized exact identity testing.
//!
//! Identities between field expressions are checked by evaluating them
//! on pseudo-random configurations with Gaussian-rational Fourier
//! coefficients and Grassmann-valued odd fields. All arithmetic is
//! exact, so a pass is a proof that the identity holds on the sampled
//! configurations and a fail carries a replayable counterexample; for
//! polynomial identities of the low degrees appearing here the
//! detection probability over the sampled space is overwhelming.
//!
//! Odd fields receive ε-linear values `ε₁⊗f₁ + ε₂⊗f₂` with two
//! dedicated Grassmann generators per odd field, which captures every
//! product structure up to the quartic order appearing in the actions.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::field_calculus::{
    eval, CalcError, Conventions, Expr, Slot, TestConfig, TheoryDef, DIM,
};
use crate::scalar::ExactScalar;
use crate::torus::{FourierForm, G};

/// Default number of random configurations per identity.
pub const DEFAULT_TRIALS: usize = 20;
/// Default frequency cutoff.
pub const DEFAULT_CUTOFF: i32 = 2;
/// Default Grassmann budget (raised automatically when a theory has
/// many odd fields).
pub const DEFAULT_BUDGET: usize = 8;

fn rnd_rational(rng: &mut ChaCha8Rng) -> ExactScalar {
    ExactScalar::ratio(rng.gen_range(-7..=7), rng.gen_range(1..=7))
}

fn rnd_gauss(rng: &mut ChaCha8Rng) -> ExactScalar {
    rnd_rational(rng) + ExactScalar::i() * rnd_rational(rng)
}

fn rnd_freq(rng: &mut ChaCha8Rng, cutoff: i32) -> Vec<i32> {
    (0..DIM).map(|_| rng.gen_range(-cutoff..=cutoff)).collect()
}

fn masks_of_degree(deg: usize) -> Vec<u16> {
    (0u16..1 << DIM)
        .filter(|m| m.count_ones() as usize == deg)
        .collect()
}

/// Budget needed for the ε-linear odd sampling of a theory.
pub fn required_budget(t: &TheoryDef) -> usize {
    DEFAULT_BUDGET.max(2 * t.odd_fields().len())
}

/// Deterministic random configuration for a theory.
///
/// `real_ad`: sample adjoint-valued fields as real sections (conjugate
/// Fourier coefficients at opposite frequencies, fixed real-basis
/// matrix), which makes the invariant pairings Hermitian-compatible.
/// Spinor theories need this for the golden expansions; the purely
/// complex-bilinear identities of dw/kw do not.
pub fn random_config_mode(
    t: &TheoryDef,
    cutoff: i32,
    budget: usize,
    seed: u64,
    real_ad: bool,
) -> TestConfig {
    let budget = budget.max(2 * t.odd_fields().len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = BTreeMap::new();
    // Grassmann generator indices are 1-based
    let mut next_eps = 1usize;
    for sym in &t.fields {
        let odd = sym.ghost.rem_euclid(2) == 1;
        let eps: Vec<usize> = if odd {
            let e = vec![next_eps, next_eps + 1];
            next_eps += 2;
            e
        } else {
            vec![usize::MAX]
        };
        let mut form = match sym.slot {
            Slot::Ad => {
                let masks = masks_of_degree(sym.form);
                let mut f = FourierForm::zero(DIM, sym.form, t.lie.dim, t.lie.dim, budget);
                for &e in &eps {
                    for _ in 0..2 {
                        let k = rnd_freq(&mut rng, cutoff);
                        let m = masks[rng.gen_range(0..masks.len())];
                        let a = rng.gen_range(0..t.lie.rank());
                        let xi = t.lie.basis[a].to_gmat(budget);
                        let c = if real_ad {
                            rnd_gauss(&mut rng)
                        } else {
                            rnd_gauss(&mut rng)
                        };
                        let put = |f: &mut FourierForm, k: Vec<i32>, c: ExactScalar| {
                            let g = if e == usize::MAX {
                                G::scalar(budget, c)
                            } else {
                                G::monomial(budget, &[e], c)
                            };
                            f.add_term(k, m, xi.map(|x| x.try_mul(&g).expect("budget")));
                        };
                        if real_ad {
                            let nk: Vec<i32> = k.iter().map(|x| -x).collect();
                            put(&mut f, k, c.clone());
                            put(&mut f, nk, c.conj());
                        } else {
                            put(&mut f, k, c);
                        }
                    }
                }
                f
            }
            Slot::Spinor(plus) => {
                let module = t.module.as_ref().expect("spinor slot needs a module");
                let md = module.module_dim();
                let mut f = FourierForm::zero(DIM, 0, md, 1, budget);
                for &e in &eps {
                    for _ in 0..2 {
                        let k = rnd_freq(&mut rng, cutoff);
                        let mut col = crate::torus::GMat::zeros(md, 1, budget);
                        for i in 0..md {
                            let c = rnd_gauss(&mut rng);
                            let g = if e == usize::MAX {
                                G::scalar(budget, c)
                            } else {
                                G::monomial(budget, &[e], c)
                            };
                            col.set(i, 0, g);
                        }
                        f.add_term(k, 0, col);
                    }
                }
                module.project_chirality(&f, plus)
            }
        };
        if let Some(plus) = sym.sd {
            form = form.sd_project(plus).expect("sd slot is a 2-form");
        }
        values.insert(sym.name.clone(), form);
    }
    TestConfig { values, budget }
}

/// [`random_config_mode`] with the reality mode a theory's suites need
/// by default: real adjoint sections whenever a spinor module is
/// present.
pub fn random_config(t: &TheoryDef, cutoff: i32, budget: usize, seed: u64) -> TestConfig {
    random_config_mode(t, cutoff, budget, seed, t.module.is_some())
}

/// Outcome of one identity check.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub status: String,
    pub trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

/// A named identity: an expression that must evaluate to exactly zero.
#[derive(Clone, Debug)]
pub struct Identity {
    pub name: String,
    pub expr: Expr,
}

impl Identity {
    pub fn new(name: impl Into<String>, expr: Expr) -> Self {
        Identity {
            name: name.into(),
            expr,
        }
    }
}

/// Suite description: a theory, a list of identities, and sampling
/// parameters. Identical specs produce identical reports.
#[derive(Clone, Debug)]
pub struct SuiteSpec {
    pub suite: String,
    pub theory: TheoryDef,
    pub identities: Vec<Identity>,
    pub trials: usize,
    pub cutoff: i32,
    pub budget: usize,
    pub seed: u64,
    pub conventions: Conventions,
    pub real_ad: bool,
}

impl SuiteSpec {
    pub fn new(suite: impl Into<String>, theory: TheoryDef, identities: Vec<Identity>) -> Self {
        let budget = required_budget(&theory);
        let real_ad = theory.module.is_some();
        SuiteSpec {
            suite: suite.into(),
            theory,
            identities,
            trials: DEFAULT_TRIALS,
            cutoff: DEFAULT_CUTOFF,
            budget,
            seed: 0xC0F7,
            conventions: Conventions::default(),
            real_ad,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_conventions(mut self, conv: Conventions) -> Self {
        self.conventions = conv;
        self
    }

    /// Override the reality mode chosen by [`SuiteSpec::new`]. Identities
    /// that involve complex conjugation (the Kapustin–Witten
    /// complexification) are only meaningful over real sections.
    pub fn with_real_ad(mut self, real_ad: bool) -> Self {
        self.real_ad = real_ad;
        self
    }
}

/// Suite report, serializable to the documented JSON schema.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub theory: String,
    pub identities: Vec<IdentityReport>,
    pub seed: u64,
    pub conventions: String,
    pub duration_ms: u128,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.identities.iter().all(|i| i.passed())
    }
}

fn config_digest(cfg: &TestConfig) -> String {
    let mut n_terms = 0usize;
    for v in cfg.values.values() {
        n_terms += v.terms().count();
    }
    format!("fields={} terms={}", cfg.values.len(), n_terms)
}

/// Evaluate one identity on `trials` independent configurations; pass
/// iff every evaluation is exactly zero. On failure, a smaller
/// counterexample is attempted with cutoff 0 and a minimal budget.
pub fn check_zero(
    t: &TheoryDef,
    conv: &Conventions,
    ident: &Identity,
    trials: usize,
    cutoff: i32,
    budget: usize,
    seed: u64,
    real_ad: bool,
) -> Result<IdentityReport, CalcError> {
    for i in 0..trials {
        let trial_seed = seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(i as u64);
        let cfg = random_config_mode(t, cutoff, budget, trial_seed, real_ad);
        let v = eval(t, conv, &cfg, &ident.expr)?;
        if !v.is_zero() {
            // best-effort minimization: constants only, minimal budget
            let mut counter = format!("seed={} {}", trial_seed, config_digest(&cfg));
            for j in 0..8u64 {
                let small = random_config_mode(t, 0, 2, trial_seed.wrapping_add(j), real_ad);
                if let Ok(sv) = eval(t, conv, &small, &ident.expr) {
                    if !sv.is_zero() {
                        counter = format!(
                            "seed={} cutoff=0 {}",
                            trial_seed.wrapping_add(j),
                            config_digest(&small)
                        );
                        break;
                    }
                }
            }
            return Ok(IdentityReport {
                name: ident.name.clone(),
                status: "fail".to_string(),
                trials: i + 1,
                counterexample: Some(counter),
            });
        }
    }
    Ok(IdentityReport {
        name: ident.name.clone(),
        status: "pass".to_string(),
        trials,
        counterexample: None,
    })
}

/// Run a suite and aggregate a deterministic report.
pub fn run_suite(spec: &SuiteSpec) -> Result<Report, CalcError> {
    let start = Instant::now();
    let mut identities = Vec::new();
    for ident in &spec.identities {
        identities.push(check_zero(
            &spec.theory,
            &spec.conventions,
            ident,
            spec.trials,
            spec.cutoff,
            spec.budget,
            spec.seed,
            spec.real_ad,
        )?);
    }
    Ok(Report {
        suite: spec.suite.clone(),
        theory: spec.theory.name.clone(),
        identities,
        seed: spec.seed,
        conventions: spec.conventions.describe(),
        duration_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_calculus::{apply_derivation, fld, sub2};

    fn q2_identities(t: &TheoryDef) -> Vec<Identity> {
        let q = t.q_derivation();
        t.fields
            .iter()
            .map(|f| {
                let (qx, _, _) = apply_derivation(t, &q, &fld(&f.name)).unwrap();
                let (qqx, _, _) = apply_derivation(t, &q, &qx).unwrap();
                Identity::new(format!("Q^2 {}", f.name), qqx)
            })
            .collect()
    }

    #[test]
    fn determinism() {
        let t = TheoryDef::builtin("dw").unwrap();
        let a = random_config(&t, 2, 8, 7);
        let b = random_config(&t, 2, 8, 7);
        for (k, v) in &a.values {
            assert_eq!(v, &b.values[k]);
        }
    }

    #[test]
    fn parity_and_slots() {
        for name in ["dw", "sw_u1", "kw", "gsw_so3"] {
            let t = TheoryDef::builtin(name).unwrap();
            let cfg = random_config(&t, 1, 8, 3);
            for sym in &t.fields {
                let v = &cfg.values[&sym.name];
                assert_eq!(v.degree, sym.form, "{name}/{}", sym.name);
                if !v.is_zero() {
                    assert_eq!(
                        v.ghost_parity().unwrap(),
                        (sym.ghost.rem_euclid(2)) as usize,
                        "{name}/{}",
                        sym.name
                    );
                }
                if let Some(plus) = sym.sd {
                    assert_eq!(v, &v.sd_project(plus).unwrap(), "{name}/{}", sym.name);
                }
            }
        }
    }

    #[test]
    fn dw_nilpotency() {
        let t = TheoryDef::builtin("dw").unwrap();
        let spec = SuiteSpec::new("nilpotency", t.clone(), q2_identities(&t)).with_trials(4);
        let report = run_suite(&spec).unwrap();
        for i in &report.identities {
            assert!(i.passed(), "{} failed: {:?}", i.name, i.counterexample);
        }
    }

    #[test]
    fn kw_nilpotency() {
        let t = TheoryDef::builtin("kw").unwrap();
        let spec = SuiteSpec::new("nilpotency", t.clone(), q2_identities(&t)).with_trials(3);
        let report = run_suite(&spec).unwrap();
        for i in &report.identities {
            assert!(i.passed(), "{} failed: {:?}", i.name, i.counterexample);
        }
    }

    #[test]
    fn sw_nilpotency() {
        let t = TheoryDef::builtin("sw_u1").unwrap();
        let spec = SuiteSpec::new("nilpotency", t.clone(), q2_identities(&t)).with_trials(3);
        let report = run_suite(&spec).unwrap();
        for i in &report.identities {
            assert!(i.passed(), "{} failed: {:?}", i.name, i.counterexample);
        }
    }

    #[test]
    fn sanity_nonzero_fails() {
        let t = TheoryDef::builtin("dw").unwrap();
        let ident = Identity::new("phi != 0", fld("phi"));
        let r = check_zero(&t, &Conventions::default(), &ident, 3, 2, 8, 1, false).unwrap();
        assert_eq!(r.status, "fail");
        assert!(r.counterexample.is_some());
        let ok = Identity::new("phi - phi", sub2(fld("phi"), fld("phi")));
        let r = check_zero(&t, &Conventions::default(), &ok, 3, 2, 8, 1, false).unwrap();
        assert!(r.passed());
    }
}
