//! Action functionals, golden expansions, and the named verification
//! suites.
//!
//! Every suite is a list of named expressions that must evaluate to
//! exactly zero on random configurations; see [`crate::verifier`] for
//! the harness. Golden expansions are hand-transcribed display formulas
//! and are compared against the machine-expanded actions as numbers in
//! the Grassmann algebra.

use std::collections::BTreeMap;

use crate::field_calculus::{
    act, addv, apply_derivation, br, cov_cod, cov_cod_conn, cov_d, cov_d_conn, curv, curv_conn,
    dirac_op, ext_d, fld, half, integrate, mu, mu_bil, neg, pair, scale, sd, star, sub2,
    substitute, trace_pair, CalcError, Conventions, Expr, PairKind, TheoryDef,
};
use crate::scalar::ExactScalar;
use crate::verifier::Identity;

fn lie_pair(a: Expr, b: Expr) -> Expr {
    pair(PairKind::Lie, a, b)
}

fn sp_pair(a: Expr, b: Expr) -> Expr {
    pair(PairKind::Spinor, a, b)
}

fn conj(e: Expr) -> Expr {
    Expr::Conj(Box::new(e))
}

fn im_part(e: Expr) -> Expr {
    Expr::ImagPart(Box::new(e))
}

fn re_part(e: Expr) -> Expr {
    Expr::RealPart(Box::new(e))
}

/// Whether a field occurs as a leaf.
pub fn contains_field(e: &Expr, name: &str) -> bool {
    match e {
        Expr::Field(n) => n == name,
        Expr::Zero(_, _) => false,
        Expr::Add(v) => v.iter().any(|x| contains_field(x, name)),
        Expr::Scale(_, x)
        | Expr::Mu(x)
        | Expr::Dirac(x)
        | Expr::ExtDer(x)
        | Expr::SelfDual(_, x)
        | Expr::Star(x)
        | Expr::Conj(x)
        | Expr::RealPart(x)
        | Expr::ImagPart(x)
        | Expr::Iota(_, x)
        | Expr::DxWedge(_, x)
        | Expr::GammaWedge(x)
        | Expr::Integrate(x) => contains_field(x, name),
        Expr::Wedge(a, b)
        | Expr::Bracket(a, b)
        | Expr::Pair(_, a, b)
        | Expr::TracePair(a, b)
        | Expr::MuBilinear(a, b)
        | Expr::Act(a, b)
        | Expr::ContractBracket(a, b)
        | Expr::CodiffBracket(a, b)
        | Expr::MuGammaWedge(a, b)
        | Expr::ChiGammaWedge(a, b) => contains_field(a, name) || contains_field(b, name),
        Expr::CovDer(c, x) | Expr::CovCoDer(c, x) => {
            c.as_deref().map_or(name == "A", |cc| contains_field(cc, name))
                || contains_field(x, name)
        }
        Expr::Curv(c) => c.as_deref().map_or(name == "A", |cc| contains_field(cc, name)),
    }
}

// -- gauge fermions and actions ----------------------------------------------

/// The minimal gauge fermion ⟨χ, b⟩ (summed over the antighost pairs of
/// the theory).
pub fn gauge_fermion_min(t: &TheoryDef) -> Expr {
    match t.name.as_str() {
        "dw" => lie_pair(fld("chi"), fld("b")),
        "sw_u1" | "gsw_so3" => addv(vec![
            lie_pair(fld("chi"), fld("b")),
            sp_pair(fld("xi"), fld("h")),
        ]),
        "kw" | "kw_family" => addv(vec![
            lie_pair(fld("chi"), fld("b")),
            lie_pair(fld("chi_t"), fld("b_t")),
            lie_pair(fld("eta_t"), fld("w")),
        ]),
        _ => lie_pair(fld("chi"), fld("b")),
    }
}

/// The standard gauge fermion ⟨χ,b⟩ + ⟨Ψ,λΦ⟩ + s⟨η,[φ,λ]⟩.
pub fn gauge_fermion_standard(t: &TheoryDef, s: ExactScalar) -> Expr {
    let mut terms = vec![gauge_fermion_min(t)];
    terms.push(lie_pair(fld("psi"), cov_d(fld("lambda"))));
    match t.name.as_str() {
        "sw_u1" | "gsw_so3" => {
            terms.push(neg(sp_pair(fld("upsilon"), act(fld("lambda"), fld("sigma")))));
        }
        "kw" | "kw_family" => {
            terms.push(neg(lie_pair(fld("psi_t"), br(fld("lambda"), fld("sigma")))));
        }
        _ => {}
    }
    terms.push(scale(s, lie_pair(fld("eta"), br(fld("phi"), fld("lambda")))));
    addv(terms)
}

/// S̃_min = Q ∫ ⟨χ,b⟩ vol, fully expanded.
pub fn action_min(t: &TheoryDef) -> Result<Expr, CalcError> {
    let q = t.q_derivation();
    let (e, _, _) = apply_derivation(t, &q, &integrate(gauge_fermion_min(t)))?;
    Ok(e)
}

/// S̃ = Q ∫ (⟨χ,b⟩ + ⟨Ψ,λΦ⟩ + s⟨η,[φ,λ]⟩) vol, fully expanded.
pub fn action_standard(t: &TheoryDef, s: ExactScalar) -> Result<Expr, CalcError> {
    let q = t.q_derivation();
    let (e, _, _) = apply_derivation(t, &q, &integrate(gauge_fermion_standard(t, s)))?;
    Ok(e)
}

/// Hand-transcribed display of S̃_min.
pub fn golden_min(t: &TheoryDef) -> Expr {
    let chi_sector = |curv_term: Expr, lin: Expr| {
        vec![
            lie_pair(fld("b"), fld("b")),
            lie_pair(curv_term, fld("b")),
            lie_pair(fld("chi"), lin),
            neg(lie_pair(fld("chi"), br(fld("phi"), fld("chi")))),
        ]
    };
    let terms = match t.name.as_str() {
        "dw" => chi_sector(sd(true, curv()), sd(true, cov_d(fld("psi")))),
        "sw_u1" | "gsw_so3" => {
            let mut v = chi_sector(
                addv(vec![sd(true, curv()), neg(half(mu(fld("sigma"))))]),
                addv(vec![
                    sd(true, cov_d(fld("psi"))),
                    neg(mu_bil(fld("sigma"), fld("upsilon"))),
                ]),
            );
            v.extend(vec![
                sp_pair(fld("h"), fld("h")),
                sp_pair(dirac_op(fld("sigma")), fld("h")),
                sp_pair(
                    fld("xi"),
                    addv(vec![
                        dirac_op(fld("upsilon")),
                        act(fld("psi"), fld("sigma")),
                    ]),
                ),
                neg(sp_pair(fld("xi"), act(fld("phi"), fld("xi")))),
            ]);
            v
        }
        "kw" => {
            let x = addv(vec![curv(), neg(half(br(fld("sigma"), fld("sigma"))))]);
            let mut v = chi_sector(
                sd(true, x),
                addv(vec![
                    sd(true, cov_d(fld("psi"))),
                    neg(sd(true, br(fld("sigma"), fld("psi_t")))),
                ]),
            );
            v.extend(vec![
                lie_pair(fld("b_t"), fld("b_t")),
                lie_pair(sd(false, cov_d(fld("sigma"))), fld("b_t")),
                lie_pair(
                    fld("chi_t"),
                    addv(vec![
                        sd(false, cov_d(fld("psi_t"))),
                        sd(false, br(fld("psi"), fld("sigma"))),
                    ]),
                ),
                neg(lie_pair(fld("chi_t"), br(fld("phi"), fld("chi_t")))),
                lie_pair(fld("w"), fld("w")),
                lie_pair(cov_cod(fld("sigma")), fld("w")),
                lie_pair(
                    fld("eta_t"),
                    addv(vec![
                        cov_cod(fld("psi_t")),
                        neg(Expr::ContractBracket(
                            Box::new(fld("psi")),
                            Box::new(fld("sigma")),
                        )),
                    ]),
                ),
                neg(lie_pair(fld("eta_t"), br(fld("phi"), fld("eta_t")))),
            ]);
            v
        }
        _ => unreachable!("builtin theories only"),
    };
    integrate(addv(terms))
}

/// Hand-transcribed display of S̃ at s = 1.
pub fn golden_standard(t: &TheoryDef) -> Expr {
    // common gauge-multiplet terms of the standard extension
    let mut even = vec![
        lie_pair(fld("b"), fld("b")),
        neg(lie_pair(cov_d(fld("phi")), cov_d(fld("lambda")))),
        lie_pair(br(fld("phi"), fld("lambda")), br(fld("phi"), fld("lambda"))),
    ];
    let mut odd = vec![
        lie_pair(fld("chi"), sd(true, cov_d(fld("psi")))),
        neg(lie_pair(fld("chi"), br(fld("phi"), fld("chi")))),
        lie_pair(fld("psi"), br(fld("lambda"), fld("psi"))),
        neg(lie_pair(fld("psi"), cov_d(fld("eta")))),
        neg(lie_pair(fld("eta"), br(fld("phi"), fld("eta")))),
    ];
    match t.name.as_str() {
        "dw" => {
            even.push(lie_pair(sd(true, curv()), fld("b")));
        }
        "sw_u1" | "gsw_so3" => {
            even.extend(vec![
                lie_pair(
                    addv(vec![sd(true, curv()), neg(half(mu(fld("sigma"))))]),
                    fld("b"),
                ),
                sp_pair(fld("h"), fld("h")),
                sp_pair(dirac_op(fld("sigma")), fld("h")),
                neg(sp_pair(
                    act(fld("phi"), fld("sigma")),
                    act(fld("lambda"), fld("sigma")),
                )),
            ]);
            odd.extend(vec![
                sp_pair(fld("xi"), dirac_op(fld("upsilon"))),
                sp_pair(fld("upsilon"), act(fld("eta"), fld("sigma"))),
                neg(lie_pair(fld("chi"), mu_bil(fld("sigma"), fld("upsilon")))),
                sp_pair(fld("xi"), act(fld("psi"), fld("sigma"))),
                neg(sp_pair(fld("xi"), act(fld("phi"), fld("xi")))),
                sp_pair(fld("upsilon"), act(fld("lambda"), fld("upsilon"))),
            ]);
        }
        "kw" => {
            even.extend(vec![
                lie_pair(
                    sd(true, addv(vec![curv(), neg(half(br(fld("sigma"), fld("sigma"))))])),
                    fld("b"),
                ),
                lie_pair(fld("b_t"), fld("b_t")),
                lie_pair(sd(false, cov_d(fld("sigma"))), fld("b_t")),
                lie_pair(fld("w"), fld("w")),
                lie_pair(cov_cod(fld("sigma")), fld("w")),
                neg(lie_pair(
                    br(fld("phi"), fld("sigma")),
                    br(fld("lambda"), fld("sigma")),
                )),
            ]);
            odd.extend(vec![
                lie_pair(fld("chi_t"), sd(false, cov_d(fld("psi_t")))),
                neg(lie_pair(fld("psi_t"), cov_d(fld("eta_t")))),
                neg(lie_pair(fld("chi"), sd(true, br(fld("sigma"), fld("psi_t"))))),
                lie_pair(fld("chi_t"), sd(false, br(fld("sigma"), fld("psi")))),
                lie_pair(fld("psi"), br(fld("sigma"), fld("eta_t"))),
                neg(lie_pair(fld("psi_t"), br(fld("sigma"), fld("eta")))),
                neg(lie_pair(fld("chi_t"), br(fld("phi"), fld("chi_t")))),
                neg(lie_pair(fld("eta_t"), br(fld("phi"), fld("eta_t")))),
                lie_pair(fld("psi_t"), br(fld("lambda"), fld("psi_t"))),
            ]);
        }
        _ => unreachable!("builtin theories only"),
    }
    even.extend(odd);
    integrate(addv(even))
}

/// Substitution that zeroes the auxiliary (b-type) and all ghost-odd
/// fields.
pub fn zero_odd_and_aux(t: &TheoryDef) -> BTreeMap<String, Expr> {
    let mut map = BTreeMap::new();
    for f in &t.fields {
        let aux = matches!(f.name.as_str(), "b" | "h" | "b_t" | "w");
        if aux || f.ghost.rem_euclid(2) == 1 {
            map.insert(
                f.name.clone(),
                scale(ExactScalar::from_int(0), fld(&f.name)),
            );
        }
    }
    map
}

/// The action suite: golden comparisons, the first-order completion of
/// the square, vanishing on purely even ℱ-critical data, and the
/// invariance facts behind the ghost-independence of the gauge fermion.
pub fn action_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let s_min = action_min(t)?;
    let s_std = action_standard(t, ExactScalar::from_int(1))?;
    let mut ids = vec![
        Identity::new("S_min = golden display", sub2(s_min.clone(), golden_min(t))),
        Identity::new(
            "S_standard(s=1) = golden display",
            sub2(s_std.clone(), golden_standard(t)),
        ),
        Identity::new(
            "S_min vanishes at b = odd = 0",
            substitute(&s_min, &zero_odd_and_aux(t)),
        ),
    ];
    // first-order formulation: |b|² + ⟨ℱ,b⟩ = |b + ℱ/2|² − ¼|ℱ|²
    let fcal = match t.name.as_str() {
        "sw_u1" | "gsw_so3" => addv(vec![sd(true, curv()), neg(half(mu(fld("sigma"))))]),
        "kw" => sd(true, addv(vec![curv(), neg(half(br(fld("sigma"), fld("sigma"))))])),
        _ => sd(true, curv()),
    };
    let shifted = addv(vec![fld("b"), half(fcal.clone())]);
    ids.push(Identity::new(
        "first-order square completion",
        integrate(addv(vec![
            lie_pair(fld("b"), fld("b")),
            lie_pair(fcal.clone(), fld("b")),
            neg(lie_pair(shifted.clone(), shifted)),
            scale(ExactScalar::ratio(1, 4), lie_pair(fcal.clone(), fcal)),
        ])),
    ));
    // pointwise ad-invariance of the pairings (λ is an even 0-form)
    ids.push(Identity::new(
        "ad-invariance of the Lie pairing",
        addv(vec![
            lie_pair(br(fld("lambda"), fld("chi")), fld("b")),
            lie_pair(fld("chi"), br(fld("lambda"), fld("b"))),
        ]),
    ));
    if t.module.is_some() {
        ids.push(Identity::new(
            "invariance of the spinor pairing",
            addv(vec![
                sp_pair(act(fld("lambda"), fld("xi")), fld("h")),
                sp_pair(fld("xi"), act(fld("lambda"), fld("h"))),
            ]),
        ));
    }
    Ok(ids)
}

/// Structural facts about the gauge fermions (no evaluation needed).
pub fn fermion_structure_ok(t: &TheoryDef) -> bool {
    let s1 = ExactScalar::from_int(1);
    !contains_field(&gauge_fermion_min(t), "theta")
        && !contains_field(&gauge_fermion_standard(t, s1), "theta")
}

// -- vector supersymmetry ----------------------------------------------------

/// Identities [Q,K]X = dX for every field with a K rule, the Cartan
/// relations {Q,K_μ}X = L_μX for every field and every μ, and the K_μ
/// invariance of the minimal action up to the explicit Q-exact term:
/// K_μ S_min + Q K_μ Θ_min = 0. (Strict K_μ-invariance of the action
/// fails for anticommuting fields: the boundary term K_μ Θ_min is a
/// fermion bilinear like ∫⟨∂_μχ, χ⟩ whose Fourier modes at ±k add
/// instead of cancelling, so it is nonzero — but it is Q-exact, and
/// the relation above follows exactly from the per-field Cartan
/// relations.) Fields without wedged K rules (η, λ) are skipped in the
/// first family and reported.
pub struct VectorSusySuite {
    pub identities: Vec<Identity>,
    pub skipped: Vec<String>,
}

pub fn vector_susy_suite(t: &TheoryDef) -> Result<VectorSusySuite, CalcError> {
    let q = t.q_derivation();
    let mut identities = Vec::new();
    let mut skipped = Vec::new();
    for f in &t.fields {
        if !t.k_rules.contains_key(&f.name) {
            skipped.push(f.name.clone());
            continue;
        }
        let x = fld(&f.name);
        let kx = t.apply_k(&x)?;
        let (qkx, _, _) = apply_derivation(t, &q, &kx)?;
        let (qx, _, _) = apply_derivation(t, &q, &x)?;
        let kqx = t.apply_k(&qx)?;
        identities.push(Identity::new(
            format!("[Q,K] {} = d {}", f.name, f.name),
            addv(vec![qkx, kqx, neg(ext_d(x))]),
        ));
    }
    let s_min = action_min(t)?;
    let fermion = integrate(gauge_fermion_min(t));
    for mu_idx in 1..=4usize {
        let kmu = t.k_mu_derivation(mu_idx)?;
        for f in &t.fields {
            let x = fld(&f.name);
            let (kx, _, _) = apply_derivation(t, &kmu, &x)?;
            let (qkx, _, _) = apply_derivation(t, &q, &kx)?;
            let (qx, _, _) = apply_derivation(t, &q, &x)?;
            let (kqx, _, _) = apply_derivation(t, &kmu, &qx)?;
            // L_μ = ι_μ d on 0-forms (and spinors), ι_μ d + d ι_μ else
            let mut lie = vec![Expr::Iota(mu_idx, Box::new(ext_d(x.clone())))];
            if f.form > 0 {
                lie.push(ext_d(Expr::Iota(mu_idx, Box::new(x))));
            }
            identities.push(Identity::new(
                format!("{{Q,K_{}}} {} = L_{} {}", mu_idx, f.name, mu_idx, f.name),
                addv(vec![qkx, kqx, neg(addv(lie))]),
            ));
        }
        let (ks, _, _) = apply_derivation(t, &kmu, &s_min)?;
        let (kf, _, _) = apply_derivation(t, &kmu, &fermion)?;
        let (qkf, _, _) = apply_derivation(t, &q, &kf)?;
        identities.push(Identity::new(
            format!("K_{} S_min + Q K_{} Theta_min = 0", mu_idx, mu_idx),
            addv(vec![ks, qkf]),
        ));
    }
    Ok(VectorSusySuite {
        identities,
        skipped,
    })
}

// -- descent observables, θ_K, and the holomorphic identity ------------------

/// Bidegree-(4−p, p) components of Tr(𝔽(φ)²) for 𝔽 = φ − ψ + F_A.
pub fn descent_components() -> Vec<Expr> {
    // In the twisted concrete convention the curvature component of the
    // total curvature 𝔽 enters with a minus sign: with 𝔽 = φ − ψ − F_A
    // every step reads Q O⁽ᵖ⁾ = d O⁽ᵖ⁻¹⁾ with a uniform sign, which is
    // the component form of (d − Q)-closedness of Tr 𝔽².
    let comps = [fld("phi"), neg(fld("psi")), neg(curv())];
    let degs = [0usize, 1, 2];
    (0..=4)
        .map(|p| {
            let mut terms = Vec::new();
            for (i, ci) in comps.iter().enumerate() {
                for (j, cj) in comps.iter().enumerate() {
                    if degs[i] + degs[j] == p {
                        terms.push(trace_pair(ci.clone(), cj.clone()));
                    }
                }
            }
            addv(terms)
        })
        .collect()
}

/// Q O⁽⁰⁾ = 0 and Q O⁽ᵖ⁾ = d O⁽ᵖ⁻¹⁾ for p = 1..4.
pub fn descent_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let q = t.q_derivation();
    let comps = descent_components();
    let mut ids = Vec::new();
    let (q0, _, _) = apply_derivation(t, &q, &comps[0])?;
    ids.push(Identity::new("Q O^(0) = 0", q0));
    for p in 1..=4usize {
        let (qp, _, _) = apply_derivation(t, &q, &comps[p])?;
        ids.push(Identity::new(
            format!("Q O^({}) = d O^({})", p, p - 1),
            sub2(qp, ext_d(comps[p - 1].clone())),
        ));
    }
    // Total closedness of Tr 𝔽² under d − Q: the per-degree steps above
    // are its components, and combined with Stokes on the torus they make
    // the integrated top observable Q-closed.
    let (q4, _, _) = apply_derivation(t, &q, &comps[4])?;
    ids.push(Identity::new(
        "total closedness: Q ∫ O^(4) = 0",
        integrate(q4),
    ));
    Ok(ids)
}

/// n-fold application of the full vector supersymmetry K.
pub fn k_power(t: &TheoryDef, e: &Expr, n: usize) -> Result<Expr, CalcError> {
    let mut out = e.clone();
    for _ in 0..n {
        out = t.apply_k(&out)?;
    }
    Ok(out)
}

/// The closed-form components of θ_K = exp(K)θ = θ + A + χ and
/// φ_K = exp(K)φ = φ − ψ + (b − (F_A)₋) + d_Aχ + ½[χ,χ], as identities
/// Kⁿθ/n! = component, plus the termination Kⁿ = 0 beyond.
pub fn theta_k_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let fact = |n: i64| ExactScalar::ratio(1, (1..=n.max(1)).product::<i64>());
    let theta_comps = [fld("theta"), fld("A"), fld("chi")];
    let phi_comps = [
        fld("phi"),
        neg(fld("psi")),
        sub2(fld("b"), sd(false, curv())),
        cov_d(fld("chi")),
        half(br(fld("chi"), fld("chi"))),
    ];
    let mut ids = Vec::new();
    for (n, c) in theta_comps.iter().enumerate() {
        ids.push(Identity::new(
            format!("K^{} theta / {}! component", n, n),
            sub2(scale(fact(n as i64), k_power(t, &fld("theta"), n)?), c.clone()),
        ));
    }
    ids.push(Identity::new(
        "K^3 theta = 0",
        k_power(t, &fld("theta"), 3)?,
    ));
    for (n, c) in phi_comps.iter().enumerate() {
        ids.push(Identity::new(
            format!("K^{} phi / {}! component", n, n),
            sub2(scale(fact(n as i64), k_power(t, &fld("phi"), n)?), c.clone()),
        ));
    }
    ids.push(Identity::new("K^5 phi = 0", k_power(t, &fld("phi"), 5)?));
    Ok(ids)
}

/// ∫ Tr(φ_K²)^top transcribed from the closed form of φ_K: half the sum
/// of the degree-4 pairings of its components (contains the −ψ∧d_Aχ
/// term).
pub fn phi_k_squared_top() -> Expr {
    let comps = [
        fld("phi"),
        neg(fld("psi")),
        sub2(fld("b"), sd(false, curv())),
        cov_d(fld("chi")),
        half(br(fld("chi"), fld("chi"))),
    ];
    let degs = [0usize, 1, 2, 3, 4];
    let mut terms = Vec::new();
    for (i, ci) in comps.iter().enumerate() {
        for (j, cj) in comps.iter().enumerate() {
            if degs[i] + degs[j] == 4 {
                terms.push(trace_pair(ci.clone(), cj.clone()));
            }
        }
    }
    integrate(half(addv(terms)))
}

/// The auxiliary-field identities around Tr(φ_K²):
/// S̃_min − ∫Tr(φ_K²)^top = ∫(½|F₋|² + ½|b|² + ⟨b,F₊⟩)vol, and with
/// b := −(F_A)₊ the difference is the topological density
/// −½∫⟨F∧F⟩ = ½∫Tr(F_A∧F_A).
pub fn hol_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let s_min = action_min(t)?;
    let top = phi_k_squared_top();
    let diff = sub2(s_min, top);
    let fminus = sd(false, curv());
    let fplus = sd(true, curv());
    let rhs = integrate(addv(vec![
        half(lie_pair(fminus.clone(), fminus)),
        half(lie_pair(fld("b"), fld("b"))),
        lie_pair(fld("b"), fplus.clone()),
    ]));
    let mut ids = vec![Identity::new(
        "S_min - Tr(phi_K^2) = auxiliary square",
        sub2(diff.clone(), rhs),
    )];
    let mut subst = BTreeMap::new();
    subst.insert("b".to_string(), neg(fplus));
    let at_crit = substitute(&diff, &subst);
    ids.push(Identity::new(
        "b = -(F)_+ leaves the instanton density",
        addv(vec![at_crit, half(integrate(trace_pair(curv(), curv())))]),
    ));
    Ok(ids)
}

// -- BRST comparison ---------------------------------------------------------

/// Q_BRST: the supersymmetry with the auxiliary/superpartner shifts
/// removed, acting on the fields of the gauge fermion sector. The sign
/// of the gauge action is the one under which S_BRST = ∫|ℱ|² vol.
pub fn brst_derivation(t: &TheoryDef) -> crate::field_calculus::Derivation {
    let mut rules = BTreeMap::new();
    rules.insert("theta".to_string(), neg(half(br(fld("theta"), fld("theta")))));
    rules.insert("A".to_string(), cov_d(fld("theta")));
    match t.name.as_str() {
        "sw_u1" | "gsw_so3" => {
            rules.insert(
                "chi".to_string(),
                addv(vec![
                    sd(true, curv()),
                    neg(half(mu(fld("sigma")))),
                    neg(br(fld("theta"), fld("chi"))),
                ]),
            );
            rules.insert(
                "sigma".to_string(),
                neg(act(fld("theta"), fld("sigma"))),
            );
            rules.insert(
                "xi".to_string(),
                addv(vec![
                    dirac_op(fld("sigma")),
                    neg(act(fld("theta"), fld("xi"))),
                ]),
            );
        }
        _ => {
            rules.insert(
                "chi".to_string(),
                addv(vec![sd(true, curv()), neg(br(fld("theta"), fld("chi")))]),
            );
        }
    }
    crate::field_calculus::Derivation {
        name: "Q_BRST".to_string(),
        ghost_shift: 1,
        form_shift: 0,
        rules,
    }
}

/// The BRST suite: Q_BRST² = 0 on its fields, S_BRST = ∫|ℱ|²vol = S,
/// and χ-independence of S_BRST.
pub fn brst_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let qb = brst_derivation(t);
    let mut ids = Vec::new();
    for name in qb.rules.keys() {
        let (qx, _, _) = apply_derivation(t, &qb, &fld(name))?;
        let (qqx, _, _) = apply_derivation(t, &qb, &qx)?;
        ids.push(Identity::new(format!("Q_BRST^2 {}", name), qqx));
    }
    let (fermion, s_square) = match t.name.as_str() {
        "sw_u1" | "gsw_so3" => {
            let fcal = addv(vec![sd(true, curv()), neg(half(mu(fld("sigma"))))]);
            (
                addv(vec![
                    lie_pair(fld("chi"), fcal.clone()),
                    sp_pair(fld("xi"), dirac_op(fld("sigma"))),
                ]),
                addv(vec![
                    lie_pair(fcal.clone(), fcal),
                    sp_pair(dirac_op(fld("sigma")), dirac_op(fld("sigma"))),
                ]),
            )
        }
        _ => {
            let fcal = sd(true, curv());
            (
                lie_pair(fld("chi"), fcal.clone()),
                lie_pair(fcal.clone(), fcal),
            )
        }
    };
    let (s_brst, _, _) = apply_derivation(t, &qb, &integrate(fermion))?;
    ids.push(Identity::new(
        "S_BRST = |F(Phi)|^2",
        sub2(s_brst.clone(), integrate(s_square)),
    ));
    let mut chi_zero = BTreeMap::new();
    chi_zero.insert(
        "chi".to_string(),
        scale(ExactScalar::from_int(0), fld("chi")),
    );
    if t.module.is_some() {
        chi_zero.insert("xi".to_string(), scale(ExactScalar::from_int(0), fld("xi")));
    }
    ids.push(Identity::new(
        "S_BRST is antighost-independent",
        sub2(s_brst.clone(), substitute(&s_brst, &chi_zero)),
    ));
    Ok(ids)
}

// -- Kapustin–Witten complexification and family -----------------------------

fn i_scalar() -> ExactScalar {
    ExactScalar::i()
}

/// Complex combinations of the KW fields.
pub struct KwComplex {
    pub a_c: Expr,
    pub psi_c: Expr,
    pub chi_c: Expr,
    pub b_c: Expr,
    pub eta_c: Expr,
    pub w_c: Expr,
}

pub fn kw_complex_fields() -> KwComplex {
    let cpx = |re: &str, im: &str| addv(vec![fld(re), scale(i_scalar(), fld(im))]);
    KwComplex {
        a_c: cpx("A", "sigma"),
        psi_c: cpx("psi", "psi_t"),
        chi_c: cpx("chi", "chi_t"),
        b_c: cpx("b", "b_t"),
        eta_c: cpx("eta", "eta_t"),
        w_c: addv(vec![
            scale(i_scalar(), fld("w")),
            br(fld("phi"), fld("lambda")),
        ]),
    }
}

/// Complex self-dual projection T ↦ ½(T + ⋆T̄) (and anti-self-dual with
/// the − sign).
pub fn complex_sd(plus: bool, e: Expr) -> Expr {
    let st = star(conj(e.clone()));
    if plus {
        half(addv(vec![e, st]))
    } else {
        half(sub2(e, st))
    }
}

/// The complexification suite: F_{A_c} display, complex self-duality of
/// χ_c, and each simplified Q rule against the real table.
pub fn kw_complexify_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let q = t.q_derivation();
    let kc = kw_complex_fields();
    let dq = |e: &Expr| -> Result<Expr, CalcError> {
        Ok(apply_derivation(t, &q, e)?.0)
    };
    let covc = |e: Expr| cov_d_conn(kc.a_c.clone(), e);
    let mut ids = Vec::new();
    ids.push(Identity::new(
        "F_{A_c} = F_A - [sigma,sigma]/2 + i d_A sigma",
        sub2(
            curv_conn(kc.a_c.clone()),
            addv(vec![
                curv(),
                neg(half(br(fld("sigma"), fld("sigma")))),
                scale(i_scalar(), cov_d(fld("sigma"))),
            ]),
        ),
    ));
    ids.push(Identity::new(
        "chi_c is complex self-dual",
        complex_sd(false, kc.chi_c.clone()),
    ));
    // For the connection itself the complexified self-brackets cancel in
    // pairs, so the gauge-fixing slice is cut out by the real-connection
    // codifferential: Im d_A* A_c = d_A* σ.
    ids.push(Identity::new(
        "Im d_A* A_c = d_A* sigma",
        sub2(im_part(cov_cod(kc.a_c.clone())), cov_cod(fld("sigma"))),
    ));
    ids.push(Identity::new(
        "Q A_c = psi_c + d_{A_c} theta",
        sub2(
            dq(&kc.a_c)?,
            addv(vec![kc.psi_c.clone(), covc(fld("theta"))]),
        ),
    ));
    ids.push(Identity::new(
        "Q psi_c = -[theta,psi_c] - d_{A_c} phi",
        sub2(
            dq(&kc.psi_c)?,
            addv(vec![
                neg(br(fld("theta"), kc.psi_c.clone())),
                neg(covc(fld("phi"))),
            ]),
        ),
    ));
    ids.push(Identity::new(
        "Q chi_c = b_c - [theta,chi_c] + (F_{A_c})_+",
        sub2(
            dq(&kc.chi_c)?,
            addv(vec![
                kc.b_c.clone(),
                neg(br(fld("theta"), kc.chi_c.clone())),
                complex_sd(true, curv_conn(kc.a_c.clone())),
            ]),
        ),
    ));
    ids.push(Identity::new(
        "Q b_c = -[theta,b_c] + [phi,chi_c] - d_{A_c}^+ psi_c",
        sub2(
            dq(&kc.b_c)?,
            addv(vec![
                neg(br(fld("theta"), kc.b_c.clone())),
                br(fld("phi"), kc.chi_c.clone()),
                neg(complex_sd(true, covc(kc.psi_c.clone()))),
            ]),
        ),
    ));
    ids.push(Identity::new(
        "Q eta_c = w_c - [theta,eta_c] + i Im d_A* A_c",
        sub2(
            dq(&kc.eta_c)?,
            addv(vec![
                kc.w_c.clone(),
                neg(br(fld("theta"), kc.eta_c.clone())),
                scale(i_scalar(), im_part(cov_cod(kc.a_c.clone()))),
            ]),
        ),
    ));
    // The Hermitian adjoint of d_{A_c} carries the conjugate connection,
    // which is what the ψ_c codifferential in the w_c rule requires.
    ids.push(Identity::new(
        "Q w_c = -[theta,w_c] + [phi,eta_c] - i Im d_{A_c}*^H psi_c",
        sub2(
            dq(&kc.w_c)?,
            addv(vec![
                neg(br(fld("theta"), kc.w_c.clone())),
                br(fld("phi"), kc.eta_c.clone()),
                neg(scale(
                    i_scalar(),
                    im_part(cov_cod_conn(conj(kc.a_c.clone()), kc.psi_c.clone())),
                )),
            ]),
        ),
    ));
    ids.push(Identity::new(
        "Q lambda = Re eta_c - [theta,lambda]",
        sub2(
            dq(&fld("lambda"))?,
            sub2(re_part(kc.eta_c.clone()), br(fld("theta"), fld("lambda"))),
        ),
    ));
    Ok(ids)
}

/// The KW theory at an exact rational point (cos, sin) of the circle:
/// only the curvature equations rotate, the third equation d_A*σ = 0 is
/// fixed.
pub fn kw_family_theory(c: ExactScalar, s: ExactScalar) -> Result<TheoryDef, CalcError> {
    let check = c.clone() * c.clone() + s.clone() * s.clone();
    if check != ExactScalar::from_int(1) {
        return Err(CalcError::Parse(
            "family parameter must satisfy cos² + sin² = 1".to_string(),
        ));
    }
    let mut t = TheoryDef::builtin("kw")?;
    t.name = "kw_family".to_string();
    let x = addv(vec![curv(), neg(half(br(fld("sigma"), fld("sigma"))))]);
    let y = cov_d(fld("sigma"));
    let lin_x = sub2(cov_d(fld("psi")), br(fld("sigma"), fld("psi_t")));
    let lin_y = addv(vec![cov_d(fld("psi_t")), br(fld("psi"), fld("sigma"))]);
    let rot = |a: &Expr, b: &Expr, ca: ExactScalar, cb: ExactScalar| {
        addv(vec![scale(ca, a.clone()), scale(cb, b.clone())])
    };
    t.q_rules.insert(
        "chi".to_string(),
        addv(vec![
            fld("b"),
            neg(br(fld("theta"), fld("chi"))),
            sd(true, rot(&x, &y, c.clone(), -s.clone())),
        ]),
    );
    t.q_rules.insert(
        "b".to_string(),
        addv(vec![
            neg(br(fld("theta"), fld("b"))),
            br(fld("phi"), fld("chi")),
            neg(sd(true, rot(&lin_x, &lin_y, c.clone(), -s.clone()))),
        ]),
    );
    t.q_rules.insert(
        "chi_t".to_string(),
        addv(vec![
            fld("b_t"),
            neg(br(fld("theta"), fld("chi_t"))),
            sd(false, rot(&x, &y, s.clone(), c.clone())),
        ]),
    );
    t.q_rules.insert(
        "b_t".to_string(),
        addv(vec![
            neg(br(fld("theta"), fld("b_t"))),
            br(fld("phi"), fld("chi_t")),
            neg(sd(false, rot(&lin_x, &lin_y, s, c))),
        ]),
    );
    Ok(t)
}

/// The U(1)-action on the complexified antighost multiplet, as a real
/// field substitution.
pub fn kw_family_substitution(c: ExactScalar, s: ExactScalar) -> BTreeMap<String, Expr> {
    let rot = |re: &str, im: &str, cc: &ExactScalar, ss: &ExactScalar| {
        (
            sub2(scale(cc.clone(), fld(re)), scale(ss.clone(), fld(im))),
            addv(vec![scale(ss.clone(), fld(re)), scale(cc.clone(), fld(im))]),
        )
    };
    let mut map = BTreeMap::new();
    for (re, im) in [
        ("psi", "psi_t"),
        ("chi", "chi_t"),
        ("b", "b_t"),
        ("eta", "eta_t"),
    ] {
        let (r, i) = rot(re, im, &c, &s);
        map.insert(re.to_string(), r);
        map.insert(im.to_string(), i);
    }
    map
}

/// The family suite at a rational circle point: nilpotency of the
/// rotated supersymmetry on the antighost sector, the rotated-equation
/// display, and the action relation g*S̃ = S̃_g.
pub fn kw_family_suite(
    c: ExactScalar,
    s: ExactScalar,
) -> Result<(TheoryDef, Vec<Identity>), CalcError> {
    let tf = kw_family_theory(c.clone(), s.clone())?;
    let q = tf.q_derivation();
    let mut ids = Vec::new();
    for name in ["chi", "b", "chi_t", "b_t"] {
        let (qx, _, _) = apply_derivation(&tf, &q, &fld(name))?;
        let (qqx, _, _) = apply_derivation(&tf, &q, &qx)?;
        ids.push(Identity::new(format!("family Q^2 {}", name), qqx));
    }
    // (e^{iφ} F_{A_c})₊ᶜ = (cX − sY)₊ + i(sX + cY)₋
    let kc = kw_complex_fields();
    let phase = c.clone() + i_scalar() * s.clone();
    let x = addv(vec![curv(), neg(half(br(fld("sigma"), fld("sigma"))))]);
    let y = cov_d(fld("sigma"));
    ids.push(Identity::new(
        "rotated curvature equation display",
        sub2(
            complex_sd(true, scale(phase, curv_conn(kc.a_c.clone()))),
            addv(vec![
                sd(
                    true,
                    sub2(scale(c.clone(), x.clone()), scale(s.clone(), y.clone())),
                ),
                scale(
                    i_scalar(),
                    sd(
                        false,
                        addv(vec![scale(s.clone(), x), scale(c.clone(), y)]),
                    ),
                ),
            ]),
        ),
    ));
    // g* S̃ = S̃_g
    let t0 = TheoryDef::builtin("kw")?;
    let s_orig = action_standard(&t0, ExactScalar::from_int(1))?;
    let s_fam = action_standard(&tf, ExactScalar::from_int(1))?;
    let gmap = kw_family_substitution(c, s);
    ids.push(Identity::new(
        "action relation g*S = S_g",
        sub2(substitute(&s_orig, &gmap), s_fam),
    ));
    Ok((tf, ids))
}

/// Nilpotency identities `Q² X = 0` for every field of the theory.
pub fn nilpotency_suite(t: &TheoryDef) -> Result<Vec<Identity>, CalcError> {
    let q = t.q_derivation();
    let mut ids = Vec::new();
    for f in &t.fields {
        let (qx, _, _) = apply_derivation(t, &q, &fld(&f.name))?;
        let (qqx, _, _) = apply_derivation(t, &q, &qx)?;
        ids.push(Identity::new(format!("Q^2 {} = 0", f.name), qqx));
    }
    Ok(ids)
}

/// Outcome of running the discriminator suite under one assignment of
/// the auditable sign and normalization choices.
#[derive(Clone, Debug)]
pub struct AuditRow {
    pub conventions: Conventions,
    pub passed: bool,
    /// Name of the first failing identity, if any.
    pub failure: Option<String>,
}

/// Run the convention audit: nilpotency plus the golden action
/// comparisons for the spinorial theories, under every assignment of
/// the four sign/normalization toggles. The spinorial theories exercise
/// all four (Clifford sign, μ polarization, codifferential sign,
/// self-dual normalization); the shipped defaults must be a satisfying
/// assignment, and any other satisfying assignment is reported rather
/// than hidden.
///
/// Finding: the Clifford sign and the μ polarization factor are pinned
/// by nilpotency, while the codifferential sign and the self-dual
/// normalization cancel identically — every identity in the suites is
/// homogeneous in those primitives, so flipping them rescales both
/// sides together. They are pure bookkeeping conventions with no
/// observable content at the identity level.
pub fn convention_audit(trials: usize, seed: u64) -> Result<Vec<AuditRow>, CalcError> {
    use crate::verifier::{run_suite, SuiteSpec};
    let mut rows = Vec::new();
    for conv in Conventions::all() {
        let mut failure = None;
        'theories: for name in ["sw_u1", "gsw_so3"] {
            let t = TheoryDef::builtin(name)?;
            let mut ids = nilpotency_suite(&t)?;
            ids.extend(action_suite(&t)?);
            let spec = SuiteSpec::new("convention_audit", t, ids)
                .with_trials(trials)
                .with_seed(seed)
                .with_conventions(conv);
            let rep = run_suite(&spec)?;
            for idr in &rep.identities {
                if !idr.passed() {
                    failure = Some(format!("{}: {}", name, idr.name));
                    break 'theories;
                }
            }
        }
        rows.push(AuditRow {
            conventions: conv,
            passed: failure.is_none(),
            failure,
        });
    }
    Ok(rows)
}

// -- the standard suite catalogue ---------------------------------------------

/// Resolve a theory name or alias to its canonical builtin name.
pub fn canonical_theory(name: &str) -> Result<&'static str, CalcError> {
    match name {
        "dw" => Ok("dw"),
        "sw" | "sw_u1" => Ok("sw_u1"),
        "gsw" | "gsw_so3" => Ok("gsw_so3"),
        "kw" => Ok("kw"),
        other => Err(CalcError::UnknownTheory(other.to_string())),
    }
}

/// Build the suite specs for one theory/suite selection. Suites that do
/// not apply to a theory are skipped under `all` and rejected when
/// requested explicitly. Seeds, trials, and conventions are left at
/// their defaults; adjust the returned specs before running.
pub fn standard_suites(
    theory: &str,
    suite: &str,
) -> Result<Vec<crate::verifier::SuiteSpec>, CalcError> {
    use crate::verifier::SuiteSpec;
    let theory = canonical_theory(theory)?;
    let all = suite == "all";
    let t = TheoryDef::builtin(theory)?;
    let mut specs: Vec<SuiteSpec> = Vec::new();
    let mut known = false;
    let not_applicable =
        |suite: &str| CalcError::SuiteNotApplicable(suite.to_string(), theory.to_string());

    if suite == "nilpotency" || all {
        known = true;
        specs.push(SuiteSpec::new(
            "nilpotency",
            t.clone(),
            nilpotency_suite(&t)?,
        ));
    }
    if suite == "action" || all {
        known = true;
        specs.push(SuiteSpec::new("action", t.clone(), action_suite(&t)?));
    }
    if suite == "vector-susy" || all {
        known = true;
        let applies = matches!(theory, "dw" | "sw_u1" | "gsw_so3");
        if applies {
            let vs = vector_susy_suite(&t)?;
            specs.push(SuiteSpec::new("vector-susy", t.clone(), vs.identities));
        } else if !all {
            return Err(not_applicable("vector-susy"));
        }
    }
    if suite == "descent" || all {
        known = true;
        if theory == "dw" {
            specs.push(SuiteSpec::new("descent", t.clone(), descent_suite(&t)?));
            specs.push(SuiteSpec::new("theta-k", t.clone(), theta_k_suite(&t)?));
            specs.push(SuiteSpec::new("holomorphic", t.clone(), hol_suite(&t)?));
        } else if !all {
            return Err(not_applicable("descent"));
        }
    }
    if suite == "brst" || all {
        known = true;
        let applies = matches!(theory, "dw" | "sw_u1" | "gsw_so3");
        if applies {
            specs.push(SuiteSpec::new("brst", t.clone(), brst_suite(&t)?));
        } else if !all {
            return Err(not_applicable("brst"));
        }
    }
    if suite == "kw" || all {
        known = true;
        if theory == "kw" {
            specs.push(
                SuiteSpec::new("kw-complexify", t.clone(), kw_complexify_suite(&t)?)
                    .with_real_ad(true),
            );
            for (label, c, s) in [
                ("1,0", ExactScalar::from_int(1), ExactScalar::from_int(0)),
                ("0,1", ExactScalar::from_int(0), ExactScalar::from_int(1)),
                ("3/5,4/5", ExactScalar::ratio(3, 5), ExactScalar::ratio(4, 5)),
            ] {
                let (tf, ids) = kw_family_suite(c, s)?;
                specs.push(
                    SuiteSpec::new(format!("kw-family({})", label), tf, ids).with_real_ad(true),
                );
            }
        } else if !all {
            return Err(not_applicable("kw"));
        }
    }
    if !known {
        return Err(CalcError::UnknownSuite(suite.to_string()));
    }
    Ok(specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::{run_suite, SuiteSpec};

    fn assert_suite(suite: &str, t: TheoryDef, ids: Vec<Identity>, real_ad: bool) {
        let spec = SuiteSpec::new(suite, t, ids)
            .with_trials(1)
            .with_real_ad(real_ad);
        let rep = run_suite(&spec).expect("suite evaluates");
        for id in &rep.identities {
            assert!(id.passed(), "{} / {} failed: {:?}", suite, id.name, id.counterexample);
        }
    }

    #[test]
    fn action_suites_pass() {
        for name in ["dw", "sw_u1", "gsw_so3", "kw"] {
            let t = TheoryDef::builtin(name).unwrap();
            let real = t.module.is_some();
            let ids = action_suite(&t).unwrap();
            assert_suite("action", t, ids, real);
        }
    }

    #[test]
    fn gauge_fermions_are_theta_free() {
        for name in ["dw", "sw_u1", "gsw_so3", "kw"] {
            let t = TheoryDef::builtin(name).unwrap();
            assert!(fermion_structure_ok(&t));
        }
    }

    #[test]
    fn vector_susy_passes_dw() {
        let t = TheoryDef::builtin("dw").unwrap();
        let s = vector_susy_suite(&t).unwrap();
        assert_suite("vector-susy", t, s.identities, false);
    }

    #[test]
    fn vector_susy_passes_gsw() {
        let t = TheoryDef::builtin("gsw_so3").unwrap();
        let s = vector_susy_suite(&t).unwrap();
        assert!(s.skipped.iter().any(|f| f == "eta"));
        assert_suite("vector-susy", t, s.identities, true);
    }

    #[test]
    fn descent_passes() {
        let t = TheoryDef::builtin("dw").unwrap();
        let ids = descent_suite(&t).unwrap();
        assert_suite("descent", t, ids, false);
    }

    #[test]
    fn theta_k_and_holomorphic_observable_pass() {
        let t = TheoryDef::builtin("dw").unwrap();
        let ids = theta_k_suite(&t).unwrap();
        assert_suite("theta-k", t.clone(), ids, false);
        let ids = hol_suite(&t).unwrap();
        assert_suite("hol", t, ids, false);
    }

    #[test]
    fn brst_passes() {
        for name in ["dw", "sw_u1", "gsw_so3"] {
            let t = TheoryDef::builtin(name).unwrap();
            let real = t.module.is_some();
            let ids = brst_suite(&t).unwrap();
            assert_suite("brst", t, ids, real);
        }
    }

    #[test]
    fn kw_complexification_passes() {
        let t = TheoryDef::builtin("kw").unwrap();
        let ids = kw_complexify_suite(&t).unwrap();
        assert_suite("kw-complexify", t, ids, true);
    }

    #[test]
    fn kw_family_passes_at_rational_angle() {
        let (tf, ids) =
            kw_family_suite(ExactScalar::ratio(3, 5), ExactScalar::ratio(4, 5)).unwrap();
        assert_suite("kw-family", tf, ids, true);
    }

    #[test]
    fn kw_family_rejects_off_circle_parameters() {
        assert!(kw_family_theory(ExactScalar::from_int(1), ExactScalar::from_int(1)).is_err());
    }

    #[test]
    fn nilpotency_passes_everywhere() {
        for name in ["dw", "sw_u1", "gsw_so3", "kw"] {
            let t = TheoryDef::builtin(name).unwrap();
            let real = t.module.is_some();
            let ids = nilpotency_suite(&t).unwrap();
            assert_suite("nilpotency", t, ids, real);
        }
    }

    #[test]
    fn convention_audit_pins_the_observable_toggles() {
        let rows = convention_audit(1, 11).unwrap();
        // defaults come first in Conventions::all()
        assert!(rows[0].passed, "{:?}", rows[0].failure);
        let satisfying: Vec<_> = rows.iter().filter(|r| r.passed).collect();
        // clifford sign and μ polarization are observable; the codiff
        // sign and self-dual normalization cancel in every identity
        assert_eq!(satisfying.len(), 4, "{:?}", satisfying);
        for r in &satisfying {
            assert!(r.conventions.clifford_plus && r.conventions.mu_half);
        }
        for r in rows.iter().filter(|r| !r.passed) {
            assert!(!(r.conventions.clifford_plus && r.conventions.mu_half));
        }
    }
}
