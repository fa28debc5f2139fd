//! Theory serialization: expression trees as a small prefix grammar,
//! theory definitions as a documented JSON schema, and deterministic
//! LaTeX emission.
//!
//! The grammar is parenthesized prefix notation. Atoms are field names;
//! every operator is a parenthesized list whose head names the node:
//!
//! ```text
//! expr    := IDENT                     field leaf
//!          | '(' HEAD arg* ')'
//! HEAD    := zero | add | scale | wedge | bracket | pair-lie
//!          | pair-spinor | trace-pair | mu | mu2 | act | dirac
//!          | contract-bracket | codiff-bracket | d | covd | covd-with
//!          | covcod | covcod-with | curv | curv-with | sd+ | sd- | star
//!          | conj | re | im | iota | dx | gamma-wedge | mu-gamma-wedge
//!          | chi-gamma-wedge | int
//! ```
//!
//! Scalars print in the `ExactScalar` display form (`3/2`, `-1`, `2i`,
//! `1+2i`); `zero` takes the ghost and form degree, `iota`/`dx` take the
//! 1-based frame index. `emit_expr` and `parse_expr` round-trip.

use std::collections::BTreeMap;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::field_calculus::{CalcError, Expr, FieldSymbol, PairKind, Slot, TheoryDef};
use crate::rep::{LieAlgebraData, SpinorModule};
use crate::scalar::ExactScalar;

// -- prefix grammar: emission ------------------------------------------------

/// Render an expression in the prefix grammar.
pub fn emit_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e);
    s
}

fn write_expr(out: &mut String, e: &Expr) {
    let list = |out: &mut String, head: &str, args: &[&Expr]| {
        out.push('(');
        out.push_str(head);
        for a in args {
            out.push(' ');
            write_expr(out, a);
        }
        out.push(')');
    };
    match e {
        Expr::Field(n) => out.push_str(n),
        Expr::Zero(g, f) => out.push_str(&format!("(zero {} {})", g, f)),
        Expr::Add(v) => {
            out.push_str("(add");
            for x in v {
                out.push(' ');
                write_expr(out, x);
            }
            out.push(')');
        }
        Expr::Scale(c, x) => {
            out.push_str(&format!("(scale {} ", c));
            write_expr(out, x);
            out.push(')');
        }
        Expr::Wedge(a, b) => list(out, "wedge", &[a, b]),
        Expr::Bracket(a, b) => list(out, "bracket", &[a, b]),
        Expr::Pair(PairKind::Lie, a, b) => list(out, "pair-lie", &[a, b]),
        Expr::Pair(PairKind::Spinor, a, b) => list(out, "pair-spinor", &[a, b]),
        Expr::TracePair(a, b) => list(out, "trace-pair", &[a, b]),
        Expr::Mu(x) => list(out, "mu", &[x]),
        Expr::MuBilinear(a, b) => list(out, "mu2", &[a, b]),
        Expr::Act(a, b) => list(out, "act", &[a, b]),
        Expr::Dirac(x) => list(out, "dirac", &[x]),
        Expr::ContractBracket(a, b) => list(out, "contract-bracket", &[a, b]),
        Expr::CodiffBracket(a, b) => list(out, "codiff-bracket", &[a, b]),
        Expr::ExtDer(x) => list(out, "d", &[x]),
        Expr::CovDer(None, x) => list(out, "covd", &[x]),
        Expr::CovDer(Some(c), x) => list(out, "covd-with", &[c, x]),
        Expr::CovCoDer(None, x) => list(out, "covcod", &[x]),
        Expr::CovCoDer(Some(c), x) => list(out, "covcod-with", &[c, x]),
        Expr::Curv(None) => out.push_str("(curv)"),
        Expr::Curv(Some(c)) => list(out, "curv-with", &[c]),
        Expr::SelfDual(true, x) => list(out, "sd+", &[x]),
        Expr::SelfDual(false, x) => list(out, "sd-", &[x]),
        Expr::Star(x) => list(out, "star", &[x]),
        Expr::Conj(x) => list(out, "conj", &[x]),
        Expr::RealPart(x) => list(out, "re", &[x]),
        Expr::ImagPart(x) => list(out, "im", &[x]),
        Expr::Iota(mu, x) => {
            out.push_str(&format!("(iota {} ", mu));
            write_expr(out, x);
            out.push(')');
        }
        Expr::DxWedge(mu, x) => {
            out.push_str(&format!("(dx {} ", mu));
            write_expr(out, x);
            out.push(')');
        }
        Expr::GammaWedge(x) => list(out, "gamma-wedge", &[x]),
        Expr::MuGammaWedge(a, b) => list(out, "mu-gamma-wedge", &[a, b]),
        Expr::ChiGammaWedge(a, b) => list(out, "chi-gamma-wedge", &[a, b]),
        Expr::Integrate(x) => list(out, "int", &[x]),
    }
}

// -- prefix grammar: parsing -------------------------------------------------

#[derive(Debug, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(src: &str) -> Result<Vec<Tok>, CalcError> {
    let mut toks = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, toks: &mut Vec<Tok>| {
        if !cur.is_empty() {
            toks.push(Tok::Atom(std::mem::take(cur)));
        }
    };
    for ch in src.chars() {
        match ch {
            '(' => {
                flush(&mut cur, &mut toks);
                toks.push(Tok::Open);
            }
            ')' => {
                flush(&mut cur, &mut toks);
                toks.push(Tok::Close);
            }
            c if c.is_whitespace() => flush(&mut cur, &mut toks),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut toks);
    Ok(toks)
}

fn parse_scalar(s: &str) -> Result<ExactScalar, CalcError> {
    let bad = || CalcError::Parse(format!("bad scalar `{}`", s));
    let rat = |t: &str| -> Result<BigRational, CalcError> {
        let t = t.strip_prefix('+').unwrap_or(t);
        t.parse::<BigRational>()
            .map_err(|_| CalcError::Parse(format!("bad rational `{}`", t)))
    };
    if let Some(body) = s.strip_suffix('i') {
        // forms: `2i`, `-3/4i`, `1+2i`, `3-2i`, `i`, `-i`
        // split on the last '+'/'-' that is not at position 0 and not
        // inside the (denominator-free) leading rational
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(i, c)| (*c == '+' || *c == '-') && !body[..*i].ends_with('/'))
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => {
                let re = rat(&body[..i])?;
                let imtxt = &body[i..];
                let im = match imtxt {
                    "+" => BigRational::from_integer(1.into()),
                    "-" => BigRational::from_integer((-1).into()),
                    t => rat(t)?,
                };
                Ok(ExactScalar::new(re, im))
            }
            None => {
                let im = match body {
                    "" => BigRational::from_integer(1.into()),
                    "-" => BigRational::from_integer((-1).into()),
                    t => rat(t)?,
                };
                Ok(ExactScalar::new(BigRational::from_integer(0.into()), im))
            }
        }
    } else if s.is_empty() {
        Err(bad())
    } else {
        Ok(ExactScalar::new(rat(s)?, BigRational::from_integer(0.into())))
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<&Tok, CalcError> {
        let t = self
            .toks
            .get(self.pos)
            .ok_or_else(|| CalcError::Parse("unexpected end of input".to_string()))?;
        self.pos += 1;
        Ok(t)
    }

    fn atom(&mut self) -> Result<String, CalcError> {
        match self.next()? {
            Tok::Atom(s) => Ok(s.clone()),
            t => Err(CalcError::Parse(format!("expected atom, found {:?}", t))),
        }
    }

    fn close(&mut self) -> Result<(), CalcError> {
        match self.next()? {
            Tok::Close => Ok(()),
            t => Err(CalcError::Parse(format!("expected `)`, found {:?}", t))),
        }
    }

    fn expr(&mut self) -> Result<Expr, CalcError> {
        match self.next()? {
            Tok::Atom(name) => Ok(Expr::Field(name.clone())),
            Tok::Close => Err(CalcError::Parse("unexpected `)`".to_string())),
            Tok::Open => {
                let head = self.atom()?;
                let e = self.form(&head)?;
                self.close()?;
                Ok(e)
            }
        }
    }

    fn form(&mut self, head: &str) -> Result<Expr, CalcError> {
        let b = Box::new;
        let mut un = |mk: fn(Box<Expr>) -> Expr| -> Result<Expr, CalcError> {
            Ok(mk(Box::new(self.expr()?)))
        };
        match head {
            "zero" => {
                let g = self
                    .atom()?
                    .parse::<i64>()
                    .map_err(|_| CalcError::Parse("bad ghost degree".to_string()))?;
                let f = self
                    .atom()?
                    .parse::<usize>()
                    .map_err(|_| CalcError::Parse("bad form degree".to_string()))?;
                Ok(Expr::Zero(g, f))
            }
            "add" => {
                let mut v = Vec::new();
                while !matches!(self.peek(), Some(Tok::Close) | None) {
                    v.push(self.expr()?);
                }
                Ok(Expr::Add(v))
            }
            "scale" => {
                let c = parse_scalar(&self.atom()?)?;
                Ok(Expr::Scale(c, b(self.expr()?)))
            }
            "wedge" => Ok(Expr::Wedge(b(self.expr()?), b(self.expr()?))),
            "bracket" => Ok(Expr::Bracket(b(self.expr()?), b(self.expr()?))),
            "pair-lie" => Ok(Expr::Pair(PairKind::Lie, b(self.expr()?), b(self.expr()?))),
            "pair-spinor" => Ok(Expr::Pair(
                PairKind::Spinor,
                b(self.expr()?),
                b(self.expr()?),
            )),
            "trace-pair" => Ok(Expr::TracePair(b(self.expr()?), b(self.expr()?))),
            "mu" => un(Expr::Mu),
            "mu2" => Ok(Expr::MuBilinear(b(self.expr()?), b(self.expr()?))),
            "act" => Ok(Expr::Act(b(self.expr()?), b(self.expr()?))),
            "dirac" => un(Expr::Dirac),
            "contract-bracket" => Ok(Expr::ContractBracket(b(self.expr()?), b(self.expr()?))),
            "codiff-bracket" => Ok(Expr::CodiffBracket(b(self.expr()?), b(self.expr()?))),
            "d" => un(Expr::ExtDer),
            "covd" => Ok(Expr::CovDer(None, b(self.expr()?))),
            "covd-with" => Ok(Expr::CovDer(Some(b(self.expr()?)), b(self.expr()?))),
            "covcod" => Ok(Expr::CovCoDer(None, b(self.expr()?))),
            "covcod-with" => Ok(Expr::CovCoDer(Some(b(self.expr()?)), b(self.expr()?))),
            "curv" => Ok(Expr::Curv(None)),
            "curv-with" => Ok(Expr::Curv(Some(b(self.expr()?)))),
            "sd+" => Ok(Expr::SelfDual(true, b(self.expr()?))),
            "sd-" => Ok(Expr::SelfDual(false, b(self.expr()?))),
            "star" => un(Expr::Star),
            "conj" => un(Expr::Conj),
            "re" => un(Expr::RealPart),
            "im" => un(Expr::ImagPart),
            "iota" => {
                let mu = self
                    .atom()?
                    .parse::<usize>()
                    .map_err(|_| CalcError::Parse("bad frame index".to_string()))?;
                Ok(Expr::Iota(mu, b(self.expr()?)))
            }
            "dx" => {
                let mu = self
                    .atom()?
                    .parse::<usize>()
                    .map_err(|_| CalcError::Parse("bad frame index".to_string()))?;
                Ok(Expr::DxWedge(mu, b(self.expr()?)))
            }
            "gamma-wedge" => un(Expr::GammaWedge),
            "mu-gamma-wedge" => Ok(Expr::MuGammaWedge(b(self.expr()?), b(self.expr()?))),
            "chi-gamma-wedge" => Ok(Expr::ChiGammaWedge(b(self.expr()?), b(self.expr()?))),
            "int" => un(Expr::Integrate),
            other => Err(CalcError::Parse(format!("unknown operator `{}`", other))),
        }
    }
}

/// Parse a prefix-grammar expression.
pub fn parse_expr(src: &str) -> Result<Expr, CalcError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(CalcError::Parse("trailing input".to_string()));
    }
    Ok(e)
}

// -- JSON theory schema ------------------------------------------------------

/// Field entry of the JSON schema.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FieldJson {
    pub name: String,
    pub ghost: i64,
    pub form: usize,
    /// `"ad"`, `"spinor+"` (positive chirality), or `"spinor-"`.
    pub slot: String,
    /// For constrained 2-forms: `true` = self-dual, `false` = anti.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sd: Option<bool>,
}

/// Serializable theory definition. Lie algebras and spinor modules are
/// referenced by name (`u1`, `su2`, `so3`, `u2`; modules `sw_u1`,
/// `gsw_u2`); rules are prefix-grammar strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TheoryJson {
    pub name: String,
    pub lie: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<String>,
    pub fields: Vec<FieldJson>,
    pub q_rules: BTreeMap<String, String>,
    #[serde(default)]
    pub k_rules: BTreeMap<String, String>,
}

fn lie_by_name(name: &str) -> Result<LieAlgebraData, CalcError> {
    match name {
        "u1" => Ok(LieAlgebraData::u1()),
        "su2" => Ok(LieAlgebraData::su2()),
        "so3" => Ok(LieAlgebraData::so3()),
        "u2" => Ok(LieAlgebraData::u2()),
        other => Err(CalcError::Parse(format!("unknown Lie algebra `{}`", other))),
    }
}

fn module_by_name(name: &str) -> Result<SpinorModule, CalcError> {
    match name {
        "sw_u1" => Ok(SpinorModule::sw_u1()),
        "gsw_u2" => Ok(SpinorModule::gsw_u2()),
        other => Err(CalcError::Parse(format!("unknown spinor module `{}`", other))),
    }
}

fn module_name(m: &SpinorModule) -> String {
    // the builtin modules are keyed by their Lie algebra
    match m.lie.name.as_str() {
        "u1" => "sw_u1".to_string(),
        _ => "gsw_u2".to_string(),
    }
}

impl TheoryJson {
    pub fn from_theory(t: &TheoryDef) -> TheoryJson {
        let fields = t
            .fields
            .iter()
            .map(|f| FieldJson {
                name: f.name.clone(),
                ghost: f.ghost,
                form: f.form,
                slot: match f.slot {
                    Slot::Ad => "ad".to_string(),
                    Slot::Spinor(true) => "spinor+".to_string(),
                    Slot::Spinor(false) => "spinor-".to_string(),
                },
                sd: f.sd,
            })
            .collect();
        let rules = |m: &BTreeMap<String, Expr>| {
            m.iter()
                .map(|(k, v)| (k.clone(), emit_expr(v)))
                .collect::<BTreeMap<_, _>>()
        };
        TheoryJson {
            name: t.name.clone(),
            lie: t.lie.name.clone(),
            module: t.module.as_ref().map(module_name),
            fields,
            q_rules: rules(&t.q_rules),
            k_rules: rules(&t.k_rules),
        }
    }

    pub fn to_theory(&self) -> Result<TheoryDef, CalcError> {
        let fields = self
            .fields
            .iter()
            .map(|f| {
                let slot = match f.slot.as_str() {
                    "ad" => Ok(Slot::Ad),
                    "spinor+" => Ok(Slot::Spinor(true)),
                    "spinor-" => Ok(Slot::Spinor(false)),
                    other => Err(CalcError::Parse(format!("unknown slot `{}`", other))),
                }?;
                Ok(FieldSymbol {
                    name: f.name.clone(),
                    ghost: f.ghost,
                    form: f.form,
                    slot,
                    sd: f.sd,
                })
            })
            .collect::<Result<Vec<_>, CalcError>>()?;
        let rules = |m: &BTreeMap<String, String>| {
            m.iter()
                .map(|(k, v)| Ok((k.clone(), parse_expr(v)?)))
                .collect::<Result<BTreeMap<_, _>, CalcError>>()
        };
        Ok(TheoryDef {
            name: self.name.clone(),
            lie: lie_by_name(&self.lie)?,
            module: self.module.as_deref().map(module_by_name).transpose()?,
            fields,
            q_rules: rules(&self.q_rules)?,
            k_rules: rules(&self.k_rules)?,
        })
    }
}

// -- LaTeX emission ----------------------------------------------------------

fn latex_name(n: &str) -> String {
    match n {
        "theta" => r"\theta".to_string(),
        "phi" => r"\phi".to_string(),
        "A" => "A".to_string(),
        "psi" => r"\psi".to_string(),
        "chi" => r"\chi".to_string(),
        "b" => "b".to_string(),
        "eta" => r"\eta".to_string(),
        "lambda" => r"\lambda".to_string(),
        "sigma" => r"\sigma".to_string(),
        "upsilon" => r"\upsilon".to_string(),
        "xi" => r"\xi".to_string(),
        "h" => "h".to_string(),
        "psi_t" => r"\tilde{\psi}".to_string(),
        "chi_t" => r"\tilde{\chi}".to_string(),
        "b_t" => r"\tilde{b}".to_string(),
        "eta_t" => r"\tilde{\eta}".to_string(),
        "w" => "w".to_string(),
        other => format!(r"\mathrm{{{}}}", other.replace('_', r"\_")),
    }
}

fn latex_scalar(c: &ExactScalar) -> String {
    let rat = |r: &BigRational| -> String {
        if r.is_integer() {
            format!("{}", r)
        } else {
            let neg = r < &BigRational::from_integer(0.into());
            let a = if neg { -r.clone() } else { r.clone() };
            let s = format!(r"\frac{{{}}}{{{}}}", a.numer(), a.denom());
            if neg {
                format!("-{}", s)
            } else {
                s
            }
        }
    };
    use num::Zero;
    if c.im.is_zero() {
        rat(&c.re)
    } else if c.re.is_zero() {
        if c.im == BigRational::from_integer(1.into()) {
            "i".to_string()
        } else if c.im == BigRational::from_integer((-1).into()) {
            "-i".to_string()
        } else {
            format!("{} i", rat(&c.im))
        }
    } else {
        format!(r"\left({} + {} i\right)", rat(&c.re), rat(&c.im))
    }
}

/// Deterministic LaTeX rendering of an expression tree. Sums flatten
/// with `+`/`-` joining, leading negative scales fold into the sign.
pub fn emit_latex(e: &Expr) -> String {
    match e {
        Expr::Add(v) if !v.is_empty() => {
            let mut out = String::new();
            for (i, x) in v.iter().enumerate() {
                let (neg, body) = latex_signed(x);
                if i == 0 {
                    if neg {
                        out.push('-');
                    }
                } else if neg {
                    out.push_str(" - ");
                } else {
                    out.push_str(" + ");
                }
                out.push_str(&body);
            }
            out
        }
        _ => {
            let (neg, body) = latex_signed(e);
            if neg {
                format!("-{}", body)
            } else {
                body
            }
        }
    }
}

/// Split a leading −1 scale off for sign folding.
fn latex_signed(e: &Expr) -> (bool, String) {
    if let Expr::Scale(c, x) = e {
        if *c == ExactScalar::from_int(-1) {
            return (true, latex_atom(x));
        }
    }
    (false, latex_atom(e))
}

fn latex_atom(e: &Expr) -> String {
    let bin = |op: &str, a: &Expr, b: &Expr| -> String {
        format!("{}{} , {}{}", op, emit_latex(a), emit_latex(b), r"\right>")
    };
    match e {
        Expr::Field(n) => latex_name(n),
        Expr::Zero(_, _) => "0".to_string(),
        Expr::Add(_) => format!(r"\left({}\right)", emit_latex(e)),
        Expr::Scale(c, x) => format!("{} {}", latex_scalar(c), latex_atom(x)),
        Expr::Wedge(a, b) => format!(r"{} \wedge {}", latex_atom(a), latex_atom(b)),
        Expr::Bracket(a, b) => format!("[{},{}]", emit_latex(a), emit_latex(b)),
        Expr::Pair(_, a, b) => bin(r"\left<", a, b),
        Expr::TracePair(a, b) =>

            format!(r"\operatorname{{Tr}}\left({} \wedge {}\right)", emit_latex(a), emit_latex(b)),
        Expr::Mu(x) => format!(r"\mu({})", emit_latex(x)),
        Expr::MuBilinear(a, b) => format!(r"\mu({},{})", emit_latex(a), emit_latex(b)),
        Expr::Act(a, b) => format!(r"{} \cdot {}", latex_atom(a), latex_atom(b)),
        Expr::Dirac(x) => format!(r"\slashed{{D}}_A {}", latex_atom(x)),
        Expr::ContractBracket(a, b) => {
            format!(r"[{} \lrcorner\, {}]", emit_latex(a), emit_latex(b))
        }
        Expr::CodiffBracket(a, b) => {
            format!(r"-\star[{} , \star {}]", emit_latex(a), emit_latex(b))
        }
        Expr::ExtDer(x) => format!(r"\mathrm{{d}} {}", latex_atom(x)),
        Expr::CovDer(None, x) => format!(r"\mathrm{{d}}_A {}", latex_atom(x)),
        Expr::CovDer(Some(c), x) => {
            format!(r"\mathrm{{d}}_{{{}}} {}", emit_latex(c), latex_atom(x))
        }
        Expr::CovCoDer(None, x) => format!(r"\mathrm{{d}}_A^* {}", latex_atom(x)),
        Expr::CovCoDer(Some(c), x) => {
            format!(r"\mathrm{{d}}_{{{}}}^* {}", emit_latex(c), latex_atom(x))
        }
        Expr::Curv(None) => "F_A".to_string(),
        Expr::Curv(Some(c)) => format!("F_{{{}}}", emit_latex(c)),
        Expr::SelfDual(true, x) => format!(r"\left({}\right)_+", emit_latex(x)),
        Expr::SelfDual(false, x) => format!(r"\left({}\right)_-", emit_latex(x)),
        Expr::Star(x) => format!(r"\star {}", latex_atom(x)),
        Expr::Conj(x) => format!(r"\overline{{{}}}", emit_latex(x)),
        Expr::RealPart(x) => format!(r"\operatorname{{Re}}\left({}\right)", emit_latex(x)),
        Expr::ImagPart(x) => format!(r"\operatorname{{Im}}\left({}\right)", emit_latex(x)),
        Expr::Iota(mu, x) => format!(r"\iota_{{{}}} {}", mu, latex_atom(x)),
        Expr::DxWedge(mu, x) => format!(r"\mathrm{{d}}x^{{{}}} \wedge {}", mu, latex_atom(x)),
        Expr::GammaWedge(x) => {
            format!(r"\textstyle\sum_\mu \mathrm{{d}}x^\mu \otimes \gamma_\mu {}", latex_atom(x))
        }
        Expr::MuGammaWedge(a, b) => format!(
            r"\textstyle\sum_\mu \mathrm{{d}}x^\mu \wedge \mu(\gamma_\mu {}, {})",
            emit_latex(a),
            emit_latex(b)
        ),
        Expr::ChiGammaWedge(a, b) => format!(
            r"\textstyle\sum_{{\mu\nu}} \mathrm{{d}}x^\mu \otimes \rho({}_{{\mu\nu}})\gamma_\nu {}",
            emit_latex(a),
            emit_latex(b)
        ),
        Expr::Integrate(x) => format!(r"\int_{{T^4}} {}", latex_atom(x)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_calculus::{br, fld, half, neg, sub2};

    fn roundtrip(e: &Expr) {
        let s = emit_expr(e);
        let back = parse_expr(&s).unwrap_or_else(|err| panic!("parse `{}`: {:?}", s, err));
        assert_eq!(&back, e, "round trip through `{}`", s);
    }

    #[test]
    fn scalars_roundtrip() {
        for s in [
            ExactScalar::from_int(3),
            ExactScalar::from_int(-1),
            ExactScalar::ratio(3, 2),
            ExactScalar::ratio(-7, 5),
            ExactScalar::i(),
            ExactScalar::gauss(1, 2),
            ExactScalar::gauss(3, -2),
            ExactScalar::gauss(0, -1),
            ExactScalar::ratio(1, 2) * ExactScalar::i(),
        ] {
            let txt = format!("{}", s);
            assert_eq!(parse_scalar(&txt).unwrap(), s, "through `{}`", txt);
        }
    }

    #[test]
    fn builtin_rules_roundtrip() {
        for name in ["dw", "sw_u1", "gsw_so3", "kw"] {
            let t = TheoryDef::builtin(name).unwrap();
            for e in t.q_rules.values().chain(t.k_rules.values()) {
                roundtrip(e);
            }
        }
    }

    #[test]
    fn composite_expressions_roundtrip() {
        roundtrip(&Expr::Zero(-2, 3));
        roundtrip(&crate::checks::phi_k_squared_top());
        for c in crate::checks::descent_components() {
            roundtrip(&c);
        }
        let kc = crate::checks::kw_complex_fields();
        roundtrip(&kc.w_c);
        roundtrip(&crate::checks::complex_sd(true, kc.a_c));
    }

    #[test]
    fn theories_roundtrip_through_json() {
        for name in ["dw", "sw_u1", "gsw_so3", "kw"] {
            let t = TheoryDef::builtin(name).unwrap();
            let j = TheoryJson::from_theory(&t);
            let txt = serde_json::to_string_pretty(&j).unwrap();
            let back: TheoryJson = serde_json::from_str(&txt).unwrap();
            let t2 = back.to_theory().unwrap();
            assert_eq!(t2.name, t.name);
            assert_eq!(t2.fields, t.fields);
            assert_eq!(t2.q_rules, t.q_rules);
            assert_eq!(t2.k_rules, t.k_rules);
            assert_eq!(t2.lie.name, t.lie.name);
            assert_eq!(t2.module.is_some(), t.module.is_some());
        }
    }

    #[test]
    fn parse_rejects_malformed_input() {
        assert!(parse_expr("(add chi").is_err());
        assert!(parse_expr("(frobnicate x)").is_err());
        assert!(parse_expr("(scale nope x)").is_err());
        assert!(parse_expr("chi b").is_err());
        assert!(parse_expr("").is_err());
    }

    #[test]
    fn latex_spot_checks() {
        assert_eq!(emit_latex(&fld("phi")), r"\phi");
        let qtheta = sub2(fld("phi"), half(br(fld("theta"), fld("theta"))));
        assert_eq!(
            emit_latex(&qtheta),
            r"\phi - \frac{1}{2} [\theta,\theta]"
        );
        assert_eq!(emit_latex(&neg(fld("psi"))), r"-\psi");
        // determinism
        let t = TheoryDef::builtin("kw").unwrap();
        let once: Vec<String> = t.q_rules.values().map(emit_latex).collect();
        let twice: Vec<String> = t.q_rules.values().map(emit_latex).collect();
        assert_eq!(once, twice);
    }
}
