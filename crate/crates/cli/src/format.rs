//! Text, LaTeX and JSON renderings of polynomials.
//!
//! Terms appear in display order: total degree, then lexicographic on the
//! sorted factor list. The same order is used by all three styles.

use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use gauss_cumulants::{CovSymbol, Index, Monomial, Poly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Style {
    Text,
    Latex,
    Json,
}

/// JSON schema: `{ "terms": [ { "coeff": "6", "factors": [[2,5],[2,5],[2,8]] } ] }`.
/// Coefficients are decimal strings so no precision is lost downstream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: String,
    pub factors: Vec<[Index; 2]>,
}

impl From<&Poly> for PolyJson {
    fn from(p: &Poly) -> Self {
        PolyJson {
            terms: p
                .terms()
                .map(|(m, c)| TermJson {
                    coeff: c.to_string(),
                    factors: m.factors().iter().map(|s| [s.lo(), s.hi()]).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Error)]
pub enum JsonPolyError {
    #[error("invalid polynomial JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("term {term}: coefficient `{coeff}` is not an integer")]
    Coefficient { term: usize, coeff: String },
    #[error("term {term}: indices must be positive")]
    ZeroIndex { term: usize },
}

impl TryFrom<&PolyJson> for Poly {
    type Error = JsonPolyError;

    fn try_from(j: &PolyJson) -> Result<Poly, JsonPolyError> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for (n, t) in j.terms.iter().enumerate() {
            let coeff = BigInt::from_str(&t.coeff).map_err(|_| JsonPolyError::Coefficient {
                term: n,
                coeff: t.coeff.clone(),
            })?;
            if t.factors.iter().any(|f| f[0] == 0 || f[1] == 0) {
                return Err(JsonPolyError::ZeroIndex { term: n });
            }
            let factors = t.factors.iter().map(|f| CovSymbol::new(f[0], f[1]));
            terms.push((Monomial::from_factors(factors), coeff));
        }
        Ok(Poly::from_terms(terms))
    }
}

pub fn poly_from_json(s: &str) -> Result<Poly, JsonPolyError> {
    let j: PolyJson = serde_json::from_str(s)?;
    Poly::try_from(&j)
}

/// Renders `p`. With `standardized` the symbol letter is `C` (correlations);
/// callers are expected to have removed the variances already.
pub fn format_poly(p: &Poly, style: Style, standardized: bool) -> String {
    let letter = if standardized { 'C' } else { 'V' };
    match style {
        Style::Json => serde_json::to_string(&PolyJson::from(p)).expect("plain data serializes"),
        Style::Text => join_terms(p, |abs, m| {
            let mut parts = Vec::new();
            if m.is_one() || abs != "1" {
                parts.push(abs.to_owned());
            }
            for (s, e) in m.powers() {
                let sym = format!("{letter}[{},{}]", s.lo(), s.hi());
                parts.push(if e == 1 { sym } else { format!("{sym}^{e}") });
            }
            parts.join("*")
        }),
        Style::Latex => join_terms(p, |abs, m| {
            let mut out = String::new();
            if m.is_one() || abs != "1" {
                out.push_str(abs);
            }
            for (s, e) in m.powers() {
                out.push_str(&format!("{letter}_{{{},{}}}", s.lo(), s.hi()));
                if e != 1 {
                    out.push_str(&format!("^{{{e}}}"));
                }
            }
            out
        }),
    }
}

fn join_terms(p: &Poly, mut term: impl FnMut(&str, &Monomial) -> String) -> String {
    if p.is_zero() {
        return "0".to_owned();
    }
    let mut out = String::new();
    for (n, (m, c)) in p.terms().enumerate() {
        let negative = c.sign() == num_bigint::Sign::Minus;
        match (n, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let abs = c.magnitude().to_string();
        out.push_str(&term(&abs, m));
    }
    out
}
