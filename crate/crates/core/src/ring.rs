//! Exact coefficient arithmetic over F2 in the variables U, u/v pairs and Q,
//! with Q^2 = 0 and (under collapse) U = u*v.
//!
//! Everything is characteristic 2: a coefficient is a finite set of monomials
//! and addition is symmetric difference.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Which polynomial ring coefficients live in.
///
/// * `U`  — F2[U]
/// * `UQ` — F2[U,Q]/Q^2
/// * `Uv(l)` — F2[u_1,v_1,...,u_l,v_l]; `Uv(1)` is the knot ring F2[u,v]
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    U,
    UQ,
    Uv(u8),
}

impl Mode {
    /// Number of (u, v) exponent pairs a monomial carries in this mode.
    pub fn pairs(self) -> usize {
        match self {
            Mode::U | Mode::UQ => 1,
            Mode::Uv(l) => l as usize,
        }
    }

    pub fn allows_q(self) -> bool {
        matches!(self, Mode::UQ)
    }

    pub fn allows_v(self) -> bool {
        matches!(self, Mode::Uv(_))
    }

    pub fn is_single_variable(self) -> bool {
        !self.allows_v()
    }

    pub fn as_str(self) -> String {
        match self {
            Mode::U => "U".into(),
            Mode::UQ => "UQ".into(),
            Mode::Uv(1) => "UV".into(),
            Mode::Uv(l) => format!("UV{l}"),
        }
    }

    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "U" => Ok(Mode::U),
            "UQ" => Ok(Mode::UQ),
            "UV" => Ok(Mode::Uv(1)),
            _ => {
                if let Some(rest) = s.strip_prefix("UV") {
                    let l: u8 = rest
                        .parse()
                        .map_err(|_| Error::Parse(format!("unknown mode `{s}`")))?;
                    if l == 0 {
                        return Err(Error::Parse("mode UV0 has no variable pairs".into()));
                    }
                    Ok(Mode::Uv(l))
                } else {
                    Err(Error::Parse(format!("unknown mode `{s}`")))
                }
            }
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

/// A monomial U^a, u^a*v^b (per pair) times optionally Q.
///
/// In single-variable modes the v-exponent of the unique pair is always 0.
/// `q` is only ever set in mode `UQ`; a product with q on both factors is
/// the zero coefficient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub uv: Vec<(u32, u32)>,
    pub q: bool,
}

impl Monomial {
    pub fn one(mode: Mode) -> Self {
        Monomial {
            uv: vec![(0, 0); mode.pairs()],
            q: false,
        }
    }

    pub fn u_pow(mode: Mode, a: u32) -> Self {
        let mut m = Monomial::one(mode);
        m.uv[0].0 = a;
        m
    }

    /// u^a v^b in the i-th pair.
    pub fn uv_pow(mode: Mode, pair: usize, a: u32, b: u32) -> Self {
        let mut m = Monomial::one(mode);
        m.uv[pair] = (a, b);
        m
    }

    pub fn q(mode: Mode) -> Self {
        debug_assert!(mode.allows_q());
        let mut m = Monomial::one(mode);
        m.q = true;
        m
    }

    pub fn is_one(&self) -> bool {
        !self.q && self.uv.iter().all(|&(a, b)| a == 0 && b == 0)
    }

    /// Product; `None` encodes annihilation by Q^2 = 0.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        debug_assert_eq!(self.uv.len(), other.uv.len());
        if self.q && other.q {
            return None;
        }
        let uv = self
            .uv
            .iter()
            .zip(&other.uv)
            .map(|(&(a, b), &(c, d))| (a + c, b + d))
            .collect();
        Some(Monomial {
            uv,
            q: self.q || other.q,
        })
    }

    /// Exchange u_i and v_i in every pair.
    pub fn conj(&self) -> Monomial {
        Monomial {
            uv: self.uv.iter().map(|&(a, b)| (b, a)).collect(),
            q: self.q,
        }
    }

    /// Formal derivative with respect to u_pair (mod 2): u^a -> a*u^(a-1).
    pub fn du(&self, pair: usize) -> Option<Monomial> {
        let (a, _) = self.uv[pair];
        if a % 2 == 1 {
            let mut m = self.clone();
            m.uv[pair].0 = a - 1;
            Some(m)
        } else {
            None
        }
    }

    /// Formal derivative with respect to v_pair (mod 2).
    pub fn dv(&self, pair: usize) -> Option<Monomial> {
        let (_, b) = self.uv[pair];
        if b % 2 == 1 {
            let mut m = self.clone();
            m.uv[pair].1 = b - 1;
            Some(m)
        } else {
            None
        }
    }

    fn render(&self, mode: Mode) -> String {
        let mut parts: Vec<String> = Vec::new();
        match mode {
            Mode::U | Mode::UQ => {
                let a = self.uv[0].0;
                if a == 1 {
                    parts.push("U".into());
                } else if a > 1 {
                    parts.push(format!("U^{a}"));
                }
            }
            Mode::Uv(l) => {
                for (i, &(a, b)) in self.uv.iter().enumerate() {
                    let (un, vn) = if l == 1 {
                        ("u".to_string(), "v".to_string())
                    } else {
                        (format!("u{}", i + 1), format!("v{}", i + 1))
                    };
                    if a == 1 {
                        parts.push(un);
                    } else if a > 1 {
                        parts.push(format!("{un}^{a}"));
                    }
                    if b == 1 {
                        parts.push(vn);
                    } else if b > 1 {
                        parts.push(format!("{vn}^{b}"));
                    }
                }
            }
        }
        if self.q {
            parts.push("Q".into());
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// An F2-sum of monomials. Set semantics: adding a monomial twice cancels it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coefficient {
    mode: Mode,
    terms: BTreeSet<Monomial>,
}

impl Coefficient {
    pub fn zero(mode: Mode) -> Self {
        Coefficient {
            mode,
            terms: BTreeSet::new(),
        }
    }

    pub fn one(mode: Mode) -> Self {
        Coefficient::from_monomial(mode, Monomial::one(mode))
    }

    pub fn from_monomial(mode: Mode, m: Monomial) -> Self {
        debug_assert_eq!(m.uv.len(), mode.pairs());
        debug_assert!(!m.q || mode.allows_q());
        debug_assert!(mode.allows_v() || m.uv[0].1 == 0);
        let mut terms = BTreeSet::new();
        terms.insert(m);
        Coefficient { mode, terms }
    }

    pub fn u_pow(mode: Mode, a: u32) -> Self {
        Coefficient::from_monomial(mode, Monomial::u_pow(mode, a))
    }

    pub fn q(mode: Mode) -> Self {
        Coefficient::from_monomial(mode, Monomial::q(mode))
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn terms(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.iter().next().unwrap().is_one()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Toggle a single monomial in or out of the sum.
    pub fn toggle(&mut self, m: Monomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add(&self, other: &Coefficient) -> Result<Coefficient> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch(self.mode, other.mode));
        }
        let mut out = self.clone();
        for m in &other.terms {
            out.toggle(m.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Coefficient) -> Result<Coefficient> {
        if self.mode != other.mode {
            return Err(Error::ModeMismatch(self.mode, other.mode));
        }
        let mut out = Coefficient::zero(self.mode);
        for a in &self.terms {
            for b in &other.terms {
                if let Some(m) = a.mul(b) {
                    out.toggle(m);
                }
            }
        }
        Ok(out)
    }

    /// Exchange u_i <-> v_i in every term.
    pub fn conj(&self) -> Coefficient {
        Coefficient {
            mode: self.mode,
            terms: self.terms.iter().map(Monomial::conj).collect(),
        }
    }

    /// Reinterpret a Q-free single-variable coefficient in another
    /// single-variable mode (U <-> UQ lifts and drops).
    pub fn with_mode(&self, mode: Mode) -> Result<Coefficient> {
        if self.mode == mode {
            return Ok(self.clone());
        }
        if self.mode.pairs() != mode.pairs() || self.mode.allows_v() != mode.allows_v() {
            return Err(Error::ModeMismatch(self.mode, mode));
        }
        if !mode.allows_q() && self.terms.iter().any(|m| m.q) {
            return Err(Error::ModeMismatch(self.mode, mode));
        }
        Ok(Coefficient {
            mode,
            terms: self.terms.clone(),
        })
    }

    /// Strict collapse under U = u*v: every monomial must be diagonal
    /// (equal u- and v-exponent in the unique pair).
    pub fn collapse_strict(&self) -> Result<Coefficient> {
        if self.mode != Mode::Uv(1) {
            return Err(Error::ModeMismatch(self.mode, Mode::Uv(1)));
        }
        let mut out = Coefficient::zero(Mode::U);
        for m in &self.terms {
            let (a, b) = m.uv[0];
            if a != b {
                return Err(Error::OffDiagonal(m.render(self.mode)));
            }
            out.toggle(Monomial::u_pow(Mode::U, a));
        }
        Ok(out)
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|m| m.render(self.mode))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    pub fn parse(mode: Mode, s: &str) -> Result<Coefficient> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty coefficient".into()));
        }
        if s == "0" {
            return Ok(Coefficient::zero(mode));
        }
        let mut out = Coefficient::zero(mode);
        for term in s.split('+') {
            let m = parse_monomial(mode, term.trim())?;
            out.toggle(m);
        }
        Ok(out)
    }
}

/// Collapse a single two-variable monomial under U = u*v, keeping the
/// off-diagonal remainder: u^a v^b = U^min(a,b) * residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residual {
    None,
    U(u32),
    V(u32),
}

pub fn collapse_monomial(m: &Monomial) -> (u32, Residual) {
    let (a, b) = m.uv[0];
    let k = a.min(b);
    let res = if a > b {
        Residual::U(a - b)
    } else if b > a {
        Residual::V(b - a)
    } else {
        Residual::None
    };
    (k, res)
}

fn parse_monomial(mode: Mode, s: &str) -> Result<Monomial> {
    if s.is_empty() {
        return Err(Error::Parse("empty monomial".into()));
    }
    let mut m = Monomial::one(mode);
    if s == "1" {
        return Ok(m);
    }
    for factor in s.split('*') {
        let factor = factor.trim();
        let (name, exp) = match factor.find('^') {
            Some(i) => {
                let e: u32 = factor[i + 1..]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?;
                (&factor[..i], e)
            }
            None => (factor, 1),
        };
        match name {
            "U" => {
                if mode.allows_v() {
                    return Err(Error::Parse(format!("variable U not in mode {mode}")));
                }
                m.uv[0].0 += exp;
            }
            "Q" => {
                if !mode.allows_q() {
                    return Err(Error::Parse(format!("variable Q not in mode {mode}")));
                }
                if exp != 1 || m.q {
                    return Err(Error::Parse("Q^2 = 0".into()));
                }
                m.q = true;
            }
            _ => {
                let (var, idx) = parse_uv_name(mode, name)?;
                if var == b'u' {
                    m.uv[idx].0 += exp;
                } else {
                    m.uv[idx].1 += exp;
                }
            }
        }
    }
    Ok(m)
}

fn parse_uv_name(mode: Mode, name: &str) -> Result<(u8, usize)> {
    let l = match mode {
        Mode::Uv(l) => l as usize,
        _ => {
            return Err(Error::Parse(format!(
                "variable `{name}` not in mode {mode}"
            )))
        }
    };
    let bytes = name.as_bytes();
    if bytes.is_empty() || (bytes[0] != b'u' && bytes[0] != b'v') {
        return Err(Error::Parse(format!("unknown variable `{name}`")));
    }
    let idx = if bytes.len() == 1 {
        if l != 1 {
            return Err(Error::Parse(format!(
                "variable `{name}` needs a pair index in mode {mode}"
            )));
        }
        0
    } else {
        let i: usize = name[1..]
            .parse()
            .map_err(|_| Error::Parse(format!("unknown variable `{name}`")))?;
        if i == 0 || i > l {
            return Err(Error::Parse(format!("pair index out of range in `{name}`")));
        }
        i - 1
    };
    Ok((bytes[0], idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(mode: Mode, s: &str) -> Coefficient {
        Coefficient::parse(mode, s).unwrap()
    }

    #[test]
    fn add_cancels_in_characteristic_two() {
        let u2 = c(Mode::U, "U^2");
        assert!(u2.add(&u2).unwrap().is_zero());
        let s = c(Mode::U, "U").add(&c(Mode::U, "U^3")).unwrap();
        assert_eq!(s.render(), "U + U^3");
        let a = c(Mode::UQ, "Q + 1").add(&c(Mode::UQ, "Q")).unwrap();
        assert_eq!(a.render(), "1");
    }

    #[test]
    fn mul_respects_q_squared_zero() {
        let q = Coefficient::q(Mode::UQ);
        assert!(q.mul(&q).unwrap().is_zero());
        assert_eq!(
            c(Mode::U, "U^2").mul(&c(Mode::U, "U^3")).unwrap().render(),
            "U^5"
        );
        assert_eq!(
            c(Mode::Uv(1), "u*v").mul(&c(Mode::Uv(1), "u")).unwrap().render(),
            "u^2*v"
        );
    }

    #[test]
    fn mode_mismatch_is_an_error() {
        let a = c(Mode::U, "U");
        let b = c(Mode::Uv(1), "u");
        assert!(matches!(a.add(&b), Err(Error::ModeMismatch(_, _))));
        assert!(matches!(a.mul(&b), Err(Error::ModeMismatch(_, _))));
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(
            c(Mode::Uv(1), "u^2*v^2").collapse_strict().unwrap().render(),
            "U^2"
        );
        assert_eq!(c(Mode::Uv(1), "1").collapse_strict().unwrap().render(), "1");
        assert!(matches!(
            c(Mode::Uv(1), "u*v^3").collapse_strict(),
            Err(Error::OffDiagonal(_))
        ));
        let (k, r) = collapse_monomial(&Monomial::uv_pow(Mode::Uv(1), 0, 1, 3));
        assert_eq!((k, r), (1, Residual::V(2)));
    }

    #[test]
    fn collapse_is_multiplicative_on_diagonal() {
        let a = c(Mode::Uv(1), "u*v");
        let b = c(Mode::Uv(1), "u^2*v^2 + 1");
        let lhs = a.mul(&b).unwrap().collapse_strict().unwrap();
        let rhs = a
            .collapse_strict()
            .unwrap()
            .mul(&b.collapse_strict().unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    fn random_coeff(rng: &mut ChaCha8Rng, mode: Mode) -> Coefficient {
        let mut out = Coefficient::zero(mode);
        for _ in 0..rng.gen_range(0..4) {
            let mut m = Monomial::one(mode);
            for p in 0..mode.pairs() {
                m.uv[p].0 = rng.gen_range(0..4);
                if mode.allows_v() {
                    m.uv[p].1 = rng.gen_range(0..4);
                }
            }
            if mode.allows_q() {
                m.q = rng.gen_bool(0.3);
            }
            out.toggle(m);
        }
        out
    }

    #[test]
    fn ring_laws_on_random_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xF10E);
        for mode in [Mode::U, Mode::UQ, Mode::Uv(1), Mode::Uv(2)] {
            for _ in 0..200 {
                let a = random_coeff(&mut rng, mode);
                let b = random_coeff(&mut rng, mode);
                let d = random_coeff(&mut rng, mode);
                assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
                assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
                assert_eq!(
                    a.add(&b).unwrap().add(&d).unwrap(),
                    a.add(&b.add(&d).unwrap()).unwrap()
                );
                assert_eq!(
                    a.mul(&b).unwrap().mul(&d).unwrap(),
                    a.mul(&b.mul(&d).unwrap()).unwrap()
                );
                assert_eq!(
                    a.mul(&b.add(&d).unwrap()).unwrap(),
                    a.mul(&b).unwrap().add(&a.mul(&d).unwrap()).unwrap()
                );
                assert!(a.mul(&Coefficient::zero(mode)).unwrap().is_zero());
                assert_eq!(a.mul(&Coefficient::one(mode)).unwrap(), a);
            }
        }
    }

    #[test]
    fn render_parse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
        for mode in [Mode::U, Mode::UQ, Mode::Uv(1), Mode::Uv(2)] {
            for _ in 0..200 {
                let a = random_coeff(&mut rng, mode);
                let s = a.render();
                let back = Coefficient::parse(mode, &s).unwrap();
                assert_eq!(a, back, "round trip through `{s}`");
                assert_eq!(back.render(), s);
            }
        }
    }
}
