//! Text format for polynomial systems and points.
//!
//! ```text
//! vars: X1 X2
//! f1: X1^2 - 1/4*X1 - 1/2*X2
//! f2: 1/2*X1*X2
//! ```
//!
//! Statements are separated by newlines or `;`, and `#` starts a comment.
//! Expressions support `+ - * / ^`, parentheses, integer, rational and
//! decimal literals (`0.25`, `1e-3`), imaginary literals (`2i`, `(1+1i)`),
//! and `sqrt(<rational expression>)`. Numeric constants are folded in exact
//! rational arithmetic and converted to double precision only at the end,
//! so constants like `64/73` are correctly rounded. Division is only
//! allowed by constants.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::monomial::Monomial;
use super::poly::{CPoint, Poly, PolySystem};
use crate::error::{MzError, Result};
use crate::C64;

/// A coefficient that stays an exact complex rational until an irrational
/// operation (`sqrt`) forces a float.
#[derive(Clone, Debug, PartialEq)]
enum Coef {
    Exact(BigRational, BigRational),
    Approx(C64),
}

impl Coef {
    fn zero() -> Coef {
        Coef::Exact(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Coef {
        Coef::Exact(BigRational::one(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        match self {
            Coef::Exact(a, b) => a.is_zero() && b.is_zero(),
            Coef::Approx(c) => *c == C64::new(0.0, 0.0),
        }
    }
    fn to_c64(&self) -> C64 {
        match self {
            Coef::Exact(a, b) => C64::new(rat_to_f64(a), rat_to_f64(b)),
            Coef::Approx(c) => *c,
        }
    }
    fn add(&self, o: &Coef) -> Coef {
        match (self, o) {
            (Coef::Exact(a, b), Coef::Exact(c, d)) => Coef::Exact(a + c, b + d),
            _ => Coef::Approx(self.to_c64() + o.to_c64()),
        }
    }
    fn neg(&self) -> Coef {
        match self {
            Coef::Exact(a, b) => Coef::Exact(-a, -b),
            Coef::Approx(c) => Coef::Approx(-c),
        }
    }
    fn mul(&self, o: &Coef) -> Coef {
        match (self, o) {
            (Coef::Exact(a, b), Coef::Exact(c, d)) => Coef::Exact(a * c - b * d, a * d + b * c),
            _ => Coef::Approx(self.to_c64() * o.to_c64()),
        }
    }
    fn inv(&self) -> Option<Coef> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Coef::Exact(a, b) => {
                let den = a * a + b * b;
                Coef::Exact(a / &den, -(b / &den))
            }
            Coef::Approx(c) => Coef::Approx(C64::new(1.0, 0.0) / c),
        })
    }
}

/// Correctly rounded conversion of a big rational to `f64`.
fn rat_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    // Scale so that the integer quotient carries 64+ significant bits, then
    // let the (exactly representable) big-integer conversion round once.
    let neg = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    let shift = 80i64 - (num.bits() as i64 - den.bits() as i64);
    let (n2, d2) = if shift >= 0 {
        (num << (shift as usize), den)
    } else {
        (num, den << ((-shift) as usize))
    };
    let q = &n2 / &d2;
    let rem_nonzero = !(&n2 % &d2).is_zero();
    // Sticky bit: fold a nonzero remainder into the lowest bit, then round
    // half-to-even to 53 bits by hand.
    let q = if rem_nonzero { (q << 1usize) | BigInt::one() } else { q << 1usize };
    let extra = q.bits() as usize - 53;
    let mut mant = (&q >> extra).to_u64().unwrap_or(u64::MAX);
    let rest = &q - (BigInt::from(mant) << extra);
    let half = BigInt::one() << (extra - 1);
    if rest > half || (rest == half && mant & 1 == 1) {
        mant += 1;
    }
    let v = (mant as f64) * 2f64.powi(extra as i32 - shift as i32 - 1);
    if neg {
        -v
    } else {
        v
    }
}

type EPoly = BTreeMap<Monomial, Coef>;

fn ep_add(a: &EPoly, b: &EPoly) -> EPoly {
    let mut out = a.clone();
    for (m, c) in b {
        let e = out.entry(m.clone()).or_insert_with(Coef::zero);
        *e = e.add(c);
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn ep_neg(a: &EPoly) -> EPoly {
    a.iter().map(|(m, c)| (m.clone(), c.neg())).collect()
}

fn ep_mul(a: &EPoly, b: &EPoly) -> EPoly {
    let mut out = EPoly::new();
    for (m1, c1) in a {
        for (m2, c2) in b {
            let e = out.entry(m1.mul(m2)).or_insert_with(Coef::zero);
            *e = e.add(&c1.mul(c2));
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn ep_const(n: usize, c: Coef) -> EPoly {
    let mut out = EPoly::new();
    if !c.is_zero() {
        out.insert(Monomial::one(n), c);
    }
    out
}

/// Returns the constant value of a polynomial with no variable terms.
fn ep_as_const(a: &EPoly, n: usize) -> Option<Coef> {
    if a.keys().all(|m| m.degree() == 0) {
        Some(a.get(&Monomial::one(n)).cloned().unwrap_or_else(Coef::zero))
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Imag(BigRational),
    Ident(String),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> MzError {
    MzError::Syntax { line, column: col, message: msg.into() }
}

fn parse_decimal(text: &str, line: usize, col: usize) -> Result<BigRational> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(p) => (&text[..p], text[p + 1..].parse::<i64>().map_err(|_| syntax(line, col, "bad exponent"))?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(p) => (&mant[..p], &mant[p + 1..]),
        None => (mant, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() {
        return Err(syntax(line, col, "malformed number"));
    }
    let n: BigInt = digits.parse().map_err(|_| syntax(line, col, "malformed number"))?;
    let scale = exp - frac_part.len() as i64;
    if scale.abs() > 4000 {
        return Err(syntax(line, col, "exponent out of range"));
    }
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && i + 1 < chars.len() && chars[i + 1].is_ascii_digit()) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let val = parse_decimal(&text, line, col)?;
            let imag = i < chars.len()
                && chars[i] == 'i'
                && !(i + 1 < chars.len() && (chars[i + 1].is_alphanumeric() || chars[i + 1] == '_'));
            if imag {
                i += 1;
                out.push(Token { tok: Tok::Imag(val), line, col });
            } else {
                out.push(Token { tok: Tok::Num(val), line, col });
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line, col });
            i += 1;
            continue;
        }
        return Err(syntax(line, col, format!("unexpected character '{c}'")));
    }
    Ok(out)
}

struct ExprParser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: &'a [String],
    line: usize,
    end_col: usize,
}

impl ExprParser<'_> {
    fn n(&self) -> usize {
        self.vars.len()
    }
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }
    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.col)).unwrap_or((self.line, self.end_col))
    }
    fn err(&self, msg: impl Into<String>) -> MzError {
        let (l, c) = self.here();
        syntax(l, c, msg)
    }
    fn expect_sym(&mut self, s: char) -> Result<()> {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{s}'")))
        }
    }

    fn expr(&mut self) -> Result<EPoly> {
        let mut acc = self.term()?;
        while let Some(Tok::Sym(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { ep_add(&acc, &rhs) } else { ep_add(&acc, &ep_neg(&rhs)) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<EPoly> {
        let mut acc = self.unary()?;
        while let Some(Tok::Sym(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let (l, col) = self.here();
            let rhs = self.unary()?;
            if c == '*' {
                acc = ep_mul(&acc, &rhs);
            } else {
                let k = ep_as_const(&rhs, self.n()).ok_or_else(|| syntax(l, col, "division by a non-constant"))?;
                let inv = k.inv().ok_or_else(|| syntax(l, col, "division by zero"))?;
                acc = ep_mul(&acc, &ep_const(self.n(), inv));
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<EPoly> {
        match self.peek() {
            Some(Tok::Sym('-')) => {
                self.pos += 1;
                Ok(ep_neg(&self.unary()?))
            }
            Some(Tok::Sym('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<EPoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Sym('^')) {
            self.pos += 1;
            let (l, c) = self.here();
            let e = match self.peek().cloned() {
                Some(Tok::Num(r)) if r.is_integer() && !r.is_negative() => {
                    self.pos += 1;
                    r.to_integer().to_u32().ok_or_else(|| syntax(l, c, "exponent too large"))?
                }
                _ => return Err(syntax(l, c, "exponent must be a non-negative integer literal")),
            };
            if e > 64 {
                return Err(syntax(l, c, "exponent too large"));
            }
            let mut acc = ep_const(self.n(), Coef::one());
            for _ in 0..e {
                acc = ep_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<EPoly> {
        let n = self.n();
        let tok = self.toks.get(self.pos).cloned().ok_or_else(|| self.err("unexpected end of expression"))?;
        self.pos += 1;
        match tok.tok {
            Tok::Num(r) => Ok(ep_const(n, Coef::Exact(r, BigRational::zero()))),
            Tok::Imag(r) => Ok(ep_const(n, Coef::Exact(BigRational::zero(), r))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(j) = self.vars.iter().position(|v| *v == name) {
                    let mut m = EPoly::new();
                    m.insert(Monomial::var(n, j), Coef::one());
                    return Ok(m);
                }
                if name == "sqrt" {
                    self.expect_sym('(')?;
                    let (l, c) = self.here();
                    let inner = self.expr()?;
                    self.expect_sym(')')?;
                    let k = ep_as_const(&inner, n).ok_or_else(|| syntax(l, c, "sqrt of a non-constant"))?;
                    return match k {
                        Coef::Exact(re, im) if im.is_zero() && !re.is_negative() => {
                            Ok(ep_const(n, Coef::Approx(C64::new(exact_sqrt(&re), 0.0))))
                        }
                        _ => Err(syntax(l, c, "sqrt argument must be a non-negative rational")),
                    };
                }
                if name == "i" {
                    return Ok(ep_const(n, Coef::Exact(BigRational::zero(), BigRational::one())));
                }
                Err(syntax(tok.line, tok.col, format!("unknown identifier '{name}'")))
            }
            Tok::Sym(c) => Err(syntax(tok.line, tok.col, format!("unexpected '{c}'"))),
        }
    }
}

/// Square root of a non-negative rational, correctly rounded when the
/// numerator and denominator are perfect squares and otherwise computed from
/// a high-precision integer square root.
fn exact_sqrt(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    // sqrt(p/q) = sqrt(p·q·4^s)/ (q·2^s) with enough scaling for ~100 bits.
    let p = r.numer();
    let q = r.denom();
    let s = 120usize;
    let scaled = (p * q) << (2 * s);
    let root = scaled.sqrt();
    let den = q << s;
    rat_to_f64(&BigRational::new(root, den))
}

fn finish_poly(e: &EPoly, n: usize) -> Poly {
    Poly::from_terms(n, e.iter().map(|(m, c)| (m.clone(), c.to_c64())))
}

/// Parses a system in the text format described in the module docs.
pub fn parse_system(text: &str) -> Result<PolySystem> {
    let mut vars: Option<(Vec<String>, usize)> = None;
    let mut polys: Vec<(String, Vec<Token>, usize, usize)> = Vec::new();
    for (lno, raw_line) in text.lines().enumerate() {
        let line = lno + 1;
        let content = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        };
        let mut offset = 0;
        for stmt in content.split(';') {
            let col0 = offset + 1;
            offset += stmt.chars().count() + 1;
            if stmt.trim().is_empty() {
                continue;
            }
            let colon = stmt.find(':').ok_or_else(|| {
                let lead = stmt.chars().take_while(|c| c.is_whitespace()).count();
                syntax(line, col0 + lead, "expected '<label>: <expression>' or 'vars: <names>'")
            })?;
            let label = stmt[..colon].trim().to_string();
            let rest = &stmt[colon + 1..];
            let rest_col = col0 + stmt[..colon + 1].chars().count();
            if label.is_empty() {
                return Err(syntax(line, col0, "empty statement label"));
            }
            if label == "vars" {
                if vars.is_some() {
                    return Err(syntax(line, col0, "duplicate 'vars' declaration"));
                }
                let names: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                if names.is_empty() {
                    return Err(syntax(line, rest_col, "no variables declared"));
                }
                for (k, nm) in names.iter().enumerate() {
                    let ok = nm.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                        && nm.chars().all(|c| c.is_alphanumeric() || c == '_');
                    if !ok || nm == "sqrt" || nm == "i" {
                        return Err(syntax(line, rest_col, format!("invalid variable name '{nm}'")));
                    }
                    if names[..k].contains(nm) {
                        return Err(syntax(line, rest_col, format!("duplicate variable '{nm}'")));
                    }
                }
                vars = Some((names, line));
            } else {
                let toks = tokenize(rest, line, rest_col)?;
                let end_col = rest_col + rest.chars().count();
                polys.push((label, toks, line, end_col));
            }
        }
    }
    let (names, _) = vars.ok_or_else(|| syntax(1, 1, "missing 'vars:' declaration"))?;
    let n = names.len();
    let mut out = Vec::with_capacity(polys.len());
    for (_, toks, line, end_col) in polys {
        if toks.is_empty() {
            return Err(syntax(line, end_col, "empty expression"));
        }
        let mut p = ExprParser { toks, pos: 0, vars: &names, line, end_col };
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("unexpected trailing input"));
        }
        out.push(finish_poly(&e, n));
    }
    PolySystem::with_names(out, names)
}

/// Parses one complex number `re`, `re+imi`, `re-imi` or `imi`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || MzError::InvalidArgument(format!("malformed complex number '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    let parse_real = |t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|_| bad())?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad())
        }
    };
    if let Some(body) = s.strip_suffix('i') {
        // Find the split between real and imaginary parts: the last '+'/'-'
        // that is not at position 0 and not part of an exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let ch = bytes[k] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let imag_text = |t: &str| -> Result<f64> {
            match t {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => parse_real(t),
            }
        };
        match split {
            Some(k) => Ok(C64::new(parse_real(&body[..k])?, imag_text(&body[k..])?)),
            None => Ok(C64::new(0.0, imag_text(body)?)),
        }
    } else {
        Ok(C64::new(parse_real(&s)?, 0.0))
    }
}

/// Parses a comma-separated list of complex numbers into a point.
pub fn parse_point(text: &str) -> Result<CPoint> {
    let coords = text
        .split(',')
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    CPoint::new(coords)
}

/// Parses one complex number per non-empty line (`#` comments allowed).
pub fn parse_point_lines(text: &str) -> Result<CPoint> {
    let coords = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_complex)
        .collect::<Result<Vec<_>>>()?;
    CPoint::new(coords)
}
