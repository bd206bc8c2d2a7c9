//! Text syntax for function specs.
//!
//! ```text
//! spec    := "preset:" NAME
//!          | "affine:" linear ["@" DIM]
//!          | "product(" "h=" profile "," "g=" profile ["," "d=" RAT] ")"
//!          | "takagi-tent(" ["d=" RAT] ["," "k=" INT] ")"
//!          | "cantor(" ["n=" INT] ")"
//!          | "ridge(" "axis=" INT "," "p=" profile ["," "n=" INT] ["," "d=" RAT] ")"
//!          | "hierarchy(" "depth=" INT ["," "upto=" INT] ")"
//!          | "scale(" "c=" RAT "," spec ")"
//!          | "sum(" spec ("," spec)* ")"
//! profile := "const:" RAT | "tent" | "cbrt" | "sqrt" | "invsqrt" | "ratind"
//!          | "takagi" [":" INT] | "cantor" | "pwl:" RAT "@" RAT (";" RAT "@" RAT)*
//! linear  := term (("+" | "-") term)*,  term := [RAT ["*"]] VAR | RAT
//! VAR     := x | y | z | w | x1 | x2 | ...
//! ```

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::Rat;
use crate::hierarchy::{Hierarchy, DEFAULT_SQUARE_CAP};
use crate::zoo::{preset, FunctionSpec, Profile, DEFAULT_TAKAGI_TERMS};

pub fn parse(src: &str) -> Result<FunctionSpec> {
    let mut p = Parser { src, pos: 0 };
    p.skip_ws();
    let spec = p.spec()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(spec)
}

pub fn parse_profile(src: &str) -> Result<Profile> {
    let mut p = Parser { src, pos: 0 };
    p.skip_ws();
    let profile = p.profile()?;
    p.skip_ws();
    if p.pos < src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(profile)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let before = &self.src[..pos.min(self.src.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos {
            return Err(self.error("expected a name"));
        }
        Ok(&self.src[start..self.pos])
    }

    /// A rational literal: `p/q`, integer, decimal or scientific, with optional sign.
    fn rat(&mut self) -> Result<Rat> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        if i < bytes.len() && (bytes[i] == b'-' || bytes[i] == b'+') {
            i += 1;
        }
        while i < bytes.len() {
            let c = bytes[i];
            let sign_in_exponent =
                (c == b'-' || c == b'+') && i > start && matches!(bytes[i - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'/' || c == b'e' || c == b'E' || sign_in_exponent {
                i += 1;
            } else {
                break;
            }
        }
        let text = &self.src[start..i];
        let value = text
            .parse::<Rat>()
            .map_err(|_| self.error_at(start, format!("invalid rational literal {text:?}")))?;
        self.pos = i;
        Ok(value)
    }

    fn uint(&mut self) -> Result<usize> {
        let start = self.pos;
        let r = self.rat()?;
        if !r.is_integer() || r.is_negative() {
            return Err(self.error_at(start, "expected a non-negative integer"));
        }
        r.to_string()
            .parse()
            .map_err(|_| self.error_at(start, "integer out of range"))
    }

    fn spec(&mut self) -> Result<FunctionSpec> {
        self.skip_ws();
        let start = self.pos;
        let name = self.ident()?;
        if self.eat(':') {
            return match name {
                "preset" => {
                    let at = self.pos;
                    let which = self.ident()?;
                    preset(which).map_err(|e| self.error_at(at, e.to_string()))
                }
                "affine" => self.affine(),
                _ => Err(self.error_at(start, format!("unknown spec prefix {name:?}"))),
            };
        }
        self.expect('(')?;
        let spec = match name {
            "product" => self.product()?,
            "takagi-tent" => {
                let mut d = Rat::new(1, 2);
                let mut terms = DEFAULT_TAKAGI_TERMS;
                self.keyed_args(|p, key| match key {
                    "d" => {
                        d = p.positive_rat()?;
                        Ok(())
                    }
                    "k" => {
                        let at = p.pos;
                        terms = p.uint()?.try_into().ok().filter(|&k| k > 0).ok_or_else(|| p.error_at(at, "k must be a positive 32-bit integer"))?;
                        Ok(())
                    }
                    _ => Err(p.error(format!("unknown key {key:?}"))),
                })?;
                FunctionSpec::TakagiTent { d, terms }
            }
            "cantor" => {
                let mut n = 2;
                self.keyed_args(|p, key| match key {
                    "n" => {
                        n = p.uint()?;
                        Ok(())
                    }
                    _ => Err(p.error(format!("unknown key {key:?}"))),
                })?;
                if n < 2 {
                    return Err(self.error_at(start, "cantor needs n >= 2"));
                }
                FunctionSpec::CantorDirectional { n }
            }
            "ridge" => self.ridge(start)?,
            "hierarchy" => {
                let mut depth = None;
                let mut upto = None;
                self.keyed_args(|p, key| match key {
                    "depth" => {
                        depth = Some(p.uint()?);
                        Ok(())
                    }
                    "upto" => {
                        upto = Some(p.uint()?);
                        Ok(())
                    }
                    _ => Err(p.error(format!("unknown key {key:?}"))),
                })?;
                let depth = depth.ok_or_else(|| self.error_at(start, "hierarchy needs depth"))?;
                let h = Hierarchy::build_unit(depth, DEFAULT_SQUARE_CAP)
                    .map_err(|e| self.error_at(start, e.to_string()))?;
                let upto = upto.unwrap_or(depth);
                if upto == 0 || upto > depth {
                    return Err(self.error_at(start, format!("upto must be in 1..={depth}")));
                }
                FunctionSpec::Hierarchy {
                    hierarchy: Arc::new(h),
                    upto,
                }
            }
            "scale" => {
                let key = self.ident()?;
                if key != "c" {
                    return Err(self.error("scale expects c= first"));
                }
                self.expect('=')?;
                let c = self.rat()?;
                self.expect(',')?;
                let inner = self.spec()?;
                self.expect(')')?;
                return Ok(inner.scale(c));
            }
            "sum" => {
                let mut members = vec![self.spec()?];
                while self.eat(',') {
                    members.push(self.spec()?);
                }
                self.expect(')')?;
                return FunctionSpec::sum(members).map_err(|e| self.error_at(start, e.to_string()));
            }
            _ => return Err(self.error_at(start, format!("unknown function {name:?}"))),
        };
        Ok(spec)
    }

    /// `key=value` pairs up to and including the closing parenthesis.
    fn keyed_args(&mut self, mut f: impl FnMut(&mut Self, &str) -> Result<()>) -> Result<()> {
        if self.eat(')') {
            return Ok(());
        }
        loop {
            let key = self.ident()?;
            self.expect('=')?;
            f(self, key)?;
            if self.eat(')') {
                return Ok(());
            }
            self.expect(',')?;
        }
    }

    fn positive_rat(&mut self) -> Result<Rat> {
        let start = self.pos;
        let r = self.rat()?;
        if !r.is_positive() {
            return Err(self.error_at(start, "expected a positive value"));
        }
        Ok(r)
    }

    fn product(&mut self) -> Result<FunctionSpec> {
        let start = self.pos;
        let (mut h, mut g, mut d) = (None, None, Rat::new(1, 2));
        self.keyed_args(|p, key| match key {
            "h" => {
                h = Some(p.profile()?);
                Ok(())
            }
            "g" => {
                g = Some(p.profile()?);
                Ok(())
            }
            "d" => {
                d = p.positive_rat()?;
                Ok(())
            }
            _ => Err(p.error(format!("unknown key {key:?}"))),
        })?;
        match (h, g) {
            (Some(h), Some(g)) => Ok(FunctionSpec::Product { h, g, d }),
            _ => Err(self.error_at(start, "product needs both h= and g=")),
        }
    }

    fn ridge(&mut self, start: usize) -> Result<FunctionSpec> {
        let (mut axis, mut profile, mut dim, mut d) = (None, None, 2, None);
        self.keyed_args(|p, key| match key {
            "axis" => {
                axis = Some(p.uint()?);
                Ok(())
            }
            "p" => {
                profile = Some(p.profile()?);
                Ok(())
            }
            "n" => {
                dim = p.uint()?;
                Ok(())
            }
            "d" => {
                d = Some(p.positive_rat()?);
                Ok(())
            }
            _ => Err(p.error(format!("unknown key {key:?}"))),
        })?;
        let (Some(axis), Some(profile)) = (axis, profile) else {
            return Err(self.error_at(start, "ridge needs axis= and p="));
        };
        if axis >= dim {
            return Err(self.error_at(start, format!("axis {axis} out of range for n = {dim}")));
        }
        Ok(FunctionSpec::Ridge {
            dim,
            axis,
            profile,
            d,
        })
    }

    fn profile(&mut self) -> Result<Profile> {
        let start = self.pos;
        let name = self.ident()?;
        let profile = match name {
            "const" => {
                self.expect(':')?;
                Profile::Constant(self.rat()?)
            }
            "tent" => Profile::Tent,
            "cbrt" => Profile::CubeRoot,
            "sqrt" => Profile::SqrtAbs,
            "invsqrt" => Profile::InvSqrtAbs,
            "ratind" => Profile::RationalIndicator,
            "cantor" => Profile::Cantor,
            "takagi" => {
                let k = if self.eat(':') {
                    let at = self.pos;
                    let k = self.uint()?;
                    if k == 0 || k > u32::MAX as usize {
                        return Err(self.error_at(at, "takagi terms must be positive"));
                    }
                    k as u32
                } else {
                    DEFAULT_TAKAGI_TERMS
                };
                Profile::Takagi(k)
            }
            "pwl" => {
                self.expect(':')?;
                let mut nodes = Vec::new();
                loop {
                    let x = self.rat()?;
                    self.expect('@')?;
                    let y = self.rat()?;
                    nodes.push((x, y));
                    if !self.eat(';') {
                        break;
                    }
                }
                Profile::piecewise_linear(nodes).map_err(|e| self.error_at(start, e.to_string()))?
            }
            _ => return Err(self.error_at(start, format!("unknown profile {name:?}"))),
        };
        Ok(profile)
    }

    fn variable(&mut self) -> Result<Option<usize>> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let index = match c {
            'x' | 'y' | 'z' | 'w' => {
                self.pos += 1;
                let digits_start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                if self.pos > digits_start {
                    if c != 'x' {
                        return Err(self.error_at(start, "only x takes an index"));
                    }
                    let i: usize = self.src[digits_start..self.pos]
                        .parse()
                        .map_err(|_| self.error_at(start, "bad variable index"))?;
                    if i == 0 {
                        return Err(self.error_at(start, "variables are numbered from x1"));
                    }
                    i - 1
                } else {
                    "xyzw".find(c).unwrap()
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(index))
    }

    fn affine(&mut self) -> Result<FunctionSpec> {
        let mut coeffs: Vec<Rat> = Vec::new();
        let mut offset = Rat::zero();
        let mut first = true;
        loop {
            self.skip_ws();
            let sign = if self.eat('-') {
                Rat::from_int(-1)
            } else if self.eat('+') || first {
                Rat::one()
            } else {
                break;
            };
            first = false;
            let coeff = match self.variable()? {
                Some(v) => {
                    add_coeff(&mut coeffs, v, sign);
                    continue;
                }
                None => &sign * self.rat()?,
            };
            self.eat('*');
            match self.variable()? {
                Some(v) => add_coeff(&mut coeffs, v, coeff),
                None => offset += coeff,
            }
        }
        let mut n = coeffs.len().max(2);
        if self.eat('@') {
            let at = self.pos;
            let explicit = self.uint()?;
            if explicit < coeffs.len() || explicit == 0 {
                return Err(self.error_at(at, "dimension smaller than the variables used"));
            }
            n = explicit;
        }
        coeffs.resize(n, Rat::zero());
        Ok(FunctionSpec::affine(coeffs, offset))
    }
}

fn add_coeff(coeffs: &mut Vec<Rat>, v: usize, c: Rat) {
    if coeffs.len() <= v {
        coeffs.resize(v + 1, Rat::zero());
    }
    coeffs[v] += c;
}
