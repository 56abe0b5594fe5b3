//! Small parsers for the `apply` subcommand's form and operator specs.
//!
//!   form     := "eisenstein" [phi1=N] [phi2=N] [mode=MODE]
//!             | "constant" [phi=N] [eps=N]
//!             | "random" [eps=N] [seed=N]
//!   operator := "T" q=IDEAL [k=N] | "diamond" q=IDEAL | "VP" P=IDEAL
//!             | "VPrec" P=IDEAL | "hasse"
//!   ops      := operator (";" operator)*
//!   IDEAL    := "[" a "," b "," c "]" | "(" n ")"
//!
//! Errors carry the byte offset into the input.

use hilbert_doubling::{ConstantMode, Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealSpec {
    Hnf(i64, i64, i64),
    Rational(i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormSpec {
    Eisenstein { phi1: Option<usize>, phi2: Option<usize>, mode: Option<ConstantMode> },
    Constant { phi: usize, eps: usize },
    Random { eps: usize, seed: Option<u64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OpSpec {
    T { q: IdealSpec, k: Option<u32> },
    Diamond { q: IdealSpec },
    VpDirect { big_p: IdealSpec },
    VpRecursive { big_p: IdealSpec },
    Hasse,
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor { s, pos: 0 }
    }

    fn err<T>(&self, at: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: at, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.s[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.s[self.pos..].chars().next().map_or(1, char::len_utf8);
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.s.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.s[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let at = self.pos;
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(self.pos, format!("expected '{c}', found '{found}'")),
                None => self.err(at.max(self.pos), format!("expected '{c}', found end of input")),
            }
        }
    }

    fn word(&mut self) -> Result<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let len = self.s[start..].find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(self.s.len() - start);
        if len == 0 {
            return match self.peek() {
                Some(c) => self.err(start, format!("expected a name, found '{c}'")),
                None => self.err(start, "expected a name, found end of input"),
            };
        }
        self.pos += len;
        Ok((start, &self.s[start..start + len]))
    }

    fn int(&mut self) -> Result<i64> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        if self.s[end..].starts_with('-') {
            end += 1;
        }
        end += self.s[end..].find(|c: char| !c.is_ascii_digit()).unwrap_or(self.s.len() - end);
        match self.s[start..end].parse::<i64>() {
            Ok(v) => {
                self.pos = end;
                Ok(v)
            }
            Err(_) => self.err(start, "expected an integer"),
        }
    }

    fn nonneg(&mut self) -> Result<u64> {
        let at = self.pos;
        let v = self.int()?;
        if v < 0 {
            return self.err(at, "expected a non-negative integer");
        }
        Ok(v as u64)
    }

    fn ideal(&mut self) -> Result<IdealSpec> {
        if self.eat('[') {
            let a = self.int()?;
            self.expect(',')?;
            let b = self.int()?;
            self.expect(',')?;
            let c = self.int()?;
            self.expect(']')?;
            Ok(IdealSpec::Hnf(a, b, c))
        } else if self.eat('(') {
            let n = self.int()?;
            self.expect(')')?;
            Ok(IdealSpec::Rational(n))
        } else {
            let at = self.pos;
            self.err(at, "expected an ideal: [a, b, c] or (n)")
        }
    }

    /// The next `key=` of a key=value list, or None at the end of input.
    fn key(&mut self, allowed: &[&str]) -> Result<Option<(usize, &'a str)>> {
        if self.at_end() {
            return Ok(None);
        }
        let (at, key) = self.word()?;
        if !allowed.contains(&key) {
            return self.err(at, format!("unknown key '{key}' (expected one of {})", allowed.join(", ")));
        }
        self.expect('=')?;
        Ok(Some((at, key)))
    }
}

pub fn parse_form(s: &str) -> Result<FormSpec> {
    let mut c = Cursor::new(s);
    let (at, kind) = c.word()?;
    let mut seen: Vec<&str> = Vec::new();
    let (mut phi1, mut phi2, mut mode) = (None, None, None);
    let (mut phi, mut eps, mut seed) = (0usize, 0usize, None);
    let allowed: &[&str] = match kind {
        "eisenstein" => &["phi1", "phi2", "mode"],
        "constant" => &["phi", "eps"],
        "random" => &["eps", "seed"],
        _ => return c.err(at, format!("unknown form '{kind}' (expected eisenstein, constant or random)")),
    };
    while let Some((kat, key)) = c.key(allowed)? {
        if seen.contains(&key) {
            return c.err(kat, format!("duplicate key '{key}'"));
        }
        seen.push(key);
        match key {
            "phi1" => phi1 = Some(c.nonneg()? as usize),
            "phi2" => phi2 = Some(c.nonneg()? as usize),
            "phi" => phi = c.nonneg()? as usize,
            "eps" => eps = c.nonneg()? as usize,
            "seed" => seed = Some(c.nonneg()?),
            "mode" => {
                let (vat, v) = c.word()?;
                mode = Some(v.parse::<ConstantMode>().or_else(|e| c.err(vat, e.to_string()))?);
            }
            _ => unreachable!(),
        }
    }
    if !c.at_end() {
        return c.err(c.pos, "unexpected trailing input");
    }
    Ok(match kind {
        "eisenstein" => FormSpec::Eisenstein { phi1, phi2, mode },
        "constant" => FormSpec::Constant { phi, eps },
        _ => FormSpec::Random { eps, seed },
    })
}

fn parse_one_op(c: &mut Cursor) -> Result<OpSpec> {
    let (at, kind) = c.word()?;
    let key_value = |c: &mut Cursor, key: &str| -> Result<IdealSpec> {
        let (kat, k) = c.word()?;
        if k != key {
            return c.err(kat, format!("expected '{key}=', found '{k}'"));
        }
        c.expect('=')?;
        c.ideal()
    };
    let op = match kind {
        "T" => {
            let q = key_value(c, "q")?;
            let k = if !c.at_end() && c.peek() != Some(';') {
                let (kat, key) = c.word()?;
                if key != "k" {
                    return c.err(kat, format!("unknown key '{key}' (expected k)"));
                }
                c.expect('=')?;
                let vat = c.pos;
                let k = c.nonneg()?;
                if k == 0 || k > u32::MAX as u64 {
                    return c.err(vat, "weight must be a positive 32-bit integer");
                }
                Some(k as u32)
            } else {
                None
            };
            OpSpec::T { q, k }
        }
        "diamond" => OpSpec::Diamond { q: key_value(c, "q")? },
        "VP" => OpSpec::VpDirect { big_p: key_value(c, "P")? },
        "VPrec" => OpSpec::VpRecursive { big_p: key_value(c, "P")? },
        "hasse" => OpSpec::Hasse,
        _ => return c.err(at, format!("unknown operator '{kind}' (expected T, diamond, VP, VPrec or hasse)")),
    };
    Ok(op)
}

pub fn parse_ops(s: &str) -> Result<Vec<OpSpec>> {
    let mut c = Cursor::new(s);
    let mut ops = vec![parse_one_op(&mut c)?];
    while c.eat(';') {
        ops.push(parse_one_op(&mut c)?);
    }
    if !c.at_end() {
        return c.err(c.pos, "unexpected trailing input (separate operators with ';')");
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(e: Error) -> usize {
        match e {
            Error::Parse { pos, .. } => pos,
            other => panic!("not a parse error: {other}"),
        }
    }

    #[test]
    fn forms() {
        assert_eq!(
            parse_form("eisenstein phi1=0 phi2=1 mode=v_phi2").unwrap(),
            FormSpec::Eisenstein { phi1: Some(0), phi2: Some(1), mode: Some(ConstantMode::VPhi2) }
        );
        assert_eq!(
            parse_form("eisenstein").unwrap(),
            FormSpec::Eisenstein { phi1: None, phi2: None, mode: None }
        );
        assert_eq!(parse_form(" constant eps=1 ").unwrap(), FormSpec::Constant { phi: 0, eps: 1 });
        assert_eq!(parse_form("random seed=5").unwrap(), FormSpec::Random { eps: 0, seed: Some(5) });
    }

    #[test]
    fn form_errors_have_positions() {
        assert_eq!(pos(parse_form("eisenstien").unwrap_err()), 0);
        assert_eq!(pos(parse_form("eisenstein phi3=1").unwrap_err()), 11);
        assert_eq!(pos(parse_form("eisenstein phi1=x").unwrap_err()), 16);
        assert_eq!(pos(parse_form("eisenstein mode=v_phi3").unwrap_err()), 16);
        assert_eq!(pos(parse_form("constant phi=1 phi=2").unwrap_err()), 15);
        assert_eq!(pos(parse_form("constant phi 1").unwrap_err()), 13);
    }

    #[test]
    fn operators() {
        assert_eq!(
            parse_ops("T q=[11,6,1]").unwrap(),
            vec![OpSpec::T { q: IdealSpec::Hnf(11, 6, 1), k: None }]
        );
        assert_eq!(
            parse_ops("VP P=(7); hasse ;T q=[ 2 , 1 , 1 ] k=7").unwrap(),
            vec![
                OpSpec::VpDirect { big_p: IdealSpec::Rational(7) },
                OpSpec::Hasse,
                OpSpec::T { q: IdealSpec::Hnf(2, 1, 1), k: Some(7) },
            ]
        );
        assert_eq!(
            parse_ops("diamond q=(1);VPrec P=[11,5,1]").unwrap(),
            vec![
                OpSpec::Diamond { q: IdealSpec::Rational(1) },
                OpSpec::VpRecursive { big_p: IdealSpec::Hnf(11, 5, 1) },
            ]
        );
    }

    #[test]
    fn operator_errors_have_positions() {
        assert_eq!(pos(parse_ops("U q=[1,0,1]").unwrap_err()), 0);
        assert_eq!(pos(parse_ops("T p=[1,0,1]").unwrap_err()), 2);
        assert_eq!(pos(parse_ops("T q=[11,6 1]").unwrap_err()), 10);
        assert_eq!(pos(parse_ops("T q=[11,6,1").unwrap_err()), 11);
        assert_eq!(pos(parse_ops("hasse hasse").unwrap_err()), 6);
        assert_eq!(pos(parse_ops("T q=(7) k=0").unwrap_err()), 10);
    }
}
