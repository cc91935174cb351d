//! Family mini-language.
//!
//! ```text
//! spec   = family [ ":" body ]
//! body   = param { "," param }          (all families except `table`)
//!        | path                          (`table` only: the rest of the text)
//! param  = key "=" value
//!        | "inner" "=" family { "," param }   (`paired` only; must come last)
//! key    = [A-Za-z] [A-Za-z0-9_]*
//! value  = number | word
//! number = [+-]? digits [ "." digits? ] [ (e|E) [+-]? digits ]
//!        | [+-]? "." digits [ (e|E) [+-]? digits ]
//! family = word = [a-z] [a-z0-9_-]*
//! ```
//!
//! Numbers without a fractional part or exponent are integers. Words are only
//! meaningful where a family expects a named shape (birth–death rates).
//! Every parameter after `inner=` belongs to the inner family, so
//! `paired:eps=1,inner=pow,alpha=0.5` pairs up `pow:alpha=0.5`.
//!
//! The canonical text is what [`FamilySpec::render`] produces; parsing it
//! yields the same spec back.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::catalog;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Word(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Int(i) => Some(*i as f64),
            ParamValue::Real(r) => Some(*r),
            ParamValue::Word(_) => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            ParamValue::Int(i) => Some(*i),
            ParamValue::Real(r) if r.fract() == 0.0 && r.abs() < 9e15 => Some(*r as i64),
            _ => None,
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            // Debug keeps a fractional part or exponent, so the text re-parses as Real.
            ParamValue::Real(r) => write!(f, "{r:?}"),
            ParamValue::Word(w) => f.write_str(w),
        }
    }
}

/// Parsed family description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: String,
    pub params: Vec<(String, ParamValue)>,
    /// Sub-spec of the `paired` family.
    pub inner: Option<Box<FamilySpec>>,
    /// File path of the `table` family.
    pub path: Option<String>,
}

impl FamilySpec {
    pub fn new(family: impl Into<String>) -> Self {
        FamilySpec {
            family: family.into(),
            params: Vec::new(),
            inner: None,
            path: None,
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: ParamValue) -> Self {
        self.params.push((key.into(), value));
        self
    }

    pub fn get(&self, key: &str) -> Option<&ParamValue> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    /// Canonical text form.
    pub fn render(&self) -> String {
        if let Some(path) = &self.path {
            return format!("{}:{}", self.family, path);
        }
        let tail = self.render_tail();
        if tail.is_empty() {
            self.family.clone()
        } else {
            format!("{}:{}", self.family, tail)
        }
    }

    fn render_tail(&self) -> String {
        let mut parts: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if let Some(inner) = &self.inner {
            let mut nested = inner.family.clone();
            let inner_tail = inner.render_tail();
            if !inner_tail.is_empty() {
                nested.push(',');
                nested.push_str(&inner_tail);
            }
            parts.push(format!("inner={nested}"));
        }
        parts.join(",")
    }

    /// Grammar-only parse; no family or parameter validation.
    pub fn parse_syntax(text: &str) -> Result<FamilySpec> {
        if text.is_empty() {
            return Err(Error::syntax(0, "empty family description"));
        }
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
        };
        let family = p
            .word()
            .ok_or_else(|| Error::syntax(0, "expected family name"))?;
        let mut spec = FamilySpec::new(family);
        if p.at_end() {
            return Ok(spec);
        }
        p.expect(b':')?;
        if spec.family == "table" {
            let path = &text[p.pos..];
            if path.is_empty() {
                return Err(Error::syntax(p.pos, "expected table path"));
            }
            spec.path = Some(path.to_string());
            return Ok(spec);
        }
        p.params_into(&mut spec)?;
        if !p.at_end() {
            return Err(Error::syntax(p.pos, "unexpected trailing input"));
        }
        Ok(spec)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Parses and validates a sequence family description.
///
/// Unknown families, unknown or missing parameters and out-of-domain values
/// are errors.
pub fn parse_family(text: &str) -> Result<FamilySpec> {
    let spec = FamilySpec::parse_syntax(text)?;
    catalog::validate(&spec)?;
    Ok(spec)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::syntax(self.pos, format!("expected `{}`", c as char)))
        }
    }

    fn take_while(&mut self, f: impl Fn(u8) -> bool) -> &str {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).expect("ASCII subset")
    }

    fn word(&mut self) -> Option<String> {
        if !self.peek().is_some_and(|c| c.is_ascii_lowercase()) {
            return None;
        }
        Some(
            self.take_while(|c| {
                c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_' || c == b'-'
            })
            .to_string(),
        )
    }

    fn key(&mut self) -> Result<String> {
        if !self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            return Err(Error::syntax(self.pos, "expected parameter name"));
        }
        Ok(self
            .take_while(|c| c.is_ascii_alphanumeric() || c == b'_')
            .to_string())
    }

    fn params_into(&mut self, spec: &mut FamilySpec) -> Result<()> {
        loop {
            let key = self.key()?;
            self.expect(b'=')?;
            if key == "inner" {
                let start = self.pos;
                let family = self
                    .word()
                    .ok_or_else(|| Error::syntax(start, "expected inner family name"))?;
                let mut inner = FamilySpec::new(family);
                if self.peek() == Some(b',') {
                    self.pos += 1;
                    self.params_into(&mut inner)?;
                }
                spec.inner = Some(Box::new(inner));
                return Ok(());
            }
            let value = self.value()?;
            spec.params.push((key, value));
            match self.peek() {
                Some(b',') => self.pos += 1,
                _ => return Ok(()),
            }
        }
    }

    fn value(&mut self) -> Result<ParamValue> {
        let start = self.pos;
        if let Some(w) = self.word() {
            return Ok(ParamValue::Word(w));
        }
        let mut is_int = true;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.pos += 1;
        }
        let int_digits = self.take_while(|c| c.is_ascii_digit()).len();
        let mut frac_digits = 0;
        if self.peek() == Some(b'.') {
            is_int = false;
            self.pos += 1;
            frac_digits = self.take_while(|c| c.is_ascii_digit()).len();
        }
        if int_digits + frac_digits == 0 {
            return Err(Error::syntax(start, "expected a number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            is_int = false;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.take_while(|c| c.is_ascii_digit()).is_empty() {
                return Err(Error::syntax(self.pos, "expected exponent digits"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ASCII subset");
        if is_int {
            if let Ok(i) = text.parse::<i64>() {
                return Ok(ParamValue::Int(i));
            }
        }
        let v: f64 = text
            .parse()
            .map_err(|_| Error::syntax(start, "invalid number"))?;
        if !v.is_finite() {
            return Err(Error::syntax(start, "number out of range"));
        }
        Ok(ParamValue::Real(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grammar_examples() {
        let spec = parse_family("pow:alpha=0.5").unwrap();
        assert_eq!(
            spec,
            FamilySpec::new("pow").with("alpha", ParamValue::Real(0.5))
        );

        let spec = parse_family("iterlog:K=2,M=16").unwrap();
        assert_eq!(
            spec,
            FamilySpec::new("iterlog")
                .with("K", ParamValue::Int(2))
                .with("M", ParamValue::Int(16))
        );
    }

    #[test]
    fn empty_value_is_syntax_error() {
        match parse_family("pow:alpha=") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 10),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        for text in [
            "",
            ":",
            "pow:",
            "pow:alpha",
            "pow:=1",
            "pow:alpha=1,",
            "pow:alpha=1e",
            "pow:alpha=..5",
            "Pow",
        ] {
            let err = parse_family(text).unwrap_err();
            assert!(matches!(err, Error::Syntax { .. }), "{text}: {err:?}");
        }
        assert!(matches!(
            parse_family("pow:alpha=1x"),
            Err(Error::Syntax { pos: 11, .. })
        ));
    }

    #[test]
    fn unknown_family_and_keys() {
        assert!(matches!(parse_family("nope"), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            parse_family("pow:beta=1"),
            Err(Error::UnexpectedParameter { .. })
        ));
        assert!(matches!(
            parse_family("pow"),
            Err(Error::MissingParameter { .. })
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(parse_family("pow:alpha=0"), Err(Error::Domain(_))));
        assert!(matches!(
            parse_family("pow:alpha=-1"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_family("iterlog:K=2,M=2"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_family("paired:eps=0,inner=pow,alpha=1"),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            parse_family("pow:alpha=fast"),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn paired_sub_spec() {
        let spec = parse_family("paired:eps=1,inner=pow,alpha=0.5").unwrap();
        assert_eq!(spec.family, "paired");
        assert_eq!(spec.get("eps"), Some(&ParamValue::Int(1)));
        let inner = spec.inner.as_ref().unwrap();
        assert_eq!(inner.family, "pow");
        assert_eq!(inner.get("alpha"), Some(&ParamValue::Real(0.5)));
        assert_eq!(spec.render(), "paired:eps=1,inner=pow,alpha=0.5");
    }

    #[test]
    fn table_path() {
        let spec = FamilySpec::parse_syntax("table:data/lin.csv").unwrap();
        assert_eq!(spec.path.as_deref(), Some("data/lin.csv"));
        assert_eq!(spec.render(), "table:data/lin.csv");
        assert!(FamilySpec::parse_syntax("table:").is_err());
    }

    #[test]
    fn numbers() {
        let spec = FamilySpec::parse_syntax("x:a=-1.5e-3,b=+2,c=.5,d=3.,e=1E2").unwrap();
        let vals: Vec<_> = spec.params.iter().map(|(_, v)| v.clone()).collect();
        assert_eq!(
            vals,
            vec![
                ParamValue::Real(-1.5e-3),
                ParamValue::Int(2),
                ParamValue::Real(0.5),
                ParamValue::Real(3.0),
                ParamValue::Real(100.0)
            ]
        );
        assert!(FamilySpec::parse_syntax("x:a=1e999").is_err());
    }

    #[test]
    fn canonical_texts_round_trip() {
        for text in [
            "pow:alpha=0.5",
            "pow-shifted:alpha=0.25",
            "iterlog:K=2,M=16",
            "paired:eps=1,inner=pow,alpha=0.5",
            "paired:inner=paired,eps=2.5,inner=const",
            "factorial-staircase",
            "chihara",
            "const",
            "table:lin.csv",
        ] {
            assert_eq!(FamilySpec::parse_syntax(text).unwrap().render(), text);
        }
    }

    fn arb_value() -> impl Strategy<Value = ParamValue> {
        prop_oneof![
            any::<i32>().prop_map(|i| ParamValue::Int(i as i64)),
            (-1e12f64..1e12).prop_map(ParamValue::Real),
            (1e-300f64..1e300).prop_map(ParamValue::Real),
            "[a-z][a-z0-9_]{0,5}".prop_map(ParamValue::Word),
        ]
    }

    fn arb_spec() -> impl Strategy<Value = FamilySpec> {
        let leaf = (
            "[a-z][a-z0-9-]{0,8}",
            prop::collection::vec(("[a-z][A-Za-z0-9_]{0,4}", arb_value()), 0..4),
        )
            .prop_filter("inner is reserved", |(_, ps)| {
                ps.iter().all(|(k, _)| k != "inner")
            })
            .prop_filter("table takes a path", |(f, _)| f != "table")
            .prop_map(|(family, params)| FamilySpec {
                family,
                params,
                inner: None,
                path: None,
            });
        leaf.prop_recursive(2, 8, 1, |inner| {
            (
                "[a-z]{1,6}",
                prop::collection::vec(("[a-z]{1,3}", arb_value()), 0..3),
                inner,
            )
                .prop_filter("inner is reserved", |(f, ps, _)| {
                    f != "table" && ps.iter().all(|(k, _)| k != "inner")
                })
                .prop_map(|(family, params, inner)| FamilySpec {
                    family,
                    params,
                    inner: Some(Box::new(inner)),
                    path: None,
                })
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_render(spec in arb_spec()) {
            let text = spec.render();
            let back = FamilySpec::parse_syntax(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(back.render(), text);
        }
    }
}
