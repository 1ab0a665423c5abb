use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use super::formula::Formula;
use super::parser::{parse_formula_at, Signatures};
use crate::error::{Error, Result};

/// A digitized law: its formula plus the threshold constants it refers to.
///
/// The formula is shared, so rebinding a constant is cheap and leaves the
/// AST untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct LawFile {
    pub name: String,
    pub source: String,
    pub constants: BTreeMap<String, f64>,
    pub formula: Arc<Formula>,
}

impl LawFile {
    /// Parses the text format:
    ///
    /// ```text
    /// # comment
    /// name: overtake_fixed
    /// const d_min = 12
    /// formula: G( cross_right_line -> (indicator_right_ge(3.0) | gap_gt(d_min)) )
    /// ```
    ///
    /// Everything after `formula:` (to end of file) is the formula.
    pub fn parse(text: &str, sigs: &dyn Signatures) -> Result<Self> {
        let mut name = None;
        let mut constants = BTreeMap::new();
        let mut offset = 0;
        for (idx, raw) in text.split_inclusive('\n').enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches(['\n', '\r']);
            let trimmed = line.trim_start();
            let indent = line.len() - trimmed.len();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                offset += raw.len();
                continue;
            }
            if trimmed.starts_with("formula:") {
                let col = indent + "formula:".len() + 1;
                let src = &text[offset + indent + "formula:".len()..];
                let formula = parse_formula_at(src, line_no, col, sigs, &constants)?;
                return Ok(LawFile {
                    name: name.unwrap_or_else(|| "law".to_string()),
                    source: src.trim().to_string(),
                    constants,
                    formula: Arc::new(formula),
                });
            } else if let Some(rest) = trimmed.strip_prefix("name:") {
                name = Some(rest.trim().to_string());
            } else if let Some(rest) = trimmed.strip_prefix("const ") {
                let (k, v) = parse_const(rest).ok_or_else(|| Error::Syntax {
                    line: line_no,
                    col: indent + 1,
                    msg: "expected `const <name> = <number>`".into(),
                })?;
                constants.insert(k, v);
            } else {
                return Err(Error::Syntax {
                    line: line_no,
                    col: indent + 1,
                    msg: format!("unexpected header line `{trimmed}`"),
                });
            }
            offset += raw.len();
        }
        Err(Error::Syntax {
            line: text.lines().count().max(1),
            col: 1,
            msg: "missing `formula:` line".into(),
        })
    }

    pub fn load(path: impl AsRef<Path>, sigs: &dyn Signatures) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut law = Self::parse(&text, sigs)?;
        if law.name == "law" {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                law.name = stem.to_string();
            }
        }
        Ok(law)
    }

    /// Returns a copy with `name` bound to `value`.
    pub fn rebind_constant(&self, name: &str, value: f64) -> Result<Self> {
        if !self.constants.contains_key(name) {
            return Err(Error::UnknownConstant(name.to_string()));
        }
        let mut out = self.clone();
        out.constants.insert(name.to_string(), value);
        Ok(out)
    }

    /// Renders the file back to text. Parsing the result yields an equal law.
    pub fn to_text(&self) -> String {
        let mut s = format!("name: {}\n", self.name);
        for (k, v) in &self.constants {
            s.push_str(&format!("const {k} = {v:?}\n"));
        }
        s.push_str(&format!("formula: {}\n", self.formula));
        s
    }
}

fn parse_const(rest: &str) -> Option<(String, f64)> {
    let (k, v) = rest.split_once('=')?;
    let k = k.trim();
    let valid = k.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    let v = v.split('#').next()?.trim().parse::<f64>().ok()?;
    (valid && v.is_finite()).then(|| (k.to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Sig;
    impl Signatures for Sig {
        fn arity(&self, name: &str) -> Option<usize> {
            match name {
                "p" => Some(0),
                "gap_gt" => Some(1),
                _ => None,
            }
        }
        fn is_context_var(&self, name: &str) -> bool {
            name == "dv"
        }
    }

    const TEXT: &str = "# test\nname: t\nconst d = 12\nconst tau = 1.5\nformula: G(p ->\n  gap_gt(d - tau * dv))\n";

    #[test]
    fn header_and_multiline_formula() {
        let law = LawFile::parse(TEXT, &Sig).unwrap();
        assert_eq!(law.name, "t");
        assert_eq!(law.constants["d"], 12.0);
        assert_eq!(law.constants["tau"], 1.5);
        assert!(matches!(*law.formula, Formula::Always(_)));
    }

    #[test]
    fn unbound_constant_is_an_error() {
        let err = LawFile::parse("formula: G(gap_gt(d_min))", &Sig).unwrap_err();
        assert!(matches!(err, Error::UnboundConstant(n) if n == "d_min"));
    }

    #[test]
    fn error_lines_refer_to_the_file() {
        let err = LawFile::parse("const d = 1\nformula: G(p &\n )", &Sig).unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 3, col: 2, .. }), "{err:?}");
        let err = LawFile::parse("const d = x\nformula: p", &Sig).unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 1, .. }));
        assert!(LawFile::parse("const d = 1\n", &Sig).is_err());
    }

    #[test]
    fn rebind_keeps_formula() {
        let law = LawFile::parse(TEXT, &Sig).unwrap();
        let re = law.rebind_constant("d", 20.0).unwrap();
        assert_eq!(re.constants["d"], 20.0);
        assert!(Arc::ptr_eq(&law.formula, &re.formula));
        assert!(matches!(law.rebind_constant("nope", 1.0), Err(Error::UnknownConstant(_))));
    }

    #[test]
    fn text_round_trip() {
        let law = LawFile::parse(TEXT, &Sig).unwrap();
        let again = LawFile::parse(&law.to_text(), &Sig).unwrap();
        assert_eq!(law.formula, again.formula);
        assert_eq!(law.constants, again.constants);
    }
}
