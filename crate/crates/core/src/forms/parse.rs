//! Text format for forms.
//!
//! One form per line: `term ::= [sign] [integer "*"] factor ("*" factor)*`,
//! `factor ::= "x" index ["^" exponent]`, whitespace insensitive, `#` starts
//! a comment. No parentheses or products of sums; inputs are entered
//! expanded.

use num_bigint::BigInt;

use super::{Form, FormsError, Result};

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Scanner {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn error(&self, message: impl Into<String>) -> FormsError {
        FormsError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
        }
    }
}

/// A parsed term: sparse `(variable, exponent)` pairs (0-based variables)
/// and an exact coefficient.
pub(crate) type SparseTerm = (Vec<(usize, u32)>, BigInt);

/// Shared term-list parser for forms (`x` variables, no constants) and for
/// coefficient polynomials (`t` variables, constants allowed). Returns the
/// terms and the inferred variable count (largest index seen).
pub(crate) fn parse_poly_generic(
    text: &str,
    prefix: char,
    allow_constant: bool,
) -> Result<(Vec<SparseTerm>, usize)> {
    let body = match text.find('#') {
        Some(cut) => &text[..cut],
        None => text,
    };
    let mut sc = Scanner::new(body);
    let mut terms: Vec<SparseTerm> = Vec::new();
    let mut max_var = 0usize;
    sc.skip_ws();
    if sc.peek().is_none() {
        return Err(sc.error("empty input"));
    }
    let mut first = true;
    loop {
        sc.skip_ws();
        let negative = match sc.peek() {
            Some(b'+') => {
                sc.bump();
                false
            }
            Some(b'-') => {
                sc.bump();
                true
            }
            Some(_) if first => false,
            Some(c) => {
                return Err(sc.error(format!(
                    "expected '+' or '-' between terms, found {:?}",
                    c as char
                )))
            }
            None => return Err(sc.error("dangling operator")),
        };
        first = false;
        sc.skip_ws();
        let mut coeff = BigInt::from(1);
        let mut have_coeff = false;
        if sc.peek().is_some_and(|b| b.is_ascii_digit()) {
            let digits = sc.digits().unwrap();
            coeff = digits.parse::<BigInt>().expect("digits parse");
            have_coeff = true;
        }
        if negative {
            coeff = -coeff;
        }
        sc.skip_ws();
        let mut factors: Vec<(usize, u32)> = Vec::new();
        if have_coeff {
            match sc.peek() {
                Some(b'*') => {
                    sc.bump();
                }
                _ if allow_constant => {
                    // bare constant term
                    terms.push((factors, coeff));
                    sc.skip_ws();
                    match sc.peek() {
                        None => break,
                        Some(b'+') | Some(b'-') => continue,
                        Some(c) => {
                            return Err(
                                sc.error(format!("unexpected {:?} after constant term", c as char))
                            )
                        }
                    }
                }
                _ => return Err(sc.error("expected '*' and a variable after the coefficient")),
            }
        }
        // one or more factors separated by '*'
        loop {
            sc.skip_ws();
            match sc.peek() {
                Some(c) if c as char == prefix => {
                    sc.bump();
                }
                Some(c) => {
                    return Err(sc.error(format!(
                        "expected variable {:?}, found {:?}",
                        prefix, c as char
                    )))
                }
                None => return Err(sc.error(format!("expected variable {prefix:?}"))),
            }
            let idx_digits = sc
                .digits()
                .ok_or_else(|| sc.error("expected a variable index"))?;
            let index: usize = idx_digits
                .parse()
                .map_err(|_| sc.error("variable index out of range"))?;
            if index == 0 {
                return Err(sc.error("variable indices start at 1"));
            }
            max_var = max_var.max(index);
            let mut exponent = 1u32;
            sc.skip_ws();
            if sc.peek() == Some(b'^') {
                sc.bump();
                sc.skip_ws();
                let e_digits = sc
                    .digits()
                    .ok_or_else(|| sc.error("expected an exponent"))?;
                exponent = e_digits
                    .parse()
                    .map_err(|_| sc.error("exponent out of range"))?;
                if exponent == 0 {
                    return Err(sc.error("exponents must be at least 1"));
                }
            }
            factors.push((index - 1, exponent));
            sc.skip_ws();
            if sc.peek() == Some(b'*') {
                sc.bump();
                continue;
            }
            break;
        }
        terms.push((factors, coeff));
        sc.skip_ws();
        match sc.peek() {
            None => break,
            Some(b'+') | Some(b'-') => continue,
            Some(c) => return Err(sc.error(format!("unexpected {:?} after term", c as char))),
        }
    }
    Ok((terms, max_var))
}

/// Parse a single homogeneous form. Rejects inhomogeneous input with the
/// offending monomial degrees, and forms with all-cancelling terms.
pub fn parse_form(text: &str) -> Result<Form> {
    let (terms, n) = parse_poly_generic(text, 'x', false)?;
    let mut degrees: Vec<u32> = Vec::new();
    let mut expanded: Vec<(Vec<u32>, BigInt)> = Vec::new();
    for (factors, coeff) in terms {
        let mut exps = vec![0u32; n];
        for (var, e) in factors {
            exps[var] += e;
        }
        let d: u32 = exps.iter().sum();
        if !degrees.contains(&d) {
            degrees.push(d);
        }
        expanded.push((exps, coeff));
    }
    degrees.sort_unstable();
    if degrees.len() > 1 {
        return Err(FormsError::Inhomogeneous { degrees });
    }
    let degree = degrees[0];
    if degree == 0 {
        return Err(FormsError::Inhomogeneous { degrees });
    }
    let form = Form::from_terms(n, degree, expanded);
    if form.is_zero() {
        return Err(FormsError::ZeroForm);
    }
    Ok(form)
}

/// Parse a whole-file list of forms (UTF-8, one form per line, `#` comments,
/// blank lines ignored). Returns forms with their 1-based line numbers.
pub fn parse_forms_text(text: &str) -> Result<Vec<(usize, Form)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = match line.find('#') {
            Some(cut) => &line[..cut],
            None => line,
        };
        if body.trim().is_empty() {
            continue;
        }
        out.push((lineno + 1, parse_form(body)?));
    }
    Ok(out)
}
