use super::HdlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Integer literal; `width` is `None` for unsized decimals.
    Number { value: u64, width: Option<u32> },
    /// `$name` system identifiers, only ever reported as unsupported.
    System(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Number { value, .. } => value.to_string(),
            Tok::System(s) => format!("${s}"),
            Tok::Sym(s) => (*s).to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

// Longest first so that prefixes never shadow longer operators.
const SYMBOLS: &[&str] = &[
    "===", "!==", "<<<", ">>>", "<=", ">=", "==", "!=", "&&", "||", "<<", ">>", "~&", "~|", "~^",
    "^~", "(", ")", "[", "]", "{", "}", ";", ",", ":", ".", "#", "@", "=", "<", ">", "+", "-", "*",
    "/", "%", "&", "|", "^", "~", "!", "?",
];

pub fn tokenize(src: &str) -> Result<Vec<Token>, HdlError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (l0, c0) = (line, col);
            bump!();
            bump!();
            loop {
                if i + 1 >= chars.len() {
                    return Err(HdlError::Syntax {
                        line: l0,
                        col: c0,
                        token: "/*".into(),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c == '`' {
            let start = i + 1;
            bump!();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let directive: String = chars[start..i].iter().collect();
            if directive == "timescale" {
                while i < chars.len() && chars[i] != '\n' {
                    bump!();
                }
                continue;
            }
            return Err(HdlError::Unsupported {
                construct: format!("`{directive}"),
                line: tl,
                col: tc,
            });
        }
        if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            let start = i;
            bump!();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.strip_prefix('$') {
                Some(rest) => Tok::System(rest.to_string()),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || c == '\'' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                bump!();
            }
            let size_text: String = chars[start..i].iter().filter(|c| **c != '_').collect();
            if i < chars.len() && chars[i] == '\'' {
                bump!();
                if i < chars.len() && (chars[i] == 's' || chars[i] == 'S') {
                    return Err(HdlError::Unsupported {
                        construct: "signed literal".into(),
                        line: tl,
                        col: tc,
                    });
                }
                let base = match chars.get(i).map(|c| c.to_ascii_lowercase()) {
                    Some('b') => 2,
                    Some('o') => 8,
                    Some('d') => 10,
                    Some('h') => 16,
                    _ => {
                        return Err(HdlError::Syntax {
                            line: tl,
                            col: tc,
                            token: "'".into(),
                        })
                    }
                };
                bump!();
                let dstart = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '?') {
                    bump!();
                }
                let digits: String = chars[dstart..i].iter().filter(|c| **c != '_').collect();
                if digits.chars().any(|d| matches!(d.to_ascii_lowercase(), 'x' | 'z' | '?')) {
                    return Err(HdlError::Unsupported {
                        construct: "four-state literal".into(),
                        line: tl,
                        col: tc,
                    });
                }
                let value = u64::from_str_radix(&digits, base).map_err(|_| HdlError::Syntax {
                    line: tl,
                    col: tc,
                    token: digits.clone(),
                })?;
                let width = if size_text.is_empty() {
                    None
                } else {
                    let w: u32 = size_text.parse().map_err(|_| HdlError::Syntax {
                        line: tl,
                        col: tc,
                        token: size_text.clone(),
                    })?;
                    if w == 0 || w > crate::bits::MAX_WIDTH {
                        return Err(HdlError::Unsupported {
                            construct: format!("{w}-bit literal"),
                            line: tl,
                            col: tc,
                        });
                    }
                    Some(w)
                };
                let value = match width {
                    Some(w) => value & crate::bits::mask(w),
                    None => value,
                };
                out.push(Token {
                    tok: Tok::Number { value, width },
                    line: tl,
                    col: tc,
                });
            } else {
                let value = size_text.parse().map_err(|_| HdlError::Syntax {
                    line: tl,
                    col: tc,
                    token: size_text.clone(),
                })?;
                out.push(Token {
                    tok: Tok::Number { value, width: None },
                    line: tl,
                    col: tc,
                });
            }
            continue;
        }
        let rest: String = chars[i..(i + 3).min(chars.len())].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                for _ in 0..sym.len() {
                    bump!();
                }
                out.push(Token {
                    tok: Tok::Sym(sym),
                    line: tl,
                    col: tc,
                });
            }
            None => {
                return Err(HdlError::Syntax {
                    line: tl,
                    col: tc,
                    token: c.to_string(),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn sized_literals() {
        assert_eq!(
            toks("3'b110 8'hFF 'd7 12"),
            vec![
                Tok::Number { value: 6, width: Some(3) },
                Tok::Number { value: 255, width: Some(8) },
                Tok::Number { value: 7, width: None },
                Tok::Number { value: 12, width: None },
                Tok::Eof
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  /* a\n b */ x <= 1;").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("x".into()));
        assert_eq!((t[0].line, t[0].col), (3, 7));
        assert_eq!(t[1].tok, Tok::Sym("<="));
    }

    #[test]
    fn four_state_rejected() {
        assert!(matches!(tokenize("4'b10x1"), Err(HdlError::Unsupported { .. })));
        assert!(matches!(tokenize("`define X 1"), Err(HdlError::Unsupported { .. })));
        assert!(tokenize("`timescale 1ns/1ps\nmodule").is_ok());
    }
}
