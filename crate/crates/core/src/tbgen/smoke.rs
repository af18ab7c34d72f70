//! Structural lint for generated SystemVerilog. Not a parser: it catches
//! the mistakes a template can make (unbalanced brackets or blocks, leftover
//! template syntax, instance connections to undeclared nets).

use std::collections::BTreeSet;

/// Returns every problem found; an empty list means the text passed.
pub fn sv_smoke_check(text: &str) -> Vec<String> {
    let mut problems = Vec::new();
    for residue in ["{{", "}}", "{%", "%}"] {
        if text.contains(residue) {
            problems.push(format!("template residue `{residue}`"));
        }
    }
    let code = strip_comments_and_strings(text);

    let mut stack = Vec::new();
    for (i, c) in code.char_indices() {
        match c {
            '(' | '[' | '{' => stack.push(c),
            ')' | ']' | '}' => {
                let want = match c {
                    ')' => '(',
                    ']' => '[',
                    _ => '{',
                };
                if stack.pop() != Some(want) {
                    problems.push(format!("unbalanced `{c}` at byte {i}"));
                    stack.clear();
                }
            }
            _ => {}
        }
    }
    if !stack.is_empty() {
        problems.push(format!("{} unclosed bracket(s)", stack.len()));
    }

    let words = words(&code);
    for (open, close) in [("begin", "end"), ("module", "endmodule")] {
        let mut depth = 0i64;
        for w in &words {
            if *w == open {
                depth += 1;
            } else if *w == close {
                depth -= 1;
                if depth < 0 {
                    break;
                }
            }
        }
        if depth != 0 {
            problems.push(format!("`{open}`/`{close}` do not pair up"));
        }
    }

    let declared = declared_nets(&words);
    for net in connected_nets(&code) {
        if !declared.contains(net.as_str()) {
            problems.push(format!("port connection to undeclared `{net}`"));
        }
    }
    problems
}

fn strip_comments_and_strings(text: &str) -> String {
    let b = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < b.len() {
        if b[i..].starts_with(b"//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if b[i..].starts_with(b"/*") {
            i += 2;
            while i < b.len() && !b[i..].starts_with(b"*/") {
                i += 1;
            }
            i = (i + 2).min(b.len());
            out.push(' ');
        } else if b[i] == b'"' {
            i += 1;
            while i < b.len() && b[i] != b'"' {
                i += if b[i] == b'\\' { 2 } else { 1 };
            }
            i += 1;
            out.push_str("\"\"");
        } else {
            let ch = text[i..].chars().next().expect("in bounds");
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    out
}

fn words(code: &str) -> Vec<&str> {
    code.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '$'))
        .filter(|w| !w.is_empty())
        .collect()
}

/// Names following a net or variable type keyword, up to the `;`.
fn declared_nets<'a>(words: &[&'a str]) -> BTreeSet<&'a str> {
    const TYPES: [&str; 6] = ["logic", "wire", "reg", "input", "output", "inout"];
    let mut out = BTreeSet::new();
    for (i, w) in words.iter().enumerate() {
        if TYPES.contains(w) {
            // skip range digits; the first identifier is the name
            if let Some(name) = words[i + 1..].iter().find(|x| !x.chars().next().is_some_and(|c| c.is_ascii_digit())) {
                out.insert(*name);
            }
        }
    }
    out
}

/// Nets on the right of `.port(net)` named connections.
fn connected_nets(code: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = code;
    while let Some(dot) = rest.find('.') {
        rest = &rest[dot + 1..];
        let port_len = rest.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(rest.len());
        if port_len == 0 {
            continue;
        }
        let after = rest[port_len..].trim_start();
        if let Some(inner) = after.strip_prefix('(') {
            if let Some(close) = inner.find(')') {
                let net = inner[..close].trim();
                if !net.is_empty() && net.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    out.push(net.to_string());
                }
            }
        }
    }
    out
}
