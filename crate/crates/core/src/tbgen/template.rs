//! A small template language: `{{path}}` interpolation and
//! `{% for x in list %}...{% endfor %}` iteration. A tag alone on its line
//! takes the whole line with it.

use std::collections::BTreeMap;

use super::TbgenError;

/// Data a template renders against.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Str(String),
    List(Vec<Value>),
    Map(BTreeMap<String, Value>),
}

impl Value {
    pub fn map<I: IntoIterator<Item = (&'static str, Value)>>(fields: I) -> Self {
        Value::Map(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    fn field(&self, key: &str) -> Option<&Value> {
        match self {
            Value::Map(m) => m.get(key),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Text(String),
    Var { path: String, line: usize },
    For { var: String, list: String, line: usize, body: Vec<Node> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    nodes: Vec<Node>,
}

/// An open `for` block: its body so far and its `(var, list, line)` head.
type Frame = (Vec<Node>, Option<(String, String, usize)>);

enum Tag {
    Var(String),
    For(String, String),
    EndFor,
}

impl Template {
    pub fn parse(text: &str) -> Result<Self, TbgenError> {
        let mut stack: Vec<Frame> = vec![(Vec::new(), None)];
        let mut rest = text;
        let mut line = 1;
        while !rest.is_empty() {
            let next = match (rest.find("{{"), rest.find("{%")) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            let Some(at) = next else {
                push_text(&mut stack.last_mut().expect("root").0, rest);
                break;
            };
            let close = if rest[at..].starts_with("{{") { "}}" } else { "%}" };
            let end = rest[at + 2..]
                .find(close)
                .map(|e| at + 2 + e)
                .ok_or_else(|| syntax(line + count_lines(&rest[..at]), format!("unclosed `{}`", &rest[at..at + 2])))?;
            let inner = rest[at + 2..end].trim();
            let tag_line = line + count_lines(&rest[..at]);
            let tag = if close == "}}" {
                if !is_path(inner) {
                    return Err(syntax(tag_line, format!("bad placeholder `{inner}`")));
                }
                Tag::Var(inner.to_string())
            } else {
                let words: Vec<&str> = inner.split_whitespace().collect();
                match words.as_slice() {
                    ["for", var, "in", list] if is_ident(var) && is_path(list) => Tag::For(var.to_string(), list.to_string()),
                    ["endfor"] => Tag::EndFor,
                    _ => return Err(syntax(tag_line, format!("unknown block `{inner}`"))),
                }
            };
            let mut before = &rest[..at];
            let mut after = end + 2;
            // a block tag alone on its line swallows the line
            if !matches!(tag, Tag::Var(_)) {
                let line_start = before.rfind('\n').map_or(0, |i| i + 1);
                let tail = &rest[after..];
                let line_end = tail.find('\n');
                let trailing = &tail[..line_end.unwrap_or(tail.len())];
                let own_line = before[line_start..].trim().is_empty() && trailing.trim().is_empty();
                let at_start = line_start > 0 || ends_line(text, rest);
                if own_line && at_start {
                    before = &before[..line_start];
                    after += line_end.map_or(trailing.len(), |i| i + 1);
                }
            }
            push_text(&mut stack.last_mut().expect("root").0, before);
            line += count_lines(&rest[..after]);
            match tag {
                Tag::Var(path) => stack.last_mut().expect("root").0.push(Node::Var { path, line: tag_line }),
                Tag::For(var, list) => stack.push((Vec::new(), Some((var, list, tag_line)))),
                Tag::EndFor => {
                    let (body, head) = stack.pop().expect("root");
                    let Some((var, list, l)) = head else {
                        return Err(syntax(tag_line, "`endfor` without `for`".into()));
                    };
                    stack.last_mut().expect("root").0.push(Node::For { var, list, line: l, body });
                }
            }
            rest = &rest[after..];
        }
        let (nodes, head) = stack.pop().expect("root");
        if let Some((_, _, l)) = head {
            return Err(syntax(l, "`for` without `endfor`".into()));
        }
        Ok(Self { nodes })
    }

    pub fn render(&self, model: &Value) -> Result<String, TbgenError> {
        let mut out = String::new();
        let mut scope = Vec::new();
        render_nodes(&self.nodes, model, &mut scope, &mut out)?;
        Ok(out)
    }
}

fn render_nodes<'a>(nodes: &'a [Node], model: &'a Value, scope: &mut Vec<(&'a str, &'a Value)>, out: &mut String) -> Result<(), TbgenError> {
    for n in nodes {
        match n {
            Node::Text(t) => out.push_str(t),
            Node::Var { path, line } => match lookup(path, model, scope) {
                Some(Value::Str(s)) => out.push_str(s),
                Some(_) => return Err(syntax(*line, format!("`{path}` is not a string"))),
                None => return Err(TbgenError::UnresolvedPlaceholder(path.clone())),
            },
            Node::For { var, list, line, body } => {
                let items = match lookup(list, model, scope) {
                    Some(Value::List(items)) => items,
                    Some(_) => return Err(syntax(*line, format!("`{list}` is not a list"))),
                    None => return Err(TbgenError::UnresolvedPlaceholder(list.clone())),
                };
                for item in items {
                    scope.push((var.as_str(), item));
                    render_nodes(body, model, scope, out)?;
                    scope.pop();
                }
            }
        }
    }
    Ok(())
}

fn lookup<'a>(path: &str, model: &'a Value, scope: &[(&str, &'a Value)]) -> Option<&'a Value> {
    let mut parts = path.split('.');
    let head = parts.next()?;
    let mut v = scope
        .iter()
        .rev()
        .find(|(name, _)| *name == head)
        .map(|(_, v)| *v)
        .or_else(|| model.field(head))?;
    for p in parts {
        v = v.field(p)?;
    }
    Some(v)
}

fn push_text(nodes: &mut Vec<Node>, s: &str) {
    if s.is_empty() {
        return;
    }
    if let Some(Node::Text(t)) = nodes.last_mut() {
        t.push_str(s);
    } else {
        nodes.push(Node::Text(s.to_string()));
    }
}

fn ends_line(text: &str, rest: &str) -> bool {
    let consumed = text.len() - rest.len();
    consumed == 0 || text.as_bytes()[consumed - 1] == b'\n'
}

fn count_lines(s: &str) -> usize {
    s.bytes().filter(|b| *b == b'\n').count()
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|h| h.is_ascii_alphabetic() || h == '_') && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

fn is_path(s: &str) -> bool {
    !s.is_empty() && s.split('.').all(is_ident)
}

fn syntax(line: usize, msg: String) -> TbgenError {
    TbgenError::TemplateSyntax { line, msg }
}
