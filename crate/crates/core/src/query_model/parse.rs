use super::{Atom, Crpq, Label, Regex};
use crate::error::{Error, Result};

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, line, _src: src }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { line: self.line, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while let Some(&c) = self.chars.get(self.pos) {
            if c.is_whitespace() || c == '.' || c == '·' {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn union(&mut self) -> Result<Regex> {
        let mut r = self.concat()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            let rhs = self.concat()?;
            r = Regex::union(r, rhs);
        }
        Ok(r)
    }

    fn concat(&mut self) -> Result<Regex> {
        let mut items = Vec::new();
        loop {
            match self.peek() {
                None | Some(')') | Some('+') => break,
                Some(_) => items.push(self.postfix()?),
            }
        }
        if items.is_empty() {
            return self.err("empty expression");
        }
        Ok(Regex::concat_all(items))
    }

    fn postfix(&mut self) -> Result<Regex> {
        let mut r = self.primary()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            r = Regex::star(r);
        }
        Ok(r)
    }

    fn primary(&mut self) -> Result<Regex> {
        let c = match self.peek() {
            Some(c) => c,
            None => return self.err("unexpected end of expression"),
        };
        match c {
            '(' => {
                self.pos += 1;
                if self.peek() == Some(')') {
                    self.pos += 1;
                    return Ok(Regex::Epsilon);
                }
                let r = self.union()?;
                if self.peek() != Some(')') {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(r)
            }
            '{' => {
                self.pos += 1;
                if self.peek() != Some('}') {
                    return self.err("expected `}`");
                }
                self.pos += 1;
                Ok(Regex::Empty)
            }
            '_' => {
                self.pos += 1;
                Ok(Regex::Wildcard)
            }
            '<' => {
                self.pos += 1;
                let start = self.pos;
                while let Some(&c) = self.chars.get(self.pos) {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                if self.chars.get(self.pos) != Some(&'>') || name.is_empty() {
                    return self.err("malformed bracketed label");
                }
                self.pos += 1;
                Ok(Regex::Symbol(Label::reserved(&name)))
            }
            c if c.is_ascii_alphabetic() => {
                let start = self.pos;
                self.pos += 1;
                while matches!(self.chars.get(self.pos), Some(d) if d.is_ascii_digit()) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                Ok(Regex::Symbol(Label::reserved(&name)))
            }
            c if c.is_ascii_digit() => {
                self.pos += 1;
                Ok(Regex::Symbol(Label::reserved(&c.to_string())))
            }
            other => self.err(format!("unexpected character `{other}`")),
        }
    }
}

fn parse_regex_at(s: &str, line: usize) -> Result<Regex> {
    let mut c = Cursor::new(s, line);
    let r = c.union()?;
    if let Some(ch) = c.peek() {
        return c.err(format!("unexpected `{ch}`"));
    }
    Ok(r)
}

pub fn parse_regex(s: &str) -> Result<Regex> {
    parse_regex_at(s, 1)
}

fn is_var(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parse a query in the `Q(x,..) <- x R y, ...` text format. Lines starting
/// with `#` or `%` are comments.
pub fn parse_query(text: &str) -> Result<Crpq> {
    // Blank out comments while keeping offsets for line numbers.
    let mut cleaned = String::with_capacity(text.len());
    for l in text.split_inclusive('\n') {
        let t = l.trim_start();
        if t.starts_with('#') || t.starts_with('%') {
            cleaned.extend(l.chars().map(|c| if c == '\n' { '\n' } else { ' ' }));
        } else {
            cleaned.push_str(l);
        }
    }
    let line_of = |offset: usize| cleaned[..offset].matches('\n').count() + 1;
    let (arrow, alen) = match (cleaned.find("<-"), cleaned.find('←')) {
        (Some(i), _) => (i, 2),
        (None, Some(i)) => (i, '←'.len_utf8()),
        _ => return Err(Error::Parse { line: 1, msg: "missing `<-`".into() }),
    };
    let head = cleaned[..arrow].trim();
    let open = head.find('(');
    let close = head.rfind(')');
    let (open, close) = match (open, close) {
        (Some(o), Some(c)) if c > o => (o, c),
        _ => return Err(Error::Parse { line: line_of(arrow), msg: "malformed head".into() }),
    };
    let name = head[..open].trim();
    if !is_var(name) {
        return Err(Error::Parse { line: line_of(arrow), msg: "malformed query name".into() });
    }
    let mut distinguished = Vec::new();
    for v in head[open + 1..close].split(',') {
        let v = v.trim();
        if v.is_empty() {
            continue;
        }
        if !is_var(v) {
            return Err(Error::Parse {
                line: line_of(arrow),
                msg: format!("invalid variable `{v}`"),
            });
        }
        distinguished.push(v.to_string());
    }
    let body_start = arrow + alen;
    let body = &cleaned[body_start..];
    let mut atoms = Vec::new();
    let mut depth = 0i32;
    let mut seg_start = 0usize;
    let mut segments = Vec::new();
    for (i, c) in body.char_indices() {
        match c {
            '(' | '{' | '<' => depth += 1,
            ')' | '}' | '>' => depth -= 1,
            ',' if depth == 0 => {
                segments.push((seg_start, &body[seg_start..i]));
                seg_start = i + 1;
            }
            _ => {}
        }
    }
    segments.push((seg_start, &body[seg_start..]));
    let only_blank = segments.len() == 1 && segments[0].1.trim().is_empty();
    if !only_blank {
        for (off, seg) in segments {
            let line = line_of(body_start + off + (seg.len() - seg.trim_start().len()));
            let toks: Vec<&str> = seg.split_whitespace().collect();
            if toks.len() < 3 {
                return Err(Error::Parse { line, msg: format!("malformed atom `{}`", seg.trim()) });
            }
            let (src, dst) = (toks[0], toks[toks.len() - 1]);
            if !is_var(src) || !is_var(dst) {
                return Err(Error::Parse { line, msg: format!("malformed atom `{}`", seg.trim()) });
            }
            let regex = parse_regex_at(&toks[1..toks.len() - 1].join(" "), line)?;
            atoms.push(Atom::new(src, regex, dst));
        }
    }
    let q = Crpq { distinguished, atoms };
    q.validate()?;
    Ok(q)
}

fn render_label(l: &Label) -> String {
    if l.is_bare() {
        l.as_str().to_string()
    } else {
        format!("<{}>", l.as_str())
    }
}

fn render(r: &Regex, prec: u8, out: &mut String) {
    match r {
        Regex::Empty => out.push_str("{}"),
        Regex::Epsilon => out.push_str("()"),
        Regex::Wildcard => out.push('_'),
        Regex::Symbol(l) => out.push_str(&render_label(l)),
        Regex::Union(..) => {
            if prec > 0 {
                out.push('(');
            }
            for (i, a) in r.alternatives().into_iter().enumerate() {
                if i > 0 {
                    out.push('+');
                }
                render(a, 1, out);
            }
            if prec > 0 {
                out.push(')');
            }
        }
        Regex::Concat(..) => {
            if prec > 1 {
                out.push('(');
            }
            for f in r.factors() {
                let mut piece = String::new();
                render(f, 2, &mut piece);
                let glue = matches!(out.chars().last(), Some(c) if c.is_ascii_alphanumeric())
                    && matches!(piece.chars().next(), Some(c) if c.is_ascii_digit());
                if glue {
                    out.push(' ');
                }
                out.push_str(&piece);
            }
            if prec > 1 {
                out.push(')');
            }
        }
        Regex::Star(a) => {
            render(a, 3, out);
            out.push('*');
        }
    }
}

pub(crate) fn render_regex(r: &Regex) -> String {
    let mut s = String::new();
    render(r, 0, &mut s);
    s
}

pub(crate) fn render_query(q: &Crpq) -> String {
    let atoms: Vec<String> = q
        .atoms
        .iter()
        .map(|a| format!("{} {} {}", a.src, render_regex(&a.regex), a.dst))
        .collect();
    format!("Q({}) <- {}", q.distinguished.join(","), atoms.join(", "))
}
