use std::collections::HashSet;

use num_complex::Complex64;

use super::lexer::{tokenize, Token, TokenKind};
use super::{semantic_issues, Connection, ExternalPort, Instance, NetDocument, ParseError, PortRef, Site};
use crate::matkit::{zeros, ComplexMatrix};
use crate::slh::LinearComponent;

/// Parses a QNET document, reporting the first offending location.
pub fn parse(source: &str) -> Result<NetDocument, ParseError> {
    let mut p = Parser::new(source)?;
    let mut doc = NetDocument::default();
    let mut spans = Spans::default();
    // shape errors are held back so that an earlier semantic error can win
    let mut deferred: Vec<ParseError> = Vec::new();

    loop {
        let tok = p.peek().clone();
        match &tok.kind {
            TokenKind::Eof => break,
            TokenKind::Ident(kw) if kw == "component" => {
                p.advance();
                let (comp, name_tok) = p.component(&mut deferred)?;
                doc.components.push(comp);
                spans.components.push(name_tok);
            }
            TokenKind::Ident(kw) if kw == "network" => {
                p.advance();
                p.network(&mut doc, &mut spans)?;
            }
            _ => return Err(tok.error(format!("expected `component` or `network`, found {}", tok.describe()))),
        }
    }

    for (site, msg) in semantic_issues(&doc) {
        deferred.push(spans.token(site).error(msg));
    }
    match deferred.into_iter().min_by_key(|e| (e.line, e.column)) {
        Some(err) => Err(err),
        None => Ok(doc),
    }
}

/// Parses a sequence of `NAME = matrix;` assignments.
pub fn parse_matrix_assignments(source: &str) -> Result<Vec<(String, ComplexMatrix)>, ParseError> {
    let mut p = Parser::new(source)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    while p.peek().kind != TokenKind::Eof {
        let name_tok = p.ident("a matrix name")?;
        if !seen.insert(name_tok.text.clone()) {
            return Err(name_tok.error(format!("`{}` is assigned twice", name_tok.text)));
        }
        p.sym('=')?;
        let m = p.matrix()?;
        p.sym(';')?;
        let cols = m.rows.first().map_or(0, Vec::len);
        out.push((name_tok.text, m.into_matrix(cols)));
    }
    Ok(out)
}

#[derive(Default)]
struct Spans {
    components: Vec<Token>,
    /// (name, component)
    instances: Vec<[Token; 2]>,
    /// (from instance, from port, to instance, to port)
    connections: Vec<[Token; 4]>,
    /// (instance, port, name)
    externals: Vec<[Token; 3]>,
}

impl Spans {
    fn token(&self, site: Site) -> &Token {
        match site {
            Site::Component(i) => &self.components[i],
            Site::InstanceName(i) => &self.instances[i][0],
            Site::InstanceComponent(i) => &self.instances[i][1],
            Site::ConnectFrom(i) => &self.connections[i][0],
            Site::ConnectFromPort(i) => &self.connections[i][1],
            Site::ConnectTo(i) => &self.connections[i][2],
            Site::ConnectToPort(i) => &self.connections[i][3],
            Site::ExternalInstance(i) => &self.externals[i][0],
            Site::ExternalPort(i) => &self.externals[i][1],
            Site::ExternalName(i) => &self.externals[i][2],
        }
    }
}

struct ParsedMatrix {
    rows: Vec<Vec<Complex64>>,
    start: Token,
}

impl ParsedMatrix {
    fn shape_matches(&self, rows: usize, cols: usize) -> bool {
        if self.rows.is_empty() {
            return rows == 0;
        }
        self.rows.len() == rows && self.rows[0].len() == cols
    }

    fn shape_text(&self) -> String {
        format!("{}x{}", self.rows.len(), self.rows.first().map_or(0, Vec::len))
    }

    fn into_matrix(self, cols: usize) -> ComplexMatrix {
        let nrows = self.rows.len();
        let mut m = zeros(nrows, cols);
        for (r, row) in self.rows.into_iter().enumerate() {
            for (c, z) in row.into_iter().enumerate() {
                m[(r, c)] = z;
            }
        }
        m
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(source: &str) -> Result<Self, ParseError> {
        Ok(Self { toks: tokenize(source)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn sym(&mut self, c: char) -> Result<Token, ParseError> {
        let t = self.peek();
        if t.kind == TokenKind::Sym(c) {
            Ok(self.advance())
        } else {
            Err(t.error(format!("expected `{c}`, found {}", t.describe())))
        }
    }

    fn arrow(&mut self) -> Result<Token, ParseError> {
        let t = self.peek();
        if t.kind == TokenKind::Arrow {
            Ok(self.advance())
        } else {
            Err(t.error(format!("expected `->`, found {}", t.describe())))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Token, ParseError> {
        let t = self.peek();
        if matches!(&t.kind, TokenKind::Ident(s) if s == kw) {
            Ok(self.advance())
        } else {
            Err(t.error(format!("expected `{kw}`, found {}", t.describe())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<Token, ParseError> {
        let t = self.peek();
        if matches!(t.kind, TokenKind::Ident(_)) {
            Ok(self.advance())
        } else {
            Err(t.error(format!("expected {what}, found {}", t.describe())))
        }
    }

    fn int(&mut self) -> Result<(usize, Token), ParseError> {
        let t = self.peek();
        if let TokenKind::Number { integer: true, .. } = t.kind {
            let t = self.advance();
            let v = t.text.parse::<usize>().map_err(|_| t.error("integer out of range"))?;
            Ok((v, t))
        } else {
            Err(t.error(format!("expected a non-negative integer, found {}", t.describe())))
        }
    }

    /// `NAME "." dir "[" INT "]"`; returns the instance and port tokens.
    fn port(&mut self, dir: &str) -> Result<(PortRef, Token, Token), ParseError> {
        let inst = self.ident("an instance name")?;
        self.sym('.')?;
        self.keyword(dir)?;
        self.sym('[')?;
        let (port, port_tok) = self.int()?;
        self.sym(']')?;
        Ok((PortRef::new(inst.text.clone(), port), inst, port_tok))
    }

    fn component(&mut self, deferred: &mut Vec<ParseError>) -> Result<(LinearComponent, Token), ParseError> {
        let name = self.ident("a component name")?;
        self.sym('{')?;

        let mut inputs: Option<usize> = None;
        let mut modes: Option<usize> = None;
        let mut mats: [Option<ParsedMatrix>; 3] = [None, None, None];
        const MATS: [&str; 3] = ["S", "C", "Omega"];

        let close = loop {
            let key = self.peek().clone();
            let TokenKind::Ident(k) = &key.kind else {
                if key.kind == TokenKind::Sym('}') {
                    break self.advance();
                }
                return Err(key.error(format!("expected a field name or `}}`, found {}", key.describe())));
            };
            let dup = || key.error(format!("field `{k}` given twice"));
            match k.as_str() {
                "inputs" | "modes" => {
                    self.advance();
                    self.sym('=')?;
                    let (v, _) = self.int()?;
                    let slot = if k == "inputs" { &mut inputs } else { &mut modes };
                    if slot.replace(v).is_some() {
                        return Err(dup());
                    }
                }
                _ => {
                    let Some(idx) = MATS.iter().position(|m| m == k) else {
                        return Err(key.error(format!(
                            "unknown field `{k}`; expected inputs, modes, S, C or Omega"
                        )));
                    };
                    self.advance();
                    self.sym('=')?;
                    let m = self.matrix()?;
                    if mats[idx].replace(m).is_some() {
                        return Err(dup());
                    }
                }
            }
            self.sym(';')?;
        };

        let missing = |field: &str| close.error(format!("component `{}` has no `{field}` field", name.text));
        let n = inputs.ok_or_else(|| missing("inputs"))?;
        let m = modes.ok_or_else(|| missing("modes"))?;
        let [s, cm, omega] = mats;
        let s = s.ok_or_else(|| missing("S"))?;
        let cm = cm.ok_or_else(|| missing("C"))?;
        let omega = omega.ok_or_else(|| missing("Omega"))?;

        let mut ok = true;
        for (mat, label, (r, c)) in [(&s, "S", (n, n)), (&cm, "C", (n, m)), (&omega, "Omega", (m, m))] {
            if !mat.shape_matches(r, c) {
                deferred.push(mat.start.error(format!(
                    "{label} is {}, expected {r}x{c} for inputs = {n}, modes = {m}",
                    mat.shape_text()
                )));
                ok = false;
            }
        }
        let comp = if ok {
            LinearComponent::new(s.into_matrix(n), cm.into_matrix(m), omega.into_matrix(m))
        } else {
            // placeholder with the declared shape keeps the network checks going
            LinearComponent::new(zeros(n, n), zeros(n, m), zeros(m, m))
        }
        .map_err(|e| name.error(e.to_string()))?
        .with_name(name.text.clone());
        Ok((comp, name))
    }

    fn network(&mut self, doc: &mut NetDocument, spans: &mut Spans) -> Result<(), ParseError> {
        self.sym('{')?;
        loop {
            let t = self.peek().clone();
            match &t.kind {
                TokenKind::Sym('}') => {
                    self.advance();
                    return Ok(());
                }
                TokenKind::Ident(kw) if kw == "use" => {
                    self.advance();
                    let inst = self.ident("an instance name")?;
                    self.sym(':')?;
                    let comp = self.ident("a component name")?;
                    self.sym(';')?;
                    doc.instances.push(Instance { name: inst.text.clone(), component: comp.text.clone() });
                    spans.instances.push([inst, comp]);
                }
                TokenKind::Ident(kw) if kw == "connect" => {
                    self.advance();
                    let (from, from_inst, from_port) = self.port("out")?;
                    self.arrow()?;
                    let (to, to_inst, to_port) = self.port("in")?;
                    self.sym(';')?;
                    doc.connections.push(Connection { from, to });
                    spans.connections.push([from_inst, from_port, to_inst, to_port]);
                }
                TokenKind::Ident(kw) if kw == "external" => {
                    self.advance();
                    let (input, inst, port) = self.port("in")?;
                    self.keyword("as")?;
                    let name = self.ident("a port name")?;
                    self.sym(';')?;
                    doc.externals.push(ExternalPort { input, name: name.text.clone() });
                    spans.externals.push([inst, port, name]);
                }
                _ => {
                    return Err(t.error(format!(
                        "expected `use`, `connect`, `external` or `}}`, found {}",
                        t.describe()
                    )))
                }
            }
        }
    }

    fn matrix(&mut self) -> Result<ParsedMatrix, ParseError> {
        let start = self.sym('[')?;
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        if self.peek().kind == TokenKind::Sym(']') {
            self.advance();
            return Ok(ParsedMatrix { rows, start });
        }
        loop {
            let row_start = self.sym('[')?;
            let mut row = Vec::new();
            if self.peek().kind != TokenKind::Sym(']') {
                loop {
                    row.push(self.cnum()?);
                    if self.peek().kind == TokenKind::Sym(',') {
                        self.advance();
                    } else {
                        break;
                    }
                }
            }
            self.sym(']')?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(row_start.error(format!(
                        "row has {} entries, expected {}",
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
            if self.peek().kind == TokenKind::Sym(',') {
                self.advance();
            } else {
                break;
            }
        }
        self.sym(']')?;
        Ok(ParsedMatrix { rows, start })
    }

    /// A real number with optional detached leading sign.
    fn signed_number(&mut self) -> Result<(f64, bool), ParseError> {
        let mut negate = false;
        let t = self.peek().clone();
        if let TokenKind::Sym(sign @ ('+' | '-')) = t.kind {
            self.advance();
            negate = sign == '-';
            let next = self.peek();
            if !matches!(next.kind, TokenKind::Number { signed: false, .. }) {
                return Err(next.error(format!("expected a number after `{sign}`, found {}", next.describe())));
            }
        }
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number { value, imag, .. } => {
                self.advance();
                Ok((if negate { -value } else { value }, imag))
            }
            _ => Err(t.error(format!("expected a number, found {}", t.describe()))),
        }
    }

    /// `FLOAT | FLOAT SIGN FLOAT "i" | FLOAT "i"`.
    fn cnum(&mut self) -> Result<Complex64, ParseError> {
        let (re, imag) = self.signed_number()?;
        if imag {
            return Ok(Complex64::new(0.0, re));
        }
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number { value, imag: true, signed: true, .. } => {
                self.advance();
                Ok(Complex64::new(re, value))
            }
            TokenKind::Sym(sign @ ('+' | '-')) => {
                self.advance();
                let next = self.peek().clone();
                match next.kind {
                    TokenKind::Number { value, imag: true, signed: false, .. } => {
                        self.advance();
                        Ok(Complex64::new(re, if sign == '-' { -value } else { value }))
                    }
                    _ => Err(next.error(format!("expected an imaginary part, found {}", next.describe()))),
                }
            }
            TokenKind::Number { .. } => Err(t.error(format!("expected `,` or `]`, found {}", t.describe()))),
            _ => Ok(Complex64::new(re, 0.0)),
        }
    }
}
