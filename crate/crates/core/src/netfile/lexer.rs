use super::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TokenKind {
    Ident(String),
    /// A numeric literal. `signed` means the sign was glued to the digits
    /// (`-0.25i`); `integer` means plain decimal digits only.
    Number {
        value: f64,
        imag: bool,
        signed: bool,
        integer: bool,
    },
    Sym(char),
    Arrow,
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
            snippet: self.text.clone(),
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map_or(self.src.len(), |&(i, _)| i)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_digits(&mut self) -> usize {
        let mut n = 0;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
            n += 1;
        }
        n
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut cur = Cursor { chars: src.char_indices().peekable(), src, line: 1, column: 1 };
    let mut tokens = Vec::new();

    loop {
        // whitespace and comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else {
                break;
            }
        }

        let (line, column) = (cur.line, cur.column);
        let start = cur.offset();
        let Some(c) = cur.peek() else {
            tokens.push(Token { kind: TokenKind::Eof, text: String::new(), line, column });
            return Ok(tokens);
        };

        let kind = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            TokenKind::Ident(src[start..cur.offset()].to_string())
        } else if c == '-' && cur.peek2() == Some('>') {
            cur.bump();
            cur.bump();
            TokenKind::Arrow
        } else if c.is_ascii_digit() || ((c == '-' || c == '+') && cur.peek2().is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur, start, line, column)?
        } else if "{}[]=;:,.+-".contains(c) {
            cur.bump();
            TokenKind::Sym(c)
        } else {
            cur.bump();
            return Err(ParseError {
                line,
                column,
                message: format!("unexpected character `{c}`"),
                snippet: c.to_string(),
            });
        };
        let end = cur.offset();
        tokens.push(Token { kind, text: src[start..end].to_string(), line, column });
    }
}

fn lex_number(cur: &mut Cursor<'_>, start: usize, line: usize, column: usize) -> Result<TokenKind, ParseError> {
    let mut signed = false;
    if matches!(cur.peek(), Some('+' | '-')) {
        cur.bump();
        signed = true;
    }
    cur.eat_digits();
    let mut integer = !signed;
    if cur.peek() == Some('.') && cur.peek2().is_some_and(|d| d.is_ascii_digit()) {
        cur.bump();
        cur.eat_digits();
        integer = false;
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let save = (cur.chars.clone(), cur.line, cur.column);
        cur.bump();
        if matches!(cur.peek(), Some('+' | '-')) {
            cur.bump();
        }
        if cur.eat_digits() == 0 {
            // not an exponent after all
            (cur.chars, cur.line, cur.column) = save;
        } else {
            integer = false;
        }
    }
    let digits_end = cur.offset();
    let mut imag = false;
    if cur.peek() == Some('i') && !cur.peek2().is_some_and(is_ident_continue) {
        cur.bump();
        imag = true;
        integer = false;
    }
    let end = cur.offset();
    let text = &cur.src[start..end];
    if cur.peek().is_some_and(is_ident_continue) {
        let mut bad_end = end;
        while cur.peek().is_some_and(is_ident_continue) {
            cur.bump();
            bad_end = cur.offset();
        }
        return Err(ParseError {
            line,
            column,
            message: "malformed number".to_string(),
            snippet: cur.src[start..bad_end].to_string(),
        });
    }
    let value: f64 = cur.src[start..digits_end].parse().map_err(|_| ParseError {
        line,
        column,
        message: "malformed number".to_string(),
        snippet: text.to_string(),
    })?;
    if !value.is_finite() {
        return Err(ParseError {
            line,
            column,
            message: "number out of range".to_string(),
            snippet: text.to_string(),
        });
    }
    Ok(TokenKind::Number { value, imag, signed, integer })
}
