use super::error::{DiagramError, Pos};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(f64),
    Let,
    Eq,
    Semi,
    Star,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(x) => format!("number {x}"),
            Tok::Let => "`let`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Star => "`*`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

/// Splits source into tokens. Comments run from `#` or `//` to end of line.
pub fn lex(src: &str) -> Result<Vec<Token>, DiagramError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let ch = chars[i];
        let pos = Pos { line, col };
        if ch == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if ch == '#' || (ch == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let single = match ch {
            '=' => Some(Tok::Eq),
            ';' => Some(Tok::Semi),
            '*' => Some(Tok::Star),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token { tok, pos });
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        if ch.is_ascii_alphabetic() || ch == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if word == "let" { Tok::Let } else { Tok::Ident(word) };
            out.push(Token { tok, pos });
        } else if ch.is_ascii_digit() || ch == '.' || ch == '-' || ch == '+' {
            i += 1;
            while i < chars.len() {
                let c = chars[i];
                let exp_sign = (c == '-' || c == '+') && matches!(chars[i - 1], 'e' | 'E');
                if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let x: f64 = text.parse().map_err(|_| DiagramError::Syntax {
                pos,
                msg: format!("malformed number `{text}`"),
            })?;
            out.push(Token { tok: Tok::Number(x), pos });
        } else {
            return Err(DiagramError::Syntax { pos, msg: format!("unexpected character `{ch}`") });
        }
        col += i - start;
    }
    out.push(Token { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
