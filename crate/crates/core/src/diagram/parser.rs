//! Recursive-descent parser that builds diagrams directly.
//!
//! ```text
//! program := decl* expr
//! decl    := "let" ID "=" expr
//! expr    := term (";" term)*
//! term    := factor ("*" factor)*
//! factor  := ID | BUILTIN "(" args ")" | "(" expr ")"
//! ```

use std::collections::HashMap;

use crate::theory::ProcessRep;

use super::builtins::{self, Arg};
use super::error::DiagramError;
use super::graph::Diagram;
use super::lexer::{lex, Tok, Token};

pub fn parse(src: &str) -> Result<Diagram, DiagramError> {
    parse_with_env(src, &HashMap::new())
}

/// Parses with extra named processes available as identifiers.
pub fn parse_with_env(src: &str, env: &HashMap<String, ProcessRep>) -> Result<Diagram, DiagramError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, at: 0, env, lets: HashMap::new() };
    p.program()
}

struct Parser<'a> {
    tokens: Vec<Token>,
    at: usize,
    env: &'a HashMap<String, ProcessRep>,
    lets: HashMap<String, Diagram>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Token, DiagramError> {
        let t = self.bump();
        if t.tok == want {
            Ok(t)
        } else {
            Err(DiagramError::Syntax {
                pos: t.pos,
                msg: format!("expected {}, found {}", want.describe(), t.tok.describe()),
            })
        }
    }

    fn program(&mut self) -> Result<Diagram, DiagramError> {
        while self.peek().tok == Tok::Let {
            self.bump();
            let name_tok = self.bump();
            let name = match name_tok.tok {
                Tok::Ident(n) if !builtins::is_builtin(&n) => n,
                other => {
                    return Err(DiagramError::Syntax {
                        pos: name_tok.pos,
                        msg: format!("expected a new name after `let`, found {}", other.describe()),
                    })
                }
            };
            self.expect(Tok::Eq)?;
            let d = self.expr()?;
            self.lets.insert(name, d);
        }
        let d = self.expr()?;
        let t = self.peek();
        if t.tok != Tok::Eof {
            return Err(DiagramError::Syntax {
                pos: t.pos,
                msg: format!("unexpected {} after expression", t.tok.describe()),
            });
        }
        Ok(d)
    }

    fn expr(&mut self) -> Result<Diagram, DiagramError> {
        let mut d = self.term()?;
        while self.peek().tok == Tok::Semi {
            let seam = self.bump().pos;
            let rhs = self.term()?;
            d = d.seq(&rhs, Some(seam))?;
        }
        Ok(d)
    }

    fn term(&mut self) -> Result<Diagram, DiagramError> {
        let mut d = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.bump();
            let rhs = self.factor()?;
            d = d.par(&rhs);
        }
        Ok(d)
    }

    fn factor(&mut self) -> Result<Diagram, DiagramError> {
        let t = self.bump();
        match t.tok {
            Tok::LParen => {
                let d = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(d)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    if !builtins::is_builtin(&name) {
                        return Err(DiagramError::UnknownName { pos: t.pos, name });
                    }
                    let open = self.at;
                    self.bump();
                    let args = self.args(Tok::RParen)?;
                    let process = builtins::instantiate(&name, t.pos, &args)?;
                    let label = self.source_label(&name, open);
                    return Ok(Diagram::single(label, process));
                }
                if let Some(d) = self.lets.get(&name) {
                    return Ok(d.clone());
                }
                if let Some(p) = self.env.get(&name) {
                    return Ok(Diagram::single(name, p.clone()));
                }
                Err(DiagramError::UnknownName { pos: t.pos, name })
            }
            other => Err(DiagramError::Syntax {
                pos: t.pos,
                msg: format!("expected a process, found {}", other.describe()),
            }),
        }
    }

    /// `name(args)` rebuilt from the argument tokens after `open`.
    fn source_label(&self, name: &str, open: usize) -> String {
        let parts: Vec<String> = self.tokens[open + 1..self.at - 1]
            .iter()
            .map(|t| match &t.tok {
                Tok::Ident(s) => s.clone(),
                Tok::Number(x) => format!("{x}"),
                Tok::Comma => ", ".into(),
                Tok::Star => "*".into(),
                Tok::LBracket => "[".into(),
                Tok::RBracket => "]".into(),
                _ => String::new(),
            })
            .collect();
        format!("{name}({})", parts.concat())
    }

    fn args(&mut self, close: Tok) -> Result<Vec<Arg>, DiagramError> {
        let mut args = Vec::new();
        if self.peek().tok == close {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.arg()?);
            let t = self.bump();
            if t.tok == close {
                return Ok(args);
            }
            if t.tok != Tok::Comma {
                return Err(DiagramError::Syntax {
                    pos: t.pos,
                    msg: format!("expected `,` or {}, found {}", close.describe(), t.tok.describe()),
                });
            }
        }
    }

    fn arg(&mut self) -> Result<Arg, DiagramError> {
        let t = self.bump();
        match t.tok {
            Tok::Number(x) => Ok(Arg::Number(x, t.pos)),
            Tok::LBracket => Ok(Arg::List(self.args(Tok::RBracket)?, t.pos)),
            Tok::Ident(first) => {
                let mut label = first;
                while self.peek().tok == Tok::Star {
                    self.bump();
                    let next = self.bump();
                    match next.tok {
                        Tok::Ident(s) => {
                            label.push('*');
                            label.push_str(&s);
                        }
                        other => {
                            return Err(DiagramError::Syntax {
                                pos: next.pos,
                                msg: format!("expected a system type, found {}", other.describe()),
                            })
                        }
                    }
                }
                Ok(Arg::Name(label, t.pos))
            }
            other => Err(DiagramError::Syntax {
                pos: t.pos,
                msg: format!("expected an argument, found {}", other.describe()),
            }),
        }
    }
}
