//! Tokenizer and s-expression reader for the PDDL subset.

use std::fmt;

use super::error::PddlError;

/// 1-based line and column in the source text.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SExpr {
    Atom { text: String, pos: Pos },
    List { items: Vec<SExpr>, pos: Pos },
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom { pos, .. } | SExpr::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom { text, .. } => Some(text),
            SExpr::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List { items, .. } => Some(items),
            SExpr::Atom { .. } => None,
        }
    }

    /// Case-insensitive keyword comparison for atoms.
    pub fn is_keyword(&self, kw: &str) -> bool {
        self.as_atom().is_some_and(|t| t.eq_ignore_ascii_case(kw))
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Symbol(String),
}

fn is_symbol_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '-' | '_' | '?' | ':' | '*' | '.' | '=' | '<' | '>' | '+' | '/')
}

fn tokenize(text: &str) -> Result<Vec<(Token, Pos)>, PddlError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                chars.next();
                col += 1;
                out.push((Token::Open, pos));
            }
            ')' => {
                chars.next();
                col += 1;
                out.push((Token::Close, pos));
            }
            c if is_symbol_char(c) => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_symbol_char(c) {
                        break;
                    }
                    s.push(c);
                    chars.next();
                    col += 1;
                }
                out.push((Token::Symbol(s), pos));
            }
            other => {
                return Err(PddlError::Lexical {
                    pos,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Reads exactly one top-level s-expression list from `text`.
pub fn read(text: &str) -> Result<SExpr, PddlError> {
    let tokens = tokenize(text)?;
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut result = None;
    for (tok, pos) in tokens {
        if result.is_some() {
            return Err(PddlError::Syntax {
                pos,
                msg: "trailing input after top-level expression".into(),
            });
        }
        match tok {
            Token::Open => stack.push((Vec::new(), pos)),
            Token::Close => {
                let (items, open) = stack.pop().ok_or(PddlError::Syntax {
                    pos,
                    msg: "unbalanced ')'".into(),
                })?;
                let list = SExpr::List { items, pos: open };
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            Token::Symbol(text) => match stack.last_mut() {
                Some((parent, _)) => parent.push(SExpr::Atom { text, pos }),
                None => {
                    return Err(PddlError::Syntax {
                        pos,
                        msg: format!("symbol '{text}' outside of any list"),
                    })
                }
            },
        }
    }
    if let Some((_, open)) = stack.pop() {
        return Err(PddlError::Syntax {
            pos: open,
            msg: "unclosed '('".into(),
        });
    }
    result.ok_or(PddlError::Syntax {
        pos: Pos { line: 1, col: 1 },
        msg: "empty input".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let e = read("(a (b c)\n ; comment\n (d))").unwrap();
        let items = e.as_list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[2].pos(), Pos { line: 3, col: 2 });
    }

    #[test]
    fn lexical_error_reports_position() {
        let err = read("(a\n  #b)").unwrap_err();
        match err {
            PddlError::Lexical { pos, .. } => assert_eq!(pos, Pos { line: 2, col: 3 }),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn unbalanced_is_syntax_error() {
        assert!(matches!(read("(a (b)"), Err(PddlError::Syntax { .. })));
        assert!(matches!(read("(a))"), Err(PddlError::Syntax { .. })));
    }
}
