//! Tokens with 1-based positions. Malformed input becomes an `Invalid`
//! token so the parser reports it only when it gets there.

use std::fmt;

use crate::model::is_address_char;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Nat(u64),
    /// Explicitly signed integer, `+3` or `-3`.
    Int(i64),
    Str(String),
    Addr(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Eq,
    Lt,
    Gt,
    Invalid(String),
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    /// Source text, used in error messages.
    pub text: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tok {
            Tok::Eof => f.write_str("end of input"),
            _ => write!(f, "`{}`", self.text),
        }
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn take_while(&mut self, mut pred: impl FnMut(char) -> bool, out: &mut String) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
    }
}

pub fn tokenize(src: &str) -> Vec<Token> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = vec![];
    loop {
        while let Some(c) = cur.peek() {
            if c == '#' {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            } else if c.is_whitespace() {
                cur.bump();
            } else {
                break;
            }
        }
        let (line, column) = (cur.line, cur.column);
        let Some(c) = cur.bump() else {
            out.push(Token {
                tok: Tok::Eof,
                text: String::new(),
                line,
                column,
            });
            return out;
        };
        let mut text = c.to_string();
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            '<' => Tok::Lt,
            '>' => Tok::Gt,
            '"' => lex_string(&mut cur, &mut text),
            '@' => {
                cur.take_while(is_address_char, &mut text);
                if text.len() == 1 {
                    Tok::Invalid("address name".into())
                } else {
                    Tok::Addr(text[1..].to_string())
                }
            }
            '+' | '-' if cur.peek().is_some_and(|d| d.is_ascii_digit()) => {
                cur.take_while(|d| d.is_ascii_digit(), &mut text);
                match text.parse::<i64>() {
                    Ok(i) => Tok::Int(i),
                    Err(_) => Tok::Invalid("integer in range".into()),
                }
            }
            d if d.is_ascii_digit() => {
                cur.take_while(|d| d.is_ascii_digit(), &mut text);
                match text.parse::<u64>() {
                    Ok(n) => Tok::Nat(n),
                    Err(_) => Tok::Invalid("natural number in range".into()),
                }
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                cur.take_while(|c| c.is_ascii_alphanumeric() || c == '_', &mut text);
                Tok::Ident(text.clone())
            }
            _ => Tok::Invalid("token".into()),
        };
        out.push(Token {
            tok,
            text,
            line,
            column,
        });
    }
}

fn lex_string(cur: &mut Cursor<'_>, text: &mut String) -> Tok {
    let mut value = String::new();
    loop {
        let Some(c) = cur.bump() else {
            return Tok::Invalid("closing quote".into());
        };
        text.push(c);
        match c {
            '"' => return Tok::Str(value),
            '\\' => {
                let Some(e) = cur.bump() else {
                    return Tok::Invalid("closing quote".into());
                };
                text.push(e);
                match e {
                    '"' => value.push('"'),
                    '\\' => value.push('\\'),
                    'n' => value.push('\n'),
                    't' => value.push('\t'),
                    'r' => value.push('\r'),
                    _ => return Tok::Invalid("string escape".into()),
                }
            }
            '\n' => return Tok::Invalid("closing quote".into()),
            c => value.push(c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        tokenize(src).into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn lexes_the_basic_shapes() {
        assert_eq!(
            kinds("transfer 0 to @bad # trailing\n -5 +7 \"a\\\"b\""),
            vec![
                Tok::Ident("transfer".into()),
                Tok::Nat(0),
                Tok::Ident("to".into()),
                Tok::Addr("bad".into()),
                Tok::Int(-5),
                Tok::Int(7),
                Tok::Str("a\"b".into()),
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("a\n  @b");
        assert_eq!((toks[0].line, toks[0].column), (1, 1));
        assert_eq!((toks[1].line, toks[1].column), (2, 3));
        assert_eq!((toks[2].line, toks[2].column), (2, 5));
    }

    #[test]
    fn malformed_input_becomes_invalid() {
        assert!(matches!(kinds("@")[0], Tok::Invalid(_)));
        assert!(matches!(kinds("\"open")[0], Tok::Invalid(_)));
        assert!(matches!(kinds("99999999999999999999")[0], Tok::Invalid(_)));
        assert!(matches!(kinds("$")[0], Tok::Invalid(_)));
        assert_eq!(tokenize("é").len(), 2);
    }
}
