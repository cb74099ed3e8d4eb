use std::fmt;

use crate::features::Feature;
use crate::model::{Address, Value};
use crate::scheduler::SchedulingStrategy;

use super::ast::{Cmp, Decl, Expectation, OpSpec, Scenario, TxSpec};
use super::lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: expected {}, found {}",
            self.line, self.column, self.expected, self.found
        )
    }
}

const TOP_LEVEL: [&str; 7] = [
    "account",
    "contract",
    "strategy",
    "features",
    "fuel",
    "transaction",
    "expect",
];

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let mut p = Parser {
        toks: tokenize(text),
        pos: 0,
    };
    p.scenario()
}

/// Parses a single value literal, such as `(pair 9 @bad)`.
pub fn parse_value(text: &str) -> Result<Value, ParseError> {
    let mut p = Parser {
        toks: tokenize(text),
        pos: 0,
    };
    let v = p.value()?;
    p.eof("end of input")?;
    Ok(v)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(t: &Token, expected: &str) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            expected: expected.to_string(),
            found: match &t.tok {
                Tok::Invalid(_) => format!("malformed {t}"),
                _ => t.to_string(),
            },
        }
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        let expected = match &t.tok {
            Tok::Invalid(what) => format!("{expected} ({what})"),
            _ => expected.to_string(),
        };
        Self::error_at(t, &expected)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        if self.at_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    fn punct(&mut self, tok: Tok, shown: &str) -> PResult<()> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("`{shown}`")))
        }
    }

    fn eof(&mut self, expected: &str) -> PResult<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match self.peek().tok {
            Tok::Nat(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.error("natural number")),
        }
    }

    fn address(&mut self) -> PResult<Address> {
        match &self.peek().tok {
            Tok::Addr(a) => {
                let a = Address::new(a.clone()).expect("lexer only accepts address characters");
                self.bump();
                Ok(a)
            }
            _ => Err(self.error("address")),
        }
    }

    fn scenario(&mut self) -> PResult<Scenario> {
        self.keyword("scenario")?;
        let name = match &self.peek().tok {
            Tok::Str(s) => {
                let s = s.clone();
                self.bump();
                s
            }
            _ => return Err(self.error("string")),
        };
        let mut decls = vec![];
        while let Some(d) = self.decl()? {
            decls.push(d);
        }
        let mut transactions = vec![];
        while self.at_keyword("transaction") {
            transactions.push(self.transaction()?);
        }
        let mut expectations = vec![];
        while self.at_keyword("expect") {
            expectations.push(self.expectation()?);
        }
        let expected = if !expectations.is_empty() {
            "expectation or end of input"
        } else if !transactions.is_empty() {
            "transaction, expectation or end of input"
        } else {
            "declaration, transaction, expectation or end of input"
        };
        self.eof(expected)?;
        Ok(Scenario {
            name,
            decls,
            transactions,
            expectations,
        })
    }

    fn decl(&mut self) -> PResult<Option<Decl>> {
        let Tok::Ident(kw) = &self.peek().tok else {
            return Ok(None);
        };
        let decl = match kw.as_str() {
            "account" => {
                self.bump();
                let addr = self.address()?;
                self.keyword("balance")?;
                Decl::Account {
                    addr,
                    balance: self.nat()?,
                }
            }
            "contract" => {
                self.bump();
                let addr = self.address()?;
                self.keyword("code")?;
                let code = self.ident("code key")?.into();
                self.keyword("config")?;
                let config = self.value()?;
                self.keyword("storage")?;
                let storage = self.value()?;
                self.keyword("balance")?;
                let balance = self.nat()?;
                let contextual = self.at_keyword("contextual");
                if contextual {
                    self.bump();
                }
                Decl::Contract {
                    addr,
                    code,
                    config,
                    storage,
                    balance,
                    contextual,
                }
            }
            "strategy" => {
                self.bump();
                let t = self.peek().clone();
                let name = self.ident("`bfs` or `dfs`")?;
                let s = name
                    .parse::<SchedulingStrategy>()
                    .map_err(|_| Self::error_at(&t, "`bfs` or `dfs`"))?;
                Decl::Strategy(s)
            }
            "features" => {
                self.bump();
                let mut feats = vec![self.feature()?];
                while matches!(&self.peek().tok, Tok::Ident(s) if !TOP_LEVEL.contains(&s.as_str()))
                {
                    feats.push(self.feature()?);
                }
                Decl::Features(feats)
            }
            "fuel" => {
                self.bump();
                Decl::Fuel(self.nat()?)
            }
            _ => return Ok(None),
        };
        Ok(Some(decl))
    }

    fn feature(&mut self) -> PResult<Feature> {
        let t = self.peek().clone();
        let name = self.ident("feature name")?;
        name.parse().map_err(|_| Self::error_at(&t, "feature name"))
    }

    fn transaction(&mut self) -> PResult<TxSpec> {
        self.keyword("transaction")?;
        self.keyword("from")?;
        let author = self.address()?;
        let ops = self.block()?;
        Ok(TxSpec { author, ops })
    }

    fn block(&mut self) -> PResult<Vec<OpSpec>> {
        self.punct(Tok::LBrace, "{")?;
        let mut ops = vec![];
        while self.peek().tok != Tok::RBrace {
            ops.push(self.op()?);
        }
        self.bump();
        Ok(ops)
    }

    fn address_list(&mut self) -> PResult<Vec<Address>> {
        self.punct(Tok::LBracket, "[")?;
        let mut addrs = vec![];
        loop {
            match &self.peek().tok {
                Tok::RBracket => {
                    self.bump();
                    return Ok(addrs);
                }
                Tok::Addr(_) => addrs.push(self.address()?),
                _ => return Err(self.error("address or `]`")),
            }
        }
    }

    fn op(&mut self) -> PResult<OpSpec> {
        let expected = "operation or `}`";
        let Tok::Ident(kw) = &self.peek().tok else {
            return Err(self.error(expected));
        };
        match kw.as_str() {
            "transfer" => {
                self.bump();
                let amount = self.nat()?;
                self.keyword("to")?;
                let dest = self.address()?;
                let call = if self.at_keyword("call") {
                    self.bump();
                    let entry = self.ident("entrypoint name")?;
                    self.punct(Tok::LParen, "(")?;
                    let mut args = vec![];
                    if self.peek().tok != Tok::RParen {
                        args.push(self.value()?);
                        while self.peek().tok == Tok::Comma {
                            self.bump();
                            args.push(self.value()?);
                        }
                    }
                    self.punct(Tok::RParen, ")")?;
                    Some((entry, args))
                } else {
                    None
                };
                Ok(OpSpec::Transfer { amount, dest, call })
            }
            "create" => {
                self.bump();
                let addr = self.address()?;
                self.keyword("code")?;
                let code = self.ident("code key")?.into();
                self.keyword("config")?;
                let config = self.value()?;
                self.keyword("storage")?;
                let storage = self.value()?;
                self.keyword("balance")?;
                let balance = self.nat()?;
                Ok(OpSpec::Create {
                    addr,
                    code,
                    config,
                    storage,
                    balance,
                })
            }
            "atomic" => {
                self.bump();
                Ok(OpSpec::Atomic(self.block()?))
            }
            "context" => {
                self.bump();
                Ok(OpSpec::Context(self.block()?))
            }
            "allow" => {
                self.bump();
                let addrs = self.address_list()?;
                Ok(OpSpec::Allow(addrs, self.block()?))
            }
            "block" => {
                self.bump();
                let addrs = self.address_list()?;
                Ok(OpSpec::Block(addrs, self.block()?))
            }
            "end_interactions" => {
                self.bump();
                Ok(OpSpec::EndInteractions)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn expectation(&mut self) -> PResult<Expectation> {
        self.keyword("expect")?;
        let expected = "`balance`, `storage`, `commit`, `revert` or `total`";
        let Tok::Ident(kw) = &self.peek().tok else {
            return Err(self.error(expected));
        };
        match kw.as_str() {
            "balance" => {
                self.bump();
                let addr = self.address()?;
                let cmp = match self.peek().tok {
                    Tok::Eq => Cmp::Eq,
                    Tok::Lt => Cmp::Lt,
                    Tok::Gt => Cmp::Gt,
                    _ => return Err(self.error("`=`, `<` or `>`")),
                };
                self.bump();
                Ok(Expectation::Balance {
                    addr,
                    cmp,
                    value: self.nat()?,
                })
            }
            "storage" => {
                self.bump();
                let addr = self.address()?;
                self.punct(Tok::Eq, "=")?;
                Ok(Expectation::Storage {
                    addr,
                    value: self.value()?,
                })
            }
            "commit" => {
                self.bump();
                Ok(Expectation::Commit)
            }
            "revert" => {
                self.bump();
                Ok(Expectation::Revert)
            }
            "total" => {
                self.bump();
                self.punct(Tok::Eq, "=")?;
                Ok(Expectation::Total(self.nat()?))
            }
            _ => Err(self.error(expected)),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        let t = self.peek().clone();
        let v = match &t.tok {
            Tok::Nat(n) => Value::Nat(*n),
            Tok::Int(i) => Value::Int(*i),
            Tok::Str(s) => Value::String(s.clone()),
            Tok::Addr(_) => return self.address().map(Value::Address),
            Tok::Ident(kw) => match kw.as_str() {
                "true" => Value::Bool(true),
                "false" => Value::Bool(false),
                "unit" => Value::Unit,
                "mutez" => {
                    self.bump();
                    return Ok(Value::Mutez(self.nat()?.into()));
                }
                _ => return Err(self.error("value")),
            },
            Tok::LParen => {
                self.bump();
                self.keyword("pair")?;
                let l = self.value()?;
                let r = self.value()?;
                self.punct(Tok::RParen, ")")?;
                return Ok(Value::pair(l, r));
            }
            Tok::LBracket => {
                self.bump();
                let mut items = vec![];
                if self.peek().tok != Tok::RBracket {
                    self.list_item(&mut items)?;
                    while self.peek().tok == Tok::Comma {
                        self.bump();
                        self.list_item(&mut items)?;
                    }
                }
                self.punct(Tok::RBracket, "]")?;
                return Ok(Value::List(items));
            }
            _ => return Err(self.error("value")),
        };
        self.bump();
        Ok(v)
    }

    fn list_item(&mut self, items: &mut Vec<Value>) -> PResult<()> {
        let start = self.peek().clone();
        items.push(self.value()?);
        if Value::List(items.clone()).is_homogeneous() {
            Ok(())
        } else {
            let tag = items[0]
                .type_tag()
                .map_or_else(|| "the first element".to_string(), |t| t.to_string());
            Err(Self::error_at(
                &start,
                &format!("list element of type {tag}"),
            ))
        }
    }
}
