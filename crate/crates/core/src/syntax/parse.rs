//! Lexer and recursive-descent parser for `.pw` programs and cost expressions.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use super::ast::{is_identifier, BExp, CmpOp, Command, CostExpr, DistError, DistExpr, IntExpr, Sym, Var};
use crate::rational::{fmt_rat, is_unit_interval, Int, Rat};

const KEYWORDS: &[&str] = &[
    "skip", "abort", "tick", "if", "while", "true", "false", "and", "or", "not", "nat", "max",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    BadChar(char),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("probability {0} is outside [0,1]")]
    ProbabilityOutOfRange(String),
    #[error("tick rate {0} is negative")]
    NegativeTick(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid distribution: {0}")]
    Distribution(#[from] DistError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Int),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(i) => write!(f, "'{i}'"),
            Tok::Sym(s) => write!(f, "'{s}'"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &[
    ":=", "<>", "<=", ">=", "==", "!=", "&&", "||", ";", "{", "}", "[", "]", "(", ")", ":", ",", "/",
    "+", "-", "*", "<", ">", "=", "!", "?",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (start_line, start_col) = (line, col);
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let digits: String = chars[i..j].iter().collect();
            let value: Int = digits.parse().expect("digit run");
            col += j - i;
            i = j;
            out.push(Token { tok: Tok::Int(value), line: start_line, column: start_col });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            col += j - i;
            i = j;
            out.push(Token { tok: Tok::Ident(word), line: start_line, column: start_col });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line: start_line, column: start_col });
            }
            None => {
                return Err(ParseError { line, column: col, kind: ParseErrorKind::BadChar(c) });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.error_here(ParseErrorKind::Unexpected {
            expected: expected.to_string(),
            found: self.peek().to_string(),
        })
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == w)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{s}'")))
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(w) if !KEYWORDS.contains(&w.as_str()) => {
                self.bump();
                Ok(w)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn rat(&mut self) -> PResult<Rat> {
        let num = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                i
            }
            _ => return Err(self.unexpected("rational literal")),
        };
        if self.at_sym("/") && matches!(self.peek_at(1), Tok::Int(_)) {
            self.bump();
            let den = match self.bump() {
                Tok::Int(i) => i,
                _ => unreachable!(),
            };
            if den.is_zero() {
                return Err(self.error_here(ParseErrorKind::ZeroDenominator));
            }
            return Ok(Rat::new(num, den));
        }
        Ok(Rat::from_integer(num))
    }

    fn probability(&mut self) -> PResult<Rat> {
        let neg = self.at_sym("-");
        let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
        if neg {
            self.bump();
        }
        let p = self.rat()?;
        let p = if neg { -p } else { p };
        if !is_unit_interval(&p) {
            return Err(ParseError { line, column, kind: ParseErrorKind::ProbabilityOutOfRange(fmt_rat(&p)) });
        }
        Ok(p)
    }

    // ---- commands ----

    fn cmd(&mut self) -> PResult<Command> {
        let first = self.simple_cmd()?;
        if self.eat_sym(";") {
            if self.at_sym("}") || matches!(self.peek(), Tok::Eof) {
                return Ok(first);
            }
            let rest = self.cmd()?;
            return Ok(Command::seq(first, rest));
        }
        Ok(first)
    }

    fn block(&mut self) -> PResult<Command> {
        self.expect_sym("{")?;
        let c = self.cmd()?;
        self.expect_sym("}")?;
        Ok(c)
    }

    fn guards(&mut self) -> PResult<(BExp, BExp)> {
        self.expect_sym("[")?;
        let inv = self.bexp()?;
        self.expect_sym("]")?;
        self.expect_sym("(")?;
        let guard = self.bexp()?;
        self.expect_sym(")")?;
        Ok((inv, guard))
    }

    fn simple_cmd(&mut self) -> PResult<Command> {
        if self.eat_word("skip") {
            return Ok(Command::Skip);
        }
        if self.eat_word("abort") {
            return Ok(Command::Abort);
        }
        if self.eat_word("tick") {
            self.expect_sym("(")?;
            let neg = self.eat_sym("-");
            let r = self.rat()?;
            if neg && !r.is_zero() {
                return Err(self.error_here(ParseErrorKind::NegativeTick(fmt_rat(&-r))));
            }
            self.expect_sym(")")?;
            return Ok(Command::Tick(r));
        }
        if self.eat_word("if") {
            let (inv, guard) = self.guards()?;
            let then = self.block()?;
            let els = self.block()?;
            return Ok(Command::if_then_else(inv, guard, then, els));
        }
        if self.eat_word("while") {
            let (inv, guard) = self.guards()?;
            let body = self.block()?;
            return Ok(Command::while_loop(inv, guard, body));
        }
        if self.at_sym("{") {
            let left = self.block()?;
            if self.eat_sym("<>") {
                let right = self.block()?;
                return Ok(Command::ndchoice(left, right));
            }
            if self.eat_sym("[") {
                let p = self.probability()?;
                self.expect_sym("]")?;
                let right = self.block()?;
                return Ok(Command::PChoice(p, left.into(), right.into()));
            }
            // bare block: grouping only
            return Ok(left);
        }
        if let Tok::Ident(_) = self.peek() {
            let name = self.ident()?;
            self.expect_sym(":=")?;
            let d = self.dist()?;
            return Ok(Command::Assign(Var::new(name), d));
        }
        Err(self.unexpected("command"))
    }

    fn dist(&mut self) -> PResult<DistExpr> {
        if !self.at_sym("{") {
            return Ok(DistExpr::point(self.iexp()?));
        }
        let (line, column) = (self.toks[self.pos].line, self.toks[self.pos].column);
        self.bump();
        let mut branches = Vec::new();
        loop {
            let p = self.probability()?;
            self.expect_sym(":")?;
            let e = self.iexp()?;
            branches.push((p, e));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("}")?;
        DistExpr::new(branches).map_err(|e| ParseError { line, column, kind: e.into() })
    }

    // ---- integer expressions ----

    fn iexp(&mut self) -> PResult<IntExpr> {
        let mut acc = self.iterm()?;
        loop {
            if self.eat_sym("+") {
                acc = acc + self.iterm()?;
            } else if self.eat_sym("-") {
                acc = acc - self.iterm()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn iterm(&mut self) -> PResult<IntExpr> {
        let mut acc = self.iunary()?;
        while self.eat_sym("*") {
            acc = acc * self.iunary()?;
        }
        Ok(acc)
    }

    fn iunary(&mut self) -> PResult<IntExpr> {
        if self.eat_sym("-") {
            return Ok(match self.iunary()? {
                IntExpr::Const(c) => IntExpr::Const(-c),
                e => IntExpr::int(0) - e,
            });
        }
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(IntExpr::Const(i))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.iexp()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(_) => Ok(IntExpr::Var(Var::new(self.ident()?))),
            _ => Err(self.unexpected("integer expression")),
        }
    }

    // ---- boolean expressions ----

    fn bexp(&mut self) -> PResult<BExp> {
        let mut acc = self.band()?;
        while self.eat_sym("||") || self.eat_word("or") {
            acc = BExp::Or(Box::new(acc), Box::new(self.band()?));
        }
        Ok(acc)
    }

    fn band(&mut self) -> PResult<BExp> {
        let mut acc = self.bnot()?;
        while self.eat_sym("&&") || self.eat_word("and") {
            acc = BExp::And(Box::new(acc), Box::new(self.bnot()?));
        }
        Ok(acc)
    }

    fn bnot(&mut self) -> PResult<BExp> {
        if self.eat_sym("!") || self.eat_word("not") {
            return Ok(BExp::Not(Box::new(self.bnot()?)));
        }
        if self.eat_word("true") {
            return Ok(BExp::True);
        }
        if self.eat_word("false") {
            return Ok(BExp::False);
        }
        if self.at_sym("(") {
            let save = self.pos;
            self.bump();
            if let Ok(b) = self.bexp() {
                if self.eat_sym(")") && !self.at_cmp_op() && !self.at_arith_op() {
                    return Ok(b);
                }
            }
            self.pos = save;
        }
        let lhs = self.iexp()?;
        let op = self.cmp_op()?;
        let rhs = self.iexp()?;
        Ok(BExp::Cmp(op, lhs, rhs))
    }

    fn at_cmp_op(&self) -> bool {
        ["<", "<=", "=", "==", ">=", ">", "!="].iter().any(|s| self.at_sym(s))
    }

    fn at_arith_op(&self) -> bool {
        ["+", "-", "*"].iter().any(|s| self.at_sym(s))
    }

    fn cmp_op(&mut self) -> PResult<CmpOp> {
        let op = match self.peek() {
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym("=") | Tok::Sym("==") => CmpOp::Eq,
            Tok::Sym(">=") => CmpOp::Ge,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym("!=") => CmpOp::Ne,
            _ => return Err(self.unexpected("comparison operator")),
        };
        self.bump();
        Ok(op)
    }

    // ---- cost expressions ----

    fn cexp(&mut self) -> PResult<CostExpr> {
        let mut acc = self.cterm()?;
        while self.eat_sym("+") {
            acc = acc + self.cterm()?;
        }
        Ok(acc)
    }

    fn cterm(&mut self) -> PResult<CostExpr> {
        let mut acc = self.catom()?;
        while self.eat_sym("*") {
            acc = acc * self.catom()?;
        }
        Ok(acc)
    }

    fn catom(&mut self) -> PResult<CostExpr> {
        if self.eat_word("nat") {
            self.expect_sym("(")?;
            let a = self.iexp()?;
            self.expect_sym(")")?;
            return Ok(CostExpr::Nat(a));
        }
        if self.eat_word("max") {
            self.expect_sym("(")?;
            let a = self.cexp()?;
            self.expect_sym(",")?;
            let b = self.cexp()?;
            self.expect_sym(")")?;
            return Ok(CostExpr::max(a, b));
        }
        if self.eat_sym("[") {
            let phi = self.bexp()?;
            self.expect_sym("]")?;
            self.expect_sym("*")?;
            let c = self.catom()?;
            return Ok(CostExpr::iverson(phi, c));
        }
        if self.eat_sym("?") {
            let name = match self.bump() {
                Tok::Ident(w) if is_identifier(&w) => w,
                _ => return Err(self.unexpected("coefficient name")),
            };
            return Ok(CostExpr::Coeff(Sym::new(name)));
        }
        if self.eat_sym("(") {
            let c = self.cexp()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if let Tok::Int(_) = self.peek() {
            let r = self.rat()?;
            debug_assert!(!r.is_negative());
            return Ok(CostExpr::Const(r));
        }
        Err(self.unexpected("cost expression"))
    }
}

/// Parses a `.pw` program.
pub fn parse_program(text: &str) -> Result<Command, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.cmd()?;
    p.expect_eof()?;
    Ok(c)
}

pub fn parse_cost_expr(text: &str) -> Result<CostExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let c = p.cexp()?;
    p.expect_eof()?;
    Ok(c)
}

pub fn parse_bexp(text: &str) -> Result<BExp, ParseError> {
    let mut p = Parser::new(text)?;
    let b = p.bexp()?;
    p.expect_eof()?;
    Ok(b)
}

pub fn parse_int_expr(text: &str) -> Result<IntExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.iexp()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses `1/2`-style literals outside of a program (CLI flags, invariant files).
pub fn parse_rat(text: &str) -> Result<Rat, ParseError> {
    let mut p = Parser::new(text)?;
    let neg = p.eat_sym("-");
    let r = p.rat()?;
    p.expect_eof()?;
    Ok(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn tick_literal() {
        assert_eq!(parse_program("tick(3/2)").unwrap(), Command::Tick(rat(3, 2)));
    }

    #[test]
    fn countdown_shape() {
        let c = parse_program("while [x >= 0] (x > 0) { tick(1); x := x - 1 }").unwrap();
        let x = IntExpr::var("x");
        let expected = Command::while_loop(
            BExp::cmp(CmpOp::Ge, x.clone(), IntExpr::int(0)),
            BExp::cmp(CmpOp::Gt, x.clone(), IntExpr::int(0)),
            Command::seq(Command::Tick(rat(1, 1)), Command::assign("x", x - IntExpr::int(1))),
        );
        assert_eq!(c, expected);
    }

    #[test]
    fn distribution_total_checked() {
        let err = parse_program("x := {1/2: 0, 1/3: 1}").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Distribution(DistError::BadTotal("5/6".into())));
        assert_eq!((err.line, err.column), (1, 6));
    }

    #[test]
    fn probability_range_checked() {
        let err = parse_program("{skip}[3/2]{skip}").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::ProbabilityOutOfRange("3/2".into()));
        assert!(parse_program("x := {2: 0}").is_err());
    }

    #[test]
    fn seq_is_right_associated() {
        let c = parse_program("skip; abort; tick(1)").unwrap();
        assert_eq!(
            c,
            Command::seq(Command::Skip, Command::seq(Command::Abort, Command::Tick(rat(1, 1))))
        );
        let grouped = parse_program("{skip; abort}; tick(1)").unwrap();
        assert_eq!(
            grouped,
            Command::seq(Command::seq(Command::Skip, Command::Abort), Command::Tick(rat(1, 1)))
        );
    }

    #[test]
    fn comments_and_whitespace() {
        let c = parse_program("# header\n skip ;   # trailing\n\n abort\n").unwrap();
        assert_eq!(c, Command::seq(Command::Skip, Command::Abort));
    }

    #[test]
    fn error_positions() {
        let err = parse_program("skip;\n  x = 1").unwrap_err();
        assert_eq!((err.line, err.column), (2, 5));
        let err = parse_program("tick(1) $").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadChar('$'));
    }

    #[test]
    fn parenthesized_comparisons() {
        let b = parse_bexp("(x + 1) > 0 && !(y = 2)").unwrap();
        let expected = BExp::And(
            Box::new(BExp::cmp(CmpOp::Gt, IntExpr::var("x") + IntExpr::int(1), IntExpr::int(0))),
            Box::new(BExp::Not(Box::new(BExp::cmp(CmpOp::Eq, IntExpr::var("y"), IntExpr::int(2))))),
        );
        assert_eq!(b, expected);
    }

    #[test]
    fn cost_expressions() {
        let c = parse_cost_expr("[x > 0]*5 + 1/2*nat(x - y) * max(?q0, 2)").unwrap();
        let x = IntExpr::var("x");
        let expected = CostExpr::iverson(BExp::cmp(CmpOp::Gt, x.clone(), IntExpr::int(0)), CostExpr::Const(rat(5, 1)))
            + (CostExpr::Const(rat(1, 2)) * CostExpr::nat(x - IntExpr::var("y")))
                * CostExpr::max(CostExpr::Coeff(Sym::new("q0")), CostExpr::Const(rat(2, 1)));
        assert_eq!(c, expected);
    }

    #[test]
    fn negative_literals() {
        assert_eq!(parse_int_expr("x - -3").unwrap(), IntExpr::var("x") - IntExpr::int(-3));
        assert_eq!(parse_int_expr("-x").unwrap(), IntExpr::int(0) - IntExpr::var("x"));
        assert_eq!(parse_rat("-7/2").unwrap(), rat(-7, 2));
    }
}
