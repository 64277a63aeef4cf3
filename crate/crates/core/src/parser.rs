//! Surface syntax: lexer, recursive-descent parser and pretty-printer.
//!
//! The grammar is documented in the repository README. The printer
//! parenthesizes generously so that `parse(pretty(t))` is α-equal to `t`.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use crate::error::SyntaxError;
use crate::lang::{name, Arm, DensBase, PrimOp, Term, Ty};
use crate::prims::PrimRegistry;

const KEYWORDS: &[&str] = &[
    "let", "in", "if", "then", "else", "case", "of", "fun", "return", "sample", "score", "norm", "thunk", "force",
    "fst", "snd", "true", "false", "inf", "nan",
];

const INFIX: &[&str] = &["+", "-", "*", "/", "<", ">", "<=", ">=", "=="];

const MAX_DEPTH: usize = 400;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Float(f64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Float(x) => format!("`{x:?}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &[
    "=>", "->", "<=", ">=", "==", "(", ")", "{", "}", ",", ";", ":", ".", "|", "=", "+", "-", "*", "/", "<", ">", "\\",
    "λ",
];

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, message: String| SyntaxError { line, column, message, expected: Vec::new() };
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
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_float = false;
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_float = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_float = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if is_float {
                Tok::Float(text.parse().map_err(|_| err(start_line, start_col, format!("bad number `{text}`")))?)
            } else {
                match text.parse::<u64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => Tok::Float(
                        text.parse().map_err(|_| err(start_line, start_col, format!("bad number `{text}`")))?,
                    ),
                }
            };
            out.push(Spanned { tok, line: start_line, column: start_col });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            if c == 'λ' {
                i += 1;
                col += 1;
                out.push(Spanned { tok: Tok::Sym("λ"), line: start_line, column: start_col });
                continue;
            }
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                && chars[i] != 'λ'
            {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: start_line,
                column: start_col,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                let n = s.chars().count();
                i += n;
                col += n;
                out.push(Spanned { tok: Tok::Sym(s), line: start_line, column: start_col });
            }
            None => return Err(err(start_line, start_col, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

/// Parses a program against the standard primitive registry.
pub fn parse(src: &str) -> Result<Term, SyntaxError> {
    parse_with(src, PrimRegistry::standard())
}

pub fn parse_with(src: &str, prims: &PrimRegistry) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(src, prims)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_type(src: &str) -> Result<Ty, SyntaxError> {
    let mut p = Parser::new(src, PrimRegistry::standard())?;
    let t = p.ty()?;
    p.expect_eof()?;
    Ok(t)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    prims: &'a PrimRegistry,
    scope: Vec<String>,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &str, prims: &'a PrimRegistry) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(src)?, pos: 0, prims, scope: Vec::new(), depth: 0 })
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

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let here = &self.toks[self.pos];
        SyntaxError {
            line: here.line,
            column: here.column,
            message: format!("unexpected {}", here.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{s}`")]))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SyntaxError> {
        if self.is_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{kw}`")]))
        }
    }

    fn expect_eof(&self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    fn binder(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let mut e = self.error(&[]);
            e.message = "nesting too deep".into();
            return Err(e);
        }
        Ok(())
    }

    fn scoped<T>(&mut self, x: &str, f: impl FnOnce(&mut Self) -> Result<T, SyntaxError>) -> Result<T, SyntaxError> {
        self.scope.push(x.to_string());
        let r = f(self);
        self.scope.pop();
        r
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        self.enter()?;
        let r = self.term_inner();
        self.depth -= 1;
        r
    }

    fn term_inner(&mut self) -> Result<Term, SyntaxError> {
        if self.is_kw("let") {
            self.bump();
            let x = self.binder()?;
            self.expect_sym("=")?;
            let t = self.term()?;
            self.expect_kw("in")?;
            let u = self.scoped(&x, |p| p.term())?;
            return Ok(Term::let_(&x, t, u));
        }
        if self.is_kw("if") {
            self.bump();
            let c = self.term()?;
            self.expect_kw("then")?;
            let a = self.term()?;
            self.expect_kw("else")?;
            let b = self.term()?;
            return Ok(Term::if_(c, a, b));
        }
        if self.is_sym("\\") || self.is_sym("λ") || self.is_kw("fun") {
            self.bump();
            let x = self.binder()?;
            let ann = if self.eat_sym(":") { Some(self.ty()?) } else { None };
            if !self.eat_sym(".") && !self.eat_sym("=>") {
                return Err(self.error(&["`.`", "`=>`", "`:`"]));
            }
            let body = self.scoped(&x, |p| p.term())?;
            return Ok(Term::lam(&x, ann, body));
        }
        let e = self.expr()?;
        if self.eat_sym(";") {
            let rest = self.term()?;
            return Ok(Term::seq(e, rest));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        let lhs = self.additive()?;
        for op in ["<=", ">=", "==", "<", ">"] {
            if self.eat_sym(op) {
                let rhs = self.additive()?;
                return Ok(Term::prim2(op, lhs, rhs));
            }
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = if self.eat_sym("+") {
                "+"
            } else if self.eat_sym("-") {
                "-"
            } else {
                return Ok(lhs);
            };
            let rhs = self.multiplicative()?;
            lhs = Term::prim2(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_sym("*") {
                "*"
            } else if self.eat_sym("/") {
                "/"
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Term::prim2(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Term, SyntaxError> {
        if self.eat_sym("-") {
            self.enter()?;
            let r = match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    Ok(Term::lit(-(n as f64)))
                }
                Tok::Float(x) => {
                    self.bump();
                    Ok(Term::lit(-x))
                }
                Tok::Ident(s) if s == "inf" => {
                    self.bump();
                    Ok(Term::lit(f64::NEG_INFINITY))
                }
                _ => self.unary().map(|t| Term::prim("neg", t)),
            };
            self.depth -= 1;
            return r;
        }
        self.application()
    }

    fn starts_primary(&self) -> bool {
        match self.peek() {
            Tok::Int(_) | Tok::Float(_) => true,
            Tok::Sym(s) => *s == "(",
            Tok::Ident(s) => !matches!(s.as_str(), "let" | "in" | "if" | "then" | "else" | "of" | "fun"),
            Tok::Eof => false,
        }
    }

    fn application(&mut self) -> Result<Term, SyntaxError> {
        let mut f = self.primary()?;
        while self.starts_primary() {
            let a = self.primary()?;
            f = Term::app(f, a);
        }
        Ok(f)
    }

    fn keyword_arg(&mut self) -> Result<Term, SyntaxError> {
        if !self.starts_primary() && !self.is_sym("*") {
            return Err(self.error(&["`(`", "atom"]));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Term, SyntaxError> {
        self.enter()?;
        let r = self.primary_inner();
        self.depth -= 1;
        r
    }

    fn primary_inner(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::lit(n as f64))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Term::lit(x))
            }
            Tok::Sym("*") => {
                self.bump();
                Ok(Term::Star)
            }
            Tok::Sym("(") => self.parenthesized(),
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "true" => Ok(Term::tt()),
                    "false" => Ok(Term::ff()),
                    "inf" => Ok(Term::lit(f64::INFINITY)),
                    "nan" => Ok(Term::lit(f64::NAN)),
                    "return" => Ok(Term::ret(self.keyword_arg()?)),
                    "sample" => Ok(Term::sample(self.keyword_arg()?)),
                    "score" => Ok(Term::score(self.keyword_arg()?)),
                    "norm" => Ok(Term::norm(self.keyword_arg()?)),
                    "thunk" => Ok(Term::thunk(self.keyword_arg()?)),
                    "force" => Ok(Term::force(self.keyword_arg()?)),
                    "fst" => Ok(Term::proj(0, self.keyword_arg()?)),
                    "snd" => Ok(Term::proj(1, self.keyword_arg()?)),
                    "case" => self.case_rest(),
                    kw if KEYWORDS.contains(&kw) => {
                        self.pos -= 1;
                        Err(self.error(&["term"]))
                    }
                    _ if self.scope.contains(&s) => Ok(Term::Var(name(&s))),
                    _ if self.prims.contains(&s) => Ok(Term::prim(&s, self.keyword_arg()?)),
                    _ => Ok(Term::Var(name(&s))),
                }
            }
            _ => Err(self.error(&["term"])),
        }
    }

    fn parenthesized(&mut self) -> Result<Term, SyntaxError> {
        self.expect_sym("(")?;
        // `(op)(arg)` applies an infix primitive in prefix form
        if let (Tok::Sym(op), Tok::Sym(")"), Tok::Sym("(")) =
            (self.peek().clone(), self.peek_at(1).clone(), self.peek_at(2).clone())
        {
            if INFIX.contains(&op) {
                self.bump();
                self.bump();
                return Ok(Term::prim(op, self.keyword_arg()?));
            }
        }
        let tag = match (self.peek(), self.peek_at(1)) {
            (Tok::Int(n), Tok::Sym(",")) => Some(*n),
            _ => None,
        };
        let first = self.term()?;
        if self.eat_sym(")") {
            return Ok(first);
        }
        self.expect_sym(",")?;
        let mut items = vec![first];
        loop {
            items.push(self.term()?);
            if self.eat_sym(")") {
                break;
            }
            if !self.eat_sym(",") {
                return Err(self.error(&["`,`", "`)`"]));
            }
        }
        if items.len() == 2 && self.is_sym(":") {
            if let Some(tag) = tag {
                self.bump();
                let sum = self.ty()?;
                let body = items.pop().expect("two items");
                return Ok(Term::Inj { tag: tag as usize, sum: Arc::new(sum), body: Box::new(body) });
            }
        }
        let mut it = items.into_iter().rev();
        let mut acc = it.next().expect("nonempty");
        for t in it {
            acc = Term::pair(t, acc);
        }
        Ok(acc)
    }

    fn case_rest(&mut self) -> Result<Term, SyntaxError> {
        let scrut = self.term()?;
        self.expect_kw("of")?;
        self.expect_sym("{")?;
        let mut arms: Vec<(u64, Arm)> = Vec::new();
        loop {
            self.expect_sym("(")?;
            let tag = match self.bump() {
                Tok::Int(n) => n,
                _ => {
                    self.pos -= 1;
                    return Err(self.error(&["tag"]));
                }
            };
            self.expect_sym(",")?;
            let x = if self.eat_sym("*") { "_".to_string() } else { self.binder()? };
            self.expect_sym(")")?;
            self.expect_sym("=>")?;
            let body = self.scoped(&x, |p| p.term())?;
            arms.push((tag, Arm::new(&x, body)));
            if self.eat_sym("}") {
                break;
            }
            if !self.eat_sym("|") {
                return Err(self.error(&["`|`", "`}`"]));
            }
        }
        arms.sort_by_key(|(t, _)| *t);
        if arms.iter().enumerate().any(|(i, (t, _))| *t != i as u64) {
            let mut e = self.error(&[]);
            e.message = "case arms must cover tags 0..n-1 exactly once".into();
            return Err(e);
        }
        let arms: Vec<Arm> = arms.into_iter().map(|(_, a)| a).collect();
        if arms[0].body.is_prob() {
            Ok(Term::CaseP(Box::new(scrut), arms))
        } else {
            Ok(Term::CaseD(Box::new(scrut), arms))
        }
    }

    fn ty(&mut self) -> Result<Ty, SyntaxError> {
        self.enter()?;
        let r = self.ty_inner();
        self.depth -= 1;
        r
    }

    fn ty_inner(&mut self) -> Result<Ty, SyntaxError> {
        let dom = self.sum_ty()?;
        if self.eat_sym("->") {
            let cod = self.ty()?;
            return Ok(Ty::fun(dom, cod));
        }
        Ok(dom)
    }

    fn sum_ty(&mut self) -> Result<Ty, SyntaxError> {
        let mut arms = vec![self.prod_ty()?];
        while self.eat_sym("+") {
            arms.push(self.prod_ty()?);
        }
        Ok(if arms.len() == 1 { arms.pop().expect("one arm") } else { Ty::Sum(arms) })
    }

    fn prod_ty(&mut self) -> Result<Ty, SyntaxError> {
        let left = self.atom_ty()?;
        if self.eat_sym("*") {
            self.enter()?;
            let right = self.prod_ty();
            self.depth -= 1;
            return Ok(Ty::prod(left, right?));
        }
        Ok(left)
    }

    fn atom_ty(&mut self) -> Result<Ty, SyntaxError> {
        const EXPECTED: &[&str] = &["R", "1", "bool", "P(", "T(", "D(", "sum(", "`(`"];
        match self.peek().clone() {
            Tok::Int(1) => {
                self.bump();
                Ok(Ty::Unit)
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.ty()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            Tok::Ident(s) => {
                self.bump();
                match s.as_str() {
                    "R" | "real" => Ok(Ty::Real),
                    "unit" => Ok(Ty::Unit),
                    "bool" => Ok(Ty::bool()),
                    "P" | "T" | "D" => {
                        self.expect_sym("(")?;
                        let inner = self.ty()?;
                        self.expect_sym(")")?;
                        match s.as_str() {
                            "P" => Ok(Ty::prob(inner)),
                            "T" => Ok(Ty::thunk(inner)),
                            _ => match dens_base(&inner) {
                                Some(b) => Ok(Ty::Dens(b)),
                                None => {
                                    let mut e = self.error(&[]);
                                    e.message = format!("{inner} is not a density base type");
                                    Err(e)
                                }
                            },
                        }
                    }
                    "sum" => {
                        self.expect_sym("(")?;
                        let mut arms = vec![self.ty()?];
                        while self.eat_sym(",") {
                            arms.push(self.ty()?);
                        }
                        self.expect_sym(")")?;
                        Ok(Ty::Sum(arms))
                    }
                    _ => {
                        self.pos -= 1;
                        Err(self.error(EXPECTED))
                    }
                }
            }
            _ => Err(self.error(EXPECTED)),
        }
    }
}

fn dens_base(t: &Ty) -> Option<DensBase> {
    match t {
        Ty::Real => Some(DensBase::Real),
        Ty::Unit => Some(DensBase::Unit),
        _ if t.is_bool() => Some(DensBase::Bool),
        Ty::Sum(arms) if arms.iter().all(|a| *a == Ty::Unit) => Some(DensBase::Nat(arms.len() as u32)),
        Ty::Prod(a, b) => Some(DensBase::Prod(Box::new(dens_base(a)?), Box::new(dens_base(b)?))),
        _ => None,
    }
}

/// Writes a type; `prec` is 0 at arrow level, 1 at sum level, 2 at product
/// level and 3 for atoms.
pub(crate) fn write_ty(f: &mut impl fmt::Write, ty: &Ty, prec: u8) -> fmt::Result {
    let wrap = |f: &mut dyn fmt::Write, needed: u8, body: &dyn Fn(&mut dyn fmt::Write) -> fmt::Result| {
        if prec > needed {
            f.write_char('(')?;
            body(f)?;
            f.write_char(')')
        } else {
            body(f)
        }
    };
    match ty {
        Ty::Real => f.write_str("R"),
        Ty::Unit => f.write_str("1"),
        _ if ty.is_bool() => f.write_str("bool"),
        Ty::Prob(a) => {
            f.write_str("P(")?;
            write_ty(f, a, 0)?;
            f.write_char(')')
        }
        Ty::Thunk(a) => {
            f.write_str("T(")?;
            write_ty(f, a, 0)?;
            f.write_char(')')
        }
        Ty::Dens(b) => {
            f.write_str("D(")?;
            write_ty(f, &b.to_ty(), 0)?;
            f.write_char(')')
        }
        Ty::Sum(arms) if arms.len() == 1 => {
            f.write_str("sum(")?;
            write_ty(f, &arms[0], 0)?;
            f.write_char(')')
        }
        Ty::Sum(arms) => wrap(f, 1, &|f| {
            for (i, a) in arms.iter().enumerate() {
                if i > 0 {
                    f.write_str(" + ")?;
                }
                write_ty_dyn(f, a, 2)?;
            }
            Ok(())
        }),
        Ty::Prod(a, b) => wrap(f, 2, &|f| {
            write_ty_dyn(f, a, 3)?;
            f.write_str(" * ")?;
            write_ty_dyn(f, b, 2)
        }),
        Ty::Fun(a, b) => wrap(f, 0, &|f| {
            write_ty_dyn(f, a, 1)?;
            f.write_str(" -> ")?;
            write_ty_dyn(f, b, 0)
        }),
    }
}

fn write_ty_dyn(f: &mut dyn fmt::Write, ty: &Ty, prec: u8) -> fmt::Result {
    struct W<'a>(&'a mut dyn fmt::Write);
    impl fmt::Write for W<'_> {
        fn write_str(&mut self, s: &str) -> fmt::Result {
            self.0.write_str(s)
        }
    }
    write_ty(&mut W(f), ty, prec)
}

pub fn pretty_ty(ty: &Ty) -> String {
    let mut s = String::new();
    write_ty(&mut s, ty, 0).expect("writing to a String");
    s
}

fn lit(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "(-inf)".into()
    } else if x.is_sign_negative() {
        format!("({x:?})")
    } else {
        format!("{x:?}")
    }
}

/// Renders a term in concrete syntax.
pub fn pretty(t: &Term) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

fn atomic(out: &mut String, t: &Term) {
    if matches!(t, Term::Star) {
        out.push_str("(*)");
    } else {
        write_term(out, t);
    }
}

fn write_term(out: &mut String, t: &Term) {
    match t {
        Term::Var(x) => out.push_str(x),
        Term::Star => out.push('*'),
        Term::Pair(a, b) => {
            out.push('(');
            write_term(out, a);
            out.push_str(", ");
            write_term(out, b);
            out.push(')');
        }
        Term::Proj(j, a) => {
            out.push_str(if *j == 0 { "fst(" } else { "snd(" });
            write_term(out, a);
            out.push(')');
        }
        Term::Inj { tag, sum, body } => {
            if sum.is_bool() && **body == Term::Star {
                out.push_str(if *tag == 1 { "true" } else { "false" });
            } else {
                let _ = write!(out, "(({tag}, ");
                write_term(out, body);
                out.push_str(") : ");
                let _ = write_ty(out, sum, 0);
                out.push(')');
            }
        }
        Term::CaseD(s, arms) | Term::CaseP(s, arms) => {
            out.push_str("(case ");
            write_term(out, s);
            out.push_str(" of { ");
            for (i, arm) in arms.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                let _ = write!(out, "({i}, {}) => ", arm.binder);
                write_term(out, &arm.body);
            }
            out.push_str(" })");
        }
        Term::Prim(PrimOp::Lit(x), _) => out.push_str(&lit(*x)),
        Term::Prim(PrimOp::Named(f), arg) => {
            if INFIX.contains(&&**f) {
                if let Term::Pair(a, b) = &**arg {
                    out.push('(');
                    atomic(out, a);
                    let _ = write!(out, " {f} ");
                    atomic(out, b);
                    out.push(')');
                } else {
                    let _ = write!(out, "({f})(");
                    write_term(out, arg);
                    out.push(')');
                }
            } else {
                out.push_str(f);
                if matches!(**arg, Term::Pair(..)) {
                    write_term(out, arg);
                } else {
                    out.push('(');
                    write_term(out, arg);
                    out.push(')');
                }
            }
        }
        Term::Norm(a) => keyword(out, "norm", a),
        Term::Lam { param, ann, body } => {
            let _ = write!(out, "(\\{param}");
            if let Some(ann) = ann {
                out.push_str(" : ");
                let _ = write_ty(out, ann, 0);
            }
            out.push_str(". ");
            write_term(out, body);
            out.push(')');
        }
        Term::App(f, a) => {
            out.push('(');
            atomic(out, f);
            out.push(' ');
            atomic(out, a);
            out.push(')');
        }
        Term::Thunk(a) => keyword(out, "thunk", a),
        Term::Return(a) => keyword(out, "return", a),
        Term::Sample(a) => keyword(out, "sample", a),
        Term::Score(a) => keyword(out, "score", a),
        Term::Force(a) => keyword(out, "force", a),
        Term::Let(x, a, b) => {
            if &**x == "_" {
                out.push('(');
                write_term(out, a);
                out.push_str("; ");
                write_term(out, b);
                out.push(')');
            } else {
                let _ = write!(out, "(let {x} = ");
                write_term(out, a);
                out.push_str(" in ");
                write_term(out, b);
                out.push(')');
            }
        }
    }
}

fn keyword(out: &mut String, kw: &str, a: &Term) {
    out.push_str(kw);
    out.push('(');
    write_term(out, a);
    out.push(')');
}
