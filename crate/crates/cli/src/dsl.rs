//! The workbench source language: `object`, `gen`, `term`, and `eq`
//! declarations over one expression grammar. `;` composes in reading
//! order, `*` tensors and binds tighter; `name`, `coname`, `tr`, and
//! `dual` are derived constructions that elaborate during lowering.
//! Every error carries a line:column position.

use cckit_core::{
    coname_of, dual_of, equal_diagrams, name_of, trace_term, typecheck, Equation, Factor,
    ObjectExpr, Signature, Term, TypedTerm,
};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Semi,
    Star,
    Comma,
    Colon,
    Equals,
    Arrow,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Semi => "`;`".into(),
            Tok::Star => "`*`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Equals => "`=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

#[derive(Debug)]
pub enum DslError {
    Lex { span: Span, message: String },
    Parse { span: Span, expected: Vec<&'static str>, found: String },
    Resolve { span: Span, message: String },
    Type { span: Span, message: String },
}

impl DslError {
    /// Lex, parse, and resolve errors are source errors (usage exit code);
    /// type errors are failed checks.
    pub fn is_syntax(&self) -> bool {
        !matches!(self, DslError::Type { .. })
    }

    pub fn span(&self) -> Span {
        match self {
            DslError::Lex { span, .. }
            | DslError::Parse { span, .. }
            | DslError::Resolve { span, .. }
            | DslError::Type { span, .. } => *span,
        }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslError::Lex { span, message } => write!(f, "{span}: {message}"),
            DslError::Parse { span, expected, found } => {
                write!(f, "{span}: expected {}, found {found}", expected.join(" or "))
            }
            DslError::Resolve { span, message } => write!(f, "{span}: {message}"),
            DslError::Type { span, message } => write!(f, "{span}: {message}"),
        }
    }
}

impl std::error::Error for DslError {}

const RESERVED: &[&str] = &[
    "object", "gen", "term", "eq", "id", "eta", "eps", "sym", "dagger", "name", "coname", "tr",
    "dual", "I",
];

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let span = Span { line, col };
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
            '/' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'/') {
                    for c in chars.by_ref() {
                        if c == '\n' {
                            line += 1;
                            col = 1;
                            break;
                        }
                    }
                } else {
                    return Err(DslError::Lex {
                        span,
                        message: "stray `/` (comments start with `//`)".into(),
                    });
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' || c == '\'' {
                        s.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                out.push(Token { tok: Tok::Ident(s), span });
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'>') {
                    chars.next();
                    col += 1;
                    out.push(Token { tok: Tok::Arrow, span });
                } else {
                    return Err(DslError::Lex {
                        span,
                        message: "stray `-` (arrows are written `->`)".into(),
                    });
                }
            }
            _ => {
                let tok = match c {
                    ';' => Tok::Semi,
                    '*' => Tok::Star,
                    ',' => Tok::Comma,
                    ':' => Tok::Colon,
                    '=' => Tok::Equals,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    other => {
                        return Err(DslError::Lex {
                            span,
                            message: format!("unexpected character {other:?}"),
                        })
                    }
                };
                chars.next();
                col += 1;
                out.push(Token { tok, span });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordAst {
    pub span: Span,
    /// Base name and dual flag per factor; empty is the unit word.
    pub factors: Vec<(String, bool)>,
}

#[derive(Clone, Debug)]
pub enum ExprKind {
    Ref(String),
    Id(WordAst),
    Eta(WordAst),
    Eps(WordAst),
    Sym(WordAst, WordAst),
    Dagger(Box<Expr>),
    Name(Box<Expr>),
    Coname(Box<Expr>),
    Dual(Box<Expr>),
    Tr(WordAst, Box<Expr>),
    /// `left ; right`: left happens first.
    Compose(Box<Expr>, Box<Expr>),
    Tensor(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub span: Span,
    pub kind: ExprKind,
}

/// Structural equality ignoring spans, for round-trip tests.
pub fn expr_eq(a: &Expr, b: &Expr) -> bool {
    use ExprKind::*;
    match (&a.kind, &b.kind) {
        (Ref(x), Ref(y)) => x == y,
        (Id(x), Id(y)) | (Eta(x), Eta(y)) | (Eps(x), Eps(y)) => x.factors == y.factors,
        (Sym(x1, x2), Sym(y1, y2)) => x1.factors == y1.factors && x2.factors == y2.factors,
        (Dagger(x), Dagger(y))
        | (Name(x), Name(y))
        | (Coname(x), Coname(y))
        | (Dual(x), Dual(y)) => expr_eq(x, y),
        (Tr(w1, x), Tr(w2, y)) => w1.factors == w2.factors && expr_eq(x, y),
        (Compose(x1, x2), Compose(y1, y2)) | (Tensor(x1, x2), Tensor(y1, y2)) => {
            expr_eq(x1, y1) && expr_eq(x2, y2)
        }
        _ => false,
    }
}

#[derive(Clone, Debug)]
pub enum DeclKind {
    Object { name: String },
    Gen { name: String, dom: WordAst, cod: WordAst },
    TermDef { name: String, body: Expr },
    EqDef { name: String, lhs: Expr, rhs: Expr },
}

#[derive(Clone, Debug)]
pub struct Decl {
    pub span: Span,
    pub name_span: Span,
    pub kind: DeclKind,
}

#[derive(Clone, Debug)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

pub fn decl_eq(a: &Decl, b: &Decl) -> bool {
    match (&a.kind, &b.kind) {
        (DeclKind::Object { name: x }, DeclKind::Object { name: y }) => x == y,
        (
            DeclKind::Gen { name: x, dom: xd, cod: xc },
            DeclKind::Gen { name: y, dom: yd, cod: yc },
        ) => x == y && xd.factors == yd.factors && xc.factors == yc.factors,
        (
            DeclKind::TermDef { name: x, body: xb },
            DeclKind::TermDef { name: y, body: yb },
        ) => x == y && expr_eq(xb, yb),
        (
            DeclKind::EqDef { name: x, lhs: xl, rhs: xr },
            DeclKind::EqDef { name: y, lhs: yl, rhs: yr },
        ) => x == y && expr_eq(xl, yl) && expr_eq(xr, yr),
        _ => false,
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> &Token {
        &self.tokens[(self.pos + 1).min(self.tokens.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: Vec<&'static str>) -> DslError {
        let t = self.peek();
        DslError::Parse { span: t.span, expected, found: t.tok.describe() }
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<Token, DslError> {
        if self.peek().tok == tok {
            Ok(self.next())
        } else {
            Err(self.err(vec![what]))
        }
    }

    /// An identifier usable as a declared name: not a keyword.
    fn expect_name(&mut self, what: &'static str) -> Result<(String, Span), DslError> {
        match &self.peek().tok {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let span = self.peek().span;
                let s = s.clone();
                self.next();
                Ok((s, span))
            }
            Tok::Ident(s) => Err(DslError::Parse {
                span: self.peek().span,
                expected: vec![what],
                found: format!("reserved word `{s}`"),
            }),
            _ => Err(self.err(vec![what])),
        }
    }

    fn parse_file(&mut self) -> Result<SourceFile, DslError> {
        let mut decls = Vec::new();
        while self.peek().tok != Tok::Eof {
            decls.push(self.parse_decl()?);
        }
        Ok(SourceFile { decls })
    }

    fn parse_decl(&mut self) -> Result<Decl, DslError> {
        let span = self.peek().span;
        let kw = match &self.peek().tok {
            Tok::Ident(s) => s.clone(),
            _ => return Err(self.err(vec!["`object`", "`gen`", "`term`", "`eq`"])),
        };
        match kw.as_str() {
            "object" => {
                self.next();
                let (name, name_span) = self.expect_name("an object name")?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Decl { span, name_span, kind: DeclKind::Object { name } })
            }
            "gen" => {
                self.next();
                let (name, name_span) = self.expect_name("a generator name")?;
                self.expect(Tok::Colon, "`:`")?;
                let dom = self.parse_word(&[Tok::Arrow])?;
                self.expect(Tok::Arrow, "`->`")?;
                let cod = self.parse_word(&[Tok::Semi])?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Decl { span, name_span, kind: DeclKind::Gen { name, dom, cod } })
            }
            "term" => {
                self.next();
                let (name, name_span) = self.expect_name("a term name")?;
                self.expect(Tok::Equals, "`=`")?;
                let body = self.parse_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Decl { span, name_span, kind: DeclKind::TermDef { name, body } })
            }
            "eq" => {
                self.next();
                let (name, name_span) = self.expect_name("an equation name")?;
                self.expect(Tok::Colon, "`:`")?;
                let lhs = self.parse_expr()?;
                self.expect(Tok::Equals, "`=`")?;
                let rhs = self.parse_expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Decl { span, name_span, kind: DeclKind::EqDef { name, lhs, rhs } })
            }
            _ => Err(self.err(vec!["`object`", "`gen`", "`term`", "`eq`"])),
        }
    }

    /// A word up to (not consuming) any of `stop`: `I` alone, or factors
    /// separated by `*`, each a base name or `dual(...)`.
    fn parse_word(&mut self, stop: &[Tok]) -> Result<WordAst, DslError> {
        let span = self.peek().span;
        if let Tok::Ident(s) = &self.peek().tok {
            if s == "I" {
                self.next();
                if !stop.contains(&self.peek().tok) {
                    return Err(self.err(vec!["the unit word `I` to stand alone"]));
                }
                return Ok(WordAst { span, factors: Vec::new() });
            }
        }
        let mut factors = vec![self.parse_word_factor()?];
        while self.peek().tok == Tok::Star {
            self.next();
            factors.push(self.parse_word_factor()?);
        }
        if !stop.contains(&self.peek().tok) {
            return Err(self.err(vec!["`*`", "the end of the object word"]));
        }
        Ok(WordAst { span, factors })
    }

    fn parse_word_factor(&mut self) -> Result<(String, bool), DslError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == "dual" => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let (base, inner_dual) = self.parse_word_factor()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok((base, !inner_dual))
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let s = s.clone();
                self.next();
                Ok((s, false))
            }
            _ => Err(self.err(vec!["a base object name", "`dual`"])),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, DslError> {
        let mut acc = self.parse_tensor()?;
        // A `;` continues the chain only when an expression follows;
        // otherwise it terminates the declaration.
        while self.peek().tok == Tok::Semi && starts_atom(&self.peek2().tok) {
            self.next();
            let rhs = self.parse_tensor()?;
            let span = acc.span;
            acc = Expr { span, kind: ExprKind::Compose(Box::new(acc), Box::new(rhs)) };
        }
        Ok(acc)
    }

    fn parse_tensor(&mut self) -> Result<Expr, DslError> {
        let mut acc = self.parse_atom()?;
        while self.peek().tok == Tok::Star {
            self.next();
            let rhs = self.parse_atom()?;
            let span = acc.span;
            acc = Expr { span, kind: ExprKind::Tensor(Box::new(acc), Box::new(rhs)) };
        }
        Ok(acc)
    }

    fn parse_atom(&mut self) -> Result<Expr, DslError> {
        let span = self.peek().span;
        match &self.peek().tok {
            Tok::LParen => {
                self.next();
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) => {
                let s = s.clone();
                match s.as_str() {
                    "id" | "eta" | "eps" => {
                        self.next();
                        self.expect(Tok::LBrack, "`[`")?;
                        let w = self.parse_word(&[Tok::RBrack])?;
                        self.expect(Tok::RBrack, "`]`")?;
                        let kind = match s.as_str() {
                            "id" => ExprKind::Id(w),
                            "eta" => ExprKind::Eta(w),
                            _ => ExprKind::Eps(w),
                        };
                        Ok(Expr { span, kind })
                    }
                    "sym" => {
                        self.next();
                        self.expect(Tok::LBrack, "`[`")?;
                        let a = self.parse_word(&[Tok::Comma])?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.parse_word(&[Tok::RBrack])?;
                        self.expect(Tok::RBrack, "`]`")?;
                        Ok(Expr { span, kind: ExprKind::Sym(a, b) })
                    }
                    "tr" => {
                        self.next();
                        self.expect(Tok::LBrack, "`[`")?;
                        let w = self.parse_word(&[Tok::RBrack])?;
                        self.expect(Tok::RBrack, "`]`")?;
                        self.expect(Tok::LParen, "`(`")?;
                        let e = self.parse_expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        Ok(Expr { span, kind: ExprKind::Tr(w, Box::new(e)) })
                    }
                    "dagger" | "name" | "coname" | "dual" => {
                        self.next();
                        self.expect(Tok::LParen, "`(`")?;
                        let e = self.parse_expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        let inner = Box::new(e);
                        let kind = match s.as_str() {
                            "dagger" => ExprKind::Dagger(inner),
                            "name" => ExprKind::Name(inner),
                            "coname" => ExprKind::Coname(inner),
                            _ => ExprKind::Dual(inner),
                        };
                        Ok(Expr { span, kind })
                    }
                    "object" | "gen" | "term" | "eq" | "I" => Err(self.err(vec![
                        "a generator or term name",
                        "`id`",
                        "`eta`",
                        "`eps`",
                        "`sym`",
                        "`dagger`",
                        "`name`",
                        "`coname`",
                        "`tr`",
                        "`dual`",
                        "`(`",
                    ])),
                    _ => {
                        self.next();
                        Ok(Expr { span, kind: ExprKind::Ref(s) })
                    }
                }
            }
            _ => Err(self.err(vec![
                "a generator or term name",
                "`id`",
                "`eta`",
                "`eps`",
                "`sym`",
                "`dagger`",
                "`name`",
                "`coname`",
                "`tr`",
                "`dual`",
                "`(`",
            ])),
        }
    }
}

fn starts_atom(t: &Tok) -> bool {
    match t {
        Tok::LParen => true,
        Tok::Ident(s) => !matches!(s.as_str(), "object" | "gen" | "term" | "eq" | "I"),
        _ => false,
    }
}

pub fn parse_source(src: &str) -> Result<SourceFile, DslError> {
    let tokens = lex(src)?;
    Parser { tokens, pos: 0 }.parse_file()
}

fn parse_expr_only(src: &str) -> Result<Expr, DslError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.parse_expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.err(vec!["the end of the expression"]));
    }
    Ok(e)
}

pub fn print_word(w: &WordAst) -> String {
    if w.factors.is_empty() {
        return "I".to_string();
    }
    w.factors
        .iter()
        .map(|(base, dual)| if *dual { format!("dual({base})") } else { base.clone() })
        .collect::<Vec<_>>()
        .join(" * ")
}

pub fn print_expr(e: &Expr) -> String {
    print_expr_at(e, false)
}

fn print_expr_at(e: &Expr, tight: bool) -> String {
    match &e.kind {
        ExprKind::Ref(n) => n.clone(),
        ExprKind::Id(w) => format!("id[{}]", print_word(w)),
        ExprKind::Eta(w) => format!("eta[{}]", print_word(w)),
        ExprKind::Eps(w) => format!("eps[{}]", print_word(w)),
        ExprKind::Sym(a, b) => format!("sym[{}, {}]", print_word(a), print_word(b)),
        ExprKind::Dagger(x) => format!("dagger({})", print_expr_at(x, false)),
        ExprKind::Name(x) => format!("name({})", print_expr_at(x, false)),
        ExprKind::Coname(x) => format!("coname({})", print_expr_at(x, false)),
        ExprKind::Dual(x) => format!("dual({})", print_expr_at(x, false)),
        ExprKind::Tr(w, x) => format!("tr[{}]({})", print_word(w), print_expr_at(x, false)),
        ExprKind::Tensor(l, r) => {
            // A nested operator on the right is bracketed so the printed
            // form reparses to the same tree, not the left-leaning one.
            let rs = if matches!(r.kind, ExprKind::Tensor(..)) {
                format!("({})", print_expr_at(r, true))
            } else {
                print_expr_at(r, true)
            };
            format!("{} * {}", print_expr_at(l, true), rs)
        }
        ExprKind::Compose(l, r) => {
            let rs = if matches!(r.kind, ExprKind::Compose(..)) {
                format!("({})", print_expr_at(r, false))
            } else {
                print_expr_at(r, false)
            };
            let s = format!("{} ; {}", print_expr_at(l, false), rs);
            if tight {
                format!("({s})")
            } else {
                s
            }
        }
    }
}

pub fn print_source(file: &SourceFile) -> String {
    let mut out = String::new();
    for d in &file.decls {
        match &d.kind {
            DeclKind::Object { name } => out.push_str(&format!("object {name};\n")),
            DeclKind::Gen { name, dom, cod } => out.push_str(&format!(
                "gen {name} : {} -> {};\n",
                print_word(dom),
                print_word(cod)
            )),
            DeclKind::TermDef { name, body } => {
                out.push_str(&format!("term {name} = {};\n", print_expr(body)))
            }
            DeclKind::EqDef { name, lhs, rhs } => out.push_str(&format!(
                "eq {name} : {} = {};\n",
                print_expr(lhs),
                print_expr(rhs)
            )),
        }
    }
    out
}

/// One analysed declaration: its verdict line for `check`.
#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub summary: String,
    pub ok: bool,
}

#[derive(Debug)]
pub struct Analysis {
    pub sig: Arc<Signature>,
    pub entries: Vec<Entry>,
    pub terms: Vec<(String, TypedTerm)>,
    pub equations: Vec<Equation>,
    term_index: BTreeMap<String, usize>,
}

impl Analysis {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    pub fn term(&self, name: &str) -> Option<&TypedTerm> {
        self.term_index.get(name).map(|&i| &self.terms[i].1)
    }

    /// Parses and lowers a standalone expression in this file's scope.
    pub fn lower_snippet(&self, src: &str) -> Result<TypedTerm, DslError> {
        let e = parse_expr_only(src)?;
        self.lower(&e)
    }

    fn lower_word(&self, w: &WordAst) -> Result<ObjectExpr, DslError> {
        let mut factors = Vec::new();
        for (base, dual) in &w.factors {
            if !self.sig.base_objects().contains(base) {
                return Err(DslError::Resolve {
                    span: w.span,
                    message: format!("unknown base object `{base}`"),
                });
            }
            factors.push(Factor { base: base.clone(), dual: *dual });
        }
        Ok(ObjectExpr::from_factors(factors))
    }

    fn lower(&self, e: &Expr) -> Result<TypedTerm, DslError> {
        let ty_err = |span: Span| {
            move |err: cckit_core::TypeError| DslError::Type { span, message: err.to_string() }
        };
        match &e.kind {
            ExprKind::Ref(n) => {
                if self.sig.generator(n).is_some() {
                    typecheck(&Term::Gen(n.clone()), &self.sig).map_err(ty_err(e.span))
                } else if let Some(t) = self.term(n) {
                    Ok(t.clone())
                } else {
                    Err(DslError::Resolve {
                        span: e.span,
                        message: format!("`{n}` is not a generator or a declared term"),
                    })
                }
            }
            ExprKind::Id(w) => typecheck(&Term::Id(self.lower_word(w)?), &self.sig)
                .map_err(ty_err(e.span)),
            ExprKind::Eta(w) => typecheck(&Term::Unit(self.lower_word(w)?), &self.sig)
                .map_err(ty_err(e.span)),
            ExprKind::Eps(w) => typecheck(&Term::Counit(self.lower_word(w)?), &self.sig)
                .map_err(ty_err(e.span)),
            ExprKind::Sym(a, b) => {
                typecheck(&Term::Sym(self.lower_word(a)?, self.lower_word(b)?), &self.sig)
                    .map_err(ty_err(e.span))
            }
            ExprKind::Dagger(x) => {
                let inner = self.lower(x)?;
                typecheck(&Term::dagger(inner.term().clone()), &self.sig)
                    .map_err(ty_err(e.span))
            }
            ExprKind::Name(x) => Ok(name_of(&self.lower(x)?)),
            ExprKind::Coname(x) => Ok(coname_of(&self.lower(x)?)),
            ExprKind::Dual(x) => Ok(dual_of(&self.lower(x)?)),
            ExprKind::Tr(w, x) => {
                let inner = self.lower(x)?;
                trace_term(&inner, &self.lower_word(w)?).map_err(ty_err(e.span))
            }
            ExprKind::Tensor(l, r) => {
                let (lt, rt) = (self.lower(l)?, self.lower(r)?);
                typecheck(&Term::tensor(lt.term().clone(), rt.term().clone()), &self.sig)
                    .map_err(ty_err(e.span))
            }
            ExprKind::Compose(l, r) => {
                let (lt, rt) = (self.lower(l)?, self.lower(r)?);
                // Reading order: the right operand is applied after, and a
                // mismatch is reported at its position.
                typecheck(&Term::compose(rt.term().clone(), lt.term().clone()), &self.sig)
                    .map_err(ty_err(r.span))
            }
        }
    }
}

/// Builds the signature and lowers every term and equation, recording a
/// verdict per declaration. Source and resolution errors abort; type
/// errors become failing entries so later declarations still get checked.
pub fn analyze(file: &SourceFile) -> Result<Analysis, DslError> {
    let mut sig = Signature::new(true);
    for d in &file.decls {
        match &d.kind {
            DeclKind::Object { name } => {
                sig.add_base_object(name.clone()).map_err(|err| DslError::Resolve {
                    span: d.name_span,
                    message: err.to_string(),
                })?;
            }
            DeclKind::Gen { name, dom, cod } => {
                let lower = |w: &WordAst| -> Result<ObjectExpr, DslError> {
                    let mut factors = Vec::new();
                    for (base, dual) in &w.factors {
                        if !sig.base_objects().contains(base) {
                            return Err(DslError::Resolve {
                                span: w.span,
                                message: format!("unknown base object `{base}`"),
                            });
                        }
                        factors.push(Factor { base: base.clone(), dual: *dual });
                    }
                    Ok(ObjectExpr::from_factors(factors))
                };
                let (dw, cw) = (lower(dom)?, lower(cod)?);
                sig.add_generator(name.clone(), dw, cw).map_err(|err| DslError::Resolve {
                    span: d.name_span,
                    message: err.to_string(),
                })?;
            }
            DeclKind::TermDef { .. } | DeclKind::EqDef { .. } => {}
        }
    }
    let mut analysis = Analysis {
        sig: Arc::new(sig),
        entries: Vec::new(),
        terms: Vec::new(),
        equations: Vec::new(),
        term_index: BTreeMap::new(),
    };
    for d in &file.decls {
        match &d.kind {
            DeclKind::Object { name } => analysis.entries.push(Entry {
                name: name.clone(),
                summary: format!("object {name}"),
                ok: true,
            }),
            DeclKind::Gen { name, .. } => {
                let g = analysis.sig.generator(name).expect("declared above");
                analysis.entries.push(Entry {
                    name: name.clone(),
                    summary: format!("gen {name} : {} -> {}", g.dom, g.cod),
                    ok: true,
                });
            }
            DeclKind::TermDef { name, body } => {
                if analysis.sig.generator(name).is_some()
                    || analysis.term_index.contains_key(name)
                {
                    return Err(DslError::Resolve {
                        span: d.name_span,
                        message: format!("name `{name}` is already in use"),
                    });
                }
                match analysis.lower(body) {
                    Ok(t) => {
                        analysis.entries.push(Entry {
                            name: name.clone(),
                            summary: format!("term {name} : {} -> {}", t.dom(), t.cod()),
                            ok: true,
                        });
                        analysis.term_index.insert(name.clone(), analysis.terms.len());
                        analysis.terms.push((name.clone(), t));
                    }
                    Err(err) if err.is_syntax() => return Err(err),
                    Err(err) => analysis.entries.push(Entry {
                        name: name.clone(),
                        summary: format!("term {name}: {err}"),
                        ok: false,
                    }),
                }
            }
            DeclKind::EqDef { name, lhs, rhs } => {
                let sides = self_pair(analysis.lower(lhs), analysis.lower(rhs));
                match sides {
                    Ok((l, r)) => match Equation::new(name.clone(), l, r) {
                        Ok(eq) => {
                            analysis.entries.push(Entry {
                                name: name.clone(),
                                summary: format!(
                                    "eq {name} : {} -> {}",
                                    eq.lhs.dom(),
                                    eq.lhs.cod()
                                ),
                                ok: true,
                            });
                            analysis.equations.push(eq);
                        }
                        Err(err) => analysis.entries.push(Entry {
                            name: name.clone(),
                            summary: format!("eq {name}: {err}"),
                            ok: false,
                        }),
                    },
                    Err(err) if err.is_syntax() => return Err(err),
                    Err(err) => analysis.entries.push(Entry {
                        name: name.clone(),
                        summary: format!("eq {name}: {err}"),
                        ok: false,
                    }),
                }
            }
        }
    }
    Ok(analysis)
}

fn self_pair<T>(
    a: Result<T, DslError>,
    b: Result<T, DslError>,
) -> Result<(T, T), DslError> {
    Ok((a?, b?))
}

/// `analyze`, then require every declaration to have passed.
pub fn resolve(file: &SourceFile) -> Result<Analysis, DslError> {
    let a = analyze(file)?;
    if let Some(bad) = a.entries.iter().find(|e| !e.ok) {
        return Err(DslError::Type { span: Span { line: 0, col: 0 }, message: bad.summary.clone() });
    }
    Ok(a)
}

/// Convenience used by tests: do two expressions in a file's scope denote
/// the same diagram?
pub fn snippet_equal(a: &Analysis, lhs: &str, rhs: &str) -> Result<bool, DslError> {
    let (l, r) = (a.lower_snippet(lhs)?, a.lower_snippet(rhs)?);
    equal_diagrams(&l, &r).map_err(|e| DslError::Type {
        span: Span { line: 1, col: 1 },
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn file(src: &str) -> SourceFile {
        parse_source(src).unwrap()
    }

    #[test]
    fn parses_and_checks_the_yanking_term() {
        let a = analyze(&file(
            "object A;\nterm yank = (id[A] * eta[A]) ; (eps[A] * id[A]);\n",
        ))
        .unwrap();
        assert!(a.all_ok());
        let t = a.term("yank").unwrap();
        assert_eq!(t.dom().to_string(), "A");
        assert_eq!(t.cod().to_string(), "A");
    }

    #[test]
    fn composition_mismatch_points_at_the_second_factor() {
        let src = "object A;\nobject B;\ngen f : A -> B;\nterm bad = f ; f;\n";
        let a = analyze(&file(src)).unwrap();
        assert!(!a.all_ok());
        let entry = a.entries.iter().find(|e| e.name == "bad").unwrap();
        // The second `f` sits at line 4 column 16.
        assert!(entry.summary.contains("4:16"), "{}", entry.summary);
    }

    #[test]
    fn bell_state_is_the_name_of_the_identity() {
        let a = analyze(&file("object A;\nterm bell = eta[A];\n")).unwrap();
        assert!(snippet_equal(&a, "bell", "name(id[A])").unwrap());
    }

    #[test]
    fn lex_and_parse_errors_carry_positions_and_expectations() {
        let err = parse_source("object A?;").unwrap_err();
        match &err {
            DslError::Lex { span, .. } => assert_eq!((span.line, span.col), (1, 9)),
            other => panic!("expected a lex error, got {other:?}"),
        }
        let err = parse_source("object A;\ngen f : A -> ;\n").unwrap_err();
        match &err {
            DslError::Parse { span, expected, .. } => {
                assert_eq!(span.line, 2);
                assert!(!expected.is_empty());
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        assert!(err.is_syntax());
    }

    #[test]
    fn unknown_names_are_resolve_errors() {
        let err = analyze(&file("object A;\nterm t = ghost;\n")).unwrap_err();
        match err {
            DslError::Resolve { span, message } => {
                assert_eq!(span.line, 2);
                assert!(message.contains("ghost"));
            }
            other => panic!("expected a resolve error, got {other:?}"),
        }
    }

    #[test]
    fn printing_reparses_to_the_same_tree() {
        let src = "object A;\nobject B;\ngen f : A -> B;\ngen u : A * dual(B) -> I;\n\
                   term t = (f ; dagger(f)) * id[dual(A)];\n\
                   term s = tr[A](sym[A, A] ; id[A * A]);\n\
                   eq e : t * u = t * u;\n";
        let parsed = file(src);
        let printed = print_source(&parsed);
        let reparsed = file(&printed);
        assert_eq!(parsed.decls.len(), reparsed.decls.len());
        for (a, b) in parsed.decls.iter().zip(reparsed.decls.iter()) {
            assert!(decl_eq(a, b), "{printed}");
        }
    }

    #[test]
    fn core_display_output_reparses_to_the_same_denotation() {
        // Terms printed by the core display must parse back to the same
        // diagram through the expression grammar.
        let a = analyze(&file(
            "object A;\nobject B;\ngen f : A -> B;\ngen g : B -> A;\n",
        ))
        .unwrap();
        for src in [
            "f ; g ; f",
            "(f ; g) * f",
            "(id[A] ; f) * g",
            "dagger(eta[A])",
            "sym[A, dual(A)]",
            "eta[A * B] ; eps[dual(A) * dual(B)]",
        ] {
            let t = a.lower_snippet(src).unwrap();
            let display = t.term().to_string();
            let back = a.lower_snippet(&display).unwrap();
            assert!(
                equal_diagrams(&t, &back).unwrap(),
                "display {display:?} changed the diagram"
            );
        }
    }

    fn word_strategy() -> impl Strategy<Value = WordAst> {
        proptest::collection::vec(("[AB]", any::<bool>()), 0..3).prop_map(|factors| WordAst {
            span: Span { line: 1, col: 1 },
            factors: factors.into_iter().collect(),
        })
    }

    fn expr_strategy() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            Just(ExprKind::Ref("f".to_string())),
            Just(ExprKind::Ref("g".to_string())),
            word_strategy().prop_map(ExprKind::Id),
            word_strategy().prop_map(ExprKind::Eta),
            word_strategy().prop_map(ExprKind::Eps),
            (word_strategy(), word_strategy()).prop_map(|(a, b)| ExprKind::Sym(a, b)),
        ]
        .prop_map(|kind| Expr { span: Span { line: 1, col: 1 }, kind });
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr {
                    span: Span { line: 1, col: 1 },
                    kind: ExprKind::Compose(Box::new(a), Box::new(b)),
                }),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr {
                    span: Span { line: 1, col: 1 },
                    kind: ExprKind::Tensor(Box::new(a), Box::new(b)),
                }),
                inner.clone().prop_map(|a| Expr {
                    span: Span { line: 1, col: 1 },
                    kind: ExprKind::Dagger(Box::new(a)),
                }),
                (word_strategy(), inner).prop_map(|(w, a)| Expr {
                    span: Span { line: 1, col: 1 },
                    kind: ExprKind::Tr(w, Box::new(a)),
                }),
            ]
        })
    }

    proptest! {
        // Printing any expression tree and reparsing gives the same tree:
        // the printer inserts exactly the brackets the grammar needs.
        #[test]
        fn print_parse_round_trip(e in expr_strategy()) {
            let printed = print_expr(&e);
            let back = parse_expr_only(&printed).unwrap();
            prop_assert!(expr_eq(&e, &back), "printed {printed:?}");
        }
    }
}
