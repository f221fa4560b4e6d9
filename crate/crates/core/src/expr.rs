//! Evolvable selection-policy expressions.
//!
//! Trees are stored in prefix order. Text form mirrors that order with
//! s-expressions, e.g. the seeded UCT individual for K = 0.5:
//!
//! ```text
//! (+ Q_sa (* (* 2 0.5) (sqrt (/ (* 2 (log N_s)) N_sa))))
//! ```
//!
//! Grammar: `expr := terminal | "(" op expr+ ")"`, with `op` one of
//! `+ - * / log sqrt` and `terminal` one of `Q_sa`, `N_s`, `N_sa` or a number
//! (a constant K). Binary operators take two operands, `log` and `sqrt` one.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub const MAX_DEPTH: usize = 8;
/// Values a mutated constant may take.
pub const K_VALUES: [f64; 8] = [0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0];
pub const PROTECT_EPS: f64 = 0.001;
/// Intermediate values are clamped to this magnitude so evaluation stays finite.
pub const SATURATION: f64 = 1e150;

/// Probability that subtree mutation picks an internal node.
pub const INTERNAL_PICK: f64 = 0.9;
/// Probability that a picked constant leaf is redrawn from [`K_VALUES`] instead of regrown.
pub const K_REDRAW: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol {
    QSa,
    Ns,
    NSa,
    K(f64),
    Add,
    Sub,
    Mul,
    Div,
    Log,
    Sqrt,
}

impl Symbol {
    pub fn arity(self) -> usize {
        match self {
            Symbol::QSa | Symbol::Ns | Symbol::NSa | Symbol::K(_) => 0,
            Symbol::Log | Symbol::Sqrt => 1,
            _ => 2,
        }
    }

    pub fn is_terminal(self) -> bool {
        self.arity() == 0
    }

    fn op_name(self) -> &'static str {
        match self {
            Symbol::Add => "+",
            Symbol::Sub => "-",
            Symbol::Mul => "*",
            Symbol::Div => "/",
            Symbol::Log => "log",
            Symbol::Sqrt => "sqrt",
            Symbol::QSa => "Q_sa",
            Symbol::Ns => "N_s",
            Symbol::NSa => "N_sa",
            Symbol::K(_) => "K",
        }
    }
}

/// Inputs available to a selection expression for one child.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionContext {
    pub q_sa: f64,
    pub n_s: f64,
    pub n_sa: f64,
}

impl SelectionContext {
    pub fn new(q_sa: f64, n_s: f64, n_sa: f64) -> Self {
        SelectionContext { q_sa, n_s, n_sa }
    }
}

pub fn protected_div(a: f64, b: f64) -> f64 {
    if b.abs() < PROTECT_EPS {
        1.0
    } else {
        a / b
    }
}

pub fn protected_log(x: f64) -> f64 {
    x.abs().max(PROTECT_EPS).ln()
}

pub fn protected_sqrt(x: f64) -> f64 {
    x.abs().sqrt()
}

fn saturate(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-SATURATION, SATURATION)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    nodes: Vec<Symbol>,
}

impl Expression {
    /// Builds from prefix order, checking arity and depth.
    pub fn from_prefix(nodes: Vec<Symbol>) -> Result<Expression> {
        let e = Expression { nodes };
        let (end, depth) = e.scan(0, 1).ok_or_else(|| Error::Parse("incomplete expression".into()))?;
        if end != e.nodes.len() {
            return Err(Error::Parse("trailing symbols after a complete expression".into()));
        }
        if depth > MAX_DEPTH {
            return Err(Error::Parse(format!("depth {depth} exceeds {MAX_DEPTH}")));
        }
        Ok(e)
    }

    pub fn leaf(s: Symbol) -> Expression {
        assert!(s.is_terminal());
        Expression { nodes: vec![s] }
    }

    /// `Q_sa + 2k * sqrt(2 ln(N_s) / N_sa)`.
    pub fn seeded_uct(k: f64) -> Expression {
        use Symbol::*;
        Expression {
            nodes: vec![
                Add, QSa, Mul, Mul, K(2.0), K(k), Sqrt, Div, Mul, K(2.0), Log, Ns, NSa,
            ],
        }
    }

    /// Pure exploitation, `Q_sa`.
    pub fn greedy() -> Expression {
        Expression::leaf(Symbol::QSa)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        self.scan(0, 1).map(|(_, d)| d).unwrap_or(0)
    }

    /// End index of the subtree at `i` and its maximum depth, given that `i` sits at depth `d`.
    fn scan(&self, i: usize, d: usize) -> Option<(usize, usize)> {
        let s = *self.nodes.get(i)?;
        let mut next = i + 1;
        let mut depth = d;
        for _ in 0..s.arity() {
            let (end, sub) = self.scan(next, d + 1)?;
            next = end;
            depth = depth.max(sub);
        }
        Some((next, depth))
    }

    fn subtree_end(&self, i: usize) -> usize {
        let mut need = 1usize;
        let mut j = i;
        while need > 0 {
            need = need - 1 + self.nodes[j].arity();
            j += 1;
        }
        j
    }

    /// Depth of every node, root = 1.
    fn node_depths(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack: Vec<(usize, usize)> = Vec::new(); // (depth, remaining children)
        for s in &self.nodes {
            let d = stack.last().map_or(1, |&(pd, _)| pd + 1);
            out.push(d);
            if let Some(top) = stack.last_mut() {
                top.1 -= 1;
            }
            while matches!(stack.last(), Some(&(_, 0))) {
                stack.pop();
            }
            if s.arity() > 0 {
                stack.push((d, s.arity()));
            }
        }
        out
    }

    pub fn evaluate(&self, ctx: &SelectionContext) -> f64 {
        let mut stack: Vec<f64> = Vec::with_capacity(8);
        for s in self.nodes.iter().rev() {
            let v = match *s {
                Symbol::QSa => ctx.q_sa,
                Symbol::Ns => ctx.n_s,
                Symbol::NSa => ctx.n_sa,
                Symbol::K(k) => k,
                Symbol::Log => protected_log(stack.pop().unwrap_or(0.0)),
                Symbol::Sqrt => protected_sqrt(stack.pop().unwrap_or(0.0)),
                op => {
                    let a = stack.pop().unwrap_or(0.0);
                    let b = stack.pop().unwrap_or(0.0);
                    match op {
                        Symbol::Add => a + b,
                        Symbol::Sub => a - b,
                        Symbol::Mul => a * b,
                        _ => protected_div(a, b),
                    }
                }
            };
            stack.push(saturate(v));
        }
        stack.pop().unwrap_or(0.0)
    }

    /// Replaces the subtree rooted at `at` with `with`.
    pub fn replace_subtree(&self, at: usize, with: &[Symbol]) -> Expression {
        let end = self.subtree_end(at);
        let mut nodes = Vec::with_capacity(self.nodes.len() - (end - at) + with.len());
        nodes.extend_from_slice(&self.nodes[..at]);
        nodes.extend_from_slice(with);
        nodes.extend_from_slice(&self.nodes[end..]);
        Expression { nodes }
    }

    /// Index range of the subtree rooted at `at`.
    pub fn subtree_range(&self, at: usize) -> std::ops::Range<usize> {
        at..self.subtree_end(at)
    }

    pub fn parse(text: &str) -> Result<Expression> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let mut nodes = Vec::new();
        parse_expr(&tokens, &mut pos, &mut nodes)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("unexpected `{}` after expression", tokens[pos])));
        }
        Expression::from_prefix(nodes)
    }

    fn write_at(&self, i: usize, f: &mut fmt::Formatter<'_>) -> std::result::Result<usize, fmt::Error> {
        let s = self.nodes[i];
        match s {
            Symbol::K(k) => {
                write!(f, "{k}")?;
                Ok(i + 1)
            }
            t if t.is_terminal() => {
                f.write_str(t.op_name())?;
                Ok(i + 1)
            }
            op => {
                write!(f, "({}", op.op_name())?;
                let mut next = i + 1;
                for _ in 0..op.arity() {
                    f.write_str(" ")?;
                    next = self.write_at(next, f)?;
                }
                f.write_str(")")?;
                Ok(next)
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(0, f).map(|_| ())
    }
}

impl std::str::FromStr for Expression {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expression::parse(s)
    }
}

fn tokenize(text: &str) -> Vec<String> {
    text.replace('(', " ( ").replace(')', " ) ").split_whitespace().map(str::to_string).collect()
}

fn parse_expr(tokens: &[String], pos: &mut usize, out: &mut Vec<Symbol>) -> Result<()> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let name = tokens.get(*pos).ok_or_else(|| Error::Parse("missing operator".into()))?;
            *pos += 1;
            let op = match name.as_str() {
                "+" => Symbol::Add,
                "-" => Symbol::Sub,
                "*" => Symbol::Mul,
                "/" => Symbol::Div,
                "log" => Symbol::Log,
                "sqrt" => Symbol::Sqrt,
                other => return Err(Error::Parse(format!("unknown operator `{other}`"))),
            };
            out.push(op);
            let mut args = 0;
            while tokens.get(*pos).map(String::as_str) != Some(")") {
                if *pos >= tokens.len() {
                    return Err(Error::Parse("missing `)`".into()));
                }
                parse_expr(tokens, pos, out)?;
                args += 1;
            }
            *pos += 1;
            if args != op.arity() {
                return Err(Error::Parse(format!(
                    "`{}` takes {} operand(s), got {args}",
                    op.op_name(),
                    op.arity()
                )));
            }
            Ok(())
        }
        ")" => Err(Error::Parse("unexpected `)`".into())),
        "Q_sa" => {
            out.push(Symbol::QSa);
            Ok(())
        }
        "N_s" => {
            out.push(Symbol::Ns);
            Ok(())
        }
        "N_sa" => {
            out.push(Symbol::NSa);
            Ok(())
        }
        num => {
            let v: f64 = num
                .parse()
                .map_err(|_| Error::Parse(format!("unknown symbol `{num}`")))?;
            if !v.is_finite() {
                return Err(Error::Parse(format!("constant `{num}` is not finite")));
            }
            out.push(Symbol::K(v));
            Ok(())
        }
    }
}

const FUNCTIONS: [Symbol; 6] = [Symbol::Add, Symbol::Sub, Symbol::Mul, Symbol::Div, Symbol::Log, Symbol::Sqrt];

fn random_terminal<R: Rng + ?Sized>(rng: &mut R) -> Symbol {
    match rng.gen_range(0..4) {
        0 => Symbol::QSa,
        1 => Symbol::Ns,
        2 => Symbol::NSa,
        _ => Symbol::K(K_VALUES[rng.gen_range(0..K_VALUES.len())]),
    }
}

/// Grow method: each node is uniform over all ten symbols (the four
/// terminals and six functions), forced terminal at `max_depth`.
pub fn grow<R: Rng + ?Sized>(rng: &mut R, max_depth: usize) -> Vec<Symbol> {
    let mut out = Vec::new();
    grow_into(rng, 1, max_depth.max(1), &mut out);
    out
}

fn grow_into<R: Rng + ?Sized>(rng: &mut R, depth: usize, max_depth: usize, out: &mut Vec<Symbol>) {
    let pick = if depth >= max_depth { 0 } else { rng.gen_range(0..10) };
    if pick < 4 {
        out.push(random_terminal(rng));
        return;
    }
    let f = FUNCTIONS[pick - 4];
    out.push(f);
    for _ in 0..f.arity() {
        grow_into(rng, depth + 1, max_depth, out);
    }
}

/// Where a mutation happened and what kind of node was picked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MutationSite {
    pub index: usize,
    pub internal: bool,
}

/// Subtree mutation; returns the offspring and the mutated position.
pub fn subtree_mutation_at<R: Rng + ?Sized>(expr: &Expression, rng: &mut R) -> (Expression, MutationSite) {
    let depths = expr.node_depths();
    let internal: Vec<usize> = (0..expr.nodes.len()).filter(|&i| !expr.nodes[i].is_terminal()).collect();
    let leaves: Vec<usize> = (0..expr.nodes.len()).filter(|&i| expr.nodes[i].is_terminal()).collect();
    let pick_internal = !internal.is_empty() && rng.gen_bool(INTERNAL_PICK);
    let index = if pick_internal {
        internal[rng.gen_range(0..internal.len())]
    } else {
        leaves[rng.gen_range(0..leaves.len())]
    };
    let site = MutationSite {
        index,
        internal: pick_internal,
    };
    if let Symbol::K(old) = expr.nodes[index] {
        if rng.gen_bool(K_REDRAW) {
            let choices: Vec<f64> = K_VALUES.iter().copied().filter(|&v| v != old).collect();
            let v = choices[rng.gen_range(0..choices.len())];
            return (expr.replace_subtree(index, &[Symbol::K(v)]), site);
        }
    }
    let budget = MAX_DEPTH + 1 - depths[index];
    let sub = grow(rng, budget);
    (expr.replace_subtree(index, &sub), site)
}

pub fn subtree_mutation<R: Rng + ?Sized>(expr: &Expression, rng: &mut R) -> Expression {
    subtree_mutation_at(expr, rng).0
}
