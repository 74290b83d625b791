use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::interp::apply_binary;
use crate::model::{BinOp, Ty, UnOp, Value};

/// Identity of a fresh symbolic input leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolId {
    pub path: String,
    pub type_name: String,
    pub sequence: u32,
}

impl Ord for SymbolId {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.sequence, &self.path, &self.type_name).cmp(&(
            other.sequence,
            &other.path,
            &other.type_name,
        ))
    }
}

impl PartialOrd for SymbolId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SymbolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "field: {}, type: {}, sequence: {}",
            self.path, self.type_name, self.sequence
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub id: SymbolId,
    /// Scalar type of the leaf.
    pub ty: Ty,
}

impl Symbol {
    pub fn new(path: impl Into<String>, ty: Ty, sequence: u32) -> Arc<Symbol> {
        Arc::new(Symbol {
            id: SymbolId {
                path: path.into(),
                type_name: ty.descriptor(),
                sequence,
            },
            ty,
        })
    }
}

/// Scalar symbolic expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymExpr {
    Sym(Arc<Symbol>),
    Const(Value),
    Unary(UnOp, Arc<SymExpr>),
    Binary(BinOp, Arc<SymExpr>, Arc<SymExpr>),
    Ite(Arc<SymExpr>, Arc<SymExpr>, Arc<SymExpr>),
    Select(Vec<SymExpr>, Arc<SymExpr>),
}

pub type Assignment = BTreeMap<SymbolId, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value for symbol `{0}`")]
    MissingSymbol(SymbolId),
    #[error("array index {index} out of range 0..{len}")]
    IndexOutOfRange { index: i64, len: usize },
}

impl SymExpr {
    pub fn tt() -> SymExpr {
        SymExpr::Const(Value::Bool(true))
    }

    pub fn ff() -> SymExpr {
        SymExpr::Const(Value::Bool(false))
    }

    pub fn sym(s: &Arc<Symbol>) -> SymExpr {
        SymExpr::Sym(s.clone())
    }

    pub fn as_const(&self) -> Option<&Value> {
        match self {
            SymExpr::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool_const(&self) -> Option<bool> {
        self.as_const().and_then(Value::as_bool)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: SymExpr) -> SymExpr {
        match e {
            SymExpr::Const(Value::Bool(b)) => SymExpr::Const(Value::Bool(!b)),
            SymExpr::Unary(UnOp::Not, inner) => (*inner).clone(),
            e => SymExpr::Unary(UnOp::Not, Arc::new(e)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: SymExpr) -> SymExpr {
        match e {
            SymExpr::Const(Value::Int(i)) => SymExpr::Const(Value::Int(-i)),
            SymExpr::Unary(UnOp::Neg, inner) => (*inner).clone(),
            e => SymExpr::Unary(UnOp::Neg, Arc::new(e)),
        }
    }

    pub fn unary(op: UnOp, e: SymExpr) -> SymExpr {
        match op {
            UnOp::Not => SymExpr::not(e),
            UnOp::Neg => SymExpr::neg(e),
        }
    }

    pub fn binary(op: BinOp, a: SymExpr, b: SymExpr) -> SymExpr {
        if let (SymExpr::Const(x), SymExpr::Const(y)) = (&a, &b) {
            return SymExpr::Const(apply_binary(op, x, y));
        }
        match op {
            BinOp::And => match (a.as_bool_const(), b.as_bool_const()) {
                (Some(false), _) | (_, Some(false)) => return SymExpr::ff(),
                (Some(true), _) => return b,
                (_, Some(true)) => return a,
                _ => {}
            },
            BinOp::Or => match (a.as_bool_const(), b.as_bool_const()) {
                (Some(true), _) | (_, Some(true)) => return SymExpr::tt(),
                (Some(false), _) => return b,
                (_, Some(false)) => return a,
                _ => {}
            },
            BinOp::Add => {
                if a.as_const() == Some(&Value::Int(0)) {
                    return b;
                }
                if b.as_const() == Some(&Value::Int(0)) {
                    return a;
                }
            }
            BinOp::Sub => {
                if b.as_const() == Some(&Value::Int(0)) {
                    return a;
                }
            }
            BinOp::Mul => {
                if a.as_const() == Some(&Value::Int(0)) || b.as_const() == Some(&Value::Int(0)) {
                    return SymExpr::Const(Value::Int(0));
                }
                if a.as_const() == Some(&Value::Int(1)) {
                    return b;
                }
                if b.as_const() == Some(&Value::Int(1)) {
                    return a;
                }
            }
            BinOp::Eq | BinOp::Le | BinOp::Ge if a == b => return SymExpr::tt(),
            BinOp::Ne | BinOp::Lt | BinOp::Gt if a == b => return SymExpr::ff(),
            _ => {}
        }
        SymExpr::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn and(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::binary(BinOp::And, a, b)
    }

    pub fn eq(a: SymExpr, b: SymExpr) -> SymExpr {
        SymExpr::binary(BinOp::Eq, a, b)
    }

    pub fn ite(c: SymExpr, t: SymExpr, e: SymExpr) -> SymExpr {
        match c.as_bool_const() {
            Some(true) => t,
            Some(false) => e,
            None if t == e => t,
            None => SymExpr::Ite(Arc::new(c), Arc::new(t), Arc::new(e)),
        }
    }

    pub fn select(elems: Vec<SymExpr>, index: SymExpr) -> SymExpr {
        if let Some(k) = index.as_const().and_then(Value::code) {
            if let Some(e) = usize::try_from(k).ok().and_then(|k| elems.get(k)) {
                return e.clone();
            }
        }
        if !elems.is_empty() && elems.iter().all(|e| *e == elems[0]) {
            return elems[0].clone();
        }
        SymExpr::Select(elems, Arc::new(index))
    }

    /// Symbols in first-occurrence order (select elements before the index).
    pub fn symbols(&self) -> Vec<Arc<Symbol>> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    pub(crate) fn collect_symbols(&self, out: &mut Vec<Arc<Symbol>>) {
        match self {
            SymExpr::Sym(s) => {
                if !out.iter().any(|o| o.id == s.id) {
                    out.push(s.clone());
                }
            }
            SymExpr::Const(_) => {}
            SymExpr::Unary(_, e) => e.collect_symbols(out),
            SymExpr::Binary(_, a, b) => {
                a.collect_symbols(out);
                b.collect_symbols(out);
            }
            SymExpr::Ite(c, t, e) => {
                c.collect_symbols(out);
                t.collect_symbols(out);
                e.collect_symbols(out);
            }
            SymExpr::Select(elems, i) => {
                elems.iter().for_each(|e| e.collect_symbols(out));
                i.collect_symbols(out);
            }
        }
    }

    /// Largest symbol sequence number referenced, 0 for constants.
    pub fn max_sequence(&self) -> u32 {
        self.symbols()
            .iter()
            .map(|s| s.id.sequence)
            .max()
            .unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        match self {
            SymExpr::Sym(_) | SymExpr::Const(_) => 1,
            SymExpr::Unary(_, e) => 1 + e.node_count(),
            SymExpr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
            SymExpr::Ite(c, t, e) => 1 + c.node_count() + t.node_count() + e.node_count(),
            SymExpr::Select(elems, i) => {
                1 + i.node_count() + elems.iter().map(SymExpr::node_count).sum::<usize>()
            }
        }
    }
}

/// Rebuilds `e` bottom-up through the folding constructors.
pub fn simplify(e: &SymExpr) -> SymExpr {
    match e {
        SymExpr::Sym(_) | SymExpr::Const(_) => e.clone(),
        SymExpr::Unary(op, x) => SymExpr::unary(*op, simplify(x)),
        SymExpr::Binary(op, a, b) => SymExpr::binary(*op, simplify(a), simplify(b)),
        SymExpr::Ite(c, t, f) => SymExpr::ite(simplify(c), simplify(t), simplify(f)),
        SymExpr::Select(elems, i) => {
            SymExpr::select(elems.iter().map(simplify).collect(), simplify(i))
        }
    }
}

/// Big-step evaluation of `e` under `a`.
pub fn eval_under(a: &Assignment, e: &SymExpr) -> Result<Value, EvalError> {
    Ok(match e {
        SymExpr::Sym(s) => a
            .get(&s.id)
            .cloned()
            .ok_or_else(|| EvalError::MissingSymbol(s.id.clone()))?,
        SymExpr::Const(v) => v.clone(),
        SymExpr::Unary(UnOp::Not, x) => Value::Bool(!eval_under(a, x)?.as_bool().unwrap_or(false)),
        SymExpr::Unary(UnOp::Neg, x) => Value::Int(-eval_under(a, x)?.code().unwrap_or(0)),
        SymExpr::Binary(op, x, y) => apply_binary(*op, &eval_under(a, x)?, &eval_under(a, y)?),
        SymExpr::Ite(c, t, f) => {
            if eval_under(a, c)?.as_bool().unwrap_or(false) {
                eval_under(a, t)?
            } else {
                eval_under(a, f)?
            }
        }
        SymExpr::Select(elems, i) => {
            let index = eval_under(a, i)?.code().unwrap_or(-1);
            let e = usize::try_from(index)
                .ok()
                .and_then(|k| elems.get(k))
                .ok_or(EvalError::IndexOutOfRange {
                    index,
                    len: elems.len(),
                })?;
            eval_under(a, e)?
        }
    })
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymExpr::Sym(s) => write!(f, "{}@{}", s.id.path, s.id.sequence),
            SymExpr::Const(Value::Enum(o)) => write!(f, "#{o}"),
            SymExpr::Const(v) => write!(f, "{}", v.display(&Ty::Bool)),
            SymExpr::Unary(UnOp::Not, e) => write!(f, "!({e})"),
            SymExpr::Unary(UnOp::Neg, e) => write!(f, "-({e})"),
            SymExpr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            SymExpr::Ite(c, t, e) => write!(f, "ite({c}, {t}, {e})"),
            SymExpr::Select(elems, i) => {
                write!(f, "select([")?;
                for (k, e) in elems.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "], {i})")
            }
        }
    }
}

/// A value whose scalar leaves are symbolic; containers stay concrete.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SymValue {
    Scalar(SymExpr),
    Array(Vec<SymValue>),
    Record(Vec<SymValue>),
}

impl SymValue {
    pub fn from_value(v: &Value) -> SymValue {
        match v {
            Value::Array(xs) => SymValue::Array(xs.iter().map(SymValue::from_value).collect()),
            Value::Record(xs) => SymValue::Record(xs.iter().map(SymValue::from_value).collect()),
            v => SymValue::Scalar(SymExpr::Const(v.clone())),
        }
    }

    pub fn scalar(&self) -> &SymExpr {
        match self {
            SymValue::Scalar(e) => e,
            _ => panic!("aggregate used as scalar"),
        }
    }

    pub fn into_scalar(self) -> SymExpr {
        match self {
            SymValue::Scalar(e) => e,
            _ => panic!("aggregate used as scalar"),
        }
    }

    pub fn children(&self) -> &[SymValue] {
        match self {
            SymValue::Array(xs) | SymValue::Record(xs) => xs,
            SymValue::Scalar(_) => panic!("scalar has no components"),
        }
    }

    pub fn children_mut(&mut self) -> &mut Vec<SymValue> {
        match self {
            SymValue::Array(xs) | SymValue::Record(xs) => xs,
            SymValue::Scalar(_) => panic!("scalar has no components"),
        }
    }

    /// Scalar leaves in canonical order.
    pub fn leaves(&self) -> Vec<&SymExpr> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SymExpr>) {
        match self {
            SymValue::Scalar(e) => out.push(e),
            SymValue::Array(xs) | SymValue::Record(xs) => {
                xs.iter().for_each(|x| x.collect_leaves(out))
            }
        }
    }

    /// Reads element `index` of each array in `elems`, leaf-wise.
    pub fn select(elems: &[SymValue], index: &SymExpr) -> SymValue {
        match &elems[0] {
            SymValue::Scalar(_) => SymValue::Scalar(SymExpr::select(
                elems.iter().map(|e| e.scalar().clone()).collect(),
                index.clone(),
            )),
            first => {
                let n = first.children().len();
                let parts = (0..n)
                    .map(|k| {
                        let column: Vec<SymValue> =
                            elems.iter().map(|e| e.children()[k].clone()).collect();
                        SymValue::select(&column, index)
                    })
                    .collect();
                match first {
                    SymValue::Array(_) => SymValue::Array(parts),
                    _ => SymValue::Record(parts),
                }
            }
        }
    }

    /// Leaf-wise equality as one boolean expression.
    pub fn equals(&self, other: &SymValue) -> SymExpr {
        match (self, other) {
            (SymValue::Scalar(a), SymValue::Scalar(b)) => SymExpr::eq(a.clone(), b.clone()),
            (a, b) => a
                .children()
                .iter()
                .zip(b.children())
                .fold(SymExpr::tt(), |acc, (x, y)| SymExpr::and(acc, x.equals(y))),
        }
    }

    pub fn eval_under(&self, a: &Assignment) -> Result<Value, EvalError> {
        Ok(match self {
            SymValue::Scalar(e) => eval_under(a, e)?,
            SymValue::Array(xs) => Value::Array(
                xs.iter()
                    .map(|x| x.eval_under(a))
                    .collect::<Result<_, _>>()?,
            ),
            SymValue::Record(xs) => Value::Record(
                xs.iter()
                    .map(|x| x.eval_under(a))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lock() -> Ty {
        Ty::Enum(Arc::new(crate::model::EnumDef {
            name: "Lock".into(),
            variants: vec!["UNLOCKED".into(), "LOCKED".into()],
        }))
    }

    #[test]
    fn symbol_name_rendering() {
        let s = Symbol::new("inC.ctrl", lock(), 2);
        assert_eq!(
            s.id.to_string(),
            "field: inC.ctrl, type: enum Lock, sequence: 2"
        );
    }

    #[test]
    fn folding_rules() {
        let locked = SymExpr::Const(Value::Enum(1));
        assert_eq!(
            simplify(&SymExpr::Binary(
                BinOp::Eq,
                Arc::new(locked.clone()),
                Arc::new(locked)
            )),
            SymExpr::tt()
        );
        let s0 = SymExpr::sym(&Symbol::new("s0", Ty::Bool, 1));
        let s1 = SymExpr::sym(&Symbol::new("s1", Ty::Bool, 1));
        let sel = SymExpr::Select(
            vec![s0.clone(), s1.clone()],
            Arc::new(SymExpr::Const(Value::Int(1))),
        );
        assert_eq!(simplify(&sel), s1);
        let ite = SymExpr::Ite(Arc::new(SymExpr::ff()), Arc::new(s0), Arc::new(s1.clone()));
        assert_eq!(simplify(&ite), s1);
        let nn = SymExpr::Unary(
            UnOp::Not,
            Arc::new(SymExpr::Unary(UnOp::Not, Arc::new(s1.clone()))),
        );
        assert_eq!(simplify(&nn), s1);
    }

    #[test]
    fn eval_under_examples() {
        let ctrl = Symbol::new("inC.ctrl", lock(), 1);
        let mut a = Assignment::new();
        a.insert(ctrl.id.clone(), Value::Enum(1));
        assert_eq!(eval_under(&a, &SymExpr::sym(&ctrl)), Ok(Value::Enum(1)));

        let auto = Symbol::new("inC.auto", Ty::Bool, 1);
        let m0 = Symbol::new("inC.m[0]", lock(), 1);
        let m1 = Symbol::new("inC.m[1]", lock(), 1);
        a.insert(auto.id.clone(), Value::Bool(true));
        a.insert(m0.id.clone(), Value::Enum(0));
        a.insert(m1.id.clone(), Value::Enum(1));
        let ite = SymExpr::Ite(
            Arc::new(SymExpr::sym(&auto)),
            Arc::new(SymExpr::Const(Value::Enum(1))),
            Arc::new(SymExpr::sym(&m0)),
        );
        assert_eq!(eval_under(&a, &ite), Ok(Value::Enum(1)));
        let sel = SymExpr::Select(
            vec![SymExpr::sym(&m0), SymExpr::sym(&m1)],
            Arc::new(SymExpr::Const(Value::Int(0))),
        );
        assert_eq!(eval_under(&a, &sel), Ok(Value::Enum(0)));
        let missing = SymExpr::sym(&Symbol::new("inC.x", Ty::Bool, 3));
        assert!(matches!(
            eval_under(&a, &missing),
            Err(EvalError::MissingSymbol(_))
        ));
    }
}
