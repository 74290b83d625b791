use std::fmt;
use std::sync::Arc;

/// An enumeration type. Variant `k` has ordinal `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnumDef {
    pub name: String,
    pub variants: Vec<String>,
}

impl EnumDef {
    pub fn ordinal(&self, variant: &str) -> Option<usize> {
        self.variants.iter().position(|v| v == variant)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecordDef {
    pub name: String,
    pub fields: Vec<(String, Ty)>,
}

impl RecordDef {
    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.fields.iter().position(|(f, _)| f == name)
    }
}

/// Statically sized data types of the modeling language.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ty {
    Bool,
    Int { lo: i64, hi: i64 },
    Enum(Arc<EnumDef>),
    Array(Box<Ty>, usize),
    Record(Arc<RecordDef>),
}

impl Ty {
    pub fn is_scalar(&self) -> bool {
        matches!(self, Ty::Bool | Ty::Int { .. } | Ty::Enum(_))
    }

    /// Number of values of a scalar type; product of leaf domains for aggregates.
    /// Saturates at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        match self {
            Ty::Bool => 2,
            Ty::Int { lo, hi } => (*hi as i128 - *lo as i128 + 1) as u128,
            Ty::Enum(e) => e.variants.len() as u128,
            Ty::Array(elem, len) => {
                let c = elem.cardinality();
                (0..*len).fold(1u128, |acc, _| acc.saturating_mul(c))
            }
            Ty::Record(r) => r
                .fields
                .iter()
                .fold(1u128, |acc, (_, t)| acc.saturating_mul(t.cardinality())),
        }
    }

    /// Scalar domain as an inclusive range of value codes
    /// (`false`=0/`true`=1, enum ordinals, integers).
    pub fn code_range(&self) -> Option<(i64, i64)> {
        match self {
            Ty::Bool => Some((0, 1)),
            Ty::Int { lo, hi } => Some((*lo, *hi)),
            Ty::Enum(e) => Some((0, e.variants.len() as i64 - 1)),
            _ => None,
        }
    }

    /// Number of primitive leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            Ty::Array(elem, len) => elem.leaf_count() * len,
            Ty::Record(r) => r.fields.iter().map(|(_, t)| t.leaf_count()).sum(),
            _ => 1,
        }
    }

    /// The canonical first value: `false`, the lower bound, ordinal 0.
    pub fn first_value(&self) -> Value {
        match self {
            Ty::Bool => Value::Bool(false),
            Ty::Int { lo, .. } => Value::Int(*lo),
            Ty::Enum(_) => Value::Enum(0),
            Ty::Array(elem, len) => Value::Array(vec![elem.first_value(); *len]),
            Ty::Record(r) => Value::Record(r.fields.iter().map(|(_, t)| t.first_value()).collect()),
        }
    }

    /// Printable descriptor used in symbol names.
    pub fn descriptor(&self) -> String {
        match self {
            Ty::Bool => "boolean".to_string(),
            Ty::Int { lo, hi } => format!("int {lo}..{hi}"),
            Ty::Enum(e) => format!("enum {}", e.name),
            Ty::Array(elem, len) => format!("{}[{len}]", elem.descriptor()),
            Ty::Record(r) => format!("struct {}", r.name),
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Bool => write!(f, "bool"),
            Ty::Int { lo, hi } => write!(f, "int({lo}, {hi})"),
            Ty::Enum(e) => write!(f, "{}", e.name),
            Ty::Array(elem, len) => write!(f, "{elem}[{len}]"),
            Ty::Record(r) => write!(f, "{}", r.name),
        }
    }
}

/// A concrete value. Its shape mirrors a [`Ty`]; record fields are stored
/// positionally in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Enum(usize),
    Array(Vec<Value>),
    Record(Vec<Value>),
}

impl Value {
    /// Scalar value code, see [`Ty::code_range`].
    pub fn code(&self) -> Option<i64> {
        match self {
            Value::Bool(b) => Some(*b as i64),
            Value::Int(i) => Some(*i),
            Value::Enum(o) => Some(*o as i64),
            _ => None,
        }
    }

    pub fn from_code(ty: &Ty, code: i64) -> Value {
        match ty {
            Ty::Bool => Value::Bool(code != 0),
            Ty::Int { .. } => Value::Int(code),
            Ty::Enum(_) => Value::Enum(code as usize),
            _ => panic!("from_code on aggregate type {ty}"),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// True when the value's shape and ranges match `ty`.
    pub fn conforms_to(&self, ty: &Ty) -> bool {
        match (self, ty) {
            (Value::Bool(_), Ty::Bool) => true,
            (Value::Int(v), Ty::Int { lo, hi }) => lo <= v && v <= hi,
            (Value::Enum(o), Ty::Enum(e)) => *o < e.variants.len(),
            (Value::Array(items), Ty::Array(elem, len)) => {
                items.len() == *len && items.iter().all(|v| v.conforms_to(elem))
            }
            (Value::Record(items), Ty::Record(r)) => {
                items.len() == r.fields.len()
                    && items
                        .iter()
                        .zip(&r.fields)
                        .all(|(v, (_, t))| v.conforms_to(t))
            }
            _ => false,
        }
    }

    /// Renders the value in model-literal syntax (`[a, b]`, `{f: v}`).
    pub fn display<'a>(&'a self, ty: &'a Ty) -> ValueDisplay<'a> {
        ValueDisplay { value: self, ty }
    }

    /// Primitive leaves in canonical order.
    pub fn leaves(&self) -> Vec<&Value> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Value>) {
        match self {
            Value::Array(items) | Value::Record(items) => {
                items.iter().for_each(|v| v.collect_leaves(out))
            }
            v => out.push(v),
        }
    }
}

pub struct ValueDisplay<'a> {
    value: &'a Value,
    ty: &'a Ty,
}

impl fmt::Display for ValueDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.value, self.ty) {
            (Value::Bool(b), _) => write!(f, "{b}"),
            (Value::Int(i), _) => write!(f, "{i}"),
            (Value::Enum(o), Ty::Enum(e)) => match e.variants.get(*o) {
                Some(name) => write!(f, "{name}"),
                None => write!(f, "<{}#{o}>", e.name),
            },
            (Value::Array(items), Ty::Array(elem, _)) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{}", v.display(elem))?;
                }
                write!(f, "]")
            }
            (Value::Record(items), Ty::Record(r)) => {
                write!(f, "{{")?;
                for (i, (v, (name, t))) in items.iter().zip(&r.fields).enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{name}: {}", v.display(t))?;
                }
                write!(f, "}}")
            }
            (v, _) => write!(f, "{v:?}"),
        }
    }
}

/// Primitive leaf paths of a value of type `ty` rooted at `root`,
/// e.g. `mirrorData.mirrorState[1]`, paired with their scalar types.
pub fn leaf_paths(root: &str, ty: &Ty) -> Vec<(String, Ty)> {
    let mut out = Vec::new();
    push_leaf_paths(root.to_string(), ty, &mut out);
    out
}

fn push_leaf_paths(path: String, ty: &Ty, out: &mut Vec<(String, Ty)>) {
    match ty {
        Ty::Array(elem, len) => {
            for i in 0..*len {
                push_leaf_paths(format!("{path}[{i}]"), elem, out);
            }
        }
        Ty::Record(r) => {
            for (name, t) in &r.fields {
                push_leaf_paths(format!("{path}.{name}"), t, out);
            }
        }
        _ => out.push((path, ty.clone())),
    }
}
