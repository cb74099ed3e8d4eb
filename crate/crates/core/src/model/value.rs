//! Dynamically tagged data: the storage, parameter and configuration values
//! contracts exchange, plus the tags used to check them at call boundaries.

use std::collections::BTreeMap;
use std::fmt;

use super::primitives::{Address, Amount};

/// Type of a [`Value`].
///
/// `Entrypoints` describes a parameter of the form `(pair "name" args)` where
/// the accepted `args` tag depends on the entrypoint name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeTag {
    Unit,
    Nat,
    Int,
    Bool,
    String,
    Mutez,
    Address,
    Pair(Box<TypeTag>, Box<TypeTag>),
    List(Box<TypeTag>),
    Entrypoints(BTreeMap<String, TypeTag>),
}

impl TypeTag {
    pub fn pair(left: TypeTag, right: TypeTag) -> Self {
        TypeTag::Pair(Box::new(left), Box::new(right))
    }

    pub fn list(elem: TypeTag) -> Self {
        TypeTag::List(Box::new(elem))
    }

    pub fn entrypoints<'a>(entries: impl IntoIterator<Item = (&'a str, TypeTag)>) -> Self {
        TypeTag::Entrypoints(
            entries
                .into_iter()
                .map(|(name, tag)| (name.to_string(), tag))
                .collect(),
        )
    }
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeTag::Unit => f.write_str("unit"),
            TypeTag::Nat => f.write_str("nat"),
            TypeTag::Int => f.write_str("int"),
            TypeTag::Bool => f.write_str("bool"),
            TypeTag::String => f.write_str("string"),
            TypeTag::Mutez => f.write_str("mutez"),
            TypeTag::Address => f.write_str("address"),
            TypeTag::Pair(l, r) => write!(f, "(pair {l} {r})"),
            TypeTag::List(e) => write!(f, "(list {e})"),
            TypeTag::Entrypoints(entries) => {
                f.write_str("(entrypoints")?;
                for (name, tag) in entries {
                    write!(f, " {name}:{tag}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Unit,
    Nat(u64),
    Int(i64),
    Bool(bool),
    String(String),
    Mutez(Amount),
    Address(Address),
    Pair(Box<Value>, Box<Value>),
    List(Vec<Value>),
}

impl Value {
    pub fn pair(left: Value, right: Value) -> Self {
        Value::Pair(Box::new(left), Box::new(right))
    }

    pub fn string(s: impl Into<String>) -> Self {
        Value::String(s.into())
    }

    /// Entrypoint-call parameter `(pair "name" args)`.
    pub fn call(entrypoint: &str, args: Value) -> Self {
        Value::pair(Value::string(entrypoint), args)
    }

    /// The parameter of a plain transfer.
    pub fn default_call() -> Self {
        Value::call("default", Value::Unit)
    }

    /// Packs call arguments as right-nested pairs: `[]` is `unit`, `[a]` is
    /// `a`, `[a, b, c]` is `(pair a (pair b c))`.
    pub fn pack_args(mut args: Vec<Value>) -> Value {
        match args.len() {
            0 => Value::Unit,
            1 => args.pop().unwrap(),
            _ => {
                let mut acc = args.pop().unwrap();
                while let Some(v) = args.pop() {
                    acc = Value::pair(v, acc);
                }
                acc
            }
        }
    }

    /// Inverse of [`Value::pack_args`] along the right spine.
    pub fn unpack_args(&self) -> Vec<Value> {
        let mut out = Vec::new();
        let mut cur = self;
        if *cur == Value::Unit {
            return out;
        }
        while let Value::Pair(l, r) = cur {
            out.push((**l).clone());
            cur = r;
        }
        out.push(cur.clone());
        out
    }

    /// Splits an entrypoint-call parameter into name and arguments.
    pub fn as_call(&self) -> Option<(&str, &Value)> {
        match self {
            Value::Pair(l, r) => match l.as_ref() {
                Value::String(name) => Some((name.as_str(), r.as_ref())),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self {
            Value::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_mutez(&self) -> Option<Amount> {
        match self {
            Value::Mutez(a) => Some(*a),
            _ => None,
        }
    }

    pub fn as_address(&self) -> Option<&Address> {
        match self {
            Value::Address(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_pair(&self) -> Option<(&Value, &Value)> {
        match self {
            Value::Pair(l, r) => Some((l, r)),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(items) => Some(items),
            _ => None,
        }
    }

    /// The most specific tag of this value, or `None` for a heterogeneous
    /// list. Element tags of empty lists are unconstrained and reported as
    /// `unit`.
    pub fn type_tag(&self) -> Option<TypeTag> {
        self.shape().map(Shape::into_tag)
    }

    fn shape(&self) -> Option<Shape> {
        Some(match self {
            Value::Unit => Shape::Known(TypeTag::Unit),
            Value::Nat(_) => Shape::Known(TypeTag::Nat),
            Value::Int(_) => Shape::Known(TypeTag::Int),
            Value::Bool(_) => Shape::Known(TypeTag::Bool),
            Value::String(_) => Shape::Known(TypeTag::String),
            Value::Mutez(_) => Shape::Known(TypeTag::Mutez),
            Value::Address(_) => Shape::Known(TypeTag::Address),
            Value::Pair(l, r) => Shape::Pair(Box::new(l.shape()?), Box::new(r.shape()?)),
            Value::List(items) => {
                let mut elem = Shape::Unknown;
                for item in items {
                    elem = elem.join(item.shape()?)?;
                }
                Shape::List(Box::new(elem))
            }
        })
    }

    /// True when every list inside the value has elements of one shape.
    pub fn is_homogeneous(&self) -> bool {
        self.shape().is_some()
    }
}

/// Partially known tag: empty lists leave their element shape open.
#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Unknown,
    Known(TypeTag),
    Pair(Box<Shape>, Box<Shape>),
    List(Box<Shape>),
}

impl Shape {
    fn join(self, other: Shape) -> Option<Shape> {
        match (self, other) {
            (Shape::Unknown, s) | (s, Shape::Unknown) => Some(s),
            (Shape::Known(a), Shape::Known(b)) => (a == b).then_some(Shape::Known(a)),
            (Shape::Pair(a, b), Shape::Pair(c, d)) => {
                Some(Shape::Pair(Box::new(a.join(*c)?), Box::new(b.join(*d)?)))
            }
            (Shape::List(a), Shape::List(b)) => Some(Shape::List(Box::new(a.join(*b)?))),
            _ => None,
        }
    }

    fn into_tag(self) -> TypeTag {
        match self {
            Shape::Unknown => TypeTag::Unit,
            Shape::Known(t) => t,
            Shape::Pair(l, r) => TypeTag::pair(l.into_tag(), r.into_tag()),
            Shape::List(e) => TypeTag::list(e.into_tag()),
        }
    }
}

/// Structural membership of `v` in `t`.
pub fn value_typecheck(v: &Value, t: &TypeTag) -> bool {
    match (v, t) {
        (Value::Unit, TypeTag::Unit)
        | (Value::Nat(_), TypeTag::Nat)
        | (Value::Int(_), TypeTag::Int)
        | (Value::Bool(_), TypeTag::Bool)
        | (Value::String(_), TypeTag::String)
        | (Value::Mutez(_), TypeTag::Mutez)
        | (Value::Address(_), TypeTag::Address) => true,
        (Value::Pair(l, r), TypeTag::Pair(lt, rt)) => {
            value_typecheck(l, lt) && value_typecheck(r, rt)
        }
        (Value::List(items), TypeTag::List(et)) => items.iter().all(|i| value_typecheck(i, et)),
        (v, TypeTag::Entrypoints(entries)) => match v.as_call() {
            Some((name, args)) => entries
                .get(name)
                .is_some_and(|args_tag| value_typecheck(args, args_tag)),
            None => false,
        },
        _ => false,
    }
}

/// Renders the value in scenario-literal syntax.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("unit"),
            Value::Nat(n) => write!(f, "{n}"),
            Value::Int(i) if *i < 0 => write!(f, "{i}"),
            Value::Int(i) => write!(f, "+{i}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::String(s) => write_string_literal(f, s),
            Value::Mutez(a) => write!(f, "mutez {a}"),
            Value::Address(a) => write!(f, "{a}"),
            Value::Pair(l, r) => write!(f, "(pair {l} {r})"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}

pub(crate) fn write_string_literal(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            '\r' => f.write_str("\\r")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}
