//! Local stand-ins for remotely hosted functions, keyed by Z item.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::model::ItemId;

use super::graph::KnowledgeGraph;

/// A value flowing into or out of a function.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Item(ItemId),
    Text(String),
    Number(f64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Item(i) => write!(f, "{i}"),
            Value::Text(t) => write!(f, "{t:?}"),
            Value::Number(n) => write!(f, "{n}"),
        }
    }
}

/// Implementations must be pure: same arguments, same graph, same result.
pub type NativeFn = Arc<dyn Fn(&[Value], &KnowledgeGraph) -> Option<Value> + Send + Sync>;

#[derive(Clone)]
pub struct RegisteredFunction {
    pub name: String,
    pub arity: usize,
    imp: NativeFn,
}

impl RegisteredFunction {
    /// `None` when the argument count is wrong or the function has no
    /// value for these arguments.
    pub fn call(&self, args: &[Value], graph: &KnowledgeGraph) -> Option<Value> {
        if args.len() != self.arity {
            return None;
        }
        (self.imp)(args, graph)
    }
}

impl fmt::Debug for RegisteredFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegisteredFunction").field("name", &self.name).field("arity", &self.arity).finish()
    }
}

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("function manifest line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("no built-in function named `{0}`")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Birth date property, read as a year.
const DATE_OF_BIRTH: ItemId = ItemId::p(569);
const DATE_OF_DEATH: ItemId = ItemId::p(570);

/// The item the demo age function is registered under by default.
pub const DEFAULT_AGE_FUNCTION: ItemId = ItemId::z(12345);

/// Names and arities of the built-in implementations.
pub const BUILTINS: [(&str, usize); 5] =
    [("identity", 1), ("label", 1), ("age", 1), ("first-value", 1), ("out-degree", 1)];

fn builtin(name: &str) -> Option<(usize, NativeFn)> {
    let imp: NativeFn = match name {
        "identity" => Arc::new(|args: &[Value], _: &KnowledgeGraph| Some(args[0].clone())),
        "label" => Arc::new(|args: &[Value], g: &KnowledgeGraph| match &args[0] {
            Value::Item(i) => g
                .label(*i, "en")
                .or_else(|| g.labels().find(|(item, _, _)| item == i).map(|(_, _, t)| t))
                .map(|t| Value::Text(t.to_string())),
            Value::Text(t) => Some(Value::Text(t.clone())),
            Value::Number(_) => None,
        }),
        // years between birth and death; living people have no age here,
        // which keeps the result independent of the clock
        "age" => Arc::new(|args: &[Value], g: &KnowledgeGraph| match args[0] {
            Value::Item(i) => {
                let born = g.value(i, DATE_OF_BIRTH)?;
                let died = g.value(i, DATE_OF_DEATH)?;
                Some(Value::Number(died - born))
            }
            _ => None,
        }),
        "first-value" => Arc::new(|args: &[Value], g: &KnowledgeGraph| match args[0] {
            Value::Item(i) => g.values_of(i).next().map(|(_, v)| Value::Number(v)),
            _ => None,
        }),
        "out-degree" => Arc::new(|args: &[Value], g: &KnowledgeGraph| match args[0] {
            Value::Item(i) => Some(Value::Number(g.triples().filter(|t| t.subject == i).count() as f64)),
            _ => None,
        }),
        _ => return None,
    };
    let arity = BUILTINS.iter().find(|(n, _)| *n == name)?.1;
    Some((arity, imp))
}

#[derive(Debug, Clone, Default)]
pub struct FunctionRegistry {
    functions: BTreeMap<ItemId, RegisteredFunction>,
}

impl FunctionRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The age function under [`DEFAULT_AGE_FUNCTION`].
    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register_builtin(DEFAULT_AGE_FUNCTION, "age").expect("age is built in");
        r
    }

    pub fn register(&mut self, zitem: ItemId, name: &str, arity: usize, imp: NativeFn) {
        self.functions.insert(zitem, RegisteredFunction { name: name.to_string(), arity, imp });
    }

    pub fn register_builtin(&mut self, zitem: ItemId, name: &str) -> Result<(), RegistryError> {
        let (arity, imp) = builtin(name).ok_or_else(|| RegistryError::UnknownBuiltin(name.to_string()))?;
        self.register(zitem, name, arity, imp);
        Ok(())
    }

    /// Manifest lines are `ZITEM ARITY BUILTIN`; `#` starts a comment.
    pub fn parse_manifest(text: &str) -> Result<Self, RegistryError> {
        let mut r = Self::empty();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fields: Vec<&str> = raw.split('#').next().unwrap_or("").split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let bad = |message: String| RegistryError::Format { line, message };
            let [z, arity, name] = fields[..] else {
                return Err(bad(format!("expected `zitem arity builtin`, found {} fields", fields.len())));
            };
            let zitem: ItemId = z
                .parse()
                .ok()
                .filter(|i: &ItemId| i.is_z())
                .ok_or_else(|| bad(format!("`{z}` is not a Z item")))?;
            let arity: usize = arity.parse().map_err(|_| bad(format!("`{arity}` is not an arity")))?;
            let (builtin_arity, imp) = builtin(name).ok_or_else(|| RegistryError::UnknownBuiltin(name.to_string()))?;
            if arity != builtin_arity {
                return Err(bad(format!("`{name}` takes {builtin_arity} argument(s), manifest says {arity}")));
            }
            r.register(zitem, name, arity, imp);
        }
        Ok(r)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, RegistryError> {
        Self::parse_manifest(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, zitem: ItemId) -> Option<&RegisteredFunction> {
        self.functions.get(&zitem)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }
}
