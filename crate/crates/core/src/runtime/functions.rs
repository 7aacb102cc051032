use std::collections::HashMap;
use std::fmt;

use crate::ingest::DataItem;
use crate::mapping::FunctionBinding;

pub type FunctionImpl = fn(&[&str]) -> String;

#[derive(Clone, Copy)]
struct Function {
    arity: usize,
    body: FunctionImpl,
}

/// Named pre-mapping transformations.
#[derive(Clone, Default)]
pub struct FunctionRegistry {
    functions: HashMap<String, Function>,
}

impl fmt::Debug for FunctionRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut names: Vec<_> = self.functions.keys().collect();
        names.sort();
        f.debug_struct("FunctionRegistry").field("functions", &names).finish()
    }
}

fn uppercase(args: &[&str]) -> String {
    args[0].to_uppercase()
}

fn concat(args: &[&str]) -> String {
    args.concat()
}

impl FunctionRegistry {
    /// `uppercase(attr)` and `concat(attr1, attr2)`.
    pub fn builtin() -> Self {
        let mut registry = Self::default();
        registry.register("uppercase", 1, uppercase);
        registry.register("concat", 2, concat);
        registry
    }

    pub fn register(&mut self, name: impl Into<String>, arity: usize, body: FunctionImpl) {
        self.functions.insert(name.into(), Function { arity, body });
    }

    pub fn contains(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).map(|f| f.arity)
    }

    /// Apply one binding in place. Returns false, leaving the item untouched,
    /// when an input attribute is missing or the function is unknown.
    pub fn apply(&self, binding: &FunctionBinding, item: &mut DataItem) -> bool {
        let Some(function) = self.functions.get(&binding.name) else {
            return false;
        };
        if binding.params.len() != function.arity {
            return false;
        }
        let mut args = Vec::with_capacity(binding.params.len());
        for param in &binding.params {
            match item.get(param) {
                Some(value) => args.push(value),
                None => return false,
            }
        }
        let value = (function.body)(&args);
        item.set_attribute(binding.output.clone(), value);
        true
    }
}

/// Outcome of [`apply_function`]: the item, and whether the binding applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub item: DataItem,
    pub applied: bool,
}

/// Apply a built-in function binding to an item.
pub fn apply_function(binding: &FunctionBinding, item: DataItem) -> Applied {
    let mut item = item;
    let applied = FunctionRegistry::builtin().apply(binding, &mut item);
    Applied { item, applied }
}
