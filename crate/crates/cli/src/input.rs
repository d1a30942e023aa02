//! Command-line inputs: a path to a JSON file, inline JSON, or a builtin name.

use std::path::Path;

use k3e_core::classify::catalog;
use k3e_core::lattice::{parse_builtin, IntLattice};
use k3e_core::ns::{DivisorClass, NSLattice};
use serde_json::Value;

use crate::report::Failure;

fn load_text(arg: &str) -> Result<Option<String>, Failure> {
    let p = Path::new(arg);
    if p.is_file() {
        return std::fs::read_to_string(p).map(Some).map_err(|e| Failure::parse(format!("cannot read {}: {}", arg, e)));
    }
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(Some(arg.to_string()));
    }
    Ok(None)
}

fn json(text: &str, what: &str) -> Result<Value, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::parse(format!("malformed {} JSON: {}", what, e)))
}

fn lattice_from_value(v: Value) -> Result<IntLattice, Failure> {
    match v {
        Value::Array(ref items) if items.first().is_some_and(|x| x.is_array()) => {
            let gram: Vec<Vec<i64>> = serde_json::from_value(v).map_err(|e| Failure::parse(e.to_string()))?;
            Ok(IntLattice::from_rows(&gram)?)
        }
        Value::Array(mut items) if items.len() == 1 => lattice_from_value(items.remove(0)),
        Value::Object(_) => serde_json::from_value(v).map_err(|e| Failure::parse(format!("not a lattice: {}", e))),
        _ => Err(Failure::parse("expected {\"gram\": [[...]]} or a Gram matrix")),
    }
}

/// `{"name", "gram"}`, a bare Gram matrix, or a name like `E8(2)+A1`.
pub fn lattice(arg: &str) -> Result<IntLattice, Failure> {
    match load_text(arg)? {
        Some(text) => lattice_from_value(json(&text, "lattice")?),
        None => Ok(parse_builtin(arg)?),
    }
}

/// An NS spec `{"L": {...}}`, or anything [`lattice`] accepts, standing for `L`.
pub fn ns(arg: &str) -> Result<NSLattice, Failure> {
    let l = match load_text(arg)? {
        Some(text) => {
            let mut v = json(&text, "NS spec")?;
            match v.get_mut("L").map(Value::take) {
                Some(inner) => lattice_from_value(inner)?,
                None => lattice_from_value(v)?,
            }
        }
        None => parse_builtin(arg)?,
    };
    Ok(NSLattice::new(l)?)
}

/// `{"x", "y", "z"}`, `[x, y, z1, ...]` or `x,y,z1,...`.
pub fn divisor(arg: &str) -> Result<DivisorClass, Failure> {
    if let Some(text) = load_text(arg)? {
        let v = json(&text, "divisor")?;
        if v.is_array() {
            let flat: Vec<i64> = serde_json::from_value(v).map_err(|e| Failure::parse(e.to_string()))?;
            return Ok(DivisorClass::from_flat(&flat)?);
        }
        return serde_json::from_value(v).map_err(|e| Failure::parse(format!("not a divisor class: {}", e)));
    }
    let flat: Vec<i64> = arg
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Failure::parse(format!("bad divisor '{}'", arg))))
        .collect::<Result<_, _>>()?;
    Ok(DivisorClass::from_flat(&flat)?)
}

pub fn catalog_file(path: &str) -> Result<Vec<IntLattice>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {}", path, e)))?;
    Ok(catalog::parse(&text)?)
}

pub fn primes(list: &str) -> Result<Vec<i64>, Failure> {
    list.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| Failure::parse(format!("bad prime list '{}'", list))))
        .collect()
}
