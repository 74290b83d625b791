use thiserror::Error;

use super::types::{Ty, Value};
use super::Model;

/// Default bound on the number of input valuations per cycle.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("input domain has {size} valuations, above the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },
}

/// Product of all input leaf domains.
pub fn input_domain_size(model: &Model) -> u128 {
    model
        .inputs
        .iter()
        .fold(1u128, |acc, v| acc.saturating_mul(v.ty.cardinality()))
}

/// Leaf codes in lexicographic order (first leaf most significant).
struct LeafOdometer {
    ranges: Vec<(i64, i64)>,
    current: Option<Vec<i64>>,
}

fn scalar_leaves(ty: &Ty, out: &mut Vec<Ty>) {
    match ty {
        Ty::Array(elem, len) => (0..*len).for_each(|_| scalar_leaves(elem, out)),
        Ty::Record(r) => r.fields.iter().for_each(|(_, t)| scalar_leaves(t, out)),
        t => out.push(t.clone()),
    }
}

/// Rebuilds a value of type `ty` from scalar leaf codes in canonical order.
pub(crate) fn assemble(ty: &Ty, codes: &mut impl Iterator<Item = i64>) -> Value {
    match ty {
        Ty::Array(elem, len) => Value::Array((0..*len).map(|_| assemble(elem, codes)).collect()),
        Ty::Record(r) => Value::Record(r.fields.iter().map(|(_, t)| assemble(t, codes)).collect()),
        t => Value::from_code(t, codes.next().expect("enough leaf codes")),
    }
}

impl Iterator for LeafOdometer {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let cur = self.current.as_mut()?;
        let out = cur.clone();
        // odometer, last leaf fastest
        let mut carry = true;
        for (slot, (lo, hi)) in cur.iter_mut().zip(&self.ranges).rev() {
            if *slot < *hi {
                *slot += 1;
                carry = false;
                break;
            }
            *slot = *lo;
        }
        if carry {
            self.current = None;
        }
        Some(out)
    }
}

/// Streams every input valuation of `model` exactly once.
pub fn enumerate_inputs(
    model: &Model,
    cap: Option<u128>,
) -> Result<impl Iterator<Item = Vec<Value>> + '_, EnumerateError> {
    let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    let size = input_domain_size(model);
    if size > cap {
        return Err(EnumerateError::CapExceeded { size, cap });
    }
    let mut types = Vec::new();
    for v in &model.inputs {
        scalar_leaves(&v.ty, &mut types);
    }
    let ranges: Vec<(i64, i64)> = types.iter().map(|t| t.code_range().unwrap()).collect();
    let start = ranges.iter().map(|r| r.0).collect();
    let leaves = LeafOdometer {
        ranges,
        current: Some(start),
    };
    Ok(leaves.map(move |codes| {
        let mut it = codes.into_iter();
        model
            .inputs
            .iter()
            .map(|v| assemble(&v.ty, &mut it))
            .collect()
    }))
}
