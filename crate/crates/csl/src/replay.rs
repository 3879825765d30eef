//! Running solver counterexamples through the interpreter.

use csl_core::interp::{eval_function, CallOutcome, InterpError, RuntimeViolation, Value};
use csl_core::logic::Scalar;
use csl_core::semantics::{Shape, Ty};
use csl_core::smt::Model;
use csl_core::vcgen::Obligation;
use csl_core::{BigInt, ResolvedModule};

/// Entry arguments described by `model`. Leaves the model leaves out get
/// the smallest value of their type; out-of-range integers are clamped
/// into their type's interval.
pub fn args_from_model(module: &ResolvedModule, function: &str, model: &Model) -> Option<Vec<Value>> {
    let func = module.function(module.function_by_name(function)?);
    Some(
        func.params
            .iter()
            .map(|p| build(module, p.ty, &p.name, model))
            .collect(),
    )
}

fn build(module: &ResolvedModule, ty: Ty, path: &str, model: &Model) -> Value {
    match module.shape(ty) {
        Shape::Bool => Value::Bool(matches!(model.get(path), Some(Scalar::Bool(true)))),
        Shape::Int => {
            let bounds = module.bounds_of(ty);
            let mut n = match model.get(path) {
                Some(Scalar::Int(n)) => n.clone(),
                _ => bounds.map_or_else(BigInt::default, |b| b.lo.clone()),
            };
            if let Some(b) = bounds {
                n = n.clamp(b.lo.clone(), b.hi.clone());
            }
            Value::Int(n)
        }
        Shape::Record(_) => Value::Record(
            module
                .fields(ty)
                .unwrap_or(&[])
                .iter()
                .map(|f| {
                    (
                        f.name.clone(),
                        build(module, f.ty, &format!("{path}.{}", f.name), model),
                    )
                })
                .collect(),
        ),
    }
}

#[derive(Clone, Debug)]
pub struct Replay {
    pub id: String,
    pub args: Vec<Value>,
    pub outcome: CallOutcome,
    /// The interpreter failed the obligation's own check: same function,
    /// kind and span.
    pub reproduced: bool,
}

impl Replay {
    pub fn violation(&self) -> Option<&RuntimeViolation> {
        match &self.outcome {
            CallOutcome::Reverted(v) => Some(v),
            CallOutcome::Returned(_) => None,
        }
    }
}

pub fn replay(module: &ResolvedModule, ob: &Obligation, model: &Model) -> Result<Replay, InterpError> {
    let args = args_from_model(module, &ob.function, model)
        .ok_or_else(|| InterpError::UnknownFunction(ob.function.to_string()))?;
    let outcome = eval_function(module, &ob.function, &args)?;
    let reproduced = match &outcome {
        CallOutcome::Reverted(v) => {
            v.function == ob.function && v.kind.obligation_kind() == Some(ob.kind) && v.span == ob.span
        }
        CallOutcome::Returned(_) => false,
    };
    Ok(Replay {
        id: ob.id.clone(),
        args,
        outcome,
        reproduced,
    })
}
