//! Multi-call scenarios: the casino state threaded through public calls.
//!
//! The harness owns the accounts. Before each call it fills in the message
//! (sender account and attached value) and refreshes the balances of the
//! operator and player copies held in the state; after a successful call it
//! books their new balances back. Rules checked after every step:
//!
//! * no balance is negative, the contract's included;
//! * while a bet is open, `pot + wager.value == address.balance`;
//! * money is neither created nor destroyed.

use std::collections::BTreeMap;
use std::fmt;

use csl_core::interp::{eval_function, CallOutcome, InterpError, RuntimeViolation, Value};
use csl_core::{BigInt, ResolvedModule};
use rand::Rng;

/// One public call. `args` follow the state (or, for the constructor, the
/// environment) in the parameter list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Call {
    pub function: String,
    pub sender: BigInt,
    pub value: BigInt,
    pub args: Vec<Value>,
}

impl Call {
    pub fn new(function: &str, sender: impl Into<BigInt>, value: impl Into<BigInt>) -> Self {
        Call {
            function: function.to_owned(),
            sender: sender.into(),
            value: value.into(),
            args: Vec::new(),
        }
    }

    pub fn arg(mut self, v: impl Into<BigInt>) -> Self {
        self.args.push(Value::Int(v.into()));
        self
    }
}

impl fmt::Display for Call {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.function)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ") from {} with {}", self.sender, self.value)
    }
}

/// Accounts and contract state between calls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct World {
    pub casino: Option<Value>,
    pub wallets: BTreeMap<BigInt, BigInt>,
    /// Account used as block coinbase and transaction origin.
    pub env: BigInt,
}

impl World {
    pub fn new(wallets: impl IntoIterator<Item = (i64, i64)>) -> Self {
        World {
            casino: None,
            wallets: wallets
                .into_iter()
                .map(|(a, b)| (BigInt::from(a), BigInt::from(b)))
                .collect(),
            env: BigInt::from(1),
        }
    }

    pub fn balance(&self, account: &BigInt) -> BigInt {
        self.wallets.get(account).cloned().unwrap_or_default()
    }

    /// Wallets plus the contract's balance.
    pub fn total(&self) -> BigInt {
        let contract = self
            .casino
            .as_ref()
            .and_then(|c| c.get("address.balance"))
            .and_then(Value::as_int)
            .cloned()
            .unwrap_or_default();
        self.wallets.values().sum::<BigInt>() + contract
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Applied,
    Reverted(RuntimeViolation),
}

#[derive(Clone, Debug)]
pub struct Step {
    pub call: Call,
    pub outcome: StepOutcome,
    /// World after the step.
    pub world: World,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub initial: World,
    pub steps: Vec<Step>,
    /// Broken trace rules, as `step n: message`.
    pub violations: Vec<String>,
}

impl Trace {
    pub fn last(&self) -> &World {
        self.steps.last().map_or(&self.initial, |s| &s.world)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{0}` called before the contract exists")]
    NoContract(String),
    #[error("`{function}` has a parameter of type `{ty}`, which the harness cannot supply")]
    Unsupported { function: String, ty: String },
    #[error("`{function}` did not return a single state")]
    BadResult { function: String },
    #[error(transparent)]
    Interp(#[from] InterpError),
}

fn address(account: &BigInt, balance: BigInt) -> Value {
    record(&[
        ("address", Value::Int(account.clone())),
        ("balance", Value::Int(balance)),
    ])
}

fn record(fields: &[(&str, Value)]) -> Value {
    Value::Record(fields.iter().map(|(n, v)| ((*n).into(), v.clone())).collect())
}

fn int_at<'v>(v: &'v Value, path: &str) -> &'v BigInt {
    v.get(path)
        .and_then(Value::as_int)
        .unwrap_or_else(|| panic!("state has no integer `{path}`"))
}

const ROLES: [&str; 2] = ["operator", "player"];

/// Runs `calls` from `world`, checking the trace rules after every step.
pub fn simulate_scenario(module: &ResolvedModule, world: World, calls: &[Call]) -> Result<Trace, ScenarioError> {
    let mut trace = Trace {
        initial: world.clone(),
        steps: Vec::new(),
        violations: Vec::new(),
    };
    let mut world = world;
    for (n, call) in calls.iter().enumerate() {
        let outcome = step(module, &mut world, call)?;
        for v in check_rules(&world, &trace.initial) {
            trace.violations.push(format!("step {}: {call}: {v}", n + 1));
        }
        trace.steps.push(Step {
            call: call.clone(),
            outcome,
            world: world.clone(),
        });
    }
    Ok(trace)
}

fn step(module: &ResolvedModule, world: &mut World, call: &Call) -> Result<StepOutcome, ScenarioError> {
    let id = module
        .function_by_name(&call.function)
        .ok_or_else(|| ScenarioError::UnknownFunction(call.function.clone()))?;
    let func = module.function(id);
    let msg = record(&[
        ("sender", address(&call.sender, world.balance(&call.sender))),
        ("value", Value::Int(call.value.clone())),
    ]);
    // The contract never reads these balances; zero satisfies the
    // small-scope pins.
    let env = address(&world.env, BigInt::default());

    let mut args = Vec::new();
    let mut synced = None;
    for p in &func.params {
        if args.len() + call.args.len() >= func.params.len() {
            break;
        }
        let ty = module.type_name(p.ty);
        let v = match ty.as_str() {
            "Casino" => {
                let mut c = world
                    .casino
                    .clone()
                    .ok_or_else(|| ScenarioError::NoContract(call.function.clone()))?;
                *c.get_mut("msg").expect("state has msg") = msg.clone();
                for role in ROLES {
                    let account = int_at(&c, &format!("{role}.address")).clone();
                    *c.get_mut(&format!("{role}.balance")).expect("account balance") =
                        Value::Int(world.balance(&account));
                }
                synced = Some(c.clone());
                c
            }
            "Message" => msg.clone(),
            "Block" => record(&[("coinbase", env.clone())]),
            "Transaction" => record(&[("origin", env.clone())]),
            _ => {
                return Err(ScenarioError::Unsupported {
                    function: call.function.clone(),
                    ty,
                })
            }
        };
        args.push(v);
    }
    args.extend(call.args.iter().cloned());

    match eval_function(module, &call.function, &args)? {
        CallOutcome::Reverted(v) => Ok(StepOutcome::Reverted(v)),
        CallOutcome::Returned(mut vals) => {
            let out = match (vals.pop(), vals.is_empty()) {
                (Some(out @ Value::Record(_)), true) => out,
                _ => {
                    return Err(ScenarioError::BadResult {
                        function: call.function.clone(),
                    })
                }
            };
            if let Some(before) = synced {
                // A role may now hold a different account; book it if either
                // the account or its balance changed.
                for role in ROLES {
                    let now = out.get(role).expect("state has role");
                    if Some(now) != before.get(role) {
                        let account = int_at(now, "address").clone();
                        world.wallets.insert(account, int_at(now, "balance").clone());
                    }
                }
            }
            world.casino = Some(out);
            Ok(StepOutcome::Applied)
        }
    }
}

fn check_rules(world: &World, initial: &World) -> Vec<String> {
    let mut out = Vec::new();
    let zero = BigInt::default();
    for (account, b) in &world.wallets {
        if *b < zero {
            out.push(format!("account {account} has negative balance {b}"));
        }
    }
    if let Some(c) = &world.casino {
        let balance = int_at(c, "address.balance");
        if *balance < zero {
            out.push(format!("contract balance {balance} is negative"));
        }
        if *int_at(c, "state") == BigInt::from(2) {
            let (pot, wager) = (int_at(c, "pot"), int_at(c, "wager.value"));
            if pot + wager != *balance {
                out.push(format!("open bet: pot {pot} + wager {wager} != balance {balance}"));
            }
        }
    }
    if world.total() != initial.total() {
        out.push(format!(
            "money not conserved: {} before, {} now",
            initial.total(),
            world.total()
        ));
    }
    out
}

/// A random call sequence starting with `init`. Values, secrets, guesses
/// and amounts are drawn from `0..=max`.
pub fn random_calls(rng: &mut impl Rng, len: usize, senders: &[i64], max: i64) -> Vec<Call> {
    let pick = |rng: &mut dyn rand::RngCore| -> (i64, i64) {
        (senders[rng.gen_range(0..senders.len())], rng.gen_range(0..=max))
    };
    let (s, _) = pick(rng);
    let mut calls = vec![Call::new("init", s, 0)];
    for _ in 1..len {
        let (sender, value) = pick(rng);
        let call = match rng.gen_range(0..6) {
            0 => Call::new("createGame", sender, value).arg(rng.gen_range(0..=max)),
            1 => Call::new("placeBet", sender, value).arg(rng.gen_range(0..=1)),
            2 => Call::new("decideBet", sender, value),
            3 => Call::new("addToPot", sender, value),
            4 => Call::new("removeFromPot", sender, value).arg(rng.gen_range(0..=max)),
            _ => Call::new("closeCasino", sender, value),
        };
        calls.push(call);
    }
    calls
}
