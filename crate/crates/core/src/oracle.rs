//! Brute-force reference: concrete simulation of every input sequence
//! within the single-state path bound.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use crate::model::{
    default_values, enumerate_inputs, eval_cycle, EnumerateError, Fired, Model, StateId,
    TransitionId, Value,
};

/// Everything the concrete simulation could reach.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Reach {
    /// (entry state, fired) sequences of completed paths.
    pub signatures: BTreeSet<Vec<(StateId, Fired)>>,
    pub states: BTreeSet<StateId>,
    pub transitions: BTreeSet<TransitionId>,
    /// Guard condition vectors with their outcome, per transition.
    pub vectors: BTreeMap<TransitionId, BTreeSet<Vec<bool>>>,
    /// Number of (node, input) pairs whose cycle faulted.
    pub faults: usize,
}

type Key = (StateId, Vec<Value>, Vec<bool>, bool);
type Suffixes = Rc<BTreeSet<Vec<(StateId, Fired)>>>;

struct Walker<'a> {
    model: &'a Model,
    inputs: Vec<Vec<Value>>,
    memo: HashMap<Key, Suffixes>,
    reach: Reach,
}

impl Walker<'_> {
    fn walk(
        &mut self,
        state: StateId,
        outputs: Vec<Value>,
        visited: Vec<bool>,
        stutter: bool,
    ) -> Suffixes {
        let done = visited[state] && !stutter;
        if done {
            return Rc::new(BTreeSet::from([Vec::new()]));
        }
        let key = (state, outputs, visited, stutter);
        if let Some(s) = self.memo.get(&key) {
            return s.clone();
        }
        let (_, outputs, visited, _) = &key;
        let mut next_visited = visited.clone();
        if !stutter {
            next_visited[state] = true;
        }
        self.reach.states.insert(state);
        let mut suffixes = BTreeSet::new();
        for i in 0..self.inputs.len() {
            let r = match eval_cycle(self.model, state, &self.inputs[i], outputs) {
                Ok(r) => r,
                Err(_) => {
                    self.reach.faults += 1;
                    continue;
                }
            };
            for g in &r.guards {
                self.reach
                    .vectors
                    .entry(g.transition)
                    .or_default()
                    .insert(g.conditions.clone());
            }
            if let Fired::Transition(t) = r.fired {
                self.reach.transitions.insert(t);
            }
            let grant = !stutter && r.weak_fired;
            let rest = self.walk(r.next, r.outputs, next_visited.clone(), grant);
            for tail in rest.iter() {
                let mut seq = Vec::with_capacity(tail.len() + 1);
                seq.push((state, r.fired));
                seq.extend_from_slice(tail);
                suffixes.insert(seq);
            }
        }
        let s = Rc::new(suffixes);
        self.memo.insert(key, s.clone());
        s
    }
}

/// Simulates every input sequence from the initial state with the same
/// visited/stutter bookkeeping as the symbolic driver.
pub fn brute_force_reach(model: &Model, cap: Option<u128>) -> Result<Reach, EnumerateError> {
    let inputs: Vec<Vec<Value>> = enumerate_inputs(model, cap)?.collect();
    let mut w = Walker {
        model,
        inputs,
        memo: HashMap::new(),
        reach: Reach::default(),
    };
    let sigs = w.walk(
        model.initial,
        default_values(model),
        vec![false; model.states.len()],
        false,
    );
    w.reach.signatures = (*sigs).clone();
    w.reach.signatures.retain(|s| !s.is_empty());
    Ok(w.reach)
}
