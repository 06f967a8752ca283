use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use crate::alphabet::Alphabet;
use crate::error::{parse_err, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StackAction {
    Pop,
    NoOp,
    Push,
}

impl StackAction {
    pub fn value(self) -> i8 {
        match self {
            StackAction::Push => 1,
            StackAction::NoOp => 0,
            StackAction::Pop => -1,
        }
    }

    pub fn from_value(v: i8) -> Self {
        match v.signum() {
            1 => StackAction::Push,
            -1 => StackAction::Pop,
            _ => StackAction::NoOp,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StackAction::Push => "push",
            StackAction::NoOp => "noop",
            StackAction::Pop => "pop",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "push" => Some(StackAction::Push),
            "pop" => Some(StackAction::Pop),
            "noop" => Some(StackAction::NoOp),
            _ => None,
        }
    }
}

impl fmt::Display for StackAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Top-of-stack symbol, `None` for the empty stack.
pub type Reading = Option<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub target: usize,
    pub action: StackAction,
}

/// `(state, input, reading)`.
pub type RuleKey = (usize, usize, Reading);

/// Deterministic pushdown automaton whose stack alphabet is the input
/// alphabet: a push always stores the current input symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretePda {
    alphabet: Alphabet,
    labels: Vec<String>,
    start: usize,
    accept: Vec<bool>,
    trap: Vec<bool>,
    rules: BTreeMap<RuleKey, Transition>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PdaOutcome {
    Legal,
    Illegal,
    /// Entered a state flagged as a trap.
    Trap,
    /// Popped the empty stack.
    PopEmpty,
}

impl PdaOutcome {
    pub fn is_legal(self) -> bool {
        self == PdaOutcome::Legal
    }
}

impl DiscretePda {
    pub fn new(alphabet: Alphabet, labels: Vec<String>, start: usize) -> Result<Self> {
        if start >= labels.len() {
            return Err(Error::OutOfRange(format!(
                "start state {start} of {}",
                labels.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if l.is_empty()
                || l.chars().any(|c| c.is_whitespace() || c == ',')
                || !seen.insert(l.clone())
            {
                return Err(Error::Config(format!("bad or duplicate state label `{l}`")));
            }
        }
        let n = labels.len();
        Ok(DiscretePda {
            alphabet,
            labels,
            start,
            accept: vec![false; n],
            trap: vec![false; n],
            rules: BTreeMap::new(),
        })
    }

    /// States named `1..=n`.
    pub fn with_numbered_states(alphabet: Alphabet, n: usize, start: usize) -> Result<Self> {
        Self::new(alphabet, (1..=n).map(|i| i.to_string()).collect(), start)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, q: usize) -> &str {
        &self.labels[q]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_accept(&self, q: usize) -> bool {
        self.accept[q]
    }

    pub fn is_trap(&self, q: usize) -> bool {
        self.trap[q]
    }

    pub fn set_accept(&mut self, q: usize, on: bool) {
        self.accept[q] = on;
    }

    pub fn set_trap(&mut self, q: usize, on: bool) {
        self.trap[q] = on;
    }

    pub fn rules(&self) -> &BTreeMap<RuleKey, Transition> {
        &self.rules
    }

    pub fn rule(&self, state: usize, input: usize, reading: Reading) -> Option<Transition> {
        self.rules.get(&(state, input, reading)).copied()
    }

    /// Adds a rule; a second, different rule for the same key is an error.
    pub fn add_rule(
        &mut self,
        state: usize,
        input: usize,
        reading: Reading,
        target: usize,
        action: StackAction,
    ) -> Result<()> {
        let n = self.n_states();
        if state >= n || target >= n {
            return Err(Error::OutOfRange(format!(
                "state index in rule {state} -> {target}"
            )));
        }
        if input >= self.alphabet.len() || reading.is_some_and(|r| r >= self.alphabet.len()) {
            return Err(Error::OutOfRange("symbol index in rule".into()));
        }
        let t = Transition { target, action };
        match self.rules.insert((state, input, reading), t) {
            Some(old) if old != t => Err(Error::Nondeterministic(format!(
                "({}, {}, {}) has two rules",
                self.labels[state],
                self.alphabet.symbol(input),
                self.reading_name(reading)
            ))),
            _ => Ok(()),
        }
    }

    pub fn reading_name(&self, r: Reading) -> String {
        match r {
            Some(k) => self.alphabet.symbol(k).to_string(),
            None => "phi".to_string(),
        }
    }

    /// Adds `(q, *, *) -> q, push` for every input and reading.
    pub fn make_absorbing(&mut self, q: usize) -> Result<()> {
        for l in 0..self.alphabet.len() {
            for r in std::iter::once(None).chain((0..self.alphabet.len()).map(Some)) {
                self.rules.insert(
                    (q, l, r),
                    Transition {
                        target: q,
                        action: StackAction::Push,
                    },
                );
            }
        }
        Ok(())
    }

    /// Keeps only the states and rules reachable from the start
    /// configuration. State order follows first discovery.
    pub fn trim(&self) -> DiscretePda {
        let explored = explore(self.start, self.alphabet.len(), usize::MAX, |q, l, r| {
            Ok(self.rule(q, l, r).map(|t| (t.target, t.action)))
        })
        .expect("explore without limit cannot fail");
        let mut order: Vec<usize> = Vec::new();
        let mut index = HashMap::new();
        let mut visit = |q: usize, order: &mut Vec<usize>| {
            *index.entry(q).or_insert_with(|| {
                order.push(q);
                order.len() - 1
            })
        };
        visit(self.start, &mut order);
        for (&(q, _, _), t) in &explored.rules {
            visit(q, &mut order);
            if let Some((target, _)) = t {
                visit(*target, &mut order);
            }
        }
        let mut out = DiscretePda {
            alphabet: self.alphabet.clone(),
            labels: order.iter().map(|&q| self.labels[q].clone()).collect(),
            start: 0,
            accept: order.iter().map(|&q| self.accept[q]).collect(),
            trap: order.iter().map(|&q| self.trap[q]).collect(),
            rules: BTreeMap::new(),
        };
        for (&(q, l, r), t) in &explored.rules {
            if let Some((target, action)) = t {
                out.rules.insert(
                    (index[&q], l, r),
                    Transition {
                        target: index[target],
                        action: *action,
                    },
                );
            }
        }
        out
    }

    /// Canonical relabelling by breadth-first search from the start state,
    /// visiting successors in rule-key order.
    pub fn canonical_form(&self) -> CanonicalPda {
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        ids.insert(self.start, 0);
        queue.push_back(self.start);
        while let Some(q) = queue.pop_front() {
            for (_, t) in self
                .rules
                .range((q, 0, None)..=(q, usize::MAX, Some(usize::MAX)))
            {
                if !ids.contains_key(&t.target) {
                    ids.insert(t.target, ids.len());
                    queue.push_back(t.target);
                }
            }
        }
        let mut accept = vec![false; ids.len()];
        let mut trap = vec![false; ids.len()];
        for (&q, &id) in &ids {
            accept[id] = self.accept[q];
            trap[id] = self.trap[q];
        }
        let mut rules: Vec<(usize, usize, Reading, usize, i8)> = self
            .rules
            .iter()
            .filter(|((q, _, _), _)| ids.contains_key(q))
            .map(|(&(q, l, r), t)| (ids[&q], l, r, ids[&t.target], t.action.value()))
            .collect();
        rules.sort();
        CanonicalPda {
            accept,
            trap,
            rules,
        }
    }

    /// Same structure up to state renaming (compares canonical forms).
    pub fn is_isomorphic(&self, other: &DiscretePda) -> bool {
        self.alphabet.symbols() == other.alphabet.symbols()
            && self.canonical_form() == other.canonical_form()
    }

    /// Text form: header lines then one rule per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alphabet {}", self.alphabet.symbols().join(" "));
        if let Some(e) = self.alphabet.end_symbol() {
            let _ = writeln!(out, "end {}", self.alphabet.symbol(e));
        }
        let _ = writeln!(out, "states {}", self.labels.join(" "));
        let _ = writeln!(out, "start {}", self.labels[self.start]);
        let pick = |flags: &[bool]| -> Vec<&str> {
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(q, _)| self.labels[q].as_str())
                .collect()
        };
        let _ = writeln!(out, "accept {}", pick(&self.accept).join(" "));
        let traps = pick(&self.trap);
        if !traps.is_empty() {
            let _ = writeln!(out, "trap {}", traps.join(" "));
        }
        for (&(q, l, r), t) in &self.rules {
            let _ = writeln!(
                out,
                "{} , {} , {} -> {} , {}",
                self.labels[q],
                self.alphabet.symbol(l),
                self.reading_name(r),
                self.labels[t.target],
                t.action
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut symbols: Option<Vec<String>> = None;
        let mut end: Option<String> = None;
        let mut labels: Option<Vec<String>> = None;
        let mut start: Option<String> = None;
        let mut accept: Vec<String> = Vec::new();
        let mut trap: Vec<String> = Vec::new();
        let mut rule_lines = Vec::new();

        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.contains("->") {
                rule_lines.push((line_no, line.to_string()));
                continue;
            }
            let mut words = line.split_whitespace();
            let key = words.next().unwrap_or_default();
            let rest: Vec<String> = words.map(str::to_string).collect();
            match key {
                "alphabet" => symbols = Some(rest),
                "end" => end = rest.into_iter().next(),
                "states" => labels = Some(rest),
                "start" => start = rest.into_iter().next(),
                "accept" => accept = rest,
                "trap" => trap = rest,
                other => return Err(parse_err(line_no, format!("unknown header `{other}`"))),
            }
        }

        let symbols = symbols.ok_or_else(|| parse_err(0, "missing `alphabet` line"))?;
        let alphabet = Alphabet::new(&symbols, end.as_deref())?;
        let labels = labels.ok_or_else(|| parse_err(0, "missing `states` line"))?;
        let start = start.ok_or_else(|| parse_err(0, "missing `start` line"))?;
        let find = |l: &str, line: usize| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| parse_err(line, format!("unknown state `{l}`")))
        };
        let start_ix = find(&start, 0)?;
        let mut pda = DiscretePda::new(alphabet, labels.clone(), start_ix)?;
        for a in &accept {
            let q = find(a, 0)?;
            pda.accept[q] = true;
        }
        for a in &trap {
            let q = find(a, 0)?;
            pda.trap[q] = true;
        }
        for (line_no, line) in rule_lines {
            let (lhs, rhs) = line.split_once("->").expect("checked above");
            let lhs: Vec<&str> = lhs.split(',').map(str::trim).collect();
            let rhs: Vec<&str> = rhs.split(',').map(str::trim).collect();
            if lhs.len() != 3 || rhs.len() != 2 {
                return Err(parse_err(
                    line_no,
                    "expected `state , input , reading -> state , action`",
                ));
            }
            let q = find(lhs[0], line_no)?;
            let l = pda
                .alphabet
                .index_of(lhs[1])
                .ok_or_else(|| parse_err(line_no, format!("unknown input `{}`", lhs[1])))?;
            let r =
                if lhs[2] == "phi" {
                    None
                } else {
                    Some(pda.alphabet.index_of(lhs[2]).ok_or_else(|| {
                        parse_err(line_no, format!("unknown reading `{}`", lhs[2]))
                    })?)
                };
            let target = find(rhs[0], line_no)?;
            let action = StackAction::parse(rhs[1])
                .ok_or_else(|| parse_err(line_no, format!("unknown action `{}`", rhs[1])))?;
            pda.add_rule(q, l, r, target, action)
                .map_err(|e| parse_err(line_no, e.to_string()))?;
        }
        Ok(pda)
    }
}

/// Structure of a PDA with states renamed canonically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalPda {
    pub accept: Vec<bool>,
    pub trap: Vec<bool>,
    pub rules: Vec<(usize, usize, Reading, usize, i8)>,
}

/// Runs the machine on `tokens`, appending the end symbol if the alphabet has
/// one. Accepts in an accept state with an empty stack. A missing rule rejects.
pub fn run_pda(pda: &DiscretePda, tokens: &[usize]) -> PdaOutcome {
    let mut stack: Vec<usize> = Vec::new();
    let mut q = pda.start;
    if pda.trap[q] {
        return PdaOutcome::Trap;
    }
    let end = pda.alphabet.end_symbol();
    for &l in tokens.iter().chain(end.iter()) {
        let Some(t) = pda.rule(q, l, stack.last().copied()) else {
            return PdaOutcome::Illegal;
        };
        match t.action {
            StackAction::Push => stack.push(l),
            StackAction::Pop => {
                if stack.pop().is_none() {
                    return PdaOutcome::PopEmpty;
                }
            }
            StackAction::NoOp => {}
        }
        q = t.target;
        if pda.trap[q] {
            return PdaOutcome::Trap;
        }
    }
    if pda.accept[q] && stack.is_empty() {
        PdaOutcome::Legal
    } else {
        PdaOutcome::Illegal
    }
}

/// Result of pushdown reachability.
pub(crate) struct Explored {
    /// Every reachable `(state, input, reading)` and its successor.
    pub rules: BTreeMap<RuleKey, Option<(usize, StackAction)>>,
}

/// Exact reachability for a deterministic PDA given as a transition function.
///
/// The search runs over contexts `(entry state, top symbol)`. For each
/// context it collects the states reachable while that symbol stays on top
/// and the states reached right after popping it; a push links to a child
/// context whose exit states feed back into the parent. Pops on the empty
/// stack are recorded but not followed. `delta` may create new states; the
/// number of distinct states seen is capped at `max_states`.
pub(crate) fn explore<F>(
    start: usize,
    n_inputs: usize,
    max_states: usize,
    mut delta: F,
) -> Result<Explored>
where
    F: FnMut(usize, usize, Reading) -> Result<Option<(usize, StackAction)>>,
{
    let mut ctx_index: HashMap<(usize, Reading), usize> = HashMap::new();
    let mut levels: Vec<BTreeSet<usize>> = Vec::new();
    let mut exits: Vec<BTreeSet<usize>> = Vec::new();
    let mut tops: Vec<Reading> = Vec::new();
    let mut memo: BTreeMap<RuleKey, Option<(usize, StackAction)>> = BTreeMap::new();
    let mut states: BTreeSet<usize> = BTreeSet::new();
    states.insert(start);

    let mut get_ctx = |entry: usize,
                       top: Reading,
                       levels: &mut Vec<BTreeSet<usize>>,
                       exits: &mut Vec<BTreeSet<usize>>,
                       tops: &mut Vec<Reading>| {
        *ctx_index.entry((entry, top)).or_insert_with(|| {
            levels.push(BTreeSet::from([entry]));
            exits.push(BTreeSet::new());
            tops.push(top);
            levels.len() - 1
        })
    };
    get_ctx(start, None, &mut levels, &mut exits, &mut tops);

    let mut changed = true;
    while changed {
        changed = false;
        let mut c = 0;
        while c < levels.len() {
            let top = tops[c];
            let level: Vec<usize> = levels[c].iter().copied().collect();
            for p in level {
                for l in 0..n_inputs {
                    let key = (p, l, top);
                    let next = match memo.get(&key) {
                        Some(v) => *v,
                        None => {
                            let v = delta(p, l, top)?;
                            if let Some((q, _)) = v {
                                states.insert(q);
                                if states.len() > max_states {
                                    return Err(Error::NonClosure {
                                        limit: max_states,
                                        frontier: levels.len(),
                                    });
                                }
                            }
                            memo.insert(key, v);
                            v
                        }
                    };
                    let Some((q, action)) = next else { continue };
                    match action {
                        StackAction::NoOp => changed |= levels[c].insert(q),
                        StackAction::Pop => {
                            if top.is_some() {
                                changed |= exits[c].insert(q);
                            }
                        }
                        StackAction::Push => {
                            let before = levels.len();
                            let child = get_ctx(q, Some(l), &mut levels, &mut exits, &mut tops);
                            changed |= levels.len() != before;
                            let outs: Vec<usize> = exits[child].iter().copied().collect();
                            for e in outs {
                                changed |= levels[c].insert(e);
                            }
                        }
                    }
                }
            }
            c += 1;
        }
    }
    Ok(Explored { rules: memo })
}
