//! Sentence-to-game compiler.
//!
//! A closed sentence in negation normal form becomes a two-stack game
//! system whose bounded-phase parity game is won by player 0 exactly when
//! the sentence holds over an initial segment of the naturals (how large a
//! segment depends on the stack cap the game is explored with).
//!
//! Valuations live on stack 1 as a word: each variable is one letter, the
//! filler letter `a` fills the gaps, and a variable's value is the number
//! of fillers below its letter. Quantifiers extend the word: the owning
//! player either stacks fillers and drops the new letter on top (value at
//! least the current maximum) or runs a dig-and-restore routine that moves
//! a prefix to stack 2, commits the letter at the chosen depth, and moves
//! the prefix back, which reaches every insertion position and therefore
//! every value up to the current maximum. Each routine pops stack 1 then
//! stack 2, so a sentence with `q` quantifiers plus one popping atom check
//! fits in `2q + 1` phases.
//!
//! The existential player owns disjunctions and existential routines, the
//! universal player conjunctions and universal ones. Stalling in a push
//! loop is self-defeating: the loop priority has the opponent's parity.
//! Atom checks are deterministic pop scans ending in one of two verdict
//! sinks, an even self-loop for true and an odd one for false.
//!
//! Under a stack cap the game is a truncation of the unbounded one. Each
//! commit grows the word by one letter, so a player who maxes out the word
//! early leaves later quantifiers without room to commit, and the deadlock
//! falls on whoever owns the starved gadget. Values at most
//! `stack_cap - q` never interact with the cap; larger values are a cap
//! artifact that can flip games with alternating quantifiers, which is why
//! callers compare answers across caps before trusting them.

use mpds_core::{
    context_count, phase_count, scoped_name, step_index, successors, Configuration, Guard,
    MpdsSystem, Player, StackSymbol, StackWord, StateId, SymbolId, SystemBuilder,
};
use thiserror::Error;

use crate::ast::NnfFormula;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("sentence has a free variable: {0}")]
    FreeVariable(String),
    #[error("variable name {0:?} collides with a reserved spelling")]
    ReservedVariable(String),
}

/// Which atom a checker entry decides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomKind {
    Lt(String, String),
    Eq(String, String),
}

/// An atom checker's entry state, for driving it directly in tests.
#[derive(Debug, Clone)]
pub struct AtomEntry {
    pub state: StateId,
    pub kind: AtomKind,
}

/// The compiled game and everything needed to pose it.
#[derive(Debug)]
pub struct CompiledFo {
    pub system: MpdsSystem,
    /// Phase budget sufficient for every honest play: `2q + 1`.
    pub phase_bound: u32,
    pub quantifier_count: u32,
    /// Bound variables in quantifier order, as renamed for uniqueness.
    pub variables: Vec<String>,
    pub true_state: StateId,
    pub false_state: StateId,
    pub atoms: Vec<AtomEntry>,
}

/// Renames bound variables so each binder introduces a distinct name.
fn uniquify(f: &NnfFormula) -> NnfFormula {
    type Scope = Vec<(String, String)>;
    fn resolve(scope: &Scope, name: &str) -> String {
        scope
            .iter()
            .rev()
            .find(|(orig, _)| orig == name)
            .map(|(_, fresh)| fresh.clone())
            .unwrap_or_else(|| name.to_owned())
    }
    fn walk(f: &NnfFormula, scope: &mut Scope, used: &mut Vec<String>) -> NnfFormula {
        match f {
            NnfFormula::Exists(x, body) | NnfFormula::Forall(x, body) => {
                let mut fresh = x.clone();
                let mut n = 1;
                while used.contains(&fresh) || StackSymbol::name_is_reserved(&fresh) {
                    n += 1;
                    fresh = format!("{x}{n}");
                }
                used.push(fresh.clone());
                scope.push((x.clone(), fresh.clone()));
                let inner = walk(body, scope, used);
                scope.pop();
                match f {
                    NnfFormula::Exists(..) => NnfFormula::Exists(fresh, Box::new(inner)),
                    _ => NnfFormula::Forall(fresh, Box::new(inner)),
                }
            }
            NnfFormula::And(a, b) => NnfFormula::And(
                Box::new(walk(a, scope, used)),
                Box::new(walk(b, scope, used)),
            ),
            NnfFormula::Or(a, b) => NnfFormula::Or(
                Box::new(walk(a, scope, used)),
                Box::new(walk(b, scope, used)),
            ),
            NnfFormula::Lt(x, y) => NnfFormula::Lt(resolve(scope, x), resolve(scope, y)),
            NnfFormula::Eq(x, y) => NnfFormula::Eq(resolve(scope, x), resolve(scope, y)),
        }
    }
    walk(f, &mut Vec::new(), &mut Vec::new())
}

fn collect_variables(f: &NnfFormula, out: &mut Vec<String>) {
    match f {
        NnfFormula::Exists(x, body) | NnfFormula::Forall(x, body) => {
            out.push(x.clone());
            collect_variables(body, out);
        }
        NnfFormula::And(a, b) | NnfFormula::Or(a, b) => {
            collect_variables(a, out);
            collect_variables(b, out);
        }
        NnfFormula::Lt(..) | NnfFormula::Eq(..) => {}
    }
}

struct Compiler {
    b: SystemBuilder,
    variables: Vec<String>,
    var_syms: Vec<SymbolId>,
    filler: SymbolId,
    true_state: StateId,
    false_state: StateId,
    atoms: Vec<AtomEntry>,
    next_node: u32,
}

impl Compiler {
    fn fresh(&mut self, parts: &[&str], owner: Player, priority: u32) -> StateId {
        let id = self.b.state(scoped_name(parts));
        self.b.set_owner(id, owner);
        self.b.set_priority(id, priority);
        id
    }

    fn var_sym(&self, name: &str) -> SymbolId {
        let at = self.variables.iter().position(|v| v == name).expect("variable was bound");
        self.var_syms[at]
    }

    /// Builds the machine for `f`, returning its entry state.
    fn node(&mut self, f: &NnfFormula) -> StateId {
        let n = self.next_node;
        self.next_node += 1;
        let tag = format!("n{n}");
        match f {
            NnfFormula::Exists(x, body) => self.quantifier(&tag, Player::Zero, x, body),
            NnfFormula::Forall(x, body) => self.quantifier(&tag, Player::One, x, body),
            NnfFormula::And(a, b) => {
                let entry = self.fresh(&[&tag, "all"], Player::One, 0);
                let left = self.node(a);
                let right = self.node(b);
                self.b.internal(entry, left);
                self.b.internal(entry, right);
                entry
            }
            NnfFormula::Or(a, b) => {
                let entry = self.fresh(&[&tag, "any"], Player::Zero, 0);
                let left = self.node(a);
                let right = self.node(b);
                self.b.internal(entry, left);
                self.b.internal(entry, right);
                entry
            }
            NnfFormula::Lt(x, y) => self.atom_lt(&tag, x, y),
            NnfFormula::Eq(x, y) => self.atom_eq(&tag, x, y),
        }
    }

    /// Quantifier gadget: entry chooses between the filler-stacking route
    /// (value at or above the current maximum) and the dig-and-restore
    /// route (any position further down). Both commit exactly one `x`.
    fn quantifier(&mut self, tag: &str, owner: Player, x: &str, body: &NnfFormula) -> StateId {
        // Stalling forever in the push loop hands the win to the opponent.
        let stall_priority = match owner {
            Player::Zero => 1,
            Player::One => 0,
        };
        let entry = self.fresh(&[tag, "pick", x], owner, 0);
        let above = self.fresh(&[tag, "above"], owner, stall_priority);
        let between = self.fresh(&[tag, "between"], owner, 0);
        let dig = self.fresh(&[tag, "dig"], owner, 0);
        let restore = self.fresh(&[tag, "restore"], owner, 0);
        let x_sym = self.var_sym(x);

        self.b.internal(entry, above);
        self.b.internal(entry, between);
        self.b.internal(between, dig);

        let body_entry = self.node(body);

        // Raise the value, then commit on top.
        self.b.push(above, above, 0, Guard::Wildcard, self.filler).unwrap();
        self.b.push(above, body_entry, 0, Guard::Wildcard, x_sym).unwrap();

        // Move a prefix aside, commit, move it back in order.
        let movable: Vec<SymbolId> =
            self.var_syms.iter().copied().chain([self.filler]).collect();
        for &sym in &movable {
            let spelled = self.b_symbol_spelling(sym);
            let carry = self.fresh(&[tag, "dig", &spelled], owner, 0);
            self.b.pop(dig, carry, 0, sym).unwrap();
            self.b.push(carry, dig, 1, Guard::Wildcard, sym).unwrap();
        }
        self.b.push(dig, restore, 0, Guard::Wildcard, x_sym).unwrap();
        for &sym in &movable {
            let spelled = self.b_symbol_spelling(sym);
            let carry = self.fresh(&[tag, "restore", &spelled], owner, 0);
            self.b.pop(restore, carry, 1, sym).unwrap();
            self.b.push(carry, restore, 0, Guard::Wildcard, sym).unwrap();
        }
        self.b.noop(restore, body_entry, 1, Guard::Symbol(mpds_core::BOTTOM)).unwrap();

        entry
    }

    fn b_symbol_spelling(&self, sym: SymbolId) -> String {
        // The builder interns symbols; recover the spelling for state names.
        if sym == self.filler {
            "a".to_owned()
        } else {
            let at = self.var_syms.iter().position(|&s| s == sym).expect("variable symbol");
            self.variables[at].clone()
        }
    }

    /// Equality check: skip everything until one of the two letters, then
    /// any filler before the partner letter means the values differ.
    fn atom_eq(&mut self, tag: &str, x: &str, y: &str) -> StateId {
        let entry = self.fresh(&[tag, "eq"], Player::Zero, 0);
        self.atoms.push(AtomEntry {
            state: entry,
            kind: AtomKind::Eq(x.to_owned(), y.to_owned()),
        });
        if x == y {
            self.b.internal(entry, self.true_state);
            return entry;
        }
        let seek_y = self.fresh(&[tag, "eq", "seek", y], Player::Zero, 0);
        let seek_x = self.fresh(&[tag, "eq", "seek", x], Player::Zero, 0);
        let x_sym = self.var_sym(x);
        let y_sym = self.var_sym(y);
        let all_vars = self.var_syms.clone();

        self.b.pop(entry, entry, 0, self.filler).unwrap();
        for &sym in &all_vars {
            if sym != x_sym && sym != y_sym {
                self.b.pop(entry, entry, 0, sym).unwrap();
            }
        }
        self.b.pop(entry, seek_y, 0, x_sym).unwrap();
        self.b.pop(entry, seek_x, 0, y_sym).unwrap();

        // Between letters of equal value only other letters may appear;
        // the first filler proves the values differ.
        for (seek, target_sym) in [(seek_y, y_sym), (seek_x, x_sym)] {
            for &sym in &all_vars {
                if sym != target_sym {
                    self.b.pop(seek, seek, 0, sym).unwrap();
                }
            }
            self.b.pop(seek, self.false_state, 0, self.filler).unwrap();
            self.b.pop(seek, self.true_state, 0, target_sym).unwrap();
        }
        entry
    }

    /// Order check for `x < y`: whichever letter surfaces first decides;
    /// seeing `x` first refutes, seeing `y` first demands a filler before
    /// `x` turns up.
    fn atom_lt(&mut self, tag: &str, x: &str, y: &str) -> StateId {
        let entry = self.fresh(&[tag, "lt"], Player::Zero, 0);
        self.atoms.push(AtomEntry {
            state: entry,
            kind: AtomKind::Lt(x.to_owned(), y.to_owned()),
        });
        if x == y {
            self.b.internal(entry, self.false_state);
            return entry;
        }
        let need_a = self.fresh(&[tag, "lt", "need_a"], Player::Zero, 0);
        let x_sym = self.var_sym(x);
        let y_sym = self.var_sym(y);
        let all_vars = self.var_syms.clone();

        self.b.pop(entry, entry, 0, self.filler).unwrap();
        for &sym in &all_vars {
            if sym != x_sym && sym != y_sym {
                self.b.pop(entry, entry, 0, sym).unwrap();
            }
        }
        self.b.pop(entry, self.false_state, 0, x_sym).unwrap();
        self.b.pop(entry, need_a, 0, y_sym).unwrap();

        for &sym in &all_vars {
            if sym != x_sym {
                self.b.pop(need_a, need_a, 0, sym).unwrap();
            }
        }
        self.b.pop(need_a, self.true_state, 0, self.filler).unwrap();
        self.b.pop(need_a, self.false_state, 0, x_sym).unwrap();
        entry
    }
}

/// Compiles a closed sentence in negation normal form.
pub fn compile_fo(f: &NnfFormula) -> Result<CompiledFo, CompileError> {
    if let Some(free) = f.free_variables().into_iter().next() {
        return Err(CompileError::FreeVariable(free));
    }
    let mut written = Vec::new();
    collect_variables(f, &mut written);
    for v in &written {
        if StackSymbol::name_is_reserved(v) {
            return Err(CompileError::ReservedVariable(v.clone()));
        }
    }
    let f = uniquify(f);
    let mut variables = Vec::new();
    collect_variables(&f, &mut variables);

    let mut b = SystemBuilder::new(2);
    let filler = b.symbol(StackSymbol::FillerA);
    let var_syms: Vec<SymbolId> =
        variables.iter().map(|v| b.symbol(StackSymbol::variable(v))).collect();

    let true_state = b.state("tt");
    b.set_owner(true_state, Player::Zero);
    b.set_priority(true_state, 0);
    let false_state = b.state("ff");
    b.set_owner(false_state, Player::Zero);
    b.set_priority(false_state, 1);
    b.internal(true_state, true_state);
    b.internal(false_state, false_state);

    let mut c = Compiler {
        b,
        variables,
        var_syms,
        filler,
        true_state,
        false_state,
        atoms: Vec::new(),
        next_node: 0,
    };
    let root = c.node(&f);
    c.b.set_initial(root);

    let system = c.b.build().expect("compiled system validates");
    Ok(CompiledFo {
        system,
        phase_bound: 2 * f.quantifier_count() + 1,
        quantifier_count: f.quantifier_count(),
        variables: c.variables,
        true_state: c.true_state,
        false_state: c.false_state,
        atoms: c.atoms,
    })
}

/// Encodes a valuation as a stack-1 word.
///
/// `assignment` lists (variable, value) in quantifier order. Letters are
/// sorted by value descending, ties broken by quantifier order ascending;
/// below each letter, fillers make up the value difference.
pub fn encode_valuation(assignment: &[(String, u64)]) -> StackWord {
    let mut order: Vec<usize> = (0..assignment.len()).collect();
    order.sort_by(|&i, &j| assignment[j].1.cmp(&assignment[i].1).then(i.cmp(&j)));
    let mut symbols = Vec::new();
    let mut previous: Option<u64> = None;
    for &i in &order {
        if let Some(p) = previous {
            for _ in 0..(p - assignment[i].1) {
                symbols.push(StackSymbol::FillerA);
            }
        }
        symbols.push(StackSymbol::variable(&assignment[i].0));
        previous = Some(assignment[i].1);
    }
    if let Some(p) = previous {
        for _ in 0..p {
            symbols.push(StackSymbol::FillerA);
        }
    }
    StackWord::from_prefix(symbols).expect("valuation letters are not bottom")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("checker is stuck at {state} after {steps} steps")]
    Stuck { state: String, steps: usize },
    #[error("checker is nondeterministic at {state}: {choices} moves enabled")]
    Nondeterministic { state: String, choices: usize },
    #[error("checker used {phases} phases, expected at most 1")]
    TooManyPhases { phases: u32 },
    #[error("checker used {contexts} contexts, expected at most 1")]
    TooManyContexts { contexts: u32 },
}

/// Drives an atom checker to its verdict on a concrete valuation word.
///
/// The checker must be deterministic (exactly one enabled move per step)
/// and must reach a verdict within a single phase and a single context.
pub fn atomic_verdict_trace(
    compiled: &CompiledFo,
    entry: StateId,
    word: &StackWord,
) -> Result<bool, TraceError> {
    let sys = &compiled.system;
    let mut config = Configuration {
        state: entry,
        stacks: vec![word.clone(), StackWord::empty()],
    };
    let mut fired: Vec<u32> = Vec::new();
    loop {
        if config.state == compiled.true_state || config.state == compiled.false_state {
            let phases = phase_count(sys, &fired).expect("trace words chain");
            if phases > 1 {
                return Err(TraceError::TooManyPhases { phases });
            }
            let contexts = context_count(sys, &fired).expect("trace words chain");
            if contexts > 1 {
                return Err(TraceError::TooManyContexts { contexts });
            }
            return Ok(config.state == compiled.true_state);
        }
        let moves = successors(sys, &config);
        match moves.len() {
            1 => {
                let (tidx, _) = moves[0];
                config = step_index(sys, &config, tidx).expect("enabled move steps");
                fired.push(tidx);
            }
            0 => {
                return Err(TraceError::Stuck {
                    state: sys.state_name(config.state).to_owned(),
                    steps: fired.len(),
                })
            }
            n => {
                return Err(TraceError::Nondeterministic {
                    state: sys.state_name(config.state).to_owned(),
                    choices: n,
                })
            }
        }
    }
}
