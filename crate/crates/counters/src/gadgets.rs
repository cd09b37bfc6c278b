//! Stack-walking gadget fragments over tower-of-exponentials counter words.
//!
//! For each level `j` up to the configured top level, the emitter installs
//! five families of pop-only (plus one guessing) fragments into a host
//! two-stack system, in both stack orientations:
//!
//! * `Max` / `Min`: walk the counter on the primary stack and reach the
//!   shared error sink iff some value bit shows the value is not extremal.
//! * `Equal`: nondeterministically align one addressed position on both
//!   stacks and reach the error sink iff the value bits there differ.
//! * `Succ`: align a position, classify whether the increment flips it, and
//!   reach the error sink iff the secondary word is not the successor of the
//!   primary word (an overflow branch covers the maximal primary word).
//! * `Valid`: reach a verdict sink iff the primary stack does not start with
//!   a well-formed level-`j` counter word.
//!
//! Each fragment comes with a companion branching-time formula over state
//! names. The convention throughout is *refutation*: the formula holds at a
//! host configuration exactly when the property it is named after FAILS
//! (`ctleq` holds iff the two words differ, `ctlval` holds iff the word is
//! malformed, and so on). Callers that want the positive property assert the
//! negation.
//!
//! Fragments only ever pop or perform guarded no-ops, except for the `Valid`
//! guessing branch, which drains the secondary stack and pushes a fresh
//! lower-level counter onto it. All fragments leave the host's surrounding
//! stack content untouched below the counter prefix they inspect.

use std::sync::Arc;

use ctl::CtlFormula;
use mpds_core::{scoped_name, Guard, MpdsSystem, StackSymbol, StateId, SymbolId, SystemBuilder, BOTTOM};

use crate::words::CounterParams;
use crate::CounterError;

/// Which stack carries the word under inspection.
///
/// Every fragment exists twice, once per orientation, so that nested checks
/// can look at either stack. `Second` mirrors `First` with the stack roles
/// swapped and a `2` tag in generated state names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Primary word on stack 1, companion word on stack 2.
    First,
    /// Primary word on stack 2, companion word on stack 1.
    Second,
}

impl Orientation {
    /// Both orientations, in the order they are stored in a [`GadgetSet`].
    pub const BOTH: [Orientation; 2] = [Orientation::First, Orientation::Second];

    /// Index of the stack holding the inspected word.
    pub fn primary(self) -> u8 {
        match self {
            Orientation::First => 0,
            Orientation::Second => 1,
        }
    }

    /// Index of the other stack.
    pub fn secondary(self) -> u8 {
        match self {
            Orientation::First => 1,
            Orientation::Second => 0,
        }
    }

    /// The opposite orientation.
    pub fn flip(self) -> Orientation {
        match self {
            Orientation::First => Orientation::Second,
            Orientation::Second => Orientation::First,
        }
    }

    /// Storage index inside a [`GadgetSet`] level pair.
    pub fn index(self) -> usize {
        match self {
            Orientation::First => 0,
            Orientation::Second => 1,
        }
    }

    /// Name tag appended to the family part of generated state names.
    fn tag(self) -> &'static str {
        match self {
            Orientation::First => "",
            Orientation::Second => "2",
        }
    }
}

/// The five fragment families emitted per level and orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Word is the maximal value for its level.
    Max,
    /// Word is the minimal value (all zero bits).
    Min,
    /// Two words of the same level are equal.
    Equal,
    /// Secondary word is the successor of the primary word.
    Succ,
    /// Primary stack starts with a well-formed counter word.
    Valid,
}

impl Family {
    /// Upper bound on the stack switches a fragment of this family needs to
    /// drive any run to its verdict. `Max`/`Min` stay on one stack; the
    /// comparing families alternate between the stacks once per recursion
    /// level.
    pub fn declared_switches(self, level: u8) -> u32 {
        match self {
            Family::Max | Family::Min => 0,
            Family::Equal | Family::Succ | Family::Valid => 2 * u32::from(level),
        }
    }
}

/// Shared verdict sinks. All four carry an internal self-loop so runs can
/// always be extended past a verdict.
#[derive(Clone, Copy, Debug)]
pub struct Sinks {
    /// Refutation found: the checked property fails.
    pub err: StateId,
    /// Confirmation sink used by the last-item check of `Valid`.
    pub win: StateId,
    /// Scan verdict: the aligned position keeps its bit under increment.
    pub eq: StateId,
    /// Scan verdict: the aligned position flips under increment.
    pub neq: StateId,
}

/// Entry states and companion formulas for one level and orientation.
#[derive(Clone, Debug)]
pub struct LevelGadgets {
    /// Counter level these fragments inspect.
    pub level: u8,
    /// Which stack carries the inspected word.
    pub orientation: Orientation,
    /// Entry of the maximality walk.
    pub qmax: StateId,
    /// Entry of the minimality walk.
    pub qmin: StateId,
    /// Entry of the equality check.
    pub qeqcheck: StateId,
    /// Entry of the successor check.
    pub qsuccheck: StateId,
    /// Entry of the well-formedness check.
    pub qvalid: StateId,
    /// Holds iff the primary word is NOT maximal.
    pub ctlmax: Arc<CtlFormula>,
    /// Holds iff the primary word is NOT minimal.
    pub ctlmin: Arc<CtlFormula>,
    /// Holds iff the two words are NOT equal.
    pub ctleq: Arc<CtlFormula>,
    /// Holds iff the secondary word is NOT the successor of the primary.
    pub ctlsucc: Arc<CtlFormula>,
    /// Holds iff the primary stack does NOT start with a valid counter word.
    pub ctlval: Arc<CtlFormula>,
}

impl LevelGadgets {
    /// Entry state of the given family.
    pub fn entry(&self, family: Family) -> StateId {
        match family {
            Family::Max => self.qmax,
            Family::Min => self.qmin,
            Family::Equal => self.qeqcheck,
            Family::Succ => self.qsuccheck,
            Family::Valid => self.qvalid,
        }
    }

    /// Companion formula of the given family.
    pub fn formula(&self, family: Family) -> &Arc<CtlFormula> {
        match family {
            Family::Max => &self.ctlmax,
            Family::Min => &self.ctlmin,
            Family::Equal => &self.ctleq,
            Family::Succ => &self.ctlsucc,
            Family::Valid => &self.ctlval,
        }
    }
}

/// Measured size of an emitted gadget set next to the explicit polynomial
/// budget the construction promises.
#[derive(Clone, Copy, Debug)]
pub struct SizeReport {
    /// Top counter level.
    pub level: u8,
    /// Bit width of the level-1 counters.
    pub base: u32,
    /// States the emitter created (including the four sinks).
    pub states: usize,
    /// Transitions the emitter created.
    pub transitions: usize,
    /// Promised bound: `8*n^2 + 40*n*k + 120*k + 20` states.
    pub state_bound: usize,
    /// Promised bound: `(2*k + c + 8)` transitions per budgeted state, where
    /// `c` is the context alphabet size.
    pub transition_bound: usize,
}

impl SizeReport {
    /// Whether the measured sizes stay within the promised bounds.
    pub fn within_bounds(&self) -> bool {
        self.states <= self.state_bound && self.transitions <= self.transition_bound
    }
}

/// All fragments emitted for one parameter choice: levels `1..=k`, both
/// orientations, sharing one quadruple of verdict sinks.
#[derive(Clone, Debug)]
pub struct GadgetSet {
    /// Counter shape the fragments inspect.
    pub params: CounterParams,
    /// Shared verdict sinks.
    pub sinks: Sinks,
    levels: Vec<[LevelGadgets; 2]>,
    report: SizeReport,
}

impl GadgetSet {
    /// Fragments for `level` (1-based) in the given orientation.
    ///
    /// # Panics
    /// Panics if `level` is 0 or above the emitted top level.
    pub fn level(&self, level: u8, orientation: Orientation) -> &LevelGadgets {
        assert!(
            level >= 1 && usize::from(level) <= self.levels.len(),
            "level {level} outside emitted range 1..={}",
            self.levels.len()
        );
        &self.levels[usize::from(level) - 1][orientation.index()]
    }

    /// Entry state of one family at one level and orientation.
    pub fn entry(&self, family: Family, level: u8, orientation: Orientation) -> StateId {
        self.level(level, orientation).entry(family)
    }

    /// Companion formula of one family at one level and orientation.
    pub fn formula(&self, family: Family, level: u8, orientation: Orientation) -> &Arc<CtlFormula> {
        self.level(level, orientation).formula(family)
    }

    /// Declared stack-switch budget for one family at one level.
    pub fn declared_switches(&self, family: Family, level: u8) -> u32 {
        family.declared_switches(level)
    }

    /// Measured and promised construction sizes.
    pub fn size_report(&self) -> &SizeReport {
        &self.report
    }
}

/// A self-contained two-stack system hosting one gadget set.
///
/// The host state has an internal edge to every fragment entry, so a single
/// exploration from a host configuration covers all families in both
/// orientations, and every companion formula can be evaluated on that one
/// graph.
#[derive(Debug)]
pub struct GadgetLibrary {
    /// The built system.
    pub system: MpdsSystem,
    /// Initial state wired to all fragment entries.
    pub host: StateId,
    /// Entries and formulas of the emitted fragments.
    pub set: GadgetSet,
}

/// Emits counter gadgets for all levels `1..=params.level()` in both
/// orientations into an existing two-stack builder.
///
/// `context_alphabet` lists the non-counter letters that may legitimately
/// follow a counter word on a stack; boundary checks treat them, higher-level
/// counter bits, and the bottom sentinel as end-of-word markers. Letters that
/// collide with the counter encoding itself (bits of level `<= k` or the
/// bottom symbol) are rejected.
pub fn emit_counter_gadgets(
    b: &mut SystemBuilder,
    params: &CounterParams,
    context_alphabet: &[StackSymbol],
) -> Result<GadgetSet, CounterError> {
    let k = params.level();
    for sym in context_alphabet {
        if sym.is_bottom() || sym.is_counter_bit_up_to(k) {
            return Err(CounterError::ReservedLetter(sym.spelling()));
        }
    }
    let mut bit_syms = Vec::with_capacity(usize::from(k));
    for j in 1..=k {
        bit_syms.push([b.symbol(StackSymbol::bit_a(j)), b.symbol(StackSymbol::bit_b(j))]);
    }
    let ctx_syms: Vec<SymbolId> = context_alphabet.iter().map(|s| b.symbol(s.clone())).collect();

    let err = b.fresh_state(scoped_name(&["sink", "err"]))?;
    let win = b.fresh_state(scoped_name(&["sink", "win"]))?;
    let eq = b.fresh_state(scoped_name(&["sink", "eq"]))?;
    let neq = b.fresh_state(scoped_name(&["sink", "neq"]))?;
    for sink in [err, win, eq, neq] {
        b.internal(sink, sink);
    }
    let sinks = Sinks { err, win, eq, neq };

    let mut em = Emitter {
        b,
        level: k,
        base: params.base(),
        bit_syms,
        ctx_syms,
        sinks,
        err_atom: CtlFormula::atom(scoped_name(&["sink", "err"])),
        win_atom: CtlFormula::atom(scoped_name(&["sink", "win"])),
        eq_atom: CtlFormula::atom(scoped_name(&["sink", "eq"])),
        neq_atom: CtlFormula::atom(scoped_name(&["sink", "neq"])),
        states: 4,
        transitions: 4,
    };

    let mut levels: Vec<[LevelGadgets; 2]> = Vec::with_capacity(usize::from(k));
    for j in 1..=k {
        let pair = if j == 1 {
            [em.emit_level_one(Orientation::First)?, em.emit_level_one(Orientation::Second)?]
        } else {
            let prev = &levels[usize::from(j) - 2];
            let mut done = Vec::with_capacity(2);
            for o in Orientation::BOTH {
                let same = &prev[o.index()];
                let other = &prev[o.flip().index()];
                done.push(em.emit_level_higher(j, o, same, other)?);
            }
            let second = done.pop().expect("two orientations emitted");
            let first = done.pop().expect("two orientations emitted");
            [first, second]
        };
        levels.push(pair);
    }

    let n = params.base() as usize;
    let kk = usize::from(k);
    let state_bound = 8 * n * n + 40 * n * kk + 120 * kk + 20;
    let per_state = 2 * kk + context_alphabet.len() + 8;
    let report = SizeReport {
        level: k,
        base: params.base(),
        states: em.states,
        transitions: em.transitions,
        state_bound,
        transition_bound: state_bound * per_state,
    };

    Ok(GadgetSet { params: *params, sinks, levels, report })
}

/// Builds a standalone library: a fresh two-stack system whose initial host
/// state fans out to every fragment entry, with `zeta` as the only context
/// letter.
pub fn build_counter_gadgets(params: &CounterParams) -> Result<GadgetLibrary, CounterError> {
    let mut b = SystemBuilder::new(2);
    let set = emit_counter_gadgets(&mut b, params, &[StackSymbol::Zeta])?;
    let host = b.fresh_state("host")?;
    for j in 1..=params.level() {
        for o in Orientation::BOTH {
            let lg = set.level(j, o);
            for entry in [lg.qmax, lg.qmin, lg.qeqcheck, lg.qsuccheck, lg.qvalid] {
                b.internal(host, entry);
            }
        }
    }
    b.set_initial(host);
    let system = b.build()?;
    Ok(GadgetLibrary { system, host, set })
}

/// A state handle paired with the atom naming it in companion formulas.
#[derive(Clone)]
struct H {
    id: StateId,
    atom: Arc<CtlFormula>,
}

/// Pieces of an equality fragment that the same-level successor fragment
/// reuses: the alignment state is a fresh anchor and the value comparator is
/// shared between both families.
struct EqParts {
    entry: H,
    vcmp: H,
    formula: Arc<CtlFormula>,
}

struct Emitter<'a> {
    b: &'a mut SystemBuilder,
    level: u8,
    base: u32,
    /// `bit_syms[j-1] = [a_j, b_j]`.
    bit_syms: Vec<[SymbolId; 2]>,
    ctx_syms: Vec<SymbolId>,
    sinks: Sinks,
    err_atom: Arc<CtlFormula>,
    win_atom: Arc<CtlFormula>,
    eq_atom: Arc<CtlFormula>,
    neq_atom: Arc<CtlFormula>,
    states: usize,
    transitions: usize,
}

impl Emitter<'_> {
    fn name(&self, j: u8, fam: &str, o: Orientation, part: &str) -> String {
        format!("ctr{j}.{fam}{}.{part}", o.tag())
    }

    fn state(&mut self, name: String) -> Result<H, CounterError> {
        let id = self.b.fresh_state(name.clone())?;
        self.states += 1;
        Ok(H { id, atom: CtlFormula::atom(name) })
    }

    fn bits(&self, j: u8) -> [SymbolId; 2] {
        self.bit_syms[usize::from(j) - 1]
    }

    /// All bit symbols of levels strictly below `j`.
    fn below(&self, j: u8) -> Vec<SymbolId> {
        let mut out = Vec::with_capacity(2 * (usize::from(j) - 1));
        for lv in 1..j {
            out.extend(self.bits(lv));
        }
        out
    }

    /// Guards matching any letter that legitimately ends a level-`j` word:
    /// higher-level bits, context letters, and the bottom sentinel.
    fn follower_guards(&self, j: u8) -> Vec<Guard<SymbolId>> {
        let mut out = Vec::new();
        for lv in (j + 1)..=self.level {
            out.extend(self.bits(lv).map(Guard::Symbol));
        }
        out.extend(self.ctx_syms.iter().map(|&s| Guard::Symbol(s)));
        out.push(Guard::Symbol(BOTTOM));
        out
    }

    fn pop(&mut self, from: StateId, to: StateId, stack: u8, sym: SymbolId) -> Result<(), CounterError> {
        self.b.pop(from, to, stack, sym)?;
        self.transitions += 1;
        Ok(())
    }

    fn pop_each(
        &mut self,
        from: StateId,
        to: StateId,
        stack: u8,
        syms: &[SymbolId],
    ) -> Result<(), CounterError> {
        for &sym in syms {
            self.pop(from, to, stack, sym)?;
        }
        Ok(())
    }

    fn push(
        &mut self,
        from: StateId,
        to: StateId,
        stack: u8,
        guard: Guard<SymbolId>,
        sym: SymbolId,
    ) -> Result<(), CounterError> {
        self.b.push(from, to, stack, guard, sym)?;
        self.transitions += 1;
        Ok(())
    }

    fn internal(&mut self, from: StateId, to: StateId) {
        self.b.internal(from, to);
        self.transitions += 1;
    }

    /// End-of-word no-ops: `from --[top is a follower]--> to`.
    fn wire_end_noop(&mut self, from: StateId, to: StateId, stack: u8, j: u8) -> Result<(), CounterError> {
        for g in self.follower_guards(j) {
            self.b.noop(from, to, stack, g)?;
            self.transitions += 1;
        }
        Ok(())
    }

    /// Item-granular skip walk on `stack`: `boundary` sits between items,
    /// `mid` inside a partially popped item. Lower-level bits move to `mid`,
    /// level-`j` value bits close an item and return to `boundary`.
    fn wire_item_skip(&mut self, boundary: StateId, mid: StateId, stack: u8, j: u8) -> Result<(), CounterError> {
        let low = self.below(j);
        let [aj, bj] = self.bits(j);
        for &sym in &low {
            self.pop(boundary, mid, stack, sym)?;
            self.pop(mid, mid, stack, sym)?;
        }
        for sym in [aj, bj] {
            self.pop(boundary, boundary, stack, sym)?;
            self.pop(mid, boundary, stack, sym)?;
        }
        Ok(())
    }

    /// Pops exactly one item off `stack`: lower bits loop on `from`, the
    /// closing level-`j` value bit moves to `to`.
    fn wire_item_pop(&mut self, from: StateId, to: StateId, stack: u8, j: u8) -> Result<(), CounterError> {
        let low = self.below(j);
        self.pop_each(from, from, stack, &low)?;
        let [aj, bj] = self.bits(j);
        self.pop(from, to, stack, aj)?;
        self.pop(from, to, stack, bj)?;
        Ok(())
    }

    /// `EX(state ∧ EF err)`: the standard shape of a refutation formula
    /// anchored one internal step above the fragment entry.
    fn anchored_err(&self, h: &H) -> Arc<CtlFormula> {
        CtlFormula::ex(CtlFormula::and(h.atom.clone(), CtlFormula::ef(self.err_atom.clone())))
    }

    /// Maximality / minimality walk: pop the counter prefix on the primary
    /// stack; any level-`j` value bit of the wrong polarity refutes.
    fn emit_extremum(
        &mut self,
        j: u8,
        o: Orientation,
        fam: &str,
        err_on_one: bool,
    ) -> Result<(H, Arc<CtlFormula>), CounterError> {
        let entry = self.state(self.name(j, fam, o, "entry"))?;
        let s = o.primary();
        let low = self.below(j);
        self.pop_each(entry.id, entry.id, s, &low)?;
        let [a, b] = self.bits(j);
        let (keep, bad) = if err_on_one { (a, b) } else { (b, a) };
        self.pop(entry.id, entry.id, s, keep)?;
        self.pop(entry.id, self.sinks.err, s, bad)?;
        let formula = self.anchored_err(&entry);
        Ok((entry, formula))
    }

    /// Level-1 equality: guess a bit position `d`, remember the primary bit
    /// popped there, then pop `d` bits off the secondary and refute if the
    /// bit underneath differs.
    fn emit_eq_one(&mut self, o: Orientation) -> Result<(H, Arc<CtlFormula>), CounterError> {
        let n = self.base as usize;
        let s = o.primary();
        let t = o.secondary();
        let [a, b] = self.bits(1);

        let mut skip = Vec::with_capacity(n);
        for d in 0..n {
            let part = if d == 0 { "entry".to_owned() } else { format!("skip{d}") };
            skip.push(self.state(self.name(1, "eq", o, &part))?);
        }
        let mut cmp = Vec::with_capacity(n);
        for m in 0..n {
            let ca = self.state(self.name(1, "eq", o, &format!("cmp{m}.a")))?;
            let cb = self.state(self.name(1, "eq", o, &format!("cmp{m}.b")))?;
            cmp.push([ca, cb]);
        }

        for d in 0..n {
            if d + 1 < n {
                self.pop(skip[d].id, skip[d + 1].id, s, a)?;
                self.pop(skip[d].id, skip[d + 1].id, s, b)?;
            }
            self.pop(skip[d].id, cmp[d][0].id, s, a)?;
            self.pop(skip[d].id, cmp[d][1].id, s, b)?;
        }
        for m in 1..n {
            for c in 0..2 {
                self.pop(cmp[m][c].id, cmp[m - 1][c].id, t, a)?;
                self.pop(cmp[m][c].id, cmp[m - 1][c].id, t, b)?;
            }
        }
        self.pop(cmp[0][0].id, self.sinks.err, t, b)?;
        self.pop(cmp[0][1].id, self.sinks.err, t, a)?;

        let formula = self.anchored_err(&skip[0]);
        Ok((skip[0].clone(), formula))
    }

    /// Level-1 successor check between the primary word `u` and secondary
    /// word `v`: guess a position, record whether every bit below it in `u`
    /// is one (then the increment flips the position), and refute if `v`
    /// disagrees with the incremented bit. A counting overflow branch refutes
    /// against the all-ones `u`, whose successor does not exist.
    fn emit_succ_one(&mut self, o: Orientation) -> Result<(H, Arc<CtlFormula>), CounterError> {
        let n = self.base as usize;
        let s = o.primary();
        let t = o.secondary();
        let [a, b] = self.bits(1);

        let entry = self.state(self.name(1, "succ", o, "entry"))?;
        let mut skip = Vec::with_capacity(n);
        for d in 0..n {
            skip.push(self.state(self.name(1, "succ", o, &format!("skip{d}")))?);
        }
        // tail[d][m][c][f]: after marking bit `d` as `c`, `m` lower bits
        // consumed; `f` records "every consumed bit was one" (flip region).
        let mut tail: Vec<Vec<[[H; 2]; 2]>> = Vec::with_capacity(n);
        for d in 0..n {
            let rem = n - 1 - d;
            let mut row = Vec::with_capacity(rem + 1);
            for m in 0..=rem {
                let mk = |em: &mut Self, cl: char, fl: &str| {
                    let nm = em.name(1, "succ", o, &format!("tail{d}.{m}.{cl}.{fl}"));
                    em.state(nm)
                };
                let aa = mk(self, 'a', "keep")?;
                let af = mk(self, 'a', "flip")?;
                let ba = mk(self, 'b', "keep")?;
                let bf = mk(self, 'b', "flip")?;
                row.push([[aa, af], [ba, bf]]);
            }
            tail.push(row);
        }
        // back[m][c][f]: pop `m` bits off the secondary, then compare.
        let mut back: Vec<[[H; 2]; 2]> = Vec::with_capacity(n);
        for m in 0..n {
            let mk = |em: &mut Self, cl: char, fl: &str| {
                let nm = em.name(1, "succ", o, &format!("back{m}.{cl}.{fl}"));
                em.state(nm)
            };
            let aa = mk(self, 'a', "keep")?;
            let af = mk(self, 'a', "flip")?;
            let ba = mk(self, 'b', "keep")?;
            let bf = mk(self, 'b', "flip")?;
            back.push([[aa, af], [ba, bf]]);
        }
        let mut ovfl = Vec::with_capacity(n + 1);
        for i in 0..=n {
            ovfl.push(self.state(self.name(1, "succ", o, &format!("ovfl{i}")))?);
        }

        self.internal(entry.id, skip[0].id);
        self.internal(entry.id, ovfl[0].id);
        for d in 0..n {
            if d + 1 < n {
                self.pop(skip[d].id, skip[d + 1].id, s, a)?;
                self.pop(skip[d].id, skip[d + 1].id, s, b)?;
            }
            // Mark here; the flip flag starts true (vacuously all-ones).
            self.pop(skip[d].id, tail[d][0][0][1].id, s, a)?;
            self.pop(skip[d].id, tail[d][0][1][1].id, s, b)?;
        }
        for d in 0..n {
            let rem = n - 1 - d;
            for m in 0..rem {
                for c in 0..2 {
                    self.pop(tail[d][m][c][1].id, tail[d][m + 1][c][0].id, s, a)?;
                    self.pop(tail[d][m][c][0].id, tail[d][m + 1][c][0].id, s, a)?;
                    self.pop(tail[d][m][c][1].id, tail[d][m + 1][c][1].id, s, b)?;
                    self.pop(tail[d][m][c][0].id, tail[d][m + 1][c][0].id, s, b)?;
                }
            }
            for c in 0..2 {
                for f in 0..2 {
                    self.internal(tail[d][rem][c][f].id, back[d][c][f].id);
                }
            }
        }
        for m in 1..n {
            for c in 0..2 {
                for f in 0..2 {
                    self.pop(back[m][c][f].id, back[m - 1][c][f].id, t, a)?;
                    self.pop(back[m][c][f].id, back[m - 1][c][f].id, t, b)?;
                }
            }
        }
        // Flip region: the incremented bit differs from the mark, so finding
        // the SAME bit refutes. Keep region: finding the OTHER bit refutes.
        self.pop(back[0][0][1].id, self.sinks.err, t, a)?;
        self.pop(back[0][1][1].id, self.sinks.err, t, b)?;
        self.pop(back[0][0][0].id, self.sinks.err, t, b)?;
        self.pop(back[0][1][0].id, self.sinks.err, t, a)?;
        // Overflow: exactly `n` one-bits followed by the end of the word.
        for i in 0..n {
            self.pop(ovfl[i].id, ovfl[i + 1].id, s, b)?;
        }
        let last = ovfl[n].id;
        self.wire_end_noop(last, self.sinks.err, s, 1)?;

        let formula = self.anchored_err(&entry);
        Ok((entry, formula))
    }

    /// Level-1 well-formedness: the primary stack must start with exactly
    /// `n` level-1 bits before a follower letter.
    fn emit_valid_one(&mut self, o: Orientation) -> Result<(H, Arc<CtlFormula>), CounterError> {
        let n = self.base as usize;
        let s = o.primary();
        let [a, b] = self.bits(1);
        let mut len = Vec::with_capacity(n + 1);
        for d in 0..=n {
            let part = if d == 0 { "entry".to_owned() } else { format!("len{d}") };
            len.push(self.state(self.name(1, "valid", o, &part))?);
        }
        for d in 0..n {
            self.pop(len[d].id, len[d + 1].id, s, a)?;
            self.pop(len[d].id, len[d + 1].id, s, b)?;
            // Word ends before n bits were seen: too short.
            self.wire_end_noop(len[d].id, self.sinks.err, s, 1)?;
        }
        // An (n+1)-th level-1 bit: too long.
        self.pop(len[n].id, self.sinks.err, s, a)?;
        self.pop(len[n].id, self.sinks.err, s, b)?;
        let formula = self.anchored_err(&len[0]);
        Ok((len[0].clone(), formula))
    }

    fn emit_level_one(&mut self, o: Orientation) -> Result<LevelGadgets, CounterError> {
        let (qmax, ctlmax) = self.emit_extremum(1, o, "max", false)?;
        let (qmin, ctlmin) = self.emit_extremum(1, o, "min", true)?;
        let (qeq, ctleq) = self.emit_eq_one(o)?;
        let (qsucc, ctlsucc) = self.emit_succ_one(o)?;
        let (qval, ctlval) = self.emit_valid_one(o)?;
        Ok(LevelGadgets {
            level: 1,
            orientation: o,
            qmax: qmax.id,
            qmin: qmin.id,
            qeqcheck: qeq.id,
            qsuccheck: qsucc.id,
            qvalid: qval.id,
            ctlmax,
            ctlmin,
            ctleq,
            ctlsucc,
            ctlval,
        })
    }

    /// Higher-level equality: skip the same number of items on both stacks,
    /// check the addresses there agree via the lower-level equality, and
    /// refute if the value bits closing those items differ.
    fn emit_eq_higher(&mut self, j: u8, o: Orientation, sub: &LevelGadgets) -> Result<EqParts, CounterError> {
        let s = o.primary();
        let t = o.secondary();
        let low = self.below(j);
        let [aj, bj] = self.bits(j);

        let entry = self.state(self.name(j, "eq", o, "entry"))?;
        let skip1in = self.state(self.name(j, "eq", o, "skip1in"))?;
        let skip2 = self.state(self.name(j, "eq", o, "skip2"))?;
        let skip2in = self.state(self.name(j, "eq", o, "skip2in"))?;
        let aligned = self.state(self.name(j, "eq", o, "aligned"))?;
        let vcmp = self.state(self.name(j, "eq", o, "vcmp"))?;
        let vcmp_a = self.state(self.name(j, "eq", o, "vcmp.a"))?;
        let vcmp_b = self.state(self.name(j, "eq", o, "vcmp.b"))?;

        self.wire_item_skip(entry.id, skip1in.id, s, j)?;
        self.internal(entry.id, skip2.id);
        self.wire_item_skip(skip2.id, skip2in.id, t, j)?;
        self.internal(skip2.id, aligned.id);
        self.internal(aligned.id, sub.qeqcheck);
        self.internal(aligned.id, vcmp.id);
        // Pop the secondary item's address, remember its value bit, then pop
        // the primary item's address and refute on a differing value bit.
        self.pop_each(vcmp.id, vcmp.id, t, &low)?;
        self.pop(vcmp.id, vcmp_a.id, t, aj)?;
        self.pop(vcmp.id, vcmp_b.id, t, bj)?;
        for cmpc in [&vcmp_a, &vcmp_b] {
            self.pop_each(cmpc.id, cmpc.id, s, &low)?;
        }
        self.pop(vcmp_a.id, self.sinks.err, s, bj)?;
        self.pop(vcmp_b.id, self.sinks.err, s, aj)?;

        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::ef(CtlFormula::all(vec![
                aligned.atom.clone(),
                CtlFormula::not(sub.ctleq.clone()),
                CtlFormula::ex(CtlFormula::and(vcmp.atom.clone(), CtlFormula::ef(self.err_atom.clone()))),
            ])),
        ));
        Ok(EqParts { entry, vcmp, formula })
    }

    /// Higher-level successor check. After aligning one addressed position on
    /// both stacks, a scan of the primary word classifies the position: if
    /// every value bit strictly below it is one the increment flips it,
    /// otherwise it is kept. The matching comparator then refutes a wrong
    /// secondary bit; `eq_parts.vcmp` (refutes differing bits) serves the
    /// keep region and a dual comparator (refutes equal bits) the flip
    /// region. An overflow branch refutes against a maximal primary word.
    fn emit_succ_higher(
        &mut self,
        j: u8,
        o: Orientation,
        sub: &LevelGadgets,
        eq_parts: &EqParts,
    ) -> Result<(H, Arc<CtlFormula>), CounterError> {
        let s = o.primary();
        let t = o.secondary();
        let low = self.below(j);
        let [aj, bj] = self.bits(j);

        let entry = self.state(self.name(j, "succ", o, "entry"))?;
        let skip1 = self.state(self.name(j, "succ", o, "skip1"))?;
        let skip1in = self.state(self.name(j, "succ", o, "skip1in"))?;
        let skip2 = self.state(self.name(j, "succ", o, "skip2"))?;
        let skip2in = self.state(self.name(j, "succ", o, "skip2in"))?;
        let aligned = self.state(self.name(j, "succ", o, "aligned"))?;
        let cmpsame = self.state(self.name(j, "succ", o, "cmpsame"))?;
        let cmpsame_a = self.state(self.name(j, "succ", o, "cmpsame.a"))?;
        let cmpsame_b = self.state(self.name(j, "succ", o, "cmpsame.b"))?;
        let scan = self.state(self.name(j, "succ", o, "scan"))?;
        let scan_allb = self.state(self.name(j, "succ", o, "scan.allb"))?;
        let scan_hasa = self.state(self.name(j, "succ", o, "scan.hasa"))?;
        let ovfl = self.state(self.name(j, "succ", o, "ovfl"))?;
        let ovfl_seen = self.state(self.name(j, "succ", o, "ovfl.seen"))?;

        // The entry only branches; anchoring the overflow scan anywhere
        // deeper would let it misread a suffix of the word.
        self.internal(entry.id, skip1.id);
        self.internal(entry.id, ovfl.id);
        self.wire_item_skip(skip1.id, skip1in.id, s, j)?;
        self.internal(skip1.id, skip2.id);
        self.wire_item_skip(skip2.id, skip2in.id, t, j)?;
        self.internal(skip2.id, aligned.id);

        self.internal(aligned.id, sub.qeqcheck);
        self.internal(aligned.id, eq_parts.vcmp.id);
        self.internal(aligned.id, cmpsame.id);
        self.internal(aligned.id, scan.id);

        // Dual comparator: refutes when the two value bits AGREE.
        self.pop_each(cmpsame.id, cmpsame.id, t, &low)?;
        self.pop(cmpsame.id, cmpsame_a.id, t, aj)?;
        self.pop(cmpsame.id, cmpsame_b.id, t, bj)?;
        for cmpc in [&cmpsame_a, &cmpsame_b] {
            self.pop_each(cmpc.id, cmpc.id, s, &low)?;
        }
        self.pop(cmpsame_a.id, self.sinks.err, s, aj)?;
        self.pop(cmpsame_b.id, self.sinks.err, s, bj)?;

        // Scan: drop the aligned item itself, then look for a zero value bit
        // strictly below it.
        self.wire_item_pop(scan.id, scan_allb.id, s, j)?;
        self.pop_each(scan_allb.id, scan_allb.id, s, &low)?;
        self.pop(scan_allb.id, scan_allb.id, s, bj)?;
        self.pop(scan_allb.id, scan_hasa.id, s, aj)?;
        self.wire_end_noop(scan_allb.id, self.sinks.neq, s, j)?;
        self.pop_each(scan_hasa.id, scan_hasa.id, s, &low)?;
        self.pop(scan_hasa.id, scan_hasa.id, s, aj)?;
        self.pop(scan_hasa.id, scan_hasa.id, s, bj)?;
        self.wire_end_noop(scan_hasa.id, self.sinks.eq, s, j)?;

        // Overflow: at least one one-bit and no zero bit anywhere.
        self.pop_each(ovfl.id, ovfl.id, s, &low)?;
        self.pop(ovfl.id, ovfl_seen.id, s, bj)?;
        self.pop_each(ovfl_seen.id, ovfl_seen.id, s, &low)?;
        self.pop(ovfl_seen.id, ovfl_seen.id, s, bj)?;
        self.wire_end_noop(ovfl_seen.id, self.sinks.err, s, j)?;

        let keep_branch = CtlFormula::and(
            CtlFormula::ef(self.eq_atom.clone()),
            CtlFormula::ex(CtlFormula::and(
                eq_parts.vcmp.atom.clone(),
                CtlFormula::ef(self.err_atom.clone()),
            )),
        );
        let flip_branch = CtlFormula::and(
            CtlFormula::ef(self.neq_atom.clone()),
            CtlFormula::ex(CtlFormula::and(cmpsame.atom.clone(), CtlFormula::ef(self.err_atom.clone()))),
        );
        let position_branch = CtlFormula::ef(CtlFormula::all(vec![
            aligned.atom.clone(),
            CtlFormula::not(sub.ctleq.clone()),
            CtlFormula::or(keep_branch, flip_branch),
        ]));
        let overflow_branch =
            CtlFormula::ex(CtlFormula::and(ovfl.atom.clone(), CtlFormula::ef(self.err_atom.clone())));
        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::or(position_branch, overflow_branch),
        ));
        Ok((entry, formula))
    }

    /// Pushes one freshly guessed level-`writer_level` counter word onto
    /// `stack`, connecting `from` to `to`. The first push is guarded on the
    /// bottom sentinel, so the stack must be fully drained before writing.
    fn wire_guess_writer(
        &mut self,
        j: u8,
        o: Orientation,
        writer_level: u8,
        from: &H,
        to: &H,
        stack: u8,
    ) -> Result<(), CounterError> {
        let n = self.base as usize;
        let [a1, b1] = self.bits(1);
        match writer_level {
            1 => {
                // A fixed chain of n bit pushes.
                let mut prev = from.id;
                let mut guard = Guard::Symbol(BOTTOM);
                for i in 1..n {
                    let w = self.state(self.name(j, "valid", o, &format!("guess.w{i}")))?;
                    for sym in [a1, b1] {
                        self.push(prev, w.id, stack, guard, sym)?;
                    }
                    prev = w.id;
                    guard = Guard::Wildcard;
                }
                for sym in [a1, b1] {
                    self.push(prev, to.id, stack, guard, sym)?;
                }
            }
            2 => {
                // A loop of items, each n level-1 bits plus one level-2
                // value bit; item count and all bits are free choices.
                let [a2, b2] = self.bits(2);
                let mut chain = Vec::with_capacity(n);
                for i in 1..=n {
                    chain.push(self.state(self.name(j, "valid", o, &format!("guess.w{i}")))?);
                }
                let more = self.state(self.name(j, "valid", o, "guess.more"))?;
                for sym in [a1, b1] {
                    self.push(from.id, chain[0].id, stack, Guard::Symbol(BOTTOM), sym)?;
                }
                for i in 1..n {
                    for sym in [a1, b1] {
                        self.push(chain[i - 1].id, chain[i].id, stack, Guard::Wildcard, sym)?;
                    }
                }
                for sym in [a2, b2] {
                    self.push(chain[n - 1].id, more.id, stack, Guard::Wildcard, sym)?;
                }
                for sym in [a1, b1] {
                    self.push(more.id, chain[0].id, stack, Guard::Wildcard, sym)?;
                }
                self.internal(more.id, to.id);
            }
            _ => unreachable!("scale guard keeps counter levels at or below 3"),
        }
        Ok(())
    }

    /// Higher-level well-formedness, a disjunction of five refutations:
    /// some item's address is malformed; the first (topmost) address is not
    /// maximal; the last address is not minimal; some adjacent address pair
    /// does not descend by one (checked against a guessed copy); or the item
    /// structure itself is broken.
    fn emit_valid_higher(
        &mut self,
        j: u8,
        o: Orientation,
        same: &LevelGadgets,
        other: &LevelGadgets,
    ) -> Result<(H, Arc<CtlFormula>), CounterError> {
        let s = o.primary();
        let t = o.secondary();
        let low = self.below(j);
        let [aj, bj] = self.bits(j);

        let entry = self.state(self.name(j, "valid", o, "entry"))?;

        // Branch: some address is malformed.
        let skipind = self.state(self.name(j, "valid", o, "skipind"))?;
        let skipind_in = self.state(self.name(j, "valid", o, "skipind.in"))?;
        let induct = self.state(self.name(j, "valid", o, "induct"))?;
        self.internal(entry.id, skipind.id);
        self.wire_item_skip(skipind.id, skipind_in.id, s, j)?;
        // The anchor requires an item to actually start here: skipping the
        // whole word would otherwise refute vacuously against the empty
        // remainder.
        for lv in 1..=j {
            for sym in self.bits(lv) {
                self.b.noop(skipind.id, induct.id, s, Guard::Symbol(sym))?;
                self.transitions += 1;
            }
        }
        self.internal(induct.id, same.qvalid);
        let branch_ind = CtlFormula::ex(CtlFormula::and(
            skipind.atom.clone(),
            CtlFormula::ef(CtlFormula::and(induct.atom.clone(), same.ctlval.clone())),
        ));

        // Branch: the topmost address is not maximal.
        self.internal(entry.id, same.qmax);
        let branch_top = same.ctlmax.clone();

        // Branch: the last address is not minimal.
        let skipmin = self.state(self.name(j, "valid", o, "skipmin"))?;
        let skipmin_in = self.state(self.name(j, "valid", o, "skipmin.in"))?;
        let atmin = self.state(self.name(j, "valid", o, "atmin"))?;
        let lastitem = self.state(self.name(j, "valid", o, "lastitem"))?;
        let lastitem_end = self.state(self.name(j, "valid", o, "lastitem.end"))?;
        self.internal(entry.id, skipmin.id);
        self.wire_item_skip(skipmin.id, skipmin_in.id, s, j)?;
        self.internal(skipmin.id, atmin.id);
        self.internal(atmin.id, same.qmin);
        self.internal(atmin.id, lastitem.id);
        self.wire_item_pop(lastitem.id, lastitem_end.id, s, j)?;
        self.wire_end_noop(lastitem_end.id, self.sinks.win, s, j)?;
        let branch_last = CtlFormula::ex(CtlFormula::and(
            skipmin.atom.clone(),
            CtlFormula::ef(CtlFormula::all(vec![
                atmin.atom.clone(),
                same.ctlmin.clone(),
                CtlFormula::ex(CtlFormula::and(
                    lastitem.atom.clone(),
                    CtlFormula::ef(self.win_atom.clone()),
                )),
            ])),
        ));

        // Branch: adjacent addresses do not descend by one. Guess a copy of
        // the current address onto the drained secondary stack, confirm the
        // copy is a valid counter equal to the current address, drop the
        // current item, and require the copy to be the successor of the next
        // address; refuted means some step is broken.
        let skipstep = self.state(self.name(j, "valid", o, "skipstep"))?;
        let skipstep_in = self.state(self.name(j, "valid", o, "skipstep.in"))?;
        let guess = self.state(self.name(j, "valid", o, "guess"))?;
        let chkguess = self.state(self.name(j, "valid", o, "chkguess"))?;
        let dropitem = self.state(self.name(j, "valid", o, "dropitem"))?;
        let atstep = self.state(self.name(j, "valid", o, "atstep"))?;
        self.internal(entry.id, skipstep.id);
        self.wire_item_skip(skipstep.id, skipstep_in.id, s, j)?;
        self.internal(skipstep.id, guess.id);
        // Drain the secondary stack completely before writing.
        for lv in 1..=self.level {
            let syms = self.bits(lv);
            self.pop_each(guess.id, guess.id, t, &syms)?;
        }
        let ctx = self.ctx_syms.clone();
        self.pop_each(guess.id, guess.id, t, &ctx)?;
        self.wire_guess_writer(j, o, j - 1, &guess, &chkguess, t)?;
        self.internal(chkguess.id, other.qvalid);
        self.internal(chkguess.id, same.qeqcheck);
        self.internal(chkguess.id, dropitem.id);
        self.wire_item_pop(dropitem.id, atstep.id, s, j)?;
        self.internal(atstep.id, same.qsuccheck);
        let branch_step = CtlFormula::ex(CtlFormula::and(
            skipstep.atom.clone(),
            CtlFormula::ef(CtlFormula::and(
                guess.atom.clone(),
                CtlFormula::ef(CtlFormula::all(vec![
                    chkguess.atom.clone(),
                    CtlFormula::not(other.ctlval.clone()),
                    CtlFormula::not(same.ctleq.clone()),
                    CtlFormula::ex(CtlFormula::and(
                        dropitem.atom.clone(),
                        CtlFormula::ef(CtlFormula::and(atstep.atom.clone(), same.ctlsucc.clone())),
                    )),
                ])),
            )),
        ));

        // Branch: broken item structure, i.e. the word ends inside an item
        // or is empty.
        let shape = self.state(self.name(j, "valid", o, "shape"))?;
        let shape_mark = self.state(self.name(j, "valid", o, "shape.mark"))?;
        self.internal(entry.id, shape.id);
        self.pop_each(shape.id, shape.id, s, &low)?;
        self.pop(shape.id, shape_mark.id, s, aj)?;
        self.pop(shape.id, shape_mark.id, s, bj)?;
        self.wire_end_noop(shape.id, self.sinks.err, s, j)?;
        self.pop_each(shape_mark.id, shape.id, s, &low)?;
        self.pop(shape_mark.id, shape_mark.id, s, aj)?;
        self.pop(shape_mark.id, shape_mark.id, s, bj)?;
        let branch_shape =
            CtlFormula::ex(CtlFormula::and(shape.atom.clone(), CtlFormula::ef(self.err_atom.clone())));

        // The shape walk must err after the first lower-level bit of a
        // dangling suffix, not before finishing a complete item: popping a
        // lower bit from `shape_mark` returns to `shape`, which carries the
        // end no-ops.
        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::any(vec![branch_ind, branch_top, branch_last, branch_step, branch_shape]),
        ));
        Ok((entry, formula))
    }

    fn emit_level_higher(
        &mut self,
        j: u8,
        o: Orientation,
        same: &LevelGadgets,
        other: &LevelGadgets,
    ) -> Result<LevelGadgets, CounterError> {
        let (qmax, ctlmax) = self.emit_extremum(j, o, "max", false)?;
        let (qmin, ctlmin) = self.emit_extremum(j, o, "min", true)?;
        let eq_parts = self.emit_eq_higher(j, o, same)?;
        let (qsucc, ctlsucc) = self.emit_succ_higher(j, o, same, &eq_parts)?;
        let (qval, ctlval) = self.emit_valid_higher(j, o, same, other)?;
        Ok(LevelGadgets {
            level: j,
            orientation: o,
            qmax: qmax.id,
            qmin: qmin.id,
            qeqcheck: eq_parts.entry.id,
            qsuccheck: qsucc.id,
            qvalid: qval.id,
            ctlmax,
            ctlmin,
            ctleq: eq_parts.formula,
            ctlsucc,
            ctlval,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::CounterParams;

    fn params(level: u8, base: u32) -> CounterParams {
        CounterParams::new(level, base).expect("valid params")
    }

    #[test]
    fn library_builds_and_entries_resolve() {
        let lib = build_counter_gadgets(&params(2, 2)).expect("build");
        let sys = &lib.system;
        let first = lib.set.level(2, Orientation::First);
        let second = lib.set.level(2, Orientation::Second);
        assert_eq!(sys.state_id("ctr2.eq.entry"), Some(first.qeqcheck));
        assert_eq!(sys.state_id("ctr2.eq2.entry"), Some(second.qeqcheck));
        assert_eq!(sys.state_id("ctr1.succ.entry"), Some(lib.set.level(1, Orientation::First).qsuccheck));
        assert_eq!(sys.state_id("sink.err"), Some(lib.set.sinks.err));
        assert_eq!(sys.state_id("host"), Some(lib.host));
        assert!(sys.validate().is_empty());
    }

    #[test]
    fn size_stays_within_promised_bounds() {
        for (k, n) in [(1, 1), (1, 4), (1, 8), (2, 1), (2, 2), (2, 4), (3, 1), (3, 2)] {
            let lib = build_counter_gadgets(&params(k, n)).expect("build");
            let report = lib.set.size_report();
            assert!(
                report.within_bounds(),
                "k={k} n={n}: {} states vs bound {}, {} transitions vs bound {}",
                report.states,
                report.state_bound,
                report.transitions,
                report.transition_bound,
            );
        }
    }

    #[test]
    fn context_letters_that_collide_with_the_encoding_are_rejected() {
        let p = params(2, 2);
        let mut b = SystemBuilder::new(2);
        let err = emit_counter_gadgets(&mut b, &p, &[StackSymbol::bit_a(1)]);
        assert!(matches!(err, Err(CounterError::ReservedLetter(_))));
        let mut b = SystemBuilder::new(2);
        let err = emit_counter_gadgets(&mut b, &p, &[StackSymbol::Bottom]);
        assert!(matches!(err, Err(CounterError::ReservedLetter(_))));
        // A bit of a strictly higher level is an ordinary context letter.
        let mut b = SystemBuilder::new(2);
        assert!(emit_counter_gadgets(&mut b, &p, &[StackSymbol::bit_a(3)]).is_ok());
    }

    #[test]
    fn emitting_twice_into_one_builder_collides() {
        let p = params(1, 1);
        let mut b = SystemBuilder::new(2);
        emit_counter_gadgets(&mut b, &p, &[]).expect("first emission");
        assert!(emit_counter_gadgets(&mut b, &p, &[]).is_err());
    }

    #[test]
    fn declared_switch_budgets() {
        let lib = build_counter_gadgets(&params(2, 1)).expect("build");
        assert_eq!(lib.set.declared_switches(Family::Max, 2), 0);
        assert_eq!(lib.set.declared_switches(Family::Min, 1), 0);
        assert_eq!(lib.set.declared_switches(Family::Equal, 2), 4);
        assert_eq!(lib.set.declared_switches(Family::Succ, 1), 2);
        assert_eq!(lib.set.declared_switches(Family::Valid, 2), 4);
    }

    #[test]
    fn formulas_share_subterms_across_levels() {
        let lib = build_counter_gadgets(&params(3, 1)).expect("build");
        let v3 = lib.set.formula(Family::Valid, 3, Orientation::First);
        let v2 = lib.set.formula(Family::Valid, 2, Orientation::First);
        // DAG sizes stay small because lower-level formulas are shared, not
        // re-expanded.
        assert!(v3.dag_size() > v2.dag_size());
        assert!(v3.dag_size() < 400, "dag size {}", v3.dag_size());
    }
}
