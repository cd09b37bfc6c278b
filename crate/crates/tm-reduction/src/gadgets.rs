//! Stack-walking fragments over encoded machine configurations.
//!
//! On top of the counter fragments this module installs seven configuration
//! families into a host two-stack system:
//!
//! * `ValidConf` (both orientations): the primary stack does not start with
//!   a well-formed configuration word.
//! * `EqConf`: the configuration words on top of the two stacks differ.
//! * `Move`: the word on stack 2 is not a one-step machine successor of the
//!   word on stack 1.
//! * `Step`: the top configuration word on stack 1 is not a one-step
//!   successor of the configuration word directly below it.
//! * `Init` / `Final`: positive certifiers reaching the win sink iff the
//!   top word is the initial configuration on the compiled input, or holds
//!   a final control state; their companions wrap the certifier in a
//!   negation so the refutation convention is uniform.
//!
//! Every companion formula holds at a host configuration exactly when the
//! named property FAILS. Checks that need to consult a counter value guess
//! one nondeterministically, but along a fixed push skeleton: the chain
//! spells the exact address structure of a counter or configuration word
//! and only branches at value bits and machine letters, so the guessed
//! words are well-formed by construction and the reachable graph stays
//! polynomial in the word length instead of exponential in the stack cap.

use std::collections::BTreeMap;
use std::sync::Arc;

use counters::{
    emit_counter_gadgets, encode_counter, max_value, CounterParams, Family, GadgetSet,
    Orientation, Sinks,
};
use ctl::CtlFormula;
use mpds_core::{Guard, MpdsSystem, StackSymbol, StateId, SymbolId, SystemBuilder, BOTTOM};
use num_bigint::BigUint;

use crate::encode::{config_word_len, tape_cells};
use crate::machine::{Direction, TmAction, TmMachine};
use crate::TmError;

/// Keep the materialized gadget set at desk scale: the emitter spells one
/// skeleton state per configuration-word symbol.
const MAX_CONFIG_WORD_LEN: u64 = 1 << 20;

/// Entry states, companion formulas, and size report for one machine and
/// parameter choice.
#[derive(Clone, Debug)]
pub struct ConfigGadgets {
    /// Counter shape the configuration encoding is built on.
    pub params: CounterParams,
    /// The counter fragments emitted alongside (shared sinks and all).
    pub set: GadgetSet,
    /// Entries of the well-formedness check, indexed by [`Orientation`].
    pub qvalidconf: [StateId; 2],
    /// Holds iff the primary stack does NOT start with a valid configuration.
    pub ctlvalidconf: [Arc<CtlFormula>; 2],
    /// Entry of the configuration equality check (stack 1 against stack 2).
    pub qeqconfig: StateId,
    /// Holds iff the two top configuration words differ.
    pub ctleqconf: Arc<CtlFormula>,
    /// Entry of the cross-stack successor check.
    pub qmove: StateId,
    /// Holds iff stack 2 does NOT hold a one-step successor of stack 1.
    pub ctlmove: Arc<CtlFormula>,
    /// Entry of the in-stack successor check.
    pub qstep: StateId,
    /// Holds iff the top configuration is NOT a one-step successor of the
    /// configuration below it on stack 1.
    pub ctlstep: Arc<CtlFormula>,
    /// Entry of the initial-configuration certifier.
    pub qinit: StateId,
    /// Holds iff the top configuration is NOT the initial one.
    pub ctlinitconf: Arc<CtlFormula>,
    /// Entry of the final-state certifier.
    pub qfinal: StateId,
    /// Holds iff the top configuration does NOT hold a final state.
    pub ctlfinalconf: Arc<CtlFormula>,
    /// Measured sizes next to the promised explicit-constant bounds.
    pub report: ConfigSizeReport,
}

impl ConfigGadgets {
    /// All seven fragment entries, for hosts that fan out to everything.
    pub fn entries(&self) -> [StateId; 7] {
        [
            self.qvalidconf[0],
            self.qvalidconf[1],
            self.qeqconfig,
            self.qmove,
            self.qstep,
            self.qinit,
            self.qfinal,
        ]
    }

    /// Stack-switch budget for a run witnessing the validity verdict.
    pub fn valid_switches(&self) -> u32 {
        2 + 2 * u32::from(self.params.level())
    }

    /// Stack-switch budget for a run witnessing the equality verdict.
    pub fn eq_switches(&self) -> u32 {
        2 + 2 * u32::from(self.params.level())
    }

    /// Stack-switch budget for a run witnessing the cross-stack move verdict.
    pub fn move_switches(&self) -> u32 {
        2 + 2 * u32::from(self.params.level())
    }

    /// Stack-switch budget for a run witnessing the in-stack step verdict.
    pub fn step_switches(&self) -> u32 {
        4 + 2 * u32::from(self.params.level())
    }
}

/// Measured sizes of the configuration fragments (counter set included)
/// next to the explicit polynomial budget of the construction.
#[derive(Clone, Copy, Debug)]
pub struct ConfigSizeReport {
    /// Counter level of the encoding.
    pub level: u8,
    /// Bit width of the level-1 counters (the compiled input length).
    pub base: u32,
    /// Tape cells, i.e. the largest encodable address.
    pub cells: u64,
    /// Symbols in one counter word.
    pub counter_word_len: u64,
    /// Symbols in one configuration word.
    pub config_word_len: u64,
    /// Machine letters (control states plus tape alphabet).
    pub letters: usize,
    /// States emitted, including the counter fragments and sinks.
    pub states: usize,
    /// Transitions emitted.
    pub transitions: usize,
    /// Promised state bound, explicit in the word lengths and letter counts.
    pub state_bound: usize,
    /// Promised transition bound.
    pub transition_bound: usize,
}

impl ConfigSizeReport {
    /// Whether the measured sizes stay within the promised bounds.
    pub fn within_bounds(&self) -> bool {
        self.states <= self.state_bound && self.transitions <= self.transition_bound
    }
}

/// A self-contained two-stack system hosting one configuration gadget set.
///
/// The host state has an internal edge to every fragment entry, so one
/// exploration from a host configuration with prepared stack contents
/// answers every companion formula.
#[derive(Debug)]
pub struct ConfigLibrary {
    /// The built system.
    pub system: MpdsSystem,
    /// Initial state wired to all fragment entries.
    pub host: StateId,
    /// Entries and formulas of the emitted fragments.
    pub gadgets: ConfigGadgets,
}

/// Emits the configuration fragments (and the counter fragments they build
/// on) into an existing two-stack builder.
///
/// `input` is the machine input the initial-configuration certifier is
/// specialized to; it must fit the tape.
pub fn emit_config_gadgets(
    b: &mut SystemBuilder,
    m: &TmMachine,
    p: &CounterParams,
    input: &[String],
) -> Result<ConfigGadgets, TmError> {
    m.validate()?;
    let cells = tape_cells(p)?;
    let cwl = config_word_len(p)?;
    if cwl > MAX_CONFIG_WORD_LEN {
        return Err(TmError::TapeTooLarge(max_value(p)));
    }
    if input.len() as u64 > cells {
        return Err(TmError::InputTooLong {
            needed: input.len(),
            cells,
            level: p.level(),
        });
    }
    for letter in input {
        if !m.is_tape_letter(letter) {
            return Err(TmError::BadInput(letter.clone()));
        }
    }

    // Counter fragments first; machine letters and zeta are the context
    // alphabet that may follow a counter word.
    let mut context: Vec<StackSymbol> = m
        .states
        .iter()
        .chain(&m.tape_alphabet)
        .map(|n| StackSymbol::tm_letter(n))
        .collect();
    context.push(StackSymbol::Zeta);
    let set = emit_counter_gadgets(b, p, &context)?;

    let k = p.level();
    let mut bit_syms = Vec::with_capacity(usize::from(k));
    for j in 1..=k {
        bit_syms.push([b.symbol(StackSymbol::bit_a(j)), b.symbol(StackSymbol::bit_b(j))]);
    }
    let zeta = b.symbol(StackSymbol::Zeta);
    let state_syms: Vec<SymbolId> =
        m.states.iter().map(|n| b.symbol(StackSymbol::tm_letter(n))).collect();
    let tape_syms: Vec<SymbolId> =
        m.tape_alphabet.iter().map(|n| b.symbol(StackSymbol::tm_letter(n))).collect();
    let final_syms: Vec<SymbolId> =
        m.finals.iter().map(|n| b.symbol(StackSymbol::tm_letter(n))).collect();

    let mut em = CfgEmitter {
        b,
        p: *p,
        cells,
        bit_syms,
        zeta,
        state_syms,
        tape_syms,
        final_syms,
        sinks: set.sinks,
        err_atom: CtlFormula::atom("sink.err"),
        win_atom: CtlFormula::atom("sink.win"),
        states: 0,
        transitions: 0,
    };

    let (qvalid1, ctlvalid1) = em.emit_valid(Orientation::First, &set)?;
    let (qvalid2, ctlvalid2) = em.emit_valid(Orientation::Second, &set)?;
    let (qeq, ctleq) = em.emit_eq(&set)?;
    let (qmove, ctlmove) = em.emit_move(m, &set)?;
    let inner = StepInner {
        qvalid2: qvalid2.id,
        ctlvalid2: ctlvalid2.clone(),
        qeq: qeq.id,
        ctleq: ctleq.clone(),
        qmove: qmove.id,
        ctlmove: ctlmove.clone(),
    };
    let (qstep, ctlstep) = em.emit_step(m, &inner)?;
    let (qinit, ctlinit) = em.emit_init(m, input)?;
    let (qfinal, ctlfinal) = em.emit_final()?;

    let report = em.size_report(&set, cwl, m);
    Ok(ConfigGadgets {
        params: *p,
        set,
        qvalidconf: [qvalid1.id, qvalid2.id],
        ctlvalidconf: [ctlvalid1, ctlvalid2],
        qeqconfig: qeq.id,
        ctleqconf: ctleq,
        qmove: qmove.id,
        ctlmove,
        qstep: qstep.id,
        ctlstep,
        qinit: qinit.id,
        ctlinitconf: ctlinit,
        qfinal: qfinal.id,
        ctlfinalconf: ctlfinal,
        report,
    })
}

/// Builds a standalone library: a fresh two-stack system whose initial host
/// state fans out to every configuration fragment entry.
pub fn build_config_gadgets(
    m: &TmMachine,
    p: &CounterParams,
    input: &[String],
) -> Result<ConfigLibrary, TmError> {
    let mut b = SystemBuilder::new(2);
    let gadgets = emit_config_gadgets(&mut b, m, p, input)?;
    let host = b.fresh_state("host")?;
    for entry in gadgets.entries() {
        b.internal(host, entry);
    }
    b.set_initial(host);
    let system = b.build()?;
    Ok(ConfigLibrary { system, host, gadgets })
}

/// One config-word writer chain: entry state plus how much it added.
pub(crate) struct WriterOut {
    pub entry: StateId,
    pub states: usize,
    pub transitions: usize,
}

/// Emits a push chain that writes one whole configuration word onto
/// `stack` and lands in `to`.
///
/// The chain spells the exact address skeleton (zeta first, then blocks
/// with ascending addresses, pushed bottom-up) and branches only at the
/// letter slots, tracking whether the single control-state letter has been
/// placed yet. The topmost letter slot admits tape letters only, so the
/// written words are exactly the well-formed configuration encodings. When
/// `bottom_guarded` is set the first push fires only on an empty stack.
pub(crate) fn emit_config_writer(
    b: &mut SystemBuilder,
    m: &TmMachine,
    p: &CounterParams,
    prefix: &str,
    stack: u8,
    bottom_guarded: bool,
    to: StateId,
) -> Result<WriterOut, TmError> {
    enum Slot {
        Fixed(SymbolId),
        Letter { top: bool },
    }

    let cells = tape_cells(p)?;
    let zeta = b.symbol(StackSymbol::Zeta);
    let state_syms: Vec<SymbolId> =
        m.states.iter().map(|n| b.symbol(StackSymbol::tm_letter(n))).collect();
    let tape_syms: Vec<SymbolId> =
        m.tape_alphabet.iter().map(|n| b.symbol(StackSymbol::tm_letter(n))).collect();

    // Push order is the reverse of the word: zeta, then per ascending
    // address the letter and the reversed address bits.
    let mut slots = vec![Slot::Fixed(zeta)];
    for addr in 0..=cells {
        slots.push(Slot::Letter { top: addr == cells });
        let word = encode_counter(p, &BigUint::from(addr))?;
        for sym in word.iter().rev() {
            slots.push(Slot::Fixed(b.symbol(sym.clone())));
        }
    }

    let entry = b.fresh_state(format!("{prefix}.n0"))?;
    let mut states = 1usize;
    let mut transitions = 0usize;
    // Two parallel chains: control state not yet placed / already placed.
    let mut no = Some(entry);
    let mut yes: Option<StateId> = None;
    for (i, slot) in slots.iter().enumerate() {
        let at_end = i + 1 == slots.len();
        let guard = if i == 0 && bottom_guarded {
            Guard::Symbol(BOTTOM)
        } else {
            Guard::Wildcard
        };
        match *slot {
            Slot::Fixed(sym) => {
                let next_no = match no {
                    Some(_) if at_end => Some(to),
                    Some(_) => {
                        states += 1;
                        Some(b.fresh_state(format!("{prefix}.n{}", i + 1))?)
                    }
                    None => None,
                };
                let next_yes = match yes {
                    Some(_) if at_end => Some(to),
                    Some(_) => {
                        states += 1;
                        Some(b.fresh_state(format!("{prefix}.y{}", i + 1))?)
                    }
                    None => None,
                };
                if let (Some(f), Some(t)) = (no, next_no) {
                    b.push(f, t, stack, guard, sym)?;
                    transitions += 1;
                }
                if let (Some(f), Some(t)) = (yes, next_yes) {
                    b.push(f, t, stack, Guard::Wildcard, sym)?;
                    transitions += 1;
                }
                no = next_no;
                yes = next_yes;
            }
            Slot::Letter { top } => {
                // Letter slots are never first or last in the chain.
                let next_no = if no.is_some() && !top {
                    states += 1;
                    Some(b.fresh_state(format!("{prefix}.n{}", i + 1))?)
                } else {
                    None
                };
                let next_yes = if yes.is_some() || (no.is_some() && !top) {
                    states += 1;
                    Some(b.fresh_state(format!("{prefix}.y{}", i + 1))?)
                } else {
                    None
                };
                if let Some(f) = no {
                    if let Some(t) = next_no {
                        for &g in &tape_syms {
                            b.push(f, t, stack, Guard::Wildcard, g)?;
                            transitions += 1;
                        }
                    }
                    if !top {
                        let t = next_yes.expect("yes chain exists once no does");
                        for &q in &state_syms {
                            b.push(f, t, stack, Guard::Wildcard, q)?;
                            transitions += 1;
                        }
                    }
                }
                if let (Some(f), Some(t)) = (yes, next_yes) {
                    for &g in &tape_syms {
                        b.push(f, t, stack, Guard::Wildcard, g)?;
                        transitions += 1;
                    }
                }
                no = next_no;
                yes = next_yes;
            }
        }
    }
    Ok(WriterOut { entry, states, transitions })
}

/// A state handle paired with the atom naming it in companion formulas.
#[derive(Clone)]
struct H {
    id: StateId,
    atom: Arc<CtlFormula>,
}

/// Entries and formulas the in-stack step fragment delegates to.
struct StepInner {
    qvalid2: StateId,
    ctlvalid2: Arc<CtlFormula>,
    qeq: StateId,
    ctleq: Arc<CtlFormula>,
    qmove: StateId,
    ctlmove: Arc<CtlFormula>,
}

struct CfgEmitter<'a> {
    b: &'a mut SystemBuilder,
    p: CounterParams,
    cells: u64,
    /// `bit_syms[j-1] = [a_j, b_j]`.
    bit_syms: Vec<[SymbolId; 2]>,
    zeta: SymbolId,
    state_syms: Vec<SymbolId>,
    tape_syms: Vec<SymbolId>,
    final_syms: Vec<SymbolId>,
    sinks: Sinks,
    err_atom: Arc<CtlFormula>,
    win_atom: Arc<CtlFormula>,
    states: usize,
    transitions: usize,
}

impl CfgEmitter<'_> {
    fn state(&mut self, name: String) -> Result<H, TmError> {
        let id = self.b.fresh_state(name.clone())?;
        self.states += 1;
        Ok(H { id, atom: CtlFormula::atom(name) })
    }

    fn all_bits(&self) -> Vec<SymbolId> {
        self.bit_syms.iter().flatten().copied().collect()
    }

    fn all_letters(&self) -> Vec<SymbolId> {
        self.state_syms.iter().chain(&self.tape_syms).copied().collect()
    }

    fn pop(&mut self, from: StateId, to: StateId, stack: u8, sym: SymbolId) -> Result<(), TmError> {
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
    ) -> Result<(), TmError> {
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
    ) -> Result<(), TmError> {
        self.b.push(from, to, stack, guard, sym)?;
        self.transitions += 1;
        Ok(())
    }

    fn noop(
        &mut self,
        from: StateId,
        to: StateId,
        stack: u8,
        guard: Guard<SymbolId>,
    ) -> Result<(), TmError> {
        self.b.noop(from, to, stack, guard)?;
        self.transitions += 1;
        Ok(())
    }

    fn internal(&mut self, from: StateId, to: StateId) {
        self.b.internal(from, to);
        self.transitions += 1;
    }

    /// No-op into `to` whenever `stack` shows any counter bit: the anchor
    /// guard marking a position where an address starts.
    fn bit_noop(&mut self, from: StateId, to: StateId, stack: u8) -> Result<(), TmError> {
        for sym in self.all_bits() {
            self.noop(from, to, stack, Guard::Symbol(sym))?;
        }
        Ok(())
    }

    /// Block-granular skip walk on `stack`: `boundary` sits between blocks,
    /// `mid` inside one. Bits enter and stay in `mid`; the block's machine
    /// letter closes it and returns to `boundary`. The walk never crosses a
    /// zeta, so it stays within the top configuration word.
    fn wire_block_skip(
        &mut self,
        boundary: StateId,
        mid: StateId,
        stack: u8,
    ) -> Result<(), TmError> {
        for sym in self.all_bits() {
            self.pop(boundary, mid, stack, sym)?;
            self.pop(mid, mid, stack, sym)?;
        }
        for sym in self.all_letters() {
            self.pop(mid, boundary, stack, sym)?;
        }
        Ok(())
    }

    /// `EX(state ∧ EF win)`: the positive certifier shape.
    fn certify(&self, h: &H) -> Arc<CtlFormula> {
        CtlFormula::ex(CtlFormula::and(h.atom.clone(), CtlFormula::ef(self.win_atom.clone())))
    }

    /// `EX(state ∧ EF err)`: the refutation shape.
    fn refute(&self, h: &H) -> Arc<CtlFormula> {
        CtlFormula::ex(CtlFormula::and(h.atom.clone(), CtlFormula::ef(self.err_atom.clone())))
    }

    /// Well-formedness of the configuration word starting the primary
    /// stack, refuted by eight branches off one entry: a non-maximal top
    /// address, an ill-formed address, a non-zero last address, a
    /// non-descending adjacent address pair, a shape violation, no control
    /// state, two control states, or a control state in the topmost block.
    fn emit_valid(
        &mut self,
        o: Orientation,
        set: &GadgetSet,
    ) -> Result<(H, Arc<CtlFormula>), TmError> {
        let k = self.p.level();
        let s = o.primary();
        let t = o.secondary();
        let tag = if o == Orientation::First { "" } else { "2" };
        let name = |part: &str| format!("cfg.valid{tag}.{part}");

        let entry = self.state(name("entry"))?;

        // Branch 1: topmost address not maximal.
        self.internal(entry.id, set.entry(Family::Max, k, o));
        let br_top = set.formula(Family::Max, k, o).clone();

        // Shared skip walk serving the three block-anchored branches.
        let skb = self.state(name("skip"))?;
        let skm = self.state(name("skipmid"))?;
        self.internal(entry.id, skb.id);
        self.wire_block_skip(skb.id, skm.id, s)?;

        // Branch 2: some block's address is not a well-formed counter word.
        let induct = self.state(name("induct"))?;
        self.bit_noop(skb.id, induct.id, s)?;
        self.internal(induct.id, set.entry(Family::Valid, k, o));
        let br_ind = CtlFormula::ex(CtlFormula::and(
            skb.atom.clone(),
            CtlFormula::ef(CtlFormula::and(
                induct.atom.clone(),
                set.formula(Family::Valid, k, o).clone(),
            )),
        ));

        // Branch 3: the block followed by the zeta has a non-zero address.
        let atlast = self.state(name("atlast"))?;
        self.bit_noop(skb.id, atlast.id, s)?;
        self.internal(atlast.id, set.entry(Family::Min, k, o));
        let lb0 = self.state(name("lastblock"))?;
        let lb1 = self.state(name("lastend"))?;
        self.internal(atlast.id, lb0.id);
        self.pop_each(lb0.id, lb0.id, s, &self.all_bits())?;
        self.pop_each(lb0.id, lb1.id, s, &self.all_letters())?;
        self.noop(lb1.id, self.sinks.win, s, Guard::Symbol(self.zeta))?;
        let br_last = CtlFormula::ex(CtlFormula::and(
            skb.atom.clone(),
            CtlFormula::ef(CtlFormula::and(
                atlast.atom.clone(),
                CtlFormula::and(set.formula(Family::Min, k, o).clone(), self.certify(&lb0)),
            )),
        ));

        // Branch 4: some adjacent address pair does not descend by one.
        // Guess a counter value on the secondary stack, pin it to the
        // current address, drop the block, and ask the successor fragment.
        let atcur = self.state(name("atcur"))?;
        self.bit_noop(skb.id, atcur.id, s)?;
        self.pop_each(atcur.id, atcur.id, t, &self.all_bits())?;
        self.pop_each(atcur.id, atcur.id, t, &self.all_letters())?;
        self.pop(atcur.id, atcur.id, t, self.zeta)?;
        let chk = self.state(name("chk"))?;
        self.emit_counter_guess(&name("guess"), t, atcur.id, chk.id)?;
        self.internal(chk.id, set.entry(Family::Equal, k, o));
        let dropb = self.state(name("dropblock"))?;
        self.internal(chk.id, dropb.id);
        self.pop_each(dropb.id, dropb.id, s, &self.all_bits())?;
        let postdrop = self.state(name("postdrop"))?;
        self.pop_each(dropb.id, postdrop.id, s, &self.all_letters())?;
        let atnext = self.state(name("atnext"))?;
        // Only anchor when another block follows; the last block has no
        // adjacency obligation.
        self.bit_noop(postdrop.id, atnext.id, s)?;
        self.internal(atnext.id, set.entry(Family::Succ, k, o));
        let br_step = CtlFormula::ex(CtlFormula::and(
            skb.atom.clone(),
            CtlFormula::ef(CtlFormula::and(
                atcur.atom.clone(),
                CtlFormula::ef(CtlFormula::and(
                    chk.atom.clone(),
                    CtlFormula::and(
                        CtlFormula::not(set.formula(Family::Equal, k, o).clone()),
                        CtlFormula::ex(CtlFormula::and(
                            dropb.atom.clone(),
                            CtlFormula::ef(CtlFormula::and(
                                atnext.atom.clone(),
                                set.formula(Family::Succ, k, o).clone(),
                            )),
                        )),
                    ),
                )),
            )),
        ));

        // Branch 5: the word does not match (bits+ letter)+ zeta.
        let sst = self.state(name("shape"))?;
        let sin = self.state(name("shapein"))?;
        let sbnd = self.state(name("shapebound"))?;
        self.internal(entry.id, sst.id);
        self.noop(sst.id, self.sinks.err, s, Guard::Symbol(self.zeta))?;
        self.noop(sst.id, self.sinks.err, s, Guard::Symbol(BOTTOM))?;
        for sym in self.all_letters() {
            self.noop(sst.id, self.sinks.err, s, Guard::Symbol(sym))?;
        }
        for sym in self.all_bits() {
            self.pop(sst.id, sin.id, s, sym)?;
            self.pop(sin.id, sin.id, s, sym)?;
            self.pop(sbnd.id, sin.id, s, sym)?;
        }
        for sym in self.all_letters() {
            self.pop(sin.id, sbnd.id, s, sym)?;
            self.noop(sbnd.id, self.sinks.err, s, Guard::Symbol(sym))?;
        }
        self.noop(sin.id, self.sinks.err, s, Guard::Symbol(self.zeta))?;
        self.noop(sin.id, self.sinks.err, s, Guard::Symbol(BOTTOM))?;
        self.noop(sbnd.id, self.sinks.err, s, Guard::Symbol(BOTTOM))?;
        let br_shape = self.refute(&sst);

        // Branch 6: no control state anywhere before the zeta.
        let z = self.state(name("zeroq"))?;
        self.internal(entry.id, z.id);
        self.pop_each(z.id, z.id, s, &self.all_bits())?;
        self.pop_each(z.id, z.id, s, &self.tape_syms.clone())?;
        self.noop(z.id, self.sinks.err, s, Guard::Symbol(self.zeta))?;
        let br_zeroq = self.refute(&z);

        // Branch 7: two control states.
        let w0 = self.state(name("twoq"))?;
        let w1 = self.state(name("twoqseen"))?;
        self.internal(entry.id, w0.id);
        self.pop_each(w0.id, w0.id, s, &self.all_bits())?;
        self.pop_each(w0.id, w0.id, s, &self.tape_syms.clone())?;
        self.pop_each(w0.id, w1.id, s, &self.state_syms.clone())?;
        self.pop_each(w1.id, w1.id, s, &self.all_bits())?;
        self.pop_each(w1.id, w1.id, s, &self.tape_syms.clone())?;
        self.pop_each(w1.id, self.sinks.err, s, &self.state_syms.clone())?;
        let br_twoq = self.refute(&w0);

        // Branch 8: the topmost letter is a control state.
        let tq = self.state(name("topq"))?;
        self.internal(entry.id, tq.id);
        self.pop_each(tq.id, tq.id, s, &self.all_bits())?;
        self.pop_each(tq.id, self.sinks.err, s, &self.state_syms.clone())?;
        let br_topq = self.refute(&tq);

        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::any(vec![
                br_top, br_ind, br_last, br_step, br_shape, br_zeroq, br_twoq, br_topq,
            ]),
        ));
        Ok((entry, formula))
    }

    /// Push chain writing one whole level-k counter word onto `stack`,
    /// branching at the value bits: the nondeterministic address guess.
    /// The first push is bottom-guarded, so it fires only after `from` has
    /// drained the stack.
    fn emit_counter_guess(
        &mut self,
        prefix: &str,
        stack: u8,
        from: StateId,
        to: StateId,
    ) -> Result<(), TmError> {
        let k = self.p.level();
        let word = encode_counter(&self.p, &BigUint::from(0u8))?;
        let value_bits = self.bit_syms[usize::from(k) - 1];
        let mut cur = from;
        for (step, sym) in word.iter().rev().enumerate() {
            let next = if step + 1 == word.len() {
                to
            } else {
                self.state(format!("{prefix}.g{}", step + 1))?.id
            };
            let guard =
                if step == 0 { Guard::Symbol(BOTTOM) } else { Guard::Wildcard };
            if matches!(sym, StackSymbol::CounterBit { level, .. } if *level == k) {
                // A level-k value slot: both polarities allowed.
                self.push(cur, next, stack, guard, value_bits[0])?;
                self.push(cur, next, stack, guard, value_bits[1])?;
            } else {
                let id = self.b.symbol(sym.clone());
                self.push(cur, next, stack, guard, id)?;
            }
            cur = next;
        }
        Ok(())
    }

    /// Equality of the two top configuration words, refuted by aligning
    /// one address on both stacks and comparing the letters there.
    fn emit_eq(&mut self, set: &GadgetSet) -> Result<(H, Arc<CtlFormula>), TmError> {
        let k = self.p.level();
        let name = |part: &str| format!("cfg.eqconf.{part}");
        let entry = self.state(name("entry"))?;
        let eb1 = self.state(name("skip"))?;
        let em1 = self.state(name("skipmid"))?;
        self.internal(entry.id, eb1.id);
        self.wire_block_skip(eb1.id, em1.id, 0)?;
        let eb2 = self.state(name("skip2"))?;
        let em2 = self.state(name("skipmid2"))?;
        self.bit_noop(eb1.id, eb2.id, 0)?;
        self.wire_block_skip(eb2.id, em2.id, 1)?;
        let aligned = self.state(name("aligned"))?;
        self.bit_noop(eb2.id, aligned.id, 1)?;
        self.internal(aligned.id, set.entry(Family::Equal, k, Orientation::First));

        // Letter comparison: drain the guessed-aligned address on stack 2,
        // remember its letter, and refute on any different letter on
        // stack 1.
        let vcmp = self.state(name("vcmp"))?;
        self.internal(aligned.id, vcmp.id);
        self.pop_each(vcmp.id, vcmp.id, 1, &self.all_bits())?;
        let letters = self.all_letters();
        for &d in &letters {
            let vd = self.state(name(&format!("vcmp{}", d.0)))?;
            self.pop(vcmp.id, vd.id, 1, d)?;
            self.pop_each(vd.id, vd.id, 0, &self.all_bits())?;
            for &e in &letters {
                if e != d {
                    self.pop(vd.id, self.sinks.err, 0, e)?;
                }
            }
        }

        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::ef(CtlFormula::and(
                aligned.atom.clone(),
                CtlFormula::and(
                    CtlFormula::not(set.formula(Family::Equal, k, Orientation::First).clone()),
                    self.refute(&vcmp),
                ),
            )),
        ));
        Ok((entry, formula))
    }

    /// Cross-stack machine step, refuted by two branches: a mismatch far
    /// from the control state, or a forbidden rewrite of the three-letter
    /// window around it.
    fn emit_move(
        &mut self,
        m: &TmMachine,
        set: &GadgetSet,
    ) -> Result<(H, Arc<CtlFormula>), TmError> {
        let k = self.p.level();
        let name = |part: &str| format!("cfg.move.{part}");
        let entry = self.state(name("entry"))?;
        let eqk = set.formula(Family::Equal, k, Orientation::First).clone();

        // Far branch. Walk stack 1 tracking whether the letter just
        // removed was a control state; anchor only where it was not.
        let simple = self.state(name("simple"))?;
        let sbad = self.state(name("simplebad"))?;
        let smid = self.state(name("simplemid"))?;
        self.internal(entry.id, simple.id);
        for sym in self.all_bits() {
            self.pop(simple.id, smid.id, 0, sym)?;
            self.pop(sbad.id, smid.id, 0, sym)?;
            self.pop(smid.id, smid.id, 0, sym)?;
        }
        for sym in self.tape_syms.clone() {
            self.pop(simple.id, simple.id, 0, sym)?;
            self.pop(sbad.id, simple.id, 0, sym)?;
            self.pop(smid.id, simple.id, 0, sym)?;
        }
        for sym in self.state_syms.clone() {
            self.pop(simple.id, sbad.id, 0, sym)?;
            self.pop(sbad.id, sbad.id, 0, sym)?;
            self.pop(smid.id, sbad.id, 0, sym)?;
        }
        let simplef = self.state(name("simplef"))?;
        self.bit_noop(simple.id, simplef.id, 0)?;

        // The letter below the anchored block must not be a control state
        // either; a zeta below is just as good.
        let n0 = self.state(name("notq"))?;
        let n1 = self.state(name("notqnext"))?;
        self.internal(simplef.id, n0.id);
        self.pop_each(n0.id, n0.id, 0, &self.all_bits())?;
        self.pop_each(n0.id, n1.id, 0, &self.all_letters())?;
        self.pop_each(n1.id, n1.id, 0, &self.all_bits())?;
        self.pop_each(n1.id, self.sinks.win, 0, &self.tape_syms.clone())?;
        self.noop(n1.id, self.sinks.win, 0, Guard::Symbol(self.zeta))?;

        // Align stack 2 on the same address and compare letters, accepting
        // only tape letters on stack 1.
        let rsimple = self.state(name("rsimple"))?;
        let rmid = self.state(name("rsimplemid"))?;
        self.internal(simplef.id, rsimple.id);
        self.wire_block_skip(rsimple.id, rmid.id, 1)?;
        let rsimplef = self.state(name("rsimplef"))?;
        self.bit_noop(rsimple.id, rsimplef.id, 1)?;
        self.internal(rsimplef.id, set.entry(Family::Equal, k, Orientation::First));
        let csk = self.state(name("cmp"))?;
        self.internal(rsimplef.id, csk.id);
        self.pop_each(csk.id, csk.id, 1, &self.all_bits())?;
        for &d in &self.all_letters() {
            let cd = self.state(name(&format!("cmp{}", d.0)))?;
            self.pop(csk.id, cd.id, 1, d)?;
            self.pop_each(cd.id, cd.id, 0, &self.all_bits())?;
            for &e in &self.tape_syms.clone() {
                if e != d {
                    self.pop(cd.id, self.sinks.err, 0, e)?;
                }
            }
        }
        let ctlsimple = CtlFormula::ef(CtlFormula::and(
            simplef.atom.clone(),
            CtlFormula::and(
                self.certify(&n0),
                CtlFormula::ex(CtlFormula::and(
                    rsimple.atom.clone(),
                    CtlFormula::ef(CtlFormula::and(
                        rsimplef.atom.clone(),
                        CtlFormula::and(CtlFormula::not(eqk.clone()), self.refute(&csk)),
                    )),
                )),
            ),
        ));

        // Window branch. Walk both stacks to one aligned anchor and name
        // the three letters below it on each side; refute on any pair of
        // windows the transition table does not license.
        let hard = self.state(name("hard"))?;
        let hm = self.state(name("hardmid"))?;
        self.internal(entry.id, hard.id);
        self.wire_block_skip(hard.id, hm.id, 0)?;
        let rb = self.state(name("rhard"))?;
        let rm = self.state(name("rhardmid"))?;
        self.bit_noop(hard.id, rb.id, 0)?;
        self.wire_block_skip(rb.id, rm.id, 1)?;
        let rhardf = self.state(name("rhardf"))?;
        self.bit_noop(rb.id, rhardf.id, 1)?;
        self.internal(rhardf.id, set.entry(Family::Equal, k, Orientation::First));

        let pairs = self.emit_window_pairs(m, &rhardf)?;
        let ctlhard = CtlFormula::ef(CtlFormula::and(
            rhardf.atom.clone(),
            CtlFormula::and(CtlFormula::not(eqk), CtlFormula::any(pairs)),
        ));

        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::or(
                CtlFormula::ex(CtlFormula::and(simple.atom.clone(), ctlsimple)),
                CtlFormula::ex(CtlFormula::and(hard.atom.clone(), ctlhard)),
            ),
        ));
        Ok((entry, formula))
    }

    /// Pop chain confirming `letters` in order below the current anchor,
    /// addresses skipped. With `then_zeta` the chain ends on a zeta no-op,
    /// pinning the window to the bottom end of the word.
    fn emit_window_chain(
        &mut self,
        prefix: &str,
        stack: u8,
        letters: &[SymbolId],
        then_zeta: bool,
    ) -> Result<H, TmError> {
        let entry = self.state(format!("{prefix}.0"))?;
        let mut cur = entry.id;
        for (i, &sym) in letters.iter().enumerate() {
            self.pop_each(cur, cur, stack, &self.all_bits())?;
            let last = i + 1 == letters.len();
            let next = if last && !then_zeta {
                self.sinks.win
            } else {
                self.state(format!("{prefix}.{}", i + 1))?.id
            };
            self.pop(cur, next, stack, sym)?;
            cur = next;
        }
        if then_zeta {
            self.noop(cur, self.sinks.win, stack, Guard::Symbol(self.zeta))?;
        }
        Ok(entry)
    }

    /// Enumerates every forbidden (stack-1 window, stack-2 window) pair and
    /// returns one conjunction per pair over shared per-window certifiers.
    fn emit_window_pairs(
        &mut self,
        m: &TmMachine,
        anchor: &H,
    ) -> Result<Vec<Arc<CtlFormula>>, TmError> {
        let by_name: BTreeMap<&str, SymbolId> = m
            .states
            .iter()
            .zip(&self.state_syms)
            .chain(m.tape_alphabet.iter().zip(&self.tape_syms))
            .map(|(n, &s)| (n.as_str(), s))
            .collect();
        let sym = |n: &str| by_name[n];

        // Interior second windows: exactly one control state among three.
        // States and tape letters are disjoint, so the union is duplicate
        // free.
        let mut seconds3: Vec<[SymbolId; 3]> = Vec::new();
        for &q in &self.state_syms {
            for &x in &self.tape_syms {
                for &y in &self.tape_syms {
                    seconds3.push([q, x, y]);
                    seconds3.push([x, q, y]);
                    seconds3.push([x, y, q]);
                }
            }
        }
        let mut psi3 = Vec::with_capacity(seconds3.len());
        for (i, w) in seconds3.clone().into_iter().enumerate() {
            let h = self.emit_window_chain(&format!("cfg.move.s3x{i}"), 1, &w, false)?;
            self.internal(anchor.id, h.id);
            psi3.push(self.certify(&h));
        }

        // Boundary second windows: two letters then the zeta.
        let mut seconds2: Vec<[SymbolId; 2]> = Vec::new();
        for &q in &self.state_syms {
            for &x in &self.tape_syms {
                seconds2.push([q, x]);
                seconds2.push([x, q]);
            }
        }
        let mut psi2 = Vec::with_capacity(seconds2.len());
        for (i, w) in seconds2.clone().into_iter().enumerate() {
            let h = self.emit_window_chain(&format!("cfg.move.s2x{i}"), 1, &w, true)?;
            self.internal(anchor.id, h.id);
            psi2.push(self.certify(&h));
        }

        let mut pairs = Vec::new();

        // Interior first windows: scanned letter, control state, left
        // neighbor, in pop order.
        let mut fidx = 0;
        for a in m.tape_alphabet.clone() {
            for q in m.states.clone() {
                for bl in m.tape_alphabet.clone() {
                    let f = [sym(&a), sym(&q), sym(&bl)];
                    let h =
                        self.emit_window_chain(&format!("cfg.move.f3x{fidx}"), 0, &f, false)?;
                    fidx += 1;
                    self.internal(anchor.id, h.id);
                    let phi = self.certify(&h);
                    let licensed: Vec<[SymbolId; 3]> = m
                        .transitions_on(&q, &a)
                        .map(|t| match &t.action {
                            TmAction::Write(c) => [sym(c), sym(&t.to), sym(&bl)],
                            TmAction::Move(Direction::Right) => [sym(&t.to), sym(&a), sym(&bl)],
                            TmAction::Move(Direction::Left) => [sym(&a), sym(&bl), sym(&t.to)],
                        })
                        .collect();
                    for (sidx, s) in seconds3.iter().enumerate() {
                        if !licensed.contains(s) {
                            pairs.push(CtlFormula::and(phi.clone(), psi3[sidx].clone()));
                        }
                    }
                }
            }
        }

        // Boundary first windows: scanned letter, control state, zeta; the
        // head is on the leftmost cell, so a left move is never licensed.
        let mut bidx = 0;
        for a in m.tape_alphabet.clone() {
            for q in m.states.clone() {
                let f = [sym(&a), sym(&q)];
                let h = self.emit_window_chain(&format!("cfg.move.f2x{bidx}"), 0, &f, true)?;
                bidx += 1;
                self.internal(anchor.id, h.id);
                let phi = self.certify(&h);
                let licensed: Vec<[SymbolId; 2]> = m
                    .transitions_on(&q, &a)
                    .filter_map(|t| match &t.action {
                        TmAction::Write(c) => Some([sym(c), sym(&t.to)]),
                        TmAction::Move(Direction::Right) => Some([sym(&t.to), sym(&a)]),
                        TmAction::Move(Direction::Left) => None,
                    })
                    .collect();
                for (sidx, s) in seconds2.iter().enumerate() {
                    if !licensed.contains(s) {
                        pairs.push(CtlFormula::and(phi.clone(), psi2[sidx].clone()));
                    }
                }
            }
        }
        if pairs.is_empty() {
            // Every window rewrite is licensed (a fully permissive table);
            // the branch then never refutes anything.
            pairs.push(CtlFormula::and(
                self.err_atom.clone(),
                CtlFormula::not(self.err_atom.clone()),
            ));
        }
        Ok(pairs)
    }

    /// In-stack machine step: guess a copy of the top configuration on
    /// stack 2, pin it by equality, remove the original, and ask the
    /// cross-stack move fragment about the configuration underneath.
    fn emit_step(
        &mut self,
        m: &TmMachine,
        inner: &StepInner,
    ) -> Result<(H, Arc<CtlFormula>), TmError> {
        let name = |part: &str| format!("cfg.step.{part}");
        let entry = self.state(name("entry"))?;
        // Drain whatever the secondary stack holds before guessing.
        self.pop_each(entry.id, entry.id, 1, &self.all_bits())?;
        self.pop_each(entry.id, entry.id, 1, &self.all_letters())?;
        self.pop(entry.id, entry.id, 1, self.zeta)?;

        let chk = self.state(name("chk"))?;
        let writer =
            emit_config_writer(self.b, m, &self.p, &name("guess"), 1, true, chk.id)?;
        self.states += writer.states;
        self.transitions += writer.transitions;
        self.internal(entry.id, writer.entry);

        // The inner verdicts are read off at chk (and at rcf for the move),
        // so those states fan out to the delegate entries.
        self.internal(chk.id, inner.qvalid2);
        self.internal(chk.id, inner.qeq);
        let rc = self.state(name("rcmove"))?;
        self.internal(chk.id, rc.id);
        self.pop_each(rc.id, rc.id, 0, &self.all_bits())?;
        self.pop_each(rc.id, rc.id, 0, &self.all_letters())?;
        let rcf = self.state(name("rcmovef"))?;
        self.pop(rc.id, rcf.id, 0, self.zeta)?;
        self.internal(rcf.id, inner.qmove);

        let formula = CtlFormula::ex(CtlFormula::and(
            entry.atom.clone(),
            CtlFormula::ef(CtlFormula::and(
                chk.atom.clone(),
                CtlFormula::all(vec![
                    CtlFormula::not(inner.ctlvalid2.clone()),
                    CtlFormula::not(inner.ctleq.clone()),
                    CtlFormula::ex(CtlFormula::and(
                        rc.atom.clone(),
                        CtlFormula::ef(CtlFormula::and(rcf.atom.clone(), inner.ctlmove.clone())),
                    )),
                ]),
            )),
        ));
        Ok((entry, formula))
    }

    /// Certifier for the initial configuration on the compiled input:
    /// blanks from the right end, then the input reversed, then the
    /// initial control state at the bottom cell.
    fn emit_init(&mut self, m: &TmMachine, input: &[String]) -> Result<(H, Arc<CtlFormula>), TmError> {
        let blank = self.b.symbol(StackSymbol::tm_letter(&m.blank));
        let initial = self.b.symbol(StackSymbol::tm_letter(&m.initial));
        let letter = |em: &mut Self, name: &str| em.b.symbol(StackSymbol::tm_letter(name));

        let entry = self.state("cfg.init.entry".into())?;
        self.pop_each(entry.id, entry.id, 0, &self.all_bits())?;
        self.pop(entry.id, entry.id, 0, blank)?;
        let mut cur = entry.id;
        for (j, l) in input.iter().enumerate().rev() {
            let sym = letter(self, l);
            let next = self.state(format!("cfg.init.m{j}"))?;
            self.pop(cur, next.id, 0, sym)?;
            self.pop_each(next.id, next.id, 0, &self.all_bits())?;
            cur = next.id;
        }
        let acc = self.state("cfg.init.accept".into())?;
        self.pop(cur, acc.id, 0, initial)?;
        self.noop(acc.id, self.sinks.win, 0, Guard::Symbol(self.zeta))?;

        let formula = CtlFormula::not(self.certify(&entry));
        Ok((entry, formula))
    }

    /// Certifier for a final control state somewhere in the top word.
    fn emit_final(&mut self) -> Result<(H, Arc<CtlFormula>), TmError> {
        let entry = self.state("cfg.final.entry".into())?;
        self.pop_each(entry.id, entry.id, 0, &self.all_bits())?;
        self.pop_each(entry.id, entry.id, 0, &self.tape_syms.clone())?;
        self.pop_each(entry.id, self.sinks.win, 0, &self.final_syms.clone())?;
        let formula = CtlFormula::not(self.certify(&entry));
        Ok((entry, formula))
    }

    fn size_report(&self, set: &GadgetSet, cwl: u64, m: &TmMachine) -> ConfigSizeReport {
        let counter = set.size_report();
        let w = cwl as usize;
        let l = self.p.encoded_length() as usize;
        let q = m.states.len();
        let g = m.tape_alphabet.len();
        let sigma = q + g;
        let n = self.p.base() as usize;
        let k = usize::from(self.p.level());
        // Per piece: validity 2(L+20), equality sigma+7, move fragments
        // 16+sigma plus 3 states per window chain, step 2W+5, init n+2,
        // final 1, headroom for the anchors.
        let cfg_bound =
            2 * w + 2 * l + 12 * q * g * g + 9 * q * g + 4 * sigma + n + 96;
        let state_bound = counter.state_bound + cfg_bound;
        let per_state = 2 * k + sigma + 4;
        let transition_bound =
            counter.transition_bound + cfg_bound * per_state + 4 * q * g * g + 3 * q * g + 8;
        ConfigSizeReport {
            level: self.p.level(),
            base: self.p.base(),
            cells: self.cells,
            counter_word_len: self.p.encoded_length(),
            config_word_len: cwl,
            letters: sigma,
            states: counter.states + self.states,
            transitions: counter.transitions + self.transitions,
            state_bound,
            transition_bound,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip_machine() -> TmMachine {
        TmMachine {
            states: vec!["s".into(), "t".into()],
            tape_alphabet: vec!["0".into(), "1".into()],
            blank: "0".into(),
            initial: "s".into(),
            finals: vec!["t".into()],
            transitions: vec![crate::TmTransition {
                from: "s".into(),
                read: "1".into(),
                to: "t".into(),
                action: TmAction::Write("0".into()),
            }],
        }
    }

    #[test]
    fn emits_within_the_declared_bounds() {
        for (k, n) in [(1u8, 1u32), (1, 2), (2, 1), (2, 2)] {
            let p = CounterParams::new(k, n).unwrap();
            let lib =
                build_config_gadgets(&flip_machine(), &p, &["1".into()]).unwrap();
            let r = &lib.gadgets.report;
            assert!(
                r.within_bounds(),
                "level {k} base {n}: {} states vs bound {}, {} transitions vs bound {}",
                r.states,
                r.state_bound,
                r.transitions,
                r.transition_bound
            );
            assert_eq!(r.config_word_len, config_word_len(&p).unwrap());
        }
    }

    #[test]
    fn entries_are_distinct_states() {
        let p = CounterParams::new(1, 2).unwrap();
        let lib = build_config_gadgets(&flip_machine(), &p, &["1".into()]).unwrap();
        let mut ids: Vec<u32> = lib.gadgets.entries().iter().map(|s| s.0).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 7);
    }

    #[test]
    fn refuses_unmaterializable_tapes() {
        let p = CounterParams::new(2, 16).unwrap();
        let err = build_config_gadgets(&flip_machine(), &p, &[]).unwrap_err();
        assert!(matches!(err, TmError::TapeTooLarge(_)));
    }
}
