//! Hash-consed stack words.
//!
//! Every distinct stack content is one cons cell `(parent, top)`; pushing is
//! an interning lookup and popping is a parent-pointer read, both O(1). The
//! explorer and the game builder key millions of nodes on these ids, so the
//! per-word cost must not depend on stack height.

use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use crate::config::StackWord;
use crate::system::{MpdsSystem, SymbolId, BOTTOM};

/// Id of an interned stack word. Id 0 is always the empty stack.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StackId(pub u32);

/// The empty (bottom-only) stack.
pub const EMPTY_STACK: StackId = StackId(0);

const NO_PARENT: u32 = u32::MAX;

pub struct StackInterner {
    cells: IndexSet<(u32, SymbolId), FxBuildHasher>,
    heights: Vec<u32>,
}

impl StackInterner {
    pub fn new() -> Self {
        let mut cells = IndexSet::default();
        cells.insert((NO_PARENT, BOTTOM));
        StackInterner { cells, heights: vec![0] }
    }

    /// Number of distinct words seen so far.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the empty stack is always present
    }

    pub fn push(&mut self, word: StackId, sym: SymbolId) -> StackId {
        debug_assert_ne!(sym, BOTTOM, "bottom is never pushed");
        let (idx, inserted) = self.cells.insert_full((word.0, sym));
        if inserted {
            self.heights.push(self.heights[word.0 as usize] + 1);
        }
        StackId(idx as u32)
    }

    /// Top symbol; `BOTTOM` exactly for the empty stack.
    pub fn top(&self, word: StackId) -> SymbolId {
        self.cells.get_index(word.0 as usize).expect("live id").1
    }

    /// The word below the top symbol; `None` for the empty stack.
    pub fn pop(&self, word: StackId) -> Option<StackId> {
        let &(parent, _) = self.cells.get_index(word.0 as usize).expect("live id");
        if parent == NO_PARENT {
            None
        } else {
            Some(StackId(parent))
        }
    }

    /// Number of non-bottom symbols.
    pub fn height(&self, word: StackId) -> u32 {
        self.heights[word.0 as usize]
    }

    /// Interns an explicit word.
    pub fn intern(&mut self, word: &StackWord, sys: &MpdsSystem) -> StackId {
        let mut id = EMPTY_STACK;
        // Walk bottom-up, i.e. reverse of top-first.
        let symbols: Vec<SymbolId> = word
            .prefix_top_first()
            .map(|s| sys.symbol_id(s).expect("word symbols belong to the system"))
            .collect();
        for &sym in symbols.iter().rev() {
            id = self.push(id, sym);
        }
        id
    }

    /// Expands an id back into an explicit word.
    pub fn materialize(&self, word: StackId, sys: &MpdsSystem) -> StackWord {
        let mut symbols = Vec::with_capacity(self.height(word) as usize + 1);
        let mut cursor = word;
        while let Some(parent) = self.pop(cursor) {
            symbols.push(sys.symbol(self.top(cursor)).clone());
            cursor = parent;
        }
        symbols.push(crate::symbol::StackSymbol::Bottom);
        StackWord::from_top_first(symbols).expect("interned words are well-formed")
    }
}

impl Default for StackInterner {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::StackSymbol;
    use crate::system::SystemBuilder;

    fn sys_with_symbols() -> MpdsSystem {
        let mut b = SystemBuilder::new(1);
        let q = b.fresh_state("q").unwrap();
        b.set_initial(q);
        b.symbol(StackSymbol::named("x"));
        b.symbol(StackSymbol::named("y"));
        b.build().unwrap()
    }

    #[test]
    fn push_pop_round_trip() {
        let sys = sys_with_symbols();
        let x = sys.symbol_id(&StackSymbol::named("x")).unwrap();
        let y = sys.symbol_id(&StackSymbol::named("y")).unwrap();
        let mut interner = StackInterner::new();
        let w1 = interner.push(EMPTY_STACK, x);
        let w2 = interner.push(w1, y);
        assert_eq!(interner.top(w2), y);
        assert_eq!(interner.pop(w2), Some(w1));
        assert_eq!(interner.pop(w1), Some(EMPTY_STACK));
        assert_eq!(interner.pop(EMPTY_STACK), None);
        assert_eq!(interner.height(w2), 2);
    }

    #[test]
    fn interning_is_canonical() {
        let sys = sys_with_symbols();
        let x = sys.symbol_id(&StackSymbol::named("x")).unwrap();
        let mut interner = StackInterner::new();
        let a = interner.push(EMPTY_STACK, x);
        let b = interner.push(EMPTY_STACK, x);
        assert_eq!(a, b);
        assert_eq!(interner.len(), 2);
    }

    #[test]
    fn materialize_inverts_intern() {
        let sys = sys_with_symbols();
        let word = StackWord::from_prefix(vec![
            StackSymbol::named("y"),
            StackSymbol::named("x"),
            StackSymbol::named("x"),
        ])
        .unwrap();
        let mut interner = StackInterner::new();
        let id = interner.intern(&word, &sys);
        assert_eq!(interner.materialize(id, &sys), word);
        assert_eq!(interner.height(id), 3);
    }
}
