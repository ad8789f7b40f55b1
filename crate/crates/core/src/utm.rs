//! A universal Turing machine over `{0, 1, blank}`, built from named states.
//!
//! Input convention: the tape holds the target's program (see
//! [`program_tape`]), one blank, then the target input `m`. The universal
//! machine rewrites `m` into three-cell units, interprets the program one
//! target step at a time, and on halting erases the program and compacts the
//! units back into plain symbols, so its rendered tape equals the target's.
//!
//! Tape layout while simulating:
//!
//! ```text
//! _ [program: (mark,bit) pairs] _ ... _ [unit][unit]...[unit] _
//! ```
//!
//! A unit is `[head][x][y]`: `head = 1` on the simulated head cell, and
//! `xy` = `00` (0), `01` (1), `10` (blank). Units are never physically blank.
//!
//! The program is a list of blocks, one per running state. A block is a
//! header cell (bit 1 marks the current state) followed by three entries, for
//! reads 0, 1 and blank. An entry is six flag cells (present, halts, write
//! high/low, move high/low), the next state's block index in unary, and a
//! 0 terminator.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{validation, Result};
use crate::machine::{Move, StateId, Symbol};
use crate::tm::{TmAction, TmDescription};

use Move::{Left as L, Right as R, Stay as S};
use Symbol::{Blank as B, One as I, Zero as O};

const BITS: [Symbol; 2] = [O, I];
const ANY: [Symbol; 3] = [O, I, B];

struct Builder {
    names: Vec<String>,
    index: BTreeMap<String, StateId>,
    rules: BTreeMap<(StateId, Symbol), TmAction>,
}

impl Builder {
    fn new() -> Self {
        let mut b = Self { names: Vec::new(), index: BTreeMap::new(), rules: BTreeMap::new() };
        b.state("init");
        b.state("halt");
        b
    }

    fn state(&mut self, name: &str) -> StateId {
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = self.names.len() as StateId;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), s);
        s
    }

    fn on(&mut self, from: &str, read: Symbol, write: Symbol, mv: Move, to: &str) {
        let (q, next) = (self.state(from), self.state(to));
        let prev = self.rules.insert((q, read), TmAction { write, mv, next });
        debug_assert!(prev.is_none(), "duplicate rule for {from} on {read:?}");
    }

    fn keep(&mut self, from: &str, reads: &[Symbol], mv: Move, to: &str) {
        for &r in reads {
            self.on(from, r, r, mv, to);
        }
    }

    /// Moves `n` cells right without looking, ending in `to`.
    fn skip(&mut self, tag: &str, n: usize, to: &str) -> String {
        if n == 0 {
            return to.to_string();
        }
        for i in 0..n {
            let next = if i + 1 == n { to.to_string() } else { format!("{tag}+{}", i + 1) };
            self.keep(&format!("{tag}+{i}"), &ANY, R, &next);
        }
        format!("{tag}+0")
    }

    /// From the mark cell of an entry, moves to the mark cell just after it.
    fn skip_entry(&mut self, tag: &str, to: &str) -> String {
        let unary = format!("{tag}.u");
        let start = self.skip(tag, 12, &unary);
        let bit = format!("{tag}.ub");
        self.keep(&unary, &ANY, R, &bit);
        self.keep(&bit, &[I], R, &unary);
        self.keep(&bit, &[O], R, to);
        start
    }

    fn skip_entries(&mut self, tag: &str, n: usize, to: &str) -> String {
        let mut next = to.to_string();
        for i in (0..n).rev() {
            next = self.skip_entry(&format!("{tag}#{i}"), &next);
        }
        next
    }

    /// Scans left over the program to home (program cell 0), then `to`.
    fn home_in_program(&mut self, tag: &str, to: &str) -> String {
        self.keep(tag, &BITS, L, tag);
        self.keep(tag, &[B], R, to);
        tag.to_string()
    }

    /// From inside the data region, scans left to home, then `to`.
    fn home_from_data(&mut self, tag: &str, to: &str) -> String {
        let gap = format!("{tag}.gap");
        let prog = format!("{tag}.prog");
        self.keep(tag, &BITS, L, tag);
        self.keep(tag, &[B], L, &gap);
        self.keep(&gap, &[B], L, &gap);
        self.keep(&gap, &BITS, L, &prog);
        self.home_in_program(&prog, to);
        tag.to_string()
    }

    fn finish(self) -> TmDescription {
        TmDescription { names: self.names, initial: 0, halt: 1, rules: self.rules }
    }
}

fn sym_tag(s: Symbol) -> char {
    s.as_char()
}

fn sym_xy(s: Symbol) -> (Symbol, Symbol) {
    match s {
        O => (O, O),
        I => (O, I),
        B => (I, O),
    }
}

fn move_tag(m: Move) -> char {
    match m {
        L => 'L',
        S => 'S',
        R => 'R',
    }
}

fn expansion(b: &mut Builder) {
    b.keep("init", &BITS, R, "init");
    b.keep("init", &[B], R, "exp.first");
    // Empty input: a single blank unit carrying the head.
    b.on("exp.first", B, I, R, "exp.empty.x");
    b.on("exp.empty.x", B, I, R, "exp.empty.y");
    b.on("exp.empty.y", B, O, L, "exp.home");
    for bit in BITS {
        let c = sym_tag(bit);
        b.on("exp.first", bit, B, R, &format!("exp.plain{c}"));
        b.on("exp.take", bit, B, R, &format!("exp.plain{c}"));
        b.keep(&format!("exp.plain{c}"), &BITS, R, &format!("exp.plain{c}"));
        b.keep(&format!("exp.plain{c}"), &[B], R, &format!("exp.sep{c}"));
        // No units yet: the first one carries the head.
        b.on(&format!("exp.sep{c}"), B, I, R, &format!("exp.x{c}"));
        b.keep(&format!("exp.sep{c}"), &BITS, R, &format!("exp.units{c}"));
        b.keep(&format!("exp.units{c}"), &BITS, R, &format!("exp.units{c}"));
        b.on(&format!("exp.units{c}"), B, O, R, &format!("exp.x{c}"));
        let (x, y) = sym_xy(bit);
        b.on(&format!("exp.x{c}"), B, x, R, &format!("exp.y{c}"));
        b.on(&format!("exp.y{c}"), B, y, L, "exp.back");
    }
    b.keep("exp.back", &BITS, L, "exp.back");
    b.keep("exp.back", &[B], L, "exp.back.sep");
    b.keep("exp.back.sep", &BITS, L, "exp.back.plain");
    b.keep("exp.back.sep", &[B], L, "exp.seek");
    b.keep("exp.back.plain", &BITS, L, "exp.back.plain");
    b.keep("exp.back.plain", &[B], R, "exp.take");
    b.home_from_data("exp.home", "cycle");
    b.keep("exp.seek", &[B], L, "exp.seek");
    b.keep("exp.seek", &BITS, L, "exp.seek.prog");
    b.home_in_program("exp.seek.prog", "cycle");
}

/// Finds the head unit, reads its symbol and selects the matching entry.
fn fetch(b: &mut Builder) {
    b.keep("cycle", &BITS, R, "cycle");
    b.keep("cycle", &[B], R, "c.gap");
    b.keep("c.gap", &[B], R, "c.gap");
    b.keep("c.gap", &BITS, S, "c.unit");
    b.keep("c.unit", &[I], R, "c.x");
    b.keep("c.unit", &[O], R, "c.skip1");
    b.keep("c.skip1", &ANY, R, "c.skip2");
    b.keep("c.skip2", &ANY, R, "c.unit");
    b.keep("c.x", &[O], R, "c.y0");
    b.keep("c.x", &[I], R, "c.y1");
    b.keep("c.y0", &[O], L, "gh0");
    b.keep("c.y0", &[I], L, "gh1");
    b.keep("c.y1", &[O], L, "gh_");
    for (i, s) in ANY.into_iter().enumerate() {
        let c = sym_tag(s);
        let found = format!("fb{c}");
        b.home_from_data(&format!("gh{c}"), &found);
        // Walk blocks until the current one, clearing its header bit.
        let bit = format!("fb{c}.bit");
        b.keep(&found, &ANY, R, &bit);
        let skip_block = b.skip_entries(&format!("fb{c}.skip"), 3, &found);
        b.keep(&bit, &[O], R, &skip_block);
        let mark = format!("sel{c}.mark");
        let sel = b.skip_entries(&format!("sel{c}"), i, &mark);
        b.on(&bit, I, O, R, &sel);
        b.on(&mark, O, I, R, "rd.p");
    }
}

/// Reads the selected entry's flags and applies the action to the data.
fn execute(b: &mut Builder) {
    b.keep("rd.p", &[O], R, "miss");
    b.keep("rd.p", &[I], R, "rd.h.m");
    b.keep("rd.h.m", &ANY, R, "rd.h");
    // Accumulate the remaining five flag bits into the state name.
    let mut frontier = Vec::new();
    for h in BITS {
        let name = format!("rd.{}", sym_tag(h));
        b.keep("rd.h", &[h], R, &format!("{name}.m"));
        frontier.push(name);
    }
    for _ in 0..4 {
        let mut next = Vec::new();
        for name in frontier {
            b.keep(&format!("{name}.m"), &ANY, R, &name);
            for bit in BITS {
                let n = format!("{name}{}", sym_tag(bit));
                b.keep(&name, &[bit], R, &format!("{n}.m"));
                next.push(n);
            }
        }
        frontier = next;
    }
    for name in frontier {
        // name = "rd.<h><w1><w2><m1><m2>"
        let f: Vec<char> = name[3..].chars().collect();
        let halts = f[0] == '1';
        let w = match (f[1], f[2]) {
            ('0', '0') => O,
            ('0', '1') => I,
            ('1', '0') => B,
            _ => continue,
        };
        let mv = match (f[3], f[4]) {
            ('0', '0') => L,
            ('0', '1') => S,
            ('1', '0') => R,
            _ => continue,
        };
        let tag = format!("ap{}{}{}", f[0], sym_tag(w), move_tag(mv));
        b.keep(&format!("{name}.m"), &ANY, S, &tag);
        let gap = format!("{tag}.gap");
        let unit = format!("{tag}.unit");
        b.keep(&tag, &BITS, R, &tag);
        b.keep(&tag, &[B], R, &gap);
        b.keep(&gap, &[B], R, &gap);
        b.keep(&gap, &BITS, S, &unit);
        let (s1, s2) = (format!("{tag}.s1"), format!("{tag}.s2"));
        b.keep(&unit, &[O], R, &s1);
        b.keep(&s1, &ANY, R, &s2);
        b.keep(&s2, &ANY, R, &unit);
        let (wx, wy) = (format!("{tag}.wx"), format!("{tag}.wy"));
        b.on(&unit, I, O, R, &wx);
        let (x, y) = sym_xy(w);
        for r in ANY {
            b.on(&wx, r, x, R, &wy);
        }
        let after = if halts { "dec.home".to_string() } else { format!("mv{}", move_tag(mv)) };
        for r in ANY {
            b.on(&wy, r, y, L, &after);
        }
    }
    b.keep("miss", &ANY, R, "miss.go");
    b.keep("miss.go", &BITS, R, "miss.go");
    b.keep("miss.go", &[B], R, "miss.gap");
    b.keep("miss.gap", &[B], R, "miss.gap");
    b.keep("miss.gap", &BITS, S, "miss.unit");
    b.keep("miss.unit", &[O], R, "miss.s1");
    b.keep("miss.s1", &ANY, R, "miss.s2");
    b.keep("miss.s2", &ANY, R, "miss.unit");
    b.on("miss.unit", I, O, L, "dec.home");
    b.home_from_data("dec.home", "dec");

    // Moves start on the x cell of the old head unit.
    b.keep("mvS", &ANY, L, "mvS.m");
    b.on("mvS.m", O, I, L, "done");
    b.keep("mvR", &ANY, R, "mvR.y");
    b.keep("mvR.y", &ANY, R, "mvR.next");
    b.on("mvR.next", O, I, L, "done");
    b.on("mvR.next", B, I, R, "mvR.x");
    b.on("mvR.x", B, I, R, "mvR.yy");
    b.on("mvR.yy", B, O, L, "done");
    b.keep("mvL", &ANY, L, "mvL.m");
    b.keep("mvL.m", &ANY, L, "mvL.prev");
    b.keep("mvL.prev", &BITS, L, "mvL.px");
    b.keep("mvL.px", &ANY, L, "mvL.pm");
    b.on("mvL.pm", O, I, L, "done");
    // Left edge: shift the data region right by three cells.
    b.keep("mvL.prev", &[B], S, "sh1");
    for k in 1..=3 {
        let start = format!("sh{k}");
        let back = format!("sh{k}.back");
        b.keep(&start, &[B], R, &format!("sh{k}.c_"));
        for c in ANY {
            let carry = format!("sh{k}.c{}", sym_tag(c));
            for d in BITS {
                b.on(&carry, d, c, R, &format!("sh{k}.c{}", sym_tag(d)));
            }
            if c != B {
                b.on(&carry, B, c, L, &back);
            }
        }
        b.keep(&back, &BITS, L, &back);
        let next = if k < 3 { format!("sh{}", k + 1) } else { "sh.y".to_string() };
        b.keep(&back, &[B], S, &next);
    }
    b.on("sh.y", B, O, L, "sh.x");
    b.on("sh.x", B, I, L, "sh.m");
    b.on("sh.m", B, I, S, "done");
    b.home_from_data("done", "count");
}

/// Points the current-state header at the block named by the selected
/// entry's unary index, then unmarks the entry.
fn count(b: &mut Builder) {
    b.keep("count", &ANY, R, "count.set");
    b.on("count.set", O, I, L, "cnt");
    b.on("count.set", I, I, L, "cnt");
    // Find the marked entry.
    b.keep("cnt", &[O], R, "cnt.bit");
    b.keep("cnt.bit", &ANY, R, "cnt");
    let unary = b.skip("cnt.p", 11, "cnt.u");
    b.keep("cnt", &[I], R, &unary);
    b.keep("cnt.u", &[I], R, "cnt.u.skip");
    b.keep("cnt.u.skip", &ANY, R, "cnt.u");
    b.keep("cnt.u", &[O], R, "cnt.ub");
    b.keep("cnt.ub", &[I], L, "cnt.consume");
    b.on("cnt.consume", O, I, L, "cnt.home");
    b.keep("cnt.ub", &[O], L, "clean.home");
    b.home_in_program("cnt.home", "adv");
    // Advance the header bit by one block.
    b.keep("adv", &ANY, R, "adv.bit");
    let skip = b.skip_entries("adv.skip", 3, "adv");
    b.keep("adv.bit", &[O], R, &skip);
    let shift = b.skip_entries("adv.move", 3, "adv.next");
    b.on("adv.bit", I, O, R, &shift);
    b.keep("adv.next", &ANY, R, "adv.set");
    b.on("adv.set", O, I, L, "adv.home");
    b.home_in_program("adv.home", "cnt");
    // Clear the marks on the entry and its consumed unary cells.
    b.home_in_program("clean.home", "clean");
    b.keep("clean", &[O], R, "clean.bit");
    b.keep("clean.bit", &ANY, R, "clean");
    let unary = b.skip("clean.p", 11, "clean.u");
    b.on("clean", I, O, R, &unary);
    b.on("clean.u", I, O, R, "clean.u.skip");
    b.keep("clean.u.skip", &ANY, R, "clean.u");
    b.keep("clean.u", &[O], L, "clean.done");
    b.home_in_program("clean.done", "cycle");
}

/// Erases the program and compacts the units into plain symbols.
fn decode(b: &mut Builder) {
    b.on("dec", O, B, R, "dec");
    b.on("dec", I, B, R, "dec");
    b.keep("dec", &[B], R, "dec.gap");
    b.keep("dec.gap", &[B], R, "dec.gap");
    b.keep("dec.gap", &BITS, L, "k.front");
    b.keep("k.front", &[B], R, "k.scan");
    b.keep("k.scan", &[I], R, "k.scan");
    b.keep("k.scan", &[O], R, "k.x");
    b.keep("k.scan", &[B], L, "k.erase");
    b.keep("k.x", &[O], R, "k.y0");
    b.keep("k.x", &[I], R, "k.y1");
    b.on("k.y0", O, I, L, "k.wx0");
    b.on("k.y0", I, I, L, "k.wx1");
    b.on("k.y1", O, I, L, "k.wx_");
    for s in ANY {
        let c = sym_tag(s);
        b.on(&format!("k.wx{c}"), O, I, L, &format!("k.wm{c}"));
        b.on(&format!("k.wx{c}"), I, I, L, &format!("k.wm{c}"));
        b.on(&format!("k.wm{c}"), O, I, L, &format!("k.back{c}"));
        b.keep(&format!("k.back{c}"), &[I], L, &format!("k.back{c}"));
        b.on(&format!("k.back{c}"), B, s, R, "k.newfront");
    }
    b.on("k.newfront", I, B, R, "k.scan");
    b.on("k.erase", I, B, L, "k.erase");
    b.keep("k.erase", &[B], S, "halt");
}

/// The universal machine. Its input is [`utm_input`].
pub fn textbook_utm() -> TmDescription {
    let mut b = Builder::new();
    expansion(&mut b);
    fetch(&mut b);
    execute(&mut b);
    count(&mut b);
    decode(&mut b);
    b.finish()
}

/// Program encoding of `target` as read by [`textbook_utm`].
pub fn program_tape(target: &TmDescription) -> String {
    let running: Vec<StateId> = (0..target.names.len() as StateId).filter(|&q| q != target.halt).collect();
    let block = |q: StateId| running.iter().position(|&r| r == q).unwrap_or(0);
    let mut cells: Vec<bool> = Vec::new();
    for &q in &running {
        cells.push(q == target.initial);
        for s in ANY {
            match target.rules.get(&(q, s)) {
                None => cells.extend([false; 6]),
                Some(a) => {
                    let halts = a.next == target.halt;
                    let w = match a.write {
                        O => [false, false],
                        I => [false, true],
                        B => [true, false],
                    };
                    let m = match a.mv {
                        L => [false, false],
                        S => [false, true],
                        R => [true, false],
                    };
                    cells.extend([true, halts, w[0], w[1], m[0], m[1]]);
                    if !halts {
                        cells.extend(core::iter::repeat_n(true, block(a.next)));
                    }
                }
            }
            cells.push(false);
        }
    }
    cells.iter().map(|&bit| if bit { "01" } else { "00" }).collect()
}

/// Tape for running `target` on `m` under [`textbook_utm`].
pub fn utm_input(target: &TmDescription, m: &str) -> Result<String> {
    if !m.chars().all(|c| c == '0' || c == '1') {
        return Err(validation("universal machine inputs are bit strings"));
    }
    Ok(format!("{}_{m}", program_tape(target)))
}
