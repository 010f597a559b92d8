//! The bundled toy prefix-free machine.
//!
//! Programs are bit strings read on demand. Every instruction starts with a
//! fixed 4-bit opcode (most significant bit first) followed by self-delimiting
//! operands in shifted Elias-gamma code `γ₀(v) = γ(v + 1)`. The program is
//! exactly the bits consumed when the machine halts, so no halting program is
//! a proper prefix of another: the domain is prefix-free by construction.
//!
//! | opcode | mnemonic | operands            | effect                                   |
//! |--------|----------|---------------------|------------------------------------------|
//! | 0000   | HALT     |                     | stop                                     |
//! | 0001   | LIT      | `γ₀(len)`, len bits | emit the embedded bits                   |
//! | 0010   | SET      | `γ₀(r) γ₀(v)`       | `R[r] = v`                               |
//! | 0011   | INC      | `γ₀(r)`             | `R[r] += 1` (wrapping)                   |
//! | 0100   | DEC      | `γ₀(r)`             | `R[r] -= 1` (saturating at 0)            |
//! | 0101   | OUT      | `γ₀(r)`             | emit `R[r] & 1`                          |
//! | 0110   | BIN      | `γ₀(r)`             | emit the binary numeral of `R[r]`        |
//! | 0111   | FIX      | `γ₀(r) γ₀(w)`       | emit the low `w <= 64` bits of `R[r]`    |
//! | 1000   | JMP      | `γ₀(k)`             | jump to instruction `pc - 1 - k`         |
//! | 1001   | JNZ      | `γ₀(r) γ₀(k)`       | as JMP when `R[r] != 0`                  |
//! | 1010   | CAP      | `γ₀(v)`             | halt as soon as the output has `v` bits  |
//! | 1011   | ADD      | `γ₀(r) γ₀(s)`       | `R[r] += R[s]` (wrapping)                |
//!
//! Opcodes `1100`..`1111`, register indices above 7, backward jumps past the
//! first instruction and gamma codes with more than 63 leading zeros are
//! malformed. Registers start at zero. Each executed instruction costs one
//! step; the budget is checked before the next instruction is fetched.

use alloc::string::String;
use alloc::vec::Vec;

pub const OPCODE_BITS: usize = 4;
pub const REGISTERS: usize = 8;
const MAX_GAMMA_ZEROS: usize = 63;

/// Version tag of the instruction set above.
pub const INSTRUCTION_SET: &str = "toy-prefix/v1";

/// `(output, bits)` overhead of the literal encoding `LIT γ₀(n) σ HALT`
/// beyond `|σ| + γ₀(|σ|)`: two opcodes plus one bit of gamma slack.
pub const LITERAL_OVERHEAD: usize = 2 * OPCODE_BITS + 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instruction {
    Halt,
    Lit(Vec<bool>),
    Set { reg: u8, value: u64 },
    Inc(u8),
    Dec(u8),
    Out(u8),
    Bin(u8),
    Fix { reg: u8, width: u8 },
    Jmp { back: u64 },
    Jnz { reg: u8, back: u64 },
    Cap(u64),
    Add { dst: u8, src: u8 },
}

impl Instruction {
    fn opcode(&self) -> u8 {
        match self {
            Instruction::Halt => 0,
            Instruction::Lit(_) => 1,
            Instruction::Set { .. } => 2,
            Instruction::Inc(_) => 3,
            Instruction::Dec(_) => 4,
            Instruction::Out(_) => 5,
            Instruction::Bin(_) => 6,
            Instruction::Fix { .. } => 7,
            Instruction::Jmp { .. } => 8,
            Instruction::Jnz { .. } => 9,
            Instruction::Cap(_) => 10,
            Instruction::Add { .. } => 11,
        }
    }

    pub fn encode(&self, out: &mut Vec<bool>) {
        let op = self.opcode();
        for shift in (0..OPCODE_BITS).rev() {
            out.push((op >> shift) & 1 == 1);
        }
        match self {
            Instruction::Halt => {}
            Instruction::Lit(bits) => {
                gamma0_encode(bits.len() as u64, out);
                out.extend_from_slice(bits);
            }
            Instruction::Set { reg, value } => {
                gamma0_encode(*reg as u64, out);
                gamma0_encode(*value, out);
            }
            Instruction::Inc(r) | Instruction::Dec(r) | Instruction::Out(r) | Instruction::Bin(r) => {
                gamma0_encode(*r as u64, out)
            }
            Instruction::Fix { reg, width } => {
                gamma0_encode(*reg as u64, out);
                gamma0_encode(*width as u64, out);
            }
            Instruction::Jmp { back } => gamma0_encode(*back, out),
            Instruction::Jnz { reg, back } => {
                gamma0_encode(*reg as u64, out);
                gamma0_encode(*back, out);
            }
            Instruction::Cap(v) => gamma0_encode(*v, out),
            Instruction::Add { dst, src } => {
                gamma0_encode(*dst as u64, out);
                gamma0_encode(*src as u64, out);
            }
        }
    }
}

/// Assembles a program into its bit string.
pub fn assemble(program: &[Instruction]) -> Vec<bool> {
    let mut bits = Vec::new();
    for ins in program {
        ins.encode(&mut bits);
    }
    bits
}

/// Length of `γ₀(v)` in bits.
pub fn gamma0_len(v: u64) -> usize {
    let m = v as u128 + 1;
    let l = 127 - m.leading_zeros() as usize;
    2 * l + 1
}

pub fn gamma0_encode(v: u64, out: &mut Vec<bool>) {
    let m = v as u128 + 1;
    let l = 127 - m.leading_zeros() as usize;
    out.extend(core::iter::repeat_n(false, l));
    for shift in (0..=l).rev() {
        out.push((m >> shift) & 1 == 1);
    }
}

enum Decode<T> {
    Done(T, usize),
    NeedMore,
    Malformed(&'static str),
}

fn gamma0_decode(bits: &[bool], at: usize) -> Decode<u64> {
    let mut zeros = 0;
    loop {
        match bits.get(at + zeros) {
            None => return Decode::NeedMore,
            Some(false) => {
                zeros += 1;
                if zeros > MAX_GAMMA_ZEROS {
                    return Decode::Malformed("gamma code too long");
                }
            }
            Some(true) => break,
        }
    }
    let total = 2 * zeros + 1;
    if bits.len() < at + total {
        return Decode::NeedMore;
    }
    let m = bits[at + zeros..at + total]
        .iter()
        .fold(0u128, |acc, &b| (acc << 1) | b as u128);
    Decode::Done((m - 1) as u64, total)
}

macro_rules! take {
    ($e:expr) => {
        match $e {
            Decode::Done(v, n) => (v, n),
            Decode::NeedMore => return Decode::NeedMore,
            Decode::Malformed(why) => return Decode::Malformed(why),
        }
    };
}

fn register(v: u64) -> Decode<u8> {
    if (v as usize) < REGISTERS {
        Decode::Done(v as u8, 0)
    } else {
        Decode::Malformed("register index out of range")
    }
}

/// Decodes the instruction at bit `at`; `index` is its position in the
/// instruction list (used to validate backward jumps).
fn decode(bits: &[bool], at: usize, index: usize) -> Decode<Instruction> {
    if bits.len() < at + OPCODE_BITS {
        return Decode::NeedMore;
    }
    let op = bits[at..at + OPCODE_BITS]
        .iter()
        .fold(0u8, |acc, &b| (acc << 1) | b as u8);
    let mut pos = at + OPCODE_BITS;
    let operand = |pos: &mut usize| -> Decode<u64> {
        match gamma0_decode(bits, *pos) {
            Decode::Done(v, n) => {
                *pos += n;
                Decode::Done(v, n)
            }
            other => other,
        }
    };
    let jump = |back: u64| -> Decode<u64> {
        if back < index as u64 {
            Decode::Done(back, 0)
        } else {
            Decode::Malformed("jump before the first instruction")
        }
    };
    let ins = match op {
        0 => Instruction::Halt,
        1 => {
            let (len, _) = take!(operand(&mut pos));
            let len = len as usize;
            if bits.len() < pos + len {
                return Decode::NeedMore;
            }
            let data = bits[pos..pos + len].to_vec();
            pos += len;
            Instruction::Lit(data)
        }
        2 => {
            let (r, _) = take!(operand(&mut pos));
            let (reg, _) = take!(register(r));
            let (value, _) = take!(operand(&mut pos));
            Instruction::Set { reg, value }
        }
        3..=6 => {
            let (r, _) = take!(operand(&mut pos));
            let (reg, _) = take!(register(r));
            match op {
                3 => Instruction::Inc(reg),
                4 => Instruction::Dec(reg),
                5 => Instruction::Out(reg),
                _ => Instruction::Bin(reg),
            }
        }
        7 => {
            let (r, _) = take!(operand(&mut pos));
            let (reg, _) = take!(register(r));
            let (w, _) = take!(operand(&mut pos));
            if w > 64 {
                return Decode::Malformed("FIX width above 64");
            }
            Instruction::Fix { reg, width: w as u8 }
        }
        8 => {
            let (k, _) = take!(operand(&mut pos));
            let (back, _) = take!(jump(k));
            Instruction::Jmp { back }
        }
        9 => {
            let (r, _) = take!(operand(&mut pos));
            let (reg, _) = take!(register(r));
            let (k, _) = take!(operand(&mut pos));
            let (back, _) = take!(jump(k));
            Instruction::Jnz { reg, back }
        }
        10 => {
            let (v, _) = take!(operand(&mut pos));
            Instruction::Cap(v)
        }
        11 => {
            let (d, _) = take!(operand(&mut pos));
            let (dst, _) = take!(register(d));
            let (s, _) = take!(operand(&mut pos));
            let (src, _) = take!(register(s));
            Instruction::Add { dst, src }
        }
        _ => return Decode::Malformed("reserved opcode"),
    };
    Decode::Done(ins, pos - at)
}

/// Why the machine stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    /// The next instruction needs a program bit that has not been fed.
    NeedBit,
    Halted,
    Timeout,
    Malformed(&'static str),
}

/// Resumable machine state. Feed bits whenever [`Machine::run`] reports
/// [`Status::NeedBit`].
#[derive(Clone, Debug)]
pub struct Machine {
    program: Vec<bool>,
    decoded_to: usize,
    code: Vec<Instruction>,
    pc: usize,
    regs: [u64; REGISTERS],
    output: Vec<bool>,
    cap: Option<u64>,
    steps: u64,
    max_steps: u64,
    status: Option<Status>,
}

impl Machine {
    pub fn new(max_steps: u64) -> Self {
        Self {
            program: Vec::new(),
            decoded_to: 0,
            code: Vec::new(),
            pc: 0,
            regs: [0; REGISTERS],
            output: Vec::new(),
            cap: None,
            steps: 0,
            max_steps,
            status: None,
        }
    }

    pub fn feed(&mut self, bit: bool) {
        debug_assert!(matches!(self.status, None | Some(Status::NeedBit)));
        self.program.push(bit);
        self.status = None;
    }

    /// Bits consumed so far.
    pub fn program(&self) -> &[bool] {
        &self.program
    }

    pub fn output(&self) -> &[bool] {
        &self.output
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn emit(&mut self, bit: bool) -> bool {
        self.output.push(bit);
        matches!(self.cap, Some(c) if self.output.len() as u64 >= c)
    }

    /// Runs until the machine halts, times out, turns out malformed, or needs
    /// another program bit.
    pub fn run(&mut self) -> Status {
        if let Some(s) = &self.status {
            if *s != Status::NeedBit {
                return s.clone();
            }
        }
        let status = self.run_inner();
        self.status = Some(status.clone());
        status
    }

    fn run_inner(&mut self) -> Status {
        loop {
            if self.steps >= self.max_steps {
                return Status::Timeout;
            }
            if self.pc == self.code.len() {
                match decode(&self.program, self.decoded_to, self.code.len()) {
                    Decode::Done(ins, n) => {
                        self.decoded_to += n;
                        self.code.push(ins);
                    }
                    Decode::NeedMore => return Status::NeedBit,
                    Decode::Malformed(why) => return Status::Malformed(why),
                }
            }
            self.steps += 1;
            let pc = self.pc;
            self.pc += 1;
            // clone is cheap except for LIT; borrow the literal instead
            match &self.code[pc] {
                Instruction::Halt => return Status::Halted,
                Instruction::Lit(bits) => {
                    let room = self
                        .cap
                        .map_or(usize::MAX, |c| (c as usize).saturating_sub(self.output.len()));
                    let take = bits.len().min(room);
                    self.output.extend_from_slice(&bits[..take]);
                    if take == room {
                        return Status::Halted;
                    }
                }
                &Instruction::Set { reg, value } => self.regs[reg as usize] = value,
                &Instruction::Inc(r) => self.regs[r as usize] = self.regs[r as usize].wrapping_add(1),
                &Instruction::Dec(r) => self.regs[r as usize] = self.regs[r as usize].saturating_sub(1),
                &Instruction::Out(r) => {
                    if self.emit(self.regs[r as usize] & 1 == 1) {
                        return Status::Halted;
                    }
                }
                &Instruction::Bin(r) => {
                    let v = self.regs[r as usize];
                    let width = (64 - v.leading_zeros()).max(1);
                    for shift in (0..width).rev() {
                        if self.emit((v >> shift) & 1 == 1) {
                            return Status::Halted;
                        }
                    }
                }
                &Instruction::Fix { reg, width } => {
                    let v = self.regs[reg as usize];
                    for shift in (0..width as u32).rev() {
                        if self.emit((v >> shift) & 1 == 1) {
                            return Status::Halted;
                        }
                    }
                }
                &Instruction::Jmp { back } => self.pc = pc - 1 - back as usize,
                &Instruction::Jnz { reg, back } => {
                    if self.regs[reg as usize] != 0 {
                        self.pc = pc - 1 - back as usize;
                    }
                }
                &Instruction::Cap(v) => {
                    self.cap = Some(v);
                    if self.output.len() as u64 >= v {
                        self.output.truncate(v as usize);
                        return Status::Halted;
                    }
                }
                &Instruction::Add { dst, src } => {
                    self.regs[dst as usize] = self.regs[dst as usize].wrapping_add(self.regs[src as usize])
                }
            }
        }
    }
}

/// Result of running a finite program tape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted {
        output: Vec<bool>,
        bits_consumed: usize,
        steps: u64,
    },
    Timeout {
        bits_consumed: usize,
        steps: u64,
    },
    /// Invalid encoding, or the tape ran out before the machine halted.
    Malformed {
        reason: String,
        bits_consumed: usize,
    },
}

/// Runs `program_bits` with a step budget. Only the bits the machine asks for
/// are consumed; trailing bits are ignored.
pub fn run_machine(program_bits: &[bool], max_steps: u64) -> RunOutcome {
    let mut m = Machine::new(max_steps);
    let mut next = 0;
    loop {
        match m.run() {
            Status::NeedBit => {
                if next == program_bits.len() {
                    return RunOutcome::Malformed {
                        reason: "program tape exhausted".into(),
                        bits_consumed: next,
                    };
                }
                m.feed(program_bits[next]);
                next += 1;
            }
            Status::Halted => {
                return RunOutcome::Halted {
                    output: m.output,
                    bits_consumed: next,
                    steps: m.steps,
                }
            }
            Status::Timeout => {
                return RunOutcome::Timeout {
                    bits_consumed: next,
                    steps: m.steps,
                }
            }
            Status::Malformed(why) => {
                return RunOutcome::Malformed {
                    reason: why.into(),
                    bits_consumed: next,
                }
            }
        }
    }
}

/// What the enumerator does with each resolved node.
pub trait Explorer {
    fn halted(&mut self, machine: &Machine);
    fn timed_out(&mut self, _machine: &Machine) {}
    /// Called at every point where the machine asks for a bit; returning
    /// `false` drops the whole subtree.
    fn keep_exploring(&mut self, _machine: &Machine) -> bool {
        true
    }
}

/// Depth-first enumeration of all programs of at most `max_len` bits that
/// start with `prefix`. Branches are visited 0 before 1, so programs arrive in
/// lexicographic order. Returns the number of partial programs cut off at
/// `max_len`.
pub fn enumerate<E: Explorer>(prefix: &[bool], max_len: usize, max_steps: u64, explorer: &mut E) -> u64 {
    let mut root = Machine::new(max_steps);
    let mut stack: Vec<Machine> = Vec::new();
    let mut truncated = 0;
    // A run that stops before consuming the whole prefix is shared by every
    // prefix extending its tape; only the extension padded with zeros reports it.
    for (i, &b) in prefix.iter().enumerate() {
        match root.run() {
            Status::NeedBit => root.feed(b),
            status => {
                if prefix[i..].iter().all(|&x| !x) {
                    match status {
                        Status::Halted => explorer.halted(&root),
                        Status::Timeout => explorer.timed_out(&root),
                        _ => {}
                    }
                }
                return 0;
            }
        }
    }
    stack.push(root);
    while let Some(mut m) = stack.pop() {
        match m.run() {
            Status::NeedBit => {
                if m.program().len() >= max_len {
                    truncated += 1;
                    continue;
                }
                if !explorer.keep_exploring(&m) {
                    continue;
                }
                let mut one = m.clone();
                one.feed(true);
                m.feed(false);
                stack.push(one);
                stack.push(m);
            }
            Status::Halted => explorer.halted(&m),
            Status::Timeout => explorer.timed_out(&m),
            Status::Malformed(_) => {}
        }
    }
    truncated
}

/// Ready-made witness programs.
pub mod programs {
    use super::Instruction::{self, *};
    use alloc::vec;
    use alloc::vec::Vec;

    /// `LIT σ; HALT`.
    pub fn literal(bits: &[bool]) -> Vec<Instruction> {
        vec![Lit(bits.to_vec()), Halt]
    }

    /// `n` zeros via an `OUT` loop under a cap.
    pub fn zeros(n: u64) -> Vec<Instruction> {
        vec![Cap(n), Out(0), Jmp { back: 0 }]
    }

    /// `pre` followed by `period` repeated, cut at `n` bits.
    pub fn eventually_periodic(pre: &[bool], period: &[bool], n: u64) -> Vec<Instruction> {
        let mut p = vec![Cap(n)];
        if !pre.is_empty() {
            p.push(Lit(pre.to_vec()));
        }
        p.push(Lit(period.to_vec()));
        p.push(Jmp { back: 0 });
        p
    }

    /// First `n` bits of the binary Champernowne sequence.
    pub fn champernowne(n: u64) -> Vec<Instruction> {
        vec![Cap(n), Bin(0), Inc(0), Jmp { back: 1 }]
    }

    /// Concatenated `width`-bit numerals `0, 1, 2, ...`, cut at `n` bits.
    pub fn counter(width: u8, n: u64) -> Vec<Instruction> {
        vec![Cap(n), Fix { reg: 0, width }, Inc(0), Jmp { back: 1 }]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn text(b: &[bool]) -> String {
        b.iter().map(|&x| if x { '1' } else { '0' }).collect()
    }

    #[test]
    fn gamma_round_trip_lengths() {
        for v in [0u64, 1, 2, 3, 7, 8, 1000, u64::MAX - 1] {
            let mut out = Vec::new();
            gamma0_encode(v, &mut out);
            assert_eq!(out.len(), gamma0_len(v));
            match gamma0_decode(&out, 0) {
                Decode::Done(d, n) => assert_eq!((d, n), (v, out.len())),
                _ => panic!("decode failed for {v}"),
            }
        }
        assert_eq!(gamma0_len(0), 1);
        assert_eq!(gamma0_len(30), 9);
    }

    #[test]
    fn halt_alone() {
        assert_eq!(
            run_machine(&bits("0000"), 10),
            RunOutcome::Halted {
                output: vec![],
                bits_consumed: 4,
                steps: 1
            }
        );
    }

    #[test]
    fn zero_budget_times_out() {
        assert!(matches!(run_machine(&bits("0000"), 0), RunOutcome::Timeout { .. }));
    }

    #[test]
    fn zeros_program() {
        let p = assemble(&programs::zeros(4));
        match run_machine(&p, 10_000) {
            RunOutcome::Halted {
                output, bits_consumed, ..
            } => {
                assert_eq!(text(&output), "0000");
                assert_eq!(bits_consumed, p.len());
            }
            other => panic!("{other:?}"),
        }
        // CAP γ₀(4) | OUT γ₀(0) | JMP γ₀(0)
        assert_eq!(text(&p), "1010001010101110001");
    }

    #[test]
    fn trailing_bits_are_not_consumed() {
        let mut p = bits("0000");
        p.extend(bits("1111"));
        match run_machine(&p, 10) {
            RunOutcome::Halted { bits_consumed, .. } => assert_eq!(bits_consumed, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_cases() {
        assert!(matches!(run_machine(&bits("1111"), 10), RunOutcome::Malformed { .. }));
        // JMP at instruction 0
        assert!(matches!(run_machine(&bits("10001"), 10), RunOutcome::Malformed { .. }));
        // register 8
        let mut p = bits("0011");
        gamma0_encode(8, &mut p);
        assert!(matches!(run_machine(&p, 10), RunOutcome::Malformed { .. }));
        // tape exhausted
        assert!(matches!(run_machine(&bits("00"), 10), RunOutcome::Malformed { .. }));
    }

    #[test]
    fn generator_programs_reproduce_targets() {
        let run = |p: &[Instruction]| match run_machine(&assemble(p), 1_000_000) {
            RunOutcome::Halted { output, .. } => text(&output),
            other => panic!("{other:?}"),
        };
        assert_eq!(run(&programs::champernowne(8)), "01101110");
        assert_eq!(run(&programs::counter(2, 8)), "00011011");
        assert_eq!(
            run(&programs::eventually_periodic(&bits("1"), &bits("01"), 6)),
            "101010"
        );
        assert_eq!(run(&programs::eventually_periodic(&[], &bits("1"), 5)), "11111");
        assert_eq!(run(&programs::literal(&bits("10110"))), "10110");
        assert_eq!(run(&programs::champernowne(0)), "");
        // SET/DEC/JNZ countdown and ADD
        let p = [
            Instruction::Set { reg: 1, value: 3 },
            Instruction::Set { reg: 2, value: 2 },
            Instruction::Add { dst: 2, src: 1 },
            Instruction::Bin(2),
            Instruction::Dec(1),
            Instruction::Jnz { reg: 1, back: 2 },
            Instruction::Halt,
        ];
        // R2 = 5, 7, 8
        assert_eq!(run(&p), "1011111000");
    }

    #[test]
    fn literal_overhead_matches_layout() {
        for n in [0usize, 1, 5, 20, 100] {
            let sigma = vec![true; n];
            let len = assemble(&programs::literal(&sigma)).len();
            assert_eq!(len, n + gamma0_len(n as u64) + 2 * OPCODE_BITS);
            assert!(len <= n + 2 * ceil_log2(n as u64 + 1) + LITERAL_OVERHEAD);
        }
    }

    pub(crate) fn ceil_log2(x: u64) -> usize {
        if x <= 1 {
            0
        } else {
            64 - (x - 1).leading_zeros() as usize
        }
    }

    struct Collect(Vec<Vec<bool>>);
    impl Explorer for Collect {
        fn halted(&mut self, m: &Machine) {
            self.0.push(m.program().to_vec());
        }
    }

    #[test]
    fn enumeration_domain_is_prefix_free() {
        let mut c = Collect(Vec::new());
        enumerate(&[], 12, 500, &mut c);
        assert!(c.0.contains(&bits("0000")));
        for (i, a) in c.0.iter().enumerate() {
            for (j, b) in c.0.iter().enumerate() {
                if i != j {
                    assert!(!(b.len() > a.len() && b.starts_with(a)), "{a:?} prefixes {b:?}");
                }
            }
            // witness: running the consumed bits alone reproduces a halt
            assert!(
                matches!(run_machine(a, 500), RunOutcome::Halted { bits_consumed, .. } if bits_consumed == a.len())
            );
        }
    }

    #[test]
    fn prefix_partition_matches_full_enumeration() {
        let mut full = Collect(Vec::new());
        enumerate(&[], 11, 300, &mut full);
        let mut parts = Vec::new();
        for p in 0..8u8 {
            let prefix = [(p >> 2) & 1 == 1, (p >> 1) & 1 == 1, p & 1 == 1];
            let mut c = Collect(Vec::new());
            enumerate(&prefix, 11, 300, &mut c);
            parts.extend(c.0);
        }
        parts.sort();
        let mut f = full.0.clone();
        f.sort();
        assert_eq!(parts, f);
    }
}
