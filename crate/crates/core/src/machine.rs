//! A reversible pointer machine that condenses classical-payload codewords,
//! and the coherent branch operator used to steer it.
//!
//! # Cycle accounting
//!
//! Every pointer or counter update, every controlled-not between a register
//! and the tape, and every test of a codeword or register-count condition
//! costs one cycle. Tests for a pointer being zero (the loop-entry joins of
//! the copy phase and the loop exits of the uncopy phase) are checked at no
//! cost. One delay iteration (counter step plus its clock test) is one
//! cycle. Copying a register holding a length-`l` word therefore takes
//! `4l + 2` cycles, and the uncopy phase mirrors the copy phase cycle for
//! cycle, so every run halts at exactly `2D`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bits::{BitString, MAX_WIDTH};
use crate::codes::ClassicalCode;
use crate::error::{Error, Result};
use crate::qstate::{max_abs, SparseState};

/// Cap on enumerated input tuples for the exhaustive checks.
pub const MAX_ENUMERATED_TUPLES: usize = 4096;

/// Tolerance for unitarity and projector checks.
pub const OPERATOR_TOLERANCE: f64 = 1e-10;

/// Full configuration of the machine.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineState {
    /// Register contents, `l_max` bits each (bit 1 is the leftmost).
    pub registers: Vec<BitString>,
    pub tape: BitString,
    pub counter: u64,
    /// Register pointer r (0 = none selected).
    pub r: usize,
    /// Qubit pointers q_1..q_N.
    pub q: Vec<usize>,
    /// Tape pointer p.
    pub p: usize,
    pub clock: u64,
}

impl MachineState {
    /// Registers loaded with `inputs` (zero-extended), everything else zero.
    pub fn initial(inputs: &[BitString], l_max: usize) -> Result<Self> {
        let width = inputs.len() * l_max;
        if width > MAX_WIDTH {
            return Err(Error::ResourceLimit(format!(
                "tape of {width} qubits exceeds {MAX_WIDTH}"
            )));
        }
        let registers = inputs
            .iter()
            .map(|w| w.zero_extend(l_max))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::LengthOverflow {
                length: inputs.iter().map(|w| w.len()).max().unwrap_or(0),
                l_max,
            })?;
        Ok(Self {
            registers,
            tape: BitString::zeros(width),
            counter: 0,
            r: 0,
            q: vec![0; inputs.len()],
            p: 0,
            clock: 0,
        })
    }

    /// The pointer and counter part of the state.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            r: self.r,
            q_r: self.current_q(),
            p: self.p,
            c: self.counter,
        }
    }

    fn current_q(&self) -> usize {
        if self.r == 0 {
            0
        } else {
            self.q[self.r - 1]
        }
    }

    /// True when every register, pointer and the counter are zero.
    pub fn ancillas_clear(&self) -> bool {
        self.counter == 0
            && self.r == 0
            && self.p == 0
            && self.q.iter().all(|&q| q == 0)
            && self.registers.iter().all(|r| r.value() == 0)
    }

    fn flip(bits: &mut BitString, k: usize) {
        let len = bits.len();
        *bits = BitString::new(len, bits.value() ^ (1u128 << (len - k))).expect("same width");
    }
}

/// Pointer snapshot recorded with each cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Snapshot {
    pub r: usize,
    pub q_r: usize,
    pub p: usize,
    pub c: u64,
}

/// The program line executed in a cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Line {
    /// r ← r + 1
    IncRegister,
    /// q_r ← q_r + 1
    IncQubit,
    /// p ← p + 1
    IncTape,
    /// T_p ← T_p ⊕ R_{r,q_r}
    Copy,
    /// Test: R_{r,1..q_r} is a codeword of length q_r.
    CodewordTest { holds: bool },
    /// Test: r = N.
    LastRegisterTest { holds: bool },
    /// c ← c + 1, with the test time = D.
    DelayUp,
    /// c ← c − 1, with the test c = 0.
    DelayDown,
    /// R_{r,q_r} ← T_p ⊕ R_{r,q_r}
    Uncopy,
    /// p ← p − 1
    DecTape,
    /// q_r ← q_r − 1
    DecQubit,
    /// r ← r − 1
    DecRegister,
}

impl Line {
    /// The line that undoes this one in the uncopy phase.
    pub fn mirror(self) -> Line {
        match self {
            Line::IncRegister => Line::DecRegister,
            Line::IncQubit => Line::DecQubit,
            Line::IncTape => Line::DecTape,
            Line::Copy => Line::Uncopy,
            Line::DelayUp => Line::DelayDown,
            Line::DecRegister => Line::IncRegister,
            Line::DecQubit => Line::IncQubit,
            Line::DecTape => Line::IncTape,
            Line::Uncopy => Line::Copy,
            Line::DelayDown => Line::DelayUp,
            test => test,
        }
    }

    fn mnemonic(self) -> &'static str {
        match self {
            Line::IncRegister => "inc_r",
            Line::IncQubit => "inc_q",
            Line::IncTape => "inc_p",
            Line::Copy => "copy",
            Line::CodewordTest { holds: true } => "codeword?=yes",
            Line::CodewordTest { holds: false } => "codeword?=no",
            Line::LastRegisterTest { holds: true } => "last_r?=yes",
            Line::LastRegisterTest { holds: false } => "last_r?=no",
            Line::DelayUp => "delay_up",
            Line::DelayDown => "delay_down",
            Line::Uncopy => "uncopy",
            Line::DecTape => "dec_p",
            Line::DecQubit => "dec_q",
            Line::DecRegister => "dec_r",
        }
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// One machine cycle: the clock after it, the line run, and the pointers
/// after it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub clock: u64,
    pub line: Line,
    pub after: Snapshot,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.after;
        write!(
            f,
            "{} {} r={} q={} p={} c={}",
            self.clock, self.line, s.r, s.q_r, s.p, s.c
        )
    }
}

/// Result of one run of the condensation program.
#[derive(Clone, Debug, PartialEq)]
pub struct MachineRun {
    pub deadline: u64,
    pub final_state: MachineState,
    /// State at the end of the copy phase.
    pub copy_endpoint: MachineState,
    pub copy_cycles: u64,
    pub delay_cycles: u64,
    pub trace: Vec<TraceRecord>,
    /// Loop joins whose condition disagreed with the direction of arrival.
    pub join_violations: usize,
}

impl MachineRun {
    /// The trace as text, one cycle per line.
    pub fn trace_text(&self) -> String {
        let mut out = String::new();
        for rec in &self.trace {
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }

    /// Cycles of the uncopy phase (after the delay loops).
    pub fn uncopy_trace(&self) -> &[TraceRecord] {
        let start = (self.copy_cycles + 2 * self.delay_cycles) as usize;
        &self.trace[start..]
    }

    pub fn copy_trace(&self) -> &[TraceRecord] {
        &self.trace[..self.copy_cycles as usize]
    }
}

/// Smallest deadline for which every N-tuple of `code` finishes copying.
pub fn minimal_deadline(code: &ClassicalCode, n: usize) -> u64 {
    (n as u64) * (4 * code.max_length() as u64 + 2) + 1
}

struct Machine<'a> {
    code: &'a ClassicalCode,
    state: MachineState,
    trace: Vec<TraceRecord>,
    join_violations: usize,
}

impl Machine<'_> {
    fn n(&self) -> usize {
        self.state.registers.len()
    }

    fn codeword_test(&self) -> bool {
        let q = self.state.current_q();
        let reg = &self.state.registers[self.state.r - 1];
        let prefix = reg.prefix(q);
        self.code.codewords().contains(&prefix)
    }

    fn join(&mut self, holds: bool, first: bool) {
        if holds != first {
            self.join_violations += 1;
        }
    }

    /// Applies `line` (which must be a state-changing line or a test whose
    /// outcome is supplied) and records the cycle.
    fn step(&mut self, line: Line) {
        let s = &mut self.state;
        match line {
            Line::IncRegister => s.r += 1,
            Line::DecRegister => s.r -= 1,
            Line::IncQubit => s.q[s.r - 1] += 1,
            Line::DecQubit => s.q[s.r - 1] -= 1,
            Line::IncTape => s.p += 1,
            Line::DecTape => s.p -= 1,
            Line::Copy => {
                let q = s.q[s.r - 1];
                if s.registers[s.r - 1].get(q) {
                    MachineState::flip(&mut s.tape, s.p);
                }
            }
            Line::Uncopy => {
                let q = s.q[s.r - 1];
                if s.tape.get(s.p) {
                    MachineState::flip(&mut s.registers[s.r - 1], q);
                }
            }
            Line::DelayUp => s.counter += 1,
            Line::DelayDown => s.counter -= 1,
            Line::CodewordTest { .. } | Line::LastRegisterTest { .. } => {}
        }
        s.clock += 1;
        self.trace.push(TraceRecord {
            clock: s.clock,
            line,
            after: s.snapshot(),
        });
    }

    fn check_deadline(&self, deadline: u64) -> Result<()> {
        if self.state.clock >= deadline {
            return Err(Error::DeadlineTooSmall {
                deadline,
                detail: format!(
                    "copy phase still running at cycle {} (register {})",
                    self.state.clock, self.state.r
                ),
            });
        }
        Ok(())
    }

    fn copy_phase(&mut self, deadline: u64, l_max: usize) -> Result<()> {
        let n = self.n();
        let mut first_outer = true;
        loop {
            self.join(self.state.r == 0, first_outer);
            first_outer = false;
            self.step(Line::IncRegister);
            self.check_deadline(deadline)?;
            let mut first_inner = true;
            loop {
                self.join(self.state.current_q() == 0, first_inner);
                first_inner = false;
                if self.state.current_q() == l_max {
                    return Err(Error::Divergence {
                        register: self.state.r,
                        l_max,
                    });
                }
                for line in [Line::IncQubit, Line::IncTape, Line::Copy] {
                    self.step(line);
                    self.check_deadline(deadline)?;
                }
                let holds = self.codeword_test();
                self.step(Line::CodewordTest { holds });
                self.check_deadline(deadline)?;
                if holds {
                    break;
                }
            }
            let holds = self.state.r == n;
            self.step(Line::LastRegisterTest { holds });
            self.check_deadline(deadline)?;
            if holds {
                return Ok(());
            }
        }
    }

    fn delay(&mut self, deadline: u64) -> u64 {
        let mut iterations = 0;
        loop {
            self.join(self.state.counter == 0, iterations == 0);
            self.step(Line::DelayUp);
            iterations += 1;
            if self.state.clock == deadline {
                break;
            }
        }
        for k in 0..iterations {
            self.join(self.state.clock == deadline, k == 0);
            self.step(Line::DelayDown);
            if self.state.counter == 0 {
                break;
            }
        }
        iterations
    }

    fn uncopy_phase(&mut self) {
        let n = self.n();
        let mut first_outer = true;
        loop {
            let holds = self.state.r == n;
            self.join(holds, first_outer);
            first_outer = false;
            self.step(Line::LastRegisterTest { holds });
            let mut first_inner = true;
            loop {
                let holds = self.state.current_q() > 0 && self.codeword_test();
                self.join(holds, first_inner);
                first_inner = false;
                self.step(Line::CodewordTest { holds });
                for line in [Line::Uncopy, Line::DecTape, Line::DecQubit] {
                    self.step(line);
                }
                if self.state.current_q() == 0 {
                    break;
                }
            }
            self.step(Line::DecRegister);
            if self.state.r == 0 {
                return;
            }
        }
    }
}

/// Runs the condensation program on classical `inputs` with deadline `D`.
///
/// Inputs are zero-extended to the code's maximal length. The run fails if
/// the copy phase has not finished strictly before `D` (the delay loop must
/// run at least once) or if a register holds no codeword.
pub fn run_condense_program(
    code: &ClassicalCode,
    inputs: &[BitString],
    deadline: u64,
) -> Result<MachineRun> {
    if inputs.is_empty() {
        return Err(Error::InvalidCode("no input registers".into()));
    }
    let l_max = code.max_length();
    let mut machine = Machine {
        code,
        state: MachineState::initial(inputs, l_max)?,
        trace: Vec::new(),
        join_violations: 0,
    };
    machine.copy_phase(deadline, l_max)?;
    let copy_endpoint = machine.state.clone();
    let copy_cycles = copy_endpoint.clock;
    let delay_cycles = machine.delay(deadline);
    machine.uncopy_phase();
    Ok(MachineRun {
        deadline,
        final_state: machine.state,
        copy_endpoint,
        copy_cycles,
        delay_cycles,
        trace: machine.trace,
        join_violations: machine.join_violations,
    })
}

/// Applies the inverse of `line` to `state` (no clock change).
fn undo(state: &mut MachineState, line: Line) {
    match line {
        Line::IncRegister => state.r -= 1,
        Line::IncQubit => state.q[state.r - 1] -= 1,
        Line::IncTape => state.p -= 1,
        Line::Copy => {
            let q = state.q[state.r - 1];
            if state.registers[state.r - 1].get(q) {
                MachineState::flip(&mut state.tape, state.p);
            }
        }
        _ => {}
    }
}

/// Step-by-step reversibility audit of one run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunAudit {
    /// Undoing the copy phase line by line from its endpoint revisits every
    /// recorded copy-phase configuration.
    pub copy_phase_invertible: bool,
    /// The uncopy phase runs the mirrored lines in reverse order.
    pub lines_mirrored: bool,
    /// The uncopy phase retraces the copy phase's pointer snapshots backwards.
    pub pointers_mirrored: bool,
    pub halted_at_2d: bool,
    pub ancillas_clear: bool,
    pub join_violations: usize,
}

impl RunAudit {
    pub fn passed(&self) -> bool {
        self.copy_phase_invertible
            && self.lines_mirrored
            && self.pointers_mirrored
            && self.halted_at_2d
            && self.ancillas_clear
            && self.join_violations == 0
    }
}

/// Audits a run of the program on one input tuple.
pub fn audit_run(code: &ClassicalCode, inputs: &[BitString], deadline: u64) -> Result<RunAudit> {
    let run = run_condense_program(code, inputs, deadline)?;
    let l_max = code.max_length();
    // Replay the copy phase, remembering every configuration.
    let mut states = vec![MachineState::initial(inputs, l_max)?];
    let mut replay = Machine {
        code,
        state: states[0].clone(),
        trace: Vec::new(),
        join_violations: 0,
    };
    for rec in run.copy_trace() {
        replay.step(rec.line);
        states.push(replay.state.clone());
    }
    let mut backwards = run.copy_endpoint.clone();
    let mut copy_phase_invertible = states.last() == Some(&backwards);
    for (k, rec) in run.copy_trace().iter().enumerate().rev() {
        undo(&mut backwards, rec.line);
        backwards.clock -= 1;
        copy_phase_invertible &= backwards == states[k];
    }
    let copy = run.copy_trace();
    let uncopy = run.uncopy_trace();
    let lines_mirrored = copy.len() == uncopy.len()
        && copy
            .iter()
            .rev()
            .zip(uncopy)
            .all(|(a, b)| a.line.mirror() == b.line);
    let pointer_of = |s: &MachineState| {
        let snap = s.snapshot();
        (snap.r, snap.q_r, snap.p)
    };
    let pointers_mirrored = copy.len() == uncopy.len()
        && uncopy.iter().enumerate().all(|(j, rec)| {
            let mirror = &states[copy.len() - 1 - j];
            (rec.after.r, rec.after.q_r, rec.after.p) == pointer_of(mirror)
        });
    Ok(RunAudit {
        copy_phase_invertible,
        lines_mirrored,
        pointers_mirrored,
        halted_at_2d: run.final_state.clock == 2 * deadline,
        ancillas_clear: run.final_state.ancillas_clear(),
        join_violations: run.join_violations,
    })
}

/// All N-tuples of codewords in lexicographic index order.
pub fn codeword_tuples(code: &ClassicalCode, n: usize) -> Result<Vec<Vec<BitString>>> {
    let base = code.len();
    let count = u32::try_from(n)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .filter(|&c| c <= MAX_ENUMERATED_TUPLES)
        .ok_or_else(|| {
            Error::ResourceLimit(format!("{base}^{n} input tuples exceed {MAX_ENUMERATED_TUPLES}"))
        })?;
    Ok((0..count)
        .map(|mut index| {
            let mut tuple = vec![BitString::empty(); n];
            for slot in tuple.iter_mut().rev() {
                *slot = code.codewords()[index % base];
                index /= base;
            }
            tuple
        })
        .collect())
}

/// Report of [`check_reversibility`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReversibilityReport {
    pub runs: usize,
    pub distinct_tapes: usize,
    /// Pairs of input tuples that produced the same tape.
    pub collisions: Vec<(Vec<BitString>, Vec<BitString>)>,
    /// Tuples whose step-level audit failed.
    pub failed_audits: Vec<Vec<BitString>>,
}

impl ReversibilityReport {
    pub fn injective(&self) -> bool {
        self.collisions.is_empty()
    }
}

/// Runs every N-tuple of codewords and checks that distinct inputs give
/// distinct tapes.
pub fn check_reversibility(code: &ClassicalCode, n: usize, deadline: u64) -> Result<ReversibilityReport> {
    let tuples = codeword_tuples(code, n)?;
    let mut seen: HashMap<BitString, usize> = HashMap::new();
    let mut collisions = Vec::new();
    let mut failed_audits = Vec::new();
    for (i, tuple) in tuples.iter().enumerate() {
        let run = run_condense_program(code, tuple, deadline)?;
        if let Some(&j) = seen.get(&run.final_state.tape) {
            collisions.push((tuples[j].clone(), tuple.clone()));
        } else {
            seen.insert(run.final_state.tape, i);
        }
        if !audit_run(code, tuple, deadline)?.passed() {
            failed_audits.push(tuple.clone());
        }
    }
    Ok(ReversibilityReport {
        runs: tuples.len(),
        distinct_tapes: seen.len(),
        collisions,
        failed_audits,
    })
}

/// Report of [`check_input_independence`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceReport {
    pub runs: usize,
    /// Tuples whose final clock differs from 2D.
    pub clock_mismatches: Vec<Vec<BitString>>,
    /// Tuples that left a register, pointer or the counter nonzero.
    pub dirty_ancillas: Vec<Vec<BitString>>,
}

impl IndependenceReport {
    pub fn independent(&self) -> bool {
        self.clock_mismatches.is_empty() && self.dirty_ancillas.is_empty()
    }
}

/// Checks that every N-tuple halts at 2D with all ancillas back at zero.
pub fn check_input_independence(code: &ClassicalCode, n: usize, deadline: u64) -> Result<IndependenceReport> {
    let tuples = codeword_tuples(code, n)?;
    let mut clock_mismatches = Vec::new();
    let mut dirty_ancillas = Vec::new();
    for tuple in &tuples {
        let run = run_condense_program(code, tuple, deadline)?;
        if run.final_state.clock != 2 * deadline {
            clock_mismatches.push(tuple.clone());
        }
        if !run.final_state.ancillas_clear() {
            dirty_ancillas.push(tuple.clone());
        }
    }
    Ok(IndependenceReport {
        runs: tuples.len(),
        clock_mismatches,
        dirty_ancillas,
    })
}

fn unitary_deviation(m: &DMatrix<Complex64>) -> f64 {
    let id = DMatrix::<Complex64>::identity(m.nrows(), m.ncols());
    max_abs(&(m.adjoint() * m - id))
}

fn check_disjoint(switch: usize, subsystem: &[usize]) -> Result<()> {
    if subsystem.contains(&switch) {
        return Err(Error::OverlappingSubsystems(switch));
    }
    for (i, q) in subsystem.iter().enumerate() {
        if subsystem[..i].contains(q) {
            return Err(Error::OverlappingSubsystems(*q));
        }
    }
    Ok(())
}

/// U = X ⊗ Π + 1 ⊗ Π⊥ with the switch qubit as the X factor.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchOperator {
    switch: usize,
    subsystem: Vec<usize>,
    projector: DMatrix<Complex64>,
    local: DMatrix<Complex64>,
}

impl BranchOperator {
    /// `projector` acts on `subsystem` (first listed qubit most significant);
    /// qubit indices are 1-based.
    pub fn new(switch: usize, subsystem: Vec<usize>, projector: DMatrix<Complex64>) -> Result<Self> {
        check_disjoint(switch, &subsystem)?;
        let dim = 1usize << subsystem.len();
        if projector.nrows() != dim || projector.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: subsystem.len(),
                found: projector.nrows().trailing_zeros() as usize,
            });
        }
        let deviation = max_abs(&(&projector * &projector - &projector))
            .max(max_abs(&(projector.adjoint() - &projector)));
        if deviation > OPERATOR_TOLERANCE {
            return Err(Error::NotProjector(deviation));
        }
        let one = Complex64::new(1.0, 0.0);
        let x = DMatrix::from_row_slice(2, 2, &[Complex64::default(), one, one, Complex64::default()]);
        let id2 = DMatrix::<Complex64>::identity(2, 2);
        let perp = DMatrix::<Complex64>::identity(dim, dim) - &projector;
        let local = x.kronecker(&projector) + id2.kronecker(&perp);
        Ok(Self {
            switch,
            subsystem,
            projector,
            local,
        })
    }

    pub fn projector(&self) -> &DMatrix<Complex64> {
        &self.projector
    }

    /// The local matrix on (switch, subsystem...), switch most significant.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.local
    }

    fn qubits(&self) -> Vec<usize> {
        std::iter::once(self.switch)
            .chain(self.subsystem.iter().copied())
            .collect()
    }

    pub fn apply(&self, state: &SparseState) -> Result<SparseState> {
        state.apply_local(&self.qubits(), &self.local)
    }
}

/// Applies U for projector Π on `subsystem` with the given switch qubit.
pub fn branch_operator_apply(
    projector: &DMatrix<Complex64>,
    subsystem: &[usize],
    switch: usize,
    state: &SparseState,
) -> Result<SparseState> {
    BranchOperator::new(switch, subsystem.to_vec(), projector.clone())?.apply(state)
}

/// V = |0⟩⟨0| ⊗ V₀ + |1⟩⟨1| ⊗ V₁ with `switch` as the control.
pub fn controlled_branch(
    switch: usize,
    subsystem: &[usize],
    v0: &DMatrix<Complex64>,
    v1: &DMatrix<Complex64>,
    state: &SparseState,
) -> Result<SparseState> {
    check_disjoint(switch, subsystem)?;
    let dim = 1usize << subsystem.len();
    for v in [v0, v1] {
        if v.nrows() != dim || v.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: subsystem.len(),
                found: v.nrows().trailing_zeros() as usize,
            });
        }
        let deviation = unitary_deviation(v);
        if deviation > OPERATOR_TOLERANCE {
            return Err(Error::NotUnitary(deviation));
        }
    }
    let mut local = DMatrix::<Complex64>::zeros(2 * dim, 2 * dim);
    local.view_mut((0, 0), (dim, dim)).copy_from(v0);
    local.view_mut((dim, dim), (dim, dim)).copy_from(v1);
    let qubits: Vec<usize> = std::iter::once(switch).chain(subsystem.iter().copied()).collect();
    state.apply_local(&qubits, &local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::inner;

    fn sample() -> ClassicalCode {
        ClassicalCode::parse(&["0", "10", "110", "111"]).unwrap()
    }

    fn words(ws: &[&str]) -> Vec<BitString> {
        ws.iter().map(|w| w.parse().unwrap()).collect()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn copies_pair() {
        let d = minimal_deadline(&sample(), 2);
        assert_eq!(d, 29);
        let run = run_condense_program(&sample(), &words(&["10", "0"]), d).unwrap();
        assert_eq!(run.final_state.tape.to_string(), "100000");
        assert_eq!(run.final_state.clock, 2 * d);
        assert!(run.final_state.ancillas_clear());
        assert_eq!(run.copy_cycles, 4 * 2 + 2 + 4 + 2);
        assert_eq!(run.join_violations, 0);
        assert_eq!(run.trace.len() as u64, 2 * d);
    }

    #[test]
    fn single_and_triple() {
        let d = minimal_deadline(&sample(), 1);
        let run = run_condense_program(&sample(), &words(&["0"]), d).unwrap();
        assert_eq!(run.final_state.tape.to_string(), "000");
        assert_eq!(run.final_state.clock, 2 * d);
        let d = minimal_deadline(&sample(), 3);
        let run = run_condense_program(&sample(), &words(&["111", "111", "111"]), d).unwrap();
        assert_eq!(run.final_state.tape.to_string(), "111111111");
        assert_eq!(run.delay_cycles, 1);
        assert!(run.final_state.ancillas_clear());
    }

    #[test]
    fn trace_text_format() {
        let run = run_condense_program(&sample(), &words(&["0"]), 8).unwrap();
        let text = run.trace_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[0], "1 inc_r r=1 q=0 p=0 c=0");
        assert_eq!(lines[3], "4 copy r=1 q=1 p=1 c=0");
        assert_eq!(lines[4], "5 codeword?=yes r=1 q=1 p=1 c=0");
        assert_eq!(lines[5], "6 last_r?=yes r=1 q=1 p=1 c=0");
        assert_eq!(lines[6], "7 delay_up r=1 q=1 p=1 c=1");
        assert_eq!(lines[15], "16 dec_r r=0 q=0 p=0 c=0");
    }

    #[test]
    fn deadline_too_small() {
        let d = minimal_deadline(&sample(), 2);
        assert!(matches!(
            run_condense_program(&sample(), &words(&["111", "111"]), d - 1),
            Err(Error::DeadlineTooSmall { .. })
        ));
        assert!(run_condense_program(&sample(), &words(&["0", "0"]), d - 1).is_ok());
    }

    #[test]
    fn non_codeword_diverges() {
        let code = ClassicalCode::parse(&["0", "10"]).unwrap();
        assert!(matches!(
            run_condense_program(&code, &words(&["11"]), 100),
            Err(Error::Divergence { register: 1, l_max: 2 })
        ));
    }

    #[test]
    fn audit_passes_for_prefix_free() {
        let d = minimal_deadline(&sample(), 2) + 5;
        let audit = audit_run(&sample(), &words(&["110", "0"]), d).unwrap();
        assert!(audit.passed(), "{audit:?}");
    }

    #[test]
    fn exhaustive_checks() {
        let d = minimal_deadline(&sample(), 2);
        let rev = check_reversibility(&sample(), 2, d).unwrap();
        assert_eq!((rev.runs, rev.distinct_tapes), (16, 16));
        assert!(rev.injective() && rev.failed_audits.is_empty());
        let ind = check_input_independence(&sample(), 2, d).unwrap();
        assert!(ind.independent());
        let later = check_input_independence(&sample(), 2, d + 5).unwrap();
        assert!(later.independent());
        let fixed = ClassicalCode::parse(&["00", "01", "10", "11"]).unwrap();
        assert!(check_reversibility(&fixed, 2, minimal_deadline(&fixed, 2))
            .unwrap()
            .injective());
    }

    #[test]
    fn non_prefix_code_collides() {
        let code = ClassicalCode::parse(&["0", "01"]).unwrap();
        let d = minimal_deadline(&code, 2);
        let rev = check_reversibility(&code, 2, d).unwrap();
        assert!(!rev.injective());
        assert!(!rev.failed_audits.is_empty());
        let ind = check_input_independence(&code, 2, d).unwrap();
        assert!(!ind.dirty_ancillas.is_empty());
    }

    #[test]
    fn branch_examples() {
        let p1 = DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]);
        let u = BranchOperator::new(1, vec![2], p1.clone()).unwrap();
        let out = u.apply(&SparseState::from_bitstrings([("01", c(1.0))]).unwrap()).unwrap();
        assert_eq!(out, SparseState::from_bitstrings([("11", c(1.0))]).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = SparseState::from_bitstrings([("00", c(h)), ("01", c(h))]).unwrap();
        let out = branch_operator_apply(&p1, &[2], 1, &plus).unwrap();
        let bell = SparseState::from_bitstrings([("00", c(h)), ("11", c(h))]).unwrap();
        assert!((inner(&out, &bell).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(u.apply(&out).unwrap().terms().eq(plus.terms()));
        assert!(matches!(
            BranchOperator::new(1, vec![1], p1),
            Err(Error::OverlappingSubsystems(1))
        ));
        let not_proj = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(1.0)]);
        assert!(matches!(
            BranchOperator::new(1, vec![2], not_proj),
            Err(Error::NotProjector(_))
        ));
    }

    #[test]
    fn controlled_examples() {
        let id = DMatrix::<Complex64>::identity(2, 2);
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let zero = SparseState::from_bitstrings([("00", c(1.0))]).unwrap();
        assert_eq!(controlled_branch(1, &[2], &x, &id, &zero).unwrap().amplitude(0b01), c(1.0));
        let one = SparseState::from_bitstrings([("10", c(1.0))]).unwrap();
        assert_eq!(controlled_branch(1, &[2], &id, &x, &one).unwrap().amplitude(0b11), c(1.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = SparseState::from_bitstrings([("00", c(h)), ("10", c(h))]).unwrap();
        let out = controlled_branch(1, &[2], &id, &x, &plus).unwrap();
        assert!((out.amplitude(0b00) - c(h)).norm() < 1e-15);
        assert!((out.amplitude(0b11) - c(h)).norm() < 1e-15);
        let bad = DMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        assert!(matches!(
            controlled_branch(1, &[2], &bad, &id, &plus),
            Err(Error::NotUnitary(_))
        ));
    }
}
