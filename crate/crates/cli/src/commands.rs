//! The subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use zefcode::bits::{BitString, MAX_WIDTH};
use zefcode::codes::{
    is_prefix_free_classical, is_prefix_free_quantum, kraft_sum_classical, length_table,
    prefix_violation, quantum_kraft_sum, remap_to_prefix_free, ClassicalCode, QuantumCode,
};
use zefcode::compress::{
    block_code, is_codeword, length_identity, length_optimizing_check, necessity_bound,
    sufficiency_experiment, Ensemble, Sampling, SweepConfig, SweepRow, MAX_EXACT_TUPLES,
};
use zefcode::condense::{isometry_check, simple_condense};
use zefcode::machine::{minimal_deadline, run_condense_program};
use zefcode::SparseState;

use crate::config::{
    build_ensemble, BuiltCode, ClassicalSource, CompressSpec, Config, ConstructionName,
    SamplingName,
};
use crate::error::{CliError, CliResult};
use crate::format::{csv_row, read_state, sig, CSV_HEADER};

/// Command-line flags shared by the subcommands.
#[derive(Clone, Debug, Default)]
pub struct Options {
    pub seed: Option<u64>,
    pub exact: bool,
    pub machine: bool,
    pub out: Option<PathBuf>,
}

impl Options {
    /// `--out`, else the section's `out`, else the top-level `out`.
    fn out_path(&self, cfg: &Config, section: Option<&PathBuf>) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| section.or(cfg.out.as_ref()).map(|p| cfg.resolve(p)))
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn dims_list(code: &QuantumCode) -> String {
    let dims: Vec<String> = code.dims().as_slice().iter().map(u64::to_string).collect();
    format!("[{}]", dims.join(","))
}

pub fn kraft(cfg: &Config) -> CliResult<()> {
    let spec = cfg.code_spec()?;
    let classical = match spec.classical()? {
        ClassicalSource::KraftViolated(k) => {
            outln!("classical: Kraft violated: {k:?}");
            outln!("no prefix code has these lengths");
            return Ok(());
        }
        ClassicalSource::Code(c) => Some(c),
        ClassicalSource::None => None,
    };
    if let Some(c) = &classical {
        let k = kraft_sum_classical(c);
        let verdict = if k > 1.0 {
            format!("Kraft violated: {k:?}")
        } else {
            format!("K = {k:?}")
        };
        outln!(
            "classical: {verdict}, prefix-free: {}",
            yes_no(is_prefix_free_classical(c))
        );
    }
    match BuiltCode::from_spec(spec) {
        Ok(built) => {
            let q = &built.quantum;
            let free = is_prefix_free_quantum(q);
            outln!(
                "quantum: K = {:?}, prefix-free: {}, d = {}",
                quantum_kraft_sum(q),
                yes_no(free),
                dims_list(q)
            );
            if !free {
                outln!("prefix violation: {}", sig(prefix_violation(q), 6));
            }
            let table = built.classical.as_ref().map(length_table).unwrap_or_default();
            outln!("l\td_l\tcodewords");
            for (l, d) in q.dims().as_slice().iter().enumerate() {
                let words: Vec<String> = table
                    .get(&(l + 1))
                    .map(|ws| ws.iter().map(BitString::to_string).collect())
                    .unwrap_or_default();
                outln!("{}\t{d}\t{}", l + 1, words.join(" "));
            }
        }
        Err(e) => outln!("quantum: no zef code ({e})"),
    }
    Ok(())
}

fn describe(state: &SparseState) -> String {
    let terms: Vec<(u128, num_complex::Complex64)> = state.terms().collect();
    let n = state.num_qubits();
    let label = |v: u128| BitString::new(n, v).map(|b| b.to_string()).unwrap_or_default();
    if let [(v, a)] = terms.as_slice() {
        if (a.re - 1.0).abs() < 1e-12 && a.im.abs() < 1e-12 {
            return label(*v);
        }
    }
    terms
        .iter()
        .map(|(v, a)| format!("({} {})|{}⟩", sig(a.re, 6), sig(a.im, 6), label(*v)))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// The code as a TOML `[code]` section that a config can load back.
fn code_table(code: &QuantumCode) -> String {
    let mut out = format!("[code]\nl_max = {}\npayloads = [\n", code.l_max());
    for b in code.basis() {
        let n = b.payload.num_qubits();
        let entries: Vec<String> = b
            .payload
            .terms()
            .map(|(v, a)| {
                let bits = BitString::new(n, v).map(|s| s.to_string()).unwrap_or_default();
                format!("\"{bits}\" = \"{:?} {:?}\"", a.re, a.im)
            })
            .collect();
        writeln!(out, "  {{ {} }},", entries.join(", ")).expect("write to string");
    }
    out.push_str("]\n");
    out
}

pub fn lift(cfg: &Config, opts: &Options) -> CliResult<()> {
    let built = BuiltCode::from_spec(cfg.code_spec()?)?;
    let code = if is_prefix_free_quantum(&built.quantum) {
        outln!(
            "lifted: l_max = {}, K = {:?}, d = {}",
            built.quantum.l_max(),
            quantum_kraft_sum(&built.quantum),
            dims_list(&built.quantum)
        );
        built.quantum
    } else {
        let remap = remap_to_prefix_free(&built.quantum)?;
        let words: Vec<String> = remap.classical.codewords().iter().map(BitString::to_string).collect();
        outln!(
            "not prefix-free (violation {}); remapped onto {{{}}}",
            sig(prefix_violation(&built.quantum), 6),
            words.join(",")
        );
        outln!(
            "remap isometry deviation {}, conjugation error {}",
            sig(remap.isometry_deviation, 3),
            sig(remap.conjugation_error, 3)
        );
        remap.code
    };
    outln!("l\ti\tpayload\tzef");
    for b in code.basis() {
        outln!("{}\t{}\t{}\t{}", b.length, b.index, describe(&b.payload), describe(&b.zef));
    }
    if let Some(path) = opts.out_path(cfg, None) {
        write_file(&path, &code_table(&code))?;
        outln!("code table written to {}", path.display());
    }
    Ok(())
}

pub fn condense(cfg: &Config, opts: &Options) -> CliResult<()> {
    let built = BuiltCode::from_spec(cfg.code_spec()?)?;
    let spec = cfg
        .condense
        .as_ref()
        .ok_or_else(|| CliError::Validation("config has no [condense] section".into()))?;
    let l_max = built.quantum.l_max();
    let (states, words) = match (&spec.words, &spec.files) {
        (Some(words), None) if !words.is_empty() => {
            let states = words
                .iter()
                .enumerate()
                .map(|(i, w)| built.codeword_state(&format!("condense.words[{i}]"), w))
                .collect::<CliResult<Vec<_>>>()?;
            let parsed: Vec<BitString> = words.iter().map(|w| w.parse()).collect::<Result<_, _>>()?;
            (states, Some(parsed))
        }
        (None, Some(files)) if !files.is_empty() => {
            let mut states = Vec::with_capacity(files.len());
            for (i, f) in files.iter().enumerate() {
                let s = read_state(&cfg.resolve(f), l_max)?;
                if !is_codeword(&s, &built.quantum) {
                    return Err(CliError::Validation(format!(
                        "condense.files[{i}]: {} is not a codeword state",
                        f.display()
                    )));
                }
                states.push(s);
            }
            (states, None)
        }
        _ => {
            return Err(CliError::Validation(
                "condense: give a nonempty list of either words or files".into(),
            ))
        }
    };
    let cs = simple_condense(&built.quantum, &states)?;
    let out = opts.out_path(cfg, spec.out.as_ref());
    let mut report = Vec::new();
    report.push(format!(
        "condensed {} words onto {} qubits: {} terms, norm deviation {}, prefix-free code: {}",
        cs.n_words,
        cs.num_qubits(),
        cs.state.terms().count(),
        sig(cs.norm_deviation, 3),
        yes_no(cs.prefix_free)
    ));
    report.push(match isometry_check(&built.quantum, states.len()) {
        Ok(iso) => format!(
            "isometry: max Gram deviation {} over {} basis products, isometric: {}",
            sig(iso.max_deviation, 3),
            iso.products,
            yes_no(iso.is_isometric())
        ),
        Err(e) if e.is_resource_limit() => format!("isometry: skipped ({e})"),
        Err(e) => return Err(e.into()),
    });
    if opts.machine {
        let (Some(words), Some(classical)) = (&words, &built.classical) else {
            return Err(CliError::Validation(
                "--machine needs classical [condense] words".into(),
            ));
        };
        let deadline = spec
            .deadline
            .unwrap_or_else(|| minimal_deadline(classical, words.len()));
        let run = run_condense_program(classical, words, deadline)?;
        let fs = &run.final_state;
        let tape_matches = cs
            .state
            .terms()
            .next()
            .is_some_and(|(v, _)| v == fs.tape.value());
        let summary = format!(
            "machine: D = {deadline}, final clock = {} (2D = {}), ancillas clear: {}, tape matches: {}",
            fs.clock,
            2 * deadline,
            yes_no(fs.ancillas_clear()),
            yes_no(tape_matches)
        );
        let mut trace = run.trace_text();
        writeln!(trace, "final clock = {}", fs.clock).expect("write to string");
        writeln!(trace, "tape = {}", fs.tape).expect("write to string");
        let trace_path = spec
            .trace
            .as_ref()
            .map(|p| cfg.resolve(p))
            .or_else(|| out.as_ref().map(|p| PathBuf::from(format!("{}.trace", p.display()))));
        match trace_path {
            Some(p) => {
                write_file(&p, &trace)?;
                report.push(format!("{summary}; trace written to {}", p.display()));
            }
            None => {
                report.push(summary);
                report.push(trace.trim_end().to_string());
            }
        }
    }
    match out {
        Some(path) => {
            write_file(&path, &cs.state.to_string())?;
            outln!("state written to {}", path.display());
            report.iter().for_each(|line| outln!("{line}"));
        }
        None => {
            out!("{}", cs.state);
            report.iter().for_each(|line| eprintln!("{line}"));
        }
    }
    Ok(())
}

/// Largest N the chosen mode can handle, for limit diagnostics.
fn suggested_n(ensemble: &Ensemble, exact: bool) -> usize {
    let mut n = MAX_WIDTH / ensemble.code().l_max();
    if exact {
        let m = ensemble.len().max(2) as f64;
        n = n.min((MAX_EXACT_TUPLES as f64).log(m).floor() as usize);
    }
    n.max(1)
}

/// Smallest valid necessity bound at ℓ, capped at 1 (a fidelity never
/// exceeds 1, so 1 stands in where no bound applies).
fn necessity_column(ensemble: &Ensemble, n: usize, ell: usize, k: Option<usize>) -> f64 {
    let delta = ensemble.avg_length() - ell as f64 / n as f64;
    if delta <= 0.0 {
        return 1.0;
    }
    let ks: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..n).collect(),
    };
    ks.into_iter()
        .filter_map(|k| necessity_bound(ensemble, n, k, delta).ok())
        .map(|r| r.bound)
        .fold(1.0, f64::min)
}

struct NecessityBest {
    k: usize,
    bound: f64,
    informative: bool,
}

fn best_necessity(ensemble: &Ensemble, n: usize, delta: f64, k: Option<usize>) -> Option<NecessityBest> {
    let ks: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (1..n).collect(),
    };
    ks.into_iter()
        .filter_map(|k| necessity_bound(ensemble, n, k, delta).ok())
        .min_by(|a, b| a.bound.total_cmp(&b.bound))
        .map(|r| NecessityBest {
            k: r.k,
            bound: r.bound,
            informative: r.informative(),
        })
}

fn row_at(rows: &[SweepRow], ell: usize) -> Option<&SweepRow> {
    rows.iter().find(|r| r.ell == ell)
}

fn summaries(ensemble: &Ensemble, spec: &CompressSpec, n: usize, rows: &[SweepRow]) -> Vec<String> {
    let mean = ensemble.avg_length();
    let width = n * ensemble.code().l_max();
    let necessity_k = spec.necessity.as_ref().and_then(|s| s.k);
    let mut out = Vec::new();
    if spec.deltas.is_empty() {
        let ell = ((n as f64 * mean).round() as usize).min(width);
        if let Some(r) = row_at(rows, ell) {
            out.push(format!(
                "N={n}: <l>={}, at ell={ell}: avg_fidelity={} (1-eta={})",
                sig(mean, 6),
                sig(r.avg_fidelity, 6),
                sig(1.0 - r.eta_exact, 6)
            ));
        }
    }
    for &delta in &spec.deltas {
        let mut line = format!("N={n} delta={}:", sig(delta, 6));
        let up = ((n as f64 * (mean + delta)).ceil() as usize).min(width);
        if let Some(r) = row_at(rows, up) {
            write!(
                line,
                " keep {up} qubits: avg_fidelity={} +- {} (1-eta={});",
                sig(r.avg_fidelity, 6),
                sig(r.stderr, 3),
                sig(1.0 - r.eta_exact, 6)
            )
            .expect("write to string");
        }
        let down = n as f64 * (mean - delta);
        if down >= 0.0 {
            let ell = down.floor() as usize;
            if let Some(r) = row_at(rows, ell) {
                write!(line, " keep {ell} qubits: avg_fidelity={};", sig(r.avg_fidelity, 6))
                    .expect("write to string");
            }
            match best_necessity(ensemble, n, delta, necessity_k) {
                Some(b) => write!(
                    line,
                    " necessity bound {} (k={}{})",
                    sig(b.bound, 6),
                    b.k,
                    if b.informative { "" } else { ", not informative" }
                ),
                None => write!(line, " necessity bound: no valid k"),
            }
            .expect("write to string");
        }
        out.push(line.trim_end_matches(';').to_string());
    }
    out
}

pub fn compress(cfg: &Config, opts: &Options) -> CliResult<()> {
    let built = BuiltCode::from_spec(cfg.code_spec()?)?;
    let ensemble = build_ensemble(cfg, &built)?;
    let spec = cfg
        .compress
        .as_ref()
        .ok_or_else(|| CliError::Validation("config has no [compress] section".into()))?;
    let ns = spec.n.values();
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::Validation("compress.n: need positive block sizes".into()));
    }
    if let Some(d) = spec.deltas.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(CliError::Validation(format!("compress.deltas: invalid δ = {d}")));
    }
    let sampling = if opts.exact {
        SamplingName::Exact
    } else {
        spec.sampling
    };
    let explicit_ells = spec.ells.as_ref().map(|e| e.values()).transpose()?;
    let mean = ensemble.avg_length();
    let necessity = spec.necessity.as_ref();
    let mut csv = String::from(CSV_HEADER);
    if necessity.is_some() {
        csv.push_str(",necessity_bound");
    }
    csv.push('\n');
    let mut notes = Vec::new();
    for &n in &ns {
        let width = n * built.quantum.l_max();
        let exact_feasible = u32::try_from(n)
            .ok()
            .and_then(|e| ensemble.len().checked_pow(e))
            .is_some_and(|c| c <= MAX_EXACT_TUPLES);
        let sampled = match sampling {
            SamplingName::Exact => false,
            SamplingName::MonteCarlo => true,
            SamplingName::Auto => !exact_feasible,
        };
        let seed = opts.seed.or(cfg.seed);
        if sampled && seed.is_none() {
            return Err(CliError::Validation(format!(
                "N={n} needs Monte-Carlo sampling: set seed or pass --seed"
            )));
        }
        let mut ells = match &explicit_ells {
            Some(v) => {
                if let Some(bad) = v.iter().find(|&&l| l > width) {
                    return Err(CliError::Validation(format!(
                        "compress.ells: ell = {bad} exceeds the {width}-qubit register at N={n}"
                    )));
                }
                v.clone()
            }
            None => (0..=width).collect(),
        };
        // Make sure the summary points are in the sweep.
        for &delta in &spec.deltas {
            ells.push(((n as f64 * (mean + delta)).ceil() as usize).min(width));
            let down = n as f64 * (mean - delta);
            if down >= 0.0 {
                ells.push(down.floor() as usize);
            }
        }
        if spec.deltas.is_empty() {
            ells.push(((n as f64 * mean).round() as usize).min(width));
        }
        ells.sort_unstable();
        ells.dedup();
        let sweep = SweepConfig {
            n,
            ells,
            samples: spec.samples,
            seed: seed.unwrap_or(0),
            sampling: match sampling {
                SamplingName::Auto => Sampling::Auto,
                SamplingName::Exact => Sampling::Exact,
                SamplingName::MonteCarlo => Sampling::MonteCarlo,
            },
        };
        let rows = sufficiency_experiment(&ensemble, &sweep).map_err(|e| {
            if e.is_resource_limit() {
                let exact = matches!(sampling, SamplingName::Exact);
                CliError::Resource(format!(
                    "{e}; try N <= {}",
                    suggested_n(&ensemble, exact)
                ))
            } else {
                e.into()
            }
        })?;
        for row in &rows {
            let extra: Vec<f64> = necessity
                .map(|s| vec![necessity_column(&ensemble, n, row.ell, s.k)])
                .unwrap_or_default();
            csv.push_str(&csv_row(row, &extra));
        }
        notes.extend(summaries(&ensemble, spec, n, &rows));
    }
    match opts.out_path(cfg, spec.out.as_ref()) {
        Some(path) => {
            write_file(&path, &csv)?;
            outln!("CSV written to {}", path.display());
            notes.iter().for_each(|line| outln!("{line}"));
        }
        None => {
            out!("{csv}");
            notes.iter().for_each(|line| eprintln!("{line}"));
        }
    }
    Ok(())
}

pub fn entropy(cfg: &Config) -> CliResult<()> {
    let code_spec = cfg.code_spec()?;
    let built = BuiltCode::from_spec(code_spec)?;
    let ensemble = build_ensemble(cfg, &built)?;
    let id = length_identity(&ensemble)?;
    let opt = length_optimizing_check(&ensemble)?;
    outln!("<l> = {}", sig(id.avg_length, 12));
    outln!("S = {}", sig(id.entropy, 12));
    outln!("D = {}", sig(id.relative_entropy, 12));
    outln!("-log K = {}", sig(id.neg_log_kraft, 12));
    outln!("residual = {}", sig(id.residual, 3));
    outln!("identity holds: {}", yes_no(id.holds()));
    outln!("length-optimizing: {}", yes_no(opt.optimizing));
    if !opt.optimizing {
        outln!(
            "overhead: D = {} qubits per signal (K = {:?}, max |rho - omega| = {})",
            sig(opt.overhead, 12),
            opt.kraft,
            sig(opt.deviation, 3)
        );
    }
    let section = cfg.entropy.as_ref();
    let construction = section
        .and_then(|e| e.construction)
        .or(code_spec.construction)
        .unwrap_or(ConstructionName::ShannonFano);
    let blocks = section
        .and_then(|e| e.blocks.clone())
        .unwrap_or_else(|| vec![1, 2, 4]);
    let spectrum = ensemble.spectrum()?;
    outln!("block coding ({})", construction.name());
    outln!("n\t<l>/n\tS\tS+1/n\tbound holds");
    for n in blocks {
        let b = block_code(&spectrum, n, construction.construction())?;
        outln!(
            "{n}\t{}\t{}\t{}\t{}",
            sig(b.per_signal_length(), 6),
            sig(b.entropy, 6),
            sig(b.entropy + 1.0 / n as f64, 6),
            yes_no(b.bound_holds())
        );
    }
    Ok(())
}

struct Check {
    name: &'static str,
    run: fn() -> Result<String, String>,
}

fn sample_code() -> Result<(ClassicalCode, QuantumCode), String> {
    let c = ClassicalCode::parse(&["0", "10", "110", "111"]).map_err(|e| e.to_string())?;
    let q = zefcode::codes::lift_classical(&c, 3).map_err(|e| e.to_string())?;
    Ok((c, q))
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const CHECKS: &[Check] = &[
    Check {
        name: "kraft",
        run: || {
            let (_, q) = sample_code()?;
            let detail = format!("K = {:?}, d = {}", quantum_kraft_sum(&q), dims_list(&q));
            ensure(
                quantum_kraft_sum(&q) == 1.0 && is_prefix_free_quantum(&q) && q.dims().as_slice() == [1, 1, 2],
                detail,
            )
        },
    },
    Check {
        name: "condense",
        run: || {
            let (_, q) = sample_code()?;
            let words: Vec<SparseState> = ["100", "000"]
                .iter()
                .map(|b| zefcode::qstate::basis_state(&b.parse().expect("bitstring")))
                .collect();
            let cs = simple_condense(&q, &words).map_err(|e| e.to_string())?;
            let text = cs.state.to_string();
            ensure(text.starts_with("100000 1.0 "), text.trim_end().to_string())
        },
    },
    Check {
        name: "isometry",
        run: || {
            let (_, q) = sample_code()?;
            let iso = isometry_check(&q, 2).map_err(|e| e.to_string())?;
            ensure(
                iso.is_isometric(),
                format!("max Gram deviation {} over {} products", sig(iso.max_deviation, 3), iso.products),
            )
        },
    },
    Check {
        name: "machine",
        run: || {
            let (c, _) = sample_code()?;
            let words: Vec<BitString> = ["10", "0"].iter().map(|w| w.parse().expect("bitstring")).collect();
            let d = minimal_deadline(&c, 2);
            let run = run_condense_program(&c, &words, d).map_err(|e| e.to_string())?;
            let fs = &run.final_state;
            ensure(
                fs.clock == 2 * d && fs.ancillas_clear() && fs.tape.to_string() == "100000",
                format!("D = {d}, final clock = {}, tape = {}", fs.clock, fs.tape),
            )
        },
    },
    Check {
        name: "length identity",
        run: || {
            let (_, q) = sample_code()?;
            let e = Ensemble::from_basis(q, &[0.5, 0.25, 0.125, 0.125]).map_err(|e| e.to_string())?;
            let id = length_identity(&e).map_err(|e| e.to_string())?;
            let opt = length_optimizing_check(&e).map_err(|e| e.to_string())?;
            ensure(
                id.holds() && opt.optimizing,
                format!("<l> = {}, residual {}", sig(id.avg_length, 6), sig(id.residual, 3)),
            )
        },
    },
    Check {
        name: "sufficiency sweep",
        run: || {
            let (_, q) = sample_code()?;
            let e = Ensemble::from_basis(q, &[0.5, 0.25, 0.125, 0.125]).map_err(|e| e.to_string())?;
            let cfg = SweepConfig {
                n: 3,
                ells: (0..=9).collect(),
                samples: 0,
                seed: 0,
                sampling: Sampling::Exact,
            };
            let rows = sufficiency_experiment(&e, &cfg).map_err(|e| e.to_string())?;
            let ok = rows.iter().all(|r| {
                r.bound_lower <= r.avg_fidelity + 1e-9 && r.avg_fidelity <= r.bound_upper + 1e-9
            }) && rows.windows(2).all(|w| w[0].avg_fidelity <= w[1].avg_fidelity + 1e-12);
            ensure(ok, format!("{} rows within bounds, F(9) = {}", rows.len(), sig(rows[9].avg_fidelity, 6)))
        },
    },
    Check {
        name: "block coding",
        run: || {
            let per: Vec<f64> = [1, 2, 4]
                .iter()
                .map(|&n| {
                    block_code(&[0.9, 0.1], n, zefcode::compress::Construction::ShannonFano)
                        .map(|b| b.per_signal_length())
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<_, _>>()?;
            let text: Vec<String> = per.iter().map(|x| sig(*x, 6)).collect();
            ensure(per.windows(2).all(|w| w[1] < w[0]), format!("per-signal {}", text.join(", ")))
        },
    },
];

pub fn selftest() -> CliResult<()> {
    let mut failed = 0;
    for check in CHECKS {
        match (check.run)() {
            Ok(detail) => outln!("[PASS] {}: {detail}", check.name),
            Err(detail) => {
                failed += 1;
                outln!("[FAIL] {}: {detail}", check.name);
            }
        }
    }
    outln!("selftest: {} of {} checks passed", CHECKS.len() - failed, CHECKS.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{failed} selftest checks failed")))
    }
}
