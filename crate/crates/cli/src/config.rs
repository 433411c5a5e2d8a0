//! Experiment configuration: a TOML document with optional `[code]`,
//! `[ensemble]`, `[condense]`, `[compress]` and `[entropy]` sections.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use zefcode::bits::BitString;
use zefcode::codes::{
    canonical_codewords, huffman_lengths, shannon_fano_lengths, ClassicalCode, QuantumCode,
};
use zefcode::compress::{Construction, Ensemble};
use zefcode::qstate::basis_state;
use zefcode::SparseState;

use crate::error::{CliError, CliResult};
use crate::format::parse_amplitude;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub code: Option<CodeSpec>,
    pub ensemble: Option<EnsembleSpec>,
    pub condense: Option<CondenseSpec>,
    pub compress: Option<CompressSpec>,
    pub entropy: Option<EntropySpec>,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub words: Option<Vec<String>>,
    pub lengths: Option<Vec<usize>>,
    pub spectrum: Option<Vec<f64>>,
    pub construction: Option<ConstructionName>,
    /// One table per basis payload, mapping bitstrings to "re im".
    pub payloads: Option<Vec<BTreeMap<String, String>>>,
    pub l_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionName {
    Huffman,
    ShannonFano,
}

impl ConstructionName {
    pub fn construction(self) -> Construction {
        match self {
            ConstructionName::Huffman => Construction::Huffman,
            ConstructionName::ShannonFano => Construction::ShannonFano,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstructionName::Huffman => "huffman",
            ConstructionName::ShannonFano => "shannon-fano",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub probs: Option<Vec<f64>>,
    pub codewords: Option<Vec<String>>,
    pub states: Option<Vec<StateSpec>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub prob: f64,
    pub amplitudes: BTreeMap<String, String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondenseSpec {
    pub words: Option<Vec<String>>,
    pub files: Option<Vec<PathBuf>>,
    pub deadline: Option<u64>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum EllSpec {
    List(Vec<usize>),
    Range(String),
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingName {
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompressSpec {
    pub n: OneOrMany,
    #[serde(default)]
    pub deltas: Vec<f64>,
    pub ells: Option<EllSpec>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sampling: SamplingName,
    pub out: Option<PathBuf>,
    pub necessity: Option<NecessitySpec>,
}

fn default_samples() -> usize {
    10_000
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NecessitySpec {
    /// Fixed k; when absent each row takes the smallest bound over k.
    pub k: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySpec {
    pub blocks: Option<Vec<usize>>,
    pub construction: Option<ConstructionName>,
}

impl Config {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let mut cfg: Config = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn code_spec(&self) -> CliResult<&CodeSpec> {
        self.code
            .as_ref()
            .ok_or_else(|| CliError::Validation("config has no [code] section".into()))
    }
}

fn parse_word(field: &str, text: &str) -> CliResult<BitString> {
    text.parse()
        .map_err(|e| CliError::Validation(format!("{field}: {e}")))
}

/// The classical side of a code specification.
pub enum ClassicalSource {
    Code(ClassicalCode),
    /// Lengths that admit no prefix code; carries the Kraft sum.
    KraftViolated(f64),
    /// Only payload amplitudes were given.
    None,
}

impl CodeSpec {
    fn check_single_source(&self) -> CliResult<()> {
        let given = [
            self.words.is_some(),
            self.lengths.is_some(),
            self.spectrum.is_some(),
            self.payloads.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        match given {
            1 => Ok(()),
            0 => Err(CliError::Validation("code: no codewords".into())),
            _ => Err(CliError::Validation(
                "code: give exactly one of words, lengths, spectrum, payloads".into(),
            )),
        }
    }

    pub fn construction(&self) -> ConstructionName {
        self.construction.unwrap_or(ConstructionName::Huffman)
    }

    pub fn classical(&self) -> CliResult<ClassicalSource> {
        self.check_single_source()?;
        if let Some(words) = &self.words {
            if words.is_empty() {
                return Err(CliError::Validation("code.words: no codewords".into()));
            }
            let parsed = words
                .iter()
                .enumerate()
                .map(|(i, w)| parse_word(&format!("code.words[{i}]"), w))
                .collect::<CliResult<Vec<_>>>()?;
            return Ok(ClassicalSource::Code(ClassicalCode::new(parsed)?));
        }
        let lengths = match (&self.lengths, &self.spectrum) {
            (Some(lengths), _) => lengths.clone(),
            (None, Some(spectrum)) => match self.construction() {
                ConstructionName::Huffman => huffman_lengths(spectrum)?,
                ConstructionName::ShannonFano => shannon_fano_lengths(spectrum)?,
            },
            (None, None) => return Ok(ClassicalSource::None),
        };
        if lengths.is_empty() {
            return Err(CliError::Validation("code.lengths: no codewords".into()));
        }
        match canonical_codewords(&lengths) {
            Ok(words) => Ok(ClassicalSource::Code(ClassicalCode::new(words)?)),
            Err(zefcode::Error::KraftViolation(k)) => Ok(ClassicalSource::KraftViolated(k)),
            Err(e) => Err(e.into()),
        }
    }

    fn l_max_for(&self, natural: usize) -> CliResult<usize> {
        match self.l_max {
            Some(l) if l < natural => Err(CliError::Validation(format!(
                "code.l_max = {l} is shorter than the longest codeword ({natural})"
            ))),
            Some(l) => Ok(l),
            None => Ok(natural),
        }
    }

    /// Quantum code built from payload tables.
    fn payload_code(&self, payloads: &[BTreeMap<String, String>]) -> CliResult<QuantumCode> {
        if payloads.is_empty() {
            return Err(CliError::Validation("code.payloads: no codewords".into()));
        }
        let mut states = Vec::with_capacity(payloads.len());
        for (i, table) in payloads.iter().enumerate() {
            let field = format!("code.payloads[{i}]");
            states.push(state_from_table(&field, table, None)?);
        }
        let natural = states.iter().map(SparseState::num_qubits).max().unwrap_or(1);
        let l_max = self.l_max_for(natural)?;
        let mut sectors = vec![Vec::new(); l_max];
        for s in states {
            sectors[s.num_qubits() - 1].push(s);
        }
        Ok(QuantumCode::new(l_max, sectors)?)
    }
}

/// A state from a `bitstring → "re im"` table. With `width`, shorter
/// bitstrings are zero-extended to it.
pub fn state_from_table(
    field: &str,
    table: &BTreeMap<String, String>,
    width: Option<usize>,
) -> CliResult<SparseState> {
    if table.is_empty() {
        return Err(CliError::Validation(format!("{field}: no amplitudes")));
    }
    let mut terms = Vec::with_capacity(table.len());
    for (bits, amp) in table {
        let mut word = parse_word(&format!("{field}.{bits}"), bits)?;
        if let Some(w) = width {
            if word.len() > w {
                return Err(CliError::Validation(format!(
                    "{field}.{bits}: longer than the {w}-qubit register"
                )));
            }
            word = word.zero_extend(w)?;
        }
        let a = parse_amplitude(amp).map_err(|e| CliError::Validation(format!("{field}.{bits}: {e}")))?;
        terms.push((word.to_string(), a));
    }
    normalized_terms(field, terms)
}

/// Normalizes after checking the norm is close to one, so rounded inputs
/// such as 0.7071 are accepted and typos are not.
pub fn normalized_terms(field: &str, terms: Vec<(String, Complex64)>) -> CliResult<SparseState> {
    let norm_sqr: f64 = terms.iter().map(|(_, a)| a.norm_sqr()).sum();
    if (norm_sqr - 1.0).abs() > 1e-3 {
        return Err(CliError::Validation(format!(
            "{field}: squared norm {norm_sqr} is not 1"
        )));
    }
    Ok(SparseState::from_bitstrings(
        terms.iter().map(|(b, a)| (b.as_str(), *a)),
    )?)
}

/// A code specification resolved into the objects the commands use.
pub struct BuiltCode {
    pub classical: Option<ClassicalCode>,
    pub quantum: QuantumCode,
}

impl BuiltCode {
    pub fn from_spec(spec: &CodeSpec) -> CliResult<Self> {
        if let Some(payloads) = &spec.payloads {
            spec.check_single_source()?;
            let quantum = spec.payload_code(payloads)?;
            return Ok(Self {
                classical: quantum.classical_payloads(),
                quantum,
            });
        }
        let classical = match spec.classical()? {
            ClassicalSource::Code(c) => c,
            ClassicalSource::KraftViolated(k) => {
                return Err(zefcode::Error::KraftViolation(k).into())
            }
            ClassicalSource::None => return Err(CliError::Validation("code: no codewords".into())),
        };
        let l_max = spec.l_max_for(classical.max_length())?;
        let quantum = QuantumCode::from_classical_payloads(&classical, l_max)?;
        Ok(Self {
            classical: Some(classical),
            quantum,
        })
    }

    /// Zef basis state of a listed codeword.
    pub fn codeword_state(&self, field: &str, text: &str) -> CliResult<SparseState> {
        let word = parse_word(field, text)?;
        let known = self.classical.as_ref().is_some_and(|c| c.contains(&word));
        if !known {
            return Err(CliError::Validation(format!(
                "{field}: {text:?} is not a codeword"
            )));
        }
        Ok(basis_state(&word.zero_extend(self.quantum.l_max())?))
    }
}

impl EnsembleSpec {
    pub fn build(&self, code: &BuiltCode) -> CliResult<Ensemble> {
        let entries = match (&self.codewords, &self.states) {
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "ensemble: give either codewords or states, not both".into(),
                ))
            }
            (Some(words), None) => {
                let probs = self.probs_for(words.len())?;
                words
                    .iter()
                    .enumerate()
                    .zip(probs)
                    .map(|((i, w), p)| Ok((p, code.codeword_state(&format!("ensemble.codewords[{i}]"), w)?)))
                    .collect::<CliResult<Vec<_>>>()?
            }
            (None, Some(states)) => {
                if self.probs.is_some() {
                    return Err(CliError::Validation(
                        "ensemble.probs: explicit states carry their own prob".into(),
                    ));
                }
                let l_max = code.quantum.l_max();
                states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        let field = format!("ensemble.states[{i}]");
                        Ok((s.prob, state_from_table(&field, &s.amplitudes, Some(l_max))?))
                    })
                    .collect::<CliResult<Vec<_>>>()?
            }
            (None, None) => {
                let Some(classical) = &code.classical else {
                    return Err(CliError::Validation(
                        "ensemble: payload codes need explicit states".into(),
                    ));
                };
                let probs = self.probs_for(classical.len())?;
                let l_max = code.quantum.l_max();
                classical
                    .codewords()
                    .iter()
                    .zip(probs)
                    .map(|(w, p)| Ok((p, basis_state(&w.zero_extend(l_max)?))))
                    .collect::<CliResult<Vec<_>>>()?
            }
        };
        Ok(Ensemble::new(code.quantum.clone(), entries)?)
    }

    /// The listed probabilities, or a uniform distribution when none are given.
    fn probs_for(&self, count: usize) -> CliResult<Vec<f64>> {
        match &self.probs {
            Some(p) if p.len() != count => Err(CliError::Validation(format!(
                "ensemble.probs: {} probabilities for {count} codewords",
                p.len()
            ))),
            Some(p) => Ok(p.clone()),
            None => Ok(vec![1.0 / count as f64; count]),
        }
    }
}

/// The ensemble section, or the code's own spectrum when the code was built
/// from one.
pub fn build_ensemble(cfg: &Config, code: &BuiltCode) -> CliResult<Ensemble> {
    match (&cfg.ensemble, cfg.code.as_ref().and_then(|c| c.spectrum.as_ref())) {
        (Some(spec), _) => spec.build(code),
        (None, Some(spectrum)) => EnsembleSpec {
            probs: Some(spectrum.clone()),
            ..EnsembleSpec::default()
        }
        .build(code),
        (None, None) => Err(CliError::Validation("config has no [ensemble] section".into())),
    }
}

impl OneOrMany {
    pub fn values(&self) -> Vec<usize> {
        match self {
            OneOrMany::One(n) => vec![*n],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

impl EllSpec {
    /// ℓ values; a range is written "lo..=hi" or "lo..hi".
    pub fn values(&self) -> CliResult<Vec<usize>> {
        match self {
            EllSpec::List(v) => Ok(v.clone()),
            EllSpec::Range(text) => {
                let bad = || CliError::Validation(format!("compress.ells: cannot parse range {text:?}"));
                let (lo, hi, inclusive) = if let Some((a, b)) = text.split_once("..=") {
                    (a, b, true)
                } else if let Some((a, b)) = text.split_once("..") {
                    (a, b, false)
                } else {
                    return Err(bad());
                };
                let lo: usize = lo.trim().parse().map_err(|_| bad())?;
                let hi: usize = hi.trim().parse().map_err(|_| bad())?;
                Ok(if inclusive { (lo..=hi).collect() } else { (lo..hi).collect() })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Config {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn code_sources() {
        let cfg = parse("[code]\nwords = [\"0\", \"10\", \"110\", \"111\"]\n");
        let code = BuiltCode::from_spec(cfg.code_spec().unwrap()).unwrap();
        assert_eq!(code.quantum.l_max(), 3);
        assert_eq!(code.quantum.dims().as_slice(), &[1, 1, 2]);

        let cfg = parse("[code]\nspectrum = [0.5, 0.25, 0.125, 0.125]\n");
        let code = BuiltCode::from_spec(cfg.code_spec().unwrap()).unwrap();
        assert_eq!(code.classical.unwrap().lengths(), vec![1, 2, 3, 3]);

        let cfg = parse("[code]\nlengths = [1, 1, 1]\n");
        assert!(matches!(
            cfg.code_spec().unwrap().classical().unwrap(),
            ClassicalSource::KraftViolated(k) if k == 1.5
        ));

        let cfg = parse("[code]\nwords = [\"0\"]\nlengths = [1]\n");
        assert!(BuiltCode::from_spec(cfg.code_spec().unwrap()).is_err());
    }

    #[test]
    fn payload_tables() {
        let cfg = parse(
            "[code]\npayloads = [{ \"0\" = \"1 0\" }, { \"10\" = \"0.6 0\", \"11\" = \"0 0.8\" }]\n",
        );
        let code = BuiltCode::from_spec(cfg.code_spec().unwrap()).unwrap();
        assert_eq!(code.quantum.dims().as_slice(), &[1, 1]);
        assert!(code.classical.is_none());
    }

    #[test]
    fn ensembles_resolve_codewords() {
        let cfg = parse(
            "[code]\nwords = [\"0\", \"10\", \"11\"]\n[ensemble]\nprobs = [0.5, 0.5]\ncodewords = [\"0\", \"11\"]\n",
        );
        let code = BuiltCode::from_spec(cfg.code_spec().unwrap()).unwrap();
        let e = build_ensemble(&cfg, &code).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e.avg_length() - 1.5).abs() < 1e-12);

        let cfg = parse("[code]\nwords = [\"0\", \"10\"]\n[ensemble]\ncodewords = [\"1\"]\n");
        let code = BuiltCode::from_spec(cfg.code_spec().unwrap()).unwrap();
        let err = build_ensemble(&cfg, &code).unwrap_err();
        assert!(err.to_string().contains("not a codeword"));
    }

    #[test]
    fn ell_ranges() {
        let cfg = parse("[compress]\nn = 2\nells = \"1..=3\"\n");
        assert_eq!(cfg.compress.unwrap().ells.unwrap().values().unwrap(), vec![1, 2, 3]);
        let cfg = parse("[compress]\nn = [2, 3]\nells = [4, 5]\n");
        let c = cfg.compress.unwrap();
        assert_eq!(c.n.values(), vec![2, 3]);
        assert_eq!(c.ells.unwrap().values().unwrap(), vec![4, 5]);
    }
}
