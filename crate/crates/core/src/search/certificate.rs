//! Certificates: the auditable product of every solve.
//!
//! A solubility certificate carries a vector mod p^K together with the
//! Hensel witness that produced it; an insolubility certificate carries the
//! exhaustively verified claim "no primitive zero mod p^m" (which, for a
//! homogeneous form, rules out every nontrivial zero over Q_p) plus the
//! per-block histograms and inclusion-exclusion ledger when the split
//! convolution route produced it. Reports contain no timestamps or machine
//! state: identical inputs give byte-identical JSON.

use num_bigint::BigUint;
use serde::Serialize;

use super::histogram::SplitCount;
use crate::lifting::LiftWitness;

pub const CERTIFICATE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct WitnessJson {
    /// Newton coordinate.
    pub index: usize,
    /// Valuation of the chosen partial derivative at the seed.
    pub e: u32,
    /// Exact v_p(f(seed)); absent when the seed is an exact integer zero.
    pub seed_valuation: Option<u64>,
    pub seed: Vec<i64>,
}

impl From<&LiftWitness> for WitnessJson {
    fn from(w: &LiftWitness) -> Self {
        WitnessJson {
            index: w.index,
            e: w.derivative_valuation,
            seed_valuation: w.level,
            seed: w.seed.clone(),
        }
    }
}

/// How a solved model relates to the input form:
/// `form(p^{scales[i]} * x_i) = p^shift_total * normalized_form(x)`.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct NormalizationJson {
    pub normalized_form: String,
    /// p-exponent divided out overall.
    pub shift_total: u32,
    /// per-variable scaling exponents applied to the input form's variables
    pub variable_scales: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolubilityCertificate {
    pub schema_version: u32,
    pub kind: String,
    pub p: u64,
    /// achieved precision K: the vector is a zero mod p^level
    pub level: u32,
    pub modulus: String,
    /// canonical rendering of the input form
    pub form: String,
    /// zero vector mod p^level, decimal strings
    pub vector: Vec<String>,
    pub witness: WitnessJson,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationJson>,
    pub trace: Vec<String>,
    #[serde(skip)]
    pub vector_residues: Vec<BigUint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvolutionLedgerJson {
    pub all_zeros: String,
    pub divisible_zeros: String,
    pub primitive_zeros: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockHistogramJson {
    /// 1-based global variable indices of the block
    pub variables: Vec<usize>,
    pub weight: String,
    pub block_form: String,
    pub modulus: u64,
    /// counts over all block vectors; omitted for very large moduli
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divisible: Option<Vec<u64>>,
    pub all_zero_count: u64,
    pub divisible_zero_count: u64,
}

/// Histograms longer than this are summarized rather than embedded.
const MAX_EMBEDDED_HISTOGRAM: u64 = 65_536;

#[derive(Debug, Clone, Serialize)]
pub struct InsolubilityCertificate {
    pub schema_version: u32,
    pub kind: String,
    pub p: u64,
    /// exponent m: no primitive zero mod p^level
    pub level: u32,
    pub modulus: String,
    pub form: String,
    /// "direct-enumeration" or "split-convolution"
    pub method: String,
    pub primitive_zero_count: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points_checked: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ledger: Option<ConvolutionLedgerJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_histograms: Option<Vec<BlockHistogramJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationJson>,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnknownReport {
    pub schema_version: u32,
    pub kind: String,
    pub p: u64,
    /// deepest level attempted
    pub level: u32,
    pub form: String,
    pub budget: u64,
    pub trace: Vec<String>,
}

/// The three-way result of a solve: certified soluble, certified insoluble,
/// or an honest Unknown.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Soluble(SolubilityCertificate),
    Insoluble(InsolubilityCertificate),
    Unknown(UnknownReport),
}

impl Outcome {
    pub fn kind(&self) -> &str {
        match self {
            Outcome::Soluble(_) => "soluble",
            Outcome::Insoluble(_) => "insoluble",
            Outcome::Unknown(_) => "unknown",
        }
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self, Outcome::Unknown(_))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable report");
        s.push('\n');
        s
    }
}

pub(crate) fn block_histograms_json(
    split: &crate::forms::SplitForm,
    count: &SplitCount,
) -> Vec<BlockHistogramJson> {
    split
        .blocks()
        .iter()
        .zip(&count.histograms)
        .map(|(block, hist)| {
            let embed = hist.modulus <= MAX_EMBEDDED_HISTOGRAM;
            BlockHistogramJson {
                variables: block.variables.iter().map(|v| v + 1).collect(),
                weight: block.weight.to_string(),
                block_form: block.form.to_string(),
                modulus: hist.modulus,
                all: embed.then(|| hist.all.clone()),
                divisible: embed.then(|| hist.divisible.clone()),
                all_zero_count: hist.all[0],
                divisible_zero_count: hist.divisible[0],
            }
        })
        .collect()
}

pub(crate) fn ledger_json(count: &SplitCount) -> ConvolutionLedgerJson {
    ConvolutionLedgerJson {
        all_zeros: count.all_zeros.to_string(),
        divisible_zeros: count.divisible_zeros.to_string(),
        primitive_zeros: count.primitive_zeros.to_string(),
    }
}
