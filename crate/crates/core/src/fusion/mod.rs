//! Gated cross-modal attention classifier trained with focal loss, plus the
//! ablation variants.

mod focal;
mod model;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use focal::{balanced_alpha, focal_grad_logits, focal_loss, focal_term, P_CLAMP};
pub use model::{train_triad, AttentionMaps, ConcatInput, FusionTrace, TriadConfig, TriadModel, TRIAD_BUNDLE_KIND};

use crate::Error;

/// Which arm of the model family to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Full,
    /// Affect tags come from the comment alone, no retrieved passages.
    NoRag,
    /// Stress one-hot zeroed in the text vector.
    NoStress,
    /// Fused vector is the plain concatenation `[a_tab ‖ a_txt]`.
    NoGate,
    /// Tabular MLP on `X_tab` only.
    TabularOnly,
    /// Same MLP on `X_txt` only.
    TextOnly,
}

impl Variant {
    pub const ABLATIONS: [Variant; 5] = [
        Variant::NoRag,
        Variant::NoStress,
        Variant::NoGate,
        Variant::TabularOnly,
        Variant::TextOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoRag => "no_rag",
            Variant::NoStress => "no_stress",
            Variant::NoGate => "no_gate",
            Variant::TabularOnly => "tabular_only",
            Variant::TextOnly => "text_only",
        }
    }

    pub fn parse(s: &str) -> crate::Result<Self> {
        let v = match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "full" | "triad" => Variant::Full,
            "no_rag" => Variant::NoRag,
            "no_stress" => Variant::NoStress,
            "no_gate" => Variant::NoGate,
            "tabular_only" => Variant::TabularOnly,
            "text_only" => Variant::TextOnly,
            _ => return Err(Error::UnknownVariant(s.to_string())),
        };
        Ok(v)
    }

    pub fn uses_retrieval(self) -> bool {
        self != Variant::NoRag
    }

    pub fn uses_stress(self) -> bool {
        self != Variant::NoStress
    }

    /// Single-branch MLP instead of the fusion model.
    pub fn single_branch(self) -> bool {
        matches!(self, Variant::TabularOnly | Variant::TextOnly)
    }

    /// Fusion config for this arm.
    pub fn triad_config(self, base: &TriadConfig) -> TriadConfig {
        TriadConfig {
            gated: self != Variant::NoGate,
            ..base.clone()
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        Variant::parse(s)
    }
}
