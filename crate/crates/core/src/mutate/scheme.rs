use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Prompt transformation scheme. Declaration order is the canonical order:
/// the unmutated prompt first, then identifier-, instruction- and
/// block-level schemes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum SchemeId {
    #[serde(rename = "ORIGINAL")]
    Original,
    /// Rename the first parameter to a fixed placeholder.
    #[serde(rename = "REP_R")]
    RepR,
    /// Rename the first parameter to `<function>_<parameter>`.
    #[serde(rename = "REP_C")]
    RepC,
    /// Rename the first local to a fixed placeholder.
    #[serde(rename = "REL_R")]
    RelR,
    /// Rename the first local to `<function>_<local>`.
    #[serde(rename = "REL_C")]
    RelC,
    /// Expand a compound assignment into its long form.
    #[serde(rename = "IRR")]
    Irr,
    /// Conjoin an if-condition with `True`.
    #[serde(rename = "RTF")]
    Rtf,
    /// Insert an `if False:` dead branch.
    #[serde(rename = "GRA_R")]
    GraR,
    /// Insert a dead branch guarded by `p != p` on the first parameter.
    #[serde(rename = "GRA_C")]
    GraC,
    /// Insert a `print` of the function name.
    #[serde(rename = "INI")]
    Ini,
}

impl SchemeId {
    pub const ALL: [SchemeId; 10] = [
        SchemeId::Original,
        SchemeId::RepR,
        SchemeId::RepC,
        SchemeId::RelR,
        SchemeId::RelC,
        SchemeId::Irr,
        SchemeId::Rtf,
        SchemeId::GraR,
        SchemeId::GraC,
        SchemeId::Ini,
    ];

    /// The nine mutating schemes, without `ORIGINAL`.
    pub const MUTATIONS: [SchemeId; 9] = [
        SchemeId::RepR,
        SchemeId::RepC,
        SchemeId::RelR,
        SchemeId::RelC,
        SchemeId::Irr,
        SchemeId::Rtf,
        SchemeId::GraR,
        SchemeId::GraC,
        SchemeId::Ini,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::Original => "ORIGINAL",
            SchemeId::RepR => "REP_R",
            SchemeId::RepC => "REP_C",
            SchemeId::RelR => "REL_R",
            SchemeId::RelC => "REL_C",
            SchemeId::Irr => "IRR",
            SchemeId::Rtf => "RTF",
            SchemeId::GraR => "GRA_R",
            SchemeId::GraC => "GRA_C",
            SchemeId::Ini => "INI",
        }
    }

    /// Schemes that only rename identifiers and therefore must leave the
    /// erased node-kind sequence untouched.
    pub fn is_identifier_level(self) -> bool {
        matches!(
            self,
            SchemeId::RepR | SchemeId::RepC | SchemeId::RelR | SchemeId::RelC
        )
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scheme {0:?}")]
pub struct UnknownScheme(pub String);

impl FromStr for SchemeId {
    type Err = UnknownScheme;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let wanted = s.trim().to_ascii_uppercase();
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str() == wanted)
            .ok_or_else(|| UnknownScheme(s.to_string()))
    }
}
