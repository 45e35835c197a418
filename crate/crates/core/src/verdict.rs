use serde::{Deserialize, Serialize};

/// Finite evidence behind a verdict: enough indices and values to replay it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub note: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl Witness {
    pub fn new(note: impl Into<String>) -> Self {
        Witness {
            note: note.into(),
            ..Default::default()
        }
    }

    pub fn indices(mut self, idx: impl IntoIterator<Item = usize>) -> Self {
        self.indices.extend(idx);
        self
    }

    pub fn values(mut self, vals: impl IntoIterator<Item = f64>) -> Self {
        self.values.extend(vals);
        self
    }
}

/// Tri-state outcome of a finite-prefix check of an infinite-sequence claim.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Certified(Witness),
    Refuted(Witness),
    Undetermined { reason: String },
}

impl Verdict {
    pub fn certified(w: Witness) -> Self {
        Verdict::Certified(w)
    }

    pub fn refuted(w: Witness) -> Self {
        Verdict::Refuted(w)
    }

    pub fn undetermined(reason: impl Into<String>) -> Self {
        Verdict::Undetermined {
            reason: reason.into(),
        }
    }

    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, Verdict::Undetermined { .. })
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Certified(w) | Verdict::Refuted(w) => Some(w),
            Verdict::Undetermined { .. } => None,
        }
    }

    /// Short label used in reports and diagnostics.
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Certified(_) => "certified",
            Verdict::Refuted(_) => "refuted",
            Verdict::Undetermined { .. } => "undetermined",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Verdict::Certified(w) | Verdict::Refuted(w) => format!("{}: {}", self.label(), w.note),
            Verdict::Undetermined { reason } => format!("undetermined: {reason}"),
        }
    }
}

/// Shared vocabulary for every finite-prefix certification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Dispersion bound for "these values agree in the limit".
    pub eps: f64,
    /// Length of the tail window that testers inspect.
    pub window: usize,
    /// Materialization cap for generated sequences.
    pub max_prefix: usize,
    /// Running values above `divergence_bound * (1 + first)` count as divergent.
    pub divergence_bound: f64,
    /// Random index pairs drawn per distance-structure test.
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps: 1e-7,
            window: 64,
            max_prefix: 100_000,
            divergence_bound: 1e6,
            random_pairs: 256,
            seed: 0x5eed_1f1c,
        }
    }
}

impl Tolerances {
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window = window;
        self
    }

    pub fn validate(&self) -> crate::Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(crate::Error::invalid("tolerances.eps must be positive and finite"));
        }
        if self.window < 2 {
            return Err(crate::Error::invalid("tolerances.window must be at least 2"));
        }
        if self.max_prefix < self.window {
            return Err(crate::Error::invalid("tolerances.max_prefix must be >= window"));
        }
        if !(self.divergence_bound > 0.0) {
            return Err(crate::Error::invalid("tolerances.divergence_bound must be positive"));
        }
        Ok(())
    }
}
