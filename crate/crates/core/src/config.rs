use serde::{Deserialize, Serialize};

/// Resource caps and tunable constants shared across modules.
///
/// Every knob here is a plain default; the CLI can override each one from
/// flags or a JSON config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Vertex cap for the polynomial counting kernel.
    pub poly_n_cap: u32,
    /// Matching-size cap for the sparse counting kernel.
    pub sparse_l_cap: usize,
    /// Vertex cap for the sparse counting kernel.
    pub sparse_n_cap: u32,
    /// Vertex cap for the exhaustive distribution oracle.
    pub exact_n_cap: u32,
    /// Cap on the number of matchings an enumeration may produce.
    pub enum_cap: u64,
    /// Cap on the number of ordered pairs a census may visit.
    pub pair_cap: u64,
    /// Cap on the number of k-tuples a tuple sum may visit.
    pub tuple_cap: u64,
    /// Regime threshold constant: l / (n sqrt(p)) compared against c.
    pub regime_c: f64,
    /// Relative tolerance band around c that classifies as "boundary".
    pub regime_tol: f64,
    /// Tail cut fraction delta; gamma = floor(delta * l).
    pub delta: f64,
    /// Hard error threshold on the fraction of zero counts excluded from
    /// the log-normalized statistic.
    pub zero_exclusion_max: f64,
    /// Experiments require 1 - p >= this value.
    pub min_one_minus_p: f64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            poly_n_cap: 28,
            sparse_l_cap: 4,
            sparse_n_cap: 1000,
            exact_n_cap: 7,
            enum_cap: 100_000,
            pair_cap: 100_000_000,
            tuple_cap: 10_000_000,
            regime_c: 1.0,
            regime_tol: 0.1,
            delta: 0.9,
            zero_exclusion_max: 0.01,
            min_one_minus_p: 0.01,
        }
    }
}
