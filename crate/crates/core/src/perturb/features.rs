use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spectral::{self, Band, LaplacianKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMode {
    /// Projection onto eigen-index bands; needs a dense eigendecomposition.
    Hard,
    /// Polynomial filters of the diffusion operator.
    Wavelet,
    /// `Hard` when the graph fits under the dense limit, else `Wavelet`.
    Auto,
}

impl std::str::FromStr for BandMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(BandMode::Hard),
            "wavelet" => Ok(BandMode::Wavelet),
            "auto" => Ok(BandMode::Auto),
            _ => Err(Error::InvalidArgument(format!("unknown band mode '{s}'"))),
        }
    }
}

pub fn no_node_ftrs(g: &Graph) -> Graph {
    g.with_features(Array2::ones((g.num_nodes(), 1)))
        .expect("row count matches")
}

/// One-hot of `min(degree, cap)`, width `cap + 1`.
pub fn node_deg(g: &Graph, cap: usize) -> Graph {
    let n = g.num_nodes();
    let mut x = Array2::zeros((n, cap + 1));
    for u in 0..n {
        x[[u, g.degree(u).min(cap)]] = 1.0;
    }
    g.with_features(x).expect("row count matches")
}

/// One scalar feature per node drawn from U[-1, 1].
pub fn rand_ftrs<R: Rng>(g: &Graph, rng: &mut R) -> Graph {
    let n = g.num_nodes();
    let x = Array2::from_shape_simple_fn((n, 1), || rng.gen_range(-1.0..=1.0));
    g.with_features(x).expect("row count matches")
}

pub fn bandpass(g: &Graph, band: Band, mode: BandMode, dense_limit: usize) -> Result<Graph> {
    if g.feature_dim() == 0 {
        return Err(Error::Unsupported("band-pass filtering needs node features".into()));
    }
    let hard = match mode {
        BandMode::Hard => true,
        BandMode::Wavelet => false,
        BandMode::Auto => g.num_nodes() <= dense_limit,
    };
    let x = if hard {
        let dec = spectral::eigendecompose(
            &spectral::normalized_laplacian(g),
            LaplacianKind::Normalized,
            dense_limit,
        )?;
        spectral::hard_bandpass(g.features(), &dec, band)?
    } else {
        spectral::wavelet_filter(g.features(), g, band)?
    };
    g.with_features(x)
}
