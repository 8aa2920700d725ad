//! Stage helpers shared by the command line and the end-to-end tests.

use crate::basis::OrthoBasis;
use crate::distribution::GaussianMixture;
use crate::error::Result;

/// Bases for a surrogate of order `p` and its order-`2p` exactness conditions.
#[derive(Clone, Debug)]
pub struct Bases {
    pub surrogate: OrthoBasis,
    pub exactness: OrthoBasis,
}

/// Moments to order `4p`, Gram-Schmidt at order `2p`, truncated to `p`.
pub fn build_bases(gm: &GaussianMixture, p: u32) -> Result<Bases> {
    let moments = gm.raw_moments(4 * p)?;
    let exactness = OrthoBasis::gram_schmidt(&moments, 2 * p)?;
    Ok(Bases {
        surrogate: exactness.truncate(p),
        exactness,
    })
}
