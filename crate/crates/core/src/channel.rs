//! Rayleigh block-fading channel gains.
//!
//! Every link gain |h|² is exponential with mean equal to the link's
//! large-scale variance β. Gains are drawn by inverting the CDF of a single
//! uniform variate, so one frame costs exactly three uniforms.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The three physical links of the two-user cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkId {
    BsUe1,
    BsUe2,
    Ue1Ue2,
}

impl LinkId {
    pub const ALL: [LinkId; 3] = [LinkId::BsUe1, LinkId::BsUe2, LinkId::Ue1Ue2];
}

/// Large-scale variances of the three links.
///
/// UE1 is the strong user, so `beta_bs_ue1 > beta_bs_ue2` is enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    beta_bs_ue1: f64,
    beta_bs_ue2: f64,
    beta_ue1_ue2: f64,
}

impl ChannelStats {
    pub fn new(beta_bs_ue1: f64, beta_bs_ue2: f64, beta_ue1_ue2: f64) -> Result<Self> {
        for (key, beta) in [
            ("beta_bs_ue1", beta_bs_ue1),
            ("beta_bs_ue2", beta_bs_ue2),
            ("beta_ue1_ue2", beta_ue1_ue2),
        ] {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::param(
                    key,
                    format!("variance must be finite and > 0, got {beta}"),
                ));
            }
        }
        if beta_bs_ue1 <= beta_bs_ue2 {
            return Err(Error::param(
                "beta_bs_ue2",
                format!("strong-user ordering requires beta_bs_ue1 > beta_bs_ue2 ({beta_bs_ue1} <= {beta_bs_ue2})"),
            ));
        }
        Ok(ChannelStats {
            beta_bs_ue1,
            beta_bs_ue2,
            beta_ue1_ue2,
        })
    }

    pub fn beta(&self, link: LinkId) -> f64 {
        match link {
            LinkId::BsUe1 => self.beta_bs_ue1,
            LinkId::BsUe2 => self.beta_bs_ue2,
            LinkId::Ue1Ue2 => self.beta_ue1_ue2,
        }
    }

    pub fn beta_bs_ue1(&self) -> f64 {
        self.beta_bs_ue1
    }

    pub fn beta_bs_ue2(&self) -> f64 {
        self.beta_bs_ue2
    }

    pub fn beta_ue1_ue2(&self) -> f64 {
        self.beta_ue1_ue2
    }
}

impl Default for ChannelStats {
    fn default() -> Self {
        ChannelStats {
            beta_bs_ue1: 1.0,
            beta_bs_ue2: 0.05,
            beta_ue1_ue2: 0.8,
        }
    }
}

/// One frame's channel power gains |h|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    pub g_bs_ue1: f64,
    pub g_bs_ue2: f64,
    pub g_ue1_ue2: f64,
}

impl ChannelRealization {
    pub fn gain(&self, link: LinkId) -> f64 {
        match link {
            LinkId::BsUe1 => self.g_bs_ue1,
            LinkId::BsUe2 => self.g_bs_ue2,
            LinkId::Ue1Ue2 => self.g_ue1_ue2,
        }
    }
}

fn check_domain(beta: f64, x: f64) -> Result<()> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("variance must be > 0, got {beta}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("gain must be >= 0, got {x}")));
    }
    Ok(())
}

/// CDF of an exponential power gain with mean `beta`: 1 − exp(−x/β).
pub fn gain_cdf(beta: f64, x: f64) -> Result<f64> {
    check_domain(beta, x)?;
    Ok(-(-x / beta).exp_m1())
}

/// PDF of an exponential power gain with mean `beta`: exp(−x/β)/β.
pub fn gain_pdf(beta: f64, x: f64) -> Result<f64> {
    check_domain(beta, x)?;
    Ok((-x / beta).exp() / beta)
}

/// Exponential variate with mean `beta` from one uniform draw.
#[inline]
fn exponential<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    // random() is in [0, 1), so 1 - u is in (0, 1] and ln never sees zero.
    let u: f64 = rng.random();
    -beta * (1.0 - u).ln()
}

/// Draws one frame of independent gains, consuming three uniforms in link order.
pub fn sample_realization<R: Rng + ?Sized>(
    stats: &ChannelStats,
    rng: &mut R,
) -> ChannelRealization {
    ChannelRealization {
        g_bs_ue1: exponential(stats.beta_bs_ue1, rng),
        g_bs_ue2: exponential(stats.beta_bs_ue2, rng),
        g_ue1_ue2: exponential(stats.beta_ue1_ue2, rng),
    }
}

/// Counter-based stream address. The master seed and the (scheme, grid point)
/// coordinates form the ChaCha key; the chunk index selects the ChaCha stream.
/// Trials inside a chunk are consumed sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub master_seed: u64,
    pub scheme: u64,
    pub point: u64,
    pub chunk: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64, scheme: u64, point: u64, chunk: u64) -> Self {
        StreamKey {
            master_seed,
            scheme,
            point,
            chunk,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.scheme.to_le_bytes());
        key[16..24].copy_from_slice(&self.point.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.chunk);
        rng
    }
}
