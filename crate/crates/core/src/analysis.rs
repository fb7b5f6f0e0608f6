//! Closed-form outage analysis.
//!
//! Notation follows the frame layout in [`crate::schemes`]: α₁ᵗ¹/α₂ᵗ¹ is the
//! t1 power split between UE1 and UE2, α_BSᵗ²/α_UE2ᵗ² the t2 split between
//! UE1's uplink and the relayed s2, and every γ is a linear SINR threshold.
//!
//! The UE2 downlink outage needs Q₃ = Pr{SINR_UE2ᵗ¹ + SINR_UE2ᵗ² < γ₂ᴰᴸ}, which
//! has no elementary closed form. [`q3_gauss_chebyshev`] is the n-term
//! Chebyshev approximation; [`q3_numeric_oracle`] integrates the same event by
//! adaptive Gauss-Kronrod over the exact SINR distributions and is the
//! reference the approximation is checked against.

use std::f64::consts::PI;

use crate::channel::{gain_cdf, gain_pdf, ChannelStats};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::schemes::{Link, PowerAllocation, RateTargets, Scheme, SinrThresholds};
use crate::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    n_terms: usize,
    oracle_tol: f64,
}

impl QuadratureConfig {
    pub fn new(n_terms: usize, oracle_tol: f64) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::param(
                "n_terms",
                "need at least one Gauss-Chebyshev term",
            ));
        }
        if !(oracle_tol > 0.0 && oracle_tol.is_finite()) {
            return Err(Error::param(
                "oracle_tol",
                format!("must be finite and > 0, got {oracle_tol}"),
            ));
        }
        Ok(QuadratureConfig {
            n_terms,
            oracle_tol,
        })
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn oracle_tol(&self) -> f64 {
        self.oracle_tol
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            n_terms: 100,
            oracle_tol: 1e-10,
        }
    }
}

/// SINR-domain constants shared by the downlink closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    /// α₂ᵗ¹ − α₁ᵗ¹·γ₂ᴰᴸ. UE1's SIC (and UE2's direct decode) is only possible when positive.
    pub sic_margin: f64,
    /// max(φ₂, γ₁ᴰᴸ/α₁ᵗ¹); `None` when `sic_margin <= 0`.
    pub phi1: Option<f64>,
    /// γ₂ᴰᴸ / sic_margin; `None` when `sic_margin <= 0`.
    pub phi2: Option<f64>,
    /// min(γ₂ᴰᴸ, α_UE2ᵗ²/α_BSᵗ²), the upper limit of the Q₃ integral.
    pub phi3: f64,
    pub gammas: SinrThresholds,
}

impl DerivedConstants {
    pub fn new(pa: &PowerAllocation, th: &SinrThresholds) -> Self {
        let g2 = th.g_ue2_dl;
        let sic_margin = pa.a_ue2_t1() - pa.a_ue1_t1() * g2;
        let phi2 = (sic_margin > 0.0).then(|| g2 / sic_margin);
        let phi1 = phi2.map(|p2| p2.max(th.g_ue1_dl / pa.a_ue1_t1()));
        DerivedConstants {
            sic_margin,
            phi1,
            phi2,
            phi3: g2.min(t2_sinr_cap(pa)),
            gammas: *th,
        }
    }

    fn require_margin(&self) -> Result<f64> {
        self.phi2.ok_or_else(|| {
            Error::RateCondition(format!(
                "alpha_ue2_t1 - alpha_ue1_t1 * gamma_ue2_dl = {} <= 0",
                self.sic_margin
            ))
        })
    }
}

/// α_UE2ᵗ²/α_BSᵗ², the supremum of SINR_UE2ᵗ² (+∞ without uplink power).
fn t2_sinr_cap(pa: &PowerAllocation) -> f64 {
    if pa.a_bs_t2() == 0.0 {
        f64::INFINITY
    } else {
        pa.a_ue2_t2() / pa.a_bs_t2()
    }
}

/// 1 − exp(−x/β) without the cancellation near zero.
fn exp_cdf(x: f64, beta: f64) -> f64 {
    -(-x / beta).exp_m1()
}

/// Pr{UE1 fails its downlink}: either the SIC on s2 or the decode of s1 fails.
pub fn pout_ue1_dl(
    pa: &PowerAllocation,
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
) -> f64 {
    match DerivedConstants::new(pa, th).phi1 {
        Some(phi1) => exp_cdf(phi1, stats.beta_bs_ue1() * rho),
        None => 1.0,
    }
}

/// Q₁ = Pr{UE1's SIC fails}, Q₂ = Pr{UE2's direct t1 decode fails}.
pub fn q1_q2(
    pa: &PowerAllocation,
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
) -> Result<(f64, f64)> {
    let phi2 = DerivedConstants::new(pa, th).require_margin()?;
    Ok((
        exp_cdf(phi2, stats.beta_bs_ue1() * rho),
        exp_cdf(phi2, stats.beta_bs_ue2() * rho),
    ))
}

/// Gauss-Chebyshev approximation of Q₃ with `quad.n_terms()` nodes.
pub fn q3_gauss_chebyshev(
    pa: &PowerAllocation,
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let dc = DerivedConstants::new(pa, th);
    dc.require_margin()?;
    if pa.a_ue2_t2() == 0.0 {
        // Nothing relayed: the combined SINR is the direct branch alone.
        return q1_q2(pa, th, rho, stats).map(|(_, q2)| q2);
    }
    let phi3 = dc.phi3;
    if phi3 == 0.0 {
        return Ok(0.0);
    }

    let a1 = pa.a_ue1_t1();
    let (a_bs, a_u) = (pa.a_bs_t2(), pa.a_ue2_t2());
    let (b2, b12) = (stats.beta_bs_ue2(), stats.beta_ue1_ue2());
    let gamma = th.g_ue2_dl;

    // F_SINR_t2(φ₃); the CDF argument diverges at the support edge, where it is 1.
    let cdf_phi3 = if phi3 >= t2_sinr_cap(pa) {
        1.0
    } else {
        exp_cdf(phi3 / (a_u - a_bs * phi3), b12 * rho)
    };

    let n = quad.n_terms();
    let mut sum = 0.0;
    for i in 1..=n {
        let theta = (2 * i - 1) as f64 * PI / (2 * n) as f64;
        let node = 0.5 * phi3 * (1.0 + theta.cos());
        let relay_den = a_u - a_bs * node;
        let direct_den = dc.sic_margin + a1 * node;
        if !(direct_den > 0.0) || !(relay_den > 0.0) {
            return Err(Error::Quadrature(format!(
                "g(x) undefined at node {i} (x = {node}): a2 - a1*gamma + a1*x = {direct_den}, a_ue2_t2 - a_bs_t2*x = {relay_den}"
            )));
        }
        let g = (-node / (relay_den * b12 * rho) - (gamma - node) / (direct_den * b2 * rho)).exp()
            / (relay_den * relay_den);
        sum += PI / n as f64 * theta.sin().abs() * g;
    }
    Ok(cdf_phi3 - a_u * phi3 / (2.0 * b12 * rho) * sum)
}

/// CDF of SINR_UE2ᵗ¹ = g₂α₂/(g₂α₁ + 1/ρ), capped at α₂/α₁.
fn sinr_t1_ue2_cdf(pa: &PowerAllocation, stats: &ChannelStats, rho: f64, y: f64) -> f64 {
    let (a1, a2) = (pa.a_ue1_t1(), pa.a_ue2_t1());
    if y <= 0.0 {
        return 0.0;
    }
    let den = a2 - a1 * y;
    if den <= 0.0 {
        return 1.0;
    }
    gain_cdf(stats.beta_bs_ue2(), y / (den * rho)).expect("argument is positive")
}

/// PDF of SINR_UE2ᵗ² = g₁₂α_UE2/(g₁₂α_BS + 1/ρ) on its support (0, α_UE2/α_BS).
fn sinr_t2_ue2_pdf(pa: &PowerAllocation, stats: &ChannelStats, rho: f64, x: f64) -> f64 {
    let (a_bs, a_u) = (pa.a_bs_t2(), pa.a_ue2_t2());
    let den = a_u - a_bs * x;
    if x < 0.0 || den <= 0.0 {
        return 0.0;
    }
    gain_pdf(stats.beta_ue1_ue2(), x / (den * rho)).expect("argument is non-negative") * a_u
        / (den * den * rho)
}

/// Q₃ by adaptive quadrature: ∫₀^φ₃ f_SINRᵗ²(x)·F_SINRᵗ¹(γ − x) dx, with the
/// inner integral over SINRᵗ¹ already collapsed into its CDF.
pub fn q3_numeric_oracle(
    pa: &PowerAllocation,
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
    tol: f64,
) -> Result<f64> {
    let dc = DerivedConstants::new(pa, th);
    dc.require_margin()?;
    let gamma = th.g_ue2_dl;
    if pa.a_ue2_t2() == 0.0 {
        return Ok(sinr_t1_ue2_cdf(pa, stats, rho, gamma));
    }
    if dc.phi3 == 0.0 {
        return Ok(0.0);
    }
    let integrand =
        |x: f64| sinr_t2_ue2_pdf(pa, stats, rho, x) * sinr_t1_ue2_cdf(pa, stats, rho, gamma - x);
    let r = quadrature::integrate(integrand, 0.0, dc.phi3, tol)?;
    if r.abs_error > tol {
        return Err(Error::Quadrature(format!(
            "estimated error {:e} exceeds tolerance {tol:e}",
            r.abs_error
        )));
    }
    Ok(r.value)
}

/// Pr{UE2 fails its downlink} = Q₁Q₂ + (1 − Q₁)Q₃, with Q₃ from Gauss-Chebyshev.
pub fn pout_ue2_dl(
    pa: &PowerAllocation,
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
    quad: &QuadratureConfig,
) -> f64 {
    let Ok((q1, q2)) = q1_q2(pa, th, rho, stats) else {
        return 1.0;
    };
    let q3 = q3_gauss_chebyshev(pa, th, rho, stats, quad)
        .expect("nodes lie inside the valid region when the SIC margin is positive");
    (q1 * q2 + (1.0 - q1) * q3).clamp(0.0, 1.0)
}

/// Pr{the BS fails to decode UE1's interference-free t2 uplink}.
pub fn pout_ue1_ul_t2(
    pa: &PowerAllocation,
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
) -> f64 {
    if pa.a_bs_t2() == 0.0 {
        return 1.0;
    }
    exp_cdf(th.g_ue1_ul, stats.beta_bs_ue1() * pa.a_bs_t2() * rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UplinkUser {
    Ue1,
    Ue2,
}

/// The uplink closed forms assume both thresholds exceed 1 (R > 1/3 for a
/// three-slot frame), which makes the decode-order condition redundant.
fn check_uplink_rates(th: &SinrThresholds) -> Result<()> {
    if th.g_ue1_ul > 1.0 && th.g_ue2_ul > 1.0 {
        Ok(())
    } else {
        Err(Error::NotApplicable(format!(
            "uplink closed form needs both rates above 1/{} bit/s/Hz (gamma_ue1_ul = {}, gamma_ue2_ul = {})",
            th.prelog(),
            th.g_ue1_ul,
            th.g_ue2_ul
        )))
    }
}

/// (own β, other β, own γ, other γ) from the point of view of `user`.
fn uplink_roles(
    th: &SinrThresholds,
    stats: &ChannelStats,
    user: UplinkUser,
) -> (f64, f64, f64, f64) {
    match user {
        UplinkUser::Ue1 => (
            stats.beta_bs_ue1(),
            stats.beta_bs_ue2(),
            th.g_ue1_ul,
            th.g_ue2_ul,
        ),
        UplinkUser::Ue2 => (
            stats.beta_bs_ue2(),
            stats.beta_bs_ue1(),
            th.g_ue2_ul,
            th.g_ue1_ul,
        ),
    }
}

/// Pr{`user`'s t3 uplink fails} under SIC in decreasing received-power order.
pub fn pout_ul_t3(
    th: &SinrThresholds,
    rho: f64,
    stats: &ChannelStats,
    user: UplinkUser,
) -> Result<f64> {
    check_uplink_rates(th)?;
    let (b_own, b_other, g_own, g_other) = uplink_roles(th, stats, user);
    let decoded_first = b_own * (-g_own / (b_own * rho)).exp() / (g_own * b_other + b_own);
    let decoded_second = b_other / (g_other * b_own + b_other)
        * (-(g_own / (b_own * rho) + (g_other + g_other * g_own) / (b_other * rho))).exp();
    Ok((1.0 - decoded_first - decoded_second).clamp(0.0, 1.0))
}

/// High-SNR limit of [`pout_ul_t3`].
pub fn ul_t3_error_floor(
    th: &SinrThresholds,
    stats: &ChannelStats,
    user: UplinkUser,
) -> Result<f64> {
    check_uplink_rates(th)?;
    let (b_own, b_other, g_own, g_other) = uplink_roles(th, stats, user);
    Ok(1.0 - b_own / (g_own * b_other + b_own) - b_other / (g_other * b_own + b_other))
}

/// Least-squares slope of −log₁₀P against log₁₀ρ over the points with
/// `window.0 <= snr_db <= window.1`. Curve points are `(snr_db, probability)`.
pub fn diversity_slope(curve: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(db, _)| *db >= window.0 && *db <= window.1)
        .copied()
        .collect();
    if pts.len() < 2 {
        return Err(Error::Slope(format!(
            "need at least 2 points in [{}, {}] dB, found {}",
            window.0,
            window.1,
            pts.len()
        )));
    }
    if let Some((db, p)) = pts.iter().find(|(_, p)| !(*p > 0.0)) {
        return Err(Error::Slope(format!(
            "probability at {db} dB is {p}; log undefined"
        )));
    }
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|(db, _)| db / 10.0).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, p)| -p.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Slope("all points share one SNR".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutageEntry {
    Value(f64),
    /// The closed form's preconditions were not met; carries the reason.
    NotApplicable(String),
}

/// Per-link outage probabilities, with the reason attached wherever a closed
/// form could not be evaluated. Links outside the scheme stay unset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutageSet {
    entries: [Option<OutageEntry>; 5],
}

impl OutageSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, link: Link, p: f64) {
        assert!(
            (0.0..=1.0).contains(&p),
            "outage probability {p} for {} outside [0, 1]",
            link.name()
        );
        self.entries[link.index()] = Some(OutageEntry::Value(p));
    }

    pub fn set_not_applicable(&mut self, link: Link, reason: impl Into<String>) {
        self.entries[link.index()] = Some(OutageEntry::NotApplicable(reason.into()));
    }

    pub fn with(mut self, link: Link, p: f64) -> Self {
        self.set(link, p);
        self
    }

    pub fn entry(&self, link: Link) -> Option<&OutageEntry> {
        self.entries[link.index()].as_ref()
    }

    pub fn value(&self, link: Link) -> Option<f64> {
        match self.entry(link) {
            Some(OutageEntry::Value(p)) => Some(*p),
            _ => None,
        }
    }

    /// True when every link of `scheme` has a value.
    pub fn is_complete(&self, scheme: Scheme) -> bool {
        scheme.links().iter().all(|&l| self.value(l).is_some())
    }
}

/// Closed-form outages for every link of `scheme` at linear SNR `rho`.
///
/// CNOMA is HDU-CNOMA with the cooperative slot spent on relaying. The
/// non-cooperative baseline reuses the t1/t3 expressions with two-slot
/// thresholds and direct-only UE2 decoding.
pub fn analytic_outages(
    scheme: Scheme,
    params: &SystemParams,
    rho: f64,
    quad: &QuadratureConfig,
) -> OutageSet {
    let th = SinrThresholds::for_scheme(&params.rates, scheme);
    let stats = &params.stats;
    let pa = match scheme {
        Scheme::HduCnoma | Scheme::NonCoopNoma => params.power,
        Scheme::ConventionalCnoma => params.power.relay_only(),
    };
    let mut set = OutageSet::new();
    set.set(Link::Ue1Dl, pout_ue1_dl(&pa, &th, rho, stats));
    let ue2_dl = match scheme {
        Scheme::NonCoopNoma => q1_q2(&pa, &th, rho, stats).map_or(1.0, |(_, q2)| q2),
        _ => pout_ue2_dl(&pa, &th, rho, stats, quad),
    };
    set.set(Link::Ue2Dl, ue2_dl);
    if scheme == Scheme::HduCnoma {
        set.set(Link::Ue1UlT2, pout_ue1_ul_t2(&pa, &th, rho, stats));
    }
    for (link, user) in [
        (Link::Ue1UlT3, UplinkUser::Ue1),
        (Link::Ue2Ul, UplinkUser::Ue2),
    ] {
        match pout_ul_t3(&th, rho, stats, user) {
            Ok(p) => set.set(link, p),
            Err(e) => set.set_not_applicable(link, e.to_string()),
        }
    }
    set
}

/// System outage throughput Σ (1 − P_link)·R_link over the links of `scheme`.
pub fn outage_throughput(outages: &OutageSet, rates: &RateTargets, scheme: Scheme) -> Result<f64> {
    scheme.links().iter().try_fold(0.0, |acc, &link| {
        let p = outages
            .value(link)
            .ok_or(Error::MissingOutage(link.name()))?;
        Ok(acc + (1.0 - p) * link.rate(rates))
    })
}
