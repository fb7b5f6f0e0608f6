//! Per-slot SINRs and per-frame decode outcomes.
//!
//! A frame of HDU-CNOMA has three equal slots:
//!
//! * t1, downlink NOMA: the BS superimposes s1 and s2; UE1 runs SIC on s2 then
//!   decodes s1, UE2 decodes s2 treating s1 as noise.
//! * t2, cooperative phase: UE1 superimposes the relayed s2 and its own uplink
//!   u1. The BS already knows s2 and cancels it, so u1 is interference-free.
//!   UE2 combines both copies of s2 with MRC.
//! * t3, uplink NOMA: both users transmit at full power and the BS decodes the
//!   stronger received signal first.
//!
//! Conventional CNOMA spends t2 purely on relaying; non-cooperative NOMA drops
//! t2 entirely and splits the frame in two.

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerAllocation {
    a_ue1_t1: f64,
    a_ue2_t1: f64,
    a_bs_t2: f64,
    a_ue2_t2: f64,
}

impl PowerAllocation {
    /// Validates `a_ue1_t1 + a_ue2_t1 = 1`, `a_ue1_t1 <= a_ue2_t1` and
    /// `a_bs_t2 + a_ue2_t2 = 1`.
    pub fn new(a_ue1_t1: f64, a_ue2_t1: f64, a_bs_t2: f64, a_ue2_t2: f64) -> Result<Self> {
        for (key, a) in [
            ("alpha_ue1_t1", a_ue1_t1),
            ("alpha_ue2_t1", a_ue2_t1),
            ("alpha_bs_t2", a_bs_t2),
            ("alpha_ue2_t2", a_ue2_t2),
        ] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::param(
                    key,
                    format!("power fraction must lie in [0, 1], got {a}"),
                ));
            }
        }
        if (a_ue1_t1 + a_ue2_t1 - 1.0).abs() > SUM_TOL {
            return Err(Error::param(
                "alpha_ue2_t1",
                format!(
                    "alpha_ue1_t1 + alpha_ue2_t1 must equal 1, got {}",
                    a_ue1_t1 + a_ue2_t1
                ),
            ));
        }
        if a_ue1_t1 > a_ue2_t1 {
            return Err(Error::param(
                "alpha_ue1_t1",
                format!("the weak user must get at least as much power ({a_ue1_t1} > {a_ue2_t1})"),
            ));
        }
        if (a_bs_t2 + a_ue2_t2 - 1.0).abs() > SUM_TOL {
            return Err(Error::param(
                "alpha_ue2_t2",
                format!(
                    "alpha_bs_t2 + alpha_ue2_t2 must equal 1, got {}",
                    a_bs_t2 + a_ue2_t2
                ),
            ));
        }
        Ok(PowerAllocation {
            a_ue1_t1,
            a_ue2_t1,
            a_bs_t2,
            a_ue2_t2,
        })
    }

    /// The same t1 split with the whole cooperative slot spent on relaying s2.
    pub fn relay_only(&self) -> Self {
        PowerAllocation {
            a_bs_t2: 0.0,
            a_ue2_t2: 1.0,
            ..*self
        }
    }

    pub fn a_ue1_t1(&self) -> f64 {
        self.a_ue1_t1
    }
    pub fn a_ue2_t1(&self) -> f64 {
        self.a_ue2_t1
    }
    pub fn a_bs_t2(&self) -> f64 {
        self.a_bs_t2
    }
    pub fn a_ue2_t2(&self) -> f64 {
        self.a_ue2_t2
    }
}

impl Default for PowerAllocation {
    fn default() -> Self {
        PowerAllocation {
            a_ue1_t1: 0.05,
            a_ue2_t1: 0.95,
            a_bs_t2: 0.1,
            a_ue2_t2: 0.9,
        }
    }
}

/// Target rates in bit/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTargets {
    pub r_ue1_dl: f64,
    pub r_ue2_dl: f64,
    pub r_ue1_ul: f64,
    pub r_ue2_ul: f64,
}

impl RateTargets {
    pub fn new(r_ue1_dl: f64, r_ue2_dl: f64, r_ue1_ul: f64, r_ue2_ul: f64) -> Result<Self> {
        for (key, r) in [
            ("rate_ue1_dl", r_ue1_dl),
            ("rate_ue2_dl", r_ue2_dl),
            ("rate_ue1_ul", r_ue1_ul),
            ("rate_ue2_ul", r_ue2_ul),
        ] {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::param(
                    key,
                    format!("target rate must be finite and >= 0, got {r}"),
                ));
            }
        }
        Ok(RateTargets {
            r_ue1_dl,
            r_ue2_dl,
            r_ue1_ul,
            r_ue2_ul,
        })
    }

    pub fn uniform(rate: f64) -> Result<Self> {
        Self::new(rate, rate, rate, rate)
    }
}

impl Default for RateTargets {
    fn default() -> Self {
        RateTargets {
            r_ue1_dl: 1.0,
            r_ue2_dl: 1.0,
            r_ue1_ul: 1.0,
            r_ue2_ul: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    HduCnoma,
    ConventionalCnoma,
    NonCoopNoma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::HduCnoma,
        Scheme::ConventionalCnoma,
        Scheme::NonCoopNoma,
    ];

    /// Number of equal slots per frame; rates are scaled by its inverse.
    pub fn prelog_divisor(self) -> u32 {
        match self {
            Scheme::HduCnoma | Scheme::ConventionalCnoma => 3,
            Scheme::NonCoopNoma => 2,
        }
    }

    pub fn index(self) -> u64 {
        match self {
            Scheme::HduCnoma => 0,
            Scheme::ConventionalCnoma => 1,
            Scheme::NonCoopNoma => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::HduCnoma => "hdu-cnoma",
            Scheme::ConventionalCnoma => "cnoma",
            Scheme::NonCoopNoma => "noncoop-noma",
        }
    }

    pub fn from_name(name: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Logical links that carry traffic under this scheme.
    pub fn links(self) -> &'static [Link] {
        match self {
            Scheme::HduCnoma => &Link::ALL,
            Scheme::ConventionalCnoma | Scheme::NonCoopNoma => {
                &[Link::Ue1Dl, Link::Ue2Dl, Link::Ue1UlT3, Link::Ue2Ul]
            }
        }
    }
}

/// The five logical links, one per outage event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Link {
    Ue1Dl,
    Ue2Dl,
    Ue1UlT2,
    Ue1UlT3,
    Ue2Ul,
}

impl Link {
    pub const ALL: [Link; 5] = [
        Link::Ue1Dl,
        Link::Ue2Dl,
        Link::Ue1UlT2,
        Link::Ue1UlT3,
        Link::Ue2Ul,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Link::Ue1Dl => "ue1_dl",
            Link::Ue2Dl => "ue2_dl",
            Link::Ue1UlT2 => "ue1_ul_t2",
            Link::Ue1UlT3 => "ue1_ul_t3",
            Link::Ue2Ul => "ue2_ul",
        }
    }

    pub fn from_name(name: &str) -> Option<Link> {
        Link::ALL.into_iter().find(|l| l.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Target rate this link is measured against.
    pub fn rate(self, rates: &RateTargets) -> f64 {
        match self {
            Link::Ue1Dl => rates.r_ue1_dl,
            Link::Ue2Dl => rates.r_ue2_dl,
            Link::Ue1UlT2 | Link::Ue1UlT3 => rates.r_ue1_ul,
            Link::Ue2Ul => rates.r_ue2_ul,
        }
    }
}

/// Linear SINR thresholds γ = 2^(ν·R) − 1 for a prelog divisor ν.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrThresholds {
    pub g_ue1_dl: f64,
    pub g_ue2_dl: f64,
    pub g_ue1_ul: f64,
    pub g_ue2_ul: f64,
    prelog: u32,
}

impl SinrThresholds {
    pub fn from_rates(rates: &RateTargets, prelog: u32) -> Self {
        assert!(prelog >= 1, "prelog divisor must be positive");
        let nu = f64::from(prelog);
        let gamma = |r: f64| (nu * r).exp2() - 1.0;
        SinrThresholds {
            g_ue1_dl: gamma(rates.r_ue1_dl),
            g_ue2_dl: gamma(rates.r_ue2_dl),
            g_ue1_ul: gamma(rates.r_ue1_ul),
            g_ue2_ul: gamma(rates.r_ue2_ul),
            prelog,
        }
    }

    pub fn for_scheme(rates: &RateTargets, scheme: Scheme) -> Self {
        Self::from_rates(rates, scheme.prelog_divisor())
    }

    pub fn prelog(&self) -> u32 {
        self.prelog
    }
}

/// SINRs in the downlink NOMA slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Sinr {
    /// UE1 decoding s2 (the SIC step).
    pub ue1_sic: f64,
    /// UE1 decoding s1 after cancelling s2.
    pub ue1_own: f64,
    /// UE2 decoding s2 with s1 as noise.
    pub ue2_direct: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T2Sinr {
    /// BS decoding u1 after cancelling the known s2.
    pub bs_ue1: f64,
    /// UE2 decoding the relayed s2 with u1 as noise.
    pub ue2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeOrder {
    Ue1First,
    Ue2First,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T3Sinr {
    pub order: DecodeOrder,
    /// SINR of the first-decoded user, with the other user as interference.
    pub first: f64,
    /// Interference-free SINR of the second user after SIC.
    pub second: f64,
}

// g·a / (g·b + 1/ρ)
fn interference_limited(g: f64, signal: f64, interference: f64, rho: f64) -> f64 {
    g * signal / (g * interference + 1.0 / rho)
}

pub fn sinr_t1(pa: &PowerAllocation, ch: &ChannelRealization, rho: f64) -> T1Sinr {
    debug_assert!(rho > 0.0);
    T1Sinr {
        ue1_sic: interference_limited(ch.g_bs_ue1, pa.a_ue2_t1, pa.a_ue1_t1, rho),
        ue1_own: ch.g_bs_ue1 * pa.a_ue1_t1 * rho,
        ue2_direct: interference_limited(ch.g_bs_ue2, pa.a_ue2_t1, pa.a_ue1_t1, rho),
    }
}

pub fn sinr_t2(pa: &PowerAllocation, ch: &ChannelRealization, rho: f64) -> T2Sinr {
    debug_assert!(rho > 0.0);
    T2Sinr {
        bs_ue1: ch.g_bs_ue1 * pa.a_bs_t2 * rho,
        ue2: interference_limited(ch.g_ue1_ue2, pa.a_ue2_t2, pa.a_bs_t2, rho),
    }
}

/// MRC over independent branches: the combined SINR is the branch sum.
pub fn mrc_sinr(sinr_t1_ue2: f64, sinr_t2_ue2: f64) -> f64 {
    sinr_t1_ue2 + sinr_t2_ue2
}

/// Uplink NOMA slot. Ties in received power go to UE1 first.
pub fn sinr_t3(ch: &ChannelRealization, rho: f64) -> T3Sinr {
    debug_assert!(rho > 0.0);
    let (g1, g2) = (ch.g_bs_ue1, ch.g_bs_ue2);
    if g1 >= g2 {
        T3Sinr {
            order: DecodeOrder::Ue1First,
            first: g1 / (g2 + 1.0 / rho),
            second: g2 * rho,
        }
    } else {
        T3Sinr {
            order: DecodeOrder::Ue2First,
            first: g2 / (g1 + 1.0 / rho),
            second: g1 * rho,
        }
    }
}

/// Decode flags for one frame. `ue1_ul_t2` is `None` for schemes without an
/// uplink in the cooperative slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameOutcome {
    pub ue1_dl: bool,
    pub ue2_dl: bool,
    pub ue1_ul_t2: Option<bool>,
    pub ue1_ul_t3: bool,
    pub ue2_ul: bool,
}

impl FrameOutcome {
    /// Success flag for `link`, `None` if the link does not exist in the frame.
    pub fn ok(&self, link: Link) -> Option<bool> {
        match link {
            Link::Ue1Dl => Some(self.ue1_dl),
            Link::Ue2Dl => Some(self.ue2_dl),
            Link::Ue1UlT2 => self.ue1_ul_t2,
            Link::Ue1UlT3 => Some(self.ue1_ul_t3),
            Link::Ue2Ul => Some(self.ue2_ul),
        }
    }
}

/// Uplink NOMA flags `(ue1_ok, ue2_ok)`. The second-decoded user is only
/// attempted if the first one was decoded and cancelled.
fn uplink_noma(t3: &T3Sinr, th: &SinrThresholds) -> (bool, bool) {
    match t3.order {
        DecodeOrder::Ue1First => {
            let ue1 = t3.first >= th.g_ue1_ul;
            (ue1, ue1 && t3.second >= th.g_ue2_ul)
        }
        DecodeOrder::Ue2First => {
            let ue2 = t3.first >= th.g_ue2_ul;
            (ue2 && t3.second >= th.g_ue1_ul, ue2)
        }
    }
}

/// Evaluates every outage event of one frame.
///
/// # Panics
///
/// If `th` was built with a prelog divisor other than the scheme's.
pub fn evaluate_frame(
    scheme: Scheme,
    pa: &PowerAllocation,
    th: &SinrThresholds,
    ch: &ChannelRealization,
    rho: f64,
) -> FrameOutcome {
    assert_eq!(
        th.prelog,
        scheme.prelog_divisor(),
        "thresholds built for prelog {} used with {}",
        th.prelog,
        scheme.name()
    );
    let t1 = sinr_t1(pa, ch, rho);
    let sic_ok = t1.ue1_sic >= th.g_ue2_dl;
    let ue1_dl = sic_ok && t1.ue1_own >= th.g_ue1_dl;
    let (ue1_ul_t3, ue2_ul) = uplink_noma(&sinr_t3(ch, rho), th);

    let (ue2_dl, ue1_ul_t2) = match scheme {
        Scheme::HduCnoma | Scheme::ConventionalCnoma => {
            let pa_t2 = if scheme == Scheme::ConventionalCnoma {
                pa.relay_only()
            } else {
                *pa
            };
            let t2 = sinr_t2(&pa_t2, ch, rho);
            // Without a successful SIC, UE1 has nothing to relay.
            let ue2_dl = if sic_ok {
                mrc_sinr(t1.ue2_direct, t2.ue2) >= th.g_ue2_dl
            } else {
                t1.ue2_direct >= th.g_ue2_dl
            };
            let ue1_ul_t2 = (scheme == Scheme::HduCnoma).then_some(t2.bs_ue1 >= th.g_ue1_ul);
            (ue2_dl, ue1_ul_t2)
        }
        Scheme::NonCoopNoma => (t1.ue2_direct >= th.g_ue2_dl, None),
    };

    FrameOutcome {
        ue1_dl,
        ue2_dl,
        ue1_ul_t2,
        ue1_ul_t3,
        ue2_ul,
    }
}
