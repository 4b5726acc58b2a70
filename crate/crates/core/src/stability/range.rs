use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Polynomial degree entering the stability condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Degree {
    K(u32),
    Infinite,
    Cr,
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::K(k) => write!(f, "{k}"),
            Degree::Infinite => f.write_str("∞"),
            Degree::Cr => f.write_str("CR"),
        }
    }
}

impl FromStr for Degree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim() {
            "CR" | "cr" => Ok(Degree::Cr),
            "inf" | "∞" | "infinity" => Ok(Degree::Infinite),
            t => match t.parse::<u32>() {
                Ok(k) if k >= 1 => Ok(Degree::K(k)),
                _ => Err(Error::InvalidParameter(format!("invalid degree {s:?}"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    Lp,
    W1p,
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "Lp" | "lp" => Ok(NormKind::Lp),
            "W1p" | "w1p" => Ok(NormKind::W1p),
            _ => Err(Error::InvalidParameter(format!("invalid norm kind {s:?}"))),
        }
    }
}

/// Certified lower bound on the worst admissible weight grading.
pub fn gamma_max(d: usize, degree: Degree) -> f64 {
    let df = d as f64;
    match degree {
        Degree::K(k) => {
            let a = (2.0 * k as f64 + df).sqrt();
            let b = (k as f64).sqrt();
            (a + b) / (a - b)
        }
        Degree::Infinite => 3.0 + 2.0 * 2f64.sqrt(),
        Degree::Cr => {
            let s = (df + 2.0).sqrt();
            if df <= s {
                f64::INFINITY
            } else {
                (df + s) / (df - s)
            }
        }
    }
}

/// Admissible exponents: all of `[1, ∞]`, none, or the open interval
/// `(lo, hi)` with `1 < lo < 2 < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PInterval {
    All,
    Empty,
    Open { lo: f64, hi: f64 },
}

impl PInterval {
    /// Interval of `p` with `|1/2 − 1/p| < t`.
    pub fn from_threshold(t: f64) -> Self {
        if t > 0.5 {
            PInterval::All
        } else if t <= 0.0 || t.is_nan() {
            PInterval::Empty
        } else {
            PInterval::Open {
                lo: 1.0 / (0.5 + t),
                hi: if t == 0.5 { f64::INFINITY } else { 1.0 / (0.5 - t) },
            }
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        match *self {
            PInterval::All => p >= 1.0,
            PInterval::Empty => false,
            PInterval::Open { lo, hi } => p > lo && p < hi,
        }
    }
}

/// Half-even rounding to four decimals, printed with four decimals.
pub fn fmt4(x: f64) -> String {
    if !x.is_finite() {
        return "∞".into();
    }
    let scaled = x * 1e4;
    let floor = scaled.floor();
    let frac = scaled - floor;
    let r = if (frac - 0.5).abs() < 1e-9 {
        if floor as i64 % 2 == 0 {
            floor
        } else {
            floor + 1.0
        }
    } else {
        scaled.round()
    };
    format!("{:.4}", r / 1e4)
}

/// Four decimals rounded toward `-∞` (`up = false`) or `+∞`.
pub fn fmt4_directed(x: f64, up: bool) -> String {
    if !x.is_finite() {
        return "∞".into();
    }
    let scaled = x * 1e4;
    // Values already on the grid are not moved by representation noise.
    let r = if (scaled - scaled.round()).abs() < 1e-7 {
        scaled.round()
    } else if up {
        scaled.ceil()
    } else {
        scaled.floor()
    };
    format!("{:.4}", r / 1e4)
}

/// Endpoints are rounded inward, so the printed interval lies inside the
/// admissible one.
impl fmt::Display for PInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PInterval::All => f.write_str("[1,∞]"),
            PInterval::Empty => f.write_str("∅"),
            PInterval::Open { lo, hi } => write!(f, "[{},{}]", fmt4_directed(lo, true), fmt4_directed(hi, false)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub d: usize,
    pub degree: Degree,
    pub gamma_h: f64,
    pub gamma_rho: f64,
    pub kind: NormKind,
    pub p: Option<f64>,
    pub admissible: Option<bool>,
    pub p_interval: PInterval,
    pub gamma_max_bound: f64,
    pub guaranteed: bool,
}

/// Threshold `t` such that the condition holds iff `|1/2 − 1/p| < t`.
pub fn threshold(d: usize, degree: Degree, gamma_h: f64, gamma_rho: f64, kind: NormKind) -> f64 {
    let g = gamma_max(d, degree);
    if g.is_infinite() {
        return f64::INFINITY;
    }
    let room = (g / gamma_rho).ln();
    let offset = match kind {
        NormKind::Lp => 0.0,
        NormKind::W1p => 1.0,
    };
    if gamma_h <= 1.0 {
        return if room > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    (room / gamma_h.ln() - offset) / d as f64
}

/// Maximal set of exponents with `γ_ρ γ_h^{e + d|1/2−1/p|} < γ_max`, where
/// `e = 0` for Lp and `e = 1` for W1p.
pub fn stability_range(d: usize, degree: Degree, gamma_h: f64, gamma_rho: f64, kind: NormKind, p: Option<f64>) -> StabilityVerdict {
    let p_interval = PInterval::from_threshold(threshold(d, degree, gamma_h, gamma_rho, kind));
    StabilityVerdict {
        d,
        degree,
        gamma_h,
        gamma_rho,
        kind,
        p,
        admissible: p.map(|p| p_interval.contains(p)),
        p_interval,
        gamma_max_bound: gamma_max(d, degree),
        guaranteed: true,
    }
}

/// Published mesh gradings of common refinement strategies.
pub fn grading_presets(d: usize, alpha: u32) -> Vec<(&'static str, f64)> {
    vec![
        ("2D-RGB", 2f64.powf(1.5)),
        ("2D-NVB+", 2.0),
        ("2D-NVB-", 2f64.powf(1.5)),
        ("2D-RG", 4.0),
        ("2D-RG-GHS", 2.0),
        ("BiSecLG", 2f64.powf(alpha as f64 / d as f64)),
    ]
}

pub fn preset(name: &str, d: usize, alpha: u32) -> Option<f64> {
    grading_presets(d, alpha).into_iter().find(|(n, _)| *n == name).map(|(_, g)| g)
}

pub type TableRow = (String, f64, Degree, PInterval, PInterval);

/// Rows `(γ_h label, γ_h, degree, Lp interval, W1p interval)` of the
/// stability tables for `d = 2` or `d = 3`.
pub fn stability_table(d: usize) -> Vec<TableRow> {
    let ks = [Degree::K(1), Degree::K(2), Degree::K(3), Degree::Infinite];
    let rows: Vec<(String, f64, Vec<Degree>)> = match d {
        2 => vec![
            ("2^(1/2)".into(), 2f64.sqrt(), vec![Degree::K(1)]),
            ("2".into(), 2.0, ks.to_vec()),
            ("2^(3/2)".into(), 2f64.powf(1.5), ks.to_vec()),
            ("4".into(), 4.0, ks.to_vec()),
        ],
        _ => vec![
            (format!("2^(1/{d})"), 2f64.powf(1.0 / d as f64), vec![Degree::K(1)]),
            ("2".into(), 2.0, ks.to_vec()),
        ],
    };
    rows.into_iter()
        .flat_map(|(label, g, degs)| {
            degs.into_iter().map(move |k| {
                (
                    label.clone(),
                    g,
                    k,
                    stability_range(d, k, g, 1.0, NormKind::Lp, None).p_interval,
                    stability_range(d, k, g, 1.0, NormKind::W1p, None).p_interval,
                )
            })
        })
        .collect()
}

pub fn stability_table_tsv(d: usize) -> String {
    let mut s = String::from("gamma_h\tK\tLp\tW1p\n");
    for (label, _, k, lp, w) in stability_table(d) {
        s.push_str(&format!("{label}\t{k}\t{lp}\t{w}\n"));
    }
    s
}

/// `q_new` for `d = 1..=3`, `K = 1..=14` and the limit.
pub fn q_new_table_tsv() -> String {
    let mut s = String::from("K\td=1\td=2\td=3\n");
    for k in (1..=14).map(Degree::K).chain([Degree::Infinite]) {
        s.push_str(&k.to_string());
        for d in 1..=3 {
            s.push('\t');
            s.push_str(&fmt4(1.0 / gamma_max(d, k)));
        }
        s.push('\n');
    }
    s
}

/// Smallest degree with `W^{1,2}` stability for grading `γ_h`, probing
/// degrees up to `limit`.
pub fn w12_min_degree(d: usize, gamma_h: f64, limit: u32) -> Option<u32> {
    (1..=limit).find(|&k| stability_range(d, Degree::K(k), gamma_h, 1.0, NormKind::W1p, Some(2.0)).admissible == Some(true))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrThresholds {
    /// Largest `d` up to which Lp stability holds for every `p`.
    pub lp_all_p_max_d: usize,
    /// Largest `d` up to which W1p stability holds for every `p`.
    pub w1p_all_p_max_d: usize,
    /// `W^{1,2}` stability for every probed dimension.
    pub w12_all_d: bool,
    pub probe_limit: usize,
}

/// Scan of the CR conditions on bisection meshes (`γ_h = 2^{1/d}`).
pub fn cr_dimension_thresholds(probe_limit: usize) -> CrThresholds {
    let holds = |d: usize, exponent: f64| 2f64.powf(exponent) < gamma_max(d, Degree::Cr);
    let last_prefix = |f: &dyn Fn(usize) -> bool| (2..=probe_limit).take_while(|&d| f(d)).last().unwrap_or(1);
    CrThresholds {
        lp_all_p_max_d: last_prefix(&|d| holds(d, 0.5)),
        w1p_all_p_max_d: last_prefix(&|d| holds(d, 1.0 / d as f64 + 0.5)),
        w12_all_d: (2..=probe_limit).all(|d| holds(d, 1.0 / d as f64)),
        probe_limit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn published_intervals() {
        let v = stability_range(2, Degree::K(1), 2.0, 1.0, NormKind::W1p, None);
        assert_eq!(v.p_interval.to_string(), "[1.2619,4.8188]");
        let v = stability_range(3, Degree::K(1), 2.0, 1.0, NormKind::Lp, None);
        assert_eq!(v.p_interval.to_string(), "[1.0387,26.9019]");
        let v = stability_range(2, Degree::K(3), 2.0, 1.0, NormKind::W1p, Some(f64::INFINITY));
        assert_eq!(v.p_interval, PInterval::All);
        assert_eq!(v.admissible, Some(true));
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(fmt4(0.12345), "0.1234");
        assert_eq!(fmt4(0.12355), "0.1236");
        assert_eq!(fmt4(1.0 / 3.0), "0.3333");
    }

    #[test]
    fn cr_thresholds() {
        let t = cr_dimension_thresholds(100);
        assert_eq!((t.lp_all_p_max_d, t.w1p_all_p_max_d), (35, 32));
        assert!(t.w12_all_d);
    }

    #[test]
    fn parses_degrees() {
        assert_eq!("CR".parse::<Degree>().unwrap(), Degree::Cr);
        assert_eq!("inf".parse::<Degree>().unwrap(), Degree::Infinite);
        assert_eq!("3".parse::<Degree>().unwrap(), Degree::K(3));
        assert!("0".parse::<Degree>().is_err());
        assert!("x".parse::<Degree>().is_err());
    }

    proptest! {
        #[test]
        fn intervals_are_symmetric_in_inverse_p(d in 1usize..5, k in 1u32..8, gh in 1.0f64..5.0, gr in 1.0f64..3.0, w in any::<bool>()) {
            let kind = if w { NormKind::W1p } else { NormKind::Lp };
            if let PInterval::Open { lo, hi } = stability_range(d, Degree::K(k), gh, gr, kind, None).p_interval {
                prop_assert!((1.0 / lo + 1.0 / hi - 1.0).abs() < 1e-12);
                prop_assert!(lo < 2.0 && hi > 2.0);
            }
        }

        #[test]
        fn intervals_are_monotone(d in 1usize..4, k in 1u32..8, gh in 1.01f64..5.0, dg in 0.0f64..1.0) {
            let t = |k, g| threshold(d, Degree::K(k), g, 1.0, NormKind::W1p);
            prop_assert!(t(k + 1, gh) >= t(k, gh));
            prop_assert!(t(k, gh + dg) <= t(k, gh));
        }

        #[test]
        fn admissible_iff_condition_holds(d in 1usize..4, k in 1u32..6, gh in 1.0f64..5.0, p in 1.0f64..50.0) {
            let v = stability_range(d, Degree::K(k), gh, 1.0, NormKind::Lp, Some(p));
            let t = threshold(d, Degree::K(k), gh, 1.0, NormKind::Lp);
            prop_assume!(((0.5 - 1.0 / p).abs() - t).abs() > 1e-9);
            let cond = gh.powf(d as f64 * (0.5 - 1.0 / p).abs()) < gamma_max(d, Degree::K(k));
            prop_assert_eq!(v.admissible.unwrap(), cond);
        }
    }
}
