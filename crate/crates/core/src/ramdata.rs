//! Branch point classification, ramification filtrations, differents and genus.

use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::gf2k::FieldElem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RamError {
    #[error("pole pattern (ord0, ord1, ordinf) = ({}, {}, {}) cannot come from h_inf = h0 + h1 in standard form", fmt_ord(.0[0]), fmt_ord(.0[1]), fmt_ord(.0[2]))]
    InconsistentTriple([i64; 3]),
    #[error("invalid branch data: {0}")]
    InvalidBranchData(String),
    #[error("Riemann-Hurwitz gives 2g = {0}, which is not a nonnegative even integer")]
    NonIntegralGenus(i64),
}

fn fmt_ord(o: i64) -> String {
    if o == crate::polyrat::ORD_INF {
        "inf".to_string()
    } else {
        o.to_string()
    }
}

/// The subgroups of V4 that occur as stabilizers: V4 itself and
/// H0 = <tau>, H1 = <sigma>, Hinf = <sigma tau>.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Subgroup {
    V4,
    H0,
    H1,
    Hinf,
}

impl Subgroup {
    pub const ORDER2: [Subgroup; 3] = [Subgroup::H0, Subgroup::H1, Subgroup::Hinf];

    pub fn name(self) -> &'static str {
        match self {
            Subgroup::V4 => "V4",
            Subgroup::H0 => "H0",
            Subgroup::H1 => "H1",
            Subgroup::Hinf => "Hinf",
        }
    }

    pub fn parse(s: &str) -> Option<Subgroup> {
        match s {
            "V4" => Some(Subgroup::V4),
            "H0" => Some(Subgroup::H0),
            "H1" => Some(Subgroup::H1),
            "Hinf" | "H∞" => Some(Subgroup::Hinf),
            _ => None,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Subgroup::V4 => 4,
            _ => 2,
        }
    }

    /// The order-two subgroup attached to a slot of the triple (h0, h1, h_inf).
    pub fn from_slot(slot: Slot) -> Subgroup {
        match slot {
            Slot::Zero => Subgroup::H0,
            Slot::One => Subgroup::H1,
            Slot::Inf => Subgroup::Hinf,
        }
    }

    pub fn slot(self) -> Option<Slot> {
        match self {
            Subgroup::V4 => None,
            Subgroup::H0 => Some(Slot::Zero),
            Subgroup::H1 => Some(Slot::One),
            Subgroup::Hinf => Some(Slot::Inf),
        }
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Subgroup {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// Position in the triple (h0, h1, h_inf).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Slot {
    Zero,
    One,
    Inf,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::Zero, Slot::One, Slot::Inf];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Slot {
        Slot::ALL[i]
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Location {
    Finite(FieldElem),
    Infinity,
    Named(String),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Finite(q) => write!(f, "{q}"),
            Location::Infinity => f.write_str("inf"),
            Location::Named(s) => f.write_str(s),
        }
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Local type of a branch point as read off from the pole orders.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct LocalType {
    pub cls: Subgroup,
    pub bprime: Subgroup,
    pub m: u32,
    pub big_m: u32,
    /// Raw pole orders of (h0, h1, h_inf).
    pub poles: [u32; 3],
}

/// Classifies a point from the orders of h0, h1, h_inf there. `Ok(None)`
/// means unramified. Orders of the zero function are passed as `ORD_INF`.
pub fn classify_point(ord0: i64, ord1: i64, ordinf: i64) -> Result<Option<LocalType>, RamError> {
    let ords = [ord0, ord1, ordinf];
    let bad = || RamError::InconsistentTriple(ords);
    let poles: Vec<u32> = ords
        .iter()
        .map(|&o| if o < 0 { u32::try_from(-o).unwrap_or(u32::MAX) } else { 0 })
        .collect();
    let poles = [poles[0], poles[1], poles[2]];
    if poles.iter().any(|&p| p > 0 && p % 2 == 0) {
        return Err(bad());
    }
    let neg: Vec<usize> = (0..3).filter(|&i| poles[i] > 0).collect();
    match neg.len() {
        0 => Ok(None),
        1 => Err(bad()),
        2 => {
            if poles[neg[0]] != poles[neg[1]] {
                return Err(bad());
            }
            let a = (0..3).find(|i| !neg.contains(i)).unwrap();
            let cls = Subgroup::from_slot(Slot::from_index(a));
            Ok(Some(LocalType { cls, bprime: cls, m: 1, big_m: poles[neg[0]], poles }))
        }
        _ => {
            let max = *poles.iter().max().unwrap();
            let min = *poles.iter().min().unwrap();
            if poles.iter().filter(|&&p| p == max).count() < 2 {
                return Err(bad());
            }
            let bprime = if min < max {
                let a = (0..3).find(|&i| poles[i] == min).unwrap();
                Subgroup::from_slot(Slot::from_index(a))
            } else {
                Subgroup::V4
            };
            Ok(Some(LocalType { cls: Subgroup::V4, bprime, m: min.max(1), big_m: max, poles }))
        }
    }
}

/// One constant stretch `G_i = group` for `from <= i <= to` of the lower filtration.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct FiltrationSegment {
    pub group: Subgroup,
    pub from: u32,
    pub to: u32,
}

/// Lower ramification filtration; trivial beyond the last segment.
pub fn filtration(cls: Subgroup, bprime: Subgroup, m: u32, big_m: u32) -> Vec<FiltrationSegment> {
    match cls {
        Subgroup::V4 => {
            let mut segs = vec![FiltrationSegment { group: Subgroup::V4, from: 0, to: m }];
            if big_m > m {
                segs.push(FiltrationSegment { group: bprime, from: m + 1, to: m + 2 * (big_m - m) });
            }
            segs
        }
        h => vec![FiltrationSegment { group: h, from: 0, to: big_m }],
    }
}

/// Full local record of a branch point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BranchPoint {
    pub location: Location,
    pub cls: Subgroup,
    pub bprime: Subgroup,
    pub m: u32,
    pub big_m: u32,
    pub e: u32,
    pub d: u32,
    pub dprime: u32,
    pub dsecond: u32,
    pub segments: Vec<FiltrationSegment>,
    pub poles: Option<[u32; 3]>,
}

impl BranchPoint {
    pub fn new(location: Location, cls: Subgroup, bprime: Subgroup, m: u32, big_m: u32) -> Result<BranchPoint, RamError> {
        let invalid = |msg: String| Err(RamError::InvalidBranchData(msg));
        if m == 0 || big_m == 0 || m.is_multiple_of(2) || big_m.is_multiple_of(2) {
            return invalid(format!("m = {m} and M = {big_m} must be odd positive integers"));
        }
        if m > big_m {
            return invalid(format!("m = {m} exceeds M = {big_m}"));
        }
        if cls != Subgroup::V4 && (m != 1 || bprime != cls) {
            return invalid(format!("a point with stabilizer {cls} needs m = 1 and bprime = {cls}"));
        }
        if cls == Subgroup::V4 && m == big_m && bprime != Subgroup::V4 {
            return invalid(format!("a V4 point with m = M = {m} has bprime V4, not {bprime}"));
        }
        if cls == Subgroup::V4 && m < big_m && bprime == Subgroup::V4 {
            return invalid(format!("a V4 point with m = {m} < M = {big_m} needs an order-two bprime"));
        }
        let segments = filtration(cls, bprime, m, big_m);
        let e = cls.order();
        let d: u32 = segments.iter().map(|s| (s.to - s.from + 1) * (s.group.order() - 1)).sum();
        let closed = if cls == Subgroup::V4 { m + 2 * big_m + 3 } else { big_m + 1 };
        assert_eq!(d, closed, "filtration sum disagrees with the closed-form different");
        let order_at = |i: u32| {
            segments.iter().find(|s| s.from <= i && i <= s.to).map_or(1, |s| s.group.order())
        };
        let dprime = d - (order_at(0) - 1);
        let dsecond = dprime - (order_at(1) - 1);
        Ok(BranchPoint { location, cls, bprime, m, big_m, e, d, dprime, dsecond, segments, poles: None })
    }

    pub fn from_local(location: Location, t: &LocalType) -> BranchPoint {
        let mut p = BranchPoint::new(location, t.cls, t.bprime, t.m, t.big_m)
            .expect("classify_point output is always admissible");
        p.poles = Some(t.poles);
        p
    }

    /// Levels `i` with `G_i != G_(i+1)`.
    pub fn jumps(&self) -> Vec<u32> {
        self.segments.iter().map(|s| s.to).collect()
    }

    /// Order of `G_i`.
    pub fn group_order_at(&self, i: u32) -> u32 {
        self.segments.iter().find(|s| s.from <= i && i <= s.to).map_or(1, |s| s.group.order())
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BranchTable {
    pub g_y: u32,
    pub entries: Vec<BranchPoint>,
}

impl BranchTable {
    pub fn count(&self, cls: Subgroup) -> usize {
        self.entries.iter().filter(|p| p.cls == cls).count()
    }
}

/// Genus of X from `2 g_X - 2 = 4 (2 g_Y - 2) + sum (4 / e_Q) d_Q`.
pub fn genus_rh(table: &BranchTable) -> Result<u32, RamError> {
    let mut two_g: i64 = 8 * table.g_y as i64 - 6;
    for p in &table.entries {
        two_g += (4 / p.e as i64) * p.d as i64;
    }
    if two_g < 0 || two_g % 2 != 0 {
        return Err(RamError::NonIntegralGenus(two_g));
    }
    Ok((two_g / 2) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyrat::ORD_INF;

    fn named(s: &str) -> Location {
        Location::Named(s.to_string())
    }

    #[test]
    fn classify_examples() {
        let t = classify_point(0, -5, -5).unwrap().unwrap();
        assert_eq!((t.cls, t.bprime, t.m, t.big_m), (Subgroup::H0, Subgroup::H0, 1, 5));
        let t = classify_point(-9, -15, -15).unwrap().unwrap();
        assert_eq!((t.cls, t.bprime, t.m, t.big_m), (Subgroup::V4, Subgroup::H0, 9, 15));
        assert_eq!(classify_point(0, 0, 0), Ok(None));
        assert_eq!(classify_point(3, ORD_INF, 0), Ok(None));
        let t = classify_point(-3, -3, -1).unwrap().unwrap();
        assert_eq!((t.bprime, t.m, t.big_m), (Subgroup::Hinf, 1, 3));
        let t = classify_point(-3, -3, ORD_INF).unwrap().unwrap();
        assert_eq!(t.cls, Subgroup::Hinf);
        let t = classify_point(-5, -5, -5).unwrap().unwrap();
        assert_eq!((t.cls, t.bprime), (Subgroup::V4, Subgroup::V4));
    }

    #[test]
    fn classify_rejects_bad_triples() {
        for ords in [[-3, 0, 0], [-3, -5, 0], [-3, -5, -1], [-4, -4, 0]] {
            assert!(matches!(
                classify_point(ords[0], ords[1], ords[2]),
                Err(RamError::InconsistentTriple(_))
            ), "{ords:?}");
        }
    }

    #[test]
    fn filtration_examples() {
        let p = BranchPoint::new(named("Q2"), Subgroup::V4, Subgroup::H0, 9, 15).unwrap();
        assert_eq!(p.jumps(), vec![9, 21]);
        assert_eq!(p.d, 42);
        assert_eq!((p.dprime, p.dsecond), (39, 36));
        let p = BranchPoint::new(named("Q1"), Subgroup::Hinf, Subgroup::Hinf, 1, 21).unwrap();
        assert_eq!(p.jumps(), vec![21]);
        assert_eq!(p.d, 22);
        let p = BranchPoint::new(named("Q"), Subgroup::V4, Subgroup::V4, 1, 1).unwrap();
        assert_eq!(p.d, 6);
        assert_eq!((p.group_order_at(1), p.group_order_at(2)), (4, 1));
    }

    #[test]
    fn invalid_branch_data() {
        assert!(BranchPoint::new(named("P"), Subgroup::H0, Subgroup::H0, 3, 5).is_err());
        assert!(BranchPoint::new(named("P"), Subgroup::V4, Subgroup::H0, 5, 5).is_err());
        assert!(BranchPoint::new(named("P"), Subgroup::V4, Subgroup::V4, 3, 5).is_err());
        assert!(BranchPoint::new(named("P"), Subgroup::V4, Subgroup::H1, 7, 5).is_err());
        assert!(BranchPoint::new(named("P"), Subgroup::V4, Subgroup::H1, 2, 5).is_err());
    }

    #[test]
    fn genus_examples() {
        let t = BranchTable {
            g_y: 1,
            entries: vec![
                BranchPoint::new(named("Q1"), Subgroup::Hinf, Subgroup::Hinf, 1, 21).unwrap(),
                BranchPoint::new(named("Q2"), Subgroup::V4, Subgroup::H0, 9, 15).unwrap(),
            ],
        };
        assert_eq!(genus_rh(&t), Ok(44));
        let t = BranchTable {
            g_y: 0,
            entries: vec![BranchPoint::new(Location::Infinity, Subgroup::V4, Subgroup::H0, 9, 15).unwrap()],
        };
        assert_eq!(genus_rh(&t), Ok(18));
        let t = BranchTable {
            g_y: 0,
            entries: vec![
                BranchPoint::new(named("0"), Subgroup::H0, Subgroup::H0, 1, 5).unwrap(),
                BranchPoint::new(named("1"), Subgroup::H1, Subgroup::H1, 1, 7).unwrap(),
                BranchPoint::new(Location::Infinity, Subgroup::Hinf, Subgroup::Hinf, 1, 3).unwrap(),
            ],
        };
        assert_eq!(genus_rh(&t), Ok(15));
        assert!(matches!(genus_rh(&BranchTable { g_y: 0, entries: vec![] }), Err(RamError::NonIntegralGenus(-6))));
    }

    #[test]
    fn single_v4_point_genus_formula() {
        for m in (1..=31).step_by(2) {
            for big_m in (m..=31).step_by(2) {
                let b = if m == big_m { Subgroup::V4 } else { Subgroup::H1 };
                let p = BranchPoint::new(Location::Infinity, Subgroup::V4, b, m, big_m).unwrap();
                let t = BranchTable { g_y: 0, entries: vec![p] };
                assert_eq!(genus_rh(&t).unwrap(), (m + 2 * big_m - 3) / 2);
            }
        }
    }
}
