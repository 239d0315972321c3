//! The unitary duals of the torus `T^r` and of `SU(2)`, truncated by the
//! eigenvalue `<xi> = (1 + nu_xi)^{1/2}` of `(Id + Laplacian)^{1/2}`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupId {
    Torus(usize),
    Su2,
}

impl GroupId {
    pub fn torus(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::UnknownGroup("torus:0".into()));
        }
        Ok(GroupId::Torus(r))
    }

    /// Dimension of the group as a manifold.
    pub fn dim(&self) -> usize {
        match self {
            GroupId::Torus(r) => *r,
            GroupId::Su2 => 3,
        }
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, GroupId::Torus(_))
    }

    /// Uniform bound on representation dimensions, if one exists.
    pub fn dimension_bound(&self) -> Option<usize> {
        match self {
            GroupId::Torus(_) => Some(1),
            GroupId::Su2 => None,
        }
    }

    pub fn validate(&self, xi: &RepIndex) -> Result<()> {
        match (self, xi) {
            (GroupId::Torus(r), RepIndex::Torus(v)) if v.len() == *r => Ok(()),
            (GroupId::Su2, RepIndex::Su2 { .. }) => Ok(()),
            _ => Err(Error::IndexMismatch {
                group: self.to_string(),
                index: xi.to_string(),
            }),
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupId::Torus(r) => write!(f, "torus:{r}"),
            GroupId::Su2 => f.write_str("su2"),
        }
    }
}

impl FromStr for GroupId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "su2" {
            return Ok(GroupId::Su2);
        }
        s.strip_prefix("torus:")
            .and_then(|r| r.parse::<usize>().ok())
            .filter(|&r| r >= 1)
            .map(GroupId::Torus)
            .ok_or_else(|| Error::UnknownGroup(s.to_string()))
    }
}

impl Serialize for GroupId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for GroupId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A point of the unitary dual. SU(2) spins are stored as `2l` so that
/// half-integers stay exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RepIndex {
    Torus(Vec<i64>),
    Su2 { twice_spin: u32 },
}

impl RepIndex {
    pub fn spin(twice_spin: u32) -> Self {
        RepIndex::Su2 { twice_spin }
    }

    /// Exact integer multiple of the Casimir eigenvalue: `|xi|^2` on the
    /// torus and `4 l (l+1) = t (t+2)` for SU(2) with `t = 2l`.
    fn casimir_key(&self) -> u64 {
        match self {
            RepIndex::Torus(v) => v.iter().map(|&x| (x * x) as u64).sum(),
            RepIndex::Su2 { twice_spin } => {
                let t = *twice_spin as u64;
                t * (t + 2)
            }
        }
    }

    /// Enumeration order: ascending `<xi>`, ties broken lexicographically.
    pub fn dual_order(&self, other: &RepIndex) -> Ordering {
        self.casimir_key()
            .cmp(&other.casimir_key())
            .then_with(|| self.cmp(other))
    }
}

impl fmt::Display for RepIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepIndex::Torus(v) => {
                for (k, x) in v.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            RepIndex::Su2 { twice_spin } if twice_spin % 2 == 0 => {
                write!(f, "l={}", twice_spin / 2)
            }
            RepIndex::Su2 { twice_spin } => write!(f, "l={twice_spin}/2"),
        }
    }
}

impl FromStr for RepIndex {
    type Err = Error;

    /// Accepts `"3,4"` / `"-1"` for torus characters and `"l=3/2"` / `"l=1"`
    /// for SU(2) spins.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadIndex(s.to_string());
        let s = s.trim();
        if let Some(spin) = s.strip_prefix("l=") {
            let twice_spin = match spin.split_once('/') {
                Some((num, "2")) => {
                    let t: u32 = num.trim().parse().map_err(|_| bad())?;
                    if t % 2 == 0 {
                        return Err(bad());
                    }
                    t
                }
                Some(_) => return Err(bad()),
                None => 2 * spin.trim().parse::<u32>().map_err(|_| bad())?,
            };
            return Ok(RepIndex::Su2 { twice_spin });
        }
        let coords = s
            .split(',')
            .map(|x| x.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| bad())?;
        Ok(RepIndex::Torus(coords))
    }
}

impl Serialize for RepIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RepIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RepMeta {
    /// `d_xi`.
    pub dim: usize,
    /// Laplace-Beltrami eigenvalue `nu_xi`.
    pub casimir: f64,
    /// `<xi> = (1 + nu_xi)^{1/2}`.
    pub bracket: f64,
}

pub fn rep_meta(group: &GroupId, xi: &RepIndex) -> Result<RepMeta> {
    group.validate(xi)?;
    let (dim, casimir) = match xi {
        RepIndex::Torus(_) => (1, xi.casimir_key() as f64),
        RepIndex::Su2 { twice_spin } => {
            (*twice_spin as usize + 1, xi.casimir_key() as f64 / 4.0)
        }
    };
    Ok(RepMeta {
        dim,
        casimir,
        bracket: (1.0 + casimir).sqrt(),
    })
}

fn check_cutoff(cutoff: f64) -> Result<()> {
    if cutoff.is_finite() && cutoff >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidCutoff(cutoff))
    }
}

/// All representations with `<xi> <= cutoff`, in dual order.
pub fn enumerate_reps(group: &GroupId, cutoff: f64) -> Result<Vec<RepIndex>> {
    check_cutoff(cutoff)?;
    let mut out = Vec::new();
    match *group {
        GroupId::Torus(r) => {
            // One extra shell guards against rounding in the square root.
            let radius = (cutoff * cutoff - 1.0).max(0.0).sqrt().floor() as i64 + 1;
            let mut current = vec![0i64; r];
            push_lattice(&mut out, &mut current, 0, radius, 0, cutoff);
        }
        GroupId::Su2 => {
            let mut t = 0u32;
            loop {
                let xi = RepIndex::spin(t);
                if rep_meta(group, &xi)?.bracket > cutoff {
                    break;
                }
                out.push(xi);
                t += 1;
            }
        }
    }
    out.sort_by(RepIndex::dual_order);
    Ok(out)
}

fn push_lattice(
    out: &mut Vec<RepIndex>,
    current: &mut Vec<i64>,
    axis: usize,
    radius: i64,
    partial: i64,
    cutoff: f64,
) {
    if axis == current.len() {
        let xi = RepIndex::Torus(current.clone());
        if ((1 + partial) as f64).sqrt() <= cutoff {
            out.push(xi);
        }
        return;
    }
    for x in -radius..=radius {
        let p = partial + x * x;
        if p > radius * radius + 2 * radius {
            continue;
        }
        current[axis] = x;
        push_lattice(out, current, axis + 1, radius, p, cutoff);
    }
    current[axis] = 0;
}

/// Smallest `C_G` with `d_xi <= C_G <xi>^{dim/2}` over the truncated dual.
pub fn weyl_constant_check(group: &GroupId, cutoff: f64) -> Result<f64> {
    let half_dim = group.dim() as f64 / 2.0;
    enumerate_reps(group, cutoff)?
        .iter()
        .map(|xi| rep_meta(group, xi).map(|m| m.dim as f64 / m.bracket.powf(half_dim)))
        .try_fold(0.0f64, |acc, r| r.map(|r| acc.max(r)))
}
