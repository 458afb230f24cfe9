//! JSON document formats. Complex numbers are `[re, im]` pairs; floats are
//! written in shortest round-trip form so reading back is bit-exact.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::group::{Family, FiniteGroup, GroupDescriptor, ProbabilityMeasure};
use crate::linalg::{c, CMat, CVec, C64};
use crate::rep::{PositiveDefiniteFunction, UnitaryRep};

pub type ComplexPair = [f64; 2];

pub fn pair(z: C64) -> ComplexPair {
    [z.re, z.im]
}

pub fn from_pair(p: ComplexPair) -> C64 {
    c(p[0], p[1])
}

pub fn matrix_to_json(m: &CMat) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| pair(m[(r, k)])).collect()).collect()
}

pub fn matrix_from_json(rows: &[Vec<ComplexPair>]) -> Result<CMat> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(nr, nc, |r, k| from_pair(rows[r][k])))
}

pub fn vector_to_json(v: &CVec) -> Vec<ComplexPair> {
    v.iter().map(|z| pair(*z)).collect()
}

pub fn vector_from_json(v: &[ComplexPair]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|p| from_pair(*p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupJson {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic_factors: Option<Vec<usize>>,
}

impl GroupJson {
    pub fn from_group(g: &FiniteGroup) -> Self {
        Self {
            order: g.order(),
            table: g.table().to_vec(),
            labels: g.labels().to_vec(),
            family: Some(g.family().to_string()),
            cyclic_factors: g.cyclic_factors().map(|f| f.to_vec()),
        }
    }

    pub fn to_group(&self) -> Result<FiniteGroup> {
        if self.table.len() != self.order || self.labels.len() != self.order {
            return Err(Error::DimensionMismatch(format!(
                "order {} with {} table rows and {} labels",
                self.order,
                self.table.len(),
                self.labels.len()
            )));
        }
        let family = match &self.family {
            Some(f) => Family::parse(f).ok_or_else(|| Error::UnsupportedDescriptor(f.clone()))?,
            None => Family::Explicit,
        };
        FiniteGroup::from_table(self.table.clone(), Some(self.labels.clone()), family, self.cyclic_factors.clone())
    }
}

/// Either a built-in alias such as `"s3"` or an inline group document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Alias(String),
    Inline(GroupJson),
}

impl GroupRef {
    pub fn resolve(&self) -> Result<FiniteGroup> {
        match self {
            GroupRef::Alias(a) => FiniteGroup::build(&GroupDescriptor::from_alias(a)?),
            GroupRef::Inline(j) => j.to_group(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureJson {
    pub group: GroupRef,
    pub weights: Vec<f64>,
}

impl MeasureJson {
    pub fn to_measure(&self) -> Result<(FiniteGroup, ProbabilityMeasure)> {
        let g = self.group.resolve()?;
        let mu = ProbabilityMeasure::on(&g, self.weights.clone())?;
        Ok((g, mu))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepJson {
    pub group: GroupRef,
    pub dim: usize,
    pub matrices: Vec<Vec<Vec<ComplexPair>>>,
}

impl RepJson {
    pub fn from_rep(group: GroupRef, pi: &UnitaryRep) -> Self {
        Self { group, dim: pi.dim(), matrices: pi.matrices().iter().map(matrix_to_json).collect() }
    }

    pub fn to_rep(&self) -> Result<(FiniteGroup, UnitaryRep)> {
        let g = self.group.resolve()?;
        let mats = self.matrices.iter().map(|m| matrix_from_json(m)).collect::<Result<Vec<_>>>()?;
        if mats.iter().any(|m| m.nrows() != self.dim || m.ncols() != self.dim) {
            return Err(Error::DimensionMismatch(format!("matrices are not {}×{}", self.dim, self.dim)));
        }
        let pi = UnitaryRep::new(&g, mats, "user")?;
        Ok((g, pi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfJson {
    pub group: GroupRef,
    pub values: Vec<ComplexPair>,
}

impl PdfJson {
    pub fn from_pdf(group: GroupRef, phi: &PositiveDefiniteFunction) -> Self {
        Self { group, values: phi.values().iter().map(|z| pair(*z)).collect() }
    }

    pub fn to_pdf(&self) -> Result<(FiniteGroup, PositiveDefiniteFunction)> {
        let g = self.group.resolve()?;
        let phi = PositiveDefiniteFunction::new(&g, self.values.iter().map(|p| from_pair(*p)).collect())?;
        Ok((g, phi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Vec<Vec<ComplexPair>>>,
}

impl ChannelJson {
    pub fn from_channel(ch: &QuantumChannel) -> Self {
        Self { dim_in: ch.dim_in(), dim_out: ch.dim_out(), kraus: ch.kraus().iter().map(matrix_to_json).collect() }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = self.kraus.iter().map(|m| matrix_from_json(m)).collect::<Result<Vec<_>>>()?;
        if kraus.iter().any(|k| k.nrows() != self.dim_out || k.ncols() != self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operators must be {}×{}",
                self.dim_out, self.dim_in
            )));
        }
        QuantumChannel::new(kraus)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(Error::from)
}

pub fn from_json_str<'a, T: Deserialize<'a>>(s: &'a str) -> Result<T> {
    serde_json::from_str(s).map_err(Error::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::theta;
    use crate::linalg::cr;
    use crate::rep::irrep_catalog;

    #[test]
    fn group_round_trip() {
        for alias in ["z6", "s3", "d4-semidirect", "z2^3", "s4"] {
            let g = FiniteGroup::build(&GroupDescriptor::from_alias(alias).unwrap()).unwrap();
            let j = to_json_string(&GroupJson::from_group(&g)).unwrap();
            let back: GroupJson = from_json_str(&j).unwrap();
            let h = back.to_group().unwrap();
            assert_eq!(h.table(), g.table());
            assert_eq!(h.labels(), g.labels());
            assert_eq!(h.family(), g.family());
        }
    }

    #[test]
    fn group_ref_forms() {
        let r: GroupRef = from_json_str("\"z4\"").unwrap();
        assert_eq!(r.resolve().unwrap().order(), 4);
        let inline = r#"{"order":2,"table":[[0,1],[1,0]],"labels":["e","a"]}"#;
        let r: GroupRef = from_json_str(inline).unwrap();
        assert!(r.resolve().unwrap().is_abelian());
    }

    #[test]
    fn measure_round_trip_is_bit_exact() {
        let w = vec![0.1, 0.2, 1.0 / 3.0, 0.3 - 1.0 / 3.0 + 0.4, 0.0, 0.0];
        let m = MeasureJson { group: GroupRef::Alias("s3".into()), weights: w.clone() };
        let back: MeasureJson = from_json_str(&to_json_string(&m).unwrap()).unwrap();
        for (a, b) in w.iter().zip(&back.weights) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert!(back.to_measure().is_ok());
    }

    #[test]
    fn rep_pdf_channel_round_trip() {
        let g = FiniteGroup::build(&GroupDescriptor::from_alias("s3").unwrap()).unwrap();
        let pi = irrep_catalog(&g).unwrap().into_iter().find(|p| p.dim() == 2).unwrap();
        let rj = RepJson::from_rep(GroupRef::Alias("s3".into()), &pi);
        let (_, back) = from_json_str::<RepJson>(&to_json_string(&rj).unwrap()).unwrap().to_rep().unwrap();
        assert_eq!(back.matrices(), pi.matrices());

        let phi = PositiveDefiniteFunction::new(&g, vec![cr(1.0), c(-0.5, 0.3), c(-0.5, -0.3), cr(0.0), cr(0.1), cr(-0.1)]);
        if let Ok(phi) = phi {
            let pj = PdfJson::from_pdf(GroupRef::Alias("s3".into()), &phi);
            let (_, back) = from_json_str::<PdfJson>(&to_json_string(&pj).unwrap()).unwrap().to_pdf().unwrap();
            assert_eq!(back.values(), phi.values());
        }

        let ch = theta(&ProbabilityMeasure::haar(&g), &g).unwrap();
        let cj = ChannelJson::from_channel(&ch);
        let back = from_json_str::<ChannelJson>(&to_json_string(&cj).unwrap()).unwrap().to_channel().unwrap();
        assert_eq!(back.kraus(), ch.kraus());
    }

    #[test]
    fn rejects_bad_documents() {
        let bad = r#"{"dim_in":2,"dim_out":2,"kraus":[[[[2,0],[0,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(from_json_str::<ChannelJson>(bad).unwrap().to_channel(), Err(Error::NotTracePreserving(_))));
        let ragged = r#"{"dim_in":2,"dim_out":2,"kraus":[[[[1,0]],[[0,0],[1,0]]]]}"#;
        assert!(from_json_str::<ChannelJson>(ragged).unwrap().to_channel().is_err());
        assert!(matches!(from_json_str::<GroupRef>("{\"order\":3}"), Err(Error::Serialization(_))));
    }
}
