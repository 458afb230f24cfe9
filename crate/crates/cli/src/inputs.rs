//! Resolution of group, measure, function and channel arguments. Every file
//! read is recorded so it can be hashed into the run manifest.

use std::path::{Path, PathBuf};

use harmonic_channels::channel::QuantumChannel;
use harmonic_channels::group::{FiniteGroup, GroupDescriptor, ProbabilityMeasure};
use harmonic_channels::io::{from_json_str, from_pair, ChannelJson, GroupRef, MeasureJson, PdfJson, RepJson};
use harmonic_channels::linalg::{c, CVec};
use harmonic_channels::rep::{irrep_catalog, pdf_from_rep, regular_reps, PositiveDefiniteFunction, UnitaryRep};

use crate::error::{CliError, CliResult};
use crate::expr::{parse_list, parse_real_list};

#[derive(Debug, Default)]
pub struct Inputs {
    pub files: Vec<PathBuf>,
}

fn looks_like_file(s: &str) -> bool {
    s.ends_with(".json") || Path::new(s).is_file()
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        self.files.push(path.to_path_buf());
        Ok(text)
    }

    /// A built-in alias or a path to a group document.
    pub fn group(&mut self, spec: &str) -> CliResult<(FiniteGroup, String)> {
        if looks_like_file(spec) {
            let text = self.read(Path::new(spec))?;
            let r: GroupRef = from_json_str(&text)?;
            let name = match &r {
                GroupRef::Alias(a) => a.clone(),
                GroupRef::Inline(_) => "inline".to_string(),
            };
            return Ok((r.resolve()?, name));
        }
        let g = FiniteGroup::build(&GroupDescriptor::from_alias(spec)?)?;
        Ok((g, spec.to_string()))
    }

    /// `haar`, a weight list, or a measure document on a group of the same order.
    pub fn measure(&mut self, g: &FiniteGroup, spec: &str) -> CliResult<ProbabilityMeasure> {
        if spec.trim().eq_ignore_ascii_case("haar") {
            return Ok(ProbabilityMeasure::haar(g));
        }
        let weights = if looks_like_file(spec) {
            let m: MeasureJson = from_json_str(&self.read(Path::new(spec))?)?;
            m.weights
        } else {
            parse_real_list(spec)?
        };
        Ok(ProbabilityMeasure::on(g, weights)?)
    }

    /// A value list, or a function document.
    pub fn pdf_values(&mut self, g: &FiniteGroup, spec: &str) -> CliResult<PositiveDefiniteFunction> {
        let values = if looks_like_file(spec) {
            let p: PdfJson = from_json_str(&self.read(Path::new(spec))?)?;
            p.values.into_iter().map(from_pair).collect()
        } else {
            parse_list(spec)?.into_iter().map(|(re, im)| c(re, im)).collect()
        };
        Ok(PositiveDefiniteFunction::new(g, values)?)
    }

    pub fn rep(&mut self, g: &FiniteGroup, sel: &RepSelector) -> CliResult<UnitaryRep> {
        match sel {
            RepSelector::File(path) => {
                let r: RepJson = from_json_str(&self.read(path)?)?;
                let (h, pi) = r.to_rep()?;
                if h.order() != g.order() {
                    return Err(CliError::validation(format!(
                        "representation is on a group of order {}, expected {}",
                        h.order(),
                        g.order()
                    )));
                }
                Ok(pi)
            }
            RepSelector::Irrep(label) => select_irrep(g, label),
        }
    }

    pub fn channel(&mut self, path: &Path) -> CliResult<QuantumChannel> {
        let j: ChannelJson = from_json_str(&self.read(path)?)?;
        Ok(j.to_channel()?)
    }
}

#[derive(Debug, Clone)]
pub enum RepSelector {
    Irrep(String),
    File(PathBuf),
}

/// Exact label, `<k>d` (first irrep of dimension k), catalog index, or
/// `regular` for the left regular representation.
pub fn select_irrep(g: &FiniteGroup, sel: &str) -> CliResult<UnitaryRep> {
    if sel == "regular" {
        return Ok(regular_reps(g).0);
    }
    let cat = irrep_catalog(g)?;
    if let Some(pi) = cat.iter().find(|p| p.label == sel) {
        return Ok(pi.clone());
    }
    if let Some(k) = sel.strip_suffix('d').and_then(|k| k.parse::<usize>().ok()) {
        return cat
            .into_iter()
            .find(|p| p.dim() == k)
            .ok_or_else(|| CliError::validation(format!("no irreducible representation of dimension {k}")));
    }
    if let Ok(i) = sel.parse::<usize>() {
        let n = cat.len();
        return cat
            .into_iter()
            .nth(i)
            .ok_or_else(|| CliError::validation(format!("irrep index {i} out of range (catalog has {n})")));
    }
    let labels: Vec<String> = cat.iter().map(|p| p.label.clone()).collect();
    Err(CliError::validation(format!("unknown irrep '{sel}'; available: {}", labels.join(", "))))
}

pub fn parse_vector(spec: &str) -> CliResult<CVec> {
    let v = parse_list(spec)?;
    Ok(CVec::from_iterator(v.len(), v.into_iter().map(|(re, im)| c(re, im))))
}

/// φ(s) = ⟨π(s)ξ, ξ⟩.
pub fn pdf_from_vector(pi: &UnitaryRep, xi_spec: &str) -> CliResult<PositiveDefiniteFunction> {
    let xi = parse_vector(xi_spec)?;
    if xi.len() != pi.dim() {
        return Err(CliError::validation(format!(
            "xi has {} entries, representation has dimension {}",
            xi.len(),
            pi.dim()
        )));
    }
    Ok(pdf_from_rep(pi, &xi)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s3() -> FiniteGroup {
        FiniteGroup::build(&GroupDescriptor::from_alias("s3").unwrap()).unwrap()
    }

    #[test]
    fn irrep_selectors() {
        let g = s3();
        assert_eq!(select_irrep(&g, "2d").unwrap().dim(), 2);
        assert_eq!(select_irrep(&g, "sign").unwrap().dim(), 1);
        assert_eq!(select_irrep(&g, "0").unwrap().label, "trivial");
        assert_eq!(select_irrep(&g, "regular").unwrap().dim(), 6);
        assert!(select_irrep(&g, "3d").is_err());
        assert!(select_irrep(&g, "99").is_err());
        assert!(select_irrep(&g, "nope").is_err());
    }

    #[test]
    fn measures_and_functions() {
        let g = s3();
        let mut inp = Inputs::default();
        assert_eq!(inp.measure(&g, "haar").unwrap().weights(), ProbabilityMeasure::haar(&g).weights());
        assert_eq!(inp.measure(&g, "1/2,1/2,0,0,0,0").unwrap().weights()[1], 0.5);
        assert!(inp.measure(&g, "1,0").is_err());
        assert!(inp.pdf_values(&g, "1,1,1,1,1,1").is_ok());
        assert!(inp.pdf_values(&g, "2,1,1,1,1,1").is_err());
        assert!(inp.files.is_empty());
    }

    #[test]
    fn vector_length_is_checked() {
        let g = s3();
        let pi = select_irrep(&g, "2d").unwrap();
        assert!(pdf_from_vector(&pi, "1").is_err());
        assert!(pdf_from_vector(&pi, "1,1").is_err());
        assert!(pdf_from_vector(&pi, "i/sqrt(10),3/sqrt(10)").is_ok());
    }
}
