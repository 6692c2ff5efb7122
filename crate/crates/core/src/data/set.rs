use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Where a dataset's labels come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Ground-truth (possibly slightly noisy) labels.
    Strong,
    /// Labels from a weak annotator.
    Weak,
    /// Teacher labels with a per-sample uncertainty.
    Soft,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Strong => "strong",
            Tier::Weak => "weak",
            Tier::Soft => "soft",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "strong" => Ok(Tier::Strong),
            "weak" => Ok(Tier::Weak),
            "soft" => Ok(Tier::Soft),
            other => Err(Error::ConfigParse(format!("unknown tier `{other}`"))),
        }
    }
}

/// Inputs (`n×d`) with labels (`n×p`). Soft sets also carry one uncertainty
/// per sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    inputs: Matrix,
    labels: Matrix,
    tier: Tier,
    confidences: Option<Vec<f64>>,
}

impl LabeledSet {
    /// A strong or weak set.
    pub fn new(inputs: Matrix, labels: Matrix, tier: Tier) -> Result<Self> {
        if tier == Tier::Soft {
            return Err(Error::MissingConfidences);
        }
        Self::build(inputs, labels, tier, None)
    }

    /// A soft set; `sigmas` holds the teacher uncertainty of every sample.
    pub fn soft(inputs: Matrix, labels: Matrix, sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.len() != inputs.rows() {
            return Err(Error::dim(inputs.rows(), sigmas.len(), "confidences"));
        }
        if sigmas.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
            return Err(Error::NegativeInput("confidence"));
        }
        Self::build(inputs, labels, Tier::Soft, Some(sigmas))
    }

    fn build(inputs: Matrix, labels: Matrix, tier: Tier, confidences: Option<Vec<f64>>) -> Result<Self> {
        if inputs.rows() != labels.rows() {
            return Err(Error::dim(inputs.rows(), labels.rows(), "label rows"));
        }
        Ok(Self {
            inputs,
            labels,
            tier,
            confidences,
        })
    }

    pub fn empty(input_dim: usize, label_dim: usize, tier: Tier) -> Self {
        Self {
            inputs: Matrix::zeros(0, input_dim),
            labels: Matrix::zeros(0, label_dim),
            tier,
            confidences: (tier == Tier::Soft).then(Vec::new),
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn labels(&self) -> &Matrix {
        &self.labels
    }

    pub fn tier(&self) -> Tier {
        self.tier
    }

    /// Teacher uncertainties Σ; present only for soft sets.
    pub fn confidences(&self) -> Option<&[f64]> {
        self.confidences.as_deref()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn label_dim(&self) -> usize {
        self.labels.cols()
    }

    /// Rows at `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            inputs: self.inputs.select_rows(indices),
            labels: self.labels.select_rows(indices),
            tier: self.tier,
            confidences: self
                .confidences
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
        }
    }

    /// The first `n` rows.
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        self.subset(&(0..n).collect::<Vec<_>>())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = (0..self.input_dim()).map(|j| format!("x{j}")).collect();
        header.extend((0..self.label_dim()).map(|j| format!("y{j}")));
        header.push("tier".into());
        header.push("sigma".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.inputs.row(i).iter().map(|v| format!("{v:?}")).collect();
            rec.extend(self.labels.row(i).iter().map(|v| format!("{v:?}")));
            rec.push(self.tier.as_str().into());
            rec.push(
                self.confidences
                    .as_ref()
                    .map_or(String::new(), |c| format!("{:?}", c[i])),
            );
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        let d = header.iter().filter(|h| h.starts_with('x')).count();
        let p = header.iter().filter(|h| h.starts_with('y')).count();
        if header.len() != d + p + 2 {
            return Err(Error::ConfigParse("dataset csv: unexpected columns".into()));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::ConfigParse(format!("dataset csv: bad number `{s}`")))
        };
        let (mut xs, mut ys, mut sig) = (Vec::new(), Vec::new(), Vec::new());
        let mut tier = None;
        for rec in r.records() {
            let rec = rec?;
            for j in 0..d {
                xs.push(parse(&rec[j])?);
            }
            for j in 0..p {
                ys.push(parse(&rec[d + j])?);
            }
            let t = Tier::parse(&rec[d + p])?;
            if *tier.get_or_insert(t) != t {
                return Err(Error::ConfigParse("dataset csv: mixed tiers".into()));
            }
            if t == Tier::Soft {
                sig.push(parse(&rec[d + p + 1])?);
            }
        }
        let n = xs.len() / d.max(1);
        let inputs = Matrix::from_vec(n, d, xs)?;
        let labels = Matrix::from_vec(n, p, ys)?;
        match tier {
            None => Ok(Self::empty(d, p, Tier::Weak)),
            Some(Tier::Soft) => Self::soft(inputs, labels, sig),
            Some(t) => Self::new(inputs, labels, t),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_requires_confidences() {
        let x = Matrix::column(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            LabeledSet::new(x.clone(), x.clone(), Tier::Soft),
            Err(Error::MissingConfidences)
        ));
        assert!(LabeledSet::soft(x.clone(), x.clone(), vec![0.1]).is_err());
        assert!(LabeledSet::soft(x.clone(), x.clone(), vec![0.1, -0.1]).is_err());
        let s = LabeledSet::soft(x.clone(), x, vec![0.1, 0.0]).unwrap();
        assert_eq!(s.subset(&[1]).confidences(), Some(&[0.0][..]));
    }

    #[test]
    fn csv_round_trip() {
        let x = Matrix::from_rows(&[[1.0, -0.5], [0.1, 3.0]]).unwrap();
        let y = Matrix::from_rows(&[[0.25, 0.75], [1.0, 0.0]]).unwrap();
        let s = LabeledSet::soft(x, y, vec![0.5, 1e-9]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,y0,y1,tier,sigma\n"));
        assert_eq!(LabeledSet::read_csv(&buf[..]).unwrap(), s);
    }
}
