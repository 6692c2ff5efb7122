use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::kmeans::{kmeans, nearest_centroid};
use crate::gp::{GpModel, KernelSpec, Prediction};
use crate::numerics::{Matrix, Rng};

/// One GP per k-means cluster; queries go to the GP of the nearest centroid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteredGp {
    centroids: Matrix,
    members: Vec<Vec<usize>>,
    gps: Vec<GpModel>,
}

const TEACHER_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TeacherFile {
    format: String,
    version: u32,
    teacher: ClusteredGp,
}

impl ClusteredGp {
    /// Clusters `inputs` into `k` groups and fits an independent GP on each.
    pub fn fit(
        kernel: &KernelSpec,
        inputs: &Matrix,
        targets: &Matrix,
        k: usize,
        rng: &mut Rng,
    ) -> Result<Self> {
        Self::fit_with_jitter(kernel, inputs, targets, k, rng, crate::numerics::DEFAULT_JITTER)
    }

    pub fn fit_with_jitter(
        kernel: &KernelSpec,
        inputs: &Matrix,
        targets: &Matrix,
        k: usize,
        rng: &mut Rng,
        jitter: f64,
    ) -> Result<Self> {
        if inputs.rows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if targets.rows() != inputs.rows() {
            return Err(Error::dim(inputs.rows(), targets.rows(), "teacher targets rows"));
        }
        let clusters = kmeans(inputs, k, rng)?;
        let mut members = vec![Vec::new(); k];
        for (i, &c) in clusters.assignment.iter().enumerate() {
            members[c].push(i);
        }
        let gps = members
            .iter()
            .map(|idx| {
                GpModel::fit_with_jitter(
                    kernel,
                    &inputs.select_rows(idx),
                    &targets.select_rows(idx),
                    jitter,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            centroids: clusters.centroids,
            members,
            gps,
        })
    }

    /// Cluster that serves queries at `x`.
    pub fn route(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.centroids.cols() {
            return Err(Error::dim(self.centroids.cols(), x.len(), "teacher query"));
        }
        Ok(nearest_centroid(&self.centroids, x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let c = self.route(x)?;
        self.gps[c].predict(x)
    }

    pub fn centroids(&self) -> &Matrix {
        &self.centroids
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn gps(&self) -> &[GpModel] {
        &self.gps
    }

    pub fn cluster_count(&self) -> usize {
        self.gps.len()
    }

    pub fn input_dim(&self) -> usize {
        self.centroids.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.gps[0].output_dim()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TeacherFile {
            format: "fwl-teacher".into(),
            version: TEACHER_FORMAT_VERSION,
            teacher: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TeacherFile = serde_json::from_str(text)?;
        if file.version != TEACHER_FORMAT_VERSION || file.format != "fwl-teacher" {
            return Err(Error::Version {
                found: file.version,
                expected: TEACHER_FORMAT_VERSION,
            });
        }
        let t = file.teacher;
        if t.gps.is_empty() || t.gps.len() != t.centroids.rows() || t.members.len() != t.gps.len() {
            return Err(Error::ConfigParse("teacher file: cluster counts disagree".into()));
        }
        for (gp, m) in t.gps.iter().zip(&t.members) {
            gp.validate()?;
            if gp.train_inputs().rows() != m.len() || gp.input_dim() != t.centroids.cols() {
                return Err(Error::ConfigParse("teacher file: cluster shapes disagree".into()));
            }
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Matrix, Matrix) {
        let xs = [-10.2, -10.0, -9.7, -9.5, 9.6, 10.0, 10.1, 10.4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.sin()).collect();
        (Matrix::column(&xs).unwrap(), Matrix::column(&ys).unwrap())
    }

    #[test]
    fn one_cluster_is_the_single_gp() {
        let (x, y) = blobs();
        let k = KernelSpec::rbf_white(0.01);
        let single = GpModel::fit(&k, &x, &y).unwrap();
        let clustered = ClusteredGp::fit(&k, &x, &y, 1, &mut Rng::new(1)).unwrap();
        for q in [-12.0, -3.0, 0.0, 0.4, 9.9] {
            assert_eq!(single.predict(&[q]).unwrap(), clustered.predict(&[q]).unwrap());
        }
    }

    #[test]
    fn separated_blobs_get_their_own_gp() {
        let (x, y) = blobs();
        let t = ClusteredGp::fit(&KernelSpec::rbf_white(0.01), &x, &y, 2, &mut Rng::new(4)).unwrap();
        for (gp, m) in t.gps().iter().zip(t.members()) {
            assert_eq!(m.len(), 4);
            let sign = gp.train_inputs()[(0, 0)].signum();
            assert!(gp.train_inputs().as_slice().iter().all(|v| v.signum() == sign));
        }
        // a centroid routes to its own cluster
        for c in 0..2 {
            assert_eq!(t.route(t.centroids().row(c)).unwrap(), c);
        }
    }

    #[test]
    fn too_many_clusters() {
        let (x, y) = blobs();
        assert!(matches!(
            ClusteredGp::fit(&KernelSpec::rbf_white(0.01), &x, &y, 9, &mut Rng::new(0)),
            Err(Error::KTooLarge { .. })
        ));
    }

    #[test]
    fn json_round_trip_predicts_identically() {
        let (x, y) = blobs();
        let t = ClusteredGp::fit(&KernelSpec::rbf_white(0.01), &x, &y, 2, &mut Rng::new(4)).unwrap();
        let back = ClusteredGp::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(t.predict(&[0.3]).unwrap(), back.predict(&[0.3]).unwrap());
        let bumped = t.to_json().unwrap().replace("\"version\":1", "\"version\":7");
        assert!(matches!(ClusteredGp::from_json(&bumped), Err(Error::Version { found: 7, .. })));
    }
}
