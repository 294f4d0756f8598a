//! Instance files (TOML).
//!
//! ```toml
//! id = "k22"
//!
//! [instance]
//! family = "bipartite"
//! left = 2
//! right = 2
//! edges = [[0, 2], [0, 3], [1, 2], [1, 3]]
//!
//! [objective]
//! c_minus = [0, 0, 0, 0]
//! c_plus = [1, 1, 1, 1]
//! p = 0.5
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spip_core::adapters::matroid::{MatroidDescription, MatroidKind};
use spip_core::instance::{FamilyMeta, InstanceError, PackingInstance, StochasticObjective};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceSpec {
    Bipartite {
        left: usize,
        right: usize,
        edges: Vec<(usize, usize)>,
    },
    Graph {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    KHypergraph {
        vertices: usize,
        k: usize,
        edges: Vec<Vec<usize>>,
    },
    UniformMatroid {
        ground_size: usize,
        rank: usize,
    },
    PartitionMatroid {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<usize>,
    },
    GraphicMatroid {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Generic {
        a: Vec<Vec<u64>>,
        b: Vec<u64>,
    },
    KCspip {
        k: usize,
        a: Vec<Vec<u64>>,
        b: Vec<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveFile {
    pub c_minus: Vec<u64>,
    pub c_plus: Vec<u64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub id: String,
    pub instance: InstanceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveFile>,
}

fn dense(inst: &PackingInstance) -> Vec<Vec<u64>> {
    (0..inst.rows()).map(|i| inst.row(i).to_vec()).collect()
}

impl InstanceSpec {
    pub fn build(&self) -> Result<PackingInstance, InstanceError> {
        let matroid = |d: Result<MatroidDescription, String>| {
            PackingInstance::matroid(d.map_err(InstanceError::Meta)?)
        };
        match self {
            InstanceSpec::Bipartite { left, right, edges } => PackingInstance::bipartite(*left, *right, edges.clone()),
            InstanceSpec::Graph { vertices, edges } => PackingInstance::graph(*vertices, edges.clone()),
            InstanceSpec::KHypergraph { vertices, k, edges } => {
                if let Some(e) = edges.iter().find(|e| e.len() != *k) {
                    return Err(InstanceError::Meta(format!("hyperedge {e:?} does not have {k} vertices")));
                }
                PackingInstance::hypergraph(*vertices, *k, edges.clone())
            }
            InstanceSpec::UniformMatroid { ground_size, rank } => matroid(MatroidDescription::uniform(*ground_size, *rank)),
            InstanceSpec::PartitionMatroid { blocks, capacities } => {
                matroid(MatroidDescription::partition(blocks.clone(), capacities.clone()))
            }
            InstanceSpec::GraphicMatroid { vertices, edges } => {
                matroid(MatroidDescription::graphic(*vertices, edges.clone()))
            }
            InstanceSpec::Generic { a, b } => PackingInstance::generic(a.clone(), b.clone()),
            InstanceSpec::KCspip { k, a, b } => PackingInstance::column_sparse(a.clone(), b.clone(), *k),
        }
    }

    pub fn from_instance(inst: &PackingInstance) -> Self {
        match inst.meta() {
            FamilyMeta::Bipartite { left, right, edges } => InstanceSpec::Bipartite {
                left: *left,
                right: *right,
                edges: edges.clone(),
            },
            FamilyMeta::Graph { vertices, edges } => InstanceSpec::Graph {
                vertices: *vertices,
                edges: edges.clone(),
            },
            FamilyMeta::Hypergraph { vertices, k, edges } => InstanceSpec::KHypergraph {
                vertices: *vertices,
                k: *k,
                edges: edges.clone(),
            },
            FamilyMeta::Matroid(desc) => match desc.kind() {
                MatroidKind::Uniform { rank } => InstanceSpec::UniformMatroid {
                    ground_size: desc.ground_size(),
                    rank: *rank,
                },
                MatroidKind::Partition { blocks, capacities } => InstanceSpec::PartitionMatroid {
                    blocks: blocks.clone(),
                    capacities: capacities.clone(),
                },
                MatroidKind::Graphic { vertices, edges } => InstanceSpec::GraphicMatroid {
                    vertices: *vertices,
                    edges: edges.clone(),
                },
            },
            FamilyMeta::ColumnSparse { k } => InstanceSpec::KCspip {
                k: *k,
                a: dense(inst),
                b: inst.capacities().to_vec(),
            },
            FamilyMeta::None => InstanceSpec::Generic {
                a: dense(inst),
                b: inst.capacities().to_vec(),
            },
        }
    }
}

impl ObjectiveFile {
    pub fn from_objective(obj: &StochasticObjective) -> Self {
        ObjectiveFile {
            c_minus: obj.c_minus().to_vec(),
            c_plus: obj.c_plus().to_vec(),
            p: obj.p(),
        }
    }

    pub fn build(&self) -> Result<StochasticObjective, InstanceError> {
        StochasticObjective::new(self.c_minus.clone(), self.c_plus.clone(), self.p)
    }
}

impl InstanceFile {
    pub fn new(id: impl Into<String>, inst: &PackingInstance, obj: Option<&StochasticObjective>) -> Self {
        InstanceFile {
            id: id.into(),
            instance: InstanceSpec::from_instance(inst),
            objective: obj.map(ObjectiveFile::from_objective),
        }
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance files serialize")
    }

    /// Builds the instance and objective, checking that the objective length matches.
    pub fn build(&self) -> Result<(PackingInstance, Option<StochasticObjective>), HarnessError> {
        let inst = self.instance.build()?;
        let obj = self.objective.as_ref().map(ObjectiveFile::build).transpose()?;
        if let Some(o) = &obj {
            if o.len() != inst.cols() {
                return Err(HarnessError::Invalid(format!(
                    "objective has {} items, instance has {}",
                    o.len(),
                    inst.cols()
                )));
            }
        }
        Ok((inst, obj))
    }
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    InstanceFile::parse(&text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const K22: &str = r#"
id = "k22"

[instance]
family = "bipartite"
left = 2
right = 2
edges = [[0, 2], [0, 3], [1, 2], [1, 3]]

[objective]
c_minus = [0, 0, 0, 0]
c_plus = [1, 1, 1, 1]
p = 0.5
"#;

    #[test]
    fn parses_and_round_trips() {
        let file = InstanceFile::parse(K22).unwrap();
        let (inst, obj) = file.build().unwrap();
        assert_eq!((inst.rows(), inst.cols()), (4, 4));
        assert_eq!(obj.unwrap().p(), 0.5);
        let again = InstanceFile::parse(&file.to_toml()).unwrap();
        assert_eq!(again, file);
        assert_eq!(InstanceFile::new("k22", &inst, None).instance, file.instance);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = K22.replace("left = 2", "left = 2\nlefty = 3");
        assert!(matches!(InstanceFile::parse(&bad), Err(HarnessError::Parse(_))));
        let bad = K22.replace("p = 0.5", "p = 0.5\nq = 1");
        assert!(InstanceFile::parse(&bad).is_err());
    }

    #[test]
    fn every_family_round_trips() {
        let specs = [
            InstanceSpec::Graph { vertices: 3, edges: vec![(0, 1), (1, 2), (0, 2)] },
            InstanceSpec::KHypergraph { vertices: 4, k: 3, edges: vec![vec![0, 1, 2], vec![1, 2, 3]] },
            InstanceSpec::UniformMatroid { ground_size: 5, rank: 2 },
            InstanceSpec::PartitionMatroid { blocks: vec![vec![0, 1], vec![2]], capacities: vec![1, 1] },
            InstanceSpec::GraphicMatroid { vertices: 3, edges: vec![(0, 1), (1, 2), (0, 2)] },
            InstanceSpec::Generic { a: vec![vec![1, 1]], b: vec![1] },
            InstanceSpec::KCspip { k: 1, a: vec![vec![1, 1]], b: vec![2] },
        ];
        for spec in specs {
            let inst = spec.build().unwrap();
            let file = InstanceFile::new("x", &inst, None);
            assert_eq!(file.instance, spec);
            assert_eq!(InstanceFile::parse(&file.to_toml()).unwrap(), file);
        }
    }

    #[test]
    fn objective_length_is_checked() {
        let bad = K22.replace("c_minus = [0, 0, 0, 0]", "c_minus = [0, 0, 0]").replace("c_plus = [1, 1, 1, 1]", "c_plus = [1, 1, 1]");
        assert!(matches!(InstanceFile::parse(&bad).unwrap().build(), Err(HarnessError::Invalid(_))));
    }
}
