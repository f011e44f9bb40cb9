use serde::Serialize;

use super::{superpose, SuperposeInput, SuperposeOptions};
use crate::backlund::{integrate_bt, BtSystem, IntegrateOptions};
use crate::case::{congruence_params, CaseConfig, GordonEquation, IndexFlag};
use crate::error::{Error, Result};
use crate::field::{FieldSource, Grid, ScalarField};

/// One solution in the lattice. Level `k` nodes carry the window
/// `first..=last` of parameter indices, of length `k`.
#[derive(Clone, Debug)]
pub struct LatticeNode {
    pub id: usize,
    pub level: usize,
    pub window: Option<(usize, usize)>,
    pub label: String,
    /// `(base, left, right)` node ids for superposed nodes.
    pub parents: Option<(usize, usize, usize)>,
    pub equation: GordonEquation,
    /// Case of the transformations that act on this node.
    pub bt_case: CaseConfig,
    pub field: ScalarField,
}

/// A transformation arrow `from -> to` with parameter `phis[phi_index]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LatticeEdge {
    pub from: usize,
    pub to: usize,
    pub phi_index: usize,
}

#[derive(Clone, Debug)]
pub struct Lattice {
    pub case: CaseConfig,
    pub phis: Vec<f64>,
    pub depth: usize,
    pub nodes: Vec<LatticeNode>,
    pub edges: Vec<LatticeEdge>,
}

impl Lattice {
    pub fn seed(&self) -> &LatticeNode {
        &self.nodes[0]
    }

    /// Node with parameter window `first..=last`.
    pub fn node(&self, first: usize, last: usize) -> Option<&LatticeNode> {
        self.nodes.iter().find(|n| n.window == Some((first, last)))
    }

    /// Node by label, e.g. `alpha_123`.
    pub fn by_label(&self, label: &str) -> Option<&LatticeNode> {
        self.nodes.iter().find(|n| n.label == label)
    }

    pub fn level(&self, k: usize) -> impl Iterator<Item = &LatticeNode> {
        self.nodes.iter().filter(move |n| n.level == k)
    }

    /// Incoming edges of a node.
    pub fn incoming(&self, id: usize) -> Vec<LatticeEdge> {
        self.edges.iter().copied().filter(|e| e.to == id).collect()
    }
}

fn label(first: usize, last: usize) -> String {
    let idx: Vec<String> = (first..=last).map(|k| (k + 1).to_string()).collect();
    let sep = if last >= 9 { "-" } else { "" };
    format!("alpha_{}", idx.join(sep))
}

/// Case of the transformations acting on a node of the given level.
fn case_at_level(case: &CaseConfig, level: usize) -> CaseConfig {
    if level % 2 == 0 {
        *case
    } else {
        case.partner()
    }
}

fn check_phis(case: &CaseConfig, phis: &[f64]) -> Result<()> {
    for (n, &p) in phis.iter().enumerate() {
        congruence_params(case, p)?;
        if phis[..n].contains(&p) {
            return Err(Error::DuplicatePhi(p));
        }
    }
    Ok(())
}

/// Level-one fields by integrating the BT of `case` from `seed`, one per
/// parameter, each starting from `initial[k]` at `p0`.
pub fn integrate_level_one(
    case: &CaseConfig,
    seed: &dyn FieldSource,
    grid: &Grid,
    phis: &[f64],
    p0: (f64, f64),
    initial: &[f64],
    opts: &IntegrateOptions,
) -> Result<Vec<ScalarField>> {
    check_phis(case, phis)?;
    if initial.len() != phis.len() {
        return Err(Error::Config(format!(
            "{} initial values for {} parameters",
            initial.len(),
            phis.len()
        )));
    }
    phis.iter()
        .zip(initial)
        .map(|(&phi, &a0)| integrate_bt(&BtSystem::new(*case, phi)?, seed, grid, p0, a0, opts))
        .collect()
}

/// Build the lattice up to `depth` from the seed and the level-one fields.
///
/// Level `k >= 2` nodes use the superposition formula of the case acting on
/// their base node, so in the elliptic cases the formula alternates by level.
pub fn bianchi_lattice(
    case: &CaseConfig,
    seed: &ScalarField,
    phis: &[f64],
    depth: usize,
    level_one: Vec<ScalarField>,
    opts: &SuperposeOptions,
) -> Result<Lattice> {
    check_phis(case, phis)?;
    if depth > phis.len() {
        return Err(Error::Config(format!(
            "depth {depth} exceeds the number of parameters {}",
            phis.len()
        )));
    }
    if level_one.len() != phis.len() {
        return Err(Error::Config(format!(
            "{} level-one fields for {} parameters",
            level_one.len(),
            phis.len()
        )));
    }
    if level_one.iter().any(|f| !f.grid.same_nodes(&seed.grid)) {
        return Err(Error::GridMismatch);
    }
    let mut nodes = vec![LatticeNode {
        id: 0,
        level: 0,
        window: None,
        label: "alpha".into(),
        parents: None,
        equation: case.original_equation(),
        bt_case: *case,
        field: seed.clone(),
    }];
    let mut edges = Vec::new();
    let n = phis.len();
    if depth == 0 {
        return Ok(Lattice {
            case: *case,
            phis: phis.to_vec(),
            depth,
            nodes,
            edges,
        });
    }
    for (i, f) in level_one.into_iter().enumerate() {
        let id = nodes.len();
        nodes.push(LatticeNode {
            id,
            level: 1,
            window: Some((i, i)),
            label: label(i, i),
            parents: None,
            equation: case.equation(IndexFlag::Transformed),
            bt_case: case_at_level(case, 1),
            field: f,
        });
        edges.push(LatticeEdge {
            from: 0,
            to: id,
            phi_index: i,
        });
    }
    let find = |nodes: &[LatticeNode], w: Option<(usize, usize)>| nodes.iter().position(|x| x.window == w).unwrap();
    for k in 2..=depth {
        let base_case = case_at_level(case, k - 2);
        let built: Vec<Result<(usize, usize, usize, usize, ScalarField)>> = {
            let nodes = &nodes;
            (0..=n - k)
                .map(|i| {
                    let last = i + k - 1;
                    let base_w = if k == 2 { None } else { Some((i + 1, last - 1)) };
                    let base = find(nodes, base_w);
                    let left = find(nodes, Some((i, last - 1)));
                    let right = find(nodes, Some((i + 1, last)));
                    let inp = SuperposeInput {
                        case: base_case,
                        alpha: &nodes[base].field,
                        alpha1: &nodes[left].field,
                        alpha2: &nodes[right].field,
                        phi1: phis[i],
                        phi2: phis[last],
                    };
                    Ok((i, base, left, right, superpose(&inp, opts)?.field))
                })
                .collect()
        };
        for b in built {
            let (i, base, left, right, field) = b?;
            let last = i + k - 1;
            let id = nodes.len();
            nodes.push(LatticeNode {
                id,
                level: k,
                window: Some((i, last)),
                label: label(i, last),
                parents: Some((base, left, right)),
                equation: nodes[base].equation,
                bt_case: base_case,
                field,
            });
            edges.push(LatticeEdge {
                from: left,
                to: id,
                phi_index: last,
            });
            edges.push(LatticeEdge {
                from: right,
                to: id,
                phi_index: i,
            });
        }
    }
    Ok(Lattice {
        case: *case,
        phis: phis.to_vec(),
        depth,
        nodes,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::CaseId;

    #[test]
    fn labels() {
        assert_eq!(label(0, 2), "alpha_123");
        assert_eq!(label(1, 1), "alpha_2");
        assert_eq!(label(8, 10), "alpha_9-10-11");
    }

    #[test]
    fn shape_and_duplicates() {
        let g = Grid::rect(0.0, 1.0, 0.0, 1.0, 0.25).unwrap();
        let z = ScalarField::constant(g, 0.0);
        let c = CaseConfig::new(CaseId::One, 1);
        let phis = [0.5, 1.0, 1.5];
        let lat = bianchi_lattice(&c, &z, &phis, 3, vec![z.clone(), z.clone(), z.clone()], &Default::default()).unwrap();
        assert_eq!(lat.nodes.len(), 7);
        assert_eq!(lat.level(2).count(), 2);
        assert_eq!(lat.incoming(lat.by_label("alpha_123").unwrap().id).len(), 2);
        assert_eq!(lat.incoming(lat.by_label("alpha_2").unwrap().id).len(), 1);
        let dup = bianchi_lattice(&c, &z, &[0.5, 0.5], 1, vec![z.clone(), z.clone()], &Default::default());
        assert!(matches!(dup, Err(Error::DuplicatePhi(_))));
    }

    #[test]
    fn elliptic_tags_alternate() {
        let g = Grid::rect(0.0, 1.0, 0.0, 1.0, 0.25).unwrap();
        let z = ScalarField::constant(g, 0.0);
        let c = CaseConfig::new(CaseId::Five, 1);
        let lat = bianchi_lattice(&c, &z, &[0.0, 0.5, 1.0], 3, vec![z.clone(), z.clone(), z.clone()], &Default::default()).unwrap();
        let names: Vec<&str> = (0..=3).map(|k| lat.level(k).next().unwrap().equation.name()).collect();
        assert_eq!(
            names,
            ["elliptic sinh-Gordon", "elliptic sine-Gordon", "elliptic sinh-Gordon", "elliptic sine-Gordon"]
        );
        assert_eq!(lat.level(3).next().unwrap().bt_case.id, CaseId::Six);
    }
}
