use super::{quadrature, simplex_dim, FacetBasis, QuadratureDomain, QuadratureRule, SimplexBasis};
use crate::error::Result;

/// Reference triangle vertices.
pub const REFERENCE_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Element and facet basis values on one side of the reference triangle.
///
/// Quadrature points follow the face parametrisation `s in [0, 1]`; with
/// `flip` the local edge `v_{j+1} -> v_{j+2}` runs against it.
#[derive(Debug, Clone)]
pub struct SideTable {
    pub local_edge: usize,
    pub flip: bool,
    /// Unit-edge weights; multiply by the face length.
    pub weights: Vec<f64>,
    pub face_params: Vec<f64>,
    pub reference_points: Vec<[f64; 2]>,
    /// `element_values[q][i]`.
    pub element_values: Vec<Vec<f64>>,
    /// `element_gradients[q][i]` on the reference element.
    pub element_gradients: Vec<Vec<[f64; 2]>>,
    /// `facet_values[q][j]`.
    pub facet_values: Vec<Vec<f64>>,
}

/// Tabulated reference data for an element basis of a given degree and a
/// facet basis of a given degree.
#[derive(Debug, Clone)]
pub struct ReferenceTables {
    pub element_basis: SimplexBasis,
    pub facet_basis: FacetBasis,
    pub volume_rule: QuadratureRule,
    pub edge_rule: QuadratureRule,
    pub volume_values: Vec<Vec<f64>>,
    pub volume_gradients: Vec<Vec<[f64; 2]>>,
    /// Indexed by `2 * local_edge + flip`.
    pub sides: Vec<SideTable>,
}

/// Point on local edge `j` (opposite vertex `j`) at element parameter `t`.
pub fn edge_point(j: usize, t: f64) -> [f64; 2] {
    let a = REFERENCE_VERTICES[(j + 1) % 3];
    let b = REFERENCE_VERTICES[(j + 2) % 3];
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

impl ReferenceTables {
    pub fn new(element_degree: usize, facet_degree: usize, quad_degree: usize) -> Result<Self> {
        let element_basis = SimplexBasis::new(element_degree)?;
        let facet_basis = FacetBasis::new(facet_degree);
        let volume_rule = quadrature(QuadratureDomain::Triangle, quad_degree)?;
        let edge_rule = quadrature(QuadratureDomain::Edge, quad_degree)?;
        let (volume_values, volume_gradients): (Vec<_>, Vec<_>) =
            volume_rule.points.iter().map(|&p| element_basis.evaluate(p)).unzip();
        let mut sides = Vec::with_capacity(6);
        for j in 0..3 {
            for flip in [false, true] {
                let face_params: Vec<f64> = edge_rule.points.iter().map(|p| p[0]).collect();
                let reference_points: Vec<[f64; 2]> = face_params
                    .iter()
                    .map(|&s| edge_point(j, if flip { 1.0 - s } else { s }))
                    .collect();
                let (element_values, element_gradients): (Vec<_>, Vec<_>) =
                    reference_points.iter().map(|&p| element_basis.evaluate(p)).unzip();
                let facet_values = face_params.iter().map(|&s| facet_basis.values(s)).collect();
                sides.push(SideTable {
                    local_edge: j,
                    flip,
                    weights: edge_rule.weights.clone(),
                    face_params,
                    reference_points,
                    element_values,
                    element_gradients,
                    facet_values,
                });
            }
        }
        Ok(ReferenceTables {
            element_basis,
            facet_basis,
            volume_rule,
            edge_rule,
            volume_values,
            volume_gradients,
            sides,
        })
    }

    pub fn side(&self, local_edge: usize, flip: bool) -> &SideTable {
        &self.sides[2 * local_edge + flip as usize]
    }

    pub fn n_element(&self) -> usize {
        self.element_basis.dim()
    }

    pub fn n_facet(&self) -> usize {
        self.facet_basis.dim()
    }

    /// Number of leading element functions spanning `P_k`.
    pub fn n_element_of_degree(k: usize) -> usize {
        simplex_dim(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_points_lie_on_edges() {
        let t = ReferenceTables::new(2, 2, 6).unwrap();
        for side in &t.sides {
            for p in &side.reference_points {
                let on = match side.local_edge {
                    0 => (p[0] + p[1] - 1.0).abs() < 1e-14,
                    1 => p[0].abs() < 1e-14,
                    _ => p[1].abs() < 1e-14,
                };
                assert!(on);
            }
        }
    }

    #[test]
    fn flipped_sides_reverse_points() {
        let t = ReferenceTables::new(1, 1, 4).unwrap();
        for j in 0..3 {
            let a = t.side(j, false);
            let b = t.side(j, true);
            let n = a.reference_points.len();
            for q in 0..n {
                let pa = a.reference_points[q];
                let pb = b.reference_points[n - 1 - q];
                assert!((pa[0] - pb[0]).abs() < 1e-14 && (pa[1] - pb[1]).abs() < 1e-14);
            }
        }
    }
}
