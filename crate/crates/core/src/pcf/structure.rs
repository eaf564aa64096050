use serde::{Deserialize, Serialize};

use super::dimension::similarity_dimension;
use crate::error::{Error, Result};

/// Tolerance for identification relations and fixed-point lookup in the embedding.
pub const EMBEDDING_TOL: f64 = 1e-12;

/// Affine similitude `x -> scale * rotation * x + translation` on R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    /// Orthogonal n x n matrix, rows first. Identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<Vec<f64>>>,
    pub translation: Vec<f64>,
}

impl AffineMap {
    pub fn scaled(scale: f64, translation: Vec<f64>) -> Self {
        Self {
            scale,
            rotation: None,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let rx = match &self.rotation {
                    Some(rot) => rot[i].iter().zip(x).map(|(a, b)| a * b).sum(),
                    None => x[i],
                };
                self.scale * rx + self.translation[i]
            })
            .collect()
    }
}

/// Boundary energy `D` on V_0 together with the resistance renormalisation weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicStructure {
    /// Symmetric, zero row sums, nonpositive diagonal.
    pub d: Vec<Vec<f64>>,
    pub r: Vec<f64>,
}

impl HarmonicStructure {
    pub fn boundary_size(&self) -> usize {
        self.d.len()
    }

    /// `E_0(f, f) = -f^T D f`.
    pub fn boundary_energy(&self, f: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, row) in self.d.iter().enumerate() {
            for (j, dij) in row.iter().enumerate() {
                s -= f[i] * dij * f[j];
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.d.len();
        if n == 0 {
            return Err(Error::Harmonic("D is empty".into()));
        }
        for (i, row) in self.d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Harmonic(format!("row {i} of D has length {}", row.len())));
            }
        }
        let scale = self
            .d
            .iter()
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
            .max(1.0);
        for i in 0..n {
            for j in 0..n {
                if (self.d[i][j] - self.d[j][i]).abs() > 1e-12 * scale {
                    return Err(Error::Harmonic(format!("D is not symmetric at ({i}, {j})")));
                }
            }
            let sum: f64 = self.d[i].iter().sum();
            if sum.abs() > 1e-12 * scale {
                return Err(Error::Harmonic(format!("row {i} of D sums to {sum:e}")));
            }
            if self.d[i][i] > 0.0 {
                return Err(Error::Harmonic(format!("positive diagonal entry at {i}")));
            }
        }
        // -D must be positive semidefinite: check via its eigenvalues.
        let neg = crate::linalg::Matrix::from_rows(
            &self.d.iter().map(|r| r.iter().map(|v| -v).collect()).collect::<Vec<_>>(),
        );
        let eig = crate::linalg::symmetric_eigen(&neg)?;
        if eig.values.first().copied().unwrap_or(0.0) < -1e-12 * scale {
            return Err(Error::Harmonic("-D is not positive semidefinite".into()));
        }
        for (i, &ri) in self.r.iter().enumerate() {
            if !(ri > 0.0 && ri < 1.0) {
                return Err(Error::Harmonic(format!("r_{i} = {ri} is outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// A boundary point of one cell glued to a boundary point of another:
/// `F_i(x_p) = F_j(x_q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identification {
    pub i: usize,
    pub p: usize,
    pub j: usize,
    pub q: usize,
}

/// A p.c.f. self-similar structure with a regular harmonic structure and a
/// self-similar measure.
#[derive(Debug, Clone)]
pub struct SelfSimilarStructure {
    name: String,
    maps: Vec<AffineMap>,
    boundary: Vec<Vec<f64>>,
    identifications: Vec<Identification>,
    harmonic: HarmonicStructure,
    measure_weights: Vec<f64>,
    /// Whether `measure_weights` equal `r_i^d`.
    standard_measure: bool,
    dimension: f64,
    /// For each boundary index p a pair (s, p') with F_s(x_{p'}) = x_p.
    descent: Vec<(usize, usize)>,
    affine_nested: bool,
}

impl SelfSimilarStructure {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn symbols(&self) -> usize {
        self.maps.len()
    }
    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }
    pub fn boundary(&self) -> &[Vec<f64>] {
        &self.boundary
    }
    pub fn boundary_size(&self) -> usize {
        self.boundary.len()
    }
    pub fn identifications(&self) -> &[Identification] {
        &self.identifications
    }
    pub fn harmonic(&self) -> &HarmonicStructure {
        &self.harmonic
    }
    pub fn measure_weights(&self) -> &[f64] {
        &self.measure_weights
    }
    pub fn has_standard_measure(&self) -> bool {
        self.standard_measure
    }
    /// Similarity dimension d with sum r_i^d = 1.
    pub fn dimension(&self) -> f64 {
        self.dimension
    }
    pub fn descent(&self) -> &[(usize, usize)] {
        &self.descent
    }
    pub fn is_affine_nested(&self) -> bool {
        self.affine_nested
    }
    pub fn embedding_dim(&self) -> usize {
        self.boundary.first().map_or(0, Vec::len)
    }

    /// Image of a boundary point under F_w.
    pub fn map_point(&self, word: &[usize], p: usize) -> Vec<f64> {
        let mut x = self.boundary[p].clone();
        for &s in word.iter().rev() {
            x = self.maps[s].apply(&x);
        }
        x
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "interval" => Self::interval(),
            "sierpinski" => Self::sierpinski(),
            "vicsek" => Self::vicsek(),
            other => Err(Error::Config(format!("unknown preset {other:?}"))),
        }
    }

    /// [0, 1] with the two halving maps: resistance is the Euclidean metric
    /// and the measure is Lebesgue.
    pub fn interval() -> Result<Self> {
        StructureSpec {
            name: Some("interval".into()),
            maps: vec![
                AffineMap::scaled(0.5, vec![0.0]),
                AffineMap::scaled(0.5, vec![0.5]),
            ],
            boundary: vec![vec![0.0], vec![1.0]],
            identifications: vec![[0, 1, 1, 0]],
            d: vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            r: vec![0.5, 0.5],
            mu: None,
            affine_nested: Some(true),
        }
        .build()
    }

    /// The Sierpinski gasket with the standard harmonic structure r_i = 3/5.
    pub fn sierpinski() -> Result<Self> {
        let h = 3.0_f64.sqrt() / 2.0;
        let corners = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
        StructureSpec {
            name: Some("sierpinski".into()),
            maps: corners
                .iter()
                .map(|q| AffineMap::scaled(0.5, q.iter().map(|c| c / 2.0).collect()))
                .collect(),
            boundary: corners.to_vec(),
            identifications: vec![[0, 1, 1, 0], [0, 2, 2, 0], [1, 2, 2, 1]],
            d: complete_graph_form(3),
            r: vec![0.6; 3],
            mu: None,
            affine_nested: Some(true),
        }
        .build()
    }

    /// The Vicsek cross: four corner cells and a centre cell, r_i = 1/3.
    pub fn vicsek() -> Result<Self> {
        let corners = [
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ];
        let third = 1.0 / 3.0;
        let mut maps: Vec<AffineMap> = corners
            .iter()
            .map(|q| AffineMap::scaled(third, q.iter().map(|c| 2.0 * c / 3.0).collect()))
            .collect();
        maps.push(AffineMap::scaled(third, vec![third, third]));
        // Corner cell i meets the centre cell at the centre cell's corner i.
        let identifications = (0..4).map(|i| [i, (i + 2) % 4, 4, i]).collect();
        StructureSpec {
            name: Some("vicsek".into()),
            maps,
            boundary: corners.to_vec(),
            identifications,
            d: complete_graph_form(4),
            r: vec![third; 5],
            mu: None,
            affine_nested: Some(true),
        }
        .build()
    }
}

/// `D` with unit conductance between every pair of boundary points.
pub fn complete_graph_form(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { -((n - 1) as f64) } else { 1.0 })
                .collect()
        })
        .collect()
}

/// JSON form of a structure: either `{"preset": name}` or the explicit fields.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<AffineMap>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identifications: Option<Vec<[usize; 4]>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// Bernoulli weights; defaults to r_i^d.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine_nested: Option<bool>,
}

/// Parse and validate a structure from its JSON description.
pub fn load_structure(json: &str) -> Result<SelfSimilarStructure> {
    let cfg: StructureConfig =
        serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    cfg.into_structure()
}

impl StructureConfig {
    pub fn preset(name: &str) -> Self {
        Self {
            preset: Some(name.to_string()),
            ..Self::default()
        }
    }

    pub fn into_structure(self) -> Result<SelfSimilarStructure> {
        if let Some(p) = &self.preset {
            let explicit = self.maps.is_some()
                || self.boundary.is_some()
                || self.identifications.is_some()
                || self.d.is_some()
                || self.r.is_some();
            if explicit {
                return Err(Error::Config("preset cannot be combined with explicit fields".into()));
            }
            return SelfSimilarStructure::preset(p);
        }
        let missing = |f: &str| Error::Config(format!("missing field {f:?}"));
        StructureSpec {
            name: self.name,
            maps: self.maps.ok_or_else(|| missing("maps"))?,
            boundary: self.boundary.ok_or_else(|| missing("boundary"))?,
            identifications: self.identifications.ok_or_else(|| missing("identifications"))?,
            d: self.d.ok_or_else(|| missing("D"))?,
            r: self.r.ok_or_else(|| missing("r"))?,
            mu: self.mu,
            affine_nested: self.affine_nested,
        }
        .build()
    }
}

struct StructureSpec {
    name: Option<String>,
    maps: Vec<AffineMap>,
    boundary: Vec<Vec<f64>>,
    identifications: Vec<[usize; 4]>,
    d: Vec<Vec<f64>>,
    r: Vec<f64>,
    mu: Option<Vec<f64>>,
    affine_nested: Option<bool>,
}

impl StructureSpec {
    fn build(self) -> Result<SelfSimilarStructure> {
        let n_sym = self.maps.len();
        if n_sym < 2 {
            return Err(Error::Config("at least two maps are required".into()));
        }
        if self.boundary.is_empty() {
            return Err(Error::Config("boundary V_0 must be nonempty".into()));
        }
        let dim = self.boundary[0].len();
        if dim == 0 || self.boundary.iter().any(|b| b.len() != dim) {
            return Err(Error::Config("boundary points must share a positive dimension".into()));
        }
        for (k, m) in self.maps.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::Config(format!("map {k} acts on R^{} not R^{dim}", m.dim())));
            }
            if !(m.scale > 0.0 && m.scale < 1.0) {
                return Err(Error::Config(format!("map {k} has scale {} outside (0,1)", m.scale)));
            }
            if let Some(rot) = &m.rotation {
                check_orthogonal(rot, dim).map_err(|e| Error::Config(format!("map {k}: {e}")))?;
            }
        }
        let nb = self.boundary.len();
        if self.d.len() != nb {
            return Err(Error::Config(format!("D is {}x? but |V_0| = {nb}", self.d.len())));
        }
        if self.r.len() != n_sym {
            return Err(Error::Config(format!("{} weights r for {n_sym} maps", self.r.len())));
        }
        let harmonic = HarmonicStructure {
            d: self.d,
            r: self.r,
        };
        harmonic.validate()?;

        let mut identifications = Vec::with_capacity(self.identifications.len());
        for [i, p, j, q] in self.identifications {
            if i >= n_sym || j >= n_sym || p >= nb || q >= nb {
                return Err(Error::Config(format!("identification [{i},{p},{j},{q}] out of range")));
            }
            if i == j {
                return Err(Error::Config(format!("identification [{i},{p},{j},{q}] has i = j")));
            }
            identifications.push(Identification { i, p, j, q });
        }

        let dimension = similarity_dimension(&harmonic.r);
        let (measure_weights, standard_measure) = match self.mu {
            Some(mu) => {
                if mu.len() != n_sym {
                    return Err(Error::Config(format!("{} weights mu for {n_sym} maps", mu.len())));
                }
                if mu.iter().any(|&m| !(m > 0.0 && m < 1.0)) {
                    return Err(Error::Config("measure weights must lie in (0,1)".into()));
                }
                let total: f64 = mu.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!("measure weights sum to {total}")));
                }
                let standard = mu
                    .iter()
                    .zip(&harmonic.r)
                    .all(|(m, r)| (m - r.powf(dimension)).abs() < 1e-12);
                (mu, standard)
            }
            None => {
                let mut mu: Vec<f64> = harmonic.r.iter().map(|r| r.powf(dimension)).collect();
                // Absorb the root-finding residual so the weights sum to one exactly.
                let total: f64 = mu.iter().sum();
                mu.iter_mut().for_each(|m| *m /= total);
                (mu, true)
            }
        };

        let mut s = SelfSimilarStructure {
            name: self.name.unwrap_or_else(|| "custom".into()),
            maps: self.maps,
            boundary: self.boundary,
            identifications,
            harmonic,
            measure_weights,
            standard_measure,
            dimension,
            descent: vec![],
            affine_nested: self.affine_nested.unwrap_or(false),
        };
        for id in &s.identifications {
            let a = s.map_point(&[id.i], id.p);
            let b = s.map_point(&[id.j], id.q);
            let gap = dist(&a, &b);
            if gap > EMBEDDING_TOL {
                return Err(Error::IdentificationViolated {
                    i: id.i,
                    p: id.p,
                    j: id.j,
                    q: id.q,
                    gap,
                });
            }
        }
        s.descent = boundary_descent(&s)?;
        Ok(s)
    }
}

/// V_0 sits inside V_1: locate each boundary point as the image of a
/// boundary point under one of the maps, preferring fixed points.
fn boundary_descent(s: &SelfSimilarStructure) -> Result<Vec<(usize, usize)>> {
    let nb = s.boundary_size();
    (0..nb)
        .map(|p| {
            let target = &s.boundary[p];
            let mut found = None;
            for sym in 0..s.symbols() {
                for pp in 0..nb {
                    if dist(&s.maps[sym].apply(&s.boundary[pp]), target) <= EMBEDDING_TOL {
                        let fixed = pp == p;
                        match found {
                            None => found = Some((sym, pp, fixed)),
                            Some((_, _, false)) if fixed => found = Some((sym, pp, fixed)),
                            _ => {}
                        }
                    }
                }
            }
            found
                .map(|(sym, pp, _)| (sym, pp))
                .ok_or_else(|| Error::Config(format!("boundary point {p} is not contained in V_1")))
        })
        .collect()
}

fn check_orthogonal(rot: &[Vec<f64>], dim: usize) -> std::result::Result<(), String> {
    if rot.len() != dim || rot.iter().any(|r| r.len() != dim) {
        return Err(format!("rotation must be {dim}x{dim}"));
    }
    for i in 0..dim {
        for j in 0..dim {
            let g: f64 = (0..dim).map(|k| rot[i][k] * rot[j][k]).sum();
            let e = if i == j { 1.0 } else { 0.0 };
            if (g - e).abs() > 1e-10 {
                return Err("rotation is not orthogonal".into());
            }
        }
    }
    Ok(())
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in ["interval", "sierpinski", "vicsek"] {
            let s = SelfSimilarStructure::preset(name).unwrap();
            let total: f64 = s.measure_weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-15, "{name}");
            assert!(s.has_standard_measure());
            assert_eq!(s.descent().len(), s.boundary_size());
        }
    }

    #[test]
    fn interval_preset_fields() {
        let s = SelfSimilarStructure::interval().unwrap();
        assert_eq!(s.symbols(), 2);
        assert_eq!(s.harmonic().r, vec![0.5, 0.5]);
        assert_eq!(s.harmonic().d, vec![vec![-1.0, 1.0], vec![1.0, -1.0]]);
        assert_eq!(s.map_point(&[1], 0), vec![0.5]);
        assert!((s.dimension() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sierpinski_measure_is_one_third() {
        let s = SelfSimilarStructure::sierpinski().unwrap();
        for m in s.measure_weights() {
            assert!((m - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonzero_row_sums() {
        let json = r#"{"maps":[{"scale":0.5,"translation":[0.0]},{"scale":0.5,"translation":[0.5]}],
            "boundary":[[0.0],[1.0]],"identifications":[[0,1,1,0]],"D":[[1,0],[0,1]],"r":[0.5,0.5]}"#;
        assert!(matches!(load_structure(json), Err(Error::Harmonic(_))));
    }

    #[test]
    fn rejects_asymmetric_d_and_bad_r() {
        let base = |d: &str, r: &str| {
            format!(
                r#"{{"maps":[{{"scale":0.5,"translation":[0.0]}},{{"scale":0.5,"translation":[0.5]}}],
                "boundary":[[0.0],[1.0]],"identifications":[[0,1,1,0]],"D":{d},"r":{r}}}"#
            )
        };
        assert!(load_structure(&base("[[-1,1],[1,-1]]", "[0.5,0.5]")).is_ok());
        assert!(matches!(
            load_structure(&base("[[-1,1],[1.5,-1.5]]", "[0.5,0.5]")),
            Err(Error::Harmonic(_))
        ));
        assert!(matches!(
            load_structure(&base("[[-1,1],[1,-1]]", "[0.5,1.0]")),
            Err(Error::Harmonic(_))
        ));
    }

    #[test]
    fn rejects_violated_identification() {
        let json = r#"{"maps":[{"scale":0.5,"translation":[0.0]},{"scale":0.5,"translation":[0.5]}],
            "boundary":[[0.0],[1.0]],"identifications":[[0,0,1,0]],"D":[[-1,1],[1,-1]],"r":[0.5,0.5]}"#;
        assert!(matches!(
            load_structure(json),
            Err(Error::IdentificationViolated { .. })
        ));
    }

    #[test]
    fn malformed_config() {
        assert!(matches!(load_structure("{\"maps\": 3}"), Err(Error::Config(_))));
        assert!(matches!(load_structure("{\"preset\": \"carpet\"}"), Err(Error::Config(_))));
        assert!(matches!(load_structure("{\"bogus\": 1}"), Err(Error::Config(_))));
        assert!(load_structure("{\"preset\": \"vicsek\"}").is_ok());
    }

    #[test]
    fn explicit_config_round_trips_interval() {
        let json = r#"{"name":"halves","maps":[{"scale":0.5,"rotation":[[1.0]],"translation":[0.0]},
            {"scale":0.5,"translation":[0.5]}],"boundary":[[0.0],[1.0]],
            "identifications":[[0,1,1,0]],"D":[[-1,1],[1,-1]],"r":[0.5,0.5]}"#;
        let s = load_structure(json).unwrap();
        assert_eq!(s.name(), "halves");
        assert_eq!(s.descent(), &[(0, 0), (1, 1)]);
    }

    #[test]
    fn reflected_interval_uses_non_fixed_descent() {
        // F_1 reverses orientation: F_1(x) = 1 - x/2. Its image of x_0 = 0 is 1.
        let json = r#"{"maps":[{"scale":0.5,"translation":[0.0]},
            {"scale":0.5,"rotation":[[-1.0]],"translation":[1.0]}],"boundary":[[0.0],[1.0]],
            "identifications":[[0,1,1,1]],"D":[[-1,1],[1,-1]],"r":[0.5,0.5]}"#;
        let s = load_structure(json).unwrap();
        assert_eq!(s.descent(), &[(0, 0), (1, 0)]);
    }
}
