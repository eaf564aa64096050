use std::io::Write;
use std::path::Path;

use super::structure::{dist, SelfSimilarStructure};
use crate::error::{Error, Result};

/// Default cap on |W_m| * |V_0|.
pub const DEFAULT_BUDGET: usize = 200_000;

/// Coordinates of glued pairs must agree to this tolerance.
pub const GLUE_TOL: f64 = 1e-10;

/// A word w = w_1 ... w_m over the alphabet of map indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// r_w = r_{w_1} ... r_{w_m}; 1 for the empty word.
    pub fn resistance_scale(&self, r: &[f64]) -> f64 {
        self.0.iter().map(|&s| r[s]).product()
    }

    /// mu_w = mu_{w_1} ... mu_{w_m}; 1 for the empty word.
    pub fn measure(&self, mu: &[f64]) -> f64 {
        self.0.iter().map(|&s| mu[s]).product()
    }

    pub fn starts_with(&self, prefix: &Word) -> bool {
        self.0.starts_with(&prefix.0)
    }

    fn from_index(mut index: usize, len: usize, symbols: usize) -> Self {
        let mut w = vec![0; len];
        for slot in w.iter_mut().rev() {
            *slot = index % symbols;
            index /= symbols;
        }
        Word(w)
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Level-m approximation V_m of the self-similar set.
#[derive(Debug, Clone)]
pub struct VertexGraph {
    level: usize,
    symbols: usize,
    boundary_size: usize,
    coords: Vec<Vec<f64>>,
    /// Flat: cell c occupies `cells[c*|V_0| .. (c+1)*|V_0|]`, in V_0 order.
    cells: Vec<usize>,
    cell_measures: Vec<f64>,
    cell_resistances: Vec<f64>,
    vertex_mass: Vec<f64>,
}

pub fn build_level(s: &SelfSimilarStructure, m: usize) -> Result<VertexGraph> {
    build_level_with_budget(s, m, DEFAULT_BUDGET)
}

pub fn build_level_with_budget(
    s: &SelfSimilarStructure,
    m: usize,
    budget: usize,
) -> Result<VertexGraph> {
    let n_sym = s.symbols();
    let nb = s.boundary_size();
    let required = (n_sym as u128).checked_pow(m as u32).unwrap_or(u128::MAX) * nb as u128;
    if required > budget as u128 {
        return Err(Error::BudgetExceeded {
            level: m,
            required,
            budget,
        });
    }
    let n_cells = n_sym.pow(m as u32);
    let descent = s.descent();

    // (prefix index, prefix length, boundary index) -> level-m slot
    let leaf = |mut u: usize, mut len: usize, mut p: usize| -> usize {
        while len < m {
            let (sym, pp) = descent[p];
            u = u * n_sym + sym;
            p = pp;
            len += 1;
        }
        u * nb + p
    };

    let mut uf = UnionFind::new(n_cells * nb);
    let mut prefixes = 1usize;
    for k in 0..m {
        for v in 0..prefixes {
            for id in s.identifications() {
                let a = leaf(v * n_sym + id.i, k + 1, id.p);
                let b = leaf(v * n_sym + id.j, k + 1, id.q);
                uf.union(a, b);
            }
        }
        prefixes *= n_sym;
    }

    // Boundary points first, in V_0 order.
    let mut id_of_root = vec![usize::MAX; n_cells * nb];
    let mut n_vertices = 0;
    for p in 0..nb {
        let root = uf.find(leaf(0, 0, p));
        if id_of_root[root] != usize::MAX {
            return Err(Error::Config(format!("boundary point {p} is glued to another boundary point")));
        }
        id_of_root[root] = n_vertices;
        n_vertices += 1;
    }
    let mut cells = vec![0; n_cells * nb];
    for slot in 0..n_cells * nb {
        let root = uf.find(slot);
        if id_of_root[root] == usize::MAX {
            id_of_root[root] = n_vertices;
            n_vertices += 1;
        }
        cells[slot] = id_of_root[root];
    }

    let r = &s.harmonic().r;
    let mu = s.measure_weights();
    let mut cell_measures = Vec::with_capacity(n_cells);
    let mut cell_resistances = Vec::with_capacity(n_cells);
    let mut coords: Vec<Option<Vec<f64>>> = vec![None; n_vertices];
    let mut vertex_mass = vec![0.0; n_vertices];
    for c in 0..n_cells {
        let w = Word::from_index(c, m, n_sym);
        let mu_w = w.measure(mu);
        cell_measures.push(mu_w);
        cell_resistances.push(w.resistance_scale(r));
        for p in 0..nb {
            let v = cells[c * nb + p];
            vertex_mass[v] += mu_w / nb as f64;
            let x = s.map_point(&w.0, p);
            match &coords[v] {
                None => coords[v] = Some(x),
                Some(existing) => {
                    let gap = dist(existing, &x);
                    if gap > GLUE_TOL {
                        return Err(Error::Config(format!(
                            "glued vertex {v} has images {gap:e} apart; identifications are inconsistent"
                        )));
                    }
                }
            }
        }
    }
    let coords = coords
        .into_iter()
        .map(|c| c.expect("every vertex belongs to a cell"))
        .collect();

    Ok(VertexGraph {
        level: m,
        symbols: n_sym,
        boundary_size: nb,
        coords,
        cells,
        cell_measures,
        cell_resistances,
        vertex_mass,
    })
}

impl VertexGraph {
    pub fn level(&self) -> usize {
        self.level
    }
    pub fn num_vertices(&self) -> usize {
        self.coords.len()
    }
    pub fn symbols(&self) -> usize {
        self.symbols
    }
    pub fn num_cells(&self) -> usize {
        self.cell_measures.len()
    }
    pub fn boundary_size(&self) -> usize {
        self.boundary_size
    }
    /// Images of V_0; always the first |V_0| vertex ids.
    pub fn boundary_ids(&self) -> std::ops::Range<usize> {
        0..self.boundary_size
    }
    pub fn is_boundary(&self, v: usize) -> bool {
        v < self.boundary_size
    }
    pub fn interior_ids(&self) -> std::ops::Range<usize> {
        self.boundary_size..self.num_vertices()
    }
    pub fn coords(&self, v: usize) -> &[f64] {
        &self.coords[v]
    }
    pub fn all_coords(&self) -> &[Vec<f64>] {
        &self.coords
    }
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c * self.boundary_size..(c + 1) * self.boundary_size]
    }
    pub fn cell_word(&self, c: usize) -> Word {
        Word::from_index(c, self.level, self.symbols)
    }
    pub fn cell_measures(&self) -> &[f64] {
        &self.cell_measures
    }
    /// r_w for each cell.
    pub fn cell_resistances(&self) -> &[f64] {
        &self.cell_resistances
    }
    pub fn vertex_mass(&self) -> &[f64] {
        &self.vertex_mass
    }

    /// Cells whose word starts with `prefix`.
    pub fn cells_under(&self, prefix: &Word) -> std::ops::Range<usize> {
        assert!(prefix.len() <= self.level);
        let mut idx = 0;
        for &s in &prefix.0 {
            idx = idx * self.symbols + s;
        }
        let span = self.symbols.pow((self.level - prefix.len()) as u32);
        idx * span..(idx + 1) * span
    }

    /// Vertex nearest to a point of the embedding.
    pub fn nearest_vertex(&self, x: &[f64]) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (v, c) in self.coords.iter().enumerate() {
            let d = dist(c, x);
            if d < best.0 {
                best = (d, v);
            }
        }
        best.1
    }

    /// Mass-weighted integral of a vertex function.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.vertex_mass).map(|(a, m)| a * m).sum()
    }

    /// Number of distinct embedded points at tolerance `tol`, found by
    /// brute-force coordinate deduplication of every F_w(x_p).
    pub fn coordinate_dedup_count(&self, s: &SelfSimilarStructure, tol: f64) -> usize {
        let mut reps: Vec<Vec<f64>> = Vec::new();
        let mut grid: std::collections::HashMap<Vec<i64>, Vec<usize>> = Default::default();
        let key = |x: &[f64]| -> Vec<i64> { x.iter().map(|c| (c / (10.0 * tol)).floor() as i64).collect() };
        for c in 0..self.num_cells() {
            let w = self.cell_word(c);
            for p in 0..self.boundary_size {
                let x = s.map_point(&w.0, p);
                let k = key(&x);
                let mut hit = false;
                // probe the neighbouring buckets
                let dim = k.len();
                for code in 0..3usize.pow(dim as u32) {
                    let mut kk = k.clone();
                    let mut cc = code;
                    for slot in kk.iter_mut() {
                        *slot += (cc % 3) as i64 - 1;
                        cc /= 3;
                    }
                    if let Some(list) = grid.get(&kk) {
                        if list.iter().any(|&r| dist(&reps[r], &x) <= tol) {
                            hit = true;
                            break;
                        }
                    }
                }
                if !hit {
                    reps.push(x);
                    grid.entry(k).or_default().push(reps.len() - 1);
                }
            }
        }
        reps.len()
    }

    /// Writes `vertices.csv` (vertex_id, coords..., mass) and `cells.csv`
    /// (word, vertex ids in V_0 order).
    pub fn export_csv(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut vw = csv::Writer::from_path(dir.join("vertices.csv"))?;
        let dim = self.coords.first().map_or(0, Vec::len);
        let mut header = vec!["vertex_id".to_string()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        header.push("mass".into());
        vw.write_record(&header)?;
        for (v, c) in self.coords.iter().enumerate() {
            let mut rec = vec![v.to_string()];
            rec.extend(c.iter().map(|x| format!("{x:?}")));
            rec.push(format!("{:?}", self.vertex_mass[v]));
            vw.write_record(&rec)?;
        }
        vw.flush()?;

        let mut cw = csv::Writer::from_path(dir.join("cells.csv"))?;
        let mut header = vec!["word".to_string()];
        header.extend((0..self.boundary_size).map(|p| format!("v{p}")));
        cw.write_record(&header)?;
        for c in 0..self.num_cells() {
            let mut rec = vec![self.cell_word(c).to_string()];
            rec.extend(self.cell(c).iter().map(|v| v.to_string()));
            cw.write_record(&rec)?;
        }
        cw.flush()?;
        std::io::stdout().flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_level_three() {
        let s = SelfSimilarStructure::interval().unwrap();
        let g = build_level(&s, 3).unwrap();
        assert_eq!(g.num_vertices(), 9);
        let mut xs: Vec<f64> = g.all_coords().iter().map(|c| c[0]).collect();
        xs.sort_by(f64::total_cmp);
        for (k, x) in xs.iter().enumerate() {
            assert!((x - k as f64 / 8.0).abs() < 1e-15);
        }
        assert!(g.cell_measures().iter().all(|m| (m - 0.125).abs() < 1e-15));
        assert_eq!(g.coords(0), &[0.0]);
        assert_eq!(g.coords(1), &[1.0]);
    }

    #[test]
    fn sierpinski_level_one() {
        let s = SelfSimilarStructure::sierpinski().unwrap();
        let g = build_level(&s, 1).unwrap();
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(g.num_cells(), 3);
        for m in g.cell_measures() {
            assert!((m - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn level_zero_is_boundary() {
        for name in ["interval", "sierpinski", "vicsek"] {
            let s = SelfSimilarStructure::preset(name).unwrap();
            let g = build_level(&s, 0).unwrap();
            assert_eq!(g.num_vertices(), s.boundary_size());
            assert_eq!(g.num_cells(), 1);
            assert_eq!(g.cell_measures(), &[1.0]);
            assert_eq!(g.cell_word(0), Word::empty());
        }
    }

    #[test]
    fn sierpinski_vertex_counts_and_mass() {
        let s = SelfSimilarStructure::sierpinski().unwrap();
        for m in 0..=6 {
            let g = build_level(&s, m).unwrap();
            assert_eq!(g.num_vertices(), (3usize.pow(m as u32 + 1) + 3) / 2);
            let total: f64 = g.vertex_mass().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let cells: f64 = g.cell_measures().iter().sum();
            assert!((cells - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gluing_matches_coordinate_dedup() {
        for name in ["interval", "sierpinski", "vicsek"] {
            let s = SelfSimilarStructure::preset(name).unwrap();
            for m in 0..=5 {
                let g = build_level(&s, m).unwrap();
                assert_eq!(g.num_vertices(), g.coordinate_dedup_count(&s, GLUE_TOL), "{name} m={m}");
            }
        }
    }

    #[test]
    fn vicsek_counts() {
        // Five copies of V_m glued at the four corners of the centre copy.
        let s = SelfSimilarStructure::vicsek().unwrap();
        let mut expected = 4;
        for m in 0..5 {
            let g = build_level(&s, m).unwrap();
            assert_eq!(g.num_vertices(), expected);
            expected = 5 * expected - 4;
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = SelfSimilarStructure::sierpinski().unwrap();
        assert!(matches!(
            build_level(&s, 12),
            Err(Error::BudgetExceeded { level: 12, .. })
        ));
        assert!(build_level_with_budget(&s, 2, 26).is_err());
        assert!(build_level_with_budget(&s, 2, 27).is_ok());
    }

    #[test]
    fn lumped_mass_formula() {
        let s = SelfSimilarStructure::interval().unwrap();
        let g = build_level(&s, 4).unwrap();
        for v in g.boundary_ids() {
            assert!((g.vertex_mass()[v] - 1.0 / 32.0).abs() < 1e-15);
        }
        for v in g.interior_ids() {
            assert!((g.vertex_mass()[v] - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cells_under_prefix() {
        let s = SelfSimilarStructure::sierpinski().unwrap();
        let g = build_level(&s, 3).unwrap();
        let range = g.cells_under(&Word(vec![2, 1]));
        assert_eq!(range.len(), 3);
        for c in range {
            assert!(g.cell_word(c).starts_with(&Word(vec![2, 1])));
        }
    }

    #[test]
    fn csv_export_writes_both_tables() {
        let s = SelfSimilarStructure::sierpinski().unwrap();
        let g = build_level(&s, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        g.export_csv(dir.path()).unwrap();
        let vertices = std::fs::read_to_string(dir.path().join("vertices.csv")).unwrap();
        assert_eq!(vertices.lines().count(), 1 + 15);
        assert!(vertices.starts_with("vertex_id,x0,x1,mass"));
        let cells = std::fs::read_to_string(dir.path().join("cells.csv")).unwrap();
        assert_eq!(cells.lines().count(), 1 + 9);
        assert!(cells.lines().nth(1).unwrap().starts_with("0.0,"));
    }
}
