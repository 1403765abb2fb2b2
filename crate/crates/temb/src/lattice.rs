//! Face coordinates, membership predicates and dense level storage.

use serde::{Deserialize, Serialize};

use crate::scalar::{Cx, Scalar};

/// Integer face index `(j, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FaceCoord {
    pub j: i64,
    pub k: i64,
}

impl FaceCoord {
    pub const fn new(j: i64, k: i64) -> Self {
        FaceCoord { j, k }
    }
}

impl From<(i64, i64)> for FaceCoord {
    fn from((j, k): (i64, i64)) -> Self {
        FaceCoord { j, k }
    }
}

/// Inner face of `A_n`, equivalently inner dual vertex of the reduced
/// diamond of size `n + 1`.
pub fn in_aztec(j: i64, k: i64, n: i64) -> bool {
    j.abs() + k.abs() < n
}

/// The parity lattice: `j + k + n` odd.
pub fn in_lambda(j: i64, k: i64, n: i64) -> bool {
    (j + k + n).rem_euclid(2) == 1
}

/// Inner face of the tower graph of size `n`.
pub fn in_tower(j: i64, k: i64, n: i64) -> bool {
    if j >= 0 && k >= 0 {
        j + k < 2 * n
    } else if j <= 0 && k <= 0 {
        -j - k < n
    } else if j < 0 {
        k - 2 * j < 2 * n
    } else {
        j - 2 * k < 2 * n
    }
}

/// Hexagonal tower face. Callers must pass an inner face.
pub fn is_hexagon(j: i64, k: i64, n: i64) -> Result<bool, crate::Error> {
    if !in_tower(j, k, n) {
        return Err(crate::Error::Precondition(format!("({j},{k}) is not a face of the size-{n} tower")));
    }
    Ok(hexagon_residue(j, k, n))
}

pub(crate) fn hexagon_residue(j: i64, k: i64, n: i64) -> bool {
    (-j - k + 2 * n).rem_euclid(3) == 2
}

/// Support of the tower levels at half-step `m`.
///
/// On the negative quadrant the bound is `2(-j-k) <= m`; at odd `m` this is
/// the same set as `-j-k <= (m-1)/2`, at even `m` it keeps the ring
/// `-j-k = m/2` that the corner updates at `(-m/2, 0)` and `(0, -m/2)` feed.
pub fn in_hm(j: i64, k: i64, m: i64) -> bool {
    if j >= 0 && k >= 0 {
        j + k <= m
    } else if j <= 0 && k <= 0 {
        2 * (-j - k) <= m
    } else if j > 0 {
        j - 2 * k <= m
    } else {
        k - 2 * j <= m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Aztec,
    Tower,
}

impl GraphKind {
    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Aztec => "aztec",
            GraphKind::Tower => "tower",
        }
    }

    /// Boundary dual vertices in counter-clockwise order, starting from the
    /// one sent to `1`.
    pub fn boundary(self, n: i64) -> [FaceCoord; 4] {
        match self {
            GraphKind::Aztec => [
                FaceCoord::new(n, 0),
                FaceCoord::new(0, n),
                FaceCoord::new(-n, 0),
                FaceCoord::new(0, -n),
            ],
            GraphKind::Tower => [
                FaceCoord::new(2 * n, 0),
                FaceCoord::new(0, 2 * n),
                FaceCoord::new(-n, 0),
                FaceCoord::new(0, -n),
            ],
        }
    }

    pub fn is_inner(self, j: i64, k: i64, n: i64) -> bool {
        match self {
            GraphKind::Aztec => in_aztec(j, k, n),
            GraphKind::Tower => in_tower(j, k, n),
        }
    }

    /// Bounding box `(jmin, jmax, kmin, kmax)` of all dual vertices.
    pub fn bounds(self, n: i64) -> (i64, i64, i64, i64) {
        match self {
            GraphKind::Aztec => (-n, n, -n, n),
            GraphKind::Tower => (-n, 2 * n, -n, 2 * n),
        }
    }
}

/// Dense rectangular storage over `[jmin, jmax] x [kmin, kmax]`; reads outside
/// the box return the fill value.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    jmin: i64,
    kmin: i64,
    width: usize,
    height: usize,
    data: Vec<T>,
    fill: T,
}

impl<T: Clone> Grid<T> {
    pub fn new(jmin: i64, jmax: i64, kmin: i64, kmax: i64, fill: T) -> Self {
        let width = (jmax - jmin + 1).max(0) as usize;
        let height = (kmax - kmin + 1).max(0) as usize;
        Grid { jmin, kmin, width, height, data: vec![fill.clone(); width * height], fill }
    }

    /// Square box `[-r, r]^2`.
    pub fn square(r: i64, fill: T) -> Self {
        Grid::new(-r, r, -r, r, fill)
    }

    fn index(&self, j: i64, k: i64) -> Option<usize> {
        let a = j - self.jmin;
        let b = k - self.kmin;
        if a < 0 || b < 0 || a as usize >= self.width || b as usize >= self.height {
            None
        } else {
            Some(b as usize * self.width + a as usize)
        }
    }

    pub fn get(&self, j: i64, k: i64) -> &T {
        match self.index(j, k) {
            Some(i) => &self.data[i],
            None => &self.fill,
        }
    }

    /// Panics when `(j, k)` lies outside the box.
    pub fn set(&mut self, j: i64, k: i64, v: T) {
        let i = self.index(j, k).unwrap_or_else(|| panic!("({j},{k}) outside grid"));
        self.data[i] = v;
    }

    pub fn contains(&self, j: i64, k: i64) -> bool {
        self.index(j, k).is_some()
    }

    pub fn j_range(&self) -> std::ops::RangeInclusive<i64> {
        self.jmin..=self.jmin + self.width as i64 - 1
    }

    pub fn k_range(&self) -> std::ops::RangeInclusive<i64> {
        self.kmin..=self.kmin + self.height as i64 - 1
    }

    /// All cells, row by row.
    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, &T)> {
        self.data.iter().enumerate().map(move |(i, v)| {
            let j = self.jmin + (i % self.width) as i64;
            let k = self.kmin + (i / self.width) as i64;
            (j, k, v)
        })
    }

    /// Fills the box row by row in parallel.
    pub fn par_from_fn(jmin: i64, jmax: i64, kmin: i64, kmax: i64, fill: T, f: impl Fn(i64, i64) -> T + Sync) -> Self
    where
        T: Send + Sync,
    {
        use rayon::prelude::*;
        let width = (jmax - jmin + 1).max(0) as usize;
        let height = (kmax - kmin + 1).max(0) as usize;
        let rows: Vec<Vec<T>> = (0..height)
            .into_par_iter()
            .map(|b| (0..width).map(|a| f(jmin + a as i64, kmin + b as i64)).collect())
            .collect();
        Grid { jmin, kmin, width, height, data: rows.into_iter().flatten().collect(), fill }
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid {
            jmin: self.jmin,
            kmin: self.kmin,
            width: self.width,
            height: self.height,
            data: self.data.iter().map(&f).collect(),
            fill: f(&self.fill),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Inner,
    Boundary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex<S> {
    pub at: FaceCoord,
    pub kind: VertexKind,
    pub t: Cx<S>,
    pub o: Cx<S>,
}

/// Positions `T` and origami values `O` of every dual vertex at size `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TEmbeddingLevel<S> {
    pub n: i64,
    pub kind: GraphKind,
    /// Inner vertices in `(j, k)` order, then the four boundary vertices in
    /// the order of [`GraphKind::boundary`].
    pub vertices: Vec<Vertex<S>>,
    index: Grid<u32>,
}

const NO_VERTEX: u32 = u32::MAX;

impl<S: Scalar> TEmbeddingLevel<S> {
    /// Assembles a level from per-vertex values.
    pub fn build(
        kind: GraphKind,
        n: i64,
        mut t: impl FnMut(i64, i64) -> Cx<S>,
        mut o: impl FnMut(i64, i64) -> Cx<S>,
    ) -> Self {
        let (jmin, jmax, kmin, kmax) = kind.bounds(n);
        let mut vertices = Vec::new();
        for j in jmin..=jmax {
            for k in kmin..=kmax {
                if kind.is_inner(j, k, n) {
                    vertices.push(Vertex { at: FaceCoord::new(j, k), kind: VertexKind::Inner, t: t(j, k), o: o(j, k) });
                }
            }
        }
        for b in kind.boundary(n) {
            vertices.push(Vertex { at: b, kind: VertexKind::Boundary, t: t(b.j, b.k), o: o(b.j, b.k) });
        }
        Self::from_vertices(kind, n, vertices)
    }

    pub fn from_vertices(kind: GraphKind, n: i64, vertices: Vec<Vertex<S>>) -> Self {
        let (jmin, jmax, kmin, kmax) = kind.bounds(n);
        let mut index = Grid::new(jmin, jmax, kmin, kmax, NO_VERTEX);
        for (i, v) in vertices.iter().enumerate() {
            index.set(v.at.j, v.at.k, i as u32);
        }
        TEmbeddingLevel { n, kind, vertices, index }
    }

    pub fn index_of(&self, j: i64, k: i64) -> Option<usize> {
        match *self.index.get(j, k) {
            NO_VERTEX => None,
            i => Some(i as usize),
        }
    }

    pub fn vertex(&self, j: i64, k: i64) -> Option<&Vertex<S>> {
        self.index_of(j, k).map(|i| &self.vertices[i])
    }

    pub fn t(&self, j: i64, k: i64) -> Option<&Cx<S>> {
        self.vertex(j, k).map(|v| &v.t)
    }

    pub fn o(&self, j: i64, k: i64) -> Option<&Cx<S>> {
        self.vertex(j, k).map(|v| &v.o)
    }

    pub fn inner(&self) -> impl Iterator<Item = &Vertex<S>> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Inner)
    }

    pub fn boundary(&self) -> impl Iterator<Item = &Vertex<S>> {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Boundary)
    }

    /// Double-precision copy.
    pub fn to_f64(&self) -> TEmbeddingLevel<f64> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Vertex {
                at: v.at,
                kind: v.kind,
                t: Cx::new(v.t.re.to_f64(), v.t.im.to_f64()),
                o: Cx::new(v.o.re.to_f64(), v.o.im.to_f64()),
            })
            .collect();
        TEmbeddingLevel::from_vertices(self.kind, self.n, vertices)
    }
}
