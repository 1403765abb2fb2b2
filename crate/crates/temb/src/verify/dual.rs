//! Combinatorics of the augmented dual graph: rotation system, faces and
//! their colouring.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::lattice::{hexagon_residue, FaceCoord, GraphKind};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceColor {
    Black,
    White,
}

/// A face of the dual graph, i.e. a vertex of the primal graph. The cycle is
/// traversed counter-clockwise.
#[derive(Clone, Debug)]
pub struct DualFace {
    pub cycle: Vec<usize>,
    pub color: Option<FaceColor>,
}

/// Augmented dual `G*` of the Aztec diamond or tower graph of size `n`:
/// inner dual vertices, the four boundary vertices and the outer
/// quadrilateral joining them.
///
/// Vertex indices agree with [`crate::TEmbeddingLevel`] for the same kind
/// and size.
#[derive(Clone, Debug)]
pub struct DualGraph {
    pub kind: GraphKind,
    pub n: i64,
    pub coords: Vec<FaceCoord>,
    /// Neighbours of each vertex in counter-clockwise order.
    pub rotation: Vec<Vec<usize>>,
    pub faces: Vec<DualFace>,
    /// Index of the unbounded face.
    pub outer: usize,
    /// Index of the white face left of `B_E -> B_N`.
    pub root: usize,
    index: HashMap<FaceCoord, usize>,
    /// Face to the left of each dart `(u, rotation[u][p])`.
    left: Vec<Vec<usize>>,
}

impl DualGraph {
    pub fn new(kind: GraphKind, n: i64) -> Result<Self, Error> {
        if n < 1 {
            return Err(Error::Precondition(format!("size must be positive, got {n}")));
        }
        let (jmin, jmax, kmin, kmax) = kind.bounds(n);
        let mut coords = Vec::new();
        for j in jmin..=jmax {
            for k in kmin..=kmax {
                if kind.is_inner(j, k, n) {
                    coords.push(FaceCoord::new(j, k));
                }
            }
        }
        let bnd = kind.boundary(n);
        coords.extend(bnd);
        let index: HashMap<FaceCoord, usize> = coords.iter().enumerate().map(|(i, c)| (*c, i)).collect();

        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); coords.len()];
        let mut link = |a: FaceCoord, b: FaceCoord| {
            let (ia, ib) = (index[&a], index[&b]);
            if !adj[ia].contains(&ib) {
                adj[ia].push(ib);
                adj[ib].push(ia);
            }
        };
        let inner = |j: i64, k: i64| kind.is_inner(j, k, n);
        for c in &coords[..coords.len() - 4] {
            let (j, k) = (c.j, c.k);
            for (dj, dk) in [(1, 0), (0, 1)] {
                if inner(j + dj, k + dk) {
                    link(*c, FaceCoord::new(j + dj, k + dk));
                }
            }
            match kind {
                GraphKind::Aztec => {
                    if j.abs() + k.abs() == n - 1 {
                        for (dj, dk) in [(1, 1), (1, -1)] {
                            let (a, b) = (j + dj, k + dk);
                            if a.abs() + b.abs() == n - 1 {
                                link(*c, FaceCoord::new(a, b));
                            }
                        }
                    }
                }
                GraphKind::Tower => {
                    if hexagon_residue(j, k, n) && inner(j + 1, k - 1) {
                        link(*c, FaceCoord::new(j + 1, k - 1));
                    }
                }
            }
        }
        let attach = match kind {
            GraphKind::Aztec => [(n - 1, 0), (0, n - 1), (1 - n, 0), (0, 1 - n)],
            GraphKind::Tower => [(2 * n - 1, 0), (0, 2 * n - 1), (1 - n, 0), (0, 1 - n)],
        };
        for (b, (j, k)) in bnd.iter().zip(attach) {
            link(*b, FaceCoord::new(j, k));
        }
        for s in 0..4 {
            link(bnd[s], bnd[(s + 1) % 4]);
        }

        let rotation: Vec<Vec<usize>> = adj
            .into_iter()
            .enumerate()
            .map(|(u, mut nb)| {
                let angle = |w: &usize| {
                    let (a, b) = (coords[*w], coords[u]);
                    ((a.k - b.k) as f64).atan2((a.j - b.j) as f64).rem_euclid(2.0 * PI)
                };
                nb.sort_by(|x, y| angle(x).total_cmp(&angle(y)));
                nb
            })
            .collect();

        let mut g = DualGraph {
            kind,
            n,
            coords,
            rotation,
            faces: Vec::new(),
            outer: 0,
            root: 0,
            index,
            left: Vec::new(),
        };
        g.trace_faces();
        let be = g.index[&bnd[0]];
        let bn = g.index[&bnd[1]];
        g.outer = g.left_of(bn, be);
        g.root = g.left_of(be, bn);
        g.color_faces()?;
        Ok(g)
    }

    pub fn index_of(&self, c: FaceCoord) -> Option<usize> {
        self.index.get(&c).copied()
    }

    pub fn boundary_indices(&self) -> [usize; 4] {
        let l = self.coords.len();
        [l - 4, l - 3, l - 2, l - 1]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v >= self.coords.len() - 4
    }

    fn pos(&self, u: usize, v: usize) -> usize {
        self.rotation[u].iter().position(|&w| w == v).expect("not an edge")
    }

    /// Face to the left of the dart `u -> v`.
    pub fn left_of(&self, u: usize, v: usize) -> usize {
        self.left[u][self.pos(u, v)]
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rotation
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.rotation.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn trace_faces(&mut self) {
        const UNSET: usize = usize::MAX;
        let mut left: Vec<Vec<usize>> = self.rotation.iter().map(|nb| vec![UNSET; nb.len()]).collect();
        let mut faces = Vec::new();
        for u0 in 0..self.rotation.len() {
            for p0 in 0..self.rotation[u0].len() {
                if left[u0][p0] != UNSET {
                    continue;
                }
                let f = faces.len();
                let mut cycle = Vec::new();
                let (mut u, mut p) = (u0, p0);
                while left[u][p] == UNSET {
                    left[u][p] = f;
                    cycle.push(u);
                    let v = self.rotation[u][p];
                    let q = self.pos(v, u);
                    let d = self.rotation[v].len();
                    u = v;
                    p = (q + d - 1) % d;
                }
                faces.push(DualFace { cycle, color: None });
            }
        }
        self.faces = faces;
        self.left = left;
    }

    fn color_faces(&mut self) -> Result<(), Error> {
        let mut color: Vec<Option<FaceColor>> = vec![None; self.faces.len()];
        color[self.root] = Some(FaceColor::White);
        let mut queue = std::collections::VecDeque::from([self.root]);
        while let Some(f) = queue.pop_front() {
            let c = color[f].unwrap();
            let opposite = if c == FaceColor::White { FaceColor::Black } else { FaceColor::White };
            let cyc = &self.faces[f].cycle;
            for i in 0..cyc.len() {
                let (u, v) = (cyc[i], cyc[(i + 1) % cyc.len()]);
                let g = self.left_of(v, u);
                if g == self.outer {
                    continue;
                }
                match color[g] {
                    None => {
                        color[g] = Some(opposite);
                        queue.push_back(g);
                    }
                    Some(x) if x != opposite => {
                        return Err(Error::Degenerate(format!("face graph is not bipartite at face {g}")));
                    }
                    _ => {}
                }
            }
        }
        for (f, face) in self.faces.iter_mut().enumerate() {
            if f != self.outer && color[f].is_none() {
                return Err(Error::Disconnected);
            }
            face.color = color[f];
        }
        Ok(())
    }

    /// Corners at `v`: for consecutive counter-clockwise neighbours
    /// `(w_i, w_{i+1})`, the face lying between them.
    pub fn corners(&self, v: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let nb = &self.rotation[v];
        (0..nb.len()).map(move |i| {
            let (a, b) = (nb[i], nb[(i + 1) % nb.len()]);
            (a, b, self.left_of(b, v))
        })
    }

    /// Faces other than the outer one.
    pub fn bounded_faces(&self) -> impl Iterator<Item = (usize, &DualFace)> + '_ {
        self.faces.iter().enumerate().filter(move |(f, _)| *f != self.outer)
    }
}
