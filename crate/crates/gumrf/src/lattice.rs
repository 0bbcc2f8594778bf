//! Toroidal grid geometry: site indexing, neighborhoods, distances and
//! graph colorings shared by all samplers and estimators.

use crate::error::{Error, Result};

/// Rectangular toroidal lattice. Sites are indexed `0..n` in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridShape {
    height: usize,
    width: usize,
}

impl GridShape {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "grid dimensions must be positive, got {height}x{width}"
            )));
        }
        Ok(GridShape { height, width })
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// Total site count.
    #[inline]
    pub fn num_sites(&self) -> usize {
        self.height * self.width
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row * self.width + col
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        debug_assert!(site < self.num_sites());
        (site / self.width, site % self.width)
    }
}

/// 4- or 8-neighborhood on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NeighborhoodSystem {
    Four,
    Eight,
}

impl NeighborhoodSystem {
    pub fn degree(&self) -> usize {
        match self {
            NeighborhoodSystem::Four => 4,
            NeighborhoodSystem::Eight => 8,
        }
    }
}

/// Toroidal neighbors of `site`, in fixed order N, S, W, E (then NW, NE,
/// SW, SE for the eight-neighborhood).
pub fn neighbors(site: usize, shape: GridShape, system: NeighborhoodSystem) -> Result<Vec<usize>> {
    if site >= shape.num_sites() {
        return Err(Error::invalid(format!(
            "site index {site} out of range for {} sites",
            shape.num_sites()
        )));
    }
    let (r, c) = shape.coords(site);
    let h = shape.height();
    let w = shape.width();
    let up = (r + h - 1) % h;
    let down = (r + 1) % h;
    let left = (c + w - 1) % w;
    let right = (c + 1) % w;
    let mut out = vec![
        shape.index(up, c),
        shape.index(down, c),
        shape.index(r, left),
        shape.index(r, right),
    ];
    if let NeighborhoodSystem::Eight = system {
        out.push(shape.index(up, left));
        out.push(shape.index(up, right));
        out.push(shape.index(down, left));
        out.push(shape.index(down, right));
    }
    Ok(out)
}

/// Euclidean length of the shortest wrapped displacement for a lag with
/// `0 <= dr < height`, `0 <= dc < width`.
pub fn torus_lag_distance(lag: (usize, usize), shape: GridShape) -> f64 {
    let (dr, dc) = lag;
    debug_assert!(dr < shape.height() && dc < shape.width());
    let dr = dr.min(shape.height() - dr) as f64;
    let dc = dc.min(shape.width() - dc) as f64;
    (dr * dr + dc * dc).sqrt()
}

/// Euclidean distance of unwrapped (row, col) coordinates.
pub fn plane_distance(s: usize, t: usize, shape: GridShape) -> f64 {
    let (r1, c1) = shape.coords(s);
    let (r2, c2) = shape.coords(t);
    let dr = r1 as f64 - r2 as f64;
    let dc = c1 as f64 - c2 as f64;
    (dr * dr + dc * dc).sqrt()
}

/// Partition of the sites into classes such that no two neighbors share a
/// class; used by the chromatic Gibbs sampler.
#[derive(Debug, Clone)]
pub struct Coloring {
    pub colors: Vec<u8>,
    pub num_colors: usize,
}

impl Coloring {
    /// Site indices of each color class, in ascending site order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_colors];
        for (site, &c) in self.colors.iter().enumerate() {
            out[c as usize].push(site);
        }
        out
    }
}

/// Color the grid for the given neighborhood system.
///
/// Even dimensions get the minimal pattern (checkerboard for the
/// four-neighborhood, 2x2 blocks for the eight-neighborhood). Odd
/// dimensions fall back to a greedy coloring, which may need one extra
/// color; only validity matters for chromatic sampling.
pub fn color_grid(shape: GridShape, system: NeighborhoodSystem) -> Coloring {
    let h = shape.height();
    let w = shape.width();
    let even = h.is_multiple_of(2) && w.is_multiple_of(2);
    if even {
        let mut colors = vec![0u8; shape.num_sites()];
        for r in 0..h {
            for c in 0..w {
                colors[shape.index(r, c)] = match system {
                    NeighborhoodSystem::Four => ((r + c) % 2) as u8,
                    NeighborhoodSystem::Eight => ((r % 2) * 2 + c % 2) as u8,
                };
            }
        }
        let num_colors = system.degree() / 2;
        return Coloring { colors, num_colors };
    }
    greedy_coloring(shape, system)
}

fn greedy_coloring(shape: GridShape, system: NeighborhoodSystem) -> Coloring {
    let n = shape.num_sites();
    let mut colors = vec![u8::MAX; n];
    let mut num_colors = 0usize;
    for site in 0..n {
        let nbrs = neighbors(site, shape, system).expect("site in range");
        let used: Vec<u8> = nbrs
            .iter()
            .filter(|&&t| colors[t] != u8::MAX)
            .map(|&t| colors[t])
            .collect();
        let mut c = 0u8;
        while used.contains(&c) {
            c += 1;
        }
        colors[site] = c;
        num_colors = num_colors.max(c as usize + 1);
    }
    Coloring { colors, num_colors }
}
