use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};
use num_complex::Complex;

/// Rectangular grid in `z = x + iy` with a distinguished base node holding `z₀`.
///
/// Node `(i, j)` sits at `z₀ + (i − i₀)·hx + i(j − j₀)·hy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZGrid<S: Real> {
    pub origin: Cx<S>,
    pub nx: usize,
    pub ny: usize,
    pub hx: S,
    pub hy: S,
    pub base: (usize, usize),
}

impl<S: Real> ZGrid<S> {
    /// Grid whose base node is the corner `(0, 0)`.
    pub fn new(origin: Cx<S>, nx: usize, ny: usize, hx: S, hy: S) -> Result<Self> {
        Self::with_base(origin, nx, ny, hx, hy, (0, 0))
    }

    /// Grid whose base node is the central node.
    pub fn centered(origin: Cx<S>, nx: usize, ny: usize, hx: S, hy: S) -> Result<Self> {
        Self::with_base(origin, nx, ny, hx, hy, (nx / 2, ny / 2))
    }

    pub fn with_base(origin: Cx<S>, nx: usize, ny: usize, hx: S, hy: S, base: (usize, usize)) -> Result<Self> {
        const OP: &str = "zeroflow::ZGrid";
        if nx < 2 || ny < 2 {
            return Err(Error::Invalid { op: OP, msg: format!("need nx, ny >= 2, got {nx} x {ny}") });
        }
        if !(hx.is_finite() && hy.is_finite() && hx > S::zero() && hy > S::zero()) {
            return Err(Error::Invalid { op: OP, msg: "spacings must be finite and positive".into() });
        }
        if !(origin.re.is_finite() && origin.im.is_finite()) {
            return Err(Error::Invalid { op: OP, msg: "origin must be finite".into() });
        }
        if base.0 >= nx || base.1 >= ny {
            return Err(Error::Invalid { op: OP, msg: format!("base node {base:?} outside the grid") });
        }
        Ok(Self { origin, nx, ny, hx, hy, base })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn base_index(&self) -> usize {
        self.index(self.base.0, self.base.1)
    }

    pub fn point(&self, i: usize, j: usize) -> Cx<S> {
        let di = S::from_usize(i).unwrap() - S::from_usize(self.base.0).unwrap();
        let dj = S::from_usize(j).unwrap() - S::from_usize(self.base.1).unwrap();
        self.origin + Complex::new(di * self.hx, dj * self.hy)
    }
}

/// Order in which the grid is swept from the base node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PathOrder {
    /// Along the vertical line through the base node first, then along each row.
    #[default]
    YThenX,
    /// Along the base row first, then along each column.
    XThenY,
}

/// One step of a sweep: move from node `from` to node `to` by the complex increment `dz`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step<S: Real> {
    pub from: usize,
    pub to: usize,
    pub dz: Cx<S>,
}

/// All steps of a sweep in dependency order; every node except the base is reached once.
pub fn sweep<S: Real>(grid: &ZGrid<S>, order: PathOrder) -> Vec<Step<S>> {
    let (i0, j0) = grid.base;
    let ex = Complex::new(grid.hx, S::zero());
    let ey = Complex::new(S::zero(), grid.hy);
    let mut steps = Vec::with_capacity(grid.len());
    // (line length, base position on line, increment, node index as function of (line pos, cross pos))
    let line = |steps: &mut Vec<Step<S>>, n: usize, p0: usize, d: Cx<S>, idx: &dyn Fn(usize) -> usize| {
        for p in p0 + 1..n {
            steps.push(Step { from: idx(p - 1), to: idx(p), dz: d });
        }
        for p in (0..p0).rev() {
            steps.push(Step { from: idx(p + 1), to: idx(p), dz: -d });
        }
    };
    match order {
        PathOrder::YThenX => {
            line(&mut steps, grid.ny, j0, ey, &|j| grid.index(i0, j));
            for j in 0..grid.ny {
                line(&mut steps, grid.nx, i0, ex, &|i| grid.index(i, j));
            }
        }
        PathOrder::XThenY => {
            line(&mut steps, grid.nx, i0, ex, &|i| grid.index(i, j0));
            for i in 0..grid.nx {
                line(&mut steps, grid.ny, j0, ey, &|j| grid.index(i, j));
            }
        }
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c64;

    #[test]
    fn sweep_reaches_every_node_once() {
        let g = ZGrid::with_base(c64(0.0, 0.0), 5, 4, 0.1, 0.2, (2, 1)).unwrap();
        for order in [PathOrder::YThenX, PathOrder::XThenY] {
            let steps = sweep(&g, order);
            assert_eq!(steps.len(), g.len() - 1);
            let mut seen = vec![false; g.len()];
            seen[g.base_index()] = true;
            for s in steps {
                assert!(seen[s.from] && !seen[s.to]);
                seen[s.to] = true;
                let (fi, fj) = (s.from % g.nx, s.from / g.nx);
                let (ti, tj) = (s.to % g.nx, s.to / g.nx);
                assert!((g.point(ti, tj) - g.point(fi, fj) - s.dz).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(ZGrid::new(c64(0.0, 0.0), 1, 4, 0.1, 0.1).is_err());
        assert!(ZGrid::new(c64(0.0, 0.0), 3, 4, 0.0, 0.1).is_err());
        assert!(ZGrid::new(c64(0.0, 0.0), 3, 4, 0.1, f64::NAN).is_err());
        assert!(ZGrid::with_base(c64(0.0, 0.0), 3, 4, 0.1, 0.1, (3, 0)).is_err());
    }
}
