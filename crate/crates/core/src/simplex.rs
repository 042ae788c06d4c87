//! Adaptive quadrature on the unit simplex.
//!
//! Integrands are functions of a full simplex point `w` (d coordinates
//! summing to 1); the integration measure is Lebesgue measure of the first
//! `d - 1` coordinates, so the constant function integrates to
//! `1 / (d - 1)!`.
//!
//! The driver subdivides the worst cell (longest-edge bisection) and scores
//! each cell with a pair of interior Grundmann-Möller rules. Cells that keep
//! a large error estimate after repeated bisection — in practice cells
//! carrying an integrable boundary singularity — are finished with a tensor
//! tanh-sinh rule mapped onto the cell, which clusters nodes toward the cell
//! faces at double-exponential rates.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// A full-dimensional sub-simplex of the unit simplex: `d` vertices, each a
/// point with `d` coordinates summing to 1.
#[derive(Debug, Clone)]
pub(crate) struct Cell {
    pub verts: Vec<Vec<f64>>,
}

impl Cell {
    fn ambient_dim(&self) -> usize {
        self.verts.len()
    }

    /// Lebesgue volume in the first `d - 1` coordinates.
    fn volume(&self) -> f64 {
        let d = self.ambient_dim();
        let n = d - 1;
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for c in 0..n {
            for r in 0..n {
                m[(r, c)] = self.verts[c + 1][r] - self.verts[0][r];
            }
        }
        let mut fact = 1.0;
        for k in 2..=n {
            fact *= k as f64;
        }
        m.determinant().abs() / fact
    }

    fn bisect(&self) -> (Cell, Cell) {
        let d = self.ambient_dim();
        let (mut bi, mut bj, mut best) = (0usize, 1usize, -1.0f64);
        for i in 0..d {
            for j in (i + 1)..d {
                let len2: f64 = (0..d).map(|k| (self.verts[i][k] - self.verts[j][k]).powi(2)).sum();
                if len2 > best {
                    best = len2;
                    bi = i;
                    bj = j;
                }
            }
        }
        let mid: Vec<f64> =
            (0..d).map(|k| 0.5 * (self.verts[bi][k] + self.verts[bj][k])).collect();
        let mut a = self.clone();
        a.verts[bj] = mid.clone();
        let mut b = self.clone();
        b.verts[bi] = mid;
        (a, b)
    }
}

pub(crate) fn full_cell(d: usize) -> Cell {
    let verts = (0..d)
        .map(|i| {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            v
        })
        .collect();
    Cell { verts }
}

/// Partition of the simplex into sub-simplices on which both
/// `max_j(w_j / y_j)` and `min_j(w_j / y_j)` are linear.
///
/// For a permutation `p` of the coordinates the cell vertices are the
/// normalized restrictions of `y` to the prefixes `{p_1}, {p_1,p_2}, …`; on
/// that cell the ratios `w_{p_1}/y_{p_1} >= w_{p_2}/y_{p_2} >= …` are ordered,
/// so the kinks of max/min lie on cell boundaries.
pub(crate) fn kink_cells(y: &[f64]) -> Vec<Cell> {
    let d = y.len();
    let mut cells = Vec::new();
    let mut perm: Vec<usize> = (0..d).collect();
    permute(&mut perm, 0, &mut |p: &[usize]| {
        let mut acc = vec![0.0; d];
        let mut s = 0.0;
        let mut verts = Vec::with_capacity(d);
        for &j in p {
            acc[j] = y[j];
            s += y[j];
            verts.push(acc.iter().map(|v| v / s).collect::<Vec<f64>>());
        }
        let cell = Cell { verts };
        if cell.volume() > 1e-13 {
            cells.push(cell);
        }
    });
    cells
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Uniform draw from the unit simplex via exponential spacings.
pub(crate) fn uniform_simplex<R: rand::Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let g: Vec<f64> = (0..d).map(|_| -rng.gen_range(1e-300..1.0f64).ln()).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

// ---------------------------------------------------------------------------
// Grundmann-Möller rules
// ---------------------------------------------------------------------------

/// Rule of index `s` on an `n`-simplex, exact for degree `2s + 1`.
/// Returns barycentric points (n+1 coordinates) and weights summing to 1.
fn gm_rule(n: usize, s: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let deg = (2 * s + 1) as i32;
    let fact = |m: i32| -> f64 { (1..=m).map(|v| v as f64).product::<f64>().max(1.0) };
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for i in 0..=s {
        let base = deg + n as i32 - 2 * i as i32;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-2 * s as i32) * (base as f64).powi(deg)
            / (fact(i as i32) * fact(deg + n as i32 - i as i32));
        for comp in compositions(s - i, n + 1) {
            pts.push(comp.iter().map(|&k| (2.0 * k as f64 + 1.0) / base as f64).collect());
            wts.push(w);
        }
    }
    let total: f64 = wts.iter().sum();
    for w in &mut wts {
        *w /= total;
    }
    (pts, wts)
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; parts];
    fn rec(total: usize, idx: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if idx + 1 == cur.len() {
            cur[idx] = total;
            out.push(cur.clone());
            return;
        }
        for v in 0..=total {
            cur[idx] = v;
            rec(total - v, idx + 1, cur, out);
        }
    }
    rec(total, 0, &mut cur, &mut out);
    out
}

struct GmPair {
    lo_pts: Vec<Vec<f64>>,
    lo_wts: Vec<f64>,
    hi_pts: Vec<Vec<f64>>,
    hi_wts: Vec<f64>,
}

impl GmPair {
    fn new(n: usize) -> Self {
        let (lo_pts, lo_wts) = gm_rule(n, 2);
        let (hi_pts, hi_wts) = gm_rule(n, 3);
        Self { lo_pts, lo_wts, hi_pts, hi_wts }
    }

    /// (value, error, evals) on one cell.
    fn apply<F: Fn(&[f64]) -> f64>(&self, f: &F, cell: &Cell, vol: f64) -> Result<(f64, f64, usize)> {
        let d = cell.ambient_dim();
        let mut point = vec![0.0; d];
        let mut eval_rule = |pts: &[Vec<f64>], wts: &[f64]| -> Result<f64> {
            let mut acc = 0.0;
            for (bary, &w) in pts.iter().zip(wts) {
                for k in 0..d {
                    point[k] = 0.0;
                    for (j, b) in bary.iter().enumerate() {
                        point[k] += b * cell.verts[j][k];
                    }
                }
                let v = f(&point);
                if !v.is_finite() {
                    return Err(Error::Numeric(format!(
                        "integrand returned a non-finite value at {point:?}"
                    )));
                }
                acc += w * v;
            }
            Ok(acc * vol)
        };
        let lo = eval_rule(&self.lo_pts, &self.lo_wts)?;
        let hi = eval_rule(&self.hi_pts, &self.hi_wts)?;
        Ok((hi, (hi - lo).abs(), self.lo_pts.len() + self.hi_pts.len()))
    }
}

// ---------------------------------------------------------------------------
// tanh-sinh rescue for boundary-singular cells
// ---------------------------------------------------------------------------

/// Nodes on (0,1) with both `u` and `1-u` carried at full relative precision.
fn tanh_sinh_nodes(h: f64, t_max: f64) -> Vec<(f64, f64, f64)> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let kmax = (t_max / h).floor() as i64;
    let mut nodes = Vec::with_capacity((2 * kmax + 1) as usize);
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let g = half_pi * t.sinh();
        // u = sigmoid(2g), 1-u = sigmoid(-2g); avoids cancellation at the ends
        let u = 1.0 / (1.0 + (-2.0 * g).exp());
        let omu = 1.0 / (1.0 + (2.0 * g).exp());
        let w = h * 0.5 * half_pi * t.cosh() / g.cosh().powi(2);
        if u > 0.0 && omu > 0.0 && w.is_finite() && w > 0.0 {
            nodes.push((u, omu, w));
        }
    }
    nodes
}

/// Tensor tanh-sinh integration over one cell through the stick-breaking map
/// from the unit cube onto the cell.
fn de_cell<F: Fn(&[f64]) -> f64>(f: &F, cell: &Cell, vol: f64) -> Result<(f64, f64, usize)> {
    let d = cell.ambient_dim();
    let n = d - 1;
    let mut nfact = 1.0;
    for k in 2..=n {
        nfact *= k as f64;
    }
    let levels: &[f64] = if n <= 2 { &[0.5, 0.25, 0.125] } else { &[0.5, 0.25] };
    let mut prev = f64::NAN;
    let mut value = 0.0;
    let mut err = f64::INFINITY;
    let mut evals = 0usize;

    for &h in levels {
        let nodes = tanh_sinh_nodes(h, 5.0);
        let m = nodes.len();
        let mut idx = vec![0usize; n];
        let mut acc = 0.0;
        let mut bary = vec![0.0; n + 1];
        let mut point = vec![0.0; d];
        loop {
            // stick-breaking: bary from the cube point, jacobian from the
            // (1-u) factors
            let mut wgt = 1.0;
            let mut jac = 1.0;
            let mut carry = 1.0;
            for a in 0..n {
                let (u, omu, w) = nodes[idx[a]];
                wgt *= w;
                bary[a] = carry * u;
                jac *= omu.powi((n - a - 1) as i32);
                carry *= omu;
            }
            bary[n] = carry;
            for k in 0..d {
                point[k] = 0.0;
                for (j, b) in bary.iter().enumerate() {
                    point[k] += b * cell.verts[j][k];
                }
            }
            let v = f(&point);
            evals += 1;
            if !v.is_finite() {
                return Err(Error::Numeric(format!(
                    "integrand returned a non-finite value at {point:?}"
                )));
            }
            acc += wgt * jac * v;

            // advance multi-index
            let mut a = 0;
            loop {
                idx[a] += 1;
                if idx[a] < m {
                    break;
                }
                idx[a] = 0;
                a += 1;
                if a == n {
                    break;
                }
            }
            if a == n {
                break;
            }
        }
        value = acc * vol * nfact;
        if prev.is_finite() {
            err = (value - prev).abs();
            if err <= 1e-13 * value.abs().max(1.0) {
                break;
            }
        }
        prev = value;
    }
    Ok((value, err.min(value.abs().max(1.0)), evals))
}

// ---------------------------------------------------------------------------
// adaptive driver
// ---------------------------------------------------------------------------

const RESCUE_DEPTH: usize = 6;
const MAX_CELLS: usize = 60_000;
const MAX_EVALS: usize = 20_000_000;

#[derive(PartialEq)]
struct HeapItem {
    err: f64,
    id: usize,
}
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err
            .partial_cmp(&other.err)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(other.id.cmp(&self.id))
    }
}

pub(crate) fn integrate_cells<F: Fn(&[f64]) -> f64>(
    f: &F,
    init: Vec<Cell>,
    tol: f64,
) -> Result<QuadEstimate> {
    struct Entry {
        cell: Cell,
        vol: f64,
        value: f64,
        err: f64,
        depth: usize,
        splittable: bool,
    }

    let n = init.first().map(|c| c.ambient_dim() - 1).unwrap_or(1);
    let pair = GmPair::new(n);
    let mut entries: Vec<Entry> = Vec::new();
    let mut heap: BinaryHeap<HeapItem> = BinaryHeap::new();
    let mut evals = 0usize;
    let mut total_value = 0.0;
    let mut total_err = 0.0;

    let mut push = |cell: Cell,
                    depth: usize,
                    entries: &mut Vec<Entry>,
                    heap: &mut BinaryHeap<HeapItem>,
                    evals: &mut usize,
                    total_value: &mut f64,
                    total_err: &mut f64|
     -> Result<()> {
        let vol = cell.volume();
        if vol <= 1e-300 {
            return Ok(());
        }
        let (value, err, used, splittable) = if depth >= RESCUE_DEPTH {
            let (v, e, u) = de_cell(f, &cell, vol)?;
            (v, e, u, false)
        } else {
            let (v, e, u) = pair.apply(f, &cell, vol)?;
            (v, e, u, true)
        };
        *evals += used;
        *total_value += value;
        *total_err += err;
        let id = entries.len();
        entries.push(Entry { cell, vol, value, err, depth, splittable });
        if splittable {
            heap.push(HeapItem { err, id });
        }
        Ok(())
    };

    for cell in init {
        push(cell, 0, &mut entries, &mut heap, &mut evals, &mut total_value, &mut total_err)?;
    }

    while total_err > tol {
        if evals > MAX_EVALS || entries.len() > MAX_CELLS {
            return Err(Error::Numeric(format!(
                "quadrature budget exhausted: best estimate {total_value:.12e} with error {total_err:.3e} (tolerance {tol:.3e}, {evals} evaluations)"
            )));
        }
        let Some(top) = heap.pop() else {
            return Err(Error::Numeric(format!(
                "quadrature stalled: best estimate {total_value:.12e} with error {total_err:.3e} (tolerance {tol:.3e})"
            )));
        };
        let id = top.id;
        if !entries[id].splittable {
            continue;
        }
        entries[id].splittable = false;
        total_value -= entries[id].value;
        total_err -= entries[id].err;
        let depth = entries[id].depth;
        let vol = entries[id].vol;
        let (a, b) = entries[id].cell.bisect();
        // rescue cells that stopped contracting early
        let child_depth = if vol < 1e-12 { RESCUE_DEPTH } else { depth + 1 };
        push(a, child_depth, &mut entries, &mut heap, &mut evals, &mut total_value, &mut total_err)?;
        push(b, child_depth, &mut entries, &mut heap, &mut evals, &mut total_value, &mut total_err)?;
    }

    Ok(QuadEstimate { value: total_value, error: total_err, evals })
}

/// Integrate `f` over the unit simplex in dimension `d` (2, 3 or 4) to the
/// requested absolute tolerance.
pub fn integrate_simplex<F: Fn(&[f64]) -> f64>(f: F, d: usize, tol: f64) -> Result<QuadEstimate> {
    if !(2..=4).contains(&d) {
        return Err(Error::Unsupported(format!("simplex quadrature supports d in 2..=4, got {d}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Validation("tolerance must be positive".into()));
    }
    integrate_cells(&f, vec![full_cell(d)], tol)
}
