//! The `ell x ell` equation `B0 + B1 X + B2 X^2 = 0` left after deflation.
//!
//! Its only solution with the unimodular eigenvalues `mu_1, ..., mu_ell` is read
//! off a deflating subspace `[Z11; Z21]` of the companion pencil
//! `M = [[0, I], [-B0, -B1]]`, `N = [[I, 0], [0, B2]]` as `X = Z21 Z11^-1`.
//! Every `mu_i` is a double eigenvalue of the pencil, so the QZ eigenvalues come
//! in close pairs. One member of each pair is moved to the leading block, and
//! among all such choices the one with the best conditioned `Z11` wins.

use crate::dense::{generalized_schur, norm_inf, GeneralizedSchur, LuFactor, Matrix, C64};
use crate::poly::companion_pencil;
use crate::{QmeError, Result};

const MIN_Z11_RCOND: f64 = 1e-10;
const CLUSTER_TOLS: [f64; 4] = [1e-6, 1e-5, 1e-4, 1e-3];
const ENUMERATION_LIMIT_ELL: usize = 8;

#[derive(Debug, Clone)]
pub struct SmallQme {
    pub b0: Matrix,
    pub b1: Matrix,
    pub b2: Matrix,
    /// Expected unimodular eigenvalues of the solution, one entry per
    /// eigenvalue of `X` (repeat a value to ask for it twice).
    pub target_eigenvalues: Option<Vec<C64>>,
}

#[derive(Debug, Clone)]
pub struct SmallSolution {
    pub g11: Matrix,
    /// `||B0 + (B1 + B2 X) X||_inf`.
    pub residual: f64,
    pub rcond_z11: f64,
    /// Pencil eigenvalues placed in the leading block.
    pub selected: Vec<C64>,
    /// `||X - Q11 T11 S11^-1 Q11^-1|| / ||X||` when that formula is computable.
    pub cross_check: Option<f64>,
    pub diagnostics: Vec<String>,
}

impl SmallQme {
    pub fn new(b0: Matrix, b1: Matrix, b2: Matrix) -> Result<Self> {
        let l = b0.nrows();
        if l == 0 || [&b0, &b1, &b2].iter().any(|b| b.shape() != (l, l)) {
            return Err(QmeError::DimensionMismatch(format!(
                "small QME blocks {:?}, {:?}, {:?}",
                b0.shape(),
                b1.shape(),
                b2.shape()
            )));
        }
        Ok(Self {
            b0,
            b1,
            b2,
            target_eigenvalues: None,
        })
    }

    pub fn with_targets(mut self, targets: Vec<C64>) -> Self {
        self.target_eigenvalues = Some(targets);
        self
    }

    pub fn ell(&self) -> usize {
        self.b0.nrows()
    }

    pub fn scale(&self) -> f64 {
        norm_inf(&self.b0).max(norm_inf(&self.b1)).max(norm_inf(&self.b2))
    }

    pub fn build_pencil(&self) -> (Matrix, Matrix) {
        companion_pencil(&self.b0, &self.b1, &self.b2)
    }

    pub fn residual_g(&self, x: &Matrix) -> f64 {
        norm_inf(&(&self.b0 + (&self.b1 + &self.b2 * x) * x))
    }

    /// `||Y^2 B0 + Y B1 + B2||_inf`.
    pub fn residual_r(&self, y: &Matrix) -> f64 {
        norm_inf(&(y * (y * &self.b0 + &self.b1) + &self.b2))
    }
}

/// A group of nearby pencil eigenvalues and how many of them to select.
#[derive(Debug, Clone)]
struct Cluster {
    members: Vec<usize>,
    take: usize,
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

/// Single-linkage clusters of the finite eigenvalues.
fn single_linkage(eig: &[Option<C64>], tol: f64) -> Vec<Vec<usize>> {
    let finite: Vec<usize> = (0..eig.len()).filter(|&i| eig[i].is_some()).collect();
    let mut label: Vec<usize> = (0..eig.len()).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for (a, &i) in finite.iter().enumerate() {
        for &j in &finite[a + 1..] {
            if close(eig[i].unwrap(), eig[j].unwrap(), tol) {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                label[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of = vec![usize::MAX; eig.len()];
    for &i in &finite {
        let r = root(&mut label, i);
        if index_of[r] == usize::MAX {
            index_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of[r]].push(i);
    }
    groups
}

fn center(eig: &[Option<C64>], members: &[usize]) -> C64 {
    members.iter().map(|&i| eig[i].unwrap()).sum::<C64>() / members.len() as f64
}

/// Clusters of even size with half of each selected, or clusters nearest the
/// targets when those are given.
fn clusters_for(eig: &[Option<C64>], ell: usize, targets: Option<&[C64]>, notes: &mut Vec<String>) -> Option<Vec<Cluster>> {
    for tol in CLUSTER_TOLS {
        let groups = single_linkage(eig, tol);
        let chosen = match targets {
            None => {
                if groups.iter().any(|g| g.len() % 2 == 1) || groups.iter().map(|g| g.len() / 2).sum::<usize>() != ell {
                    continue;
                }
                groups
                    .into_iter()
                    .map(|members| Cluster {
                        take: members.len() / 2,
                        members,
                    })
                    .collect::<Vec<_>>()
            }
            Some(t) => {
                let mut take = vec![0usize; groups.len()];
                for z in t {
                    let nearest = (0..groups.len()).min_by(|&a, &b| {
                        (center(eig, &groups[a]) - z)
                            .norm()
                            .total_cmp(&(center(eig, &groups[b]) - z).norm())
                    })?;
                    take[nearest] += 1;
                }
                if groups.iter().zip(&take).any(|(g, &k)| k > g.len()) {
                    continue;
                }
                groups
                    .into_iter()
                    .zip(take)
                    .filter(|(_, k)| *k > 0)
                    .map(|(members, take)| Cluster { members, take })
                    .collect()
            }
        };
        if tol > CLUSTER_TOLS[0] {
            notes.push(format!("eigenvalue pairs only resolved at relative tolerance {tol:e}"));
        }
        return Some(chosen);
    }
    None
}

/// Pairs closest finite eigenvalues greedily and keeps the `ell` pairs nearest the unit circle.
fn greedy_pairs(eig: &[Option<C64>], ell: usize) -> Option<Vec<Cluster>> {
    let mut free: Vec<usize> = (0..eig.len()).filter(|&i| eig[i].is_some()).collect();
    let mut pairs = Vec::new();
    while free.len() >= 2 {
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..free.len() {
            for b in a + 1..free.len() {
                let d = (eig[free[a]].unwrap() - eig[free[b]].unwrap()).norm();
                if d < best.2 {
                    best = (a, b, d);
                }
            }
        }
        let (a, b, _) = best;
        let j = free.remove(b);
        let i = free.remove(a);
        pairs.push(vec![i, j]);
    }
    if pairs.len() < ell {
        return None;
    }
    let off_circle = |p: &Vec<usize>| (center(eig, p).norm() - 1.0).abs();
    pairs.sort_by(|a, b| off_circle(a).total_cmp(&off_circle(b)));
    Some(
        pairs
            .into_iter()
            .take(ell)
            .map(|members| Cluster { members, take: 1 })
            .collect(),
    )
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out: Vec<Vec<usize>> = combinations(&items[1..], k - 1)
        .into_iter()
        .map(|mut rest| {
            rest.insert(0, items[0]);
            rest
        })
        .collect();
    out.extend(combinations(&items[1..], k));
    out
}

struct Candidate {
    schur: GeneralizedSchur,
    rcond: f64,
}

fn evaluate(gs: &GeneralizedSchur, picks: &[Vec<usize>], ell: usize) -> Option<Candidate> {
    let mut mask = vec![false; gs.n()];
    for &i in picks.iter().flatten() {
        mask[i] = true;
    }
    let schur = gs.reorder(&mask).ok()?;
    let z11 = schur.z.view((0, 0), (ell, ell)).into_owned();
    let rcond = LuFactor::unchecked(&z11).ok()?.rcond();
    Some(Candidate { schur, rcond })
}

fn better(best: Option<Candidate>, cand: Option<Candidate>) -> Option<Candidate> {
    match (best, cand) {
        (Some(b), Some(c)) if c.rcond > b.rcond => Some(c),
        (None, c) => c,
        (b, _) => b,
    }
}

/// Full enumeration for small `ell`, one coordinate sweep otherwise.
fn search(gs: &GeneralizedSchur, clusters: &[Cluster], ell: usize) -> Option<Candidate> {
    let options: Vec<Vec<Vec<usize>>> = clusters.iter().map(|c| combinations(&c.members, c.take)).collect();
    if ell <= ENUMERATION_LIMIT_ELL {
        let mut best = None;
        let mut idx = vec![0usize; options.len()];
        loop {
            let picks: Vec<Vec<usize>> = idx.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect();
            best = better(best, evaluate(gs, &picks, ell));
            // Odometer increment.
            let mut d = 0;
            while d < idx.len() {
                idx[d] += 1;
                if idx[d] < options[d].len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == idx.len() {
                return best;
            }
        }
    }
    let mut picks: Vec<Vec<usize>> = options.iter().map(|o| o[0].clone()).collect();
    let mut best = evaluate(gs, &picks, ell);
    for (c, opts) in options.iter().enumerate() {
        let mut keep = picks[c].clone();
        for o in opts.iter().skip(1) {
            picks[c] = o.clone();
            let cand = evaluate(gs, &picks, ell);
            if cand.as_ref().map(|x| x.rcond) > best.as_ref().map(|x| x.rcond) {
                best = cand;
                keep = o.clone();
            }
        }
        picks[c] = keep;
    }
    best
}

/// `Q11 T11 S11^-1 Q11^-1`, the alternative form of the solution.
fn schur_formula(gs: &GeneralizedSchur, ell: usize) -> Option<Matrix> {
    let q11 = gs.q.view((0, 0), (ell, ell)).into_owned();
    let t11 = gs.t.view((0, 0), (ell, ell)).into_owned();
    let s11 = gs.s.view((0, 0), (ell, ell)).into_owned();
    let ls = LuFactor::new(&s11).ok()?;
    let lq = LuFactor::new(&q11).ok()?;
    let t_sinv = ls.solve_right(&t11);
    Some(lq.solve_right(&(q11 * t_sinv)))
}

pub fn solve_small(q: &SmallQme) -> Result<SmallSolution> {
    let ell = q.ell();
    let (m, n) = q.build_pencil();
    let gs = generalized_schur(&m, &n)?;
    let eig = gs.eigenvalues();
    let mut diagnostics = Vec::new();

    let clusters = match clusters_for(&eig, ell, q.target_eigenvalues.as_deref(), &mut diagnostics) {
        Some(c) => c,
        None => {
            diagnostics.push("pencil spectrum is not a set of double eigenvalues; pairing greedily".into());
            greedy_pairs(&eig, ell).ok_or(QmeError::SelectionFailure { best_rcond: 0.0 })?
        }
    };
    let Some(best) = search(&gs, &clusters, ell) else {
        return Err(QmeError::SelectionFailure { best_rcond: 0.0 });
    };
    if best.rcond < MIN_Z11_RCOND {
        return Err(QmeError::SelectionFailure { best_rcond: best.rcond });
    }

    let z = &best.schur.z;
    let z11 = z.view((0, 0), (ell, ell)).into_owned();
    let z21 = z.view((ell, 0), (ell, ell)).into_owned();
    let g11 = LuFactor::unchecked(&z11)?.solve_right(&z21);
    let residual = q.residual_g(&g11);
    let selected: Vec<C64> = (0..ell).filter_map(|i| best.schur.eigenvalue(i)).collect();

    let scale = q.scale().max(f64::MIN_POSITIVE);
    if residual > 1e-8 * scale {
        diagnostics.push(format!("small QME residual {residual:.3e} exceeds 1e-8 * {scale:.3e}"));
    }
    if let Some(z) = selected.iter().find(|z| (z.norm() - 1.0).abs() > 1e-6) {
        diagnostics.push(format!("selected eigenvalue {z} is not unimodular"));
    }
    let cross_check = schur_formula(&best.schur, ell)
        .map(|alt| norm_inf(&(&alt - &g11)) / norm_inf(&g11).max(f64::MIN_POSITIVE));

    Ok(SmallSolution {
        g11,
        residual,
        rcond_z11: best.rcond,
        selected,
        cross_check,
        diagnostics,
    })
}

/// `R11 = -B2 (B2 G11 + B1)^-1`.
pub fn recover_rbar11(q: &SmallQme, g11: &Matrix) -> Result<Matrix> {
    let lu = LuFactor::new(&(&q.b2 * g11 + &q.b1))?;
    Ok(-lu.solve_right(&q.b2))
}
