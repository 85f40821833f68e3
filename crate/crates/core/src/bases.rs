//! Stable/unstable splittings of the limit matrices and Kato transport of
//! initializing bases along frequency paths.

use num_complex::Complex64;

use crate::error::{EvansError, Result};
use crate::formulations::Frequency;
use crate::linalg::{self, c, CMatrix, InvariantSubspace};

/// Smallest admissible `|Re mu|` for a sign-based splitting.
pub const GAP_TOL: f64 = 1e-10;

/// Projector jump that triggers bisection of a path step.
pub const JUMP_TOL: f64 = 0.5;

/// Maximum number of nested bisections of one path step.
pub const MAX_BISECTIONS: usize = 24;

/// End of the line at which a limit matrix lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn is_plus(self) -> bool {
        self == Side::Plus
    }
}

/// Stable and unstable invariant subspaces of a limit matrix.
#[derive(Debug, Clone)]
pub struct SubspaceSplit {
    pub k_stable: usize,
    pub k_unstable: usize,
    pub stable: InvariantSubspace,
    pub unstable: InvariantSubspace,
    /// `min |Re mu|` over the spectrum.
    pub gap: f64,
}

impl SubspaceSplit {
    pub fn stable_basis(&self) -> &CMatrix {
        &self.stable.basis
    }

    pub fn unstable_basis(&self) -> &CMatrix {
        &self.unstable.basis
    }

    /// The subspace that decays into the interior from the given end:
    /// stable at `+inf`, unstable at `-inf`.
    pub fn decaying(&self, side: Side) -> &InvariantSubspace {
        match side {
            Side::Plus => &self.stable,
            Side::Minus => &self.unstable,
        }
    }
}

/// Splits the spectrum by the sign of the real part.
pub fn split(a: &CMatrix) -> Result<SubspaceSplit> {
    let eigs = linalg::eigenvalues(a)?;
    let gap = eigs.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if !eigs.is_empty() && !(gap >= GAP_TOL * scale) {
        return Err(EvansError::SplittingFailure { gap });
    }
    let stable = linalg::invariant_subspace(a, |e| e.iter().map(|z| z.re < 0.0).collect())?;
    let unstable = linalg::invariant_subspace(a, |e| e.iter().map(|z| z.re > 0.0).collect())?;
    Ok(SubspaceSplit {
        k_stable: stable.dim(),
        k_unstable: unstable.dim(),
        stable,
        unstable,
        gap: if eigs.is_empty() { f64::INFINITY } else { gap },
    })
}

/// The order-two glancing model `[[0, 1], [delta, 0]]` with
/// `delta = lambda_hat - i tau(xi_hat) + r`.
pub fn glancing_model(r: f64, xi_hat: f64, lambda_hat: Complex64, tau: &dyn Fn(f64) -> f64) -> CMatrix {
    let delta = glancing_delta(r, xi_hat, lambda_hat, tau);
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), delta, c(0.0)])
}

pub fn glancing_delta(r: f64, xi_hat: f64, lambda_hat: Complex64, tau: &dyn Fn(f64) -> f64) -> Complex64 {
    lambda_hat - linalg::I * tau(xi_hat) + r
}

/// Indices of `k` columns of `p` chosen greedily by Gram–Schmidt pivoting.
pub fn pivot_columns(p: &CMatrix, k: usize) -> Vec<usize> {
    let n = p.ncols();
    let mut work = p.clone();
    let mut chosen = Vec::with_capacity(k);
    for _ in 0..k.min(n) {
        let mut best: (usize, f64) = (0, -1.0);
        for j in 0..n {
            if chosen.contains(&j) {
                continue;
            }
            let nrm = work.column(j).norm();
            if nrm > best.1 + 1e-12 * best.1.abs() {
                best = (j, nrm);
            }
        }
        let (j, nrm) = best;
        chosen.push(j);
        if nrm > 0.0 {
            let q = work.column(j) / c(nrm);
            for l in 0..n {
                let proj = q.dotc(&work.column(l));
                let upd = work.column(l) - &q * proj;
                work.set_column(l, &upd);
            }
        }
    }
    chosen
}

/// Identity columns selected by `cols`, as an `n x k` matrix.
pub fn selector(n: usize, cols: &[usize]) -> CMatrix {
    let mut e = CMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        e[(i, j)] = c(1.0);
    }
    e
}

/// `P R_ref`, with `R_ref` defaulting to pivoted identity columns of `P`.
pub fn projected_basis(projector: &CMatrix, k: usize, reference: Option<&CMatrix>) -> Result<CMatrix> {
    let r = match reference {
        Some(r) => projector * r,
        None => projector * selector(projector.nrows(), &pivot_columns(projector, k)),
    };
    if r.ncols() != k {
        return Err(EvansError::InvalidInput(format!(
            "reference basis has {} columns, subspace has dimension {k}",
            r.ncols()
        )));
    }
    if k > 0 && linalg::smallest_singular_value(&r) < 1e-10 * linalg::norm2(&r).max(1e-300) {
        return Err(EvansError::Linalg("projected reference basis is rank deficient".into()));
    }
    Ok(r)
}

/// Which group of eigenvalues a Kato basis follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Stable group (`Re mu < 0` at the start), used at `+inf`.
    Stable,
    /// Unstable group (`Re mu > 0` at the start), used at `-inf`.
    Unstable,
}

impl Flavor {
    pub fn for_side(side: Side) -> Self {
        match side {
            Side::Plus => Flavor::Stable,
            Side::Minus => Flavor::Unstable,
        }
    }
}

/// Eigenvalue group tracked continuously along a path.
#[derive(Debug, Clone)]
pub struct TrackedGroup {
    pub subspace: InvariantSubspace,
    /// All eigenvalues with the group flags.
    pub eigs: Vec<Complex64>,
    pub flags: Vec<bool>,
}

impl TrackedGroup {
    /// Sign-based group at a starting point.
    pub fn start(a: &CMatrix, flavor: Flavor) -> Result<Self> {
        let s = split(a)?;
        let sub = match flavor {
            Flavor::Stable => s.stable,
            Flavor::Unstable => s.unstable,
        };
        let mut eigs = sub.selected.clone();
        let mut flags = vec![true; eigs.len()];
        eigs.extend(sub.rest.iter().copied());
        flags.resize(eigs.len(), false);
        Ok(Self { subspace: sub, eigs, flags })
    }

    /// Continues the group to a nearby matrix; `None` when the assignment is
    /// ambiguous at this step size.
    pub fn advance(&self, a: &CMatrix) -> Result<Option<Self>> {
        let next = linalg::eigenvalues(a)?;
        let perm = match_eigenvalues(&self.eigs, &next);
        let mut flags = vec![false; next.len()];
        let mut displacement = 0.0f64;
        for (i, &j) in perm.iter().enumerate() {
            flags[j] = self.flags[i];
            displacement = displacement.max((next[j] - self.eigs[i]).norm());
        }
        let mut sep = f64::INFINITY;
        for i in 0..next.len() {
            for j in 0..next.len() {
                if flags[i] && !flags[j] {
                    sep = sep.min((next[i] - next[j]).norm());
                }
            }
        }
        if sep <= 2.0 * displacement || sep < 1e-12 {
            return Ok(None);
        }
        let f2 = flags.clone();
        let sub = linalg::invariant_subspace(a, move |e| {
            // Schur diagonal order differs from `next`; assign by proximity.
            let p = match_eigenvalues(&next, e);
            let mut out = vec![false; e.len()];
            for (i, &j) in p.iter().enumerate() {
                out[j] = f2[i];
            }
            out
        })?;
        let mut eigs = sub.selected.clone();
        let mut fl = vec![true; eigs.len()];
        eigs.extend(sub.rest.iter().copied());
        fl.resize(eigs.len(), false);
        Ok(Some(Self { subspace: sub, eigs, flags: fl }))
    }

    pub fn trace(&self) -> Complex64 {
        self.subspace.trace()
    }
}

/// Permutation `perm` with `next[perm[i]]` closest to `prev[i]` (minimal total
/// displacement).
pub fn match_eigenvalues(prev: &[Complex64], next: &[Complex64]) -> Vec<usize> {
    let n = prev.len();
    assert_eq!(n, next.len());
    if n > 8 {
        let mut used = vec![false; n];
        return prev
            .iter()
            .map(|p| {
                let j = (0..n)
                    .filter(|&j| !used[j])
                    .min_by(|&a, &b| (next[a] - p).norm().total_cmp(&(next[b] - p).norm()))
                    .unwrap();
                used[j] = true;
                j
            })
            .collect();
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let cost = |p: &[usize]| -> f64 { p.iter().enumerate().map(|(i, &j)| (next[j] - prev[i]).norm()).sum() };
    let mut best_cost = cost(&perm);
    // Heap's algorithm
    let mut cnt = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if cnt[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(cnt[i], i);
            }
            let cst = cost(&perm);
            if cst < best_cost {
                best_cost = cst;
                best.copy_from_slice(&perm);
            }
            cnt[i] += 1;
            i = 0;
        } else {
            cnt[i] = 0;
            i += 1;
        }
    }
    best
}

/// Kato-transported bases along a frequency path.
#[derive(Debug, Clone)]
pub struct KatoBasis {
    pub path: Vec<Frequency>,
    pub r: Vec<CMatrix>,
    pub p: Vec<CMatrix>,
    /// Trace of the limit matrix restricted to the tracked group.
    pub traces: Vec<Complex64>,
    pub flavor: Flavor,
    /// Number of intermediate samples inserted by bisection.
    pub inserted: usize,
    /// Final tracked group, for continuing the transport.
    pub last: TrackedGroup,
}

/// One second-order Kato step `R_1 = (I + D^2 / 2) P_1 R_0`, `D = P_1 - P_0`.
pub fn kato_step(p0: &CMatrix, p1: &CMatrix, r0: &CMatrix) -> CMatrix {
    if p0 == p1 {
        return r0.clone();
    }
    let d = p1 - p0;
    let pr = p1 * r0;
    let d2pr = &d * (&d * &pr);
    pr + d2pr * c(0.5)
}

fn lerp(a: &Frequency, b: &Frequency, t: f64) -> Frequency {
    Frequency {
        lambda: a.lambda + (b.lambda - a.lambda) * t,
        xi: a.xi.iter().zip(&b.xi).map(|(x, y)| x + (y - x) * t).collect(),
    }
}

/// State of a transport: the tracked group and the current basis.
#[derive(Debug, Clone)]
pub struct KatoState {
    pub group: TrackedGroup,
    pub r: CMatrix,
}

impl KatoState {
    /// Starting state at a point with a sign-based splitting. The basis is
    /// `P R_ref` with pivoted identity columns unless a reference is given.
    pub fn start(a: &CMatrix, flavor: Flavor, reference: Option<&CMatrix>) -> Result<Self> {
        let group = TrackedGroup::start(a, flavor)?;
        let r = projected_basis(&group.subspace.projector, group.subspace.dim(), reference)?;
        Ok(Self { group, r })
    }
}

/// Transports a state from frequency `a` to frequency `b` along the segment,
/// bisecting until projector jumps are small and the group is unambiguous.
pub fn kato_segment<F>(matrix_at: &F, state: &KatoState, a: &Frequency, b: &Frequency) -> Result<(KatoState, usize)>
where
    F: Fn(&Frequency) -> Result<CMatrix>,
{
    let mut inserted = 0;
    let out = segment_rec(matrix_at, state, a, b, 0, &mut inserted)?;
    Ok((out, inserted))
}

fn segment_rec<F>(
    matrix_at: &F,
    state: &KatoState,
    a: &Frequency,
    b: &Frequency,
    depth: usize,
    inserted: &mut usize,
) -> Result<KatoState>
where
    F: Fn(&Frequency) -> Result<CMatrix>,
{
    let attempt = matrix_at(b).and_then(|m| state.group.advance(&m));
    let fail_jump = match attempt {
        Ok(Some(group)) => {
            let jump = linalg::norm2(&(&group.subspace.projector - &state.group.subspace.projector));
            if jump < JUMP_TOL {
                let r = kato_step(&state.group.subspace.projector, &group.subspace.projector, &state.r);
                return Ok(KatoState { group, r });
            }
            jump
        }
        Ok(None) => f64::NAN,
        Err(_) => f64::INFINITY,
    };
    if depth >= MAX_BISECTIONS {
        return Err(EvansError::Discontinuity { at: b.lambda, jump: fail_jump });
    }
    let mid = lerp(a, b, 0.5);
    *inserted += 1;
    let s_mid = segment_rec(matrix_at, state, a, &mid, depth + 1, inserted)?;
    segment_rec(matrix_at, &s_mid, &mid, b, depth + 1, inserted)
}

/// Kato transport of the stable (or unstable) group's basis along `path`,
/// reporting one basis per sample.
pub fn kato_continue<F>(
    matrix_at: F,
    path: &[Frequency],
    flavor: Flavor,
    reference: Option<&CMatrix>,
) -> Result<KatoBasis>
where
    F: Fn(&Frequency) -> Result<CMatrix>,
{
    if path.is_empty() {
        return Err(EvansError::InvalidInput("empty Kato path".into()));
    }
    let a0 = matrix_at(&path[0])?;
    let mut state = KatoState::start(&a0, flavor, reference)?;
    let mut out = KatoBasis {
        path: path.to_vec(),
        r: vec![state.r.clone()],
        p: vec![state.group.subspace.projector.clone()],
        traces: vec![state.group.trace()],
        flavor,
        inserted: 0,
        last: state.group.clone(),
    };
    for w in path.windows(2) {
        let (next, ins) = kato_segment(&matrix_at, &state, &w[0], &w[1])?;
        state = next;
        out.inserted += ins;
        out.r.push(state.r.clone());
        out.p.push(state.group.subspace.projector.clone());
        out.traces.push(state.group.trace());
    }
    out.last = state.group;
    Ok(out)
}

/// Dumps the tracked eigenvalues along a transport as columnar text
/// (`Re lambda, Im lambda, Re mu_1, Im mu_1, ...`, group members first).
pub fn dump_path_eigenvalues<F>(matrix_at: F, path: &[Frequency], flavor: Flavor) -> Result<String>
where
    F: Fn(&Frequency) -> Result<CMatrix>,
{
    use std::fmt::Write as _;
    let a0 = matrix_at(&path[0])?;
    let mut state = KatoState::start(&a0, flavor, None)?;
    let mut s = String::new();
    let row = |f: &Frequency, g: &TrackedGroup, s: &mut String| {
        let _ = write!(s, "{:.12e} {:.12e}", f.lambda.re, f.lambda.im);
        for z in &g.eigs {
            let _ = write!(s, " {:.12e} {:.12e}", z.re, z.im);
        }
        s.push('\n');
    };
    row(&path[0], &state.group, &mut s);
    for w in path.windows(2) {
        state = kato_segment(&matrix_at, &state, &w[0], &w[1])?.0;
        row(&w[1], &state.group, &mut s);
    }
    Ok(s)
}
