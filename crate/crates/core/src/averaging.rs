//! Følner averages, Reynolds projectors, mean-ergodic limits and the
//! contraction of orbitopes under averaging.
//!
//! Averages are taken in the canonical window order with pairwise (tree)
//! summation, so `F_n(x)` is bit-identical whether computed directly or as
//! part of a trace over `n`.

use serde::Serialize;

use crate::actions::{Action, LinearAction};
use crate::error::{Error, Result};
use crate::groups::{Element, FolnerFamily};
use crate::linalg::{self, Matrix, PairwiseSum};

#[derive(Debug, Clone, Serialize)]
pub struct AverageReport {
    pub n: usize,
    pub window_len: usize,
    pub value: Vec<f64>,
    /// `‖F_n(x) − F_{n−1}(x)‖₂`, with `F_{−1}(x) := x`.
    pub residual: f64,
    /// `max_g ‖g·F_n(x) − F_n(x)‖∞` over the group's probe elements.
    pub invariance_defect: f64,
}

/// Largest sup-norm change of `v` under the probe elements.
pub fn invariance_defect<A: Action + ?Sized>(action: &A, v: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for g in action.group().probes() {
        worst = worst.max(linalg::dist_inf(&action.apply(&g, v)?, v));
    }
    Ok(worst)
}

fn check_family<A: Action + ?Sized>(action: &A, family: &FolnerFamily) -> Result<()> {
    if family.group() != action.group() {
        return Err(Error::InvalidInput(format!(
            "window family of `{}` used with an action of `{}`",
            family.group(),
            action.group()
        )));
    }
    Ok(())
}

/// `F_n(x) = |A_n|⁻¹ Σ_{φ ∈ A_n} φ·x`.
pub fn folner_average<A: Action + ?Sized>(action: &A, x: &[f64], family: &FolnerFamily, n: usize) -> Result<AverageReport> {
    check_family(action, family)?;
    if x.len() != action.dim() {
        return Err(Error::DimensionMismatch {
            expected: action.dim(),
            got: x.len(),
        });
    }
    let finite = action.group().is_finite();
    let prev_len = if finite || n == 0 { 0 } else { family.len(n - 1) };
    let mut acc = PairwiseSum::new(x.len());
    let mut prev: Option<Vec<f64>> = None;
    let mut err = None;
    family.visit_window(n, |g| {
        if err.is_some() {
            return;
        }
        if acc.count() == prev_len && prev_len > 0 && prev.is_none() {
            prev = Some(acc.mean());
        }
        match action.apply(g, x) {
            Ok(v) => acc.push(v),
            Err(e) => err = Some(e),
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    if acc.count() == 0 {
        return Err(Error::EmptyWindow(n));
    }
    let value = acc.mean();
    let prev = match prev {
        Some(p) => p,
        None if finite && n > 0 => value.clone(),
        None => x.to_vec(),
    };
    Ok(AverageReport {
        n,
        window_len: acc.count(),
        residual: linalg::dist2(&value, &prev),
        invariance_defect: invariance_defect(action, &value)?,
        value,
    })
}

/// Full-group average of `x` for a finite group.
pub fn reynolds_apply<A: Action + ?Sized>(action: &A, x: &[f64]) -> Result<Vec<f64>> {
    let group = action.group();
    if !group.is_finite() {
        return Err(Error::NotEnumerable(group.to_string()));
    }
    Ok(folner_average(action, x, &group.family(), 0)?.value)
}

/// `R = |G|⁻¹ Σ_g ρ(g)`, checked idempotent (and symmetric for orthogonal actions).
pub fn reynolds_projector(action: &LinearAction) -> Result<Matrix> {
    let group = action.group();
    let els = group.elements()?;
    let d = action.dim();
    let mut acc = PairwiseSum::new(d * d);
    for g in els {
        acc.push(action.matrix(g)?.data().to_vec());
    }
    let r = Matrix::from_row_major(d, d, acc.mean());
    let idem = r.mul(&r).max_abs_diff(&r);
    if idem > 1e-10 * r.max_abs().max(1.0) {
        return Err(Error::NumericBreakdown(format!("Reynolds table is not idempotent ({idem:e})")));
    }
    if action.is_orthogonal() && !r.is_symmetric(1e-10) {
        return Err(Error::NumericBreakdown("Reynolds table of an orthogonal action is not symmetric".into()));
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub residual: f64,
    pub invariance_defect: f64,
    /// `‖F_n(x) − x̄‖₂` when a reference limit is known, else the generic
    /// Følner bound `2·max_g(1 − ratio(n, g))·‖x‖₂`.
    pub bound: f64,
}

/// `F_0(x), ..., F_{n_max}(x)` computed incrementally over window increments.
pub fn averaging_trace<A: Action + ?Sized>(
    action: &A,
    x: &[f64],
    family: &FolnerFamily,
    n_max: usize,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<TraceRow>)> {
    check_family(action, family)?;
    if x.len() != action.dim() {
        return Err(Error::DimensionMismatch {
            expected: action.dim(),
            got: x.len(),
        });
    }
    let finite = action.group().is_finite();
    let last = if finite { 0 } else { n_max };
    let probes = action.group().probes();
    let xnorm = linalg::norm2(x);
    let mut acc = PairwiseSum::new(x.len());
    let mut prev = x.to_vec();
    let mut rows = Vec::with_capacity(last + 1);
    for k in 0..=last {
        let mut err = None;
        family.visit_increment(k, |g| {
            if err.is_none() {
                match action.apply(g, x) {
                    Ok(v) => acc.push(v),
                    Err(e) => err = Some(e),
                }
            }
        })?;
        if let Some(e) = err {
            return Err(e);
        }
        let value = acc.mean();
        let bound = match reference {
            Some(r) => linalg::dist2(&value, r),
            None => {
                let mut worst = 0.0_f64;
                for g in &probes {
                    let ratio = match family.folner_ratio_closed_form(k, g) {
                        Some(r) => r,
                        None => family.folner_ratio(k, g)?,
                    };
                    worst = worst.max(1.0 - ratio);
                }
                2.0 * worst * xnorm
            }
        };
        rows.push(TraceRow {
            n: k,
            residual: linalg::dist2(&value, &prev),
            invariance_defect: invariance_defect(action, &value)?,
            bound,
        });
        prev = value;
    }
    Ok((prev, rows))
}

/// How the limit of an ergodic average was identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitSource {
    /// Reynolds projector of a finite group.
    Reynolds,
    /// Orthogonal projection onto the common fixed space of the probe generators.
    FixedSpaceProjection,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErgodicReport {
    pub limit: Vec<f64>,
    pub source: LimitSource,
    /// First window index with `‖F_n(x) − x̄‖ ≤ tol`.
    pub converged_at: usize,
    pub trace: Vec<TraceRow>,
}

/// Orthogonal projection of `x` onto `{v : g·v = v for all probes g}`.
pub fn fixed_space_projection(action: &LinearAction, x: &[f64]) -> Result<Vec<f64>> {
    let d = action.dim();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for g in action.group().probes() {
        let m = action.matrix(&g)?.sub(&Matrix::identity(d));
        rows.extend(m.to_rows());
    }
    let basis = if rows.is_empty() {
        (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect()
    } else {
        linalg::orthonormalize(&linalg::nullspace(&Matrix::from_rows(&rows), 1e-10), 1e-9)
    };
    let mut out = vec![0.0; d];
    for b in &basis {
        linalg::axpy(linalg::dot(b, x), b, &mut out);
    }
    Ok(out)
}

/// Mean-ergodic limit `x̄` of `F_n(x)` for an orthogonal action.
pub fn ergodic_limit(
    action: &LinearAction,
    family: &FolnerFamily,
    x: &[f64],
    tol: f64,
    n_max: usize,
) -> Result<ErgodicReport> {
    if !action.is_orthogonal() {
        return Err(Error::NotOrthogonal);
    }
    let (limit, source) = if action.group().is_finite() {
        let r = reynolds_projector(action)?;
        (r.mul_vec(x), LimitSource::Reynolds)
    } else {
        (fixed_space_projection(action, x)?, LimitSource::FixedSpaceProjection)
    };
    let (_, trace) = averaging_trace(action, x, family, n_max, Some(&limit))?;
    match trace.iter().find(|r| r.bound <= tol) {
        Some(row) => Ok(ErgodicReport {
            limit,
            source,
            converged_at: row.n,
            trace,
        }),
        None => Err(Error::NotConverged {
            n_max,
            distance: trace.last().map_or(f64::NAN, |r| r.bound),
        }),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateCheck {
    /// Convex weights on the sampled orbit points.
    pub weights: Vec<(usize, f64)>,
    /// `‖F_n(z − x0)‖₂`.
    pub measured: f64,
    /// `max_i |A_n △ A_n φ_i| / |A_n| · ‖x0‖₂` over the generators `φ_i` in use.
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub n: usize,
    /// `max ‖F_n(z − z')‖₂` over the sample grid.
    pub width: f64,
    /// Orbit points used, as the elements that produced them.
    pub generators: Vec<Element>,
    pub checks: Vec<CertificateCheck>,
    pub certificate_holds: bool,
}

const MAX_CONTRACTION_POINTS: usize = 24;

/// Width of `F_n(Π(x0))` on a sample grid, with the translate certificate.
///
/// Orbit points come from the whole group (finite) or from window
/// `sample_window` (windowed groups). The grid holds every orbit point, every
/// pairwise midpoint and the barycenter.
pub fn contraction_width(
    action: &LinearAction,
    x0: &[f64],
    family: &FolnerFamily,
    n: usize,
    sample_window: usize,
) -> Result<ContractionReport> {
    if !action.is_orthogonal() {
        return Err(Error::NotOrthogonal);
    }
    check_family(action, family)?;
    let group = action.group();
    let sample: Vec<Element> = if group.is_finite() {
        group.elements()?.to_vec()
    } else {
        family.window(sample_window)?
    };
    // distinct orbit points with the element that produced each
    let mut gens: Vec<Element> = Vec::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    for g in sample {
        let v = action.apply(&g, x0)?;
        if points.iter().all(|p| linalg::dist2(p, &v) > 1e-9) {
            points.push(v);
            gens.push(g);
            if points.len() == MAX_CONTRACTION_POINTS {
                break;
            }
        }
    }
    let averaged: Vec<Vec<f64>> = points
        .iter()
        .map(|p| folner_average(action, p, family, n).map(|r| r.value))
        .collect::<Result<_>>()?;
    let base = folner_average(action, x0, family, n)?.value;
    let x0norm = linalg::norm2(x0);
    let defects: Vec<f64> = gens
        .iter()
        .map(|g| family.right_translate_defect(n, g))
        .collect::<Result<_>>()?;

    let k = points.len();
    let mut grid: Vec<Vec<(usize, f64)>> = (0..k).map(|i| vec![(i, 1.0)]).collect();
    for i in 0..k {
        for j in (i + 1)..k {
            grid.push(vec![(i, 0.5), (j, 0.5)]);
        }
    }
    if k > 2 {
        grid.push((0..k).map(|i| (i, 1.0 / k as f64)).collect());
    }
    let images: Vec<Vec<f64>> = grid
        .iter()
        .map(|w| {
            let mut v = vec![0.0; x0.len()];
            for &(i, c) in w {
                linalg::axpy(c, &averaged[i], &mut v);
            }
            v
        })
        .collect();
    let mut width = 0.0_f64;
    for a in 0..images.len() {
        for b in (a + 1)..images.len() {
            width = width.max(linalg::dist2(&images[a], &images[b]));
        }
    }
    let mut checks = Vec::with_capacity(grid.len());
    let mut holds = true;
    for (w, img) in grid.iter().zip(&images) {
        let measured = linalg::dist2(img, &base);
        let bound = w.iter().map(|&(i, _)| defects[i]).fold(0.0, f64::max) * x0norm;
        if measured > bound + 1e-12 * (1.0 + x0norm) {
            holds = false;
        }
        checks.push(CertificateCheck {
            weights: w.clone(),
            measured,
            bound,
        });
    }
    Ok(ContractionReport {
        n,
        width,
        generators: gens,
        checks,
        certificate_holds: holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::PointAction;
    use crate::groups::Group;

    fn c3() -> LinearAction {
        LinearAction::permutation(Group::cyclic(3).unwrap()).unwrap()
    }

    #[test]
    fn cyclic_average_is_uniform() {
        let a = c3();
        let r = folner_average(&a, &[1.0, 0.0, 0.0], &a.group().family(), 1).unwrap();
        for v in &r.value {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(r.invariance_defect <= 1e-12);
    }

    #[test]
    fn invariant_target_is_fixed() {
        let a = c3();
        let r = folner_average(&a, &[2.0, 2.0, 2.0], &a.group().family(), 3).unwrap();
        assert_eq!(r.value, vec![2.0, 2.0, 2.0]);
        assert_eq!(r.invariance_defect, 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn sample_average_in_disguise() {
        // tuples of five digits; digit d stands for the value 2(d+1)
        let pa = PointAction::on_tuples(Group::symmetric(5).unwrap(), 5).unwrap();
        let x: Vec<f64> = (0..pa.carrier())
            .map(|i| 2.0 * (crate::actions::tuple_digits(i, 5, 5)[0] + 1) as f64)
            .collect();
        let r = folner_average(&pa, &x, &pa.group().family(), 1).unwrap();
        let at = crate::actions::tuple_index(&[0, 1, 2, 3, 4], 5);
        assert!((r.value[at] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn reynolds_tables() {
        let swap = LinearAction::permutation(Group::cyclic(2).unwrap()).unwrap();
        assert_eq!(
            reynolds_projector(&swap).unwrap(),
            Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]])
        );
        let r3 = reynolds_projector(&c3()).unwrap();
        assert!(r3.data().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        let triv = LinearAction::permutation(Group::trivial()).unwrap();
        assert_eq!(reynolds_projector(&triv).unwrap(), Matrix::identity(1));
    }

    #[test]
    fn rotation_average_obeys_geometric_bound() {
        let a = LinearAction::rotation(1.0).unwrap();
        let f = a.group().family();
        let (_, rows) = averaging_trace(&a, &[1.0, 0.0], &f, 200, Some(&[0.0, 0.0])).unwrap();
        let gap = 2.0 * (0.5f64).sin();
        for r in rows {
            assert!(r.bound <= 2.0 / ((r.n + 1) as f64 * gap) + 1e-12);
        }
    }

    #[test]
    fn trace_matches_direct_averages_bitwise() {
        let a = LinearAction::rotation(0.3).unwrap();
        let f = a.group().family();
        let (last, _) = averaging_trace(&a, &[1.0, 2.0], &f, 37, None).unwrap();
        let direct = folner_average(&a, &[1.0, 2.0], &f, 37).unwrap();
        assert_eq!(last, direct.value);
    }

    #[test]
    fn ergodic_limits() {
        let a = c3();
        let rep = ergodic_limit(&a, &a.group().family(), &[3.0, 0.0, 0.0], 1e-12, 5).unwrap();
        assert_eq!(rep.limit, vec![1.0, 1.0, 1.0]);
        let rot = LinearAction::rotation(1.0).unwrap();
        let rep = ergodic_limit(&rot, &rot.group().family(), &[1.0, 0.0], 1e-3, 5000).unwrap();
        assert_eq!(rep.limit, vec![0.0, 0.0]);
        assert!(rep.converged_at <= 3000);
        assert!(matches!(
            ergodic_limit(&rot, &rot.group().family(), &[1.0, 0.0], 1e-6, 10),
            Err(Error::NotConverged { .. })
        ));
        let g = Group::cyclic(2).unwrap();
        let skew = LinearAction::from_tables(
            g,
            vec![Matrix::identity(2), Matrix::from_rows(&[vec![0.0, 2.0], vec![0.5, 0.0]])],
        )
        .unwrap();
        assert!(matches!(
            ergodic_limit(&skew, &skew.group().family(), &[1.0, 0.0], 1e-6, 10),
            Err(Error::NotOrthogonal)
        ));
    }

    #[test]
    fn invariant_input_has_zero_trace() {
        let a = c3();
        let rep = ergodic_limit(&a, &a.group().family(), &[1.0, 1.0, 1.0], 1e-12, 3).unwrap();
        assert!(rep.trace.iter().all(|r| r.bound == 0.0));
    }

    #[test]
    fn contraction_of_finite_and_rotation_orbitopes() {
        let a = LinearAction::permutation(Group::symmetric(3).unwrap()).unwrap();
        let r = contraction_width(&a, &[2.0, 1.0, 0.0], &a.group().family(), 0, 0).unwrap();
        assert!(r.width < 1e-12);
        assert!(r.certificate_holds);

        let rot = LinearAction::rotation(1.0).unwrap();
        let f = rot.group().family();
        for n in [1, 10, 100] {
            let r = contraction_width(&rot, &[1.0, 0.0], &f, n, 1).unwrap();
            assert!(r.certificate_holds);
            let mid = r.checks.iter().find(|c| c.weights.len() == 2).unwrap();
            assert!((mid.bound - 2.0 / (n + 1) as f64).abs() < 1e-12);
            assert!(mid.measured <= mid.bound);
        }
    }
}
