use anyhow::{bail, Context as _, Result};
use folner_core::averaging::{averaging_trace, ergodic_limit, TraceRow};
use folner_core::cocycles::{equivariant_kernel, theta_average, AVERAGE_TOL};
use folner_core::couplings::{
    is_extreme_invariant_coupling, solve_mk, solve_mk_invariant, symmetrize_coupling, CostMatrix, DUALITY_TOL,
    MARGINAL_TOL,
};
use folner_core::decisions::{invariantize_test, solve_maximin_test, TestingProblem};
use folner_core::embeddings::{ergodic_decomposition, mmd, symmetrize_kernel, KernelGram};
use folner_core::orbitopes::{InvariantElement, OrbitopeHandle};
use folner_core::verify::{self, EQUIVARIANCE_TOL, KERNEL_IDENTITY_TOL, TRANSPORT_GAP_TOL};
use folner_core::{Group, Matrix};
use serde::Deserialize;
use serde_json::json;

use crate::input::{ActionSpec, CarrierSpec, CocycleSpec, Input, TableRef, VectorRef};
use crate::report::{num, Outcome, Table};
use crate::Options;

const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;
const DEFAULT_ERGODIC_TOL: f64 = 1e-6;
const DEFAULT_NMAX: usize = 10_000;

fn group(opts: &Options) -> Result<Group> {
    let spec = opts.group.as_deref().context("this command needs --group")?;
    Ok(Group::parse(spec)?)
}

fn trace_table(rows: &[TraceRow]) -> Table {
    let mut t = Table::new(["n", "residual", "invariance_defect", "bound"]);
    for r in rows {
        t.push(vec![r.n.to_string(), num(r.residual), num(r.invariance_defect), num(r.bound)]);
    }
    t
}

fn matrix_table(m: &Matrix) -> Table {
    Table::numeric(&m.to_rows())
}

fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub fn group_ratio(opts: &Options, n: Option<usize>, phi: &str) -> Result<Outcome> {
    let g = group(opts)?;
    let family = g.family();
    let phi = g.parse_element(phi)?;
    let n = n.or(opts.nmax).context("group ratio needs --n or --nmax")?;
    let ratio = family.folner_ratio(n, &phi)?;
    let mut table = Table::new(["n", "window_len", "ratio"]);
    for k in 0..=opts.nmax.unwrap_or(n) {
        table.push(vec![k.to_string(), family.len(k).to_string(), num(family.folner_ratio(k, &phi)?)]);
    }
    let result = json!({
        "n": n,
        "phi": phi.to_string(),
        "window_len": family.len(n),
        "ratio": ratio,
    });
    Ok(Outcome::new(&result)?.with_table(table).with_text(format!("{ratio}\n")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct VectorDoc {
    #[serde(default)]
    action: ActionSpec,
    x: VectorRef,
}

pub fn average(opts: &Options, n: Option<usize>) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: VectorDoc = input.parse()?;
    let action = doc.action.build(&g, &input)?;
    let x = input.vector(&doc.x)?;
    let family = g.family();
    let n = n.or(opts.nmax).context("average needs --n or --nmax")?;
    let (value, trace) = averaging_trace(&action, &x, &family, n, None)?;
    let result = json!({
        "n": n,
        "window_len": family.len(n),
        "value": value,
        "trace": trace,
    });
    Ok(Outcome::new(&result)?.with_table(trace_table(&trace)))
}

pub fn ergodic(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: VectorDoc = input.parse()?;
    let action = doc.action.build(&g, &input)?;
    let x = input.vector(&doc.x)?;
    let tol = opts.tol.unwrap_or(DEFAULT_ERGODIC_TOL);
    let report = ergodic_limit(&action, &g.family(), &x, tol, opts.nmax.unwrap_or(DEFAULT_NMAX))?;
    let table = trace_table(&report.trace);
    Ok(Outcome::new(&report)?.with_table(table).with_tol(tol))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OrbitopeDoc {
    #[serde(default)]
    action: ActionSpec,
    x0: VectorRef,
    #[serde(default)]
    window: Option<usize>,
    #[serde(default)]
    z: Option<VectorRef>,
    #[serde(default)]
    y: Option<VectorRef>,
}

#[derive(Debug, Clone, Copy)]
pub enum OrbitopeOp {
    Member,
    Support,
    Invariant,
}

pub fn orbitope(opts: &Options, op: OrbitopeOp) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: OrbitopeDoc = input.parse()?;
    let action = doc.action.build(&g, &input)?;
    let handle = OrbitopeHandle::new(action, input.vector(&doc.x0)?, doc.window)?;
    let points = Table::numeric(handle.points());
    match op {
        OrbitopeOp::Member => {
            let z = input.vector(doc.z.as_ref().context("membership needs `z`")?)?;
            let tol = opts.tol.unwrap_or(DEFAULT_MEMBERSHIP_TOL);
            let m = handle.membership(&z, tol)?;
            let result = json!({ "inside": m.is_inside(), "membership": m, "orbit_points": handle.points().len() });
            Ok(Outcome::new(&result)?.with_table(points).with_tol(tol))
        }
        OrbitopeOp::Support => {
            let y = input.vector(doc.y.as_ref().context("the support function needs `y`")?)?;
            Ok(Outcome::new(&handle.support_function(&y)?)?.with_table(points))
        }
        OrbitopeOp::Invariant => {
            let inside = |inv: &InvariantElement| inv.membership.is_inside();
            if g.is_finite() {
                let inv = handle.invariant_element()?;
                return Ok(Outcome::new(&inv)?.with_table(points).checked(inside(&inv)));
            }
            let tol = opts.tol.unwrap_or(DEFAULT_ERGODIC_TOL);
            let inv = handle.invariant_element_windowed(tol, opts.nmax.unwrap_or(DEFAULT_NMAX))?;
            Ok(Outcome::new(&inv)?.with_table(points).with_tol(tol).checked(inside(&inv)))
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelDoc {
    #[serde(default)]
    carrier: CarrierSpec,
    #[serde(alias = "table")]
    kernel: TableRef,
    #[serde(default)]
    p: Option<VectorRef>,
    #[serde(default)]
    q: Option<VectorRef>,
}

pub fn kernel_symmetrize(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: KernelDoc = input.parse()?;
    let carrier = doc.carrier.build(&g)?;
    let k = KernelGram::new(input.matrix(&doc.kernel)?)?;
    let s = symmetrize_kernel(&k, &carrier)?;
    let tol = opts.tol.unwrap_or(KERNEL_IDENTITY_TOL);
    let passed = s.defect_rk <= tol && s.defect_rkr <= tol && s.separate_invariance_defect <= tol;
    let table = matrix_table(s.kernel.table());
    Ok(Outcome::new(&s)?.with_table(table).with_tol(tol).checked(passed))
}

pub fn kernel_mmd(opts: &Options) -> Result<Outcome> {
    let input = Input::read(opts.input.as_deref())?;
    let doc: KernelDoc = input.parse()?;
    let k = KernelGram::new(input.matrix(&doc.kernel)?)?;
    let p = input.vector(doc.p.as_ref().context("mmd needs `p`")?)?;
    let q = input.vector(doc.q.as_ref().context("mmd needs `q`")?)?;
    let result = json!({
        "mmd": mmd(&k, &p, &q)?,
        "min_eigenvalue": k.min_eigenvalue(),
        "characteristic": k.is_characteristic(),
    });
    Outcome::new(&result)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureDoc {
    #[serde(default)]
    carrier: CarrierSpec,
    p: VectorRef,
}

pub fn kernel_decompose(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: MeasureDoc = input.parse()?;
    let carrier = doc.carrier.build(&g)?;
    let p = input.vector(&doc.p)?;
    let dec = ergodic_decomposition(&carrier, &p)?;
    let back = dec.reconstruct(carrier.carrier());
    let error = p.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut table = Table::new(["orbit", "size", "weight"]);
    for c in &dec.components {
        let orbit: Vec<String> = c.orbit.iter().map(usize::to_string).collect();
        table.push(vec![orbit.join(" "), c.orbit.len().to_string(), num(c.weight)]);
    }
    let result = json!({ "decomposition": dec, "reconstruction_error": error });
    Ok(Outcome::new(&result)?.with_table(table))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransportDoc {
    #[serde(alias = "table")]
    cost: TableRef,
    #[serde(default)]
    p1: Option<VectorRef>,
    #[serde(default)]
    p2: Option<VectorRef>,
    #[serde(default)]
    carrier_x: CarrierSpec,
    #[serde(default)]
    carrier_y: CarrierSpec,
}

struct TransportInstance {
    cost: CostMatrix,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

/// Missing marginals default to uniform.
fn transport_instance(input: &Input, doc: &TransportDoc) -> Result<TransportInstance> {
    let cost = CostMatrix::new(input.matrix(&doc.cost)?)?;
    let (n1, n2) = cost.shape();
    let p1 = doc.p1.as_ref().map_or(Ok(uniform(n1)), |v| input.vector(v))?;
    let p2 = doc.p2.as_ref().map_or(Ok(uniform(n2)), |v| input.vector(v))?;
    Ok(TransportInstance { cost, p1, p2 })
}

pub fn transport_solve(opts: &Options) -> Result<Outcome> {
    let input = Input::read(opts.input.as_deref())?;
    let doc: TransportDoc = input.parse()?;
    let t = transport_instance(&input, &doc)?;
    let s = solve_mk(&t.cost, &t.p1, &t.p2)?;
    let tol = opts.tol.unwrap_or(DUALITY_TOL);
    let passed = s.marginal_error <= MARGINAL_TOL && (s.primal - s.dual).abs() <= tol;
    let table = matrix_table(&s.coupling);
    Ok(Outcome::new(&s)?.with_table(table).with_tol(tol).checked(passed))
}

pub fn transport_invariant(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: TransportDoc = input.parse()?;
    let t = transport_instance(&input, &doc)?;
    let ax = doc.carrier_x.build(&g)?;
    let ay = doc.carrier_y.build(&g)?;
    let s = solve_mk_invariant(&t.cost, &t.p1, &t.p2, &ax, &ay)?;
    let tol = opts.tol.unwrap_or(TRANSPORT_GAP_TOL);
    let restriction = (s.primal - s.invariant_primal).abs();
    let duality = (s.invariant_primal - s.invariant_dual).abs();
    let result = json!({
        "gaps": {
            "all_vs_invariant_couplings": restriction,
            "invariant_primal_vs_dual": duality,
            "tolerance": tol,
        },
        "solution": s,
    });
    let table = matrix_table(&s.coupling);
    Ok(Outcome::new(&result)?
        .with_table(table)
        .with_tol(tol)
        .checked(restriction <= tol && duality <= tol))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    #[serde(alias = "table")]
    plan: TableRef,
    #[serde(default)]
    carrier_x: CarrierSpec,
    #[serde(default)]
    carrier_y: CarrierSpec,
}

pub fn transport_extreme(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: PlanDoc = input.parse()?;
    let report = is_extreme_invariant_coupling(
        &input.matrix(&doc.plan)?,
        &doc.carrier_x.build(&g)?,
        &doc.carrier_y.build(&g)?,
    )?;
    Outcome::new(&report)
}

pub fn transport_symmetrize(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: PlanDoc = input.parse()?;
    let s = symmetrize_coupling(
        &input.matrix(&doc.plan)?,
        &doc.carrier_x.build(&g)?,
        &doc.carrier_y.build(&g)?,
    )?;
    let passed = s.marginal_error <= MARGINAL_TOL;
    let table = matrix_table(&s.coupling);
    Ok(Outcome::new(&s)?.with_table(table).checked(passed))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TestDoc {
    #[serde(default)]
    carrier: CarrierSpec,
    hypotheses: Vec<Vec<f64>>,
    alternatives: Vec<Vec<f64>>,
    alpha: f64,
    #[serde(default)]
    w: Option<Vec<f64>>,
}

fn testing_problem(opts: &Options) -> Result<(TestingProblem, Option<Vec<f64>>)> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: TestDoc = input.parse()?;
    let problem = TestingProblem::new(doc.carrier.build(&g)?, doc.hypotheses, doc.alternatives, doc.alpha)?;
    Ok((problem, doc.w))
}

pub fn test_maximin(opts: &Options) -> Result<Outcome> {
    let (problem, _) = testing_problem(opts)?;
    let best = solve_maximin_test(&problem)?;
    let mut table = Table::new(["point", "w"]);
    for (i, w) in best.w.iter().enumerate() {
        table.push(vec![i.to_string(), num(*w)]);
    }
    let result = json!({
        "test": best,
        "size": problem.size(&best.w),
        "alpha": problem.alpha,
    });
    Ok(Outcome::new(&result)?.with_table(table))
}

pub fn test_invariantize(opts: &Options) -> Result<Outcome> {
    let (problem, w) = testing_problem(opts)?;
    let w_hat = match w {
        Some(w) => w,
        None => solve_maximin_test(&problem)?.w,
    };
    let inv = invariantize_test(&problem, &w_hat)?;
    let mut table = Table::new(["point", "w_hat", "w_bar"]);
    for (i, (a, b)) in w_hat.iter().zip(&inv.w_bar).enumerate() {
        table.push(vec![i.to_string(), num(*a), num(*b)]);
    }
    let passed = inv.value_preserved() && inv.sandwich_holds && problem.is_feasible(&inv.w_bar);
    let result = json!({ "w_hat": w_hat, "invariant": inv, "value_preserved": inv.value_preserved() });
    Ok(Outcome::new(&result)?.with_table(table).checked(passed))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CocycleDoc {
    #[serde(default)]
    carrier: CarrierSpec,
    cocycle: CocycleSpec,
    x: TableRef,
    #[serde(default)]
    element: Option<String>,
}

pub fn cocycle_apply(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: CocycleDoc = input.parse()?;
    let cocycle = doc.cocycle.build(doc.carrier.build(&g)?, &input)?;
    let element = g.parse_element(doc.element.as_deref().context("cocycle apply needs `element`")?)?;
    let value = cocycle.apply(&element, &input.matrix(&doc.x)?)?;
    let table = matrix_table(&value);
    let result = json!({ "element": element.to_string(), "kind": cocycle.kind(), "value": value });
    Ok(Outcome::new(&result)?.with_table(table))
}

pub fn cocycle_average(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: CocycleDoc = input.parse()?;
    if doc.element.is_some() {
        bail!("`element` only applies to cocycle apply");
    }
    let cocycle = doc.cocycle.build(doc.carrier.build(&g)?, &input)?;
    let avg = theta_average(&cocycle, &input.matrix(&doc.x)?)?;
    let tol = opts.tol.unwrap_or(AVERAGE_TOL);
    let passed = avg.defect <= tol;
    let table = matrix_table(&avg.value);
    Ok(Outcome::new(&avg)?.with_table(table).with_tol(tol).checked(passed))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MarkovDoc {
    #[serde(default)]
    carrier: CarrierSpec,
    eta: TableRef,
    p: VectorRef,
    #[serde(default)]
    h: Option<TableRef>,
}

pub fn cocycle_equivariant_kernel(opts: &Options) -> Result<Outcome> {
    let g = group(opts)?;
    let input = Input::read(opts.input.as_deref())?;
    let doc: MarkovDoc = input.parse()?;
    let carrier = doc.carrier.build(&g)?;
    let h = doc.h.as_ref().map(|t| input.matrix(t)).transpose()?;
    let k = equivariant_kernel(&input.matrix(&doc.eta)?, &input.vector(&doc.p)?, &carrier, h.as_ref())?;
    let tol = opts.tol.unwrap_or(EQUIVARIANCE_TOL);
    let passed = k.equivariance_defect <= tol && k.risk.as_ref().is_none_or(|r| r.holds);
    let table = matrix_table(&k.kernel);
    Ok(Outcome::new(&k)?.with_table(table).with_tol(tol).checked(passed))
}

pub fn verify_all(opts: &Options) -> Result<Outcome> {
    let outcomes = verify::run_all(opts.seed);
    let mut table = Table::new(["id", "name", "passed", "detail"]);
    for o in &outcomes {
        eprintln!(
            "criterion {:>2} {:<22} {} ({:.2}s)",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.seconds
        );
        table.push(vec![o.id.to_string(), o.name.to_string(), o.passed.to_string(), o.detail.clone()]);
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let result = json!({ "criteria": outcomes });
    Ok(Outcome::new(&result)?.with_table(table).checked(passed))
}
