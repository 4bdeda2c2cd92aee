//! End-to-end task drivers: prepare a problem instance for a given task,
//! simulate a batch of runs, recover relation vectors, solve, and referee
//! the answer against sealed ground truth. Shared by the CLI, the
//! experiment harness, and the acceptance suite.

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::numtheory::{
    element_order, factor_oracle, gen_instance, gen_instance_with, GeneratorStyle, Instance,
    InstanceKind, NumTheoryError, OracleBudget,
};
use crate::postprocess::{
    assemble_embedding_lattice, extract_relations, PostprocessError, PostprocessParams,
    RecoveredLattice,
};
use crate::simulate::{build_relation_lattice, run_batch, NoiseModel, RelationLattice, SimParams, SimulateError};
use crate::solvers::{
    factor_via_order, factor_via_phi, solve_dlog_integrated, solve_dlog_precomputed,
    solve_factor_regev, solve_multi_dlog, solve_order, solve_phi, two_stage_combine, DlogAnswer,
    DlogMethod, FactorAnswer, FactorRoute, SolverError,
};
use crate::rng::{substream, tag};

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("instance generation: {0}")]
    Instance(#[from] NumTheoryError),
    #[error("simulation: {0}")]
    Simulate(#[from] SimulateError),
    #[error("post-processing: {0}")]
    Postprocess(#[from] PostprocessError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("task setup: {0}")]
    Setup(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Factor { route: FactorRoute },
    DlogIntegrated,
    DlogPrecomputed,
    MultiDlog { targets: usize },
    DlogTwoStage,
    Order,
    Phi,
}

/// Referee-side expected answers, sealed from the solver path.
#[derive(Debug, Clone)]
pub enum TaskTruth {
    Factors(Vec<(BigUint, u32)>),
    Dlog { e: BigUint, r: BigUint },
    MultiDlog { es: Vec<BigUint>, r: BigUint },
    Order(BigUint),
    Phi(BigUint),
}

/// A task instance ready to run: the shaped instance, its exact relation
/// lattice (the simulator's hidden object), and referee data.
#[derive(Debug, Clone)]
pub struct PreparedTask {
    pub kind: TaskKind,
    pub instance: Instance,
    pub lattice: RelationLattice,
    pub truth: TaskTruth,
    /// precomputed exponents `e_i = log_g g_i` for the precomputed route
    pub e_list: Option<Vec<BigUint>>,
    /// the base element g for routes where it is not a lattice coordinate
    pub base_g: Option<BigUint>,
    /// publicly known order for the precomputed route
    pub r_public: Option<BigUint>,
}

/// Pipeline knobs shared by all tasks.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub c: f64,
    pub m: usize,
    pub m2: usize,
    pub noise: NoiseModel,
    pub lll_delta: (u32, u32),
    pub float_prepass: bool,
    /// Miller-splitting trial budget for the factor-via-order/phi routes
    pub split_trials: u32,
}

impl PipelineConfig {
    pub fn new(c: f64, m: usize, m2: usize, noise: NoiseModel) -> Self {
        Self {
            c,
            m,
            m2,
            noise,
            lll_delta: crate::lattice::DEFAULT_DELTA,
            float_prepass: true,
            split_trials: 32,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TaskAnswer {
    Factor(FactorAnswer),
    Dlog(DlogAnswer),
    MultiDlog(Vec<DlogAnswer>),
    Order(BigUint),
    Phi(BigUint),
}

#[derive(Debug)]
pub struct PipelineOutcome {
    pub recovered: RecoveredLattice,
    pub answer: TaskAnswer,
    /// how many candidate vectors fell into the trivial sublattice
    /// (gcd(z_d, r) != 1 rejections, or split-free vectors)
    pub trivial_rejections: u64,
    /// det(recovered) / det(ground truth), 1.0 when recovery is complete
    pub det_ratio: Option<f64>,
}

fn sample_unit<R: Rng>(modulus: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let x = rng.gen_biguint_range(&BigUint::from(2u32), modulus);
        if x.gcd(modulus).is_one() {
            return x;
        }
    }
}

fn sample_coprime_exponent<R: Rng>(order: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let x = rng.gen_biguint_below(order);
        if x.gcd(order).is_one() {
            return x;
        }
    }
}

fn sample_exponent_nonzero<R: Rng>(order: &BigUint, rng: &mut R) -> BigUint {
    loop {
        let x = rng.gen_biguint_below(order);
        if !x.is_zero() {
            return x;
        }
    }
}

/// Generates an instance shaped for the task and computes referee truth.
pub fn prepare_task(
    kind: TaskKind,
    inst_kind: InstanceKind,
    bits: u64,
    d: usize,
    seed: u64,
    budget: &OracleBudget,
) -> Result<PreparedTask, TaskError> {
    let base = match kind {
        TaskKind::Factor {
            route: FactorRoute::RegevSplit,
        } => {
            if !inst_kind.is_concrete() {
                return Err(TaskError::Setup(
                    "factoring requires a concrete modulus".into(),
                ));
            }
            gen_instance_with(inst_kind, bits, d, seed, budget, GeneratorStyle::PrimeSquares)?
        }
        TaskKind::Phi if inst_kind == InstanceKind::SyntheticCyclic => {
            // synthetic mode models the spanning assumption: resample until
            // the assigned exponents generate the full group
            let mut attempt = 0u64;
            loop {
                let cand = gen_instance(inst_kind, bits, d, seed ^ attempt, budget)?;
                let order = cand.group_order();
                let mut g = order.clone();
                for a in &cand.generators {
                    g = g.gcd(a);
                }
                if g.is_one() {
                    break cand;
                }
                attempt += 1;
                if attempt > 64 {
                    return Err(TaskError::Setup(
                        "could not sample spanning synthetic generators".into(),
                    ));
                }
            }
        }
        _ => gen_instance(inst_kind, bits, d, seed, budget)?,
    };
    shape_task(kind, base, seed, budget)
}

/// Shapes an existing base instance for the task: samples targets from its
/// group, computes referee truth, and builds the exact relation lattice.
pub fn shape_task(
    kind: TaskKind,
    base: Instance,
    seed: u64,
    budget: &OracleBudget,
) -> Result<PreparedTask, TaskError> {
    let mut rng = substream(seed, &[tag::TASK]);
    let d = base.dim();
    match kind {
        TaskKind::Factor {
            route: FactorRoute::RegevSplit,
        } => {
            let n = base
                .modulus
                .clone()
                .ok_or_else(|| TaskError::Setup("factoring requires a concrete modulus".into()))?;
            if base.square_roots().is_none() {
                return Err(TaskError::Setup(
                    "splitting route requires prime-square generators".into(),
                ));
            }
            let truth = TaskTruth::Factors(factor_oracle(&n)?);
            let lattice = build_relation_lattice(&base, None)?;
            Ok(PreparedTask {
                kind,
                instance: base,
                lattice,
                truth,
                e_list: None,
                base_g: None,
                r_public: None,
            })
        }
        TaskKind::Factor {
            route: FactorRoute::ViaOrder,
        } => {
            let n = base
                .modulus
                .clone()
                .ok_or_else(|| TaskError::Setup("factoring requires a concrete modulus".into()))?;
            let mut task = shape_task(TaskKind::Order, base, seed, budget)?;
            task.kind = kind;
            task.truth = TaskTruth::Factors(factor_oracle(&n)?);
            Ok(task)
        }
        TaskKind::Factor {
            route: FactorRoute::ViaPhi,
        } => {
            let n = base
                .modulus
                .clone()
                .ok_or_else(|| TaskError::Setup("factoring requires a concrete modulus".into()))?;
            let mut task = shape_task(TaskKind::Phi, base, seed, budget)?;
            task.kind = kind;
            task.truth = TaskTruth::Factors(factor_oracle(&n)?);
            Ok(task)
        }
        TaskKind::DlogIntegrated => {
            if d < 3 {
                return Err(TaskError::Setup("integrated dlog needs d >= 3".into()));
            }
            let (g, x, e, r) = match &base.modulus {
                Some(p) => {
                    let g = sample_unit(p, &mut rng);
                    let r = element_order(&g, &base)?;
                    let e = sample_exponent_nonzero(&r, &mut rng);
                    let x = g.modpow(&e, p);
                    (g, x, e, r)
                }
                None => {
                    let order = base.group_order();
                    let a_g = sample_coprime_exponent(&order, &mut rng);
                    let e = sample_exponent_nonzero(&order, &mut rng);
                    let a_x = (&e * &a_g) % &order;
                    (a_g, a_x, e, order)
                }
            };
            let instance = base.with_targets(vec![x, g], budget)?;
            let lattice = build_relation_lattice(&instance, None)?;
            Ok(PreparedTask {
                kind,
                instance,
                lattice,
                truth: TaskTruth::Dlog { e, r },
                e_list: None,
                base_g: None,
                r_public: None,
            })
        }
        TaskKind::MultiDlog { targets } => {
            if targets == 0 || targets + 2 > d {
                return Err(TaskError::Setup("multi dlog needs 1 <= k <= d - 2".into()));
            }
            let (g, r) = match &base.modulus {
                Some(p) => {
                    let g = sample_unit(p, &mut rng);
                    let r = element_order(&g, &base)?;
                    (g, r)
                }
                None => {
                    let order = base.group_order();
                    (sample_coprime_exponent(&order, &mut rng), order)
                }
            };
            let mut es = Vec::with_capacity(targets);
            let mut xs = Vec::with_capacity(targets);
            for _ in 0..targets {
                let e = sample_exponent_nonzero(&r, &mut rng);
                let x = match &base.modulus {
                    Some(p) => g.modpow(&e, p),
                    None => (&e * &g) % base.group_order(),
                };
                es.push(e);
                xs.push(x);
            }
            xs.push(g);
            let instance = base.with_targets(xs, budget)?;
            let lattice = build_relation_lattice(&instance, None)?;
            Ok(PreparedTask {
                kind,
                instance,
                lattice,
                truth: TaskTruth::MultiDlog { es, r },
                e_list: None,
                base_g: None,
                r_public: None,
            })
        }
        TaskKind::DlogPrecomputed | TaskKind::DlogTwoStage => {
            prepare_precomputed_style(kind, base, budget, &mut rng)
        }
        TaskKind::Order => {
            let g = match &base.modulus {
                Some(p) => sample_unit(p, &mut rng),
                None => rng.gen_biguint_below(&base.group_order()),
            };
            let r = element_order(&g, &base)?;
            let instance = base.with_targets(vec![g], budget)?;
            let lattice = build_relation_lattice(&instance, None)?;
            Ok(PreparedTask {
                kind,
                instance,
                lattice,
                truth: TaskTruth::Order(r),
                e_list: None,
                base_g: None,
                r_public: None,
            })
        }
        TaskKind::Phi => {
            let truth = TaskTruth::Phi(base.group_order());
            let lattice = build_relation_lattice(&base, None)?;
            Ok(PreparedTask {
                kind,
                instance: base,
                lattice,
                truth,
                e_list: None,
                base_g: None,
                r_public: None,
            })
        }
    }
}

fn prepare_precomputed_style<R: Rng>(
    kind: TaskKind,
    base: Instance,
    budget: &OracleBudget,
    rng: &mut R,
) -> Result<PreparedTask, TaskError> {
    let d = base.dim();
    if d < 2 {
        return Err(TaskError::Setup("precomputed dlog needs d >= 2".into()));
    }
    match &base.modulus {
        Some(p) => {
            // the base is the group's primitive root, so <g> = Z_p^*
            if !crate::numtheory::is_prime(p) {
                return Err(TaskError::Setup(
                    "precomputed dlog route needs a prime modulus".into(),
                ));
            }
            let (_, orders) = base.dlog_matrix()?;
            if orders.len() != 1 {
                return Err(TaskError::Setup("expected a cyclic unit group".into()));
            }
            let r = orders[0].clone();
            let g = primitive_root_of(&base)?;
            let e = sample_exponent_nonzero(&r, rng);
            let x = g.modpow(&e, p);
            let instance = base.with_targets(vec![x.clone()], budget)?;
            let lattice = build_relation_lattice(&instance, None)?;
            let (new_rows, _) = instance.dlog_matrix()?;
            let e_list: Vec<BigUint> = new_rows[..d - 1]
                .iter()
                .map(|row| row[0].to_biguint().expect("dlogs are non-negative"))
                .collect();
            Ok(PreparedTask {
                kind,
                instance,
                lattice,
                truth: TaskTruth::Dlog { e, r: r.clone() },
                e_list: Some(e_list),
                base_g: Some(g),
                r_public: Some(r),
            })
        }
        None => {
            // canonical generator has exponent 1; the assigned exponents
            // are literally the precomputed logs
            let order = base.group_order();
            let e = sample_exponent_nonzero(&order, rng);
            let instance = base.with_targets(vec![e.clone()], budget)?;
            let lattice = build_relation_lattice(&instance, None)?;
            let e_list = instance.generators.clone();
            Ok(PreparedTask {
                kind,
                instance,
                lattice,
                truth: TaskTruth::Dlog {
                    e,
                    r: order.clone(),
                },
                e_list: Some(e_list),
                base_g: Some(BigUint::one()),
                r_public: Some(order),
            })
        }
    }
}

fn primitive_root_of(instance: &Instance) -> Result<BigUint, TaskError> {
    match instance.ground_truth() {
        Some(crate::numtheory::GroundTruth::Concrete { components, .. })
            if components.len() == 1 =>
        {
            Ok(components[0].generator.clone())
        }
        _ => Err(TaskError::Setup("no primitive root available".into())),
    }
}

/// Simulate, recover, and solve one trial of the prepared task.
pub fn run_pipeline(
    task: &PreparedTask,
    cfg: &PipelineConfig,
    trial: u64,
    seed: u64,
) -> Result<PipelineOutcome, TaskError> {
    let d = task.lattice.dim();
    let k = task.instance.u_elements.len();
    let params = SimParams::new(task.instance.bits, d, k, cfg.c, cfg.noise);
    let batch = run_batch(&task.lattice, &params, cfg.m, cfg.m2, trial, seed);

    let mut pp = PostprocessParams::for_grid(d, cfg.m, params.log2_grid);
    pp.lll_delta = cfg.lll_delta;
    pp.float_prepass = cfg.float_prepass;

    let embedding = assemble_embedding_lattice(&batch, d, &pp.scale())?;
    let ctx = task.lattice.eval_context();
    let recovered = extract_relations(&embedding, &ctx, &pp)?;

    let mut rejections = 0u64;
    let answer = match task.kind {
        TaskKind::Factor {
            route: FactorRoute::RegevSplit,
        } => {
            let ans = solve_factor_regev(&task.instance, &recovered.relation_vectors)?;
            TaskAnswer::Factor(ans)
        }
        TaskKind::Factor {
            route: FactorRoute::ViaOrder,
        } => {
            let order = solve_order(&recovered.basis, &ctx)?;
            let n = task.instance.modulus.as_ref().expect("concrete");
            let r = order.r.expect("order answer carries r");
            TaskAnswer::Factor(factor_via_order(n, &r, cfg.split_trials, seed ^ trial))
        }
        TaskKind::Factor {
            route: FactorRoute::ViaPhi,
        } => {
            let phi = solve_phi(&recovered.basis)?;
            let n = task.instance.modulus.as_ref().expect("concrete");
            TaskAnswer::Factor(factor_via_phi(n, &phi, cfg.split_trials, seed ^ trial))
        }
        TaskKind::DlogIntegrated => {
            TaskAnswer::Dlog(solve_dlog_integrated(&recovered.basis, &ctx, None)?)
        }
        TaskKind::MultiDlog { targets } => {
            TaskAnswer::MultiDlog(solve_multi_dlog(&recovered.basis, &ctx, targets)?)
        }
        TaskKind::DlogPrecomputed => {
            let e_list = task.e_list.as_ref().expect("precomputed exponents");
            let r = task.r_public.as_ref().expect("public order");
            let g = task.base_g.as_ref().expect("base element");
            let x = &task.instance.u_elements[0];
            let mut found: Option<DlogAnswer> = None;
            let mut err: SolverError = SolverError::VerificationFailed;
            for z in &recovered.relation_vectors {
                match solve_dlog_precomputed(z, e_list, r) {
                    Ok(e) => {
                        let ok = ctx.group.pow(g, &BigInt::from(e.clone())) == *x;
                        if ok {
                            found = Some(DlogAnswer {
                                e,
                                r: Some(r.clone()),
                                method: DlogMethod::Precomputed,
                                witness: vec![z.clone()],
                            });
                            break;
                        }
                        rejections += 1;
                    }
                    Err(SolverError::InTrivialSublattice) => rejections += 1,
                    Err(e) => err = e,
                }
            }
            TaskAnswer::Dlog(found.ok_or(err)?)
        }
        TaskKind::DlogTwoStage => {
            return Err(TaskError::Setup(
                "two-stage dlog runs via dlog_via_small_generator".into(),
            ))
        }
        TaskKind::Order => {
            let ans = solve_order(&recovered.basis, &ctx)?;
            TaskAnswer::Order(ans.r.expect("order answer carries r"))
        }
        TaskKind::Phi => TaskAnswer::Phi(solve_phi(&recovered.basis)?),
    };

    let det_ratio = recovered.determinant().and_then(|rec_det| {
        let truth = task.lattice.determinant().to_f64()?;
        let rec = rec_det.to_f64()?;
        (truth > 0.0).then_some(rec / truth)
    });

    Ok(PipelineOutcome {
        recovered,
        answer,
        trivial_rejections: rejections,
        det_ratio,
    })
}

/// Two-stage discrete logarithm via a small base: runs the integrated
/// pipeline twice against a small generator g' (targets g, then x) and
/// combines `e = e_x / e_g mod ord(g)`. The answer is verified.
pub fn dlog_via_small_generator(
    inst_kind: InstanceKind,
    bits: u64,
    d: usize,
    cfg: &PipelineConfig,
    seed: u64,
    budget: &OracleBudget,
) -> Result<(PreparedTask, DlogAnswer), TaskError> {
    if d < 3 {
        return Err(TaskError::Setup("two-stage dlog needs d >= 3".into()));
    }
    let mut rng = substream(seed, &[tag::TASK, 2]);
    let base = gen_instance(inst_kind, bits, d, seed, budget)?;

    // g' small with g in <g'>; in Z_p^* take the primitive root
    let (g_prime, g, x, e_truth, r_truth) = match &base.modulus {
        Some(p) => {
            if !crate::numtheory::is_prime(p) {
                return Err(TaskError::Setup(
                    "two-stage dlog route needs a prime modulus".into(),
                ));
            }
            let g_prime = primitive_root_of(&base)?;
            let r_prime = element_order(&g_prime, &base)?;
            let e_g = sample_exponent_nonzero(&r_prime, &mut rng);
            let g = g_prime.modpow(&e_g, p);
            let r_g = element_order(&g, &base)?;
            let e = sample_exponent_nonzero(&r_g, &mut rng);
            let x = g.modpow(&e, p);
            (g_prime, g, x, e, r_g)
        }
        None => {
            let order = base.group_order();
            let a_gp = sample_coprime_exponent(&order, &mut rng);
            let e_g = sample_exponent_nonzero(&order, &mut rng);
            let g = (&a_gp * &e_g) % &order;
            let r_g = element_order(&g, &base)?;
            let e = sample_exponent_nonzero(&r_g, &mut rng);
            let x = (&g * &e) % &order;
            (a_gp, g, x, e, r_g)
        }
    };

    // stage 1: e_g = log_{g'} g; stage 2: e_x = log_{g'} x
    let mut stage_answers: Vec<DlogAnswer> = Vec::with_capacity(2);
    for (stage, target) in [g.clone(), x.clone()].into_iter().enumerate() {
        let instance = base.with_targets(vec![target, g_prime.clone()], budget)?;
        let lattice = build_relation_lattice(&instance, None)?;
        let params = SimParams::new(instance.bits, d, 2, cfg.c, cfg.noise);
        let batch = run_batch(&lattice, &params, cfg.m, cfg.m2, stage as u64, seed);
        let mut pp = PostprocessParams::for_grid(d, cfg.m, params.log2_grid);
        pp.lll_delta = cfg.lll_delta;
        pp.float_prepass = cfg.float_prepass;
        let embedding = assemble_embedding_lattice(&batch, d, &pp.scale())?;
        let ctx = lattice.eval_context();
        let recovered = extract_relations(&embedding, &ctx, &pp)?;
        stage_answers.push(solve_dlog_integrated(&recovered.basis, &ctx, None)?);
    }
    let e_g = &stage_answers[0].e;
    let e_x = &stage_answers[1].e;
    let r_prime = stage_answers[0].r.as_ref().expect("integrated carries r");
    let (e, r_g) = two_stage_combine(e_g, e_x, r_prime)?;

    // final verification in the group
    let group = base.group();
    if group.pow(&g, &BigInt::from(e.clone())) != x {
        return Err(TaskError::Solver(SolverError::VerificationFailed));
    }
    let mut witness = stage_answers[0].witness.clone();
    witness.extend(stage_answers[1].witness.clone());
    let answer = DlogAnswer {
        e,
        r: Some(r_g),
        method: DlogMethod::TwoStage,
        witness,
    };
    let instance = base.with_targets(vec![x, g_prime.clone()], budget)?;
    let lattice = build_relation_lattice(&instance, None)?;
    let task = PreparedTask {
        kind: TaskKind::DlogTwoStage,
        instance,
        lattice,
        truth: TaskTruth::Dlog {
            e: e_truth,
            r: r_truth,
        },
        e_list: None,
        base_g: Some(g),
        r_public: None,
    };
    Ok((task, answer))
}

/// Scores an answer against the sealed truth.
pub fn referee_success(task: &PreparedTask, answer: &TaskAnswer) -> bool {
    match (&task.truth, answer) {
        (TaskTruth::Factors(expect), TaskAnswer::Factor(got)) => {
            got.complete && &got.factors == expect
        }
        (TaskTruth::Dlog { e, r }, TaskAnswer::Dlog(got)) => {
            &got.e == e && got.r.as_ref().map_or(true, |gr| gr == r)
        }
        (TaskTruth::MultiDlog { es, r }, TaskAnswer::MultiDlog(got)) => {
            got.len() == es.len()
                && got.iter().zip(es).all(|(g, e)| &g.e == e)
                && got.iter().all(|g| g.r.as_ref() == Some(r))
        }
        (TaskTruth::Order(r), TaskAnswer::Order(got)) => got == r,
        (TaskTruth::Phi(phi), TaskAnswer::Phi(got)) => got == phi,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(c: f64, m: usize, m2: usize) -> PipelineConfig {
        PipelineConfig::new(c, m, m2, NoiseModel::Off)
    }

    #[test]
    fn synthetic_integrated_dlog_end_to_end() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..10 {
            let task = prepare_task(
                TaskKind::DlogIntegrated,
                InstanceKind::SyntheticCyclic,
                16,
                4,
                seed,
                &budget,
            )
            .unwrap();
            let out = run_pipeline(&task, &cfg(4.0, 8, 0), 0, seed).unwrap();
            if referee_success(&task, &out.answer) {
                ok += 1;
            }
        }
        assert!(ok >= 9, "only {ok}/10 integrated dlog trials succeeded");
    }

    #[test]
    fn concrete_order_end_to_end() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..10 {
            let task = prepare_task(
                TaskKind::Order,
                InstanceKind::SafePrimeGroup,
                14,
                4,
                seed,
                &budget,
            )
            .unwrap();
            let out = run_pipeline(&task, &cfg(4.0, 8, 0), 0, seed).unwrap();
            if referee_success(&task, &out.answer) {
                ok += 1;
            }
        }
        assert!(ok >= 9, "only {ok}/10 order trials succeeded");
    }

    #[test]
    fn concrete_factor_regev_end_to_end() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..10 {
            let task = prepare_task(
                TaskKind::Factor {
                    route: FactorRoute::RegevSplit,
                },
                InstanceKind::RsaSemiprime,
                12,
                4,
                seed,
                &budget,
            )
            .unwrap();
            let out = run_pipeline(&task, &cfg(4.0, 8, 0), 0, seed).unwrap();
            if referee_success(&task, &out.answer) {
                ok += 1;
            }
        }
        assert!(ok >= 7, "only {ok}/10 factoring trials succeeded");
    }

    #[test]
    fn precomputed_dlog_end_to_end() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..10 {
            let task = prepare_task(
                TaskKind::DlogPrecomputed,
                InstanceKind::SafePrimeGroup,
                14,
                4,
                seed,
                &budget,
            )
            .unwrap();
            let out = run_pipeline(&task, &cfg(4.0, 8, 0), 0, seed).unwrap();
            if referee_success(&task, &out.answer) {
                ok += 1;
            }
        }
        assert!(ok >= 8, "only {ok}/10 precomputed dlog trials succeeded");
    }

    #[test]
    fn phi_end_to_end_synthetic() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..10 {
            let task = prepare_task(
                TaskKind::Phi,
                InstanceKind::SyntheticCyclic,
                14,
                4,
                seed,
                &budget,
            )
            .unwrap();
            let out = run_pipeline(&task, &cfg(4.0, 8, 0), 0, seed).unwrap();
            if referee_success(&task, &out.answer) {
                ok += 1;
            }
        }
        assert!(ok >= 9, "only {ok}/10 phi trials succeeded");
    }

    #[test]
    fn multi_dlog_end_to_end() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..8 {
            let task = prepare_task(
                TaskKind::MultiDlog { targets: 2 },
                InstanceKind::SyntheticCyclic,
                16,
                5,
                seed,
                &budget,
            )
            .unwrap();
            let out = run_pipeline(&task, &cfg(4.0, 9, 0), 0, seed).unwrap();
            if referee_success(&task, &out.answer) {
                ok += 1;
            }
        }
        assert!(ok >= 7, "only {ok}/8 multi dlog trials succeeded");
    }

    #[test]
    fn two_stage_dlog_end_to_end() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..8 {
            match dlog_via_small_generator(
                InstanceKind::SafePrimeGroup,
                14,
                4,
                &cfg(4.0, 8, 0),
                seed,
                &budget,
            ) {
                Ok((task, answer)) => {
                    if referee_success(&task, &TaskAnswer::Dlog(answer)) {
                        ok += 1;
                    }
                }
                Err(e) => panic!("seed {seed}: {e}"),
            }
        }
        assert!(ok >= 7, "only {ok}/8 two-stage dlog trials succeeded");
    }

    #[test]
    fn pipeline_with_bad_runs_still_works_at_high_c() {
        let budget = OracleBudget::default();
        let mut ok = 0;
        for seed in 0..8 {
            let task = prepare_task(
                TaskKind::DlogIntegrated,
                InstanceKind::SyntheticCyclic,
                16,
                4,
                seed,
                &budget,
            )
            .unwrap();
            // m2 = 2 bad runs out of 10, C well above threshold
            let out = run_pipeline(&task, &cfg(7.0, 10, 2), 0, seed);
            if let Ok(out) = out {
                if referee_success(&task, &out.answer) {
                    ok += 1;
                }
            }
        }
        assert!(ok >= 6, "only {ok}/8 noisy dlog trials succeeded");
    }
}
