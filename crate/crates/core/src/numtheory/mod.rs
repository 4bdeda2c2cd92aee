//! Instance generation, ground-truth oracles, and the public group view.

pub(crate) mod arith;
mod decomp;
mod dlog;
pub(crate) mod factor;
mod group;
mod primes;

pub use arith::{crt_pair, mod_inverse, modpow_signed, solve_linear_congruence};
pub use decomp::{decompose, exponent_vector, group_order_factorization, group_order as decomposition_order, CyclicComponent};
pub use factor::{
    factor_from_exponent_multiple, factor_oracle, perfect_power, phi_from_factorization,
    phi_oracle, SplitResult,
};
pub use group::{sign_normalize, EvalContext, Group};
pub use primes::{first_primes, is_prime, random_prime};

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{Num, One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{substream, tag};

#[derive(Debug, Error)]
pub enum NumTheoryError {
    #[error("element is not in the subgroup generated by the base")]
    NotInSubgroup,
    #[error("oracle budget exceeded")]
    BudgetExceeded,
    #[error("parameters too small to host the requested generators")]
    TooSmall,
    #[error("ground truth unavailable: {0}")]
    GroundTruthUnavailable(String),
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error("malformed instance file: {0}")]
    BadFile(String),
}

/// Problem-instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    RsaSemiprime,
    SafePrimeGroup,
    SchnorrGroup,
    GenericModulus,
    SyntheticCyclic,
}

impl InstanceKind {
    pub fn is_concrete(&self) -> bool {
        !matches!(self, InstanceKind::SyntheticCyclic)
    }
}

/// Budgets for the brute-force oracles.
#[derive(Debug, Clone)]
pub struct OracleBudget {
    /// Concrete instances are rejected above this modulus bit length.
    pub max_concrete_bits: u64,
    /// Baby-step giant-step table bound per prime-power subgroup.
    pub bsgs_steps: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_concrete_bits: 64,
            bsgs_steps: 1 << 24,
        }
    }
}

/// Whether the small generators are the first primes themselves or their
/// squares (the factoring construction works with squares so that recovered
/// relation vectors give square roots of unity).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorStyle {
    Primes,
    PrimeSquares,
}

/// Sealed ground truth: enough data to build the exact relation lattice and
/// referee solver outputs. Solver code must not read this.
#[derive(Debug, Clone)]
pub enum GroundTruth {
    Concrete {
        components: Vec<CyclicComponent>,
        /// exponent vector per element (generators, then u-elements)
        dlogs: Vec<Vec<BigUint>>,
    },
    Synthetic {
        order: BigUint,
    },
}

/// A problem instance: the group, its generator lists, and sealed ground
/// truth for verification.
#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: InstanceKind,
    pub modulus: Option<BigUint>,
    /// bit length of the modulus, or of the synthetic order
    pub bits: u64,
    /// small generators (primes, prime squares, or assigned exponents)
    pub generators: Vec<BigUint>,
    /// arbitrary elements (dlog targets, bases)
    pub u_elements: Vec<BigUint>,
    pub seed: u64,
    order_factorization: Vec<(BigUint, u32)>,
    ground_truth: Option<GroundTruth>,
    square_roots: Option<Vec<BigUint>>,
}

impl Instance {
    pub fn group(&self) -> Group {
        match &self.modulus {
            Some(m) => Group::Concrete { modulus: m.clone() },
            None => Group::Synthetic {
                order: self.group_order(),
            },
        }
    }

    /// All elements in relation-lattice coordinate order.
    pub fn elements(&self) -> Vec<BigUint> {
        let mut v = self.generators.clone();
        v.extend(self.u_elements.iter().cloned());
        v
    }

    pub fn dim(&self) -> usize {
        self.generators.len() + self.u_elements.len()
    }

    /// Solver-facing view: group plus ordered elements, no ground truth.
    pub fn eval_context(&self) -> EvalContext {
        EvalContext {
            group: self.group(),
            elements: self.elements(),
        }
    }

    /// Referee-side group order (`phi(N)` or the synthetic order).
    pub fn group_order(&self) -> BigUint {
        self.order_factorization.iter().map(|(p, e)| p.pow(*e)).product()
    }

    /// Referee-side factorization of the group order.
    pub fn order_factorization(&self) -> &[(BigUint, u32)] {
        &self.order_factorization
    }

    /// Referee-side ground truth.
    pub fn ground_truth(&self) -> Option<&GroundTruth> {
        self.ground_truth.as_ref()
    }

    /// The roots `b_i` when the generators are prime squares `a_i = b_i^2`.
    pub fn square_roots(&self) -> Option<&[BigUint]> {
        self.square_roots.as_deref()
    }

    /// Ground-truth exponent rows (one per element, over the cyclic
    /// components) and the component orders. This is the data that defines
    /// the exact relation lattice.
    pub fn dlog_matrix(&self) -> Result<(Vec<Vec<BigInt>>, Vec<BigUint>), NumTheoryError> {
        match &self.ground_truth {
            Some(GroundTruth::Concrete { components, dlogs }) => {
                let rows = dlogs
                    .iter()
                    .map(|row| row.iter().map(|x| BigInt::from(x.clone())).collect())
                    .collect();
                Ok((rows, components.iter().map(|c| c.order.clone()).collect()))
            }
            Some(GroundTruth::Synthetic { order }) => {
                let rows = self
                    .elements()
                    .iter()
                    .map(|a| vec![BigInt::from(a.clone())])
                    .collect();
                Ok((rows, vec![order.clone()]))
            }
            None => Err(NumTheoryError::GroundTruthUnavailable(
                "instance has no ground truth".into(),
            )),
        }
    }

    /// Replaces the arbitrary elements with `targets`, shrinking the small
    /// generator list so the total dimension is unchanged, and recomputes
    /// ground truth. Concrete generators are re-picked as the first primes
    /// distinct (as group elements) from the targets.
    pub fn with_targets(
        &self,
        targets: Vec<BigUint>,
        budget: &OracleBudget,
    ) -> Result<Instance, NumTheoryError> {
        let d = self.dim();
        let k = targets.len();
        if k >= d {
            return Err(NumTheoryError::BadInput(
                "more targets than lattice dimensions".into(),
            ));
        }
        let mut out = self.clone();
        match &self.modulus {
            Some(n) => {
                out.generators = small_prime_elements(n, d - k, &targets)?;
                out.u_elements = targets;
                out.square_roots = None;
                let Some(GroundTruth::Concrete { components, .. }) = &self.ground_truth else {
                    return Err(NumTheoryError::GroundTruthUnavailable(
                        "concrete instance lacks decomposition".into(),
                    ));
                };
                let mut dlogs = Vec::with_capacity(d);
                for elem in out.elements() {
                    dlogs.push(exponent_vector(&elem, components, budget.bsgs_steps)?);
                }
                out.ground_truth = Some(GroundTruth::Concrete {
                    components: components.clone(),
                    dlogs,
                });
            }
            None => {
                let order = self.group_order();
                if targets.iter().any(|t| t >= &order) {
                    return Err(NumTheoryError::BadInput(
                        "synthetic target exceeds the group order".into(),
                    ));
                }
                out.generators = self.generators[..d - k].to_vec();
                out.u_elements = targets;
            }
        }
        Ok(out)
    }
}

/// Builds an instance around an explicitly given odd modulus, classifying
/// its kind from the factorization. Used by workflows that take `N` on the
/// command line instead of sampling one.
pub fn instance_from_modulus(
    modulus: &BigUint,
    d: usize,
    budget: &OracleBudget,
    style: GeneratorStyle,
) -> Result<Instance, NumTheoryError> {
    if d < 2 {
        return Err(NumTheoryError::BadInput("need d >= 2".into()));
    }
    let bits = modulus.bits();
    if bits > budget.max_concrete_bits {
        return Err(NumTheoryError::BudgetExceeded);
    }
    let n_factors = factor_oracle(modulus)?;
    let kind = if n_factors.len() == 1 && n_factors[0].1 == 1 {
        let p = modulus;
        let half = (p - BigUint::one()) >> 1;
        if is_prime(&half) {
            InstanceKind::SafePrimeGroup
        } else {
            InstanceKind::SchnorrGroup
        }
    } else if n_factors.len() == 2 && n_factors.iter().all(|(_, e)| *e == 1) {
        InstanceKind::RsaSemiprime
    } else {
        InstanceKind::GenericModulus
    };
    let components = decompose(modulus)?;
    let order_factorization = group_order_factorization(&components);
    let (generators, square_roots) = match style {
        GeneratorStyle::Primes => (small_prime_elements(modulus, d, &[])?, None),
        GeneratorStyle::PrimeSquares => {
            let roots = small_prime_elements(modulus, d, &[])?;
            let squares = roots.iter().map(|b| (b * b) % modulus).collect();
            (squares, Some(roots))
        }
    };
    let mut dlogs = Vec::with_capacity(d);
    for g in &generators {
        dlogs.push(exponent_vector(g, &components, budget.bsgs_steps)?);
    }
    Ok(Instance {
        kind,
        modulus: Some(modulus.clone()),
        bits,
        generators,
        u_elements: Vec::new(),
        seed: 0,
        order_factorization,
        ground_truth: Some(GroundTruth::Concrete { components, dlogs }),
        square_roots,
    })
}

impl Instance {
    /// Builds a synthetic-cyclic instance with explicitly assigned
    /// exponents. The order is given by its factorization.
    pub fn synthetic(
        order_factorization: Vec<(BigUint, u32)>,
        dlogs: Vec<BigUint>,
        seed: u64,
    ) -> Result<Instance, NumTheoryError> {
        let order: BigUint = order_factorization.iter().map(|(p, e)| p.pow(*e)).product();
        if order <= BigUint::one() {
            return Err(NumTheoryError::BadInput("order must exceed 1".into()));
        }
        if dlogs.iter().any(|a| a >= &order) {
            return Err(NumTheoryError::BadInput("exponent outside [0, order)".into()));
        }
        if !order_factorization.iter().all(|(p, _)| is_prime(p)) {
            return Err(NumTheoryError::BadInput("factorization entries must be prime".into()));
        }
        Ok(Instance {
            kind: InstanceKind::SyntheticCyclic,
            modulus: None,
            bits: order.bits(),
            generators: dlogs,
            u_elements: Vec::new(),
            seed,
            order_factorization,
            ground_truth: Some(GroundTruth::Synthetic { order }),
            square_roots: None,
        })
    }
}

/// First `count` primes that are units modulo `n` and distinct, as group
/// elements, from each other and from `avoid`.
fn small_prime_elements(
    n: &BigUint,
    count: usize,
    avoid: &[BigUint],
) -> Result<Vec<BigUint>, NumTheoryError> {
    let mut out: Vec<BigUint> = Vec::with_capacity(count);
    let avoid_red: Vec<BigUint> = avoid.iter().map(|a| a % n).collect();
    for p in first_primes(1000) {
        if out.len() == count {
            break;
        }
        let p = BigUint::from(p);
        if p.gcd(n) != BigUint::one() {
            continue;
        }
        let red = &p % n;
        if red.is_zero() || red.is_one() {
            continue;
        }
        if avoid_red.contains(&red) || out.iter().any(|q| q % n == red) {
            continue;
        }
        out.push(p);
    }
    if out.len() == count {
        Ok(out)
    } else {
        Err(NumTheoryError::TooSmall)
    }
}

/// Generates a base instance: `d` small generators, no arbitrary elements,
/// ground truth populated. See `gen_instance_with` for the squares variant.
pub fn gen_instance(
    kind: InstanceKind,
    bits: u64,
    d: usize,
    seed: u64,
    budget: &OracleBudget,
) -> Result<Instance, NumTheoryError> {
    gen_instance_with(kind, bits, d, seed, budget, GeneratorStyle::Primes)
}

pub fn gen_instance_with(
    kind: InstanceKind,
    bits: u64,
    d: usize,
    seed: u64,
    budget: &OracleBudget,
    style: GeneratorStyle,
) -> Result<Instance, NumTheoryError> {
    if bits < 8 || d < 2 {
        return Err(NumTheoryError::BadInput(
            "need bits >= 8 and d >= 2".into(),
        ));
    }
    if kind.is_concrete() && bits > budget.max_concrete_bits {
        return Err(NumTheoryError::BudgetExceeded);
    }
    let mut rng = substream(seed, &[tag::INSTANCE]);
    match kind {
        InstanceKind::SyntheticCyclic => {
            let (order, order_factorization) = random_factored_integer(bits, &mut rng);
            let generators: Vec<BigUint> =
                (0..d).map(|_| rng.gen_biguint_below(&order)).collect();
            Ok(Instance {
                kind,
                modulus: None,
                bits,
                generators,
                u_elements: Vec::new(),
                seed,
                order_factorization,
                ground_truth: Some(GroundTruth::Synthetic { order }),
                square_roots: None,
            })
        }
        _ => {
            let modulus = sample_modulus(kind, bits, d, &mut rng)?;
            let components = decompose(&modulus)?;
            let order_factorization = group_order_factorization(&components);
            let (generators, square_roots) = match style {
                GeneratorStyle::Primes => (small_prime_elements(&modulus, d, &[])?, None),
                GeneratorStyle::PrimeSquares => {
                    let roots = small_prime_elements(&modulus, d, &[])?;
                    let squares = roots.iter().map(|b| (b * b) % &modulus).collect();
                    (squares, Some(roots))
                }
            };
            let mut dlogs = Vec::with_capacity(d);
            for g in &generators {
                dlogs.push(exponent_vector(g, &components, budget.bsgs_steps)?);
            }
            Ok(Instance {
                kind,
                modulus: Some(modulus),
                bits,
                generators,
                u_elements: Vec::new(),
                seed,
                order_factorization,
                ground_truth: Some(GroundTruth::Concrete { components, dlogs }),
                square_roots,
            })
        }
    }
}

const GEN_ATTEMPTS: u32 = 1 << 14;

fn sample_modulus<R: Rng>(
    kind: InstanceKind,
    bits: u64,
    d: usize,
    rng: &mut R,
) -> Result<BigUint, NumTheoryError> {
    let small: Vec<BigUint> = first_primes(d).into_iter().map(BigUint::from).collect();
    let coprime_small = |n: &BigUint| small.iter().all(|p| n.gcd(p).is_one());
    for _ in 0..GEN_ATTEMPTS {
        let cand = match kind {
            InstanceKind::RsaSemiprime => {
                let p = random_prime(bits - bits / 2, rng);
                let q = random_prime((bits / 2).max(2), rng);
                if p == q {
                    continue;
                }
                p * q
            }
            InstanceKind::SafePrimeGroup => {
                let r = random_prime(bits - 1, rng);
                let p = BigUint::from(2u32) * r + BigUint::one();
                if !is_prime(&p) {
                    continue;
                }
                p
            }
            InstanceKind::SchnorrGroup => {
                let r = random_prime((bits / 2).max(3), rng);
                let two_r = BigUint::from(2u32) * &r;
                let k_min = ((BigUint::one() << (bits - 1)) / &two_r) + BigUint::one();
                let k_max = (BigUint::one() << bits) / &two_r;
                if k_max <= k_min || k_min < BigUint::from(2u32) {
                    continue;
                }
                let k = rng.gen_biguint_range(&k_min, &k_max);
                let p = two_r * k + BigUint::one();
                if !is_prime(&p) {
                    continue;
                }
                p
            }
            InstanceKind::GenericModulus => {
                let parts = if bits >= 24 && rng.gen_bool(0.5) { 3 } else { 2 };
                let mut primes_v: Vec<BigUint> = Vec::new();
                let mut ok = true;
                let mut rem = bits;
                for i in 0..parts {
                    let share = if i + 1 == parts {
                        rem
                    } else {
                        rem / (parts - i) as u64
                    };
                    if share < 4 {
                        ok = false;
                        break;
                    }
                    let p = random_prime(share, rng);
                    if primes_v.contains(&p) {
                        ok = false;
                        break;
                    }
                    rem -= share;
                    primes_v.push(p);
                }
                if !ok {
                    continue;
                }
                primes_v.iter().product()
            }
            InstanceKind::SyntheticCyclic => unreachable!(),
        };
        if cand.bits() == bits && coprime_small(&cand) {
            return Ok(cand);
        }
    }
    Err(NumTheoryError::TooSmall)
}

/// Random integer with exactly `bits` bits and a fully known factorization,
/// built as a product of random primes. Not uniform over the range, but
/// factored sampling is what lets synthetic orders scale to thousands of
/// bits without a factoring step.
fn random_factored_integer<R: Rng>(bits: u64, rng: &mut R) -> (BigUint, Vec<(BigUint, u32)>) {
    loop {
        let mut r = BigUint::one();
        let mut primes_acc: Vec<BigUint> = Vec::new();
        let mut stuck = 0u32;
        while r.bits() < bits && stuck < 64 {
            let remaining = bits - r.bits();
            let size = rng.gen_range(2..=remaining.clamp(2, 28));
            let p = random_prime(size, rng);
            if (&r * &p).bits() > bits {
                stuck += 1;
                continue;
            }
            r *= &p;
            primes_acc.push(p);
        }
        if r.bits() == bits {
            primes_acc.sort();
            let mut fact: Vec<(BigUint, u32)> = Vec::new();
            for p in primes_acc {
                match fact.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => fact.push((p, 1)),
                }
            }
            return (r, fact);
        }
    }
}

/// Discrete-log ground-truth oracle: `e` with `g^e = x`, in `[0, ord(g))`.
pub fn dlog_oracle(
    g: &BigUint,
    x: &BigUint,
    instance: &Instance,
    budget: &OracleBudget,
) -> Result<BigUint, NumTheoryError> {
    match &instance.modulus {
        Some(n) => dlog::dlog(g, x, n, &instance.order_factorization, budget.bsgs_steps),
        None => {
            let order = instance.group_order();
            solve_linear_congruence(&(g % &order), &(x % &order), &order)
                .ok_or(NumTheoryError::NotInSubgroup)
        }
    }
}

/// Least `r >= 1` with `g^r = 1`.
pub fn element_order(g: &BigUint, instance: &Instance) -> Result<BigUint, NumTheoryError> {
    match &instance.modulus {
        Some(n) => Ok(dlog::element_order(g, n, &instance.order_factorization)),
        None => {
            let order = instance.group_order();
            Ok(&order / (g % &order).gcd(&order))
        }
    }
}

// ---------------------------------------------------------------------------
// serialization (decimal-string big integers, fixed field names)

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    kind: InstanceKind,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::encode::opt_biguint")]
    modulus: Option<BigUint>,
    n: u64,
    generators: Vec<String>,
    u_elements: Vec<String>,
    order_factorization: Vec<(String, u32)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ground_truth_dlogs: Option<Vec<Vec<String>>>,
    seed: u64,
}

impl Instance {
    pub fn to_json_string(&self) -> String {
        let dlogs = self.ground_truth.as_ref().map(|gt| match gt {
            GroundTruth::Concrete { dlogs, .. } => dlogs
                .iter()
                .map(|row| row.iter().map(|x| x.to_string()).collect())
                .collect(),
            GroundTruth::Synthetic { .. } => self
                .elements()
                .iter()
                .map(|a| vec![a.to_string()])
                .collect(),
        });
        let json = InstanceJson {
            kind: self.kind,
            modulus: self.modulus.clone(),
            n: self.bits,
            generators: self.generators.iter().map(|x| x.to_string()).collect(),
            u_elements: self.u_elements.iter().map(|x| x.to_string()).collect(),
            order_factorization: self
                .order_factorization
                .iter()
                .map(|(p, e)| (p.to_string(), *e))
                .collect(),
            ground_truth_dlogs: dlogs,
            seed: self.seed,
        };
        serde_json::to_string_pretty(&json).expect("instance serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Instance, NumTheoryError> {
        let parsed: InstanceJson =
            serde_json::from_str(s).map_err(|e| NumTheoryError::BadFile(e.to_string()))?;
        let parse_vec = |v: &[String]| -> Result<Vec<BigUint>, NumTheoryError> {
            v.iter()
                .map(|s| {
                    BigUint::from_str_radix(s, 10)
                        .map_err(|e| NumTheoryError::BadFile(e.to_string()))
                })
                .collect()
        };
        let generators = parse_vec(&parsed.generators)?;
        let u_elements = parse_vec(&parsed.u_elements)?;
        let order_factorization: Vec<(BigUint, u32)> = parsed
            .order_factorization
            .iter()
            .map(|(p, e)| {
                BigUint::from_str_radix(p, 10)
                    .map(|p| (p, *e))
                    .map_err(|e| NumTheoryError::BadFile(e.to_string()))
            })
            .collect::<Result<_, _>>()?;
        let dlogs: Option<Vec<Vec<BigUint>>> = parsed
            .ground_truth_dlogs
            .as_ref()
            .map(|m| m.iter().map(|row| parse_vec(row)).collect::<Result<_, _>>())
            .transpose()?;

        let ground_truth = match (&parsed.modulus, dlogs) {
            (Some(modulus), Some(dlogs)) => {
                let components = decompose(modulus)?;
                if group_order_factorization(&components) != order_factorization {
                    return Err(NumTheoryError::BadFile(
                        "order factorization does not match the modulus".into(),
                    ));
                }
                let expected = generators.len() + u_elements.len();
                if dlogs.len() != expected || dlogs.iter().any(|r| r.len() != components.len()) {
                    return Err(NumTheoryError::BadFile(
                        "ground truth dlog shape mismatch".into(),
                    ));
                }
                for (elem, row) in generators.iter().chain(&u_elements).zip(&dlogs) {
                    for (c, e) in components.iter().zip(row) {
                        if c.generator.modpow(e, &c.prime_power) != elem % &c.prime_power {
                            return Err(NumTheoryError::BadFile(
                                "ground truth dlogs do not reproduce the elements".into(),
                            ));
                        }
                    }
                }
                Some(GroundTruth::Concrete { components, dlogs })
            }
            (None, _) => {
                let order: BigUint = order_factorization.iter().map(|(p, e)| p.pow(*e)).product();
                if order <= BigUint::one() {
                    return Err(NumTheoryError::BadFile("synthetic order must exceed 1".into()));
                }
                Some(GroundTruth::Synthetic { order })
            }
            (Some(_), None) => None,
        };

        let mut inst = Instance {
            kind: parsed.kind,
            modulus: parsed.modulus,
            bits: parsed.n,
            generators,
            u_elements,
            seed: parsed.seed,
            order_factorization,
            ground_truth,
            square_roots: None,
        };
        inst.square_roots = detect_square_roots(&inst);
        Ok(inst)
    }
}

/// When the generators are squares of the first primes, recover the roots.
fn detect_square_roots(inst: &Instance) -> Option<Vec<BigUint>> {
    let n = inst.modulus.as_ref()?;
    let roots = small_prime_elements(n, inst.generators.len(), &[]).ok()?;
    let matches = roots
        .iter()
        .zip(&inst.generators)
        .all(|(b, a)| (b * b) % n == *a);
    matches.then_some(roots)
}
