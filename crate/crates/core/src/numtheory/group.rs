//! Public group evaluation: the only view of an instance that the solver
//! path is allowed to touch.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::arith::modpow_signed;

/// The ambient group. Concrete instances live in `(Z/N)^*` written
/// multiplicatively; synthetic instances are an abstract cyclic group of
/// known order whose elements are exponents over an implicit generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Group {
    Concrete { modulus: BigUint },
    Synthetic { order: BigUint },
}

impl Group {
    pub fn identity(&self) -> BigUint {
        match self {
            Group::Concrete { .. } => BigUint::one(),
            Group::Synthetic { .. } => BigUint::zero(),
        }
    }

    pub fn is_identity(&self, v: &BigUint) -> bool {
        v == &self.identity()
    }

    /// `elem^exp` for a signed exponent.
    pub fn pow(&self, elem: &BigUint, exp: &BigInt) -> BigUint {
        match self {
            Group::Concrete { modulus } => modpow_signed(elem, exp, modulus)
                .expect("group elements are units"),
            Group::Synthetic { order } => {
                let prod = BigInt::from(elem.clone()) * exp;
                let order_int = BigInt::from(order.clone());
                prod.mod_floor(&order_int)
                    .to_biguint()
                    .expect("mod_floor of positive modulus")
            }
        }
    }

    pub fn compose(&self, a: &BigUint, b: &BigUint) -> BigUint {
        match self {
            Group::Concrete { modulus } => (a * b) % modulus,
            Group::Synthetic { order } => (a + b) % order,
        }
    }
}

/// Solver-facing view of an instance: the group plus the ordered element
/// list that relation-vector coordinates refer to. Carries no ground truth.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub group: Group,
    pub elements: Vec<BigUint>,
}

impl EvalContext {
    /// Evaluates the word `prod elements[i]^{z_i}` in the group.
    pub fn eval_word(&self, z: &[BigInt]) -> BigUint {
        assert_eq!(z.len(), self.elements.len(), "exponent vector length");
        let mut acc = self.group.identity();
        for (elem, exp) in self.elements.iter().zip(z) {
            if exp.is_zero() {
                continue;
            }
            let term = self.group.pow(elem, exp);
            acc = self.group.compose(&acc, &term);
        }
        acc
    }

    /// True iff `z` is a relation: the word evaluates to the identity.
    pub fn is_relation(&self, z: &[BigInt]) -> bool {
        self.group.is_identity(&self.eval_word(z))
    }

    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

/// Sign-normalizes a vector so its first nonzero coordinate is positive.
pub fn sign_normalize(v: &mut [BigInt]) {
    if let Some(first) = v.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in v.iter_mut() {
                *x = -&*x;
            }
        }
    }
}
