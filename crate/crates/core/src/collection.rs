//! Admissible collections `{ρ_σ, P(τ,σ)}` and their validation.
//!
//! For every maximal cone `σ` a collection carries a torus homomorphism
//! `ρ_σ: T -> G`, and for every ordered pair of maximal cones a constant
//! `P(τ,σ) ∈ G`. It is admissible when
//!
//! 1. `ρ_σ` factors through the projection onto the stabilizer subtorus `T_σ`;
//! 2. `ρ_τ(t) P(τ,σ) ρ_σ(t)^{-1}` is a `G`-valued regular function on `X_{σ∩τ}`;
//! 3. `P(σ,σ) = 1`;
//! 4. `P(τ,σ) P(σ,δ) P(δ,τ) = 1` for every triple.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

use crate::charmat::{group_member, CharError, GroupTag, LaurentMatrix, TorusHom};
use crate::fan::{intersect, Cone, ConeSplit, Fan, FanError};
use crate::lattice::{dot, Sublattice};
use crate::qmat::QMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CollectionError {
    #[error("no homomorphism given for maximal cone {0}")]
    MissingRho(usize),
    #[error("no transition element given for pair ({0},{1})")]
    MissingTransition(usize, usize),
    #[error("cone {0} is not a maximal cone of the fan")]
    NotMaximal(usize),
    #[error("homomorphism at cone {cone}: {source}")]
    BadRho { cone: usize, source: CharError },
    #[error("homomorphism at cone {0} does not take values in the structure group")]
    RhoNotInGroup(usize),
    #[error("P({0},{1}) is not an element of the structure group")]
    TransitionNotInGroup(usize, usize),
    #[error("collection is not admissible: {0}")]
    NotAdmissible(ValidationReport),
    #[error(transparent)]
    Fan(#[from] FanError),
}

/// Which defining condition a violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition {
    Factors = 1,
    Regular = 2,
    Unit = 3,
    Cocycle = 4,
}

impl Condition {
    pub fn id(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub condition: Condition,
    /// A cone, an ordered pair or an ordered triple of maximal-cone indices.
    pub cones: Vec<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition {} at ({}): {}",
            self.condition.id(),
            self.cones.iter().join(","),
            self.detail
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(mut violations: Vec<Violation>) -> Self {
        violations.sort();
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    /// Distinct condition ids that were violated.
    pub fn conditions(&self) -> BTreeSet<u8> {
        self.violations.iter().map(|v| v.condition.id()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "admissible");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "; {v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct AdmissibleCollection {
    fan: Fan,
    group: GroupTag,
    rho: BTreeMap<usize, TorusHom>,
    p: BTreeMap<(usize, usize), QMatrix>,
    splits: BTreeMap<usize, ConeSplit>,
    overridden: BTreeSet<usize>,
}

impl AdmissibleCollection {
    /// Assembles a collection. Checks totality, shapes and group membership;
    /// the admissibility conditions are left to [`validate`](Self::validate).
    pub fn new(
        fan: Fan,
        group: GroupTag,
        rho: BTreeMap<usize, TorusHom>,
        p: BTreeMap<(usize, usize), QMatrix>,
    ) -> Result<Self, CollectionError> {
        let n = group.n();
        let rank = fan.ambient_rank();
        let maximal = fan.maximal().to_vec();
        for &s in rho.keys() {
            if !fan.is_maximal(s) {
                return Err(CollectionError::NotMaximal(s));
            }
        }
        for &(t, s) in p.keys() {
            for c in [t, s] {
                if !fan.is_maximal(c) {
                    return Err(CollectionError::NotMaximal(c));
                }
            }
        }
        let torus = Cone::zero(rank);
        for &s in &maximal {
            let h = rho.get(&s).ok_or(CollectionError::MissingRho(s))?;
            if h.n() != n {
                return Err(CollectionError::BadRho {
                    cone: s,
                    source: CharError::Size {
                        expected: n,
                        got: h.n(),
                    },
                });
            }
            if h.rank() != rank {
                return Err(CollectionError::BadRho {
                    cone: s,
                    source: CharError::Rank {
                        expected: rank,
                        got: h.rank(),
                    },
                });
            }
            if !group_member(&h.to_matrix(), group, &torus) {
                return Err(CollectionError::RhoNotInGroup(s));
            }
        }
        for (&t, &s) in maximal.iter().cartesian_product(&maximal) {
            let m = p.get(&(t, s)).ok_or(CollectionError::MissingTransition(t, s))?;
            if !group.contains_constant(m) {
                return Err(CollectionError::TransitionNotInGroup(t, s));
            }
        }
        let splits = maximal
            .iter()
            .map(|&s| (s, ConeSplit::canonical(fan.cone(s))))
            .collect();
        Ok(AdmissibleCollection {
            fan,
            group,
            rho,
            p,
            splits,
            overridden: BTreeSet::new(),
        })
    }

    /// `ρ_σ` trivial and `P ≡ 1`.
    pub fn trivial(fan: Fan, group: GroupTag) -> Self {
        let n = group.n();
        let rank = fan.ambient_rank();
        let maximal = fan.maximal().to_vec();
        let rho = maximal.iter().map(|&s| (s, TorusHom::trivial(n, rank))).collect();
        let p = maximal
            .iter()
            .cartesian_product(&maximal)
            .map(|(&t, &s)| ((t, s), QMatrix::identity(n)))
            .collect();
        AdmissibleCollection::new(fan, group, rho, p).expect("trivial data is well formed")
    }

    /// Replaces the canonical complement `N'` used for condition (1) at `sigma`.
    pub fn with_splitting(mut self, sigma: usize, n_prime: Sublattice) -> Result<Self, CollectionError> {
        if !self.fan.is_maximal(sigma) {
            return Err(CollectionError::NotMaximal(sigma));
        }
        let split = ConeSplit::with_complement(self.fan.cone(sigma), n_prime)?;
        self.splits.insert(sigma, split);
        self.overridden.insert(sigma);
        Ok(self)
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn group(&self) -> GroupTag {
        self.group
    }

    pub fn n(&self) -> usize {
        self.group.n()
    }

    pub fn maximal(&self) -> &[usize] {
        self.fan.maximal()
    }

    pub fn rho(&self, sigma: usize) -> &TorusHom {
        &self.rho[&sigma]
    }

    pub fn rho_map(&self) -> &BTreeMap<usize, TorusHom> {
        &self.rho
    }

    pub fn p(&self, tau: usize, sigma: usize) -> &QMatrix {
        &self.p[&(tau, sigma)]
    }

    pub fn p_map(&self) -> &BTreeMap<(usize, usize), QMatrix> {
        &self.p
    }

    pub fn split(&self, sigma: usize) -> &ConeSplit {
        &self.splits[&sigma]
    }

    /// Cones whose splitting was supplied by the caller.
    pub fn overridden_splittings(&self) -> &BTreeSet<usize> {
        &self.overridden
    }

    /// Same data with a different group tag (membership rechecked).
    pub fn retagged(&self, group: GroupTag) -> Result<Self, CollectionError> {
        self.rebuild(group, self.rho.clone(), self.p.clone())
    }

    /// New data over the same fan, keeping any splitting overrides.
    pub(crate) fn rebuild(
        &self,
        group: GroupTag,
        rho: BTreeMap<usize, TorusHom>,
        p: BTreeMap<(usize, usize), QMatrix>,
    ) -> Result<Self, CollectionError> {
        let mut c = AdmissibleCollection::new(self.fan.clone(), group, rho, p)?;
        c.splits = self.splits.clone();
        c.overridden = self.overridden.clone();
        Ok(c)
    }

    /// Condition (1): every weight of `ρ_σ` vanishes on `N'`.
    pub fn check_factors(&self, sigma: usize) -> bool {
        let split = &self.splits[&sigma];
        let kernel = split.n_prime.basis().row_vectors();
        self.rho[&sigma]
            .weights()
            .iter()
            .all(|u| kernel.iter().all(|w| dot(u, w).is_zero()))
    }

    /// `ρ_τ(t) P(τ,σ) ρ_σ(t)^{-1}` with like characters collected.
    pub fn transition_matrix(&self, tau: usize, sigma: usize) -> LaurentMatrix {
        let rank = self.fan.ambient_rank();
        self.rho[&tau]
            .to_matrix()
            .mul(&LaurentMatrix::constant(&self.p[&(tau, sigma)], rank))
            .mul(&self.rho[&sigma].inverse_matrix())
    }

    /// Condition (2) for the ordered pair `(tau, sigma)`.
    pub fn check_regular_pair(&self, tau: usize, sigma: usize) -> bool {
        let overlap = intersect(self.fan.cone(tau), self.fan.cone(sigma));
        group_member(&self.transition_matrix(tau, sigma), self.group, &overlap)
    }

    /// Condition (3).
    pub fn check_units(&self) -> Vec<Violation> {
        self.maximal()
            .iter()
            .filter(|&&s| !self.p[&(s, s)].is_identity())
            .map(|&s| Violation {
                condition: Condition::Unit,
                cones: vec![s],
                detail: format!("P({s},{s}) = {} is not the identity", self.p[&(s, s)]),
            })
            .collect()
    }

    /// Condition (4) for the ordered triple.
    pub fn check_cocycle(&self, tau: usize, sigma: usize, delta: usize) -> bool {
        self.p[&(tau, sigma)]
            .mul(&self.p[&(sigma, delta)])
            .mul(&self.p[&(delta, tau)])
            .is_identity()
    }

    /// Runs all four conditions and reports every failure.
    pub fn validate(&self) -> ValidationReport {
        let maximal = self.maximal().to_vec();
        let mut violations = Vec::new();
        for &s in &maximal {
            if !self.check_factors(s) {
                let w = self.rho[&s]
                    .weights()
                    .iter()
                    .map(|u| format!("({})", u.iter().join(",")))
                    .join(", ");
                violations.push(Violation {
                    condition: Condition::Factors,
                    cones: vec![s],
                    detail: format!(
                        "weights [{w}] do not vanish on the complement {}",
                        self.splits[&s].n_prime.basis()
                    ),
                });
            }
        }
        for (&t, &s) in maximal.iter().cartesian_product(&maximal) {
            if !self.check_regular_pair(t, s) {
                violations.push(Violation {
                    condition: Condition::Regular,
                    cones: vec![t, s],
                    detail: format!(
                        "ρ_{t} P({t},{s}) ρ_{s}^-1 = {} is not a {} valued regular function on the overlap",
                        self.transition_matrix(t, s),
                        self.group
                    ),
                });
            }
        }
        violations.extend(self.check_units());
        for ((&t, &s), &d) in maximal.iter().cartesian_product(&maximal).cartesian_product(&maximal) {
            if !self.check_cocycle(t, s, d) {
                violations.push(Violation {
                    condition: Condition::Cocycle,
                    cones: vec![t, s, d],
                    detail: format!("P({t},{s}) P({s},{d}) P({d},{t}) is not the identity"),
                });
            }
        }
        ValidationReport::from_violations(violations)
    }

    /// The transition function `φ_{τσ}(t) = ρ_τ(t) P(τ,σ) ρ_σ(t)^{-1}` of a valid collection.
    pub fn transition_cocycle(&self, tau: usize, sigma: usize) -> Result<LaurentMatrix, CollectionError> {
        let report = self.validate();
        if !report.ok {
            return Err(CollectionError::NotAdmissible(report));
        }
        Ok(self.transition_matrix(tau, sigma))
    }

    /// All transition functions over ordered pairs, validating once.
    pub fn transition_cocycles(&self) -> Result<BTreeMap<(usize, usize), LaurentMatrix>, CollectionError> {
        let report = self.validate();
        if !report.ok {
            return Err(CollectionError::NotAdmissible(report));
        }
        let maximal = self.maximal();
        Ok(maximal
            .iter()
            .cartesian_product(maximal)
            .map(|(&t, &s)| ((t, s), self.transition_matrix(t, s)))
            .collect())
    }
}

impl PartialEq for AdmissibleCollection {
    fn eq(&self, other: &Self) -> bool {
        self.fan == other.fan
            && self.group == other.group
            && self.rho == other.rho
            && self.p == other.p
            && self.splits == other.splits
    }
}

impl Eq for AdmissibleCollection {}
