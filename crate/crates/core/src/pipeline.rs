//! The full tower of surfaces for one odd `n`, and the certificate chain
//! run against it for each multiple `m`.
//!
//! ```text
//!   Y' --rho--> Y <--f-- X <--pi-- X~
//! ```
//!
//! `Y = E x E` carries `A_n = F + G_n` and `R = F + G`. `Y'` blows up three
//! of the four points of `F ∩ G_n`; `X` is the double cover branched in
//! `|2R|`; `X~` blows up one preimage of each of those three points. The
//! divisor under study is `D_n = pi^* f^* A_n - 2(E1 + E2 + E3)`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::constructions::{
    blow_up, build_abelian_surface, check_odd_parameter, double_cover, strict_transform, MorphismMap,
    PointSpec,
};
use crate::error::{Error, Result};
use crate::expr::Scope;
use crate::lattice::{DivisorClass, SurfaceModel};
use crate::linsys::{
    self, blowup_section_transfer, certify_not_effective, cover_section_split, fixed_part_forcing,
    h0_unique_member, ForcingTrace, Rule, RuleApplication, SectionCount, SectionCountResult,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest `m` with `4(m - 1) - n^2 < 0`, i.e. `(n^2 + 3) / 4` for odd `n`.
pub fn m_threshold(n: u64) -> Result<u64> {
    check_odd_parameter(n)?;
    let n = BigInt::from(n);
    let t: BigInt = (&n * &n + 3u32) / 4u32;
    t.to_u64()
        .ok_or_else(|| Error::InvalidParameter(format!("threshold {t} does not fit in u64")))
}

/// Every surface, map and named class for one value of `n`.
#[derive(Debug, Clone)]
pub struct Tower {
    pub n: u64,
    pub y: SurfaceModel,
    pub y_prime: SurfaceModel,
    pub rho: MorphismMap,
    pub x: SurfaceModel,
    pub f: MorphismMap,
    pub x_tilde: SurfaceModel,
    pub pi: MorphismMap,
    /// `f ∘ pi`, with pullback matrix the product of the two.
    pub pi_f: MorphismMap,
    pub class_f: DivisorClass,
    pub class_g: DivisorClass,
    pub gamma: DivisorClass,
    pub a_n: DivisorClass,
    pub r: DivisorClass,
    pub f_prime: DivisorClass,
    pub gamma_prime: DivisorClass,
    pub l_n: DivisorClass,
    pub d_n: DivisorClass,
}

const S_CITATION: &str =
    "a nonzero point of {0} x E[2]; F and G_n cross transversally there and G misses it";
const Q_CITATION: &str = "a preimage of p_i; f is etale there since B misses S, so f^*A_n has an \
     ordinary node (multiplicity 2)";

impl Tower {
    pub fn new(n: u64) -> Result<Tower> {
        let y = build_abelian_surface(n)?;
        let class = |m: &SurfaceModel, l: &str| {
            m.lookup(l)
                .ok_or_else(|| Error::InvalidModel(format!("`{l}` missing from {}", m.name())))
        };
        let class_f = class(&y, "F")?;
        let class_g = class(&y, "G")?;
        let gamma = class(&y, "G_n")?;
        let a_n = class_f.add(&gamma)?;
        let r = class_f.add(&class_g)?;

        let s: Vec<PointSpec> = (1..=3)
            .map(|i| {
                PointSpec::new(format!("p{i}"), format!("e{i}"))
                    .with_multiplicity("F", 1)
                    .with_multiplicity("G_n", 1)
                    .with_multiplicity("G", 0)
                    .cited(S_CITATION)
            })
            .collect();
        let (y_prime, rho) = blow_up(&y, "rho", &s)?;
        let y_prime = y_prime.with_name("Y'");

        let (x, f) = double_cover(&y, "f", &r)?;
        let x = x.with_name("X");
        let q: Vec<PointSpec> = (1..=3)
            .map(|i| {
                PointSpec::new(format!("q{i}"), format!("E{i}"))
                    .with_multiplicity("f^F", 1)
                    .with_multiplicity("f^G_n", 1)
                    .with_multiplicity("f^G", 0)
                    .cited(Q_CITATION)
            })
            .collect();
        let (x_tilde, pi) = blow_up(&x, "pi", &q)?;
        let x_tilde = x_tilde.with_name("X~");
        let pi_f = pi.compose(&f)?;

        let f_prime = class(&y_prime, "F'")?;
        let gamma_prime = class(&y_prime, "G_n'")?;
        let two = vec![BigInt::from(2); 3];
        let l_n = strict_transform(&rho, &a_n, &two)?;
        let d_n = strict_transform(&pi, &f.pullback(&a_n)?, &two)?;

        Ok(Tower {
            n,
            y,
            y_prime,
            rho,
            x,
            f,
            x_tilde,
            pi,
            pi_f,
            class_f,
            class_g,
            gamma,
            a_n,
            r,
            f_prime,
            gamma_prime,
            l_n,
            d_n,
        })
    }

    /// Names usable in expressions: `F G G_n R A` on `Y`, `F' G' G_n' L`
    /// and `e1..e3` on `Y'`, `D` and `E1..E3` on `X~`, plus every basis and
    /// registry label of all four models.
    pub fn scope(&self) -> Scope<'_> {
        let mut scope = Scope::new();
        for m in [&self.y, &self.y_prime, &self.x, &self.x_tilde] {
            scope = scope.with_model(m);
        }
        scope
            .bind("R", self.r.clone())
            .bind("A", self.a_n.clone())
            .bind("L", self.l_n.clone())
            .bind("D", self.d_n.clone())
    }

    /// Gram identities that must hold for any correct build; a non-empty
    /// result means an implementation bug.
    fn consistency_problems(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let sum = self.f_prime.add(&self.gamma_prime)?;
        if sum != self.l_n {
            out.push(format!(
                "L_n = {} differs from F' + G_n' = {}",
                self.y_prime.render(&self.l_n),
                self.y_prime.render(&sum)
            ));
        }
        let direct = self.pi_f.pullback(&self.a_n)?;
        let mut via_composite = direct;
        for e in self.x_tilde.exceptional_classes() {
            via_composite = via_composite.sub(&e.scale(2))?;
        }
        if via_composite != self.d_n {
            out.push("D_n through the composite pullback differs from the stepwise D_n".into());
        }
        let pair_ok = self.x_tilde.self_int(&self.pi_f.pullback(&self.a_n)?)?
            == BigInt::from(2) * self.y.self_int(&self.a_n)?;
        if !pair_ok {
            out.push("composite pullback does not scale A_n^2 by 2".into());
        }
        Ok(out)
    }

    /// Forcing for `m L_n` on `Y'` alone.
    pub fn force_on_y_prime(&self, m: u64) -> Result<ForcingTrace> {
        fixed_part_forcing(&self.y_prime, &self.l_n.scale(m), None)
    }

    /// Run the certificate chain for `h0(X~, m D_n)`.
    pub fn verify(&self, m: u64) -> Result<InstanceResult> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        let a_n_squared = self.y.self_int(&self.a_n)?;
        let d_n_squared = self.x_tilde.self_int(&self.d_n)?;
        let mut result = InstanceResult {
            n: self.n,
            m,
            a_n_squared: a_n_squared.clone(),
            d_n_squared: d_n_squared.clone(),
            certificate_value: BigInt::default(),
            h0: SectionCountResult::unknown(Vec::new()),
            forcing: None,
            status: InstanceStatus::Failed(String::new()),
        };
        let fail = |mut r: InstanceResult, detail: String| {
            r.status = InstanceStatus::Failed(detail);
            Ok(r)
        };

        let problems = self.consistency_problems()?;
        if !problems.is_empty() {
            return fail(result, problems.join("; "));
        }

        let m_a = self.a_n.scale(m);
        let m_d = self.d_n.scale(m);
        let mut chain = Vec::new();

        // X~ -> X: sections of m D_n are sections of f^*(m A_n) vanishing to order 2m at Q
        let (down_x, orders_q) = blowup_section_transfer(&self.pi, &self.x_tilde, &m_d)?;
        let expected_down = self.f.pullback(&m_a)?;
        if down_x != expected_down {
            let detail = format!(
                "pi-transfer of m D_n gives {}, expected {}",
                self.x.render(&down_x),
                self.x.render(&expected_down)
            );
            return fail(result, detail);
        }
        chain.push(
            RuleApplication::new(Rule::BlowupSectionTransfer, linsys::CITE_BLOWUP_TRANSFER)
                .with("surface", "X~")
                .with("class", self.x_tilde.render(&m_d))
                .with("downstairs", self.x.render(&down_x))
                .with("points", "q1 q2 q3")
                .with("vanishing_orders", orders_q.clone()),
        );

        // X -> Y: split f_* into the two summands
        let (first, second) = cover_section_split(&self.f, &m_a)?;
        chain.push(
            RuleApplication::new(Rule::CoverSectionSplit, linsys::CITE_PROJECTION_FORMULA)
                .with("M", self.y.render(&first))
                .with("M_minus_R", self.y.render(&second)),
        );

        // the second summand has no sections
        match certify_not_effective(&self.y, &second, "G_n") {
            Ok(cert) => {
                result.certificate_value = cert.pairing_value().clone();
                chain.push(
                    RuleApplication::new(Rule::AbelianNonEffectivity, cert.citation())
                        .with("class", self.y.render(cert.target()))
                        .with("witness", cert.witness_label())
                        .with("pairing", cert.pairing_value()),
                );
            }
            Err(Error::NotCertified { pairing, .. }) => {
                result.certificate_value = pairing.clone();
                chain.push(
                    RuleApplication::new(Rule::AbelianNonEffectivity, linsys::CITE_ABELIAN_NEF)
                        .with("class", self.y.render(&second))
                        .with("witness", "G_n")
                        .with("pairing", pairing)
                        .with("outcome", "not certified"),
                );
                result.h0 = SectionCountResult::unknown(chain);
                result.status = InstanceStatus::BeyondThreshold;
                return Ok(result);
            }
            Err(e) => return Err(e),
        }

        // Y' -> Y: the surviving summand is sections of m L_n on Y'
        let m_l = self.l_n.scale(m);
        let (down_y, orders_s) = blowup_section_transfer(&self.rho, &self.y_prime, &m_l)?;
        if down_y != m_a || orders_s != orders_q {
            let detail = format!(
                "rho-transfer of m L_n gives {} with orders {:?}, expected {} with {:?}",
                self.y.render(&down_y),
                orders_s,
                self.y.render(&m_a),
                orders_q
            );
            return fail(result, detail);
        }
        chain.push(
            RuleApplication::new(Rule::BlowupSectionTransfer, linsys::CITE_BLOWUP_TRANSFER)
                .with("surface", "Y'")
                .with("class", self.y_prime.render(&m_l))
                .with("downstairs", self.y.render(&down_y))
                .with("points", "p1 p2 p3")
                .with("vanishing_orders", orders_s),
        );

        let trace = fixed_part_forcing(&self.y_prime, &m_l, None)?;
        let h0 = h0_unique_member(&self.y_prime, &trace);
        let reason = match &trace.conclusion {
            linsys::ForcingConclusion::Inconclusive(r) => Some(r.to_string()),
            linsys::ForcingConclusion::UniqueMember(_) => None,
        };
        result.forcing = Some(trace);
        if let Some(reason) = reason {
            result.h0 = SectionCountResult::unknown(chain);
            return fail(result, format!("forcing on Y' inconclusive: {reason}"));
        }
        result.h0 = h0.preceded_by(chain);

        let d_ok = d_n_squared == BigInt::from(4);
        let a_ok = a_n_squared == BigInt::from(8);
        let cert_ok = result.certificate_value.is_negative();
        let h0_ok = result.h0.value() == SectionCount::Exactly(1);
        if !(d_ok && a_ok && cert_ok && h0_ok) {
            let detail = format!(
                "A_n^2 = {a_n_squared}, D_n^2 = {d_n_squared}, certificate {}, h0 {:?}",
                result.certificate_value,
                result.h0.value()
            );
            return fail(result, detail);
        }
        result.status = InstanceStatus::Verified;
        Ok(result)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceStatus {
    Verified,
    BeyondThreshold,
    Failed(String),
}

impl InstanceStatus {
    pub fn label(&self) -> &'static str {
        match self {
            InstanceStatus::Verified => "Verified",
            InstanceStatus::BeyondThreshold => "BeyondThreshold",
            InstanceStatus::Failed(_) => "Failed",
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub n: u64,
    pub m: u64,
    pub a_n_squared: BigInt,
    pub d_n_squared: BigInt,
    /// `(m A_n - R) . G_n`, evaluated on the lattice.
    pub certificate_value: BigInt,
    pub h0: SectionCountResult,
    pub forcing: Option<ForcingTrace>,
    pub status: InstanceStatus,
}

/// Forcing on `Y'` for an `m` past the threshold, where only the statement
/// about `Y'` is claimed.
#[derive(Debug, Clone)]
pub struct YPrimeCheck {
    pub m: u64,
    pub h0: SectionCount,
    pub trace: ForcingTrace,
}

#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub n: u64,
    pub threshold: u64,
    pub m_max: u64,
    pub instances: Vec<InstanceResult>,
    pub y_prime_only: Vec<YPrimeCheck>,
    pub summary: String,
    pub tool_version: String,
}

impl VerificationReport {
    pub fn count(&self, status: &str) -> usize {
        self.instances
            .iter()
            .filter(|i| i.status.label() == status)
            .count()
    }

    pub fn has_failures(&self) -> bool {
        self.count("Failed") > 0
    }
}

pub fn verify_instance(n: u64, m: u64) -> Result<InstanceResult> {
    Tower::new(n)?.verify(m)
}

pub fn verify_all(n: u64) -> Result<VerificationReport> {
    verify_all_with(n, None)
}

/// Instances `m = 1 ..= m_max + 1`, where `m_max` defaults to the threshold.
pub fn verify_all_with(n: u64, m_max: Option<u64>) -> Result<VerificationReport> {
    let threshold = m_threshold(n)?;
    let m_max = m_max.unwrap_or(threshold);
    let tower = Tower::new(n)?;
    let instances: Vec<InstanceResult> = (1..=m_max + 1)
        .into_par_iter()
        .map(|m| tower.verify(m))
        .collect::<Result<_>>()?;
    let y_prime_only = (m_max + 1..=m_max + 3)
        .map(|m| {
            let trace = tower.force_on_y_prime(m)?;
            let h0 = h0_unique_member(&tower.y_prime, &trace).value();
            Ok(YPrimeCheck { m, h0, trace })
        })
        .collect::<Result<_>>()?;

    let verified = instances
        .iter()
        .filter(|i| i.status == InstanceStatus::Verified)
        .count();
    let failed = instances
        .iter()
        .filter(|i| matches!(i.status, InstanceStatus::Failed(_)))
        .count();
    let summary = if failed > 0 {
        format!("n = {n}: {failed} instance(s) failed internal consistency checks")
    } else {
        let top = instances
            .iter()
            .take_while(|i| i.status == InstanceStatus::Verified)
            .count();
        format!(
            "n = {n}: D_n^2 = 4 > 0 and h0(m D_n) = 1 for every 1 <= m <= {top} \
             ({verified} verified); so no uniform m1 <= {top} gives h0(m1 D) >= 2 \
             for all D with D^2 > 0 and h0(D) = 1"
        )
    };
    Ok(VerificationReport {
        n,
        threshold,
        m_max,
        instances,
        y_prime_only,
        summary,
        tool_version: TOOL_VERSION.to_string(),
    })
}

/// One report per `n`, in input order. Every `n` is validated first.
pub fn sweep(n_list: &[u64]) -> Result<Vec<VerificationReport>> {
    sweep_with(n_list, None)
}

pub fn sweep_with(n_list: &[u64], m_max: Option<u64>) -> Result<Vec<VerificationReport>> {
    for &n in n_list {
        check_odd_parameter(n)?;
    }
    n_list
        .par_iter()
        .map(|&n| verify_all_with(n, m_max))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsys::Decomposition;

    #[test]
    fn threshold_values() {
        assert_eq!(m_threshold(3).unwrap(), 3);
        assert_eq!(m_threshold(5).unwrap(), 7);
        assert_eq!(m_threshold(9).unwrap(), 21);
        assert!(m_threshold(4).is_err());
        assert!(m_threshold(1).is_err());
    }

    #[test]
    fn instance_n5_m3() {
        let r = verify_instance(5, 3).unwrap();
        assert_eq!(r.status, InstanceStatus::Verified);
        assert_eq!(r.d_n_squared, BigInt::from(4));
        assert_eq!(r.certificate_value, BigInt::from(-17));
        assert_eq!(r.h0.value(), SectionCount::Exactly(1));
        let rules: Vec<Rule> = r.h0.certificate_chain().iter().map(|s| s.rule).collect();
        assert_eq!(
            rules,
            [
                Rule::BlowupSectionTransfer,
                Rule::CoverSectionSplit,
                Rule::AbelianNonEffectivity,
                Rule::BlowupSectionTransfer,
                Rule::FixedPartForcing,
                Rule::UniqueMember,
            ]
        );
    }

    #[test]
    fn instance_past_threshold() {
        let r = verify_instance(3, 4).unwrap();
        assert_eq!(r.status, InstanceStatus::BeyondThreshold);
        assert_eq!(r.certificate_value, BigInt::from(3));
        assert_eq!(r.h0.value(), SectionCount::Unknown);
    }

    #[test]
    fn instance_n3_m1() {
        let r = verify_instance(3, 1).unwrap();
        assert_eq!(r.status, InstanceStatus::Verified);
        assert_eq!(r.h0.value(), SectionCount::Exactly(1));
        assert!(verify_instance(3, 0).is_err());
        assert!(verify_instance(6, 1).is_err());
    }

    #[test]
    fn report_counts() {
        for (n, verified) in [(3, 3), (5, 7), (21, 111)] {
            let rep = verify_all(n).unwrap();
            assert_eq!(rep.instances.len(), verified + 1);
            assert_eq!(rep.count("Verified"), verified);
            assert_eq!(rep.count("BeyondThreshold"), 1);
            assert_eq!(
                rep.instances.last().unwrap().status,
                InstanceStatus::BeyondThreshold
            );
        }
    }

    #[test]
    fn y_prime_checks_past_threshold() {
        let rep = verify_all(3).unwrap();
        assert_eq!(rep.y_prime_only.len(), 3);
        for c in &rep.y_prime_only {
            assert!(c.m > rep.threshold);
            assert_eq!(c.h0, SectionCount::Exactly(1));
            assert_eq!(
                c.trace.decomposition(),
                Some(&Decomposition::from_pairs([("F'", c.m), ("G_n'", c.m)]))
            );
        }
    }

    #[test]
    fn sweep_shapes() {
        let reps = sweep(&[3, 5, 7]).unwrap();
        assert_eq!(reps.iter().map(|r| r.n).collect::<Vec<_>>(), [3, 5, 7]);
        for r in &reps {
            assert!(r.instances.iter().all(|i| i.d_n_squared == BigInt::from(4)));
        }
        assert!(sweep(&[]).unwrap().is_empty());
        assert!(matches!(sweep(&[4]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn m_max_override() {
        let rep = verify_all_with(5, Some(2)).unwrap();
        assert_eq!(rep.instances.len(), 3);
        assert_eq!(rep.count("Verified"), 3);
    }
}
