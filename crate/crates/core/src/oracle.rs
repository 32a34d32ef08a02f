//! Checks that validate the engine without trusting it.
//!
//! The enumeration oracle searches a bounded grid of curve multiplicities
//! and never looks at pairings. The identity suite compares values read off
//! the constructed lattices against closed forms written out by hand. The
//! randomized suites use seeded ChaCha streams, one stream per trial, so a
//! run is reproducible regardless of how trials are scheduled.

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constructions::{
    blow_up, check_odd_parameter, double_cover, strict_transform, PointSpec,
};
use crate::error::{Error, Result};
use crate::lattice::{DivisorClass, SurfaceKind, SurfaceModel};
use crate::linsys::{force_in_order, Decomposition, ForcingConclusion};
use crate::pipeline::Tower;

pub const DEFAULT_GRID_CAP: u64 = 100_000_000;
pub const MAX_ORDER_REGISTRY: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub suite: String,
    pub trials: u64,
    pub failures: Vec<String>,
    pub seed: u64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Every way of writing `l` as a non-negative combination of registry curves
/// (and, if asked, exceptional classes) with each count at most `coeff_bound`.
pub fn enumerate_decompositions(
    model: &SurfaceModel,
    l: &DivisorClass,
    coeff_bound: u64,
    include_exceptionals: bool,
) -> Result<Vec<Decomposition>> {
    enumerate_with_cap(
        model,
        l,
        coeff_bound,
        include_exceptionals,
        DEFAULT_GRID_CAP,
    )
}

pub fn enumerate_with_cap(
    model: &SurfaceModel,
    l: &DivisorClass,
    coeff_bound: u64,
    include_exceptionals: bool,
    grid_cap: u64,
) -> Result<Vec<Decomposition>> {
    model.owns(l)?;
    let mut gens: Vec<(String, DivisorClass)> = model
        .curves()
        .iter()
        .map(|c| (c.label.clone(), c.class.clone()))
        .collect();
    if include_exceptionals {
        for label in model.exceptional_labels() {
            gens.push((
                label.clone(),
                model.basis_class(label).expect("basis label"),
            ));
        }
    }
    let points = BigInt::from(coeff_bound + 1).pow(gens.len() as u32);
    if points > BigInt::from(grid_cap) {
        return Err(Error::BoundTooLarge {
            points,
            cap: grid_cap,
        });
    }

    let mut found = Vec::new();
    let mut counts = vec![0u64; gens.len()];
    search(
        &gens,
        0,
        model.zero(),
        l,
        coeff_bound,
        &mut counts,
        &mut found,
    )?;
    Ok(found)
}

fn search(
    gens: &[(String, DivisorClass)],
    depth: usize,
    partial: DivisorClass,
    target: &DivisorClass,
    bound: u64,
    counts: &mut Vec<u64>,
    found: &mut Vec<Decomposition>,
) -> Result<()> {
    if depth == gens.len() {
        if &partial == target {
            found.push(Decomposition::from_pairs(
                gens.iter()
                    .map(|(l, _)| l.as_str())
                    .zip(counts.iter().copied()),
            ));
        }
        return Ok(());
    }
    let mut acc = partial;
    for k in 0..=bound {
        counts[depth] = k;
        search(gens, depth + 1, acc.clone(), target, bound, counts, found)?;
        acc = acc.add(&gens[depth].1)?;
    }
    counts[depth] = 0;
    Ok(())
}

/// Values of the printed identities, written out as plain integer formulas.
/// Order: `A_n^2, D_n^2, (mA_n - R).G_n, L_n.F', (mL_n - F').G_n', F'^2,
/// G_n'^2, F'.G_n'`.
pub fn closed_forms(n: u64, m: u64) -> [BigInt; 8] {
    let n = BigInt::from(n);
    let m = BigInt::from(m);
    [
        BigInt::from(8),
        BigInt::from(4),
        BigInt::from(4) * (&m - 1) - &n * &n,
        BigInt::from(-2),
        BigInt::from(-2) * &m - 1,
        BigInt::from(-3),
        BigInt::from(-3),
        BigInt::from(1),
    ]
}

pub const IDENTITY_NAMES: [&str; 8] = [
    "A_n^2",
    "D_n^2",
    "(mA_n - R).G_n",
    "L_n.F'",
    "(mL_n - F').G_n'",
    "F'^2",
    "G_n'^2",
    "F'.G_n'",
];

fn lattice_values(t: &Tower, m: u64) -> Result<[BigInt; 8]> {
    let y = &t.y;
    let yp = &t.y_prime;
    let ma_r = t.a_n.scale(m).sub(&t.r)?;
    let ml_f = t.l_n.scale(m).sub(&t.f_prime)?;
    Ok([
        y.self_int(&t.a_n)?,
        t.x_tilde.self_int(&t.d_n)?,
        y.pair(&ma_r, &t.gamma)?,
        yp.pair(&t.l_n, &t.f_prime)?,
        yp.pair(&ml_f, &t.gamma_prime)?,
        yp.self_int(&t.f_prime)?,
        yp.self_int(&t.gamma_prime)?,
        yp.pair(&t.f_prime, &t.gamma_prime)?,
    ])
}

pub fn identity_suite(n_list: &[u64], m_max_per_n: u64, seed: u64) -> Result<OracleReport> {
    for &n in n_list {
        check_odd_parameter(n)?;
    }
    let per_n: Vec<(u64, Vec<String>)> = n_list
        .par_iter()
        .map(|&n| {
            let t = Tower::new(n)?;
            let mut failures = Vec::new();
            let mut trials = 0;
            for m in 1..=m_max_per_n {
                let got = lattice_values(&t, m)?;
                let want = closed_forms(n, m);
                for ((name, g), w) in IDENTITY_NAMES.iter().zip(&got).zip(&want) {
                    trials += 1;
                    if g != w {
                        failures.push(format!("n={n} m={m}: {name} = {g}, closed form {w}"));
                    }
                }
            }
            Ok((trials, failures))
        })
        .collect::<Result<_>>()?;
    Ok(OracleReport {
        suite: "identity".into(),
        trials: per_n.iter().map(|(t, _)| t).sum(),
        failures: per_n.into_iter().flat_map(|(_, f)| f).collect(),
        seed,
    })
}

/// Run forcing on `m * l` for `1 <= m <= m_cap` under every order of the
/// registry and report any disagreement.
pub fn forcing_order_check(
    model: &SurfaceModel,
    l: &DivisorClass,
    m_cap: u64,
) -> Result<OracleReport> {
    let k = model.curves().len();
    if k > MAX_ORDER_REGISTRY {
        return Err(Error::RegistryTooLarge {
            size: k,
            max: MAX_ORDER_REGISTRY,
        });
    }
    let natural: Vec<usize> = (0..k).collect();
    let mut trials = 0;
    let mut failures = Vec::new();
    for m in 1..=m_cap {
        let target = l.scale(m);
        let base = force_in_order(model, &target, &natural, None)?.conclusion;
        for order in (0..k).permutations(k) {
            trials += 1;
            let got = force_in_order(model, &target, &order, None)?.conclusion;
            if got != base {
                failures.push(format!(
                    "m={m} order {order:?}: {} vs natural {}",
                    describe(&got),
                    describe(&base)
                ));
            }
        }
    }
    Ok(OracleReport {
        suite: "forcing-order".into(),
        trials,
        failures,
        seed: 0,
    })
}

/// Forcing decompositions of `m L_n` against exhaustive enumeration, for
/// each `n` and `1 <= m <= m_cap`: enumeration must return exactly the one
/// decomposition forcing found.
pub fn enumeration_suite(n_list: &[u64], m_cap: u64, coeff_bound: u64) -> Result<OracleReport> {
    for &n in n_list {
        check_odd_parameter(n)?;
    }
    let per_n: Vec<(u64, Vec<String>)> = n_list
        .par_iter()
        .map(|&n| {
            let t = Tower::new(n)?;
            let mut failures = Vec::new();
            for m in 1..=m_cap {
                let target = t.l_n.scale(m);
                let forced = t.force_on_y_prime(m)?;
                let found = enumerate_decompositions(&t.y_prime, &target, coeff_bound, false)?;
                match forced.decomposition() {
                    Some(d) if found.len() == 1 && &found[0] == d => {}
                    other => failures.push(format!(
                        "n={n} m={m}: forcing {}, enumeration {:?}",
                        other.map_or_else(|| "inconclusive".to_string(), ToString::to_string),
                        found.iter().map(ToString::to_string).collect::<Vec<_>>()
                    )),
                }
            }
            Ok((m_cap, failures))
        })
        .collect::<Result<_>>()?;
    Ok(OracleReport {
        suite: "enumeration".into(),
        trials: per_n.iter().map(|(t, _)| t).sum(),
        failures: per_n.into_iter().flat_map(|(_, f)| f).collect(),
        seed: 0,
    })
}

/// [`forcing_order_check`] on `L_n` in `Y'` for each `n`.
pub fn forcing_order_suite(n_list: &[u64], m_cap: u64) -> Result<OracleReport> {
    for &n in n_list {
        check_odd_parameter(n)?;
    }
    let reports: Vec<OracleReport> = n_list
        .par_iter()
        .map(|&n| {
            let t = Tower::new(n)?;
            let mut r = forcing_order_check(&t.y_prime, &t.l_n, m_cap)?;
            for f in &mut r.failures {
                *f = format!("n={n} {f}");
            }
            Ok(r)
        })
        .collect::<Result<_>>()?;
    Ok(OracleReport {
        suite: "forcing-order".into(),
        trials: reports.iter().map(|r| r.trials).sum(),
        failures: reports.into_iter().flat_map(|r| r.failures).collect(),
        seed: 0,
    })
}

fn describe(c: &ForcingConclusion) -> String {
    match c {
        ForcingConclusion::UniqueMember(d) => format!("unique member {d}"),
        ForcingConclusion::Inconclusive(r) => format!("inconclusive ({r})"),
    }
}

/// Randomized pairing checks on random symmetric models, their blow-ups and
/// their double covers.
pub fn bilinearity_suite(trials: u64, seed: u64) -> OracleReport {
    let failures: Vec<String> = (0..trials)
        .into_par_iter()
        .flat_map_iter(|i| match bilinearity_trial(seed, i) {
            Ok(f) => f,
            Err(e) => vec![format!("trial {i}: error {e}")],
        })
        .collect();
    OracleReport {
        suite: "bilinearity".into(),
        trials,
        failures,
        seed,
    }
}

const ENTRY_RANGE: i64 = 1_000_000;
const COEFF_RANGE: i64 = 1_000;

fn random_class(rng: &mut ChaCha8Rng, model: &SurfaceModel) -> DivisorClass {
    let coeffs = (0..model.rank())
        .map(|_| BigInt::from(rng.random_range(-COEFF_RANGE..=COEFF_RANGE)))
        .collect();
    model.class_from(coeffs).expect("rank-sized vector")
}

/// `sum_ij a_i g_ij b_j`, straight from the Gram entries.
fn direct_pair(model: &SurfaceModel, a: &DivisorClass, b: &DivisorClass) -> BigInt {
    let g = model.gram();
    let mut total = BigInt::zero();
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            total += &a.coeffs()[i] * g.entry(i, j) * &b.coeffs()[j];
        }
    }
    total
}

fn bilinearity_trial(seed: u64, trial: u64) -> Result<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut fail = Vec::new();
    let mut check = |ok: bool, what: &str| {
        if !ok {
            fail.push(format!("trial {trial}: {what}"));
        }
    };

    let dim = rng.random_range(1..=8usize);
    // every tenth trial uses a zero Gram, the next a diagonal one
    let shape = trial % 10;
    let mut gram = vec![vec![BigInt::zero(); dim]; dim];
    for i in 0..dim {
        for j in i..dim {
            let v = match shape {
                0 => 0,
                1 if i != j => 0,
                _ => rng.random_range(-ENTRY_RANGE..=ENTRY_RANGE),
            };
            gram[i][j] = BigInt::from(v);
            gram[j][i] = BigInt::from(v);
        }
    }
    let labels: Vec<String> = (0..dim).map(|i| format!("b{i}")).collect();
    let curve_count = rng.random_range(0..=dim.min(3));
    let mut builder = SurfaceModel::builder("random", SurfaceKind::Other)
        .basis(labels.clone())
        .gram(gram.clone());
    for c in 0..curve_count {
        let coeffs = (0..dim)
            .map(|j| {
                if j == c {
                    BigInt::one()
                } else {
                    BigInt::zero()
                }
            })
            .collect();
        builder = builder.curve(format!("C{c}"), coeffs, "random");
    }
    let model = builder.build()?;

    let d1 = random_class(&mut rng, &model);
    let d2 = random_class(&mut rng, &model);
    let d3 = random_class(&mut rng, &model);
    let a = BigInt::from(rng.random_range(-COEFF_RANGE..=COEFF_RANGE));
    let b = BigInt::from(rng.random_range(-COEFF_RANGE..=COEFF_RANGE));

    let p12 = model.pair(&d1, &d2)?;
    check(p12 == model.pair(&d2, &d1)?, "symmetry");
    check(
        p12 == direct_pair(&model, &d1, &d2),
        "pairing differs from direct Gram sum",
    );
    let combo = d1.scale(a.clone()).add(&d2.scale(b.clone()))?;
    let lhs = model.pair(&combo, &d3)?;
    let rhs = &a * model.pair(&d1, &d3)? + &b * model.pair(&d2, &d3)?;
    check(lhs == rhs, "bilinearity");
    check(model.self_int(&d1)? == model.pair(&d1, &d1)?, "self_int");
    for (i, label) in labels.iter().enumerate() {
        let e = model.basis_class(label).expect("basis");
        check(
            model.self_int(&e)? == gram[i][i],
            "basis square differs from diagonal",
        );
    }
    if shape == 0 {
        check(p12.is_zero(), "zero Gram gave nonzero pairing");
    }

    // blow-up: pullbacks keep their pairings, exceptionals are orthonormal with sign -1
    let k = rng.random_range(1..=3usize);
    let points: Vec<PointSpec> = (0..k)
        .map(|p| {
            let mut spec = PointSpec::new(format!("p{p}"), format!("e{p}"));
            for c in 0..curve_count {
                spec = spec.with_multiplicity(format!("C{c}"), rng.random_range(0..=3));
            }
            spec
        })
        .collect();
    let (up, pi) = blow_up(&model, "pi", &points)?;
    let u1 = pi.pullback(&d1)?;
    let u2 = pi.pullback(&d2)?;
    check(
        up.pair(&u1, &u2)? == p12,
        "blow-up changed a pullback pairing",
    );
    let es = pi.exceptionals()?;
    for (i, ei) in es.iter().enumerate() {
        check(
            up.pair(&u1, ei)?.is_zero(),
            "pullback meets an exceptional class",
        );
        for (j, ej) in es.iter().enumerate() {
            let want = if i == j {
                BigInt::from(-1)
            } else {
                BigInt::zero()
            };
            check(
                up.pair(ei, ej)? == want,
                "exceptional classes not orthonormal",
            );
        }
    }
    let zeros = vec![BigInt::zero(); k];
    check(
        strict_transform(&pi, &d1, &zeros)? == u1,
        "zero-multiplicity strict transform",
    );

    // double cover: pairings of pullbacks double
    let (cov, f) = double_cover(&model, "f", &d3)?;
    let v1 = f.pullback(&d1)?;
    let v2 = f.pullback(&d2)?;
    check(
        cov.pair(&v1, &v2)? == BigInt::from(2) * &p12,
        "cover did not double a pairing",
    );

    Ok(fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_on_y_prime() {
        let t = Tower::new(3).unwrap();
        let two_l = t.l_n.scale(2);
        let found = enumerate_decompositions(&t.y_prime, &two_l, 10, false).unwrap();
        assert_eq!(
            found,
            vec![Decomposition::from_pairs([("F'", 2), ("G_n'", 2)])]
        );

        let found = enumerate_decompositions(&t.y_prime, &t.f_prime, 10, false).unwrap();
        assert_eq!(found, vec![Decomposition::from_pairs([("F'", 1)])]);

        let e1 = t.y_prime.basis_class("e1").unwrap();
        assert!(enumerate_decompositions(&t.y_prime, &e1, 10, false)
            .unwrap()
            .is_empty());
        let with_e = enumerate_decompositions(&t.y_prime, &e1, 2, true).unwrap();
        assert_eq!(with_e, vec![Decomposition::from_pairs([("e1", 1)])]);
    }

    #[test]
    fn enumeration_agrees_with_forcing() {
        let r = enumeration_suite(&[3, 5], 4, 10).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.trials, 8);
    }

    #[test]
    fn enumeration_cap() {
        let t = Tower::new(3).unwrap();
        let err = enumerate_with_cap(&t.y_prime, &t.l_n, 10, false, 1000).unwrap_err();
        assert!(matches!(err, Error::BoundTooLarge { .. }));
    }

    #[test]
    fn closed_form_spot_values() {
        assert_eq!(closed_forms(7, 2)[2], BigInt::from(-45));
        assert_eq!(closed_forms(5, 3)[4], BigInt::from(-7));
    }

    #[test]
    fn identity_suite_small() {
        let r = identity_suite(&[3, 5, 7], 5, 7).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.trials, 3 * 5 * 8);
        assert_eq!(r.seed, 7);
    }

    #[test]
    fn forcing_order_small() {
        for n in [3, 5] {
            let t = Tower::new(n).unwrap();
            let r = forcing_order_check(&t.y_prime, &t.l_n, 5).unwrap();
            assert!(r.passed(), "{:?}", r.failures);
            assert_eq!(r.trials, 5 * 6);
        }
    }

    #[test]
    fn single_curve_registry_is_order_free() {
        let m = SurfaceModel::builder("one", SurfaceKind::Other)
            .basis(["c"])
            .gram_i64(&[&[-1]])
            .curve("c", vec![BigInt::one()], "declared")
            .build()
            .unwrap();
        let c = m.basis_class("c").unwrap();
        let r = forcing_order_check(&m, &c, 4).unwrap();
        assert!(r.passed());
        assert_eq!(r.trials, 4);
    }

    #[test]
    fn order_check_rejects_big_registry() {
        let labels: Vec<String> = (0..7).map(|i| format!("c{i}")).collect();
        let mut b = SurfaceModel::builder("big", SurfaceKind::Other)
            .basis(labels.clone())
            .gram(vec![vec![BigInt::zero(); 7]; 7]);
        for i in 0..7 {
            let coeffs = (0..7).map(|j| BigInt::from((i == j) as i64)).collect();
            b = b.curve(labels[i].clone(), coeffs, "");
        }
        let m = b.build().unwrap();
        assert!(matches!(
            forcing_order_check(&m, &m.zero(), 1),
            Err(Error::RegistryTooLarge { size: 7, .. })
        ));
    }

    #[test]
    fn bilinearity_is_seed_deterministic() {
        let a = bilinearity_suite(200, 42);
        let b = bilinearity_suite(200, 42);
        assert!(a.passed(), "{:?}", a.failures);
        assert_eq!(a, b);
    }
}
