//! Detection and certification of polynomial inverses.
//!
//! When the inverse G of F = X + H is a polynomial of degree at most D,
//! the partial sums of the delta iteration stop contributing below degree
//! D after finitely many steps: with t_i = ord(H_i) and t = min t_i, the
//! cutoff for component i is
//!
//! ```text
//! stab_i = floor((D - t_i)/(t - 1) + 1) + 1
//! ```
//!
//! so G_i is recovered as sum_{k < stab_i} (-1)^k (P_k^i truncated at D).
//! The leftover R_m = A_m - G is a pure high-order residual satisfying
//! R_m∘F = (-1)^{m+1} P_m, and the iterates Q_s of the inverse direction
//! decompose through the iterates of F composed with powers of G.
//!
//! A note on the decomposition index: for s >= stab the iterates satisfy
//! Q_s = (-1)^s P_s∘G^s = -R_s∘G^{s-1}, with the residual index tracking
//! the step count (the forms agree at s = stab; see
//! `residual_index_tracks_step_count` in the tests for the distinction).
//! All identities here are certified numerically at working precision,
//! never taken from the derivation on faith.

use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::invert::{
    delta_step, first_difference, validate_problem, verify_inverse, InversionProblem,
    VerifyOutcome, Witness,
};
use crate::series::{Order, SeriesMap};

/// Per-component stabilization indices for an assumed polynomial-inverse
/// degree `poly_degree`, plus their maximum. Components with H_i = 0
/// stabilize immediately (index 1). Errors when `poly_degree` is below
/// the minimum order t: a nontrivial H admits no inverse of such low degree.
pub fn stabilization_indices(prob: &InversionProblem, poly_degree: u32) -> Result<(Vec<u32>, u32)> {
    if poly_degree < 1 {
        return Err(Error::InvalidParameter(
            "polynomial degree must be at least 1".into(),
        ));
    }
    if let Order::Finite(t) = prob.min_order() {
        if poly_degree < t {
            return Err(Error::InvalidParameter(format!(
                "no inverse of degree {poly_degree} is possible: the deviation H has order {t}"
            )));
        }
    }
    let indices: Vec<u32> = prob
        .component_orders()
        .iter()
        .map(|t_i| match (t_i, prob.min_order()) {
            (Order::Finite(t_i), Order::Finite(t)) => {
                let q = (poly_degree as i64 - *t_i as i64).div_euclid(t as i64 - 1);
                (q + 2).max(1) as u32
            }
            _ => 1,
        })
        .collect();
    let max = *indices.iter().max().expect("at least one component");
    Ok((indices, max))
}

/// Named outcome of one identity check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    /// First offending coefficient, for failed checks.
    pub witness: Option<Witness>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The working precision cannot see the identity at this index;
    /// reported explicitly instead of passing vacuously.
    InsufficientPrecision,
}

/// Result of a polynomial-inverse extraction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymmetryReport {
    /// The assumed polynomial-inverse degree D.
    pub poly_degree: u32,
    pub stabilization_indices: Vec<u32>,
    pub stabilization_index: u32,
    /// sum_{k < stab_i} (-1)^k (P_k^i truncated at D), at working precision.
    pub candidate: SeriesMap,
    /// Outcome of verifying candidate∘F = F∘candidate = Id.
    pub verified: bool,
    /// First offending coefficient when verification failed.
    pub witness: Option<Witness>,
    /// Residuals R_m = A_m - candidate for the recorded m values.
    pub residuals: Vec<(u32, SeriesMap)>,
    /// Identity checks run as part of the extraction.
    pub checks: Vec<CheckResult>,
    /// Equality statements above hold for total degrees <= this bound.
    pub certified_degree: u32,
}

impl SymmetryReport {
    pub fn summary(&self) -> String {
        if self.verified {
            format!(
                "polynomial inverse of degree <= {} certified through degree {}",
                self.poly_degree, self.certified_degree
            )
        } else {
            format!(
                "no polynomial inverse of degree <= {} certified at this precision",
                self.poly_degree
            )
        }
    }
}

/// Form the degree-D candidate inverse from the iterates and certify it.
///
/// The working precision is the problem's target degree, which must be at
/// least D (larger exposes the residuals). On verification failure the
/// report carries the first offending coefficient and no identity checks.
pub fn extract_polynomial_inverse(
    prob: &InversionProblem,
    poly_degree: u32,
) -> Result<SymmetryReport> {
    let s = prob.target_degree();
    if s < poly_degree {
        return Err(Error::InvalidParameter(format!(
            "working precision {s} is below the assumed inverse degree {poly_degree}"
        )));
    }
    let (indices, stab) = stabilization_indices(prob, poly_degree)?;
    let f = prob.map();
    let n = f.nvars();
    let spec = f.spec();

    // P_0 ..= P_stab (the last iterate feeds the residual identity check)
    let mut iterates = vec![SeriesMap::identity(n, s, spec)];
    for _ in 1..=stab {
        iterates.push(delta_step(iterates.last().unwrap(), f)?);
    }

    let mut components = Vec::with_capacity(n);
    for (i, steps) in indices.iter().enumerate() {
        let mut acc = iterates[0].component(i).polynomial_part(poly_degree);
        for (k, p) in iterates.iter().enumerate().take(*steps as usize).skip(1) {
            let part = p.component(i).polynomial_part(poly_degree);
            acc = if k % 2 == 1 {
                acc.sub(&part)?
            } else {
                acc.add(&part)?
            };
        }
        components.push(acc);
    }
    let candidate = SeriesMap::new(components)?;

    // A_stab and its residual against the candidate
    let mut partial_sum = iterates[0].clone();
    for (k, p) in iterates.iter().enumerate().take(stab as usize).skip(1) {
        partial_sum = if k % 2 == 1 {
            partial_sum.sub(p)?
        } else {
            partial_sum.add(p)?
        };
    }
    let residual = partial_sum.sub(&candidate)?;

    let outcome = verify_inverse(f, &candidate)?;
    let (verified, witness) = match outcome {
        VerifyOutcome::Verified => (true, None),
        VerifyOutcome::Failed { witness, .. } => (false, Some(witness)),
    };

    let mut checks = Vec::new();
    // Degrees <= D of A_stab must already agree with the candidate,
    // whether or not the inverse is polynomial (pure order-bound fact).
    let zero_map = SeriesMap::identity(n, s, spec).sub(&SeriesMap::identity(n, s, spec))?;
    checks.push(check_equal(
        "partial_sum_stabilized",
        &residual.polynomial_part(poly_degree),
        &zero_map,
    )?);
    if verified {
        // R_stab∘F = (-1)^{stab+1} P_stab
        let lhs = residual.compose(f)?;
        let rhs = if (stab + 1) % 2 == 1 {
            iterates[stab as usize].neg()
        } else {
            iterates[stab as usize].clone()
        };
        checks.push(check_equal("residual_composition", &lhs, &rhs)?);
    }

    Ok(SymmetryReport {
        poly_degree,
        stabilization_indices: indices,
        stabilization_index: stab,
        candidate,
        verified,
        witness,
        residuals: vec![(stab, residual)],
        checks,
        certified_degree: s,
    })
}

/// R_m = A_m - G for a given (assumed) inverse G.
pub fn partial_sum_residual(prob: &InversionProblem, g: &SeriesMap, m: u32) -> Result<SeriesMap> {
    if m < 1 {
        return Err(Error::InvalidParameter(
            "residual index must be at least 1".into(),
        ));
    }
    let f = prob.map();
    let mut iterate = SeriesMap::identity(f.nvars(), prob.target_degree(), f.spec());
    let mut acc = iterate.clone();
    for k in 1..m {
        iterate = delta_step(&iterate, f)?;
        acc = if k % 2 == 1 {
            acc.sub(&iterate)?
        } else {
            acc.add(&iterate)?
        };
    }
    acc.sub(&g.truncated(prob.target_degree()))
}

/// Iterates Q_0 ..= Q_count of the delta operator for G itself.
/// G must be origin-preserving with ord(G - Id) >= 2.
pub fn q_sequence(g: &SeriesMap, count: u32) -> Result<Vec<SeriesMap>> {
    validate_problem(g, g.max_degree())?;
    let mut out = vec![SeriesMap::identity(g.nvars(), g.max_degree(), g.spec())];
    for _ in 0..count {
        out.push(delta_step(out.last().unwrap(), g)?);
    }
    Ok(out)
}

/// Certify the iterate-decomposition identities relating the delta
/// iterates of F and of its polynomial inverse G, for 1 <= s <= s_max:
///
/// - `iterate_decomposition_s`: the full recursion
///   Q_s = sum_{k=0}^{stab-2} (-1)^{k+s} P_{k+s}∘G^{s-1}
///   + (-1)^stab sum_{l=0}^{s-1} C(s-1,l) (-1)^l P_stab∘G^{s-l};
/// - `residual_decomposition_s` (s >= stab): Q_s = -R_s∘G^{s-1};
/// - `binomial_expansion_l` / `binomial_collapse_r`: the two binomial
///   identities for composing later iterates with powers of G.
///
/// Indices whose order lower bound exceeds the working precision are
/// reported as `InsufficientPrecision` rather than passing on empty data.
pub fn q_decomposition_check(
    f: &SeriesMap,
    g: &SeriesMap,
    poly_degree: u32,
    s_max: u32,
) -> Result<Vec<CheckResult>> {
    if !(1..=30).contains(&s_max) {
        return Err(Error::InvalidParameter("s_max must lie in 1..=30".into()));
    }
    let w = f.max_degree().min(g.max_degree());
    let f = f.truncated(w);
    let g = g.truncated(w);
    if !verify_inverse(&f, &g)?.is_verified() {
        return Err(Error::InvalidParameter(
            "the two maps are not mutually inverse at the working precision".into(),
        ));
    }
    let prob = validate_problem(&f, w)?;
    let g_prob = validate_problem(&g, w)?;
    let (_, stab) = stabilization_indices(&prob, poly_degree)?;
    let spec = f.spec();
    let n = f.nvars();

    // iterates of F (enough for every identity below), of G, and powers of G
    let k_max = stab + s_max + 2;
    let mut p = vec![SeriesMap::identity(n, w, spec)];
    for _ in 1..=k_max {
        p.push(delta_step(p.last().unwrap(), &f)?);
    }
    let mut q = vec![SeriesMap::identity(n, w, spec)];
    for _ in 1..=s_max {
        q.push(delta_step(q.last().unwrap(), &g)?);
    }
    let mut g_pow = vec![SeriesMap::identity(n, w, spec)];
    // the binomial checks below reach G^2 even when s_max = 1
    for _ in 1..=s_max.max(2) {
        g_pow.push(g_pow.last().unwrap().compose(&g)?);
    }
    // alternating partial sums A_m of the P_k, m = 1 ..= s_max
    let mut partial_sums = vec![p[0].clone()];
    for (k, iterate) in p.iter().enumerate().take(s_max as usize + 1).skip(1) {
        let prev = partial_sums.last().unwrap();
        partial_sums.push(if k % 2 == 1 {
            prev.sub(iterate)?
        } else {
            prev.add(iterate)?
        });
    }

    let minus_one = -spec.one();
    let sign = |k: u32| -> FieldElement {
        if k.is_multiple_of(2) {
            spec.one()
        } else {
            minus_one.clone()
        }
    };

    let mut checks = Vec::new();
    for s in 1..=s_max {
        // lower bound on ord(Q_s): beyond the precision the comparison
        // carries no information
        let out_of_reach = match g_prob.min_order() {
            Order::Infinite => false,
            Order::Finite(d) => (s - 1) * (d - 1) + d > w,
        };
        if out_of_reach {
            checks.push(CheckResult {
                name: format!("iterate_decomposition_s{s}"),
                status: CheckStatus::InsufficientPrecision,
                witness: None,
            });
            if s >= stab {
                checks.push(CheckResult {
                    name: format!("residual_decomposition_s{s}"),
                    status: CheckStatus::InsufficientPrecision,
                    witness: None,
                });
            }
            continue;
        }

        let mut rhs = zero_map(n, w, spec)?;
        for k in 0..stab.saturating_sub(1) {
            let term = p[(k + s) as usize].compose(&g_pow[(s - 1) as usize])?;
            rhs = rhs.add(&term.scale(&sign(k + s))?)?;
        }
        for l in 0..s {
            let term = p[stab as usize].compose(&g_pow[(s - l) as usize])?;
            let coeff = &(&spec.integer(binomial(s - 1, l)) * &sign(l)) * &sign(stab);
            rhs = rhs.add(&term.scale(&coeff)?)?;
        }
        checks.push(check_equal(
            &format!("iterate_decomposition_s{s}"),
            &q[s as usize],
            &rhs,
        )?);

        if s >= stab {
            let residual = partial_sums[(s - 1) as usize].sub(&g)?;
            let rhs = residual.compose(&g_pow[(s - 1) as usize])?.neg();
            checks.push(check_equal(
                &format!("residual_decomposition_s{s}"),
                &q[s as usize],
                &rhs,
            )?);
        }
    }

    // binomial identities at their minimal index (s = l+1 resp. r+1)
    for l in 1..=2u32 {
        let lhs = p[(stab + l) as usize].compose(&g_pow[l as usize])?;
        let mut rhs = zero_map(n, w, spec)?;
        for j in 0..=l {
            let term = p[stab as usize].compose(&g_pow[(l - j) as usize])?;
            let coeff = &spec.integer(binomial(l, j)) * &sign(l - j);
            rhs = rhs.add(&term.scale(&coeff)?)?;
        }
        checks.push(check_equal(
            &format!("binomial_expansion_l{l}"),
            &lhs,
            &rhs,
        )?);
    }
    for r in 1..=2u32 {
        let mut lhs = zero_map(n, w, spec)?;
        for l in 0..=r {
            let term = p[(stab + l) as usize].compose(&g_pow[r as usize])?;
            lhs = lhs.add(&term.scale(&sign(l))?)?;
        }
        let mut rhs = zero_map(n, w, spec)?;
        for j in 0..=r {
            let term = p[stab as usize].compose(&g_pow[(r - j) as usize])?;
            let coeff = &spec.integer(binomial(r + 1, j + 1)) * &sign(j);
            rhs = rhs.add(&term.scale(&coeff)?)?;
        }
        checks.push(check_equal(&format!("binomial_collapse_r{r}"), &lhs, &rhs)?);
    }

    Ok(checks)
}

fn zero_map(n: usize, w: u32, spec: crate::field::FieldSpec) -> Result<SeriesMap> {
    let id = SeriesMap::identity(n, w, spec);
    id.sub(&id.clone())
}

fn binomial(n: u32, k: u32) -> i64 {
    let mut acc: i64 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

fn check_equal(name: &str, found: &SeriesMap, expected: &SeriesMap) -> Result<CheckResult> {
    let witness = first_difference(found, expected)?;
    Ok(CheckResult {
        name: name.to_string(),
        status: if witness.is_none() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        witness,
    })
}
