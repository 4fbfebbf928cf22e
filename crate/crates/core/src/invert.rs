//! Inversion of maps F(X) = X + H(X) by the alternating delta iteration.
//!
//! The operator D_F sends P to P∘F - P. Iterating it from the identity
//! yields maps P_0 = Id, P_{k+1} = P_k∘F - P_k whose orders of vanishing
//! grow linearly, so the alternating partial sums A_m = sum_{k<m} (-1)^k P_k
//! converge I-adically to the unique formal inverse of F. The iteration is
//! division-free, which is what makes it valid in positive characteristic.
//!
//! [`invert_series`] runs the iteration with the minimal step count for the
//! requested precision; [`fixed_point_invert`] is an independent oracle
//! based on G = Id - H∘G; [`verify_inverse`] checks a candidate pair both
//! ways and reports the first offending coefficient on failure.

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::series::{Order, SeriesMap, TruncatedSeries};

/// A validated problem: F origin-preserving with identity linear part,
/// truncated at the target degree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InversionProblem {
    f: SeriesMap,
    h: SeriesMap,
    t_per_component: Vec<Order>,
    t: Order,
    target_degree: u32,
}

impl InversionProblem {
    /// The map to invert, at the working precision.
    pub fn map(&self) -> &SeriesMap {
        &self.f
    }

    /// H = F - Id.
    pub fn higher_part(&self) -> &SeriesMap {
        &self.h
    }

    /// Per-component orders of vanishing of H.
    pub fn component_orders(&self) -> &[Order] {
        &self.t_per_component
    }

    /// The minimum finite component order (infinite iff F = Id).
    pub fn min_order(&self) -> Order {
        self.t
    }

    /// Degrees <= this are certified in the output.
    pub fn target_degree(&self) -> u32 {
        self.target_degree
    }
}

/// Full record of an inversion run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct InversionTrace {
    /// P_0 ..= P_{m0-1}.
    pub iterates: Vec<SeriesMap>,
    /// A_1 ..= A_{m0}; the last entry is the returned inverse.
    pub partial_sums: Vec<SeriesMap>,
    /// Per-iterate, per-component orders of vanishing.
    pub orders: Vec<Vec<Order>>,
    /// The step count used.
    pub m0: u32,
}

/// Check that F qualifies for the iteration at target degree `s`:
/// F(0) = 0 and every component is X_i + (order >= 2). Components equal
/// to X_i exactly are allowed (their order is infinite).
pub fn validate_problem(f: &SeriesMap, s: u32) -> Result<InversionProblem> {
    if s < 1 {
        return Err(Error::InvalidParameter(
            "target degree must be at least 1".into(),
        ));
    }
    if f.max_degree() < s {
        return Err(Error::InvalidParameter(format!(
            "input precision {} is below the target degree {}",
            f.max_degree(),
            s
        )));
    }
    let f = f.truncated(s);
    let n = f.nvars();
    for (i, component) in f.components().iter().enumerate() {
        if !component.coefficient(&vec![0; n]).is_zero() {
            return Err(Error::NotOriginPreserving { component: i + 1 });
        }
    }
    let h = f.sub(&SeriesMap::identity(n, s, f.spec()))?;
    let t_per_component = h.orders();
    for (i, t_i) in t_per_component.iter().enumerate() {
        if *t_i == Order::Finite(1) {
            return Err(Error::NotNormalForm { component: i + 1 });
        }
    }
    let t = t_per_component
        .iter()
        .copied()
        .min()
        .unwrap_or(Order::Infinite);
    Ok(InversionProblem {
        f,
        h,
        t_per_component,
        t,
        target_degree: s,
    })
}

/// One application of the delta operator: P∘F - P, componentwise.
pub fn delta_step(p: &SeriesMap, f: &SeriesMap) -> Result<SeriesMap> {
    p.compose(f)?.sub(p)
}

/// Minimal m with (m-2)(t-1) + t > s: running the iteration for m steps
/// certifies all terms of degree <= s. Degenerate cases: t infinite
/// (F = Id) needs a single step, and s < t needs two.
pub fn steps_needed(s: u32, t: Order) -> u32 {
    match t {
        Order::Infinite => 1,
        Order::Finite(t) => {
            assert!(t >= 2, "validated problems have t >= 2");
            let m0 = 3 + (s as i64 - t as i64).div_euclid(t as i64 - 1);
            m0 as u32
        }
    }
}

/// Run the iteration for m0 = steps_needed(s, t) steps and return the
/// inverse together with the full trace. The result is verified against
/// F in both directions before being returned.
pub fn invert_series(prob: &InversionProblem) -> Result<(SeriesMap, InversionTrace)> {
    let s = prob.target_degree;
    let n = prob.f.nvars();
    let spec = prob.f.spec();
    let m0 = steps_needed(s, prob.t);

    let mut iterates = vec![SeriesMap::identity(n, s, spec)];
    for _ in 1..m0 {
        let next = delta_step(iterates.last().unwrap(), &prob.f)?;
        iterates.push(next);
    }

    let mut partial_sums = Vec::with_capacity(m0 as usize);
    let mut acc = iterates[0].clone();
    partial_sums.push(acc.clone());
    for (k, p) in iterates.iter().enumerate().skip(1) {
        acc = if k % 2 == 1 { acc.sub(p)? } else { acc.add(p)? };
        partial_sums.push(acc.clone());
    }
    let inverse = partial_sums.last().unwrap().clone();

    match verify_inverse(&prob.f, &inverse)? {
        VerifyOutcome::Verified => {}
        VerifyOutcome::Failed { side, witness } => {
            return Err(Error::InternalVerification(format!(
                "computed inverse fails the {side:?} composition at component {} {:?}: \
                 expected {}, found {}",
                witness.component, witness.exponents, witness.expected, witness.found
            )));
        }
    }

    let orders = iterates.iter().map(SeriesMap::orders).collect();
    Ok((
        inverse,
        InversionTrace {
            iterates,
            partial_sums,
            orders,
            m0,
        },
    ))
}

/// Independent oracle: iterate G <- Id - H∘G until fixed (at most s
/// steps, which always suffices at precision s).
pub fn fixed_point_invert(prob: &InversionProblem) -> Result<SeriesMap> {
    let id = SeriesMap::identity(prob.f.nvars(), prob.target_degree, prob.f.spec());
    let mut g = id.clone();
    for _ in 0..prob.target_degree {
        let next = id.sub(&prob.h.compose(&g)?)?;
        if next == g {
            break;
        }
        g = next;
    }
    Ok(g)
}

/// Which composition a verification witness comes from.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum InverseSide {
    /// g∘f compared against the identity.
    Left,
    /// f∘g compared against the identity.
    Right,
}

/// First coefficient (component-major, then graded term order) where two
/// maps disagree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Witness {
    /// 1-based component index.
    pub component: usize,
    pub exponents: Vec<u32>,
    pub expected: FieldElement,
    pub found: FieldElement,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum VerifyOutcome {
    Verified,
    Failed { side: InverseSide, witness: Witness },
}

impl VerifyOutcome {
    pub fn is_verified(&self) -> bool {
        matches!(self, VerifyOutcome::Verified)
    }
}

/// Check f∘g = g∘f = Id through the shared precision. Failure is a value
/// carrying the first offending coefficient, not an error.
pub fn verify_inverse(f: &SeriesMap, g: &SeriesMap) -> Result<VerifyOutcome> {
    let w = f.max_degree().min(g.max_degree());
    let id = SeriesMap::identity(f.nvars(), w, f.spec());
    for (side, outer, inner) in [(InverseSide::Left, g, f), (InverseSide::Right, f, g)] {
        let composed = outer.truncated(w).compose(&inner.truncated(w))?;
        if let Some(witness) = first_difference(&composed, &id)? {
            return Ok(VerifyOutcome::Failed { side, witness });
        }
    }
    Ok(VerifyOutcome::Verified)
}

/// First coefficient where `found` deviates from `expected`
/// (component-major, graded term order within a component).
pub fn first_difference(found: &SeriesMap, expected: &SeriesMap) -> Result<Option<Witness>> {
    for (i, (a, b)) in found
        .components()
        .iter()
        .zip(expected.components())
        .enumerate()
    {
        let diff = a.sub(b)?;
        let first = diff.terms().next().map(|(m, _)| m.exponents().to_vec());
        if let Some(exponents) = first {
            return Ok(Some(Witness {
                component: i + 1,
                expected: b.coefficient(&exponents),
                found: a.coefficient(&exponents),
                exponents,
            }));
        }
    }
    Ok(None)
}

/// An exact n-by-n matrix over the coefficient field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SquareMatrix {
    n: usize,
    spec: FieldSpec,
    rows: Vec<Vec<FieldElement>>,
}

impl SquareMatrix {
    pub fn identity(n: usize, spec: FieldSpec) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { spec.one() } else { spec.zero() })
                    .collect()
            })
            .collect();
        SquareMatrix { n, spec, rows }
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>, spec: FieldSpec) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("matrix must be square".into()));
        }
        for row in &rows {
            for entry in row {
                if entry.spec() != spec {
                    return Err(Error::FieldMismatch {
                        left: spec.to_string(),
                        right: entry.spec().to_string(),
                    });
                }
            }
        }
        Ok(SquareMatrix { n, spec, rows })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<FieldElement>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &FieldElement {
        &self.rows[i][j]
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, e)| if i == j { e.is_one() } else { e.is_zero() })
        })
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<SquareMatrix> {
        let n = self.n;
        let mut a = self.rows.clone();
        let mut inv = Self::identity(n, self.spec).rows;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .ok_or(Error::SingularLinearPart)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let scale = a[col][col].inverse()?;
            for j in 0..n {
                a[col][j] = &a[col][j] * &scale;
                inv[col][j] = &inv[col][j] * &scale;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let factor = a[r][col].clone();
                    for j in 0..n {
                        a[r][j] = &a[r][j] - &(&factor * &a[col][j]);
                        inv[r][j] = &inv[r][j] - &(&factor * &inv[col][j]);
                    }
                }
            }
        }
        Ok(SquareMatrix {
            n,
            spec: self.spec,
            rows: inv,
        })
    }

    /// The linear map X -> M X as a series map at the given precision.
    pub fn as_series_map(&self, max_degree: u32) -> Result<SeriesMap> {
        let components = self
            .rows
            .iter()
            .map(|row| {
                TruncatedSeries::from_terms(
                    self.n,
                    max_degree,
                    self.spec,
                    row.iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(j, c)| {
                            let mut exps = vec![0u32; self.n];
                            exps[j] = 1;
                            (exps, c.clone())
                        }),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        SeriesMap::new(components)
    }
}

/// Split F = L∘Ftilde where L is the (invertible) linear part of F at the
/// origin and Ftilde = L^{-1}∘F has identity linear part, making it
/// eligible for the iteration.
pub fn normalize_linear(f: &SeriesMap) -> Result<(SquareMatrix, SeriesMap)> {
    let n = f.nvars();
    let spec = f.spec();
    for (i, component) in f.components().iter().enumerate() {
        if !component.coefficient(&vec![0; n]).is_zero() {
            return Err(Error::NotOriginPreserving { component: i + 1 });
        }
    }
    let mut rows = Vec::with_capacity(n);
    for component in f.components() {
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let mut exps = vec![0u32; n];
            exps[j] = 1;
            row.push(component.coefficient(&exps));
        }
        rows.push(row);
    }
    let linear = SquareMatrix::from_rows(rows, spec)?;
    let inverse = linear.inverse()?;

    // Ftilde_i = sum_j (L^{-1})_{ij} F_j
    let mut components = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = TruncatedSeries::zero(n, f.max_degree(), spec);
        for (j, fj) in f.components().iter().enumerate() {
            let coeff = inverse.entry(i, j);
            if !coeff.is_zero() {
                acc = acc.add(&fj.scale(coeff)?)?;
            }
        }
        components.push(acc);
    }
    Ok((linear, SeriesMap::new(components)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_map;

    fn q() -> FieldSpec {
        FieldSpec::rationals()
    }

    fn uni(max_degree: u32, terms: &[(u32, &str)]) -> TruncatedSeries {
        TruncatedSeries::from_terms(
            1,
            max_degree,
            q(),
            terms
                .iter()
                .map(|&(d, c)| (vec![d], q().parse_element(c).unwrap())),
        )
        .unwrap()
    }

    fn catalan(w: u32) -> SeriesMap {
        SeriesMap::new(vec![uni(
            w,
            &[
                (1, "1"),
                (2, "-1"),
                (3, "2"),
                (4, "-5"),
                (5, "14"),
                (6, "-42"),
            ],
        )])
        .unwrap()
    }

    fn quadratic(w: u32) -> SeriesMap {
        parse_map("F1 = X + X^2", q(), w).unwrap()
    }

    #[test]
    fn validate_reads_orders() {
        let f = parse_map(
            "vars: X, Y\nF1 = sin(X + Y) - Y\nF2 = cos(X*Y) - 1 + Y",
            q(),
            9,
        )
        .unwrap();
        let prob = validate_problem(&f, 9).unwrap();
        assert_eq!(
            prob.component_orders(),
            &[Order::Finite(3), Order::Finite(4)]
        );
        assert_eq!(prob.min_order(), Order::Finite(3));

        let id = SeriesMap::identity(2, 5, q());
        let prob = validate_problem(&id, 5).unwrap();
        assert_eq!(prob.component_orders(), &[Order::Infinite, Order::Infinite]);
        assert_eq!(prob.min_order(), Order::Infinite);

        let f = parse_map("vars: X, Y\nF1 = X + Y^2\nF2 = Y + X*Y", q(), 5).unwrap();
        let prob = validate_problem(&f, 5).unwrap();
        assert_eq!(
            prob.component_orders(),
            &[Order::Finite(2), Order::Finite(2)]
        );
        assert_eq!(prob.min_order(), Order::Finite(2));
    }

    #[test]
    fn validate_rejections() {
        let f = parse_map("F1 = 1 + X", q(), 4).unwrap();
        assert!(matches!(
            validate_problem(&f, 4),
            Err(Error::NotOriginPreserving { component: 1 })
        ));
        let f = parse_map("F1 = 2*X + X^2", q(), 4).unwrap();
        assert!(matches!(
            validate_problem(&f, 4),
            Err(Error::NotNormalForm { component: 1 })
        ));
        let f = quadratic(4);
        assert!(matches!(
            validate_problem(&f, 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            validate_problem(&f, 9),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn delta_step_goldens() {
        // iterates of the reversed quadratic
        let f = catalan(6);
        let p0 = SeriesMap::identity(1, 6, q());
        let p1 = delta_step(&p0, &f).unwrap();
        assert_eq!(
            p1.component(0),
            &uni(6, &[(2, "-1"), (3, "2"), (4, "-5"), (5, "14"), (6, "-42")])
        );
        let p2 = delta_step(&p1, &f).unwrap();
        assert_eq!(
            p2.component(0),
            &uni(6, &[(3, "2"), (4, "-11"), (5, "52"), (6, "-238")])
        );

        // iterates of the quadratic itself
        let g = quadratic(6);
        let q1 = delta_step(&SeriesMap::identity(1, 6, q()), &g).unwrap();
        assert_eq!(q1.component(0), &uni(6, &[(2, "1")]));
        let q2 = delta_step(&q1, &g).unwrap();
        assert_eq!(q2.component(0), &uni(6, &[(3, "2"), (4, "1")]));
    }

    #[test]
    fn steps_needed_examples() {
        assert_eq!(steps_needed(10, Order::Finite(3)), 6);
        assert_eq!(steps_needed(2, Order::Finite(2)), 3);
        assert_eq!(steps_needed(29, Order::Finite(2)), 30);
        assert_eq!(steps_needed(7, Order::Infinite), 1);
        assert_eq!(steps_needed(1, Order::Finite(4)), 2);
    }

    #[test]
    fn steps_needed_is_minimal() {
        // the returned m is the smallest with (m-2)(t-1)+t > s
        let satisfies = |m: i64, t: i64, s: i64| (m - 2) * (t - 1) + t > s;
        for t in 2..=6u32 {
            for s in 1..=20u32 {
                let m0 = steps_needed(s, Order::Finite(t));
                assert!(
                    satisfies(m0 as i64, t as i64, s as i64),
                    "m0={m0} t={t} s={s}"
                );
                assert!(
                    !satisfies(m0 as i64 - 1, t as i64, s as i64),
                    "m0-1 also satisfies: m0={m0} t={t} s={s}"
                );
            }
        }
    }

    #[test]
    fn inverts_reversed_quadratic() {
        let prob = validate_problem(&catalan(6), 6).unwrap();
        let (g, trace) = invert_series(&prob).unwrap();
        assert_eq!(g, quadratic(6));
        assert_eq!(trace.m0, 7);
        assert_eq!(trace.iterates.len(), 7);
        assert_eq!(trace.partial_sums.len(), 7);
    }

    #[test]
    fn inverts_quadratic() {
        let prob = validate_problem(&quadratic(6), 6).unwrap();
        let (f, trace) = invert_series(&prob).unwrap();
        assert_eq!(f, catalan(6));
        assert_eq!(trace.m0, 7);
    }

    #[test]
    fn trace_partial_sums_telescope() {
        let prob = validate_problem(&catalan(6), 6).unwrap();
        let (_, trace) = invert_series(&prob).unwrap();
        for m in 1..trace.partial_sums.len() {
            let step = trace.partial_sums[m]
                .sub(&trace.partial_sums[m - 1])
                .unwrap();
            let expected = if m % 2 == 1 {
                trace.iterates[m].neg()
            } else {
                trace.iterates[m].clone()
            };
            assert_eq!(step, expected, "A_(m+1) - A_m = (-1)^m P_m failed at m={m}");
        }
        // per-component orders never decrease along the iteration
        for i in 0..trace.orders[0].len() {
            for k in 1..trace.orders.len() {
                assert!(trace.orders[k][i] >= trace.orders[k - 1][i]);
            }
        }
    }

    #[test]
    fn alternating_identity_holds_exactly() {
        // sum_{k<m} (-1)^k P_k∘F + (-1)^m P_m = Id at full precision
        let f = catalan(6);
        let prob = validate_problem(&f, 6).unwrap();
        let (_, trace) = invert_series(&prob).unwrap();
        let id = SeriesMap::identity(1, 6, q());
        for m in 1..trace.iterates.len() {
            let lhs = trace.partial_sums[m - 1].compose(&f).unwrap();
            let pm = &trace.iterates[m];
            let total = if m % 2 == 0 {
                lhs.add(pm).unwrap()
            } else {
                lhs.sub(pm).unwrap()
            };
            assert_eq!(total, id, "telescoping identity failed at m={m}");
        }
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = SeriesMap::identity(2, 5, q());
        let prob = validate_problem(&id, 5).unwrap();
        let (g, trace) = invert_series(&prob).unwrap();
        assert!(g.is_identity());
        assert_eq!(trace.m0, 1);
        assert_eq!(fixed_point_invert(&prob).unwrap(), g);
    }

    #[test]
    fn characteristic_two_collapses_signs() {
        // in char 2 the alternating sum is a plain sum; the iteration
        // still lands on the unique inverse
        let f2 = FieldSpec::prime_field(2).unwrap();
        let f = parse_map("F1 = X + X^2 + X^3", f2, 8).unwrap();
        let prob = validate_problem(&f, 8).unwrap();
        let (g, _) = invert_series(&prob).unwrap();
        let expect = TruncatedSeries::from_terms(
            1,
            8,
            f2,
            [1u32, 2, 3, 8].iter().map(|&d| (vec![d], f2.one())),
        )
        .unwrap();
        assert_eq!(g.component(0), &expect);
        assert_eq!(fixed_point_invert(&prob).unwrap(), g);
        assert!(verify_inverse(&f, &g).unwrap().is_verified());
    }

    #[test]
    fn catalan_mod_five() {
        let f5 = FieldSpec::prime_field(5).unwrap();
        let f = parse_map("F1 = X + X^2", f5, 6).unwrap();
        let prob = validate_problem(&f, 6).unwrap();
        let (g, _) = invert_series(&prob).unwrap();
        let expect = TruncatedSeries::from_terms(
            1,
            6,
            f5,
            [(1u32, 1i64), (2, 4), (3, 2), (5, 4), (6, 3)]
                .iter()
                .map(|&(d, v)| (vec![d], f5.integer(v))),
        )
        .unwrap();
        assert_eq!(g.component(0), &expect);

        // agrees with reducing the rational inverse mod 5
        let prob_q = validate_problem(&quadratic(6), 6).unwrap();
        let (g_q, _) = invert_series(&prob_q).unwrap();
        assert_eq!(g_q.reduce_to_prime_field(f5).unwrap(), g);
        // and with the fixed-point oracle over F_5
        assert_eq!(fixed_point_invert(&prob).unwrap(), g);
    }

    #[test]
    fn fixed_point_matches_iteration() {
        let prob = validate_problem(&quadratic(6), 6).unwrap();
        let (g, _) = invert_series(&prob).unwrap();
        assert_eq!(fixed_point_invert(&prob).unwrap(), g);

        let f = parse_map(
            "vars: X, Y\nF1 = sin(X + Y) - Y\nF2 = cos(X*Y) - 1 + Y",
            q(),
            9,
        )
        .unwrap();
        let prob = validate_problem(&f, 9).unwrap();
        let oracle = fixed_point_invert(&prob).unwrap();
        assert_eq!(oracle.component(0).coefficient(&[2, 1]).to_string(), "1/2");
        assert_eq!(oracle.component(1).coefficient(&[2, 2]).to_string(), "1/2");
        let (g, _) = invert_series(&prob).unwrap();
        assert_eq!(g, oracle);
    }

    #[test]
    fn partial_sum_distances_shrink_geometrically() {
        // successive partial sums for sin X first disagree at degree 5
        let f = parse_map("F1 = sin(X)", q(), 29).unwrap();
        let prob = validate_problem(&f, 29).unwrap();
        let (_, trace) = invert_series(&prob).unwrap();
        let a2 = &trace.partial_sums[1];
        let a3 = &trace.partial_sums[2];
        assert_eq!(a2.distance(a3, 2.0).unwrap(), 0.03125); // 2^-5
        assert_eq!(a2.distance(a2, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn verify_inverse_reports_witnesses() {
        let f = catalan(6);
        let g = quadratic(6);
        assert!(verify_inverse(&f, &g).unwrap().is_verified());

        match verify_inverse(&g, &g).unwrap() {
            VerifyOutcome::Failed { witness, .. } => {
                assert_eq!(witness.component, 1);
                assert_eq!(witness.exponents, vec![2]);
                assert_eq!(witness.found.to_string(), "2");
            }
            VerifyOutcome::Verified => panic!("F∘F should not be the identity"),
        }
    }

    #[test]
    fn normalize_linear_examples() {
        // diagonal scaling
        let f = parse_map("vars: X, Y\nF1 = 2*X + X^2\nF2 = Y + X*Y", q(), 4).unwrap();
        let (linear, tilde) = normalize_linear(&f).unwrap();
        assert_eq!(linear.entry(0, 0).to_string(), "2");
        assert_eq!(linear.entry(0, 1).to_string(), "0");
        assert_eq!(linear.entry(1, 1).to_string(), "1");
        let expect = parse_map("vars: X, Y\nF1 = X + 1/2*X^2\nF2 = Y + X*Y", q(), 4).unwrap();
        assert_eq!(tilde, expect);

        // already in normal form
        let f = quadratic(4);
        let (linear, tilde) = normalize_linear(&f).unwrap();
        assert!(linear.is_identity());
        assert_eq!(tilde, f);

        // swap
        let f = parse_map("vars: X, Y\nF1 = Y\nF2 = X", q(), 3).unwrap();
        let (linear, tilde) = normalize_linear(&f).unwrap();
        assert_eq!(linear.entry(0, 1).to_string(), "1");
        assert_eq!(linear.entry(1, 0).to_string(), "1");
        assert!(tilde.is_identity());

        // singular linear part
        let f = parse_map("vars: X, Y\nF1 = X + Y\nF2 = X + Y + X^2", q(), 3).unwrap();
        assert!(matches!(
            normalize_linear(&f),
            Err(Error::SingularLinearPart)
        ));
    }

    #[test]
    fn normalization_composes_back() {
        let f = parse_map("vars: X, Y\nF1 = X + 3*Y + X^2\nF2 = Y - X*Y", q(), 5).unwrap();
        let (linear, tilde) = normalize_linear(&f).unwrap();
        let rebuilt = linear.as_series_map(5).unwrap().compose(&tilde).unwrap();
        assert_eq!(rebuilt, f);
        // and the normalized map is a valid problem
        let prob = validate_problem(&tilde, 5).unwrap();
        let (g_tilde, _) = invert_series(&prob).unwrap();
        // full inverse: Gtilde ∘ L^{-1}
        let g = g_tilde
            .compose(&linear.inverse().unwrap().as_series_map(5).unwrap())
            .unwrap();
        assert!(verify_inverse(&f, &g).unwrap().is_verified());
    }

    #[test]
    fn matrix_inverse_round_trip() {
        let f7 = FieldSpec::prime_field(7).unwrap();
        let m = SquareMatrix::from_rows(
            vec![
                vec![f7.integer(2), f7.integer(3)],
                vec![f7.integer(1), f7.integer(4)],
            ],
            f7,
        )
        .unwrap();
        let inv = m.inverse().unwrap();
        // M * M^{-1} = Id, checked entrywise
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = f7.zero();
                for k in 0..2 {
                    acc = &acc + &(m.entry(i, k) * inv.entry(k, j));
                }
                assert_eq!(acc.is_one(), i == j);
                assert_eq!(acc.is_zero(), i != j);
            }
        }
    }
}
