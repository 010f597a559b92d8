//! Rays and orthonormal triples in R³, 101-colourings by backtracking, and
//! the reduction from perfectly correlated value maps to colourings.
//!
//! A colouring marks exactly one ray in every basis. Two orthogonal rays
//! span a basis of R³ together with their cross product, so a colouring of
//! R³ never marks both; problems carry these pairs as at-most-one
//! constraints unless built with `pair_constraints = false`.

pub mod field;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::invalid;
use field::{QSqrt2, Q};

/// Orthogonality and parallelism tolerance for float coordinates.
pub const FLOAT_TOLERANCE: f64 = 1e-8;
/// Largest problem the plain enumeration oracle accepts.
pub const MAX_ORACLE_RAYS: usize = 20;

/// Coordinates as given: exact in Q(√2) or floating point.
#[derive(Clone, Debug, PartialEq)]
pub enum Coords {
    Exact([QSqrt2; 3]),
    Float([f64; 3]),
}

/// A direction up to sign.
#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    /// Canonical-sign coordinates, not normalised.
    pub coords: Coords,
    /// Unit vector with the first nonzero coordinate positive.
    pub direction: [f64; 3],
}

impl Ray {
    pub fn exact(v: [QSqrt2; 3]) -> Result<Self> {
        let sign = v
            .iter()
            .map(QSqrt2::signum)
            .find(|s| *s != 0)
            .ok_or_else(|| invalid!("zero vector"))?;
        let v = if sign < 0 { v.map(|x| -x) } else { v };
        let f = v.map(|x| x.to_f64());
        Ok(Ray {
            direction: normalise(f)?,
            coords: Coords::Exact(v),
        })
    }

    pub fn float(v: [f64; 3]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid!("non-finite coordinate"));
        }
        let n = normalise(v)?;
        let sign = n.iter().find(|x| x.abs() > FLOAT_TOLERANCE).map_or(1.0, |x| x.signum());
        let c = v.map(|x| x * sign);
        Ok(Ray {
            direction: n.map(|x| x * sign),
            coords: Coords::Float(c),
        })
    }

    pub fn integer(v: [i128; 3]) -> Result<Self> {
        Ray::exact(v.map(QSqrt2::int))
    }

    /// Exact inner product when both rays are exact.
    fn exact_dot(&self, o: &Ray) -> Option<QSqrt2> {
        match (&self.coords, &o.coords) {
            (Coords::Exact(a), Coords::Exact(b)) => Some(a[0] * b[0] + a[1] * b[1] + a[2] * b[2]),
            _ => None,
        }
    }

    /// Inner product of the unit directions.
    pub fn cosine(&self, o: &Ray) -> f64 {
        dot(self.direction, o.direction)
    }

    pub fn orthogonal_to(&self, o: &Ray) -> bool {
        match self.exact_dot(o) {
            Some(d) => d.is_zero(),
            None => self.cosine(o).abs() <= FLOAT_TOLERANCE,
        }
    }

    pub fn same_ray(&self, o: &Ray) -> bool {
        match (&self.coords, &o.coords) {
            (Coords::Exact(a), Coords::Exact(b)) => {
                let cross = [
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ];
                cross.iter().all(QSqrt2::is_zero)
            }
            _ => self
                .direction
                .iter()
                .zip(&o.direction)
                .all(|(x, y)| (x - y).abs() <= FLOAT_TOLERANCE),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.coords, Coords::Exact(_))
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalise(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = libm::sqrt(dot(v, v));
    if !(n > 0.0) {
        return Err(invalid!("zero vector"));
    }
    Ok(v.map(|x| x / n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ColoringProblem {
    pub rays: Vec<Ray>,
    pub ray_names: Vec<String>,
    pub bases: Vec<[usize; 3]>,
    pub basis_names: Vec<String>,
    /// Orthogonal ray pairs `(i, j)`, `i < j`; empty when pair constraints
    /// are off.
    pub pairs: Vec<(usize, usize)>,
}

impl ColoringProblem {
    /// Deduplicates rays by canonical form and resolves bases by ray name.
    /// Duplicate rays keep the first name; later names alias it.
    pub fn new(rays: Vec<(String, Ray)>, bases: Vec<(String, [String; 3])>, pair_constraints: bool) -> Result<Self> {
        let mut kept: Vec<Ray> = Vec::new();
        let mut ray_names: Vec<String> = Vec::new();
        let mut alias: BTreeMap<String, usize> = BTreeMap::new();
        for (name, ray) in rays {
            if alias.contains_key(&name) {
                return Err(invalid!("ray name {name} is defined twice"));
            }
            let idx = match kept.iter().position(|r| r.same_ray(&ray)) {
                Some(i) => i,
                None => {
                    kept.push(ray);
                    ray_names.push(name.clone());
                    kept.len() - 1
                }
            };
            alias.insert(name, idx);
        }
        let mut resolved = Vec::new();
        let mut basis_names = Vec::new();
        for (name, members) in bases {
            let mut idx = [0usize; 3];
            for (slot, m) in idx.iter_mut().zip(&members) {
                *slot = *alias
                    .get(m)
                    .ok_or_else(|| invalid!("basis {name} references unknown ray {m}"))?;
            }
            if idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2] {
                return Err(invalid!("basis {name} repeats a ray"));
            }
            resolved.push(idx);
            basis_names.push(name);
        }
        let mut p = ColoringProblem {
            rays: kept,
            ray_names,
            bases: resolved,
            basis_names,
            pairs: Vec::new(),
        };
        if pair_constraints {
            p.pairs = p.orthogonal_pairs();
        }
        Ok(p)
    }

    /// Problem on unnamed rays and index triples.
    pub fn from_indices(rays: Vec<Ray>, bases: Vec<[usize; 3]>, pair_constraints: bool) -> Result<Self> {
        let named = rays
            .into_iter()
            .enumerate()
            .map(|(i, r)| (format!("r{i}"), r))
            .collect();
        let b = bases
            .into_iter()
            .enumerate()
            .map(|(i, t)| (format!("b{i}"), t.map(|j| format!("r{j}"))))
            .collect();
        ColoringProblem::new(named, b, pair_constraints)
    }

    pub fn orthogonal_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.rays.len() {
            for j in i + 1..self.rays.len() {
                if self.rays[i].orthogonal_to(&self.rays[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Subproblem on the given bases, keeping their rays and the pairs
    /// among them.
    pub fn restrict_to_bases(&self, which: &[usize]) -> ColoringProblem {
        let mut map: BTreeMap<usize, usize> = BTreeMap::new();
        let mut rays = Vec::new();
        let mut names = Vec::new();
        let mut bases = Vec::new();
        let mut basis_names = Vec::new();
        for &b in which {
            let t = self.bases[b].map(|r| {
                *map.entry(r).or_insert_with(|| {
                    rays.push(self.rays[r].clone());
                    names.push(self.ray_names[r].clone());
                    rays.len() - 1
                })
            });
            bases.push(t);
            basis_names.push(self.basis_names[b].clone());
        }
        let mut pairs: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .filter_map(|(i, j)| Some((*map.get(i)?, *map.get(j)?)))
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        pairs.sort_unstable();
        ColoringProblem {
            rays,
            ray_names: names,
            bases,
            basis_names,
            pairs,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub rays: usize,
    pub bases: usize,
    pub orthogonal_pairs: usize,
    pub exact_rays: usize,
    /// Basis indices containing each ray.
    pub memberships: Vec<Vec<usize>>,
    pub max_norm_defect: f64,
}

/// Checks unit norms, pairwise orthogonality inside every basis and
/// deduplication.
pub fn validate_problem(problem: &ColoringProblem) -> Result<ValidationReport> {
    let mut max_norm_defect: f64 = 0.0;
    for (i, r) in problem.rays.iter().enumerate() {
        let d = (libm::sqrt(dot(r.direction, r.direction)) - 1.0).abs();
        if d > 1e-10 {
            return Err(invalid!(
                "ray {} is not unit length after normalisation",
                problem.ray_names[i]
            ));
        }
        max_norm_defect = max_norm_defect.max(d);
        for j in 0..i {
            if r.same_ray(&problem.rays[j]) {
                return Err(invalid!(
                    "rays {} and {} coincide",
                    problem.ray_names[j],
                    problem.ray_names[i]
                ));
            }
        }
    }
    let mut memberships = alloc::vec![Vec::new(); problem.rays.len()];
    for (b, t) in problem.bases.iter().enumerate() {
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            let (ri, rj) = (&problem.rays[t[x]], &problem.rays[t[y]]);
            if !ri.orthogonal_to(rj) {
                return Err(invalid!(
                    "basis {}: rays {} and {} have inner product {:.6}",
                    problem.basis_names[b],
                    problem.ray_names[t[x]],
                    problem.ray_names[t[y]],
                    ri.cosine(rj)
                ));
            }
        }
        for &r in t {
            if r >= problem.rays.len() {
                return Err(invalid!(
                    "basis {} references ray {r} out of range",
                    problem.basis_names[b]
                ));
            }
            memberships[r].push(b);
        }
    }
    for &(i, j) in &problem.pairs {
        if !problem.rays[i].orthogonal_to(&problem.rays[j]) {
            return Err(invalid!("pair ({i}, {j}) is not orthogonal"));
        }
    }
    Ok(ValidationReport {
        rays: problem.rays.len(),
        bases: problem.bases.len(),
        orthogonal_pairs: problem.pairs.len(),
        exact_rays: problem.rays.iter().filter(|r| r.is_exact()).count(),
        memberships,
        max_norm_defect,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchStats {
    pub nodes: u64,
    pub max_depth: usize,
    pub backtracks: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringResult {
    Colored { assignment: Vec<bool>, stats: SearchStats },
    Unsat { stats: SearchStats },
}

impl ColoringResult {
    pub fn stats(&self) -> SearchStats {
        match self {
            ColoringResult::Colored { stats, .. } | ColoringResult::Unsat { stats } => *stats,
        }
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, ColoringResult::Unsat { .. })
    }
}

#[derive(Clone, Copy)]
enum Constraint {
    ExactlyOne([usize; 3]),
    AtMostOne(usize, usize),
}

struct Solver<'a> {
    constraints: Vec<Constraint>,
    watch: Vec<Vec<usize>>,
    order: Vec<usize>,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
    stats: SearchStats,
    _p: core::marker::PhantomData<&'a ()>,
}

impl Solver<'_> {
    fn new(p: &ColoringProblem) -> Self {
        let n = p.rays.len();
        let mut constraints: Vec<Constraint> = p.bases.iter().map(|t| Constraint::ExactlyOne(*t)).collect();
        constraints.extend(p.pairs.iter().map(|&(i, j)| Constraint::AtMostOne(i, j)));
        let mut watch = alloc::vec![Vec::new(); n];
        for (c, k) in constraints.iter().enumerate() {
            match k {
                Constraint::ExactlyOne(t) => t.iter().for_each(|&r| watch[r].push(c)),
                Constraint::AtMostOne(i, j) => {
                    watch[*i].push(c);
                    watch[*j].push(c);
                }
            }
        }
        // most constrained first; index breaks ties
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&r| (core::cmp::Reverse(watch[r].len()), r));
        Solver {
            constraints,
            watch,
            order,
            value: alloc::vec![None; n],
            trail: Vec::new(),
            stats: SearchStats::default(),
            _p: core::marker::PhantomData,
        }
    }

    fn assign(&mut self, r: usize, v: bool) -> bool {
        match self.value[r] {
            Some(x) => x == v,
            None => {
                self.value[r] = Some(v);
                self.trail.push(r);
                true
            }
        }
    }

    /// Unit propagation from the trail position `from`; false on conflict.
    fn propagate(&mut self, mut from: usize) -> bool {
        while from < self.trail.len() {
            let r = self.trail[from];
            from += 1;
            for ci in 0..self.watch[r].len() {
                let c = self.constraints[self.watch[r][ci]];
                let ok = match c {
                    Constraint::AtMostOne(i, j) => {
                        let other = if i == r { j } else { i };
                        self.value[r] != Some(true) || self.assign(other, false)
                    }
                    Constraint::ExactlyOne(t) => {
                        let ones = t.iter().filter(|&&x| self.value[x] == Some(true)).count();
                        let zeros = t.iter().filter(|&&x| self.value[x] == Some(false)).count();
                        if ones > 1 || zeros == 3 {
                            false
                        } else if ones == 1 {
                            t.iter().all(|&x| self.value[x] == Some(true) || self.assign(x, false))
                        } else if zeros == 2 {
                            let last = *t.iter().find(|&&x| self.value[x].is_none()).expect("one free");
                            self.assign(last, true)
                        } else {
                            true
                        }
                    }
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    fn undo(&mut self, to: usize) {
        while self.trail.len() > to {
            let r = self.trail.pop().expect("non-empty");
            self.value[r] = None;
        }
    }

    /// Calls `found` on each solution; stops when it returns false.
    fn search(&mut self, depth: usize, found: &mut dyn FnMut(&[Option<bool>]) -> bool) -> bool {
        self.stats.nodes += 1;
        self.stats.max_depth = self.stats.max_depth.max(depth);
        let Some(&r) = self.order.iter().find(|&&r| self.value[r].is_none()) else {
            return found(&self.value);
        };
        for v in [true, false] {
            let mark = self.trail.len();
            self.assign(r, v);
            if self.propagate(mark) && !self.search(depth + 1, found) {
                self.undo(mark);
                return false;
            }
            self.undo(mark);
            self.stats.backtracks += 1;
        }
        true
    }

    fn run(&mut self, found: &mut dyn FnMut(&[Option<bool>]) -> bool) {
        self.search(0, found);
    }
}

/// Complete backtracking search with propagation; most-constrained ray
/// first, `1` tried before `0`.
pub fn search_coloring(problem: &ColoringProblem) -> ColoringResult {
    let mut solver = Solver::new(problem);
    let mut solution: Option<Vec<bool>> = None;
    solver.run(&mut |v| {
        solution = Some(v.iter().map(|x| x.expect("complete")).collect());
        false
    });
    match solution {
        Some(assignment) => ColoringResult::Colored {
            assignment,
            stats: solver.stats,
        },
        None => ColoringResult::Unsat { stats: solver.stats },
    }
}

/// Number of colourings, by the same search run to exhaustion.
pub fn count_colorings(problem: &ColoringProblem) -> (u64, SearchStats) {
    let mut solver = Solver::new(problem);
    let mut count = 0u64;
    solver.run(&mut |_| {
        count += 1;
        true
    });
    (count, solver.stats)
}

/// Every basis has exactly one marked ray and no orthogonal pair is marked
/// twice. Written independently of the search.
pub fn verify_coloring(problem: &ColoringProblem, assignment: &[Option<bool>]) -> Result<bool> {
    if assignment.len() != problem.rays.len() {
        return Err(invalid!(
            "assignment covers {} rays, problem has {}",
            assignment.len(),
            problem.rays.len()
        ));
    }
    if let Some(i) = assignment.iter().position(Option::is_none) {
        return Err(invalid!("ray {} is unassigned", problem.ray_names[i]));
    }
    let marked = |r: usize| assignment[r] == Some(true);
    let bases_ok = problem
        .bases
        .iter()
        .all(|t| t.iter().filter(|&&r| marked(r)).count() == 1);
    let pairs_ok = problem.pairs.iter().all(|&(i, j)| !(marked(i) && marked(j)));
    Ok(bases_ok && pairs_ok)
}

pub fn verify_total(problem: &ColoringProblem, assignment: &[bool]) -> bool {
    let a: Vec<Option<bool>> = assignment.iter().map(|&b| Some(b)).collect();
    verify_coloring(problem, &a).unwrap_or(false)
}

/// Plain `2^n` enumeration for problems of at most 20 rays.
pub fn enumerate_colorings(problem: &ColoringProblem) -> Result<u64> {
    let n = problem.rays.len();
    if n > MAX_ORACLE_RAYS {
        return Err(Error::Capacity {
            what: "rays for plain enumeration",
            needed: n as u128,
            cap: MAX_ORACLE_RAYS as u128,
        });
    }
    let basis_masks: Vec<u32> = problem
        .bases
        .iter()
        .map(|t| t.iter().fold(0u32, |m, &r| m | (1 << r)))
        .collect();
    let pair_masks: Vec<u32> = problem.pairs.iter().map(|&(i, j)| (1 << i) | (1 << j)).collect();
    let mut count = 0;
    for mask in 0u32..(1u32 << n) {
        if basis_masks.iter().all(|b| (mask & b).count_ones() == 1)
            && pair_masks.iter().all(|p| (mask & p).count_ones() <= 1)
        {
            count += 1;
        }
    }
    Ok(count)
}

/// Perfect correlation makes a ray's value independent of the basis it is
/// measured in; this is the first basis pair where it is not.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrelationViolation {
    pub ray: String,
    pub first_basis: String,
    pub first_value: u8,
    pub second_basis: String,
    pub second_value: u8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FwtReport {
    pub violation: Option<CorrelationViolation>,
    /// Whether the induced colouring is valid, when the map is consistent.
    pub induced_coloring_valid: Option<bool>,
    /// The exhaustive search found no colouring at all.
    pub problem_unsat: bool,
    pub search_nodes: u64,
}

impl FwtReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none() && self.induced_coloring_valid == Some(true)
    }
}

/// Checks a per-basis value map for basis independence, then verifies the
/// induced colouring; the companion search decides whether any consistent
/// map could exist.
pub fn fwt_reduction_check(problem: &ColoringProblem, map: &[[Option<u8>; 3]]) -> Result<FwtReport> {
    if map.len() != problem.bases.len() {
        return Err(invalid!(
            "value map covers {} bases, problem has {}",
            map.len(),
            problem.bases.len()
        ));
    }
    let mut seen: Vec<Option<(usize, u8)>> = alloc::vec![None; problem.rays.len()];
    let mut violation = None;
    'outer: for (b, (t, vals)) in problem.bases.iter().zip(map).enumerate() {
        for (pos, (&r, v)) in t.iter().zip(vals).enumerate() {
            let v = v.ok_or_else(|| {
                invalid!(
                    "value map has no entry for basis {} position {pos}",
                    problem.basis_names[b]
                )
            })?;
            if v > 1 {
                return Err(invalid!("value map entries must be 0 or 1"));
            }
            match seen[r] {
                None => seen[r] = Some((b, v)),
                Some((b0, v0)) if v0 != v => {
                    violation = Some(CorrelationViolation {
                        ray: problem.ray_names[r].clone(),
                        first_basis: problem.basis_names[b0].clone(),
                        first_value: v0,
                        second_basis: problem.basis_names[b].clone(),
                        second_value: v,
                    });
                    break 'outer;
                }
                _ => {}
            }
        }
    }
    if violation.is_none() {
        // finish the totality check past an early break
        for (b, vals) in map.iter().enumerate() {
            if vals.iter().any(Option::is_none) {
                return Err(invalid!("value map is partial at basis {}", problem.basis_names[b]));
            }
        }
    }
    let induced_coloring_valid = match violation {
        Some(_) => None,
        None => {
            let a: Vec<Option<bool>> = seen.iter().map(|s| Some(s.is_some_and(|(_, v)| v == 1))).collect();
            Some(verify_coloring(problem, &a)?)
        }
    };
    let companion = search_coloring(problem);
    Ok(FwtReport {
        violation,
        induced_coloring_valid,
        problem_unsat: companion.is_unsat(),
        search_nodes: companion.stats().nodes,
    })
}

/// The value map a colouring induces: every basis reads the ray's colour.
pub fn value_map_from_coloring(problem: &ColoringProblem, coloring: &[bool]) -> Vec<[Option<u8>; 3]> {
    problem
        .bases
        .iter()
        .map(|t| t.map(|r| Some(coloring[r] as u8)))
        .collect()
}

/// Squared-spin outcome of each basis ray: marked ↦ 0, unmarked ↦ 1.
pub fn outcome_triple(problem: &ColoringProblem, basis: usize, coloring: &[bool]) -> [u8; 3] {
    problem.bases[basis].map(|r| (!coloring[r]) as u8)
}

/// The outcome set `{(0,1,1), (1,0,1), (1,1,0)}`.
pub const OUTCOME_SET: [[u8; 3]; 3] = [[0, 1, 1], [1, 0, 1], [1, 1, 0]];

/// The 33 rays whose squared components are permutations of (0,0,1),
/// (0,1,1), (0,1,2) or (1,1,2), with their 16 orthogonal triads.
pub fn peres33() -> ColoringProblem {
    let z = QSqrt2::int(0);
    let one = QSqrt2::int(1);
    let s2 = QSqrt2::sqrt2_times(Q::from_integer(1));
    let comps = [z, one, -one, s2, -s2];
    let mut rays: Vec<Ray> = Vec::new();
    for x in comps {
        for y in comps {
            for w in comps {
                let v = [x, y, w];
                let sq: Vec<i128> = v.iter().map(|c| *(*c * *c).a.numer()).collect();
                let mut key = sq.clone();
                key.sort_unstable();
                if ![[0, 0, 1], [0, 1, 1], [0, 1, 2], [1, 1, 2]]
                    .iter()
                    .any(|k| k[..] == key[..])
                {
                    continue;
                }
                let r = Ray::exact(v).expect("nonzero");
                if !rays.iter().any(|o| o.same_ray(&r)) {
                    rays.push(r);
                }
            }
        }
    }
    let mut bases = Vec::new();
    for i in 0..rays.len() {
        for j in i + 1..rays.len() {
            if !rays[i].orthogonal_to(&rays[j]) {
                continue;
            }
            for k in j + 1..rays.len() {
                if rays[i].orthogonal_to(&rays[k]) && rays[j].orthogonal_to(&rays[k]) {
                    bases.push([i, j, k]);
                }
            }
        }
    }
    ColoringProblem::from_indices(rays, bases, true).expect("well formed")
}
