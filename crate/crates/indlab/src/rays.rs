//! `rays/v1` ray-set files.
//!
//! ```text
//! rays/v1
//! # comment
//! ray x 1 0 0
//! ray d 1 -1 sqrt2
//! ray q 1/2 0.5 -3/2*sqrt2
//! basis B1 x y z
//! option pairs off
//! ```
//!
//! Coordinates are integers, fractions `p/q`, or elements of Q(√2) written
//! `sqrt2`, `b*sqrt2` or `a+b*sqrt2`; these are exact. A coordinate with a
//! decimal point or exponent is floating point, and a ray with any floating
//! coordinate is compared with a 1e-8 tolerance. `option pairs off` drops the
//! orthogonal-pair constraints.

use std::fmt::Write as _;
use std::path::Path;

use indlab_core::ks::field::{QSqrt2, Q};
use indlab_core::ks::{ColoringProblem, Coords, Ray};

use crate::error::{Error, Result};

pub const HEADER: &str = "rays/v1";

enum Coord {
    Exact(QSqrt2),
    Float(f64),
}

fn parse_rational(t: &str) -> Option<Q> {
    let t = t.strip_prefix('+').unwrap_or(t);
    match t.split_once('/') {
        Some((p, q)) => {
            let (p, q): (i128, i128) = (p.parse().ok()?, q.parse().ok()?);
            (q != 0).then(|| Q::new(p, q))
        }
        None => t.parse::<i128>().ok().map(Q::from_integer),
    }
}

fn parse_coord(t: &str) -> Option<Coord> {
    if let Some(head) = t.strip_suffix("sqrt2") {
        let (a, b) = match head.strip_suffix('*') {
            Some(h) => {
                let split = h
                    .char_indices()
                    .skip(1)
                    .filter(|(_, ch)| *ch == '+' || *ch == '-')
                    .last();
                match split {
                    Some((i, _)) => (&h[..i], &h[i..]),
                    None => ("", h),
                }
            }
            None => match head.chars().last() {
                None => ("", "1"),
                Some('+') => (&head[..head.len() - 1], "1"),
                Some('-') => (&head[..head.len() - 1], "-1"),
                Some(_) => return None,
            },
        };
        let a = if a.is_empty() {
            Q::from_integer(0)
        } else {
            parse_rational(a)?
        };
        return Some(Coord::Exact(QSqrt2::new(a, parse_rational(b)?)));
    }
    if t.contains(['.', 'e', 'E']) {
        return t.parse::<f64>().ok().filter(|x| x.is_finite()).map(Coord::Float);
    }
    parse_rational(t).map(|q| Coord::Exact(QSqrt2::rational(q)))
}

pub fn parse_rays(text: &str) -> Result<ColoringProblem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()));
    match lines.find(|(_, l)| !l.is_empty()) {
        Some((_, HEADER)) => {}
        Some((_, other)) if other.starts_with("rays/") => {
            return Err(Error::Schema {
                context: "ray file".into(),
                found: other.into(),
                expected: HEADER.into(),
            })
        }
        Some((n, _)) => return Err(Error::parse("rays/v1", n, "missing `rays/v1` header")),
        None => return Err(Error::parse("rays/v1", 1, "empty file")),
    }
    let mut rays = Vec::new();
    let mut bases = Vec::new();
    let mut pairs = true;
    for (n, line) in lines.filter(|(_, l)| !l.is_empty()) {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            ["ray", name, x, y, z] => {
                let cs = [x, y, z]
                    .map(|t| parse_coord(t).ok_or_else(|| Error::parse("rays/v1", n, format!("bad coordinate `{t}`"))));
                let mut exact = Vec::new();
                let mut float = Vec::new();
                for c in cs {
                    match c? {
                        Coord::Exact(q) => {
                            float.push(q.to_f64());
                            exact.push(q);
                        }
                        Coord::Float(f) => float.push(f),
                    }
                }
                let ray = if exact.len() == 3 {
                    Ray::exact([exact[0], exact[1], exact[2]])
                } else {
                    Ray::float([float[0], float[1], float[2]])
                }
                .map_err(|e| Error::parse("rays/v1", n, e.to_string()))?;
                rays.push((name.to_string(), ray));
            }
            ["basis", name, a, b, c] => bases.push((name.to_string(), [a, b, c].map(|s| s.to_string()))),
            ["option", "pairs", v @ ("on" | "off")] => pairs = *v == "on",
            _ => return Err(Error::parse("rays/v1", n, format!("unrecognised line `{line}`"))),
        }
    }
    Ok(ColoringProblem::new(rays, bases, pairs)?)
}

pub fn read_rays(path: &Path) -> Result<ColoringProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rays(&text)
}

/// Serialises a problem; `header` lines become leading comments.
pub fn format_rays(problem: &ColoringProblem, header: &[&str]) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    for h in header {
        let _ = writeln!(out, "# {h}");
    }
    for (name, r) in problem.ray_names.iter().zip(&problem.rays) {
        let coords = match &r.coords {
            Coords::Exact(v) => v.map(|x| x.to_string()),
            Coords::Float(v) => v.map(|x| format!("{x:?}")),
        };
        let _ = writeln!(out, "ray {name} {} {} {}", coords[0], coords[1], coords[2]);
    }
    for (name, t) in problem.basis_names.iter().zip(&problem.bases) {
        let _ = writeln!(
            out,
            "basis {name} {} {} {}",
            problem.ray_names[t[0]], problem.ray_names[t[1]], problem.ray_names[t[2]]
        );
    }
    if problem.pairs.is_empty() && !problem.orthogonal_pairs().is_empty() {
        out.push_str("option pairs off\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i128, d: i128) -> Q {
        Q::new(p, d)
    }

    fn exact(t: &str) -> QSqrt2 {
        match parse_coord(t) {
            Some(Coord::Exact(x)) => x,
            _ => panic!("{t} did not parse exactly"),
        }
    }

    #[test]
    fn coordinate_forms() {
        assert_eq!(exact("3"), QSqrt2::int(3));
        assert_eq!(exact("-3/4"), QSqrt2::rational(q(-3, 4)));
        assert_eq!(exact("sqrt2"), QSqrt2::new(q(0, 1), q(1, 1)));
        assert_eq!(exact("-sqrt2"), QSqrt2::new(q(0, 1), q(-1, 1)));
        assert_eq!(exact("1/2*sqrt2"), QSqrt2::new(q(0, 1), q(1, 2)));
        assert_eq!(exact("1-sqrt2"), QSqrt2::new(q(1, 1), q(-1, 1)));
        assert_eq!(exact("-1/3+2/5*sqrt2"), QSqrt2::new(q(-1, 3), q(2, 5)));
        assert!(matches!(parse_coord("0.6"), Some(Coord::Float(x)) if x == 0.6));
        assert!(parse_coord("x").is_none());
        assert!(parse_coord("1/0").is_none());
    }

    #[test]
    fn decimal_rays_use_tolerance() {
        let p = parse_rays("rays/v1\nray a 0.6 0.8 0\nray b -0.8 0.6 0\nray c 0 0 1\nbasis B a b c\n").unwrap();
        indlab_core::ks::validate_problem(&p).unwrap();
        assert!(!p.rays[0].is_exact());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_rays("rays/v1\nray a 1 0 0\nray b 0 one 0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_rays("rays/v1\nbasis B a b c\n").unwrap_err();
        assert!(e.to_string().contains("unknown ray a"), "{e}");
        assert!(matches!(parse_rays("rays/v2\n"), Err(Error::Schema { .. })));
    }

    #[test]
    fn pairs_option() {
        let p = parse_rays("rays/v1\noption pairs off\nray x 1 0 0\nray y 0 1 0\n").unwrap();
        assert!(p.pairs.is_empty());
        assert!(format_rays(&p, &[]).contains("option pairs off"));
    }

    proptest! {
        #[test]
        fn exact_round_trip(a in -40i128..40, b in -40i128..40, d in 1i128..9, e in 1i128..9) {
            let x = QSqrt2::new(q(a, d), q(b, e));
            prop_assert_eq!(exact(&x.to_string()), x);
        }

        #[test]
        fn problem_round_trip(pick in proptest::collection::vec(0usize..16, 1..6)) {
            let p = indlab_core::ks::peres33();
            let sub = p.restrict_to_bases(&pick);
            let back = parse_rays(&format_rays(&sub, &["generated"])).unwrap();
            prop_assert_eq!(back.rays, sub.rays);
            prop_assert_eq!(back.bases, sub.bases);
            prop_assert_eq!(back.pairs, sub.pairs);
        }
    }
}
