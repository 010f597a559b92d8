//! Exact arithmetic in Q(√2).

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;

pub type Q = Ratio<i128>;

/// `a + b√2` with rational `a`, `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    pub a: Q,
    pub b: Q,
}

impl QSqrt2 {
    pub const ZERO: QSqrt2 = QSqrt2 {
        a: Ratio::new_raw(0, 1),
        b: Ratio::new_raw(0, 1),
    };

    pub fn new(a: Q, b: Q) -> Self {
        QSqrt2 { a, b }
    }

    pub fn rational(a: Q) -> Self {
        QSqrt2 {
            a,
            b: Q::from_integer(0),
        }
    }

    pub fn int(a: i128) -> Self {
        Self::rational(Q::from_integer(a))
    }

    pub fn sqrt2_times(b: Q) -> Self {
        QSqrt2 {
            a: Q::from_integer(0),
            b,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self.a.numer() == 0 && *self.b.numer() == 0
    }

    /// Exact sign, using `√2` irrational.
    pub fn signum(&self) -> i8 {
        let sa = self.a.numer().signum();
        let sb = self.b.numer().signum();
        if sa >= 0 && sb >= 0 {
            return (sa + sb).signum() as i8;
        }
        if sa <= 0 && sb <= 0 {
            return -((sa + sb).abs().signum() as i8);
        }
        // opposite signs: compare a² with 2b²
        match (self.a * self.a).cmp(&(Q::from_integer(2) * self.b * self.b)) {
            Ordering::Greater => sa as i8,
            Ordering::Less => sb as i8,
            Ordering::Equal => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        q_f64(self.a) + q_f64(self.b) * core::f64::consts::SQRT_2
    }
}

pub fn q_f64(q: Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, o: QSqrt2) -> QSqrt2 {
        QSqrt2::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2::new(-self.a, -self.b)
    }
}

impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, o: QSqrt2) -> QSqrt2 {
        let two = Q::from_integer(2);
        QSqrt2::new(self.a * o.a + two * self.b * o.b, self.a * o.b + self.b * o.a)
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let za = *self.a.numer() == 0;
        let zb = *self.b.numer() == 0;
        match (za, zb) {
            (true, true) => f.write_str("0"),
            (false, true) => write!(f, "{}", self.a),
            (true, false) if self.b == Q::from_integer(1) => f.write_str("sqrt2"),
            (true, false) if self.b == Q::from_integer(-1) => f.write_str("-sqrt2"),
            (true, false) => write!(f, "{}*sqrt2", self.b),
            (false, false) => {
                let one = Q::from_integer(1);
                let sign = if *self.b.numer() < 0 { '-' } else { '+' };
                let m = if *self.b.numer() < 0 { -self.b } else { self.b };
                if m == one {
                    write!(f, "{}{sign}sqrt2", self.a)
                } else {
                    write!(f, "{}{sign}{m}*sqrt2", self.a)
                }
            }
        }
    }
}
