use std::fmt;

use serde::{Deserialize, Serialize};

/// Relative widening applied after every rounded operation.
pub const INFLATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Interval {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Interval {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    /// Widens outward by a relative epsilon.
    pub fn inflate(self) -> Interval {
        Interval {
            lo: self.lo - INFLATE * (1.0 + self.lo.abs()),
            hi: self.hi + INFLATE * (1.0 + self.hi.abs()),
        }
    }

    /// Intersection; the result is empty (`lo > hi`) when disjoint.
    pub fn meet(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo.min(o.lo),
            hi: self.hi.max(o.hi),
        }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
        .inflate()
    }

    pub fn sub(self, o: Interval) -> Interval {
        Interval {
            lo: self.lo - o.hi,
            hi: self.hi - o.lo,
        }
        .inflate()
    }

    pub fn scale(self, k: f64) -> Interval {
        if k >= 0.0 {
            Interval {
                lo: k * self.lo,
                hi: k * self.hi,
            }
        } else {
            Interval {
                lo: k * self.hi,
                hi: k * self.lo,
            }
        }
    }

    pub fn shift(self, c: f64) -> Interval {
        Interval {
            lo: self.lo + c,
            hi: self.hi + c,
        }
    }

    pub fn mul(self, o: Interval) -> Interval {
        let p = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = p.iter().cloned().fold(f64::INFINITY, |a, b| {
            a.min(if b.is_nan() { 0.0 } else { b })
        });
        let hi = p.iter().cloned().fold(f64::NEG_INFINITY, |a, b| {
            a.max(if b.is_nan() { 0.0 } else { b })
        });
        Interval { lo, hi }.inflate()
    }

    /// Division by an interval that excludes zero; otherwise the whole line.
    pub fn div(self, o: Interval) -> Interval {
        if o.lo > 0.0 || o.hi < 0.0 {
            self.mul(Interval {
                lo: 1.0 / o.hi,
                hi: 1.0 / o.lo,
            })
        } else {
            Interval::ENTIRE
        }
    }

    pub fn sqr(self) -> Interval {
        let (a, b) = (self.lo * self.lo, self.hi * self.hi);
        if self.lo >= 0.0 {
            Interval { lo: a, hi: b }
        } else if self.hi <= 0.0 {
            Interval { lo: b, hi: a }
        } else {
            Interval {
                lo: 0.0,
                hi: a.max(b),
            }
        }
        .inflate()
        .meet(Interval {
            lo: 0.0,
            hi: f64::INFINITY,
        })
    }

    pub fn exp(self) -> Interval {
        Interval {
            lo: self.lo.exp(),
            hi: self.hi.exp(),
        }
        .inflate()
        .meet(Interval {
            lo: 0.0,
            hi: f64::INFINITY,
        })
    }

    pub fn ln(self) -> Interval {
        Interval {
            lo: if self.lo > 0.0 {
                self.lo.ln()
            } else {
                f64::NEG_INFINITY
            },
            hi: if self.hi > 0.0 {
                self.hi.ln()
            } else {
                f64::NEG_INFINITY
            },
        }
        .inflate()
    }

    pub fn tanh(self) -> Interval {
        Interval {
            lo: self.lo.tanh(),
            hi: self.hi.tanh(),
        }
        .inflate()
        .meet(Interval { lo: -1.0, hi: 1.0 })
    }

    pub fn atanh(self) -> Interval {
        let f = |v: f64| {
            if v <= -1.0 {
                f64::NEG_INFINITY
            } else if v >= 1.0 {
                f64::INFINITY
            } else {
                v.atanh()
            }
        };
        Interval {
            lo: f(self.lo),
            hi: f(self.hi),
        }
        .inflate()
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Interval {
                lo: -self.hi,
                hi: -self.lo,
            }
        } else {
            Interval {
                lo: 0.0,
                hi: self.hi.max(-self.lo),
            }
        }
    }

    /// Interval of `(x - c)^2` for `x` in `self`.
    pub fn sq_dist(self, c: f64) -> Interval {
        self.shift(-c).sqr()
    }
}
