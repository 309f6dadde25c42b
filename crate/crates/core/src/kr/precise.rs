//! Multiprecision evaluation of 6j-symbols and the sums built from them.
//!
//! The alternating sums over internal colors cancel heavily (tens to hundreds of
//! digits at the levels of interest), so they are carried out in binary floating point
//! of adjustable width. Every value carries a first-order bound on its absolute error,
//! stored as `log2`, so callers can tell whether the working precision sufficed.

use astro_float::{BigFloat, Consts, RoundingMode};

use super::{Level, SixJArgs};

const RM: RoundingMode = RoundingMode::ToEven;

pub(crate) fn log2_abs(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let e = x.exponent().unwrap_or(0) as f64;
    let top = x
        .mantissa_digits()
        .and_then(|m| m.last().copied())
        .unwrap_or(0);
    e + (top as f64 / 2f64.powi(64)).log2()
}

/// `log2(2^a + 2^b)`.
fn log2_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
}

fn zero(p: usize) -> BigFloat {
    BigFloat::from_word(0, p)
}

/// A complex number `re + i·im` with `err ≥ log2` of its absolute error.
#[derive(Debug, Clone)]
pub struct Precise {
    pub re: BigFloat,
    pub im: BigFloat,
    pub err: f64,
}

impl Precise {
    pub fn zero(p: usize) -> Self {
        Precise {
            re: zero(p),
            im: zero(p),
            err: f64::NEG_INFINITY,
        }
    }

    pub fn one(p: usize) -> Self {
        Precise {
            re: BigFloat::from_word(1, p),
            im: zero(p),
            err: f64::NEG_INFINITY,
        }
    }

    /// `x · i^k` where `x` is known to relative accuracy `2^rel`.
    fn from_quarter(x: BigFloat, rel: f64, k: i64, p: usize) -> Self {
        let err = log2_abs(&x) + rel;
        let (re, im) = match k.rem_euclid(4) {
            0 => (x, zero(p)),
            1 => (zero(p), x),
            2 => (x.neg(), zero(p)),
            _ => (zero(p), x.neg()),
        };
        Precise { re, im, err }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// `log2 |self|`, accurate to a fraction of a bit.
    pub fn log2_abs(&self) -> f64 {
        let (a, b) = (log2_abs(&self.re), log2_abs(&self.im));
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        0.5 * log2_add(2.0 * a, 2.0 * b)
    }

    /// `log2` of the relative error bound.
    pub fn rel_err(&self) -> f64 {
        self.err - self.log2_abs()
    }

    pub fn mul(&self, o: &Precise, p: usize) -> Precise {
        let rr = self.re.mul(&o.re, p, RM);
        let ii = self.im.mul(&o.im, p, RM);
        let ri = self.re.mul(&o.im, p, RM);
        let ir = self.im.mul(&o.re, p, RM);
        let out_re = rr.sub(&ii, p, RM);
        let out_im = ri.add(&ir, p, RM);
        let (la, lb) = (self.log2_abs(), o.log2_abs());
        let prop = log2_add(la + o.err, lb + self.err);
        let round = la + lb + 2.0 - p as f64;
        Precise {
            re: out_re,
            im: out_im,
            err: log2_add(prop, round),
        }
    }

    pub fn scale(&self, x: &BigFloat, rel: f64, p: usize) -> Precise {
        let lx = log2_abs(x);
        let ls = self.log2_abs();
        let err = log2_add(
            self.err + lx,
            log2_add(ls + lx + rel, ls + lx + 1.0 - p as f64),
        );
        Precise {
            re: self.re.mul(x, p, RM),
            im: self.im.mul(x, p, RM),
            err,
        }
    }

    pub fn powi(&self, n: u32, p: usize) -> Precise {
        let mut acc = Precise::one(p);
        for _ in 0..n {
            acc = acc.mul(self, p);
        }
        acc
    }

    pub fn add_assign(&mut self, o: &Precise, p: usize) {
        self.re = self.re.add(&o.re, p, RM);
        self.im = self.im.add(&o.im, p, RM);
        let round = self.log2_abs().max(o.log2_abs()) + 1.0 - p as f64;
        self.err = log2_add(log2_add(self.err, o.err), round);
    }

    /// Nearest double-precision value; overflows to infinity for huge magnitudes.
    pub fn to_complex(&self) -> num_complex::Complex64 {
        if self.is_zero() {
            return num_complex::Complex64::new(0.0, 0.0);
        }
        let (l, arg) = self.log_polar();
        num_complex::Complex64::from_polar(l.exp(), arg)
    }

    /// `(log|z|, arg z)` in natural units.
    pub fn log_polar(&self) -> (f64, f64) {
        let l = self.log2_abs() * std::f64::consts::LN_2;
        let s = self.log2_abs();
        // Scale both parts by the same power of two before taking the angle.
        let re = (log2_abs(&self.re) - s).exp2() * if self.re.is_negative() { -1.0 } else { 1.0 };
        let im = (log2_abs(&self.im) - s).exp2() * if self.im.is_negative() { -1.0 } else { 1.0 };
        (l, im.atan2(re))
    }
}

/// Sums terms, tracking the error bound.
pub fn precise_sum<I: IntoIterator<Item = Precise>>(terms: I, p: usize) -> Precise {
    let mut acc = Precise::zero(p);
    for t in terms {
        acc.add_assign(&t, p);
    }
    acc
}

/// Normalized quantum integers and factorials of one level at one working precision.
#[derive(Debug, Clone)]
pub struct PreciseTable {
    level: Level,
    prec: usize,
    /// `[n]` for `0 ≤ n < r`.
    qint: Vec<BigFloat>,
    /// `[n]!` for `0 ≤ n < r`; zero beyond.
    fact: Vec<BigFloat>,
}

impl PreciseTable {
    pub fn new(level: Level, prec: usize) -> Self {
        let r = level.r() as usize;
        let p = prec + 16;
        let mut cc = Consts::new().expect("astro-float constants");
        let two_pi_over_r = cc.pi(p, RM).mul(&BigFloat::from_word(2, p), p, RM).div(
            &BigFloat::from_word(r as u64, p),
            p,
            RM,
        );
        let mut sines = vec![zero(p); r];
        for m in 1..=r / 2 {
            let s = two_pi_over_r
                .mul(&BigFloat::from_word(m as u64, p), p, RM)
                .sin(p, RM, &mut cc);
            sines[r - m] = s.neg();
            sines[m] = s;
        }
        let s1 = sines[1].clone();
        let mut qint = Vec::with_capacity(r);
        qint.push(zero(p));
        for s in &sines[1..] {
            let mut q = s.div(&s1, p, RM);
            q.set_precision(prec, RM).expect("precision");
            qint.push(q);
        }
        let mut fact = Vec::with_capacity(r);
        fact.push(BigFloat::from_word(1, prec));
        for n in 1..r {
            let next = fact[n - 1].mul(&qint[n], prec, RM);
            fact.push(next);
        }
        PreciseTable {
            level,
            prec,
            qint,
            fact,
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn level(&self) -> Level {
        self.level
    }

    /// `log2` relative error bound of a table entry with index `n`.
    fn rel(&self, n: usize) -> f64 {
        ((n + 4) as f64).log2() + 2.0 - self.prec as f64
    }

    fn fact(&self, n: usize) -> Option<&BigFloat> {
        self.fact.get(n)
    }

    /// `[n]`, exactly zero when `r | n`; the sequence has period `r`.
    pub fn qint(&self, n: i64) -> BigFloat {
        self.qint[n.rem_euclid(self.level.r() as i64) as usize].clone()
    }

    /// Loop value `(-1)^c [c+1]` of a doubled color `c`.
    pub fn loop_value(&self, c: u32) -> Precise {
        let q = self.qint(c as i64 + 1);
        let k = if c % 2 == 0 { 0 } else { 2 };
        Precise::from_quarter(q, self.rel(c as usize + 1), k, self.prec)
    }

    /// `Δ(x, y, w)`: magnitude and power of `i` of its phase.
    fn delta(&self, x: u32, y: u32, w: u32) -> (BigFloat, f64, i64) {
        let n = [(x + y - w) / 2, (x + w - y) / 2, (y + w - x) / 2];
        let d = (x + y + w) / 2 + 1;
        let p = self.prec;
        let mut num = BigFloat::from_word(1, p);
        for &k in &n {
            num = num.mul(&self.fact[k as usize], p, RM);
        }
        let ratio = num.div(&self.fact[d as usize], p, RM).abs();
        let negs =
            n.iter().map(|&k| neg_count(k, self.level)).sum::<i64>() - neg_count(d, self.level);
        let rel = self.rel(d as usize) + 1.0;
        (ratio.sqrt(p, RM), rel, negs)
    }

    /// Racah–Wigner 6j-symbol in the unitary tetrahedral normalization.
    pub fn unitary_tet(&self, args: &SixJArgs) -> Precise {
        self.symbol(args, true)
    }

    pub fn sixj(&self, args: &SixJArgs) -> Precise {
        self.symbol(args, false)
    }

    fn symbol(&self, args: &SixJArgs, unitary: bool) -> Precise {
        let p = self.prec;
        if !args.admissible(self.level) {
            return Precise::zero(p);
        }
        let (t, q) = args.racah_bounds();
        let lo = *t.iter().max().unwrap();
        let hi = *q.iter().min().unwrap();
        let mut sum = zero(p);
        let mut max_log = f64::NEG_INFINITY;
        let mut count = 0usize;
        for z in lo..=hi {
            let top = match self.fact(z as usize + 1) {
                Some(f) if !f.is_zero() => f,
                _ => continue,
            };
            let mut den = BigFloat::from_word(1, p);
            for &ti in &t {
                den = den.mul(&self.fact[(z - ti) as usize], p, RM);
            }
            for &qj in &q {
                den = den.mul(&self.fact[(qj - z) as usize], p, RM);
            }
            let mut term = top.div(&den, p, RM);
            if z % 2 == 1 {
                term.inv_sign();
            }
            max_log = max_log.max(log2_abs(&term));
            count += 1;
            sum = sum.add(&term, p, RM);
        }
        if sum.is_zero() {
            return Precise::zero(p);
        }
        // Each term carries ~10 roundings plus table error; the sum adds one per term.
        let sum_err = max_log + ((count + 1) as f64).log2() + self.rel(hi as usize + 1) + 4.0;
        let mut mag = sum.abs();
        let mut rel = sum_err - log2_abs(&sum);
        let mut k = 0i64;
        for (x, y, w) in args.triads() {
            let (d, drel, negs) = self.delta(x, y, w);
            mag = mag.mul(&d, p, RM);
            rel = log2_add(rel, drel);
            k += negs;
        }
        if sum.is_negative() {
            k += 2;
        }
        if unitary {
            k -= t.iter().map(|&v| v as i64).sum::<i64>();
        }
        Precise::from_quarter(mag, rel, k, p)
    }
}

/// Number of negative factors among `[1], …, [n]`.
pub(crate) fn neg_count(n: u32, level: Level) -> i64 {
    let r = level.r() as i64;
    let n = n as i64;
    let half = r / 2;
    // [k] < 0 exactly when k mod r lies in (r/2, r).
    let full = n / r;
    let rem = n % r;
    full * (r - 1 - half) + (rem - half).max(0)
}
